//! Trimmed inner products and the covariance / correlation estimators built
//! on them.
//!
//! `⟨x, x'⟩_c` multiplies element-wise and sums every product except the `c`
//! largest in magnitude. Ties in magnitude keep the lower index. Retained
//! products are always summed in index order, so `c = 0` is bit-identical to
//! the plain left-to-right inner product.

use crate::error::{invalid, DrlError, Result};
use crate::matrix::{Matrix, MatrixView};
use crate::par;

const ABS_MASK: u64 = !(1u64 << 63);

/// Non-negative floats order like their bit patterns, which is what the
/// selection below sorts on.
#[inline]
fn abs_bits(v: f64) -> u64 {
    v.to_bits() & ABS_MASK
}

#[derive(Default)]
struct Scratch {
    products: Vec<f64>,
    keys: Vec<u64>,
}

/// Magnitude threshold `t` (as bits) and how many products with `|q| == t`
/// are retained, lowest index first.
fn threshold(q: &[f64], keep: usize, keys: &mut Vec<u64>) -> (u64, usize) {
    keys.clear();
    keys.extend(q.iter().map(|&v| abs_bits(v)));
    let (smaller, t, _) = keys.select_nth_unstable(keep - 1);
    let t = *t;
    let below = smaller.iter().filter(|&&b| b < t).count();
    (t, keep - below)
}

fn sum_in_order(q: &[f64]) -> f64 {
    q.iter().fold(0.0, |acc, v| acc + v)
}

fn trimmed_sum(q: &[f64], trim_count: usize, keys: &mut Vec<u64>) -> f64 {
    if trim_count == 0 {
        return sum_in_order(q);
    }
    let keep = q.len() - trim_count;
    if keep == 0 {
        return 0.0;
    }
    let (t, mut ties) = threshold(q, keep, keys);
    let mut acc = 0.0;
    for &v in q {
        let b = abs_bits(v);
        if b < t {
            acc += v;
        } else if b == t && ties > 0 {
            ties -= 1;
            acc += v;
        }
    }
    acc
}

fn check_lengths(a: usize, b: usize, trim_count: usize) -> Result<()> {
    if a != b {
        return Err(DrlError::ShapeMismatch {
            expected: format!("length {a}"),
            found: format!("length {b}"),
        });
    }
    if trim_count >= a {
        return Err(invalid(format!("trim count {trim_count} must be below vector length {a}")));
    }
    Ok(())
}

fn fill_products(q: &mut Vec<f64>, x: &[f64], x2: &[f64]) {
    q.clear();
    q.extend(x.iter().zip(x2).map(|(a, b)| a * b));
}

/// Number of products to trim for outlier fraction `lambda` over `len`
/// samples: `floor(lambda · len)`.
pub fn trim_count_for(lambda: f64, len: usize) -> Result<usize> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(invalid(format!("outlier fraction {lambda} outside [0, 1)")));
    }
    if len == 0 {
        return Err(DrlError::Empty("sample set"));
    }
    let c = (lambda * len as f64).floor() as usize;
    if c >= len {
        return Err(invalid(format!("trim count {c} leaves no samples out of {len}")));
    }
    Ok(c)
}

/// Sum of `x_i·x2_i` over all but the `trim_count` largest-magnitude products.
pub fn trimmed_inner_product(x: &[f64], x2: &[f64], trim_count: usize) -> Result<f64> {
    check_lengths(x.len(), x2.len(), trim_count)?;
    let mut q = Vec::with_capacity(x.len());
    fill_products(&mut q, x, x2);
    Ok(trimmed_sum(&q, trim_count, &mut Vec::new()))
}

/// Indices of the products retained by [`trimmed_inner_product`], ascending.
pub fn retained_indices(x: &[f64], x2: &[f64], trim_count: usize) -> Result<Vec<usize>> {
    check_lengths(x.len(), x2.len(), trim_count)?;
    let mut q = Vec::with_capacity(x.len());
    fill_products(&mut q, x, x2);
    if trim_count == 0 {
        return Ok((0..q.len()).collect());
    }
    let (t, mut ties) = threshold(&q, q.len() - trim_count, &mut Vec::new());
    let mut out = Vec::with_capacity(q.len() - trim_count);
    for (i, &v) in q.iter().enumerate() {
        let b = abs_bits(v);
        if b < t || (b == t && ties > 0) {
            if b == t {
                ties -= 1;
            }
            out.push(i);
        }
    }
    Ok(out)
}

/// `Ĉ_ij = ⟨X_i, X_j⟩_c` over the rows of a p×m sample matrix. Unnormalized,
/// so `c = 0` gives exactly `XXᵀ`.
pub fn trimmed_covariance(x: MatrixView<'_>, trim_count: usize) -> Result<Matrix> {
    let (p, m) = (x.rows(), x.cols());
    if trim_count >= m {
        return Err(invalid(format!("trim count {trim_count} must be below sample count {m}")));
    }
    let pairs: Vec<(usize, usize)> = (0..p).flat_map(|i| (i..p).map(move |j| (i, j))).collect();
    let entries = par::map_indexed_init(pairs.len(), Scratch::default, |s, idx| {
        let (i, j) = pairs[idx];
        fill_products(&mut s.products, x.row(i), x.row(j));
        trimmed_sum(&s.products, trim_count, &mut s.keys)
    });
    let mut c = Matrix::zeros(p, p);
    for (&(i, j), v) in pairs.iter().zip(entries) {
        c.set(i, j, v);
        c.set(j, i, v);
    }
    Ok(c)
}

/// `θ̂_j = ⟨y, X_j⟩_c / (N − c)` for every covariate row `j`.
pub fn trimmed_correlation(y: &[f64], x: MatrixView<'_>, trim_count: usize) -> Result<Vec<f64>> {
    check_lengths(x.cols(), y.len(), trim_count)?;
    let retained = (y.len() - trim_count) as f64;
    Ok(par::map_indexed_init(x.rows(), Scratch::default, |s, j| {
        fill_products(&mut s.products, y, x.row(j));
        trimmed_sum(&s.products, trim_count, &mut s.keys) / retained
    }))
}
