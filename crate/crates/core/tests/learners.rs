use drl_core::harness::relative_error;
use drl_core::rlr::{base_rotr, least_squares_baseline, untrimmed_correlation};
use drl_core::rng::stream_rng;
use drl_core::rpca::{base_rpca, projection_from_basis, standard_pca};
use drl_core::synth::{gen_lr, gen_pca, LrScenario, PcaScenario, PlacementPolicy};
use drl_core::Matrix;
use rand::Rng;
use rand_distr::StandardNormal;

fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = stream_rng(seed, 0);
    let data = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
    Matrix::from_vec(rows, cols, data).unwrap()
}

fn gram_oracle(x: &Matrix) -> Vec<Vec<f64>> {
    let p = x.rows();
    let mut g = vec![vec![0.0; p]; p];
    for (i, gi) in g.iter_mut().enumerate() {
        for (j, gij) in gi.iter_mut().enumerate() {
            *gij = (0..x.cols()).map(|c| x.get(i, c) * x.get(j, c)).sum();
        }
    }
    g
}

/// Cyclic Jacobi rotations; returns eigenvalues and eigenvectors as columns.
fn jacobi(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j].powi(2)).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = c * akp - s * akq;
                    row[q] = s * akp + c * akq;
                }
                let (lo, hi) = a.split_at_mut(q);
                for (apk, aqk) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                    let (x, y) = (*apk, *aqk);
                    *apk = c * x - s * y;
                    *aqk = s * x + c * y;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

#[test]
fn standard_pca_matches_jacobi_oracle() {
    let (p, d) = (20, 5);
    for seed in 0..5 {
        let x = random_matrix(p, 40, 100 + seed);
        let (values, vectors) = jacobi(gram_oracle(&x));
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
        let top = &order[..d];

        let model = standard_pca(x.view(), d).unwrap();
        let got = projection_from_basis(&model);
        let mut dist = 0.0;
        for i in 0..p {
            for j in 0..p {
                let want: f64 = top.iter().map(|&c| vectors[i][c] * vectors[j][c]).sum();
                dist += (got.get(i, j) - want).powi(2);
            }
        }
        assert!(dist.sqrt() <= 1e-8, "seed {seed}: subspace distance {}", dist.sqrt());
        for (e, &c) in model.eigenvalues.iter().zip(top) {
            assert!((e - values[c]).abs() <= 1e-8 * values[top[0]]);
        }
    }
}

/// Gauss-Jordan inverse with partial pivoting.
fn invert(mut a: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut inv: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs())).unwrap();
        a.swap(col, piv);
        inv.swap(col, piv);
        let d = a[col][col];
        for j in 0..n {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for r in 0..n {
            if r != col {
                let f = a[r][col];
                for j in 0..n {
                    a[r][j] -= f * a[col][j];
                    inv[r][j] -= f * inv[col][j];
                }
            }
        }
    }
    inv
}

#[test]
fn least_squares_matches_pseudo_inverse() {
    for seed in 0..5 {
        let x = random_matrix(5, 50, 200 + seed);
        let mut rng = stream_rng(300 + seed, 0);
        let y: Vec<f64> = (0..50).map(|_| rng.sample(StandardNormal)).collect();
        // pinv(Xᵀ) = (X Xᵀ)⁻¹ X
        let inv = invert(gram_oracle(&x));
        let xy: Vec<f64> = (0..5).map(|r| (0..50).map(|c| x.get(r, c) * y[c]).sum()).collect();
        let want: Vec<f64> = inv.iter().map(|row| row.iter().zip(&xy).map(|(a, b)| a * b).sum()).collect();

        let got = least_squares_baseline(x.view(), &y).unwrap();
        for (g, w) in got.theta.values().iter().zip(&want) {
            assert!((g - w).abs() <= 1e-8, "seed {seed}: {g} vs {w}");
        }
    }
}

#[test]
fn rotr_is_consistent_on_clean_data() {
    let (p, n) = (10, 50_000);
    let x = random_matrix(p, n, 7);
    let mut rng = stream_rng(8, 0);
    let theta: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
    let y: Vec<f64> = (0..n).map(|c| (0..p).map(|r| theta[r] * x.get(r, c)).sum()).collect();
    let got = base_rotr(x.view(), &y, 0.0).unwrap();
    let err: f64 = got.theta.values().iter().zip(&theta).map(|(g, t)| (g - t).powi(2)).sum::<f64>().sqrt();
    let norm: f64 = theta.iter().map(|t| t * t).sum::<f64>().sqrt();
    assert!(err / norm <= 0.05, "relative error {}", err / norm);
}

#[test]
fn single_node_pca_resists_outliers() {
    let scenario = PcaScenario {
        p: 50,
        d: 5,
        n_total: 5000,
        lambda: 0.3,
        sigma_e: 1.0,
        sigma_o: 10.0,
        placement: PlacementPolicy::Uniform,
        seed: 11,
    };
    let ds = gen_pca(&scenario, 1).unwrap();
    let robust = relative_error(&ds, &projection_from_basis(&base_rpca(ds.x.view(), 5, 0.3).unwrap())).unwrap();
    let plain = relative_error(&ds, &projection_from_basis(&standard_pca(ds.x.view(), 5).unwrap())).unwrap();
    assert!(robust < 0.5, "robust error {robust}");
    assert!(plain > 2.0 * robust, "standard {plain} vs robust {robust}");
}

#[test]
fn single_node_regression_resists_outliers() {
    let scenario = LrScenario {
        p: 50,
        n_total: 5000,
        lambda: 0.3,
        sigma_e: 1.0,
        sigma_o: 10.0,
        placement: PlacementPolicy::Uniform,
        seed: 12,
    };
    let ds = gen_lr(&scenario, 1).unwrap();
    let y = ds.y.as_deref().unwrap();
    let robust = relative_error(&ds, &base_rotr(ds.x.view(), y, 0.3).unwrap().theta).unwrap();
    let plain = relative_error(&ds, &untrimmed_correlation(ds.x.view(), y).unwrap().theta).unwrap();
    assert!(robust < 0.5, "robust error {robust}");
    assert!(plain > 2.0 * robust, "untrimmed {plain} vs robust {robust}");
}

#[test]
fn planted_huge_outliers_stay_bounded() {
    let (p, n, lambda) = (5, 2000, 0.1);
    let mut x = random_matrix(p, n, 13);
    let mut rng = stream_rng(14, 0);
    let theta: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
    let mut y: Vec<f64> = (0..n).map(|c| (0..p).map(|r| theta[r] * x.get(r, c)).sum()).collect();
    let clean = base_rotr(x.view(), &y, 0.0).unwrap().theta;

    let planted = (lambda * n as f64) as usize;
    for c in 0..planted {
        for r in 0..p {
            x.set(r, c * 10, 1e6);
        }
        y[c * 10] = -1e6;
    }
    let got = base_rotr(x.view(), &y, lambda).unwrap().theta;
    for (g, c) in got.values().iter().zip(clean.values()) {
        assert!(g.abs() <= 10.0 * c.abs() + 1.0, "{g} vs clean {c}");
    }
}

#[test]
fn regression_error_grows_no_faster_than_the_bound_shape() {
    let shape = |lambda: f64| lambda / (1.0 - lambda);
    let error = |lambda: f64| {
        let scenario = LrScenario {
            p: 50,
            n_total: 20_000,
            lambda,
            sigma_e: 1.0,
            sigma_o: 10.0,
            placement: PlacementPolicy::Uniform,
            seed: 15,
        };
        let ds = gen_lr(&scenario, 1).unwrap();
        let theta = base_rotr(ds.x.view(), ds.y.as_deref().unwrap(), lambda).unwrap().theta;
        relative_error(&ds, &theta).unwrap()
    };
    let c = error(0.1) / shape(0.1);
    for lambda in [0.2, 0.3] {
        let e = error(lambda);
        assert!(e <= c * shape(lambda), "lambda {lambda}: {e} exceeds {}", c * shape(lambda));
    }
}
