//! Robust PCA on a single node: trimmed covariance, then the top-d
//! eigenvectors. Standard PCA is the same with nothing trimmed.

use crate::error::{invalid, DrlError, Result};
use crate::estimate::{Estimate, EstimateKind};
use crate::linalg::symmetric_eigen;
use crate::matrix::{gram, Matrix, MatrixView};
use crate::metrics::eigengap;
use crate::trimmed::{trim_count_for, trimmed_covariance};

#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    /// p×d, orthonormal columns.
    pub basis: Estimate,
    /// Top-d eigenvalues of the (trimmed) covariance, descending.
    pub eigenvalues: Vec<f64>,
    /// `σ_d − σ_{d+1}` of the estimated covariance.
    pub eigengap: f64,
    /// Set when `σ_d ≤ 1e-12 · σ_1`, i.e. the covariance has rank below d.
    pub degenerate: bool,
}

impl PcaModel {
    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.rows()
    }
}

fn check_dim(p: usize, d: usize) -> Result<()> {
    if d == 0 || d >= p {
        return Err(invalid(format!("subspace dimension {d} must satisfy 1 <= d < p = {p}")));
    }
    Ok(())
}

pub fn base_rpca(x: MatrixView<'_>, d: usize, lambda: f64) -> Result<PcaModel> {
    check_dim(x.rows(), d)?;
    let trim = trim_count_for(lambda, x.cols())?;
    top_subspace(&trimmed_covariance(x, trim)?, d)
}

/// PCA on the plain second-moment matrix `X Xᵀ`, nothing trimmed.
pub fn standard_pca(x: MatrixView<'_>, d: usize) -> Result<PcaModel> {
    check_dim(x.rows(), d)?;
    if x.cols() == 0 {
        return Err(DrlError::Empty("sample set"));
    }
    top_subspace(&gram(x), d)
}

fn top_subspace(cov: &Matrix, d: usize) -> Result<PcaModel> {
    let p = cov.rows();
    let eig = symmetric_eigen(cov)?;

    let mut basis = Vec::with_capacity(p * d);
    for r in 0..p {
        for c in 0..d {
            basis.push(eig.vectors.get(r, c));
        }
    }
    let gap = eigengap(&eig.values, d)?;
    let degenerate = eig.values[d - 1] <= 1e-12 * eig.values[0].abs();
    Ok(PcaModel {
        basis: Estimate::new(EstimateKind::EigenBasis, p, d, basis)?,
        eigenvalues: eig.values[..d].to_vec(),
        eigengap: gap,
        degenerate,
    })
}


/// `W Wᵀ` for the model's basis.
pub fn projection_from_basis(model: &PcaModel) -> Estimate {
    projection_from_eigenbasis(&model.basis).expect("model basis is a valid eigenbasis")
}

pub fn projection_from_eigenbasis(basis: &Estimate) -> Result<Estimate> {
    if basis.kind() != EstimateKind::EigenBasis {
        return Err(invalid(format!("expected an eigenbasis, got {}", basis.kind())));
    }
    let (p, d) = (basis.rows(), basis.cols());
    let w = basis.values();
    let mut proj = vec![0.0; p * p];
    for i in 0..p {
        for j in i..p {
            let mut s = 0.0;
            for l in 0..d {
                s += w[i * d + l] * w[j * d + l];
            }
            proj[i * p + j] = s;
            proj[j * p + i] = s;
        }
    }
    Estimate::projection(p, proj)
}
