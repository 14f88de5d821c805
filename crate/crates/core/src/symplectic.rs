//! Symplectic eigenvalues of covariance matrices.
//!
//! Route: with σ = S², the matrix A = S Ω S is antisymmetric and similar to
//! Ωσ, so AᵀA = −A² is symmetric positive semidefinite with eigenvalues ν_j²,
//! each appearing twice. Two symmetric eigen-solves, no non-symmetric ones.

use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::state::{symplectic_form, CovarianceMatrix, RMatrix};

/// Values closer to 1 than this are treated as 1.
pub const CLAMP_WINDOW: f64 = 1e-8;
/// Anything below 1 − FAIL_WINDOW is an unphysical matrix.
pub const FAIL_WINDOW: f64 = 1e-6;

/// Descending symplectic eigenvalues, all >= 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticSpectrum(Vec<f64>);

impl SymplecticSpectrum {
    /// Validates and sorts raw values, clamping those within [`FAIL_WINDOW`] below 1.
    pub fn from_values(mut values: Vec<f64>) -> Result<Self> {
        for v in values.iter_mut() {
            if !v.is_finite() {
                return Err(Error::invalid("symplectic eigenvalue is not finite"));
            }
            if *v < 1.0 - FAIL_WINDOW {
                return Err(Error::Unphysical(*v));
            }
            if *v < 1.0 {
                *v = 1.0;
            }
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(SymplecticSpectrum(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Spectrum of the product state with both sets of modes.
    pub fn concat(&self, other: &SymplecticSpectrum) -> SymplecticSpectrum {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        v.sort_by(|a, b| b.total_cmp(a));
        SymplecticSpectrum(v)
    }

    /// Pads with ones (pure modes) up to `len`.
    pub fn padded(&self, len: usize) -> Vec<f64> {
        let mut v = self.0.clone();
        v.resize(len.max(v.len()), 1.0);
        v
    }
}

pub fn symplectic_eigenvalues(sigma: &CovarianceMatrix) -> Result<SymplecticSpectrum> {
    let m = sigma.modes();
    let eig = SymmetricEigen::new(sigma.matrix().clone());
    let min_eig = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min_eig <= 0.0 {
        return Err(Error::Unphysical(min_eig));
    }
    let root = eig.eigenvalues.map(f64::sqrt);
    let vecs = &eig.eigenvectors;
    let mut scaled = vecs.clone();
    for (j, r) in root.iter().enumerate() {
        scaled.column_mut(j).scale_mut(*r);
    }
    let sqrt_sigma: RMatrix = &scaled * vecs.transpose();
    let a = &sqrt_sigma * symplectic_form(m) * &sqrt_sigma;
    let b = a.transpose() * &a;
    let b = (&b + b.transpose()) * 0.5;

    let mut sq: Vec<f64> = SymmetricEigen::new(b).eigenvalues.iter().copied().collect();
    sq.sort_by(|x, y| y.total_cmp(x));
    let nus = sq
        .chunks_exact(2)
        .map(|pair| (0.5 * (pair[0] + pair[1])).max(0.0).sqrt())
        .collect();
    SymplecticSpectrum::from_values(nus)
}
