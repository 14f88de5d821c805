//! Covariance matrices of squeezed vacua after a passive circuit.
//!
//! Ordering is xxpp throughout: row `i` is x_i and row `m + i` is p_i, and the
//! vacuum covariance is the identity.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::haar::{CMatrix, UnitaryMatrix};

pub type RMatrix = DMatrix<f64>;

/// Per-mode squeezing strengths of the input state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqueezingConfig {
    s: Vec<f64>,
}

impl SqueezingConfig {
    pub fn new(s: Vec<f64>) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::invalid("squeezing config needs at least one mode"));
        }
        if let Some(bad) = s.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite squeezing strength {bad}")));
        }
        Ok(SqueezingConfig { s })
    }

    pub fn equal(n: usize, s: f64) -> Result<Self> {
        Self::new(vec![s; n])
    }

    pub fn n(&self) -> usize {
        self.s.len()
    }

    pub fn strengths(&self) -> &[f64] {
        &self.s
    }

    /// `Some(s)` when every mode carries the same strength.
    pub fn common_strength(&self) -> Option<f64> {
        let first = self.s[0];
        self.s.iter().all(|&v| v == first).then_some(first)
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.s.iter().map(|v| v * v).sum()
    }
}

/// Real symmetric 2m×2m covariance matrix of an m-mode Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    m: usize,
    data: RMatrix,
}

fn max_abs(m: &RMatrix) -> f64 {
    m.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

pub(crate) fn asymmetry(m: &RMatrix) -> f64 {
    (m - m.transpose()).iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

impl CovarianceMatrix {
    /// Checks shape and symmetry (1e-10, scaled by the largest entry when it exceeds one).
    pub fn new(data: RMatrix) -> Result<Self> {
        if !data.is_square() || data.nrows() == 0 || data.nrows() % 2 != 0 {
            return Err(Error::invalid(format!(
                "covariance matrix must be 2m×2m, got {}×{}",
                data.nrows(),
                data.ncols()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("covariance matrix has non-finite entries"));
        }
        let asym = asymmetry(&data);
        if asym > 1e-10 * max_abs(&data).max(1.0) {
            return Err(Error::NotSymmetric(asym));
        }
        // exact symmetrisation removes rounding noise from products
        let data = (&data + data.transpose()) * 0.5;
        Ok(CovarianceMatrix { m: data.nrows() / 2, data })
    }

    pub fn vacuum(m: usize) -> Self {
        CovarianceMatrix { m, data: RMatrix::identity(2 * m, 2 * m) }
    }

    pub fn modes(&self) -> usize {
        self.m
    }

    pub fn matrix(&self) -> &RMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> RMatrix {
        self.data
    }
}

/// Ω = [[0, I], [−I, 0]] on m modes.
pub fn symplectic_form(m: usize) -> RMatrix {
    let mut omega = RMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        omega[(i, m + i)] = 1.0;
        omega[(m + i, i)] = -1.0;
    }
    omega
}

/// M = [[Re A, Im A], [Im A, −Re A]] with A = P Ū U† Pᵀ.
#[derive(Debug, Clone, PartialEq)]
pub struct MMatrix(RMatrix);

impl MMatrix {
    pub fn matrix(&self) -> &RMatrix {
        &self.0
    }

    pub fn modes(&self) -> usize {
        self.0.nrows() / 2
    }
}

fn check_modes(n: usize, modes: &[usize]) -> Result<()> {
    let mut seen = vec![false; n];
    for &i in modes {
        if i >= n {
            return Err(Error::invalid(format!("mode index {i} out of range for {n} modes")));
        }
        if seen[i] {
            return Err(Error::invalid(format!("mode index {i} repeated")));
        }
        seen[i] = true;
    }
    Ok(())
}

fn first_modes(n: usize, k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > n {
        return Err(Error::invalid(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    Ok((0..k).collect())
}

/// The k×k block A = P Ū U† Pᵀ for the rows in `modes`.
///
/// (Ū U†)_ab = conj(Σ_c U_ac U_bc), so only the selected rows of U are touched.
pub fn coupling_block(u: &UnitaryMatrix, modes: &[usize]) -> Result<CMatrix> {
    check_modes(u.n(), modes)?;
    let rows = u.matrix().select_rows(modes);
    Ok((&rows * rows.transpose()).map(|z| z.conj()))
}

pub fn build_m(u: &UnitaryMatrix, k: usize) -> Result<MMatrix> {
    build_m_modes(u, &first_modes(u.n(), k)?)
}

pub fn build_m_modes(u: &UnitaryMatrix, modes: &[usize]) -> Result<MMatrix> {
    if modes.is_empty() {
        return Err(Error::invalid("mode set must not be empty"));
    }
    let a = coupling_block(u, modes)?;
    let k = modes.len();
    let mut m = RMatrix::zeros(2 * k, 2 * k);
    for i in 0..k {
        for j in 0..k {
            let z = a[(i, j)];
            m[(i, j)] = z.re;
            m[(i, k + j)] = z.im;
            m[(k + i, j)] = z.im;
            m[(k + i, k + j)] = -z.re;
        }
    }
    Ok(MMatrix(m))
}

fn equal_from_m(m: &MMatrix, s: f64) -> Result<CovarianceMatrix> {
    if !s.is_finite() {
        return Err(Error::invalid(format!("non-finite squeezing strength {s}")));
    }
    let (c, sh) = ((2.0 * s).cosh(), (2.0 * s).sinh());
    let dim = m.matrix().nrows();
    CovarianceMatrix::new(RMatrix::identity(dim, dim) * c + m.matrix() * sh)
}

/// σ = cosh(2s) I + sinh(2s) M(U, k) for the first k output modes.
pub fn reduced_covariance_equal(u: &UnitaryMatrix, s: f64, k: usize) -> Result<CovarianceMatrix> {
    equal_from_m(&build_m(u, k)?, s)
}

/// Same as [`reduced_covariance_equal`] for an arbitrary set of output modes.
pub fn reduced_covariance_equal_modes(
    u: &UnitaryMatrix,
    s: f64,
    modes: &[usize],
) -> Result<CovarianceMatrix> {
    equal_from_m(&build_m_modes(u, modes)?, s)
}

/// Orthogonal symplectic image of U: O = [[Re U, −Im U], [Im U, Re U]].
pub fn passive_symplectic(u: &UnitaryMatrix) -> RMatrix {
    let n = u.n();
    let m = u.matrix();
    let mut o = RMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            o[(i, j)] = z.re;
            o[(i, n + j)] = -z.im;
            o[(n + i, j)] = z.im;
            o[(n + i, n + j)] = z.re;
        }
    }
    o
}

/// σ_full = O(U) diag(e^{2s_i}, e^{−2s_i}) O(U)ᵀ on all n modes.
///
/// With equal strengths this reproduces the M construction for Ū, not U.
pub fn full_covariance_general(u: &UnitaryMatrix, cfg: &SqueezingConfig) -> Result<CovarianceMatrix> {
    let n = u.n();
    if cfg.n() != n {
        return Err(Error::invalid(format!(
            "squeezing config has {} modes but unitary acts on {n}",
            cfg.n()
        )));
    }
    let o = passive_symplectic(u);
    let mut od = o.clone();
    for (i, &s) in cfg.strengths().iter().enumerate() {
        let up = (2.0 * s).exp();
        let down = (-2.0 * s).exp();
        od.column_mut(i).scale_mut(up);
        od.column_mut(n + i).scale_mut(down);
    }
    CovarianceMatrix::new(od * o.transpose())
}

/// Keeps rows and columns {i, m+i : i ∈ modes}, in the order given.
pub fn reduce_modes(sigma: &CovarianceMatrix, modes: &[usize]) -> Result<CovarianceMatrix> {
    let m = sigma.modes();
    if modes.is_empty() {
        return Err(Error::invalid("mode set must not be empty"));
    }
    check_modes(m, modes)?;
    let idx: Vec<usize> = modes.iter().copied().chain(modes.iter().map(|i| m + i)).collect();
    let sub = sigma.matrix().select_rows(&idx).select_columns(&idx);
    Ok(CovarianceMatrix { m: modes.len(), data: sub })
}

/// Complement of `modes` in {0, …, n−1}, ascending.
pub fn complement(n: usize, modes: &[usize]) -> Vec<usize> {
    let mut keep = vec![true; n];
    for &i in modes {
        if i < n {
            keep[i] = false;
        }
    }
    (0..n).filter(|&i| keep[i]).collect()
}

/// Dense W = Π U Ū† Π Ū U† Π (n×n). Only used for checks; see [`w_spectrum`].
pub fn w_matrix(u: &UnitaryMatrix, k: usize) -> Result<CMatrix> {
    let n = u.n();
    first_modes(n, k)?;
    let mut pi = CMatrix::zeros(n, n);
    for i in 0..k {
        pi[(i, i)] = Complex64::new(1.0, 0.0);
    }
    let um = u.matrix();
    let ubar = um.map(|z| z.conj());
    let left = um * ubar.adjoint();
    let right = &ubar * um.adjoint();
    Ok(&pi * left * &pi * right * &pi)
}

/// The k potentially nonzero eigenvalues of W, ascending, clamped into [0, 1].
///
/// They coincide with the eigenvalues of the k×k Hermitian matrix A†A,
/// A = P Ū U† Pᵀ.
pub fn w_spectrum(u: &UnitaryMatrix, k: usize) -> Result<Vec<f64>> {
    w_spectrum_modes(u, &first_modes(u.n(), k)?)
}

pub fn w_spectrum_modes(u: &UnitaryMatrix, modes: &[usize]) -> Result<Vec<f64>> {
    let a = coupling_block(u, modes)?;
    let h = a.adjoint() * &a;
    let h = (&h + h.adjoint()).map(|z| z * 0.5);
    let eig = SymmetricEigen::new(h);
    let mut vals: Vec<f64> = eig.eigenvalues.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    vals.sort_by(|a, b| a.total_cmp(b));
    Ok(vals)
}

/// Tr(W^i) for i = 1..=i_max from one Hermitian eigen-solve.
pub fn trw_moments(u: &UnitaryMatrix, k: usize, i_max: usize) -> Result<Vec<f64>> {
    if i_max == 0 {
        return Err(Error::invalid("i_max must be at least 1"));
    }
    Ok(power_sums(&w_spectrum(u, k)?, i_max))
}

pub(crate) fn power_sums(vals: &[f64], i_max: usize) -> Vec<f64> {
    let mut pows = vals.to_vec();
    let mut out = Vec::with_capacity(i_max);
    for _ in 0..i_max {
        out.push(pows.iter().sum());
        for (p, v) in pows.iter_mut().zip(vals) {
            *p *= v;
        }
    }
    out
}
