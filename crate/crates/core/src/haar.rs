//! Seeded Haar-random unitaries.
//!
//! Every sample owns an independent ChaCha20 stream selected by
//! `(master_seed, sample_index)`, so a matrix never depends on which worker
//! produced it or in what order.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// An n×n unitary matrix, the passive linear-optical circuit acting on n modes.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix(CMatrix);

impl UnitaryMatrix {
    /// Wraps `m` after checking `m†m = I` to 1e-10.
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::invalid("unitary must be a non-empty square matrix"));
        }
        let dev = unitarity_defect(&m);
        if dev > 1e-10 {
            return Err(Error::invalid(format!("matrix is not unitary (defect {dev:e})")));
        }
        Ok(UnitaryMatrix(m))
    }

    pub fn identity(n: usize) -> Self {
        UnitaryMatrix(CMatrix::identity(n, n))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    /// Entrywise complex conjugate, again unitary.
    pub fn conj(&self) -> Self {
        UnitaryMatrix(self.0.map(|z| z.conj()))
    }
}

/// max |(U†U − I)_ab|
pub fn unitarity_defect(m: &CMatrix) -> f64 {
    let g = m.adjoint() * m;
    let mut worst = 0.0f64;
    for (i, j) in (0..g.nrows()).flat_map(|i| (0..g.ncols()).map(move |j| (i, j))) {
        let target = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
        worst = worst.max((g[(i, j)] - target).norm());
    }
    worst
}

/// The random stream owned by one sample.
pub fn sample_rng(master_seed: u64, sample_index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
    rng.set_stream(sample_index);
    rng
}

/// Draws U from the Haar measure on U(n).
///
/// Ginibre matrix → QR → multiply column j of Q by the phase of R_jj. Without
/// the phase fix the result is not Haar distributed.
pub fn haar_unitary(n: usize, master_seed: u64, sample_index: u64) -> Result<UnitaryMatrix> {
    if n == 0 {
        return Err(Error::invalid("haar_unitary needs n >= 1"));
    }
    let mut rng = sample_rng(master_seed, sample_index);
    Ok(haar_unitary_with(n, &mut rng))
}

pub fn haar_unitary_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> UnitaryMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    // column-major fill keeps the draw order fixed for a given stream
    let ginibre = CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * scale, im * scale)
    });
    let qr = ginibre.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let norm = d.norm();
        let phase = if norm > 0.0 { d / norm } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    UnitaryMatrix(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_mode_is_a_phase() {
        let u = haar_unitary(1, 3, 0).unwrap();
        assert!((u.matrix()[(0, 0)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_zero_modes() {
        assert!(haar_unitary(0, 1, 0).is_err());
    }

    #[test]
    fn unitary_across_sizes() {
        for (idx, n) in [1usize, 2, 3, 7, 16, 64, 128, 512].into_iter().enumerate() {
            let u = haar_unitary(n, 99, idx as u64).unwrap();
            assert!(unitarity_defect(u.matrix()) <= 1e-10, "n = {n}");
        }
    }

    #[test]
    fn reproducible_bitwise() {
        let a = haar_unitary(12, 5, 17).unwrap();
        let b = haar_unitary(12, 5, 17).unwrap();
        assert_eq!(a, b);
        let c = haar_unitary(12, 5, 18).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn first_moment_matches_haar() {
        // E|U_ij|^2 = 1/n; check several entries at 3 standard errors.
        let n = 4;
        let samples = 20_000u64;
        for &(i, j) in &[(0usize, 0usize), (1, 3), (3, 2)] {
            let vals: Vec<f64> = (0..samples)
                .map(|s| haar_unitary(n, 2024, s).unwrap().matrix()[(i, j)].norm_sqr())
                .collect();
            let mean = vals.iter().sum::<f64>() / samples as f64;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (samples - 1) as f64;
            let se = (var / samples as f64).sqrt();
            assert!((mean - 0.25).abs() < 3.0 * se, "entry ({i},{j}): mean {mean}, se {se}");
        }
    }

    #[test]
    fn diagonal_phase_is_uniform() {
        // Naive QR without the phase fix biases arg(U_00); with it E[U_00] = 0.
        let n = 3;
        let samples = 20_000u64;
        let mut acc = Complex64::new(0.0, 0.0);
        for s in 0..samples {
            acc += haar_unitary(n, 77, s).unwrap().matrix()[(0, 0)];
        }
        let mean = acc / samples as f64;
        // Var(Re U_00) = 1/(2n)
        let se = (1.0 / (2.0 * n as f64) / samples as f64).sqrt();
        assert!(mean.re.abs() < 4.0 * se && mean.im.abs() < 4.0 * se, "{mean}");
    }
}
