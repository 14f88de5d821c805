//! Entropies of Gaussian states from their symplectic spectra (nats).

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symplectic::SymplecticSpectrum;

/// An entropy in nats together with its order (1 = von Neumann).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyValue {
    pub value: f64,
    pub alpha: u32,
}

fn check_alpha(alpha: u32) -> Result<()> {
    if alpha < 2 {
        return Err(Error::invalid(format!("Rényi order must be an integer >= 2, got {alpha}")));
    }
    Ok(())
}

/// ln(((ν+1)^α − (ν−1)^α) / 2^α) evaluated as α ln((ν+1)/2) + ln(1 − ρ^α),
/// ρ = (ν−1)/(ν+1); no power is ever formed, so nothing overflows.
fn renyi_mode_log(nu: f64, alpha: u32) -> f64 {
    // ln ρ = ln(1 − 2/(ν+1)); 1 − ρ^α = −expm1(α ln ρ) stays accurate as ρ → 1
    let one_minus = if nu > 1.0 {
        -(alpha as f64 * (-2.0 / (nu + 1.0)).ln_1p()).exp_m1()
    } else {
        1.0
    };
    alpha as f64 * ((nu + 1.0) / 2.0).ln() + one_minus.ln()
}

pub fn renyi_entropy(nu: &SymplecticSpectrum, alpha: u32) -> Result<EntropyValue> {
    check_alpha(alpha)?;
    let sum: f64 = nu.values().iter().map(|&v| renyi_mode_log(v, alpha)).sum();
    Ok(EntropyValue { value: sum / (alpha as f64 - 1.0), alpha })
}

/// cot²(πm/α) for m = 1..=⌊(α−1)/2⌋.
pub fn cot_squares(alpha: u32) -> Vec<f64> {
    let a = (alpha - 1) / 2;
    (1..=a)
        .map(|m| {
            let t = (PI * m as f64 / alpha as f64).tan();
            1.0 / (t * t)
        })
        .collect()
}

/// Same value as [`renyi_entropy`], through the root factorisation
/// (ν+1)^α − (ν−1)^α = 2α ν^ζ Π_m (ν² + cot²(πm/α)), ζ = 1 for even α.
pub fn renyi_entropy_factored(nu: &SymplecticSpectrum, alpha: u32) -> Result<EntropyValue> {
    check_alpha(alpha)?;
    let zeta = if alpha % 2 == 0 { 1.0 } else { 0.0 };
    let cots = cot_squares(alpha);
    let constant = (2.0 * alpha as f64).ln() - alpha as f64 * LN_2;
    let sum: f64 = nu
        .values()
        .iter()
        .map(|&v| {
            let prod: f64 = cots.iter().map(|c| (v * v + c).ln()).sum();
            constant + zeta * v.ln() + prod
        })
        .sum();
    Ok(EntropyValue { value: sum / (alpha as f64 - 1.0), alpha })
}

/// Per-mode von Neumann entropy g(ν) = ((ν+1)/2) ln((ν+1)/2) − ((ν−1)/2) ln((ν−1)/2).
pub fn vn_mode_entropy(nu: f64) -> f64 {
    let eps = nu - 1.0;
    if eps <= 0.0 {
        return 0.0;
    }
    if eps < 1e-6 {
        let h = 0.5 * eps;
        return h * (1.0 - h.ln() + 0.5 * h);
    }
    let p = 0.5 * (nu + 1.0);
    let q = 0.5 * eps;
    p * p.ln() - q * q.ln()
}

pub fn von_neumann_entropy(nu: &SymplecticSpectrum) -> EntropyValue {
    EntropyValue { value: nu.values().iter().map(|&v| vn_mode_entropy(v)).sum(), alpha: 1 }
}

/// Dispatches on the order: 1 is von Neumann, anything larger is Rényi.
pub fn entropy(nu: &SymplecticSpectrum, alpha: u32) -> Result<EntropyValue> {
    match alpha {
        0 => Err(Error::invalid("entropy order must be >= 1")),
        1 => Ok(von_neumann_entropy(nu)),
        _ => renyi_entropy(nu, alpha),
    }
}
