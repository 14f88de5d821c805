//! Special functions behind the Page-curve series: Catalan numbers, the two
//! Gauss hypergeometric families that appear, and the moment polynomials
//! G_i(r), H_i(r).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest index whose Catalan number is computed exactly.
pub const CATALAN_EXACT_MAX: u32 = 33;

/// Term cap for [`hyp2f1_vn`].
pub const HYP2F1_VN_TERM_CAP: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Catalan {
    Exact(u64),
    Approx(f64),
}

impl Catalan {
    pub fn to_f64(self) -> f64 {
        match self {
            Catalan::Exact(v) => v as f64,
            Catalan::Approx(v) => v,
        }
    }
}

/// C_i = binom(2i, i)/(i+1) via C_{i+1} = C_i·2(2i+1)/(i+2).
pub fn catalan(i: u32) -> Catalan {
    if i <= CATALAN_EXACT_MAX {
        let mut c: u128 = 1;
        for j in 0..i as u128 {
            c = c * 2 * (2 * j + 1) / (j + 2);
        }
        Catalan::Exact(c as u64)
    } else {
        Catalan::Approx(ln_catalan(i).exp())
    }
}

/// ln C_i, finite for every i.
pub fn ln_catalan(i: u32) -> f64 {
    let start = i.min(CATALAN_EXACT_MAX);
    let base = match catalan(start) {
        Catalan::Exact(v) => (v as f64).ln(),
        Catalan::Approx(_) => unreachable!(),
    };
    (start..i).fold(base, |acc, j| {
        let j = j as f64;
        acc + (2.0 * (2.0 * j + 1.0) / (j + 2.0)).ln()
    })
}

fn check_unit(r: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::invalid(format!("r must lie in [0, 1], got {r}")));
    }
    Ok(())
}

fn log_sum_exp(logs: &[f64]) -> f64 {
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln()
}

/// ln ₂F₁(1−i, i; 2+i; r).
///
/// Uses the Pfaff form (1−r)^{i−1} ₂F₁(1−i, 2; 2+i; r/(r−1)), whose terms are
/// all positive, so nothing cancels for large i.
pub fn ln_hyp2f1_terminating(i: u32, r: f64) -> Result<f64> {
    if i == 0 {
        return Err(Error::invalid("hyp2f1_terminating needs i >= 1"));
    }
    check_unit(r)?;
    if r == 0.0 || i == 1 {
        return Ok(0.0);
    }
    if r == 1.0 {
        // Chu–Vandermonde: (2)_{i−1}/(2+i)_{i−1} = 1/C_i
        return Ok(-ln_catalan(i));
    }
    let ln_z = (r / (1.0 - r)).ln();
    let fi = i as f64;
    let mut logs = Vec::with_capacity(i as usize);
    let mut l = 0.0;
    logs.push(l);
    for m in 0..(i - 1) {
        let m = m as f64;
        l += ((fi - 1.0 - m) * (m + 2.0) / ((m + 2.0 + fi) * (m + 1.0))).ln() + ln_z;
        logs.push(l);
    }
    Ok((fi - 1.0) * (1.0 - r).ln() + log_sum_exp(&logs))
}

/// ₂F₁(1−i, i; 2+i; r), a polynomial of degree i−1 in r.
pub fn hyp2f1_terminating(i: u32, r: f64) -> Result<f64> {
    Ok(ln_hyp2f1_terminating(i, r)?.exp())
}

/// Value of a truncated series with the number of terms and a tail bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesResult {
    pub value: f64,
    pub terms_used: usize,
    pub tail_estimate: f64,
}

/// ₂F₁(3/2, 1+i; 5/2; x) = 3 Σ_m binom(m+i, m) x^m / (2m+3).
///
/// Sums until the current term drops below `tol·|sum|`; the tail is bounded by
/// term·q/(1−q) with q the next term ratio, which decreases monotonically in m.
pub fn hyp2f1_vn(i: u32, x: f64, tol: f64) -> Result<SeriesResult> {
    if i == 0 {
        return Err(Error::invalid("hyp2f1_vn needs i >= 1"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tol must be positive"));
    }
    if !(0.0..1.0).contains(&x) {
        return Err(Error::Divergent(x));
    }
    let fi = i as f64;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut m = 0usize;
    loop {
        let mf = m as f64;
        let q = x * (mf + 1.0 + fi) / (mf + 1.0) * (2.0 * mf + 3.0) / (2.0 * mf + 5.0);
        if q < 1.0 && term < tol * sum.abs() {
            let tail = term * q / (1.0 - q);
            return Ok(SeriesResult { value: sum, terms_used: m + 1, tail_estimate: tail });
        }
        if m + 1 >= HYP2F1_VN_TERM_CAP {
            return Err(Error::TruncationCap {
                series: "2F1(3/2, 1+i; 5/2; x)",
                tol,
                cap: HYP2F1_VN_TERM_CAP,
                partial: sum,
                bound: f64::INFINITY,
                hint: "x is too close to 1; use the small-squeezing limit",
            });
        }
        term *= q;
        sum += term;
        m += 1;
    }
}

/// G_i(r) = r − r^{i+1} C_i ₂F₁(1−i, i; 2+i; r), assembled in log space.
pub fn g_poly(i: u32, r: f64) -> Result<f64> {
    let ln_f = ln_hyp2f1_terminating(i, r)?;
    if r == 0.0 {
        return Ok(0.0);
    }
    let ln_tail = (i as f64 + 1.0) * r.ln() + ln_catalan(i) + ln_f;
    Ok(r - ln_tail.exp())
}

/// H_i(r) = 4^{i−1} (r(1−r))^i.
pub fn h_poly(i: u32, r: f64) -> Result<f64> {
    if i == 0 {
        return Err(Error::invalid("H_i needs i >= 1"));
    }
    check_unit(r)?;
    let p = r * (1.0 - r);
    if p == 0.0 {
        return Ok(0.0);
    }
    Ok(((i as f64 - 1.0) * 4.0f64.ln() + i as f64 * p.ln()).exp())
}

/// (G_i, H_i) for i = 1, 2, … in O(1) per step.
///
/// Both depend on r only through p = r(1−r). G_i increases to min(r, 1−r):
/// G_1 = p, G_{i+1} = G_i + J_{i−1}, J_0 = p², J_{j+1} = J_j·4p(2j+3)/(2j+6).
/// The J_j are moments of the continuous part of the limiting spectral law
/// of W.
#[derive(Debug, Clone)]
pub struct MomentPolys {
    rho: f64,
    g: f64,
    h: f64,
    j: f64,
    step: u32,
}

impl MomentPolys {
    /// Starts at i = 1 from the product p = r(1−r) ∈ [0, 1/4].
    pub fn from_product(p: f64) -> Self {
        MomentPolys { rho: 4.0 * p, g: p, h: p, j: p * p, step: 0 }
    }

    pub fn new(r: f64) -> Result<Self> {
        check_unit(r)?;
        Ok(Self::from_product(r * (1.0 - r)))
    }
}

impl Iterator for MomentPolys {
    type Item = (f64, f64);

    fn next(&mut self) -> Option<(f64, f64)> {
        let out = (self.g, self.h);
        let jj = self.step as f64;
        self.g += self.j;
        self.h *= self.rho;
        self.j *= self.rho * (2.0 * jj + 3.0) / (2.0 * jj + 6.0);
        self.step += 1;
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{One, ToPrimitive};

    fn binom_big(n: u64, k: u64) -> BigInt {
        let mut acc = BigInt::one();
        for j in 0..k {
            acc = acc * BigInt::from(n - j) / BigInt::from(j + 1);
        }
        acc
    }

    /// Exact rational ₂F₁(1−i, i; 2+i; r) for rational r = num/den.
    fn hyp_exact(i: i64, num: i64, den: i64) -> BigRational {
        let r = BigRational::new(num.into(), den.into());
        let mut term = BigRational::one();
        let mut sum = BigRational::one();
        for m in 0..(i - 1) {
            let f = BigRational::new(
                BigInt::from((1 - i + m) * (i + m)),
                BigInt::from((2 + i + m) * (m + 1)),
            );
            term = term * f * r.clone();
            sum += term.clone();
        }
        sum
    }

    fn g_exact(i: i64, num: i64, den: i64) -> f64 {
        let r = BigRational::new(num.into(), den.into());
        let c = BigRational::from_integer(binom_big(2 * i as u64, i as u64) / BigInt::from(i + 1));
        let mut rp = BigRational::one();
        for _ in 0..=i {
            rp *= r.clone();
        }
        (r - rp * c * hyp_exact(i, num, den)).to_f64().unwrap()
    }

    #[test]
    fn catalan_small() {
        let got: Vec<u64> = (0..=4)
            .map(|i| match catalan(i) {
                Catalan::Exact(v) => v,
                Catalan::Approx(_) => panic!(),
            })
            .collect();
        assert_eq!(got, vec![1, 1, 2, 5, 14]);
    }

    #[test]
    fn catalan_against_big_binomial() {
        for i in [30u32, 33] {
            let expect = binom_big(2 * i as u64, i as u64) / BigInt::from(i + 1);
            match catalan(i) {
                Catalan::Exact(v) => assert_eq!(BigInt::from(v), expect),
                Catalan::Approx(_) => panic!("i = {i} should be exact"),
            }
        }
        let c40 = (binom_big(80, 40) / BigInt::from(41)).to_f64().unwrap();
        assert!(((catalan(40).to_f64() - c40) / c40).abs() < 1e-13);
        assert!(((ln_catalan(200) - (binom_big(400, 200) / BigInt::from(201)).to_f64().unwrap().ln())).abs() < 1e-10);
    }

    #[test]
    fn terminating_small_cases() {
        for &r in &[0.0, 0.2, 0.9, 1.0] {
            assert_eq!(hyp2f1_terminating(1, r).unwrap(), 1.0);
            assert!((hyp2f1_terminating(2, r).unwrap() - (1.0 - r / 2.0)).abs() < 1e-14);
        }
        assert!(hyp2f1_terminating(0, 0.3).is_err());
        assert!(hyp2f1_terminating(3, 1.3).is_err());
    }

    #[test]
    fn terminating_matches_exact_rational() {
        let expect = hyp_exact(5, 3, 10).to_f64().unwrap();
        assert!((hyp2f1_terminating(5, 0.3).unwrap() - expect).abs() < 1e-14);
        for i in [3i64, 8, 17, 30] {
            for (num, den) in [(1i64, 10i64), (1, 2), (7, 10), (19, 20)] {
                let e = hyp_exact(i, num, den).to_f64().unwrap();
                let got = hyp2f1_terminating(i as u32, num as f64 / den as f64).unwrap();
                assert!(((got - e) / e).abs() < 1e-12, "i={i} r={num}/{den}: {got} vs {e}");
            }
        }
    }

    #[test]
    fn g_and_h_simple_values() {
        for &r in &[0.0, 0.13, 0.5, 0.77, 1.0] {
            assert!((g_poly(1, r).unwrap() - r * (1.0 - r)).abs() < 1e-15);
            assert!((h_poly(1, r).unwrap() - r * (1.0 - r)).abs() < 1e-15);
        }
        // G_2(r) = r − 2r³ + r⁴
        assert!((g_poly(2, 0.5).unwrap() - 0.3125).abs() < 1e-15);
        for i in 1..30 {
            assert_eq!(h_poly(i, 0.0).unwrap(), 0.0);
            assert!((h_poly(i, 0.5).unwrap() - 0.25).abs() < 1e-14);
        }
    }

    #[test]
    fn g_matches_exact_rational() {
        for i in [1i64, 2, 5, 12, 25, 40] {
            for (num, den) in [(1i64, 5i64), (1, 2), (3, 4), (9, 10)] {
                let e = g_exact(i, num, den);
                let got = g_poly(i as u32, num as f64 / den as f64).unwrap();
                assert!((got - e).abs() < 1e-12, "i={i} r={num}/{den}: {got} vs {e}");
            }
        }
    }

    #[test]
    fn g_h_symmetric_and_bounded() {
        for i in 1..=20 {
            assert!((g_poly(i, 0.3).unwrap() - g_poly(i, 0.7).unwrap()).abs() < 1e-12);
            let mut r = 0.0;
            while r <= 1.0 {
                let g = g_poly(i, r).unwrap();
                let gm = g_poly(i, 1.0 - r).unwrap();
                assert!((g - gm).abs() < 1e-12);
                assert!((h_poly(i, r).unwrap() - h_poly(i, 1.0 - r).unwrap()).abs() < 1e-12);
                assert!(g >= -1e-12 && g <= r.min(1.0 - r) + 1e-12, "i={i} r={r} g={g}");
                r += 0.01;
            }
        }
    }

    #[test]
    fn g_large_index_is_finite_and_bounded() {
        for &r in &[0.1, 0.5, 0.9] {
            let g = g_poly(3000, r).unwrap();
            assert!(g.is_finite() && g <= r.min(1.0 - r) + 1e-12 && g > 0.0);
        }
    }

    #[test]
    fn recurrence_matches_closed_form() {
        for &r in &[0.05, 0.3, 0.5, 0.62, 0.97] {
            for (i, (g, h)) in MomentPolys::new(r).unwrap().take(200).enumerate() {
                let i = i as u32 + 1;
                assert!((g - g_poly(i, r).unwrap()).abs() < 1e-12, "G_{i}({r})");
                assert!((h - h_poly(i, r).unwrap()).abs() < 1e-12 * h.max(1e-300).max(1.0));
            }
        }
    }

    fn brute_vn(i: u32, x: f64, terms: usize) -> f64 {
        // 3 Σ binom(m+i, m) x^m/(2m+3), summed smallest-first
        let mut w = vec![0.0; terms];
        let mut b = 1.0f64;
        let mut xp = 1.0f64;
        for (m, slot) in w.iter_mut().enumerate() {
            *slot = 3.0 * b * xp / (2.0 * m as f64 + 3.0);
            b *= (m as f64 + 1.0 + i as f64) / (m as f64 + 1.0);
            xp *= x;
            if !b.is_finite() || xp == 0.0 {
                break;
            }
        }
        w.iter().rev().sum()
    }

    #[test]
    fn hyp2f1_vn_zero_argument() {
        for i in 1..10 {
            assert_eq!(hyp2f1_vn(i, 0.0, 1e-15).unwrap().value, 1.0);
        }
    }

    #[test]
    fn hyp2f1_vn_against_brute_force() {
        let a = hyp2f1_vn(1, 0.5, 1e-16).unwrap();
        assert!((a.value - brute_vn(1, 0.5, 1_000_000)).abs() < 1e-13);
        let b = hyp2f1_vn(3, 0.9, 1e-15).unwrap();
        let e = brute_vn(3, 0.9, 1_000_000);
        assert!((b.value - e).abs() < 1e-9 * e);
    }

    #[test]
    fn hyp2f1_vn_tail_is_a_bound() {
        for &(i, x) in &[(1u32, 0.5), (4, 0.8), (12, 0.95), (40, 0.3)] {
            let loose = hyp2f1_vn(i, x, 1e-8).unwrap();
            let tight = hyp2f1_vn(i, x, 5e-9).unwrap();
            let exact = hyp2f1_vn(i, x, 1e-17).unwrap();
            assert!((tight.value - loose.value).abs() <= loose.tail_estimate);
            assert!(exact.value - loose.value <= loose.tail_estimate * (1.0 + 1e-12));
        }
    }

    #[test]
    fn hyp2f1_vn_rejects_divergent() {
        assert!(matches!(hyp2f1_vn(2, 1.0, 1e-12), Err(Error::Divergent(_))));
        assert!(hyp2f1_vn(2, -0.1, 1e-12).is_err());
    }

    #[test]
    fn hyp2f1_vn_known_values() {
        let a = hyp2f1_vn(1, 0.25, 1e-16).unwrap().value;
        assert!((a - 1.408_326_267_991_341_8).abs() < 1e-14);
        let b = hyp2f1_vn(5, 0.7, 1e-16).unwrap().value;
        assert!((b - 166.010_120_454_953_9).abs() < 1e-11);
    }
}
