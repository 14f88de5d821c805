//! Haar-averaged entropies of a k-mode reduction as closed-form series in the
//! moment polynomials G_i(r), H_i(r), plus the squeezing-limit formulas.
//!
//! Every average has the shape Σ_i w_i(s)·D_i with D_i = nG_i(r′) − H_i(r′)
//! (finite n, r′ = k/n realised) or D_i = G_i(r) (per mode, n → ∞). D_i is
//! nondecreasing in i and bounded by n·min(r′, 1−r′), which is what the
//! truncation bounds below lean on.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::{cot_squares, vn_mode_entropy};
use crate::error::{Error, Result};
use crate::specfun::{g_poly, h_poly, MomentPolys};

/// Outer-index cap for the Rényi series.
pub const RENYI_TERM_CAP: usize = 5000;
/// Outer-index cap for the von Neumann series (its coefficients decay like 1/i²).
pub const VN_TERM_CAP: usize = 2_000_000;
/// Smallest squeezing accepted by the von Neumann series.
pub const VN_MIN_SQUEEZING: f64 = 0.02;
pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeCount {
    Finite(usize),
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PageCurveQuery {
    /// 1 = von Neumann.
    pub alpha: u32,
    pub s: f64,
    pub r: f64,
    pub n: ModeCount,
    pub i_max: Truncation,
    /// Absolute bound on the truncation error, in the units of `value`.
    pub tol: f64,
}

impl PageCurveQuery {
    pub fn new(alpha: u32, s: f64, r: f64, n: ModeCount) -> Self {
        PageCurveQuery { alpha, s, r, n, i_max: Truncation::Auto, tol: DEFAULT_TOL }
    }
}

/// `value` is the total entropy for finite n and the entropy per mode for
/// [`ModeCount::Asymptotic`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PageCurveValue {
    pub value: f64,
    pub i_max_used: usize,
    pub trunc_err: f64,
    /// k/n actually used (equals r in the asymptotic case).
    pub realized_r: f64,
    pub k: Option<usize>,
}

impl PageCurveValue {
    fn zero(p: &Partition) -> Self {
        PageCurveValue { value: 0.0, i_max_used: 0, trunc_err: 0.0, realized_r: p.r, k: p.k }
    }

    pub fn per_mode(&self, n: ModeCount) -> f64 {
        match n {
            ModeCount::Finite(n) => self.value / n as f64,
            ModeCount::Asymptotic => self.value,
        }
    }
}

/// Resolved partition: r(1−r) and min(r, 1−r) are formed from integers when n
/// is finite so that r and 1−r give bit-identical series.
#[derive(Debug, Clone, Copy)]
struct Partition {
    r: f64,
    k: Option<usize>,
    product: f64,
    minor: f64,
    /// n for finite, 1 for asymptotic
    scale: f64,
    /// weight of H_i: 1 for finite, 0 for asymptotic
    h_weight: f64,
}

impl Partition {
    fn new(r: f64, n: ModeCount) -> Result<Self> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::invalid(format!("r must lie in [0, 1], got {r}")));
        }
        match n {
            ModeCount::Finite(0) => Err(Error::invalid("n must be positive")),
            ModeCount::Finite(n) => {
                let k = (r * n as f64).round() as usize;
                let nf = n as f64;
                Ok(Partition {
                    r: k as f64 / nf,
                    k: Some(k),
                    product: (k * (n - k)) as f64 / (nf * nf),
                    minor: k.min(n - k) as f64 / nf,
                    scale: nf,
                    h_weight: 1.0,
                })
            }
            ModeCount::Asymptotic => Ok(Partition {
                r,
                k: None,
                product: r * (1.0 - r),
                minor: r.min(1.0 - r),
                scale: 1.0,
                h_weight: 0.0,
            }),
        }
    }

    fn trivial(&self) -> bool {
        self.product == 0.0
    }

    /// D_1, D_2, …
    fn deficits(&self) -> impl Iterator<Item = f64> {
        let (scale, hw) = (self.scale, self.h_weight);
        MomentPolys::from_product(self.product).map(move |(g, h)| scale * g - hw * h)
    }

    /// sup_i D_i. At r′ = 1/2, H_i ≡ 1/4 so the bound tightens by that much.
    fn deficit_cap(&self) -> f64 {
        let h_floor = if self.product == 0.25 { 0.25 * self.h_weight } else { 0.0 };
        self.scale * self.minor - h_floor
    }
}

fn check_query(q: &PageCurveQuery) -> Result<()> {
    if !q.s.is_finite() {
        return Err(Error::invalid(format!("squeezing must be finite, got {}", q.s)));
    }
    if !(q.tol > 0.0) {
        return Err(Error::invalid(format!("tol must be positive, got {}", q.tol)));
    }
    if q.i_max == Truncation::Fixed(0) {
        return Err(Error::invalid("i_max must be at least 1"));
    }
    if q.alpha == 0 {
        return Err(Error::invalid("entropy order must be >= 1"));
    }
    Ok(())
}

/// Neumaier-compensated running sum.
#[derive(Default, Clone, Copy)]
struct Accum {
    sum: f64,
    comp: f64,
}

impl Accum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// E Tr W^i ≈ nr − nG_i(r) + H_i(r) (the o(1) remainder is dropped).
pub fn expected_trw(i: u32, n: usize, r: f64) -> Result<f64> {
    if i == 0 {
        return Err(Error::invalid("moment index must be >= 1"));
    }
    let nf = n as f64;
    Ok(nf * r - nf * g_poly(i, r)? + h_poly(i, r)?)
}

/// Geometric weights of the Rényi-α series: w_i = Σ_j a_j x_j^i / i.
struct RenyiWeights {
    terms: Vec<(f64, f64)>,
}

impl RenyiWeights {
    fn new(alpha: u32, s: f64) -> Self {
        let two_s = 2.0 * s;
        let (ch2, sh2) = (two_s.cosh().powi(2), two_s.sinh().powi(2));
        let norm = 1.0 / (alpha as f64 - 1.0);
        let mut terms = Vec::new();
        if alpha % 2 == 0 {
            terms.push((0.5 * norm, two_s.tanh().powi(2)));
        }
        for c in cot_squares(alpha) {
            terms.push((norm, sh2 / (ch2 + c)));
        }
        RenyiWeights { terms }
    }

    /// Upper bound on Σ_{i>I} w_i.
    fn tail(&self, big_i: usize) -> f64 {
        let next = (big_i + 1) as f64;
        self.terms
            .iter()
            .map(|&(a, x)| a * x.powf(next) / (next * (1.0 - x)))
            .sum()
    }
}

fn renyi_series(alpha: u32, s: f64, q: &PageCurveQuery, part: &Partition) -> Result<PageCurveValue> {
    let weights = RenyiWeights::new(alpha, s);
    let cap = part.deficit_cap();
    let mut pows: Vec<f64> = weights.terms.iter().map(|&(_, x)| x).collect();
    let mut acc = Accum::default();
    let mut used = 0usize;
    let mut bound = f64::INFINITY;
    for (idx, d) in part.deficits().enumerate() {
        let i = idx + 1;
        let w: f64 = weights.terms.iter().zip(&pows).map(|(&(a, _), p)| a * p).sum::<f64>() / i as f64;
        acc.add(w * d);
        for (p, &(_, x)) in pows.iter_mut().zip(&weights.terms) {
            *p *= x;
        }
        used = i;
        bound = weights.tail(i) * cap;
        match q.i_max {
            Truncation::Fixed(m) if i >= m => break,
            Truncation::Fixed(_) => {}
            Truncation::Auto if bound < q.tol => break,
            Truncation::Auto if i >= RENYI_TERM_CAP => {
                return Err(Error::TruncationCap {
                    series: "Rényi series",
                    tol: q.tol,
                    cap: RENYI_TERM_CAP,
                    partial: acc.value(),
                    bound,
                    hint: "squeezing is too strong for the series; use the large-squeezing limit \
                           (`limits --regime large`) or Monte Carlo (`simulate`)",
                });
            }
            Truncation::Auto => {}
        }
    }
    Ok(PageCurveValue { value: acc.value(), i_max_used: used, trunc_err: bound, realized_r: part.r, k: part.k })
}

/// Σ_i c_i for the von Neumann coefficients: ½ ln(sinh²(2s)/4) + cosh(2s) artanh(sech(2s)),
/// i.e. the per-mode entropy of a thermal mode with ν = cosh(2s).
pub fn vn_constant_term(s: f64) -> f64 {
    vn_mode_entropy((2.0 * s).cosh())
}

/// Coefficients c_i = 1/(2i) − (1/3) sech²(2s) tanh^{2i}(2s) ₂F₁(3/2, 1+i; 5/2; sech²(2s)).
///
/// Generated by the exact recurrence
/// c_{i+1} = sinh²(2s)·[(2i−1)c_i + 1/(2i)] / (2cosh²(2s)(i+1)),
/// c_1 = tanh²(2s) cosh(2s) artanh(sech(2s)) / 2, in which every term is
/// positive. They decay like sinh²(2s)/(4i²).
#[derive(Debug, Clone)]
pub struct VnCoefficients {
    c: f64,
    i: u64,
    ratio: f64,
}

impl VnCoefficients {
    pub fn new(s: f64) -> Self {
        let x = (2.0 * s).abs();
        let c1 = if x == 0.0 { 0.0 } else { 0.5 * x.tanh().powi(2) * x.cosh() * (1.0 / x.cosh()).atanh() };
        VnCoefficients { c: c1, i: 1, ratio: x.sinh().powi(2) / (2.0 * x.cosh().powi(2)) }
    }
}

impl Iterator for VnCoefficients {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let out = self.c;
        let i = self.i as f64;
        self.c = self.ratio * ((2.0 * i - 1.0) * self.c + 0.5 / i) / (i + 1.0);
        self.i += 1;
        Some(out)
    }
}

/// c_i straight from the hypergeometric definition; slower, used as a cross-check.
pub fn vn_coefficient_direct(i: u32, s: f64, tol: f64) -> Result<f64> {
    let x = 2.0 * s;
    let sech2 = 1.0 / x.cosh().powi(2);
    let f = crate::specfun::hyp2f1_vn(i, sech2, tol)?;
    Ok(0.5 / i as f64 - sech2 * x.tanh().powi(2 * i as i32) * f.value / 3.0)
}

/// The von Neumann series with an exact tail bracket.
///
/// With T_I = K(s) − Σ_{i≤I} c_i known in closed form and D_i monotone, the
/// tail lies in [D_{I+1} T_I, cap·T_I]; the midpoint is reported and the
/// half-width is the error.
fn vn_series(s: f64, q: &PageCurveQuery, part: &Partition) -> Result<PageCurveValue> {
    let k_total = vn_constant_term(s);
    let cap = part.deficit_cap();
    let mut coeffs = VnCoefficients::new(s);
    let mut deficits = part.deficits();
    let mut partial = Accum::default();
    let mut csum = Accum::default();
    let mut d = deficits.next().unwrap_or(0.0);
    let mut i = 0usize;
    loop {
        let c = coeffs.next().unwrap_or(0.0);
        partial.add(c * d);
        csum.add(c);
        i += 1;
        let d_next = deficits.next().unwrap_or(d);
        let t = (k_total - csum.value()).max(0.0);
        let lo = d_next * t;
        let hi = cap.max(d_next) * t;
        let half = 0.5 * (hi - lo);
        let done = match q.i_max {
            Truncation::Fixed(m) => i >= m,
            Truncation::Auto => half < q.tol,
        };
        if done {
            return Ok(PageCurveValue {
                value: partial.value() + 0.5 * (lo + hi),
                i_max_used: i,
                trunc_err: half,
                realized_r: part.r,
                k: part.k,
            });
        }
        if q.i_max == Truncation::Auto && i >= VN_TERM_CAP {
            return Err(Error::TruncationCap {
                series: "von Neumann series",
                tol: q.tol,
                cap: VN_TERM_CAP,
                partial: partial.value() + 0.5 * (lo + hi),
                bound: half,
                hint: "squeezing is too strong for the series; use the large-squeezing limit \
                       (`limits --regime large`) or Monte Carlo (`simulate`)",
            });
        }
        d = d_next;
    }
}

/// Haar-averaged entropy of order `q.alpha` (1 = von Neumann).
pub fn average(q: &PageCurveQuery) -> Result<PageCurveValue> {
    check_query(q)?;
    let part = Partition::new(q.r, q.n)?;
    let s = q.s.abs();
    if s == 0.0 || part.trivial() {
        return Ok(PageCurveValue::zero(&part));
    }
    match q.alpha {
        1 => {
            if s < VN_MIN_SQUEEZING {
                return Err(Error::SmallSqueezing { s, min: VN_MIN_SQUEEZING });
            }
            vn_series(s, q, &part)
        }
        a => renyi_series(a, s, q, &part),
    }
}

pub fn von_neumann_average(n: usize, s: f64, r: f64, tol: f64) -> Result<PageCurveValue> {
    average(&PageCurveQuery { tol, ..PageCurveQuery::new(1, s, r, ModeCount::Finite(n)) })
}

pub fn renyi2_average(n: usize, s: f64, r: f64, tol: f64) -> Result<PageCurveValue> {
    renyi_average(2, n, s, r, tol)
}

pub fn renyi_average(alpha: u32, n: usize, s: f64, r: f64, tol: f64) -> Result<PageCurveValue> {
    if alpha < 2 {
        return Err(Error::invalid(format!("Rényi order must be >= 2, got {alpha}")));
    }
    average(&PageCurveQuery { tol, ..PageCurveQuery::new(alpha, s, r, ModeCount::Finite(n)) })
}

/// Evaluates `template` at every r of the grid, in parallel; output order follows `rs`.
pub fn page_curve(template: &PageCurveQuery, rs: &[f64]) -> Vec<Result<PageCurveValue>> {
    rs.par_iter().map(|&r| average(&PageCurveQuery { r, ..*template })).collect()
}

fn check_r(r: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::invalid(format!("r must lie in [0, 1], got {r}")));
    }
    Ok(())
}

/// lim_{s→0} E S₁ / (n s² ln(1/s²)) = r(1−r).
pub fn vn_small_s_limit(r: f64) -> Result<f64> {
    check_r(r)?;
    Ok(r * (1.0 - r))
}

/// lim_{s→∞} E S₁ / (n s) = 2 min(r, 1−r).
pub fn vn_large_s_limit(r: f64) -> Result<f64> {
    check_r(r)?;
    Ok(2.0 * r.min(1.0 - r))
}

/// lim_{s→0} E S_α / (n s²) = α/(α−1) · r(1−r).
pub fn renyi_small_s_limit(alpha: u32, r: f64) -> Result<f64> {
    if alpha < 2 {
        return Err(Error::invalid(format!("Rényi order must be >= 2, got {alpha}")));
    }
    check_r(r)?;
    Ok(alpha as f64 / (alpha as f64 - 1.0) * r * (1.0 - r))
}

/// lim_{s→∞} E S_α / (n s) = 2 min(r, 1−r), independent of α.
pub fn renyi_large_s_limit(alpha: u32, r: f64) -> Result<f64> {
    if alpha < 2 {
        return Err(Error::invalid(format!("Rényi order must be >= 2, got {alpha}")));
    }
    check_r(r)?;
    Ok(2.0 * r.min(1.0 - r))
}

/// Leading small-squeezing Rényi entropy for per-mode strengths s_i:
/// α/(α−1) · r(1−r) · Σ s_i² (not normalised; O(n s_max⁴) dropped).
pub fn renyi_unequal_small(alpha: u32, r: f64, s: &[f64]) -> Result<f64> {
    let sum: f64 = s.iter().map(|v| v * v).sum();
    if !sum.is_finite() {
        return Err(Error::invalid("squeezing strengths must be finite"));
    }
    Ok(renyi_small_s_limit(alpha, r)? * sum)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Small,
    Large,
}

/// A limiting value together with the normalisation it refers to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitValue {
    pub value: f64,
    pub normalization: &'static str,
}

pub fn limit(alpha: u32, regime: Regime, r: f64) -> Result<LimitValue> {
    let (value, normalization) = match (alpha, regime) {
        (0, _) => return Err(Error::invalid("entropy order must be >= 1")),
        (1, Regime::Small) => (vn_small_s_limit(r)?, "s^2 log(1/s^2) n"),
        (1, Regime::Large) => (vn_large_s_limit(r)?, "s n"),
        (a, Regime::Small) => (renyi_small_s_limit(a, r)?, "s^2 n"),
        (a, Regime::Large) => (renyi_large_s_limit(a, r)?, "s n"),
    };
    Ok(LimitValue { value, normalization })
}

/// Unequal-squeezing limit, normalised by Σ s_i² (so independent of s).
pub fn unequal_limit(alpha: u32, r: f64) -> Result<LimitValue> {
    Ok(LimitValue { value: renyi_small_s_limit(alpha, r)?, normalization: "sum s_i^2" })
}
