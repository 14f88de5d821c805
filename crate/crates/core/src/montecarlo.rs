//! Haar Monte Carlo over passive circuits: per-sample entropies, summaries,
//! variance trends and the V_d cross-moment diagnostics.
//!
//! Every sample draws its unitary from its own ChaCha20 stream, so records are
//! bit-identical for any thread count; aggregation folds in index order.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::{entropy, EntropyValue};
use crate::error::{Error, Result};
use crate::haar::{haar_unitary, UnitaryMatrix};
use crate::state::{
    complement, full_covariance_general, power_sums, reduce_modes, reduced_covariance_equal_modes,
    w_spectrum, SqueezingConfig,
};
use crate::symplectic::symplectic_eigenvalues;

pub const BOOTSTRAP_RESAMPLES: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Squeezing {
    Equal(f64),
    PerMode(Vec<f64>),
}

impl Squeezing {
    fn config(&self, n: usize) -> Result<SqueezingConfig> {
        match self {
            Squeezing::Equal(s) => SqueezingConfig::equal(n, *s),
            Squeezing::PerMode(v) => {
                if v.len() != n {
                    return Err(Error::invalid(format!("{} squeezing strengths for {n} modes", v.len())));
                }
                SqueezingConfig::new(v.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub n: usize,
    pub k: usize,
    pub squeezing: Squeezing,
    /// Entropy orders; 1 is von Neumann.
    pub alphas: Vec<u32>,
    pub n_samples: u64,
    pub master_seed: u64,
    pub emit_per_sample: bool,
    /// Also record Tr W^i for i = 1..=trw_moments (equal squeezing only).
    #[serde(default)]
    pub trw_moments: Option<usize>,
}

impl ExperimentPlan {
    pub fn new(n: usize, k: usize, squeezing: Squeezing, alphas: Vec<u32>, n_samples: u64, master_seed: u64) -> Self {
        ExperimentPlan { n, k, squeezing, alphas, n_samples, master_seed, emit_per_sample: false, trw_moments: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("n must be positive"));
        }
        if self.k == 0 || self.k > self.n {
            return Err(Error::invalid(format!("need 1 <= k <= n, got k = {}, n = {}", self.k, self.n)));
        }
        if self.n_samples == 0 {
            return Err(Error::invalid("need at least one sample"));
        }
        if self.alphas.is_empty() || self.alphas.contains(&0) {
            return Err(Error::invalid("alphas must be a nonempty list of integers >= 1"));
        }
        if self.trw_moments == Some(0) {
            return Err(Error::invalid("trw_moments must be at least 1"));
        }
        if self.trw_moments.is_some() && !matches!(self.squeezing, Squeezing::Equal(_)) {
            return Err(Error::invalid("Tr W moments are only defined for equal squeezing"));
        }
        self.squeezing.config(self.n).map(|_| ())
    }

    pub fn realized_r(&self) -> f64 {
        self.k as f64 / self.n as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub sample_index: u64,
    /// One entry per requested order, in plan order.
    pub entropies: Vec<EntropyValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trw: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaSummary {
    pub alpha: u32,
    pub mean: f64,
    /// Unbiased (n−1) sample variance; 0 for a single sample.
    pub variance: f64,
    pub std_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub per_alpha: Vec<AlphaSummary>,
    pub n_samples: u64,
    pub realized_r: f64,
}

impl Summary {
    pub fn get(&self, alpha: u32) -> Option<&AlphaSummary> {
        self.per_alpha.iter().find(|a| a.alpha == alpha)
    }
}

/// Entropies of the modes in `modes` for one unitary.
fn entropies_of(u: &UnitaryMatrix, squeezing: &Squeezing, modes: &[usize], alphas: &[u32]) -> Result<Vec<EntropyValue>> {
    if modes.is_empty() {
        return Ok(alphas.iter().map(|&alpha| EntropyValue { value: 0.0, alpha }).collect());
    }
    let sigma = match squeezing {
        Squeezing::Equal(s) => reduced_covariance_equal_modes(u, *s, modes)?,
        Squeezing::PerMode(_) => {
            let full = full_covariance_general(u, &squeezing.config(u.n())?)?;
            reduce_modes(&full, modes)?
        }
    };
    let nu = symplectic_eigenvalues(&sigma)?;
    alphas.iter().map(|&a| entropy(&nu, a)).collect()
}

fn run_sample(plan: &ExperimentPlan, index: u64) -> Result<SampleRecord> {
    let u = haar_unitary(plan.n, plan.master_seed, index)?;
    let modes: Vec<usize> = (0..plan.k).collect();
    let entropies = entropies_of(&u, &plan.squeezing, &modes, &plan.alphas)?;
    let trw = match plan.trw_moments {
        Some(i_max) => Some(power_sums(&w_spectrum(&u, plan.k)?, i_max)),
        None => None,
    };
    Ok(SampleRecord { sample_index: index, entropies, trw })
}

/// Mean and unbiased variance, accumulated in slice order.
pub fn mean_and_variance(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    (mean, ss / (n - 1.0))
}

fn summarize(plan: &ExperimentPlan, records: &[SampleRecord]) -> Summary {
    let per_alpha = plan
        .alphas
        .iter()
        .enumerate()
        .map(|(j, &alpha)| {
            let xs: Vec<f64> = records.iter().map(|r| r.entropies[j].value).collect();
            let (mean, variance) = mean_and_variance(&xs);
            AlphaSummary { alpha, mean, variance, std_err: (variance / xs.len() as f64).sqrt() }
        })
        .collect();
    Summary { per_alpha, n_samples: plan.n_samples, realized_r: plan.realized_r() }
}

/// Runs every sample on the current rayon pool. Any failing sample aborts the
/// run with [`Error::SampleFailed`] for the lowest failing index.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<(Vec<SampleRecord>, Summary)> {
    plan.validate()?;
    let results: Vec<Result<SampleRecord>> = (0..plan.n_samples).into_par_iter().map(|i| run_sample(plan, i)).collect();
    let mut records = Vec::with_capacity(results.len());
    for (i, res) in results.into_iter().enumerate() {
        match res {
            Ok(rec) => records.push(rec),
            Err(e) => return Err(Error::SampleFailed { index: i as u64, source: Box::new(e) }),
        }
    }
    let summary = summarize(plan, &records);
    Ok((records, summary))
}

/// [`run_experiment`] on a dedicated pool of `threads` workers (None = all cores).
pub fn run_experiment_with_threads(
    plan: &ExperimentPlan,
    threads: Option<usize>,
) -> Result<(Vec<SampleRecord>, Summary)> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(Error::invalid("thread count must be positive"));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| Error::invalid(format!("cannot start thread pool: {e}")))?;
    pool.install(|| run_experiment(plan))
}

/// True when the first k modes and the remaining n−k modes of the same output
/// state carry the same entropy (to 1e-8) for every order in `alphas`.
pub fn purity_symmetry_check(u: &UnitaryMatrix, squeezing: &Squeezing, k: usize, alphas: &[u32]) -> Result<bool> {
    let n = u.n();
    if k > n {
        return Err(Error::invalid(format!("k = {k} exceeds n = {n}")));
    }
    let modes: Vec<usize> = (0..k).collect();
    let a = entropies_of(u, squeezing, &modes, alphas)?;
    let b = entropies_of(u, squeezing, &complement(n, &modes), alphas)?;
    Ok(a.iter().zip(&b).all(|(x, y)| (x.value - y.value).abs() <= 1e-8))
}

/// A point estimate with a percentile bootstrap interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Estimate {
    pub fn overlaps(&self, other: &Estimate) -> bool {
        self.ci_low <= other.ci_high && other.ci_low <= self.ci_high
    }
}

fn percentile_interval(mut stats: Vec<f64>, level: f64) -> (f64, f64) {
    stats.sort_by(|a, b| a.total_cmp(b));
    let m = stats.len();
    let lo = ((1.0 - level) / 2.0 * m as f64).floor() as usize;
    let hi = (((1.0 + level) / 2.0 * m as f64).ceil() as usize).min(m) - 1;
    (stats[lo.min(m - 1)], stats[hi])
}

/// Percentile bootstrap (95%) of an arbitrary statistic over resampled rows.
pub fn bootstrap<T, F>(rows: &[T], statistic: F, resamples: usize, seed: u64) -> Result<Estimate>
where
    T: Clone,
    F: Fn(&[T]) -> f64,
{
    if rows.is_empty() || resamples == 0 {
        return Err(Error::invalid("bootstrap needs data and at least one resample"));
    }
    let value = statistic(rows);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut buf = Vec::with_capacity(rows.len());
    let stats: Vec<f64> = (0..resamples)
        .map(|_| {
            buf.clear();
            buf.extend((0..rows.len()).map(|_| rows[rng.random_range(0..rows.len())].clone()));
            statistic(&buf)
        })
        .collect();
    let (ci_low, ci_high) = percentile_interval(stats, 0.95);
    Ok(Estimate { value, ci_low, ci_high })
}

pub fn bootstrap_variance(xs: &[f64], resamples: usize, seed: u64) -> Result<Estimate> {
    bootstrap(xs, |v| mean_and_variance(v).1, resamples, seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariancePoint {
    pub n: usize,
    pub k: usize,
    pub variance: Estimate,
}

/// Sample variance of S_α with bootstrap intervals for each n, k = round(r n).
pub fn variance_trend(
    ns: &[usize],
    r: f64,
    s: f64,
    alpha: u32,
    n_samples: u64,
    seed: u64,
) -> Result<Vec<VariancePoint>> {
    if alpha < 2 {
        return Err(Error::invalid(format!("variance trend is defined for Rényi orders >= 2, got {alpha}")));
    }
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::invalid(format!("r must lie in [0, 1], got {r}")));
    }
    ns.iter()
        .map(|&n| {
            let k = (r * n as f64).round() as usize;
            let xs: Vec<f64> = if k == 0 {
                vec![0.0; n_samples as usize]
            } else {
                let plan = ExperimentPlan::new(n, k, Squeezing::Equal(s), vec![alpha], n_samples, seed);
                run_experiment(&plan)?.0.iter().map(|rec| rec.entropies[0].value).collect()
            };
            let variance = bootstrap_variance(&xs, BOOTSTRAP_RESAMPLES, seed ^ n as u64)?;
            Ok(VariancePoint { n, k, variance })
        })
        .collect()
}

/// V_d = Σ_{ℓ=1}^{d−1} Cov(Tr W^ℓ, Tr W^{d−ℓ}) / (ℓ(d−ℓ)) for d = 2..=d_max, from
/// per-sample moment vectors (index i−1 holds Tr W^i, at least d_max−1 long).
pub fn vd_from_moments(moments: &[Vec<f64>], d_max: usize) -> Vec<f64> {
    let m = moments.len() as f64;
    let width = d_max.saturating_sub(1);
    let means: Vec<f64> = (0..width).map(|i| moments.iter().map(|v| v[i]).sum::<f64>() / m).collect();
    let cov = |a: usize, b: usize| -> f64 {
        if moments.len() < 2 {
            return 0.0;
        }
        moments.iter().map(|v| (v[a] - means[a]) * (v[b] - means[b])).sum::<f64>() / (m - 1.0)
    };
    (2..=d_max)
        .map(|d| (1..d).map(|l| cov(l - 1, d - l - 1) / (l * (d - l)) as f64).sum())
        .collect()
}

/// ¼ Σ_{d=2}^{d_max} tanh^{2d}(2s) V_d: the variance of S₂ implied by the moment covariances.
pub fn s2_variance_from_vd(vd: &[f64], s: f64) -> f64 {
    let t = (2.0 * s).tanh().powi(2);
    vd.iter().enumerate().map(|(j, v)| 0.25 * t.powi(j as i32 + 2) * v).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VdEstimate {
    /// V̂_d for d = 2..=d_max.
    pub vd: Vec<f64>,
    /// Raw moment vectors, one per sample.
    pub moments: Vec<Vec<f64>>,
}

/// Monte-Carlo V_d from Haar samples of Tr W^i, i < d_max, at k = round(r n).
pub fn estimate_vd(d_max: usize, n: usize, r: f64, n_samples: u64, seed: u64) -> Result<VdEstimate> {
    if d_max < 2 {
        return Err(Error::invalid("d_max must be at least 2"));
    }
    if n == 0 || n_samples == 0 {
        return Err(Error::invalid("n and n_samples must be positive"));
    }
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::invalid(format!("r must lie in [0, 1], got {r}")));
    }
    let k = (r * n as f64).round() as usize;
    let moments: Vec<Vec<f64>> = if k == 0 {
        vec![vec![0.0; d_max - 1]; n_samples as usize]
    } else {
        let results: Vec<Result<Vec<f64>>> = (0..n_samples)
            .into_par_iter()
            .map(|i| {
                let u = haar_unitary(n, seed, i)?;
                Ok(power_sums(&w_spectrum(&u, k)?, d_max - 1))
            })
            .collect();
        results
            .into_iter()
            .enumerate()
            .map(|(i, r)| r.map_err(|e| Error::SampleFailed { index: i as u64, source: Box::new(e) }))
            .collect::<Result<_>>()?
    };
    Ok(VdEstimate { vd: vd_from_moments(&moments, d_max), moments })
}

/// Fraction of values within relative distance `eps` of their mean.
pub fn typical_fraction(xs: &[f64], eps: f64) -> f64 {
    let (mean, _) = mean_and_variance(xs);
    if mean == 0.0 {
        return xs.iter().filter(|&&x| x == 0.0).count() as f64 / xs.len() as f64;
    }
    xs.iter().filter(|&&x| (x / mean - 1.0).abs() < eps).count() as f64 / xs.len() as f64
}
