use std::path::{Path, PathBuf};

use gbs_page::montecarlo::{run_experiment_with_threads, AlphaSummary, ExperimentPlan, SampleRecord, Squeezing};
use gbs_page::pagecurve::{average, limit, page_curve, unequal_limit, ModeCount, PageCurveQuery, Regime, Truncation};
use serde::Serialize;

use crate::config::{
    resolved_k, AnalyticConfig, Format, LimitsConfig, ModeSpec, RegimeArg, RunConfig, SimulateConfig, SqueezingSpec,
};
use crate::error::{CliError, CliResult};
use crate::figure;
use crate::output::{emit, to_json, write_text, Cell, Table};

pub fn execute(cfg: &RunConfig) -> CliResult<()> {
    cfg.validate()?;
    match cfg {
        RunConfig::Analytic(c) => analytic(cfg, c),
        RunConfig::Simulate(c) => simulate(cfg, c),
        RunConfig::Limits(c) => limits(c),
        RunConfig::Figure(c) => figure::run(cfg, c),
    }
}

pub const ANALYTIC_COLUMNS: [&str; 9] =
    ["r", "alpha", "s", "n", "value", "per_mode_value", "i_max_used", "trunc_err", "realized_r"];

#[derive(Debug, Clone, Serialize)]
pub struct AnalyticRow {
    pub r: f64,
    pub alpha: u32,
    pub s: f64,
    /// None for the asymptotic (per-mode) evaluation.
    pub n: Option<usize>,
    pub value: f64,
    pub per_mode_value: f64,
    pub i_max_used: usize,
    pub trunc_err: f64,
    pub realized_r: f64,
}

pub fn mode_count(n: ModeSpec) -> ModeCount {
    match n {
        ModeSpec::Finite(n) => ModeCount::Finite(n),
        ModeSpec::Asymptotic(_) => ModeCount::Asymptotic,
    }
}

/// Rows ordered r-major, then by α as given.
pub fn analytic_rows(c: &AnalyticConfig) -> CliResult<Vec<AnalyticRow>> {
    let n = mode_count(c.n);
    let rs = c.r_grid.points();
    let mut per_alpha = Vec::with_capacity(c.alpha.len());
    for &alpha in &c.alpha {
        let template = PageCurveQuery {
            alpha,
            s: c.s,
            r: 0.0,
            n,
            i_max: c.i_max.map_or(Truncation::Auto, Truncation::Fixed),
            tol: c.tol,
        };
        let values = page_curve(&template, &rs).into_iter().collect::<Result<Vec<_>, _>>()?;
        per_alpha.push(values);
    }
    let mut rows = Vec::new();
    for (j, &r) in rs.iter().enumerate() {
        for (a, &alpha) in c.alpha.iter().enumerate() {
            let v = per_alpha[a][j];
            rows.push(AnalyticRow {
                r,
                alpha,
                s: c.s,
                n: match n {
                    ModeCount::Finite(n) => Some(n),
                    ModeCount::Asymptotic => None,
                },
                value: v.value,
                per_mode_value: v.per_mode(n),
                i_max_used: v.i_max_used,
                trunc_err: v.trunc_err,
                realized_r: v.realized_r,
            });
        }
    }
    Ok(rows)
}

pub fn analytic_table(rows: &[AnalyticRow]) -> Table {
    let mut t = Table::new(&ANALYTIC_COLUMNS);
    for row in rows {
        t.push(vec![
            row.r.into(),
            row.alpha.into(),
            row.s.into(),
            row.n.map_or(Cell::Text("inf".into()), Cell::from),
            row.value.into(),
            row.per_mode_value.into(),
            row.i_max_used.into(),
            row.trunc_err.into(),
            row.realized_r.into(),
        ]);
    }
    t
}

#[derive(Serialize)]
struct AnalyticDocument<'a> {
    config: &'a RunConfig,
    rows: &'a [AnalyticRow],
}

fn analytic(cfg: &RunConfig, c: &AnalyticConfig) -> CliResult<()> {
    let rows = analytic_rows(c)?;
    let text = match c.format {
        Format::Csv => analytic_table(&rows).to_csv(),
        Format::Json => to_json(&AnalyticDocument { config: cfg, rows: &rows }),
    };
    emit(c.out.as_deref(), &text)
}

#[derive(Debug, Serialize)]
pub struct SimulateSummary<'a> {
    pub config: &'a RunConfig,
    pub n: usize,
    pub k: usize,
    pub realized_r: f64,
    pub seed: u64,
    pub n_samples: u64,
    pub results: Vec<AlphaSummary>,
}

pub fn plan_for(c: &SimulateConfig) -> ExperimentPlan {
    let squeezing = match &c.s {
        SqueezingSpec::Equal(s) => Squeezing::Equal(*s),
        SqueezingSpec::PerMode(v) => Squeezing::PerMode(v.clone()),
    };
    let mut plan = ExperimentPlan::new(c.n, resolved_k(c), squeezing, c.alphas.clone(), c.samples, c.seed);
    plan.emit_per_sample = c.out_prefix.is_some();
    plan.trw_moments = c.moments;
    plan
}

pub fn samples_table(records: &[SampleRecord]) -> Table {
    let mut t = Table::new(&["sample_index", "alpha", "entropy"]);
    for rec in records {
        for e in &rec.entropies {
            t.push(vec![rec.sample_index.into(), e.alpha.into(), e.value.into()]);
        }
    }
    t
}

fn moments_table(records: &[SampleRecord]) -> Table {
    let mut t = Table::new(&["sample_index", "i", "trw"]);
    for rec in records {
        for (i, v) in rec.trw.iter().flatten().enumerate() {
            t.push(vec![rec.sample_index.into(), (i + 1).into(), (*v).into()]);
        }
    }
    t
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn simulate(cfg: &RunConfig, c: &SimulateConfig) -> CliResult<()> {
    let threads = c.threads.resolve()?;
    let plan = plan_for(c);
    let (records, summary) = run_experiment_with_threads(&plan, threads)?;
    let doc = SimulateSummary {
        config: cfg,
        n: plan.n,
        k: plan.k,
        realized_r: summary.realized_r,
        seed: plan.master_seed,
        n_samples: summary.n_samples,
        results: summary.per_alpha,
    };
    let json = to_json(&doc);
    match &c.out_prefix {
        Some(prefix) => {
            write_text(&with_suffix(prefix, "_samples.csv"), &samples_table(&records).to_csv())?;
            if plan.trw_moments.is_some() {
                write_text(&with_suffix(prefix, "_moments.csv"), &moments_table(&records).to_csv())?;
            }
            write_text(&with_suffix(prefix, "_summary.json"), &json)
        }
        None => emit(None, &json),
    }
}

fn read_s_vector(path: &Path) -> CliResult<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let vals = text
        .split(|ch: char| ch == ',' || ch.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|e| CliError::validation(format!("{}: bad value {t:?}: {e}", path.display()))))
        .collect::<CliResult<Vec<f64>>>()?;
    if vals.is_empty() || vals.iter().any(|v| !v.is_finite()) {
        return Err(CliError::validation(format!("{}: need at least one finite squeezing value", path.display())));
    }
    Ok(vals)
}

/// Without an s-vector: r, alpha, regime, value, normalization_label.
/// With one, a trailing `prediction` column holds value·Σs_i².
pub fn limits_table(c: &LimitsConfig) -> CliResult<Table> {
    let regime = match c.regime {
        RegimeArg::Small => Regime::Small,
        RegimeArg::Large => Regime::Large,
    };
    let regime_name = match c.regime {
        RegimeArg::Small => "small",
        RegimeArg::Large => "large",
    };
    let s_sq = match &c.s_vector {
        Some(p) => Some(read_s_vector(p)?.iter().map(|v| v * v).sum::<f64>()),
        None => None,
    };
    let mut header = vec!["r", "alpha", "regime", "value", "normalization_label"];
    if s_sq.is_some() {
        header.push("prediction");
    }
    let mut t = Table::new(&header);
    for r in c.r_grid.points() {
        let lv = match s_sq {
            Some(_) => unequal_limit(c.alpha, r)?,
            None => limit(c.alpha, regime, r)?,
        };
        let mut row = vec![r.into(), c.alpha.into(), regime_name.into(), lv.value.into(), lv.normalization.into()];
        if let Some(sum) = s_sq {
            row.push((lv.value * sum).into());
        }
        t.push(row);
    }
    Ok(t)
}

fn limits(c: &LimitsConfig) -> CliResult<()> {
    emit(c.out.as_deref(), &limits_table(c)?.to_csv())
}

/// Single analytic value (used by the figure drivers).
pub fn analytic_value(alpha: u32, s: f64, r: f64, n: usize) -> gbs_page::Result<gbs_page::PageCurveValue> {
    average(&PageCurveQuery::new(alpha, s, r, ModeCount::Finite(n)))
}
