//! Figure data bundles: analytic curves, Monte-Carlo points, limit values, a
//! manifest and an optional gnuplot script, all in one directory.

use gbs_page::montecarlo::{run_experiment_with_threads, ExperimentPlan, Squeezing};
use gbs_page::Error as CoreError;
use serde::Serialize;

use crate::commands::analytic_value;
use crate::config::{FigureConfig, FigureName, RunConfig, Scale};
use crate::error::CliResult;
use crate::output::{to_json, write_text, Cell, Table};

struct Layout {
    n: usize,
    samples: u64,
    alphas: Vec<u32>,
    /// horizontal axis values; r for fig1, s for the sweeps
    xs: Vec<f64>,
    x_name: &'static str,
    y_label: &'static str,
}

fn grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    (0..count).map(|i| start + i as f64 * step).collect()
}

fn layout(c: &FigureConfig) -> Layout {
    let (n, samples) = match c.scale {
        Scale::Desk => (100, 100),
        Scale::Full => (400, 250),
    };
    let samples = c.samples.unwrap_or(samples);
    match c.name {
        FigureName::Fig1 => Layout {
            n,
            samples,
            alphas: vec![1, 2, 3, 4, 5, 6, 7, 15],
            xs: grid(0.05, 0.95, 0.05),
            x_name: "r",
            y_label: "S_alpha (nats)",
        },
        FigureName::SmallS => Layout {
            n,
            samples,
            alphas: vec![2, 3, 4, 5, 15],
            xs: grid(0.05, 1.0, 0.05),
            x_name: "s",
            y_label: "S_alpha / (n s^2)",
        },
        FigureName::PageVsS => Layout {
            n,
            samples,
            alphas: vec![1, 2, 3],
            xs: grid(0.25, 3.0, 0.25),
            x_name: "s",
            y_label: "S_alpha / (n s)",
        },
    }
}

const FIG1_S: f64 = 0.5;
const SWEEP_R: f64 = 0.5;

/// (s, r, normalisation) at a horizontal position.
fn point(name: FigureName, x: f64, n: usize) -> (f64, f64, f64) {
    let nf = n as f64;
    match name {
        FigureName::Fig1 => (FIG1_S, x, 1.0),
        FigureName::SmallS => (x, SWEEP_R, nf * x * x),
        FigureName::PageVsS => (x, SWEEP_R, nf * x),
    }
}

#[derive(Serialize)]
struct Skipped {
    x: f64,
    alpha: u32,
    reason: String,
}

#[derive(Serialize)]
struct McPoint {
    x: f64,
    k: usize,
    seed: u64,
}

#[derive(Serialize)]
struct Manifest<'a> {
    config: &'a RunConfig,
    figure: FigureName,
    scale: Scale,
    n: usize,
    samples_per_point: u64,
    alphas: &'a [u32],
    x_axis: &'static str,
    y_axis: &'static str,
    fixed_s: Option<f64>,
    fixed_r: Option<f64>,
    mc_points: Vec<McPoint>,
    analytic_skipped: Vec<Skipped>,
    files: Vec<&'static str>,
}

pub fn run(cfg: &RunConfig, c: &FigureConfig) -> CliResult<()> {
    let threads = c.threads.resolve()?;
    let lay = layout(c);
    let n = lay.n;

    let mut analytic = Table::new(&[lay.x_name, "alpha", "value", "trunc_err"]);
    let mut skipped = Vec::new();
    for &x in &lay.xs {
        let (s, r, norm) = point(c.name, x, n);
        for &alpha in &lay.alphas {
            match analytic_value(alpha, s, r, n) {
                Ok(v) => analytic.push(vec![x.into(), alpha.into(), (v.value / norm).into(), (v.trunc_err / norm).into()]),
                // out of the series' range: the MC points and limit lines still cover it
                Err(e @ (CoreError::TruncationCap { .. } | CoreError::SmallSqueezing { .. })) => {
                    skipped.push(Skipped { x, alpha, reason: e.to_string() })
                }
                Err(e) => return Err(e.into()),
            }
        }
    }

    let mut simulated = Table::new(&[lay.x_name, "alpha", "mean", "std_err", "variance", "n_samples"]);
    let mut mc_points = Vec::new();
    for (j, &x) in lay.xs.iter().enumerate() {
        let (s, r, norm) = point(c.name, x, n);
        let k = (r * n as f64).round() as usize;
        let seed = c.seed + j as u64;
        mc_points.push(McPoint { x, k, seed });
        let plan = ExperimentPlan::new(n, k, Squeezing::Equal(s), lay.alphas.clone(), lay.samples, seed);
        let (_, summary) = run_experiment_with_threads(&plan, threads)?;
        for a in &summary.per_alpha {
            simulated.push(vec![
                x.into(),
                a.alpha.into(),
                (a.mean / norm).into(),
                (a.std_err / norm).into(),
                (a.variance / (norm * norm)).into(),
                lay.samples.into(),
            ]);
        }
    }

    let mut limit_lines = Vec::new();
    let limits = match c.name {
        FigureName::Fig1 => None,
        FigureName::SmallS | FigureName::PageVsS => {
            let mut t = Table::new(&["alpha", "value", "normalization_label"]);
            for &alpha in &lay.alphas {
                let (regime, label) = match c.name {
                    FigureName::SmallS => (gbs_page::Regime::Small, "s^2 n"),
                    _ => (gbs_page::Regime::Large, "s n"),
                };
                let v = gbs_page::pagecurve::limit(alpha, regime, SWEEP_R)?;
                debug_assert_eq!(v.normalization, label);
                limit_lines.push((alpha, v.value));
                t.push(vec![alpha.into(), v.value.into(), Cell::Text(v.normalization.to_string())]);
            }
            Some(t)
        }
    };

    let dir = &c.out_dir;
    let mut files = vec!["analytic.csv", "simulated.csv", "manifest.json"];
    write_text(&dir.join("analytic.csv"), &analytic.to_csv())?;
    write_text(&dir.join("simulated.csv"), &simulated.to_csv())?;
    if let Some(t) = &limits {
        files.push("limits.csv");
        write_text(&dir.join("limits.csv"), &t.to_csv())?;
    }
    if c.gnuplot {
        files.push("plot.gp");
        write_text(&dir.join("plot.gp"), &gnuplot_script(&lay, &limit_lines))?;
    }
    let (fixed_s, fixed_r) = match c.name {
        FigureName::Fig1 => (Some(FIG1_S), None),
        _ => (None, Some(SWEEP_R)),
    };
    let manifest = Manifest {
        config: cfg,
        figure: c.name,
        scale: c.scale,
        n,
        samples_per_point: lay.samples,
        alphas: &lay.alphas,
        x_axis: lay.x_name,
        y_axis: lay.y_label,
        fixed_s,
        fixed_r,
        mc_points,
        analytic_skipped: skipped,
        files,
    };
    write_text(&dir.join("manifest.json"), &to_json(&manifest))
}

fn gnuplot_script(lay: &Layout, limit_lines: &[(u32, f64)]) -> String {
    let alphas: Vec<String> = lay.alphas.iter().map(u32::to_string).collect();
    let alphas = alphas.join(" ");
    let mut s = String::new();
    s.push_str("# gnuplot -p plot.gp\n");
    s.push_str("set datafile separator ','\n");
    s.push_str("set key outside right\n");
    s.push_str(&format!("set xlabel '{}'\nset ylabel '{}'\n", lay.x_name, lay.y_label));
    s.push_str(&format!("alphas = \"{alphas}\"\n"));
    s.push_str("pick(col, a) = (column(2) == a ? column(col) : NaN)\n");
    // limiting values as dashed horizontal lines
    for (alpha, v) in limit_lines {
        s.push_str(&format!(
            "set arrow from graph 0, first {v} to graph 1, first {v} nohead dashtype 2 # alpha={alpha}\n"
        ));
    }
    let parts = vec![
        "for [a in alphas] 'analytic.csv' every ::1 using 1:(pick(3, a+0)) with lines title 'analytic, alpha='.a"
            .to_string(),
        "for [a in alphas] 'simulated.csv' every ::1 using 1:(pick(3, a+0)):(pick(4, a+0)) with yerrorbars title 'MC, alpha='.a"
            .to_string(),
    ];
    s.push_str("plot ");
    s.push_str(&parts.join(", \\\n     "));
    s.push('\n');
    s
}
