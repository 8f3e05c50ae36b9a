//! Scaling experiments: sample maps over a grid of sizes at a fixed genus
//! ratio and record distances, with per-trial random streams so results do
//! not depend on the number of worker threads.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quotient::{
    check_condition_a, diameter_with_cap, glue, injectivity_radius, typical_distance, ConditionAConstants,
    InjectivityRadius, DEFAULT_DIAMETER_CAP,
};
use crate::sample::{parts_for_genus, sample_marked_tree};
use crate::stats::{linear_fit, quantile, stream_rng};

/// Threshold factor for the injectivity pass rate: `I >= factor · ln n`.
pub const DEFAULT_INJECTIVITY_FACTOR: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Typical,
    Diameter,
    Injectivity,
}

/// Experiment description, read from a single JSON object. Every key is
/// optional; see the README for the schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Genus ratio `g / n`, strictly between 0 and 1/2 (0 is allowed as a
    /// plane-tree control).
    pub theta: f64,
    pub n_grid: Vec<usize>,
    pub trials: usize,
    pub master_seed: u64,
    pub metrics: Vec<Metric>,
    /// Above this many vertices the diameter is a double-sweep lower bound.
    pub diameter_cap: usize,
    pub injectivity_factor: f64,
    pub condition_a: Option<ConditionAConstants>,
    pub trials_csv: Option<PathBuf>,
    pub summary_csv: Option<PathBuf>,
    pub gnuplot: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            theta: 0.25,
            n_grid: (12..=17).map(|k| 1 << k).collect(),
            trials: 200,
            master_seed: 1,
            metrics: vec![Metric::Typical, Metric::Diameter, Metric::Injectivity],
            diameter_cap: DEFAULT_DIAMETER_CAP,
            injectivity_factor: DEFAULT_INJECTIVITY_FACTOR,
            condition_a: None,
            trials_csv: None,
            summary_csv: None,
            gnuplot: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), reason: e.to_string() })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta >= 0.0 && self.theta < 0.5) {
            return Err(Error::InvalidParameter(format!("theta = {} outside [0, 1/2)", self.theta)));
        }
        if self.n_grid.is_empty() || self.trials == 0 {
            return Err(Error::InvalidParameter("empty grid or zero trials".into()));
        }
        if let Some(k) = &self.condition_a {
            k.validate()?;
        }
        Ok(())
    }

    fn constants(&self) -> ConditionAConstants {
        self.condition_a.unwrap_or_else(|| ConditionAConstants::fitted(self.theta))
    }

    fn wants(&self, m: Metric) -> bool {
        self.metrics.contains(&m)
    }
}

/// How one grid size is turned into a genus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPlan {
    pub n: usize,
    /// `round(theta · n)` before any adjustment.
    pub rounded_genus: usize,
    /// `None` when the entry was rejected.
    pub g: Option<usize>,
    pub adjustment: i64,
    pub note: String,
}

/// `g = round(theta · n)`. The part count `n + 1 - 2g` always has the parity
/// of `n + 1`, so the adjustment is only ever needed to keep it positive;
/// an entry that cannot be repaired that way is rejected.
pub fn plan_grid(theta: f64, n_grid: &[usize]) -> Vec<GridPlan> {
    n_grid
        .iter()
        .map(|&n| {
            let rounded = (theta * n as f64).round() as usize;
            let mut g = rounded;
            while g > 0 && parts_for_genus(n, g).is_err() {
                g -= 1;
            }
            let adjustment = g as i64 - rounded as i64;
            if n == 0 {
                return GridPlan { n, rounded_genus: rounded, g: None, adjustment: 0, note: "n must be positive".into() };
            }
            let note = if adjustment == 0 {
                "g unchanged".to_string()
            } else {
                format!("g lowered by {} to keep a positive part count", -adjustment)
            };
            GridPlan { n, rounded_genus: rounded, g: Some(g), adjustment, note }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub n: usize,
    pub trial: usize,
    pub g: usize,
    pub vertices: usize,
    pub typical_distance: Option<u32>,
    pub diameter: Option<u32>,
    pub diameter_exact: Option<bool>,
    pub injectivity_radius: Option<InjectivityRadius>,
    pub injectivity_pass: Option<bool>,
    pub cond_a_max_part: bool,
    pub cond_a_moments: bool,
    pub cond_a_fixed_points: bool,
    pub lambda_max: u32,
    pub attempts: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub n: usize,
    pub g: usize,
    pub trials: usize,
    pub ln_n: f64,
    pub typical_mean: f64,
    pub typical_median: f64,
    pub typical_q10: f64,
    pub typical_q90: f64,
    pub typical_ratio: f64,
    pub diameter_mean: f64,
    pub diameter_median: f64,
    pub diameter_ratio: f64,
    pub diameter_all_exact: bool,
    pub injectivity_pass_rate: f64,
    pub injectivity_median: f64,
    pub condition_a_rate: f64,
    pub attempts_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub plans: Vec<GridPlan>,
    pub records: Vec<TrialRecord>,
    pub summary: Vec<SummaryRow>,
}

fn run_trial(cfg: &ExperimentConfig, n: usize, g: usize, trial: usize) -> Result<TrialRecord> {
    let mut rng = stream_rng(cfg.master_seed, n as u64, trial as u64);
    let (mt, attempts) = sample_marked_tree(n, g, &mut rng)?;
    let gq = glue(&mt);
    let vertices = gq.vertex_count();
    if vertices as i64 - n as i64 != 1 - 2 * g as i64 {
        return Err(Error::EulerViolation { n, g, vertices, seed: cfg.master_seed, trial, dump: mt.to_text() });
    }
    let a = check_condition_a(mt.lambda(), n, &cfg.constants())?;
    let typical = cfg.wants(Metric::Typical).then(|| typical_distance(&gq, &mut rng));
    let diam = cfg.wants(Metric::Diameter).then(|| diameter_with_cap(&gq, cfg.diameter_cap));
    let inj = cfg.wants(Metric::Injectivity).then(|| injectivity_radius(&gq));
    Ok(TrialRecord {
        n,
        trial,
        g,
        vertices,
        typical_distance: typical,
        diameter: diam.map(|d| d.value),
        diameter_exact: diam.map(|d| d.exact),
        injectivity_radius: inj,
        injectivity_pass: inj.map(|i| i.at_least(cfg.injectivity_factor * (n as f64).ln())),
        cond_a_max_part: a.max_part,
        cond_a_moments: a.moments,
        cond_a_fixed_points: a.fixed_points,
        lambda_max: mt.lambda().max_part(),
        attempts,
    })
}

fn summarize(n: usize, g: usize, rows: &[TrialRecord]) -> SummaryRow {
    let ln_n = (n as f64).ln();
    let sorted = |f: &dyn Fn(&TrialRecord) -> Option<f64>| {
        let mut v: Vec<f64> = rows.iter().filter_map(f).collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let mean = |v: &[f64]| if v.is_empty() { f64::NAN } else { v.iter().sum::<f64>() / v.len() as f64 };
    let rate = |v: &[bool]| if v.is_empty() { f64::NAN } else { v.iter().filter(|&&b| b).count() as f64 / v.len() as f64 };
    let typical = sorted(&|r| r.typical_distance.map(f64::from));
    let diam = sorted(&|r| r.diameter.map(f64::from));
    let inj = sorted(&|r| {
        r.injectivity_radius.map(|i| match i {
            InjectivityRadius::Absent => -1.0,
            InjectivityRadius::Finite(x) => f64::from(x),
            InjectivityRadius::Unbounded => f64::INFINITY,
        })
    });
    let passes: Vec<bool> = rows.iter().filter_map(|r| r.injectivity_pass).collect();
    let cond_a: Vec<bool> = rows.iter().map(|r| r.cond_a_max_part && r.cond_a_moments && r.cond_a_fixed_points).collect();
    SummaryRow {
        n,
        g,
        trials: rows.len(),
        ln_n,
        typical_mean: mean(&typical),
        typical_median: quantile(&typical, 0.5),
        typical_q10: quantile(&typical, 0.1),
        typical_q90: quantile(&typical, 0.9),
        typical_ratio: mean(&typical) / ln_n,
        diameter_mean: mean(&diam),
        diameter_median: quantile(&diam, 0.5),
        diameter_ratio: mean(&diam) / ln_n,
        diameter_all_exact: rows.iter().all(|r| r.diameter_exact != Some(false)),
        injectivity_pass_rate: rate(&passes),
        injectivity_median: quantile(&inj, 0.5),
        condition_a_rate: rate(&cond_a),
        attempts_mean: rows.iter().map(|r| r.attempts as f64).sum::<f64>() / rows.len() as f64,
    }
}

/// Runs every feasible grid entry. Trials run in parallel on the current
/// rayon pool; the output is sorted by `(n, trial)`. Rejected entries are
/// reported in `plans` and skipped. An Euler violation aborts the run.
pub fn run_scaling_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let plans = plan_grid(cfg.theta, &cfg.n_grid);
    let jobs: Vec<(usize, usize, usize)> = plans
        .iter()
        .filter_map(|p| p.g.map(|g| (p.n, g)))
        .flat_map(|(n, g)| (0..cfg.trials).map(move |t| (n, g, t)))
        .collect();
    let mut records = jobs
        .into_par_iter()
        .map(|(n, g, t)| run_trial(cfg, n, g, t))
        .collect::<Result<Vec<_>>>()?;
    records.sort_by_key(|r| (r.n, r.trial));
    let mut summary = Vec::new();
    for chunk in records.chunk_by(|a, b| a.n == b.n) {
        summary.push(summarize(chunk[0].n, chunk[0].g, chunk));
    }
    Ok(ExperimentResult { plans, records, summary })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub residuals: Vec<f64>,
    /// Largest residual relative to the mean of the fitted values.
    pub relative_residual: f64,
    /// `mean / ln n` at each grid point.
    pub ratios: Vec<f64>,
    /// Largest `|ratio[i+1] / ratio[i] - 1|` over the top three grid points.
    pub ratio_spread: f64,
}

impl ScalingFit {
    /// Log-linear within tolerances: ratios stable and residuals small.
    pub fn is_logarithmic(&self, spread_tol: f64, residual_tol: f64) -> bool {
        self.ratio_spread < spread_tol && self.relative_residual < residual_tol
    }
}

/// Least-squares fit of `means` against `ln n`.
pub fn fit_log_scaling(ns: &[usize], means: &[f64]) -> Result<ScalingFit> {
    if ns.len() < 3 || ns.len() != means.len() {
        return Err(Error::InvalidParameter(format!("need at least 3 grid points, got {}", ns.len())));
    }
    let mut order: Vec<usize> = (0..ns.len()).collect();
    order.sort_by_key(|&i| ns[i]);
    if order.windows(2).any(|w| ns[w[0]] == ns[w[1]]) || ns.iter().any(|&n| n < 2) {
        return Err(Error::InvalidParameter("grid sizes must be distinct and at least 2".into()));
    }
    let xs: Vec<f64> = order.iter().map(|&i| (ns[i] as f64).ln()).collect();
    let ys: Vec<f64> = order.iter().map(|&i| means[i]).collect();
    let fit = linear_fit(&xs, &ys)?;
    let mean_y = ys.iter().sum::<f64>() / ys.len() as f64;
    let ratios: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y / x).collect();
    let top = &ratios[ratios.len() - 3..];
    let ratio_spread = top.windows(2).map(|w| (w[1] / w[0] - 1.0).abs()).fold(0.0, f64::max);
    Ok(ScalingFit {
        slope: fit.slope,
        intercept: fit.intercept,
        relative_residual: fit.max_abs_residual() / mean_y.abs(),
        residuals: fit.residuals,
        ratios,
        ratio_spread,
    })
}

pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
    }
    w.flush().map_err(|e| Error::InvalidParameter(format!("csv: {e}")))
}

/// A gnuplot script plotting the per-size mean ratios from `summary_csv`.
pub fn gnuplot_script(summary_csv: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# mean distance / ln n against n");
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set logscale x 2");
    let _ = writeln!(s, "set xlabel 'n (edges)'");
    let _ = writeln!(s, "set ylabel 'mean / ln n'");
    let _ = writeln!(
        s,
        "plot '{summary_csv}' using 1:(column('typical_ratio')) with linespoints title 'typical distance', \\\n     '{summary_csv}' using 1:(column('diameter_ratio')) with linespoints title 'diameter'"
    );
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(theta: f64) -> ExperimentConfig {
        ExperimentConfig { theta, n_grid: vec![64, 128, 256], trials: 6, master_seed: 3, ..Default::default() }
    }

    #[test]
    fn grid_planning() {
        let p = plan_grid(0.25, &[4096, 10]);
        assert_eq!((p[0].g, p[0].adjustment), (Some(1024), 0));
        // round(2.5) = 3 rounds away from zero; 11 - 6 = 5 parts stays positive
        assert_eq!(p[1].g, Some(3));
        let p = plan_grid(0.49, &[100, 0]);
        assert_eq!(p[0].g, Some(49));
        assert_eq!(p[1].g, None);
        // theta < 1/2 keeps round(theta n) <= n/2, so nothing is ever adjusted
        for theta in [0.0, 0.1, 0.25, 0.4999] {
            let ns: Vec<usize> = (1..300).collect();
            assert!(plan_grid(theta, &ns).iter().all(|p| p.adjustment == 0 && p.g.is_some()));
        }
    }

    #[test]
    fn config_json() {
        let cfg = ExperimentConfig::from_json(r#"{"theta": 0.1, "n_grid": [100, 200], "metrics": ["typical"]}"#).unwrap();
        assert_eq!(cfg.trials, 200);
        assert_eq!(cfg.metrics, vec![Metric::Typical]);
        assert!(ExperimentConfig::from_json(r#"{"theta": 0.6}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"thetta": 0.1}"#).is_err());
    }

    #[test]
    fn deterministic_across_pools() {
        let cfg = small(0.25);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let a = one.install(|| run_scaling_experiment(&cfg)).unwrap();
        let b = three.install(|| run_scaling_experiment(&cfg)).unwrap();
        assert_eq!(a, b);
        let mut x = Vec::new();
        let mut y = Vec::new();
        write_csv(&a.records, &mut x).unwrap();
        write_csv(&b.records, &mut y).unwrap();
        assert_eq!(x, y);
        assert_eq!(a.records.len(), 18);
        assert!(a.records.iter().all(|r| r.vertices + 2 * r.g == r.n + 1));
    }

    #[test]
    fn log_fit_examples() {
        let ns: Vec<usize> = (12..=17).map(|k| 1usize << k).collect();
        let exact: Vec<f64> = ns.iter().map(|&n| 3.0 * (n as f64).ln()).collect();
        let f = fit_log_scaling(&ns, &exact).unwrap();
        assert!((f.slope - 3.0).abs() < 1e-9 && f.relative_residual < 1e-12 && f.ratio_spread < 1e-12);
        assert!(f.is_logarithmic(0.15, 0.05));
        let root: Vec<f64> = ns.iter().map(|&n| (n as f64).sqrt()).collect();
        let f = fit_log_scaling(&ns, &root).unwrap();
        assert!(f.relative_residual > 0.05);
        assert!(!f.is_logarithmic(0.15, 0.05));
        assert!(fit_log_scaling(&ns[..2], &exact[..2]).is_err());
        assert!(fit_log_scaling(&[8, 8, 16], &[1.0, 1.0, 2.0]).is_err());
    }

    #[test]
    fn gnuplot_mentions_columns() {
        let s = gnuplot_script("summary.csv");
        assert!(s.contains("typical_ratio") && s.contains("diameter_ratio") && s.contains("summary.csv"));
    }
}
