//! Experiment harness: phase-transition sweeps, timing, noisy robustness
//! and concentration-bound validation.
//!
//! Every trial owns its instance, oracle and RNG, seeded from
//! `(base seed, cell, trial)`, so results do not depend on scheduling.
//! Rows are emitted in cell-key order.

mod detection;
mod noisy;
mod plot;
mod success;
mod table;
mod timing;

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

pub use detection::run_detection_validation;
pub use noisy::run_noisy_coherence;
pub use plot::plot_script;
pub use success::{run_rank_collapse, run_success_sweep, success_thresholds, threshold_crossing};
pub use table::{num, CsvTable};
pub use timing::{per_column_budget, run_timing, table1_preset};

use crate::error::{Error, Result};
use crate::instance::SamplingKind;

/// Relative Frobenius error at or below which a noiseless run counts as a
/// success.
pub const SUCCESS_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    SuccessVsP,
    SuccessVsR,
    Timing,
    NoisyCoherence,
    DetectionValidate,
}

/// One timing cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingCell {
    pub n: usize,
    pub r: usize,
    pub oversampling: f64,
}

/// Parameters of the noisy column-subset-selection runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CssParams {
    pub rounds: usize,
    pub columns_per_round: usize,
    pub m_per_column: usize,
    /// Rank of the reconstruction subspace; the instance rank when absent.
    #[serde(default)]
    pub truncate_rank: Option<usize>,
}

/// Sweep description, read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub n: Vec<usize>,
    #[serde(default)]
    pub r: Vec<usize>,
    /// Sampling fractions `p = m/n`; converted to `m = max(1, round(p n))`.
    #[serde(default)]
    pub p: Vec<f64>,
    /// Per-column sample counts, used instead of `p` when nonempty.
    #[serde(default)]
    pub m: Vec<usize>,
    #[serde(default)]
    pub sigma: Vec<f64>,
    #[serde(default)]
    pub theta: Vec<f64>,
    /// Subspace dimensions for detection validation.
    #[serde(default)]
    pub d: Vec<usize>,
    /// Oversampling ratios `m/d_r` for timing (cartesian with `n`, `r`).
    #[serde(default)]
    pub oversampling: Vec<f64>,
    /// Explicit timing cells, used instead of the cartesian grid.
    #[serde(default)]
    pub cells: Vec<TimingCell>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Omit the timestamp line and write wall times as 0.
    #[serde(default)]
    pub deterministic: bool,
    #[serde(default)]
    pub sampling: SamplingKind,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_threshold")]
    pub success_threshold: f64,
    /// Largest accepted dimension.
    #[serde(default = "default_max_n")]
    pub max_n: usize,
    #[serde(default)]
    pub css: Option<CssParams>,
}

fn default_trials() -> usize {
    50
}

fn default_delta() -> f64 {
    0.05
}

fn default_threshold() -> f64 {
    SUCCESS_THRESHOLD
}

fn default_max_n() -> usize {
    2000
}

impl SweepConfig {
    /// A config of the given kind with every grid empty and defaults elsewhere.
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            kind,
            n: Vec::new(),
            r: Vec::new(),
            p: Vec::new(),
            m: Vec::new(),
            sigma: Vec::new(),
            theta: Vec::new(),
            d: Vec::new(),
            oversampling: Vec::new(),
            cells: Vec::new(),
            trials: default_trials(),
            seed: 0,
            output: None,
            deterministic: false,
            sampling: SamplingKind::WithReplacement,
            delta: default_delta(),
            success_threshold: SUCCESS_THRESHOLD,
            max_n: default_max_n(),
            css: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return bad("delta must lie in (0, 1/2)");
        }
        if let Some(&n) = self.n.iter().chain(self.cells.iter().map(|c| &c.n)).find(|&&n| n > self.max_n) {
            return Err(Error::Config(format!("n = {n} exceeds max_n = {}", self.max_n)));
        }
        if self.n.contains(&0) || self.r.contains(&0) || self.d.contains(&0) {
            return bad("grid values must be positive");
        }
        match self.kind {
            ExperimentKind::SuccessVsP | ExperimentKind::SuccessVsR => {
                if self.n.is_empty() || self.r.is_empty() || (self.p.is_empty() && self.m.is_empty()) {
                    return bad("success sweeps need n, r and p (or m) grids");
                }
                if self.p.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                    return bad("p values must lie in [0, 1]");
                }
            }
            ExperimentKind::Timing => {
                if self.cells.is_empty() && (self.n.is_empty() || self.r.is_empty() || self.oversampling.is_empty()) {
                    return bad("timing needs cells or n, r and oversampling grids");
                }
            }
            ExperimentKind::NoisyCoherence => {
                if self.n.is_empty() || self.r.is_empty() || self.sigma.is_empty() || self.theta.is_empty() {
                    return bad("noisy-coherence needs n, r, sigma and theta grids");
                }
                if self.css.is_none() {
                    return bad("noisy-coherence needs css parameters");
                }
                if self.theta.iter().any(|t| !(0.0..=1.0).contains(t)) || self.sigma.iter().any(|&s| !(s >= 0.0)) {
                    return bad("theta must lie in [0, 1] and sigma must be nonnegative");
                }
            }
            ExperimentKind::DetectionValidate => {
                if self.n.is_empty() || self.d.is_empty() {
                    return bad("detection-validate needs n and d grids");
                }
            }
        }
        Ok(())
    }

    pub(crate) fn wall(&self, seconds: f64) -> f64 {
        if self.deterministic {
            0.0
        } else {
            seconds
        }
    }
}

/// Result of a sweep.
#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub table: CsvTable,
    /// Derived per-group thresholds or summary rows, when the experiment
    /// has them.
    pub summary: Option<CsvTable>,
    /// Name of the x and y columns the plot script draws.
    pub plot_axes: (String, String),
    /// Columns grouping rows into curves.
    pub plot_group: Vec<String>,
}

/// Runs the experiment named by `config.kind`.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepOutput> {
    config.validate()?;
    match config.kind {
        ExperimentKind::SuccessVsP => run_success_sweep(config),
        ExperimentKind::SuccessVsR => run_rank_collapse(config),
        ExperimentKind::Timing => run_timing(config),
        ExperimentKind::NoisyCoherence => run_noisy_coherence(config),
        ExperimentKind::DetectionValidate => run_detection_validation(config),
    }
}

/// Paths written by [`write_outputs`].
#[derive(Debug, Clone)]
pub struct WrittenFiles {
    pub csv: PathBuf,
    pub summary: Option<PathBuf>,
    pub plot: PathBuf,
}

/// Writes the CSV, the summary CSV (`<stem>.summary.csv`) and a gnuplot
/// script (`<stem>.gp`) next to `path`.
pub fn write_outputs(output: &SweepOutput, path: &Path, deterministic: bool) -> Result<WrittenFiles> {
    let stamp = if deterministic {
        None
    } else {
        Some(SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0))
    };
    output.table.write(path, stamp)?;
    let summary = match &output.summary {
        Some(s) => {
            let p = path.with_extension("summary.csv");
            s.write(&p, stamp)?;
            Some(p)
        }
        None => None,
    };
    let plot = path.with_extension("gp");
    let csv_name = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    std::fs::write(&plot, plot_script(output, &csv_name))?;
    Ok(WrittenFiles { csv: path.to_path_buf(), summary, plot })
}

/// Mean of a slice; `NaN` when empty.
pub(crate) fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (s, n) = xs.into_iter().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_unknown_fields() {
        let c = SweepConfig::from_json(r#"{"kind": "success-vs-p", "n": [50], "r": [2], "p": [0.5]}"#).unwrap();
        assert_eq!(c.trials, 50);
        assert_eq!(c.delta, 0.05);
        assert_eq!(c.sampling, SamplingKind::WithReplacement);
        c.validate().unwrap();
        assert!(SweepConfig::from_json(r#"{"kind": "success-vs-p", "bogus": 1}"#).is_err());
        assert!(SweepConfig::from_json(r#"{"kind": "nope"}"#).is_err());
    }

    #[test]
    fn validation_rejects_bad_grids() {
        let mut c = SweepConfig::new(ExperimentKind::SuccessVsP);
        assert!(c.validate().is_err());
        c.n = vec![3000];
        c.r = vec![2];
        c.p = vec![0.5];
        assert!(c.validate().is_err());
        c.n = vec![30];
        c.p = vec![1.5];
        assert!(c.validate().is_err());
        c.p = vec![0.5];
        c.trials = 0;
        assert!(c.validate().is_err());
    }
}
