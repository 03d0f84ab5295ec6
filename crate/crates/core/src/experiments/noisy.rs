use rayon::prelude::*;

use super::{mean, num, CsvTable, SweepConfig, SweepOutput};
use crate::css::{css_complete, squared_error, CssConfig};
use crate::error::Result;
use crate::instance::{gen_matrix, Family, SyntheticSpec};
use crate::seed;

/// Error-to-bound ratio a cell must stay under.
pub const BOUND_SLACK: f64 = 10.0;

const COLUMNS: &[&str] = &[
    "n",
    "r",
    "sigma",
    "theta",
    "trials",
    "mean_mu_v",
    "mean_sq_error",
    "max_sq_error",
    "mean_rel_error",
    "max_rel_error",
    "mean_noise_energy",
    "mean_bound",
    "max_ratio",
    "within_bound",
    "mean_entries_observed",
    "max_entries_observed",
    "audit_mismatches",
    "mean_selected",
    "failed_units",
    "wall_time",
];

#[derive(Debug, Clone, Copy)]
struct Outcome {
    mu_v: f64,
    sq_error: f64,
    rel_error: f64,
    noise_energy: f64,
    bound: f64,
    entries: usize,
    audit_ok: bool,
    selected: usize,
    failed: usize,
    wall: f64,
}

fn trial(n: usize, r: usize, sigma: f64, theta: f64, config: &SweepConfig, css: &CssConfig, t: usize) -> Result<Outcome> {
    let s = seed::derive(config.seed, &[n as u64, r as u64, sigma.to_bits(), theta.to_bits(), t as u64]);
    let per_entry = sigma / ((n * n) as f64).sqrt();
    let spec = SyntheticSpec::matrix(n, n, r, Family::CoherentRow { theta }, s)
        .with_unit_frobenius()
        .with_noise(per_entry);
    let (inst, oracle) = gen_matrix(&spec)?;
    let mut oracle = oracle.with_log();
    let css = CssConfig { truncate_rank: css.truncate_rank.or(Some(r)), ..css.clone() };
    let rep = css_complete(&mut oracle, n, n, &css, &mut seed::rng(s, &[1]))?;
    let truth = inst.ground_truth();
    let sq_error = squared_error(&rep.completion.estimate, truth)?;
    let noise_energy = oracle.observed_noise_energy().unwrap_or(0.0);
    Ok(Outcome {
        mu_v: inst.mode_coherence()[1],
        sq_error,
        rel_error: rep.completion.estimate.relative_error(truth)?,
        noise_energy,
        bound: 1.0 / (n * n) as f64 + noise_energy,
        entries: rep.completion.entries_observed,
        audit_ok: rep.completion.entries_observed == oracle.observed_count(),
        selected: rep.selected_columns.len(),
        failed: rep.completion.failed_units.len(),
        wall: rep.completion.wall_time,
    })
}

/// Noisy column subset selection over a `σ × θ` grid of row-coherent,
/// unit-norm instances with per-entry noise `σ/√(n1 n2)`. Columns are
/// reconstructed from the best rank-`r` subspace of the selected columns
/// unless `css.truncate_rank` says otherwise.
///
/// The summary reports, per `(n, r, σ)`, the spread of mean error across
/// `θ` and whether the measured `μ(V)` increases with `θ`.
pub fn run_noisy_coherence(config: &SweepConfig) -> Result<SweepOutput> {
    let params = config.css.ok_or_else(|| crate::Error::Config("noisy-coherence needs css parameters".into()))?;
    let css = CssConfig {
        truncate_rank: params.truncate_rank,
        sampling: config.sampling,
        delta: config.delta,
        ..CssConfig::new(params.rounds, params.columns_per_round, params.m_per_column)
    };
    let sorted = |v: &[f64]| {
        let mut v = v.to_vec();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    };
    let sigmas = sorted(&config.sigma);
    let thetas = sorted(&config.theta);
    let mut cells = Vec::new();
    for &n in &config.n {
        for &r in config.r.iter().filter(|&&r| r <= n) {
            for &sigma in &sigmas {
                for &theta in &thetas {
                    cells.push((n, r, sigma, theta));
                }
            }
        }
    }
    cells.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2)).then(a.3.total_cmp(&b.3)));
    cells.dedup();
    let trials = config.trials;
    let jobs: Vec<(usize, usize)> = (0..cells.len()).flat_map(|c| (0..trials).map(move |t| (c, t))).collect();
    let outcomes: Vec<Outcome> = jobs
        .par_iter()
        .map(|&(c, t)| {
            let (n, r, sigma, theta) = cells[c];
            trial(n, r, sigma, theta, config, &css, t)
        })
        .collect::<Result<_>>()?;

    let mut table = CsvTable::new(COLUMNS);
    for (c, &(n, r, sigma, theta)) in cells.iter().enumerate() {
        let runs = &outcomes[c * trials..(c + 1) * trials];
        let max_ratio = runs.iter().map(|o| o.sq_error / o.bound).fold(0.0, f64::max);
        table.push(vec![
            n.to_string(),
            r.to_string(),
            num(sigma),
            num(theta),
            trials.to_string(),
            num(mean(runs.iter().map(|o| o.mu_v))),
            num(mean(runs.iter().map(|o| o.sq_error))),
            num(runs.iter().map(|o| o.sq_error).fold(0.0, f64::max)),
            num(mean(runs.iter().map(|o| o.rel_error))),
            num(runs.iter().map(|o| o.rel_error).fold(0.0, f64::max)),
            num(mean(runs.iter().map(|o| o.noise_energy))),
            num(mean(runs.iter().map(|o| o.bound))),
            num(max_ratio),
            (max_ratio <= BOUND_SLACK).to_string(),
            num(mean(runs.iter().map(|o| o.entries as f64))),
            runs.iter().map(|o| o.entries).max().unwrap_or(0).to_string(),
            runs.iter().filter(|o| !o.audit_ok).count().to_string(),
            num(mean(runs.iter().map(|o| o.selected as f64))),
            runs.iter().map(|o| o.failed).sum::<usize>().to_string(),
            num(config.wall(runs.iter().map(|o| o.wall).sum())),
        ]);
    }

    let mut summary = CsvTable::new(&["n", "r", "sigma", "min_mean_sq_error", "max_mean_sq_error", "flatness", "mu_v_increasing"]);
    let mut row = 0;
    while row < cells.len() {
        let (n, r, sigma, _) = cells[row];
        let end = (row..cells.len()).find(|&k| (cells[k].0, cells[k].1, cells[k].2) != (n, r, sigma)).unwrap_or(cells.len());
        let errs: Vec<f64> = (row..end).filter_map(|k| table.value(k, "mean_sq_error")).collect();
        let mus: Vec<f64> = (row..end).filter_map(|k| table.value(k, "mean_mu_v")).collect();
        let lo = errs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = errs.iter().copied().fold(0.0, f64::max);
        summary.push(vec![
            n.to_string(),
            r.to_string(),
            num(sigma),
            num(lo),
            num(hi),
            num(hi / lo),
            mus.windows(2).all(|w| w[1] > w[0]).to_string(),
        ]);
        row = end;
    }
    Ok(SweepOutput {
        table,
        summary: Some(summary),
        plot_axes: ("mean_mu_v".to_string(), "mean_sq_error".to_string()),
        plot_group: vec!["sigma".to_string()],
    })
}
