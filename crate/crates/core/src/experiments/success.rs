use rayon::prelude::*;

use super::{mean, num, CsvTable, SweepConfig, SweepOutput};
use crate::bounds::{corollary_total, tensor_total};
use crate::error::{Error, Result};
use crate::instance::{gen_matrix, Family, SyntheticSpec};
use crate::noiseless::{complete_matrix, NoiselessConfig};
use crate::seed;

const COLUMNS: &[&str] = &[
    "n",
    "r",
    "m",
    "p",
    "np",
    "np_log2n",
    "np_per_log2n",
    "p_per_r",
    "p_per_r15",
    "trials",
    "successes",
    "success_rate",
    "rank_deficient",
    "mean_rel_error",
    "max_rel_error",
    "mean_entries_observed",
    "mean_entries_gross",
    "mean_fully_observed",
    "max_fully_observed",
    "audit_mismatches",
    "mean_mu_u",
    "eq3_bound",
    "corollary_bound",
    "wall_time",
];

#[derive(Debug, Clone, Copy)]
struct Outcome {
    success: bool,
    /// `None` when the run stopped on a rank-deficient `U_Ω`.
    rel_error: Option<f64>,
    entries: usize,
    gross: usize,
    fully: usize,
    audit_ok: bool,
    mu_u: f64,
    wall: f64,
}

fn m_grid(config: &SweepConfig, n: usize) -> Vec<usize> {
    let mut ms: Vec<usize> = if config.m.is_empty() {
        config.p.iter().map(|&p| ((p * n as f64).round() as usize).clamp(1, n)).collect()
    } else {
        config.m.iter().map(|&m| m.clamp(1, n)).collect()
    };
    ms.sort_unstable();
    ms.dedup();
    ms
}

fn trial(n: usize, r: usize, m: usize, config: &SweepConfig, t: usize) -> Result<Outcome> {
    let s = seed::derive(config.seed, &[n as u64, r as u64, m as u64, t as u64]);
    let spec = SyntheticSpec::matrix(n, n, r, Family::GaussianFactors, s);
    let (inst, mut oracle) = gen_matrix(&spec)?;
    let mut rng = seed::rng(s, &[1]);
    let cfg = NoiselessConfig { sampling: config.sampling, ..NoiselessConfig::matrix(m) };
    match complete_matrix(&mut oracle, n, n, &cfg, &mut rng) {
        Ok(mut rep) => {
            let err = rep.evaluate(inst.ground_truth(), config.success_threshold)?;
            Ok(Outcome {
                success: rep.success == Some(true),
                rel_error: Some(err),
                entries: rep.entries_observed,
                gross: rep.entries_gross,
                fully: rep.fully_observed_units,
                audit_ok: rep.entries_observed == oracle.observed_count(),
                mu_u: inst.mu0_actual,
                wall: rep.wall_time,
            })
        }
        Err(Error::RankDeficient { .. }) => Ok(Outcome {
            success: false,
            rel_error: None,
            entries: oracle.observed_count(),
            gross: oracle.observed_count(),
            fully: 0,
            audit_ok: true,
            mu_u: inst.mu0_actual,
            wall: 0.0,
        }),
        Err(e) => Err(e),
    }
}

fn sweep(config: &SweepConfig, x_axis: &str, group: &[&str]) -> Result<SweepOutput> {
    let mut ns = config.n.clone();
    ns.sort_unstable();
    ns.dedup();
    let mut rs = config.r.clone();
    rs.sort_unstable();
    rs.dedup();
    let mut cells = Vec::new();
    for &n in &ns {
        for &r in rs.iter().filter(|&&r| r <= n) {
            for m in m_grid(config, n) {
                cells.push((n, r, m));
            }
        }
    }
    let jobs: Vec<(usize, usize)> = (0..cells.len()).flat_map(|c| (0..config.trials).map(move |t| (c, t))).collect();
    let outcomes: Vec<Outcome> = jobs
        .par_iter()
        .map(|&(c, t)| {
            let (n, r, m) = cells[c];
            trial(n, r, m, config, t)
        })
        .collect::<Result<_>>()?;

    let mut table = CsvTable::new(COLUMNS);
    for (c, &(n, r, m)) in cells.iter().enumerate() {
        let runs = &outcomes[c * config.trials..(c + 1) * config.trials];
        let successes = runs.iter().filter(|o| o.success).count();
        let errors: Vec<f64> = runs.iter().filter_map(|o| o.rel_error).collect();
        let p = m as f64 / n as f64;
        let ln_n = (n as f64).ln();
        let mu = mean(runs.iter().map(|o| o.mu_u));
        table.push(vec![
            n.to_string(),
            r.to_string(),
            m.to_string(),
            num(p),
            num(m as f64),
            num(m as f64 * ln_n * ln_n),
            num(m as f64 / (ln_n * ln_n)),
            num(p / r as f64),
            num(p / (r as f64).powf(1.5)),
            config.trials.to_string(),
            successes.to_string(),
            num(successes as f64 / config.trials as f64),
            runs.iter().filter(|o| o.rel_error.is_none()).count().to_string(),
            num(mean(errors.iter().copied())),
            num(errors.iter().copied().fold(f64::NAN, f64::max)),
            num(mean(runs.iter().map(|o| o.entries as f64))),
            num(mean(runs.iter().map(|o| o.gross as f64))),
            num(mean(runs.iter().map(|o| o.fully as f64))),
            runs.iter().map(|o| o.fully).max().unwrap_or(0).to_string(),
            runs.iter().filter(|o| !o.audit_ok).count().to_string(),
            num(mu),
            num(tensor_total(r, mu, config.delta, &[n, n])),
            num(corollary_total(r, mu, config.delta, n, n)),
            num(config.wall(runs.iter().map(|o| o.wall).sum())),
        ]);
    }
    let summary = success_thresholds(&table)?;
    Ok(SweepOutput {
        table,
        summary: Some(summary),
        plot_axes: (x_axis.to_string(), "success_rate".to_string()),
        plot_group: group.iter().map(|s| s.to_string()).collect(),
    })
}

/// Success rate against `m` for each `(n, r)`.
pub fn run_success_sweep(config: &SweepConfig) -> Result<SweepOutput> {
    sweep(config, "np", &["n", "r"])
}

/// Success rate against `p` for each rank at fixed `n`, with the `p/r` and
/// `p/r^{3/2}` rescalings in the table.
pub fn run_rank_collapse(config: &SweepConfig) -> Result<SweepOutput> {
    sweep(config, "p", &["r"])
}

/// Where a success curve first reaches one half, interpolating linearly
/// between the bracketing grid points. Points must be sorted by `x`.
pub fn threshold_crossing(points: &[(f64, f64)]) -> Option<f64> {
    let i = points.iter().position(|&(_, s)| s >= 0.5)?;
    if i == 0 {
        return Some(points[0].0);
    }
    let (x0, s0) = points[i - 1];
    let (x1, s1) = points[i];
    Some(x0 + (0.5 - s0) / (s1 - s0) * (x1 - x0))
}

/// Per-`(n, r)` 50% thresholds of a success table, in `m` and in `p`.
pub fn success_thresholds(table: &CsvTable) -> Result<CsvTable> {
    let field = |row: usize, name: &str| {
        table.value(row, name).ok_or_else(|| Error::Parse(format!("missing column `{name}` in success table")))
    };
    let mut groups: Vec<((usize, usize), Vec<(f64, f64)>)> = Vec::new();
    for row in 0..table.len() {
        let key = (field(row, "n")? as usize, field(row, "r")? as usize);
        let point = (field(row, "m")?, field(row, "success_rate")?);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, pts)) => pts.push(point),
            None => groups.push((key, vec![point])),
        }
    }
    let mut out = CsvTable::new(&["n", "r", "m_star", "p_star", "m_star_per_r", "p_star_per_r"]);
    for ((n, r), mut pts) in groups {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let m_star = threshold_crossing(&pts).unwrap_or(f64::NAN);
        out.push(vec![
            n.to_string(),
            r.to_string(),
            num(m_star),
            num(m_star / n as f64),
            num(m_star / r as f64),
            num(m_star / (n * r) as f64),
        ]);
    }
    Ok(out)
}
