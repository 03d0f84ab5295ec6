use super::{num, CsvTable, ExperimentKind, SweepConfig, SweepOutput, TimingCell};
use crate::error::{Error, Result};
use crate::instance::{gen_matrix, Family, SyntheticSpec};
use crate::noiseless::{complete_matrix, NoiselessConfig};
use crate::seed;

const COLUMNS: &[&str] = &[
    "n",
    "r",
    "oversampling_target",
    "m_per_column",
    "entries_observed",
    "m_over_dr",
    "m_over_n2",
    "time_s",
    "rel_error",
    "exact",
    "fully_observed",
];

/// Per-column draw count whose expected total, `m n` draws plus the
/// unsampled rows of `r` fully observed columns, is closest to
/// `oversampling · r(2n − r)`.
pub fn per_column_budget(n: usize, r: usize, oversampling: f64) -> usize {
    let target = oversampling * (r * (2 * n - r)) as f64;
    let nf = n as f64;
    let expected = |m: usize| m as f64 * nf + r as f64 * nf * (1.0 - 1.0 / nf).powi(m as i32);
    (1..=n).min_by(|&a, &b| (expected(a) - target).abs().total_cmp(&(expected(b) - target).abs())).unwrap_or(1)
}

/// The timing table's cells; `large` adds the `n = 5000` and `n = 10000`
/// rows.
pub fn table1_preset(large: bool) -> SweepConfig {
    let mut cells = vec![
        TimingCell { n: 1000, r: 10, oversampling: 3.4 },
        TimingCell { n: 1000, r: 50, oversampling: 3.3 },
        TimingCell { n: 1000, r: 100, oversampling: 3.2 },
    ];
    if large {
        cells.extend([
            TimingCell { n: 5000, r: 10, oversampling: 3.4 },
            TimingCell { n: 5000, r: 50, oversampling: 3.5 },
            TimingCell { n: 5000, r: 100, oversampling: 3.4 },
            TimingCell { n: 10000, r: 10, oversampling: 3.4 },
            TimingCell { n: 10000, r: 50, oversampling: 3.5 },
            TimingCell { n: 10000, r: 100, oversampling: 3.5 },
        ]);
    }
    let mut c = SweepConfig::new(ExperimentKind::Timing);
    c.cells = cells;
    c.trials = 1;
    c.max_n = if large { 10000 } else { 2000 };
    c
}

/// One completion per `(n, r, oversampling)` cell, timed.
pub fn run_timing(config: &SweepConfig) -> Result<SweepOutput> {
    let mut cells = config.cells.clone();
    if cells.is_empty() {
        for &n in &config.n {
            for &r in &config.r {
                for &oversampling in &config.oversampling {
                    cells.push(TimingCell { n, r, oversampling });
                }
            }
        }
    }
    cells.sort_by(|a, b| (a.n, a.r).cmp(&(b.n, b.r)).then(a.oversampling.total_cmp(&b.oversampling)));
    let mut table = CsvTable::new(COLUMNS);
    for cell in &cells {
        let TimingCell { n, r, oversampling } = *cell;
        if r == 0 || r > n {
            return Err(Error::Config(format!("rank {r} outside [1, {n}]")));
        }
        let m = per_column_budget(n, r, oversampling);
        let s = seed::derive(config.seed, &[n as u64, r as u64, oversampling.to_bits()]);
        let (inst, mut oracle) = gen_matrix(&SyntheticSpec::matrix(n, n, r, Family::GaussianFactors, s))?;
        let cfg = NoiselessConfig { sampling: config.sampling, ..NoiselessConfig::matrix(m) };
        let (entries, time, err, fully) = match complete_matrix(&mut oracle, n, n, &cfg, &mut seed::rng(s, &[1])) {
            Ok(mut rep) => {
                let err = rep.evaluate(inst.ground_truth(), config.success_threshold)?;
                (rep.entries_observed, rep.wall_time, err, rep.fully_observed_units)
            }
            Err(Error::RankDeficient { .. }) => (oracle.observed_count(), 0.0, f64::INFINITY, 0),
            Err(e) => return Err(e),
        };
        let dr = (r * (2 * n - r)) as f64;
        table.push(vec![
            n.to_string(),
            r.to_string(),
            num(oversampling),
            m.to_string(),
            entries.to_string(),
            num(entries as f64 / dr),
            num(entries as f64 / (n * n) as f64),
            num(config.wall(time)),
            num(err),
            (err <= config.success_threshold).to_string(),
            fully.to_string(),
        ]);
    }
    Ok(SweepOutput {
        table,
        summary: None,
        plot_axes: ("r".to_string(), "time_s".to_string()),
        plot_group: vec!["n".to_string()],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_matches_target_ratio() {
        for (r, ratio, expect) in [(10, 3.4, 0.068), (50, 3.3, 0.32), (100, 3.2, 0.61)] {
            let m = per_column_budget(1000, r, ratio);
            let nf = 1000.0;
            let total = m as f64 * nf + r as f64 * nf * (1.0 - 1.0 / nf).powi(m as i32);
            assert!((total / 1e6 - expect).abs() < 0.01, "r={r} m={m} total={total}");
        }
    }

    #[test]
    fn degrees_of_freedom() {
        assert_eq!(10 * (2 * 1000 - 10), 19_900);
    }

    #[test]
    fn small_timing_run() {
        let mut c = SweepConfig::new(ExperimentKind::Timing);
        c.cells = vec![TimingCell { n: 120, r: 4, oversampling: 3.4 }];
        c.deterministic = true;
        let out = run_timing(&c).unwrap();
        assert_eq!(out.table.get(0, "exact"), Some("true"));
        assert_eq!(out.table.value(0, "time_s"), Some(0.0));
    }
}
