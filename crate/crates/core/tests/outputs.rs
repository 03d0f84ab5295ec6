use std::io::BufReader;

use adcp::experiments::{run_sweep, write_outputs, CsvTable, SweepConfig};
use adcp::instance::{gen_matrix, gen_tensor, read_instance, write_instance, Family, SyntheticSpec};
use proptest::prelude::*;

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![
        Just(Family::GaussianFactors),
        (0.0f64..=1.0).prop_map(|theta| Family::CoherentRow { theta }),
        Just(Family::BlockDiagonal { mu0: 2.0 }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn instance_files_round_trip(fam in family(), s in any::<u64>(), tensor in any::<bool>()) {
        let spec = if tensor {
            SyntheticSpec::tensor(&[8, 8, 4], 2, fam, s)
        } else {
            SyntheticSpec::matrix(16, 8, 2, fam, s)
        };
        let (inst, _) = if tensor { gen_tensor(&spec) } else { gen_matrix(&spec) }.unwrap();
        let mut buf = Vec::new();
        write_instance(&inst, &mut buf).unwrap();
        let back = read_instance(BufReader::new(&buf[..])).unwrap();
        prop_assert_eq!(back.spec().dims.clone(), spec.dims.clone());
        prop_assert_eq!(back.spec().family, spec.family);
        prop_assert_eq!(back.factors(), inst.factors());
        let diff = back.ground_truth().distance_sq(inst.ground_truth()).unwrap();
        prop_assert!(diff <= 1e-28 * inst.ground_truth().frobenius_norm().powi(2));
    }
}

fn success_config() -> SweepConfig {
    SweepConfig::from_json(
        r#"{"kind": "success-vs-p", "n": [40, 60], "r": [2], "p": [0.05, 0.1, 0.2, 0.4], "trials": 6, "seed": 11}"#,
    )
    .unwrap()
}

#[test]
fn success_rates_are_exact_fractions() {
    let out = run_sweep(&success_config()).unwrap();
    for row in 0..out.table.len() {
        let trials = out.table.value(row, "trials").unwrap();
        let successes = out.table.value(row, "successes").unwrap();
        assert_eq!(out.table.value(row, "success_rate").unwrap(), successes / trials);
        assert_eq!(out.table.value(row, "audit_mismatches"), Some(0.0));
    }
}

#[test]
fn deterministic_files_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = success_config();
    c.deterministic = true;
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let fa = write_outputs(&run_sweep(&c).unwrap(), &a, true).unwrap();
    write_outputs(&run_sweep(&c).unwrap(), &b, true).unwrap();
    let read = |p: &std::path::Path| std::fs::read_to_string(p).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_eq!(read(&dir.path().join("a.summary.csv")), read(&dir.path().join("b.summary.csv")));
    let script = read(&fa.plot);
    assert!(script.contains("'a.csv'"));
    assert!(!read(&a).starts_with('#'));
    let parsed = CsvTable::parse(&read(&a)).unwrap();
    assert_eq!(parsed.len(), 8);
}

#[test]
fn timestamp_line_present_unless_suppressed() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.csv");
    write_outputs(&run_sweep(&success_config()).unwrap(), &p, false).unwrap();
    let text = std::fs::read_to_string(&p).unwrap();
    assert!(text.starts_with("# generated-at "));
    assert_eq!(CsvTable::parse(&text).unwrap().len(), 8);
}
