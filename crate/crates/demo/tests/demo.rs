use qpsoc_demo::{analyze, random_instance, witness, MAX_NODES};

#[test]
fn bounds_sit_below_the_oracle_and_rise_with_the_level() {
    for seed in 0..15 {
        let qp = random_instance(5, 0.5, seed).unwrap();
        let report = analyze(&qp).unwrap();
        let bounds: Vec<f64> = report.levels.iter().map(|l| l.bound.expect("solved")).collect();
        for b in &bounds {
            assert!(*b <= report.oracle + 1e-6, "seed {seed}: {b} > {}", report.oracle);
        }
        for w in bounds.windows(2) {
            assert!(w[1] >= w[0] - 1e-7, "seed {seed}: {bounds:?}");
        }
        if let Some(exact) = report.exact {
            assert!((exact.bound.unwrap() - report.oracle).abs() <= 1e-5, "seed {seed}");
        }
    }
}

#[test]
fn random_instances_are_reproducible_and_capped() {
    let a = random_instance(6, 0.4, 9).unwrap();
    let b = random_instance(6, 0.4, 9).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert!(random_instance(MAX_NODES + 1, 0.4, 0).is_err());
    assert!(random_instance(0, 0.4, 0).is_err());
}

#[test]
fn witness_is_separated() {
    let w = witness();
    assert!(w.separates());
    assert_eq!(w.lhs, 0.1875);
}
