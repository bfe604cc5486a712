use stratinf::evaluation::choose_seed_nodes;
use stratinf::*;

fn coin() -> InfluenceNetwork {
    InfluenceNetwork::from_triples(2, &[(0, 1, 0.5)]).unwrap()
}

#[test]
fn nmc_variance_matches_bernoulli_law() {
    // f is a fair coin, so Var = 0.25 / N
    let net = coin();
    let cfg = EstimatorConfig::new(EstimatorKind::Nmc).with_samples(100);
    let batch = run_trials(&net, NodeId(0), &cfg, 500, 4).unwrap();
    let v = batch.variance().unwrap();
    assert!((v / 0.0025 - 1.0).abs() < 0.2, "{v}");
    assert!((batch.mean() - 0.5).abs() < 4.0 * batch.standard_error().unwrap());
}

#[test]
fn trial_batches_are_reproducible() {
    let net = generate_er(&GeneratorSpec {
        nodes: 30,
        density: 3.0,
        prob_law: ProbLaw::Uniform01,
        seed: 1,
    })
    .unwrap();
    let cfg = EstimatorConfig::new(EstimatorKind::Rss2).with_r(6);
    let a = run_trials(&net, NodeId(3), &cfg, 20, 9).unwrap();
    let b = run_trials(&net, NodeId(3), &cfg, 20, 9).unwrap();
    assert_eq!(a.estimates, b.estimates);
    let c = run_trials(&net, NodeId(3), &cfg, 20, 10).unwrap();
    assert_ne!(a.estimates, c.estimates);
}

#[test]
fn suite_adds_baseline_and_aggregates_per_seed() {
    let net = generate_er(&GeneratorSpec {
        nodes: 40,
        density: 3.0,
        prob_law: ProbLaw::Uniform01,
        seed: 2,
    })
    .unwrap();
    let seeds = choose_seed_nodes(&net, 4, 5);
    let cfg = EstimatorConfig::new(EstimatorKind::Bss1).with_samples(50);
    let report = evaluate_suite(&net, &seeds, &[cfg, cfg], 30, 3).unwrap();
    assert!(report.baseline_added);
    assert_eq!(report.rows.len(), 3);
    assert_eq!(report.rows[0].estimator, "NMC");
    assert_eq!(report.rows[0].samples, 50);
    // identical configurations share seeds and therefore results
    assert_eq!(report.rows[1].mean, report.rows[2].mean);
    assert_eq!(
        report.rows[1].relative_variance,
        report.rows[2].relative_variance
    );
    for row in &report.rows {
        let n = row.per_seed.len() as f64;
        let mean = row.per_seed.iter().map(|s| s.mean).sum::<f64>() / n;
        assert!((row.mean - mean).abs() < 1e-12);
        let rel: Vec<f64> = row
            .per_seed
            .iter()
            .filter_map(|s| s.relative_variance)
            .collect();
        let avg = rel.iter().sum::<f64>() / rel.len() as f64;
        assert!((row.relative_variance.unwrap() - avg).abs() < 1e-12);
    }
    assert_eq!(report.rows[0].relative_variance, Some(1.0));
}

#[test]
fn zero_variance_baseline_leaves_ratio_undefined() {
    let net = InfluenceNetwork::from_triples(3, &[(0, 1, 1.0), (1, 2, 0.5)]).unwrap();
    let report = evaluate_suite(
        &net,
        &[NodeId(1), NodeId(2)],
        &[EstimatorConfig::new(EstimatorKind::Nmc).with_samples(10)],
        20,
        0,
    )
    .unwrap();
    let row = &report.rows[0];
    // node 2 has no out-edges, so every estimate is 0
    assert_eq!(row.per_seed[1].relative_variance, None);
    assert_eq!(row.relative_variance, Some(1.0));
}

#[test]
fn csv_without_timing_is_deterministic() {
    let net = generate_er(&GeneratorSpec {
        nodes: 30,
        density: 2.0,
        prob_law: ProbLaw::Uniform01,
        seed: 4,
    })
    .unwrap();
    let seeds = choose_seed_nodes(&net, 3, 1);
    let cfgs = [
        EstimatorConfig::new(EstimatorKind::Nmc).with_samples(40),
        EstimatorConfig::new(EstimatorKind::Rss1).with_samples(40),
    ];
    let render = || {
        let mut report = evaluate_suite(&net, &seeds, &cfgs, 10, 8).unwrap();
        report.strip_timing();
        let mut csv = Vec::new();
        report.write_csv(&mut csv).unwrap();
        let mut json = Vec::new();
        report.write_json(&mut json).unwrap();
        (String::from_utf8(csv).unwrap(), json)
    };
    let (a, ja) = render();
    let (b, jb) = render();
    assert_eq!(a, b);
    assert_eq!(ja, jb);
    let header = a.lines().next().unwrap();
    assert_eq!(
        header,
        "estimator,r,tau,N,seed_count,trials,mean,variance,relative_variance,mean_time_s"
    );
    assert!(a.lines().nth(1).unwrap().starts_with("NMC,,,40,3,10,"));
    assert!(a.lines().nth(1).unwrap().ends_with(','));
}

#[test]
fn too_few_trials_is_an_error() {
    let cfg = EstimatorConfig::new(EstimatorKind::Nmc);
    assert!(matches!(
        run_trials(&coin(), NodeId(0), &cfg, 1, 0),
        Err(Error::TooFewTrials(1))
    ));
    assert!(matches!(
        evaluate_suite(&coin(), &[], &[cfg], 5, 0),
        Err(Error::EmptySeedSet)
    ));
}
