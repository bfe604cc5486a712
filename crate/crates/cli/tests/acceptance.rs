//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Criteria 4 and 8 share one desk-scale suite and take a while on a
//! single core.

use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use stratinf::estimators::{type1_strata, type2_strata};
use stratinf::evaluation::choose_seed_nodes;
use stratinf::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn report(id: u32, name: &str, o: &Outcome, secs: f64) -> bool {
    println!(
        "criterion {id} [{}] {name}: {} ({:.1}s)",
        if o.pass { "PASS" } else { "FAIL" },
        o.detail,
        secs
    );
    o.pass
}

fn random_net(
    rng: &mut Xoshiro256PlusPlus,
    nodes: (usize, usize),
    edges: (usize, usize),
) -> InfluenceNetwork {
    let n = rng.gen_range(nodes.0..=nodes.1);
    let m = rng.gen_range(edges.0..=edges.1);
    let triples: Vec<_> = (0..m)
        .map(|_| {
            let p = match rng.gen_range(0..8) {
                0 => 0.0,
                1 => 1.0,
                _ => rng.gen::<f64>(),
            };
            (rng.gen_range(0..n), rng.gen_range(0..n), p)
        })
        .collect();
    InfluenceNetwork::from_triples(n, &triples).unwrap()
}

fn partition_validity() -> Outcome {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let net = random_net(&mut rng, (5, 40), (64, 200));
        let m = net.edge_count();
        let w1 = rng.gen_range(1..=12);
        let t1 = rand::seq::index::sample(&mut rng, m, w1).into_vec();
        let w2 = rng.gen_range(1..=64);
        let t2 = rand::seq::index::sample(&mut rng, m, w2).into_vec();
        let s1: f64 = type1_strata(&net, &t1).unwrap().iter().map(|s| s.pi).sum();
        let s2: f64 = type2_strata(&net, &t2).iter().map(|s| s.pi).sum();
        worst = worst.max((s1 - 1.0).abs()).max((s2 - 1.0).abs());
    }
    outcome(
        worst <= 1e-12,
        format!("100 networks, max |sum - 1| = {worst:.2e} (tol 1e-12)"),
    )
}

fn exact_equivalence() -> Outcome {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(202);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let net = random_net(&mut rng, (3, 9), (1, 12));
        let s = NodeId(rng.gen_range(0..net.node_count()));
        let truth = brute_force_exact(&net, s).unwrap();
        for r in [1, 2, 3, 5] {
            worst = worst.max((exact_dc(&net, s, r).unwrap() - truth).abs());
        }
    }
    outcome(
        worst <= 1e-9,
        format!("50 instances x r in {{1,2,3,5}}, max diff = {worst:.2e} (tol 1e-9)"),
    )
}

/// Fixed small instances with every probability strictly inside (0, 1).
fn small_instances() -> Vec<(InfluenceNetwork, NodeId)> {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(303);
    (0..5)
        .map(|_| {
            let n = rng.gen_range(5..=8);
            let m = rng.gen_range(8..=12);
            let mut triples = Vec::with_capacity(m);
            // a path out of node 0 so the seed reaches something
            for v in 1..n.min(m / 2) {
                triples.push((v - 1, v, rng.gen_range(0.05..0.95)));
            }
            while triples.len() < m {
                triples.push((
                    rng.gen_range(0..n),
                    rng.gen_range(0..n),
                    rng.gen_range(0.05..0.95),
                ));
            }
            (
                InfluenceNetwork::from_triples(n, &triples).unwrap(),
                NodeId(0),
            )
        })
        .collect()
}

fn sampling_roster(r1: usize, r2: usize) -> Vec<EstimatorConfig> {
    use EstimatorKind::*;
    let mut out = vec![EstimatorConfig::new(Nmc)];
    for kind in [Bss1, Rss1, Bss2, Rss2] {
        for strategy in [SelectionStrategy::Random, SelectionStrategy::Bfs] {
            let r = if matches!(kind, Bss1 | Rss1) { r1 } else { r2 };
            out.push(EstimatorConfig::new(kind).with_r(r).with_strategy(strategy));
        }
    }
    out
}

fn unbiasedness() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    let mut checks = 0;
    for (i, (net, s)) in small_instances().iter().enumerate() {
        let truth = brute_force_exact(net, *s).unwrap();
        // widths below m so every estimator actually splits
        for cfg in sampling_roster(3, 4) {
            let batch = run_trials(net, *s, &cfg, 200, 3030 + i as u64).unwrap();
            let se = batch.standard_error().unwrap();
            let z = if se > 0.0 {
                (batch.mean() - truth).abs() / se
            } else if (batch.mean() - truth).abs() < 1e-9 {
                0.0
            } else {
                f64::INFINITY
            };
            checks += 1;
            worst = worst.max(z);
            if z > 3.0 {
                failures.push(format!("{} on instance {i}: z = {z:.2}", cfg.label()));
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "{checks} estimator/instance pairs, 200 runs of N=1000, max |mean - exact| = {worst:.2} SE{}",
            if failures.is_empty() { String::new() } else { format!("; over 3 SE: {}", failures.join(", ")) }
        ),
    )
}

fn desk_network() -> InfluenceNetwork {
    generate_er(&GeneratorSpec {
        nodes: 500,
        density: 5.0,
        prob_law: ProbLaw::Uniform01,
        seed: 2024,
    })
    .unwrap()
}

/// Criteria 4 and 8 on one suite: same network, seeds and trials.
fn desk_scale() -> (Outcome, Outcome) {
    use EstimatorKind::*;
    let net = desk_network();
    let seeds = choose_seed_nodes(&net, 20, 17);
    // lazy worlds have the same law and save the untouched coin flips
    let cfg = |kind: EstimatorKind, r: usize| EstimatorConfig::new(kind).with_r(r).with_lazy(true);
    let configs = vec![
        cfg(Nmc, 5),
        cfg(Bss1, 5),
        cfg(Rss1, 5),
        cfg(Bss2, 50),
        cfg(Rss2, 50),
        cfg(Rss1, 1),
        cfg(Rss1, 2),
        cfg(Rss1, 3),
        cfg(Rss2, 10),
    ];
    let report = evaluate_suite(&net, &seeds, &configs, 500, 4040).unwrap();
    let rel: Vec<f64> = report
        .rows
        .iter()
        .map(|r| r.relative_variance.unwrap_or(f64::NAN))
        .collect();
    let (bss1, rss1, bss2, rss2) = (rel[1], rel[2], rel[3], rel[4]);
    let ordering =
        rss1 < bss1 && bss1 < 1.0 && rss2 < bss2 && bss2 < 1.0 && rss1 < 0.6 && rss2 < 0.6;
    let c4 = outcome(
        ordering,
        format!(
            "ER n=500 density 5, 20 seeds x 500 trials: RSS1-BFS {rss1:.4}, BSS1-BFS {bss1:.4}, \
             RSS2-BFS {rss2:.4}, BSS2-BFS {bss2:.4} (need RSS < BSS < 1 and RSS < 0.6)"
        ),
    );
    let sweep1 = [rel[5], rel[6], rel[7], rss1];
    let monotone = sweep1.windows(2).all(|w| w[1] <= w[0] * 1.1);
    let rss2_ok = rss2 <= rel[8] * 1.1;
    let c8 = outcome(
        monotone && rss2_ok,
        format!(
            "RSS1-BFS r=1,2,3,5: {:.4}, {:.4}, {:.4}, {:.4} (non-increasing, 10% slack); \
             RSS2-BFS r=10 {:.4} vs r=50 {rss2:.4}",
            sweep1[0], sweep1[1], sweep1[2], sweep1[3], rel[8]
        ),
    );
    (c4, c8)
}

fn degeneration() -> Outcome {
    let net = generate_er(&GeneratorSpec {
        nodes: 200,
        density: 4.0,
        prob_law: ProbLaw::Uniform01,
        seed: 55,
    })
    .unwrap();
    let s = choose_seed_nodes(&net, 1, 5)[0];
    let n = 200;
    let nmc = EstimatorConfig::new(EstimatorKind::Nmc).with_samples(n);
    let base = run_trials(&net, s, &nmc, 500, 5050).unwrap();
    let (bm, bv) = (base.mean(), base.variance().unwrap());
    let mut ok = true;
    let mut parts = Vec::new();
    for kind in [EstimatorKind::Rss1, EstimatorKind::Rss2] {
        for tau in [n + 1, 2 * n] {
            let cfg = EstimatorConfig::new(kind).with_samples(n).with_tau(tau);
            // independent streams, so the comparison is statistical
            let batch = run_trials(&net, s, &cfg, 500, 5151 + tau as u64).unwrap();
            let v = batch.variance().unwrap();
            let se = (bv / 500.0 + v / 500.0).sqrt();
            let z = (batch.mean() - bm).abs() / se;
            let ratio = v / bv;
            ok &= z <= 3.0 && (0.8..=1.25).contains(&ratio);
            parts.push(format!(
                "{} tau={tau}: z {z:.2}, var ratio {ratio:.3}",
                kind.name()
            ));
        }
    }
    outcome(ok, format!("N={n}, 500 trials; {}", parts.join("; ")))
}

fn mean_runtime(
    net: &InfluenceNetwork,
    seeds: &[NodeId],
    cfg: &EstimatorConfig,
    reps: usize,
) -> f64 {
    let mut total = 0.0;
    for rep in 0..reps {
        for &s in seeds {
            let c = cfg.with_seed(rep as u64 * 7919 + s.index() as u64);
            total += estimate(net, s, &c).unwrap().elapsed.as_secs_f64();
        }
    }
    total / (reps * seeds.len()) as f64
}

fn runtime_linearity() -> Outcome {
    let graph = |density: f64| {
        generate_er(&GeneratorSpec {
            nodes: 500,
            density,
            prob_law: ProbLaw::Uniform01,
            seed: 66,
        })
        .unwrap()
    };
    let (small, large) = (graph(8.0), graph(16.0));
    let seeds = choose_seed_nodes(&small, 5, 6);
    let roster = {
        let mut r = sampling_roster(5, 50);
        r.insert(
            1,
            EstimatorConfig::new(EstimatorKind::Rss1)
                .with_r(1)
                .with_strategy(SelectionStrategy::Random),
        );
        r
    };
    // warm caches and page in both graphs
    mean_runtime(&small, &seeds, &roster[0], 1);
    mean_runtime(&large, &seeds, &roster[0], 1);
    let times: Vec<(f64, f64)> = roster
        .iter()
        .map(|cfg| {
            (
                mean_runtime(&small, &seeds, cfg, 4),
                mean_runtime(&large, &seeds, cfg, 4),
            )
        })
        .collect();
    let (nmc_small, nmc_large) = times[0];
    let mut ok = true;
    let mut parts = Vec::new();
    for (cfg, &(a, b)) in roster.iter().zip(&times) {
        let growth = b / a;
        let vs_nmc = (a / nmc_small)
            .max(nmc_small / a)
            .max(b / nmc_large)
            .max(nmc_large / b);
        ok &= (1.5..=2.5).contains(&growth) && vs_nmc <= 2.0;
        parts.push(format!(
            "{}@{} x{growth:.2} (vs NMC {vs_nmc:.2})",
            cfg.label(),
            cfg.r
        ));
    }
    outcome(
        ok,
        format!(
            "n=500, m 4000 -> 8000, NMC {:.1} -> {:.1} ms; {}",
            nmc_small * 1e3,
            nmc_large * 1e3,
            parts.join(", ")
        ),
    )
}

fn cli(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_stratinf"))
        .args(args)
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).to_str().unwrap().to_owned();
    let read = |name: &str| std::fs::read(dir.path().join(name)).unwrap();
    let mut same = Vec::new();
    for tag in ["a", "b"] {
        cli(&[
            "generate",
            "--nodes",
            "80",
            "--density",
            "3",
            "--seed",
            "9",
            "-o",
            &path(&format!("g{tag}.txt")),
        ]);
    }
    same.push(("generate", read("ga.txt") == read("gb.txt")));
    let g = path("ga.txt");
    for tag in ["a", "b"] {
        cli(&[
            "evaluate",
            "-i",
            &g,
            "--trials",
            "5",
            "--seed-nodes",
            "4",
            "--samples",
            "100",
            "--master-seed",
            "12",
            "--out-csv",
            &path(&format!("r{tag}.csv")),
            "--out-json",
            &path(&format!("r{tag}.json")),
        ]);
    }
    same.push(("evaluate csv", read("ra.csv") == read("rb.csv")));
    same.push(("evaluate json", read("ra.json") == read("rb.json")));
    let exact = path("small.txt");
    std::fs::write(&exact, "0 1 0.3\n1 2 0.6\n0 2 0.45\n2 3 0.8\n3 0 0.5\n").unwrap();
    let e = |_: ()| {
        cli(&[
            "exact", "-i", &exact, "-s", "0", "--method", "dc", "--r", "2",
        ])
    };
    same.push(("exact", e(()) == e(())));
    let est = |_: ()| {
        let out = cli(&[
            "estimate", "-i", &g, "-s", "3", "-e", "rss2", "--r", "10", "--seed", "5",
        ]);
        // the wall-clock line is the only varying part of the printout
        String::from_utf8(out)
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with("elapsed_s"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    same.push(("estimate", est(()) == est(())));
    let ok = same.iter().all(|(_, s)| *s);
    let detail = same
        .iter()
        .map(|(n, s)| format!("{n} {}", if *s { "identical" } else { "DIFFERS" }))
        .collect::<Vec<_>>();
    outcome(ok, detail.join(", "))
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed().as_secs_f64())
}

fn main() {
    let mut all = true;
    let (o, secs) = timed(partition_validity);
    all &= report(1, "partition validity", &o, secs);
    let (o, secs) = timed(exact_equivalence);
    all &= report(2, "exact-oracle equivalence", &o, secs);
    let (o, secs) = timed(unbiasedness);
    all &= report(3, "unbiasedness", &o, secs);
    let ((c4, c8), desk_secs) = timed(desk_scale);
    all &= report(4, "variance ordering at desk scale", &c4, desk_secs);
    let (o, secs) = timed(degeneration);
    all &= report(5, "degeneration law", &o, secs);
    let (o, secs) = timed(runtime_linearity);
    all &= report(6, "runtime linearity", &o, secs);
    let (o, secs) = timed(determinism);
    all &= report(7, "determinism", &o, secs);
    all &= report(
        8,
        "r-sweep shape (same suite as criterion 4)",
        &c8,
        desk_secs,
    );
    if !all {
        std::process::exit(1);
    }
}
