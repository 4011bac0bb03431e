//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use flowmob::analytical::{
    avg_hop_delay, cost_for_link_changes, overhead, packet_service_delay, signaling_cost,
    ModelParams,
};
use flowmob::experiment::{render_experiment, ExperimentConfig, ExperimentKind};
use flowmob::hnbp::{generate_hnbp, verify_prefix, HnbpMode};
use flowmob::prefix::Prefix;
use flowmob::scenario::{example_prefix, run_scenario, ScenarioCase, ScenarioSpec};
use flowmob::sim::{run_campaign, SimConfig};
use flowmob::technique::{Environment, Technique};
use flowmob::topology::Topology;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, &'static str, Option<u64>, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Check) -> (Check, Duration) {
    let start = Instant::now();
    let mut out = f();
    let took = start.elapsed();
    if let (Some(limit), Ok(_)) = (limit, &out) {
        if took > limit {
            out = Err(format!("took {took:.2?}, limit {limit:?}"));
        }
    }
    (out, took)
}

fn criterion_1_formula_regression() -> Check {
    let tp = Topology::default();
    let expected = [
        (Technique::ActiveDiff, 10.0),
        (Technique::NotactiveCom, 104.0 / 12.0),
        (Technique::NotactiveDiff, 9.0),
        (Technique::NotactiveComBlock, 8.0),
        (Technique::NotactiveDiffBlock, 8.0),
    ];
    for (t, want) in expected {
        let got = avg_hop_delay(t, &tp);
        ensure((got - want).abs() <= 1e-9, || {
            format!("{t}: {got} != {want}")
        })?;
    }
    Ok("five single-LMA hop delays within 1e-9".into())
}

fn criterion_2_overhead_ordering() -> Check {
    let tp = Topology::default();
    let oh = |t| overhead(t, &tp, 0.0);
    for (t, want) in [
        (Technique::NotactiveComBlock, 404.0),
        (Technique::NotactiveDiffBlock, 404.0),
        (Technique::ActiveDiff, 448.0),
        (Technique::NotactiveCom, 788.0),
        (Technique::NotactiveDiff, 1236.0),
    ] {
        ensure(oh(t) == want, || format!("OH {t} = {} != {want}", oh(t)))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let tp = Topology {
            n_mn_mag: rng.random_range(1..=8),
            n_mag_lma: rng.random_range(1..=8),
            n_mag_mag: rng.random_range(1..=8),
            n_lma_lma: rng.random_range(1..=8),
            ..Topology::default()
        };
        let p_f = rng.random_range(0.0..0.99);
        let com = overhead(Technique::NotactiveComBlock, &tp, p_f);
        let diff = overhead(Technique::NotactiveDiffBlock, &tp, p_f);
        ensure(com == diff, || format!("{tp:?} p_f={p_f}: {com} != {diff}"))?;
    }
    Ok("404 < 448 < 788 < 1236; block equality on 100 random draws".into())
}

fn criterion_3_crossover() -> Check {
    let blocks = [
        Technique::NotactiveComBlock,
        Technique::NotactiveDiffBlock,
        Technique::Notactive1MagBlock,
        Technique::Notactive2MagBlock,
    ];
    for t_mr in [10.0, 18.0, 26.0] {
        let tp = Topology {
            t_mr,
            t_ra: 2.0,
            t_am: 20.0,
            ..Topology::default()
        };
        let active = avg_hop_delay(Technique::ActiveDiff, &tp);
        ensure((active - 10.0).abs() < 1e-12, || {
            format!("active_diff {active}")
        })?;
        for b in blocks {
            let d = avg_hop_delay(b, &tp);
            let ok = match t_mr {
                x if x < 18.0 => d < active,
                x if x > 18.0 => d > active,
                _ => (d - active).abs() < 1e-9,
            };
            ensure(ok, || {
                format!("t_mr={t_mr}: {b} {d} vs active_diff {active}")
            })?;
        }
    }
    Ok("block below 10 ms/hop at t_mr=10, equal at 18, above at 26".into())
}

fn sweep(start: f64, stop: f64, steps: usize) -> Vec<f64> {
    (0..steps)
        .map(|i| start + (stop - start) * i as f64 / (steps - 1) as f64)
        .collect()
}

fn strictly(values: &[f64], increasing: bool) -> bool {
    values
        .windows(2)
        .all(|w| if increasing { w[1] > w[0] } else { w[1] < w[0] })
}

fn criterion_4_monotonicity() -> Check {
    let tp = Topology::default();
    let mut failures = Vec::new();
    for t in Technique::ALL {
        let by_smr: Vec<f64> = sweep(0.1, 2.0, 20)
            .into_iter()
            .map(|s| {
                let p = ModelParams {
                    lambda_s: s,
                    ..ModelParams::default()
                };
                signaling_cost(t, &tp, &p).expect("valid")
            })
            .collect();
        if !strictly(&by_smr, false) {
            failures.push(format!("{t}: cost not strictly decreasing in SMR"));
        }
        let by_pf: Vec<f64> = sweep(0.0, 0.9, 10)
            .into_iter()
            .map(|p_f| {
                let p = ModelParams {
                    p_f,
                    ..ModelParams::default()
                };
                signaling_cost(t, &tp, &p).expect("valid")
            })
            .collect();
        if !strictly(&by_pf, true) {
            failures.push(format!(
                "{t}: cost not strictly increasing in p_f ({} .. {})",
                by_pf[0],
                by_pf[by_pf.len() - 1]
            ));
        }
        let by_nl: Vec<f64> = (1..=10)
            .map(|n_l| {
                let p = ModelParams {
                    n_l,
                    ..ModelParams::default()
                };
                cost_for_link_changes(t, &tp, &p)
            })
            .collect();
        if !strictly(&by_nl, true) {
            failures.push(format!("{t}: cost not strictly increasing in link changes"));
        }
    }
    // Curve separation: block curves sit below every non-block power-on curve.
    for env in [Environment::SingleLma, Environment::MultiLma] {
        for s in sweep(0.1, 2.0, 20) {
            let p = ModelParams {
                lambda_s: s,
                ..ModelParams::default()
            };
            let cost = |t| signaling_cost(t, &tp, &p).expect("valid");
            let techs: Vec<Technique> = Technique::in_environment(env).collect();
            for b in techs.iter().filter(|t| t.is_block()) {
                for n in techs.iter().filter(|t| t.is_power_on() && !t.is_block()) {
                    if cost(*b) >= cost(*n) {
                        failures.push(format!("smr={s}: {b} not below {n}"));
                    }
                }
            }
        }
    }
    if failures.is_empty() {
        Ok("SMR, p_f and link-change monotonicity for all ten techniques".into())
    } else {
        Err(failures.join("; "))
    }
}

fn criterion_5_golden_traces() -> Check {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let tp = Topology::default();
    for case in ScenarioCase::ALL {
        let path = dir.join(format!("{case}.csv"));
        let golden =
            std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        let run = run_scenario(&ScenarioSpec::canonical(case), &tp).map_err(|e| e.to_string())?;
        ensure(run.trace.to_csv() == golden, || {
            format!("{case}: trace differs from golden")
        })?;
    }
    Ok("twelve traces byte-identical to goldens".into())
}

fn criterion_6_sim_agreement() -> Check {
    let tp = Topology::default();
    let d_p = packet_service_delay(100.0, 150.0).expect("stable") * 1e3;
    let mut worst: f64 = 0.0;
    for t in Technique::ALL {
        let cfg = SimConfig {
            seed: 6,
            ..SimConfig::new(t)
        };
        let r = run_campaign(&cfg).map_err(|e| e.to_string())?;
        let want = avg_hop_delay(t, &tp) + d_p;
        let rel = (r.mean_hop_delay - want).abs() / want;
        worst = worst.max(rel);
        ensure(rel <= 0.05, || {
            format!(
                "{t}: hop delay {:.3} vs analytical {want:.3}",
                r.mean_hop_delay
            )
        })?;
    }
    let sweep_reps = 200;
    for t in Technique::ALL {
        let latency = |k_ratio: f64, lambda: f64| {
            let cfg = SimConfig {
                seed: 6,
                replications: sweep_reps,
                density_ratio: k_ratio,
                arrival_rate: lambda,
                ..SimConfig::new(t)
            };
            run_campaign(&cfg)
                .map(|r| r.mean_handover_latency)
                .map_err(|e| e.to_string())
        };
        let by_k = sweep(0.1, 0.9, 9)
            .into_iter()
            .map(|k| latency(k, 100.0))
            .collect::<Result<Vec<_>, _>>()?;
        ensure(strictly(&by_k, true), || {
            format!("{t}: latency not increasing in k_ratio {by_k:?}")
        })?;
        let by_lambda = sweep(20.0, 140.0, 7)
            .into_iter()
            .map(|l| latency(0.0, l))
            .collect::<Result<Vec<_>, _>>()?;
        ensure(strictly(&by_lambda, true), || {
            format!("{t}: latency not increasing in lambda {by_lambda:?}")
        })?;
    }
    Ok(format!(
        "hop delay within {:.2}% of analytical; monotone in k_ratio and lambda",
        worst * 100.0
    ))
}

fn criterion_7_determinism() -> Check {
    let csv = |workers: usize| {
        let mut cfg = ExperimentConfig::new(ExperimentKind::SimLatencyVsDensity);
        cfg.environment = Some(Environment::SingleLma);
        cfg.replications = 100;
        cfg.arrivals_per_run = 2000;
        cfg.seed = 99;
        cfg.workers = Some(workers);
        render_experiment(&cfg)
            .map(|(s, _)| s)
            .map_err(|e| e.to_string())
    };
    let one = csv(1)?;
    ensure(one == csv(1)?, || "rerun differs".into())?;
    ensure(one == csv(4)?, || "4 workers differ from 1".into())?;
    let cfg = SimConfig {
        seed: 11,
        ..SimConfig::new(Technique::Notactive2Mag)
    };
    let a = run_campaign(&SimConfig {
        workers: Some(1),
        ..cfg.clone()
    })
    .map_err(|e| e.to_string())?;
    let b = run_campaign(&SimConfig {
        workers: Some(3),
        ..cfg
    })
    .map_err(|e| e.to_string())?;
    ensure(a == b, || "campaign differs across worker counts".into())?;
    Ok("CSV and SimResult bit-identical across reruns and 1/3/4 workers".into())
}

fn criterion_8_hnbp() -> Check {
    let universe: Vec<Prefix> = (1..=4).map(example_prefix).collect();
    let outsider = example_prefix(9);
    for mask in 1u32..16 {
        let subset: Vec<Prefix> = (0..4)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| universe[i])
            .collect();
        let h = generate_hnbp(&subset, HnbpMode::ExactSet).map_err(|e| e.to_string())?;
        for p in universe.iter().chain([&outsider]) {
            let got = verify_prefix(&h, p).map_err(|e| e.to_string())?;
            ensure(got == subset.contains(p), || {
                format!("subset {mask:04b}: {p} -> {got}")
            })?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..1000 {
        let len = rng.random_range(1..=128u8);
        let n = rng.random_range(1..=8);
        let set: Vec<Prefix> = (0..n)
            .map(|_| Prefix::new(rng.random(), len).expect("valid length"))
            .collect();
        let h = generate_hnbp(&set, HnbpMode::OrMask).map_err(|e| e.to_string())?;
        for p in &set {
            ensure(verify_prefix(&h, p) == Ok(true), || {
                format!("OR-mask rejected member {p}")
            })?;
        }
    }
    let pair = [example_prefix(1), example_prefix(2)];
    let ghost = example_prefix(3);
    let or = generate_hnbp(&pair, HnbpMode::OrMask).map_err(|e| e.to_string())?;
    let exact = generate_hnbp(&pair, HnbpMode::ExactSet).map_err(|e| e.to_string())?;
    ensure(verify_prefix(&or, &ghost) == Ok(true), || {
        "OR-mask did not admit 2001:db8:3::/48".into()
    })?;
    ensure(verify_prefix(&exact, &ghost) == Ok(false), || {
        "exact set admitted a non-member".into()
    })?;
    Ok(
        "exact set exhaustive on 15 subsets; OR-mask complete on 1000 sets; false positive shown"
            .into(),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (
            "1",
            "formula regression",
            Some(1),
            criterion_1_formula_regression,
        ),
        (
            "2",
            "overhead ordering",
            None,
            criterion_2_overhead_ordering,
        ),
        (
            "3",
            "crossover at t_mr = 18 ms",
            None,
            criterion_3_crossover,
        ),
        (
            "4",
            "signaling cost monotonicity",
            None,
            criterion_4_monotonicity,
        ),
        (
            "5",
            "scenario golden traces",
            Some(1),
            criterion_5_golden_traces,
        ),
        (
            "6",
            "simulation vs analytics",
            Some(60),
            criterion_6_sim_agreement,
        ),
        ("7", "determinism", None, criterion_7_determinism),
        ("8", "HNBP properties", None, criterion_8_hnbp),
    ];
    let mut failed = 0;
    for (id, name, limit, f) in criteria {
        let (out, took) = timed(limit.map(Duration::from_secs), f);
        match out {
            Ok(detail) => println!("criterion {id} PASS {name} ({took:.2?}): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id} FAIL {name} ({took:.2?}): {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
