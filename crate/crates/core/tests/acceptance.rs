//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Runs without the libtest harness so the lines always print.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use hrc_core::experiment::{run_experiment, summarize, to_csv, ExperimentKind, ExperimentSpec};
use hrc_core::generate::{
    figure2_instance, k4, petersen, random_instance, vc3_reduce, vc_to_matching, CubicGraph,
};
use hrc_core::ip::{build_ip, export_lp, matching_to_assignment, verify_assignment, Stage};
use hrc_core::model::Agent;
use hrc_core::search::{
    brute_force_oracle, find_stable, solve_212, solve_most_stable, SolveOptions, ORACLE_LIMIT,
};
use hrc_core::serialize_instance;
use hrc_core::stability::{blocking_pairs, is_stable, BlockingType, StabilityMode};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let opts = SolveOptions::default();
    for seed in 0..500 {
        let inst = tiny_instance(seed, 10);
        let sol = solve_most_stable(&inst, &opts).map_err(|e| e.to_string())?;
        let oracle =
            brute_force_oracle(&inst, StabilityMode::Def1, ORACLE_LIMIT).map_err(|e| e.to_string())?;
        ensure((sol.bp_count(), sol.size) == (oracle.bp_count(), oracle.size), || {
            format!(
                "seed {seed}: solver ({}, {}) oracle ({}, {})",
                sol.bp_count(),
                sol.size,
                oracle.bp_count(),
                oracle.size
            )
        })?;
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(300), || format!("took {t:?}"))?;
    Ok(format!("500 instances agree in {t:.2?}"))
}

fn figure5() -> Outcome {
    let inst = fig5();
    let m = fig5_matching(&inst);
    let d1 = blocking_pairs(&inst, &m, StabilityMode::Def1);
    ensure(d1.len() == 1, || format!("Def1 found {} pairs", d1.len()))?;
    let b = &d1[0];
    ensure(b.agent == Agent::Couple(0) && b.position == 0 && b.types.contains(BlockingType::ThreeD), || {
        format!("unexpected pair {}", b.describe(&inst))
    })?;
    let wa = blocking_pairs(&inst, &m, StabilityMode::WillAccept);
    ensure(wa.is_empty(), || format!("WillAccept found {} pairs", wa.len()))?;
    Ok(format!("Def1: {}; WillAccept: none", b.describe(&inst)))
}

fn parity() -> Outcome {
    let start = Instant::now();
    let opts = SolveOptions { special_cases: false, ..Default::default() };
    let mut count = 0;
    for n in 1..=6usize {
        let mut chain = vec![0usize; n];
        loop {
            if let Ok(inst) = figure2_instance(&chain) {
                let sol = solve_most_stable(&inst, &opts).map_err(|e| e.to_string())?;
                ensure(sol.optimal && sol.bp_count() == n % 2, || {
                    format!("chain {chain:?}: solver bp {}", sol.bp_count())
                })?;
                let fast = solve_212(&inst).map_err(|e| e.to_string())?;
                ensure(fast.bp_count() == sol.bp_count(), || {
                    format!("chain {chain:?}: solve_212 bp {} solver {}", fast.bp_count(), sol.bp_count())
                })?;
                count += 1;
            }
            let mut k = 0;
            while k < n && chain[k] == 2 {
                chain[k] = 0;
                k += 1;
            }
            if k == n {
                break;
            }
            chain[k] += 1;
        }
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(60), || format!("took {t:?}"))?;
    Ok(format!("{count} chains, bp = N mod 2, in {t:.2?}"))
}

fn vc3_case(name: &str, g: &CubicGraph) -> Result<String, String> {
    let mc = g.min_cover_size();
    for k in 1..=g.num_vertices() {
        let red = vc3_reduce(g, k).map_err(|e| e.to_string())?;
        let found = find_stable(&red.instance, StabilityMode::Def1).map_err(|e| e.to_string())?;
        ensure(found.is_some() == (k >= mc), || {
            format!("{name} K={k}: solvable {} with minimum cover {mc}", found.is_some())
        })?;
        if k >= mc {
            let cover: Vec<usize> = (0..k).collect();
            let m = vc_to_matching(g, &red, &cover).map_err(|e| e.to_string())?;
            ensure(is_stable(&red.instance, &m, StabilityMode::Def1), || {
                format!("{name} K={k}: cover matching not stable")
            })?;
        }
    }
    Ok(format!("{name} solvable iff K >= {mc}"))
}

fn vc3() -> Outcome {
    let start = Instant::now();
    let a = vc3_case("K4", &k4())?;
    let b = vc3_case("Petersen", &petersen())?;
    let t = start.elapsed();
    ensure(t < Duration::from_secs(600), || format!("took {t:?}"))?;
    Ok(format!("{a}; {b}; {t:.2?}"))
}

fn ip_equivalence() -> Outcome {
    for seed in 0..200 {
        let inst = tiny_instance(10_000 + seed, 9);
        let model = build_ip(&inst);
        let mut min_theta = usize::MAX;
        for m in all_matchings(&inst) {
            let a = matching_to_assignment(&inst, &m, &model).map_err(|e| e.to_string())?;
            let rep = verify_assignment(&model, &a);
            ensure(rep.feasible, || format!("seed {seed}: violated {:?}", rep.violated_tags(&model)))?;
            min_theta = min_theta.min(rep.theta_sum);
        }
        let oracle =
            brute_force_oracle(&inst, StabilityMode::Def1, ORACLE_LIMIT).map_err(|e| e.to_string())?;
        ensure(min_theta == oracle.bp_count(), || {
            format!("seed {seed}: min theta {min_theta}, oracle {}", oracle.bp_count())
        })?;
    }
    Ok("200 instances: every induced assignment feasible, min theta-sum = min bp".into())
}

fn experiment1() -> Outcome {
    let spec = ExperimentSpec { points: vec![50], ..ExperimentSpec::desk(ExperimentKind::Exp1) };
    let rows = run_experiment(&spec).map_err(|e| e.to_string())?;
    let s = &summarize(&rows)[0];
    let slowest = rows.iter().map(|r| r.time_ms).fold(0.0, f64::max);
    let frac = s.unsolvable as f64 / rows.len() as f64;
    let detail = format!(
        "{} rows, slowest {:.0} ms, max bp {}, unsolvable {:.3}, mean size {:.2}",
        rows.len(),
        slowest,
        s.max_bp,
        frac,
        s.mean_size
    );
    ensure(rows.len() == 200 && s.incomplete == 0 && slowest <= 60_000.0, || {
        format!("{detail}: incomplete")
    })?;
    ensure(s.max_bp <= 2, || detail.clone())?;
    ensure((0.02..=0.20).contains(&frac), || detail.clone())?;
    ensure((0.92 * 50.0..=0.98 * 50.0).contains(&s.mean_size), || detail.clone())?;
    Ok(detail)
}

fn determinism() -> Outcome {
    let spec = ExperimentSpec { points: vec![50], reps: 0, ..ExperimentSpec::desk(ExperimentKind::Exp1) };
    let p = spec.params_at(50);
    for rep in 0..20 {
        let seed = spec.instance_seed(50, rep);
        let a = random_instance(&p, seed).map_err(|e| e.to_string())?;
        let b = random_instance(&p, seed).map_err(|e| e.to_string())?;
        ensure(serialize_instance(&a) == serialize_instance(&b), || format!("instance {rep} differs"))?;
        let (la, lb) = (build_ip(&a), build_ip(&b));
        for stage in [Stage::MinBp, Stage::MaxSize { k: 1 }] {
            ensure(export_lp(&la, stage) == export_lp(&lb, stage), || format!("LP {rep} differs"))?;
        }
    }
    let spec =
        ExperimentSpec { points: vec![50, 70], reps: 10, ..ExperimentSpec::desk(ExperimentKind::Exp1) };
    let strip = |csv: String| -> Vec<String> {
        csv.lines()
            .map(|l| {
                l.split(',')
                    .enumerate()
                    .filter(|&(i, _)| i != 6)
                    .map(|(_, f)| f)
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect()
    };
    let a = strip(to_csv(&run_experiment(&spec).map_err(|e| e.to_string())?));
    let b = strip(to_csv(&run_experiment(&spec).map_err(|e| e.to_string())?));
    ensure(a == b, || "CSV rows differ".into())?;
    Ok(format!("20 instance files, 40 LP exports, {} CSV rows identical", a.len() - 1))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("oracle equivalence", oracle_equivalence),
        ("worked example blocking pairs", figure5),
        ("parity on chain instances", parity),
        ("VC3 solvability", vc3),
        ("IP equivalence", ip_equivalence),
        ("desk-scale Experiment 1", experiment1),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {detail}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
