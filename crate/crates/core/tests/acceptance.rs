//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any criterion fails.

mod common;

use std::process::{Command, ExitCode};
use std::time::Instant;

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{brute_bases, brute_convex, brute_ssc, chain_weight, direct_cost, hamming};
use polynash::best_response::{
    extend_best_response, ordered_greedy, ordered_greedy_steps, repair_best_response,
};
use polynash::game::{check_ssc, CostTable, Player};
use polynash::generators::{
    gen_random, gen_random_matroid, gen_random_singleton, gen_singleton, random_convex_table,
    random_rank, resource_names, CostFamily, MatroidKind,
};
use polynash::io::{replay_trace, write_instance, write_profile, write_trace};
use polynash::oracle::{verify_pne, OracleCaps};
use polynash::solver::{
    compute_pne, inner_iteration_bound, iteration_bound, PlayerSelection, SolverPolicy,
};
use polynash::{GameInstance, Ideal, RankFunction, WeightedGround};

type Outcome = Result<String, String>;

fn random_chains(rng: &mut impl Rng, lens: &[u64]) -> Vec<Vec<u64>> {
    lens.iter()
        .map(|&len| {
            let mut w: Vec<u64> = (0..len).map(|_| rng.gen_range(0..=20)).collect();
            w.sort_unstable();
            w
        })
        .collect()
}

fn singletons(f: &RankFunction) -> Vec<u64> {
    (0..f.resources()).map(|r| f.singleton(r)).collect()
}

/// Criteria 1, 5 and 6 share one batch of solves.
struct SolveStats {
    sound: Outcome,
    potential: Outcome,
    bounds: Outcome,
}

fn solve_batch() -> SolveStats {
    const INSTANCES: u64 = 600;
    let caps = OracleCaps::default();
    let (mut sound_fail, mut pot_fail, mut bound_fail) = (Vec::new(), Vec::new(), Vec::new());
    let (mut moves, mut max_inner, mut solves) = (0u64, 0u64, 0u64);
    for seed in 0..INSTANCES {
        let n = 1 + (seed % 3) as usize;
        let m = 1 + ((seed / 3) % 4) as usize;
        let g = match gen_random(seed, n, m, 3, CostFamily::ConvexNondecreasing) {
            Ok(g) => g,
            Err(e) => {
                sound_fail.push(format!("seed {seed}: generation failed: {e}"));
                continue;
            }
        };
        for selection in [
            PlayerSelection::MinIndex,
            PlayerSelection::RoundRobin,
            PlayerSelection::SeededRandom { seed },
        ] {
            solves += 1;
            let policy = SolverPolicy {
                selection,
                ..SolverPolicy::default()
            }
            .with_debug();
            let sol = match compute_pne(&g, &policy) {
                Ok(s) => s,
                Err(e) => {
                    let msg = format!("seed {seed}, {selection:?}: {e}");
                    sound_fail.push(msg.clone());
                    pot_fail.push(msg);
                    continue;
                }
            };
            match verify_pne(&g, &sol.profile, &caps) {
                Ok(r) if r.is_pne => {}
                Ok(r) => sound_fail.push(format!("seed {seed}: {} violations", r.violations.len())),
                Err(e) => sound_fail.push(format!("seed {seed}: {e}")),
            }
            if let Err(e) = replay_trace(&g, &sol.trace) {
                pot_fail.push(format!("seed {seed}: {e}"));
            }
            let inner_cap = inner_iteration_bound(&g);
            if let Some(k) = sol
                .trace
                .inner_counts
                .iter()
                .position(|&c| BigUint::from(c) > inner_cap)
            {
                bound_fail.push(format!("seed {seed}: outer {} exceeds {inner_cap}", k + 1));
            }
            if BigUint::from(sol.trace.total_moves()) > iteration_bound(&g) {
                bound_fail.push(format!(
                    "seed {seed}: total exceeds {}",
                    iteration_bound(&g)
                ));
            }
            moves += sol.trace.total_moves();
            max_inner = max_inner.max(sol.trace.inner_counts.iter().copied().max().unwrap_or(0));
        }
    }
    let verdict = |fails: Vec<String>, ok: String| {
        if fails.is_empty() {
            Ok(ok)
        } else {
            Err(format!("{} failures, first: {}", fails.len(), fails[0]))
        }
    };
    SolveStats {
        sound: verdict(sound_fail, format!("{INSTANCES} instances, {solves} solves over 3 policies, all verified by brute force")),
        potential: verdict(
            pot_fail,
            format!("{moves} improvement moves, each strictly decreasing (checked in-solver and by replay)"),
        ),
        bounds: verdict(
            bound_fail,
            format!("largest inner count {max_inner}, {moves} moves in total, all within bounds"),
        ),
    }
}

fn greedy_equivalence() -> Outcome {
    const CASES: u64 = 1200;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut prefixes = 0u64;
    for case in 0..CASES {
        let m = rng.gen_range(1..=4);
        let f = random_rank(&mut rng, m, 6).map_err(|e| format!("case {case}: {e}"))?;
        let d = rng.gen_range(0..=f.total());
        let chains = random_chains(&mut rng, &singletons(&f));
        let w = WeightedGround::new(chains.clone()).map_err(|e| e.to_string())?;
        let steps = ordered_greedy_steps(&f, d, &w).map_err(|e| format!("case {case}: {e}"))?;
        let greedy = ordered_greedy(&f, d, &w).map_err(|e| format!("case {case}: {e}"))?;
        let listed: Vec<Vec<u64>> = f
            .enumerate_base(d, 1_000_000)
            .map_err(|e| e.to_string())?
            .into_iter()
            .map(|x| x.0)
            .collect();
        if listed != brute_bases(&f, d) {
            return Err(format!(
                "case {case}: enumerate_base disagrees with brute force"
            ));
        }
        let best = listed.iter().map(|x| chain_weight(&chains, x)).min();
        if !listed.contains(&greedy.0) || Some(chain_weight(&chains, &greedy.0)) != best {
            return Err(format!(
                "case {case}: greedy {:?} is not a minimum of F({d})",
                greedy.0
            ));
        }
        let mut prefix = vec![0u64; m];
        for (k, e) in steps.iter().enumerate() {
            prefix[e.resource] += 1;
            let bases = brute_bases(&f, k as u64 + 1);
            let best = bases.iter().map(|x| chain_weight(&chains, x)).min();
            if !bases.contains(&prefix) || Some(chain_weight(&chains, &prefix)) != best {
                return Err(format!(
                    "case {case}: prefix {prefix:?} is not a minimum of F({})",
                    k + 1
                ));
            }
            prefixes += 1;
        }
    }
    Ok(format!("{CASES} triples, {prefixes} prefixes, all minimal"))
}

/// Random instance plus opponent loads that keep every evaluation inside the
/// cost tables.
fn random_context(rng: &mut ChaCha8Rng, seed: u64) -> Option<(GameInstance, usize, Vec<u64>)> {
    let n = rng.gen_range(1..=3);
    let m = rng.gen_range(1..=4);
    let family = if rng.gen_bool(0.5) {
        CostFamily::ConvexNondecreasing
    } else {
        CostFamily::TruncatedSsc
    };
    let g = gen_random(seed, n, m, 3, family).ok()?;
    let i = rng.gen_range(0..n);
    let room = g.total_demand() - g.player(i).demand;
    let a = (0..m).map(|_| rng.gen_range(0..=room)).collect();
    Some((g, i, a))
}

fn extension_property() -> Outcome {
    const CASES: u64 = 600;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut done = 0u64;
    let mut seed = 10_000u64;
    while done < CASES {
        seed += 1;
        let Some((g, i, a)) = random_context(&mut rng, seed) else {
            continue;
        };
        let p: &Player = g.player(i);
        if p.demand == 0 {
            continue;
        }
        let d = rng.gen_range(0..p.demand);
        let w = g.induced_weights(i, &a).map_err(|e| e.to_string())?;
        let cost = |y: &[u64]| direct_cost(&p.costs, &a, y);
        let level = brute_bases(&p.rank, d);
        let best = level.iter().map(|y| cost(y)).min().unwrap();
        let optima: Vec<&Vec<u64>> = level.iter().filter(|y| cost(y) == best).collect();
        let x = Ideal((*optima.choose(&mut rng).unwrap()).clone());
        let y = extend_best_response(&p.rank, &w, &x).map_err(|e| format!("seed {seed}: {e}"))?;
        let next = brute_bases(&p.rank, d + 1);
        let best_next = next.iter().map(|z| cost(z)).min().unwrap();
        if !next.contains(&y.0) || cost(&y.0) != best_next {
            return Err(format!(
                "seed {seed}: extension {:?} of {:?} is not optimal",
                y.0, x.0
            ));
        }
        if hamming(&x.0, &y.0) != 1 {
            return Err(format!("seed {seed}: extension moved more than one unit"));
        }
        done += 1;
    }
    Ok(format!("{CASES} extensions optimal at distance 1"))
}

fn repair_property() -> Outcome {
    const CASES: u64 = 600;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut moved, mut kept) = (0u64, 0u64);
    let mut case = 0u64;
    while moved + kept < CASES {
        case += 1;
        let m = rng.gen_range(1..=4);
        let f = random_rank(&mut rng, m, 6).map_err(|e| e.to_string())?;
        let d = rng.gen_range(0..=f.total());
        // Every chain gets one spare element; the shifted chain is drawn from
        // the support of the chosen optimum so that most cases can move.
        let lens: Vec<u64> = singletons(&f).iter().map(|l| l + 1).collect();
        let old = random_chains(&mut rng, &lens);
        let level = brute_bases(&f, d);
        let best_old = level.iter().map(|x| chain_weight(&old, x)).min().unwrap();
        let optima: Vec<&Vec<u64>> = level
            .iter()
            .filter(|x| chain_weight(&old, x) == best_old)
            .collect();
        let x = Ideal((*optima.choose(&mut rng).unwrap()).clone());
        let support: Vec<usize> = (0..m).filter(|&r| x.0[r] > 0).collect();
        let shifted = match support.choose(&mut rng) {
            Some(&r) if rng.gen_bool(0.9) => r,
            _ => rng.gen_range(0..m),
        };
        let mut new = old.clone();
        new[shifted].remove(0);
        let wo = WeightedGround::new(old).map_err(|e| e.to_string())?;
        let wn = WeightedGround::new(new.clone()).map_err(|e| e.to_string())?;
        let rep = repair_best_response(&f, &x, shifted, &wo, &wn, true)
            .map_err(|e| format!("case {case}: {e}"))?;
        let best_new = level.iter().map(|y| chain_weight(&new, y)).min().unwrap();
        if !level.contains(&rep.ideal.0) || chain_weight(&new, &rep.ideal.0) != best_new {
            return Err(format!(
                "case {case}: repair {:?} is not optimal",
                rep.ideal.0
            ));
        }
        match hamming(&x.0, &rep.ideal.0) {
            0 => kept += 1,
            2 => moved += 1,
            h => return Err(format!("case {case}: repair at distance {h}")),
        }
    }
    Ok(format!(
        "{CASES} shifts: {moved} repaired by one exchange, {kept} already optimal"
    ))
}

fn semi_convexity() -> Outcome {
    const TABLES: u64 = 250;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in 0..TABLES {
        let len = rng.gen_range(2..=12);
        let c = random_convex_table(&mut rng, len, 100);
        let horizon = len as u64 - 1;
        if !brute_convex(c.values()) {
            return Err(format!("table {k} is not convex"));
        }
        if !check_ssc(&c, horizon).map_err(|e| e.to_string())?
            || !brute_ssc(c.values(), horizon, horizon)
        {
            return Err(format!("convex table {:?} fails the check", c.values()));
        }
    }
    let c4 = CostTable::new(vec![0, 4, 8, 11, 15, 19]).map_err(|e| e.to_string())?;
    let passes = check_ssc(&c4, 5).map_err(|e| e.to_string())? && brute_ssc(c4.values(), 5, 5);
    if !passes || c4.is_convex() || brute_convex(c4.values()) {
        return Err("scaled counterexample misclassified".into());
    }
    Ok(format!(
        "{TABLES} convex tables pass; [0,4,8,11,15,19] passes and is not convex"
    ))
}

fn special_cases() -> Outcome {
    let caps = OracleCaps::default();
    let policy = SolverPolicy::default().with_debug();
    let check = |g: &GameInstance, label: &str| -> Result<(), String> {
        let sol = compute_pne(g, &policy).map_err(|e| format!("{label}: {e}"))?;
        let report = verify_pne(g, &sol.profile, &caps).map_err(|e| format!("{label}: {e}"))?;
        if report.is_pne {
            Ok(())
        } else {
            Err(format!("{label}: not an equilibrium"))
        }
    };
    // Two players splitting one unit each over two identical linear resources.
    let linear = CostTable::from_fn(3, |k| k).map_err(|e| e.to_string())?;
    let tables = vec![
        vec![linear.clone(), linear.clone()],
        vec![linear.clone(), linear],
    ];
    let g = gen_singleton(resource_names(2), &[0b11, 0b11], &[1, 1], tables)
        .map_err(|e| e.to_string())?;
    check(&g, "two-player example")?;
    let mut solved = 1;
    for seed in 0..150 {
        let g = gen_random_singleton(seed, 1 + (seed % 3) as usize, 1 + (seed % 4) as usize, 3)
            .map_err(|e| e.to_string())?;
        check(&g, &format!("singleton seed {seed}"))?;
        solved += 1;
    }
    let mut nonconvex = 0;
    for kind in [
        MatroidKind::Uniform,
        MatroidKind::Partition,
        MatroidKind::Graphic,
    ] {
        for seed in 0..80 {
            let g =
                gen_random_matroid(seed, 1 + (seed % 3) as usize, 1 + (seed % 4) as usize, kind)
                    .map_err(|e| e.to_string())?;
            if g.players()
                .iter()
                .any(|p| p.costs.iter().any(|c| !c.is_convex()))
            {
                nonconvex += 1;
            }
            check(&g, &format!("{kind:?} matroid seed {seed}"))?;
            solved += 1;
        }
    }
    Ok(format!(
        "{solved} singleton and matroid games verified ({nonconvex} with non-convex costs)"
    ))
}

fn determinism() -> Outcome {
    let policies = [
        PlayerSelection::MinIndex,
        PlayerSelection::RoundRobin,
        PlayerSelection::SeededRandom { seed: 9 },
    ];
    for seed in 0..50 {
        let g = gen_random(seed, 3, 4, 3, CostFamily::ConvexNondecreasing)
            .map_err(|e| e.to_string())?;
        if write_instance(&g)
            != write_instance(&gen_random(seed, 3, 4, 3, CostFamily::ConvexNondecreasing).unwrap())
        {
            return Err(format!("seed {seed}: generator output differs"));
        }
        for selection in policies {
            let policy = SolverPolicy {
                selection,
                ..SolverPolicy::default()
            };
            let render = || -> Result<(String, String), String> {
                let s = compute_pne(&g, &policy).map_err(|e| e.to_string())?;
                Ok((
                    write_profile(&g, &s.profile).map_err(|e| e.to_string())?,
                    write_trace(&g, &s.trace),
                ))
            };
            if render()? != render()? {
                return Err(format!("seed {seed}: {selection:?} output differs"));
            }
        }
    }
    // Same check through the binary, byte for byte.
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bin = env!("CARGO_BIN_EXE_polynash");
    let run = |args: &[&str]| -> Result<(), String> {
        let status = Command::new(bin)
            .args(args)
            .status()
            .map_err(|e| e.to_string())?;
        status
            .success()
            .then_some(())
            .ok_or(format!("polynash {args:?} failed"))
    };
    let path = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let mut outputs = Vec::new();
    for k in 0..2 {
        let (inst, prof, tr) = (
            path(&format!("i{k}.json")),
            path(&format!("p{k}.json")),
            path(&format!("t{k}.jsonl")),
        );
        run(&[
            "gen",
            "--kind",
            "random",
            "--players",
            "3",
            "--resources",
            "4",
            "--seed",
            "77",
            "--output",
            &inst,
        ])?;
        run(&[
            "solve",
            "--instance",
            &inst,
            "--policy",
            "random",
            "--seed",
            "5",
            "--trace",
            &tr,
            "--output",
            &prof,
        ])?;
        let read = |p: &str| std::fs::read(p).map_err(|e| e.to_string());
        outputs.push((read(&inst)?, read(&prof)?, read(&tr)?));
    }
    if outputs[0] != outputs[1] {
        return Err("CLI outputs differ between identical runs".into());
    }
    Ok("library and CLI runs are byte-identical across 3 policies".into())
}

fn main() -> ExitCode {
    let start = Instant::now();
    let batch = solve_batch();
    let mut results: Vec<(u32, &str, Outcome)> = vec![
        (1, "equilibrium soundness", batch.sound),
        (2, "greedy matches exhaustive minimum", greedy_equivalence()),
        (
            3,
            "demand extension is optimal at distance 1",
            extension_property(),
        ),
        (
            4,
            "shift repair is optimal at distance 0 or 2",
            repair_property(),
        ),
        (5, "potential decreases at every move", batch.potential),
        (6, "improvement move bounds", batch.bounds),
    ];
    results.push((7, "convex costs are strongly semi-convex", semi_convexity()));
    results.push((8, "singleton and matroid games", special_cases()));
    results.push((9, "determinism", determinism()));
    results.sort_by_key(|r| r.0);
    let mut failed = 0;
    for (k, name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("criterion {k}: PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {k}: FAIL  {name}: {detail}");
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed in {:.1} s",
        results.len() - failed,
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
