//! Exact most-stable matching search.
//!
//! [`solve_most_stable`] deepens the allowed number of blocking pairs from
//! zero and, at the first feasible level, maximises the number of assigned
//! residents. Polynomial special cases are dispatched first when they apply.

mod engine;
mod special;

use std::time::{Duration, Instant};

pub use engine::LevelOutcome;
pub use special::{decompose_212, solve_212, solve_gamma1, Figure2Component};

use crate::error::SolveError;
use crate::model::{Instance, Matching};
use crate::preprocess::{is_212, is_gamma1, satisfy_iteratively};
use crate::stability::{blocking_pairs, BlockingPair, StabilityMode};
use engine::Engine;

/// Default resident limit of [`brute_force_oracle`].
pub const ORACLE_LIMIT: usize = 12;

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub mode: StabilityMode,
    /// Fix forced assignments before searching level 0.
    pub presolve: bool,
    /// Enumerate exempt blocking sets at levels 1 and 2 instead of counting.
    pub blocking_set_presolve: bool,
    /// Dispatch the one-resident-per-hospital and (2,1,2) special cases.
    pub special_cases: bool,
    pub time_limit: Option<Duration>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            mode: StabilityMode::Def1,
            presolve: true,
            blocking_set_presolve: true,
            special_cases: true,
            time_limit: None,
        }
    }
}

/// How a solution was obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Dispatch {
    #[default]
    Search,
    Gamma1,
    Seeded212,
    Oracle,
}

#[derive(Clone, Debug, Default)]
pub struct LevelStat {
    pub k: usize,
    pub feasible: bool,
    pub nodes: u64,
}

#[derive(Clone, Debug, Default)]
pub struct SearchStats {
    pub nodes: u64,
    pub elapsed: Duration,
    pub levels: Vec<LevelStat>,
    pub presolve_fixed: usize,
    pub dispatch: Dispatch,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub matching: Matching,
    pub blocking_pairs: Vec<BlockingPair>,
    pub size: usize,
    /// Proven minimum blocking pairs and, among those, maximum size.
    pub optimal: bool,
    pub stats: SearchStats,
}

impl Solution {
    pub fn bp_count(&self) -> usize {
        self.blocking_pairs.len()
    }

    pub(crate) fn from_matching(
        inst: &Instance,
        m: Matching,
        mode: StabilityMode,
        optimal: bool,
        stats: SearchStats,
    ) -> Self {
        let bp = blocking_pairs(inst, &m, mode);
        let size = m.size();
        Solution { matching: m, blocking_pairs: bp, size, optimal, stats }
    }
}

/// Level-0 root domains with forced assignments fixed.
fn presolved_root(inst: &Instance, engine: &Engine) -> (Vec<u64>, usize) {
    let mut root = engine.initial_domains();
    let pre = satisfy_iteratively(inst);
    let mut fixed = 0;
    for a in inst.agents() {
        if let Some(p) = pre.forced.position(a) {
            root[engine.agent_index(a)] = 1 << p;
            fixed += 1;
        }
    }
    (root, fixed)
}

/// Runs level `k`, either by counting or by enumerating exempt sets.
fn run_level(engine: &mut Engine, root: Vec<u64>, k: usize, exempt_sets: bool) -> LevelOutcome {
    let n = engine.num_agents();
    if !exempt_sets || k == 0 {
        return engine.search(root, k, &vec![0; n], false, true, 0);
    }
    let positions = engine.positions();
    let mut out = LevelOutcome { best: None, complete: true, nodes: 0 };
    let mut subsets: Vec<Vec<usize>> = Vec::new();
    if k == 1 {
        subsets.extend((0..positions.len()).map(|i| vec![i]));
    } else {
        for i in 0..positions.len() {
            for j in i + 1..positions.len() {
                subsets.push(vec![i, j]);
            }
        }
    }
    for s in subsets {
        let mut exempt = vec![0u64; n];
        for &i in &s {
            let (a, p) = positions[i];
            exempt[a] |= 1 << p;
        }
        let min_size = out.best.as_ref().map_or(0, |b| b.1 + 1);
        let r = engine.search(root.clone(), 0, &exempt, true, true, min_size);
        out.nodes += r.nodes;
        if let Some(b) = r.best {
            out.best = Some(b);
        }
        if !r.complete {
            out.complete = false;
            break;
        }
    }
    out
}

/// Minimum blocking pairs, then maximum size.
pub fn solve_most_stable(inst: &Instance, opts: &SolveOptions) -> Result<Solution, SolveError> {
    let start = Instant::now();
    let deadline = opts.time_limit.map(|t| start + t);
    let mut stats = SearchStats::default();

    if opts.special_cases && is_gamma1(inst) {
        let m = solve_gamma1(inst)?;
        stats.dispatch = Dispatch::Gamma1;
        stats.elapsed = start.elapsed();
        return Ok(Solution::from_matching(inst, m, opts.mode, true, stats));
    }
    let mut seed_k = 0;
    let mut fallback: Option<Matching> = None;
    if opts.special_cases && is_212(inst) {
        if let Ok(sol) = solve_212(inst) {
            seed_k = sol.bp_count();
            fallback = Some(sol.matching);
            stats.dispatch = Dispatch::Seeded212;
        }
    }

    let mut engine = Engine::new(inst, opts.mode)?;
    engine.set_deadline(deadline);
    let mut k = seed_k;
    loop {
        let root = if k == 0 && opts.presolve {
            let (root, fixed) = presolved_root(inst, &engine);
            stats.presolve_fixed = fixed;
            root
        } else {
            engine.initial_domains()
        };
        let use_sets = opts.blocking_set_presolve && (1..=2).contains(&k);
        let out = run_level(&mut engine, root, k, use_sets);
        stats.levels.push(LevelStat { k, feasible: out.best.is_some(), nodes: out.nodes });
        stats.nodes = engine.nodes();
        if let Some((m, _)) = out.best {
            stats.elapsed = start.elapsed();
            let sol = Solution::from_matching(inst, m, opts.mode, out.complete, stats);
            debug_assert!(sol.bp_count() <= k);
            return Ok(sol);
        }
        if !out.complete {
            let m = fallback.clone().unwrap_or_else(|| satisfy_iteratively(inst).forced);
            stats.elapsed = start.elapsed();
            return Ok(Solution::from_matching(inst, m, opts.mode, false, stats));
        }
        k += 1;
    }
}

/// True iff level 0 is exhausted without a stable matching.
pub fn prove_unsolvable(inst: &Instance, mode: StabilityMode) -> Result<bool, SolveError> {
    Ok(find_stable(inst, mode)?.is_none())
}

/// Some stable matching, if one exists.
pub fn find_stable(inst: &Instance, mode: StabilityMode) -> Result<Option<Matching>, SolveError> {
    let mut engine = Engine::new(inst, mode)?;
    let (root, _) = presolved_root(inst, &engine);
    let n = engine.num_agents();
    let out = engine.search(root, 0, &vec![0; n], false, false, 0);
    Ok(out.best.map(|b| b.0))
}

/// Exhaustive enumeration; minimum blocking pairs, then maximum size, then
/// the first matching in enumeration order.
pub fn brute_force_oracle(
    inst: &Instance,
    mode: StabilityMode,
    limit: usize,
) -> Result<Solution, SolveError> {
    if inst.num_residents() > limit {
        return Err(SolveError::OracleLimit { limit, found: inst.num_residents() });
    }
    let start = Instant::now();
    let agents: Vec<_> = inst.agents().collect();
    let mut load = vec![0usize; inst.num_hospitals()];
    let mut cur = Matching::empty(inst);
    let mut best: Option<(usize, usize, Matching)> = None;
    let mut count = 0u64;

    fn rec(
        inst: &Instance,
        mode: StabilityMode,
        agents: &[crate::model::Agent],
        i: usize,
        load: &mut [usize],
        cur: &mut Matching,
        best: &mut Option<(usize, usize, Matching)>,
        count: &mut u64,
    ) {
        if i == agents.len() {
            *count += 1;
            let bp = crate::stability::bp_count(inst, cur, mode);
            let size = cur.size();
            let better = match best {
                None => true,
                Some((b, s, _)) => bp < *b || (bp == *b && size > *s),
            };
            if better {
                *best = Some((bp, size, cur.clone()));
            }
            return;
        }
        let a = agents[i];
        for p in 0..inst.agent_list_len(a) {
            let pl = inst.agent_placement(a, p);
            let fits = pl.iter().all(|(_, h)| {
                let need = pl.iter().filter(|x| x.1 == h).count();
                load[h.0] + need <= inst.capacity(h)
            });
            if !fits {
                continue;
            }
            for (_, h) in pl.iter() {
                load[h.0] += 1;
            }
            cur.set(a, Some(p));
            rec(inst, mode, agents, i + 1, load, cur, best, count);
            for (_, h) in pl.iter() {
                load[h.0] -= 1;
            }
        }
        cur.set(a, None);
        rec(inst, mode, agents, i + 1, load, cur, best, count);
    }

    rec(inst, mode, &agents, 0, &mut load, &mut cur, &mut best, &mut count);
    let (_, _, m) = best.expect("the empty matching is always feasible");
    let stats = SearchStats {
        nodes: count,
        elapsed: start.elapsed(),
        dispatch: Dispatch::Oracle,
        ..Default::default()
    };
    Ok(Solution::from_matching(inst, m, mode, true, stats))
}
