//! Polynomial cases: hospitals ranking one resident, and (2,1,2) instances.
//!
//! After fixed assignments are satisfied, every component of a (2,1,2)
//! instance that contains a couple is a cycle of blocks, each a couple
//! followed by a chain of singles. Such a component admits a stable matching
//! exactly when its number of couples is even, and otherwise one blocking
//! pair is unavoidable.

use std::collections::VecDeque;

use super::{Dispatch, SearchStats, Solution};
use crate::error::SolveError;
use crate::model::{Agent, HospitalId, Instance, Matching, ResidentId};
use crate::preprocess::{find_fixed_assignments, is_212, is_gamma1, satisfy_iteratively};
use crate::stability::StabilityMode;

/// Unique stable matching when every hospital ranks at most one resident:
/// everyone takes their first entry.
pub fn solve_gamma1(inst: &Instance) -> Result<Matching, SolveError> {
    if !is_gamma1(inst) {
        return Err(SolveError::WrongClass("a hospital ranks two or more residents".into()));
    }
    let mut m = Matching::empty(inst);
    for a in inst.agents() {
        if inst.agent_list_len(a) > 0 {
            m.set(a, Some(0));
        }
    }
    Ok(m)
}

/// One cyclic component: `couples[k]` is followed by the chain `singles[k]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Figure2Component {
    pub couples: Vec<usize>,
    pub singles: Vec<Vec<usize>>,
}

impl Figure2Component {
    pub fn num_couples(&self) -> usize {
        self.couples.len()
    }

    /// Minimum blocking pairs of the component.
    pub fn min_bp(&self) -> usize {
        usize::from(self.couples.len() % 2 == 1 && !self.is_degenerate())
    }

    /// A lone couple whose pair names one hospital of capacity one; it can
    /// never be placed and never blocks.
    fn is_degenerate(&self) -> bool {
        self.couples.len() == 1 && self.singles[0].is_empty()
    }

    /// Odd-indexed blocks (one-based) take their couple's pair and the
    /// singles' first choices; even blocks leave the couple out and give
    /// singles their second choices. With an odd count the last block keeps
    /// its couple and drops its final single, or leaves the couple out when
    /// it has no singles.
    pub fn construct(&self, m: &mut Matching) {
        let n = self.couples.len();
        if self.is_degenerate() {
            m.set(Agent::Couple(self.couples[0]), None);
            return;
        }
        for k in 0..n {
            let chain = &self.singles[k];
            let last_odd = n % 2 == 1 && k == n - 1;
            if k % 2 == 1 {
                m.set(Agent::Couple(self.couples[k]), None);
                for &s in chain {
                    m.set(Agent::Single(s), Some(1));
                }
            } else if last_odd {
                if chain.is_empty() {
                    m.set(Agent::Couple(self.couples[k]), None);
                } else {
                    m.set(Agent::Couple(self.couples[k]), Some(0));
                    for &s in &chain[..chain.len() - 1] {
                        m.set(Agent::Single(s), Some(0));
                    }
                    m.set(Agent::Single(chain[chain.len() - 1]), None);
                }
            } else {
                m.set(Agent::Couple(self.couples[k]), Some(0));
                for &s in chain {
                    m.set(Agent::Single(s), Some(0));
                }
            }
        }
    }
}

struct Components {
    /// Per component: couples, singles, hospitals.
    parts: Vec<(Vec<usize>, Vec<usize>, Vec<usize>)>,
}

fn components(inst: &Instance) -> Components {
    let n1 = inst.num_residents();
    let n = n1 + inst.num_hospitals();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let nx = p[y];
            p[y] = r;
            y = nx;
        }
        r
    }
    let union = |p: &mut Vec<usize>, a: usize, b: usize| {
        let (ra, rb) = (find(p, a), find(p, b));
        if ra != rb {
            p[ra] = rb;
        }
    };
    for r in 0..n1 {
        for h in inst.resident_list(ResidentId(r)) {
            union(&mut parent, r, n1 + h.0);
        }
        if let Some(pt) = inst.partner(ResidentId(r)) {
            union(&mut parent, r, pt.0);
        }
    }
    let mut index = vec![usize::MAX; n];
    let mut parts: Vec<(Vec<usize>, Vec<usize>, Vec<usize>)> = Vec::new();
    let mut slot = |p: &mut Vec<usize>, x: usize, parts: &mut Vec<_>| {
        let r = find(p, x);
        if index[r] == usize::MAX {
            index[r] = parts.len();
            parts.push((Vec::new(), Vec::new(), Vec::new()));
        }
        index[r]
    };
    for i in 0..inst.couples().len() {
        let c = slot(&mut parent, 2 * i, &mut parts);
        parts[c].0.push(i);
    }
    for i in 0..inst.singles().len() {
        let c = slot(&mut parent, inst.single_resident(i).0, &mut parts);
        parts[c].1.push(i);
    }
    for h in 0..inst.num_hospitals() {
        let c = slot(&mut parent, n1 + h, &mut parts);
        parts[c].2.push(h);
    }
    Components { parts }
}

fn violation(who: impl ToString, reason: &str) -> SolveError {
    SolveError::Structure { agent: who.to_string(), reason: reason.to_string() }
}

/// Walks the cycle starting at the lowest couple of a component.
fn walk(
    inst: &Instance,
    couples: &[usize],
    singles: &[usize],
    hospitals: &[usize],
) -> Result<Figure2Component, SolveError> {
    let start = couples[0];
    let mut comp = Figure2Component { couples: Vec::new(), singles: Vec::new() };
    let mut seen_h = vec![false; inst.num_hospitals()];
    let mut seen_c = vec![false; inst.couples().len()];
    let mut visited_singles = 0;
    let mut visited_h = 0;

    // Checks a hospital entered from `prev` and returns its top resident.
    let mut enter = |h: HospitalId, prev: ResidentId| -> Result<ResidentId, SolveError> {
        let hd = inst.hospital(h);
        if hd.capacity != 1 || hd.prefs.len() != 2 || hd.prefs[1] != prev {
            return Err(violation(h, "expected capacity 1 ranking a new resident above the previous one"));
        }
        if std::mem::replace(&mut seen_h[h.0], true) {
            return Err(violation(h, "hospital visited twice"));
        }
        visited_h += 1;
        Ok(hd.prefs[0])
    };

    let mut cur = start;
    loop {
        if std::mem::replace(&mut seen_c[cur], true) {
            return Err(violation(format!("couple {}", cur + 1), "couple visited twice"));
        }
        let pairs = &inst.couples()[cur].pairs;
        if pairs.len() != 1 {
            return Err(violation(format!("couple {}", cur + 1), "expected a single pair"));
        }
        let (_, r2) = inst.couple_residents(cur);
        let mut h = pairs[0].1;
        let mut prev = r2;
        let mut chain = Vec::new();
        let next = loop {
            let x = enter(h, prev)?;
            match inst.agent_of(x) {
                Agent::Single(s) => {
                    let list = &inst.singles()[s].prefs;
                    if list.len() != 2 || list[1] != h || list[0] == h {
                        return Err(violation(
                            x,
                            "expected a two-entry list ending at the previous hospital",
                        ));
                    }
                    chain.push(s);
                    visited_singles += 1;
                    prev = x;
                    h = list[0];
                }
                Agent::Couple(c) => {
                    if x.0 % 2 != 0 || inst.couples()[c].pairs.first().map(|p| p.0) != Some(h) {
                        return Err(violation(
                            x,
                            "expected a couple whose first member targets this hospital",
                        ));
                    }
                    break c;
                }
            }
        };
        comp.couples.push(cur);
        comp.singles.push(chain);
        if next == start {
            break;
        }
        cur = next;
    }
    if comp.couples.len() != couples.len() || visited_singles != singles.len() || visited_h != hospitals.len()
    {
        return Err(violation(format!("couple {}", start + 1), "component has agents off the cycle"));
    }
    Ok(comp)
}

/// Splits a reduced (2,1,2) instance into its cyclic components. Components
/// without couples are left out.
pub fn decompose_212(inst: &Instance) -> Result<Vec<Figure2Component>, SolveError> {
    if !is_212(inst) {
        return Err(SolveError::WrongClass("not a (2,1,2) instance".into()));
    }
    if let Some(fa) = find_fixed_assignments(inst).first() {
        return Err(violation(format!("{:?}", fa.agent), "fixed assignment present"));
    }
    let mut out = Vec::new();
    for (couples, singles, hospitals) in components(inst).parts {
        if !couples.is_empty() {
            out.push(walk(inst, &couples, &singles, &hospitals)?);
        }
    }
    Ok(out)
}

/// Resident-proposing deferred acceptance restricted to `singles`.
fn deferred_acceptance(inst: &Instance, singles: &[usize], m: &mut Matching) {
    let mut next = vec![0usize; inst.singles().len()];
    let mut held: Vec<Vec<usize>> = vec![Vec::new(); inst.num_hospitals()];
    let mut free: VecDeque<usize> = singles.iter().copied().collect();
    while let Some(s) = free.pop_front() {
        let list = &inst.singles()[s].prefs;
        if next[s] >= list.len() {
            continue;
        }
        let h = list[next[s]];
        next[s] += 1;
        let rank = |x: usize| inst.rank(h, inst.single_resident(x)).expect("validated");
        held[h.0].push(s);
        if held[h.0].len() > inst.capacity(h) {
            let worst = (0..held[h.0].len()).max_by_key(|&i| rank(held[h.0][i])).unwrap();
            free.push_back(held[h.0].swap_remove(worst));
        }
    }
    for (j, list) in held.iter().enumerate() {
        for &s in list {
            let p = inst.singles()[s].prefs.iter().position(|&x| x.0 == j).unwrap();
            m.set(Agent::Single(s), Some(p));
        }
    }
}

/// Minimum blocking pairs for (2,1,2) instances in polynomial time. The size
/// is not maximised, so the solution is not marked optimal.
pub fn solve_212(inst: &Instance) -> Result<Solution, SolveError> {
    if !is_212(inst) {
        return Err(SolveError::WrongClass("not a (2,1,2) instance".into()));
    }
    let start = std::time::Instant::now();
    let pre = satisfy_iteratively(inst);
    let red = &pre.reduction.instance;
    let mut rm = Matching::empty(red);
    for (couples, singles, hospitals) in components(red).parts {
        if couples.is_empty() {
            deferred_acceptance(red, &singles, &mut rm);
        } else {
            walk(red, &couples, &singles, &hospitals)?.construct(&mut rm);
        }
    }
    let mut m = pre.forced.clone();
    pre.reduction.lift(&rm, &mut m);
    let stats = SearchStats {
        elapsed: start.elapsed(),
        presolve_fixed: pre.forced.couples.iter().chain(&pre.forced.singles).flatten().count(),
        dispatch: Dispatch::Seeded212,
        ..Default::default()
    };
    Ok(Solution::from_matching(inst, m, StabilityMode::Def1, false, stats))
}
