//! Blocking-pair enumeration and the hospital-side predicates.
//!
//! A blocking pair is reported per agent and list position: a single with a
//! position on its list, or a couple with a position on its joint list.

use std::fmt;

use crate::model::{Agent, HospitalId, Instance, Matching, ResidentId};

/// Which test decides the hospital side when a couple targets one hospital
/// with both members and that hospital is full.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum StabilityMode {
    /// Two distinct assignees must be displaced, one worse than each member.
    #[default]
    Def1,
    /// Both members must survive the hospital's top-`c` choice among its
    /// assignees plus the couple.
    WillAccept,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BlockingType {
    One,
    TwoA,
    TwoB,
    ThreeA,
    ThreeB,
    ThreeC,
    ThreeD,
}

impl BlockingType {
    pub const ALL: [BlockingType; 7] = [
        BlockingType::One,
        BlockingType::TwoA,
        BlockingType::TwoB,
        BlockingType::ThreeA,
        BlockingType::ThreeB,
        BlockingType::ThreeC,
        BlockingType::ThreeD,
    ];
}

impl fmt::Display for BlockingType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BlockingType::One => "1",
            BlockingType::TwoA => "2a",
            BlockingType::TwoB => "2b",
            BlockingType::ThreeA => "3a",
            BlockingType::ThreeB => "3b",
            BlockingType::ThreeC => "3c",
            BlockingType::ThreeD => "3d",
        };
        f.write_str(s)
    }
}

/// Small set of [`BlockingType`]s.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct TypeSet(u8);

impl TypeSet {
    pub fn single(t: BlockingType) -> Self {
        TypeSet(1 << t as u8)
    }

    pub fn insert(&mut self, t: BlockingType) {
        self.0 |= 1 << t as u8;
    }

    pub fn contains(self, t: BlockingType) -> bool {
        self.0 & (1 << t as u8) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = BlockingType> {
        BlockingType::ALL.into_iter().filter(move |t| self.contains(*t))
    }
}

impl fmt::Display for TypeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<_> = self.iter().map(|t| t.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// An agent that would rather take list position `position` (zero-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BlockingPair {
    pub agent: Agent,
    pub position: usize,
    pub types: TypeSet,
}

impl BlockingPair {
    /// Human-readable form with one-based numbering, e.g.
    /// `couple 1 pos 1 type 3d` or `single 5 pos 2 type 1`.
    pub fn describe(&self, inst: &Instance) -> String {
        let who = match self.agent {
            Agent::Couple(i) => format!("couple {}", i + 1),
            Agent::Single(i) => format!("single {}", inst.single_resident(i).0 + 1),
        };
        format!("{who} pos {} type {}", self.position + 1, self.types)
    }
}

/// Per-hospital assignee lists with rank-based queries.
pub struct Occupancy<'a> {
    inst: &'a Instance,
    assigned: Vec<Vec<ResidentId>>,
}

impl<'a> Occupancy<'a> {
    pub fn new(inst: &'a Instance, m: &Matching) -> Self {
        Occupancy { inst, assigned: m.assignees(inst) }
    }

    pub fn assignees(&self, h: HospitalId) -> &[ResidentId] {
        &self.assigned[h.0]
    }

    pub fn count(&self, h: HospitalId) -> usize {
        self.assigned[h.0].len()
    }

    pub fn undersubscribed(&self, h: HospitalId) -> bool {
        self.count(h) < self.inst.capacity(h)
    }

    /// Assignees of `h` with zero-based rank strictly below `q`.
    pub fn better_than(&self, h: HospitalId, q: usize) -> usize {
        self.assigned[h.0].iter().filter(|&&s| self.rank(h, s) < q).count()
    }

    fn rank(&self, h: HospitalId, r: ResidentId) -> usize {
        self.inst.rank(h, r).expect("assignee must be ranked")
    }

    /// `h` ranks `r` above some assignee other than those in `skip`.
    fn prefers_to_some(&self, h: HospitalId, r: ResidentId, skip: Option<ResidentId>) -> bool {
        let q = self.rank(h, r);
        self.assigned[h.0].iter().any(|&s| Some(s) != skip && q < self.rank(h, s))
    }

    /// Def1 full-hospital test: two distinct assignees, one ranked below
    /// each of `a` and `b`.
    fn displaces_two(&self, h: HospitalId, a: ResidentId, b: ResidentId) -> bool {
        let (qa, qb) = (self.rank(h, a), self.rank(h, b));
        let list = &self.assigned[h.0];
        list.iter().any(|&s| qa < self.rank(h, s) && list.iter().any(|&t| t != s && qb < self.rank(h, t)))
    }

    /// `{a, b}` is contained in `h`'s top-`c` choice from its assignees
    /// together with `a` and `b`.
    fn will_accept(&self, h: HospitalId, a: ResidentId, b: ResidentId) -> bool {
        let worst = self.rank(h, a).max(self.rank(h, b));
        self.better_than(h, worst) + 2 <= self.inst.capacity(h)
    }
}

/// All blocking pairs of `m`, ordered by agent (couples first) and position.
pub fn blocking_pairs(inst: &Instance, m: &Matching, mode: StabilityMode) -> Vec<BlockingPair> {
    let occ = Occupancy::new(inst, m);
    let mut out = Vec::new();
    for a in inst.agents() {
        let cur = m.position(a);
        let limit = cur.unwrap_or(inst.agent_list_len(a));
        for p in 0..limit {
            if let Some(t) = classify(inst, m, &occ, mode, a, p) {
                out.push(BlockingPair { agent: a, position: p, types: TypeSet::single(t) });
            }
        }
    }
    out
}

/// Tests whether position `p` blocks; the agent must prefer `p` to its
/// current position.
fn classify(
    inst: &Instance,
    m: &Matching,
    occ: &Occupancy,
    mode: StabilityMode,
    a: Agent,
    p: usize,
) -> Option<BlockingType> {
    let cap = |h: HospitalId| inst.capacity(h);
    match a {
        Agent::Single(i) => {
            let r = inst.single_resident(i);
            let h = inst.singles()[i].prefs[p];
            (occ.undersubscribed(h) || occ.prefers_to_some(h, r, None)).then_some(BlockingType::One)
        }
        Agent::Couple(i) => {
            let (ri, rj) = inst.couple_residents(i);
            let (hk, hl) = inst.couples()[i].pairs[p];
            let cur = m.couples[i].map(|c| inst.couples()[i].pairs[c]);
            match cur {
                Some((_, mj)) if mj == hl => (occ.undersubscribed(hk)
                    || occ.prefers_to_some(hk, ri, Some(rj)))
                .then_some(BlockingType::TwoA),
                Some((mi, _)) if mi == hk => (occ.undersubscribed(hl)
                    || occ.prefers_to_some(hl, rj, Some(ri)))
                .then_some(BlockingType::TwoB),
                _ if hk != hl => ((occ.undersubscribed(hk) || occ.prefers_to_some(hk, ri, None))
                    && (occ.undersubscribed(hl) || occ.prefers_to_some(hl, rj, None)))
                .then_some(BlockingType::ThreeA),
                _ => {
                    let h = hk;
                    let n = occ.count(h);
                    let c = cap(h);
                    if n + 2 <= c {
                        Some(BlockingType::ThreeB)
                    } else if n + 1 == c {
                        (occ.prefers_to_some(h, ri, None) || occ.prefers_to_some(h, rj, None))
                            .then_some(BlockingType::ThreeC)
                    } else {
                        let full = match mode {
                            StabilityMode::Def1 => occ.displaces_two(h, ri, rj),
                            StabilityMode::WillAccept => occ.will_accept(h, ri, rj),
                        };
                        full.then_some(BlockingType::ThreeD)
                    }
                }
            }
        }
    }
}

pub fn bp_count(inst: &Instance, m: &Matching, mode: StabilityMode) -> usize {
    blocking_pairs(inst, m, mode).len()
}

pub fn is_stable(inst: &Instance, m: &Matching, mode: StabilityMode) -> bool {
    bp_count(inst, m, mode) == 0
}

/// True iff `h` would take a resident of zero-based rank `q`: `q` falls
/// within the capacity or fewer than `c` assignees rank above `q`.
pub fn hosp_would_prefer(inst: &Instance, m: &Matching, h: HospitalId, q: usize) -> bool {
    let occ = Occupancy::new(inst, m);
    q < inst.capacity(h) || occ.better_than(h, q) < inst.capacity(h)
}

/// True iff fewer than `c - 1` assignees of `h` rank above `q`.
pub fn hosp_would_prefer2(inst: &Instance, m: &Matching, h: HospitalId, q: usize) -> bool {
    let occ = Occupancy::new(inst, m);
    occ.better_than(h, q) + 1 < inst.capacity(h)
}

/// Couple variant: when both members target the same hospital and the first
/// ranks higher, the second must also fit, so one post fewer is available.
pub fn exc_partner(
    inst: &Instance,
    m: &Matching,
    h1: HospitalId,
    h2: HospitalId,
    q1: usize,
    q2: usize,
) -> bool {
    let occ = Occupancy::new(inst, m);
    let better = occ.better_than(h1, q1);
    if h1 == h2 && q1 < q2 {
        better + 1 < inst.capacity(h1)
    } else {
        better < inst.capacity(h1)
    }
}
