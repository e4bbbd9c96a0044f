//! Depth-first search over per-agent list positions.
//!
//! Each agent has a bitmask domain over its positions plus one extra bit for
//! "unassigned". Hospital occupancy is summarised per rank as the number of
//! residents certainly placed (lower bound) and possibly placed (upper bound).
//! Every blocking condition is antitone in the hospital's assignee set, so
//! evaluating it on the possible set proves it true and on the certain set
//! proves it false. The count of certainly blocking positions lower-bounds
//! the blocking pairs of every completion.

use std::time::Instant;

use crate::error::SolveError;
use crate::model::{Agent, Instance, Matching};
use crate::stability::StabilityMode;

#[derive(Clone, Copy, Debug)]
enum Cand {
    Single { h: usize, q: usize },
    Couple { h1: usize, q1: usize, h2: usize, q2: usize },
}

struct AgentData {
    agent: Agent,
    /// List length; bit `len` of the domain means unassigned.
    len: usize,
    weight: usize,
    /// Per value: (hospital, member index) placements.
    place: Vec<Vec<(usize, usize)>>,
    /// Per value: hospital pair for couples.
    pairs: Vec<(usize, usize)>,
    cands: Vec<Cand>,
    /// Per member: rank at each hospital it lists, `usize::MAX` if none.
    ranks: Vec<Vec<usize>>,
}

struct HospData {
    cap: usize,
    /// Indexed by rank: owning agent and the values placing that resident here.
    entries: Vec<(usize, u64)>,
}

/// Result of one bounded search.
#[derive(Clone, Debug, Default)]
pub struct LevelOutcome {
    pub best: Option<(Matching, usize)>,
    pub complete: bool,
    pub nodes: u64,
}

pub(crate) struct Engine<'a> {
    inst: &'a Instance,
    mode: StabilityMode,
    agents: Vec<AgentData>,
    hosp: Vec<HospData>,
    order: Vec<usize>,
    offs: Vec<usize>,
    sure: Vec<u32>,
    poss: Vec<u32>,
    bc: Vec<Vec<u32>>,
    deadline: Option<Instant>,
    nodes: u64,
    aborted: bool,
    /// Exempt positions must block: the level below is known infeasible.
    must_block: bool,
}

const NONE: usize = usize::MAX;

fn bits(mut m: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let b = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(b)
        }
    })
}

/// Blocking test for a hospital targeted by both couple members, given the
/// assignee count and the numbers ranked above the better and worse member.
fn same_hospital_blocks(mode: StabilityMode, c: usize, n: usize, bmin: usize, bmax: usize) -> bool {
    if n + 2 <= c {
        true
    } else if n + 1 == c {
        bmin < n
    } else if n == c {
        match mode {
            StabilityMode::Def1 => bmax < c && bmin + 1 < c,
            StabilityMode::WillAccept => bmax + 2 <= c,
        }
    } else {
        false
    }
}

impl<'a> Engine<'a> {
    pub fn new(inst: &'a Instance, mode: StabilityMode) -> Result<Self, SolveError> {
        let n2 = inst.num_hospitals();
        let mut agents = Vec::with_capacity(inst.num_agents());
        let mut hosp: Vec<HospData> = inst
            .hospitals()
            .iter()
            .map(|h| HospData { cap: h.capacity, entries: vec![(NONE, 0); h.prefs.len()] })
            .collect();
        for (idx, a) in inst.agents().enumerate() {
            let len = inst.agent_list_len(a);
            if len > 62 {
                return Err(SolveError::ListTooLong(len));
            }
            let residents = inst.agent_residents(a);
            let mut place = Vec::with_capacity(len + 1);
            let mut pairs = Vec::new();
            let mut cands = Vec::with_capacity(len);
            for p in 0..len {
                let pl: Vec<(usize, usize)> =
                    inst.agent_placement(a, p).iter().enumerate().map(|(mi, (_, h))| (h.0, mi)).collect();
                for &(h, mi) in &pl {
                    let q = inst.rank(crate::model::HospitalId(h), residents[mi]).expect("validated");
                    let e = &mut hosp[h].entries[q];
                    e.0 = idx;
                    e.1 |= 1 << p;
                }
                match a {
                    Agent::Single(_) => {
                        let h = pl[0].0;
                        let q = hosp_rank(inst, h, residents[0]);
                        cands.push(Cand::Single { h, q });
                    }
                    Agent::Couple(_) => {
                        let (h1, h2) = (pl[0].0, pl[1].0);
                        pairs.push((h1, h2));
                        cands.push(Cand::Couple {
                            h1,
                            q1: hosp_rank(inst, h1, residents[0]),
                            h2,
                            q2: hosp_rank(inst, h2, residents[1]),
                        });
                    }
                }
                place.push(pl);
            }
            place.push(Vec::new());
            let ranks = residents
                .iter()
                .map(|&r| {
                    (0..n2).map(|h| inst.rank(crate::model::HospitalId(h), r).unwrap_or(NONE)).collect()
                })
                .collect();
            agents.push(AgentData { agent: a, len, weight: residents.len(), place, pairs, cands, ranks });
        }
        let mut order: Vec<usize> = (0..agents.len()).collect();
        order.sort_by_key(|&i| {
            let a = &agents[i];
            (matches!(a.agent, Agent::Single(_)), std::cmp::Reverse(a.len), i)
        });
        let mut offs = Vec::with_capacity(n2 + 1);
        let mut total = 0;
        for h in &hosp {
            offs.push(total);
            total += h.entries.len() + 1;
        }
        offs.push(total);
        let bc = agents.iter().map(|a| vec![0; a.len + 1]).collect();
        Ok(Engine {
            inst,
            mode,
            agents,
            hosp,
            order,
            offs,
            sure: vec![0; total],
            poss: vec![0; total],
            bc,
            deadline: None,
            nodes: 0,
            aborted: false,
            must_block: false,
        })
    }

    pub fn set_deadline(&mut self, d: Option<Instant>) {
        self.deadline = d;
    }

    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn agent_index(&self, a: Agent) -> usize {
        match a {
            Agent::Couple(i) => i,
            Agent::Single(i) => self.inst.couples().len() + i,
        }
    }

    /// Full domains.
    pub fn initial_domains(&self) -> Vec<u64> {
        self.agents.iter().map(|a| (1u64 << (a.len + 1)) - 1).collect()
    }

    /// Number of (agent, position) candidates.
    pub fn positions(&self) -> Vec<(usize, usize)> {
        self.agents.iter().enumerate().flat_map(|(i, a)| (0..a.len).map(move |p| (i, p))).collect()
    }

    fn compute_prefix(&mut self, dom: &[u64]) {
        for (h, hd) in self.hosp.iter().enumerate() {
            let o = self.offs[h];
            let (mut s, mut p) = (0u32, 0u32);
            self.sure[o] = 0;
            self.poss[o] = 0;
            for (q, &(a, mask)) in hd.entries.iter().enumerate() {
                if a != NONE {
                    let d = dom[a];
                    if d & mask != 0 {
                        p += 1;
                        if d & !mask == 0 {
                            s += 1;
                        }
                    }
                }
                self.sure[o + q + 1] = s;
                self.poss[o + q + 1] = p;
            }
        }
    }

    /// Certain and possible counts at `h` ranked above `q`, all agents.
    #[inline]
    fn b_all(&self, h: usize, q: usize) -> (usize, usize) {
        let i = self.offs[h] + q;
        (self.sure[i] as usize, self.poss[i] as usize)
    }

    /// As [`Self::b_all`] but without agent `a`'s own members.
    fn b_others(&self, dom: &[u64], a: usize, h: usize, q: usize) -> (usize, usize) {
        let (mut lo, mut hi) = self.b_all(h, q);
        let ad = &self.agents[a];
        for ranks in &ad.ranks {
            let rm = ranks[h];
            if rm != NONE && rm < q {
                let mask = self.hosp[h].entries[rm].1;
                let d = dom[a];
                if d & mask != 0 {
                    hi -= 1;
                    if d & !mask == 0 {
                        lo -= 1;
                    }
                }
            }
        }
        (lo, hi)
    }

    fn n_others(&self, dom: &[u64], a: usize, h: usize) -> (usize, usize) {
        self.b_others(dom, a, h, self.hosp[h].entries.len())
    }

    /// (certainly blocks, certainly does not block) for agent `a` at
    /// position `p` when the agent takes value `v > p`.
    fn status(&self, dom: &[u64], a: usize, p: usize, v: usize) -> (bool, bool) {
        let ad = &self.agents[a];
        match ad.cands[p] {
            Cand::Single { h, q } => {
                let (lo, hi) = self.b_all(h, q);
                let c = self.hosp[h].cap;
                (hi < c, lo >= c)
            }
            Cand::Couple { h1, q1, h2, q2 } => {
                let assigned = v < ad.len;
                let (m1, m2) = if assigned { ad.pairs[v] } else { (NONE, NONE) };
                if assigned && (m2 == h2 || m1 == h1) {
                    // One member keeps its hospital, the other moves.
                    let (h, q) = if m2 == h2 { (h1, q1) } else { (h2, q2) };
                    let (lo, hi) = self.b_others(dom, a, h, q);
                    let c = self.hosp[h].cap;
                    let t = if h1 == h2 { c - 1 } else { c };
                    return (hi < t, lo >= t);
                }
                if h1 != h2 {
                    let own1 = usize::from(m2 == h1 && ad.ranks[1][h1] < q1);
                    let own2 = usize::from(m1 == h2 && ad.ranks[0][h2] < q2);
                    let (lo1, hi1) = self.b_others(dom, a, h1, q1);
                    let (lo2, hi2) = self.b_others(dom, a, h2, q2);
                    let (c1, c2) = (self.hosp[h1].cap, self.hosp[h2].cap);
                    let t = hi1 + own1 < c1 && hi2 + own2 < c2;
                    let f = lo1 + own1 >= c1 || lo2 + own2 >= c2;
                    (t, f)
                } else {
                    let c = self.hosp[h1].cap;
                    if c < 2 {
                        return (false, true);
                    }
                    let (qmin, qmax) = (q1.min(q2), q1.max(q2));
                    let (nlo, nhi) = self.n_others(dom, a, h1);
                    let (blo, bhi) = self.b_others(dom, a, h1, qmin);
                    let (wlo, whi) = self.b_others(dom, a, h1, qmax);
                    let t = same_hospital_blocks(self.mode, c, nhi, bhi, whi);
                    let f = !same_hospital_blocks(self.mode, c, nlo, blo, wlo);
                    (t, f)
                }
            }
        }
    }

    /// Fills `self.bc[a][v]` with the certain blocking count if `a = v`.
    /// Returns the minimum over the domain.
    fn block_counts(&mut self, dom: &[u64], a: usize, exempt: u64) -> u32 {
        let len = self.agents[a].len;
        let d = dom[a];
        let mut bc = std::mem::take(&mut self.bc[a]);
        let mut best = u32::MAX;
        match self.agents[a].cands.first() {
            Some(Cand::Single { .. }) => {
                let mut acc = 0;
                for v in 0..=len {
                    if d >> v & 1 != 0 {
                        bc[v] = acc;
                        best = best.min(acc);
                    }
                    if v < len && exempt >> v & 1 == 0 && self.status(dom, a, v, len).0 {
                        acc += 1;
                    }
                }
            }
            _ => {
                for v in bits(d) {
                    let mut cnt = 0;
                    for p in 0..v {
                        if exempt >> p & 1 == 0 && self.status(dom, a, p, v).0 {
                            cnt += 1;
                        }
                    }
                    bc[v] = cnt;
                    best = best.min(cnt);
                }
            }
        }
        self.bc[a] = bc;
        if best == u32::MAX {
            0
        } else {
            best
        }
    }

    /// Restricts agents so that at least `t` residents ranked above `q` at
    /// `h` (other than agent `skip`'s members) end up there. Applies only
    /// when the possible count is exactly `t`.
    fn force_support(&self, dom: &mut [u64], skip: usize, h: usize, q: usize, t: usize, hi: usize) -> bool {
        if hi != t {
            return false;
        }
        let mut changed = false;
        for &(b, mask) in &self.hosp[h].entries[..q] {
            if b == NONE || b == skip {
                continue;
            }
            let d = dom[b];
            if d & mask != 0 && d & !mask != 0 {
                dom[b] = d & mask;
                changed = true;
            }
        }
        changed
    }

    /// `h` must end up full of residents ranked above `q`, so nobody ranked
    /// below it (outside agent `skip`) can be placed there.
    fn exclude_below(&self, dom: &mut [u64], skip: usize, h: usize, q: usize) -> bool {
        let mut changed = false;
        for &(b, mask) in &self.hosp[h].entries[q + 1..] {
            if b == NONE || b == skip {
                continue;
            }
            if dom[b] & mask != 0 {
                dom[b] &= !mask;
                changed = true;
            }
        }
        changed
    }

    /// Propagates to a fixpoint. False on wipe-out or bound violation.
    fn propagate(&mut self, dom: &mut [u64], k: usize, exempt: &[u64], target: usize) -> bool {
        let n = self.agents.len();
        loop {
            if dom.contains(&0) {
                return false;
            }
            self.compute_prefix(dom);

            // Capacity.
            let mut changed = false;
            for a in 0..n {
                let d = dom[a];
                let len = self.agents[a].len;
                let mut keep = d;
                for v in bits(d & !(1 << len)) {
                    let pl = &self.agents[a].place[v];
                    for &(h, _) in pl {
                        let need = pl.iter().filter(|x| x.0 == h).count();
                        let (lo, _) = self.n_others(dom, a, h);
                        if lo + need > self.hosp[h].cap {
                            keep &= !(1 << v);
                            break;
                        }
                    }
                }
                if keep != d {
                    dom[a] = keep;
                    changed = true;
                }
            }
            if changed {
                continue;
            }

            if self.must_block && self.require_exempt_blocks(dom, exempt) {
                continue;
            }

            // Blocking-pair budget.
            let mut mins = vec![0u32; n];
            let mut lb = 0usize;
            for a in 0..n {
                mins[a] = self.block_counts(dom, a, exempt[a]);
                lb += mins[a] as usize;
            }
            if lb > k {
                return false;
            }
            for a in 0..n {
                let d = dom[a];
                let base = lb - mins[a] as usize;
                let mut keep = d;
                for v in bits(d) {
                    if base + self.bc[a][v] as usize > k {
                        keep &= !(1 << v);
                    }
                }
                if keep != d {
                    dom[a] = keep;
                    changed = true;
                }
            }
            if changed {
                continue;
            }

            // Size target.
            if target > 0 {
                let ub: usize = (0..n)
                    .filter(|&a| dom[a] & !(1 << self.agents[a].len) != 0)
                    .map(|a| self.agents[a].weight)
                    .sum();
                if ub < target {
                    return false;
                }
                for a in 0..n {
                    let un = 1u64 << self.agents[a].len;
                    if dom[a] & un != 0 && dom[a] != un && ub - self.agents[a].weight < target {
                        dom[a] &= !un;
                        changed = true;
                    }
                }
                if changed {
                    continue;
                }
            }

            // With no slack left, positions that are not certainly blocking
            // must not block; derive the hospital occupancy this requires.
            if lb == k && self.force_supports(dom, exempt) {
                continue;
            }
            return true;
        }
    }

    /// Drops values under which some exempt position cannot block.
    fn require_exempt_blocks(&self, dom: &mut [u64], exempt: &[u64]) -> bool {
        let mut changed = false;
        for a in 0..self.agents.len() {
            let e = exempt[a];
            if e == 0 {
                continue;
            }
            let d = dom[a];
            let last = 63 - e.leading_zeros() as usize;
            let mut keep = d & !((2u64 << last) - 1);
            for v in bits(keep) {
                if bits(e).any(|p| self.status(dom, a, p, v).1) {
                    keep &= !(1 << v);
                }
            }
            if keep != d {
                dom[a] = keep;
                changed = true;
            }
        }
        changed
    }

    /// Stops at the first change: the prefix counts no longer match `dom`.
    fn force_supports(&self, dom: &mut [u64], exempt: &[u64]) -> bool {
        for a in 0..self.agents.len() {
            let ad = &self.agents[a];
            let d = dom[a];
            let low = d.trailing_zeros() as usize;
            let fixed = d.count_ones() == 1;
            for p in 0..low.min(ad.len) {
                if exempt[a] >> p & 1 != 0 {
                    continue;
                }
                match ad.cands[p] {
                    Cand::Single { h, q } => {
                        let (lo, hi) = self.b_all(h, q);
                        let c = self.hosp[h].cap;
                        if lo < c
                            && hi >= c
                            && (self.exclude_below(dom, a, h, q) || self.force_support(dom, a, h, q, c, hi))
                        {
                            return true;
                        }
                    }
                    Cand::Couple { h1, q1, h2, q2 } if fixed => {
                        let v = low;
                        let (m1, m2) = if v < ad.len { ad.pairs[v] } else { (NONE, NONE) };
                        if v < ad.len && (m2 == h2 || m1 == h1) {
                            let (h, q) = if m2 == h2 { (h1, q1) } else { (h2, q2) };
                            let (lo, hi) = self.b_others(dom, a, h, q);
                            let c = self.hosp[h].cap;
                            let t = if h1 == h2 { c - 1 } else { c };
                            let full = t == c && self.exclude_below(dom, a, h, q);
                            if lo < t && hi >= t && (full || self.force_support(dom, a, h, q, t, hi)) {
                                return true;
                            }
                        } else if h1 != h2 {
                            let own1 = usize::from(m2 == h1 && ad.ranks[1][h1] < q1);
                            let own2 = usize::from(m1 == h2 && ad.ranks[0][h2] < q2);
                            let (lo1, hi1) = self.b_others(dom, a, h1, q1);
                            let (lo2, hi2) = self.b_others(dom, a, h2, q2);
                            let (c1, c2) = (self.hosp[h1].cap, self.hosp[h2].cap);
                            let done = lo1 + own1 >= c1 || lo2 + own2 >= c2;
                            if !done && hi1 + own1 < c1 && hi2 + own2 >= c2 {
                                if self.exclude_below(dom, a, h2, q2)
                                    || self.force_support(dom, a, h2, q2, c2 - own2, hi2)
                                {
                                    return true;
                                }
                            } else if !done
                                && hi2 + own2 < c2
                                && hi1 + own1 >= c1
                                && (self.exclude_below(dom, a, h1, q1)
                                    || self.force_support(dom, a, h1, q1, c1 - own1, hi1))
                            {
                                return true;
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
        false
    }

    fn to_matching(&self, dom: &[u64]) -> Matching {
        let mut m = Matching::empty(self.inst);
        for (ad, &d) in self.agents.iter().zip(dom) {
            let v = d.trailing_zeros() as usize;
            m.set(ad.agent, (v < ad.len).then_some(v));
        }
        m
    }

    fn size_of(&self, dom: &[u64]) -> usize {
        self.agents
            .iter()
            .zip(dom)
            .filter(|(ad, &d)| d.trailing_zeros() as usize != ad.len)
            .map(|(ad, _)| ad.weight)
            .sum()
    }

    /// Finds a matching with at most `k` non-exempt blocking pairs. With
    /// `maximize`, continues to the largest such matching, keeping the first
    /// found among equals. `min_size` demands at least that many assigned.
    /// With `must_block`, every exempt position has to block.
    pub fn search(
        &mut self,
        root: Vec<u64>,
        k: usize,
        exempt: &[u64],
        must_block: bool,
        maximize: bool,
        min_size: usize,
    ) -> LevelOutcome {
        self.aborted = false;
        self.must_block = must_block;
        let start_nodes = self.nodes;
        let mut best: Option<(Matching, usize)> = None;
        let mut target = min_size;
        let mut stack = vec![root];
        while let Some(mut dom) = stack.pop() {
            self.nodes += 1;
            if self.nodes.is_multiple_of(256) {
                if let Some(d) = self.deadline {
                    if Instant::now() >= d {
                        self.aborted = true;
                        break;
                    }
                }
            }
            if !self.propagate(&mut dom, k, exempt, target) {
                continue;
            }
            let pick = self.order.iter().copied().find(|&a| dom[a].count_ones() > 1);
            match pick {
                None => {
                    let size = self.size_of(&dom);
                    if size >= target {
                        best = Some((self.to_matching(&dom), size));
                        if !maximize {
                            break;
                        }
                        target = size + 1;
                    }
                }
                Some(a) => {
                    // Push in reverse so the preferred value is explored first.
                    let vals: Vec<usize> = bits(dom[a]).collect();
                    for &v in vals.iter().rev() {
                        let mut child = dom.clone();
                        child[a] = 1 << v;
                        stack.push(child);
                    }
                }
            }
        }
        LevelOutcome { best, complete: !self.aborted, nodes: self.nodes - start_nodes }
    }

    pub fn nodes(&self) -> u64 {
        self.nodes
    }
}

fn hosp_rank(inst: &Instance, h: usize, r: crate::model::ResidentId) -> usize {
    inst.rank(crate::model::HospitalId(h), r).expect("validated instance")
}
