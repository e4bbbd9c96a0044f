//! Fixed assignments and the reductions they license.
//!
//! A single whose first choice ranks it within capacity, or a couple whose
//! first pair ranks each member within the respective capacity, is matched
//! that way in every stable matching. Satisfying such an assignment removes
//! the agent, shrinks capacity and, once a hospital fills, deletes it from
//! every remaining list.

use crate::model::{Agent, Couple, Hospital, HospitalId, Instance, Matching, ResidentId, Single};

/// An agent that must take the first entry of its current list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FixedAssignment {
    pub agent: Agent,
    /// Zero-based position on the agent's original list.
    pub position: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceStep {
    Assign(FixedAssignment),
    Full(HospitalId),
    Emptied(Agent),
}

/// A reduced instance plus the id maps back to the original.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub instance: Instance,
    /// New agent index to original agent.
    pub agent_map: Vec<Agent>,
    /// Per new agent: new list position to original list position.
    pub position_map: Vec<Vec<usize>>,
    /// New hospital index to original hospital.
    pub hospital_map: Vec<HospitalId>,
}

impl Reduction {
    fn new_agent_index(&self, a: Agent) -> usize {
        match a {
            Agent::Couple(i) => i,
            Agent::Single(i) => self.instance.couples().len() + i,
        }
    }

    /// Writes a matching of the reduced instance into `base`.
    pub fn lift(&self, reduced: &Matching, base: &mut Matching) {
        for a in self.instance.agents() {
            let k = self.new_agent_index(a);
            let p = reduced.position(a).map(|p| self.position_map[k][p]);
            base.set(self.agent_map[k], p);
        }
    }
}

/// Result of [`satisfy_iteratively`].
#[derive(Clone, Debug)]
pub struct Presolved {
    /// The forced partial matching, on the original instance.
    pub forced: Matching,
    pub reduction: Reduction,
    pub trace: Vec<TraceStep>,
}

/// Working copy with original ids; dead agents have `None` lists.
struct Work<'a> {
    inst: &'a Instance,
    cap: Vec<usize>,
    hosp: Vec<Vec<ResidentId>>,
    /// Remaining original positions per agent.
    singles: Vec<Option<Vec<usize>>>,
    couples: Vec<Option<Vec<usize>>>,
}

impl<'a> Work<'a> {
    fn new(inst: &'a Instance) -> Self {
        Work {
            inst,
            cap: inst.hospitals().iter().map(|h| h.capacity).collect(),
            hosp: inst.hospitals().iter().map(|h| h.prefs.clone()).collect(),
            singles: inst.singles().iter().map(|s| Some((0..s.prefs.len()).collect())).collect(),
            couples: inst.couples().iter().map(|c| Some((0..c.pairs.len()).collect())).collect(),
        }
    }

    fn list(&self, a: Agent) -> Option<&Vec<usize>> {
        match a {
            Agent::Single(i) => self.singles[i].as_ref(),
            Agent::Couple(i) => self.couples[i].as_ref(),
        }
    }

    fn list_mut(&mut self, a: Agent) -> &mut Option<Vec<usize>> {
        match a {
            Agent::Single(i) => &mut self.singles[i],
            Agent::Couple(i) => &mut self.couples[i],
        }
    }

    fn within(&self, h: HospitalId, r: ResidentId) -> bool {
        self.hosp[h.0].iter().position(|&x| x == r).is_some_and(|q| q < self.cap[h.0])
    }

    fn fixed(&self) -> Vec<FixedAssignment> {
        let mut out = Vec::new();
        for a in self.inst.agents() {
            let Some(&p) = self.list(a).and_then(|l| l.first()) else { continue };
            let ok = self.inst.agent_placement(a, p).iter().all(|(r, h)| self.within(h, r));
            if ok {
                out.push(FixedAssignment { agent: a, position: p });
            }
        }
        out
    }

    fn satisfy(&mut self, fa: FixedAssignment, trace: &mut Vec<TraceStep>) {
        trace.push(TraceStep::Assign(fa));
        *self.list_mut(fa.agent) = None;
        let members = self.inst.agent_residents(fa.agent);
        for list in &mut self.hosp {
            list.retain(|r| !members.contains(r));
        }
        let mut filled = Vec::new();
        for (_, h) in self.inst.agent_placement(fa.agent, fa.position).iter() {
            self.cap[h.0] -= 1;
            if self.cap[h.0] == 0 && !filled.contains(&h) {
                filled.push(h);
            }
        }
        for h in filled {
            trace.push(TraceStep::Full(h));
            self.close(h, trace);
        }
    }

    /// Removes a full hospital from every remaining list.
    fn close(&mut self, h: HospitalId, trace: &mut Vec<TraceStep>) {
        self.hosp[h.0].clear();
        let inst = self.inst;
        for a in inst.agents() {
            let Some(list) = self.list_mut(a).as_mut() else { continue };
            let before = list.len();
            list.retain(|&p| inst.agent_placement(a, p).iter().all(|(_, x)| x != h));
            if list.len() == before {
                continue;
            }
            let remaining = list.clone();
            if remaining.is_empty() {
                *self.list_mut(a) = None;
                trace.push(TraceStep::Emptied(a));
            }
            // Drop members from hospitals they no longer list.
            for r in inst.agent_residents(a) {
                let still: Vec<HospitalId> = remaining.iter().map(|&p| inst.pref(r, p)).collect();
                for (j, hl) in self.hosp.iter_mut().enumerate() {
                    if !still.contains(&HospitalId(j)) {
                        hl.retain(|&x| x != r);
                    }
                }
            }
        }
    }

    fn finish(self, forced: Matching, trace: Vec<TraceStep>) -> Presolved {
        let inst = self.inst;
        let hospital_map: Vec<HospitalId> =
            (0..inst.num_hospitals()).filter(|&j| self.cap[j] > 0).map(HospitalId).collect();
        let mut new_h = vec![usize::MAX; inst.num_hospitals()];
        for (k, h) in hospital_map.iter().enumerate() {
            new_h[h.0] = k;
        }
        let mut agent_map = Vec::new();
        let mut position_map = Vec::new();
        let mut couples = Vec::new();
        let mut singles = Vec::new();
        let mut new_r = vec![usize::MAX; inst.num_residents()];
        for (i, l) in self.couples.iter().enumerate() {
            if let Some(l) = l {
                let (x, y) = inst.couple_residents(i);
                new_r[x.0] = 2 * couples.len();
                new_r[y.0] = 2 * couples.len() + 1;
                couples.push(Couple {
                    pairs: l
                        .iter()
                        .map(|&p| {
                            let (a, b) = inst.couples()[i].pairs[p];
                            (HospitalId(new_h[a.0]), HospitalId(new_h[b.0]))
                        })
                        .collect(),
                });
                agent_map.push(Agent::Couple(i));
                position_map.push(l.clone());
            }
        }
        let base = 2 * couples.len();
        for (i, l) in self.singles.iter().enumerate() {
            if let Some(l) = l {
                new_r[inst.single_resident(i).0] = base + singles.len();
                singles.push(Single {
                    prefs: l.iter().map(|&p| HospitalId(new_h[inst.singles()[i].prefs[p].0])).collect(),
                });
                agent_map.push(Agent::Single(i));
                position_map.push(l.clone());
            }
        }
        let hospitals = hospital_map
            .iter()
            .map(|h| Hospital {
                capacity: self.cap[h.0],
                prefs: self.hosp[h.0].iter().map(|r| ResidentId(new_r[r.0])).collect(),
            })
            .collect();
        let instance = Instance::new(hospitals, couples, singles).expect("reduction preserves id ranges");
        Presolved { forced, reduction: Reduction { instance, agent_map, position_map, hospital_map }, trace }
    }
}

/// Fixed assignments of the instance as given.
pub fn find_fixed_assignments(inst: &Instance) -> Vec<FixedAssignment> {
    Work::new(inst).fixed()
}

/// Satisfies fixed assignments until none remain. `pick` chooses which of
/// the currently fixed assignments to satisfy next; the result does not
/// depend on that choice.
pub fn satisfy_iteratively_with(
    inst: &Instance,
    mut pick: impl FnMut(&[FixedAssignment]) -> usize,
) -> Presolved {
    let mut work = Work::new(inst);
    let mut forced = Matching::empty(inst);
    let mut trace = Vec::new();
    loop {
        let fixed = work.fixed();
        if fixed.is_empty() {
            break;
        }
        let fa = fixed[pick(&fixed)];
        forced.set(fa.agent, Some(fa.position));
        work.satisfy(fa, &mut trace);
    }
    work.finish(forced, trace)
}

pub fn satisfy_iteratively(inst: &Instance) -> Presolved {
    satisfy_iteratively_with(inst, |_| 0)
}

/// True when every hospital list has at most one entry.
pub fn is_gamma1(inst: &Instance) -> bool {
    inst.profile().2 <= 1
}

/// True when singles list at most two hospitals, couples one pair and
/// hospitals two residents.
pub fn is_212(inst: &Instance) -> bool {
    let (a, b, g) = inst.profile();
    a <= 2 && b <= 1 && g <= 2
}
