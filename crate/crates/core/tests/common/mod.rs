#![allow(dead_code)]

use hrc_core::model::{Agent, Couple, Hospital, HospitalId, Instance, Matching, ResidentId, Single};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn h(n: usize) -> HospitalId {
    HospitalId(n - 1)
}

pub fn r(n: usize) -> ResidentId {
    ResidentId(n - 1)
}

pub const FIG5: &str = "\
hrc 1
singles 2
couples 1
hospitals 3
hospital 1 2
hospital 2 1
hospital 3 1
single 3 : 1
single 4 : 1
couple 1 2 : 1,1 2,3
pref 1 : 1 3 2 4
pref 2 : 1
pref 3 : 2
";

/// Couple (r1,r2) with pairs (h1,h1),(h2,h3); singles r3, r4 want h1;
/// h1 has two posts and ranks r1 r3 r2 r4.
pub fn fig5() -> Instance {
    Instance::new_validated(
        vec![
            Hospital { capacity: 2, prefs: vec![r(1), r(3), r(2), r(4)] },
            Hospital { capacity: 1, prefs: vec![r(1)] },
            Hospital { capacity: 1, prefs: vec![r(2)] },
        ],
        vec![Couple { pairs: vec![(h(1), h(1)), (h(2), h(3))] }],
        vec![Single { prefs: vec![h(1)] }, Single { prefs: vec![h(1)] }],
    )
    .unwrap()
}

/// r1 at h2, r2 at h3, r3 and r4 at h1.
pub fn fig5_matching(inst: &Instance) -> Matching {
    let mut m = Matching::empty(inst);
    m.set(Agent::Couple(0), Some(1));
    m.set(Agent::Single(0), Some(0));
    m.set(Agent::Single(1), Some(0));
    m
}

/// Small random instance with at most `max_res` residents. Capacities run
/// 1..=3, couple pairs may name one hospital twice, lists have 1..=3 entries.
pub fn tiny_instance(seed: u64, max_res: usize) -> Instance {
    tiny_instance_with(seed, max_res, 3, 4)
}

/// As [`tiny_instance`] with explicit bounds on couples and hospitals.
pub fn tiny_instance_with(seed: u64, max_res: usize, max_couples: usize, max_h: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_h = rng.gen_range(1..=max_h);
    let n_res = rng.gen_range(1..=max_res);
    let n_c = rng.gen_range(0..=n_res / 2).min(max_couples);
    let n_s = n_res - 2 * n_c;
    let mut couples = Vec::new();
    for _ in 0..n_c {
        let mut all: Vec<(HospitalId, HospitalId)> =
            (0..n_h).flat_map(|a| (0..n_h).map(move |b| (HospitalId(a), HospitalId(b)))).collect();
        all.shuffle(&mut rng);
        let len = rng.gen_range(1..=3.min(all.len()));
        couples.push(Couple { pairs: all[..len].to_vec() });
    }
    let mut singles = Vec::new();
    for _ in 0..n_s {
        let mut all: Vec<HospitalId> = (0..n_h).map(HospitalId).collect();
        all.shuffle(&mut rng);
        let len = rng.gen_range(1..=3.min(n_h));
        singles.push(Single { prefs: all[..len].to_vec() });
    }
    let mut applicants: Vec<Vec<ResidentId>> = vec![Vec::new(); n_h];
    for (i, c) in couples.iter().enumerate() {
        for &(a, b) in &c.pairs {
            applicants[a.0].push(ResidentId(2 * i));
            applicants[b.0].push(ResidentId(2 * i + 1));
        }
    }
    for (i, s) in singles.iter().enumerate() {
        for &x in &s.prefs {
            applicants[x.0].push(ResidentId(2 * n_c + i));
        }
    }
    let hospitals = applicants
        .into_iter()
        .map(|mut a| {
            a.sort();
            a.dedup();
            a.shuffle(&mut rng);
            Hospital { capacity: rng.gen_range(1..=3), prefs: a }
        })
        .collect();
    Instance::new_validated(hospitals, couples, singles).unwrap()
}

/// A random capacity-respecting matching.
pub fn random_matching(inst: &Instance, seed: u64) -> Matching {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut agents: Vec<Agent> = inst.agents().collect();
    agents.shuffle(&mut rng);
    let mut load = vec![0usize; inst.num_hospitals()];
    let mut m = Matching::empty(inst);
    for a in agents {
        let len = inst.agent_list_len(a);
        let p = rng.gen_range(0..=len);
        if p == len {
            continue;
        }
        let hs: Vec<HospitalId> = inst.agent_placement(a, p).iter().map(|x| x.1).collect();
        let fits = hs.iter().all(|&x| load[x.0] + hs.iter().filter(|&&y| y == x).count() <= inst.capacity(x));
        if fits {
            for x in hs {
                load[x.0] += 1;
            }
            m.set(a, Some(p));
        }
    }
    m
}

/// Blocking (agent, position, type) triples read straight off the
/// stability definition, without any counting shortcuts.
pub fn literal_blocking(
    inst: &Instance,
    m: &Matching,
    will_accept: bool,
) -> Vec<(Agent, usize, &'static str)> {
    let assignees = |x: HospitalId| -> Vec<ResidentId> {
        (0..inst.num_residents()).map(ResidentId).filter(|&y| m.hospital_of(inst, y) == Some(x)).collect()
    };
    let rank = |x: HospitalId, y: ResidentId| inst.rank(x, y).unwrap();
    let under = |x: HospitalId| assignees(x).len() < inst.capacity(x);
    let prefers_some = |x: HospitalId, y: ResidentId, except: Option<ResidentId>| {
        assignees(x).into_iter().any(|s| Some(s) != except && rank(x, y) < rank(x, s))
    };
    let mut out = Vec::new();
    for i in 0..inst.singles().len() {
        let ri = inst.single_resident(i);
        let cur = m.singles[i];
        for (p, &x) in inst.singles()[i].prefs.iter().enumerate() {
            let better = cur.is_none_or(|c| p < c);
            if better && (under(x) || prefers_some(x, ri, None)) {
                out.push((Agent::Single(i), p, "1"));
            }
        }
    }
    for i in 0..inst.couples().len() {
        let (ri, rj) = inst.couple_residents(i);
        let pairs = &inst.couples()[i].pairs;
        let cur = m.couples[i];
        for (p, &(hk, hl)) in pairs.iter().enumerate() {
            if !cur.is_none_or(|c| p < c) {
                continue;
            }
            let mut t = None;
            if let Some(c) = cur {
                let (mi, mj) = pairs[c];
                if mj == hl && (under(hk) || prefers_some(hk, ri, Some(rj))) {
                    t = Some("2a");
                }
                if mi == hk && (under(hl) || prefers_some(hl, rj, Some(ri))) {
                    assert!(t.is_none(), "2a and 2b at one position");
                    t = Some("2b");
                }
            }
            let third = match cur {
                None => true,
                Some(c) => pairs[c].0 != hk && pairs[c].1 != hl,
            };
            if third {
                if hk != hl {
                    let ok_k = under(hk) || prefers_some(hk, ri, None);
                    let ok_l = under(hl) || prefers_some(hl, rj, None);
                    if ok_k && ok_l {
                        t = Some("3a");
                    }
                } else {
                    let x = hk;
                    let ass = assignees(x);
                    let free = inst.capacity(x) - ass.len();
                    if free >= 2 {
                        t = Some("3b");
                    } else if free == 1 && (prefers_some(x, ri, None) || prefers_some(x, rj, None)) {
                        t = Some("3c");
                    } else if free == 0 {
                        let d = if will_accept {
                            // Both survive the top-c choice from assignees plus the couple.
                            let mut pool = ass.clone();
                            pool.push(ri);
                            pool.push(rj);
                            pool.sort_by_key(|&y| rank(x, y));
                            let chosen = &pool[..inst.capacity(x)];
                            chosen.contains(&ri) && chosen.contains(&rj)
                        } else {
                            ass.iter().any(|&s| {
                                rank(x, ri) < rank(x, s)
                                    && ass.iter().any(|&u| u != s && rank(x, rj) < rank(x, u))
                            })
                        };
                        if d {
                            t = Some("3d");
                        }
                    }
                }
            }
            if let Some(t) = t {
                out.push((Agent::Couple(i), p, t));
            }
        }
    }
    out
}

/// Every capacity-respecting matching of a small instance.
pub fn all_matchings(inst: &Instance) -> Vec<Matching> {
    let agents: Vec<Agent> = inst.agents().collect();
    let mut out = Vec::new();
    let mut load = vec![0usize; inst.num_hospitals()];
    let mut cur = Matching::empty(inst);
    fn rec(
        inst: &Instance,
        agents: &[Agent],
        i: usize,
        load: &mut Vec<usize>,
        cur: &mut Matching,
        out: &mut Vec<Matching>,
    ) {
        if i == agents.len() {
            out.push(cur.clone());
            return;
        }
        let a = agents[i];
        cur.set(a, None);
        rec(inst, agents, i + 1, load, cur, out);
        for p in 0..inst.agent_list_len(a) {
            let hs: Vec<HospitalId> = inst.agent_placement(a, p).iter().map(|x| x.1).collect();
            for &x in &hs {
                load[x.0] += 1;
            }
            if hs.iter().all(|&x| load[x.0] <= inst.capacity(x)) {
                cur.set(a, Some(p));
                rec(inst, agents, i + 1, load, cur, out);
                cur.set(a, None);
            }
            for &x in &hs {
                load[x.0] -= 1;
            }
        }
    }
    rec(inst, &agents, 0, &mut load, &mut cur, &mut out);
    out
}
