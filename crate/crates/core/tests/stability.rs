mod common;

use common::*;
use hrc_core::model::{Agent, Matching};
use hrc_core::stability::{
    blocking_pairs, exc_partner, hosp_would_prefer, hosp_would_prefer2, is_stable, BlockingType,
    StabilityMode,
};
use proptest::prelude::*;

#[test]
fn fig5_def1_has_one_3d_pair() {
    let inst = fig5();
    let m = fig5_matching(&inst);
    let bp = blocking_pairs(&inst, &m, StabilityMode::Def1);
    assert_eq!(bp.len(), 1);
    assert_eq!(bp[0].agent, Agent::Couple(0));
    assert_eq!(bp[0].position, 0);
    assert!(bp[0].types.contains(BlockingType::ThreeD));
    assert_eq!(bp[0].describe(&inst), "couple 1 pos 1 type 3d");
    assert!(!is_stable(&inst, &m, StabilityMode::Def1));
}

#[test]
fn fig5_will_accept_is_stable() {
    let inst = fig5();
    let m = fig5_matching(&inst);
    assert!(blocking_pairs(&inst, &m, StabilityMode::WillAccept).is_empty());
}

#[test]
fn fig5_predicates() {
    let inst = fig5();
    let m = fig5_matching(&inst);
    // Ranks below are zero-based: rank 1 in the text is 0 here.
    assert!(hosp_would_prefer(&inst, &m, h(1), 0));
    assert!(hosp_would_prefer(&inst, &m, h(1), 2));
    // Only r3 ranks above rank 4 among h1's assignees; 1 < 2.
    assert!(hosp_would_prefer(&inst, &m, h(1), 3));
    assert!(hosp_would_prefer2(&inst, &m, h(1), 0));
    assert!(!hosp_would_prefer2(&inst, &m, h(1), 3));
    assert!(exc_partner(&inst, &m, h(1), h(1), 0, 2));
    assert!(exc_partner(&inst, &m, h(2), h(3), 0, 0));
    assert!(exc_partner(&inst, &m, h(1), h(1), 2, 0));
}

#[test]
fn capacity_one_never_passes_second_predicate() {
    let inst = fig5();
    let m = Matching::empty(&inst);
    assert!(!hosp_would_prefer2(&inst, &m, h(2), 0));
    assert!(!hosp_would_prefer2(&inst, &m, h(3), 0));
}

#[test]
fn empty_matching_blocks() {
    for seed in 0..50 {
        let inst = tiny_instance(seed, 8);
        let m = Matching::empty(&inst);
        let any_list = inst.agents().any(|a| {
            (0..inst.agent_list_len(a)).any(|p| {
                // A capacity-one (h,h) pair can never be taken.
                let hs: Vec<_> = inst.agent_placement(a, p).iter().map(|x| x.1).collect();
                !(hs.len() == 2 && hs[0] == hs[1] && inst.capacity(hs[0]) == 1)
            })
        });
        assert_eq!(!blocking_pairs(&inst, &m, StabilityMode::Def1).is_empty(), any_list);
    }
}

fn as_triples(
    inst: &hrc_core::Instance,
    m: &Matching,
    mode: StabilityMode,
) -> Vec<(Agent, usize, &'static str)> {
    let mut v: Vec<_> = blocking_pairs(inst, m, mode)
        .into_iter()
        .map(|b| {
            let t = b.types.iter().next().unwrap();
            let label = match t {
                BlockingType::One => "1",
                BlockingType::TwoA => "2a",
                BlockingType::TwoB => "2b",
                BlockingType::ThreeA => "3a",
                BlockingType::ThreeB => "3b",
                BlockingType::ThreeC => "3c",
                BlockingType::ThreeD => "3d",
            };
            assert_eq!(b.types.iter().count(), 1);
            (b.agent, b.position, label)
        })
        .collect();
    v.sort_by_key(|x| format!("{:?}", x));
    v
}

fn sorted(mut v: Vec<(Agent, usize, &'static str)>) -> Vec<(Agent, usize, &'static str)> {
    v.sort_by_key(|x| format!("{:?}", x));
    v
}

#[test]
fn matches_literal_definition_exhaustively() {
    // Every matching of 150 small instances, both modes.
    for seed in 0..150 {
        let inst = tiny_instance(seed, 6);
        for m in all_matchings(&inst) {
            for (mode, wa) in [(StabilityMode::Def1, false), (StabilityMode::WillAccept, true)] {
                assert_eq!(
                    as_triples(&inst, &m, mode),
                    sorted(literal_blocking(&inst, &m, wa)),
                    "seed {seed} mode {mode:?} matching {m:?}"
                );
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn matches_literal_definition(seed in any::<u64>(), mseed in any::<u64>()) {
        let inst = tiny_instance(seed, 10);
        let m = random_matching(&inst, mseed);
        prop_assert_eq!(as_triples(&inst, &m, StabilityMode::Def1), sorted(literal_blocking(&inst, &m, false)));
        prop_assert_eq!(as_triples(&inst, &m, StabilityMode::WillAccept), sorted(literal_blocking(&inst, &m, true)));
    }

    #[test]
    fn will_accept_flags_are_def1_flags(seed in any::<u64>(), mseed in any::<u64>()) {
        let inst = tiny_instance(seed, 10);
        let m = random_matching(&inst, mseed);
        let d1 = blocking_pairs(&inst, &m, StabilityMode::Def1);
        let wa = blocking_pairs(&inst, &m, StabilityMode::WillAccept);
        for b in &wa {
            prop_assert!(d1.iter().any(|x| x.agent == b.agent && x.position == b.position));
        }
        // Only the full-hospital couple case may differ.
        for b in &d1 {
            if !b.types.contains(BlockingType::ThreeD) {
                prop_assert!(wa.contains(b));
            }
        }
    }

    #[test]
    fn single_flag_iff_predicate(seed in any::<u64>(), mseed in any::<u64>()) {
        let inst = tiny_instance(seed, 10);
        let m = random_matching(&inst, mseed);
        let bp = blocking_pairs(&inst, &m, StabilityMode::Def1);
        for (i, s) in inst.singles().iter().enumerate() {
            let r = inst.single_resident(i);
            for (p, &x) in s.prefs.iter().enumerate() {
                let worse_off = m.singles[i].is_none_or(|c| p < c);
                let q = inst.rank(x, r).unwrap();
                // The capacity shortcut can only fire when the count test does.
                let pred = worse_off && hosp_would_prefer(&inst, &m, x, q);
                let flagged = bp.iter().any(|b| b.agent == Agent::Single(i) && b.position == p);
                prop_assert_eq!(flagged, pred);
            }
        }
    }

    #[test]
    fn blocking_pairs_is_deterministic(seed in any::<u64>(), mseed in any::<u64>()) {
        let inst = tiny_instance(seed, 10);
        let m = random_matching(&inst, mseed);
        prop_assert_eq!(
            blocking_pairs(&inst, &m, StabilityMode::Def1),
            blocking_pairs(&inst, &m, StabilityMode::Def1)
        );
    }
}
