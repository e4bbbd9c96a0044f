use hrc_core::error::Severity;
use hrc_core::generate::{
    cube, figure2_instance, k33, k4, petersen, petersen_standard, prism, random_instance, vc3_reduce,
    vc_to_matching, CubicGraph, GenParams,
};
use hrc_core::model::Instance;
use hrc_core::preprocess::is_212;
use hrc_core::stability::{is_stable, StabilityMode};
use hrc_core::{serialize_instance, GenError};
use proptest::prelude::*;

fn no_errors(inst: &Instance) -> bool {
    inst.validate().iter().all(|v| v.severity != Severity::Error)
}

fn exp1_params() -> GenParams {
    GenParams { residents: 50, couples: 5, hospitals: 5, posts: 50, min_len: 3, max_len: 5, skew: 6.0 }
}

#[test]
fn random_instance_shape() {
    let p = exp1_params();
    for seed in 0..20 {
        let inst = random_instance(&p, seed).unwrap();
        assert_eq!(inst.num_residents(), 50);
        assert_eq!(inst.couples().len(), 5);
        assert_eq!(inst.num_hospitals(), 5);
        assert_eq!(inst.total_posts(), 50);
        assert!(inst.hospitals().iter().all(|h| h.capacity >= 1));
        for c in inst.couples() {
            assert!((3..=5).contains(&c.pairs.len()));
        }
        for s in inst.singles() {
            assert!((3..=5).contains(&s.prefs.len()));
        }
        assert!(no_errors(&inst));
    }
}

#[test]
fn random_instance_is_deterministic() {
    let p = exp1_params();
    let a = serialize_instance(&random_instance(&p, 42).unwrap());
    let b = serialize_instance(&random_instance(&p, 42).unwrap());
    let c = serialize_instance(&random_instance(&p, 43).unwrap());
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn rejects_bad_params() {
    let base = exp1_params();
    let bad = [
        GenParams { couples: 26, ..base.clone() },
        GenParams { posts: 4, ..base.clone() },
        GenParams { min_len: 0, ..base.clone() },
        GenParams { min_len: 4, max_len: 3, ..base.clone() },
        GenParams { max_len: 6, ..base.clone() },
        GenParams { hospitals: 0, ..base.clone() },
        GenParams { skew: 0.5, ..base.clone() },
    ];
    for p in bad {
        assert!(matches!(random_instance(&p, 1), Err(GenError::Params(_))), "{p:?}");
    }
}

#[test]
fn popularity_follows_weights() {
    // With many hospitals and short lists, sampling without replacement
    // barely distorts the weights, so the most popular hospital should
    // attract about `skew` times the applicants of the least popular.
    let p = GenParams {
        residents: 500,
        couples: 0,
        hospitals: 50,
        posts: 500,
        min_len: 3,
        max_len: 5,
        skew: 6.0,
    };
    let (mut lo, mut hi) = (0usize, 0usize);
    for seed in 0..20 {
        let inst = random_instance(&p, seed).unwrap();
        lo += inst.hospitals()[0].prefs.len();
        hi += inst.hospitals()[49].prefs.len();
    }
    let ratio = hi as f64 / lo as f64;
    assert!((4.0..=8.0).contains(&ratio), "ratio {ratio}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_instances_are_valid(
        seed in any::<u64>(),
        hospitals in 1usize..12,
        extra in 0usize..40,
        couples in 0usize..6,
        singles in 0usize..20,
        lens in (1usize..4, 0usize..3),
    ) {
        let min_len = lens.0.min(hospitals);
        let max_len = (lens.0 + lens.1).min(hospitals);
        let p = GenParams {
            residents: 2 * couples + singles,
            couples,
            hospitals,
            posts: hospitals + extra,
            min_len,
            max_len,
            skew: 6.0,
        };
        let inst = random_instance(&p, seed).unwrap();
        prop_assert!(no_errors(&inst));
        prop_assert_eq!(inst.total_posts(), hospitals + extra);
        let (a, b, _) = inst.profile();
        prop_assert!(a <= max_len && b <= max_len);
    }
}

#[test]
fn figure2_shape() {
    let inst = figure2_instance(&[1, 0, 2]).unwrap();
    assert_eq!(inst.couples().len(), 3);
    assert_eq!(inst.singles().len(), 3);
    assert_eq!(inst.num_hospitals(), 6);
    assert!(inst.hospitals().iter().all(|h| h.capacity == 1));
    assert!(is_212(&inst));
    assert!(no_errors(&inst));
}

#[test]
fn figure2_rejects_degenerate() {
    assert!(figure2_instance(&[]).is_err());
    assert!(figure2_instance(&[0]).is_err());
    assert!(figure2_instance(&[0, 0]).is_ok());
}

#[test]
fn named_graphs_are_cubic() {
    for (g, mc) in [(k4(), 3), (k33(), 3), (prism(), 4), (cube(), 4), (petersen(), 6)] {
        let n = g.num_vertices();
        assert_eq!(g.edges().len(), 3 * n / 2);
        assert_eq!(g.min_cover_size(), mc);
        // Labelled so that a minimum cover is a prefix.
        let prefix: Vec<usize> = (0..mc).collect();
        assert!(g.is_cover(&prefix));
    }
    assert_eq!(petersen_standard().min_cover_size(), 6);
    assert!(!petersen_standard().is_cover(&[0, 1, 2, 3, 4, 5]));
}

#[test]
fn cubic_graph_rejects_bad_input() {
    assert!(matches!(CubicGraph::new(4, &[(0, 1)]), Err(GenError::NotCubic(_))));
    assert!(matches!(CubicGraph::new(2, &[(0, 0)]), Err(GenError::NotCubic(_))));
    assert!(matches!(
        CubicGraph::new(4, &[(0, 1), (0, 1), (0, 2), (0, 3), (1, 2), (2, 3)]),
        Err(GenError::NotCubic(_))
    ));
}

#[test]
fn vc3_counts() {
    for (g, k) in [(k4(), 2), (k4(), 3), (petersen(), 6)] {
        let n = g.num_vertices();
        let m = g.edges().len();
        let red = vc3_reduce(&g, k).unwrap();
        assert_eq!(red.instance.num_residents(), 8 * n + 4 * m);
        assert_eq!(red.instance.num_hospitals(), 4 * n + 2 * m);
        assert_eq!(red.instance.couples().len(), 3 * n + 2 * m);
        assert!(red.instance.hospitals().iter().all(|h| h.capacity == 1));
        assert!(no_errors(&red.instance));
        let (_, b, _) = red.instance.profile();
        assert_eq!(b, 1);
    }
    assert_eq!(vc3_reduce(&k4(), 3).unwrap().instance.num_residents(), 56);
    assert_eq!(vc3_reduce(&petersen(), 6).unwrap().instance.num_residents(), 140);
}

#[test]
fn vc3_rejects_bad_k() {
    assert!(vc3_reduce(&k4(), 0).is_err());
    assert!(vc3_reduce(&k4(), 5).is_err());
}

#[test]
fn cover_matching_stable_only_for_prefix_cover() {
    let g = k4();
    let red = vc3_reduce(&g, 3).unwrap();
    for cover in [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]] {
        let m = vc_to_matching(&g, &red, &cover).unwrap();
        m.check(&red.instance).unwrap();
        // Every hospital of the gadget is filled.
        assert_eq!(m.size(), red.instance.num_hospitals());
        let stable = is_stable(&red.instance, &m, StabilityMode::Def1);
        assert_eq!(stable, cover == [0, 1, 2], "cover {cover:?}");
    }
}

#[test]
fn cover_matching_petersen() {
    let g = petersen();
    let red = vc3_reduce(&g, 6).unwrap();
    let m = vc_to_matching(&g, &red, &[0, 1, 2, 3, 4, 5]).unwrap();
    assert!(is_stable(&red.instance, &m, StabilityMode::Def1));
}

#[test]
fn cover_matching_rejects_non_cover() {
    let g = k4();
    let red = vc3_reduce(&g, 2).unwrap();
    assert!(matches!(vc_to_matching(&g, &red, &[0, 1]), Err(GenError::NotACover(2))));
    let red3 = vc3_reduce(&g, 3).unwrap();
    assert!(matches!(vc_to_matching(&g, &red3, &[0, 1]), Err(GenError::NotACover(3))));
}
