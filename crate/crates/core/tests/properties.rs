mod common;

use proptest::prelude::*;

use shadowlab::document::{from_json_str, to_json_string};
use shadowlab::expansivity::{
    gamma_plus, periodic_points, positive_expansivity_radius, restrict_to_core, surjective_core,
};
use shadowlab::generators::{gen_random, RandomMode};
use shadowlab::lattice::{edge_lattice, pair_lattice};
use shadowlab::shadowing::{decide_forward, decide_h, modulus};
use shadowlab::{Budget, FiniteSystem, PointId, ShadowingKind, Threshold};

fn system(max_points: usize) -> impl Strategy<Value = FiniteSystem> {
    (1u64..10_000, 2..=max_points, any::<bool>()).prop_map(|(seed, n, plane)| {
        let mode = if plane { RandomMode::Plane } else { RandomMode::Matrix };
        gen_random(seed, n, mode).expect("random system")
    })
}

fn edge_values(sys: &FiniteSystem) -> Vec<Threshold> {
    edge_lattice(sys).positive().cloned().collect()
}

fn pair_values(sys: &FiniteSystem) -> Vec<Threshold> {
    pair_lattice(sys).positive().cloned().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn balls_grow_with_radius(sys in system(8), i in 0usize..8, j in 0usize..8) {
        let vals = pair_values(&sys);
        let (a, b) = (&vals[i % vals.len()], &vals[j % vals.len()]);
        let (small, large) = if a <= b { (a, b) } else { (b, a) };
        for x in sys.ids() {
            let s = sys.ball(x, small).unwrap();
            prop_assert!(s.contains(x.0));
            prop_assert!(s.is_subset(&sys.ball(x, large).unwrap()));
        }
    }

    #[test]
    fn orbit_profiles_close_up(sys in system(10)) {
        for x in sys.ids() {
            let p = sys.orbit_profile(x).unwrap();
            prop_assert!(p.period >= 1);
            prop_assert!(p.preperiod + p.period <= sys.len());
            prop_assert_eq!(sys.iterate(x, p.preperiod + p.period), sys.iterate(x, p.preperiod));
            for k in 1..p.period {
                prop_assert_ne!(sys.iterate(x, p.preperiod + k), sys.iterate(x, p.preperiod));
            }
        }
    }

    #[test]
    fn documents_round_trip(sys in system(10)) {
        let text = to_json_string(&sys);
        let back = from_json_str(&text).unwrap();
        prop_assert_eq!(back.raw(), sys.raw());
        prop_assert_eq!(to_json_string(&back), text);
    }

    #[test]
    fn forward_verdicts_are_monotone(sys in system(7)) {
        let deltas = edge_values(&sys);
        let eps = pair_values(&sys);
        for e in [&eps[0], &eps[eps.len() / 2], &eps[eps.len() - 1]] {
            let holds: Vec<bool> = deltas
                .iter()
                .map(|d| decide_forward(&sys, e, d, Budget::default()).unwrap().holds())
                .collect();
            prop_assert!(holds.windows(2).all(|w| w[0] || !w[1]));
            let m = modulus(&sys, ShadowingKind::Forward, e, Budget::default()).unwrap();
            prop_assert!(m.modulus.is_unbounded() || edge_lattice(&sys).contains(&m.modulus));
            for (d, h) in deltas.iter().zip(&holds) {
                prop_assert_eq!(*h, d <= &m.modulus);
                if *h {
                    let larger = eps.last().filter(|x| *x > e);
                    if let Some(l) = larger {
                        prop_assert!(decide_forward(&sys, l, d, Budget::default()).unwrap().holds());
                    }
                }
            }
        }
    }

    #[test]
    fn automaton_matches_naive_enumeration(sys in system(4), i in 0usize..16, j in 0usize..16) {
        let eps = pair_values(&sys);
        let deltas = edge_values(&sys);
        let (e, d) = (&eps[i % eps.len()], &deltas[j % deltas.len()]);
        let fast = decide_forward(&sys, e, d, Budget::default()).unwrap();
        let slow = common::naive_forward_failure(&sys, e, d, 2 * sys.len());
        prop_assert_eq!(fast.holds(), slow.is_none());
    }

    #[test]
    fn exact_hit_implies_forward(sys in system(7), i in 0usize..16, j in 0usize..16) {
        let eps = pair_values(&sys);
        let deltas = edge_values(&sys);
        let (e, d) = (&eps[i % eps.len()], &deltas[j % deltas.len()]);
        if decide_h(&sys, e, d, Budget::default()).unwrap().holds() {
            prop_assert!(decide_forward(&sys, e, d, Budget::default()).unwrap().holds());
        }
    }

    #[test]
    fn gamma_sets_grow_and_stay_in_balls(sys in system(8)) {
        let vals = pair_values(&sys);
        for x in sys.ids() {
            let mut prev: Vec<PointId> = Vec::new();
            for r in &vals {
                let g = gamma_plus(&sys, x, r).unwrap();
                prop_assert!(g.members.contains(&x));
                prop_assert!(prev.iter().all(|y| g.members.contains(y)));
                let ball = sys.ball(x, r).unwrap();
                prop_assert!(g.members.iter().all(|y| ball.contains(y.0)));
                prev = g.members;
            }
        }
    }

    #[test]
    fn radii_nondecreasing_in_n(sys in system(8)) {
        let radii: Vec<Threshold> = (1..=4).map(|n| positive_expansivity_radius(&sys, n).unwrap()).collect();
        prop_assert!(radii.windows(2).all(|w| w[0] <= w[1]));
        for r in &radii {
            prop_assert!(r.is_unbounded() || pair_lattice(&sys).contains(r));
        }
    }

    #[test]
    fn core_is_invariant_and_periodic(sys in system(10)) {
        let core = surjective_core(&sys);
        let set = core.core_set(sys.len());
        prop_assert!(!core.core.is_empty());
        for x in &core.core {
            prop_assert!(set.contains(sys.image(*x).0));
        }
        prop_assert_eq!(set.to_vec(), periodic_points(&sys).to_vec());
        let restricted = restrict_to_core(&sys).unwrap();
        prop_assert!(restricted.is_surjective());
        prop_assert_eq!(restricted.len(), core.core.len());
    }
}
