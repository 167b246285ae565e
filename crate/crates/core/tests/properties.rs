mod common;

use proptest::prelude::*;

use liftfg::benchgen::{generate_instance, remove_potentials, select_queries, GenParams};
use liftfg::cp::{cp_round, initial_colours};
use liftfg::inference::{
    counting_bp, joint_enumeration, kl_divergence, loopy_bp, variable_elimination,
    DEFAULT_BP_ITERS, DEFAULT_STATE_CAP,
};
use liftfg::lifg::possibly_identical;
use liftfg::{parse_model, run_cp, run_lifg, serialize_model, CpOptions, PositionMode, RvId};

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 48,
        ..ProptestConfig::default()
    }
}

fn small_d() -> impl Strategy<Value = usize> {
    prop::sample::select(vec![2usize, 4, 8])
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn serialization_round_trips(seed in any::<u64>(), evidence in any::<bool>()) {
        let g = common::random_graph(seed, 10, 4, evidence);
        let text = serialize_model(&g);
        let back = parse_model(&text).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(serialize_model(&back), text);
    }

    #[test]
    fn lifting_known_graph_matches_colour_passing(d in small_d(), seed in any::<u64>(), literal in any::<bool>()) {
        let g = generate_instance(&GenParams::new(d, seed)).unwrap().graph;
        let opts = CpOptions {
            position_mode: if literal { PositionMode::Literal } else { PositionMode::Canonical },
            ..CpOptions::default()
        };
        let out = run_lifg(&g, 0.0, &opts).unwrap();
        prop_assert_eq!(out.partition, run_cp(&g, &opts));
        prop_assert!(out.report.records.is_empty());
    }

    #[test]
    fn rounds_only_refine(seed in any::<u64>()) {
        let g = common::random_graph(seed, 12, 3, true);
        let opts = CpOptions::default();
        let mut c = initial_colours(&g, &opts);
        for _ in 0..g.num_rvs() + 1 {
            let next = cp_round(&g, &c, &opts);
            prop_assert!(next.partition().refines(&c.partition()));
            c = next;
        }
        // the fixed point is what run_cp reports
        prop_assert_eq!(c.partition(), run_cp(&g, &opts));
    }

    #[test]
    fn elimination_matches_enumeration(seed in any::<u64>()) {
        let g = common::random_graph(seed, 9, 3, true);
        for q in g.rv_ids() {
            let e = joint_enumeration(&g, q, DEFAULT_STATE_CAP).unwrap();
            let v = variable_elimination(&g, q).unwrap();
            prop_assert!(e.max_abs_diff(&v) <= 1e-10, "{:?} vs {:?}", e, v);
            prop_assert!((v.probs.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn bp_exact_on_generated_forests(d in small_d(), seed in any::<u64>()) {
        let g = generate_instance(&GenParams::new(d, seed)).unwrap().graph;
        let bp = loopy_bp(&g, DEFAULT_BP_ITERS).unwrap();
        for q in g.rv_ids() {
            let v = variable_elimination(&g, q).unwrap();
            prop_assert!(bp[q.0].max_abs_diff(&v) <= 1e-9);
        }
    }

    #[test]
    fn counting_bp_matches_ground_bp(d in small_d(), seed in any::<u64>(), iters in 0usize..12) {
        let p = GenParams::new(d, seed);
        let g = generate_instance(&p).unwrap().graph;
        let out = run_lifg(&remove_potentials(&g, &p).graph, 0.0, &CpOptions::default()).unwrap();
        let m = out.lifted.unwrap();
        let ground = loopy_bp(&out.completed, iters).unwrap();
        let lifted = counting_bp(&m, iters).unwrap();
        for r in out.completed.rv_ids() {
            prop_assert!(lifted[m.supervar_of(r)].max_abs_diff(&ground[r.0]) <= 1e-9);
        }
    }

    #[test]
    fn evidence_equals_slicing(seed in any::<u64>()) {
        let mut g = common::random_graph(seed, 8, 3, false);
        g.set_evidence(RvId(0), Some(1));
        let (sliced, map) = common::slice_out(&g, RvId(0));
        let bp_g = loopy_bp(&g, 30).unwrap();
        let bp_s = loopy_bp(&sliced, 30).unwrap();
        for r in g.rv_ids().skip(1) {
            let s = map[r.0].unwrap();
            let a = variable_elimination(&g, r).unwrap();
            let b = variable_elimination(&sliced, s).unwrap();
            prop_assert!(a.max_abs_diff(&b) <= 1e-12);
            let e = joint_enumeration(&sliced, s, DEFAULT_STATE_CAP).unwrap();
            prop_assert!(a.max_abs_diff(&e) <= 1e-10);
            prop_assert!(bp_g[r.0].max_abs_diff(&bp_s[s.0]) <= 1e-12);
        }
    }

    #[test]
    fn kl_non_negative(seed in any::<u64>()) {
        let g = common::random_graph(seed, 6, 3, false);
        let ms: Vec<_> = g.rv_ids().map(|q| variable_elimination(&g, q).unwrap()).collect();
        for a in &ms {
            prop_assert!(kl_divergence(&a.probs, &a.probs).unwrap() <= 1e-12);
            for b in ms.iter().filter(|b| b.probs.len() == a.probs.len()) {
                prop_assert!(kl_divergence(&a.probs, &b.probs).unwrap() >= 0.0);
            }
        }
    }

    #[test]
    fn generated_instances_are_valid(d in prop::sample::select(vec![2usize, 4, 8, 16, 32]), seed in any::<u64>()) {
        let p = GenParams::new(d, seed);
        let inst = generate_instance(&p).unwrap();
        let g = &inst.graph;
        prop_assert!(liftfg::validate(g).is_empty());
        prop_assert!(inst.respects_cohorts(&run_cp(g, &CpOptions::default())));
        let out = run_lifg(g, 0.0, &CpOptions::default()).unwrap();
        for f in &out.lifted.unwrap().superfactors {
            let mut args = f.args.clone();
            args.sort_unstable();
            args.dedup();
            prop_assert_eq!(args.len(), f.args.len());
        }
        let queries = select_queries(g, &p, d);
        prop_assert_eq!(queries.len(), d);
    }

    #[test]
    fn removal_leaves_known_twins(d in prop::sample::select(vec![4usize, 8, 16]), seed in any::<u64>()) {
        let p = GenParams::new(d, seed);
        let g = generate_instance(&p).unwrap().graph;
        let r = remove_potentials(&g, &p);
        prop_assert_eq!(r.graph.num_unknown(), r.removed.len());
        for &f in &r.removed {
            let twin = r
                .graph
                .factor_ids()
                .any(|h| h != f && !r.graph.factor(h).is_unknown() && possibly_identical(&g, f, h, 1e-9));
            prop_assert!(twin);
        }
        let out = run_lifg(&r.graph, 0.0, &CpOptions::default()).unwrap();
        prop_assert_eq!(out.completed.num_unknown(), 0);
    }
}
