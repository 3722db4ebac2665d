mod common;

use common::{family_out, var, worked_plan};
use proptest::prelude::*;
use qbn::graph::{Skeleton, Step};
use qbn::inference::{execute, infer, infer_with, plan, Plan};
use qbn::learning::{init_default, learn_batch};
use qbn::model::{BetaStat, NetworkStructure, Query, VarId, View};
use qbn::oracle::{build_joint, exact_beta, product_form_joint, random_dag, raw_network_error};
use qbn::transforms::RawNetwork;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn q(s: &NetworkStructure, t: &[(&str, &str)], e: &[(&str, &str)]) -> Query {
    Query::from_labels(s, t, e).unwrap()
}

#[test]
fn diagnostic_query_on_the_worked_example() {
    let f = family_out();
    let r = infer(&f.qbn, &q(&f.structure, &[("FO", "fo")], &[("LO", "lo"), ("HB", "hb")])).unwrap();
    assert!((r.stat.alpha - 15.08).abs() <= 0.01 && (r.stat.omega - 2.36).abs() <= 0.01, "{}", r.stat);
    assert!((r.mean - 16.0 / 18.0).abs() <= 0.03);
    assert!(!r.degenerate);
}

#[test]
fn worked_plan_and_automatic_plan_agree() {
    let f = family_out();
    let s = &f.structure;
    let query = q(s, &[("FO", "fo")], &[("LO", "lo"), ("HB", "hb")]);
    let hand = Plan::from_steps(s, &query, worked_plan(s)).unwrap();
    let a = infer_with(&f.qbn, &query, hand).unwrap();
    let b = infer(&f.qbn, &query).unwrap();
    assert!(a.stat.approx_eq(&b.stat, 1e-9), "{} vs {}", a.stat, b.stat);
}

#[test]
fn stored_cells_are_lookups() {
    let f = family_out();
    let s = &f.structure;
    let r = infer(&f.qbn, &q(s, &[("HB", "hb")], &[("DO", "do")])).unwrap();
    assert!(r.plan.is_lookup());
    assert_eq!(r.stat, BetaStat::raw(34.0, 4.0));
    let r = infer(&f.qbn, &q(s, &[("FO", "fo")], &[])).unwrap();
    assert_eq!(r.stat, BetaStat::raw(33.0, 69.0));
    assert!((r.mean - 33.0 / 102.0).abs() < 1e-15);
}

#[test]
fn every_stored_cell_comes_back_unchanged() {
    let f = family_out();
    let s = &f.structure;
    for v in s.variables() {
        let parents = s.parents(v.id);
        for row in 0..s.parent_rows(v.id) {
            let inst = qbn::model::row_decode(s, v.id, row).unwrap();
            let ev: Vec<_> = parents.iter().copied().zip(inst.assignments).collect();
            for k in 0..v.size() {
                let query = Query::new(s, vec![(v.id, k)], ev.clone()).unwrap();
                let r = infer(&f.qbn, &query).unwrap();
                assert_eq!(r.stat, f.qbn.cell(v.id, row, k, View::WithPrior).unwrap());
            }
        }
    }
}

#[test]
fn chain_marginal_removes_ancestors_in_order() {
    let s = qbn::format::parse_network("node A : a, na\nnode B : b, nb\nnode C : c, nc\nedge A -> B\nedge B -> C\n").unwrap();
    let p = plan(&s, &q(&s, &[("C", "c")], &[])).unwrap();
    let v = |n| var(&s, n);
    assert_eq!(
        p.steps,
        vec![
            Step::Removal { child: v("B"), parent: v("A") },
            Step::Removal { child: v("C"), parent: v("B") },
        ]
    );
}

#[test]
fn replaying_recorded_steps_reproduces_the_network() {
    let f = family_out();
    let query = q(&f.structure, &[("BP", "bp"), ("LO", "lo")], &[("HB", "not_hb")]);
    let p = plan(&f.structure, &query).unwrap();
    let (net, trace) = execute(&f.qbn, &p).unwrap();
    let mut replay = RawNetwork::from_learned(&f.qbn);
    for rec in &trace {
        replay.apply(&rec.step).unwrap();
    }
    assert_eq!(replay, net);
}

#[test]
fn empty_plan_leaves_the_network_alone() {
    let f = family_out();
    let query = q(&f.structure, &[("FO", "fo")], &[]);
    let (net, trace) = execute(&f.qbn, &Plan::from_steps(&f.structure, &query, vec![]).unwrap()).unwrap();
    assert!(trace.is_empty());
    assert_eq!(net, RawNetwork::from_learned(&f.qbn));
}

fn random_query(rng: &mut impl Rng, n: usize) -> (Vec<(VarId, usize)>, Vec<(VarId, usize)>) {
    let mut vars: Vec<usize> = (0..n).collect();
    vars.shuffle(rng);
    let nt = rng.random_range(1..=n.min(3));
    let ne = rng.random_range(0..=(n - nt).min(3));
    let pick = |xs: &[usize], rng: &mut dyn rand::RngCore| xs.iter().map(|&v| (VarId(v), rng.random_range(0..2))).collect();
    let t = pick(&vars[..nt], &mut *rng);
    let e = pick(&vars[nt..nt + ne], &mut *rng);
    (t, e)
}

#[test]
fn inference_matches_the_joint_on_product_form_counts() {
    let mut checked = 0;
    for seed in 0..150u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(2..=5);
        let s = random_dag(&mut rng, n, 0.5, 3);
        let joint = product_form_joint(&s, &mut rng).unwrap();
        let data = joint.to_dataset(&s).unwrap();
        let qbn = learn_batch(&init_default(&s), &data).unwrap();
        for _ in 0..4 {
            let (t, e) = random_query(&mut rng, n);
            let query = Query::new(&s, t, e).unwrap();
            let r = infer(&qbn, &query).unwrap();
            let exact = exact_beta(&joint, &query, true);
            assert!(r.stat.approx_eq(&exact, 1e-9), "seed {seed} {}: {} vs {exact}", query.display(&s), r.stat);
            // every intermediate network is exact as well
            let mut net = RawNetwork::from_learned(&qbn);
            for step in &r.plan.steps {
                net.apply(step).unwrap();
                assert!(raw_network_error(&net, &joint) < 1e-9);
            }
            checked += 1;
        }
    }
    assert!(checked >= 600);
}

#[test]
fn worked_example_error_is_small() {
    let f = family_out();
    let joint = build_joint(&f.structure, &f.data).unwrap();
    let query = q(&f.structure, &[("DO", "do")], &[("FO", "fo"), ("HB", "hb")]);
    let r = infer(&f.qbn, &query).unwrap();
    assert!((r.stat.alpha - 20.25).abs() < 1e-9);
    assert!((r.stat.omega - 1.34).abs() < 0.01);
    assert_eq!(exact_beta(&joint, &query, true), BetaStat::raw(20.0, 2.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]
    #[test]
    fn plans_are_sound_on_random_dags(seed in any::<u64>(), n in 1usize..=8, p in 0.1f64..0.8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_dag(&mut rng, n, p, 4);
        let (t, e) = random_query(&mut rng, n);
        let query = Query::new(&s, t, e).unwrap();
        let plan = plan(&s, &query).unwrap();
        let mut skel = Skeleton::from_structure(&s);
        for step in &plan.steps {
            prop_assert!(skel.apply(step).is_ok(), "{:?}", step);
        }
        // query variables all survive
        for v in query.target_vars().iter().chain(&query.evidence_vars()) {
            prop_assert!(skel.key_of(*v).is_some());
        }
        let key = skel.key_of(query.targets()[0].0).unwrap();
        prop_assert_eq!(&skel.node(key).head, &query.target_vars());
        prop_assert_eq!(&skel.node(key).parents, &query.evidence_vars());
    }
}
