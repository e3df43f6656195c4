//! Acceptance criteria, one PASS/FAIL line each (`cargo test --test acceptance -- --nocapture`).
//!
//! Two criteria are red by construction and listed in `KNOWN_RED`; the test
//! fails if any other criterion is red or if a known-red one turns green, so
//! a change in either direction is noticed.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use proptest::test_runner::{Config, TestRunner};
use rand::{rngs::StdRng, Rng, SeedableRng};

use locsym_cli::counting::counting_report;
use locsym_cli::pipeline::{analyse, check, CheckOptions, Claim};
use locsym_core::balance::{
    is_balance_relation, largest_balance, representatives, representatives_unchecked, Similarity,
};
use locsym_core::bundled::{load, BUNDLED};
use locsym_core::compositional::{
    all_nodes_invariant, global_invariant_oracle, invariant_for_balance, CompositionalInvariant,
    DEFAULT_STATE_CAP,
};
use locsym_core::dsl::ModelDocument;
use locsym_core::mucalc::holds;
use locsym_core::relations::{
    beta_label_map, check_bisimulation_up_to, check_bisimulation_up_to_beta, check_cross_instance,
    check_local_global_bisimulation, check_local_simulation, check_outward_facing, RelationError,
};
use locsym_core::spaces::{build_local_space, PropositionSet};
use locsym_core::tiles::{exactly_on_edges, generate, Family};
use locsym_core::{NodeId, ProcessNetwork};

/// Red criteria, with the reason recorded in the project notes.
/// 6: the local space of a single-token ring admits a two-token neighborhood
///    that no reachable global state has, so the local-global bisimulation
///    fails on outward-facing single-token models.
/// 11: for m = 1 the counter size is 1, never above 2^1, so "more than 2^m
///    exactly when n > 2m" fails for n = 3..=20.
const KNOWN_RED: &[u32] = &[6, 11];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

struct Model {
    name: &'static str,
    doc: ModelDocument,
    inv: CompositionalInvariant,
}

impl Model {
    fn net(&self) -> &ProcessNetwork {
        &self.doc.networks[0]
    }
}

fn bundled() -> Vec<Model> {
    BUNDLED
        .iter()
        .map(|(file, _)| {
            let doc = load(file).unwrap().unwrap();
            let (_, inv) = analyse(&doc.networks[0]).unwrap();
            Model {
                name: file.trim_end_matches(".lmu"),
                doc,
                inv,
            }
        })
        .collect()
}

fn props(net: &ProcessNetwork, n: NodeId) -> PropositionSet {
    PropositionSet::for_template(net.template(n))
}

fn ring(model: &str, n: usize, tokens: usize) -> ProcessNetwork {
    let doc = load(model).unwrap().unwrap();
    let net = generate(&doc.tile_sets[0], Family::Ring(n)).unwrap();
    net.with_initially(Some(exactly_on_edges(&net, tokens, "tok"))).unwrap()
}

fn within(elapsed: Duration, limit: f64) -> bool {
    elapsed.as_secs_f64() < limit
}

fn c1_token_ring_mutex() -> Outcome {
    let start = Instant::now();
    let doc = load("ring3").unwrap().unwrap();
    let opts = CheckOptions {
        node: None,
        oracle: Some(DEFAULT_STATE_CAP),
    };
    let r = check(&doc, "mutex", &opts).unwrap();
    let elapsed = start.elapsed();
    let [v] = &r.verdicts[..] else {
        return outcome(false, format!("{} representatives", r.verdicts.len()));
    };
    let o = v.oracle.as_ref().unwrap();
    let pass = v.local && v.claim == Claim::HoldsGlobally && o.global && o.agrees && within(elapsed, 1.0);
    outcome(
        pass,
        format!(
            "local {} on {} states, claim {:?}, global {} on {} states, {:.3} s",
            v.local, v.local_states, v.claim, o.global, o.global_states,
            elapsed.as_secs_f64()
        ),
    )
}

fn c2_outward_facing() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut pairs = 0;
    for n in [3, 4, 5] {
        let net = ring("ring3", n, 1);
        let (_, inv) = analyse(&net).unwrap();
        for m in net.node_ids() {
            for &k in net.neighbors(m) {
                pairs += 1;
                ok &= check_outward_facing(&net, inv.all(), k, m).unwrap().holds;
            }
        }
    }
    let doc = load("non_outward").unwrap().unwrap();
    let net = &doc.networks[0];
    let (_, inv) = analyse(net).unwrap();
    let v = check_outward_facing(net, inv.all(), NodeId(1), NodeId(0)).unwrap();
    let refuted = !v.holds && v.counterexample.is_some();
    let elapsed = start.elapsed();
    outcome(
        ok && refuted && within(elapsed, 5.0),
        format!(
            "{pairs} ring pairs outward-facing: {ok}; non_outward refuted with counterexample: {refuted}; {:.2} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn c3_invariant_oracle(models: &[Model]) -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    let mut checked = 0;
    for m in models {
        let r = global_invariant_oracle(m.net(), m.inv.all(), DEFAULT_STATE_CAP).unwrap();
        checked += 1;
        if !r.holds() {
            bad.push(m.name);
        }
    }
    let elapsed = start.elapsed();
    outcome(
        bad.is_empty() && within(elapsed, 60.0),
        format!("{checked} models, counterexamples in {bad:?}, {:.2} s", elapsed.as_secs_f64()),
    )
}

fn c4_transferred_fixpoint(models: &[Model]) -> Outcome {
    let bad: Vec<&str> = models
        .iter()
        .filter(|m| all_nodes_invariant(m.net()).unwrap().all() != m.inv.all())
        .map(|m| m.name)
        .collect();
    outcome(bad.is_empty(), format!("{} models, mismatches in {bad:?}", models.len()))
}

fn c5_bisimulation_up_to_beta(models: &[Model]) -> Outcome {
    let mut triples = 0;
    let mut failed = 0;
    for m in models {
        let net = m.net();
        for s in largest_balance(net).unwrap().iter() {
            triples += 1;
            let v = check_bisimulation_up_to_beta(net, m.inv.all(), s, &props(net, s.m), &props(net, s.n)).unwrap();
            failed += usize::from(!v.holds);
        }
    }
    let mut rng = StdRng::seed_from_u64(5);
    let mut caught = 0;
    for _ in 0..50 {
        let m = &models[rng.gen_range(0..models.len())];
        let net = m.net();
        let b = largest_balance(net).unwrap();
        let all: Vec<&Similarity> = b.iter().collect();
        let s = all[rng.gen_range(0..all.len())];
        let hm = build_local_space(net, m.inv.all(), s.m, &props(net, s.m)).unwrap();
        let hn = build_local_space(net, m.inv.all(), s.n, &props(net, s.n)).unwrap();
        let vm = s.var_map(net).unwrap();
        let mutant = hm.without_transition(rng.gen_range(0..hm.transitions().len()));
        let v = check_bisimulation_up_to(&mutant, &hn, |x| vm.apply(x), &beta_label_map(net, s));
        caught += usize::from(!v.holds && v.counterexample.is_some());
    }
    outcome(
        failed == 0 && caught == 50,
        format!("{triples} triples, {failed} failing; mutations caught {caught}/50"),
    )
}

fn c6_local_global(models: &[Model]) -> Outcome {
    let mut sim_fail = Vec::new();
    let mut bisim_fail = Vec::new();
    let mut refused_non_outward = false;
    for m in models {
        let net = m.net();
        for n in net.node_ids() {
            let p = props(net, n);
            if !check_local_simulation(net, m.inv.all(), n, &p, DEFAULT_STATE_CAP).unwrap().holds {
                sim_fail.push(format!("{}:{}", m.name, net.node(n).name));
            }
            match check_local_global_bisimulation(net, m.inv.all(), n, &p, DEFAULT_STATE_CAP) {
                Ok(v) if !v.holds => bisim_fail.push(format!("{}:{}", m.name, net.node(n).name)),
                Ok(_) => {}
                Err(RelationError::NotOutwardFacing { .. }) => {
                    refused_non_outward |= m.name == "non_outward";
                }
                Err(e) => bisim_fail.push(format!("{}:{}: {e}", m.name, net.node(n).name)),
            }
        }
    }
    let failing_models: BTreeSet<&str> = bisim_fail.iter().map(|s| s.split(':').next().unwrap()).collect();
    outcome(
        sim_fail.is_empty() && bisim_fail.is_empty() && refused_non_outward,
        format!(
            "simulation failures {sim_fail:?}; bisimulation fails on outward-facing {failing_models:?}; non_outward refused: {refused_non_outward}"
        ),
    )
}

fn c7_verdicts_agree_within_classes(models: &[Model]) -> Outcome {
    let mut checks = 0;
    let mut bad = Vec::new();
    for m in models {
        let net = m.net();
        for (name, f) in &m.doc.formulas {
            for class in &m.inv.scheme().classes {
                let verdicts: BTreeSet<Result<bool, String>> = class
                    .iter()
                    .map(|&n| {
                        let tpl = net.template(n);
                        let phi = f.resolve(tpl).map_err(|e| e.to_string())?;
                        let p = PropositionSet::for_formulas(tpl, [&phi]).map_err(|e| e.to_string())?;
                        let h = build_local_space(net, m.inv.all(), n, &p).map_err(|e| e.to_string())?;
                        holds(&phi, &h).map_err(|e| e.to_string())
                    })
                    .collect();
                checks += 1;
                if verdicts.len() != 1 || verdicts.iter().any(Result::is_err) {
                    bad.push(format!("{}:{name}", m.name));
                }
            }
        }
    }
    outcome(bad.is_empty(), format!("{checks} (formula, class) pairs, disagreements {bad:?}"))
}

fn c8_class_counts() -> Outcome {
    let mut bad = Vec::new();
    let mut cases = Vec::new();
    for n in [4, 6, 8] {
        cases.push(("red_black_ring", Family::RedBlackRing(n), 2));
    }
    for n in 2..=8 {
        cases.push(("ring3", Family::Ring(n), 1));
    }
    for (w, h) in [(3, 3), (3, 4), (4, 3), (4, 4)] {
        cases.push(("torus_tile", Family::Torus(w, h), 1));
    }
    for (model, family, want) in &cases {
        let doc = load(model).unwrap().unwrap();
        let net = generate(&doc.tile_sets[0], *family).unwrap();
        let b = largest_balance(&net).unwrap();
        let got = representatives(&net, &b).unwrap().classes.len();
        if got != *want {
            bad.push(format!("{family:?}: {got}"));
        }
    }
    outcome(bad.is_empty(), format!("{} networks, wrong counts {bad:?}", cases.len()))
}

fn c9_two_token_rings() -> Outcome {
    let doc = load("ring_2tok_4").unwrap().unwrap();
    let tiles = &doc.tile_sets[0];
    let space = |n: usize| {
        let net = ring("ring_2tok_4", n, 2);
        let inv = invariant_for_balance(&net, &tiles.induced_balance(&net).unwrap()).unwrap();
        build_local_space(&net, inv.all(), NodeId(0), &props(&net, NodeId(0))).unwrap()
    };
    let (h3, h4, h6) = (space(3), space(4), space(6));
    let four_six = check_cross_instance(&h4, &h6, NodeId(0));
    let three_four = check_cross_instance(&h3, &h4, NodeId(0));
    let reason = three_four.counterexample.as_ref().map_or("-", |c| c.reason.as_str());
    outcome(
        four_six.holds && !three_four.holds,
        format!(
            "N=4 ~ N=6: {}; N=3 ~ N=4: {} ({reason}); |H| = {}, {}, {}",
            four_six.holds, three_four.holds, h3.len(), h4.len(), h6.len()
        ),
    )
}

fn c10_mucalc_oracle() -> Outcome {
    let start = Instant::now();
    let exhaustive = support::until_exhaustive();
    support::until_random(500, 17);
    let cases = 10_000;
    let runner = || TestRunner::new(Config::with_cases(cases));
    let laws = [
        runner()
            .run(&(support::formula(vec![]), support::lts_strategy()), |(f, l)| {
                support::complement_law(&f, &l)
            })
            .is_ok(),
        runner()
            .run(
                &(
                    support::formula(vec!["Z0".into()]),
                    support::lts_strategy(),
                    proptest::prelude::any::<(u32, u32)>(),
                ),
                |(f, l, (x, e))| support::monotone_law(&f, &l, x, e),
            )
            .is_ok(),
        runner()
            .run(&(support::formula(vec!["Z0".into()]), support::lts_strategy()), |(f, l)| {
                support::unfolding_law(&f, &l)
            })
            .is_ok(),
        runner()
            .run(
                &(
                    support::formula(vec![]),
                    support::formula(vec![]),
                    support::formula(vec!["Z0".into()]),
                    support::lts_strategy(),
                ),
                |(a, b, body, l)| support::duality_law(&a, &b, &body, &l),
            )
            .is_ok(),
    ];
    let elapsed = start.elapsed();
    outcome(
        laws.iter().all(|&x| x) && within(elapsed, 60.0),
        format!(
            "{exhaustive} exhaustive + 500 random systems agree; complement/monotone/unfolding/duality {laws:?} at {cases} cases; {:.1} s",
            elapsed.as_secs_f64()
        ),
    )
}

/// C(m + n - 1, n) from Pascal's triangle.
fn pascal(m: u32, n: u32) -> BigUint {
    let top = (m + n - 1) as usize;
    let mut row = vec![BigUint::from(1u32)];
    for _ in 0..top {
        let mut next = vec![BigUint::from(1u32); row.len() + 1];
        for i in 1..row.len() {
            next[i] = &row[i - 1] + &row[i];
        }
        row = next;
    }
    row[n as usize].clone()
}

fn c11_counting() -> Outcome {
    let mut disagree = 0;
    let mut inequality = Vec::new();
    for m in 1..=10 {
        for n in 1..=20 {
            let r = counting_report(m, n, 2);
            disagree += usize::from(r.counter_size != pascal(m, n));
            if r.counter_exceeds_two_pow_m != (n > 2 * m) {
                inequality.push((m, n));
            }
        }
    }
    let at_m1 = inequality.iter().filter(|(m, _)| *m == 1).count();
    let implication_holds = (2..=10u32)
        .all(|m| (1..=20u32).all(|n| n <= 2 * m || counting_report(m, n, 2).counter_exceeds_two_pow_m));
    outcome(
        disagree == 0 && inequality.is_empty(),
        format!(
            "200 sizes, {disagree} disagree with Pascal; \"> 2^m iff n > 2m\" fails at {} points ({at_m1} with m = 1); n > 2m implies > 2^m for 2 <= m <= 10: {implication_holds}",
            inequality.len()
        ),
    )
}

fn c12_tile_balance() -> Outcome {
    let start = Instant::now();
    let mut cases = Vec::new();
    for n in 2..=8 {
        cases.push(("ring3", Family::Ring(n)));
    }
    for n in [4, 6, 8] {
        cases.push(("red_black_ring", Family::RedBlackRing(n)));
    }
    for (w, h) in [(3, 3), (3, 4), (4, 3), (4, 4)] {
        cases.push(("torus_tile", Family::Torus(w, h)));
    }
    let mut bad = Vec::new();
    for (model, family) in &cases {
        let doc = load(model).unwrap().unwrap();
        let tiles = &doc.tile_sets[0];
        let net = generate(tiles, *family).unwrap();
        let induced = tiles.induced_balance(&net).unwrap();
        let valid = is_balance_relation(&net, &induced).unwrap().is_ok();
        let classes = representatives_unchecked(&net, &induced).classes.len();
        let contained = induced.is_subset(&largest_balance(&net).unwrap());
        if !(valid && classes <= tiles.len() && contained) {
            bad.push(format!("{family:?}"));
        }
    }
    let elapsed = start.elapsed();
    outcome(
        bad.is_empty() && within(elapsed, 30.0),
        format!("{} networks, failing {bad:?}, {:.2} s", cases.len(), elapsed.as_secs_f64()),
    )
}

#[test]
fn acceptance() {
    let models = bundled();
    let results: Vec<(u32, &str, Outcome)> = vec![
        (1, "token-ring mutual exclusion", c1_token_ring_mutex()),
        (2, "outward-facing detection", c2_outward_facing()),
        (3, "invariant oracle on bundled models", c3_invariant_oracle(&models)),
        (4, "representative fixpoint equals all-nodes fixpoint", c4_transferred_fixpoint(&models)),
        (5, "bisimulation up to beta and mutations", c5_bisimulation_up_to_beta(&models)),
        (6, "local simulation and local-global bisimulation", c6_local_global(&models)),
        (7, "verdicts agree within balance classes", c7_verdicts_agree_within_classes(&models)),
        (8, "balance class counts", c8_class_counts()),
        (9, "two-token ring minimal model", c9_two_token_rings()),
        (10, "mu-calculus evaluator oracle", c10_mucalc_oracle()),
        (11, "counting report", c11_counting()),
        (12, "tile-induced balance on generator matrix", c12_tile_balance()),
    ];
    let mut red = Vec::new();
    for (id, name, o) in &results {
        let mark = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {mark}  {name}: {}", o.detail);
        if !o.pass {
            red.push(*id);
        }
    }
    assert_eq!(red, KNOWN_RED, "red criteria changed");
}
