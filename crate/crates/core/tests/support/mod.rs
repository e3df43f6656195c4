//! Small explicit LTSs and a path-enumeration oracle for E[p U_a q].
#![allow(dead_code)]

use fixedbitset::FixedBitSet;
use locsym_core::mucalc::{evaluate, Env};
use locsym_core::{Formula, Label, LabeledTs, LtsBuilder, TransitionLabel};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use rand::{rngs::StdRng, Rng, SeedableRng};

/// Label codes: 0 is τ, 1 is `a`, 2 is `b`.
#[derive(Debug, Clone)]
pub struct Small {
    pub n: usize,
    pub edges: Vec<(usize, u8, usize)>,
    pub p: u32,
    pub q: u32,
}

fn label(code: u8) -> TransitionLabel {
    match code {
        0 => TransitionLabel::Tau,
        1 => TransitionLabel::port("a"),
        _ => TransitionLabel::port("b"),
    }
}

impl Small {
    pub fn build(&self) -> LabeledTs<usize> {
        let mut b = LtsBuilder::new([label(1), label(2)]);
        b.declare_prop("p");
        b.declare_prop("q");
        for s in 0..self.n {
            b.add_state(s, format!("s{s}"));
            b.mark_initial(s);
            if self.p >> s & 1 == 1 {
                b.set_prop(s, "p");
            }
            if self.q >> s & 1 == 1 {
                b.set_prop(s, "q");
            }
        }
        for &(s, l, t) in &self.edges {
            b.add_transition(s, label(l), t);
        }
        b.finish()
    }

    /// States with a path `s -τ-> … -τ-> s_k -a-> t`, p on s..s_k and q on t.
    /// Enumerates every τ-path without repeated states (a witness with a
    /// repeat shortens to one without), so paths have at most `n + 1` steps.
    pub fn until_oracle(&self, a: u8) -> Vec<bool> {
        (0..self.n).map(|s| self.search(a, s, &mut vec![false; self.n])).collect()
    }

    fn search(&self, a: u8, s: usize, on_path: &mut [bool]) -> bool {
        if self.p >> s & 1 == 0 || on_path[s] {
            return false;
        }
        on_path[s] = true;
        let found = self.edges.iter().any(|&(x, l, t)| {
            x == s && ((l == a && self.q >> t & 1 == 1) || (l == 0 && self.search(a, t, on_path)))
        });
        on_path[s] = false;
        found
    }
}

pub fn until(a: &str) -> Formula {
    Formula::eu(Formula::prop("p"), Label::Port(a.into()), Formula::prop("q"))
}

pub fn agrees(m: &Small, lts: &LabeledTs<usize>) -> bool {
    let got = evaluate(&until("a"), lts, &Env::new()).unwrap();
    let want = m.until_oracle(1);
    (0..m.n).all(|s| got.contains(s) == want[s])
}

/// Runs the oracle comparison over every labeling of one edge set. The
/// labelings are supplied through variables bound to p and q, so the
/// transition structure is built once.
fn agrees_on_all(n: usize, edges: Vec<(usize, u8, usize)>, labelings: &[(u32, u32)]) -> usize {
    let mut m = Small { n, edges, p: 0, q: 0 };
    let lts = m.build();
    let f = Formula::eu(Formula::var("P"), Label::Port("a".into()), Formula::var("Q"));
    let mut env = Env::new();
    for &(p, q) in labelings {
        m.p = p;
        m.q = q;
        env.insert("P".into(), mask_set(n, p));
        env.insert("Q".into(), mask_set(n, q));
        let got = evaluate(&f, &lts, &env).unwrap();
        let want = m.until_oracle(1);
        assert!((0..n).all(|s| got.contains(s) == want[s]), "{m:?}");
        if n <= 2 {
            assert!(agrees(&m, &m.build()), "{m:?}");
        }
    }
    labelings.len()
}

/// Oracle agreement on every system with at most 2 states over τ, a, b;
/// every system with 3 states over τ and a; and every system with 4 or 5
/// states where each state has one successor. Labelings with 3 or more
/// states are taken up to state permutation. Returns the number of cases.
pub fn until_exhaustive() -> usize {
    let mut count = 0;
    for (n, labels) in [(1, 3), (2, 3)] {
        let labelings = all_labelings(n);
        all_edge_sets(n, labels, |e| count += agrees_on_all(n, e, &labelings));
    }
    let labelings = sorted_labelings(3);
    all_edge_sets(3, 2, |e| count += agrees_on_all(3, e, &labelings));
    for n in [4, 5] {
        let labelings = sorted_labelings(n);
        all_functional(n, |e| count += agrees_on_all(n, e, &labelings));
    }
    count
}

/// Oracle agreement on `count` random systems with at most 8 states.
pub fn until_random(count: usize, seed: u64) {
    let mut rng = StdRng::seed_from_u64(seed);
    for _ in 0..count {
        let m = random(&mut rng, 8);
        assert!(agrees(&m, &m.build()), "{m:?}");
    }
}

/// Every transition relation on `n` states over labels `0..labels`.
pub fn all_edge_sets(n: usize, labels: u8, mut f: impl FnMut(Vec<(usize, u8, usize)>)) {
    let slots: Vec<(usize, u8, usize)> = (0..n)
        .flat_map(|s| (0..labels).flat_map(move |l| (0..n).map(move |t| (s, l, t))))
        .collect();
    for mask in 0u64..1 << slots.len() {
        f((0..slots.len()).filter(|i| mask >> i & 1 == 1).map(|i| slots[i]).collect());
    }
}

/// Every relation on `n` states giving each state exactly one successor,
/// labeled τ or `a`.
pub fn all_functional(n: usize, mut f: impl FnMut(Vec<(usize, u8, usize)>)) {
    for mut c in 0..(2 * n).pow(n as u32) {
        let mut edges = Vec::with_capacity(n);
        for s in 0..n {
            let k = c % (2 * n);
            c /= 2 * n;
            edges.push((s, (k / n) as u8, k % n));
        }
        f(edges);
    }
}

/// Every assignment of p and q on `n` states.
pub fn all_labelings(n: usize) -> Vec<(u32, u32)> {
    (0..1u32 << n).flat_map(|p| (0..1u32 << n).map(move |q| (p, q))).collect()
}

/// One assignment of p and q per orbit under permutations of the states:
/// the per-state types `(p, q)` in nondecreasing order. Paired with every
/// edge set this covers every system up to isomorphism.
pub fn sorted_labelings(n: usize) -> Vec<(u32, u32)> {
    fn go(n: usize, from: u32, acc: &mut Vec<u32>, out: &mut Vec<(u32, u32)>) {
        if acc.len() == n {
            let mask = |bit: u32| (0..n).filter(|&s| acc[s] & bit != 0).fold(0, |m, s| m | 1 << s);
            out.push((mask(1), mask(2)));
            return;
        }
        for t in from..4 {
            acc.push(t);
            go(n, t, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    go(n, 0, &mut Vec::new(), &mut out);
    out
}

pub fn mask_set(n: usize, mask: u32) -> FixedBitSet {
    let mut set = FixedBitSet::with_capacity(n);
    (0..n).filter(|i| mask >> i & 1 == 1).for_each(|i| set.insert(i));
    set
}

pub fn random(rng: &mut impl Rng, max_states: usize) -> Small {
    let n = rng.gen_range(1..=max_states);
    let density = rng.gen_range(0.05..0.5);
    let mut edges = Vec::new();
    for s in 0..n {
        for l in 0..3u8 {
            for t in 0..n {
                if rng.gen_bool(density) {
                    edges.push((s, l, t));
                }
            }
        }
    }
    Small {
        n,
        edges,
        p: rng.gen_range(0..1u32 << n),
        q: rng.gen_range(0..1u32 << n),
    }
}

// Random formulas over p, q and labels a, b, self. Bound variables occur
// only positively, so every fixpoint is monotone.
pub fn formula(vars: Vec<String>) -> BoxedStrategy<Formula> {
    let mut leaves = vec![
        Just(Formula::True).boxed(),
        Just(Formula::False).boxed(),
        prop_oneof![Just("p"), Just("q")].prop_map(Formula::prop).boxed(),
        prop_oneof![Just("p"), Just("q")]
            .prop_map(|p| Formula::not(Formula::prop(p)))
            .boxed(),
    ];
    if !vars.is_empty() {
        leaves.push(proptest::sample::select(vars.clone()).prop_map(Formula::var).boxed());
    }
    let leaf = proptest::strategy::Union::new(leaves).boxed();
    let label = prop_oneof![
        Just(Label::Port("a".into())),
        Just(Label::Port("b".into())),
        Just(Label::Own),
        Just(Label::Any)
    ];
    let depth = 3 - vars.len().min(2) as u32;
    leaf.prop_recursive(depth, 24, 2, move |inner| {
        let fresh = format!("Z{}", vars.len());
        let mut inner_vars = vars.clone();
        inner_vars.push(fresh.clone());
        let (f1, f2) = (fresh.clone(), fresh);
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), label.clone(), inner.clone()).prop_map(|(a, l, b)| Formula::eu(a, l, b)),
            (inner.clone(), label.clone(), inner.clone()).prop_map(|(a, l, b)| Formula::aw(a, l, b)),
            formula(inner_vars.clone()).prop_map(move |b| Formula::mu(f1.clone(), b)),
            formula(inner_vars).prop_map(move |b| Formula::nu(f2.clone(), b)),
        ]
    })
    .boxed()
}

pub fn lts_strategy() -> impl Strategy<Value = LabeledTs<usize>> {
    any::<u64>().prop_map(|seed| random(&mut StdRng::seed_from_u64(seed), 6).build())
}

pub fn eval(f: &Formula, lts: &LabeledTs<usize>, env: &Env) -> FixedBitSet {
    evaluate(f, lts, env).unwrap()
}

pub fn complement(s: &FixedBitSet) -> FixedBitSet {
    let mut c = s.clone();
    c.toggle_range(..);
    c
}

pub fn subset(n: usize, bits: u32) -> FixedBitSet {
    let mut s = FixedBitSet::with_capacity(n);
    (0..n).filter(|i| bits >> i & 1 == 1).for_each(|i| s.insert(i));
    s
}

/// Replaces free occurrences of `z` by `by`.
pub fn subst(f: &Formula, z: &str, by: &Formula) -> Formula {
    let r = |g: &Formula| Box::new(subst(g, z, by));
    match f {
        Formula::Var(v) if v == z => by.clone(),
        Formula::Not(a) => Formula::Not(r(a)),
        Formula::And(a, b) => Formula::And(r(a), r(b)),
        Formula::Or(a, b) => Formula::Or(r(a), r(b)),
        Formula::Implies(a, b) => Formula::Implies(r(a), r(b)),
        Formula::EUntil { hold, label, goal } => Formula::EUntil {
            hold: r(hold),
            label: label.clone(),
            goal: r(goal),
        },
        Formula::AWeak { hold, label, goal } => Formula::AWeak {
            hold: r(hold),
            label: label.clone(),
            goal: r(goal),
        },
        Formula::Mu(v, b) if v != z => Formula::Mu(v.clone(), r(b)),
        Formula::Nu(v, b) if v != z => Formula::Nu(v.clone(), r(b)),
        other => other.clone(),
    }
}

pub fn complement_law(f: &Formula, lts: &LabeledTs<usize>) -> Result<(), TestCaseError> {
    let env = Env::new();
    prop_assert_eq!(eval(&Formula::not(f.clone()), lts, &env), complement(&eval(f, lts, &env)));
    Ok(())
}

/// `f` is monotone in its free variable `Z0`.
pub fn monotone_law(f: &Formula, lts: &LabeledTs<usize>, x: u32, extra: u32) -> Result<(), TestCaseError> {
    let n = lts.len();
    let (small, large) = (subset(n, x), subset(n, x | extra));
    let lo = eval(f, lts, &Env::from([("Z0".to_string(), small)]));
    let hi = eval(f, lts, &Env::from([("Z0".to_string(), large)]));
    prop_assert!(lo.is_subset(&hi));
    Ok(())
}

/// Both fixpoints of `f` over `Z0` equal their one-step unfolding.
pub fn unfolding_law(f: &Formula, lts: &LabeledTs<usize>) -> Result<(), TestCaseError> {
    let env = Env::new();
    for fix in [Formula::mu("Z0", f.clone()), Formula::nu("Z0", f.clone())] {
        let unfolded = subst(f, "Z0", &fix);
        prop_assert_eq!(eval(&fix, lts, &env), eval(&unfolded, lts, &env));
    }
    Ok(())
}

/// `A[a W b] = ¬E[¬a U ¬b]` and `νZ.body = ¬μZ.¬body[¬Z/Z]`.
pub fn duality_law(a: &Formula, b: &Formula, body: &Formula, lts: &LabeledTs<usize>) -> Result<(), TestCaseError> {
    let env = Env::new();
    let l = Label::Port("a".into());
    let aw = Formula::aw(a.clone(), l.clone(), b.clone());
    let eu = Formula::eu(Formula::not(a.clone()), l, Formula::not(b.clone()));
    prop_assert_eq!(eval(&aw, lts, &env), complement(&eval(&eu, lts, &env)));

    let nu = Formula::nu("Z0", body.clone());
    let negated = Formula::not(subst(body, "Z0", &Formula::not(Formula::var("Z0"))));
    prop_assert_eq!(eval(&nu, lts, &env), complement(&eval(&Formula::mu("Z0", negated), lts, &env)));
    Ok(())
}
