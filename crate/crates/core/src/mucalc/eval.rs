use std::collections::HashMap;
use std::hash::Hash;

use fixedbitset::FixedBitSet;

use super::{Formula, FormulaError, Label};
use crate::lts::{LabelId, LabeledTs, TransitionLabel};

/// Assignment of state sets to free fixpoint variables.
pub type Env = HashMap<String, FixedBitSet>;

/// States of `lts` satisfying `phi` under `env`.
pub fn evaluate<P: Clone + Eq + Hash>(
    phi: &Formula,
    lts: &LabeledTs<P>,
    env: &Env,
) -> Result<FixedBitSet, FormulaError> {
    let core = if phi.is_core() {
        phi.clone()
    } else {
        phi.expand_derived()?
    };
    let mut env = env.clone();
    eval(&core, lts, &mut env)
}

/// `phi` holds in every initial state. Refuses systems with no initial state.
pub fn holds<P: Clone + Eq + Hash>(phi: &Formula, lts: &LabeledTs<P>) -> Result<bool, FormulaError> {
    Ok(failing_initial(phi, lts)?.is_empty())
}

/// Initial states where `phi` fails.
pub fn failing_initial<P: Clone + Eq + Hash>(
    phi: &Formula,
    lts: &LabeledTs<P>,
) -> Result<Vec<usize>, FormulaError> {
    if lts.initial().is_empty() {
        return Err(FormulaError::NoInitialStates);
    }
    let sat = evaluate(phi, lts, &Env::new())?;
    Ok(lts.initial().iter().copied().filter(|&s| !sat.contains(s)).collect())
}

fn label_ids<P: Clone + Eq + Hash>(
    lts: &LabeledTs<P>,
    label: &Label,
) -> Result<Vec<LabelId>, FormulaError> {
    let tl = match label {
        Label::Any => return Ok(lts.visible_labels().collect()),
        Label::Own => TransitionLabel::Own,
        Label::Port(p) => TransitionLabel::Port(p.clone()),
    };
    // A port that shares its neighbor with a smaller port never labels a
    // transition, so it selects nothing.
    Ok(lts.label_id(&tl).into_iter().collect())
}

/// States with a transition labeled in `labels` into `target`.
fn pre<P: Clone + Eq + Hash>(lts: &LabeledTs<P>, labels: &[LabelId], target: &FixedBitSet) -> FixedBitSet {
    let mut out = FixedBitSet::with_capacity(lts.len());
    for t in target.ones() {
        for &(l, s) in lts.pred(t) {
            if labels.contains(&l) {
                out.insert(s);
            }
        }
    }
    out
}

fn eval<P: Clone + Eq + Hash>(
    phi: &Formula,
    lts: &LabeledTs<P>,
    env: &mut Env,
) -> Result<FixedBitSet, FormulaError> {
    let n = lts.len();
    Ok(match phi {
        Formula::True => {
            let mut all = FixedBitSet::with_capacity(n);
            all.insert_range(..);
            all
        }
        Formula::False => FixedBitSet::with_capacity(n),
        Formula::Prop(_) | Formula::Cmp { .. } => {
            let key = phi.atom_key().expect("atom");
            lts.prop(&key)
                .cloned()
                .ok_or(FormulaError::UnknownProposition(key))?
        }
        Formula::Var(z) => env
            .get(z)
            .cloned()
            .ok_or_else(|| FormulaError::UnboundVariable(z.clone()))?,
        Formula::Not(a) => {
            let mut s = eval(a, lts, env)?;
            s.toggle_range(..);
            s
        }
        Formula::And(a, b) => {
            let mut s = eval(a, lts, env)?;
            s.intersect_with(&eval(b, lts, env)?);
            s
        }
        Formula::EUntil { hold, label, goal } => {
            let hold = eval(hold, lts, env)?;
            let goal = eval(goal, lts, env)?;
            let labels = label_ids(lts, label)?;
            // X = hold ∩ (pre_a(goal) ∪ pre_τ(X))
            let mut base = pre(lts, &labels, &goal);
            base.intersect_with(&hold);
            let tau = [lts.tau()];
            let mut x = base.clone();
            let mut frontier = base;
            while !frontier.is_clear() {
                let mut next = pre(lts, &tau, &frontier);
                next.intersect_with(&hold);
                next.difference_with(&x);
                x.union_with(&next);
                frontier = next;
            }
            x
        }
        Formula::Mu(z, body) => {
            let saved = env.remove(z);
            let mut x = FixedBitSet::with_capacity(n);
            loop {
                env.insert(z.clone(), x.clone());
                let next = eval(body, lts, env)?;
                if next == x {
                    break;
                }
                x = next;
            }
            env.remove(z);
            if let Some(s) = saved {
                env.insert(z.clone(), s);
            }
            x
        }
        other => {
            let core = other.expand_derived()?;
            eval(&core, lts, env)?
        }
    })
}
