//! parse → balance → invariant → local spaces → check → transfer → oracle.

use std::collections::{BTreeMap, VecDeque};
use std::time::Instant;

use serde::Serialize;

use locsym_core::balance::{largest_balance, representatives, RepresentativeScheme};
use locsym_core::compositional::{strongest_compositional_invariant, CompositionalInvariant};
use locsym_core::dsl::{parse_formula_unresolved, ModelDocument};
use locsym_core::mucalc::{evaluate, failing_initial, holds, Env};
use locsym_core::relations::check_outward_facing;
use locsym_core::spaces::{build_global_space, build_local_space, PropositionSet};
use locsym_core::{Formula, LabeledTs, NodeId, ProcessNetwork};

use crate::CliError;

/// What a local verdict licenses about the global system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Claim {
    /// Universal formula true locally: the local space simulates the global one.
    HoldsGlobally,
    /// Every interfering neighbor is outward-facing: local and global spaces
    /// are stuttering bisimilar, so the global verdict is the local one.
    GlobalEqualsLocal,
    LocalOnly,
}

impl Claim {
    pub fn text(self, local: bool) -> String {
        match self {
            Claim::HoldsGlobally => {
                "holds globally under unconditional fairness (universal formula; the local space simulates the global one)".into()
            }
            Claim::GlobalEqualsLocal => format!(
                "global verdict equals local verdict under fairness: {} (every neighbor is outward-facing)",
                if local { "holds" } else { "fails" }
            ),
            Claim::LocalOnly => "local verdict only; no transfer result applies".into(),
        }
    }

    /// The global verdict this claim predicts, if any.
    pub fn predicted(self, local: bool) -> Option<bool> {
        match self {
            Claim::HoldsGlobally => Some(true),
            Claim::GlobalEqualsLocal => Some(local),
            Claim::LocalOnly => None,
        }
    }
}

pub fn transfer_verdict(local: bool, universal: bool, outward_all: bool) -> Claim {
    if universal && local {
        Claim::HoldsGlobally
    } else if outward_all {
        Claim::GlobalEqualsLocal
    } else {
        Claim::LocalOnly
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleResult {
    pub global: bool,
    pub global_states: usize,
    /// The claim's prediction matches the global verdict (vacuous for local-only claims).
    pub agrees: bool,
    /// Path of global states to a violation when the formula fails globally.
    pub trace: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodeVerdict {
    pub node: String,
    /// Nodes the verdict carries over to through balance.
    pub class: Vec<String>,
    pub local: bool,
    pub failing_states: Vec<String>,
    pub local_states: usize,
    pub local_transitions: usize,
    /// Per interfering neighbor: whether it is outward-facing toward this node.
    pub outward: BTreeMap<String, bool>,
    pub claim: Claim,
    pub claim_text: String,
    pub oracle: Option<OracleResult>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerdictReport {
    pub model: String,
    pub formula_name: String,
    pub formula: String,
    /// `universal` or `general`.
    pub formula_class: String,
    pub classes: usize,
    pub verdicts: Vec<NodeVerdict>,
    /// Microseconds per pipeline stage.
    pub timings_us: BTreeMap<String, u128>,
}

impl VerdictReport {
    /// Every local verdict holds and every oracle run agrees and holds.
    pub fn passed(&self) -> bool {
        self.verdicts
            .iter()
            .all(|v| v.local && v.oracle.as_ref().is_none_or(|o| o.global && o.agrees))
    }
}

#[derive(Debug, Clone, Default)]
pub struct CheckOptions {
    /// Check at this node instead of at every representative.
    pub node: Option<String>,
    /// Global state cap for the oracle; `None` skips it.
    pub oracle: Option<usize>,
}

pub fn network(doc: &ModelDocument) -> Result<&ProcessNetwork, CliError> {
    doc.networks
        .first()
        .ok_or_else(|| CliError::Usage("model declares no network".into()))
}

/// Largest balance, its representatives and the strongest invariant.
pub fn analyse(net: &ProcessNetwork) -> Result<(RepresentativeScheme, CompositionalInvariant), CliError> {
    let b = largest_balance(net)?;
    let scheme = representatives(net, &b)?;
    let inv = strongest_compositional_invariant(net, &scheme)?;
    Ok((scheme, inv))
}

/// A named formula of the document, or formula text.
pub fn lookup_formula(doc: &ModelDocument, text: &str) -> Result<(String, Formula), CliError> {
    if let Some(f) = doc.formula(text) {
        return Ok((text.to_string(), f.clone()));
    }
    parse_formula_unresolved(text)
        .map(|f| ("<inline>".to_string(), f))
        .map_err(|d| CliError::Usage(format!("`{text}` is neither a formula name nor a formula: {d}")))
}

pub fn check(doc: &ModelDocument, formula: &str, opts: &CheckOptions) -> Result<VerdictReport, CliError> {
    let mut timings = BTreeMap::new();
    let mut clock = Instant::now();
    let mut lap = |name: &str, timings: &mut BTreeMap<String, u128>| {
        timings.insert(name.to_string(), clock.elapsed().as_micros());
        clock = Instant::now();
    };
    let net = network(doc)?;
    let (name, f) = lookup_formula(doc, formula)?;
    let (scheme, inv) = analyse(net)?;
    lap("invariant", &mut timings);

    let targets: Vec<NodeId> = match &opts.node {
        Some(n) => vec![net
            .node_by_name(n)
            .ok_or_else(|| CliError::Usage(format!("unknown node `{n}`")))?],
        None => scheme.representatives(),
    };
    let mut verdicts = Vec::new();
    let mut universal_all = true;
    for r in targets {
        let tpl = net.template(r);
        let phi = f.resolve(tpl)?;
        let universal = phi.is_universal()?;
        universal_all &= universal;
        let props = PropositionSet::for_formulas(tpl, [&phi])?;
        let h = build_local_space(net, inv.all(), r, &props)?;
        let failing = failing_initial(&phi, &h)?;
        let local = failing.is_empty();
        lap("local", &mut timings);

        let mut outward = BTreeMap::new();
        for &n in net.neighbors(r) {
            let v = check_outward_facing(net, inv.all(), n, r)?;
            outward.insert(net.node(n).name.clone(), v.holds);
        }
        lap("outward", &mut timings);
        let claim = transfer_verdict(local, universal, outward.values().all(|&x| x));

        let oracle = match opts.oracle {
            None => None,
            Some(cap) => {
                let g = build_global_space(net, r, &props, cap)?;
                let global = holds(&phi, &g)?;
                let trace = if global { Vec::new() } else { violation_trace(&phi, &g)? };
                lap("oracle", &mut timings);
                Some(OracleResult {
                    global,
                    global_states: g.len(),
                    agrees: claim.predicted(local).is_none_or(|p| p == global),
                    trace,
                })
            }
        };
        verdicts.push(NodeVerdict {
            node: net.node(r).name.clone(),
            class: scheme
                .class_of(r)
                .iter()
                .map(|&n| net.node(n).name.clone())
                .collect(),
            local,
            failing_states: failing.iter().map(|&s| h.name(s).to_string()).collect(),
            local_states: h.len(),
            local_transitions: h.transitions().len(),
            outward,
            claim,
            claim_text: claim.text(local),
            oracle,
        });
    }
    Ok(VerdictReport {
        model: net.name.clone(),
        formula_name: name,
        formula: f.to_string(),
        formula_class: if universal_all { "universal" } else { "general" }.into(),
        classes: scheme.classes.len(),
        verdicts,
        timings_us: timings,
    })
}

/// For `AG φ`, a shortest path to a reachable state violating φ; otherwise
/// a failing initial state.
fn violation_trace<P>(phi: &Formula, g: &LabeledTs<P>) -> Result<Vec<String>, CliError>
where
    P: Clone + Eq + std::hash::Hash,
{
    let bad_initial = failing_initial(phi, g)?;
    let Formula::AG(_, body) = phi else {
        return Ok(bad_initial.iter().take(1).map(|&s| g.name(s).to_string()).collect());
    };
    let sat = evaluate(body, g, &Env::new())?;
    let mut prev: Vec<Option<usize>> = vec![None; g.len()];
    let mut seen = vec![false; g.len()];
    let mut queue = VecDeque::new();
    for &s in g.initial() {
        seen[s] = true;
        queue.push_back(s);
    }
    while let Some(s) = queue.pop_front() {
        if !sat.contains(s) {
            let mut path = vec![s];
            let mut cur = s;
            while let Some(p) = prev[cur] {
                path.push(p);
                cur = p;
            }
            path.reverse();
            return Ok(path.into_iter().map(|s| g.name(s).to_string()).collect());
        }
        for &(_, t) in g.succ(s) {
            if !seen[t] {
                seen[t] = true;
                prev[t] = Some(s);
                queue.push_back(t);
            }
        }
    }
    Ok(bad_initial.iter().take(1).map(|&s| g.name(s).to_string()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transfer_table() {
        assert_eq!(transfer_verdict(true, true, false), Claim::HoldsGlobally);
        assert_eq!(transfer_verdict(true, true, true), Claim::HoldsGlobally);
        assert_eq!(transfer_verdict(false, true, true), Claim::GlobalEqualsLocal);
        assert_eq!(transfer_verdict(true, false, true), Claim::GlobalEqualsLocal);
        assert_eq!(transfer_verdict(false, true, false), Claim::LocalOnly);
        assert_eq!(transfer_verdict(true, false, false), Claim::LocalOnly);
        assert_eq!(Claim::HoldsGlobally.predicted(true), Some(true));
        assert_eq!(Claim::GlobalEqualsLocal.predicted(false), Some(false));
        assert_eq!(Claim::LocalOnly.predicted(true), None);
    }
}
