//! Query planning and execution.
//!
//! A query `P(targets | evidence)` is answered by transforming the network
//! until one node has exactly the targets as head and the evidence as
//! parents. The planner works in three passes:
//!
//! 1. non-query nodes are eliminated one at a time, reversing arcs into
//!    their children until a single child is left and then removing them
//!    into it (or deleting them outright when barren). An elimination is
//!    only committed when every step passes the independence check on the
//!    current graph;
//! 2. whatever remains is merged, in topological order, into one compound
//!    node;
//! 3. leftover non-query variables are split off and deleted, then each
//!    evidence variable is split off as its own parent.
//!
//! A query that reads a stored cell directly needs no plan at all.

use crate::error::{QbnError, Result};
use crate::graph::{Skeleton, Step};
use crate::model::{index, summarize, BetaStat, Cpt, NetworkStructure, PriorPolicy, QbnNetwork, Query, VarId, Variable, View};
use crate::transforms::{restore_prior, RawNetwork, TransformRecord};

#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub steps: Vec<Step>,
    pub targets: Vec<VarId>,
    pub evidence: Vec<VarId>,
}

impl Plan {
    /// A plan is a lookup when the stored table already answers the query.
    pub fn is_lookup(&self) -> bool {
        self.steps.is_empty()
    }

    /// Wrap a hand-written step list, checking that it ends at a node for
    /// `query`.
    pub fn from_steps(structure: &NetworkStructure, query: &Query, steps: Vec<Step>) -> Result<Plan> {
        let plan = Plan {
            steps,
            targets: query.target_vars(),
            evidence: query.evidence_vars(),
        };
        plan.validate(structure)?;
        Ok(plan)
    }

    pub fn validate(&self, structure: &NetworkStructure) -> Result<()> {
        let mut skel = Skeleton::from_structure(structure);
        for s in &self.steps {
            skel.apply(s)?;
        }
        if answering_node(&skel, &self.targets, &self.evidence).is_none() {
            return Err(QbnError::Structure(
                "plan does not end at a node for the requested query".into(),
            ));
        }
        Ok(())
    }

    pub fn describe(&self, structure: &NetworkStructure) -> Vec<String> {
        self.steps.iter().map(|s| s.describe(structure)).collect()
    }
}

fn answering_node(skel: &Skeleton, targets: &[VarId], evidence: &[VarId]) -> Option<VarId> {
    let key = skel.key_of(targets[0])?;
    let n = skel.node(key);
    (n.head == targets && n.parents == evidence).then_some(key)
}

/// Try to eliminate `node`; on success the steps are applied to `skel`.
fn eliminate(skel: &mut Skeleton, node: VarId) -> Option<Vec<Step>> {
    let mut sim = skel.clone();
    let mut steps = Vec::new();
    loop {
        let children: Vec<VarId> = sim.children_of(node).into_iter().collect();
        let step = match children.as_slice() {
            [] => Step::Prune { node },
            [only] => {
                let f = sim.fragment(*only, node).ok()?;
                if !sim.fragment_is_exact(&f) {
                    return None;
                }
                Step::Removal {
                    child: *only,
                    parent: node,
                }
            }
            many => many.iter().find_map(|&c| {
                let step = Step::Reversal { from: node, to: c };
                sim.prepare(&step).ok()?;
                let f = sim.fragment(c, node).ok()?;
                sim.fragment_is_exact(&f).then_some(step)
            })?,
        };
        sim.apply(&step).ok()?;
        let done = !matches!(step, Step::Reversal { .. });
        steps.push(step);
        if done {
            *skel = sim;
            return Some(steps);
        }
    }
}

/// Build a plan for `query` over the learned structure.
pub fn plan(structure: &NetworkStructure, query: &Query) -> Result<Plan> {
    let targets = query.target_vars();
    let evidence = query.evidence_vars();
    let mut skel = Skeleton::from_structure(structure);
    let mut steps = Vec::new();
    let done = |skel: &Skeleton| answering_node(skel, &targets, &evidence).is_some();

    if done(&skel) {
        return Ok(Plan { steps, targets, evidence });
    }

    loop {
        let mut progress = false;
        let candidates: Vec<VarId> = skel.keys().filter(|k| !query.involves(*k)).collect();
        for k in candidates {
            if let Some(s) = eliminate(&mut skel, k) {
                steps.extend(s);
                progress = true;
            }
        }
        if !progress {
            break;
        }
    }

    if !done(&skel) {
        let order = skel.topological_order();
        let first = order[0];
        for &x in &order[1..] {
            let ck = skel.key_of(first).expect("compound stays in the network");
            let linked = skel.node(x).parents.iter().any(|p| skel.node(ck).head.contains(p));
            let step = Step::Merge {
                child: x,
                parent: first,
                linked,
            };
            skel.apply(&step)?;
            steps.push(step);
        }
        let all = skel.node(skel.key_of(first).unwrap()).head.clone();
        for &v in all.iter().filter(|v| !query.involves(**v)) {
            let ck = skel.key_of(v).unwrap();
            let keep = index::difference(&skel.node(ck).head, &[v]);
            for step in [Step::Split { node: v, keep }, Step::Prune { node: v }] {
                skel.apply(&step)?;
                steps.push(step);
            }
        }
        for &e in &evidence {
            let ck = skel.key_of(e).unwrap();
            if skel.node(ck).head.len() > 1 {
                let step = Step::Split { node: e, keep: vec![e] };
                skel.apply(&step)?;
                steps.push(step);
            }
        }
    }

    if !done(&skel) {
        return Err(QbnError::Internal(format!(
            "planner did not reach a node for {}",
            query.display(structure)
        )));
    }
    Ok(Plan { steps, targets, evidence })
}

/// Run `plan` on the raw counts of `qbn`. A failing step aborts the plan
/// and hands back the trace up to that point.
pub fn execute(qbn: &QbnNetwork, plan: &Plan) -> Result<(RawNetwork, Vec<TransformRecord>)> {
    let mut net = RawNetwork::from_learned(qbn);
    let mut trace = Vec::with_capacity(plan.steps.len());
    for (i, s) in plan.steps.iter().enumerate() {
        match net.apply(s) {
            Ok(rec) => trace.push(rec),
            Err(e) => {
                return Err(QbnError::AbortedPlan {
                    step: i,
                    source: Box::new(e),
                    trace,
                })
            }
        }
    }
    Ok((net, trace))
}

/// Prior added back onto a raw result headed by `head`: the node's own
/// uninformed prior for a single variable, `β(1, |joint|−1)` for a compound
/// one, and nothing when any head variable carries an informed prior.
pub fn report_prior(variables: &[Variable], priors: &[PriorPolicy], head: &[VarId]) -> BetaStat {
    if let [v] = head {
        return priors[v.0].uninformed(variables[v.0].size());
    }
    if head.iter().any(|v| matches!(priors[v.0], PriorPolicy::Informed(_))) {
        return BetaStat::ZERO;
    }
    PriorPolicy::default_prior(head.iter().map(|v| variables[v.0].size()).product())
}

/// The cell of `table` selected by the query's values, with any other
/// variable at its first value.
pub fn cell_at(table: &Cpt, query: &Query, n_vars: usize) -> BetaStat {
    let mut full = vec![0; n_vars];
    for &(v, k) in query.targets().iter().chain(query.evidence()) {
        full[v.0] = k;
    }
    table.at(&full)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InferenceResult {
    /// Result with the reporting prior restored.
    pub stat: BetaStat,
    pub raw: BetaStat,
    pub mean: f64,
    pub variance: f64,
    pub variance_bound: f64,
    pub plan: Plan,
    pub trace: Vec<TransformRecord>,
    pub zero_denominator_terms: u64,
    /// No sample supported the answering cell.
    pub degenerate: bool,
}

pub fn infer(qbn: &QbnNetwork, query: &Query) -> Result<InferenceResult> {
    let p = plan(qbn.structure(), query)?;
    infer_with(qbn, query, p)
}

/// Answer `query` with a given plan.
pub fn infer_with(qbn: &QbnNetwork, query: &Query, plan: Plan) -> Result<InferenceResult> {
    let s = qbn.structure();
    let (raw, prior, trace, zeros) = if plan.is_lookup() {
        let (x, k) = query.targets()[0];
        let row = query.evidence().iter().fold((0, 1), |(acc, stride), &(v, val)| {
            (acc + val * stride, stride * s.variable(v).size())
        });
        let raw = qbn.cell(x, row.0, k, View::Raw)?;
        (raw, qbn.cell_prior(x), Vec::new(), 0)
    } else {
        let (net, trace) = execute(qbn, &plan)?;
        let table = net
            .node_of(plan.targets[0])
            .ok_or_else(|| QbnError::Internal("answering node missing after plan".into()))?;
        let raw = cell_at(table, query, s.len());
        let prior = report_prior(net.variables(), net.priors(), table.head());
        (raw, prior, trace, net.zero_denominator_terms())
    };
    let stat = restore_prior(raw, prior);
    let summary = summarize(stat)?;
    Ok(InferenceResult {
        stat,
        raw,
        mean: summary.mean,
        variance: summary.variance,
        variance_bound: summary.variance_bound,
        plan,
        trace,
        zero_denominator_terms: zeros,
        degenerate: raw.total() == 0.0,
    })
}
