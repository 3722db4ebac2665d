//! Count-level network transformations.
//!
//! Transformations act on a [`RawNetwork`]: the learned tables with every
//! uninformed prior stripped, so each cell holds the raw `(alpha, omega)`
//! counts. Removal, reversal and merging all use one product: for a child
//! node `I` reading parent node `J`,
//!
//! ```text
//! joint(h_I, h_J, v1, v2, v3) = alpha_I(h_I | d, v2, v3) * alpha_J(h_J | v1, v2) / N_J(d, v2)
//! ```
//!
//! where `d` is the part of `h_J` that `I` reads and `N_J` is the marginal
//! of `J`'s alpha counts. A zero denominator contributes nothing and is
//! counted.

use std::collections::BTreeMap;

use crate::error::{QbnError, Result};
use crate::graph::{Fragment, NodeShape, Rewrite, Skeleton, Step, TransformKind};
use crate::model::{index, BetaStat, Cpt, PriorPolicy, QbnNetwork, VarId, Variable};

/// Snapshot of one executed transformation.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformRecord {
    pub kind: TransformKind,
    pub step: Step,
    /// The tables the step created or rewrote, after the step.
    pub outputs: Vec<Cpt>,
    pub zero_denominator_terms: u64,
}

/// A network under transformation: raw counts only.
#[derive(Debug, Clone, PartialEq)]
pub struct RawNetwork {
    variables: Vec<Variable>,
    nodes: BTreeMap<VarId, Cpt>,
    priors: Vec<PriorPolicy>,
    zero_denominator_terms: u64,
}

/// Remove the node's uninformed prior from a with-prior table.
pub fn strip_prior(table: &Cpt, prior: BetaStat) -> Cpt {
    let mut t = table.clone();
    for c in t.cells_mut() {
        *c = *c - prior;
    }
    t
}

/// Add an uninformed prior back onto a raw statistic.
pub fn restore_prior(stat: BetaStat, prior: BetaStat) -> BetaStat {
    stat + prior
}

impl RawNetwork {
    /// The learned tables already store raw counts; the uninformed priors are
    /// kept aside so results can be restored later.
    pub fn from_learned(qbn: &QbnNetwork) -> Self {
        let nodes = qbn.tables().iter().map(|t| (t.owner(), t.clone())).collect();
        RawNetwork {
            variables: qbn.structure().variables().to_vec(),
            nodes,
            priors: qbn.priors().to_vec(),
            zero_denominator_terms: 0,
        }
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn priors(&self) -> &[PriorPolicy] {
        &self.priors
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Cpt> {
        self.nodes.values()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The table whose head contains `v`.
    pub fn node_of(&self, v: VarId) -> Option<&Cpt> {
        self.nodes.values().find(|t| t.contains(v))
    }

    /// Total zero-denominator terms skipped so far.
    pub fn zero_denominator_terms(&self) -> u64 {
        self.zero_denominator_terms
    }

    fn radix(&self, vars: &[VarId]) -> Vec<usize> {
        vars.iter().map(|v| self.variables[v.0].size()).collect()
    }

    pub fn skeleton(&self) -> Skeleton {
        Skeleton::from_shapes(
            self.variables.iter().map(|v| v.size()).collect(),
            self.nodes.values().map(|t| NodeShape {
                head: t.head().to_vec(),
                parents: t.parents().to_vec(),
            }),
        )
    }

    fn table(&self, vars_head: Vec<VarId>, parents: Vec<VarId>) -> Cpt {
        let hr = self.radix(&vars_head);
        let pr = self.radix(&parents);
        Cpt::zeros(vars_head, hr, parents, pr)
    }

    /// Validate and carry out one step.
    pub fn apply(&mut self, step: &Step) -> Result<TransformRecord> {
        let mut skel = self.skeleton();
        let rw = skel.prepare(step)?;
        let (removed, outputs, zeros) = match &rw {
            Rewrite::Removal(f) => {
                let k = self.kernel(f);
                (vec![f.child, f.parent], vec![k.reduced], k.zeros)
            }
            Rewrite::Reversal(f) => {
                let k = self.kernel(f);
                let i_head = self.nodes[&f.child].head().to_vec();
                let j = &self.nodes[&f.parent];
                let mut flipped = self.table(j.head().to_vec(), index::union(&f.new_parents(), &i_head));
                let mut full = vec![0; self.variables.len()];
                let (vars, radix) = flipped.scope();
                index::for_each_assignment(&vars, &radix, &mut full, |a| {
                    let alpha = k.joint.at(a).alpha;
                    let omega = (k.reduced.at(a).alpha - alpha).max(0.0);
                    *flipped.at_mut(a) = BetaStat::raw(alpha, omega);
                });
                (vec![f.child, f.parent], vec![k.reduced, flipped], k.zeros)
            }
            Rewrite::Merge(f) => {
                let k = self.kernel(f);
                let mut merged = k.joint;
                let mut full = vec![0; self.variables.len()];
                let (vars, radix) = merged.scope();
                index::for_each_assignment(&vars, &radix, &mut full, |a| {
                    let r = k.reduced.at(a);
                    let c = merged.at_mut(a);
                    c.omega = (r.omega + r.alpha - c.alpha).max(0.0);
                });
                (vec![f.child, f.parent], vec![merged], k.zeros)
            }
            Rewrite::Split { node, keep, rest } => {
                let (a, b) = self.split(&self.nodes[node], keep, rest);
                (vec![*node], vec![a, b], 0)
            }
            Rewrite::Prune { node } => (vec![*node], vec![], 0),
        };
        skel.commit(&rw)?;
        for k in removed {
            self.nodes.remove(&k);
        }
        for t in &outputs {
            self.nodes.insert(t.head()[0], t.clone());
        }
        self.zero_denominator_terms += zeros;
        Ok(TransformRecord {
            kind: step.kind(),
            step: step.clone(),
            outputs,
            zero_denominator_terms: zeros,
        })
    }

    /// The shared product. `joint` has head `I.head ∪ J.head` and parents
    /// `v1 ∪ v2 ∪ v3`, `reduced` is its sum over `J.head` with omega taken
    /// from `I`'s omega counts.
    fn kernel(&self, f: &Fragment) -> Kernel {
        let i = &self.nodes[&f.child];
        let j = &self.nodes[&f.parent];
        let n = self.variables.len();
        let mut full = vec![0; n];

        // N_J over (d, v2): marginal of J's alpha counts
        let dq = index::union(&f.link, &f.v2);
        let dq_radix = self.radix(&dq);
        let mut denom = vec![0.0; index::cardinality(&dq_radix)];
        let (j_vars, j_radix) = j.scope();
        index::for_each_assignment(&j_vars, &j_radix, &mut full, |a| {
            denom[index::encode_from(&dq, &dq_radix, a)] += j.at(a).alpha;
        });
        let zeros = denom.iter().filter(|d| **d == 0.0).count() as u64;

        let parents = f.new_parents();
        let mut joint = self.table(index::union(i.head(), j.head()), parents.clone());
        let mut reduced = self.table(i.head().to_vec(), parents);
        let (vars, radix) = joint.scope();
        index::for_each_assignment(&vars, &radix, &mut full, |a| {
            let d = denom[index::encode_from(&dq, &dq_radix, a)];
            if d == 0.0 {
                return;
            }
            let w = j.at(a).alpha / d;
            let ci = i.at(a);
            joint.at_mut(a).alpha = ci.alpha * w;
            let r = reduced.at_mut(a);
            r.alpha += ci.alpha * w;
            r.omega += ci.omega * w;
        });
        let (jv, jr) = joint.scope();
        let mut masses = vec![0.0; joint.rows()];
        index::for_each_assignment(&jv, &jr, &mut full, |a| masses[joint.row_of(a)] += joint.at(a).alpha);
        index::for_each_assignment(&jv, &jr, &mut full, |a| {
            let m = masses[joint.row_of(a)];
            let c = joint.at_mut(a);
            c.omega = (m - c.alpha).max(0.0);
        });
        Kernel { joint, reduced, zeros }
    }

    fn split(&self, k: &Cpt, keep: &[VarId], rest: &[VarId]) -> (Cpt, Cpt) {
        let parents = k.parents().to_vec();
        let mut kept = self.table(keep.to_vec(), parents.clone());
        let mut child = self.table(rest.to_vec(), index::union(&parents, keep));
        let mut full = vec![0; self.variables.len()];
        let (vars, radix) = k.scope();
        index::for_each_assignment(&vars, &radix, &mut full, |a| {
            let alpha = k.at(a).alpha;
            kept.at_mut(a).alpha += alpha;
            child.at_mut(a).alpha = alpha;
        });
        let mut masses = vec![0.0; kept.rows()];
        let (kv, kr) = kept.scope();
        index::for_each_assignment(&kv, &kr, &mut full, |a| masses[kept.row_of(a)] += kept.at(a).alpha);
        index::for_each_assignment(&kv, &kr, &mut full, |a| {
            let m = masses[kept.row_of(a)];
            let c = kept.at_mut(a);
            c.omega = m - c.alpha;
        });
        index::for_each_assignment(&vars, &radix, &mut full, |a| {
            let total = kept.at(a).alpha;
            let c = child.at_mut(a);
            c.omega = (total - c.alpha).max(0.0);
        });
        (kept, child)
    }
}

struct Kernel {
    joint: Cpt,
    reduced: Cpt,
    zeros: u64,
}

fn applied(net: &RawNetwork, step: Step) -> Result<(RawNetwork, TransformRecord)> {
    let mut out = net.clone();
    let rec = out.apply(&step)?;
    Ok((out, rec))
}

/// Absorb `parent` into `child`, its only child.
pub fn node_removal(net: &RawNetwork, child: VarId, parent: VarId) -> Result<(RawNetwork, TransformRecord)> {
    applied(net, Step::Removal { child, parent })
}

/// Flip the arc `from -> to`.
pub fn arc_reversal(net: &RawNetwork, from: VarId, to: VarId) -> Result<(RawNetwork, TransformRecord)> {
    applied(net, Step::Reversal { from, to })
}

/// Merge `parent` into `child` along the arc between them.
pub fn node_merging(net: &RawNetwork, child: VarId, parent: VarId) -> Result<(RawNetwork, TransformRecord)> {
    applied(
        net,
        Step::Merge {
            child,
            parent,
            linked: true,
        },
    )
}

/// Merge two nodes with no directed path between them.
pub fn node_merging_unlinked(net: &RawNetwork, a: VarId, b: VarId) -> Result<(RawNetwork, TransformRecord)> {
    applied(
        net,
        Step::Merge {
            child: b,
            parent: a,
            linked: false,
        },
    )
}

/// Split the compound node holding `node` into `keep` and the rest.
pub fn node_splitting(net: &RawNetwork, node: VarId, keep: &[VarId]) -> Result<(RawNetwork, TransformRecord)> {
    applied(
        net,
        Step::Split {
            node,
            keep: keep.to_vec(),
        },
    )
}

/// Delete a childless node.
pub fn barren_deletion(net: &RawNetwork, node: VarId) -> Result<(RawNetwork, TransformRecord)> {
    applied(net, Step::Prune { node })
}

impl RawNetwork {
    /// Fails unless every table's omega equals the row mass minus alpha.
    pub fn check_siblings(&self, tol: f64) -> Result<()> {
        for t in self.nodes.values() {
            let d = t.sibling_defect();
            if d > tol {
                return Err(QbnError::Internal(format!(
                    "table headed by {} violates the sibling identity by {d}",
                    t.head()[0]
                )));
            }
        }
        Ok(())
    }
}
