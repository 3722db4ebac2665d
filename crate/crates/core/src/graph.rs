//! Structure-only view of a (possibly transformed) network.
//!
//! Nodes are identified by the smallest variable in their head. A node reads
//! parent *variables*; the node graph has an arc `A -> B` whenever `B` reads
//! any head variable of `A`. Every transformation is validated and its
//! structural rewrite applied here, so the planner can simulate a plan
//! without touching numbers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{QbnError, Result};
use crate::model::{index, NetworkStructure, VarId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeShape {
    pub head: Vec<VarId>,
    pub parents: Vec<VarId>,
}

/// One network transformation, operands named by any variable of the node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    /// Absorb `parent` into its only child `child`.
    Removal { child: VarId, parent: VarId },
    /// Flip the arc `from -> to`.
    Reversal { from: VarId, to: VarId },
    /// Replace `parent` and `child` by one compound node. `linked` is false
    /// for a pair with no arc between them.
    Merge { child: VarId, parent: VarId, linked: bool },
    /// Split a compound node into `keep` and a child holding the rest.
    Split { node: VarId, keep: Vec<VarId> },
    /// Delete a childless node.
    Prune { node: VarId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformKind {
    Removal,
    Reversal,
    Merge,
    Split,
    Prune,
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransformKind::Removal => "removal",
            TransformKind::Reversal => "reversal",
            TransformKind::Merge => "merge",
            TransformKind::Split => "split",
            TransformKind::Prune => "prune",
        })
    }
}

impl Step {
    pub fn kind(&self) -> TransformKind {
        match self {
            Step::Removal { .. } => TransformKind::Removal,
            Step::Reversal { .. } => TransformKind::Reversal,
            Step::Merge { .. } => TransformKind::Merge,
            Step::Split { .. } => TransformKind::Split,
            Step::Prune { .. } => TransformKind::Prune,
        }
    }

    pub fn operands(&self) -> Vec<VarId> {
        match self {
            Step::Removal { child, parent } => vec![*child, *parent],
            Step::Reversal { from, to } => vec![*from, *to],
            Step::Merge { child, parent, .. } => vec![*child, *parent],
            Step::Split { node, keep } => std::iter::once(*node).chain(keep.iter().copied()).collect(),
            Step::Prune { node } => vec![*node],
        }
    }

    pub fn describe(&self, structure: &NetworkStructure) -> String {
        let n = |v: &VarId| structure.variable(*v).name.as_str();
        match self {
            Step::Removal { child, parent } => format!("node removal: {} into {}", n(parent), n(child)),
            Step::Reversal { from, to } => format!("arc reversal: {} -> {}", n(from), n(to)),
            Step::Merge { child, parent, linked: true } => format!("node merging: {} into {}", n(parent), n(child)),
            Step::Merge { child, parent, linked: false } => {
                format!("node merging (no arc): {} with {}", n(parent), n(child))
            }
            Step::Split { node, keep } => format!(
                "node splitting: {} keeping {}",
                n(node),
                keep.iter().map(n).collect::<Vec<_>>().join(",")
            ),
            Step::Prune { node } => format!("barren deletion: {}", n(node)),
        }
    }
}

/// The two nodes a removal, reversal or merge works on, with the parent
/// partition: `v1` parents of the parent node only, `v2` shared, `v3`
/// parents of the child only. `link` lists the parent node's variables the
/// child reads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fragment {
    pub child: VarId,
    pub parent: VarId,
    pub link: Vec<VarId>,
    pub v1: Vec<VarId>,
    pub v2: Vec<VarId>,
    pub v3: Vec<VarId>,
}

impl Fragment {
    pub fn new_parents(&self) -> Vec<VarId> {
        index::union(&index::union(&self.v1, &self.v2), &self.v3)
    }
}

/// A validated step, ready to be carried out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rewrite {
    Removal(Fragment),
    Reversal(Fragment),
    Merge(Fragment),
    Split { node: VarId, keep: Vec<VarId>, rest: Vec<VarId> },
    Prune { node: VarId },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skeleton {
    radix: Vec<usize>,
    nodes: BTreeMap<VarId, NodeShape>,
}

impl Skeleton {
    pub fn from_structure(structure: &NetworkStructure) -> Self {
        let nodes = structure
            .variables()
            .iter()
            .map(|v| {
                (
                    v.id,
                    NodeShape {
                        head: vec![v.id],
                        parents: structure.parents(v.id),
                    },
                )
            })
            .collect();
        Skeleton {
            radix: structure.variables().iter().map(|v| v.size()).collect(),
            nodes,
        }
    }

    pub fn from_shapes(radix: Vec<usize>, shapes: impl IntoIterator<Item = NodeShape>) -> Self {
        let nodes = shapes.into_iter().map(|s| (s.head[0], s)).collect();
        Skeleton { radix, nodes }
    }

    pub fn radix(&self, vars: &[VarId]) -> Vec<usize> {
        vars.iter().map(|v| self.radix[v.0]).collect()
    }

    pub fn keys(&self) -> impl Iterator<Item = VarId> + '_ {
        self.nodes.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, key: VarId) -> &NodeShape {
        &self.nodes[&key]
    }

    /// Key of the node holding `v`, if `v` is still in the network.
    pub fn key_of(&self, v: VarId) -> Option<VarId> {
        self.nodes.iter().find(|(_, n)| n.head.contains(&v)).map(|(k, _)| *k)
    }

    fn resolve(&self, v: VarId) -> Result<VarId> {
        self.key_of(v)
            .ok_or_else(|| QbnError::Structure(format!("variable {v} is not in the network")))
    }

    pub fn parents_of(&self, key: VarId) -> BTreeSet<VarId> {
        self.nodes[&key].parents.iter().filter_map(|p| self.key_of(*p)).collect()
    }

    pub fn children_of(&self, key: VarId) -> BTreeSet<VarId> {
        let head = &self.nodes[&key].head;
        self.nodes
            .iter()
            .filter(|(k, n)| **k != key && n.parents.iter().any(|p| head.contains(p)))
            .map(|(k, _)| *k)
            .collect()
    }

    /// Is there a directed path `from ⇝ to`? With `skip_direct`, the arc
    /// `from -> to` itself does not count.
    pub fn has_path(&self, from: VarId, to: VarId, skip_direct: bool) -> bool {
        let mut stack: Vec<VarId> = self
            .children_of(from)
            .into_iter()
            .filter(|c| !(skip_direct && *c == to))
            .collect();
        let mut seen = BTreeSet::new();
        while let Some(n) = stack.pop() {
            if n == to {
                return true;
            }
            if seen.insert(n) {
                stack.extend(self.children_of(n));
            }
        }
        false
    }

    /// Kahn order over node keys, ties broken by ascending key.
    pub fn topological_order(&self) -> Vec<VarId> {
        let mut indegree: BTreeMap<VarId, usize> = self.keys().map(|k| (k, self.parents_of(k).len())).collect();
        let mut ready: BTreeSet<VarId> = indegree.iter().filter(|(_, d)| **d == 0).map(|(k, _)| *k).collect();
        let mut order = Vec::new();
        while let Some(k) = ready.pop_first() {
            order.push(k);
            for c in self.children_of(k) {
                let d = indegree.get_mut(&c).unwrap();
                *d -= 1;
                if *d == 0 {
                    ready.insert(c);
                }
            }
        }
        order
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().len() == self.nodes.len()
    }

    /// Are node sets `xs` and `ys` d-separated by `zs`? Uses the moralized
    /// ancestral graph.
    pub fn d_separated(&self, xs: &BTreeSet<VarId>, ys: &BTreeSet<VarId>, zs: &BTreeSet<VarId>) -> bool {
        let mut relevant: BTreeSet<VarId> = xs.iter().chain(ys).chain(zs).copied().collect();
        let mut stack: Vec<VarId> = relevant.iter().copied().collect();
        while let Some(n) = stack.pop() {
            for p in self.parents_of(n) {
                if relevant.insert(p) {
                    stack.push(p);
                }
            }
        }
        let mut adj: BTreeMap<VarId, BTreeSet<VarId>> = relevant.iter().map(|k| (*k, BTreeSet::new())).collect();
        for &n in &relevant {
            let ps: Vec<VarId> = self.parents_of(n).into_iter().collect();
            for (i, &p) in ps.iter().enumerate() {
                adj.get_mut(&n).unwrap().insert(p);
                adj.get_mut(&p).unwrap().insert(n);
                for &q in &ps[i + 1..] {
                    adj.get_mut(&p).unwrap().insert(q);
                    adj.get_mut(&q).unwrap().insert(p);
                }
            }
        }
        let mut seen: BTreeSet<VarId> = BTreeSet::new();
        let mut stack: Vec<VarId> = xs.iter().filter(|x| !zs.contains(x)).copied().collect();
        while let Some(n) = stack.pop() {
            if ys.contains(&n) {
                return false;
            }
            if seen.insert(n) {
                stack.extend(adj[&n].iter().filter(|m| !zs.contains(m)).copied());
            }
        }
        true
    }

    fn node_set(&self, vars: &[VarId]) -> BTreeSet<VarId> {
        vars.iter().filter_map(|v| self.key_of(*v)).collect()
    }

    /// The count formulas hold exactly (for counts that factor over this
    /// graph) when `v1` and `v3` are d-separated given `v2`.
    pub fn fragment_is_exact(&self, frag: &Fragment) -> bool {
        if frag.v1.is_empty() || frag.v3.is_empty() {
            return true;
        }
        let (n1, n2, n3) = (self.node_set(&frag.v1), self.node_set(&frag.v2), self.node_set(&frag.v3));
        // conditioning on part of a compound node is not a node-level statement
        let v2_whole = n2.iter().all(|k| self.nodes[k].head.iter().all(|v| frag.v2.contains(v)));
        let disjoint = n1.is_disjoint(&n3) && n1.is_disjoint(&n2) && n3.is_disjoint(&n2);
        v2_whole && disjoint && self.d_separated(&n1, &n3, &n2)
    }

    pub fn fragment(&self, child: VarId, parent: VarId) -> Result<Fragment> {
        let (ck, pk) = (self.resolve(child)?, self.resolve(parent)?);
        if ck == pk {
            return Err(QbnError::Structure(format!("{child} and {parent} are the same node")));
        }
        let (i, j) = (&self.nodes[&ck], &self.nodes[&pk]);
        let link = index::intersection(&i.parents, &j.head);
        let v1 = index::difference(&j.parents, &i.parents);
        let v2 = index::intersection(&j.parents, &i.parents);
        let v3 = index::difference(&index::difference(&i.parents, &j.head), &j.parents);
        Ok(Fragment {
            child: ck,
            parent: pk,
            link,
            v1,
            v2,
            v3,
        })
    }

    /// Validate `step` against the current structure.
    pub fn prepare(&self, step: &Step) -> Result<Rewrite> {
        match step {
            Step::Removal { child, parent } => {
                let f = self.fragment(*child, *parent)?;
                if f.link.is_empty() {
                    return Err(QbnError::Structure(format!("{parent} is not a parent of {child}")));
                }
                if self.children_of(f.parent).len() != 1 {
                    return Err(QbnError::Structure(format!(
                        "{parent} has children besides {child}; reverse or merge them first"
                    )));
                }
                Ok(Rewrite::Removal(f))
            }
            Step::Reversal { from, to } => {
                let f = self.fragment(*to, *from)?;
                if f.link.is_empty() {
                    return Err(QbnError::Structure(format!("no arc {from} -> {to}")));
                }
                if self.has_path(f.parent, f.child, true) {
                    return Err(QbnError::Cycle(format!(
                        "reversing {from} -> {to} would close a cycle through another path"
                    )));
                }
                Ok(Rewrite::Reversal(f))
            }
            Step::Merge { child, parent, linked } => {
                let f = self.fragment(*child, *parent)?;
                if *linked {
                    if f.link.is_empty() {
                        return Err(QbnError::Structure(format!("no arc {parent} -> {child} to merge along")));
                    }
                    if self.has_path(f.parent, f.child, true) {
                        return Err(QbnError::Cycle(format!(
                            "merging {parent} into {child} would close a cycle"
                        )));
                    }
                } else if self.has_path(f.parent, f.child, false) || self.has_path(f.child, f.parent, false) {
                    return Err(QbnError::Structure(format!(
                        "{parent} and {child} are connected by a directed path; merge along an arc instead"
                    )));
                }
                Ok(Rewrite::Merge(f))
            }
            Step::Split { node, keep } => {
                let k = self.resolve(*node)?;
                let head = &self.nodes[&k].head;
                let mut keep = keep.clone();
                keep.sort_unstable();
                keep.dedup();
                if keep.is_empty() || keep.iter().any(|v| !head.contains(v)) {
                    return Err(QbnError::Structure(format!(
                        "split factors {keep:?} are not part of the compound node {node}"
                    )));
                }
                let rest = index::difference(head, &keep);
                if rest.is_empty() {
                    return Err(QbnError::Structure(format!("split of {node} must leave a child factor")));
                }
                Ok(Rewrite::Split { node: k, keep, rest })
            }
            Step::Prune { node } => {
                let k = self.resolve(*node)?;
                if !self.children_of(k).is_empty() {
                    return Err(QbnError::Structure(format!("{node} is not barren")));
                }
                Ok(Rewrite::Prune { node: k })
            }
        }
    }

    /// Apply a prepared rewrite to the structure.
    pub fn commit(&mut self, rw: &Rewrite) -> Result<()> {
        match rw {
            Rewrite::Removal(f) => {
                self.nodes.get_mut(&f.child).unwrap().parents = f.new_parents();
                self.nodes.remove(&f.parent);
            }
            Rewrite::Reversal(f) => {
                let child_head = self.nodes[&f.child].head.clone();
                self.nodes.get_mut(&f.child).unwrap().parents = f.new_parents();
                self.nodes.get_mut(&f.parent).unwrap().parents = index::union(&f.new_parents(), &child_head);
            }
            Rewrite::Merge(f) => {
                let i = self.nodes.remove(&f.child).unwrap();
                let j = self.nodes.remove(&f.parent).unwrap();
                let head = index::union(&i.head, &j.head);
                self.nodes.insert(
                    head[0],
                    NodeShape {
                        head,
                        parents: f.new_parents(),
                    },
                );
            }
            Rewrite::Split { node, keep, rest } => {
                let k = self.nodes.remove(node).unwrap();
                self.nodes.insert(
                    keep[0],
                    NodeShape {
                        head: keep.clone(),
                        parents: k.parents.clone(),
                    },
                );
                self.nodes.insert(
                    rest[0],
                    NodeShape {
                        head: rest.clone(),
                        parents: index::union(&k.parents, keep),
                    },
                );
            }
            Rewrite::Prune { node } => {
                self.nodes.remove(node);
            }
        }
        if !self.is_acyclic() {
            return Err(QbnError::Cycle("transformation produced a directed cycle".into()));
        }
        Ok(())
    }

    pub fn apply(&mut self, step: &Step) -> Result<Rewrite> {
        let rw = self.prepare(step)?;
        self.commit(&rw)?;
        Ok(rw)
    }
}
