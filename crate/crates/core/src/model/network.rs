use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{QbnError, Result};

use super::index;

/// Identifier of a variable: its position in the network's declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A discrete variable with an ordered domain of value labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub id: VarId,
    pub name: String,
    pub domain: Vec<String>,
}

impl Variable {
    pub fn new(id: VarId, name: impl Into<String>, domain: Vec<String>) -> Result<Self> {
        let name = name.into();
        if domain.is_empty() {
            return Err(QbnError::Schema(format!("variable `{name}` has an empty domain")));
        }
        let mut seen = BTreeSet::new();
        for label in &domain {
            if !seen.insert(label.as_str()) {
                return Err(QbnError::Schema(format!(
                    "duplicate value label `{label}` in domain of `{name}`"
                )));
            }
        }
        Ok(Variable { id, name, domain })
    }

    pub fn size(&self) -> usize {
        self.domain.len()
    }

    /// A single-valued domain acts as an identity factor.
    pub fn is_degenerate(&self) -> bool {
        self.domain.len() == 1
    }

    pub fn value_index(&self, label: &str) -> Option<usize> {
        self.domain.iter().position(|d| d == label)
    }
}

/// The qualitative structure: variables plus directed arcs, guaranteed acyclic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkStructure {
    variables: Vec<Variable>,
    edges: BTreeSet<(VarId, VarId)>,
    by_name: HashMap<String, VarId>,
}

impl NetworkStructure {
    pub fn new(variables: Vec<Variable>, edges: impl IntoIterator<Item = (VarId, VarId)>) -> Result<Self> {
        let mut by_name = HashMap::new();
        for (i, v) in variables.iter().enumerate() {
            if v.id != VarId(i) {
                return Err(QbnError::Schema(format!(
                    "variable `{}` has id {} but sits at position {i}",
                    v.name, v.id.0
                )));
            }
            if by_name.insert(v.name.clone(), v.id).is_some() {
                return Err(QbnError::Schema(format!("duplicate node name `{}`", v.name)));
            }
        }
        let mut set = BTreeSet::new();
        for (p, c) in edges {
            if p.0 >= variables.len() || c.0 >= variables.len() {
                return Err(QbnError::Schema(format!("edge {p} -> {c} has an unknown endpoint")));
            }
            if p == c {
                return Err(QbnError::Cycle(format!("self loop on `{}`", variables[p.0].name)));
            }
            set.insert((p, c));
        }
        let s = NetworkStructure { variables, edges: set, by_name };
        if let Some(v) = s.find_cycle() {
            return Err(QbnError::Cycle(format!(
                "structure contains a directed cycle through `{}`",
                s.variables[v.0].name
            )));
        }
        Ok(s)
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, id: VarId) -> &Variable {
        &self.variables[id.0]
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (VarId, VarId)> + '_ {
        self.edges.iter().copied()
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.by_name.get(name).copied()
    }

    /// Parents in canonical (ascending id) order.
    pub fn parents(&self, node: VarId) -> Vec<VarId> {
        self.edges.iter().filter(|(_, c)| *c == node).map(|(p, _)| *p).collect()
    }

    pub fn children(&self, node: VarId) -> Vec<VarId> {
        self.edges.iter().filter(|(p, _)| *p == node).map(|(_, c)| *c).collect()
    }

    pub fn radix(&self, vars: &[VarId]) -> Vec<usize> {
        vars.iter().map(|v| self.variables[v.0].size()).collect()
    }

    pub fn parent_rows(&self, node: VarId) -> usize {
        index::cardinality(&self.radix(&self.parents(node)))
    }

    /// Kahn order with ties broken by ascending id.
    pub fn topological_order(&self) -> Vec<VarId> {
        let n = self.variables.len();
        let mut indegree = vec![0usize; n];
        for (_, c) in &self.edges {
            indegree[c.0] += 1;
        }
        let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = ready.pop_first() {
            order.push(VarId(i));
            for c in self.children(VarId(i)) {
                indegree[c.0] -= 1;
                if indegree[c.0] == 0 {
                    ready.insert(c.0);
                }
            }
        }
        order
    }

    fn find_cycle(&self) -> Option<VarId> {
        let order = self.topological_order();
        if order.len() == self.variables.len() {
            return None;
        }
        (0..self.variables.len())
            .map(VarId)
            .find(|v| !order.contains(v))
    }
}

/// One value index per parent of the owning node, in canonical parent order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParentInstantiation {
    pub assignments: Vec<usize>,
}

impl ParentInstantiation {
    pub fn new(assignments: Vec<usize>) -> Self {
        ParentInstantiation { assignments }
    }

    /// Build from `(parent name, value label)` pairs in any order.
    pub fn from_labels(structure: &NetworkStructure, node: VarId, labels: &[(&str, &str)]) -> Result<Self> {
        let parents = structure.parents(node);
        let mut values = vec![None; parents.len()];
        for (name, label) in labels {
            let pos = structure
                .var_by_name(name)
                .and_then(|id| parents.iter().position(|p| *p == id))
                .ok_or_else(|| {
                    QbnError::MalformedInstantiation(format!(
                        "`{name}` is not a parent of `{}`",
                        structure.variable(node).name
                    ))
                })?;
            let var = structure.variable(parents[pos]);
            let k = var.value_index(label).ok_or_else(|| {
                QbnError::MalformedInstantiation(format!("`{label}` is not a value of `{}`", var.name))
            })?;
            values[pos] = Some(k);
        }
        let assignments = values
            .into_iter()
            .zip(&parents)
            .map(|(v, p)| {
                v.ok_or_else(|| {
                    QbnError::MalformedInstantiation(format!(
                        "parent `{}` is not assigned",
                        structure.variable(*p).name
                    ))
                })
            })
            .collect::<Result<_>>()?;
        Ok(ParentInstantiation { assignments })
    }
}

/// Flat row index `j` of a parent instantiation.
pub fn row_index(structure: &NetworkStructure, node: VarId, inst: &ParentInstantiation) -> Result<usize> {
    let parents = structure.parents(node);
    if inst.assignments.len() != parents.len() {
        return Err(QbnError::MalformedInstantiation(format!(
            "`{}` has {} parents, instantiation assigns {}",
            structure.variable(node).name,
            parents.len(),
            inst.assignments.len()
        )));
    }
    let radix = structure.radix(&parents);
    for ((&v, &r), p) in inst.assignments.iter().zip(&radix).zip(&parents) {
        if v >= r {
            return Err(QbnError::MalformedInstantiation(format!(
                "value index {v} out of range for `{}`",
                structure.variable(*p).name
            )));
        }
    }
    Ok(index::encode(&inst.assignments, &radix))
}

pub fn row_decode(structure: &NetworkStructure, node: VarId, row: usize) -> Result<ParentInstantiation> {
    let radix = structure.radix(&structure.parents(node));
    if row >= index::cardinality(&radix) {
        return Err(QbnError::Index(format!(
            "row {row} out of range for `{}`",
            structure.variable(node).name
        )));
    }
    Ok(ParentInstantiation::new(index::decode(row, &radix)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary(id: usize, name: &str) -> Variable {
        Variable::new(VarId(id), name, vec![name.to_lowercase(), format!("not_{}", name.to_lowercase())]).unwrap()
    }

    fn family_out() -> NetworkStructure {
        let vars = ["FO", "BP", "LO", "DO", "HB"]
            .iter()
            .enumerate()
            .map(|(i, n)| binary(i, n))
            .collect();
        NetworkStructure::new(vars, [(0, 2), (0, 3), (1, 3), (3, 4)].map(|(a, b)| (VarId(a), VarId(b)))).unwrap()
    }

    #[test]
    fn root_has_single_empty_row() {
        let s = family_out();
        assert_eq!(row_index(&s, VarId(0), &ParentInstantiation::new(vec![])).unwrap(), 0);
        assert_eq!(s.parent_rows(VarId(0)), 1);
    }

    #[test]
    fn two_parent_row_is_mixed_radix() {
        let s = family_out();
        // parents of DO in canonical order: FO, BP
        let inst = ParentInstantiation::from_labels(&s, VarId(3), &[("BP", "bp"), ("FO", "not_fo")]).unwrap();
        assert_eq!(inst.assignments, vec![1, 0]);
        assert_eq!(row_index(&s, VarId(3), &inst).unwrap(), 1);
    }

    #[test]
    fn every_row_round_trips() {
        let s = family_out();
        for node in 0..s.len() {
            let node = VarId(node);
            for j in 0..s.parent_rows(node) {
                let inst = row_decode(&s, node, j).unwrap();
                assert_eq!(row_index(&s, node, &inst).unwrap(), j);
            }
        }
    }

    #[test]
    fn unknown_label_is_malformed() {
        let s = family_out();
        let err = ParentInstantiation::from_labels(&s, VarId(3), &[("FO", "maybe"), ("BP", "bp")]).unwrap_err();
        assert!(matches!(err, QbnError::MalformedInstantiation(_)));
    }

    #[test]
    fn cycles_are_rejected() {
        let vars = vec![binary(0, "A"), binary(1, "B"), binary(2, "C")];
        let err = NetworkStructure::new(vars, [(0, 1), (1, 2), (2, 0)].map(|(a, b)| (VarId(a), VarId(b))));
        assert!(matches!(err, Err(QbnError::Cycle(_))));
    }

    #[test]
    fn duplicate_labels_are_rejected() {
        assert!(Variable::new(VarId(0), "A", vec!["x".into(), "x".into()]).is_err());
        assert!(Variable::new(VarId(0), "A", vec!["x".into()]).unwrap().is_degenerate());
    }

    #[test]
    fn topological_order_breaks_ties_by_id() {
        let s = family_out();
        assert_eq!(s.topological_order(), [0, 1, 2, 3, 4].map(VarId).to_vec());
    }
}
