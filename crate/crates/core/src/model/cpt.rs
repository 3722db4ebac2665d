use crate::error::{QbnError, Result};

use super::index;
use super::{BetaStat, VarId};

/// A conditional table of beta statistics `Pr(head | parents)`.
///
/// Learned tables have a single head variable. Tables produced by node
/// merging have a compound head whose cells range over the joint domain of
/// the head variables. Cells are laid out row-major over parent rows:
/// `cells[row * head_card + value]`, each index little-endian over its
/// ascending variable list.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    head: Vec<VarId>,
    head_radix: Vec<usize>,
    parents: Vec<VarId>,
    parent_radix: Vec<usize>,
    cells: Vec<BetaStat>,
}

impl Cpt {
    /// All-zero table. Both variable lists must be ascending and disjoint.
    pub fn zeros(head: Vec<VarId>, head_radix: Vec<usize>, parents: Vec<VarId>, parent_radix: Vec<usize>) -> Self {
        debug_assert!(head.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(parents.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(head.iter().all(|h| !parents.contains(h)));
        let n = index::cardinality(&head_radix) * index::cardinality(&parent_radix);
        Cpt {
            head,
            head_radix,
            parents,
            parent_radix,
            cells: vec![BetaStat::ZERO; n],
        }
    }

    /// Owning variable of a single-head table.
    pub fn owner(&self) -> VarId {
        self.head[0]
    }

    pub fn head(&self) -> &[VarId] {
        &self.head
    }

    pub fn head_radix(&self) -> &[usize] {
        &self.head_radix
    }

    pub fn parents(&self) -> &[VarId] {
        &self.parents
    }

    pub fn parent_radix(&self) -> &[usize] {
        &self.parent_radix
    }

    pub fn is_compound(&self) -> bool {
        self.head.len() > 1
    }

    pub fn head_card(&self) -> usize {
        index::cardinality(&self.head_radix)
    }

    pub fn rows(&self) -> usize {
        index::cardinality(&self.parent_radix)
    }

    pub fn cells(&self) -> &[BetaStat] {
        &self.cells
    }

    pub fn cells_mut(&mut self) -> &mut [BetaStat] {
        &mut self.cells
    }

    pub fn reads(&self, v: VarId) -> bool {
        self.parents.contains(&v)
    }

    pub fn contains(&self, v: VarId) -> bool {
        self.head.contains(&v)
    }

    fn check(&self, row: usize, value: usize) -> Result<usize> {
        if row >= self.rows() || value >= self.head_card() {
            return Err(QbnError::Index(format!(
                "cell ({row}, {value}) outside a {}x{} table",
                self.rows(),
                self.head_card()
            )));
        }
        Ok(row * self.head_card() + value)
    }

    pub fn cell(&self, row: usize, value: usize) -> Result<BetaStat> {
        Ok(self.cells[self.check(row, value)?])
    }

    pub fn cell_mut(&mut self, row: usize, value: usize) -> Result<&mut BetaStat> {
        let i = self.check(row, value)?;
        Ok(&mut self.cells[i])
    }

    pub fn row_of(&self, full: &[usize]) -> usize {
        index::encode_from(&self.parents, &self.parent_radix, full)
    }

    pub fn value_of(&self, full: &[usize]) -> usize {
        index::encode_from(&self.head, &self.head_radix, full)
    }

    /// Flat cell index for a full assignment (indexed by variable id).
    pub fn index_of(&self, full: &[usize]) -> usize {
        self.row_of(full) * self.head_card() + self.value_of(full)
    }

    pub fn at(&self, full: &[usize]) -> BetaStat {
        self.cells[self.index_of(full)]
    }

    pub fn at_mut(&mut self, full: &[usize]) -> &mut BetaStat {
        let i = self.index_of(full);
        &mut self.cells[i]
    }

    /// Head and parents, ascending.
    pub fn scope(&self) -> (Vec<VarId>, Vec<usize>) {
        let vars = index::union(&self.head, &self.parents);
        let radix = vars
            .iter()
            .map(|v| {
                self.head
                    .iter()
                    .position(|h| h == v)
                    .map(|i| self.head_radix[i])
                    .unwrap_or_else(|| self.parent_radix[self.parents.iter().position(|p| p == v).unwrap()])
            })
            .collect();
        (vars, radix)
    }

    /// Sum of alpha over a row: the (reconstructed) number of samples matching it.
    pub fn row_mass(&self, row: usize) -> f64 {
        let k = self.head_card();
        self.cells[row * k..(row + 1) * k].iter().map(|c| c.alpha).sum()
    }

    /// Largest violation of `omega(j,k) = Σ_{k'≠k} alpha(j,k')` over all cells.
    pub fn sibling_defect(&self) -> f64 {
        let k = self.head_card();
        let mut worst: f64 = 0.0;
        for row in 0..self.rows() {
            let mass = self.row_mass(row);
            for c in &self.cells[row * k..(row + 1) * k] {
                worst = worst.max((c.omega - (mass - c.alpha)).abs());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Cpt) -> Option<f64> {
        if self.head != other.head || self.parents != other.parents {
            return None;
        }
        Some(
            self.cells
                .iter()
                .zip(&other.cells)
                .map(|(a, b)| (a.alpha - b.alpha).abs().max((a.omega - b.omega).abs()))
                .fold(0.0, f64::max),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_row_major_over_parent_rows() {
        let mut t = Cpt::zeros(vec![VarId(2)], vec![3], vec![VarId(0), VarId(1)], vec![2, 2]);
        assert_eq!(t.rows(), 4);
        assert_eq!(t.head_card(), 3);
        t.cell_mut(2, 1).unwrap().alpha = 7.0;
        let full = [0, 1, 1];
        assert_eq!(t.row_of(&full), 2);
        assert_eq!(t.at(&full).alpha, 7.0);
        assert!(t.cell(4, 0).is_err());
        assert!(t.cell(0, 3).is_err());
    }

    #[test]
    fn sibling_defect_detects_inconsistent_rows() {
        let mut t = Cpt::zeros(vec![VarId(0)], vec![2], vec![], vec![]);
        t.cells_mut()[0] = BetaStat::raw(3.0, 2.0);
        t.cells_mut()[1] = BetaStat::raw(2.0, 3.0);
        assert_eq!(t.sibling_defect(), 0.0);
        t.cells_mut()[1].omega = 4.0;
        assert_eq!(t.sibling_defect(), 1.0);
    }
}
