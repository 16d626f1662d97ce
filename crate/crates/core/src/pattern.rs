//! Hyper-rectangle patterns on a discretization grid.

use serde::{Deserialize, Serialize};

use crate::dataset::{DiscretizationGrid, DiscretizedDataset, ElementaryCell};
use crate::error::{Error, Result};

/// Inclusive interval-index bounds per attribute, plus the objects the
/// pattern encodes. `cover` is kept sorted and duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperRectangle {
    pub lower: Vec<u32>,
    pub upper: Vec<u32>,
    pub cover: Vec<usize>,
}

impl HyperRectangle {
    pub fn new(lower: Vec<u32>, upper: Vec<u32>, mut cover: Vec<usize>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch(lower.len(), upper.len()));
        }
        if lower.iter().zip(&upper).any(|(l, u)| l > u) {
            return Err(Error::Invalid("lower bound exceeds upper bound".into()));
        }
        cover.sort_unstable();
        cover.dedup();
        Ok(HyperRectangle {
            lower,
            upper,
            cover,
        })
    }

    pub fn from_cell(cell: &ElementaryCell) -> Self {
        HyperRectangle {
            lower: cell.coords.clone(),
            upper: cell.coords.clone(),
            cover: cell.cover.clone(),
        }
    }

    pub fn n_dims(&self) -> usize {
        self.lower.len()
    }

    /// `usg(h)`.
    pub fn usage(&self) -> usize {
        self.cover.len()
    }

    /// Number of elementary intervals on side `i`.
    pub fn size(&self, i: usize) -> u32 {
        self.upper[i] - self.lower[i] + 1
    }

    pub fn sizes(&self) -> Vec<u32> {
        (0..self.n_dims()).map(|i| self.size(i)).collect()
    }

    /// `Σ_i log2 size(h, i)`, the bits needed to place one object inside `h`.
    pub fn log_size(&self) -> f64 {
        log_volume(&self.lower, &self.upper)
    }

    pub fn is_elementary(&self) -> bool {
        self.lower == self.upper
    }

    pub fn contains_point(&self, coords: &[u32]) -> bool {
        contains_point(&self.lower, &self.upper, coords)
    }

    /// Geometric inclusion `other ⊆ self`.
    pub fn contains(&self, other: &HyperRectangle) -> bool {
        box_contains(&self.lower, &self.upper, &other.lower, &other.upper)
    }

    /// Smallest rectangle containing both; the cover is the union of covers.
    pub fn join(&self, other: &HyperRectangle) -> Result<HyperRectangle> {
        if self.n_dims() != other.n_dims() {
            return Err(Error::DimensionMismatch(self.n_dims(), other.n_dims()));
        }
        Ok(self.joined(other))
    }

    pub(crate) fn joined(&self, other: &HyperRectangle) -> HyperRectangle {
        let (lower, upper) = join_bounds(&self.lower, &self.upper, &other.lower, &other.upper);
        HyperRectangle {
            lower,
            upper,
            cover: union_sorted(&self.cover, &other.cover),
        }
    }

    /// Real-valued box spanned by the pattern's intervals.
    pub fn to_real(&self, grid: &DiscretizationGrid) -> RealRect {
        let (lo, hi) = (0..self.n_dims())
            .map(|i| grid.span(i, self.lower[i], self.upper[i]))
            .unzip();
        RealRect { lo, hi }
    }
}

/// Axis-aligned box in the original attribute space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealRect {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl RealRect {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        debug_assert_eq!(lo.len(), hi.len());
        RealRect { lo, hi }
    }

    pub fn n_dims(&self) -> usize {
        self.lo.len()
    }

    pub fn contains_point(&self, p: &[f64]) -> bool {
        p.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (lo, hi))| lo <= v && v <= hi)
    }

    /// `other` lies strictly inside `self` on every side.
    pub fn strictly_contains(&self, other: &RealRect) -> bool {
        (0..self.n_dims()).all(|i| self.lo[i] < other.lo[i] && other.hi[i] < self.hi[i])
    }

    pub fn intersects(&self, other: &RealRect) -> bool {
        (0..self.n_dims()).all(|i| self.lo[i].max(other.lo[i]) < self.hi[i].min(other.hi[i]))
    }
}

pub(crate) fn log_volume(lower: &[u32], upper: &[u32]) -> f64 {
    lower
        .iter()
        .zip(upper)
        .map(|(&l, &u)| f64::from(u - l + 1).log2())
        .sum()
}

pub(crate) fn contains_point(lower: &[u32], upper: &[u32], p: &[u32]) -> bool {
    p.iter()
        .zip(lower.iter().zip(upper))
        .all(|(v, (l, u))| l <= v && v <= u)
}

pub(crate) fn box_contains(lower: &[u32], upper: &[u32], in_lo: &[u32], in_hi: &[u32]) -> bool {
    (0..lower.len()).all(|i| lower[i] <= in_lo[i] && in_hi[i] <= upper[i])
}

pub(crate) fn join_bounds(
    a_lo: &[u32],
    a_hi: &[u32],
    b_lo: &[u32],
    b_hi: &[u32],
) -> (Vec<u32>, Vec<u32>) {
    let lower = a_lo.iter().zip(b_lo).map(|(a, b)| *a.min(b)).collect();
    let upper = a_hi.iter().zip(b_hi).map(|(a, b)| *a.max(b)).collect();
    (lower, upper)
}

pub(crate) fn union_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// The model `ℋ`: patterns whose covers partition the object set.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PatternSet {
    patterns: Vec<HyperRectangle>,
}

impl PatternSet {
    pub fn new(patterns: Vec<HyperRectangle>) -> Self {
        PatternSet { patterns }
    }

    /// One elementary pattern per non-empty cell.
    pub fn elementary(cells: &[ElementaryCell]) -> Self {
        PatternSet {
            patterns: cells.iter().map(HyperRectangle::from_cell).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn patterns(&self) -> &[HyperRectangle] {
        &self.patterns
    }

    pub fn get(&self, idx: usize) -> Option<&HyperRectangle> {
        self.patterns.get(idx)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, HyperRectangle> {
        self.patterns.iter()
    }

    pub fn into_inner(self) -> Vec<HyperRectangle> {
        self.patterns
    }

    pub fn usages(&self) -> Vec<usize> {
        self.patterns.iter().map(HyperRectangle::usage).collect()
    }

    /// Replaces patterns `j` and `k` by their join (appended last).
    pub fn merged(&self, j: usize, k: usize) -> Result<PatternSet> {
        self.merged_many(&[j, k])
    }

    /// Replaces the patterns at `indices` by the join of all of them.
    pub fn merged_many(&self, indices: &[usize]) -> Result<PatternSet> {
        let first = *indices.first().ok_or(Error::EmptyPatternSet)?;
        let mut joined = self
            .patterns
            .get(first)
            .ok_or(Error::UnknownPattern(first))?
            .clone();
        for &idx in &indices[1..] {
            let h = self.patterns.get(idx).ok_or(Error::UnknownPattern(idx))?;
            joined = joined.join(h)?;
        }
        let mut patterns: Vec<HyperRectangle> = self
            .patterns
            .iter()
            .enumerate()
            .filter(|(i, _)| !indices.contains(i))
            .map(|(_, h)| h.clone())
            .collect();
        patterns.push(joined);
        Ok(PatternSet { patterns })
    }

    /// Checks that covers are pairwise disjoint, union to `0..n_objects`, and
    /// that every covered object lies inside its pattern.
    pub fn check_partition(&self, n_objects: usize) -> Result<()> {
        let mut owner = vec![usize::MAX; n_objects];
        for (p, h) in self.patterns.iter().enumerate() {
            for &g in &h.cover {
                if g >= n_objects {
                    return Err(Error::NotAPartition(format!("object {g} out of range")));
                }
                if owner[g] != usize::MAX {
                    return Err(Error::NotAPartition(format!(
                        "object {g} covered by patterns {} and {p}",
                        owner[g]
                    )));
                }
                owner[g] = p;
            }
        }
        if let Some(g) = owner.iter().position(|&o| o == usize::MAX) {
            return Err(Error::NotAPartition(format!("object {g} is not covered")));
        }
        Ok(())
    }

    /// Every covered object lies geometrically inside its pattern.
    pub fn is_geometrically_sound(&self, data: &DiscretizedDataset) -> bool {
        self.patterns
            .iter()
            .all(|h| h.cover.iter().all(|&g| h.contains_point(data.coords(g))))
    }
}

impl<'a> IntoIterator for &'a PatternSet {
    type Item = &'a HyperRectangle;
    type IntoIter = std::slice::Iter<'a, HyperRectangle>;

    fn into_iter(self) -> Self::IntoIter {
        self.patterns.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(coords: &[u32], cover: &[usize]) -> HyperRectangle {
        HyperRectangle::new(coords.to_vec(), coords.to_vec(), cover.to_vec()).unwrap()
    }

    #[test]
    fn join_of_two_cells() {
        let h1 = cell(&[0, 0], &[0]);
        let h3 = cell(&[4, 0], &[3]);
        let h8 = h1.join(&h3).unwrap();
        assert_eq!(h8.lower, vec![0, 0]);
        assert_eq!(h8.upper, vec![4, 0]);
        assert_eq!(h8.usage(), 2);
        assert_eq!(h8.sizes(), vec![5, 1]);
    }

    #[test]
    fn join_is_idempotent() {
        let h = HyperRectangle::new(vec![1, 2], vec![3, 5], vec![4, 7, 9]).unwrap();
        assert_eq!(h.join(&h).unwrap(), h);
    }

    #[test]
    fn join_of_running_example_strips() {
        let h9 = HyperRectangle::new(vec![4, 4], vec![7, 4], vec![4, 5, 7]).unwrap();
        let h10 = HyperRectangle::new(vec![4, 7], vec![7, 7], vec![6, 8, 9, 10, 11]).unwrap();
        let h11 = h9.join(&h10).unwrap();
        assert_eq!(h11.cover, (4..12).collect::<Vec<_>>());
        assert_eq!(h11.usage(), 8);
        assert_eq!(h11.sizes(), vec![4, 4]);
        assert!(h11.contains(&h9) && h11.contains(&h10));
    }

    #[test]
    fn join_dimension_mismatch() {
        let a = cell(&[0, 0], &[0]);
        let b = cell(&[0], &[1]);
        assert!(matches!(a.join(&b), Err(Error::DimensionMismatch(2, 1))));
    }

    #[test]
    fn partition_checks() {
        let s = PatternSet::new(vec![cell(&[0], &[0, 1]), cell(&[1], &[2])]);
        assert!(s.check_partition(3).is_ok());
        assert!(s.check_partition(4).is_err());
        let overlap = PatternSet::new(vec![cell(&[0], &[0, 1]), cell(&[1], &[1, 2])]);
        assert!(overlap.check_partition(3).is_err());
    }

    #[test]
    fn merged_many_appends_join() {
        let s = PatternSet::new(vec![cell(&[0], &[0]), cell(&[1], &[1]), cell(&[2], &[2])]);
        let m = s.merged_many(&[0, 2]).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.patterns()[1].lower, vec![0]);
        assert_eq!(m.patterns()[1].upper, vec![2]);
        assert_eq!(m.patterns()[1].cover, vec![0, 2]);
        assert!(matches!(s.merged(0, 7), Err(Error::UnknownPattern(7))));
    }
}
