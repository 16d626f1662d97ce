//! Quality metrics for mined pattern sets.

use std::collections::{BTreeSet, HashMap};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dataset::{elementary_cells, Dataset, DiscretizationGrid, DiscretizedDataset};
use crate::error::{Error, Result};
use crate::mdl::LengthBreakdown;
use crate::pattern::{HyperRectangle, PatternSet, RealRect};

/// Mined total length over the elementary-model total length.
pub fn compression_ratio(mined: &LengthBreakdown, baseline: &LengthBreakdown) -> Result<f64> {
    if baseline.total_bits.is_nan() || baseline.total_bits <= 0.0 {
        return Err(Error::Invalid("baseline length must be positive".into()));
    }
    Ok(mined.total_bits / baseline.total_bits)
}

/// Widens zero-length sides to `eta`, centred on the original position.
fn widened(r: &RealRect, eta: f64) -> RealRect {
    let mut out = r.clone();
    for i in 0..r.n_dims() {
        if r.hi[i] - r.lo[i] <= 0.0 {
            out.lo[i] -= eta / 2.0;
            out.hi[i] += eta / 2.0;
        }
    }
    out
}

fn area(lo: &[f64], hi: &[f64]) -> f64 {
    lo.iter().zip(hi).map(|(l, h)| (h - l).max(0.0)).product()
}

/// Area of the intersection over area of the join (smallest enclosing box).
/// Zero-length sides count as `eta` wide.
pub fn rect_jaccard_guarded(a: &RealRect, b: &RealRect, eta: f64) -> f64 {
    let (a, b) = (widened(a, eta), widened(b, eta));
    let n = a.n_dims();
    let inter_lo: Vec<f64> = (0..n).map(|i| a.lo[i].max(b.lo[i])).collect();
    let inter_hi: Vec<f64> = (0..n).map(|i| a.hi[i].min(b.hi[i])).collect();
    let join_lo: Vec<f64> = (0..n).map(|i| a.lo[i].min(b.lo[i])).collect();
    let join_hi: Vec<f64> = (0..n).map(|i| a.hi[i].max(b.hi[i])).collect();
    let join = area(&join_lo, &join_hi);
    if join <= 0.0 {
        return if a == b { 1.0 } else { 0.0 };
    }
    (area(&inter_lo, &inter_hi) / join).clamp(0.0, 1.0)
}

pub fn rect_jaccard(a: &RealRect, b: &RealRect) -> f64 {
    rect_jaccard_guarded(a, b, 0.0)
}

/// Mean over `a` of the best rect Jaccard against any member of `b`.
pub fn jcd(a: &[RealRect], b: &[RealRect], eta: f64) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::EmptyPatternSet);
    }
    let sum: f64 = a
        .iter()
        .map(|x| {
            b.iter()
                .map(|y| rect_jaccard_guarded(x, y, eta))
                .fold(0.0, f64::max)
        })
        .sum();
    Ok(sum / a.len() as f64)
}

/// How mined index rectangles are placed back into attribute space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RectMapping {
    /// Outer endpoints of the grid intervals the pattern spans.
    Grid,
    /// Bounding box of the values of the objects the pattern covers.
    #[default]
    Cover,
}

/// Real-valued boxes of mined patterns.
pub fn real_rectangles(
    patterns: &PatternSet,
    data: &Dataset,
    grid: &DiscretizationGrid,
    mapping: RectMapping,
) -> Vec<RealRect> {
    patterns
        .iter()
        .map(|h| match mapping {
            RectMapping::Grid => h.to_real(grid),
            RectMapping::Cover => cover_box(h, data),
        })
        .collect()
}

fn cover_box(h: &HyperRectangle, data: &Dataset) -> RealRect {
    let k = data.n_attributes();
    let mut lo = vec![f64::INFINITY; k];
    let mut hi = vec![f64::NEG_INFINITY; k];
    for &g in &h.cover {
        for (i, &v) in data.row(g).iter().enumerate() {
            lo[i] = lo[i].min(v);
            hi[i] = hi[i].max(v);
        }
    }
    RealRect::new(lo, hi)
}

/// Smallest grid interval width, used as the degenerate-side guard.
pub fn grid_resolution(grid: &DiscretizationGrid) -> f64 {
    (0..grid.n_attributes())
        .flat_map(|i| grid.cuts(i).windows(2).map(|w| w[1] - w[0]))
        .filter(|w| *w > 0.0)
        .fold(f64::INFINITY, f64::min)
        .min(1.0)
}

/// Jaccard of the occurrence sets (objects geometrically inside) of each
/// pattern pair, averaged over the deduplicated union of every pattern's
/// `top` most similar partners. `None` with fewer than two patterns.
pub fn pairwise_cover_jaccard(
    patterns: &PatternSet,
    data: &DiscretizedDataset,
    top: usize,
) -> Option<f64> {
    let h = patterns.len();
    if h < 2 || top == 0 {
        return None;
    }
    let cells = elementary_cells(data);
    let occurrences: Vec<Vec<usize>> = patterns
        .iter()
        .map(|p| {
            (0..cells.len())
                .filter(|&c| p.contains_point(&cells[c].coords))
                .collect()
        })
        .collect();
    let weight = |c: usize| cells[c].usage();
    let sizes: Vec<usize> = occurrences
        .iter()
        .map(|o| o.iter().map(|&c| weight(c)).sum())
        .collect();

    let similarity = |a: usize, b: usize| -> f64 {
        let shared: usize = intersect_sorted(&occurrences[a], &occurrences[b])
            .map(weight)
            .sum();
        let union = sizes[a] + sizes[b] - shared;
        if union == 0 {
            0.0
        } else {
            shared as f64 / union as f64
        }
    };

    let mut sims: HashMap<(usize, usize), f64> = HashMap::new();
    for a in 0..h {
        for b in a + 1..h {
            sims.insert((a, b), similarity(a, b));
        }
    }
    let mut chosen = BTreeSet::new();
    for a in 0..h {
        let mut partners: Vec<(f64, usize)> = (0..h)
            .filter(|&b| b != a)
            .map(|b| (sims[&(a.min(b), a.max(b))], b))
            .collect();
        partners.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
        for &(_, b) in partners.iter().take(top) {
            chosen.insert((a.min(b), a.max(b)));
        }
    }
    let total: f64 = chosen.iter().map(|p| sims[p]).sum();
    Some(total / chosen.len() as f64)
}

fn intersect_sorted<'a>(a: &'a [usize], b: &'a [usize]) -> impl Iterator<Item = usize> + 'a {
    let mut j = 0;
    a.iter().copied().filter(move |&x| {
        while j < b.len() && b[j] < x {
            j += 1;
        }
        j < b.len() && b[j] == x
    })
}

/// Share of each pattern's cover that carries its majority class, averaged
/// over patterns (or over objects when `weighted`).
pub fn pattern_accuracy(patterns: &PatternSet, labels: &[String], weighted: bool) -> Result<f64> {
    if patterns.is_empty() {
        return Err(Error::EmptyPatternSet);
    }
    let mut sum = 0.0;
    let mut weight = 0.0;
    for h in patterns {
        if h.cover.is_empty() {
            continue;
        }
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for &g in &h.cover {
            let label = labels.get(g).ok_or(Error::MissingLabels)?;
            *counts.entry(label.as_str()).or_default() += 1;
        }
        let majority = counts.values().copied().max().unwrap_or(0) as f64;
        let usage = h.usage() as f64;
        if weighted {
            sum += majority;
            weight += usage;
        } else {
            sum += majority / usage;
            weight += 1.0;
        }
    }
    if weight == 0.0 {
        return Err(Error::EmptyPatternSet);
    }
    Ok(sum / weight)
}

/// Metric summary of one mining run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub compression_ratio: f64,
    pub n_patterns: usize,
    pub pairwise_cover_jaccard: Option<f64>,
    pub accuracy: Option<f64>,
    pub jcd_h_t: Option<f64>,
    pub jcd_t_h: Option<f64>,
    pub runtime_seconds: Option<f64>,
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Writes the report as one CSV record, preceded by a header if asked.
    pub fn write_csv<W: Write>(&self, writer: W, header: bool) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(header)
            .from_writer(writer);
        w.serialize(self)?;
        w.flush().map_err(|e| Error::io("<csv output>", e))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(lo: [f64; 2], hi: [f64; 2]) -> RealRect {
        RealRect::new(lo.to_vec(), hi.to_vec())
    }

    #[test]
    fn rect_jaccard_cases() {
        let a = r([0.0, 0.0], [2.0, 2.0]);
        assert_eq!(rect_jaccard(&a, &a), 1.0);
        assert_eq!(rect_jaccard(&a, &r([5.0, 5.0], [6.0, 6.0])), 0.0);
        let b = r([1.0, 0.0], [3.0, 2.0]);
        assert!((rect_jaccard(&a, &b) - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(rect_jaccard(&a, &r([2.0, 0.0], [4.0, 2.0])), 0.0);
    }

    #[test]
    fn degenerate_sides_use_guard() {
        let p = r([1.0, 1.0], [1.0, 1.0]);
        assert_eq!(rect_jaccard(&p, &p), 1.0);
        let line = r([0.0, 1.0], [2.0, 1.0]);
        let half = r([0.0, 1.0], [1.0, 1.0]);
        assert!((rect_jaccard_guarded(&line, &half, 0.1) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn jcd_cases() {
        let a = r([0.0, 0.0], [1.0, 1.0]);
        let b = r([5.0, 5.0], [6.0, 6.0]);
        assert_eq!(
            jcd(&[a.clone(), b.clone()], &[a.clone(), b.clone()], 0.0).unwrap(),
            1.0
        );
        assert_eq!(
            jcd(
                std::slice::from_ref(&a),
                &[a.clone(), r([0.0, 0.0], [9.0, 9.0])],
                0.0
            )
            .unwrap(),
            1.0
        );
        assert_eq!(jcd(&[a.clone(), b], &[a], 0.0).unwrap(), 0.5);
        assert!(jcd(&[], &[r([0.0, 0.0], [1.0, 1.0])], 0.0).is_err());
    }

    fn labels(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn pattern(cover: &[usize]) -> HyperRectangle {
        HyperRectangle::new(vec![0], vec![0], cover.to_vec()).unwrap()
    }

    #[test]
    fn accuracy_cases() {
        let l = labels(&["A", "A", "B", "A", "B"]);
        let pure = PatternSet::new(vec![pattern(&[0, 1]), pattern(&[2, 4])]);
        assert_eq!(pattern_accuracy(&pure, &l, false).unwrap(), 1.0);
        let mixed = PatternSet::new(vec![pattern(&[0, 1, 2])]);
        assert!((pattern_accuracy(&mixed, &l, false).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        let two = PatternSet::new(vec![pattern(&[0]), pattern(&[3, 4])]);
        assert_eq!(pattern_accuracy(&two, &l, false).unwrap(), 0.75);
        assert!((pattern_accuracy(&two, &l, true).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        let missing = PatternSet::new(vec![pattern(&[9])]);
        assert!(matches!(
            pattern_accuracy(&missing, &l, false),
            Err(Error::MissingLabels)
        ));
    }

    #[test]
    fn compression_ratio_of_identical_lengths_is_one() {
        let b = LengthBreakdown {
            model_bits: 1.0,
            header_bits: 2.0,
            data_bits: 3.0,
            residual_bits: 0.0,
            total_bits: 6.0,
        };
        assert_eq!(compression_ratio(&b, &b).unwrap(), 1.0);
    }

    #[test]
    fn report_csv_leaves_missing_metrics_empty() {
        let report = EvalReport {
            compression_ratio: 0.5,
            n_patterns: 2,
            pairwise_cover_jaccard: None,
            accuracy: Some(1.0),
            jcd_h_t: None,
            jcd_t_h: None,
            runtime_seconds: Some(0.25),
        };
        let mut out = Vec::new();
        report.write_csv(&mut out, true).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(
            text,
            "compression_ratio,n_patterns,pairwise_cover_jaccard,accuracy,jcd_h_t,jcd_t_h,runtime_seconds\n0.5,2,,1.0,,,0.25\n"
        );
    }
}
