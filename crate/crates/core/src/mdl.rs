//! Description lengths: universal integer code, prequential plug-in data
//! code, model length, reconstruction cost and the merge gain.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::dataset::{DiscretizationGrid, DiscretizedDataset};
use crate::error::{Error, Result};
use crate::pattern::{HyperRectangle, PatternSet};

/// Normalisation constant of the universal integer code.
pub const UNIVERSAL_CONSTANT: f64 = 2.865064;

/// Pseudo-count used when none is given (Krichevsky-Trofimov).
pub const DEFAULT_EPSILON: f64 = 0.5;

/// Bits of the universal code for a positive integer:
/// `log2 n + log2 log2 n + ...` over positive terms, plus `log2 c0`.
pub fn universal_int(n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::NonPositiveInteger(n));
    }
    Ok(universal_bits(n as f64))
}

pub(crate) fn universal_bits(n: f64) -> f64 {
    let mut bits = UNIVERSAL_CONSTANT.log2();
    let mut term = n.log2();
    while term > 0.0 {
        bits += term;
        term = term.log2();
    }
    bits
}

/// `log2 Γ(x)`.
pub fn log2_gamma(x: f64) -> f64 {
    ln_gamma(x) / LN_2
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::BadEpsilon(epsilon))
    }
}

/// Prequential plug-in length of a pattern sequence with the given usage
/// counts, in bits.
pub fn plugin_data_bits(usages: &[usize], epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    if usages.is_empty() {
        return Err(Error::EmptyUsages);
    }
    let total: usize = usages.iter().sum();
    let smoothed_total = epsilon * usages.len() as f64;
    let head = log2_gamma(total as f64 + smoothed_total) - log2_gamma(smoothed_total);
    let tail: f64 = usages
        .iter()
        .map(|&u| log2_gamma(u as f64 + epsilon) - log2_gamma(epsilon))
        .sum();
    Ok((head - tail).max(0.0))
}

/// `log2(b(b+1)/2)`: bits to pick a pattern's two boundaries among `b` intervals.
pub fn boundary_bits(bins: usize) -> f64 {
    let b = bins as f64;
    (b * (b + 1.0) / 2.0).log2()
}

/// Everything the code lengths depend on besides the pattern set itself.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodingContext {
    bins: Vec<usize>,
    n_objects: usize,
    epsilon: f64,
    grid_bits: f64,
    pattern_bits: f64,
    header_bits: f64,
}

impl EncodingContext {
    pub fn new(grid: &DiscretizationGrid, n_objects: usize, epsilon: f64) -> Result<Self> {
        Self::from_bins(grid.all_bins(), n_objects, epsilon)
    }

    pub fn for_data(data: &DiscretizedDataset, epsilon: f64) -> Result<Self> {
        Self::new(data.grid(), data.n_objects(), epsilon)
    }

    pub fn from_bins(bins: Vec<usize>, n_objects: usize, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        if n_objects == 0 {
            return Err(Error::NonPositiveInteger(0));
        }
        if bins.is_empty() {
            return Err(Error::NoAttributes);
        }
        if let Some(attribute) = bins.iter().position(|&b| b == 0) {
            return Err(Error::NonPositiveBins { attribute });
        }
        let grid_bits = universal_bits(bins.len() as f64)
            + bins.iter().map(|&b| universal_bits(b as f64)).sum::<f64>();
        let pattern_bits = bins.iter().map(|&b| boundary_bits(b)).sum();
        Ok(EncodingContext {
            header_bits: universal_bits(n_objects as f64),
            bins,
            n_objects,
            epsilon,
            grid_bits,
            pattern_bits,
        })
    }

    pub fn bins(&self) -> &[usize] {
        &self.bins
    }

    pub fn n_objects(&self) -> usize {
        self.n_objects
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `L_N(|M|) + Σ L_N(|B_i|)`.
    pub fn grid_bits(&self) -> f64 {
        self.grid_bits
    }

    /// Bits to describe the boundaries of one pattern.
    pub fn pattern_bits(&self) -> f64 {
        self.pattern_bits
    }

    /// `L_N(|G|)`.
    pub fn header_bits(&self) -> f64 {
        self.header_bits
    }

    /// Part of the gain that depends only on the pattern count: replacing
    /// `merged` of `n_patterns` patterns by one.
    pub fn structural_gain(&self, n_patterns: usize, merged: usize) -> f64 {
        debug_assert!(merged >= 1 && merged <= n_patterns);
        let after = n_patterns - merged + 1;
        let g = self.n_objects as f64;
        let eps = self.epsilon;
        let normaliser = |h: usize| {
            let s = eps * h as f64;
            log2_gamma(g + s) - log2_gamma(s)
        };
        universal_bits(n_patterns as f64) - universal_bits(after as f64)
            + (merged - 1) as f64 * self.pattern_bits
            + normaliser(n_patterns)
            - normaliser(after)
    }

    /// Part of the gain that depends only on the merged patterns, given as
    /// `(usage, log_size)` pairs, and the log-size of their join.
    pub fn pattern_gain(&self, parts: &[(usize, f64)], joined_log_size: f64) -> f64 {
        let eps = self.epsilon;
        let lg_eps = log2_gamma(eps);
        let mut gain = 0.0;
        let mut usage = 0usize;
        for &(u, log_size) in parts {
            gain -= log2_gamma(u as f64 + eps) - lg_eps;
            gain += u as f64 * log_size;
            usage += u;
        }
        gain += log2_gamma(usage as f64 + eps) - lg_eps;
        gain - usage as f64 * joined_log_size
    }
}

/// Component lengths of a pattern set, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LengthBreakdown {
    pub model_bits: f64,
    pub header_bits: f64,
    pub data_bits: f64,
    pub residual_bits: f64,
    pub total_bits: f64,
}

/// `L(H)`: grid description plus pattern count plus pattern boundaries.
pub fn model_bits(patterns: &PatternSet, ctx: &EncodingContext) -> Result<f64> {
    if patterns.is_empty() {
        return Err(Error::EmptyPatternSet);
    }
    let h = patterns.len() as f64;
    Ok(ctx.grid_bits + universal_bits(h) + h * ctx.pattern_bits)
}

/// Bits to locate each object's elementary cell inside its pattern.
pub fn residual_bits(patterns: &PatternSet) -> f64 {
    patterns
        .iter()
        .map(|h| h.usage() as f64 * h.log_size())
        .sum()
}

/// Full breakdown; the covers must partition the objects.
pub fn total_bits(patterns: &PatternSet, ctx: &EncodingContext) -> Result<LengthBreakdown> {
    patterns.check_partition(ctx.n_objects)?;
    let model = model_bits(patterns, ctx)?;
    let data = plugin_data_bits(&patterns.usages(), ctx.epsilon)?;
    let residual = residual_bits(patterns);
    Ok(LengthBreakdown {
        model_bits: model,
        header_bits: ctx.header_bits,
        data_bits: data,
        residual_bits: residual,
        total_bits: model + ctx.header_bits + data + residual,
    })
}

/// Reduction in total length from replacing patterns `j` and `k` by their
/// join. Positive values mean the merge compresses.
pub fn merge_gain(patterns: &PatternSet, j: usize, k: usize, ctx: &EncodingContext) -> Result<f64> {
    if j == k {
        return Err(Error::SelfMerge(j));
    }
    let hj = patterns.get(j).ok_or(Error::UnknownPattern(j))?;
    let hk = patterns.get(k).ok_or(Error::UnknownPattern(k))?;
    multi_merge_gain(patterns.len(), &[hj, hk], ctx)
}

/// Gain of replacing `merged` (all members of a set of `n_patterns`) by
/// their common join.
pub fn multi_merge_gain(
    n_patterns: usize,
    merged: &[&HyperRectangle],
    ctx: &EncodingContext,
) -> Result<f64> {
    let (first, rest) = merged.split_first().ok_or(Error::EmptyPatternSet)?;
    let mut joined = (*first).clone();
    for h in rest {
        joined = joined.join(h)?;
    }
    let parts: Vec<(usize, f64)> = merged.iter().map(|h| (h.usage(), h.log_size())).collect();
    Ok(ctx.structural_gain(n_patterns, merged.len()) + ctx.pattern_gain(&parts, joined.log_size()))
}
