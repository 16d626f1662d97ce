//! Greedy merge search with kNN-seeded candidates, plus the pruning pass
//! that merges a pair together with patterns nested inside its join.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{elementary_cells, DiscretizedDataset, ElementaryCell};
use crate::error::{Error, Result};
use crate::mdl::{log2_gamma, total_bits, EncodingContext, LengthBreakdown, DEFAULT_EPSILON};
use crate::pattern::{box_contains, join_bounds, HyperRectangle, PatternSet};

/// When the pruning pass runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PruneMode {
    Off,
    /// After every outer pass of the merge loop.
    EachPass,
    /// Whenever merging stalls. Merging then resumes from the patterns the
    /// prune created, until a prune changes nothing.
    AtEnd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinerConfig {
    pub k_neighbors: usize,
    /// Cap on the pruning candidates examined per pass; `None` examines all.
    pub prune_top_n: Option<usize>,
    pub epsilon: f64,
    pub prune: PruneMode,
    /// Pair new patterns only with the inherited neighbours of their parts
    /// instead of with every live pattern.
    pub knn_propagate: bool,
}

impl Default for MinerConfig {
    fn default() -> Self {
        MinerConfig {
            k_neighbors: 5,
            prune_top_n: None,
            epsilon: DEFAULT_EPSILON,
            prune: PruneMode::EachPass,
            knn_propagate: false,
        }
    }
}

impl MinerConfig {
    /// Defaults with `k = round(√n)`.
    pub fn for_objects(n_objects: usize) -> Self {
        MinerConfig {
            k_neighbors: crate::dataset::sqrt_count(n_objects),
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.k_neighbors == 0 {
            return Err(Error::Invalid(
                "number of neighbours must be at least 1".into(),
            ));
        }
        if self.prune_top_n == Some(0) {
            return Err(Error::Invalid("prune top-N must be at least 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::BadEpsilon(self.epsilon));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Merge,
    Prune,
}

/// One accepted step of the search. Pattern ids are creation indices:
/// elementary cells are `0..cells`, every new pattern takes the next id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub kind: StepKind,
    pub merged: Vec<usize>,
    pub created: usize,
    pub gain_bits: f64,
    pub n_patterns: usize,
    pub n_candidates: usize,
    pub total_bits: f64,
}

#[derive(Debug, Clone)]
pub struct MiningResult {
    pub patterns: PatternSet,
    /// Creation id of each pattern in `patterns`.
    pub ids: Vec<usize>,
    pub lengths: LengthBreakdown,
    /// Lengths of the elementary-cell model.
    pub baseline: LengthBreakdown,
    pub trace: Vec<TraceEntry>,
    pub initial_candidates: usize,
    pub elapsed: Duration,
}

impl MiningResult {
    pub fn compression_ratio(&self) -> f64 {
        self.lengths.total_bits / self.baseline.total_bits
    }
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    key: f64,
    j: usize,
    k: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // Equal gains go to the pair created later.
    fn cmp(&self, other: &Self) -> Ordering {
        self.key
            .total_cmp(&other.key)
            .then((self.j, self.k).cmp(&(other.j, other.k)))
    }
}

/// Max-priority store of candidate merges.
///
/// Entries are keyed by the pattern-dependent part of the gain. The rest of
/// the gain depends only on the current pattern count and is the same for
/// every pair, so the order stays valid as the model shrinks and
/// [`CandidateStore::ranked`] reports exact current gains.
#[derive(Debug, Clone, Default)]
pub struct CandidateStore {
    heap: BinaryHeap<Entry>,
}

impl CandidateStore {
    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Stored pairs `(j, k)` with `j < k`, sorted.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs: Vec<_> = self.heap.iter().map(|e| (e.j, e.k)).collect();
        pairs.sort_unstable();
        pairs
    }

    /// Pairs with their gain in a model of `n_patterns` patterns, best first.
    pub fn ranked(&self, ctx: &EncodingContext, n_patterns: usize) -> Vec<(usize, usize, f64)> {
        let shared = ctx.structural_gain(n_patterns, 2);
        let mut entries: Vec<Entry> = self.heap.iter().copied().collect();
        entries.sort_unstable_by(|a, b| b.cmp(a));
        entries
            .into_iter()
            .map(|e| (e.j, e.k, shared + e.key))
            .collect()
    }

    fn from_entries(entries: Vec<Entry>) -> Self {
        CandidateStore {
            heap: BinaryHeap::from(entries),
        }
    }
}

/// Directed k-nearest-neighbour lists over integer coordinates. Distance
/// ties go to the lexicographically smaller coordinates.
pub fn nearest_neighbours(coords: &[&[u32]], k: usize) -> Vec<Vec<usize>> {
    let n = coords.len();
    let k = k.min(n.saturating_sub(1));
    if k == 0 {
        return vec![Vec::new(); n];
    }
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut others: Vec<(u64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (squared_distance(coords[i], coords[j]), j))
                .collect();
            let by_distance = |a: &(u64, usize), b: &(u64, usize)| {
                a.0.cmp(&b.0).then(coords[a.1].cmp(coords[b.1]))
            };
            if k < others.len() {
                others.select_nth_unstable_by(k - 1, by_distance);
                others.truncate(k);
            }
            others.sort_unstable_by(by_distance);
            others.into_iter().map(|(_, j)| j).collect()
        })
        .collect()
}

fn squared_distance(a: &[u32], b: &[u32]) -> u64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = u64::from(x.abs_diff(y));
            d * d
        })
        .sum()
}

fn knn_pairs(neighbours: &[Vec<usize>]) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(usize, usize)> = neighbours
        .iter()
        .enumerate()
        .flat_map(|(i, list)| list.iter().map(move |&j| (i.min(j), i.max(j))))
        .collect();
    pairs.sort_unstable();
    pairs.dedup();
    pairs
}

/// Candidate store seeded with each cell's `k` nearest cells.
pub fn initial_candidates(
    cells: &[ElementaryCell],
    k: usize,
    ctx: &EncodingContext,
) -> CandidateStore {
    let model = Model::new(
        cells.iter().map(HyperRectangle::from_cell).collect(),
        ctx,
        None,
    );
    let coords: Vec<&[u32]> = cells.iter().map(|c| c.coords.as_slice()).collect();
    model.build_store(knn_pairs(&nearest_neighbours(&coords, k)))
}

/// Joins two rectangles; the cover is the union of both covers.
pub fn join(a: &HyperRectangle, b: &HyperRectangle) -> Result<HyperRectangle> {
    a.join(b)
}

struct Slot {
    rect: HyperRectangle,
    log_size: f64,
    /// `log2 Γ(usage + ε) − log2 Γ(ε)`.
    usage_code: f64,
}

/// Working state: every pattern ever created, and which are still live.
struct Model<'c> {
    ctx: &'c EncodingContext,
    lg_eps: f64,
    slots: Vec<Slot>,
    alive: Vec<bool>,
    successor: Vec<usize>,
    neighbours: Option<Vec<Vec<usize>>>,
    n_alive: usize,
    total: f64,
}

impl<'c> Model<'c> {
    fn new(
        rects: Vec<HyperRectangle>,
        ctx: &'c EncodingContext,
        neighbours: Option<Vec<Vec<usize>>>,
    ) -> Self {
        let n = rects.len();
        let mut model = Model {
            ctx,
            lg_eps: log2_gamma(ctx.epsilon()),
            slots: Vec::with_capacity(2 * n),
            alive: Vec::with_capacity(2 * n),
            successor: Vec::with_capacity(2 * n),
            neighbours,
            n_alive: 0,
            total: 0.0,
        };
        for rect in rects {
            model.push(rect);
        }
        model
    }

    fn push(&mut self, rect: HyperRectangle) -> usize {
        let id = self.slots.len();
        let usage_code = log2_gamma(rect.usage() as f64 + self.ctx.epsilon()) - self.lg_eps;
        self.slots.push(Slot {
            log_size: rect.log_size(),
            usage_code,
            rect,
        });
        self.alive.push(true);
        self.successor.push(id);
        self.n_alive += 1;
        id
    }

    fn live_ids(&self) -> Vec<usize> {
        (0..self.slots.len()).filter(|&i| self.alive[i]).collect()
    }

    fn snapshot(&self) -> (PatternSet, Vec<usize>) {
        let ids = self.live_ids();
        let set = PatternSet::new(ids.iter().map(|&i| self.slots[i].rect.clone()).collect());
        (set, ids)
    }

    fn join_log_size(&self, members: &[usize]) -> f64 {
        let first = &self.slots[members[0]].rect;
        (0..first.n_dims())
            .map(|d| {
                let lo = members
                    .iter()
                    .map(|&m| self.slots[m].rect.lower[d])
                    .min()
                    .unwrap_or(0);
                let hi = members
                    .iter()
                    .map(|&m| self.slots[m].rect.upper[d])
                    .max()
                    .unwrap_or(0);
                f64::from(hi - lo + 1).log2()
            })
            .sum()
    }

    /// Pattern-dependent part of the gain for merging `members` into a
    /// rectangle of log-size `joined_log_size`.
    fn members_part(&self, members: &[usize], joined_log_size: f64) -> f64 {
        let mut part = 0.0;
        let mut usage = 0usize;
        for &m in members {
            let s = &self.slots[m];
            let u = s.rect.usage();
            part += u as f64 * s.log_size - s.usage_code;
            usage += u;
        }
        part + log2_gamma(usage as f64 + self.ctx.epsilon())
            - self.lg_eps
            - usage as f64 * joined_log_size
    }

    fn pair_key(&self, j: usize, k: usize) -> f64 {
        self.members_part(&[j, k], self.join_log_size(&[j, k]))
    }

    fn build_store(&self, mut pairs: Vec<(usize, usize)>) -> CandidateStore {
        pairs.sort_unstable();
        pairs.dedup();
        let entries: Vec<Entry> = pairs
            .into_par_iter()
            .filter(|&(j, k)| self.alive[j] && self.alive[k])
            .map(|(j, k)| Entry {
                key: self.pair_key(j, k),
                j,
                k,
            })
            .collect();
        CandidateStore::from_entries(entries)
    }

    fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.successor[root] != root {
            root = self.successor[root];
        }
        while self.successor[x] != root {
            let next = self.successor[x];
            self.successor[x] = root;
            x = next;
        }
        root
    }

    /// Replaces `members` by their join and returns the new id.
    fn merge(&mut self, members: &[usize]) -> usize {
        let mut rect = self.slots[members[0]].rect.clone();
        for &m in &members[1..] {
            rect = rect.joined(&self.slots[m].rect);
        }
        let id = self.push(rect);
        for &m in members {
            self.alive[m] = false;
            self.successor[m] = id;
        }
        self.n_alive -= members.len();
        if let Some(mut lists) = self.neighbours.take() {
            let mut inherited = Vec::new();
            for &m in members {
                for &x in &lists[m] {
                    let r = self.find(x);
                    if r != id {
                        inherited.push(r);
                    }
                }
            }
            inherited.sort_unstable();
            inherited.dedup();
            lists.push(inherited);
            self.neighbours = Some(lists);
        }
        id
    }

    /// Patterns a freshly created pattern should be paired with.
    fn partners(&self, id: usize) -> Vec<(usize, usize)> {
        match &self.neighbours {
            Some(lists) => lists[id].iter().map(|&x| (x.min(id), x.max(id))).collect(),
            None => (0..id)
                .filter(|&x| self.alive[x])
                .map(|x| (x, id))
                .collect(),
        }
    }

    fn record(
        &self,
        trace: &mut Vec<TraceEntry>,
        kind: StepKind,
        merged: Vec<usize>,
        created: usize,
        gain: f64,
        n_candidates: usize,
    ) {
        trace.push(TraceEntry {
            kind,
            merged,
            created,
            gain_bits: gain,
            n_patterns: self.n_alive,
            n_candidates,
            total_bits: self.total,
        });
    }

    /// Live pairs whose join contains a third live pattern.
    fn prune_candidates(&self, live: &[usize], by_lower: &[usize], firsts: &[u32]) -> Vec<Entry> {
        let contains_third = |j: usize, k: usize, lo: &[u32], hi: &[u32]| -> bool {
            let start = firsts.partition_point(|&v| v < lo[0]);
            let end = firsts.partition_point(|&v| v <= hi[0]);
            by_lower[start..end].iter().any(|&h| {
                let r = &self.slots[h].rect;
                h != j && h != k && box_contains(lo, hi, &r.lower, &r.upper)
            })
        };
        live.par_iter()
            .enumerate()
            .flat_map_iter(|(a, &j)| {
                let contains_third = &contains_third;
                live[a + 1..].iter().filter_map(move |&k| {
                    let (rj, rk) = (&self.slots[j].rect, &self.slots[k].rect);
                    let (lo, hi) = join_bounds(&rj.lower, &rj.upper, &rk.lower, &rk.upper);
                    contains_third(j, k, &lo, &hi).then(|| Entry {
                        key: self.pair_key(j, k),
                        j,
                        k,
                    })
                })
            })
            .collect()
    }

    /// One pruning pass sequence; returns the ids of created patterns.
    fn prune(
        &mut self,
        top_n: Option<usize>,
        trace: &mut Vec<TraceEntry>,
        store_len: usize,
    ) -> Vec<usize> {
        let mut created = Vec::new();
        loop {
            let before = self.n_alive;
            let live = self.live_ids();
            let mut by_lower = live.clone();
            by_lower.sort_by_key(|&i| (self.slots[i].rect.lower[0], i));
            let firsts: Vec<u32> = by_lower
                .iter()
                .map(|&i| self.slots[i].rect.lower[0])
                .collect();

            let mut candidates = self.prune_candidates(&live, &by_lower, &firsts);
            candidates.sort_unstable_by(|a, b| b.cmp(a));
            if let Some(n) = top_n {
                candidates.truncate(n);
            }

            let mut fresh: Vec<usize> = Vec::new();
            for cand in candidates {
                let (j, k) = (cand.j, cand.k);
                if !self.alive[j] || !self.alive[k] {
                    continue;
                }
                let (lo, hi) = {
                    let (rj, rk) = (&self.slots[j].rect, &self.slots[k].rect);
                    join_bounds(&rj.lower, &rj.upper, &rk.lower, &rk.upper)
                };
                let inside = |h: usize| {
                    let r = &self.slots[h].rect;
                    self.alive[h] && h != j && h != k && box_contains(&lo, &hi, &r.lower, &r.upper)
                };
                let start = firsts.partition_point(|&v| v < lo[0]);
                let end = firsts.partition_point(|&v| v <= hi[0]);
                let mut contained: Vec<usize> = by_lower[start..end]
                    .iter()
                    .chain(&fresh)
                    .copied()
                    .filter(|&h| inside(h))
                    .collect();
                contained.sort_unstable();
                if contained.is_empty() {
                    continue;
                }

                let joined_log_size = crate::pattern::log_volume(&lo, &hi);
                let n = self.n_alive;
                let mut members = vec![j, k];
                let mut best =
                    self.ctx.structural_gain(n, 2) + self.members_part(&members, joined_log_size);
                for h in contained {
                    members.push(h);
                    let gain = self.ctx.structural_gain(n, members.len())
                        + self.members_part(&members, joined_log_size);
                    if gain > best {
                        best = gain;
                    } else {
                        members.pop();
                    }
                }
                if best > 0.0 {
                    let id = self.merge(&members);
                    debug_assert_eq!(self.slots[id].rect.lower, lo);
                    self.total -= best;
                    self.record(trace, StepKind::Prune, members, id, best, store_len);
                    fresh.push(id);
                    created.push(id);
                }
            }
            if self.n_alive >= before || self.n_alive < 3 {
                break;
            }
        }
        created
    }
}

/// Runs the greedy merge search on a discretized dataset.
pub fn mine(data: &DiscretizedDataset, cfg: &MinerConfig) -> Result<MiningResult> {
    cfg.validate()?;
    let start = Instant::now();
    let ctx = EncodingContext::for_data(data, cfg.epsilon)?;
    let cells = elementary_cells(data);
    let rects: Vec<HyperRectangle> = cells.iter().map(HyperRectangle::from_cell).collect();
    let baseline = total_bits(&PatternSet::new(rects.clone()), &ctx)?;

    let coords: Vec<&[u32]> = cells.iter().map(|c| c.coords.as_slice()).collect();
    let knn = nearest_neighbours(&coords, cfg.k_neighbors);
    let seed_pairs = knn_pairs(&knn);
    let neighbours = cfg.knn_propagate.then(|| undirected(&knn));

    let mut model = Model::new(rects, &ctx, neighbours);
    model.total = baseline.total_bits;
    let mut store = model.build_store(seed_pairs);
    let initial_candidates = store.len();
    let mut trace = Vec::new();

    loop {
        while !store.is_empty() {
            let mut pending: Vec<(usize, usize)> = Vec::new();
            while let Some(&top) = store.heap.peek() {
                if !model.alive[top.j] || !model.alive[top.k] {
                    store.heap.pop();
                    continue;
                }
                let gain = ctx.structural_gain(model.n_alive, 2) + top.key;
                if gain <= 0.0 {
                    break;
                }
                store.heap.pop();
                let id = model.merge(&[top.j, top.k]);
                model.total -= gain;
                pending.extend(model.partners(id));
                model.record(
                    &mut trace,
                    StepKind::Merge,
                    vec![top.j, top.k],
                    id,
                    gain,
                    store.len() + pending.len(),
                );
            }
            store = model.build_store(pending);
            if cfg.prune == PruneMode::EachPass && model.n_alive >= 3 {
                let created = model.prune(cfg.prune_top_n, &mut trace, store.len());
                if !created.is_empty() {
                    let pairs: Vec<(usize, usize)> =
                        created.iter().flat_map(|&id| model.partners(id)).collect();
                    let extra = model.build_store(pairs);
                    store.heap.extend(extra.heap);
                }
            }
        }
        // Patterns created by the final prune may still merge with others.
        if cfg.prune != PruneMode::AtEnd || model.n_alive < 3 {
            break;
        }
        let created = model.prune(cfg.prune_top_n, &mut trace, 0);
        if created.is_empty() {
            break;
        }
        let pairs: Vec<(usize, usize)> =
            created.iter().flat_map(|&id| model.partners(id)).collect();
        store = model.build_store(pairs);
    }

    let (patterns, ids) = model.snapshot();
    let lengths = total_bits(&patterns, &ctx)?;
    Ok(MiningResult {
        patterns,
        ids,
        lengths,
        baseline,
        trace,
        initial_candidates,
        elapsed: start.elapsed(),
    })
}

fn undirected(knn: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut lists = vec![Vec::new(); knn.len()];
    for (i, list) in knn.iter().enumerate() {
        for &j in list {
            lists[i].push(j);
            lists[j].push(i);
        }
    }
    for list in &mut lists {
        list.sort_unstable();
        list.dedup();
    }
    lists
}

/// Pruning pass over an existing pattern set: merges a pair together with
/// patterns nested in its join whenever that shortens the total length.
pub fn prune(
    patterns: &PatternSet,
    top_n: Option<usize>,
    ctx: &EncodingContext,
) -> Result<PatternSet> {
    if top_n == Some(0) {
        return Err(Error::Invalid("prune top-N must be at least 1".into()));
    }
    let start = total_bits(patterns, ctx)?;
    let mut model = Model::new(patterns.patterns().to_vec(), ctx, None);
    model.total = start.total_bits;
    if model.n_alive >= 3 {
        model.prune(top_n, &mut Vec::new(), 0);
    }
    Ok(model.snapshot().0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cells_of(coords: &[&[u32]], usages: &[usize]) -> Vec<ElementaryCell> {
        let mut next = 0;
        coords
            .iter()
            .zip(usages)
            .map(|(c, &u)| {
                let cover = (next..next + u).collect();
                next += u;
                ElementaryCell {
                    coords: c.to_vec(),
                    cover,
                }
            })
            .collect()
    }

    #[test]
    fn knn_ties_prefer_smaller_coordinates() {
        let pts: Vec<&[u32]> = vec![&[0, 0], &[0, 4], &[4, 0]];
        let nn = nearest_neighbours(&pts, 1);
        assert_eq!(nn[0], vec![1]);
        assert_eq!(nn[2], vec![0]);
    }

    #[test]
    fn knn_saturates() {
        let pts: Vec<&[u32]> = vec![&[0], &[3], &[9], &[10]];
        let nn = nearest_neighbours(&pts, 10);
        assert!(nn.iter().all(|l| l.len() == 3));
        assert_eq!(knn_pairs(&nn).len(), 6);
    }

    #[test]
    fn single_cell_has_no_candidates() {
        let cells = cells_of(&[&[1, 1]], &[3]);
        let ctx = EncodingContext::from_bins(vec![4, 4], 3, 0.5).unwrap();
        assert!(initial_candidates(&cells, 3, &ctx).is_empty());
    }

    #[test]
    fn store_pops_by_gain_then_later_pair() {
        let entries = vec![
            Entry {
                key: 1.0,
                j: 0,
                k: 1,
            },
            Entry {
                key: 2.0,
                j: 0,
                k: 2,
            },
            Entry {
                key: 2.0,
                j: 1,
                k: 2,
            },
        ];
        let mut store = CandidateStore::from_entries(entries);
        let first = store.heap.pop().unwrap();
        assert_eq!((first.j, first.k), (1, 2));
        let second = store.heap.pop().unwrap();
        assert_eq!((second.j, second.k), (0, 2));
    }

    #[test]
    fn successor_chain_resolves_to_live_pattern() {
        let ctx = EncodingContext::from_bins(vec![8], 4, 0.5).unwrap();
        let rects = cells_of(&[&[0], &[1], &[2], &[3]], &[1, 1, 1, 1])
            .iter()
            .map(HyperRectangle::from_cell)
            .collect();
        let lists = vec![vec![1], vec![0, 2], vec![1, 3], vec![2]];
        let mut model = Model::new(rects, &ctx, Some(lists));
        let a = model.merge(&[0, 1]);
        assert_eq!(model.neighbours.as_ref().unwrap()[a], vec![2]);
        let b = model.merge(&[2, 3]);
        assert_eq!(model.neighbours.as_ref().unwrap()[b], vec![a]);
        assert_eq!(model.find(0), a);
        let c = model.merge(&[a, b]);
        assert_eq!(model.find(0), c);
        assert_eq!(model.find(3), c);
        assert!(model.neighbours.as_ref().unwrap()[c].is_empty());
    }
}
