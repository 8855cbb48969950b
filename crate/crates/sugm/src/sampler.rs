//! Seeded sampling of network realizations.
//!
//! Placements of each type split into classes with a common rank space.
//! Classes whose placement probability is constant draw realized ranks with
//! geometric skips; heterogeneous classes draw candidate ranks at a
//! certified maximum rate and accept each candidate with probability
//! p / p_max; small classes fall back to a plain Bernoulli scan over every
//! rank. All three paths sample the same product distribution.
//!
//! Rank spaces are cut into fixed chunks, each driven by its own stream
//! keyed by (seed, type, class, chunk). Chunks are independent, so they run
//! in parallel and merge in chunk order; results depend only on the seed,
//! never on thread count. Chunk-local positions stay below the chunk size,
//! which keeps the floating-point skip arithmetic exact.

use std::io::{self, BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::combinatorics::{binomial, unrank_arrangement, unrank_combination};
use crate::linalg::SymMatrix;
use crate::model::{
    ModelError, PlacementSemantics, ProbabilityRule, SugmSpec, TableEntry, TypeEvaluator,
};
use crate::par;

/// Classes at or below this many placements are scanned exhaustively.
pub const DEFAULT_SCAN_THRESHOLD: u128 = 100_000;
/// Ranks per chunk; one RNG stream per chunk.
pub const DEFAULT_CHUNK_SIZE: u64 = 1 << 20;
/// Default cap on expected candidate placements per sample call.
pub const DEFAULT_EXPECTED_BUDGET: f64 = 1e8;

#[derive(Debug, Error)]
pub enum SampleError {
    #[error("sampling needs about {expected:.3e} candidate placements, budget is {budget:.3e}")]
    Budget { expected: f64, budget: f64 },
    #[error("adjacency matrix of dimension {n} does not fit in memory")]
    Allocation { n: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("edge csv: {0}")]
    Csv(String),
    #[error("edge csv: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy)]
pub struct SampleOptions {
    /// Classes with at most this many placements use the exhaustive scan.
    pub scan_threshold: u128,
    /// Ranks per chunk. Clamped into [1, 2^40] to keep chunk-local
    /// positions exactly representable as f64.
    pub chunk_size: u64,
    /// Cap on expected candidate placements, checked before any matrix is
    /// allocated.
    pub expected_budget: f64,
}

impl Default for SampleOptions {
    fn default() -> Self {
        SampleOptions {
            scan_threshold: DEFAULT_SCAN_THRESHOLD,
            chunk_size: DEFAULT_CHUNK_SIZE,
            expected_budget: DEFAULT_EXPECTED_BUDGET,
        }
    }
}

/// One sampled network.
#[derive(Debug, Clone)]
pub struct Realization {
    /// Entry (i, j) counts the realized template edges on that pair.
    pub weighted: SymMatrix,
    /// Realized placements per type, in spec order.
    pub realized_per_type: Vec<u64>,
    pub seed: u64,
}

impl Realization {
    pub fn n(&self) -> usize {
        self.weighted.n()
    }

    /// Unweighted adjacency: entrywise minimum of the weight and one.
    pub fn unweighted(&self) -> SymMatrix {
        self.weighted.map(|v| v.min(1.0))
    }

    pub fn total_realized(&self) -> u64 {
        self.realized_per_type.iter().sum()
    }

    /// Breadth-first reachability of every node from node 0 through
    /// positive-weight edges.
    pub fn is_connected(&self) -> bool {
        let n = self.n();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut queue = std::collections::VecDeque::from([0usize]);
        seen[0] = true;
        let mut visited = 1usize;
        while let Some(i) = queue.pop_front() {
            for (j, &w) in self.weighted.row(i).iter().enumerate() {
                if w > 0.0 && !seen[j] {
                    seen[j] = true;
                    visited += 1;
                    queue.push_back(j);
                }
            }
        }
        visited == n
    }
}

/// How realized ranks are drawn from a class.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Strategy {
    /// Bernoulli draw at every rank.
    Scan,
    /// Geometric skips at the constant class probability.
    Skip { p: f64 },
    /// Geometric candidate skips at `p_max`, then accept with p / p_max.
    Thin { p_max: f64 },
}

/// Rank space of one class plus its placement decoding.
enum ClassLayout<'a> {
    /// All ascending m-subsets of 0..n.
    AllSets { n: usize, m: usize },
    /// All m-arrangements of 0..n.
    AllArrangements { n: usize, m: usize },
    /// Ascending subsets with a fixed number of nodes per community; ranks
    /// are mixed-radix over per-community combination ranks.
    BlockComposition {
        /// (community start, community size, nodes drawn) per community.
        segments: Vec<(usize, usize, usize)>,
        /// Product of the radices of the segments after this one.
        suffix_counts: Vec<u128>,
    },
    /// Ranks index the probability table directly.
    TableEntries { entries: &'a [TableEntry] },
}

struct ClassPlan<'a> {
    layout: ClassLayout<'a>,
    count: u128,
    strategy: Strategy,
}

impl ClassLayout<'_> {
    fn unrank(&self, rank: u128) -> Vec<usize> {
        match self {
            ClassLayout::AllSets { n, m } => {
                unrank_combination(rank, *n, *m).expect("rank within class")
            }
            ClassLayout::AllArrangements { n, m } => {
                unrank_arrangement(rank, *n, *m).expect("rank within class")
            }
            ClassLayout::BlockComposition { segments, suffix_counts } => {
                let mut nodes = Vec::new();
                let mut r = rank;
                for (c, &(start, size, k)) in segments.iter().enumerate() {
                    let base = suffix_counts[c + 1];
                    let digit = r / base;
                    r %= base;
                    let sub = unrank_combination(digit, size, k).expect("digit within radix");
                    nodes.extend(sub.into_iter().map(|v| v + start));
                }
                nodes
            }
            ClassLayout::TableEntries { entries } => entries[rank as usize].nodes.clone(),
        }
    }

    /// Replaces `nodes` (the placement at `rank - 1`) with the placement at
    /// `rank`; the scan path's cheap successor.
    fn step(&self, rank: u128, nodes: &mut Vec<usize>) {
        match self {
            ClassLayout::AllSets { n, m: _ } => {
                let stepped = next_combination(nodes, 0, *n);
                debug_assert!(stepped, "stepped past the last combination");
            }
            ClassLayout::BlockComposition { segments, .. } => {
                // Odometer over per-community combinations, last community
                // fastest.
                let mut hi = nodes.len();
                for &(start, size, k) in segments.iter().rev() {
                    let lo = hi - k;
                    if next_combination(&mut nodes[lo..hi], start, size) {
                        return;
                    }
                    hi = lo;
                }
                debug_assert!(false, "stepped past the last composition placement");
            }
            ClassLayout::AllArrangements { n, m } => {
                *nodes = unrank_arrangement(rank, *n, *m).expect("rank within class");
            }
            ClassLayout::TableEntries { entries } => {
                *nodes = entries[rank as usize].nodes.clone();
            }
        }
    }
}

/// Advances an ascending slice to the next combination of `size` values
/// starting at `offset`; on wrap, resets to the first combination and
/// returns false.
fn next_combination(nodes: &mut [usize], offset: usize, size: usize) -> bool {
    let k = nodes.len();
    for i in (0..k).rev() {
        if nodes[i] < offset + size - (k - i) {
            nodes[i] += 1;
            for j in (i + 1)..k {
                nodes[j] = nodes[j - 1] + 1;
            }
            return true;
        }
    }
    for (i, v) in nodes.iter_mut().enumerate() {
        *v = offset + i;
    }
    false
}

/// All ways to spread `total` nodes over `parts` communities, in
/// lexicographic order.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = vec![0usize; parts];
    fn recurse(total: usize, part: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if part + 1 == current.len() {
            current[part] = total;
            out.push(current.clone());
            return;
        }
        for take in 0..=total {
            current[part] = take;
            recurse(total - take, part + 1, current, out);
        }
    }
    recurse(total, 0, &mut current, &mut out);
    out
}

fn plan_classes<'a>(
    ev: &TypeEvaluator<'a>,
    n: usize,
    options: &SampleOptions,
) -> Result<Vec<ClassPlan<'a>>, SampleError> {
    let template = &ev.model_type.template;
    let m = template.size;
    let overflow = || SampleError::Model(ModelError::CountOverflow);
    let mut plans = Vec::new();
    match (&ev.model_type.rule, template.semantics) {
        (ProbabilityRule::Block { .. }, PlacementSemantics::Set) => {
            let layout = ev.communities().expect("block rule has a community layout");
            for ks in compositions(m, layout.count()) {
                let segments: Vec<(usize, usize, usize)> = (0..layout.count())
                    .map(|c| {
                        let (start, size) = layout.range(c);
                        (start, size, ks[c])
                    })
                    .collect();
                let mut suffix_counts = vec![1u128; segments.len() + 1];
                for c in (0..segments.len()).rev() {
                    let radix = binomial(segments[c].1, segments[c].2).ok_or_else(overflow)?;
                    suffix_counts[c] =
                        suffix_counts[c + 1].checked_mul(radix).ok_or_else(overflow)?;
                }
                let count = suffix_counts[0];
                if count == 0 {
                    continue;
                }
                plans.push(ClassPlan {
                    layout: ClassLayout::BlockComposition { segments, suffix_counts },
                    count,
                    strategy: Strategy::Skip { p: f64::NAN },
                });
            }
        }
        (ProbabilityRule::Table { entries }, _) => {
            plans.push(ClassPlan {
                layout: ClassLayout::TableEntries { entries },
                count: entries.len() as u128,
                strategy: Strategy::Thin { p_max: ev.max_probability_bound() },
            });
        }
        (rule, semantics) => {
            let layout = match semantics {
                PlacementSemantics::Set => ClassLayout::AllSets { n, m },
                PlacementSemantics::OrderedList => ClassLayout::AllArrangements { n, m },
            };
            let count = match semantics {
                PlacementSemantics::Set => binomial(n, m).ok_or_else(overflow)?,
                PlacementSemantics::OrderedList => {
                    crate::combinatorics::falling_factorial(n, m).ok_or_else(overflow)?
                }
            };
            let strategy = match (rule, semantics) {
                (ProbabilityRule::Uniform { .. }, _) => Strategy::Skip { p: f64::NAN },
                _ => Strategy::Thin { p_max: ev.max_probability_bound() },
            };
            plans.push(ClassPlan { layout, count, strategy });
        }
    }
    // Resolve strategies: fill in homogeneous probabilities and downgrade
    // small classes to the scan.
    for plan in &mut plans {
        if plan.count <= options.scan_threshold {
            plan.strategy = Strategy::Scan;
        } else if let Strategy::Skip { p } = &mut plan.strategy {
            *p = ev.probability(&plan.layout.unrank(0));
        }
    }
    Ok(plans)
}

/// Expected candidate placements the sampler will touch: scanned ranks
/// count in full, skip classes count their expected realizations, thinned
/// classes count their expected candidates, and every chunk costs at least
/// one visit.
pub fn expected_cost(spec: &SugmSpec, options: &SampleOptions) -> Result<f64, SampleError> {
    let chunk = effective_chunk_size(options) as f64;
    let mut total = 0.0;
    for type_index in 0..spec.types().len() {
        let ev = TypeEvaluator::new(spec, type_index)?;
        for plan in plan_classes(&ev, spec.n(), options)? {
            let count = plan.count as f64;
            total += match plan.strategy {
                Strategy::Scan => count,
                Strategy::Skip { p } => count * p + (count / chunk).ceil(),
                Strategy::Thin { p_max } => count * p_max + (count / chunk).ceil(),
            };
        }
    }
    Ok(total)
}

fn effective_chunk_size(options: &SampleOptions) -> u64 {
    options.chunk_size.clamp(1, 1 << 40)
}

fn stream_key(seed: u64, type_index: usize, class_index: usize, chunk_index: usize) -> [u8; 32] {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(type_index as u64).to_le_bytes());
    key[16..24].copy_from_slice(&(class_index as u64).to_le_bytes());
    key[24..32].copy_from_slice(&(chunk_index as u64).to_le_bytes());
    key
}

/// Samples one realization. Equal inputs give bitwise equal outputs.
pub fn sample(
    spec: &SugmSpec,
    seed: u64,
    options: &SampleOptions,
) -> Result<Realization, SampleError> {
    let expected = expected_cost(spec, options)?;
    if !(expected <= options.expected_budget) {
        return Err(SampleError::Budget { expected, budget: options.expected_budget });
    }
    let n = spec.n();
    let weighted = SymMatrix::zeros_checked(n).ok_or(SampleError::Allocation { n })?;
    let mut realization =
        Realization { weighted, realized_per_type: vec![0; spec.types().len()], seed };
    let chunk_size = effective_chunk_size(options);
    for type_index in 0..spec.types().len() {
        let ev = TypeEvaluator::new(spec, type_index)?;
        let template = &ev.model_type.template;
        let m = template.size;
        for (class_index, plan) in plan_classes(&ev, n, options)?.into_iter().enumerate() {
            let chunks = plan.count.div_ceil(chunk_size as u128) as usize;
            let realized: Vec<Vec<u32>> = par::map_indexed(chunks, |chunk_index| {
                let start = chunk_index as u128 * chunk_size as u128;
                let len = (plan.count - start).min(chunk_size as u128) as u64;
                run_chunk(
                    &ev,
                    &plan,
                    stream_key(seed, type_index, class_index, chunk_index),
                    start,
                    len,
                )
            });
            for chunk in realized {
                debug_assert_eq!(chunk.len() % m, 0);
                realization.realized_per_type[type_index] += (chunk.len() / m) as u64;
                for nodes in chunk.chunks_exact(m) {
                    for &(a, b) in &template.edges {
                        realization.weighted.add_sym(nodes[a] as usize, nodes[b] as usize, 1.0);
                    }
                }
            }
        }
    }
    Ok(realization)
}

/// Draws one chunk of a class; returns realized placements as flattened
/// node lists, in rank order.
fn run_chunk(
    ev: &TypeEvaluator<'_>,
    plan: &ClassPlan<'_>,
    key: [u8; 32],
    start: u128,
    len: u64,
) -> Vec<u32> {
    let mut rng = ChaCha8Rng::from_seed(key);
    let mut out: Vec<u32> = Vec::new();
    let mut push = |nodes: &[usize]| out.extend(nodes.iter().map(|&v| v as u32));
    match plan.strategy {
        Strategy::Scan => {
            if let ClassLayout::TableEntries { entries } = &plan.layout {
                for local in 0..len {
                    let entry = &entries[(start + local as u128) as usize];
                    if rng.random::<f64>() < entry.p {
                        push(&entry.nodes);
                    }
                }
            } else {
                let mut nodes = plan.layout.unrank(start);
                for local in 0..len {
                    if local > 0 {
                        plan.layout.step(start + local as u128, &mut nodes);
                    }
                    if rng.random::<f64>() < ev.probability(&nodes) {
                        push(&nodes);
                    }
                }
            }
        }
        Strategy::Skip { p: rate } | Strategy::Thin { p_max: rate } if rate > 0.0 => {
            // ln(1 - rate); -inf at rate 1 makes every skip zero, which
            // realizes every rank.
            let ln_q = (-rate).ln_1p();
            let len_f = len as f64;
            let mut pos = 0.0f64;
            loop {
                let u = 1.0 - rng.random::<f64>();
                pos += (u.ln() / ln_q).floor();
                if !(pos < len_f) {
                    break;
                }
                let nodes = plan.layout.unrank(start + pos as u64 as u128);
                let accept = match plan.strategy {
                    Strategy::Thin { p_max } => {
                        rng.random::<f64>() * p_max < ev.probability(&nodes)
                    }
                    _ => true,
                };
                if accept {
                    push(&nodes);
                }
                pos += 1.0;
            }
        }
        _ => {}
    }
    out
}

// ---------------------------------------------------------------------------
// Edge CSV
// ---------------------------------------------------------------------------

/// Writes realized edges as `i,j,weight` rows with a header, upper triangle
/// only, positive weights only.
pub fn write_edges_csv(realization: &Realization, out: &mut impl Write) -> io::Result<()> {
    writeln!(out, "i,j,weight")?;
    let n = realization.n();
    for i in 0..n {
        for j in (i + 1)..n {
            let w = realization.weighted.get(i, j);
            if w > 0.0 {
                writeln!(out, "{i},{j},{w}")?;
            }
        }
    }
    Ok(())
}

/// Reads an edge CSV produced by [`write_edges_csv`] back into a weighted
/// adjacency matrix of dimension `n`.
pub fn read_edges_csv(n: usize, input: &mut impl BufRead) -> Result<SymMatrix, SampleError> {
    let mut matrix = SymMatrix::zeros_checked(n).ok_or(SampleError::Allocation { n })?;
    let mut lines = input.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header.trim() != "i,j,weight" {
        return Err(SampleError::Csv("missing i,j,weight header".to_string()));
    }
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |what: &str| SampleError::Csv(format!("line {}: {what}", lineno + 2));
        let mut cells = line.split(',');
        let mut field = |what: &str| cells.next().ok_or_else(|| bad(what));
        let i: usize = field("missing i")?.trim().parse().map_err(|_| bad("bad i"))?;
        let j: usize = field("missing j")?.trim().parse().map_err(|_| bad("bad j"))?;
        let w: f64 = field("missing weight")?.trim().parse().map_err(|_| bad("bad weight"))?;
        if i >= n || j >= n || i == j {
            return Err(bad("node ids out of range"));
        }
        if cells.next().is_some() {
            return Err(bad("too many fields"));
        }
        matrix.set_sym(i, j, w);
    }
    Ok(matrix)
}
