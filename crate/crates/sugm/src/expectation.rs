//! Exact expected adjacency matrices.
//!
//! The weighted matrix entry (i, j) sums, over every placement covering the
//! pair, the probability of that placement; the unweighted entry is the
//! probability that at least one covering placement realizes. Placements
//! are independent and a single placement covers a pair through at most one
//! template edge, so the unweighted entry is 1 - prod(1 - p) over covering
//! placements, accumulated in log space as sum of ln(1 - p).
//!
//! Parametric rules use closed-form placement counts; distance and ordered
//! rules enumerate covering placements pair by pair. Pair rows are
//! independent, so enumeration parallelizes across rows and merges in a
//! fixed row order, which keeps results identical across thread counts.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::linalg::SymMatrix;
use crate::model::{ModelError, PlacementSemantics, ProbabilityRule, SugmSpec, TypeEvaluator};
use crate::par;

/// Default cap on per-placement probability evaluations.
pub const DEFAULT_EVAL_BUDGET: f64 = 1e10;

#[derive(Debug, Error)]
pub enum ExpectError {
    #[error(
        "expectation needs about {required:.3e} probability evaluations, budget is {budget:.3e}"
    )]
    Budget { required: f64, budget: f64 },
    #[error("matrix of dimension {n} does not fit in memory")]
    Allocation { n: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("matrix csv: {0}")]
    Csv(String),
    #[error("matrix csv: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy)]
pub struct ExpectOptions {
    /// Upper bound on probability evaluations before the computation is
    /// refused. Checked before any matrix allocation.
    pub eval_budget: f64,
}

impl Default for ExpectOptions {
    fn default() -> Self {
        ExpectOptions { eval_budget: DEFAULT_EVAL_BUDGET }
    }
}

/// Exact expectations of the weighted and unweighted adjacency matrices.
#[derive(Debug, Clone)]
pub struct ExpectedMatrices {
    pub weighted: SymMatrix,
    pub unweighted: SymMatrix,
}

impl ExpectedMatrices {
    /// Maximum expected weighted degree, the scale the tail bounds use.
    pub fn delta_weighted(&self) -> f64 {
        self.weighted.max_abs_row_sum()
    }

    /// Maximum expected unweighted degree.
    pub fn delta_unweighted(&self) -> f64 {
        self.unweighted.max_abs_row_sum()
    }
}

/// Packed strict upper triangle of pair accumulators.
struct PairTable {
    n: usize,
    weighted: Vec<f64>,
    /// Sum of ln(1 - p) over covering placements.
    log_miss: Vec<f64>,
}

impl PairTable {
    fn new(n: usize) -> Result<Self, ExpectError> {
        let len = n * (n - 1) / 2;
        let mut weighted = Vec::new();
        let mut log_miss = Vec::new();
        weighted.try_reserve_exact(len).map_err(|_| ExpectError::Allocation { n })?;
        log_miss.try_reserve_exact(len).map_err(|_| ExpectError::Allocation { n })?;
        weighted.resize(len, 0.0);
        log_miss.resize(len, 0.0);
        Ok(PairTable { n, weighted, log_miss })
    }

    /// Index of pair (i, j) with i < j; row i starts after the rows above,
    /// which hold i * (2n - i - 1) / 2 entries in total.
    fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n);
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }

    /// Adds `count` covering placements of probability `p` to pair (i, j).
    fn add_count(&mut self, i: usize, j: usize, count: f64, p: f64) {
        if count == 0.0 {
            return;
        }
        let k = self.index(i, j);
        self.weighted[k] += count * p;
        self.log_miss[k] += count * (-p).ln_1p();
    }
}

/// Computes both expected adjacency matrices exactly.
pub fn expected_adjacency(
    spec: &SugmSpec,
    options: &ExpectOptions,
) -> Result<ExpectedMatrices, ExpectError> {
    let required = evaluation_cost(spec);
    if !(required <= options.eval_budget) {
        return Err(ExpectError::Budget { required, budget: options.eval_budget });
    }
    let n = spec.n();
    let mut table = PairTable::new(n)?;
    for type_index in 0..spec.types().len() {
        let ev = TypeEvaluator::new(spec, type_index)?;
        accumulate_type(&ev, n, &mut table)?;
    }
    let weighted = SymMatrix::from_fn(n, |i, j| if i == j { 0.0 } else { table.weighted[table.index(i, j)] });
    let unweighted = SymMatrix::from_fn(n, |i, j| {
        if i == j {
            0.0
        } else {
            -table.log_miss[table.index(i, j)].exp_m1()
        }
    });
    Ok(ExpectedMatrices { weighted, unweighted })
}

/// Number of probability evaluations [`expected_adjacency`] will perform,
/// counting closed-form rules as one pass over the pairs.
pub fn evaluation_cost(spec: &SugmSpec) -> f64 {
    let n = spec.n();
    let pairs = n as f64 * (n as f64 - 1.0) / 2.0;
    let mut total = 0.0;
    for t in spec.types() {
        if t.template.edges.is_empty() {
            continue;
        }
        let m = t.template.size;
        let edges = t.template.edges.len() as f64;
        total += match (&t.rule, t.template.semantics) {
            (ProbabilityRule::Uniform { .. } | ProbabilityRule::Block { .. }, _) => pairs,
            (ProbabilityRule::Table { entries }, _) => entries.len() as f64,
            (ProbabilityRule::Distance { .. }, PlacementSemantics::Set) => {
                pairs * binomial_f64(n - 2, m - 2)
            }
            (ProbabilityRule::Distance { .. }, PlacementSemantics::OrderedList) => {
                pairs * 2.0 * edges * falling_f64(n - 2, m - 2)
            }
        };
    }
    total
}

fn binomial_f64(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut v = 1.0;
    for i in 0..k {
        v *= (n - i) as f64 / (i + 1) as f64;
    }
    v
}

fn falling_f64(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut v = 1.0;
    for i in 0..k {
        v *= (n - i) as f64;
    }
    v
}

fn accumulate_type(ev: &TypeEvaluator<'_>, n: usize, table: &mut PairTable) -> Result<(), ExpectError> {
    let template = &ev.model_type.template;
    if template.edges.is_empty() {
        return Ok(());
    }
    let m = template.size;
    let edges = template.edges.len() as f64;
    match (&ev.model_type.rule, template.semantics) {
        (ProbabilityRule::Uniform { .. }, PlacementSemantics::Set) => {
            let p = ev.probability(&canonical_nodes(m));
            let count = binomial_f64(n - 2, m - 2);
            for i in 0..n {
                for j in (i + 1)..n {
                    table.add_count(i, j, count, p);
                }
            }
        }
        (ProbabilityRule::Uniform { .. }, PlacementSemantics::OrderedList) => {
            let p = ev.probability(&canonical_nodes(m));
            let count = 2.0 * edges * falling_f64(n - 2, m - 2);
            for i in 0..n {
                for j in (i + 1)..n {
                    table.add_count(i, j, count, p);
                }
            }
        }
        (ProbabilityRule::Block { .. }, semantics) => {
            accumulate_block(ev, n, m, edges, semantics, table);
        }
        (ProbabilityRule::Table { entries }, PlacementSemantics::Set) => {
            for e in entries {
                for (ai, &a) in e.nodes.iter().enumerate() {
                    for &b in e.nodes.iter().skip(ai + 1) {
                        table.add_count(a.min(b), a.max(b), 1.0, e.p);
                    }
                }
            }
        }
        (ProbabilityRule::Table { entries }, PlacementSemantics::OrderedList) => {
            for e in entries {
                for &(a, b) in &template.edges {
                    let (u, v) = (e.nodes[a], e.nodes[b]);
                    table.add_count(u.min(v), u.max(v), 1.0, e.p);
                }
            }
        }
        (ProbabilityRule::Distance { .. }, PlacementSemantics::Set) => {
            accumulate_pairwise(n, table, |i, j, add| {
                for_each_set_completion(n, i, j, m, |nodes| add(1.0, ev.probability(nodes)));
            });
        }
        (ProbabilityRule::Distance { .. }, PlacementSemantics::OrderedList) => {
            accumulate_pairwise(n, table, |i, j, add| {
                for_each_ordered_completion(ev, n, i, j, |p| add(1.0, p));
            });
        }
    }
    Ok(())
}

/// Closed-form block accumulation. Probability depends only on whether all
/// placed nodes share a community, so covering placements split into a
/// within count (remaining nodes drawn from the shared community) and an
/// across remainder.
fn accumulate_block(
    ev: &TypeEvaluator<'_>,
    n: usize,
    m: usize,
    edges: f64,
    semantics: PlacementSemantics,
    table: &mut PairTable,
) {
    let layout = ev.communities().expect("block rule has a community layout");
    let completions = |pool: usize| match semantics {
        PlacementSemantics::Set => binomial_f64(pool, m - 2),
        PlacementSemantics::OrderedList => 2.0 * edges * falling_f64(pool, m - 2),
    };
    let total = completions(n - 2);
    let within_by_community: Vec<f64> =
        (0..layout.count()).map(|c| completions(layout.range(c).1.saturating_sub(2))).collect();
    // Probe placements: all nodes in community 0 versus nodes spanning
    // communities; only the within/across distinction affects p.
    let (p_within_by_community, p_across) = block_probabilities(ev, n, m, layout.count());
    for i in 0..n {
        let ci = layout.community_of(i);
        for j in (i + 1)..n {
            let cj = layout.community_of(j);
            if ci == cj {
                let within = within_by_community[ci];
                table.add_count(i, j, within, p_within_by_community[ci]);
                table.add_count(i, j, total - within, p_across);
            } else {
                table.add_count(i, j, total, p_across);
            }
        }
    }
}

/// Evaluates the within probability per community and the across
/// probability through the rule itself rather than duplicating its formula.
fn block_probabilities(
    ev: &TypeEvaluator<'_>,
    n: usize,
    m: usize,
    communities: usize,
) -> (Vec<f64>, f64) {
    let layout = ev.communities().expect("block rule has a community layout");
    let within = (0..communities)
        .map(|c| {
            let (start, len) = layout.range(c);
            if len < m {
                // No all-within placement exists; the count is zero so the
                // probability is never used.
                0.0
            } else {
                let nodes: Vec<usize> = (start..start + m).collect();
                ev.probability(&nodes)
            }
        })
        .collect();
    // Any placement spanning two communities works as the across probe.
    let mut spanning: Vec<usize> = (0..m - 1).collect();
    spanning.push(n - 1);
    let p_across = ev.probability(&spanning);
    (within, p_across)
}

fn canonical_nodes(m: usize) -> Vec<usize> {
    (0..m).collect()
}

/// Runs `fill(i, j, add)` for every pair in parallel over rows, then merges
/// rows in index order.
fn accumulate_pairwise(
    n: usize,
    table: &mut PairTable,
    fill: impl Fn(usize, usize, &mut dyn FnMut(f64, f64)) + Sync,
) {
    let rows: Vec<Vec<(f64, f64)>> = par::map_indexed(n, |i| {
        let mut row = vec![(0.0, 0.0); n - i - 1];
        for j in (i + 1)..n {
            let cell = &mut row[j - i - 1];
            fill(i, j, &mut |count, p| {
                if count != 0.0 {
                    cell.0 += count * p;
                    cell.1 += count * (-p).ln_1p();
                }
            });
        }
        row
    });
    for (i, row) in rows.into_iter().enumerate() {
        for (offset, (w, lm)) in row.into_iter().enumerate() {
            let k = table.index(i, i + offset + 1);
            table.weighted[k] += w;
            table.log_miss[k] += lm;
        }
    }
}

/// Visits each set placement containing i and j once: every (m-2)-subset of
/// the remaining nodes, merged with {i, j} in ascending order.
fn for_each_set_completion(
    n: usize,
    i: usize,
    j: usize,
    m: usize,
    mut visit: impl FnMut(&[usize]),
) {
    let mut nodes = vec![0usize; m];
    let mut rest = vec![0usize; m - 2];
    fn recurse(
        n: usize,
        i: usize,
        j: usize,
        rest: &mut [usize],
        depth: usize,
        from: usize,
        nodes: &mut Vec<usize>,
        visit: &mut impl FnMut(&[usize]),
    ) {
        if depth == rest.len() {
            merge_pair(i, j, rest, nodes);
            visit(nodes);
            return;
        }
        for v in from..n {
            if v == i || v == j {
                continue;
            }
            rest[depth] = v;
            recurse(n, i, j, rest, depth + 1, v + 1, nodes, visit);
        }
    }
    recurse(n, i, j, &mut rest, 0, 0, &mut nodes, &mut visit);
}

/// Writes the ascending merge of {i, j} (i < j) and the ascending slice
/// `rest` into `out`.
fn merge_pair(i: usize, j: usize, rest: &[usize], out: &mut [usize]) {
    let mut pair = [i, j].into_iter().peekable();
    let mut tail = rest.iter().copied().peekable();
    for slot in out.iter_mut() {
        let take_pair = match (pair.peek(), tail.peek()) {
            (Some(&a), Some(&b)) => a < b,
            (Some(_), None) => true,
            (None, _) => false,
        };
        *slot = if take_pair { pair.next().unwrap() } else { tail.next().unwrap() };
    }
}

/// Visits the probability of each ordered placement covering the pair
/// (i, j) once: for every template edge and both orientations, every
/// arrangement of the remaining slots over the other nodes.
fn for_each_ordered_completion(
    ev: &TypeEvaluator<'_>,
    n: usize,
    i: usize,
    j: usize,
    mut visit: impl FnMut(f64),
) {
    const FREE: usize = usize::MAX;
    let template = &ev.model_type.template;
    let m = template.size;
    let mut slots = vec![FREE; m];
    fn fill_free(
        ev: &TypeEvaluator<'_>,
        n: usize,
        slots: &mut Vec<usize>,
        next: usize,
        visit: &mut impl FnMut(f64),
    ) {
        let Some(slot) = slots[next..].iter().position(|&s| s == FREE).map(|o| next + o) else {
            visit(ev.probability(slots));
            return;
        };
        for v in 0..n {
            if slots.contains(&v) {
                continue;
            }
            slots[slot] = v;
            fill_free(ev, n, slots, slot + 1, visit);
            slots[slot] = FREE;
        }
    }
    for &(a, b) in &template.edges {
        for (u, v) in [(i, j), (j, i)] {
            slots[a] = u;
            slots[b] = v;
            fill_free(ev, n, &mut slots, 0, &mut visit);
            slots[a] = FREE;
            slots[b] = FREE;
        }
    }
}

// ---------------------------------------------------------------------------
// Matrix CSV
// ---------------------------------------------------------------------------

/// Writes a dense matrix as CSV, one row per line. Values print in
/// shortest-roundtrip form, so reading back reproduces them bit for bit.
pub fn write_matrix_csv(matrix: &SymMatrix, out: &mut impl Write) -> io::Result<()> {
    let n = matrix.n();
    let mut line = String::new();
    for i in 0..n {
        line.clear();
        for j in 0..n {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&format!("{}", matrix.get(i, j)));
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    Ok(())
}

/// Reads a dense symmetric matrix from CSV and validates symmetry.
pub fn read_matrix_csv(input: &mut impl BufRead) -> Result<SymMatrix, ExpectError> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|cell| {
                cell.trim()
                    .parse::<f64>()
                    .map_err(|e| ExpectError::Csv(format!("line {}: {e}", lineno + 1)))
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(ExpectError::Csv("no rows".to_string()));
    }
    SymMatrix::from_rows(rows).map_err(|e| ExpectError::Csv(e.to_string()))
}
