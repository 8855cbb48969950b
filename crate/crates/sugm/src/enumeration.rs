//! Exact enumeration over all joint outcomes of a small placement list.
//!
//! An [`EnumeratedModel`] is an explicit list of at most 20 independently
//! realized edge patterns on at most 8 nodes. Walking all 2^K realization
//! vectors gives exact expected adjacencies and exact Efron-Stein variance
//! proxies, which back the inequality checks reported by the `verify`
//! command: entrywise proxy dominance, the trace-MGF bound for the weighted
//! proxy, the tail inequality for the centered unweighted matrix, and the
//! per-coordinate spectrum bound. Larger instances belong to the sampler.

use crate::combinatorics::{unrank_arrangement, unrank_combination};
use crate::expectation::ExpectedMatrices;
use crate::linalg::{LinalgError, SymMatrix};
use crate::model::{
    placement_count, placement_probability, ModelError, Placement, PlacementSemantics, SugmSpec,
};
use crate::par;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Node cap for exact enumeration.
pub const MAX_NODES: usize = 8;

/// Placement cap; 2^20 joint outcomes keep every sweep sub-second.
pub const MAX_PLACEMENTS: usize = 20;

/// Tolerance for identities that hold exactly up to accumulation roundoff.
pub const EXACT_TOL: f64 = 1e-12;

/// Slack allowed below zero for eigenvalues of matrices that are positive
/// semidefinite in exact arithmetic.
pub const PSD_TOL: f64 = 1e-10;

/// Slack allowed on the dominant side of inequality checks.
const INEQ_SLACK: f64 = 1e-10;

/// Realization vectors per parallel chunk; fixed so the reduction order
/// never depends on thread count.
const ENUM_CHUNK: u32 = 4096;

#[derive(Debug, Error)]
pub enum EnumerationError {
    #[error("{count} placements exceed the exact enumeration cap of {}", MAX_PLACEMENTS)]
    TooManyPlacements { count: usize },
    #[error("node count {n} outside 2..={}", MAX_NODES)]
    NodeCount { n: usize },
    #[error("placement {index}: {reason}")]
    InvalidPlacement { index: usize, reason: String },
    #[error("{name} = {value} outside {window}")]
    ParameterRange { name: &'static str, value: f64, window: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// One independently realized placement: a symmetric {0,1} edge pattern and
/// its probability. The squared pattern is cached because every variance
/// proxy is a weighted sum of pattern squares.
#[derive(Debug, Clone)]
struct EnumeratedPlacement {
    matrix: SymMatrix,
    square: SymMatrix,
    edges: Vec<(usize, usize)>,
    /// Touched nodes, ascending. The pattern and its square vanish off this
    /// set, so proxy accumulation only visits these rows and columns.
    nodes: Vec<usize>,
    p: f64,
}

/// A model small enough to enumerate exhaustively.
#[derive(Debug, Clone)]
pub struct EnumeratedModel {
    n: usize,
    m_max: usize,
    placements: Vec<EnumeratedPlacement>,
}

/// One joint outcome: placement k is realized iff bit k of `bits` is set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealizationVector {
    pub bits: u32,
    pub probability: f64,
}

/// Location of the worst violation a failed check saw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Witness {
    /// Matrix entry (i, j) at the realization vector `bits`.
    Entry { bits: u32, i: usize, j: usize },
    /// Per-coordinate difference matrix at a realization branch.
    Coordinate { bits: u32, coordinate: usize },
}

/// Result of one inequality check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub passed: bool,
    /// Smallest slack seen across everything the check examined; a negative
    /// margin is a violation.
    pub worst_margin: f64,
    pub witness: Option<Witness>,
}

/// Coordinate weight of the two-point difference: the expectation of
/// (x - x')^2 over an independent resample x' of one coordinate.
fn coordinate_weight(realized: bool, p: f64) -> f64 {
    if realized {
        1.0 - p
    } else {
        p
    }
}

fn matrix_square(m: &SymMatrix) -> SymMatrix {
    let n = m.n();
    SymMatrix::from_fn(n, |i, j| (0..n).map(|l| m.get(i, l) * m.get(l, j)).sum())
}

impl EnumeratedModel {
    /// Validates an explicit placement list: each pattern symmetric with
    /// {0,1} entries, zero diagonal, and a probability in [0, 1]. The
    /// maximum placement size is the largest touched-node count, floored at
    /// 2 so the derived bounds stay meaningful for edgeless lists.
    pub fn new(n: usize, placements: Vec<(SymMatrix, f64)>) -> Result<Self, EnumerationError> {
        Self::with_size_floor(n, placements, 2)
    }

    fn with_size_floor(
        n: usize,
        placements: Vec<(SymMatrix, f64)>,
        size_floor: usize,
    ) -> Result<Self, EnumerationError> {
        if n < 2 || n > MAX_NODES {
            return Err(EnumerationError::NodeCount { n });
        }
        if placements.len() > MAX_PLACEMENTS {
            return Err(EnumerationError::TooManyPlacements { count: placements.len() });
        }
        let mut m_max = size_floor.max(2);
        let mut converted = Vec::with_capacity(placements.len());
        for (index, (matrix, p)) in placements.into_iter().enumerate() {
            if matrix.n() != n {
                return Err(EnumerationError::InvalidPlacement {
                    index,
                    reason: format!("pattern is {0}x{0} in a model on {n} nodes", matrix.n()),
                });
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(EnumerationError::InvalidPlacement {
                    index,
                    reason: format!("probability {p} outside [0, 1]"),
                });
            }
            let mut edges = Vec::new();
            let mut touched = vec![false; n];
            for i in 0..n {
                for j in i..n {
                    let v = matrix.get(i, j);
                    if i == j {
                        if v != 0.0 {
                            return Err(EnumerationError::InvalidPlacement {
                                index,
                                reason: format!("diagonal entry ({i}, {i}) = {v} must be zero"),
                            });
                        }
                    } else if v == 1.0 {
                        edges.push((i, j));
                        touched[i] = true;
                        touched[j] = true;
                    } else if v != 0.0 {
                        return Err(EnumerationError::InvalidPlacement {
                            index,
                            reason: format!("entry ({i}, {j}) = {v} not in {{0, 1}}"),
                        });
                    }
                }
            }
            let nodes: Vec<usize> = (0..n).filter(|&v| touched[v]).collect();
            m_max = m_max.max(nodes.len());
            let square = matrix_square(&matrix);
            converted.push(EnumeratedPlacement { matrix, square, edges, nodes, p });
        }
        Ok(EnumeratedModel { n, m_max, placements: converted })
    }

    /// Expands every placement of `spec` into an explicit pattern. Inert
    /// placements (zero probability or an edgeless template) are dropped
    /// before the capacity check; they never carry weight. The maximum
    /// placement size is taken from the spec's templates.
    pub fn from_spec(spec: &SugmSpec) -> Result<Self, EnumerationError> {
        let n = spec.n();
        if n < 2 || n > MAX_NODES {
            return Err(EnumerationError::NodeCount { n });
        }
        let mut raw = Vec::new();
        let mut kept = 0usize;
        for (type_index, ty) in spec.types().iter().enumerate() {
            if ty.template.edges.is_empty() {
                continue;
            }
            let m = ty.template.size;
            let total = placement_count(spec, type_index)?;
            for rank in 0..total {
                let nodes = match ty.template.semantics {
                    PlacementSemantics::Set => unrank_combination(rank, n, m),
                    PlacementSemantics::OrderedList => unrank_arrangement(rank, n, m),
                }
                .expect("rank below placement count");
                let p = placement_probability(spec, &Placement { type_index, nodes: nodes.clone() })?;
                if p <= 0.0 {
                    continue;
                }
                kept += 1;
                if kept > MAX_PLACEMENTS {
                    continue;
                }
                let mut matrix = SymMatrix::zeros(n);
                for &(a, b) in &ty.template.edges {
                    matrix.set_sym(nodes[a], nodes[b], 1.0);
                }
                raw.push((matrix, p));
            }
        }
        if kept > MAX_PLACEMENTS {
            return Err(EnumerationError::TooManyPlacements { count: kept });
        }
        Self::with_size_floor(n, raw, spec.m_max())
    }

    /// Deterministic random instance within the caps: 3 to 5 nodes and 2 to
    /// 10 placements, each a nonempty edge pattern on 2 to 4 nodes with a
    /// probability uniform in [0, 1).
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(3..=5usize);
        let count = rng.random_range(2..=10usize);
        let mut raw = Vec::with_capacity(count);
        for _ in 0..count {
            let size = rng.random_range(2..=n.min(4));
            let mut pool: Vec<usize> = (0..n).collect();
            for i in 0..size {
                let j = rng.random_range(i..n);
                pool.swap(i, j);
            }
            let mut nodes: Vec<usize> = pool[..size].to_vec();
            nodes.sort_unstable();
            let mut matrix = SymMatrix::zeros(n);
            let mut any = false;
            for a in 0..size {
                for b in (a + 1)..size {
                    if rng.random::<bool>() {
                        matrix.set_sym(nodes[a], nodes[b], 1.0);
                        any = true;
                    }
                }
            }
            if !any {
                matrix.set_sym(nodes[0], nodes[1], 1.0);
            }
            raw.push((matrix, rng.random::<f64>()));
        }
        Self::new(n, raw).expect("generator stays within the caps")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// K, the number of independent placements.
    pub fn placement_count(&self) -> usize {
        self.placements.len()
    }

    /// Largest placement size, the M in the spectrum and MGF bounds.
    pub fn m_max(&self) -> usize {
        self.m_max
    }

    /// Number of joint outcomes, 2^K.
    pub fn config_count(&self) -> u32 {
        1u32 << self.placements.len()
    }

    pub fn placement_matrix(&self, k: usize) -> &SymMatrix {
        &self.placements[k].matrix
    }

    pub fn placement_probability(&self, k: usize) -> f64 {
        self.placements[k].p
    }

    /// The joint outcome `bits` with its probability.
    pub fn realization(&self, bits: u32) -> RealizationVector {
        debug_assert!(bits < self.config_count());
        let mut probability = 1.0;
        for (k, pl) in self.placements.iter().enumerate() {
            probability *= if bits >> k & 1 == 1 { pl.p } else { 1.0 - pl.p };
        }
        RealizationVector { bits, probability }
    }

    /// Weighted adjacency at one outcome: the sum of realized patterns.
    pub fn weighted(&self, bits: u32) -> SymMatrix {
        let mut w = SymMatrix::zeros(self.n);
        for (k, pl) in self.placements.iter().enumerate() {
            if bits >> k & 1 == 1 {
                for &(i, j) in &pl.edges {
                    w.add_sym(i, j, 1.0);
                }
            }
        }
        w
    }

    /// Unweighted adjacency at one outcome: entrywise min(weighted, 1).
    pub fn unweighted(&self, bits: u32) -> SymMatrix {
        self.weighted(bits).map(|v| v.min(1.0))
    }

    /// Difference of the unweighted adjacency between coordinate k forced
    /// on and forced off. The result is 1 exactly on the edges of placement
    /// k that no other realized placement covers, and 0 elsewhere.
    pub fn coordinate_difference(&self, bits: u32, k: usize) -> SymMatrix {
        let w = self.weighted(bits);
        let own = if bits >> k & 1 == 1 { 1.0 } else { 0.0 };
        let mut c = SymMatrix::zeros(self.n);
        for &(i, j) in &self.placements[k].edges {
            if w.get(i, j) - own < 0.5 {
                c.set_sym(i, j, 1.0);
            }
        }
        c
    }

    /// Weighted variance proxy at one outcome, assembled from the closed
    /// form: half the sum over coordinates of (x(1-2p) + p) times the
    /// squared pattern.
    pub fn variance_proxy_weighted(&self, bits: u32) -> SymMatrix {
        let mut v = SymMatrix::zeros(self.n);
        for (k, pl) in self.placements.iter().enumerate() {
            let c = coordinate_weight(bits >> k & 1 == 1, pl.p);
            if c == 0.0 {
                continue;
            }
            let scale = 0.5 * c;
            for (ai, &i) in pl.nodes.iter().enumerate() {
                for &j in &pl.nodes[ai..] {
                    let sq = pl.square.get(i, j);
                    if sq != 0.0 {
                        v.add_sym(i, j, scale * sq);
                    }
                }
            }
        }
        v
    }

    /// Unweighted variance proxy at one outcome: half the sum over
    /// coordinates of (x(1-2p) + p) times the squared coordinate
    /// difference. The difference is supported on the placement's own node
    /// set, so each square is taken on that small block only.
    pub fn variance_proxy_unweighted(&self, bits: u32) -> SymMatrix {
        let w = self.weighted(bits);
        let mut v = SymMatrix::zeros(self.n);
        for (k, pl) in self.placements.iter().enumerate() {
            let c = coordinate_weight(bits >> k & 1 == 1, pl.p);
            if c == 0.0 {
                continue;
            }
            let size = pl.nodes.len();
            let own = if bits >> k & 1 == 1 { 1.0 } else { 0.0 };
            let mut local = [[0.0f64; MAX_NODES]; MAX_NODES];
            for &(i, j) in &pl.edges {
                if w.get(i, j) - own < 0.5 {
                    let a = pl.nodes.binary_search(&i).expect("edge endpoint is a touched node");
                    let b = pl.nodes.binary_search(&j).expect("edge endpoint is a touched node");
                    local[a][b] = 1.0;
                    local[b][a] = 1.0;
                }
            }
            let scale = 0.5 * c;
            for a in 0..size {
                for b in a..size {
                    let mut acc = 0.0;
                    for l in 0..size {
                        acc += local[a][l] * local[l][b];
                    }
                    if acc != 0.0 {
                        v.add_sym(pl.nodes[a], pl.nodes[b], scale * acc);
                    }
                }
            }
        }
        v
    }

    fn chunk_count(&self) -> usize {
        (self.config_count() as usize).div_ceil(ENUM_CHUNK as usize)
    }

    fn chunk_bounds(&self, chunk: usize) -> (u32, u32) {
        let start = chunk as u32 * ENUM_CHUNK;
        (start, self.config_count().min(start + ENUM_CHUNK))
    }

    /// Exact expected adjacencies by full enumeration, each outcome weighted
    /// by its probability.
    pub fn exact_expectation(&self) -> ExpectedMatrices {
        let partials = par::map_indexed(self.chunk_count(), |chunk| {
            let (start, end) = self.chunk_bounds(chunk);
            let mut wsum = SymMatrix::zeros(self.n);
            let mut usum = SymMatrix::zeros(self.n);
            for bits in start..end {
                let rv = self.realization(bits);
                if rv.probability == 0.0 {
                    continue;
                }
                let w = self.weighted(bits);
                for i in 0..self.n {
                    for j in (i + 1)..self.n {
                        let wv = w.get(i, j);
                        if wv > 0.0 {
                            wsum.add_sym(i, j, rv.probability * wv);
                            usum.add_sym(i, j, rv.probability * wv.min(1.0));
                        }
                    }
                }
            }
            (wsum, usum)
        });
        let mut weighted = SymMatrix::zeros(self.n);
        let mut unweighted = SymMatrix::zeros(self.n);
        for (wsum, usum) in partials {
            weighted = weighted.add(&wsum);
            unweighted = unweighted.add(&usum);
        }
        ExpectedMatrices { weighted, unweighted }
    }

    /// Maximum expected weighted degree from the linear closed form; equal
    /// to the enumerated value but free of the 2^K sweep.
    fn delta_weighted_closed(&self) -> f64 {
        let mut expected = SymMatrix::zeros(self.n);
        for pl in &self.placements {
            for &(i, j) in &pl.edges {
                expected.add_sym(i, j, pl.p);
            }
        }
        expected.max_abs_row_sum()
    }

    /// Entrywise dominance of the variance proxies: at every outcome,
    /// 0 <= V_U <= V_W holds entry by entry. The margin is the smallest
    /// slack over all outcomes and entries.
    pub fn check_lemma_dominance(&self) -> CheckOutcome {
        let partials = par::map_indexed(self.chunk_count(), |chunk| {
            let (start, end) = self.chunk_bounds(chunk);
            let mut worst = (f64::INFINITY, 0u32, 0usize, 0usize);
            for bits in start..end {
                let vw = self.variance_proxy_weighted(bits);
                let vu = self.variance_proxy_unweighted(bits);
                for i in 0..self.n {
                    for j in i..self.n {
                        let lower = vu.get(i, j);
                        let slack = lower.min(vw.get(i, j) - lower);
                        if slack < worst.0 {
                            worst = (slack, bits, i, j);
                        }
                    }
                }
            }
            worst
        });
        let mut worst = (f64::INFINITY, 0u32, 0usize, 0usize);
        for w in partials {
            if w.0 < worst.0 {
                worst = w;
            }
        }
        let passed = worst.0 >= -EXACT_TOL;
        CheckOutcome {
            passed,
            worst_margin: worst.0,
            witness: (!passed).then_some(Witness::Entry { bits: worst.1, i: worst.2, j: worst.3 }),
        }
    }

    /// Trace-MGF bound for the weighted proxy: for each psi in the grid,
    /// log E[normalized trace of exp(psi V_W)] must stay below
    /// (e - 1) * delta_w * M * psi. The grid must lie in (0, 1/M^2).
    pub fn check_mgf_bound(&self, psi_grid: &[f64]) -> Result<Vec<CheckOutcome>, EnumerationError> {
        let m = self.m_max as f64;
        let cap = 1.0 / (m * m);
        for &psi in psi_grid {
            if !(psi > 0.0 && psi < cap) {
                return Err(EnumerationError::ParameterRange {
                    name: "psi",
                    value: psi,
                    window: format!("(0, {cap})"),
                });
            }
        }
        let delta_w = self.delta_weighted_closed();
        let partials = par::map_indexed(self.chunk_count(), |chunk| -> Result<Vec<f64>, LinalgError> {
            let (start, end) = self.chunk_bounds(chunk);
            let mut sums = vec![0.0; psi_grid.len()];
            for bits in start..end {
                let rv = self.realization(bits);
                if rv.probability == 0.0 {
                    continue;
                }
                let vw = self.variance_proxy_weighted(bits);
                for (sum, &psi) in sums.iter_mut().zip(psi_grid) {
                    *sum += rv.probability * vw.trace_exp_normalized(psi)?;
                }
            }
            Ok(sums)
        });
        let mut totals = vec![0.0; psi_grid.len()];
        for partial in partials {
            for (total, value) in totals.iter_mut().zip(partial?) {
                *total += value;
            }
        }
        Ok(totals
            .iter()
            .zip(psi_grid)
            .map(|(&total, &psi)| {
                let lhs = total.ln();
                let rhs = (std::f64::consts::E - 1.0) * delta_w * m * psi;
                CheckOutcome { passed: lhs <= rhs + INEQ_SLACK, worst_margin: rhs - lhs, witness: None }
            })
            .collect())
    }

    /// Tail inequality for the centered unweighted adjacency: with
    /// U_hat = U - E[U], log E[normalized trace of exp(theta U_hat)] must
    /// stay below (theta^2/psi) / (1 - 2 theta^2/psi) times
    /// log E[normalized trace of exp(psi V_U)]. Requires psi > 0 and
    /// |theta| <= sqrt(psi / 2); both sides are exact enumerations.
    pub fn check_efron_stein(&self, theta: f64, psi: f64) -> Result<CheckOutcome, EnumerationError> {
        if !(psi > 0.0) {
            return Err(EnumerationError::ParameterRange {
                name: "psi",
                value: psi,
                window: "(0, inf)".to_string(),
            });
        }
        let limit = (psi / 2.0).sqrt();
        if !(theta.abs() <= limit) {
            return Err(EnumerationError::ParameterRange {
                name: "theta",
                value: theta,
                window: format!("[-{limit}, {limit}]"),
            });
        }
        let expected_u = self.exact_expectation().unweighted;
        let partials = par::map_indexed(self.chunk_count(), |chunk| -> Result<(f64, f64), LinalgError> {
            let (start, end) = self.chunk_bounds(chunk);
            let mut lhs_sum = 0.0;
            let mut rhs_sum = 0.0;
            for bits in start..end {
                let rv = self.realization(bits);
                if rv.probability == 0.0 {
                    continue;
                }
                let centered = self.unweighted(bits).sub(&expected_u);
                lhs_sum += rv.probability * centered.trace_exp_normalized(theta)?;
                let vu = self.variance_proxy_unweighted(bits);
                rhs_sum += rv.probability * vu.trace_exp_normalized(psi)?;
            }
            Ok((lhs_sum, rhs_sum))
        });
        let mut lhs_total = 0.0;
        let mut rhs_total = 0.0;
        for partial in partials {
            let (l, r) = partial?;
            lhs_total += l;
            rhs_total += r;
        }
        let lhs = lhs_total.ln();
        let denom = 1.0 - 2.0 * theta * theta / psi;
        let rhs = if denom > 0.0 {
            (theta * theta / psi) / denom * rhs_total.ln()
        } else {
            // At |theta| = sqrt(psi/2) the multiplier diverges and the
            // bound is vacuous.
            f64::INFINITY
        };
        Ok(CheckOutcome { passed: lhs <= rhs + INEQ_SLACK, worst_margin: rhs - lhs, witness: None })
    }

    /// Per-coordinate difference matrices of the weighted proxy: each must
    /// be positive semidefinite with spectral norm below 2 M^2. The matrix
    /// depends on the outcome only through its own coordinate, so the sweep
    /// covers the two branches of each coordinate that have positive
    /// probability.
    pub fn check_spectrum_bound(&self) -> Result<CheckOutcome, EnumerationError> {
        let m = self.m_max as f64;
        let cap = 2.0 * m * m;
        let mut worst = f64::INFINITY;
        let mut passed = true;
        let mut witness = None;
        for (k, pl) in self.placements.iter().enumerate() {
            for realized in [false, true] {
                // Branches the realization distribution never produces are
                // skipped; a deterministic coordinate has zero variance.
                if (realized && pl.p == 0.0) || (!realized && pl.p == 1.0) {
                    continue;
                }
                let c = coordinate_weight(realized, pl.p);
                let d = pl.square.scaled(c);
                let eig = d.jacobi_eigendecomposition()?;
                let top = eig.values.first().copied().unwrap_or(0.0);
                let bottom = eig.values.last().copied().unwrap_or(0.0);
                let norm = top.abs().max(bottom.abs());
                let margin = bottom.min(cap - norm);
                if margin < worst {
                    worst = margin;
                }
                if (bottom < -PSD_TOL || norm >= cap) && witness.is_none() {
                    passed = false;
                    witness = Some(Witness::Coordinate { bits: (realized as u32) << k, coordinate: k });
                }
            }
        }
        Ok(CheckOutcome { passed, worst_margin: worst, witness })
    }

    /// Runs every check with the default grids: dominance, the trace-MGF
    /// bound at psi in {0.1, 0.5, 0.9}/M^2, the tail inequality over
    /// theta in {-0.15, -0.05, 0.05, 0.15} and psi in {0.1, 0.2}, and the
    /// spectrum bound. Returns one labelled outcome per line the `verify`
    /// command prints.
    pub fn check_all(&self) -> Result<Vec<(String, CheckOutcome)>, EnumerationError> {
        let m2 = (self.m_max * self.m_max) as f64;
        let mut report = vec![("dominance".to_string(), self.check_lemma_dominance())];
        let psi_grid: Vec<f64> = [0.1, 0.5, 0.9].iter().map(|s| s / m2).collect();
        for (outcome, &psi) in self.check_mgf_bound(&psi_grid)?.into_iter().zip(&psi_grid) {
            report.push((format!("trace-mgf psi={psi:.4}"), outcome));
        }
        for &theta in &[-0.15, -0.05, 0.05, 0.15] {
            for &psi in &[0.1, 0.2] {
                let outcome = self.check_efron_stein(theta, psi)?;
                report.push((format!("efron-stein theta={theta} psi={psi}"), outcome));
            }
        }
        report.push(("spectrum".to_string(), self.check_spectrum_bound()?));
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expectation::{expected_adjacency, ExpectOptions};
    use crate::model::{ModelType, ProbabilityRule, SubgraphTemplate};
    use proptest::prelude::*;

    fn link_pattern(n: usize, i: usize, j: usize) -> SymMatrix {
        let mut m = SymMatrix::zeros(n);
        m.set_sym(i, j, 1.0);
        m
    }

    fn triangle_pattern(n: usize, a: usize, b: usize, c: usize) -> SymMatrix {
        let mut m = SymMatrix::zeros(n);
        m.set_sym(a, b, 1.0);
        m.set_sym(a, c, 1.0);
        m.set_sym(b, c, 1.0);
        m
    }

    fn link_triangle_model() -> EnumeratedModel {
        EnumeratedModel::new(
            3,
            vec![(link_pattern(3, 0, 1), 0.5), (triangle_pattern(3, 0, 1, 2), 0.5)],
        )
        .unwrap()
    }

    fn assert_entrywise_close(a: &SymMatrix, b: &SymMatrix, tol: f64) {
        assert_eq!(a.n(), b.n());
        for i in 0..a.n() {
            for j in i..a.n() {
                let (x, y) = (a.get(i, j), b.get(i, j));
                assert!((x - y).abs() <= tol, "entry ({i}, {j}): {x} vs {y}");
            }
        }
    }

    /// Brute-force weighted proxy: enumerate the independent resample of
    /// each coordinate instead of using the closed-form weight.
    fn brute_weighted_proxy(model: &EnumeratedModel, bits: u32) -> SymMatrix {
        let mut v = SymMatrix::zeros(model.n());
        for k in 0..model.placement_count() {
            let p = model.placement_probability(k);
            let x = (bits >> k & 1) as f64;
            let square = matrix_square(model.placement_matrix(k));
            for (resample, weight) in [(0.0, 1.0 - p), (1.0, p)] {
                let diff = (x - resample) * (x - resample);
                if weight > 0.0 && diff > 0.0 {
                    v = v.add(&square.scaled(0.5 * weight * diff));
                }
            }
        }
        v
    }

    /// Brute-force unweighted proxy: dense coordinate forcing and a dense
    /// matrix square, no support shortcuts.
    fn brute_unweighted_proxy(model: &EnumeratedModel, bits: u32) -> SymMatrix {
        let mut v = SymMatrix::zeros(model.n());
        for k in 0..model.placement_count() {
            let p = model.placement_probability(k);
            let forced_on = model.unweighted(bits | 1 << k);
            let forced_off = model.unweighted(bits & !(1 << k));
            let c = forced_on.sub(&forced_off);
            let weight = coordinate_weight(bits >> k & 1 == 1, p);
            if weight > 0.0 {
                v = v.add(&matrix_square(&c).scaled(0.5 * weight));
            }
        }
        v
    }

    #[test]
    fn single_link_matches_hand_values() {
        let model = EnumeratedModel::new(2, vec![(link_pattern(2, 0, 1), 0.5)]).unwrap();
        assert_eq!(model.m_max(), 2);

        let exact = model.exact_expectation();
        assert!((exact.weighted.get(0, 1) - 0.5).abs() < 1e-15);
        assert!((exact.unweighted.get(0, 1) - 0.5).abs() < 1e-15);

        // Both outcomes have coordinate weight 1/2, so the proxy is half of
        // half the squared pattern: 0.25 on each incident diagonal entry.
        for bits in 0..model.config_count() {
            let vw = model.variance_proxy_weighted(bits);
            assert!((vw.get(0, 0) - 0.25).abs() < 1e-15);
            assert!((vw.get(1, 1) - 0.25).abs() < 1e-15);
            assert_eq!(vw.get(0, 1), 0.0);
        }

        // The proxy is 0.25 I, so the trace MGF at psi = 0.2 is exactly
        // exp(0.05) against a bound of (e - 1) * 0.5 * 2 * 0.2.
        let outcomes = model.check_mgf_bound(&[0.2]).unwrap();
        assert_eq!(outcomes.len(), 1);
        assert!(outcomes[0].passed);
        let expected_margin = (std::f64::consts::E - 1.0) * 0.2 - 0.05;
        assert!((outcomes[0].worst_margin - expected_margin).abs() < 1e-12);

        // Difference matrix has both eigenvalues 1/2; the norm cap is 8.
        let spectrum = model.check_spectrum_bound().unwrap();
        assert!(spectrum.passed);
        assert!((spectrum.worst_margin - 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_placement_proxies_coincide() {
        let model = EnumeratedModel::new(4, vec![(triangle_pattern(4, 0, 2, 3), 0.3)]).unwrap();
        for bits in 0..model.config_count() {
            let vw = model.variance_proxy_weighted(bits);
            let vu = model.variance_proxy_unweighted(bits);
            assert_entrywise_close(&vw, &vu, 1e-15);
        }
        let outcome = model.check_lemma_dominance();
        assert!(outcome.passed);
        assert!(outcome.worst_margin >= 0.0);
    }

    #[test]
    fn link_triangle_dominance_holds_at_every_outcome() {
        let model = link_triangle_model();
        for bits in 0..model.config_count() {
            let vw = model.variance_proxy_weighted(bits);
            let vu = model.variance_proxy_unweighted(bits);
            for i in 0..3 {
                for j in i..3 {
                    assert!(vu.get(i, j) >= 0.0, "V_U negative at {bits:#b} ({i}, {j})");
                    assert!(
                        vu.get(i, j) <= vw.get(i, j) + 1e-15,
                        "V_U exceeds V_W at {bits:#b} ({i}, {j})"
                    );
                }
            }
        }
        assert!(model.check_lemma_dominance().passed);
    }

    #[test]
    fn weighted_proxy_matches_resample_enumeration() {
        for seed in 0..6 {
            let model = EnumeratedModel::random(seed);
            for bits in 0..model.config_count() {
                let direct = model.variance_proxy_weighted(bits);
                let brute = brute_weighted_proxy(&model, bits);
                assert_entrywise_close(&direct, &brute, 1e-12);
            }
        }
    }

    #[test]
    fn unweighted_proxy_matches_dense_forcing() {
        for seed in 0..6 {
            let model = EnumeratedModel::random(seed);
            for bits in 0..model.config_count() {
                let direct = model.variance_proxy_unweighted(bits);
                let brute = brute_unweighted_proxy(&model, bits);
                assert_entrywise_close(&direct, &brute, 1e-12);
            }
        }
    }

    #[test]
    fn coordinate_difference_is_bounded_by_the_pattern() {
        for seed in 0..6 {
            let model = EnumeratedModel::random(seed);
            for bits in 0..model.config_count() {
                for k in 0..model.placement_count() {
                    let c = model.coordinate_difference(bits, k);
                    let dense =
                        model.unweighted(bits | 1 << k).sub(&model.unweighted(bits & !(1 << k)));
                    assert_entrywise_close(&c, &dense, 0.0);
                    let pattern = model.placement_matrix(k);
                    for i in 0..model.n() {
                        for j in i..model.n() {
                            assert!(c.get(i, j) >= 0.0);
                            assert!(c.get(i, j) <= pattern.get(i, j));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn expected_weighted_proxy_has_linear_closed_form() {
        // E[x(1-2p) + p] = 2p(1-p), so the expected proxy is the sum of
        // p(1-p) times each squared pattern.
        for seed in [7, 8, 9] {
            let model = EnumeratedModel::random(seed);
            let mut enumerated = SymMatrix::zeros(model.n());
            for bits in 0..model.config_count() {
                let rv = model.realization(bits);
                enumerated = enumerated.add(&model.variance_proxy_weighted(bits).scaled(rv.probability));
            }
            let mut closed = SymMatrix::zeros(model.n());
            for k in 0..model.placement_count() {
                let p = model.placement_probability(k);
                closed = closed.add(&matrix_square(model.placement_matrix(k)).scaled(p * (1.0 - p)));
            }
            assert_entrywise_close(&enumerated, &closed, 1e-12);
        }
    }

    #[test]
    fn probabilities_sum_to_one() {
        for seed in 0..10 {
            let model = EnumeratedModel::random(seed);
            let total: f64 = (0..model.config_count()).map(|bits| model.realization(bits).probability).sum();
            assert!((total - 1.0).abs() < 1e-12, "seed {seed}: total {total}");
        }
    }

    #[test]
    fn realization_probability_is_the_bernoulli_product() {
        let model = EnumeratedModel::new(
            3,
            vec![(link_pattern(3, 0, 1), 0.3), (link_pattern(3, 1, 2), 0.8)],
        )
        .unwrap();
        let rv = model.realization(0b01);
        assert!((rv.probability - 0.3 * 0.2).abs() < 1e-15);
        assert_eq!(rv.bits, 0b01);
        assert!((model.realization(0b10).probability - 0.7 * 0.8).abs() < 1e-15);
    }

    #[test]
    fn exact_expectation_matches_pairwise_module() {
        let uniform = SugmSpec::new(
            3,
            vec![
                ModelType {
                    template: SubgraphTemplate::new(
                        "link",
                        2,
                        vec![(0, 1)],
                        PlacementSemantics::Set,
                    )
                    .unwrap(),
                    rule: ProbabilityRule::Uniform { coefficient: 0.5, exponent: 0.0 },
                },
                ModelType {
                    template: SubgraphTemplate::clique("triangle", 3).unwrap(),
                    rule: ProbabilityRule::Uniform { coefficient: 0.5, exponent: 0.0 },
                },
            ],
        )
        .unwrap();
        let ordered_distance = SugmSpec::new(
            4,
            vec![ModelType {
                template: SubgraphTemplate::new(
                    "arrow",
                    2,
                    vec![(0, 1)],
                    PlacementSemantics::OrderedList,
                )
                .unwrap(),
                rule: ProbabilityRule::Distance { coefficient: 0.05, epsilon: 1e-4 },
            }],
        )
        .unwrap();
        let block = SugmSpec::new(
            5,
            vec![ModelType {
                template: SubgraphTemplate::new("link", 2, vec![(0, 1)], PlacementSemantics::Set)
                    .unwrap(),
                rule: ProbabilityRule::Block {
                    split: vec![0.6, 0.4],
                    within: 0.8,
                    across: 0.2,
                    exponent: 0.0,
                },
            }],
        )
        .unwrap();

        for spec in [&uniform, &ordered_distance, &block] {
            let model = EnumeratedModel::from_spec(spec).unwrap();
            let enumerated = model.exact_expectation();
            let pairwise = expected_adjacency(spec, &ExpectOptions::default()).unwrap();
            assert_entrywise_close(&enumerated.weighted, &pairwise.weighted, 1e-12);
            assert_entrywise_close(&enumerated.unweighted, &pairwise.unweighted, 1e-12);
        }

        // Pair (0, 1) of the n=3 instance is covered by its link and the
        // single triangle, both 1/2: unweighted expectation 3/4.
        let model = EnumeratedModel::from_spec(&uniform).unwrap();
        assert_eq!(model.placement_count(), 4);
        let exact = model.exact_expectation();
        assert!((exact.unweighted.get(0, 1) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn certain_placements_sum_exactly() {
        let model = EnumeratedModel::new(
            4,
            vec![(triangle_pattern(4, 0, 1, 2), 1.0), (link_pattern(4, 2, 3), 1.0)],
        )
        .unwrap();
        let exact = model.exact_expectation();
        assert_eq!(exact.weighted.get(0, 1), 1.0);
        assert_eq!(exact.weighted.get(2, 3), 1.0);
        assert_eq!(exact.weighted.get(0, 3), 0.0);
        assert_eq!(exact.unweighted.get(1, 2), 1.0);
    }

    #[test]
    fn deterministic_coordinates_have_zero_difference_matrices() {
        let model = EnumeratedModel::new(
            4,
            vec![(link_pattern(4, 0, 1), 1.0), (link_pattern(4, 2, 3), 0.0)],
        )
        .unwrap();
        // The surely-on coordinate realized, the surely-off one not: the
        // only outcome with positive probability has a zero proxy.
        let vw = model.variance_proxy_weighted(0b01);
        assert!(vw.is_zero());
        // The surviving branches both have coordinate weight zero, so every
        // difference matrix is the zero matrix: trivially PSD, margin 0.
        let spectrum = model.check_spectrum_bound().unwrap();
        assert!(spectrum.passed);
        assert_eq!(spectrum.worst_margin, 0.0);
    }

    #[test]
    fn from_spec_drops_inert_placements() {
        let edgeless = SugmSpec::new(
            3,
            vec![ModelType {
                template: SubgraphTemplate::new("pair", 2, vec![], PlacementSemantics::Set).unwrap(),
                rule: ProbabilityRule::Uniform { coefficient: 0.7, exponent: 0.0 },
            }],
        )
        .unwrap();
        let model = EnumeratedModel::from_spec(&edgeless).unwrap();
        assert_eq!(model.placement_count(), 0);
        assert!(model.exact_expectation().weighted.is_zero());

        let zero_probability = SugmSpec::new(
            4,
            vec![ModelType {
                template: SubgraphTemplate::new("link", 2, vec![(0, 1)], PlacementSemantics::Set)
                    .unwrap(),
                rule: ProbabilityRule::Uniform { coefficient: 0.0, exponent: 0.0 },
            }],
        )
        .unwrap();
        let model = EnumeratedModel::from_spec(&zero_probability).unwrap();
        assert_eq!(model.placement_count(), 0);
        assert!(model.check_lemma_dominance().passed);
    }

    #[test]
    fn capacity_violations_are_rejected() {
        let crowded = SugmSpec::new(
            6,
            vec![
                ModelType {
                    template: SubgraphTemplate::new(
                        "link",
                        2,
                        vec![(0, 1)],
                        PlacementSemantics::Set,
                    )
                    .unwrap(),
                    rule: ProbabilityRule::Uniform { coefficient: 0.5, exponent: 0.0 },
                },
                ModelType {
                    template: SubgraphTemplate::clique("triangle", 3).unwrap(),
                    rule: ProbabilityRule::Uniform { coefficient: 0.5, exponent: 0.0 },
                },
            ],
        )
        .unwrap();
        match EnumeratedModel::from_spec(&crowded) {
            Err(EnumerationError::TooManyPlacements { count }) => assert_eq!(count, 35),
            other => panic!("expected a placement capacity error, got {other:?}"),
        }

        let wide = SugmSpec::new(
            9,
            vec![ModelType {
                template: SubgraphTemplate::new("link", 2, vec![(0, 1)], PlacementSemantics::Set)
                    .unwrap(),
                rule: ProbabilityRule::Uniform { coefficient: 0.5, exponent: 0.0 },
            }],
        )
        .unwrap();
        assert!(matches!(
            EnumeratedModel::from_spec(&wide),
            Err(EnumerationError::NodeCount { n: 9 })
        ));

        let too_many_direct: Vec<(SymMatrix, f64)> =
            (0..21).map(|_| (link_pattern(3, 0, 1), 0.5)).collect();
        assert!(matches!(
            EnumeratedModel::new(3, too_many_direct),
            Err(EnumerationError::TooManyPlacements { count: 21 })
        ));
    }

    #[test]
    fn malformed_placements_are_rejected() {
        let mut diagonal = SymMatrix::zeros(3);
        diagonal.set_sym(1, 1, 1.0);
        assert!(matches!(
            EnumeratedModel::new(3, vec![(diagonal, 0.5)]),
            Err(EnumerationError::InvalidPlacement { index: 0, .. })
        ));

        let mut fractional = SymMatrix::zeros(3);
        fractional.set_sym(0, 1, 0.5);
        assert!(matches!(
            EnumeratedModel::new(3, vec![(fractional, 0.5)]),
            Err(EnumerationError::InvalidPlacement { index: 0, .. })
        ));

        assert!(matches!(
            EnumeratedModel::new(3, vec![(link_pattern(4, 0, 1), 0.5)]),
            Err(EnumerationError::InvalidPlacement { index: 0, .. })
        ));

        assert!(matches!(
            EnumeratedModel::new(3, vec![(link_pattern(3, 0, 1), 1.5)]),
            Err(EnumerationError::InvalidPlacement { index: 0, .. })
        ));
    }

    #[test]
    fn parameter_windows_are_enforced() {
        let model = link_triangle_model();
        // m_max = 3, so the MGF grid must stay below 1/9.
        assert!(matches!(
            model.check_mgf_bound(&[0.2]),
            Err(EnumerationError::ParameterRange { name: "psi", .. })
        ));
        assert!(matches!(
            model.check_mgf_bound(&[0.0]),
            Err(EnumerationError::ParameterRange { name: "psi", .. })
        ));
        assert!(matches!(
            model.check_efron_stein(0.1, 0.0),
            Err(EnumerationError::ParameterRange { name: "psi", .. })
        ));
        assert!(matches!(
            model.check_efron_stein(0.5, 0.2),
            Err(EnumerationError::ParameterRange { name: "theta", .. })
        ));
    }

    #[test]
    fn efron_stein_holds_on_the_link_triangle_instance() {
        let model = link_triangle_model();
        let outcome = model.check_efron_stein(0.2, 0.2).unwrap();
        assert!(outcome.passed, "margin {}", outcome.worst_margin);

        // theta = 0 makes both sides exactly zero.
        let zero = model.check_efron_stein(0.0, 0.1).unwrap();
        assert!(zero.passed);
        assert!(zero.worst_margin.abs() < 1e-12);
    }

    #[test]
    fn mgf_bound_holds_near_zero() {
        // As psi shrinks both sides scale linearly; the slope ordering is
        // visible at psi = 1e-4 already.
        let model = link_triangle_model();
        let outcomes = model.check_mgf_bound(&[1e-4]).unwrap();
        assert!(outcomes[0].passed);
        assert!(outcomes[0].worst_margin > 0.0);
    }

    #[test]
    fn check_all_labels_every_outcome() {
        let model = EnumeratedModel::random(42);
        let report = model.check_all().unwrap();
        assert_eq!(report.len(), 13);
        assert_eq!(report[0].0, "dominance");
        assert_eq!(report.last().unwrap().0, "spectrum");
        for (label, outcome) in &report {
            assert!(outcome.passed, "{label} failed with margin {}", outcome.worst_margin);
        }
    }

    proptest! {
        #[test]
        fn random_models_satisfy_dominance_and_spectrum(seed in any::<u64>()) {
            let model = EnumeratedModel::random(seed);
            let dominance = model.check_lemma_dominance();
            prop_assert!(dominance.passed, "dominance margin {}", dominance.worst_margin);
            let spectrum = model.check_spectrum_bound().unwrap();
            prop_assert!(spectrum.passed, "spectrum margin {}", spectrum.worst_margin);
        }
    }
}
