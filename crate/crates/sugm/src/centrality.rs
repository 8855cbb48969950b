//! Degree, eigenvector, and Katz centralities, the averaged L1 distance
//! between centrality vectors, and two behavioral models that exercise the
//! same linear kernels: repeated-averaging consensus and the linear
//! quadratic equilibrium on a row-normalized network.

use crate::linalg::{LinalgError, SymMatrix, DEFAULT_MAX_ITER, DEFAULT_TOL};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CentralityError {
    #[error("centrality kinds differ: {left} vs {right}")]
    KindMismatch { left: CentralityKind, right: CentralityKind },
    #[error("centrality lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("alpha = {alpha} outside (0, {limit}) set by lambda1 = {lambda1}")]
    AlphaOutOfRange { alpha: f64, lambda1: f64, limit: f64 },
    #[error("beta = {beta} outside [0, 1)")]
    BetaOutOfRange { beta: f64 },
    #[error("row {node} has zero total weight, row normalization is undefined")]
    ZeroRowSum { node: usize },
    #[error("graph is disconnected: node {node} is unreachable from node 0")]
    Disconnected { node: usize },
    #[error("opinion p0[{node}] = {value} outside [0, 1]")]
    OpinionOutOfRange { node: usize, value: f64 },
    #[error("base action b[{node}] = {value} must be nonnegative")]
    NegativeBase { node: usize, value: f64 },
    #[error("opinions did not reach consensus within {horizon} steps{}",
        if *bipartite_suspected { " (bipartite structure suspected)" } else { "" })]
    ConsensusNonConvergence { horizon: usize, bipartite_suspected: bool },
    #[error("fixed point residual {residual} exceeds {limit}")]
    ResidualTooLarge { residual: f64, limit: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CentralityKind {
    Degree,
    Eigenvector,
    Katz,
}

impl fmt::Display for CentralityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CentralityKind::Degree => "degree",
            CentralityKind::Eigenvector => "eigenvector",
            CentralityKind::Katz => "katz",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CentralityVector {
    pub kind: CentralityKind,
    pub values: Vec<f64>,
    /// Discount factor, present for Katz only.
    pub alpha: Option<f64>,
}

/// Eigenvector centrality plus the stability warning it inherits from the
/// eigensolver.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenvectorCentrality {
    pub centrality: CentralityVector,
    /// The top two eigenvalues are too close to pin down a dominant
    /// direction; disconnected graphs with tied components surface here.
    pub degenerate_gap: bool,
}

/// Consensus reached by repeated neighbor averaging.
#[derive(Debug, Clone, PartialEq)]
pub struct DegrootOutcome {
    pub consensus: f64,
    /// Left dominant eigenvector of the row-normalized matrix, entrywise
    /// nonnegative with unit L1 norm: the influence each starting opinion
    /// has on the consensus.
    pub weights: Vec<f64>,
    /// The row-normalized spectrum reaches -1, so plain averaging can
    /// oscillate instead of mixing.
    pub bipartite_suspected: bool,
    /// Simulation steps until every opinion was within tolerance of the
    /// consensus.
    pub iterations: usize,
}

/// Row sums: the weighted neighbor count of each node.
pub fn degree_centrality(a: &SymMatrix) -> CentralityVector {
    let values = (0..a.n()).map(|i| a.row(i).iter().sum()).collect();
    CentralityVector { kind: CentralityKind::Degree, values, alpha: None }
}

/// sqrt(n) times the unit dominant eigenvector, sign-fixed to nonnegative
/// sum. A degenerate top pair is reported, not treated as an error.
pub fn eigenvector_centrality(a: &SymMatrix) -> Result<EigenvectorCentrality, CentralityError> {
    let top = a.top_two_eigenpairs(DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    let n = a.n() as f64;
    let norm = top.vector1.iter().map(|v| v * v).sum::<f64>().sqrt();
    let scale = n.sqrt() / norm;
    let values = top.vector1.iter().map(|v| v * scale).collect();
    Ok(EigenvectorCentrality {
        centrality: CentralityVector { kind: CentralityKind::Eigenvector, values, alpha: None },
        degenerate_gap: top.degenerate_gap,
    })
}

/// Katz centrality (I - alpha A)^{-1} 1. The discount must lie strictly
/// inside (0, 1/lambda1); the window is checked before solving because the
/// dense solver would happily invert past it. lambda1 is only certified to
/// DEFAULT_TOL relative accuracy, so the window is shrunk by that much:
/// otherwise a discount sitting exactly on the true boundary can slip
/// through and reach a singular solve.
pub fn katz_centrality(a: &SymMatrix, alpha: f64) -> Result<CentralityVector, CentralityError> {
    let lambda1 = a.lambda_max(DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    let limit =
        if lambda1 > 0.0 { 1.0 / (lambda1 * (1.0 + DEFAULT_TOL)) } else { f64::INFINITY };
    if !(alpha > 0.0 && alpha < limit) {
        return Err(CentralityError::AlphaOutOfRange { alpha, lambda1, limit });
    }
    let values = a.solve_shifted(alpha, &vec![1.0; a.n()], DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    Ok(CentralityVector { kind: CentralityKind::Katz, values, alpha: Some(alpha) })
}

/// Average entrywise distance (1/n) * sum |c1_i - c2_i| between two
/// centrality vectors of the same kind.
pub fn avg_l1_error(c1: &CentralityVector, c2: &CentralityVector) -> Result<f64, CentralityError> {
    if c1.kind != c2.kind {
        return Err(CentralityError::KindMismatch { left: c1.kind, right: c2.kind });
    }
    if c1.values.len() != c2.values.len() {
        return Err(CentralityError::LengthMismatch {
            left: c1.values.len(),
            right: c2.values.len(),
        });
    }
    let n = c1.values.len() as f64;
    Ok(c1.values.iter().zip(&c2.values).map(|(x, y)| (x - y).abs()).sum::<f64>() / n)
}

fn row_sums(a: &SymMatrix) -> Result<Vec<f64>, CentralityError> {
    (0..a.n())
        .map(|i| {
            let d: f64 = a.row(i).iter().sum();
            if d > 0.0 {
                Ok(d)
            } else {
                Err(CentralityError::ZeroRowSum { node: i })
            }
        })
        .collect()
}

/// First node unreachable from node 0 along positive entries, if any.
fn first_unreachable(a: &SymMatrix) -> Option<usize> {
    let n = a.n();
    let mut seen = vec![false; n];
    let mut queue = vec![0usize];
    seen[0] = true;
    while let Some(i) = queue.pop() {
        for (j, &v) in a.row(i).iter().enumerate() {
            if v > 0.0 && !seen[j] {
                seen[j] = true;
                queue.push(j);
            }
        }
    }
    seen.iter().position(|&s| !s)
}

/// Symmetric normalization D^{-1/2} A D^{-1/2}; spectrally identical to the
/// row-stochastic D^{-1} A.
fn normalized_symmetric(a: &SymMatrix, degrees: &[f64]) -> SymMatrix {
    SymMatrix::from_fn(a.n(), |i, j| a.get(i, j) / (degrees[i] * degrees[j]).sqrt())
}

/// Repeated neighbor averaging from the starting opinions `p0`. The
/// influence weights come from an independent lazy-chain power iteration
/// rather than a degree formula, and the averaging itself is simulated and
/// required to land on the predicted consensus within `tol`.
pub fn degroot_consensus(
    a: &SymMatrix,
    p0: &[f64],
    horizon: usize,
    tol: f64,
) -> Result<DegrootOutcome, CentralityError> {
    let n = a.n();
    if p0.len() != n {
        return Err(CentralityError::LengthMismatch { left: n, right: p0.len() });
    }
    for (node, &value) in p0.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            return Err(CentralityError::OpinionOutOfRange { node, value });
        }
    }
    let degrees = row_sums(a)?;
    if let Some(node) = first_unreachable(a) {
        return Err(CentralityError::Disconnected { node });
    }

    // lambda_min of the normalized matrix at -1 means exact two-sided
    // structure; its norm then reaches 1 - lambda_min = 2.
    let normalized = normalized_symmetric(a, &degrees);
    let reflected = SymMatrix::from_fn(n, |i, j| {
        let eye = if i == j { 1.0 } else { 0.0 };
        eye - normalized.get(i, j)
    });
    let bipartite_suspected =
        reflected.spectral_norm(DEFAULT_TOL, DEFAULT_MAX_ITER)? >= 2.0 - 1e-6;

    // Left dominant eigenvector of D^{-1} A through the lazy chain
    // (P + I)/2, which shares its fixed points and always mixes. Transposed
    // action on a symmetric matrix: P^T w = A (w / d).
    let mut weights = vec![1.0 / n as f64; n];
    let mut converged = false;
    for _ in 0..DEFAULT_MAX_ITER {
        let scaled: Vec<f64> = weights.iter().zip(&degrees).map(|(w, d)| w / d).collect();
        let pulled = a.matvec(&scaled);
        let mut next: Vec<f64> = weights.iter().zip(&pulled).map(|(w, p)| 0.5 * (w + p)).collect();
        let total: f64 = next.iter().sum();
        for v in &mut next {
            *v /= total;
        }
        let moved: f64 = next.iter().zip(&weights).map(|(a, b)| (a - b).abs()).sum();
        weights = next;
        if moved <= 1e-14 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(CentralityError::Linalg(LinalgError::NonConvergence {
            iterations: DEFAULT_MAX_ITER,
            last_estimate: f64::NAN,
        }));
    }
    let consensus: f64 = weights.iter().zip(p0).map(|(w, p)| w * p).sum();

    let mut opinions = p0.to_vec();
    for step in 0..=horizon {
        let spread = opinions.iter().map(|p| (p - consensus).abs()).fold(0.0, f64::max);
        if spread <= tol {
            return Ok(DegrootOutcome { consensus, weights, bipartite_suspected, iterations: step });
        }
        let averaged = a.matvec(&opinions);
        for (p, (avg, d)) in opinions.iter_mut().zip(averaged.iter().zip(&degrees)) {
            *p = avg / d;
        }
    }
    Err(CentralityError::ConsensusNonConvergence { horizon, bipartite_suspected })
}

/// Equilibrium actions a = (I - beta D^{-1} A)^{-1} b of the linear
/// quadratic game on the row-normalized network. Solved through the
/// symmetric similarity D^{1/2} (I - beta S)^{-1} D^{-1/2} and verified
/// against the best-response fixed point.
pub fn lq_equilibrium(a: &SymMatrix, beta: f64, b: &[f64]) -> Result<Vec<f64>, CentralityError> {
    let n = a.n();
    if b.len() != n {
        return Err(CentralityError::LengthMismatch { left: n, right: b.len() });
    }
    for (node, &value) in b.iter().enumerate() {
        if !(value >= 0.0) {
            return Err(CentralityError::NegativeBase { node, value });
        }
    }
    if !(0.0..1.0).contains(&beta) {
        return Err(CentralityError::BetaOutOfRange { beta });
    }
    let degrees = row_sums(a)?;
    let normalized = normalized_symmetric(a, &degrees);
    let rhs: Vec<f64> = b.iter().zip(&degrees).map(|(v, d)| v * d.sqrt()).collect();
    let solved = normalized.solve_shifted(beta, &rhs, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    let actions: Vec<f64> = solved.iter().zip(&degrees).map(|(v, d)| v / d.sqrt()).collect();

    // Best response check: a = b + beta P a must hold to working accuracy.
    let pulled = a.matvec(&actions);
    let mut residual = 0.0;
    let mut scale = 0.0;
    for i in 0..n {
        let r = actions[i] - b[i] - beta * pulled[i] / degrees[i];
        residual += r * r;
        scale += actions[i] * actions[i];
    }
    let residual = residual.sqrt();
    let limit = 1e-8 * scale.sqrt().max(1.0);
    if residual > limit {
        return Err(CentralityError::ResidualTooLarge { residual, limit });
    }
    Ok(actions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn complete_graph(n: usize) -> SymMatrix {
        SymMatrix::from_fn(n, |i, j| if i == j { 0.0 } else { 1.0 })
    }

    /// Connected random graph: a path for connectivity plus random extra
    /// edges.
    fn random_connected(n: usize, seed: u64) -> SymMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = SymMatrix::zeros(n);
        for i in 1..n {
            a.set_sym(i - 1, i, 1.0);
        }
        for i in 0..n {
            for j in (i + 2)..n {
                if rng.random::<f64>() < 0.4 {
                    a.set_sym(i, j, 1.0);
                }
            }
        }
        a
    }

    #[test]
    fn degree_is_the_row_sum() {
        let mut half = SymMatrix::zeros(2);
        half.set_sym(0, 1, 0.5);
        assert_eq!(degree_centrality(&half).values, vec![0.5, 0.5]);

        assert_eq!(degree_centrality(&SymMatrix::zeros(3)).values, vec![0.0; 3]);

        let k4 = complete_graph(4);
        assert_eq!(degree_centrality(&k4).values, vec![3.0; 4]);
        assert_eq!(degree_centrality(&k4).kind, CentralityKind::Degree);
    }

    #[test]
    fn eigenvector_centrality_of_complete_graphs_is_flat() {
        for n in [3, 4] {
            let out = eigenvector_centrality(&complete_graph(n)).unwrap();
            assert!(!out.degenerate_gap);
            for v in &out.centrality.values {
                assert!((v - 1.0).abs() < 1e-8, "n = {n}: {v}");
            }
        }
    }

    #[test]
    fn eigenvector_centrality_matches_jacobi_oracle() {
        let a = random_connected(8, 11);
        let out = eigenvector_centrality(&a).unwrap();
        let eig = a.jacobi_eigendecomposition().unwrap();
        let dominant = &eig.vectors[0];
        let sign = if dominant.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
        let scale = (a.n() as f64).sqrt() * sign;
        for (got, want) in out.centrality.values.iter().zip(dominant) {
            assert!((got - want * scale).abs() < 1e-6, "{got} vs {}", want * scale);
        }
    }

    #[test]
    fn eigenvector_centrality_flags_tied_components() {
        let mut a = SymMatrix::zeros(4);
        a.set_sym(0, 1, 1.0);
        a.set_sym(2, 3, 1.0);
        let out = eigenvector_centrality(&a).unwrap();
        assert!(out.degenerate_gap);
    }

    #[test]
    fn katz_of_zero_matrix_is_all_ones() {
        let katz = katz_centrality(&SymMatrix::zeros(3), 0.7).unwrap();
        for v in &katz.values {
            assert!((v - 1.0).abs() < 1e-12);
        }
        assert_eq!(katz.alpha, Some(0.7));
    }

    #[test]
    fn katz_on_k3_quarter_discount_is_two() {
        // By symmetry a = 1 + 0.25 * 2a, so a = 2.
        let katz = katz_centrality(&complete_graph(3), 0.25).unwrap();
        for v in &katz.values {
            assert!((v - 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn katz_matches_truncated_neumann_series() {
        let a = random_connected(7, 3);
        let lambda1 = a.top_two_eigenpairs(1e-12, 100_000).unwrap().lambda1;
        let alpha = 0.4 / lambda1;
        let katz = katz_centrality(&a, alpha).unwrap();

        // Terms shrink like 0.4^k; 60 terms push the tail below 1e-20.
        let mut series = vec![1.0; a.n()];
        let mut term = vec![1.0; a.n()];
        for _ in 0..60 {
            term = a.matvec(&term).iter().map(|v| v * alpha).collect();
            for (s, t) in series.iter_mut().zip(&term) {
                *s += t;
            }
        }
        for (got, want) in katz.values.iter().zip(&series) {
            assert!((got - want).abs() < 1e-8, "{got} vs {want}");
        }
    }

    #[test]
    fn katz_rejects_discounts_outside_the_window() {
        let k3 = complete_graph(3);
        // lambda1 = 2, so the window is (0, 0.5).
        match katz_centrality(&k3, 0.5) {
            Err(CentralityError::AlphaOutOfRange { lambda1, .. }) => {
                assert!((lambda1 - 2.0).abs() < 1e-8)
            }
            other => panic!("expected a window error, got {other:?}"),
        }
        assert!(matches!(
            katz_centrality(&k3, 0.0),
            Err(CentralityError::AlphaOutOfRange { .. })
        ));
        assert!(matches!(
            katz_centrality(&k3, -0.1),
            Err(CentralityError::AlphaOutOfRange { .. })
        ));
    }

    #[test]
    fn avg_l1_error_examples_and_mismatches() {
        let c = |values: Vec<f64>| CentralityVector {
            kind: CentralityKind::Degree,
            values,
            alpha: None,
        };
        assert_eq!(avg_l1_error(&c(vec![1.0, 2.0]), &c(vec![1.0, 2.0])).unwrap(), 0.0);
        assert_eq!(avg_l1_error(&c(vec![1.0, 1.0]), &c(vec![0.0, 2.0])).unwrap(), 1.0);

        let katz = CentralityVector {
            kind: CentralityKind::Katz,
            values: vec![1.0, 1.0],
            alpha: Some(0.1),
        };
        assert!(matches!(
            avg_l1_error(&c(vec![1.0, 1.0]), &katz),
            Err(CentralityError::KindMismatch { .. })
        ));
        assert!(matches!(
            avg_l1_error(&c(vec![1.0]), &c(vec![1.0, 1.0])),
            Err(CentralityError::LengthMismatch { left: 1, right: 2 })
        ));
    }

    #[test]
    fn avg_l1_error_satisfies_the_triangle_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let v = |rng: &mut ChaCha8Rng| CentralityVector {
                kind: CentralityKind::Degree,
                values: (0..6).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect(),
                alpha: None,
            };
            let (a, b, c) = (v(&mut rng), v(&mut rng), v(&mut rng));
            let ab = avg_l1_error(&a, &b).unwrap();
            let bc = avg_l1_error(&b, &c).unwrap();
            let ac = avg_l1_error(&a, &c).unwrap();
            assert!(ac <= ab + bc + 1e-12);
        }
    }

    #[test]
    fn degroot_on_k3_averages_the_opinions() {
        let p0 = [0.1, 0.5, 0.9];
        let out = degroot_consensus(&complete_graph(3), &p0, 10_000, 1e-10).unwrap();
        assert!((out.consensus - 0.5).abs() < 1e-9);
        for w in &out.weights {
            assert!((w - 1.0 / 3.0).abs() < 1e-9);
        }
        assert!(!out.bipartite_suspected);
    }

    #[test]
    fn degroot_preserves_constant_opinions() {
        let a = random_connected(6, 9);
        let out = degroot_consensus(&a, &[0.3; 6], 100, 1e-12).unwrap();
        assert_eq!(out.iterations, 0);
        assert!((out.consensus - 0.3).abs() < 1e-12);
    }

    #[test]
    fn degroot_limit_matches_the_weight_prediction() {
        for seed in [1, 2, 3] {
            let a = random_connected(9, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
            let p0: Vec<f64> = (0..9).map(|_| rng.random::<f64>()).collect();
            let out = degroot_consensus(&a, &p0, 200_000, 1e-9).unwrap();

            // Independent long simulation as the limit oracle.
            let degrees: Vec<f64> = (0..9).map(|i| a.row(i).iter().sum()).collect();
            let mut p = p0.clone();
            for _ in 0..4000 {
                let avg = a.matvec(&p);
                p = avg.iter().zip(&degrees).map(|(v, d)| v / d).collect();
            }
            assert!((p[0] - out.consensus).abs() < 1e-6, "seed {seed}");

            // The iterated weights must land on the stationary distribution
            // of the row-normalized chain, which is degree-proportional.
            let total: f64 = degrees.iter().sum();
            for (w, d) in out.weights.iter().zip(&degrees) {
                assert!((w - d / total).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn degroot_rejects_bad_inputs() {
        assert!(matches!(
            degroot_consensus(&SymMatrix::zeros(3), &[0.5; 3], 10, 1e-6),
            Err(CentralityError::ZeroRowSum { node: 0 })
        ));

        let mut split = SymMatrix::zeros(4);
        split.set_sym(0, 1, 1.0);
        split.set_sym(2, 3, 1.0);
        assert!(matches!(
            degroot_consensus(&split, &[0.5; 4], 10, 1e-6),
            Err(CentralityError::Disconnected { node: 2 })
        ));

        let k3 = complete_graph(3);
        assert!(matches!(
            degroot_consensus(&k3, &[0.5, 1.5, 0.5], 10, 1e-6),
            Err(CentralityError::OpinionOutOfRange { node: 1, .. })
        ));
        assert!(matches!(
            degroot_consensus(&k3, &[0.5, 0.5], 10, 1e-6),
            Err(CentralityError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn degroot_flags_two_sided_oscillation() {
        // A single edge is bipartite: opposite opinions swap forever.
        let mut edge = SymMatrix::zeros(2);
        edge.set_sym(0, 1, 1.0);
        match degroot_consensus(&edge, &[0.0, 1.0], 500, 1e-6) {
            Err(CentralityError::ConsensusNonConvergence { bipartite_suspected, .. }) => {
                assert!(bipartite_suspected)
            }
            other => panic!("expected oscillation, got {other:?}"),
        }

        // Equal opinions still agree instantly on the same graph.
        let out = degroot_consensus(&edge, &[0.4, 0.4], 10, 1e-12).unwrap();
        assert!(out.bipartite_suspected);
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn lq_equilibrium_closed_cases() {
        let k3 = complete_graph(3);
        let b = [1.0, 2.0, 3.0];
        let actions = lq_equilibrium(&k3, 0.0, &b).unwrap();
        for (a, want) in actions.iter().zip(&b) {
            assert!((a - want).abs() < 1e-12);
        }

        // By symmetry a = 1 + 0.5 a.
        let flat = lq_equilibrium(&k3, 0.5, &[1.0; 3]).unwrap();
        for a in &flat {
            assert!((a - 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn lq_equilibrium_is_a_best_response_fixed_point() {
        for seed in [4, 5, 6] {
            let a = random_connected(10, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let b: Vec<f64> = (0..10).map(|_| rng.random::<f64>() * 2.0).collect();
            let beta = 0.3 + 0.5 * rng.random::<f64>();
            let actions = lq_equilibrium(&a, beta, &b).unwrap();

            let degrees: Vec<f64> = (0..10).map(|i| a.row(i).iter().sum()).collect();
            let pulled = a.matvec(&actions);
            for i in 0..10 {
                let response = b[i] + beta * pulled[i] / degrees[i];
                assert!((actions[i] - response).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn lq_equilibrium_with_unit_base_is_katz_on_the_normalized_matrix() {
        let a = random_connected(8, 12);
        let beta = 0.6;
        let actions = lq_equilibrium(&a, beta, &[1.0; 8]).unwrap();

        // Neumann series of the row-stochastic matrix at discount beta.
        let degrees: Vec<f64> = (0..8).map(|i| a.row(i).iter().sum()).collect();
        let mut series = vec![1.0; 8];
        let mut term = vec![1.0; 8];
        for _ in 0..120 {
            let pulled = a.matvec(&term);
            term = pulled.iter().zip(&degrees).map(|(v, d)| beta * v / d).collect();
            for (s, t) in series.iter_mut().zip(&term) {
                *s += t;
            }
        }
        for (got, want) in actions.iter().zip(&series) {
            assert!((got - want).abs() < 1e-8, "{got} vs {want}");
        }
    }

    #[test]
    fn lq_equilibrium_rejects_bad_inputs() {
        let k3 = complete_graph(3);
        assert!(matches!(
            lq_equilibrium(&k3, 1.0, &[1.0; 3]),
            Err(CentralityError::BetaOutOfRange { .. })
        ));
        assert!(matches!(
            lq_equilibrium(&k3, -0.2, &[1.0; 3]),
            Err(CentralityError::BetaOutOfRange { .. })
        ));
        assert!(matches!(
            lq_equilibrium(&SymMatrix::zeros(3), 0.5, &[1.0; 3]),
            Err(CentralityError::ZeroRowSum { node: 0 })
        ));
        assert!(matches!(
            lq_equilibrium(&k3, 0.5, &[1.0, -1.0, 1.0]),
            Err(CentralityError::NegativeBase { node: 1, .. })
        ));
    }

    proptest! {
        #[test]
        fn eigenvector_centrality_norm_is_sqrt_n(seed in 0u64..500) {
            let a = random_connected(6, seed);
            let out = eigenvector_centrality(&a).unwrap();
            let norm = out.centrality.values.iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assert!((norm - 6f64.sqrt()).abs() < 1e-9);
        }

        #[test]
        fn katz_values_are_at_least_one_and_monotone(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let base = SymMatrix::from_fn(5, |i, j| {
                if i == j { 0.0 } else { rng.random::<f64>() * 0.1 }
            });
            // Row sums stay below 0.7, so alpha = 0.5 is always valid.
            let before = katz_centrality(&base, 0.5).unwrap();
            for v in &before.values {
                prop_assert!(*v >= 1.0);
            }

            let i = rng.random_range(0..5usize);
            let j = (i + 1 + rng.random_range(0..4usize)) % 5;
            let mut bumped = base.clone();
            bumped.add_sym(i, j, rng.random::<f64>() * 0.2);
            let after = katz_centrality(&bumped, 0.5).unwrap();
            for (a, b) in after.values.iter().zip(&before.values) {
                prop_assert!(a + 1e-10 >= *b, "{a} fell below {b}");
            }
        }
    }
}
