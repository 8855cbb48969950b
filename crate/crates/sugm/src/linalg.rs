//! Dense symmetric-matrix kernels: power-iteration spectral estimates, a
//! cyclic Jacobi eigendecomposition for small matrices, shifted linear
//! solves, and a normalized trace exponential.
//!
//! The iterative kernels start from a fixed internally seeded vector, so
//! every result is reproducible for a given matrix and tolerance. Power
//! iteration runs on the squared matrix for the norm (handles eigenvalues
//! tied in magnitude with opposite signs) and on a spectrum shifted by the
//! norm for the algebraically largest pair; convergence is certified by the
//! residual of the Rayleigh quotient, which for symmetric matrices bounds
//! the distance to a true eigenvalue.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::par;

/// Default relative tolerance for the iterative kernels.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Default iteration cap for the iterative kernels.
pub const DEFAULT_MAX_ITER: usize = 100_000;
/// Largest dimension accepted by [`SymMatrix::jacobi_eigendecomposition`].
pub const JACOBI_MAX_DIM: usize = 64;
/// Systems at or above this dimension are solved by conjugate gradient;
/// smaller ones by a dense LU factorization.
pub const DENSE_SOLVE_MAX: usize = 200;

const START_VECTOR_SEED: u64 = 0x51EC_7AA7_0001;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("iteration did not converge after {iterations} steps (last estimate {last_estimate})")]
    NonConvergence { iterations: usize, last_estimate: f64 },
    #[error("dimension {n} exceeds the cap {cap} for this kernel")]
    DimensionCap { n: usize, cap: usize },
    #[error("dimension mismatch: matrix is {n}x{n}, argument has length {got}")]
    DimensionMismatch { n: usize, got: usize },
    #[error("input matrix is not symmetric at ({i}, {j})")]
    Asymmetric { i: usize, j: usize },
    #[error("input is not a square matrix")]
    NotSquare,
    #[error("shift alpha = {alpha} is outside the invertibility window: alpha * lambda_max = {product} with |lambda|_max = {lambda_max}")]
    ShiftOutOfRange { alpha: f64, lambda_max: f64, product: f64 },
    #[error("linear system is singular or numerically unstable (pivot {pivot})")]
    SingularSystem { pivot: f64 },
    #[error("conjugate gradient breakdown: system is not positive definite")]
    CgBreakdown,
    #[error("solution residual {residual} exceeds tolerance {tol}")]
    ResidualTooLarge { residual: f64, tol: f64 },
    #[error("matrix must be non-empty")]
    Empty,
}

/// Dense symmetric matrix with row-major storage. Symmetry is maintained by
/// construction: entries are only written in mirrored pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

/// Algebraically largest two eigenvalues and the unit eigenvector of the
/// first, with its sign fixed so the entry sum is nonnegative.
#[derive(Debug, Clone)]
pub struct TopEigenpairs {
    pub lambda1: f64,
    pub lambda2: f64,
    pub vector1: Vec<f64>,
    /// Set when |lambda1 - lambda2| <= tol * |lambda1|: the dominant
    /// eigenvector is then ambiguous (ties arise from symmetry or from
    /// disconnected components of equal weight).
    pub degenerate_gap: bool,
}

/// Full eigendecomposition: eigenvalues in descending order with
/// `vectors[k]` the unit eigenvector of `values[k]`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix { n, data: vec![0.0; n * n] }
    }

    /// Fallible allocation for caller-controlled sizes; reports dimension
    /// overflow or out-of-memory instead of aborting.
    pub fn zeros_checked(n: usize) -> Option<Self> {
        let len = n.checked_mul(n)?;
        let mut data = Vec::new();
        data.try_reserve_exact(len).ok()?;
        data.resize(len, 0.0);
        Some(SymMatrix { n, data })
    }

    /// Builds from `f` evaluated once per unordered pair (i <= j) and
    /// mirrored, so the result is symmetric regardless of `f`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                m.data[i * n + j] = v;
                m.data[j * n + i] = v;
            }
        }
        m
    }

    /// Validates squareness and exact symmetry of explicit rows.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, LinalgError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in &rows {
            if row.len() != n {
                return Err(LinalgError::NotSquare);
            }
            data.extend_from_slice(row);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if data[i * n + j] != data[j * n + i] {
                    return Err(LinalgError::Asymmetric { i, j });
                }
            }
        }
        Ok(SymMatrix { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    #[inline]
    pub fn add_sym(&mut self, i: usize, j: usize, dv: f64) {
        self.data[i * self.n + j] += dv;
        if i != j {
            self.data[j * self.n + i] += dv;
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// y = A x. Rows are computed independently (in parallel when enabled),
    /// each by a sequential dot product, so the result is deterministic.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "matvec dimension mismatch");
        let mut y = vec![0.0; self.n];
        let n = self.n;
        let data = &self.data;
        par::for_each_indexed_mut(&mut y, |i, yi| {
            let row = &data[i * n..(i + 1) * n];
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(x) {
                acc += a * b;
            }
            *yi = acc;
        });
        y
    }

    /// Maximum absolute row sum (the infinity norm).
    pub fn max_abs_row_sum(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> SymMatrix {
        SymMatrix { n: self.n, data: self.data.iter().map(|v| v * s).collect() }
    }

    /// Entrywise map; `f` must be applied identically to mirrored entries,
    /// which holds for any pointwise function.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        SymMatrix { n: self.n, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    /// self - other.
    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.n, other.n, "sub dimension mismatch");
        SymMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.n, other.n, "add dimension mismatch");
        SymMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Spectral norm (largest |eigenvalue|), the square root of the top
    /// eigenvalue of A², found by Lanczos iteration with full
    /// reorthogonalization. Deterministic for a fixed matrix; returns once
    /// the Ritz residual certifies a relative eigenvalue error below `tol`,
    /// with `max_iter` capping matrix applications. Lanczos rather than
    /// plain power iteration because deviation matrices of sampled graphs
    /// have nearly degenerate extreme eigenvalues, where power iteration
    /// stalls for thousands of steps.
    pub fn spectral_norm(&self, tol: f64, max_iter: usize) -> Result<f64, LinalgError> {
        if self.n == 0 {
            return Err(LinalgError::Empty);
        }
        if self.is_zero() {
            return Ok(0.0);
        }
        let apply = |x: &[f64]| self.matvec(&self.matvec(x));
        match lanczos_top(self.n, &apply, tol, max_iter, 0x0A2F) {
            Ok((theta, _)) => Ok(theta.max(0.0).sqrt()),
            // Lanczos estimates live on the squared scale; report the norm.
            Err(LinalgError::NonConvergence { iterations, last_estimate }) => {
                Err(LinalgError::NonConvergence {
                    iterations,
                    last_estimate: last_estimate.max(0.0).sqrt(),
                })
            }
            Err(other) => Err(other),
        }
    }

    /// Algebraically largest two eigenvalues and the dominant eigenvector.
    ///
    /// Shifts the spectrum by the spectral norm (making it nonnegative), runs
    /// power iteration for the top pair, deflates, and repeats for the
    /// second value. The gap |lambda1 - lambda2| <= tol * |lambda1| sets
    /// `degenerate_gap` instead of failing.
    pub fn top_two_eigenpairs(&self, tol: f64, max_iter: usize) -> Result<TopEigenpairs, LinalgError> {
        if self.n == 0 {
            return Err(LinalgError::Empty);
        }
        let norm = self.spectral_norm(tol, max_iter)?;
        if norm == 0.0 {
            let mut v1 = vec![0.0; self.n];
            v1[0] = 1.0;
            return Ok(TopEigenpairs { lambda1: 0.0, lambda2: 0.0, vector1: v1, degenerate_gap: true });
        }
        let shift = norm;
        let apply = |x: &[f64]| -> Vec<f64> {
            let mut y = self.matvec(x);
            for (yi, xi) in y.iter_mut().zip(x) {
                *yi += shift * xi;
            }
            y
        };
        let (nu1, v1) = lanczos_top(self.n, &apply, tol, max_iter, 0x0DD5)?;
        let deflated = |x: &[f64]| -> Vec<f64> {
            let mut y = apply(x);
            let c = nu1 * dot(&v1, x);
            for (yi, vi) in y.iter_mut().zip(&v1) {
                *yi -= c * vi;
            }
            y
        };
        // Fresh start vector: reusing the first stage's start would leave
        // it orthogonal to the rest of a tied top eigenspace after
        // deflation, collapsing the estimate into the kernel.
        let (nu2, _) = lanczos_top(self.n, &deflated, tol, max_iter, 0x5EC0)?;
        let lambda1 = nu1 - shift;
        let lambda2 = nu2 - shift;
        let mut vector1 = v1;
        if vector1.iter().sum::<f64>() < 0.0 {
            for v in &mut vector1 {
                *v = -*v;
            }
        }
        let degenerate_gap = (lambda1 - lambda2).abs() <= tol * lambda1.abs();
        Ok(TopEigenpairs { lambda1, lambda2, vector1, degenerate_gap })
    }

    /// Algebraically largest eigenvalue, certified like
    /// [`SymMatrix::top_two_eigenpairs`] but without the second stage;
    /// callers that only need the invertibility window skip the slow
    /// deflated solve.
    pub fn lambda_max(&self, tol: f64, max_iter: usize) -> Result<f64, LinalgError> {
        if self.n == 0 {
            return Err(LinalgError::Empty);
        }
        let norm = self.spectral_norm(tol, max_iter)?;
        if norm == 0.0 {
            return Ok(0.0);
        }
        let shift = norm;
        let apply = |x: &[f64]| -> Vec<f64> {
            let mut y = self.matvec(x);
            for (yi, xi) in y.iter_mut().zip(x) {
                *yi += shift * xi;
            }
            y
        };
        let (nu1, _) = lanczos_top(self.n, &apply, tol, max_iter, 0x0DD5)?;
        Ok(nu1 - shift)
    }

    /// Solves (I - alpha A) x = rhs.
    ///
    /// Dense LU with partial pivoting below [`DENSE_SOLVE_MAX`]; conjugate
    /// gradient above (valid because |alpha| * ||A|| < 1 makes the system
    /// symmetric positive definite, which is checked first). Both paths
    /// verify the final residual against `tol * ||rhs||`.
    pub fn solve_shifted(
        &self,
        alpha: f64,
        rhs: &[f64],
        tol: f64,
        max_iter: usize,
    ) -> Result<Vec<f64>, LinalgError> {
        if rhs.len() != self.n {
            return Err(LinalgError::DimensionMismatch { n: self.n, got: rhs.len() });
        }
        if self.n == 0 {
            return Err(LinalgError::Empty);
        }
        let rhs_norm = dot(rhs, rhs).sqrt();
        if rhs_norm == 0.0 {
            return Ok(vec![0.0; self.n]);
        }
        let x = if self.n < DENSE_SOLVE_MAX {
            self.lu_solve_shifted(alpha, rhs)?
        } else {
            let lambda_max = self.spectral_norm(1e-8, max_iter)?;
            let product = alpha.abs() * lambda_max;
            if product >= 1.0 {
                return Err(LinalgError::ShiftOutOfRange { alpha, lambda_max, product });
            }
            self.cg_solve_shifted(alpha, rhs, tol, max_iter)?
        };
        let residual = self.shifted_residual(alpha, &x, rhs);
        if residual > tol * rhs_norm {
            return Err(LinalgError::ResidualTooLarge { residual, tol: tol * rhs_norm });
        }
        Ok(x)
    }

    fn shifted_residual(&self, alpha: f64, x: &[f64], rhs: &[f64]) -> f64 {
        let ax = self.matvec(x);
        let mut r2 = 0.0;
        for i in 0..self.n {
            let d = rhs[i] - (x[i] - alpha * ax[i]);
            r2 += d * d;
        }
        r2.sqrt()
    }

    fn lu_solve_shifted(&self, alpha: f64, rhs: &[f64]) -> Result<Vec<f64>, LinalgError> {
        let n = self.n;
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                m[i * n + j] = if i == j { 1.0 } else { 0.0 } - alpha * self.get(i, j);
            }
        }
        let mut x = rhs.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let (pivot_row, pivot_abs) = (col..n)
                .map(|r| (r, m[perm[r] * n + col].abs()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .expect("non-empty column");
            if pivot_abs <= f64::MIN_POSITIVE {
                return Err(LinalgError::SingularSystem { pivot: pivot_abs });
            }
            perm.swap(col, pivot_row);
            let p = perm[col];
            let pv = m[p * n + col];
            for r in (col + 1)..n {
                let q = perm[r];
                let factor = m[q * n + col] / pv;
                if factor == 0.0 {
                    continue;
                }
                m[q * n + col] = 0.0;
                for c in (col + 1)..n {
                    m[q * n + c] -= factor * m[p * n + c];
                }
                x[q] -= factor * x[p];
            }
        }
        let mut out = vec![0.0; n];
        for col in (0..n).rev() {
            let p = perm[col];
            let mut acc = x[p];
            for c in (col + 1)..n {
                acc -= m[p * n + c] * out[c];
            }
            out[col] = acc / m[p * n + col];
        }
        Ok(out)
    }

    fn cg_solve_shifted(
        &self,
        alpha: f64,
        rhs: &[f64],
        tol: f64,
        max_iter: usize,
    ) -> Result<Vec<f64>, LinalgError> {
        let n = self.n;
        let apply = |x: &[f64]| -> Vec<f64> {
            let ax = self.matvec(x);
            (0..n).map(|i| x[i] - alpha * ax[i]).collect()
        };
        let rhs_norm = dot(rhs, rhs).sqrt();
        let target = tol * rhs_norm * 0.1; // headroom for the final check
        let mut x = vec![0.0; n];
        let mut r = rhs.to_vec();
        let mut p = r.clone();
        let mut rr = dot(&r, &r);
        for _ in 0..max_iter {
            if rr.sqrt() <= target {
                return Ok(x);
            }
            let ap = apply(&p);
            let pap = dot(&p, &ap);
            if pap <= 0.0 {
                return Err(LinalgError::CgBreakdown);
            }
            let step = rr / pap;
            for i in 0..n {
                x[i] += step * p[i];
                r[i] -= step * ap[i];
            }
            let rr_next = dot(&r, &r);
            let beta = rr_next / rr;
            for i in 0..n {
                p[i] = r[i] + beta * p[i];
            }
            rr = rr_next;
        }
        if rr.sqrt() <= tol * rhs_norm {
            return Ok(x);
        }
        Err(LinalgError::NonConvergence { iterations: max_iter, last_estimate: rr.sqrt() })
    }

    /// Full eigendecomposition by cyclic Jacobi rotations; capped at
    /// [`JACOBI_MAX_DIM`] because the cost grows cubically per sweep. This
    /// is the oracle-grade kernel the iterative estimates are tested
    /// against, and the backend of [`SymMatrix::trace_exp_normalized`].
    pub fn jacobi_eigendecomposition(&self) -> Result<EigenDecomposition, LinalgError> {
        let n = self.n;
        if n == 0 {
            return Err(LinalgError::Empty);
        }
        if n > JACOBI_MAX_DIM {
            return Err(LinalgError::DimensionCap { n, cap: JACOBI_MAX_DIM });
        }
        let mut a = self.data.clone();
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            v[i * n + i] = 1.0;
        }
        let fro = self.frobenius_norm();
        if fro == 0.0 {
            let values = vec![0.0; n];
            let vectors = (0..n)
                .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect();
            return Ok(EigenDecomposition { values, vectors });
        }
        let stop = 1e-15 * fro;
        let max_sweeps = 64;
        let mut converged = false;
        for _ in 0..max_sweeps {
            let mut off = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    off += (a[i * n + j]).powi(2);
                }
            }
            if (2.0 * off).sqrt() <= stop {
                converged = true;
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[p * n + q];
                    if apq.abs() <= stop / (n as f64) * 1e-2 {
                        continue;
                    }
                    let app = a[p * n + p];
                    let aqq = a[q * n + q];
                    let tau = (aqq - app) / (2.0 * apq);
                    let t = if tau >= 0.0 {
                        1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = c * apk - s * aqk;
                        a[q * n + k] = s * apk + c * aqk;
                    }
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = c * vkp - s * vkq;
                        v[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
        if !converged {
            // One final check: quadratic convergence makes this unreachable
            // in practice, but the cap keeps the kernel total.
            let mut off = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    off += (a[i * n + j]).powi(2);
                }
            }
            if (2.0 * off).sqrt() > stop {
                return Err(LinalgError::NonConvergence {
                    iterations: max_sweeps,
                    last_estimate: (2.0 * off).sqrt(),
                });
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));
        let values: Vec<f64> = order.iter().map(|&i| a[i * n + i]).collect();
        let vectors: Vec<Vec<f64>> = order
            .iter()
            .map(|&col| (0..n).map(|row| v[row * n + col]).collect())
            .collect();
        Ok(EigenDecomposition { values, vectors })
    }

    /// Normalized trace exponential (1/n) * tr exp(psi * A), computed from
    /// the full eigendecomposition. Same dimension cap as Jacobi.
    pub fn trace_exp_normalized(&self, psi: f64) -> Result<f64, LinalgError> {
        let eig = self.jacobi_eigendecomposition()?;
        let n = self.n as f64;
        Ok(eig.values.iter().map(|l| (psi * l).exp()).sum::<f64>() / n)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn ritz_vector(basis: &[Vec<f64>], weights: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; basis[0].len()];
    for (b, &s) in basis.iter().zip(weights) {
        axpy(&mut y, s, b);
    }
    let norm = dot(&y, &y).sqrt();
    if norm > 0.0 {
        for v in &mut y {
            *v /= norm;
        }
    }
    y
}

/// Largest eigenvalue and unit Ritz vector of the positive semidefinite
/// operator `apply` (callers pass a squared matrix or a nonnegatively
/// shifted one). Lanczos with full reorthogonalization; when the Krylov
/// basis reaches [`JACOBI_MAX_DIM`] (the dense Ritz solve bound) the cycle
/// restarts from the best Ritz vector. On success the Ritz residual
/// satisfies ‖B y - theta y‖ ≤ tol·theta, which bounds the distance from
/// theta to an exact eigenvalue of B. `max_iter` caps operator
/// applications across restarts.
fn lanczos_top(
    n: usize,
    apply: &impl Fn(&[f64]) -> Vec<f64>,
    tol: f64,
    max_iter: usize,
    seed_salt: u64,
) -> Result<(f64, Vec<f64>), LinalgError> {
    let mut rng = ChaCha8Rng::seed_from_u64(START_VECTOR_SEED ^ seed_salt);
    let mut next = random_unit(n, &mut rng);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut applications = 0;
    let mut best = 0.0_f64;
    let mut kernel_restarts = 0;
    while applications < max_iter {
        basis.push(next);
        let j = basis.len() - 1;
        let mut w = apply(&basis[j]);
        applications += 1;
        if j > 0 {
            axpy(&mut w, -betas[j - 1], &basis[j - 1]);
        }
        let alpha = dot(&w, &basis[j]);
        axpy(&mut w, -alpha, &basis[j]);
        alphas.push(alpha);
        // Two reorthogonalization passes; one is not enough once the basis
        // carries converged Ritz directions.
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                axpy(&mut w, -c, b);
            }
        }
        let beta = dot(&w, &w).sqrt();

        let k = alphas.len();
        let t = SymMatrix::from_fn(k, |i, j| {
            if i == j {
                alphas[i]
            } else if j == i + 1 {
                betas[i]
            } else {
                0.0
            }
        });
        let eig = t.jacobi_eigendecomposition()?;
        let theta = eig.values[0];
        let weights = &eig.vectors[0];
        best = best.max(theta);
        if theta > 0.0 && beta * weights[k - 1].abs() <= tol * theta {
            return Ok((theta, ritz_vector(&basis, weights)));
        }
        if beta == 0.0 {
            // Invariant subspace with no positive Ritz value. A couple of
            // fresh directions guard against a kernel-bound start vector;
            // if they all land on 0, the operator's top eigenvalue is 0
            // (it is positive semidefinite by contract).
            if kernel_restarts >= 2 {
                return Ok((theta.max(0.0), ritz_vector(&basis, weights)));
            }
            kernel_restarts += 1;
            next = random_unit(n, &mut rng);
            basis.clear();
            alphas.clear();
            betas.clear();
            continue;
        }
        if k == JACOBI_MAX_DIM {
            next = ritz_vector(&basis, weights);
            basis.clear();
            alphas.clear();
            betas.clear();
            continue;
        }
        betas.push(beta);
        next = w.into_iter().map(|x| x / beta).collect();
    }
    Err(LinalgError::NonConvergence { iterations: max_iter, last_estimate: best })
}

fn random_unit(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-3 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}
