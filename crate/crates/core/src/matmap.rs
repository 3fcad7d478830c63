//! The map `Φ(A) = tr(A)·A − A²` on symmetric matrices and the algebra
//! around it: the cone `Tₙ` of attainable images, its ε-gap, inversion, and
//! the determinant identities used to show `Φ` is injective.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num::{BigInt, BigRational, One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symfun::{sigma, MultiIndex};

pub type Rational = BigRational;

/// Orthogonal eigendecomposition `A = Q·diag(λ)·Qᵀ`, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    /// Eigenvectors stored as columns, in the order of `values`.
    pub vectors: DMatrix<f64>,
}

/// Real symmetric `n×n` matrix, `n ≥ 2`, storing only the upper triangle.
///
/// The eigendecomposition is computed on first use and cached; values are
/// never mutated after construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymMatrix {
    dim: usize,
    upper: Vec<f64>,
    #[serde(skip)]
    eigen: OnceLock<Eigen>,
}

impl PartialEq for SymMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.upper == other.upper
    }
}

fn upper_index(dim: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * dim - i * (i + 1) / 2 + j
}

impl SymMatrix {
    fn from_upper(dim: usize, upper: Vec<f64>) -> Self {
        SymMatrix {
            dim,
            upper,
            eigen: OnceLock::new(),
        }
    }

    fn check_dim(dim: usize) -> Result<()> {
        if dim < 2 {
            return Err(Error::precondition(format!("symmetric matrix needs n >= 2, got {dim}")));
        }
        Ok(())
    }

    /// Builds from a dense matrix, reading the upper triangle. Fails if the
    /// input is not square or visibly non-symmetric.
    pub fn from_dense(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::precondition("matrix is not square"));
        }
        let n = m.nrows();
        Self::check_dim(n)?;
        let scale = m.amax().max(1.0);
        let mut upper = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                let (a, b) = (m[(i, j)], m[(j, i)]);
                if !a.is_finite() || (a - b).abs() > 1e-9 * scale {
                    return Err(Error::precondition(format!(
                        "matrix is not symmetric at ({i},{j}): {a} vs {b}"
                    )));
                }
                upper.push(a);
            }
        }
        Ok(Self::from_upper(n, upper))
    }

    /// Symmetric part `(M + Mᵀ)/2` of an arbitrary square matrix.
    pub fn symmetrize(m: &DMatrix<f64>) -> Result<Self> {
        let sym = (m + m.transpose()) * 0.5;
        Self::from_dense(&sym)
    }

    /// Row-major `n×n` entries.
    pub fn from_row_major(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::precondition(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Self::from_dense(&DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut upper = vec![0.0; n * (n + 1) / 2];
        for (i, &v) in d.iter().enumerate() {
            upper[upper_index(n, i, i)] = v;
        }
        Self::from_upper(n, upper)
    }

    /// `Q·diag(λ)·Qᵀ` with `Q` given column-wise.
    pub fn from_spectrum(values: &[f64], vectors: &DMatrix<f64>) -> Result<Self> {
        let d = DMatrix::from_diagonal(&DVector::from_column_slice(values));
        Self::symmetrize(&(vectors * d * vectors.transpose()))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.upper[upper_index(self.dim, i, j)]
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_upper(self.dim, self.upper.iter().map(|v| v * s).collect())
    }

    pub fn add(&self, other: &SymMatrix) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::precondition("dimension mismatch"));
        }
        Ok(Self::from_upper(
            self.dim,
            self.upper.iter().zip(&other.upper).map(|(a, b)| a + b).collect(),
        ))
    }

    pub fn sub(&self, other: &SymMatrix) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    /// `B + t·I`
    pub fn shift(&self, t: f64) -> Self {
        let mut upper = self.upper.clone();
        for i in 0..self.dim {
            upper[upper_index(self.dim, i, i)] += t;
        }
        Self::from_upper(self.dim, upper)
    }

    /// Frobenius norm; for symmetric matrices `‖A‖² = Σ λᵢ²`.
    pub fn norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += self.get(i, j).powi(2);
            }
        }
        s.sqrt()
    }

    pub fn eigen(&self) -> &Eigen {
        self.eigen.get_or_init(|| {
            let se = self.to_dense().symmetric_eigen();
            let mut order: Vec<usize> = (0..self.dim).collect();
            order.sort_by(|&a, &b| se.eigenvalues[b].total_cmp(&se.eigenvalues[a]));
            let values = order.iter().map(|&k| se.eigenvalues[k]).collect();
            let vectors = DMatrix::from_fn(self.dim, self.dim, |r, c| se.eigenvectors[(r, order[c])]);
            Eigen { values, vectors }
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigen().values
    }

    pub fn is_spd(&self) -> bool {
        self.eigenvalues().iter().all(|&l| l > 0.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.eigenvalues().last().expect("dim >= 2")
    }
}

/// Eigenvalues of `B`, the SPD flag and `ε(B) = minᵢ (σ₁(μ) − 2μᵢ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeReport {
    pub is_spd: bool,
    pub eps_gap: f64,
    pub eigenvalues: Vec<f64>,
}

impl ConeReport {
    /// Membership in `Tₙ`: SPD and every eigenvalue below the sum of the others.
    pub fn member(&self) -> bool {
        self.is_spd && self.eps_gap > 0.0
    }
}

/// `ε` for a given spectrum.
pub fn eps_gap(mu: &[f64]) -> f64 {
    let s1: f64 = mu.iter().sum();
    mu.iter().map(|m| s1 - 2.0 * m).fold(f64::INFINITY, f64::min)
}

pub fn phi(a: &SymMatrix) -> SymMatrix {
    let d = a.to_dense();
    let out = &d * a.trace() - &d * &d;
    SymMatrix::symmetrize(&out).expect("phi of a symmetric matrix is symmetric")
}

pub fn cone_report(b: &SymMatrix) -> ConeReport {
    let mu = b.eigenvalues().to_vec();
    ConeReport {
        is_spd: mu.iter().all(|&m| m > 0.0),
        eps_gap: eps_gap(&mu),
        eigenvalues: mu,
    }
}

/// How `phi_inverse` solves the diagonal system `λᵢ(s − λᵢ) = μᵢ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum InverseMethod {
    /// Closed form for `n = 3`, damped Newton otherwise.
    #[default]
    Auto,
    ClosedForm,
    Newton,
}

pub const NEWTON_MAX_ITERATIONS: usize = 100;

/// Solves `Φ(A) = B` for SPD `A`, given `B ∈ Tₙ`.
pub fn phi_inverse(b: &SymMatrix, tol: f64) -> Result<SymMatrix> {
    phi_inverse_with(b, tol, InverseMethod::Auto)
}

pub fn phi_inverse_with(b: &SymMatrix, tol: f64, method: InverseMethod) -> Result<SymMatrix> {
    let report = cone_report(b);
    if !report.member() {
        return Err(Error::domain(format!(
            "phi_inverse: argument is not in T_n (spd = {}, eps gap = {:e})",
            report.is_spd, report.eps_gap
        )));
    }
    let n = b.dim();
    let lambda = match method {
        InverseMethod::ClosedForm => {
            if n != 3 {
                return Err(Error::precondition("closed-form inverse exists only for n = 3"));
            }
            inverse_spectrum_n3(&report.eigenvalues)
        }
        InverseMethod::Newton => inverse_spectrum_newton(&report.eigenvalues)?,
        InverseMethod::Auto if n == 3 => inverse_spectrum_n3(&report.eigenvalues),
        InverseMethod::Auto => inverse_spectrum_newton(&report.eigenvalues)?,
    };
    let a = SymMatrix::from_spectrum(&lambda, &b.eigen().vectors)?;
    let residual = phi(&a).sub(b)?.norm();
    if residual > tol * b.norm() {
        return Err(Error::Convergence {
            iterations: 0,
            residual: residual / b.norm(),
        });
    }
    Ok(a)
}

/// `λᵢ = √(Π(σ₁ − 2μⱼ)) / (√2 (σ₁ − 2μᵢ))`.
pub fn inverse_spectrum_n3(mu: &[f64]) -> Vec<f64> {
    let s1: f64 = mu.iter().sum();
    let gaps: Vec<f64> = mu.iter().map(|m| s1 - 2.0 * m).collect();
    let root = gaps.iter().product::<f64>().sqrt();
    gaps.iter().map(|g| root / (std::f64::consts::SQRT_2 * g)).collect()
}

/// `Σ_{j≠i} λⱼ` summed directly; `s − λᵢ` cancels badly when one
/// eigenvalue dominates.
fn others(lambda: &[f64], i: usize) -> f64 {
    lambda.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, l)| l).sum()
}

fn spectrum_residual(lambda: &[f64], mu: &[f64]) -> Vec<f64> {
    (0..lambda.len()).map(|i| lambda[i] * others(lambda, i) - mu[i]).collect()
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Damped Newton on `rᵢ(λ) = λᵢ(s − λᵢ) − μᵢ`, `s = Σλⱼ`.
///
/// When Newton from the scalar-matrix start stalls (widely spread spectra),
/// the solve falls back to continuation from the scalar spectrum along the
/// segment to `μ`, which stays inside the convex cone `Tₙ`.
pub fn inverse_spectrum_newton(mu: &[f64]) -> Result<Vec<f64>> {
    let n = mu.len();
    let s1: f64 = mu.iter().sum();
    // Start from the scalar-matrix solution λᵢ = √(μᵢ/(n−1)), rescaled so
    // that Σλ = √(n·σ₁(μ)/(n−1)); both are exact when all μᵢ agree.
    let mut lambda: Vec<f64> = mu.iter().map(|m| (m / (n as f64 - 1.0)).sqrt()).collect();
    let target = (n as f64 * s1 / (n as f64 - 1.0)).sqrt();
    let sum: f64 = lambda.iter().sum();
    lambda.iter_mut().for_each(|l| *l *= target / sum);
    match newton(lambda, mu, NEWTON_MAX_ITERATIONS) {
        Ok(lambda) => Ok(lambda),
        Err(_) => continuation(mu),
    }
}

fn continuation(mu: &[f64]) -> Result<Vec<f64>> {
    let n = mu.len() as f64;
    let mean = mu.iter().sum::<f64>() / n;
    let mut lambda = vec![(mean / (n - 1.0)).sqrt(); mu.len()];
    let (mut t, mut dt) = (0.0f64, 0.25f64);
    while t < 1.0 {
        let next = (t + dt).min(1.0);
        let target: Vec<f64> = mu.iter().map(|m| (1.0 - next) * mean + next * m).collect();
        match newton(lambda.clone(), &target, 25) {
            Ok(l) => {
                lambda = l;
                t = next;
                dt *= 2.0;
            }
            Err(e) => {
                dt *= 0.5;
                if dt < 1e-8 {
                    return Err(e);
                }
            }
        }
    }
    Ok(lambda)
}

fn newton(mut lambda: Vec<f64>, mu: &[f64], max_iterations: usize) -> Result<Vec<f64>> {
    let n = mu.len();
    let scale = l2(mu);
    let mut r = spectrum_residual(&lambda, mu);
    let mut rnorm = l2(&r);
    for iteration in 0..max_iterations {
        if rnorm <= 4.0 * f64::EPSILON * scale {
            return Ok(lambda);
        }
        // ∂rᵢ/∂λⱼ = λᵢ + δᵢⱼ (s − 2λᵢ)
        let jac = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                others(&lambda, i)
            } else {
                lambda[i]
            }
        });
        let step = match jac.lu().solve(&DVector::from_column_slice(&r)) {
            Some(step) => step,
            None => {
                return Err(Error::Convergence {
                    iterations: iteration,
                    residual: rnorm / scale,
                })
            }
        };
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = lambda.iter().zip(step.iter()).map(|(l, d)| l - t * d).collect();
            let trial_r = spectrum_residual(&trial, mu);
            let trial_norm = l2(&trial_r);
            if trial.iter().all(|&l| l > 0.0) && trial_norm < rnorm {
                lambda = trial;
                r = trial_r;
                rnorm = trial_norm;
                break;
            }
            t *= 0.5;
            if t < 1e-12 {
                // No further decrease is possible at this precision.
                if rnorm <= 1e-12 * scale {
                    return Ok(lambda);
                }
                return Err(Error::Convergence {
                    iterations: iteration,
                    residual: rnorm / scale,
                });
            }
        }
    }
    if rnorm <= 1e-12 * scale {
        return Ok(lambda);
    }
    Err(Error::Convergence {
        iterations: max_iterations,
        residual: rnorm / scale,
    })
}

/// `(‖A‖, (n/2)·‖Φ(A)‖·ε(Φ(A))^{−1/2})`; left ≤ right for SPD `A`.
pub fn norm_bound_sides(a: &SymMatrix) -> Result<(f64, f64)> {
    if !a.is_spd() {
        return Err(Error::precondition("norm bound needs an SPD matrix"));
    }
    let b = phi(a);
    let n = a.dim() as f64;
    let eps = cone_report(&b).eps_gap;
    Ok((a.norm(), 0.5 * n * b.norm() / eps.sqrt()))
}

/// `((tr A)³ − tr A³, (3/2)[(tr A)² − tr A²]·tr A)`; left ≤ right for SPD `A`.
pub fn chi_inequality_sides(a: &SymMatrix) -> Result<(f64, f64)> {
    if !a.is_spd() {
        return Err(Error::precondition("chi inequality needs an SPD matrix"));
    }
    let d = a.to_dense();
    let sq = &d * &d;
    let t1 = a.trace();
    let t2 = sq.trace();
    let t3 = (&sq * &d).trace();
    Ok((t1.powi(3) - t3, 1.5 * (t1 * t1 - t2) * t1))
}

/// `Fₙ(s, x)`: `s − xᵢ` on the diagonal and `xᵢ` elsewhere in row `i`.
pub fn f_matrix(s: f64, x: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    DMatrix::from_fn(n, n, |i, j| if i == j { s - x[i] } else { x[i] })
}

/// `det Gₙ(x)` with `Gₙ(x) = Fₙ(σ₁(x), x)`, by partial-pivot elimination.
pub fn det_gn_direct(x: &[f64]) -> Result<f64> {
    if x.len() < 3 {
        return Err(Error::precondition(format!("det G_n needs n >= 3, got {}", x.len())));
    }
    let s: f64 = x.iter().sum();
    Ok(f_matrix(s, x).lu().determinant())
}

/// `(det Fₙ(s, x), sⁿ − σ₁sⁿ⁻¹ + Σ_{k=3}^{n} (−2)^{k−1}(k−2)σ_k sⁿ⁻ᵏ)`.
pub fn fn_poly_sides(s: f64, x: &[f64]) -> Result<(f64, f64)> {
    let n = x.len();
    if n < 3 {
        return Err(Error::precondition(format!("f_n needs n >= 3, got {n}")));
    }
    let det = f_matrix(s, x).lu().determinant();
    let mut poly = s.powi(n as i32) - sigma(1, x) * s.powi(n as i32 - 1);
    for k in 3..=n {
        poly += (-2f64).powi(k as i32 - 1) * (k as f64 - 2.0) * sigma(k, x) * s.powi((n - k) as i32);
    }
    Ok((det, poly))
}

fn factorial_big(k: usize) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, v| acc * BigInt::from(v))
}

fn sigma_of_index(k: usize, gamma: &MultiIndex) -> BigInt {
    let g: Vec<BigInt> = gamma.entries().iter().map(|&v| BigInt::from(v)).collect();
    sigma(k, &g)
}

/// `b_{γ,k,n} = 2^{k−1}(k−2)(n−k)!/γ! · σ_{k,n}(γ)`, so that
/// `a_{γ,n} = Σ_{k≥3} (−1)^{k−1} b_{γ,k,n}`.
pub fn b_coefficient(gamma: &MultiIndex, k: usize, n: usize) -> Rational {
    assert!(k >= 2 && k <= n, "b coefficient needs 2 <= k <= n");
    let numer = (BigInt::one() << (k - 1)) * BigInt::from(k - 2) * factorial_big(n - k) * sigma_of_index(k, gamma);
    Rational::new(numer, BigInt::from(gamma.factorial()))
}

/// Coefficients `a_{γ,n}` of `det Gₙ(x) = Σ_{‖γ‖=n} a_{γ,n} x^γ`.
pub fn det_gn_coefficients(n: usize) -> Result<BTreeMap<MultiIndex, Rational>> {
    if !(3..=8).contains(&n) {
        return Err(Error::precondition(format!("coefficient table supports 3 <= n <= 8, got {n}")));
    }
    let mut out = BTreeMap::new();
    for gamma in MultiIndex::all_with_norm(n, n as u32) {
        let mut a = Rational::zero();
        for k in 3..=n {
            let term = b_coefficient(&gamma, k, n);
            if k % 2 == 1 {
                a += term;
            } else {
                a -= term;
            }
        }
        out.insert(gamma, a);
    }
    Ok(out)
}
