//! Intrinsic Riemannian geometry computed from metric jets.
//!
//! Index conventions: `Γ^k_ij` is stored at `k·n² + i·n + j`; the Riemann
//! tensor is stored fully lowered, `R_abcd` at `((a·n + b)·n + c)·n + d`,
//! with signs chosen so that the unit sphere has `R_abcd = g_ac g_bd −
//! g_ad g_bc` and `Ric_bd = g^{ac} R_abcd`.

mod geodesic;
mod sectional;

pub use geodesic::{diameter, DiameterEstimate, GeodesicGraph};
pub use sectional::{
    curvature_operator, frame_riemann, orthonormal_frame, sampled_sectional_extremes,
    sectional_curvature, sectional_extremes, SectionalExtremes,
};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::{Jet, JetMatrix};
use crate::matmap::SymMatrix;
use crate::surfaces::ChartPoint;

/// Metric components as jets at a chart point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricJet {
    g: JetMatrix,
}

impl MetricJet {
    pub fn new(g: JetMatrix) -> Result<Self> {
        let n = g.rows();
        if n != g.cols() || n < 2 {
            return Err(Error::precondition(format!(
                "metric must be square of size >= 2, got {}x{}",
                g.rows(),
                g.cols()
            )));
        }
        for i in 0..n {
            for j in 0..i {
                if g.get(i, j).max_abs_diff(g.get(j, i)) > 1e-12 * (1.0 + g.get(i, j).value().abs()) {
                    return Err(Error::precondition("metric jet is not symmetric"));
                }
            }
        }
        if g.value().cholesky().is_none() {
            return Err(Error::domain("metric is not positive definite"));
        }
        Ok(MetricJet { g })
    }

    pub fn dim(&self) -> usize {
        self.g.rows()
    }

    pub fn order(&self) -> usize {
        self.g.order()
    }

    pub fn components(&self) -> &JetMatrix {
        &self.g
    }

    pub fn value(&self) -> DMatrix<f64> {
        self.g.value()
    }

    pub fn truncate(&self, order: usize) -> MetricJet {
        MetricJet {
            g: self.g.truncate(order),
        }
    }

    /// The metric `c²·g`.
    pub fn scaled(&self, c2: f64) -> MetricJet {
        MetricJet {
            g: self.g.map(|j| j.scale(c2)),
        }
    }

    /// Christoffel symbols of the second kind, one order below the metric.
    pub fn christoffel(&self) -> Result<Vec<Jet>> {
        let n = self.dim();
        if self.order() == 0 {
            return Err(Error::precondition("Christoffel symbols need a metric jet of order >= 1"));
        }
        let ginv = self.g.truncate(self.order() - 1).inverse()?;
        let dg: Vec<JetMatrix> = (0..n).map(|k| self.g.deriv(k)).collect();
        // Γ_{l,ij} = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)
        let mut lowered = Vec::with_capacity(n * n * n);
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let s = dg[i].get(j, l) + dg[j].get(i, l) - dg[l].get(i, j);
                    lowered.push(s.scale(0.5));
                }
            }
        }
        let mut gamma = Vec::with_capacity(n * n * n);
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut acc = ginv.get(k, 0) * lowered[i * n + j];
                    for l in 1..n {
                        acc += ginv.get(k, l) * lowered[(l * n + i) * n + j];
                    }
                    gamma.push(acc);
                }
            }
        }
        Ok(gamma)
    }
}

/// Anything that can produce metric jets at chart points.
pub trait MetricSource: Sync {
    fn dim(&self) -> usize;

    fn metric_jet(&self, p: &ChartPoint, order: usize) -> Result<MetricJet>;

    fn metric_value(&self, p: &ChartPoint) -> Result<DMatrix<f64>> {
        Ok(self.metric_jet(p, 0)?.value())
    }
}

/// The metric `c²·g` of another source.
pub struct Scaled<'a> {
    pub inner: &'a dyn MetricSource,
    pub c2: f64,
}

impl MetricSource for Scaled<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn metric_jet(&self, p: &ChartPoint, order: usize) -> Result<MetricJet> {
        Ok(self.inner.metric_jet(p, order)?.scaled(self.c2))
    }
}

/// Curvature quantities as jets.
#[derive(Debug, Clone)]
pub struct CurvatureJets {
    pub dim: usize,
    pub christoffel: Vec<Jet>,
    pub riemann: Vec<Jet>,
    pub ricci: JetMatrix,
    pub scalar: Jet,
    pub inverse_metric: JetMatrix,
}

/// Γ, lowered Riemann, Ricci and scalar curvature; the Riemann family comes
/// out two orders below the metric.
pub fn curvature_jets(mj: &MetricJet) -> Result<CurvatureJets> {
    let n = mj.dim();
    let o = mj.order();
    if o < 2 {
        return Err(Error::precondition("curvature needs a metric jet of order >= 2"));
    }
    let gamma = mj.christoffel()?;
    let dgamma: Vec<Vec<Jet>> = (0..n).map(|c| gamma.iter().map(|j| j.deriv(c)).collect()).collect();
    let gam = |k: usize, i: usize, j: usize| &gamma[(k * n + i) * n + j];
    let dgam = |c: usize, k: usize, i: usize, j: usize| &dgamma[c][(k * n + i) * n + j];

    // R^a_{bcd} = ∂_c Γ^a_{db} − ∂_d Γ^a_{cb} + Γ^a_{ce} Γ^e_{db} − Γ^a_{de} Γ^e_{cb}
    let mut mixed = Vec::with_capacity(n * n * n * n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut r = dgam(c, a, d, b) - dgam(d, a, c, b);
                    for e in 0..n {
                        r += gam(a, c, e) * gam(e, d, b);
                        r -= gam(a, d, e) * gam(e, c, b);
                    }
                    mixed.push(r.truncate(o - 2));
                }
            }
        }
    }
    let g = mj.components().truncate(o - 2);
    let mut riemann = Vec::with_capacity(n * n * n * n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut acc = g.get(a, 0) * mixed[((b) * n + c) * n + d];
                    for e in 1..n {
                        acc += g.get(a, e) * mixed[((e * n + b) * n + c) * n + d];
                    }
                    riemann.push(acc);
                }
            }
        }
    }
    let ricci = JetMatrix::from_fn(n, n, |b, d| {
        let mut acc = mixed[(b * n) * n + d];
        for a in 1..n {
            acc += &mixed[((a * n + b) * n + a) * n + d];
        }
        acc
    });
    // Symmetrize away rounding noise; Ricci of a Levi-Civita connection is
    // symmetric.
    let ricci = JetMatrix::from_fn(n, n, |i, j| (ricci.get(i, j) + ricci.get(j, i)).scale(0.5));
    let inverse_metric = g.inverse()?;
    let scalar = inverse_metric.matmul(&ricci).trace();
    Ok(CurvatureJets {
        dim: n,
        christoffel: gamma,
        riemann,
        ricci,
        scalar,
        inverse_metric,
    })
}

/// Pointwise curvature at a chart point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureState {
    pub dim: usize,
    pub metric: Vec<f64>,
    pub christoffel: Vec<f64>,
    pub riemann: Vec<f64>,
    pub ricci: SymMatrix,
    pub scalar: f64,
    /// Present when the metric jet had order ≥ 4.
    pub laplacian_scalar: Option<f64>,
    pub sectional_min: f64,
    pub sectional_max: f64,
    pub sectional_exact: bool,
    pub ricci_norm: f64,
}

impl CurvatureState {
    pub fn metric_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.metric)
    }

    pub fn inverse_metric(&self) -> DMatrix<f64> {
        self.metric_matrix()
            .try_inverse()
            .expect("metric of a curvature state is invertible")
    }

    pub fn riemann(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        let n = self.dim;
        self.riemann[((a * n + b) * n + c) * n + d]
    }

    pub fn christoffel(&self, k: usize, i: usize, j: usize) -> f64 {
        let n = self.dim;
        self.christoffel[(k * n + i) * n + j]
    }

    /// Largest violation of `R_abcd + R_acdb + R_adbc = 0`.
    pub fn bianchi_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let s = self.riemann(a, b, c, d) + self.riemann(a, c, d, b) + self.riemann(a, d, b, c);
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    /// Ricci tensor in a g-orthonormal frame.
    pub fn frame_ricci(&self) -> Result<SymMatrix> {
        let f = orthonormal_frame(&self.metric_matrix())?;
        SymMatrix::symmetrize(&(f.transpose() * self.ricci.to_dense() * &f))
    }
}

/// Full pointwise curvature; sectional extremes are exact for `n ≤ 3` and
/// sampled (with `samples` planes from `seed`) otherwise.
pub fn curvature(mj: &MetricJet) -> Result<CurvatureState> {
    curvature_sampled(mj, 4096, 0)
}

pub fn curvature_sampled(mj: &MetricJet, samples: usize, seed: u64) -> Result<CurvatureState> {
    let n = mj.dim();
    let cj = curvature_jets(mj)?;
    let laplacian_scalar = (mj.order() >= 4).then(|| {
        let ginv = cj.inverse_metric.value();
        let r = &cj.scalar;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut e = [0u8; 3];
                e[i] += 1;
                e[j] += 1;
                let mut term = r.partial(&e[..n]);
                for k in 0..n {
                    let mut ek = [0u8; 3];
                    ek[k] = 1;
                    term -= cj.christoffel[(k * n + i) * n + j].value() * r.partial(&ek[..n]);
                }
                acc += ginv[(i, j)] * term;
            }
        }
        acc
    });
    let metric = mj.value();
    let ricci = SymMatrix::symmetrize(&cj.ricci.value())?;
    let ginv = cj.inverse_metric.value();
    let mixed = &ginv * ricci.to_dense();
    let ricci_norm = (&mixed * &mixed).trace().max(0.0).sqrt();
    let mut state = CurvatureState {
        dim: n,
        metric: metric.transpose().as_slice().to_vec(),
        christoffel: cj.christoffel.iter().map(Jet::value).collect(),
        riemann: cj.riemann.iter().map(Jet::value).collect(),
        ricci,
        scalar: cj.scalar.value(),
        laplacian_scalar,
        sectional_min: 0.0,
        sectional_max: 0.0,
        sectional_exact: false,
        ricci_norm,
    };
    let ext = sectional_extremes(&state, samples, seed)?;
    state.sectional_min = ext.min;
    state.sectional_max = ext.max;
    state.sectional_exact = ext.exact;
    Ok(state)
}

/// `T_{ij;k} − T_{ik;j}` stored at `(i·n + j)·n + k`, from a symmetric
/// 2-tensor jet of order ≥ 1.
pub fn covariant_antisym(mj: &MetricJet, t: &JetMatrix) -> Result<Vec<f64>> {
    let n = mj.dim();
    if t.rows() != n || t.cols() != n {
        return Err(Error::precondition("tensor and metric dimensions differ"));
    }
    if t.order() < 1 {
        return Err(Error::precondition("tensor jet needs order >= 1"));
    }
    for i in 0..n {
        for j in 0..i {
            if (t.get(i, j).value() - t.get(j, i).value()).abs() > 1e-12 * (1.0 + t.get(i, j).value().abs()) {
                return Err(Error::precondition("tensor is not symmetric"));
            }
        }
    }
    let gamma: Vec<f64> = mj.truncate(1).christoffel()?.iter().map(Jet::value).collect();
    let gam = |k: usize, i: usize, j: usize| gamma[(k * n + i) * n + j];
    let tv = t.value();
    let dt: Vec<DMatrix<f64>> = (0..n).map(|k| t.deriv(k).value()).collect();
    // ∇_k T_ij = ∂_k T_ij − Γ^l_ki T_lj − Γ^l_kj T_il
    let nabla = |k: usize, i: usize, j: usize| {
        let mut v = dt[k][(i, j)];
        for l in 0..n {
            v -= gam(l, k, i) * tv[(l, j)] + gam(l, k, j) * tv[(i, l)];
        }
        v
    };
    let mut out = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out.push(nabla(k, i, j) - nabla(j, i, k));
            }
        }
    }
    Ok(out)
}

/// `(A_ijk A^ijk)^{1/2}` with indices raised by `g`.
pub fn tensor3_norm(a: &[f64], g: &DMatrix<f64>) -> f64 {
    let n = g.nrows();
    let ginv = g.clone().try_inverse().expect("metric is invertible");
    // Raise one index at a time: B = A ×₁ g⁻¹ ×₂ g⁻¹ ×₃ g⁻¹
    let mut raised = a.to_vec();
    for axis in 0..3 {
        let mut next = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut acc = 0.0;
                    for m in 0..n {
                        let src = match axis {
                            0 => (m * n + j) * n + k,
                            1 => (i * n + m) * n + k,
                            _ => (i * n + j) * n + m,
                        };
                        let row = [i, j, k][axis];
                        acc += ginv[(row, m)] * raised[src];
                    }
                    next[(i * n + j) * n + k] = acc;
                }
            }
        }
        raised = next;
    }
    a.iter().zip(&raised).map(|(x, y)| x * y).sum::<f64>().max(0.0).sqrt()
}

pub fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}
