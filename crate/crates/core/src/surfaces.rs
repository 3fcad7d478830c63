//! Closed convex hypersurfaces of ℝⁿ⁺¹ (n = 2, 3) parametrized over two
//! stereographic charts of Sⁿ.
//!
//! North chart: `x ↦ (2x, 1 − |x|²)/(1 + |x|²)`; south chart: the same with
//! the last coordinate negated. The transition map is `x ↦ x/|x|²`, and on
//! both charts the round metric is `φ²δ` with `φ = 2/(1 + |x|²)`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intrinsic::{self, covariant_antisym, max_abs, orthonormal_frame, CurvatureState, MetricJet, MetricSource};
use crate::jets::{det, Jet, JetMatrix};
use crate::symfun::sigma;

pub const DEFAULT_CHART_RADIUS: f64 = 1.8;
/// Jet order of the embedding; the metric comes out one order lower.
pub const EMBEDDING_ORDER: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chart {
    North,
    South,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub chart: Chart,
    pub coords: Vec<f64>,
}

impl ChartPoint {
    pub fn new(chart: Chart, coords: Vec<f64>) -> Self {
        ChartPoint { chart, coords }
    }

    pub fn north(coords: &[f64]) -> Self {
        Self::new(Chart::North, coords.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn check(&self, radius: f64) -> Result<()> {
        let norm = self.norm();
        if !norm.is_finite() || norm > radius * (1.0 + 1e-12) {
            return Err(Error::ChartOverflow { norm, radius });
        }
        Ok(())
    }

    /// The same sphere point in the other chart; undefined at the origin.
    pub fn transition(&self) -> ChartPoint {
        let r2: f64 = self.coords.iter().map(|v| v * v).sum();
        let other = match self.chart {
            Chart::North => Chart::South,
            Chart::South => Chart::North,
        };
        ChartPoint::new(other, self.coords.iter().map(|v| v / r2).collect())
    }

    pub fn sphere_point(&self) -> Vec<f64> {
        let r2: f64 = self.coords.iter().map(|v| v * v).sum();
        let mut out: Vec<f64> = self.coords.iter().map(|v| 2.0 * v / (1.0 + r2)).collect();
        let last = (1.0 - r2) / (1.0 + r2);
        out.push(match self.chart {
            Chart::North => last,
            Chart::South => -last,
        });
        out
    }

    /// Chart coordinates of a unit vector `x̂ ∈ Sⁿ`.
    pub fn from_sphere(chart: Chart, xhat: &[f64]) -> ChartPoint {
        let n = xhat.len() - 1;
        let denom = match chart {
            Chart::North => 1.0 + xhat[n],
            Chart::South => 1.0 - xhat[n],
        };
        ChartPoint::new(chart, xhat[..n].iter().map(|v| v / denom).collect())
    }
}

/// The chart map `x ↦ x̂ ∈ Sⁿ ⊂ ℝⁿ⁺¹` as jets.
pub fn stereographic(p: &ChartPoint, order: usize) -> Result<Vec<Jet>> {
    let v = Jet::coordinates(&p.coords, order)?;
    let r2 = sum_squares(&v);
    let inv = r2.add_scalar(1.0).recip()?;
    let mut out: Vec<Jet> = v.iter().map(|x| (x * inv).scale(2.0)).collect();
    let last = (r2.scale(-1.0).add_scalar(1.0)) * inv;
    out.push(match p.chart {
        Chart::North => last,
        Chart::South => -last,
    });
    Ok(out)
}

fn sum_squares(v: &[Jet]) -> Jet {
    let mut acc = v[0] * v[0];
    for x in &v[1..] {
        acc += x * x;
    }
    acc
}

fn dot(a: &[Jet], b: &[Jet]) -> Jet {
    let mut acc = a[0] * b[0];
    for (x, y) in a[1..].iter().zip(&b[1..]) {
        acc += x * y;
    }
    acc
}

/// Round metric of radius `radius` in either chart, `r²φ²δ`, as jets.
pub fn round_metric(p: &ChartPoint, radius: f64, order: usize) -> Result<JetMatrix> {
    let n = p.dim();
    let v = Jet::coordinates(&p.coords, order)?;
    let phi = sum_squares(&v).add_scalar(1.0).recip()?.scale(2.0 * radius);
    let phi2 = phi * phi;
    let zero = Jet::zero(n, order);
    Ok(JetMatrix::from_fn(n, n, |i, j| if i == j { phi2 } else { zero }))
}

/// Christoffel symbols of the round metric, `Γ^k_ij = δ_ik w_j + δ_jk w_i −
/// δ_ij w_k` with `w = ∇ log φ = −2x/(1 + |x|²)`, stored `[k][i][j]`.
fn round_christoffel(p: &ChartPoint, order: usize) -> Result<Vec<Jet>> {
    let n = p.dim();
    let v = Jet::coordinates(&p.coords, order)?;
    let inv = sum_squares(&v).add_scalar(1.0).recip()?;
    let w: Vec<Jet> = v.iter().map(|x| (x * inv).scale(-2.0)).collect();
    let zero = Jet::zero(n, order);
    let mut out = Vec::with_capacity(n * n * n);
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut acc = zero;
                if i == k {
                    acc += &w[j];
                }
                if j == k {
                    acc += &w[i];
                }
                if i == j {
                    acc -= &w[k];
                }
                out.push(acc);
            }
        }
    }
    Ok(out)
}

/// The round sphere's metric as a standalone source, independent of any
/// embedding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundMetric {
    pub dim: usize,
    pub radius: f64,
}

impl MetricSource for RoundMetric {
    fn dim(&self) -> usize {
        self.dim
    }

    fn metric_jet(&self, p: &ChartPoint, order: usize) -> Result<MetricJet> {
        MetricJet::new(round_metric(p, self.radius, order)?)
    }
}

/// Support-type function `u` on Sⁿ for radial graphs `X = x̂/u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Profile {
    /// `u(x̂) = c0 + b·x̂ + ½ x̂ᵀ M x̂`.
    Quadratic {
        c0: f64,
        #[serde(default)]
        b: Vec<f64>,
        #[serde(default)]
        m: Vec<Vec<f64>>,
    },
    /// `u(x̂) = (Σ x̂ᵢ²/aᵢ²)^{1/2}`: the radial graph of an ellipsoid.
    EllipsoidGauge { axes: Vec<f64> },
}

impl Profile {
    pub fn constant(c0: f64) -> Self {
        Profile::Quadratic {
            c0,
            b: Vec::new(),
            m: Vec::new(),
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Profile::Quadratic { c0, b, m } => {
                if !c0.is_finite() {
                    return Err(Error::precondition("profile constant must be finite"));
                }
                if !b.is_empty() && b.len() != dim + 1 {
                    return Err(Error::precondition(format!("profile b needs {} entries", dim + 1)));
                }
                if !m.is_empty() {
                    if m.len() != dim + 1 || m.iter().any(|row| row.len() != dim + 1) {
                        return Err(Error::precondition(format!("profile m must be {0}x{0}", dim + 1)));
                    }
                    for (i, row) in m.iter().enumerate() {
                        for j in 0..i {
                            if (row[j] - m[j][i]).abs() > 1e-14 * (1.0 + row[j].abs()) {
                                return Err(Error::precondition("profile m must be symmetric"));
                            }
                        }
                    }
                }
            }
            Profile::EllipsoidGauge { axes } => {
                if axes.len() != dim + 1 || axes.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
                    return Err(Error::precondition(format!(
                        "ellipsoid gauge needs {} positive axes",
                        dim + 1
                    )));
                }
            }
        }
        Ok(())
    }

    fn eval(&self, xhat: &[Jet]) -> Result<Jet> {
        let proto = xhat[0];
        match self {
            Profile::Quadratic { c0, b, m } => {
                let mut u = Jet::constant(*c0, proto.nvars(), proto.order());
                for (bi, xi) in b.iter().zip(xhat) {
                    u += xi.scale(*bi);
                }
                for (i, row) in m.iter().enumerate() {
                    for (j, &mij) in row.iter().enumerate() {
                        if mij != 0.0 {
                            u += (xhat[i] * xhat[j]).scale(0.5 * mij);
                        }
                    }
                }
                Ok(u)
            }
            Profile::EllipsoidGauge { axes } => {
                let mut s = Jet::zero(proto.nvars(), proto.order());
                for (a, xi) in axes.iter().zip(xhat) {
                    s += (xi * xi).scale(1.0 / (a * a));
                }
                s.sqrt()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Family {
    RoundSphere {
        dim: usize,
        radius: f64,
    },
    /// `X = (a₁x̂₁, …, aₙ₊₁x̂ₙ₊₁)`.
    Ellipsoid { axes: Vec<f64> },
    /// `X = x̂/(u(x̂) + epsilon)`.
    RadialGraph {
        dim: usize,
        profile: Profile,
        #[serde(default)]
        epsilon: f64,
    },
}

impl Family {
    pub fn sphere(dim: usize, radius: f64) -> Self {
        Family::RoundSphere { dim, radius }
    }

    pub fn ellipsoid(axes: &[f64]) -> Self {
        Family::Ellipsoid { axes: axes.to_vec() }
    }

    pub fn radial(dim: usize, profile: Profile) -> Self {
        Family::RadialGraph {
            dim,
            profile,
            epsilon: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Family::RoundSphere { dim, .. } | Family::RadialGraph { dim, .. } => *dim,
            Family::Ellipsoid { axes } => axes.len().saturating_sub(1),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        if !(2..=3).contains(&n) {
            return Err(Error::precondition(format!("families live in dimension 2 or 3, got {n}")));
        }
        match self {
            Family::RoundSphere { radius, .. } => {
                if !(*radius > 0.0) || !radius.is_finite() {
                    return Err(Error::precondition("sphere radius must be positive"));
                }
            }
            Family::Ellipsoid { axes } => {
                if axes.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
                    return Err(Error::precondition("ellipsoid semi-axes must be positive"));
                }
            }
            Family::RadialGraph { profile, epsilon, .. } => {
                profile.validate(n)?;
                if !epsilon.is_finite() || *epsilon < 0.0 {
                    return Err(Error::precondition("radial graph offset must be >= 0"));
                }
            }
        }
        Ok(())
    }

    fn check_point(&self, p: &ChartPoint) -> Result<()> {
        if p.dim() != self.dim() {
            return Err(Error::precondition(format!(
                "chart point has {} coordinates, family dimension is {}",
                p.dim(),
                self.dim()
            )));
        }
        p.check(DEFAULT_CHART_RADIUS)
    }

    /// `u + epsilon` for radial graphs.
    fn radial_u(&self, xhat: &[Jet]) -> Result<Jet> {
        let Family::RadialGraph { profile, epsilon, .. } = self else {
            unreachable!("radial_u on a non-radial family")
        };
        let u = profile.eval(xhat)?.add_scalar(*epsilon);
        if !(u.value() > 0.0) {
            return Err(Error::domain(format!("radial function u = {} is not positive", u.value())));
        }
        Ok(u)
    }

    /// Embedding components as jets of the given order.
    pub fn embedding(&self, p: &ChartPoint, order: usize) -> Result<Vec<Jet>> {
        self.validate()?;
        self.check_point(p)?;
        let xhat = stereographic(p, order)?;
        Ok(match self {
            Family::RoundSphere { radius, .. } => xhat.iter().map(|x| x.scale(*radius)).collect(),
            Family::Ellipsoid { axes } => xhat.iter().zip(axes).map(|(x, a)| x.scale(*a)).collect(),
            Family::RadialGraph { .. } => {
                let rho = self.radial_u(&xhat)?.recip()?;
                xhat.iter().map(|x| x * rho).collect()
            }
        })
    }

    pub fn position(&self, p: &ChartPoint) -> Result<Vec<f64>> {
        Ok(self.embedding(p, 0)?.iter().map(Jet::value).collect())
    }
}

impl MetricSource for Family {
    fn dim(&self) -> usize {
        Family::dim(self)
    }

    fn metric_jet(&self, p: &ChartPoint, order: usize) -> Result<MetricJet> {
        if let Family::RadialGraph { .. } = self {
            return Ok(radial_forms(self, p, order + 1)?.metric);
        }
        let x = self.embedding(p, order + 1)?;
        let t: Vec<Vec<Jet>> = (0..p.dim()).map(|i| x.iter().map(|c| c.deriv(i)).collect()).collect();
        MetricJet::new(JetMatrix::from_fn(p.dim(), p.dim(), |i, j| dot(&t[i], &t[j])))
    }
}

struct RadialForms {
    metric: MetricJet,
    /// `u⁻³(uγ + Hess_γ u)`, the unnormalized form.
    chi_displayed: JetMatrix,
    /// `(ρ² + γ^{ij}ρᵢρⱼ)^{1/2}`; dividing by it gives the second fundamental form.
    normalizer: Jet,
}

/// Metric and second fundamental form of a radial graph from `u` directly:
/// `g = ρ²γ + dρ⊗dρ` and `χ = u⁻³(uγ + Hess_γ u)/(ρ² + |dρ|²_γ)^{1/2}`.
fn radial_forms(family: &Family, p: &ChartPoint, order: usize) -> Result<RadialForms> {
    family.validate()?;
    family.check_point(p)?;
    let n = p.dim();
    let xhat = stereographic(p, order)?;
    let u = family.radial_u(&xhat)?;
    let rho = u.recip()?;
    let gamma = round_metric(p, 1.0, order)?;
    let drho: Vec<Jet> = (0..n).map(|i| rho.deriv(i)).collect();
    let rho2 = rho * rho;
    let metric = MetricJet::new(JetMatrix::from_fn(n, n, |i, j| {
        rho2 * gamma.get(i, j) + drho[i] * drho[j]
    }))?;

    let gamma_low = gamma.truncate(order.saturating_sub(2));
    let chris = round_christoffel(p, order.saturating_sub(2))?;
    let du: Vec<Jet> = (0..n).map(|i| u.deriv(i)).collect();
    let u3inv = u.powi(-3)?;
    let chi_displayed = JetMatrix::from_fn(n, n, |i, j| {
        let mut hess = du[i].deriv(j);
        for k in 0..n {
            hess -= chris[(k * n + i) * n + j] * du[k];
        }
        (u * gamma_low.get(i, j) + hess) * u3inv
    });
    // γ^{ij} = δ^{ij}/φ²
    let mut grad2 = drho[0] * drho[0];
    for d in &drho[1..] {
        grad2 += d * d;
    }
    let grad2 = grad2.try_div(gamma.get(0, 0))?;
    let normalizer = (rho2 + grad2).sqrt()?;
    Ok(RadialForms {
        metric,
        chi_displayed,
        normalizer,
    })
}

/// The unnormalized `u⁻³(uγ + Hess_γ u)` of a radial graph at a point.
pub fn radial_chi_displayed(family: &Family, p: &ChartPoint) -> Result<DMatrix<f64>> {
    if !matches!(family, Family::RadialGraph { .. }) {
        return Err(Error::precondition("displayed second fundamental form needs a radial graph"));
    }
    Ok(radial_forms(family, p, 2)?.chi_displayed.value())
}

/// Pointwise geometric state of an embedded hypersurface.
#[derive(Debug, Clone)]
pub struct SurfacePoint {
    pub chart: ChartPoint,
    /// Embedding components, order `k`.
    pub x: Vec<Jet>,
    /// Outer unit normal, order `k − 1`.
    pub normal: Vec<Jet>,
    /// Induced metric, order `k − 1`.
    pub metric: MetricJet,
    /// Second fundamental form, order `k − 2`.
    pub chi: JetMatrix,
    /// `½ X·X`, order `k`.
    pub rho: Jet,
    /// `X·N` at the point.
    pub support: f64,
}

pub fn evaluate(family: &Family, p: &ChartPoint) -> Result<SurfacePoint> {
    evaluate_order(family, p, EMBEDDING_ORDER)
}

/// Evaluate with embedding jets of order `order ≥ 2`.
pub fn evaluate_order(family: &Family, p: &ChartPoint, order: usize) -> Result<SurfacePoint> {
    if order < 2 {
        return Err(Error::precondition("surface evaluation needs embedding order >= 2"));
    }
    let n = family.dim();
    let x = family.embedding(p, order)?;
    let tangents: Vec<Vec<Jet>> = (0..n).map(|i| x.iter().map(|c| c.deriv(i)).collect()).collect();

    // Generalized cross product of the tangent vectors.
    let v: Vec<Jet> = (0..=n)
        .map(|a| {
            let minor = JetMatrix::from_fn(n, n, |i, j| tangents[i][if j < a { j } else { j + 1 }]);
            let d = det(&minor);
            if a % 2 == 0 {
                d
            } else {
                -d
            }
        })
        .collect();
    let inv_len = sum_squares(&v).sqrt()?.recip()?;
    let mut normal: Vec<Jet> = v.iter().map(|c| c * inv_len).collect();
    let support = x.iter().zip(&normal).map(|(a, b)| a.value() * b.value()).sum::<f64>();
    let support = if support < 0.0 {
        normal.iter_mut().for_each(|c| *c = -*c);
        -support
    } else {
        support
    };

    let (metric, chi) = if let Family::RadialGraph { .. } = family {
        let forms = radial_forms(family, p, order)?;
        let chi = JetMatrix::from_fn(n, n, |i, j| {
            forms
                .chi_displayed
                .get(i, j)
                .try_div(&forms.normalizer)
                .expect("normalizer is positive")
        });
        (forms.metric, chi)
    } else {
        let metric = MetricJet::new(JetMatrix::from_fn(n, n, |i, j| dot(&tangents[i], &tangents[j])))?;
        let chi = JetMatrix::from_fn(n, n, |i, j| {
            let second: Vec<Jet> = tangents[i].iter().map(|c| c.deriv(j)).collect();
            -dot(&second, &normal)
        });
        (metric, chi)
    };
    let rho = sum_squares(&x).scale(0.5);
    Ok(SurfacePoint {
        chart: p.clone(),
        x,
        normal,
        metric,
        chi,
        rho,
        support,
    })
}

impl SurfacePoint {
    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn position(&self) -> Vec<f64> {
        self.x.iter().map(Jet::value).collect()
    }

    pub fn normal_vector(&self) -> Vec<f64> {
        self.normal.iter().map(Jet::value).collect()
    }

    pub fn metric_value(&self) -> DMatrix<f64> {
        self.metric.value()
    }

    pub fn chi_value(&self) -> DMatrix<f64> {
        self.chi.value()
    }

    /// `g⁻¹χ`, the shape operator.
    pub fn shape_operator(&self) -> DMatrix<f64> {
        self.metric_value().try_inverse().expect("metric is invertible") * self.chi_value()
    }

    /// `H = tr(g⁻¹χ)`.
    pub fn mean_curvature(&self) -> f64 {
        self.shape_operator().trace()
    }

    /// `χ_ij χ^ij`.
    pub fn chi_norm_sq(&self) -> f64 {
        let s = self.shape_operator();
        (&s * &s).trace()
    }

    /// Eigenvalues of χ relative to g, ascending.
    pub fn principal_curvatures(&self) -> Result<Vec<f64>> {
        let f = orthonormal_frame(&self.metric_value())?;
        let m = f.transpose() * self.chi_value() * &f;
        let m = (&m + m.transpose()) * 0.5;
        let mut eig: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        Ok(eig)
    }

    pub fn curvature(&self) -> Result<CurvatureState> {
        intrinsic::curvature(&self.metric)
    }

    /// Largest `|∂ᵢX·∂ⱼX − g_ij|`.
    pub fn isometry_residual(&self) -> f64 {
        let n = self.dim();
        let g = self.metric_value();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let gij: f64 = self.x.iter().map(|c| c.deriv(i).value() * c.deriv(j).value()).sum();
                worst = worst.max((gij - g[(i, j)]).abs());
            }
        }
        worst
    }

    /// Largest component of `X_{;ij} + χ_ij N`.
    pub fn normal_identity_residual(&self) -> Result<f64> {
        let n = self.dim();
        let gamma: Vec<f64> = self.metric.truncate(1).christoffel()?.iter().map(Jet::value).collect();
        let chi = self.chi_value();
        let nv = self.normal_vector();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for (a, c) in self.x.iter().enumerate() {
                    let mut v = c.deriv(i).deriv(j).value();
                    for k in 0..n {
                        v -= gamma[(k * n + i) * n + j] * c.deriv(k).value();
                    }
                    v += chi[(i, j)] * nv[a];
                    worst = worst.max(v.abs());
                }
            }
        }
        Ok(worst)
    }

    pub fn normal_length_error(&self) -> f64 {
        (self.normal_vector().iter().map(|v| v * v).sum::<f64>().sqrt() - 1.0).abs()
    }
}

/// Largest `|R_ijkl − (χ_ik χ_jl − χ_il χ_jk)|`.
pub fn gauss_residual(sp: &SurfacePoint) -> Result<f64> {
    Ok(gauss_residual_with(sp, &sp.curvature()?))
}

pub fn gauss_residual_with(sp: &SurfacePoint, cs: &CurvatureState) -> f64 {
    let n = sp.dim();
    let chi = sp.chi_value();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let gauss = chi[(i, k)] * chi[(j, l)] - chi[(i, l)] * chi[(j, k)];
                    worst = worst.max((cs.riemann(i, j, k, l) - gauss).abs());
                }
            }
        }
    }
    worst
}

/// Largest component of `χ_{ij;k} − χ_{ik;j}`.
pub fn codazzi_residual(sp: &SurfacePoint) -> Result<f64> {
    Ok(max_abs(&covariant_antisym(&sp.metric, &sp.chi)?))
}

/// Residuals of the identities tying `ρ = ½|X|²` to the support function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportResiduals {
    /// `max |ρ_{;ij} − g_ij + (X·N)χ_ij|`
    pub hessian: f64,
    /// `|2ρ − |∇ρ|² − (X·N)²|`
    pub gradient: f64,
    /// `|σ₂(λ)^{1/2} − 2^{−1/2}(X·N)R^{1/2}|`; `None` when `R ≤ 0`.
    pub elliptic: Option<f64>,
    /// `σ₁(λ) > 0` and `σ₂(λ) > 0` for the eigenvalues λ of `g − ρ_{;ij}`.
    pub in_gamma2: bool,
}

impl SupportResiduals {
    pub fn max(&self) -> f64 {
        self.hessian.max(self.gradient).max(self.elliptic.unwrap_or(0.0))
    }
}

pub fn support_identities(sp: &SurfacePoint) -> Result<SupportResiduals> {
    support_identities_with(sp, &sp.curvature()?)
}

pub fn support_identities_with(sp: &SurfacePoint, cs: &CurvatureState) -> Result<SupportResiduals> {
    let n = sp.dim();
    let g = sp.metric_value();
    let ginv = g.clone().try_inverse().expect("metric is invertible");
    let chi = sp.chi_value();
    let gamma: Vec<f64> = sp.metric.truncate(1).christoffel()?.iter().map(Jet::value).collect();
    let grad: Vec<f64> = (0..n).map(|k| sp.rho.deriv(k).value()).collect();
    let hess = DMatrix::from_fn(n, n, |i, j| {
        let mut v = sp.rho.deriv(i).deriv(j).value();
        for k in 0..n {
            v -= gamma[(k * n + i) * n + j] * grad[k];
        }
        v
    });
    let xn = sp.support;
    let hessian = max_abs((&hess - &g + &chi * xn).as_slice());
    let mut grad2 = 0.0;
    for i in 0..n {
        for j in 0..n {
            grad2 += ginv[(i, j)] * grad[i] * grad[j];
        }
    }
    let gradient = (2.0 * sp.rho.value() - grad2 - xn * xn).abs();

    let f = orthonormal_frame(&g)?;
    let a = f.transpose() * (&g - &hess) * &f;
    let lambda: Vec<f64> = ((&a + a.transpose()) * 0.5).symmetric_eigen().eigenvalues.iter().copied().collect();
    let s1 = sigma(1, &lambda);
    let s2 = sigma(2, &lambda);
    let elliptic =
        (cs.scalar > 0.0).then(|| (s2.max(0.0).sqrt() - std::f64::consts::FRAC_1_SQRT_2 * xn * cs.scalar.sqrt()).abs());
    Ok(SupportResiduals {
        hessian,
        gradient,
        elliptic,
        in_gamma2: s1 > 0.0 && s2 > 0.0,
    })
}

/// `u ↦ u + ε` on a radial graph.
pub fn epsilon_family(base: &Family, eps: f64) -> Result<Family> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::precondition("epsilon must be positive"));
    }
    match base {
        Family::RadialGraph { dim, profile, epsilon } => Ok(Family::RadialGraph {
            dim: *dim,
            profile: profile.clone(),
            epsilon: epsilon + eps,
        }),
        _ => Err(Error::precondition("epsilon families are defined for radial graphs")),
    }
}

/// Lattice of both charts restricted to the chart disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartGrid {
    pub dim: usize,
    pub resolution: usize,
    pub radius: f64,
}

impl ChartGrid {
    pub fn new(dim: usize, resolution: usize, radius: f64) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::precondition("grid resolution must be >= 2"));
        }
        if !(radius > 1.0 && radius <= DEFAULT_CHART_RADIUS) {
            return Err(Error::precondition(format!(
                "chart radius must lie in (1, {DEFAULT_CHART_RADIUS}]"
            )));
        }
        Ok(ChartGrid { dim, resolution, radius })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.radius / (self.resolution - 1) as f64
    }

    pub fn points(&self) -> Vec<ChartPoint> {
        let h = self.spacing();
        let mut out = Vec::new();
        for chart in [Chart::North, Chart::South] {
            let total = self.resolution.pow(self.dim as u32);
            for flat in 0..total {
                let mut rem = flat;
                let mut coords = vec![0.0; self.dim];
                for c in coords.iter_mut().rev() {
                    // Symmetric about the origin, so the middle node is exactly 0.
                    *c = (2 * (rem % self.resolution)) as f64 - (self.resolution - 1) as f64;
                    *c *= 0.5 * h;
                    rem /= self.resolution;
                }
                let p = ChartPoint::new(chart, coords);
                if p.norm() <= self.radius * (1.0 + 1e-12) {
                    out.push(p);
                }
            }
        }
        out
    }
}

/// Uniform random points of the chart disks, alternating charts.
pub fn sample_points(dim: usize, count: usize, radius: f64, seed: u64) -> Vec<ChartPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let coords: Vec<f64> = (0..dim).map(|_| rng.random_range(-radius..=radius)).collect();
        let p = ChartPoint::new(if out.len() % 2 == 0 { Chart::North } else { Chart::South }, coords);
        if p.norm() <= radius {
            out.push(p);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p3() -> ChartPoint {
        ChartPoint::north(&[0.3, -0.4, 0.5])
    }

    #[test]
    fn unit_sphere_geometry() {
        for n in [2usize, 3] {
            let coords: Vec<f64> = [0.3, -0.4, 0.5][..n].to_vec();
            let sp = evaluate(&Family::sphere(n, 1.0), &ChartPoint::north(&coords)).unwrap();
            assert!((sp.mean_curvature() - n as f64).abs() < 1e-12);
            assert!((sp.chi_value() - sp.metric_value()).abs().max() < 1e-12);
            let cs = sp.curvature().unwrap();
            assert!((cs.scalar - (n * (n - 1)) as f64).abs() < 1e-10);
            assert!((sp.support - 1.0).abs() < 1e-14);
            assert!(sp.normal_length_error() < 1e-12);
        }
    }

    #[test]
    fn ellipsoid_with_unit_axes_is_the_sphere() {
        let a = evaluate(&Family::ellipsoid(&[1.0; 4]), &p3()).unwrap();
        let b = evaluate(&Family::sphere(3, 1.0), &p3()).unwrap();
        assert!((a.metric_value() - b.metric_value()).abs().max() < 1e-12);
        assert!((a.chi_value() - b.chi_value()).abs().max() < 1e-12);
        let c = evaluate(&Family::radial(3, Profile::constant(1.0)), &p3()).unwrap();
        assert!((c.metric_value() - b.metric_value()).abs().max() < 1e-12);
        assert!((c.chi_value() - b.chi_value()).abs().max() < 1e-12);
    }

    #[test]
    fn transition_is_an_involution() {
        let p = ChartPoint::north(&[0.9, 0.7]);
        let q = p.transition();
        assert_eq!(q.chart, Chart::South);
        let a = p.sphere_point();
        let b = q.sphere_point();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-15);
        }
        let back = ChartPoint::from_sphere(Chart::South, &a);
        assert!((back.coords[0] - q.coords[0]).abs() < 1e-14);
    }

    #[test]
    fn chart_overflow_is_rejected() {
        let far = ChartPoint::north(&[1.5, 1.5, 0.0]);
        assert!(matches!(
            evaluate(&Family::sphere(3, 1.0), &far),
            Err(Error::ChartOverflow { .. })
        ));
    }

    #[test]
    fn nonpositive_radial_function_is_rejected() {
        let f = Family::radial(
            2,
            Profile::Quadratic {
                c0: 0.5,
                b: vec![0.0, 0.0, 1.0],
                m: Vec::new(),
            },
        );
        // x̂₃ = −1 at the south pole.
        let e = evaluate(&f, &ChartPoint::new(Chart::South, vec![0.0, 0.0]));
        assert!(matches!(e, Err(Error::Domain(_))));
    }

    #[test]
    fn epsilon_family_of_unit_sphere() {
        let base = Family::radial(3, Profile::constant(1.0));
        let f = epsilon_family(&base, 0.5).unwrap();
        let a = evaluate(&f, &p3()).unwrap();
        let b = evaluate(&Family::sphere(3, 2.0 / 3.0), &p3()).unwrap();
        assert!((a.metric_value() - b.metric_value()).abs().max() < 1e-12);
        assert!((a.chi_value() - b.chi_value()).abs().max() < 1e-12);
        assert!(epsilon_family(&base, 0.0).is_err());
        assert!(epsilon_family(&Family::sphere(3, 1.0), 0.1).is_err());
    }

    #[test]
    fn grid_respects_chart_radius() {
        let grid = ChartGrid::new(2, 5, 1.8).unwrap();
        let pts = grid.points();
        assert!(pts.iter().all(|p| p.norm() <= 1.8 + 1e-12));
        // Of the 5×5 lattice, 13 points lie in the closed disk; two charts.
        assert_eq!(pts.len(), 2 * 13);
        assert!(ChartGrid::new(2, 5, 2.5).is_err());
    }

    #[test]
    fn serde_shape() {
        let f: Family = toml::from_str("kind = \"ellipsoid\"\naxes = [1.0, 1.3, 0.8, 1.1]").unwrap();
        assert_eq!(f, Family::ellipsoid(&[1.0, 1.3, 0.8, 1.1]));
        let g: Family = toml::from_str(
            "kind = \"radial-graph\"\ndim = 2\nprofile = { type = \"quadratic\", c0 = 1.0 }",
        )
        .unwrap();
        assert_eq!(g, Family::radial(2, Profile::constant(1.0)));
    }
}
