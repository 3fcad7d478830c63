//! Recovering a hypersurface from its intrinsic geometry: solve the
//! contracted Gauss equation for `χ`, test the Codazzi integrability
//! condition, and integrate the frame system back to an embedding.

mod align;
mod reconstruct;

pub use align::{align_rigid, Alignment};
pub use reconstruct::{reconstruct, ChiModel, FrameState, PathPlan, Reconstruction};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intrinsic::{covariant_antisym, curvature_jets, tensor3_norm, MetricJet, MetricSource};
use crate::jets::{Jet, JetMatrix};
use crate::matmap::{cone_report, phi, phi_inverse, SymMatrix};
use crate::surfaces::{ChartPoint, Family};

/// Per-point residual gate for `tr(χ)χ − χ² = Ric` in the orthonormal frame,
/// relative to `max(1, ‖Ric‖)`.
pub const SOLVER_TOLERANCE: f64 = 1e-9;

/// Lower bound of the Codazzi threshold; calibration on analytic families
/// can produce residuals at the rounding level.
pub const MIN_THRESHOLD: f64 = 1e-9;

/// A constant diagonal tensor added to the Ricci field in coordinates:
/// `Ric + amplitude·diag(diagonal)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RicciPerturbation {
    pub amplitude: f64,
    pub diagonal: Vec<f64>,
}

impl RicciPerturbation {
    fn apply(&self, ricci: &JetMatrix) -> Result<JetMatrix> {
        if self.diagonal.len() != ricci.rows() {
            return Err(Error::precondition("perturbation diagonal has the wrong length"));
        }
        Ok(JetMatrix::from_fn(ricci.rows(), ricci.cols(), |i, j| {
            let r = *ricci.get(i, j);
            if i == j {
                r.add_scalar(self.amplitude * self.diagonal[i])
            } else {
                r
            }
        }))
    }
}

/// Metric and Ricci data at one chart point.
#[derive(Debug, Clone)]
pub struct FieldPoint {
    pub point: ChartPoint,
    /// Metric jet of order 3.
    pub metric: MetricJet,
    /// Ricci tensor with first derivatives.
    pub ricci: JetMatrix,
}

impl FieldPoint {
    pub fn from_source(source: &dyn MetricSource, p: &ChartPoint) -> Result<Self> {
        let metric = source.metric_jet(p, 3)?;
        let ricci = curvature_jets(&metric)?.ricci;
        Ok(FieldPoint {
            point: p.clone(),
            metric,
            ricci,
        })
    }
}

/// Intrinsic data on a set of chart points.
#[derive(Debug, Clone)]
pub struct IntrinsicField {
    pub dim: usize,
    pub points: Vec<FieldPoint>,
    pub perturbation: Option<RicciPerturbation>,
}

impl IntrinsicField {
    pub fn from_source(source: &dyn MetricSource, points: &[ChartPoint]) -> Result<Self> {
        let points = points
            .par_iter()
            .map(|p| FieldPoint::from_source(source, p))
            .collect::<Result<Vec<_>>>()?;
        Ok(IntrinsicField {
            dim: source.dim(),
            points,
            perturbation: None,
        })
    }

    /// The same field with its Ricci tensor replaced by `Ric + amplitude·diag`.
    pub fn perturbed(&self, perturbation: RicciPerturbation) -> Result<Self> {
        let points = self
            .points
            .iter()
            .map(|fp| {
                Ok(FieldPoint {
                    point: fp.point.clone(),
                    metric: fp.metric.clone(),
                    ricci: perturbation.apply(&fp.ricci)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(IntrinsicField {
            dim: self.dim,
            points,
            perturbation: Some(perturbation),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// How the g-orthonormal frame is chosen before inverting `Φ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrameChoice {
    /// `F = L^{-T}` for `g = L Lᵀ`.
    #[default]
    Cholesky,
    /// `F = g^{-1/2}`.
    SymmetricSqrt,
}

/// A matrix `F` with `Fᵀ g F = I`.
pub fn frame_matrix(g: &DMatrix<f64>, choice: FrameChoice) -> Result<DMatrix<f64>> {
    match choice {
        FrameChoice::Cholesky => crate::intrinsic::orthonormal_frame(g),
        FrameChoice::SymmetricSqrt => {
            let eig = SymMatrix::symmetrize(g)?.eigen().clone();
            if eig.values.iter().any(|&v| v <= 0.0) {
                return Err(Error::domain("metric is not positive definite"));
            }
            let d = DMatrix::from_diagonal(&DVector::from_iterator(
                eig.values.len(),
                eig.values.iter().map(|v| 1.0 / v.sqrt()),
            ));
            Ok(&eig.vectors * d * eig.vectors.transpose())
        }
    }
}

/// Solution of the contracted Gauss equation at one point.
#[derive(Debug, Clone)]
pub struct ChiPoint {
    pub point: ChartPoint,
    /// Coordinate `χ` with first derivatives.
    pub chi: JetMatrix,
    /// Ricci in the orthonormal frame.
    pub frame_ricci: SymMatrix,
    /// `χ` in the orthonormal frame.
    pub frame_chi: SymMatrix,
    pub eps_gap: f64,
    /// `‖Φ(frame χ) − frame Ricci‖`.
    pub residual: f64,
}

impl ChiPoint {
    pub fn chi_value(&self) -> DMatrix<f64> {
        self.chi.value()
    }
}

#[derive(Debug, Clone)]
pub struct ChiField {
    pub frame: FrameChoice,
    pub points: Vec<ChiPoint>,
}

impl ChiField {
    pub fn max_residual(&self) -> f64 {
        self.points.iter().map(|p| p.residual).fold(0.0, f64::max)
    }

    pub fn min_eps_gap(&self) -> f64 {
        self.points.iter().map(|p| p.eps_gap).fold(f64::INFINITY, f64::min)
    }
}

/// Solves `tr_g(χ)χ − χ g⁻¹ χ = Ric` at every point of the field.
pub fn solve_contracted_gauss(field: &IntrinsicField, frame: FrameChoice) -> Result<ChiField> {
    if field.dim < 3 {
        return Err(Error::precondition("the contracted Gauss equation determines chi only for n >= 3"));
    }
    let points = field
        .points
        .par_iter()
        .map(|fp| solve_point(fp, frame))
        .collect::<Result<Vec<_>>>()?;
    Ok(ChiField { frame, points })
}

/// Pointwise solve; the first derivatives of `χ` follow from one Newton
/// step on jets, i.e. from the linearized equation.
pub fn solve_point(fp: &FieldPoint, frame: FrameChoice) -> Result<ChiPoint> {
    let n = fp.metric.dim();
    let g = fp.metric.value();
    let ricci = fp.ricci.value();
    let (chi0, frame_chi, frame_ricci, eps_gap, residual) = solve_value(&g, &ricci, frame, &fp.point)?;

    let gj = fp.metric.components().truncate(1);
    let ginv = gj.inverse()?;
    let chi_const = JetMatrix::from_fn(n, n, |i, j| Jet::constant(chi0[(i, j)], n, 1));
    let model = contracted_gauss(&ginv, &chi_const);
    let ric1 = fp.ricci.truncate(1);
    let defect = JetMatrix::from_fn(n, n, |i, j| ric1.get(i, j) - model.get(i, j));
    let op = linearization(&g.clone().try_inverse().expect("metric is invertible"), &chi0)?;

    let mut chi = JetMatrix::from_fn(n, n, |_, _| Jet::zero(n, 1));
    let correction = solve_sym(&op, &defect.value(), n);
    let slopes: Vec<DMatrix<f64>> = (0..n).map(|k| solve_sym(&op, &defect.deriv(k).value(), n)).collect();
    for i in 0..n {
        for j in 0..n {
            let mut c = Jet::constant(chi0[(i, j)] + correction[(i, j)], n, 1);
            for (k, s) in slopes.iter().enumerate() {
                let mut e = vec![0u8; n];
                e[k] = 1;
                c.set_coeff(&e, s[(i, j)]);
            }
            chi.set(i, j, c);
        }
    }
    Ok(ChiPoint {
        point: fp.point.clone(),
        chi,
        frame_ricci,
        frame_chi,
        eps_gap,
        residual,
    })
}

/// Coordinate `χ` for coordinate metric and Ricci values.
pub fn solve_value(
    g: &DMatrix<f64>,
    ricci: &DMatrix<f64>,
    frame: FrameChoice,
    at: &ChartPoint,
) -> Result<(DMatrix<f64>, SymMatrix, SymMatrix, f64, f64)> {
    let f = frame_matrix(g, frame)?;
    let b = SymMatrix::symmetrize(&(f.transpose() * ricci * &f))?;
    let report = cone_report(&b);
    if !report.member() {
        return Err(Error::Obstruction {
            location: format!("{:?} {:?}", at.chart, at.coords),
            eps_gap: report.eps_gap,
        });
    }
    let a = phi_inverse(&b, SOLVER_TOLERANCE)?;
    let residual = phi(&a).sub(&b)?.norm();
    if residual > SOLVER_TOLERANCE * b.norm().max(1.0) {
        return Err(Error::Convergence { iterations: 0, residual });
    }
    let finv = f.try_inverse().ok_or_else(|| Error::domain("singular frame"))?;
    let chi = finv.transpose() * a.to_dense() * &finv;
    let chi = (&chi + chi.transpose()) * 0.5;
    Ok((chi, a, b, report.eps_gap, residual))
}

/// `tr(g⁻¹χ)χ − χ g⁻¹ χ`.
fn contracted_gauss(ginv: &JetMatrix, chi: &JetMatrix) -> JetMatrix {
    let h = ginv.matmul(chi).trace();
    let sq = chi.matmul(ginv).matmul(chi);
    JetMatrix::from_fn(chi.rows(), chi.cols(), |i, j| h * chi.get(i, j) - sq.get(i, j))
}

/// Matrix of `C ↦ tr(g⁻¹C)χ + tr(g⁻¹χ)C − C g⁻¹ χ − χ g⁻¹ C` on the
/// symmetric basis `(i ≤ j)`.
fn linearization(ginv: &DMatrix<f64>, chi: &DMatrix<f64>) -> Result<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>> {
    let n = chi.nrows();
    let basis = sym_basis(n);
    let h = (ginv * chi).trace();
    let m = DMatrix::from_fn(basis.len(), basis.len(), |row, col| {
        let (a, b) = basis[col];
        let mut c = DMatrix::zeros(n, n);
        c[(a, b)] = 1.0;
        c[(b, a)] = 1.0;
        let out = chi * (ginv * &c).trace() + &c * h - &c * ginv * chi - chi * ginv * &c;
        let (i, j) = basis[row];
        out[(i, j)]
    });
    let lu = m.lu();
    if lu.determinant().abs() < 1e-300 {
        return Err(Error::domain("linearized contracted Gauss operator is singular"));
    }
    Ok(lu)
}

fn solve_sym(op: &nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>, rhs: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    let basis = sym_basis(n);
    let v = DVector::from_iterator(basis.len(), basis.iter().map(|&(i, j)| 0.5 * (rhs[(i, j)] + rhs[(j, i)])));
    let x = op.solve(&v).expect("operator is invertible");
    let mut out = DMatrix::zeros(n, n);
    for (k, &(i, j)) in basis.iter().enumerate() {
        // Off-diagonal unknowns multiply E_ij + E_ji.
        out[(i, j)] = x[k];
        out[(j, i)] = x[k];
    }
    out
}

fn sym_basis(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect()
}

/// Codazzi verdict for a solved field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embeddability {
    /// `‖χ_{ij;k} − χ_{ik;j}‖_g` per point.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub at: Option<ChartPoint>,
    pub threshold: f64,
    pub embeddable: bool,
}

/// Codazzi residual of the solved `χ` against a threshold.
pub fn embeddability_check(field: &IntrinsicField, chi: &ChiField, threshold: f64) -> Result<Embeddability> {
    if field.dim != 3 {
        return Err(Error::precondition("embeddability check is implemented for n = 3"));
    }
    if field.points.len() != chi.points.len() {
        return Err(Error::precondition("field and chi sample different points"));
    }
    let residuals = codazzi_residuals(field, chi)?;
    let (mut max_residual, mut at) = (0.0, None);
    for (r, p) in residuals.iter().zip(&field.points) {
        if *r > max_residual || at.is_none() {
            max_residual = *r;
            at = Some(p.point.clone());
        }
    }
    Ok(Embeddability {
        residuals,
        max_residual,
        at,
        threshold,
        embeddable: max_residual <= threshold,
    })
}

fn codazzi_residuals(field: &IntrinsicField, chi: &ChiField) -> Result<Vec<f64>> {
    field
        .points
        .par_iter()
        .zip(&chi.points)
        .map(|(fp, cp)| {
            let a = covariant_antisym(&fp.metric, &cp.chi)?;
            Ok(tensor3_norm(&a, &fp.metric.value()))
        })
        .collect()
}

/// Analytic embedded families used to calibrate the Codazzi threshold.
pub fn calibration_families() -> Vec<Family> {
    vec![Family::sphere(3, 1.0), Family::ellipsoid(&[1.0, 1.2, 0.9, 1.05])]
}

/// `max(10 × the largest Codazzi residual of the calibration families at
/// the given points, MIN_THRESHOLD)`.
pub fn calibrate_threshold(points: &[ChartPoint], frame: FrameChoice) -> Result<f64> {
    let mut baseline: f64 = 0.0;
    for family in calibration_families() {
        let field = IntrinsicField::from_source(&family, points)?;
        let chi = solve_contracted_gauss(&field, frame)?;
        let worst = codazzi_residuals(&field, &chi)?.into_iter().fold(0.0, f64::max);
        baseline = baseline.max(worst);
    }
    Ok((10.0 * baseline).max(MIN_THRESHOLD))
}
