//! Mean-curvature and second-fundamental-form estimates evaluated over a
//! sample of surface points.
//!
//! Each report compares a sup (or inf) over the sample on the left with one on
//! the right. A report passes when `rhs − lhs ≥ −tol`, `tol = 1e−7·max(1,
//! |rhs|)`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intrinsic::{covariant_antisym, max_abs};
use crate::surfaces::{
    evaluate, gauss_residual_with, support_identities_with, ChartPoint, Family, SupportResiduals,
};

pub const RELATIVE_TOL: f64 = 1e-7;

/// `C = 4(n−1)^{−2} e^{(n−1)/4}`.
pub fn guanli_constant(n: usize) -> f64 {
    let m = (n - 1) as f64;
    4.0 / (m * m) * (m / 4.0).exp()
}

/// `Cₙ = n/(2√((n−1)(n−2)))`, defined for `n ≥ 3`.
pub fn c2_constant(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::precondition("the second fundamental form bound needs n >= 3"));
    }
    Ok(n as f64 / (2.0 * (((n - 1) * (n - 2)) as f64).sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub tol: f64,
    pub pass: bool,
    pub lhs_at: Option<ChartPoint>,
    pub rhs_at: Option<ChartPoint>,
    pub resolution: Option<usize>,
    pub samples: usize,
    pub constants: BTreeMap<String, f64>,
}

impl BoundReport {
    fn new(name: &str, lhs: Extreme, rhs: Extreme, sample: &Sample) -> Self {
        let tol = RELATIVE_TOL * rhs.value.abs().max(1.0);
        let slack = rhs.value - lhs.value;
        BoundReport {
            name: name.to_string(),
            lhs: lhs.value,
            rhs: rhs.value,
            slack,
            tol,
            pass: slack >= -tol,
            lhs_at: lhs.at.map(|i| sample.points[i].point.clone()),
            rhs_at: rhs.at.map(|i| sample.points[i].point.clone()),
            resolution: sample.resolution,
            samples: sample.points.len(),
            constants: BTreeMap::new(),
        }
    }

    fn with(mut self, key: &str, value: f64) -> Self {
        self.constants.insert(key.to_string(), value);
        self
    }
}

/// Everything the reports need at one surface point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSample {
    pub point: ChartPoint,
    pub position: Vec<f64>,
    pub normal: Vec<f64>,
    pub mean_curvature: f64,
    /// `χ_ij χ^ij`
    pub chi_norm_sq: f64,
    pub scalar: f64,
    pub laplacian_scalar: f64,
    pub ricci_norm: f64,
    pub sectional_min: f64,
    pub sectional_max: f64,
    pub support: f64,
    pub gauss_residual: f64,
    pub codazzi_residual: f64,
    pub support_residuals: SupportResiduals,
}

pub fn sample_point(family: &Family, p: &ChartPoint) -> Result<PointSample> {
    let sp = evaluate(family, p)?;
    let cs = sp.curvature()?;
    Ok(PointSample {
        point: p.clone(),
        position: sp.position(),
        normal: sp.normal_vector(),
        mean_curvature: sp.mean_curvature(),
        chi_norm_sq: sp.chi_norm_sq(),
        scalar: cs.scalar,
        laplacian_scalar: cs.laplacian_scalar.expect("surface metrics carry order-4 jets"),
        ricci_norm: cs.ricci_norm,
        sectional_min: cs.sectional_min,
        sectional_max: cs.sectional_max,
        support: sp.support,
        gauss_residual: gauss_residual_with(&sp, &cs),
        codazzi_residual: max_abs(&covariant_antisym(&sp.metric, &sp.chi)?),
        support_residuals: support_identities_with(&sp, &cs)?,
    })
}

/// Point samples of a family, evaluated in parallel; the output order follows
/// `points`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub points: Vec<PointSample>,
    pub resolution: Option<usize>,
}

impl Sample {
    pub fn evaluate(family: &Family, points: &[ChartPoint], resolution: Option<usize>) -> Result<Self> {
        let samples: Vec<PointSample> = points
            .par_iter()
            .map(|p| sample_point(family, p))
            .collect::<Result<_>>()?;
        Ok(Sample {
            points: samples,
            resolution,
        })
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, |p| p.point.dim())
    }

    fn sup(&self, f: impl Fn(&PointSample) -> f64) -> Extreme {
        self.fold(f, |a, b| b > a)
    }

    fn inf(&self, f: impl Fn(&PointSample) -> f64) -> Extreme {
        self.fold(f, |a, b| b < a)
    }

    fn fold(&self, f: impl Fn(&PointSample) -> f64, better: impl Fn(f64, f64) -> bool) -> Extreme {
        let mut best = Extreme { value: f64::NAN, at: None };
        for (i, p) in self.points.iter().enumerate() {
            let v = f(p);
            if best.at.is_none() || better(best.value, v) {
                best = Extreme { value: v, at: Some(i) };
            }
        }
        best
    }

    fn require_positive_scalar(&self) -> Result<()> {
        if let Some(p) = self.points.iter().find(|p| !(p.scalar > 0.0)) {
            return Err(Error::domain(format!(
                "scalar curvature {} is not positive at {:?} {:?}",
                p.scalar, p.point.chart, p.point.coords
            )));
        }
        Ok(())
    }

    fn require_nonempty(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::precondition("empty sample"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Extreme {
    value: f64,
    at: Option<usize>,
}

/// `sup H² ≤ sup(2R − ΔR/R)`.
pub fn weyl_report(sample: &Sample) -> Result<BoundReport> {
    sample.require_nonempty()?;
    sample.require_positive_scalar()?;
    let lhs = sample.sup(|p| p.mean_curvature * p.mean_curvature);
    let rhs = sample.sup(|p| 2.0 * p.scalar - p.laplacian_scalar / p.scalar);
    Ok(BoundReport::new("weyl", lhs, rhs, sample))
}

/// `sup H² ≤ C d² sup(2R² − ΔR + (n−1)²R/(64d²))`.
pub fn guanli_report(sample: &Sample, diameter: f64) -> Result<BoundReport> {
    sample.require_nonempty()?;
    if !(diameter > 0.0) {
        return Err(Error::precondition("diameter must be positive"));
    }
    let n = sample.dim();
    let c = guanli_constant(n);
    let m2 = ((n - 1) * (n - 1)) as f64;
    let d2 = diameter * diameter;
    let lhs = sample.sup(|p| p.mean_curvature * p.mean_curvature);
    let inner = sample.sup(|p| 2.0 * p.scalar * p.scalar - p.laplacian_scalar + m2 * p.scalar / (64.0 * d2));
    let rhs = Extreme {
        value: c * d2 * inner.value,
        at: inner.at,
    };
    Ok(BoundReport::new("guanli", lhs, rhs, sample)
        .with("C", c)
        .with("d", diameter)
        .with("n", n as f64))
}

/// `sup ‖χ‖ ≤ Cₙ Λ κ^{−1/2}` with `Λ = sup |Ric|` and `κ = inf` sectional.
pub fn c2bound_report(sample: &Sample) -> Result<BoundReport> {
    sample.require_nonempty()?;
    let n = sample.dim();
    let cn = c2_constant(n)?;
    let kappa = sample.inf(|p| p.sectional_min);
    if !(kappa.value > 0.0) {
        let at = &sample.points[kappa.at.unwrap()].point;
        return Err(Error::domain(format!(
            "minimum sectional curvature {} is not positive at {:?} {:?}",
            kappa.value, at.chart, at.coords
        )));
    }
    let lambda = sample.sup(|p| p.ricci_norm);
    let lhs = sample.sup(|p| p.chi_norm_sq.max(0.0).sqrt());
    let rhs = Extreme {
        value: cn * lambda.value / kappa.value.sqrt(),
        at: lambda.at,
    };
    Ok(BoundReport::new("c2bound", lhs, rhs, sample)
        .with("C_n", cn)
        .with("Lambda", lambda.value)
        .with("kappa", kappa.value))
}

/// `sup χ_ij χ^ij` against `sup H²` and, when `R > 0` everywhere, against the
/// right side of the Weyl-type bound.
pub fn second_deriv_report(sample: &Sample) -> Result<BoundReport> {
    sample.require_nonempty()?;
    let lhs = sample.sup(|p| p.chi_norm_sq);
    let h2 = sample.sup(|p| p.mean_curvature * p.mean_curvature);
    let pointwise = sample.sup(|p| p.chi_norm_sq - p.mean_curvature * p.mean_curvature);
    let mut rhs = h2;
    let mut report_weyl = None;
    if sample.require_positive_scalar().is_ok() {
        let w = weyl_report(sample)?;
        report_weyl = Some(w.rhs);
        if w.rhs < rhs.value {
            rhs = Extreme {
                value: w.rhs,
                at: sample.sup(|p| 2.0 * p.scalar - p.laplacian_scalar / p.scalar).at,
            };
        }
    }
    let mut report = BoundReport::new("second-deriv", lhs, rhs, sample)
        .with("sup_H2", h2.value)
        .with("max_pointwise_excess", pointwise.value);
    if let Some(w) = report_weyl {
        report = report.with("weyl_rhs", w);
    }
    // χ_ij χ^ij ≤ H² must also hold point by point.
    report.pass &= pointwise.value <= RELATIVE_TOL * h2.value.max(1.0);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportFloor {
    pub value: f64,
    pub x0: Vec<f64>,
    pub at: ChartPoint,
}

/// `min (X − X₀)·N`; `X₀` defaults to the centroid of the sampled positions.
pub fn support_floor(sample: &Sample, x0: Option<&[f64]>) -> Result<SupportFloor> {
    sample.require_nonempty()?;
    let dim = sample.points[0].position.len();
    let x0: Vec<f64> = match x0 {
        Some(v) if v.len() == dim => v.to_vec(),
        Some(v) => {
            return Err(Error::precondition(format!("X0 has {} entries, expected {dim}", v.len())));
        }
        None => {
            let mut c = vec![0.0; dim];
            for p in sample.points.iter() {
                for (ci, xi) in c.iter_mut().zip(&p.position) {
                    *ci += xi;
                }
            }
            c.iter().map(|v| v / sample.points.len() as f64).collect()
        }
    };
    let floor = sample.inf(|p| {
        p.position
            .iter()
            .zip(&x0)
            .zip(&p.normal)
            .map(|((x, o), n)| (x - o) * n)
            .sum()
    });
    if !(floor.value > 0.0) {
        return Err(Error::domain(format!(
            "X0 = {x0:?} is not inside the body: support floor {}",
            floor.value
        )));
    }
    Ok(SupportFloor {
        value: floor.value,
        x0,
        at: sample.points[floor.at.unwrap()].point.clone(),
    })
}

/// Largest pointwise residual of one identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualSummary {
    pub name: String,
    pub max: f64,
    pub at: Option<ChartPoint>,
    pub tol: f64,
    pub pass: bool,
    pub samples: usize,
}

pub fn residual_summary(
    name: &str,
    sample: &Sample,
    tol: f64,
    f: impl Fn(&PointSample) -> f64,
) -> ResidualSummary {
    let worst = sample.sup(f);
    ResidualSummary {
        name: name.to_string(),
        max: worst.value,
        at: worst.at.map(|i| sample.points[i].point.clone()),
        tol,
        pass: worst.at.is_none() || worst.value <= tol,
        samples: sample.points.len(),
    }
}
