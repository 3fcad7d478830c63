use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{solve_value, FrameChoice, RicciPerturbation};
use crate::error::{Error, Result};
use crate::intrinsic::{curvature_jets, MetricSource};
use crate::surfaces::{evaluate_order, ChartPoint, Family};

/// Lattice offset, integrated frame and metric at one node of a line.
type LineNode = (Vec<i64>, FrameState, DMatrix<f64>);

/// Largest tolerated violation of `Eᵢ·Eⱼ = g_ij`, `Eᵢ·N = 0`, `|N| = 1`.
pub const DRIFT_LIMIT: f64 = 1e-3;

/// Position, tangent frame `Eᵢ = ∂ᵢX` and unit normal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameState {
    pub x: Vec<f64>,
    pub e: Vec<Vec<f64>>,
    pub normal: Vec<f64>,
}

impl FrameState {
    /// `X = 0`, `Eⱼ` the rows of the Cholesky factor of `g` padded with a
    /// zero, `N` the last basis vector.
    pub fn seed(g: &DMatrix<f64>) -> Result<Self> {
        let n = g.nrows();
        let l = g
            .clone()
            .cholesky()
            .ok_or_else(|| Error::domain("seed metric is not positive definite"))?
            .l();
        let e = (0..n)
            .map(|j| {
                let mut v: Vec<f64> = l.row(j).iter().copied().collect();
                v.push(0.0);
                v
            })
            .collect();
        let mut normal = vec![0.0; n + 1];
        normal[n] = 1.0;
        Ok(FrameState {
            x: vec![0.0; n + 1],
            e,
            normal,
        })
    }

    /// Largest violation of the frame relations against `g`.
    pub fn drift(&self, g: &DMatrix<f64>) -> f64 {
        let n = self.e.len();
        let mut worst = (dot(&self.normal, &self.normal) - 1.0).abs();
        for i in 0..n {
            worst = worst.max(dot(&self.e[i], &self.normal).abs());
        }
        worst.max(self.gram_error(g))
    }

    /// `sup |Eᵢ·Eⱼ − g_ij|`.
    pub fn gram_error(&self, g: &DMatrix<f64>) -> f64 {
        let n = self.e.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((dot(&self.e[i], &self.e[j]) - g[(i, j)]).abs());
            }
        }
        worst
    }

    fn axpy(&self, h: f64, d: &FrameState) -> FrameState {
        let add = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + h * y).collect::<Vec<f64>>();
        FrameState {
            x: add(&self.x, &d.x),
            e: self.e.iter().zip(&d.e).map(|(a, b)| add(a, b)).collect(),
            normal: add(&self.normal, &d.normal),
        }
    }
}

/// Cubic lattice `center + h·k`, `k ∈ {−m..m}ⁿ`, `m·h = half_width`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathPlan {
    pub center: ChartPoint,
    pub half_width: f64,
    pub step: f64,
}

impl PathPlan {
    pub fn steps(&self) -> Result<usize> {
        if !(self.step > 0.0 && self.half_width > 0.0) {
            return Err(Error::precondition("step and half width must be positive"));
        }
        let m = (self.half_width / self.step).round();
        if m < 1.0 || (m * self.step - self.half_width).abs() > 1e-9 * self.half_width {
            return Err(Error::precondition("half width must be a whole number of steps"));
        }
        Ok(m as usize)
    }

    /// The same lattice extent with half the step.
    pub fn refined(&self) -> PathPlan {
        PathPlan {
            step: 0.5 * self.step,
            ..self.clone()
        }
    }

    fn point(&self, k: &[i64]) -> ChartPoint {
        let coords = self.center.coords.iter().zip(k).map(|(c, &i)| c + i as f64 * self.step).collect();
        ChartPoint::new(self.center.chart, coords)
    }
}

/// Where the second fundamental form comes from off the lattice.
#[derive(Debug, Clone)]
pub enum ChiModel<'a> {
    /// The second fundamental form of an embedded family.
    Embedded(&'a Family),
    /// Pointwise solution of the contracted Gauss equation for the metric
    /// source, optionally with a perturbed Ricci tensor.
    Solved {
        perturbation: Option<RicciPerturbation>,
        frame: FrameChoice,
    },
    /// Another model plus `amplitude·x_axis` in the `(0, 0)` entry.
    Skewed {
        inner: Box<ChiModel<'a>>,
        amplitude: f64,
        axis: usize,
    },
}

impl ChiModel<'_> {
    pub fn chi_at(&self, source: &dyn MetricSource, p: &ChartPoint) -> Result<DMatrix<f64>> {
        match self {
            ChiModel::Embedded(family) => Ok(evaluate_order(family, p, 2)?.chi_value()),
            ChiModel::Solved { perturbation, frame } => {
                let mj = source.metric_jet(p, 2)?;
                let mut ricci = curvature_jets(&mj)?.ricci;
                if let Some(pert) = perturbation {
                    ricci = pert.apply(&ricci)?;
                }
                Ok(solve_value(&mj.value(), &ricci.value(), *frame, p)?.0)
            }
            ChiModel::Skewed { inner, amplitude, axis } => {
                let mut chi = inner.chi_at(source, p)?;
                let x = *p.coords.get(*axis).ok_or_else(|| Error::precondition("skew axis out of range"))?;
                chi[(0, 0)] += amplitude * x;
                Ok(chi)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub plan: PathPlan,
    pub steps_per_axis: usize,
    /// Lattice points in lexicographic order of their offsets.
    pub points: Vec<ChartPoint>,
    /// Reconstructed positions from the axis-ascending sweep.
    pub positions: Vec<Vec<f64>>,
    /// `sup |Eᵢ·Eⱼ − g_ij|` over the lattice.
    pub isometry_residual: f64,
    /// `sup |X − X'|` between axis-ascending and axis-descending sweeps.
    pub holonomy_residual: f64,
}

impl Reconstruction {
    /// Rigid alignment of the reconstruction onto an embedded family.
    pub fn compare(&self, family: &Family) -> Result<super::Alignment> {
        let truth = self.points.iter().map(|p| family.position(p)).collect::<Result<Vec<_>>>()?;
        super::align_rigid(&self.positions, &truth)
    }
}

/// Local data the frame system needs at a point.
struct Local {
    g: DMatrix<f64>,
    /// `Γ^k_ij` at `(k·n + i)·n + j`.
    gamma: Vec<f64>,
    chi: DMatrix<f64>,
    /// `χ_i^j = χ_ik g^kj`.
    mixed: DMatrix<f64>,
}

struct Integrator<'a, 'b> {
    source: &'a dyn MetricSource,
    model: &'a ChiModel<'b>,
}

impl Integrator<'_, '_> {
    fn local(&self, p: &ChartPoint) -> Result<Local> {
        let mj = self.source.metric_jet(p, 1)?;
        let gamma = mj.christoffel()?.iter().map(|j| j.value()).collect();
        let g = mj.value();
        let chi = self.model.chi_at(self.source, p)?;
        let ginv = g.clone().try_inverse().ok_or_else(|| Error::domain("singular metric"))?;
        let mixed = &chi * ginv;
        Ok(Local { g, gamma, chi, mixed })
    }

    /// Right-hand side along coordinate axis `a`.
    fn rhs(&self, a: usize, loc: &Local, s: &FrameState) -> FrameState {
        let n = s.e.len();
        let m = s.x.len();
        let e = (0..n)
            .map(|j| {
                (0..m)
                    .map(|c| {
                        let mut v = -loc.chi[(a, j)] * s.normal[c];
                        for k in 0..n {
                            v += loc.gamma[(k * n + a) * n + j] * s.e[k][c];
                        }
                        v
                    })
                    .collect()
            })
            .collect();
        let normal = (0..m).map(|c| (0..n).map(|j| loc.mixed[(a, j)] * s.e[j][c]).sum()).collect();
        FrameState {
            x: s.e[a].clone(),
            e,
            normal,
        }
    }

    /// Integrates from offset `start` along `axis` in direction `dir` for
    /// `count` steps; returns the offset, state and metric of each new node.
    fn line(
        &self,
        plan: &PathPlan,
        start: &[i64],
        state: &FrameState,
        axis: usize,
        dir: i64,
        count: usize,
    ) -> Result<Vec<LineNode>> {
        let h = dir as f64 * plan.step;
        let mut k = start.to_vec();
        let mut s = state.clone();
        let mut here = self.local(&plan.point(&k))?;
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let mut mid_offset = plan.point(&k);
            mid_offset.coords[axis] += 0.5 * h;
            let mid = self.local(&mid_offset)?;
            k[axis] += dir;
            let next = self.local(&plan.point(&k))?;
            let k1 = self.rhs(axis, &here, &s);
            let k2 = self.rhs(axis, &mid, &s.axpy(0.5 * h, &k1));
            let k3 = self.rhs(axis, &mid, &s.axpy(0.5 * h, &k2));
            let k4 = self.rhs(axis, &next, &s.axpy(h, &k3));
            s = s
                .axpy(h / 6.0, &k1)
                .axpy(h / 3.0, &k2)
                .axpy(h / 3.0, &k3)
                .axpy(h / 6.0, &k4);
            let drift = s.drift(&next.g);
            if !(drift <= DRIFT_LIMIT) {
                return Err(Error::FrameDrift {
                    drift,
                    limit: DRIFT_LIMIT,
                    node: k.clone(),
                });
            }
            out.push((k.clone(), s.clone(), next.g.clone()));
            here = next;
        }
        Ok(out)
    }

    /// Fills the lattice sweeping the axes in `order`.
    fn sweep(&self, plan: &PathPlan, seed: &FrameState, m: usize, order: &[usize]) -> Result<Vec<(FrameState, f64)>> {
        let n = order.len();
        let side = 2 * m + 1;
        let index = |k: &[i64]| k.iter().fold(0usize, |acc, &i| acc * side + (i + m as i64) as usize);
        let mut states: Vec<Option<(FrameState, f64)>> = vec![None; side.pow(n as u32)];
        let origin = vec![0i64; n];
        let g0 = self.source.metric_value(&plan.point(&origin))?;
        states[index(&origin)] = Some((seed.clone(), seed.gram_error(&g0)));
        let mut filled = vec![origin];
        for &axis in order {
            let lines: Vec<Vec<LineNode>> = filled
                .par_iter()
                .flat_map_iter(|k| [(k.clone(), 1i64), (k.clone(), -1i64)])
                .map(|(k, dir)| {
                    let s = &states[index(&k)].as_ref().expect("seeded node").0;
                    self.line(plan, &k, s, axis, dir, m)
                })
                .collect::<Result<_>>()?;
            for (k, s, g) in lines.into_iter().flatten() {
                let err = s.gram_error(&g);
                let slot = index(&k);
                states[slot] = Some((s, err));
                filled.push(k);
            }
        }
        Ok(states.into_iter().map(|s| s.expect("lattice is filled")).collect())
    }
}

/// Integrates the frame system `∂ᵢX = Eᵢ`, `∂ᵢEⱼ = Γ^k_ij E_k − χ_ij N`,
/// `∂ᵢN = χᵢ^j Eⱼ` over the lattice with classical RK4, sweeping axes in
/// ascending order; the descending sweep measures path dependence.
pub fn reconstruct(
    source: &dyn MetricSource,
    chi: &ChiModel<'_>,
    seed: &FrameState,
    plan: &PathPlan,
) -> Result<Reconstruction> {
    let n = source.dim();
    if !(2..=3).contains(&n) {
        return Err(Error::precondition("reconstruction is implemented for n = 2, 3"));
    }
    if plan.center.dim() != n || seed.e.len() != n || seed.x.len() != n + 1 {
        return Err(Error::precondition("seed, plan and metric dimensions differ"));
    }
    let g0 = source.metric_value(&plan.center)?;
    let seed_drift = seed.drift(&g0);
    if seed_drift > 1e-12 {
        return Err(Error::precondition(format!(
            "seed frame violates its relations by {seed_drift:e}"
        )));
    }
    let m = plan.steps()?;
    let integrator = Integrator { source, model: chi };
    let ascending: Vec<usize> = (0..n).collect();
    let descending: Vec<usize> = (0..n).rev().collect();
    let forward = integrator.sweep(plan, seed, m, &ascending)?;
    let backward = integrator.sweep(plan, seed, m, &descending)?;

    let side = 2 * m + 1;
    let points = (0..side.pow(n as u32))
        .map(|flat| {
            let mut rem = flat;
            let mut k = vec![0i64; n];
            for c in k.iter_mut().rev() {
                *c = (rem % side) as i64 - m as i64;
                rem /= side;
            }
            plan.point(&k)
        })
        .collect();
    let holonomy_residual = forward
        .iter()
        .zip(&backward)
        .map(|(a, b)| a.0.x.iter().zip(&b.0.x).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let isometry_residual = forward.iter().map(|s| s.1).fold(0.0, f64::max);
    Ok(Reconstruction {
        plan: plan.clone(),
        steps_per_axis: m,
        points,
        positions: forward.into_iter().map(|s| s.0.x).collect(),
        isometry_residual,
        holonomy_residual,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
