use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::CurvatureState;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionalExtremes {
    pub min: f64,
    pub max: f64,
    /// True when the extremes are exact rather than sampled.
    pub exact: bool,
}

/// Columns form a g-orthonormal basis: `F = L^{-T}` for `g = L Lᵀ`.
pub fn orthonormal_frame(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let chol = g
        .clone()
        .cholesky()
        .ok_or_else(|| Error::domain("metric is not positive definite"))?;
    let linv = chol
        .l()
        .try_inverse()
        .ok_or_else(|| Error::domain("singular Cholesky factor"))?;
    Ok(linv.transpose())
}

/// Riemann tensor in a g-orthonormal frame.
pub fn frame_riemann(cs: &CurvatureState) -> Result<Vec<f64>> {
    let n = cs.dim;
    let f = orthonormal_frame(&cs.metric_matrix())?;
    let mut t = cs.riemann.clone();
    // Contract one slot at a time with the frame.
    for axis in 0..4 {
        let mut next = vec![0.0; t.len()];
        let stride = n.pow(3 - axis as u32);
        for (idx, slot) in next.iter_mut().enumerate() {
            let a = (idx / stride) % n;
            let base = idx - a * stride;
            let mut acc = 0.0;
            for m in 0..n {
                acc += f[(m, a)] * t[base + m * stride];
            }
            *slot = acc;
        }
        t = next;
    }
    Ok(t)
}

fn plane_pairs(n: usize) -> Vec<(usize, usize)> {
    if n == 3 {
        // Hodge-dual ordering: e₁∧e₂ ↔ e₀, e₂∧e₀ ↔ e₁, e₀∧e₁ ↔ e₂.
        return vec![(1, 2), (2, 0), (0, 1)];
    }
    let mut pairs = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            pairs.push((a, b));
        }
    }
    pairs
}

/// Curvature operator on 2-vectors in an orthonormal frame, with the sign
/// making its diagonal the sectional curvatures of frame planes.
pub fn curvature_operator(cs: &CurvatureState) -> Result<DMatrix<f64>> {
    let n = cs.dim;
    let r = frame_riemann(cs)?;
    let at = |a: usize, b: usize, c: usize, d: usize| r[((a * n + b) * n + c) * n + d];
    let pairs = plane_pairs(n);
    let m = pairs.len();
    Ok(DMatrix::from_fn(m, m, |p, q| {
        let (a, b) = pairs[p];
        let (c, d) = pairs[q];
        // ⟨R(e_a∧e_b), e_c∧e_d⟩ = R_{a b c d} in the convention R_abab = K.
        0.5 * (at(a, b, c, d) + at(c, d, a, b))
    }))
}

/// Sectional curvature of the plane spanned by coordinate vectors `u, v`.
pub fn sectional_curvature(cs: &CurvatureState, u: &[f64], v: &[f64]) -> f64 {
    let n = cs.dim;
    let g = cs.metric_matrix();
    let mut num = 0.0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    num += cs.riemann(a, b, c, d) * u[a] * v[b] * u[c] * v[d];
                }
            }
        }
    }
    let (u, v) = (DVector::from_column_slice(u), DVector::from_column_slice(v));
    let guu = u.dot(&(&g * &u));
    let gvv = v.dot(&(&g * &v));
    let guv = u.dot(&(&g * &v));
    num / (guu * gvv - guv * guv)
}

/// Extremes of the sectional curvature at a point: exact through the
/// curvature operator for `n ≤ 3`, sampled otherwise.
pub fn sectional_extremes(cs: &CurvatureState, samples: usize, seed: u64) -> Result<SectionalExtremes> {
    let n = cs.dim;
    if n < 2 {
        return Err(Error::precondition("sectional curvature needs n >= 2"));
    }
    if n <= 3 {
        let op = curvature_operator(cs)?;
        let eig = op.symmetric_eigen().eigenvalues;
        let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
        let max = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        return Ok(SectionalExtremes { min, max, exact: true });
    }
    let (min, max) = sampled_sectional_extremes(cs, samples, seed)?;
    Ok(SectionalExtremes { min, max, exact: false })
}

/// Random orthonormal planes followed by shrinking-radius local search.
pub fn sampled_sectional_extremes(cs: &CurvatureState, samples: usize, seed: u64) -> Result<(f64, f64)> {
    let n = cs.dim;
    let r = frame_riemann(cs)?;
    let k = |u: &DVector<f64>, v: &DVector<f64>| {
        // Orthonormalize, then evaluate R(u, v, u, v).
        let u = u.normalize();
        let v = (v - &u * u.dot(v)).normalize();
        let mut s = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        s += r[((a * n + b) * n + c) * n + d] * u[a] * v[b] * u[c] * v[d];
                    }
                }
            }
        }
        s
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gauss = |rng: &mut ChaCha8Rng| DVector::from_fn(n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    let mut best_min = (f64::INFINITY, DVector::zeros(n), DVector::zeros(n));
    let mut best_max = (f64::NEG_INFINITY, DVector::zeros(n), DVector::zeros(n));
    for _ in 0..samples.max(1) {
        let (u, v) = (gauss(&mut rng), gauss(&mut rng));
        if u.norm() < 1e-8 || (&v - &u * (u.dot(&v) / u.norm_squared())).norm() < 1e-8 {
            continue;
        }
        let val = k(&u, &v);
        if val < best_min.0 {
            best_min = (val, u.clone(), v.clone());
        }
        if val > best_max.0 {
            best_max = (val, u, v);
        }
    }
    let refine = |best: &mut (f64, DVector<f64>, DVector<f64>), sign: f64, rng: &mut ChaCha8Rng| {
        let mut radius = 0.3;
        let mut rounds = 0;
        while radius > 1e-9 && rounds < 4000 {
            rounds += 1;
            let mut improved = false;
            for _ in 0..4 * n {
                let u = &best.1 + gauss(rng) * radius;
                let v = &best.2 + gauss(rng) * radius;
                let val = k(&u, &v);
                if sign * (val - best.0) > 0.0 {
                    *best = (val, u, v);
                    improved = true;
                }
            }
            if !improved {
                radius *= 0.5;
            }
        }
    };
    refine(&mut best_min, -1.0, &mut rng);
    refine(&mut best_max, 1.0, &mut rng);
    Ok((best_min.0, best_max.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intrinsic::{curvature, MetricSource};
    use crate::surfaces::{ChartPoint, Family, RoundMetric};

    #[test]
    fn frame_is_orthonormal() {
        let g = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.1, 0.3, 1.5, -0.2, 0.1, -0.2, 0.8]);
        let f = orthonormal_frame(&g).unwrap();
        assert!((f.transpose() * &g * &f - DMatrix::identity(3, 3)).amax() < 1e-14);
        assert!(orthonormal_frame(&(-g)).is_err());
    }

    #[test]
    fn round_sphere_has_constant_curvature() {
        let p = ChartPoint::north(&[0.4, -0.3, 0.2]);
        let mj = RoundMetric { dim: 3, radius: 2.0 }.metric_jet(&p, 2).unwrap();
        let cs = curvature(&mj).unwrap();
        let op = curvature_operator(&cs).unwrap();
        assert!((op - DMatrix::identity(3, 3) * 0.25).amax() < 1e-12);
        let k = sectional_curvature(&cs, &[1.0, 0.2, 0.0], &[0.0, 1.0, -0.5]);
        assert!((k - 0.25).abs() < 1e-12);
        let e = sectional_extremes(&cs, 0, 0).unwrap();
        assert!(e.exact && (e.min - 0.25).abs() < 1e-12 && (e.max - 0.25).abs() < 1e-12);
    }

    #[test]
    fn sampling_stays_inside_exact_extremes() {
        let f = Family::ellipsoid(&[1.0, 1.3, 0.8, 1.1]);
        let mj = f.metric_jet(&ChartPoint::north(&[0.2, 0.5, -0.1]), 2).unwrap();
        let cs = curvature(&mj).unwrap();
        let exact = sectional_extremes(&cs, 0, 0).unwrap();
        let (lo, hi) = sampled_sectional_extremes(&cs, 512, 7).unwrap();
        assert!(lo >= exact.min - 1e-9 && hi <= exact.max + 1e-9);
        assert!((lo - exact.min).abs() < 1e-4 && (hi - exact.max).abs() < 1e-4);
    }
}
