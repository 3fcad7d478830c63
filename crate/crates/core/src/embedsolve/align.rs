use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares rigid motion `x ↦ Qx + t` taking one cloud onto another,
/// with `Q` orthogonal (reflections allowed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    pub dim: usize,
    /// `Q`, row-major.
    pub orthogonal: Vec<f64>,
    pub translation: Vec<f64>,
    pub rms: f64,
    /// The cloud spans fewer than `dim − 1` directions, so `Q` is not
    /// determined by the data.
    pub unstable: bool,
}

impl Alignment {
    pub fn orthogonal_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.orthogonal)
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let q = self.orthogonal_matrix();
        let y = q * DVector::from_column_slice(x);
        y.iter().zip(&self.translation).map(|(a, b)| a + b).collect()
    }
}

pub fn align_rigid(recon: &[Vec<f64>], truth: &[Vec<f64>]) -> Result<Alignment> {
    if recon.is_empty() || recon.len() != truth.len() {
        return Err(Error::precondition("point clouds must be nonempty and of equal size"));
    }
    let d = recon[0].len();
    if recon.iter().chain(truth).any(|p| p.len() != d) {
        return Err(Error::precondition("points have inconsistent dimensions"));
    }
    let centroid = |c: &[Vec<f64>]| {
        let mut m = DVector::zeros(d);
        for p in c {
            m += DVector::from_column_slice(p);
        }
        m / c.len() as f64
    };
    let (rc, tc) = (centroid(recon), centroid(truth));
    let mut h = DMatrix::zeros(d, d);
    for (r, t) in recon.iter().zip(truth) {
        let a = DVector::from_column_slice(r) - &rc;
        let b = DVector::from_column_slice(t) - &tc;
        h += a * b.transpose();
    }
    let svd = h.clone().svd(true, true);
    let (u, v_t) = (svd.u.expect("requested U"), svd.v_t.expect("requested V"));
    let q = v_t.transpose() * u.transpose();
    let translation = &tc - &q * &rc;

    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let rank = sv.iter().filter(|&&s| s > 1e-10 * sv[0].max(f64::MIN_POSITIVE)).count();
    let unstable = rank + 1 < d;

    let mut sq = 0.0;
    for (r, t) in recon.iter().zip(truth) {
        let y = &q * DVector::from_column_slice(r) + &translation;
        sq += (y - DVector::from_column_slice(t)).norm_squared();
    }
    let mut orthogonal = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            orthogonal.push(q[(i, j)]);
        }
    }
    Ok(Alignment {
        dim: d,
        orthogonal,
        translation: translation.iter().copied().collect(),
        rms: (sq / recon.len() as f64).sqrt(),
        unstable,
    })
}
