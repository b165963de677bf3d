use nalgebra::{DMatrix, SVD};

use crate::error::{Error, Result};

/// Relative factor in the rank tolerance `max(rows, cols)·σ_max·RANK_RTOL`.
pub const RANK_RTOL: f64 = 1e-10;

/// SVD-based rank with the full spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct RankInfo {
    pub rank: usize,
    /// Descending.
    pub singular_values: Vec<f64>,
    pub tolerance: f64,
}

impl RankInfo {
    /// Smallest singular value counted in the rank.
    pub fn sigma_min_kept(&self) -> Option<f64> {
        self.rank.checked_sub(1).map(|k| self.singular_values[k])
    }

    /// Largest singular value below the tolerance.
    pub fn sigma_max_dropped(&self) -> Option<f64> {
        self.singular_values.get(self.rank).copied()
    }

    /// `σ_min_kept / σ_max_dropped`; infinite when the dropped value is 0.
    pub fn gap(&self) -> Option<f64> {
        match (self.sigma_min_kept(), self.sigma_max_dropped()) {
            (Some(k), Some(d)) => Some(if d > 0.0 { k / d } else { f64::INFINITY }),
            _ => None,
        }
    }
}

pub fn singular_values(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    if !m.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("matrix passed to SVD".into()));
    }
    if m.is_empty() {
        return Ok(vec![]);
    }
    let svd = SVD::try_new(m.clone(), false, false, f64::EPSILON, 10_000).ok_or(Error::SvdFailure)?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Number of singular values above `max(rows, cols)·σ_max·1e-10`.
pub fn numerical_rank(m: &DMatrix<f64>) -> Result<RankInfo> {
    let singular_values = singular_values(m)?;
    let sigma_max = singular_values.first().copied().unwrap_or(0.0);
    let tolerance = m.nrows().max(m.ncols()) as f64 * sigma_max * RANK_RTOL;
    let rank = singular_values.iter().filter(|&&s| s > tolerance).count();
    Ok(RankInfo {
        rank,
        singular_values,
        tolerance,
    })
}

fn pow2_near(x: f64) -> f64 {
    if x > 0.0 && x.is_finite() {
        2f64.powi(x.log2().round() as i32)
    } else {
        1.0
    }
}

/// Row and column scaling by powers of two that brings every nonzero row
/// and column max-norm close to 1.
///
/// Returns `(D_r·m·D_c, d_r, d_c)`. Power-of-two factors are exact in
/// floating point and do not change the rank.
pub fn equilibrate(m: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, Vec<f64>) {
    let (r, c) = m.shape();
    let mut a = m.clone();
    let mut dr = vec![1.0; r];
    let mut dc = vec![1.0; c];
    for _ in 0..64 {
        let mut changed = false;
        for i in 0..r {
            let n = a.row(i).amax();
            let f = pow2_near(1.0 / n.sqrt());
            if n > 0.0 && f != 1.0 {
                a.row_mut(i).scale_mut(f);
                dr[i] *= f;
                changed = true;
            }
        }
        for j in 0..c {
            let n = a.column(j).amax();
            let f = pow2_near(1.0 / n.sqrt());
            if n > 0.0 && f != 1.0 {
                a.column_mut(j).scale_mut(f);
                dc[j] *= f;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    (a, dr, dc)
}
