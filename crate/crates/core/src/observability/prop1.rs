//! Randomized sweep over zero-frequency steady states.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{
    family_tangent, kernel_residual, linearize, observability_report, steady_map_rank, zero_freq_steady_family,
};
use crate::error::{Error, Result};
use crate::models::{MachineParams, MagneticLagrangianModel};

/// Parameter factors drawn per sample, whatever the kind.
const FACTORS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepOptions {
    pub samples: usize,
    pub seed: u64,
    /// Scale parameters by independent factors in `[1 − s, 1 + s]`.
    pub parameter_spread: f64,
    pub i_s_range: (f64, f64),
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            samples: 20,
            seed: 0,
            parameter_spread: 0.2,
            i_s_range: (0.5, 5.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prop1Sample {
    pub index: usize,
    pub xi: f64,
    pub i_s_bar: Complex64,
    pub dim: usize,
    pub rank: usize,
    pub singular_values: Vec<f64>,
    pub sigma_min_kept: Option<f64>,
    pub sigma_max_dropped: Option<f64>,
    /// Rank of `[A; C]`.
    pub steady_map_rank: usize,
    /// Relative size of `O·dX/dξ`.
    pub tangent_residual: f64,
}

impl Prop1Sample {
    pub fn gap(&self) -> Option<f64> {
        match (self.sigma_min_kept, self.sigma_max_dropped) {
            (Some(k), Some(d)) => Some(if d > 0.0 { k / d } else { f64::INFINITY }),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prop1Summary {
    pub kind: String,
    pub seed: u64,
    pub samples: Vec<Prop1Sample>,
}

impl Prop1Summary {
    pub fn dim(&self) -> usize {
        self.samples.first().map_or(0, |s| s.dim)
    }

    /// Every sample rank-deficient.
    pub fn all_deficient(&self) -> bool {
        self.samples.iter().all(|s| s.rank < s.dim)
    }

    /// Every sample has rank exactly `dim − 1`.
    pub fn all_deficiency_one(&self) -> bool {
        self.samples.iter().all(|s| s.rank + 1 == s.dim)
    }

    pub fn min_gap(&self) -> f64 {
        self.samples
            .iter()
            .filter_map(|s| s.gap())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_tangent_residual(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.tangent_residual))
    }

    /// One line per sample: kind, ξ, |ī_s|, dim, rank, σ_min_kept, σ_max_dropped.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,xi,i_s_abs,dim,rank,sigma_min_kept,sigma_max_dropped\n");
        let opt = |v: Option<f64>| v.map_or("nan".to_string(), |x| format!("{x:.16e}"));
        for s in &self.samples {
            let _ = writeln!(
                out,
                "{},{:.16e},{:.16e},{},{},{},{}",
                self.kind,
                s.xi,
                s.i_s_bar.norm(),
                s.dim,
                s.rank,
                opt(s.sigma_min_kept),
                opt(s.sigma_max_dropped)
            );
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let dim = self.dim();
        let _ = writeln!(out, "kind: {}", self.kind);
        let _ = writeln!(out, "seed: {}", self.seed);
        let _ = writeln!(out, "samples: {}", self.samples.len());
        let _ = writeln!(out, "state dimension: {dim}");
        let mut ranks: Vec<usize> = self.samples.iter().map(|s| s.rank).collect();
        ranks.sort_unstable();
        ranks.dedup();
        let _ = writeln!(out, "observability ranks: {ranks:?}");
        let mut sm: Vec<usize> = self.samples.iter().map(|s| s.steady_map_rank).collect();
        sm.sort_unstable();
        sm.dedup();
        let _ = writeln!(out, "steady-map ranks: {sm:?}");
        let _ = writeln!(out, "minimum singular-value gap: {:.3e}", self.min_gap());
        let _ = writeln!(out, "max tangent residual: {:.3e}", self.max_tangent_residual());
        let verdict = if !self.all_deficient() {
            "VIOLATION: full rank found".to_string()
        } else if self.all_deficiency_one() {
            format!("unobservable at every sample (rank {}/{dim})", dim - 1)
        } else {
            format!("unobservable at every sample; deficiency exceeds 1 (ranks {ranks:?} of {dim})")
        };
        let _ = writeln!(out, "verdict: {verdict}");
        for s in &self.samples {
            let _ = writeln!(
                out,
                "  #{:<3} xi={:+.6} |i_s|={:.6} rank={}/{} gap={:.3e} steady_map_rank={} tangent={:.3e}",
                s.index,
                s.xi,
                s.i_s_bar.norm(),
                s.rank,
                s.dim,
                s.gap().unwrap_or(f64::NAN),
                s.steady_map_rank,
                s.tangent_residual
            );
        }
        out
    }
}

struct Draw {
    xi: f64,
    i_s_bar: Complex64,
    factors: [f64; FACTORS],
}

fn perturbed(model: &MagneticLagrangianModel, f: &[f64; FACTORS]) -> Result<MagneticLagrangianModel> {
    let params = match model.params().clone() {
        MachineParams::Pm(mut p) => {
            p.inertia *= f[0];
            p.r_s *= f[1];
            p.lambda *= f[2];
            p.mu *= f[3];
            p.ibar *= f[4];
            MachineParams::Pm(p)
        }
        MachineParams::Im(mut p) => {
            p.inertia *= f[0];
            p.r_s *= f[1];
            p.r_r *= f[2];
            p.l_m *= f[3];
            p.l_fs *= f[4];
            p.l_fr *= f[5];
            for (h, k) in p.harmonics.iter_mut().zip(6..) {
                h.l_nu *= f[k.min(FACTORS - 1)];
            }
            MachineParams::Im(p)
        }
    };
    MagneticLagrangianModel::new(model.kind(), params)
}

fn run_sample(model: &MagneticLagrangianModel, index: usize, draw: &Draw) -> Result<Prop1Sample> {
    // A draw that breaks a parameter invariant falls back to the nominal machine.
    let m = perturbed(model, &draw.factors).unwrap_or_else(|_| model.clone());
    let point = zero_freq_steady_family(&m, draw.i_s_bar, draw.xi)?;
    let sys = linearize(&m, &point)?;
    let report = observability_report(&sys)?;
    let tangent = family_tangent(&m, draw.i_s_bar, draw.xi)?;
    Ok(Prop1Sample {
        index,
        xi: draw.xi,
        i_s_bar: draw.i_s_bar,
        dim: report.dim,
        rank: report.rank,
        sigma_min_kept: report.info.sigma_min_kept(),
        sigma_max_dropped: report.info.sigma_max_dropped(),
        singular_values: report.singular_values,
        steady_map_rank: steady_map_rank(&sys)?.rank,
        tangent_residual: kernel_residual(&sys, &tangent),
    })
}

/// Rank test at random zero-frequency steady states.
///
/// Draws `ξ ∈ [0, 2π)`, `|ī_s|` uniform in `i_s_range` with a uniform
/// angle, and parameter factors, all sequentially from ChaCha8 seeded with
/// `seed`. Samples are then evaluated in parallel and kept in draw order,
/// so the summary depends on the seed only.
///
/// Fails with a proposition violation if any sample has full rank.
pub fn verify_prop1(model: &MagneticLagrangianModel, options: &SweepOptions) -> Result<Prop1Summary> {
    let (lo, hi) = options.i_s_range;
    if !(lo >= 0.0 && hi >= lo && options.parameter_spread >= 0.0 && options.parameter_spread < 1.0) {
        return Err(Error::Argument("invalid sweep options".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let s = options.parameter_spread;
    let draws: Vec<Draw> = (0..options.samples)
        .map(|_| {
            let xi = rng.random_range(0.0..2.0 * PI);
            let mag = lo + (hi - lo) * rng.random::<f64>();
            let angle = rng.random_range(0.0..2.0 * PI);
            let mut factors = [1.0; FACTORS];
            for f in factors.iter_mut() {
                *f = 1.0 - s + 2.0 * s * rng.random::<f64>();
            }
            Draw {
                xi,
                i_s_bar: Complex64::from_polar(mag, angle),
                factors,
            }
        })
        .collect();
    let samples = draws
        .par_iter()
        .enumerate()
        .map(|(k, d)| run_sample(model, k, d))
        .collect::<Result<Vec<_>>>()?;
    if let Some(bad) = samples.iter().find(|s| s.rank >= s.dim) {
        return Err(Error::PropositionViolation {
            sample: bad.index,
            rank: bad.rank,
            dim: bad.dim,
            detail: format!("{} at xi = {}, i_s = {}", model.kind(), bad.xi, bad.i_s_bar),
        });
    }
    Ok(Prop1Summary {
        kind: model.kind().name().to_string(),
        seed: options.seed,
        samples,
    })
}
