//! Validation suites comparing independent computations of the same
//! quantity: AD against closed forms, Legendre transform against closed
//! forms, periodicity in θ and the power balance along a simulated run.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{simulate, DriveInput, MachineState};
use crate::energy::{closed_form_magnetic_energy, magnetic_energy, power_balance_audit};
use crate::error::Result;
use crate::models::{MachineParams, MagneticLagrangianModel};

/// Closed-form flux, torque and magnetic energy.
///
/// The built-in implementation is [`ClosedForms`]; tests substitute broken
/// ones to exercise the failure path.
pub trait AnalyticOracle: Sync {
    fn flux(&self, model: &MagneticLagrangianModel, theta: f64, currents: &[Complex64]) -> Result<Vec<Complex64>>;
    fn torque(&self, model: &MagneticLagrangianModel, theta: f64, currents: &[Complex64]) -> Result<f64>;
    fn energy(&self, model: &MagneticLagrangianModel, theta: f64, currents: &[Complex64]) -> Result<f64>;
}

pub struct ClosedForms;

impl AnalyticOracle for ClosedForms {
    fn flux(&self, model: &MagneticLagrangianModel, theta: f64, currents: &[Complex64]) -> Result<Vec<Complex64>> {
        model.analytic_flux(theta, currents)
    }

    fn torque(&self, model: &MagneticLagrangianModel, theta: f64, currents: &[Complex64]) -> Result<f64> {
        model.analytic_torque(theta, currents)
    }

    fn energy(&self, model: &MagneticLagrangianModel, theta: f64, currents: &[Complex64]) -> Result<f64> {
        closed_form_magnetic_energy(model, theta, currents)
    }
}

/// Relative error with the reference floored at `FLOOR` times a natural
/// scale of the quantity, so cancellations near zero do not inflate it.
pub const FLOOR: f64 = 1e-6;

pub fn relative_error(diff: f64, reference: f64, scale: f64) -> f64 {
    let denom = reference.abs().max(FLOOR * scale.abs());
    if denom > 0.0 {
        diff.abs() / denom
    } else {
        diff.abs()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    /// Largest error measured, in the suite's own units.
    pub worst: f64,
    pub tolerance: f64,
    pub points: usize,
    pub detail: String,
}

impl SuiteResult {
    pub fn line(&self) -> String {
        format!(
            "{} {:<16} worst={:.3e} tol={:.1e} points={}{}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.worst,
            self.tolerance,
            self.points,
            if self.detail.is_empty() {
                String::new()
            } else {
                format!(" ({})", self.detail)
            }
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationOptions {
    pub points: usize,
    pub seed: u64,
    /// Largest random current modulus [A].
    pub current_radius: f64,
    pub oracle_tolerance: f64,
    pub periodicity_tolerance: f64,
    pub drive: DriveInput,
    pub t_end: f64,
    pub dt: f64,
    pub drift_tolerance: f64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            points: 1000,
            seed: 0,
            current_radius: 5.0,
            oracle_tolerance: 1e-9,
            periodicity_tolerance: 1e-12,
            drive: DriveInput::sinusoid(5.0, 5.0, 0.0, 0.0),
            t_end: 0.2,
            dt: 1e-5,
            drift_tolerance: 1e-6,
        }
    }
}

/// Random `(θ, currents)` inside the model's domain, drawn from ChaCha8.
///
/// Points where the Lagrangian cannot be evaluated are redrawn.
pub fn random_points(
    model: &MagneticLagrangianModel,
    count: usize,
    radius: f64,
    seed: u64,
) -> Vec<(f64, Vec<Complex64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count && attempts < 100 * count.max(1) {
        attempts += 1;
        let theta = rng.random_range(-2.0 * PI..2.0 * PI);
        let currents: Vec<Complex64> = (0..model.n_currents())
            .map(|_| {
                let r = radius * rng.random::<f64>().sqrt();
                Complex64::from_polar(r, rng.random_range(0.0..2.0 * PI))
            })
            .collect();
        if model.eval_lagrangian(theta, &currents).is_ok() {
            out.push((theta, currents));
        }
    }
    out
}

fn max_harmonic_order(model: &MagneticLagrangianModel) -> f64 {
    match model.params() {
        MachineParams::Im(p) => p.harmonics.iter().map(|h| h.nu as f64).fold(1.0, f64::max),
        MachineParams::Pm(_) => 2.0,
    }
}

fn ad_terms(model: &MagneticLagrangianModel, theta: f64, currents: &[Complex64]) -> Result<(Vec<Complex64>, f64, f64)> {
    let t = model.lagrangian_taylor(theta, currents)?;
    let n = currents.len();
    let flux = (0..n)
        .map(|k| Complex64::new(t.gradient[2 * k], t.gradient[2 * k + 1]))
        .collect();
    Ok((flux, t.gradient[2 * n], t.value))
}

/// Natural size of `Σ|φ_k||i_k|`, plus `|L_m|`.
fn energy_scale(flux: &[Complex64], currents: &[Complex64], l: f64) -> f64 {
    flux.iter().zip(currents).map(|(p, i)| p.norm() * i.norm()).sum::<f64>() + l.abs()
}

fn finish(name: &'static str, worst: f64, tolerance: f64, points: usize, failures: Vec<String>) -> SuiteResult {
    let passed = failures.is_empty() && worst <= tolerance && points > 0;
    let detail = if points == 0 {
        "no evaluable points".to_string()
    } else {
        failures.into_iter().next().unwrap_or_default()
    };
    SuiteResult {
        name,
        passed,
        worst,
        tolerance,
        points,
        detail,
    }
}

/// Closed-form flux against `2∂L_m/∂i*` from AD.
pub fn flux_suite(
    model: &MagneticLagrangianModel,
    oracle: &dyn AnalyticOracle,
    opts: &ValidationOptions,
) -> SuiteResult {
    let pts = random_points(model, opts.points, opts.current_radius, opts.seed);
    let mut worst: f64 = 0.0;
    let mut failures = vec![];
    for (theta, cur) in &pts {
        match (ad_terms(model, *theta, cur), oracle.flux(model, *theta, cur)) {
            (Ok((ad, _, _)), Ok(cf)) if cf.len() == ad.len() => {
                let scale: f64 = ad.iter().map(|z| z.norm()).sum();
                for (a, c) in ad.iter().zip(&cf) {
                    worst = worst.max(relative_error((a - c).norm(), a.norm(), scale));
                }
            }
            (Ok(_), Ok(_)) => failures.push("flux count mismatch".into()),
            (Err(e), _) | (_, Err(e)) => failures.push(format!("θ={theta}: {e}")),
        }
    }
    finish("flux", worst, opts.oracle_tolerance, pts.len(), failures)
}

/// Closed-form torque against `∂L_m/∂θ` from AD.
pub fn torque_suite(
    model: &MagneticLagrangianModel,
    oracle: &dyn AnalyticOracle,
    opts: &ValidationOptions,
) -> SuiteResult {
    let pts = random_points(model, opts.points, opts.current_radius, opts.seed.wrapping_add(1));
    let order = model.n_p() as f64 * max_harmonic_order(model);
    let mut worst: f64 = 0.0;
    let mut failures = vec![];
    for (theta, cur) in &pts {
        match (ad_terms(model, *theta, cur), oracle.torque(model, *theta, cur)) {
            (Ok((flux, tq, _)), Ok(cf)) => {
                let scale = order * energy_scale(&flux, cur, 0.0);
                worst = worst.max(relative_error(tq - cf, tq, scale));
            }
            (Err(e), _) | (_, Err(e)) => failures.push(format!("θ={theta}: {e}")),
        }
    }
    finish("torque", worst, opts.oracle_tolerance, pts.len(), failures)
}

/// Legendre transform from AD against the closed-form magnetic energy.
pub fn energy_suite(
    model: &MagneticLagrangianModel,
    oracle: &dyn AnalyticOracle,
    opts: &ValidationOptions,
) -> SuiteResult {
    let pts = random_points(model, opts.points, opts.current_radius, opts.seed.wrapping_add(2));
    let mut worst: f64 = 0.0;
    let mut failures = vec![];
    for (theta, cur) in &pts {
        let ad = ad_terms(model, *theta, cur)
            .and_then(|(flux, _, l)| Ok((magnetic_energy(model, *theta, cur)?, energy_scale(&flux, cur, l))));
        match (ad, oracle.energy(model, *theta, cur)) {
            (Ok((h, scale)), Ok(cf)) => worst = worst.max(relative_error(h - cf, h, scale)),
            (Err(e), _) | (_, Err(e)) => failures.push(format!("θ={theta}: {e}")),
        }
    }
    finish("energy", worst, opts.oracle_tolerance, pts.len(), failures)
}

/// `L_m` and `H_m` are `2π/n_p`-periodic in θ.
pub fn periodicity_suite(model: &MagneticLagrangianModel, opts: &ValidationOptions) -> SuiteResult {
    let pts = random_points(
        model,
        opts.points.min(100),
        opts.current_radius,
        opts.seed.wrapping_add(3),
    );
    let period = model.period();
    let mut worst: f64 = 0.0;
    let mut failures = vec![];
    for (theta, cur) in &pts {
        let theta = theta.rem_euclid(2.0 * PI) - PI;
        let pair =
            |th: f64| -> Result<(f64, f64)> { Ok((model.eval_lagrangian(th, cur)?, magnetic_energy(model, th, cur)?)) };
        match (pair(theta), pair(theta + period)) {
            (Ok((l0, h0)), Ok((l1, h1))) => {
                worst = worst
                    .max(relative_error(l1 - l0, l0, 0.0))
                    .max(relative_error(h1 - h0, h0, 0.0));
            }
            (Err(e), _) | (_, Err(e)) => failures.push(format!("θ={theta}: {e}")),
        }
    }
    finish("periodicity", worst, opts.periodicity_tolerance, pts.len(), failures)
}

/// Simulates the drive from rest and audits the energy balance.
pub fn power_balance_suite(model: &MagneticLagrangianModel, opts: &ValidationOptions) -> SuiteResult {
    let name = "power_balance";
    let traj = match simulate(model, &MachineState::zero(model), &opts.drive, opts.t_end, opts.dt) {
        Ok(t) => t,
        Err(f) => {
            return finish(
                name,
                f64::INFINITY,
                opts.drift_tolerance,
                f.partial.len(),
                vec![f.to_string()],
            )
        }
    };
    match power_balance_audit(model, &traj, &opts.drive) {
        Ok(report) => {
            let mut failures = vec![];
            if !report.pointwise_ok() {
                failures.push(format!(
                    "pointwise residual {:.3e} exceeds 1e-3 of peak input power {:.3e}",
                    report.max_residual, report.peak_input_power
                ));
            }
            finish(name, report.relative_drift, opts.drift_tolerance, traj.len(), failures)
        }
        Err(e) => finish(
            name,
            f64::INFINITY,
            opts.drift_tolerance,
            traj.len(),
            vec![e.to_string()],
        ),
    }
}

/// All suites in a fixed order.
pub fn validate_model(
    model: &MagneticLagrangianModel,
    oracle: &dyn AnalyticOracle,
    opts: &ValidationOptions,
) -> Vec<SuiteResult> {
    vec![
        flux_suite(model, oracle, opts),
        torque_suite(model, oracle, opts),
        energy_suite(model, oracle, opts),
        periodicity_suite(model, opts),
        power_balance_suite(model, opts),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelKind;

    #[test]
    fn relative_error_floor() {
        assert_eq!(relative_error(1e-12, 0.0, 1.0), 1e-6);
        assert_eq!(relative_error(1e-12, 1.0, 1.0), 1e-12);
        assert_eq!(relative_error(0.0, 0.0, 0.0), 0.0);
    }

    #[test]
    fn random_points_are_deterministic() {
        let m = MagneticLagrangianModel::default_for(ModelKind::ImSat);
        assert_eq!(random_points(&m, 5, 5.0, 9), random_points(&m, 5, 5.0, 9));
        assert_ne!(random_points(&m, 5, 5.0, 9), random_points(&m, 5, 5.0, 10));
    }

    struct Broken;
    impl AnalyticOracle for Broken {
        fn flux(&self, m: &MagneticLagrangianModel, th: f64, c: &[Complex64]) -> Result<Vec<Complex64>> {
            Ok(m.analytic_flux(th, c)?.iter().map(|z| z * 1.001).collect())
        }
        fn torque(&self, m: &MagneticLagrangianModel, th: f64, c: &[Complex64]) -> Result<f64> {
            m.analytic_torque(th, c)
        }
        fn energy(&self, m: &MagneticLagrangianModel, th: f64, c: &[Complex64]) -> Result<f64> {
            closed_form_magnetic_energy(m, th, c)
        }
    }

    #[test]
    fn broken_oracle_fails_flux_only() {
        let m = MagneticLagrangianModel::default_for(ModelKind::PmSaliency);
        let opts = ValidationOptions {
            points: 50,
            ..Default::default()
        };
        assert!(!flux_suite(&m, &Broken, &opts).passed);
        assert!(torque_suite(&m, &Broken, &opts).passed);
        assert!(energy_suite(&m, &Broken, &opts).passed);
    }
}
