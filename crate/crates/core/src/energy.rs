//! Magnetic energy by Legendre transform and the power-balance audit.
//!
//! `H_m = Σ_k (∂L_m/∂i_k·i_k + ∂L_m/∂i_k*·i_k*) − L_m`, which over real
//! current coordinates is `Σ x·∂L_m/∂x − L_m`. The total energy
//! `H = Jω²/2 + H_m` obeys
//!
//! ```text
//! dH/dt = Re(u_s i_s*) − R_s|i_s|² − R_r|i_r|² − τ_L ω
//! ```
//!
//! along solutions, with no 3/2 factor since currents and voltages are
//! power-invariant (α,β) components.

use std::io::{self, Write};

use num_complex::Complex64;

use crate::dynamics::{DriveInput, MachineState, Trajectory};
use crate::error::{Error, Result};
use crate::models::{MachineParams, MagneticLagrangianModel};
use crate::wirtinger::Taylor2;

/// Relative tolerance for recognizing a trajectory as the model's own.
const MATCH_TOLERANCE: f64 = 1e-9;

/// Kinetic, magnetic and total energy at one state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyBreakdown {
    pub h_mech: f64,
    pub h_mag: f64,
    pub total: f64,
}

/// Legendre transform from a Taylor expansion over `[currents…, θ]`.
pub(crate) fn legendre(taylor: &Taylor2, currents: &[Complex64]) -> f64 {
    let mut acc = 0.0;
    for (k, c) in currents.iter().enumerate() {
        acc += taylor.gradient[2 * k] * c.re + taylor.gradient[2 * k + 1] * c.im;
    }
    acc - taylor.value
}

/// `H_m` from the Wirtinger partials of `L_m`.
pub fn magnetic_energy(model: &MagneticLagrangianModel, theta: f64, currents: &[Complex64]) -> Result<f64> {
    Ok(legendre(&model.lagrangian_taylor(theta, currents)?, currents))
}

pub fn energy_breakdown(model: &MagneticLagrangianModel, state: &MachineState) -> Result<EnergyBreakdown> {
    state.check(model)?;
    let h_mech = 0.5 * model.inertia() * state.omega * state.omega;
    let h_mag = magnetic_energy(model, state.theta, &state.currents())?;
    Ok(EnergyBreakdown {
        h_mech,
        h_mag,
        total: h_mech + h_mag,
    })
}

/// `H_m` from the closed-form expressions, without differentiation.
///
/// PM, with `ρ = |i_s + ī e|`, `e = e^{j n_p θ}`, `w = i_s e*`:
///
/// ```text
/// H_m = (λ + ρλ')/2·|i_s|² − λ/2·ī² + ρλ'/2·ī·Re(w)
///       − (μ + μ'·Re(i_s*(i_s + ī e))/ρ)/2·Re(w²)
/// ```
///
/// IM: `H_m = L_m + ρ³L_m'(ρ)/2`; only the saturated magnetizing term
/// differs from the Lagrangian.
pub fn closed_form_magnetic_energy(model: &MagneticLagrangianModel, theta: f64, currents: &[Complex64]) -> Result<f64> {
    match model.params() {
        MachineParams::Pm(p) => {
            let i = currents[0];
            let c = model.pm_terms(theta, i)?.expect("PM parameters give PM terms");
            let i2 = i.norm_sqr();
            // s·λ·dk/ds = ρλ'/2
            let d = c.s * c.lambda_ks;
            Ok(
                0.5 * c.lambda_eff * (i2 - p.ibar * p.ibar) - 0.5 * c.mu_eff * c.w2.re + d * i2 + d * p.ibar * c.w.re
                    - c.mu_ks * (i.conj() * c.z).re * c.w2.re,
            )
        }
        MachineParams::Im(_) => {
            let (_, d_m, s) = model.im_saturation_terms(theta, currents)?;
            Ok(model.eval_lagrangian(theta, currents)? + d_m * s)
        }
    }
}

/// Power delivered to the machine minus losses and load, at one state.
pub fn power_terms(model: &MagneticLagrangianModel, state: &MachineState, u_s: Complex64, tau_l: f64) -> PowerTerms {
    let input = (u_s * state.i_s.conj()).re;
    let mut losses = model.r_s() * state.i_s.norm_sqr();
    if let (Some(i_r), Some(p)) = (state.i_r, model.im_params()) {
        losses += p.r_r * i_r.norm_sqr();
    }
    let load = tau_l * state.omega;
    PowerTerms {
        input,
        losses,
        load,
        net: input - losses - load,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerTerms {
    /// `Re(u_s i_s*)`
    pub input: f64,
    pub losses: f64,
    /// `τ_L ω`
    pub load: f64,
    pub net: f64,
}

/// Residual series and summary of a power-balance audit.
#[derive(Clone, Debug, PartialEq)]
pub struct AuditReport {
    pub times: Vec<f64>,
    pub hamiltonian: Vec<f64>,
    pub dh_dt: Vec<f64>,
    pub power: Vec<f64>,
    /// `dH/dt − power`
    pub residual: Vec<f64>,
    pub max_residual: f64,
    pub peak_input_power: f64,
    /// `|H(T) − H(0) − ∫power dt|` with the trapezoid rule.
    pub drift: f64,
    /// `drift / max(∫|power| dt, max|H − H(0)|)`; zero when both vanish.
    pub relative_drift: f64,
}

impl AuditReport {
    /// Pointwise bound `max|r| ≤ 1e-3·peak input power`.
    pub fn pointwise_ok(&self) -> bool {
        self.max_residual <= 1e-3 * self.peak_input_power
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,hamiltonian,dh_dt,power,residual")?;
        for k in 0..self.times.len() {
            let row = [
                self.times[k],
                self.hamiltonian[k],
                self.dh_dt[k],
                self.power[k],
                self.residual[k],
            ];
            writeln!(w, "{}", crate::dynamics::format_row(&row))?;
        }
        Ok(())
    }

    pub fn summary(&self) -> String {
        format!(
            "samples: {}\nmax_residual: {:.6e} W\npeak_input_power: {:.6e} W\n\
             pointwise_bound: {}\ndrift: {:.6e} J\nrelative_drift: {:.6e}\n",
            self.times.len(),
            self.max_residual,
            self.peak_input_power,
            if self.pointwise_ok() { "pass" } else { "fail" },
            self.drift,
            self.relative_drift,
        )
    }
}

/// Second-order finite-difference derivative of uniformly sampled data.
fn derivative(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    (0..n)
        .map(|k| {
            if k == 0 {
                (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h)
            } else if k == n - 1 {
                (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * h)
            } else {
                (y[k + 1] - y[k - 1]) / (2.0 * h)
            }
        })
        .collect()
}

/// Compares the stored energy column against the power balance.
pub fn power_balance_audit(
    model: &MagneticLagrangianModel,
    trajectory: &Trajectory,
    input: &DriveInput,
) -> Result<AuditReport> {
    let n = trajectory.len();
    if n < 3 {
        return Err(Error::Argument(format!("audit needs at least 3 samples, got {n}")));
    }
    let first = &trajectory.states[0];
    first.check(model)?;
    let h0 = energy_breakdown(model, first)?.total;
    let stored = trajectory.hamiltonian[0];
    if (h0 - stored).abs() > MATCH_TOLERANCE * h0.abs().max(1e-12) {
        return Err(Error::Argument(format!(
            "trajectory does not match the model: stored H(0) = {stored:e}, recomputed {h0:e}"
        )));
    }
    let h = trajectory.times[1] - trajectory.times[0];
    let uniform = trajectory
        .times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h);
    if !(h > 0.0 && uniform) {
        return Err(Error::Argument("audit needs uniformly spaced samples".into()));
    }

    let mut power = Vec::with_capacity(n);
    let mut peak: f64 = 0.0;
    for (t, s) in trajectory.times.iter().zip(&trajectory.states) {
        let p = power_terms(model, s, input.u_s.at(*t), input.tau_l);
        peak = peak.max(p.input.abs());
        power.push(p.net);
    }
    let hs = &trajectory.hamiltonian;
    let dh_dt = derivative(hs, h);
    let residual: Vec<f64> = dh_dt.iter().zip(&power).map(|(a, b)| a - b).collect();
    let max_residual = residual.iter().fold(0.0_f64, |m, r| m.max(r.abs()));

    let mut integral = 0.0;
    let mut abs_integral = 0.0;
    for k in 1..n {
        integral += 0.5 * h * (power[k - 1] + power[k]);
        abs_integral += 0.5 * h * (power[k - 1].abs() + power[k].abs());
    }
    let drift = (hs[n - 1] - hs[0] - integral).abs();
    let swing = hs.iter().fold(0.0_f64, |m, v| m.max((v - hs[0]).abs()));
    let scale = abs_integral.max(swing);
    let relative_drift = if scale > 0.0 { drift / scale } else { drift };

    Ok(AuditReport {
        times: trajectory.times.clone(),
        hamiltonian: hs.clone(),
        dh_dt,
        power,
        residual,
        max_residual,
        peak_input_power: peak,
        drift,
        relative_drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{ModelKind, PmParams};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn pm_standard_energy() {
        let m = MagneticLagrangianModel::default_for(ModelKind::PmStandard);
        let h = magnetic_energy(&m, 0.0, &[c(0.0, 0.0)]).unwrap();
        assert!((h + 0.5).abs() < 1e-15);
        let i = c(3.0, -4.0);
        let h = magnetic_energy(&m, 1.1, &[i]).unwrap();
        assert!((h - 0.005 * (25.0 - 100.0)).abs() < 1e-14);
    }

    #[test]
    fn pm_saliency_closed_form_hand_value() {
        let m = MagneticLagrangianModel::default_for(ModelKind::PmSaliency);
        let h = closed_form_magnetic_energy(&m, 0.0, &[c(1.0, 0.0)]).unwrap();
        assert!((h + 0.496).abs() < 1e-15);
        let ad = magnetic_energy(&m, 0.0, &[c(1.0, 0.0)]).unwrap();
        assert!((h - ad).abs() < 1e-15);
    }

    #[test]
    fn im_standard_energy_is_the_lagrangian() {
        let m = MagneticLagrangianModel::default_for(ModelKind::ImStandard);
        let cur = [c(0.4, -1.3), c(2.2, 0.9)];
        let l = m.eval_lagrangian(0.3, &cur).unwrap();
        assert_eq!(closed_form_magnetic_energy(&m, 0.3, &cur).unwrap(), l);
        assert!((magnetic_energy(&m, 0.3, &cur).unwrap() - l).abs() <= 1e-14 * l.abs());
    }

    #[test]
    fn quadratic_self_duality() {
        let mut p = PmParams::from_phibar(3, 0.01, 1.0, 0.01, 0.0, 0.0);
        p.ibar = 0.0;
        let pm = MagneticLagrangianModel::new(ModelKind::PmStandard, MachineParams::Pm(p)).unwrap();
        let im = MagneticLagrangianModel::default_for(ModelKind::ImStandard);
        for m in [&pm, &im] {
            let cur: Vec<Complex64> = [c(1.5, -0.5), c(-0.25, 2.0)][..m.n_currents()].to_vec();
            // ∂(H_m − L_m)/∂x = Hess·x − ∇L over the current block.
            let t = m.lagrangian_taylor(0.7, &cur).unwrap();
            let x: Vec<f64> = cur.iter().flat_map(|z| [z.re, z.im]).collect();
            for j in 0..x.len() {
                let hx: f64 = (0..x.len()).map(|k| t.hessian[(j, k)] * x[k]).sum();
                assert!((hx - t.gradient[j]).abs() <= 1e-10, "{}", m.kind());
            }
        }
    }

    #[test]
    fn derivative_stencils_exact_on_quadratics() {
        let y: Vec<f64> = (0..6).map(|k| (k as f64).powi(2)).collect();
        let d = derivative(&y, 1.0);
        for (k, v) in d.iter().enumerate() {
            assert!((v - 2.0 * k as f64).abs() < 1e-12);
        }
    }
}
