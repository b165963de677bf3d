//! Hamiltonian form in flux variables for the two linear models, used as an
//! independent cross-check of the current-state integrator.
//!
//! ```text
//! PM:  H_m(θ,φ_s) = |φ_s − φ̄ e|²/(2λ) − λī²/2,                  e = e^{j n_p θ}
//! IM:  H_m = [(L_m+L_fs)|φ_r|² + (L_m+L_fr)|φ_s|² − 2L_m·Re((φ_r e)* φ_s)] / (2D)
//!      D = (L_m+L_fr)(L_m+L_fs) − L_m²
//! ```
//!
//! Currents are `2∂H_m/∂φ*` and the torque is `−∂H_m/∂θ` at fixed flux.

use num_complex::Complex64;

use super::{rk4, DriveInput, MachineState, SimulationFailure, Trajectory};
use crate::error::{Error, Result};
use crate::models::{MachineParams, MagneticLagrangianModel, ModelKind};
use crate::wirtinger::{second_order, Cx, RealFunction, Scalar};

struct FluxHamiltonian<'a>(&'a MagneticLagrangianModel);

impl RealFunction for FluxHamiltonian<'_> {
    fn eval<T: Scalar>(&self, x: &[T]) -> Result<T> {
        let n = self.0.n_p() as f64;
        let theta = x[x.len() - 1];
        let e = Cx::expj(theta * n);
        match self.0.params() {
            MachineParams::Pm(p) => {
                let d = Cx::new(x[0], x[1]) - e.scale_f(p.phibar());
                Ok(d.norm_sqr() / (2.0 * p.lambda) - 0.5 * p.lambda * p.ibar * p.ibar)
            }
            MachineParams::Im(p) => {
                let phi_r = Cx::new(x[0], x[1]);
                let phi_s = Cx::new(x[2], x[3]);
                let det = (p.l_m + p.l_fr) * (p.l_m + p.l_fs) - p.l_m * p.l_m;
                let cross = ((phi_r * e).conj() * phi_s).re;
                Ok(
                    (phi_r.norm_sqr() * (p.l_m + p.l_fs) + phi_s.norm_sqr() * (p.l_m + p.l_fr) - cross * (2.0 * p.l_m))
                        / (2.0 * det),
                )
            }
        }
    }
}

struct FluxPoint {
    currents: Vec<Complex64>,
    torque: f64,
    h_mag: f64,
}

fn evaluate(model: &MagneticLagrangianModel, theta: f64, fluxes: &[f64]) -> Result<FluxPoint> {
    let mut x = fluxes.to_vec();
    x.push(theta);
    let t = second_order(&FluxHamiltonian(model), &x)?;
    let nc = fluxes.len() / 2;
    Ok(FluxPoint {
        currents: (0..nc)
            .map(|k| Complex64::new(t.gradient[2 * k], t.gradient[2 * k + 1]))
            .collect(),
        torque: -t.gradient[2 * nc],
        h_mag: t.value,
    })
}

/// Integrates `dφ/dt = source` with fixed-step RK4 for `pm_standard` and
/// `im_standard`, reporting currents alongside the fluxes.
pub fn flux_state_simulate(
    model: &MagneticLagrangianModel,
    initial: &MachineState,
    input: &DriveInput,
    t_end: f64,
    dt: f64,
) -> std::result::Result<Trajectory, SimulationFailure> {
    let mut traj = Trajectory::default();
    let setup = || -> Result<Vec<f64>> {
        if !matches!(model.kind(), ModelKind::PmStandard | ModelKind::ImStandard) {
            return Err(Error::UnsupportedKind {
                kind: model.kind().name().into(),
                operation: "flux-state simulation".into(),
            });
        }
        initial.check(model)?;
        input.validate()?;
        let mut x = vec![initial.theta, initial.omega];
        for phi in model.analytic_flux(initial.theta, &initial.currents())? {
            x.extend([phi.re, phi.im]);
        }
        Ok(x)
    };
    let x0 = match setup() {
        Ok(x) => x,
        Err(error) => return Err(SimulationFailure { partial: traj, error }),
    };
    let resistances = model.resistances();
    let inertia = model.inertia();
    let result = rk4(
        x0,
        t_end,
        dt,
        |t, x| {
            let p = evaluate(model, x[0], &x[2..])?;
            let mut dx = vec![x[1], (p.torque - input.tau_l) / inertia];
            let n = p.currents.len();
            for (k, (i, r)) in p.currents.iter().zip(&resistances).enumerate() {
                let mut src = -r * i;
                if k == n - 1 {
                    src += input.u_s.at(t);
                }
                dx.extend([src.re, src.im]);
            }
            Ok(dx)
        },
        |t, x| {
            let p = evaluate(model, x[0], &x[2..])?;
            let mut sv = vec![x[0], x[1]];
            for i in &p.currents {
                sv.extend([i.re, i.im]);
            }
            let fluxes = x[2..].chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
            let h = 0.5 * inertia * x[1] * x[1] + p.h_mag;
            traj.push(t, MachineState::from_vec(&sv)?, fluxes, p.torque, h);
            Ok(())
        },
    );
    match result {
        Ok(()) => Ok(traj),
        Err(error) => Err(SimulationFailure { partial: traj, error }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn currents_invert_fluxes() {
        for kind in [ModelKind::PmStandard, ModelKind::ImStandard] {
            let m = MagneticLagrangianModel::default_for(kind);
            let currents: Vec<Complex64> =
                [Complex64::new(1.2, -0.4), Complex64::new(-2.0, 0.7)][..m.n_currents()].to_vec();
            let theta = 0.83;
            let flat: Vec<f64> = m
                .analytic_flux(theta, &currents)
                .unwrap()
                .iter()
                .flat_map(|z| [z.re, z.im])
                .collect();
            let p = evaluate(&m, theta, &flat).unwrap();
            for (a, b) in p.currents.iter().zip(&currents) {
                assert!((a - b).norm() < 1e-12, "{kind}: {a} vs {b}");
            }
            let tq = m.analytic_torque(theta, &currents).unwrap();
            assert!((p.torque - tq).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_nonlinear_kinds() {
        let m = MagneticLagrangianModel::default_for(ModelKind::PmSaliency);
        let err = flux_state_simulate(&m, &MachineState::zero(&m), &DriveInput::zero(), 1e-3, 1e-4).unwrap_err();
        assert!(matches!(err.error, Error::UnsupportedKind { .. }));
    }

    #[test]
    fn zero_run_stays_zero() {
        for kind in [ModelKind::PmStandard, ModelKind::ImStandard] {
            let m = MagneticLagrangianModel::default_for(kind);
            let z = MachineState::zero(&m);
            let traj = flux_state_simulate(&m, &z, &DriveInput::zero(), 1e-3, 1e-4).unwrap();
            assert!(traj.states.iter().all(|s| s.omega == 0.0 && s.theta == 0.0));
            if kind == ModelKind::ImStandard {
                assert!(traj.states.iter().all(|s| *s == z));
            }
        }
    }
}
