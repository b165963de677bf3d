//! Euler–Lagrange dynamics in mass-matrix form and their integration.
//!
//! With fluxes `φ = 2∂L_m/∂i*` the electrical equations are
//! `dφ/dt = source`, where the source is `u_s − R_s i_s` for the stator and
//! `−R_r i_r` for the rotor. Expanding the time derivative,
//!
//! ```text
//! M(θ,i)·di/dt = source − (∂φ/∂θ)·ω,        J·dω/dt = ∂L_m/∂θ − τ_L
//! ```
//!
//! where `M` is the current block of the real Hessian of `L_m` and `∂φ/∂θ`
//! its mixed current/angle block. Both come out of one AD pass.

mod drive;
mod flux_state;
mod trajectory;

pub use drive::{DriveInput, VoltageProfile};
pub use flux_state::flux_state_simulate;
pub use trajectory::{format_row, SimulationFailure, Trajectory};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::energy::legendre;
use crate::error::{Error, Result};
use crate::models::MagneticLagrangianModel;
use crate::wirtinger::Taylor2;

/// Mass matrices with a condition number above this are rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Largest number of integration steps a single run may take.
pub const STEP_CAP: u64 = 100_000_000;

/// Default integration step [s].
pub const DEFAULT_DT: f64 = 1e-5;

/// Mechanical angle, speed and complex currents.
///
/// θ is never wrapped, so `dθ/dt = ω` holds across revolutions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MachineState {
    pub theta: f64,
    pub omega: f64,
    pub i_s: Complex64,
    /// Rotor current; present for IM models only.
    pub i_r: Option<Complex64>,
}

impl MachineState {
    pub fn pm(theta: f64, omega: f64, i_s: Complex64) -> Self {
        Self {
            theta,
            omega,
            i_s,
            i_r: None,
        }
    }

    pub fn im(theta: f64, omega: f64, i_r: Complex64, i_s: Complex64) -> Self {
        Self {
            theta,
            omega,
            i_s,
            i_r: Some(i_r),
        }
    }

    /// All-zero state matching the model's current count.
    pub fn zero(model: &MagneticLagrangianModel) -> Self {
        let z = Complex64::new(0.0, 0.0);
        if model.n_currents() == 2 {
            Self::im(0.0, 0.0, z, z)
        } else {
            Self::pm(0.0, 0.0, z)
        }
    }

    /// Currents in model order: `[i_s]` or `[i_r, i_s]`.
    pub fn currents(&self) -> Vec<Complex64> {
        match self.i_r {
            Some(i_r) => vec![i_r, self.i_s],
            None => vec![self.i_s],
        }
    }

    pub fn check(&self, model: &MagneticLagrangianModel) -> Result<()> {
        if self.i_r.is_some() != (model.n_currents() == 2) {
            return Err(Error::Argument(format!(
                "state {} a rotor current but {} {}",
                if self.i_r.is_some() { "has" } else { "lacks" },
                model.kind(),
                if model.n_currents() == 2 {
                    "needs one"
                } else {
                    "has none"
                }
            )));
        }
        if !self.to_vec().iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite(format!("state {self}")));
        }
        Ok(())
    }

    /// `[θ, ω, currents as re/im pairs]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = vec![self.theta, self.omega];
        for c in self.currents() {
            v.push(c.re);
            v.push(c.im);
        }
        v
    }

    pub fn from_vec(v: &[f64]) -> Result<Self> {
        match v.len() {
            4 => Ok(Self::pm(v[0], v[1], Complex64::new(v[2], v[3]))),
            6 => Ok(Self::im(
                v[0],
                v[1],
                Complex64::new(v[2], v[3]),
                Complex64::new(v[4], v[5]),
            )),
            n => Err(Error::Argument(format!("state vector of length {n}"))),
        }
    }
}

impl std::fmt::Display for MachineState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "θ={:.6e}, ω={:.6e}, i_s={:.6e}", self.theta, self.omega, self.i_s)?;
        if let Some(i_r) = self.i_r {
            write!(f, ", i_r={i_r:.6e}")?;
        }
        Ok(())
    }
}

/// Current-block Hessian of `L_m` and its condition number.
#[derive(Clone, Debug, PartialEq)]
pub struct MassMatrix {
    pub matrix: DMatrix<f64>,
    pub condition: f64,
}

/// Everything the right-hand side needs, from a single AD pass.
struct LocalTerms {
    taylor: Taylor2,
    nc2: usize,
}

impl LocalTerms {
    fn new(model: &MagneticLagrangianModel, state: &MachineState) -> Result<Self> {
        state.check(model)?;
        let taylor = model.lagrangian_taylor(state.theta, &state.currents())?;
        Ok(Self {
            taylor,
            nc2: 2 * model.n_currents(),
        })
    }

    fn fluxes(&self) -> Vec<Complex64> {
        let g = &self.taylor.gradient;
        (0..self.nc2 / 2)
            .map(|k| Complex64::new(g[2 * k], g[2 * k + 1]))
            .collect()
    }

    fn torque(&self) -> f64 {
        self.taylor.gradient[self.nc2]
    }

    fn mass(&self) -> DMatrix<f64> {
        self.taylor.hessian.view((0, 0), (self.nc2, self.nc2)).into_owned()
    }

    fn dflux_dtheta(&self) -> DVector<f64> {
        self.taylor
            .hessian
            .view((0, self.nc2), (self.nc2, 1))
            .column(0)
            .into_owned()
    }
}

fn checked_mass(m: DMatrix<f64>, state: &MachineState) -> Result<MassMatrix> {
    let eig = SymmetricEigen::new(m.clone());
    let lo = eig.eigenvalues.min();
    let hi = eig.eigenvalues.max();
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::SingularMassMatrix {
            condition,
            state: state.to_string(),
        });
    }
    Ok(MassMatrix { matrix: m, condition })
}

/// Fluxes `2∂L_m/∂i*` in model order: `[φ_s]` or `[φ_r, φ_s]`.
pub fn flux(model: &MagneticLagrangianModel, state: &MachineState) -> Result<Vec<Complex64>> {
    Ok(LocalTerms::new(model, state)?.fluxes())
}

/// `∂(real flux coordinates)/∂(real current coordinates)`.
pub fn mass_matrix(model: &MagneticLagrangianModel, state: &MachineState) -> Result<MassMatrix> {
    checked_mass(LocalTerms::new(model, state)?.mass(), state)
}

/// Time derivative of the state, returned in the same struct:
/// `theta` holds dθ/dt, `omega` dω/dt, and the currents their derivatives.
pub fn rhs(model: &MagneticLagrangianModel, state: &MachineState, input: &DriveInput, t: f64) -> Result<MachineState> {
    let local = LocalTerms::new(model, state)?;
    let u_s = input.u_s.at(t);
    if !(u_s.re.is_finite() && u_s.im.is_finite() && input.tau_l.is_finite()) {
        return Err(Error::NonFinite(format!("drive input at t = {t}")));
    }
    let mass = checked_mass(local.mass(), state)?;

    let currents = state.currents();
    let resistances = model.resistances();
    let n = currents.len();
    let mut b = DVector::zeros(2 * n);
    for k in 0..n {
        let mut src = -resistances[k] * currents[k];
        if k == n - 1 {
            src += u_s;
        }
        b[2 * k] = src.re;
        b[2 * k + 1] = src.im;
    }
    b -= local.dflux_dtheta() * state.omega;

    let di = mass
        .matrix
        .cholesky()
        .ok_or_else(|| Error::SingularMassMatrix {
            condition: mass.condition,
            state: state.to_string(),
        })?
        .solve(&b);

    let mut out = vec![state.omega, (local.torque() - input.tau_l) / model.inertia()];
    out.extend(di.iter());
    MachineState::from_vec(&out)
}

/// Flux, torque and total energy at one sample.
fn derived(model: &MagneticLagrangianModel, state: &MachineState) -> Result<(Vec<Complex64>, f64, f64)> {
    let local = LocalTerms::new(model, state)?;
    // Refuse to record a state the next step could not start from.
    checked_mass(local.mass(), state)?;
    let h_mag = legendre(&local.taylor, &state.currents());
    let h = 0.5 * model.inertia() * state.omega * state.omega + h_mag;
    Ok((local.fluxes(), local.torque(), h))
}

/// Number of fixed steps covering `[0, t_end]`.
pub(crate) fn step_count(t_end: f64, dt: f64) -> Result<u64> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Argument(format!("dt must be positive, got {dt}")));
    }
    if !(t_end.is_finite() && t_end >= dt) {
        return Err(Error::Argument(format!("t_end = {t_end} must be at least dt = {dt}")));
    }
    let steps = (t_end / dt).round();
    if steps > STEP_CAP as f64 {
        return Err(Error::StepCap {
            steps: steps as u64,
            cap: STEP_CAP,
        });
    }
    Ok(steps as u64)
}

/// Classical fixed-step RK4 over `f(t, x)`, sampling every step.
///
/// Stops at the first failing stage and returns the samples reached so far.
pub(crate) fn rk4<F>(
    x0: Vec<f64>,
    t_end: f64,
    dt: f64,
    mut f: F,
    mut sample: impl FnMut(f64, &[f64]) -> Result<()>,
) -> Result<()>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
{
    let steps = step_count(t_end, dt)?;
    let mut x = x0;
    sample(0.0, &x)?;
    let axpy = |x: &[f64], k: &[f64], h: f64| -> Vec<f64> { x.iter().zip(k).map(|(a, b)| a + h * b).collect() };
    for step in 0..steps {
        let t = step as f64 * dt;
        let k1 = f(t, &x)?;
        let k2 = f(t + 0.5 * dt, &axpy(&x, &k1, 0.5 * dt))?;
        let k3 = f(t + 0.5 * dt, &axpy(&x, &k2, 0.5 * dt))?;
        let k4 = f(t + dt, &axpy(&x, &k3, dt))?;
        for i in 0..x.len() {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite(format!("state after step {}", step + 1)));
        }
        sample((step + 1) as f64 * dt, &x)?;
    }
    Ok(())
}

/// Integrates the current-state equations with fixed-step RK4.
///
/// Samples are taken at `t_k = k·dt`. On failure the trajectory up to the
/// last good sample is returned along with the error.
pub fn simulate(
    model: &MagneticLagrangianModel,
    initial: &MachineState,
    input: &DriveInput,
    t_end: f64,
    dt: f64,
) -> std::result::Result<Trajectory, SimulationFailure> {
    let mut traj = Trajectory::default();
    let fail = |traj: Trajectory, error| SimulationFailure { partial: traj, error };
    if let Err(e) = initial.check(model).and_then(|_| input.validate()) {
        return Err(fail(traj, e));
    }
    let result = rk4(
        initial.to_vec(),
        t_end,
        dt,
        |t, x| Ok(rhs(model, &MachineState::from_vec(x)?, input, t)?.to_vec()),
        |t, x| {
            let state = MachineState::from_vec(x)?;
            let (fl, tq, h) = derived(model, &state)?;
            traj.push(t, state, fl, tq, h);
            Ok(())
        },
    );
    match result {
        Ok(()) => Ok(traj),
        Err(e) => Err(fail(traj, e)),
    }
}
