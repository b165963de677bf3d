//! Steady states, tangent linearization and Kalman rank tests for
//! sensorless operation.
//!
//! The sensorless state is `X = (τ_L, θ, ω, [i_r,] i_s)` with complex
//! currents split into real pairs, the input is `u_s` and the output is
//! `y = i_s`. The load torque is an unknown constant, `dτ_L/dt = 0`.
//!
//! At zero stator frequency every `(ξ, ī_s)` gives a steady state with
//! `θ = ξ`, `ω = 0`, `i_s = ī_s`, `i_r = 0`, `u_s = R_s ī_s` and `τ_L` equal
//! to the electromagnetic torque there. For fixed `ū_s` this is a
//! one-parameter family in ξ with the same output, which is why the
//! linearization cannot be observable.

mod prop1;
mod rank;

pub use prop1::{verify_prop1, Prop1Sample, Prop1Summary, SweepOptions};
pub use rank::{equilibrate, numerical_rank, singular_values, RankInfo, RANK_RTOL};

use nalgebra::{DMatrix, DVector, SVD};
use num_complex::Complex64;

use crate::dynamics::{rhs, DriveInput, MachineState};
use crate::error::{Error, Result};
use crate::models::MagneticLagrangianModel;

/// Family points must satisfy `max|f(X,U)|` below this.
pub const FAMILY_RESIDUAL: f64 = 1e-12;

/// `linearize` refuses points with `max|f(X,U)|` above this.
pub const STEADY_RESIDUAL: f64 = 1e-9;

/// Relative finite-difference step for the Jacobians.
pub const FD_STEP: f64 = 1e-6;

/// State, input and output of the sensorless system at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct SensorlessStatePoint {
    /// `(τ_L, θ, ω, [Re i_r, Im i_r,] Re i_s, Im i_s)`
    pub x: Vec<f64>,
    /// `(Re u_s, Im u_s)`
    pub u: [f64; 2],
}

impl SensorlessStatePoint {
    pub fn new(state: &MachineState, tau_l: f64, u_s: Complex64) -> Self {
        let mut x = vec![tau_l];
        x.extend(state.to_vec());
        Self { x, u: [u_s.re, u_s.im] }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn tau_l(&self) -> f64 {
        self.x[0]
    }

    pub fn u_s(&self) -> Complex64 {
        Complex64::new(self.u[0], self.u[1])
    }

    pub fn state(&self) -> Result<MachineState> {
        MachineState::from_vec(&self.x[1..])
    }

    /// `(Re i_s, Im i_s)`, the last two state entries.
    pub fn y(&self) -> [f64; 2] {
        let n = self.x.len();
        [self.x[n - 2], self.x[n - 1]]
    }

    /// Names of the state coordinates in order.
    pub fn state_names(&self) -> Vec<&'static str> {
        let mut names = vec!["tau_L", "theta", "omega"];
        if self.x.len() == 7 {
            names.extend(["i_r_re", "i_r_im"]);
        }
        names.extend(["i_s_re", "i_s_im"]);
        names
    }
}

/// `f(X, U)`, the sensorless vector field.
pub fn vector_field(model: &MagneticLagrangianModel, x: &[f64], u: [f64; 2]) -> Result<Vec<f64>> {
    let expected = 1 + 2 + 2 * model.n_currents();
    if x.len() != expected {
        return Err(Error::Argument(format!(
            "{} has a {expected}-dimensional sensorless state, got {}",
            model.kind(),
            x.len()
        )));
    }
    let state = MachineState::from_vec(&x[1..])?;
    let input = DriveInput::constant(Complex64::new(u[0], u[1]), x[0]);
    let mut out = vec![0.0];
    out.extend(rhs(model, &state, &input, 0.0)?.to_vec());
    Ok(out)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// `max|f(X,U)|` at a point.
pub fn steady_residual(model: &MagneticLagrangianModel, point: &SensorlessStatePoint) -> Result<f64> {
    Ok(max_abs(&vector_field(model, &point.x, point.u)?))
}

fn family_currents(model: &MagneticLagrangianModel, i_s_bar: Complex64) -> Vec<Complex64> {
    if model.n_currents() == 2 {
        vec![Complex64::new(0.0, 0.0), i_s_bar]
    } else {
        vec![i_s_bar]
    }
}

/// Zero-frequency steady state for stator current `i_s_bar` at angle `xi`.
pub fn zero_freq_steady_family(
    model: &MagneticLagrangianModel,
    i_s_bar: Complex64,
    xi: f64,
) -> Result<SensorlessStatePoint> {
    if !(i_s_bar.re.is_finite() && i_s_bar.im.is_finite() && xi.is_finite()) {
        return Err(Error::NonFinite("steady-family parameters".into()));
    }
    let currents = family_currents(model, i_s_bar);
    let taylor = model.lagrangian_taylor(xi, &currents)?;
    let tau_l = taylor.gradient[2 * currents.len()];
    let state = match currents[..] {
        [i_s] => MachineState::pm(xi, 0.0, i_s),
        [i_r, i_s] => MachineState::im(xi, 0.0, i_r, i_s),
        _ => unreachable!("one or two currents"),
    };
    let point = SensorlessStatePoint::new(&state, tau_l, model.r_s() * i_s_bar);
    let residual = steady_residual(model, &point)?;
    if !(residual <= FAMILY_RESIDUAL) {
        return Err(Error::InternalConsistency(format!(
            "steady-family point has residual {residual:e} > {FAMILY_RESIDUAL:e}"
        )));
    }
    Ok(point)
}

/// `dX/dξ` along the family at fixed `ī_s`.
pub fn family_tangent(model: &MagneticLagrangianModel, i_s_bar: Complex64, xi: f64) -> Result<DVector<f64>> {
    let currents = family_currents(model, i_s_bar);
    let taylor = model.lagrangian_taylor(xi, &currents)?;
    let n = 2 * currents.len();
    let mut v = DVector::zeros(3 + n);
    v[0] = taylor.hessian[(n, n)];
    v[1] = 1.0;
    Ok(v)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Target for `max|f(X,U)|`.
    pub tolerance: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            tolerance: FAMILY_RESIDUAL,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SteadySolution {
    pub point: SensorlessStatePoint,
    pub iterations: usize,
    pub residual: f64,
}

fn fd_step(x: f64) -> f64 {
    FD_STEP * (1.0 + x.abs())
}

/// Central-difference Jacobian of `g` at `x`, with a scale on the step.
fn jacobian<G>(x: &[f64], rows: usize, step_scale: f64, g: G) -> Result<DMatrix<f64>>
where
    G: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let mut jac = DMatrix::zeros(rows, x.len());
    let mut xp = x.to_vec();
    for k in 0..x.len() {
        let h = step_scale * fd_step(x[k]);
        xp[k] = x[k] + h;
        let fp = g(&xp)?;
        xp[k] = x[k] - h;
        let fm = g(&xp)?;
        xp[k] = x[k];
        let width = (x[k] + h) - (x[k] - h);
        for i in 0..rows {
            jac[(i, k)] = (fp[i] - fm[i]) / width;
        }
    }
    Ok(jac)
}

/// Minimum-norm Newton iteration for `f(X, u_s) = 0` with backtracking.
///
/// The pseudo-inverse handles the singular direction along the family, so
/// the solver lands on the member nearest the guess.
pub fn steady_state_solve(
    model: &MagneticLagrangianModel,
    u_s: Complex64,
    guess: &SensorlessStatePoint,
    options: &SolverOptions,
) -> Result<SteadySolution> {
    let u = [u_s.re, u_s.im];
    let field = |x: &[f64]| vector_field(model, x, u);
    let mut x = guess.x.clone();
    let mut f = field(&x)?;
    let mut res = max_abs(&f);
    let mut iterations = 0;
    while !(res <= options.tolerance) {
        if iterations >= options.max_iterations {
            return Err(Error::NonConvergence {
                iterations,
                residual: res,
            });
        }
        iterations += 1;
        let jac = jacobian(&x, x.len(), 1.0, field)?;
        let svd = SVD::new(jac, true, true);
        let smax = svd.singular_values.max();
        if !(smax > 0.0) {
            return Err(Error::SingularJacobian);
        }
        let eps = smax * 1e-12;
        let step = svd
            .solve(&DVector::from_column_slice(&f), eps)
            .map_err(|_| Error::SingularJacobian)?;
        let mut alpha = 1.0;
        let mut accepted = false;
        while alpha >= 1e-10 {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, d)| a - alpha * d).collect();
            if let Ok(ft) = field(&trial) {
                let rt = max_abs(&ft);
                if rt < res {
                    x = trial;
                    f = ft;
                    res = rt;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            return Err(Error::NonConvergence {
                iterations,
                residual: res,
            });
        }
    }
    Ok(SteadySolution {
        point: SensorlessStatePoint { x, u },
        iterations,
        residual: res,
    })
}

/// Tangent system `dδX/dt = A δX + B δU`, `δY = C δX` at a steady state.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearizedSystem {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub point: SensorlessStatePoint,
    pub state_names: Vec<&'static str>,
}

impl LinearizedSystem {
    pub fn dim(&self) -> usize {
        self.a.nrows()
    }
}

fn linearize_with_step(
    model: &MagneticLagrangianModel,
    point: &SensorlessStatePoint,
    step_scale: f64,
) -> Result<LinearizedSystem> {
    let residual = steady_residual(model, point)?;
    if !(residual <= STEADY_RESIDUAL) {
        return Err(Error::NotSteady {
            residual,
            bound: STEADY_RESIDUAL,
        });
    }
    let n = point.dim();
    let a = jacobian(&point.x, n, step_scale, |x| vector_field(model, x, point.u))?;
    let b = jacobian(&point.u, n, step_scale, |u| vector_field(model, &point.x, [u[0], u[1]]))?;
    let mut c = DMatrix::zeros(2, n);
    c[(0, n - 2)] = 1.0;
    c[(1, n - 1)] = 1.0;
    Ok(LinearizedSystem {
        a,
        b,
        c,
        point: point.clone(),
        state_names: point.state_names(),
    })
}

/// Finite-difference linearization at a steady state.
pub fn linearize(model: &MagneticLagrangianModel, point: &SensorlessStatePoint) -> Result<LinearizedSystem> {
    linearize_with_step(model, point, 1.0)
}

/// Same as [`linearize`] with the finite-difference step multiplied by
/// `step_scale`, for step-sensitivity checks.
pub fn linearize_scaled(
    model: &MagneticLagrangianModel,
    point: &SensorlessStatePoint,
    step_scale: f64,
) -> Result<LinearizedSystem> {
    linearize_with_step(model, point, step_scale)
}

/// `[C; CA; CA²; …; CA^{n−1}]`.
pub fn observability_matrix(sys: &LinearizedSystem) -> DMatrix<f64> {
    let n = sys.a.ncols();
    let p = sys.c.nrows();
    let mut out = DMatrix::zeros(p * n, n);
    let mut block = sys.c.clone();
    for k in 0..n {
        out.view_mut((k * p, 0), (p, n)).copy_from(&block);
        block = &block * &sys.a;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Observable,
    /// Rank deficiency `dim − rank`.
    RankDeficient(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObservabilityReport {
    pub dim: usize,
    pub rank: usize,
    /// Descending spectrum of the equilibrated observability matrix.
    pub singular_values: Vec<f64>,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub info: RankInfo,
}

/// Rank test of the observability matrix.
///
/// Powers of `A` spread the stack over many decades, so rows and columns
/// are first equilibrated by powers of two; see [`equilibrate`].
pub fn observability_report(sys: &LinearizedSystem) -> Result<ObservabilityReport> {
    let (scaled, _, _) = equilibrate(&observability_matrix(sys));
    let info = numerical_rank(&scaled)?;
    let dim = sys.dim();
    let verdict = if info.rank >= dim {
        Verdict::Observable
    } else {
        Verdict::RankDeficient(dim - info.rank)
    };
    Ok(ObservabilityReport {
        dim,
        rank: info.rank,
        singular_values: info.singular_values.clone(),
        tolerance: info.tolerance,
        verdict,
        info,
    })
}

/// Rank of the steady-state map `X ↦ (f(X,ū), h(X))`, i.e. of `[A; C]`.
pub fn steady_map_rank(sys: &LinearizedSystem) -> Result<RankInfo> {
    let n = sys.dim();
    let mut m = DMatrix::zeros(n + 2, n);
    m.view_mut((0, 0), (n, n)).copy_from(&sys.a);
    m.view_mut((n, 0), (2, n)).copy_from(&sys.c);
    numerical_rank(&equilibrate(&m).0)
}

/// Largest `‖O_k v‖ / (‖O_k‖·‖v‖)` over the blocks `O_k = C A^k`.
pub fn kernel_residual(sys: &LinearizedSystem, v: &DVector<f64>) -> f64 {
    let o = observability_matrix(sys);
    let p = sys.c.nrows();
    let vn = v.norm();
    let mut worst: f64 = 0.0;
    for k in 0..sys.dim() {
        let block = o.rows(k * p, p);
        let bn = block.norm();
        if bn > 0.0 && vn > 0.0 {
            worst = worst.max((block * v).norm() / (bn * vn));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelKind;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn pm_family_load_torque() {
        let m = MagneticLagrangianModel::default_for(ModelKind::PmStandard);
        let p = zero_freq_steady_family(&m, c(1.0, 0.0), 0.0).unwrap();
        assert!(p.tau_l().abs() < 1e-15);
        assert_eq!(p.u_s(), c(1.0, 0.0));
        let p = zero_freq_steady_family(&m, c(1.0, 0.0), PI / 6.0).unwrap();
        assert!((p.tau_l() + 0.3).abs() < 1e-14);
    }

    #[test]
    fn im_family_has_no_load() {
        for kind in [ModelKind::ImStandard, ModelKind::ImSat, ModelKind::ImSatHarmonic] {
            let m = MagneticLagrangianModel::default_for(kind);
            let p = zero_freq_steady_family(&m, c(2.0, -1.0), 0.9).unwrap();
            assert_eq!(p.tau_l(), 0.0);
            assert_eq!(p.dim(), 7);
            assert_eq!(p.y(), [2.0, -1.0]);
        }
    }

    #[test]
    fn linearization_structure() {
        let m = MagneticLagrangianModel::default_for(ModelKind::PmStandard);
        let p = zero_freq_steady_family(&m, c(1.5, 0.5), 0.3).unwrap();
        let sys = linearize(&m, &p).unwrap();
        assert!(sys.a.row(0).iter().all(|&v| v == 0.0));
        let mut unit = vec![0.0; 5];
        unit[2] = 1.0;
        assert_eq!(sys.a.row(1).iter().copied().collect::<Vec<_>>(), unit);
        for k in 3..5 {
            assert!((sys.a[(k, k)] + 1.0 / 0.01).abs() < 1e-6);
            assert!((sys.b[(k, k - 3)] - 100.0).abs() < 1e-6);
        }
        assert!(sys.b[(3, 1)].abs() < 1e-6 && sys.b[(4, 0)].abs() < 1e-6);
    }

    #[test]
    fn not_steady_is_rejected() {
        let m = MagneticLagrangianModel::default_for(ModelKind::PmStandard);
        let mut p = zero_freq_steady_family(&m, c(1.0, 0.0), 0.3).unwrap();
        p.x[0] += 0.1;
        assert!(matches!(linearize(&m, &p), Err(Error::NotSteady { .. })));
    }

    #[test]
    fn textbook_observability_matrices() {
        let mk = |a: DMatrix<f64>, c: DMatrix<f64>| LinearizedSystem {
            a,
            b: DMatrix::zeros(3, 2),
            c,
            point: SensorlessStatePoint {
                x: vec![0.0; 3],
                u: [0.0; 2],
            },
            state_names: vec![],
        };
        let mut c2 = DMatrix::zeros(2, 3);
        c2[(0, 0)] = 1.0;
        c2[(1, 1)] = 1.0;
        let o = observability_matrix(&mk(DMatrix::zeros(3, 3), c2));
        assert_eq!(o.shape(), (6, 3));
        assert_eq!(numerical_rank(&o).unwrap().rank, 2);

        let jordan = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 0.0, 2.0, 1.0, 0.0, 0.0, 2.0]);
        let c1 = DMatrix::from_row_slice(1, 3, &[1.0, 0.0, 0.0]);
        let o = observability_matrix(&mk(jordan, c1));
        assert_eq!(numerical_rank(&o).unwrap().rank, 3);
    }

    #[test]
    fn solver_from_family_point() {
        let m = MagneticLagrangianModel::default_for(ModelKind::PmSaliency);
        let p = zero_freq_steady_family(&m, c(1.0, 2.0), 0.4).unwrap();
        let s = steady_state_solve(&m, p.u_s(), &p, &SolverOptions::default()).unwrap();
        assert!(s.iterations <= 1);
        assert_eq!(s.point, p);
    }

    #[test]
    fn solver_lands_on_family() {
        let m = MagneticLagrangianModel::default_for(ModelKind::PmStandard);
        let target = c(2.0, 0.0);
        let mut guess = zero_freq_steady_family(&m, c(1.8, 0.1), 0.2).unwrap();
        guess.x[2] = 0.05;
        let s = steady_state_solve(&m, m.r_s() * target, &guess, &SolverOptions::default()).unwrap();
        assert!(s.residual <= 1e-12);
        let st = s.point.state().unwrap();
        assert!((st.i_s - target).norm() < 1e-10);
        assert!(st.omega.abs() < 1e-10);
        let member = zero_freq_steady_family(&m, target, st.theta).unwrap();
        assert!((member.tau_l() - s.point.tau_l()).abs() < 1e-9);
    }

    #[test]
    fn solver_fails_without_reachable_root() {
        let m = MagneticLagrangianModel::default_for(ModelKind::PmSatSaliency);
        let guess = zero_freq_steady_family(&m, c(1.0, 0.0), 0.0).unwrap();
        let err = steady_state_solve(&m, c(500.0, 0.0), &guess, &SolverOptions::default()).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }), "{err}");
    }
}
