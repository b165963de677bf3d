use cxlagrange::checks::random_points;
use cxlagrange::dynamics::{simulate, DriveInput, MachineState};
use cxlagrange::energy::{
    closed_form_magnetic_energy, energy_breakdown, magnetic_energy, power_balance_audit, power_terms,
};
use cxlagrange::models::{MagneticLagrangianModel, ModelKind};
use cxlagrange::Error;
use num_complex::Complex64;

#[test]
fn rest_run_has_zero_energy_flow() {
    let m = MagneticLagrangianModel::default_for(ModelKind::ImStandard);
    let input = DriveInput::zero();
    let traj = simulate(&m, &MachineState::zero(&m), &input, 0.01, 1e-4).unwrap();
    let audit = power_balance_audit(&m, &traj, &input).unwrap();
    assert!(audit.hamiltonian.iter().all(|&h| h == 0.0));
    assert_eq!(audit.max_residual, 0.0);
    assert_eq!(audit.drift, 0.0);
    assert_eq!(audit.relative_drift, 0.0);
}

#[test]
fn audit_rejects_a_foreign_trajectory() {
    let a = MagneticLagrangianModel::default_for(ModelKind::PmStandard);
    let b = MagneticLagrangianModel::default_for(ModelKind::PmSaliency);
    let input = DriveInput::sinusoid(5.0, 5.0, 0.0, 0.0);
    let traj = simulate(
        &a,
        &MachineState::pm(0.3, 1.0, Complex64::new(1.0, 2.0)),
        &input,
        0.01,
        1e-4,
    )
    .unwrap();
    assert!(matches!(
        power_balance_audit(&b, &traj, &input),
        Err(Error::Argument(_))
    ));
    let im = MagneticLagrangianModel::default_for(ModelKind::ImStandard);
    assert!(power_balance_audit(&im, &traj, &input).is_err());
}

#[test]
fn coarse_step_shows_drift() {
    let m = MagneticLagrangianModel::default_for(ModelKind::PmSaliency);
    let input = DriveInput::sinusoid(5.0, 20.0, 0.0, 0.0);
    let fine = simulate(&m, &MachineState::zero(&m), &input, 0.2, 1e-5).unwrap();
    let coarse = simulate(&m, &MachineState::zero(&m), &input, 0.2, 1e-3).unwrap();
    let a = power_balance_audit(&m, &fine, &input).unwrap();
    let b = power_balance_audit(&m, &coarse, &input).unwrap();
    assert!(a.relative_drift <= 1e-6, "{}", a.relative_drift);
    assert!(
        b.relative_drift > 100.0 * a.relative_drift,
        "{} vs {}",
        b.relative_drift,
        a.relative_drift
    );
    assert!(a.pointwise_ok());
}

#[test]
fn loaded_run_balances() {
    for kind in [ModelKind::PmSaliency, ModelKind::ImSatHarmonic] {
        let m = MagneticLagrangianModel::default_for(kind);
        let input = DriveInput::sinusoid(8.0, 10.0, 0.4, 0.05);
        let traj = simulate(&m, &MachineState::zero(&m), &input, 0.2, 1e-5).unwrap();
        let audit = power_balance_audit(&m, &traj, &input).unwrap();
        assert!(audit.relative_drift <= 1e-6, "{kind}: {}", audit.relative_drift);
        assert!(audit.pointwise_ok(), "{kind}: {}", audit.summary());
    }
}

#[test]
fn audit_needs_three_samples() {
    let m = MagneticLagrangianModel::default_for(ModelKind::PmStandard);
    let traj = simulate(&m, &MachineState::zero(&m), &DriveInput::zero(), 1e-4, 1e-4).unwrap();
    assert_eq!(traj.len(), 2);
    assert!(power_balance_audit(&m, &traj, &DriveInput::zero()).is_err());
}

#[test]
fn legendre_matches_closed_forms() {
    for kind in ModelKind::ALL {
        let m = MagneticLagrangianModel::default_for(kind);
        for (theta, cur) in random_points(&m, 300, 8.0, 11) {
            let h = magnetic_energy(&m, theta, &cur).unwrap();
            let c = closed_form_magnetic_energy(&m, theta, &cur).unwrap();
            let l = m.eval_lagrangian(theta, &cur).unwrap();
            assert!((h - c).abs() <= 1e-12 * (h.abs() + l.abs()), "{kind}: {h} vs {c}");
        }
    }
}

#[test]
fn power_terms_sign_conventions() {
    let m = MagneticLagrangianModel::default_for(ModelKind::ImStandard);
    let s = MachineState::im(0.0, 2.0, Complex64::new(0.0, 1.0), Complex64::new(3.0, 0.0));
    let p = power_terms(&m, &s, Complex64::new(10.0, 5.0), 0.5);
    let ip = m.im_params().unwrap();
    assert_eq!(p.input, 30.0);
    assert_eq!(p.losses, 9.0 * ip.r_s + ip.r_r);
    assert_eq!(p.load, 1.0);
    assert_eq!(p.net, p.input - p.losses - p.load);
    let e = energy_breakdown(&m, &s).unwrap();
    assert_eq!(e.h_mech, 0.5 * ip.inertia * 4.0);
    assert_eq!(e.total, e.h_mech + e.h_mag);
}
