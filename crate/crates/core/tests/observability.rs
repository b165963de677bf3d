use cxlagrange::dynamics::MachineState;
use cxlagrange::models::{MachineParams, MagneticLagrangianModel, ModelKind, SaturationCurve};
use cxlagrange::observability::{
    linearize, linearize_scaled, observability_matrix, observability_report, steady_state_solve, verify_prop1,
    zero_freq_steady_family, SensorlessStatePoint, SolverOptions, SweepOptions, Verdict,
};
use cxlagrange::Error;
use num_complex::Complex64;

#[test]
fn every_kind_is_rank_deficient() {
    for kind in ModelKind::ALL {
        let s = verify_prop1(&MagneticLagrangianModel::default_for(kind), &SweepOptions::default()).unwrap();
        assert!(s.all_deficient());
        assert!(s.max_tangent_residual() <= 1e-6);
        assert_eq!(s.samples.len(), 20);
    }
}

#[test]
fn sweep_is_deterministic_per_seed() {
    let m = MagneticLagrangianModel::default_for(ModelKind::ImSat);
    let opts = SweepOptions {
        seed: 42,
        ..Default::default()
    };
    let a = verify_prop1(&m, &opts).unwrap();
    let b = verify_prop1(&m, &opts).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    let c = verify_prop1(&m, &SweepOptions { seed: 43, ..opts }).unwrap();
    assert_ne!(a.to_csv(), c.to_csv());
    assert_eq!(a.to_csv().lines().count(), 21);
}

#[test]
fn linearization_is_step_insensitive() {
    for kind in ModelKind::ALL {
        let m = MagneticLagrangianModel::default_for(kind);
        let p = zero_freq_steady_family(&m, Complex64::new(1.5, -2.0), 2.3).unwrap();
        let a = linearize(&m, &p).unwrap();
        let b = linearize_scaled(&m, &p, 0.5).unwrap();
        let rel = (&a.a - &b.a).amax() / a.a.amax();
        assert!(rel <= 1e-6, "{kind}: {rel}");
        assert_eq!(a.c, b.c);
    }
}

#[test]
fn constant_curve_report_matches_unsaturated() {
    let sal = MagneticLagrangianModel::default_for(ModelKind::PmSaliency);
    let p = sal
        .pm_params()
        .unwrap()
        .clone()
        .with_saturation(SaturationCurve::constant(0.01).unwrap());
    let sat = MagneticLagrangianModel::new(ModelKind::PmSatSaliency, MachineParams::Pm(p)).unwrap();
    let i = Complex64::new(0.7, 2.2);
    let a = observability_report(&linearize(&sal, &zero_freq_steady_family(&sal, i, 0.4).unwrap()).unwrap()).unwrap();
    let b = observability_report(&linearize(&sat, &zero_freq_steady_family(&sat, i, 0.4).unwrap()).unwrap()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.verdict, Verdict::RankDeficient(1));
}

#[test]
fn linearization_requires_a_steady_point() {
    let m = MagneticLagrangianModel::default_for(ModelKind::PmSaliency);
    let point = SensorlessStatePoint::new(
        &MachineState::pm(0.3, 50.0, Complex64::new(1.0, 1.0)),
        0.0,
        Complex64::new(2.0, 1.0),
    );
    assert!(matches!(linearize(&m, &point), Err(Error::NotSteady { .. })));
    let p = zero_freq_steady_family(&m, Complex64::new(1.0, 1.0), 0.3).unwrap();
    let sys = linearize(&m, &p).unwrap();
    assert_eq!(observability_matrix(&sys).shape(), (10, 5));
}

#[test]
fn solver_lands_on_the_family() {
    for kind in [ModelKind::PmSatSaliency, ModelKind::ImSatHarmonic] {
        let m = MagneticLagrangianModel::default_for(kind);
        let exact = zero_freq_steady_family(&m, Complex64::new(2.0, 1.0), 0.8).unwrap();
        let mut guess = exact.clone();
        for (k, v) in guess.x.iter_mut().enumerate() {
            *v += 0.05 * (k as f64 + 1.0).sin();
        }
        let sol = steady_state_solve(&m, exact.u_s(), &guess, &SolverOptions::default()).unwrap();
        assert!(sol.residual <= 1e-12);
        let n = sol.point.dim();
        let i_s = Complex64::new(sol.point.x[n - 2], sol.point.x[n - 1]);
        assert!((i_s - exact.u_s() / m.r_s()).norm() <= 1e-9);
        assert!(sol.point.x[2].abs() <= 1e-9);
    }
}

#[test]
fn solver_reports_nonconvergence() {
    let m = MagneticLagrangianModel::default_for(ModelKind::PmStandard);
    let guess = SensorlessStatePoint::new(&MachineState::zero(&m), 0.0, Complex64::new(1.0, 0.0));
    let opts = SolverOptions {
        max_iterations: 1,
        tolerance: 1e-15,
    };
    match steady_state_solve(&m, Complex64::new(1.0, 0.0), &guess, &opts) {
        Err(Error::NonConvergence { iterations, .. }) => assert_eq!(iterations, 1),
        Ok(s) => assert!(s.iterations <= 1),
        Err(e) => panic!("{e}"),
    }
}
