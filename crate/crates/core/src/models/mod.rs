//! Magnetic Lagrangians of permanent-magnet (PM) and induction (IM)
//! machines written with complex currents in the stationary (α,β) frame.
//!
//! PM machines have one complex current `i_s`; IM machines have two, listed
//! as `[i_r, i_s]` everywhere in this crate. With `e = e^{j n_p θ}`:
//!
//! ```text
//! PM:  L_m = λ(ρ)/2·|i_s + ī e|² − μ(ρ)/2·Re((i_s e*)²),         ρ = |i_s + ī e|
//! IM:  L_m = L_m(ρ)/2·|i_s + i_r e|² + L_fr/2·|i_r|² + L_fs/2·|i_s|²
//!            + Σ_ν L_ν·Re(i_s i_r* e^{−j σ_ν ν n_p θ}),            ρ = |i_s + i_r e|
//! ```
//!
//! The simpler kinds are the same expressions with the saliency, saturation
//! or harmonic terms absent, so degenerate parameters reduce exactly.

mod params;
mod saturation;

pub use params::{Harmonic, ImParams, PmParams};
pub use saturation::{saturation_eval, CurveKind, SaturationCurve};

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::wirtinger::{second_order, Cx, Layout, RealFunction, Scalar, Taylor2};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    PmStandard,
    PmSaliency,
    PmSatSaliency,
    ImStandard,
    ImSat,
    ImSatHarmonic,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::PmStandard,
        ModelKind::PmSaliency,
        ModelKind::PmSatSaliency,
        ModelKind::ImStandard,
        ModelKind::ImSat,
        ModelKind::ImSatHarmonic,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::PmStandard => "pm_standard",
            ModelKind::PmSaliency => "pm_saliency",
            ModelKind::PmSatSaliency => "pm_sat_saliency",
            ModelKind::ImStandard => "im_standard",
            ModelKind::ImSat => "im_sat",
            ModelKind::ImSatHarmonic => "im_sat_harmonic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn is_pm(&self) -> bool {
        matches!(
            self,
            ModelKind::PmStandard | ModelKind::PmSaliency | ModelKind::PmSatSaliency
        )
    }

    /// Number of complex currents: 1 for PM, 2 for IM.
    pub fn n_currents(&self) -> usize {
        if self.is_pm() {
            1
        } else {
            2
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MachineParams {
    Pm(PmParams),
    Im(ImParams),
}

/// A validated machine model: a kind plus the parameters it uses.
#[derive(Clone, Debug, PartialEq)]
pub struct MagneticLagrangianModel {
    kind: ModelKind,
    params: MachineParams,
}

/// Scale factor `k(s) = curve(s)/curve(0)` and `dk/ds`, with `s = ρ²`.
fn profile_f64(curve: Option<&SaturationCurve>, s: f64) -> (f64, f64) {
    match curve {
        None => (1.0, 0.0),
        Some(c) => {
            let v0 = c.value_sq(0.0).0;
            let (v, d) = c.value_sq(s);
            (v / v0, d / v0)
        }
    }
}

fn profile<T: Scalar>(curve: Option<&SaturationCurve>, s: T) -> Result<T> {
    match curve {
        None => Ok(T::one()),
        Some(c) => {
            c.check_range(s.value().sqrt())?;
            Ok(c.eval_sq(s) / c.value_sq(0.0).0)
        }
    }
}

fn check_range(curve: Option<&SaturationCurve>, s: f64) -> Result<()> {
    match curve {
        None => Ok(()),
        Some(c) => c.check_range(s.sqrt()),
    }
}

impl MagneticLagrangianModel {
    pub fn new(kind: ModelKind, params: MachineParams) -> Result<Self> {
        let mismatch = |reason: &str| {
            Err(Error::InvalidParameter {
                name: "kind".into(),
                reason: format!("{kind}: {reason}"),
            })
        };
        match (&params, kind) {
            (MachineParams::Pm(p), _) if kind.is_pm() => {
                p.validate()?;
                match kind {
                    ModelKind::PmStandard if p.mu != 0.0 => return mismatch("mu must be 0 (use pm_saliency)"),
                    ModelKind::PmStandard | ModelKind::PmSaliency if p.saturation.is_some() => {
                        return mismatch("takes no saturation curve (use pm_sat_saliency)")
                    }
                    ModelKind::PmSatSaliency if p.saturation.is_none() => {
                        return mismatch("requires a saturation curve")
                    }
                    _ => {}
                }
            }
            (MachineParams::Im(p), _) if !kind.is_pm() => {
                p.validate()?;
                match kind {
                    ModelKind::ImStandard if p.saturation.is_some() || !p.harmonics.is_empty() => {
                        return mismatch("takes neither saturation nor harmonics")
                    }
                    ModelKind::ImSat if p.saturation.is_none() => return mismatch("requires a saturation curve"),
                    ModelKind::ImSat if !p.harmonics.is_empty() => {
                        return mismatch("takes no harmonics (use im_sat_harmonic)")
                    }
                    ModelKind::ImSatHarmonic if p.saturation.is_none() => {
                        return mismatch("requires a saturation curve")
                    }
                    ModelKind::ImSatHarmonic if p.harmonics.is_empty() => {
                        return mismatch("requires at least one harmonic")
                    }
                    _ => {}
                }
            }
            _ => return mismatch("parameter block does not match the machine type"),
        }
        Ok(Self { kind, params })
    }

    /// Desk-scale parameters for each kind; illustrative, not measured.
    pub fn default_for(kind: ModelKind) -> Self {
        let pm = PmParams::from_phibar(3, 0.01, 1.0, 0.01, 0.002, 0.1);
        let im = ImParams {
            n_p: 2,
            inertia: 0.05,
            r_s: 0.5,
            r_r: 0.4,
            l_m: 0.1,
            l_fs: 0.005,
            l_fr: 0.005,
            harmonics: vec![],
            saturation: None,
        };
        let pm_curve = SaturationCurve::new(CurveKind::Rational, vec![0.01, 40.0], (0.0, 200.0)).unwrap();
        let im_curve = SaturationCurve::new(CurveKind::Rational, vec![0.1, 20.0], (0.0, 200.0)).unwrap();
        let params = match kind {
            ModelKind::PmStandard => MachineParams::Pm(PmParams { mu: 0.0, ..pm }),
            ModelKind::PmSaliency => MachineParams::Pm(pm),
            ModelKind::PmSatSaliency => MachineParams::Pm(pm.with_saturation(pm_curve)),
            ModelKind::ImStandard => MachineParams::Im(im),
            ModelKind::ImSat => MachineParams::Im(im.with_saturation(im_curve)),
            ModelKind::ImSatHarmonic => MachineParams::Im(ImParams {
                harmonics: vec![Harmonic {
                    nu: 5,
                    sigma: 1,
                    l_nu: 0.002,
                }],
                ..im.with_saturation(im_curve)
            }),
        };
        Self::new(kind, params).expect("default parameters are valid")
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn params(&self) -> &MachineParams {
        &self.params
    }

    pub fn pm_params(&self) -> Option<&PmParams> {
        match &self.params {
            MachineParams::Pm(p) => Some(p),
            MachineParams::Im(_) => None,
        }
    }

    pub fn im_params(&self) -> Option<&ImParams> {
        match &self.params {
            MachineParams::Im(p) => Some(p),
            MachineParams::Pm(_) => None,
        }
    }

    pub fn n_p(&self) -> u32 {
        match &self.params {
            MachineParams::Pm(p) => p.n_p,
            MachineParams::Im(p) => p.n_p,
        }
    }

    pub fn inertia(&self) -> f64 {
        match &self.params {
            MachineParams::Pm(p) => p.inertia,
            MachineParams::Im(p) => p.inertia,
        }
    }

    pub fn r_s(&self) -> f64 {
        match &self.params {
            MachineParams::Pm(p) => p.r_s,
            MachineParams::Im(p) => p.r_s,
        }
    }

    /// Resistance per complex current, in current order.
    pub fn resistances(&self) -> Vec<f64> {
        match &self.params {
            MachineParams::Pm(p) => vec![p.r_s],
            MachineParams::Im(p) => vec![p.r_r, p.r_s],
        }
    }

    pub fn saturation(&self) -> Option<&SaturationCurve> {
        match &self.params {
            MachineParams::Pm(p) => p.saturation.as_ref(),
            MachineParams::Im(p) => p.saturation.as_ref(),
        }
    }

    pub fn n_currents(&self) -> usize {
        self.kind.n_currents()
    }

    /// Real layout of `[currents…, θ]` used for differentiation.
    pub fn layout(&self) -> Layout {
        Layout::new(self.n_currents(), 1)
    }

    /// Mechanical period in θ.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.n_p() as f64
    }

    fn check_currents(&self, n: usize) -> Result<()> {
        if n != self.n_currents() {
            return Err(Error::Argument(format!(
                "{} expects {} complex current(s), got {n}",
                self.kind,
                self.n_currents()
            )));
        }
        Ok(())
    }

    /// The magnetic Lagrangian on any scalar type.
    pub fn lagrangian<T: Scalar>(&self, theta: T, currents: &[Cx<T>]) -> Result<T> {
        self.check_currents(currents.len())?;
        let n = self.n_p() as f64;
        let e = Cx::expj(theta * n);
        match &self.params {
            MachineParams::Pm(p) => {
                let i = currents[0];
                let z = i + e.scale_f(p.ibar);
                let s = z.norm_sqr();
                let k = profile(p.saturation.as_ref(), s)?;
                let w = i * e.conj();
                let w2 = w * w;
                Ok(k * p.lambda * s * 0.5 - k * p.mu * w2.re * 0.5)
            }
            MachineParams::Im(p) => {
                let (ir, is) = (currents[0], currents[1]);
                let z = is + ir * e;
                let s = z.norm_sqr();
                let k = profile(p.saturation.as_ref(), s)?;
                let mut l = k * p.l_m * s * 0.5 + ir.norm_sqr() * (0.5 * p.l_fr) + is.norm_sqr() * (0.5 * p.l_fs);
                for h in &p.harmonics {
                    let eh = Cx::expj(theta * (h.sigma as f64 * h.nu as f64 * n));
                    l = l + (is * ir.conj() * eh.conj()).re * h.l_nu;
                }
                Ok(l)
            }
        }
    }

    /// `L_m(θ, currents)` [J].
    pub fn eval_lagrangian(&self, theta: f64, currents: &[Complex64]) -> Result<f64> {
        let c: Vec<Cx<f64>> = currents.iter().map(|&z| Cx::from_c64(z)).collect();
        self.lagrangian(theta, &c)
    }

    /// Value, gradient and Hessian of `L_m` over `[currents…, θ]`.
    pub fn lagrangian_taylor(&self, theta: f64, currents: &[Complex64]) -> Result<Taylor2> {
        self.check_currents(currents.len())?;
        let mut x = Vec::with_capacity(2 * currents.len() + 1);
        for z in currents {
            x.push(z.re);
            x.push(z.im);
        }
        x.push(theta);
        second_order(&LagrangianFn(self), &x)
    }

    /// Closed-form fluxes: `[φ_s]` for PM, `[φ_r, φ_s]` for IM.
    pub fn analytic_flux(&self, theta: f64, currents: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_currents(currents.len())?;
        let n = self.n_p() as f64;
        let e = Complex64::from_polar(1.0, n * theta);
        match &self.params {
            MachineParams::Pm(p) => {
                let c = self.pm_coefficients(p, e, currents[0])?;
                let i = currents[0];
                let e2 = e * e;
                let flux =
                    c.big_lambda * c.z - c.big_m * i.conj() * e2 + c.mu_ks * (c.s * i.conj() * e2 - c.w2.re * c.z);
                Ok(vec![flux])
            }
            MachineParams::Im(p) => {
                let (ir, is) = (currents[0], currents[1]);
                let z = is + ir * e;
                let s = z.norm_sqr();
                check_range(p.saturation.as_ref(), s)?;
                let (k, ks) = profile_f64(p.saturation.as_ref(), s);
                let lambda_m = p.l_m * k + s * p.l_m * ks;
                let mut phi_r = lambda_m * (ir + is * e.conj()) + p.l_fr * ir;
                let mut phi_s = lambda_m * z + p.l_fs * is;
                for h in &p.harmonics {
                    let eh = Complex64::from_polar(1.0, h.sigma as f64 * h.nu as f64 * n * theta);
                    phi_r += h.l_nu * is * eh.conj();
                    phi_s += h.l_nu * ir * eh;
                }
                Ok(vec![phi_r, phi_s])
            }
        }
    }

    /// Closed-form electromagnetic torque `∂L_m/∂θ` [N·m].
    pub fn analytic_torque(&self, theta: f64, currents: &[Complex64]) -> Result<f64> {
        self.check_currents(currents.len())?;
        let n = self.n_p() as f64;
        let e = Complex64::from_polar(1.0, n * theta);
        match &self.params {
            MachineParams::Pm(p) => {
                let c = self.pm_coefficients(p, e, currents[0])?;
                Ok(n * (c.big_lambda * p.ibar * c.w.im - c.big_m * c.w2.im)
                    + n * c.mu_ks * (c.s * c.w2.im - p.ibar * c.w2.re * c.w.im))
            }
            MachineParams::Im(p) => {
                let (ir, is) = (currents[0], currents[1]);
                let z = is + ir * e;
                let s = z.norm_sqr();
                check_range(p.saturation.as_ref(), s)?;
                let (k, ks) = profile_f64(p.saturation.as_ref(), s);
                let lambda_m = p.l_m * k + s * p.l_m * ks;
                let mut coupling = lambda_m * e.conj();
                for h in &p.harmonics {
                    let order = h.sigma as f64 * h.nu as f64;
                    coupling += h.l_nu * order * Complex64::from_polar(1.0, -order * n * theta);
                }
                Ok(n * (coupling * ir.conj() * is).im)
            }
        }
    }

    fn pm_coefficients(&self, p: &PmParams, e: Complex64, i: Complex64) -> Result<PmTerms> {
        let z = i + p.ibar * e;
        let s = z.norm_sqr();
        check_range(p.saturation.as_ref(), s)?;
        let (k, ks) = profile_f64(p.saturation.as_ref(), s);
        let w = i * e.conj();
        Ok(PmTerms {
            z,
            s,
            w,
            w2: w * w,
            big_lambda: p.lambda * k + s * p.lambda * ks,
            big_m: p.mu * k + s * p.mu * ks,
            mu_ks: p.mu * ks,
            lambda_ks: p.lambda * ks,
            lambda_eff: p.lambda * k,
            mu_eff: p.mu * k,
        })
    }

    pub(crate) fn pm_terms(&self, theta: f64, i: Complex64) -> Result<Option<PmTerms>> {
        match &self.params {
            MachineParams::Pm(p) => {
                let e = Complex64::from_polar(1.0, self.n_p() as f64 * theta);
                self.pm_coefficients(p, e, i).map(Some)
            }
            MachineParams::Im(_) => Ok(None),
        }
    }

    /// `(L_m k, s·L_m·dk/ds, ρ²)` for IM models.
    pub(crate) fn im_saturation_terms(&self, theta: f64, currents: &[Complex64]) -> Result<(f64, f64, f64)> {
        let p = self
            .im_params()
            .ok_or_else(|| Error::Argument("not an IM model".into()))?;
        self.check_currents(currents.len())?;
        let e = Complex64::from_polar(1.0, self.n_p() as f64 * theta);
        let z = currents[1] + currents[0] * e;
        let s = z.norm_sqr();
        check_range(p.saturation.as_ref(), s)?;
        let (k, ks) = profile_f64(p.saturation.as_ref(), s);
        Ok((p.l_m * k, s * p.l_m * ks, s))
    }
}

/// Intermediate PM quantities shared by the closed forms.
///
/// `big_lambda = λ + (ρ/2)λ'` and `big_m = μ + (ρ/2)μ'` are the effective
/// inductances; `mu_ks = μ'/(2ρ)`, which stays finite at `ρ = 0`.
pub(crate) struct PmTerms {
    pub z: Complex64,
    pub s: f64,
    /// `i_s e^{−j n_p θ}`
    pub w: Complex64,
    pub w2: Complex64,
    pub big_lambda: f64,
    pub big_m: f64,
    pub mu_ks: f64,
    pub lambda_ks: f64,
    pub lambda_eff: f64,
    pub mu_eff: f64,
}

/// Adapter exposing the Lagrangian over the flat layout `[currents…, θ]`.
pub struct LagrangianFn<'a>(pub &'a MagneticLagrangianModel);

impl RealFunction for LagrangianFn<'_> {
    fn eval<T: Scalar>(&self, x: &[T]) -> Result<T> {
        let nc = self.0.n_currents();
        if x.len() != 2 * nc + 1 {
            return Err(Error::Argument(format!(
                "expected {} coordinates, got {}",
                2 * nc + 1,
                x.len()
            )));
        }
        let currents: Vec<Cx<T>> = (0..nc).map(|k| Cx::new(x[2 * k], x[2 * k + 1])).collect();
        self.0.lagrangian(x[2 * nc], &currents)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wirtinger::{wirtinger_from_real, RealPoint};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn pm_standard_at_rest() {
        let m = MagneticLagrangianModel::default_for(ModelKind::PmStandard);
        let l = m.eval_lagrangian(0.0, &[c(0.0, 0.0)]).unwrap();
        assert!((l - 0.5).abs() < 1e-14);
        let phi = m.analytic_flux(0.0, &[c(0.0, 0.0)]).unwrap();
        assert!((phi[0] - c(0.1, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn pm_standard_gradient_and_flux_constant() {
        let m = MagneticLagrangianModel::default_for(ModelKind::PmStandard);
        let t = m.lagrangian_taylor(0.0, &[c(0.0, 0.0)]).unwrap();
        assert!((t.gradient[0] - 0.1).abs() < 1e-15);
        assert_eq!(t.gradient[1], 0.0);
        let w = wirtinger_from_real(&t.gradient, m.layout()).unwrap();
        assert!((2.0 * w.d_dqstar[0] - c(0.1, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn im_standard_vanishes_at_zero_current() {
        let m = MagneticLagrangianModel::default_for(ModelKind::ImStandard);
        assert_eq!(m.eval_lagrangian(1.234, &[c(0.0, 0.0), c(0.0, 0.0)]).unwrap(), 0.0);
    }

    #[test]
    fn pm_saliency_hand_value() {
        let m = MagneticLagrangianModel::default_for(ModelKind::PmSaliency);
        let l = m.eval_lagrangian(0.0, &[c(1.0, 0.0)]).unwrap();
        assert!((l - 0.604).abs() < 1e-14, "{l}");
        let phi = m.analytic_flux(0.0, &[c(1.0, 0.0)]).unwrap();
        assert!((phi[0] - c(0.108, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn im_standard_flux_hand_value() {
        let m = MagneticLagrangianModel::default_for(ModelKind::ImStandard);
        for &theta in &[0.0, 0.4] {
            let phi = m.analytic_flux(theta, &[c(0.0, 0.0), c(2.0, 0.0)]).unwrap();
            let expect_r = Complex64::from_polar(0.2, -2.0 * theta);
            assert!((phi[0] - expect_r).norm() < 1e-15);
            assert!((phi[1] - c(0.21, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn torque_hand_values() {
        let m = MagneticLagrangianModel::default_for(ModelKind::PmStandard);
        for &theta in &[0.0, 0.3, -2.0] {
            let e = Complex64::from_polar(1.0, 3.0 * theta);
            let tq = m.analytic_torque(theta, &[c(0.0, 5.0) * e]).unwrap();
            assert!((tq - 1.5).abs() < 1e-13);
            let tq = m.analytic_torque(theta, &[5.0 * e]).unwrap();
            assert!(tq.abs() < 1e-13);
        }
        for kind in [ModelKind::ImStandard, ModelKind::ImSat, ModelKind::ImSatHarmonic] {
            let m = MagneticLagrangianModel::default_for(kind);
            assert_eq!(m.analytic_torque(0.7, &[c(0.0, 0.0), c(3.0, -1.0)]).unwrap(), 0.0);
        }
    }

    #[test]
    fn hessian_of_pm_models() {
        let std = MagneticLagrangianModel::default_for(ModelKind::PmStandard);
        for &(theta, i) in &[(0.0, c(0.0, 0.0)), (1.3, c(2.0, -4.0))] {
            let h = std.lagrangian_taylor(theta, &[i]).unwrap().hessian;
            assert!((h[(0, 0)] - 0.01).abs() < 1e-16 && (h[(1, 1)] - 0.01).abs() < 1e-16);
            assert_eq!(h[(0, 1)], 0.0);
        }
        let sal = MagneticLagrangianModel::default_for(ModelKind::PmSaliency);
        let h = sal.lagrangian_taylor(0.0, &[c(0.4, 0.9)]).unwrap().hessian;
        assert!((h[(0, 0)] - 0.008).abs() < 1e-16);
        assert!((h[(1, 1)] - 0.012).abs() < 1e-16);
        assert!(h[(0, 1)].abs() < 1e-18);
    }

    #[test]
    fn real_point_layout_matches_model() {
        let m = MagneticLagrangianModel::default_for(ModelKind::ImSat);
        let p = RealPoint::from_parts(&[c(1.0, 2.0), c(3.0, 4.0)], &[0.5]);
        assert_eq!(p.layout(), m.layout());
    }

    #[test]
    fn wrong_current_count() {
        let m = MagneticLagrangianModel::default_for(ModelKind::ImStandard);
        assert!(matches!(
            m.eval_lagrangian(0.0, &[c(1.0, 0.0)]),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn out_of_range_current() {
        let m = MagneticLagrangianModel::default_for(ModelKind::PmSatSaliency);
        let err = m.eval_lagrangian(0.0, &[c(500.0, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::Domain { ref quantity, .. } if quantity == "rho"));
        assert!(m.analytic_flux(0.0, &[c(500.0, 0.0)]).is_err());
        assert!(m.lagrangian_taylor(0.0, &[c(500.0, 0.0)]).is_err());
    }

    /// Flux and torque written with `Λ` and `M` substituted for `λ` and `μ`.
    fn substituted_forms(m: &MagneticLagrangianModel, theta: f64, i: Complex64) -> (Complex64, f64) {
        let p = m.pm_params().unwrap();
        let t = m.pm_terms(theta, i).unwrap().unwrap();
        let e = Complex64::from_polar(1.0, 3.0 * theta);
        let flux = t.big_lambda * t.z - t.big_m * i.conj() * e * e;
        let torque = 3.0 * ((t.big_lambda * (i.conj() + p.ibar * e.conj()) - t.big_m * i * (e * e).conj()) * i).im;
        (flux, torque)
    }

    #[test]
    fn substituted_forms_need_constant_saliency() {
        let sat = MagneticLagrangianModel::default_for(ModelKind::PmSatSaliency);
        let mut p = sat.pm_params().unwrap().clone();
        p.mu = 0.0;
        let no_saliency = MagneticLagrangianModel::new(ModelKind::PmSatSaliency, MachineParams::Pm(p)).unwrap();
        let (theta, i) = (0.4, c(3.0, -2.0));
        let exact = |m: &MagneticLagrangianModel| {
            (
                m.analytic_flux(theta, &[i]).unwrap()[0],
                m.analytic_torque(theta, &[i]).unwrap(),
            )
        };

        let (f0, t0) = substituted_forms(&no_saliency, theta, i);
        let (f1, t1) = exact(&no_saliency);
        assert!((f0 - f1).norm() <= 1e-14 * f1.norm());
        assert!((t0 - t1).abs() <= 1e-13 * t1.abs());

        let (f0, t0) = substituted_forms(&sat, theta, i);
        let (f1, t1) = exact(&sat);
        assert!((f0 - f1).norm() > 1e-6 * f1.norm());
        assert!((t0 - t1).abs() > 1e-6 * t1.abs());
    }

    #[test]
    fn kind_parameter_mismatch() {
        let pm = MagneticLagrangianModel::default_for(ModelKind::PmSaliency);
        let params = pm.params().clone();
        assert!(MagneticLagrangianModel::new(ModelKind::PmStandard, params.clone()).is_err());
        assert!(MagneticLagrangianModel::new(ModelKind::PmSatSaliency, params.clone()).is_err());
        assert!(MagneticLagrangianModel::new(ModelKind::ImStandard, params).is_err());
        for kind in ModelKind::ALL {
            assert_eq!(ModelKind::parse(kind.name()), Some(kind));
        }
    }
}
