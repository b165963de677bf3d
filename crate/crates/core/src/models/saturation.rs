//! Inductance-versus-current-modulus curves.
//!
//! Every curve is an even function of the modulus `ρ`, so it is written as a
//! function of `s = ρ²`. That keeps the Lagrangians smooth at `ρ = 0` and
//! lets the dual numbers differentiate through it without a `|·|` kink.

use crate::error::{Error, Result};
use crate::wirtinger::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveKind {
    /// `λ(ρ) = λ0`; coefficients `[λ0]`.
    Constant,
    /// `λ(ρ) = λ0 / (1 + (ρ/ρ_s)²)`; coefficients `[λ0, ρ_s]`.
    Rational,
    /// `λ(ρ) = c0 + c1·ρ² + c2·ρ⁴ + …`; coefficients `[c0, c1, …]`.
    Polynomial,
}

impl CurveKind {
    pub fn name(&self) -> &'static str {
        match self {
            CurveKind::Constant => "constant",
            CurveKind::Rational => "rational",
            CurveKind::Polynomial => "polynomial",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "constant" => Some(CurveKind::Constant),
            "rational" => Some(CurveKind::Rational),
            "polynomial" => Some(CurveKind::Polynomial),
            _ => None,
        }
    }
}

/// Grid used to check positivity over the valid range.
const VALIDATION_SAMPLES: usize = 1000;

#[derive(Clone, Debug, PartialEq)]
pub struct SaturationCurve {
    kind: CurveKind,
    coefficients: Vec<f64>,
    range: (f64, f64),
}

impl SaturationCurve {
    pub fn new(kind: CurveKind, coefficients: Vec<f64>, range: (f64, f64)) -> Result<Self> {
        let bad = |reason: String| Error::InvalidParameter {
            name: "saturation".into(),
            reason,
        };
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(bad("coefficients must be finite".into()));
        }
        match kind {
            CurveKind::Constant if coefficients.len() != 1 => {
                return Err(bad("constant curve takes exactly one coefficient".into()))
            }
            CurveKind::Rational if coefficients.len() != 2 => {
                return Err(bad("rational curve takes [lambda0, rho_s]".into()))
            }
            CurveKind::Rational if coefficients[1] <= 0.0 => return Err(bad("rational curve needs rho_s > 0".into())),
            CurveKind::Polynomial if coefficients.is_empty() => {
                return Err(bad("polynomial curve needs at least one coefficient".into()))
            }
            _ => {}
        }
        let (lo, hi) = range;
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi > lo) {
            return Err(bad(format!("range [{lo}, {hi}] must satisfy 0 <= lo < hi")));
        }
        let curve = Self {
            kind,
            coefficients,
            range,
        };
        let at_zero = curve.value_sq(0.0).0;
        if at_zero <= 0.0 {
            return Err(bad(format!("value at rho = 0 is {at_zero}, must be positive")));
        }
        for k in 0..=VALIDATION_SAMPLES {
            let rho = lo + (hi - lo) * k as f64 / VALIDATION_SAMPLES as f64;
            let (v, _) = curve.value_sq(rho * rho);
            if !(v > 0.0) {
                return Err(bad(format!("value {v} at rho = {rho} is not positive")));
            }
        }
        Ok(curve)
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::new(CurveKind::Constant, vec![value], (0.0, f64::MAX.sqrt()))
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn range(&self) -> (f64, f64) {
        self.range
    }

    pub fn check_range(&self, rho: f64) -> Result<()> {
        let (lo, hi) = self.range;
        if rho >= lo && rho <= hi {
            Ok(())
        } else {
            Err(Error::Domain {
                quantity: "rho".into(),
                value: rho,
                lower: lo,
                upper: hi,
            })
        }
    }

    /// Value and derivative with respect to `s = ρ²`.
    pub fn value_sq(&self, s: f64) -> (f64, f64) {
        let c = &self.coefficients;
        match self.kind {
            CurveKind::Constant => (c[0], 0.0),
            CurveKind::Rational => {
                let a = 1.0 / (c[1] * c[1]);
                let den = 1.0 + s * a;
                (c[0] / den, -c[0] * a / (den * den))
            }
            CurveKind::Polynomial => {
                let mut v = 0.0;
                let mut d = 0.0;
                for (k, &ck) in c.iter().enumerate().rev() {
                    v = v * s + ck;
                    if k > 0 {
                        d = d * s + k as f64 * ck;
                    }
                }
                (v, d)
            }
        }
    }

    /// Same as [`value_sq`](Self::value_sq) but on any scalar, value only.
    pub fn eval_sq<T: Scalar>(&self, s: T) -> T {
        let c = &self.coefficients;
        match self.kind {
            CurveKind::Constant => T::cst(c[0]),
            CurveKind::Rational => (s * (1.0 / (c[1] * c[1])) + 1.0).recip() * c[0],
            CurveKind::Polynomial => c.iter().rev().fold(T::zero(), |acc, &ck| acc * s + ck),
        }
    }

    /// `(λ(ρ), dλ/dρ)`.
    pub fn eval(&self, rho: f64) -> Result<(f64, f64)> {
        self.check_range(rho)?;
        let (v, d) = self.value_sq(rho * rho);
        Ok((v, 2.0 * rho * d))
    }
}

/// `(λ(ρ), dλ/dρ)` for `curve`; errors when `ρ` leaves the curve's range.
pub fn saturation_eval(curve: &SaturationCurve, rho: f64) -> Result<(f64, f64)> {
    curve.eval(rho)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_curve() {
        let c = SaturationCurve::constant(0.01).unwrap();
        assert_eq!(saturation_eval(&c, 3.7).unwrap(), (0.01, 0.0));
    }

    #[test]
    fn rational_curve_at_knee() {
        let c = SaturationCurve::new(CurveKind::Rational, vec![0.1, 10.0], (0.0, 100.0)).unwrap();
        let (v, d) = saturation_eval(&c, 10.0).unwrap();
        assert!((v - 0.05).abs() < 1e-16);
        assert!((d + 0.005).abs() < 1e-16);
    }

    #[test]
    fn polynomial_stationary_at_origin() {
        let c = SaturationCurve::new(CurveKind::Polynomial, vec![0.1, -1e-4], (0.0, 20.0)).unwrap();
        assert_eq!(saturation_eval(&c, 0.0).unwrap(), (0.1, 0.0));
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let curves = [
            SaturationCurve::new(CurveKind::Rational, vec![0.1, 7.0], (0.0, 100.0)).unwrap(),
            SaturationCurve::new(CurveKind::Polynomial, vec![0.1, -1e-4, 2e-8], (0.0, 25.0)).unwrap(),
        ];
        for c in &curves {
            for &rho in &[0.5, 3.0, 9.0, 17.0] {
                let h = 1e-5 * (1.0 + rho);
                let fd = (c.eval(rho + h).unwrap().0 - c.eval(rho - h).unwrap().0) / (2.0 * h);
                let d = c.eval(rho).unwrap().1;
                assert!((fd - d).abs() <= 1e-8 * d.abs().max(1e-12), "{fd} vs {d}");
            }
        }
    }

    #[test]
    fn generic_and_plain_paths_agree() {
        let c = SaturationCurve::new(CurveKind::Polynomial, vec![0.1, -1e-4, 3e-8], (0.0, 25.0)).unwrap();
        for &s in &[0.0, 4.0, 121.0] {
            assert_eq!(c.eval_sq(s), c.value_sq(s).0);
        }
    }

    #[test]
    fn out_of_range_is_a_domain_error() {
        let c = SaturationCurve::new(CurveKind::Rational, vec![0.1, 10.0], (0.0, 50.0)).unwrap();
        assert!(matches!(c.eval(50.5), Err(Error::Domain { .. })));
    }

    #[test]
    fn rejects_nonpositive_curves() {
        assert!(SaturationCurve::new(CurveKind::Polynomial, vec![0.1, -1e-3], (0.0, 20.0)).is_err());
        assert!(SaturationCurve::constant(0.0).is_err());
        assert!(SaturationCurve::new(CurveKind::Rational, vec![0.1, 0.0], (0.0, 1.0)).is_err());
        assert!(SaturationCurve::new(CurveKind::Constant, vec![0.1], (2.0, 1.0)).is_err());
    }
}
