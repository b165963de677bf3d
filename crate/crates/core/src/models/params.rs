use super::saturation::SaturationCurve;
use crate::error::{Error, Result};

fn invalid(name: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name: name.into(),
        reason: reason.into(),
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be positive and finite, got {v}")))
    }
}

/// Permanent-magnet machine parameters.
///
/// The magnet is stored as the magnetizing current `ibar`; the magnet flux
/// is derived as `phibar = lambda * ibar`. When a saturation curve is
/// present, its shape relative to its value at `ρ = 0` scales both `lambda`
/// and `mu`, with `ρ = |i_s + ibar·e^{j n_p θ}|`.
#[derive(Clone, Debug, PartialEq)]
pub struct PmParams {
    pub n_p: u32,
    /// Rotor inertia `J` [kg·m²].
    pub inertia: f64,
    pub r_s: f64,
    /// Mean inductance `(L_d + L_q)/2` [H].
    pub lambda: f64,
    /// Saliency inductance `(L_q − L_d)/2` [H].
    pub mu: f64,
    /// Permanent magnetizing current [A].
    pub ibar: f64,
    pub saturation: Option<SaturationCurve>,
}

impl PmParams {
    /// Builds parameters from the magnet flux rather than the magnetizing
    /// current.
    pub fn from_phibar(n_p: u32, inertia: f64, r_s: f64, lambda: f64, mu: f64, phibar: f64) -> Self {
        Self {
            n_p,
            inertia,
            r_s,
            lambda,
            mu,
            ibar: phibar / lambda,
            saturation: None,
        }
    }

    pub fn phibar(&self) -> f64 {
        self.lambda * self.ibar
    }

    /// `L_d = λ − μ`.
    pub fn l_d(&self) -> f64 {
        self.lambda - self.mu
    }

    /// `L_q = λ + μ`.
    pub fn l_q(&self) -> f64 {
        self.lambda + self.mu
    }

    pub fn with_saturation(mut self, curve: SaturationCurve) -> Self {
        self.saturation = Some(curve);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_p == 0 {
            return Err(invalid("n_p", "must be a positive integer"));
        }
        positive("J", self.inertia)?;
        positive("R_s", self.r_s)?;
        positive("lambda", self.lambda)?;
        if !(self.ibar.is_finite() && self.ibar >= 0.0) {
            return Err(invalid("ibar", format!("must be finite and >= 0, got {}", self.ibar)));
        }
        if !self.mu.is_finite() || self.mu.abs() >= self.lambda {
            return Err(invalid(
                "mu",
                format!("|mu| = {} must be below lambda = {}", self.mu.abs(), self.lambda),
            ));
        }
        if let Some(curve) = &self.saturation {
            let (lo, hi) = curve.range();
            let v0 = curve.value_sq(0.0).0;
            for k in 0..=200 {
                let rho = lo + (hi - lo) * k as f64 / 200.0;
                let scale = curve.value_sq(rho * rho).0 / v0;
                if (self.mu * scale).abs() >= self.lambda * scale {
                    return Err(invalid("mu", format!("|mu(rho)| >= lambda(rho) at rho = {rho}")));
                }
            }
        }
        Ok(())
    }
}

/// One space harmonic coupling stator and rotor currents.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Harmonic {
    /// Harmonic order ν.
    pub nu: u32,
    /// σ_ν, either +1 or −1.
    pub sigma: i8,
    pub l_nu: f64,
}

/// Induction machine parameters. A saturation curve scales `l_m` with
/// `ρ = |i_s + i_r·e^{j n_p θ}|`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImParams {
    pub n_p: u32,
    pub inertia: f64,
    pub r_s: f64,
    pub r_r: f64,
    /// Main inductance [H].
    pub l_m: f64,
    pub l_fs: f64,
    pub l_fr: f64,
    pub harmonics: Vec<Harmonic>,
    pub saturation: Option<SaturationCurve>,
}

impl ImParams {
    pub fn with_saturation(mut self, curve: SaturationCurve) -> Self {
        self.saturation = Some(curve);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_p == 0 {
            return Err(invalid("n_p", "must be a positive integer"));
        }
        positive("J", self.inertia)?;
        positive("R_s", self.r_s)?;
        positive("R_r", self.r_r)?;
        positive("L_m", self.l_m)?;
        positive("L_fs", self.l_fs)?;
        positive("L_fr", self.l_fr)?;
        for h in &self.harmonics {
            if h.nu == 0 {
                return Err(invalid("nu", "harmonic order must be positive"));
            }
            if h.sigma != 1 && h.sigma != -1 {
                return Err(invalid("sigma_nu", format!("must be +1 or -1, got {}", h.sigma)));
            }
            if !h.l_nu.is_finite() || h.l_nu.abs() >= 0.2 * self.l_m {
                return Err(invalid(
                    "L_nu",
                    format!("|L_nu| = {} must be below 0.2·L_m = {}", h.l_nu.abs(), 0.2 * self.l_m),
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pm() -> PmParams {
        PmParams::from_phibar(3, 0.01, 1.0, 0.01, 0.002, 0.1)
    }

    #[test]
    fn phibar_and_ibar_are_consistent() {
        let p = pm();
        assert!((p.ibar - 10.0).abs() < 1e-12);
        assert!((p.phibar() - 0.1).abs() < 1e-15);
        assert!((p.l_d() - 0.008).abs() < 1e-15);
        assert!((p.l_q() - 0.012).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_pm_values() {
        let mut p = pm();
        p.lambda = 0.0;
        assert!(p.validate().is_err());
        let mut p = pm();
        p.mu = 0.02;
        assert!(p.validate().is_err());
        let mut p = pm();
        p.inertia = -1.0;
        assert!(p.validate().is_err());
        assert!(pm().validate().is_ok());
    }

    #[test]
    fn rejects_large_harmonic() {
        let p = ImParams {
            n_p: 2,
            inertia: 0.05,
            r_s: 0.5,
            r_r: 0.4,
            l_m: 0.1,
            l_fs: 0.005,
            l_fr: 0.005,
            harmonics: vec![Harmonic {
                nu: 5,
                sigma: 1,
                l_nu: 0.03,
            }],
            saturation: None,
        };
        assert!(p.validate().is_err());
    }
}
