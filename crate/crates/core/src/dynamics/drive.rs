use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Stator voltage as a function of time.
#[derive(Clone, Debug, PartialEq)]
pub enum VoltageProfile {
    Constant(Complex64),
    /// `amplitude·e^{j(2π·frequency·t + phase)}`.
    Sinusoid {
        amplitude: f64,
        frequency: f64,
        phase: f64,
    },
    /// Piecewise-linear through `(t, u_s)` knots, held constant outside.
    Table(Vec<(f64, Complex64)>),
}

impl VoltageProfile {
    pub fn at(&self, t: f64) -> Complex64 {
        match self {
            VoltageProfile::Constant(u) => *u,
            VoltageProfile::Sinusoid {
                amplitude,
                frequency,
                phase,
            } => Complex64::from_polar(*amplitude, 2.0 * PI * frequency * t + phase),
            VoltageProfile::Table(knots) => {
                let k = knots.partition_point(|&(tk, _)| tk <= t);
                if k == 0 {
                    knots[0].1
                } else if k == knots.len() {
                    knots[k - 1].1
                } else {
                    let (t0, u0) = knots[k - 1];
                    let (t1, u1) = knots[k];
                    u0 + (u1 - u0) * ((t - t0) / (t1 - t0))
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |u: &Complex64| u.re.is_finite() && u.im.is_finite();
        match self {
            VoltageProfile::Constant(u) if !finite(u) => Err(Error::NonFinite("constant stator voltage".into())),
            VoltageProfile::Sinusoid {
                amplitude,
                frequency,
                phase,
            } if !(amplitude.is_finite() && frequency.is_finite() && phase.is_finite()) => {
                Err(Error::NonFinite("sinusoidal stator voltage".into()))
            }
            VoltageProfile::Table(knots) => {
                if knots.is_empty() {
                    return Err(Error::Argument("voltage table has no rows".into()));
                }
                if !knots.iter().all(|(t, u)| t.is_finite() && finite(u)) {
                    return Err(Error::NonFinite("voltage table".into()));
                }
                if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(Error::Argument(
                        "voltage table times must be strictly increasing".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Stator voltage profile and constant load torque.
#[derive(Clone, Debug, PartialEq)]
pub struct DriveInput {
    pub u_s: VoltageProfile,
    pub tau_l: f64,
}

impl DriveInput {
    pub fn zero() -> Self {
        Self::constant(Complex64::new(0.0, 0.0), 0.0)
    }

    pub fn constant(u_s: Complex64, tau_l: f64) -> Self {
        Self {
            u_s: VoltageProfile::Constant(u_s),
            tau_l,
        }
    }

    pub fn sinusoid(amplitude: f64, frequency: f64, phase: f64, tau_l: f64) -> Self {
        Self {
            u_s: VoltageProfile::Sinusoid {
                amplitude,
                frequency,
                phase,
            },
            tau_l,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.tau_l.is_finite() {
            return Err(Error::NonFinite("load torque".into()));
        }
        self.u_s.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_interpolates_and_holds() {
        let p = VoltageProfile::Table(vec![(0.0, Complex64::new(0.0, 0.0)), (1.0, Complex64::new(2.0, -4.0))]);
        assert_eq!(p.at(-1.0), Complex64::new(0.0, 0.0));
        assert_eq!(p.at(0.25), Complex64::new(0.5, -1.0));
        assert_eq!(p.at(3.0), Complex64::new(2.0, -4.0));
        assert!(p.validate().is_ok());
        let bad = VoltageProfile::Table(vec![(1.0, Complex64::new(0.0, 0.0)); 2]);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn sinusoid_rotates() {
        let d = DriveInput::sinusoid(2.0, 0.25, 0.0, 0.0);
        assert!((d.u_s.at(1.0) - Complex64::new(0.0, 2.0)).norm() < 1e-15);
    }
}
