use std::fmt;
use std::io::{self, Write};

use num_complex::Complex64;

use super::MachineState;
use crate::error::Error;

/// Sampled run. Every derived column is recomputed from `states`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<MachineState>,
    /// Fluxes per sample in model order: `[φ_s]` or `[φ_r, φ_s]`.
    pub fluxes: Vec<Vec<Complex64>>,
    pub torque_em: Vec<f64>,
    /// Total energy `Jω²/2 + H_m` per sample.
    pub hamiltonian: Vec<f64>,
}

impl Trajectory {
    pub(crate) fn push(&mut self, t: f64, state: MachineState, fluxes: Vec<Complex64>, torque: f64, h: f64) {
        self.times.push(t);
        self.states.push(state);
        self.fluxes.push(fluxes);
        self.torque_em.push(torque);
        self.hamiltonian.push(h);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> Option<&MachineState> {
        self.states.last()
    }

    fn has_rotor(&self) -> bool {
        self.states.first().is_some_and(|s| s.i_r.is_some())
    }

    pub fn csv_header(&self) -> String {
        let mut cols = vec!["t", "theta", "omega", "i_s_re", "i_s_im"];
        if self.has_rotor() {
            cols.extend(["i_r_re", "i_r_im"]);
        }
        cols.extend(["phi_s_re", "phi_s_im"]);
        if self.has_rotor() {
            cols.extend(["phi_r_re", "phi_r_im"]);
        }
        cols.extend(["torque_em", "hamiltonian"]);
        cols.join(",")
    }

    /// Writes the trajectory as CSV with 17 significant digits per value.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", self.csv_header())?;
        for k in 0..self.len() {
            let s = &self.states[k];
            let mut row = vec![self.times[k], s.theta, s.omega, s.i_s.re, s.i_s.im];
            if let Some(i_r) = s.i_r {
                row.extend([i_r.re, i_r.im]);
            }
            let phi_s = *self.fluxes[k].last().expect("at least one flux");
            row.extend([phi_s.re, phi_s.im]);
            if s.i_r.is_some() {
                let phi_r = self.fluxes[k][0];
                row.extend([phi_r.re, phi_r.im]);
            }
            row.extend([self.torque_em[k], self.hamiltonian[k]]);
            writeln!(w, "{}", format_row(&row))?;
        }
        Ok(())
    }
}

/// Comma-separated values in `{:.16e}` form.
pub fn format_row(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.16e}")).collect::<Vec<_>>().join(",")
}

/// A run that stopped early: the samples reached and the reason.
#[derive(Clone, Debug)]
pub struct SimulationFailure {
    pub partial: Trajectory,
    pub error: Error,
}

impl fmt::Display for SimulationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = self.partial.times.last().copied().unwrap_or(0.0);
        write!(f, "{} (after {} samples, t = {t:e} s)", self.error, self.partial.len())
    }
}

impl std::error::Error for SimulationFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}
