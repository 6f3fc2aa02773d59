//! Model parameters and the crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpinError {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("time series grids do not match")]
    GridMismatch,
    #[error("norm drift {drift:.3e} exceeds bound {bound:.3e} at t = {t}")]
    NormDrift { drift: f64, bound: f64, t: f64 },
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
    #[error("integration diverged at t = {t}")]
    Diverged { t: f64 },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("{context}: QFI {f} outside [0, N^2] for N = {n}")]
    QfiDomain { context: &'static str, f: f64, n: usize },
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Static Hamiltonian parameters. `sign` selects the twist sign:
/// +1 for H = a J_x + (c/N) J_z^2, -1 for H = a J_x - (c/N) J_z^2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub n: usize,
    pub a: f64,
    pub c: f64,
    pub sign: f64,
}

impl ModelParams {
    pub fn new(n: usize, a: f64, c: f64, sign: f64) -> Result<Self, SpinError> {
        if n < 2 {
            return Err(SpinError::InvalidParams(format!("N = {n}, need N >= 2")));
        }
        if !(sign == 1.0 || sign == -1.0) {
            return Err(SpinError::InvalidParams(format!("sign = {sign}, need +1 or -1")));
        }
        if !a.is_finite() || !c.is_finite() {
            return Err(SpinError::InvalidParams("a and c must be finite".into()));
        }
        Ok(Self { n, a, c, sign })
    }

    /// Effective twist coefficient sign*c used by every tier.
    pub fn twist(&self) -> f64 {
        self.sign * self.c
    }
}

/// Rectangular-pulse periodic drive: amplitude A*T/tau1 on [nT, nT+tau1),
/// free evolution on the remainder of each period, T = tau0 + tau1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KickedDrive {
    pub amp: f64,
    pub tau0: f64,
    pub tau1: f64,
}

impl KickedDrive {
    pub fn new(amp: f64, tau0: f64, tau1: f64) -> Result<Self, SpinError> {
        if tau0 <= 0.0 || tau1 <= 0.0 {
            return Err(SpinError::InvalidParams(format!(
                "pulse widths tau0 = {tau0}, tau1 = {tau1} must be positive"
            )));
        }
        Ok(Self { amp, tau0, tau1 })
    }

    /// Kick strength A with the conventional tau0 = 1, tau1 = 0.01 widths.
    pub fn standard(amp: f64) -> Self {
        Self { amp, tau0: 1.0, tau1: 0.01 }
    }

    pub fn period(&self) -> f64 {
        self.tau0 + self.tau1
    }

    /// Field amplitude during the pulse, normalised so the impulse per
    /// period equals A*T.
    pub fn pulse_amp(&self) -> f64 {
        self.amp * self.period() / self.tau1
    }

    /// Whether a grid step starting at t lies inside the pulse segment.
    pub fn in_pulse(&self, t: f64) -> bool {
        let eps = 1e-12;
        let frac = t - (t / self.period() + eps).floor() * self.period();
        frac < self.tau1 - eps
    }

    /// Sampling grids must align with the segment boundaries.
    pub fn check_grid(&self, dt: f64) -> Result<(), SpinError> {
        for (name, seg) in [("tau1", self.tau1), ("tau0", self.tau0)] {
            let ratio = seg / dt;
            if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
                return Err(SpinError::InvalidParams(format!(
                    "dt = {dt} does not divide {name} = {seg}"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_n_and_bad_sign() {
        assert!(ModelParams::new(1, 0.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(10, 0.0, 1.0, 0.5).is_err());
        assert!(ModelParams::new(10, 0.0, 1.0, -1.0).is_ok());
    }

    #[test]
    fn kick_impulse_is_amp_times_period() {
        let d = KickedDrive::standard(0.4 * std::f64::consts::PI);
        assert!((d.pulse_amp() * d.tau1 - d.amp * d.period()).abs() < 1e-15);
    }
}
