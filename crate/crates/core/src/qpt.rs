//! Adiabatic sweep a(t) = v t across the Josephson transition of
//! H = a J_x - (c/N) J_z^2, exact and mean-field tiers, and the
//! pseudo-critical point read off the QFI maximum.

use crate::bmf::{self, BmfState};
use crate::dicke::DickeBasis;
use crate::evolve::RampStepper;
use crate::params::{ModelParams, SpinError};
use crate::qfi::fq_from_moments;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepTier {
    Exact,
    Bmf,
    Both,
}

impl SweepTier {
    pub fn has_exact(&self) -> bool {
        matches!(self, SweepTier::Exact | SweepTier::Both)
    }

    pub fn has_bmf(&self) -> bool {
        matches!(self, SweepTier::Bmf | SweepTier::Both)
    }
}

/// One recorded point of the sweep. Columns for a tier that was not
/// run are NaN.
#[derive(Debug, Clone, Copy)]
pub struct SweepSample {
    pub t: f64,
    pub a: f64,
    pub sz_exact: f64,
    pub sz_bmf: f64,
    pub f_q: f64,
    pub f_b: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SweepConfig {
    pub n: usize,
    pub c: f64,
    pub v: f64,
    pub a_max: f64,
    pub dt: f64,
    /// Coupling spacing between recorded samples.
    pub da_sample: f64,
    pub tier: SweepTier,
    /// Start from |mu = -N/2> instead of |mu = +N/2>.
    pub start_down: bool,
}

impl SweepConfig {
    pub fn new(n: usize, c: f64, v: f64) -> Self {
        Self {
            n,
            c,
            v,
            a_max: 2.0 * c,
            dt: 5e-3,
            da_sample: 1e-3,
            tier: SweepTier::Both,
            start_down: false,
        }
    }
}

/// Location of a QFI maximum along the sweep, refined by the parabola
/// through the three samples around the discrete argmax. `at_edge`
/// flags a maximum sitting on the first or last sample.
#[derive(Debug, Clone, Copy)]
pub struct Peak {
    pub a_star: f64,
    pub f_peak: f64,
    pub index: usize,
    pub at_edge: bool,
}

pub struct SweepResult {
    pub samples: Vec<SweepSample>,
    pub a_star_q: Option<Peak>,
    pub a_star_b: Option<Peak>,
}

fn bmf_ramp_step(y: &BmfState, v: f64, c_eff: f64, t: f64, dt: f64) -> BmfState {
    let add = |y: &[f64; 9], k: &[f64; 9], h: f64| {
        let mut out = *y;
        for i in 0..9 {
            out[i] += h * k[i];
        }
        out
    };
    let y0 = y.to_array();
    let k1 = bmf::derivative(y, v * t, c_eff).to_array();
    let k2 = bmf::derivative(
        &BmfState::from_array(&add(&y0, &k1, 0.5 * dt)),
        v * (t + 0.5 * dt),
        c_eff,
    )
    .to_array();
    let k3 = bmf::derivative(
        &BmfState::from_array(&add(&y0, &k2, 0.5 * dt)),
        v * (t + 0.5 * dt),
        c_eff,
    )
    .to_array();
    let k4 = bmf::derivative(
        &BmfState::from_array(&add(&y0, &k3, dt)),
        v * (t + dt),
        c_eff,
    )
    .to_array();
    let mut out = y0;
    for i in 0..9 {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    BmfState::from_array(&out)
}

pub fn adiabatic_sweep(cfg: &SweepConfig) -> Result<SweepResult, SpinError> {
    if !(cfg.v > 0.0) {
        return Err(SpinError::InvalidParams(format!(
            "ramp rate v = {} must be positive",
            cfg.v
        )));
    }
    if !(cfg.a_max > 0.0 && cfg.dt > 0.0 && cfg.da_sample > 0.0) {
        return Err(SpinError::InvalidParams(
            "a_max, dt and da_sample must be positive".into(),
        ));
    }
    let stride = (cfg.da_sample / (cfg.v * cfg.dt)).round().max(1.0) as usize;
    let steps = (cfg.a_max / (cfg.v * cfg.dt)).round() as usize;
    let basis = DickeBasis::new(cfg.n);
    let params = ModelParams::new(cfg.n, 0.0, cfg.c, -1.0)?;

    let mut exact = if cfg.tier.has_exact() {
        let psi = basis.fock(if cfg.start_down { 0 } else { cfg.n })?;
        let stepper = RampStepper::new(&params, cfg.v, &basis)?;
        Some((psi, stepper))
    } else {
        None
    };
    let c_eff = -cfg.c;
    let mut mf = if cfg.tier.has_bmf() {
        let theta = if cfg.start_down { std::f64::consts::PI } else { 0.0 };
        Some(bmf::initial(cfg.n, theta, 0.0))
    } else {
        None
    };

    let j = cfg.n as f64 / 2.0;
    let mut samples = Vec::with_capacity(steps / stride + 2);
    let mut push = |t: f64,
                    exact: &Option<(Vec<num_complex::Complex64>, RampStepper)>,
                    mf: &Option<BmfState>| {
        let (sz_exact, f_q) = match exact {
            Some((psi, _)) => {
                let m = basis.moments(psi);
                (m.first[2] / j, fq_from_moments(&m))
            }
            None => (f64::NAN, f64::NAN),
        };
        let (sz_bmf, f_b) = match mf {
            Some(y) => (y.s[2], bmf::f_b(y, cfg.n)),
            None => (f64::NAN, f64::NAN),
        };
        samples.push(SweepSample {
            t,
            a: cfg.v * t,
            sz_exact,
            sz_bmf,
            f_q,
            f_b,
        });
    };
    push(0.0, &exact, &mf);

    for k in 0..steps {
        let t = k as f64 * cfg.dt;
        if let Some((psi, stepper)) = exact.as_mut() {
            stepper.step(psi, t, cfg.dt)?;
        }
        if let Some(y) = mf.as_mut() {
            *y = bmf_ramp_step(y, cfg.v, c_eff, t, cfg.dt);
            if !y.is_finite() {
                return Err(SpinError::Diverged { t: t + cfg.dt });
            }
        }
        if (k + 1) % stride == 0 {
            push((k + 1) as f64 * cfg.dt, &exact, &mf);
        }
    }

    let a_star_q = if cfg.tier.has_exact() {
        let pts: Vec<(f64, f64)> = samples.iter().map(|s| (s.a, s.f_q)).collect();
        Some(pseudo_critical_point(&pts)?)
    } else {
        None
    };
    let a_star_b = if cfg.tier.has_bmf() {
        let pts: Vec<(f64, f64)> = samples.iter().map(|s| (s.a, s.f_b)).collect();
        Some(pseudo_critical_point(&pts)?)
    } else {
        None
    };
    Ok(SweepResult {
        samples,
        a_star_q,
        a_star_b,
    })
}

/// Coupling at the global maximum of an (a, F) series, with parabolic
/// refinement through the neighbours when the maximum is interior.
pub fn pseudo_critical_point(points: &[(f64, f64)]) -> Result<Peak, SpinError> {
    if points.is_empty() {
        return Err(SpinError::InvalidParams("empty sweep series".into()));
    }
    if points.iter().any(|&(a, f)| !a.is_finite() || !f.is_finite()) {
        return Err(SpinError::NonFinite("pseudo-critical point search"));
    }
    let mut i = 0;
    for (k, &(_, f)) in points.iter().enumerate() {
        if f > points[i].1 {
            i = k;
        }
    }
    let at_edge = i == 0 || i == points.len() - 1;
    let (a_i, f_i) = points[i];
    if at_edge {
        return Ok(Peak {
            a_star: a_i,
            f_peak: f_i,
            index: i,
            at_edge,
        });
    }
    let (x0, y0) = points[i - 1];
    let (x2, y2) = points[i + 1];
    let num = (y0 - f_i) * (x2 - a_i).powi(2) - (y2 - f_i) * (a_i - x0).powi(2);
    let den = (y0 - f_i) * (x2 - a_i) + (y2 - f_i) * (a_i - x0);
    let a_star = if den.abs() > 1e-300 {
        a_i + 0.5 * num / den
    } else {
        a_i
    };
    Ok(Peak {
        a_star,
        f_peak: f_i,
        index: i,
        at_edge,
    })
}
