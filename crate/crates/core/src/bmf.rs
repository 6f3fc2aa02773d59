//! Bogoliubov-backreaction moment tier: nine coupled ODEs for the
//! scaled first moments s = 2<J>/N and second moments
//! Delta_lk = 4(<J_l J_k + J_k J_l> - 2<J_l><J_k>)/N^2.
//!
//! The right-hand side is the expanded Heisenberg system with the
//! standard third-moment factorization; it is written out term by term
//! (rather than as a state-dependent matrix times vector) so a
//! finite-difference Jacobian can probe every entry.

use crate::linalg::max_eig3;
use crate::ode::rk4_step;
use crate::params::{KickedDrive, SpinError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BmfState {
    pub s: [f64; 3],
    pub dxz: f64,
    pub dyz: f64,
    pub dxy: f64,
    pub dxx: f64,
    pub dyy: f64,
    pub dzz: f64,
}

impl BmfState {
    pub fn to_array(&self) -> [f64; 9] {
        [
            self.s[0], self.s[1], self.s[2], self.dxz, self.dyz, self.dxy, self.dxx,
            self.dyy, self.dzz,
        ]
    }

    pub fn from_array(y: &[f64; 9]) -> Self {
        Self {
            s: [y[0], y[1], y[2]],
            dxz: y[3],
            dyz: y[4],
            dxy: y[5],
            dxx: y[6],
            dyy: y[7],
            dzz: y[8],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// The conjugation that reverses the flow: rerunning the same drive
    /// from a conjugated state retraces the trajectory backwards.
    pub fn conjugate(&self) -> Self {
        let mut out = *self;
        out.s[1] = -out.s[1];
        out.dxy = -out.dxy;
        out.dyz = -out.dyz;
        out
    }
}

/// Coherent-state moments for all N spins along
/// (sin t cos p, -sin t sin p, cos t): s is the unit vector, the scaled
/// covariance is (2/N)(identity minus the outer product).
pub fn initial(n: usize, theta: f64, phi: f64) -> BmfState {
    let nh = [
        theta.sin() * phi.cos(),
        -theta.sin() * phi.sin(),
        theta.cos(),
    ];
    let w = 2.0 / n as f64;
    let d = |l: usize, k: usize| w * (if l == k { 1.0 } else { 0.0 } - nh[l] * nh[k]);
    BmfState {
        s: nh,
        dxz: d(0, 2),
        dyz: d(1, 2),
        dxy: d(0, 1),
        dxx: d(0, 0),
        dyy: d(1, 1),
        dzz: d(2, 2),
    }
}

/// x-polarised start used by the twisting runs (exact zeros, no trig).
pub fn initial_x(n: usize) -> BmfState {
    let w = 2.0 / n as f64;
    BmfState {
        s: [1.0, 0.0, 0.0],
        dxz: 0.0,
        dyz: 0.0,
        dxy: 0.0,
        dxx: 0.0,
        dyy: w,
        dzz: w,
    }
}

fn rhs(y: &[f64; 9], a: f64, c: f64) -> [f64; 9] {
    let [sx, sy, sz, dxz, dyz, dxy, dxx, dyy, dzz] = *y;
    [
        -c * sz * sy - 0.5 * c * dyz,
        c * sz * sx - a * sz + 0.5 * c * dxz,
        a * sy,
        -c * sz * dyz + a * dxy - c * sy * dzz,
        c * sz * dxz + a * dyy + (c * sx - a) * dzz,
        (c * sx - a) * dxz - c * sy * dyz + c * sz * dxx - c * sz * dyy,
        -2.0 * c * sy * dxz - 2.0 * c * sz * dxy,
        2.0 * (c * sx - a) * dyz + 2.0 * c * sz * dxy,
        2.0 * a * dyz,
    ]
}

/// Right-hand side of the moment system; `c` is the signed twist.
pub fn derivative(state: &BmfState, a: f64, c: f64) -> BmfState {
    BmfState::from_array(&rhs(&state.to_array(), a, c))
}

pub fn step_rk4(state: &BmfState, a: f64, c: f64, dt: f64) -> BmfState {
    BmfState::from_array(&rk4_step(|y| rhs(y, a, c), &state.to_array(), dt))
}

/// Constant-drive trajectory sampled every dt (t = 0 included).
pub fn integrate(
    init: &BmfState,
    a: f64,
    c: f64,
    t_end: f64,
    dt: f64,
) -> Result<Vec<(f64, BmfState)>, SpinError> {
    if dt <= 0.0 {
        return Err(SpinError::InvalidParams(format!("dt = {dt}, need dt > 0")));
    }
    let steps = (t_end / dt).round() as usize;
    let mut out = Vec::with_capacity(steps + 1);
    let mut y = *init;
    out.push((0.0, y));
    for k in 1..=steps {
        y = step_rk4(&y, a, c, dt);
        let t = k as f64 * dt;
        if !y.is_finite() {
            return Err(SpinError::Diverged { t });
        }
        out.push((t, y));
    }
    Ok(out)
}

/// Number of RK4 substeps covering a grid step inside the pulse: the
/// pulse amplitude is ~A*T/tau1, stiff relative to the free segment.
pub fn pulse_substeps(drive: &KickedDrive, dt: f64) -> usize {
    ((drive.tau1 / (dt / 10.0)).ceil() as usize).max(10)
}

/// One grid step of the kicked drive, starting at time t.
pub fn step_kicked(state: &BmfState, drive: &KickedDrive, c: f64, t: f64, dt: f64) -> BmfState {
    if drive.in_pulse(t) {
        let sub = pulse_substeps(drive, dt);
        let h = dt / sub as f64;
        let ap = drive.pulse_amp();
        let mut y = *state;
        for _ in 0..sub {
            y = step_rk4(&y, ap, c, h);
        }
        y
    } else {
        step_rk4(state, 0.0, c, dt)
    }
}

/// Kicked trajectory on the shared dt grid (dt must divide both
/// segment widths, so samples land on segment boundaries).
pub fn integrate_kicked(
    init: &BmfState,
    drive: &KickedDrive,
    c: f64,
    t_max: f64,
    dt: f64,
) -> Result<Vec<(f64, BmfState)>, SpinError> {
    drive.check_grid(dt)?;
    let steps = (t_max / dt).round() as usize;
    let mut out = Vec::with_capacity(steps + 1);
    let mut y = *init;
    out.push((0.0, y));
    for k in 1..=steps {
        let t_prev = (k - 1) as f64 * dt;
        y = step_kicked(&y, drive, c, t_prev, dt);
        let t = k as f64 * dt;
        if !y.is_finite() {
            return Err(SpinError::Diverged { t });
        }
        out.push((t, y));
    }
    Ok(out)
}

/// Covariance matrix with entries N^2 Delta_lk / 8.
pub fn covariance(state: &BmfState, n: usize) -> [[f64; 3]; 3] {
    let w = (n as f64) * (n as f64) / 8.0;
    [
        [w * state.dxx, w * state.dxy, w * state.dxz],
        [w * state.dxy, w * state.dyy, w * state.dyz],
        [w * state.dxz, w * state.dyz, w * state.dzz],
    ]
}

/// F_B = 4 x largest eigenvalue of the covariance.
pub fn f_b(state: &BmfState, n: usize) -> f64 {
    4.0 * max_eig3(&covariance(state, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_x_matches_stated_moments() {
        let y = initial_x(400);
        assert_eq!(y.s, [1.0, 0.0, 0.0]);
        assert_eq!(y.dxx, 0.0);
        assert!((y.dyy - 0.005).abs() < 1e-15);
        assert!((y.dzz - 0.005).abs() < 1e-15);
        assert_eq!((y.dxy, y.dxz, y.dyz), (0.0, 0.0, 0.0));
        assert!((f_b(&y, 400) - 400.0).abs() < 1e-9);
    }

    #[test]
    fn pole_initial_state() {
        let y = initial(100, 0.0, 0.0);
        assert!((y.s[2] - 1.0).abs() < 1e-15);
        assert!((y.dxx - 0.02).abs() < 1e-15 && (y.dyy - 0.02).abs() < 1e-15);
        assert!(y.dzz.abs() < 1e-15);
    }

    #[test]
    fn zero_drive_zero_twist_is_constant() {
        let y0 = initial(50, 1.0, 0.5);
        let traj = integrate(&y0, 0.0, 0.0, 1.0, 0.01).unwrap();
        let last = traj.last().unwrap().1;
        for (a, b) in y0.to_array().iter().zip(last.to_array().iter()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn reversal_by_conjugation() {
        let c = std::f64::consts::PI;
        let a = c / 2.0;
        let dt = 1e-3;
        let y0 = initial_x(200);
        let fwd = integrate(&y0, a, c, 1.0, dt).unwrap();
        let back = integrate(&fwd.last().unwrap().1.conjugate(), a, c, 1.0, dt).unwrap();
        let rec = back.last().unwrap().1.conjugate();
        for (u, v) in y0.to_array().iter().zip(rec.to_array().iter()) {
            assert!((u - v).abs() < 1e-8, "{u} vs {v}");
        }
    }
}
