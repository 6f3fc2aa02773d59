//! Holstein-Primakoff tier: linear flow of the transverse quadrature
//! second moments around the x polarisation.
//!
//! State is (<q^2>, <p^2>, <qp+pq>/2); the vacuum starts at
//! (1/2, 1/2, 0) and the flow preserves qq*pp - qp^2 = 1/4.

use crate::ode::rk4_step;
use crate::params::{KickedDrive, SpinError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HpMoments {
    pub qq: f64,
    pub pp: f64,
    pub qp: f64,
}

pub fn initial() -> HpMoments {
    HpMoments {
        qq: 0.5,
        pp: 0.5,
        qp: 0.0,
    }
}

fn rhs(y: &[f64; 3], a: f64, c: f64) -> [f64; 3] {
    let [qq, pp, qp] = *y;
    [
        -2.0 * a * qp,
        2.0 * (a - c) * qp,
        (a - c) * qq - a * pp,
    ]
}

pub fn step_rk4(m: HpMoments, a: f64, c: f64, dt: f64) -> HpMoments {
    let y = rk4_step(|y| rhs(y, a, c), &[m.qq, m.pp, m.qp], dt);
    HpMoments {
        qq: y[0],
        pp: y[1],
        qp: y[2],
    }
}

pub fn n_exc(m: &HpMoments) -> f64 {
    0.5 * (m.qq + m.pp - 1.0)
}

pub fn symplectic_invariant(m: &HpMoments) -> f64 {
    m.qq * m.pp - m.qp * m.qp
}

/// Per-particle QFI from the excitation number of the quadratic theory.
pub fn f_per_n(n_exc: f64) -> f64 {
    let n = n_exc.max(0.0);
    1.0 + 2.0 * n + 2.0 * (n * (n + 1.0)).sqrt()
}

pub fn f_total(n: usize, m: &HpMoments) -> f64 {
    n as f64 * f_per_n(n_exc(m))
}

/// Closed-form excitation number for pure twisting.
pub fn n_exc_oat(c: f64, t: f64) -> f64 {
    let x = c * t;
    x * x / 4.0
}

/// Closed-form excitation number at an unstable drive (c > A > 0).
pub fn n_exc_tat(a: f64, c: f64, t: f64) -> Result<f64, SpinError> {
    let lam2 = a * (c - a);
    if !(lam2 > 0.0) {
        return Err(SpinError::InvalidParams(format!(
            "unstable closed form needs c > A > 0, got A = {a}, c = {c}"
        )));
    }
    let lam = lam2.sqrt();
    let q = a / lam + lam / a;
    Ok(q * q * (lam * t).sinh().powi(2) / 4.0)
}

/// Moment trajectory under constant drive, sampled every dt.
pub fn series_const(a: f64, c: f64, t_max: f64, dt: f64) -> (Vec<f64>, Vec<HpMoments>) {
    let steps = (t_max / dt).round() as usize;
    let mut ts = Vec::with_capacity(steps + 1);
    let mut ms = Vec::with_capacity(steps + 1);
    let mut m = initial();
    for k in 0..=steps {
        ts.push(k as f64 * dt);
        ms.push(m);
        m = step_rk4(m, a, c, dt);
    }
    (ts, ms)
}

/// One grid step of the kicked drive starting at t; pulse segments use
/// a tenfold-refined substep.
pub fn step_kicked(m: HpMoments, drive: &KickedDrive, c: f64, t: f64, dt: f64) -> HpMoments {
    if drive.in_pulse(t) {
        let sub = ((drive.tau1 / (dt / 10.0)).ceil() as usize).max(10);
        let h = dt / sub as f64;
        let ap = drive.pulse_amp();
        let mut y = m;
        for _ in 0..sub {
            y = step_rk4(y, ap, c, h);
        }
        y
    } else {
        step_rk4(m, 0.0, c, dt)
    }
}

/// Moment trajectory under the kicked drive on the shared dt grid.
pub fn series_kicked(
    drive: &KickedDrive,
    c: f64,
    t_max: f64,
    dt: f64,
) -> Result<(Vec<f64>, Vec<HpMoments>), SpinError> {
    drive.check_grid(dt)?;
    let steps = (t_max / dt).round() as usize;
    let mut ts = Vec::with_capacity(steps + 1);
    let mut ms = Vec::with_capacity(steps + 1);
    let mut m = initial();
    ts.push(0.0);
    ms.push(m);
    for k in 1..=steps {
        m = step_kicked(m, drive, c, (k - 1) as f64 * dt, dt);
        ts.push(k as f64 * dt);
        ms.push(m);
    }
    Ok((ts, ms))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oat_matches_closed_form() {
        let c = std::f64::consts::PI;
        let (ts, ms) = series_const(0.0, c, 1.0, 1e-3);
        for (t, m) in ts.iter().zip(&ms) {
            assert!((n_exc(m) - n_exc_oat(c, *t)).abs() < 1e-9);
            assert!((symplectic_invariant(m) - 0.25).abs() < 1e-10);
        }
    }

    #[test]
    fn tat_matches_closed_form() {
        let c = std::f64::consts::PI;
        let a = c / 2.0;
        let (ts, ms) = series_const(a, c, 2.0, 1e-4);
        for (t, m) in ts.iter().zip(&ms).step_by(500) {
            let want = n_exc_tat(a, c, *t).unwrap();
            assert!(
                (n_exc(m) - want).abs() < 1e-6 * (1.0 + want),
                "t = {t}: {} vs {want}",
                n_exc(m)
            );
        }
        assert!(n_exc_tat(c, a, 1.0).is_err());
    }

    #[test]
    fn f_per_n_vacuum_is_one() {
        assert!((f_per_n(0.0) - 1.0).abs() < 1e-15);
        // large n: F/N ~ 4n
        assert!((f_per_n(1e6) / 4e6 - 1.0).abs() < 1e-5);
    }
}
