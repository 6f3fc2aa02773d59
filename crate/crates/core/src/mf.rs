//! Classical mean-field tier: Bloch-vector flow on the unit sphere,
//! maximum Lyapunov exponents (two-trajectory Benettin), Lyapunov maps,
//! and stroboscopic Poincare sections.

use crate::ode::rk4_step;
use crate::params::{KickedDrive, SpinError};
use rayon::prelude::*;

pub type Bloch = [f64; 3];

/// Default RK4 step inside the (stiff) pulse segment.
pub const PULSE_DT: f64 = 1e-3;
/// Default RK4 step on the free segment.
pub const FREE_DT: f64 = 1e-2;

const NORM_BOUND: f64 = 1e-6;

fn rhs(s: &[f64; 3], a: f64, c: f64) -> [f64; 3] {
    let [sx, sy, sz] = *s;
    [-c * sz * sy, c * sz * sx - a * sz, a * sy]
}

pub fn derivative(s: &Bloch, a: f64, c: f64) -> Bloch {
    rhs(s, a, c)
}

pub fn norm(s: &Bloch) -> f64 {
    (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt()
}

pub fn normalize(s: &Bloch) -> Bloch {
    let r = norm(s);
    [s[0] / r, s[1] / r, s[2] / r]
}

/// One drive period: pulse of width tau1 at the boosted amplitude, then
/// the free segment, each with its own RK4 step.
pub fn step_period_with(
    s: &Bloch,
    drive: &KickedDrive,
    c: f64,
    dt_pulse: f64,
    dt_free: f64,
) -> Bloch {
    let ap = drive.pulse_amp();
    let np = (drive.tau1 / dt_pulse).round().max(1.0) as usize;
    let hp = drive.tau1 / np as f64;
    let mut y = *s;
    for _ in 0..np {
        y = rk4_step(|v| rhs(v, ap, c), &y, hp);
    }
    let nf = (drive.tau0 / dt_free).round().max(1.0) as usize;
    let hf = drive.tau0 / nf as f64;
    for _ in 0..nf {
        y = rk4_step(|v| rhs(v, 0.0, c), &y, hf);
    }
    y
}

pub fn step_period(s: &Bloch, drive: &KickedDrive, c: f64) -> Bloch {
    step_period_with(s, drive, c, PULSE_DT, FREE_DT)
}

/// Stroboscopic trajectory s(nT), n = 0..=n_periods. The norm is
/// checked against drift each period, then reset onto the sphere.
pub fn integrate_kicked(
    s0: &Bloch,
    drive: &KickedDrive,
    c: f64,
    n_periods: usize,
) -> Result<Vec<Bloch>, SpinError> {
    let mut out = Vec::with_capacity(n_periods + 1);
    let mut s = normalize(s0);
    out.push(s);
    for k in 1..=n_periods {
        s = step_period(&s, drive, c);
        let drift = (norm(&s) - 1.0).abs();
        if !drift.is_finite() || drift > NORM_BOUND {
            return Err(SpinError::NormDrift {
                drift,
                bound: NORM_BOUND,
                t: k as f64 * drive.period(),
            });
        }
        s = normalize(&s);
        out.push(s);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
pub struct LyapunovResult {
    /// Exponent per unit time.
    pub lambda: f64,
    pub m: usize,
    pub delta0: f64,
}

/// Unit vector tangential to the sphere at s, along x where possible.
/// For seeds parallel to x the z direction is projected instead, so the
/// perturbation never collapses onto the seed.
fn tangential_dir(s: &Bloch) -> Bloch {
    for axis in [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]] {
        let dot = s[0] * axis[0] + s[1] * axis[1] + s[2] * axis[2];
        let t = [
            axis[0] - dot * s[0],
            axis[1] - dot * s[1],
            axis[2] - dot * s[2],
        ];
        let r = norm(&t);
        if r > 1e-6 {
            return [t[0] / r, t[1] / r, t[2] / r];
        }
    }
    unreachable!("no tangential direction on the unit sphere")
}

/// Maximum Lyapunov exponent by the two-trajectory Benettin method:
/// companion offset by delta0, per-period log of the separation growth,
/// companion rescaled back onto the delta0 shell along the current
/// deviation. Off-sphere seeds are projected onto the sphere.
pub fn lyapunov(
    drive: &KickedDrive,
    c: f64,
    s0: &Bloch,
    m: usize,
    delta0: f64,
) -> Result<LyapunovResult, SpinError> {
    if m == 0 || delta0 <= 0.0 {
        return Err(SpinError::InvalidParams(format!(
            "lyapunov needs m >= 1 and delta0 > 0, got m = {m}, delta0 = {delta0}"
        )));
    }
    let mut main = normalize(s0);
    let dir = tangential_dir(&main);
    let mut comp = [
        main[0] + delta0 * dir[0],
        main[1] + delta0 * dir[1],
        main[2] + delta0 * dir[2],
    ];
    let mut sum = 0.0;
    for k in 1..=m {
        main = step_period(&main, drive, c);
        comp = step_period(&comp, drive, c);
        let drift = (norm(&main) - 1.0).abs();
        if !drift.is_finite() || drift > NORM_BOUND {
            return Err(SpinError::NormDrift {
                drift,
                bound: NORM_BOUND,
                t: k as f64 * drive.period(),
            });
        }
        main = normalize(&main);
        let d = [comp[0] - main[0], comp[1] - main[1], comp[2] - main[2]];
        let sep = norm(&d);
        if sep == 0.0 || !sep.is_finite() {
            return Err(SpinError::NonFinite("Benettin separation"));
        }
        sum += (sep / delta0).ln();
        let scale = delta0 / sep;
        comp = [
            main[0] + scale * d[0],
            main[1] + scale * d[1],
            main[2] + scale * d[2],
        ];
    }
    Ok(LyapunovResult {
        lambda: sum / (m as f64 * drive.period()),
        m,
        delta0,
    })
}

/// Lyapunov exponent over an (A, c) grid, row-major in A then c.
/// Cells are independent and evaluated in parallel.
pub fn lyapunov_map(
    a_values: &[f64],
    c_values: &[f64],
    s0: &Bloch,
    m: usize,
    delta0: f64,
) -> Result<Vec<(f64, f64, f64)>, SpinError> {
    let cells: Vec<(f64, f64)> = a_values
        .iter()
        .flat_map(|&a| c_values.iter().map(move |&c| (a, c)))
        .collect();
    cells
        .par_iter()
        .map(|&(a, c)| {
            let drive = KickedDrive::standard(a);
            lyapunov(&drive, c, s0, m, delta0).map(|r| (a, c, r.lambda))
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct PoincarePoint {
    pub seed: usize,
    pub period: usize,
    pub phi: f64,
    pub sz: f64,
}

/// Stroboscopic (phi, s_z) points for each seed, phi = atan2(s_y, s_x).
pub fn poincare_section(
    drive: &KickedDrive,
    c: f64,
    seeds: &[Bloch],
    n_periods: usize,
) -> Result<Vec<PoincarePoint>, SpinError> {
    let per_seed: Vec<Vec<PoincarePoint>> = seeds
        .par_iter()
        .enumerate()
        .map(|(id, s0)| {
            let traj = integrate_kicked(s0, drive, c, n_periods)?;
            Ok(traj
                .iter()
                .enumerate()
                .map(|(k, s)| PoincarePoint {
                    seed: id,
                    period: k,
                    phi: s[1].atan2(s[0]),
                    sz: s[2],
                })
                .collect())
        })
        .collect::<Result<_, SpinError>>()?;
    Ok(per_seed.into_iter().flatten().collect())
}

/// Cell-centred seed grid over phi in (-pi, pi], s_z in [-1, 1].
pub fn seed_grid(n_phi: usize, n_z: usize) -> Vec<Bloch> {
    let mut seeds = Vec::with_capacity(n_phi * n_z);
    for i in 0..n_phi {
        let phi = -std::f64::consts::PI
            + (i as f64 + 0.5) * 2.0 * std::f64::consts::PI / n_phi as f64;
        for j in 0..n_z {
            let z: f64 = -1.0 + (j as f64 + 0.5) * 2.0 / n_z as f64;
            let r = (1.0 - z * z).sqrt();
            seeds.push([r * phi.cos(), r * phi.sin(), z]);
        }
    }
    seeds
}

/// Number of distinct cells a point set occupies on a g x g grid over
/// the section rectangle. A proxy for orbit spread: trapped orbits stay
/// in few cells, chaotic ones wander over the section.
pub fn occupied_cells(points: &[(f64, f64)], g: usize) -> usize {
    let mut hit = vec![false; g * g];
    let pi = std::f64::consts::PI;
    for &(phi, z) in points {
        let i = (((phi + pi) / (2.0 * pi) * g as f64) as usize).min(g - 1);
        let j = (((z + 1.0) / 2.0 * g as f64) as usize).min(g - 1);
        hit[i * g + j] = true;
    }
    hit.iter().filter(|&&h| h).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_is_conserved_by_the_flow() {
        // raw RK4 drifts about 2e-7 per period at the chaotic point;
        // the checked path renormalizes every period
        let drive = KickedDrive::standard(0.4 * std::f64::consts::PI);
        let c = 1.4 * std::f64::consts::PI;
        let s = normalize(&[0.3f64, -0.5, 0.4]);
        let mut raw = s;
        for _ in 0..100 {
            raw = step_period(&raw, &drive, c);
        }
        assert!((norm(&raw) - 1.0).abs() < 1e-4);
        let traj = integrate_kicked(&s, &drive, c, 100).unwrap();
        for p in &traj {
            assert!((norm(p) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_twist_is_rigid_rotation() {
        // c = 0: rotation about x at the impulse rate A*T per period
        let a = 0.3;
        let drive = KickedDrive::standard(a);
        let s0 = [0.0, 0.0, 1.0];
        let traj = integrate_kicked(&s0, &drive, 0.0, 50).unwrap();
        let theta = a * drive.period() * 50.0;
        let want = [0.0, -theta.sin(), theta.cos()];
        for (u, v) in traj[50].iter().zip(&want) {
            assert!((u - v).abs() < 1e-6, "{u} vs {v}");
        }
        let r = lyapunov(&drive, 0.0, &[1.0, 0.0, 0.0], 200, 1e-5).unwrap();
        assert!(r.lambda.abs() < 1e-3);
    }

    #[test]
    fn tangential_fallback_never_parallel() {
        let d = tangential_dir(&[1.0, 0.0, 0.0]);
        assert!((norm(&d) - 1.0).abs() < 1e-12);
        assert!(d[0].abs() < 1e-12);
        let d2 = tangential_dir(&[0.0, 0.6, 0.8]);
        assert!((d2[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn occupied_cells_counts_distinct() {
        let pts = [(0.1, 0.1), (0.1, 0.1), (3.0, -0.9)];
        assert_eq!(occupied_cells(&pts, 24), 2);
    }

    #[test]
    fn seed_grid_covers_ranges() {
        let seeds = seed_grid(20, 20);
        assert_eq!(seeds.len(), 400);
        for s in &seeds {
            assert!((norm(s) - 1.0).abs() < 1e-12);
        }
    }
}
