//! Break-time detection (first relative deviation of an approximate
//! tier's QFI from the exact one), (N, A, c) scans, and the scaling-law
//! fits over N and over the Lyapunov exponent.

use crate::bmf::{self, BmfState};
use crate::dicke::DickeBasis;
use crate::evolve::{ConstStepper, KickedPropagator};
use crate::hp::{self, HpMoments};
use crate::params::{KickedDrive, ModelParams, SpinError};
use crate::qfi::fq_from_moments;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Stable,
    Saddle,
    Chaotic,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::Stable => "stable",
            Regime::Saddle => "saddle",
            Regime::Chaotic => "chaotic",
        }
    }
}

/// Which approximate tier is compared against the exact QFI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tier {
    Bmf,
    Hp,
}

impl Tier {
    pub fn label(&self) -> &'static str {
        match self {
            Tier::Bmf => "bmf",
            Tier::Hp => "hp",
        }
    }
}

/// Outcome of a deviation search: a refined crossing time, or the end
/// of the series if the threshold was never reached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Crossing {
    At(f64),
    Never { t_end: f64 },
}

impl Crossing {
    pub fn time(&self) -> f64 {
        match *self {
            Crossing::At(t) => t,
            Crossing::Never { t_end } => t_end,
        }
    }

    pub fn crossed(&self) -> bool {
        matches!(self, Crossing::At(_))
    }
}

fn check_g(g: f64) -> Result<(), SpinError> {
    if !(g > 0.0 && g < 1.0) {
        return Err(SpinError::InvalidParams(format!(
            "threshold g = {g} outside (0, 1)"
        )));
    }
    Ok(())
}

/// First t with |F_exact - F_approx|/F_exact >= g, linearly
/// interpolated between the bracketing samples. Both series must live
/// on the same grid.
pub fn t_break(exact: &[(f64, f64)], approx: &[(f64, f64)], g: f64) -> Result<Crossing, SpinError> {
    check_g(g)?;
    if exact.len() != approx.len() || exact.is_empty() {
        return Err(SpinError::GridMismatch);
    }
    let mut prev_t = 0.0;
    let mut prev_dev = 0.0;
    for (i, (&(te, fe), &(ta, fa))) in exact.iter().zip(approx.iter()).enumerate() {
        if (te - ta).abs() > 1e-9 * (1.0 + te.abs()) {
            return Err(SpinError::GridMismatch);
        }
        if fe <= 0.0 || !fe.is_finite() || !fa.is_finite() {
            return Err(SpinError::NonFinite("break-time deviation"));
        }
        let dev = (fe - fa).abs() / fe;
        if dev >= g {
            if i == 0 {
                return Ok(Crossing::At(te));
            }
            let t = prev_t + (g - prev_dev) / (dev - prev_dev) * (te - prev_t);
            return Ok(Crossing::At(t));
        }
        prev_t = te;
        prev_dev = dev;
    }
    Ok(Crossing::Never {
        t_end: exact.last().unwrap().0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriveKind {
    Const,
    Kicked,
}

/// Parameters of one break-time scan: the drive, the compared tier, a
/// user-supplied regime label, threshold, grid, and horizon.
#[derive(Debug, Clone, Copy)]
pub struct ScanSpec {
    pub a: f64,
    pub c: f64,
    pub kind: DriveKind,
    pub tier: Tier,
    pub regime: Regime,
    pub g: f64,
    pub dt: f64,
    pub t_max: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct BreakTimeRecord {
    pub n: usize,
    pub a: f64,
    pub c: f64,
    pub regime: Regime,
    pub tier: Tier,
    pub g: f64,
    pub t_break: f64,
    pub crossed: bool,
}

enum ApproxState {
    B(BmfState),
    H(HpMoments),
}

impl ApproxState {
    fn new(tier: Tier, n: usize) -> Self {
        match tier {
            Tier::Bmf => ApproxState::B(bmf::initial_x(n)),
            Tier::Hp => ApproxState::H(hp::initial()),
        }
    }

    fn step_const(&mut self, a: f64, c: f64, dt: f64) {
        match self {
            ApproxState::B(y) => *y = bmf::step_rk4(y, a, c, dt),
            ApproxState::H(m) => *m = hp::step_rk4(*m, a, c, dt),
        }
    }

    fn step_kicked(&mut self, drive: &KickedDrive, c: f64, t: f64, dt: f64) {
        match self {
            ApproxState::B(y) => *y = bmf::step_kicked(y, drive, c, t, dt),
            ApproxState::H(m) => *m = hp::step_kicked(*m, drive, c, t, dt),
        }
    }

    fn f(&self, n: usize) -> f64 {
        match self {
            ApproxState::B(y) => bmf::f_b(y, n),
            ApproxState::H(m) => hp::f_total(n, m),
        }
    }
}

/// Break time at a single N; stepping stops at the crossing.
pub fn breaktime_point(n: usize, spec: &ScanSpec) -> Result<BreakTimeRecord, SpinError> {
    check_g(spec.g)?;
    let params = ModelParams::new(n, spec.a, spec.c, 1.0)?;
    let basis = DickeBasis::new(n);
    let mut psi = basis.coherent(std::f64::consts::FRAC_PI_2, 0.0);
    let mut approx = ApproxState::new(spec.tier, n);
    let drive = KickedDrive::standard(spec.a);
    let mut const_stepper = None;
    let mut kicked_stepper = None;
    match spec.kind {
        DriveKind::Const => {
            const_stepper = Some(ConstStepper::new(&params, &basis)?);
        }
        DriveKind::Kicked => {
            kicked_stepper = Some(KickedPropagator::new(&params, &drive, &basis, spec.dt)?);
        }
    }
    let steps = (spec.t_max / spec.dt).round() as usize;
    let mut prev_t = 0.0;
    let mut prev_dev = 0.0;
    for k in 1..=steps {
        let t_from = (k - 1) as f64 * spec.dt;
        let t = k as f64 * spec.dt;
        match spec.kind {
            DriveKind::Const => {
                const_stepper.as_mut().unwrap().step(&mut psi, spec.dt)?;
                approx.step_const(spec.a, spec.c, spec.dt);
            }
            DriveKind::Kicked => {
                kicked_stepper.as_mut().unwrap().step_at(&mut psi, t_from);
                approx.step_kicked(&drive, spec.c, t_from, spec.dt);
            }
        }
        let fe = fq_from_moments(&basis.moments(&psi));
        let fa = approx.f(n);
        if !fa.is_finite() {
            return Err(SpinError::Diverged { t });
        }
        let dev = (fe - fa).abs() / fe;
        if dev >= spec.g {
            let tb = prev_t + (spec.g - prev_dev) / (dev - prev_dev) * (t - prev_t);
            return Ok(record(n, spec, tb, true));
        }
        prev_t = t;
        prev_dev = dev;
    }
    Ok(record(n, spec, spec.t_max, false))
}

fn record(n: usize, spec: &ScanSpec, t_break: f64, crossed: bool) -> BreakTimeRecord {
    BreakTimeRecord {
        n,
        a: spec.a,
        c: spec.c,
        regime: spec.regime,
        tier: spec.tier,
        g: spec.g,
        t_break,
        crossed,
    }
}

/// Scan over particle numbers, parallel, records in input order.
pub fn breaktime_scan(
    n_list: &[usize],
    spec: &ScanSpec,
) -> Result<Vec<BreakTimeRecord>, SpinError> {
    n_list
        .par_iter()
        .map(|&n| {
            breaktime_point(n, spec)
                .map_err(|e| SpinError::InvalidParams(format!("scan point N = {n}: {e}")))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingModel {
    SqrtN,
    LogN,
    Log4N,
}

impl ScalingModel {
    pub fn basis(&self, n: f64) -> f64 {
        match self {
            ScalingModel::SqrtN => n.sqrt(),
            ScalingModel::LogN => n.ln(),
            ScalingModel::Log4N => n.ln().powi(4),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ScalingModel::SqrtN => "sqrtN",
            ScalingModel::LogN => "logN",
            ScalingModel::Log4N => "log4N",
        }
    }

    pub const ALL: [ScalingModel; 3] =
        [ScalingModel::SqrtN, ScalingModel::LogN, ScalingModel::Log4N];
}

#[derive(Debug, Clone, Copy)]
pub struct ScalingFit {
    pub model: ScalingModel,
    pub alpha: f64,
    pub residual: f64,
    pub n_min: usize,
    pub n_max: usize,
    pub count: usize,
}

fn check_records(records: &[(usize, f64)]) -> Result<(usize, usize), SpinError> {
    if records.len() < 3 {
        return Err(SpinError::InvalidParams(format!(
            "fit needs >= 3 records, got {}",
            records.len()
        )));
    }
    let n_min = records.iter().map(|r| r.0).min().unwrap();
    let n_max = records.iter().map(|r| r.0).max().unwrap();
    if n_min == n_max {
        return Err(SpinError::Degenerate("all records share one N".into()));
    }
    Ok((n_min, n_max))
}

/// Least-squares coefficient of t = alpha * f(N) through the origin;
/// the reported residual is the l2 misfit.
pub fn scaling_fit(records: &[(usize, f64)], model: ScalingModel) -> Result<ScalingFit, SpinError> {
    let (n_min, n_max) = check_records(records)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for &(n, t) in records {
        let f = model.basis(n as f64);
        num += f * t;
        den += f * f;
    }
    let alpha = num / den;
    let residual = records
        .iter()
        .map(|&(n, t)| (t - alpha * model.basis(n as f64)).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(ScalingFit {
        model,
        alpha,
        residual,
        n_min,
        n_max,
        count: records.len(),
    })
}

#[derive(Debug, Clone, Copy)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

/// Affine least squares t = slope * f(N) + intercept. The slope is the
/// asymptotic coefficient, free of the small-N offset that the
/// through-origin fit folds into alpha.
pub fn slope_fit(records: &[(usize, f64)], model: ScalingModel) -> Result<SlopeFit, SpinError> {
    check_records(records)?;
    let m = records.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(n, t) in records {
        let x = model.basis(n as f64);
        sx += x;
        sy += t;
        sxx += x * x;
        sxy += x * t;
    }
    let det = m * sxx - sx * sx;
    let slope = (m * sxy - sx * sy) / det;
    let intercept = (sy - slope * sx) / m;
    let residual = records
        .iter()
        .map(|&(n, t)| (t - slope * model.basis(n as f64) - intercept).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(SlopeFit {
        slope,
        intercept,
        residual,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct PrefactorFit {
    pub eta: f64,
    pub gamma: f64,
    /// Pearson correlation of (lambda, ln t); negative for a decaying law.
    pub corr: f64,
}

/// Fit t = eta * exp(-gamma * lambda) by linear least squares on
/// (lambda, ln t).
pub fn prefactor_lyapunov_fit(points: &[(f64, f64)]) -> Result<PrefactorFit, SpinError> {
    if points.len() < 3 {
        return Err(SpinError::InvalidParams(format!(
            "fit needs >= 3 points, got {}",
            points.len()
        )));
    }
    for &(lam, t) in points {
        if !(lam > 0.0) || !(t > 0.0) {
            return Err(SpinError::InvalidParams(format!(
                "prefactor fit needs lambda > 0 and t > 0, got ({lam}, {t})"
            )));
        }
    }
    let m = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(lam, t) in points {
        let y = t.ln();
        sx += lam;
        sy += y;
        sxx += lam * lam;
        sxy += lam * y;
        syy += y * y;
    }
    let det = m * sxx - sx * sx;
    if det.abs() < 1e-30 {
        return Err(SpinError::Degenerate("all points share one lambda".into()));
    }
    let slope = (m * sxy - sx * sy) / det;
    let intercept = (sy - slope * sx) / m;
    let corr = (m * sxy - sx * sy) / ((m * sxx - sx * sx).sqrt() * (m * syy - sy * sy).sqrt());
    Ok(PrefactorFit {
        eta: intercept.exp(),
        gamma: -slope,
        corr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, dt: f64) -> Vec<f64> {
        (0..=n).map(|k| k as f64 * dt).collect()
    }

    #[test]
    fn synthetic_crossing_at_t0() {
        let t0 = 0.73;
        let g = 0.01;
        let ts = grid(200, 0.01);
        let exact: Vec<(f64, f64)> = ts.iter().map(|&t| (t, 1.0)).collect();
        let approx: Vec<(f64, f64)> = ts.iter().map(|&t| (t, 1.0 + t * g / t0)).collect();
        match t_break(&exact, &approx, g).unwrap() {
            Crossing::At(t) => assert!((t - t0).abs() < 1e-12),
            _ => panic!("expected crossing"),
        }
    }

    #[test]
    fn identical_series_never_cross() {
        let ts = grid(50, 0.1);
        let s: Vec<(f64, f64)> = ts.iter().map(|&t| (t, 2.0 + t)).collect();
        let r = t_break(&s, &s, 0.01).unwrap();
        assert!(!r.crossed());
        assert!((r.time() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_grids_rejected() {
        let a: Vec<(f64, f64)> = grid(10, 0.1).iter().map(|&t| (t, 1.0)).collect();
        let b: Vec<(f64, f64)> = grid(10, 0.2).iter().map(|&t| (t, 1.0)).collect();
        assert!(matches!(
            t_break(&a, &b, 0.01),
            Err(SpinError::GridMismatch)
        ));
        let c = &a[..5];
        assert!(matches!(
            t_break(&a, c, 0.01),
            Err(SpinError::GridMismatch)
        ));
    }

    #[test]
    fn monotone_in_g() {
        let ts = grid(300, 0.01);
        let exact: Vec<(f64, f64)> = ts.iter().map(|&t| (t, 1.0)).collect();
        let approx: Vec<(f64, f64)> =
            ts.iter().map(|&t| (t, 1.0 + 0.05 * t * t)).collect();
        let mut last = 0.0;
        for g in [0.005, 0.01, 0.02, 0.04] {
            let t = t_break(&exact, &approx, g).unwrap().time();
            assert!(t >= last);
            last = t;
        }
    }

    #[test]
    fn through_origin_fit_recovers_exact_law() {
        let recs: Vec<(usize, f64)> = [64usize, 100, 256, 400]
            .iter()
            .map(|&n| (n, 2.0 * (n as f64).sqrt()))
            .collect();
        let fit = scaling_fit(&recs, ScalingModel::SqrtN).unwrap();
        assert!((fit.alpha - 2.0).abs() < 1e-12);
        assert!(fit.residual < 1e-10);
        let mut shuffled = recs.clone();
        shuffled.swap(0, 3);
        shuffled.swap(1, 2);
        let fit2 = scaling_fit(&shuffled, ScalingModel::SqrtN).unwrap();
        assert_eq!(fit.alpha, fit2.alpha);
    }

    #[test]
    fn affine_fit_recovers_slope_and_intercept() {
        let recs: Vec<(usize, f64)> = [100usize, 200, 300, 400]
            .iter()
            .map(|&n| (n, 0.25 * (n as f64).sqrt() - 0.8))
            .collect();
        let fit = slope_fit(&recs, ScalingModel::SqrtN).unwrap();
        assert!((fit.slope - 0.25).abs() < 1e-12);
        assert!((fit.intercept + 0.8).abs() < 1e-12);
    }

    #[test]
    fn prefactor_fit_exact_exponential() {
        let pts: Vec<(f64, f64)> = [0.5, 0.9, 1.3, 1.7]
            .iter()
            .map(|&l| (l, 2.83 * (-1.46f64 * l).exp()))
            .collect();
        let fit = prefactor_lyapunov_fit(&pts).unwrap();
        assert!((fit.eta - 2.83).abs() < 1e-12);
        assert!((fit.gamma - 1.46).abs() < 1e-12);
        assert!((fit.corr + 1.0).abs() < 1e-12);
        assert!(prefactor_lyapunov_fit(&pts[..2]).is_err());
        assert!(prefactor_lyapunov_fit(&[(0.5, 1.0), (0.9, -1.0), (1.0, 1.0)]).is_err());
    }

    #[test]
    fn fit_preconditions() {
        assert!(scaling_fit(&[(100, 1.0), (100, 1.1), (100, 1.2)], ScalingModel::LogN).is_err());
        assert!(scaling_fit(&[(100, 1.0), (200, 1.1)], ScalingModel::LogN).is_err());
    }
}
