//! Closed-form QFI expressions and short-time expansion coefficients for
//! the twisting models.

use crate::params::SpinError;

/// Short-time expansion of F/N in powers of ct, coefficients c0..c4.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorSeries {
    pub coeffs: [f64; 5],
}

impl TaylorSeries {
    pub fn eval(&self, ct: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * ct + c)
    }

    /// Truncated evaluation, orders 0..=deg.
    pub fn eval_to(&self, ct: f64, deg: usize) -> f64 {
        self.coeffs[..=deg.min(4)]
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * ct + c)
    }
}

/// cos^p(x) for large integer p without underflow: sign parity times
/// exp(p ln|cos x|).
fn cos_pow(x: f64, p: i64) -> f64 {
    let c = x.cos();
    if c == 0.0 {
        return if p == 0 { 1.0 } else { 0.0 };
    }
    let mag = ((p as f64) * c.abs().ln()).exp();
    if c < 0.0 && p % 2 != 0 {
        -mag
    } else {
        mag
    }
}

/// Exact QFI of one-axis twisting from the x-polarised coherent state.
/// Returns the total F_Q; per-particle value is this over N.
pub fn fq_oat_exact(n: usize, c: f64, t: f64) -> f64 {
    let nf = n as f64;
    let ct = c * t;
    let alpha = 1.0 - cos_pow(2.0 * ct / nf, n as i64 - 2);
    let beta = 4.0 * (ct / nf).sin() * cos_pow(ct / nf, n as i64 - 2);
    let transverse =
        nf * (1.0 + ((nf - 1.0) / 4.0) * (alpha + (alpha * alpha + beta * beta).sqrt()));
    // 4 Var(J_x): <J_x> = (N/2) cos^{N-1}(ct/N),
    // <J_x^2> = (N/4) [ (N+1)/2 + ((N-1)/2) cos^{N-2}(2ct/N) ].
    let jx = 0.5 * nf * cos_pow(ct / nf, n as i64 - 1);
    let jx2 = 0.25 * nf * (0.5 * (nf + 1.0) + 0.5 * (nf - 1.0) * cos_pow(2.0 * ct / nf, n as i64 - 2));
    let axial = 4.0 * (jx2 - jx * jx);
    transverse.max(axial)
}

/// Closed-form moment-truncation QFI for one-axis twisting (total).
pub fn fb_oat_exact(n: usize, c: f64, t: f64) -> f64 {
    let nf = n as f64;
    let s = (c * t / nf.sqrt()).sin();
    let alpha = 2.0 * s * s;
    nf * (1.0 + (nf * alpha + (8.0 * nf * alpha + nf * nf * alpha * alpha).sqrt()) / 4.0)
}

/// End of the plateau region, ct = N pi/2 - 2 sqrt(N); past this point
/// the variance branch of the twisting QFI takes over and climbs to
/// N^2. Advisory only.
pub fn oat_window_ct(n: usize) -> f64 {
    let nf = n as f64;
    nf * std::f64::consts::FRAC_PI_2 - 2.0 * nf.sqrt()
}

pub fn fq_oat_taylor(n: usize) -> TaylorSeries {
    let nf = n as f64;
    TaylorSeries {
        coeffs: [1.0, 1.0, 0.5, 0.125 - 3.0 / (4.0 * nf), 0.0],
    }
}

pub fn fb_oat_taylor(n: usize) -> TaylorSeries {
    let nf = n as f64;
    TaylorSeries {
        coeffs: [1.0, 1.0, 0.5, 0.125 - 1.0 / (6.0 * nf), 0.0],
    }
}

/// lambda^2 = A(c - A); positive exactly in the unstable (saddle) band.
pub fn lambda_sq(a: f64, c: f64) -> f64 {
    a * (c - a)
}

pub fn fb_tat_taylor(n: usize, a: f64, c: f64) -> TaylorSeries {
    let nf = n as f64;
    let r = lambda_sq(a, c) / (c * c);
    TaylorSeries {
        coeffs: [
            1.0,
            1.0,
            0.5,
            0.125 + r / 6.0 - 0.5 / nf,
            r / 6.0 - 0.5 / nf,
        ],
    }
}

pub fn fhp_oat_taylor() -> TaylorSeries {
    TaylorSeries {
        coeffs: [1.0, 1.0, 0.5, 0.125, 0.0],
    }
}

pub fn fhp_tat_taylor(a: f64, c: f64) -> TaylorSeries {
    let r = lambda_sq(a, c) / (c * c);
    TaylorSeries {
        coeffs: [1.0, 1.0, 0.5, 0.125 + r / 6.0, r / 6.0],
    }
}

/// Time at which the unstable twist-and-turn flow saturates the
/// Heisenberg scale: t_c = ln(N lambda^2 / (cA)) / lambda.
pub fn t_c(n: usize, a: f64, c: f64) -> Result<f64, SpinError> {
    if !(c > a && a > 0.0) {
        return Err(SpinError::InvalidParams(format!(
            "t_c needs c > A > 0, got A = {a}, c = {c}"
        )));
    }
    let lam = lambda_sq(a, c).sqrt();
    Ok(((n as f64) * lam * lam / (c * a)).ln() / lam)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fq_oat_at_zero_is_n() {
        for &n in &[2usize, 40, 400] {
            assert!((fq_oat_exact(n, std::f64::consts::PI, 0.0) - n as f64).abs() < 1e-12);
            assert!((fb_oat_exact(n, std::f64::consts::PI, 0.0) - n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn fq_oat_n2_reduces_to_sine() {
        // N=2 collapses to F = 2(1 + sin(ct/2))
        let c = 1.0;
        for &ct in &[0.3, 1.0, std::f64::consts::PI] {
            let f = fq_oat_exact(2, c, ct);
            assert!((f - 2.0 * (1.0 + (ct / 2.0).sin())).abs() < 1e-12);
        }
        assert!((fq_oat_exact(2, 1.0, std::f64::consts::PI) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn fq_oat_reaches_n_squared_at_cat_time() {
        for n in [40usize, 400] {
            let nf = n as f64;
            let t_cat = nf * std::f64::consts::FRAC_PI_2;
            let f = fq_oat_exact(n, 1.0, t_cat);
            assert!((f / (nf * nf) - 1.0).abs() < 1e-12);
            // mid-plateau sits at N(N+1)/2
            let f_mid = fq_oat_exact(n, 1.0, t_cat / 2.0);
            assert!((f_mid / (nf * (nf + 1.0) / 2.0) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn third_order_gap_is_7_over_12n() {
        for &n in &[40usize, 400, 10_000] {
            let gap = fb_oat_taylor(n).coeffs[3] - fq_oat_taylor(n).coeffs[3];
            let want = 7.0 / (12.0 * n as f64);
            assert!((gap - want).abs() < 1e-15, "N = {n}");
        }
    }

    #[test]
    fn tat_series_reduce_at_lambda_zero() {
        let c = std::f64::consts::PI;
        let n = 400;
        let bt = fb_tat_taylor(n, c, c);
        assert!((bt.coeffs[3] - (0.125 - 0.5 / n as f64)).abs() < 1e-15);
        let ht = fhp_tat_taylor(c, c);
        assert_eq!(ht.coeffs, fhp_oat_taylor().coeffs);
        // lambda^2/c^2 peaks at 1/4 when c = 2A
        assert!((lambda_sq(0.5 * c, c) / (c * c) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn t_c_reference_value() {
        let c = std::f64::consts::PI;
        let a = c / 2.0;
        let got = t_c(400, a, c).unwrap();
        let want = (2.0 / c) * 200.0f64.ln();
        assert!((got - want).abs() < 1e-12);
        assert!(t_c(400, c, a).is_err());
        // N lambda^2 = cA gives zero
        let lam2 = lambda_sq(a, c);
        let n_zero = c * a / lam2;
        assert!(t_c(n_zero.round() as usize, a, c).unwrap().abs() < 1e-12);
    }

    #[test]
    fn cos_pow_matches_naive_and_survives_large_n() {
        assert!((cos_pow(0.3, 7) - 0.3f64.cos().powi(7)).abs() < 1e-15);
        assert!((cos_pow(2.0, 3) - 2.0f64.cos().powi(3)).abs() < 1e-15);
        let v = cos_pow(1e-3, 1_000_000);
        assert!(v > 0.0 && v.is_finite());
    }
}
