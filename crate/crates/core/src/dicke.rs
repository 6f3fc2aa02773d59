//! Dicke (collective spin) basis for N spin-1/2 particles.
//!
//! States live in the symmetric j = N/2 multiplet, expanded over J_z
//! eigenstates |mu>, mu = -j..j in ascending order (dimension N+1).
//! All collective operators are tridiagonal here, which every solver in
//! the crate exploits.

use crate::params::SpinError;
use num_complex::Complex64;

pub type State = Vec<Complex64>;

/// Precomputed mu values and ladder couplings for one N.
///
/// `cup[k]` couples |mu_k> and |mu_{k+1}>:
/// J_+|mu_k> = cup[k] |mu_{k+1}>, so J_x and J_y have off-diagonal
/// elements cup/2 and +/- i cup/2.
#[derive(Debug, Clone)]
pub struct DickeBasis {
    pub n: usize,
    pub mu: Vec<f64>,
    pub cup: Vec<f64>,
}

impl DickeBasis {
    pub fn new(n: usize) -> Self {
        let j = n as f64 / 2.0;
        let mu: Vec<f64> = (0..=n).map(|k| k as f64 - j).collect();
        let cup: Vec<f64> = (0..n)
            .map(|k| {
                let m = mu[k];
                (j * (j + 1.0) - m * (m + 1.0)).sqrt()
            })
            .collect();
        Self { n, mu, cup }
    }

    pub fn dim(&self) -> usize {
        self.n + 1
    }

    /// J_z eigenstate |mu>, indexed from mu = -N/2 (index 0).
    pub fn fock(&self, index: usize) -> Result<State, SpinError> {
        if index >= self.dim() {
            return Err(SpinError::InvalidParams(format!(
                "Fock index {index} out of range for N = {}",
                self.n
            )));
        }
        let mut psi = vec![Complex64::ZERO; self.dim()];
        psi[index] = Complex64::ONE;
        Ok(psi)
    }

    /// Coherent spin state |theta, phi>: all N spins along
    /// (sin theta cos phi, -sin theta sin phi, cos theta), theta = 0 at
    /// the +z pole (index N).
    ///
    /// Amplitudes are sqrt(binom(N,k)) cos^k(theta/2) sin^{N-k}(theta/2)
    /// e^{i k phi} with k = mu + N/2, evaluated through log-space
    /// binomials so large N stays finite.
    pub fn coherent(&self, theta: f64, phi: f64) -> State {
        let n = self.n;
        let half = 0.5 * theta;
        let (s, c) = (half.sin(), half.cos());
        // guard the poles where log(0) would appear
        if s.abs() < 1e-300 {
            let mut psi = vec![Complex64::ZERO; self.dim()];
            psi[n] = Complex64::ONE;
            return psi;
        }
        if c.abs() < 1e-300 {
            let mut psi = vec![Complex64::ZERO; self.dim()];
            psi[0] = Complex64::ONE;
            return psi;
        }
        let ls = s.abs().ln();
        let lc = c.abs().ln();
        let mut psi = Vec::with_capacity(self.dim());
        for k in 0..=n {
            let log_amp = 0.5 * log_binomial(n, k) + k as f64 * lc + (n - k) as f64 * ls;
            let sgn = pow_sign(c, k) * pow_sign(s, n - k);
            let phase = Complex64::from_polar(sgn * log_amp.exp(), k as f64 * phi);
            psi.push(phase);
        }
        psi
    }

    pub fn apply_jz(&self, psi: &[Complex64], out: &mut [Complex64]) {
        for (o, (&m, &p)) in out.iter_mut().zip(self.mu.iter().zip(psi)) {
            *o = m * p;
        }
    }

    pub fn apply_jx(&self, psi: &[Complex64], out: &mut [Complex64]) {
        out.fill(Complex64::ZERO);
        for k in 0..self.n {
            let h = 0.5 * self.cup[k];
            out[k + 1] += h * psi[k];
            out[k] += h * psi[k + 1];
        }
    }

    pub fn apply_jy(&self, psi: &[Complex64], out: &mut [Complex64]) {
        out.fill(Complex64::ZERO);
        let i = Complex64::I;
        for k in 0..self.n {
            let h = 0.5 * self.cup[k];
            out[k + 1] += -i * h * psi[k];
            out[k] += i * h * psi[k + 1];
        }
    }

    /// First moments <J_k> and symmetrised second moments
    /// Re<J_k psi|J_l psi> = <{J_k, J_l}>/2 for k,l in {x,y,z}.
    pub fn moments(&self, psi: &[Complex64]) -> SpinMoments {
        let dim = self.dim();
        let mut jx = vec![Complex64::ZERO; dim];
        let mut jy = vec![Complex64::ZERO; dim];
        let mut jz = vec![Complex64::ZERO; dim];
        self.apply_jx(psi, &mut jx);
        self.apply_jy(psi, &mut jy);
        self.apply_jz(psi, &mut jz);
        let ops = [&jx, &jy, &jz];
        let mut first = [0.0; 3];
        let mut second = [[0.0; 3]; 3];
        for k in 0..3 {
            first[k] = dot_re(psi, ops[k]);
            for l in k..3 {
                let v = dot_re(ops[k], ops[l]);
                second[k][l] = v;
                second[l][k] = v;
            }
        }
        SpinMoments { first, second }
    }

    pub fn norm(&self, psi: &[Complex64]) -> f64 {
        psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// <J^2> for the Casimir check; equals j(j+1) on the multiplet.
    pub fn casimir(&self, psi: &[Complex64]) -> f64 {
        let m = self.moments(psi);
        m.second[0][0] + m.second[1][1] + m.second[2][2]
    }
}

/// First and symmetrised second spin moments of a pure state.
#[derive(Debug, Clone, Copy)]
pub struct SpinMoments {
    pub first: [f64; 3],
    pub second: [[f64; 3]; 3],
}

fn dot_re(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x.conj() * y).re).sum()
}

fn pow_sign(base: f64, exp: usize) -> f64 {
    if base < 0.0 && exp % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// ln C(n, k) via ln Gamma.
pub fn log_binomial(n: usize, k: usize) -> f64 {
    ln_gamma((n + 1) as f64) - ln_gamma((k + 1) as f64) - ln_gamma((n - k + 1) as f64)
}

/// Lanczos approximation of ln Gamma(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    // g = 7, n = 9 coefficients
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection, not needed on the binomial path but keeps the fn total
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}
