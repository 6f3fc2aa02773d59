//! Quantum Fisher information over collective rotations and the
//! entanglement-depth witness built on it.

use crate::dicke::SpinMoments;
use crate::linalg::max_eig3;
use crate::params::SpinError;

/// Covariance-style matrix whose largest eigenvalue (times nothing
/// further) is F_Q: Lambda[k][l] = 4 (Re<J_k psi|J_l psi> - <J_k><J_l>).
pub fn lambda_q(m: &SpinMoments) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for k in 0..3 {
        for l in 0..3 {
            out[k][l] = 4.0 * (m.second[k][l] - m.first[k] * m.first[l]);
        }
    }
    out
}

/// F_Q optimised over rotation axes: largest eigenvalue of `lambda_q`.
pub fn fq_from_moments(m: &SpinMoments) -> f64 {
    max_eig3(&lambda_q(m))
}

/// Smallest entanglement depth compatible with a given F_Q.
///
/// A state of N spins that is a product of blocks of at most k spins
/// obeys F_Q <= floor(N/k) k^2 + (N - floor(N/k) k)^2. The witness
/// returns the smallest depth NOT excluded by f, i.e. k+1 where k is
/// the largest block size whose bound is strictly exceeded, 1 if
/// f <= N, and an error above the physical ceiling N^2.
pub fn depth_witness(f: f64, n: usize) -> Result<usize, SpinError> {
    let nf = n as f64;
    if !f.is_finite() || f < 0.0 {
        return Err(SpinError::QfiDomain {
            context: "depth witness",
            f,
            n,
        });
    }
    if f > nf * nf * (1.0 + 1e-12) {
        return Err(SpinError::QfiDomain {
            context: "depth witness",
            f,
            n,
        });
    }
    let mut depth = 1;
    for k in 1..=n {
        // same relative slack as the ceiling, so sub-ulp noise in f
        // cannot flip the strict comparison
        if f > bound(n, k) * (1.0 + 1e-12) {
            depth = k + 1;
        }
    }
    Ok(depth.min(n))
}

/// Largest F_Q reachable with entanglement blocks of at most k spins.
pub fn bound(n: usize, k: usize) -> f64 {
    let blocks = n / k;
    let rest = n - blocks * k;
    (blocks * k * k + rest * rest) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_endpoints() {
        assert_eq!(bound(10, 1), 10.0);
        assert_eq!(bound(10, 10), 100.0);
        assert_eq!(bound(10, 3), 3.0 * 9.0 + 1.0);
    }

    #[test]
    fn depth_at_bounds_is_not_excluded() {
        // equality does not witness k+1; strictly above does
        assert_eq!(depth_witness(10.0, 10).unwrap(), 1);
        assert_eq!(depth_witness(10.0 + 1e-9, 10).unwrap(), 2);
        assert_eq!(depth_witness(100.0, 10).unwrap(), 10);
        assert!(depth_witness(101.0, 10).is_err());
        assert!(depth_witness(f64::NAN, 10).is_err());
    }
}
