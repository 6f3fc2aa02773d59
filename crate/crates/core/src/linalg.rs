//! Small dense linear algebra: symmetric tridiagonal eigen-decomposition
//! (QL with implicit shifts) and closed-form 3x3 symmetric eigenvalues.
//!
//! Every Hamiltonian in this crate is real symmetric tridiagonal in the
//! Dicke basis, so this is the only eigensolver needed.

use crate::params::SpinError;

const EPS: f64 = 2.220_446_049_250_313e-16;
const MAX_QL_ITER: usize = 50;

/// Eigenvalues (ascending) and orthonormal eigenvectors of a real
/// symmetric tridiagonal matrix.
#[derive(Debug, Clone)]
pub struct TridiagEigen {
    pub n: usize,
    pub vals: Vec<f64>,
    vecs: Vec<f64>, // column-major, column i = eigenvector i
}

impl TridiagEigen {
    /// `diag` has length n, `off` length n-1 with off[i] coupling i and i+1.
    pub fn new(diag: &[f64], off: &[f64]) -> Result<Self, SpinError> {
        let n = diag.len();
        if n == 0 || off.len() + 1 != n {
            return Err(SpinError::InvalidParams(
                "tridiagonal sizes inconsistent".into(),
            ));
        }
        let mut d = diag.to_vec();
        let mut e = Vec::with_capacity(n);
        e.extend_from_slice(off);
        e.push(0.0);
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            v[i * n + i] = 1.0;
        }
        ql_implicit(&mut d, &mut e, &mut v, n)?;
        sort_pairs(&mut d, &mut v, n);
        Ok(Self { n, vals: d, vecs: v })
    }

    pub fn vec(&self, i: usize) -> &[f64] {
        &self.vecs[i * self.n..(i + 1) * self.n]
    }
}

fn ql_implicit(d: &mut [f64], e: &mut [f64], v: &mut [f64], n: usize) -> Result<(), SpinError> {
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= EPS * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITER {
                    return Err(SpinError::Degenerate(
                        "QL iteration did not converge".into(),
                    ));
                }
                // implicit shift from the leading 2x2
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for item in d.iter_mut().skip(l + 2) {
                    *item -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    // rotate columns i and i+1 of the accumulated basis
                    let (lo, hi) = v.split_at_mut((i + 1) * n);
                    let ci = &mut lo[i * n..];
                    let ci1 = &mut hi[..n];
                    for k in 0..n {
                        let t = ci1[k];
                        ci1[k] = s * ci[k] + c * t;
                        ci[k] = c * ci[k] - s * t;
                    }
                    if i == l {
                        p = -s * s2 * c3 * el1 * e[l] / dl1;
                        e[l] = s * p;
                        d[l] = c * p;
                    }
                }
                if e[l].abs() <= EPS * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

fn sort_pairs(d: &mut [f64], v: &mut [f64], n: usize) {
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        for j in i + 1..n {
            if d[j] < d[k] {
                k = j;
            }
        }
        if k != i {
            d.swap(i, k);
            for row in 0..n {
                v.swap(i * n + row, k * n + row);
            }
        }
    }
}

/// Eigenvalues of a symmetric 3x3 matrix, descending, by cyclic Jacobi
/// rotations. Full precision is kept even at degenerate pairs, which
/// the closed-form cubic cannot do.
pub fn eig3_sym(a: &[[f64; 3]; 3]) -> [f64; 3] {
    let mut m = *a;
    let fro2: f64 = m.iter().flatten().map(|v| v * v).sum();
    let stop = 1e-30 * fro2.max(f64::MIN_POSITIVE);
    for _ in 0..30 {
        let off = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
        if off <= stop {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let apq = m[p][q];
            if apq == 0.0 {
                continue;
            }
            let theta = (m[q][q] - m[p][p]) / (2.0 * apq);
            let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
            let c = 1.0 / t.hypot(1.0);
            let s = t * c;
            m[p][p] -= t * apq;
            m[q][q] += t * apq;
            m[p][q] = 0.0;
            m[q][p] = 0.0;
            let r = 3 - p - q;
            let (arp, arq) = (m[r][p], m[r][q]);
            m[r][p] = c * arp - s * arq;
            m[p][r] = m[r][p];
            m[r][q] = s * arp + c * arq;
            m[q][r] = m[r][q];
        }
    }
    let mut d = [m[0][0], m[1][1], m[2][2]];
    d.sort_by(|x, y| y.partial_cmp(x).unwrap());
    d
}

pub fn max_eig3(a: &[[f64; 3]; 3]) -> f64 {
    eig3_sym(a)[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiag_reproduces_matrix() {
        // A v_i = lambda_i v_i, checked entrywise
        let diag = [1.0, -0.5, 2.0, 0.25, -1.0];
        let off = [0.7, 1.3, -0.2, 0.9];
        let eig = TridiagEigen::new(&diag, &off).unwrap();
        let n = diag.len();
        for i in 0..n {
            let v = eig.vec(i);
            for r in 0..n {
                let mut av = diag[r] * v[r];
                if r > 0 {
                    av += off[r - 1] * v[r - 1];
                }
                if r + 1 < n {
                    av += off[r] * v[r + 1];
                }
                assert!((av - eig.vals[i] * v[r]).abs() < 1e-12, "i={i} r={r}");
            }
        }
    }

    #[test]
    fn tridiag_vectors_orthonormal() {
        let diag: Vec<f64> = (0..30).map(|k| (k as f64 * 0.37).sin()).collect();
        let off: Vec<f64> = (0..29).map(|k| 0.5 + (k as f64 * 0.11).cos()).collect();
        let eig = TridiagEigen::new(&diag, &off).unwrap();
        for i in 0..30 {
            for j in i..30 {
                let dot: f64 = eig.vec(i).iter().zip(eig.vec(j)).map(|(a, b)| a * b).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-11, "i={i} j={j} dot={dot}");
            }
        }
        // ascending order
        for w in eig.vals.windows(2) {
            assert!(w[0] <= w[1] + 1e-12);
        }
    }

    #[test]
    fn three_by_three_known_spectrum() {
        // diag(5, 1, -2) rotated is overkill; use an exact small case
        let a = [[2.0, 1.0, 0.0], [1.0, 2.0, 1.0], [0.0, 1.0, 2.0]];
        let e = eig3_sym(&a);
        let s2 = std::f64::consts::SQRT_2;
        assert!((e[0] - (2.0 + s2)).abs() < 1e-12);
        assert!((e[1] - 2.0).abs() < 1e-12);
        assert!((e[2] - (2.0 - s2)).abs() < 1e-12);
    }

    #[test]
    fn diagonal_shortcut() {
        let a = [[3.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 7.0]];
        assert_eq!(eig3_sym(&a), [7.0, 3.0, -1.0]);
    }
}
