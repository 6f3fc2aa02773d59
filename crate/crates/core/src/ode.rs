//! Classic fixed-step RK4 over small fixed-size systems.

pub(crate) fn rk4_step<const D: usize>(
    f: impl Fn(&[f64; D]) -> [f64; D],
    y: &[f64; D],
    dt: f64,
) -> [f64; D] {
    let k1 = f(y);
    let k2 = f(&add_scaled(y, &k1, 0.5 * dt));
    let k3 = f(&add_scaled(y, &k2, 0.5 * dt));
    let k4 = f(&add_scaled(y, &k3, dt));
    let mut out = *y;
    for i in 0..D {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

fn add_scaled<const D: usize>(y: &[f64; D], k: &[f64; D], h: f64) -> [f64; D] {
    let mut out = *y;
    for i in 0..D {
        out[i] += h * k[i];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fourth_order_on_exponential() {
        // y' = y over [0,1]; error should fall ~16x per halving
        let f = |y: &[f64; 1]| [y[0]];
        let run = |dt: f64| {
            let mut y = [1.0];
            let n = (1.0 / dt).round() as usize;
            for _ in 0..n {
                y = rk4_step(f, &y, dt);
            }
            (y[0] - std::f64::consts::E).abs()
        };
        let e1 = run(0.01);
        let e2 = run(0.005);
        assert!(e1 / e2 > 14.0 && e1 / e2 < 18.0, "ratio {}", e1 / e2);
    }
}
