//! Invariants checked over randomized inputs.

use num_complex::Complex64;
use proptest::prelude::*;
use spinchaos::bmf;
use spinchaos::breaktime::{scaling_fit, slope_fit, t_break, ScalingModel};
use spinchaos::dicke::DickeBasis;
use spinchaos::evolve::ConstStepper;
use spinchaos::hp;
use spinchaos::output::csv_string;
use spinchaos::qfi;
use spinchaos::{KickedDrive, ModelParams};

fn normalized_state(n: usize, raw: &[(f64, f64)]) -> Vec<Complex64> {
    let mut psi: Vec<Complex64> = raw[..=n]
        .iter()
        .map(|&(re, im)| Complex64::new(re, im))
        .collect();
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm < 1e-6 {
        psi[0] = Complex64::ONE;
        return psi.iter().map(|z| z / (norm * norm + 1.0).sqrt()).collect();
    }
    psi.iter().map(|z| z / norm).collect()
}

proptest! {
    #[test]
    fn evolution_is_unitary_and_stays_on_the_multiplet(
        n in 2usize..9,
        raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 9),
        a in -3.0f64..3.0,
        c in -3.0f64..3.0,
        sign in prop::sample::select(vec![1.0f64, -1.0]),
        t in 0.01f64..2.0,
    ) {
        let basis = DickeBasis::new(n);
        let mut psi = normalized_state(n, &raw);
        let j = n as f64 / 2.0;
        let casimir0 = basis.casimir(&psi);
        prop_assert!((casimir0 - j * (j + 1.0)).abs() < 1e-9 * j * (j + 1.0));

        let p = ModelParams::new(n, a, c, sign).unwrap();
        let mut stepper = ConstStepper::new(&p, &basis).unwrap();
        stepper.step(&mut psi, t).unwrap();
        prop_assert!((basis.norm(&psi) - 1.0).abs() < 1e-12);
        prop_assert!((basis.casimir(&psi) - casimir0).abs() < 1e-9 * casimir0.abs());
    }

    #[test]
    fn reversed_drive_undoes_the_evolution(
        n in 2usize..9,
        raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 9),
        a in -2.0f64..2.0,
        c in -2.0f64..2.0,
        t in 0.01f64..1.0,
    ) {
        let basis = DickeBasis::new(n);
        let psi0 = normalized_state(n, &raw);
        let mut psi = psi0.clone();
        let fwd = ModelParams::new(n, a, c, 1.0).unwrap();
        let bwd = ModelParams::new(n, -a, c, -1.0).unwrap();
        ConstStepper::new(&fwd, &basis).unwrap().step(&mut psi, t).unwrap();
        ConstStepper::new(&bwd, &basis).unwrap().step(&mut psi, t).unwrap();
        let dev: f64 = psi
            .iter()
            .zip(&psi0)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        prop_assert!(dev < 1e-11, "round trip deviation {dev:e}");
    }

    #[test]
    fn qfi_is_positive_and_bounded(
        n in 2usize..12,
        raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 12),
    ) {
        let basis = DickeBasis::new(n);
        let psi = normalized_state(n, &raw);
        let m = basis.moments(&psi);
        let f = qfi::fq_from_moments(&m);
        let nf = n as f64;
        prop_assert!(f >= -1e-10);
        prop_assert!(f <= nf * nf * (1.0 + 1e-10), "f = {f}, cap {}", nf * nf);
        // covariance is PSD: every diagonal entry of lambda dominates 0
        let lam = qfi::lambda_q(&m);
        for (i, row) in lam.iter().enumerate() {
            prop_assert!(row[i] >= -1e-10);
            for (j, v) in row.iter().enumerate() {
                prop_assert!(v.abs() <= (lam[i][i] * lam[j][j]).max(0.0).sqrt() + 1e-9);
            }
        }
        prop_assert!(qfi::depth_witness(f.max(0.0), n).is_ok());
    }

    #[test]
    fn coherent_states_sit_at_the_shot_noise_line(
        n in 2usize..40,
        theta in 0.05f64..3.1,
        phi in -3.1f64..3.1,
    ) {
        let basis = DickeBasis::new(n);
        let f = qfi::fq_from_moments(&basis.moments(&basis.coherent(theta, phi)));
        prop_assert!((f - n as f64).abs() < 1e-8 * n as f64);
        let fb = bmf::f_b(&bmf::initial(n, theta, phi), n);
        prop_assert!((fb - n as f64).abs() < 1e-9 * n as f64);
        prop_assert_eq!(qfi::depth_witness(f.min(n as f64), n).unwrap(), 1);
    }

    #[test]
    fn depth_witness_is_monotone(
        n in 2usize..40,
        f1 in 0.0f64..1.0,
        f2 in 0.0f64..1.0,
    ) {
        let nf = n as f64;
        let (lo, hi) = if f1 <= f2 { (f1, f2) } else { (f2, f1) };
        let d_lo = qfi::depth_witness(lo * nf * nf, n).unwrap();
        let d_hi = qfi::depth_witness(hi * nf * nf, n).unwrap();
        prop_assert!(d_lo <= d_hi);
        prop_assert!(d_hi <= n);
    }

    #[test]
    fn block_bound_is_monotone_in_k(n in 2usize..60) {
        let mut prev = 0.0;
        for k in 1..=n {
            let b = qfi::bound(n, k);
            prop_assert!(b >= prev);
            prev = b;
        }
        prop_assert!((qfi::bound(n, 1) - n as f64).abs() < 1e-12);
        prop_assert!((qfi::bound(n, n) - (n * n) as f64).abs() < 1e-12);
    }

    #[test]
    fn hp_flow_preserves_the_symplectic_invariant(
        a in -3.0f64..3.0,
        c in -3.0f64..3.0,
        steps in 1usize..200,
    ) {
        let mut m = hp::initial();
        for _ in 0..steps {
            m = hp::step_rk4(m, a, c, 1e-2);
        }
        prop_assert!((hp::symplectic_invariant(&m) - 0.25).abs() < 1e-6);
        prop_assert!(hp::n_exc(&m) > -1e-12);
    }

    #[test]
    fn conjugation_reverses_the_moment_flow(
        theta in 0.2f64..2.9,
        phi in -3.0f64..3.0,
        a in -2.0f64..2.0,
        c in -2.0f64..2.0,
        t in 0.05f64..0.5,
    ) {
        let y0 = bmf::initial(40, theta, phi);
        let fwd = bmf::integrate(&y0, a, c, t, 1e-3).unwrap();
        let y1 = fwd.last().unwrap().1;
        let back = bmf::integrate(&y1.conjugate(), a, c, t, 1e-3).unwrap();
        let y2 = back.last().unwrap().1.conjugate();
        for (u, v) in y2.to_array().iter().zip(y0.to_array().iter()) {
            prop_assert!((u - v).abs() < 1e-8, "{u} vs {v}");
        }
    }

    #[test]
    fn break_time_is_monotone_in_the_threshold(
        incs in prop::collection::vec(0.0f64..0.05, 30),
        g1 in 0.01f64..0.3,
        g2 in 0.01f64..0.3,
    ) {
        let mut dev = 0.0;
        let mut exact = Vec::new();
        let mut approx = Vec::new();
        for (k, inc) in incs.iter().enumerate() {
            let t = k as f64 * 0.1;
            dev += inc;
            exact.push((t, 2.0));
            approx.push((t, 2.0 * (1.0 - dev)));
        }
        let (lo, hi) = if g1 <= g2 { (g1, g2) } else { (g2, g1) };
        let t_lo = t_break(&exact, &approx, lo).unwrap();
        let t_hi = t_break(&exact, &approx, hi).unwrap();
        if t_lo.crossed() && t_hi.crossed() {
            prop_assert!(t_lo.time() <= t_hi.time() + 1e-12);
        } else if t_hi.crossed() {
            prop_assert!(t_lo.crossed(), "higher threshold crossed but lower did not");
        }
    }

    #[test]
    fn fits_do_not_depend_on_record_order(
        ts in prop::collection::vec(0.5f64..20.0, 5),
    ) {
        let ns = [64usize, 100, 144, 196, 256];
        let recs: Vec<(usize, f64)> = ns.iter().copied().zip(ts.iter().copied()).collect();
        let mut rev = recs.clone();
        rev.reverse();
        for model in ScalingModel::ALL {
            let a = scaling_fit(&recs, model).unwrap();
            let b = scaling_fit(&rev, model).unwrap();
            prop_assert!((a.alpha - b.alpha).abs() < 1e-12 * a.alpha.abs().max(1.0));
            prop_assert!((a.residual - b.residual).abs() < 1e-9 * a.residual.max(1e-9));
            let sa = slope_fit(&recs, model).unwrap();
            let sb = slope_fit(&rev, model).unwrap();
            prop_assert!((sa.slope - sb.slope).abs() < 1e-9 * sa.slope.abs().max(1.0));
        }
    }

    #[test]
    fn csv_serialisation_round_trips(
        rows in prop::collection::vec(
            prop::collection::vec(-1e12f64..1e12, 3), 1..20),
    ) {
        let text = csv_string(&["a", "b", "c"], &rows).unwrap();
        let again = csv_string(&["a", "b", "c"], &rows).unwrap();
        prop_assert_eq!(&text, &again);
        for (line, row) in text.lines().skip(1).zip(&rows) {
            for (field, want) in line.split(',').zip(row) {
                let got: f64 = field.parse().unwrap();
                prop_assert!(got == *want, "{field} parsed to {got}, want {want}");
            }
        }
    }

    #[test]
    fn kicked_drive_grid_agreement(amp in 0.1f64..5.0) {
        let drive = KickedDrive::standard(amp);
        prop_assert!(drive.check_grid(0.01).is_ok());
        prop_assert!(drive.check_grid(0.003).is_err());
        // pulse occupies exactly one 0.01 step per period
        let per = (drive.period() / 0.01).round() as usize;
        let mut pulses = 0;
        for k in 0..3 * per {
            if drive.in_pulse(k as f64 * 0.01) {
                pulses += 1;
            }
        }
        prop_assert_eq!(pulses, 3);
    }
}
