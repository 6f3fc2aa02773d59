//! Subcommand runners: resolve parameters (CLI flag > config file >
//! default), run the solvers, and emit CSV artifacts plus a manifest.

use crate::breaktime::{self, DriveKind, Regime, ScalingModel, ScanSpec, Tier};
use crate::config::RunConfig;
use crate::evolve;
use crate::mf::{self, Bloch};
use crate::output::Manifest;
use crate::params::{KickedDrive, ModelParams, SpinError};
use crate::qfi;
use crate::qpt::{self, SweepConfig, SweepTier};
use crate::{bmf, hp};
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

/// 0 ok, 2 config/usage, 3 solver failure.
pub fn exit_code(e: &SpinError) -> i32 {
    match e {
        SpinError::Config(_) | SpinError::InvalidParams(_) | SpinError::Io(_) => 2,
        _ => 3,
    }
}

fn resolve_f64(
    flag: Option<f64>,
    cfg: &RunConfig,
    sec: &str,
    key: &str,
    default: f64,
) -> Result<f64, SpinError> {
    let file = cfg.f64_opt(sec, key)?;
    Ok(flag.or(file).unwrap_or(default))
}

fn resolve_usize(
    flag: Option<usize>,
    cfg: &RunConfig,
    sec: &str,
    key: &str,
    default: usize,
) -> Result<usize, SpinError> {
    let file = cfg.usize_opt(sec, key)?;
    Ok(flag.or(file).unwrap_or(default))
}

fn release_other_sections(cfg: &RunConfig, active: &str) {
    for s in crate::config::SECTIONS {
        if s != active {
            cfg.allow_section(s);
        }
    }
}

fn emit(
    manifest: &mut Manifest,
    name: &str,
    header: &[&str],
    rows: Result<Vec<Vec<f64>>, SpinError>,
) -> Result<(), SpinError> {
    match rows {
        Ok(r) => manifest.write_csv(name, header, &r),
        Err(e) => {
            manifest.mark_failed(name);
            manifest.finish()?;
            Err(e)
        }
    }
}

#[derive(Default)]
pub struct SeriesOverrides {
    pub n: Option<usize>,
    pub a: Option<f64>,
    pub c: Option<f64>,
    pub t_max: Option<f64>,
    pub dt: Option<f64>,
    pub periods: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum ConstKind {
    Oat,
    Tat,
}

/// oat / tat: constant-drive QFI series, exact vs BMF vs HP.
pub fn run_const_series(
    kind: ConstKind,
    ov: &SeriesOverrides,
    cfg: &RunConfig,
    out: &Path,
) -> Result<(), SpinError> {
    let (sec, file, default_n, default_a, default_c) = match kind {
        ConstKind::Oat => ("oat", "oat_qfi.csv", 400, 0.0, PI),
        ConstKind::Tat => ("tat", "tat_qfi.csv", 200, 0.4 * PI, 0.5 * PI),
    };
    release_other_sections(cfg, sec);
    let n = resolve_usize(ov.n, cfg, sec, "N", default_n)?;
    let a = match kind {
        ConstKind::Oat => 0.0,
        ConstKind::Tat => resolve_f64(ov.a, cfg, sec, "A", default_a)?,
    };
    let c = resolve_f64(ov.c, cfg, sec, "c", default_c)?;
    let t_max = resolve_f64(ov.t_max, cfg, sec, "t_max", 6.0)?;
    let dt = resolve_f64(ov.dt, cfg, sec, "dt", 0.01)?;
    cfg.finish()?;

    let mut eff = format!("subcommand = {sec}\n");
    let _ = writeln!(eff, "N = {n}\nA = {a}\nc = {c}\nt_max = {t_max}\ndt = {dt}");
    eff.push_str(cfg.text());
    let mut manifest = Manifest::new(out, &eff);

    let rows = (|| {
        let p = ModelParams::new(n, a, c, 1.0)?;
        let exact = evolve::qfi_series_const(&p, t_max, dt)?;
        let mfb = bmf::integrate(&bmf::initial_x(n), a, c, t_max, dt)?;
        let (_, hps) = hp::series_const(a, c, t_max, dt);
        series_rows(n, &exact, &mfb, &hps)
    })();
    emit(&mut manifest, file, &["t", "F_Q", "F_B", "F_HP"], rows)?;
    manifest.finish()
}

/// qkr: kicked-drive QFI series on the shared within-period grid.
pub fn run_qkr(ov: &SeriesOverrides, cfg: &RunConfig, out: &Path) -> Result<(), SpinError> {
    let sec = "qkr";
    release_other_sections(cfg, sec);
    let n = resolve_usize(ov.n, cfg, sec, "N", 400)?;
    let a = resolve_f64(ov.a, cfg, sec, "A", 0.4 * PI)?;
    let c = resolve_f64(ov.c, cfg, sec, "c", 0.2 * PI)?;
    let dt = resolve_f64(ov.dt, cfg, sec, "dt", 0.01)?;
    let periods = resolve_usize(ov.periods, cfg, sec, "periods", 20)?;
    let drive = KickedDrive::standard(a);
    let default_t = periods as f64 * drive.period();
    let t_max = resolve_f64(ov.t_max, cfg, sec, "t_max", default_t)?;
    cfg.finish()?;

    let mut eff = format!("subcommand = {sec}\n");
    let _ = writeln!(eff, "N = {n}\nA = {a}\nc = {c}\nt_max = {t_max}\ndt = {dt}");
    eff.push_str(cfg.text());
    let mut manifest = Manifest::new(out, &eff);

    let rows = (|| {
        let p = ModelParams::new(n, a, c, 1.0)?;
        let exact = evolve::qfi_series_kicked(&p, &drive, t_max, dt)?;
        let mfb = bmf::integrate_kicked(&bmf::initial_x(n), &drive, c, t_max, dt)?;
        let (_, hps) = hp::series_kicked(&drive, c, t_max, dt)?;
        series_rows(n, &exact, &mfb, &hps)
    })();
    emit(&mut manifest, "qkr_qfi.csv", &["t", "F_Q", "F_B", "F_HP"], rows)?;
    manifest.finish()
}

fn series_rows(
    n: usize,
    exact: &[(f64, f64)],
    mfb: &[(f64, bmf::BmfState)],
    hps: &[hp::HpMoments],
) -> Result<Vec<Vec<f64>>, SpinError> {
    if exact.len() != mfb.len() || exact.len() != hps.len() {
        return Err(SpinError::GridMismatch);
    }
    Ok(exact
        .iter()
        .zip(mfb)
        .zip(hps)
        .map(|((&(t, fq), (_, y)), m)| vec![t, fq, bmf::f_b(y, n), hp::f_total(n, m)])
        .collect())
}

#[derive(Default)]
pub struct LyapMapOverrides {
    pub a_min: Option<f64>,
    pub a_max: Option<f64>,
    pub na: Option<usize>,
    pub c_min: Option<f64>,
    pub c_max: Option<f64>,
    pub nc: Option<usize>,
    pub m: Option<usize>,
    pub delta: Option<f64>,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// lyap-map: largest Lyapunov exponent over an (A, c) grid.
pub fn run_lyap_map(ov: &LyapMapOverrides, cfg: &RunConfig, out: &Path) -> Result<(), SpinError> {
    let sec = "lyap-map";
    release_other_sections(cfg, sec);
    let a_min = resolve_f64(ov.a_min, cfg, sec, "a_min", 0.0)?;
    let a_max = resolve_f64(ov.a_max, cfg, sec, "a_max", PI)?;
    let na = resolve_usize(ov.na, cfg, sec, "na", 41)?;
    let c_min = resolve_f64(ov.c_min, cfg, sec, "c_min", 0.0)?;
    let c_max = resolve_f64(ov.c_max, cfg, sec, "c_max", 2.0 * PI)?;
    let nc = resolve_usize(ov.nc, cfg, sec, "nc", 81)?;
    let m = resolve_usize(ov.m, cfg, sec, "m", 500)?;
    let delta = resolve_f64(ov.delta, cfg, sec, "delta", 1e-5)?;
    cfg.finish()?;
    if na == 0 || nc == 0 {
        return Err(SpinError::Config("grid sizes must be positive".into()));
    }

    let mut eff = String::from("subcommand = lyap-map\n");
    let _ = writeln!(
        eff,
        "a_min = {a_min}\na_max = {a_max}\nna = {na}\nc_min = {c_min}\nc_max = {c_max}\nnc = {nc}\nm = {m}\ndelta = {delta}"
    );
    eff.push_str(cfg.text());
    let mut manifest = Manifest::new(out, &eff);

    let rows = (|| {
        let avals = linspace(a_min, a_max, na);
        let cvals = linspace(c_min, c_max, nc);
        let s0: Bloch = [1.0, 0.0, 0.0];
        let grid = mf::lyapunov_map(&avals, &cvals, &s0, m, delta)?;
        Ok(grid.iter().map(|&(a, c, l)| vec![a, c, l]).collect())
    })();
    emit(&mut manifest, "lyap_map.csv", &["A", "c", "lambda"], rows)?;
    manifest.finish()
}

#[derive(Default)]
pub struct PoincareOverrides {
    pub a: Option<f64>,
    pub c: Option<f64>,
    pub periods: Option<usize>,
    pub n_phi: Option<usize>,
    pub n_z: Option<usize>,
}

/// poincare: stroboscopic (phi, s_z) section from a seed grid.
pub fn run_poincare(ov: &PoincareOverrides, cfg: &RunConfig, out: &Path) -> Result<(), SpinError> {
    let sec = "poincare";
    release_other_sections(cfg, sec);
    let a = resolve_f64(ov.a, cfg, sec, "A", 0.4 * PI)?;
    let c = resolve_f64(ov.c, cfg, sec, "c", 0.8 * PI)?;
    let periods = resolve_usize(ov.periods, cfg, sec, "periods", 400)?;
    let n_phi = resolve_usize(ov.n_phi, cfg, sec, "n_phi", 20)?;
    let n_z = resolve_usize(ov.n_z, cfg, sec, "n_z", 20)?;
    cfg.finish()?;

    let mut eff = String::from("subcommand = poincare\n");
    let _ = writeln!(eff, "A = {a}\nc = {c}\nperiods = {periods}\nn_phi = {n_phi}\nn_z = {n_z}");
    eff.push_str(cfg.text());
    let mut manifest = Manifest::new(out, &eff);

    let rows = (|| {
        let drive = KickedDrive::standard(a);
        let seeds = mf::seed_grid(n_phi, n_z);
        let pts = mf::poincare_section(&drive, c, &seeds, periods)?;
        Ok(pts
            .iter()
            .map(|p| vec![p.seed as f64, p.period as f64, p.phi, p.sz])
            .collect())
    })();
    emit(
        &mut manifest,
        "poincare.csv",
        &["seed", "period", "phi", "s_z"],
        rows,
    )?;
    manifest.finish()
}

#[derive(Default)]
pub struct BreaktimeOverrides {
    pub regime: Option<String>,
    pub tier: Option<String>,
    pub n_list: Option<Vec<usize>>,
    pub g: Option<f64>,
    pub dt: Option<f64>,
    pub t_max: Option<f64>,
    pub a: Option<f64>,
    pub c: Option<f64>,
}

pub const BREAKTIME_N_LIST: [usize; 7] = [64, 100, 144, 196, 256, 324, 400];

fn regime_preset(name: &str) -> Result<(Regime, DriveKind, f64, f64, f64), SpinError> {
    // (regime, drive, A, c, t_max)
    match name {
        "stable" => Ok((Regime::Stable, DriveKind::Const, 0.0, 0.2 * PI, 6.0)),
        "saddle" => Ok((Regime::Saddle, DriveKind::Const, 0.4 * PI, 0.5 * PI, 1.5)),
        "chaotic" => Ok((Regime::Chaotic, DriveKind::Kicked, 0.4 * PI, 1.4 * PI, 1.5)),
        other => Err(SpinError::Config(format!(
            "regime '{other}' not one of stable, saddle, chaotic"
        ))),
    }
}

/// breaktime-scan: t at which an approximate tier's QFI departs from
/// the exact one, over a list of N, with scaling fits printed.
pub fn run_breaktime(
    ov: &BreaktimeOverrides,
    cfg: &RunConfig,
    out: &Path,
) -> Result<(), SpinError> {
    let sec = "breaktime-scan";
    release_other_sections(cfg, sec);
    let regime_name = ov
        .regime
        .clone()
        .or_else(|| cfg.str_opt(sec, "regime"))
        .unwrap_or_else(|| "stable".into());
    let (regime, kind, preset_a, preset_c, preset_t) = regime_preset(&regime_name)?;
    let tier_name = ov
        .tier
        .clone()
        .or_else(|| cfg.str_opt(sec, "tier"))
        .unwrap_or_else(|| "bmf".into());
    let tier = match tier_name.as_str() {
        "bmf" => Tier::Bmf,
        "hp" => Tier::Hp,
        other => {
            return Err(SpinError::Config(format!(
                "tier '{other}' not one of bmf, hp"
            )))
        }
    };
    let n_list = match &ov.n_list {
        Some(l) => l.clone(),
        None => cfg
            .usize_list_opt(sec, "N_list")?
            .unwrap_or_else(|| BREAKTIME_N_LIST.to_vec()),
    };
    let a = resolve_f64(ov.a, cfg, sec, "A", preset_a)?;
    let c = resolve_f64(ov.c, cfg, sec, "c", preset_c)?;
    let g = resolve_f64(ov.g, cfg, sec, "g", 0.01)?;
    let dt = resolve_f64(ov.dt, cfg, sec, "dt", 0.01)?;
    let t_max = resolve_f64(ov.t_max, cfg, sec, "t_max", preset_t)?;
    cfg.finish()?;

    let mut eff = String::from("subcommand = breaktime-scan\n");
    let _ = writeln!(
        eff,
        "regime = {regime_name}\ntier = {tier_name}\nA = {a}\nc = {c}\ng = {g}\ndt = {dt}\nt_max = {t_max}"
    );
    let _ = writeln!(
        eff,
        "N_list = {}",
        n_list
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join(",")
    );
    eff.push_str(cfg.text());
    let mut manifest = Manifest::new(out, &eff);

    let spec = ScanSpec {
        a,
        c,
        kind,
        tier,
        regime,
        g,
        dt,
        t_max,
    };
    let file = format!("breaktime_{}_{}.csv", regime.label(), tier.label());
    let rows = (|| {
        let records = breaktime::breaktime_scan(&n_list, &spec)?;
        for r in &records {
            println!(
                "N = {:<5} t_break = {:.4}{}",
                r.n,
                r.t_break,
                if r.crossed { "" } else { "  (no crossing)" }
            );
        }
        let pairs: Vec<(usize, f64)> = records
            .iter()
            .filter(|r| r.crossed)
            .map(|r| (r.n, r.t_break))
            .collect();
        if pairs.len() >= 3 {
            for model in ScalingModel::ALL {
                let fit = breaktime::scaling_fit(&pairs, model)?;
                println!(
                    "fit {:<6} alpha = {:.5}  residual = {:.4}",
                    model.label(),
                    fit.alpha,
                    fit.residual
                );
            }
        }
        Ok(records
            .iter()
            .map(|r| {
                vec![
                    r.n as f64,
                    r.a,
                    r.c,
                    r.g,
                    r.t_break,
                    if r.crossed { 1.0 } else { 0.0 },
                ]
            })
            .collect())
    })();
    emit(
        &mut manifest,
        &file,
        &["N", "A", "c", "g", "t_break", "crossed"],
        rows,
    )?;
    manifest.finish()
}

#[derive(Default)]
pub struct QptOverrides {
    pub n: Option<usize>,
    pub c: Option<f64>,
    pub v: Option<f64>,
    pub a_max: Option<f64>,
    pub dt: Option<f64>,
    pub tier: Option<String>,
}

/// qpt: adiabatic sweep across the transition, peak report included.
pub fn run_qpt(ov: &QptOverrides, cfg: &RunConfig, out: &Path) -> Result<(), SpinError> {
    let sec = "qpt";
    release_other_sections(cfg, sec);
    let n = resolve_usize(ov.n, cfg, sec, "N", 200)?;
    let c = resolve_f64(ov.c, cfg, sec, "c", 1.0)?;
    let v = resolve_f64(ov.v, cfg, sec, "v", 1e-3)?;
    let a_max = resolve_f64(ov.a_max, cfg, sec, "a_max", 2.0 * c)?;
    let dt = resolve_f64(ov.dt, cfg, sec, "dt", 5e-3)?;
    let da = resolve_f64(None, cfg, sec, "da_sample", 1e-3)?;
    let tier_name = ov
        .tier
        .clone()
        .or_else(|| cfg.str_opt(sec, "tier"))
        .unwrap_or_else(|| "both".into());
    let tier = match tier_name.as_str() {
        "exact" => SweepTier::Exact,
        "bmf" => SweepTier::Bmf,
        "both" => SweepTier::Both,
        other => {
            return Err(SpinError::Config(format!(
                "tier '{other}' not one of exact, bmf, both"
            )))
        }
    };
    let start_down = cfg.bool_opt(sec, "start_down")?.unwrap_or(false);
    cfg.finish()?;

    let mut eff = String::from("subcommand = qpt\n");
    let _ = writeln!(
        eff,
        "N = {n}\nc = {c}\nv = {v}\na_max = {a_max}\ndt = {dt}\nda_sample = {da}\ntier = {tier_name}\nstart_down = {start_down}"
    );
    eff.push_str(cfg.text());
    let mut manifest = Manifest::new(out, &eff);

    let sweep = (|| {
        let sweep_cfg = SweepConfig {
            n,
            c,
            v,
            a_max,
            dt,
            da_sample: da,
            tier,
            start_down,
        };
        qpt::adiabatic_sweep(&sweep_cfg)
    })();
    let sweep = match sweep {
        Ok(s) => s,
        Err(e) => {
            manifest.mark_failed("qpt_sweep.csv");
            manifest.finish()?;
            return Err(e);
        }
    };
    let rows: Vec<Vec<f64>> = sweep
        .samples
        .iter()
        .map(|s| vec![s.t, s.a, s.sz_exact, s.sz_bmf, s.f_q, s.f_b])
        .collect();
    manifest.write_csv(
        "qpt_sweep.csv",
        &["t", "A", "s_z_exact", "s_z_bmf", "F_Q", "F_B"],
        &rows,
    )?;
    let mut peak_rows = Vec::new();
    if let Some(p) = sweep.a_star_q {
        println!(
            "A*_Q = {:.4}  (F peak = {:.4}{})",
            p.a_star,
            p.f_peak,
            if p.at_edge { ", at grid edge" } else { "" }
        );
        peak_rows.push(vec![
            0.0,
            p.a_star,
            p.f_peak,
            if p.at_edge { 1.0 } else { 0.0 },
        ]);
    }
    if let Some(p) = sweep.a_star_b {
        println!(
            "A*_B = {:.4}  (F peak = {:.4}{})",
            p.a_star,
            p.f_peak,
            if p.at_edge { ", at grid edge" } else { "" }
        );
        peak_rows.push(vec![
            1.0,
            p.a_star,
            p.f_peak,
            if p.at_edge { 1.0 } else { 0.0 },
        ]);
    }
    manifest.write_csv(
        "qpt_peaks.csv",
        &["tier", "A_star", "F_peak", "at_edge"],
        &peak_rows,
    )?;
    manifest.finish()
}

#[derive(Default)]
pub struct DepthOverrides {
    pub input: Option<String>,
    pub n: Option<usize>,
}

/// depth: entanglement-depth table from a QFI series CSV (t, F columns).
pub fn run_depth(ov: &DepthOverrides, cfg: &RunConfig, out: &Path) -> Result<(), SpinError> {
    let sec = "depth";
    release_other_sections(cfg, sec);
    let input = ov
        .input
        .clone()
        .or_else(|| cfg.str_opt(sec, "input"))
        .ok_or_else(|| SpinError::Config("depth needs an input CSV (--input)".into()))?;
    let n = ov
        .n
        .or(cfg.usize_opt(sec, "N")?)
        .ok_or_else(|| SpinError::Config("depth needs the particle number (--N)".into()))?;
    cfg.finish()?;

    let mut eff = String::from("subcommand = depth\n");
    let _ = writeln!(eff, "input = {input}\nN = {n}");
    eff.push_str(cfg.text());
    let mut manifest = Manifest::new(out, &eff);

    let rows = (|| {
        let text = std::fs::read_to_string(&input)
            .map_err(|e| SpinError::Config(format!("cannot read {input}: {e}")))?;
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| SpinError::Config(format!("{input} is empty")))?;
        let cols: Vec<&str> = header.split(',').collect();
        let t_col = cols.iter().position(|c| *c == "t").unwrap_or(0);
        let f_col = cols
            .iter()
            .position(|c| *c == "F_Q" || *c == "F")
            .unwrap_or(1);
        if cols.len() <= t_col.max(f_col) {
            return Err(SpinError::Config(format!(
                "{input}: need t and F columns, header is '{header}'"
            )));
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            let parse = |idx: usize| -> Result<f64, SpinError> {
                fields
                    .get(idx)
                    .and_then(|s| s.parse::<f64>().ok())
                    .ok_or_else(|| {
                        SpinError::Config(format!("{input} line {}: bad number", i + 2))
                    })
            };
            let t = parse(t_col)?;
            let f = parse(f_col)?;
            let depth = qfi::depth_witness(f, n)?;
            rows.push(vec![t, f, depth as f64]);
        }
        Ok(rows)
    })();
    emit(&mut manifest, "depth.csv", &["t", "F_Q", "depth"], rows)?;
    manifest.finish()
}
