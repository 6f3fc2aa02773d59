use clap::{Args, Parser, Subcommand};
use spinchaos::config::RunConfig;
use spinchaos::params::SpinError;
use spinchaos::runs::{self, ConstKind};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "spinchaos",
    version,
    about = "Driven collective-spin simulation tiers: QFI series, chaos maps, break-time scans, adiabatic sweeps"
)]
struct Cli {
    /// key=value config file; flags override file values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV artifacts
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (also SPINCHAOS_THREADS)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Default)]
struct SeriesArgs {
    #[arg(long = "N")]
    n: Option<usize>,
    /// Drive strength; accepts forms like 0.4pi
    #[arg(long = "A", value_parser = parse_scaled)]
    a: Option<f64>,
    #[arg(long, value_parser = parse_scaled)]
    c: Option<f64>,
    #[arg(long, value_parser = parse_scaled)]
    t_max: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    periods: Option<usize>,
}

#[derive(Args, Default)]
struct LyapArgs {
    #[arg(long, value_parser = parse_scaled)]
    a_min: Option<f64>,
    #[arg(long, value_parser = parse_scaled)]
    a_max: Option<f64>,
    #[arg(long)]
    na: Option<usize>,
    #[arg(long, value_parser = parse_scaled)]
    c_min: Option<f64>,
    #[arg(long, value_parser = parse_scaled)]
    c_max: Option<f64>,
    #[arg(long)]
    nc: Option<usize>,
    /// Benettin periods
    #[arg(long)]
    m: Option<usize>,
    /// Initial separation
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Args, Default)]
struct PoincareArgs {
    #[arg(long = "A", value_parser = parse_scaled)]
    a: Option<f64>,
    #[arg(long, value_parser = parse_scaled)]
    c: Option<f64>,
    #[arg(long)]
    periods: Option<usize>,
    #[arg(long)]
    n_phi: Option<usize>,
    #[arg(long)]
    n_z: Option<usize>,
}

#[derive(Args, Default)]
struct ScanArgs {
    /// stable, saddle or chaotic
    #[arg(long)]
    regime: Option<String>,
    /// bmf or hp
    #[arg(long)]
    tier: Option<String>,
    /// Comma-separated particle numbers
    #[arg(long = "N", value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    #[arg(long)]
    g: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, value_parser = parse_scaled)]
    t_max: Option<f64>,
    #[arg(long = "A", value_parser = parse_scaled)]
    a: Option<f64>,
    #[arg(long, value_parser = parse_scaled)]
    c: Option<f64>,
}

#[derive(Args, Default)]
struct QptArgs {
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long, value_parser = parse_scaled)]
    c: Option<f64>,
    /// Ramp rate, a(t) = v t
    #[arg(long)]
    v: Option<f64>,
    #[arg(long, value_parser = parse_scaled)]
    a_max: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// exact, bmf or both
    #[arg(long)]
    tier: Option<String>,
}

#[derive(Args, Default)]
struct DepthArgs {
    /// QFI series CSV with t and F_Q columns
    #[arg(long)]
    input: Option<String>,
    #[arg(long = "N")]
    n: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// One-axis-twisting QFI series (exact, BMF, HP)
    Oat(SeriesArgs),
    /// Twist-and-turn QFI series under constant drive
    Tat(SeriesArgs),
    /// Kicked-drive QFI series
    Qkr(SeriesArgs),
    /// Largest Lyapunov exponent over an (A, c) grid
    LyapMap(LyapArgs),
    /// Stroboscopic Poincare section
    Poincare(PoincareArgs),
    /// Break time of an approximate tier vs N, with scaling fits
    BreaktimeScan(ScanArgs),
    /// Adiabatic sweep across the two-mode transition
    Qpt(QptArgs),
    /// Entanglement-depth table from a QFI series CSV
    Depth(DepthArgs),
}

fn parse_scaled(s: &str) -> Result<f64, String> {
    let t = s.trim();
    if let Some(head) = t.strip_suffix("pi") {
        let head = head.trim();
        let scale = if head.is_empty() {
            1.0
        } else {
            head.parse::<f64>().map_err(|e| e.to_string())?
        };
        return Ok(scale * std::f64::consts::PI);
    }
    t.parse::<f64>().map_err(|e| e.to_string())
}

fn run(cli: &Cli) -> Result<(), SpinError> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::empty(),
    };
    let section = match &cli.cmd {
        Cmd::Oat(_) => "oat",
        Cmd::Tat(_) => "tat",
        Cmd::Qkr(_) => "qkr",
        Cmd::LyapMap(_) => "lyap-map",
        Cmd::Poincare(_) => "poincare",
        Cmd::BreaktimeScan(_) => "breaktime-scan",
        Cmd::Qpt(_) => "qpt",
        Cmd::Depth(_) => "depth",
    };
    let threads = cli
        .threads
        .or_else(|| {
            std::env::var("SPINCHAOS_THREADS")
                .ok()
                .and_then(|s| s.parse().ok())
        })
        .or(cfg.usize_opt(section, "threads")?);
    if let Some(k) = threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.str_opt(section, "out").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out)?;

    match &cli.cmd {
        Cmd::Oat(a) => runs::run_const_series(
            ConstKind::Oat,
            &runs::SeriesOverrides {
                n: a.n,
                a: a.a,
                c: a.c,
                t_max: a.t_max,
                dt: a.dt,
                periods: a.periods,
            },
            &cfg,
            &out,
        ),
        Cmd::Tat(a) => runs::run_const_series(
            ConstKind::Tat,
            &runs::SeriesOverrides {
                n: a.n,
                a: a.a,
                c: a.c,
                t_max: a.t_max,
                dt: a.dt,
                periods: a.periods,
            },
            &cfg,
            &out,
        ),
        Cmd::Qkr(a) => runs::run_qkr(
            &runs::SeriesOverrides {
                n: a.n,
                a: a.a,
                c: a.c,
                t_max: a.t_max,
                dt: a.dt,
                periods: a.periods,
            },
            &cfg,
            &out,
        ),
        Cmd::LyapMap(a) => runs::run_lyap_map(
            &runs::LyapMapOverrides {
                a_min: a.a_min,
                a_max: a.a_max,
                na: a.na,
                c_min: a.c_min,
                c_max: a.c_max,
                nc: a.nc,
                m: a.m,
                delta: a.delta,
            },
            &cfg,
            &out,
        ),
        Cmd::Poincare(a) => runs::run_poincare(
            &runs::PoincareOverrides {
                a: a.a,
                c: a.c,
                periods: a.periods,
                n_phi: a.n_phi,
                n_z: a.n_z,
            },
            &cfg,
            &out,
        ),
        Cmd::BreaktimeScan(a) => runs::run_breaktime(
            &runs::BreaktimeOverrides {
                regime: a.regime.clone(),
                tier: a.tier.clone(),
                n_list: a.n_list.clone(),
                g: a.g,
                dt: a.dt,
                t_max: a.t_max,
                a: a.a,
                c: a.c,
            },
            &cfg,
            &out,
        ),
        Cmd::Qpt(a) => runs::run_qpt(
            &runs::QptOverrides {
                n: a.n,
                c: a.c,
                v: a.v,
                a_max: a.a_max,
                dt: a.dt,
                tier: a.tier.clone(),
            },
            &cfg,
            &out,
        ),
        Cmd::Depth(a) => runs::run_depth(
            &runs::DepthOverrides {
                input: a.input.clone(),
                n: a.n,
            },
            &cfg,
            &out,
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(runs::exit_code(&e) as u8)
        }
    }
}
