//! `wire-tdgl`: command-line driver for the wire TDGL pipelines.
//!
//! Every subcommand resolves a [`RunConfig`] from defaults, an optional
//! `--config` file, `--set key=value` pairs and the dedicated flags (applied
//! in that order), writes its outputs under `out_dir` together with a
//! manifest, and prints its main result to stdout.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use wire_tdgl::amplitude::{self, System};
use wire_tdgl::bifurcation::{self, BifCoeffs};
use wire_tdgl::collision;
use wire_tdgl::config::RunConfig;
use wire_tdgl::parallel::{self, Execution};
use wire_tdgl::psc;
use wire_tdgl::spectral::{self, SpectrumScan};
use wire_tdgl::tdgl::{self, SimConfig};
use wire_tdgl::{Complex64, Error, Grid, Result};

#[derive(Parser)]
#[command(name = "wire-tdgl", version, about = "Spectral, bifurcation and PDE tools for a current-carrying superconducting wire")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a configuration key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    n: Option<String>,
    #[arg(long, global = true)]
    bc: Option<String>,
    /// Applied current.
    #[arg(long = "I", global = true, allow_hyphen_values = true)]
    current: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    k: Option<String>,
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], global = true, allow_hyphen_values = true)]
    bracket: Option<Vec<String>>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    eps: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    gamma_offset: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    dt: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    t_end: Option<String>,
    #[arg(long, global = true)]
    init: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    init_amp: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    seed: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    stride: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    transient: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    i_min: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    i_max: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    i_count: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    threshold: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    workers: Option<String>,
    #[arg(long, global = true)]
    out_dir: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Leading `k` eigenvalues at one current.
    Spectrum,
    /// Eigenvalue tracks over `i_min..=i_max`, with detected collisions.
    SpectrumScan {
        /// Also write the large-current asymptotic of the leading eigenvalue.
        #[arg(long)]
        asymptotic: bool,
    },
    /// Collision current of the `ell`-th pair inside the bracket.
    Collide {
        #[arg(long, default_value_t = 1)]
        ell: usize,
        /// Compute the local expansion at the collision (first pair only).
        #[arg(long)]
        expand: bool,
        /// Direction of the current offset, `I = I_c + eps a`.
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        a: f64,
    },
    /// Bifurcation coefficients over `i_min..=i_max`.
    ChiScan {
        /// Bracket for the sign change of Re χ11.
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], default_values_t = [10.0, 12.0])]
        ik_bracket: Vec<f64>,
    },
    /// Predicted bifurcating branch at `I`, `Γ = Re λ1 + eps`.
    Branch,
    /// Integrate one of the reduced amplitude systems.
    Reduce {
        #[arg(long, value_enum, default_value_t = SystemKind::Rg)]
        system: SystemKind,
        /// Initial state, comma separated (defaults to `init_amp` in every component).
        #[arg(long, allow_hyphen_values = true)]
        y0: Option<String>,
        /// Also classify the equilibria of the (A, γ) system.
        #[arg(long)]
        equilibria: bool,
        /// Also compute the return-map multipliers of the periodic orbit.
        #[arg(long)]
        return_eigs: bool,
    },
    /// Evolve the PDE from the configured initial data.
    Simulate,
    /// Detect phase slip centers in a simulated or saved run.
    Psc {
        /// Existing run directory written by `simulate`.
        #[arg(long)]
        from: Option<PathBuf>,
    },
    /// Γ1(I) with the bifurcation type along it.
    PhaseDiagram,
}

#[derive(Clone, Copy, ValueEnum)]
enum SystemKind {
    Scalar,
    Alpha,
    Omega,
    Beta,
    Rg,
    Polar,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::SpectrumScan { .. } => "spectrum-scan",
            Command::Collide { .. } => "collide",
            Command::ChiScan { .. } => "chi-scan",
            Command::Branch => "branch",
            Command::Reduce { .. } => "reduce",
            Command::Simulate => "simulate",
            Command::Psc { .. } => "psc",
            Command::PhaseDiagram => "phase-diagram",
        }
    }
}

fn resolve(common: &Common) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &common.config {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        cfg.merge_text(&text)?;
    }
    for kv in &common.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got '{kv}'")))?;
        cfg.set(k.trim(), v)?;
    }
    let flags = [
        ("n", &common.n),
        ("bc", &common.bc),
        ("I", &common.current),
        ("k", &common.k),
        ("eps", &common.eps),
        ("gamma_offset", &common.gamma_offset),
        ("dt", &common.dt),
        ("t_end", &common.t_end),
        ("init", &common.init),
        ("init_amp", &common.init_amp),
        ("seed", &common.seed),
        ("stride", &common.stride),
        ("transient", &common.transient),
        ("i_min", &common.i_min),
        ("i_max", &common.i_max),
        ("i_count", &common.i_count),
        ("threshold", &common.threshold),
        ("workers", &common.workers),
        ("out_dir", &common.out_dir),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    if let Some(b) = &common.bracket {
        cfg.set("bracket_lo", &b[0])?;
        cfg.set("bracket_hi", &b[1])?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Collects output files and writes `<command>.manifest.json` at the end.
struct Output {
    dir: PathBuf,
    command: &'static str,
    files: Vec<String>,
}

impl Output {
    fn new(dir: &Path, command: &'static str) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), command, files: Vec::new() })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        fs::write(self.dir.join(name), bytes)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn json(&mut self, name: &str, v: &Value) -> Result<String> {
        let text = serde_json::to_string_pretty(v)? + "\n";
        self.write(name, text.as_bytes())?;
        Ok(text)
    }

    fn finish(self, cfg: &RunConfig, extra: Value) -> Result<u8> {
        let config: serde_json::Map<String, Value> =
            cfg.pairs().into_iter().map(|(k, v)| (k.to_string(), Value::String(v))).collect();
        let manifest = json!({
            "version": wire_tdgl::VERSION,
            "command": self.command,
            "config": config,
            "outputs": self.files,
            "results": extra,
        });
        let text = serde_json::to_string_pretty(&manifest)? + "\n";
        fs::write(self.dir.join(format!("{}.manifest.json", self.command)), text)?;
        Ok(0)
    }
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn print(bytes: &[u8]) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(bytes)?;
    out.flush()?;
    Ok(())
}

fn cplx(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn label(v: &impl serde::Serialize) -> String {
    serde_json::to_value(v).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

fn run(cli: &Cli) -> Result<u8> {
    let cfg = resolve(&cli.common)?;
    let exec = Execution::from_workers(cfg.workers);
    let grid = Grid::chebyshev(cfg.n, cfg.bc)?;
    let mut out = Output::new(&cfg.out_dir, cli.command.name())?;
    parallel::with_workers(cfg.workers, || dispatch(&cli.command, &cfg, &grid, exec, &mut out))
}

fn dispatch(cmd: &Command, cfg: &RunConfig, grid: &Arc<Grid>, exec: Execution, out: &mut Output) -> Result<u8> {
    match cmd {
        Command::Spectrum => {
            let pairs = spectral::eigenpairs(grid, cfg.current, cfg.k)?;
            let scan = SpectrumScan {
                currents: vec![cfg.current],
                tracks: pairs.iter().map(|p| vec![p.lambda]).collect(),
                residuals: pairs.iter().map(|p| vec![p.residual]).collect(),
                collisions: Vec::new(),
            };
            let bytes = csv_bytes(|b| scan.write_csv(b))?;
            out.write("spectrum.csv", &bytes)?;
            print(&bytes)?;
            let extra = json!({ "count": pairs.len() });
            take(out).finish(cfg, extra)
        }
        Command::SpectrumScan { asymptotic } => {
            let scan = spectral::spectrum_scan(grid, &cfg.currents(), cfg.k, 0.5, exec)?;
            let bytes = csv_bytes(|b| scan.write_csv(b))?;
            out.write("spectrum_scan.csv", &bytes)?;
            print(&bytes)?;
            if *asymptotic {
                let bytes = csv_bytes(|b| {
                    writeln!(b, "I,re_lambda1,im_lambda1,re_asymptotic,im_asymptotic")?;
                    for (i, &c) in scan.currents.iter().enumerate() {
                        if c <= 0.0 {
                            continue;
                        }
                        let l = scan.tracks[0][i];
                        let a = spectral::large_i_asymptotic(c);
                        writeln!(b, "{c:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", l.re, l.im.abs(), a.re, a.im)?;
                    }
                    Ok(())
                })?;
                out.write("asymptotic.csv", &bytes)?;
            }
            let collisions: Vec<Value> = scan.collisions.iter().map(|(l, i)| json!({ "ell": l, "I": i })).collect();
            take(out).finish(cfg, json!({ "collisions": collisions }))
        }
        Command::Collide { ell, expand, a } => {
            let i_c = spectral::find_collision(grid, *ell, cfg.bracket_lo, cfg.bracket_hi)?;
            let mut result = json!({ "ell": ell, "I_c": i_c });
            if *expand {
                if *ell != 1 {
                    return Err(Error::InvalidArgument("--expand is available for ell = 1 only".into()));
                }
                let exp = collision::expansion_coefficients(grid, i_c)?;
                result["expansion"] = serde_json::to_value(exp.report())?;
                let mut rows = Vec::new();
                for j in 1..=20 {
                    let eps = 0.005 * j as f64;
                    let current = i_c + eps * a;
                    if current < 0.0 {
                        continue;
                    }
                    let (p, m) = collision::lambda_split(&exp, *a, eps)?;
                    let ev = spectral::eigenvalues(grid, current, 2)?;
                    rows.push((eps, current, p, m, ev[0], ev[1]));
                }
                let bytes = csv_bytes(|b| {
                    writeln!(b, "eps,I,re_pred_plus,im_pred_plus,re_pred_minus,im_pred_minus,re_lambda1,im_lambda1,re_lambda2,im_lambda2")?;
                    for (eps, c, p, m, l1, l2) in &rows {
                        writeln!(
                            b,
                            "{eps:.16e},{c:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                            p.re, p.im, m.re, m.im, l1.re, l1.im, l2.re, l2.im
                        )?;
                    }
                    Ok(())
                })?;
                out.write("collision_split.csv", &bytes)?;
            }
            let text = out.json("collision.json", &result)?;
            print(text.as_bytes())?;
            take(out).finish(cfg, result)
        }
        Command::ChiScan { ik_bracket } => {
            let currents = cfg.currents();
            let mut rows: Vec<BifCoeffs> = Vec::new();
            for (c, r) in currents.iter().zip(bifurcation::chi_scan(grid, &currents, exec)) {
                match r {
                    Ok(row) => rows.push(row),
                    Err(e) => log::warn!("skipping I = {c}: {e}"),
                }
            }
            if rows.is_empty() {
                return Err(Error::NumericalFailure("no current in the scan produced coefficients".into()));
            }
            let bytes = csv_bytes(|b| bifurcation::write_chi_csv(&rows, b))?;
            out.write("chi_scan.csv", &bytes)?;
            print(&bytes)?;
            let i_k = match bifurcation::find_ik(grid, ik_bracket[0], ik_bracket[1]) {
                Ok(v) => Some(v),
                Err(e) => {
                    log::warn!("I_k not located: {e}");
                    None
                }
            };
            let result = json!({ "I_k": i_k, "rows": rows.len() });
            out.json("chi_scan.json", &result)?;
            take(out).finish(cfg, result)
        }
        Command::Branch => {
            let coeffs = bifurcation::chi_coefficients(grid, cfg.current)?;
            let mut result = json!({
                "I": cfg.current,
                "eps": cfg.eps,
                "gamma": coeffs.lambda1.re + cfg.eps,
                "regime": label(&bifurcation::classify(&coeffs)),
                "coefficients": coeffs,
            });
            match bifurcation::predict_branch(&coeffs, cfg.eps) {
                Ok(p) => result["prediction"] = branch_json(&p),
                Err(e) => result["prediction_error"] = json!(e.to_string()),
            }
            if coeffs.is_periodic() {
                if let Ok(p) = bifurcation::unstable_periodic_prediction(&coeffs, cfg.eps) {
                    result["unstable_periodic"] = branch_json(&p);
                }
                if let Ok(peak) = bifurcation::periodic_peak_amplitude(grid, cfg.current, cfg.eps) {
                    result["peak_amplitude"] = json!(peak);
                }
            }
            let text = out.json("branch.json", &result)?;
            print(text.as_bytes())?;
            take(out).finish(cfg, result)
        }
        Command::Reduce { system, y0, equilibria, return_eigs } => {
            let coeffs = bifurcation::chi_coefficients(grid, cfg.current)?;
            let sys = match system {
                SystemKind::Scalar => System::Scalar { chi11: coeffs.chi11.re },
                SystemKind::Alpha => System::alpha(&coeffs),
                SystemKind::Omega => System::omega(&coeffs, cfg.eps),
                SystemKind::Beta => System::beta(&coeffs, cfg.eps),
                SystemKind::Rg => System::rg(&coeffs, cfg.eps),
                SystemKind::Polar => System::polar(&coeffs, cfg.eps),
            };
            let y0: Vec<f64> = match y0 {
                Some(s) => s
                    .split(',')
                    .map(|v| v.trim().parse().map_err(|_| Error::Config(format!("bad --y0 entry '{v}'"))))
                    .collect::<Result<_>>()?,
                None => vec![cfg.init_amp; sys.dim()],
            };
            if y0.len() != sys.dim() {
                return Err(Error::Config(format!("{} needs {} initial values, got {}", sys.name(), sys.dim(), y0.len())));
            }
            let traj = amplitude::integrate(&sys, &y0, cfg.t_end, cfg.dt, cfg.stride)?;
            let bytes = csv_bytes(|b| traj.write_csv(b))?;
            out.write("reduce.csv", &bytes)?;
            print(&bytes)?;
            let mut result = json!({
                "system": sys.name(),
                "blown_up": traj.blown_up,
                "halving_error": traj.halving_error,
                "final": traj.last(),
            });
            if *equilibria {
                result["equilibria"] = serde_json::to_value(amplitude::equilibria(cfg.eps, &coeffs)?)?;
            }
            if *return_eigs {
                let r = amplitude::poincare_return_eigs(cfg.eps, &coeffs)?;
                result["return_map"] = json!({
                    "period": r.period,
                    "mu": r.mu,
                    "a": r.a,
                    "b": r.b,
                    "analytic": r.analytic.iter().map(|z| cplx(*z)).collect::<Vec<_>>(),
                    "numeric": r.numeric.iter().map(|z| cplx(*z)).collect::<Vec<_>>(),
                    "max_deviation": r.max_deviation(),
                });
            }
            out.json("reduce.json", &result)?;
            take(out).finish(cfg, result)
        }
        Command::Simulate => {
            let result = tdgl::simulate(&SimConfig::from_run(cfg))?;
            tdgl::write_run(&cfg.out_dir, &result, cfg)?;
            print((serde_json::to_string_pretty(&result.summary)? + "\n").as_bytes())?;
            Ok(match &result.summary.aborted {
                Some(reason) => {
                    eprintln!("error: run aborted: {reason}");
                    3
                }
                None => 0,
            })
        }
        Command::Psc { from } => {
            let traj = match from {
                Some(dir) => tdgl::read_run(dir)?.1,
                None => {
                    let result = tdgl::simulate(&SimConfig::from_run(cfg))?;
                    if let Some(reason) = &result.summary.aborted {
                        return Err(Error::NumericalFailure(format!("run aborted: {reason}")));
                    }
                    result.trajectory
                }
            };
            let events = psc::detect_pscs(&traj, cfg.threshold)?;
            let bytes = csv_bytes(|b| psc::write_events_csv(&events, b))?;
            out.write("psc.csv", &bytes)?;
            print(&bytes)?;
            take(out).finish(cfg, json!({ "events": events.len() }))
        }
        Command::PhaseDiagram => {
            let currents = cfg.currents();
            let rows = parallel::map(&currents, exec, |&c| bifurcation::chi_coefficients(grid, c));
            let bytes = csv_bytes(|b| {
                writeln!(b, "I,gamma1,im_lambda1,regime")?;
                for (c, r) in currents.iter().zip(&rows) {
                    match r {
                        Ok(co) => writeln!(
                            b,
                            "{c:.16e},{:.16e},{:.16e},{}",
                            co.lambda1.re,
                            co.lambda1.im.abs(),
                            label(&bifurcation::classify(co))
                        )?,
                        Err(e) => log::warn!("skipping I = {c}: {e}"),
                    }
                }
                Ok(())
            })?;
            out.write("phase_diagram.csv", &bytes)?;
            print(&bytes)?;
            let i_k = bifurcation::find_ik(grid, 10.0, 12.0).ok();
            let i_c = spectral::find_collision(grid, 1, cfg.bracket_lo, cfg.bracket_hi).ok();
            let result = json!({ "I_k": i_k, "I_c": i_c });
            out.json("phase_diagram.json", &result)?;
            take(out).finish(cfg, result)
        }
    }
}

fn take(out: &mut Output) -> Output {
    std::mem::replace(out, Output { dir: out.dir.clone(), command: out.command, files: Vec::new() })
}

fn branch_json(p: &bifurcation::BranchPrediction) -> Value {
    json!({
        "regime": label(&p.regime),
        "stability": label(&p.stability),
        "amplitude": p.amplitude,
        "frequency": p.frequency,
        "period": if p.period.is_finite() { json!(p.period) } else { Value::Null },
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 2 } else { 3 })
        }
    }
}
