//! `axifree` command-line driver. Every stage reads and writes plain files so runs
//! can be resumed from any intermediate artifact.

use axifree::catenoid::{mean_curvature, verify_suite, Catenoid, Convention, PlanarCurve};
use axifree::flow::relax;
use axifree::freeboundary::{blowup, extract, fit_asymptote, theorem_shape_checks, FitModel, Side};
use axifree::grid::{build_domain_with, read_binary, write_binary, AxiGrid, Field};
use axifree::mountainpass::{build_path, minimax, vertical_initial};
use axifree::pipeline::{parse_config, run_pipeline, RunConfig};
use axifree::potential::{delta_eps, e_eps, HeteroclinicProfile, Model, PotentialSpec};
use axifree::Error;
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

#[derive(Parser)]
#[command(name = "axifree", version, about = "Axisymmetric phase-field mountain passes and their free boundaries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Init {
    Omega,
    Vertical,
    File,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the heteroclinic profile.
    Profile {
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 3.0)]
        xmax: f64,
        #[arg(long, default_value_t = 301)]
        samples: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample a catenoid graph with its discrete mean curvature.
    Catenoid {
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, value_parser = parse_convention, default_value = "centered")]
        convention: Convention,
        #[arg(long)]
        rmax: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Relax an initial state to a steady state of the flow.
    Relax {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "omega")]
        init: Init,
        /// Field dump used with `--init file`.
        #[arg(long)]
        field: Option<PathBuf>,
        /// Write a snapshot every this many steps.
        #[arg(long)]
        snapshot_every: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the path between the two stable states and run the minimax.
    Mpass {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        u1: Option<PathBuf>,
        #[arg(long)]
        u2: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract a free boundary from a field dump and fit its asymptote.
    Fbfit {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "minus")]
        side: Side,
        #[arg(long, default_value = "log")]
        model: FitModel,
        /// Extraction level is `1 - theta`; defaults to eps/2.
        #[arg(long)]
        theta: Option<f64>,
        /// Fit window `lo,hi`; defaults to `0.3a,0.8a`.
        #[arg(long, value_delimiter = ',', num_args = 2)]
        window: Option<Vec<f64>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rescale a field dump around the tip of the negative phase.
    Blowup {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        scale: f64,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every stage from a config file.
    Pipeline {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the catenoid identity and area-comparison checks.
    Verify {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_convention(s: &str) -> Result<Convention, String> {
    match s {
        "centered" => Ok(Convention::Centered),
        "asymptotic" => Ok(Convention::Asymptotic),
        _ => Err(format!("expected centered or asymptotic, got {s}")),
    }
}

enum Failure {
    Config(String),
    Stage(Error),
    Acceptance(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(msg) => Failure::Config(msg),
            other => Failure::Stage(other),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn load_config(path: Option<&Path>) -> std::result::Result<RunConfig, Failure> {
    match path {
        Some(p) => parse_config(p).map_err(|e| match e {
            Error::Io(io) => Failure::Config(format!("{}: {io}", p.display())),
            other => other.into(),
        }),
        None => Ok(RunConfig::default()),
    }
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> axifree::Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn domain(cfg: &RunConfig) -> axifree::Result<Arc<AxiGrid>> {
    let model = Arc::new(Model::new(cfg.eps)?);
    build_domain_with(model, cfg.n, cfg.a, cfg.k, cfg.nr, cfg.nz)
}

fn cmd_profile(eps: f64, xmax: f64, samples: usize, out: &Path) -> Outcome {
    let spec = PotentialSpec::new(eps)?;
    let prof = HeteroclinicProfile::build(&spec, xmax, samples)?;
    #[derive(Serialize)]
    struct Header {
        eps: f64,
        t_eps: f64,
        e_eps: f64,
        delta_eps: f64,
    }
    let header = Header { eps, t_eps: prof.t_eps, e_eps: e_eps(&spec), delta_eps: delta_eps(&prof)? };
    let mut w = std::io::BufWriter::new(std::fs::File::create(out).map_err(Error::from)?);
    let mut body = format!("# {}\nx,H,Hp\n", serde_json::to_string(&header).map_err(Error::from)?);
    for s in &prof.samples {
        body.push_str(&format!("{:.12e},{:.17e},{:.17e}\n", s.x, s.h, s.hp));
    }
    w.write_all(body.as_bytes()).map_err(Error::from)?;
    println!("{}", serde_json::to_string(&header).map_err(Error::from)?);
    Ok(())
}

fn cmd_catenoid(dim: usize, scale: f64, convention: Convention, rmax: f64, samples: usize, out: &Path) -> Outcome {
    let c = Catenoid::new(dim, scale, convention)?;
    let neck = c.neck();
    if !(rmax > neck) || samples < 5 {
        return Err(Error::Input(format!("need rmax > neck = {neck} and at least 5 samples")).into());
    }
    let r: Vec<f64> = (0..samples).map(|i| neck + (rmax - neck) * i as f64 / (samples - 1) as f64).collect();
    let z = r.iter().map(|&x| c.eval(x)).collect::<axifree::Result<Vec<_>>>()?;
    let curve = PlanarCurve::new(r, z)?;
    let h = mean_curvature(&curve, dim)?;
    let mut body = String::from("r,z,H\n");
    for (i, (r, z)) in curve.r.iter().zip(&curve.z).enumerate() {
        let hv = if i == 0 || i + 1 == samples { f64::NAN } else { h[i - 1] };
        body.push_str(&format!("{r:.12e},{z:.17e},{hv:.6e}\n"));
    }
    std::fs::write(out, body).map_err(Error::from)?;
    Ok(())
}

#[derive(Serialize)]
struct RelaxOutput {
    steps: usize,
    energies: Vec<f64>,
    residuals: Vec<f64>,
    steady: bool,
}

fn cmd_relax(cfg: &RunConfig, init: Init, field: Option<&Path>, every: Option<usize>, out: &Path) -> Outcome {
    std::fs::create_dir_all(out).map_err(Error::from)?;
    let flow = cfg.flow();
    let mut u = match init {
        Init::File => {
            let path = field.ok_or_else(|| Failure::Config("--init file needs --field".into()))?;
            read_binary(path, None)?
        }
        Init::Omega => Field::omega_extension(&domain(cfg)?),
        Init::Vertical => {
            let (u1, _) = relax(&Field::omega_extension(&domain(cfg)?), &flow)?;
            vertical_initial(&u1, &cfg.path())?
        }
    };
    let chunk = every.unwrap_or(flow.max_steps).max(1);
    let mut report = RelaxOutput { steps: 0, energies: vec![], residuals: vec![], steady: false };
    while report.steps < flow.max_steps {
        let budget = chunk.min(flow.max_steps - report.steps);
        let cfg_chunk = axifree::flow::FlowConfig { max_steps: budget, ..flow.clone() };
        let (v, rep) = relax(&u, &cfg_chunk)?;
        let skip = usize::from(!report.energies.is_empty());
        report.energies.extend(rep.energies.iter().skip(skip));
        report.residuals.extend(rep.residuals.iter().skip(skip));
        report.steps += rep.steps;
        report.steady = rep.steady();
        u = v;
        if every.is_some() {
            write_binary(&u, &out.join(format!("snapshot_{:08}.bin", report.steps)))?;
        }
        if report.steady || rep.steps == 0 {
            break;
        }
    }
    write_binary(&u, &out.join("final.bin"))?;
    write_json(&report, &out.join("report.json"))?;
    println!("steps {} energy {:.10} steady {}", report.steps, u.energy(), report.steady);
    Ok(())
}

fn cmd_mpass(cfg: &RunConfig, u1: Option<&Path>, u2: Option<&Path>, out: &Path) -> Outcome {
    std::fs::create_dir_all(out).map_err(Error::from)?;
    let flow = cfg.flow();
    let u1 = match u1 {
        Some(p) => read_binary(p, None)?,
        None => relax(&Field::omega_extension(&domain(cfg)?), &flow).map_err(|e| e.at("relax_u1"))?.0,
    };
    let u2 = match u2 {
        Some(p) => read_binary(p, Some(u1.grid().model().clone()))?,
        None => relax(&vertical_initial(&u1, &cfg.path())?, &flow).map_err(|e| e.at("relax_u2"))?.0,
    };
    let path = build_path(&u1, &u2, &cfg.path()).map_err(|e| e.at("path"))?;
    let res = minimax(&path, &flow, &cfg.minimax()).map_err(|e| e.at("minimax"))?;
    write_binary(&u1, &out.join("u1.bin"))?;
    write_binary(&u2, &out.join("u2.bin"))?;
    write_binary(&res.pass_state, &out.join("pass_state.bin"))?;
    for rec in &res.rounds {
        write_json(rec, &out.join(format!("round_{:02}.json", rec.round)))?;
    }
    println!("c* {:.10} at s = {:.6} after {} rounds", res.c_star, res.argmax_s, res.rounds.len());
    Ok(())
}

fn cmd_fbfit(input: &Path, side: Side, model: FitModel, theta: Option<f64>, window: Option<Vec<f64>>, out: &Path) -> Outcome {
    let u = read_binary(input, None)?;
    let g = u.grid();
    let theta = theta.unwrap_or(0.5 * g.eps);
    let window = window.map(|w| (w[0], w[1])).unwrap_or((0.3 * g.a, 0.8 * g.a));
    let curve = extract(&u, side, theta)?;
    let fit = fit_asymptote(&curve, g.dim, model, window)?;
    write_json(&fit, out)?;
    curve.write_csv(&out.with_extension("csv"))?;
    println!("{}", serde_json::to_string(&fit.params).map_err(Error::from)?);
    Ok(())
}

fn cmd_blowup(input: &Path, scale: f64, theta: Option<f64>, out: &Path) -> Outcome {
    std::fs::create_dir_all(out).map_err(Error::from)?;
    let u = read_binary(input, None)?;
    let theta = theta.unwrap_or(0.5 * u.grid().eps);
    let res = blowup(&u, theta, scale)?;
    let shape = theorem_shape_checks(&res, u.grid().dim);
    res.psi.write_csv(&out.join("psi.csv"))?;
    #[derive(Serialize)]
    struct Stats<'a> {
        blowup: &'a axifree::freeboundary::BlowupResult,
        shape: &'a axifree::freeboundary::ShapeReport,
    }
    write_json(&Stats { blowup: &res, shape: &shape }, &out.join("stats.json"))?;
    println!(
        "rho {:.4} boundary |grad| mean {:.4} min {:.4} max {:.4}",
        res.rho_k, res.gradient_mean, res.gradient_min, res.gradient_max
    );
    Ok(())
}

fn cmd_pipeline(cfg: RunConfig, out: Option<PathBuf>) -> Outcome {
    let mut cfg = cfg;
    if let Some(dir) = out {
        cfg.output_dir = dir;
    }
    let report = run_pipeline(&cfg)?;
    for c in &report.checks {
        println!("{} {} = {:.6} ({})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.bound);
    }
    println!("wall clock {:.1} s, report in {}", report.wall_clock, cfg.output_dir.join("report.json").display());
    Ok(())
}

fn cmd_verify(out: Option<&Path>) -> Outcome {
    let checks = verify_suite()?;
    for c in &checks {
        println!("{} {}: {:.6e} {} {:.6e}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.relation, c.bound);
    }
    if let Some(p) = out {
        write_json(&checks, p)?;
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    if failed > 0 {
        return Err(Failure::Acceptance(format!("{failed} of {} checks failed", checks.len())));
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Outcome {
    match cli.command {
        Command::Profile { eps, xmax, samples, out } => cmd_profile(eps, xmax, samples, &out),
        Command::Catenoid { dim, scale, convention, rmax, samples, out } => {
            cmd_catenoid(dim, scale, convention, rmax, samples, &out)
        }
        Command::Relax { config, init, field, snapshot_every, out } => {
            let cfg = load_config(config.as_deref())?;
            cmd_relax(&cfg, init, field.as_deref(), snapshot_every, &out)
        }
        Command::Mpass { config, u1, u2, out } => {
            let cfg = load_config(config.as_deref())?;
            cmd_mpass(&cfg, u1.as_deref(), u2.as_deref(), &out)
        }
        Command::Fbfit { input, side, model, theta, window, out } => cmd_fbfit(&input, side, model, theta, window, &out),
        Command::Blowup { input, scale, theta, out } => cmd_blowup(&input, scale, theta, &out),
        Command::Pipeline { config, out } => cmd_pipeline(load_config(config.as_deref())?, out),
        Command::Verify { out } => cmd_verify(out.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Stage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
        Err(Failure::Acceptance(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(4)
        }
    }
}
