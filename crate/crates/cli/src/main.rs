//! `fraclab`: command-line front end.
//!
//! Exit status: 0 on success or PASS, 2 when a verification fails, 1 on error.

mod commands;
mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use config::{load_config, parse_domain, parse_pair, parse_point, BarrierKind, DataSpec, Format, RunConfig};

#[derive(Parser)]
#[command(name = "fraclab", version, about = "Nonlocal Dirichlet problems with Hölder exterior data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand; they override the config file.
#[derive(Args, Clone, Default)]
struct Common {
    /// JSON run config, or an earlier output file to rerun.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: FRACLAB_THREADS, else all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Order s of the kernel.
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    dim: Option<usize>,
    /// Kernel record as JSON.
    #[arg(long)]
    kernel: Option<String>,
    /// `ball`, `square`, `l-shape`, `halfplane` or a JSON domain record.
    #[arg(long)]
    domain: Option<String>,
    /// Exterior data, e.g. `holder_point_singularity(0.3, 1, 0)`.
    #[arg(long)]
    data: Option<String>,
    /// Relative tolerance of the quadratures.
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Walk-on-spheres paths per point.
    #[arg(long)]
    paths: Option<usize>,
    /// Evaluation point `x,y` (repeatable).
    #[arg(long = "point", allow_hyphen_values = true)]
    point: Vec<String>,
    /// CSV file with columns x,y.
    #[arg(long)]
    points: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the operator on a built-in field.
    ApplyOp {
        #[command(flatten)]
        common: Common,
        /// e.g. `plus_power(0.5)`, `halfspace(0.25, 1, 0)`, `extension`.
        #[arg(long)]
        field: Option<String>,
    },
    /// Check a barrier's supersolution inequality.
    VerifyBarrier {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        kind: Option<BarrierKind>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        normal: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        axis: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        /// Bracket the largest passing cone exponent within `lo,hi`.
        #[arg(long)]
        beta_range: Option<String>,
    },
    /// Walk-on-spheres solution at points.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Sphere fraction κ.
        #[arg(long)]
        kappa: Option<f64>,
    },
    /// Solution profile along the inward normal at a boundary point.
    Profile {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        z0: Option<String>,
        #[arg(long)]
        tmin: Option<f64>,
        #[arg(long)]
        tmax: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Hölder fit of a profile CSV (columns t,value[,stderr]).
    Fit {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: Option<PathBuf>,
        /// Fit window `lo,hi`.
        #[arg(long)]
        window: Option<String>,
    },
    /// Profiles and fits at boundary points, with a verdict.
    Experiment {
        #[command(flatten)]
        common: Common,
        /// Exponent of `|y - z0|^alpha` anchored on the boundary (when --data is absent).
        #[arg(long)]
        alpha: Option<f64>,
        /// Window `lo,hi` as fractions of the diameter.
        #[arg(long)]
        window: Option<String>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Half-plane solution with data min(|x|^s, 1) against t^s ln(1/t).
    Counterexample {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        tmin: Option<f64>,
        #[arg(long)]
        tmax: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Check kernel symmetry and ellipticity bounds.
    ValidateKernel {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long = "Lambda")]
        big_lambda: Option<f64>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::ApplyOp { .. } => "apply-op",
            Command::VerifyBarrier { .. } => "verify-barrier",
            Command::Solve { .. } => "solve",
            Command::Profile { .. } => "profile",
            Command::Fit { .. } => "fit",
            Command::Experiment { .. } => "experiment",
            Command::Counterexample { .. } => "counterexample",
            Command::ValidateKernel { .. } => "validate-kernel",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::ApplyOp { common, .. }
            | Command::VerifyBarrier { common, .. }
            | Command::Solve { common, .. }
            | Command::Profile { common, .. }
            | Command::Fit { common, .. }
            | Command::Experiment { common, .. }
            | Command::Counterexample { common, .. }
            | Command::ValidateKernel { common, .. } => common,
        }
    }
}

fn apply_common(cfg: &mut RunConfig, c: &Common) -> Result<()> {
    if let Some(k) = &c.kernel {
        cfg.kernel = serde_json::from_str(k).context("--kernel must be a kernel record in JSON")?;
    }
    if let Some(s) = c.s {
        cfg.kernel.s = s;
        if cfg.fit.s.is_some() {
            cfg.fit.s = Some(s);
        }
    }
    if let Some(d) = c.dim {
        cfg.kernel.dim = d;
    }
    if let Some(d) = &c.domain {
        cfg.domain = parse_domain(d)?;
    }
    if let Some(d) = &c.data {
        cfg.data = Some(DataSpec::Name(d.clone()));
    }
    if let Some(t) = c.rel_tol {
        cfg.quadrature.target_rel_tol = t;
    }
    if let Some(p) = c.paths {
        cfg.wos.paths = p;
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(f) = c.format {
        cfg.format = f;
    }
    if let Some(o) = &c.output {
        cfg.output = Some(o.display().to_string());
    }
    if let Some(path) = &c.points {
        cfg.points = commands::read_points(path)?;
    }
    if !c.point.is_empty() {
        cfg.points = c.point.iter().map(|p| parse_point(p)).collect::<Result<_>>()?;
    }
    Ok(())
}

fn resolve(cmd: &Command) -> Result<(RunConfig, Option<f64>)> {
    let common = cmd.common();
    let mut cfg = match &common.config {
        Some(p) => load_config(p)?,
        None => RunConfig::default(),
    };
    cfg.command = Some(cmd.name().to_string());
    apply_common(&mut cfg, common)?;
    let mut alpha_flag = None;
    match cmd {
        Command::ApplyOp { field, .. } => {
            if let Some(f) = field {
                cfg.field = f.clone();
            }
        }
        Command::VerifyBarrier {
            kind,
            alpha,
            beta,
            eta,
            normal,
            axis,
            n,
            beta_range,
            ..
        } => {
            let b = &mut cfg.barrier;
            if let Some(k) = kind {
                b.kind = *k;
            }
            if let Some(a) = alpha {
                b.alpha = *a;
            }
            if let Some(v) = beta {
                b.beta = *v;
            }
            if let Some(v) = eta {
                b.eta = *v;
            }
            if let Some(v) = normal {
                b.normal = parse_point(v)?;
            }
            if let Some(v) = axis {
                b.axis = parse_point(v)?;
            }
            if let Some(v) = n {
                b.n = *v;
            }
            if let Some(v) = beta_range {
                b.beta_range = Some(parse_pair(v)?);
            }
        }
        Command::Solve { kappa, .. } => {
            if let Some(k) = kappa {
                cfg.wos.sphere_fraction = *k;
            }
        }
        Command::Profile { z0, tmin, tmax, n, .. } => {
            if let Some(z) = z0 {
                cfg.profile.z0 = Some(parse_point(z)?);
            }
            let g = &mut cfg.profile.grid;
            g.tmin = tmin.unwrap_or(g.tmin);
            g.tmax = tmax.unwrap_or(g.tmax);
            g.n = n.unwrap_or(g.n);
        }
        Command::Fit { input, window, common } => {
            if let Some(i) = input {
                cfg.fit.input = Some(i.display().to_string());
            }
            if let Some(w) = window {
                cfg.fit.window = Some(parse_pair(w)?);
            }
            if let Some(s) = common.s {
                cfg.fit.s = Some(s);
            }
        }
        Command::Experiment {
            alpha, window, samples, ..
        } => {
            alpha_flag = *alpha;
            if let Some(w) = window {
                cfg.experiment.window = parse_pair(w)?;
            }
            if let Some(n) = samples {
                cfg.experiment.samples = *n;
            }
        }
        Command::Counterexample { tmin, tmax, n, .. } => {
            let g = &mut cfg.counterexample;
            g.tmin = tmin.unwrap_or(g.tmin);
            g.tmax = tmax.unwrap_or(g.tmax);
            g.n = n.unwrap_or(g.n);
        }
        Command::ValidateKernel {
            samples,
            lambda,
            big_lambda,
            ..
        } => {
            if let Some(n) = samples {
                cfg.samples = *n;
            }
            if let Some(l) = lambda {
                cfg.kernel.lambda = *l;
            }
            if let Some(l) = big_lambda {
                cfg.kernel.big_lambda = *l;
            }
        }
    }
    // the walk seed follows the run seed
    cfg.wos.seed = cfg.seed;
    Ok((cfg, alpha_flag))
}

fn init_threads(flag: Option<usize>) -> Result<()> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("FRACLAB_THREADS") {
            Ok(v) => Some(v.trim().parse().context("FRACLAB_THREADS must be a positive integer")?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        anyhow::ensure!(n > 0, "thread count must be positive");
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    let start = Instant::now();
    init_threads(cli.command.common().threads)?;
    let (cfg, alpha) = resolve(&cli.command)?;
    let outcome = match &cli.command {
        Command::ApplyOp { .. } => commands::apply_op(&cfg),
        Command::VerifyBarrier { .. } => commands::verify_barrier(&cfg),
        Command::Solve { .. } => commands::solve_points(&cfg),
        Command::Profile { .. } => commands::profile(&cfg),
        Command::Fit { .. } => commands::fit(&cfg),
        Command::Experiment { .. } => commands::experiment(&cfg, alpha),
        Command::Counterexample { .. } => commands::counterexample(&cfg),
        Command::ValidateKernel { .. } => commands::validate(&cfg),
    }?;
    let path = cfg.output.as_deref().map(Path::new);
    output::write_text(path, &outcome.text)?;
    if let Some(p) = path {
        if let Some((suffix, text)) = &outcome.companion {
            output::write_text(Some(&commands::companion_path(p, suffix)), text)?;
        }
        output::write_sidecar(p, &cfg, start.elapsed().as_secs_f64())?;
    }
    if let Some(s) = &outcome.summary {
        eprintln!("{s}");
    }
    Ok(outcome.pass)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
