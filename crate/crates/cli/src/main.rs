use std::path::PathBuf;
use std::process::ExitCode;

use aniso_hardy::atoms::{atomic_decompose, validate_atom};
use aniso_hardy::field::load_field;
use aniso_hardy::frames::{FramePair, ProductFrame};
use aniso_hardy::{EllipsoidGauge, GridSpec};
use aniso_hardy_cli::report::{num, read_summary};
use aniso_hardy_cli::suites::decompose::{setup, Bump};
use aniso_hardy_cli::{configure_threads, CliError, ExperimentConfig, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

#[derive(Parser)]
#[command(name = "aniso-hardy", version, about = "Weighted anisotropic product Hardy-space verification suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON experiment config; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Prints the resolved config and the dilation constants.
    Info(Common),
    /// Builds the factor frames on the configured grid and prints their certificates.
    BuildFrames(Common),
    /// Decomposes a field (or a seeded bump) into atoms and prints a summary.
    Decompose {
        #[command(flatten)]
        common: Common,
        /// Field file in the aniso-hardy binary format.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Runs the configured suites and writes the report bundle.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Overrides the config output directory.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Runs only these suites (repeatable).
        #[arg(long = "suite")]
        suites: Vec<String>,
    },
    /// Prints the pass/fail summary of a written bundle.
    Report {
        #[command(flatten)]
        common: Common,
        /// Report directory; defaults to the config output directory.
        #[arg(long)]
        dir: Option<PathBuf>,
    },
}

fn load(c: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).unwrap_or_default());
}

fn info(cfg: &ExperimentConfig) -> Result<()> {
    let mut dils = Vec::new();
    for d in cfg.dilations.iter().chain(&cfg.geometry_dilations) {
        let g = EllipsoidGauge::build(&d.build()?)?;
        let a = g.dilation();
        dils.push(json!({
            "matrix": d.matrix,
            "b": num(g.b()),
            "sigma": g.sigma(),
            "r": num(g.radius()),
            "lambda_minus": num(a.lambda_minus()),
            "lambda_plus": num(a.lambda_plus()),
            "zeta_minus": num(a.zeta_minus()),
            "zeta_plus": num(a.zeta_plus()),
        }));
    }
    print(&json!({ "config": cfg, "dilations": dils }));
    Ok(())
}

fn build_frames(cfg: &ExperimentConfig) -> Result<()> {
    let spec = GridSpec::product_1d(cfg.grid.half_widths[0], cfg.grid.samples[0], cfg.grid.half_widths[1], cfg.grid.samples[1])?;
    let profile = cfg.frame.profile.build()?;
    let levels = cfg.frame.levels.map(|l| (l[0], l[1]));
    let mut pairs = Vec::new();
    for (i, d) in cfg.dilations.iter().enumerate() {
        let g = EllipsoidGauge::build(&d.build()?)?;
        pairs.push(FramePair::build(&g, &spec.factor_spec(i), cfg.frame.s, profile, levels)?);
    }
    let b = pairs.pop().expect("two factors");
    let a = pairs.pop().expect("two factors");
    let levels = [a.levels(), b.levels()];
    let frame = ProductFrame::new(&spec, a, b)?;
    print(&json!({ "levels": levels, "certificates": frame.certificates() }));
    Ok(())
}

fn decompose(cfg: &ExperimentConfig, input: Option<&PathBuf>) -> Result<()> {
    let st = setup(cfg, cfg.grid.samples, None)?;
    let f = match input {
        Some(p) => load_field(p)?,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            Bump::random(&mut rng, cfg.grid.half_widths).field(&st.system)
        }
    };
    let d = atomic_decompose(&f, &st.system, &st.triplet)?;
    let err = d.reconstruct().sub(&f)?.l2_norm() / f.l2_norm().max(f64::MIN_POSITIVE);
    let atoms: Vec<_> = d
        .atoms
        .iter()
        .map(|a| {
            let r = validate_atom(a, &st.triplet, &st.system.weight, &st.system.trees);
            json!({
                "k": a.k,
                "lambda": num(a.lambda),
                "particles": a.particles.len(),
                "valid": r.passed(),
                "size_margin": num(r.size_margin),
                "particle_margin": num(r.particle_margin),
            })
        })
        .collect();
    print(&json!({
        "atoms": atoms,
        "reconstruction_error": num(err),
        "coefficient_sum": num(d.coefficient_sum),
        "coefficient_ratio": num(d.coefficient_ratio()),
        "fold_constant": num(d.fold_constant()),
    }));
    Ok(())
}

fn verify(mut cfg: ExperimentConfig, output: Option<PathBuf>, suites: Vec<String>, threads: Option<usize>) -> Result<()> {
    if let Some(o) = output {
        cfg.output_dir = o;
    }
    if !suites.is_empty() {
        cfg.suites = suites;
    }
    let started = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let bundle = aniso_hardy_cli::run(&cfg)?;
    bundle.write(&cfg.output_dir, &cfg, started, threads)?;
    for l in bundle.summary(cfg.seed).criteria {
        println!("{:>2} {:<10} {} {}", l.id, l.suite, if l.passed { "PASS" } else { "FAIL" }, l.title);
    }
    let failing = bundle.failing();
    if failing.is_empty() {
        Ok(())
    } else {
        Err(CliError::SuiteFailed { criteria: failing })
    }
}

fn report(cfg: &ExperimentConfig, dir: Option<PathBuf>) -> Result<()> {
    let s = read_summary(dir.as_deref().unwrap_or(&cfg.output_dir))?;
    for l in &s.criteria {
        println!("{:>2} {:<10} {} {}", l.id, l.suite, if l.passed { "PASS" } else { "FAIL" }, l.title);
    }
    println!("seed {} overall {}", s.seed, if s.passed { "PASS" } else { "FAIL" });
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|threads| match cli.command {
        Command::Info(c) => info(&load(&c)?),
        Command::BuildFrames(c) => build_frames(&load(&c)?),
        Command::Decompose { common, input } => decompose(&load(&common)?, input.as_ref()),
        Command::Verify { common, output, suites } => verify(load(&common)?, output, suites, threads),
        Command::Report { common, dir } => report(&load(&common)?, dir),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                CliError::ConfigInvalid { .. } => 2,
                CliError::SuiteFailed { .. } => 3,
                _ => 1,
            })
        }
    }
}
