//! `bmlab`: run a scenario file or one of the shortcut subcommands.
//!
//! Exit status: 0 pass or exploratory, 1 violation in a check, 2 error.

mod emit;
mod run;
mod scenario;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::Value;

use crate::run::{run_scenario, Overrides};
use crate::scenario::{measure_alias, Command, ExtReal, GridSpec, ScenarioConfig};

#[derive(Debug, Parser)]
#[command(name = "bmlab", version, about = "Brunn-Minkowski type inequalities for measures")]
struct Cli {
    /// Scenario JSON file.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Directory for `<name>.json` and, for curves, `<name>.csv`. Without it
    /// the report (or the CSV of a curve command) goes to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    abs_tol: Option<f64>,
    #[arg(long, global = true)]
    rel_tol: Option<f64>,
    #[arg(long, global = true)]
    section_grid: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// `a:b:step`
    #[arg(long, global = true)]
    lambda_grid: Option<String>,
    /// `a:b:step`
    #[arg(long, global = true)]
    t_grid: Option<String>,
    #[command(subcommand)]
    sub: Option<Sub>,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Explicit and searched counterexamples.
    Counterexample {
        #[command(subcommand)]
        which: Counter,
    },
    /// Concavity of `t -> μ(A + tB)`; prints `t,value,cumulative_deficit`.
    Parallel {
        /// Measure alias (exp-product, gaussian, lebesgue, inverse-quadratic) or JSON.
        #[arg(long)]
        measure: String,
        /// Set descriptor JSON.
        #[arg(long = "A")]
        a: String,
        /// Set descriptor JSON.
        #[arg(long = "B")]
        b: String,
        /// `a:b:step`
        #[arg(long)]
        t: String,
        #[arg(long, allow_hyphen_values = true)]
        s: String,
    },
}

#[derive(Debug, Subcommand)]
enum Counter {
    /// The one-dimensional family `x 1_{x >= 0}`-type measures on `[-a, a]`, `[-b, b]`.
    Power {
        #[arg(long)]
        s: f64,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        b: f64,
        /// Fixed `a`; searched when absent.
        #[arg(long)]
        a: Option<f64>,
    },
    /// Parametric search for planar violations.
    Search {
        /// triangle, clipped-halfplane or symmetric-dilate
        #[arg(long)]
        family: String,
        #[arg(long)]
        measure: String,
        #[arg(long)]
        s: f64,
        #[arg(long, default_value_t = 20_000)]
        budget: usize,
        #[arg(long)]
        restarts: Option<usize>,
    },
}

fn set_json(s: &str, flag: &str) -> Result<bmlab_core::sets::SetDescriptor> {
    serde_json::from_str(s).map_err(|e| anyhow!("invalid set JSON for {flag}: {e}"))
}

fn config_from(cli: &Cli) -> Result<(ScenarioConfig, String)> {
    if let Some(path) = &cli.scenario {
        if cli.sub.is_some() {
            bail!("--scenario cannot be combined with a subcommand");
        }
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg = ScenarioConfig::from_json(&text).with_context(|| path.display().to_string())?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
        let name = cfg.name.clone().unwrap_or_else(|| stem.to_string());
        return Ok((cfg, name));
    }
    let Some(sub) = &cli.sub else {
        bail!("nothing to run: pass --scenario <path> or a subcommand (see --help)");
    };
    let cfg = match sub {
        Sub::Counterexample {
            which: Counter::Power { s, r, b, a },
        } => {
            let mut c = ScenarioConfig::new(Command::CounterexamplePower);
            c.s = Some(ExtReal(*s));
            c.r = Some(*r);
            c.b = Some(*b);
            c.a = *a;
            c.lambda_grid = Some(GridSpec::List(vec![0.5]));
            c
        }
        Sub::Counterexample {
            which:
                Counter::Search {
                    family,
                    measure,
                    s,
                    budget,
                    restarts,
                },
        } => {
            let mut c = ScenarioConfig::new(Command::CounterexampleSearch);
            c.family = Some(
                serde_json::from_value(Value::String(family.clone()))
                    .map_err(|_| anyhow!("unknown family {family:?} (triangle, clipped-halfplane, symmetric-dilate)"))?,
            );
            c.measure = Some(measure_alias(measure)?);
            c.s = Some(ExtReal(*s));
            c.budget = Some(*budget);
            c.restarts = *restarts;
            c
        }
        Sub::Parallel { measure, a, b, t, s } => {
            let mut c = ScenarioConfig::new(Command::Parallel);
            c.measure = Some(measure_alias(measure)?);
            c.sets = vec![set_json(a, "--A")?, set_json(b, "--B")?];
            c.t_grid = Some(GridSpec::Range(t.clone()));
            c.s = Some(s.parse().context("--s")?);
            c
        }
    };
    let name = cfg.command.name().to_string();
    Ok((cfg, name))
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("BMLAB_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| anyhow!("BMLAB_THREADS must be a positive integer, got {v:?}"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("starting worker pool")?;
    }
    Ok(())
}

fn output_dir(cli: &Cli, cfg: &ScenarioConfig, scenario: Option<&Path>) -> Option<PathBuf> {
    if let Some(d) = &cli.out {
        return Some(d.clone());
    }
    // a relative `output` in a scenario is taken from the scenario's directory
    cfg.output.as_ref().map(|o| {
        let p = PathBuf::from(o);
        match scenario.and_then(Path::parent) {
            Some(base) if p.is_relative() => base.join(p),
            _ => p,
        }
    })
}

fn real_main() -> Result<u8> {
    let cli = Cli::parse();
    init_threads()?;
    let (mut cfg, name) = config_from(&cli)?;
    Overrides {
        abs_tol: cli.abs_tol,
        rel_tol: cli.rel_tol,
        section_grid: cli.section_grid,
        seed: cli.seed,
        lambda_grid: cli.lambda_grid.clone(),
        t_grid: cli.t_grid.clone(),
    }
    .apply(&mut cfg)?;
    let outcome = run_scenario(&cfg, &name)?;
    let json = emit::canonical_json(&outcome.json);
    match output_dir(&cli, &cfg, cli.scenario.as_deref()) {
        Some(dir) => {
            emit::write_file(&dir.join(format!("{name}.json")), &json)?;
            if let Some(csv) = &outcome.csv {
                emit::write_file(&dir.join(format!("{name}.csv")), csv)?;
            }
        }
        None => match &outcome.csv {
            Some(csv) => print!("{csv}"),
            None => print!("{json}"),
        },
    }
    let verdict = outcome.json["report"]["verdict"].as_str().unwrap_or("?");
    eprintln!("{name}: {verdict} (exit {})", outcome.exit);
    Ok(outcome.exit)
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
