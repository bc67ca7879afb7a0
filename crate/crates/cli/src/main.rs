//! `structvar`: derive, verify and simulate deformed-derivative variational systems.
//!
//! Exit codes: 0 success, 1 verification failure, 2 bad input, 3 engine
//! error, 4 numeric failure.

mod commands;
mod config;
mod sim;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use structvar_core::{CatalogError, EngineError, NumericError, SymbolicError};

use config::RunConfig;

#[derive(Debug)]
pub enum Failure {
    Verify,
    Parse(String),
    Engine(String),
    Numeric(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Verify => 1,
            Failure::Parse(_) => 2,
            Failure::Engine(_) => 3,
            Failure::Numeric(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Verify => "verification failed",
            Failure::Parse(m) | Failure::Engine(m) | Failure::Numeric(m) => m,
        }
    }
}

impl From<SymbolicError> for Failure {
    fn from(e: SymbolicError) -> Self {
        match e {
            SymbolicError::Parse { .. } => Failure::Parse(e.to_string()),
            other => Failure::Engine(other.to_string()),
        }
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Symbolic(s) => s.into(),
            other => Failure::Engine(other.to_string()),
        }
    }
}

impl From<CatalogError> for Failure {
    fn from(e: CatalogError) -> Self {
        match e {
            CatalogError::Engine(e) => e.into(),
            other => Failure::Parse(other.to_string()),
        }
    }
}

impl From<NumericError> for Failure {
    fn from(e: NumericError) -> Self {
        match e {
            NumericError::InvalidArgument(m) => Failure::Parse(m),
            other => Failure::Numeric(other.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "structvar", version, about = "Deformed-derivative variational calculus: derive, verify, simulate")]
struct Cli {
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    json: bool,
    /// Output file (list, derive, verify, render) or directory (simulate).
    /// Defaults to $STRUCTVAR_OUT for simulate, else stdout / current directory.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Seed for stochastic systems; required for them.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Flat key = value configuration file; flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Write the effective configuration to FILE for replay.
    #[arg(long, global = true, value_name = "FILE")]
    save_config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// List catalog systems.
    List {
        /// Only systems of this section, e.g. 5.7.
        #[arg(long)]
        section: Option<String>,
    },
    /// Derive the Euler-Lagrange residual of a catalog system or a given Lagrangian.
    Derive {
        system: Option<String>,
        /// Parameter override, repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Stop before the limit procedure.
        #[arg(long)]
        no_limit: bool,
        /// Use the Lagrangian exactly as printed in the source.
        #[arg(long)]
        printed: bool,
        /// plain, latex or sexpr.
        #[arg(long)]
        format: Option<String>,
        /// Lagrangian expression, instead of a catalog system.
        #[arg(long, conflicts_with = "system")]
        lagrangian: Option<String>,
        /// Dependent variables, e.g. "x(t)" or "phi(x,t)"; default x(t).
        #[arg(long)]
        vars: Option<String>,
        /// Kernel assignments "var:coord=kernel;...", e.g. "x:t=conf(1/2,a)".
        #[arg(long)]
        kernels: Option<String>,
        /// Source functions that are not varied, e.g. "f(x)".
        #[arg(long)]
        sources: Option<String>,
    },
    /// Verify catalog systems against their target equations.
    Verify {
        system: Option<String>,
        #[arg(long)]
        all: bool,
        /// Compare with the targets as printed instead of the corrected ones.
        #[arg(long)]
        printed_target: bool,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Integrate a system numerically; parameters as `--key value`.
    Simulate {
        system: Option<String>,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "PARAMS")]
        params: Vec<String>,
    },
    /// Parse and re-render an expression.
    Render {
        expr: Option<String>,
        #[arg(long)]
        format: Option<String>,
        /// Function declarations, e.g. "phi(x,t)".
        #[arg(long)]
        vars: Option<String>,
    },
}

fn key_value(s: &str) -> Result<(String, String), Failure> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| Failure::Parse(format!("expected KEY=VALUE, got `{s}`")))
}

/// `--key value`, `--key=value` or `key=value` pairs after the system id.
fn simulate_params(args: &[String], c: &mut RunConfig) -> Result<(), Failure> {
    let mut it = args.iter().peekable();
    while let Some(a) = it.next() {
        let (k, v) = if let Some(rest) = a.strip_prefix("--") {
            match rest.split_once('=') {
                Some((k, v)) => (k.to_string(), v.to_string()),
                None if rest == "json" => ("json".into(), "true".into()),
                None => {
                    let v = it
                        .next()
                        .ok_or_else(|| Failure::Parse(format!("`--{rest}` needs a value")))?;
                    (rest.to_string(), v.clone())
                }
            }
        } else {
            key_value(a)?
        };
        match k.as_str() {
            "config" | "save-config" => {
                return Err(Failure::Parse(format!("`--{k}` must come before the system id")))
            }
            _ => c.set(&k, &v)?,
        }
    }
    Ok(())
}

fn from_cli(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut c = RunConfig { seed: cli.seed, out: cli.out.clone(), json: cli.json, ..RunConfig::default() };
    let name = |s: &str| Some(s.to_string());
    match &cli.command {
        None => {}
        Some(Cmd::List { section }) => {
            c.command = name("list");
            c.section = section.clone();
        }
        Some(Cmd::Derive { system, set, no_limit, printed, format, lagrangian, vars, kernels, sources }) => {
            c.command = name("derive");
            c.system = system.clone();
            c.no_limit = *no_limit;
            c.printed = *printed;
            c.format = format.clone();
            c.lagrangian = lagrangian.clone();
            c.vars = vars.clone();
            c.kernels = kernels.clone();
            c.sources = sources.clone();
            for s in set {
                let (k, v) = key_value(s)?;
                c.params.insert(k, v);
            }
        }
        Some(Cmd::Verify { system, all, printed_target, set }) => {
            c.command = name("verify");
            c.system = system.clone();
            c.all = *all;
            c.printed = *printed_target;
            for s in set {
                let (k, v) = key_value(s)?;
                c.params.insert(k, v);
            }
        }
        Some(Cmd::Simulate { system, params }) => {
            c.command = name("simulate");
            c.system = system.clone();
            simulate_params(params, &mut c)?;
        }
        Some(Cmd::Render { expr, format, vars }) => {
            c.command = name("render");
            c.expr = expr.clone();
            c.format = format.clone();
            c.vars = vars.clone();
        }
    }
    Ok(c)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let flags = from_cli(&cli)?;
    let file = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let (Some(a), Some(b)) = (&file.command, &flags.command) {
        if a != b {
            return Err(Failure::Parse(format!("config is for `{a}`, command line asks for `{b}`")));
        }
    }
    let cfg = file.overlay(flags);
    if let Some(p) = &cli.save_config {
        std::fs::write(p, cfg.to_text())
            .map_err(|e| Failure::Parse(format!("cannot write {}: {e}", p.display())))?;
    }
    match cfg.command.as_deref() {
        Some("list") => commands::list(&cfg),
        Some("derive") => commands::derive(&cfg),
        Some("verify") => commands::verify(&cfg),
        Some("simulate") => sim::simulate(&cfg),
        Some("render") => commands::render_cmd(&cfg),
        Some(other) => Err(Failure::Parse(format!("unknown command `{other}`"))),
        None => Err(Failure::Parse("no command given (list, derive, verify, simulate, render)".into())),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !matches!(f, Failure::Verify) {
                let _ = writeln!(std::io::stderr(), "error: {}", f.message());
            }
            ExitCode::from(f.code())
        }
    }
}
