use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use illpose_core::experiments::Engine;

use crate::run::CliError;

#[derive(Debug, Parser)]
#[command(name = "illpose", version, about = "Growth of perturbations of a rotating MHD flow on the unit disk")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// File of `key = value` lines supplying defaults for any long flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    #[value(alias = "closed_form")]
    ClosedForm,
    #[value(alias = "rk4_weta")]
    Rk4Weta,
    #[value(alias = "rk4_decomposed")]
    Rk4Decomposed,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::ClosedForm => Engine::ClosedForm,
            EngineArg::Rk4Weta => Engine::Rk4Weta,
            EngineArg::Rk4Decomposed => Engine::Rk4Decomposed,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Steady rotating state v = iz, H = ibz: pressure q, ∇q, H·∇H and the momentum residual.
    Steady(FieldStrength),
    /// Sign of 1 - b²/μ₀, the outward normal derivative of the steady pressure.
    Taylor(FieldStrength),
    /// Seeded mode e^{-n^{1/4}} z̄^n integrated with RK4 against its closed form.
    Mode(ModeArgs),
    /// Evolve the seeded perturbation with a chosen engine.
    Evolve(EvolveArgs),
    /// E±, F, G and the three energy inequalities along the seeded perturbation.
    Energies(EnergiesArgs),
    /// E⁺(t) against E⁺(0)·exp(√(1-b²)·√n·t) for several n.
    Growth(GrowthArgs),
    /// Lower bound 2π(n-1)^{2μ}/(2n+1)·exp(√(1-b²)√n t* - 2n^{1/4}) against the size of the initial data.
    Illpose(IllposeArgs),
    /// Seeded randomized checks of the operator identities.
    Opcheck(OpcheckArgs),
}

#[derive(Debug, Args)]
pub struct FieldStrength {
    /// Magnetic field strength b.
    #[arg(long, allow_hyphen_values = true)]
    pub b: f64,
    /// Permeability μ₀.
    #[arg(long, default_value_t = 1.0)]
    pub mu0: f64,
}

#[derive(Debug, Args)]
pub struct ModeArgs {
    /// Angular index n ≥ 2 of the seed z̄^n.
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub b: f64,
    #[arg(long)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub b: f64,
    #[arg(long)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, value_enum, default_value_t = EngineArg::ClosedForm)]
    pub engine: EngineArg,
}

#[derive(Debug, Args)]
pub struct EnergiesArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub b: f64,
    /// Regularity index μ.
    #[arg(long, default_value_t = 2.0)]
    pub mu: f64,
    #[arg(long)]
    pub t_end: f64,
    /// Spacing of the reported times, also the RK4 step.
    #[arg(long, default_value_t = 0.05)]
    pub dt: f64,
    #[arg(long, value_enum, default_value_t = EngineArg::ClosedForm)]
    pub engine: EngineArg,
}

#[derive(Debug, Args)]
pub struct GrowthArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_list: Vec<u32>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub b: f64,
    #[arg(long, default_value_t = 2.0)]
    pub mu: f64,
    #[arg(long)]
    pub t_end: f64,
    /// Number of equally spaced sample times including 0 and t_end.
    #[arg(long, default_value_t = 41)]
    pub samples: usize,
    #[arg(long, value_enum, default_value_t = EngineArg::ClosedForm)]
    pub engine: EngineArg,
    /// RK4 step for the integrating engines.
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
}

#[derive(Debug, Args)]
pub struct IllposeArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_list: Vec<u32>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub b: f64,
    #[arg(long, default_value_t = 2.0)]
    pub mu: f64,
    #[arg(long)]
    pub t_star: f64,
}

#[derive(Debug, Args)]
pub struct OpcheckArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Maximum total degree of the random polynomials.
    #[arg(long, default_value_t = 8)]
    pub degree: u32,
}

/// Appends `--key value` for every config entry whose flag is absent from argv.
pub fn merge_config(mut argv: Vec<String>) -> Result<Vec<String>, CliError> {
    let mut path = None;
    for (i, arg) in argv.iter().enumerate() {
        if arg == "--config" {
            path = argv.get(i + 1).cloned();
        } else if let Some(p) = arg.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else { return Ok(argv) };
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
    let mut extra = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Validation(format!("{path}:{}: expected key = value", lineno + 1)))?;
        let flag = format!("--{}", key.trim().replace('_', "-"));
        let present = argv.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")));
        if !present {
            extra.push(format!("{flag}={}", value.trim()));
        }
    }
    argv.extend(extra);
    Ok(argv)
}
