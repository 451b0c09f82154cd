//! Command-line driver for the rod experiments.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cosserat::bench::{
    load_config, run_generic, ExperimentConfig, ExperimentKind, HeavyTopParameters, ReferenceSpec,
};
use cosserat::rodmodel::Integration;
use cosserat::{InterpolationKind, RodError};

#[derive(Parser)]
#[command(
    name = "cosserat",
    version,
    about = "Cosserat rod finite element experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Strain fields of a quarter circle discretized by each element kind.
    QuarterCircle(Common),
    /// Cantilever convergence study against a fine reference solution.
    Cantilever {
        #[command(flatten)]
        common: Common,
        /// Slenderness L / w.
        #[arg(long)]
        rho: Option<f64>,
        /// Use the 512 / 256 element references.
        #[arg(long)]
        fine_reference: bool,
    },
    /// Flexible heavy top compared with the rigid precession.
    HeavyTop {
        #[command(flatten)]
        common: Common,
        /// Scale all stiffnesses by 2.5e-3.
        #[arg(long)]
        soft: bool,
    },
    /// Run the experiment described by a JSON config file.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Element kind: r12, r3so3 or se3.
    #[arg(long, value_parser = parse_kind)]
    kind: Option<InterpolationKind>,
    /// Polynomial order, 1 or 2.
    #[arg(long)]
    order: Option<usize>,
    /// Number of elements; a comma separated list sweeps the cantilever.
    #[arg(long, value_delimiter = ',')]
    nel: Vec<usize>,
    /// Quadrature of the internal forces: full or reduced.
    #[arg(long, value_parser = parse_integration)]
    integration: Option<Integration>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Cache file of the cantilever reference solution.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Fixed time step; adaptive stepping when absent.
    #[arg(long)]
    fixed_step: Option<f64>,
}

fn parse_kind(s: &str) -> Result<InterpolationKind, String> {
    InterpolationKind::parse(s)
        .ok_or_else(|| format!("unknown kind `{s}` (expected r12, r3so3 or se3)"))
}

fn parse_integration(s: &str) -> Result<Integration, String> {
    Integration::parse(s)
        .ok_or_else(|| format!("unknown integration `{s}` (expected full or reduced)"))
}

impl Common {
    fn config(&self, experiment: ExperimentKind) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(experiment);
        cfg.kind = self.kind;
        cfg.order = self.order.unwrap_or(1);
        match self.nel.as_slice() {
            [] => {}
            [n] => cfg.n_el = Some(*n),
            list => cfg.n_els = Some(list.to_vec()),
        }
        if let Some(i) = self.integration {
            cfg.integration = i;
        }
        cfg.reference_path = self.reference.clone();
        cfg.dynamic.fixed_step = self.fixed_step;
        cfg.output = Some(self.out.clone());
        cfg
    }
}

fn run(cli: Cli) -> Result<(), RodError> {
    let cfg = match cli.command {
        Command::QuarterCircle(common) => common.config(ExperimentKind::QuarterCircle),
        Command::Cantilever {
            common,
            rho,
            fine_reference,
        } => {
            let mut cfg = common.config(ExperimentKind::Cantilever);
            cfg.slenderness = rho;
            cfg.fine_reference = fine_reference;
            if fine_reference {
                cfg.reference = Some(ReferenceSpec::for_study(cfg.integration, true));
            }
            cfg
        }
        Command::HeavyTop { common, soft } => {
            let mut cfg = common.config(ExperimentKind::HeavyTop);
            if soft {
                cfg.heavy_top = Some(HeavyTopParameters::soft());
                cfg.name = Some("heavy_top_soft".into());
            }
            cfg
        }
        Command::Run { config, out } => {
            let mut cfg = load_config(&config)?;
            if out.is_some() {
                cfg.output = out;
            }
            cfg
        }
    };
    cfg.validate()?;
    let out = run_generic(&cfg, None)?;
    for f in &out.files {
        eprintln!("wrote {}", f.display());
    }
    println!("{}", out.summary);
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
