use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use discofield_cli::{default_config, load_config, run, Command, RunOptions};

#[derive(Parser, Debug)]
#[command(
    name = "discofield",
    version,
    about = "Numerical verification runner for dispersion field operators"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// JSON configuration; the built-in default is used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the configuration seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory (falls back to the config, then DISCOFIELD_OUT, then ./reports).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Largest product-basis dimension any suite may assemble.
    #[arg(long, global = true)]
    cutoff_cap: Option<usize>,

    /// Multiplies every residual tolerance.
    #[arg(long, global = true)]
    tolerance_scale: Option<f64>,

    /// Also report moments under the alternative Gaussian exponent.
    #[arg(long, global = true, value_enum, default_value_t = Exponent::Consistent)]
    exponent_variant: Exponent,

    /// Record wall time in the reports. Reports are then no longer byte-stable.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Hermite function normalization, orthogonality and moment laws.
    VerifyHermite,
    /// One-dimensional and mass-sector dispersion spectra.
    #[command(name = "spectrum-1d")]
    Spectrum1d,
    /// The ten factor-matrix relations.
    VerifyAlgebra,
    /// Factor constraint residuals and the constraint map spectrum.
    Constraint,
    /// Tensor spectrum, commutators, resonant tuples and the scalar nullspace.
    Resonance,
    /// Pointwise residuals of the separable scalar solutions.
    ScalarResidual,
    /// The product identity between the first-order and scalar operators.
    Factorization,
    /// Smallest singular values of the fermion operator.
    FermionSvd,
    /// Plane-wave Klein-Gordon and Dirac checks.
    Baselines,
    /// Every suite in turn.
    All,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Exponent {
    Consistent,
    Literal,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::VerifyHermite => Command::VerifyHermite,
            Cmd::Spectrum1d => Command::Spectrum1d,
            Cmd::VerifyAlgebra => Command::VerifyAlgebra,
            Cmd::Constraint => Command::Constraint,
            Cmd::Resonance => Command::Resonance,
            Cmd::ScalarResidual => Command::ScalarResidual,
            Cmd::Factorization => Command::Factorization,
            Cmd::FermionSvd => Command::FermionSvd,
            Cmd::Baselines => Command::Baselines,
            Cmd::All => Command::All,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let loaded = match &cli.config {
        Some(p) => load_config(p),
        None => Ok(default_config()),
    };
    let mut cfg = match loaded
        .and_then(|c| match cli.cutoff_cap {
            Some(cap) => c.with_dimension_cap(cap),
            None => Ok(c),
        })
        .and_then(|c| match cli.tolerance_scale {
            Some(s) => c.with_tolerance_scale(s),
            None => Ok(c),
        }) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    let out = cli
        .out
        .or_else(|| cfg.output_dir.clone())
        .or_else(|| std::env::var_os("DISCOFIELD_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("reports"));
    let opts = RunOptions {
        literal_exponent: cli.exponent_variant == Exponent::Literal,
        timing: cli.timing,
    };

    let reports = run(cli.command.into(), &cfg, &opts);
    for r in &reports {
        if let Err(e) = r.write(&out) {
            eprintln!(
                "error: cannot write {} report to {}: {e}",
                r.command,
                out.display()
            );
            return ExitCode::from(2);
        }
    }
    let summary = reports.last().expect("at least one report");
    for c in summary.failed() {
        eprintln!(
            "FAIL {} [{}] value={:e} tolerance={:?}",
            c.id, c.eq_ref, c.value, c.tolerance
        );
    }
    for e in &summary.errors {
        eprintln!("ERROR {e}");
    }
    println!(
        "{}: {}/{} checks passed, reports in {}",
        summary.command,
        summary.passed(),
        summary.checks.len(),
        out.display()
    );
    ExitCode::from(summary.exit_code() as u8)
}
