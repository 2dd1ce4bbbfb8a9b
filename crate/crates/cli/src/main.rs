use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bumpfield::experiment::{run_stages, write_outputs, ExperimentConfig, ResultBundle, Stages};
use bumpfield::widths::WidthSolution;
use bumpfield::Error;

/// Bump solutions of the Wilson-Cowan neural field by monotone iteration.
///
/// Exit status: 0 on success, 2 when a checked assumption fails, 1 on error.
#[derive(Parser)]
#[command(name = "bumpfield", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve W(2 delta) = h and W(2 delta) = h + tau and select the width pair.
    Widths(Common),
    /// Check the static assumptions on the selected pair.
    Check(Common),
    /// Run iteration scheme I and extend its fixed point to a bump.
    Direct(Common),
    /// Run iteration scheme II on the width profile.
    WidthScheme(Common),
    /// Build the scheme I bump and probe its stability by time stepping.
    Simulate(Common),
    /// Run every stage.
    All(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to `output.dir` from the config, then `out`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn stages(cmd: &Command) -> Stages {
    let s = |assumptions, direct, width, simulate| Stages {
        assumptions,
        direct,
        width,
        simulate,
    };
    match cmd {
        Command::Widths(_) => Stages::WIDTHS,
        Command::Check(_) => s(true, false, false, false),
        Command::Direct(_) => s(true, true, false, false),
        Command::WidthScheme(_) => s(true, false, true, false),
        Command::Simulate(_) => s(true, true, false, true),
        Command::All(_) => s(true, true, true, true),
    }
}

fn print_solutions(label: &str, sols: &[WidthSolution]) {
    println!("{label}: {} solution(s)", sols.len());
    for (i, s) in sols.iter().enumerate() {
        println!(
            "  [{i}] half_width = {}  omega(2 delta) = {}  {:?}  existence margin = {:e}",
            s.half_width, s.omega_at_width, s.stability, s.existence.worst_margin
        );
    }
}

fn report(bundle: &ResultBundle) {
    let h = bundle.config.field.threshold;
    print_solutions(&format!("level h = {h}"), &bundle.solutions_h);
    print_solutions("level h + tau", &bundle.solutions_h_tau);
    if let Some(p) = bundle.pair {
        println!("pair: delta_tau = {}, delta_0 = {}", p.lo(), p.hi());
    }
    if let Some(a) = &bundle.assumptions {
        print!("{}", a.to_table());
    }
    if let Some(d) = &bundle.direct {
        println!(
            "scheme I: {} iterations, converged = {}, eps < 1e-5 from n = {:?}",
            d.trace.iterations,
            d.trace.converged,
            d.trace.settles_below(1e-5)
        );
        if let Some(b) = &d.bump {
            println!("  bump: delta_tau = {}, delta_0 = {}", b.delta_tau, b.delta_zero);
        }
    }
    if let Some(w) = &bundle.width {
        println!(
            "scheme II: {} iterations, converged = {}, eps < 1e-5 from n = {:?}, k = {}",
            w.trace.iterations,
            w.trace.converged,
            w.trace.settles_below(1e-5),
            w.k
        );
        print!("{}", w.posterior.to_table());
    }
    if let Some(e) = bundle.cross_validation {
        println!("cross-validation: {e:e}");
    }
    for p in &bundle.probes {
        println!(
            "probe {}: {:?}, max deviation {:e} at t = {}",
            p.name, p.probe.verdict, p.probe.max_deviation, p.probe.horizon
        );
    }
    for f in &bundle.failures {
        eprintln!("stage failure: {f}");
    }
}

fn execute(cmd: &Command) -> Result<ExitCode, Error> {
    let common = match cmd {
        Command::Widths(c)
        | Command::Check(c)
        | Command::Direct(c)
        | Command::WidthScheme(c)
        | Command::Simulate(c)
        | Command::All(c) => c,
    };
    let cfg = ExperimentConfig::load(&common.config)?;
    let out = common
        .out
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let bundle = run_stages(&cfg, stages(cmd))?;
    report(&bundle);
    let written = write_outputs(&bundle, Path::new(&out))?;
    println!("wrote {} files to {}", written.len(), out.display());
    if !bundle.failures.is_empty() {
        return Ok(ExitCode::from(1));
    }
    if matches!(cmd, Command::Widths(_)) && bundle.pair.is_none() {
        eprintln!("no admissible width pair for the selected policy");
        return Ok(ExitCode::from(2));
    }
    if !bundle.assumptions_hold() {
        eprintln!("assumptions violated: {}", bundle.failed_assumptions().join(", "));
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e @ Error::Assumption1Violated(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
