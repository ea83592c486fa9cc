mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dicke_core::formulas::{self, Contour, Panel};
use dicke_core::schemes::{MAX_FORMULA_N, MAX_SIM_N};
use dicke_core::verify::{self, Suite};
use dicke_core::{Error, SchemeKind, SchemeSpec};

#[derive(Parser)]
#[command(
    name = "dicke",
    version,
    about = "Simulate linear-optical postselection of qudit Dicke states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build one scheme, simulate it and compare with its closed form.
    Run(RunArgs),
    /// Run the self-check suites; exits 1 if any check fails.
    Verify {
        #[arg(value_enum, default_value = "all")]
        suite: SuiteArg,
        /// Only print failing checks and the summary.
        #[arg(long)]
        failures_only: bool,
    },
    /// Emit closed-form probability tables as CSV.
    Table(TableArgs),
    /// Fit a straight line through a crossover contour; prints JSON.
    Fit(FitArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    OperatorAllOne,
    FockSingleMode,
    PrepSingleMultiport,
    PrepPerLevel,
    Ancilla,
    AppendixD4,
}

impl From<SchemeArg> for SchemeKind {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::OperatorAllOne => SchemeKind::OperatorAllOne,
            SchemeArg::FockSingleMode => SchemeKind::FockSingleMode,
            SchemeArg::PrepSingleMultiport => SchemeKind::PrepSingleMultiport,
            SchemeArg::PrepPerLevel => SchemeKind::PrepPerLevel,
            SchemeArg::Ancilla => SchemeKind::Ancilla,
            SchemeArg::AppendixD4 => SchemeKind::AppendixD4,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    All,
    Schemes,
    Oracle,
    Formulas,
}

#[derive(Clone, Copy, ValueEnum)]
enum Figure {
    Fig4a,
    Fig4b,
    ContourA,
    ContourB,
}

#[derive(Clone, Copy, ValueEnum)]
enum PanelArg {
    Qubit,
    Qutrit,
}

#[derive(Clone, Copy, ValueEnum)]
enum ContourArg {
    First,
    Second,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    scheme: SchemeArg,
    /// Level counts, e.g. `2,1,1`.
    #[arg(long, value_delimiter = ',', required = true)]
    k: Vec<usize>,
    /// Total photon number; must equal the sum of `--k` when given.
    #[arg(long)]
    n: Option<usize>,
    /// Beam-splitter transmissivity (ancilla only; default `(N-K)/N`).
    #[arg(long)]
    p: Option<f64>,
    /// Herald multiport output, 1-based (ancilla only).
    #[arg(long, default_value_t = 1)]
    herald_mode: usize,
    /// Feed excited levels as bunched Fock states (ancilla only).
    #[arg(long)]
    fock_ancilla: bool,
    /// Skip the phase feed-forward / phase screen.
    #[arg(long)]
    no_phase_correction: bool,
    /// Send each level group into its own multiport input (prep_per_level).
    #[arg(long)]
    separate_inputs: bool,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TableArgs {
    #[arg(value_enum)]
    figure: Figure,
    /// Excited-level count for fig4a/fig4b.
    #[arg(long, default_value_t = 1)]
    k1: usize,
    /// Largest k1 on the contour grids.
    #[arg(long)]
    k1_max: Option<usize>,
    #[arg(long, default_value_t = 2)]
    n_min: usize,
    #[arg(long, default_value_t = MAX_FORMULA_N)]
    n_max: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    #[arg(value_enum)]
    panel: PanelArg,
    #[arg(value_enum)]
    contour: ContourArg,
    #[arg(long, default_value_t = 1)]
    k1_min: usize,
    #[arg(long)]
    k1_max: Option<usize>,
    /// Drop contour points with N* above this value.
    #[arg(long, default_value_t = formulas::DEFAULT_N_WINDOW, conflicts_with = "no_window")]
    window: f64,
    /// Fit every point of the k1 range.
    #[arg(long)]
    no_window: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(text: &str, out: Option<&PathBuf>) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(args: RunArgs) -> anyhow::Result<ExitCode> {
    let sum: usize = args.k.iter().sum();
    if let Some(n) = args.n {
        if n != sum {
            return Err(Error::Spec(format!("--n {n} does not match the sum {sum} of --k")).into());
        }
    }
    let spec = SchemeSpec {
        p: args.p,
        herald_mode: args.herald_mode,
        fock_ancilla: args.fock_ancilla,
        phase_correction: !args.no_phase_correction,
        separate_inputs: args.separate_inputs,
        ..SchemeSpec::new(args.scheme.into(), args.k)
    };
    let report = dicke_core::run(&spec)?;
    eprintln!("wall time: {:.3} ms", report.wall_time.as_secs_f64() * 1e3);
    let text = match args.format {
        Format::Json => output::report_json(&report)?,
        Format::Csv => output::report_csv(&report)?,
    };
    emit(&text, args.out.as_ref())?;
    Ok(ExitCode::SUCCESS)
}

fn verify_cmd(suite: SuiteArg, failures_only: bool) -> ExitCode {
    let suite = match suite {
        SuiteArg::All => Suite::All,
        SuiteArg::Schemes => Suite::Schemes,
        SuiteArg::Oracle => Suite::Oracle,
        SuiteArg::Formulas => Suite::Formulas,
    };
    let checks = verify::verify(suite);
    let failed = checks.iter().filter(|c| !c.passed).count();
    for c in &checks {
        if !failures_only || !c.passed {
            println!("{c}");
        }
    }
    println!("{} passed, {failed} failed", checks.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn table(args: TableArgs) -> anyhow::Result<ExitCode> {
    if args.n_max > MAX_FORMULA_N {
        return Err(Error::Capacity(format!(
            "tables are limited to N <= {MAX_FORMULA_N}, got {}",
            args.n_max
        ))
        .into());
    }
    if args.n_min > args.n_max {
        bail!(Error::Spec(format!(
            "empty N range {}..={}",
            args.n_min, args.n_max
        )));
    }
    let range = args.n_min..=args.n_max;
    let text = match args.figure {
        Figure::Fig4a | Figure::Fig4b => {
            let (panel, levels) = match args.figure {
                Figure::Fig4a => (Panel::Qubit, 2),
                _ => (Panel::Qutrit, 3),
            };
            if args.k1 == 0 {
                bail!(Error::Spec("--k1 must be at least 1".into()));
            }
            output::crossover_csv(&formulas::crossover_table(panel, args.k1, range)?, levels)
        }
        Figure::ContourA | Figure::ContourB => {
            let panel = match args.figure {
                Figure::ContourA => Panel::Qubit,
                _ => Panel::Qutrit,
            };
            let k1_max = args.k1_max.unwrap_or(*panel.default_k1_range().end());
            let grid = (1..=k1_max)
                .map(|k1| Ok((k1, formulas::crossover_table(panel, k1, range.clone())?)))
                .collect::<dicke_core::Result<Vec<_>>>()?;
            output::contour_csv(&grid)
        }
    };
    emit(&text, args.out.as_ref())?;
    Ok(ExitCode::SUCCESS)
}

fn fit(args: FitArgs) -> anyhow::Result<ExitCode> {
    let panel = match args.panel {
        PanelArg::Qubit => Panel::Qubit,
        PanelArg::Qutrit => Panel::Qutrit,
    };
    let contour = match args.contour {
        ContourArg::First => Contour::First,
        ContourArg::Second => Contour::Second,
    };
    let k1_max = args.k1_max.unwrap_or(*panel.default_k1_range().end());
    if args.k1_min == 0 || args.k1_min > k1_max {
        bail!(Error::Spec(format!(
            "invalid k1 range {}..={k1_max}",
            args.k1_min
        )));
    }
    let window = (!args.no_window).then_some(args.window);
    let result = formulas::contour_fit(panel, contour, args.k1_min..=k1_max, window)?;
    let reference = verify::REFERENCE_SLOPES
        .iter()
        .find(|(p, c, _)| *p == panel && *c == contour)
        .map(|(_, _, a)| a);
    emit(
        &output::fit_json(&result, window, reference)?,
        args.out.as_ref(),
    )?;
    Ok(ExitCode::SUCCESS)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Verification(_)) => 1,
        Some(Error::Capacity(_)) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Verify {
            suite,
            failures_only,
        } => Ok(verify_cmd(suite, failures_only)),
        Command::Table(args) => table(args),
        Command::Fit(args) => fit(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            if matches!(err.downcast_ref::<Error>(), Some(Error::Capacity(_))) {
                eprintln!(
                    "(simulation is capped at N <= {MAX_SIM_N}, tables at N <= {MAX_FORMULA_N})"
                );
            }
            ExitCode::from(exit_code(&err))
        }
    }
}
