use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thetacert::char2::{odd_count, odd_characteristics, steiner_set_size, build_steiner_sets};
use thetacert::linalg_cert::MachineEps;
use thetacert::pipeline::{
    emit_theta_inputs, ingest, parse_index_list, parse_two_torsion, report_render, run_pipeline, Format,
    PipelineConfig, PipelineError, Stages,
};
use thetacert::tangency_cert::Verdict;

const EXIT_FAIL: u8 = 1;
const EXIT_INDETERMINATE: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(name = "thetacert", version, about = "Certified checks for theta hyperplanes of canonical curves")]
struct Cli {
    /// Unit roundoff used in every bound.
    #[arg(long, global = true, value_name = "E")]
    eps_machine: Option<f64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Hyperplane indices to certify, e.g. 0,4,10-20.
    #[arg(long, global = true, value_name = "LIST")]
    subset: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run certification stages on a curve and its hyperplanes.
    Certify {
        #[arg(value_enum)]
        stage: StageArg,
        #[command(flatten)]
        io: CertifyArgs,
    },
    /// Theta-function utilities.
    Theta {
        #[command(subcommand)]
        command: ThetaCommand,
    },
    /// Characteristic combinatorics.
    Char2 {
        #[command(subcommand)]
        command: Char2Command,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StageArg {
    Tangency,
    Steiner,
    Dims,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Text,
    CsvSigma,
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long)]
    curve: PathBuf,
    #[arg(long)]
    hyperplanes: PathBuf,
    #[arg(long)]
    riemann: Option<PathBuf>,
    /// Write the report here; a text summary goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    /// Two-torsion points to certify, e.g. 100000;010000,001000;000000.
    #[arg(long, value_name = "LIST")]
    alphas: Option<String>,
    #[arg(long)]
    syzygetic_eps: Option<f64>,
    #[arg(long)]
    azygetic_a: Option<f64>,
}

#[derive(Subcommand)]
enum ThetaCommand {
    /// Uncertified hyperplane coefficients from theta gradients.
    Hyperplanes {
        #[arg(long)]
        riemann: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
}

#[derive(Subcommand)]
enum Char2Command {
    /// Counts of odd characteristics and Steiner sets.
    Steiner {
        #[arg(long)]
        genus: usize,
    },
}

fn base_config(cli: &Cli) -> Result<PipelineConfig, PipelineError> {
    let mut cfg = PipelineConfig::default();
    if let Some(e) = cli.eps_machine {
        cfg.machine_eps = MachineEps::new(e).map_err(|e| PipelineError::Config(e.to_string()))?;
    }
    cfg.threads = cli.threads;
    if let Some(s) = &cli.subset {
        cfg.hyperplane_subset = Some(parse_index_list(s)?);
    }
    Ok(cfg)
}

fn write_or_print(out: Option<&PathBuf>, text: &str) -> Result<(), PipelineError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| PipelineError::Io { path: p.display().to_string(), message: e.to_string() }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn certify(cli: &Cli, stage: StageArg, io: &CertifyArgs) -> Result<u8, PipelineError> {
    let mut cfg = base_config(cli)?;
    if let Some(e) = io.syzygetic_eps {
        cfg.syzygetic_eps = e;
    }
    if let Some(a) = io.azygetic_a {
        cfg.azygetic_a = a;
    }
    cfg.validate()?;
    let model = ingest(&io.curve, &io.hyperplanes, io.riemann.as_deref())?;
    if let Some(list) = &io.alphas {
        let g = model.g();
        let alphas = list.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse_two_torsion(s, g)).collect::<Result<_, _>>()?;
        cfg.steiner_subset = Some(alphas);
    }
    for w in &model.stats.warnings {
        eprintln!("warning: {w}");
    }
    let stages = match stage {
        StageArg::Tangency => Stages::Tangency,
        StageArg::Steiner => Stages::Steiner,
        StageArg::Dims => Stages::Dimensions,
        StageArg::All => Stages::All,
    };
    let report = run_pipeline(&model, &cfg, stages)?;
    let format = match io.format {
        FormatArg::Json => Format::Json,
        FormatArg::Text => Format::Text,
        FormatArg::CsvSigma => Format::CsvSigma,
    };
    write_or_print(io.out.as_ref(), &report_render(&report, format))?;
    if io.out.is_some() {
        print!("{}", report_render(&report, Format::Text));
    }
    Ok(match report.overall {
        Verdict::Pass => 0,
        Verdict::Fail => EXIT_FAIL,
        Verdict::Indeterminate => EXIT_INDETERMINATE,
    })
}

fn char2_steiner(g: usize) -> Result<u8, PipelineError> {
    if g == 0 || g > 16 {
        return Err(PipelineError::Config(format!("genus {g} outside 1..=16")));
    }
    let sets = (1u64 << (2 * g)) - 1;
    println!("genus {g}");
    println!("odd characteristics: {}", odd_count(g));
    println!("Steiner sets: {sets}");
    println!("pairs per Steiner set: {}", steiner_set_size(g));
    // Enumeration is cheap enough to cross-check small genera.
    if g <= 5 {
        let odd = odd_characteristics(g).map_err(|e| PipelineError::Config(e.to_string()))?;
        let built = build_steiner_sets(&odd).map_err(|e| PipelineError::Config(e.to_string()))?;
        let ok = built.len() as u64 == sets && built.values().all(|s| s.pairs.len() as u64 == steiner_set_size(g));
        println!("enumeration check: {}", if ok { "ok" } else { "MISMATCH" });
        if !ok {
            return Ok(EXIT_FAIL);
        }
    }
    Ok(0)
}

fn run(cli: &Cli) -> Result<u8, PipelineError> {
    // Global options are checked even for commands that do not use them.
    base_config(cli)?;
    match &cli.command {
        Command::Certify { stage, io } => certify(cli, *stage, io),
        Command::Theta { command: ThetaCommand::Hyperplanes { riemann, out, tol } } => {
            let text = std::fs::read_to_string(riemann)
                .map_err(|e| PipelineError::Io { path: riemann.display().to_string(), message: e.to_string() })?;
            let skel = emit_theta_inputs(&text, *tol)?;
            let json = serde_json::to_string_pretty(&skel).expect("skeleton serializes");
            write_or_print(out.as_ref(), &(json + "\n"))?;
            if out.is_some() {
                println!("{} hyperplanes (g = {})", skel.hyperplanes.len(), skel.g);
            }
            Ok(0)
        }
        Command::Char2 { command: Char2Command::Steiner { genus } } => char2_steiner(*genus),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // Help and version are successful exits; usage errors are input errors.
            return if e.use_stderr() { ExitCode::from(EXIT_INPUT) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
