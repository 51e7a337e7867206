use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use oliver_core::driver::{self, Command, RunOptions, SeriesChoice, EXIT_ERROR};
use oliver_core::input::{parse_input, ModeHint};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Auto,
    Explicit,
    Semidirect,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Series {
    Default,
    Upper,
}

/// Oliver and Thompson subgroups, offenders and replacement for p-groups of
/// unipotent matrices over F_p.
#[derive(Parser, Debug)]
#[command(name = "oliver", version)]
struct Cli {
    /// check, xk, je, baum, offenders, two-subnormal, normalw,
    /// replace-thompson, replace-glauberman, monitors, corpus
    #[arg(value_parser = parse_command)]
    command: Command,

    /// Input document (`-` for stdin). For `corpus`, an instance name to
    /// export instead.
    input: Option<String>,

    #[arg(long)]
    k: Option<usize>,

    #[arg(long, value_enum, default_value = "auto")]
    mode: Mode,

    /// Maximum number of group elements to enumerate.
    #[arg(long, env = "OLIVER_CAP", default_value_t = oliver_core::group::DEFAULT_CAP)]
    cap: usize,

    #[arg(long, value_enum, default_value = "default")]
    series: Series,

    /// Emit JSON (reports, or exported corpus documents).
    #[arg(long)]
    json: bool,

    /// Worker threads for the enumeration kernels (0 = all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,

    /// Only list quadratic offenders.
    #[arg(long)]
    quadratic: bool,

    /// Only list 2-subnormal offenders.
    #[arg(long)]
    two_subnormal: bool,

    /// Omit wall-clock timings from the report.
    #[arg(long)]
    no_timings: bool,

    #[arg(long, hide = true)]
    corrupt_offender_check: bool,
}

fn parse_command(s: &str) -> Result<Command, String> {
    s.parse().map_err(|e: oliver_core::Error| e.to_string())
}

fn read_input(path: &str) -> std::io::Result<String> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        std::fs::read_to_string(PathBuf::from(path))
    }
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_ERROR as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            return fail(e);
        }
    }
    let opts = RunOptions {
        k: cli.k,
        mode: match cli.mode {
            Mode::Auto => ModeHint::Auto,
            Mode::Explicit => ModeHint::Explicit,
            Mode::Semidirect => ModeHint::Semidirect,
        },
        cap: cli.cap,
        series: match cli.series {
            Series::Default => SeriesChoice::Default,
            Series::Upper => SeriesChoice::Upper,
        },
        quadratic: cli.quadratic,
        two_subnormal: cli.two_subnormal,
        timings: !cli.no_timings,
        corrupt_offender_check: cli.corrupt_offender_check,
    };

    let doc = match (cli.command, cli.input.as_deref()) {
        (Command::Corpus, Some(name)) => {
            return match driver::export_corpus(name, cli.cap) {
                Ok(doc) => {
                    print!("{}", if cli.json { doc.to_json() + "\n" } else { doc.to_text() });
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            };
        }
        (Command::Corpus, None) => None,
        (_, None) => return fail(format!("`{}` needs an input document", cli.command.name())),
        (_, Some(path)) => {
            let text = match read_input(path) {
                Ok(t) => t,
                Err(e) => return fail(format!("{path}: {e}")),
            };
            match parse_input(&text) {
                Ok(d) => Some(d),
                Err(e) => return fail(format!("{path}: {e}")),
            }
        }
    };

    let outcome = driver::run(cli.command, doc.as_ref(), &opts);
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&outcome.report).expect("reports serialize"));
    } else {
        print!("{}", driver::render_text(&outcome.report));
    }
    ExitCode::from(outcome.exit_code as u8)
}
