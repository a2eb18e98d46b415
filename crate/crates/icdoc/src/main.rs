use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use icdoc::{BuildOptions, CheckOptions, Exit, GatesOptions, PipelineError};
use icdoc_core::BuildMode;

#[derive(Parser)]
#[command(
    name = "icdoc",
    version,
    about = "Build, publish and track interface control documents"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Draft,
    Publish,
}

#[derive(Subcommand)]
enum Command {
    /// Render an ICD and generate its artifacts and manifest
    Build {
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "draft")]
        mode: Mode,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Central glossary first, then local glossaries
        #[arg(long)]
        glossary: Vec<PathBuf>,
        #[arg(long)]
        history: Option<PathBuf>,
        #[arg(long)]
        tracker: Option<String>,
        #[arg(long)]
        src: Option<String>,
        /// Canonical URL of the published document
        #[arg(long)]
        canonical: Option<String>,
    },
    /// Compare local artifacts against a published manifest
    Check {
        #[arg(long)]
        manifest: String,
        #[arg(long)]
        local: PathBuf,
        #[arg(long)]
        tracker: Option<String>,
        #[arg(long, default_value = "anonymous")]
        reporter: String,
    },
    /// Run the tracker service
    Serve {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        listen: String,
    },
    /// Run the quality gates without writing anything
    Gates {
        file: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        glossary: Vec<PathBuf>,
        #[arg(long)]
        history: Option<PathBuf>,
        #[arg(long)]
        tracker: Option<String>,
    },
}

fn run(cli: Cli) -> Result<Exit, PipelineError> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Build {
            file,
            out: out_dir,
            mode,
            config,
            glossary,
            history,
            tracker,
            src,
            canonical,
        } => {
            let mode = match mode {
                Mode::Draft => BuildMode::Draft,
                Mode::Publish => BuildMode::Publish,
            };
            let opts = BuildOptions {
                config,
                glossaries: glossary,
                history,
                tracker,
                src,
                canonical,
                ..BuildOptions::new(file, out_dir, mode)
            };
            Ok(icdoc::build(&opts, &mut out)?.exit)
        }
        Command::Check {
            manifest,
            local,
            tracker,
            reporter,
        } => {
            let opts = CheckOptions {
                manifest,
                local_dir: local,
                tracker,
                reporter,
            };
            Ok(icdoc::check(&opts, &mut out)?.exit)
        }
        Command::Serve { state, listen } => {
            icdoc::serve(state, &listen)?;
            Ok(Exit::Ok)
        }
        Command::Gates {
            file,
            config,
            glossary,
            history,
            tracker,
        } => {
            let opts = GatesOptions {
                source: file,
                config,
                glossaries: glossary,
                history,
                tracker,
            };
            Ok(icdoc::gates_dry_run(&opts, &mut out)?.1)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors are configuration errors; --help and --version are not.
            return ExitCode::from(if e.use_stderr() {
                Exit::Io.code() as u8
            } else {
                0
            });
        }
    };
    let exit = match run(cli) {
        Ok(exit) => exit,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "error: {e}");
            e.exit()
        }
    };
    ExitCode::from(exit.code() as u8)
}
