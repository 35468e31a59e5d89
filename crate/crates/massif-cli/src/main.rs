use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use massif::project::{self, ExportFormat, OUTPUT_DIR_ENV};

/// Build geolocated rock-mass models from two traced KML views.
#[derive(Parser)]
#[command(name = "massif", version, arg_required_else_help = true)]
#[command(after_help = "Environment:\n  MASSIF_OUTPUT_DIR  overrides the [output] dir setting")]
struct Cli {
    /// Project file to operate on
    #[arg(long, global = true, default_value = "project.toml")]
    project: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scaffold a project directory with sample data
    Init {
        /// Where to put it
        #[arg(default_value = ".")]
        dir: PathBuf,
        /// Overwrite an existing project
        #[arg(long)]
        force: bool,
    },
    /// Check the inputs without building anything
    Validate,
    /// Intersect the two views; writes the report and model.json
    Build,
    /// Write the model in the chosen format
    Export {
        #[arg(long, value_enum)]
        format: FormatArg,
    },
    /// Print the build summary
    Report {
        /// Emit JSON instead of text
        #[arg(long)]
        machine: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Obj,
    Kml,
    Dae,
    KmlExtruded,
}

impl From<FormatArg> for ExportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Obj => ExportFormat::Obj,
            FormatArg::Kml => ExportFormat::Kml,
            FormatArg::Dae => ExportFormat::Dae,
            FormatArg::KmlExtruded => ExportFormat::KmlExtruded,
        }
    }
}

fn warn_all(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn run(cli: Cli) -> massif::Result<()> {
    match cli.command {
        Command::Init { dir, force } => {
            for path in project::cmd_init(&dir, force)? {
                println!("created {}", path.display());
            }
        }
        Command::Validate => {
            let warnings = project::cmd_validate(&cli.project)?;
            warn_all(&warnings);
            println!("ok");
        }
        Command::Build => {
            let report = project::cmd_build(&cli.project)?;
            warn_all(&report.warnings);
            print!("{}", project::render_report(&report));
        }
        Command::Export { format } => {
            let (written, warnings) = project::cmd_export(&cli.project, format.into())?;
            warn_all(&warnings);
            for path in written {
                println!("wrote {}", path.display());
            }
        }
        Command::Report { machine } => {
            print!("{}", project::cmd_report(&cli.project, machine)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    // keep the env var name in the binary in sync with the library
    debug_assert_eq!(OUTPUT_DIR_ENV, "MASSIF_OUTPUT_DIR");
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
