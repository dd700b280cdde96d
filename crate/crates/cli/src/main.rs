//! Command-line front end for the stability toolkit.

mod config;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::ConfiguredSystem;
use qstab_core::builtin;
use qstab_core::report::{self, AnalysisOptions, Report};

#[derive(Parser)]
#[command(
    name = "qstab",
    version,
    about = "Stability certification for two-block linear time-varying systems \
             with quaternion coefficients"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a block system described by a TOML config.
    Analyze {
        config: String,
        /// Write the machine-readable report here (overrides [output]).
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write one CSV per series into this directory.
        #[arg(long)]
        csv_dir: Option<PathBuf>,
        /// What to print on stdout.
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Boundedness test for (p·φ')' + q·φ' + r·φ = 0 from a TOML config.
    SecondOrder {
        config: String,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        csv_dir: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Run a built-in example system.
    Example {
        /// Builtin name; run with an unknown name to list what exists.
        name: String,
        /// Parameter overrides, key=value (repeatable).
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        csv_dir: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Skip the empirical basis sweep.
        #[arg(long)]
        no_verify: bool,
    },
    /// Re-render a saved report.
    Emit {
        report: PathBuf,
        #[arg(long, value_enum)]
        format: Format,
        /// Output file (json/table) or directory (csv); stdout by default.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Analyze {
            config,
            report,
            csv_dir,
            format,
        } => {
            let doc = config::load(&config).map_err(|e| e.to_string())?;
            let configured = config::build_system(&doc.system).map_err(|e| e.to_string())?;
            match configured {
                ConfiguredSystem::Blocks {
                    name,
                    system,
                    notes,
                    default_horizon,
                } => {
                    let horizon = doc
                        .run
                        .horizon
                        .or(default_horizon)
                        .ok_or("config needs [run].horizon")?;
                    let mut opts = AnalysisOptions::new(name, horizon);
                    opts.extra_notes = notes;
                    if let Some(tol) = doc.run.tol {
                        opts.tol = tol;
                    }
                    opts.rivals = config::rival_list(&doc.run).map_err(|e| e.to_string())?;
                    opts.verify = doc.run.verify.unwrap_or(true);
                    opts.envelopes = config::build_envelopes(&doc.envelopes, system.t0)
                        .map_err(|e| e.to_string())?;
                    let analysis = report::analyze(&system, &opts).map_err(|e| e.to_string())?;
                    emit_all(
                        &Report::Analysis(analysis),
                        &doc.output,
                        report,
                        csv_dir,
                        format,
                    )
                }
                ConfiguredSystem::SecondOrder { name, p, q, r, t0 } => {
                    let horizon = doc.run.horizon.ok_or("config needs [run].horizon")?;
                    let rep = report::analyze_second_order(
                        &name,
                        &p,
                        &q,
                        &r,
                        t0,
                        horizon,
                        doc.run.tol.unwrap_or(1e-9),
                    )
                    .map_err(|e| e.to_string())?;
                    emit_all(&Report::SecondOrder(rep), &doc.output, report, csv_dir, format)
                }
            }
        }
        Command::SecondOrder {
            config,
            report,
            csv_dir,
            format,
        } => {
            let doc = config::load(&config).map_err(|e| e.to_string())?;
            match config::build_system(&doc.system).map_err(|e| e.to_string())? {
                ConfiguredSystem::SecondOrder { name, p, q, r, t0 } => {
                    let horizon = doc.run.horizon.ok_or("config needs [run].horizon")?;
                    let rep = report::analyze_second_order(
                        &name,
                        &p,
                        &q,
                        &r,
                        t0,
                        horizon,
                        doc.run.tol.unwrap_or(1e-9),
                    )
                    .map_err(|e| e.to_string())?;
                    emit_all(&Report::SecondOrder(rep), &doc.output, report, csv_dir, format)
                }
                ConfiguredSystem::Blocks { .. } => {
                    Err("this config describes a block system; use `analyze`".to_string())
                }
            }
        }
        Command::Example {
            name,
            params,
            horizon,
            report,
            csv_dir,
            format,
            no_verify,
        } => {
            let mut map = BTreeMap::new();
            for p in &params {
                let (k, v) = p
                    .split_once('=')
                    .ok_or_else(|| format!("--param expects key=value, got '{p}'"))?;
                map.insert(k.trim().to_string(), v.trim().to_string());
            }
            let built = builtin::build(&name, &map).map_err(|e| {
                format!(
                    "{e}\navailable builtins:\n{}",
                    builtin::names()
                        .iter()
                        .map(|n| format!("  {n}: {}", builtin::describe(n).unwrap_or("")))
                        .collect::<Vec<_>>()
                        .join("\n")
                )
            })?;
            let mut opts =
                AnalysisOptions::new(name, horizon.unwrap_or(built.default_horizon));
            opts.extra_notes = built.notes;
            opts.verify = !no_verify;
            let analysis = report::analyze(&built.system, &opts).map_err(|e| e.to_string())?;
            emit_all(
                &Report::Analysis(analysis),
                &config::OutputSection::default(),
                report,
                csv_dir,
                format,
            )
        }
        Command::Emit {
            report: path,
            format,
            out,
        } => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            let rep = Report::from_json(&text).map_err(|e| e.to_string())?;
            match format {
                Format::Json => write_or_print(&rep.to_json(), out.as_deref()),
                Format::Table => write_or_print(&rep.table(), out.as_deref()),
                Format::Csv => {
                    let dir = out.ok_or("--format csv needs --out <dir>")?;
                    write_csv_dir(&rep, &dir)
                }
            }
        }
    }
}

fn emit_all(
    rep: &Report,
    output: &config::OutputSection,
    report_flag: Option<PathBuf>,
    csv_flag: Option<PathBuf>,
    format_flag: Option<Format>,
) -> Result<(), String> {
    let report_path = report_flag.or_else(|| output.report.as_ref().map(PathBuf::from));
    if let Some(p) = report_path {
        std::fs::write(&p, rep.to_json())
            .map_err(|e| format!("cannot write {}: {e}", p.display()))?;
    }
    let csv_path = csv_flag.or_else(|| output.csv_dir.as_ref().map(PathBuf::from));
    if let Some(dir) = csv_path {
        write_csv_dir(rep, &dir)?;
    }
    let format = format_flag.unwrap_or_else(|| match output.format.as_deref() {
        Some("json") => Format::Json,
        Some("csv") => Format::Csv,
        _ => Format::Table,
    });
    match format {
        Format::Json => println!("{}", rep.to_json()),
        Format::Table => println!("{}", rep.table()),
        Format::Csv => {
            // CSV on stdout: concatenate with filename headers.
            for (name, body) in rep.csv_series() {
                println!("# {name}\n{body}");
            }
        }
    }
    Ok(())
}

fn write_or_print(text: &str, out: Option<&Path>) -> Result<(), String> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn write_csv_dir(rep: &Report, dir: &Path) -> Result<(), String> {
    std::fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    for (name, body) in rep.csv_series() {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    Ok(())
}
