//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for domain errors (invalid net, state limit,
//! unsafe net, unreachable marking), 2 for usage and parse errors. Results go
//! to `out`; diagnostics go to `err`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::equivalence::{change_region, find_equivalence_mapping, purge};
use crate::io::{parse_net, serialize_net, MappingDocument};
use crate::net::{validate_structural, WfNet};
use crate::oracle::{oracle_tts, random_wfnet, sufficiency_bound, GenParams};
use crate::reach::{
    build_reachability, to_dot, validate_behavioral, MarkingKey, ReachGraph, DEFAULT_MAX_STATES,
};
use crate::tts::{format_tts, tts_for_node, TtsFamily};

#[derive(Debug, Parser)]
#[command(
    name = "histeq",
    version,
    about = "History-equivalence state mapping between workflow nets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run structural and behavioral WF-net checks.
    Validate { net: PathBuf },
    /// Build the reachability graph and report its size.
    Reach {
        net: PathBuf,
        /// Write the graph in DOT format to this file.
        #[arg(long, value_name = "FILE")]
        dot: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
        max_states: usize,
    },
    /// Print the trace transition sets of one marking.
    Tts {
        net: PathBuf,
        /// Comma-separated marked places.
        #[arg(long)]
        marking: String,
        /// Do not remove empty transitions from the sets.
        #[arg(long)]
        keep_empty: bool,
        #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
        max_states: usize,
    },
    /// Map every old-net marking to its history-equivalent new-net markings.
    Map {
        #[arg(long)]
        old: PathBuf,
        #[arg(long)]
        new: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
        max_states: usize,
        /// Exit with status 1 when some old marking has no equivalent.
        #[arg(long)]
        fail_on_change_region: bool,
    },
    /// Brute-force trace enumeration for one marking.
    #[command(hide = true)]
    Oracle {
        net: PathBuf,
        #[arg(long)]
        marking: String,
        #[arg(long)]
        bound: Option<usize>,
        #[arg(long)]
        keep_empty: bool,
        #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
        max_states: usize,
    },
    /// Print a random sound net.
    #[command(hide = true)]
    Generate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        max_places: usize,
        #[arg(long, default_value_t = 12)]
        max_transitions: usize,
        #[arg(long, default_value_t = 0.3)]
        loop_probability: f64,
        #[arg(long, default_value_t = 0.3)]
        parallel_probability: f64,
        #[arg(long, default_value_t = 0.0)]
        empty_probability: f64,
    },
}

enum Failure {
    Usage(String),
    Domain(String),
}

type CmdResult = Result<i32, Failure>;

/// Runs the CLI with `args` (including the program name) and returns the
/// process exit code.
pub fn cli_main<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    2
                }
            };
        }
    };
    match run(cli.command, out) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
        Err(Failure::Domain(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
    }
}

fn io_failure(e: std::io::Error) -> Failure {
    Failure::Domain(format!("write failed: {e}"))
}

fn load(path: &Path) -> Result<WfNet, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    parse_net(&text).map_err(|e| Failure::Usage(format!("{}: {}: {e}", path.display(), e.code())))
}

// Structural check followed by graph construction.
fn graph_of(net: &WfNet, max_states: usize) -> Result<ReachGraph, Failure> {
    let report = validate_structural(net);
    if !report.is_ok() {
        return Err(Failure::Domain(format!(
            "net `{}` is not a valid WF-net:\n{}",
            net.name(),
            report.to_string().trim_end()
        )));
    }
    build_reachability(net, max_states)
        .map_err(|e| Failure::Domain(format!("net `{}`: {}: {e}", net.name(), e.code())))
}

fn node_for(net: &WfNet, g: &ReachGraph, marking: &str) -> Result<crate::reach::NodeId, Failure> {
    let key = MarkingKey::parse(marking);
    if let Some(p) = key.places().iter().find(|p| net.place(p).is_none()) {
        return Err(Failure::Usage(format!("unknown place `{p}` in --marking")));
    }
    g.node(&key)
        .ok_or_else(|| Failure::Domain(format!("marking {key} is not reachable")))
}

fn write_family(out: &mut dyn Write, family: &TtsFamily) -> Result<(), Failure> {
    for t in family {
        writeln!(out, "{}", format_tts(t)).map_err(io_failure)?;
    }
    Ok(())
}

fn run(command: Command, out: &mut dyn Write) -> CmdResult {
    match command {
        Command::Validate { net } => {
            let net = load(&net)?;
            let structural = validate_structural(&net);
            let mut ok = structural.is_ok();
            write_report(out, "structural", &structural)?;
            if ok {
                let g = build_reachability(&net, DEFAULT_MAX_STATES)
                    .map_err(|e| Failure::Domain(format!("{}: {e}", e.code())))?;
                let behavioral = validate_behavioral(&net, &g);
                ok = behavioral.is_ok();
                write_report(out, "behavioral", &behavioral)?;
            } else {
                writeln!(out, "behavioral: skipped").map_err(io_failure)?;
            }
            Ok(if ok { 0 } else { 1 })
        }
        Command::Reach {
            net,
            dot,
            max_states,
        } => {
            let net = load(&net)?;
            let g = graph_of(&net, max_states)?;
            writeln!(out, "nodes: {}", g.node_count()).map_err(io_failure)?;
            writeln!(out, "edges: {}", g.edge_count()).map_err(io_failure)?;
            if let Some(path) = dot {
                fs::write(&path, to_dot(&g))
                    .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
            }
            Ok(0)
        }
        Command::Tts {
            net,
            marking,
            keep_empty,
            max_states,
        } => {
            let net = load(&net)?;
            let g = graph_of(&net, max_states)?;
            let n = node_for(&net, &g, &marking)?;
            let mut family = tts_for_node(&g, n);
            if !keep_empty {
                family = purge(&family, &net.empty_labels());
            }
            write_family(out, &family)?;
            Ok(0)
        }
        Command::Map {
            old,
            new,
            format,
            max_states,
            fail_on_change_region,
        } => {
            let old = load(&old)?;
            let new = load(&new)?;
            graph_of(&old, max_states)?;
            graph_of(&new, max_states)?;
            let table = find_equivalence_mapping(&old, &new, max_states)
                .map_err(|e| Failure::Domain(format!("{}: {e}", e.code())))?;
            let doc = MappingDocument::new(old.name(), new.name(), &table);
            let text = match format {
                Format::Table => doc.to_table(),
                Format::Json => doc.to_json(),
                Format::Csv => doc.to_csv(),
            };
            out.write_all(text.as_bytes()).map_err(io_failure)?;
            Ok(
                if fail_on_change_region && !change_region(&table).is_empty() {
                    1
                } else {
                    0
                },
            )
        }
        Command::Oracle {
            net,
            marking,
            bound,
            keep_empty,
            max_states,
        } => {
            let net = load(&net)?;
            let g = graph_of(&net, max_states)?;
            let n = node_for(&net, &g, &marking)?;
            let bound = bound.unwrap_or_else(|| sufficiency_bound(&g));
            let mut family = oracle_tts(&g, n, bound)
                .map_err(|e| Failure::Usage(format!("{}: {e}", e.code())))?;
            if !keep_empty {
                family = purge(&family, &net.empty_labels());
            }
            write_family(out, &family)?;
            Ok(0)
        }
        Command::Generate {
            seed,
            max_places,
            max_transitions,
            loop_probability,
            parallel_probability,
            empty_probability,
        } => {
            for (name, p) in [
                ("loop", loop_probability),
                ("parallel", parallel_probability),
                ("empty", empty_probability),
            ] {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Failure::Usage(format!(
                        "--{name}-probability must be in [0, 1]"
                    )));
                }
            }
            let net = random_wfnet(&GenParams {
                seed,
                max_places,
                max_transitions,
                loop_probability,
                parallel_probability,
                empty_probability,
            });
            out.write_all(serialize_net(&net).as_bytes())
                .map_err(io_failure)?;
            Ok(0)
        }
    }
}

fn write_report(
    out: &mut dyn Write,
    title: &str,
    report: &crate::net::ValidationReport,
) -> Result<(), Failure> {
    if report.is_ok() {
        writeln!(out, "{title}: ok").map_err(io_failure)?;
    } else {
        writeln!(out, "{title}: {} violation(s)", report.violations.len()).map_err(io_failure)?;
        for v in &report.violations {
            writeln!(out, "  {}: {}", v.code, v.message).map_err(io_failure)?;
        }
    }
    Ok(())
}
