//! `tm`: check, desugar, evaluate, simulate, enumerate and render
//! thinging-machine documents.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use tm_core::behavior::enumerate_runs;
use tm_core::check::attach_spans;
use tm_core::dsl::{self, Document, Parsed};
use tm_core::*;

#[derive(Parser)]
#[command(name = "tm", version, about = "Thinging-machine model toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and validate a document and report subdiagram coverage.
    Check { file: PathBuf },
    /// Print the document with elided flows expanded to full notation.
    Desugar { file: PathBuf },
    /// Decide whether a trace realizes a chronology.
    Evaluate {
        file: PathBuf,
        #[arg(long)]
        chronology: String,
        #[arg(long)]
        trace: String,
    },
    /// Run the model and print the trace it produces.
    Simulate {
        file: PathBuf,
        #[arg(long)]
        chronology: String,
        #[arg(long, conflicts_with = "choose")]
        seed: Option<u64>,
        /// Exclusive-group choice, `group=event`; repeatable.
        #[arg(long, value_parser = parse_choice)]
        choose: Vec<(String, String)>,
        /// Id of the printed trace.
        #[arg(long, default_value = "sim")]
        name: String,
    },
    /// Print every maximal run of a chronology.
    Runs {
        file: PathBuf,
        #[arg(long)]
        chronology: String,
        #[arg(long, default_value_t = 1000)]
        bound: usize,
    },
    /// Emit Graphviz DOT.
    Render {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = LevelArg::Static)]
        level: LevelArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Chronology for the behavior level (default: the first).
        #[arg(long)]
        chronology: Option<String>,
        /// Element ids to emphasize; repeatable or comma-separated.
        #[arg(long, value_delimiter = ',')]
        highlight: Vec<String>,
        /// Draw thimacs flat instead of as nested clusters.
        #[arg(long)]
        flat: bool,
    },
    /// Check whether two static models are isomorphic.
    Iso { a: PathBuf, b: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Static,
    Overlay,
    Behavior,
}

fn parse_choice(s: &str) -> Result<(String, String), String> {
    match s.split_once('=') {
        Some((g, e)) if !g.is_empty() && !e.is_empty() => Ok((g.to_string(), e.to_string())),
        _ => Err(format!("expected group=event, got `{s}`")),
    }
}

/// Outcome of a subcommand that ran to completion.
enum Outcome {
    Ok,
    /// Invalid model or false verdict; details already printed.
    Fail,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("tm: {e:#}");
            ExitCode::from(2)
        }
    }
}

// Stdout writes ignore errors so that `tm ... | head` exits quietly.
macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = write!(std::io::stdout().lock(), $($t)*);
    }};
}

macro_rules! outln {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($t)*);
    }};
}

fn machine_block(v: &serde_json::Value) {
    outln!("```json\n{}\n```", serde_json::to_string_pretty(v).expect("json"));
}

/// Reads and parses; parse errors are printed and yield `None`.
fn load(path: &Path) -> anyhow::Result<Option<(SourceFile, Parsed)>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let file = SourceFile::new(path, text);
    match dsl::parse(&file) {
        Ok(p) => Ok(Some((file, p))),
        Err(errs) => {
            for e in &errs {
                eprintln!("{}", e.render(&file));
            }
            Ok(None)
        }
    }
}

macro_rules! load_or_fail {
    ($path:expr) => {
        match load($path)? {
            Some(x) => x,
            None => return Ok(Outcome::Fail),
        }
    };
}

fn run(cmd: Cmd) -> anyhow::Result<Outcome> {
    match cmd {
        Cmd::Check { file } => check(&file),
        Cmd::Desugar { file } => {
            let (_, p) = load_or_fail!(&file);
            match desugar_document(&p.document) {
                Ok(d) => {
                    out!("{}", dsl::print(&d));
                    Ok(Outcome::Ok)
                }
                Err(e) => {
                    eprintln!("{}: {e}", file.display());
                    if let validate::DesugarError::Invalid(diags) = &e {
                        for d in diags {
                            eprintln!("  {}: {}", d.code, d.message);
                        }
                    }
                    Ok(Outcome::Fail)
                }
            }
        }
        Cmd::Evaluate {
            file,
            chronology,
            trace,
        } => {
            let (_, p) = load_or_fail!(&file);
            let Some((_, ch)) = prepared(&p.document, &chronology) else {
                return Ok(Outcome::Fail);
            };
            let Some(t) = p.document.trace(&trace) else {
                bail!("no trace `{trace}` in {}", file.display());
            };
            let v = evaluate_trace(&ch, t);
            if v.is_true() {
                outln!("{}", v.summary());
            } else {
                eprintln!("{}", v.summary());
            }
            machine_block(&serde_json::to_value(&v)?);
            Ok(if v.is_true() { Outcome::Ok } else { Outcome::Fail })
        }
        Cmd::Simulate {
            file,
            chronology,
            seed,
            choose,
            name,
        } => {
            let (_, p) = load_or_fail!(&file);
            let Some((ev, ch)) = prepared(&p.document, &chronology) else {
                return Ok(Outcome::Fail);
            };
            let policy = if choose.is_empty() {
                BranchPolicy::Seeded(seed.unwrap_or(0))
            } else {
                BranchPolicy::Scripted(choose.into_iter().map(|(g, e)| (g, EventId::new(e))).collect())
            };
            if !ids::is_identifier(&name) {
                bail!("trace name `{name}` is not an identifier");
            }
            match Simulator::new(&p.document.model, &ev, &ch).run(&policy, name.as_str()) {
                Ok((t, _)) => {
                    outln!("{}", dsl::print_trace(&t));
                    Ok(Outcome::Ok)
                }
                Err(e) => {
                    eprintln!("{}: simulation failed: {e}", file.display());
                    Ok(Outcome::Fail)
                }
            }
        }
        Cmd::Runs {
            file,
            chronology,
            bound,
        } => {
            let (_, p) = load_or_fail!(&file);
            let Some((_, ch)) = prepared(&p.document, &chronology) else {
                return Ok(Outcome::Fail);
            };
            match enumerate_runs(&ch, bound) {
                Ok(runs) => {
                    for r in runs {
                        let ids: Vec<&str> = r.iter().map(|e| e.as_str()).collect();
                        outln!("[{}]", ids.join(","));
                    }
                    Ok(Outcome::Ok)
                }
                Err(e) => {
                    eprintln!("{}: {e}", file.display());
                    Ok(Outcome::Fail)
                }
            }
        }
        Cmd::Render {
            file,
            level,
            output,
            chronology,
            highlight,
            flat,
        } => {
            let (_, p) = load_or_fail!(&file);
            let opts = RenderOptions {
                level: match level {
                    LevelArg::Static => Level::Static,
                    LevelArg::Overlay => Level::Overlay,
                    LevelArg::Behavior => Level::Behavior,
                },
                highlight: highlight.into_iter().collect::<BTreeSet<_>>(),
                clusters: !flat,
                chronology: chronology.map(ChronologyId::new),
            };
            let dot = match to_dot(&p.document, &opts) {
                Ok(d) => d,
                Err(e) => {
                    eprintln!("{}: {e}", file.display());
                    return Ok(Outcome::Fail);
                }
            };
            match output {
                Some(o) => std::fs::write(&o, dot).with_context(|| format!("cannot write {}", o.display()))?,
                None => out!("{dot}"),
            }
            Ok(Outcome::Ok)
        }
        Cmd::Iso { a, b } => {
            let (_, pa) = load_or_fail!(&a);
            let (_, pb) = load_or_fail!(&b);
            match models_isomorphic(&pa.document.model, &pb.document.model) {
                Ok(Some(w)) => {
                    outln!("ISOMORPHIC");
                    for (x, y) in &w.thimacs {
                        outln!("  thimac {x} -> {y}");
                    }
                    for (x, y) in &w.arcs {
                        outln!("  arc {x} -> {y}");
                    }
                    machine_block(&json!({ "isomorphic": true, "thimacs": w.thimacs, "arcs": w.arcs }));
                    Ok(Outcome::Ok)
                }
                Ok(None) => {
                    outln!("NOT ISOMORPHIC");
                    machine_block(&json!({ "isomorphic": false }));
                    Ok(Outcome::Fail)
                }
                Err(e) => {
                    eprintln!("tm: {e}");
                    Ok(Outcome::Fail)
                }
            }
        }
    }
}

fn check(path: &Path) -> anyhow::Result<Outcome> {
    let (file, p) = load_or_fail!(path);
    let mut report = check_document(&p.document);
    attach_spans(&mut report.diagnostics, &p.spans);
    for d in &report.diagnostics {
        outln!(
            "{}",
            file.render(d.span, d.severity, &format!("{}: {}", d.code, d.message))
        );
    }
    out!("{}", report.coverage.to_table());
    let counts: BTreeMap<&str, usize> = [("errors", report.error_count()), ("warnings", report.warning_count())].into();
    machine_block(&json!({ "summary": counts, "report": report }));
    Ok(if report.is_ok() { Outcome::Ok } else { Outcome::Fail })
}

/// Resolves events and the chronology, printing the problem on failure.
fn prepared(doc: &Document, chronology: &str) -> Option<(Eventized, Chronology)> {
    match prepare(doc, chronology) {
        Ok(x) => Some(x),
        Err(e) => {
            eprintln!("tm: {e}");
            None
        }
    }
}
