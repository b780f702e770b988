//! Executable thinging-machine (TM) models.
//!
//! A `.tm` document holds a static model (a tree of thimacs whose machines
//! create, process, release, transfer and receive things), subdiagrams of
//! it, events over those subdiagrams, chronologies ordering the events, and
//! traces. The model is true for a trace when the trace realizes the
//! chronology.
//!
//! ```
//! use tm_core::{dsl, behavior};
//!
//! let src = r#"
//! model cheese simplified {
//!   thimac cheese "Cheese" { stages: create, process; }
//!   thimac moon "Moon" { stages: create; }
//!   flow f1: cheese.create -> cheese.process;
//!   flow f2: cheese.process -> moon.create;
//! }
//! subdiagram S1 "PROCESSING-CHEESE" { stages: cheese.create, cheese.process; arcs: f1; }
//! subdiagram S2 "CREATING-MOON" { stages: cheese.process, moon.create; arcs: f2; }
//! event E1 = S1;
//! event E2 = S2;
//! chronology B { E1 -> E2; }
//! trace ok = [E1 @ 0, E2 @ 1];
//! "#;
//! let doc = dsl::parse_str(src).unwrap().document;
//! let b = behavior::build_chronology(&doc.events, &doc.chronologies[0]).unwrap();
//! let verdict = behavior::evaluate_trace(&b, &doc.traces[0]);
//! assert_eq!(verdict.summary(), "TRUE run=[E1,E2]");
//! ```

pub mod behavior;
pub mod check;
pub mod diag;
pub mod dsl;
pub mod eventize;
pub mod ids;
pub mod iso;
pub mod model;
pub mod render;
pub mod sim;
pub mod validate;

pub use behavior::{
    build_chronology, enumerate_runs, evaluate_trace, truth_of_event, Chronology, ChronologyDecl, ChronologyError,
    Occurrence, Trace, Verdict, Violation,
};
pub use check::{check_document, prepare, CheckReport};
pub use diag::{Diagnostic, Severity, SourceFile, Span};
pub use dsl::{Document, ParseError};
pub use eventize::{check_subdiagram, coverage, eventize, CoverageReport, Event, Eventized, Subdiagram, Window};
pub use ids::{ArcId, ChronologyId, EventId, StageRef, SubdiagramId, ThimacId, TraceId};
pub use iso::{models_isomorphic, Witness};
pub use model::{build_model, Arc, ArcKind, ModelDecl, Notation, StageKind, StaticModel, Thimac};
pub use render::{to_dot, Level, RenderOptions};
pub use sim::{simulate, BranchPolicy, SimError, SimState, Simulator};
pub use validate::{desugar, desugar_document, validate_static};
