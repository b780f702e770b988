//! Whole-document checking: model validation, subdiagram closure, events,
//! chronologies and coverage in one report.

use serde::Serialize;
use thiserror::Error;

use crate::behavior::{build_chronology, Chronology};
use crate::diag::{codes, sort_diagnostics, Diagnostic};
use crate::dsl::{Document, SpanTable};
use crate::eventize::{check_subdiagram, coverage, eventize, CoverageReport, EventError, Eventized};
use crate::ids::ChronologyId;
use crate::validate::validate_static;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub diagnostics: Vec<Diagnostic>,
    pub coverage: CoverageReport,
}

impl CheckReport {
    pub fn error_count(&self) -> usize {
        self.diagnostics.iter().filter(|d| d.is_error()).count()
    }

    pub fn warning_count(&self) -> usize {
        self.diagnostics.len() - self.error_count()
    }

    pub fn is_ok(&self) -> bool {
        self.error_count() == 0
    }
}

pub fn check_document(doc: &Document) -> CheckReport {
    let mut diags = validate_static(&doc.model);
    for s in &doc.subdiagrams {
        diags.extend(check_subdiagram(&doc.model, s));
    }
    match eventize(&doc.subdiagrams, &doc.events) {
        Ok(ev) => diags.extend(ev.warnings),
        Err(errs) => diags.extend(errs.iter().map(EventError::to_diagnostic)),
    }
    for c in &doc.chronologies {
        if let Err(e) = build_chronology(&doc.events, c) {
            diags.push(Diagnostic::error(codes::CHRONOLOGY, c.id.as_str(), e.to_string()));
        }
    }
    sort_diagnostics(&mut diags);
    CheckReport {
        diagnostics: diags,
        coverage: coverage(&doc.model, &doc.subdiagrams),
    }
}

/// Fills in each diagnostic's span from its first element that has one.
pub fn attach_spans(diags: &mut [Diagnostic], spans: &SpanTable) {
    for d in diags.iter_mut().filter(|d| d.span.is_none()) {
        d.span = d.elements.iter().find_map(|e| spans.get(e).copied());
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrepareError {
    #[error("no chronology `{0}`")]
    UnknownChronology(ChronologyId),
    #[error("events do not resolve: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Events(Vec<EventError>),
    #[error(transparent)]
    Chronology(#[from] crate::behavior::ChronologyError),
}

/// Resolves events and builds the named chronology.
pub fn prepare(doc: &Document, chronology: &str) -> Result<(Eventized, Chronology), PrepareError> {
    let decl = doc
        .chronology(chronology)
        .ok_or_else(|| PrepareError::UnknownChronology(ChronologyId::new(chronology)))?;
    let ev = eventize(&doc.subdiagrams, &doc.events).map_err(PrepareError::Events)?;
    let ch = build_chronology(&doc.events, decl)?;
    Ok((ev, ch))
}
