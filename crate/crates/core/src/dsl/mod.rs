//! The `.tm` text format: a model section followed by subdiagrams, events,
//! chronologies and traces, in that order.

use std::collections::BTreeMap;
use std::fmt;

use crate::behavior::{ChronologyDecl, Trace};
use crate::diag::{Severity, SourceFile, Span};
use crate::eventize::{Event, Subdiagram};
use crate::model::StaticModel;

mod lexer;
mod parser;
mod printer;

pub use parser::{parse, parse_str};
pub use printer::{print, print_trace};

/// Everything one `.tm` file declares.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub model: StaticModel,
    pub subdiagrams: Vec<Subdiagram>,
    pub events: Vec<Event>,
    pub chronologies: Vec<ChronologyDecl>,
    pub traces: Vec<Trace>,
}

impl Default for Document {
    fn default() -> Self {
        Self {
            model: StaticModel::empty("unnamed"),
            subdiagrams: Vec::new(),
            events: Vec::new(),
            chronologies: Vec::new(),
            traces: Vec::new(),
        }
    }
}

impl Document {
    pub fn chronology(&self, id: &str) -> Option<&ChronologyDecl> {
        self.chronologies.iter().find(|c| c.id.as_str() == id)
    }

    pub fn trace(&self, id: &str) -> Option<&Trace> {
        self.traces.iter().find(|t| t.id().as_str() == id)
    }
}

/// Source positions of declared elements, keyed by id. Stages are keyed
/// `thimac.kind`.
pub type SpanTable = BTreeMap<String, Span>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parsed {
    pub document: Document,
    pub spans: SpanTable,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseError {
    Syntax {
        span: Span,
        expected: Vec<String>,
        found: String,
    },
    DuplicateSection {
        span: Span,
        section: String,
    },
    SectionOrder {
        span: Span,
        section: String,
        after: String,
    },
    /// Well-formed syntax that does not resolve, e.g. an arc naming a
    /// missing stage.
    Semantic {
        span: Span,
        message: String,
    },
}

impl ParseError {
    pub fn span(&self) -> Span {
        match self {
            ParseError::Syntax { span, .. }
            | ParseError::DuplicateSection { span, .. }
            | ParseError::SectionOrder { span, .. }
            | ParseError::Semantic { span, .. } => *span,
        }
    }

    pub fn render(&self, file: &SourceFile) -> String {
        file.render(Some(self.span()), Severity::Error, &self.to_string())
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::Syntax { expected, found, .. } => {
                write!(f, "expected {}, found {found}", expected.join(" or "))
            }
            ParseError::DuplicateSection { section, .. } => {
                write!(f, "only one `{section}` section is allowed")
            }
            ParseError::SectionOrder { section, after, .. } => {
                write!(f, "`{section}` cannot come after `{after}`")
            }
            ParseError::Semantic { message, .. } => f.write_str(message),
        }
    }
}

impl std::error::Error for ParseError {}
