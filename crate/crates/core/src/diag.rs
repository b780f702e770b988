//! Source positions and diagnostics shared by the parser and the checkers.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;

/// Byte range into a source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn to(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }
}

#[derive(Debug, Clone)]
pub struct SourceFile {
    path: PathBuf,
    text: String,
    line_starts: Vec<usize>,
}

impl SourceFile {
    pub fn new(path: impl Into<PathBuf>, text: impl Into<String>) -> Self {
        let text = text.into();
        let line_starts = std::iter::once(0)
            .chain(text.match_indices('\n').map(|(i, _)| i + 1))
            .collect();
        Self {
            path: path.into(),
            text,
            line_starts,
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// 1-based line and column (columns count chars, not bytes).
    pub fn line_col(&self, offset: usize) -> (usize, usize) {
        let offset = offset.min(self.text.len());
        let line = match self.line_starts.binary_search(&offset) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        let start = self.line_starts[line];
        let col = self
            .text
            .get(start..offset)
            .map(|s| s.chars().count())
            .unwrap_or(offset - start);
        (line + 1, col + 1)
    }

    /// `file:line:col: severity: message`
    pub fn render(&self, span: Option<Span>, severity: Severity, message: &str) -> String {
        let (line, col) = self.line_col(span.map_or(0, |s| s.start));
        format!("{}:{}:{}: {}: {}", self.path.display(), line, col, severity, message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

/// Stable diagnostic codes.
pub mod codes {
    pub const FLOW_ILLEGAL: &str = "W-FLOW-ILLEGAL";
    pub const TRIGGER_SELF: &str = "W-TRIGGER-SELF";
    pub const STAGE_DANGLING: &str = "W-STAGE-DANGLING";
    pub const CREATE_INFLOW: &str = "E-CREATE-INFLOW";
    pub const MODE: &str = "E-MODE";

    pub const SUB_UNRESOLVED: &str = "E-SUB-UNRESOLVED";
    pub const SUB_CLOSURE: &str = "E-SUB-CLOSURE";
    pub const SUB_DUPLICATE: &str = "E-SUB-DUPLICATE";
    pub const EVENT_UNRESOLVED: &str = "E-EVENT-UNRESOLVED";
    pub const EVENT_WINDOW: &str = "E-EVENT-WINDOW";
    pub const EVENT_DUPLICATE: &str = "E-EVENT-DUPLICATE";
    pub const EVENT_SHARED: &str = "W-EVENT-SHARED";
    pub const CHRONOLOGY: &str = "E-CHRONOLOGY";
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub code: &'static str,
    pub severity: Severity,
    pub span: Option<Span>,
    pub message: String,
    /// Ids of the offending elements; never empty.
    pub elements: Vec<String>,
}

impl Diagnostic {
    pub fn error(code: &'static str, element: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            code,
            severity: Severity::Error,
            span: None,
            message: message.into(),
            elements: vec![element.into()],
        }
    }

    pub fn warning(code: &'static str, element: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Warning,
            ..Self::error(code, element, message)
        }
    }

    pub fn with_element(mut self, element: impl Into<String>) -> Self {
        self.elements.push(element.into());
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    pub fn primary_element(&self) -> &str {
        self.elements.first().map(String::as_str).unwrap_or("")
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.code, self.message)
    }
}

/// Sorts by (primary element id, code), the order checkers report in.
pub fn sort_diagnostics(diags: &mut [Diagnostic]) {
    diags.sort_by(|a, b| {
        (a.primary_element(), a.code, &a.elements, &a.message).cmp(&(
            b.primary_element(),
            b.code,
            &b.elements,
            &b.message,
        ))
    });
}
