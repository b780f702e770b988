//! Subdiagrams of a static model, decomposition coverage, and events
//! (a subdiagram paired with an optional time window).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::diag::{codes, sort_diagnostics, Diagnostic};
use crate::ids::{ArcId, EventId, StageRef, SubdiagramId};
use crate::model::{ArcKind, StaticModel};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subdiagram {
    pub id: SubdiagramId,
    pub label: String,
    pub stages: BTreeSet<StageRef>,
    pub arcs: BTreeSet<ArcId>,
}

impl Subdiagram {
    pub fn new(id: impl Into<SubdiagramId>, label: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            label: label.into(),
            stages: BTreeSet::new(),
            arcs: BTreeSet::new(),
        }
    }

    /// The whole model as a single subdiagram.
    pub fn whole(model: &StaticModel, id: impl Into<SubdiagramId>) -> Self {
        Self {
            id: id.into(),
            label: model.name().to_uppercase(),
            stages: model.stages().into_iter().collect(),
            arcs: model.arcs().iter().map(|a| a.id.clone()).collect(),
        }
    }
}

/// Checks that every referenced element exists and that every included flow
/// arc has both endpoints included. Trigger arcs may cross the boundary.
pub fn check_subdiagram(model: &StaticModel, sub: &Subdiagram) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for stage in &sub.stages {
        if !model.has_stage(stage) {
            out.push(
                Diagnostic::error(
                    codes::SUB_UNRESOLVED,
                    sub.id.as_str(),
                    format!("subdiagram `{}` references unknown stage `{stage}`", sub.id),
                )
                .with_element(stage.to_string()),
            );
        }
    }
    for arc_id in &sub.arcs {
        let Some(arc) = model.arc(arc_id) else {
            out.push(
                Diagnostic::error(
                    codes::SUB_UNRESOLVED,
                    sub.id.as_str(),
                    format!("subdiagram `{}` references unknown arc `{arc_id}`", sub.id),
                )
                .with_element(arc_id.to_string()),
            );
            continue;
        };
        if arc.kind != ArcKind::Flow {
            continue;
        }
        for end in [&arc.from, &arc.to] {
            if !sub.stages.contains(end) {
                out.push(
                    Diagnostic::error(
                        codes::SUB_CLOSURE,
                        sub.id.as_str(),
                        format!(
                            "subdiagram `{}` includes flow `{arc_id}` but not its endpoint `{end}`",
                            sub.id
                        ),
                    )
                    .with_element(arc_id.to_string()),
                );
            }
        }
    }
    sort_diagnostics(&mut out);
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct CoverageReport {
    pub uncovered_stages: BTreeSet<StageRef>,
    pub uncovered_arcs: BTreeSet<ArcId>,
    /// Stage and arc ids found in more than one subdiagram. Informational.
    pub multiply_covered: BTreeSet<String>,
}

impl CoverageReport {
    pub fn is_total(&self) -> bool {
        self.uncovered_stages.is_empty() && self.uncovered_arcs.is_empty()
    }

    /// Plain-text table, one row per reported element.
    pub fn to_table(&self) -> String {
        let mut s = String::from("coverage    element\n");
        for st in &self.uncovered_stages {
            let _ = writeln!(s, "uncovered   {st}");
        }
        for a in &self.uncovered_arcs {
            let _ = writeln!(s, "uncovered   {a}");
        }
        for m in &self.multiply_covered {
            let _ = writeln!(s, "overlap     {m}");
        }
        if self.is_total() {
            s.push_str("total       (every stage and arc covered)\n");
        }
        s
    }
}

pub fn coverage(model: &StaticModel, subs: &[Subdiagram]) -> CoverageReport {
    let mut stage_hits: BTreeMap<StageRef, usize> = BTreeMap::new();
    let mut arc_hits: BTreeMap<ArcId, usize> = BTreeMap::new();
    for sub in subs {
        for s in &sub.stages {
            *stage_hits.entry(s.clone()).or_default() += 1;
        }
        for a in &sub.arcs {
            *arc_hits.entry(a.clone()).or_default() += 1;
        }
    }
    let mut report = CoverageReport::default();
    for stage in model.stages() {
        match stage_hits.get(&stage).copied().unwrap_or(0) {
            0 => {
                report.uncovered_stages.insert(stage);
            }
            1 => {}
            _ => {
                report.multiply_covered.insert(stage.to_string());
            }
        }
    }
    for arc in model.arcs() {
        match arc_hits.get(&arc.id).copied().unwrap_or(0) {
            0 => {
                report.uncovered_arcs.insert(arc.id.clone());
            }
            1 => {}
            _ => {
                report.multiply_covered.insert(arc.id.to_string());
            }
        }
    }
    report
}

/// Inclusive window of timestamps an occurrence must land in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Window {
    pub start: u64,
    pub end: u64,
}

impl Window {
    pub fn contains(&self, t: u64) -> bool {
        self.start <= t && t <= self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub id: EventId,
    pub subdiagram: SubdiagramId,
    pub window: Option<Window>,
}

impl Event {
    pub fn new(id: impl Into<EventId>, subdiagram: impl Into<SubdiagramId>) -> Self {
        Self {
            id: id.into(),
            subdiagram: subdiagram.into(),
            window: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EventError {
    #[error("event `{event}` refers to unknown subdiagram `{subdiagram}`")]
    UnresolvedSubdiagram { event: EventId, subdiagram: SubdiagramId },
    #[error("event `{event}` has window {start}..{end} with start after end")]
    InvertedWindow { event: EventId, start: u64, end: u64 },
    #[error("event `{0}` is declared twice")]
    DuplicateEvent(EventId),
    #[error("subdiagram `{0}` is declared twice")]
    DuplicateSubdiagram(SubdiagramId),
}

impl EventError {
    pub fn to_diagnostic(&self) -> Diagnostic {
        let (code, element) = match self {
            EventError::UnresolvedSubdiagram { event, .. } => (codes::EVENT_UNRESOLVED, event.to_string()),
            EventError::InvertedWindow { event, .. } => (codes::EVENT_WINDOW, event.to_string()),
            EventError::DuplicateEvent(e) => (codes::EVENT_DUPLICATE, e.to_string()),
            EventError::DuplicateSubdiagram(s) => (codes::SUB_DUPLICATE, s.to_string()),
        };
        Diagnostic::error(code, element, self.to_string())
    }
}

/// Resolved events together with the subdiagrams they realize.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Eventized {
    pub events: Vec<Event>,
    pub subdiagrams: BTreeMap<SubdiagramId, Subdiagram>,
    pub warnings: Vec<Diagnostic>,
}

impl Eventized {
    pub fn event(&self, id: &EventId) -> Option<&Event> {
        self.events.iter().find(|e| &e.id == id)
    }

    pub fn subdiagram_of(&self, id: &EventId) -> Option<&Subdiagram> {
        self.event(id).and_then(|e| self.subdiagrams.get(&e.subdiagram))
    }
}

/// Resolves event declarations against subdiagrams. Two events over the same
/// subdiagram are allowed and reported as a warning.
pub fn eventize(subdiagrams: &[Subdiagram], decls: &[Event]) -> Result<Eventized, Vec<EventError>> {
    let mut errors = Vec::new();
    let mut subs = BTreeMap::new();
    for s in subdiagrams {
        if subs.insert(s.id.clone(), s.clone()).is_some() {
            errors.push(EventError::DuplicateSubdiagram(s.id.clone()));
        }
    }
    let mut seen = BTreeSet::new();
    let mut users: BTreeMap<&SubdiagramId, Vec<&EventId>> = BTreeMap::new();
    for e in decls {
        if !seen.insert(&e.id) {
            errors.push(EventError::DuplicateEvent(e.id.clone()));
        }
        if !subs.contains_key(&e.subdiagram) {
            errors.push(EventError::UnresolvedSubdiagram {
                event: e.id.clone(),
                subdiagram: e.subdiagram.clone(),
            });
        }
        if let Some(w) = e.window {
            if w.start > w.end {
                errors.push(EventError::InvertedWindow {
                    event: e.id.clone(),
                    start: w.start,
                    end: w.end,
                });
            }
        }
        users.entry(&e.subdiagram).or_default().push(&e.id);
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    let mut warnings: Vec<Diagnostic> = users
        .into_iter()
        .filter(|(_, evs)| evs.len() > 1)
        .map(|(sub, evs)| {
            let names: Vec<&str> = evs.iter().map(|e| e.as_str()).collect();
            let mut d = Diagnostic::warning(
                codes::EVENT_SHARED,
                evs[0].as_str(),
                format!("events {} share subdiagram `{sub}`", names.join(", ")),
            );
            for e in &evs[1..] {
                d = d.with_element(e.as_str());
            }
            d
        })
        .collect();
    sort_diagnostics(&mut warnings);
    Ok(Eventized {
        events: decls.to_vec(),
        subdiagrams: subs,
        warnings,
    })
}
