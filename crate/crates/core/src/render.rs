//! Graphviz DOT output for the static model, its subdiagram overlay, and a
//! chronology. Layout is left to the DOT consumer.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::behavior::{build_chronology, ChronologyError};
use crate::dsl::Document;
use crate::ids::ChronologyId;
use crate::model::{ArcKind, Thimac};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Level {
    #[default]
    Static,
    /// Static model plus one box per subdiagram linked to its stages.
    Overlay,
    /// Events and chronology edges.
    Behavior,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderOptions {
    pub level: Level,
    /// Element ids to emphasize: thimacs, stages (`t.kind`), arcs,
    /// subdiagrams or events.
    pub highlight: BTreeSet<String>,
    /// Draw thimacs as nested clusters.
    pub clusters: bool,
    /// Chronology for [`Level::Behavior`]; the first one when unset.
    pub chronology: Option<ChronologyId>,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            level: Level::Static,
            highlight: BTreeSet::new(),
            clusters: true,
            chronology: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RenderError {
    #[error("cannot highlight `{0}`: no such element")]
    UnknownHighlightId(String),
    #[error("no chronology `{0}`")]
    UnknownChronology(ChronologyId),
    #[error(transparent)]
    Chronology(#[from] ChronologyError),
}

fn q(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

const HIGHLIGHT: &str = ", color=red, penwidth=2";

fn known_ids(doc: &Document) -> BTreeSet<String> {
    let m = &doc.model;
    m.thimacs()
        .into_iter()
        .map(|t| t.id.to_string())
        .chain(m.stages().iter().map(ToString::to_string))
        .chain(m.arcs().iter().map(|a| a.id.to_string()))
        .chain(doc.subdiagrams.iter().map(|s| s.id.to_string()))
        .chain(doc.events.iter().map(|e| e.id.to_string()))
        .collect()
}

pub fn to_dot(doc: &Document, opts: &RenderOptions) -> Result<String, RenderError> {
    let known = known_ids(doc);
    if let Some(bad) = opts.highlight.iter().find(|h| !known.contains(*h)) {
        return Err(RenderError::UnknownHighlightId(bad.clone()));
    }
    match opts.level {
        Level::Static | Level::Overlay => Ok(static_dot(doc, opts)),
        Level::Behavior => behavior_dot(doc, opts),
    }
}

fn static_dot(doc: &Document, opts: &RenderOptions) -> String {
    let m = &doc.model;
    let hl = |id: &str| if opts.highlight.contains(id) { HIGHLIGHT } else { "" };
    let mut out = format!("digraph {} {{\n", q(m.name()));

    if opts.clusters {
        for t in m.roots() {
            cluster(&mut out, t, 1, opts);
        }
    } else {
        for t in m.thimacs() {
            for k in &t.stages {
                let id = format!("{}.{k}", t.id);
                let _ = writeln!(
                    out,
                    "  {} [label={}{}];",
                    q(&id),
                    q(&format!("{}: {k}", t.label)),
                    hl(&id)
                );
            }
        }
    }

    for a in m.arcs() {
        let style = match a.kind {
            ArcKind::Flow => "solid",
            ArcKind::Trigger => "dashed",
        };
        let _ = writeln!(
            out,
            "  {} -> {} [id={}, label={}, style={style}{}];",
            q(&a.from.to_string()),
            q(&a.to.to_string()),
            q(a.id.as_str()),
            q(a.id.as_str()),
            hl(a.id.as_str())
        );
    }

    if opts.level == Level::Overlay {
        for s in &doc.subdiagrams {
            let node = format!("sub:{}", s.id);
            let _ = writeln!(
                out,
                "  {} [shape=box, label={}{}];",
                q(&node),
                q(&format!("{}\n{}", s.id, s.label)),
                hl(s.id.as_str())
            );
            for st in &s.stages {
                let _ = writeln!(
                    out,
                    "  {} -> {} [style=dotted, arrowhead=none];",
                    q(&node),
                    q(&st.to_string())
                );
            }
        }
    }
    out.push_str("}\n");
    out
}

fn cluster(out: &mut String, t: &Thimac, level: usize, opts: &RenderOptions) {
    let pad = "  ".repeat(level);
    let _ = writeln!(out, "{pad}subgraph {} {{", q(&format!("cluster_{}", t.id)));
    let _ = writeln!(out, "{pad}  label={};", q(&t.label));
    if opts.highlight.contains(t.id.as_str()) {
        let _ = writeln!(out, "{pad}  color=red;");
    }
    for k in &t.stages {
        let id = format!("{}.{k}", t.id);
        let extra = if opts.highlight.contains(&id) { HIGHLIGHT } else { "" };
        let _ = writeln!(out, "{pad}  {} [label={}{extra}];", q(&id), q(k.keyword()));
    }
    for c in &t.children {
        cluster(out, c, level + 1, opts);
    }
    let _ = writeln!(out, "{pad}}}");
}

fn behavior_dot(doc: &Document, opts: &RenderOptions) -> Result<String, RenderError> {
    let decl = match &opts.chronology {
        Some(id) => Some(
            doc.chronology(id.as_str())
                .ok_or_else(|| RenderError::UnknownChronology(id.clone()))?,
        ),
        None => doc.chronologies.first(),
    };
    let hl = |id: &str| if opts.highlight.contains(id) { HIGHLIGHT } else { "" };
    let label_of = |e: &crate::ids::EventId| {
        let sub = doc
            .events
            .iter()
            .find(|x| &x.id == e)
            .and_then(|x| doc.subdiagrams.iter().find(|s| s.id == x.subdiagram));
        match sub {
            Some(s) => format!("{e}\n{}", s.label),
            None => e.to_string(),
        }
    };

    let Some(decl) = decl else {
        let mut out = format!("digraph {} {{\n", q(doc.model.name()));
        for e in &doc.events {
            let _ = writeln!(
                out,
                "  {} [label={}{}];",
                q(e.id.as_str()),
                q(&label_of(&e.id)),
                hl(e.id.as_str())
            );
        }
        out.push_str("}\n");
        return Ok(out);
    };

    let ch = build_chronology(&doc.events, decl)?;
    let mut out = format!("digraph {} {{\n", q(ch.id().as_str()));
    for (i, e) in ch.events().iter().enumerate() {
        let mut attrs = format!("label={}", q(&label_of(e)));
        if ch.is_start(i) {
            attrs.push_str(", peripheries=2");
        }
        if ch.is_end(i) {
            attrs.push_str(", shape=doublecircle");
        }
        let _ = writeln!(out, "  {} [{attrs}{}];", q(e.as_str()), hl(e.as_str()));
    }
    for (a, b) in ch.edges() {
        let _ = writeln!(out, "  {} -> {};", q(a.as_str()), q(b.as_str()));
    }
    for g in ch.groups() {
        let _ = writeln!(out, "  subgraph {} {{", q(&format!("cluster_xor_{}", g.name)));
        let _ = writeln!(out, "    label={};", q(&format!("exclusive {}", g.name)));
        out.push_str("    style=dashed;\n");
        for m in &g.members {
            let _ = writeln!(out, "    {};", q(m.as_str()));
        }
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    Ok(out)
}
