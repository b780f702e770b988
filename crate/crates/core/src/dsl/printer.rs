//! Canonical text output. `parse(print(d)) == d` for every document the
//! parser can produce.

use std::fmt::Write as _;

use crate::behavior::{ChronologyDecl, Trace};
use crate::eventize::{Event, Subdiagram};
use crate::model::{Notation, StaticModel, Thimac};

use super::Document;

pub fn print(doc: &Document) -> String {
    let mut out = String::new();
    print_model(&mut out, &doc.model);
    for s in &doc.subdiagrams {
        out.push('\n');
        print_subdiagram(&mut out, s);
    }
    if !doc.events.is_empty() {
        out.push('\n');
        for e in &doc.events {
            print_event(&mut out, e);
        }
    }
    for c in &doc.chronologies {
        out.push('\n');
        print_chronology(&mut out, c);
    }
    if !doc.traces.is_empty() {
        out.push('\n');
        for t in &doc.traces {
            out.push_str(&print_trace(t));
            out.push('\n');
        }
    }
    out
}

/// One `trace` statement, without a trailing newline.
pub fn print_trace(t: &Trace) -> String {
    let occ: Vec<String> = t
        .occurrences()
        .iter()
        .map(|o| format!("{} @ {}", o.event, o.time))
        .collect();
    format!("trace {} = [{}];", t.id(), occ.join(", "))
}

fn quote(s: &str) -> String {
    let mut q = String::with_capacity(s.len() + 2);
    q.push('"');
    for c in s.chars() {
        match c {
            '"' => q.push_str("\\\""),
            '\\' => q.push_str("\\\\"),
            '\n' => q.push_str("\\n"),
            c => q.push(c),
        }
    }
    q.push('"');
    q
}

fn print_model(out: &mut String, m: &StaticModel) {
    let mode = match m.notation() {
        Notation::Full => "",
        Notation::Simplified => " simplified",
    };
    let _ = writeln!(out, "model {}{} {{", m.name(), mode);
    for t in m.roots() {
        print_thimac(out, t, 1);
    }
    for a in m.arcs() {
        let _ = writeln!(out, "  {} {}: {} -> {};", a.kind.keyword(), a.id, a.from, a.to);
    }
    out.push_str("}\n");
}

fn print_thimac(out: &mut String, t: &Thimac, level: usize) {
    let pad = "  ".repeat(level);
    let head = format!("{pad}thimac {} {}", t.id, quote(&t.label));
    if t.stages.is_empty() && t.things.is_empty() && !t.memory && t.children.is_empty() {
        let _ = writeln!(out, "{head} {{}}");
        return;
    }
    let _ = writeln!(out, "{head} {{");
    if !t.stages.is_empty() {
        let kinds: Vec<&str> = t.stages.iter().map(|k| k.keyword()).collect();
        let _ = writeln!(out, "{pad}  stages: {};", kinds.join(", "));
    }
    if !t.things.is_empty() {
        let things: Vec<String> = t.things.iter().map(|s| quote(s)).collect();
        let _ = writeln!(out, "{pad}  things: {};", things.join(", "));
    }
    if t.memory {
        let _ = writeln!(out, "{pad}  memory;");
    }
    for c in &t.children {
        print_thimac(out, c, level + 1);
    }
    let _ = writeln!(out, "{pad}}}");
}

fn print_subdiagram(out: &mut String, s: &Subdiagram) {
    let _ = writeln!(out, "subdiagram {} {} {{", s.id, quote(&s.label));
    if !s.stages.is_empty() {
        let stages: Vec<String> = s.stages.iter().map(ToString::to_string).collect();
        let _ = writeln!(out, "  stages: {};", stages.join(", "));
    }
    if !s.arcs.is_empty() {
        let arcs: Vec<&str> = s.arcs.iter().map(|a| a.as_str()).collect();
        let _ = writeln!(out, "  arcs: {};", arcs.join(", "));
    }
    out.push_str("}\n");
}

fn print_event(out: &mut String, e: &Event) {
    let _ = write!(out, "event {} = {}", e.id, e.subdiagram);
    if let Some(w) = e.window {
        let _ = write!(out, " window {}..{}", w.start, w.end);
    }
    out.push_str(";\n");
}

fn print_chronology(out: &mut String, c: &ChronologyDecl) {
    let ids = |v: &[crate::ids::EventId]| v.iter().map(|e| e.as_str()).collect::<Vec<_>>().join(", ");
    let _ = writeln!(out, "chronology {} {{", c.id);
    if !c.events.is_empty() {
        let _ = writeln!(out, "  events: {};", ids(&c.events));
    }
    for (a, b) in &c.edges {
        let _ = writeln!(out, "  {a} -> {b};");
    }
    for g in &c.exclusive {
        let members: Vec<&str> = g.members.iter().map(|e| e.as_str()).collect();
        match &g.name {
            Some(n) => {
                let _ = writeln!(out, "  exclusive {n} {{ {} }};", members.join(" | "));
            }
            None => {
                let _ = writeln!(out, "  exclusive {{ {} }};", members.join(" | "));
            }
        }
    }
    if let Some(s) = &c.start {
        let _ = writeln!(out, "  start: {};", ids(s));
    }
    if let Some(e) = &c.end {
        let _ = writeln!(out, "  end: {};", ids(e));
    }
    out.push_str("}\n");
}
