// Random documents, chronologies and models for property tests. Shared with
// the cli acceptance target via `#[path]`.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use tm_core::behavior::GroupDecl;
use tm_core::dsl::Document;
use tm_core::model::{ArcDecl, ThimacDecl};
use tm_core::validate::{elided_legal, flow_legal};
use tm_core::*;

const LABEL_CHARS: &[char] = &['a', 'Z', ' ', '-', '"', '\\', 'é', '\n', '\t', '→', '0'];

fn label<R: Rng>(rng: &mut R) -> String {
    (0..rng.gen_range(0..8))
        .map(|_| *LABEL_CHARS.choose(rng).unwrap())
        .collect()
}

fn subset<R: Rng, T: Clone>(rng: &mut R, items: &[T], p: f64) -> Vec<T> {
    items.iter().filter(|_| rng.gen_bool(p)).cloned().collect()
}

/// Thimac tree: `n` thimacs, each child of an earlier one or a root.
fn thimac_decls<R: Rng>(rng: &mut R, n: usize, kinds: &[StageKind]) -> Vec<ThimacDecl> {
    (0..n)
        .map(|i| {
            let mut t = ThimacDecl::new(format!("t{i}"), label(rng));
            if i > 0 && rng.gen_bool(0.5) {
                t.parent = Some(ThimacId::new(format!("t{}", rng.gen_range(0..i))));
            }
            t.stages = subset(rng, kinds, 0.5);
            // Arrive and accept come as a pair, in place of receive.
            let split = t.stages.contains(&StageKind::Arrive) || t.stages.contains(&StageKind::Accept);
            t.stages.retain(|k| !matches!(k, StageKind::Arrive | StageKind::Accept));
            if split {
                t.stages.retain(|k| *k != StageKind::Receive);
                t.stages.extend([StageKind::Arrive, StageKind::Accept]);
            }
            t
        })
        .collect()
}

fn stage_refs(thimacs: &[ThimacDecl]) -> Vec<StageRef> {
    thimacs
        .iter()
        .flat_map(|t| {
            t.stages.iter().map(|k| StageRef {
                thimac: t.id.clone(),
                kind: *k,
            })
        })
        .collect()
}

/// A parseable document; it need not validate.
pub fn random_document<R: Rng>(rng: &mut R) -> Document {
    let n = rng.gen_range(0..6);
    let mut thimacs = thimac_decls(rng, n, &StageKind::ALL);
    for t in &mut thimacs {
        t.things = (0..rng.gen_range(0..3)).map(|_| label(rng)).collect();
        t.memory = rng.gen_bool(0.2);
    }
    let stages = stage_refs(&thimacs);
    let mut arcs = Vec::new();
    if !stages.is_empty() {
        for i in 0..rng.gen_range(0..8) {
            let from = stages.choose(rng).unwrap().clone();
            let to = stages.choose(rng).unwrap().clone();
            arcs.push(if rng.gen_bool(0.8) {
                ArcDecl::flow(format!("f{i}"), from, to)
            } else {
                ArcDecl::trigger(format!("f{i}"), from, to)
            });
        }
    }
    let arc_ids: Vec<ArcId> = arcs.iter().map(|a: &ArcDecl| a.id.clone()).collect();
    let model = build_model(ModelDecl {
        name: format!("m{}", rng.gen_range(0..100)),
        notation: if rng.gen_bool(0.3) {
            Notation::Simplified
        } else {
            Notation::Full
        },
        thimacs,
        arcs,
    })
    .expect("generated model builds");

    let subdiagrams: Vec<Subdiagram> = (0..rng.gen_range(0..4))
        .map(|i| {
            let mut s = Subdiagram::new(format!("S{i}"), label(rng));
            s.stages = subset(rng, &stages, 0.4).into_iter().collect();
            s.arcs = subset(rng, &arc_ids, 0.4).into_iter().collect();
            s
        })
        .collect();
    let mut events = Vec::new();
    if !subdiagrams.is_empty() {
        for i in 0..rng.gen_range(0..6) {
            let mut e = Event::new(format!("E{i}"), subdiagrams.choose(rng).unwrap().id.clone());
            if rng.gen_bool(0.2) {
                let start = rng.gen_range(0..10);
                e.window = Some(Window {
                    start,
                    end: start + rng.gen_range(0..10),
                });
            }
            events.push(e);
        }
    }
    let chronologies = (0..rng.gen_range(0..3))
        .map(|i| random_chronology_decl(rng, &format!("B{i}"), &events))
        .collect();
    let event_ids: Vec<EventId> = events.iter().map(|e| e.id.clone()).collect();
    let traces = (0..rng.gen_range(0..3))
        .map(|i| {
            let mut picked = subset(rng, &event_ids, 0.5);
            picked.shuffle(rng);
            let mut t = 0;
            let occ = picked
                .into_iter()
                .map(|e| {
                    t += rng.gen_range(0..3);
                    Occurrence::new(e, t)
                })
                .collect();
            Trace::new(format!("tr{i}"), occ).unwrap()
        })
        .collect();
    Document {
        model,
        subdiagrams,
        events,
        chronologies,
        traces,
    }
}

/// Edges only go forward in declaration order, so the graph is acyclic;
/// groups never contain both ends of an edge.
pub fn random_chronology_decl<R: Rng>(rng: &mut R, id: &str, events: &[Event]) -> ChronologyDecl {
    let ids: Vec<EventId> = events.iter().map(|e| e.id.clone()).collect();
    let mut c = ChronologyDecl::new(id);
    if rng.gen_bool(0.3) {
        c.events = subset(rng, &ids, 0.7);
    }
    for i in 0..ids.len() {
        for j in i + 1..ids.len() {
            if rng.gen_bool(0.3) {
                c.edges.push((ids[i].clone(), ids[j].clone()));
            }
        }
    }
    let linked: BTreeSet<(usize, usize)> = c
        .edges
        .iter()
        .map(|(a, b)| {
            let p = |x: &EventId| ids.iter().position(|y| y == x).unwrap();
            (p(a), p(b))
        })
        .collect();
    let mut used = BTreeSet::new();
    for g in 0..rng.gen_range(0..3) {
        let mut members: Vec<usize> = Vec::new();
        for i in 0..ids.len() {
            if used.contains(&i) || !rng.gen_bool(0.4) {
                continue;
            }
            if members
                .iter()
                .all(|&m| !linked.contains(&(m, i)) && !linked.contains(&(i, m)))
            {
                members.push(i);
            }
        }
        if members.len() >= 2 {
            used.extend(members.iter().copied());
            c.exclusive.push(GroupDecl {
                name: rng.gen_bool(0.5).then(|| format!("g{g}x")),
                members: members.iter().map(|&i| ids[i].clone()).collect(),
            });
        }
    }
    c
}

/// `n` events over a placeholder subdiagram, with a random
/// chronology over them.
pub fn random_dag<R: Rng>(rng: &mut R, n: usize) -> (Vec<Event>, ChronologyDecl) {
    let events: Vec<Event> = (0..n).map(|i| Event::new(format!("E{i}"), "S")).collect();
    let mut c = random_chronology_decl(rng, "B", &events);
    c.events = events.iter().map(|e| e.id.clone()).collect();
    (events, c)
}

/// A simplified-notation model with only legal flows, so it validates
/// without errors.
pub fn random_simplified_model<R: Rng>(rng: &mut R) -> StaticModel {
    use StageKind::*;
    let kinds = [Create, Process, Release, Transfer, Receive];
    let n = rng.gen_range(1..6);
    let thimacs = thimac_decls(rng, n, &kinds);
    let stages = stage_refs(&thimacs);
    let mut candidates = Vec::new();
    for a in &stages {
        for b in &stages {
            let legal = if a.thimac == b.thimac {
                a != b && flow_legal(a.kind, b.kind, true)
            } else {
                flow_legal(a.kind, b.kind, false) || elided_legal(a.kind, b.kind)
            };
            if legal {
                candidates.push((a.clone(), b.clone()));
            }
        }
    }
    let mut arcs = Vec::new();
    for (i, (a, b)) in subset(rng, &candidates, 0.3).into_iter().take(10).enumerate() {
        arcs.push(ArcDecl::flow(format!("f{i}"), a, b));
    }
    for i in 0..rng.gen_range(0..3) {
        let creates: Vec<&StageRef> = stages.iter().filter(|s| s.kind == Create).collect();
        let (Some(from), Some(to)) = (stages.choose(rng), creates.choose(rng)) else {
            break;
        };
        if from != *to {
            arcs.push(ArcDecl::trigger(format!("t{i}"), from.clone(), (*to).clone()));
        }
    }
    build_model(ModelDecl {
        name: "rand".into(),
        notation: Notation::Simplified,
        thimacs,
        arcs,
    })
    .expect("generated model builds")
}
