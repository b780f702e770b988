//! Well-formedness of static models and expansion of simplified notation.
//!
//! Only flow arcs are legality-checked; triggers may join any two stages.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::diag::{codes, sort_diagnostics, Diagnostic};
use crate::dsl::Document;
use crate::ids::{ArcId, StageRef};
use crate::model::{build_model, ArcDecl, ArcKind, ModelDecl, ModelError, Notation, StageKind, StaticModel};

use StageKind::*;

/// Flow pairs allowed inside one machine.
const INTRA: &[(StageKind, StageKind)] = &[
    (Create, Process),
    (Create, Release),
    (Receive, Process),
    (Receive, Release),
    (Process, Release),
    (Release, Transfer),
    (Transfer, Receive),
    (Transfer, Arrive),
    (Arrive, Accept),
    (Accept, Process),
    (Accept, Release),
];

/// Whether a flow `from -> to` is legal in full notation.
pub fn flow_legal(from: StageKind, to: StageKind, same_machine: bool) -> bool {
    if same_machine {
        INTRA.contains(&(from, to))
    } else {
        (from, to) == (Transfer, Transfer)
    }
}

/// Whether a cross-machine flow `from -> to` is a legal elided chain in
/// simplified notation, i.e. one that [`desugar`] knows how to expand.
pub fn elided_legal(from: StageKind, to: StageKind) -> bool {
    matches!(from, Create | Process | Receive | Release | Transfer)
        && matches!(to, Transfer | Receive | Process | Release | Create)
        && (from, to) != (Transfer, Transfer)
}

/// Checks a model against the flow discipline of its declared notation.
/// The result is sorted by (element id, code).
pub fn validate_static(model: &StaticModel) -> Vec<Diagnostic> {
    let simplified = model.notation() == Notation::Simplified;
    let mut out = Vec::new();

    if simplified {
        for t in model.thimacs() {
            if t.has_stage(Arrive) || t.has_stage(Accept) {
                out.push(Diagnostic::error(
                    codes::MODE,
                    t.id.as_str(),
                    format!(
                        "thimac `{}` uses arrive/accept, which simplified notation does not allow",
                        t.id
                    ),
                ));
            }
        }
    }

    for arc in model.arcs() {
        let (f, t) = (arc.from.kind, arc.to.kind);
        let same = !arc.crosses_machines();
        match arc.kind {
            ArcKind::Trigger => {
                if arc.from == arc.to {
                    out.push(Diagnostic::warning(
                        codes::TRIGGER_SELF,
                        arc.id.as_str(),
                        format!("trigger `{}` starts and ends at `{}`", arc.id, arc.from),
                    ));
                }
            }
            ArcKind::Flow => {
                let elided = simplified && !same && elided_legal(f, t);
                if arc.from == arc.to {
                    out.push(Diagnostic::error(
                        codes::FLOW_ILLEGAL,
                        arc.id.as_str(),
                        format!("flow `{}` loops on `{}`", arc.id, arc.from),
                    ));
                } else if t == Create && !elided {
                    out.push(Diagnostic::error(
                        codes::CREATE_INFLOW,
                        arc.id.as_str(),
                        format!("flow `{}` enters `{}`; creation can only be triggered", arc.id, arc.to),
                    ));
                } else if !flow_legal(f, t, same) && !elided {
                    let scope = if same { "within a machine" } else { "between machines" };
                    out.push(Diagnostic::error(
                        codes::FLOW_ILLEGAL,
                        arc.id.as_str(),
                        format!("flow `{}` from {f} to {t} is not allowed {scope}", arc.id),
                    ));
                }
            }
        }
    }

    let touched: BTreeSet<&StageRef> = model.arcs().iter().flat_map(|a| [&a.from, &a.to]).collect();
    for stage in model.stages() {
        if !touched.contains(&stage) {
            out.push(Diagnostic::warning(
                codes::STAGE_DANGLING,
                stage.to_string(),
                format!("stage `{stage}` has no arcs"),
            ));
        }
    }

    sort_diagnostics(&mut out);
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DesugarError {
    #[error("model `{0}` is already in full notation")]
    NotSimplified(String),
    #[error("model is not valid simplified notation ({} errors)", .0.len())]
    Invalid(Vec<Diagnostic>),
    #[error("expanded model does not build: {0:?}")]
    Build(Vec<ModelError>),
}

/// What one elided flow turned into.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Expansion {
    pub arcs: Vec<ArcId>,
    pub stages: Vec<StageRef>,
}

/// Expands every elided cross-machine flow `X.s -> Y.t` into
/// `X.s -> X.release -> X.transfer -> Y.transfer -> Y.receive -> Y.t`,
/// inserting only missing stages and reusing arcs that already exist.
/// A chain ending in `create` finishes with a trigger from `Y.receive`.
pub fn desugar(model: &StaticModel) -> Result<StaticModel, DesugarError> {
    desugar_with_map(model).map(|(m, _)| m)
}

pub fn desugar_with_map(model: &StaticModel) -> Result<(StaticModel, BTreeMap<ArcId, Expansion>), DesugarError> {
    if model.notation() != Notation::Simplified {
        return Err(DesugarError::NotSimplified(model.name().to_string()));
    }
    let errors: Vec<Diagnostic> = validate_static(model)
        .into_iter()
        .filter(Diagnostic::is_error)
        .collect();
    if !errors.is_empty() {
        return Err(DesugarError::Invalid(errors));
    }

    let mut decl: ModelDecl = model.to_decl();
    decl.notation = Notation::Full;
    let mut taken: BTreeSet<ArcId> = decl.arcs.iter().map(|a| a.id.clone()).collect();
    let mut expansions = BTreeMap::new();
    let mut arcs: Vec<ArcDecl> = Vec::with_capacity(decl.arcs.len());

    let original = std::mem::take(&mut decl.arcs);
    for arc in &original {
        let elided = arc.kind == ArcKind::Flow
            && arc.from.thimac != arc.to.thimac
            && !flow_legal(arc.from.kind, arc.to.kind, false);
        if !elided {
            arcs.push(arc.clone());
            continue;
        }
        let (x, y) = (&arc.from.thimac, &arc.to.thimac);
        let up: &[StageKind] = match arc.from.kind {
            Create | Process | Receive => &[arc.from.kind, Release, Transfer],
            Release => &[Release, Transfer],
            _ => &[Transfer],
        };
        let down: &[StageKind] = match arc.to.kind {
            Transfer => &[Transfer],
            Receive | Create => &[Transfer, Receive],
            _ => &[Transfer, Receive, arc.to.kind],
        };
        let mut chain: Vec<StageRef> = up.iter().map(|k| StageRef::new(x.clone(), *k)).collect();
        chain.extend(down.iter().map(|k| StageRef::new(y.clone(), *k)));

        let mut links: Vec<(ArcKind, StageRef, StageRef)> = chain
            .windows(2)
            .map(|w| (ArcKind::Flow, w[0].clone(), w[1].clone()))
            .collect();
        if arc.to.kind == Create {
            links.push((ArcKind::Trigger, StageRef::new(y.clone(), Receive), arc.to.clone()));
            chain.push(arc.to.clone());
        }

        let mut expansion = Expansion {
            stages: chain.clone(),
            ..Expansion::default()
        };
        for stage in &chain {
            let t = decl
                .thimacs
                .iter_mut()
                .find(|t| t.id == stage.thimac)
                .expect("arc endpoints resolve");
            if !t.stages.contains(&stage.kind) {
                t.stages.push(stage.kind);
                t.stages.sort();
            }
        }
        let mut n = 0;
        for (kind, from, to) in links {
            let existing = original
                .iter()
                .chain(arcs.iter())
                .find(|a| a.kind == kind && a.from == from && a.to == to && a.id != arc.id)
                .map(|a| a.id.clone());
            let id = match existing {
                Some(id) => id,
                None => {
                    let id = loop {
                        n += 1;
                        let candidate = ArcId::new(format!("{}_{n}", arc.id));
                        if !taken.contains(&candidate) {
                            break candidate;
                        }
                    };
                    taken.insert(id.clone());
                    arcs.push(ArcDecl {
                        id: id.clone(),
                        kind,
                        from,
                        to,
                    });
                    id
                }
            };
            expansion.arcs.push(id);
        }
        expansions.insert(arc.id.clone(), expansion);
    }
    decl.arcs = arcs;
    let built = build_model(decl).map_err(DesugarError::Build)?;
    Ok((built, expansions))
}

/// Desugars the model and rewrites subdiagrams so each one that held an
/// elided flow now holds its whole expansion.
pub fn desugar_document(doc: &Document) -> Result<Document, DesugarError> {
    let (model, map) = desugar_with_map(&doc.model)?;
    let mut out = doc.clone();
    out.model = model;
    for sub in &mut out.subdiagrams {
        for (orig, exp) in &map {
            if sub.arcs.remove(orig) {
                sub.arcs.extend(exp.arcs.iter().cloned());
                sub.stages.extend(exp.stages.iter().cloned());
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ThimacDecl;

    fn two(notation: Notation, from: StageKind, to: StageKind) -> StaticModel {
        build_model(ModelDecl {
            name: "m".into(),
            notation,
            thimacs: vec![
                ThimacDecl::new("a", "A").stages(&[Create, from]),
                ThimacDecl::new("b", "B").stages(&[to, Process]),
            ],
            arcs: vec![
                ArcDecl::flow("f0", StageRef::new("a", Create), StageRef::new("a", from)),
                ArcDecl::flow("f1", StageRef::new("a", from), StageRef::new("b", to)),
            ],
        })
        .unwrap()
    }

    fn codes_of(d: &[Diagnostic]) -> Vec<&str> {
        d.iter().map(|d| d.code).collect()
    }

    #[test]
    fn intra_process_to_receive_is_illegal() {
        let m = build_model(ModelDecl {
            name: "m".into(),
            thimacs: vec![ThimacDecl::new("a", "A").stages(&[Process, Receive])],
            arcs: vec![ArcDecl::flow(
                "f",
                StageRef::new("a", Process),
                StageRef::new("a", Receive),
            )],
            ..ModelDecl::default()
        })
        .unwrap();
        assert_eq!(codes_of(&validate_static(&m)), vec![codes::FLOW_ILLEGAL]);
    }

    #[test]
    fn release_to_receive_depends_on_mode() {
        let full = two(Notation::Full, Release, Receive);
        let d = validate_static(&full);
        // Sorted by element: `b.process` before `f1`.
        assert_eq!(codes_of(&d), vec![codes::STAGE_DANGLING, codes::FLOW_ILLEGAL]);
        assert_eq!(d[1].elements, vec!["f1".to_string()]);
        let simple = two(Notation::Simplified, Release, Receive);
        assert!(validate_static(&simple).iter().all(|d| !d.is_error()));
    }

    #[test]
    fn create_inflow_and_self_trigger() {
        let m = build_model(ModelDecl {
            name: "m".into(),
            thimacs: vec![ThimacDecl::new("a", "A").stages(&[Create, Process])],
            arcs: vec![
                ArcDecl::flow("f", StageRef::new("a", Process), StageRef::new("a", Create)),
                ArcDecl::trigger("t", StageRef::new("a", Process), StageRef::new("a", Process)),
            ],
            ..ModelDecl::default()
        })
        .unwrap();
        let d = validate_static(&m);
        assert_eq!(codes_of(&d), vec![codes::CREATE_INFLOW, codes::TRIGGER_SELF]);
        assert!(d[0].is_error() && !d[1].is_error());
    }

    #[test]
    fn mode_error_for_arrive_in_simplified() {
        let m = build_model(ModelDecl {
            name: "m".into(),
            notation: Notation::Simplified,
            thimacs: vec![ThimacDecl::new("a", "A").stages(&[Transfer, Arrive, Accept])],
            arcs: vec![
                ArcDecl::flow("f", StageRef::new("a", Transfer), StageRef::new("a", Arrive)),
                ArcDecl::flow("g", StageRef::new("a", Arrive), StageRef::new("a", Accept)),
            ],
        })
        .unwrap();
        assert_eq!(codes_of(&validate_static(&m)), vec![codes::MODE]);
    }

    #[test]
    fn delta_cr_only_warns() {
        let m = build_model(ModelDecl {
            name: "d".into(),
            thimacs: vec![ThimacDecl::new("x", "X").stages(&[Create])],
            ..ModelDecl::default()
        })
        .unwrap();
        let d = validate_static(&m);
        assert_eq!(codes_of(&d), vec![codes::STAGE_DANGLING]);
        assert!(!d[0].is_error());
    }

    #[test]
    fn desugar_process_to_create() {
        let m = build_model(ModelDecl {
            name: "cheese".into(),
            notation: Notation::Simplified,
            thimacs: vec![
                ThimacDecl::new("cheese", "Cheese").stages(&[Create, Process]),
                ThimacDecl::new("moon", "Moon").stages(&[Create]),
            ],
            arcs: vec![
                ArcDecl::flow("f1", StageRef::new("cheese", Create), StageRef::new("cheese", Process)),
                ArcDecl::flow("f2", StageRef::new("cheese", Process), StageRef::new("moon", Create)),
            ],
        })
        .unwrap();
        let (full, map) = desugar_with_map(&m).unwrap();
        assert_eq!(full.notation(), Notation::Full);
        assert!(validate_static(&full).iter().all(|d| !d.is_error()));
        let e = &map[&ArcId::from("f2")];
        assert_eq!(e.arcs.len(), 5);
        let ids: Vec<&str> = full.arcs().iter().map(|a| a.id.as_str()).collect();
        assert_eq!(ids, ["f1", "f2_1", "f2_2", "f2_3", "f2_4", "f2_5"]);
        assert_eq!(full.arcs()[5].kind, ArcKind::Trigger);
        assert_eq!(
            full.thimac(&"moon".into())
                .unwrap()
                .stages
                .iter()
                .copied()
                .collect::<Vec<_>>(),
            vec![Create, Transfer, Receive]
        );
        assert_eq!(desugar(&full), Err(DesugarError::NotSimplified("cheese".into())));
    }

    #[test]
    fn desugar_reuses_existing_arcs() {
        let m = build_model(ModelDecl {
            name: "m".into(),
            notation: Notation::Simplified,
            thimacs: vec![
                ThimacDecl::new("a", "A").stages(&[Create, Release, Transfer]),
                ThimacDecl::new("b", "B").stages(&[Process]),
            ],
            arcs: vec![
                ArcDecl::flow("r", StageRef::new("a", Release), StageRef::new("a", Transfer)),
                ArcDecl::flow("c", StageRef::new("a", Create), StageRef::new("a", Release)),
                ArcDecl::flow("x", StageRef::new("a", Release), StageRef::new("b", Process)),
            ],
        })
        .unwrap();
        let (full, map) = desugar_with_map(&m).unwrap();
        assert_eq!(map[&ArcId::from("x")].arcs[0].as_str(), "r");
        assert_eq!(full.arcs().len(), 2 + 3);
    }

    #[test]
    fn no_cross_flows_only_changes_mode() {
        let m = build_model(ModelDecl {
            name: "m".into(),
            notation: Notation::Simplified,
            thimacs: vec![ThimacDecl::new("a", "A").stages(&[Create, Process])],
            arcs: vec![ArcDecl::flow(
                "f",
                StageRef::new("a", Create),
                StageRef::new("a", Process),
            )],
        })
        .unwrap();
        let full = desugar(&m).unwrap();
        let mut expect = m.to_decl();
        expect.notation = Notation::Full;
        assert_eq!(full.to_decl(), expect);
    }
}
