//! Structural isomorphism between static models.
//!
//! Two models are isomorphic when a bijection of thimacs preserves
//! containment, stage sets and the multiset of arcs (kind plus endpoint
//! stages). Labels, thing names, memory flags and notation are ignored.
//! The search is an exact backtracking match meant for desk-sized models.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::ids::{ArcId, ThimacId};
use crate::model::{ArcKind, StageKind, StaticModel};

pub const DEFAULT_ELEMENT_BOUND: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IsoError {
    #[error("model has {count} elements, above the isomorphism bound of {bound}")]
    SizeLimitExceeded { count: usize, bound: usize },
}

/// Thimac and arc correspondences from the first model to the second.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Witness {
    pub thimacs: BTreeMap<ThimacId, ThimacId>,
    pub arcs: BTreeMap<ArcId, ArcId>,
}

pub fn models_isomorphic(a: &StaticModel, b: &StaticModel) -> Result<Option<Witness>, IsoError> {
    models_isomorphic_bounded(a, b, DEFAULT_ELEMENT_BOUND)
}

type ArcKey = (ArcKind, usize, StageKind, usize, StageKind);

struct Indexed {
    ids: Vec<ThimacId>,
    parent: Vec<Option<usize>>,
    stages: Vec<Vec<StageKind>>,
    child_count: Vec<usize>,
    depth: Vec<usize>,
    /// Per thimac, arcs touching it as (key, arc position).
    arcs: Vec<(ArcKey, usize)>,
    degree: Vec<usize>,
}

fn index(m: &StaticModel) -> Indexed {
    let thimacs = m.thimacs();
    let pos: HashMap<&ThimacId, usize> = thimacs.iter().enumerate().map(|(i, t)| (&t.id, i)).collect();
    let n = thimacs.len();
    let mut degree = vec![0; n];
    let arcs: Vec<(ArcKey, usize)> = m
        .arcs()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let f = pos[&a.from.thimac];
            let t = pos[&a.to.thimac];
            degree[f] += 1;
            degree[t] += 1;
            ((a.kind, f, a.from.kind, t, a.to.kind), i)
        })
        .collect();
    Indexed {
        ids: thimacs.iter().map(|t| t.id.clone()).collect(),
        parent: thimacs.iter().map(|t| m.parent(&t.id).map(|p| pos[p])).collect(),
        stages: thimacs.iter().map(|t| t.stages.iter().copied().collect()).collect(),
        child_count: thimacs.iter().map(|t| t.children.len()).collect(),
        depth: thimacs.iter().map(|t| m.depth(&t.id).unwrap_or(0)).collect(),
        arcs,
        degree,
    }
}

pub fn models_isomorphic_bounded(a: &StaticModel, b: &StaticModel, bound: usize) -> Result<Option<Witness>, IsoError> {
    for m in [a, b] {
        if m.element_count() > bound {
            return Err(IsoError::SizeLimitExceeded {
                count: m.element_count(),
                bound,
            });
        }
    }
    if a.thimac_count() != b.thimac_count() || a.arcs().len() != b.arcs().len() {
        return Ok(None);
    }
    let ia = index(a);
    let ib = index(b);

    let mut counts_b: HashMap<ArcKey, usize> = HashMap::new();
    for (k, _) in &ib.arcs {
        *counts_b.entry(*k).or_default() += 1;
    }

    let n = ia.ids.len();
    let mut map: Vec<Option<usize>> = vec![None; n];
    let mut used = vec![false; n];
    if !search(0, &ia, &ib, &mut map, &mut used) {
        return Ok(None);
    }
    let map: Vec<usize> = map.into_iter().map(|m| m.expect("complete mapping")).collect();

    // Pair arcs with equal mapped keys, in declaration order on both sides.
    let mut pool: HashMap<ArcKey, Vec<usize>> = HashMap::new();
    for (k, i) in &ib.arcs {
        pool.entry(*k).or_default().push(*i);
    }
    for v in pool.values_mut() {
        v.reverse();
    }
    let mut witness = Witness::default();
    for (i, id) in ia.ids.iter().enumerate() {
        witness.thimacs.insert(id.clone(), ib.ids[map[i]].clone());
    }
    for ((kind, f, fk, t, tk), i) in &ia.arcs {
        let key = (*kind, map[*f], *fk, map[*t], *tk);
        let Some(j) = pool.get_mut(&key).and_then(Vec::pop) else {
            return Ok(None);
        };
        witness.arcs.insert(a.arcs()[*i].id.clone(), b.arcs()[j].id.clone());
    }
    Ok(Some(witness))
}

fn compatible(ia: &Indexed, ib: &Indexed, x: usize, y: usize) -> bool {
    ia.stages[x] == ib.stages[y]
        && ia.child_count[x] == ib.child_count[y]
        && ia.depth[x] == ib.depth[y]
        && ia.degree[x] == ib.degree[y]
}

/// Arcs among already-mapped thimacs must agree in count, key by key.
fn arcs_consistent(ia: &Indexed, ib: &Indexed, map: &[Option<usize>], used: &[bool]) -> bool {
    let mut counts: HashMap<ArcKey, isize> = HashMap::new();
    for ((k, f, fk, t, tk), _) in &ia.arcs {
        if let (Some(mf), Some(mt)) = (map[*f], map[*t]) {
            *counts.entry((*k, mf, *fk, mt, *tk)).or_default() += 1;
        }
    }
    for ((k, f, fk, t, tk), _) in &ib.arcs {
        if used[*f] && used[*t] {
            *counts.entry((*k, *f, *fk, *t, *tk)).or_default() -= 1;
        }
    }
    counts.values().all(|&c| c == 0)
}

fn search(next: usize, ia: &Indexed, ib: &Indexed, map: &mut [Option<usize>], used: &mut [bool]) -> bool {
    if next == ia.ids.len() {
        return true;
    }
    // Pre-order guarantees the parent is mapped before its children.
    let want_parent = ia.parent[next].map(|p| map[p].expect("parent mapped first"));
    for y in 0..ib.ids.len() {
        if used[y] || ib.parent[y] != want_parent || !compatible(ia, ib, next, y) {
            continue;
        }
        map[next] = Some(y);
        used[y] = true;
        if arcs_consistent(ia, ib, map, used) && search(next + 1, ia, ib, map, used) {
            return true;
        }
        map[next] = None;
        used[y] = false;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::StageRef;
    use crate::model::{build_model, ArcDecl, ModelDecl, Notation, ThimacDecl};
    use StageKind::*;

    fn giver(ids: [&str; 3], labels: [&str; 3], reorder: bool) -> StaticModel {
        let [j, apple, m] = ids;
        let mut thimacs = vec![
            ThimacDecl::new(j, labels[0]).stages(&[Create]),
            ThimacDecl::new(apple, labels[1])
                .parent(j)
                .stages(&[Create, Release, Transfer]),
            ThimacDecl::new(m, labels[2]).stages(&[Create, Transfer, Receive]),
        ];
        let mut arcs = vec![
            ArcDecl::flow("a1", StageRef::new(apple, Create), StageRef::new(apple, Release)),
            ArcDecl::flow("a2", StageRef::new(apple, Release), StageRef::new(apple, Transfer)),
            ArcDecl::flow("a3", StageRef::new(apple, Transfer), StageRef::new(m, Transfer)),
            ArcDecl::flow("a4", StageRef::new(m, Transfer), StageRef::new(m, Receive)),
        ];
        if reorder {
            thimacs.rotate_left(2);
            arcs.reverse();
        }
        build_model(ModelDecl {
            name: "give".into(),
            notation: Notation::Full,
            thimacs,
            arcs,
        })
        .unwrap()
    }

    #[test]
    fn relabeled_and_reordered_models_match() {
        let a = giver(["john", "apple", "mary"], ["John", "Apple", "Mary"], false);
        let b = giver(["g", "f", "r"], ["x", "y", "z"], true);
        let w = models_isomorphic(&a, &b).unwrap().expect("isomorphic");
        assert_eq!(w.thimacs[&ThimacId::from("john")].as_str(), "g");
        assert_eq!(w.thimacs[&ThimacId::from("mary")].as_str(), "r");
        assert_eq!(w.arcs.len(), 4);
    }

    #[test]
    fn self_match_is_identity() {
        let a = giver(["john", "apple", "mary"], ["John", "Apple", "Mary"], false);
        let w = models_isomorphic(&a, &a).unwrap().unwrap();
        assert!(w.thimacs.iter().all(|(x, y)| x == y));
        assert!(w.arcs.iter().all(|(x, y)| x == y));
    }

    #[test]
    fn containment_matters() {
        let a = giver(["john", "apple", "mary"], ["John", "Apple", "Mary"], false);
        // Same stages and arcs but the apple sits at top level.
        let mut d = a.to_decl();
        d.thimacs[1].parent = None;
        let b = build_model(d).unwrap();
        assert!(models_isomorphic(&a, &b).unwrap().is_none());
    }

    #[test]
    fn size_bound() {
        let a = giver(["john", "apple", "mary"], ["John", "Apple", "Mary"], false);
        assert_eq!(
            models_isomorphic_bounded(&a, &a, 3),
            Err(IsoError::SizeLimitExceeded { count: 7, bound: 3 })
        );
    }
}
