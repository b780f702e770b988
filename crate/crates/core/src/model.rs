//! Static thinging-machine models: a containment tree of thimacs, each with a
//! machine of stages, connected by flow and trigger arcs.
//!
//! A [`StaticModel`] can only be obtained through [`build_model`], which
//! resolves every reference; once built it is immutable.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::ids::{ArcId, StageRef, ThimacId};

/// The generic actions of a machine. `Arrive` and `Accept` refine `Receive`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StageKind {
    Create,
    Process,
    Release,
    Transfer,
    Receive,
    Arrive,
    Accept,
}

impl StageKind {
    pub const ALL: [StageKind; 7] = [
        StageKind::Create,
        StageKind::Process,
        StageKind::Release,
        StageKind::Transfer,
        StageKind::Receive,
        StageKind::Arrive,
        StageKind::Accept,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            StageKind::Create => "create",
            StageKind::Process => "process",
            StageKind::Release => "release",
            StageKind::Transfer => "transfer",
            StageKind::Receive => "receive",
            StageKind::Arrive => "arrive",
            StageKind::Accept => "accept",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.keyword() == s)
    }
}

impl fmt::Display for StageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

impl FromStr for StageKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::from_keyword(s).ok_or_else(|| format!("unknown stage kind `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Default)]
pub enum Notation {
    #[default]
    Full,
    /// Release, transfer and receive may be elided between machines.
    Simplified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ArcKind {
    /// Solid arrow: a thing moves.
    Flow,
    /// Dashed arrow: one stage causes another.
    Trigger,
}

impl ArcKind {
    pub fn keyword(self) -> &'static str {
        match self {
            ArcKind::Flow => "flow",
            ArcKind::Trigger => "trigger",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Thimac {
    pub id: ThimacId,
    pub label: String,
    pub stages: BTreeSet<StageKind>,
    pub children: Vec<Thimac>,
    /// Thing-instance labels this machine creates; empty means the thimac's
    /// own id is used.
    pub things: Vec<String>,
    /// Memory annotation. Carried through printing, no behavior attached.
    pub memory: bool,
}

impl Thimac {
    pub fn has_stage(&self, kind: StageKind) -> bool {
        self.stages.contains(&kind)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Arc {
    pub id: ArcId,
    pub kind: ArcKind,
    pub from: StageRef,
    pub to: StageRef,
}

impl Arc {
    pub fn crosses_machines(&self) -> bool {
        self.from.thimac != self.to.thimac
    }
}

/// Unresolved model declarations, as produced by the parser or by hand.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ModelDecl {
    pub name: String,
    pub notation: Notation,
    /// Parents must be declared somewhere in the list; order of siblings
    /// follows declaration order.
    pub thimacs: Vec<ThimacDecl>,
    pub arcs: Vec<ArcDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThimacDecl {
    pub id: ThimacId,
    pub label: String,
    pub parent: Option<ThimacId>,
    pub stages: Vec<StageKind>,
    pub things: Vec<String>,
    pub memory: bool,
}

impl ThimacDecl {
    pub fn new(id: impl Into<ThimacId>, label: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            label: label.into(),
            parent: None,
            stages: Vec::new(),
            things: Vec::new(),
            memory: false,
        }
    }

    pub fn parent(mut self, parent: impl Into<ThimacId>) -> Self {
        self.parent = Some(parent.into());
        self
    }

    pub fn stages(mut self, stages: &[StageKind]) -> Self {
        self.stages = stages.to_vec();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArcDecl {
    pub id: ArcId,
    pub kind: ArcKind,
    pub from: StageRef,
    pub to: StageRef,
}

impl ArcDecl {
    pub fn flow(id: impl Into<ArcId>, from: StageRef, to: StageRef) -> Self {
        Self {
            id: id.into(),
            kind: ArcKind::Flow,
            from,
            to,
        }
    }

    pub fn trigger(id: impl Into<ArcId>, from: StageRef, to: StageRef) -> Self {
        Self {
            id: id.into(),
            kind: ArcKind::Trigger,
            from,
            to,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("duplicate thimac id `{0}`")]
    DuplicateThimac(ThimacId),
    #[error("duplicate arc id `{0}`")]
    DuplicateArc(ArcId),
    #[error("thimac `{thimac}` declares stage `{kind}` twice")]
    DuplicateStage { thimac: ThimacId, kind: StageKind },
    #[error("thimac `{thimac}`: {reason}")]
    InvalidStageSet { thimac: ThimacId, reason: String },
    #[error("arc `{arc}` references `{stage}`, which does not exist")]
    UnresolvedStageRef { arc: ArcId, stage: StageRef },
    #[error("thimac `{thimac}` names unknown parent `{parent}`")]
    UnresolvedParent { thimac: ThimacId, parent: ThimacId },
    #[error("containment cycle through {}", join_ids(.0))]
    ContainmentCycle(Vec<ThimacId>),
}

impl ModelError {
    /// The declaration the error is about.
    pub fn element(&self) -> String {
        match self {
            ModelError::DuplicateThimac(id) => id.to_string(),
            ModelError::DuplicateArc(id) => id.to_string(),
            ModelError::DuplicateStage { thimac, .. }
            | ModelError::InvalidStageSet { thimac, .. }
            | ModelError::UnresolvedParent { thimac, .. } => thimac.to_string(),
            ModelError::UnresolvedStageRef { arc, .. } => arc.to_string(),
            ModelError::ContainmentCycle(ids) => ids.first().map(ToString::to_string).unwrap_or_default(),
        }
    }
}

fn join_ids(ids: &[ThimacId]) -> String {
    ids.iter().map(|i| i.as_str()).collect::<Vec<_>>().join(" -> ")
}

/// Result of [`StaticModel::lookup`].
#[derive(Debug, Clone, Copy)]
pub struct StageLookup<'a> {
    pub owner: Option<&'a Thimac>,
    pub present: bool,
}

impl StageLookup<'_> {
    pub fn is_found(&self) -> bool {
        self.present
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct IndexEntry {
    /// Child positions from the root list down to the thimac.
    path: Vec<usize>,
    parent: Option<ThimacId>,
}

/// A resolved static model. See [`build_model`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StaticModel {
    name: String,
    notation: Notation,
    roots: Vec<Thimac>,
    arcs: Vec<Arc>,
    index: BTreeMap<ThimacId, IndexEntry>,
    arc_index: BTreeMap<ArcId, usize>,
}

impl StaticModel {
    pub fn empty(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            notation: Notation::Full,
            roots: Vec::new(),
            arcs: Vec::new(),
            index: BTreeMap::new(),
            arc_index: BTreeMap::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn notation(&self) -> Notation {
        self.notation
    }

    pub fn roots(&self) -> &[Thimac] {
        &self.roots
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, id: &ArcId) -> Option<&Arc> {
        self.arc_index.get(id).map(|&i| &self.arcs[i])
    }

    pub fn thimac(&self, id: &ThimacId) -> Option<&Thimac> {
        let entry = self.index.get(id)?;
        let (first, rest) = entry.path.split_first()?;
        let mut node = &self.roots[*first];
        for &i in rest {
            node = &node.children[i];
        }
        Some(node)
    }

    pub fn parent(&self, id: &ThimacId) -> Option<&ThimacId> {
        self.index.get(id).and_then(|e| e.parent.as_ref())
    }

    pub fn depth(&self, id: &ThimacId) -> Option<usize> {
        self.index.get(id).map(|e| e.path.len() - 1)
    }

    /// All thimacs in pre-order.
    pub fn thimacs(&self) -> Vec<&Thimac> {
        fn walk<'a>(nodes: &'a [Thimac], out: &mut Vec<&'a Thimac>) {
            for n in nodes {
                out.push(n);
                walk(&n.children, out);
            }
        }
        let mut out = Vec::with_capacity(self.index.len());
        walk(&self.roots, &mut out);
        out
    }

    pub fn thimac_count(&self) -> usize {
        self.index.len()
    }

    /// Every stage in the model, thimacs in pre-order and kinds in enum order.
    pub fn stages(&self) -> Vec<StageRef> {
        self.thimacs()
            .into_iter()
            .flat_map(|t| t.stages.iter().map(|k| StageRef::new(t.id.clone(), *k)))
            .collect()
    }

    pub fn has_stage(&self, stage: &StageRef) -> bool {
        self.lookup(stage).present
    }

    pub fn lookup(&self, stage: &StageRef) -> StageLookup<'_> {
        let owner = self.thimac(&stage.thimac);
        StageLookup {
            owner,
            present: owner.is_some_and(|t| t.has_stage(stage.kind)),
        }
    }

    pub fn arcs_from<'a>(&'a self, stage: &'a StageRef) -> impl Iterator<Item = &'a Arc> + 'a {
        self.arcs.iter().filter(move |a| &a.from == stage)
    }

    pub fn arcs_into<'a>(&'a self, stage: &'a StageRef) -> impl Iterator<Item = &'a Arc> + 'a {
        self.arcs.iter().filter(move |a| &a.to == stage)
    }

    /// Thimacs plus arcs.
    pub fn element_count(&self) -> usize {
        self.index.len() + self.arcs.len()
    }

    /// Flattens back into declarations; `build_model(m.to_decl())` yields `m`.
    pub fn to_decl(&self) -> ModelDecl {
        let thimacs = self
            .thimacs()
            .into_iter()
            .map(|t| ThimacDecl {
                id: t.id.clone(),
                label: t.label.clone(),
                parent: self.parent(&t.id).cloned(),
                stages: t.stages.iter().copied().collect(),
                things: t.things.clone(),
                memory: t.memory,
            })
            .collect();
        let arcs = self
            .arcs
            .iter()
            .map(|a| ArcDecl {
                id: a.id.clone(),
                kind: a.kind,
                from: a.from.clone(),
                to: a.to.clone(),
            })
            .collect();
        ModelDecl {
            name: self.name.clone(),
            notation: self.notation,
            thimacs,
            arcs,
        }
    }
}

/// Resolves declarations into a [`StaticModel`], collecting every problem
/// rather than stopping at the first.
pub fn build_model(decl: ModelDecl) -> Result<StaticModel, Vec<ModelError>> {
    let mut errors = Vec::new();

    let mut by_id: BTreeMap<ThimacId, usize> = BTreeMap::new();
    for (i, t) in decl.thimacs.iter().enumerate() {
        if by_id.insert(t.id.clone(), i).is_some() {
            errors.push(ModelError::DuplicateThimac(t.id.clone()));
        }
    }

    let mut stage_sets: Vec<BTreeSet<StageKind>> = Vec::with_capacity(decl.thimacs.len());
    for t in &decl.thimacs {
        let mut set = BTreeSet::new();
        for &k in &t.stages {
            if !set.insert(k) {
                errors.push(ModelError::DuplicateStage {
                    thimac: t.id.clone(),
                    kind: k,
                });
            }
        }
        let arrive = set.contains(&StageKind::Arrive);
        let accept = set.contains(&StageKind::Accept);
        if arrive != accept {
            errors.push(ModelError::InvalidStageSet {
                thimac: t.id.clone(),
                reason: "arrive and accept must appear together".into(),
            });
        } else if arrive && set.contains(&StageKind::Receive) {
            errors.push(ModelError::InvalidStageSet {
                thimac: t.id.clone(),
                reason: "arrive/accept refine receive and cannot appear alongside it".into(),
            });
        }
        stage_sets.push(set);
    }

    // Parent links: unresolved parents and cycles.
    for t in &decl.thimacs {
        if let Some(p) = &t.parent {
            if !by_id.contains_key(p) {
                errors.push(ModelError::UnresolvedParent {
                    thimac: t.id.clone(),
                    parent: p.clone(),
                });
            }
        }
    }
    let mut reported_cycle: BTreeSet<ThimacId> = BTreeSet::new();
    for t in &decl.thimacs {
        let mut seen = vec![t.id.clone()];
        let mut cur = t.parent.clone();
        while let Some(p) = cur {
            let Some(&pi) = by_id.get(&p) else { break };
            if let Some(pos) = seen.iter().position(|s| *s == p) {
                let cycle: Vec<ThimacId> = seen[pos..].to_vec();
                if cycle.iter().all(|c| !reported_cycle.contains(c)) {
                    reported_cycle.extend(cycle.iter().cloned());
                    let mut sorted = cycle;
                    let min = sorted
                        .iter()
                        .enumerate()
                        .min_by(|a, b| a.1.cmp(b.1))
                        .map(|(i, _)| i)
                        .unwrap_or(0);
                    sorted.rotate_left(min);
                    errors.push(ModelError::ContainmentCycle(sorted));
                }
                break;
            }
            seen.push(p.clone());
            cur = decl.thimacs[pi].parent.clone();
        }
    }

    let mut arc_index = BTreeMap::new();
    for (i, a) in decl.arcs.iter().enumerate() {
        if arc_index.insert(a.id.clone(), i).is_some() {
            errors.push(ModelError::DuplicateArc(a.id.clone()));
        }
        for end in [&a.from, &a.to] {
            let ok = by_id
                .get(&end.thimac)
                .is_some_and(|&ti| stage_sets[ti].contains(&end.kind));
            if !ok {
                errors.push(ModelError::UnresolvedStageRef {
                    arc: a.id.clone(),
                    stage: end.clone(),
                });
            }
        }
    }

    if !errors.is_empty() {
        return Err(errors);
    }

    // Assemble the tree bottom-up from the first declaration of each id.
    let mut children: BTreeMap<Option<ThimacId>, Vec<usize>> = BTreeMap::new();
    for (i, t) in decl.thimacs.iter().enumerate() {
        children.entry(t.parent.clone()).or_default().push(i);
    }
    fn assemble(
        i: usize,
        decl: &ModelDecl,
        stage_sets: &[BTreeSet<StageKind>],
        children: &BTreeMap<Option<ThimacId>, Vec<usize>>,
    ) -> Thimac {
        let t = &decl.thimacs[i];
        let kids = children
            .get(&Some(t.id.clone()))
            .map(|v| v.iter().map(|&c| assemble(c, decl, stage_sets, children)).collect())
            .unwrap_or_default();
        Thimac {
            id: t.id.clone(),
            label: t.label.clone(),
            stages: stage_sets[i].clone(),
            children: kids,
            things: t.things.clone(),
            memory: t.memory,
        }
    }
    let roots: Vec<Thimac> = children
        .get(&None)
        .map(|v| v.iter().map(|&i| assemble(i, &decl, &stage_sets, &children)).collect())
        .unwrap_or_default();

    let mut index = BTreeMap::new();
    fn index_tree(
        nodes: &[Thimac],
        parent: Option<&ThimacId>,
        prefix: &mut Vec<usize>,
        index: &mut BTreeMap<ThimacId, IndexEntry>,
    ) {
        for (i, n) in nodes.iter().enumerate() {
            prefix.push(i);
            index.insert(
                n.id.clone(),
                IndexEntry {
                    path: prefix.clone(),
                    parent: parent.cloned(),
                },
            );
            index_tree(&n.children, Some(&n.id), prefix, index);
            prefix.pop();
        }
    }
    index_tree(&roots, None, &mut Vec::new(), &mut index);

    let arcs = decl
        .arcs
        .into_iter()
        .map(|a| Arc {
            id: a.id,
            kind: a.kind,
            from: a.from,
            to: a.to,
        })
        .collect();

    Ok(StaticModel {
        name: decl.name,
        notation: decl.notation,
        roots,
        arcs,
        index,
        arc_index,
    })
}
