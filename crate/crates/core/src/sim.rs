//! Token-level execution of a chronology.
//!
//! Thing instances move through stages under the generic actions:
//!
//! - create: a thing appears at `(M, create)`;
//! - process: the thing must be a member of `M`; it gains a tag and stays put;
//! - release: a member is marked ready to leave, moving to `(M, release)`;
//! - transfer: a released thing goes out through `(M, transfer)`, then
//!   crosses a flow into the peer machine's transfer stage;
//! - receive (or arrive then accept): an incoming thing becomes a member.
//!
//! Firing an event pushes tokens along the flow arcs of its subdiagram,
//! breadth first from its entry points, then fires the triggers whose
//! source was reached.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::behavior::{evaluate_trace, Chronology, Occurrence, Trace};
use crate::eventize::Eventized;
use crate::ids::{ArcId, EventId, StageRef, TraceId};
use crate::model::{Arc, ArcKind, Notation, StageKind, StaticModel};
use crate::validate::flow_legal;

use StageKind::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InstanceId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Location {
    At(StageRef),
    InTransit(ArcId),
    Retired,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThingInstance {
    pub id: InstanceId,
    pub label: String,
    pub location: Location,
    /// Set while the thing waits at a transfer stage on its way out.
    pub outbound: bool,
    /// One entry per process action applied.
    pub tags: Vec<String>,
    /// Earlier locations, oldest first.
    pub history: Vec<Location>,
}

impl ThingInstance {
    pub fn is_live(&self) -> bool {
        self.location != Location::Retired
    }

    fn stage(&self) -> Option<&StageRef> {
        match &self.location {
            Location::At(s) => Some(s),
            _ => None,
        }
    }

    fn move_to(&mut self, loc: Location) {
        let old = std::mem::replace(&mut self.location, loc);
        self.history.push(old);
    }

    fn is_member_of(&self, machine: &crate::ids::ThimacId) -> bool {
        self.stage()
            .is_some_and(|s| &s.thimac == machine && matches!(s.kind, Create | Receive | Accept | Process))
    }
}

/// One applied generic action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionRecord {
    pub step: u64,
    pub stage: StageRef,
    pub instance: InstanceId,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SimState {
    step: u64,
    instances: Vec<ThingInstance>,
    log: Vec<Occurrence>,
    fired: BTreeSet<EventId>,
    actions: Vec<ActionRecord>,
    /// Triggers leaving the current event's subdiagram, applied when it ends.
    pending: VecDeque<ArcId>,
}

impl SimState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn instances(&self) -> &[ThingInstance] {
        &self.instances
    }

    pub fn instance(&self, id: InstanceId) -> Option<&ThingInstance> {
        self.instances.get(id.0)
    }

    pub fn log(&self) -> &[Occurrence] {
        &self.log
    }

    pub fn actions(&self) -> &[ActionRecord] {
        &self.actions
    }

    pub fn has_fired(&self, e: &EventId) -> bool {
        self.fired.contains(e)
    }

    fn live_at(&self, stage: &StageRef) -> Vec<InstanceId> {
        self.instances
            .iter()
            .filter(|i| i.stage() == Some(stage))
            .map(|i| i.id)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("event `{0}` is not enabled")]
    NotEnabled(EventId),
    #[error("event `{0}` is not in the chronology or has no subdiagram")]
    UnknownEvent(EventId),
    #[error("illegal action at `{stage}`{}: {reason}", .event.as_ref().map(|e| format!(" in event `{e}`")).unwrap_or_default())]
    IllegalAction {
        event: Option<EventId>,
        stage: StageRef,
        reason: String,
    },
    #[error("no event enabled and the trace so far is not a run: [{}]", .trace.iter().map(|e| e.as_str()).collect::<Vec<_>>().join(","))]
    Deadlock { trace: Vec<EventId> },
    #[error("no choice given for exclusive group `{0}`")]
    MissingChoice(String),
    #[error("`{event}` is not a member of exclusive group `{group}`")]
    InvalidChoice { group: String, event: EventId },
}

fn illegal(stage: &StageRef, reason: impl Into<String>) -> SimError {
    SimError::IllegalAction {
        event: None,
        stage: stage.clone(),
        reason: reason.into(),
    }
}

/// Applies the generic action of `stage` to an instance, or creates one
/// when the stage is a create stage and `instance` is `None`.
pub fn action_step(
    model: &StaticModel,
    state: &mut SimState,
    stage: &StageRef,
    instance: Option<InstanceId>,
) -> Result<InstanceId, SimError> {
    let Some(machine) = model.thimac(&stage.thimac).filter(|t| t.has_stage(stage.kind)) else {
        return Err(illegal(stage, "no such stage"));
    };
    let m = &stage.thimac;
    let step = state.step;

    if stage.kind == Create {
        if instance.is_some() {
            return Err(illegal(stage, "create makes a new thing and takes none"));
        }
        let label = machine.things.first().cloned().unwrap_or_else(|| m.to_string());
        if let Some(existing) = state.instances.iter().find(|i| i.label == label) {
            return if existing.stage() == Some(stage) {
                Ok(existing.id)
            } else {
                Err(illegal(stage, format!("`{label}` already exists elsewhere")))
            };
        }
        let id = InstanceId(state.instances.len());
        state.instances.push(ThingInstance {
            id,
            label,
            location: Location::At(stage.clone()),
            outbound: false,
            tags: Vec::new(),
            history: Vec::new(),
        });
        state.actions.push(ActionRecord {
            step,
            stage: stage.clone(),
            instance: id,
        });
        return Ok(id);
    }

    let Some(id) = instance else {
        return Err(illegal(stage, "needs a thing to act on"));
    };
    let Some(inst) = state.instances.get_mut(id.0) else {
        return Err(illegal(stage, format!("no instance #{}", id.0)));
    };
    if !inst.is_live() {
        return Err(illegal(stage, format!("`{}` is retired", inst.label)));
    }
    let here = Location::At(stage.clone());
    let at = |k: StageKind| Location::At(StageRef::new(m.clone(), k));

    match stage.kind {
        Create => unreachable!("handled above"),
        Process => {
            if !inst.is_member_of(m) {
                return Err(illegal(
                    stage,
                    format!(
                        "`{}` is not a member of `{m}`; it must be created or received first",
                        inst.label
                    ),
                ));
            }
            inst.tags.push(format!("{m}.process@{step}"));
        }
        Release => {
            if inst.location == here {
                return Ok(id);
            }
            if !inst.is_member_of(m) {
                return Err(illegal(stage, format!("`{}` is not a member of `{m}`", inst.label)));
            }
            inst.move_to(here);
        }
        Transfer => {
            if inst.location == here {
                return Ok(id);
            }
            if inst.location == at(Release) {
                inst.move_to(here);
                inst.outbound = true;
            } else {
                // Crossing in from a peer machine, from its transfer stage or
                // straight from its release.
                let peer = inst
                    .stage()
                    .cloned()
                    .filter(|s| &s.thimac != m && ((s.kind == Transfer && inst.outbound) || s.kind == Release));
                let Some(peer) = peer else {
                    return Err(illegal(
                        stage,
                        format!("`{}` was not released here and is not crossing in", inst.label),
                    ));
                };
                let exit = StageRef::new(peer.thimac.clone(), Transfer);
                let Some(arc) = model
                    .arcs_from(&exit)
                    .find(|a| a.kind == ArcKind::Flow && &a.to == stage)
                    .map(|a| a.id.clone())
                else {
                    return Err(illegal(stage, format!("no flow from `{exit}`")));
                };
                if peer.kind == Release {
                    inst.move_to(Location::At(exit));
                }
                inst.move_to(Location::InTransit(arc));
                inst.move_to(here);
                inst.outbound = false;
            }
        }
        Receive | Arrive => {
            if inst.location == here {
                return Ok(id);
            }
            if inst.location != at(Transfer) || inst.outbound {
                return Err(illegal(
                    stage,
                    format!("`{}` has not come in through `{m}.transfer`", inst.label),
                ));
            }
            inst.move_to(here);
        }
        Accept => {
            if inst.location == here {
                return Ok(id);
            }
            if inst.location != at(Arrive) {
                return Err(illegal(stage, format!("`{}` has not arrived", inst.label)));
            }
            inst.move_to(here);
        }
    }
    state.actions.push(ActionRecord {
        step,
        stage: stage.clone(),
        instance: id,
    });
    Ok(id)
}

/// How the simulator picks among enabled events.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BranchPolicy {
    /// Uniformly at random; the same seed always gives the same trace.
    Seeded(u64),
    /// The named event wins each exclusive group; among the remaining
    /// enabled events the earliest declared goes first.
    Scripted(BTreeMap<String, EventId>),
}

/// A model, its events and one chronology, ready to run.
#[derive(Debug, Clone, Copy)]
pub struct Simulator<'a> {
    model: &'a StaticModel,
    eventized: &'a Eventized,
    chronology: &'a Chronology,
}

impl<'a> Simulator<'a> {
    pub fn new(model: &'a StaticModel, eventized: &'a Eventized, chronology: &'a Chronology) -> Self {
        Self {
            model,
            eventized,
            chronology,
        }
    }

    fn occurred(&self, state: &SimState) -> Vec<bool> {
        self.chronology
            .events()
            .iter()
            .map(|e| state.fired.contains(e))
            .collect()
    }

    /// Indices of events that may fire next.
    pub fn enabled(&self, state: &SimState, excluded: &[bool]) -> Vec<usize> {
        let ch = self.chronology;
        let occurred = self.occurred(state);
        let dead = ch.dead_set(&occurred, excluded);
        (0..ch.len())
            .filter(|&i| {
                let preds = ch.predecessors(i);
                !occurred[i]
                    && !dead[i]
                    && preds.iter().all(|&p| occurred[p] || dead[p])
                    && (preds.is_empty() || preds.iter().any(|&p| occurred[p]))
            })
            .collect()
    }

    /// Fires one event if it is enabled.
    pub fn fire_event(&self, state: &mut SimState, event: &EventId) -> Result<(), SimError> {
        let i = self
            .chronology
            .index_of(event)
            .ok_or_else(|| SimError::UnknownEvent(event.clone()))?;
        if !self.enabled(state, &[]).contains(&i) {
            return Err(SimError::NotEnabled(event.clone()));
        }
        self.fire(state, event).map_err(|e| match e {
            SimError::IllegalAction { stage, reason, .. } => SimError::IllegalAction {
                event: Some(event.clone()),
                stage,
                reason,
            },
            other => other,
        })
    }

    fn fire(&self, state: &mut SimState, event: &EventId) -> Result<(), SimError> {
        let model = self.model;
        let sub = self
            .eventized
            .subdiagram_of(event)
            .ok_or_else(|| SimError::UnknownEvent(event.clone()))?;
        let arcs: Vec<&Arc> = sub.arcs.iter().filter_map(|a| model.arc(a)).collect();
        let flows: Vec<&Arc> = arcs.iter().copied().filter(|a| a.kind == ArcKind::Flow).collect();
        let triggers: Vec<&Arc> = arcs.iter().copied().filter(|a| a.kind == ArcKind::Trigger).collect();
        let has_inflow = |s: &StageRef| flows.iter().any(|a| &a.to == s);

        let mut queue: VecDeque<(StageRef, InstanceId)> = VecDeque::new();
        // A thing may pass a transfer stage twice: once inbound, once outbound.
        let mut seeded: HashSet<(StageRef, InstanceId, bool)> = HashSet::new();
        let mut push = |queue: &mut VecDeque<_>, state: &SimState, s: &StageRef, i: InstanceId| {
            if seeded.insert((s.clone(), i, state.instances[i.0].outbound)) {
                queue.push_back((s.clone(), i));
            }
        };

        // Entry points: creations nothing inside leads to, things already
        // waiting on a stage, and members of machines acted on first.
        for s in sub.stages.iter().filter(|s| s.kind == Create) {
            if !has_inflow(s) && !triggers.iter().any(|t| &t.to == s) {
                let id = action_step(model, state, s, None)?;
                push(&mut queue, state, s, id);
            }
        }
        for s in &sub.stages {
            for id in state.live_at(s) {
                push(&mut queue, state, s, id);
            }
        }
        for s in sub.stages.iter().filter(|s| matches!(s.kind, Process | Release)) {
            if has_inflow(s) || queue.iter().any(|(q, _)| q == s) {
                continue;
            }
            let members: Vec<InstanceId> = state
                .instances
                .iter()
                .filter(|i| i.is_member_of(&s.thimac))
                .map(|i| i.id)
                .collect();
            if members.is_empty() {
                return Err(illegal(s, format!("nothing in `{}` to {}", s.thimac, s.kind)));
            }
            for id in members {
                if s.kind == Release {
                    action_step(model, state, s, Some(id))?;
                }
                push(&mut queue, state, s, id);
            }
        }

        let mut reached: BTreeSet<StageRef> = BTreeSet::new();
        let mut traversed: HashSet<(ArcId, InstanceId)> = HashSet::new();
        let mut triggered: BTreeSet<ArcId> = BTreeSet::new();
        loop {
            while let Some((s, id)) = queue.pop_front() {
                reached.insert(s.clone());
                let inst = &state.instances[id.0];
                if !inst.is_live() {
                    continue;
                }
                let outbound = inst.outbound;
                for a in flows.iter().filter(|a| a.from == s) {
                    if s.kind == Transfer && a.crosses_machines() != outbound {
                        continue;
                    }
                    if !traversed.insert((a.id.clone(), id)) {
                        continue;
                    }
                    let landed = self.traverse(state, a, id)?;
                    push(&mut queue, state, &a.to, landed);
                }
            }
            for t in &triggers {
                if !reached.contains(&t.from) || !triggered.insert(t.id.clone()) {
                    continue;
                }
                if sub.stages.contains(&t.to) {
                    reached.insert(t.to.clone());
                    if t.to.kind == Create {
                        let id = action_step(model, state, &t.to, None)?;
                        push(&mut queue, state, &t.to, id);
                    }
                } else {
                    state.pending.push_back(t.id.clone());
                }
            }
            if queue.is_empty() {
                break;
            }
        }

        if let Some(s) = sub.stages.iter().find(|s| s.kind != Create && !reached.contains(s)) {
            return Err(illegal(s, "no thing reaches this stage"));
        }

        while let Some(t) = state.pending.pop_front() {
            if let Some(arc) = model.arc(&t) {
                if arc.to.kind == Create {
                    action_step(model, state, &arc.to, None)?;
                }
            }
        }

        // Things sent out of a machine with nowhere to go leave the model.
        for inst in state.instances.iter_mut() {
            let stuck = inst.outbound
                && inst.stage().is_some_and(|s| {
                    s.kind == Transfer
                        && !model
                            .arcs_from(s)
                            .any(|a| a.kind == ArcKind::Flow && a.crosses_machines())
                });
            if stuck {
                inst.move_to(Location::Retired);
                inst.outbound = false;
            }
        }

        state.log.push(Occurrence::new(event.clone(), state.step));
        state.fired.insert(event.clone());
        state.step += 1;
        Ok(())
    }

    /// Moves a thing along one flow arc, returning the instance that ends up
    /// at the target (a new one when an elided flow feeds a create stage).
    fn traverse(&self, state: &mut SimState, arc: &Arc, id: InstanceId) -> Result<InstanceId, SimError> {
        let model = self.model;
        let elided = model.notation() == Notation::Simplified
            && arc.crosses_machines()
            && !flow_legal(arc.from.kind, arc.to.kind, false);
        if !elided {
            return action_step(model, state, &arc.to, Some(id));
        }
        let inst = &mut state.instances[id.0];
        if inst.stage().map(|s| &s.thimac) != Some(&arc.from.thimac) {
            return Err(illegal(
                &arc.to,
                format!("`{}` is not in `{}`", inst.label, arc.from.thimac),
            ));
        }
        inst.move_to(Location::InTransit(arc.id.clone()));
        inst.outbound = false;
        if arc.to.kind == Create {
            inst.move_to(Location::Retired);
            return action_step(model, state, &arc.to, None);
        }
        inst.move_to(Location::At(arc.to.clone()));
        if arc.to.kind == Process {
            inst.tags.push(format!("{}.process@{}", arc.to.thimac, state.step));
        }
        state.actions.push(ActionRecord {
            step: state.step,
            stage: arc.to.clone(),
            instance: id,
        });
        Ok(id)
    }

    /// Runs until no event is enabled and returns the trace produced.
    pub fn run(&self, policy: &BranchPolicy, trace_id: impl Into<TraceId>) -> Result<(Trace, SimState), SimError> {
        let ch = self.chronology;
        let groups = ch.groups();
        let mut excluded = vec![false; ch.len()];
        let mut scripted: BTreeSet<&str> = BTreeSet::new();
        if let BranchPolicy::Scripted(choices) = policy {
            for (group, event) in choices {
                let Some(g) = groups.iter().find(|g| &g.name == group) else {
                    return Err(SimError::InvalidChoice {
                        group: group.clone(),
                        event: event.clone(),
                    });
                };
                if !g.members.contains(event) {
                    return Err(SimError::InvalidChoice {
                        group: group.clone(),
                        event: event.clone(),
                    });
                }
                for m in g.members.iter().filter(|m| *m != event) {
                    if let Some(i) = ch.index_of(m) {
                        excluded[i] = true;
                    }
                }
                scripted.insert(group);
            }
        }
        let mut rng = match policy {
            BranchPolicy::Seeded(seed) => Some(ChaCha8Rng::seed_from_u64(*seed)),
            BranchPolicy::Scripted(_) => None,
        };

        let mut state = SimState::new();
        loop {
            let enabled = self.enabled(&state, &excluded);
            if enabled.is_empty() {
                break;
            }
            let pick = match rng.as_mut() {
                Some(rng) => enabled[rng.gen_range(0..enabled.len())],
                None => {
                    for g in groups.iter().filter(|g| !scripted.contains(g.name.as_str())) {
                        let open = g
                            .members
                            .iter()
                            .filter_map(|m| ch.index_of(m))
                            .filter(|i| enabled.contains(i))
                            .count();
                        if open > 1 {
                            return Err(SimError::MissingChoice(g.name.clone()));
                        }
                    }
                    enabled[0]
                }
            };
            let event = ch.events()[pick].clone();
            self.fire_event(&mut state, &event)?;
        }

        let trace = Trace::new(trace_id, state.log.clone()).expect("events fire once, in step order");
        if !evaluate_trace(ch, &trace).is_true() {
            return Err(SimError::Deadlock {
                trace: trace.event_ids(),
            });
        }
        Ok((trace, state))
    }
}

/// Simulates one complete run of `chronology` over `model`.
pub fn simulate(
    model: &StaticModel,
    eventized: &Eventized,
    chronology: &Chronology,
    policy: &BranchPolicy,
) -> Result<Trace, SimError> {
    Simulator::new(model, eventized, chronology)
        .run(policy, "sim")
        .map(|(t, _)| t)
}
