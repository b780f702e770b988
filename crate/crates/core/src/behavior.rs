//! Chronologies of events and truth evaluation of traces against them.
//!
//! A chronology is a DAG of events (edges mean "strictly before") plus
//! groups of mutually exclusive alternatives. Forks and joins are
//! conjunctive unless an exclusive group says otherwise.
//!
//! Given the set `R` of events that occurred, an event is *dead* when it
//! shares an exclusive group with a member of `R`, or when it has
//! predecessors and all of them are dead. `R` is a run when it
//!
//! - holds at most one member of each exclusive group,
//! - contains a start event,
//! - is exactly the set of events that are not dead, and
//! - gives every non-end member a successor inside `R`.
//!
//! A trace is true when its events form a run, every edge between two
//! occurred events is respected in both position and timestamp, and every
//! windowed event lands in its window.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::eventize::{Event, Window};
use crate::ids::{ChronologyId, EventId, TraceId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupDecl {
    pub name: Option<String>,
    pub members: Vec<EventId>,
}

/// Chronology as written in source, before resolution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChronologyDecl {
    pub id: ChronologyId,
    /// Explicit members. Events mentioned anywhere else are members too;
    /// when nothing at all is mentioned every event is a member.
    pub events: Vec<EventId>,
    pub edges: Vec<(EventId, EventId)>,
    pub exclusive: Vec<GroupDecl>,
    pub start: Option<Vec<EventId>>,
    pub end: Option<Vec<EventId>>,
}

impl ChronologyDecl {
    pub fn new(id: impl Into<ChronologyId>) -> Self {
        Self {
            id: id.into(),
            events: Vec::new(),
            edges: Vec::new(),
            exclusive: Vec::new(),
            start: None,
            end: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChronologyError {
    #[error("chronology `{chronology}` refers to unknown event `{event}`")]
    UnknownEvent { chronology: ChronologyId, event: EventId },
    #[error("chronology `{chronology}` has a cycle: {}", join(.cycle, " -> "))]
    CycleDetected {
        chronology: ChronologyId,
        cycle: Vec<EventId>,
    },
    #[error("chronology `{chronology}` orders `{from}` before `{to}`, but both sit in exclusive group `{group}`")]
    EdgeInsideExclusiveGroup {
        chronology: ChronologyId,
        group: String,
        from: EventId,
        to: EventId,
    },
}

fn join(ids: &[EventId], sep: &str) -> String {
    ids.iter().map(EventId::as_str).collect::<Vec<_>>().join(sep)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExclusiveGroup {
    pub name: String,
    pub members: Vec<EventId>,
}

/// A validated chronology. Events are addressed by their position in
/// [`Chronology::events`], which follows document order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chronology {
    id: ChronologyId,
    events: Vec<EventId>,
    index: HashMap<EventId, usize>,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
    groups: Vec<(String, Vec<usize>)>,
    start: Vec<bool>,
    end: Vec<bool>,
    windows: Vec<Option<Window>>,
    topo: Vec<usize>,
}

pub fn build_chronology(events: &[Event], decl: &ChronologyDecl) -> Result<Chronology, ChronologyError> {
    let known: HashMap<&EventId, &Event> = events.iter().map(|e| (&e.id, e)).collect();
    let unknown = |e: &EventId| ChronologyError::UnknownEvent {
        chronology: decl.id.clone(),
        event: e.clone(),
    };

    let mut mentioned: BTreeSet<&EventId> = BTreeSet::new();
    let all_refs = decl
        .events
        .iter()
        .chain(decl.edges.iter().flat_map(|(a, b)| [a, b]))
        .chain(decl.exclusive.iter().flat_map(|g| g.members.iter()))
        .chain(decl.start.iter().flatten())
        .chain(decl.end.iter().flatten());
    for e in all_refs {
        if !known.contains_key(e) {
            return Err(unknown(e));
        }
        mentioned.insert(e);
    }

    let members: Vec<EventId> = events
        .iter()
        .filter(|e| mentioned.is_empty() || mentioned.contains(&e.id))
        .map(|e| e.id.clone())
        .collect();
    let index: HashMap<EventId, usize> = members.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
    let n = members.len();

    let mut succ = vec![Vec::new(); n];
    let mut pred = vec![Vec::new(); n];
    for (a, b) in &decl.edges {
        let (ia, ib) = (index[a], index[b]);
        if !succ[ia].contains(&ib) {
            succ[ia].push(ib);
            pred[ib].push(ia);
        }
    }
    for list in succ.iter_mut().chain(pred.iter_mut()) {
        list.sort_unstable();
    }

    if let Some(cycle) = find_cycle(&succ) {
        return Err(ChronologyError::CycleDetected {
            chronology: decl.id.clone(),
            cycle: cycle.into_iter().map(|i| members[i].clone()).collect(),
        });
    }

    let mut groups = Vec::with_capacity(decl.exclusive.len());
    for (gi, g) in decl.exclusive.iter().enumerate() {
        let name = g.name.clone().unwrap_or_else(|| format!("g{}", gi + 1));
        let mut ms: Vec<usize> = g.members.iter().map(|m| index[m]).collect();
        ms.sort_unstable();
        ms.dedup();
        for &x in &ms {
            if let Some(&y) = succ[x].iter().find(|y| ms.contains(y)) {
                return Err(ChronologyError::EdgeInsideExclusiveGroup {
                    chronology: decl.id.clone(),
                    group: name,
                    from: members[x].clone(),
                    to: members[y].clone(),
                });
            }
        }
        groups.push((name, ms));
    }

    let flags = |explicit: &Option<Vec<EventId>>, default: &dyn Fn(usize) -> bool| -> Vec<bool> {
        match explicit {
            Some(list) => {
                let mut v = vec![false; n];
                for e in list {
                    v[index[e]] = true;
                }
                v
            }
            None => (0..n).map(default).collect(),
        }
    };
    let start = flags(&decl.start, &|i| pred[i].is_empty());
    let end = flags(&decl.end, &|i| succ[i].is_empty());
    let windows = members.iter().map(|e| known[e].window).collect();
    let topo = topo_order(&succ, &pred);

    Ok(Chronology {
        id: decl.id.clone(),
        events: members,
        index,
        succ,
        pred,
        groups,
        start,
        end,
        windows,
        topo,
    })
}

fn find_cycle(succ: &[Vec<usize>]) -> Option<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let n = succ.len();
    let mut mark = vec![Mark::New; n];
    for root in 0..n {
        if mark[root] != Mark::New {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        mark[root] = Mark::Active;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if let Some(&w) = succ[v].get(*next) {
                *next += 1;
                match mark[w] {
                    Mark::New => {
                        mark[w] = Mark::Active;
                        stack.push((w, 0));
                    }
                    Mark::Active => {
                        let pos = stack.iter().position(|&(x, _)| x == w).unwrap_or(0);
                        let mut cycle: Vec<usize> = stack[pos..].iter().map(|&(x, _)| x).collect();
                        cycle.push(w);
                        return Some(cycle);
                    }
                    Mark::Done => {}
                }
            } else {
                mark[v] = Mark::Done;
                stack.pop();
            }
        }
    }
    None
}

/// Kahn's algorithm, smallest index first among ready events.
fn topo_order(succ: &[Vec<usize>], pred: &[Vec<usize>]) -> Vec<usize> {
    let mut indeg: Vec<usize> = pred.iter().map(Vec::len).collect();
    let mut ready: BTreeSet<usize> = (0..succ.len()).filter(|&i| indeg[i] == 0).collect();
    let mut out = Vec::with_capacity(succ.len());
    while let Some(v) = ready.pop_first() {
        out.push(v);
        for &w in &succ[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                ready.insert(w);
            }
        }
    }
    out
}

impl Chronology {
    pub fn id(&self) -> &ChronologyId {
        &self.id
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn events(&self) -> &[EventId] {
        &self.events
    }

    pub fn index_of(&self, id: &EventId) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn successors(&self, i: usize) -> &[usize] {
        &self.succ[i]
    }

    pub fn predecessors(&self, i: usize) -> &[usize] {
        &self.pred[i]
    }

    pub fn edges(&self) -> Vec<(EventId, EventId)> {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(a, bs)| bs.iter().map(move |&b| (a, b)))
            .map(|(a, b)| (self.events[a].clone(), self.events[b].clone()))
            .collect()
    }

    pub fn groups(&self) -> Vec<ExclusiveGroup> {
        self.groups
            .iter()
            .map(|(name, ms)| ExclusiveGroup {
                name: name.clone(),
                members: ms.iter().map(|&i| self.events[i].clone()).collect(),
            })
            .collect()
    }

    pub(crate) fn group_members(&self) -> &[(String, Vec<usize>)] {
        &self.groups
    }

    pub fn is_start(&self, i: usize) -> bool {
        self.start[i]
    }

    pub fn is_end(&self, i: usize) -> bool {
        self.end[i]
    }

    pub fn start_events(&self) -> Vec<EventId> {
        self.flagged(&self.start)
    }

    pub fn end_events(&self) -> Vec<EventId> {
        self.flagged(&self.end)
    }

    fn flagged(&self, flags: &[bool]) -> Vec<EventId> {
        flags
            .iter()
            .enumerate()
            .filter(|(_, f)| **f)
            .map(|(i, _)| self.events[i].clone())
            .collect()
    }

    pub fn window(&self, i: usize) -> Option<Window> {
        self.windows[i]
    }

    /// Event indices in canonical topological order.
    pub fn topo_order(&self) -> &[usize] {
        &self.topo
    }

    /// Events that can no longer occur once `occurred` have, with
    /// `excluded` treated as ruled out from the start.
    pub fn dead_set(&self, occurred: &[bool], excluded: &[bool]) -> Vec<bool> {
        let n = self.len();
        let mut dead: Vec<bool> = (0..n).map(|i| excluded.get(i).copied().unwrap_or(false)).collect();
        for (_, ms) in &self.groups {
            if let Some(&winner) = ms.iter().find(|&&m| occurred[m]) {
                for &m in ms {
                    if m != winner {
                        dead[m] = true;
                    }
                }
            }
        }
        for &v in &self.topo {
            if !dead[v] && !self.pred[v].is_empty() && self.pred[v].iter().all(|&p| dead[p]) {
                dead[v] = true;
            }
        }
        dead
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Occurrence {
    pub event: EventId,
    pub time: u64,
}

impl Occurrence {
    pub fn new(event: impl Into<EventId>, time: u64) -> Self {
        Self {
            event: event.into(),
            time,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("trace `{trace}` lists `{event}` more than once")]
    DuplicateEvent { trace: TraceId, event: EventId },
    #[error("trace `{trace}`: `{event}` at time {time} comes after time {previous}")]
    DecreasingTime {
        trace: TraceId,
        event: EventId,
        time: u64,
        previous: u64,
    },
}

/// A timestamped sequence of distinct event occurrences with non-decreasing
/// times.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Trace {
    id: TraceId,
    occurrences: Vec<Occurrence>,
}

impl Trace {
    pub fn new(id: impl Into<TraceId>, occurrences: Vec<Occurrence>) -> Result<Self, TraceError> {
        let id = id.into();
        let mut seen = BTreeSet::new();
        let mut previous = 0;
        for o in &occurrences {
            if !seen.insert(&o.event) {
                return Err(TraceError::DuplicateEvent {
                    trace: id,
                    event: o.event.clone(),
                });
            }
            if o.time < previous {
                return Err(TraceError::DecreasingTime {
                    trace: id,
                    event: o.event.clone(),
                    time: o.time,
                    previous,
                });
            }
            previous = o.time;
        }
        Ok(Self { id, occurrences })
    }

    /// Events at times 0, 1, 2, ...
    pub fn from_sequence<E: Clone + Into<EventId>>(id: impl Into<TraceId>, events: &[E]) -> Result<Self, TraceError> {
        let occ = events
            .iter()
            .enumerate()
            .map(|(t, e)| Occurrence::new(e.clone(), t as u64))
            .collect();
        Self::new(id, occ)
    }

    pub fn id(&self) -> &TraceId {
        &self.id
    }

    pub fn occurrences(&self) -> &[Occurrence] {
        &self.occurrences
    }

    pub fn len(&self) -> usize {
        self.occurrences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occurrences.is_empty()
    }

    pub fn event_ids(&self) -> Vec<EventId> {
        self.occurrences.iter().map(|o| o.event.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Violation {
    NotStarted,
    UnknownEvent {
        event: EventId,
    },
    /// `before` must precede `after` but did not.
    OrderViolation {
        before: EventId,
        after: EventId,
    },
    ExclusivityViolation {
        group: String,
        events: Vec<EventId>,
    },
    /// Occurred although every path leading to it was ruled out.
    MissingPredecessor {
        event: EventId,
    },
    /// A start event that was still possible did not occur.
    MissingStart {
        event: EventId,
    },
    /// `event` occurred but a successor it requires did not.
    MissingSuccessor {
        event: EventId,
    },
    WindowViolation {
        event: EventId,
        time: u64,
        window: Window,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotStarted => f.write_str("NotStarted"),
            Violation::UnknownEvent { event } => write!(f, "UnknownEvent({event})"),
            Violation::OrderViolation { before, after } => {
                write!(f, "OrderViolation({before},{after})")
            }
            Violation::ExclusivityViolation { group, events } => {
                write!(f, "ExclusivityViolation({group}:{{{}}})", join(events, ","))
            }
            Violation::MissingPredecessor { event } => write!(f, "MissingPredecessor({event})"),
            Violation::MissingStart { event } => write!(f, "MissingStart({event})"),
            Violation::MissingSuccessor { event } => write!(f, "MissingSuccessor({event})"),
            Violation::WindowViolation { event, time, window } => write!(
                f,
                "WindowViolation({event}@{time} outside {}..{})",
                window.start, window.end
            ),
        }
    }
}

/// Truth assignment for a trace: either the realized run or the first
/// reason it fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    True { run: Vec<EventId> },
    False { violation: Violation },
}

impl Verdict {
    pub fn is_true(&self) -> bool {
        matches!(self, Verdict::True { .. })
    }

    pub fn violation(&self) -> Option<&Violation> {
        match self {
            Verdict::True { .. } => None,
            Verdict::False { violation } => Some(violation),
        }
    }

    pub fn run(&self) -> Option<&[EventId]> {
        match self {
            Verdict::True { run } => Some(run),
            Verdict::False { .. } => None,
        }
    }

    /// `TRUE run=[E1,E2]` or `FALSE reason=NotStarted`.
    pub fn summary(&self) -> String {
        match self {
            Verdict::True { run } => format!("TRUE run=[{}]", join(run, ",")),
            Verdict::False { violation } => format!("FALSE reason={violation}"),
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.summary())
    }
}

impl Serialize for Verdict {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Record<'a> {
            truth: bool,
            #[serde(skip_serializing_if = "Option::is_none")]
            run: Option<&'a [EventId]>,
            #[serde(skip_serializing_if = "Option::is_none")]
            violation: Option<&'a Violation>,
        }
        Record {
            truth: self.is_true(),
            run: self.run(),
            violation: self.violation(),
        }
        .serialize(serializer)
    }
}

fn fail(violation: Violation) -> Verdict {
    Verdict::False { violation }
}

/// Decides whether `trace` realizes `chronology`. Runs in time linear in
/// the edges plus the trace and never consults its own earlier results.
pub fn evaluate_trace(chronology: &Chronology, trace: &Trace) -> Verdict {
    let ch = chronology;
    let n = ch.len();
    let occ = trace.occurrences();

    let mut at: Vec<Option<(usize, u64)>> = vec![None; n];
    let mut order = Vec::with_capacity(occ.len());
    for (i, o) in occ.iter().enumerate() {
        match ch.index_of(&o.event) {
            Some(k) => {
                at[k] = Some((i, o.time));
                order.push(k);
            }
            None => return fail(Violation::UnknownEvent { event: o.event.clone() }),
        }
    }
    let ev = |i: usize| ch.events[i].clone();

    for (i, &v) in order.iter().enumerate() {
        let tv = occ[i].time;
        for &u in ch.predecessors(v) {
            if let Some((pu, tu)) = at[u] {
                if pu > i || tu >= tv {
                    return fail(Violation::OrderViolation {
                        before: ev(u),
                        after: ev(v),
                    });
                }
            }
        }
    }

    let occurred: Vec<bool> = at.iter().map(Option::is_some).collect();
    for (name, ms) in ch.group_members() {
        let mut hit: Vec<usize> = ms.iter().copied().filter(|&m| occurred[m]).collect();
        if hit.len() > 1 {
            hit.sort_by_key(|&m| at[m].map(|(p, _)| p));
            return fail(Violation::ExclusivityViolation {
                group: name.clone(),
                events: hit.into_iter().map(ev).collect(),
            });
        }
    }

    if !(0..n).any(|i| occurred[i] && ch.is_start(i)) {
        return fail(Violation::NotStarted);
    }

    let dead = ch.dead_set(&occurred, &[]);
    if let Some(&v) = order.iter().find(|&&v| dead[v]) {
        return fail(Violation::MissingPredecessor { event: ev(v) });
    }

    if let Some(&v) = ch.topo_order().iter().find(|&&v| !occurred[v] && !dead[v]) {
        let first_pred = ch
            .predecessors(v)
            .iter()
            .copied()
            .filter(|&p| occurred[p])
            .min_by_key(|&p| at[p].map(|(pos, _)| pos));
        return fail(match first_pred {
            Some(p) => Violation::MissingSuccessor { event: ev(p) },
            None => Violation::MissingStart { event: ev(v) },
        });
    }

    if let Some(&v) = order
        .iter()
        .find(|&&v| !ch.is_end(v) && !ch.successors(v).iter().any(|&s| occurred[s]))
    {
        return fail(Violation::MissingSuccessor { event: ev(v) });
    }

    for (i, &v) in order.iter().enumerate() {
        if let Some(w) = ch.window(v) {
            if !w.contains(occ[i].time) {
                return fail(Violation::WindowViolation {
                    event: ev(v),
                    time: occ[i].time,
                    window: w,
                });
            }
        }
    }

    Verdict::True {
        run: order.into_iter().map(ev).collect(),
    }
}

/// True iff `event` occurs in `trace`.
pub fn truth_of_event(trace: &Trace, event: &EventId) -> bool {
    trace.occurrences().iter().any(|o| &o.event == event)
}

pub const DEFAULT_RUN_BOUND: usize = 10_000;
const MAX_CHOICE_COMBINATIONS: u128 = 1 << 22;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunsError {
    #[error("more than {bound} runs")]
    BoundExceeded { bound: usize },
    #[error("{combinations} exclusive-choice combinations is too many to enumerate")]
    ChoiceSpaceTooLarge { combinations: u128 },
}

/// All runs of the chronology, each in canonical topological order, sorted.
///
/// Every run is fixed by which member (if any) of each exclusive group
/// occurs, so the search walks those choices rather than event subsets.
pub fn enumerate_runs(chronology: &Chronology, bound: usize) -> Result<Vec<Vec<EventId>>, RunsError> {
    let ch = chronology;
    let groups = ch.group_members();
    let combinations: u128 = groups
        .iter()
        .map(|(_, ms)| ms.len() as u128 + 1)
        .try_fold(1u128, |acc, x| acc.checked_mul(x))
        .unwrap_or(u128::MAX);
    if combinations > MAX_CHOICE_COMBINATIONS {
        return Err(RunsError::ChoiceSpaceTooLarge { combinations });
    }

    let n = ch.len();
    let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
    // choice[g] == 0 means no member of group g occurs.
    let mut choice = vec![0usize; groups.len()];
    loop {
        let mut occurred = vec![false; n];
        for (g, (_, ms)) in groups.iter().enumerate() {
            if choice[g] > 0 {
                occurred[ms[choice[g] - 1]] = true;
            }
        }
        let dead = ch.dead_set(&occurred, &[]);
        let run: Vec<usize> = ch.topo_order().iter().copied().filter(|&v| !dead[v]).collect();
        if !run.is_empty() && !found.contains(&run) {
            let ids: Vec<EventId> = run.iter().map(|&i| ch.events[i].clone()).collect();
            let trace = Trace::from_sequence("run", &ids).expect("distinct topological order");
            if evaluate_trace(ch, &trace).is_true() {
                found.insert(run);
                if found.len() > bound {
                    return Err(RunsError::BoundExceeded { bound });
                }
            }
        }

        // Odometer step.
        let mut g = 0;
        loop {
            if g == groups.len() {
                return Ok(found
                    .into_iter()
                    .map(|r| r.into_iter().map(|i| ch.events[i].clone()).collect())
                    .collect());
            }
            choice[g] += 1;
            if choice[g] <= groups[g].1.len() {
                break;
            }
            choice[g] = 0;
            g += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn events(ids: &[&str]) -> Vec<Event> {
        ids.iter().map(|i| Event::new(*i, format!("S_{i}"))).collect()
    }

    fn chain_decl(edges: &[(&str, &str)]) -> ChronologyDecl {
        let mut d = ChronologyDecl::new("B");
        d.edges = edges.iter().map(|(a, b)| ((*a).into(), (*b).into())).collect();
        d
    }

    fn trace(seq: &[&str]) -> Trace {
        Trace::from_sequence("t", seq).unwrap()
    }

    #[test]
    fn cycle_is_detected() {
        let evs = events(&["E1", "E2"]);
        let err = build_chronology(&evs, &chain_decl(&[("E1", "E2"), ("E2", "E1")])).unwrap_err();
        match err {
            ChronologyError::CycleDetected { cycle, .. } => {
                assert_eq!(join(&cycle, ","), "E1,E2,E1");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn single_event_is_start_and_end() {
        let evs = events(&["E1"]);
        let ch = build_chronology(&evs, &ChronologyDecl::new("B")).unwrap();
        assert_eq!(ch.start_events(), vec![EventId::from("E1")]);
        assert_eq!(ch.end_events(), vec![EventId::from("E1")]);
        assert!(evaluate_trace(&ch, &trace(&["E1"])).is_true());
    }

    #[test]
    fn unknown_event_and_group_edge() {
        let evs = events(&["E1", "E2"]);
        assert!(matches!(
            build_chronology(&evs, &chain_decl(&[("E1", "E9")])),
            Err(ChronologyError::UnknownEvent { .. })
        ));
        let mut d = chain_decl(&[("E1", "E2")]);
        d.exclusive.push(GroupDecl {
            name: None,
            members: vec!["E1".into(), "E2".into()],
        });
        assert!(matches!(
            build_chronology(&evs, &d),
            Err(ChronologyError::EdgeInsideExclusiveGroup { ref group, .. }) if group == "g1"
        ));
    }

    #[test]
    fn chain_verdicts() {
        let evs = events(&["E1", "E2", "E3"]);
        let ch = build_chronology(&evs, &chain_decl(&[("E1", "E2"), ("E2", "E3")])).unwrap();
        assert_eq!(
            evaluate_trace(&ch, &trace(&["E1", "E2", "E3"])).summary(),
            "TRUE run=[E1,E2,E3]"
        );
        assert_eq!(
            evaluate_trace(&ch, &trace(&[])).violation(),
            Some(&Violation::NotStarted)
        );
        assert_eq!(
            evaluate_trace(&ch, &trace(&["E1", "E2"])).violation(),
            Some(&Violation::MissingSuccessor { event: "E2".into() })
        );
        assert_eq!(
            evaluate_trace(&ch, &trace(&["E2", "E1", "E3"])).violation(),
            Some(&Violation::OrderViolation {
                before: "E1".into(),
                after: "E2".into()
            })
        );
        assert_eq!(
            evaluate_trace(&ch, &trace(&["E1", "E9"])).violation(),
            Some(&Violation::UnknownEvent { event: "E9".into() })
        );
        // Equal timestamps on ordered events are not allowed.
        let same = Trace::new(
            "t",
            vec![
                Occurrence::new("E1", 0),
                Occurrence::new("E2", 0),
                Occurrence::new("E3", 1),
            ],
        )
        .unwrap();
        assert!(!evaluate_trace(&ch, &same).is_true());
        assert_eq!(enumerate_runs(&ch, 10).unwrap().len(), 1);
    }

    #[test]
    fn conjunctive_join_needs_both_starts() {
        let evs = events(&["Z1", "Z2", "SUM", "ONE"]);
        let ch = build_chronology(&evs, &chain_decl(&[("Z1", "SUM"), ("Z2", "SUM"), ("SUM", "ONE")])).unwrap();
        assert!(evaluate_trace(&ch, &trace(&["Z2", "Z1", "SUM", "ONE"])).is_true());
        // Concurrent starts may share a timestamp.
        let tied = Trace::new(
            "t",
            vec![
                Occurrence::new("Z1", 0),
                Occurrence::new("Z2", 0),
                Occurrence::new("SUM", 1),
                Occurrence::new("ONE", 2),
            ],
        )
        .unwrap();
        assert!(evaluate_trace(&ch, &tied).is_true());
        assert_eq!(
            evaluate_trace(&ch, &trace(&["Z1", "SUM", "ONE"])).violation(),
            Some(&Violation::MissingStart { event: "Z2".into() })
        );
    }

    #[test]
    fn exclusive_branches() {
        let evs = events(&["A", "B", "C", "D"]);
        let mut d = chain_decl(&[("A", "B"), ("A", "C"), ("B", "D"), ("C", "D")]);
        d.exclusive.push(GroupDecl {
            name: Some("pick".into()),
            members: vec!["B".into(), "C".into()],
        });
        let ch = build_chronology(&evs, &d).unwrap();
        assert!(evaluate_trace(&ch, &trace(&["A", "B", "D"])).is_true());
        assert!(evaluate_trace(&ch, &trace(&["A", "C", "D"])).is_true());
        assert_eq!(
            evaluate_trace(&ch, &trace(&["A", "B", "C", "D"])).violation(),
            Some(&Violation::ExclusivityViolation {
                group: "pick".into(),
                events: vec!["B".into(), "C".into()]
            })
        );
        assert_eq!(
            evaluate_trace(&ch, &trace(&["A", "D"])).violation(),
            Some(&Violation::MissingSuccessor { event: "A".into() })
        );
        let runs = enumerate_runs(&ch, 10).unwrap();
        assert_eq!(runs.len(), 2);
        assert!(matches!(
            enumerate_runs(&ch, 1),
            Err(RunsError::BoundExceeded { bound: 1 })
        ));
    }

    #[test]
    fn unreachable_occurrence() {
        let evs = events(&["A", "B", "C", "X"]);
        let mut d = chain_decl(&[("B", "C")]);
        d.events = vec!["A".into(), "X".into()];
        d.exclusive.push(GroupDecl {
            name: None,
            members: vec!["A".into(), "B".into()],
        });
        let ch = build_chronology(&evs, &d).unwrap();
        // A rules out B, so C cannot happen.
        assert_eq!(
            evaluate_trace(&ch, &trace(&["A", "X", "C"])).violation(),
            Some(&Violation::MissingPredecessor { event: "C".into() })
        );
    }

    #[test]
    fn windows() {
        let mut evs = events(&["E1", "E2"]);
        evs[1].window = Some(Window { start: 5, end: 9 });
        let ch = build_chronology(&evs, &chain_decl(&[("E1", "E2")])).unwrap();
        assert!(!evaluate_trace(&ch, &trace(&["E1", "E2"])).is_true());
        let ok = Trace::new("t", vec![Occurrence::new("E1", 0), Occurrence::new("E2", 7)]).unwrap();
        assert!(evaluate_trace(&ch, &ok).is_true());
    }

    #[test]
    fn trace_invariants() {
        assert!(matches!(
            Trace::from_sequence("t", &["E1", "E1"]),
            Err(TraceError::DuplicateEvent { .. })
        ));
        assert!(matches!(
            Trace::new("t", vec![Occurrence::new("a", 3), Occurrence::new("b", 1)]),
            Err(TraceError::DecreasingTime { .. })
        ));
        let t = trace(&["E1"]);
        assert!(truth_of_event(&t, &"E1".into()));
        assert!(!truth_of_event(&t, &"E2".into()));
        assert!(!truth_of_event(&trace(&[]), &"E1".into()));
    }
}
