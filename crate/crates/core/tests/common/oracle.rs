// Brute-force reference semantics for chronologies. Deliberately naive:
// every subset of events is tried against the run conditions stated
// directly, with no topological sweep or dead-set propagation.
#![allow(dead_code)]

use std::collections::BTreeSet;

use tm_core::{Chronology, EventId, Trace};

fn groups(ch: &Chronology) -> Vec<Vec<usize>> {
    ch.groups()
        .iter()
        .map(|g| g.members.iter().map(|m| ch.index_of(m).unwrap()).collect())
        .collect()
}

/// Is `r` (a membership mask) a run of `ch`?
///
/// An event is out of a run exactly when a rival in one of its exclusive
/// groups is in, or it has predecessors and none of them is in.
pub fn is_run(ch: &Chronology, r: &[bool]) -> bool {
    let n = ch.len();
    let gs = groups(ch);
    if !r.iter().any(|&x| x) {
        return false;
    }
    if !(0..n).any(|i| r[i] && ch.is_start(i)) {
        return false;
    }
    if gs.iter().any(|g| g.iter().filter(|&&m| r[m]).count() > 1) {
        return false;
    }
    for v in 0..n {
        let rival_in = gs.iter().any(|g| g.contains(&v) && g.iter().any(|&m| m != v && r[m]));
        let preds = ch.predecessors(v);
        let cut_off = !preds.is_empty() && preds.iter().all(|&p| !r[p]);
        if r[v] == (rival_in || cut_off) {
            return false;
        }
        if r[v] && !ch.is_end(v) && !ch.successors(v).iter().any(|&s| r[s]) {
            return false;
        }
    }
    true
}

/// Every run, as a set of event ids.
pub fn all_runs(ch: &Chronology) -> BTreeSet<BTreeSet<EventId>> {
    let n = ch.len();
    assert!(n <= 16, "oracle is exponential");
    let mut out = BTreeSet::new();
    for bits in 0u32..(1 << n) {
        let r: Vec<bool> = (0..n).map(|i| bits & (1 << i) != 0).collect();
        if is_run(ch, &r) {
            out.insert((0..n).filter(|&i| r[i]).map(|i| ch.events()[i].clone()).collect());
        }
    }
    out
}

/// Truth of a trace: its events form a run, every chronology edge between
/// them is respected strictly in position and in time, and windows hold.
pub fn trace_is_true(ch: &Chronology, runs: &BTreeSet<BTreeSet<EventId>>, t: &Trace) -> bool {
    let occ = t.occurrences();
    let mut pos = vec![None; ch.len()];
    for (k, o) in occ.iter().enumerate() {
        match ch.index_of(&o.event) {
            Some(i) => pos[i] = Some((k, o.time)),
            None => return false,
        }
    }
    let set: BTreeSet<EventId> = occ.iter().map(|o| o.event.clone()).collect();
    if !runs.contains(&set) {
        return false;
    }
    for v in 0..ch.len() {
        let Some((kv, tv)) = pos[v] else { continue };
        for &u in ch.predecessors(v) {
            if let Some((ku, tu)) = pos[u] {
                if ku >= kv || tu >= tv {
                    return false;
                }
            }
        }
        if let Some(w) = ch.window(v) {
            if !w.contains(tv) {
                return false;
            }
        }
    }
    true
}

/// All orderings of all subsets of `0..n`.
pub fn subset_permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        out.push(cur.clone());
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                go(n, cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(n, &mut Vec::new(), &mut vec![false; n], &mut out);
    out
}
