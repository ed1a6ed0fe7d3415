//! The twelve structure-rewriting operators and iterated mutation.
//!
//! Each mutation step picks one operator uniformly at random; edge and
//! location choices inside an operator are weighted by the parent's fault
//! counters (weight `1 + faults`). Application repeats until a stop draw
//! with the candidate's own `p_mut` succeeds, so low `p_mut` means long
//! mutation bursts. An inapplicable operator is resampled; after 20 failed
//! resamples the candidate is returned as is.

use super::random_ta::{random_atom, random_edge, random_nonempty_guard};
use super::working::WorkingTa;
use super::{Candidate, EvolutionConfig};
use crate::rng::Rng;
use crate::ta::{ActionKind, Edge, RelOp};
use rand::Rng as _;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
enum Operator {
    AddConstraint,
    ChangeGuard,
    ChangeTarget,
    RemoveGuard,
    ChangeResets,
    RemoveEdge,
    AddEdge,
    SinkLocation,
    MergeLocation,
    SplitLocation,
    AddLocation,
    SplitEdge,
}

const OPERATORS: [Operator; 12] = [
    Operator::AddConstraint,
    Operator::ChangeGuard,
    Operator::ChangeTarget,
    Operator::RemoveGuard,
    Operator::ChangeResets,
    Operator::RemoveEdge,
    Operator::AddEdge,
    Operator::SinkLocation,
    Operator::MergeLocation,
    Operator::SplitLocation,
    Operator::AddLocation,
    Operator::SplitEdge,
];

const RESAMPLE_LIMIT: usize = 20;

/// Mutates a candidate: at least one operator application, then a stop draw
/// with probability `p_mut` after each. The offspring's `p_mut` is the
/// parent's multiplied by 1, 10/9 or 9/10 (uniformly), clamped to [0.1, 0.9].
pub fn mutate(parent: &Candidate, cfg: &EvolutionConfig, rng: &mut Rng) -> Candidate {
    let diagnostics = parent.eval.as_ref().map(|e| &e.diagnostics);
    let mut work = WorkingTa::from_ta(&parent.ta, diagnostics);
    loop {
        if !apply_random_operator(&mut work, cfg, rng) {
            break;
        }
        if rng.gen_bool(parent.p_mut) {
            break;
        }
    }
    let factor = match rng.gen_range(0..3u32) {
        0 => 1.0,
        1 => 10.0 / 9.0,
        _ => 9.0 / 10.0,
    };
    Candidate::fresh(work.seal(), parent.p_mut * factor)
}

/// Tries uniformly drawn operators until one applies; false after
/// [`RESAMPLE_LIMIT`] inapplicable draws.
fn apply_random_operator(work: &mut WorkingTa, cfg: &EvolutionConfig, rng: &mut Rng) -> bool {
    for _ in 0..RESAMPLE_LIMIT {
        let op = OPERATORS[rng.gen_range(0..OPERATORS.len())];
        if apply(op, work, cfg, rng) {
            return true;
        }
    }
    false
}

fn apply(op: Operator, work: &mut WorkingTa, cfg: &EvolutionConfig, rng: &mut Rng) -> bool {
    match op {
        Operator::AddConstraint => {
            let Some(idx) = work.pick_edge(rng) else { return false };
            let action = work.edges[idx].action;
            let atom = random_atom(cfg, action, rng);
            work.edges[idx].guard.push(atom);
            work.canonicalize();
            true
        }
        Operator::ChangeGuard => {
            let Some(idx) = work.pick_edge(rng) else { return false };
            let action = work.edges[idx].action;
            if work.edges[idx].guard.is_true() {
                work.edges[idx].guard = random_nonempty_guard(cfg, action, rng);
            } else {
                let guard = &mut work.edges[idx].guard;
                let atom_idx = rng.gen_range(0..guard.atoms().len());
                let mut atom = guard.atoms()[atom_idx];
                match rng.gen_range(0..3u32) {
                    // Flip strictness within the bound's direction; >= stays
                    // put on outputs where > is banned.
                    0 => {
                        atom.op = match (atom.op, action.kind) {
                            (RelOp::Lt, _) => RelOp::Le,
                            (RelOp::Le, _) => RelOp::Lt,
                            (RelOp::Gt, _) => RelOp::Ge,
                            (RelOp::Ge, ActionKind::Input) => RelOp::Gt,
                            (RelOp::Ge, ActionKind::Output) => RelOp::Ge,
                        };
                    }
                    1 => {
                        let delta = rng.gen_range(1..=3u64);
                        atom.bound = if rng.gen_bool(0.5) {
                            atom.bound.saturating_add(delta)
                        } else {
                            atom.bound.saturating_sub(delta)
                        };
                    }
                    _ => atom = random_atom(cfg, action, rng),
                }
                guard.set_atom(atom_idx, atom);
            }
            work.canonicalize();
            true
        }
        Operator::ChangeTarget => {
            if work.n_locations < 2 {
                return false;
            }
            let Some(idx) = work.pick_edge(rng) else { return false };
            let current = work.edges[idx].target;
            let Some(target) = work.pick_location(rng, Some(current)) else { return false };
            work.edges[idx].target = target;
            work.canonicalize();
            true
        }
        Operator::RemoveGuard => {
            let Some(idx) = work.pick_edge_where(rng, |e| !e.guard.is_true()) else {
                return false;
            };
            let guard = &mut work.edges[idx].guard;
            if rng.gen_bool(0.5) {
                *guard = crate::ta::Guard::TRUE;
            } else {
                let atom_idx = rng.gen_range(0..guard.atoms().len());
                guard.remove_atom(atom_idx);
            }
            work.canonicalize();
            true
        }
        Operator::ChangeResets => {
            let Some(idx) = work.pick_edge(rng) else { return false };
            let clock = rng.gen_range(0..work.n_clocks);
            work.edges[idx].resets.toggle(clock);
            work.canonicalize();
            true
        }
        Operator::RemoveEdge => {
            let Some(idx) = work.pick_edge(rng) else { return false };
            work.remove_edge(idx);
            true
        }
        Operator::AddEdge => {
            let source = work.pick_location(rng, None).expect("locations are never empty");
            let target = work.pick_location(rng, None).expect("locations are never empty");
            let edge = random_edge(cfg, &work.alphabet, source, target, rng);
            work.add_edge(edge, 0);
            true
        }
        Operator::SinkLocation => {
            work.add_location();
            true
        }
        Operator::MergeLocation => {
            if work.n_locations < 2 {
                return false;
            }
            let keep = work.pick_location(rng, None).expect("non-empty");
            let gone = work.pick_location(rng, Some(keep)).expect("two or more locations");
            work.merge_locations(keep, gone);
            true
        }
        Operator::SplitLocation => {
            // Redirect one edge reaching a location to a fresh copy of it.
            let Some(idx) = work.pick_edge(rng) else { return false };
            let fresh = work.add_location();
            work.edges[idx].target = fresh;
            work.canonicalize();
            true
        }
        Operator::AddLocation => {
            let fresh = work.add_location();
            let from = work.pick_location(rng, Some(fresh)).expect("existing location");
            let to = work.pick_location(rng, Some(fresh)).expect("existing location");
            let incoming = random_edge(cfg, &work.alphabet, from, fresh, rng);
            let outgoing = random_edge(cfg, &work.alphabet, fresh, to, rng);
            work.add_edge(incoming, 0);
            work.add_edge(outgoing, 0);
            true
        }
        Operator::SplitEdge => {
            let Some(idx) = work.pick_edge(rng) else { return false };
            let (old, fault) = work.remove_edge(idx);
            let middle = work.add_location();
            let fresh = random_edge(cfg, &work.alphabet, 0, 0, rng);
            // Either e' . e or e . e', with the new location in between.
            let (first, second) = if rng.gen_bool(0.5) {
                (
                    Edge { source: old.source, target: middle, ..fresh },
                    Edge { source: middle, target: old.target, ..old },
                )
            } else {
                (
                    Edge { source: old.source, target: middle, ..old },
                    Edge { source: middle, target: old.target, ..fresh },
                )
            };
            work.add_edge(first, 0);
            work.add_edge(second, fault);
            true
        }
    }
}
