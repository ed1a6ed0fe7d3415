//! Crossover as a randomized product of two parents.
//!
//! Product locations are explored breadth-first from the pair of initial
//! locations. Edges whose label exists in both parents synchronize: guard and
//! resets each come from one parent at random and the targets pair up. An
//! edge present in only one parent keeps its guard and resets, and the other
//! component of its target is drawn uniformly from that parent's locations.
//!
//! Discovery of new product locations stops once their number reaches the
//! larger parent's location count, so offspring never have more locations
//! than both parents; edges between already-discovered locations are still
//! added. Reachability is taken on the underlying graph, ignoring guards.

use super::{Candidate, EvolutionConfig};
use crate::rng::Rng;
use crate::ta::TimedAutomaton;
use rand::Rng as _;
use std::collections::HashMap;

pub fn crossover(
    a: &Candidate,
    b: &Candidate,
    _cfg: &EvolutionConfig,
    rng: &mut Rng,
) -> Candidate {
    let offspring = product_ta(&a.ta, &b.ta, rng);
    Candidate::fresh(offspring, (a.p_mut + b.p_mut) / 2.0)
}

fn product_ta(ta1: &TimedAutomaton, ta2: &TimedAutomaton, rng: &mut Rng) -> TimedAutomaton {
    assert_eq!(ta1.alphabet(), ta2.alphabet(), "crossover parents share an alphabet");
    assert_eq!(ta1.n_clocks(), ta2.n_clocks());
    let cap = ta1.n_locations().max(ta2.n_locations());

    let mut ids: HashMap<(usize, usize), usize> = HashMap::new();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let start = (ta1.initial(), ta2.initial());
    ids.insert(start, 0);
    pairs.push(start);

    let mut edges: Vec<crate::ta::Edge> = Vec::new();
    let mut head = 0;
    while head < pairs.len() {
        let (l1, l2) = pairs[head];
        let source = head;
        head += 1;

        for e1 in ta1.outgoing(l1) {
            let partners: Vec<&crate::ta::Edge> =
                ta2.outgoing(l2).iter().filter(|e2| e2.action == e1.action).collect();
            if partners.is_empty() {
                let other = rng.gen_range(0..ta2.n_locations());
                push_edge(
                    &mut ids,
                    &mut pairs,
                    &mut edges,
                    cap,
                    source,
                    e1.clone(),
                    (e1.target, other),
                );
            } else {
                // Synchronize with one partner edge; pairing every partner
                // would multiply edges of duplicate-heavy parents.
                let e2 = partners[rng.gen_range(0..partners.len())];
                let guard = if rng.gen_bool(0.5) { e1.guard.clone() } else { e2.guard.clone() };
                let resets = if rng.gen_bool(0.5) { e1.resets } else { e2.resets };
                let merged =
                    crate::ta::Edge { source: 0, action: e1.action, guard, resets, target: 0 };
                push_edge(
                    &mut ids,
                    &mut pairs,
                    &mut edges,
                    cap,
                    source,
                    merged,
                    (e1.target, e2.target),
                );
            }
        }
        for e2 in ta2.outgoing(l2) {
            if ta1.outgoing(l1).iter().any(|e1| e1.action == e2.action) {
                continue;
            }
            let other = rng.gen_range(0..ta1.n_locations());
            push_edge(&mut ids, &mut pairs, &mut edges, cap, source, e2.clone(), (other, e2.target));
        }
    }

    TimedAutomaton::new(ta1.alphabet().clone(), ta1.n_clocks(), pairs.len(), 0, edges)
        .expect("product construction is structurally valid")
}

/// Adds an edge to the product, discovering its target pair if the location
/// budget allows; otherwise the edge is dropped.
fn push_edge(
    ids: &mut HashMap<(usize, usize), usize>,
    pairs: &mut Vec<(usize, usize)>,
    edges: &mut Vec<crate::ta::Edge>,
    cap: usize,
    source: usize,
    mut edge: crate::ta::Edge,
    target_pair: (usize, usize),
) {
    let target = match ids.get(&target_pair) {
        Some(&t) => t,
        None => {
            if pairs.len() >= cap {
                return;
            }
            let t = pairs.len();
            ids.insert(target_pair, t);
            pairs.push(target_pair);
            t
        }
    };
    edge.source = source;
    edge.target = target;
    edges.push(edge);
}
