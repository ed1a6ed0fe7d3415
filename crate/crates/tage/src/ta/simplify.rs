//! Semantics-preserving syntactic cleanup.
//!
//! Three rewrites, all behaviour-preserving at the trace level:
//! - duplicate edges (field-for-field identical) collapse to one;
//! - an input self-loop without resets is dropped when no other edge with the
//!   same source and label has an overlapping guard — in that case the
//!   implicit stay-put self-loop produces the identical successor, so the
//!   explored state sets are unchanged;
//! - locations unreachable from the initial location in the underlying
//!   directed graph (guards ignored) are removed with their edges.
//!
//! Surviving locations keep their relative order and are compacted to dense
//! ids, so untouched automata come back unchanged and the function is
//! idempotent.

use super::wellformed::guards_overlap;
use super::{Edge, TimedAutomaton};

pub fn simplify(ta: &TimedAutomaton) -> TimedAutomaton {
    let mut edges: Vec<Edge> = ta.edges().to_vec();
    edges.dedup();

    edges = drop_redundant_input_loops(ta, edges);

    // Reachability over the underlying graph only.
    let mut reachable = vec![false; ta.n_locations()];
    reachable[ta.initial()] = true;
    let mut queue = vec![ta.initial()];
    while let Some(l) = queue.pop() {
        for e in edges.iter().filter(|e| e.source == l) {
            if !reachable[e.target] {
                reachable[e.target] = true;
                queue.push(e.target);
            }
        }
    }

    // Compact surviving ids in ascending order.
    let mut order = vec![usize::MAX; ta.n_locations()];
    let mut next = 0;
    for (l, &alive) in reachable.iter().enumerate() {
        if alive {
            order[l] = next;
            next += 1;
        }
    }

    let edges = edges
        .into_iter()
        .filter(|e| reachable[e.source])
        .map(|mut e| {
            e.source = order[e.source];
            e.target = order[e.target];
            e
        })
        .collect();

    TimedAutomaton::new(ta.alphabet().clone(), ta.n_clocks(), next, order[ta.initial()], edges)
        .expect("simplification preserves structural validity")
}

fn drop_redundant_input_loops(ta: &TimedAutomaton, edges: Vec<Edge>) -> Vec<Edge> {
    let keep: Vec<bool> = edges
        .iter()
        .enumerate()
        .map(|(i, e)| {
            if !e.action.is_input() || e.source != e.target || !e.resets.is_empty() {
                return true;
            }
            // Dropping is only safe when no sibling edge can fire at the same
            // time: otherwise the loop contributes a distinct extra successor.
            edges.iter().enumerate().any(|(j, other)| {
                j != i
                    && other.source == e.source
                    && other.action == e.action
                    && guards_overlap(&other.guard, &e.guard, ta.n_clocks())
            })
        })
        .collect();
    edges
        .into_iter()
        .zip(keep)
        .filter_map(|(e, k)| k.then_some(e))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::build_train_ta;
    use crate::ta::{ClockConstraint, Guard, RelOp, ResetSet};

    fn train_with_extra(edge: Edge, extra_locations: usize) -> TimedAutomaton {
        let train = build_train_ta();
        let mut edges = train.edges().to_vec();
        edges.push(edge);
        TimedAutomaton::new(
            train.alphabet().clone(),
            train.n_clocks(),
            train.n_locations() + extra_locations,
            train.initial(),
            edges,
        )
        .unwrap()
    }

    #[test]
    fn unreachable_location_is_pruned() {
        let train = build_train_ta();
        let stop = train.alphabet().lookup("stop?").unwrap();
        let with_island = train_with_extra(
            Edge { source: 6, action: stop, guard: Guard::TRUE, resets: ResetSet::EMPTY, target: 6 },
            1,
        );
        assert_eq!(simplify(&with_island), train);
    }

    #[test]
    fn redundant_input_self_loop_is_dropped() {
        let train = build_train_ta();
        let stop = train.alphabet().lookup("stop?").unwrap();
        let noisy = train_with_extra(
            Edge { source: 0, action: stop, guard: Guard::TRUE, resets: ResetSet::EMPTY, target: 0 },
            0,
        );
        assert_eq!(simplify(&noisy), train);
    }

    #[test]
    fn resetting_self_loop_is_kept() {
        let train = build_train_ta();
        let stop = train.alphabet().lookup("stop?").unwrap();
        let looped = train_with_extra(
            Edge { source: 0, action: stop, guard: Guard::TRUE, resets: ResetSet::from_iter([0]), target: 0 },
            0,
        );
        assert_eq!(simplify(&looped), looped);
    }

    #[test]
    fn overlapping_sibling_blocks_loop_removal() {
        let train = build_train_ta();
        let stop = train.alphabet().lookup("stop?").unwrap();
        // A guarded stop? self-loop on l2 overlaps the existing unguarded
        // stop? edge l2 -> l3, so removing it would lose a successor.
        let le5 = Guard::new(vec![ClockConstraint { clock: 0, op: RelOp::Le, bound: 5 }]);
        let nondet = train_with_extra(
            Edge { source: 2, action: stop, guard: le5, resets: ResetSet::EMPTY, target: 2 },
            0,
        );
        assert_eq!(simplify(&nondet), nondet);
    }

    #[test]
    fn duplicate_edges_collapse() {
        let train = build_train_ta();
        let duplicated = train_with_extra(train.edges()[0].clone(), 0);
        assert_eq!(simplify(&duplicated), train);
    }

    #[test]
    fn simplify_is_idempotent_on_train_variants() {
        let train = build_train_ta();
        let stop = train.alphabet().lookup("stop?").unwrap();
        let noisy = train_with_extra(
            Edge { source: 3, action: stop, guard: Guard::TRUE, resets: ResetSet::EMPTY, target: 3 },
            2,
        );
        let once = simplify(&noisy);
        assert_eq!(simplify(&once), once);
    }
}
