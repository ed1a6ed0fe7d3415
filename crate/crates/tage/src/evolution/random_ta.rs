//! Random creation of initial candidates and of the random edges the
//! mutation operators reuse.
//!
//! Initial automata have exactly two locations and grow only through
//! mutation and crossover. Guard-atom counts and reset-set sizes are
//! geometrically distributed; labels, operators and constants are uniform,
//! with `>` excluded for outputs.

use super::working::geometric0;
use super::EvolutionConfig;
use crate::rng::Rng;
use crate::ta::{Action, Alphabet, ClockConstraint, Edge, Guard, RelOp, ResetSet, TimedAutomaton};
use rand::Rng as _;

const INPUT_OPS: [RelOp; 4] = [RelOp::Lt, RelOp::Le, RelOp::Ge, RelOp::Gt];
const OUTPUT_OPS: [RelOp; 3] = [RelOp::Lt, RelOp::Le, RelOp::Ge];

pub(crate) fn random_action(alphabet: &Alphabet, rng: &mut Rng) -> Action {
    let idx = rng.gen_range(0..alphabet.len());
    if idx < alphabet.input_count() {
        Action::input(idx)
    } else {
        Action::output(idx - alphabet.input_count())
    }
}

pub(crate) fn random_atom(cfg: &EvolutionConfig, action: Action, rng: &mut Rng) -> ClockConstraint {
    let clock = rng.gen_range(0..cfg.n_clocks);
    let op = if action.is_output() {
        OUTPUT_OPS[rng.gen_range(0..OUTPUT_OPS.len())]
    } else {
        INPUT_OPS[rng.gen_range(0..INPUT_OPS.len())]
    };
    let bound = rng.gen_range(0..=cfg.c_max);
    ClockConstraint { clock, op, bound }
}

/// Guard with `Geometric(geo_guard)`-many atoms (support 0, 1, ...).
pub(crate) fn random_guard(cfg: &EvolutionConfig, action: Action, rng: &mut Rng) -> Guard {
    let n = geometric0(rng, cfg.geo_guard);
    Guard::new((0..n).map(|_| random_atom(cfg, action, rng)).collect())
}

/// Non-empty random guard, for the operator that must create one.
pub(crate) fn random_nonempty_guard(cfg: &EvolutionConfig, action: Action, rng: &mut Rng) -> Guard {
    let n = 1 + geometric0(rng, cfg.geo_guard);
    Guard::new((0..n).map(|_| random_atom(cfg, action, rng)).collect())
}

/// Reset set of `min(Geometric(geo_reset), n_clocks)` distinct clocks.
pub(crate) fn random_resets(cfg: &EvolutionConfig, rng: &mut Rng) -> ResetSet {
    let size = geometric0(rng, cfg.geo_reset).min(cfg.n_clocks);
    let mut clocks: Vec<usize> = (0..cfg.n_clocks).collect();
    for j in 0..size {
        let swap = rng.gen_range(j..clocks.len());
        clocks.swap(j, swap);
    }
    ResetSet::from_iter(clocks.into_iter().take(size))
}

pub(crate) fn random_edge(
    cfg: &EvolutionConfig,
    alphabet: &Alphabet,
    source: usize,
    target: usize,
    rng: &mut Rng,
) -> Edge {
    let action = random_action(alphabet, rng);
    let guard = random_guard(cfg, action, rng);
    let resets = random_resets(cfg, rng);
    Edge { source, action, guard, resets, target }
}

/// A fresh two-location candidate automaton with `1 + Geometric(0.5)` random
/// edges, the first forced to connect the initial location to the other one.
pub fn create_random_ta(
    cfg: &EvolutionConfig,
    alphabet: &Alphabet,
    rng: &mut Rng,
) -> TimedAutomaton {
    assert!(!alphabet.is_empty(), "cannot create edges over an empty alphabet");
    let n_edges = 1 + geometric0(rng, 0.5);
    let mut edges = Vec::with_capacity(n_edges);
    edges.push(random_edge(cfg, alphabet, 0, 1, rng));
    for _ in 1..n_edges {
        let source = rng.gen_range(0..2);
        let target = rng.gen_range(0..2);
        edges.push(random_edge(cfg, alphabet, source, target, rng));
    }
    TimedAutomaton::new(alphabet.clone(), cfg.n_clocks, 2, 0, edges)
        .expect("random edges are structurally valid")
}
