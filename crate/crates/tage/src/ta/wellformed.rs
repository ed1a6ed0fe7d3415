//! Testability checks: output-guard strictness, determinism, implicit input
//! enabledness, and isolated outputs.
//!
//! Determinism and isolation are semantic, per-state properties, but for
//! conjunctive interval guards with integer bounds they reduce to pairwise
//! guard-overlap questions that are decidable exactly on the half-integer
//! grid `{0, 0.5, 1, ...}`: a non-empty intersection of integer-bounded boxes
//! always contains a half-integer point no larger than the largest constant
//! plus one.

use super::{ClockValuation, Edge, Guard, RelOp, TimedAutomaton};
use crate::time::Time;

/// Flags for the four testability assumptions; a false flag carries a
/// concrete witness.
#[derive(Clone, Debug)]
pub struct WellFormedness {
    pub output_guard_strictness_ok: bool,
    pub deterministic: bool,
    /// Constantly true: undefined inputs stay put via the implicit
    /// self-loop convention. Reported for documentation.
    pub input_enabled_implicitly: bool,
    pub isolated_outputs: bool,
    /// Index of an output edge with a strict lower bound, if any.
    pub strictness_witness: Option<usize>,
    pub determinism_witness: Option<OverlapWitness>,
    pub isolation_witness: Option<OverlapWitness>,
}

impl WellFormedness {
    pub fn all_ok(&self) -> bool {
        self.output_guard_strictness_ok
            && self.deterministic
            && self.input_enabled_implicitly
            && self.isolated_outputs
    }
}

/// A state and edge pair violating determinism or output isolation.
#[derive(Clone, Debug)]
pub struct OverlapWitness {
    pub location: usize,
    pub valuation: ClockValuation,
    pub edge_a: usize,
    pub edge_b: usize,
}

pub fn check_well_formed(ta: &TimedAutomaton, cmax: u64) -> WellFormedness {
    // Mutation may push constants past the configured maximum; widen the
    // sampling bound so the grid argument still applies.
    let bound = cmax.max(ta.max_constant());
    let cap_halves = 2 * (bound + 1);

    let strictness_witness = ta
        .edges()
        .iter()
        .position(|e| e.action.is_output() && e.guard.has_strict_lower_bound());

    let mut determinism_witness = None;
    let mut isolation_witness = None;
    'det: for l in 0..ta.n_locations() {
        let range = ta.outgoing_range(l);
        for i in range.clone() {
            for j in i + 1..range.end {
                let (a, b) = (&ta.edges()[i], &ta.edges()[j]);
                if a.action != b.action {
                    continue;
                }
                if let Some(v) = diverging_point(a, b, ta.n_clocks(), cap_halves) {
                    determinism_witness =
                        Some(OverlapWitness { location: l, valuation: v, edge_a: i, edge_b: j });
                    break 'det;
                }
            }
        }
    }
    'iso: for l in 0..ta.n_locations() {
        let range = ta.outgoing_range(l);
        for i in range.clone() {
            for j in i + 1..range.end {
                let (a, b) = (&ta.edges()[i], &ta.edges()[j]);
                if !a.action.is_output() || !b.action.is_output() || a.action == b.action {
                    continue;
                }
                if let Some(point) =
                    common_point(&[&a.guard, &b.guard], ta.n_clocks(), cap_halves)
                {
                    isolation_witness = Some(OverlapWitness {
                        location: l,
                        valuation: point,
                        edge_a: i,
                        edge_b: j,
                    });
                    break 'iso;
                }
            }
        }
    }

    WellFormedness {
        output_guard_strictness_ok: strictness_witness.is_none(),
        deterministic: determinism_witness.is_none(),
        input_enabled_implicitly: true,
        isolated_outputs: isolation_witness.is_none(),
        strictness_witness,
        determinism_witness,
        isolation_witness,
    }
}

/// True iff the two guards are simultaneously satisfiable by some valuation.
pub(crate) fn guards_overlap(a: &Guard, b: &Guard, n_clocks: usize) -> bool {
    (0..n_clocks).all(|c| intersect_halves(&[a, b], c, u64::MAX).is_some())
}

/// The satisfying interval of `clock` under all guards, in half units,
/// clamped above by `cap`. `None` if empty.
fn intersect_halves(guards: &[&Guard], clock: usize, cap: u64) -> Option<(u64, u64)> {
    let mut lo = 0u64;
    let mut hi = cap;
    for g in guards {
        for atom in g.atoms().iter().filter(|a| a.clock == clock) {
            match atom.op {
                RelOp::Ge => lo = lo.max(2 * atom.bound),
                RelOp::Gt => lo = lo.max(2 * atom.bound + 1),
                RelOp::Le => hi = hi.min(2 * atom.bound),
                RelOp::Lt => {
                    if atom.bound == 0 {
                        return None;
                    }
                    hi = hi.min(2 * atom.bound - 1);
                }
            }
        }
    }
    (lo <= hi).then_some((lo, hi))
}

/// Lexicographically smallest half-grid valuation satisfying all guards.
fn common_point(guards: &[&Guard], n_clocks: usize, cap: u64) -> Option<ClockValuation> {
    let mut values = Vec::with_capacity(n_clocks);
    for c in 0..n_clocks {
        let (lo, _) = intersect_halves(guards, c, cap)?;
        values.push(Time::from_halves(lo));
    }
    Some(ClockValuation::from_values(values))
}

/// A valuation satisfying both edges' guards at which their successor states
/// differ, or `None` if the pair is deterministic.
fn diverging_point(a: &Edge, b: &Edge, n_clocks: usize, cap: u64) -> Option<ClockValuation> {
    let guards = [&a.guard, &b.guard];
    let corner = common_point(&guards, n_clocks, cap)?;
    if a.target != b.target {
        return Some(corner);
    }
    if a.resets == b.resets {
        return None;
    }
    // Same target: successors differ only where a clock in the reset
    // symmetric difference is non-zero. Bump the first such clock to the
    // smallest positive grid value its interval allows.
    let mut values = corner.values().to_vec();
    for c in 0..n_clocks {
        if a.resets.contains(c) == b.resets.contains(c) {
            continue;
        }
        let (lo, hi) = intersect_halves(&guards, c, cap).expect("non-empty by corner");
        let positive = lo.max(1);
        if positive <= hi {
            values[c] = Time::from_halves(positive);
            return Some(ClockValuation::from_values(values));
        }
    }
    None
}
