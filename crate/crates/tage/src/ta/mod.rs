//! Timed-automaton data model and timed-transition-system semantics.
//!
//! An automaton owns its alphabet (inputs rendered `name?`, outputs `name!`),
//! a clock count, densely numbered locations `0..n_locations`, and guarded
//! edges with clock resets. Values are immutable after construction and all
//! operations are pure, so automata can be shared freely across parallel
//! fitness workers.
//!
//! Semantics notes:
//! - Guards are conjunctions of `clock <op> bound` atoms; the empty guard is
//!   satisfied everywhere.
//! - Output edges never carry strict lower bounds (`>`), so the set of delays
//!   enabling an output guard is closed from below and "earliest enabling
//!   delay" is well defined.
//! - Implicit input self-loops are never stored; simulation layers apply them
//!   when no explicit edge fires for an input.

mod dot;
mod simplify;
mod text;
mod wellformed;

pub use dot::to_dot;
pub use simplify::simplify;
pub use text::{parse_ta, write_ta, TaTextError};
pub use wellformed::{check_well_formed, OverlapWitness, WellFormedness};

use crate::time::Time;
use std::fmt;

/// Whether an action is controlled by the environment (input) or produced by
/// the system (output).
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ActionKind {
    Input,
    Output,
}

impl ActionKind {
    pub fn suffix(self) -> char {
        match self {
            ActionKind::Input => '?',
            ActionKind::Output => '!',
        }
    }
}

/// Compact handle for an action: kind plus index into the alphabet.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Action {
    pub kind: ActionKind,
    pub idx: usize,
}

impl Action {
    pub fn input(idx: usize) -> Action {
        Action { kind: ActionKind::Input, idx }
    }

    pub fn output(idx: usize) -> Action {
        Action { kind: ActionKind::Output, idx }
    }

    pub fn is_input(self) -> bool {
        self.kind == ActionKind::Input
    }

    pub fn is_output(self) -> bool {
        self.kind == ActionKind::Output
    }
}

/// The input/output action labels of an automaton. Names are stored without
/// their `?`/`!` suffix, sorted, and rendered names are unique.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Alphabet {
    inputs: Vec<String>,
    outputs: Vec<String>,
}

impl Alphabet {
    pub fn new(
        mut inputs: Vec<String>,
        mut outputs: Vec<String>,
    ) -> Result<Alphabet, TaError> {
        inputs.sort();
        outputs.sort();
        for name in inputs.iter().chain(outputs.iter()) {
            if name.is_empty() || name.contains(|c: char| c.is_whitespace() || c == '?' || c == '!' || c == '/') {
                return Err(TaError::BadActionName(name.clone()));
            }
        }
        if inputs.windows(2).any(|w| w[0] == w[1]) || outputs.windows(2).any(|w| w[0] == w[1]) {
            return Err(TaError::DuplicateAction);
        }
        Ok(Alphabet { inputs, outputs })
    }

    pub fn input_count(&self) -> usize {
        self.inputs.len()
    }

    pub fn output_count(&self) -> usize {
        self.outputs.len()
    }

    pub fn len(&self) -> usize {
        self.inputs.len() + self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn inputs(&self) -> impl Iterator<Item = Action> + '_ {
        (0..self.inputs.len()).map(Action::input)
    }

    pub fn outputs(&self) -> impl Iterator<Item = Action> + '_ {
        (0..self.outputs.len()).map(Action::output)
    }

    pub fn actions(&self) -> impl Iterator<Item = Action> + '_ {
        self.inputs().chain(self.outputs())
    }

    pub fn name(&self, action: Action) -> &str {
        match action.kind {
            ActionKind::Input => &self.inputs[action.idx],
            ActionKind::Output => &self.outputs[action.idx],
        }
    }

    /// Rendered form with suffix, e.g. `start?` or `appr!`.
    pub fn display(&self, action: Action) -> String {
        format!("{}{}", self.name(action), action.kind.suffix())
    }

    /// Resolves a rendered name (`start?`, `appr!`) back to an action.
    pub fn lookup(&self, rendered: &str) -> Option<Action> {
        let (name, kind) = split_rendered(rendered)?;
        let pool = match kind {
            ActionKind::Input => &self.inputs,
            ActionKind::Output => &self.outputs,
        };
        pool.binary_search_by(|n| n.as_str().cmp(name))
            .ok()
            .map(|idx| Action { kind, idx })
    }
}

/// Splits `name?`/`name!` into the bare name and kind.
pub fn split_rendered(rendered: &str) -> Option<(&str, ActionKind)> {
    let kind = match rendered.chars().last()? {
        '?' => ActionKind::Input,
        '!' => ActionKind::Output,
        _ => return None,
    };
    let name = &rendered[..rendered.len() - 1];
    if name.is_empty() {
        return None;
    }
    Some((name, kind))
}

/// Relational operator of a guard atom. No equality atom exists; `c == k` is
/// expressed as `c >= k & c <= k`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelOp {
    Lt,
    Le,
    Ge,
    Gt,
}

impl RelOp {
    pub fn is_lower_bound(self) -> bool {
        matches!(self, RelOp::Ge | RelOp::Gt)
    }

    pub fn is_strict(self) -> bool {
        matches!(self, RelOp::Lt | RelOp::Gt)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            RelOp::Lt => "<",
            RelOp::Le => "<=",
            RelOp::Ge => ">=",
            RelOp::Gt => ">",
        }
    }
}

/// One conjunct `clock <op> bound` with a natural-number bound in time units.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClockConstraint {
    pub clock: usize,
    pub op: RelOp,
    pub bound: u64,
}

impl ClockConstraint {
    pub fn holds_at(&self, value: Time) -> bool {
        let bound = Time::from_units(self.bound);
        match self.op {
            RelOp::Lt => value < bound,
            RelOp::Le => value <= bound,
            RelOp::Ge => value >= bound,
            RelOp::Gt => value > bound,
        }
    }
}

/// Conjunction of clock constraints; empty means `true`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Guard {
    atoms: Vec<ClockConstraint>,
}

impl Guard {
    pub const TRUE: Guard = Guard { atoms: Vec::new() };

    /// Atoms are kept sorted; exact duplicates collapse (conjunction is
    /// idempotent, and repeated atoms would otherwise pile up under mutation
    /// and shadow single-atom guard edits).
    pub fn new(mut atoms: Vec<ClockConstraint>) -> Guard {
        atoms.sort();
        atoms.dedup();
        Guard { atoms }
    }

    pub fn atoms(&self) -> &[ClockConstraint] {
        &self.atoms
    }

    pub fn is_true(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn push(&mut self, atom: ClockConstraint) {
        self.atoms.push(atom);
        self.atoms.sort();
        self.atoms.dedup();
    }

    pub fn remove_atom(&mut self, index: usize) -> ClockConstraint {
        self.atoms.remove(index)
    }

    pub fn set_atom(&mut self, index: usize, atom: ClockConstraint) {
        self.atoms[index] = atom;
        self.atoms.sort();
        self.atoms.dedup();
    }

    pub fn has_strict_lower_bound(&self) -> bool {
        self.atoms.iter().any(|a| a.op == RelOp::Gt)
    }

    pub fn max_bound(&self) -> u64 {
        self.atoms.iter().map(|a| a.bound).max().unwrap_or(0)
    }

    /// True iff every atom holds for the valuation. Panics on a clock index
    /// beyond the valuation length (a structurally corrupt automaton).
    pub fn satisfied_by(&self, v: &ClockValuation) -> bool {
        self.atoms.iter().all(|a| a.holds_at(v.value(a.clock)))
    }

    /// The set of delays `d >= 0` after which this guard holds from `v`,
    /// described by its lower end; `None` if no delay satisfies the guard.
    ///
    /// Since clocks advance uniformly, the satisfying set is an interval.
    /// Only its closed-from-below end matters to callers: output guards never
    /// have strict lower bounds, so `lo` is attained exactly.
    pub fn delay_window(&self, v: &ClockValuation) -> Option<DelayWindow> {
        let mut lo = Time::ZERO;
        let mut lo_strict = false;
        let mut hi: Option<(Time, bool)> = None;
        for a in &self.atoms {
            let value = v.value(a.clock);
            let bound = Time::from_units(a.bound);
            if a.op.is_lower_bound() {
                let d = bound.saturating_sub(value);
                let strict = a.op.is_strict() && value <= bound;
                if d > lo || (d == lo && strict) {
                    lo = d;
                    lo_strict = strict;
                } else if d == lo {
                    lo_strict = lo_strict || strict;
                }
            } else {
                if value > bound || (a.op.is_strict() && value == bound) {
                    return None;
                }
                let d = bound - value;
                let strict = a.op.is_strict();
                hi = Some(match hi {
                    None => (d, strict),
                    Some((h, hs)) => {
                        if d < h || (d == h && strict) {
                            (d, strict)
                        } else {
                            (h, hs)
                        }
                    }
                });
            }
        }
        if let Some((h, h_strict)) = hi {
            if lo > h || (lo == h && (lo_strict || h_strict)) {
                return None;
            }
        }
        Some(DelayWindow { lo, lo_strict })
    }
}

/// Non-empty delay window of a guard from some valuation.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct DelayWindow {
    pub lo: Time,
    pub lo_strict: bool,
}

impl DelayWindow {
    /// Some satisfying delay exists in `[0, d]`.
    pub fn enabled_at_most(&self, d: Time) -> bool {
        self.lo < d || (self.lo == d && !self.lo_strict)
    }

    /// Some satisfying delay exists in `[0, d)`.
    pub fn enabled_strictly_before(&self, d: Time) -> bool {
        self.lo < d
    }
}

/// Set of clocks reset by an edge, as a bitmask (at most 32 clocks).
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ResetSet(u32);

impl ResetSet {
    pub const EMPTY: ResetSet = ResetSet(0);

    pub fn insert(&mut self, clock: usize) {
        assert!(clock < 32, "clock index out of range");
        self.0 |= 1 << clock;
    }

    pub fn remove(&mut self, clock: usize) {
        self.0 &= !(1 << clock);
    }

    pub fn contains(&self, clock: usize) -> bool {
        clock < 32 && self.0 & (1 << clock) != 0
    }

    pub fn toggle(&mut self, clock: usize) {
        if self.contains(clock) {
            self.remove(clock);
        } else {
            self.insert(clock);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        let bits = self.0;
        (0..32).filter(move |c| bits & (1 << c) != 0)
    }
}

impl FromIterator<usize> for ResetSet {
    fn from_iter<I: IntoIterator<Item = usize>>(clocks: I) -> ResetSet {
        let mut set = ResetSet::EMPTY;
        for c in clocks {
            set.insert(c);
        }
        set
    }
}

/// A guarded, labelled edge with clock resets.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub source: usize,
    pub action: Action,
    pub guard: Guard,
    pub resets: ResetSet,
    pub target: usize,
}

impl Edge {
    /// Canonical ordering: source, label, target, then guard and resets.
    pub(crate) fn sort_key(&self) -> (usize, Action, usize, &Guard, ResetSet) {
        (self.source, self.action, self.target, &self.guard, self.resets)
    }
}

/// One non-negative time value per clock.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClockValuation {
    values: Vec<Time>,
}

impl ClockValuation {
    pub fn zero(n_clocks: usize) -> ClockValuation {
        ClockValuation { values: vec![Time::ZERO; n_clocks] }
    }

    pub fn from_values(values: Vec<Time>) -> ClockValuation {
        ClockValuation { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, clock: usize) -> Time {
        self.values[clock]
    }

    pub fn values(&self) -> &[Time] {
        &self.values
    }

    /// Valuation after waiting `d`.
    pub fn delayed(&self, d: Time) -> ClockValuation {
        ClockValuation { values: self.values.iter().map(|&v| v + d).collect() }
    }

    pub fn delay_in_place(&mut self, d: Time) {
        for v in &mut self.values {
            *v += d;
        }
    }

    /// Valuation with the clocks in `resets` zeroed.
    pub fn reset(&self, resets: ResetSet) -> ClockValuation {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(c, &v)| if resets.contains(c) { Time::ZERO } else { v })
            .collect();
        ClockValuation { values }
    }
}

/// A state of the timed transition system: location plus clock valuation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TtsState {
    pub location: usize,
    pub valuation: ClockValuation,
}

impl TtsState {
    pub fn initial(ta: &TimedAutomaton) -> TtsState {
        TtsState { location: ta.initial(), valuation: ClockValuation::zero(ta.n_clocks()) }
    }
}

/// An output enabling found by [`TimedAutomaton::earliest_output_enabling`]:
/// the minimal delay and every output edge enabled at exactly that delay.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputEnabling {
    pub delay: Time,
    pub edges: Vec<usize>,
}

/// Structural validation errors raised when assembling an automaton.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TaError {
    NoLocations,
    BadInitial { initial: usize, n_locations: usize },
    BadEndpoint { edge: usize },
    BadClockIndex { edge: usize, clock: usize },
    BadActionIndex { edge: usize },
    TooManyClocks(usize),
    BadActionName(String),
    DuplicateAction,
}

impl fmt::Display for TaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TaError::NoLocations => write!(f, "automaton has no locations"),
            TaError::BadInitial { initial, n_locations } => {
                write!(f, "initial location {initial} out of range (have {n_locations})")
            }
            TaError::BadEndpoint { edge } => write!(f, "edge {edge} references a missing location"),
            TaError::BadClockIndex { edge, clock } => {
                write!(f, "edge {edge} references missing clock c{clock}")
            }
            TaError::BadActionIndex { edge } => write!(f, "edge {edge} references a missing action"),
            TaError::TooManyClocks(n) => write!(f, "clock count {n} exceeds the supported 32"),
            TaError::BadActionName(name) => write!(f, "invalid action name {name:?}"),
            TaError::DuplicateAction => write!(f, "duplicate action name in alphabet"),
        }
    }
}

impl std::error::Error for TaError {}

/// A deterministic-by-construction container for a timed automaton.
///
/// Locations are dense `0..n_locations`; edges are kept in canonical order
/// (source-major), with a per-location index for fast outgoing lookups.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimedAutomaton {
    alphabet: Alphabet,
    n_clocks: usize,
    n_locations: usize,
    initial: usize,
    edges: Vec<Edge>,
    edge_starts: Vec<usize>,
}

impl TimedAutomaton {
    pub fn new(
        alphabet: Alphabet,
        n_clocks: usize,
        n_locations: usize,
        initial: usize,
        mut edges: Vec<Edge>,
    ) -> Result<TimedAutomaton, TaError> {
        if n_locations == 0 {
            return Err(TaError::NoLocations);
        }
        if initial >= n_locations {
            return Err(TaError::BadInitial { initial, n_locations });
        }
        if n_clocks > 32 {
            return Err(TaError::TooManyClocks(n_clocks));
        }
        for (i, e) in edges.iter().enumerate() {
            if e.source >= n_locations || e.target >= n_locations {
                return Err(TaError::BadEndpoint { edge: i });
            }
            let pool = match e.action.kind {
                ActionKind::Input => alphabet.input_count(),
                ActionKind::Output => alphabet.output_count(),
            };
            if e.action.idx >= pool {
                return Err(TaError::BadActionIndex { edge: i });
            }
            for a in e.guard.atoms() {
                if a.clock >= n_clocks {
                    return Err(TaError::BadClockIndex { edge: i, clock: a.clock });
                }
            }
            if e.resets.iter().any(|c| c >= n_clocks) {
                return Err(TaError::BadClockIndex { edge: i, clock: n_clocks });
            }
        }
        edges.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        let mut edge_starts = vec![0usize; n_locations + 1];
        for e in &edges {
            edge_starts[e.source + 1] += 1;
        }
        for l in 0..n_locations {
            edge_starts[l + 1] += edge_starts[l];
        }
        Ok(TimedAutomaton { alphabet, n_clocks, n_locations, initial, edges, edge_starts })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn n_clocks(&self) -> usize {
        self.n_clocks
    }

    pub fn n_locations(&self) -> usize {
        self.n_locations
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn size(&self) -> usize {
        self.edges.len()
    }

    /// Index range of the outgoing edges of `location`.
    pub fn outgoing_range(&self, location: usize) -> std::ops::Range<usize> {
        self.edge_starts[location]..self.edge_starts[location + 1]
    }

    pub fn outgoing(&self, location: usize) -> &[Edge] {
        &self.edges[self.outgoing_range(location)]
    }

    /// Largest constant appearing in any guard.
    pub fn max_constant(&self) -> u64 {
        self.edges.iter().map(|e| e.guard.max_bound()).max().unwrap_or(0)
    }

    /// All states reachable from `state` by one discrete `action` transition,
    /// deduplicated and in canonical order. The implicit input self-loop is
    /// not materialized here; callers apply it when this set is empty.
    pub fn discrete_successors(&self, state: &TtsState, action: Action) -> Vec<TtsState> {
        let mut out: Vec<TtsState> = self
            .enabled_edges(state, action)
            .into_iter()
            .map(|(_, succ)| succ)
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Enabled `action`-labelled edges from `state` with their successor
    /// states; one entry per edge, in canonical edge order.
    pub fn enabled_edges(&self, state: &TtsState, action: Action) -> Vec<(usize, TtsState)> {
        let range = self.outgoing_range(state.location);
        let mut out = Vec::new();
        for idx in range {
            let e = &self.edges[idx];
            if e.action == action && e.guard.satisfied_by(&state.valuation) {
                out.push((
                    idx,
                    TtsState { location: e.target, valuation: state.valuation.reset(e.resets) },
                ));
            }
        }
        out
    }

    /// Minimal delay `d* <= horizon` at which some output edge from this
    /// state becomes enabled, with every output edge enabled at exactly `d*`.
    ///
    /// Minimality is well defined because output guards carry no strict lower
    /// bounds, so each enabling set is closed from below.
    pub fn earliest_output_enabling(
        &self,
        state: &TtsState,
        horizon: Time,
    ) -> Option<OutputEnabling> {
        let mut best: Option<OutputEnabling> = None;
        for idx in self.outgoing_range(state.location) {
            let e = &self.edges[idx];
            if !e.action.is_output() {
                continue;
            }
            let Some(w) = e.guard.delay_window(&state.valuation) else { continue };
            debug_assert!(!w.lo_strict, "output guard with strict lower bound");
            if w.lo > horizon {
                continue;
            }
            match &mut best {
                Some(b) if w.lo > b.delay => {}
                Some(b) if w.lo == b.delay => b.edges.push(idx),
                _ => best = Some(OutputEnabling { delay: w.lo, edges: vec![idx] }),
            }
        }
        best
    }

    /// True iff some output edge from `location` is enabled after a delay in
    /// `[0, d]` (`inclusive`) or `[0, d)` from the given valuation.
    pub fn output_possible_within(
        &self,
        location: usize,
        valuation: &ClockValuation,
        d: Time,
        inclusive: bool,
    ) -> bool {
        self.edges[self.outgoing_range(location)].iter().any(|e| {
            e.action.is_output()
                && e.guard.delay_window(valuation).is_some_and(|w| {
                    if inclusive {
                        w.enabled_at_most(d)
                    } else {
                        w.enabled_strictly_before(d)
                    }
                })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::build_train_ta;

    fn v1(t: Time) -> ClockValuation {
        ClockValuation::from_values(vec![t])
    }

    #[test]
    fn empty_guard_is_true() {
        assert!(Guard::TRUE.satisfied_by(&v1(Time::ZERO)));
        assert!(Guard::TRUE.satisfied_by(&v1(Time::from_units(99))));
    }

    #[test]
    fn guard_boundaries_are_exact() {
        let ge5 = Guard::new(vec![ClockConstraint { clock: 0, op: RelOp::Ge, bound: 5 }]);
        assert!(ge5.satisfied_by(&v1(Time::from_units(5))));
        // 4.999... is not representable; probe just below 5 with 4 + 0.5 + ...
        assert!(!ge5.satisfied_by(&v1(Time::from_halves(9))));

        let band = Guard::new(vec![
            ClockConstraint { clock: 0, op: RelOp::Ge, bound: 5 },
            ClockConstraint { clock: 0, op: RelOp::Lt, bound: 10 },
        ]);
        assert!(!band.satisfied_by(&v1(Time::from_units(10))));
        assert!(band.satisfied_by(&v1(Time::from_halves(19))));
    }

    #[test]
    fn train_discrete_successors() {
        let train = build_train_ta();
        let start = train.alphabet().lookup("start?").unwrap();
        let appr = train.alphabet().lookup("appr!").unwrap();

        let q0 = TtsState::initial(&train);
        let succs = train.discrete_successors(&q0, start);
        assert_eq!(succs.len(), 1);
        assert_eq!(succs[0].location, 1);
        assert_eq!(succs[0].valuation.value(0), Time::ZERO);

        // appr! needs c >= 5; at c = 3 nothing fires.
        let q1 = TtsState { location: 1, valuation: v1(Time::from_units(3)) };
        assert!(train.discrete_successors(&q1, appr).is_empty());
    }

    #[test]
    fn nondeterministic_successors_are_kept_apart() {
        let alphabet = Alphabet::new(vec!["i".into()], vec![]).unwrap();
        let i = Action::input(0);
        let ta = TimedAutomaton::new(
            alphabet,
            1,
            3,
            0,
            vec![
                Edge { source: 0, action: i, guard: Guard::TRUE, resets: ResetSet::EMPTY, target: 1 },
                Edge { source: 0, action: i, guard: Guard::TRUE, resets: ResetSet::EMPTY, target: 2 },
            ],
        )
        .unwrap();
        let q = TtsState::initial(&ta);
        assert_eq!(ta.discrete_successors(&q, i).len(), 2);
    }

    #[test]
    fn duplicate_successor_states_collapse() {
        let alphabet = Alphabet::new(vec!["i".into()], vec![]).unwrap();
        let i = Action::input(0);
        // Two distinct edges, same endpoint; at c = 0 the reset makes no
        // difference, so the successor state is identical.
        let ta = TimedAutomaton::new(
            alphabet,
            1,
            2,
            0,
            vec![
                Edge { source: 0, action: i, guard: Guard::TRUE, resets: ResetSet::EMPTY, target: 1 },
                Edge { source: 0, action: i, guard: Guard::TRUE, resets: ResetSet::from_iter([0]), target: 1 },
            ],
        )
        .unwrap();
        let q = TtsState::initial(&ta);
        assert_eq!(ta.discrete_successors(&q, i).len(), 1);
        let later = TtsState { location: 0, valuation: v1(Time::from_units(2)) };
        assert_eq!(ta.discrete_successors(&later, i).len(), 2);
    }

    #[test]
    fn earliest_output_on_train() {
        let train = build_train_ta();
        let q1 = TtsState { location: 1, valuation: v1(Time::ZERO) };
        let hit = train.earliest_output_enabling(&q1, Time::from_units(100)).unwrap();
        assert_eq!(hit.delay, Time::from_units(5));
        assert_eq!(hit.edges.len(), 1);
        assert_eq!(train.edges()[hit.edges[0]].target, 2);

        let q0 = TtsState::initial(&train);
        assert!(train.earliest_output_enabling(&q0, Time::from_units(100)).is_none());
    }

    #[test]
    fn earliest_output_reports_simultaneous_edges() {
        let alphabet = Alphabet::new(vec![], vec!["o1".into(), "o2".into()]).unwrap();
        let g3 = Guard::new(vec![ClockConstraint { clock: 0, op: RelOp::Ge, bound: 3 }]);
        let ta = TimedAutomaton::new(
            alphabet,
            1,
            2,
            0,
            vec![
                Edge { source: 0, action: Action::output(0), guard: g3.clone(), resets: ResetSet::EMPTY, target: 1 },
                Edge { source: 0, action: Action::output(1), guard: g3, resets: ResetSet::EMPTY, target: 1 },
            ],
        )
        .unwrap();
        let hit = ta.earliest_output_enabling(&TtsState::initial(&ta), Time::from_units(100)).unwrap();
        assert_eq!(hit.delay, Time::from_units(3));
        assert_eq!(hit.edges.len(), 2);
    }

    #[test]
    fn structural_validation_catches_bad_indices() {
        let alphabet = Alphabet::new(vec!["i".into()], vec![]).unwrap();
        let edge = |target| Edge {
            source: 0,
            action: Action::input(0),
            guard: Guard::TRUE,
            resets: ResetSet::EMPTY,
            target,
        };
        let err = TimedAutomaton::new(alphabet.clone(), 1, 2, 0, vec![edge(5)]).unwrap_err();
        assert_eq!(err, TaError::BadEndpoint { edge: 0 });
        let err = TimedAutomaton::new(alphabet, 1, 2, 9, vec![edge(1)]).unwrap_err();
        assert_eq!(err, TaError::BadInitial { initial: 9, n_locations: 2 });
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn time_strategy() -> impl Strategy<Value = Time> {
            // Half-unit grid keeps values in the range guards care about.
            (0u64..2000).prop_map(Time::from_halves)
        }

        fn valuation_strategy() -> impl Strategy<Value = ClockValuation> {
            proptest::collection::vec(time_strategy(), 1..=3)
                .prop_map(ClockValuation::from_values)
        }

        proptest! {
            #[test]
            fn delays_compose(v in valuation_strategy(), d1 in time_strategy(), d2 in time_strategy()) {
                prop_assert_eq!(v.delayed(d1).delayed(d2), v.delayed(d1 + d2));
            }

            #[test]
            fn resets_are_idempotent_and_preserve_zero(v in valuation_strategy(), mask in 0u32..8) {
                let clocks: Vec<usize> = (0..v.len()).filter(|c| mask & (1 << c) != 0).collect();
                let resets = ResetSet::from_iter(clocks);
                prop_assert_eq!(v.reset(resets).reset(resets), v.reset(resets));
                let zero = ClockValuation::zero(v.len());
                prop_assert_eq!(zero.reset(resets), ClockValuation::zero(v.len()));
            }

            #[test]
            fn guard_bounds_are_monotone(value in time_strategy(), bound in 0u64..40) {
                // Lower-bound atoms only get easier as the bound shrinks,
                // upper-bound atoms as it grows.
                let ge = ClockConstraint { clock: 0, op: RelOp::Ge, bound };
                let gt = ClockConstraint { clock: 0, op: RelOp::Gt, bound };
                let le = ClockConstraint { clock: 0, op: RelOp::Le, bound };
                let lt = ClockConstraint { clock: 0, op: RelOp::Lt, bound };
                if bound > 0 {
                    let looser = bound - 1;
                    let ge_loose = ClockConstraint { bound: looser, ..ge };
                    let gt_loose = ClockConstraint { bound: looser, ..gt };
                    let le_tight = ClockConstraint { bound: looser, ..le };
                    let lt_tight = ClockConstraint { bound: looser, ..lt };
                    prop_assert!(!ge.holds_at(value) || ge_loose.holds_at(value));
                    prop_assert!(!gt.holds_at(value) || gt_loose.holds_at(value));
                    prop_assert!(!le_tight.holds_at(value) || le.holds_at(value));
                    prop_assert!(!lt_tight.holds_at(value) || lt.holds_at(value));
                }
            }

            #[test]
            fn delay_window_lower_end_is_minimal(
                v in valuation_strategy(),
                bound in 0u64..20,
                upper in 0u64..25,
            ) {
                // For closed-from-below guards the window's lower end is the
                // earliest satisfying delay: sampled points below it never
                // satisfy, the end itself does (when within the upper bound).
                let guard = Guard::new(vec![
                    ClockConstraint { clock: 0, op: RelOp::Ge, bound },
                    ClockConstraint { clock: 0, op: RelOp::Le, bound: bound + upper },
                ]);
                if let Some(w) = guard.delay_window(&v) {
                    prop_assert!(!w.lo_strict);
                    prop_assert!(guard.satisfied_by(&v.delayed(w.lo)));
                    // Quarter-unit sampling strictly below the window start.
                    let quarter = Time::parse("0.25").unwrap();
                    let mut probe = Time::ZERO;
                    while probe < w.lo {
                        prop_assert!(!guard.satisfied_by(&v.delayed(probe)));
                        probe += quarter;
                    }
                }
            }
        }
    }

    #[test]
    fn delay_window_handles_bands() {
        // c in [2, 4] from c = 1: delays [1, 3].
        let g = Guard::new(vec![
            ClockConstraint { clock: 0, op: RelOp::Ge, bound: 2 },
            ClockConstraint { clock: 0, op: RelOp::Le, bound: 4 },
        ]);
        let w = g.delay_window(&v1(Time::from_units(1))).unwrap();
        assert_eq!(w.lo, Time::from_units(1));
        assert!(w.enabled_at_most(Time::from_units(1)));
        assert!(!w.enabled_strictly_before(Time::from_units(1)));

        // Already past the band: no delay works.
        assert!(g.delay_window(&v1(Time::from_units(5))).is_none());

        // Strict upper bound exactly at the lower bound: empty.
        let point = Guard::new(vec![
            ClockConstraint { clock: 0, op: RelOp::Ge, bound: 4 },
            ClockConstraint { clock: 0, op: RelOp::Lt, bound: 4 },
        ]);
        assert!(point.delay_window(&v1(Time::ZERO)).is_none());
    }
}
