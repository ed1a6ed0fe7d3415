//! Test sequences, timed traces, the in-process oracle that executes test
//! sequences on a well-formed automaton under eager-output semantics, random
//! training-set generation, and the trace file format.
//!
//! File format: UTF-8 text, one trace per line, events as space-separated
//! `timestamp action` pairs. Timestamps are exact decimal dyadics (`7.5`);
//! the `?`/`!` action suffix is mandatory.

use crate::rng::StreamSeed;
use crate::ta::{check_well_formed, Action, Alphabet, TimedAutomaton, TtsState};
use crate::time::Time;
use rand::Rng;
use rayon::prelude::*;
use std::fmt;
use std::path::Path;

/// Timestamped inputs to execute on a system; timestamps are non-decreasing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestSequence {
    steps: Vec<(Time, Action)>,
}

impl TestSequence {
    pub fn new(steps: Vec<(Time, Action)>) -> TestSequence {
        assert!(
            steps.windows(2).all(|w| w[0].0 <= w[1].0),
            "test sequence timestamps must be non-decreasing"
        );
        assert!(steps.iter().all(|(_, a)| a.is_input()), "test sequences carry inputs only");
        TestSequence { steps }
    }

    pub fn steps(&self) -> &[(Time, Action)] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Timestamped interleaving of inputs and produced outputs.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimedTrace {
    events: Vec<(Time, Action)>,
}

impl TimedTrace {
    pub fn new(events: Vec<(Time, Action)>) -> TimedTrace {
        assert!(
            events.windows(2).all(|w| w[0].0 <= w[1].0),
            "trace timestamps must be non-decreasing"
        );
        TimedTrace { events }
    }

    pub fn events(&self) -> &[(Time, Action)] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn output_count(&self) -> usize {
        self.events.iter().filter(|(_, a)| a.is_output()).count()
    }

    pub fn input_count(&self) -> usize {
        self.events.iter().filter(|(_, a)| a.is_input()).count()
    }

    /// The generating test sequence: inputs with their timestamps.
    pub fn input_projection(&self) -> TestSequence {
        TestSequence::new(self.events.iter().copied().filter(|(_, a)| a.is_input()).collect())
    }
}

/// A collection of traces sharing one alphabet (action indices are only
/// meaningful relative to it).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceSet {
    pub alphabet: Alphabet,
    pub traces: Vec<TimedTrace>,
}

/// Parameters of random test-sequence generation.
#[derive(Clone, Debug)]
pub struct TraceGenConfig {
    /// Geometric length parameter; expected sequence length is `1/p_test`.
    pub p_test: f64,
    /// Largest constant delays are drawn against, in time units.
    pub c_max: u64,
    /// Constants worth hitting exactly (guard boundaries and the like).
    pub important_constants: Vec<u64>,
    /// Minimum number of outputs a training trace must contain.
    pub min_outputs: usize,
    /// How long outputs are observed after the final input; the window
    /// restarts after every emitted output.
    pub horizon_after_last_input: Time,
}

impl TraceGenConfig {
    pub fn new(p_test: f64, c_max: u64) -> TraceGenConfig {
        assert!(p_test > 0.0 && p_test < 1.0, "p_test must lie in (0,1)");
        assert!(c_max >= 1, "c_max must be at least 1");
        TraceGenConfig {
            p_test,
            c_max,
            important_constants: Vec::new(),
            min_outputs: 1,
            horizon_after_last_input: Time::from_units(c_max),
        }
    }

    /// Configuration for a known system under test: its guard constants
    /// become the important constants.
    pub fn for_sut(sut: &TimedAutomaton, p_test: f64, c_max: u64) -> TraceGenConfig {
        let mut cfg = TraceGenConfig::new(p_test, c_max);
        let mut constants: Vec<u64> = sut
            .edges()
            .iter()
            .flat_map(|e| e.guard.atoms().iter().map(|a| a.bound))
            .collect();
        constants.sort_unstable();
        constants.dedup();
        cfg.important_constants = constants;
        cfg
    }
}

/// Hard cap on outputs per trace; hitting it means the system under test
/// produces outputs forever (output livelock).
const OUTPUT_CAP: usize = 100;

/// Consecutive rejected sequences before training-set generation gives up.
const REJECTION_BUDGET: usize = 10_000;

#[derive(Debug)]
pub enum TraceError {
    /// The system under test fails the testability assumptions, so executing
    /// a test sequence would not determine a unique response.
    NotWellFormed,
    /// More than [`OUTPUT_CAP`] outputs in one trace.
    OutputLivelock,
    /// Rejection sampling could not find a sequence with enough outputs.
    RejectionBudgetExhausted { trace_index: usize },
}

impl fmt::Display for TraceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceError::NotWellFormed => {
                write!(f, "system under test violates the testability assumptions")
            }
            TraceError::OutputLivelock => {
                write!(f, "system under test emits outputs without quiescing")
            }
            TraceError::RejectionBudgetExhausted { trace_index } => write!(
                f,
                "gave up generating trace {trace_index} after {REJECTION_BUDGET} rejected \
                 sequences; the system may emit no outputs"
            ),
        }
    }
}

impl std::error::Error for TraceError {}

/// Draws a random test sequence: geometrically distributed length (support
/// 1, 2, ...), inputs uniform, and inter-input delays mixing important
/// constants, uniform integers in `[0, c_max]`, and half-unit dyadics in
/// `[0, c_max + 1]` to probe just-above-boundary behaviour.
pub fn generate_test_sequence(
    cfg: &TraceGenConfig,
    alphabet: &Alphabet,
    rng: &mut impl Rng,
) -> TestSequence {
    assert!(alphabet.input_count() > 0, "cannot generate inputs from an empty input alphabet");
    let mut len = 1usize;
    while !rng.gen_bool(cfg.p_test) {
        len += 1;
    }
    let mut steps = Vec::with_capacity(len);
    let mut now = Time::ZERO;
    for _ in 0..len {
        let input = Action::input(rng.gen_range(0..alphabet.input_count()));
        now += random_delay(cfg, rng);
        steps.push((now, input));
    }
    TestSequence::new(steps)
}

fn random_delay(cfg: &TraceGenConfig, rng: &mut impl Rng) -> Time {
    match rng.gen_range(0..3u32) {
        0 => {
            let pool_len = cfg.important_constants.len() + 1;
            let pick = rng.gen_range(0..pool_len);
            let units = if pick == 0 { 0 } else { cfg.important_constants[pick - 1] };
            Time::from_units(units)
        }
        1 => Time::from_units(rng.gen_range(0..=cfg.c_max)),
        _ => Time::from_halves(rng.gen_range(0..=2 * (cfg.c_max + 1))),
    }
}

/// Executes a test sequence on a well-formed system under test.
///
/// Between consecutive input times every output fires eagerly at its minimal
/// enabling delay; an output enabling exactly at an input's timestamp is
/// emitted before the input applies. After the final input, outputs are
/// chased until none enables within `horizon_after_last_input` of the last
/// event.
pub fn execute_on_sut(
    sut: &TimedAutomaton,
    ts: &TestSequence,
    horizon_after_last_input: Time,
) -> Result<TimedTrace, TraceError> {
    if !check_well_formed(sut, sut.max_constant()).all_ok() {
        return Err(TraceError::NotWellFormed);
    }
    execute_unchecked(sut, ts, horizon_after_last_input)
}

fn execute_unchecked(
    sut: &TimedAutomaton,
    ts: &TestSequence,
    horizon: Time,
) -> Result<TimedTrace, TraceError> {
    let mut state = TtsState::initial(sut);
    let mut now = Time::ZERO;
    let mut events: Vec<(Time, Action)> = Vec::new();
    let mut outputs = 0usize;

    fn emit_one(
        sut: &TimedAutomaton,
        state: &mut TtsState,
        now: &mut Time,
        budget: Time,
        events: &mut Vec<(Time, Action)>,
        outputs: &mut usize,
    ) -> Result<bool, TraceError> {
        let Some(hit) = sut.earliest_output_enabling(state, budget) else {
            return Ok(false);
        };
        // Isolated outputs guarantee a unique enabled action here; identical
        // successors may still be reported through several edges.
        let edge = &sut.edges()[hit.edges[0]];
        state.valuation.delay_in_place(hit.delay);
        state.valuation = state.valuation.reset(edge.resets);
        state.location = edge.target;
        *now += hit.delay;
        events.push((*now, edge.action));
        *outputs += 1;
        if *outputs > OUTPUT_CAP {
            return Err(TraceError::OutputLivelock);
        }
        Ok(true)
    }

    for &(t, input) in ts.steps() {
        // Outputs enabling up to (and including) the input time fire first.
        loop {
            let budget = t - now;
            if !emit_one(sut, &mut state, &mut now, budget, &mut events, &mut outputs)? {
                break;
            }
        }
        state.valuation.delay_in_place(t - now);
        now = t;
        if let Some((_, succ)) = sut.enabled_edges(&state, input).into_iter().next() {
            state = succ;
        }
        // No enabled edge: the implicit self-loop keeps the state.
        events.push((t, input));
    }
    // Quiescence chase; the observation window restarts after each output.
    while emit_one(sut, &mut state, &mut now, horizon, &mut events, &mut outputs)? {}
    Ok(TimedTrace::new(events))
}

/// Generates exactly `n_test` traces, each with at least `cfg.min_outputs`
/// outputs; sequences with fewer are discarded and regenerated. Traces get
/// independent derived streams, so generation is order-independent and
/// parallel.
pub fn generate_training_set(
    sut: &TimedAutomaton,
    cfg: &TraceGenConfig,
    n_test: usize,
    seed: StreamSeed,
) -> Result<TraceSet, TraceError> {
    if !check_well_formed(sut, sut.max_constant()).all_ok() {
        return Err(TraceError::NotWellFormed);
    }
    let traces = (0..n_test)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.child(i as u64).rng();
            for _ in 0..REJECTION_BUDGET {
                let ts = generate_test_sequence(cfg, sut.alphabet(), &mut rng);
                let tt = execute_unchecked(sut, &ts, cfg.horizon_after_last_input)?;
                if tt.output_count() >= cfg.min_outputs {
                    return Ok(tt);
                }
            }
            Err(TraceError::RejectionBudgetExhausted { trace_index: i })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TraceSet { alphabet: sut.alphabet().clone(), traces })
}

#[derive(Debug)]
pub enum TraceReadError {
    Io(std::io::Error),
    Parse { line: usize, what: String },
}

impl fmt::Display for TraceReadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceReadError::Io(e) => write!(f, "{e}"),
            TraceReadError::Parse { line, what } => write!(f, "line {line}: {what}"),
        }
    }
}

impl std::error::Error for TraceReadError {}

impl From<std::io::Error> for TraceReadError {
    fn from(e: std::io::Error) -> Self {
        TraceReadError::Io(e)
    }
}

pub fn render_traces(set: &TraceSet) -> String {
    let mut out = String::new();
    for trace in &set.traces {
        let mut first = true;
        for &(t, a) in trace.events() {
            if !first {
                out.push(' ');
            }
            first = false;
            out.push_str(&t.to_string());
            out.push(' ');
            out.push_str(&set.alphabet.display(a));
        }
        out.push('\n');
    }
    out
}

pub fn parse_traces(text: &str) -> Result<TraceSet, TraceReadError> {
    // First pass: collect the alphabet so action indices are stable.
    let mut input_names: Vec<String> = Vec::new();
    let mut output_names: Vec<String> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let mut tokens = line.split_whitespace();
        while let Some(_stamp) = tokens.next() {
            let action = tokens.next().ok_or_else(|| TraceReadError::Parse {
                line: idx + 1,
                what: "timestamp without an action".into(),
            })?;
            let (name, kind) =
                crate::ta::split_rendered(action).ok_or_else(|| TraceReadError::Parse {
                    line: idx + 1,
                    what: format!("action {action:?} must end in ? or !"),
                })?;
            let pool = match kind {
                crate::ta::ActionKind::Input => &mut input_names,
                crate::ta::ActionKind::Output => &mut output_names,
            };
            if !pool.iter().any(|n| n == name) {
                pool.push(name.to_string());
            }
        }
    }
    let alphabet = Alphabet::new(input_names, output_names)
        .map_err(|e| TraceReadError::Parse { line: 0, what: e.to_string() })?;

    let mut traces = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let mut events = Vec::new();
        let mut tokens = line.split_whitespace();
        let mut last = Time::ZERO;
        while let Some(stamp) = tokens.next() {
            let t = Time::parse(stamp)
                .map_err(|e| TraceReadError::Parse { line: line_no, what: e.to_string() })?;
            if t < last {
                return Err(TraceReadError::Parse {
                    line: line_no,
                    what: format!("timestamps decrease at {stamp}"),
                });
            }
            last = t;
            let action_text = tokens.next().expect("validated in first pass");
            let action = alphabet.lookup(action_text).expect("collected in first pass");
            events.push((t, action));
        }
        traces.push(TimedTrace::new(events));
    }
    Ok(TraceSet { alphabet, traces })
}

pub fn write_traces(path: &Path, set: &TraceSet) -> Result<(), std::io::Error> {
    std::fs::write(path, render_traces(set))
}

pub fn read_traces(path: &Path) -> Result<TraceSet, TraceReadError> {
    parse_traces(&std::fs::read_to_string(path)?)
}
