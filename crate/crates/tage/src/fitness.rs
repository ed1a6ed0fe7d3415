//! Candidate evaluation: multi-path simulation of a generated automaton on
//! timed traces, the PASS/NONDET/FAIL verdict, the steps/out/size metrics,
//! and the weighted fitness function.
//!
//! Simulation replays a reference trace on a candidate without treating
//! outputs as urgent. Candidates are input-enabled but may be
//! non-deterministic, so one trace can explore several paths:
//!
//! - before an input, the path is *marked* if an output could have fired at
//!   or before the input's time, or if the input has two or more distinct
//!   successor states; exploration branches to every successor (the implicit
//!   self-loop applies when no edge fires);
//! - an output kills its path if some output was enabled strictly during the
//!   preceding delay, if it has several distinct successors, or if a
//!   different output is enabled at the same moment; an output that is simply
//!   not enabled ends the path, recording the explored prefix.
//!
//! PASS demands a single explored trace of full length; marks lower the
//! deterministic-step reward and feed the fault counters that bias mutation.

use crate::ta::{TimedAutomaton, TtsState};
use crate::time::Time;
use crate::traces::{TimedTrace, TraceSet};

/// Outcome of simulating one trace.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Pass,
    Nondet,
    Fail,
}

/// One explored prefix of the reference trace: its length and a mark per
/// consumed event (outputs are never marked).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ExploredTrace {
    pub len: usize,
    pub marks: Vec<bool>,
}

impl ExploredTrace {
    pub fn has_marks(&self) -> bool {
        self.marks.iter().any(|&m| m)
    }
}

/// The set of explored prefixes produced by simulating one trace.
#[derive(Clone, Debug)]
pub struct SimResult<'a> {
    pub reference: &'a TimedTrace,
    /// Sorted and deduplicated; never empty (an immediately failing trace
    /// yields the empty prefix).
    pub traces: Vec<ExploredTrace>,
}

/// Per-edge and per-location fault counters gathered during simulation;
/// mutation biases its edge and location choices towards high counters.
#[derive(Clone, Debug, Default)]
pub struct Diagnostics {
    pub edge_faults: Vec<u32>,
    /// Termination counts per location, before finalization.
    term_locs: Vec<u32>,
    /// Per-location weights: incident edge faults plus termination counts.
    pub loc_faults: Vec<u32>,
}

impl Diagnostics {
    pub fn new(ta: &TimedAutomaton) -> Diagnostics {
        Diagnostics {
            edge_faults: vec![0; ta.size()],
            term_locs: vec![0; ta.n_locations()],
            loc_faults: Vec::new(),
        }
    }

    /// Computes the per-location counters from edge faults and terminations.
    pub fn finalize(&mut self, ta: &TimedAutomaton) {
        let mut locs = self.term_locs.clone();
        for (e, &count) in ta.edges().iter().zip(&self.edge_faults) {
            locs[e.source] = locs[e.source].saturating_add(count);
            if e.target != e.source {
                locs[e.target] = locs[e.target].saturating_add(count);
            }
        }
        self.loc_faults = locs;
    }
}

/// One in-flight exploration path.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Path {
    state: TtsState,
    marks: Vec<bool>,
    /// Explicit edges taken, for fault attribution.
    edges: Vec<usize>,
}

pub fn simulate<'a>(g: &TimedAutomaton, tt: &'a TimedTrace, state_cap: usize) -> SimResult<'a> {
    let mut scratch = Diagnostics::new(g);
    simulate_with_diagnostics(g, tt, state_cap, &mut scratch)
}

pub fn simulate_with_diagnostics<'a>(
    g: &TimedAutomaton,
    tt: &'a TimedTrace,
    state_cap: usize,
    diag: &mut Diagnostics,
) -> SimResult<'a> {
    assert!(state_cap >= 1, "state_cap must be positive");
    let mut frontier = vec![Path { state: TtsState::initial(g), marks: Vec::new(), edges: Vec::new() }];
    let mut recorded: Vec<ExploredTrace> = Vec::new();
    let mut prev_time = Time::ZERO;

    let mut terminate = |path: Path, diag: &mut Diagnostics| {
        for &e in &path.edges {
            diag.edge_faults[e] = diag.edge_faults[e].saturating_add(1);
        }
        diag.term_locs[path.state.location] =
            diag.term_locs[path.state.location].saturating_add(1);
        recorded.push(ExploredTrace { len: path.marks.len(), marks: path.marks });
    };

    let mut next: Vec<Path> = Vec::new();
    for &(t, event) in tt.events() {
        let d = t - prev_time;
        prev_time = t;
        next.clear();
        for mut path in frontier.drain(..) {
            let loc = path.state.location;
            // Conditions 3.1/4.1 look at the pre-delay valuation: inclusive
            // of the boundary before an input, strictly below it before an
            // output. The valuation then advances in place; successor resets
            // copy on demand.
            let output_before = g.output_possible_within(
                loc,
                &path.state.valuation,
                d,
                event.is_input(),
            );
            path.state.valuation.delay_in_place(d);
            let delayed = &path.state.valuation;
            match event.kind {
                crate::ta::ActionKind::Input => {
                    let mut enabled: Vec<usize> = Vec::new();
                    // Distinct successor states decide branching and marking;
                    // several edges into the same state count once.
                    let mut distinct: Vec<(usize, TtsState)> = Vec::new();
                    for idx in g.outgoing_range(loc) {
                        let e = &g.edges()[idx];
                        if e.action == event && e.guard.satisfied_by(delayed) {
                            enabled.push(idx);
                            let succ =
                                TtsState { location: e.target, valuation: delayed.reset(e.resets) };
                            if !distinct.iter().any(|(_, s)| s == &succ) {
                                distinct.push((idx, succ));
                            }
                        }
                    }
                    let mark = output_before || distinct.len() >= 2;
                    if mark {
                        for &idx in &enabled {
                            diag.edge_faults[idx] = diag.edge_faults[idx].saturating_add(1);
                        }
                    }
                    if distinct.is_empty() {
                        // Implicit self-loop: stay put, already delayed.
                        path.marks.push(mark);
                        next.push(path);
                    } else {
                        // The path moves into one branch; clones only for
                        // extra successors (branching is the rare case).
                        let mut iter = distinct.into_iter();
                        let (head_idx, head_succ) = iter.next().expect("non-empty");
                        for (idx, succ) in iter {
                            let mut p = path.clone();
                            p.state = succ;
                            p.marks.push(mark);
                            p.edges.push(idx);
                            next.push(p);
                        }
                        path.state = head_succ;
                        path.marks.push(mark);
                        path.edges.push(head_idx);
                        next.push(path);
                    }
                }
                crate::ta::ActionKind::Output => {
                    let mut successor: Option<(usize, TtsState)> = None;
                    let mut killed = output_before;
                    for idx in g.outgoing_range(loc) {
                        if killed {
                            break;
                        }
                        let e = &g.edges()[idx];
                        if !e.guard.satisfied_by(delayed) {
                            continue;
                        }
                        if e.action == event {
                            let succ =
                                TtsState { location: e.target, valuation: delayed.reset(e.resets) };
                            match &successor {
                                Some((_, existing)) if *existing != succ => killed = true,
                                Some(_) => {}
                                None => successor = Some((idx, succ)),
                            }
                        } else if e.action.is_output() {
                            // A different output is enabled at this moment.
                            killed = true;
                        }
                    }
                    match (killed, successor) {
                        (false, Some((idx, succ))) => {
                            path.state = succ;
                            path.marks.push(false);
                            path.edges.push(idx);
                            next.push(path);
                        }
                        // Killed, or the output is simply not enabled: the
                        // explored prefix ends here either way.
                        _ => terminate(path, diag),
                    }
                }
            }
        }
        // Identical (state, marks) pairs explore identically from here on;
        // keep one. Then cap the frontier in canonical order.
        if next.len() > 1 {
            next.sort();
            next.dedup_by(|a, b| a.state == b.state && a.marks == b.marks);
            next.truncate(state_cap);
        }
        std::mem::swap(&mut frontier, &mut next);
        if frontier.is_empty() {
            break;
        }
    }

    for path in frontier {
        recorded.push(ExploredTrace { len: path.marks.len(), marks: path.marks });
    }
    recorded.sort();
    recorded.dedup();
    SimResult { reference: tt, traces: recorded }
}

/// PASS iff exploration stayed on a single path that reproduced the whole
/// trace; NONDET iff a full reproduction exists among several explored
/// prefixes; FAIL otherwise.
///
/// Marks deliberately do not influence the verdict: they already reduce the
/// deterministic-step reward and steer operator bias. Folding them into the
/// verdict demotes a candidate from PASS to NONDET on traces it fully
/// reproduces the moment it gains a correct new output edge, which digs a
/// fitness valley right where the search must grow and reliably stalls it.
pub fn verdict(sr: &SimResult) -> Verdict {
    let full = sr.reference.len();
    let any_full = sr.traces.iter().any(|t| t.len == full);
    if any_full && sr.traces.len() == 1 {
        Verdict::Pass
    } else if any_full {
        Verdict::Nondet
    } else {
        Verdict::Fail
    }
}

/// `steps`: maximum number of unmarked inputs over the explored prefixes.
/// `outs`: outputs along the longest explored prefix. `size`: edge count.
pub fn metrics(sr: &SimResult, g: &TimedAutomaton) -> (usize, usize, usize) {
    let events = sr.reference.events();
    let steps = sr
        .traces
        .iter()
        .map(|t| {
            t.marks
                .iter()
                .zip(events)
                .filter(|(&m, (_, a))| !m && a.is_input())
                .count()
        })
        .max()
        .unwrap_or(0);
    let longest = sr.traces.iter().map(|t| t.len).max().unwrap_or(0);
    let outs = events[..longest].iter().filter(|(_, a)| a.is_output()).count();
    (steps, outs, g.size())
}

/// Weights of the fitness function, in fitness units.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct FitnessWeights {
    pub w_pass: f64,
    pub w_nondet: f64,
    pub w_fail: f64,
    pub w_steps: f64,
    pub w_out: f64,
    pub w_size: f64,
}

impl FitnessWeights {
    pub fn of(&self, v: Verdict) -> f64 {
        match v {
            Verdict::Pass => self.w_pass,
            Verdict::Nondet => self.w_nondet,
            Verdict::Fail => self.w_fail,
        }
    }

    /// The size penalty must be positive; otherwise a tree of the traces
    /// themselves would be an acceptable solution.
    pub fn validate(&self) -> Result<(), String> {
        if self.w_size <= 0.0 {
            return Err(format!("w_size must be positive, got {}", self.w_size));
        }
        Ok(())
    }
}

/// Default weight scheme: `w_fail = 0`, `w_steps = w_size = w_out / 2`,
/// `w_pass = k * w_out / p_test` (`1/p_test` is the mean test-sequence
/// length), `w_nondet = w_pass / 2`.
pub fn default_weights(p_test: f64, w_out: f64, k: u32) -> FitnessWeights {
    assert!(p_test > 0.0 && p_test < 1.0, "p_test must lie in (0,1)");
    let w_steps = w_out / 2.0;
    let w_pass = k as f64 * w_out / p_test;
    FitnessWeights { w_pass, w_nondet: w_pass / 2.0, w_fail: 0.0, w_steps, w_out, w_size: w_steps }
}

/// A full evaluation of one candidate on a trace collection.
#[derive(Clone, Debug)]
pub struct FitnessEval {
    pub value: f64,
    pub verdicts: Vec<Verdict>,
    pub diagnostics: Diagnostics,
}

/// Evaluates `g` on every trace: the sum of per-trace verdict, step and
/// output rewards, minus the size penalty. Per-trace verdicts feed the
/// failing-trace subset; diagnostics feed operator bias.
pub fn fitness(
    g: &TimedAutomaton,
    traces: &TraceSet,
    w: &FitnessWeights,
    state_cap: usize,
) -> FitnessEval {
    assert!(!traces.traces.is_empty(), "fitness needs at least one trace");
    let mut diag = Diagnostics::new(g);
    let mut value = 0.0;
    let mut verdicts = Vec::with_capacity(traces.traces.len());
    for tt in &traces.traces {
        let sr = simulate_with_diagnostics(g, tt, state_cap, &mut diag);
        let v = verdict(&sr);
        let (steps, outs, _) = metrics(&sr, g);
        value += w.of(v) + w.w_steps * steps as f64 + w.w_out * outs as f64;
        verdicts.push(v);
    }
    value -= w.w_size * g.size() as f64;
    diag.finalize(g);
    FitnessEval { value, verdicts, diagnostics: diag }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{build_train_ta, TRAIN_CMAX};
    use crate::rng::StreamSeed;
    use crate::ta::{Action, Alphabet, ClockConstraint, Edge, Guard, RelOp, ResetSet};
    use crate::traces::{execute_on_sut, generate_test_sequence, TestSequence, TraceGenConfig};

    const CAP: usize = 64;

    fn train_trace(inputs: &[(u64, &str)], horizon: u64) -> TimedTrace {
        let train = build_train_ta();
        let ts = TestSequence::new(
            inputs
                .iter()
                .map(|&(t, name)| (Time::from_units(t), train.alphabet().lookup(name).unwrap()))
                .collect(),
        );
        execute_on_sut(&train, &ts, Time::from_units(horizon)).unwrap()
    }

    #[test]
    fn sut_simulates_its_own_trace_cleanly() {
        let train = build_train_ta();
        let tt = train_trace(&[(0, "start?"), (7, "stop?"), (9, "go?")], 15);
        let sr = simulate(&train, &tt, CAP);
        assert_eq!(sr.traces.len(), 1);
        assert_eq!(sr.traces[0].len, tt.len());
        assert!(!sr.traces[0].has_marks());
        assert_eq!(verdict(&sr), Verdict::Pass);
        let (steps, outs, size) = metrics(&sr, &train);
        assert_eq!((steps, outs, size), (3, 3, 7));
    }

    /// Retargeting the `enter!` edge of location 2 back to the initial
    /// location loses the following `leave!`.
    fn broken_train() -> TimedAutomaton {
        let train = build_train_ta();
        let mut edges = train.edges().to_vec();
        let enter = train.alphabet().lookup("enter!").unwrap();
        let e = edges.iter_mut().find(|e| e.source == 2 && e.action == enter).unwrap();
        e.target = 0;
        TimedAutomaton::new(
            train.alphabet().clone(),
            train.n_clocks(),
            train.n_locations(),
            train.initial(),
            edges,
        )
        .unwrap()
    }

    #[test]
    fn missing_output_fails_with_longest_prefix() {
        let g = broken_train();
        let tt = train_trace(&[(0, "start?")], TRAIN_CMAX);
        // Reference: 0 start?, 5 appr!, 15 enter!, 18 leave!
        assert_eq!(tt.len(), 4);
        let sr = simulate(&g, &tt, CAP);
        assert_eq!(verdict(&sr), Verdict::Fail);
        assert_eq!(sr.traces.iter().map(|t| t.len).max(), Some(3));
        let (steps, outs, _) = metrics(&sr, &g);
        assert_eq!((steps, outs), (1, 2));
    }

    #[test]
    fn branching_input_marks_and_goes_nondet() {
        let alphabet = Alphabet::new(vec!["i".into()], vec!["o".into()]).unwrap();
        let i = Action::input(0);
        let o = Action::output(0);
        let ge1 = Guard::new(vec![ClockConstraint { clock: 0, op: RelOp::Ge, bound: 1 }]);
        let g = crate::ta::TimedAutomaton::new(
            alphabet.clone(),
            1,
            3,
            0,
            vec![
                Edge { source: 0, action: i, guard: Guard::TRUE, resets: ResetSet::EMPTY, target: 1 },
                Edge { source: 0, action: i, guard: Guard::TRUE, resets: ResetSet::EMPTY, target: 2 },
                Edge { source: 1, action: o, guard: ge1, resets: ResetSet::EMPTY, target: 1 },
            ],
        )
        .unwrap();
        let tt = TimedTrace::new(vec![(Time::ZERO, i), (Time::from_units(1), o)]);
        let sr = simulate(&g, &tt, CAP);
        assert_eq!(sr.traces.len(), 2);
        assert!(sr.traces.iter().all(|t| t.marks[0]));
        assert!(sr.traces.iter().any(|t| t.len == 2));
        assert_eq!(verdict(&sr), Verdict::Nondet);
        // The single marked input makes zero deterministic steps.
        let (steps, outs, _) = metrics(&sr, &g);
        assert_eq!((steps, outs), (0, 1));
    }

    #[test]
    fn pending_output_marks_the_input_but_keeps_the_verdict() {
        // One path, full length, but an output was possible while delaying
        // to the input: the mark zeroes the step reward, while the verdict
        // stays PASS (a single full reproduction).
        let alphabet = Alphabet::new(vec!["i".into()], vec!["o".into()]).unwrap();
        let i = Action::input(0);
        let g = crate::ta::TimedAutomaton::new(
            alphabet,
            1,
            2,
            0,
            vec![
                Edge { source: 0, action: i, guard: Guard::TRUE, resets: ResetSet::EMPTY, target: 1 },
                Edge {
                    source: 0,
                    action: Action::output(0),
                    guard: Guard::TRUE,
                    resets: ResetSet::EMPTY,
                    target: 0,
                },
            ],
        )
        .unwrap();
        let tt = TimedTrace::new(vec![(Time::from_units(2), i)]);
        let sr = simulate(&g, &tt, CAP);
        assert_eq!(sr.traces.len(), 1);
        assert!(sr.traces[0].has_marks());
        assert_eq!(verdict(&sr), Verdict::Pass);
        let (steps, outs, _) = metrics(&sr, &g);
        assert_eq!((steps, outs), (0, 0));
    }

    #[test]
    fn empty_prefix_only_is_fail_with_zero_metrics() {
        let alphabet = Alphabet::new(vec!["i".into()], vec!["o".into()]).unwrap();
        let g = crate::ta::TimedAutomaton::new(
            alphabet,
            1,
            1,
            0,
            vec![Edge {
                source: 0,
                action: Action::input(0),
                guard: Guard::TRUE,
                resets: ResetSet::from_iter([0]),
                target: 0,
            }],
        )
        .unwrap();
        let tt = TimedTrace::new(vec![(Time::from_units(1), Action::output(0))]);
        let sr = simulate(&g, &tt, CAP);
        assert_eq!(sr.traces, vec![ExploredTrace { len: 0, marks: vec![] }]);
        assert_eq!(verdict(&sr), Verdict::Fail);
        let (steps, outs, size) = metrics(&sr, &g);
        assert_eq!((steps, outs, size), (0, 0, 1));

        let set = TraceSet { alphabet: g.alphabet().clone(), traces: vec![tt] };
        let w = default_weights(0.15, 0.25, 4);
        let eval = fitness(&g, &set, &w, CAP);
        assert!(eval.value < 0.0);
        assert!((eval.value + w.w_size).abs() < 1e-12);
    }

    #[test]
    fn fitness_arithmetic_matches_the_weight_scheme() {
        let train = build_train_ta();
        // Hand-built passing trace with 3 inputs and 2 outputs.
        let al = train.alphabet();
        let tt = TimedTrace::new(vec![
            (Time::ZERO, al.lookup("start?").unwrap()),
            (Time::from_units(5), al.lookup("appr!").unwrap()),
            (Time::from_units(7), al.lookup("stop?").unwrap()),
            (Time::from_units(9), al.lookup("go?").unwrap()),
            (Time::from_units(16), al.lookup("enter!").unwrap()),
        ]);
        let set = TraceSet { alphabet: al.clone(), traces: vec![tt] };
        let w = default_weights(0.15, 0.25, 4);
        let eval = fitness(&train, &set, &w, CAP);
        assert_eq!(eval.verdicts, vec![Verdict::Pass]);
        // w_pass + 3*0.125 + 2*0.25 - 7*0.125 == w_pass
        assert!((eval.value - w.w_pass).abs() < 1e-9, "{}", eval.value);
    }

    #[test]
    fn default_weights_follow_the_formulas() {
        let w = default_weights(0.15, 0.25, 4);
        assert!((w.w_pass - 20.0 / 3.0).abs() < 1e-9);
        assert_eq!(w.w_nondet, w.w_pass / 2.0);
        assert_eq!(w.w_steps, 0.125);
        assert_eq!(w.w_size, 0.125);
        assert_eq!(w.w_fail, 0.0);
        assert_eq!(w.w_out, 0.25);

        let degenerate = default_weights(0.5, 0.25, 0);
        assert_eq!(degenerate.w_pass, 0.0);
        assert_eq!(degenerate.w_nondet, 0.0);
    }

    #[test]
    fn unreachable_edge_costs_exactly_the_size_weight() {
        let train = build_train_ta();
        let mut edges = train.edges().to_vec();
        edges.push(Edge {
            source: 6,
            action: Action::input(0),
            guard: Guard::TRUE,
            resets: ResetSet::EMPTY,
            target: 6,
        });
        let padded = TimedAutomaton::new(
            train.alphabet().clone(),
            1,
            7,
            0,
            edges,
        )
        .unwrap();
        let cfg = TraceGenConfig::for_sut(&train, 0.15, TRAIN_CMAX);
        let set =
            crate::traces::generate_training_set(&train, &cfg, 100, StreamSeed::new(4)).unwrap();
        let w = default_weights(0.15, 0.25, 4);
        let base = fitness(&train, &set, &w, CAP);
        let bloated = fitness(&padded, &set, &w, CAP);
        assert_eq!(base.verdicts, bloated.verdicts);
        assert!(bloated.value < base.value);
        assert!((base.value - bloated.value - w.w_size).abs() < 1e-9);
    }

    #[test]
    fn deterministic_candidates_explore_single_paths() {
        // A well-formed automaton explores exactly one path on any trace,
        // also on traces from an unrelated system.
        let train = build_train_ta();
        let g = broken_train();
        let cfg = TraceGenConfig::for_sut(&train, 0.2, TRAIN_CMAX);
        let mut rng = StreamSeed::new(21).rng();
        for _ in 0..300 {
            let ts = generate_test_sequence(&cfg, train.alphabet(), &mut rng);
            let tt = execute_on_sut(&train, &ts, cfg.horizon_after_last_input).unwrap();
            let sr = simulate(&g, &tt, CAP);
            assert_eq!(sr.traces.len(), 1, "{tt:?}");
        }
    }

    #[test]
    fn appending_a_failing_suffix_never_raises_metrics() {
        let train = build_train_ta();
        let g = broken_train();
        let cfg = TraceGenConfig::for_sut(&train, 0.25, TRAIN_CMAX);
        let mut rng = StreamSeed::new(8).rng();
        let bogus = train.alphabet().lookup("leave!").unwrap();
        for _ in 0..200 {
            let ts = generate_test_sequence(&cfg, train.alphabet(), &mut rng);
            let tt = execute_on_sut(&train, &ts, cfg.horizon_after_last_input).unwrap();
            let last = tt.events().last().map(|&(t, _)| t).unwrap_or(Time::ZERO);
            // 100 units after the last event every guard constant (<= 10) has
            // long passed, so the appended output either is not enabled or
            // was enabled strictly earlier; the suffix always fails.
            let mut extended = tt.events().to_vec();
            extended.push((last + Time::from_units(100), bogus));
            let longer = TimedTrace::new(extended);

            let (s1, o1, _) = metrics(&simulate(&g, &tt, CAP), &g);
            let (s2, o2, _) = metrics(&simulate(&g, &longer, CAP), &g);
            assert!(s2 <= s1, "steps grew from {s1} to {s2}");
            assert!(o2 <= o1, "outs grew from {o1} to {o2}");
        }
    }

    #[test]
    fn diagnostics_blame_the_killed_path() {
        let g = broken_train();
        let tt = train_trace(&[(0, "start?")], TRAIN_CMAX);
        let set = TraceSet { alphabet: g.alphabet().clone(), traces: vec![tt] };
        let w = default_weights(0.15, 0.25, 4);
        let eval = fitness(&g, &set, &w, CAP);
        assert_eq!(eval.verdicts, vec![Verdict::Fail]);
        // Every edge on the failed path is blamed, including the retargeted
        // enter! edge; the termination location (back at 0) is weighted.
        let enter = g.alphabet().lookup("enter!").unwrap();
        let enter_idx = g.edges().iter().position(|e| e.source == 2 && e.action == enter).unwrap();
        assert!(eval.diagnostics.edge_faults[enter_idx] >= 1);
        assert!(eval.diagnostics.loc_faults[0] >= 1);
    }
}
