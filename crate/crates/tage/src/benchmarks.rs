//! Built-in systems under test, the random-system generator, and the
//! train/test experiment runner.

use crate::evolution::{evolve, EvolutionConfig, EvolveError, GenerationRecord, RunReport};
use crate::fitness::{simulate, verdict, Verdict};
use crate::rng::{Rng, StreamSeed};
use crate::ta::{
    check_well_formed, Action, Alphabet, ClockConstraint, Edge, Guard, RelOp, ResetSet,
    TimedAutomaton,
};
use crate::traces::{generate_training_set, TraceError, TraceGenConfig, TraceSet};
use rand::Rng as _;
use std::fmt;

/// The six-location train controller: started trains approach after 5 time
/// units, enter after 10 (or 7 when restarted with go? after a stop?), and
/// leave 3 time units later.
pub fn build_train_ta() -> TimedAutomaton {
    let alphabet = Alphabet::new(
        vec!["start".into(), "stop".into(), "go".into()],
        vec!["appr".into(), "enter".into(), "leave".into()],
    )
    .unwrap();
    let act = |name: &str| alphabet.lookup(name).unwrap();
    let ge = |bound| Guard::new(vec![ClockConstraint { clock: 0, op: RelOp::Ge, bound }]);
    let reset = ResetSet::from_iter([0]);
    let edge = |source, action: Action, guard, resets, target| Edge {
        source,
        action,
        guard,
        resets,
        target,
    };
    let edges = vec![
        edge(0, act("start?"), Guard::TRUE, reset, 1),
        edge(1, act("appr!"), ge(5), reset, 2),
        edge(2, act("stop?"), Guard::TRUE, reset, 3),
        edge(2, act("enter!"), ge(10), reset, 5),
        edge(3, act("go?"), Guard::TRUE, reset, 4),
        edge(4, act("enter!"), ge(7), reset, 5),
        edge(5, act("leave!"), ge(3), ResetSet::EMPTY, 0),
    ];
    TimedAutomaton::new(alphabet, 1, 6, 0, edges).unwrap()
}

/// Largest guard constant of the train model; its natural `c_max`.
pub const TRAIN_CMAX: u64 = 10;

/// Shape of a randomly generated system under test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RandomSutSpec {
    pub n_locations: usize,
    pub n_clocks: usize,
    pub n_inputs: usize,
    pub n_outputs: usize,
    pub c_max: u64,
    pub seed: u64,
}

impl RandomSutSpec {
    /// Category presets: `C15/1`, `C20/1`, `C6/2`, `C10/2` — locations/clocks
    /// with a 5+5 alphabet for the one-clock and 4+4 for the two-clock
    /// categories, all with `c_max = 15`.
    pub fn category(name: &str, seed: u64) -> Option<RandomSutSpec> {
        let (n_locations, n_clocks, n_inputs, n_outputs) = match name {
            "C15/1" => (15, 1, 5, 5),
            "C20/1" => (20, 1, 5, 5),
            "C6/2" => (6, 2, 4, 4),
            "C10/2" => (10, 2, 4, 4),
            _ => return None,
        };
        Some(RandomSutSpec { n_locations, n_clocks, n_inputs, n_outputs, c_max: 15, seed })
    }
}

const SUT_ATTEMPT_BUDGET: usize = 10_000;
/// Probe used to accept a candidate system: of this many random sequences,
/// at least [`PROBE_PASS`] must produce an output.
const PROBE_SEQUENCES: usize = 50;
const PROBE_PASS: usize = 40;

#[derive(Debug)]
pub enum SutGenError {
    /// No acceptable system within the attempt budget.
    BudgetExhausted,
}

impl fmt::Display for SutGenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SutGenError::BudgetExhausted => write!(
                f,
                "no well-formed random system with reachable outputs found in \
                 {SUT_ATTEMPT_BUDGET} attempts"
            ),
        }
    }
}

impl std::error::Error for SutGenError {}

/// Generates a random system under test satisfying all testability
/// assumptions: deterministic, isolated outputs, no strict output lower
/// bounds, connected, and with outputs that random test sequences actually
/// reach (verified by probing).
///
/// Construction is rejection sampling: a random spanning tree keeps every
/// location reachable, extra edges are sprinkled on top, and edges competing
/// at a location (same input label, or any two outputs) receive disjoint
/// clock-0 windows so determinism and output isolation hold by construction.
pub fn generate_random_sut(spec: &RandomSutSpec) -> Result<TimedAutomaton, SutGenError> {
    assert!(spec.n_locations >= 2 && spec.n_clocks >= 1 && spec.c_max >= 8);
    assert!(spec.n_inputs >= 1 && spec.n_outputs >= 1);
    let seed = StreamSeed::new(spec.seed);
    for attempt in 0..SUT_ATTEMPT_BUDGET {
        let mut rng = seed.child(attempt as u64).rng();
        let Some(sut) = attempt_sut(spec, &mut rng) else { continue };
        if !check_well_formed(&sut, spec.c_max).all_ok() {
            continue;
        }
        if probe_outputs(&sut, spec, seed.child(attempt as u64 ^ 0x5150)) {
            return Ok(sut);
        }
    }
    Err(SutGenError::BudgetExhausted)
}

fn attempt_sut(spec: &RandomSutSpec, rng: &mut Rng) -> Option<TimedAutomaton> {
    let alphabet = Alphabet::new(
        (0..spec.n_inputs).map(|i| format!("i{i}")).collect(),
        (0..spec.n_outputs).map(|o| format!("o{o}")).collect(),
    )
    .unwrap();
    let uniform_action = |rng: &mut Rng| {
        let idx = rng.gen_range(0..alphabet.len());
        if idx < spec.n_inputs {
            Action::input(idx)
        } else {
            Action::output(idx - spec.n_inputs)
        }
    };
    let random_resets = |rng: &mut Rng| {
        ResetSet::from_iter((0..spec.n_clocks).filter(|_| rng.gen_bool(0.5)))
    };

    // Skeleton: spanning tree from the initial location, plus extra edges up
    // to roughly twice the location count.
    let mut skeleton: Vec<(usize, Action, ResetSet, usize)> = Vec::new();
    for l in 1..spec.n_locations {
        let parent = rng.gen_range(0..l);
        skeleton.push((parent, uniform_action(rng), random_resets(rng), l));
    }
    for _ in 0..spec.n_locations {
        let source = rng.gen_range(0..spec.n_locations);
        let target = rng.gen_range(0..spec.n_locations);
        skeleton.push((source, uniform_action(rng), random_resets(rng), target));
    }

    // Guards: competing edges at one location get disjoint clock-0 windows.
    // Two edges compete if they share an input label or are both outputs.
    let mut edges: Vec<Edge> = Vec::with_capacity(skeleton.len());
    for l in 0..spec.n_locations {
        let mine: Vec<usize> =
            (0..skeleton.len()).filter(|&i| skeleton[i].0 == l).collect();
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for &i in &mine {
            let action = skeleton[i].1;
            let found = groups.iter_mut().find(|g| {
                let other = skeleton[g[0]].1;
                if action.is_output() {
                    other.is_output()
                } else {
                    other == action
                }
            });
            match found {
                Some(g) => g.push(i),
                None => groups.push(vec![i]),
            }
        }
        for group in groups {
            let guards = group_guards(spec, group.len(), skeleton[group[0]].1, rng)?;
            for (&i, guard) in group.iter().zip(guards) {
                let (source, action, resets, target) = skeleton[i];
                edges.push(Edge { source, action, guard, resets, target });
            }
        }
    }

    Some(
        TimedAutomaton::new(alphabet, spec.n_clocks, spec.n_locations, 0, edges)
            .expect("construction is structurally valid"),
    )
}

/// Guards for a group of competing edges: singletons draw a free-form guard,
/// larger groups split `[0, c_max]` into disjoint closed clock-0 windows.
fn group_guards(
    spec: &RandomSutSpec,
    group_len: usize,
    action: Action,
    rng: &mut Rng,
) -> Option<Vec<Guard>> {
    if group_len == 1 {
        let guard = if rng.gen_bool(0.5) {
            Guard::TRUE
        } else {
            let clock = rng.gen_range(0..spec.n_clocks);
            let bound = rng.gen_range(0..=spec.c_max);
            let op = if action.is_output() || rng.gen_bool(0.5) { RelOp::Ge } else { RelOp::Gt };
            let mut atoms = vec![ClockConstraint { clock, op, bound }];
            if rng.gen_bool(0.3) {
                let upper = rng.gen_range(bound..=spec.c_max + 3);
                atoms.push(ClockConstraint { clock, op: RelOp::Le, bound: upper });
            }
            Guard::new(atoms)
        };
        return Some(vec![guard]);
    }
    let needed = 2 * group_len;
    if needed as u64 > spec.c_max + 1 {
        return None;
    }
    // Distinct sorted cut points over [0, c_max]; consecutive pairs become
    // closed windows, disjoint as real intervals.
    let mut cuts: Vec<u64> = Vec::with_capacity(needed);
    while cuts.len() < needed {
        let v = rng.gen_range(0..=spec.c_max);
        if !cuts.contains(&v) {
            cuts.push(v);
        }
    }
    cuts.sort_unstable();
    let guards = (0..group_len)
        .map(|i| {
            Guard::new(vec![
                ClockConstraint { clock: 0, op: RelOp::Ge, bound: cuts[2 * i] },
                ClockConstraint { clock: 0, op: RelOp::Le, bound: cuts[2 * i + 1] },
            ])
        })
        .collect();
    Some(guards)
}

/// Accepts a candidate system if random test sequences reliably trigger
/// outputs; guards the training generator's rejection sampling.
fn probe_outputs(sut: &TimedAutomaton, spec: &RandomSutSpec, seed: StreamSeed) -> bool {
    let cfg = TraceGenConfig::for_sut(sut, 0.15, spec.c_max);
    let mut rng = seed.rng();
    let mut hits = 0;
    for _ in 0..PROBE_SEQUENCES {
        let ts = crate::traces::generate_test_sequence(&cfg, sut.alphabet(), &mut rng);
        match crate::traces::execute_on_sut(sut, &ts, cfg.horizon_after_last_input) {
            Ok(tt) if tt.output_count() >= 1 => hits += 1,
            Ok(_) => {}
            Err(_) => return false,
        }
    }
    hits >= PROBE_PASS
}

/// Outcome of one train/test experiment.
#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub training_errors: usize,
    pub test_errors: usize,
    pub generations: usize,
    pub wall: std::time::Duration,
    pub learned: TimedAutomaton,
    pub run: RunReport,
}

#[derive(Debug)]
pub enum ExperimentError {
    Trace(TraceError),
    Evolve(EvolveError),
}

impl fmt::Display for ExperimentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExperimentError::Trace(e) => write!(f, "trace generation failed: {e}"),
            ExperimentError::Evolve(e) => write!(f, "search failed: {e}"),
        }
    }
}

impl std::error::Error for ExperimentError {}

impl From<TraceError> for ExperimentError {
    fn from(e: TraceError) -> Self {
        ExperimentError::Trace(e)
    }
}

impl From<EvolveError> for ExperimentError {
    fn from(e: EvolveError) -> Self {
        ExperimentError::Evolve(e)
    }
}

/// Stream tags separating the training and test corpora of a run; the CLI
/// derives its trace files the same way, so `gen` and `learn` agree.
pub const TAG_TRAINING_SET: u64 = 101;
pub const TAG_TEST_SET: u64 = 102;

/// Non-PASS count of `ta` over a trace set.
pub fn count_errors(ta: &TimedAutomaton, set: &TraceSet, state_cap: usize) -> usize {
    set.traces
        .iter()
        .filter(|tt| verdict(&simulate(ta, tt, state_cap)) != Verdict::Pass)
        .count()
}

/// Generates disjointly seeded training and test sets, learns from the
/// training set, and scores the learned automaton on both.
pub fn run_experiment(
    sut: &TimedAutomaton,
    cfg: &EvolutionConfig,
    trace_cfg: &TraceGenConfig,
    n_test: usize,
    progress: impl FnMut(&GenerationRecord) -> bool,
) -> Result<ExperimentReport, ExperimentError> {
    let seed = StreamSeed::new(cfg.seed);
    let training = generate_training_set(sut, trace_cfg, n_test, seed.child(TAG_TRAINING_SET))?;
    let test = generate_training_set(sut, trace_cfg, n_test, seed.child(TAG_TEST_SET))?;
    let (learned, run) = evolve(cfg, &training, progress)?;
    let training_errors = count_errors(&learned, &training, cfg.state_cap);
    let test_errors = count_errors(&learned, &test, cfg.state_cap);
    Ok(ExperimentReport {
        training_errors,
        test_errors,
        generations: run.generations,
        wall: run.wall,
        learned,
        run,
    })
}

/// `min / median, mean / max` summary over per-run values, matching the
/// measurement-table style.
pub fn spread_line(values: &[f64]) -> String {
    if values.is_empty() {
        return "-".to_string();
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let min = sorted[0];
    let max = sorted[sorted.len() - 1];
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    };
    let mean = sorted.iter().sum::<f64>() / sorted.len() as f64;
    format!("{min} / {median}, {mean:.1} / {max}")
}
