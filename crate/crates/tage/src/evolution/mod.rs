//! The genetic-programming engine.
//!
//! Two populations evolve simultaneously: a global one evaluated on all
//! training traces and a local one evaluated only on the subset the current
//! global champion does not pass. Each generation the fittest local
//! candidates that pass at least one of those traces migrate into the global
//! population; new candidates arise by iterated biased mutation or by
//! randomized-product crossover, parents chosen by truncation plus
//! probabilistic tournament selection. The best candidate of each population
//! survives unchanged (elitism), and every `g_simp` generations all
//! candidates are syntactically simplified.
//!
//! The search stops at `g_max` generations, or once the global champion
//! passes every training trace and has not changed for `g_change`
//! generations (the tail generations shrink the automaton).

mod crossover;
mod mutation;
mod random_ta;
mod selection;
mod working;

pub use crossover::crossover;
pub use mutation::mutate;
pub use random_ta::create_random_ta;
pub use selection::{candidate_order, select, tournament_rank, truncated_pool};

use crate::fitness::{
    default_weights, fitness, simulate, verdict, FitnessEval, FitnessWeights, Verdict,
};
use crate::rng::StreamSeed;
use crate::ta::{simplify, TimedAutomaton};
use crate::traces::TraceSet;
use rayon::prelude::*;
use std::fmt;
use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

const TAG_INIT_GLOBAL: u64 = 1;
const TAG_INIT_LOCAL: u64 = 2;
const TAG_OFFSPRING_GLOBAL: u64 = 3;
const TAG_OFFSPRING_LOCAL: u64 = 4;
const TAG_T_FAIL: u64 = 5;

/// A population member: an automaton plus its self-adaptive mutation
/// strength, cached evaluation, and migration flag.
#[derive(Clone, Debug)]
pub struct Candidate {
    pub ta: Arc<TimedAutomaton>,
    /// Stop probability of iterated mutation; always within [0.1, 0.9].
    pub p_mut: f64,
    pub eval: Option<FitnessEval>,
    pub migrated: bool,
}

impl Candidate {
    pub fn fresh(ta: TimedAutomaton, p_mut: f64) -> Candidate {
        Candidate {
            ta: Arc::new(ta),
            p_mut: p_mut.clamp(0.1, 0.9),
            eval: None,
            migrated: false,
        }
    }

    pub fn fitness(&self) -> Option<f64> {
        self.eval.as_ref().map(|e| e.value)
    }

    pub fn passes_all(&self) -> bool {
        self.eval
            .as_ref()
            .is_some_and(|e| e.verdicts.iter().all(|&v| v == Verdict::Pass))
    }
}

/// Search parameters; defaults follow the standard configuration.
#[derive(Clone, Debug)]
pub struct EvolutionConfig {
    pub n_pop: usize,
    pub g_max: usize,
    /// Generations the champion must stay unchanged (while passing all
    /// traces) before the search stops.
    pub g_change: usize,
    /// Generations between simplification sweeps; 0 disables them.
    pub g_simp: usize,
    pub p_cr: f64,
    pub p_mut_init: f64,
    pub n_sel_init: usize,
    pub n_t: usize,
    pub p_t: f64,
    pub n_clocks: usize,
    pub c_max: u64,
    pub state_cap: usize,
    pub seed: u64,
    pub weights: FitnessWeights,
    /// Geometric parameter for guard-atom counts in random edges.
    pub geo_guard: f64,
    /// Geometric parameter for reset-set sizes in random edges.
    pub geo_reset: f64,
}

impl EvolutionConfig {
    pub fn defaults(seed: u64) -> EvolutionConfig {
        let n_pop = 2000;
        EvolutionConfig {
            n_pop,
            g_max: 3000,
            g_change: 10,
            g_simp: 10,
            p_cr: 0.25,
            p_mut_init: 0.33,
            n_sel_init: n_pop / 10,
            n_t: 10,
            p_t: 0.5,
            n_clocks: 1,
            c_max: 10,
            state_cap: 64,
            seed,
            weights: default_weights(0.15, 0.25, 4),
            geo_guard: 0.7,
            geo_reset: 0.5,
        }
    }

    /// Migration quota: the top five per cent of the local population.
    pub fn n_mig(&self) -> usize {
        (5 * self.n_pop).div_ceil(100)
    }

    /// Truncation survivor count: ramps linearly from `n_sel_init` to the
    /// full population by generation 200, so late generations truncate
    /// nothing.
    pub fn n_sel_at(&self, generation: usize) -> usize {
        let span = self.n_pop.saturating_sub(self.n_sel_init);
        let grown = self.n_sel_init + (generation * span).div_ceil(200);
        grown.min(self.n_pop)
    }

    pub fn validate(&self) -> Result<(), EvolveError> {
        let bad = |what: &str| Err(EvolveError::BadConfig(what.to_string()));
        if self.n_pop == 0 {
            return bad("n_pop must be positive");
        }
        if self.n_sel_init == 0 || self.n_sel_init > self.n_pop {
            return bad("n_sel_init must lie in [1, n_pop]");
        }
        if !(0.0..=1.0).contains(&self.p_cr) {
            return bad("p_cr must lie in [0, 1]");
        }
        if !(0.0 < self.p_t && self.p_t <= 1.0) {
            return bad("p_t must lie in (0, 1]");
        }
        if self.n_t == 0 {
            return bad("n_t must be positive");
        }
        if !(0.0 < self.p_mut_init && self.p_mut_init < 1.0) {
            return bad("p_mut_init must lie in (0, 1)");
        }
        if self.n_clocks == 0 || self.n_clocks > 32 {
            return bad("n_clocks must lie in [1, 32]");
        }
        if self.c_max == 0 {
            return bad("c_max must be at least 1");
        }
        if self.state_cap == 0 {
            return bad("state_cap must be positive");
        }
        if !(0.0 < self.geo_guard && self.geo_guard <= 1.0)
            || !(0.0 < self.geo_reset && self.geo_reset <= 1.0)
        {
            return bad("geometric parameters must lie in (0, 1]");
        }
        self.weights.validate().map_err(EvolveError::BadConfig)?;
        Ok(())
    }
}

/// One progress record per generation.
#[derive(Clone, Debug)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best_global_fitness: f64,
    pub best_local_fitness: f64,
    pub t_fail_len: usize,
    /// Fraction of training traces the global champion passes.
    pub pass_rate: f64,
    pub wall_ms: u128,
}

impl GenerationRecord {
    /// Line-delimited form for logs and the CLI.
    pub fn line(&self) -> String {
        format!("{} wall_ms={}", self.deterministic_line(), self.wall_ms)
    }

    /// The seed-reproducible part (no wall-clock measurement).
    pub fn deterministic_line(&self) -> String {
        format!(
            "gen={} best_global={} best_local={} t_fail={} pass_rate={}",
            self.generation,
            self.best_global_fitness,
            self.best_local_fitness,
            self.t_fail_len,
            self.pass_rate
        )
    }
}

/// Result of one learning run.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub generations: usize,
    pub wall: std::time::Duration,
    pub final_fitness: f64,
    /// True iff the returned automaton passes every training trace.
    pub solved: bool,
    pub series: Vec<GenerationRecord>,
}

impl RunReport {
    /// Everything about the run that is reproducible from the seed; two runs
    /// with equal configuration and traces produce identical summaries.
    pub fn deterministic_summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "generations={}", self.generations);
        let _ = writeln!(out, "solved={}", self.solved);
        let _ = writeln!(out, "final_fitness={}", self.final_fitness);
        for rec in &self.series {
            let _ = writeln!(out, "{}", rec.deterministic_line());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvolveError {
    EmptyTraining,
    EmptyAlphabet,
    BadConfig(String),
}

impl fmt::Display for EvolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvolveError::EmptyTraining => write!(f, "training set is empty"),
            EvolveError::EmptyAlphabet => write!(f, "training alphabet is empty"),
            EvolveError::BadConfig(what) => write!(f, "bad configuration: {what}"),
        }
    }
}

impl std::error::Error for EvolveError {}

/// Runs the full search and returns the simplified champion with a report.
///
/// `progress` receives one record per generation; returning `false` stops
/// the search after the current generation (used to enforce wall-clock
/// budgets), returning the best candidate found so far.
pub fn evolve(
    cfg: &EvolutionConfig,
    training: &TraceSet,
    mut progress: impl FnMut(&GenerationRecord) -> bool,
) -> Result<(TimedAutomaton, RunReport), EvolveError> {
    cfg.validate()?;
    if training.traces.is_empty() {
        return Err(EvolveError::EmptyTraining);
    }
    if training.alphabet.is_empty() {
        return Err(EvolveError::EmptyAlphabet);
    }
    let start = Instant::now();
    let seed = StreamSeed::new(cfg.seed);
    let n_test = training.traces.len();
    let t_fail_min = n_test.div_ceil(100).max(1);

    let spawn_population = |tag: u64| -> Vec<Candidate> {
        (0..cfg.n_pop)
            .into_par_iter()
            .map(|slot| {
                let mut rng = seed.child(tag).child(slot as u64).rng();
                Candidate::fresh(
                    create_random_ta(cfg, &training.alphabet, &mut rng),
                    cfg.p_mut_init,
                )
            })
            .collect()
    };

    let mut global = spawn_population(TAG_INIT_GLOBAL);
    let mut local = spawn_population(TAG_INIT_LOCAL);

    evaluate_missing(&mut global, training, cfg);

    // The local population initially trains on a random trace subset; from
    // the next generation on it targets the champion's failing traces.
    let mut t_fail = {
        let mut rng = seed.child(TAG_T_FAIL).child(0).rng();
        sample_distinct(&mut rng, n_test, t_fail_min)
    };
    let mut local_set = subset(training, &t_fail);
    evaluate_missing(&mut local, &local_set, cfg);

    let mut best_global = best_of(&global).clone();
    let mut best_local = best_of(&local).clone();
    let mut previous_best: Option<(f64, Arc<TimedAutomaton>)> = None;
    let mut unchanged = 0usize;
    let mut series: Vec<GenerationRecord> = Vec::new();
    let mut generation = 0usize;

    loop {
        let best_fit = best_global.fitness().expect("evaluated");
        let pass_rate = best_global
            .eval
            .as_ref()
            .map(|e| {
                e.verdicts.iter().filter(|&&v| v == Verdict::Pass).count() as f64 / n_test as f64
            })
            .unwrap_or(0.0);
        let record = GenerationRecord {
            generation,
            best_global_fitness: best_fit,
            best_local_fitness: best_local.fitness().expect("evaluated"),
            t_fail_len: t_fail.len(),
            pass_rate,
            wall_ms: start.elapsed().as_millis(),
        };
        let keep_going = progress(&record);
        series.push(record);

        match &previous_best {
            Some((f, ta)) if *f == best_fit && **ta == *best_global.ta => unchanged += 1,
            _ => {
                unchanged = 0;
                previous_best = Some((best_fit, Arc::clone(&best_global.ta)));
            }
        }

        let solved = best_global.passes_all();
        if !keep_going || generation >= cfg.g_max || (solved && unchanged >= cfg.g_change) {
            break;
        }

        // Failing traces of the champion, padded to the minimum subset size.
        t_fail = {
            let verdicts = &best_global.eval.as_ref().expect("evaluated").verdicts;
            let mut rng = seed.child(TAG_T_FAIL).child(generation as u64 + 1).rng();
            recompute_t_fail(verdicts, t_fail_min, &mut rng)
        };
        local_set = subset(training, &t_fail);

        // Migration: fittest local candidates that pass at least one failing
        // trace join the global pool, with full-set fitness.
        let mut migrants: Vec<Candidate> = {
            let mut ranked: Vec<&Candidate> = local.iter().collect();
            ranked.sort_by(|a, b| candidate_order(a, b));
            ranked
                .into_iter()
                .take(cfg.n_mig())
                .filter(|c| {
                    t_fail.iter().any(|&i| {
                        verdict(&simulate(&c.ta, &training.traces[i], cfg.state_cap))
                            == Verdict::Pass
                    })
                })
                .map(|c| Candidate {
                    ta: Arc::clone(&c.ta),
                    p_mut: c.p_mut,
                    eval: None,
                    migrated: true,
                })
                .collect()
        };
        evaluate_missing(&mut migrants, training, cfg);

        let n_sel = cfg.n_sel_at(generation);
        let pool_global = truncated_pool(global.iter().chain(migrants.iter()), cfg.n_pop, n_sel);
        let pool_local = truncated_pool(local.iter(), cfg.n_pop, n_sel);


        let offspring_global: Vec<Candidate> = (0..cfg.n_pop)
            .into_par_iter()
            .map(|slot| {
                let mut rng = seed
                    .child(TAG_OFFSPRING_GLOBAL)
                    .child(generation as u64)
                    .child(slot as u64)
                    .rng();
                let u: f64 = rand::Rng::gen(&mut rng);
                if u < 1.0 - cfg.p_cr {
                    let parent =
                        pool_global[select(&pool_global, cfg.n_t, cfg.p_t, &mut rng)];
                    mutate(parent, cfg, &mut rng)
                } else if u < 1.0 - cfg.p_cr / 2.0 {
                    let (a, b) = two_parents(&pool_global, cfg, &mut rng);
                    crossover(a, b, cfg, &mut rng)
                } else {
                    let a = pool_global[select(&pool_global, cfg.n_t, cfg.p_t, &mut rng)];
                    let b = pool_local[select(&pool_local, cfg.n_t, cfg.p_t, &mut rng)];
                    crossover(a, b, cfg, &mut rng)
                }
            })
            .collect();
        let offspring_local: Vec<Candidate> = (0..cfg.n_pop)
            .into_par_iter()
            .map(|slot| {
                let mut rng = seed
                    .child(TAG_OFFSPRING_LOCAL)
                    .child(generation as u64)
                    .child(slot as u64)
                    .rng();
                let u: f64 = rand::Rng::gen(&mut rng);
                if u < 1.0 - cfg.p_cr {
                    let parent = pool_local[select(&pool_local, cfg.n_t, cfg.p_t, &mut rng)];
                    mutate(parent, cfg, &mut rng)
                } else {
                    let (a, b) = two_parents(&pool_local, cfg, &mut rng);
                    crossover(a, b, cfg, &mut rng)
                }
            })
            .collect();
        drop(pool_global);
        drop(pool_local);

        let mut next_global = offspring_global;
        next_global.append(&mut migrants);
        next_global.push(best_global.clone());
        let mut next_local = offspring_local;
        next_local.push(best_local.clone());
        assert!(next_global.len() <= cfg.n_pop + cfg.n_mig() + 1);
        assert_eq!(next_local.len(), cfg.n_pop + 1);

        generation += 1;
        if cfg.g_simp > 0 && generation.is_multiple_of(cfg.g_simp) {
            simplify_population(&mut next_global);
            simplify_population(&mut next_local);
        }

        evaluate_missing(&mut next_global, training, cfg);
        global = next_global;
        best_global = best_of(&global).clone();

        // The failing-trace subset changed, so local fitness is stale for
        // everyone, including the carried-over elite.
        for c in &mut next_local {
            c.eval = None;
        }
        evaluate_missing(&mut next_local, &local_set, cfg);
        local = next_local;
        best_local = best_of(&local).clone();
    }

    let final_fitness = best_global.fitness().expect("evaluated");
    let solved = best_global.passes_all();
    let learned = simplify(&best_global.ta);
    let report = RunReport {
        generations: generation,
        wall: start.elapsed(),
        final_fitness,
        solved,
        series,
    };
    Ok((learned, report))
}

fn evaluate_missing(pop: &mut [Candidate], set: &TraceSet, cfg: &EvolutionConfig) {
    pop.par_iter_mut().for_each(|c| {
        if c.eval.is_none() {
            c.eval = Some(fitness(&c.ta, set, &cfg.weights, cfg.state_cap));
        }
    });
}

fn best_of(pop: &[Candidate]) -> &Candidate {
    pop.iter().min_by(|a, b| candidate_order(a, b)).expect("population is never empty")
}

fn subset(training: &TraceSet, indices: &[usize]) -> TraceSet {
    TraceSet {
        alphabet: training.alphabet.clone(),
        traces: indices.iter().map(|&i| training.traces[i].clone()).collect(),
    }
}

/// `count` distinct indices from `0..n`, sorted.
fn sample_distinct(rng: &mut crate::rng::Rng, n: usize, count: usize) -> Vec<usize> {
    let mut all: Vec<usize> = (0..n).collect();
    let count = count.min(n);
    for j in 0..count {
        let swap = rand::Rng::gen_range(rng, j..n);
        all.swap(j, swap);
    }
    let mut picked = all[..count].to_vec();
    picked.sort_unstable();
    picked
}

fn recompute_t_fail(
    verdicts: &[Verdict],
    t_fail_min: usize,
    rng: &mut crate::rng::Rng,
) -> Vec<usize> {
    let mut failing: Vec<usize> =
        (0..verdicts.len()).filter(|&i| verdicts[i] != Verdict::Pass).collect();
    if failing.len() < t_fail_min {
        let mut passing: Vec<usize> =
            (0..verdicts.len()).filter(|&i| verdicts[i] == Verdict::Pass).collect();
        let need = (t_fail_min - failing.len()).min(passing.len());
        for j in 0..need {
            let swap = rand::Rng::gen_range(rng, j..passing.len());
            passing.swap(j, swap);
        }
        failing.extend_from_slice(&passing[..need]);
        failing.sort_unstable();
    }
    failing
}

/// Two tournament winners with distinct pool positions (crossover must not
/// select the same parent twice); gives up on distinctness after 20 redraws
/// in degenerate pools.
fn two_parents<'a>(
    pool: &[&'a Candidate],
    cfg: &EvolutionConfig,
    rng: &mut crate::rng::Rng,
) -> (&'a Candidate, &'a Candidate) {
    let first = select(pool, cfg.n_t, cfg.p_t, rng);
    let mut second = select(pool, cfg.n_t, cfg.p_t, rng);
    for _ in 0..20 {
        if second != first {
            break;
        }
        second = select(pool, cfg.n_t, cfg.p_t, rng);
    }
    (pool[first], pool[second])
}

fn simplify_population(pop: &mut [Candidate]) {
    pop.par_iter_mut().for_each(|c| {
        let simplified = simplify(&c.ta);
        if simplified != *c.ta {
            c.ta = Arc::new(simplified);
            c.eval = None;
        }
    });
}
