//! Parent selection: truncation once per generation, then probabilistic
//! tournaments over the surviving pool.
//!
//! A tournament draws `n_t` candidates uniformly with replacement, orders
//! them best-first, and picks rank `i` (1-based) with probability
//! `p_t * (1 - p_t)^(i-1)`, the last rank absorbing the remainder.

use super::Candidate;
use crate::rng::Rng;
use rand::Rng as _;
use std::cmp::Ordering;

/// Total order on evaluated candidates: higher fitness first, then fewer
/// edges, then canonical structure, then mutation strength. Ties beyond that
/// are impossible for distinct candidates up to exact duplication.
pub fn candidate_order(a: &Candidate, b: &Candidate) -> Ordering {
    let fa = a.fitness().expect("ordering needs evaluated candidates");
    let fb = b.fitness().expect("ordering needs evaluated candidates");
    fb.total_cmp(&fa)
        .then_with(|| a.ta.size().cmp(&b.ta.size()))
        .then_with(|| a.ta.cmp(&b.ta))
        .then_with(|| a.p_mut.total_cmp(&b.p_mut))
}

/// Survivors of truncation, best first: the `n_pop - n_sel` worst-performing
/// non-migrated candidates are dropped; migrated candidates are never
/// dropped.
pub fn truncated_pool<'a>(
    population: impl IntoIterator<Item = &'a Candidate>,
    n_pop: usize,
    n_sel: usize,
) -> Vec<&'a Candidate> {
    let mut pool: Vec<&Candidate> = population.into_iter().collect();
    pool.sort_by(|a, b| candidate_order(a, b));
    let mut to_drop = n_pop.saturating_sub(n_sel);
    let mut keep = vec![true; pool.len()];
    for i in (0..pool.len()).rev() {
        if to_drop == 0 {
            break;
        }
        if !pool[i].migrated {
            keep[i] = false;
            to_drop -= 1;
        }
    }
    pool.into_iter().zip(keep).filter_map(|(c, k)| k.then_some(c)).collect()
}

/// 0-based rank chosen by the probabilistic tournament.
pub fn tournament_rank(rng: &mut Rng, n_t: usize, p_t: f64) -> usize {
    for rank in 0..n_t.saturating_sub(1) {
        if rng.gen_bool(p_t) {
            return rank;
        }
    }
    n_t - 1
}

/// Tournament selection over a pool of evaluated candidates; returns a pool
/// index.
///
/// The drawn participants are ordered by fitness only, stably, so candidates
/// with equal fitness rank in draw order. Breaking ties structurally instead
/// would purge every neutral variant of the current best from the gene pool
/// and freeze the search on plateaus; the seeded draw keeps runs
/// reproducible.
pub fn select(pool: &[&Candidate], n_t: usize, p_t: f64, rng: &mut Rng) -> usize {
    assert!(!pool.is_empty(), "selection pool must be non-empty");
    let mut drawn: Vec<usize> = (0..n_t).map(|_| rng.gen_range(0..pool.len())).collect();
    drawn.sort_by(|&a, &b| {
        let fa = pool[a].fitness().expect("ordering needs evaluated candidates");
        let fb = pool[b].fitness().expect("ordering needs evaluated candidates");
        fb.total_cmp(&fa)
    });
    drawn[tournament_rank(rng, n_t, p_t)]
}
