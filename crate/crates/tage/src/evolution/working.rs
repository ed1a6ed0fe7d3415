//! Mutable editing representation used while operators rewrite an automaton.
//!
//! Keeps fault counters aligned with edges and locations through structural
//! edits, so operator selection can stay biased towards blamed elements
//! across iterated mutation. Edges are re-canonicalized after every rewrite.

use crate::fitness::Diagnostics;
use crate::rng::Rng;
use crate::ta::{Alphabet, Edge, TimedAutomaton};
use rand::Rng as _;

pub(crate) struct WorkingTa {
    pub alphabet: Alphabet,
    pub n_clocks: usize,
    pub n_locations: usize,
    pub initial: usize,
    pub edges: Vec<Edge>,
    pub edge_faults: Vec<u32>,
    pub loc_faults: Vec<u32>,
}

impl WorkingTa {
    pub fn from_ta(ta: &TimedAutomaton, diag: Option<&Diagnostics>) -> WorkingTa {
        let edge_faults = match diag {
            Some(d) if d.edge_faults.len() == ta.size() => d.edge_faults.clone(),
            _ => vec![0; ta.size()],
        };
        let loc_faults = match diag {
            Some(d) if d.loc_faults.len() == ta.n_locations() => d.loc_faults.clone(),
            _ => vec![0; ta.n_locations()],
        };
        WorkingTa {
            alphabet: ta.alphabet().clone(),
            n_clocks: ta.n_clocks(),
            n_locations: ta.n_locations(),
            initial: ta.initial(),
            edges: ta.edges().to_vec(),
            edge_faults,
            loc_faults,
        }
    }

    pub fn seal(self) -> TimedAutomaton {
        TimedAutomaton::new(self.alphabet, self.n_clocks, self.n_locations, self.initial, self.edges)
            .expect("mutation operators preserve structural validity")
    }

    /// Re-sorts edges into canonical order, carrying fault counters along.
    pub fn canonicalize(&mut self) {
        let mut perm: Vec<usize> = (0..self.edges.len()).collect();
        perm.sort_by(|&a, &b| self.edges[a].sort_key().cmp(&self.edges[b].sort_key()));
        self.edges = perm.iter().map(|&i| self.edges[i].clone()).collect();
        self.edge_faults = perm.iter().map(|&i| self.edge_faults[i]).collect();
    }

    pub fn add_edge(&mut self, edge: Edge, fault: u32) {
        self.edges.push(edge);
        self.edge_faults.push(fault);
        self.canonicalize();
    }

    pub fn remove_edge(&mut self, idx: usize) -> (Edge, u32) {
        let e = self.edges.remove(idx);
        let f = self.edge_faults.remove(idx);
        (e, f)
    }

    pub fn add_location(&mut self) -> usize {
        self.n_locations += 1;
        self.loc_faults.push(0);
        self.n_locations - 1
    }

    /// Redirects every edge touching `gone` to `keep` and drops `gone`,
    /// renumbering the remaining locations densely.
    pub fn merge_locations(&mut self, keep: usize, gone: usize) {
        assert_ne!(keep, gone);
        for e in &mut self.edges {
            if e.source == gone {
                e.source = keep;
            }
            if e.target == gone {
                e.target = keep;
            }
        }
        self.loc_faults[keep] = self.loc_faults[keep].saturating_add(self.loc_faults[gone]);
        self.loc_faults.remove(gone);
        for e in &mut self.edges {
            if e.source > gone {
                e.source -= 1;
            }
            if e.target > gone {
                e.target -= 1;
            }
        }
        if self.initial == gone {
            self.initial = keep;
        }
        if self.initial > gone {
            self.initial -= 1;
        }
        self.n_locations -= 1;
        self.canonicalize();
    }

    /// Fault-weighted edge choice over the indices satisfying `pred`;
    /// weight is `1 + fault`.
    pub fn pick_edge_where(
        &self,
        rng: &mut Rng,
        pred: impl Fn(&Edge) -> bool,
    ) -> Option<usize> {
        let candidates: Vec<usize> =
            (0..self.edges.len()).filter(|&i| pred(&self.edges[i])).collect();
        if candidates.is_empty() {
            return None;
        }
        let weights: Vec<u64> =
            candidates.iter().map(|&i| 1 + self.edge_faults[i] as u64).collect();
        Some(candidates[weighted_pick(rng, &weights)])
    }

    pub fn pick_edge(&self, rng: &mut Rng) -> Option<usize> {
        self.pick_edge_where(rng, |_| true)
    }

    /// Fault-weighted location choice, optionally excluding one location.
    pub fn pick_location(&self, rng: &mut Rng, exclude: Option<usize>) -> Option<usize> {
        let candidates: Vec<usize> =
            (0..self.n_locations).filter(|&l| Some(l) != exclude).collect();
        if candidates.is_empty() {
            return None;
        }
        let weights: Vec<u64> =
            candidates.iter().map(|&l| 1 + self.loc_faults[l] as u64).collect();
        Some(candidates[weighted_pick(rng, &weights)])
    }
}

fn weighted_pick(rng: &mut Rng, weights: &[u64]) -> usize {
    let total: u64 = weights.iter().sum();
    let mut draw = rng.gen_range(0..total);
    for (i, &w) in weights.iter().enumerate() {
        if draw < w {
            return i;
        }
        draw -= w;
    }
    unreachable!("weights sum covers the draw range")
}

/// Geometric draw with support `{0, 1, ...}`: failures before first success.
pub(crate) fn geometric0(rng: &mut Rng, p: f64) -> usize {
    let mut k = 0;
    while !rng.gen_bool(p) {
        k += 1;
    }
    k
}
