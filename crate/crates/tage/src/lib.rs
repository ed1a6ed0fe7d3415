//! tage — learning deterministic timed automata with urgent outputs from
//! timed traces, by genetic programming.
//!
//! The library is organized around the data flow of a learning run:
//!
//! - [`ta`]: the timed-automaton model and its transition-system semantics;
//! - [`traces`]: test sequences, timed traces, the in-process system-under-test
//!   oracle, generation of training data, and trace file I/O;
//! - [`fitness`]: multi-path simulation of candidates on traces, verdicts,
//!   and the weighted fitness function;
//! - [`evolution`]: the two-population genetic search with biased mutation,
//!   randomized-product crossover, tournament selection, migration and
//!   elitism;
//! - [`benchmarks`]: built-in systems under test and the experiment runner;
//! - [`config`]: flat key-value run configuration shared with the CLI.
//!
//! Every stochastic choice derives from a single root seed ([`rng`]), so runs
//! are bit-reproducible at any worker count.

pub mod benchmarks;
pub mod config;
pub mod evolution;
pub mod fitness;
pub mod rng;
pub mod ta;
pub mod time;
pub mod traces;
