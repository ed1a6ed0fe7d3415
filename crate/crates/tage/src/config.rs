//! Flat key-value run configuration.
//!
//! One `key = value` per line, `#` starts a comment. Unknown keys are
//! rejected. The resolved configuration renders back to the same format (the
//! run manifest), so any run can be reproduced from its manifest alone.

use crate::evolution::EvolutionConfig;
use crate::fitness::default_weights;
use crate::ta::TimedAutomaton;
use crate::time::Time;
use crate::traces::TraceGenConfig;
use std::collections::BTreeSet;
use std::fmt;
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SutSource {
    Train,
    /// One of the category presets, e.g. `C6/2`.
    RandomCategory(String),
    TraceFile(PathBuf),
}

impl fmt::Display for SutSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SutSource::Train => write!(f, "train"),
            SutSource::RandomCategory(cat) => write!(f, "random:{cat}"),
            SutSource::TraceFile(path) => write!(f, "traces:{}", path.display()),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Profile {
    Default,
    /// Easier systems: population 500.
    Small,
}

/// Everything a run needs: search parameters, trace generation, the system
/// source, and output plumbing.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub evolution: EvolutionConfig,
    pub n_test: usize,
    pub p_test: f64,
    pub min_outputs: usize,
    /// Delay constants worth hitting exactly; `None` derives them from the
    /// system's guards (empty for trace files).
    pub important_constants: Option<Vec<u64>>,
    /// Observation window after the last input, in time units; `None` means
    /// `c_max`.
    pub horizon: Option<u64>,
    pub sut: SutSource,
    /// Seed for random system generation; `None` reuses the run seed.
    pub sut_seed: Option<u64>,
    pub out_dir: PathBuf,
    /// Worker threads; 0 means all available cores.
    pub workers: usize,
    pub profile: Profile,
    pub verbose: bool,
    pub w_out: f64,
    pub k: u32,
}

impl RunConfig {
    /// Trace-generation parameters for a known system (or none, when
    /// learning from files).
    pub fn trace_gen(&self, sut: Option<&TimedAutomaton>) -> TraceGenConfig {
        let mut cfg = TraceGenConfig::new(self.p_test, self.evolution.c_max);
        cfg.min_outputs = self.min_outputs;
        if let Some(h) = self.horizon {
            cfg.horizon_after_last_input = Time::from_units(h);
        }
        cfg.important_constants = match (&self.important_constants, sut) {
            (Some(list), _) => list.clone(),
            (None, Some(ta)) => {
                let mut constants: Vec<u64> = ta
                    .edges()
                    .iter()
                    .flat_map(|e| e.guard.atoms().iter().map(|a| a.bound))
                    .collect();
                constants.sort_unstable();
                constants.dedup();
                constants
            }
            (None, None) => Vec::new(),
        };
        cfg
    }
}

/// Command-line layer applied on top of file and environment values.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub env_seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub profile: Option<Profile>,
}

#[derive(Debug, Clone)]
pub struct ConfigError {
    pub line: usize,
    pub what: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.what)
        } else {
            write!(f, "config line {}: {}", self.line, self.what)
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(line: usize, what: impl Into<String>) -> ConfigError {
    ConfigError { line, what: what.into() }
}

const KEYS: &[&str] = &[
    "seed", "n_pop", "n_test", "g_max", "g_change", "g_simp", "p_cr", "p_mut_init",
    "n_sel_init", "n_t", "p_t", "n_clock", "c_max", "state_cap", "p_test", "w_out", "k",
    "w_pass", "w_nondet", "w_fail", "w_steps", "w_size", "geo_guard", "geo_reset",
    "min_outputs", "horizon", "important_constants", "sut", "sut_seed", "out", "workers",
    "profile", "verbose",
];

/// Resolves a configuration: defaults, then profile, then file entries (in
/// order), then the `TAGE_SEED` environment value, then command-line flags.
/// Derived values (`n_sel_init`, the weight scheme) follow unless the file
/// pins them explicitly.
pub fn resolve(file_text: Option<&str>, overrides: &Overrides) -> Result<RunConfig, ConfigError> {
    let entries = match file_text {
        Some(text) => parse_entries(text)?,
        None => Vec::new(),
    };
    let explicit: BTreeSet<&str> =
        entries.iter().map(|(_, key, _)| key.as_str()).collect();

    let profile = if let Some(p) = overrides.profile {
        p
    } else if let Some((line, _, value)) =
        entries.iter().rev().find(|(_, key, _)| key == "profile")
    {
        parse_profile(value)
            .ok_or_else(|| err(*line, "profile must be `default` or `small`"))?
    } else {
        Profile::Default
    };

    let mut cfg = RunConfig {
        evolution: EvolutionConfig::defaults(1),
        n_test: 2000,
        p_test: 0.15,
        min_outputs: 1,
        important_constants: None,
        horizon: None,
        sut: SutSource::Train,
        sut_seed: None,
        out_dir: PathBuf::from("tage_out"),
        workers: 0,
        profile,
        verbose: false,
        w_out: 0.25,
        k: 4,
    };
    if profile == Profile::Small {
        cfg.evolution.n_pop = 500;
    }

    for (line, key, value) in &entries {
        apply_entry(&mut cfg, *line, key, value)?;
    }

    if let Some(seed) = overrides.env_seed {
        cfg.evolution.seed = seed;
    }
    if let Some(seed) = overrides.seed {
        cfg.evolution.seed = seed;
    }
    if let Some(workers) = overrides.workers {
        cfg.workers = workers;
    }
    if let Some(out) = &overrides.out {
        cfg.out_dir = out.clone();
    }

    // Derived defaults unless pinned in the file.
    if !explicit.contains("n_sel_init") {
        cfg.evolution.n_sel_init = (cfg.evolution.n_pop / 10).max(1);
    }
    if !explicit.contains("c_max") {
        if let SutSource::RandomCategory(_) = cfg.sut {
            cfg.evolution.c_max = 15;
        }
    }
    let mut weights = default_weights(cfg.p_test, cfg.w_out, cfg.k);
    for (line, key, value) in &entries {
        let slot = match key.as_str() {
            "w_pass" => &mut weights.w_pass,
            "w_nondet" => &mut weights.w_nondet,
            "w_fail" => &mut weights.w_fail,
            "w_steps" => &mut weights.w_steps,
            "w_out" => continue,
            "w_size" => &mut weights.w_size,
            _ => continue,
        };
        *slot = parse_f64(*line, value)?;
    }
    weights.w_out = cfg.w_out;
    cfg.evolution.weights = weights;

    cfg.evolution
        .validate()
        .map_err(|e| err(0, e.to_string()))?;
    if !(cfg.p_test > 0.0 && cfg.p_test < 1.0) {
        return Err(err(0, "p_test must lie in (0, 1)"));
    }
    Ok(cfg)
}

fn parse_entries(text: &str) -> Result<Vec<(usize, String, String)>, ConfigError> {
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(line_no, format!("expected `key = value`, got {line:?}")))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !KEYS.contains(&key.as_str()) {
            return Err(err(line_no, format!("unknown key {key:?}")));
        }
        entries.push((line_no, key, value));
    }
    Ok(entries)
}

fn parse_profile(value: &str) -> Option<Profile> {
    match value {
        "default" => Some(Profile::Default),
        "small" => Some(Profile::Small),
        _ => None,
    }
}

fn apply_entry(
    cfg: &mut RunConfig,
    line: usize,
    key: &str,
    value: &str,
) -> Result<(), ConfigError> {
    match key {
        "seed" => cfg.evolution.seed = parse_u64(line, value)?,
        "n_pop" => cfg.evolution.n_pop = parse_usize(line, value)?,
        "n_test" => cfg.n_test = parse_usize(line, value)?,
        "g_max" => cfg.evolution.g_max = parse_usize(line, value)?,
        "g_change" => cfg.evolution.g_change = parse_usize(line, value)?,
        "g_simp" => cfg.evolution.g_simp = parse_usize(line, value)?,
        "p_cr" => cfg.evolution.p_cr = parse_f64(line, value)?,
        "p_mut_init" => cfg.evolution.p_mut_init = parse_f64(line, value)?,
        "n_sel_init" => cfg.evolution.n_sel_init = parse_usize(line, value)?,
        "n_t" => cfg.evolution.n_t = parse_usize(line, value)?,
        "p_t" => cfg.evolution.p_t = parse_f64(line, value)?,
        "n_clock" => cfg.evolution.n_clocks = parse_usize(line, value)?,
        "c_max" => cfg.evolution.c_max = parse_u64(line, value)?,
        "state_cap" => cfg.evolution.state_cap = parse_usize(line, value)?,
        "p_test" => cfg.p_test = parse_f64(line, value)?,
        "w_out" => cfg.w_out = parse_f64(line, value)?,
        "k" => cfg.k = parse_u64(line, value)? as u32,
        // Weight overrides are applied after derivation; validated there.
        "w_pass" | "w_nondet" | "w_fail" | "w_steps" | "w_size" => {
            parse_f64(line, value)?;
        }
        "geo_guard" => cfg.evolution.geo_guard = parse_f64(line, value)?,
        "geo_reset" => cfg.evolution.geo_reset = parse_f64(line, value)?,
        "min_outputs" => cfg.min_outputs = parse_usize(line, value)?,
        "horizon" => cfg.horizon = Some(parse_u64(line, value)?),
        "important_constants" => {
            let mut list = Vec::new();
            for tok in value.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                list.push(
                    tok.parse()
                        .map_err(|_| err(line, format!("bad constant {tok:?}")))?,
                );
            }
            list.sort_unstable();
            list.dedup();
            cfg.important_constants = Some(list);
        }
        "sut" => {
            cfg.sut = if value == "train" {
                SutSource::Train
            } else if let Some(cat) = value.strip_prefix("random:") {
                if crate::benchmarks::RandomSutSpec::category(cat, 0).is_none() {
                    return Err(err(
                        line,
                        format!("unknown category {cat:?}; use C15/1, C20/1, C6/2 or C10/2"),
                    ));
                }
                SutSource::RandomCategory(cat.to_string())
            } else if let Some(path) = value.strip_prefix("traces:") {
                SutSource::TraceFile(PathBuf::from(path))
            } else {
                return Err(err(
                    line,
                    format!("sut must be `train`, `random:<category>` or `traces:<path>`, got {value:?}"),
                ));
            }
        }
        "sut_seed" => cfg.sut_seed = Some(parse_u64(line, value)?),
        "out" => cfg.out_dir = PathBuf::from(value),
        "workers" => cfg.workers = parse_usize(line, value)?,
        "profile" => {} // handled up front
        "verbose" => {
            cfg.verbose = match value {
                "true" => true,
                "false" => false,
                _ => return Err(err(line, "verbose must be true or false")),
            }
        }
        _ => unreachable!("validated against KEYS"),
    }
    Ok(())
}

fn parse_u64(line: usize, value: &str) -> Result<u64, ConfigError> {
    value.parse().map_err(|_| err(line, format!("expected a non-negative integer, got {value:?}")))
}

fn parse_usize(line: usize, value: &str) -> Result<usize, ConfigError> {
    value.parse().map_err(|_| err(line, format!("expected a non-negative integer, got {value:?}")))
}

fn parse_f64(line: usize, value: &str) -> Result<f64, ConfigError> {
    value.parse().map_err(|_| err(line, format!("expected a number, got {value:?}")))
}

/// The fully resolved configuration in the file format; reparsing it yields
/// an identical run (the manifest written next to every run's outputs).
pub fn render(cfg: &RunConfig) -> String {
    let e = &cfg.evolution;
    let w = &e.weights;
    let mut out = String::new();
    let _ = writeln!(out, "seed = {}", e.seed);
    let _ = writeln!(out, "profile = {}", match cfg.profile {
        Profile::Default => "default",
        Profile::Small => "small",
    });
    let _ = writeln!(out, "sut = {}", cfg.sut);
    if let Some(s) = cfg.sut_seed {
        let _ = writeln!(out, "sut_seed = {s}");
    }
    let _ = writeln!(out, "n_pop = {}", e.n_pop);
    let _ = writeln!(out, "n_test = {}", cfg.n_test);
    let _ = writeln!(out, "g_max = {}", e.g_max);
    let _ = writeln!(out, "g_change = {}", e.g_change);
    let _ = writeln!(out, "g_simp = {}", e.g_simp);
    let _ = writeln!(out, "p_cr = {}", e.p_cr);
    let _ = writeln!(out, "p_mut_init = {}", e.p_mut_init);
    let _ = writeln!(out, "n_sel_init = {}", e.n_sel_init);
    let _ = writeln!(out, "n_t = {}", e.n_t);
    let _ = writeln!(out, "p_t = {}", e.p_t);
    let _ = writeln!(out, "n_clock = {}", e.n_clocks);
    let _ = writeln!(out, "c_max = {}", e.c_max);
    let _ = writeln!(out, "state_cap = {}", e.state_cap);
    let _ = writeln!(out, "p_test = {}", cfg.p_test);
    let _ = writeln!(out, "w_out = {}", cfg.w_out);
    let _ = writeln!(out, "k = {}", cfg.k);
    let _ = writeln!(out, "w_pass = {}", w.w_pass);
    let _ = writeln!(out, "w_nondet = {}", w.w_nondet);
    let _ = writeln!(out, "w_fail = {}", w.w_fail);
    let _ = writeln!(out, "w_steps = {}", w.w_steps);
    let _ = writeln!(out, "w_size = {}", w.w_size);
    let _ = writeln!(out, "geo_guard = {}", e.geo_guard);
    let _ = writeln!(out, "geo_reset = {}", e.geo_reset);
    let _ = writeln!(out, "min_outputs = {}", cfg.min_outputs);
    if let Some(h) = cfg.horizon {
        let _ = writeln!(out, "horizon = {h}");
    }
    if let Some(list) = &cfg.important_constants {
        let rendered: Vec<String> = list.iter().map(u64::to_string).collect();
        let _ = writeln!(out, "important_constants = {}", rendered.join(","));
    }
    let _ = writeln!(out, "out = {}", cfg.out_dir.display());
    let _ = writeln!(out, "workers = {}", cfg.workers);
    let _ = writeln!(out, "verbose = {}", cfg.verbose);
    out
}
