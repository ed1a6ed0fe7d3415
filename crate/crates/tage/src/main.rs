//! Command-line entry points: `learn`, `gen`, `eval`, `export-dot`.
//!
//! Exit codes: 0 on success, 1 when a search or evaluation finished without
//! a fully passing result, 2 on usage, configuration or parse errors.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use tage::benchmarks::{
    build_train_ta, count_errors, generate_random_sut, RandomSutSpec, TAG_TRAINING_SET,
};
use tage::config::{self, Overrides, Profile, RunConfig, SutSource};
use tage::evolution::evolve;
use tage::fitness::{simulate, verdict, Verdict};
use tage::rng::StreamSeed;
use tage::ta::{parse_ta, to_dot, write_ta, TimedAutomaton};
use tage::traces::{generate_training_set, read_traces, TraceSet};

const USAGE: &str = "\
tage — learn deterministic timed automata from timed traces

USAGE:
  tage learn      [--config PATH] [--seed N] [--workers N] [--out DIR] [--profile default|small]
  tage gen        [--config PATH] [--seed N] [--workers N] [--out DIR] [--profile default|small]
  tage eval       MODEL TRACES [--workers N]
  tage export-dot MODEL [--out FILE]

  learn       run the search on traces (from a file, or generated from the
              configured system under test) and write the learned automaton
  gen         generate the configured system and/or a trace corpus to files
  eval        simulate a trace file on a model and print a verdict histogram
  export-dot  write a model in Graphviz dot format

The TAGE_SEED environment variable overrides the configured seed; the
--seed flag overrides both.";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match dispatch(&args) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(args: &[String]) -> Result<ExitCode, String> {
    let Some(command) = args.first() else {
        eprintln!("{USAGE}");
        return Ok(ExitCode::from(2));
    };
    match command.as_str() {
        "learn" => cmd_learn(&args[1..]),
        "gen" => cmd_gen(&args[1..]),
        "eval" => cmd_eval(&args[1..]),
        "export-dot" => cmd_export_dot(&args[1..]),
        "help" | "--help" | "-h" => {
            println!("{USAGE}");
            Ok(ExitCode::SUCCESS)
        }
        other => Err(format!("unknown command {other:?}\n{USAGE}")),
    }
}

struct Flags {
    config: Option<PathBuf>,
    overrides: Overrides,
    out_file: Option<PathBuf>,
    positional: Vec<String>,
}

fn parse_flags(args: &[String]) -> Result<Flags, String> {
    let mut flags = Flags {
        config: None,
        overrides: Overrides {
            env_seed: std::env::var("TAGE_SEED")
                .ok()
                .map(|v| v.parse().map_err(|_| format!("bad TAGE_SEED value {v:?}")))
                .transpose()?,
            ..Overrides::default()
        },
        out_file: None,
        positional: Vec::new(),
    };
    let mut iter = args.iter();
    while let Some(arg) = iter.next() {
        let mut value_of = |name: &str| {
            iter.next().map(String::as_str).ok_or(format!("{name} needs a value"))
        };
        match arg.as_str() {
            "--config" => flags.config = Some(PathBuf::from(value_of("--config")?)),
            "--seed" => {
                let v = value_of("--seed")?;
                flags.overrides.seed =
                    Some(v.parse().map_err(|_| format!("bad seed {v:?}"))?);
            }
            "--workers" => {
                let v = value_of("--workers")?;
                flags.overrides.workers =
                    Some(v.parse().map_err(|_| format!("bad worker count {v:?}"))?);
            }
            "--out" => {
                let path = PathBuf::from(value_of("--out")?);
                flags.overrides.out = Some(path.clone());
                flags.out_file = Some(path);
            }
            "--profile" => {
                flags.overrides.profile = Some(match value_of("--profile")? {
                    "default" => Profile::Default,
                    "small" => Profile::Small,
                    other => return Err(format!("unknown profile {other:?}")),
                });
            }
            other if other.starts_with("--") => return Err(format!("unknown flag {other:?}")),
            positional => flags.positional.push(positional.to_string()),
        }
    }
    Ok(flags)
}

fn load_config(flags: &Flags) -> Result<RunConfig, String> {
    let text = match &flags.config {
        Some(path) => Some(
            fs::read_to_string(path)
                .map_err(|e| format!("cannot read config {}: {e}", path.display()))?,
        ),
        None => None,
    };
    config::resolve(text.as_deref(), &flags.overrides).map_err(|e| e.to_string())
}

/// Runs `body` inside a worker pool of the configured size (0 = default).
fn with_workers<T: Send>(workers: usize, body: impl FnOnce() -> T + Send) -> Result<T, String> {
    if workers == 0 {
        return Ok(body());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| format!("cannot build worker pool: {e}"))?;
    Ok(pool.install(body))
}

fn prepare_out_dir(cfg: &RunConfig) -> Result<(), String> {
    fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| format!("cannot create {}: {e}", cfg.out_dir.display()))?;
    write_file(&cfg.out_dir.join("manifest.cfg"), &config::render(cfg))
}

fn write_file(path: &Path, content: &str) -> Result<(), String> {
    fs::write(path, content).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

/// The configured system under test, unless learning from a trace file.
fn build_sut(cfg: &RunConfig) -> Result<Option<TimedAutomaton>, String> {
    match &cfg.sut {
        SutSource::Train => Ok(Some(build_train_ta())),
        SutSource::RandomCategory(cat) => {
            let seed = cfg.sut_seed.unwrap_or(cfg.evolution.seed);
            let spec = RandomSutSpec::category(cat, seed).expect("category validated");
            let spec = RandomSutSpec { c_max: cfg.evolution.c_max, ..spec };
            Ok(Some(generate_random_sut(&spec).map_err(|e| e.to_string())?))
        }
        SutSource::TraceFile(_) => Ok(None),
    }
}

fn obtain_training(cfg: &RunConfig, sut: Option<&TimedAutomaton>) -> Result<TraceSet, String> {
    match (&cfg.sut, sut) {
        (SutSource::TraceFile(path), _) => {
            read_traces(path).map_err(|e| format!("{}: {e}", path.display()))
        }
        (_, Some(sut)) => {
            let trace_cfg = cfg.trace_gen(Some(sut));
            let seed = StreamSeed::new(cfg.evolution.seed).child(TAG_TRAINING_SET);
            generate_training_set(sut, &trace_cfg, cfg.n_test, seed).map_err(|e| e.to_string())
        }
        (_, None) => unreachable!("non-trace sources build a system"),
    }
}

fn cmd_learn(args: &[String]) -> Result<ExitCode, String> {
    let flags = parse_flags(args)?;
    if !flags.positional.is_empty() {
        return Err(format!("learn takes no positional arguments: {:?}", flags.positional));
    }
    let cfg = load_config(&flags)?;
    prepare_out_dir(&cfg)?;

    let sut = build_sut(&cfg)?;
    if let Some(sut) = &sut {
        write_file(&cfg.out_dir.join("sut.ta"), &write_ta(sut))?;
        write_file(&cfg.out_dir.join("sut.dot"), &to_dot(sut))?;
    }
    let training = obtain_training(&cfg, sut.as_ref())?;
    write_file(
        &cfg.out_dir.join("traces.txt"),
        &tage::traces::render_traces(&training),
    )?;

    let mut progress_log = fs::File::create(cfg.out_dir.join("progress.log"))
        .map_err(|e| format!("cannot create progress log: {e}"))?;
    let verbose = cfg.verbose;
    let outcome = with_workers(cfg.workers, || {
        evolve(&cfg.evolution, &training, |rec| {
            let line = rec.line();
            let _ = writeln!(progress_log, "{line}");
            if verbose {
                eprintln!("{line}");
            }
            true
        })
    })?;
    let (learned, report) = outcome.map_err(|e| e.to_string())?;

    write_file(&cfg.out_dir.join("learned.ta"), &write_ta(&learned))?;
    write_file(&cfg.out_dir.join("learned.dot"), &to_dot(&learned))?;
    let training_errors = count_errors(&learned, &training, cfg.evolution.state_cap);
    let mut summary = String::new();
    summary.push_str(&report.deterministic_summary());
    summary.push_str(&format!("wall_s={:.1}\n", report.wall.as_secs_f64()));
    summary.push_str(&format!("training_errors={training_errors}\n"));
    write_file(&cfg.out_dir.join("report.txt"), &summary)?;

    println!(
        "{} after {} generations ({:.1}s); artifacts in {}",
        if report.solved { "solved" } else { "not solved" },
        report.generations,
        report.wall.as_secs_f64(),
        cfg.out_dir.display()
    );
    Ok(if report.solved { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_gen(args: &[String]) -> Result<ExitCode, String> {
    let flags = parse_flags(args)?;
    if !flags.positional.is_empty() {
        return Err(format!("gen takes no positional arguments: {:?}", flags.positional));
    }
    let cfg = load_config(&flags)?;
    if matches!(cfg.sut, SutSource::TraceFile(_)) {
        return Err("gen needs a generatable system: set sut = train or random:<category>".into());
    }
    prepare_out_dir(&cfg)?;
    let sut = build_sut(&cfg)?.expect("trace sources rejected above");
    write_file(&cfg.out_dir.join("sut.ta"), &write_ta(&sut))?;
    write_file(&cfg.out_dir.join("sut.dot"), &to_dot(&sut))?;
    let set = with_workers(cfg.workers, || {
        let trace_cfg = cfg.trace_gen(Some(&sut));
        let seed = StreamSeed::new(cfg.evolution.seed).child(TAG_TRAINING_SET);
        generate_training_set(&sut, &trace_cfg, cfg.n_test, seed)
    })?
    .map_err(|e| e.to_string())?;
    write_file(&cfg.out_dir.join("traces.txt"), &tage::traces::render_traces(&set))?;
    println!("wrote sut.ta, sut.dot and {} traces to {}", set.traces.len(), cfg.out_dir.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_eval(args: &[String]) -> Result<ExitCode, String> {
    let flags = parse_flags(args)?;
    let [model_path, traces_path] = flags.positional.as_slice() else {
        return Err("eval needs exactly two arguments: MODEL TRACES".into());
    };
    let model_text = fs::read_to_string(model_path)
        .map_err(|e| format!("cannot read {model_path}: {e}"))?;
    let model = parse_ta(&model_text).map_err(|e| format!("{model_path}: {e}"))?;
    let raw = read_traces(Path::new(traces_path)).map_err(|e| format!("{traces_path}: {e}"))?;
    if raw.traces.is_empty() {
        return Err(format!("{traces_path}: no traces to evaluate"));
    }
    // Re-index the trace actions against the model's alphabet.
    let mut traces = Vec::with_capacity(raw.traces.len());
    for tt in &raw.traces {
        let mut events = Vec::with_capacity(tt.len());
        for &(t, action) in tt.events() {
            let rendered = raw.alphabet.display(action);
            let mapped = model
                .alphabet()
                .lookup(&rendered)
                .ok_or_else(|| format!("trace action {rendered} is not in the model alphabet"))?;
            events.push((t, mapped));
        }
        traces.push(tage::traces::TimedTrace::new(events));
    }

    let workers = flags.overrides.workers.unwrap_or(0);
    let verdicts: Vec<Verdict> = with_workers(workers, || {
        traces.iter().map(|tt| verdict(&simulate(&model, tt, 64))).collect()
    })?;
    let count = |v: Verdict| verdicts.iter().filter(|&&x| x == v).count();
    let (pass, nondet, fail) = (count(Verdict::Pass), count(Verdict::Nondet), count(Verdict::Fail));
    println!("PASS {pass}  NONDET {nondet}  FAIL {fail}  (of {})", verdicts.len());
    let failing: Vec<String> = verdicts
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != Verdict::Pass)
        .map(|(i, v)| format!("{i}:{v:?}"))
        .collect();
    if !failing.is_empty() {
        println!("non-PASS traces: {}", failing.join(" "));
    }
    Ok(if fail + nondet == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_export_dot(args: &[String]) -> Result<ExitCode, String> {
    let flags = parse_flags(args)?;
    let [model_path] = flags.positional.as_slice() else {
        return Err("export-dot needs exactly one argument: MODEL".into());
    };
    let text = fs::read_to_string(model_path)
        .map_err(|e| format!("cannot read {model_path}: {e}"))?;
    let model = parse_ta(&text).map_err(|e| format!("{model_path}: {e}"))?;
    let dot = to_dot(&model);
    match &flags.out_file {
        Some(path) => write_file(path, &dot)?,
        None => print!("{dot}"),
    }
    Ok(ExitCode::SUCCESS)
}
