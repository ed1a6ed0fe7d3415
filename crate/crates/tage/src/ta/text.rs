//! Canonical plain-text automaton format.
//!
//! ```text
//! inputs go? start? stop?
//! outputs appr! enter! leave!
//! clocks 1
//! locations 6
//! initial 0
//! 0 -- T / start? / {c0} --> 1
//! 1 -- c0>=5 / appr! / {c0} --> 2
//! ```
//!
//! The header fixes the alphabet, clock and location counts and the initial
//! location; every following line is one edge. `T` denotes the empty guard.
//! Round-trips losslessly; serialization order is canonical, so equal
//! automata produce identical bytes.

use super::{
    Alphabet, ClockConstraint, Edge, Guard, RelOp, ResetSet, TaError, TimedAutomaton,
};
use std::fmt;
use std::fmt::Write as _;

pub fn write_ta(ta: &TimedAutomaton) -> String {
    let mut out = String::new();
    out.push_str("inputs");
    for a in ta.alphabet().inputs() {
        let _ = write!(out, " {}", ta.alphabet().display(a));
    }
    out.push_str("\noutputs");
    for a in ta.alphabet().outputs() {
        let _ = write!(out, " {}", ta.alphabet().display(a));
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "clocks {}", ta.n_clocks());
    let _ = writeln!(out, "locations {}", ta.n_locations());
    let _ = writeln!(out, "initial {}", ta.initial());
    for e in ta.edges() {
        let _ = writeln!(
            out,
            "{} -- {} / {} / {} --> {}",
            e.source,
            guard_text(&e.guard),
            ta.alphabet().display(e.action),
            resets_text(e.resets),
            e.target
        );
    }
    out
}

fn guard_text(guard: &Guard) -> String {
    if guard.is_true() {
        return "T".to_string();
    }
    guard
        .atoms()
        .iter()
        .map(|a| format!("c{}{}{}", a.clock, a.op.symbol(), a.bound))
        .collect::<Vec<_>>()
        .join(" & ")
}

fn resets_text(resets: ResetSet) -> String {
    let inner = resets.iter().map(|c| format!("c{c}")).collect::<Vec<_>>().join(",");
    format!("{{{inner}}}")
}

#[derive(Debug, Clone)]
pub enum TaTextError {
    MissingHeader(&'static str),
    Malformed { line: usize, what: String },
    Structural(TaError),
}

impl fmt::Display for TaTextError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TaTextError::MissingHeader(h) => write!(f, "missing header line {h:?}"),
            TaTextError::Malformed { line, what } => write!(f, "line {line}: {what}"),
            TaTextError::Structural(e) => write!(f, "invalid automaton: {e}"),
        }
    }
}

impl std::error::Error for TaTextError {}

impl From<TaError> for TaTextError {
    fn from(e: TaError) -> Self {
        TaTextError::Structural(e)
    }
}

pub fn parse_ta(text: &str) -> Result<TimedAutomaton, TaTextError> {
    let mut inputs = None;
    let mut outputs = None;
    let mut clocks = None;
    let mut locations = None;
    let mut initial = None;
    let mut edge_lines: Vec<(usize, &str)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("inputs") {
            inputs = Some(parse_names(rest, line_no)?);
        } else if let Some(rest) = line.strip_prefix("outputs") {
            outputs = Some(parse_names(rest, line_no)?);
        } else if let Some(rest) = line.strip_prefix("clocks ") {
            clocks = Some(parse_count(rest, line_no)?);
        } else if let Some(rest) = line.strip_prefix("locations ") {
            locations = Some(parse_count(rest, line_no)?);
        } else if let Some(rest) = line.strip_prefix("initial ") {
            initial = Some(parse_count(rest, line_no)?);
        } else {
            edge_lines.push((line_no, line));
        }
    }

    let inputs = inputs.ok_or(TaTextError::MissingHeader("inputs"))?;
    let outputs = outputs.ok_or(TaTextError::MissingHeader("outputs"))?;
    let clocks = clocks.ok_or(TaTextError::MissingHeader("clocks"))?;
    let locations = locations.ok_or(TaTextError::MissingHeader("locations"))?;
    let initial = initial.ok_or(TaTextError::MissingHeader("initial"))?;

    let mut input_names = Vec::new();
    let mut output_names = Vec::new();
    for (name, kind, line) in inputs.into_iter().chain(outputs) {
        match kind {
            super::ActionKind::Input => {
                if !input_names.contains(&name) {
                    input_names.push(name);
                } else {
                    return Err(TaTextError::Malformed { line, what: format!("duplicate action {name:?}") });
                }
            }
            super::ActionKind::Output => {
                if !output_names.contains(&name) {
                    output_names.push(name);
                } else {
                    return Err(TaTextError::Malformed { line, what: format!("duplicate action {name:?}") });
                }
            }
        }
    }
    let alphabet = Alphabet::new(input_names, output_names)?;

    let mut edges = Vec::with_capacity(edge_lines.len());
    for (line, text) in edge_lines {
        edges.push(parse_edge(text, &alphabet, line)?);
    }

    Ok(TimedAutomaton::new(alphabet, clocks, locations, initial, edges)?)
}

type ParsedName = (String, super::ActionKind, usize);

fn parse_names(rest: &str, line: usize) -> Result<Vec<ParsedName>, TaTextError> {
    rest.split_whitespace()
        .map(|tok| {
            let (name, kind) = super::split_rendered(tok).ok_or_else(|| TaTextError::Malformed {
                line,
                what: format!("action {tok:?} must end in ? or !"),
            })?;
            Ok((name.to_string(), kind, line))
        })
        .collect()
}

fn parse_count(rest: &str, line: usize) -> Result<usize, TaTextError> {
    rest.trim()
        .parse()
        .map_err(|_| TaTextError::Malformed { line, what: format!("expected a number, got {rest:?}") })
}

fn parse_edge(text: &str, alphabet: &Alphabet, line: usize) -> Result<Edge, TaTextError> {
    let malformed = |what: String| TaTextError::Malformed { line, what };
    let (source, rest) = text
        .split_once(" -- ")
        .ok_or_else(|| malformed("expected `source -- guard / label / resets --> target`".into()))?;
    let (body, target) = rest
        .rsplit_once(" --> ")
        .ok_or_else(|| malformed("missing `--> target`".into()))?;
    let parts: Vec<&str> = body.splitn(3, " / ").collect();
    let [guard, label, resets] = parts[..] else {
        return Err(malformed("expected `guard / label / resets`".into()));
    };

    let source: usize =
        source.trim().parse().map_err(|_| malformed(format!("bad source {source:?}")))?;
    let target: usize =
        target.trim().parse().map_err(|_| malformed(format!("bad target {target:?}")))?;
    let action = alphabet
        .lookup(label.trim())
        .ok_or_else(|| malformed(format!("unknown action {label:?}")))?;
    let guard = parse_guard(guard.trim(), line)?;
    let resets = parse_resets(resets.trim(), line)?;
    Ok(Edge { source, action, guard, resets, target })
}

fn parse_guard(text: &str, line: usize) -> Result<Guard, TaTextError> {
    if text == "T" {
        return Ok(Guard::TRUE);
    }
    let mut atoms = Vec::new();
    for atom in text.split('&') {
        atoms.push(parse_atom(atom.trim(), line)?);
    }
    Ok(Guard::new(atoms))
}

fn parse_atom(text: &str, line: usize) -> Result<ClockConstraint, TaTextError> {
    let malformed = || TaTextError::Malformed { line, what: format!("bad guard atom {text:?}") };
    let rest = text.strip_prefix('c').ok_or_else(malformed)?;
    let op_pos = rest.find(['<', '>']).ok_or_else(malformed)?;
    let clock: usize = rest[..op_pos].parse().map_err(|_| malformed())?;
    let after = &rest[op_pos..];
    let (op, bound_text) = if let Some(b) = after.strip_prefix("<=") {
        (RelOp::Le, b)
    } else if let Some(b) = after.strip_prefix(">=") {
        (RelOp::Ge, b)
    } else if let Some(b) = after.strip_prefix('<') {
        (RelOp::Lt, b)
    } else if let Some(b) = after.strip_prefix('>') {
        (RelOp::Gt, b)
    } else {
        return Err(malformed());
    };
    let bound: u64 = bound_text.parse().map_err(|_| malformed())?;
    Ok(ClockConstraint { clock, op, bound })
}

fn parse_resets(text: &str, line: usize) -> Result<ResetSet, TaTextError> {
    let malformed = || TaTextError::Malformed { line, what: format!("bad reset set {text:?}") };
    let inner = text.strip_prefix('{').and_then(|t| t.strip_suffix('}')).ok_or_else(malformed)?;
    let mut resets = ResetSet::EMPTY;
    for tok in inner.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let clock: usize =
            tok.strip_prefix('c').and_then(|c| c.parse().ok()).ok_or_else(malformed)?;
        if clock >= 32 {
            return Err(malformed());
        }
        resets.insert(clock);
    }
    Ok(resets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::build_train_ta;

    #[test]
    fn round_trip_is_identity() {
        let train = build_train_ta();
        let text = write_ta(&train);
        let back = parse_ta(&text).unwrap();
        assert_eq!(back, train);
        assert_eq!(write_ta(&back), text);
    }

    #[test]
    fn parse_reports_line_numbers() {
        let text = "inputs i?\noutputs o!\nclocks 1\nlocations 2\ninitial 0\n0 -- T / x? / {} --> 1\n";
        let err = parse_ta(text).unwrap_err();
        assert!(matches!(err, TaTextError::Malformed { line: 6, .. }), "{err}");
    }

    #[test]
    fn parse_rejects_missing_headers() {
        let err = parse_ta("inputs i?\n").unwrap_err();
        assert!(matches!(err, TaTextError::MissingHeader(_)));
    }

    #[test]
    fn guard_atoms_cover_all_operators() {
        let text = "inputs i?\noutputs o!\nclocks 2\nlocations 2\ninitial 0\n\
                    0 -- c0>=5 & c1<10 & c0<=7 & c1>2 / i? / {c0,c1} --> 1\n";
        let ta = parse_ta(text).unwrap();
        assert_eq!(ta.edges()[0].guard.atoms().len(), 4);
        let round = parse_ta(&write_ta(&ta)).unwrap();
        assert_eq!(round, ta);
    }
}
