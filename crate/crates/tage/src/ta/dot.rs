//! Graphviz export. Output ordering follows the canonical edge order, so
//! identical automata always serialize to identical bytes.

use super::TimedAutomaton;
use std::fmt::Write;

pub fn to_dot(ta: &TimedAutomaton) -> String {
    let mut out = String::new();
    out.push_str("digraph ta {\n");
    out.push_str("  rankdir=LR;\n");
    out.push_str("  __init [shape=point, label=\"\"];\n");
    for l in 0..ta.n_locations() {
        let _ = writeln!(out, "  l{l} [shape=circle, label=\"l{l}\"];");
    }
    let _ = writeln!(out, "  __init -> l{};", ta.initial());
    for e in ta.edges() {
        let guard = if e.guard.is_true() {
            "⊤".to_string()
        } else {
            e.guard
                .atoms()
                .iter()
                .map(|a| format!("c{}{}{}", a.clock, a.op.symbol(), a.bound))
                .collect::<Vec<_>>()
                .join(" & ")
        };
        let resets = e.resets.iter().map(|c| format!("c{c}")).collect::<Vec<_>>().join(",");
        let _ = writeln!(
            out,
            "  l{} -> l{} [label=\"{} / {} / {{{}}}\"];",
            e.source,
            e.target,
            guard,
            ta.alphabet().display(e.action),
            resets
        );
    }
    out.push_str("}\n");
    out
}
