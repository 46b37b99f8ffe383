use std::fmt::Write;

use crate::geometry::VarId;

use super::network::Network;

impl Network {
    /// Plain-text listing of every automaton: locations with invariants and
    /// stopped clocks, then edges.
    pub fn dump(&self) -> String {
        let reg = &self.registry;
        let names = |vs: &[VarId]| {
            vs.iter()
                .map(|v| reg.name(*v))
                .collect::<Vec<_>>()
                .join(", ")
        };
        let mut out = String::new();
        for a in &self.automata {
            let _ = writeln!(
                out,
                "automaton {} ({} locations, {} edges)",
                a.name,
                a.locations.len(),
                a.edges.len()
            );
            for (i, l) in a.locations.iter().enumerate() {
                let mut line = format!("  loc {}", l.name);
                if i == a.initial {
                    line.push_str(" [initial]");
                }
                if l.is_bad {
                    line.push_str(" [bad]");
                }
                if !l.invariant.is_top() {
                    let _ = write!(line, " inv {}", l.invariant.render(reg));
                }
                if !l.stopped.is_empty() {
                    let _ = write!(line, " stop {{{}}}", names(&l.stopped));
                }
                let _ = writeln!(out, "{line}");
            }
            for e in &a.edges {
                let mut line = format!(
                    "  {} --{}--> {}",
                    a.locations[e.source].name,
                    self.action_name(e.action),
                    a.locations[e.target].name
                );
                if !e.guard.is_top() {
                    let _ = write!(line, " when {}", e.guard.render(reg));
                }
                if !e.resets.is_empty() {
                    let _ = write!(line, " reset {{{}}}", names(&e.resets));
                }
                let _ = writeln!(out, "{line}");
            }
        }
        out
    }
}
