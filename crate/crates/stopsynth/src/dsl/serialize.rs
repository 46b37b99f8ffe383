use std::fmt::Write;

use crate::model::{Endpoint, SystemSpec};

/// Canonical text form; `parse(serialize(s))` gives back `s`.
pub fn serialize(spec: &SystemSpec) -> String {
    let mut out = String::new();
    for p in &spec.processings {
        let _ = writeln!(out, "processing {} {{\n  period {}", p.name, p.period);
        if !p.inputs.is_empty() {
            let _ = writeln!(out, "  in {}", p.inputs.join(" "));
        }
        if !p.outputs.is_empty() {
            let _ = writeln!(out, "  out {}", p.outputs.join(" "));
        }
        out.push_str("}\n");
    }
    if !spec.processings.is_empty() {
        out.push('\n');
    }
    for p in &spec.processings {
        let _ = writeln!(out, "wcet {} {}", p.name, p.wcet);
    }
    for t in &spec.threads {
        let _ = write!(
            out,
            "\nthread {} {{\n  period {}\n  offset {}\n  deadline {}\n  maf {}\n  priority {}\n",
            t.name, t.period, t.offset, t.deadline, t.maf, t.priority
        );
        for s in &t.slots {
            let _ = writeln!(
                out,
                "  run {} when {} mod {}",
                s.processing, s.residue, s.modulus
            );
        }
        out.push_str("}\n");
    }
    for r in &spec.reactivities {
        let mut path: Vec<&str> = Vec::new();
        path.extend(r.source.as_deref());
        path.extend(r.chain.iter().map(String::as_str));
        path.extend(r.sink.as_deref());
        let _ = write!(
            out,
            "\nreactivity {} {{\n  path {}\n  bound {}\n",
            r.name,
            path.join(" -> "),
            r.bound
        );
        if r.endpoint == Endpoint::Publication {
            out.push_str("  endpoint publication\n");
        }
        out.push_str("}\n");
    }
    out
}
