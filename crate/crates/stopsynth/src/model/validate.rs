use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::Rational;

use super::spec::{Quantity, SystemSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    /// Name of the offending processing, thread or reactivity.
    pub subject: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.severity, self.subject, self.message)
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.severity == Severity::Error)
}

struct Sink(Vec<Diagnostic>);

impl Sink {
    fn error(&mut self, subject: &str, message: impl Into<String>) {
        self.0.push(Diagnostic {
            severity: Severity::Error,
            subject: subject.into(),
            message: message.into(),
        });
    }

    fn warn(&mut self, subject: &str, message: impl Into<String>) {
        self.0.push(Diagnostic {
            severity: Severity::Warning,
            subject: subject.into(),
            message: message.into(),
        });
    }
}

fn is_multiple(big: &Rational, small: &Rational) -> bool {
    small.signum() > 0 && (big / small).is_integer()
}

fn duplicates<'a>(names: impl Iterator<Item = &'a str>) -> Vec<&'a str> {
    let mut seen = BTreeSet::new();
    names.filter(|n| !seen.insert(*n)).collect()
}

/// Semantic checks on a specification. Errors make the spec unusable;
/// warnings flag suspicious but admissible input.
pub fn validate(spec: &SystemSpec) -> Vec<Diagnostic> {
    let mut d = Sink(Vec::new());
    for n in duplicates(spec.processings.iter().map(|p| p.name.as_str())) {
        d.error(n, "processing declared twice");
    }
    for n in duplicates(spec.threads.iter().map(|t| t.name.as_str())) {
        d.error(n, "thread declared twice");
    }
    for n in duplicates(spec.reactivities.iter().map(|r| r.name.as_str())) {
        d.error(n, "reactivity declared twice");
    }
    for t in &spec.threads {
        if spec.processing(&t.name).is_some() {
            d.error(&t.name, "a thread and a processing share this name");
        }
    }
    if spec.threads.is_empty() {
        d.error("system", "no thread declared");
    }

    for p in &spec.processings {
        if p.period.signum() <= 0 {
            d.error(&p.name, "period must be positive");
        }
        if let Quantity::Value(w) = &p.wcet {
            if w.signum() <= 0 {
                d.error(&p.name, "WCET must be positive");
            } else if w > &p.period {
                d.error(&p.name, format!("WCET {w} exceeds the period {}", p.period));
            }
        }
    }

    let mut prios: BTreeMap<u32, &str> = BTreeMap::new();
    let mut allocation: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for t in &spec.threads {
        if let Some(other) = prios.insert(t.priority, &t.name) {
            d.error(
                &t.name,
                format!("priority {} already used by {other}", t.priority),
            );
        }
        if t.period.signum() <= 0 {
            d.error(&t.name, "period must be positive");
            continue;
        }
        match &t.offset {
            Quantity::Value(o) if o.is_negative() || o > &t.period => {
                d.error(&t.name, format!("offset {o} outside [0, {}]", t.period))
            }
            _ => {}
        }
        match &t.deadline {
            Quantity::Value(dl) if dl.signum() <= 0 || dl > &t.period => {
                d.error(&t.name, format!("deadline {dl} outside (0, {}]", t.period))
            }
            _ => {}
        }
        let cycles = t.cycles();
        if cycles == 0 {
            d.error(
                &t.name,
                format!(
                    "major frame {} is not a positive multiple of the period {}",
                    t.maf, t.period
                ),
            );
        }
        if t.slots.is_empty() {
            d.warn(&t.name, "thread runs no processing");
        }
        for s in &t.slots {
            allocation
                .entry(s.processing.as_str())
                .or_default()
                .push(&t.name);
            if s.modulus == 0 || s.residue >= s.modulus {
                d.error(
                    &t.name,
                    format!(
                        "slot `{} when {} mod {}` is malformed",
                        s.processing, s.residue, s.modulus
                    ),
                );
                continue;
            }
            if cycles != 0 && cycles % u64::from(s.modulus) != 0 {
                d.error(
                    &t.name,
                    format!(
                        "slot modulus {} does not divide the {cycles} cycles of the major frame",
                        s.modulus
                    ),
                );
            }
            match spec.processing(&s.processing) {
                None => d.error(&t.name, format!("unknown processing `{}`", s.processing)),
                Some(p) => {
                    let expected = &t.period * &Rational::from(i64::from(s.modulus));
                    if p.period != expected {
                        d.error(
                            &p.name,
                            format!("period {} inconsistent with activation every {} cycles of {} ({expected})", p.period, s.modulus, t.name),
                        );
                    }
                }
            }
        }
        for c in 0..cycles {
            let mut total = Rational::zero();
            for n in t.cycle_work(c) {
                if let Some(w) = spec.processing(n).and_then(|p| p.wcet.value()) {
                    total = &total + w;
                }
            }
            if total > t.period {
                d.warn(
                    &t.name,
                    format!(
                        "cycle {c} needs {total} of execution in a period of {}",
                        t.period
                    ),
                );
            }
        }
    }

    for p in &spec.processings {
        match allocation.get(p.name.as_str()).map(Vec::len).unwrap_or(0) {
            0 => d.error(&p.name, "processing not allocated to any thread"),
            1 => {}
            _ => d.error(&p.name, "processing allocated more than once"),
        }
    }

    let mut periods: Vec<&Rational> = spec
        .threads
        .iter()
        .map(|t| &t.period)
        .filter(|p| p.signum() > 0)
        .collect();
    periods.sort();
    for w in periods.windows(2) {
        if !is_multiple(w[1], w[0]) {
            d.error(
                "system",
                format!("periods {} and {} are not harmonic", w[0], w[1]),
            );
        }
    }

    for r in &spec.reactivities {
        if r.bound.signum() <= 0 {
            d.error(&r.name, "bound must be positive");
        }
        if r.chain.len() < 2 {
            d.error(&r.name, "a reactivity chain needs at least two processings");
        }
        let mut known = true;
        for n in &r.chain {
            if spec.processing(n).is_none() {
                d.error(&r.name, format!("unknown processing `{n}` in chain"));
                known = false;
            }
        }
        if !known {
            continue;
        }
        if !duplicates(r.chain.iter().map(String::as_str)).is_empty() {
            d.error(&r.name, "a processing appears twice in the chain");
        }
        for w in r.chain.windows(2) {
            let (a, b) = (
                spec.processing(&w[0]).unwrap(),
                spec.processing(&w[1]).unwrap(),
            );
            if !a.outputs.iter().any(|o| b.inputs.contains(o)) {
                d.error(
                    &r.name,
                    format!("no data produced by {} is consumed by {}", a.name, b.name),
                );
            }
        }
        if let Some(src) = &r.source {
            let first = spec.processing(&r.chain[0]).unwrap();
            if !first.inputs.contains(src) {
                d.error(&r.name, format!("{} does not read `{src}`", first.name));
            }
        }
        if let Some(dst) = &r.sink {
            let last = spec.processing(r.chain.last().unwrap()).unwrap();
            if !last.outputs.contains(dst) {
                d.error(&r.name, format!("{} does not write `{dst}`", last.name));
            }
        }
    }
    d.0
}
