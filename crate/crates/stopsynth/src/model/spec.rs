use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::Rational;

/// A timing quantity that is either known or left for synthesis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quantity {
    Value(Rational),
    Param,
}

impl Quantity {
    pub fn value(&self) -> Option<&Rational> {
        match self {
            Quantity::Value(v) => Some(v),
            Quantity::Param => None,
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::Value(v) => write!(f, "{v}"),
            Quantity::Param => f.write_str("?"),
        }
    }
}

impl From<Rational> for Quantity {
    fn from(v: Rational) -> Quantity {
        Quantity::Value(v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessingSpec {
    pub name: String,
    pub wcet: Quantity,
    /// Relative period PP.
    pub period: Rational,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

/// Runs `processing` in the cycles whose index is `residue` modulo `modulus`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Slot {
    pub processing: String,
    pub residue: u32,
    pub modulus: u32,
}

impl Slot {
    pub fn runs_in(&self, cycle: u64) -> bool {
        self.modulus != 0 && cycle % u64::from(self.modulus) == u64::from(self.residue)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreadSpec {
    pub name: String,
    /// Smaller value means higher priority.
    pub priority: u32,
    pub period: Rational,
    pub offset: Quantity,
    pub deadline: Quantity,
    pub maf: Rational,
    pub slots: Vec<Slot>,
}

impl ThreadSpec {
    /// Number of cycles in one major frame (0 if the frame is not a multiple
    /// of the period).
    pub fn cycles(&self) -> u64 {
        if self.period.signum() <= 0 {
            return 0;
        }
        let k = &self.maf / &self.period;
        if k.is_integer() && k.signum() > 0 {
            k.numer().to_i64().map(|v| v as u64).unwrap_or(0)
        } else {
            0
        }
    }

    /// Processings executed in `cycle`, in slot order.
    pub fn cycle_work(&self, cycle: u64) -> Vec<&str> {
        self.slots
            .iter()
            .filter(|s| s.runs_in(cycle))
            .map(|s| s.processing.as_str())
            .collect()
    }

    pub fn hosts(&self, processing: &str) -> bool {
        self.slots.iter().any(|s| s.processing == processing)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    /// The host thread of the last processing finishes its cycle work.
    #[default]
    Completion,
    /// The host thread publishes its outputs at its deadline.
    Publication,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReactivitySpec {
    pub name: String,
    /// Bus datum read by the first processing, if written in the path.
    pub source: Option<String>,
    pub chain: Vec<String>,
    /// Bus datum written by the last processing, if written in the path.
    pub sink: Option<String>,
    pub bound: Rational,
    pub endpoint: Endpoint,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub processings: Vec<ProcessingSpec>,
    pub threads: Vec<ThreadSpec>,
    pub reactivities: Vec<ReactivitySpec>,
}

/// Name of the synthesis parameter standing for a thread offset.
pub fn offset_param(thread: &str) -> String {
    format!("offset{thread}")
}

pub fn deadline_param(thread: &str) -> String {
    format!("deadline{thread}")
}

pub fn wcet_param(processing: &str) -> String {
    format!("wcet{processing}")
}

impl SystemSpec {
    pub fn processing(&self, name: &str) -> Option<&ProcessingSpec> {
        self.processings.iter().find(|p| p.name == name)
    }

    pub fn thread(&self, name: &str) -> Option<&ThreadSpec> {
        self.threads.iter().find(|t| t.name == name)
    }

    pub fn reactivity(&self, name: &str) -> Option<&ReactivitySpec> {
        self.reactivities.iter().find(|r| r.name == name)
    }

    /// Index of the thread hosting `processing`.
    pub fn host_of(&self, processing: &str) -> Option<usize> {
        self.threads.iter().position(|t| t.hosts(processing))
    }

    /// Every data name mentioned as an input or output.
    pub fn data_names(&self) -> BTreeSet<String> {
        self.processings
            .iter()
            .flat_map(|p| p.inputs.iter().chain(&p.outputs))
            .cloned()
            .collect()
    }

    /// Names of all quantities that may become parameters, in the canonical
    /// registration order (offsets and deadlines per thread, then WCETs).
    pub fn parameter_candidates(&self) -> Vec<String> {
        let mut out = Vec::new();
        for t in &self.threads {
            out.push(offset_param(&t.name));
            out.push(deadline_param(&t.name));
        }
        for p in &self.processings {
            out.push(wcet_param(&p.name));
        }
        out
    }

    /// Quantities written `?` in the specification.
    pub fn open_parameters(&self) -> Vec<String> {
        let mut out = Vec::new();
        for t in &self.threads {
            if t.offset == Quantity::Param {
                out.push(offset_param(&t.name));
            }
            if t.deadline == Quantity::Param {
                out.push(deadline_param(&t.name));
            }
        }
        for p in &self.processings {
            if p.wcet == Quantity::Param {
                out.push(wcet_param(&p.name));
            }
        }
        out
    }

    /// Current value of a parameter candidate, if concrete.
    pub fn quantity(&self, param: &str) -> Option<&Quantity> {
        for t in &self.threads {
            if param == offset_param(&t.name) {
                return Some(&t.offset);
            }
            if param == deadline_param(&t.name) {
                return Some(&t.deadline);
            }
        }
        self.processings
            .iter()
            .find(|p| param == wcet_param(&p.name))
            .map(|p| &p.wcet)
    }

    fn quantity_mut(&mut self, param: &str) -> Option<&mut Quantity> {
        for t in &mut self.threads {
            if param == offset_param(&t.name) {
                return Some(&mut t.offset);
            }
            if param == deadline_param(&t.name) {
                return Some(&mut t.deadline);
            }
        }
        self.processings
            .iter_mut()
            .find(|p| param == wcet_param(&p.name))
            .map(|p| &mut p.wcet)
    }

    /// Copy with the given quantities fixed. Unknown names are returned as
    /// an error.
    pub fn with_values(&self, values: &BTreeMap<String, Rational>) -> Result<SystemSpec, String> {
        let mut s = self.clone();
        for (k, v) in values {
            let slot = s.quantity_mut(k).ok_or_else(|| k.clone())?;
            *slot = Quantity::Value(v.clone());
        }
        Ok(s)
    }

    /// Copy with the given quantities turned into parameters.
    pub fn with_params<'a>(
        &self,
        names: impl IntoIterator<Item = &'a String>,
    ) -> Result<SystemSpec, String> {
        let mut s = self.clone();
        for k in names {
            *s.quantity_mut(k).ok_or_else(|| k.clone())? = Quantity::Param;
        }
        Ok(s)
    }

    pub fn is_closed(&self) -> bool {
        self.open_parameters().is_empty()
    }

    /// Least common multiple of the major frames.
    pub fn hyperperiod(&self) -> Rational {
        let mut l: Option<Rational> = None;
        for t in &self.threads {
            l = Some(match l {
                None => t.maf.clone(),
                Some(acc) => rational_lcm(&acc, &t.maf),
            });
        }
        l.unwrap_or_else(Rational::zero)
    }
}

/// Least common multiple of two positive rationals.
pub fn rational_lcm(a: &Rational, b: &Rational) -> Rational {
    // lcm(p/q, r/s) = lcm(p, r) / gcd(q, s) for fractions in lowest terms.
    let num = a.numer().lcm(b.numer());
    let den = a.denom().gcd(b.denom());
    Rational::new(num, den).expect("denominators are positive")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lcm_of_rationals() {
        let q = |a, b| Rational::from_frac(a, b);
        assert_eq!(rational_lcm(&q(10, 1), &q(60, 1)), q(60, 1));
        assert_eq!(rational_lcm(&q(1, 2), &q(1, 3)), q(1, 1));
        assert_eq!(rational_lcm(&q(3, 2), &q(5, 1)), q(15, 1));
    }

    #[test]
    fn slot_predicate() {
        let s = Slot {
            processing: "C".into(),
            residue: 1,
            modulus: 2,
        };
        assert!(!s.runs_in(0) && s.runs_in(1) && s.runs_in(7));
    }
}
