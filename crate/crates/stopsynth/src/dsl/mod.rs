//! Plain-text problem format: processings with their data, WCETs, thread
//! allocations and reactivity paths.
//!
//! ```text
//! processing Navigation { period 5 in Meas out NavState }
//! wcet Navigation 1
//! thread T1 { period 5 offset ? deadline 5 maf 5 priority 1 run Navigation when 0 mod 1 }
//! reactivity R { path Meas -> Navigation -> ... bound 15 }
//! ```

mod lexer;
mod parser;
mod serialize;

use std::fmt;

use crate::model::{Severity, SystemSpec};

pub use parser::parse;
pub use serialize::serialize;

/// The flight-control case study shipped with the crate.
pub const CASE_STUDY: &str = include_str!("../../data/flight_control.sys");

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceDocument {
    pub name: String,
    pub text: String,
}

impl SourceDocument {
    pub fn new(name: impl Into<String>, text: impl Into<String>) -> SourceDocument {
        SourceDocument {
            name: name.into(),
            text: text.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub severity: Severity,
    pub message: String,
    pub line: usize,
    pub column: usize,
}

impl ParseDiagnostic {
    pub(crate) fn error(message: String, line: usize, column: usize) -> ParseDiagnostic {
        ParseDiagnostic {
            severity: Severity::Error,
            message,
            line,
            column,
        }
    }

    /// `file:line:col: severity: message`
    pub fn render(&self, file: &str) -> String {
        format!(
            "{file}:{}:{}: {}: {}",
            self.line, self.column, self.severity, self.message
        )
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {}: {}",
            self.line, self.column, self.severity, self.message
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseOutcome {
    pub spec: SystemSpec,
    pub warnings: Vec<ParseDiagnostic>,
}

/// Parses the bundled case study.
pub fn case_study() -> SystemSpec {
    parse(&SourceDocument::new("flight_control.sys", CASE_STUDY))
        .expect("bundled case study is valid")
        .spec
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Rational;
    use crate::model::Quantity;

    fn parse_str(text: &str) -> Result<ParseOutcome, Vec<ParseDiagnostic>> {
        parse(&SourceDocument::new("t.sys", text))
    }

    #[test]
    fn case_study_contents() {
        let s = case_study();
        assert_eq!(s.processings.len(), 4);
        assert_eq!(s.threads.len(), 3);
        assert_eq!(s.reactivities.len(), 3);
        let w: Vec<_> = s.processings.iter().map(|p| p.wcet.clone()).collect();
        let q = |v| Quantity::Value(Rational::from(v));
        assert_eq!(w, vec![q(1), q(3), q(5), q(15)]);
        let r2 = s.reactivity("R2").unwrap();
        assert_eq!(r2.chain, vec!["Navigation", "Control"]);
        assert_eq!(r2.source.as_deref(), Some("Meas"));
        assert_eq!(r2.sink.as_deref(), Some("Cmd"));
        assert_eq!(r2.bound, Rational::from(15));
    }

    #[test]
    fn question_marks_become_parameters() {
        let text = CASE_STUDY.replace("offset 0\n  deadline 5", "offset ?\n  deadline ?");
        let s = parse_str(&text).unwrap().spec;
        assert_eq!(s.open_parameters(), vec!["offsetT1", "deadlineT1"]);
    }

    #[test]
    fn literal_forms_agree() {
        for lit in ["0.5", "1/2", ".5"] {
            let text = CASE_STUDY.replace("wcet Navigation 1", &format!("wcet Navigation {lit}"));
            let s = parse_str(&text).unwrap().spec;
            assert_eq!(
                s.processing("Navigation").unwrap().wcet,
                Quantity::Value(Rational::from_frac(1, 2))
            );
        }
    }

    #[test]
    fn syntax_error_position() {
        let e = parse_str("processing P {\n  period 5\n  in A\n  out\n}").unwrap_err();
        assert_eq!((e[0].line, e[0].column), (5, 1));
        assert!(e[0].render("f.sys").starts_with("f.sys:5:1: error:"));
    }

    #[test]
    fn unknown_reference_position() {
        let text = CASE_STUDY.replace("run Monitoring when", "run Monitorin when");
        let e = parse_str(&text).unwrap_err();
        let line = text
            .lines()
            .position(|l| l.contains("Monitorin when"))
            .unwrap()
            + 1;
        assert_eq!(e[0].line, line);
        assert_eq!(e[0].column, 7);
    }

    #[test]
    fn semantic_errors_point_at_declarations() {
        let text = CASE_STUDY.replace("thread T2 {\n  period 20", "thread T2 {\n  period 12");
        let e = parse_str(&text).unwrap_err();
        assert!(e.iter().any(|d| d.message.contains("harmonic")));
        let line = text
            .lines()
            .position(|l| l.starts_with("thread T2"))
            .unwrap()
            + 1;
        assert!(e.iter().any(|d| d.line == line && d.column == 8));
    }

    #[test]
    fn broken_chain_is_rejected() {
        let text = CASE_STUDY.replace(
            "path Meas -> Navigation -> Monitoring",
            "path Meas -> Guidance -> Monitoring",
        );
        let text = text.replace(
            "in NavState\n  out Safeguard",
            "in Sensors\n  out Safeguard",
        );
        let e = parse_str(&text).unwrap_err();
        assert!(e.iter().any(|d| d.message.contains("consumed by")), "{e:?}");
    }

    #[test]
    fn round_trip_is_identity() {
        let s = case_study();
        let text = serialize(&s);
        assert_eq!(parse_str(&text).unwrap().spec, s);
        assert_eq!(serialize(&parse_str(&text).unwrap().spec), text);
    }
}
