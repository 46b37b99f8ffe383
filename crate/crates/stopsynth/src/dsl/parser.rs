use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use crate::geometry::Rational;
use crate::model::{
    validate, Endpoint, ProcessingSpec, Quantity, ReactivitySpec, Severity, Slot, SystemSpec,
    ThreadSpec,
};

use super::lexer::{tokenize, Token, TokenKind};
use super::{ParseDiagnostic, ParseOutcome, SourceDocument};

type Pos = (usize, usize);

struct Parser {
    tokens: Vec<Token>,
    at: usize,
}

type PResult<T> = Result<T, ParseDiagnostic>;

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.at]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if t.kind != TokenKind::Eof {
            self.at += 1;
        }
        t
    }

    fn unexpected(t: &Token, wanted: &str) -> ParseDiagnostic {
        ParseDiagnostic::error(
            format!("expected {wanted}, found {}", t.kind.describe()),
            t.line,
            t.column,
        )
    }

    fn keyword(&mut self, kw: &str) -> PResult<()> {
        let t = self.next();
        match &t.kind {
            TokenKind::Ident(s) if s == kw => Ok(()),
            _ => Err(Self::unexpected(&t, &format!("`{kw}`"))),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().kind, TokenKind::Ident(s) if s == kw)
    }

    fn name(&mut self) -> PResult<(String, Pos)> {
        let t = self.next();
        match t.kind {
            TokenKind::Ident(s) => Ok((s, (t.line, t.column))),
            _ => Err(Self::unexpected(&t, "a name")),
        }
    }

    fn punct(&mut self, kind: TokenKind) -> PResult<()> {
        let t = self.next();
        if t.kind == kind {
            Ok(())
        } else {
            Err(Self::unexpected(&t, &kind.describe()))
        }
    }

    fn number(&mut self) -> PResult<Rational> {
        let t = self.next();
        match &t.kind {
            TokenKind::Number(s) => Rational::from_str(s).map_err(|_| {
                ParseDiagnostic::error(format!("malformed number `{s}`"), t.line, t.column)
            }),
            _ => Err(Self::unexpected(&t, "a number")),
        }
    }

    fn quantity(&mut self) -> PResult<Quantity> {
        if self.peek().kind == TokenKind::Question {
            self.next();
            return Ok(Quantity::Param);
        }
        Ok(Quantity::Value(self.number()?))
    }

    fn integer(&mut self) -> PResult<u32> {
        let t = self.next();
        match &t.kind {
            TokenKind::Number(s) => s.parse().map_err(|_| {
                ParseDiagnostic::error(
                    format!("expected an integer, found `{s}`"),
                    t.line,
                    t.column,
                )
            }),
            _ => Err(Self::unexpected(&t, "an integer")),
        }
    }

    /// Names up to (not including) one of `stops` or a closing brace.
    fn names_until(&mut self, stops: &[&str]) -> PResult<Vec<String>> {
        let mut out = Vec::new();
        loop {
            match &self.peek().kind {
                TokenKind::Ident(s) if !stops.contains(&s.as_str()) => out.push(self.name()?.0),
                _ => break,
            }
        }
        if out.is_empty() {
            return Err(Self::unexpected(self.peek(), "a data name"));
        }
        Ok(out)
    }
}

struct RawProcessing {
    name: String,
    pos: Pos,
    period: Rational,
    inputs: Vec<String>,
    outputs: Vec<String>,
}

struct RawReactivity {
    name: String,
    pos: Pos,
    path: Vec<(String, Pos)>,
    bound: Rational,
    endpoint: Endpoint,
}

#[derive(Default)]
struct Raw {
    processings: Vec<RawProcessing>,
    wcets: Vec<(String, Pos, Quantity)>,
    threads: Vec<(ThreadSpec, Pos, Vec<Pos>)>,
    reactivities: Vec<RawReactivity>,
}

fn parse_items(p: &mut Parser) -> PResult<Raw> {
    let mut raw = Raw::default();
    loop {
        let t = p.next();
        let kw = match &t.kind {
            TokenKind::Eof => return Ok(raw),
            TokenKind::Ident(s) => s.clone(),
            _ => {
                return Err(Parser::unexpected(
                    &t,
                    "`processing`, `wcet`, `thread` or `reactivity`",
                ))
            }
        };
        match kw.as_str() {
            "processing" => {
                let (name, pos) = p.name()?;
                p.punct(TokenKind::LBrace)?;
                p.keyword("period")?;
                let period = p.number()?;
                let mut inputs = Vec::new();
                let mut outputs = Vec::new();
                if p.at_keyword("in") {
                    p.next();
                    inputs = p.names_until(&["out"])?;
                }
                if p.at_keyword("out") {
                    p.next();
                    outputs = p.names_until(&[])?;
                }
                p.punct(TokenKind::RBrace)?;
                raw.processings.push(RawProcessing {
                    name,
                    pos,
                    period,
                    inputs,
                    outputs,
                });
            }
            "wcet" => {
                let (name, pos) = p.name()?;
                let q = p.quantity()?;
                raw.wcets.push((name, pos, q));
            }
            "thread" => {
                let (name, pos) = p.name()?;
                p.punct(TokenKind::LBrace)?;
                p.keyword("period")?;
                let period = p.number()?;
                p.keyword("offset")?;
                let offset = p.quantity()?;
                p.keyword("deadline")?;
                let deadline = p.quantity()?;
                p.keyword("maf")?;
                let maf = p.number()?;
                p.keyword("priority")?;
                let priority = p.integer()?;
                let mut slots = Vec::new();
                let mut slot_pos = Vec::new();
                loop {
                    if p.peek().kind == TokenKind::RBrace && !slots.is_empty() {
                        p.next();
                        break;
                    }
                    p.keyword("run")?;
                    let (processing, ppos) = p.name()?;
                    p.keyword("when")?;
                    let residue = p.integer()?;
                    p.keyword("mod")?;
                    let modulus = p.integer()?;
                    slots.push(Slot {
                        processing,
                        residue,
                        modulus,
                    });
                    slot_pos.push(ppos);
                }
                raw.threads.push((
                    ThreadSpec {
                        name,
                        priority,
                        period,
                        offset,
                        deadline,
                        maf,
                        slots,
                    },
                    pos,
                    slot_pos,
                ));
            }
            "reactivity" => {
                let (name, pos) = p.name()?;
                p.punct(TokenKind::LBrace)?;
                p.keyword("path")?;
                let mut path = vec![p.name()?];
                while p.peek().kind == TokenKind::Arrow {
                    p.next();
                    path.push(p.name()?);
                }
                if path.len() < 2 {
                    return Err(Parser::unexpected(p.peek(), "`->`"));
                }
                p.keyword("bound")?;
                let bound = p.number()?;
                let mut endpoint = Endpoint::Completion;
                if p.at_keyword("endpoint") {
                    p.next();
                    let t = p.next();
                    endpoint = match &t.kind {
                        TokenKind::Ident(s) if s == "completion" => Endpoint::Completion,
                        TokenKind::Ident(s) if s == "publication" => Endpoint::Publication,
                        _ => return Err(Parser::unexpected(&t, "`completion` or `publication`")),
                    };
                }
                p.punct(TokenKind::RBrace)?;
                raw.reactivities.push(RawReactivity {
                    name,
                    pos,
                    path,
                    bound,
                    endpoint,
                });
            }
            _ => {
                return Err(Parser::unexpected(
                    &t,
                    "`processing`, `wcet`, `thread` or `reactivity`",
                ))
            }
        }
    }
}

fn err(errors: &mut Vec<ParseDiagnostic>, pos: Pos, msg: String) {
    errors.push(ParseDiagnostic::error(msg, pos.0, pos.1));
}

/// Turns the raw items into a specification, reporting name errors at the
/// offending token.
fn resolve(raw: Raw) -> Result<(SystemSpec, BTreeMap<String, Pos>), Vec<ParseDiagnostic>> {
    let mut errors = Vec::new();
    let mut decl: BTreeMap<String, Pos> = BTreeMap::new();
    let mut declare = |errors: &mut Vec<ParseDiagnostic>, name: &str, pos: Pos, what: &str| {
        if decl.contains_key(name) {
            err(
                errors,
                pos,
                format!("{what} `{name}` clashes with an earlier declaration"),
            );
        } else {
            decl.insert(name.to_string(), pos);
        }
    };
    for p in &raw.processings {
        declare(&mut errors, &p.name, p.pos, "processing");
    }
    for (t, pos, _) in &raw.threads {
        declare(&mut errors, &t.name, *pos, "thread");
    }
    for r in &raw.reactivities {
        declare(&mut errors, &r.name, r.pos, "reactivity");
    }

    let proc_names: BTreeSet<&str> = raw.processings.iter().map(|p| p.name.as_str()).collect();
    let data: BTreeSet<&str> = raw
        .processings
        .iter()
        .flat_map(|p| p.inputs.iter().chain(&p.outputs))
        .map(String::as_str)
        .collect();

    let mut wcets: BTreeMap<&str, Quantity> = BTreeMap::new();
    for (name, pos, q) in &raw.wcets {
        if !proc_names.contains(name.as_str()) {
            err(
                &mut errors,
                *pos,
                format!("WCET given for unknown processing `{name}`"),
            );
        } else if wcets.insert(name, q.clone()).is_some() {
            err(&mut errors, *pos, format!("WCET of `{name}` given twice"));
        }
    }
    let mut processings = Vec::new();
    for p in &raw.processings {
        let wcet = match wcets.get(p.name.as_str()) {
            Some(q) => q.clone(),
            None => {
                err(
                    &mut errors,
                    p.pos,
                    format!("no WCET given for processing `{}`", p.name),
                );
                Quantity::Param
            }
        };
        processings.push(ProcessingSpec {
            name: p.name.clone(),
            wcet,
            period: p.period.clone(),
            inputs: p.inputs.clone(),
            outputs: p.outputs.clone(),
        });
    }

    let mut threads = Vec::new();
    for (t, _, slot_pos) in raw.threads {
        for (s, pos) in t.slots.iter().zip(&slot_pos) {
            if !proc_names.contains(s.processing.as_str()) {
                err(
                    &mut errors,
                    *pos,
                    format!("unknown processing `{}`", s.processing),
                );
            }
        }
        threads.push(t);
    }

    let mut reactivities = Vec::new();
    for r in raw.reactivities {
        let last = r.path.len() - 1;
        let mut source = None;
        let mut sink = None;
        let mut chain = Vec::new();
        for (i, (name, pos)) in r.path.iter().enumerate() {
            if proc_names.contains(name.as_str()) {
                chain.push(name.clone());
            } else if (i == 0 || i == last) && data.contains(name.as_str()) {
                if i == 0 {
                    source = Some(name.clone());
                } else {
                    sink = Some(name.clone());
                }
            } else if i == 0 || i == last {
                err(
                    &mut errors,
                    *pos,
                    format!("`{name}` is neither a processing nor a data name"),
                );
            } else {
                err(&mut errors, *pos, format!("unknown processing `{name}`"));
            }
        }
        reactivities.push(ReactivitySpec {
            name: r.name,
            source,
            chain,
            sink,
            bound: r.bound,
            endpoint: r.endpoint,
        });
    }

    if errors.is_empty() {
        Ok((
            SystemSpec {
                processings,
                threads,
                reactivities,
            },
            decl,
        ))
    } else {
        Err(errors)
    }
}

pub fn parse(doc: &SourceDocument) -> Result<ParseOutcome, Vec<ParseDiagnostic>> {
    let tokens = tokenize(&doc.text).map_err(|e| vec![e])?;
    let mut p = Parser { tokens, at: 0 };
    let raw = parse_items(&mut p).map_err(|e| vec![e])?;
    let (spec, decl) = resolve(raw)?;
    let mut errors = Vec::new();
    let mut warnings = Vec::new();
    for d in validate(&spec) {
        let (line, column) = decl.get(&d.subject).copied().unwrap_or((1, 1));
        let diag = ParseDiagnostic {
            severity: d.severity,
            message: format!("{}: {}", d.subject, d.message),
            line,
            column,
        };
        match d.severity {
            Severity::Error => errors.push(diag),
            Severity::Warning => warnings.push(diag),
        }
    }
    if errors.is_empty() {
        Ok(ParseOutcome { spec, warnings })
    } else {
        errors.extend(warnings);
        Err(errors)
    }
}
