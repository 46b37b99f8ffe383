//! Randomised checks of the polyhedral library against a small, separately
//! written Fourier-Motzkin decision procedure over `num_rational`.
//!
//! Every check works in a fixed four-variable universe: two clocks `x`, `y`
//! and two parameters `a`, `b`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;

use num_rational::BigRational;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use stopsynth::geometry::{
    region_equal, LinearConstraint, Point, Polyhedron, Rational, Region, Registry, Rel, Universe,
    VarId, VarKind,
};

pub const NV: usize = 4;
const CLOCKS: [usize; 2] = [0, 1];

type Q = BigRational;

fn q(n: i64, d: i64) -> Q {
    Q::new(n.into(), d.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Le,
    Lt,
    Eq,
}

/// `coef . v + constant  kind  0`
#[derive(Clone, Debug)]
pub struct Row {
    pub coef: [i64; NV],
    pub constant: i64,
    pub kind: Kind,
}

/// A point given as numerator/denominator pairs.
pub type Pt = [(i64, i64); NV];

pub struct Fixture {
    pub vars: [VarId; NV],
    pub universe: Universe,
}

impl Fixture {
    pub fn new() -> Fixture {
        let mut reg = Registry::new();
        let vars = [
            reg.register("x", VarKind::Clock).unwrap(),
            reg.register("y", VarKind::Clock).unwrap(),
            reg.register("a", VarKind::Parameter).unwrap(),
            reg.register("b", VarKind::Parameter).unwrap(),
        ];
        Fixture {
            vars,
            universe: Universe::new(vars),
        }
    }

    fn constraint(&self, r: &Row) -> LinearConstraint {
        let rel = match r.kind {
            Kind::Le => Rel::Le,
            Kind::Lt => Rel::Lt,
            Kind::Eq => Rel::Eq,
        };
        let terms = (0..NV)
            .filter(|&i| r.coef[i] != 0)
            .map(|i| (self.vars[i], Rational::from(r.coef[i])));
        LinearConstraint::new(terms, Rational::from(r.constant), rel)
    }

    pub fn poly(&self, rows: &[Row]) -> Polyhedron {
        Polyhedron::new(
            self.universe.clone(),
            rows.iter().map(|r| self.constraint(r)),
        )
        .unwrap()
    }

    fn point(&self, p: &Pt, keep: impl Fn(usize) -> bool) -> Point {
        (0..NV)
            .filter(|&i| keep(i))
            .map(|i| (self.vars[i], Rational::from_frac(p[i].0, p[i].1)))
            .collect()
    }
}

impl Default for Fixture {
    fn default() -> Fixture {
        Fixture::new()
    }
}

// ---------------------------------------------------------------------------
// Oracle

/// Inequality `coef . v + constant < 0` (strict) or `<= 0`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Ineq {
    coef: Vec<Q>,
    constant: Q,
    strict: bool,
}

impl Ineq {
    /// Scales so that the first nonzero coefficient has absolute value one.
    fn normalized(mut self) -> Ineq {
        if let Some(lead) = self.coef.iter().find(|c| **c != q(0, 1)).cloned() {
            let s = if lead < q(0, 1) { -lead } else { lead };
            for c in &mut self.coef {
                *c = &*c / &s;
            }
            self.constant = &self.constant / &s;
        }
        self
    }
}

fn ineqs_of(rows: &[Row]) -> Vec<Ineq> {
    let mut out = Vec::new();
    for r in rows {
        let coef: Vec<Q> = r.coef.iter().map(|c| q(*c, 1)).collect();
        let constant = q(r.constant, 1);
        match r.kind {
            Kind::Le | Kind::Lt => out.push(Ineq {
                coef,
                constant,
                strict: r.kind == Kind::Lt,
            }),
            Kind::Eq => {
                out.push(Ineq {
                    coef: coef.clone(),
                    constant: constant.clone(),
                    strict: false,
                });
                out.push(Ineq {
                    coef: coef.iter().map(|c| -c).collect(),
                    constant: -constant,
                    strict: false,
                });
            }
        }
    }
    out
}

/// Replaces the variables with a known value by that value.
fn substitute(ineqs: &[Ineq], fixed: &[Option<Q>]) -> Vec<Ineq> {
    ineqs
        .iter()
        .map(|e| {
            let mut out = e.clone();
            for (i, f) in fixed.iter().enumerate() {
                if let Some(v) = f {
                    out.constant = &out.constant + &(&out.coef[i] * v);
                    out.coef[i] = q(0, 1);
                }
            }
            out
        })
        .collect()
}

/// Plain Fourier-Motzkin satisfiability over the rationals.
fn satisfiable(ineqs: Vec<Ineq>) -> bool {
    let zero = q(0, 1);
    let mut set: BTreeSet<Ineq> = ineqs.into_iter().map(Ineq::normalized).collect();
    let n = set.iter().next().map_or(0, |e| e.coef.len());
    for k in 0..n {
        let (mut lower, mut upper, mut rest) = (Vec::new(), Vec::new(), BTreeSet::new());
        for e in set {
            if e.coef[k] > zero {
                upper.push(e);
            } else if e.coef[k] < zero {
                lower.push(e);
            } else {
                rest.insert(e);
            }
        }
        for u in &upper {
            for l in &lower {
                let (su, sl) = (-&l.coef[k], u.coef[k].clone());
                let coef = u
                    .coef
                    .iter()
                    .zip(&l.coef)
                    .map(|(a, b)| &(a * &su) + &(b * &sl))
                    .collect();
                let constant = &(&u.constant * &su) + &(&l.constant * &sl);
                rest.insert(
                    Ineq {
                        coef,
                        constant,
                        strict: u.strict || l.strict,
                    }
                    .normalized(),
                );
            }
        }
        set = rest;
    }
    set.iter().all(|e| {
        if e.strict {
            e.constant < zero
        } else {
            e.constant <= zero
        }
    })
}

fn value(p: &Pt, i: usize) -> Q {
    q(p[i].0, p[i].1)
}

fn holds(r: &Row, p: &Pt) -> bool {
    let mut s = q(r.constant, 1);
    for i in 0..NV {
        s = &s + &(&q(r.coef[i], 1) * &value(p, i));
    }
    let zero = q(0, 1);
    match r.kind {
        Kind::Le => s <= zero,
        Kind::Lt => s < zero,
        Kind::Eq => s == zero,
    }
}

fn negations(r: &Row) -> Vec<Row> {
    let flip = |r: &Row| Row {
        coef: r.coef.map(|c| -c),
        constant: -r.constant,
        kind: Kind::Lt,
    };
    match r.kind {
        Kind::Le => vec![flip(r)],
        Kind::Lt => vec![Row {
            kind: Kind::Le,
            ..flip(r)
        }],
        Kind::Eq => vec![
            Row {
                kind: Kind::Lt,
                ..r.clone()
            },
            flip(r),
        ],
    }
}

// ---------------------------------------------------------------------------
// Generators

pub fn row() -> impl Strategy<Value = Row> {
    let coef = prop_oneof![3 => Just(0i64), 2 => -3i64..=3];
    (
        proptest::array::uniform4(coef),
        -8i64..=8,
        prop_oneof![4 => Just(Kind::Le), 3 => Just(Kind::Lt), 1 => Just(Kind::Eq)],
    )
        .prop_map(|(coef, constant, kind)| Row {
            coef,
            constant,
            kind,
        })
}

pub fn rows() -> impl Strategy<Value = Vec<Row>> {
    proptest::collection::vec(row(), 0..6)
}

pub fn point() -> impl Strategy<Value = Pt> {
    proptest::array::uniform4((-15i64..=15, prop_oneof![Just(1i64), Just(2), Just(3)]))
}

fn points() -> impl Strategy<Value = Vec<Pt>> {
    proptest::collection::vec(point(), 1..5)
}

fn mask(n: usize) -> impl Strategy<Value = Vec<bool>> {
    proptest::collection::vec(any::<bool>(), n).prop_filter("nonempty", |m| m.iter().any(|b| *b))
}

// ---------------------------------------------------------------------------
// Properties

fn ensure(cond: bool, what: impl Fn() -> String) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(what()))
    }
}

pub fn emptiness(rs: Vec<Row>) -> Result<(), TestCaseError> {
    let f = Fixture::new();
    let expected = !satisfiable(ineqs_of(&rs));
    ensure(f.poly(&rs).is_empty() == expected, || {
        format!("emptiness should be {expected}")
    })
}

pub fn witness(rs: Vec<Row>) -> Result<(), TestCaseError> {
    let f = Fixture::new();
    let expected = satisfiable(ineqs_of(&rs));
    let Some(found) = f.poly(&rs).sample_point() else {
        return ensure(!expected, || "no witness for a satisfiable system".into());
    };
    ensure(expected, || {
        format!("witness {found:?} for an unsatisfiable system")
    })?;
    let at: Vec<Q> = f
        .vars
        .iter()
        .map(|v| found[v].to_string().parse().unwrap())
        .collect();
    for r in &rs {
        let mut s = q(r.constant, 1);
        for (c, x) in r.coef.iter().zip(&at) {
            s = &s + &(&q(*c, 1) * x);
        }
        let zero = q(0, 1);
        let ok = match r.kind {
            Kind::Le => s <= zero,
            Kind::Lt => s < zero,
            Kind::Eq => s == zero,
        };
        ensure(ok, || format!("witness {at:?} violates {r:?}"))?;
    }
    Ok(())
}

pub fn membership((rs, pts): (Vec<Row>, Vec<Pt>)) -> Result<(), TestCaseError> {
    let f = Fixture::new();
    let p = f.poly(&rs);
    for pt in &pts {
        let expected = rs.iter().all(|r| holds(r, pt));
        ensure(
            p.contains_point(&f.point(pt, |_| true)).unwrap() == expected,
            || format!("membership of {pt:?}"),
        )?;
    }
    Ok(())
}

pub fn elimination((rs, drop, pts): (Vec<Row>, Vec<bool>, Vec<Pt>)) -> Result<(), TestCaseError> {
    let f = Fixture::new();
    let dropped: Vec<VarId> = (0..NV).filter(|&i| drop[i]).map(|i| f.vars[i]).collect();
    let proj = f.poly(&rs).eliminate(&dropped).unwrap();
    for pt in &pts {
        let fixed: Vec<Option<Q>> = (0..NV).map(|i| (!drop[i]).then(|| value(pt, i))).collect();
        let expected = satisfiable(substitute(&ineqs_of(&rs), &fixed));
        let got = proj.contains_point(&f.point(pt, |i| !drop[i])).unwrap();
        ensure(got == expected, || {
            format!("projection membership of {pt:?} should be {expected}")
        })?;
    }
    Ok(())
}

pub fn inclusion((outer, inner): (Vec<Row>, Vec<Row>)) -> Result<(), TestCaseError> {
    let f = Fixture::new();
    let expected = outer.iter().all(|c| {
        negations(c).iter().all(|n| {
            let mut rs = inner.clone();
            rs.push(n.clone());
            !satisfiable(ineqs_of(&rs))
        })
    });
    let got = f.poly(&outer).includes(&f.poly(&inner)).unwrap();
    ensure(got == expected, || {
        format!("inclusion should be {expected}")
    })
}

fn region(f: &Fixture, parts: &[Vec<Row>]) -> Region {
    Region::from_disjuncts(f.universe.clone(), parts.iter().map(|rs| f.poly(rs))).unwrap()
}

pub fn complement(
    (parts, within, pts): (Vec<Vec<Row>>, Vec<Row>, Vec<Pt>),
) -> Result<(), TestCaseError> {
    let f = Fixture::new();
    let r = region(&f, &parts);
    let w = f.poly(&within);
    let c = r.complement(&w).unwrap();
    for pt in &pts {
        let in_w = within.iter().all(|x| holds(x, pt));
        let in_r = parts.iter().any(|rs| rs.iter().all(|x| holds(x, pt)));
        let in_c = c.contains_point(&f.point(pt, |_| true)).unwrap();
        ensure(in_c == (in_w && !in_r), || {
            format!("complement membership of {pt:?}")
        })?;
    }
    let back = c.complement(&w).unwrap();
    let clipped = r.intersect(&Region::from_polyhedron(w)).unwrap();
    ensure(region_equal(&back, &clipped).unwrap(), || {
        "double complement differs".into()
    })
}

pub fn simplification((parts, pts): (Vec<Vec<Row>>, Vec<Pt>)) -> Result<(), TestCaseError> {
    let f = Fixture::new();
    let r = region(&f, &parts);
    let s = r.simplify();
    ensure(s.disjuncts().len() <= r.disjuncts().len(), || {
        "simplify added pieces".into()
    })?;
    for pt in &pts {
        let p = f.point(pt, |_| true);
        ensure(
            r.contains_point(&p).unwrap() == s.contains_point(&p).unwrap(),
            || format!("simplify changed {pt:?}"),
        )?;
    }
    ensure(region_equal(&r, &s).unwrap(), || {
        "simplify changed the region".into()
    })
}

/// `v` is reachable by letting time pass iff some `d >= 0` puts `v - d` on
/// the running clocks back inside the polyhedron.
pub fn elapse((rs, running, pts): (Vec<Row>, Vec<bool>, Vec<Pt>)) -> Result<(), TestCaseError> {
    let f = Fixture::new();
    let run: Vec<VarId> = CLOCKS
        .iter()
        .filter(|&&i| running[i])
        .map(|&i| f.vars[i])
        .collect();
    let e = f.poly(&rs).elapse_running(&run);
    for pt in &pts {
        let mut ineqs: Vec<Ineq> = ineqs_of(&rs)
            .into_iter()
            .map(|x| {
                let rate: Q = CLOCKS
                    .iter()
                    .filter(|&&i| running[i])
                    .fold(q(0, 1), |acc, &i| &acc - &x.coef[i]);
                let at = (0..NV).fold(x.constant.clone(), |acc, i| {
                    &acc + &(&x.coef[i] * &value(pt, i))
                });
                Ineq {
                    coef: vec![rate],
                    constant: at,
                    strict: x.strict,
                }
            })
            .collect();
        ineqs.push(Ineq {
            coef: vec![q(-1, 1)],
            constant: q(0, 1),
            strict: false,
        });
        let expected = satisfiable(ineqs);
        let got = e.contains_point(&f.point(pt, |_| true)).unwrap();
        ensure(got == expected, || {
            format!("elapse membership of {pt:?} should be {expected}")
        })?;
    }
    let twice = e.elapse_running(&run);
    ensure(
        twice.includes(&e).unwrap() && e.includes(&twice).unwrap(),
        || "elapse is not idempotent".into(),
    )
}

pub fn reset((rs, which, pts): (Vec<Row>, Vec<bool>, Vec<Pt>)) -> Result<(), TestCaseError> {
    let f = Fixture::new();
    let clocks: Vec<VarId> = CLOCKS
        .iter()
        .filter(|&&i| which[i])
        .map(|&i| f.vars[i])
        .collect();
    let r = f.poly(&rs).reset(&clocks).unwrap();
    for pt in &pts {
        let mut pt = *pt;
        // Half of the probes sit on the reset plane.
        if pt[3].0 % 2 == 0 {
            for &i in &CLOCKS {
                if which[i] {
                    pt[i] = (0, 1);
                }
            }
        }
        let zeroed = CLOCKS.iter().all(|&i| !which[i] || pt[i].0 == 0);
        let fixed: Vec<Option<Q>> = (0..NV)
            .map(|i| (!(i < 2 && which[i])).then(|| value(&pt, i)))
            .collect();
        let expected = zeroed && satisfiable(substitute(&ineqs_of(&rs), &fixed));
        let got = r.contains_point(&f.point(&pt, |_| true)).unwrap();
        ensure(got == expected, || {
            format!("reset membership of {pt:?} should be {expected}")
        })?;
    }
    Ok(())
}

pub fn canonical_form((rs, seed): (Vec<Row>, u64)) -> Result<(), TestCaseError> {
    let f = Fixture::new();
    let mut shuffled = rs.clone();
    let n = shuffled.len();
    for i in (1..n).rev() {
        let j = (seed.wrapping_mul(i as u64 + 7).rotate_left(i as u32) % (i as u64 + 1)) as usize;
        shuffled.swap(i, j);
    }
    ensure(f.poly(&rs) == f.poly(&shuffled), || {
        "constraint order changed the canonical form".into()
    })
}

// ---------------------------------------------------------------------------
// Driver

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    check: fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<u32, String>
where
    S::Value: Debug,
{
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&strategy, check)
        .map(|_| cases)
        .map_err(|e| e.to_string())
}

fn region_parts() -> impl Strategy<Value = Vec<Vec<Row>>> {
    proptest::collection::vec(proptest::collection::vec(row(), 0..4), 1..4)
}

pub const PROPERTIES: [&str; 10] = [
    "emptiness",
    "witness",
    "membership",
    "elimination",
    "inclusion",
    "complement",
    "simplification",
    "elapse",
    "reset",
    "canonical",
];

/// Runs one named property for `cases` random inputs.
pub fn run_property(name: &str, cases: u32) -> Result<u32, String> {
    match name {
        "emptiness" => run(cases, rows(), emptiness),
        "witness" => run(cases, rows(), witness),
        "membership" => run(cases, (rows(), points()), membership),
        "elimination" => run(cases, (rows(), mask(NV), points()), elimination),
        "inclusion" => run(cases, (rows(), rows()), inclusion),
        "complement" => run(cases, (region_parts(), rows(), points()), complement),
        "simplification" => run(cases, (region_parts(), points()), simplification),
        "elapse" => run(cases, (rows(), mask(2), points()), elapse),
        "reset" => run(cases, (rows(), mask(2), points()), reset),
        "canonical" => run(cases, (rows(), any::<u64>()), canonical_form),
        other => Err(format!("unknown property {other}")),
    }
}

/// Runs every property; returns the total number of cases that passed or
/// the failures.
pub fn run_all(cases_per_property: u32) -> Result<u32, BTreeMap<&'static str, String>> {
    let mut total = 0;
    let mut failures = BTreeMap::new();
    for name in PROPERTIES {
        match run_property(name, cases_per_property) {
            Ok(n) => total += n,
            Err(e) => {
                failures.insert(name, e);
            }
        }
    }
    if failures.is_empty() {
        Ok(total)
    } else {
        Err(failures)
    }
}
