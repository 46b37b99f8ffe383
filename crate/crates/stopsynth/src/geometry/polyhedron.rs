use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::constraint::{LinearConstraint, Rel};
use super::fm;
use super::int::Int;
use super::rational::Rational;
use super::registry::{Registry, VarId, VarKind};
use super::GeometryError;

/// Ordered, shared set of variables a polyhedron ranges over.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Universe(Arc<Vec<VarId>>);

impl Universe {
    pub fn new(vars: impl IntoIterator<Item = VarId>) -> Universe {
        let mut v: Vec<VarId> = vars.into_iter().collect();
        v.sort();
        v.dedup();
        Universe(Arc::new(v))
    }

    pub fn vars(&self) -> &[VarId] {
        &self.0
    }

    pub fn contains(&self, v: VarId) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn without(&self, drop: &[VarId]) -> Universe {
        Universe::new(self.0.iter().copied().filter(|v| !drop.contains(v)))
    }

    pub fn params(&self) -> Universe {
        Universe::new(self.0.iter().copied().filter(|v| v.is_param()))
    }

    pub fn same(&self, other: &Universe) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl fmt::Debug for Universe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

/// Point assignment used for membership tests.
pub type Point = BTreeMap<VarId, Rational>;

/// Conjunction of linear constraints in canonical form. `empty` is set when
/// infeasibility was detected syntactically; semantic emptiness needs
/// [`Polyhedron::is_empty`].
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Polyhedron {
    universe: Universe,
    rows: Vec<LinearConstraint>,
    empty: bool,
}

fn delta_var() -> VarId {
    VarId::DELTA
}

impl Polyhedron {
    pub fn top(universe: Universe) -> Polyhedron {
        Polyhedron {
            universe,
            rows: Vec::new(),
            empty: false,
        }
    }

    pub fn bottom(universe: Universe) -> Polyhedron {
        Polyhedron {
            universe,
            rows: Vec::new(),
            empty: true,
        }
    }

    pub fn new(
        universe: Universe,
        constraints: impl IntoIterator<Item = LinearConstraint>,
    ) -> Result<Polyhedron, GeometryError> {
        let rows: Vec<LinearConstraint> = constraints.into_iter().collect();
        for r in &rows {
            for v in r.vars() {
                if !universe.contains(v) {
                    return Err(GeometryError::VariableOutsideUniverse(v));
                }
            }
        }
        Ok(Polyhedron::canonical(universe, rows))
    }

    pub(crate) fn canonical(universe: Universe, rows: Vec<LinearConstraint>) -> Polyhedron {
        match fm::reduce(rows) {
            None => Polyhedron::bottom(universe),
            Some(mut rows) => {
                if rows.len() > fm::REDUNDANCY_THRESHOLD {
                    rows = fm::remove_redundant(rows);
                }
                Polyhedron {
                    universe,
                    rows,
                    empty: false,
                }
            }
        }
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.rows
    }

    pub fn is_syntactically_empty(&self) -> bool {
        self.empty
    }

    pub fn is_top(&self) -> bool {
        !self.empty && self.rows.is_empty()
    }

    fn check_universe(&self, other: &Polyhedron) -> Result<(), GeometryError> {
        if self.universe.same(&other.universe) {
            Ok(())
        } else {
            Err(GeometryError::UniverseMismatch)
        }
    }

    pub fn with_constraint(&self, c: LinearConstraint) -> Result<Polyhedron, GeometryError> {
        for v in c.vars() {
            if !self.universe.contains(v) {
                return Err(GeometryError::VariableOutsideUniverse(v));
            }
        }
        Ok(self.with_rows(std::iter::once(c)))
    }

    pub(crate) fn with_rows(
        &self,
        extra: impl IntoIterator<Item = LinearConstraint>,
    ) -> Polyhedron {
        if self.empty {
            return self.clone();
        }
        let mut rows = self.rows.clone();
        rows.extend(extra);
        Polyhedron::canonical(self.universe.clone(), rows)
    }

    pub fn intersect(&self, other: &Polyhedron) -> Result<Polyhedron, GeometryError> {
        self.check_universe(other)?;
        if self.empty || other.empty {
            return Ok(Polyhedron::bottom(self.universe.clone()));
        }
        Ok(self.with_rows(other.rows.iter().cloned()))
    }

    pub fn is_empty(&self) -> bool {
        self.empty || fm::is_empty(self.rows.clone())
    }

    /// Some point of the polyhedron over its whole universe, `None` if empty.
    pub fn sample_point(&self) -> Option<Point> {
        if self.empty {
            return None;
        }
        let found = fm::sample_point(self.rows.clone())?;
        let mut point: Point = self
            .universe
            .vars()
            .iter()
            .map(|v| (*v, Rational::zero()))
            .collect();
        point.extend(found);
        Some(point)
    }

    /// Exact projection removing `vars` from the universe.
    pub fn eliminate(&self, vars: &[VarId]) -> Result<Polyhedron, GeometryError> {
        for v in vars {
            if !self.universe.contains(*v) {
                return Err(GeometryError::VariableOutsideUniverse(*v));
            }
        }
        let mut out = self.forget(vars);
        out.universe = self.universe.without(vars);
        Ok(out)
    }

    /// Projects `vars` out but keeps them in the universe (unconstrained).
    pub fn forget(&self, vars: &[VarId]) -> Polyhedron {
        if self.empty {
            return self.clone();
        }
        if !self
            .rows
            .iter()
            .any(|r| vars.iter().any(|v| r.mentions(*v)))
        {
            return self.clone();
        }
        match fm::eliminate_set(self.rows.clone(), vars) {
            None => Polyhedron::bottom(self.universe.clone()),
            Some(rows) => Polyhedron::canonical(self.universe.clone(), rows),
        }
    }

    /// Stopwatch time elapse. `rates` maps clocks to 0 (stopped) or 1; clocks
    /// absent from the map and all parameters have rate 0.
    pub fn time_elapse(&self, rates: &BTreeMap<VarId, u8>) -> Polyhedron {
        let running: Vec<VarId> = rates
            .iter()
            .filter(|(_, r)| **r != 0)
            .map(|(v, _)| *v)
            .collect();
        self.elapse_running(&running)
    }

    /// Time elapse where exactly the clocks in `running` advance.
    pub fn elapse_running(&self, running: &[VarId]) -> Polyhedron {
        if self.empty || running.is_empty() {
            return self.clone();
        }
        let delta = delta_var();
        let mut rows = Vec::with_capacity(self.rows.len() + 1);
        for r in &self.rows {
            let mut s = Int::ZERO;
            for (v, a) in &r.terms {
                if running.contains(v) {
                    s = &s + a;
                }
            }
            if s.is_zero() {
                rows.push(r.clone());
            } else {
                let mut terms = r.terms.clone();
                terms.push((delta, -&s));
                rows.push(LinearConstraint::from_ints(
                    terms,
                    r.constant.clone(),
                    r.rel,
                ));
            }
        }
        rows.push(LinearConstraint::from_ints(
            vec![(delta, Int::from(-1))],
            Int::ZERO,
            Rel::Le,
        ));
        match fm::eliminate_var(rows, delta) {
            None => Polyhedron::bottom(self.universe.clone()),
            Some(rows) => Polyhedron::canonical(self.universe.clone(), rows),
        }
    }

    pub fn reset(&self, clocks: &[VarId]) -> Result<Polyhedron, GeometryError> {
        for c in clocks {
            if c.kind() != VarKind::Clock {
                return Err(GeometryError::NotAClock(*c));
            }
            if !self.universe.contains(*c) {
                return Err(GeometryError::VariableOutsideUniverse(*c));
            }
        }
        Ok(self.reset_unchecked(clocks))
    }

    pub(crate) fn reset_unchecked(&self, clocks: &[VarId]) -> Polyhedron {
        if clocks.is_empty() || self.empty {
            return self.clone();
        }
        let f = self.forget(clocks);
        f.with_rows(
            clocks
                .iter()
                .map(|c| LinearConstraint::from_ints(vec![(*c, Int::ONE)], Int::ZERO, Rel::Eq)),
        )
    }

    pub fn project_to_params(&self) -> Polyhedron {
        let drop: Vec<VarId> = self
            .universe
            .vars()
            .iter()
            .copied()
            .filter(|v| !v.is_param())
            .collect();
        self.eliminate(&drop).expect("own universe")
    }

    /// `other ⊆ self`.
    pub fn includes(&self, other: &Polyhedron) -> Result<bool, GeometryError> {
        self.check_universe(other)?;
        Ok(self.includes_unchecked(other))
    }

    pub(crate) fn includes_unchecked(&self, other: &Polyhedron) -> bool {
        if other.empty {
            return true;
        }
        if self.empty {
            return other.is_empty();
        }
        for c in &self.rows {
            if other.rows.binary_search(c).is_ok() {
                continue;
            }
            for n in c.negate() {
                let mut rows = other.rows.clone();
                rows.push(n);
                if !fm::is_empty(rows) {
                    return false;
                }
            }
        }
        true
    }

    /// Substitutes parameter values; the result ranges over the remaining variables.
    pub fn instantiate(
        &self,
        valuation: &BTreeMap<VarId, Rational>,
    ) -> Result<Polyhedron, GeometryError> {
        for (v, x) in valuation {
            if x.is_negative() {
                return Err(GeometryError::NegativeValuation(*v));
            }
        }
        let params: Vec<VarId> = self
            .universe
            .vars()
            .iter()
            .copied()
            .filter(|v| v.is_param())
            .collect();
        for p in &params {
            if !valuation.contains_key(p) {
                return Err(GeometryError::MissingValue(*p));
            }
        }
        let universe = self.universe.without(&params);
        if self.empty {
            return Ok(Polyhedron::bottom(universe));
        }
        let rows = self.rows.iter().map(|r| substitute(r, valuation)).collect();
        Ok(Polyhedron::canonical(universe, rows))
    }

    pub fn contains_point(&self, point: &Point) -> Result<bool, GeometryError> {
        if self.empty {
            return Ok(false);
        }
        for r in &self.rows {
            if !r.holds_at(|v| point.get(&v).cloned())? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn render(&self, reg: &Registry) -> String {
        if self.empty {
            return "false".into();
        }
        if self.rows.is_empty() {
            return "true".into();
        }
        self.rows
            .iter()
            .map(|r| r.render(reg))
            .collect::<Vec<_>>()
            .join(" AND ")
    }
}

/// Replaces the variables of `valuation` occurring in `r` by their values.
pub(crate) fn substitute(
    r: &LinearConstraint,
    valuation: &BTreeMap<VarId, Rational>,
) -> LinearConstraint {
    let mut coeffs = Vec::new();
    let mut constant = Rational::from(r.constant.clone());
    for (v, a) in &r.terms {
        let a = Rational::from(a.clone());
        match valuation.get(v) {
            Some(x) => constant = &constant + &(&a * x),
            None => coeffs.push((*v, a)),
        }
    }
    LinearConstraint::new(coeffs, constant, r.rel)
}

impl fmt::Debug for Polyhedron {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.empty {
            return write!(f, "⊥");
        }
        f.debug_list().entries(self.rows.iter()).finish()
    }
}
