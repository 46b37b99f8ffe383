use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::int::Int;
use super::rational::Rational;
use super::registry::{Registry, VarId};
use super::GeometryError;

/// Relation of a normalized constraint `term ⋈ 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rel {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
}

impl Rel {
    pub fn holds(self, sign: i32) -> bool {
        match self {
            Rel::Eq => sign == 0,
            Rel::Le => sign <= 0,
            Rel::Lt => sign < 0,
        }
    }

    /// Strictness of a nonnegative combination of two inequalities.
    pub fn combine(self, other: Rel) -> Rel {
        if self == Rel::Lt || other == Rel::Lt {
            Rel::Lt
        } else {
            Rel::Le
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Eq => "=",
            Rel::Le => "<=",
            Rel::Lt => "<",
        }
    }
}

/// Affine expression over registered variables with rational coefficients.
/// Only used to build constraints conveniently.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinExpr {
    coeffs: BTreeMap<VarId, Rational>,
    constant: Rational,
}

impl LinExpr {
    pub fn zero() -> LinExpr {
        LinExpr::default()
    }

    pub fn var(v: VarId) -> LinExpr {
        LinExpr::zero().plus_term(v, Rational::one())
    }

    pub fn constant(c: Rational) -> LinExpr {
        LinExpr {
            coeffs: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn int(c: i64) -> LinExpr {
        LinExpr::constant(Rational::from_int(c))
    }

    pub fn plus_term(mut self, v: VarId, c: Rational) -> LinExpr {
        let entry = self.coeffs.entry(v).or_insert_with(Rational::zero);
        *entry = &*entry + &c;
        if entry.is_zero() {
            self.coeffs.remove(&v);
        }
        self
    }

    pub fn plus(mut self, other: &LinExpr) -> LinExpr {
        for (v, c) in &other.coeffs {
            self = self.plus_term(*v, c.clone());
        }
        self.constant = &self.constant + &other.constant;
        self
    }

    pub fn minus(self, other: &LinExpr) -> LinExpr {
        self.plus(&other.scaled(&Rational::from_int(-1)))
    }

    pub fn scaled(&self, k: &Rational) -> LinExpr {
        if k.is_zero() {
            return LinExpr::zero();
        }
        LinExpr {
            coeffs: self.coeffs.iter().map(|(v, c)| (*v, c * k)).collect(),
            constant: &self.constant * k,
        }
    }

    pub fn le(&self, rhs: &LinExpr) -> LinearConstraint {
        LinearConstraint::from_expr(&self.clone().minus(rhs), Rel::Le)
    }

    pub fn lt(&self, rhs: &LinExpr) -> LinearConstraint {
        LinearConstraint::from_expr(&self.clone().minus(rhs), Rel::Lt)
    }

    pub fn ge(&self, rhs: &LinExpr) -> LinearConstraint {
        rhs.le(self)
    }

    pub fn gt(&self, rhs: &LinExpr) -> LinearConstraint {
        rhs.lt(self)
    }

    pub fn eq(&self, rhs: &LinExpr) -> LinearConstraint {
        LinearConstraint::from_expr(&self.clone().minus(rhs), Rel::Eq)
    }
}

/// `Σ coeff·var + constant ⋈ 0`, scaled to coprime integers. Equalities have a
/// positive leading coefficient. A constraint without terms is trivial.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LinearConstraint {
    pub(crate) terms: Vec<(VarId, Int)>,
    pub(crate) constant: Int,
    pub(crate) rel: Rel,
}

impl LinearConstraint {
    pub fn new(
        coeffs: impl IntoIterator<Item = (VarId, Rational)>,
        constant: Rational,
        rel: Rel,
    ) -> LinearConstraint {
        let mut expr = LinExpr::constant(constant);
        for (v, c) in coeffs {
            expr = expr.plus_term(v, c);
        }
        LinearConstraint::from_expr(&expr, rel)
    }

    pub fn from_expr(e: &LinExpr, rel: Rel) -> LinearConstraint {
        let mut den = e.constant.denom().clone();
        for c in e.coeffs.values() {
            den = den.lcm(c.denom());
        }
        let den_r = Rational::from(den);
        let scale = |r: &Rational| -> Int {
            let s = r * &den_r;
            debug_assert!(s.is_integer());
            s.numer().clone()
        };
        let terms = e.coeffs.iter().map(|(v, c)| (*v, scale(c))).collect();
        LinearConstraint::from_ints(terms, scale(&e.constant), rel)
    }

    /// Builds from integer data; `terms` must be sorted by variable with no zeros.
    pub(crate) fn from_ints(terms: Vec<(VarId, Int)>, constant: Int, rel: Rel) -> LinearConstraint {
        let mut c = LinearConstraint {
            terms,
            constant,
            rel,
        };
        c.normalize();
        c
    }

    fn normalize(&mut self) {
        let mut g = self.constant.abs();
        for (_, a) in &self.terms {
            if g.is_one() {
                break;
            }
            g = g.gcd(a);
        }
        if self.terms.is_empty() {
            // Trivial constraint: keep only the sign of the constant.
            self.constant = Int::from(self.constant.signum() as i64);
            return;
        }
        if !g.is_one() && !g.is_zero() {
            for (_, a) in &mut self.terms {
                *a = a.div_exact(&g);
            }
            self.constant = self.constant.div_exact(&g);
        }
        if self.rel == Rel::Eq && self.terms[0].1.is_negative() {
            for (_, a) in &mut self.terms {
                *a = -&*a;
            }
            self.constant = -&self.constant;
        }
    }

    pub fn relation(&self) -> Rel {
        self.rel
    }

    pub fn constant(&self) -> Rational {
        Rational::from(self.constant.clone())
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (VarId, Rational)> + '_ {
        self.terms
            .iter()
            .map(|(v, a)| (*v, Rational::from(a.clone())))
    }

    pub fn coefficient(&self, v: VarId) -> Option<&Int> {
        self.terms
            .binary_search_by(|(w, _)| w.cmp(&v))
            .ok()
            .map(|i| &self.terms[i].1)
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.terms.iter().map(|(v, _)| *v)
    }

    pub fn mentions(&self, v: VarId) -> bool {
        self.coefficient(v).is_some()
    }

    /// `Some(truth)` when the constraint has no variables.
    pub fn trivial(&self) -> Option<bool> {
        if self.terms.is_empty() {
            Some(self.rel.holds(self.constant.signum()))
        } else {
            None
        }
    }

    /// Complement as a disjunction (one or two constraints).
    pub fn negate(&self) -> Vec<LinearConstraint> {
        let neg_terms: Vec<(VarId, Int)> = self.terms.iter().map(|(v, a)| (*v, -a)).collect();
        let neg_const = -&self.constant;
        match self.rel {
            Rel::Le => vec![LinearConstraint::from_ints(neg_terms, neg_const, Rel::Lt)],
            Rel::Lt => vec![LinearConstraint::from_ints(neg_terms, neg_const, Rel::Le)],
            Rel::Eq => vec![
                LinearConstraint::from_ints(self.terms.clone(), self.constant.clone(), Rel::Lt),
                LinearConstraint::from_ints(neg_terms, neg_const, Rel::Lt),
            ],
        }
    }

    /// Evaluates the left-hand side at a point; missing variables are an error.
    pub fn lhs_at(
        &self,
        value: impl Fn(VarId) -> Option<Rational>,
    ) -> Result<Rational, GeometryError> {
        let mut acc = Rational::from(self.constant.clone());
        for (v, a) in &self.terms {
            let x = value(*v).ok_or(GeometryError::MissingValue(*v))?;
            acc = &acc + &(&Rational::from(a.clone()) * &x);
        }
        Ok(acc)
    }

    pub fn holds_at(
        &self,
        value: impl Fn(VarId) -> Option<Rational>,
    ) -> Result<bool, GeometryError> {
        Ok(self.rel.holds(self.lhs_at(value)?.signum()))
    }

    /// Human-readable form with positive coefficients on both sides, e.g.
    /// `offsetT3 + 5 > offsetT2` is printed as `offsetT2 < offsetT3 + 5`.
    pub fn render(&self, reg: &Registry) -> String {
        if let Some(t) = self.trivial() {
            return if t { "true".into() } else { "false".into() };
        }
        let mut left: Vec<String> = Vec::new();
        let mut right: Vec<String> = Vec::new();
        for (v, a) in &self.terms {
            let name = reg.name(*v);
            let mag = a.abs();
            let s = if mag.is_one() {
                name.to_string()
            } else {
                format!("{mag}*{name}")
            };
            if a.is_positive() {
                left.push(s);
            } else {
                right.push(s);
            }
        }
        if self.constant.is_positive() {
            left.push(self.constant.to_string());
        } else if self.constant.is_negative() {
            right.push((-&self.constant).to_string());
        }
        let side = |v: &Vec<String>| {
            if v.is_empty() {
                "0".to_string()
            } else {
                v.join(" + ")
            }
        };
        format!("{} {} {}", side(&left), self.rel.symbol(), side(&right))
    }

    pub(crate) fn key_cmp(&self, other: &LinearConstraint) -> Ordering {
        let by_terms = self
            .terms
            .iter()
            .map(|(v, _)| *v)
            .cmp(other.terms.iter().map(|(v, _)| *v));
        by_terms
            .then_with(|| {
                self.terms
                    .iter()
                    .map(|(_, a)| a)
                    .cmp(other.terms.iter().map(|(_, a)| a))
            })
            .then_with(|| self.rel.cmp(&other.rel))
            .then_with(|| self.constant.cmp(&other.constant))
    }
}

impl Ord for LinearConstraint {
    fn cmp(&self, other: &LinearConstraint) -> Ordering {
        self.key_cmp(other)
    }
}

impl PartialOrd for LinearConstraint {
    fn partial_cmp(&self, other: &LinearConstraint) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for LinearConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (v, a)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{a}*{v:?}")?;
        }
        write!(f, " + {} {} 0", self.constant, self.rel.symbol())
    }
}

/// JSON shape used in region documents.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintDoc {
    pub coeffs: BTreeMap<String, String>,
    pub constant: String,
    pub rel: Rel,
}

impl LinearConstraint {
    pub fn to_doc(&self, reg: &Registry) -> ConstraintDoc {
        ConstraintDoc {
            coeffs: self
                .terms
                .iter()
                .map(|(v, a)| (reg.name(*v).to_string(), a.to_string()))
                .collect(),
            constant: self.constant.to_string(),
            rel: self.rel,
        }
    }

    pub fn from_doc(
        doc: &ConstraintDoc,
        reg: &Registry,
    ) -> Result<LinearConstraint, GeometryError> {
        let mut coeffs = Vec::new();
        for (name, c) in &doc.coeffs {
            let v = reg
                .lookup(name)
                .ok_or_else(|| GeometryError::UnknownVariable(name.clone()))?;
            coeffs.push((v, c.parse::<Rational>()?));
        }
        Ok(LinearConstraint::new(
            coeffs,
            doc.constant.parse()?,
            doc.rel,
        ))
    }
}
