use super::constraint::{ConstraintDoc, LinearConstraint};
use super::polyhedron::{Point, Polyhedron, Universe};
use super::registry::Registry;
use super::GeometryError;

/// Finite union of polyhedra over one universe. Disjuncts are never empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Region {
    universe: Universe,
    disjuncts: Vec<Polyhedron>,
}

/// JSON rendering: one array of constraints per disjunct.
pub type RegionDoc = Vec<Vec<ConstraintDoc>>;

impl Region {
    pub fn empty(universe: Universe) -> Region {
        Region {
            universe,
            disjuncts: Vec::new(),
        }
    }

    pub fn from_polyhedron(p: Polyhedron) -> Region {
        let mut r = Region::empty(p.universe().clone());
        r.push(p);
        r
    }

    pub fn from_disjuncts(
        universe: Universe,
        parts: impl IntoIterator<Item = Polyhedron>,
    ) -> Result<Region, GeometryError> {
        let mut r = Region::empty(universe);
        for p in parts {
            if !p.universe().same(&r.universe) {
                return Err(GeometryError::UniverseMismatch);
            }
            r.push(p);
        }
        Ok(r)
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn disjuncts(&self) -> &[Polyhedron] {
        &self.disjuncts
    }

    pub fn is_empty(&self) -> bool {
        self.disjuncts.is_empty()
    }

    /// Adds a disjunct unless it is empty or already covered by a single
    /// disjunct; drops disjuncts the newcomer covers.
    pub fn push(&mut self, p: Polyhedron) {
        if p.is_empty() {
            return;
        }
        if self.disjuncts.iter().any(|d| d.includes_unchecked(&p)) {
            return;
        }
        self.disjuncts.retain(|d| !p.includes_unchecked(d));
        self.disjuncts.push(p);
    }

    /// Whether a single disjunct contains `p` (sound but incomplete test for
    /// `p ⊆ self`).
    pub fn covers_by_one(&self, p: &Polyhedron) -> bool {
        self.disjuncts.iter().any(|d| d.includes_unchecked(p))
    }

    pub fn union(&self, other: &Region) -> Result<Region, GeometryError> {
        if !self.universe.same(&other.universe) {
            return Err(GeometryError::UniverseMismatch);
        }
        let mut r = self.clone();
        for d in &other.disjuncts {
            r.push(d.clone());
        }
        Ok(r)
    }

    pub fn intersect(&self, other: &Region) -> Result<Region, GeometryError> {
        if !self.universe.same(&other.universe) {
            return Err(GeometryError::UniverseMismatch);
        }
        let mut r = Region::empty(self.universe.clone());
        for a in &self.disjuncts {
            for b in &other.disjuncts {
                r.push(a.intersect(b)?);
            }
        }
        Ok(r)
    }

    pub fn contains_point(&self, point: &Point) -> Result<bool, GeometryError> {
        for d in &self.disjuncts {
            if d.contains_point(point)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// `within \ self` as a finite union.
    pub fn complement(&self, within: &Polyhedron) -> Result<Region, GeometryError> {
        if !within.universe().same(&self.universe) {
            return Err(GeometryError::UniverseMismatch);
        }
        let mut pieces = vec![within.clone()];
        for q in &self.disjuncts {
            let mut next = Vec::new();
            for p in &pieces {
                next.extend(difference(p, q));
            }
            pieces = next;
            if pieces.is_empty() {
                break;
            }
        }
        Region::from_disjuncts(self.universe.clone(), pieces)
    }

    /// Semantic inclusion `self ⊆ other`.
    pub fn subset_of(&self, other: &Region) -> Result<bool, GeometryError> {
        if !self.universe.same(&other.universe) {
            return Err(GeometryError::UniverseMismatch);
        }
        for d in &self.disjuncts {
            let mut pieces = vec![d.clone()];
            for q in &other.disjuncts {
                pieces = pieces.iter().flat_map(|p| difference(p, q)).collect();
                if pieces.is_empty() {
                    break;
                }
            }
            if !pieces.is_empty() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn equals(&self, other: &Region) -> Result<bool, GeometryError> {
        Ok(self.subset_of(other)? && other.subset_of(self)?)
    }

    /// Merges disjuncts whose union is convex, using the weak join (constraints
    /// of either side entailed by the other side). Semantics are unchanged.
    pub fn simplify(&self) -> Region {
        let mut parts = self.disjuncts.clone();
        'outer: loop {
            for i in 0..parts.len() {
                for j in (i + 1)..parts.len() {
                    if let Some(m) = try_merge(&parts[i], &parts[j]) {
                        parts.remove(j);
                        parts.remove(i);
                        parts.push(m);
                        continue 'outer;
                    }
                }
            }
            break;
        }
        let mut r = Region::empty(self.universe.clone());
        for p in parts {
            r.push(p);
        }
        r.disjuncts
            .sort_by(|a, b| a.constraints().cmp(b.constraints()));
        r
    }

    pub fn render(&self, reg: &Registry) -> String {
        if self.disjuncts.is_empty() {
            return "false".into();
        }
        let mut parts: Vec<String> = self.disjuncts.iter().map(|d| d.render(reg)).collect();
        parts.sort();
        parts.join(" OR ")
    }

    pub fn to_doc(&self, reg: &Registry) -> RegionDoc {
        self.disjuncts
            .iter()
            .map(|d| d.constraints().iter().map(|c| c.to_doc(reg)).collect())
            .collect()
    }

    pub fn from_doc(
        doc: &RegionDoc,
        universe: Universe,
        reg: &Registry,
    ) -> Result<Region, GeometryError> {
        let mut parts = Vec::new();
        for d in doc {
            let cs = d
                .iter()
                .map(|c| LinearConstraint::from_doc(c, reg))
                .collect::<Result<Vec<_>, _>>()?;
            parts.push(Polyhedron::new(universe.clone(), cs)?);
        }
        Region::from_disjuncts(universe, parts)
    }
}

/// `p \ q` as disjoint pieces: `p ∧ c₁ ∧ … ∧ cᵢ₋₁ ∧ ¬cᵢ`.
pub fn difference(p: &Polyhedron, q: &Polyhedron) -> Vec<Polyhedron> {
    if p.is_syntactically_empty() {
        return Vec::new();
    }
    if q.is_syntactically_empty() || p.intersect(q).map(|i| i.is_empty()).unwrap_or(true) {
        return vec![p.clone()];
    }
    let mut out = Vec::new();
    let mut acc = p.clone();
    for c in q.constraints() {
        if acc.constraints().binary_search(c).is_ok() {
            continue;
        }
        for n in c.negate() {
            let piece = acc.with_rows(std::iter::once(n));
            if !piece.is_empty() {
                out.push(piece);
            }
        }
        acc = acc.with_rows(std::iter::once(c.clone()));
        if acc.is_empty() {
            break;
        }
    }
    out
}

fn try_merge(a: &Polyhedron, b: &Polyhedron) -> Option<Polyhedron> {
    let entailed = |src: &Polyhedron, by: &Polyhedron| -> Vec<LinearConstraint> {
        src.constraints()
            .iter()
            .filter(|c| {
                let single = Polyhedron::canonical(by.universe().clone(), vec![(*c).clone()]);
                single.includes_unchecked(by)
            })
            .cloned()
            .collect()
    };
    let mut rows = entailed(a, b);
    rows.extend(entailed(b, a));
    let hull = Polyhedron::canonical(a.universe().clone(), rows);
    let mut pieces = difference(&hull, a);
    pieces = pieces.iter().flat_map(|p| difference(p, b)).collect();
    if pieces.is_empty() {
        Some(hull)
    } else {
        None
    }
}

/// `within \ r`.
pub fn region_complement(r: &Region, within: &Polyhedron) -> Result<Region, GeometryError> {
    r.complement(within)
}

/// Semantic equality of two regions.
pub fn region_equal(a: &Region, b: &Region) -> Result<bool, GeometryError> {
    a.equals(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{LinExpr, Rational, VarKind};

    fn setup() -> (Registry, crate::geometry::VarId, Universe) {
        let mut reg = Registry::new();
        let d = reg.register("d", VarKind::Parameter).unwrap();
        let u = Universe::new([d]);
        (reg, d, u)
    }

    fn interval(
        u: &Universe,
        d: crate::geometry::VarId,
        lo: (i64, i64, bool),
        hi: (i64, i64, bool),
    ) -> Polyhedron {
        let v = LinExpr::var(d);
        let l = LinExpr::constant(Rational::from_frac(lo.0, lo.1));
        let h = LinExpr::constant(Rational::from_frac(hi.0, hi.1));
        let lc = if lo.2 { l.lt(&v) } else { l.le(&v) };
        let hc = if hi.2 { v.lt(&h) } else { v.le(&h) };
        Polyhedron::new(u.clone(), [lc, hc]).unwrap()
    }

    #[test]
    fn complement_examples() {
        let (reg, d, u) = setup();
        let within = interval(&u, d, (0, 1, false), (5, 1, false));
        let none = Region::empty(u.clone());
        assert!(none
            .complement(&within)
            .unwrap()
            .equals(&Region::from_polyhedron(within.clone()))
            .unwrap());
        let ge4 = Region::from_polyhedron(
            Polyhedron::new(u.clone(), [LinExpr::var(d).ge(&LinExpr::int(4))]).unwrap(),
        );
        let c = ge4.complement(&within).unwrap();
        assert_eq!(c.render(&reg), "0 <= d AND d < 4");
    }

    #[test]
    fn equality_ignores_syntax() {
        let (_, d, u) = setup();
        let whole = Region::from_polyhedron(interval(&u, d, (4, 1, false), (5, 1, false)));
        let split = Region::from_disjuncts(
            u.clone(),
            [
                interval(&u, d, (4, 1, false), (9, 2, false)),
                interval(&u, d, (9, 2, true), (5, 1, false)),
            ],
        )
        .unwrap();
        assert!(region_equal(&whole, &split).unwrap());
        let open = Region::from_polyhedron(interval(&u, d, (4, 1, true), (5, 1, false)));
        assert!(!region_equal(&whole, &open).unwrap());
    }

    #[test]
    fn simplify_merges_abutting_pieces() {
        let (reg, d, u) = setup();
        let split = Region::from_disjuncts(
            u.clone(),
            [
                interval(&u, d, (4, 1, false), (9, 2, false)),
                interval(&u, d, (9, 2, true), (5, 1, false)),
            ],
        )
        .unwrap();
        assert_eq!(split.simplify().render(&reg), "4 <= d AND d <= 5");
    }
}
