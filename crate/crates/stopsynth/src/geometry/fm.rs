//! Fourier–Motzkin machinery over normalized constraint rows.
//!
//! Rows are `LinearConstraint`s; `None` results mean the system was found
//! infeasible. Equalities are eliminated by substitution, inequalities by
//! pairwise combination with strictness propagation.

use rustc_hash::FxHashMap;

use super::constraint::{LinearConstraint, Rel};
use super::int::Int;
use super::rational::Rational;
use super::registry::VarId;

/// Above this many rows, entailment-based redundancy removal kicks in.
pub const REDUNDANCY_THRESHOLD: usize = 64;

#[derive(Default)]
struct Bucket {
    eq: Option<Rational>,
    hi: Option<(Rational, bool)>,
    lo: Option<(Rational, bool)>,
}

fn tighter_hi(a: &(Rational, bool), b: &(Rational, bool)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 && !b.1)
}

fn tighter_lo(a: &(Rational, bool), b: &(Rational, bool)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 && !b.1)
}

fn bound_row(key: &[(VarId, Int)], sign: i64, bound: &Rational, rel: Rel) -> LinearConstraint {
    // sign·(d·key) − sign·n ⋈ 0 where bound = n/d.
    let d = bound.denom();
    let s = Int::from(sign);
    let terms = key.iter().map(|(v, a)| (*v, &(a * d) * &s)).collect();
    let constant = -&(bound.numer() * &s);
    LinearConstraint::from_ints(terms, constant, rel)
}

/// Drops trivially true rows, keeps only the tightest bound per direction,
/// fuses matching lower/upper bounds into equalities. Deterministic output
/// order (sorted).
pub fn reduce(rows: Vec<LinearConstraint>) -> Option<Vec<LinearConstraint>> {
    let mut buckets: FxHashMap<Vec<(VarId, Int)>, Bucket> =
        FxHashMap::with_capacity_and_hasher(rows.len(), Default::default());
    for r in rows {
        if let Some(t) = r.trivial() {
            if !t {
                return None;
            }
            continue;
        }
        let mut g = r.terms[0].1.abs();
        for (_, a) in &r.terms[1..] {
            if g.is_one() {
                break;
            }
            g = g.gcd(a);
        }
        let sign = r.terms[0].1.signum() as i64;
        let gs = if sign < 0 { -&g } else { g };
        // r ≡ gs·key + c ⋈ 0  ⇒  key ⋈' −c/gs
        let val = Rational::new(-&r.constant, gs.clone()).expect("nonzero gcd");
        let rel = r.rel;
        let mut key = r.terms;
        if !gs.is_one() {
            for (_, a) in &mut key {
                *a = a.div_exact(&gs);
            }
        }
        let b = buckets.entry(key).or_default();
        match rel {
            Rel::Eq => match &b.eq {
                Some(e) if *e != val => return None,
                _ => b.eq = Some(val),
            },
            rel => {
                let cand = (val, rel == Rel::Lt);
                if sign > 0 {
                    if b.hi.as_ref().is_none_or(|h| tighter_hi(&cand, h)) {
                        b.hi = Some(cand);
                    }
                } else if b.lo.as_ref().is_none_or(|l| tighter_lo(&cand, l)) {
                    b.lo = Some(cand);
                }
            }
        }
    }
    let mut out = Vec::with_capacity(buckets.len() * 2);
    for (key, b) in buckets {
        if let Some(e) = b.eq {
            if let Some((h, strict)) = &b.hi {
                if e > *h || (e == *h && *strict) {
                    return None;
                }
            }
            if let Some((l, strict)) = &b.lo {
                if e < *l || (e == *l && *strict) {
                    return None;
                }
            }
            out.push(bound_row(&key, 1, &e, Rel::Eq));
            continue;
        }
        match (&b.lo, &b.hi) {
            (Some((l, ls)), Some((h, hs))) => {
                if l > h || (l == h && (*ls || *hs)) {
                    return None;
                }
                if l == h {
                    out.push(bound_row(&key, 1, l, Rel::Eq));
                } else {
                    out.push(bound_row(&key, 1, h, if *hs { Rel::Lt } else { Rel::Le }));
                    out.push(bound_row(&key, -1, l, if *ls { Rel::Lt } else { Rel::Le }));
                }
            }
            (None, Some((h, hs))) => {
                out.push(bound_row(&key, 1, h, if *hs { Rel::Lt } else { Rel::Le }))
            }
            (Some((l, ls)), None) => {
                out.push(bound_row(&key, -1, l, if *ls { Rel::Lt } else { Rel::Le }))
            }
            (None, None) => {}
        }
    }
    out.sort();
    Some(out)
}

/// `k1·r1 + k2·r2` with the given relation.
fn combine(
    r1: &LinearConstraint,
    k1: &Int,
    r2: &LinearConstraint,
    k2: &Int,
    rel: Rel,
) -> LinearConstraint {
    let mut terms = Vec::with_capacity(r1.terms.len() + r2.terms.len());
    let (mut i, mut j) = (0, 0);
    while i < r1.terms.len() || j < r2.terms.len() {
        let take = match (r1.terms.get(i), r2.terms.get(j)) {
            (Some(a), Some(b)) => a.0.cmp(&b.0),
            (Some(_), None) => std::cmp::Ordering::Less,
            _ => std::cmp::Ordering::Greater,
        };
        match take {
            std::cmp::Ordering::Less => {
                let (v, a) = &r1.terms[i];
                terms.push((*v, a * k1));
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                let (v, b) = &r2.terms[j];
                terms.push((*v, b * k2));
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                let (v, a) = &r1.terms[i];
                let s = &(a * k1) + &(&r2.terms[j].1 * k2);
                if !s.is_zero() {
                    terms.push((*v, s));
                }
                i += 1;
                j += 1;
            }
        }
    }
    let constant = &(&r1.constant * k1) + &(&r2.constant * k2);
    LinearConstraint::from_ints(terms, constant, rel)
}

/// Existentially quantifies one variable.
pub fn eliminate_var(mut rows: Vec<LinearConstraint>, v: VarId) -> Option<Vec<LinearConstraint>> {
    let eq_pos = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r.rel == Rel::Eq && r.mentions(v))
        .min_by(|(_, a), (_, b)| {
            a.terms
                .len()
                .cmp(&b.terms.len())
                .then_with(|| {
                    a.coefficient(v)
                        .unwrap()
                        .abs()
                        .cmp(&b.coefficient(v).unwrap().abs())
                })
                .then_with(|| a.cmp(b))
        })
        .map(|(i, _)| i);
    let mut out = Vec::with_capacity(rows.len());
    if let Some(i) = eq_pos {
        let e = rows.swap_remove(i);
        let a = e.coefficient(v).unwrap().clone();
        let abs_a = a.abs();
        for r in rows {
            match r.coefficient(v) {
                None => out.push(r),
                Some(b) => {
                    let k2 = if a.is_negative() { b.clone() } else { -b };
                    let rel = r.rel;
                    out.push(combine(&r, &abs_a, &e, &k2, rel));
                }
            }
        }
        return reduce(out);
    }
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for r in rows {
        match r.coefficient(v).map(|c| c.signum()) {
            None => out.push(r),
            Some(s) if s > 0 => pos.push(r),
            Some(_) => neg.push(r),
        }
    }
    for p in &pos {
        let a = p.coefficient(v).unwrap();
        for n in &neg {
            let b = n.coefficient(v).unwrap().abs();
            out.push(combine(p, &b, n, a, p.rel.combine(n.rel)));
        }
    }
    reduce(out)
}

fn pick_var(rows: &[LinearConstraint], candidates: &[VarId]) -> Option<VarId> {
    let mut best_eq: Option<(usize, VarId)> = None;
    for r in rows.iter().filter(|r| r.rel == Rel::Eq) {
        for v in r.vars() {
            if candidates.contains(&v) {
                let key = (r.terms.len(), v);
                if best_eq.is_none_or(|b| key < b) {
                    best_eq = Some(key);
                }
            }
        }
    }
    if let Some((_, v)) = best_eq {
        return Some(v);
    }
    let mut best: Option<(i64, VarId)> = None;
    for &v in candidates {
        let (mut p, mut n) = (0i64, 0i64);
        for r in rows {
            match r.coefficient(v).map(|c| c.signum()) {
                Some(s) if s > 0 => p += 1,
                Some(_) => n += 1,
                None => {}
            }
        }
        if p + n == 0 {
            continue;
        }
        let cost = p * n - p - n;
        if best.is_none_or(|b| (cost, v) < b) {
            best = Some((cost, v));
        }
    }
    best.map(|(_, v)| v)
}

/// Eliminates every variable of `vars`, choosing a cheap order.
pub fn eliminate_set(rows: Vec<LinearConstraint>, vars: &[VarId]) -> Option<Vec<LinearConstraint>> {
    let mut rows = reduce(rows)?;
    let mut remaining: Vec<VarId> = vars.to_vec();
    loop {
        remaining.retain(|v| rows.iter().any(|r| r.mentions(*v)));
        let Some(v) = pick_var(&rows, &remaining) else {
            return Some(rows);
        };
        rows = eliminate_var(rows, v)?;
        remaining.retain(|w| *w != v);
    }
}

/// True when no rational point satisfies all rows.
pub fn is_empty(rows: Vec<LinearConstraint>) -> bool {
    let mut vars: Vec<VarId> = rows.iter().flat_map(|r| r.vars()).collect();
    vars.sort();
    vars.dedup();
    eliminate_set(rows, &vars).is_none()
}

/// A rational point satisfying every row, or `None` when the rows are
/// infeasible. Variables are eliminated one at a time and then assigned in
/// reverse order, each inside the interval left by the ones already fixed.
/// Interior values are preferred so that the point separates well in
/// membership tests.
pub fn sample_point(rows: Vec<LinearConstraint>) -> Option<Vec<(VarId, Rational)>> {
    let mut rows = reduce(rows)?;
    let mut stages: Vec<(VarId, Vec<VarId>, Vec<LinearConstraint>)> = Vec::new();
    loop {
        let mut mentioned: Vec<VarId> = rows.iter().flat_map(|r| r.vars()).collect();
        mentioned.sort();
        mentioned.dedup();
        let Some(v) = pick_var(&rows, &mentioned) else {
            break;
        };
        let bounding: Vec<LinearConstraint> =
            rows.iter().filter(|r| r.mentions(v)).cloned().collect();
        let next = eliminate_var(rows, v)?;
        // Variables that vanish along with `v` are unconstrained in the
        // projection, so any value for them extends to the rest.
        let vanished = mentioned
            .into_iter()
            .filter(|w| *w != v && !next.iter().any(|r| r.mentions(*w)))
            .collect();
        stages.push((v, vanished, bounding));
        rows = next;
    }
    let mut point: FxHashMap<VarId, Rational> = FxHashMap::default();
    for (v, vanished, rows) in stages.into_iter().rev() {
        for w in vanished {
            point.insert(w, Rational::zero());
        }
        let x = value_within(&rows, v, &point);
        point.insert(v, x);
    }
    let mut out: Vec<(VarId, Rational)> = point.into_iter().collect();
    out.sort_by_key(|(v, _)| *v);
    Some(out)
}

fn value_within(
    rows: &[LinearConstraint],
    v: VarId,
    point: &FxHashMap<VarId, Rational>,
) -> Rational {
    let mut lo: Option<(Rational, bool)> = None;
    let mut hi: Option<(Rational, bool)> = None;
    for r in rows {
        let Some(a) = r.coefficient(v) else { continue };
        let mut rest = Rational::from(r.constant.clone());
        for (w, b) in &r.terms {
            if *w != v {
                rest = &rest + &(&Rational::from(b.clone()) * &point[w]);
            }
        }
        // a·v + rest ⋈ 0
        let a = Rational::from(a.clone());
        let at = -&(&rest / &a);
        let strict = r.rel == Rel::Lt;
        if r.rel == Rel::Eq {
            return at;
        }
        let bound = (at, strict);
        if a.is_negative() {
            if lo.as_ref().is_none_or(|l| tighter_lo(&bound, l)) {
                lo = Some(bound);
            }
        } else if hi.as_ref().is_none_or(|h| tighter_hi(&bound, h)) {
            hi = Some(bound);
        }
    }
    match (lo, hi) {
        (Some((l, _)), Some((h, _))) => l.midpoint(&h),
        (Some((l, _)), None) => &l + &Rational::one(),
        (None, Some((h, _))) => &h - &Rational::one(),
        (None, None) => Rational::zero(),
    }
}

/// Removes rows entailed by the remaining ones (equalities are kept).
pub fn remove_redundant(rows: Vec<LinearConstraint>) -> Vec<LinearConstraint> {
    let mut keep = rows;
    let mut i = 0;
    while i < keep.len() {
        if keep[i].rel == Rel::Eq {
            i += 1;
            continue;
        }
        let mut test: Vec<LinearConstraint> = keep
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, r)| r.clone())
            .collect();
        test.extend(keep[i].negate());
        if is_empty(test) {
            keep.remove(i);
        } else {
            i += 1;
        }
    }
    keep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{LinExpr, Registry, VarKind};

    #[test]
    fn reduce_fuses_bounds_into_equality() {
        let mut r = Registry::new();
        let x = r.register("x", VarKind::Clock).unwrap();
        let rows = vec![
            LinExpr::var(x).le(&LinExpr::int(3)),
            LinExpr::var(x).ge(&LinExpr::int(3)),
            LinExpr::var(x).le(&LinExpr::int(7)),
        ];
        let out = reduce(rows).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].rel, Rel::Eq);
        let bad = vec![
            LinExpr::var(x).lt(&LinExpr::int(3)),
            LinExpr::var(x).ge(&LinExpr::int(3)),
        ];
        assert!(reduce(bad).is_none());
    }

    #[test]
    fn strict_chain_through_elimination() {
        let mut r = Registry::new();
        let x = r.register("x", VarKind::Clock).unwrap();
        let y = r.register("y", VarKind::Clock).unwrap();
        let rows = vec![
            LinExpr::var(x).lt(&LinExpr::var(y)),
            LinExpr::var(y).le(&LinExpr::int(3)),
        ];
        let out = eliminate_var(rows, y).unwrap();
        assert_eq!(out, vec![LinExpr::var(x).lt(&LinExpr::int(3))]);
    }

    #[test]
    fn parallel_rows_with_different_scaling_collapse() {
        let mut r = Registry::new();
        let x = r.register("x", VarKind::Clock).unwrap();
        let two_x = LinExpr::var(x).scaled(&Rational::from_int(2));
        let rows = vec![
            two_x.le(&LinExpr::int(1)),
            LinExpr::var(x).le(&LinExpr::int(1)),
        ];
        let out = reduce(rows).unwrap();
        assert_eq!(out, vec![two_x.le(&LinExpr::int(1))]);
    }

    #[test]
    fn sample_point_lands_strictly_inside() {
        let mut r = Registry::new();
        let x = r.register("x", VarKind::Clock).unwrap();
        let y = r.register("y", VarKind::Clock).unwrap();
        let rows = vec![
            LinExpr::var(x).gt(&LinExpr::int(0)),
            LinExpr::var(x).lt(&LinExpr::var(y)),
            LinExpr::var(y).le(&LinExpr::int(1)),
        ];
        let p: FxHashMap<VarId, Rational> =
            sample_point(rows.clone()).unwrap().into_iter().collect();
        for row in &rows {
            assert!(row.holds_at(|v| p.get(&v).cloned()).unwrap(), "{p:?}");
        }
        let empty = vec![
            LinExpr::var(x).lt(&LinExpr::var(y)),
            LinExpr::var(y).lt(&LinExpr::var(x)),
        ];
        assert!(sample_point(empty).is_none());
    }
}
