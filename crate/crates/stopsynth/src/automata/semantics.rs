use std::fmt;
use std::hash::{Hash, Hasher};

use crate::geometry::{fm, LinExpr, LinearConstraint, Point, Polyhedron, VarId};

use super::network::{ActionId, Edge, Network};
use super::AutomataError;

/// Location vector plus a constraint over clocks and parameters, stored
/// closed under time elapse. `witness` is some point of `constraint`; it is
/// not part of the state's identity.
#[derive(Clone)]
pub struct SymbolicState {
    pub locations: Vec<u32>,
    pub constraint: Polyhedron,
    pub witness: Point,
}

impl PartialEq for SymbolicState {
    fn eq(&self, other: &Self) -> bool {
        self.locations == other.locations && self.constraint == other.constraint
    }
}

impl Eq for SymbolicState {}

impl Hash for SymbolicState {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.locations.hash(state);
        self.constraint.hash(state);
    }
}

impl SymbolicState {
    /// `self ⊆ other`: same locations and a smaller constraint.
    pub fn included_in(&self, other: &SymbolicState) -> bool {
        self.locations == other.locations && other.constraint.includes_unchecked(&self.constraint)
    }
}

impl fmt::Debug for SymbolicState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} {:?}", self.locations, self.constraint)
    }
}

impl Network {
    fn invariants(&self, locs: &[u32]) -> Vec<LinearConstraint> {
        let mut rows = Vec::new();
        for (a, l) in self.automata.iter().zip(locs) {
            rows.extend_from_slice(a.locations[*l as usize].invariant.constraints());
        }
        rows
    }

    fn dead_clocks_at(&self, locs: &[u32]) -> Vec<VarId> {
        let mut d = Vec::new();
        for (i, l) in locs.iter().enumerate() {
            d.extend_from_slice(&self.dead[i][*l as usize]);
        }
        d
    }

    /// Elapse under the stop sets of `locs`, re-intersect invariants and drop
    /// dead clocks. `None` when the result is empty. The returned point lies
    /// in the entry constraint, which the closed one contains.
    fn close(&self, locs: &[u32], c: Polyhedron) -> Option<(Polyhedron, Point)> {
        let inv = self.invariants(locs);
        let c = c.with_rows(inv.iter().cloned());
        let witness = c.sample_point()?;
        let running = self.running_clocks(locs);
        let c = c.elapse_running(&running).with_rows(inv);
        let dead = self.dead_clocks_at(locs);
        let c = if dead.is_empty() { c } else { c.forget(&dead) };
        if c.is_syntactically_empty() {
            None
        } else {
            debug_assert_eq!(c.contains_point(&witness), Ok(true));
            Some((c, witness))
        }
    }

    pub fn initial_state(&self) -> Result<SymbolicState, AutomataError> {
        let locs: Vec<u32> = self.automata.iter().map(|a| a.initial as u32).collect();
        let zeros = self
            .clocks
            .iter()
            .map(|c| LinExpr::var(*c).eq(&LinExpr::int(0)));
        let c = self.initial_param_domain.with_rows(zeros);
        let (c, witness) = self
            .close(&locs, c)
            .ok_or(AutomataError::EmptyInitialState)?;
        Ok(SymbolicState {
            locations: locs,
            constraint: c,
            witness,
        })
    }

    /// Successors of `s` by the synchronized action `a`. Empty when some
    /// participant has no edge labelled `a` from its current location.
    pub fn discrete_successors(&self, s: &SymbolicState, a: ActionId) -> Vec<SymbolicState> {
        let parts = self.sync_set(a);
        if parts.is_empty() {
            return Vec::new();
        }
        let mut choices: Vec<Vec<&Edge>> = Vec::with_capacity(parts.len());
        for &i in parts {
            let es: Vec<&Edge> = self.automata[i]
                .edges_from(s.locations[i] as usize, a)
                .collect();
            if es.is_empty() {
                return Vec::new();
            }
            choices.push(es);
        }
        let mut out = Vec::new();
        let mut idx = vec![0usize; parts.len()];
        loop {
            if let Some(st) = self.fire(s, parts, &choices, &idx) {
                out.push(st);
            }
            // Odometer over edge choices; last participant varies fastest.
            let mut k = parts.len();
            loop {
                if k == 0 {
                    return out;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < choices[k].len() {
                    break;
                }
                idx[k] = 0;
            }
        }
    }

    fn fire(
        &self,
        s: &SymbolicState,
        parts: &[usize],
        choices: &[Vec<&Edge>],
        idx: &[usize],
    ) -> Option<SymbolicState> {
        let mut rows = s.constraint.constraints().to_vec();
        let mut resets: Vec<VarId> = Vec::new();
        let mut locs = s.locations.clone();
        for (k, &i) in parts.iter().enumerate() {
            let e = choices[k][idx[k]];
            if e.guard.is_syntactically_empty() {
                return None;
            }
            rows.extend_from_slice(e.guard.constraints());
            resets.extend_from_slice(&e.resets);
            locs[i] = e.target as u32;
        }
        // Emptiness is decided once, in `close`: projecting out the reset
        // clocks keeps an infeasible system infeasible.
        let guarded = fm::reduce(rows)?;
        resets.sort();
        resets.dedup();
        let c = Polyhedron::canonical(s.constraint.universe().clone(), guarded)
            .reset_unchecked(&resets);
        let (c, witness) = self.close(&locs, c)?;
        Some(SymbolicState {
            locations: locs,
            constraint: c,
            witness,
        })
    }

    /// All discrete successors, in action order.
    pub fn successors(&self, s: &SymbolicState) -> Vec<(ActionId, SymbolicState)> {
        let mut out = Vec::new();
        for a in self.actions() {
            for t in self.discrete_successors(s, a) {
                out.push((a, t));
            }
        }
        out
    }

    pub fn state_included(&self, s1: &SymbolicState, s2: &SymbolicState) -> bool {
        s1.included_in(s2)
    }
}
