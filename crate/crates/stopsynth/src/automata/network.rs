use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rustc_hash::FxHashMap;

use crate::geometry::{LinearConstraint, Polyhedron, Rational, Registry, Universe, VarId};

use super::AutomataError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionId(pub u32);

pub type LocationId = usize;

#[derive(Clone, Debug)]
pub struct Location {
    pub name: String,
    pub invariant: Polyhedron,
    /// Sorted, deduplicated.
    pub stopped: Vec<VarId>,
    pub is_bad: bool,
}

#[derive(Clone, Debug)]
pub struct Edge {
    pub source: LocationId,
    pub guard: Polyhedron,
    pub action: ActionId,
    pub resets: Vec<VarId>,
    pub target: LocationId,
}

#[derive(Clone, Debug)]
pub struct Automaton {
    pub name: String,
    pub alphabet: BTreeSet<ActionId>,
    pub locations: Vec<Location>,
    pub initial: LocationId,
    pub edges: Vec<Edge>,
    outgoing: FxHashMap<(LocationId, ActionId), Vec<usize>>,
}

impl Automaton {
    pub fn location_index(&self, name: &str) -> Option<LocationId> {
        self.locations.iter().position(|l| l.name == name)
    }

    /// Edges leaving `loc` labelled `a`, in declaration order.
    pub fn edges_from(&self, loc: LocationId, a: ActionId) -> impl Iterator<Item = &Edge> {
        self.outgoing
            .get(&(loc, a))
            .into_iter()
            .flatten()
            .map(move |i| &self.edges[*i])
    }

    pub fn has_edge(&self, loc: LocationId, a: ActionId) -> bool {
        self.outgoing.contains_key(&(loc, a))
    }

    /// Clocks read by guards/invariants or reset by this automaton.
    pub(crate) fn touched_clocks(&self) -> BTreeSet<VarId> {
        let mut s = BTreeSet::new();
        for l in &self.locations {
            for c in l.invariant.constraints() {
                s.extend(c.vars().filter(|v| v.is_clock()));
            }
        }
        for e in &self.edges {
            for c in e.guard.constraints() {
                s.extend(c.vars().filter(|v| v.is_clock()));
            }
            s.extend(e.resets.iter().copied());
        }
        s
    }

    /// For each location, the clocks among `clocks` that are not read before
    /// their next reset.
    pub(crate) fn dead_clocks(&self, clocks: &BTreeSet<VarId>) -> Vec<Vec<VarId>> {
        let n = self.locations.len();
        let reads = |p: &Polyhedron, x: VarId| p.constraints().iter().any(|c| c.mentions(x));
        let mut dead = vec![Vec::new(); n];
        for &x in clocks {
            let mut live: Vec<bool> = self
                .locations
                .iter()
                .map(|l| reads(&l.invariant, x))
                .collect();
            for e in &self.edges {
                if reads(&e.guard, x) {
                    live[e.source] = true;
                }
            }
            loop {
                let mut changed = false;
                for e in &self.edges {
                    if !live[e.source] && live[e.target] && !e.resets.contains(&x) {
                        live[e.source] = true;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
            for (l, is_live) in live.iter().enumerate() {
                if !is_live {
                    dead[l].push(x);
                }
            }
        }
        dead
    }
}

/// Incremental construction of one automaton over a fixed universe.
pub struct AutomatonBuilder {
    name: String,
    universe: Universe,
    alphabet: BTreeSet<ActionId>,
    locations: Vec<Location>,
    edges: Vec<Edge>,
    initial: LocationId,
}

impl AutomatonBuilder {
    pub fn new(name: &str, universe: Universe) -> AutomatonBuilder {
        AutomatonBuilder {
            name: name.to_string(),
            universe,
            alphabet: BTreeSet::new(),
            locations: Vec::new(),
            edges: Vec::new(),
            initial: 0,
        }
    }

    fn poly(&self, cs: Vec<LinearConstraint>) -> Result<Polyhedron, AutomataError> {
        Ok(Polyhedron::new(self.universe.clone(), cs)?)
    }

    pub fn location(
        &mut self,
        name: &str,
        invariant: Vec<LinearConstraint>,
        stopped: impl IntoIterator<Item = VarId>,
        is_bad: bool,
    ) -> Result<LocationId, AutomataError> {
        if self.locations.iter().any(|l| l.name == name) {
            return Err(self.malformed(format!("duplicate location `{name}`")));
        }
        let mut stopped: Vec<VarId> = stopped.into_iter().collect();
        stopped.sort();
        stopped.dedup();
        let invariant = self.poly(invariant)?;
        self.locations.push(Location {
            name: name.to_string(),
            invariant,
            stopped,
            is_bad,
        });
        Ok(self.locations.len() - 1)
    }

    pub fn set_initial(&mut self, l: LocationId) {
        self.initial = l;
    }

    pub fn declare(&mut self, a: ActionId) {
        self.alphabet.insert(a);
    }

    pub fn edge(
        &mut self,
        source: LocationId,
        guard: Vec<LinearConstraint>,
        action: ActionId,
        resets: impl IntoIterator<Item = VarId>,
        target: LocationId,
    ) -> Result<(), AutomataError> {
        let guard = self.poly(guard)?;
        let mut resets: Vec<VarId> = resets.into_iter().collect();
        resets.sort();
        resets.dedup();
        self.alphabet.insert(action);
        self.edges.push(Edge {
            source,
            guard,
            action,
            resets,
            target,
        });
        Ok(())
    }

    fn malformed(&self, message: String) -> AutomataError {
        AutomataError::Malformed {
            automaton: self.name.clone(),
            message,
        }
    }

    pub fn build(self) -> Result<Automaton, AutomataError> {
        if self.locations.is_empty() || self.initial >= self.locations.len() {
            return Err(self.malformed("no valid initial location".into()));
        }
        for e in &self.edges {
            if e.source >= self.locations.len() || e.target >= self.locations.len() {
                return Err(self.malformed("edge endpoint out of range".into()));
            }
            if e.resets.iter().any(|v| !v.is_clock()) {
                return Err(self.malformed("reset of a non-clock variable".into()));
            }
        }
        for l in &self.locations {
            if l.stopped.iter().any(|v| !v.is_clock()) {
                return Err(self.malformed(format!("location `{}` stops a non-clock", l.name)));
            }
        }
        let mut outgoing: FxHashMap<(LocationId, ActionId), Vec<usize>> = FxHashMap::default();
        for (i, e) in self.edges.iter().enumerate() {
            outgoing.entry((e.source, e.action)).or_default().push(i);
        }
        Ok(Automaton {
            name: self.name,
            alphabet: self.alphabet,
            locations: self.locations,
            initial: self.initial,
            edges: self.edges,
            outgoing,
        })
    }
}

/// Parallel composition of automata sharing clocks, parameters and labels.
#[derive(Clone, Debug)]
pub struct Network {
    pub registry: Arc<Registry>,
    pub universe: Universe,
    pub automata: Vec<Automaton>,
    pub clocks: Vec<VarId>,
    pub params: Vec<VarId>,
    pub initial_param_domain: Polyhedron,
    actions: Vec<String>,
    sync: Vec<Vec<usize>>,
    /// dead[automaton][location] = clocks to forget there.
    pub(crate) dead: Vec<Vec<Vec<VarId>>>,
}

impl Network {
    pub fn new(
        registry: Arc<Registry>,
        universe: Universe,
        actions: Vec<String>,
        automata: Vec<Automaton>,
        initial_param_domain: Polyhedron,
    ) -> Result<Network, AutomataError> {
        let clocks: Vec<VarId> = universe
            .vars()
            .iter()
            .copied()
            .filter(|v| v.is_clock())
            .collect();
        let params: Vec<VarId> = universe
            .vars()
            .iter()
            .copied()
            .filter(|v| v.is_param())
            .collect();
        if !initial_param_domain.universe().same(&universe) {
            return Err(crate::geometry::GeometryError::UniverseMismatch.into());
        }
        if initial_param_domain
            .constraints()
            .iter()
            .any(|c| c.vars().any(|v| !v.is_param()))
        {
            return Err(AutomataError::Malformed {
                automaton: "<network>".into(),
                message: "parameter domain mentions clocks".into(),
            });
        }
        let mut sync = vec![Vec::new(); actions.len()];
        for (i, a) in automata.iter().enumerate() {
            for act in &a.alphabet {
                let slot =
                    sync.get_mut(act.0 as usize)
                        .ok_or_else(|| AutomataError::Malformed {
                            automaton: a.name.clone(),
                            message: format!("unregistered action #{}", act.0),
                        })?;
                slot.push(i);
            }
        }
        // Clocks touched by exactly one automaton can be dropped where dead.
        let mut owners: BTreeMap<VarId, usize> = BTreeMap::new();
        for a in &automata {
            for c in a.touched_clocks() {
                *owners.entry(c).or_default() += 1;
            }
        }
        let dead = automata
            .iter()
            .map(|a| {
                let local: BTreeSet<VarId> = a
                    .touched_clocks()
                    .into_iter()
                    .filter(|c| owners.get(c) == Some(&1))
                    .collect();
                a.dead_clocks(&local)
            })
            .collect();
        Ok(Network {
            registry,
            universe,
            automata,
            clocks,
            params,
            initial_param_domain,
            actions,
            sync,
            dead,
        })
    }

    pub fn action_name(&self, a: ActionId) -> &str {
        &self.actions[a.0 as usize]
    }

    pub fn action_id(&self, name: &str) -> Option<ActionId> {
        self.actions
            .iter()
            .position(|n| n == name)
            .map(|i| ActionId(i as u32))
    }

    pub fn actions(&self) -> impl Iterator<Item = ActionId> + '_ {
        (0..self.actions.len()).map(|i| ActionId(i as u32))
    }

    /// Automata whose alphabet contains `a`.
    pub fn sync_set(&self, a: ActionId) -> &[usize] {
        &self.sync[a.0 as usize]
    }

    /// Registered actions no automaton can perform.
    pub fn dead_actions(&self) -> Vec<ActionId> {
        self.actions()
            .filter(|a| self.sync_set(*a).is_empty())
            .collect()
    }

    /// Clocks running in a location vector: every clock not stopped by any
    /// current location.
    pub fn running_clocks(&self, locs: &[u32]) -> Vec<VarId> {
        let mut stopped: Vec<VarId> = Vec::new();
        for (a, l) in self.automata.iter().zip(locs) {
            stopped.extend_from_slice(&a.locations[*l as usize].stopped);
        }
        self.clocks
            .iter()
            .copied()
            .filter(|c| !stopped.contains(c))
            .collect()
    }

    pub fn is_bad(&self, locs: &[u32]) -> bool {
        self.automata
            .iter()
            .zip(locs)
            .any(|(a, l)| a.locations[*l as usize].is_bad)
    }

    /// Closed network with every parameter replaced by its value.
    pub fn instantiate(
        &self,
        valuation: &BTreeMap<VarId, Rational>,
    ) -> Result<Network, AutomataError> {
        if !self.initial_param_domain.contains_point(valuation)? {
            return Err(AutomataError::ValuationOutsideDomain);
        }
        let universe = self.universe.without(&self.params);
        let inst =
            |p: &Polyhedron| -> Result<Polyhedron, AutomataError> { Ok(p.instantiate(valuation)?) };
        let mut automata = Vec::with_capacity(self.automata.len());
        for a in &self.automata {
            let mut b = a.clone();
            for l in &mut b.locations {
                l.invariant = inst(&l.invariant)?;
            }
            for e in &mut b.edges {
                e.guard = inst(&e.guard)?;
            }
            automata.push(b);
        }
        let domain = Polyhedron::top(universe.clone());
        Network::new(
            self.registry.clone(),
            universe,
            self.actions.clone(),
            automata,
            domain,
        )
    }
}
