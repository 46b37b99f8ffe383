//! Breadth-first symbolic exploration collecting the parameter valuations
//! under which a bad location is reachable. The schedulable region is the
//! complement of that set within the initial parameter domain.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automata::{AutomataError, LocationId, Network, SymbolicState};
use crate::geometry::{
    GeometryError, Point, Polyhedron, Rational, Region, RegionDoc, Universe, VarId,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SynthesisError {
    #[error("bad target ({automaton}, {location}) is not a bad location of the network")]
    NotABadLocation {
        automaton: usize,
        location: LocationId,
    },
    #[error("variants disagree on their parameter set or domain")]
    ParameterMismatch,
    #[error("no variants given")]
    NoVariants,
    #[error(transparent)]
    Automata(#[from] AutomataError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Target locations; reaching any of them makes a state bad.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BadSpec {
    targets: Vec<(usize, LocationId)>,
    mask: Vec<Vec<bool>>,
}

impl BadSpec {
    pub fn new(
        n: &Network,
        targets: impl IntoIterator<Item = (usize, LocationId)>,
    ) -> Result<BadSpec, SynthesisError> {
        let mut mask: Vec<Vec<bool>> = n
            .automata
            .iter()
            .map(|a| vec![false; a.locations.len()])
            .collect();
        let mut list: Vec<(usize, LocationId)> = targets.into_iter().collect();
        list.sort();
        list.dedup();
        for &(a, l) in &list {
            let ok = n
                .automata
                .get(a)
                .and_then(|au| au.locations.get(l))
                .map(|loc| loc.is_bad)
                .unwrap_or(false);
            if !ok {
                return Err(SynthesisError::NotABadLocation {
                    automaton: a,
                    location: l,
                });
            }
            mask[a][l] = true;
        }
        Ok(BadSpec {
            targets: list,
            mask,
        })
    }

    /// Every location flagged bad in `n`.
    pub fn all_bad(n: &Network) -> BadSpec {
        let targets = n.automata.iter().enumerate().flat_map(|(i, a)| {
            a.locations
                .iter()
                .enumerate()
                .filter(|(_, l)| l.is_bad)
                .map(move |(j, _)| (i, j))
        });
        BadSpec::new(n, targets.collect::<Vec<_>>()).expect("flags were read from the network")
    }

    pub fn targets(&self) -> &[(usize, LocationId)] {
        &self.targets
    }

    pub fn hits(&self, locs: &[u32]) -> bool {
        locs.iter().zip(&self.mask).any(|(l, m)| m[*l as usize])
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplorationOptions {
    pub max_states: usize,
    pub max_depth: Option<usize>,
    pub prune_subsumed_by_bad: bool,
}

impl Default for ExplorationOptions {
    fn default() -> Self {
        ExplorationOptions {
            max_states: 1_000_000,
            max_depth: None,
            prune_subsumed_by_bad: true,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SynthesisStats {
    pub states_explored: usize,
    pub max_depth_reached: usize,
    pub duration: Duration,
}

#[derive(Clone, Debug)]
pub struct SynthesisResult {
    pub bad_region: Region,
    /// Complement of `bad_region` in the parameter domain; empty unless `exact`.
    pub good_region: Region,
    pub exact: bool,
    pub stats: SynthesisStats,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Schedulable,
    Unschedulable,
    Indeterminate,
}

struct Explored {
    bad: Region,
    exact: bool,
    stats: SynthesisStats,
}

struct Frontier {
    state: SymbolicState,
    params: Polyhedron,
}

fn param_domain(n: &Network) -> Polyhedron {
    n.initial_param_domain.project_to_params()
}

fn holds(c: &Polyhedron, p: &Point) -> bool {
    c.contains_point(p).expect("witness spans the universe")
}

fn explore(
    n: &Network,
    bad: &BadSpec,
    opts: &ExplorationOptions,
    stop_at_bad: bool,
) -> Result<Explored, SynthesisError> {
    let start = Instant::now();
    let params = n.universe.params();
    let mut bad_region = Region::empty(params);
    let mut visited: FxHashMap<Vec<u32>, Vec<(Polyhedron, Point)>> = FxHashMap::default();
    let mut stats = SynthesisStats::default();
    let mut exact = true;

    let init = n.initial_state()?;
    let mut layer: Vec<Frontier> = Vec::new();
    let init_params = init.constraint.project_to_params();
    stats.states_explored = 1;
    visited
        .entry(init.locations.clone())
        .or_default()
        .push((init.constraint.clone(), init.witness.clone()));
    if bad.hits(&init.locations) {
        bad_region.push(init_params);
    } else {
        layer.push(Frontier {
            state: init,
            params: init_params,
        });
    }

    let mut depth = 0usize;
    'search: while !layer.is_empty() {
        if stop_at_bad && !bad_region.is_empty() {
            break;
        }
        if opts.max_depth.is_some_and(|d| depth >= d) {
            exact = false;
            break;
        }
        let expand: Vec<&Frontier> = layer
            .iter()
            .filter(|f| !(opts.prune_subsumed_by_bad && bad_region.covers_by_one(&f.params)))
            .collect();
        let succs: Vec<Vec<(SymbolicState, Polyhedron)>> = expand
            .par_iter()
            .map(|f| {
                n.successors(&f.state)
                    .into_iter()
                    .map(|(_, s)| {
                        let p = s.constraint.project_to_params();
                        (s, p)
                    })
                    .collect()
            })
            .collect();
        depth += 1;
        let mut next = Vec::new();
        for (s, p) in succs.into_iter().flatten() {
            let seen = visited.entry(s.locations.clone()).or_default();
            // Inclusion needs the other state's witness inside; that test is
            // cheap and rules out most pairs before any elimination.
            if seen
                .iter()
                .any(|(v, _)| holds(v, &s.witness) && v.includes_unchecked(&s.constraint))
            {
                continue;
            }
            seen.retain(|(v, w)| !(holds(&s.constraint, w) && s.constraint.includes_unchecked(v)));
            seen.push((s.constraint.clone(), s.witness.clone()));
            stats.states_explored += 1;
            stats.max_depth_reached = depth;
            if bad.hits(&s.locations) {
                bad_region.push(p);
                if stop_at_bad {
                    break 'search;
                }
            } else {
                next.push(Frontier {
                    state: s,
                    params: p,
                });
            }
            if stats.states_explored >= opts.max_states {
                exact = false;
                break 'search;
            }
        }
        layer = next;
    }
    stats.duration = start.elapsed();
    Ok(Explored {
        bad: bad_region,
        exact,
        stats,
    })
}

pub fn reach_synth(
    n: &Network,
    bad: &BadSpec,
    opts: &ExplorationOptions,
) -> Result<SynthesisResult, SynthesisError> {
    let e = explore(n, bad, opts, false)?;
    let bad_region = e.bad.simplify();
    let good_region = if e.exact {
        bad_region.complement(&param_domain(n))?.simplify()
    } else {
        Region::empty(n.universe.params())
    };
    Ok(SynthesisResult {
        bad_region,
        good_region,
        exact: e.exact,
        stats: e.stats,
    })
}

/// Decides schedulability for one parameter valuation.
pub fn verify(
    n: &Network,
    bad: &BadSpec,
    valuation: &BTreeMap<VarId, Rational>,
    opts: &ExplorationOptions,
) -> Result<Verdict, SynthesisError> {
    let closed = n.instantiate(valuation)?;
    let e = explore(&closed, bad, opts, true)?;
    Ok(if !e.bad.is_empty() {
        Verdict::Unschedulable
    } else if e.exact {
        Verdict::Schedulable
    } else {
        Verdict::Indeterminate
    })
}

/// Runs one synthesis per variant and intersects the schedulable regions.
pub fn compositional_synth(
    variants: &[(Network, BadSpec)],
    opts: &ExplorationOptions,
) -> Result<SynthesisResult, SynthesisError> {
    let (first, _) = variants.first().ok_or(SynthesisError::NoVariants)?;
    let params = first.universe.params();
    let domain = param_domain(first);
    for (n, _) in &variants[1..] {
        let same_names = n.params.len() == first.params.len()
            && n.params
                .iter()
                .zip(&first.params)
                .all(|(a, b)| a == b && n.registry.name(*a) == first.registry.name(*b));
        if !same_names || !n.universe.params().same(&params) || param_domain(n) != domain {
            return Err(SynthesisError::ParameterMismatch);
        }
    }
    let results: Vec<SynthesisResult> = variants
        .par_iter()
        .map(|(n, b)| reach_synth(n, b, opts))
        .collect::<Result<_, _>>()?;
    let exact = results.iter().all(|r| r.exact);
    let mut bad_region = Region::empty(params.clone());
    let mut stats = SynthesisStats::default();
    for r in &results {
        bad_region = bad_region.union(&r.bad_region)?;
        stats.states_explored += r.stats.states_explored;
        stats.max_depth_reached = stats.max_depth_reached.max(r.stats.max_depth_reached);
        stats.duration += r.stats.duration;
    }
    let good_region = if exact {
        let mut g = Region::from_polyhedron(domain);
        for r in &results {
            g = g.intersect(&r.good_region)?;
        }
        g.simplify()
    } else {
        Region::empty(params)
    };
    Ok(SynthesisResult {
        bad_region: bad_region.simplify(),
        good_region,
        exact,
        stats,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct StatsDoc {
    pub states_explored: usize,
    pub max_depth_reached: usize,
    pub duration_ms: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SynthesisDoc {
    pub mode: String,
    pub exact: bool,
    pub bad_region: RegionDoc,
    pub good_region: RegionDoc,
    pub stats: StatsDoc,
}

impl SynthesisResult {
    pub fn to_doc(&self, mode: &str, n: &Network) -> SynthesisDoc {
        SynthesisDoc {
            mode: mode.to_string(),
            exact: self.exact,
            bad_region: self.bad_region.to_doc(&n.registry),
            good_region: self.good_region.to_doc(&n.registry),
            stats: StatsDoc {
                states_explored: self.stats.states_explored,
                max_depth_reached: self.stats.max_depth_reached,
                duration_ms: self.stats.duration.as_secs_f64() * 1e3,
            },
        }
    }

    pub fn params_universe(&self) -> &Universe {
        self.bad_region.universe()
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::automata::{ActionId, AutomatonBuilder};
    use crate::geometry::{LinExpr, Registry, VarKind};

    /// One task with execution time 3 and a parametric deadline `d` in [0, 10].
    fn deadline_net() -> (Network, VarId) {
        let mut reg = Registry::new();
        let d = reg.register("d", VarKind::Parameter).unwrap();
        let x = reg.register("x", VarKind::Clock).unwrap();
        let u = Universe::new([d, x]);
        let mut a = AutomatonBuilder::new("task", u.clone());
        let run = a
            .location("run", vec![LinExpr::var(x).le(&LinExpr::int(3))], [], false)
            .unwrap();
        let done = a.location("done", vec![], [], false).unwrap();
        let miss = a.location("miss", vec![], [], true).unwrap();
        a.edge(
            run,
            vec![LinExpr::var(x).eq(&LinExpr::int(3))],
            ActionId(0),
            [],
            done,
        )
        .unwrap();
        a.edge(
            run,
            vec![LinExpr::var(x).gt(&LinExpr::var(d))],
            ActionId(1),
            [],
            miss,
        )
        .unwrap();
        let dom = Polyhedron::new(
            u.clone(),
            [
                LinExpr::var(d).ge(&LinExpr::int(0)),
                LinExpr::var(d).le(&LinExpr::int(10)),
            ],
        )
        .unwrap();
        let n = Network::new(
            Arc::new(reg),
            u,
            vec!["fin".into(), "late".into()],
            vec![a.build().unwrap()],
            dom,
        )
        .unwrap();
        (n, d)
    }

    #[test]
    fn deadline_region_is_complement_of_bad() {
        let (n, _) = deadline_net();
        let bad = BadSpec::all_bad(&n);
        let r = reach_synth(&n, &bad, &ExplorationOptions::default()).unwrap();
        assert!(r.exact);
        assert_eq!(r.bad_region.render(&n.registry), "0 <= d AND d < 3");
        assert_eq!(r.good_region.render(&n.registry), "3 <= d AND d <= 10");
    }

    #[test]
    fn verify_matches_region() {
        let (n, d) = deadline_net();
        let bad = BadSpec::all_bad(&n);
        let o = ExplorationOptions::default();
        let at = |v: i64| BTreeMap::from([(d, Rational::from(v))]);
        assert_eq!(verify(&n, &bad, &at(3), &o).unwrap(), Verdict::Schedulable);
        assert_eq!(
            verify(&n, &bad, &at(2), &o).unwrap(),
            Verdict::Unschedulable
        );
        assert!(verify(&n, &bad, &at(11), &o).is_err());
    }

    #[test]
    fn bad_initial_location_makes_everything_bad() {
        let mut reg = Registry::new();
        let p = reg.register("p", VarKind::Parameter).unwrap();
        let u = Universe::new([p]);
        let mut a = AutomatonBuilder::new("a", u.clone());
        a.location("oops", vec![], [], true).unwrap();
        let dom = Polyhedron::new(u.clone(), [LinExpr::var(p).ge(&LinExpr::int(1))]).unwrap();
        let n = Network::new(
            Arc::new(reg),
            u,
            vec![],
            vec![a.build().unwrap()],
            dom.clone(),
        )
        .unwrap();
        let r = reach_synth(&n, &BadSpec::all_bad(&n), &ExplorationOptions::default()).unwrap();
        assert!(r.good_region.is_empty());
        assert!(r.bad_region.equals(&Region::from_polyhedron(dom)).unwrap());
    }

    #[test]
    fn state_limit_gives_inexact_result() {
        let (n, _) = deadline_net();
        let opts = ExplorationOptions {
            max_states: 1,
            ..Default::default()
        };
        let r = reach_synth(&n, &BadSpec::all_bad(&n), &opts).unwrap();
        assert!(!r.exact);
        assert!(r.good_region.is_empty());
    }

    #[test]
    fn single_variant_composition_is_plain_synthesis() {
        let (n, _) = deadline_net();
        let bad = BadSpec::all_bad(&n);
        let o = ExplorationOptions::default();
        let a = reach_synth(&n, &bad, &o).unwrap();
        let b = compositional_synth(&[(n.clone(), bad)], &o).unwrap();
        assert!(a.good_region.equals(&b.good_region).unwrap());
        assert_eq!(a.exact, b.exact);
    }

    #[test]
    fn rejects_non_bad_targets() {
        let (n, _) = deadline_net();
        assert!(BadSpec::new(&n, [(0, 0)]).is_err());
        assert!(BadSpec::new(&n, [(0, 2)]).unwrap().hits(&[2]));
    }
}
