//! Discrete-event simulation of a fully instantiated system under preemptive
//! fixed-priority scheduling, used as an independent oracle for the symbolic
//! analysis.

mod gantt;
mod reactivity;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Rational;
use crate::model::{has_errors, validate, Diagnostic, SystemSpec};

pub use gantt::{render_ascii, render_gantt, render_svg, GanttFormat};
pub use reactivity::{
    measure_reactivities, ChainInstance, MeasureOptions, ReactivityReport, ReactivityVerdict,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("specification is invalid")]
    Invalid(Vec<Diagnostic>),
    #[error("`{0}` is not an offset, deadline or WCET of the system")]
    UnknownParameter(String),
    #[error("no value for parameters: {}", .0.join(", "))]
    Open(Vec<String>),
    #[error("horizon must be positive")]
    NonPositiveHorizon,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SimConfig {
    /// End of the observed interval; `None` means [`default_horizon`].
    pub horizon: Option<Rational>,
    /// Values for the quantities written `?` (or overrides of concrete ones).
    pub valuation: BTreeMap<String, Rational>,
}

/// Largest offset plus two hyperperiods.
pub fn default_horizon(spec: &SystemSpec) -> Rational {
    let l = spec.hyperperiod();
    &max_offset(spec) + &(&l + &l)
}

/// A horizon long enough for [`measure_reactivities`] to judge every chain
/// instance started within the default horizon.
pub fn reactivity_horizon(spec: &SystemSpec) -> Rational {
    let bound = spec
        .reactivities
        .iter()
        .map(|r| r.bound.clone())
        .max()
        .unwrap_or_else(Rational::zero);
    &(&default_horizon(spec) + &bound) + &spec.hyperperiod()
}

fn max_offset(spec: &SystemSpec) -> Rational {
    spec.threads
        .iter()
        .filter_map(|t| t.offset.value().cloned())
        .max()
        .unwrap_or_else(Rational::zero)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub thread: String,
    pub processing: String,
    pub start: Rational,
    pub end: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub time: Rational,
    /// Same vocabulary as the compiled model: `startT1`, `finishNavigation`,
    /// `finT1`, `endT1`, `missT1`, ...
    pub name: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MissKind {
    /// Cycle work still running at the deadline.
    Late,
    /// The work completes in time but its completion may be observed after
    /// the deadline, because a higher-priority release at the completion
    /// instant defers the completion event.
    Deferred,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Miss {
    pub thread: String,
    pub release: Rational,
    pub deadline: Rational,
    pub kind: MissKind,
}

/// Completion of one processing instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Completion {
    pub processing: String,
    /// Instant of the `start` event (release for the first processing of the
    /// cycle, completion of the previous one otherwise).
    pub started: Rational,
    /// Instant the last unit of work executes.
    pub natural: Rational,
    /// Latest instant the completion event can be observed: when a
    /// higher-priority thread is released at `natural`, the event may be
    /// ordered after that thread's busy window (capped at the next release).
    pub latest: Rational,
}

/// One cycle of one thread.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Job {
    pub thread: usize,
    /// Activation count since the offset.
    pub index: u64,
    /// Position within the major frame.
    pub cycle: u64,
    pub release: Rational,
    pub deadline: Rational,
    pub next_release: Rational,
    pub work: Vec<String>,
    pub completions: Vec<Completion>,
}

impl Job {
    pub fn is_complete(&self) -> bool {
        self.completions.len() == self.work.len()
    }

    /// Natural and latest instants of the cycle's `fin` event.
    pub fn fin_window(&self) -> Option<(Rational, Rational)> {
        if !self.is_complete() {
            return None;
        }
        Some(match self.completions.last() {
            Some(c) => (c.natural.clone(), c.latest.clone()),
            None => (self.release.clone(), self.release.clone()),
        })
    }

    pub fn completion(&self, processing: &str) -> Option<&Completion> {
        self.completions.iter().find(|c| c.processing == processing)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleTrace {
    pub horizon: Rational,
    pub threads: Vec<String>,
    /// Every simulated cycle, including a look-ahead past the horizon used
    /// to settle completion windows near it.
    pub jobs: Vec<Job>,
    pub segments: Vec<Segment>,
    pub events: Vec<Event>,
    pub misses: Vec<Miss>,
    pub latencies: BTreeMap<String, Vec<ChainInstance>>,
}

impl ScheduleTrace {
    pub fn is_schedulable(&self) -> bool {
        self.misses.is_empty()
    }

    /// Jobs of one thread in activation order.
    pub fn jobs_of(&self, thread: usize) -> impl Iterator<Item = &Job> {
        self.jobs.iter().filter(move |j| j.thread == thread)
    }

    /// Latest cycle of the producer thread whose outputs are visible to a
    /// reader activated at `at`; publications at that very instant count.
    pub fn visible_publication(
        &self,
        producer: usize,
        deadline: &Rational,
        at: &Rational,
    ) -> Option<&Job> {
        self.jobs_of(producer)
            .filter(|j| &(&j.release + deadline) <= at)
            .last()
    }
}

/// Simulates `spec` with the quantities of `cfg.valuation` fixed.
pub fn simulate(spec: &SystemSpec, cfg: &SimConfig) -> Result<ScheduleTrace, SimError> {
    let spec = spec
        .with_values(&cfg.valuation)
        .map_err(SimError::UnknownParameter)?;
    let open = spec.open_parameters();
    if !open.is_empty() {
        return Err(SimError::Open(open));
    }
    let diags = validate(&spec);
    if has_errors(&diags) {
        return Err(SimError::Invalid(diags));
    }
    let horizon = cfg
        .horizon
        .clone()
        .unwrap_or_else(|| default_horizon(&spec));
    if horizon.signum() <= 0 {
        return Err(SimError::NonPositiveHorizon);
    }
    let mut trace = Engine::new(&spec, horizon).run();
    let reports = measure_reactivities(&trace, &spec, &MeasureOptions::default());
    trace.latencies = reports.into_iter().map(|(k, r)| (k, r.instances)).collect();
    Ok(trace)
}

struct Engine<'a> {
    spec: &'a SystemSpec,
    horizon: Rational,
    /// Releases up to this instant are simulated.
    lookahead: Rational,
    jobs: Vec<Job>,
    remaining: Vec<Vec<Rational>>,
}

impl<'a> Engine<'a> {
    fn new(spec: &'a SystemSpec, horizon: Rational) -> Engine<'a> {
        let max_period = spec
            .threads
            .iter()
            .map(|t| t.period.clone())
            .max()
            .unwrap_or_else(Rational::one);
        let lookahead = &horizon + &max_period;
        let mut jobs = Vec::new();
        for (i, t) in spec.threads.iter().enumerate() {
            let offset = t.offset.value().expect("closed").clone();
            let deadline = t.deadline.value().expect("closed").clone();
            let cycles = t.cycles().max(1);
            let mut k = 0u64;
            loop {
                let release = &offset + &(&t.period * &Rational::from(k as i64));
                if release >= lookahead {
                    break;
                }
                let work = t
                    .cycle_work(k % cycles)
                    .into_iter()
                    .map(String::from)
                    .collect();
                jobs.push(Job {
                    thread: i,
                    index: k,
                    cycle: k % cycles,
                    deadline: &release + &deadline,
                    next_release: &release + &t.period,
                    release,
                    work,
                    completions: Vec::new(),
                });
                k += 1;
            }
        }
        let remaining = jobs
            .iter()
            .map(|j| {
                j.work
                    .iter()
                    .map(|p| {
                        spec.processing(p)
                            .and_then(|p| p.wcet.value())
                            .expect("closed")
                            .clone()
                    })
                    .collect()
            })
            .collect();
        Engine {
            spec,
            horizon,
            lookahead,
            jobs,
            remaining,
        }
    }

    fn priority(&self, thread: usize) -> u32 {
        self.spec.threads[thread].priority
    }

    fn run(mut self) -> ScheduleTrace {
        let mut releases: Vec<Rational> = self.jobs.iter().map(|j| j.release.clone()).collect();
        releases.sort();
        releases.dedup();
        let end = &self.lookahead
            + &self
                .spec
                .threads
                .iter()
                .map(|t| t.period.clone())
                .max()
                .unwrap_or_else(Rational::one);
        let mut segments: Vec<Segment> = Vec::new();
        let mut last_run: Option<(usize, usize)> = None;
        let mut t = Rational::zero();
        let mut next_rel = 0usize;
        while t < end {
            while next_rel < releases.len() && releases[next_rel] <= t {
                next_rel += 1;
            }
            let horizon_step = releases
                .get(next_rel)
                .cloned()
                .unwrap_or_else(|| end.clone());
            let ready = (0..self.jobs.len())
                .filter(|&j| {
                    self.jobs[j].release <= t
                        && self.jobs[j].completions.len() < self.jobs[j].work.len()
                })
                .min_by(|&a, &b| {
                    let (ja, jb) = (&self.jobs[a], &self.jobs[b]);
                    (self.priority(ja.thread), &ja.release)
                        .cmp(&(self.priority(jb.thread), &jb.release))
                });
            let Some(j) = ready else {
                last_run = None;
                t = horizon_step;
                continue;
            };
            let slot = self.jobs[j].completions.len();
            let run = self.remaining[j][slot].clone().min(&horizon_step - &t);
            let stop = &t + &run;
            self.remaining[j][slot] = &self.remaining[j][slot] - &run;
            let thread = self.spec.threads[self.jobs[j].thread].name.clone();
            let processing = self.jobs[j].work[slot].clone();
            match segments.last_mut() {
                Some(s) if last_run == Some((j, slot)) && s.end == t => s.end = stop.clone(),
                _ => segments.push(Segment {
                    thread,
                    processing: processing.clone(),
                    start: t.clone(),
                    end: stop.clone(),
                }),
            }
            last_run = Some((j, slot));
            if self.remaining[j][slot].is_zero() {
                let started = match slot {
                    0 => self.jobs[j].release.clone(),
                    _ => self.jobs[j].completions[slot - 1].natural.clone(),
                };
                self.jobs[j].completions.push(Completion {
                    processing,
                    started,
                    natural: stop.clone(),
                    latest: stop.clone(),
                });
            }
            t = stop;
        }
        self.defer_completions();
        self.finish(segments)
    }

    /// Widens each completion that coincides with a higher-priority release
    /// to the end of the higher-priority busy window.
    fn defer_completions(&mut self) {
        for j in 0..self.jobs.len() {
            let prio = self.priority(self.jobs[j].thread);
            let cap = self.jobs[j].next_release.clone();
            for c in 0..self.jobs[j].completions.len() {
                let at = self.jobs[j].completions[c].natural.clone();
                if !self.hp_release_at(prio, &at) {
                    continue;
                }
                let end = self
                    .hp_busy_end(prio, &at)
                    .map_or(cap.clone(), |e| e.min(cap.clone()));
                self.jobs[j].completions[c].latest = end;
            }
        }
    }

    fn hp_release_at(&self, prio: u32, at: &Rational) -> bool {
        self.jobs
            .iter()
            .any(|j| self.priority(j.thread) < prio && &j.release == at && !j.work.is_empty())
    }

    /// First instant after `after` at which every higher-priority cycle
    /// released so far is complete and none is being released.
    fn hp_busy_end(&self, prio: u32, after: &Rational) -> Option<Rational> {
        let hp: Vec<&Job> = self
            .jobs
            .iter()
            .filter(|j| self.priority(j.thread) < prio && !j.work.is_empty())
            .collect();
        let mut candidates: Vec<&Rational> = hp
            .iter()
            .flat_map(|j| j.completions.iter().map(|c| &c.natural))
            .filter(|c| *c > after)
            .collect();
        candidates.sort();
        candidates.dedup();
        candidates
            .into_iter()
            .find(|c| {
                hp.iter().all(|j| &j.release != *c)
                    && hp.iter().filter(|j| &j.release <= *c).all(|j| {
                        j.is_complete()
                            && j.completions.last().is_some_and(|last| &last.natural <= *c)
                    })
            })
            .cloned()
    }

    fn finish(self, segments: Vec<Segment>) -> ScheduleTrace {
        let horizon = self.horizon.clone();
        let threads: Vec<String> = self.spec.threads.iter().map(|t| t.name.clone()).collect();
        let prio = |i: usize| self.spec.threads[i].priority;
        // (time, class, priority, sequence, name); classes order ties:
        // completions, misses, publications, activations, dispatch.
        let mut keyed: Vec<(Rational, u8, u32, usize, String)> = Vec::new();
        let mut misses = Vec::new();
        for job in &self.jobs {
            let name = &threads[job.thread];
            let p = prio(job.thread);
            keyed.push((job.release.clone(), 3, p, 0, format!("start{name}")));
            for (i, c) in job.completions.iter().enumerate() {
                keyed.push((c.started.clone(), 4, p, i, format!("start{}", c.processing)));
                keyed.push((
                    c.natural.clone(),
                    0,
                    p,
                    2 * i,
                    format!("finish{}", c.processing),
                ));
            }
            // The processing running (or pending) when the simulation stopped.
            if let Some(pending) = job.work.get(job.completions.len()) {
                let at = job
                    .completions
                    .last()
                    .map_or(job.release.clone(), |c| c.natural.clone());
                keyed.push((at, 4, p, job.completions.len(), format!("start{pending}")));
            }
            match job.fin_window() {
                Some((natural, latest)) => {
                    keyed.push((
                        natural.clone(),
                        0,
                        p,
                        2 * job.work.len() + 1,
                        format!("fin{name}"),
                    ));
                    let late = natural > job.deadline;
                    let deferred =
                        !late && job.deadline < job.next_release && latest > job.deadline;
                    if late || deferred {
                        let kind = if late {
                            MissKind::Late
                        } else {
                            MissKind::Deferred
                        };
                        misses.push(Miss {
                            thread: name.clone(),
                            release: job.release.clone(),
                            deadline: job.deadline.clone(),
                            kind,
                        });
                    }
                    if late {
                        keyed.push((job.deadline.clone(), 1, p, 0, format!("miss{name}")));
                    }
                }
                None => {
                    misses.push(Miss {
                        thread: name.clone(),
                        release: job.release.clone(),
                        deadline: job.deadline.clone(),
                        kind: MissKind::Late,
                    });
                    keyed.push((job.deadline.clone(), 1, p, 0, format!("miss{name}")));
                }
            }
            keyed.push((job.deadline.clone(), 2, p, 0, format!("end{name}")));
        }
        keyed.sort();
        let events = keyed
            .into_iter()
            .filter(|(t, ..)| t <= &horizon)
            .map(|(time, _, _, _, name)| Event { time, name })
            .collect();
        let misses = misses
            .into_iter()
            .filter(|m| m.deadline <= horizon)
            .collect();
        let segments = segments
            .into_iter()
            .filter(|s| s.start < horizon)
            .map(|mut s| {
                s.end = s.end.min(horizon.clone());
                s
            })
            .collect();
        ScheduleTrace {
            horizon,
            threads,
            jobs: self.jobs,
            segments,
            events,
            misses,
            latencies: BTreeMap::new(),
        }
    }
}

#[cfg(test)]
mod tests;
