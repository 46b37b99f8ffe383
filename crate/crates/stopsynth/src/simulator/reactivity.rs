use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geometry::Rational;
use crate::model::{Endpoint, ObserverCheck, ReactivitySpec, SystemSpec};

use super::{Job, ScheduleTrace};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MeasureOptions {
    pub check: ObserverCheck,
    /// Overrides the endpoint of every reactivity.
    pub endpoint: Option<Endpoint>,
}

/// One measured chain: from the activation that read the input to the
/// latest admissible endpoint event.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainInstance {
    pub start: Rational,
    pub end: Rational,
    pub latency: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReactivityVerdict {
    Met,
    Violated,
    /// The trace is too short to judge any chain instance.
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReactivityReport {
    pub bound: Rational,
    pub verdict: ReactivityVerdict,
    /// Largest completed latency.
    pub worst: Option<Rational>,
    pub instances: Vec<ChainInstance>,
}

/// How one tracking attempt ends.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Fate {
    /// Endpoint reached at this instant.
    Done(Rational),
    /// The tracked instance can no longer reach the endpoint; it stops being
    /// followed at this instant at the latest.
    Lost(Rational),
    /// Still followed when the trace runs out.
    Open,
}

/// Worst-case latency of each reactivity along the simulated schedule.
///
/// The chain is followed from every activation of the first host thread. A
/// consumer cycle reads the most recent publication at its activation and
/// the chain moves on at the first reading cycle that runs the next
/// processing. Simultaneous publications and activations may be ordered
/// either way, and completion events may be observed anywhere in their
/// window, so every admissible choice is explored and the latest outcome
/// kept. A chain that is abandoned more than the bound after it started
/// counts as a violation unless `check` is [`ObserverCheck::FinalOnly`].
pub fn measure_reactivities(
    trace: &ScheduleTrace,
    spec: &SystemSpec,
    opts: &MeasureOptions,
) -> BTreeMap<String, ReactivityReport> {
    let mut out = BTreeMap::new();
    let Some(tracker) = Tracker::new(trace, spec) else {
        return out;
    };
    let settle = {
        let max_offset = trace
            .jobs
            .iter()
            .filter(|j| j.index == 0)
            .map(|j| j.release.clone())
            .max();
        let l = spec.hyperperiod();
        max_offset
            .map(|o| &o + &(&l + &l))
            .unwrap_or_else(Rational::zero)
    };
    for r in &spec.reactivities {
        out.insert(r.name.clone(), tracker.measure(r, opts, &settle));
    }
    out
}

struct Tracker<'a> {
    trace: &'a ScheduleTrace,
    spec: &'a SystemSpec,
    /// Job indices per thread in activation order.
    by_thread: Vec<Vec<usize>>,
}

impl<'a> Tracker<'a> {
    fn new(trace: &'a ScheduleTrace, spec: &'a SystemSpec) -> Option<Tracker<'a>> {
        if trace.threads.len() != spec.threads.len() {
            return None;
        }
        let mut by_thread = vec![Vec::new(); spec.threads.len()];
        for (i, j) in trace.jobs.iter().enumerate() {
            by_thread[j.thread].push(i);
        }
        Some(Tracker {
            trace,
            spec,
            by_thread,
        })
    }

    fn job(&self, i: usize) -> &Job {
        &self.trace.jobs[i]
    }

    /// Jobs released before the horizon; later ones only serve as
    /// look-ahead for completion windows.
    fn trusted(&self, i: usize) -> bool {
        self.job(i).release < self.trace.horizon
    }

    fn measure(
        &self,
        r: &ReactivitySpec,
        opts: &MeasureOptions,
        settle: &Rational,
    ) -> ReactivityReport {
        let endpoint = opts.endpoint.unwrap_or(r.endpoint);
        let hosts: Option<Vec<usize>> = r.chain.iter().map(|p| self.spec.host_of(p)).collect();
        let mut report = ReactivityReport {
            bound: r.bound.clone(),
            verdict: ReactivityVerdict::Indeterminate,
            worst: None,
            instances: vec![],
        };
        let Some(hosts) = hosts else {
            return report;
        };
        let chain = Chain {
            names: &r.chain,
            hosts: &hosts,
            endpoint,
        };
        let mut judged = false;
        let mut violated = false;
        let mut open = false;
        for &j0 in &self.by_thread[hosts[0]] {
            let s = self.job(j0).release.clone();
            if &s > settle || &s + &r.bound >= self.trace.horizon {
                break;
            }
            judged = true;
            let fates = self.fates_of_guess(&chain, j0);
            let mut latest_done: Option<Rational> = None;
            for f in &fates {
                match f {
                    Fate::Done(t) => {
                        let lat = t - &s;
                        if lat > r.bound {
                            violated = true;
                        }
                        latest_done = Some(latest_done.map_or(t.clone(), |d| d.max(t.clone())));
                    }
                    Fate::Lost(t) => {
                        if opts.check == ObserverCheck::Early && (t - &s) > r.bound {
                            violated = true;
                        }
                    }
                    Fate::Open => match opts.check {
                        ObserverCheck::Early => violated = true,
                        ObserverCheck::FinalOnly => open = true,
                    },
                }
            }
            if let Some(end) = latest_done {
                let latency = &end - &s;
                report.worst = Some(
                    report
                        .worst
                        .map_or(latency.clone(), |w| w.max(latency.clone())),
                );
                report.instances.push(ChainInstance {
                    start: s,
                    end,
                    latency,
                });
            }
        }
        report.verdict = if violated {
            ReactivityVerdict::Violated
        } else if !judged || open {
            ReactivityVerdict::Indeterminate
        } else {
            ReactivityVerdict::Met
        };
        report
    }

    fn fates_of_guess(&self, chain: &Chain, j0: usize) -> Vec<Fate> {
        let job = self.job(j0);
        if !job.work.iter().any(|p| p == &chain.names[0]) {
            // The guessed cycle does not run the first processing; the next
            // activation of the same thread abandons the guess.
            return vec![Fate::Lost(job.next_release.clone())];
        }
        self.after_finish(chain, 0, j0)
    }

    /// Outcomes once processing `k` of the chain completed in job `j`.
    fn after_finish(&self, chain: &Chain, k: usize, j: usize) -> Vec<Fate> {
        let job = self.job(j);
        if job.completion(&chain.names[k]).is_none() {
            return vec![Fate::Open];
        }
        if k + 1 == chain.names.len() {
            return vec![match chain.endpoint {
                Endpoint::Completion => match job.fin_window() {
                    Some((_, latest)) => Fate::Done(latest),
                    None => Fate::Open,
                },
                Endpoint::Publication => Fate::Done(job.deadline.clone()),
            }];
        }
        if chain.hosts[k] == chain.hosts[k + 1] {
            self.same_thread_hop(chain, k, j)
        } else {
            self.thread_hop(chain, k, j)
        }
    }

    fn same_thread_hop(&self, chain: &Chain, k: usize, j: usize) -> Vec<Fate> {
        let (producer, consumer) = (&chain.names[k], &chain.names[k + 1]);
        let job = self.job(j);
        let at = |job: &Job, p: &str| job.work.iter().position(|w| w == p);
        if at(job, consumer) > at(job, producer) {
            return self.after_finish(chain, k + 1, j);
        }
        for &next in self.later_jobs(chain.hosts[k], j) {
            if !self.trusted(next) {
                break;
            }
            let n = self.job(next);
            match (at(n, consumer), at(n, producer)) {
                (Some(c), p) if p.is_none_or(|p| c < p) => {
                    return self.after_finish(chain, k + 1, next)
                }
                (_, Some(_)) => {
                    // A newer instance of the producer replaces the tracked one.
                    return vec![n
                        .completion(producer)
                        .map_or(Fate::Open, |c| Fate::Lost(c.latest.clone()))];
                }
                _ => {}
            }
        }
        vec![Fate::Open]
    }

    fn thread_hop(&self, chain: &Chain, k: usize, j: usize) -> Vec<Fate> {
        let (a, b) = (chain.hosts[k], chain.hosts[k + 1]);
        let producer = &chain.names[k];
        let consumer = &chain.names[k + 1];
        let published = self.job(j).deadline.clone();
        // Publication of the next producer instance, which hides ours.
        let overwrite = self
            .later_jobs(a, j)
            .iter()
            .copied()
            .take_while(|&i| self.trusted(i))
            .find(|&i| self.job(i).work.iter().any(|p| p == producer))
            .map(|i| self.job(i).deadline.clone());
        let readers: Vec<usize> = self.by_thread[b]
            .iter()
            .copied()
            .filter(|&i| self.job(i).release >= published)
            .take_while(|&i| overwrite.as_ref().is_none_or(|o| &self.job(i).release <= o))
            .collect();
        let tie_first = readers
            .first()
            .is_some_and(|&i| self.job(i).release == published);
        let tie_last = overwrite
            .as_ref()
            .is_some_and(|o| readers.last().is_some_and(|&i| &self.job(i).release == o));

        let mut fates = Vec::new();
        for read_first in [false, true] {
            if read_first && !tie_first {
                continue;
            }
            for read_last in [false, true] {
                if read_last && !tie_last {
                    continue;
                }
                let valid: Vec<usize> = readers
                    .iter()
                    .copied()
                    .filter(|&i| {
                        let r = &self.job(i).release;
                        if r == &published {
                            read_first
                        } else if overwrite.as_ref() == Some(r) {
                            read_last
                        } else {
                            true
                        }
                    })
                    .collect();
                fates.extend(self.consume(
                    chain,
                    k,
                    b,
                    consumer,
                    &valid,
                    overwrite.as_ref(),
                    read_last,
                ));
            }
        }
        fates
    }

    /// Fate of the tracked instance given the consumer cycles that read it.
    #[allow(clippy::too_many_arguments)]
    fn consume(
        &self,
        chain: &Chain,
        k: usize,
        b: usize,
        consumer: &str,
        valid: &[usize],
        overwrite: Option<&Rational>,
        read_at_overwrite: bool,
    ) -> Vec<Fate> {
        if let Some(&i) = valid
            .iter()
            .find(|&&i| self.job(i).work.iter().any(|p| p == consumer))
        {
            if !self.trusted(i) {
                return vec![Fate::Open];
            }
            return self.after_finish(chain, k + 1, i);
        }
        let Some(overwrite) = overwrite else {
            return vec![Fate::Open];
        };
        if valid.is_empty() {
            return vec![Fate::Lost(overwrite.clone())];
        }
        // Read but not consumed: the next consumer activation that can only
        // see the newer publication ends the tracking.
        let next = self.by_thread[b].iter().copied().find(|&i| {
            let r = &self.job(i).release;
            r > overwrite || (r == overwrite && !read_at_overwrite)
        });
        match next {
            Some(i) if self.trusted(i) => vec![Fate::Lost(self.job(i).release.clone())],
            _ => vec![Fate::Open],
        }
    }

    fn later_jobs(&self, thread: usize, j: usize) -> &[usize] {
        let list = &self.by_thread[thread];
        let pos = list
            .iter()
            .position(|&i| i == j)
            .expect("job belongs to thread");
        &list[pos + 1..]
    }
}

struct Chain<'a> {
    names: &'a [String],
    hosts: &'a [usize],
    endpoint: Endpoint,
}
