use super::*;
use crate::dsl::{case_study, parse, SourceDocument};
use crate::model::Endpoint;

fn q(v: i64) -> Rational {
    Rational::from(v)
}

fn nominal() -> ScheduleTrace {
    simulate(&case_study(), &SimConfig::default()).unwrap()
}

fn with(values: &[(&str, i64)]) -> SimConfig {
    SimConfig {
        horizon: None,
        valuation: values.iter().map(|(k, v)| (k.to_string(), q(*v))).collect(),
    }
}

#[test]
fn nominal_schedule_facts() {
    let t = nominal();
    assert!(t.is_schedulable(), "{:?}", t.misses);
    assert_eq!(t.horizon, q(120));
    let guidance = t
        .jobs
        .iter()
        .find(|j| j.thread == 2 && j.index == 0)
        .unwrap();
    assert_eq!(guidance.completions[0].natural, q(60));
    let monitoring = t
        .jobs
        .iter()
        .find(|j| j.thread == 1 && j.index == 0)
        .unwrap();
    let c = &monitoring.completions[0];
    assert_eq!((c.natural.clone(), c.latest.clone()), (q(10), q(11)));
    let odd = t
        .jobs
        .iter()
        .find(|j| j.thread == 0 && j.index == 1)
        .unwrap();
    assert_eq!(odd.work, vec!["Navigation", "Control"]);
    assert_eq!(odd.fin_window().unwrap().0, &odd.release + &q(4));
}

#[test]
fn tight_deadlines_miss() {
    let t = simulate(&case_study(), &with(&[("deadlineT3", 59)])).unwrap();
    assert!(t
        .misses
        .iter()
        .any(|m| m.thread == "T3" && m.kind == MissKind::Late));
    let t = simulate(&case_study(), &with(&[("deadlineT1", 3)])).unwrap();
    assert!(t.misses.iter().all(|m| m.thread == "T1"));
    assert!(!t.misses.is_empty());
    // Natural completion 10 but observable up to 11.
    let t = simulate(&case_study(), &with(&[("deadlineT2", 10)])).unwrap();
    assert_eq!(t.misses[0].kind, MissKind::Deferred);
    assert!(simulate(&case_study(), &with(&[("deadlineT2", 11)]))
        .unwrap()
        .is_schedulable());
}

#[test]
fn busy_time_is_conserved() {
    let t = nominal();
    let busy = t
        .segments
        .iter()
        .fold(Rational::zero(), |acc, s| &acc + &(&s.end - &s.start));
    // Utilisation is exactly one over the hyperperiod.
    assert_eq!(busy, q(120));
    for w in t.segments.windows(2) {
        assert!(w[0].end <= w[1].start);
    }
}

#[test]
fn highest_priority_ready_thread_runs() {
    let spec = case_study();
    let t = simulate(&spec, &with(&[("offsetT2", 3), ("offsetT3", 1)])).unwrap();
    for s in &t.segments {
        let runner = spec
            .threads
            .iter()
            .position(|x| x.name == s.thread)
            .unwrap();
        let mid = s.start.midpoint(&s.end);
        for j in &t.jobs {
            let unfinished_at_mid = j.release <= mid
                && j.completions
                    .iter()
                    .filter(|c| c.natural <= s.start)
                    .count()
                    < j.work.len();
            if unfinished_at_mid && j.thread != runner {
                assert!(
                    spec.threads[j.thread].priority > spec.threads[runner].priority,
                    "{s:?} vs {j:?}"
                );
            }
        }
    }
}

#[test]
fn steady_state_repeats() {
    let spec = case_study();
    let t = simulate(&spec, &with(&[("offsetT2", 2), ("offsetT3", 7)])).unwrap();
    let l = spec.hyperperiod();
    let base = q(7);
    let window = |k: i64| -> Vec<Option<String>> {
        let from = &base + &(&l * &q(k));
        (0..120)
            .map(|h| {
                let at = &from + &Rational::from_frac(2 * h + 1, 4);
                t.segments
                    .iter()
                    .find(|s| s.start <= at && at < s.end)
                    .map(|s| s.processing.clone())
            })
            .collect()
    };
    assert_eq!(window(0), window(1));
}

#[test]
fn nominal_reactivities_are_met() {
    let spec = case_study();
    let cfg = SimConfig {
        horizon: Some(reactivity_horizon(&spec)),
        ..Default::default()
    };
    let t = simulate(&spec, &cfg).unwrap();
    let reports = measure_reactivities(&t, &spec, &MeasureOptions::default());
    for (name, r) in &reports {
        assert_eq!(r.verdict, ReactivityVerdict::Met, "{name}: {r:?}");
        assert!(r.worst.as_ref().unwrap() <= &r.bound);
    }
    // Navigation then Control within the same odd cycle of T1.
    assert_eq!(reports["R2"].worst, Some(q(4)));
}

#[test]
fn short_horizon_is_indeterminate() {
    let spec = case_study();
    let t = simulate(
        &spec,
        &SimConfig {
            horizon: Some(q(100)),
            ..Default::default()
        },
    )
    .unwrap();
    let reports = measure_reactivities(&t, &spec, &MeasureOptions::default());
    assert_eq!(reports["R1"].verdict, ReactivityVerdict::Indeterminate);
}

const TWO_RATES: &str = "
processing Fast { period 1 in Slow out Out }
processing Slow { period 10 in In out Slow }
wcet Fast 1/4
wcet Slow 2
thread F { period 1 offset 0 deadline 1 maf 1 priority 1 run Fast when 0 mod 1 }
thread S { period 10 offset 1 deadline 8 maf 10 priority 2 run Slow when 0 mod 1 }
reactivity R { path In -> Slow -> Fast -> Out bound 12 }
";

#[test]
fn data_is_visible_from_publication_on() {
    let spec = parse(&SourceDocument::new("two.sys", TWO_RATES))
        .unwrap()
        .spec;
    let t = simulate(
        &spec,
        &SimConfig {
            horizon: Some(q(40)),
            ..Default::default()
        },
    )
    .unwrap();
    let d = q(8);
    assert!(t.visible_publication(1, &d, &q(8)).is_none());
    assert_eq!(t.visible_publication(1, &d, &q(9)).unwrap().release, q(1));
    let at9: Vec<&str> = t
        .events
        .iter()
        .filter(|e| e.time == q(9))
        .map(|e| e.name.as_str())
        .collect();
    let pos = |n: &str| at9.iter().position(|e| *e == n).unwrap();
    assert!(pos("endS") < pos("startF"));
    // The chain started at 1 completes with the fast cycle released at 9
    // (completion 9 + 1/4), or at 10 if that read is ordered before the
    // publication.
    let r = &measure_reactivities(&t, &spec, &MeasureOptions::default())["R"];
    assert_eq!(r.instances[0].start, q(1));
    assert_eq!(r.instances[0].end, Rational::from_frac(41, 4));
}

#[test]
fn single_thread_chain_latency() {
    let spec = case_study();
    let t = nominal();
    let reports = measure_reactivities(
        &t,
        &spec,
        &MeasureOptions {
            endpoint: Some(Endpoint::Completion),
            ..Default::default()
        },
    );
    let first = &reports["R2"].instances[0];
    // A measurement read at 0 is superseded by the next Navigation before any
    // Control runs, so the first complete chain starts in the odd cycle.
    assert_eq!(
        (
            first.start.clone(),
            first.end.clone(),
            first.latency.clone()
        ),
        (q(5), q(9), q(4))
    );
    let publication = measure_reactivities(
        &t,
        &spec,
        &MeasureOptions {
            endpoint: Some(Endpoint::Publication),
            ..Default::default()
        },
    );
    assert_eq!(publication["R2"].instances[0].end, q(10));
}

#[test]
fn open_parameters_are_rejected() {
    let spec = case_study().with_params(&["offsetT1".to_string()]).unwrap();
    assert_eq!(
        simulate(&spec, &SimConfig::default()).unwrap_err(),
        SimError::Open(vec!["offsetT1".into()])
    );
    let bad = with(&[("offsetT9", 1)]);
    assert!(matches!(
        simulate(&case_study(), &bad),
        Err(SimError::UnknownParameter(_))
    ));
}

#[test]
fn gantt_outputs() {
    let empty = render_ascii(&ScheduleTrace::default(), &q(1));
    assert_eq!(empty.lines().count(), 2);
    let t = nominal();
    let ascii = render_gantt(&t, GanttFormat::Ascii);
    let rows: Vec<&str> = ascii.lines().filter(|l| l.starts_with("T")).collect();
    assert_eq!(rows.len(), 3);
    // The processor never idles over the hyperperiod.
    for c in 0..60 {
        assert!(
            rows.iter()
                .any(|r| r.chars().nth(7 + c).is_some_and(|ch| ch != '.')),
            "idle at {c}"
        );
    }
    let svg = render_gantt(&t, GanttFormat::Svg);
    assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    assert_eq!(svg, render_gantt(&nominal(), GanttFormat::Svg));
}

#[test]
fn trace_serializes() {
    let t = nominal();
    let json = serde_json::to_string(&t).unwrap();
    let back: ScheduleTrace = serde_json::from_str(&json).unwrap();
    assert_eq!(back, t);
}
