//! Command-line front end: parses a problem file and runs verification,
//! synthesis, simulation or Gantt rendering on it.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;
use stopsynth::dsl::{parse, SourceDocument};
use stopsynth::geometry::{region_equal, Rational};
use stopsynth::model::{
    compile, expand_free, CompileOptions, CompiledModel, Endpoint, ObserverCheck, SystemSpec,
};
use stopsynth::simulator::{
    default_horizon, measure_reactivities, reactivity_horizon, render_ascii, render_svg, simulate,
    MeasureOptions, ReactivityVerdict, ScheduleTrace, SimConfig,
};
use stopsynth::synthesis::{
    compositional_synth, reach_synth, verify, ExplorationOptions, SynthesisResult, Verdict,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INDETERMINATE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(
    name = "stopsynth",
    version,
    about = "Schedulability and reactivity synthesis with parametric stopwatch automata"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide schedulability of a fully valued system.
    Check(Options),
    /// Synthesize the schedulable region of the free quantities.
    Synth(Options),
    /// Simulate a fully valued system.
    Simulate(Options),
    /// Draw the simulated schedule.
    Gantt(Options),
    /// Run monolithic and compositional analyses and compare them.
    Compare(Options),
}

impl Command {
    pub fn options(&self) -> &Options {
        match self {
            Command::Check(o)
            | Command::Synth(o)
            | Command::Simulate(o)
            | Command::Gantt(o)
            | Command::Compare(o) => o,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EndpointArg {
    Completion,
    Publication,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckArg {
    /// A chain is violated as soon as it outlives its bound.
    Early,
    /// Only the latency at the end of the chain counts.
    Final,
}

#[derive(Debug, Clone, Args)]
pub struct Options {
    /// Problem file.
    pub file: PathBuf,
    /// Reactivities to observe: all, none, or a comma-separated list.
    #[arg(long, default_value = "all")]
    pub reactivities: String,
    /// Quantities to synthesize: offsets, deadlines, both, wcets, or a
    /// comma-separated list of parameter names.
    #[arg(long, value_delimiter = ',')]
    pub free: Vec<String>,
    /// One observer per analysis, regions intersected.
    #[arg(long)]
    pub compositional: bool,
    #[arg(long, value_enum)]
    pub endpoint: Option<EndpointArg>,
    #[arg(long, value_enum, default_value = "early")]
    pub observer_check: CheckArg,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_states: usize,
    #[arg(long)]
    pub max_depth: Option<usize>,
    /// Simulation horizon in milliseconds.
    #[arg(long)]
    pub horizon: Option<Rational>,
    /// Time per character of the text Gantt chart.
    #[arg(long, default_value = "1")]
    pub quantum: Rational,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// Value override, e.g. `--set deadlineT1=4`.
    #[arg(long = "set", value_parser = parse_assignment)]
    pub set: Vec<(String, Rational)>,
}

fn parse_assignment(s: &str) -> Result<(String, Rational), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected name=value, found `{s}`"))?;
    let v: Rational = v
        .trim()
        .parse()
        .map_err(|_| format!("malformed value `{v}`"))?;
    Ok((k.trim().to_string(), v))
}

/// Exit code and the text written to each stream.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn usage(msg: impl Into<String>) -> Outcome {
        let mut stderr = msg.into();
        if !stderr.ends_with('\n') {
            stderr.push('\n');
        }
        Outcome {
            code: EXIT_USAGE,
            stdout: String::new(),
            stderr,
        }
    }
}

/// Parses the process arguments, reads the problem file and runs.
pub fn main_with_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Outcome::usage(text)
            };
        }
    };
    let path = &cli.command.options().file;
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return Outcome::usage(format!("{}: {e}", path.display())),
    };
    run(
        &cli.command,
        &SourceDocument::new(path.display().to_string(), text),
    )
}

/// Runs one command on an already loaded problem document.
pub fn run(cmd: &Command, doc: &SourceDocument) -> Outcome {
    let mut stderr = String::new();
    let spec = match parse(doc) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                let _ = writeln!(stderr, "{}", w.render(&doc.name));
            }
            outcome.spec
        }
        Err(diags) => {
            let text: Vec<String> = diags.iter().map(|d| d.render(&doc.name)).collect();
            return Outcome::usage(text.join("\n"));
        }
    };
    let result = match cmd {
        Command::Check(o) => Session::new(spec, o).and_then(|s| s.check()),
        Command::Synth(o) => Session::new(spec, o).and_then(|s| s.synth()),
        Command::Simulate(o) => Session::new(spec, o).and_then(|s| s.simulate()),
        Command::Gantt(o) => Session::new(spec, o).and_then(|s| s.gantt()),
        Command::Compare(o) => Session::new(spec, o).and_then(|s| s.compare()),
    };
    let mut out = result.unwrap_or_else(Outcome::usage);
    out.stderr.insert_str(0, &stderr);
    out
}

/// A loaded problem with the command-line choices applied.
struct Session<'a> {
    spec: SystemSpec,
    opts: &'a Options,
    observers: Vec<String>,
    explore: ExplorationOptions,
}

impl<'a> Session<'a> {
    fn new(spec: SystemSpec, opts: &'a Options) -> Result<Session<'a>, String> {
        let sets: BTreeMap<String, Rational> = opts.set.iter().cloned().collect();
        let spec = spec
            .with_values(&sets)
            .map_err(|k| format!("--set: `{k}` is not an offset, deadline or WCET"))?;
        let observers = match opts.reactivities.trim() {
            "all" => spec.reactivities.iter().map(|r| r.name.clone()).collect(),
            "none" | "" => Vec::new(),
            list => {
                let names: Vec<String> = list.split(',').map(|s| s.trim().to_string()).collect();
                if let Some(bad) = names.iter().find(|n| spec.reactivity(n).is_none()) {
                    return Err(format!("--reactivities: unknown reactivity `{bad}`"));
                }
                names
            }
        };
        let explore = ExplorationOptions {
            max_states: opts.max_states,
            max_depth: opts.max_depth,
            ..Default::default()
        };
        Ok(Session {
            spec,
            opts,
            observers,
            explore,
        })
    }

    fn compile_options(
        &self,
        observers: Vec<String>,
        free: &std::collections::BTreeSet<String>,
    ) -> CompileOptions {
        CompileOptions {
            observers,
            free: free.clone(),
            check: self.check_mode(),
            endpoint: self.endpoint(),
        }
    }

    fn check_mode(&self) -> ObserverCheck {
        match self.opts.observer_check {
            CheckArg::Early => ObserverCheck::Early,
            CheckArg::Final => ObserverCheck::FinalOnly,
        }
    }

    fn endpoint(&self) -> Option<Endpoint> {
        self.opts.endpoint.map(|e| match e {
            EndpointArg::Completion => Endpoint::Completion,
            EndpointArg::Publication => Endpoint::Publication,
        })
    }

    fn require_closed(&self) -> Result<(), String> {
        if !self.opts.free.is_empty() {
            return Err("--free is only meaningful for synth and compare".into());
        }
        let open = self.spec.open_parameters();
        if open.is_empty() {
            Ok(())
        } else {
            Err(format!(
                "no value for {}; give one with --set",
                open.join(", ")
            ))
        }
    }

    /// Compiled networks: one with every observer, or one per observer.
    fn variants(
        &self,
        compositional: bool,
        free: &std::collections::BTreeSet<String>,
    ) -> Result<Vec<CompiledModel>, String> {
        let groups: Vec<Vec<String>> = if compositional && !self.observers.is_empty() {
            self.observers.iter().map(|o| vec![o.clone()]).collect()
        } else {
            vec![self.observers.clone()]
        };
        groups
            .into_iter()
            .map(|g| compile(&self.spec, &self.compile_options(g, free)).map_err(|e| e.to_string()))
            .collect()
    }

    fn free_set(&self) -> Result<std::collections::BTreeSet<String>, String> {
        let mut free = expand_free(&self.spec, &self.opts.free).map_err(|e| e.to_string())?;
        free.extend(self.spec.open_parameters());
        Ok(free)
    }

    fn verdict(&self, compositional: bool) -> Result<Verdict, String> {
        let models = self.variants(compositional, &Default::default())?;
        let verdicts: Vec<Verdict> = models
            .par_iter()
            .map(|m| {
                verify(&m.network, &m.bad, &BTreeMap::new(), &self.explore)
                    .map_err(|e| e.to_string())
            })
            .collect::<Result<_, _>>()?;
        Ok(if verdicts.contains(&Verdict::Unschedulable) {
            Verdict::Unschedulable
        } else if verdicts.contains(&Verdict::Indeterminate) {
            Verdict::Indeterminate
        } else {
            Verdict::Schedulable
        })
    }

    fn check(&self) -> Result<Outcome, String> {
        self.require_closed()?;
        let verdict = self.verdict(self.opts.compositional)?;
        let mode = if self.opts.compositional {
            "compositional"
        } else {
            "monolithic"
        };
        let stdout = match self.opts.format {
            Format::Json => format!(
                "{}\n",
                json!({ "mode": mode, "verdict": verdict, "reactivities": self.observers })
            ),
            _ => format!("{}\n", verdict_word(verdict)),
        };
        let code = match verdict {
            Verdict::Schedulable => EXIT_OK,
            Verdict::Unschedulable => EXIT_NEGATIVE,
            Verdict::Indeterminate => EXIT_INDETERMINATE,
        };
        Ok(Outcome {
            code,
            stdout,
            stderr: String::new(),
        })
    }

    fn synthesize(&self, compositional: bool) -> Result<(SynthesisResult, CompiledModel), String> {
        let free = self.free_set()?;
        let models = self.variants(compositional, &free)?;
        let result = if models.len() == 1 {
            reach_synth(&models[0].network, &models[0].bad, &self.explore)
        } else {
            let pairs: Vec<_> = models
                .iter()
                .map(|m| (m.network.clone(), m.bad.clone()))
                .collect();
            compositional_synth(&pairs, &self.explore)
        }
        .map_err(|e| e.to_string())?;
        Ok((
            result,
            models.into_iter().next().expect("at least one variant"),
        ))
    }

    fn synth(&self) -> Result<Outcome, String> {
        let (result, model) = self.synthesize(self.opts.compositional)?;
        let reg = &model.network.registry;
        let mode = if self.opts.compositional {
            "compositional"
        } else {
            "monolithic"
        };
        let stdout = match self.opts.format {
            Format::Json => {
                let doc = result.to_doc(mode, &model.network);
                format!(
                    "{}\n",
                    serde_json::to_string_pretty(&doc).map_err(|e| e.to_string())?
                )
            }
            _ => {
                let mut s = String::new();
                let _ = writeln!(s, "mode: {mode}");
                let _ = writeln!(s, "exact: {}", result.exact);
                let _ = writeln!(s, "states: {}", result.stats.states_explored);
                let _ = writeln!(s, "good: {}", result.good_region.render(reg));
                let _ = writeln!(s, "bad: {}", result.bad_region.render(reg));
                s
            }
        };
        let code = if result.exact {
            EXIT_OK
        } else {
            EXIT_INDETERMINATE
        };
        Ok(Outcome {
            code,
            stdout,
            stderr: String::new(),
        })
    }

    fn trace(&self) -> Result<ScheduleTrace, String> {
        self.require_closed()?;
        let horizon = self.opts.horizon.clone().unwrap_or_else(|| {
            if self.observers.is_empty() {
                default_horizon(&self.spec)
            } else {
                reactivity_horizon(&self.spec)
            }
        });
        let mut trace = simulate(
            &self.spec,
            &SimConfig {
                horizon: Some(horizon),
                valuation: BTreeMap::new(),
            },
        )
        .map_err(|e| e.to_string())?;
        trace.latencies.retain(|k, _| self.observers.contains(k));
        Ok(trace)
    }

    fn simulate(&self) -> Result<Outcome, String> {
        let trace = self.trace()?;
        let reports = measure_reactivities(
            &trace,
            &self.spec,
            &MeasureOptions {
                check: self.check_mode(),
                endpoint: self.endpoint(),
            },
        );
        let reports: BTreeMap<_, _> = reports
            .into_iter()
            .filter(|(k, _)| self.observers.contains(k))
            .collect();
        let stdout = match self.opts.format {
            Format::Json => {
                let doc = json!({
                    "horizon": trace.horizon,
                    "segments": trace.segments,
                    "events": trace.events,
                    "misses": trace.misses,
                    "latencies": trace.latencies,
                    "reactivities": reports,
                });
                format!(
                    "{}\n",
                    serde_json::to_string_pretty(&doc).map_err(|e| e.to_string())?
                )
            }
            Format::Svg => render_svg(&trace),
            Format::Text => {
                let mut s = String::new();
                for e in &trace.events {
                    let _ = writeln!(s, "{:>8} {}", e.time.to_string(), e.name);
                }
                let _ = writeln!(s, "deadline misses: {}", trace.misses.len());
                for m in &trace.misses {
                    let _ = writeln!(
                        s,
                        "  {} released {} deadline {} ({:?})",
                        m.thread, m.release, m.deadline, m.kind
                    );
                }
                for (name, r) in &reports {
                    let worst = r
                        .worst
                        .as_ref()
                        .map_or("-".to_string(), ToString::to_string);
                    let _ = writeln!(
                        s,
                        "{name}: worst latency {worst}, bound {}, {}",
                        r.bound,
                        reactivity_word(r.verdict)
                    );
                }
                s
            }
        };
        Ok(Outcome {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        })
    }

    fn gantt(&self) -> Result<Outcome, String> {
        let trace = self.trace()?;
        let stdout = match self.opts.format {
            Format::Svg => render_svg(&trace),
            Format::Json => format!(
                "{}\n",
                serde_json::to_string_pretty(&trace).map_err(|e| e.to_string())?
            ),
            Format::Text => {
                if self.opts.quantum.signum() <= 0 {
                    return Err("--quantum must be positive".into());
                }
                render_ascii(&trace, &self.opts.quantum)
            }
        };
        Ok(Outcome {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        })
    }

    fn compare(&self) -> Result<Outcome, String> {
        let free = self.free_set()?;
        let (stdout, code) = if free.is_empty() {
            let mono = self.verdict(false)?;
            let comp = self.verdict(true)?;
            let equal = mono == comp;
            let code = if mono == Verdict::Indeterminate || comp == Verdict::Indeterminate {
                EXIT_INDETERMINATE
            } else if equal {
                EXIT_OK
            } else {
                EXIT_NEGATIVE
            };
            let stdout = match self.opts.format {
                Format::Json => format!(
                    "{}\n",
                    json!({ "monolithic": mono, "compositional": comp, "equal": equal })
                ),
                _ => format!(
                    "monolithic: {}\ncompositional: {}\nequal: {equal}\n",
                    verdict_word(mono),
                    verdict_word(comp)
                ),
            };
            (stdout, code)
        } else {
            let (mono, model) = self.synthesize(false)?;
            let (comp, _) = self.synthesize(true)?;
            let exact = mono.exact && comp.exact;
            let equal = exact
                && region_equal(&mono.good_region, &comp.good_region).map_err(|e| e.to_string())?;
            let code = if !exact {
                EXIT_INDETERMINATE
            } else if equal {
                EXIT_OK
            } else {
                EXIT_NEGATIVE
            };
            let reg = &model.network.registry;
            let stdout = match self.opts.format {
                Format::Json => format!(
                    "{}\n",
                    json!({
                        "monolithic": mono.to_doc("monolithic", &model.network),
                        "compositional": comp.to_doc("compositional", &model.network),
                        "equal": equal,
                    })
                ),
                _ => format!(
                    "monolithic: {}\ncompositional: {}\nequal: {equal}\n",
                    mono.good_region.render(reg),
                    comp.good_region.render(reg)
                ),
            };
            (stdout, code)
        };
        Ok(Outcome {
            code,
            stdout,
            stderr: String::new(),
        })
    }
}

fn verdict_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Schedulable => "schedulable",
        Verdict::Unschedulable => "unschedulable",
        Verdict::Indeterminate => "indeterminate",
    }
}

fn reactivity_word(v: ReactivityVerdict) -> &'static str {
    match v {
        ReactivityVerdict::Met => "met",
        ReactivityVerdict::Violated => "violated",
        ReactivityVerdict::Indeterminate => "indeterminate",
    }
}
