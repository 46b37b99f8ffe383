use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::automata::{ActionId, Automaton, AutomatonBuilder, LocationId, Network};
use crate::geometry::{
    LinExpr, LinearConstraint, Polyhedron, Rational, Registry, Universe, VarId, VarKind,
};
use crate::synthesis::BadSpec;

use super::spec::{
    deadline_param, offset_param, wcet_param, Endpoint, Quantity, ReactivitySpec, SystemSpec,
    ThreadSpec,
};
use super::validate::{has_errors, validate};
use super::ModelError;

/// Largest thread count accepted by the scheduler generator.
pub const MAX_THREADS: usize = 16;

/// Which observer locations may report a violation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ObserverCheck {
    /// Any measuring location once the bound is exceeded.
    #[default]
    Early,
    /// Only the final event of the chain.
    FinalOnly,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CompileOptions {
    /// Reactivities to observe, by name.
    pub observers: Vec<String>,
    /// Quantities to turn into parameters, by parameter name.
    pub free: BTreeSet<String>,
    pub check: ObserverCheck,
    /// Overrides the endpoint of every observed reactivity.
    pub endpoint: Option<Endpoint>,
}

/// Where a timing symbol of the specification ended up.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Home {
    Constant(Rational),
    Parameter(VarId),
}

#[derive(Clone, Debug)]
pub struct CompiledModel {
    pub network: Network,
    pub bad: BadSpec,
    pub actions: BTreeMap<String, ActionId>,
    pub params: BTreeMap<String, VarId>,
    /// Symbol key (`period.T1`, `wcet.Navigation`, `bound.R2`, ...) to home.
    pub symbols: BTreeMap<String, Home>,
    /// Automaton index of each compiled observer.
    pub observers: BTreeMap<String, usize>,
}

/// Expands `offsets`, `deadlines`, `both` and `wcets` into parameter names and
/// checks the remaining items against the specification.
pub fn expand_free(spec: &SystemSpec, items: &[String]) -> Result<BTreeSet<String>, ModelError> {
    let mut out = BTreeSet::new();
    for item in items {
        match item.as_str() {
            "offsets" => out.extend(spec.threads.iter().map(|t| offset_param(&t.name))),
            "deadlines" => out.extend(spec.threads.iter().map(|t| deadline_param(&t.name))),
            "both" => {
                out.extend(spec.threads.iter().map(|t| offset_param(&t.name)));
                out.extend(spec.threads.iter().map(|t| deadline_param(&t.name)));
            }
            "wcets" => out.extend(spec.processings.iter().map(|p| wcet_param(&p.name))),
            name if spec.quantity(name).is_some() => {
                out.insert(name.to_string());
            }
            name => return Err(ModelError::UnknownParameter(name.to_string())),
        }
    }
    Ok(out)
}

fn k(v: &Rational) -> LinExpr {
    LinExpr::constant(v.clone())
}

fn x(v: VarId) -> LinExpr {
    LinExpr::var(v)
}

/// Registered variables and actions shared by all generated automata.
pub struct Compiler<'a> {
    spec: SystemSpec,
    opts: &'a CompileOptions,
    reg: Registry,
    universe: Universe,
    actions: Vec<String>,
    action_ids: BTreeMap<String, ActionId>,
    params: BTreeMap<String, VarId>,
    thread_clock: Vec<VarId>,
    exec_clock: BTreeMap<String, VarId>,
    act_clock: BTreeMap<String, VarId>,
    obs_clock: BTreeMap<String, VarId>,
    symbols: BTreeMap<String, Home>,
}

impl<'a> Compiler<'a> {
    pub fn new(spec: &SystemSpec, opts: &'a CompileOptions) -> Result<Compiler<'a>, ModelError> {
        let diags = validate(spec);
        if has_errors(&diags) {
            return Err(ModelError::Invalid(diags));
        }
        if spec.threads.len() > MAX_THREADS {
            return Err(ModelError::TooManyThreads(spec.threads.len()));
        }
        for name in &opts.observers {
            if spec.reactivity(name).is_none() {
                return Err(ModelError::UnknownReactivity(name.clone()));
            }
        }
        let spec = spec
            .with_params(&opts.free)
            .map_err(ModelError::UnknownParameter)?;
        let mut reg = Registry::new();
        let mut params = BTreeMap::new();
        for name in spec.parameter_candidates() {
            if spec.quantity(&name) == Some(&Quantity::Param) {
                params.insert(name.clone(), reg.register(&name, VarKind::Parameter)?);
            }
        }
        let mut thread_clock = Vec::new();
        let mut exec_clock = BTreeMap::new();
        for t in &spec.threads {
            thread_clock.push(reg.register(&format!("x{}", t.name), VarKind::Clock)?);
            for s in &t.slots {
                exec_clock.insert(
                    s.processing.clone(),
                    reg.register(&format!("xExec{}", s.processing), VarKind::Clock)?,
                );
            }
        }
        let mut act_clock = BTreeMap::new();
        for p in &spec.processings {
            act_clock.insert(
                p.name.clone(),
                reg.register(&format!("xAct{}", p.name), VarKind::Clock)?,
            );
        }
        let mut obs_clock = BTreeMap::new();
        for name in &opts.observers {
            obs_clock.insert(
                name.clone(),
                reg.register(&format!("xObs{name}"), VarKind::Clock)?,
            );
        }
        let universe = Universe::new(reg.vars());

        let mut c = Compiler {
            spec,
            opts,
            reg,
            universe,
            actions: Vec::new(),
            action_ids: BTreeMap::new(),
            params,
            thread_clock,
            exec_clock,
            act_clock,
            obs_clock,
            symbols: BTreeMap::new(),
        };
        let threads: Vec<String> = c.spec.threads.iter().map(|t| t.name.clone()).collect();
        for t in &threads {
            for prefix in ["start", "end", "fin", "miss"] {
                c.declare(&format!("{prefix}{t}"));
            }
        }
        let procs: Vec<String> = c.spec.processings.iter().map(|p| p.name.clone()).collect();
        for p in &procs {
            for prefix in ["act", "start", "finish", "overrun"] {
                c.declare(&format!("{prefix}{p}"));
            }
        }
        c.declare("conflict");
        for r in &opts.observers {
            c.declare(&format!("violation{r}"));
        }
        Ok(c)
    }

    fn declare(&mut self, name: &str) -> ActionId {
        if let Some(a) = self.action_ids.get(name) {
            return *a;
        }
        let id = ActionId(self.actions.len() as u32);
        self.actions.push(name.to_string());
        self.action_ids.insert(name.to_string(), id);
        id
    }

    fn act(&self, name: &str) -> ActionId {
        self.action_ids[name]
    }

    fn home(&mut self, key: String, h: Home) -> Result<(), ModelError> {
        if self.symbols.insert(key.clone(), h).is_some() {
            return Err(ModelError::SymbolTwice(key));
        }
        Ok(())
    }

    fn quantity(&self, q: &Quantity, param: &str) -> (LinExpr, Home) {
        match q {
            Quantity::Value(v) => (k(v), Home::Constant(v.clone())),
            Quantity::Param => {
                let p = self.params[param];
                (x(p), Home::Parameter(p))
            }
        }
    }

    fn offset(&self, t: &ThreadSpec) -> (LinExpr, Home) {
        self.quantity(&t.offset, &offset_param(&t.name))
    }

    fn deadline(&self, t: &ThreadSpec) -> (LinExpr, Home) {
        self.quantity(&t.deadline, &deadline_param(&t.name))
    }

    fn wcet(&self, processing: &str) -> (LinExpr, Home) {
        let p = self.spec.processing(processing).expect("validated");
        self.quantity(&p.wcet, &wcet_param(processing))
    }

    /// Periodic activation of one processing, anchored at the host's offset
    /// plus the first cycle that runs it.
    pub fn gen_activation(&mut self, processing: &str) -> Result<Automaton, ModelError> {
        let p = self.spec.processing(processing).expect("validated").clone();
        let host = &self.spec.threads[self.spec.host_of(processing).expect("validated")];
        let slot = host
            .slots
            .iter()
            .find(|s| s.processing == processing)
            .expect("validated");
        let first = self.offset(host).0.plus(&k(
            &(&host.period * &Rational::from(i64::from(slot.residue)))
        ));
        let clock = self.act_clock[processing];
        let (act, finish, overrun) = (
            self.act(&format!("act{processing}")),
            self.act(&format!("finish{processing}")),
            self.act(&format!("overrun{processing}")),
        );
        let pp = k(&p.period);

        let mut b =
            AutomatonBuilder::new(&format!("activation{processing}"), self.universe.clone());
        let wait = b.location("wait", vec![x(clock).le(&first)], [], false)?;
        let pending = b.location("pending", vec![], [], false)?;
        let served = b.location("served", vec![x(clock).le(&pp)], [], false)?;
        let bad = b.location("overrun", vec![], [], true)?;
        b.edge(wait, vec![x(clock).eq(&first)], act, [clock], pending)?;
        b.edge(pending, vec![], finish, [], served)?;
        b.edge(served, vec![x(clock).eq(&pp)], act, [clock], pending)?;
        b.edge(pending, vec![x(clock).gt(&pp)], overrun, [], bad)?;
        self.home(format!("pp.{processing}"), Home::Constant(p.period.clone()))?;
        Ok(b.build()?)
    }

    /// Cyclic thread behaviour over one major frame with deadline-miss
    /// detection.
    pub fn gen_thread(&mut self, index: usize) -> Result<Automaton, ModelError> {
        let t = self.spec.threads[index].clone();
        let xt = self.thread_clock[index];
        let execs: Vec<VarId> = t
            .slots
            .iter()
            .map(|s| self.exec_clock[&s.processing])
            .collect();
        let all_but = |keep: VarId| execs.iter().copied().filter(move |c| *c != keep);
        let period = k(&t.period);
        let (offset, offset_home) = self.offset(&t);
        let (deadline, deadline_home) = self.deadline(&t);
        let start_t = self.act(&format!("start{}", t.name));
        let end_t = self.act(&format!("end{}", t.name));
        let fin_t = self.act(&format!("fin{}", t.name));
        let miss = self.act(&format!("miss{}", t.name));
        let zero = LinExpr::int(0);

        let mut b = AutomatonBuilder::new(&format!("thread{}", t.name), self.universe.clone());
        let missed = b.location("missed", vec![], execs.clone(), true)?;
        let off = b.location("offset", vec![x(xt).le(&offset)], execs.clone(), false)?;
        b.set_initial(off);
        let cycles = t.cycles();
        let mut starts = Vec::new();
        for c in 0..cycles {
            starts.push(b.location(
                &format!("c{c}_start"),
                vec![x(xt).le(&zero)],
                execs.clone(),
                false,
            )?);
        }
        b.edge(off, vec![x(xt).eq(&offset)], start_t, [xt], starts[0])?;

        for c in 0..cycles {
            let work = t.cycle_work(c);
            let idle = b.location(
                &format!("c{c}_idle"),
                vec![x(xt).le(&deadline)],
                execs.clone(),
                false,
            )?;
            let wait = b.location(
                &format!("c{c}_wait"),
                vec![x(xt).le(&period)],
                execs.clone(),
                false,
            )?;
            let mut here = starts[c as usize];
            for (i, name) in work.iter().enumerate() {
                let clock = self.exec_clock[*name];
                let (wcet, _) = self.wcet(name);
                let last = i + 1 == work.len();
                let running = vec![x(clock).le(&wcet), x(xt).le(&period)];
                let exec = b.location(
                    &format!("c{c}_exec_{name}"),
                    running.clone(),
                    all_but(clock),
                    false,
                )?;
                b.edge(
                    here,
                    vec![],
                    self.act(&format!("start{name}")),
                    [clock],
                    exec,
                )?;
                if here != starts[c as usize] {
                    // A pending processing start is still unfinished work.
                    b.edge(here, vec![x(xt).eq(&deadline)], miss, [], missed)?;
                    b.edge(here, vec![x(xt).gt(&deadline)], miss, [], missed)?;
                }
                let at_deadline = if last {
                    vec![x(xt).eq(&deadline), x(clock).lt(&wcet)]
                } else {
                    vec![x(xt).eq(&deadline)]
                };
                b.edge(exec, at_deadline, miss, [], missed)?;
                b.edge(exec, vec![x(xt).gt(&deadline)], miss, [], missed)?;
                let label = if last {
                    format!("c{c}_done")
                } else {
                    format!("c{c}_after_{name}")
                };
                let after = b.location(&label, running, all_but(clock), false)?;
                b.edge(
                    exec,
                    vec![x(clock).eq(&wcet)],
                    self.act(&format!("finish{name}")),
                    [],
                    after,
                )?;
                here = after;
            }
            if here != starts[c as usize] {
                b.edge(here, vec![x(xt).gt(&deadline)], miss, [], missed)?;
            }
            b.edge(here, vec![], fin_t, [], idle)?;
            b.edge(idle, vec![x(xt).eq(&deadline)], end_t, [], wait)?;
            let next = starts[((c + 1) % cycles) as usize];
            b.edge(wait, vec![x(xt).eq(&period)], start_t, [xt], next)?;
        }
        b.declare(miss);

        self.home(
            format!("period.{}", t.name),
            Home::Constant(t.period.clone()),
        )?;
        self.home(format!("offset.{}", t.name), offset_home)?;
        self.home(format!("deadline.{}", t.name), deadline_home)?;
        self.home(format!("maf.{}", t.name), Home::Constant(t.maf.clone()))?;
        for s in &t.slots {
            let (_, h) = self.wcet(&s.processing);
            self.home(format!("wcet.{}", s.processing), h)?;
        }
        Ok(b.build()?)
    }

    /// Preemptive fixed-priority scheduler: one location per set of active
    /// threads, freezing the execution clocks of all but the most urgent.
    pub fn gen_scheduler(&mut self) -> Result<Automaton, ModelError> {
        let n = self.spec.threads.len();
        if n > MAX_THREADS {
            return Err(ModelError::TooManyThreads(n));
        }
        let threads = self.spec.threads.clone();
        let exec_of = |t: &ThreadSpec| -> Vec<VarId> {
            t.slots
                .iter()
                .map(|s| self.exec_clock[&s.processing])
                .collect()
        };
        let mut b = AutomatonBuilder::new("scheduler", self.universe.clone());
        let mut locs = Vec::with_capacity(1 << n);
        for mask in 0usize..(1 << n) {
            let active: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            let top = active.iter().copied().min_by_key(|i| threads[*i].priority);
            let frozen: Vec<VarId> = active
                .iter()
                .filter(|i| Some(**i) != top)
                .flat_map(|i| exec_of(&threads[*i]))
                .collect();
            let name = if active.is_empty() {
                "idle".to_string()
            } else {
                active
                    .iter()
                    .map(|i| threads[*i].name.as_str())
                    .collect::<Vec<_>>()
                    .join("+")
            };
            locs.push(b.location(&name, vec![], frozen, false)?);
        }
        let conflict = b.location("conflict", vec![], [], true)?;
        for mask in 0usize..(1 << n) {
            for (i, t) in threads.iter().enumerate() {
                let bit = 1 << i;
                let start = self.act(&format!("start{}", t.name));
                let fin = self.act(&format!("fin{}", t.name));
                if mask & bit == 0 {
                    b.edge(locs[mask], vec![], start, [], locs[mask | bit])?;
                } else {
                    b.edge(locs[mask], vec![], start, [], conflict)?;
                    b.edge(locs[mask], vec![], fin, [], locs[mask & !bit])?;
                }
            }
        }
        Ok(b.build()?)
    }

    /// Observer measuring one reactivity chain from a guessed start of the
    /// first host thread.
    pub fn gen_observer(&mut self, name: &str) -> Result<Automaton, ModelError> {
        let r: ReactivitySpec = self
            .spec
            .reactivity(name)
            .ok_or_else(|| ModelError::UnknownReactivity(name.into()))?
            .clone();
        let clock = *self
            .obs_clock
            .get(name)
            .ok_or_else(|| ModelError::UnknownReactivity(name.into()))?;
        let hosts: Vec<usize> = r
            .chain
            .iter()
            .map(|p| {
                self.spec
                    .host_of(p)
                    .ok_or_else(|| ModelError::Unallocated(p.clone()))
            })
            .collect::<Result<_, _>>()?;
        let tname = |i: usize| self.spec.threads[i].name.clone();
        let endpoint = self.opts.endpoint.unwrap_or(r.endpoint);
        let bound = k(&r.bound);
        let n = r.chain.len();

        let start_p: Vec<ActionId> = r
            .chain
            .iter()
            .map(|p| self.act(&format!("start{p}")))
            .collect();
        let finish_p: Vec<ActionId> = r
            .chain
            .iter()
            .map(|p| self.act(&format!("finish{p}")))
            .collect();
        let guess = self.act(&format!("start{}", tname(hosts[0])));
        let end_action = match endpoint {
            Endpoint::Completion => self.act(&format!("fin{}", tname(hosts[n - 1]))),
            Endpoint::Publication => self.act(&format!("end{}", tname(hosts[n - 1]))),
        };
        let violation = self.act(&format!("violation{name}"));

        let mut alphabet: BTreeSet<ActionId> = BTreeSet::new();
        alphabet.insert(guess);
        alphabet.extend(&start_p);
        alphabet.extend(&finish_p);
        alphabet.insert(end_action);
        for i in 0..n - 1 {
            if hosts[i] != hosts[i + 1] {
                alphabet.insert(self.act(&format!("end{}", tname(hosts[i]))));
                alphabet.insert(self.act(&format!("start{}", tname(hosts[i + 1]))));
            }
        }

        // Each measuring location lists its specific moves; `None` blocks.
        // Every other alphabet action loops.
        type Moves = Vec<(ActionId, Option<LocationId>)>;
        let mut b = AutomatonBuilder::new(&format!("observer{name}"), self.universe.clone());
        let init = b.location("init", vec![], [], false)?;
        let good = b.location("good", vec![], [], false)?;
        let bad = b.location("bad", vec![], [], true)?;
        let mut measuring: Vec<(LocationId, Moves)> = Vec::new();

        let final_loc = b.location("await_end", vec![], [], false)?;
        // Built back to front so each segment knows its successor.
        let mut await_finish: Vec<LocationId> = vec![0; n];
        for i in (0..n).rev() {
            let p = &r.chain[i];
            let f = b.location(&format!("await_finish_{p}"), vec![], [], false)?;
            await_finish[i] = f;
            let after = if i + 1 == n {
                final_loc
            } else if hosts[i] == hosts[i + 1] {
                let l = b.location(&format!("await_next_{p}"), vec![], [], false)?;
                measuring.push((
                    l,
                    vec![
                        (start_p[i + 1], Some(await_finish[i + 1])),
                        (finish_p[i], None),
                    ],
                ));
                l
            } else {
                let end_a = self.act(&format!("end{}", tname(hosts[i])));
                let start_b = self.act(&format!("start{}", tname(hosts[i + 1])));
                let pubw = b.location(&format!("await_pub_{p}"), vec![], [], false)?;
                let h = |b: &mut AutomatonBuilder, tag: &str| {
                    b.location(&format!("hop_{p}_{tag}"), vec![], [], false)
                };
                let (f_clean, f_dirty) = (h(&mut b, "unread_clean")?, h(&mut b, "unread_dirty")?);
                let (t_clean, t_dirty, t_over) = (
                    h(&mut b, "read_clean")?,
                    h(&mut b, "read_dirty")?,
                    h(&mut b, "read_over")?,
                );
                let next = await_finish[i + 1];
                measuring.push((pubw, vec![(end_a, Some(f_clean))]));
                measuring.push((
                    f_clean,
                    vec![(start_b, Some(t_clean)), (finish_p[i], Some(f_dirty))],
                ));
                measuring.push((f_dirty, vec![(start_b, Some(t_dirty)), (end_a, None)]));
                measuring.push((
                    t_clean,
                    vec![(finish_p[i], Some(t_dirty)), (start_p[i + 1], Some(next))],
                ));
                measuring.push((
                    t_dirty,
                    vec![(end_a, Some(t_over)), (start_p[i + 1], Some(next))],
                ));
                measuring.push((t_over, vec![(start_b, None), (start_p[i + 1], Some(next))]));
                pubw
            };
            measuring.push((f, vec![(finish_p[i], Some(after)), (start_p[i], None)]));
        }
        let first = b.location(&format!("await_start_{}", r.chain[0]), vec![], [], false)?;
        measuring.push((
            first,
            vec![(start_p[0], Some(await_finish[0])), (guess, None)],
        ));
        measuring.push((final_loc, vec![(end_action, None)]));

        for a in &alphabet {
            b.edge(init, vec![], *a, [], init)?;
            b.edge(good, vec![], *a, [], good)?;
        }
        b.edge(init, vec![], guess, [clock], first)?;
        b.edge(final_loc, vec![x(clock).le(&bound)], end_action, [], good)?;
        b.edge(final_loc, vec![x(clock).gt(&bound)], end_action, [], bad)?;
        measuring.sort_by_key(|(l, _)| *l);
        for (loc, moves) in &measuring {
            for a in &alphabet {
                match moves.iter().find(|(m, _)| m == a) {
                    Some((_, Some(target))) => b.edge(*loc, vec![], *a, [], *target)?,
                    Some((_, None)) => {}
                    None => b.edge(*loc, vec![], *a, [], *loc)?,
                }
            }
            if self.opts.check == ObserverCheck::Early {
                b.edge(*loc, vec![x(clock).gt(&bound)], violation, [], bad)?;
            }
        }
        b.declare(violation);
        self.home(format!("bound.{name}"), Home::Constant(r.bound.clone()))?;
        Ok(b.build()?)
    }

    fn domain(&self) -> Result<Polyhedron, ModelError> {
        let mut rows: Vec<LinearConstraint> = Vec::new();
        let zero = LinExpr::int(0);
        for t in &self.spec.threads {
            if let Some(p) = self.params.get(&offset_param(&t.name)) {
                rows.push(x(*p).ge(&zero));
                rows.push(x(*p).le(&k(&t.period)));
            }
            if let Some(p) = self.params.get(&deadline_param(&t.name)) {
                rows.push(x(*p).gt(&zero));
                rows.push(x(*p).le(&k(&t.period)));
            }
        }
        for proc_ in &self.spec.processings {
            if let Some(p) = self.params.get(&wcet_param(&proc_.name)) {
                rows.push(x(*p).gt(&zero));
                rows.push(x(*p).le(&k(&proc_.period)));
            }
        }
        Ok(Polyhedron::new(self.universe.clone(), rows)?)
    }

    pub fn finish(mut self) -> Result<CompiledModel, ModelError> {
        let mut automata = Vec::new();
        let procs: Vec<String> = self
            .spec
            .processings
            .iter()
            .map(|p| p.name.clone())
            .collect();
        for p in &procs {
            automata.push(self.gen_activation(p)?);
        }
        for i in 0..self.spec.threads.len() {
            automata.push(self.gen_thread(i)?);
        }
        automata.push(self.gen_scheduler()?);
        let mut observers = BTreeMap::new();
        for name in self.opts.observers.clone() {
            observers.insert(name.clone(), automata.len());
            automata.push(self.gen_observer(&name)?);
        }
        let domain = self.domain()?;
        let network = Network::new(
            Arc::new(self.reg),
            self.universe,
            self.actions,
            automata,
            domain,
        )?;
        let bad = BadSpec::all_bad(&network);
        Ok(CompiledModel {
            network,
            bad,
            actions: self.action_ids,
            params: self.params,
            symbols: self.symbols,
            observers,
        })
    }
}

/// Compiles a specification into a network of activation, thread, scheduler
/// and observer automata.
pub fn compile(spec: &SystemSpec, opts: &CompileOptions) -> Result<CompiledModel, ModelError> {
    Compiler::new(spec, opts)?.finish()
}

impl CompiledModel {
    /// Checks that every timing symbol of `spec` has exactly one home.
    pub fn audit(&self, spec: &SystemSpec) -> Result<(), ModelError> {
        let mut expected: Vec<String> = Vec::new();
        for t in &spec.threads {
            for f in ["period", "offset", "deadline", "maf"] {
                expected.push(format!("{f}.{}", t.name));
            }
        }
        for p in &spec.processings {
            expected.push(format!("wcet.{}", p.name));
            expected.push(format!("pp.{}", p.name));
        }
        for r in self.observers.keys() {
            expected.push(format!("bound.{r}"));
        }
        for key in &expected {
            if !self.symbols.contains_key(key) {
                return Err(ModelError::SymbolMissing(key.clone()));
            }
        }
        if self.symbols.len() != expected.len() {
            let extra = self
                .symbols
                .keys()
                .find(|k| !expected.contains(k))
                .cloned()
                .unwrap_or_default();
            return Err(ModelError::SymbolTwice(extra));
        }
        for (key, home) in &self.symbols {
            if let Home::Parameter(v) = home {
                let param = self.network.registry.name(*v);
                if self.params.get(param) != Some(v) {
                    return Err(ModelError::SymbolMissing(key.clone()));
                }
            }
        }
        Ok(())
    }

    pub fn param(&self, name: &str) -> Option<VarId> {
        self.params.get(name).copied()
    }

    /// Turns a name-keyed valuation into one keyed by parameter variables.
    /// Every parameter must be given a value.
    pub fn valuation(
        &self,
        values: &BTreeMap<String, Rational>,
    ) -> Result<BTreeMap<VarId, Rational>, ModelError> {
        let mut out = BTreeMap::new();
        for (name, v) in &self.params {
            let val = values
                .get(name)
                .ok_or_else(|| ModelError::MissingValue(name.clone()))?;
            out.insert(*v, val.clone());
        }
        Ok(out)
    }
}
