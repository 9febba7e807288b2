//! Evolutionary machines: level schedules, search conditions, execution
//! modes, budgets, and the run engine for basic and general flavors.
//!
//! A machine is a sequence of level automata. Each application transforms
//! generation `X[t]` into `X[t+1]`. Basic machines flow strictly forward
//! through the schedule; general machines keep a cursor over level indices
//! that each level may move forward or backward. A level signals "backward"
//! by finishing in a state tagged `route-back`; a backward move at cursor 0
//! re-enters level 0. The generation counter advances on every application,
//! including backward moves, so the cursor and `t` are distinct.
//!
//! The search condition is checked after each level application, never
//! before the first. Inductive and limit modes do not stop on the search
//! condition; they stop when the generation word has stayed unchanged for
//! the whole stability window. Limit modes are approximated exactly like
//! inductive modes, with the stabilized generation reported as a limit
//! candidate; a finite run cannot certify a true limit.

use std::fmt;

use crate::alphabet::Word;
use crate::construct::DispatchMachine;
use crate::demo::ga::{self, FitnessFn, GaConfig, Population};
use crate::tm::{InductiveTuringMachine, ItmOutcome, TmOutcome, TuringMachine};
use crate::transducer::{DefinitionError, FiniteTransducer};

pub use crate::transducer::RunError;

/// A population word together with its generation index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generation {
    pub payload: Word,
    pub index: u64,
}

/// The automaton classes a level can belong to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelClass {
    Fa,
    Tm,
    Itm,
}

impl fmt::Display for LevelClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LevelClass::Fa => "fa",
            LevelClass::Tm => "tm",
            LevelClass::Itm => "itm",
        })
    }
}

/// One level automaton of an evolutionary machine.
#[derive(Debug, Clone, PartialEq)]
pub enum LevelAutomaton {
    Fa(FiniteTransducer),
    /// Selector-dispatched bundle of transducers; behaves as the branch the
    /// selector picks for the whole input.
    Dispatch(DispatchMachine),
    Tm(TuringMachine),
    Itm(InductiveTuringMachine),
    /// A genetic-algorithm generation executed natively. Counts as the
    /// Turing-machine class: its operators are total, deterministic, seeded
    /// procedures.
    Ga(GaConfig),
}

impl LevelAutomaton {
    pub fn class(&self) -> LevelClass {
        match self {
            LevelAutomaton::Fa(_) | LevelAutomaton::Dispatch(_) => LevelClass::Fa,
            LevelAutomaton::Tm(_) | LevelAutomaton::Ga(_) => LevelClass::Tm,
            LevelAutomaton::Itm(_) => LevelClass::Itm,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            LevelAutomaton::Fa(t) => t.name(),
            LevelAutomaton::Dispatch(d) => d.name(),
            LevelAutomaton::Tm(m) => m.name(),
            LevelAutomaton::Itm(m) => m.name(),
            LevelAutomaton::Ga(_) => "ga",
        }
    }
}

/// Rules available to `Generated` schedules. Each rule is total and
/// deterministic in the generation index.
pub const GENERATOR_RULES: &[&str] = &["identity-01", "alternate-flip-identity"];

fn generated_level(rule: &str, t: u64) -> Option<LevelAutomaton> {
    use crate::alphabet::Alphabet;
    let binary = Alphabet::binary();
    let mk = |name: &str, outs: [&str; 2]| {
        FiniteTransducer::new(
            name,
            vec!["s".into()],
            "s",
            &["s".to_string()],
            &[],
            binary.clone(),
            binary.clone(),
            vec![
                ("s".into(), "0".into(), "s".into(), Word::parse(outs[0])),
                ("s".into(), "1".into(), "s".into(), Word::parse(outs[1])),
            ],
        )
        .expect("builtin level is well-formed")
    };
    match rule {
        "identity-01" => Some(LevelAutomaton::Fa(mk("identity", ["0", "1"]))),
        "alternate-flip-identity" => Some(if t % 2 == 0 {
            LevelAutomaton::Fa(mk("bitflip", ["1", "0"]))
        } else {
            LevelAutomaton::Fa(mk("identity", ["0", "1"]))
        }),
        _ => None,
    }
}

/// How the sequence of level automata is specified.
#[derive(Debug, Clone, PartialEq)]
pub enum LevelSchedule {
    /// A finite list; running past its end exhausts the schedule.
    Explicit(Vec<LevelAutomaton>),
    /// The list repeated forever; the period is the list length.
    Periodic(Vec<LevelAutomaton>),
    /// A named built-in rule from [`GENERATOR_RULES`].
    Generated(String),
}

impl LevelSchedule {
    /// The level automaton for index `t`; `None` when an explicit schedule
    /// is exhausted.
    pub fn level_at(&self, t: u64) -> Result<Option<LevelAutomaton>, RunError> {
        match self {
            LevelSchedule::Explicit(levels) => Ok(levels.get(t as usize).cloned()),
            LevelSchedule::Periodic(levels) => {
                Ok(Some(levels[(t % levels.len() as u64) as usize].clone()))
            }
            LevelSchedule::Generated(rule) => generated_level(rule, t)
                .map(Some)
                .ok_or_else(|| RunError::Schedule(format!("unknown generator rule `{rule}`"))),
        }
    }

    pub fn period(&self) -> Option<usize> {
        match self {
            LevelSchedule::Periodic(levels) => Some(levels.len()),
            _ => None,
        }
    }

    fn validate(&self) -> Result<(), DefinitionError> {
        let check_nonempty = |levels: &Vec<LevelAutomaton>, what: &str| {
            if levels.is_empty() {
                Err(DefinitionError::Other {
                    machine: "<schedule>".into(),
                    violation: format!("{what} schedule must list at least one level"),
                })
            } else {
                Ok(())
            }
        };
        match self {
            LevelSchedule::Explicit(levels) => check_nonempty(levels, "explicit"),
            LevelSchedule::Periodic(levels) => check_nonempty(levels, "periodic"),
            LevelSchedule::Generated(rule) => {
                if generated_level(rule, 0).is_none() {
                    Err(DefinitionError::Other {
                        machine: "<schedule>".into(),
                        violation: format!("unknown generator rule `{rule}`"),
                    })
                } else {
                    Ok(())
                }
            }
        }
    }

    /// The homogeneous class of all levels, if the schedule is homogeneous.
    pub fn class(&self) -> Result<LevelClass, DefinitionError> {
        let levels: Vec<LevelAutomaton> = match self {
            LevelSchedule::Explicit(l) | LevelSchedule::Periodic(l) => l.clone(),
            LevelSchedule::Generated(rule) => (0..4)
                .filter_map(|t| generated_level(rule, t))
                .collect(),
        };
        let mut classes = levels.iter().map(LevelAutomaton::class);
        let first = classes.next().ok_or_else(|| DefinitionError::Other {
            machine: "<schedule>".into(),
            violation: "schedule has no levels".into(),
        })?;
        if classes.any(|c| c != first) {
            return Err(DefinitionError::Other {
                machine: "<schedule>".into(),
                violation: "levels must all belong to one automaton class".into(),
            });
        }
        Ok(first)
    }
}

/// When a run is considered to have built its goal population.
#[derive(Debug, Clone, PartialEq)]
pub enum SearchCondition {
    /// The generation word is accepted by this acceptor.
    AcceptedBy(FiniteTransducer),
    /// The best individual of the decoded population reaches the threshold.
    FitnessAtLeast {
        fitness: FitnessFn,
        genome_len: usize,
        population_size: usize,
        threshold: f64,
    },
    /// Never satisfied; the run ends only by budget or schedule.
    Never,
}

/// Evaluates a search condition on one generation.
pub fn check_search_condition(sc: &SearchCondition, g: &Generation) -> Result<bool, RunError> {
    match sc {
        SearchCondition::Never => Ok(false),
        SearchCondition::AcceptedBy(acc) => acc.accepts(&g.payload),
        SearchCondition::FitnessAtLeast {
            fitness,
            genome_len,
            population_size,
            threshold,
        } => {
            // Sizes of 0 mean the shape was not declared (machine files):
            // infer it from the word itself.
            let p = if *genome_len == 0 && *population_size == 0 {
                Population::decode_flexible(&g.payload)
            } else {
                Population::decode(&g.payload, *genome_len, *population_size)
            }
            .map_err(|e| RunError::Search(e.to_string()))?;
            Ok(p.best_fitness(fitness) >= *threshold)
        }
    }
}

/// The eight modes of functioning.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Ordinary state-transition computation: a degenerate period-1
    /// finite-automaton configuration, run like `Terminal`.
    FiniteState,
    /// At most this many generations in any computation.
    Bounded(u64),
    /// Run until the search condition holds; every computation is finite.
    Terminal,
    /// Like `Terminal`, with backward routing expected; requires the general
    /// flavor.
    Recursive,
    /// Stop when the generation stops changing for the stability window.
    Inductive,
    /// Inductive with backward routing; requires the general flavor.
    InductiveWithRecursion,
    /// Approximated as inductive; the result is reported as a limit
    /// candidate.
    Limit,
    /// Approximated as inductive-with-recursion, reported as above.
    LimitWithRecursion,
}

impl Mode {
    pub fn is_recursion_bearing(self) -> bool {
        matches!(
            self,
            Mode::Recursive | Mode::InductiveWithRecursion | Mode::LimitWithRecursion
        )
    }

    pub fn is_stabilizing(self) -> bool {
        matches!(
            self,
            Mode::Inductive | Mode::InductiveWithRecursion | Mode::Limit | Mode::LimitWithRecursion
        )
    }

    pub fn is_limit(self) -> bool {
        matches!(self, Mode::Limit | Mode::LimitWithRecursion)
    }

    pub fn token(self) -> String {
        match self {
            Mode::FiniteState => "finite-state".into(),
            Mode::Bounded(n) => format!("bounded {n}"),
            Mode::Terminal => "terminal".into(),
            Mode::Recursive => "recursive".into(),
            Mode::Inductive => "inductive".into(),
            Mode::InductiveWithRecursion => "inductive-with-recursion".into(),
            Mode::Limit => "limit".into(),
            Mode::LimitWithRecursion => "limit-with-recursion".into(),
        }
    }
}

/// Basic machines route strictly forward; general machines may route both
/// ways.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    Basic,
    General,
}

impl Flavor {
    pub fn token(self) -> &'static str {
        match self {
            Flavor::Basic => "basic",
            Flavor::General => "general",
        }
    }
}

/// Per-run resource limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budgets {
    pub max_generations: u64,
    pub max_steps_per_level: u64,
    pub stability_window: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            max_generations: 10_000,
            max_steps_per_level: 100_000,
            stability_window: 8,
        }
    }
}

/// Where a level sent the generation it produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn token(self) -> &'static str {
        match self {
            Direction::Forward => "fwd",
            Direction::Backward => "back",
        }
    }
}

/// One level application in a trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    /// Index of the input generation; the application produces `X[t+1]`.
    pub t: u64,
    /// Cursor position, which for basic machines always equals `t`.
    pub level: u64,
    pub dir: Direction,
    pub input: Word,
    pub output: Word,
    /// Steps the level itself took (symbols consumed for transducers, tape
    /// steps for machines, 1 for a GA generation).
    pub steps: u64,
}

/// The full record of one run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunTrace {
    records: Vec<TraceRecord>,
}

impl RunTrace {
    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    /// The generation sequence `X[0], X[1], …` reconstructed from the trace.
    pub fn generations(&self) -> Vec<Word> {
        let mut gens = Vec::with_capacity(self.records.len() + 1);
        if let Some(first) = self.records.first() {
            gens.push(first.input.clone());
        }
        for r in &self.records {
            gens.push(r.output.clone());
        }
        gens
    }
}

/// How a run ended.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    /// The search condition held on this generation.
    Satisfied { z: Generation },
    /// The generation stayed unchanged for the whole stability window,
    /// starting at index `since`.
    Stabilized {
        generation: Generation,
        since: u64,
        /// True under limit modes: the stabilized window is reported as the
        /// candidate limit of the generation sequence.
        limit_candidate: bool,
    },
    /// A budget ran out (generation budget, bounded-mode limit, or a level's
    /// step budget).
    BudgetExhausted { last: Generation },
    /// An explicit schedule ran out of levels.
    ScheduleExhausted { last: Generation },
}

impl Outcome {
    pub fn kind(&self) -> &'static str {
        match self {
            Outcome::Satisfied { .. } => "satisfied",
            Outcome::Stabilized { .. } => "stabilized",
            Outcome::BudgetExhausted { .. } => "budget-exhausted",
            Outcome::ScheduleExhausted { .. } => "schedule-exhausted",
        }
    }

    pub fn final_generation(&self) -> &Generation {
        match self {
            Outcome::Satisfied { z } => z,
            Outcome::Stabilized { generation, .. } => generation,
            Outcome::BudgetExhausted { last } => last,
            Outcome::ScheduleExhausted { last } => last,
        }
    }
}

/// Outcome plus the full trace.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub outcome: Outcome,
    pub trace: RunTrace,
}

/// Output of one level application before the engine routes it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelOutput {
    pub word: Word,
    pub direction: Direction,
    pub steps: u64,
}

enum Applied {
    Output(LevelOutput),
    /// The level's own step budget ran out; surfaces as a run-level
    /// budget-exhausted outcome.
    LevelBudget,
}

/// Applies one level automaton to a generation under the given budgets.
pub fn level_apply(
    level: &LevelAutomaton,
    g: &Generation,
    budgets: &Budgets,
) -> Result<LevelOutput, RunError> {
    match apply_inner(level, g, budgets)? {
        Applied::Output(out) => Ok(out),
        Applied::LevelBudget => Err(RunError::Level("level step budget exhausted".into())),
    }
}

fn apply_inner(
    level: &LevelAutomaton,
    g: &Generation,
    budgets: &Budgets,
) -> Result<Applied, RunError> {
    match level {
        LevelAutomaton::Fa(t) => {
            let run = t.transduce(&g.payload)?;
            Ok(Applied::Output(LevelOutput {
                word: run.output,
                direction: if run.route_back {
                    Direction::Backward
                } else {
                    Direction::Forward
                },
                steps: g.payload.len() as u64,
            }))
        }
        LevelAutomaton::Dispatch(d) => {
            let run = d.transduce(&g.payload)?;
            Ok(Applied::Output(LevelOutput {
                word: run.output,
                direction: if run.route_back {
                    Direction::Backward
                } else {
                    Direction::Forward
                },
                steps: g.payload.len() as u64,
            }))
        }
        LevelAutomaton::Tm(m) => match m.run(&g.payload, budgets.max_steps_per_level)? {
            TmOutcome::Halted {
                tape,
                steps,
                final_state,
                ..
            } => Ok(Applied::Output(LevelOutput {
                word: tape,
                direction: if m.is_route_back_state(&final_state) {
                    Direction::Backward
                } else {
                    Direction::Forward
                },
                steps,
            })),
            TmOutcome::BudgetExhausted { .. } => Ok(Applied::LevelBudget),
        },
        LevelAutomaton::Itm(m) => {
            match m.run(&g.payload, budgets.max_steps_per_level, budgets.stability_window)? {
                ItmOutcome::Stabilized {
                    output,
                    since_step,
                    final_state,
                } => Ok(Applied::Output(LevelOutput {
                    word: output,
                    direction: match final_state {
                        Some(s) if m.base().is_route_back_state(&s) => Direction::Backward,
                        _ => Direction::Forward,
                    },
                    steps: since_step,
                })),
                ItmOutcome::Undecided { .. } => Ok(Applied::LevelBudget),
            }
        }
        LevelAutomaton::Ga(cfg) => {
            let word = ga::apply_ga_level(cfg, &g.payload, g.index)?;
            Ok(Applied::Output(LevelOutput {
                word,
                direction: Direction::Forward,
                steps: 1,
            }))
        }
    }
}

/// First index `s` with `xs[s] = xs[s+1] = … = xs[s+window]`, if any.
pub fn detect_stabilization(xs: &[Word], window: usize) -> Option<usize> {
    assert!(window >= 1, "stability window must be positive");
    if xs.len() <= window {
        return None;
    }
    'outer: for s in 0..xs.len() - window {
        for i in 1..=window {
            if xs[s + i] != xs[s] {
                continue 'outer;
            }
        }
        return Some(s);
    }
    None
}

/// An evolutionary machine: flavor, level schedule, search condition, mode
/// and budgets.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionaryMachine {
    name: String,
    flavor: Flavor,
    schedule: LevelSchedule,
    search: SearchCondition,
    mode: Mode,
    budgets: Budgets,
}

impl EvolutionaryMachine {
    pub fn new(
        name: impl Into<String>,
        flavor: Flavor,
        schedule: LevelSchedule,
        search: SearchCondition,
        mode: Mode,
        budgets: Budgets,
    ) -> Result<Self, DefinitionError> {
        let name = name.into();
        schedule.validate().map_err(|e| rename(e, &name))?;
        let class = schedule.class().map_err(|e| rename(e, &name))?;
        if mode.is_recursion_bearing() && flavor == Flavor::Basic {
            return Err(DefinitionError::Other {
                machine: name,
                violation: format!("mode `{}` requires the general flavor", mode.token()),
            });
        }
        if let Mode::Bounded(n) = mode {
            if n == 0 {
                return Err(DefinitionError::Other {
                    machine: name,
                    violation: "bounded mode needs a positive generation limit".into(),
                });
            }
        }
        if mode == Mode::FiniteState
            && (class != LevelClass::Fa || schedule.period() != Some(1))
        {
            return Err(DefinitionError::Other {
                machine: name,
                violation:
                    "finite-state mode is the degenerate period-1 finite-automaton configuration"
                        .into(),
            });
        }
        if budgets.stability_window == 0 {
            return Err(DefinitionError::Other {
                machine: name,
                violation: "stability window must be positive".into(),
            });
        }
        Ok(EvolutionaryMachine {
            name,
            flavor,
            schedule,
            search,
            mode,
            budgets,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn schedule(&self) -> &LevelSchedule {
        &self.schedule
    }

    pub fn search(&self) -> &SearchCondition {
        &self.search
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn budgets(&self) -> Budgets {
        self.budgets
    }

    pub fn with_budgets(mut self, budgets: Budgets) -> Self {
        self.budgets = budgets;
        self
    }

    pub fn level_class(&self) -> LevelClass {
        self.schedule.class().expect("validated at construction")
    }

    /// Runs the machine from the initial generation `X[0] = input`.
    ///
    /// Basic flavor: the cursor equals the generation counter and a backward
    /// signal is an error. General flavor: backward moves the cursor down,
    /// with a floor at level 0.
    pub fn run(&self, input: Word) -> Result<RunResult, RunError> {
        let mut generation = Generation {
            payload: input,
            index: 0,
        };
        let mut cursor: u64 = 0;
        let mut trace = RunTrace::default();
        // Plateau over produced generations only (the input is given, not
        // produced, so it does not count toward stabilization).
        let mut plateau_start: u64 = 0;
        let mut plateau_word: Option<Word> = None;
        let generation_cap = match self.mode {
            Mode::Bounded(n) => n.min(self.budgets.max_generations),
            _ => self.budgets.max_generations,
        };

        loop {
            if generation.index >= generation_cap {
                return Ok(RunResult {
                    outcome: Outcome::BudgetExhausted { last: generation },
                    trace,
                });
            }
            let Some(level) = self.schedule.level_at(cursor)? else {
                return Ok(RunResult {
                    outcome: Outcome::ScheduleExhausted { last: generation },
                    trace,
                });
            };
            let applied = match apply_inner(&level, &generation, &self.budgets)? {
                Applied::Output(out) => out,
                Applied::LevelBudget => {
                    return Ok(RunResult {
                        outcome: Outcome::BudgetExhausted { last: generation },
                        trace,
                    })
                }
            };
            if applied.direction == Direction::Backward && self.flavor == Flavor::Basic {
                return Err(RunError::BackwardInBasic {
                    t: generation.index,
                });
            }
            let t = generation.index;
            trace.records.push(TraceRecord {
                t,
                level: cursor,
                dir: applied.direction,
                input: generation.payload.clone(),
                output: applied.word.clone(),
                steps: applied.steps,
            });
            generation = Generation {
                payload: applied.word,
                index: t + 1,
            };
            cursor = match applied.direction {
                Direction::Forward => cursor + 1,
                Direction::Backward => cursor.saturating_sub(1),
            };

            if self.mode.is_stabilizing() {
                match &plateau_word {
                    Some(w) if *w == generation.payload => {}
                    _ => {
                        plateau_word = Some(generation.payload.clone());
                        plateau_start = generation.index;
                    }
                }
                if generation.index - plateau_start >= self.budgets.stability_window {
                    return Ok(RunResult {
                        outcome: Outcome::Stabilized {
                            generation,
                            since: plateau_start,
                            limit_candidate: self.mode.is_limit(),
                        },
                        trace,
                    });
                }
            } else if check_search_condition(&self.search, &generation)? {
                return Ok(RunResult {
                    outcome: Outcome::Satisfied { z: generation },
                    trace,
                });
            }
        }
    }
}

fn rename(e: DefinitionError, name: &str) -> DefinitionError {
    match e {
        DefinitionError::Other { violation, .. } => DefinitionError::Other {
            machine: name.to_string(),
            violation,
        },
        other => other,
    }
}
