//! Constructive transformations between machine classes.
//!
//! * [`p_compose_fa`] / [`p_compose_tm`] — selector-dispatched parallel
//!   composition: a machine `D` whose behavior on every input `u` equals the
//!   behavior of the branch the selector picks for `u`.
//! * [`flatten_bounded_efa`] — an explicit finite-automaton pipeline folded
//!   into one transducer.
//! * [`collapse_periodic`] — a period-k finite-automaton machine collapsed to
//!   period 1 by sequential composition.
//! * [`gem_to_bem`] — a general machine converted to a basic one by encoding
//!   the cursor into the generation payload and dispatching on it.
//! * [`to_ca`] — a general periodic finite-automaton machine compiled to a
//!   one-dimensional cellular automaton.

pub mod to_ca;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::alphabet::{Alphabet, Word};
use crate::runtime::{
    EvolutionaryMachine, Flavor, LevelAutomaton, LevelClass, LevelSchedule, Mode,
    SearchCondition,
};
use crate::tm::{Move, TuringMachine};
use crate::transducer::{DefinitionError, FiniteTransducer, RunError, Transduction};

#[derive(Debug, Error)]
pub enum ConstructError {
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    Definition(#[from] DefinitionError),
    #[error(transparent)]
    Run(#[from] RunError),
}

/// A deterministic total input classifier: an ordered list of acceptors.
/// `classify(u)` is the index of the first acceptor accepting `u`, or the
/// index one past the list when none accepts.
#[derive(Debug, Clone, PartialEq)]
pub struct Selector {
    acceptors: Vec<FiniteTransducer>,
}

impl Selector {
    pub fn new(acceptors: Vec<FiniteTransducer>) -> Result<Self, ConstructError> {
        if let Some(first) = acceptors.first() {
            for a in &acceptors[1..] {
                if a.input_alphabet() != first.input_alphabet() {
                    return Err(ConstructError::Unsupported(format!(
                        "selector acceptors `{}` and `{}` disagree on the input alphabet",
                        first.name(),
                        a.name()
                    )));
                }
            }
        }
        Ok(Selector { acceptors })
    }

    pub fn acceptors(&self) -> &[FiniteTransducer] {
        &self.acceptors
    }

    /// Number of classes (acceptors + 1).
    pub fn classes(&self) -> usize {
        self.acceptors.len() + 1
    }

    pub fn classify(&self, word: &Word) -> Result<usize, RunError> {
        for (i, acc) in self.acceptors.iter().enumerate() {
            if acc.accepts(word)? {
                return Ok(i);
            }
        }
        Ok(self.acceptors.len())
    }
}

/// A parallel composition that could not be folded into a single transducer:
/// the selector runs over the whole input first, then the chosen branch runs.
/// Both passes are ordinary finite-automaton runs, so the bundle still
/// behaves as one finite-automaton-class level.
#[derive(Debug, Clone, PartialEq)]
pub struct DispatchMachine {
    name: String,
    selector: Selector,
    branches: Vec<FiniteTransducer>,
}

impl DispatchMachine {
    pub fn new(
        name: impl Into<String>,
        selector: Selector,
        branches: Vec<FiniteTransducer>,
    ) -> Result<Self, ConstructError> {
        let name = name.into();
        if branches.len() != selector.classes() {
            return Err(ConstructError::Unsupported(format!(
                "dispatch `{name}`: {} branches for {} selector classes",
                branches.len(),
                selector.classes()
            )));
        }
        let alphabet = branches[0].input_alphabet();
        for b in &branches {
            if b.input_alphabet() != alphabet {
                return Err(ConstructError::Unsupported(format!(
                    "dispatch `{name}`: branch `{}` disagrees on the input alphabet",
                    b.name()
                )));
            }
        }
        for a in selector.acceptors() {
            if a.input_alphabet() != alphabet {
                return Err(ConstructError::Unsupported(format!(
                    "dispatch `{name}`: selector `{}` disagrees on the input alphabet",
                    a.name()
                )));
            }
        }
        Ok(DispatchMachine {
            name,
            selector,
            branches,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn selector(&self) -> &Selector {
        &self.selector
    }

    pub fn branches(&self) -> &[FiniteTransducer] {
        &self.branches
    }

    pub fn input_alphabet(&self) -> &Alphabet {
        self.branches[0].input_alphabet()
    }

    pub fn transduce(&self, word: &Word) -> Result<Transduction, RunError> {
        let class = self.selector.classify(word)?;
        self.branches[class].transduce(word)
    }

    pub fn accepts(&self, word: &Word) -> Result<bool, RunError> {
        let class = self.selector.classify(word)?;
        self.branches[class].accepts(word)
    }
}

/// Result of a finite-automaton parallel composition.
#[derive(Debug, Clone, PartialEq)]
pub enum ComposedFa {
    /// The selector classes were decidable from the first symbol, so the
    /// dispatch folds into a single product transducer.
    Single(FiniteTransducer),
    /// General selectors need the whole input before the class is known.
    Dispatch(DispatchMachine),
}

impl ComposedFa {
    pub fn transduce(&self, word: &Word) -> Result<Transduction, RunError> {
        match self {
            ComposedFa::Single(t) => t.transduce(word),
            ComposedFa::Dispatch(d) => d.transduce(word),
        }
    }

    pub fn accepts(&self, word: &Word) -> Result<bool, RunError> {
        match self {
            ComposedFa::Single(t) => t.accepts(word),
            ComposedFa::Dispatch(d) => d.accepts(word),
        }
    }

    pub fn into_level(self) -> LevelAutomaton {
        match self {
            ComposedFa::Single(t) => LevelAutomaton::Fa(t),
            ComposedFa::Dispatch(d) => LevelAutomaton::Dispatch(d),
        }
    }
}

/// What the language from a state looks like, for first-symbol analysis.
#[derive(PartialEq, Clone, Copy)]
enum StateLanguage {
    Empty,
    Universal,
    Mixed,
}

fn language_from(acc: &FiniteTransducer, state: &str) -> StateLanguage {
    // Reachability over state names.
    let mut reach: BTreeSet<String> = BTreeSet::from([state.to_string()]);
    let mut frontier = vec![state.to_string()];
    while let Some(s) = frontier.pop() {
        for (from, _, to, _) in acc.transitions() {
            if from == s && reach.insert(to.to_string()) {
                frontier.push(to.to_string());
            }
        }
    }
    let accepting: BTreeSet<&str> = acc.accepting_states().collect();
    let all_accepting = reach.iter().all(|s| accepting.contains(s.as_str()));
    let none_accepting = reach.iter().all(|s| !accepting.contains(s.as_str()));
    if none_accepting {
        return StateLanguage::Empty;
    }
    // Universality additionally needs totality everywhere reachable, since a
    // missing transition rejects.
    if all_accepting {
        let total = reach.iter().all(|s| {
            acc.input_alphabet()
                .symbols()
                .iter()
                .all(|sym| transition_target(acc, s, sym).is_some())
        });
        if total {
            return StateLanguage::Universal;
        }
    }
    StateLanguage::Mixed
}

fn transition_target<'a>(
    t: &'a FiniteTransducer,
    state: &str,
    symbol: &str,
) -> Option<(&'a str, &'a Word)> {
    t.transitions()
        .find(|(from, sym, _, _)| *from == state && *sym == symbol)
        .map(|(_, _, to, out)| (to, out))
}

/// Class of every word starting with `symbol`, when that is decidable from
/// the first symbol alone across all acceptors.
fn first_symbol_class(selector: &Selector, symbol: &str) -> Option<usize> {
    for (i, acc) in selector.acceptors().iter().enumerate() {
        let lang = match transition_target(acc, acc.start_state(), symbol) {
            None => StateLanguage::Empty,
            Some((to, _)) => language_from(acc, to),
        };
        match lang {
            StateLanguage::Universal => return Some(i),
            StateLanguage::Empty => continue,
            StateLanguage::Mixed => return None,
        }
    }
    Some(selector.acceptors().len())
}

/// Parallel composition for the finite-automaton class.
///
/// When every selector class is decidable from the first input symbol, the
/// result is a genuine product transducer; otherwise it is a two-pass
/// [`DispatchMachine`].
pub fn p_compose_fa(
    name: impl Into<String>,
    machines: &[FiniteTransducer],
    selector: &Selector,
) -> Result<ComposedFa, ConstructError> {
    let name = name.into();
    if machines.is_empty() {
        return Err(ConstructError::Unsupported(
            "parallel composition needs at least one machine".into(),
        ));
    }
    let dispatch_fallback = |name: String| {
        DispatchMachine::new(name, selector.clone(), machines.to_vec()).map(ComposedFa::Dispatch)
    };

    // ε has its own class; every other word must be classified by its first
    // symbol for the single-transducer realization to exist.
    let alphabet = machines[0].input_alphabet().clone();
    let mut class_of_symbol = Vec::with_capacity(alphabet.len());
    for sym in alphabet.symbols() {
        match first_symbol_class(selector, sym) {
            Some(c) => class_of_symbol.push(c),
            None => return dispatch_fallback(name),
        }
    }
    let class_of_empty = selector.classify(&Word::empty())?;
    // Validate the fold target before building it.
    let _ = DispatchMachine::new(name.clone(), selector.clone(), machines.to_vec())?;

    let mut states = vec!["d".to_string()];
    let mut accepting: Vec<String> = Vec::new();
    let mut route_back: Vec<String> = Vec::new();
    let mut transitions: Vec<(String, String, String, Word)> = Vec::new();
    let mut output_alphabet = machines[0].output_alphabet().clone();
    for m in &machines[1..] {
        output_alphabet = output_alphabet.union(m.output_alphabet());
    }

    let eps_branch = &machines[class_of_empty];
    let start_accepting = eps_branch
        .accepting_states()
        .any(|s| s == eps_branch.start_state());
    if start_accepting {
        accepting.push("d".into());
    }
    if eps_branch
        .route_back_states()
        .any(|s| s == eps_branch.start_state())
    {
        route_back.push("d".into());
    }

    let mut used_branches: BTreeSet<usize> = BTreeSet::new();
    for (sym_ix, sym) in alphabet.symbols().iter().enumerate() {
        let class = class_of_symbol[sym_ix];
        let branch = &machines[class];
        if let Some((to, out)) = transition_target(branch, branch.start_state(), sym) {
            transitions.push((
                "d".into(),
                sym.clone(),
                format!("b{class}.{to}"),
                out.clone(),
            ));
            used_branches.insert(class);
        }
    }
    for &class in &used_branches {
        let branch = &machines[class];
        for state in branch.states() {
            states.push(format!("b{class}.{state}"));
        }
        for state in branch.accepting_states() {
            accepting.push(format!("b{class}.{state}"));
        }
        for state in branch.route_back_states() {
            route_back.push(format!("b{class}.{state}"));
        }
        for (from, sym, to, out) in branch.transitions() {
            transitions.push((
                format!("b{class}.{from}"),
                sym.to_string(),
                format!("b{class}.{to}"),
                out.clone(),
            ));
        }
    }

    let single = FiniteTransducer::new(
        name,
        states,
        "d",
        &accepting,
        &route_back,
        alphabet,
        output_alphabet,
        transitions,
    )?;
    Ok(ComposedFa::Single(single))
}

/// Parallel composition for the Turing-machine class: a dispatcher machine
/// that sweeps the input once tracking all selector acceptors at once,
/// rewinds, and then runs the chosen branch in place.
pub fn p_compose_tm(
    name: impl Into<String>,
    machines: &[TuringMachine],
    selector: &Selector,
) -> Result<TuringMachine, ConstructError> {
    let name = name.into();
    if machines.is_empty() {
        return Err(ConstructError::Unsupported(
            "parallel composition needs at least one machine".into(),
        ));
    }
    if machines.len() != selector.classes() {
        return Err(ConstructError::Unsupported(format!(
            "dispatcher `{name}`: {} machines for {} selector classes",
            machines.len(),
            selector.classes()
        )));
    }
    let input_alphabet = machines[0].input_alphabet().clone();
    for m in machines {
        if m.input_alphabet() != &input_alphabet {
            return Err(ConstructError::Unsupported(format!(
                "machine `{}` disagrees on the input alphabet",
                m.name()
            )));
        }
    }
    for a in selector.acceptors() {
        if a.input_alphabet() != &input_alphabet {
            return Err(ConstructError::Unsupported(format!(
                "selector `{}` disagrees on the input alphabet",
                a.name()
            )));
        }
    }
    let blank = machines[0].blank().to_string();
    let mut tape_alphabet = machines[0].tape_alphabet().clone();
    for m in &machines[1..] {
        if m.blank() != blank {
            return Err(ConstructError::Unsupported(format!(
                "machine `{}` uses blank `{}`, expected `{blank}`",
                m.name(),
                m.blank()
            )));
        }
        tape_alphabet = tape_alphabet.union(m.tape_alphabet());
    }

    // Selector product states: one component per acceptor, `!` = dead.
    let component = |s: Option<&str>| s.unwrap_or("!").to_string();
    let vec_name = |v: &[Option<String>]| {
        let parts: Vec<String> = v.iter().map(|s| component(s.as_deref())).collect();
        format!("sel[{}]", parts.join(","))
    };
    let start_vec: Vec<Option<String>> = selector
        .acceptors()
        .iter()
        .map(|a| Some(a.start_state().to_string()))
        .collect();

    let mut states: Vec<String> = Vec::new();
    let mut transitions: Vec<(String, String, String, String, Move)> = Vec::new();
    let mut seen: BTreeSet<Vec<Option<String>>> = BTreeSet::from([start_vec.clone()]);
    let mut frontier = vec![start_vec.clone()];
    let mut classified: Vec<(Vec<Option<String>>, usize)> = Vec::new();
    while let Some(v) = frontier.pop() {
        states.push(vec_name(&v));
        for sym in input_alphabet.symbols() {
            let next: Vec<Option<String>> = v
                .iter()
                .zip(selector.acceptors())
                .map(|(s, acc)| {
                    s.as_deref()
                        .and_then(|st| transition_target(acc, st, sym))
                        .map(|(to, _)| to.to_string())
                })
                .collect();
            if seen.insert(next.clone()) {
                frontier.push(next.clone());
            }
            transitions.push((
                vec_name(&v),
                sym.clone(),
                vec_name(&next),
                sym.clone(),
                Move::Right,
            ));
        }
        // On blank: classify by the current components.
        let class = v
            .iter()
            .zip(selector.acceptors())
            .position(|(s, acc)| {
                s.as_deref()
                    .is_some_and(|st| acc.accepting_states().any(|a| a == st))
            })
            .unwrap_or(selector.acceptors().len());
        classified.push((v, class));
    }
    let mut rewinds: BTreeSet<usize> = BTreeSet::new();
    for (v, class) in &classified {
        transitions.push((
            vec_name(v),
            blank.clone(),
            format!("rew{class}"),
            blank.clone(),
            Move::Left,
        ));
        rewinds.insert(*class);
    }
    for &class in &rewinds {
        states.push(format!("rew{class}"));
        for sym in tape_alphabet.symbols() {
            if *sym == blank {
                continue;
            }
            transitions.push((
                format!("rew{class}"),
                sym.clone(),
                format!("rew{class}"),
                sym.clone(),
                Move::Left,
            ));
        }
        let branch = &machines[class];
        transitions.push((
            format!("rew{class}"),
            blank.clone(),
            format!("br{class}:{}", branch.start_state()),
            blank.clone(),
            Move::Right,
        ));
    }
    let mut halt_accept: Vec<String> = Vec::new();
    let mut halt_reject: Vec<String> = Vec::new();
    let mut route_back: Vec<String> = Vec::new();
    for &class in &rewinds {
        let branch = &machines[class];
        for state in branch.states() {
            states.push(format!("br{class}:{state}"));
        }
        for s in branch.halt_accept_states() {
            halt_accept.push(format!("br{class}:{s}"));
        }
        for s in branch.halt_reject_states() {
            halt_reject.push(format!("br{class}:{s}"));
        }
        for s in branch.route_back_states() {
            route_back.push(format!("br{class}:{s}"));
        }
        for (from, read, to, write, mv) in branch.transitions() {
            transitions.push((
                format!("br{class}:{from}"),
                read.to_string(),
                format!("br{class}:{to}"),
                write.to_string(),
                mv,
            ));
        }
    }

    let start_name = vec_name(&start_vec);
    TuringMachine::new(
        name,
        states,
        &start_name,
        &halt_accept,
        &halt_reject,
        &route_back,
        input_alphabet,
        tape_alphabet,
        &blank,
        transitions,
    )
    .map_err(ConstructError::from)
}

/// Plain transducer levels of a schedule, or an error naming the offender.
fn fa_levels(schedule: &LevelSchedule) -> Result<Vec<FiniteTransducer>, ConstructError> {
    let levels = match schedule {
        LevelSchedule::Explicit(l) | LevelSchedule::Periodic(l) => l.clone(),
        LevelSchedule::Generated(_) => {
            return Err(ConstructError::Unsupported(
                "generated schedules have no finite level list".into(),
            ))
        }
    };
    levels
        .into_iter()
        .map(|l| match l {
            LevelAutomaton::Fa(t) => Ok(t),
            other => Err(ConstructError::Unsupported(format!(
                "level `{}` is not a plain finite transducer",
                other.name()
            ))),
        })
        .collect()
}

/// Folds an explicit finite-automaton pipeline (terminal mode, search
/// `never`) into one transducer with the same input-output behavior.
pub fn flatten_bounded_efa(em: &EvolutionaryMachine) -> Result<FiniteTransducer, ConstructError> {
    if !matches!(em.schedule(), LevelSchedule::Explicit(_)) {
        return Err(ConstructError::Unsupported(
            "flattening needs an explicit schedule".into(),
        ));
    }
    if em.mode() != Mode::Terminal || !matches!(em.search(), SearchCondition::Never) {
        return Err(ConstructError::Unsupported(
            "flattening applies to a pure pipeline: terminal mode with search `never`".into(),
        ));
    }
    let levels = fa_levels(em.schedule())?;
    let mut folded = levels[0].clone();
    for level in &levels[1..] {
        folded = FiniteTransducer::compose(&folded, level)?;
    }
    folded.set_name(format!("{}.flat", em.name()));
    Ok(folded)
}

/// Report accompanying [`collapse_periodic`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollapseReport {
    pub original_period: usize,
    /// The collapsed machine checks its search condition once per composite
    /// application, i.e. only at generation indices that are multiples of
    /// the original period. A search condition satisfiable mid-period can
    /// therefore terminate the original earlier than the collapsed machine.
    pub mid_period_caveat: bool,
}

/// Collapses a periodic finite-automaton machine to period 1 by composing
/// its levels in order. Generation `t` of the collapsed machine equals
/// generation `k·t` of the original.
pub fn collapse_periodic(
    em: &EvolutionaryMachine,
) -> Result<(EvolutionaryMachine, CollapseReport), ConstructError> {
    if em.level_class() != LevelClass::Fa {
        return Err(ConstructError::Unsupported(
            "period collapse is defined for the finite-automaton class".into(),
        ));
    }
    if !matches!(em.schedule(), LevelSchedule::Periodic(_)) {
        return Err(ConstructError::Unsupported(
            "period collapse needs a periodic schedule".into(),
        ));
    }
    let levels = fa_levels(em.schedule())?;
    let k = levels.len();
    let mut folded = levels[0].clone();
    for level in &levels[1..] {
        folded = FiniteTransducer::compose(&folded, level)?;
    }
    folded.set_name(format!("{}.period1", em.name()));
    let collapsed = EvolutionaryMachine::new(
        format!("{}.collapsed", em.name()),
        em.flavor(),
        LevelSchedule::Periodic(vec![LevelAutomaton::Fa(folded)]),
        em.search().clone(),
        em.mode(),
        em.budgets(),
    )?;
    Ok((
        collapsed,
        CollapseReport {
            original_period: k,
            mid_period_caveat: !matches!(em.search(), SearchCondition::Never),
        },
    ))
}

/// Result of [`gem_to_bem`]: the basic machine plus the marker conventions
/// needed to move words in and out of it.
#[derive(Debug, Clone, PartialEq)]
pub struct GemToBem {
    pub bem: EvolutionaryMachine,
    pub horizon: u64,
    pub markers: Vec<String>,
    pub overflow_marker: String,
}

impl GemToBem {
    /// Prefixes the initial cursor marker.
    pub fn encode(&self, word: &Word) -> Word {
        let mut w = Word::new([self.markers[0].clone()]);
        w.extend_from(word);
        w
    }

    /// Strips the leading cursor marker; `None` when the word is not marked
    /// (including words that overran the horizon).
    pub fn decode(&self, word: &Word) -> Option<(u64, Word)> {
        let first = word.first()?;
        let cursor = self.markers.iter().position(|m| m == first)?;
        Some((cursor as u64, word.tail()))
    }
}

/// Converts a general periodic (or generated) finite-automaton machine in
/// terminal mode into a basic machine. The cursor is carried as a marker
/// symbol prefixed to the population; a single dispatch level reads the
/// marker, applies the level the general machine would run at that cursor,
/// and emits the next marker chosen by the run's routing. Cursor excursions
/// beyond `horizon` stamp an overflow marker whose words cycle unchanged, so
/// such runs end as budget-exhausted.
pub fn gem_to_bem(em: &EvolutionaryMachine, horizon: u64) -> Result<GemToBem, ConstructError> {
    if em.flavor() != Flavor::General {
        return Err(ConstructError::Unsupported(
            "conversion starts from a general machine".into(),
        ));
    }
    if em.mode() != Mode::Terminal {
        return Err(ConstructError::Unsupported(
            "conversion is defined for the terminal mode".into(),
        ));
    }
    if em.level_class() != LevelClass::Fa {
        return Err(ConstructError::Unsupported(
            "conversion is implemented for the finite-automaton class".into(),
        ));
    }
    if matches!(em.schedule(), LevelSchedule::Explicit(_)) {
        return Err(ConstructError::Unsupported(
            "conversion needs an inexhaustible schedule (periodic or generated)".into(),
        ));
    }
    let level_for = |cursor: u64| -> Result<FiniteTransducer, ConstructError> {
        let level = em
            .schedule()
            .level_at(cursor)?
            .expect("periodic/generated schedules are inexhaustible");
        match level {
            LevelAutomaton::Fa(t) => Ok(t),
            other => Err(ConstructError::Unsupported(format!(
                "level `{}` is not a plain finite transducer",
                other.name()
            ))),
        }
    };

    // Population alphabet: everything the levels and the search touch.
    let mut population = level_for(0)?.input_alphabet().clone();
    for c in 0..=horizon {
        let l = level_for(c)?;
        population = population.union(l.input_alphabet()).union(l.output_alphabet());
    }
    if let SearchCondition::AcceptedBy(acc) = em.search() {
        population = population.union(acc.input_alphabet());
    }
    let markers: Vec<String> = (0..=horizon).map(|c| format!("@{c}")).collect();
    let overflow_marker = "@over".to_string();
    for m in markers.iter().chain([&overflow_marker]) {
        if population.contains(m) {
            return Err(ConstructError::Unsupported(format!(
                "population alphabet already uses the marker symbol `{m}`"
            )));
        }
    }
    let mut marked = Alphabet::new(markers.clone()).expect("markers well-formed");
    marked = marked.union(&Alphabet::new([overflow_marker.clone()]).expect("well-formed"));
    marked = marked.union(&population);

    let mut selectors: Vec<FiniteTransducer> = Vec::new();
    let mut branches: Vec<FiniteTransducer> = Vec::new();
    for cursor in 0..=horizon {
        let level = level_for(cursor)?;
        for backward in [false, true] {
            selectors.push(routing_selector(&level, cursor, &markers, &marked, backward)?);
            branches.push(marked_branch(
                &level,
                cursor,
                horizon,
                &markers,
                &overflow_marker,
                &marked,
                backward,
            )?);
        }
    }
    // Overflowed words keep cycling unchanged.
    selectors.push(prefix_acceptor(
        "sel.over",
        &overflow_marker,
        &marked,
    )?);
    branches.push(copy_branch("br.over", &marked)?);
    // Fallback: unclassifiable words (the level run is undefined on them)
    // hit a branch with no transitions, which is undefined exactly like the
    // original level.
    branches.push(
        FiniteTransducer::new(
            "br.stuck",
            vec!["x".into()],
            "x",
            &[],
            &[],
            marked.clone(),
            marked.clone(),
            vec![],
        )
        .map_err(ConstructError::from)?,
    );

    let dispatch = DispatchMachine::new(
        format!("{}.dispatch", em.name()),
        Selector::new(selectors)?,
        branches,
    )?;

    let search = match em.search() {
        SearchCondition::Never => SearchCondition::Never,
        SearchCondition::AcceptedBy(acc) => {
            SearchCondition::AcceptedBy(marker_skipping_acceptor(acc, &markers, &marked)?)
        }
        SearchCondition::FitnessAtLeast { .. } => {
            return Err(ConstructError::Unsupported(
                "conversion supports accepted-by and never search conditions".into(),
            ))
        }
    };

    let bem = EvolutionaryMachine::new(
        format!("{}.basic", em.name()),
        Flavor::Basic,
        LevelSchedule::Periodic(vec![LevelAutomaton::Dispatch(dispatch)]),
        search,
        Mode::Terminal,
        em.budgets(),
    )?;
    Ok(GemToBem {
        bem,
        horizon,
        markers,
        overflow_marker,
    })
}

/// Acceptor for words `M_c ++ w` where the level's run on `w` is defined and
/// finishes in a route-back state (`backward`) or a forward state (else).
fn routing_selector(
    level: &FiniteTransducer,
    cursor: u64,
    markers: &[String],
    marked: &Alphabet,
    backward: bool,
) -> Result<FiniteTransducer, ConstructError> {
    let mut states = vec!["pre".to_string()];
    let mut transitions: Vec<(String, String, String, Word)> = Vec::new();
    for s in level.states() {
        states.push(format!("l.{s}"));
    }
    transitions.push((
        "pre".into(),
        markers[cursor as usize].clone(),
        format!("l.{}", level.start_state()),
        Word::empty(),
    ));
    for (from, sym, to, _) in level.transitions() {
        transitions.push((
            format!("l.{from}"),
            sym.to_string(),
            format!("l.{to}"),
            Word::empty(),
        ));
    }
    let route_back: BTreeSet<&str> = level.route_back_states().collect();
    let accepting: Vec<String> = level
        .states()
        .iter()
        .filter(|s| route_back.contains(s.as_str()) == backward)
        .map(|s| format!("l.{s}"))
        .collect();
    FiniteTransducer::new(
        format!(
            "sel.{}.{}",
            cursor,
            if backward { "back" } else { "fwd" }
        ),
        states,
        "pre",
        &accepting,
        &[],
        marked.clone(),
        marked.clone(),
        transitions,
    )
    .map(FiniteTransducer::into_acceptor)
    .map_err(ConstructError::from)
}

/// Branch for words `M_c ++ w`: emits the successor marker up front (the
/// selector already decided the routing), then transduces `w` by the level.
/// At the horizon a forward move stamps the overflow marker and copies.
fn marked_branch(
    level: &FiniteTransducer,
    cursor: u64,
    horizon: u64,
    markers: &[String],
    overflow_marker: &str,
    marked: &Alphabet,
    backward: bool,
) -> Result<FiniteTransducer, ConstructError> {
    let name = format!(
        "br.{}.{}",
        cursor,
        if backward { "back" } else { "fwd" }
    );
    if !backward && cursor == horizon {
        // Horizon overflow: stamp and copy.
        let mut transitions = vec![(
            "pre".to_string(),
            markers[cursor as usize].clone(),
            "copy".to_string(),
            Word::new([overflow_marker.to_string()]),
        )];
        for sym in marked.symbols() {
            transitions.push((
                "copy".into(),
                sym.clone(),
                "copy".into(),
                Word::new([sym.clone()]),
            ));
        }
        return FiniteTransducer::new(
            name,
            vec!["pre".into(), "copy".into()],
            "pre",
            &[],
            &[],
            marked.clone(),
            marked.clone(),
            transitions,
        )
        .map_err(ConstructError::from);
    }
    let next_cursor = if backward {
        cursor.saturating_sub(1)
    } else {
        cursor + 1
    };
    let mut states = vec!["pre".to_string()];
    for s in level.states() {
        states.push(format!("l.{s}"));
    }
    let mut transitions = vec![(
        "pre".to_string(),
        markers[cursor as usize].clone(),
        format!("l.{}", level.start_state()),
        Word::new([markers[next_cursor as usize].clone()]),
    )];
    for (from, sym, to, out) in level.transitions() {
        transitions.push((
            format!("l.{from}"),
            sym.to_string(),
            format!("l.{to}"),
            out.clone(),
        ));
    }
    // No route-back tags: the basic machine must only ever route forward;
    // the routing information lives in the emitted marker.
    FiniteTransducer::new(
        name,
        states,
        "pre",
        &[],
        &[],
        marked.clone(),
        marked.clone(),
        transitions,
    )
    .map_err(ConstructError::from)
}

/// Acceptor for words starting with `marker`.
fn prefix_acceptor(
    name: &str,
    marker: &str,
    marked: &Alphabet,
) -> Result<FiniteTransducer, ConstructError> {
    let mut transitions = vec![(
        "pre".to_string(),
        marker.to_string(),
        "any".to_string(),
        Word::empty(),
    )];
    for sym in marked.symbols() {
        transitions.push(("any".into(), sym.clone(), "any".into(), Word::empty()));
    }
    FiniteTransducer::new(
        name,
        vec!["pre".into(), "any".into()],
        "pre",
        &["any".to_string()],
        &[],
        marked.clone(),
        marked.clone(),
        transitions,
    )
    .map(FiniteTransducer::into_acceptor)
    .map_err(ConstructError::from)
}

/// Identity transducer over the marked alphabet.
fn copy_branch(name: &str, marked: &Alphabet) -> Result<FiniteTransducer, ConstructError> {
    let mut transitions = Vec::new();
    for sym in marked.symbols() {
        transitions.push((
            "s".to_string(),
            sym.clone(),
            "s".to_string(),
            Word::new([sym.clone()]),
        ));
    }
    FiniteTransducer::new(
        name,
        vec!["s".into()],
        "s",
        &[],
        &[],
        marked.clone(),
        marked.clone(),
        transitions,
    )
    .map_err(ConstructError::from)
}

/// Lifts an acceptor over the population alphabet to marked words by
/// skipping one leading cursor marker. Overflow-marked words are never
/// accepted.
fn marker_skipping_acceptor(
    acc: &FiniteTransducer,
    markers: &[String],
    marked: &Alphabet,
) -> Result<FiniteTransducer, ConstructError> {
    let mut states = vec!["pre".to_string()];
    for s in acc.states() {
        states.push(format!("a.{s}"));
    }
    let mut transitions: Vec<(String, String, String, Word)> = Vec::new();
    for m in markers {
        transitions.push((
            "pre".into(),
            m.clone(),
            format!("a.{}", acc.start_state()),
            Word::empty(),
        ));
    }
    for (from, sym, to, _) in acc.transitions() {
        transitions.push((
            format!("a.{from}"),
            sym.to_string(),
            format!("a.{to}"),
            Word::empty(),
        ));
    }
    let accepting: Vec<String> = acc.accepting_states().map(|s| format!("a.{s}")).collect();
    FiniteTransducer::new(
        format!("{}.marked", acc.name()),
        states,
        "pre",
        &accepting,
        &[],
        marked.clone(),
        marked.clone(),
        transitions,
    )
    .map(FiniteTransducer::into_acceptor)
    .map_err(ConstructError::from)
}
