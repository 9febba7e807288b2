//! Compilation of a periodic finite-automaton machine to a one-dimensional
//! cellular automaton.
//!
//! Each generation lives on the tape as a block of data cells followed by a
//! unary block of count cells (the cursor value, needed because a backward
//! move at cursor 0 re-enters level 0) and a writer cell at the right end.
//! A reader cell sits left of the block. The protocol per generation:
//!
//! 1. The reader consumes data cells left to right, running the transducer
//!    of its current phase and launching the output of each transition as
//!    right-moving particles (one launch per step).
//! 2. The writer absorbs arriving particles in order, appending the next
//!    generation's cells and advancing right.
//! 3. Reaching the count block (or the region end), the reader knows the
//!    run's final state, hence the routing: forward relays every count plus
//!    one extra; backward swallows one count (none at cursor 0). It then
//!    launches an end-marker particle carrying the next phase.
//! 4. The end marker flips the writer's parity and sends a left-moving "go"
//!    signal, which dies at the first quiescent cell left of the fresh
//!    region and spawns the next reader there.
//!
//! Generations alternate a parity bit so the reader can tell its own region
//! from the one being written. All interactions are radius-1; particles and
//! signals ride dedicated slots of the cell state, so they pass over data
//! without disturbing it. A configuration where the reader is freshly
//! spawned (and the initial encoding) is a *boundary*: decoding it yields
//! exactly one generation of the simulated machine.
//!
//! The in-memory simulation applies the local rule procedurally; the
//! exported [`CellularAutomaton1D`] materializes every neighborhood actually
//! reachable from a declared set of inputs, with the quiescent default
//! covering the rest.

use std::collections::BTreeMap;

use crate::alphabet::{Alphabet, Word};
use crate::ca::{CaConfiguration, CellularAutomaton1D};
use crate::construct::ConstructError;
use crate::runtime::{EvolutionaryMachine, LevelAutomaton, LevelSchedule};


#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Payload {
    Sym(String),
    Count,
    Eof(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum ReaderMode {
    /// Consuming data cells; the usize is the transducer state index.
    Read(usize),
    /// Relaying the count block. `next_phase` is already decided; `extra`
    /// means one additional count is appended at the end (forward move).
    Count { next_phase: usize, extra: bool },
    /// Draining the queue, then vanishing.
    Finish,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct ReaderCell {
    phase: usize,
    parity: u8,
    mode: ReaderMode,
    queue: Vec<Payload>,
    fresh: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Base {
    Quiet,
    Error,
    Data(u8, String),
    Count(u8),
    Writer(u8),
    Reader(ReaderCell),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Cell {
    base: Base,
    /// Right-moving particle slot.
    part: Option<Payload>,
    /// Left-moving signal slot (the "go" signal with the next phase).
    sig: Option<usize>,
}

impl Cell {
    fn quiet() -> Cell {
        Cell {
            base: Base::Quiet,
            part: None,
            sig: None,
        }
    }

    fn is_quiet(&self) -> bool {
        self.base == Base::Quiet && self.part.is_none() && self.sig.is_none()
    }
}

/// One transducer level in index form for fast local-rule lookups.
struct Level {
    start: usize,
    route_back: Vec<bool>,
    // (state, symbol) -> (state, output)
    delta: BTreeMap<(usize, String), (usize, Vec<String>)>,
}

/// The compiled simulator plus everything needed to move words in and out.
pub struct PeriodicEfaCa {
    name: String,
    levels: Vec<Level>,
    population: Alphabet,
    expansion: usize,
}

/// Compiles a periodic finite-automaton machine. Population symbols and
/// state names must avoid `/` and `:`, which the cell tokens use.
pub fn periodic_efa_to_ca(em: &EvolutionaryMachine) -> Result<PeriodicEfaCa, ConstructError> {
    let LevelSchedule::Periodic(levels) = em.schedule() else {
        return Err(ConstructError::Unsupported(
            "cellular-automaton compilation needs a periodic schedule".into(),
        ));
    };
    let mut fas = Vec::new();
    for level in levels {
        match level {
            LevelAutomaton::Fa(t) => fas.push(t.clone()),
            other => {
                return Err(ConstructError::Unsupported(format!(
                    "level `{}` is not a plain finite transducer",
                    other.name()
                )))
            }
        }
    }
    let mut population = fas[0].input_alphabet().clone();
    for t in &fas {
        population = population.union(t.input_alphabet()).union(t.output_alphabet());
    }
    for sym in population.symbols() {
        if sym.contains('/') || sym.contains(':') {
            return Err(ConstructError::Unsupported(format!(
                "population symbol `{sym}` would collide with cell-token syntax"
            )));
        }
    }
    let mut expansion = 0usize;
    let mut compiled = Vec::new();
    for t in &fas {
        let states = t.states().to_vec();
        let index = |s: &str| states.iter().position(|x| x == s).expect("declared state");
        let mut delta = BTreeMap::new();
        for (from, sym, to, out) in t.transitions() {
            expansion = expansion.max(out.len());
            delta.insert(
                (index(from), sym.to_string()),
                (index(to), out.symbols().to_vec()),
            );
        }
        let mut route_back = vec![false; states.len()];
        for s in t.route_back_states() {
            route_back[index(s)] = true;
        }
        compiled.push(Level {
            start: index(t.start_state()),
            route_back,
            delta,
        });
    }
    Ok(PeriodicEfaCa {
        name: format!("{}.ca", em.name()),
        levels: compiled,
        population,
        expansion,
    })
}

impl PeriodicEfaCa {
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Maximum output-word length over all transitions: the per-cell
    /// expansion bound of the construction.
    pub fn expansion_bound(&self) -> usize {
        self.expansion
    }

    pub fn quiescent(&self) -> &'static str {
        "q"
    }

    /// Steps within which the next generation boundary is guaranteed, as a
    /// function of the current support length. Linear from the protocol
    /// schedule: the reader spends at most `1 + e` steps per data cell and 2
    /// per count cell, the end marker flies at most the support plus the
    /// output length, absorption costs 2 steps per particle, and the go
    /// signal returns over the fresh region.
    pub fn steps_per_generation(&self, support_len: usize) -> u64 {
        ((3 * self.expansion + 8) * (support_len + 2) + 12) as u64
    }

    fn k(&self) -> usize {
        self.levels.len()
    }

    /// The initial configuration for input `word` at phase 0, cursor 0.
    pub fn encode(&self, word: &Word) -> Result<CaConfiguration, ConstructError> {
        for sym in word.symbols() {
            if !self.population.contains(sym) {
                return Err(ConstructError::Unsupported(format!(
                    "input symbol `{sym}` is not in the population alphabet"
                )));
            }
        }
        let mut cells = vec![Cell {
            base: Base::Reader(ReaderCell {
                phase: 0,
                parity: 0,
                mode: ReaderMode::Read(self.levels[0].start),
                queue: Vec::new(),
                fresh: true,
            }),
            part: None,
            sig: None,
        }];
        for sym in word.symbols() {
            cells.push(Cell {
                base: Base::Data(0, sym.clone()),
                part: None,
                sig: None,
            });
        }
        cells.push(Cell {
            base: Base::Writer(1),
            part: None,
            sig: None,
        });
        Ok(self.render(&cells, 0))
    }

    /// Extracts the generation word when `config` is a boundary snapshot
    /// (the reader is freshly spawned), `None` otherwise.
    pub fn decode(&self, config: &CaConfiguration) -> Option<Word> {
        let cells = self.parse_config(config).ok()?;
        let at = cells
            .iter()
            .position(|c| matches!(&c.base, Base::Reader(r) if r.fresh))?;
        let Base::Reader(reader) = &cells[at].base else {
            unreachable!()
        };
        let mut word = Word::empty();
        for cell in &cells[at + 1..] {
            match &cell.base {
                Base::Data(b, sym) if *b == reader.parity => word.push(sym.clone()),
                _ => break,
            }
        }
        Some(word)
    }

    /// Runs the simulation from `input`, returning the decoded generation
    /// sequence `X[0], X[1], …` with at most `generations + 1` entries.
    /// Stops early on an error cell (an undefined level transition) or when
    /// a generation fails to complete within the declared step bound.
    pub fn generations(
        &self,
        input: &Word,
        generations: usize,
    ) -> Result<Vec<Word>, ConstructError> {
        let config = self.encode(input)?;
        let mut cells = self.parse_config(&config)?;
        let mut out = Vec::new();
        if let Some(w) = self.decode_cells(&cells) {
            out.push(w);
        }
        let mut left_for_gen = self.steps_per_generation(cells.len());
        while out.len() <= generations {
            if left_for_gen == 0 {
                return Err(ConstructError::Unsupported(format!(
                    "generation {} did not complete within the declared step bound",
                    out.len()
                )));
            }
            left_for_gen -= 1;
            cells = self.step_cells(&cells, |_, _, _, _| {}).0;
            if cells.iter().any(|c| c.base == Base::Error) {
                break;
            }
            if let Some(w) = self.decode_cells(&cells) {
                out.push(w);
                left_for_gen = self.steps_per_generation(cells.len());
            }
        }
        Ok(out)
    }

    /// One synchronous update, on token configurations.
    pub fn step(&self, config: &CaConfiguration) -> Result<CaConfiguration, ConstructError> {
        let cells = self.parse_config(config)?;
        let (next, trimmed) = self.step_cells(&cells, |_, _, _, _| {});
        Ok(self.render(&next, config.offset() - 1 + trimmed))
    }

    fn decode_cells(&self, cells: &[Cell]) -> Option<Word> {
        let at = cells
            .iter()
            .position(|c| matches!(&c.base, Base::Reader(r) if r.fresh))?;
        let Base::Reader(reader) = &cells[at].base else {
            unreachable!()
        };
        let mut word = Word::empty();
        for cell in &cells[at + 1..] {
            match &cell.base {
                Base::Data(b, sym) if *b == reader.parity => word.push(sym.clone()),
                _ => break,
            }
        }
        Some(word)
    }

    /// Applies the local rule over the padded support, reporting every
    /// applied neighborhood to `record`. Returns the trimmed row and how
    /// many quiet cells were trimmed from the left.
    fn step_cells(
        &self,
        cells: &[Cell],
        mut record: impl FnMut(&Cell, &Cell, &Cell, &Cell),
    ) -> (Vec<Cell>, i64) {
        let quiet = Cell::quiet();
        let get = |i: isize| -> &Cell {
            if i < 0 || i as usize >= cells.len() {
                &quiet
            } else {
                &cells[i as usize]
            }
        };
        let mut next = Vec::with_capacity(cells.len() + 2);
        for i in -1..=cells.len() as isize {
            let (l, c, r) = (get(i - 1), get(i), get(i + 1));
            let out = self.local(l, c, r);
            record(l, c, r, &out);
            next.push(out);
        }
        let Some(first) = next.iter().position(|c| !c.is_quiet()) else {
            return (Vec::new(), 0);
        };
        let last = next.iter().rposition(|c| !c.is_quiet()).expect("nonempty");
        (next[first..=last].to_vec(), first as i64)
    }

    /// The radius-1 local rule.
    fn local(&self, l: &Cell, c: &Cell, r: &Cell) -> Cell {
        let base = self.next_base(l, c, r);
        // Right-moving particles: inherit from the left unless they were
        // absorbed there (writer cells absorb every payload). A launching
        // reader places the head of its queue into its own slot instead;
        // everything left of a reader is quiescent, so nothing collides.
        let launching = matches!(&c.base, Base::Reader(rc) if !rc.queue.is_empty());
        let part = if launching {
            match &c.base {
                Base::Reader(rc) => Some(rc.queue[0].clone()),
                _ => unreachable!(),
            }
        } else if matches!(l.base, Base::Writer(_)) {
            None
        } else {
            l.part.clone()
        };
        // Left-moving go signal: spawned when a writer absorbs the end
        // marker; dies where it spawns the next reader (a quiescent cell).
        let sig = if let (Base::Writer(_), Some(Payload::Eof(p))) = (&c.base, &c.part) {
            Some(*p)
        } else if c.base == Base::Quiet {
            None
        } else {
            r.sig
        };
        Cell { base, part, sig }
    }

    fn reader_ready(base: &Base) -> Option<&ReaderCell> {
        match base {
            Base::Reader(rc) if rc.queue.is_empty() => Some(rc),
            _ => None,
        }
    }

    fn next_base(&self, l: &Cell, c: &Cell, r: &Cell) -> Base {
        match &c.base {
            Base::Error => Base::Error,
            Base::Quiet => {
                // A go signal arriving from the right spawns the reader.
                if let Some(p) = r.sig {
                    let parity = match &r.base {
                        Base::Data(b, _) | Base::Count(b) => *b,
                        Base::Writer(bw) => 1 - bw,
                        _ => return Base::Error,
                    };
                    return Base::Reader(ReaderCell {
                        phase: p,
                        parity,
                        mode: ReaderMode::Read(self.levels[p].start),
                        queue: Vec::new(),
                        fresh: true,
                    });
                }
                // The writer steps right after absorbing a data payload.
                if let Base::Writer(bw) = l.base {
                    if matches!(l.part, Some(Payload::Sym(_)) | Some(Payload::Count)) {
                        return Base::Writer(bw);
                    }
                }
                Base::Quiet
            }
            Base::Data(b, sym) => {
                if let Some(rc) = Self::reader_ready(&l.base) {
                    if *b == rc.parity {
                        return match rc.mode {
                            ReaderMode::Read(state) => {
                                match self.levels[rc.phase].delta.get(&(state, sym.clone())) {
                                    Some((to, out)) => Base::Reader(ReaderCell {
                                        phase: rc.phase,
                                        parity: rc.parity,
                                        mode: ReaderMode::Read(*to),
                                        queue: out.iter().cloned().map(Payload::Sym).collect(),
                                        fresh: false,
                                    }),
                                    None => Base::Error,
                                }
                            }
                            // Same-parity data after the count block breaks
                            // the layout invariant.
                            _ => Base::Error,
                        };
                    }
                }
                Base::Data(*b, sym.clone())
            }
            Base::Count(b) => {
                if let Some(rc) = Self::reader_ready(&l.base) {
                    if *b == rc.parity {
                        return match rc.mode {
                            ReaderMode::Read(state) => {
                                // Data section done: decide the routing now.
                                let level = &self.levels[rc.phase];
                                let k = self.k();
                                if level.route_back[state] {
                                    // Swallow this count (cursor - 1).
                                    Base::Reader(ReaderCell {
                                        phase: rc.phase,
                                        parity: rc.parity,
                                        mode: ReaderMode::Count {
                                            next_phase: (rc.phase + k - 1) % k,
                                            extra: false,
                                        },
                                        queue: Vec::new(),
                                        fresh: false,
                                    })
                                } else {
                                    // Relay this count, append one extra.
                                    Base::Reader(ReaderCell {
                                        phase: rc.phase,
                                        parity: rc.parity,
                                        mode: ReaderMode::Count {
                                            next_phase: (rc.phase + 1) % k,
                                            extra: true,
                                        },
                                        queue: vec![Payload::Count],
                                        fresh: false,
                                    })
                                }
                            }
                            ReaderMode::Count { next_phase, extra } => Base::Reader(ReaderCell {
                                phase: rc.phase,
                                parity: rc.parity,
                                mode: ReaderMode::Count { next_phase, extra },
                                queue: vec![Payload::Count],
                                fresh: false,
                            }),
                            ReaderMode::Finish => Base::Error,
                        };
                    }
                }
                Base::Count(*b)
            }
            Base::Writer(bw) => match &c.part {
                Some(Payload::Sym(y)) => Base::Data(*bw, y.clone()),
                Some(Payload::Count) => Base::Count(*bw),
                Some(Payload::Eof(_)) => Base::Writer(1 - bw),
                None => Base::Writer(*bw),
            },
            Base::Reader(rc) => {
                if !rc.queue.is_empty() {
                    // Launch the head of the queue (the slot logic places
                    // it); keep draining.
                    return Base::Reader(ReaderCell {
                        queue: rc.queue[1..].to_vec(),
                        fresh: false,
                        ..rc.clone()
                    });
                }
                match rc.mode {
                    ReaderMode::Finish => Base::Quiet,
                    ReaderMode::Read(state) => match &r.base {
                        Base::Data(b, _) if *b == rc.parity => Base::Quiet,
                        Base::Count(b) if *b == rc.parity => Base::Quiet,
                        Base::Data(_, _) | Base::Writer(_) => {
                            // Region end with an empty count block: cursor 0.
                            let level = &self.levels[rc.phase];
                            let queue = if level.route_back[state] {
                                // Floor: stay at cursor 0, phase unchanged.
                                vec![Payload::Eof(rc.phase)]
                            } else {
                                let np = (rc.phase + 1) % self.k();
                                vec![Payload::Count, Payload::Eof(np)]
                            };
                            Base::Reader(ReaderCell {
                                phase: rc.phase,
                                parity: rc.parity,
                                mode: ReaderMode::Finish,
                                queue,
                                fresh: false,
                            })
                        }
                        _ => Base::Error,
                    },
                    ReaderMode::Count { next_phase, extra } => match &r.base {
                        Base::Count(b) if *b == rc.parity => Base::Quiet,
                        Base::Data(b, _) if *b != rc.parity => {
                            Base::Reader(Self::finish_counts(rc, next_phase, extra))
                        }
                        Base::Writer(_) => Base::Reader(Self::finish_counts(rc, next_phase, extra)),
                        _ => Base::Error,
                    },
                }
            }
        }
    }

    fn finish_counts(rc: &ReaderCell, next_phase: usize, extra: bool) -> ReaderCell {
        let mut queue = Vec::new();
        if extra {
            queue.push(Payload::Count);
        }
        queue.push(Payload::Eof(next_phase));
        ReaderCell {
            phase: rc.phase,
            parity: rc.parity,
            mode: ReaderMode::Finish,
            queue,
            fresh: false,
        }
    }

    // ---- token encoding -------------------------------------------------

    fn payload_token(p: &Payload) -> String {
        match p {
            Payload::Sym(s) => format!("s.{s}"),
            Payload::Count => "k".into(),
            Payload::Eof(p) => format!("e{p}"),
        }
    }

    fn payload_of(token: &str) -> Option<Payload> {
        if let Some(sym) = token.strip_prefix("s.") {
            return Some(Payload::Sym(sym.to_string()));
        }
        if token == "k" {
            return Some(Payload::Count);
        }
        if let Some(p) = token.strip_prefix('e') {
            return p.parse().ok().map(Payload::Eof);
        }
        None
    }

    fn cell_token(&self, cell: &Cell) -> String {
        let base = match &cell.base {
            Base::Quiet => "q".to_string(),
            Base::Error => "ERR".to_string(),
            Base::Data(b, sym) => format!("d{b}.{sym}"),
            Base::Count(b) => format!("c{b}"),
            Base::Writer(b) => format!("w{b}"),
            Base::Reader(rc) => {
                let mode = match rc.mode {
                    ReaderMode::Read(s) => format!("R{s}"),
                    ReaderMode::Count { next_phase, extra } => {
                        format!("C{next_phase}.{}", if extra { 1 } else { 0 })
                    }
                    ReaderMode::Finish => "F".to_string(),
                };
                let queue = if rc.queue.is_empty() {
                    "-".to_string()
                } else {
                    rc.queue
                        .iter()
                        .map(Self::payload_token)
                        .collect::<Vec<_>>()
                        .join("+")
                };
                format!(
                    "r{}:{}:{}:{}{}",
                    rc.phase,
                    rc.parity,
                    mode,
                    queue,
                    if rc.fresh { ":new" } else { "" }
                )
            }
        };
        let part = cell
            .part
            .as_ref()
            .map(|p| format!("/{}", Self::payload_token(p)))
            .unwrap_or_default();
        let sig = cell.sig.map(|p| format!("/g{p}")).unwrap_or_default();
        format!("{base}{part}{sig}")
    }

    fn cell_of(&self, token: &str) -> Result<Cell, ConstructError> {
        let bad = || ConstructError::Unsupported(format!("unreadable cell token `{token}`"));
        let mut parts = token.split('/');
        let base_tok = parts.next().ok_or_else(bad)?;
        let mut part = None;
        let mut sig = None;
        for extra in parts {
            if let Some(g) = extra.strip_prefix('g') {
                sig = Some(g.parse().map_err(|_| bad())?);
            } else {
                part = Some(Self::payload_of(extra).ok_or_else(bad)?);
            }
        }
        let base = if base_tok == "q" {
            Base::Quiet
        } else if base_tok == "ERR" {
            Base::Error
        } else if let Some(rest) = base_tok.strip_prefix('d') {
            let (b, sym) = rest.split_once('.').ok_or_else(bad)?;
            Base::Data(b.parse().map_err(|_| bad())?, sym.to_string())
        } else if let Some(b) = base_tok.strip_prefix('c') {
            Base::Count(b.parse().map_err(|_| bad())?)
        } else if let Some(b) = base_tok.strip_prefix('w') {
            Base::Writer(b.parse().map_err(|_| bad())?)
        } else if let Some(rest) = base_tok.strip_prefix('r') {
            let mut fields = rest.splitn(4, ':');
            let phase: usize = fields.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            let parity: u8 = fields.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            let mode_tok = fields.next().ok_or_else(bad)?;
            let tail = fields.next().ok_or_else(bad)?;
            let (queue_tok, fresh) = match tail.strip_suffix(":new") {
                Some(q) => (q, true),
                None => (tail, false),
            };
            let mode = if let Some(s) = mode_tok.strip_prefix('R') {
                ReaderMode::Read(s.parse().map_err(|_| bad())?)
            } else if let Some(rest) = mode_tok.strip_prefix('C') {
                let (np, extra) = rest.split_once('.').ok_or_else(bad)?;
                ReaderMode::Count {
                    next_phase: np.parse().map_err(|_| bad())?,
                    extra: extra == "1",
                }
            } else if mode_tok == "F" {
                ReaderMode::Finish
            } else {
                return Err(bad());
            };
            let queue = if queue_tok == "-" {
                Vec::new()
            } else {
                queue_tok
                    .split('+')
                    .map(|t| Self::payload_of(t).ok_or_else(bad))
                    .collect::<Result<Vec<_>, _>>()?
            };
            Base::Reader(ReaderCell {
                phase,
                parity,
                mode,
                queue,
                fresh,
            })
        } else {
            return Err(bad());
        };
        Ok(Cell { base, part, sig })
    }

    fn render(&self, cells: &[Cell], offset: i64) -> CaConfiguration {
        let tokens: Vec<String> = cells.iter().map(|c| self.cell_token(c)).collect();
        CaConfiguration::new(Word::new(tokens), offset, self.quiescent())
    }

    fn parse_config(&self, config: &CaConfiguration) -> Result<Vec<Cell>, ConstructError> {
        config
            .cells()
            .symbols()
            .iter()
            .map(|t| self.cell_of(t))
            .collect()
    }

    /// Materializes a rule table covering every neighborhood reachable from
    /// the given inputs within the given number of generations, with
    /// quiescent as the default. The returned automaton replays those runs
    /// exactly under the generic simulator.
    pub fn materialize(
        &self,
        inputs: &[Word],
        generations: usize,
    ) -> Result<CellularAutomaton1D, ConstructError> {
        let mut rules: BTreeMap<Vec<String>, String> = BTreeMap::new();
        let mut symbols: BTreeMap<String, ()> = BTreeMap::new();
        symbols.insert(self.quiescent().to_string(), ());
        for input in inputs {
            let config = self.encode(input)?;
            let mut cells = self.parse_config(&config)?;
            let mut produced = 0usize;
            let mut left_for_gen = self.steps_per_generation(cells.len());
            while produced <= generations && left_for_gen > 0 {
                left_for_gen -= 1;
                let (next, _) = self.step_cells(&cells, |l, c, r, out| {
                    let key = vec![
                        self.cell_token(l),
                        self.cell_token(c),
                        self.cell_token(r),
                    ];
                    let value = self.cell_token(out);
                    for t in key.iter().chain([&value]) {
                        symbols.insert(t.clone(), ());
                    }
                    rules.insert(key, value);
                });
                cells = next;
                if cells.iter().any(|c| c.base == Base::Error) {
                    break;
                }
                if self.decode_cells(&cells).is_some() {
                    produced += 1;
                    left_for_gen = self.steps_per_generation(cells.len());
                }
            }
        }
        // Rules that restate the quiescent default are redundant.
        rules.retain(|_, v| v != self.quiescent());
        let alphabet = Alphabet::new(symbols.into_keys().collect::<Vec<_>>())
            .map_err(|e| ConstructError::Unsupported(e.to_string()))?;
        CellularAutomaton1D::new(
            self.name.clone(),
            alphabet,
            1,
            self.quiescent(),
            rules.into_iter().collect(),
            Some(self.quiescent().to_string()),
        )
        .map_err(ConstructError::from)
    }
}
