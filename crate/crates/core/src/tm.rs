//! Single-tape deterministic Turing machines and first-order inductive
//! Turing machines.
//!
//! The inductive variant adds a write-only output tape. An inductive run
//! never needs to halt to produce a result: once the output tape stops
//! changing it holds the result. "Forever stops changing" is not decidable,
//! so [`InductiveTuringMachine::run`] reports [`ItmOutcome::Stabilized`] only
//! as a verified claim over a finite stability window, and
//! [`ItmOutcome::Undecided`] never asserts divergence.

use std::collections::{BTreeMap, BTreeSet};

use crate::alphabet::{Alphabet, Word};
use crate::transducer::{DefinitionError, RunError};

/// Head movement of one transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    Left,
    Right,
    Stay,
}

impl Move {
    pub fn token(self) -> &'static str {
        match self {
            Move::Left => "L",
            Move::Right => "R",
            Move::Stay => "S",
        }
    }

    pub fn from_token(t: &str) -> Option<Self> {
        match t {
            "L" => Some(Move::Left),
            "R" => Some(Move::Right),
            "S" => Some(Move::Stay),
            _ => None,
        }
    }
}

/// Outcome of a bounded Turing-machine run. Budget exhaustion is a value,
/// not an error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TmOutcome {
    Halted {
        /// Tape content between the outermost non-blank cells.
        tape: Word,
        accept: bool,
        steps: u64,
        final_state: String,
    },
    BudgetExhausted {
        steps: u64,
    },
}

/// Outcome of a bounded inductive run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ItmOutcome {
    /// The output tape was observed unchanged for the whole stability window
    /// (or the machine halted, which freezes the output for good).
    Stabilized {
        output: Word,
        since_step: u64,
        /// Final-state name when the machine halted, used for routing.
        final_state: Option<String>,
    },
    /// Budget ran out while the output was still changing.
    Undecided { output: Word },
}

/// A deterministic single-tape Turing machine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TuringMachine {
    name: String,
    states: Vec<String>,
    start: usize,
    halt_accept: BTreeSet<usize>,
    halt_reject: BTreeSet<usize>,
    route_back: BTreeSet<usize>,
    input_alphabet: Alphabet,
    tape_alphabet: Alphabet,
    blank: usize,
    // (state, tape symbol) -> (state, written symbol, move)
    transitions: BTreeMap<(usize, usize), (usize, usize, Move)>,
}

/// One tape plus head position, shared by TM and ITM runs.
struct Tape {
    cells: BTreeMap<i64, usize>,
    head: i64,
    blank: usize,
}

impl Tape {
    fn load(word: &Word, alphabet: &Alphabet, blank: usize) -> Result<Self, RunError> {
        let mut cells = BTreeMap::new();
        for (pos, sym) in word.symbols().iter().enumerate() {
            let ix = alphabet
                .position(sym)
                .ok_or_else(|| RunError::SymbolNotInAlphabet {
                    symbol: sym.clone(),
                    position: pos,
                })?;
            cells.insert(pos as i64, ix);
        }
        Ok(Tape {
            cells,
            head: 0,
            blank,
        })
    }

    fn read(&self) -> usize {
        self.cells.get(&self.head).copied().unwrap_or(self.blank)
    }

    fn write(&mut self, sym: usize) {
        if sym == self.blank {
            self.cells.remove(&self.head);
        } else {
            self.cells.insert(self.head, sym);
        }
    }

    fn shift(&mut self, m: Move) {
        match m {
            Move::Left => self.head -= 1,
            Move::Right => self.head += 1,
            Move::Stay => {}
        }
    }

    /// Content between the outermost non-blank cells.
    fn content(&self, alphabet: &Alphabet) -> Word {
        let (Some(&lo), Some(&hi)) = (self.cells.keys().next(), self.cells.keys().next_back())
        else {
            return Word::empty();
        };
        let mut w = Word::empty();
        for pos in lo..=hi {
            let sym = self.cells.get(&pos).copied().unwrap_or(self.blank);
            w.push(alphabet.symbol(sym).expect("in range"));
        }
        w
    }
}

impl TuringMachine {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        states: Vec<String>,
        start: &str,
        halt_accept: &[String],
        halt_reject: &[String],
        route_back: &[String],
        input_alphabet: Alphabet,
        tape_alphabet: Alphabet,
        blank: &str,
        transitions: Vec<(String, String, String, String, Move)>,
    ) -> Result<Self, DefinitionError> {
        let name = name.into();
        if states.is_empty() {
            return Err(DefinitionError::NoStates { machine: name });
        }
        let mut index = BTreeMap::new();
        for (i, s) in states.iter().enumerate() {
            if index.insert(s.clone(), i).is_some() {
                return Err(DefinitionError::DuplicateState {
                    machine: name,
                    state: s.clone(),
                });
            }
        }
        let resolve = |state: &str| {
            index
                .get(state)
                .copied()
                .ok_or_else(|| DefinitionError::UnknownState {
                    machine: name.clone(),
                    state: state.to_string(),
                })
        };
        let tape_sym = |sym: &str| {
            tape_alphabet
                .position(sym)
                .ok_or_else(|| DefinitionError::UnknownSymbol {
                    machine: name.clone(),
                    symbol: sym.to_string(),
                    role: "tape",
                })
        };
        if !tape_alphabet.is_superset_of(&input_alphabet) {
            return Err(DefinitionError::Other {
                machine: name.clone(),
                violation: "tape alphabet must contain the input alphabet".into(),
            });
        }
        let blank_ix = tape_sym(blank)?;
        if input_alphabet.contains(blank) {
            return Err(DefinitionError::Other {
                machine: name.clone(),
                violation: format!("blank `{blank}` must not be an input symbol"),
            });
        }
        let start_ix = resolve(start)?;
        let mut acc = BTreeSet::new();
        for s in halt_accept {
            acc.insert(resolve(s)?);
        }
        let mut rej = BTreeSet::new();
        for s in halt_reject {
            rej.insert(resolve(s)?);
        }
        let mut rb = BTreeSet::new();
        for s in route_back {
            rb.insert(resolve(s)?);
        }
        let mut trans = BTreeMap::new();
        for (from, read, to, write, mv) in transitions {
            let from_ix = resolve(&from)?;
            if acc.contains(&from_ix) || rej.contains(&from_ix) {
                return Err(DefinitionError::Other {
                    machine: name.clone(),
                    violation: format!("halt state `{from}` must not have outgoing transitions"),
                });
            }
            let read_ix = tape_sym(&read)?;
            let to_ix = resolve(&to)?;
            let write_ix = tape_sym(&write)?;
            if trans
                .insert((from_ix, read_ix), (to_ix, write_ix, mv))
                .is_some()
            {
                return Err(DefinitionError::DuplicateTransition {
                    machine: name.clone(),
                    state: from,
                    symbol: read,
                });
            }
        }
        Ok(TuringMachine {
            name,
            states,
            start: start_ix,
            halt_accept: acc,
            halt_reject: rej,
            route_back: rb,
            input_alphabet,
            tape_alphabet,
            blank: blank_ix,
            transitions: trans,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn start_state(&self) -> &str {
        &self.states[self.start]
    }

    pub fn halt_accept_states(&self) -> impl Iterator<Item = &str> {
        self.halt_accept.iter().map(|&i| self.states[i].as_str())
    }

    pub fn halt_reject_states(&self) -> impl Iterator<Item = &str> {
        self.halt_reject.iter().map(|&i| self.states[i].as_str())
    }

    pub fn route_back_states(&self) -> impl Iterator<Item = &str> {
        self.route_back.iter().map(|&i| self.states[i].as_str())
    }

    pub fn is_route_back_state(&self, state: &str) -> bool {
        self.states
            .iter()
            .position(|s| s == state)
            .is_some_and(|ix| self.route_back.contains(&ix))
    }

    pub fn input_alphabet(&self) -> &Alphabet {
        &self.input_alphabet
    }

    pub fn tape_alphabet(&self) -> &Alphabet {
        &self.tape_alphabet
    }

    pub fn blank(&self) -> &str {
        self.tape_alphabet.symbol(self.blank).expect("in range")
    }

    pub fn transitions(&self) -> impl Iterator<Item = (&str, &str, &str, &str, Move)> {
        self.transitions.iter().map(|(&(from, read), &(to, write, mv))| {
            (
                self.states[from].as_str(),
                self.tape_alphabet.symbol(read).expect("in range"),
                self.states[to].as_str(),
                self.tape_alphabet.symbol(write).expect("in range"),
                mv,
            )
        })
    }

    fn is_halt(&self, state: usize) -> bool {
        self.halt_accept.contains(&state) || self.halt_reject.contains(&state)
    }

    /// Runs the machine for at most `max_steps` transitions. The halting
    /// check happens before each transition, so a machine starting in a halt
    /// state reports 0 steps. A missing transition outside a halt state also
    /// halts (rejecting), which keeps every machine total.
    pub fn run(&self, word: &Word, max_steps: u64) -> Result<TmOutcome, RunError> {
        self.input_alphabet.check_word(word).map_err(|e| match e {
            crate::alphabet::AlphabetError::UnknownSymbol(s) => {
                let position = word.symbols().iter().position(|x| *x == s).unwrap_or(0);
                RunError::SymbolNotInAlphabet {
                    symbol: s,
                    position,
                }
            }
            other => RunError::AlphabetMismatch(other.to_string()),
        })?;
        let mut tape = Tape::load(word, &self.tape_alphabet, self.blank)?;
        let mut state = self.start;
        let mut steps = 0u64;
        loop {
            if self.is_halt(state) {
                return Ok(TmOutcome::Halted {
                    tape: tape.content(&self.tape_alphabet),
                    accept: self.halt_accept.contains(&state),
                    steps,
                    final_state: self.states[state].clone(),
                });
            }
            if steps >= max_steps {
                return Ok(TmOutcome::BudgetExhausted { steps });
            }
            match self.transitions.get(&(state, tape.read())) {
                Some(&(to, write, mv)) => {
                    tape.write(write);
                    tape.shift(mv);
                    state = to;
                    steps += 1;
                }
                None => {
                    return Ok(TmOutcome::Halted {
                        tape: tape.content(&self.tape_alphabet),
                        accept: false,
                        steps,
                        final_state: self.states[state].clone(),
                    })
                }
            }
        }
    }
}

/// A first-order inductive Turing machine: a [`TuringMachine`] plus a
/// write-only output tape. Transitions may append a word to the output; the
/// output tape is never read back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InductiveTuringMachine {
    base: TuringMachine,
    output_alphabet: Alphabet,
    // (state, tape symbol) -> word appended to the output tape
    output: BTreeMap<(String, String), Word>,
}

impl InductiveTuringMachine {
    pub fn new(
        base: TuringMachine,
        output_alphabet: Alphabet,
        output: Vec<(String, String, Word)>,
    ) -> Result<Self, DefinitionError> {
        let mut out_map = BTreeMap::new();
        for (state, sym, word) in output {
            if !base.states.iter().any(|s| *s == state) {
                return Err(DefinitionError::UnknownState {
                    machine: base.name.clone(),
                    state,
                });
            }
            if !base.tape_alphabet.contains(&sym) {
                return Err(DefinitionError::UnknownSymbol {
                    machine: base.name.clone(),
                    symbol: sym,
                    role: "tape",
                });
            }
            for o in word.symbols() {
                if !output_alphabet.contains(o) {
                    return Err(DefinitionError::UnknownSymbol {
                        machine: base.name.clone(),
                        symbol: o.clone(),
                        role: "output",
                    });
                }
            }
            out_map.insert((state, sym), word);
        }
        Ok(InductiveTuringMachine {
            base,
            output_alphabet,
            output: out_map,
        })
    }

    pub fn base(&self) -> &TuringMachine {
        &self.base
    }

    pub fn name(&self) -> &str {
        self.base.name()
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.base.set_name(name);
    }

    pub fn output_alphabet(&self) -> &Alphabet {
        &self.output_alphabet
    }

    pub fn output_appends(&self) -> impl Iterator<Item = (&str, &str, &Word)> {
        self.output
            .iter()
            .map(|((s, sym), w)| (s.as_str(), sym.as_str(), w))
    }

    /// Order of the inductive hierarchy; only first-order machines exist
    /// here, so this is always 1.
    pub fn order(&self) -> u32 {
        1
    }

    /// Runs with stabilization detection: `Stabilized` when the machine halts
    /// or when the output tape goes `stability_window` consecutive steps
    /// without changing; `Undecided` when the step budget runs out first.
    ///
    /// `since_step` is the step after which no output change was observed
    /// (the halting step for a halting run).
    pub fn run(
        &self,
        word: &Word,
        max_steps: u64,
        stability_window: u64,
    ) -> Result<ItmOutcome, RunError> {
        let tm = &self.base;
        tm.input_alphabet.check_word(word).map_err(|e| match e {
            crate::alphabet::AlphabetError::UnknownSymbol(s) => {
                let position = word.symbols().iter().position(|x| *x == s).unwrap_or(0);
                RunError::SymbolNotInAlphabet {
                    symbol: s,
                    position,
                }
            }
            other => RunError::AlphabetMismatch(other.to_string()),
        })?;
        let mut tape = Tape::load(word, &tm.tape_alphabet, tm.blank)?;
        let mut state = tm.start;
        let mut steps = 0u64;
        let mut out = Word::empty();
        let mut last_change = 0u64;
        loop {
            if tm.is_halt(state) {
                return Ok(ItmOutcome::Stabilized {
                    output: out,
                    since_step: steps,
                    final_state: Some(tm.states[state].clone()),
                });
            }
            if steps > last_change && steps - last_change >= stability_window {
                return Ok(ItmOutcome::Stabilized {
                    output: out,
                    since_step: last_change,
                    final_state: None,
                });
            }
            if steps >= max_steps {
                return Ok(ItmOutcome::Undecided { output: out });
            }
            let read = tape.read();
            match tm.transitions.get(&(state, read)) {
                Some(&(to, write, mv)) => {
                    let key = (
                        tm.states[state].clone(),
                        tm.tape_alphabet.symbol(read).expect("in range").to_string(),
                    );
                    if let Some(append) = self.output.get(&key) {
                        if !append.is_empty() {
                            out.extend_from(append);
                            last_change = steps + 1;
                        }
                    }
                    tape.write(write);
                    tape.shift(mv);
                    state = to;
                    steps += 1;
                }
                None => {
                    // Missing transition halts the base machine; the output
                    // is frozen from here on.
                    return Ok(ItmOutcome::Stabilized {
                        output: out,
                        since_step: steps,
                        final_state: Some(tm.states[state].clone()),
                    });
                }
            }
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// TM appending a single 1 to a unary word: runs right to the first
    /// blank, writes 1, halts.
    pub fn unary_increment() -> TuringMachine {
        let input = Alphabet::new(["1"]).unwrap();
        let tape = Alphabet::new(["1", "_"]).unwrap();
        TuringMachine::new(
            "unary-inc",
            vec!["scan".into(), "done".into()],
            "scan",
            &["done".to_string()],
            &[],
            &[],
            input,
            tape,
            "_",
            vec![
                (
                    "scan".into(),
                    "1".into(),
                    "scan".into(),
                    "1".into(),
                    Move::Right,
                ),
                (
                    "scan".into(),
                    "_".into(),
                    "done".into(),
                    "1".into(),
                    Move::Stay,
                ),
            ],
        )
        .unwrap()
    }

    #[test]
    fn immediate_halt_reports_zero_steps() {
        let input = Alphabet::binary();
        let tape = Alphabet::new(["0", "1", "_"]).unwrap();
        let tm = TuringMachine::new(
            "instant",
            vec!["h".into()],
            "h",
            &["h".to_string()],
            &[],
            &[],
            input,
            tape,
            "_",
            vec![],
        )
        .unwrap();
        let out = tm.run(&Word::parse("0 1"), 10).unwrap();
        assert_eq!(
            out,
            TmOutcome::Halted {
                tape: Word::parse("0 1"),
                accept: true,
                steps: 0,
                final_state: "h".into()
            }
        );
    }

    #[test]
    fn unary_increment_matches_hand_trace() {
        // Hand trace on `1 1 1`: scan moves right over three 1s (3 steps),
        // writes a fourth 1 on the blank (1 step), halts: 4 steps.
        let tm = unary_increment();
        let out = tm.run(&Word::parse("1 1 1"), 100).unwrap();
        assert_eq!(
            out,
            TmOutcome::Halted {
                tape: Word::parse("1 1 1 1"),
                accept: true,
                steps: 4,
                final_state: "done".into()
            }
        );
    }

    #[test]
    fn self_loop_exhausts_budget() {
        let input = Alphabet::new(["1"]).unwrap();
        let tape = Alphabet::new(["1", "_"]).unwrap();
        let tm = TuringMachine::new(
            "spin",
            vec!["s".into()],
            "s",
            &[],
            &[],
            &[],
            input,
            tape,
            "_",
            vec![
                ("s".into(), "1".into(), "s".into(), "1".into(), Move::Stay),
                ("s".into(), "_".into(), "s".into(), "_".into(), Move::Stay),
            ],
        )
        .unwrap();
        assert_eq!(
            tm.run(&Word::parse("1"), 100).unwrap(),
            TmOutcome::BudgetExhausted { steps: 100 }
        );
    }

    #[test]
    fn tm_runs_are_deterministic() {
        let tm = unary_increment();
        let a = tm.run(&Word::parse("1 1"), 50).unwrap();
        let b = tm.run(&Word::parse("1 1"), 50).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn halt_state_with_outgoing_transition_is_rejected() {
        let input = Alphabet::new(["1"]).unwrap();
        let tape = Alphabet::new(["1", "_"]).unwrap();
        let err = TuringMachine::new(
            "bad",
            vec!["h".into()],
            "h",
            &["h".to_string()],
            &[],
            &[],
            input,
            tape,
            "_",
            vec![("h".into(), "1".into(), "h".into(), "1".into(), Move::Stay)],
        )
        .unwrap_err();
        assert!(matches!(err, DefinitionError::Other { .. }));
    }

    /// ITM copying its input to the output tape, then spinning forever.
    pub fn copy_then_spin() -> InductiveTuringMachine {
        let input = Alphabet::binary();
        let tape = Alphabet::new(["0", "1", "_"]).unwrap();
        let base = TuringMachine::new(
            "copy-spin",
            vec!["c".into(), "spin".into()],
            "c",
            &[],
            &[],
            &[],
            input.clone(),
            tape,
            "_",
            vec![
                ("c".into(), "0".into(), "c".into(), "0".into(), Move::Right),
                ("c".into(), "1".into(), "c".into(), "1".into(), Move::Right),
                (
                    "c".into(),
                    "_".into(),
                    "spin".into(),
                    "_".into(),
                    Move::Stay,
                ),
                (
                    "spin".into(),
                    "_".into(),
                    "spin".into(),
                    "_".into(),
                    Move::Stay,
                ),
            ],
        )
        .unwrap();
        InductiveTuringMachine::new(
            base,
            input,
            vec![
                ("c".into(), "0".into(), Word::parse("0")),
                ("c".into(), "1".into(), Word::parse("1")),
            ],
        )
        .unwrap()
    }

    #[test]
    fn copying_itm_stabilizes_on_its_input() {
        let itm = copy_then_spin();
        let w = Word::parse("1 0 1");
        match itm.run(&w, 1000, 5).unwrap() {
            ItmOutcome::Stabilized { output, since_step, .. } => {
                assert_eq!(output, w);
                // The last output change happens on the step consuming the
                // final input symbol.
                assert_eq!(since_step, w.len() as u64);
            }
            other => panic!("expected stabilization, got {other:?}"),
        }
    }

    #[test]
    fn ever_growing_output_is_undecided() {
        let input = Alphabet::new(["1"]).unwrap();
        let tape = Alphabet::new(["1", "_"]).unwrap();
        let base = TuringMachine::new(
            "appender",
            vec!["s".into()],
            "s",
            &[],
            &[],
            &[],
            input.clone(),
            tape,
            "_",
            vec![
                ("s".into(), "1".into(), "s".into(), "1".into(), Move::Stay),
                ("s".into(), "_".into(), "s".into(), "_".into(), Move::Stay),
            ],
        )
        .unwrap();
        let itm = InductiveTuringMachine::new(
            base,
            input,
            vec![
                ("s".into(), "1".into(), Word::parse("1")),
                ("s".into(), "_".into(), Word::parse("1")),
            ],
        )
        .unwrap();
        match itm.run(&Word::parse("1"), 200, 8).unwrap() {
            ItmOutcome::Undecided { output } => assert_eq!(output.len(), 200),
            other => panic!("expected undecided, got {other:?}"),
        }
    }

    #[test]
    fn stabilization_window_is_replayable() {
        // Claim from the runtime contract: Stabilized(out, s) with window W
        // means the output is literally unchanged over steps [s, s+W].
        let itm = copy_then_spin();
        let w = Word::parse("0 1");
        let window = 6u64;
        let ItmOutcome::Stabilized { output, since_step, .. } =
            itm.run(&w, 1000, window).unwrap()
        else {
            panic!("expected stabilization");
        };
        // Replay with a plain step loop, recording output length per step.
        let ItmOutcome::Undecided { output: replak } = itm.run(&w, since_step, u64::MAX).unwrap()
        else {
            panic!("replay budget should stop before stabilization")
        };
        assert_eq!(replak, output, "output already complete at step s");
    }
}
