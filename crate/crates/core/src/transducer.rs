//! Deterministic finite transducers.
//!
//! A [`FiniteTransducer`] is the level-automaton class for evolutionary
//! finite automata. It carries both acceptance (an accepting-state set, used
//! for language questions) and transduction (a per-transition output *word*,
//! used for generation-to-generation computation). Output words may be empty
//! or longer than one symbol, so an iterated transducer can shrink or grow
//! its word; the [`FiniteTransducer::is_letter_to_letter`] flag marks the
//! length-preserving subclass.
//!
//! Transitions are partial. A missing transition makes a word *rejected* when
//! asking about acceptance and makes the transduction *undefined* — the
//! partiality is deliberately observable because composition laws depend on
//! it.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::alphabet::{Alphabet, AlphabetError, Word};

/// Invariant violations detected when assembling a machine.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum DefinitionError {
    #[error("machine `{machine}`: state `{state}` is not declared")]
    UnknownState { machine: String, state: String },
    #[error("machine `{machine}`: symbol `{symbol}` is not in the {role} alphabet")]
    UnknownSymbol {
        machine: String,
        symbol: String,
        role: &'static str,
    },
    #[error("machine `{machine}`: duplicate transition from (`{state}`, `{symbol}`)")]
    DuplicateTransition {
        machine: String,
        state: String,
        symbol: String,
    },
    #[error("machine `{machine}`: duplicate state `{state}`")]
    DuplicateState { machine: String, state: String },
    #[error("machine `{machine}`: no states declared")]
    NoStates { machine: String },
    #[error("machine `{machine}`: {violation}")]
    Other { machine: String, violation: String },
    #[error("machine `{machine}`: bad alphabet: {source}")]
    Alphabet {
        machine: String,
        #[source]
        source: AlphabetError,
    },
}

/// Errors raised while running a machine on a word.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum RunError {
    #[error("symbol `{symbol}` at position {position} is not in the input alphabet")]
    SymbolNotInAlphabet { symbol: String, position: usize },
    #[error("no transition from state `{state}` on `{symbol}` (input position {position})")]
    UndefinedTransition {
        state: String,
        symbol: String,
        position: usize,
    },
    #[error("input alphabets differ: {0}")]
    AlphabetMismatch(String),
    #[error("backward routing signaled in a basic machine at generation {t}")]
    BackwardInBasic { t: u64 },
    #[error("level error: {0}")]
    Level(String),
    #[error("search condition error: {0}")]
    Search(String),
    #[error("schedule error: {0}")]
    Schedule(String),
}

/// Result of running a transducer over a whole word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transduction {
    pub output: Word,
    pub final_state: String,
    pub accepted: bool,
    /// True when the run finished in a state tagged `route-back`.
    pub route_back: bool,
}

/// A deterministic finite transducer with an accepting-state set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteTransducer {
    name: String,
    states: Vec<String>,
    start: usize,
    accepting: BTreeSet<usize>,
    route_back: BTreeSet<usize>,
    input_alphabet: Alphabet,
    output_alphabet: Alphabet,
    // (state, input symbol index) -> (next state, output word)
    transitions: BTreeMap<(usize, usize), (usize, Word)>,
    /// True when the machine was declared as a pure acceptor (`dfa` kind).
    acceptor_only: bool,
}

impl FiniteTransducer {
    /// Assembles and validates a transducer from named parts.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        states: Vec<String>,
        start: &str,
        accepting: &[String],
        route_back: &[String],
        input_alphabet: Alphabet,
        output_alphabet: Alphabet,
        transitions: Vec<(String, String, String, Word)>,
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
        let resolve = |state: &str, name: &str| {
            index
                .get(state)
                .copied()
                .ok_or_else(|| DefinitionError::UnknownState {
                    machine: name.to_string(),
                    state: state.to_string(),
                })
        };
        let start = resolve(start, &name)?;
        let mut acc = BTreeSet::new();
        for s in accepting {
            acc.insert(resolve(s, &name)?);
        }
        let mut rb = BTreeSet::new();
        for s in route_back {
            rb.insert(resolve(s, &name)?);
        }
        let mut trans = BTreeMap::new();
        for (from, sym, to, out) in transitions {
            let from_ix = resolve(&from, &name)?;
            let sym_ix =
                input_alphabet
                    .position(&sym)
                    .ok_or_else(|| DefinitionError::UnknownSymbol {
                        machine: name.clone(),
                        symbol: sym.clone(),
                        role: "input",
                    })?;
            let to_ix = resolve(&to, &name)?;
            for o in out.symbols() {
                if !output_alphabet.contains(o) {
                    return Err(DefinitionError::UnknownSymbol {
                        machine: name,
                        symbol: o.clone(),
                        role: "output",
                    });
                }
            }
            if trans.insert((from_ix, sym_ix), (to_ix, out)).is_some() {
                return Err(DefinitionError::DuplicateTransition {
                    machine: name,
                    state: from,
                    symbol: sym,
                });
            }
        }
        Ok(FiniteTransducer {
            name,
            states,
            start,
            accepting: acc,
            route_back: rb,
            input_alphabet,
            output_alphabet,
            transitions: trans,
            acceptor_only: false,
        })
    }

    /// Marks this machine as a pure acceptor (`dfa` document kind).
    pub fn into_acceptor(mut self) -> Self {
        self.acceptor_only = true;
        self
    }

    pub fn is_acceptor_only(&self) -> bool {
        self.acceptor_only
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

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn start_state(&self) -> &str {
        &self.states[self.start]
    }

    pub fn accepting_states(&self) -> impl Iterator<Item = &str> {
        self.accepting.iter().map(|&i| self.states[i].as_str())
    }

    pub fn route_back_states(&self) -> impl Iterator<Item = &str> {
        self.route_back.iter().map(|&i| self.states[i].as_str())
    }

    pub fn input_alphabet(&self) -> &Alphabet {
        &self.input_alphabet
    }

    pub fn output_alphabet(&self) -> &Alphabet {
        &self.output_alphabet
    }

    /// Transitions as (from, symbol, to, output) name tuples in key order.
    pub fn transitions(&self) -> impl Iterator<Item = (&str, &str, &str, &Word)> {
        self.transitions.iter().map(|(&(from, sym), (to, out))| {
            (
                self.states[from].as_str(),
                self.input_alphabet.symbol(sym).expect("symbol in range"),
                self.states[*to].as_str(),
                out,
            )
        })
    }

    /// True iff every output word has length exactly 1.
    pub fn is_letter_to_letter(&self) -> bool {
        self.transitions.values().all(|(_, out)| out.len() == 1)
    }

    /// True when a transition exists for every (state, symbol) pair.
    pub fn is_total(&self) -> bool {
        self.states.len() * self.input_alphabet.len() == self.transitions.len()
    }

    fn step(&self, state: usize, sym_ix: usize) -> Option<(usize, &Word)> {
        self.transitions
            .get(&(state, sym_ix))
            .map(|(to, out)| (*to, out))
    }

    /// Runs the machine over `word`, collecting output along the unique run.
    pub fn transduce(&self, word: &Word) -> Result<Transduction, RunError> {
        let mut state = self.start;
        let mut output = Word::empty();
        for (pos, sym) in word.symbols().iter().enumerate() {
            let sym_ix = self.input_alphabet.position(sym).ok_or_else(|| {
                RunError::SymbolNotInAlphabet {
                    symbol: sym.clone(),
                    position: pos,
                }
            })?;
            match self.step(state, sym_ix) {
                Some((to, out)) => {
                    output.extend_from(out);
                    state = to;
                }
                None => {
                    return Err(RunError::UndefinedTransition {
                        state: self.states[state].clone(),
                        symbol: sym.clone(),
                        position: pos,
                    })
                }
            }
        }
        Ok(Transduction {
            output,
            final_state: self.states[state].clone(),
            accepted: self.accepting.contains(&state),
            route_back: self.route_back.contains(&state),
        })
    }

    /// Acceptance: the run on `word` ends in an accepting state. A missing
    /// transition rejects (it does not error).
    pub fn accepts(&self, word: &Word) -> Result<bool, RunError> {
        let mut state = self.start;
        for (pos, sym) in word.symbols().iter().enumerate() {
            let sym_ix = self.input_alphabet.position(sym).ok_or_else(|| {
                RunError::SymbolNotInAlphabet {
                    symbol: sym.clone(),
                    position: pos,
                }
            })?;
            match self.step(state, sym_ix) {
                Some((to, _)) => state = to,
                None => return Ok(false),
            }
        }
        Ok(self.accepting.contains(&state))
    }

    /// The state reached on `word`, or `None` if a transition is missing.
    pub fn run_state(&self, word: &Word) -> Result<Option<&str>, RunError> {
        let mut state = self.start;
        for (pos, sym) in word.symbols().iter().enumerate() {
            let sym_ix = self.input_alphabet.position(sym).ok_or_else(|| {
                RunError::SymbolNotInAlphabet {
                    symbol: sym.clone(),
                    position: pos,
                }
            })?;
            match self.step(state, sym_ix) {
                Some((to, _)) => state = to,
                None => return Ok(None),
            }
        }
        Ok(Some(&self.states[state]))
    }

    /// Sequential composition: a product transducer `c` with
    /// `c.transduce(w) == t2.transduce(t1.transduce(w))` wherever the right
    /// side is defined, and undefined exactly where it is not.
    ///
    /// Only reachable product states are materialized. A product state is
    /// accepting when the first component accepts and the second accepts
    /// after consuming everything the first emitted.
    pub fn compose(t1: &FiniteTransducer, t2: &FiniteTransducer) -> Result<Self, RunError> {
        if !t2.input_alphabet.is_superset_of(&t1.output_alphabet) {
            return Err(RunError::AlphabetMismatch(format!(
                "output alphabet of `{}` is not contained in input alphabet of `{}`",
                t1.name, t2.name
            )));
        }
        let pair_name = |a: usize, b: usize| format!("{}.{}", t1.states[a], t2.states[b]);
        let mut states: Vec<(usize, usize)> = vec![(t1.start, t2.start)];
        let mut seen: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        seen.insert((t1.start, t2.start), 0);
        let mut queue = VecDeque::from([(t1.start, t2.start)]);
        let mut transitions: Vec<(String, String, String, Word)> = Vec::new();

        while let Some((s1, s2)) = queue.pop_front() {
            for sym_ix in 0..t1.input_alphabet.len() {
                let Some((n1, out1)) = t1.step(s1, sym_ix) else {
                    continue;
                };
                // Feed t1's emission through t2; if t2 lacks a transition the
                // composite transition is undefined.
                let mut s2_cur = s2;
                let mut out = Word::empty();
                let mut defined = true;
                for o in out1.symbols() {
                    let o_ix = t2
                        .input_alphabet
                        .position(o)
                        .expect("checked alphabet containment");
                    match t2.step(s2_cur, o_ix) {
                        Some((n2, out2)) => {
                            out.extend_from(out2);
                            s2_cur = n2;
                        }
                        None => {
                            defined = false;
                            break;
                        }
                    }
                }
                if !defined {
                    continue;
                }
                let target = (n1, s2_cur);
                if !seen.contains_key(&target) {
                    seen.insert(target, states.len());
                    states.push(target);
                    queue.push_back(target);
                }
                let sym = t1.input_alphabet.symbol(sym_ix).expect("in range");
                transitions.push((pair_name(s1, s2), sym.to_string(), pair_name(n1, s2_cur), out));
            }
        }

        let state_names: Vec<String> = states.iter().map(|&(a, b)| pair_name(a, b)).collect();
        let accepting: Vec<String> = states
            .iter()
            .filter(|&&(a, b)| t1.accepting.contains(&a) && t2.accepting.contains(&b))
            .map(|&(a, b)| pair_name(a, b))
            .collect();
        // Routing of the composite follows the second machine, which is the
        // one that ran last.
        let route_back: Vec<String> = states
            .iter()
            .filter(|&&(_, b)| t2.route_back.contains(&b))
            .map(|&(a, b)| pair_name(a, b))
            .collect();
        FiniteTransducer::new(
            format!("{}.{}", t1.name, t2.name),
            state_names,
            &pair_name(t1.start, t2.start),
            &accepting,
            &route_back,
            t1.input_alphabet.clone(),
            t2.output_alphabet.clone(),
            transitions,
        )
        .map_err(|e| RunError::AlphabetMismatch(e.to_string()))
    }

    /// Decides language equality of two deterministic acceptors exactly, by
    /// synchronized breadth-first search over the product (machines are
    /// totalized with an implicit dead state). Returns the length-lex least
    /// witness on inequivalence.
    pub fn language_equiv(
        a: &FiniteTransducer,
        b: &FiniteTransducer,
    ) -> Result<Option<Word>, RunError> {
        if a.input_alphabet != b.input_alphabet {
            return Err(RunError::AlphabetMismatch(format!(
                "`{}` and `{}` have different input alphabets",
                a.name, b.name
            )));
        }
        // None plays the implicit dead (rejecting, absorbing) state.
        type Cfg = (Option<usize>, Option<usize>);
        let start: Cfg = (Some(a.start), Some(b.start));
        let accept_a = |s: Option<usize>| s.is_some_and(|s| a.accepting.contains(&s));
        let accept_b = |s: Option<usize>| s.is_some_and(|s| b.accepting.contains(&s));
        let mut visited: BTreeSet<Cfg> = BTreeSet::from([start]);
        let mut queue: VecDeque<(Cfg, Word)> = VecDeque::from([(start, Word::empty())]);
        while let Some(((sa, sb), path)) = queue.pop_front() {
            if accept_a(sa) != accept_b(sb) {
                return Ok(Some(path));
            }
            for sym_ix in 0..a.input_alphabet.len() {
                let na = sa.and_then(|s| a.step(s, sym_ix).map(|(t, _)| t));
                let nb = sb.and_then(|s| b.step(s, sym_ix).map(|(t, _)| t));
                let cfg = (na, nb);
                if visited.insert(cfg) {
                    let mut p = path.clone();
                    p.push(a.input_alphabet.symbol(sym_ix).expect("in range"));
                    queue.push_back((cfg, p));
                }
            }
        }
        Ok(None)
    }

    /// An acceptor for exactly the given finite set of words (a trie).
    pub fn accepting_exactly(
        name: impl Into<String>,
        alphabet: Alphabet,
        words: &[Word],
    ) -> Self {
        let name = name.into();
        let mut states = vec!["r".to_string()];
        let mut transitions: Vec<(String, String, String, Word)> = Vec::new();
        let mut children: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut accepting_ix: BTreeSet<usize> = BTreeSet::new();
        for w in words {
            let mut cur = 0usize;
            for sym in w.symbols() {
                let sym_ix = alphabet.position(sym).expect("word over alphabet");
                cur = *children.entry((cur, sym_ix)).or_insert_with(|| {
                    let ix = states.len();
                    states.push(format!("n{ix}"));
                    transitions.push((
                        states[cur].clone(),
                        sym.clone(),
                        format!("n{ix}"),
                        Word::empty(),
                    ));
                    ix
                });
            }
            accepting_ix.insert(cur);
        }
        let accepting: Vec<String> = accepting_ix.iter().map(|&i| states[i].clone()).collect();
        FiniteTransducer::new(
            name,
            states.clone(),
            "r",
            &accepting,
            &[],
            alphabet.clone(),
            alphabet,
            transitions,
        )
        .expect("trie construction is well-formed")
        .into_acceptor()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{bit_flip, even_ones, identity, odd_ones};

    #[test]
    fn identity_transduces_to_itself() {
        let t = identity();
        for w in Alphabet::binary().words_up_to(4) {
            assert_eq!(t.transduce(&w).unwrap().output, w);
        }
    }

    #[test]
    fn bit_flip_flips() {
        let t = bit_flip();
        let out = t.transduce(&Word::parse("0 1 1")).unwrap().output;
        assert_eq!(out, Word::parse("1 0 0"));
    }

    #[test]
    fn empty_word_accepted_iff_start_accepting() {
        assert!(even_ones().accepts(&Word::empty()).unwrap());
        assert!(!odd_ones().accepts(&Word::empty()).unwrap());
    }

    #[test]
    fn even_ones_parity() {
        let d = even_ones();
        assert!(d.accepts(&Word::parse("1 0 1")).unwrap());
        assert!(!d.accepts(&Word::parse("1 0 0")).unwrap());
    }

    #[test]
    fn missing_transition_rejects_but_transduction_errors() {
        let a = Alphabet::binary();
        let t = FiniteTransducer::new(
            "partial",
            vec!["s".into()],
            "s",
            &["s".to_string()],
            &[],
            a.clone(),
            a,
            vec![("s".into(), "0".into(), "s".into(), Word::parse("0"))],
        )
        .unwrap();
        assert!(!t.accepts(&Word::parse("0 1 0")).unwrap());
        let err = t.transduce(&Word::parse("0 1 0")).unwrap_err();
        assert_eq!(
            err,
            RunError::UndefinedTransition {
                state: "s".into(),
                symbol: "1".into(),
                position: 1
            }
        );
    }

    #[test]
    fn unknown_symbol_is_an_error() {
        let t = identity();
        assert!(matches!(
            t.accepts(&Word::parse("0 x")).unwrap_err(),
            RunError::SymbolNotInAlphabet { position: 1, .. }
        ));
    }

    #[test]
    fn undeclared_state_in_transition_is_named() {
        let a = Alphabet::binary();
        let err = FiniteTransducer::new(
            "bad",
            vec!["q0".into()],
            "q0",
            &[],
            &[],
            a.clone(),
            a,
            vec![("q0".into(), "0".into(), "qX".into(), Word::empty())],
        )
        .unwrap_err();
        assert_eq!(
            err,
            DefinitionError::UnknownState {
                machine: "bad".into(),
                state: "qX".into()
            }
        );
    }

    /// Oracle: two-pass transduction.
    fn two_pass(t1: &FiniteTransducer, t2: &FiniteTransducer, w: &Word) -> Option<Word> {
        let mid = t1.transduce(w).ok()?;
        let out = t2.transduce(&mid.output).ok()?;
        Some(out.output)
    }

    #[test]
    fn compose_matches_two_pass_oracle() {
        let machines = [identity(), bit_flip()];
        for t1 in &machines {
            for t2 in &machines {
                let c = FiniteTransducer::compose(t1, t2).unwrap();
                for w in Alphabet::binary().words_up_to(6) {
                    let direct = c.transduce(&w).ok().map(|t| t.output);
                    assert_eq!(direct, two_pass(t1, t2, &w), "word {w}");
                }
            }
        }
    }

    #[test]
    fn compose_undefined_together_with_oracle() {
        let a = Alphabet::binary();
        // Emits `1 1` on `1`, nothing on `0`; composing with a partial second
        // machine exercises mid-emission undefinedness.
        let doubler = FiniteTransducer::new(
            "doubler",
            vec!["s".into()],
            "s",
            &["s".to_string()],
            &[],
            a.clone(),
            a.clone(),
            vec![
                ("s".into(), "0".into(), "s".into(), Word::empty()),
                ("s".into(), "1".into(), "s".into(), Word::parse("1 1")),
            ],
        )
        .unwrap();
        let only_zero = FiniteTransducer::new(
            "only0",
            vec!["s".into()],
            "s",
            &["s".to_string()],
            &[],
            a.clone(),
            a,
            vec![("s".into(), "0".into(), "s".into(), Word::parse("0"))],
        )
        .unwrap();
        let c = FiniteTransducer::compose(&doubler, &only_zero).unwrap();
        for w in Alphabet::binary().words_up_to(5) {
            let direct = c.transduce(&w).ok().map(|t| t.output);
            assert_eq!(direct, two_pass(&doubler, &only_zero, &w), "word {w}");
        }
    }

    #[test]
    fn language_equiv_reflexive_and_witnessing() {
        let d = even_ones();
        assert_eq!(FiniteTransducer::language_equiv(&d, &d).unwrap(), None);
        let w = FiniteTransducer::language_equiv(&even_ones(), &odd_ones())
            .unwrap()
            .expect("inequivalent");
        // Shortest witness: the empty word (start acceptance differs).
        assert_eq!(w, Word::empty());
    }

    #[test]
    fn accepting_exactly_builds_a_trie() {
        let a = Alphabet::binary();
        let words = vec![Word::empty(), Word::parse("0 1")];
        let t = FiniteTransducer::accepting_exactly("sample", a.clone(), &words);
        for w in a.words_up_to(3) {
            assert_eq!(t.accepts(&w).unwrap(), words.contains(&w), "word {w}");
        }
    }
}
