//! Nondeterministic finite acceptors and the subset construction.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::alphabet::{Alphabet, Word};
use crate::transducer::{DefinitionError, FiniteTransducer, RunError};

/// A nondeterministic finite acceptor (no outputs, no ε-moves).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nfa {
    name: String,
    states: Vec<String>,
    start: BTreeSet<usize>,
    accepting: BTreeSet<usize>,
    alphabet: Alphabet,
    transitions: BTreeMap<(usize, usize), BTreeSet<usize>>,
}

impl Nfa {
    pub fn new(
        name: impl Into<String>,
        states: Vec<String>,
        start: &[String],
        accepting: &[String],
        alphabet: Alphabet,
        transitions: Vec<(String, String, Vec<String>)>,
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
        let mut start_set = BTreeSet::new();
        for s in start {
            start_set.insert(resolve(s)?);
        }
        if start_set.is_empty() {
            return Err(DefinitionError::Other {
                machine: name.clone(),
                violation: "start set must be non-empty".into(),
            });
        }
        let mut accepting_set = BTreeSet::new();
        for s in accepting {
            accepting_set.insert(resolve(s)?);
        }
        let mut trans: BTreeMap<(usize, usize), BTreeSet<usize>> = BTreeMap::new();
        for (from, sym, targets) in transitions {
            let from_ix = resolve(&from)?;
            let sym_ix = alphabet
                .position(&sym)
                .ok_or_else(|| DefinitionError::UnknownSymbol {
                    machine: name.clone(),
                    symbol: sym.clone(),
                    role: "input",
                })?;
            let entry = trans.entry((from_ix, sym_ix)).or_default();
            for t in targets {
                entry.insert(resolve(&t)?);
            }
        }
        Ok(Nfa {
            name,
            states,
            start: start_set,
            accepting: accepting_set,
            alphabet,
            transitions: trans,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn start_states(&self) -> impl Iterator<Item = &str> {
        self.start.iter().map(|&i| self.states[i].as_str())
    }

    pub fn accepting_states(&self) -> impl Iterator<Item = &str> {
        self.accepting.iter().map(|&i| self.states[i].as_str())
    }

    /// Transitions as (from, symbol, targets) in key order.
    pub fn transitions(&self) -> impl Iterator<Item = (&str, &str, Vec<&str>)> {
        self.transitions.iter().map(|(&(from, sym), targets)| {
            (
                self.states[from].as_str(),
                self.alphabet.symbol(sym).expect("symbol in range"),
                targets.iter().map(|&t| self.states[t].as_str()).collect(),
            )
        })
    }

    fn step_set(&self, from: &BTreeSet<usize>, sym_ix: usize) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for &s in from {
            if let Some(targets) = self.transitions.get(&(s, sym_ix)) {
                out.extend(targets.iter().copied());
            }
        }
        out
    }

    /// True iff some run on `word` ends in an accepting state.
    pub fn accepts(&self, word: &Word) -> Result<bool, RunError> {
        let mut current = self.start.clone();
        for (pos, sym) in word.symbols().iter().enumerate() {
            let sym_ix = self.alphabet.position(sym).ok_or_else(|| {
                RunError::SymbolNotInAlphabet {
                    symbol: sym.clone(),
                    position: pos,
                }
            })?;
            current = self.step_set(&current, sym_ix);
            if current.is_empty() {
                return Ok(false);
            }
        }
        Ok(current.iter().any(|s| self.accepting.contains(s)))
    }

    /// Subset construction. Only subsets reachable from the start set are
    /// materialized; the resulting acceptor is total (the empty subset is the
    /// dead state) and accepts exactly the same language.
    pub fn to_dfa(&self) -> FiniteTransducer {
        let subset_name = |set: &BTreeSet<usize>| {
            if set.is_empty() {
                "{}".to_string()
            } else {
                let names: Vec<&str> = set.iter().map(|&i| self.states[i].as_str()).collect();
                format!("{{{}}}", names.join("+"))
            }
        };
        let mut order: Vec<BTreeSet<usize>> = vec![self.start.clone()];
        let mut seen: BTreeSet<BTreeSet<usize>> = BTreeSet::from([self.start.clone()]);
        let mut queue = VecDeque::from([self.start.clone()]);
        let mut transitions: Vec<(String, String, String, Word)> = Vec::new();
        while let Some(set) = queue.pop_front() {
            for sym_ix in 0..self.alphabet.len() {
                let target = self.step_set(&set, sym_ix);
                if seen.insert(target.clone()) {
                    order.push(target.clone());
                    queue.push_back(target.clone());
                }
                transitions.push((
                    subset_name(&set),
                    self.alphabet.symbol(sym_ix).expect("in range").to_string(),
                    subset_name(&target),
                    Word::empty(),
                ));
            }
        }
        let states: Vec<String> = order.iter().map(|s| subset_name(s)).collect();
        let accepting: Vec<String> = order
            .iter()
            .filter(|set| set.iter().any(|s| self.accepting.contains(s)))
            .map(|s| subset_name(s))
            .collect();
        FiniteTransducer::new(
            format!("{}.det", self.name),
            states,
            &subset_name(&self.start),
            &accepting,
            &[],
            self.alphabet.clone(),
            self.alphabet.clone(),
            transitions,
        )
        .expect("subset construction is well-formed")
        .into_acceptor()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// NFA accepting binary words whose third symbol from the end is 1.
    fn third_from_end() -> Nfa {
        let a = Alphabet::binary();
        Nfa::new(
            "third1",
            vec!["p".into(), "q".into(), "r".into(), "s".into()],
            &["p".to_string()],
            &["s".to_string()],
            a,
            vec![
                ("p".into(), "0".into(), vec!["p".into()]),
                ("p".into(), "1".into(), vec!["p".into(), "q".into()]),
                ("q".into(), "0".into(), vec!["r".into()]),
                ("q".into(), "1".into(), vec!["r".into()]),
                ("r".into(), "0".into(), vec!["s".into()]),
                ("r".into(), "1".into(), vec!["s".into()]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn nfa_accepts_some_run() {
        let n = third_from_end();
        assert!(n.accepts(&Word::parse("1 0 0")).unwrap());
        assert!(n.accepts(&Word::parse("0 1 1 1 0 1 0 0")).unwrap());
        assert!(!n.accepts(&Word::parse("0 0 0")).unwrap());
        assert!(!n.accepts(&Word::empty()).unwrap());
    }

    #[test]
    fn subset_construction_reaches_eight_states() {
        // Hand-run of the subset construction: states track the last three
        // symbols, so 2^3 subsets are reachable from the start.
        let d = third_from_end().to_dfa();
        assert_eq!(d.state_count(), 8);
    }

    #[test]
    fn determinization_preserves_language_up_to_10() {
        let n = third_from_end();
        let d = n.to_dfa();
        for w in Alphabet::binary().words_up_to(10) {
            assert_eq!(n.accepts(&w).unwrap(), d.accepts(&w).unwrap(), "word {w}");
        }
    }

    #[test]
    fn already_deterministic_nfa_keeps_reachable_state_count() {
        let a = Alphabet::binary();
        let n = Nfa::new(
            "det",
            vec!["e".into(), "o".into()],
            &["e".to_string()],
            &["e".to_string()],
            a,
            vec![
                ("e".into(), "0".into(), vec!["e".into()]),
                ("e".into(), "1".into(), vec!["o".into()]),
                ("o".into(), "0".into(), vec!["o".into()]),
                ("o".into(), "1".into(), vec!["e".into()]),
            ],
        )
        .unwrap();
        assert_eq!(n.to_dfa().state_count(), 2);
    }
}
