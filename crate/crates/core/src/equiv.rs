//! Functional and linguistic equivalence checking.
//!
//! Two machines are functionally equivalent when they map every input to the
//! same output, and linguistically equivalent when they accept the same
//! language. For deterministic finite acceptors language equality is decided
//! exactly; for everything else (transducers, machines with tapes, whole
//! evolutionary machines) the checkers enumerate all words up to a length
//! bound in length-lexicographic order, so a reported witness is the
//! canonical shortest one.
//!
//! Runs that exhaust a budget compare as a distinguished "undecided" token
//! rather than failing the whole verdict: a verdict is `Undecided` only when
//! no completed comparison disagrees. Run errors (an undefined transition,
//! say) compare as their own token too, so two machines that are undefined
//! on the same words still count as agreeing there.

use std::collections::BTreeSet;

use crate::alphabet::{Alphabet, Word};
use crate::construct::DispatchMachine;
use crate::runtime::{EvolutionaryMachine, Outcome, RunError};
use crate::tm::{TmOutcome, TuringMachine};
use crate::transducer::FiniteTransducer;

/// How far a verdict reaches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scope {
    Exact,
    Bounded { max_len: usize },
}

/// Result of an equivalence check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EquivVerdict {
    Equivalent {
        scope: Scope,
    },
    Inequivalent {
        witness: Word,
        lhs: BehaviorOutcome,
        rhs: BehaviorOutcome,
    },
    /// Every completed comparison agreed, but some runs exhausted budgets.
    Undecided {
        reason: String,
    },
}

impl EquivVerdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, EquivVerdict::Equivalent { .. })
    }
}

/// What one machine did on one word, as compared by the checkers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BehaviorOutcome {
    Output(Word),
    Accepts(bool),
    /// The run was undefined on this word (partial transition map).
    Undefined,
    /// A budget ran out before the run resolved.
    Undecided,
}

impl std::fmt::Display for BehaviorOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BehaviorOutcome::Output(w) => write!(f, "output {w}"),
            BehaviorOutcome::Accepts(true) => write!(f, "accept"),
            BehaviorOutcome::Accepts(false) => write!(f, "reject"),
            BehaviorOutcome::Undefined => write!(f, "undefined"),
            BehaviorOutcome::Undecided => write!(f, "undecided"),
        }
    }
}

/// Anything whose word-level behavior can be compared.
#[derive(Debug, Clone)]
pub enum Subject {
    Fa(FiniteTransducer),
    Dispatch(DispatchMachine),
    Tm { machine: TuringMachine, max_steps: u64 },
    Em(EvolutionaryMachine),
}

impl Subject {
    pub fn input_alphabet(&self) -> Result<Alphabet, RunError> {
        match self {
            Subject::Fa(t) => Ok(t.input_alphabet().clone()),
            Subject::Dispatch(d) => Ok(d.input_alphabet().clone()),
            Subject::Tm { machine, .. } => Ok(machine.input_alphabet().clone()),
            Subject::Em(m) => {
                let level = m
                    .schedule()
                    .level_at(0)?
                    .ok_or_else(|| RunError::Schedule("empty schedule".into()))?;
                match level {
                    crate::runtime::LevelAutomaton::Fa(t) => Ok(t.input_alphabet().clone()),
                    crate::runtime::LevelAutomaton::Dispatch(d) => Ok(d.input_alphabet().clone()),
                    crate::runtime::LevelAutomaton::Tm(t) => Ok(t.input_alphabet().clone()),
                    crate::runtime::LevelAutomaton::Itm(t) => {
                        Ok(t.base().input_alphabet().clone())
                    }
                    crate::runtime::LevelAutomaton::Ga(_) => {
                        Ok(crate::demo::ga::Population::alphabet())
                    }
                }
            }
        }
    }

    /// The input-to-output behavior on one word.
    pub fn functional(&self, w: &Word) -> BehaviorOutcome {
        match self {
            Subject::Fa(t) => match t.transduce(w) {
                Ok(run) => BehaviorOutcome::Output(run.output),
                Err(_) => BehaviorOutcome::Undefined,
            },
            Subject::Dispatch(d) => match d.transduce(w) {
                Ok(run) => BehaviorOutcome::Output(run.output),
                Err(_) => BehaviorOutcome::Undefined,
            },
            Subject::Tm { machine, max_steps } => match machine.run(w, *max_steps) {
                Ok(TmOutcome::Halted { tape, .. }) => BehaviorOutcome::Output(tape),
                Ok(TmOutcome::BudgetExhausted { .. }) => BehaviorOutcome::Undecided,
                Err(_) => BehaviorOutcome::Undefined,
            },
            Subject::Em(m) => match m.run(w.clone()) {
                Ok(result) => match result.outcome {
                    // A terminal result and an exhausted pipeline both
                    // deliver their final population as the output.
                    Outcome::Satisfied { z } => BehaviorOutcome::Output(z.payload),
                    Outcome::ScheduleExhausted { last } => BehaviorOutcome::Output(last.payload),
                    Outcome::Stabilized { generation, .. } => {
                        BehaviorOutcome::Output(generation.payload)
                    }
                    Outcome::BudgetExhausted { .. } => BehaviorOutcome::Undecided,
                },
                Err(_) => BehaviorOutcome::Undefined,
            },
        }
    }

    /// The accept/reject behavior on one word.
    pub fn linguistic(&self, w: &Word) -> BehaviorOutcome {
        match self {
            Subject::Fa(t) => match t.accepts(w) {
                Ok(b) => BehaviorOutcome::Accepts(b),
                Err(_) => BehaviorOutcome::Undefined,
            },
            Subject::Dispatch(d) => match d.accepts(w) {
                Ok(b) => BehaviorOutcome::Accepts(b),
                Err(_) => BehaviorOutcome::Undefined,
            },
            Subject::Tm { machine, max_steps } => match machine.run(w, *max_steps) {
                Ok(TmOutcome::Halted { accept, .. }) => BehaviorOutcome::Accepts(accept),
                Ok(TmOutcome::BudgetExhausted { .. }) => BehaviorOutcome::Undecided,
                Err(_) => BehaviorOutcome::Undefined,
            },
            // An evolutionary machine accepts the words whose run satisfies
            // its search condition.
            Subject::Em(m) => match m.run(w.clone()) {
                Ok(result) => match result.outcome {
                    Outcome::Satisfied { .. } => BehaviorOutcome::Accepts(true),
                    Outcome::ScheduleExhausted { .. } | Outcome::Stabilized { .. } => {
                        BehaviorOutcome::Accepts(false)
                    }
                    Outcome::BudgetExhausted { .. } => BehaviorOutcome::Undecided,
                },
                Err(_) => BehaviorOutcome::Accepts(false),
            },
        }
    }
}

fn bounded_compare(
    m1: &Subject,
    m2: &Subject,
    alphabet: &Alphabet,
    max_len: usize,
    observe: impl Fn(&Subject, &Word) -> BehaviorOutcome,
) -> Result<EquivVerdict, RunError> {
    let a1 = m1.input_alphabet()?;
    let a2 = m2.input_alphabet()?;
    for sym in alphabet.symbols() {
        if !a1.contains(sym) || !a2.contains(sym) {
            return Err(RunError::AlphabetMismatch(format!(
                "symbol `{sym}` is not accepted by both machines"
            )));
        }
    }
    let mut undecided = 0usize;
    for w in alphabet.words_up_to(max_len) {
        let lhs = observe(m1, &w);
        let rhs = observe(m2, &w);
        if lhs == BehaviorOutcome::Undecided || rhs == BehaviorOutcome::Undecided {
            undecided += 1;
            continue;
        }
        if lhs != rhs {
            return Ok(EquivVerdict::Inequivalent {
                witness: w,
                lhs,
                rhs,
            });
        }
    }
    if undecided > 0 {
        Ok(EquivVerdict::Undecided {
            reason: format!("{undecided} runs exhausted their budgets; the rest agree"),
        })
    } else {
        Ok(EquivVerdict::Equivalent {
            scope: Scope::Bounded { max_len },
        })
    }
}

/// Compares input-to-output behavior on all words of length `<= max_len`.
pub fn functional_equiv_bounded(
    m1: &Subject,
    m2: &Subject,
    alphabet: &Alphabet,
    max_len: usize,
) -> Result<EquivVerdict, RunError> {
    bounded_compare(m1, m2, alphabet, max_len, |m, w| m.functional(w))
}

/// Compares accept/reject behavior on all words of length `<= max_len`.
pub fn linguistic_equiv_bounded(
    m1: &Subject,
    m2: &Subject,
    alphabet: &Alphabet,
    max_len: usize,
) -> Result<EquivVerdict, RunError> {
    bounded_compare(m1, m2, alphabet, max_len, |m, w| m.linguistic(w))
}

/// Exact language equivalence of deterministic acceptors, via synchronized
/// product reachability.
pub fn dfa_language_equiv_exact(
    a: &FiniteTransducer,
    b: &FiniteTransducer,
) -> Result<EquivVerdict, RunError> {
    match FiniteTransducer::language_equiv(a, b)? {
        None => Ok(EquivVerdict::Equivalent { scope: Scope::Exact }),
        Some(witness) => {
            let lhs = BehaviorOutcome::Accepts(a.accepts(&witness)?);
            let rhs = BehaviorOutcome::Accepts(b.accepts(&witness)?);
            Ok(EquivVerdict::Inequivalent { witness, lhs, rhs })
        }
    }
}

/// The accepted and undecided words of length `<= max_len`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LanguageSample {
    pub accepted: Vec<Word>,
    pub undecided: Vec<Word>,
    pub max_len: usize,
}

impl LanguageSample {
    pub fn accepted_set(&self) -> BTreeSet<Word> {
        self.accepted.iter().cloned().collect()
    }
}

/// Enumerates all words up to `max_len` and classifies each as accepted,
/// rejected, or undecided (budget ran out).
pub fn accepted_language_sample(
    m: &Subject,
    alphabet: &Alphabet,
    max_len: usize,
) -> Result<LanguageSample, RunError> {
    let mut accepted = Vec::new();
    let mut undecided = Vec::new();
    for w in alphabet.words_up_to(max_len) {
        match m.linguistic(&w) {
            BehaviorOutcome::Accepts(true) => accepted.push(w),
            BehaviorOutcome::Accepts(false) | BehaviorOutcome::Undefined => {}
            BehaviorOutcome::Undecided => undecided.push(w),
            BehaviorOutcome::Output(_) => unreachable!("linguistic observation"),
        }
    }
    Ok(LanguageSample {
        accepted,
        undecided,
        max_len,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{bit_flip, even_ones, identity, match_count_machine, odd_ones};

    #[test]
    fn reflexivity_bounded() {
        let m = Subject::Fa(identity());
        let v = functional_equiv_bounded(&m, &m, &Alphabet::binary(), 4).unwrap();
        assert_eq!(
            v,
            EquivVerdict::Equivalent {
                scope: Scope::Bounded { max_len: 4 }
            }
        );
    }

    #[test]
    fn identity_vs_flip_witness_is_length_one() {
        let v = functional_equiv_bounded(
            &Subject::Fa(identity()),
            &Subject::Fa(bit_flip()),
            &Alphabet::binary(),
            3,
        )
        .unwrap();
        match v {
            EquivVerdict::Inequivalent { witness, .. } => {
                assert_eq!(witness, Word::parse("0"), "length-lex least witness");
            }
            other => panic!("expected inequivalence, got {other:?}"),
        }
    }

    #[test]
    fn parity_acceptors_differ_on_the_empty_word() {
        let v = linguistic_equiv_bounded(
            &Subject::Fa(even_ones()),
            &Subject::Fa(odd_ones()),
            &Alphabet::binary(),
            3,
        )
        .unwrap();
        match v {
            EquivVerdict::Inequivalent { witness, lhs, rhs } => {
                assert_eq!(witness, Word::empty());
                assert_eq!(lhs, BehaviorOutcome::Accepts(true));
                assert_eq!(rhs, BehaviorOutcome::Accepts(false));
            }
            other => panic!("expected inequivalence, got {other:?}"),
        }
    }

    #[test]
    fn exact_equivalence_of_bloated_acceptor() {
        // Same parity language with a redundant extra state.
        let a = Alphabet::binary();
        let bloated = FiniteTransducer::new(
            "bloated",
            vec!["e".into(), "o".into(), "e2".into()],
            "e",
            &["e".to_string(), "e2".to_string()],
            &[],
            a.clone(),
            a,
            vec![
                ("e".into(), "0".into(), "e2".into(), Word::empty()),
                ("e".into(), "1".into(), "o".into(), Word::empty()),
                ("e2".into(), "0".into(), "e".into(), Word::empty()),
                ("e2".into(), "1".into(), "o".into(), Word::empty()),
                ("o".into(), "0".into(), "o".into(), Word::empty()),
                ("o".into(), "1".into(), "e".into(), Word::empty()),
            ],
        )
        .unwrap()
        .into_acceptor();
        let v = dfa_language_equiv_exact(&even_ones(), &bloated).unwrap();
        assert_eq!(v, EquivVerdict::Equivalent { scope: Scope::Exact });
    }

    #[test]
    fn witnesses_replay_the_disagreement() {
        let a = Subject::Fa(even_ones());
        let b = Subject::Fa(odd_ones());
        if let EquivVerdict::Inequivalent { witness, lhs, rhs } =
            linguistic_equiv_bounded(&a, &b, &Alphabet::binary(), 4).unwrap()
        {
            assert_eq!(a.linguistic(&witness), lhs);
            assert_eq!(b.linguistic(&witness), rhs);
            assert_ne!(lhs, rhs);
        } else {
            panic!("expected a witness");
        }
    }

    #[test]
    fn functional_agreement_implies_linguistic_agreement_on_acceptors() {
        // Identical transducers with identical accepting sets.
        let pairs = [
            (Subject::Fa(even_ones()), Subject::Fa(even_ones())),
            (Subject::Fa(identity()), Subject::Fa(identity())),
        ];
        for (a, b) in &pairs {
            let f = functional_equiv_bounded(a, b, &Alphabet::binary(), 4).unwrap();
            if f.is_equivalent() {
                let l = linguistic_equiv_bounded(a, b, &Alphabet::binary(), 4).unwrap();
                assert!(l.is_equivalent());
            }
        }
    }

    #[test]
    fn machine_language_sample_lists_budget_exhaustion_separately() {
        let m = Subject::Em(match_count_machine());
        let sample = accepted_language_sample(&m, &Alphabet::binary(), 4).unwrap();
        assert_eq!(
            sample.accepted,
            vec![Word::empty(), Word::parse("0 1"), Word::parse("0 0 1 1")]
        );
        // Surplus-zero words cycle until the budget ends.
        assert!(sample.undecided.contains(&Word::parse("0")));
    }

    #[test]
    fn accept_nothing_machine_has_empty_sample() {
        let a = Alphabet::binary();
        let none = FiniteTransducer::new(
            "none",
            vec!["s".into()],
            "s",
            &[],
            &[],
            a.clone(),
            a.clone(),
            vec![
                ("s".into(), "0".into(), "s".into(), Word::empty()),
                ("s".into(), "1".into(), "s".into(), Word::empty()),
            ],
        )
        .unwrap()
        .into_acceptor();
        let sample = accepted_language_sample(&Subject::Fa(none), &a, 3).unwrap();
        assert!(sample.accepted.is_empty());
        assert!(sample.undecided.is_empty());
    }

    #[test]
    fn even_ones_sample_up_to_two() {
        let sample =
            accepted_language_sample(&Subject::Fa(even_ones()), &Alphabet::binary(), 2).unwrap();
        let shown: Vec<String> = sample.accepted.iter().map(Word::to_string).collect();
        assert_eq!(shown, ["-", "0", "0 0", "1 1"]);
    }
}
