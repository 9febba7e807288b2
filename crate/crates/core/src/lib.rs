//! Evolutionary machines over pluggable level-automaton classes.
//!
//! An evolutionary machine is a sequence of *level automata*, each of which
//! transforms one generation (a finite word over a population alphabet) into
//! the next. This crate provides:
//!
//! * the level-automaton classes themselves — finite acceptors and
//!   transducers ([`FiniteTransducer`], [`Nfa`]), single-tape Turing machines
//!   ([`TuringMachine`]), inductive Turing machines with a write-only output
//!   tape ([`InductiveTuringMachine`]), and one-dimensional cellular automata
//!   ([`CellularAutomaton1D`]);
//! * the machine runtime ([`runtime`]): basic (forward-only) and general
//!   (bidirectionally routed) machines, level schedules, search conditions,
//!   the eight execution modes, budgets and full run traces;
//! * constructive transformations ([`construct`]): selector-dispatched
//!   parallel composition, general-to-basic conversion, periodic collapse,
//!   pipeline flattening, and compilation of periodic machines to cellular
//!   automata;
//! * equivalence checking ([`equiv`]): exact DFA language equivalence and
//!   bounded functional/linguistic comparison of anything runnable;
//! * a seeded genetic-algorithm demo ([`demo`]) packaged as an evolutionary
//!   machine level, plus NAND-network training in the style of Turing's
//!   unorganized machines;
//! * a line-oriented machine-definition text format ([`format`]) with
//!   round-trip parse/emit.
//!
//! Machine definitions are immutable once constructed and safe to share
//! across threads; every run owns its own mutable state.

pub mod alphabet;
#[cfg(test)]
pub(crate) mod testutil;
pub mod ca;
pub mod construct;
pub mod demo;
pub mod equiv;
pub mod format;
pub mod nfa;
pub mod runtime;
pub mod tm;
pub mod transducer;

pub use alphabet::{Alphabet, Word};
pub use ca::{CaConfiguration, CellularAutomaton1D};
pub use nfa::Nfa;
pub use runtime::{
    Budgets, EvolutionaryMachine, Flavor, Generation, LevelAutomaton, LevelSchedule, Mode,
    Outcome, RunResult, RunTrace, SearchCondition, TraceRecord,
};
pub use tm::{InductiveTuringMachine, ItmOutcome, Move, TmOutcome, TuringMachine};
pub use transducer::FiniteTransducer;
