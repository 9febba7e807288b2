//! Small machines shared across unit tests.

use crate::alphabet::{Alphabet, Word};
use crate::transducer::FiniteTransducer;

/// Letter-to-letter transducer emitting each binary symbol unchanged.
pub fn identity() -> FiniteTransducer {
    let a = Alphabet::binary();
    FiniteTransducer::new(
        "identity",
        vec!["s".into()],
        "s",
        &["s".to_string()],
        &[],
        a.clone(),
        a,
        vec![
            ("s".into(), "0".into(), "s".into(), Word::parse("0")),
            ("s".into(), "1".into(), "s".into(), Word::parse("1")),
        ],
    )
    .unwrap()
}

/// Letter-to-letter transducer swapping 0 and 1.
pub fn bit_flip() -> FiniteTransducer {
    let a = Alphabet::binary();
    FiniteTransducer::new(
        "bitflip",
        vec!["s".into()],
        "s",
        &["s".to_string()],
        &[],
        a.clone(),
        a,
        vec![
            ("s".into(), "0".into(), "s".into(), Word::parse("1")),
            ("s".into(), "1".into(), "s".into(), Word::parse("0")),
        ],
    )
    .unwrap()
}

fn parity_acceptor(name: &str, accept_even: bool) -> FiniteTransducer {
    let a = Alphabet::binary();
    let accepting = if accept_even { "e" } else { "o" };
    FiniteTransducer::new(
        name,
        vec!["e".into(), "o".into()],
        "e",
        &[accepting.to_string()],
        &[],
        a.clone(),
        a,
        vec![
            ("e".into(), "0".into(), "e".into(), Word::empty()),
            ("e".into(), "1".into(), "o".into(), Word::empty()),
            ("o".into(), "0".into(), "o".into(), Word::empty()),
            ("o".into(), "1".into(), "e".into(), Word::empty()),
        ],
    )
    .unwrap()
    .into_acceptor()
}

/// Acceptor for binary words with an even number of 1s.
pub fn even_ones() -> FiniteTransducer {
    parity_acceptor("even1s", true)
}

/// Acceptor for binary words with an odd number of 1s.
pub fn odd_ones() -> FiniteTransducer {
    parity_acceptor("odd1s", false)
}

/// Population alphabet of the pair-crossing machine: live digits, crossed
/// digits, poison.
pub fn crossing_alphabet() -> Alphabet {
    Alphabet::new(["0", "1", "A", "B", "#"]).unwrap()
}

/// Shape-checking identity pass over `0* A* B* 1*`. Ends route-back when
/// live 0s outnumber live 1s; poisons (emits `#`) on malformed shapes and
/// on live 1s with no live 0 to match.
pub fn probe_level() -> FiniteTransducer {
    let a = crossing_alphabet();
    let t = |from: &str, sym: &str, to: &str, out: &str| {
        (
            from.to_string(),
            sym.to_string(),
            to.to_string(),
            Word::parse(out),
        )
    };
    let mut d = vec![
        // q0: nothing live seen yet.
        t("q0", "0", "q1", "0"),
        t("q0", "A", "q2", "A"),
        t("q0", "B", "pp", "#"),
        t("q0", "1", "pp", "#"),
        t("q0", "#", "pp", "#"),
        // q1: inside the live-0 block.
        t("q1", "0", "q1", "0"),
        t("q1", "A", "q2a", "A"),
        t("q1", "1", "q4", "1"),
        t("q1", "B", "pp", "#"),
        t("q1", "#", "pp", "#"),
        // q2: crossed block with no live 0s.
        t("q2", "A", "q2", "A"),
        t("q2", "B", "q5", "B"),
        t("q2", "0", "pp", "#"),
        t("q2", "1", "pp", "#"),
        t("q2", "#", "pp", "#"),
        // q2a: live 0s then crossed As.
        t("q2a", "A", "q2a", "A"),
        t("q2a", "B", "q6", "B"),
        t("q2a", "0", "pp", "#"),
        t("q2a", "1", "pp", "#"),
        t("q2a", "#", "pp", "#"),
        // q5: Bs with no live 0 before them; a live 1 here is unmatched.
        t("q5", "B", "q5", "B"),
        t("q5", "1", "pp", "#"),
        t("q5", "0", "pp", "#"),
        t("q5", "A", "pp", "#"),
        t("q5", "#", "pp", "#"),
        // q6: live 0s, As, Bs; a live 1 completes a crossable pair.
        t("q6", "B", "q6", "B"),
        t("q6", "1", "q4", "1"),
        t("q6", "0", "pp", "#"),
        t("q6", "A", "pp", "#"),
        t("q6", "#", "pp", "#"),
        // q4: crossable; copy the live-1 tail.
        t("q4", "1", "q4", "1"),
        t("q4", "0", "pp", "#"),
        t("q4", "A", "pp", "#"),
        t("q4", "B", "pp", "#"),
        t("q4", "#", "pp", "#"),
    ];
    for sym in ["0", "1", "A", "B", "#"] {
        d.push(t("pp", sym, "pp", sym));
    }
    FiniteTransducer::new(
        "probe",
        ["q0", "q1", "q2", "q2a", "q4", "q5", "q6", "pp"]
            .map(String::from)
            .to_vec(),
        "q0",
        &[],
        &["q1".to_string(), "q6".to_string()],
        a.clone(),
        a,
        d,
    )
    .unwrap()
}

/// Crossing pass: turns the last live 0 into `A` and the first live 1 into
/// `B`, holding the candidate 0 in state until the matching 1 is certain.
/// Ends route-back after a successful cross.
pub fn cross_level() -> FiniteTransducer {
    let a = crossing_alphabet();
    let t = |from: &str, sym: &str, to: &str, out: &str| {
        (
            from.to_string(),
            sym.to_string(),
            to.to_string(),
            Word::parse(out),
        )
    };
    let mut d = vec![
        t("r0", "0", "r1", "-"),
        t("r0", "A", "sp", "#"),
        t("r0", "B", "sp", "#"),
        t("r0", "1", "sp", "#"),
        t("r0", "#", "sp", "#"),
        // r1 holds one live 0 unemitted; rolling keeps the last one held.
        t("r1", "0", "r1", "0"),
        t("r1", "A", "r2", "A A"),
        t("r1", "1", "r3", "A B"),
        t("r1", "B", "sp", "#"),
        t("r1", "#", "sp", "#"),
        t("r2", "A", "r2", "A"),
        t("r2", "B", "r2b", "B"),
        t("r2", "0", "sp", "#"),
        t("r2", "1", "sp", "#"),
        t("r2", "#", "sp", "#"),
        t("r2b", "B", "r2b", "B"),
        t("r2b", "1", "r3", "B"),
        t("r2b", "0", "sp", "#"),
        t("r2b", "A", "sp", "#"),
        t("r2b", "#", "sp", "#"),
        t("r3", "1", "r3", "1"),
        t("r3", "0", "sp", "#"),
        t("r3", "A", "sp", "#"),
        t("r3", "B", "sp", "#"),
        t("r3", "#", "sp", "#"),
    ];
    for sym in ["0", "1", "A", "B", "#"] {
        d.push(t("sp", sym, "sp", sym));
    }
    FiniteTransducer::new(
        "cross",
        ["r0", "r1", "r2", "r2b", "r3", "sp"].map(String::from).to_vec(),
        "r0",
        &[],
        &["r3".to_string()],
        a.clone(),
        a,
        d,
    )
    .unwrap()
}

/// Acceptor for fully crossed words `{A, B}*` over the crossing alphabet.
pub fn all_crossed_acceptor() -> FiniteTransducer {
    let a = crossing_alphabet();
    let mut d = Vec::new();
    for sym in ["A", "B"] {
        d.push((
            "ok".to_string(),
            sym.to_string(),
            "ok".to_string(),
            Word::empty(),
        ));
    }
    for sym in ["0", "1", "#"] {
        d.push((
            "ok".to_string(),
            sym.to_string(),
            "no".to_string(),
            Word::empty(),
        ));
    }
    for sym in ["0", "1", "A", "B", "#"] {
        d.push((
            "no".to_string(),
            sym.to_string(),
            "no".to_string(),
            Word::empty(),
        ));
    }
    FiniteTransducer::new(
        "allcrossed",
        vec!["ok".into(), "no".into()],
        "ok",
        &["ok".to_string()],
        &[],
        a.clone(),
        a,
        d,
    )
    .unwrap()
    .into_acceptor()
}

/// The pair-matching machine: a general period-2 machine accepting exactly
/// the words `0^n 1^n` (a probe pass bounces back to a crossing pass until
/// the word is fully crossed or rejected).
pub fn match_count_machine() -> crate::runtime::EvolutionaryMachine {
    use crate::runtime::*;
    EvolutionaryMachine::new(
        "match-count",
        Flavor::General,
        LevelSchedule::Periodic(vec![
            LevelAutomaton::Fa(probe_level()),
            LevelAutomaton::Fa(cross_level()),
        ]),
        SearchCondition::AcceptedBy(all_crossed_acceptor()),
        Mode::Terminal,
        Budgets {
            max_generations: 300,
            ..Budgets::default()
        },
    )
    .unwrap()
}

/// Duplicating transducer: each symbol emits twice.
pub fn duplicator() -> FiniteTransducer {
    let a = Alphabet::binary();
    FiniteTransducer::new(
        "dup",
        vec!["s".into()],
        "s",
        &["s".to_string()],
        &[],
        a.clone(),
        a,
        vec![
            ("s".into(), "0".into(), "s".into(), Word::parse("0 0")),
            ("s".into(), "1".into(), "s".into(), Word::parse("1 1")),
        ],
    )
    .unwrap()
}

/// Keeps symbols at even positions, drops the rest.
pub fn drop_odd() -> FiniteTransducer {
    let a = Alphabet::binary();
    FiniteTransducer::new(
        "dropodd",
        vec!["keep".into(), "skip".into()],
        "keep",
        &["keep".to_string()],
        &[],
        a.clone(),
        a,
        vec![
            ("keep".into(), "0".into(), "skip".into(), Word::parse("0")),
            ("keep".into(), "1".into(), "skip".into(), Word::parse("1")),
            ("skip".into(), "0".into(), "keep".into(), Word::empty()),
            ("skip".into(), "1".into(), "keep".into(), Word::empty()),
        ],
    )
    .unwrap()
}

/// Identity transducer whose only state is tagged route-back.
pub fn back_identity() -> FiniteTransducer {
    let a = Alphabet::binary();
    FiniteTransducer::new(
        "backid",
        vec!["s".into()],
        "s",
        &["s".to_string()],
        &["s".to_string()],
        a.clone(),
        a,
        vec![
            ("s".into(), "0".into(), "s".into(), Word::parse("0")),
            ("s".into(), "1".into(), "s".into(), Word::parse("1")),
        ],
    )
    .unwrap()
}

/// Transducer promoting the first 0 to a 1 and copying the rest.
pub fn promote_first_zero() -> FiniteTransducer {
    let a = Alphabet::binary();
    FiniteTransducer::new(
        "onemax-step",
        vec!["h".into(), "c".into()],
        "h",
        &["h".to_string(), "c".to_string()],
        &[],
        a.clone(),
        a,
        vec![
            ("h".into(), "0".into(), "c".into(), Word::parse("1")),
            ("h".into(), "1".into(), "h".into(), Word::parse("1")),
            ("c".into(), "0".into(), "c".into(), Word::parse("0")),
            ("c".into(), "1".into(), "c".into(), Word::parse("1")),
        ],
    )
    .unwrap()
}
