//! Checks over the shipped machine corpus: every file round-trips through
//! the text format, and the documented behavior of each fixture holds.

use std::fs;
use std::path::PathBuf;

use evoma_core::alphabet::{Alphabet, Word};
use evoma_core::equiv::{accepted_language_sample, Subject};
use evoma_core::format::{AutomatonDef, Document};
use evoma_core::runtime::{Budgets, Generation, LevelAutomaton, LevelClass, Outcome};
use evoma_core::tm::ItmOutcome;

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn load(name: &str) -> Document {
    let path = corpus_dir().join(name);
    let text = fs::read_to_string(&path).unwrap_or_else(|e| panic!("reading {path:?}: {e}"));
    Document::parse(&text).unwrap_or_else(|e| panic!("parsing {name}: {e}"))
}

#[test]
fn every_corpus_document_round_trips() {
    let mut seen = 0;
    for entry in fs::read_dir(corpus_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("evm") {
            continue;
        }
        seen += 1;
        let text = fs::read_to_string(&path).unwrap();
        let doc = Document::parse(&text).unwrap_or_else(|e| panic!("{path:?}: {e}"));
        let emitted = doc.emit();
        let back = Document::parse(&emitted).unwrap_or_else(|e| panic!("reparse {path:?}: {e}"));
        assert_eq!(back, doc, "parse(emit(m)) == m for {path:?}");
        assert_eq!(back.emit(), emitted, "emit is a fixed point for {path:?}");
    }
    assert!(seen >= 15, "corpus should not shrink silently (saw {seen})");
}

#[test]
fn onemax_step_fixture_is_letter_to_letter() {
    let doc = load("onemax-step.evm");
    let Some(AutomatonDef::Transducer(t)) = doc.automaton("onemax-step") else {
        panic!("expected the transducer");
    };
    assert!(t.is_letter_to_letter());
    assert_eq!(
        t.transduce(&Word::parse("0 0 1")).unwrap().output,
        Word::parse("1 0 1")
    );
}

#[test]
fn match_count_accepts_exactly_the_balanced_words() {
    let m = load("match-count.evm").the_machine().unwrap();
    for w in Alphabet::binary().words_up_to(6) {
        let n = w.len() / 2;
        let balanced = w.len() % 2 == 0
            && w.symbols()[..n].iter().all(|s| s == "0")
            && w.symbols()[n..].iter().all(|s| s == "1");
        let r = m.run(w.clone()).unwrap();
        assert_eq!(
            matches!(r.outcome, Outcome::Satisfied { .. }),
            balanced,
            "word {w}"
        );
    }
}

#[test]
fn countdown_satisfies_at_the_derived_step_count() {
    // Hand-simulated orbit: n decrements interleaved with n - 1 checks.
    let m = load("countdown.evm").the_machine().unwrap();
    for n in 1usize..=6 {
        let w = Word::new(vec!["1".to_string(); n]);
        let r = m.run(w).unwrap();
        match r.outcome {
            Outcome::Satisfied { z } => {
                assert_eq!(z.index, (2 * n - 1) as u64, "unary length {n}");
                assert!(z.payload.is_empty());
            }
            other => panic!("expected satisfaction for 1^{n}, got {other:?}"),
        }
    }
}

#[test]
fn bouncer_cursor_path_alternates() {
    let m = load("bouncer.evm").the_machine().unwrap();
    let r = m.run(Word::parse("0 1")).unwrap();
    assert!(matches!(r.outcome, Outcome::BudgetExhausted { .. }));
    let cursors: Vec<u64> = r.trace.records().iter().map(|rec| rec.level).collect();
    assert_eq!(cursors, [0, 1, 0, 1, 0, 1, 0, 1, 0, 1]);
}

#[test]
fn compress_itm_computes_its_total_function() {
    let doc = load("compress.evm");
    let Some(AutomatonDef::Itm(itm)) = doc.automaton("compress") else {
        panic!("expected the itm");
    };
    for w in Alphabet::binary().words_up_to(4) {
        let ones = w.symbols().iter().filter(|s| *s == "1").count();
        let expected = Word::new(vec!["1".to_string(); ones]);
        match itm.run(&w, 10_000, 8).unwrap() {
            ItmOutcome::Stabilized { output, .. } => assert_eq!(output, expected, "word {w}"),
            other => panic!("expected stabilization on {w}, got {other:?}"),
        }
    }
}

#[test]
fn third_from_end_determinizes_to_eight_states() {
    let doc = load("third-from-end.evm");
    let Some(AutomatonDef::Nfa(n)) = doc.automaton("third1") else {
        panic!("expected the nfa");
    };
    let d = n.to_dfa();
    assert_eq!(d.state_count(), 8);
    for w in Alphabet::binary().words_up_to(10) {
        assert_eq!(n.accepts(&w).unwrap(), d.accepts(&w).unwrap(), "word {w}");
    }
}

#[test]
fn route_tm_level_signals_backward_on_a_leading_one() {
    let doc = load("route-tm.evm");
    let Some(AutomatonDef::Tm(tm)) = doc.automaton("route-on-one") else {
        panic!("expected the tm");
    };
    let level = LevelAutomaton::Tm(tm.clone());
    let budgets = Budgets::default();
    let fwd = evoma_core::runtime::level_apply(
        &level,
        &Generation {
            payload: Word::parse("0 1"),
            index: 0,
        },
        &budgets,
    )
    .unwrap();
    assert_eq!(fwd.direction.token(), "fwd");
    let back = evoma_core::runtime::level_apply(
        &level,
        &Generation {
            payload: Word::parse("1 0"),
            index: 0,
        },
        &budgets,
    )
    .unwrap();
    assert_eq!(back.direction.token(), "back");
}

#[test]
fn flipper_matches_its_documented_reference_language() {
    let doc = load("flipper.evm");
    let m = doc.the_machine().unwrap();
    let Some(AutomatonDef::Dfa(reference)) = doc.automaton("ref-parity") else {
        panic!("expected the reference acceptor");
    };
    // The orbit has period 2, so a run unsatisfied after two applications is
    // never satisfied; the generation budget (100) decides soundly.
    let sample = accepted_language_sample(&Subject::Em(m), &Alphabet::binary(), 8).unwrap();
    let accepted = sample.accepted_set();
    for w in Alphabet::binary().words_up_to(8) {
        assert_eq!(
            reference.accepts(&w).unwrap(),
            accepted.contains(&w),
            "word {w}"
        );
    }
}

#[test]
fn generated_schedule_machine_matches_the_basic_one() {
    // Instance evidence that a general machine over a non-periodic level
    // sequence accepts the same bounded language as a hand-built basic one.
    let general = load("gem-generated.evm").the_machine().unwrap();
    let basic = load("flipper.evm").the_machine().unwrap();
    let a = Alphabet::binary();
    let sg = accepted_language_sample(&Subject::Em(general), &a, 8).unwrap();
    let sb = accepted_language_sample(&Subject::Em(basic), &a, 8).unwrap();
    assert_eq!(sg.accepted, sb.accepted);
}

#[test]
fn corpus_machines_have_homogeneous_fa_levels() {
    for file in [
        "match-count.evm",
        "flipper.evm",
        "flip2.evm",
        "pulse2.evm",
        "threestep.evm",
        "countdown.evm",
        "bouncer.evm",
        "parity-router.evm",
        "threebounce.evm",
        "pipeline3.evm",
    ] {
        let m = load(file).the_machine().unwrap();
        assert_eq!(m.level_class(), LevelClass::Fa, "{file}");
    }
}
