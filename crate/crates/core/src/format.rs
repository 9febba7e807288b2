//! The machine-definition text format.
//!
//! A document is a sequence of blocks, each opened by an `automaton <kind>
//! <name>` or `machine <name>` header. Lines are whitespace-separated
//! tokens; `#` starts a comment; blank lines are ignored. Symbols, state
//! names and entity names are arbitrary tokens without whitespace (`->` is
//! reserved).
//!
//! ```text
//! automaton dfa even1s
//! alphabet 0 1
//! states e o
//! start e
//! accept e
//! delta e 0 -> e
//! delta e 1 -> o
//! delta o 0 -> o
//! delta o 1 -> e
//!
//! automaton transducer bitflip
//! alphabet 0 1
//! output-alphabet 0 1
//! states s
//! start s
//! accept s
//! delta s 0 -> s emit 1
//! delta s 1 -> s emit 0
//!
//! machine flipper
//! flavor basic
//! levels periodic 1 bitflip
//! mode inductive
//! search never
//! budget generations 100 level-steps 100000 window 4
//! ```
//!
//! Kinds: `dfa` (acceptor), `transducer` (`delta … emit <sym>*`, empty
//! emission allowed), `nfa` (multiple targets, multiple start states), `tm`
//! (`tape-alphabet <sym>… blank <sym>`, `delta q a -> p b L|R|S`, `accept` /
//! `reject` halt sets), `itm` (a tm whose deltas may append `out <sym>*` to
//! the write-only output tape), `ca` (`cells`, `radius`, `quiescent`,
//! `rule <tuple> -> <sym>`, optional `default -> <sym>`), and `dispatch`
//! (named `selectors` and `branches` referring to sibling blocks).
//!
//! `route-back <state>…` in an automaton block tags the states that send a
//! general machine's cursor backward.
//!
//! Emission is canonical: `parse(emit(x))` reproduces `x` exactly, and
//! emitting what was parsed from a canonical document reproduces the
//! document.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::alphabet::{Alphabet, AlphabetError, Word};
use crate::ca::CellularAutomaton1D;
use crate::construct::{DispatchMachine, Selector};
use crate::demo::ga::FitnessFn;
use crate::nfa::Nfa;
use crate::runtime::{
    Budgets, EvolutionaryMachine, Flavor, LevelAutomaton, LevelSchedule, Mode, SearchCondition,
};
use crate::tm::{InductiveTuringMachine, Move, TuringMachine};
use crate::transducer::{DefinitionError, FiniteTransducer};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Invalid {
        line: usize,
        #[source]
        source: DefinitionError,
    },
    #[error("{0}")]
    Structure(String),
}

impl ParseError {
    fn syntax(line: usize, msg: impl Into<String>) -> Self {
        ParseError::Syntax {
            line,
            msg: msg.into(),
        }
    }
}

/// One parsed automaton block.
#[derive(Debug, Clone, PartialEq)]
pub enum AutomatonDef {
    Dfa(FiniteTransducer),
    Transducer(FiniteTransducer),
    Nfa(Nfa),
    Tm(TuringMachine),
    Itm(InductiveTuringMachine),
    Ca(CellularAutomaton1D),
    Dispatch(DispatchDef),
}

impl AutomatonDef {
    pub fn name(&self) -> &str {
        match self {
            AutomatonDef::Dfa(t) | AutomatonDef::Transducer(t) => t.name(),
            AutomatonDef::Nfa(n) => n.name(),
            AutomatonDef::Tm(m) => m.name(),
            AutomatonDef::Itm(m) => m.name(),
            AutomatonDef::Ca(c) => c.name(),
            AutomatonDef::Dispatch(d) => &d.name,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            AutomatonDef::Dfa(_) => "dfa",
            AutomatonDef::Transducer(_) => "transducer",
            AutomatonDef::Nfa(_) => "nfa",
            AutomatonDef::Tm(_) => "tm",
            AutomatonDef::Itm(_) => "itm",
            AutomatonDef::Ca(_) => "ca",
            AutomatonDef::Dispatch(_) => "dispatch",
        }
    }
}

/// A dispatch block: names of sibling selector acceptors and branches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DispatchDef {
    pub name: String,
    pub selectors: Vec<String>,
    pub branches: Vec<String>,
}

/// A machine block before its level references are resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct MachineDef {
    pub name: String,
    pub flavor: Flavor,
    pub levels: LevelsSpec,
    pub mode: Mode,
    pub search: SearchSpec,
    pub budgets: Budgets,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LevelsSpec {
    Periodic(Vec<String>),
    Explicit(Vec<String>),
    Generated(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SearchSpec {
    AcceptedBy(String),
    Fitness { function: String, threshold: f64 },
    Never,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DocEntry {
    Automaton(AutomatonDef),
    Machine(MachineDef),
}

/// A parsed document: automaton and machine blocks in order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Document {
    pub entries: Vec<DocEntry>,
}

// ---------------------------------------------------------------------------
// parsing

struct Line<'a> {
    number: usize,
    tokens: Vec<&'a str>,
}

fn tokenize(text: &str) -> Vec<Line<'_>> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let body = raw.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = body.split_whitespace().collect();
            if tokens.is_empty() {
                None
            } else {
                Some(Line {
                    number: i + 1,
                    tokens,
                })
            }
        })
        .collect()
}

/// Fields shared by the block kinds while a block is read.
#[derive(Default)]
struct BlockFields {
    alphabet: Option<Vec<String>>,
    output_alphabet: Option<Vec<String>>,
    tape_alphabet: Option<(Vec<String>, String)>,
    states: Option<Vec<String>>,
    start: Vec<String>,
    accept: Vec<String>,
    reject: Vec<String>,
    route_back: Vec<String>,
    fa_delta: Vec<(String, String, String, Word)>,
    nfa_delta: Vec<(String, String, Vec<String>)>,
    tm_delta: Vec<(String, String, String, String, Move, Word)>,
    cells: Option<Vec<String>>,
    radius: Option<usize>,
    quiescent: Option<String>,
    rules: Vec<(Vec<String>, String)>,
    default_rule: Option<String>,
    selectors: Option<Vec<String>>,
    branches: Option<Vec<String>>,
    flavor: Option<Flavor>,
    levels: Option<LevelsSpec>,
    mode: Option<Mode>,
    search: Option<SearchSpec>,
    budgets: Budgets,
}

fn arrow_split<'a>(
    line: &'a Line<'a>,
    before: usize,
) -> Result<(&'a [&'a str], &'a [&'a str]), ParseError> {
    let pos = line
        .tokens
        .iter()
        .position(|t| *t == "->")
        .ok_or_else(|| ParseError::syntax(line.number, "expected `->`"))?;
    if pos != before {
        return Err(ParseError::syntax(
            line.number,
            format!("expected `->` after {before} tokens"),
        ));
    }
    Ok((&line.tokens[1..pos], &line.tokens[pos + 1..]))
}

fn parse_rational(tok: &str, line: usize) -> Result<f64, ParseError> {
    if let Some((num, den)) = tok.split_once('/') {
        let n: f64 = num
            .parse()
            .map_err(|_| ParseError::syntax(line, format!("bad rational `{tok}`")))?;
        let d: f64 = den
            .parse()
            .map_err(|_| ParseError::syntax(line, format!("bad rational `{tok}`")))?;
        if d == 0.0 {
            return Err(ParseError::syntax(line, "zero denominator"));
        }
        Ok(n / d)
    } else {
        tok.parse()
            .map_err(|_| ParseError::syntax(line, format!("bad number `{tok}`")))
    }
}

impl Document {
    pub fn parse(text: &str) -> Result<Document, ParseError> {
        let lines = tokenize(text);
        let mut entries = Vec::new();
        let mut names: BTreeSet<String> = BTreeSet::new();
        let mut i = 0;
        while i < lines.len() {
            let header = &lines[i];
            let (entry, next) = match header.tokens[0] {
                "automaton" => Self::parse_automaton_block(&lines, i)?,
                "machine" => Self::parse_machine_block(&lines, i)?,
                other => {
                    return Err(ParseError::syntax(
                        header.number,
                        format!("expected `automaton` or `machine`, found `{other}`"),
                    ))
                }
            };
            let name = match &entry {
                DocEntry::Automaton(a) => a.name().to_string(),
                DocEntry::Machine(m) => m.name.clone(),
            };
            if !names.insert(name.clone()) {
                return Err(ParseError::syntax(
                    header.number,
                    format!("duplicate entity name `{name}`"),
                ));
            }
            entries.push(entry);
            i = next;
        }
        Ok(Document { entries })
    }

    fn block_extent(lines: &[Line<'_>], start: usize) -> usize {
        let mut end = start + 1;
        while end < lines.len() && !matches!(lines[end].tokens[0], "automaton" | "machine") {
            end += 1;
        }
        end
    }

    fn parse_automaton_block(
        lines: &[Line<'_>],
        start: usize,
    ) -> Result<(DocEntry, usize), ParseError> {
        let header = &lines[start];
        if header.tokens.len() != 3 {
            return Err(ParseError::syntax(
                header.number,
                "expected `automaton <kind> <name>`",
            ));
        }
        let kind = header.tokens[1];
        let name = header.tokens[2].to_string();
        let end = Self::block_extent(lines, start);
        let mut f = BlockFields::default();
        for line in &lines[start + 1..end] {
            Self::read_field(line, kind, &mut f)?;
        }
        let invalid = |source| ParseError::Invalid {
            line: header.number,
            source,
        };
        let mk_alphabet = |syms: Vec<String>, name: &str| {
            Alphabet::new(syms).map_err(|e: AlphabetError| DefinitionError::Other {
                machine: name.to_string(),
                violation: e.to_string(),
            })
        };
        let entry = match kind {
            "dfa" | "transducer" => {
                let input = mk_alphabet(
                    f.alphabet
                        .ok_or_else(|| ParseError::syntax(header.number, "missing `alphabet`"))?,
                    &name,
                )
                .map_err(invalid)?;
                let output = match f.output_alphabet {
                    Some(syms) => mk_alphabet(syms, &name).map_err(invalid)?,
                    None => input.clone(),
                };
                let states = f
                    .states
                    .ok_or_else(|| ParseError::syntax(header.number, "missing `states`"))?;
                let start_state = f
                    .start
                    .first()
                    .ok_or_else(|| ParseError::syntax(header.number, "missing `start`"))?;
                let t = FiniteTransducer::new(
                    name.clone(),
                    states,
                    start_state,
                    &f.accept,
                    &f.route_back,
                    input,
                    output,
                    f.fa_delta,
                )
                .map_err(invalid)?;
                if kind == "dfa" {
                    DocEntry::Automaton(AutomatonDef::Dfa(t.into_acceptor()))
                } else {
                    DocEntry::Automaton(AutomatonDef::Transducer(t))
                }
            }
            "nfa" => {
                let alphabet = mk_alphabet(
                    f.alphabet
                        .ok_or_else(|| ParseError::syntax(header.number, "missing `alphabet`"))?,
                    &name,
                )
                .map_err(invalid)?;
                let states = f
                    .states
                    .ok_or_else(|| ParseError::syntax(header.number, "missing `states`"))?;
                let n = Nfa::new(name, states, &f.start, &f.accept, alphabet, f.nfa_delta)
                    .map_err(invalid)?;
                DocEntry::Automaton(AutomatonDef::Nfa(n))
            }
            "tm" | "itm" => {
                let input = mk_alphabet(
                    f.alphabet
                        .ok_or_else(|| ParseError::syntax(header.number, "missing `alphabet`"))?,
                    &name,
                )
                .map_err(invalid)?;
                let (tape_syms, blank) = f.tape_alphabet.ok_or_else(|| {
                    ParseError::syntax(header.number, "missing `tape-alphabet … blank <sym>`")
                })?;
                let tape = mk_alphabet(tape_syms, &name).map_err(invalid)?;
                let states = f
                    .states
                    .ok_or_else(|| ParseError::syntax(header.number, "missing `states`"))?;
                let start_state = f
                    .start
                    .first()
                    .ok_or_else(|| ParseError::syntax(header.number, "missing `start`"))?;
                let base_delta = f
                    .tm_delta
                    .iter()
                    .map(|(a, b, c, d, m, _)| (a.clone(), b.clone(), c.clone(), d.clone(), *m))
                    .collect();
                let tm = TuringMachine::new(
                    name.clone(),
                    states,
                    start_state,
                    &f.accept,
                    &f.reject,
                    &f.route_back,
                    input.clone(),
                    tape,
                    &blank,
                    base_delta,
                )
                .map_err(invalid)?;
                if kind == "tm" {
                    for (_, _, _, _, _, out) in &f.tm_delta {
                        if !out.is_empty() {
                            return Err(ParseError::syntax(
                                header.number,
                                "`out` clauses belong to itm blocks",
                            ));
                        }
                    }
                    DocEntry::Automaton(AutomatonDef::Tm(tm))
                } else {
                    let output = match f.output_alphabet {
                        Some(syms) => mk_alphabet(syms, tm.name()).map_err(invalid)?,
                        None => input,
                    };
                    let appends = f
                        .tm_delta
                        .into_iter()
                        .filter(|(_, _, _, _, _, out)| !out.is_empty())
                        .map(|(a, b, _, _, _, out)| (a, b, out))
                        .collect();
                    let itm = InductiveTuringMachine::new(tm, output, appends).map_err(invalid)?;
                    DocEntry::Automaton(AutomatonDef::Itm(itm))
                }
            }
            "ca" => {
                let cells = mk_alphabet(
                    f.cells
                        .ok_or_else(|| ParseError::syntax(header.number, "missing `cells`"))?,
                    &name,
                )
                .map_err(invalid)?;
                let radius = f
                    .radius
                    .ok_or_else(|| ParseError::syntax(header.number, "missing `radius`"))?;
                let quiescent = f
                    .quiescent
                    .ok_or_else(|| ParseError::syntax(header.number, "missing `quiescent`"))?;
                let ca = CellularAutomaton1D::new(
                    name,
                    cells,
                    radius,
                    &quiescent,
                    f.rules,
                    f.default_rule,
                )
                .map_err(invalid)?;
                DocEntry::Automaton(AutomatonDef::Ca(ca))
            }
            "dispatch" => {
                let selectors = f
                    .selectors
                    .ok_or_else(|| ParseError::syntax(header.number, "missing `selectors`"))?;
                let branches = f
                    .branches
                    .ok_or_else(|| ParseError::syntax(header.number, "missing `branches`"))?;
                DocEntry::Automaton(AutomatonDef::Dispatch(DispatchDef {
                    name,
                    selectors,
                    branches,
                }))
            }
            other => {
                return Err(ParseError::syntax(
                    header.number,
                    format!("unknown automaton kind `{other}`"),
                ))
            }
        };
        Ok((entry, end))
    }

    fn read_field(line: &Line<'_>, kind: &str, f: &mut BlockFields) -> Result<(), ParseError> {
        let strs = |ts: &[&str]| ts.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        match line.tokens[0] {
            "alphabet" => f.alphabet = Some(strs(&line.tokens[1..])),
            "output-alphabet" => f.output_alphabet = Some(strs(&line.tokens[1..])),
            "tape-alphabet" => {
                let ts = &line.tokens[1..];
                let blank_at = ts.iter().position(|t| *t == "blank").ok_or_else(|| {
                    ParseError::syntax(line.number, "expected `blank <sym>` at line end")
                })?;
                if blank_at + 2 != ts.len() {
                    return Err(ParseError::syntax(
                        line.number,
                        "expected exactly one symbol after `blank`",
                    ));
                }
                f.tape_alphabet = Some((strs(&ts[..blank_at]), ts[blank_at + 1].to_string()));
            }
            "states" => f.states = Some(strs(&line.tokens[1..])),
            "start" => f.start = strs(&line.tokens[1..]),
            "accept" => f.accept = strs(&line.tokens[1..]),
            "reject" => f.reject = strs(&line.tokens[1..]),
            "route-back" => f.route_back = strs(&line.tokens[1..]),
            "cells" => f.cells = Some(strs(&line.tokens[1..])),
            "radius" => {
                f.radius = Some(
                    line.tokens
                        .get(1)
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| ParseError::syntax(line.number, "expected `radius <int>`"))?,
                )
            }
            "quiescent" => {
                f.quiescent = Some(
                    line.tokens
                        .get(1)
                        .ok_or_else(|| ParseError::syntax(line.number, "expected a symbol"))?
                        .to_string(),
                )
            }
            "rule" => {
                let (tuple, result) = arrow_split(line, line.tokens.len() - 2)?;
                if result.len() != 1 {
                    return Err(ParseError::syntax(
                        line.number,
                        "expected one symbol after `->`",
                    ));
                }
                f.rules.push((strs(tuple), result[0].to_string()));
            }
            "default" => {
                let (_, result) = arrow_split(line, 1)?;
                if result.len() != 1 {
                    return Err(ParseError::syntax(
                        line.number,
                        "expected one symbol after `->`",
                    ));
                }
                f.default_rule = Some(result[0].to_string());
            }
            "selectors" => f.selectors = Some(strs(&line.tokens[1..])),
            "branches" => f.branches = Some(strs(&line.tokens[1..])),
            "delta" => match kind {
                "dfa" => {
                    let (lhs, rhs) = arrow_split(line, 3)?;
                    if lhs.len() != 2 || rhs.len() != 1 {
                        return Err(ParseError::syntax(
                            line.number,
                            "expected `delta <state> <sym> -> <state>`",
                        ));
                    }
                    f.fa_delta.push((
                        lhs[0].to_string(),
                        lhs[1].to_string(),
                        rhs[0].to_string(),
                        Word::empty(),
                    ));
                }
                "transducer" => {
                    let (lhs, rhs) = arrow_split(line, 3)?;
                    if lhs.len() != 2 || rhs.len() < 2 || rhs[1] != "emit" {
                        return Err(ParseError::syntax(
                            line.number,
                            "expected `delta <state> <sym> -> <state> emit <sym>*`",
                        ));
                    }
                    f.fa_delta.push((
                        lhs[0].to_string(),
                        lhs[1].to_string(),
                        rhs[0].to_string(),
                        Word::new(strs(&rhs[2..])),
                    ));
                }
                "nfa" => {
                    let (lhs, rhs) = arrow_split(line, 3)?;
                    if lhs.len() != 2 {
                        return Err(ParseError::syntax(
                            line.number,
                            "expected `delta <state> <sym> -> <state>*`",
                        ));
                    }
                    f.nfa_delta
                        .push((lhs[0].to_string(), lhs[1].to_string(), strs(rhs)));
                }
                "tm" | "itm" => {
                    let (lhs, rhs) = arrow_split(line, 3)?;
                    if lhs.len() != 2 || rhs.len() < 3 {
                        return Err(ParseError::syntax(
                            line.number,
                            "expected `delta <state> <sym> -> <state> <sym> <L|R|S> [out <sym>*]`",
                        ));
                    }
                    let mv = Move::from_token(rhs[2]).ok_or_else(|| {
                        ParseError::syntax(line.number, format!("bad move `{}`", rhs[2]))
                    })?;
                    let out = if rhs.len() > 3 {
                        if rhs[3] != "out" {
                            return Err(ParseError::syntax(
                                line.number,
                                "expected `out <sym>*` after the move",
                            ));
                        }
                        Word::new(strs(&rhs[4..]))
                    } else {
                        Word::empty()
                    };
                    f.tm_delta.push((
                        lhs[0].to_string(),
                        lhs[1].to_string(),
                        rhs[0].to_string(),
                        rhs[1].to_string(),
                        mv,
                        out,
                    ));
                }
                _ => {
                    return Err(ParseError::syntax(
                        line.number,
                        format!("`delta` is not valid in a {kind} block"),
                    ))
                }
            },
            other => {
                return Err(ParseError::syntax(
                    line.number,
                    format!("unknown field `{other}`"),
                ))
            }
        }
        Ok(())
    }

    fn parse_machine_block(
        lines: &[Line<'_>],
        start: usize,
    ) -> Result<(DocEntry, usize), ParseError> {
        let header = &lines[start];
        if header.tokens.len() != 2 {
            return Err(ParseError::syntax(header.number, "expected `machine <name>`"));
        }
        let name = header.tokens[1].to_string();
        let end = Self::block_extent(lines, start);
        let mut f = BlockFields::default();
        for line in &lines[start + 1..end] {
            match line.tokens[0] {
                "flavor" => {
                    f.flavor = Some(match line.tokens.get(1).copied() {
                        Some("basic") => Flavor::Basic,
                        Some("general") => Flavor::General,
                        other => {
                            return Err(ParseError::syntax(
                                line.number,
                                format!("bad flavor `{}`", other.unwrap_or("")),
                            ))
                        }
                    })
                }
                "levels" => {
                    let spec = match line.tokens.get(1).copied() {
                        Some("periodic") => {
                            let k: usize = line
                                .tokens
                                .get(2)
                                .and_then(|t| t.parse().ok())
                                .ok_or_else(|| {
                                    ParseError::syntax(line.number, "expected a period")
                                })?;
                            let names: Vec<String> =
                                line.tokens[3..].iter().map(|s| s.to_string()).collect();
                            if names.len() != k {
                                return Err(ParseError::syntax(
                                    line.number,
                                    format!("period {k} but {} level names", names.len()),
                                ));
                            }
                            LevelsSpec::Periodic(names)
                        }
                        Some("explicit") => LevelsSpec::Explicit(
                            line.tokens[2..].iter().map(|s| s.to_string()).collect(),
                        ),
                        Some("generated") => LevelsSpec::Generated(
                            line.tokens
                                .get(2)
                                .ok_or_else(|| {
                                    ParseError::syntax(line.number, "expected a rule name")
                                })?
                                .to_string(),
                        ),
                        other => {
                            return Err(ParseError::syntax(
                                line.number,
                                format!("bad levels spec `{}`", other.unwrap_or("")),
                            ))
                        }
                    };
                    f.levels = Some(spec);
                }
                "mode" => {
                    let mode = match line.tokens.get(1).copied() {
                        Some("finite-state") => Mode::FiniteState,
                        Some("bounded") => Mode::Bounded(
                            line.tokens
                                .get(2)
                                .and_then(|t| t.parse().ok())
                                .ok_or_else(|| {
                                    ParseError::syntax(line.number, "expected `bounded <n>`")
                                })?,
                        ),
                        Some("terminal") => Mode::Terminal,
                        Some("recursive") => Mode::Recursive,
                        Some("inductive") => Mode::Inductive,
                        Some("inductive-with-recursion") => Mode::InductiveWithRecursion,
                        Some("limit") => Mode::Limit,
                        Some("limit-with-recursion") => Mode::LimitWithRecursion,
                        other => {
                            return Err(ParseError::syntax(
                                line.number,
                                format!("bad mode `{}`", other.unwrap_or("")),
                            ))
                        }
                    };
                    f.mode = Some(mode);
                }
                "search" => {
                    let spec = match line.tokens.get(1).copied() {
                        Some("never") => SearchSpec::Never,
                        Some("accepted-by") => SearchSpec::AcceptedBy(
                            line.tokens
                                .get(2)
                                .ok_or_else(|| {
                                    ParseError::syntax(line.number, "expected an acceptor name")
                                })?
                                .to_string(),
                        ),
                        Some("fitness") => {
                            if line.tokens.get(3).copied() != Some(">=") {
                                return Err(ParseError::syntax(
                                    line.number,
                                    "expected `search fitness <fn> >= <threshold>`",
                                ));
                            }
                            SearchSpec::Fitness {
                                function: line.tokens[2].to_string(),
                                threshold: parse_rational(
                                    line.tokens.get(4).ok_or_else(|| {
                                        ParseError::syntax(line.number, "missing threshold")
                                    })?,
                                    line.number,
                                )?,
                            }
                        }
                        other => {
                            return Err(ParseError::syntax(
                                line.number,
                                format!("bad search condition `{}`", other.unwrap_or("")),
                            ))
                        }
                    };
                    f.search = Some(spec);
                }
                "budget" => {
                    let mut ts = line.tokens[1..].iter();
                    while let Some(key) = ts.next() {
                        let value: u64 =
                            ts.next().and_then(|t| t.parse().ok()).ok_or_else(|| {
                                ParseError::syntax(line.number, format!("bad budget `{key}`"))
                            })?;
                        match *key {
                            "generations" => f.budgets.max_generations = value,
                            "level-steps" => f.budgets.max_steps_per_level = value,
                            "window" => f.budgets.stability_window = value,
                            other => {
                                return Err(ParseError::syntax(
                                    line.number,
                                    format!("unknown budget key `{other}`"),
                                ))
                            }
                        }
                    }
                }
                other => {
                    return Err(ParseError::syntax(
                        line.number,
                        format!("unknown machine field `{other}`"),
                    ))
                }
            }
        }
        let def = MachineDef {
            name,
            flavor: f
                .flavor
                .ok_or_else(|| ParseError::syntax(header.number, "missing `flavor`"))?,
            levels: f
                .levels
                .ok_or_else(|| ParseError::syntax(header.number, "missing `levels`"))?,
            mode: f
                .mode
                .ok_or_else(|| ParseError::syntax(header.number, "missing `mode`"))?,
            search: f
                .search
                .ok_or_else(|| ParseError::syntax(header.number, "missing `search`"))?,
            budgets: f.budgets,
        };
        Ok((DocEntry::Machine(def), end))
    }

    // -----------------------------------------------------------------------
    // lookup & resolution

    pub fn automata(&self) -> impl Iterator<Item = &AutomatonDef> {
        self.entries.iter().filter_map(|e| match e {
            DocEntry::Automaton(a) => Some(a),
            _ => None,
        })
    }

    pub fn machines(&self) -> impl Iterator<Item = &MachineDef> {
        self.entries.iter().filter_map(|e| match e {
            DocEntry::Machine(m) => Some(m),
            _ => None,
        })
    }

    pub fn automaton(&self, name: &str) -> Option<&AutomatonDef> {
        self.automata().find(|a| a.name() == name)
    }

    pub fn push(&mut self, entry: DocEntry) {
        self.entries.push(entry);
    }

    fn acceptor(&self, name: &str) -> Result<FiniteTransducer, ParseError> {
        match self.automaton(name) {
            Some(AutomatonDef::Dfa(t)) | Some(AutomatonDef::Transducer(t)) => Ok(t.clone()),
            Some(other) => Err(ParseError::Structure(format!(
                "`{name}` is a {}, not an acceptor",
                other.kind()
            ))),
            None => Err(ParseError::Structure(format!("no automaton named `{name}`"))),
        }
    }

    pub fn resolve_dispatch(&self, def: &DispatchDef) -> Result<DispatchMachine, ParseError> {
        let selectors = def
            .selectors
            .iter()
            .map(|n| self.acceptor(n))
            .collect::<Result<Vec<_>, _>>()?;
        let branches = def
            .branches
            .iter()
            .map(|n| self.acceptor(n))
            .collect::<Result<Vec<_>, _>>()?;
        let selector =
            Selector::new(selectors).map_err(|e| ParseError::Structure(e.to_string()))?;
        DispatchMachine::new(def.name.clone(), selector, branches)
            .map_err(|e| ParseError::Structure(e.to_string()))
    }

    fn level(&self, name: &str) -> Result<LevelAutomaton, ParseError> {
        match self.automaton(name) {
            Some(AutomatonDef::Dfa(t)) | Some(AutomatonDef::Transducer(t)) => {
                Ok(LevelAutomaton::Fa(t.clone()))
            }
            Some(AutomatonDef::Tm(m)) => Ok(LevelAutomaton::Tm(m.clone())),
            Some(AutomatonDef::Itm(m)) => Ok(LevelAutomaton::Itm(m.clone())),
            Some(AutomatonDef::Dispatch(d)) => {
                Ok(LevelAutomaton::Dispatch(self.resolve_dispatch(d)?))
            }
            Some(AutomatonDef::Ca(_)) => Err(ParseError::Structure(format!(
                "`{name}` is a cellular automaton and cannot serve as a level"
            ))),
            Some(AutomatonDef::Nfa(_)) => Err(ParseError::Structure(format!(
                "`{name}` is nondeterministic; determinize it before using it as a level"
            ))),
            None => Err(ParseError::Structure(format!("no automaton named `{name}`"))),
        }
    }

    /// Resolves one machine block into a runnable machine.
    pub fn resolve_machine(&self, def: &MachineDef) -> Result<EvolutionaryMachine, ParseError> {
        let schedule = match &def.levels {
            LevelsSpec::Periodic(names) => LevelSchedule::Periodic(
                names
                    .iter()
                    .map(|n| self.level(n))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            LevelsSpec::Explicit(names) => LevelSchedule::Explicit(
                names
                    .iter()
                    .map(|n| self.level(n))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            LevelsSpec::Generated(rule) => LevelSchedule::Generated(rule.clone()),
        };
        let search = match &def.search {
            SearchSpec::Never => SearchCondition::Never,
            SearchSpec::AcceptedBy(name) => SearchCondition::AcceptedBy(self.acceptor(name)?),
            SearchSpec::Fitness {
                function,
                threshold,
            } => {
                if function != "onemax" {
                    return Err(ParseError::Structure(format!(
                        "unknown fitness function `{function}` (documents support `onemax`)"
                    )));
                }
                // Sizes 0 mean "infer the shape from the word itself".
                SearchCondition::FitnessAtLeast {
                    fitness: FitnessFn::OneMax,
                    genome_len: 0,
                    population_size: 0,
                    threshold: *threshold,
                }
            }
        };
        EvolutionaryMachine::new(
            def.name.clone(),
            def.flavor,
            schedule,
            search,
            def.mode,
            def.budgets,
        )
        .map_err(|e| ParseError::Structure(e.to_string()))
    }

    /// The single machine of the document, or an error naming the problem.
    pub fn the_machine(&self) -> Result<EvolutionaryMachine, ParseError> {
        let defs: Vec<&MachineDef> = self.machines().collect();
        match defs.as_slice() {
            [one] => self.resolve_machine(one),
            [] => Err(ParseError::Structure("document has no machine block".into())),
            many => Err(ParseError::Structure(format!(
                "document has {} machine blocks; pick one by name",
                many.len()
            ))),
        }
    }

    // -----------------------------------------------------------------------
    // emission

    pub fn emit(&self) -> String {
        let mut out = String::new();
        for (i, entry) in self.entries.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            match entry {
                DocEntry::Automaton(a) => emit_automaton(&mut out, a),
                DocEntry::Machine(m) => emit_machine(&mut out, m),
            }
        }
        out
    }
}

fn emit_symbol_line(
    out: &mut String,
    key: &str,
    symbols: impl IntoIterator<Item = impl AsRef<str>>,
) {
    out.push_str(key);
    for s in symbols {
        out.push(' ');
        out.push_str(s.as_ref());
    }
    out.push('\n');
}

fn emit_fa(out: &mut String, t: &FiniteTransducer, as_dfa: bool) {
    emit_symbol_line(out, "alphabet", t.input_alphabet().symbols());
    if !as_dfa {
        emit_symbol_line(out, "output-alphabet", t.output_alphabet().symbols());
    }
    emit_symbol_line(out, "states", t.states());
    emit_symbol_line(out, "start", [t.start_state()]);
    let accepting: Vec<&str> = t.accepting_states().collect();
    if !accepting.is_empty() {
        emit_symbol_line(out, "accept", accepting);
    }
    let route_back: Vec<&str> = t.route_back_states().collect();
    if !route_back.is_empty() {
        emit_symbol_line(out, "route-back", route_back);
    }
    for (from, sym, to, emit) in t.transitions() {
        if as_dfa {
            let _ = writeln!(out, "delta {from} {sym} -> {to}");
        } else {
            let mut line = format!("delta {from} {sym} -> {to} emit");
            for s in emit.symbols() {
                line.push(' ');
                line.push_str(s);
            }
            out.push_str(&line);
            out.push('\n');
        }
    }
}

fn emit_automaton(out: &mut String, a: &AutomatonDef) {
    let _ = writeln!(out, "automaton {} {}", a.kind(), a.name());
    match a {
        AutomatonDef::Dfa(t) => emit_fa(out, t, true),
        AutomatonDef::Transducer(t) => emit_fa(out, t, false),
        AutomatonDef::Nfa(n) => {
            emit_symbol_line(out, "alphabet", n.alphabet().symbols());
            emit_symbol_line(out, "states", n.states());
            emit_symbol_line(out, "start", n.start_states());
            let accepting: Vec<&str> = n.accepting_states().collect();
            if !accepting.is_empty() {
                emit_symbol_line(out, "accept", accepting);
            }
            for (from, sym, targets) in n.transitions() {
                let mut line = format!("delta {from} {sym} ->");
                for t in targets {
                    line.push(' ');
                    line.push_str(t);
                }
                out.push_str(&line);
                out.push('\n');
            }
        }
        AutomatonDef::Tm(m) => emit_tm(out, m, None),
        AutomatonDef::Itm(m) => emit_tm(out, m.base(), Some(m)),
        AutomatonDef::Ca(c) => {
            emit_symbol_line(out, "cells", c.cell_alphabet().symbols());
            let _ = writeln!(out, "radius {}", c.radius());
            let _ = writeln!(out, "quiescent {}", c.quiescent());
            for (tuple, result) in c.rule_entries() {
                let _ = writeln!(out, "rule {} -> {result}", tuple.join(" "));
            }
            if let Some(d) = c.default_symbol() {
                let _ = writeln!(out, "default -> {d}");
            }
        }
        AutomatonDef::Dispatch(d) => {
            emit_symbol_line(out, "selectors", &d.selectors);
            emit_symbol_line(out, "branches", &d.branches);
        }
    }
}

fn emit_tm(out: &mut String, m: &TuringMachine, itm: Option<&InductiveTuringMachine>) {
    emit_symbol_line(out, "alphabet", m.input_alphabet().symbols());
    let mut tape_line: Vec<&str> = m
        .tape_alphabet()
        .symbols()
        .iter()
        .map(String::as_str)
        .collect();
    tape_line.push("blank");
    tape_line.push(m.blank());
    emit_symbol_line(out, "tape-alphabet", tape_line);
    if let Some(itm) = itm {
        emit_symbol_line(out, "output-alphabet", itm.output_alphabet().symbols());
    }
    emit_symbol_line(out, "states", m.states());
    emit_symbol_line(out, "start", [m.start_state()]);
    let accepting: Vec<&str> = m.halt_accept_states().collect();
    if !accepting.is_empty() {
        emit_symbol_line(out, "accept", accepting);
    }
    let rejecting: Vec<&str> = m.halt_reject_states().collect();
    if !rejecting.is_empty() {
        emit_symbol_line(out, "reject", rejecting);
    }
    let route_back: Vec<&str> = m.route_back_states().collect();
    if !route_back.is_empty() {
        emit_symbol_line(out, "route-back", route_back);
    }
    for (from, read, to, write, mv) in m.transitions() {
        let mut line = format!("delta {from} {read} -> {to} {write} {}", mv.token());
        if let Some(itm) = itm {
            if let Some((_, _, w)) = itm
                .output_appends()
                .find(|(s, sym, _)| *s == from && *sym == read)
            {
                if !w.is_empty() {
                    line.push_str(" out");
                    for s in w.symbols() {
                        line.push(' ');
                        line.push_str(s);
                    }
                }
            }
        }
        out.push_str(&line);
        out.push('\n');
    }
}

fn emit_machine(out: &mut String, m: &MachineDef) {
    let _ = writeln!(out, "machine {}", m.name);
    let _ = writeln!(out, "flavor {}", m.flavor.token());
    match &m.levels {
        LevelsSpec::Periodic(names) => {
            let _ = writeln!(out, "levels periodic {} {}", names.len(), names.join(" "));
        }
        LevelsSpec::Explicit(names) => {
            let _ = writeln!(out, "levels explicit {}", names.join(" "));
        }
        LevelsSpec::Generated(rule) => {
            let _ = writeln!(out, "levels generated {rule}");
        }
    }
    let _ = writeln!(out, "mode {}", m.mode.token());
    match &m.search {
        SearchSpec::Never => {
            let _ = writeln!(out, "search never");
        }
        SearchSpec::AcceptedBy(name) => {
            let _ = writeln!(out, "search accepted-by {name}");
        }
        SearchSpec::Fitness {
            function,
            threshold,
        } => {
            let _ = writeln!(out, "search fitness {function} >= {threshold}");
        }
    }
    let _ = writeln!(
        out,
        "budget generations {} level-steps {} window {}",
        m.budgets.max_generations, m.budgets.max_steps_per_level, m.budgets.stability_window
    );
}
