//! Synchronous NAND-gate networks with trainable connection switches.
//!
//! Every gate has exactly two input connections, each reading either a
//! primary input line or another gate's previous output. All gates update at
//! once on a global clock. In the switched variant each connection carries an
//! on/off bit; a switched-off connection reads as constant 1, the NAND
//! identity, so switching connections off prunes the network without killing
//! its expressiveness. An off-off gate therefore computes NAND(1, 1) = 0.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NetworkError {
    #[error("network: {0}")]
    Bad(String),
    #[error("truth table: {0}")]
    BadTable(String),
}

/// One gate-input connection source.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    /// Primary input line.
    Input(usize),
    /// Another gate's previous output.
    Gate(usize),
}

impl Source {
    pub fn parse(token: &str) -> Option<Source> {
        let (kind, num) = token.split_at(1);
        let ix: usize = num.parse().ok()?;
        match kind {
            "i" => Some(Source::Input(ix)),
            "g" => Some(Source::Gate(ix)),
            _ => None,
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Input(i) => write!(f, "i{i}"),
            Source::Gate(g) => write!(f, "g{g}"),
        }
    }
}

/// A clocked two-input NAND network. `switches` is `None` for fixed wiring
/// and `Some` (one bit per connection, gate order, first then second input)
/// for the trainable variant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UMachineNetwork {
    pub gates: usize,
    pub inputs: usize,
    pub wiring: Vec<(Source, Source)>,
    pub switches: Option<Vec<bool>>,
    pub outputs: Vec<usize>,
}

impl UMachineNetwork {
    pub fn validate(&self) -> Result<(), NetworkError> {
        if self.wiring.len() != self.gates {
            return Err(NetworkError::Bad(format!(
                "{} wire lines for {} gates",
                self.wiring.len(),
                self.gates
            )));
        }
        let check = |s: &Source| match *s {
            Source::Input(i) if i >= self.inputs => {
                Err(NetworkError::Bad(format!("input line i{i} out of range")))
            }
            Source::Gate(g) if g >= self.gates => {
                Err(NetworkError::Bad(format!("gate g{g} out of range")))
            }
            _ => Ok(()),
        };
        for (a, b) in &self.wiring {
            check(a)?;
            check(b)?;
        }
        if let Some(sw) = &self.switches {
            if sw.len() != 2 * self.gates {
                return Err(NetworkError::Bad(format!(
                    "{} switch bits for {} connections",
                    sw.len(),
                    2 * self.gates
                )));
            }
        }
        for &g in &self.outputs {
            if g >= self.gates {
                return Err(NetworkError::Bad(format!("output gate g{g} out of range")));
            }
        }
        Ok(())
    }

    pub fn switch_count(&self) -> usize {
        2 * self.gates
    }

    fn read(&self, src: Source, states: &[bool], inputs: &[bool], on: bool) -> bool {
        if !on {
            return true; // switched-off connection reads constant 1
        }
        match src {
            Source::Input(i) => inputs[i],
            Source::Gate(g) => states[g],
        }
    }

    /// One synchronous clock tick with an explicit switch assignment.
    pub fn step_with(&self, states: &[bool], inputs: &[bool], switches: &[bool]) -> Vec<bool> {
        debug_assert_eq!(states.len(), self.gates);
        debug_assert_eq!(inputs.len(), self.inputs);
        debug_assert_eq!(switches.len(), 2 * self.gates);
        (0..self.gates)
            .map(|g| {
                let (sa, sb) = self.wiring[g];
                let a = self.read(sa, states, inputs, switches[2 * g]);
                let b = self.read(sb, states, inputs, switches[2 * g + 1]);
                !(a && b)
            })
            .collect()
    }

    /// One synchronous clock tick using the network's own switches (all on
    /// for fixed wiring).
    pub fn step(&self, states: &[bool], inputs: &[bool]) -> Vec<bool> {
        match &self.switches {
            Some(sw) => self.step_with(states, inputs, sw),
            None => self.step_with(states, inputs, &vec![true; 2 * self.gates]),
        }
    }
}

/// A target function on the primary input lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    pub inputs: usize,
    pub outputs: usize,
    pub rows: Vec<(Vec<bool>, Vec<bool>)>,
}

impl TruthTable {
    pub fn validate(&self) -> Result<(), NetworkError> {
        for (ins, outs) in &self.rows {
            if ins.len() != self.inputs || outs.len() != self.outputs {
                return Err(NetworkError::BadTable(
                    "row arity does not match declared arity".into(),
                ));
            }
        }
        Ok(())
    }
}

/// A training target: network, table, and the number of clock ticks the
/// network settles for before its outputs are read.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwitchTask {
    pub net: UMachineNetwork,
    pub table: TruthTable,
    pub settle_steps: usize,
}

impl SwitchTask {
    /// Default settle time: two full passes of the gate count bound the
    /// transient of a feed-forward path.
    pub fn new(net: UMachineNetwork, table: TruthTable) -> Result<Self, NetworkError> {
        net.validate()?;
        table.validate()?;
        if table.inputs != net.inputs {
            return Err(NetworkError::BadTable(format!(
                "table has {} input lines, network has {}",
                table.inputs, net.inputs
            )));
        }
        if table.outputs != net.outputs.len() {
            return Err(NetworkError::BadTable(format!(
                "table has {} outputs, network has {}",
                table.outputs,
                net.outputs.len()
            )));
        }
        let settle_steps = 2 * net.gates;
        Ok(SwitchTask {
            net,
            table,
            settle_steps,
        })
    }
}

/// Fraction of truth-table rows matched by the given switch configuration,
/// evaluated from the all-zero gate state after the settle time.
pub fn switch_score(task: &SwitchTask, switches: &[bool]) -> f64 {
    if task.table.rows.is_empty() {
        return 1.0;
    }
    let mut matched = 0usize;
    for (ins, expected) in &task.table.rows {
        let mut states = vec![false; task.net.gates];
        for _ in 0..task.settle_steps {
            states = task.net.step_with(&states, ins, switches);
        }
        let got: Vec<bool> = task.net.outputs.iter().map(|&g| states[g]).collect();
        if got == *expected {
            matched += 1;
        }
    }
    matched as f64 / task.table.rows.len() as f64
}

/// Result of training the switches of a network by the GA.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub switches: Vec<bool>,
    pub score: f64,
    pub run: crate::runtime::RunResult,
}

/// Trains the connection switches against a truth table: the switch vector
/// is the genome, the fitness is the fraction of rows matched after the
/// settle time, and the machine below is the period-1 GA machine.
pub fn btype_train(
    net: &UMachineNetwork,
    table: &TruthTable,
    mut cfg: crate::demo::ga::GaConfig,
) -> Result<TrainOutcome, NetworkError> {
    use crate::demo::ga::{FitnessFn, Population};
    use crate::runtime::{Budgets, Mode};
    use std::sync::Arc;

    let task = Arc::new(SwitchTask::new(net.clone(), table.clone())?);
    cfg.genome_len = net.switch_count();
    cfg.fitness = FitnessFn::SwitchMatch(task.clone());
    let run = crate::demo::ga::run_ga_as_etm(
        &cfg,
        Mode::Terminal,
        Budgets {
            max_generations: 2_000,
            ..Budgets::default()
        },
    )
    .map_err(|e| NetworkError::Bad(e.to_string()))?;
    let final_pop = Population::decode(
        &run.outcome.final_generation().payload,
        cfg.genome_len,
        cfg.population_size,
    )
    .map_err(|e| NetworkError::Bad(e.to_string()))?;
    let best = final_pop
        .members()
        .iter()
        .max_by(|a, b| {
            switch_score(&task, a.bits())
                .partial_cmp(&switch_score(&task, b.bits()))
                .unwrap()
        })
        .expect("population is non-empty");
    let switches = best.bits().to_vec();
    let score = switch_score(&task, &switches);
    Ok(TrainOutcome {
        switches,
        score,
        run,
    })
}

/// Exhaustive search over all switch configurations; the oracle for GA
/// training at desk scale. Returns a best configuration and its score.
pub fn exhaustive_best(task: &SwitchTask) -> (Vec<bool>, f64) {
    let n = task.net.switch_count();
    assert!(n <= 20, "exhaustive search over 2^{n} switch settings");
    let mut best = (vec![false; n], f64::NEG_INFINITY);
    for mask in 0u32..(1 << n) {
        let switches: Vec<bool> = (0..n).map(|b| mask >> b & 1 == 1).collect();
        let score = switch_score(task, &switches);
        if score > best.1 {
            best = (switches, score);
        }
    }
    best
}

// ---------------------------------------------------------------------------
// file formats

/// Parses a network file: `gates G`, `inputs I`, `wire g<k> <src> <src>` per
/// gate (sources `i<n>` or `g<n>`), optional `switches on|off …` (two per
/// gate), `outputs g<k>…`. `#` comments and blank lines are ignored.
pub fn parse_net(text: &str) -> Result<UMachineNetwork, NetworkError> {
    let mut gates = None;
    let mut inputs = None;
    let mut wires: Vec<(usize, Source, Source)> = Vec::new();
    let mut switches = None;
    let mut outputs = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let toks: Vec<&str> = raw.split('#').next().unwrap_or("").split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        let bad = |msg: &str| NetworkError::Bad(format!("line {}: {msg}", ln + 1));
        match toks[0] {
            "gates" => {
                gates = Some(
                    toks.get(1)
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| bad("expected `gates <int>`"))?,
                )
            }
            "inputs" => {
                inputs = Some(
                    toks.get(1)
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| bad("expected `inputs <int>`"))?,
                )
            }
            "wire" => {
                if toks.len() != 4 {
                    return Err(bad("expected `wire g<k> <src> <src>`"));
                }
                let Some(Source::Gate(g)) = Source::parse(toks[1]) else {
                    return Err(bad("wire target must be a gate"));
                };
                let a = Source::parse(toks[2]).ok_or_else(|| bad("bad source"))?;
                let b = Source::parse(toks[3]).ok_or_else(|| bad("bad source"))?;
                wires.push((g, a, b));
            }
            "switches" => {
                let mut bits = Vec::new();
                for t in &toks[1..] {
                    match *t {
                        "on" => bits.push(true),
                        "off" => bits.push(false),
                        _ => return Err(bad("switches are `on` or `off`")),
                    }
                }
                switches = Some(bits);
            }
            "outputs" => {
                for t in &toks[1..] {
                    let Some(Source::Gate(g)) = Source::parse(t) else {
                        return Err(bad("outputs must be gates"));
                    };
                    outputs.push(g);
                }
            }
            other => return Err(bad(&format!("unknown field `{other}`"))),
        }
    }
    let gates = gates.ok_or_else(|| NetworkError::Bad("missing `gates`".into()))?;
    let inputs = inputs.ok_or_else(|| NetworkError::Bad("missing `inputs`".into()))?;
    let mut wiring = vec![None; gates];
    for (g, a, b) in wires {
        if g >= gates {
            return Err(NetworkError::Bad(format!("wire for out-of-range gate g{g}")));
        }
        if wiring[g].replace((a, b)).is_some() {
            return Err(NetworkError::Bad(format!("duplicate wire for gate g{g}")));
        }
    }
    let wiring = wiring
        .into_iter()
        .enumerate()
        .map(|(g, w)| w.ok_or_else(|| NetworkError::Bad(format!("gate g{g} has no wire"))))
        .collect::<Result<Vec<_>, _>>()?;
    let net = UMachineNetwork {
        gates,
        inputs,
        wiring,
        switches,
        outputs,
    };
    net.validate()?;
    Ok(net)
}

pub fn emit_net(net: &UMachineNetwork) -> String {
    let mut out = String::new();
    out.push_str(&format!("gates {}\n", net.gates));
    out.push_str(&format!("inputs {}\n", net.inputs));
    for (g, (a, b)) in net.wiring.iter().enumerate() {
        out.push_str(&format!("wire g{g} {a} {b}\n"));
    }
    if let Some(sw) = &net.switches {
        out.push_str("switches");
        for &bit in sw {
            out.push_str(if bit { " on" } else { " off" });
        }
        out.push('\n');
    }
    if !net.outputs.is_empty() {
        out.push_str("outputs");
        for &g in &net.outputs {
            out.push_str(&format!(" g{g}"));
        }
        out.push('\n');
    }
    out
}

/// Parses a truth-table file: `inputs I`, `outputs O`, then one
/// `row <bits> -> <bits>` line per row.
pub fn parse_table(text: &str) -> Result<TruthTable, NetworkError> {
    let mut inputs = None;
    let mut outputs = None;
    let mut rows = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let toks: Vec<&str> = raw.split('#').next().unwrap_or("").split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        let bad = |msg: &str| NetworkError::BadTable(format!("line {}: {msg}", ln + 1));
        let bits = |ts: &[&str]| -> Result<Vec<bool>, NetworkError> {
            ts.iter()
                .map(|t| match *t {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    other => Err(bad(&format!("bad bit `{other}`"))),
                })
                .collect()
        };
        match toks[0] {
            "inputs" => {
                inputs = Some(
                    toks.get(1)
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| bad("expected `inputs <int>`"))?,
                )
            }
            "outputs" => {
                outputs = Some(
                    toks.get(1)
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| bad("expected `outputs <int>`"))?,
                )
            }
            "row" => {
                let arrow = toks
                    .iter()
                    .position(|t| *t == "->")
                    .ok_or_else(|| bad("expected `->`"))?;
                rows.push((bits(&toks[1..arrow])?, bits(&toks[arrow + 1..])?));
            }
            other => return Err(bad(&format!("unknown field `{other}`"))),
        }
    }
    let table = TruthTable {
        inputs: inputs.ok_or_else(|| NetworkError::BadTable("missing `inputs`".into()))?,
        outputs: outputs.ok_or_else(|| NetworkError::BadTable("missing `outputs`".into()))?,
        rows,
    };
    table.validate()?;
    Ok(table)
}

pub fn emit_table(table: &TruthTable) -> String {
    let mut out = String::new();
    out.push_str(&format!("inputs {}\n", table.inputs));
    out.push_str(&format!("outputs {}\n", table.outputs));
    let bit = |b: &bool| if *b { "1" } else { "0" };
    for (ins, outs) in &table.rows {
        let i: Vec<&str> = ins.iter().map(bit).collect();
        let o: Vec<&str> = outs.iter().map(bit).collect();
        out.push_str(&format!("row {} -> {}\n", i.join(" "), o.join(" ")));
    }
    out
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    #[test]
    fn net_and_table_files_round_trip() {
        let net_text = "\
gates 2
inputs 1
wire g0 i0 i0
wire g1 g0 g0
switches on on off on
outputs g1
";
        let net = parse_net(net_text).unwrap();
        assert_eq!(emit_net(&net), net_text);
        let table_text = "inputs 1\noutputs 1\nrow 0 -> 1\nrow 1 -> 0\n";
        let table = parse_table(table_text).unwrap();
        assert_eq!(emit_table(&table), table_text);
    }

    #[test]
    fn table_arity_mismatch_is_caught() {
        let err = parse_table("inputs 2\noutputs 1\nrow 0 -> 1\n").unwrap_err();
        assert!(err.to_string().contains("arity"));
    }

    #[test]
    fn nand_truth_table() {
        // One gate fed by both input lines.
        let net = UMachineNetwork {
            gates: 1,
            inputs: 2,
            wiring: vec![(Source::Input(0), Source::Input(1))],
            switches: None,
            outputs: vec![0],
        };
        net.validate().unwrap();
        assert_eq!(net.step(&[false], &[true, true]), [false]);
        assert_eq!(net.step(&[false], &[false, true]), [true]);
        assert_eq!(net.step(&[false], &[true, false]), [true]);
        assert_eq!(net.step(&[false], &[false, false]), [true]);
    }

    /// Two NAND gates feeding each other.
    pub fn cross_coupled() -> UMachineNetwork {
        UMachineNetwork {
            gates: 2,
            inputs: 0,
            wiring: vec![
                (Source::Gate(1), Source::Gate(1)),
                (Source::Gate(0), Source::Gate(0)),
            ],
            switches: None,
            outputs: vec![0, 1],
        }
    }

    #[test]
    fn cross_coupled_pair_oscillates() {
        // Hand trace by the NAND truth table: from (0,0) both gates read a 0
        // source, so both output 1; from (1,1) both read 1, so both output 0.
        let net = cross_coupled();
        let mut states = vec![false, false];
        let mut seen = Vec::new();
        for _ in 0..4 {
            states = net.step(&states, &[]);
            seen.push(states.clone());
        }
        assert_eq!(
            seen,
            [
                vec![true, true],
                vec![false, false],
                vec![true, true],
                vec![false, false]
            ]
        );
    }

    #[test]
    fn gate_with_both_connections_off_outputs_zero() {
        let mut net = cross_coupled();
        net.switches = Some(vec![false; 4]);
        let states = net.step(&[true, false], &[]);
        // Every connection reads constant 1, so every gate is NAND(1,1) = 0.
        assert_eq!(states, [false, false]);
    }

    #[test]
    fn gate_with_one_live_zero_source_outputs_one() {
        let mut net = cross_coupled();
        // Gate 0: first connection live (reads gate 1 = 0), second off.
        net.switches = Some(vec![true, false, false, false]);
        let states = net.step(&[false, false], &[]);
        assert_eq!(states[0], true, "NAND(0, 1) = 1");
    }

    #[test]
    fn constant_one_target_is_achievable_trivially() {
        // A gate with both connections off outputs 0; one with a single off
        // connection and a 0 feed outputs 1. Routing the latter achieves a
        // constant-1 target for any input.
        let net = UMachineNetwork {
            gates: 2,
            inputs: 1,
            wiring: vec![(Source::Gate(1), Source::Gate(1)), (Source::Gate(0), Source::Gate(0))],
            switches: None,
            outputs: vec![0],
        };
        let table = TruthTable {
            inputs: 1,
            outputs: 1,
            rows: vec![(vec![false], vec![true]), (vec![true], vec![true])],
        };
        let task = SwitchTask::new(net, table).unwrap();
        let (best, score) = exhaustive_best(&task);
        assert_eq!(score, 1.0, "best switches {best:?}");
    }
}
