//! One-dimensional cellular automata over a finite cell alphabet.
//!
//! Configurations are finite words embedded in an infinite quiescent
//! background and kept in canonical form (no leading or trailing quiescent
//! cells). The rule table may carry a `default` symbol for all unlisted
//! neighborhood tuples; with a default the rule is total by construction,
//! without one it must enumerate the full tuple domain.

use std::collections::BTreeMap;

use crate::alphabet::{Alphabet, Word};
use crate::transducer::DefinitionError;

/// A finite configuration with its position in the quiescent background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaConfiguration {
    cells: Word,
    offset: i64,
}

impl CaConfiguration {
    /// Builds a configuration; leading/trailing quiescent cells are trimmed
    /// and the offset adjusted, so equal configurations compare equal.
    pub fn new(cells: Word, offset: i64, quiescent: &str) -> Self {
        let syms = cells.symbols();
        let first = syms.iter().position(|s| s != quiescent);
        let Some(first) = first else {
            return CaConfiguration {
                cells: Word::empty(),
                offset: 0,
            };
        };
        let last = syms.iter().rposition(|s| s != quiescent).expect("nonempty");
        CaConfiguration {
            cells: Word::new(syms[first..=last].iter().cloned()),
            offset: offset + first as i64,
        }
    }

    pub fn all_quiescent() -> Self {
        CaConfiguration {
            cells: Word::empty(),
            offset: 0,
        }
    }

    pub fn cells(&self) -> &Word {
        &self.cells
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn support_len(&self) -> usize {
        self.cells.len()
    }

    /// Symbol at absolute position `pos`, or the quiescent symbol.
    pub fn at<'a>(&'a self, pos: i64, quiescent: &'a str) -> &'a str {
        if pos < self.offset {
            return quiescent;
        }
        let ix = (pos - self.offset) as usize;
        self.cells
            .symbols()
            .get(ix)
            .map(String::as_str)
            .unwrap_or(quiescent)
    }
}

/// A one-dimensional cellular automaton with a radius-`r` neighborhood.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellularAutomaton1D {
    name: String,
    cell_alphabet: Alphabet,
    radius: usize,
    quiescent: usize,
    rule: BTreeMap<Vec<usize>, usize>,
    default: Option<usize>,
}

impl CellularAutomaton1D {
    pub fn new(
        name: impl Into<String>,
        cell_alphabet: Alphabet,
        radius: usize,
        quiescent: &str,
        rule: Vec<(Vec<String>, String)>,
        default: Option<String>,
    ) -> Result<Self, DefinitionError> {
        let name = name.into();
        let sym = |s: &str| {
            cell_alphabet
                .position(s)
                .ok_or_else(|| DefinitionError::UnknownSymbol {
                    machine: name.clone(),
                    symbol: s.to_string(),
                    role: "cell",
                })
        };
        let quiescent_ix = sym(quiescent)?;
        let width = 2 * radius + 1;
        let mut table = BTreeMap::new();
        for (tuple, result) in rule {
            if tuple.len() != width {
                return Err(DefinitionError::Other {
                    machine: name.clone(),
                    violation: format!(
                        "rule tuple has {} entries, expected {width}",
                        tuple.len()
                    ),
                });
            }
            let mut key = Vec::with_capacity(width);
            for t in &tuple {
                key.push(sym(t)?);
            }
            let value = sym(&result)?;
            if table.insert(key, value).is_some() {
                return Err(DefinitionError::Other {
                    machine: name.clone(),
                    violation: format!("duplicate rule for tuple `{}`", tuple.join(" ")),
                });
            }
        }
        let default_ix = default.as_deref().map(sym).transpose()?;
        if default_ix.is_none() {
            let expected = cell_alphabet.len().pow(width as u32);
            if table.len() != expected {
                return Err(DefinitionError::Other {
                    machine: name.clone(),
                    violation: format!(
                        "rule lists {} of {expected} tuples and no default",
                        table.len()
                    ),
                });
            }
        }
        let ca = CellularAutomaton1D {
            name,
            cell_alphabet,
            radius,
            quiescent: quiescent_ix,
            rule: table,
            default: default_ix,
        };
        // Quiescent fixed point: the all-quiescent neighborhood must map to
        // the quiescent symbol, otherwise the background would boil.
        let q_tuple = vec![ca.quiescent; width];
        if ca.apply_ix(&q_tuple) != ca.quiescent {
            return Err(DefinitionError::Other {
                machine: ca.name,
                violation: "rule must map the all-quiescent neighborhood to the quiescent symbol"
                    .into(),
            });
        }
        Ok(ca)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn cell_alphabet(&self) -> &Alphabet {
        &self.cell_alphabet
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn quiescent(&self) -> &str {
        self.cell_alphabet.symbol(self.quiescent).expect("in range")
    }

    pub fn rule_entries(&self) -> impl Iterator<Item = (Vec<&str>, &str)> {
        self.rule.iter().map(|(tuple, &result)| {
            (
                tuple
                    .iter()
                    .map(|&s| self.cell_alphabet.symbol(s).expect("in range"))
                    .collect(),
                self.cell_alphabet.symbol(result).expect("in range"),
            )
        })
    }

    pub fn default_symbol(&self) -> Option<&str> {
        self.default
            .map(|d| self.cell_alphabet.symbol(d).expect("in range"))
    }

    fn apply_ix(&self, tuple: &[usize]) -> usize {
        self.rule
            .get(tuple)
            .copied()
            .or(self.default)
            .expect("rule is total (checked at construction)")
    }

    /// One synchronous update of every cell. The result is canonical and its
    /// support extends at most `radius` cells past each side of the input's.
    pub fn step(&self, config: &CaConfiguration) -> CaConfiguration {
        if config.support_len() == 0 {
            return CaConfiguration::all_quiescent();
        }
        let q = self.quiescent();
        let r = self.radius as i64;
        let lo = config.offset - r;
        let hi = config.offset + config.support_len() as i64 + r;
        let mut cells = Word::empty();
        for pos in lo..hi {
            let mut tuple = Vec::with_capacity(2 * self.radius + 1);
            for d in -r..=r {
                let s = config.at(pos + d, q);
                tuple.push(
                    self.cell_alphabet
                        .position(s)
                        .expect("configuration over cell alphabet"),
                );
            }
            cells.push(
                self.cell_alphabet
                    .symbol(self.apply_ix(&tuple))
                    .expect("in range"),
            );
        }
        CaConfiguration::new(cells, lo, q)
    }

    /// The trace `[c, step(c), step²(c), …]` of length `steps + 1`.
    pub fn run(&self, config: &CaConfiguration, steps: usize) -> Vec<CaConfiguration> {
        let mut trace = Vec::with_capacity(steps + 1);
        trace.push(config.clone());
        for _ in 0..steps {
            let next = self.step(trace.last().expect("nonempty"));
            trace.push(next);
        }
        trace
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Radius-1 XOR-of-neighbors rule over {0, 1} with quiescent 0.
    pub fn rule90() -> CellularAutomaton1D {
        let a = Alphabet::binary();
        let mut rule = Vec::new();
        for l in 0..2usize {
            for c in 0..2usize {
                for r in 0..2usize {
                    rule.push((
                        vec![l.to_string(), c.to_string(), r.to_string()],
                        ((l ^ r) as usize).to_string(),
                    ));
                }
            }
        }
        CellularAutomaton1D::new("rule90", a, 1, "0", rule, None).unwrap()
    }

    fn single_one() -> CaConfiguration {
        CaConfiguration::new(Word::parse("1"), 0, "0")
    }

    #[test]
    fn quiescent_configuration_is_a_fixed_point() {
        let ca = rule90();
        let c = CaConfiguration::all_quiescent();
        assert_eq!(ca.step(&c), c);
    }

    #[test]
    fn rule90_from_single_cell_spreads_to_both_sides() {
        // Hand evaluation of the rule table: cell -1 sees (0,0,1) -> 1, cell 0
        // sees (0,1,0) -> 0, cell 1 sees (1,0,0) -> 1.
        let ca = rule90();
        let next = ca.step(&single_one());
        assert_eq!(next.cells(), &Word::parse("1 0 1"));
        assert_eq!(next.offset(), -1);
    }

    #[test]
    fn rule90_traces_pascal_mod_2() {
        // Rows of Pascal's triangle mod 2, hand-computed.
        let ca = rule90();
        let trace = ca.run(&single_one(), 4);
        let rows: Vec<String> = trace.iter().map(|c| c.cells().to_string()).collect();
        assert_eq!(
            rows,
            [
                "1",
                "1 0 1",
                "1 0 0 0 1",
                "1 0 1 0 1 0 1",
                "1 0 0 0 0 0 0 0 1",
            ]
        );
    }

    #[test]
    fn trace_replay_is_deterministic() {
        let ca = rule90();
        let trace = ca.run(&single_one(), 6);
        for i in 0..trace.len() - 1 {
            assert_eq!(ca.step(&trace[i]), trace[i + 1]);
        }
    }

    #[test]
    fn support_growth_is_bounded_by_radius() {
        use rand::{Rng, SeedableRng};
        let ca = rule90();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let len = rng.gen_range(1..12);
            let cells: Vec<String> = (0..len)
                .map(|_| if rng.gen_bool(0.5) { "1" } else { "0" }.to_string())
                .collect();
            let c = CaConfiguration::new(Word::new(cells), 0, "0");
            let next = ca.step(&c);
            if c.support_len() == 0 || next.support_len() == 0 {
                continue;
            }
            assert!(next.offset() >= c.offset() - 1);
            let c_end = c.offset() + c.support_len() as i64;
            let n_end = next.offset() + next.support_len() as i64;
            assert!(n_end <= c_end + 1);
        }
    }

    #[test]
    fn locality_of_single_cell_perturbation() {
        use rand::{Rng, SeedableRng};
        let ca = rule90();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(977);
        for _ in 0..100 {
            let len = rng.gen_range(2..12);
            let cells: Vec<String> = (0..len)
                .map(|_| if rng.gen_bool(0.5) { "1" } else { "0" }.to_string())
                .collect();
            let flip_at = rng.gen_range(0..len);
            let mut flipped = cells.clone();
            flipped[flip_at] = if flipped[flip_at] == "1" { "0" } else { "1" }.to_string();
            let a = ca.step(&CaConfiguration::new(Word::new(cells), 0, "0"));
            let b = ca.step(&CaConfiguration::new(Word::new(flipped), 0, "0"));
            // Outputs may differ only within radius of the flipped position.
            let lo = flip_at as i64 - 1;
            let hi = flip_at as i64 + 1;
            let span_lo = a.offset().min(b.offset());
            let span_hi = (a.offset() + a.support_len() as i64)
                .max(b.offset() + b.support_len() as i64);
            for pos in span_lo..span_hi {
                if pos < lo || pos > hi {
                    assert_eq!(a.at(pos, "0"), b.at(pos, "0"), "position {pos}");
                }
            }
        }
    }
}
