//! A seeded genetic algorithm over fixed-length bit genomes.
//!
//! One GA generation (tournament selection, one-point crossover, per-bit
//! mutation, elitism) is a total, deterministic, seeded procedure, so it can
//! serve as the level automaton of an evolutionary machine: populations
//! encode losslessly into generation words (genomes joined by a separator
//! symbol) and the per-generation randomness comes from a stream derived
//! from the generation index, never from run history.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::alphabet::{Alphabet, Word};
use crate::demo::network::{self, SwitchTask};
use crate::runtime::{
    Budgets, EvolutionaryMachine, Flavor, LevelAutomaton, LevelSchedule, Mode, RunError,
    RunResult, RunTrace, SearchCondition,
};

/// Separator between genomes in the population encoding.
pub const SEPARATOR: &str = ";";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GaError {
    #[error("bad GA config: {0}")]
    BadConfig(String),
    #[error("malformed population encoding: {0}")]
    BadEncoding(String),
}

/// A fixed-length bit genome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Individual {
    bits: Vec<bool>,
}

impl Individual {
    pub fn new(bits: Vec<bool>) -> Self {
        Individual { bits }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// Number of 1-bits in the genome.
pub fn fitness_onemax(ind: &Individual) -> u32 {
    ind.bits.iter().filter(|&&b| b).count() as u32
}

/// Fitness functions available to search conditions and GA levels.
#[derive(Debug, Clone, PartialEq)]
pub enum FitnessFn {
    /// Count of 1-bits.
    OneMax,
    /// Fraction of truth-table rows a switch configuration reproduces on a
    /// NAND network.
    SwitchMatch(Arc<SwitchTask>),
}

impl FitnessFn {
    pub fn evaluate(&self, ind: &Individual) -> f64 {
        match self {
            FitnessFn::OneMax => fitness_onemax(ind) as f64,
            FitnessFn::SwitchMatch(task) => network::switch_score(task, ind.bits()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FitnessFn::OneMax => "onemax",
            FitnessFn::SwitchMatch(_) => "switch-match",
        }
    }
}

/// An ordered multiset of individuals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Population {
    members: Vec<Individual>,
}

impl Population {
    pub fn new(members: Vec<Individual>) -> Self {
        Population { members }
    }

    pub fn members(&self) -> &[Individual] {
        &self.members
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn best_fitness(&self, f: &FitnessFn) -> f64 {
        self.members
            .iter()
            .map(|m| f.evaluate(m))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean_fitness(&self, f: &FitnessFn) -> f64 {
        if self.members.is_empty() {
            return 0.0;
        }
        self.members.iter().map(|m| f.evaluate(m)).sum::<f64>() / self.members.len() as f64
    }

    /// Population alphabet: genome bits plus the separator.
    pub fn alphabet() -> Alphabet {
        Alphabet::new(["0", "1", SEPARATOR]).expect("well-formed")
    }

    /// Encodes as a generation word: genomes joined by [`SEPARATOR`].
    pub fn encode(&self) -> Word {
        let mut w = Word::empty();
        for (i, m) in self.members.iter().enumerate() {
            if i > 0 {
                w.push(SEPARATOR);
            }
            for &b in &m.bits {
                w.push(if b { "1" } else { "0" });
            }
        }
        w
    }

    /// Decodes a generation word without a declared shape: any number of
    /// genomes, which must all share one length.
    pub fn decode_flexible(word: &Word) -> Result<Self, GaError> {
        let mut members = Vec::new();
        let mut current: Vec<bool> = Vec::new();
        for sym in word.symbols() {
            match sym.as_str() {
                "0" => current.push(false),
                "1" => current.push(true),
                SEPARATOR => members.push(Individual::new(std::mem::take(&mut current))),
                other => {
                    return Err(GaError::BadEncoding(format!(
                        "unexpected symbol `{other}` in population word"
                    )))
                }
            }
        }
        members.push(Individual::new(current));
        let len = members[0].len();
        if members.iter().any(|m| m.len() != len) {
            return Err(GaError::BadEncoding("genome lengths differ".into()));
        }
        Ok(Population { members })
    }

    /// Decodes a generation word, checking genome length and count.
    pub fn decode(word: &Word, genome_len: usize, population_size: usize) -> Result<Self, GaError> {
        let mut members = Vec::new();
        let mut current: Vec<bool> = Vec::new();
        for sym in word.symbols() {
            match sym.as_str() {
                "0" => current.push(false),
                "1" => current.push(true),
                SEPARATOR => {
                    members.push(Individual::new(std::mem::take(&mut current)));
                }
                other => {
                    return Err(GaError::BadEncoding(format!(
                        "unexpected symbol `{other}` in population word"
                    )))
                }
            }
        }
        if !word.is_empty() || population_size == 1 {
            members.push(Individual::new(current));
        }
        if members.len() != population_size {
            return Err(GaError::BadEncoding(format!(
                "expected {population_size} genomes, found {}",
                members.len()
            )));
        }
        for m in &members {
            if m.len() != genome_len {
                return Err(GaError::BadEncoding(format!(
                    "genome length {} does not match configured {genome_len}",
                    m.len()
                )));
            }
        }
        Ok(Population { members })
    }
}

/// Operator rates, sizes, seed and search target for the GA.
#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub genome_len: usize,
    pub population_size: usize,
    /// Per-bit mutation probability.
    pub mutation_rate: f64,
    /// Probability that a child is produced by one-point crossover.
    pub crossover_rate: f64,
    pub tournament_size: usize,
    /// Members copied unchanged, best first by fitness. May equal the
    /// population size, which freezes the population when mutation and
    /// crossover are off.
    pub elitism: usize,
    pub seed: u64,
    pub fitness: FitnessFn,
    pub threshold: f64,
}

impl GaConfig {
    pub fn onemax(genome_len: usize, population_size: usize, seed: u64) -> Self {
        GaConfig {
            genome_len,
            population_size,
            mutation_rate: 1.0 / genome_len.max(1) as f64,
            crossover_rate: 0.7,
            tournament_size: 2,
            elitism: 1,
            seed,
            fitness: FitnessFn::OneMax,
            threshold: genome_len as f64,
        }
    }

    pub fn validate(&self) -> Result<(), GaError> {
        if self.genome_len == 0 {
            return Err(GaError::BadConfig("genome length must be positive".into()));
        }
        if self.population_size == 0 {
            return Err(GaError::BadConfig("population size must be positive".into()));
        }
        if self.elitism > self.population_size {
            return Err(GaError::BadConfig(
                "elitism must not exceed the population size".into(),
            ));
        }
        if self.tournament_size == 0 {
            return Err(GaError::BadConfig("tournament size must be positive".into()));
        }
        for (what, rate) in [
            ("mutation rate", self.mutation_rate),
            ("crossover rate", self.crossover_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(GaError::BadConfig(format!("{what} must lie in [0, 1]")));
            }
        }
        Ok(())
    }

    /// Random-number stream for one generation index. Stream 0 seeds the
    /// initial population; generation `t` uses stream `t + 1`, so parallel
    /// replay of disjoint runs stays deterministic.
    pub fn rng_for(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    /// Seeded initial population.
    pub fn initial_population(&self) -> Population {
        let mut rng = self.rng_for(0);
        let members = (0..self.population_size)
            .map(|_| Individual::new((0..self.genome_len).map(|_| rng.gen_bool(0.5)).collect()))
            .collect();
        Population::new(members)
    }
}

fn tournament(fitness: &[f64], cfg: &GaConfig, rng: &mut ChaCha8Rng) -> usize {
    let mut best = rng.gen_range(0..fitness.len());
    for _ in 1..cfg.tournament_size {
        let c = rng.gen_range(0..fitness.len());
        if fitness[c] > fitness[best] {
            best = c;
        }
    }
    best
}

/// One GA generation: elites survive unchanged (in original order), the rest
/// are tournament-selected, crossed over and mutated. The rng must be the
/// stream for this generation index.
pub fn ga_generation(p: &Population, cfg: &GaConfig, rng: &mut ChaCha8Rng) -> Population {
    let fitness: Vec<f64> = p.members.iter().map(|m| cfg.fitness.evaluate(m)).collect();
    // Top `elitism` indices by fitness, ties to the earlier member, then
    // restored to original order so full elitism reproduces the population.
    let mut ranked: Vec<usize> = (0..p.members.len()).collect();
    ranked.sort_by(|&a, &b| fitness[b].partial_cmp(&fitness[a]).unwrap().then(a.cmp(&b)));
    let mut elite: Vec<usize> = ranked.into_iter().take(cfg.elitism).collect();
    elite.sort_unstable();

    let mut members: Vec<Individual> = elite.iter().map(|&i| p.members[i].clone()).collect();
    while members.len() < cfg.population_size {
        let p1 = tournament(&fitness, cfg, rng);
        let mut child = p.members[p1].bits.clone();
        if cfg.genome_len > 1 && rng.gen_bool(cfg.crossover_rate) {
            let p2 = tournament(&fitness, cfg, rng);
            let cut = rng.gen_range(1..cfg.genome_len);
            child[cut..].copy_from_slice(&p.members[p2].bits[cut..]);
        }
        for bit in child.iter_mut() {
            if rng.gen_bool(cfg.mutation_rate) {
                *bit = !*bit;
            }
        }
        members.push(Individual::new(child));
    }
    Population::new(members)
}

/// Applies one GA generation as an evolutionary-machine level: decode the
/// generation word, step the GA with the stream for index `t`, re-encode.
pub fn apply_ga_level(cfg: &GaConfig, word: &Word, t: u64) -> Result<Word, RunError> {
    let p = Population::decode(word, cfg.genome_len, cfg.population_size)
        .map_err(|e| RunError::Level(e.to_string()))?;
    let mut rng = cfg.rng_for(t + 1);
    Ok(ga_generation(&p, cfg, &mut rng).encode())
}

/// Packages the GA as a period-1 basic evolutionary machine over the encoded
/// population alphabet, with the configured fitness threshold as the search
/// condition, and runs it from the seeded initial population.
pub fn run_ga_as_etm(cfg: &GaConfig, mode: Mode, budgets: Budgets) -> Result<RunResult, RunError> {
    cfg.validate().map_err(|e| RunError::Level(e.to_string()))?;
    let machine = EvolutionaryMachine::new(
        format!("ga-{}", cfg.fitness.name()),
        Flavor::Basic,
        LevelSchedule::Periodic(vec![LevelAutomaton::Ga(cfg.clone())]),
        SearchCondition::FitnessAtLeast {
            fitness: cfg.fitness.clone(),
            genome_len: cfg.genome_len,
            population_size: cfg.population_size,
            threshold: cfg.threshold,
        },
        mode,
        budgets,
    )
    .map_err(|e| RunError::Level(e.to_string()))?;
    machine.run(cfg.initial_population().encode())
}

/// Per-generation (t, best, mean) fitness rows decoded from a run trace,
/// starting with the initial population at t = 0.
pub fn trace_fitness_rows(
    trace: &RunTrace,
    cfg: &GaConfig,
) -> Result<Vec<(u64, f64, f64)>, GaError> {
    let mut rows = Vec::new();
    let mut push = |t: u64, w: &Word| -> Result<(), GaError> {
        let p = Population::decode(w, cfg.genome_len, cfg.population_size)?;
        rows.push((t, p.best_fitness(&cfg.fitness), p.mean_fitness(&cfg.fitness)));
        Ok(())
    };
    if let Some(first) = trace.records().first() {
        push(first.t, &first.input)?;
    }
    for rec in trace.records() {
        push(rec.t + 1, &rec.output)?;
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_cfg() -> GaConfig {
        GaConfig {
            genome_len: 8,
            population_size: 10,
            mutation_rate: 1.0 / 8.0,
            crossover_rate: 0.7,
            tournament_size: 2,
            elitism: 1,
            seed: 42,
            fitness: FitnessFn::OneMax,
            threshold: 8.0,
        }
    }

    #[test]
    fn onemax_counts_ones() {
        assert_eq!(fitness_onemax(&Individual::new(vec![false; 4])), 0);
        assert_eq!(fitness_onemax(&Individual::new(vec![true; 8])), 8);
        assert_eq!(
            fitness_onemax(&Individual::new(vec![true, false, true, true, false])),
            3
        );
    }

    #[test]
    fn encode_decode_round_trip() {
        let cfg = tiny_cfg();
        let p = cfg.initial_population();
        let encoded = p.encode();
        let decoded = Population::decode(&encoded, cfg.genome_len, cfg.population_size).unwrap();
        assert_eq!(decoded, p);
        assert_eq!(decoded.encode(), encoded);
    }

    #[test]
    fn decode_rejects_wrong_shape() {
        assert!(Population::decode(&Word::parse("0 1 ; 0"), 2, 2).is_err());
        assert!(Population::decode(&Word::parse("0 1"), 2, 2).is_err());
        assert!(Population::decode(&Word::parse("0 x"), 2, 1).is_err());
    }

    #[test]
    fn inert_operators_with_full_elitism_freeze_the_population() {
        let mut cfg = tiny_cfg();
        cfg.mutation_rate = 0.0;
        cfg.crossover_rate = 0.0;
        cfg.elitism = cfg.population_size;
        let p = cfg.initial_population();
        let mut rng = cfg.rng_for(1);
        assert_eq!(ga_generation(&p, &cfg, &mut rng), p);
    }

    #[test]
    fn elite_survives_so_best_fitness_is_monotone() {
        let cfg = tiny_cfg();
        let mut p = cfg.initial_population();
        let mut best = p.best_fitness(&cfg.fitness);
        for t in 0..40u64 {
            let mut rng = cfg.rng_for(t + 1);
            p = ga_generation(&p, &cfg, &mut rng);
            let now = p.best_fitness(&cfg.fitness);
            assert!(now >= best, "generation {t}: {now} < {best}");
            best = now;
        }
    }

    #[test]
    fn population_closure_after_each_generation() {
        let cfg = tiny_cfg();
        let mut p = cfg.initial_population();
        for t in 0..10u64 {
            let mut rng = cfg.rng_for(t + 1);
            p = ga_generation(&p, &cfg, &mut rng);
            assert_eq!(p.size(), cfg.population_size);
            assert!(p.members().iter().all(|m| m.len() == cfg.genome_len));
        }
    }

    #[test]
    fn seeded_trajectory_replays_identically() {
        let cfg = tiny_cfg();
        let run = || {
            let mut p = cfg.initial_population();
            let mut words = vec![p.encode()];
            for t in 0..15u64 {
                let mut rng = cfg.rng_for(t + 1);
                p = ga_generation(&p, &cfg, &mut rng);
                words.push(p.encode());
            }
            words
        };
        assert_eq!(run(), run());
    }
}
