//! Concrete evolutionary computation on the machine runtime: a seeded
//! genetic algorithm packaged as an evolutionary-machine level, and NAND
//! networks in the style of Turing's unorganized machines trained by that
//! GA.

pub mod ga;
pub mod network;

pub use ga::{FitnessFn, GaConfig, Individual, Population};
pub use network::{Source, SwitchTask, TruthTable, UMachineNetwork};
