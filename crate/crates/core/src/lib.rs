//! Genotype compression and expansion for real-valued evolutionary search.
//!
//! An optimizer works on a genotype whose length differs from the
//! phenotype the objective sees; a [`MappingSpec`] converts between them.
//! The crate bundles the mappings, a benchmark suite, a PUF modeling task,
//! a small neural-network regression task, GA and DE engines, and the
//! statistics and experiment harness used to compare mappings.

pub mod error;
pub mod evolvers;
pub mod genotype;
pub mod harness;
pub mod mapping;
pub mod neural;
pub mod problems;
pub mod puf;
pub mod stats;

pub use error::{Error, Result};
pub use evolvers::{run, Algorithm, DeConfig, GaConfig, RunTrace};
pub use genotype::{clip, Bounds, Genotype, RngStream};
pub use mapping::{GenotypeLayout, MappingSpec};
pub use problems::{make_instance, FunctionId, Objective, ProblemInstance};
