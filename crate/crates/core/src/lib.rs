//! Cluster and virial expansions for classical particles with a hard core
//! and a finite-range pair potential, and their low-temperature behaviour.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod configuration;
pub mod error;
pub mod graphs;
pub mod groundstate;
pub mod mayer;
pub mod potential;
pub mod thermo;
pub mod verify;
pub mod virial;

pub use configuration::Configuration;
pub use error::{Error, Result};
pub use graphs::LabeledGraph;
pub use groundstate::{GroundState, GroundStateTable, OptimizerSettings, Thresholds};
pub use mayer::{
    Estimate, MayerMethod, MayerRequest, MayerTable, MethodChoice, MonteCarloSettings,
    QuadratureSettings,
};
pub use potential::{BuiltinKind, PairPotential, Piece, Shape};
pub use thermo::{EquationOfState, Region};
pub use verify::{Criterion, CriterionResult, Selection, VerifyOptions};
pub use virial::{VirialTable, VirialTransform};
