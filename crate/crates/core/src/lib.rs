//! Microcanonical random graphs with fixed edge and triangle counts: MCMC
//! sampling, spectral diagnostics, multipodal graphon optimization and
//! quench analysis.

pub mod error;
pub mod graph;
pub mod graphon;
pub mod linalg;
pub mod mcmc;
pub mod nucleation;
pub mod spectral;
pub mod stats;
pub mod sweep;

pub use error::{Error, Result};
pub use graph::{pairs, triples, EdgeFlip, LabeledGraph, MAX_NODES};
pub use graphon::{BipodalSearch, MultipodalGraphon};
pub use mcmc::{ChainState, ConstraintSpec, EquilibrationBudget, ProposalKind, SimRng, StepOutcome};
pub use nucleation::{QuenchProtocol, SegmentationConfig, StageSegmentation, StepClock, Trajectory};
pub use spectral::{EmpiricalGraphon, NodeEmbedding, PodePartition, SpectralSummary};
pub use stats::{FitMethod, GammaFit};
pub use sweep::{SweepCell, SweepConfig};
