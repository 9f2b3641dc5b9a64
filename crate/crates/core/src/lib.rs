//! Weak-measurement ("super") quantum discord and classical correlation for
//! two- and three-qubit states.
//!
//! Entropies are in bits. The measurement on one qubit is either projective
//! or the two-outcome weak measurement with strength `x ≥ 0`, built from a
//! projector pair `Π₀, Π₁` as `P± = √((1∓tanh x)/2) Π₀ + √((1±tanh x)/2) Π₁`.

pub mod cli;
pub mod discord;
pub mod error;
pub mod families;
pub mod measurement;
pub mod monogamy;
pub mod optimizer;
pub mod qstate;

pub use discord::{
    avg_post_entropy, conditional_entropy, mutual_information, normal_discord, super_classical_correlation,
    super_discord, CorrelationResult,
};
pub use error::{Error, Result};
pub use families::{bell_diagonal, BellDiagonalParams, PhaseDampingTrajectory};
pub use measurement::{MeasurementDirection, Side, Strength, WeakPair};
pub use monogamy::{monogamy_score, Arrow, MonogamyReport};
pub use optimizer::OptimizerOptions;
pub use qstate::{ComplexMatrix, DensityMatrix};
