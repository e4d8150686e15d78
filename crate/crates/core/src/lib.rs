//! Decision making when uncertainty is a set of probability measures.
//!
//! The crate covers finite probability spaces ([`probspace`]), losses and
//! randomized decision rules ([`decision`]), credal sets with dilation
//! detection ([`credal`]), global and local minimax rules backed by a small
//! simplex solver ([`minimax`]), Dirichlet-product Bayesian predictors with
//! exact misprediction probabilities ([`bayes`]), and end-to-end scenario
//! runs ([`experiments`]).

pub mod bayes;
pub mod credal;
pub mod decision;
pub mod error;
pub mod experiments;
pub mod minimax;
pub mod probspace;

pub use credal::{CredalSet, DilationReport, ProbabilityInterval};
pub use decision::{DecisionRule, LossSpec};
pub use error::{Error, Result};
pub use minimax::{MatrixGame, MinimaxSolution};
pub use probspace::{FiniteDistribution, JointDistribution};
