//! Exact analysis of cost-sharing games with set-dependent resource costs.
//!
//! A game is a set of players, a set of resources, a strategy set per player
//! (each strategy a subset of resources) and one non-decreasing set function
//! per resource. Costs are split among the users of a resource by a uniform
//! protocol ([`Protocol`]): Shapley, generalized weighted Shapley, or an
//! explicit share table. On top of this the crate computes exact potentials,
//! pure Nash equilibria, social optima and prices of anarchy and stability,
//! and builds the classic lower-bound network gadgets.
//!
//! All arithmetic is exact ([`Rational`]). Player sets are bitmasks, so games
//! are limited to [`MAX_PLAYERS`] players.

pub mod corpus;
pub mod cost;
pub mod equilibrium;
mod error;
pub mod exec;
pub mod gadgets;
pub mod game;
pub mod network;
pub mod potential;
pub mod protocol;
pub mod rational;
pub mod set;

pub use cost::{Modularity, SetCostFunction};
pub use equilibrium::{AnalysisReport, Ratio};
pub use error::{Error, Result};
pub use exec::Execution;
pub use game::{GameModel, Resource, StrategyProfile};
pub use network::NetworkModel;
pub use protocol::{Protocol, TableProtocol, WeightSystem};
pub use rational::Rational;
pub use set::{PlayerSet, MAX_PLAYERS};
