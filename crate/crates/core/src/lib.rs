//! Exact gains-from-trade evaluation for bilateral trade over discrete
//! valuation distributions on `{0..H}`.
//!
//! Probabilities live on a fixed integer grid of `1 / SCALE` steps so that
//! first-best, seller-offering, buyer-offering and random-offerer gains, and
//! their ratio, come out as exact rationals.

pub mod cli;
pub mod dist;
pub mod error;
pub mod generators;
pub mod mechanisms;
pub mod oracles;
pub mod rational;
pub mod report;
pub mod reproduction;
pub mod search;

pub use dist::{DiscreteDistribution, DistKind, Pmf, ScaledProb, MAX_H, SCALE};
pub use error::{Error, Result};
pub use generators::SellerFamilyParams;
pub use mechanisms::{evaluate, GftReport, PriceTable};
pub use rational::ExactRational;
