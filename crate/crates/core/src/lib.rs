//! Local computation algorithms built on random rankings.
//!
//! Every algorithm here answers a query about one part of a global solution
//! (is this edge matched, what color is this vertex, which bin does this ball
//! go to) by simulating an online or distributed algorithm on the part of the
//! input that the answer depends on. All randomness comes from a [`Seed`], so
//! answers to separate queries are consistent with one global solution.

pub mod acceptance;
pub mod balls_bins;
pub mod coloring;
pub mod error;
pub mod graph;
pub mod harness;
pub mod matching;
pub mod online;
pub mod rank;
pub mod relevant;

pub use error::{LcaError, Result};
pub use graph::{LocalGraph, NeighborOracle};
pub use rank::{OrderingKind, Rank, RankOracle, Seed};
