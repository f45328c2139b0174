//! Trust engine and simulation harness for social device networks.
//!
//! The crate ingests (or synthesizes) interaction traces between devices
//! that maintain friendships and community memberships, computes four
//! social trust features per ordered pair, labels pairs by k-means
//! clustering, trains a random-forest trust classifier, and fuses each
//! trustor's direct label with recommendations from common friends into a
//! binary trust verdict.

pub mod aggregate;
pub mod cluster;
pub mod error;
pub mod experiment;
pub mod features;
pub mod forest;
pub mod graph;
pub mod seed;
pub mod sim;

pub use error::{Error, Result};
pub use graph::{InteractionRecord, NodeId, PairKey, SocialGraph, TraceIngest};
