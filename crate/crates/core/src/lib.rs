//! Beamforming and BS clustering for full-duplex self-backhauled small-cell
//! networks.
//!
//! The macro base station (MBS) relays user data to small-cell base stations
//! (SBSs) over the same band the SBSs use to serve users. Each user is served
//! cooperatively by a cluster of SBSs and its end-to-end rate is the minimum of
//! its access and backhaul rates. The crate provides the channel model, exact
//! rates, concave lower bounds of the rates, a projected first-order solver for
//! the resulting convex subproblems, and successive-lower-bound algorithms for
//! full and partial channel knowledge.

pub mod algorithms;
pub mod beamformer;
pub mod clustering;
pub mod config;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod rates;
pub mod subsolver;
pub mod surrogates;
pub mod topology;
pub mod trace;

pub use beamformer::{BeamformerSet, Dims, PowerBudget};
pub use clustering::{Clustering, DecodingOrder};
pub use config::NetworkConfig;
pub use error::{Error, Result};
pub use experiment::{Algorithm, ExperimentSpec, ResultTable};
pub use rates::{AccessModel, LinkBound, Problem, RateReport};
pub use topology::{ChannelSet, PartialCsi, Topology};
