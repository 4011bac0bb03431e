//! Flow mobility for multi-homed mobile nodes in Proxy Mobile IPv6.
//!
//! The crate models the home network block prefix (HNBP) mechanism next to
//! the shared-prefix and unique-prefix baselines:
//!
//! * [`hnbp`] aggregates an MN's prefixes and verifies flows at the MAG,
//! * [`scenario`] runs the single- and multi-LMA flow-move scenarios and
//!   records their signaling,
//! * [`analytical`] evaluates handover latency, signaling cost and packet loss,
//! * [`sim`] estimates the same quantities by Monte-Carlo simulation,
//! * [`experiment`] sweeps parameters and writes CSV results.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytical;
pub mod cache;
pub mod experiment;
pub mod hnbp;
pub mod message;
pub mod prefix;
pub mod scenario;
pub mod sim;
pub mod technique;
pub mod topology;

pub use hnbp::{generate_hnbp, on_attach, verify_prefix, HnbpMode, HomeNetworkBlockPrefix};
pub use message::{message_size, MessageType, SignalingMessage};
pub use prefix::Prefix;
pub use scenario::{run_scenario, ScenarioCase, ScenarioSpec};
pub use technique::{Environment, Technique};
pub use topology::Topology;
