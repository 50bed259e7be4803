//! Discrete-time simulator and scheduling library for delay-guaranteed
//! cross-layer control in multi-hop wireless networks.
//!
//! The library is organized around a per-slot control loop: a congestion
//! controller picks virtual admission rates from virtual-queue state, a
//! scheduler solves a maximum-weight activation problem under the configured
//! interference model, and the queue module applies the resulting transfers
//! to packet queues and virtual queues. An LP-based oracle computes exact
//! capacity-region optima on small instances so that throughput and
//! stability claims can be checked against ground truth.

pub mod control;
pub mod engine;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod queues;
pub mod sched;

pub use engine::{run, run_bp_baseline, Algorithm, RunOptions};
pub use metrics::MetricsReport;
pub use model::{load_model, NetworkModel, SimConfig};
