//! Discrete-event engine, links and the dumbbell network.

pub mod link;
pub mod network;
pub mod scheduler;

pub use link::{Link, Transmission};
pub use network::{Counters, FlowCounters, FlowSetup, SimOutcome, Simulation, Topology};
pub use scheduler::{Event, Scheduler};
