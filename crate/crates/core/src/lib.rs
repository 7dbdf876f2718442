//! Packet-level simulator for comparing active queue management schemes
//! (Drop Tail, RED, FRED, BLUE, SFB and CHOKe) on a dumbbell topology with
//! responsive TCP and unresponsive CBR traffic.

pub mod aqm;
pub mod harness;
pub mod metrics;
pub mod packet;
pub mod rng;
pub mod sim;
pub mod time;
pub mod traffic;

pub use packet::{FlowId, Packet, PacketKind};
pub use time::SimTime;
