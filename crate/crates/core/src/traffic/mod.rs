//! Traffic sources and the receiving sink.

pub mod cbr;
pub mod sink;
pub mod tcp;

pub use cbr::CbrSource;
pub use sink::{Sink, SinkFlow};
pub use tcp::{Segment, TcpConfig, TcpSource, TcpVariant};

/// Transport class of a flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FlowKind {
    Tcp,
    Udp,
}

impl FlowKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FlowKind::Tcp => "tcp",
            FlowKind::Udp => "udp",
        }
    }
}

impl std::fmt::Display for FlowKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}
