//! Binding cache and interface-flow state held by LMAs.

use std::fmt;

use crate::message::NodeId;
use crate::prefix::Prefix;

/// Binding ID distinguishing the bindings of one multi-homed MN.
pub type Bid = u16;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MnId(pub String);

impl fmt::Display for MnId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// An MN interface, `IF<n>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IfId(pub u16);

impl IfId {
    pub fn node(self) -> NodeId {
        NodeId::new(self.to_string())
    }
}

impl fmt::Display for IfId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IF{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FlowId(pub String);

impl From<&str> for FlowId {
    fn from(s: &str) -> Self {
        FlowId(s.to_string())
    }
}

impl fmt::Display for FlowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BindingCacheEntry {
    pub mn_id: MnId,
    pub if_id: IfId,
    pub bid: Bid,
    pub prefixes: Vec<Prefix>,
    pub attached_mag: NodeId,
    pub owning_lma: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IfFlowState {
    pub flow_id: FlowId,
    pub if_id: IfId,
    pub bid: Bid,
    pub prefix: Prefix,
}
