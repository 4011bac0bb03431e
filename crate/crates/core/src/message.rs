//! Signaling message types and their sizes.

use std::fmt;
use std::str::FromStr;

/// Opaque node identifier (`MAG1`, `LMA2`, `IF3`, ...).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(name: impl Into<String>) -> Self {
        NodeId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MessageType {
    /// Router Solicitation
    Rs,
    /// Router Advertisement
    Ra,
    /// Proxy Binding Update
    Pbu,
    /// Proxy Binding Acknowledgement
    Pba,
    /// Flow Mobility Initiate
    Fmi,
    /// Flow Mobility Acknowledge
    Fma,
    /// Flow Mobility Initiate forwarded between LMAs
    EFmi,
    /// Flow Mobility Acknowledge forwarded between LMAs
    EFma,
    /// Binding Revocation Indication
    Bri,
    /// Binding Revocation Acknowledgement
    Bra,
    /// Update Status, sent by a MAG after block-prefix verification
    Us,
}

impl MessageType {
    pub const ALL: [MessageType; 11] = [
        MessageType::Rs,
        MessageType::Ra,
        MessageType::Pbu,
        MessageType::Pba,
        MessageType::Fmi,
        MessageType::Fma,
        MessageType::EFmi,
        MessageType::EFma,
        MessageType::Bri,
        MessageType::Bra,
        MessageType::Us,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MessageType::Rs => "RS",
            MessageType::Ra => "RA",
            MessageType::Pbu => "PBU",
            MessageType::Pba => "PBA",
            MessageType::Fmi => "FMI",
            MessageType::Fma => "FMA",
            MessageType::EFmi => "eFMI",
            MessageType::EFma => "eFMA",
            MessageType::Bri => "BRI",
            MessageType::Bra => "BRA",
            MessageType::Us => "US",
        }
    }

    /// Whether this message answers an earlier request.
    pub fn is_ack(self) -> bool {
        matches!(
            self,
            MessageType::Ra
                | MessageType::Pba
                | MessageType::Fma
                | MessageType::EFma
                | MessageType::Bra
        )
    }

    /// The request a reply answers, if any.
    pub fn request_of(self) -> Option<MessageType> {
        match self {
            MessageType::Ra => Some(MessageType::Rs),
            MessageType::Pba => Some(MessageType::Pbu),
            MessageType::Fma => Some(MessageType::Fmi),
            MessageType::EFma => Some(MessageType::EFmi),
            MessageType::Bra => Some(MessageType::Bri),
            _ => None,
        }
    }
}

impl fmt::Display for MessageType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MessageType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MessageType::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown message type `{s}`"))
    }
}

/// Size in bytes used for cost accounting.
///
/// The forwarded eFMI/eFMA carry the same payload as FMI/FMA.
pub const fn message_size(mtype: MessageType) -> u32 {
    match mtype {
        MessageType::Rs => 80,
        MessageType::Ra => 90,
        MessageType::Pbu | MessageType::Pba => 76,
        MessageType::Fmi | MessageType::Fma | MessageType::EFmi | MessageType::EFma => 56,
        MessageType::Bri | MessageType::Bra | MessageType::Us => 56,
    }
}

/// Which kind of path a message travels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LinkClass {
    /// MN interface to MAG, through the access point.
    MnMag,
    MagLma,
    LmaLma,
    MagMag,
}

impl LinkClass {
    pub fn name(self) -> &'static str {
        match self {
            LinkClass::MnMag => "MN-MAG",
            LinkClass::MagLma => "MAG-LMA",
            LinkClass::LmaLma => "LMA-LMA",
            LinkClass::MagMag => "MAG-MAG",
        }
    }
}

impl fmt::Display for LinkClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A typed, sized protocol message. The size and B flag follow from the type.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignalingMessage {
    mtype: MessageType,
    size_bytes: u32,
    src: NodeId,
    dst: NodeId,
    b_flag: bool,
}

impl SignalingMessage {
    pub fn new(mtype: MessageType, src: NodeId, dst: NodeId) -> Self {
        SignalingMessage {
            mtype,
            size_bytes: message_size(mtype),
            src,
            dst,
            // Set only on Update Status; a plain PBU carries B = 0.
            b_flag: mtype == MessageType::Us,
        }
    }

    pub fn mtype(&self) -> MessageType {
        self.mtype
    }

    pub fn size_bytes(&self) -> u32 {
        self.size_bytes
    }

    pub fn src(&self) -> &NodeId {
        &self.src
    }

    pub fn dst(&self) -> &NodeId {
        &self.dst
    }

    pub fn b_flag(&self) -> bool {
        self.b_flag
    }
}
