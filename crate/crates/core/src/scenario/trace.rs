use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::message::{LinkClass, MessageType, NodeId, SignalingMessage};

pub const TRACE_CSV_HEADER: &str = "timestamp_ms,msg_type,size_bytes,src,dst";

/// One delivered message. `timestamp_ms` is the delivery time at `dst`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEvent {
    pub timestamp_ms: f64,
    pub message: SignalingMessage,
    pub link: LinkClass,
}

/// Ordered record of the signaling exchanged during one scenario run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SignalingTrace {
    events: Vec<TraceEvent>,
}

impl SignalingTrace {
    pub fn new() -> Self {
        SignalingTrace::default()
    }

    pub(crate) fn push(&mut self, event: TraceEvent) {
        debug_assert!(self
            .events
            .last()
            .is_none_or(|last| last.timestamp_ms <= event.timestamp_ms));
        self.events.push(event);
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Delivery time of the last message, i.e. when the handover completes.
    pub fn completion_ms(&self) -> f64 {
        self.events.last().map_or(0.0, |e| e.timestamp_ms)
    }

    pub fn count_of(&self, mtype: MessageType) -> usize {
        self.events
            .iter()
            .filter(|e| e.message.mtype() == mtype)
            .count()
    }

    /// Checks that timestamps never decrease and that every reply is
    /// preceded by an unanswered request of the matching type between the
    /// same two nodes.
    pub fn is_well_ordered(&self) -> bool {
        let monotone = self
            .events
            .windows(2)
            .all(|w| w[0].timestamp_ms <= w[1].timestamp_ms);
        let mut open: BTreeMap<(MessageType, NodeId, NodeId), usize> = BTreeMap::new();
        for e in &self.events {
            let m = &e.message;
            match m.mtype().request_of() {
                // Advertisements are also sent unsolicited.
                Some(MessageType::Rs) => {}
                Some(req) => {
                    let key = (req, m.dst().clone(), m.src().clone());
                    match open.get_mut(&key) {
                        Some(n) if *n > 0 => *n -= 1,
                        _ => return false,
                    }
                }
                None => {
                    *open
                        .entry((m.mtype(), m.src().clone(), m.dst().clone()))
                        .or_default() += 1;
                }
            }
        }
        monotone
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(32 * (self.events.len() + 1));
        out.push_str(TRACE_CSV_HEADER);
        out.push('\n');
        for e in &self.events {
            let m = &e.message;
            writeln!(
                out,
                "{:.3},{},{},{},{}",
                e.timestamp_ms,
                m.mtype(),
                m.size_bytes(),
                m.src(),
                m.dst()
            )
            .expect("writing to a String");
        }
        out
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SignalCount {
    pub count: u32,
    pub total_bytes: u64,
}

/// Message counts and byte totals per (link class, message type).
pub fn count_signaling(trace: &SignalingTrace) -> BTreeMap<(LinkClass, MessageType), SignalCount> {
    let mut map: BTreeMap<_, SignalCount> = BTreeMap::new();
    for e in trace.events() {
        let c = map.entry((e.link, e.message.mtype())).or_default();
        c.count += 1;
        c.total_bytes += u64::from(e.message.size_bytes());
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(t: f64, m: MessageType, src: &str, dst: &str, link: LinkClass) -> TraceEvent {
        TraceEvent {
            timestamp_ms: t,
            message: SignalingMessage::new(m, src.into(), dst.into()),
            link,
        }
    }

    #[test]
    fn empty_trace() {
        let t = SignalingTrace::new();
        assert!(count_signaling(&t).is_empty());
        assert_eq!(t.to_csv(), format!("{TRACE_CSV_HEADER}\n"));
        assert_eq!(t.completion_ms(), 0.0);
        assert!(t.is_well_ordered());
    }

    #[test]
    fn counts_and_csv() {
        let mut t = SignalingTrace::new();
        t.push(ev(20.0, MessageType::Us, "MAG1", "LMA", LinkClass::MagLma));
        t.push(ev(40.0, MessageType::Us, "MAG2", "LMA", LinkClass::MagLma));
        let c = count_signaling(&t);
        assert_eq!(
            c[&(LinkClass::MagLma, MessageType::Us)],
            SignalCount {
                count: 2,
                total_bytes: 112
            }
        );
        assert_eq!(
            t.to_csv(),
            "timestamp_ms,msg_type,size_bytes,src,dst\n20.000,US,56,MAG1,LMA\n40.000,US,56,MAG2,LMA\n"
        );
    }

    #[test]
    fn ack_without_request_is_rejected() {
        let mut t = SignalingTrace::new();
        t.push(ev(20.0, MessageType::Pba, "LMA", "MAG1", LinkClass::MagLma));
        assert!(!t.is_well_ordered());

        let mut t = SignalingTrace::new();
        t.push(ev(20.0, MessageType::Pbu, "MAG1", "LMA", LinkClass::MagLma));
        t.push(ev(40.0, MessageType::Pba, "LMA", "MAG1", LinkClass::MagLma));
        assert!(t.is_well_ordered());
    }
}
