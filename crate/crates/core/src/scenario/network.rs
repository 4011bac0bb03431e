//! LMA and MAG state machines driven by a scenario.

use std::collections::{BTreeMap, BTreeSet};

use crate::cache::{Bid, BindingCacheEntry, FlowId, IfFlowState, IfId, MnId};
use crate::hnbp::{self, AttachAction, HnbpMode, HomeNetworkBlockPrefix};
use crate::message::{LinkClass, MessageType, NodeId, SignalingMessage};
use crate::prefix::Prefix;
use crate::topology::Topology;

use super::trace::{SignalingTrace, TraceEvent};
use super::{ScenarioError, ScenarioSpec};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LmaSnapshot {
    pub bindings: Vec<BindingCacheEntry>,
    pub if_flows: Vec<IfFlowState>,
    /// Last block prefix generated for the MN, if any.
    pub hnbp: Option<HomeNetworkBlockPrefix>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MagSnapshot {
    pub routes: BTreeSet<(IfId, Prefix)>,
    /// Block prefixes received from each LMA.
    pub stored_hnbp: BTreeMap<NodeId, HomeNetworkBlockPrefix>,
}

/// Binding state of every LMA and MAG at one instant.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CacheSnapshot {
    pub lmas: BTreeMap<NodeId, LmaSnapshot>,
    pub mags: BTreeMap<NodeId, MagSnapshot>,
}

impl CacheSnapshot {
    /// The LMA holding the flow and its if-flow entry.
    pub fn flow(&self, flow: &FlowId) -> Option<(&NodeId, &IfFlowState)> {
        self.lmas.iter().find_map(|(id, lma)| {
            lma.if_flows
                .iter()
                .find(|s| &s.flow_id == flow)
                .map(|s| (id, s))
        })
    }

    /// Number of LMAs holding if-flow state for `flow`.
    pub fn owners_of(&self, flow: &FlowId) -> usize {
        self.lmas
            .values()
            .filter(|l| l.if_flows.iter().any(|s| &s.flow_id == flow))
            .count()
    }

    pub fn flow_ids(&self) -> BTreeSet<FlowId> {
        self.lmas
            .values()
            .flat_map(|l| l.if_flows.iter().map(|s| s.flow_id.clone()))
            .collect()
    }
}

struct PendingRevocation {
    lma: NodeId,
    mag: NodeId,
    if_id: IfId,
    prefix: Prefix,
}

pub(super) struct Network<'a> {
    topology: &'a Topology,
    mn: MnId,
    hnbp_mode: HnbpMode,
    interfaces: BTreeMap<IfId, (NodeId, bool)>,
    state: CacheSnapshot,
    trace: SignalingTrace,
    clock: f64,
    revocations: Vec<PendingRevocation>,
    pub(super) fallbacks: Vec<FlowId>,
}

impl<'a> Network<'a> {
    pub(super) fn new(spec: &ScenarioSpec, topology: &'a Topology) -> Self {
        let mut state = CacheSnapshot::default();
        let interfaces: BTreeMap<IfId, (NodeId, bool)> = spec
            .interfaces
            .iter()
            .map(|i| (i.if_id, (i.mag.clone(), i.active)))
            .collect();
        for (mag, _) in interfaces.values() {
            state.mags.entry(mag.clone()).or_default();
        }
        for f in &spec.flows {
            let mag = interfaces[&f.initial_if].0.clone();
            let lma = state.lmas.entry(f.owning_lma.clone()).or_default();
            let bid = f.initial_if.0 as Bid;
            upsert_binding(
                lma,
                &spec.mn_id,
                f.initial_if,
                bid,
                f.prefix,
                &mag,
                &f.owning_lma,
            );
            lma.if_flows.push(IfFlowState {
                flow_id: f.flow_id.clone(),
                if_id: f.initial_if,
                bid,
                prefix: f.prefix,
            });
            state
                .mags
                .get_mut(&mag)
                .expect("registered above")
                .routes
                .insert((f.initial_if, f.prefix));
        }
        Network {
            topology,
            mn: spec.mn_id.clone(),
            hnbp_mode: spec.hnbp_mode,
            interfaces,
            state,
            trace: SignalingTrace::new(),
            clock: 0.0,
            revocations: Vec::new(),
            fallbacks: Vec::new(),
        }
    }

    pub(super) fn snapshot(&self) -> CacheSnapshot {
        self.state.clone()
    }

    pub(super) fn into_trace(self) -> SignalingTrace {
        self.trace
    }

    pub(super) fn is_active(&self, if_id: IfId) -> bool {
        self.interfaces.get(&if_id).is_some_and(|(_, a)| *a)
    }

    fn mag_of(&self, if_id: IfId) -> NodeId {
        self.interfaces[&if_id].0.clone()
    }

    fn send(&mut self, mtype: MessageType, src: &NodeId, dst: &NodeId, link: LinkClass) {
        self.clock += self.delay(mtype, link);
        self.record(self.clock, mtype, src, dst, link);
    }

    fn record(&mut self, at: f64, mtype: MessageType, src: &NodeId, dst: &NodeId, link: LinkClass) {
        self.trace.push(TraceEvent {
            timestamp_ms: at,
            message: SignalingMessage::new(mtype, src.clone(), dst.clone()),
            link,
        });
    }

    fn delay(&self, mtype: MessageType, link: LinkClass) -> f64 {
        match (link, mtype) {
            // The L2 attachment trigger is instantaneous.
            (LinkClass::MnMag, MessageType::Rs) => 0.0,
            (LinkClass::MnMag, _) => self.topology.radio_delay(),
            (LinkClass::MagLma, _) => self.topology.t_am,
            (LinkClass::LmaLma, _) => self.topology.t_pn,
            (LinkClass::MagMag, _) => self.topology.t_am,
        }
    }

    fn flow_entry(&self, flow: &FlowId) -> Result<(NodeId, IfFlowState), ScenarioError> {
        self.state
            .flow(flow)
            .map(|(l, s)| (l.clone(), s.clone()))
            .ok_or_else(|| ScenarioError::InvalidSpec(format!("unknown flow {flow}")))
    }

    fn lma_mut(&mut self, lma: &NodeId) -> &mut LmaSnapshot {
        self.state
            .lmas
            .get_mut(lma)
            .expect("flow owners are registered")
    }

    fn mag_mut(&mut self, mag: &NodeId) -> &mut MagSnapshot {
        self.state
            .mags
            .get_mut(mag)
            .expect("interface MAGs are registered")
    }

    /// Generates each LMA's block prefix and hands it to every MAG. The
    /// distribution itself carries no signaling cost.
    pub(super) fn distribute_hnbp(
        &mut self,
        override_set: Option<&[Prefix]>,
    ) -> Result<(), ScenarioError> {
        let lmas: Vec<NodeId> = self.state.lmas.keys().cloned().collect();
        for lma in lmas {
            let prefixes: Vec<Prefix> = match override_set {
                Some(p) => p.to_vec(),
                None => assigned_prefixes(&self.state.lmas[&lma]),
            };
            let generation = self.state.lmas[&lma]
                .hnbp
                .as_ref()
                .map_or(1, |h| h.generation + 1);
            let block = hnbp::generate_hnbp(&prefixes, self.hnbp_mode)?.with_generation(generation);
            self.lma_mut(&lma).hnbp = Some(block.clone());
            for mag in self.state.mags.values_mut() {
                mag.stored_hnbp.insert(lma.clone(), block.clone());
            }
        }
        Ok(())
    }

    /// Moves a flow to an interface that is already attached.
    pub(super) fn active_move(
        &mut self,
        flow: &FlowId,
        target: IfId,
        include_cleanup: bool,
    ) -> Result<(), ScenarioError> {
        let (owner, current) = self.flow_entry(flow)?;
        let target_mag = self.mag_of(target);
        let source_mag = self.mag_of(current.if_id);
        let prefix = current.prefix;

        let target_knows_prefix = self.state.mags[&target_mag]
            .routes
            .iter()
            .any(|(_, p)| *p == prefix);
        let signalled = !target_knows_prefix;
        if signalled {
            if self.anchors(&owner, &target_mag) {
                self.send(MessageType::Fmi, &owner, &target_mag, LinkClass::MagLma);
                self.send(MessageType::Fma, &target_mag, &owner, LinkClass::MagLma);
            } else {
                // The owning LMA has no binding through the target MAG; relay via
                // an LMA that does.
                let relay = self
                    .state
                    .lmas
                    .keys()
                    .find(|l| **l != owner && self.anchors(l, &target_mag))
                    .cloned()
                    .ok_or_else(|| ScenarioError::NoAnchor {
                        flow: flow.clone(),
                        mag: target_mag.clone(),
                    })?;
                self.send(MessageType::EFmi, &owner, &relay, LinkClass::LmaLma);
                self.send(MessageType::EFmi, &relay, &target_mag, LinkClass::MagLma);
                self.send(MessageType::EFma, &target_mag, &relay, LinkClass::MagLma);
                self.send(MessageType::EFma, &relay, &owner, LinkClass::LmaLma);
            }
        }
        self.mag_mut(&target_mag).routes.insert((target, prefix));

        let mn = self.mn.clone();
        let lma = self.lma_mut(&owner);
        let bid = target.0 as Bid;
        upsert_binding(lma, &mn, target, bid, prefix, &target_mag, &owner);
        set_flow(lma, flow, target, bid);

        if signalled && include_cleanup && source_mag != target_mag {
            self.send(MessageType::Fmi, &owner, &source_mag, LinkClass::MagLma);
            self.send(MessageType::Fma, &source_mag, &owner, LinkClass::MagLma);
            self.mag_mut(&source_mag)
                .routes
                .remove(&(current.if_id, prefix));
        }
        Ok(())
    }

    /// Powers on `target`, attaches it and moves the flow onto it.
    pub(super) fn power_on_move(
        &mut self,
        flow: &FlowId,
        target: IfId,
        block: bool,
        revoke: bool,
    ) -> Result<(), ScenarioError> {
        let (owner, current) = self.flow_entry(flow)?;
        let mag = self.mag_of(target);
        let mn_if = target.node();
        let prefix = current.prefix;

        self.send(MessageType::Rs, &mn_if, &mag, LinkClass::MnMag);
        self.interfaces.get_mut(&target).expect("validated").1 = true;

        if block {
            let decision = match self.state.mags[&mag].stored_hnbp.get(&owner) {
                Some(stored) => hnbp::on_attach(stored, &prefix)?.action(),
                None => AttachAction::ProxyBindingRegistration,
            };
            if decision == AttachAction::SendUs {
                self.send(MessageType::Us, &mag, &owner, LinkClass::MagLma);
                let lma = self.lma_mut(&owner);
                if let Some(s) = lma.if_flows.iter_mut().find(|s| &s.flow_id == flow) {
                    s.if_id = target;
                }
                self.mag_mut(&mag).routes.insert((target, prefix));
                self.send(MessageType::Ra, &mag, &mn_if, LinkClass::MnMag);
                return Ok(());
            }
            self.fallbacks.push(flow.clone());
        }

        self.send(MessageType::Pbu, &mag, &owner, LinkClass::MagLma);
        let mn = self.mn.clone();
        let source_mag = self.mag_of(current.if_id);
        let lma = self.lma_mut(&owner);
        let bid = target.0 as Bid;
        upsert_binding(lma, &mn, target, bid, prefix, &mag, &owner);
        set_flow(lma, flow, target, bid);
        // The prefix leaves the source binding once no flow there still uses it.
        let still_used = lma
            .if_flows
            .iter()
            .any(|s| s.bid == current.bid && s.prefix == prefix);
        if !still_used {
            if let Some(src) = lma.bindings.iter_mut().find(|b| b.bid == current.bid) {
                src.prefixes.retain(|p| *p != prefix);
            }
            lma.bindings.retain(|b| !b.prefixes.is_empty());
            if revoke {
                self.revocations.push(PendingRevocation {
                    lma: owner.clone(),
                    mag: source_mag,
                    if_id: current.if_id,
                    prefix,
                });
            }
        }
        self.send(MessageType::Pba, &owner, &mag, LinkClass::MagLma);
        self.mag_mut(&mag).routes.insert((target, prefix));
        self.send(MessageType::Ra, &mag, &mn_if, LinkClass::MnMag);
        Ok(())
    }

    /// Revokes moved prefixes at their source MAGs, all in parallel.
    pub(super) fn flush_revocations(&mut self) {
        if self.revocations.is_empty() {
            return;
        }
        let pending = std::mem::take(&mut self.revocations);
        let t_indication = self.clock + self.topology.t_am;
        let t_ack = t_indication + self.topology.t_am;
        for r in &pending {
            self.record(
                t_indication,
                MessageType::Bri,
                &r.lma,
                &r.mag,
                LinkClass::MagLma,
            );
        }
        for r in &pending {
            self.record(t_ack, MessageType::Bra, &r.mag, &r.lma, LinkClass::MagLma);
            self.mag_mut(&r.mag).routes.remove(&(r.if_id, r.prefix));
        }
        self.clock = t_ack;
    }

    /// Whether `lma` holds a binding of the MN through `mag`.
    fn anchors(&self, lma: &NodeId, mag: &NodeId) -> bool {
        self.state.lmas[lma]
            .bindings
            .iter()
            .any(|b| &b.attached_mag == mag)
    }
}

fn assigned_prefixes(lma: &LmaSnapshot) -> Vec<Prefix> {
    lma.bindings
        .iter()
        .flat_map(|b| b.prefixes.iter().copied())
        .collect()
}

fn upsert_binding(
    lma: &mut LmaSnapshot,
    mn: &MnId,
    if_id: IfId,
    bid: Bid,
    prefix: Prefix,
    mag: &NodeId,
    owner: &NodeId,
) {
    match lma.bindings.iter_mut().find(|b| b.bid == bid) {
        Some(b) => {
            if !b.prefixes.contains(&prefix) {
                b.prefixes.push(prefix);
            }
        }
        None => lma.bindings.push(BindingCacheEntry {
            mn_id: mn.clone(),
            if_id,
            bid,
            prefixes: vec![prefix],
            attached_mag: mag.clone(),
            owning_lma: owner.clone(),
        }),
    }
    lma.bindings.sort_by_key(|b| b.bid);
}

fn set_flow(lma: &mut LmaSnapshot, flow: &FlowId, if_id: IfId, bid: Bid) {
    if let Some(s) = lma.if_flows.iter_mut().find(|s| &s.flow_id == flow) {
        s.if_id = if_id;
        s.bid = bid;
    }
}
