//! Deterministic execution of the flow-mobility scenarios.
//!
//! Each [`ScenarioCase`] sets up an MN with three flows (X, Y, Z), moves Y
//! and Z to other interfaces and records the resulting signaling together
//! with binding-cache snapshots before and after the move.

mod handover;
mod network;
mod trace;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::cache::{FlowId, IfId, MnId};
use crate::hnbp::{HnbpError, HnbpMode};
use crate::message::NodeId;
use crate::prefix::Prefix;
use crate::technique::{Environment, Technique};
use crate::topology::{Topology, TopologyError};

pub use handover::{
    handover_components, handover_components_with, handover_legs, FormulaMode, HandoverComponents,
    Leg,
};
pub use network::{CacheSnapshot, LmaSnapshot, MagSnapshot};
pub use trace::{count_signaling, SignalCount, SignalingTrace, TraceEvent, TRACE_CSV_HEADER};

use network::Network;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ScenarioCase {
    AllActiveShared,
    AllActiveDiff,
    PowerOnShared,
    PowerOnDiff,
    PowerOnSharedBlock,
    PowerOnDiffBlock,
    AllActiveSharedMag,
    AllActiveDiffMag,
    PowerOnSharedMag,
    PowerOnDiffMag,
    PowerOnSharedMagBlock,
    PowerOnDiffMagBlock,
}

impl ScenarioCase {
    pub const ALL: [ScenarioCase; 12] = [
        ScenarioCase::AllActiveShared,
        ScenarioCase::AllActiveDiff,
        ScenarioCase::PowerOnShared,
        ScenarioCase::PowerOnDiff,
        ScenarioCase::PowerOnSharedBlock,
        ScenarioCase::PowerOnDiffBlock,
        ScenarioCase::AllActiveSharedMag,
        ScenarioCase::AllActiveDiffMag,
        ScenarioCase::PowerOnSharedMag,
        ScenarioCase::PowerOnDiffMag,
        ScenarioCase::PowerOnSharedMagBlock,
        ScenarioCase::PowerOnDiffMagBlock,
    ];

    pub fn environment(self) -> Environment {
        use ScenarioCase::*;
        match self {
            AllActiveShared | AllActiveDiff | PowerOnShared | PowerOnDiff | PowerOnSharedBlock
            | PowerOnDiffBlock => Environment::SingleLma,
            _ => Environment::MultiLma,
        }
    }

    /// The evaluated technique this case corresponds to. The two all-active
    /// shared cases need no signaling and have none.
    pub fn technique(self) -> Option<Technique> {
        use ScenarioCase::*;
        Some(match self {
            AllActiveShared | AllActiveSharedMag => return None,
            AllActiveDiff => Technique::ActiveDiff,
            PowerOnShared => Technique::NotactiveCom,
            PowerOnDiff => Technique::NotactiveDiff,
            PowerOnSharedBlock => Technique::NotactiveComBlock,
            PowerOnDiffBlock => Technique::NotactiveDiffBlock,
            AllActiveDiffMag => Technique::Active2Mag,
            PowerOnSharedMag => Technique::Notactive1Mag,
            PowerOnDiffMag => Technique::Notactive2Mag,
            PowerOnSharedMagBlock => Technique::Notactive1MagBlock,
            PowerOnDiffMagBlock => Technique::Notactive2MagBlock,
        })
    }

    pub fn is_block(self) -> bool {
        use ScenarioCase::*;
        matches!(
            self,
            PowerOnSharedBlock | PowerOnDiffBlock | PowerOnSharedMagBlock | PowerOnDiffMagBlock
        )
    }

    pub fn is_power_on(self) -> bool {
        use ScenarioCase::*;
        !matches!(
            self,
            AllActiveShared | AllActiveDiff | AllActiveSharedMag | AllActiveDiffMag
        )
    }

    pub fn name(self) -> &'static str {
        use ScenarioCase::*;
        match self {
            AllActiveShared => "all-active-shared",
            AllActiveDiff => "all-active-diff",
            PowerOnShared => "power-on-shared",
            PowerOnDiff => "power-on-diff",
            PowerOnSharedBlock => "power-on-shared-block",
            PowerOnDiffBlock => "power-on-diff-block",
            AllActiveSharedMag => "all-active-shared-mag",
            AllActiveDiffMag => "all-active-diff-mag",
            PowerOnSharedMag => "power-on-shared-mag",
            PowerOnDiffMag => "power-on-diff-mag",
            PowerOnSharedMagBlock => "power-on-shared-mag-block",
            PowerOnDiffMagBlock => "power-on-diff-mag-block",
        }
    }
}

impl fmt::Display for ScenarioCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioCase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let wanted = s.trim().to_ascii_lowercase().replace('_', "-");
        ScenarioCase::ALL
            .into_iter()
            .find(|c| c.name() == wanted)
            .ok_or_else(|| format!("unknown scenario case `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterfaceSpec {
    pub if_id: IfId,
    pub mag: NodeId,
    /// Attached before the scenario starts.
    pub active: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowSpec {
    pub flow_id: FlowId,
    pub initial_if: IfId,
    pub prefix: Prefix,
    pub owning_lma: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowMove {
    pub flow_id: FlowId,
    pub target_if: IfId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioSpec {
    pub environment: Environment,
    pub case: ScenarioCase,
    pub mn_id: MnId,
    pub interfaces: Vec<InterfaceSpec>,
    pub flows: Vec<FlowSpec>,
    /// Processed in order; the first powered-on interface attaches first.
    pub moves: Vec<FlowMove>,
    pub hnbp_mode: HnbpMode,
    /// Follow a relocation with an FMI/FMA removing the flow state at the old MAG.
    pub include_cleanup: bool,
    /// Revoke moved prefixes at their source MAG with BRI/BRA.
    pub revoke_moved_prefixes: bool,
    /// Prefix set the MAGs last received as block prefix, if it differs from
    /// the LMA's current assignment (a stale distribution).
    pub distributed_prefixes: Option<Vec<Prefix>>,
}

/// `2001:db8:<n>::/48`
pub fn example_prefix(n: u16) -> Prefix {
    Prefix::new((0x2001_0db8_u128 << 96) | (u128::from(n) << 80), 48).expect("/48 is valid")
}

impl ScenarioSpec {
    /// The canonical setup for `case`: flows X, Y, Z, with Y and Z
    /// moving.
    pub fn canonical(case: ScenarioCase) -> Self {
        use ScenarioCase::*;
        let environment = case.environment();
        let multi = environment == Environment::MultiLma;
        let shared_mag = matches!(
            case,
            AllActiveSharedMag | PowerOnSharedMag | PowerOnSharedMagBlock
        );
        let shared_prefix = matches!(case, AllActiveShared | PowerOnShared | PowerOnSharedBlock);

        let iface = |n: u16, mag: &str, active: bool| InterfaceSpec {
            if_id: IfId(n),
            mag: NodeId::from(mag),
            active,
        };
        let all_active = !case.is_power_on();
        let third_mag = if shared_mag { "MAG1" } else { "MAG2" };
        let interfaces = vec![
            iface(1, "MAG1", true),
            iface(2, "MAG1", all_active),
            iface(3, third_mag, all_active),
        ];

        let flow = |id: &str, n: u16, p: u16, lma: &str| FlowSpec {
            flow_id: FlowId::from(id),
            initial_if: IfId(if all_active { n } else { 1 }),
            prefix: example_prefix(if shared_prefix { 1 } else { p }),
            owning_lma: NodeId::from(lma),
        };
        let (lma_xy, lma_z) = if multi {
            ("LMA1", "LMA2")
        } else {
            ("LMA", "LMA")
        };
        let flows = vec![
            flow("X", 1, 1, lma_xy),
            flow("Y", 2, 2, lma_xy),
            flow("Z", 3, 3, lma_z),
        ];

        let (y_to, z_to) = if all_active { (1, 1) } else { (2, 3) };
        let moves = vec![
            FlowMove {
                flow_id: FlowId::from("Y"),
                target_if: IfId(y_to),
            },
            FlowMove {
                flow_id: FlowId::from("Z"),
                target_if: IfId(z_to),
            },
        ];

        ScenarioSpec {
            environment,
            case,
            mn_id: MnId("MN".into()),
            interfaces,
            flows,
            moves,
            hnbp_mode: HnbpMode::default(),
            include_cleanup: true,
            revoke_moved_prefixes: case == PowerOnDiff,
            distributed_prefixes: None,
        }
    }

    pub fn with_hnbp_mode(mut self, mode: HnbpMode) -> Self {
        self.hnbp_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.case.environment() != self.environment {
            return Err(ScenarioError::UnsupportedCase {
                environment: self.environment,
                case: self.case,
            });
        }
        let invalid = |m: String| Err(ScenarioError::InvalidSpec(m));
        let iface = |id: IfId| self.interfaces.iter().find(|i| i.if_id == id);
        for f in &self.flows {
            match iface(f.initial_if) {
                Some(i) if i.active => {}
                Some(_) => {
                    return invalid(format!(
                        "flow {} starts on inactive {}",
                        f.flow_id, f.initial_if
                    ))
                }
                None => {
                    return invalid(format!(
                        "flow {} starts on unknown {}",
                        f.flow_id, f.initial_if
                    ))
                }
            }
        }
        let lmas: std::collections::BTreeSet<_> =
            self.flows.iter().map(|f| &f.owning_lma).collect();
        if self.environment == Environment::SingleLma && lmas.len() > 1 {
            return invalid(format!("single-LMA scenario names {} LMAs", lmas.len()));
        }
        for m in &self.moves {
            let Some(f) = self.flows.iter().find(|f| f.flow_id == m.flow_id) else {
                return invalid(format!("move of unknown flow {}", m.flow_id));
            };
            if f.initial_if == m.target_if {
                return invalid(format!("flow {} already on {}", m.flow_id, m.target_if));
            }
            let Some(target) = iface(m.target_if) else {
                return invalid(format!("move to unknown {}", m.target_if));
            };
            // All-active cases move between attached interfaces; power-on cases
            // move onto interfaces that attach during the scenario.
            if target.active == self.case.is_power_on() {
                return Err(ScenarioError::UnsupportedCase {
                    environment: self.environment,
                    case: self.case,
                });
            }
        }
        Ok(())
    }
}

/// Signaling trace and cache state around one scenario run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRun {
    pub trace: SignalingTrace,
    pub before: CacheSnapshot,
    pub after: CacheSnapshot,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("case {case} is not defined for the {environment}-LMA environment or its moves")]
    UnsupportedCase {
        environment: Environment,
        case: ScenarioCase,
    },
    #[error("invalid scenario: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Hnbp(#[from] HnbpError),
    #[error("no LMA anchors {mag}, cannot relocate flow {flow}")]
    NoAnchor { flow: FlowId, mag: NodeId },
    /// The stored block prefix rejected some flows; the run completed with
    /// proxy binding registrations for them.
    #[error("block prefix rejected flows {flows:?}; fell back to proxy binding registration")]
    VerificationFailed {
        flows: Vec<FlowId>,
        run: Box<ScenarioRun>,
    },
}

pub fn run_scenario(
    spec: &ScenarioSpec,
    topology: &Topology,
) -> Result<ScenarioRun, ScenarioError> {
    topology.validate()?;
    spec.validate()?;

    let mut net = Network::new(spec, topology);
    if spec.case.is_block() {
        net.distribute_hnbp(spec.distributed_prefixes.as_deref())?;
    }
    let before = net.snapshot();

    for m in &spec.moves {
        if net.is_active(m.target_if) {
            net.active_move(&m.flow_id, m.target_if, spec.include_cleanup)?;
        } else {
            net.power_on_move(
                &m.flow_id,
                m.target_if,
                spec.case.is_block(),
                spec.revoke_moved_prefixes,
            )?;
        }
    }
    net.flush_revocations();

    let after = net.snapshot();
    let fallbacks = std::mem::take(&mut net.fallbacks);
    let run = ScenarioRun {
        trace: net.into_trace(),
        before,
        after,
    };
    if fallbacks.is_empty() {
        Ok(run)
    } else {
        Err(ScenarioError::VerificationFailed {
            flows: fallbacks,
            run: Box::new(run),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::message::{LinkClass, MessageType};

    fn run(case: ScenarioCase) -> ScenarioRun {
        run_scenario(&ScenarioSpec::canonical(case), &Topology::default()).unwrap()
    }

    fn bids(snap: &CacheSnapshot) -> Vec<(String, u16)> {
        ["X", "Y", "Z"]
            .iter()
            .map(|f| {
                let (_, s) = snap.flow(&FlowId::from(*f)).unwrap();
                (f.to_string(), s.bid)
            })
            .collect()
    }

    #[test]
    fn all_active_shared_needs_no_signaling() {
        let r = run(ScenarioCase::AllActiveShared);
        assert!(r.trace.is_empty());
        assert!(bids(&r.after).iter().all(|(_, b)| *b == 1));
    }

    #[test]
    fn power_on_shared_registers_both_interfaces() {
        let r = run(ScenarioCase::PowerOnShared);
        assert_eq!(r.trace.count_of(MessageType::Pbu), 2);
        assert_eq!(r.trace.count_of(MessageType::Pba), 2);
        assert_eq!(r.trace.count_of(MessageType::Rs), 2);
        assert_eq!(r.trace.count_of(MessageType::Ra), 2);
        let got: Vec<u16> = bids(&r.after).into_iter().map(|(_, b)| b).collect();
        assert_eq!(got, vec![1, 2, 3]);
        // Every binding keeps the shared prefix.
        let lma = &r.after.lmas[&NodeId::from("LMA")];
        assert!(lma
            .bindings
            .iter()
            .all(|b| b.prefixes == vec![example_prefix(1)]));
    }

    #[test]
    fn power_on_diff_moves_prefixes_to_new_bindings() {
        let r = run(ScenarioCase::PowerOnDiff);
        let lma = &r.after.lmas[&NodeId::from("LMA")];
        let by_bid: Vec<(u16, Vec<Prefix>)> = lma
            .bindings
            .iter()
            .map(|b| (b.bid, b.prefixes.clone()))
            .collect();
        assert_eq!(
            by_bid,
            vec![
                (1, vec![example_prefix(1)]),
                (2, vec![example_prefix(2)]),
                (3, vec![example_prefix(3)]),
            ]
        );
        assert_eq!(r.trace.count_of(MessageType::Bri), 2);
        let mag1 = &r.after.mags[&NodeId::from("MAG1")];
        assert!(!mag1.routes.contains(&(IfId(1), example_prefix(2))));
    }

    #[test]
    fn block_cases_send_update_status_and_keep_bid() {
        for case in [
            ScenarioCase::PowerOnDiffBlock,
            ScenarioCase::PowerOnSharedMagBlock,
        ] {
            let r = run(case);
            assert_eq!(r.trace.count_of(MessageType::Us), 2, "{case}");
            assert_eq!(r.trace.count_of(MessageType::Pbu), 0, "{case}");
            assert!(r
                .trace
                .events()
                .iter()
                .filter(|e| e.message.mtype() == MessageType::Us)
                .all(|e| e.message.b_flag() && e.link == LinkClass::MagLma));
            assert!(bids(&r.after).iter().all(|(_, b)| *b == 1), "{case}");
            let (_, z) = r.after.flow(&FlowId::from("Z")).unwrap();
            assert_eq!(z.if_id, IfId(3));
        }
    }

    #[test]
    fn multi_lma_relocation_goes_through_anchor_lma() {
        let r = run(ScenarioCase::AllActiveDiffMag);
        let first = &r.trace.events()[0];
        assert_eq!(first.message.mtype(), MessageType::EFmi);
        assert_eq!(first.message.src().as_str(), "LMA2");
        assert_eq!(first.message.dst().as_str(), "LMA1");
        let (owner, z) = r.after.flow(&FlowId::from("Z")).unwrap();
        assert_eq!(owner.as_str(), "LMA2");
        assert_eq!((z.if_id, z.bid), (IfId(1), 1));
    }

    #[test]
    fn cleanup_can_be_dropped() {
        let mut spec = ScenarioSpec::canonical(ScenarioCase::AllActiveDiff);
        spec.include_cleanup = false;
        let r = run_scenario(&spec, &Topology::default()).unwrap();
        assert_eq!(r.trace.len(), 2);
        assert_eq!(r.trace.completion_ms(), 40.0);
    }

    #[test]
    fn stale_block_prefix_falls_back_to_registration() {
        let mut spec = ScenarioSpec::canonical(ScenarioCase::PowerOnDiffBlock);
        spec.distributed_prefixes = Some(vec![example_prefix(1), example_prefix(2)]);
        match run_scenario(&spec, &Topology::default()) {
            Err(ScenarioError::VerificationFailed { flows, run }) => {
                assert_eq!(flows, vec![FlowId::from("Z")]);
                assert_eq!(run.trace.count_of(MessageType::Us), 1);
                assert_eq!(run.trace.count_of(MessageType::Pbu), 1);
                assert_eq!(run.trace.count_of(MessageType::Pba), 1);
                let (_, z) = run.after.flow(&FlowId::from("Z")).unwrap();
                assert_eq!((z.if_id, z.bid, z.prefix), (IfId(3), 3, example_prefix(3)));
            }
            other => panic!("expected fallback, got {other:?}"),
        }
    }

    #[test]
    fn rejects_mismatched_environment_and_bad_moves() {
        let mut spec = ScenarioSpec::canonical(ScenarioCase::PowerOnShared);
        spec.environment = Environment::MultiLma;
        assert!(matches!(
            run_scenario(&spec, &Topology::default()),
            Err(ScenarioError::UnsupportedCase { .. })
        ));

        let mut spec = ScenarioSpec::canonical(ScenarioCase::PowerOnShared);
        spec.moves[0].target_if = IfId(1);
        assert!(matches!(
            run_scenario(&spec, &Topology::default()),
            Err(ScenarioError::InvalidSpec(_))
        ));

        let mut spec = ScenarioSpec::canonical(ScenarioCase::PowerOnShared);
        spec.moves[0].flow_id = FlowId::from("W");
        assert!(matches!(
            run_scenario(&spec, &Topology::default()),
            Err(ScenarioError::InvalidSpec(_))
        ));

        // Moving onto an interface that is already up is not a power-on case.
        let mut spec = ScenarioSpec::canonical(ScenarioCase::PowerOnShared);
        spec.interfaces[1].active = true;
        assert!(matches!(
            run_scenario(&spec, &Topology::default()),
            Err(ScenarioError::UnsupportedCase { .. })
        ));

        let bad = Topology {
            t_am: -1.0,
            ..Topology::default()
        };
        assert!(matches!(
            run_scenario(&ScenarioSpec::canonical(ScenarioCase::PowerOnShared), &bad),
            Err(ScenarioError::Topology(_))
        ));
    }

    #[test]
    fn case_names_round_trip() {
        for c in ScenarioCase::ALL {
            assert_eq!(c.name().parse::<ScenarioCase>().unwrap(), c);
        }
    }
}
