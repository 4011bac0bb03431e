//! Home network block prefix (HNBP): aggregation of an MN's prefixes at the
//! LMA and local prefix authorization at the MAG.
//!
//! Two aggregation modes are supported:
//!
//! * [`HnbpMode::ExactSet`] keeps the set of assigned prefixes; verification
//!   is set membership, so it admits exactly the assigned prefixes.
//! * [`HnbpMode::OrMask`] folds all prefixes into one value with bitwise OR
//!   and verifies a candidate by bit containment, `(c & mask) == c`. This is
//!   lossy: any prefix whose set bits are a subset of the mask passes,
//!   including prefixes that were never assigned.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::prefix::Prefix;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HnbpError {
    #[error("cannot build a block prefix from an empty prefix list")]
    EmptyPrefixList,
    #[error("OR-mask aggregation needs equal prefix lengths, found /{0} and /{1}")]
    MixedPrefixLengths(u8, u8),
    #[error("candidate length /{candidate} differs from block prefix length /{mask}")]
    LengthMismatch { candidate: u8, mask: u8 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum HnbpMode {
    #[default]
    ExactSet,
    OrMask,
}

impl HnbpMode {
    pub fn name(self) -> &'static str {
        match self {
            HnbpMode::ExactSet => "exact-set",
            HnbpMode::OrMask => "or-mask",
        }
    }
}

impl fmt::Display for HnbpMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HnbpMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "exact-set" | "exactset" | "exact" | "set" => Ok(HnbpMode::ExactSet),
            "or-mask" | "ormask" | "or" | "mask" => Ok(HnbpMode::OrMask),
            other => Err(format!("unknown HNBP mode `{other}` (exact-set|or-mask)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Aggregate {
    ExactSet(BTreeSet<Prefix>),
    OrMask(Prefix),
}

/// The block prefix an LMA distributes to MAGs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HomeNetworkBlockPrefix {
    aggregate: Aggregate,
    /// Logical time of generation; bumped by the LMA on every regeneration.
    pub generation: u64,
}

impl HomeNetworkBlockPrefix {
    pub fn mode(&self) -> HnbpMode {
        match self.aggregate {
            Aggregate::ExactSet(_) => HnbpMode::ExactSet,
            Aggregate::OrMask(_) => HnbpMode::OrMask,
        }
    }

    pub fn aggregate(&self) -> &Aggregate {
        &self.aggregate
    }

    /// The OR mask, in [`HnbpMode::OrMask`].
    pub fn mask(&self) -> Option<Prefix> {
        match &self.aggregate {
            Aggregate::OrMask(m) => Some(*m),
            Aggregate::ExactSet(_) => None,
        }
    }

    /// The member set, in [`HnbpMode::ExactSet`].
    pub fn members(&self) -> Option<&BTreeSet<Prefix>> {
        match &self.aggregate {
            Aggregate::ExactSet(s) => Some(s),
            Aggregate::OrMask(_) => None,
        }
    }

    pub fn with_generation(mut self, generation: u64) -> Self {
        self.generation = generation;
        self
    }
}

impl fmt::Display for HomeNetworkBlockPrefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.aggregate {
            Aggregate::OrMask(m) => write!(f, "or{{{m}}}"),
            Aggregate::ExactSet(s) => {
                f.write_str("set{")?;
                for (i, p) in s.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{p}")?;
                }
                f.write_str("}")
            }
        }
    }
}

/// Aggregates an MN's prefixes into a block prefix.
///
/// In OR-mask mode the walk keeps the running aggregate when the next prefix
/// repeats the previous one and ORs it in otherwise, so a list of identical
/// prefixes yields that prefix.
pub fn generate_hnbp(
    prefixes: &[Prefix],
    mode: HnbpMode,
) -> Result<HomeNetworkBlockPrefix, HnbpError> {
    let (first, rest) = prefixes.split_first().ok_or(HnbpError::EmptyPrefixList)?;
    let aggregate = match mode {
        HnbpMode::ExactSet => Aggregate::ExactSet(prefixes.iter().copied().collect()),
        HnbpMode::OrMask => {
            let mut previous = *first;
            let mut block = first.bits();
            for next in rest {
                if next.len() != first.len() {
                    return Err(HnbpError::MixedPrefixLengths(first.len(), next.len()));
                }
                if *next != previous {
                    block |= next.bits();
                }
                previous = *next;
            }
            Aggregate::OrMask(
                Prefix::new(block, first.len()).expect("length taken from a valid prefix"),
            )
        }
    };
    Ok(HomeNetworkBlockPrefix {
        aggregate,
        generation: 0,
    })
}

/// Checks a newly attached flow's prefix against a stored block prefix.
pub fn verify_prefix(hnbp: &HomeNetworkBlockPrefix, candidate: &Prefix) -> Result<bool, HnbpError> {
    match &hnbp.aggregate {
        Aggregate::ExactSet(members) => Ok(members.contains(candidate)),
        Aggregate::OrMask(mask) => {
            if candidate.len() != mask.len() {
                return Err(HnbpError::LengthMismatch {
                    candidate: candidate.len(),
                    mask: mask.len(),
                });
            }
            Ok(candidate.bits() & mask.bits() == candidate.bits())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttachAction {
    /// Prefix verified locally; the MAG only reports the new interface.
    SendUs,
    /// Verification failed; a full proxy binding registration is needed.
    ProxyBindingRegistration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AttachDecision {
    action: AttachAction,
    verified_prefix: Option<Prefix>,
}

impl AttachDecision {
    pub fn action(&self) -> AttachAction {
        self.action
    }

    /// Present exactly when the action is [`AttachAction::SendUs`].
    pub fn verified_prefix(&self) -> Option<Prefix> {
        self.verified_prefix
    }
}

/// MAG decision when an interface of an MN attaches carrying `flow_prefix`.
pub fn on_attach(
    hnbp: &HomeNetworkBlockPrefix,
    flow_prefix: &Prefix,
) -> Result<AttachDecision, HnbpError> {
    Ok(if verify_prefix(hnbp, flow_prefix)? {
        AttachDecision {
            action: AttachAction::SendUs,
            verified_prefix: Some(*flow_prefix),
        }
    } else {
        AttachDecision {
            action: AttachAction::ProxyBindingRegistration,
            verified_prefix: None,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pref(s: &str) -> Prefix {
        s.parse().unwrap()
    }

    /// Brute-force OR oracle working on hextets rather than on u128.
    fn or_oracle(prefixes: &[Prefix]) -> u128 {
        let mut hextets = [0u16; 8];
        for p in prefixes {
            for (i, h) in p.addr().segments().iter().enumerate() {
                hextets[i] |= h;
            }
        }
        u128::from(std::net::Ipv6Addr::from(hextets))
    }

    #[test]
    fn identical_prefixes_give_that_prefix() {
        let p = pref("2001:db8:1::/48");
        let h = generate_hnbp(&[p, p], HnbpMode::OrMask).unwrap();
        assert_eq!(h.mask(), Some(p));
    }

    #[test]
    fn or_of_three() {
        let ps = [
            pref("2001:db8:1::/48"),
            pref("2001:db8:2::/48"),
            pref("2001:db8:3::/48"),
        ];
        let h = generate_hnbp(&ps, HnbpMode::OrMask).unwrap();
        assert_eq!(h.mask().unwrap().bits(), or_oracle(&ps));
        assert_eq!(h.mask(), Some(pref("2001:db8:3::/48")));
    }

    #[test]
    fn exact_set_members() {
        let ps = [pref("2001:db8:1::/48"), pref("2001:db8:2::/48")];
        let h = generate_hnbp(&ps, HnbpMode::ExactSet).unwrap();
        assert_eq!(h.members().unwrap(), &ps.iter().copied().collect());
        assert!(!verify_prefix(&h, &pref("2001:db8:3::/48")).unwrap());
    }

    #[test]
    fn or_mask_verification() {
        let ps = [
            pref("2001:db8:1::/48"),
            pref("2001:db8:2::/48"),
            pref("2001:db8:3::/48"),
        ];
        let h = generate_hnbp(&ps, HnbpMode::OrMask).unwrap();
        assert!(verify_prefix(&h, &pref("2001:db8:2::/48")).unwrap());
        assert!(!verify_prefix(&h, &pref("2001:db8:4::/48")).unwrap());
        assert_eq!(
            verify_prefix(&h, &pref("2001:db8::/32")),
            Err(HnbpError::LengthMismatch {
                candidate: 32,
                mask: 48
            })
        );
    }

    #[test]
    fn errors() {
        assert_eq!(
            generate_hnbp(&[], HnbpMode::ExactSet),
            Err(HnbpError::EmptyPrefixList)
        );
        assert_eq!(
            generate_hnbp(
                &[pref("2001:db8:1::/48"), pref("2001:db8::/32")],
                HnbpMode::OrMask
            ),
            Err(HnbpError::MixedPrefixLengths(48, 32))
        );
        // Mixed lengths are fine for an exact set.
        assert!(generate_hnbp(
            &[pref("2001:db8:1::/48"), pref("2001:db8::/32")],
            HnbpMode::ExactSet
        )
        .is_ok());
    }

    #[test]
    fn attach_decisions() {
        let ps = [
            pref("2001:db8:1::/48"),
            pref("2001:db8:2::/48"),
            pref("2001:db8:3::/48"),
        ];
        let h = generate_hnbp(&ps, HnbpMode::OrMask).unwrap();
        let d = on_attach(&h, &ps[1]).unwrap();
        assert_eq!(d.action(), AttachAction::SendUs);
        assert_eq!(d.verified_prefix(), Some(ps[1]));

        let single = generate_hnbp(&ps[..1], HnbpMode::OrMask).unwrap();
        let d = on_attach(&single, &ps[0]).unwrap();
        assert_eq!(d.action(), AttachAction::SendUs);
        assert_eq!(d.verified_prefix(), Some(ps[0]));

        let two = generate_hnbp(&ps[..2], HnbpMode::OrMask).unwrap();
        let d = on_attach(&two, &pref("2001:db8:ff00::/48")).unwrap();
        assert_eq!(d.action(), AttachAction::ProxyBindingRegistration);
        assert_eq!(d.verified_prefix(), None);
    }

    fn same_len_prefixes() -> impl Strategy<Value = Vec<Prefix>> {
        (1u8..=128).prop_flat_map(|len| {
            prop::collection::vec(any::<u128>(), 1..8).prop_map(move |v| {
                v.into_iter()
                    .map(|b| Prefix::new(b, len).unwrap())
                    .collect()
            })
        })
    }

    proptest! {
        #[test]
        fn order_independent(mut ps in same_len_prefixes(), seed in any::<u64>()) {
            let a = generate_hnbp(&ps, HnbpMode::OrMask).unwrap();
            let s = generate_hnbp(&ps, HnbpMode::ExactSet).unwrap();
            let k = ps.len();
            ps.rotate_left((seed as usize) % k);
            ps.reverse();
            prop_assert_eq!(generate_hnbp(&ps, HnbpMode::OrMask).unwrap(), a);
            prop_assert_eq!(generate_hnbp(&ps, HnbpMode::ExactSet).unwrap(), s);
        }

        #[test]
        fn idempotent_on_duplication(ps in same_len_prefixes()) {
            let doubled: Vec<Prefix> = ps.iter().chain(ps.iter()).copied().collect();
            for mode in [HnbpMode::OrMask, HnbpMode::ExactSet] {
                prop_assert_eq!(
                    generate_hnbp(&doubled, mode).unwrap(),
                    generate_hnbp(&ps, mode).unwrap()
                );
            }
        }

        #[test]
        fn or_mask_matches_oracle(ps in same_len_prefixes()) {
            let h = generate_hnbp(&ps, HnbpMode::OrMask).unwrap();
            prop_assert_eq!(h.mask().unwrap().bits(), or_oracle(&ps));
        }
    }
}
