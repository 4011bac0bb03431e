//! IPv6 prefixes as (128-bit value, length) pairs.

use std::fmt;
use std::net::Ipv6Addr;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrefixError {
    #[error("prefix length {0} outside 1..=128")]
    InvalidLength(u32),
    #[error("malformed prefix `{0}`, expected <ipv6-address>/<length>")]
    Malformed(String),
}

/// An IPv6 prefix. Bits beyond `len` are always zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Prefix {
    bits: u128,
    len: u8,
}

/// Network mask with the top `len` bits set.
#[inline]
pub(crate) fn netmask(len: u8) -> u128 {
    match len {
        0 => 0,
        128.. => u128::MAX,
        n => u128::MAX << (128 - n as u32),
    }
}

#[allow(clippy::len_without_is_empty)]
impl Prefix {
    /// Builds a prefix, clearing any host bits beyond `len`.
    pub fn new(bits: u128, len: u8) -> Result<Self, PrefixError> {
        if !(1..=128).contains(&len) {
            return Err(PrefixError::InvalidLength(len as u32));
        }
        Ok(Prefix {
            bits: bits & netmask(len),
            len,
        })
    }

    pub fn from_addr(addr: Ipv6Addr, len: u8) -> Result<Self, PrefixError> {
        Prefix::new(u128::from(addr), len)
    }

    #[inline]
    pub fn bits(&self) -> u128 {
        self.bits
    }

    #[inline]
    pub fn len(&self) -> u8 {
        self.len
    }

    /// Re-applies the length mask. A no-op for any constructed prefix.
    pub fn normalized(self) -> Self {
        Prefix {
            bits: self.bits & netmask(self.len),
            len: self.len,
        }
    }

    pub fn addr(&self) -> Ipv6Addr {
        Ipv6Addr::from(self.bits)
    }

    /// True if `other` lies inside this prefix (longest-prefix style containment).
    pub fn covers(&self, other: &Prefix) -> bool {
        self.len <= other.len && other.bits & netmask(self.len) == self.bits
    }
}

impl fmt::Display for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.addr(), self.len)
    }
}

impl FromStr for Prefix {
    type Err = PrefixError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (addr, len) = s
            .trim()
            .split_once('/')
            .ok_or_else(|| PrefixError::Malformed(s.to_string()))?;
        let addr: Ipv6Addr = addr
            .parse()
            .map_err(|_| PrefixError::Malformed(s.to_string()))?;
        let len: u32 = len
            .parse()
            .map_err(|_| PrefixError::Malformed(s.to_string()))?;
        if len > 128 {
            return Err(PrefixError::InvalidLength(len));
        }
        Prefix::from_addr(addr, len as u8)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_and_display() {
        let p: Prefix = "2001:db8:1::/48".parse().unwrap();
        assert_eq!(p.len(), 48);
        assert_eq!(p.bits() >> 80, 0x2001_0db8_0001);
        assert_eq!(p.to_string(), "2001:db8:1::/48");
    }

    #[test]
    fn host_bits_are_cleared() {
        let p: Prefix = "2001:db8:1::ff/48".parse().unwrap();
        assert_eq!(p, "2001:db8:1::/48".parse().unwrap());
    }

    #[test]
    fn rejects_bad_lengths() {
        assert_eq!(Prefix::new(0, 0), Err(PrefixError::InvalidLength(0)));
        assert_eq!(Prefix::new(0, 129), Err(PrefixError::InvalidLength(129)));
        assert!(matches!(
            "2001:db8::/200".parse::<Prefix>(),
            Err(PrefixError::InvalidLength(200))
        ));
        assert!(matches!(
            "2001:db8::".parse::<Prefix>(),
            Err(PrefixError::Malformed(_))
        ));
        assert!(Prefix::new(u128::MAX, 128).is_ok());
    }

    #[test]
    fn equality_needs_both_bits_and_length() {
        let a = Prefix::new(0x2001 << 112, 16).unwrap();
        let b = Prefix::new(0x2001 << 112, 32).unwrap();
        assert_eq!(a.bits(), b.bits());
        assert_ne!(a, b);
    }

    #[test]
    fn covers_is_containment() {
        let wide: Prefix = "2001:db8::/32".parse().unwrap();
        let narrow: Prefix = "2001:db8:1::/48".parse().unwrap();
        assert!(wide.covers(&narrow));
        assert!(!narrow.covers(&wide));
    }

    proptest! {
        #[test]
        fn normalizing_is_idempotent(bits in any::<u128>(), len in 1u8..=128) {
            let p = Prefix::new(bits, len).unwrap();
            prop_assert_eq!(p.normalized(), p);
            prop_assert_eq!(p.normalized().normalized(), p.normalized());
            prop_assert_eq!(p.bits() & !netmask(len), 0);
        }

        #[test]
        fn display_parses_back(bits in any::<u128>(), len in 1u8..=128) {
            let p = Prefix::new(bits, len).unwrap();
            prop_assert_eq!(p.to_string().parse::<Prefix>().unwrap(), p);
        }
    }
}
