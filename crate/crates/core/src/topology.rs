//! Hop counts and per-link delays of the evaluated network.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TopologyError {
    #[error("hop count `{0}` must be at least 1")]
    ZeroHops(&'static str),
    #[error("delay `{name}` must be positive and finite, got {value}")]
    BadDelay { name: &'static str, value: f64 },
}

/// Hop counts and mean one-way delays (milliseconds).
///
/// `t_mr + t_ra` is the radio leg between an MN interface and its MAG,
/// `t_am` a MAG-LMA message and `t_pn` an LMA-LMA message.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Topology {
    pub n_mn_mag: u32,
    pub n_mag_lma: u32,
    pub n_mag_mag: u32,
    pub n_lma_lma: u32,
    pub t_mr: f64,
    pub t_ra: f64,
    pub t_am: f64,
    pub t_pn: f64,
}

impl Default for Topology {
    fn default() -> Self {
        Topology {
            n_mn_mag: 2,
            n_mag_lma: 2,
            n_mag_mag: 1,
            // Mirrors MAG-LMA.
            n_lma_lma: 2,
            t_mr: 10.0,
            t_ra: 2.0,
            t_am: 20.0,
            t_pn: 20.0,
        }
    }
}

impl Topology {
    pub fn validate(&self) -> Result<(), TopologyError> {
        for (name, hops) in [
            ("n_mn_mag", self.n_mn_mag),
            ("n_mag_lma", self.n_mag_lma),
            ("n_mag_mag", self.n_mag_mag),
            ("n_lma_lma", self.n_lma_lma),
        ] {
            if hops == 0 {
                return Err(TopologyError::ZeroHops(name));
            }
        }
        for (name, value) in [
            ("t_mr", self.t_mr),
            ("t_ra", self.t_ra),
            ("t_am", self.t_am),
            ("t_pn", self.t_pn),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(TopologyError::BadDelay { name, value });
            }
        }
        Ok(())
    }

    /// Delay of one message over the radio leg.
    #[inline]
    pub fn radio_delay(&self) -> f64 {
        self.t_mr + self.t_ra
    }
}
