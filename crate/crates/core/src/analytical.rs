//! Closed-form handover latency, signaling cost and packet loss.
//!
//! All delays are milliseconds. Rates are per second, so the M/M/1 service
//! delay is converted to milliseconds before it enters the handover latency.

use thiserror::Error;

use crate::message::{message_size, MessageType};
use crate::scenario::{handover_components_with, FormulaMode};
use crate::technique::Technique;
use crate::topology::Topology;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticalError {
    #[error("queue is unstable: arrival rate {lambda} >= service rate {mu}")]
    UnstableQueue { lambda: f64, mu: f64 },
    #[error("packet density ratio {0} must be below 1")]
    DegenerateDensity(f64),
    #[error("link-change series diverges for f* = {0}")]
    Divergent(f64),
    #[error("invalid parameter `{name}` = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
}

/// Traffic and mobility parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Packet arrival rate (packets/s).
    pub lambda: f64,
    /// Per-node service rate (packets/s).
    pub mu: f64,
    /// Normalization divisor applied to the arrival rate.
    pub v_f: f64,
    /// Packet density ratio K / K_max.
    pub k_ratio: f64,
    /// Session arrival rate (1/s).
    pub lambda_s: f64,
    /// Link dwell rate (1/s); mean dwell time is `1 / mu_l`.
    pub mu_l: f64,
    /// Wireless link failure probability.
    pub p_f: f64,
    /// Number of link changes.
    pub n_l: u32,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            lambda: 100.0,
            mu: 150.0,
            v_f: 1.0,
            k_ratio: 0.0,
            lambda_s: 1.0,
            mu_l: 1.0,
            p_f: 0.0,
            n_l: 1,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), AnalyticalError> {
        let bad = |name, value| Err(AnalyticalError::InvalidParameter { name, value });
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad("lambda", self.lambda);
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return bad("mu", self.mu);
        }
        if self.lambda >= self.mu {
            return Err(AnalyticalError::UnstableQueue {
                lambda: self.lambda,
                mu: self.mu,
            });
        }
        if !(self.v_f > 0.0 && self.v_f.is_finite()) {
            return bad("v_f", self.v_f);
        }
        if !(0.0..1.0).contains(&self.k_ratio) {
            return Err(AnalyticalError::DegenerateDensity(self.k_ratio));
        }
        if !(self.lambda_s > 0.0 && self.lambda_s.is_finite()) {
            return bad("lambda_s", self.lambda_s);
        }
        if !(self.mu_l > 0.0 && self.mu_l.is_finite()) {
            return bad("mu_l", self.mu_l);
        }
        if !(0.0..1.0).contains(&self.p_f) {
            return bad("p_f", self.p_f);
        }
        Ok(())
    }

    /// Session-to-mobility ratio `lambda_s / mu_l`.
    pub fn smr(&self) -> f64 {
        self.lambda_s / self.mu_l
    }
}

/// Handover delay per hop (ms/hop).
pub fn avg_hop_delay(technique: Technique, topology: &Topology) -> f64 {
    avg_hop_delay_with(technique, topology, FormulaMode::Verbatim)
}

pub fn avg_hop_delay_with(technique: Technique, topology: &Topology, mode: FormulaMode) -> f64 {
    let c = handover_components_with(technique, topology, mode);
    c.d_ho / f64::from(c.n_ho)
}

/// M/M/1 sojourn time at one node, in seconds: `1 / ((1 - rho) * mu)`.
pub fn packet_service_delay(lambda: f64, mu: f64) -> Result<f64, AnalyticalError> {
    if !(lambda >= 0.0) || !(mu > 0.0) {
        return Err(AnalyticalError::InvalidParameter {
            name: if lambda >= 0.0 { "mu" } else { "lambda" },
            value: if lambda >= 0.0 { mu } else { lambda },
        });
    }
    if lambda >= mu {
        return Err(AnalyticalError::UnstableQueue { lambda, mu });
    }
    let rho = lambda / mu;
    Ok(1.0 / ((1.0 - rho) * mu))
}

/// Total handover delay (ms) over `hops` hops of `hop_delay_ms` each:
/// `(lambda / v_f) * H * (T_h + D_P) / (1 - K/K_max)`.
pub fn total_handover_delay(
    params: &ModelParams,
    hops: u32,
    hop_delay_ms: f64,
) -> Result<f64, AnalyticalError> {
    if !(0.0..1.0).contains(&params.k_ratio) {
        return Err(AnalyticalError::DegenerateDensity(params.k_ratio));
    }
    if !(params.v_f > 0.0) {
        return Err(AnalyticalError::InvalidParameter {
            name: "v_f",
            value: params.v_f,
        });
    }
    let service_ms = packet_service_delay(params.lambda, params.mu)? * 1e3;
    Ok(
        params.lambda * f64::from(hops) * (hop_delay_ms + service_ms)
            / (params.v_f * (1.0 - params.k_ratio)),
    )
}

/// Handover latency of a technique: its hop count and average hop delay
/// plugged into [`total_handover_delay`].
pub fn technique_latency(
    technique: Technique,
    topology: &Topology,
    params: &ModelParams,
    mode: FormulaMode,
) -> Result<f64, AnalyticalError> {
    let c = handover_components_with(technique, topology, mode);
    total_handover_delay(params, c.n_ho, c.d_ho / f64::from(c.n_ho))
}

/// Laplace transform of the exponential link-dwell density at `s = lambda_s`:
/// `mu_l / (lambda_s + mu_l)`.
pub fn dwell_laplace(lambda_s: f64, mu_l: f64) -> f64 {
    mu_l / (lambda_s + mu_l)
}

/// Expected number of link changes per session,
/// `sum_{i>=1} (i / S) (1 - f*) f*^(i-1) = 1 / (S (1 - f*))`.
pub fn expected_link_change_factor(s_sigma: f64, f_star: f64) -> Result<f64, AnalyticalError> {
    if !(f_star < 1.0) {
        return Err(AnalyticalError::Divergent(f_star));
    }
    if !(s_sigma > 0.0) || !(f_star >= 0.0) {
        return Err(AnalyticalError::InvalidParameter {
            name: if s_sigma > 0.0 { "f_star" } else { "s_sigma" },
            value: if s_sigma > 0.0 { f_star } else { s_sigma },
        });
    }
    Ok(1.0 / (s_sigma * (1.0 - f_star)))
}

/// Probability of no link change during a session, `1 - (1 - f*) / S`.
pub fn no_link_change_probability(s_sigma: f64, f_star: f64) -> f64 {
    1.0 - (1.0 - f_star) / s_sigma
}

/// Message overhead of one flow-mobility operation (bytes x hops).
///
/// The `p_f / (1 - p_f)` term is the expected number of RA retransmissions
/// over the lossy wireless link; the wired path is assumed lossless.
pub fn overhead(technique: Technique, topology: &Topology, p_f: f64) -> f64 {
    let s = |m| f64::from(message_size(m));
    let n_ml = f64::from(topology.n_mag_lma);
    let n_mm = f64::from(topology.n_mn_mag);
    let n_ll = f64::from(topology.n_lma_lma);

    let retransmit = p_f / (1.0 - p_f) * 2.0 * s(MessageType::Ra);
    let advertise = 2.0 * (n_mm - 1.0) * s(MessageType::Ra);
    let registration = 2.0 * n_ml * (s(MessageType::Pbu) + s(MessageType::Pba));
    let update_status = 2.0 * n_ml * s(MessageType::Us);
    let fm = s(MessageType::Fmi) + s(MessageType::Fma);
    let efm = s(MessageType::EFmi) + s(MessageType::EFma);

    match technique {
        Technique::ActiveDiff => n_ml * fm + n_ml * fm,
        Technique::NotactiveCom | Technique::Notactive1Mag | Technique::Notactive2Mag => {
            retransmit + registration + advertise
        }
        Technique::NotactiveDiff => {
            retransmit
                + registration
                + advertise
                + 2.0 * n_ml * (s(MessageType::Bri) + s(MessageType::Bra))
        }
        Technique::NotactiveComBlock
        | Technique::NotactiveDiffBlock
        | Technique::Notactive1MagBlock
        | Technique::Notactive2MagBlock => retransmit + update_status + advertise,
        Technique::Active2Mag => n_ml * efm + n_ll * efm + n_ll * efm,
    }
}

/// Signaling cost: expected link changes per session times the overhead.
pub fn signaling_cost(
    technique: Technique,
    topology: &Topology,
    params: &ModelParams,
) -> Result<f64, AnalyticalError> {
    let s_sigma = params.smr();
    let f_star = dwell_laplace(params.lambda_s, params.mu_l);
    if !(0.0..1.0).contains(&params.p_f) {
        return Err(AnalyticalError::InvalidParameter {
            name: "p_f",
            value: params.p_f,
        });
    }
    Ok(expected_link_change_factor(s_sigma, f_star)? * overhead(technique, topology, params.p_f))
}

/// Signaling cost for a fixed number of link changes, `N_L * OH`.
pub fn cost_for_link_changes(
    technique: Technique,
    topology: &Topology,
    params: &ModelParams,
) -> f64 {
    f64::from(params.n_l) * overhead(technique, topology, params.p_f)
}

/// Packets lost while the flow is disrupted for `t_d_seconds`.
pub fn packet_loss(lambda: f64, t_d_seconds: f64) -> f64 {
    lambda * t_d_seconds
}
