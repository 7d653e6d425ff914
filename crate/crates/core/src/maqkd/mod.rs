//! Secret-key rates for satellite-assisted QKD between two ground stations.
//!
//! Three protocols share one satellite above the midpoint of the baseline:
//!
//! * **E91** — the satellite emits entangled pairs straight down to both
//!   stations; no memories.
//! * **Uplink MA-QKD** — both stations send single photons up to a satellite
//!   that heralds arrival with a QND measurement, stores each photon in a
//!   memory, and performs a Bell-state measurement once both memories are
//!   loaded.
//! * **Downlink MA-QKD** — the satellite emits down to both stations, which
//!   herald arrival and report back; the satellite's memories hold the
//!   partner photons for a classical round trip. Throughput comes from `N`
//!   temporal modes and `m` memory pairs per side.
//!
//! Every formula is listed in `docs/model-ledger.md`.

mod keyrate;
mod wait;

pub use keyrate::{binary_entropy, secret_key_rate};
pub use wait::{geometric_wait_stats, WaitStats};

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{noise_probability, ChannelBudget, ChannelModel, DetectorModel, SPEED_OF_LIGHT_KM_S};
use crate::error::{check_non_negative, check_positive, check_probability, Error, Result};
use crate::geometry::{los_midpoint_geometry, EarthModel, LinkGeometry, OrbitConfig};
use keyrate::xor_prob;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MemoryModel {
    /// Exponential dephasing time; `f64::INFINITY` for a perfect memory.
    pub dephasing_time_s: f64,
    pub write_efficiency: f64,
    pub read_efficiency: f64,
    pub temporal_modes: u32,
    pub pairs: u32,
}

impl MemoryModel {
    pub fn efficiency(&self) -> f64 {
        self.write_efficiency * self.read_efficiency
    }

    /// Splits a combined storage efficiency evenly between write and read.
    pub fn with_efficiency(mut self, eta_mem: f64) -> Self {
        let each = eta_mem.sqrt();
        self.write_efficiency = each;
        self.read_efficiency = each;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dephasing_time_s > 0.0) {
            return Err(Error::validation(
                "memory.dephasing_time_s",
                format!("{} must be > 0", self.dephasing_time_s),
            ));
        }
        check_probability("memory.write_efficiency", self.write_efficiency)?;
        check_probability("memory.read_efficiency", self.read_efficiency)?;
        if self.temporal_modes == 0 {
            return Err(Error::validation("memory.temporal_modes", "must be >= 1"));
        }
        if self.pairs == 0 {
            return Err(Error::validation("memory.pairs", "must be >= 1"));
        }
        Ok(())
    }
}

impl Default for MemoryModel {
    fn default() -> Self {
        MemoryModel {
            dephasing_time_s: 5e-3,
            write_efficiency: 0.8f64.sqrt(),
            read_efficiency: 0.8f64.sqrt(),
            temporal_modes: 1,
            pairs: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProtocolParams {
    pub source_rate_hz: f64,
    pub ec_inefficiency: f64,
    pub misalignment_error: f64,
    pub bsm_success: f64,
    /// QND heralding efficiency on the satellite (uplink only).
    pub qnd_efficiency: f64,
    /// Single-photon detectors at the ground stations and the BSM.
    pub detector: DetectorModel,
    /// Extra throughput of the ground receiving terminal (optics, coupling,
    /// filtering) on top of the aperture-limited channel. Applies wherever a
    /// ground station receives: E91 and downlink.
    pub ground_terminal_efficiency: f64,
    /// Fixed extra loss of the uplink from turbulence, in dB.
    pub uplink_turbulence_db: f64,
}

impl ProtocolParams {
    pub fn validate(&self) -> Result<()> {
        check_positive("protocol.source_rate_hz", self.source_rate_hz)?;
        if !(self.ec_inefficiency >= 1.0 && self.ec_inefficiency.is_finite()) {
            return Err(Error::validation(
                "protocol.ec_inefficiency",
                format!("{} must be >= 1", self.ec_inefficiency),
            ));
        }
        if !(0.0..=0.5).contains(&self.misalignment_error) {
            return Err(Error::validation(
                "protocol.misalignment_error",
                format!("{} must lie in [0, 0.5]", self.misalignment_error),
            ));
        }
        check_probability("protocol.bsm_success", self.bsm_success)?;
        check_probability("protocol.qnd_efficiency", self.qnd_efficiency)?;
        check_probability("detector.efficiency", self.detector.efficiency)?;
        check_probability("detector.dark_prob", self.detector.dark_prob_per_window)?;
        check_probability("protocol.ground_terminal_efficiency", self.ground_terminal_efficiency)?;
        check_non_negative("uplink.turbulence_db", self.uplink_turbulence_db)
    }
}

impl Default for ProtocolParams {
    fn default() -> Self {
        ProtocolParams {
            source_rate_hz: 20e6,
            ec_inefficiency: 1.16,
            misalignment_error: 0.015,
            bsm_success: 0.5,
            qnd_efficiency: 0.5,
            detector: DetectorModel {
                efficiency: 0.7,
                dark_prob_per_window: 1e-6,
            },
            ground_terminal_efficiency: 0.063,
            uplink_turbulence_db: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KeyRateResult {
    /// Probability per attempt that a raw key bit is produced.
    pub yield_per_use: f64,
    pub qber_x: f64,
    pub qber_z: f64,
    pub attempts_per_s: f64,
    pub secret_bits_per_s: f64,
}

impl KeyRateResult {
    fn from_parts(yield_per_use: f64, qber_x: f64, qber_z: f64, attempts_per_s: f64, f: f64) -> Self {
        KeyRateResult {
            yield_per_use,
            qber_x,
            qber_z,
            attempts_per_s,
            secret_bits_per_s: attempts_per_s * secret_key_rate(yield_per_use, qber_x, qber_z, f),
        }
    }
}

/// One optical hop reduced to what the key-rate models consume.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HopLoss {
    /// End-to-end channel transmission of the hop.
    pub transmission: f64,
    /// Probability of a noise click in one detection window.
    pub noise_prob: f64,
}

impl HopLoss {
    pub fn from_budget(budget: &ChannelBudget, detector: &DetectorModel) -> Self {
        HopLoss {
            transmission: budget.eta_total,
            noise_prob: noise_probability(detector, budget.stray_counts_per_window),
        }
    }
}

/// Error contributed by heralds that came from a noise click. Such a herald
/// stores nothing useful, so the resulting bit is random.
fn herald_noise(success: f64, noise: f64) -> (f64, f64) {
    let herald = success + (1.0 - success) * noise;
    let false_fraction = if herald > 0.0 {
        (1.0 - success) * noise / herald
    } else {
        0.0
    };
    (herald, false_fraction / 2.0)
}

/// Entanglement-based baseline without memories.
pub fn e91_from_hop(hop: HopLoss, params: &ProtocolParams) -> KeyRateResult {
    let eta = hop.transmission * params.ground_terminal_efficiency * params.detector.efficiency;
    let pn = hop.noise_prob;
    let both = eta * eta;
    let gain = both + 2.0 * pn * (2.0 * eta * (1.0 - eta)) + 4.0 * pn * pn * (1.0 - eta) * (1.0 - eta);
    if gain <= 0.0 {
        return KeyRateResult::from_parts(0.0, 0.5, 0.5, params.source_rate_hz, params.ec_inefficiency);
    }
    let error_gain = params.misalignment_error * both + 0.5 * (gain - both);
    let qber = error_gain / gain;
    KeyRateResult::from_parts(gain, qber, qber, params.source_rate_hz, params.ec_inefficiency)
}

/// Uplink MA-QKD: per-use QND heralding, no storage cutoff.
pub fn uplink_from_hop(hop: HopLoss, memory: &MemoryModel, params: &ProtocolParams) -> Result<KeyRateResult> {
    let turbulence = 10f64.powf(-params.uplink_turbulence_db / 10.0);
    let load = hop.transmission * turbulence * params.qnd_efficiency * memory.write_efficiency;
    let (herald, noise_err) = herald_noise(load, hop.noise_prob);
    let qber_z = xor_prob(params.misalignment_error, xor_prob(noise_err, noise_err));
    if herald <= 0.0 {
        return Ok(KeyRateResult::from_parts(0.0, 0.5, qber_z, 0.0, params.ec_inefficiency));
    }
    let decay = 1.0 / (params.source_rate_hz * memory.dephasing_time_s);
    let stats = geometric_wait_stats(herald, herald, None, decay)?;
    let qber_x = xor_prob(qber_z, (1.0 - stats.dephasing_factor) / 2.0).min(0.5);
    let readout = memory.read_efficiency * params.detector.efficiency;
    let yield_per_use = stats.success_prob * readout * readout * params.bsm_success;
    let attempts = params.source_rate_hz / stats.mean_cycle_uses;
    Ok(KeyRateResult::from_parts(
        yield_per_use,
        qber_x,
        qber_z,
        attempts,
        params.ec_inefficiency,
    ))
}

/// Downlink MA-QKD: heralding rounds of one classical round trip each.
///
/// `los_km` is the satellite–station distance that sets the round period.
pub fn downlink_from_hop(
    hop: HopLoss,
    los_km: f64,
    memory: &MemoryModel,
    params: &ProtocolParams,
) -> Result<KeyRateResult> {
    check_positive("link.los_km", los_km)?;
    let round_s = 2.0 * los_km / SPEED_OF_LIGHT_KM_S;
    let slot =
        hop.transmission * params.ground_terminal_efficiency * params.detector.efficiency * memory.write_efficiency;
    let (herald, noise_err) = herald_noise(slot, hop.noise_prob);
    let qber_z = xor_prob(params.misalignment_error, xor_prob(noise_err, noise_err));
    let tau = memory.dephasing_time_s;
    if tau < round_s || herald <= 0.0 {
        // The partner photons cannot outlive a single round trip.
        return Ok(KeyRateResult::from_parts(0.0, 0.5, qber_z, 0.0, params.ec_inefficiency));
    }
    let slots = memory.temporal_modes as f64 * memory.pairs as f64;
    let per_round = -(slots * (-herald).ln_1p()).exp_m1();
    let cutoff = if tau.is_finite() {
        Some((tau / round_s).floor() as u64 - 1)
    } else {
        None
    };
    let decay = round_s / tau;
    let stats = geometric_wait_stats(per_round, per_round, cutoff, decay)?;
    // Both memories sit through the round trip that heralds their own load.
    let dephasing = stats.dephasing_factor * (-2.0 * decay).exp();
    let qber_x = xor_prob(qber_z, (1.0 - dephasing) / 2.0).min(0.5);
    let yield_per_use = stats.success_prob * memory.read_efficiency * memory.read_efficiency * params.bsm_success;
    let attempts = 1.0 / (round_s * stats.mean_cycle_uses);
    Ok(KeyRateResult::from_parts(
        yield_per_use,
        qber_x,
        qber_z,
        attempts,
        params.ec_inefficiency,
    ))
}

fn midpoint_hop(link: &LinkGeometry, channel: &ChannelModel, params: &ProtocolParams) -> Result<HopLoss> {
    Ok(HopLoss::from_budget(&channel.hop(link)?, &params.detector))
}

/// E91 over the downlink pair of a midpoint satellite.
pub fn e91_rate(link: &LinkGeometry, channel: &ChannelModel, params: &ProtocolParams) -> Result<KeyRateResult> {
    params.validate()?;
    Ok(e91_from_hop(midpoint_hop(link, channel, params)?, params))
}

pub fn uplink_ma_rate(
    link: &LinkGeometry,
    channel: &ChannelModel,
    memory: &MemoryModel,
    params: &ProtocolParams,
) -> Result<KeyRateResult> {
    params.validate()?;
    memory.validate()?;
    uplink_from_hop(midpoint_hop(link, channel, params)?, memory, params)
}

pub fn downlink_ma_rate(
    link: &LinkGeometry,
    channel: &ChannelModel,
    memory: &MemoryModel,
    params: &ProtocolParams,
) -> Result<KeyRateResult> {
    params.validate()?;
    memory.validate()?;
    let hop = midpoint_hop(link, channel, params)?;
    downlink_from_hop(hop, link.path_length_km, memory, params)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Protocol {
    E91,
    Uplink,
    Downlink,
}

impl Protocol {
    pub fn name(&self) -> &'static str {
        match self {
            Protocol::E91 => "e91",
            Protocol::Uplink => "uplink",
            Protocol::Downlink => "downlink",
        }
    }
}

/// A two-station link with a satellite above the midpoint of the baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaqkdScenario {
    pub ground_distance_km: f64,
    pub orbit: OrbitConfig,
    pub earth: EarthModel,
    pub channel: ChannelModel,
    pub memory: MemoryModel,
    pub params: ProtocolParams,
}

impl MaqkdScenario {
    pub fn link(&self) -> Result<LinkGeometry> {
        Ok(los_midpoint_geometry(self.ground_distance_km, &self.orbit, &self.earth)?.0)
    }

    pub fn rate(&self, protocol: Protocol) -> Result<KeyRateResult> {
        let link = self.link()?;
        match protocol {
            Protocol::E91 => e91_rate(&link, &self.channel, &self.params),
            Protocol::Uplink => uplink_ma_rate(&link, &self.channel, &self.memory, &self.params),
            Protocol::Downlink => downlink_ma_rate(&link, &self.channel, &self.memory, &self.params),
        }
    }

    /// Secret bits per second; zero where no key is possible or the
    /// geometry is degenerate.
    pub fn secret_rate(&self, protocol: Protocol) -> f64 {
        self.rate(protocol).map(|r| r.secret_bits_per_s).unwrap_or(0.0)
    }

    pub fn with_ground_distance(mut self, km: f64) -> Self {
        self.ground_distance_km = km;
        self
    }

    pub fn with_memory(mut self, memory: MemoryModel) -> Self {
        self.memory = memory;
        self
    }
}

/// Key rates over a grid of dephasing times and storage efficiencies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateMap {
    pub dephasing_times_s: Vec<f64>,
    pub memory_efficiencies: Vec<f64>,
    /// Row-major: one row per dephasing time.
    pub secret_bits_per_s: Vec<f64>,
}

impl RateMap {
    pub fn at(&self, tau_index: usize, eta_index: usize) -> f64 {
        self.secret_bits_per_s[tau_index * self.memory_efficiencies.len() + eta_index]
    }

    pub fn row(&self, tau_index: usize) -> &[f64] {
        let w = self.memory_efficiencies.len();
        &self.secret_bits_per_s[tau_index * w..(tau_index + 1) * w]
    }
}

pub fn rate_map(protocol: Protocol, base: &MaqkdScenario, taus: &[f64], etas: &[f64]) -> RateMap {
    let cells: Vec<(f64, f64)> = taus.iter().flat_map(|&t| etas.iter().map(move |&e| (t, e))).collect();
    let secret_bits_per_s = cells
        .par_iter()
        .map(|&(tau, eta)| {
            let memory = MemoryModel {
                dephasing_time_s: tau,
                ..base.memory.with_efficiency(eta)
            };
            base.with_memory(memory).secret_rate(protocol)
        })
        .collect();
    RateMap {
        dephasing_times_s: taus.to_vec(),
        memory_efficiencies: etas.to_vec(),
        secret_bits_per_s,
    }
}
