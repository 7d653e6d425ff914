//! Entanglement-distribution times for first-generation repeater chains.
//!
//! Two families are modelled: DLCZ chains (probabilistic pair generation
//! with heralding over the segment length) and QND-heralded chains where
//! photon-pair sources fire at memory nodes that herald arrival with a
//! quantum non-demolition measurement. The QND chain comes in a hybrid
//! flavour (memories on the ground) and a full-space flavour.

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{ChannelModel, DetectorModel, SPEED_OF_LIGHT_KM_S};
use crate::error::{check_positive, check_probability, Error, Result};
use crate::geometry::{constellation_layout, Architecture, ConstellationLayout, EarthModel, OrbitConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RepeaterConfig {
    pub nesting_level: u32,
    pub source_rate_hz: f64,
    pub source_efficiency: f64,
    /// DLCZ pair-creation probability per attempt.
    pub pair_probability: f64,
    pub qnd_efficiency: f64,
    pub write_efficiency: f64,
    pub read_efficiency: f64,
    pub detector: DetectorModel,
    pub temporal_modes: u32,
}

impl RepeaterConfig {
    /// Combined memory efficiency (read times write).
    pub fn memory_efficiency(&self) -> f64 {
        self.read_efficiency * self.write_efficiency
    }

    /// Splits a combined memory efficiency evenly between write and read.
    pub fn with_memory_efficiency(mut self, eta_mem: f64) -> Self {
        let each = eta_mem.sqrt();
        self.read_efficiency = each;
        self.write_efficiency = each;
        self
    }

    pub fn with_modes(mut self, modes: u32) -> Self {
        self.temporal_modes = modes;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("source.rate_mhz", self.source_rate_hz)?;
        check_probability("source.efficiency", self.source_efficiency)?;
        check_probability("source.pair_probability", self.pair_probability)?;
        check_probability("qnd.efficiency", self.qnd_efficiency)?;
        check_probability("memory.write_efficiency", self.write_efficiency)?;
        check_probability("memory.read_efficiency", self.read_efficiency)?;
        check_probability("detector.efficiency", self.detector.efficiency)?;
        if self.temporal_modes == 0 {
            return Err(Error::validation("repeater.dlcz_modes", "must be >= 1"));
        }
        Ok(())
    }
}

impl Default for RepeaterConfig {
    fn default() -> Self {
        Self {
            nesting_level: 3,
            source_rate_hz: 20e6,
            source_efficiency: 1.0,
            pair_probability: 0.01,
            qnd_efficiency: 0.5,
            write_efficiency: 0.9f64.sqrt(),
            read_efficiency: 0.9f64.sqrt(),
            detector: DetectorModel {
                efficiency: 0.9,
                dark_prob_per_window: 1e-6,
            },
            temporal_modes: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RepeaterResult {
    pub total_time_s: f64,
    /// Average two-photon transmission (QND chains only).
    pub p0_avg: Option<f64>,
    /// The memories must hold a qubit for the whole distribution time.
    pub required_storage_s: f64,
    pub required_modes: Option<f64>,
}

impl RepeaterResult {
    fn new(total_time_s: f64, p0_avg: Option<f64>) -> Self {
        Self {
            total_time_s,
            p0_avg,
            required_storage_s: total_time_s,
            required_modes: None,
        }
    }
}

fn hop_etas(layout: &ConstellationLayout, channel: &ChannelModel) -> Result<Vec<f64>> {
    layout
        .hops
        .iter()
        .map(|hop| channel.hop(hop).map(|b| b.eta_total))
        .collect()
}

/// Mean over segments of the product of each segment's two hop transmissivities.
pub fn avg_two_photon_transmission(layout: &ConstellationLayout, channel: &ChannelModel) -> Result<f64> {
    let etas = hop_etas(layout, channel)?;
    let segments = etas.len() / 2;
    let sum: f64 = etas.chunks_exact(2).map(|pair| pair[0] * pair[1]).sum();
    Ok(sum / segments as f64)
}

/// Mean single-hop transmissivity (node to midpoint station) over the layout.
pub fn mean_hop_transmission(layout: &ConstellationLayout, channel: &ChannelModel) -> Result<f64> {
    let etas = hop_etas(layout, channel)?;
    Ok(etas.iter().sum::<f64>() / etas.len() as f64)
}

/// Best single-hop transmissivity in the layout.
pub fn max_hop_transmission(layout: &ConstellationLayout, channel: &ChannelModel) -> Result<f64> {
    let etas = hop_etas(layout, channel)?;
    Ok(etas.into_iter().fold(0.0, f64::max))
}

/// DLCZ distribution time for a chain laid out as `layout`, with per-hop
/// transmissivity `eta_t`. Multimode memories divide the time by the mode count.
pub fn dlcz_time(cfg: &RepeaterConfig, layout: &ConstellationLayout, eta_t: f64) -> Result<RepeaterResult> {
    let n = layout.nesting_level;
    let eta_d = cfg.detector.efficiency;
    let eta_md = cfg.memory_efficiency() * eta_d;
    if cfg.pair_probability <= 0.0 {
        return Err(Error::DegenerateInput("pair probability is zero".into()));
    }
    if eta_t <= 0.0 {
        return Err(Error::DegenerateInput("channel transmission is zero".into()));
    }
    if eta_md <= 0.0 {
        return Err(Error::DegenerateInput("memory or detector efficiency is zero".into()));
    }
    let swaps: f64 = (1..=n)
        .map(|k| {
            let two_k = 2f64.powi(k as i32);
            two_k - (two_k - 1.0) * eta_md
        })
        .product();
    let heralding = layout.segment_length_km / SPEED_OF_LIGHT_KM_S;
    let denominator = eta_d * eta_t * cfg.pair_probability * eta_md.powi(n as i32 + 2);
    let single = 3f64.powi(n as i32 + 1) * heralding * swaps / denominator;
    Ok(RepeaterResult::new(single / cfg.temporal_modes.max(1) as f64, None))
}

/// QND-heralded chain distribution time given the average two-photon transmission.
pub fn qnd_time(cfg: &RepeaterConfig, p0_avg: f64) -> Result<RepeaterResult> {
    let n = cfg.nesting_level;
    let swap = (2.0 / 3.0) * (cfg.read_efficiency.powi(2) * cfg.detector.efficiency.powi(2) / 2.0);
    let rate = cfg.source_rate_hz
        * cfg.source_efficiency
        * p0_avg
        * cfg.qnd_efficiency.powi(2)
        * cfg.write_efficiency.powi(2)
        * swap.powi(n as i32);
    if !(rate > 0.0) {
        return Err(Error::DegenerateInput(format!("QND chain success rate is {rate}")));
    }
    Ok(RepeaterResult::new(1.0 / rate, Some(p0_avg)))
}

/// Temporal modes a memory must hold to absorb every photon arriving while
/// a heralding signal crosses one segment.
pub fn required_modes(source_rate_hz: f64, source_efficiency: f64, eta_tr_max: f64, segment_length_km: f64) -> f64 {
    source_rate_hz * source_efficiency * eta_tr_max * segment_length_km / SPEED_OF_LIGHT_KM_S
}

/// Inputs shared by every point of a repeater sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RepeaterScenario {
    pub ground_distance_km: f64,
    pub orbit: OrbitConfig,
    pub earth: EarthModel,
    pub channel: ChannelModel,
    pub config: RepeaterConfig,
    /// Mode count of the multimode DLCZ curve.
    pub dlcz_modes: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RepeaterSweep {
    GroundDistanceKm,
    DivergenceUrad,
    MemoryEfficiency,
}

/// One abscissa of a repeater sweep; `None` marks degenerate or below-horizon points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RepeaterRow {
    pub x: f64,
    pub dlcz_single_s: Option<f64>,
    pub dlcz_multimode_s: Option<f64>,
    pub hybrid_qnd_s: Option<f64>,
    pub space_qnd_s: Option<f64>,
}

/// All four architecture times for one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchitectureTimes {
    pub dlcz_single: Result<RepeaterResult>,
    pub dlcz_multimode: Result<RepeaterResult>,
    pub hybrid_qnd: Result<RepeaterResult>,
    pub space_qnd: Result<RepeaterResult>,
}

impl RepeaterScenario {
    fn layout(&self, architecture: Architecture) -> Result<ConstellationLayout> {
        constellation_layout(
            self.ground_distance_km,
            self.config.nesting_level,
            &self.orbit,
            &self.earth,
            architecture,
        )
    }

    /// QND chain time for one architecture, with the mode requirement attached.
    pub fn qnd(&self, architecture: Architecture) -> Result<RepeaterResult> {
        let layout = self.layout(architecture)?;
        let p0 = avg_two_photon_transmission(&layout, &self.channel)?;
        let mut result = qnd_time(&self.config, p0)?;
        let eta_max = max_hop_transmission(&layout, &self.channel)?;
        result.required_modes = Some(required_modes(
            self.config.source_rate_hz,
            self.config.source_efficiency,
            eta_max,
            layout.segment_length_km,
        ));
        Ok(result)
    }

    /// DLCZ time over the full-space layout with `modes` temporal modes.
    pub fn dlcz(&self, modes: u32) -> Result<RepeaterResult> {
        let layout = self.layout(Architecture::FullSpace)?;
        let eta_t = mean_hop_transmission(&layout, &self.channel)?;
        dlcz_time(&self.config.with_modes(modes), &layout, eta_t)
    }

    pub fn evaluate(&self) -> ArchitectureTimes {
        ArchitectureTimes {
            dlcz_single: self.dlcz(1),
            dlcz_multimode: self.dlcz(self.dlcz_modes),
            hybrid_qnd: self.qnd(Architecture::HybridGround),
            space_qnd: self.qnd(Architecture::FullSpace),
        }
    }

    /// Copy of the scenario with the swept variable set to `x`.
    pub fn with_variable(&self, variable: RepeaterSweep, x: f64) -> Result<Self> {
        let mut next = *self;
        match variable {
            RepeaterSweep::GroundDistanceKm => next.ground_distance_km = x,
            RepeaterSweep::DivergenceUrad => next.channel = self.channel.with_divergence(x * 1e-6)?,
            RepeaterSweep::MemoryEfficiency => {
                check_probability("memory.efficiency", x)?;
                next.config = self.config.with_memory_efficiency(x);
            }
        }
        Ok(next)
    }
}

/// Evaluates every architecture at each abscissa, in input order.
pub fn sweep_repeater(base: &RepeaterScenario, variable: RepeaterSweep, xs: &[f64]) -> Vec<RepeaterRow> {
    xs.par_iter()
        .map(|&x| match base.with_variable(variable, x) {
            Ok(scenario) => {
                let t = scenario.evaluate();
                let secs = |r: Result<RepeaterResult>| r.ok().map(|r| r.total_time_s);
                RepeaterRow {
                    x,
                    dlcz_single_s: secs(t.dlcz_single),
                    dlcz_multimode_s: secs(t.dlcz_multimode),
                    hybrid_qnd_s: secs(t.hybrid_qnd),
                    space_qnd_s: secs(t.space_qnd),
                }
            }
            Err(_) => RepeaterRow {
                x,
                dlcz_single_s: None,
                dlcz_multimode_s: None,
                hybrid_qnd_s: None,
                space_qnd_s: None,
            },
        })
        .collect()
}
