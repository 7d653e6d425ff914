//! Scenario files, bundled presets, sweeps and table export.
//!
//! A scenario is a flat list of `section.key = value` lines. Values are
//! layered: built-in defaults, then an optional bundled preset
//! (`scenario.preset`), then the file itself, then command-line overrides.
//! The resolved settings are validated once and hashed into the metadata
//! line of every table so a result can be traced back to its inputs.

mod schema;
mod table;

pub use schema::{lookup, schema_markdown, KeySpec, KEYS};
pub use table::{ResultTable, TableMetadata, MODEL_LEDGER_VERSION};

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::channel::{
    Aperture, AtmosphereModel, BeamParams, ChannelModel, DetectorModel, PointingModel, StrayLightModel,
};
use crate::error::{check_non_negative, check_positive, check_probability, Error, Result};
use crate::geometry::{
    constellation_layout, elevation_from_slant, ground_arc_from_slant, Architecture, EarthModel, LinkGeometry,
    LinkKind, OrbitConfig,
};
use crate::maqkd::{rate_map, MaqkdScenario, MemoryModel, Protocol, ProtocolParams};
use crate::repeater::{max_hop_transmission, RepeaterConfig, RepeaterScenario, RepeaterSweep};
use schema::{sweep_variable, SweepVariable};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Figures that `reproduce` knows how to regenerate.
pub const FIGURES: &[&str] = &[
    "fig3a", "fig3b", "fig3c", "fig4a", "fig4b", "fig4c", "fig5", "fig6a", "fig6b",
];

const PRESETS: &[(&str, &str)] = &[
    ("fig3a", include_str!("../../presets/fig3a.scn")),
    ("fig3b", include_str!("../../presets/fig3b.scn")),
    ("fig3c", include_str!("../../presets/fig3c.scn")),
    ("fig4a", include_str!("../../presets/fig4a.scn")),
    ("fig4b", include_str!("../../presets/fig4b.scn")),
    ("fig4c", include_str!("../../presets/fig4c.scn")),
    ("fig5", include_str!("../../presets/fig5.scn")),
    ("fig6a", include_str!("../../presets/fig6a.scn")),
    ("fig6b", include_str!("../../presets/fig6b.scn")),
    ("table1-downlink", include_str!("../../presets/table1-downlink.scn")),
    ("table1-uplink", include_str!("../../presets/table1-uplink.scn")),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(name, _)| *name)
}

pub fn preset_text(name: &str) -> Result<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
        .ok_or_else(|| Error::UnknownPreset(name.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    LinkBudget,
    Repeater,
    Maqkd,
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::LinkBudget => "link-budget",
            ScenarioKind::Repeater => "repeater",
            ScenarioKind::Maqkd => "maqkd",
        }
    }

    fn parse(text: &str) -> Result<Self> {
        match text {
            "link-budget" => Ok(ScenarioKind::LinkBudget),
            "repeater" => Ok(ScenarioKind::Repeater),
            "maqkd" => Ok(ScenarioKind::Maqkd),
            other => Err(Error::validation(
                "scenario.kind",
                format!("`{other}` is not one of link-budget, repeater, maqkd"),
            )),
        }
    }

    fn default_sweep(&self) -> &'static str {
        match self {
            ScenarioKind::LinkBudget => "link.path_length_km",
            ScenarioKind::Repeater | ScenarioKind::Maqkd => "link.ground_distance_km",
        }
    }

    fn allows_sweep(&self, key: &str) -> bool {
        match self {
            ScenarioKind::LinkBudget => key == "link.path_length_km",
            ScenarioKind::Repeater => matches!(
                key,
                "link.ground_distance_km" | "beam.divergence_urad" | "repeater.memory_efficiency"
            ),
            ScenarioKind::Maqkd => matches!(key, "link.ground_distance_km" | "memory.dephasing_time_s"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: String,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub log: bool,
}

impl SweepSpec {
    pub fn grid(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let t = i as f64 / last;
                if self.log {
                    (self.start.ln() + t * (self.stop.ln() - self.start.ln())).exp()
                } else {
                    self.start + t * (self.stop - self.start)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DownlinkVariant {
    pub pairs: u32,
    pub temporal_modes: u32,
    pub dephasing_time_s: f64,
}

/// A fully resolved and validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub kind: ScenarioKind,
    /// Resolved value of every schema key, in file syntax.
    pub settings: BTreeMap<String, String>,
    pub earth: EarthModel,
    pub orbit: OrbitConfig,
    pub channel: ChannelModel,
    pub tx_radius_m: f64,
    pub ground_distance_km: f64,
    pub link_kind: LinkKind,
    pub path_length_km: f64,
    pub divergences_urad: Vec<f64>,
    pub repeater: RepeaterConfig,
    pub dlcz_modes: u32,
    pub memory: MemoryModel,
    pub protocol: ProtocolParams,
    pub protocols: Vec<Protocol>,
    pub downlink_variants: Vec<DownlinkVariant>,
    pub map_protocol: Protocol,
    pub map_efficiencies: Vec<f64>,
    pub sweep: SweepSpec,
}

/// `key = value` lines of one source, in order. `#` starts a comment.
pub fn parse_settings(text: &str) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected `key = value`, found `{line}`"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("malformed key `{key}`"),
            });
        }
        if out.iter().any(|(k, _)| k == key) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("`{key}` set twice"),
            });
        }
        out.push((key.to_string(), value.to_string()));
    }
    Ok(out)
}

/// Splits a `key=value` command-line override.
pub fn parse_override(text: &str) -> Result<(String, String)> {
    let parsed = parse_settings(text)?;
    match parsed.as_slice() {
        [(k, v)] => Ok((k.clone(), v.clone())),
        _ => Err(Error::Parse {
            line: 0,
            message: format!("override `{text}` is not `key=value`"),
        }),
    }
}

/// Accumulates the value layers of one scenario.
#[derive(Debug, Clone)]
pub struct ScenarioBuilder {
    values: BTreeMap<String, String>,
}

impl ScenarioBuilder {
    pub fn new() -> Self {
        let values = KEYS
            .iter()
            .filter(|s| s.key != "scenario.preset")
            .map(|s| (s.key.to_string(), s.default.to_string()))
            .collect();
        ScenarioBuilder { values }
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<&mut Self> {
        if key == "scenario.preset" {
            return self.apply_preset(value.trim());
        }
        if lookup(key).is_none() {
            return Err(Error::validation(key, "unknown key"));
        }
        self.values.insert(key.to_string(), value.trim().to_string());
        Ok(self)
    }

    pub fn apply_preset(&mut self, name: &str) -> Result<&mut Self> {
        self.apply_layer(preset_text(name)?, 0)
    }

    /// Applies a scenario text; a `scenario.preset` line pulls its preset in underneath.
    pub fn apply_text(&mut self, text: &str) -> Result<&mut Self> {
        self.apply_layer(text, 0)
    }

    fn apply_layer(&mut self, text: &str, depth: usize) -> Result<&mut Self> {
        if depth > 8 {
            return Err(Error::validation("scenario.preset", "presets nest too deeply"));
        }
        let entries = parse_settings(text)?;
        if let Some((_, preset)) = entries.iter().find(|(k, _)| k == "scenario.preset") {
            if !preset.is_empty() {
                self.apply_layer(preset_text(preset)?, depth + 1)?;
            }
        }
        for (key, value) in entries.iter().filter(|(k, _)| k != "scenario.preset") {
            self.set(key, value)?;
        }
        Ok(self)
    }

    pub fn build(&self) -> Result<Scenario> {
        Scenario::from_settings(self.values.clone())
    }
}

impl Default for ScenarioBuilder {
    fn default() -> Self {
        Self::new()
    }
}

struct Reader<'a>(&'a BTreeMap<String, String>);

impl Reader<'_> {
    fn text(&self, key: &str) -> &str {
        self.0.get(key).map(String::as_str).unwrap_or("")
    }

    fn number(&self, key: &str) -> Result<f64> {
        parse_number(key, self.text(key))
    }

    fn count(&self, key: &str) -> Result<u32> {
        parse_count(key, self.text(key))
    }

    fn numbers(&self, key: &str) -> Result<Vec<f64>> {
        split_list(self.text(key)).map(|v| parse_number(key, v)).collect()
    }

    fn counts(&self, key: &str) -> Result<Vec<u32>> {
        split_list(self.text(key)).map(|v| parse_count(key, v)).collect()
    }

    fn flag(&self, key: &str) -> Result<bool> {
        match self.text(key) {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            other => Err(Error::validation(key, format!("`{other}` is not a boolean"))),
        }
    }

    fn probability(&self, key: &str) -> Result<f64> {
        let v = self.number(key)?;
        check_probability(key, v)?;
        Ok(v)
    }

    fn positive(&self, key: &str) -> Result<f64> {
        let v = self.number(key)?;
        check_positive(key, v)?;
        Ok(v)
    }
}

fn split_list(text: &str) -> impl Iterator<Item = &str> {
    text.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_number(key: &str, text: &str) -> Result<f64> {
    let v: f64 = text
        .parse()
        .map_err(|_| Error::validation(key, format!("`{text}` is not a number")))?;
    if v.is_nan() {
        return Err(Error::validation(key, "NaN is not allowed"));
    }
    Ok(v)
}

fn parse_count(key: &str, text: &str) -> Result<u32> {
    let v: u32 = text
        .parse()
        .map_err(|_| Error::validation(key, format!("`{text}` is not a non-negative integer")))?;
    if v == 0 {
        return Err(Error::validation(key, "must be >= 1"));
    }
    Ok(v)
}

fn parse_protocol(key: &str, text: &str) -> Result<Protocol> {
    match text {
        "e91" => Ok(Protocol::E91),
        "uplink" => Ok(Protocol::Uplink),
        "downlink" => Ok(Protocol::Downlink),
        other => Err(Error::validation(
            key,
            format!("`{other}` is not one of e91, uplink, downlink"),
        )),
    }
}

/// Broadcasts single values to the longest list.
fn broadcast<T: Copy>(key: &str, list: Vec<T>, fallback: T, len: usize) -> Result<Vec<T>> {
    match list.len() {
        0 => Ok(vec![fallback; len]),
        1 => Ok(vec![list[0]; len]),
        n if n == len => Ok(list),
        n => Err(Error::validation(key, format!("has {n} entries, expected 1 or {len}"))),
    }
}

impl Scenario {
    pub fn from_preset(name: &str) -> Result<Self> {
        let mut b = ScenarioBuilder::new();
        b.apply_preset(name)?;
        b.build()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut b = ScenarioBuilder::new();
        b.apply_text(text)?;
        b.build()
    }

    fn from_settings(settings: BTreeMap<String, String>) -> Result<Self> {
        let r = Reader(&settings);
        let kind = ScenarioKind::parse(r.text("scenario.kind"))?;

        let earth = EarthModel::new(r.positive("earth.radius_km")?)?;
        let orbit = OrbitConfig::new(r.positive("orbit.altitude_km")?)?;

        let wavelength_m = r.positive("beam.wavelength_nm")? * 1e-9;
        let m_squared = r.number("beam.m_squared")?;
        if !(m_squared >= 1.0 && m_squared.is_finite()) {
            return Err(Error::validation("beam.m_squared", format!("{m_squared} must be >= 1")));
        }
        let divergence_urad = r.positive("beam.divergence_urad")?;
        let beam = BeamParams::from_divergence(wavelength_m, m_squared, divergence_urad * 1e-6)?;
        let tx_radius_m = r.positive("aperture.tx_radius_m")?;
        let rx = Aperture::new(r.positive("aperture.rx_radius_m")?)?;
        let atmosphere = AtmosphereModel::new(r.probability("atmosphere.zenith_transmissivity")?)
            .map_err(|e| Error::validation("atmosphere.zenith_transmissivity", e.to_string()))?;
        let sigma = r.number("pointing.sigma_urad")?;
        check_non_negative("pointing.sigma_urad", sigma)?;
        let pointing = PointingModel::new(sigma * 1e-6, r.flag("pointing.enabled")?)?;
        let stray = StrayLightModel {
            sky_brightness: r.number("stray.sky_brightness")?,
            fov_sr: r.number("stray.fov_sr")?,
            filter_bandwidth_m: r.number("stray.filter_nm")? * 1e-9,
            window_s: r.number("stray.window_ns")? * 1e-9,
            wavelength_m,
        };
        stray.validate()?;
        let channel = ChannelModel {
            beam,
            rx,
            atmosphere,
            pointing,
            stray,
        };

        let ground_distance_km = r.number("link.ground_distance_km")?;
        check_non_negative("link.ground_distance_km", ground_distance_km)?;
        let link_kind = match r.text("link.kind") {
            "space-ground" => LinkKind::SpaceGround,
            "inter-satellite" => LinkKind::InterSatellite,
            other => {
                return Err(Error::validation(
                    "link.kind",
                    format!("`{other}` is not one of space-ground, inter-satellite"),
                ))
            }
        };
        let path_length_km = r.positive("link.path_length_km")?;
        let mut divergences_urad = r.numbers("beam.divergences_urad")?;
        for &d in &divergences_urad {
            check_positive("beam.divergences_urad", d)?;
        }
        if divergences_urad.is_empty() {
            divergences_urad.push(divergence_urad);
        }

        let repeater = RepeaterConfig {
            nesting_level: r
                .text("repeater.nesting_level")
                .parse()
                .map_err(|_| Error::validation("repeater.nesting_level", "must be a non-negative integer"))?,
            source_rate_hz: r.positive("repeater.source_rate_hz")?,
            source_efficiency: r.probability("repeater.source_efficiency")?,
            pair_probability: r.probability("repeater.pair_probability")?,
            qnd_efficiency: r.probability("repeater.qnd_efficiency")?,
            write_efficiency: 1.0,
            read_efficiency: 1.0,
            detector: DetectorModel {
                efficiency: r.probability("repeater.detector_efficiency")?,
                dark_prob_per_window: r.probability("repeater.dark_prob")?,
            },
            temporal_modes: 1,
        }
        .with_memory_efficiency(r.probability("repeater.memory_efficiency")?);
        if repeater.nesting_level > 20 {
            return Err(Error::validation("repeater.nesting_level", "must be <= 20"));
        }
        repeater.validate()?;
        let dlcz_modes = r.count("repeater.dlcz_modes")?;

        let memory = MemoryModel {
            dephasing_time_s: r.positive_or_inf("memory.dephasing_time_s")?,
            write_efficiency: 1.0,
            read_efficiency: 1.0,
            temporal_modes: r.count("memory.temporal_modes")?,
            pairs: r.count("memory.pairs")?,
        }
        .with_efficiency(r.probability("memory.efficiency")?);
        memory.validate()?;

        let protocol = ProtocolParams {
            source_rate_hz: r.positive("protocol.source_rate_hz")?,
            ec_inefficiency: r.number("protocol.ec_inefficiency")?,
            misalignment_error: r.number("protocol.misalignment_error")?,
            bsm_success: r.probability("protocol.bsm_success")?,
            qnd_efficiency: r.probability("protocol.qnd_efficiency")?,
            detector: DetectorModel {
                efficiency: r.probability("protocol.detector_efficiency")?,
                dark_prob_per_window: r.probability("protocol.dark_prob")?,
            },
            ground_terminal_efficiency: r.probability("protocol.ground_terminal_efficiency")?,
            uplink_turbulence_db: r.number("uplink.turbulence_db")?,
        };
        protocol.validate()?;

        let protocols = split_list(r.text("maqkd.protocols"))
            .map(|p| parse_protocol("maqkd.protocols", p))
            .collect::<Result<Vec<_>>>()?;
        if protocols.is_empty() {
            return Err(Error::validation("maqkd.protocols", "list is empty"));
        }
        let pairs = r.counts("downlink.pairs")?;
        let modes = r.counts("downlink.temporal_modes")?;
        let taus = r.list_positive_or_inf("downlink.dephasing_time_s")?;
        let len = pairs.len().max(modes.len()).max(taus.len()).max(1);
        let pairs = broadcast("downlink.pairs", pairs, memory.pairs, len)?;
        let modes = broadcast("downlink.temporal_modes", modes, memory.temporal_modes, len)?;
        let taus = broadcast("downlink.dephasing_time_s", taus, memory.dephasing_time_s, len)?;
        let downlink_variants = (0..len)
            .map(|i| DownlinkVariant {
                pairs: pairs[i],
                temporal_modes: modes[i],
                dephasing_time_s: taus[i],
            })
            .collect();

        let map_protocol = parse_protocol("map.protocol", r.text("map.protocol"))?;
        if map_protocol == Protocol::E91 {
            return Err(Error::validation("map.protocol", "the baseline has no memory to map"));
        }
        let map_efficiencies = r.numbers("map.memory_efficiencies")?;
        for &e in &map_efficiencies {
            check_probability("map.memory_efficiencies", e)?;
        }
        if map_efficiencies.is_empty() {
            return Err(Error::validation("map.memory_efficiencies", "list is empty"));
        }

        let sweep = Self::sweep_spec(&r, kind)?;
        Ok(Scenario {
            name: r.text("scenario.name").to_string(),
            kind,
            earth,
            orbit,
            channel,
            tx_radius_m,
            ground_distance_km,
            link_kind,
            path_length_km,
            divergences_urad,
            repeater,
            dlcz_modes,
            memory,
            protocol,
            protocols,
            downlink_variants,
            map_protocol,
            map_efficiencies,
            sweep,
            settings,
        })
    }

    fn sweep_spec(r: &Reader, kind: ScenarioKind) -> Result<SweepSpec> {
        let key = match r.text("sweep.variable") {
            "" => kind.default_sweep(),
            k => k,
        };
        let var: &SweepVariable = sweep_variable(key).filter(|_| kind.allows_sweep(key)).ok_or_else(|| {
            Error::validation(
                "sweep.variable",
                format!("`{key}` cannot be swept in a {} scenario", kind.name()),
            )
        })?;
        let bound = |k: &str, fallback: f64| -> Result<f64> {
            match r.text(k) {
                "" => Ok(fallback),
                _ => r.number(k),
            }
        };
        let start = bound("sweep.start", var.start)?;
        let stop = bound("sweep.stop", var.stop)?;
        let points = r.count("sweep.points")? as usize;
        let log = match r.text("sweep.scale") {
            "auto" => var.log,
            "log" => true,
            "linear" => false,
            other => {
                return Err(Error::validation(
                    "sweep.scale",
                    format!("`{other}` is not linear, log or auto"),
                ))
            }
        };
        if !(start.is_finite() && stop.is_finite() && start <= stop) {
            return Err(Error::validation(
                "sweep.start",
                format!("range [{start}, {stop}] is empty"),
            ));
        }
        if log && start <= 0.0 {
            return Err(Error::validation("sweep.start", "log sweeps need a positive start"));
        }
        Ok(SweepSpec {
            variable: var.key.to_string(),
            start,
            stop,
            points,
            log,
        })
    }

    /// SHA-256 over the resolved settings, one `key=value` line per schema key.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        for (k, v) in &self.settings {
            hasher.update(k.as_bytes());
            hasher.update(b"=");
            hasher.update(v.as_bytes());
            hasher.update(b"\n");
        }
        hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    fn metadata(&self) -> TableMetadata {
        TableMetadata {
            tool_version: TOOL_VERSION.to_string(),
            scenario_name: self.name.clone(),
            scenario_sha256: self.hash(),
            model_ledger_version: MODEL_LEDGER_VERSION.to_string(),
        }
    }

    fn sweep_column(&self) -> (&'static str, &'static str) {
        let var = sweep_variable(&self.sweep.variable).expect("validated sweep variable");
        (var.column, var.unit)
    }

    pub fn repeater_scenario(&self) -> RepeaterScenario {
        RepeaterScenario {
            ground_distance_km: self.ground_distance_km,
            orbit: self.orbit,
            earth: self.earth,
            channel: self.channel,
            config: self.repeater,
            dlcz_modes: self.dlcz_modes,
        }
    }

    pub fn maqkd_scenario(&self) -> MaqkdScenario {
        MaqkdScenario {
            ground_distance_km: self.ground_distance_km,
            orbit: self.orbit,
            earth: self.earth,
            channel: self.channel,
            memory: self.memory,
            params: self.protocol,
        }
    }
}

impl Reader<'_> {
    fn positive_or_inf(&self, key: &str) -> Result<f64> {
        let v = self.number(key)?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(Error::validation(key, format!("{v} must be > 0")))
        }
    }

    fn list_positive_or_inf(&self, key: &str) -> Result<Vec<f64>> {
        let values = self.numbers(key)?;
        if let Some(bad) = values.iter().find(|v| !(**v > 0.0)) {
            return Err(Error::validation(key, format!("{bad} must be > 0")));
        }
        Ok(values)
    }
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    Scenario::from_text(&text)
}

fn positive_or_nan(v: f64) -> f64 {
    if v > 0.0 && v.is_finite() {
        v
    } else {
        f64::NAN
    }
}

/// Evaluates the scenario's sweep. Failing points become `nan` cells.
pub fn run(scenario: &Scenario) -> ResultTable {
    match scenario.kind {
        ScenarioKind::LinkBudget => run_link_budget(scenario),
        ScenarioKind::Repeater => run_repeater(scenario),
        ScenarioKind::Maqkd if scenario.sweep.variable == "memory.dephasing_time_s" => run_rate_map(scenario),
        ScenarioKind::Maqkd => run_key_rates(scenario),
    }
}

/// Runs the bundled preset behind a figure id.
pub fn reproduce(figure: &str) -> Result<ResultTable> {
    if !FIGURES.contains(&figure) {
        return Err(Error::UnknownFigure(figure.to_string()));
    }
    Ok(run(&Scenario::from_preset(figure)?))
}

fn table(s: &Scenario, columns: Vec<String>, units: Vec<String>, rows: Vec<Vec<f64>>) -> ResultTable {
    ResultTable {
        metadata: s.metadata(),
        columns,
        units,
        rows,
    }
}

fn link_for_path(s: &Scenario, path_km: f64) -> Result<LinkGeometry> {
    match s.link_kind {
        LinkKind::SpaceGround => LinkGeometry::space_ground(
            path_km,
            elevation_from_slant(path_km, &s.orbit, &s.earth)?,
            ground_arc_from_slant(path_km, &s.orbit, &s.earth)?,
        ),
        LinkKind::InterSatellite => {
            let shell = s.earth.radius_km + s.orbit.altitude_km;
            let ratio = path_km / (2.0 * shell);
            if ratio > 1.0 {
                return Err(Error::Domain(format!(
                    "{path_km} km exceeds the orbital shell diameter"
                )));
            }
            LinkGeometry::inter_satellite(path_km, 2.0 * s.earth.radius_km * ratio.asin())
        }
    }
}

fn run_link_budget(s: &Scenario) -> ResultTable {
    let (x_col, x_unit) = s.sweep_column();
    let mut columns = vec![x_col.to_string(), "elevation_deg".to_string()];
    let mut units = vec![x_unit.to_string(), "deg".to_string()];
    for d in &s.divergences_urad {
        columns.push(format!("loss_{d}urad_db"));
        units.push("dB".to_string());
    }
    let rows = s
        .sweep
        .grid()
        .par_iter()
        .map(|&path| {
            let link = link_for_path(s, path);
            let mut row = vec![path, f64::NAN];
            if let Ok(Some(el)) = link.as_ref().map(|l| l.elevation_rad) {
                row[1] = el.to_degrees();
            }
            for &d in &s.divergences_urad {
                let loss = link
                    .as_ref()
                    .ok()
                    .and_then(|l| s.channel.with_divergence(d * 1e-6).ok()?.hop(l).ok())
                    .map(|b| b.loss_db())
                    .unwrap_or(f64::NAN);
                row.push(loss);
            }
            row
        })
        .collect();
    table(s, columns, units, rows)
}

fn repeater_variable(key: &str) -> RepeaterSweep {
    match key {
        "beam.divergence_urad" => RepeaterSweep::DivergenceUrad,
        "repeater.memory_efficiency" => RepeaterSweep::MemoryEfficiency,
        _ => RepeaterSweep::GroundDistanceKm,
    }
}

fn run_repeater(s: &Scenario) -> ResultTable {
    let (x_col, x_unit) = s.sweep_column();
    let columns = vec![
        x_col.to_string(),
        "T_dlcz_1mode_s".to_string(),
        format!("T_dlcz_{}mode_s", s.dlcz_modes),
        "T_hybrid_qnd_s".to_string(),
        "T_space_qnd_s".to_string(),
        "eta_tr_max".to_string(),
        "N_modes_required".to_string(),
    ];
    let units = [x_unit, "s", "s", "s", "s", "-", "-"].map(String::from).to_vec();
    let base = s.repeater_scenario();
    let variable = repeater_variable(&s.sweep.variable);
    let rows = s
        .sweep
        .grid()
        .par_iter()
        .map(|&x| {
            let Ok(point) = base.with_variable(variable, x) else {
                return vec![x, f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN];
            };
            let t = point.evaluate();
            let secs = |r: &Result<crate::repeater::RepeaterResult>| {
                r.as_ref().map(|r| positive_or_nan(r.total_time_s)).unwrap_or(f64::NAN)
            };
            let eta_max = constellation_layout(
                point.ground_distance_km,
                point.config.nesting_level,
                &point.orbit,
                &point.earth,
                Architecture::FullSpace,
            )
            .and_then(|layout| max_hop_transmission(&layout, &point.channel))
            .unwrap_or(f64::NAN);
            let modes = t
                .space_qnd
                .as_ref()
                .ok()
                .and_then(|r| r.required_modes)
                .unwrap_or(f64::NAN);
            vec![
                x,
                secs(&t.dlcz_single),
                secs(&t.dlcz_multimode),
                secs(&t.hybrid_qnd),
                secs(&t.space_qnd),
                eta_max,
                modes,
            ]
        })
        .collect();
    table(s, columns, units, rows)
}

fn downlink_column(v: &DownlinkVariant, taken: &[String]) -> String {
    let name = format!("R_down_m{}_N{}", v.pairs, v.temporal_modes);
    if taken.contains(&name) {
        format!("{name}_tau{}s", v.dephasing_time_s)
    } else {
        name
    }
}

fn run_key_rates(s: &Scenario) -> ResultTable {
    let (x_col, x_unit) = s.sweep_column();
    let mut columns = vec![x_col.to_string()];
    // (protocol, memory) per output column.
    let mut plan: Vec<(Protocol, MemoryModel)> = Vec::new();
    for &p in &s.protocols {
        match p {
            Protocol::E91 => {
                columns.push("R_e91".to_string());
                plan.push((p, s.memory));
            }
            Protocol::Uplink => {
                columns.push("R_uplink".to_string());
                plan.push((p, s.memory));
            }
            Protocol::Downlink => {
                for v in &s.downlink_variants {
                    let name = downlink_column(v, &columns);
                    columns.push(name);
                    plan.push((
                        p,
                        MemoryModel {
                            dephasing_time_s: v.dephasing_time_s,
                            temporal_modes: v.temporal_modes,
                            pairs: v.pairs,
                            ..s.memory
                        },
                    ));
                }
            }
        }
    }
    let mut units = vec![x_unit.to_string()];
    units.extend(std::iter::repeat_n("bit/s".to_string(), plan.len()));
    let base = s.maqkd_scenario();
    let rows = s
        .sweep
        .grid()
        .par_iter()
        .map(|&l| {
            let point = base.with_ground_distance(l);
            let mut row = vec![l];
            for &(protocol, memory) in &plan {
                row.push(positive_or_nan(point.with_memory(memory).secret_rate(protocol)));
            }
            row
        })
        .collect();
    table(s, columns, units, rows)
}

fn run_rate_map(s: &Scenario) -> ResultTable {
    let (x_col, x_unit) = s.sweep_column();
    let taus = s.sweep.grid();
    let map = rate_map(s.map_protocol, &s.maqkd_scenario(), &taus, &s.map_efficiencies);
    let mut columns = vec![x_col.to_string()];
    columns.extend(s.map_efficiencies.iter().map(|e| format!("R_eta{e}")));
    let mut units = vec![x_unit.to_string()];
    units.extend(std::iter::repeat_n("bit/s".to_string(), s.map_efficiencies.len()));
    let rows = taus
        .iter()
        .enumerate()
        .map(|(i, &tau)| {
            let mut row = vec![tau];
            row.extend(map.row(i).iter().map(|&v| positive_or_nan(v)));
            row
        })
        .collect();
    table(s, columns, units, rows)
}
