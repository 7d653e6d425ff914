//! The flat `section.key = value` schema of scenario files.

/// One documented scenario key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeySpec {
    pub key: &'static str,
    /// Built-in default, in file syntax. Empty means "derived" (see `doc`).
    pub default: &'static str,
    pub unit: &'static str,
    pub doc: &'static str,
}

const fn k(key: &'static str, default: &'static str, unit: &'static str, doc: &'static str) -> KeySpec {
    KeySpec {
        key,
        default,
        unit,
        doc,
    }
}

/// Every accepted key. Anything else in a scenario file is rejected.
pub const KEYS: &[KeySpec] = &[
    k("scenario.name", "custom", "-", "Label copied into the metadata line"),
    k(
        "scenario.preset",
        "",
        "-",
        "Bundled preset applied underneath this file",
    ),
    k("scenario.kind", "repeater", "-", "link-budget | repeater | maqkd"),
    k("earth.radius_km", "6371", "km", "Spherical Earth radius"),
    k("orbit.altitude_km", "400", "km", "Altitude of every satellite"),
    k(
        "link.ground_distance_km",
        "20000",
        "km",
        "Ground distance between the end stations",
    ),
    k(
        "link.kind",
        "space-ground",
        "-",
        "space-ground | inter-satellite (link-budget runs)",
    ),
    k(
        "link.path_length_km",
        "1000",
        "km",
        "Hop length when not swept (link-budget runs)",
    ),
    k("beam.wavelength_nm", "780", "nm", "Carrier wavelength"),
    k("beam.m_squared", "1", "-", "Beam quality factor M^2"),
    k("beam.divergence_urad", "5", "urad", "e^-2 far-field half-angle"),
    k(
        "beam.divergences_urad",
        "",
        "urad",
        "Comma list of divergences tabulated by link-budget runs; defaults to beam.divergence_urad",
    ),
    k(
        "aperture.tx_radius_m",
        "0.15",
        "m",
        "Transmit telescope radius (recorded; the beam is set by its divergence)",
    ),
    k("aperture.rx_radius_m", "0.5", "m", "Receive telescope radius"),
    k(
        "atmosphere.zenith_transmissivity",
        "0.8",
        "-",
        "One-way transmission looking straight up",
    ),
    k("pointing.enabled", "false", "-", "Apply Gaussian pointing jitter"),
    k("pointing.sigma_urad", "0", "urad", "Pointing jitter standard deviation"),
    k(
        "stray.sky_brightness",
        "0",
        "W m^-2 sr^-1 m^-1",
        "Spectral sky radiance at the receiver",
    ),
    k("stray.fov_sr", "0", "sr", "Receiver field of view"),
    k("stray.filter_nm", "1", "nm", "Spectral filter width"),
    k("stray.window_ns", "1000", "ns", "Detection window"),
    k("repeater.nesting_level", "3", "-", "Nesting level n; 2^n segments"),
    k("repeater.source_rate_hz", "20e6", "Hz", "Pair-source repetition rate"),
    k("repeater.source_efficiency", "1", "-", "Pair-source efficiency"),
    k(
        "repeater.pair_probability",
        "0.01",
        "-",
        "DLCZ pair-creation probability per attempt",
    ),
    k("repeater.qnd_efficiency", "0.5", "-", "QND heralding efficiency"),
    k(
        "repeater.memory_efficiency",
        "0.9",
        "-",
        "Combined write x read efficiency, split evenly",
    ),
    k("repeater.detector_efficiency", "0.9", "-", "Photon detector efficiency"),
    k("repeater.dark_prob", "1e-6", "-", "Dark-click probability per window"),
    k(
        "repeater.dlcz_modes",
        "100",
        "-",
        "Temporal modes of the multimode DLCZ curve",
    ),
    k(
        "memory.dephasing_time_s",
        "5e-3",
        "s",
        "Memory dephasing time (inf allowed)",
    ),
    k(
        "memory.efficiency",
        "0.8",
        "-",
        "Combined write x read efficiency, split evenly",
    ),
    k("memory.temporal_modes", "1", "-", "Temporal modes N per memory"),
    k("memory.pairs", "1", "-", "Memory pairs m per side"),
    k("protocol.source_rate_hz", "20e6", "Hz", "Source / attempt rate"),
    k(
        "protocol.ec_inefficiency",
        "1.16",
        "-",
        "Error-correction inefficiency f",
    ),
    k("protocol.misalignment_error", "0.015", "-", "Intrinsic QBER floor"),
    k(
        "protocol.bsm_success",
        "0.5",
        "-",
        "Bell-state measurement success probability",
    ),
    k(
        "protocol.qnd_efficiency",
        "0.5",
        "-",
        "On-board QND heralding efficiency (uplink)",
    ),
    k("protocol.detector_efficiency", "0.7", "-", "Detector efficiency"),
    k("protocol.dark_prob", "1e-6", "-", "Dark-click probability per window"),
    k(
        "protocol.ground_terminal_efficiency",
        "0.063",
        "-",
        "Ground receiver throughput beyond the aperture",
    ),
    k("uplink.turbulence_db", "0", "dB", "Fixed extra uplink loss"),
    k(
        "downlink.pairs",
        "",
        "-",
        "Comma list, one downlink column each; defaults to memory.pairs",
    ),
    k(
        "downlink.temporal_modes",
        "",
        "-",
        "Comma list; defaults to memory.temporal_modes",
    ),
    k(
        "downlink.dephasing_time_s",
        "",
        "s",
        "Comma list; defaults to memory.dephasing_time_s",
    ),
    k(
        "maqkd.protocols",
        "e91,uplink,downlink",
        "-",
        "Columns of a distance sweep",
    ),
    k(
        "map.protocol",
        "uplink",
        "-",
        "Protocol of a dephasing-time sweep (uplink | downlink)",
    ),
    k(
        "map.memory_efficiencies",
        "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1",
        "-",
        "Columns of a dephasing-time sweep",
    ),
    k("sweep.variable", "", "-", "Swept key; defaults per kind"),
    k(
        "sweep.start",
        "",
        "unit of variable",
        "First grid point; defaults per variable",
    ),
    k(
        "sweep.stop",
        "",
        "unit of variable",
        "Last grid point; defaults per variable",
    ),
    k("sweep.points", "50", "-", "Grid size"),
    k(
        "sweep.scale",
        "auto",
        "-",
        "linear | log | auto (log for times, linear otherwise)",
    ),
];

pub fn lookup(key: &str) -> Option<&'static KeySpec> {
    KEYS.iter().find(|spec| spec.key == key)
}

/// Swept variables with their default ranges.
pub(crate) struct SweepVariable {
    pub key: &'static str,
    pub column: &'static str,
    pub unit: &'static str,
    pub start: f64,
    pub stop: f64,
    pub log: bool,
}

pub(crate) const SWEEP_VARIABLES: &[SweepVariable] = &[
    SweepVariable {
        key: "link.path_length_km",
        column: "path_km",
        unit: "km",
        start: 400.0,
        stop: 2250.0,
        log: false,
    },
    SweepVariable {
        key: "link.ground_distance_km",
        column: "L_km",
        unit: "km",
        start: 2000.0,
        stop: 20000.0,
        log: false,
    },
    SweepVariable {
        key: "beam.divergence_urad",
        column: "divergence_urad",
        unit: "urad",
        start: 1.0,
        stop: 20.0,
        log: false,
    },
    SweepVariable {
        key: "repeater.memory_efficiency",
        column: "eta_mem",
        unit: "-",
        start: 0.5,
        stop: 1.0,
        log: false,
    },
    SweepVariable {
        key: "memory.dephasing_time_s",
        column: "tau_s",
        unit: "s",
        start: 1e-4,
        stop: 10.0,
        log: true,
    },
];

pub(crate) fn sweep_variable(key: &str) -> Option<&'static SweepVariable> {
    SWEEP_VARIABLES.iter().find(|v| v.key == key)
}

/// Markdown table of the schema, as shipped in the docs.
pub fn schema_markdown() -> String {
    let mut out = String::from(
        "# Scenario keys\n\n\
         Generated from the schema table; `cargo test` fails if this file drifts.\n\n\
         | key | default | unit | meaning |\n|---|---|---|---|\n",
    );
    for spec in KEYS {
        let default = if spec.default.is_empty() {
            "(derived)"
        } else {
            spec.default
        };
        let doc = spec.doc.replace('|', "\\|");
        out.push_str(&format!(
            "| `{}` | `{}` | {} | {} |\n",
            spec.key, default, spec.unit, doc
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn keys_are_unique_and_sectioned() {
        let mut seen = BTreeSet::new();
        for spec in KEYS {
            assert!(seen.insert(spec.key), "duplicate {}", spec.key);
            let (section, name) = spec.key.split_once('.').unwrap();
            assert!(!section.is_empty() && !name.is_empty());
        }
    }

    #[test]
    fn sweep_variables_are_keys() {
        for v in SWEEP_VARIABLES {
            assert!(lookup(v.key).is_some(), "{}", v.key);
            assert!(v.start < v.stop);
        }
    }
}
