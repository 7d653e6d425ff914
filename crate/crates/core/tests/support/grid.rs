//! The 3x3 (loss, coherence) grids on which the closed forms are checked.

use qlink_core::channel::SPEED_OF_LIGHT_KM_S;
use qlink_core::maqkd::{
    downlink_from_hop, geometric_wait_stats, uplink_from_hop, HopLoss, MemoryModel, ProtocolParams,
};
use rayon::prelude::*;

use super::{sigmas, simulate_downlink, simulate_uplink, McLink};

pub const TRIALS: u64 = 1_000_000;
pub const BOUND: f64 = 3.0;

fn params() -> ProtocolParams {
    ProtocolParams {
        misalignment_error: 0.02,
        ..ProtocolParams::default()
    }
}

fn memory(tau_s: f64, modes: u32, pairs: u32) -> MemoryModel {
    MemoryModel {
        dephasing_time_s: tau_s,
        temporal_modes: modes,
        pairs,
        ..MemoryModel::default().with_efficiency(0.8)
    }
}

pub struct Check {
    pub label: String,
    /// Largest deviation over the compared quantities, in standard errors.
    pub worst: f64,
}

fn compare(label: String, pairs: &[(&str, f64, f64, f64)]) -> Check {
    let mut worst: f64 = 0.0;
    for &(name, analytic, estimate, se) in pairs {
        let s = sigmas(analytic, estimate, se);
        if s > BOUND {
            eprintln!("{label} {name}: analytic {analytic:.6e} simulated {estimate:.6e} se {se:.2e} ({s:.2} sigma)");
        }
        worst = worst.max(s);
    }
    Check { label, worst }
}

fn uplink_point(i: usize, load: f64, decay: f64) -> Check {
    let p = params();
    let noise = 1e-2;
    let mem = memory(1.0 / (p.source_rate_hz * decay), 1, 1);
    let hop_t = load / (p.qnd_efficiency * mem.write_efficiency);
    let hop = HopLoss {
        transmission: hop_t,
        noise_prob: noise,
    };
    let analytic = uplink_from_hop(hop, &mem, &p).unwrap();
    let herald = load + (1.0 - load) * noise;
    let wait = geometric_wait_stats(herald, herald, None, decay).unwrap();

    let link = McLink {
        load_prob: load,
        noise_prob: noise,
        misalignment: p.misalignment_error,
        readout_prob: mem.read_efficiency * p.detector.efficiency,
        bsm_success: p.bsm_success,
    };
    let mc = simulate_uplink(link, decay, TRIALS, 0x5EED_0000 + i as u64);
    compare(
        format!("uplink load={load} decay={decay}"),
        &[
            ("yield", analytic.yield_per_use, mc.yield_per_cycle, mc.yield_se),
            ("qber_x", analytic.qber_x, mc.qber_x, mc.qber_x_se),
            ("qber_z", analytic.qber_z, mc.qber_z, mc.qber_z_se),
            (
                "expected_uses",
                wait.expected_uses,
                mc.expected_uses,
                mc.expected_uses_se,
            ),
        ],
    )
}

fn downlink_point(i: usize, slot_prob: f64, tau_rounds: f64) -> Check {
    let p = params();
    let noise = 1e-3;
    let (modes, pairs) = (4u32, 2u32);
    let los_km = 600.0;
    let round_s = 2.0 * los_km / SPEED_OF_LIGHT_KM_S;
    let mem = memory(tau_rounds * round_s, modes, pairs);
    let hop_t = slot_prob / (p.ground_terminal_efficiency * p.detector.efficiency * mem.write_efficiency);
    let hop = HopLoss {
        transmission: hop_t,
        noise_prob: noise,
    };
    let analytic = downlink_from_hop(hop, los_km, &mem, &p).unwrap();

    let herald = slot_prob + (1.0 - slot_prob) * noise;
    let per_round = 1.0 - (1.0 - herald).powi((modes * pairs) as i32);
    let cutoff = tau_rounds.floor() as u64 - 1;
    let wait = geometric_wait_stats(per_round, per_round, Some(cutoff), 1.0 / tau_rounds).unwrap();

    let link = McLink {
        load_prob: slot_prob,
        noise_prob: noise,
        misalignment: p.misalignment_error,
        readout_prob: mem.read_efficiency,
        bsm_success: p.bsm_success,
    };
    let mc = simulate_downlink(
        link,
        modes * pairs,
        cutoff,
        1.0 / tau_rounds,
        TRIALS,
        0xD0_0000 + i as u64,
    );
    compare(
        format!("downlink slot={slot_prob} tau/T={tau_rounds}"),
        &[
            ("yield", analytic.yield_per_use, mc.yield_per_cycle, mc.yield_se),
            ("qber_x", analytic.qber_x, mc.qber_x, mc.qber_x_se),
            ("qber_z", analytic.qber_z, mc.qber_z, mc.qber_z_se),
            (
                "expected_uses",
                wait.expected_uses,
                mc.expected_uses,
                mc.expected_uses_se,
            ),
        ],
    )
}

fn grid<T: Copy + Sync>(a: &[T], b: &[T]) -> Vec<(usize, T, T)> {
    let mut out = Vec::new();
    for &x in a {
        for &y in b {
            out.push((out.len(), x, y));
        }
    }
    out
}

/// Uplink: per-use load probability x memory decay per use.
pub fn uplink_grid() -> Vec<Check> {
    let points = grid(&[0.3, 0.1, 0.03], &[0.3, 0.03, 0.003]);
    points
        .par_iter()
        .map(|&(i, load, decay)| uplink_point(i, load, decay))
        .collect()
}

/// Downlink: per-slot load probability x coherence time in round trips.
pub fn downlink_grid() -> Vec<Check> {
    let points = grid(&[0.05, 0.02, 0.005], &[3.5, 10.5, 40.5]);
    points
        .par_iter()
        .map(|&(i, slot, tau)| downlink_point(i, slot, tau))
        .collect()
}
