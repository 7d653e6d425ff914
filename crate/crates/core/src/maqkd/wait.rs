//! Loading statistics of two memories that fill independently.
//!
//! Each side succeeds on a given channel use with a fixed probability, so
//! the loading times are independent geometric variables `G_a`, `G_b`.
//! A cycle ends when both are loaded, or fails once the earlier memory has
//! waited more than `cutoff` uses for the later one. All sums over the
//! joint distribution are finite or infinite geometric series and are
//! evaluated in closed form.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaitStats {
    /// `E[max(G_a, G_b) | |G_a - G_b| <= cutoff]`.
    pub expected_uses: f64,
    /// `E[exp(-decay * |G_a - G_b|) | |G_a - G_b| <= cutoff]`.
    pub dephasing_factor: f64,
    /// `P(|G_a - G_b| <= cutoff)`.
    pub success_prob: f64,
    /// Mean uses consumed per cycle, counting failed cycles (which end
    /// `cutoff` uses after the first load).
    pub mean_cycle_uses: f64,
}

/// `x^c` for `x` in [0, 1], given `1 - x` separately to keep precision near 1.
fn pow_near_one(x: f64, one_minus_x: f64, c: u64) -> f64 {
    if c == 0 {
        1.0
    } else if x == 0.0 {
        0.0
    } else {
        (c as f64 * (-one_minus_x).ln_1p()).exp()
    }
}

/// `sum_{d=1}^{c} x^d`; `c = None` is the infinite series.
fn geometric_sum(x: f64, one_minus_x: f64, cutoff: Option<u64>) -> f64 {
    match cutoff {
        None => x / one_minus_x,
        Some(0) => 0.0,
        Some(c) if one_minus_x == 0.0 => c as f64,
        Some(c) => {
            let tail = -(c as f64 * (-one_minus_x).ln_1p()).exp_m1();
            x * tail / one_minus_x
        }
    }
}

/// `sum_{d=1}^{c} d x^d`.
fn weighted_geometric_sum(x: f64, one_minus_x: f64, cutoff: Option<u64>) -> f64 {
    match cutoff {
        None => x / (one_minus_x * one_minus_x),
        Some(0) => 0.0,
        Some(c) if one_minus_x == 0.0 => (c as f64) * (c as f64 + 1.0) / 2.0,
        Some(c) if c <= 100_000 && (c as f64) * one_minus_x < 0.1 => {
            // Closed form cancels badly here; the direct sum is short.
            let mut term = 1.0;
            let mut total = 0.0;
            for d in 1..=c {
                term *= x;
                total += d as f64 * term;
            }
            total
        }
        Some(c) => {
            let xc = pow_near_one(x, one_minus_x, c);
            let head = -(c as f64 * (-one_minus_x).ln_1p()).exp_m1();
            x * (head - c as f64 * one_minus_x * xc) / (one_minus_x * one_minus_x)
        }
    }
}

/// Loading statistics for per-use success probabilities `p_a`, `p_b`.
///
/// `cutoff_uses = None` waits indefinitely; `Some(0)` requires both loads
/// on the same use. `decay_per_use` is the exponential dephasing rate of
/// the earlier memory per use of waiting.
pub fn geometric_wait_stats(p_a: f64, p_b: f64, cutoff_uses: Option<u64>, decay_per_use: f64) -> Result<WaitStats> {
    for p in [p_a, p_b] {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::Domain(format!("loading probability {p} must lie in (0, 1]")));
        }
    }
    if !(decay_per_use >= 0.0) {
        return Err(Error::Domain(format!("decay per use {decay_per_use} must be >= 0")));
    }
    let (s_a, s_b) = (1.0 - p_a, 1.0 - p_b);
    // P(neither loads on a given use) = s_a s_b; 1 - s_a s_b without cancellation.
    let one_minus_r = p_a + p_b - p_a * p_b;
    let z = p_a * p_b / one_minus_r;
    let mean_first = 1.0 / one_minus_r;

    let g_a = geometric_sum(s_a, p_a, cutoff_uses);
    let g_b = geometric_sum(s_b, p_b, cutoff_uses);
    let success = z * (1.0 + g_a + g_b);

    let tail_max = z
        * (mean_first * (1.0 + g_a + g_b)
            + weighted_geometric_sum(s_a, p_a, cutoff_uses)
            + weighted_geometric_sum(s_b, p_b, cutoff_uses));

    let damp = (-decay_per_use).exp();
    let one_minus_damp = -(-decay_per_use).exp_m1();
    let damped = |s: f64, p: f64| {
        let x = s * damp;
        // 1 - s e^-k = (1 - e^-k) + p e^-k
        geometric_sum(x, one_minus_damp + p * damp, cutoff_uses)
    };
    let dephasing = z * (1.0 + damped(s_a, p_a) + damped(s_b, p_b));

    let (failure, failed_cost) = match cutoff_uses {
        None => (0.0, 0.0),
        Some(c) => {
            let tail_a = pow_near_one(s_a, p_a, c + 1) / p_a;
            let tail_b = pow_near_one(s_b, p_b, c + 1) / p_b;
            let fail = z * (tail_a + tail_b);
            (fail, fail * (mean_first + c as f64))
        }
    };

    Ok(WaitStats {
        expected_uses: tail_max / success,
        dephasing_factor: dephasing / success,
        success_prob: success,
        mean_cycle_uses: tail_max + failed_cost,
    })
    .map(|mut stats| {
        debug_assert!((stats.success_prob + failure - 1.0).abs() < 1e-9);
        stats.success_prob = stats.success_prob.min(1.0);
        stats
    })
}
