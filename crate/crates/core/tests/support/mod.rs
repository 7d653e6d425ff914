//! Discrete-event Monte Carlo of memory loading, storage and readout.
//!
//! Each trial is one protocol cycle, simulated use by use (uplink) or
//! round by round and slot by slot (downlink), with every photon loss,
//! noise herald, dephasing flip and readout drawn explicitly. Nothing here
//! calls into the closed-form wait statistics, so agreement is a real check.

#![allow(dead_code)]

pub mod grid;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Sample means and their standard errors.
#[derive(Debug, Clone, Copy)]
pub struct McEstimate {
    pub yield_per_cycle: f64,
    pub yield_se: f64,
    pub qber_x: f64,
    pub qber_x_se: f64,
    pub qber_z: f64,
    pub qber_z_se: f64,
    /// Mean uses (or rounds) until both memories hold a qubit, on success.
    pub expected_uses: f64,
    pub expected_uses_se: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct McLink {
    /// Probability that a photon reaches and is stored/heralded on one side.
    pub load_prob: f64,
    /// Probability of a noise herald in a window with no photon.
    pub noise_prob: f64,
    pub misalignment: f64,
    pub readout_prob: f64,
    pub bsm_success: f64,
}

#[derive(Default)]
struct Tally {
    cycles: u64,
    keyed: u64,
    x_errors: u64,
    z_errors: u64,
    loaded: u64,
    wait_sum: f64,
    wait_sq: f64,
}

impl Tally {
    fn finish(self) -> McEstimate {
        let n = self.cycles as f64;
        let k = self.keyed as f64;
        let y = k / n;
        let ex = self.x_errors as f64 / k;
        let ez = self.z_errors as f64 / k;
        let m = self.loaded as f64;
        let mean = self.wait_sum / m;
        let var = (self.wait_sq / m - mean * mean).max(0.0);
        McEstimate {
            yield_per_cycle: y,
            yield_se: (y * (1.0 - y) / n).sqrt(),
            qber_x: ex,
            qber_x_se: (ex * (1.0 - ex) / k).sqrt(),
            qber_z: ez,
            qber_z_se: (ez * (1.0 - ez) / k).sqrt(),
            expected_uses: mean,
            expected_uses_se: (var / m).sqrt(),
        }
    }
}

/// Outcome of loading one side in one window: `Some(true)` for the real
/// photon, `Some(false)` for a noise herald, `None` for nothing.
fn herald(rng: &mut ChaCha8Rng, link: &McLink) -> Option<bool> {
    if rng.gen::<f64>() < link.load_prob {
        Some(true)
    } else if rng.gen::<f64>() < link.noise_prob {
        Some(false)
    } else {
        None
    }
}

fn flip(rng: &mut ChaCha8Rng, p: f64) -> bool {
    rng.gen::<f64>() < p
}

/// Bit errors of one keyed cycle in the Z and X bases.
fn errors(rng: &mut ChaCha8Rng, link: &McLink, genuine: [bool; 2], dephase_flip: [f64; 2]) -> (bool, bool) {
    let mut z = flip(rng, link.misalignment);
    for &g in &genuine {
        if !g {
            // A noise herald stored nothing; the measured bit is a coin toss.
            z ^= flip(rng, 0.5);
        }
    }
    let mut x = z;
    for &p in &dephase_flip {
        x ^= flip(rng, p);
    }
    (x, z)
}

fn readout(rng: &mut ChaCha8Rng, link: &McLink) -> bool {
    flip(rng, link.readout_prob) && flip(rng, link.readout_prob) && flip(rng, link.bsm_success)
}

/// Uplink cycles: one window per use, no cutoff; the earlier memory
/// dephases at `decay_per_use` while it waits.
pub fn simulate_uplink(link: McLink, decay_per_use: f64, trials: u64, seed: u64) -> McEstimate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::default();
    for _ in 0..trials {
        let mut when = [0u64; 2];
        let mut genuine = [false; 2];
        let mut use_no = 0u64;
        while when[0] == 0 || when[1] == 0 {
            use_no += 1;
            for side in 0..2 {
                if when[side] == 0 {
                    if let Some(g) = herald(&mut rng, &link) {
                        when[side] = use_no;
                        genuine[side] = g;
                    }
                }
            }
        }
        t.cycles += 1;
        t.loaded += 1;
        let finish = use_no as f64;
        t.wait_sum += finish;
        t.wait_sq += finish * finish;
        let stored = [(use_no - when[0]) as f64, (use_no - when[1]) as f64];
        let dephase = stored.map(|d| 0.5 * (1.0 - (-decay_per_use * d).exp()));
        if readout(&mut rng, &link) {
            t.keyed += 1;
            let (x, z) = errors(&mut rng, &link, genuine, dephase);
            t.x_errors += x as u64;
            t.z_errors += z as u64;
        }
    }
    t.finish()
}

/// Downlink cycles: rounds of `slots` windows per side. A side is loaded by
/// the first heralding slot of a round. Both memories also hold their qubit
/// through the round trip that heralds them; a cycle is abandoned once the
/// first-loaded memory has waited `cutoff_rounds` further rounds unpaired.
pub fn simulate_downlink(
    link: McLink,
    slots: u32,
    cutoff_rounds: u64,
    decay_per_round: f64,
    trials: u64,
    seed: u64,
) -> McEstimate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::default();
    for _ in 0..trials {
        let mut when = [0u64; 2];
        let mut genuine = [false; 2];
        let mut round = 0u64;
        let mut failed = false;
        while when[0] == 0 || when[1] == 0 {
            round += 1;
            for side in 0..2 {
                if when[side] == 0 {
                    for _ in 0..slots {
                        if let Some(g) = herald(&mut rng, &link) {
                            when[side] = round;
                            genuine[side] = g;
                            break;
                        }
                    }
                }
            }
            let first = when.iter().copied().filter(|&w| w > 0).min();
            if let Some(first) = first {
                if (when[0] == 0 || when[1] == 0) && round - first >= cutoff_rounds {
                    failed = true;
                    break;
                }
            }
        }
        t.cycles += 1;
        if failed {
            continue;
        }
        t.loaded += 1;
        let finish = round as f64;
        t.wait_sum += finish;
        t.wait_sq += finish * finish;
        // Storage in rounds: the wait for the partner plus one heralding round trip.
        let stored = [(round - when[0] + 1) as f64, (round - when[1] + 1) as f64];
        let dephase = stored.map(|d| 0.5 * (1.0 - (-decay_per_round * d).exp()));
        if flip(&mut rng, link.readout_prob) && flip(&mut rng, link.readout_prob) && flip(&mut rng, link.bsm_success) {
            t.keyed += 1;
            let (x, z) = errors(&mut rng, &link, genuine, dephase);
            t.x_errors += x as u64;
            t.z_errors += z as u64;
        }
    }
    t.finish()
}

/// `|a - b|` in units of the combined standard error.
pub fn sigmas(analytic: f64, estimate: f64, se: f64) -> f64 {
    if se == 0.0 {
        if (analytic - estimate).abs() < 1e-12 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (analytic - estimate).abs() / se
    }
}
