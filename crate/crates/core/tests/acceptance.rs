//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
//!
//! Run with `cargo test -p qlink-core --test acceptance`. Anchors marked
//! "model-dependent" compare against published reference values with wide
//! tolerances; the exact checks use independent oracles written here.

mod support;

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qlink_core::channel::{
    atmospheric_efficiency, beam_radius_at, diffraction_efficiency, Aperture, AtmosphereModel, BeamParams,
    DetectorModel, SPEED_OF_LIGHT_KM_S,
};
use qlink_core::geometry::{constellation_layout, Architecture, ConstellationLayout};
use qlink_core::maqkd::{MemoryModel, Protocol};
use qlink_core::repeater::{
    dlcz_time, max_hop_transmission, qnd_time, required_modes, RepeaterConfig, RepeaterScenario, RepeaterSweep,
};
use qlink_core::scenario::{self, preset_names, Scenario};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

// ---------------------------------------------------------------------------
// 1. Channel model against direct quadrature

/// Gauss–Legendre nodes and weights on [-1, 1].
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Composite rule: `panels` equal sub-intervals of [lo, hi].
fn integrate(lo: f64, hi: f64, panels: usize, rule: &[(f64, f64)], f: impl Fn(f64) -> f64) -> f64 {
    let h = (hi - lo) / panels as f64;
    (0..panels)
        .map(|p| {
            let mid = lo + (p as f64 + 0.5) * h;
            rule.iter().map(|&(x, w)| w * f(mid + 0.5 * h * x)).sum::<f64>() * 0.5 * h
        })
        .sum()
}

/// Power of a normalized Gaussian spot of radius `w` falling inside a disk of
/// radius `a`, integrated over Cartesian x/y with x = a sin(phi).
fn gaussian_power_in_disk(w: f64, a: f64) -> f64 {
    let rule = gauss_legendre(24);
    let peak = 2.0 / (std::f64::consts::PI * w * w);
    let half = std::f64::consts::FRAC_PI_2;
    integrate(-half, half, 24, &rule, |phi| {
        let x = a * phi.sin();
        let chord = a * phi.cos();
        let inner = integrate(-chord, chord, 24, &rule, |y| {
            peak * (-2.0 * (x * x + y * y) / (w * w)).exp()
        });
        inner * a * phi.cos()
    })
}

fn channel_exactness() -> Outcome {
    let beam = BeamParams::from_divergence(780e-9, 1.0, 10e-6).unwrap();
    let distance_m = 800e3;
    let w = beam_radius_at(&beam, distance_m);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let ratio = 0.1 * 100f64.powf(i as f64 / 19.0); // w / a from 0.1 to 10
        let rx = Aperture::new(w / ratio).unwrap();
        let model = diffraction_efficiency(&beam, distance_m, &rx);
        let oracle = gaussian_power_in_disk(w, w / ratio);
        worst = worst.max((model - oracle).abs());
    }
    let atm30 = atmospheric_efficiency(&AtmosphereModel::new(0.8).unwrap(), 30f64.to_radians()).unwrap();
    let zenith = atmospheric_efficiency(&AtmosphereModel::default(), std::f64::consts::FRAC_PI_2).unwrap();
    // The csc law is evaluated in floating point; "exact" means within two ulps.
    let ulps = |v: f64, target: f64| (v - target).abs() / (target * f64::EPSILON);
    let pass = worst <= 1e-6 && ulps(atm30, 0.64) <= 2.0 && ulps(zenith, 0.8) <= 2.0;
    Outcome::new(
        pass,
        format!(
            "max |diffraction - quadrature| = {worst:.1e} over 20 w/a points; atm(30 deg) = {atm30:.17} ({:.1} ulp); zenith = {zenith}",
            ulps(atm30, 0.64)
        ),
    )
}

// ---------------------------------------------------------------------------
// 2. Closed forms against exact rational arithmetic

fn q(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

fn qpow(base: &BigRational, exp: u32) -> BigRational {
    (0..exp).fold(BigRational::one(), |acc, _| acc * base)
}

fn light_speed() -> BigRational {
    // 299 792.458 km/s, exactly.
    BigRational::new(BigInt::from(299_792_458), BigInt::from(1000))
}

fn dlcz_exact(cfg: &RepeaterConfig, n: u32, segment_km: f64, eta_t: f64) -> BigRational {
    let eta_d = q(cfg.detector.efficiency);
    let eta_md = q(cfg.read_efficiency) * q(cfg.write_efficiency) * &eta_d;
    let mut swaps = BigRational::one();
    for k in 1..=n {
        let two_k = BigRational::from_integer(BigInt::from(2u64.pow(k)));
        swaps *= &two_k - (&two_k - BigRational::one()) * &eta_md;
    }
    let three = BigRational::from_integer(BigInt::from(3));
    let numerator = qpow(&three, n + 1) * q(segment_km) / light_speed() * swaps;
    let denominator = &eta_d * q(eta_t) * q(cfg.pair_probability) * qpow(&eta_md, n + 2);
    numerator / denominator / BigRational::from_integer(BigInt::from(cfg.temporal_modes))
}

fn qnd_exact(cfg: &RepeaterConfig, n: u32, p0: f64) -> BigRational {
    let two = BigRational::from_integer(BigInt::from(2));
    let three = BigRational::from_integer(BigInt::from(3));
    let swap = &two / &three * (qpow(&q(cfg.read_efficiency), 2) * qpow(&q(cfg.detector.efficiency), 2) / &two);
    let rate = q(cfg.source_rate_hz)
        * q(cfg.source_efficiency)
        * q(p0)
        * qpow(&q(cfg.qnd_efficiency), 2)
        * qpow(&q(cfg.write_efficiency), 2)
        * qpow(&swap, n);
    BigRational::one() / rate
}

fn rel_err(value: f64, exact: &BigRational) -> f64 {
    ((q(value) - exact) / exact).abs().to_f64().unwrap()
}

fn layout(n: u32, segment_km: f64) -> ConstellationLayout {
    ConstellationLayout {
        nesting_level: n,
        total_ground_distance_km: segment_km * 2f64.powi(n as i32),
        segment_length_km: segment_km,
        hops: Vec::new(),
        architecture: Architecture::FullSpace,
    }
}

fn closed_form_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC10_5ED);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.gen_range(0..=5u32);
        let cfg = RepeaterConfig {
            nesting_level: n,
            source_rate_hz: 10f64.powf(rng.gen_range(6.0..8.0)),
            source_efficiency: rng.gen_range(0.3..1.0),
            pair_probability: rng.gen_range(1e-3..0.1),
            qnd_efficiency: rng.gen_range(0.2..1.0),
            write_efficiency: rng.gen_range(0.5..1.0),
            read_efficiency: rng.gen_range(0.5..1.0),
            detector: DetectorModel::new(rng.gen_range(0.3..1.0), 0.0).unwrap(),
            temporal_modes: rng.gen_range(1..1000),
        };
        let segment_km = rng.gen_range(200.0..5000.0);
        let eta_t = 10f64.powf(rng.gen_range(-6.0..-1.0));
        let p0 = 10f64.powf(rng.gen_range(-9.0..-2.0));
        let d = dlcz_time(&cfg, &layout(n, segment_km), eta_t).unwrap().total_time_s;
        let t = qnd_time(&cfg, p0).unwrap().total_time_s;
        worst = worst.max(rel_err(d, &dlcz_exact(&cfg, n, segment_km, eta_t)));
        worst = worst.max(rel_err(t, &qnd_exact(&cfg, n, p0)));
    }

    // With no nesting both expressions collapse to their single-link forms.
    let cfg = RepeaterConfig {
        nesting_level: 0,
        ..RepeaterConfig::default()
    };
    let (segment_km, eta_t, p0) = (1250.0, 1e-3, 1e-5);
    let eta_d = q(cfg.detector.efficiency);
    let eta_md = q(cfg.read_efficiency) * q(cfg.write_efficiency) * &eta_d;
    let dlcz_single = BigRational::from_integer(BigInt::from(3)) * q(segment_km)
        / light_speed()
        / (&eta_d * q(eta_t) * q(cfg.pair_probability) * &eta_md * &eta_md);
    let qnd_single = BigRational::one()
        / (q(cfg.source_rate_hz)
            * q(cfg.source_efficiency)
            * q(p0)
            * qpow(&q(cfg.qnd_efficiency), 2)
            * qpow(&q(cfg.write_efficiency), 2));
    let symbolic = dlcz_exact(&cfg, 0, segment_km, eta_t) == dlcz_single && qnd_exact(&cfg, 0, p0) == qnd_single;
    let d0 = rel_err(
        dlcz_time(&cfg, &layout(0, segment_km), eta_t).unwrap().total_time_s,
        &dlcz_single,
    );
    let t0 = rel_err(qnd_time(&cfg, p0).unwrap().total_time_s, &qnd_single);

    let pass = worst <= 1e-12 && symbolic && d0 <= 1e-12 && t0 <= 1e-12;
    Outcome::new(
        pass,
        format!(
            "worst relative error {worst:.1e} over 100 draws; n=0 reductions exact: {symbolic} (implementation {d0:.1e}, {t0:.1e})"
        ),
    )
}

// ---------------------------------------------------------------------------
// 3-5. Repeater chains

fn fig3_base() -> RepeaterScenario {
    Scenario::from_preset("fig3a").unwrap().repeater_scenario()
}

fn repeater_ordering() -> Outcome {
    let base = fig3_base();
    let mut ordered = true;
    let mut ratios = Vec::new();
    let mut space_20000 = f64::NAN;
    for i in 0..=60 {
        let l = 5000.0 + 250.0 * i as f64;
        let s = base.with_variable(RepeaterSweep::GroundDistanceKm, l).unwrap();
        let t = s.evaluate();
        let secs = |r: &qlink_core::Result<qlink_core::repeater::RepeaterResult>| {
            r.as_ref().map(|r| r.total_time_s).unwrap_or(f64::NAN)
        };
        let (d1, dn, hy, sp) = (
            secs(&t.dlcz_single),
            secs(&t.dlcz_multimode),
            secs(&t.hybrid_qnd),
            secs(&t.space_qnd),
        );
        ordered &= d1 > dn && dn > hy && hy > sp;
        ratios.push((l, hy / sp));
        if l == 20000.0 {
            space_20000 = sp;
        }
    }
    let ratio_20000 = ratios.last().unwrap().1;
    let decreases: Vec<f64> = ratios.windows(2).filter(|w| w[1].1 < w[0].1).map(|w| w[1].0).collect();
    let monotone = decreases.is_empty();
    let min_ratio = ratios.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let pass = ordered && ratio_20000 >= 5.0 && monotone && (0.03..=15.0).contains(&space_20000);
    let monotone_note = if monotone {
        "monotone".to_string()
    } else {
        format!(
            "NOT monotone (ratio falls at {} of 60 steps, first at {} km; min {min_ratio:.2})",
            decreases.len(),
            decreases[0]
        )
    };
    Outcome::new(
        pass,
        format!(
            "ordering over 5000-20000 km: {ordered}; hybrid/space at 20000 km = {ratio_20000:.2} (>= 5); ratio {monotone_note}; space-QND T(20000 km) = {space_20000:.3} s (reference ~0.7 s, window [0.03, 15])"
        ),
    )
}

fn memory_sensitivity() -> Outcome {
    let base = fig3_base();
    let at = |eta: f64| {
        base.with_variable(RepeaterSweep::MemoryEfficiency, eta)
            .unwrap()
            .qnd(Architecture::FullSpace)
            .unwrap()
            .total_time_s
    };
    let (low, high) = (at(0.5), at(0.9));
    let ratio = low / high;
    Outcome::new(
        ratio > 100.0,
        format!("space-QND T(eta_mem=0.5) / T(eta_mem=0.9) = {low:.3} s / {high:.4} s = {ratio:.1}x (required > 100x)"),
    )
}

fn multimode_requirement() -> Outcome {
    let (r, s, e, l) = (20e6, 1.0, 2.19e-3, 2500.0);
    let base = required_modes(r, s, e, l);
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
    let mut worst: f64 = 0.0;
    for k in [0.5, 2.0, 3.0, 7.25] {
        worst = worst.max(rel(required_modes(r * k, s, e, l), k * base));
        worst = worst.max(rel(required_modes(r, s * k, e, l), k * base));
        worst = worst.max(rel(required_modes(r, s, e * k, l), k * base));
        worst = worst.max(rel(required_modes(r, s, e, l * k), k * base));
    }
    let exact = r * s * e * l / SPEED_OF_LIGHT_KM_S;
    worst = worst.max(rel(base, exact));

    let scen = fig3_base();
    let layout = constellation_layout(
        scen.ground_distance_km,
        scen.config.nesting_level,
        &scen.orbit,
        &scen.earth,
        Architecture::FullSpace,
    )
    .unwrap();
    let eta_max = max_hop_transmission(&layout, &scen.channel).unwrap();
    let pipeline_n = scen.qnd(Architecture::FullSpace).unwrap().required_modes.unwrap();
    let factor = (pipeline_n / 365.0).max(365.0 / pipeline_n);
    let pass = worst <= 1e-12 && (base - 365.0).abs() <= 1.0 && factor <= 6.0;
    Outcome::new(
        pass,
        format!(
            "linearity error {worst:.1e}; N(eta=2.19e-3) = {base:.2}; pipeline eta_tr,max = {eta_max:.3e}, N = {pipeline_n:.0} over {:.0} km segments ({factor:.2}x the reference 365, model-dependent, limit 6x)",
            layout.segment_length_km
        ),
    )
}

// ---------------------------------------------------------------------------
// 6-7. Key-rate anchors

fn e91_anchors() -> Outcome {
    let base = Scenario::from_preset("fig5").unwrap().maqkd_scenario();
    let rate = |km: f64, hz: f64| {
        let mut s = base.with_ground_distance(km);
        s.params.source_rate_hz = hz;
        s.secret_rate(Protocol::E91)
    };
    let (a, b) = (rate(1120.0, 5.9e6), rate(1000.0, 20e6));
    let pass = (0.03..=0.75).contains(&a) && (0.3..=3.0).contains(&b);
    Outcome::new(
        pass,
        format!(
            "R(1120 km, 5.9 MHz) = {a:.3} bit/s (reference 0.15, window [0.03, 0.75]); R(1000 km, 20 MHz) = {b:.3} bit/s (reference ~1, window [0.3, 3])"
        ),
    )
}

/// Largest ground distance on a 5 km grid with a positive key rate.
fn key_range(rate: impl Fn(f64) -> f64) -> f64 {
    let mut last = f64::NAN;
    let mut km = 100.0;
    while km <= 4000.0 {
        if rate(km) > 0.0 {
            last = km;
        }
        km += 5.0;
    }
    last
}

fn maqkd_anchors() -> Outcome {
    let uplink = Scenario::from_preset("table1-uplink").unwrap().maqkd_scenario();
    let cutoff = key_range(|km| uplink.with_ground_distance(km).secret_rate(Protocol::Uplink));
    let cutoff_ok = (1100.0..=1800.0).contains(&cutoff);

    let map = scenario::reproduce("fig4a").unwrap();
    let taus = map.column("tau_s").unwrap();
    let short: Vec<&Vec<f64>> = map
        .rows
        .iter()
        .zip(&taus)
        .filter(|(_, &t)| t < 2e-3)
        .map(|(r, _)| r)
        .collect();
    let zero_short = !short.is_empty() && short.iter().all(|r| r[1..].iter().all(|v| v.is_nan() || *v <= 0.0));

    let fig5 = Scenario::from_preset("fig5").unwrap().maqkd_scenario();
    let with = |pairs: u32, modes: u32, tau: f64| {
        let memory = MemoryModel {
            pairs,
            temporal_modes: modes,
            dephasing_time_s: tau,
            ..fig5.memory
        };
        fig5.with_memory(memory)
    };
    let m1 = with(1, 1000, 7.5);
    let m100 = with(100, 1000, 0.1);
    let mut best_gain: f64 = 0.0;
    let mut in_window = false;
    for i in 0..=50 {
        let km = 500.0 + 10.0 * i as f64;
        let e91 = fig5.with_ground_distance(km).secret_rate(Protocol::E91);
        let down = m1.with_ground_distance(km).secret_rate(Protocol::Downlink);
        let gain = down / e91;
        best_gain = best_gain.max(gain);
        in_window |= (3.0..=30.0).contains(&gain);
    }
    let range_m1 = key_range(|km| m1.with_ground_distance(km).secret_rate(Protocol::Downlink));
    let range_m100 = key_range(|km| m100.with_ground_distance(km).secret_rate(Protocol::Downlink));
    let mut worst_fraction = f64::INFINITY;
    let mut worst_shared = f64::INFINITY;
    let mut km = 100.0;
    while km <= range_m1 {
        let a = m1.with_ground_distance(km).secret_rate(Protocol::Downlink);
        let b = m100.with_ground_distance(km).secret_rate(Protocol::Downlink);
        worst_fraction = worst_fraction.min(b / a);
        if b > 0.0 {
            worst_shared = worst_shared.min(b / a);
        }
        km += 5.0;
    }
    let reach_ok = range_m100 >= range_m1 && worst_fraction >= 0.3;

    let pass = cutoff_ok && zero_short && in_window && reach_ok;
    Outcome::new(
        pass,
        format!(
            "model-dependent: uplink key range ends at {cutoff} km (reference ~1450, window [1100, 1800]); \
             uplink map zero for all {} tau < 2 ms rows: {zero_short}; \
             downlink N=1000 m=1 gain over E91 in 500-1000 km peaks at {best_gain:.1}x (window [3, 30]: {in_window}); \
             m=100 tau=0.1 s reaches {range_m100} km vs m=1 tau=7.5 s {range_m1} km, worst rate fraction {worst_fraction:.2} (>= 0.3; {worst_shared:.2} where both give key)",
            short.len()
        ),
    )
}

// ---------------------------------------------------------------------------
// 8-9. Simulation oracle and determinism

fn monte_carlo_equivalence() -> Outcome {
    let mut checks = support::grid::uplink_grid();
    checks.extend(support::grid::downlink_grid());
    let worst = checks.iter().map(|c| c.worst).fold(0.0, f64::max);
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| c.worst > support::grid::BOUND)
        .map(|c| c.label.as_str())
        .collect();
    Outcome::new(
        failed.is_empty(),
        format!(
            "{} grid points x {} trials; worst deviation {worst:.2} standard errors (limit {}){}",
            checks.len(),
            support::grid::TRIALS,
            support::grid::BOUND,
            if failed.is_empty() {
                String::new()
            } else {
                format!("; outside: {failed:?}")
            }
        ),
    )
}

fn determinism() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_qlink"))
            .args(["reproduce", "fig5"])
            .output()
            .expect("spawn qlink")
    };
    let (a, b) = (run(), run());
    let identical = a.status.success() && b.status.success() && a.stdout == b.stdout && !a.stdout.is_empty();
    let mut failures = Vec::new();
    let names: Vec<&str> = preset_names().collect();
    for name in &names {
        match Scenario::from_preset(name) {
            Ok(s) => {
                let table = scenario::run(&s);
                if table.rows.len() != s.sweep.points {
                    failures.push(format!("{name}: {} rows", table.rows.len()));
                }
            }
            Err(e) => failures.push(format!("{name}: {e}")),
        }
    }
    Outcome::new(
        identical && failures.is_empty(),
        format!(
            "reproduce fig5 twice byte-identical: {identical} ({} bytes); {} presets ran{}",
            a.stdout.len(),
            names.len(),
            if failures.is_empty() {
                String::new()
            } else {
                format!("; failures: {failures:?}")
            }
        ),
    )
}

fn main() -> ExitCode {
    type Check = fn() -> Outcome;
    let criteria: &[(u32, &str, Check, Duration)] = &[
        (1, "channel-model exactness", channel_exactness, Duration::from_secs(10)),
        (
            2,
            "closed-form exactness",
            closed_form_exactness,
            Duration::from_secs(5),
        ),
        (
            3,
            "repeater ordering and scaling",
            repeater_ordering,
            Duration::from_secs(30),
        ),
        (
            4,
            "memory-efficiency sensitivity",
            memory_sensitivity,
            Duration::from_secs(5),
        ),
        (
            5,
            "multimode requirement",
            multimode_requirement,
            Duration::from_secs(5),
        ),
        (6, "E91 calibration anchors", e91_anchors, Duration::from_secs(10)),
        (7, "MA-QKD behavior anchors", maqkd_anchors, Duration::from_secs(120)),
        (
            8,
            "Monte Carlo oracle equivalence",
            monte_carlo_equivalence,
            Duration::from_secs(300),
        ),
        (9, "determinism", determinism, Duration::from_secs(60)),
    ];
    // `cargo test` passes harness flags; a positional argument filters by number.
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for &(id, name, check, budget) in criteria {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let pass = outcome.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {id} ({name}): {} [{:.2} s of {} s{}]",
            if pass { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64(),
            budget.as_secs(),
            if in_time { "" } else { ", over budget" }
        );
    }
    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criterion/criteria failed");
        ExitCode::FAILURE
    }
}
