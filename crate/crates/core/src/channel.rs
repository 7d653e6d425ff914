//! Per-hop optical transmissivity and noise.
//!
//! A hop's transmissivity is the product of Gaussian-beam diffraction into
//! the receiver aperture, slant-path atmospheric absorption (space-ground
//! hops only) and an optional pointing-jitter factor. Noise is reported per
//! detection window as stray-light counts plus detector dark counts.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{check_non_negative, check_positive, check_probability, Error, Result};
use crate::geometry::{LinkGeometry, LinkKind};

pub const PLANCK_J_S: f64 = 6.626_070_15e-34;
pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;
pub const SPEED_OF_LIGHT_KM_S: f64 = SPEED_OF_LIGHT_M_S / 1e3;

/// Transmitted Gaussian beam.
///
/// The waist and the far-field half-angle are tied by
/// `divergence = m_squared * wavelength / (pi * waist)`; constructors take one
/// of the two and derive the other.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BeamParams {
    pub wavelength_m: f64,
    pub waist_m: f64,
    pub m_squared: f64,
    /// e^-2 far-field half-angle.
    pub divergence_rad: f64,
}

impl BeamParams {
    pub fn from_divergence(wavelength_m: f64, m_squared: f64, divergence_rad: f64) -> Result<Self> {
        check_beam("beam.divergence_urad", wavelength_m, m_squared, divergence_rad)?;
        Ok(Self {
            wavelength_m,
            waist_m: waist_from_divergence(wavelength_m, m_squared, divergence_rad),
            m_squared,
            divergence_rad,
        })
    }

    pub fn from_waist(wavelength_m: f64, m_squared: f64, waist_m: f64) -> Result<Self> {
        check_beam("beam.waist_m", wavelength_m, m_squared, waist_m)?;
        Ok(Self {
            wavelength_m,
            waist_m,
            m_squared,
            divergence_rad: m_squared * wavelength_m / (PI * waist_m),
        })
    }

    /// Distance over which the beam area doubles.
    pub fn rayleigh_range_m(&self) -> f64 {
        PI * self.waist_m * self.waist_m / (self.m_squared * self.wavelength_m)
    }
}

fn check_beam(key: &str, wavelength_m: f64, m_squared: f64, primary: f64) -> Result<()> {
    check_positive("beam.wavelength_nm", wavelength_m)?;
    check_positive(key, primary)?;
    if !(m_squared >= 1.0 && m_squared.is_finite()) {
        return Err(Error::validation("beam.m_squared", format!("{m_squared} must be >= 1")));
    }
    Ok(())
}

/// Circular receiver aperture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Aperture {
    pub radius_m: f64,
}

impl Aperture {
    pub fn new(radius_m: f64) -> Result<Self> {
        check_positive("aperture.rx_radius_m", radius_m)?;
        Ok(Self { radius_m })
    }

    pub fn diameter_m(&self) -> f64 {
        2.0 * self.radius_m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AtmosphereModel {
    /// One-way transmissivity looking straight up.
    pub zenith_transmissivity: f64,
}

impl AtmosphereModel {
    pub fn new(zenith_transmissivity: f64) -> Result<Self> {
        if !(zenith_transmissivity > 0.0 && zenith_transmissivity <= 1.0) {
            return Err(Error::validation(
                "atmosphere.zenith_transmissivity",
                format!("{zenith_transmissivity} must lie in (0, 1]"),
            ));
        }
        Ok(Self { zenith_transmissivity })
    }
}

impl Default for AtmosphereModel {
    fn default() -> Self {
        // 780 nm.
        Self {
            zenith_transmissivity: 0.8,
        }
    }
}

/// Gaussian pointing jitter, off unless enabled.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct PointingModel {
    pub sigma_rad: f64,
    pub enabled: bool,
}

impl PointingModel {
    pub fn new(sigma_rad: f64, enabled: bool) -> Result<Self> {
        check_non_negative("pointing.sigma_urad", sigma_rad)?;
        Ok(Self { sigma_rad, enabled })
    }
}

/// Sky background collected by the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrayLightModel {
    /// Spectral radiance in W m^-2 sr^-1 m^-1.
    pub sky_brightness: f64,
    pub fov_sr: f64,
    pub filter_bandwidth_m: f64,
    pub window_s: f64,
    pub wavelength_m: f64,
}

impl StrayLightModel {
    pub fn validate(&self) -> Result<()> {
        check_non_negative("stray.sky_brightness", self.sky_brightness)?;
        check_non_negative("stray.fov_usr", self.fov_sr)?;
        check_non_negative("stray.filter_nm", self.filter_bandwidth_m)?;
        check_non_negative("detector.window_ns", self.window_s)?;
        check_positive("beam.wavelength_nm", self.wavelength_m)
    }
}

impl Default for StrayLightModel {
    fn default() -> Self {
        Self {
            sky_brightness: 0.0,
            fov_sr: 0.0,
            filter_bandwidth_m: 1e-9,
            window_s: 1e-6,
            wavelength_m: 780e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectorModel {
    pub efficiency: f64,
    pub dark_prob_per_window: f64,
}

impl DetectorModel {
    pub fn new(efficiency: f64, dark_prob_per_window: f64) -> Result<Self> {
        check_probability("detector.efficiency", efficiency)?;
        check_probability("detector.dark_prob", dark_prob_per_window)?;
        Ok(Self {
            efficiency,
            dark_prob_per_window,
        })
    }
}

impl Default for DetectorModel {
    fn default() -> Self {
        Self {
            efficiency: 0.9,
            dark_prob_per_window: 1e-6,
        }
    }
}

/// Transmissivity decomposition of one hop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelBudget {
    pub eta_diffraction: f64,
    pub eta_atmosphere: f64,
    pub eta_pointing: f64,
    pub eta_total: f64,
    pub stray_counts_per_window: f64,
}

impl ChannelBudget {
    pub fn loss_db(&self) -> f64 {
        -10.0 * self.eta_total.log10()
    }
}

/// Beam waist that yields the far-field half-angle `divergence_rad`.
pub fn waist_from_divergence(wavelength_m: f64, m_squared: f64, divergence_rad: f64) -> f64 {
    m_squared * wavelength_m / (PI * divergence_rad)
}

/// e^-2 beam radius after propagating `distance_m`.
///
/// `M^2 lambda` replaces `lambda` in the spreading term so that the radius
/// tends to `divergence * distance` in the far field.
pub fn beam_radius_at(beam: &BeamParams, distance_m: f64) -> f64 {
    let w0 = beam.waist_m;
    let spread = beam.m_squared * beam.wavelength_m * distance_m / (PI * w0 * w0);
    w0 * (1.0 + spread * spread).sqrt()
}

/// Fraction of the beam power that falls inside the receiver aperture.
pub fn diffraction_efficiency(beam: &BeamParams, distance_m: f64, rx: &Aperture) -> f64 {
    let w = beam_radius_at(beam, distance_m);
    let d = rx.diameter_m();
    -(-(d * d) / (2.0 * w * w)).exp_m1()
}

/// Slant-path absorption at `elevation_rad`: the zenith value raised to csc(elevation).
pub fn atmospheric_efficiency(atm: &AtmosphereModel, elevation_rad: f64) -> Result<f64> {
    if !(elevation_rad > 0.0) {
        return Err(Error::InvalidElevation(elevation_rad));
    }
    Ok((atm.zenith_transmissivity.ln() / elevation_rad.sin()).exp())
}

/// Pointing loss with jitter and divergence both expressed as angles.
pub fn pointing_efficiency(pointing: &PointingModel, beam: &BeamParams) -> f64 {
    if !pointing.enabled {
        return 1.0;
    }
    let ratio = pointing.sigma_rad / beam.divergence_rad;
    (-8.0 * ratio * ratio).exp()
}

/// Optical energy collected from the sky in one acquisition window.
pub fn collected_stray_energy(stray: &StrayLightModel, rx: &Aperture) -> f64 {
    let collecting = PI * rx.diameter_m() / 2.0;
    stray.sky_brightness * stray.fov_sr * collecting * collecting * stray.filter_bandwidth_m * stray.window_s
}

/// Mean stray photon count in one acquisition window.
pub fn stray_counts(stray: &StrayLightModel, rx: &Aperture) -> f64 {
    stray.wavelength_m / (PLANCK_J_S * SPEED_OF_LIGHT_M_S) * collected_stray_energy(stray, rx)
}

/// Probability of at least one noise click in a window: dark counts plus
/// Poisson-distributed stray photons seen by a detector of the given efficiency.
pub fn noise_probability(detector: &DetectorModel, stray_counts_per_window: f64) -> f64 {
    let stray_click = -(-stray_counts_per_window * detector.efficiency).exp_m1();
    let dark = detector.dark_prob_per_window;
    let p = dark + (1.0 - dark) * stray_click;
    p.clamp(0.0, 1.0)
}

/// Budget of a single hop.
pub fn hop_transmission(
    link: &LinkGeometry,
    beam: &BeamParams,
    rx: &Aperture,
    atm: &AtmosphereModel,
    pointing: &PointingModel,
    stray: &StrayLightModel,
) -> Result<ChannelBudget> {
    let eta_diffraction = diffraction_efficiency(beam, link.path_length_km * 1e3, rx);
    let eta_atmosphere = match link.kind {
        LinkKind::SpaceGround => {
            let elevation = link.elevation_rad.ok_or(Error::InvalidElevation(f64::NAN))?;
            atmospheric_efficiency(atm, elevation)?
        }
        LinkKind::InterSatellite => 1.0,
    };
    let eta_pointing = pointing_efficiency(pointing, beam);
    Ok(ChannelBudget {
        eta_diffraction,
        eta_atmosphere,
        eta_pointing,
        eta_total: eta_diffraction * eta_atmosphere * eta_pointing,
        stray_counts_per_window: stray_counts(stray, rx),
    })
}

/// Everything needed to turn a [`LinkGeometry`] into a [`ChannelBudget`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelModel {
    pub beam: BeamParams,
    pub rx: Aperture,
    pub atmosphere: AtmosphereModel,
    pub pointing: PointingModel,
    pub stray: StrayLightModel,
}

impl ChannelModel {
    pub fn hop(&self, link: &LinkGeometry) -> Result<ChannelBudget> {
        hop_transmission(
            link,
            &self.beam,
            &self.rx,
            &self.atmosphere,
            &self.pointing,
            &self.stray,
        )
    }

    pub fn with_divergence(&self, divergence_rad: f64) -> Result<Self> {
        Ok(Self {
            beam: BeamParams::from_divergence(self.beam.wavelength_m, self.beam.m_squared, divergence_rad)?,
            ..*self
        })
    }
}
