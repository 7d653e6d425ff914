//! Static spherical-Earth placement of ground stations and satellites.
//!
//! Every optical hop of a scenario is reduced to a [`LinkGeometry`]: a path
//! length plus, for hops that touch the ground, the elevation angle seen from
//! the ground end. Satellites do not move during a calculation.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::error::{check_positive, Error, Result};

/// Mean Earth radius in kilometres.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Spherical Earth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EarthModel {
    pub radius_km: f64,
}

impl EarthModel {
    pub fn new(radius_km: f64) -> Result<Self> {
        check_positive("earth.radius_km", radius_km)?;
        Ok(Self { radius_km })
    }

    /// Central angle subtended by a ground arc.
    fn central_angle(&self, arc_km: f64) -> f64 {
        arc_km / self.radius_km
    }
}

impl Default for EarthModel {
    fn default() -> Self {
        Self {
            radius_km: EARTH_RADIUS_KM,
        }
    }
}

/// Circular orbit of height `altitude_km` above the surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrbitConfig {
    pub altitude_km: f64,
}

impl OrbitConfig {
    pub fn new(altitude_km: f64) -> Result<Self> {
        check_positive("orbit.altitude_km", altitude_km)?;
        Ok(Self { altitude_km })
    }

    fn radius_km(&self, earth: &EarthModel) -> f64 {
        earth.radius_km + self.altitude_km
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum LinkKind {
    SpaceGround,
    InterSatellite,
}

/// One optical hop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkGeometry {
    pub kind: LinkKind,
    pub path_length_km: f64,
    /// Elevation of the satellite seen from the ground end; `None` for
    /// inter-satellite hops.
    pub elevation_rad: Option<f64>,
    /// Ground-projected arc spanned by the hop.
    pub ground_arc_km: f64,
}

impl LinkGeometry {
    pub fn space_ground(path_length_km: f64, elevation_rad: f64, ground_arc_km: f64) -> Result<Self> {
        check_positive("link.path_length_km", path_length_km)?;
        if !(elevation_rad > 0.0 && elevation_rad <= FRAC_PI_2) {
            return Err(Error::InvalidElevation(elevation_rad));
        }
        Ok(Self {
            kind: LinkKind::SpaceGround,
            path_length_km,
            elevation_rad: Some(elevation_rad),
            ground_arc_km,
        })
    }

    pub fn inter_satellite(path_length_km: f64, ground_arc_km: f64) -> Result<Self> {
        if !(path_length_km >= 0.0 && path_length_km.is_finite()) {
            return Err(Error::validation(
                "link.path_length_km",
                format!("{path_length_km} must be >= 0"),
            ));
        }
        Ok(Self {
            kind: LinkKind::InterSatellite,
            path_length_km,
            elevation_rad: None,
            ground_arc_km,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Architecture {
    /// Sources and QND/memory nodes all in orbit; only the two end hops touch the ground.
    FullSpace,
    /// Sources in orbit, QND/memory nodes on the ground; every hop is space-ground.
    HybridGround,
}

impl Architecture {
    pub fn name(&self) -> &'static str {
        match self {
            Architecture::FullSpace => "full-space",
            Architecture::HybridGround => "hybrid",
        }
    }
}

/// Hop layout of a nested repeater chain.
///
/// Segment `s` owns hops `2s` (left node to source) and `2s + 1`
/// (source to right node).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstellationLayout {
    pub nesting_level: u32,
    pub total_ground_distance_km: f64,
    pub segment_length_km: f64,
    pub hops: Vec<LinkGeometry>,
    pub architecture: Architecture,
}

impl ConstellationLayout {
    pub fn segment_count(&self) -> usize {
        1usize << self.nesting_level
    }

    pub fn satellite_count(&self) -> usize {
        (1usize << (self.nesting_level + 1)) - 1
    }

    /// The two hops of each segment, in order.
    pub fn segments(&self) -> impl Iterator<Item = (&LinkGeometry, &LinkGeometry)> {
        self.hops.chunks_exact(2).map(|pair| (&pair[0], &pair[1]))
    }
}

/// Straight-line distance from a ground point to a satellite whose
/// sub-satellite point lies `arc_km` away along the surface.
pub fn slant_range(arc_km: f64, orbit: &OrbitConfig, earth: &EarthModel) -> f64 {
    let re = earth.radius_km;
    let rs = orbit.radius_km(earth);
    let delta = earth.central_angle(arc_km);
    // Cancellation-free form of re^2 + rs^2 - 2 re rs cos(delta).
    let half = (delta / 2.0).sin();
    let d2 = (rs - re).powi(2) + 4.0 * re * rs * half * half;
    d2.sqrt()
}

/// Elevation of the satellite above the local horizon of the ground point.
pub fn elevation_angle(arc_km: f64, orbit: &OrbitConfig, earth: &EarthModel) -> Result<f64> {
    let re = earth.radius_km;
    let rs = orbit.radius_km(earth);
    let delta = earth.central_angle(arc_km);
    if delta == 0.0 {
        return Ok(FRAC_PI_2);
    }
    let numerator = rs * delta.cos() - re;
    if numerator <= 0.0 {
        return Err(Error::BelowHorizon {
            arc_km,
            altitude_km: orbit.altitude_km,
        });
    }
    Ok((numerator / (rs * delta.sin())).atan())
}

/// Chord between two satellites on the same shell separated by `arc_km` of ground track.
pub fn intersat_range(arc_km: f64, orbit: &OrbitConfig, earth: &EarthModel) -> f64 {
    let delta = earth.central_angle(arc_km);
    2.0 * orbit.radius_km(earth) * (delta / 2.0).sin()
}

/// Elevation at which a satellite on `orbit` is seen when the slant range is `path_km`.
///
/// Inverse of [`slant_range`] composed with [`elevation_angle`]; used for
/// loss-versus-distance tables indexed by path length.
pub fn elevation_from_slant(path_km: f64, orbit: &OrbitConfig, earth: &EarthModel) -> Result<f64> {
    let re = earth.radius_km;
    let rs = orbit.radius_km(earth);
    if path_km < orbit.altitude_km || path_km <= 0.0 {
        return Err(Error::validation(
            "link.path_length_km",
            format!(
                "slant range {path_km} km is shorter than the orbital height {} km",
                orbit.altitude_km
            ),
        ));
    }
    let sin_el = (rs * rs - re * re - path_km * path_km) / (2.0 * re * path_km);
    if sin_el <= 0.0 {
        return Err(Error::BelowHorizon {
            arc_km: f64::NAN,
            altitude_km: orbit.altitude_km,
        });
    }
    Ok(sin_el.min(1.0).asin())
}

/// Ground arc between the ground point and the sub-satellite point for a given slant range.
pub fn ground_arc_from_slant(path_km: f64, orbit: &OrbitConfig, earth: &EarthModel) -> Result<f64> {
    let re = earth.radius_km;
    let rs = orbit.radius_km(earth);
    let elevation = elevation_from_slant(path_km, orbit, earth)?;
    // Satellite position in the ground point's local frame.
    let x = path_km * elevation.cos();
    let z = re + path_km * elevation.sin();
    let delta = x.atan2(z);
    debug_assert!((x.hypot(z) - rs).abs() < 1e-6 * rs);
    Ok(delta * re)
}

fn space_ground_hop(arc_km: f64, orbit: &OrbitConfig, earth: &EarthModel) -> Result<LinkGeometry> {
    let elevation = elevation_angle(arc_km, orbit, earth)?;
    LinkGeometry::space_ground(slant_range(arc_km, orbit, earth), elevation, arc_km)
}

/// Ground stations at both ends of a baseline of `ground_distance_km`, one
/// satellite above the midpoint. Returns the two (identical) downlinks.
pub fn los_midpoint_geometry(
    ground_distance_km: f64,
    orbit: &OrbitConfig,
    earth: &EarthModel,
) -> Result<(LinkGeometry, LinkGeometry)> {
    if !(ground_distance_km >= 0.0) {
        return Err(Error::validation(
            "link.ground_distance_km",
            format!("{ground_distance_km} must be >= 0"),
        ));
    }
    let hop = space_ground_hop(ground_distance_km / 2.0, orbit, earth)?;
    Ok((hop, hop))
}

/// Hop layout of a repeater chain with `2^n` segments over `ground_distance_km`.
///
/// Source satellites sit above segment midpoints; QND/memory nodes sit at
/// segment boundaries (in orbit for [`Architecture::FullSpace`], on the
/// ground for [`Architecture::HybridGround`]). End users are on the ground.
pub fn constellation_layout(
    ground_distance_km: f64,
    nesting_level: u32,
    orbit: &OrbitConfig,
    earth: &EarthModel,
    architecture: Architecture,
) -> Result<ConstellationLayout> {
    check_positive("link.ground_distance_km", ground_distance_km)?;
    if nesting_level > 20 {
        return Err(Error::validation(
            "repeater.nesting_level",
            format!("{nesting_level} exceeds the supported maximum of 20"),
        ));
    }
    let segments = 1usize << nesting_level;
    let segment_length_km = ground_distance_km / segments as f64;
    let arc = segment_length_km / 2.0;

    let ground_hop = space_ground_hop(arc, orbit, earth)?;
    let space_hop = LinkGeometry::inter_satellite(intersat_range(arc, orbit, earth), arc)?;

    let last = 2 * segments - 1;
    let hops = (0..2 * segments)
        .map(|i| match architecture {
            Architecture::HybridGround => ground_hop,
            Architecture::FullSpace if i == 0 || i == last => ground_hop,
            Architecture::FullSpace => space_hop,
        })
        .collect();

    Ok(ConstellationLayout {
        nesting_level,
        total_ground_distance_km: ground_distance_km,
        segment_length_km,
        hops,
        architecture,
    })
}
