//! Coordinate transforms from geodetic positions to a vehicle-local planar frame.
//!
//! Positions arrive as WGS84 geodetic coordinates, are converted to
//! Earth-Centered Earth-Fixed (ECEF), offset to a local origin and rotated into
//! East-North-Up (ENU), and finally rotated toward the observer's heading so
//! that x points forward and y points left. The up component is dropped at the
//! last step; all downstream zone math is planar.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// WGS84 semi-major axis, meters.
pub const WGS84_A: f64 = 6_378_137.0;
/// WGS84 flattening.
pub const WGS84_F: f64 = 1.0 / 298.257_223_563;
/// WGS84 semi-minor axis, meters.
pub const WGS84_B: f64 = WGS84_A * (1.0 - WGS84_F);
/// First eccentricity squared, `e² = f(2 − f)`.
pub const WGS84_E2: f64 = WGS84_F * (2.0 - WGS84_F);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeoError {
    #[error("latitude {0} deg outside [-90, 90]")]
    LatitudeOutOfRange(f64),
    #[error("coordinate is not finite")]
    NotFinite,
}

/// A WGS84 geodetic position.
///
/// Longitude is stored normalized to `[-180, 180)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodeticPosition {
    pub lat_deg: f64,
    pub lon_deg: f64,
    /// Meters above the WGS84 ellipsoid.
    pub elev_m: f64,
}

impl GeodeticPosition {
    pub fn new(lat_deg: f64, lon_deg: f64, elev_m: f64) -> Result<Self, GeoError> {
        if !lat_deg.is_finite() || !lon_deg.is_finite() || !elev_m.is_finite() {
            return Err(GeoError::NotFinite);
        }
        if !(-90.0..=90.0).contains(&lat_deg) {
            return Err(GeoError::LatitudeOutOfRange(lat_deg));
        }
        Ok(Self {
            lat_deg,
            lon_deg: normalize_longitude(lon_deg),
            elev_m,
        })
    }

    fn validate(&self) -> Result<(), GeoError> {
        Self::new(self.lat_deg, self.lon_deg, self.elev_m).map(|_| ())
    }
}

/// Earth-Centered Earth-Fixed Cartesian position, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EcefPosition {
    pub x_m: f64,
    pub y_m: f64,
    pub z_m: f64,
}

/// East-North-Up position relative to a stated geodetic origin, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnuPosition {
    pub east_m: f64,
    pub north_m: f64,
    pub up_m: f64,
}

/// A point in the observer's planar frame: x forward along heading, y left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalFramePoint {
    pub x_m: f64,
    pub y_m: f64,
}

impl LocalFramePoint {
    pub fn new(x_m: f64, y_m: f64) -> Self {
        Self { x_m, y_m }
    }

    pub fn norm(&self) -> f64 {
        self.x_m.hypot(self.y_m)
    }

    pub fn distance(&self, other: &LocalFramePoint) -> f64 {
        (self.x_m - other.x_m).hypot(self.y_m - other.y_m)
    }
}

/// Wraps a longitude into `[-180, 180)`.
pub fn normalize_longitude(lon_deg: f64) -> f64 {
    let wrapped = lon_deg - 360.0 * ((lon_deg + 180.0) / 360.0).floor();
    // floor() puts us in [-180, 180]; fold the upper endpoint back.
    if wrapped >= 180.0 {
        wrapped - 360.0
    } else {
        wrapped
    }
}

/// Converts a geodetic position to ECEF with the closed-form prime-vertical
/// radius of curvature.
pub fn geodetic_to_ecef(p: &GeodeticPosition) -> Result<EcefPosition, GeoError> {
    p.validate()?;
    let lat = p.lat_deg.to_radians();
    let lon = normalize_longitude(p.lon_deg).to_radians();
    let (sin_lat, cos_lat) = lat.sin_cos();
    let (sin_lon, cos_lon) = lon.sin_cos();
    // Prime-vertical radius of curvature.
    let n = WGS84_A / (1.0 - WGS84_E2 * sin_lat * sin_lat).sqrt();
    Ok(EcefPosition {
        x_m: (n + p.elev_m) * cos_lat * cos_lon,
        y_m: (n + p.elev_m) * cos_lat * sin_lon,
        z_m: (n * (1.0 - WGS84_E2) + p.elev_m) * sin_lat,
    })
}

/// Converts ECEF back to geodetic using Bowring's method with three fixed
/// iterations; sub-millimeter for |elevation| up to tens of kilometers.
pub fn ecef_to_geodetic(p: &EcefPosition) -> Result<GeodeticPosition, GeoError> {
    if !p.x_m.is_finite() || !p.y_m.is_finite() || !p.z_m.is_finite() {
        return Err(GeoError::NotFinite);
    }
    let lon = p.y_m.atan2(p.x_m);
    let rho = p.x_m.hypot(p.y_m);
    let ep2 = (WGS84_A * WGS84_A - WGS84_B * WGS84_B) / (WGS84_B * WGS84_B);

    // Reduced-latitude seed, then the Bowring update.
    let mut beta = (p.z_m * WGS84_A).atan2(rho * WGS84_B);
    let mut lat = 0.0;
    for _ in 0..3 {
        let (sin_b, cos_b) = beta.sin_cos();
        lat = (p.z_m + ep2 * WGS84_B * sin_b.powi(3)).atan2(rho - WGS84_E2 * WGS84_A * cos_b.powi(3));
        beta = ((1.0 - WGS84_F) * lat.sin()).atan2(lat.cos());
    }
    let (sin_lat, cos_lat) = lat.sin_cos();
    // Well-conditioned height formula, valid at the poles.
    let elev = rho * cos_lat + p.z_m * sin_lat - WGS84_A * (1.0 - WGS84_E2 * sin_lat * sin_lat).sqrt();
    Ok(GeodeticPosition {
        lat_deg: lat.to_degrees(),
        lon_deg: normalize_longitude(lon.to_degrees()),
        elev_m: elev,
    })
}

fn enu_rotation(origin: &GeodeticPosition) -> ([f64; 3], [f64; 3], [f64; 3]) {
    let lat = origin.lat_deg.to_radians();
    let lon = normalize_longitude(origin.lon_deg).to_radians();
    let (sin_lat, cos_lat) = lat.sin_cos();
    let (sin_lon, cos_lon) = lon.sin_cos();
    (
        [-sin_lon, cos_lon, 0.0],
        [-sin_lat * cos_lon, -sin_lat * sin_lon, cos_lat],
        [cos_lat * cos_lon, cos_lat * sin_lon, sin_lat],
    )
}

/// Rotates the ECEF offset from `origin` into the local tangent plane at `origin`.
pub fn ecef_to_enu(p: &EcefPosition, origin: &GeodeticPosition) -> Result<EnuPosition, GeoError> {
    let o = geodetic_to_ecef(origin)?;
    let d = [p.x_m - o.x_m, p.y_m - o.y_m, p.z_m - o.z_m];
    let (e, n, u) = enu_rotation(origin);
    Ok(EnuPosition {
        east_m: e[0] * d[0] + e[1] * d[1] + e[2] * d[2],
        north_m: n[0] * d[0] + n[1] * d[1] + n[2] * d[2],
        up_m: u[0] * d[0] + u[1] * d[1] + u[2] * d[2],
    })
}

/// Inverse of [`ecef_to_enu`].
pub fn enu_to_ecef(p: &EnuPosition, origin: &GeodeticPosition) -> Result<EcefPosition, GeoError> {
    let o = geodetic_to_ecef(origin)?;
    let (e, n, u) = enu_rotation(origin);
    Ok(EcefPosition {
        x_m: o.x_m + e[0] * p.east_m + n[0] * p.north_m + u[0] * p.up_m,
        y_m: o.y_m + e[1] * p.east_m + n[1] * p.north_m + u[1] * p.up_m,
        z_m: o.z_m + e[2] * p.east_m + n[2] * p.north_m + u[2] * p.up_m,
    })
}

/// Projects an ENU position into the planar frame of an observer with the given
/// compass heading (0° = north, clockwise positive): x forward, y left.
///
/// The up component is discarded; the map is planar.
pub fn enu_to_local_frame(p: &EnuPosition, heading_deg: f64) -> LocalFramePoint {
    let h = heading_deg.to_radians();
    let (sin_h, cos_h) = h.sin_cos();
    // forward = (sin h, cos h), left = (-cos h, sin h) in (east, north).
    LocalFramePoint {
        x_m: p.east_m * sin_h + p.north_m * cos_h,
        y_m: -p.east_m * cos_h + p.north_m * sin_h,
    }
}

/// The full pipeline: geodetic → ECEF → ENU at `origin` → rotation to the
/// observer heading. Equals the composition of the individual steps exactly.
pub fn geodetic_to_local(
    p: &GeodeticPosition,
    origin: &GeodeticPosition,
    heading_deg: f64,
) -> Result<LocalFramePoint, GeoError> {
    let ecef = geodetic_to_ecef(p)?;
    let enu = ecef_to_enu(&ecef, origin)?;
    Ok(enu_to_local_frame(&enu, heading_deg))
}

/// Maps a planar ENU offset from `origin` back to a geodetic position
/// (up = 0). Used by scenario construction, which lays actors out in a flat
/// world frame anchored at the scenario origin.
pub fn enu_offset_to_geodetic(
    east_m: f64,
    north_m: f64,
    origin: &GeodeticPosition,
) -> Result<GeodeticPosition, GeoError> {
    let enu = EnuPosition { east_m, north_m, up_m: 0.0 };
    ecef_to_geodetic(&enu_to_ecef(&enu, origin)?)
}
