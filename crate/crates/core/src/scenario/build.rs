//! Scenario configuration and the canonical crash/congestion geometries.

use super::ScenarioError;
use crate::channel::{PathLossConfig, RadioConfig};
use crate::geo::GeodeticPosition;
use crate::policy::{EnergyModel, PolicyConfig};
use crate::safety::{DiscriminationConfig, SafetyParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    /// Pedestrian crossing in front of a straight-going vehicle.
    Crossing,
    /// Pedestrian in the path of a right-turning vehicle.
    RightTurn,
    /// Pedestrian in the path of a left-turning vehicle.
    LeftTurn,
    /// Pedestrian walking beside the road, vehicle going straight.
    AlongRoad,
    /// Many pedestrians along a straight road, a platoon driving through.
    Congestion,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActorKind {
    Vehicle,
    Pedestrian,
    Cyclist,
}

/// Ground-truth motion profile of one actor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MotionSpec {
    Stationary,
    Straight,
    /// Straight for `turn_after_m`, then a constant-yaw-rate arc sweeping
    /// `arc_angle_rad`, then straight again.
    TurnArc {
        turn_after_m: f64,
        yaw_rate_rps: f64,
        arc_angle_rad: f64,
    },
    /// 1-D walk along the east axis, reflecting at the segment ends.
    SidewalkBounce { min_east_m: f64, max_east_m: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActorConfig {
    pub kind: ActorKind,
    pub start_east_m: f64,
    pub start_north_m: f64,
    /// Compass heading, degrees.
    pub heading_deg: f64,
    pub speed_mps: f64,
    pub motion: MotionSpec,
    #[serde(default)]
    pub is_high_risk_user: bool,
}

fn default_tick() -> f64 {
    0.1
}

fn default_origin() -> GeodeticPosition {
    GeodeticPosition { lat_deg: 39.65, lon_deg: -79.97, elev_m: 300.0 }
}

fn default_bsm_air() -> usize {
    300
}

fn default_psm_air() -> usize {
    100
}

fn default_fixed_rate() -> u32 {
    10
}

/// Complete description of one deterministic run. Serializes to JSON for the
/// CLI's `--config` option.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub seed: u64,
    pub duration_s: f64,
    /// Application tick; everything above the channel runs at this period.
    #[serde(default = "default_tick")]
    pub tick_s: f64,
    /// Geodetic anchor of the planar world frame (east, north in meters).
    #[serde(default = "default_origin")]
    pub origin: GeodeticPosition,
    #[serde(default)]
    pub actors: Vec<ActorConfig>,
    /// World coordinates of the designed conflict point, when the geometry
    /// has one; used for summary distances.
    #[serde(default)]
    pub conflict_point: Option<(f64, f64)>,
    #[serde(default)]
    pub safety: SafetyParams,
    #[serde(default)]
    pub discrimination: DiscriminationConfig,
    #[serde(default)]
    pub policy: PolicyConfig,
    #[serde(default)]
    pub energy: EnergyModel,
    #[serde(default = "RadioConfig::vehicle")]
    pub vehicle_radio: RadioConfig,
    #[serde(default = "RadioConfig::phone")]
    pub phone_radio: RadioConfig,
    #[serde(default)]
    pub path_loss: PathLossConfig,
    #[serde(default)]
    pub congestion_control_on: bool,
    #[serde(default)]
    pub power_control_on: bool,
    /// When set, vehicles brake at `d_mod` from their first advisory onward.
    #[serde(default)]
    pub braking_response: bool,
    /// On-air frame sizes including lower-stack overhead.
    #[serde(default = "default_bsm_air")]
    pub bsm_air_bytes: usize,
    #[serde(default = "default_psm_air")]
    pub psm_air_bytes: usize,
    /// Beaconing rate when congestion control is off.
    #[serde(default = "default_fixed_rate")]
    pub fixed_rate_hz: u32,
    /// Optional 1-sigma GPS noise applied to transmitted positions.
    #[serde(default)]
    pub position_noise_sigma_m: Option<f64>,
    /// Whether PSMs carry the explicit user type.
    #[serde(default)]
    pub psm_user_type_available: bool,
    /// Actor indices whose pairing drives the ego trace files.
    #[serde(default)]
    pub ego_vehicle: usize,
    #[serde(default)]
    pub ego_vru: Option<usize>,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !self.duration_s.is_finite() || self.duration_s <= 0.0 {
            return Err(ScenarioError::Config("duration must be positive".into()));
        }
        if !self.tick_s.is_finite() || self.tick_s <= 0.0 || self.tick_s > 1.0 {
            return Err(ScenarioError::Config("tick must be in (0, 1] s".into()));
        }
        if !self.actors.iter().any(|a| a.kind == ActorKind::Vehicle) {
            return Err(ScenarioError::Config("at least one vehicle required".into()));
        }
        if self.ego_vehicle >= self.actors.len()
            || self.actors[self.ego_vehicle].kind != ActorKind::Vehicle
        {
            return Err(ScenarioError::Config("ego_vehicle must index a vehicle actor".into()));
        }
        if let Some(v) = self.ego_vru {
            if v >= self.actors.len() || self.actors[v].kind == ActorKind::Vehicle {
                return Err(ScenarioError::Config("ego_vru must index a VRU actor".into()));
            }
        }
        self.safety
            .validate()
            .map_err(ScenarioError::Config)?;
        Ok(())
    }
}

/// Knobs the CLI exposes on top of the canonical geometries.
#[derive(Debug, Clone, Copy, Default)]
pub struct ScenarioOverrides {
    pub speed_kmh: Option<f64>,
    pub seed: Option<u64>,
    pub duration_s: Option<f64>,
    pub pedestrians: Option<usize>,
    pub congestion_control: Option<bool>,
    pub power_control: Option<bool>,
    pub braking_response: Option<bool>,
}

const WALK_SPEED_MPS: f64 = 1.4;

/// Builds the canonical geometry for a scenario kind.
///
/// Crash geometries are conflict-timed: absent warnings and braking, vehicle
/// and pedestrian reach the conflict point simultaneously.
pub fn build_scenario(kind: ScenarioKind, ov: &ScenarioOverrides) -> Result<ScenarioConfig, ScenarioError> {
    let seed = ov.seed.unwrap_or(42);
    let mut cfg = ScenarioConfig {
        kind,
        seed,
        duration_s: 0.0,
        tick_s: default_tick(),
        origin: default_origin(),
        actors: Vec::new(),
        conflict_point: None,
        safety: SafetyParams::default(),
        discrimination: DiscriminationConfig::default(),
        policy: PolicyConfig::default(),
        energy: EnergyModel::default(),
        vehicle_radio: RadioConfig::vehicle(),
        phone_radio: RadioConfig::phone(),
        path_loss: PathLossConfig::default(),
        congestion_control_on: ov.congestion_control.unwrap_or(false),
        power_control_on: ov.power_control.unwrap_or(false),
        braking_response: ov.braking_response.unwrap_or(false),
        bsm_air_bytes: default_bsm_air(),
        psm_air_bytes: default_psm_air(),
        fixed_rate_hz: default_fixed_rate(),
        position_noise_sigma_m: None,
        psm_user_type_available: false,
        ego_vehicle: 0,
        ego_vru: None,
    };

    match kind {
        ScenarioKind::Crossing => {
            let speed = ov.speed_kmh.unwrap_or(70.0) / 3.6;
            let approach = 300.0;
            let t_conflict = approach / speed;
            cfg.duration_s = ov.duration_s.unwrap_or(t_conflict + 3.0);
            cfg.conflict_point = Some((0.0, 0.0));
            // Vehicle eastbound toward the origin; pedestrian walking north,
            // timed to reach the origin at the same instant.
            cfg.actors.push(ActorConfig {
                kind: ActorKind::Vehicle,
                start_east_m: -approach,
                start_north_m: 0.0,
                heading_deg: 90.0,
                speed_mps: speed,
                motion: MotionSpec::Straight,
                is_high_risk_user: false,
            });
            cfg.actors.push(ActorConfig {
                kind: ActorKind::Pedestrian,
                start_east_m: 0.0,
                start_north_m: -WALK_SPEED_MPS * t_conflict,
                heading_deg: 0.0,
                speed_mps: WALK_SPEED_MPS,
                motion: MotionSpec::Straight,
                is_high_risk_user: false,
            });
            cfg.ego_vru = Some(1);
        }
        ScenarioKind::RightTurn | ScenarioKind::LeftTurn => {
            let right = kind == ScenarioKind::RightTurn;
            // Slow urban turning speeds; tighter radius to the right.
            let speed = ov.speed_kmh.unwrap_or(if right { 10.8 } else { 15.0 }) / 3.6;
            let radius = if right { 12.0 } else { 18.0 };
            let approach = 40.0;
            // Conflict three quarters of the way around the quarter-turn arc.
            let sweep_conflict = 0.75 * std::f64::consts::FRAC_PI_2;
            let yaw = if right { -speed / radius } else { speed / radius };
            let t_conflict = (approach + radius * sweep_conflict) / speed;

            // Arc center and conflict point in world coordinates: vehicle
            // starts at the origin heading east, turn begins at x = approach.
            let side = if right { -1.0 } else { 1.0 };
            let cx = approach + radius * sweep_conflict.sin();
            let cy = side * radius * (1.0 - sweep_conflict.cos());
            cfg.conflict_point = Some((cx, cy));
            cfg.duration_s = ov.duration_s.unwrap_or(t_conflict + 3.0);

            cfg.actors.push(ActorConfig {
                kind: ActorKind::Vehicle,
                start_east_m: 0.0,
                start_north_m: 0.0,
                heading_deg: 90.0,
                speed_mps: speed,
                motion: MotionSpec::TurnArc {
                    turn_after_m: approach,
                    yaw_rate_rps: yaw,
                    arc_angle_rad: std::f64::consts::FRAC_PI_2,
                },
                is_high_risk_user: false,
            });
            // Pedestrian crossing the destination leg: walks toward the turn
            // center (perpendicular to the path tangent at the conflict).
            let (dirx, diry) = {
                let center = (approach, side * radius);
                let dx = center.0 - cx;
                let dy = center.1 - cy;
                let n = dx.hypot(dy);
                (dx / n, dy / n)
            };
            let ped_heading = dirx.atan2(diry).to_degrees().rem_euclid(360.0);
            cfg.actors.push(ActorConfig {
                kind: ActorKind::Pedestrian,
                start_east_m: cx - dirx * WALK_SPEED_MPS * t_conflict,
                start_north_m: cy - diry * WALK_SPEED_MPS * t_conflict,
                heading_deg: ped_heading,
                speed_mps: WALK_SPEED_MPS,
                motion: MotionSpec::Straight,
                is_high_risk_user: false,
            });
            cfg.ego_vru = Some(1);
        }
        ScenarioKind::AlongRoad => {
            let speed = ov.speed_kmh.unwrap_or(50.0) / 3.6;
            cfg.duration_s = ov.duration_s.unwrap_or(15.0);
            cfg.actors.push(ActorConfig {
                kind: ActorKind::Vehicle,
                start_east_m: -300.0,
                start_north_m: 0.0,
                heading_deg: 90.0,
                speed_mps: speed,
                motion: MotionSpec::Straight,
                is_high_risk_user: false,
            });
            // Walking with traffic, one meter outside the lane edge.
            let lateral = cfg.safety.lane_width_m / 2.0 + 1.0;
            cfg.actors.push(ActorConfig {
                kind: ActorKind::Pedestrian,
                start_east_m: -220.0,
                start_north_m: lateral,
                heading_deg: 90.0,
                speed_mps: WALK_SPEED_MPS,
                motion: MotionSpec::Straight,
                is_high_risk_user: false,
            });
            cfg.ego_vru = Some(1);
        }
        ScenarioKind::Congestion => {
            let peds = ov.pedestrians.unwrap_or(400);
            cfg.duration_s = ov.duration_s.unwrap_or(50.0);
            let road_len = 1200.0;
            let sidewalk = cfg.safety.lane_width_m / 2.0 + 2.0;
            // Vehicle platoon entering from the west end.
            for i in 0..4 {
                cfg.actors.push(ActorConfig {
                    kind: ActorKind::Vehicle,
                    start_east_m: -30.0 * i as f64,
                    start_north_m: 0.0,
                    heading_deg: 90.0,
                    speed_mps: 24.0,
                    motion: MotionSpec::Straight,
                    is_high_risk_user: false,
                });
            }
            // Pedestrians scattered over both sidewalks, walking along them.
            let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x5ca1_ab1e);
            for _ in 0..peds {
                let east = rng.gen_range(0.0..road_len);
                let north = if rng.gen::<bool>() { sidewalk } else { -sidewalk };
                let heading = if rng.gen::<bool>() { 90.0 } else { 270.0 };
                cfg.actors.push(ActorConfig {
                    kind: ActorKind::Pedestrian,
                    start_east_m: east,
                    start_north_m: north,
                    heading_deg: heading,
                    speed_mps: WALK_SPEED_MPS,
                    motion: MotionSpec::SidewalkBounce { min_east_m: 0.0, max_east_m: road_len },
                    is_high_risk_user: false,
                });
            }
            cfg.ego_vru = (peds > 0).then_some(4);
        }
        ScenarioKind::Custom => {
            return Err(ScenarioError::Config(
                "custom scenarios are loaded from a config file, not built".into(),
            ));
        }
    }

    if let Some(d) = ov.duration_s {
        cfg.duration_s = d;
    }
    cfg.validate()?;
    Ok(cfg)
}
