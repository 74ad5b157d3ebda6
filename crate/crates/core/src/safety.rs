//! The VRU safety subsystem: stopping-distance zones, path projection,
//! target classification, graded collision warnings, and VRU discrimination.
//!
//! Zone lengths are stopping distances under three braking assumptions. With
//! the driver's reaction delay `t_drd` and the speed after that delay
//! `v_brk = max(0, v + a·t_drd)`:
//!
//! * `dts_min` — distance to stop under maximum braking, entered at `v_brk`.
//!   Inside it a crash is unavoidable.
//! * `dts_guard` — the same, but braking starts `t_guard` later. Crossing it
//!   triggers the *imminent* warning.
//! * `dts_mod` — braking starts `t_guard + t_mod` later, at a comfortable
//!   deceleration `d_mod`. Crossing it triggers the *advisory* warning.
//!
//! Each zone is a corridor of the lane width along the vehicle's path, which
//! is the current heading for straight driving or the constant-turn-rate
//! circle `R = v/ψ` while turning. Targets are projected onto that path to a
//! lateral offset `d_lat` (left positive) and an along-path distance `d_lon`.

use crate::awareness::{predict_point, KinematicState, MapRecord, RealTimeMap, VruClass};
use crate::geo::LocalFramePoint;
use crate::messages::PersonalUserType;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SafetyError {
    #[error("braking-entry speed must be nonnegative, got {0}")]
    NegativeSpeed(f64),
    #[error("target coincides with the turn center; projection is undefined")]
    DegenerateProjection,
}

/// Tunable parameters of the warning algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SafetyParams {
    /// Driver reaction delay, seconds.
    pub t_drd_s: f64,
    /// Lead time of the imminent warning beyond the minimum stop, seconds.
    pub t_guard_s: f64,
    /// Additional lead time of the advisory warning, seconds.
    pub t_mod_s: f64,
    /// Comfortable braking deceleration, m/s² (negative).
    pub d_mod_mps2: f64,
    /// Maximum-braking model intercept, m/s² (negative).
    pub dmax_c0_mps2: f64,
    /// Maximum-braking model slope per m/s of entry speed (negative).
    pub dmax_c1_per_s: f64,
    /// Zone corridor width, meters.
    pub lane_width_m: f64,
    /// Below this |yaw rate| the path is treated as straight, rad/s.
    pub yaw_rate_min_rps: f64,
    /// Cap on the conflict-point prediction lookahead, seconds.
    pub lookahead_cap_s: f64,
}

impl Default for SafetyParams {
    fn default() -> Self {
        SafetyParams {
            t_drd_s: 2.5,
            t_guard_s: 1.0,
            t_mod_s: 2.0,
            d_mod_mps2: -3.4,
            dmax_c0_mps2: -5.308,
            dmax_c1_per_s: -0.086,
            lane_width_m: 3.5,
            yaw_rate_min_rps: 0.01,
            lookahead_cap_s: 12.0,
        }
    }
}

impl SafetyParams {
    pub fn validate(&self) -> Result<(), String> {
        if self.t_drd_s < 0.0 || self.t_guard_s < 0.0 || self.t_mod_s < 0.0 {
            return Err("reaction/guard/mod times must be nonnegative".into());
        }
        if self.d_mod_mps2 >= 0.0 {
            return Err("d_mod must be negative".into());
        }
        if self.d_mod_mps2.abs() > self.dmax_c0_mps2.abs() {
            return Err("|d_mod| must not exceed |dmax_c0|".into());
        }
        if self.lane_width_m <= 0.0 {
            return Err("lane width must be positive".into());
        }
        Ok(())
    }
}

/// The zone lengths for one vehicle state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZoneSet {
    pub dts_min_m: f64,
    pub dts_guard_m: f64,
    pub dts_mod_m: f64,
    /// Corridor half-width (lane width / 2).
    pub half_width_m: f64,
    pub tts_min_s: f64,
}

/// A target projected onto the vehicle path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativePosition {
    /// Lateral offset from the path, meters, left positive.
    pub d_lat_m: f64,
    /// Arc length along the path, meters, forward positive.
    pub d_lon_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZoneLabel {
    Safe,
    Risk,
    Danger,
    UnavoidableCrash,
}

impl ZoneLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            ZoneLabel::Safe => "safe",
            ZoneLabel::Risk => "risk",
            ZoneLabel::Danger => "danger",
            ZoneLabel::UnavoidableCrash => "unavoidable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum WarningLevel {
    None,
    Advisory,
    Imminent,
}

impl WarningLevel {
    pub fn as_str(&self) -> &'static str {
        match self {
            WarningLevel::None => "none",
            WarningLevel::Advisory => "advisory",
            WarningLevel::Imminent => "imminent",
        }
    }
}

/// Per-target warning state with the de-escalation latch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WarningState {
    level_raw: u8,
    safe_streak: u8,
}

/// Consecutive safe evaluations required before a warning clears.
pub const SAFE_LATCH_TICKS: u8 = 5;

impl WarningState {
    pub fn new() -> Self {
        WarningState::default()
    }

    pub fn level(&self) -> WarningLevel {
        match self.level_raw {
            0 => WarningLevel::None,
            1 => WarningLevel::Advisory,
            _ => WarningLevel::Imminent,
        }
    }

    fn with_level(level: WarningLevel) -> Self {
        WarningState {
            level_raw: match level {
                WarningLevel::None => 0,
                WarningLevel::Advisory => 1,
                WarningLevel::Imminent => 2,
            },
            safe_streak: 0,
        }
    }
}

/// Maximum braking deceleration available when braking starts at `v_brk`.
pub fn max_decel(v_brk_mps: f64, p: &SafetyParams) -> Result<f64, SafetyError> {
    if v_brk_mps < 0.0 {
        return Err(SafetyError::NegativeSpeed(v_brk_mps));
    }
    Ok(p.dmax_c0_mps2 + p.dmax_c1_per_s * v_brk_mps)
}

/// Speed at the end of the driver reaction delay, clamped at zero: a braking
/// vehicle stops, it does not reverse.
pub fn braking_entry_speed(kin: &KinematicState, p: &SafetyParams) -> f64 {
    (kin.speed_mps + kin.accel_mps2 * p.t_drd_s).max(0.0)
}

fn speed_after(v: f64, a: f64, t: f64) -> f64 {
    (v + a * t).max(0.0)
}

/// Distance covered from speed `v` at constant acceleration `a` over `t`
/// seconds, truncated at the stopping point when `a` is negative.
fn free_run_distance(v: f64, a: f64, t: f64) -> f64 {
    if a < 0.0 {
        let t_stop = -v / a;
        if t_stop < t {
            return v * t_stop + 0.5 * a * t_stop * t_stop;
        }
    }
    v * t + 0.5 * a * t * t
}

/// Generalized stopping distance: free-running at the current acceleration for
/// `t_free`, then constant braking at `decel` (negative) until standstill.
fn stopping_distance(kin: &KinematicState, t_free: f64, decel: f64) -> f64 {
    let v_f = speed_after(kin.speed_mps, kin.accel_mps2, t_free);
    free_run_distance(kin.speed_mps, kin.accel_mps2, t_free) + v_f * v_f / (2.0 * decel.abs())
}

/// Minimum time to stop: full braking after the reaction delay.
pub fn compute_tts_min(kin: &KinematicState, p: &SafetyParams) -> f64 {
    let v_brk = braking_entry_speed(kin, p);
    let d_max = max_decel(v_brk, p).expect("v_brk clamped nonnegative");
    -v_brk / d_max + p.t_drd_s
}

/// Minimum distance to stop: reaction-delay travel plus the full-braking arc.
pub fn compute_dts_min(kin: &KinematicState, p: &SafetyParams) -> f64 {
    let v_brk = braking_entry_speed(kin, p);
    let d_max = max_decel(v_brk, p).expect("v_brk clamped nonnegative");
    stopping_distance(kin, p.t_drd_s, d_max)
}

/// Computes all zone lengths for the current vehicle state.
///
/// The guard and moderate zones extend the same stopping-distance form with
/// longer free-running lead times. Nesting `dts_min ≤ dts_guard ≤ dts_mod` is
/// enforced by construction; the raw forms can invert when the vehicle is
/// already decelerating harder than the assumed braking.
pub fn compute_zone_set(kin: &KinematicState, p: &SafetyParams) -> ZoneSet {
    let dts_min = compute_dts_min(kin, p);

    let t_iw = p.t_drd_s + p.t_guard_s;
    let v_guard = speed_after(kin.speed_mps, kin.accel_mps2, t_iw);
    let d_guard = max_decel(v_guard, p).expect("speed clamped nonnegative");
    let dts_guard = stopping_distance(kin, t_iw, d_guard).max(dts_min);

    let t_aw = t_iw + p.t_mod_s;
    let dts_mod = stopping_distance(kin, t_aw, p.d_mod_mps2).max(dts_guard);

    ZoneSet {
        dts_min_m: dts_min,
        dts_guard_m: dts_guard,
        dts_mod_m: dts_mod,
        half_width_m: p.lane_width_m / 2.0,
        tts_min_s: compute_tts_min(kin, p),
    }
}

/// Projection onto a straight path along +x: the coordinates are the answer.
pub fn project_straight(target: LocalFramePoint) -> RelativePosition {
    RelativePosition { d_lat_m: target.y_m, d_lon_m: target.x_m }
}

/// Projection onto the constant-turn-rate circle `R = v/|ψ|`. The yaw rate
/// must be nonzero; callers below the straight/curved threshold use
/// [`project_straight`] via [`project_on_path`].
///
/// The turn center sits at `(0, +R)` for a left turn (`ψ > 0`) and `(0, −R)`
/// for a right turn. `d_lat` is signed so that the left side of the path stays
/// positive, matching the straight-path convention in the `ψ → 0` limit;
/// `d_lon` is the arc length to the target's radial projection, measured in
/// the direction of travel, with sweep in `(−π, π]`.
pub fn project_curved(
    target: LocalFramePoint,
    kin: &KinematicState,
) -> Result<RelativePosition, SafetyError> {
    let psi = kin.yaw_rate_rps;
    let side = psi.signum();
    let radius = (kin.speed_mps / psi).abs();
    let center_y = side * radius;
    let dx = target.x_m;
    let dy = target.y_m - center_y;
    let dist = dx.hypot(dy);
    if dist == 0.0 {
        return Err(SafetyError::DegenerateProjection);
    }
    // Angle of the target around the center, measured from the vehicle's
    // angular position in the direction of travel.
    let theta = dy.atan2(dx);
    let vehicle_angle = -side * std::f64::consts::FRAC_PI_2;
    let sweep = wrap_angle(side * (theta - vehicle_angle));
    Ok(RelativePosition {
        d_lat_m: side * (radius - dist),
        d_lon_m: radius * sweep,
    })
}

fn wrap_angle(a: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut w = a % two_pi;
    if w > std::f64::consts::PI {
        w -= two_pi;
    } else if w <= -std::f64::consts::PI {
        w += two_pi;
    }
    w
}

/// Dispatches to the straight or curved projection on the yaw-rate threshold.
pub fn project_on_path(
    target: LocalFramePoint,
    kin: &KinematicState,
    p: &SafetyParams,
) -> Result<RelativePosition, SafetyError> {
    if kin.yaw_rate_rps.abs() < p.yaw_rate_min_rps {
        Ok(project_straight(target))
    } else {
        project_curved(target, kin)
    }
}

/// Assigns the zone for a projected target position.
pub fn classify_target(rel: &RelativePosition, zones: &ZoneSet) -> ZoneLabel {
    if rel.d_lat_m.abs() > zones.half_width_m || rel.d_lon_m < 0.0 || rel.d_lon_m > zones.dts_mod_m {
        ZoneLabel::Safe
    } else if rel.d_lon_m <= zones.dts_min_m {
        ZoneLabel::UnavoidableCrash
    } else if rel.d_lon_m <= zones.dts_guard_m {
        ZoneLabel::Danger
    } else {
        ZoneLabel::Risk
    }
}

/// Advances the per-target warning latch for one evaluation.
///
/// Warnings escalate when the target is inside the lane corridor and the
/// along-path distance crosses the advisory (`dts_mod`) or imminent
/// (`dts_guard`) threshold. They never de-escalate while the target stays in
/// any zone; only [`SAFE_LATCH_TICKS`] consecutive safe evaluations clear them.
pub fn detect_collision(prev: WarningState, rel: &RelativePosition, zones: &ZoneSet) -> WarningState {
    if classify_target(rel, zones) == ZoneLabel::Safe {
        let streak = prev.safe_streak.saturating_add(1);
        if streak >= SAFE_LATCH_TICKS {
            return WarningState::with_level(WarningLevel::None);
        }
        return WarningState { level_raw: prev.level_raw, safe_streak: streak };
    }
    let mut level = prev.level();
    if rel.d_lon_m < zones.dts_mod_m && level < WarningLevel::Advisory {
        level = WarningLevel::Advisory;
    }
    if rel.d_lon_m < zones.dts_guard_m && level < WarningLevel::Imminent {
        level = WarningLevel::Imminent;
    }
    WarningState::with_level(level)
}

/// Lookahead used to project a target to the potential conflict point: the
/// time the observer needs to cover the target's current along-path distance,
/// capped for nearly stopped observers.
pub fn conflict_lookahead_s(current: &RelativePosition, observer: &KinematicState, p: &SafetyParams) -> f64 {
    if current.d_lon_m <= 0.0 {
        return 0.0;
    }
    (current.d_lon_m / observer.speed_mps.max(0.1)).min(p.lookahead_cap_s)
}

/// Full assessment of one target against one observer: predicts the target to
/// the conflict point, projects it onto the observer's path, and classifies.
///
/// `target_pos` and `frame_heading_deg` describe the target in the observer's
/// frame (the frame's x-axis has that compass heading).
pub fn assess_target(
    target_pos: LocalFramePoint,
    target_kin: &KinematicState,
    frame_heading_deg: f64,
    observer: &KinematicState,
    p: &SafetyParams,
) -> Result<TargetAssessment, SafetyError> {
    let zones = compute_zone_set(observer, p);
    let current = project_on_path(target_pos, observer, p)?;
    let tau = conflict_lookahead_s(&current, observer, p);
    let predicted_pos = predict_point(target_pos, target_kin, frame_heading_deg, tau);
    let predicted = project_on_path(predicted_pos, observer, p)?;
    let label = classify_target(&predicted, &zones);
    Ok(TargetAssessment { zones, current, predicted, label })
}

/// What the collision detector sees for one target on one tick.
#[derive(Debug, Clone, Copy)]
pub struct TargetAssessment {
    pub zones: ZoneSet,
    /// Projection of the target where it is now.
    pub current: RelativePosition,
    /// Projection of the target at the conflict lookahead.
    pub predicted: RelativePosition,
    pub label: ZoneLabel,
}

/// Thresholds for VRU discrimination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscriminationConfig {
    /// Smoothing window for the speed estimate, seconds.
    pub speed_window_s: f64,
    /// Below this mean speed: pedestrian.
    pub walk_max_mps: f64,
    /// Below this mean speed (and at least walking): cyclist.
    pub cycle_max_mps: f64,
    /// Minimum co-movement with a vehicle before a fast track is "in vehicle".
    pub covehicle_min_s: f64,
    /// A slow track that stays on the road this long is a road worker.
    pub road_worker_min_s: f64,
}

impl Default for DiscriminationConfig {
    fn default() -> Self {
        DiscriminationConfig {
            speed_window_s: 1.0,
            walk_max_mps: 3.0,
            cycle_max_mps: 9.0,
            covehicle_min_s: 2.0,
            road_worker_min_s: 30.0,
        }
    }
}

/// Determines the VRU type for a record.
///
/// An explicit type reported in the sender's PSM wins. Otherwise the decision
/// falls to the smoothed speed, refined by co-movement with a vehicle record
/// (in-vehicle) and by long dwell inside the road corridor (road worker).
/// Returns [`VruClass::Unknown`] until the track is old enough to judge.
pub fn discriminate_vru(
    record: &MapRecord,
    cfg: &DiscriminationConfig,
    now_s: f64,
) -> VruClass {
    match record.reported_user_type {
        PersonalUserType::Pedestrian => return VruClass::Pedestrian,
        PersonalUserType::Pedalcyclist => return VruClass::Cyclist,
        PersonalUserType::PublicSafetyWorker => return VruClass::PublicSafetyWorker,
        // No animal class on the receiving side; fall through to the heuristics.
        PersonalUserType::Animal | PersonalUserType::Unavailable => {}
    }
    let Some(mean_speed) = record.smoothed_speed(now_s, cfg.speed_window_s) else {
        return VruClass::Unknown;
    };
    if mean_speed >= cfg.cycle_max_mps {
        let co_moving = record
            .near_vehicle_since
            .is_some_and(|since| now_s - since >= cfg.covehicle_min_s);
        if co_moving {
            return VruClass::InVehicle;
        }
        return VruClass::Motorcyclist;
    }
    if mean_speed >= cfg.walk_max_mps {
        return VruClass::Cyclist;
    }
    let long_road_dwell = record
        .in_road_since
        .is_some_and(|since| now_s - since > cfg.road_worker_min_s);
    if long_road_dwell {
        return VruClass::PublicSafetyWorker;
    }
    VruClass::Pedestrian
}

/// Runs discrimination over every VRU record in a map, storing the class.
pub fn discriminate_all(map: &mut RealTimeMap, cfg: &DiscriminationConfig, now_s: f64) {
    let ids: Vec<_> = map.records().map(|r| r.temp_id).collect();
    for id in ids {
        let class = {
            let rec = map.get(&id).unwrap();
            if rec.entity_kind == crate::awareness::EntityKind::Vru {
                discriminate_vru(rec, cfg, now_s)
            } else {
                continue;
            }
        };
        map.get_mut(&id).unwrap().vru_class = class;
    }
}
