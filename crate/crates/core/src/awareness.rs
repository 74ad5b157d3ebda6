//! Situational awareness: the per-device real-time map of neighbors.
//!
//! Each simulated device owns one [`RealTimeMap`]. Received messages refresh
//! records through [`RealTimeMap::ingest_message`]; the map re-expresses every
//! record in a frame anchored at the device's latest position with the latest
//! heading as the x-axis. Records keep the authoritative geodetic position, so
//! re-centering the frame is exact.

use crate::geo::{geodetic_to_local, GeodeticPosition, LocalFramePoint};
use crate::messages::{Message, PersonalUserType, TempId};
use std::collections::{BTreeMap, VecDeque};

/// Seconds without an update before a record is dropped.
pub const RECORD_EXPIRY_S: f64 = 1.0;
/// Targets slower than this are treated as stationary; their reported heading
/// is unreliable and prediction degenerates to the current point.
pub const STATIONARY_SPEED_MPS: f64 = 0.1;
/// Yaw rates below this predict straight-line motion.
pub const STRAIGHT_YAW_RATE_RPS: f64 = 0.01;
/// A new path-history point is stored after this much travel...
const HISTORY_MIN_TRAVEL_M: f64 = 1.0;
/// ...or this much heading change.
const HISTORY_MIN_HEADING_DEG: f64 = 5.0;
/// Path history is capped at the message-type bound; oldest evicted first.
pub const MAX_HISTORY_POINTS: usize = 23;
/// Speed samples older than this fall out of the smoothing window.
const SPEED_WINDOW_S: f64 = 1.5;
/// Two records closer than this count as co-moving.
pub const CO_MOVE_RADIUS_M: f64 = 3.0;

/// Instantaneous motion state of a road user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicState {
    /// Speed over ground, m/s, nonnegative.
    pub speed_mps: f64,
    /// Signed longitudinal acceleration, m/s².
    pub accel_mps2: f64,
    /// Compass heading, degrees.
    pub heading_deg: f64,
    /// Yaw rate, rad/s; positive turns left.
    pub yaw_rate_rps: f64,
}

impl KinematicState {
    pub fn stationary() -> Self {
        KinematicState { speed_mps: 0.0, accel_mps2: 0.0, heading_deg: 0.0, yaw_rate_rps: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntityKind {
    Vehicle,
    Vru,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VruClass {
    Unknown,
    Pedestrian,
    Cyclist,
    Motorcyclist,
    PublicSafetyWorker,
    InVehicle,
}

/// A point on a track, stamped with simulation time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimedPoint {
    pub time_s: f64,
    pub point: LocalFramePoint,
}

/// Everything the device knows about one neighbor.
#[derive(Debug, Clone)]
pub struct MapRecord {
    pub temp_id: TempId,
    pub entity_kind: EntityKind,
    pub vru_class: VruClass,
    /// Explicit type from the sender's PSM, if any.
    pub reported_user_type: PersonalUserType,
    /// Authoritative received position; `position` derives from it.
    pub geodetic: GeodeticPosition,
    /// Position in the current map frame.
    pub position: LocalFramePoint,
    pub kin: KinematicState,
    pub last_update_s: f64,
    pub last_dsecond_ms: u16,
    /// Concise track history, oldest first, in geodetic form.
    pub path_history: VecDeque<(f64, GeodeticPosition)>,
    /// Latest prediction computed for this record, if the owner stores one.
    pub predicted_path: Vec<TimedPoint>,
    /// Set while a vehicle record stays within [`CO_MOVE_RADIUS_M`].
    pub near_vehicle_since: Option<f64>,
    /// Set while the record stays inside the configured road corridor.
    pub in_road_since: Option<f64>,
    speed_samples: VecDeque<(f64, f64)>,
    first_seen_s: f64,
}

impl MapRecord {
    /// Mean speed over the trailing `window_s`. `None` until the track spans
    /// at least `window_s` seconds.
    pub fn smoothed_speed(&self, now_s: f64, window_s: f64) -> Option<f64> {
        if now_s - self.first_seen_s < window_s {
            return None;
        }
        let cutoff = now_s - window_s;
        let mut sum = 0.0;
        let mut n = 0usize;
        for &(_, v) in self.speed_samples.iter().filter(|(t, _)| *t >= cutoff) {
            sum += v;
            n += 1;
        }
        (n > 0).then(|| sum / n as f64)
    }

    /// Track age in seconds.
    pub fn track_age(&self, now_s: f64) -> f64 {
        now_s - self.first_seen_s
    }

    /// Local-frame history points for the current map frame.
    pub fn history_local(&self, origin: &GeodeticPosition, heading_deg: f64) -> Vec<TimedPoint> {
        self.path_history
            .iter()
            .filter_map(|(t, g)| {
                geodetic_to_local(g, origin, heading_deg)
                    .ok()
                    .map(|point| TimedPoint { time_s: *t, point })
            })
            .collect()
    }
}

/// Per-device database of neighbors in a device-local frame.
#[derive(Debug, Clone)]
pub struct RealTimeMap {
    self_position: GeodeticPosition,
    self_heading_deg: f64,
    pub self_kin: KinematicState,
    records: BTreeMap<TempId, MapRecord>,
    /// Half-width of the road corridor (|y| bound) used for the
    /// stays-within-road heuristic, if the owner knows the road it drives.
    pub road_half_width_m: Option<f64>,
    /// Messages dropped because a fresher update was already stored.
    pub stale_drops: u64,
}

impl RealTimeMap {
    pub fn new(self_position: GeodeticPosition, self_heading_deg: f64, self_kin: KinematicState) -> Self {
        RealTimeMap {
            self_position,
            self_heading_deg,
            self_kin,
            records: BTreeMap::new(),
            road_half_width_m: None,
            stale_drops: 0,
        }
    }

    pub fn self_position(&self) -> &GeodeticPosition {
        &self.self_position
    }

    pub fn self_heading_deg(&self) -> f64 {
        self.self_heading_deg
    }

    pub fn records(&self) -> impl Iterator<Item = &MapRecord> {
        self.records.values()
    }

    pub fn records_mut(&mut self) -> impl Iterator<Item = &mut MapRecord> {
        self.records.values_mut()
    }

    pub fn get(&self, id: &TempId) -> Option<&MapRecord> {
        self.records.get(id)
    }

    pub fn get_mut(&mut self, id: &TempId) -> Option<&mut MapRecord> {
        self.records.get_mut(id)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Re-anchors the map at a new self pose. Every stored record is
    /// re-projected from its geodetic position into the new frame.
    pub fn update_self(&mut self, position: GeodeticPosition, heading_deg: f64, kin: KinematicState) {
        self.self_position = position;
        self.self_heading_deg = heading_deg;
        self.self_kin = kin;
        for rec in self.records.values_mut() {
            if let Ok(p) = geodetic_to_local(&rec.geodetic, &position, heading_deg) {
                rec.position = p;
            }
        }
    }

    /// Merges a received message into the map. Messages whose `dsecond` is not
    /// newer than the stored record are dropped and counted in `stale_drops`.
    pub fn ingest_message(&mut self, msg: &Message, now_s: f64) {
        let c = msg.common();
        let kin = KinematicState {
            speed_mps: c.speed_mps,
            accel_mps2: c.accel.lon_mps2,
            heading_deg: c.heading_deg,
            yaw_rate_rps: c.accel.yaw_rate_dps.to_radians(),
        };
        let (entity_kind, reported) = match msg {
            Message::Bsm(_) => (EntityKind::Vehicle, PersonalUserType::Unavailable),
            Message::Psm(p) => (EntityKind::Vru, p.user_type),
        };
        let local = match geodetic_to_local(&c.position, &self.self_position, self.self_heading_deg) {
            Ok(p) => p,
            Err(_) => return,
        };

        match self.records.get_mut(&c.temp_id) {
            Some(rec) => {
                if !dsecond_is_newer(rec.last_dsecond_ms, c.dsecond_ms) {
                    self.stale_drops += 1;
                    return;
                }
                rec.geodetic = c.position;
                rec.position = local;
                rec.kin = kin;
                rec.last_update_s = now_s;
                rec.last_dsecond_ms = c.dsecond_ms;
                rec.reported_user_type = reported;
                rec.speed_samples.push_back((now_s, c.speed_mps));
                while rec
                    .speed_samples
                    .front()
                    .is_some_and(|(t, _)| now_s - *t > SPEED_WINDOW_S)
                {
                    rec.speed_samples.pop_front();
                }
                if history_wants_point(rec, &c.position, kin.heading_deg) {
                    rec.path_history.push_back((now_s, c.position));
                    while rec.path_history.len() > MAX_HISTORY_POINTS {
                        rec.path_history.pop_front();
                    }
                }
            }
            None => {
                let mut rec = MapRecord {
                    temp_id: c.temp_id,
                    entity_kind,
                    vru_class: VruClass::Unknown,
                    reported_user_type: reported,
                    geodetic: c.position,
                    position: local,
                    kin,
                    last_update_s: now_s,
                    last_dsecond_ms: c.dsecond_ms,
                    path_history: VecDeque::new(),
                    predicted_path: Vec::new(),
                    near_vehicle_since: None,
                    in_road_since: None,
                    speed_samples: VecDeque::new(),
                    first_seen_s: now_s,
                };
                rec.speed_samples.push_back((now_s, c.speed_mps));
                rec.path_history.push_back((now_s, c.position));
                self.records.insert(c.temp_id, rec);
            }
        }
        self.refresh_context_tracks(&c.temp_id, now_s);
    }

    /// Maintains the co-movement and in-road timers for one record.
    fn refresh_context_tracks(&mut self, id: &TempId, now_s: f64) {
        let (pos, kind) = match self.records.get(id) {
            Some(r) => (r.position, r.entity_kind),
            None => return,
        };
        let near_vehicle = kind == EntityKind::Vru
            && self.records.values().any(|other| {
                other.entity_kind == EntityKind::Vehicle
                    && other.position.distance(&pos) <= CO_MOVE_RADIUS_M
            });
        let in_road = self
            .road_half_width_m
            .is_some_and(|hw| pos.y_m.abs() <= hw);
        let rec = self.records.get_mut(id).unwrap();
        rec.near_vehicle_since = if near_vehicle { rec.near_vehicle_since.or(Some(now_s)) } else { None };
        rec.in_road_since = if in_road { rec.in_road_since.or(Some(now_s)) } else { None };
    }

    /// Drops records not refreshed within [`RECORD_EXPIRY_S`].
    pub fn expire_records(&mut self, now_s: f64) {
        self.records.retain(|_, rec| now_s - rec.last_update_s <= RECORD_EXPIRY_S);
    }

    /// One line per record: `time id kind x y v heading`.
    pub fn snapshot_lines(&self, now_s: f64) -> Vec<String> {
        self.records
            .values()
            .map(|r| {
                format!(
                    "{:.1} {} {} {:.3} {:.3} {:.3} {:.3}",
                    now_s,
                    r.temp_id,
                    match r.entity_kind {
                        EntityKind::Vehicle => "vehicle",
                        EntityKind::Vru => "vru",
                    },
                    r.position.x_m,
                    r.position.y_m,
                    r.kin.speed_mps,
                    r.kin.heading_deg,
                )
            })
            .collect()
    }
}

fn history_wants_point(rec: &MapRecord, new_pos: &GeodeticPosition, new_heading: f64) -> bool {
    let Some((_, last)) = rec.path_history.back() else {
        return true;
    };
    // Cheap planar displacement from the last stored point.
    let dlat = (new_pos.lat_deg - last.lat_deg).to_radians();
    let dlon = (new_pos.lon_deg - last.lon_deg).to_radians();
    let lat = last.lat_deg.to_radians();
    let dist = crate::geo::WGS84_A * (dlat.powi(2) + (dlon * lat.cos()).powi(2)).sqrt();
    let dheading = heading_difference_deg(rec.kin.heading_deg, new_heading).abs();
    dist >= HISTORY_MIN_TRAVEL_M || dheading >= HISTORY_MIN_HEADING_DEG
}

/// Signed smallest difference between two compass headings, degrees in (−180, 180].
pub fn heading_difference_deg(from_deg: f64, to_deg: f64) -> f64 {
    let mut d = (to_deg - from_deg) % 360.0;
    if d > 180.0 {
        d -= 360.0;
    } else if d <= -180.0 {
        d += 360.0;
    }
    d
}

/// True when `candidate` is newer than `stored`, allowing for the
/// once-a-minute wrap of the `dsecond` field.
fn dsecond_is_newer(stored_ms: u16, candidate_ms: u16) -> bool {
    if stored_ms == candidate_ms {
        return false;
    }
    let forward = (candidate_ms as i32 - stored_ms as i32).rem_euclid(60_000);
    forward > 0 && forward < 30_000
}

/// Predicts a single future point `tau_s` ahead under constant speed and yaw
/// rate, starting from `origin` in a frame whose x-axis has compass heading
/// `frame_heading_deg`.
///
/// Stationary targets predict their current point: their heading is noise.
pub fn predict_point(
    origin: LocalFramePoint,
    kin: &KinematicState,
    frame_heading_deg: f64,
    tau_s: f64,
) -> LocalFramePoint {
    if kin.speed_mps < STATIONARY_SPEED_MPS || tau_s <= 0.0 {
        return origin;
    }
    // Motion direction as a math angle in the local frame (CCW from +x):
    // compass headings grow clockwise, so the relative angle flips sign.
    let alpha = (frame_heading_deg - kin.heading_deg).to_radians();
    let v = kin.speed_mps;
    let psi = kin.yaw_rate_rps;
    if psi.abs() < STRAIGHT_YAW_RATE_RPS {
        LocalFramePoint {
            x_m: origin.x_m + v * tau_s * alpha.cos(),
            y_m: origin.y_m + v * tau_s * alpha.sin(),
        }
    } else {
        // Constant-turn-rate arc of radius v/psi.
        let r = v / psi;
        LocalFramePoint {
            x_m: origin.x_m + r * ((alpha + psi * tau_s).sin() - alpha.sin()),
            y_m: origin.y_m - r * ((alpha + psi * tau_s).cos() - alpha.cos()),
        }
    }
}

/// Samples the predicted track at `step_s` intervals out to `horizon_s`,
/// starting with the current point at offset zero.
pub fn predict_path(
    origin: LocalFramePoint,
    kin: &KinematicState,
    frame_heading_deg: f64,
    now_s: f64,
    horizon_s: f64,
    step_s: f64,
) -> Vec<TimedPoint> {
    let mut out = vec![TimedPoint { time_s: now_s, point: origin }];
    if horizon_s <= 0.0 || step_s <= 0.0 {
        return out;
    }
    let steps = (horizon_s / step_s + 1e-9).floor() as usize;
    for k in 1..=steps {
        let tau = k as f64 * step_s;
        out.push(TimedPoint {
            time_s: now_s + tau,
            point: predict_point(origin, kin, frame_heading_deg, tau),
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::enu_offset_to_geodetic;
    use crate::messages::{
        AccelSet4Way, CommonSafetyFields, Message, PersonalUserType, Psm, UsageState,
    };
    use approx::assert_abs_diff_eq;

    fn origin() -> GeodeticPosition {
        GeodeticPosition::new(39.65, -79.97, 300.0).unwrap()
    }

    fn psm_at(east: f64, north: f64, dsecond: u16, speed: f64, heading: f64) -> Message {
        let pos = enu_offset_to_geodetic(east, north, &origin()).unwrap();
        Message::Psm(Psm {
            common: CommonSafetyFields {
                msg_count: 0,
                temp_id: TempId(*b"ped1"),
                dsecond_ms: dsecond,
                position: pos,
                positional_accuracy_m: 1.0,
                speed_mps: speed,
                heading_deg: heading,
                accel: AccelSet4Way::default(),
            },
            user_type: PersonalUserType::Unavailable,
            usage_state: UsageState::empty(),
            crossing_request: false,
            cluster_size: 1,
            path_history: None,
            path_prediction: None,
        })
    }

    fn north_facing_map() -> RealTimeMap {
        RealTimeMap::new(origin(), 0.0, KinematicState::stationary())
    }

    #[test]
    fn first_message_creates_a_record() {
        let mut map = north_facing_map();
        map.ingest_message(&psm_at(0.0, 50.0, 0, 1.4, 90.0), 0.0);
        assert_eq!(map.len(), 1);
        let rec = map.get(&TempId(*b"ped1")).unwrap();
        assert!(rec.predicted_path.is_empty());
        assert_abs_diff_eq!(rec.position.x_m, 50.0, epsilon = 1e-3);
        assert_abs_diff_eq!(rec.position.y_m, 0.0, epsilon = 1e-3);
    }

    #[test]
    fn stale_duplicate_is_dropped_and_counted() {
        let mut map = north_facing_map();
        map.ingest_message(&psm_at(0.0, 50.0, 500, 1.4, 90.0), 0.5);
        map.ingest_message(&psm_at(5.0, 50.0, 400, 1.4, 90.0), 0.6);
        let rec = map.get(&TempId(*b"ped1")).unwrap();
        assert_abs_diff_eq!(rec.position.x_m, 50.0, epsilon = 1e-3);
        assert_abs_diff_eq!(rec.position.y_m, 0.0, epsilon = 1e-3);
        assert_eq!(map.stale_drops, 1);
    }

    #[test]
    fn dsecond_wrap_is_still_fresh() {
        assert!(dsecond_is_newer(59_900, 100));
        assert!(!dsecond_is_newer(100, 59_900));
        assert!(!dsecond_is_newer(100, 100));
    }

    #[test]
    fn consecutive_messages_track_walking_motion() {
        // Two messages 100 ms apart at 1.4 m/s heading east: the second
        // position sits 0.14 m east of the first (dead-reckoning oracle).
        let mut map = north_facing_map();
        map.ingest_message(&psm_at(10.0, 50.0, 0, 1.4, 90.0), 0.0);
        map.ingest_message(&psm_at(10.14, 50.0, 100, 1.4, 90.0), 0.1);
        let rec = map.get(&TempId(*b"ped1")).unwrap();
        // North-facing frame: x is north, y is west, so east shows up as -y.
        assert_abs_diff_eq!(rec.position.x_m, 50.0, epsilon = 1e-3);
        assert_abs_diff_eq!(rec.position.y_m, -10.14, epsilon = 1e-3);
    }

    #[test]
    fn update_self_translates_records() {
        let mut map = north_facing_map();
        map.ingest_message(&psm_at(0.0, 50.0, 0, 0.0, 0.0), 0.0);
        // Self moves 10 m north, heading unchanged: target at (50,0) -> (40,0).
        let moved = enu_offset_to_geodetic(0.0, 10.0, &origin()).unwrap();
        map.update_self(moved, 0.0, KinematicState::stationary());
        let rec = map.get(&TempId(*b"ped1")).unwrap();
        assert_abs_diff_eq!(rec.position.x_m, 40.0, epsilon = 1e-3);
        assert_abs_diff_eq!(rec.position.y_m, 0.0, epsilon = 1e-3);
    }

    #[test]
    fn update_self_rotates_records() {
        let mut map = north_facing_map();
        map.ingest_message(&psm_at(0.0, 10.0, 0, 0.0, 0.0), 0.0);
        // Record dead ahead at (10, 0); heading swings 0 -> 90: the same point
        // is now on the left at (0, 10) (frame rotation oracle).
        map.update_self(origin(), 90.0, KinematicState::stationary());
        let rec = map.get(&TempId(*b"ped1")).unwrap();
        assert_abs_diff_eq!(rec.position.x_m, 0.0, epsilon = 1e-3);
        assert_abs_diff_eq!(rec.position.y_m, 10.0, epsilon = 1e-3);
    }

    #[test]
    fn frame_consistency_after_recentering() {
        let mut map = north_facing_map();
        map.ingest_message(&psm_at(23.0, -41.0, 0, 1.4, 45.0), 0.0);
        let moved = enu_offset_to_geodetic(5.0, -3.0, &origin()).unwrap();
        map.update_self(moved, 33.0, KinematicState::stationary());
        let rec = map.get(&TempId(*b"ped1")).unwrap();
        let expected = geodetic_to_local(&rec.geodetic, map.self_position(), 33.0).unwrap();
        assert!(rec.position.distance(&expected) < 1e-6);
    }

    #[test]
    fn records_expire_after_one_second() {
        let mut map = north_facing_map();
        map.ingest_message(&psm_at(0.0, 50.0, 0, 0.0, 0.0), 5.0);
        map.expire_records(5.9);
        assert_eq!(map.len(), 1);
        map.expire_records(6.1);
        assert_eq!(map.len(), 0);
    }

    #[test]
    fn continuous_sender_never_expires() {
        let mut map = north_facing_map();
        for k in 0..50u32 {
            let t = k as f64 * 0.1;
            map.ingest_message(&psm_at(0.0, 50.0, (t * 1000.0) as u16, 0.0, 0.0), t);
            map.expire_records(t);
            assert_eq!(map.len(), 1);
        }
    }

    #[test]
    fn ingest_then_expire_is_idempotent_for_fresh_messages() {
        let mut map = north_facing_map();
        map.ingest_message(&psm_at(0.0, 50.0, 1000, 0.0, 0.0), 1.0);
        let before = map.len();
        map.expire_records(1.0);
        assert_eq!(map.len(), before);
    }

    #[test]
    fn history_is_capped_and_evicts_oldest() {
        let mut map = north_facing_map();
        for k in 0..60u32 {
            // 2 m per message, always beyond the 1 m travel gate.
            map.ingest_message(
                &psm_at(2.0 * k as f64, 0.0, (k * 100) as u16, 2.0, 90.0),
                k as f64 * 0.1,
            );
        }
        let rec = map.get(&TempId(*b"ped1")).unwrap();
        assert_eq!(rec.path_history.len(), MAX_HISTORY_POINTS);
        let times: Vec<f64> = rec.path_history.iter().map(|(t, _)| *t).collect();
        assert!(times.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn stationary_target_predicts_its_own_point() {
        let origin_pt = LocalFramePoint::new(12.0, -3.0);
        let kin = KinematicState { speed_mps: 0.0, accel_mps2: 0.0, heading_deg: 270.0, yaw_rate_rps: 0.0 };
        for tp in predict_path(origin_pt, &kin, 0.0, 0.0, 5.0, 0.5) {
            assert_eq!(tp.point, origin_pt);
        }
    }

    #[test]
    fn straight_prediction_walks_the_heading() {
        let kin = KinematicState { speed_mps: 10.0, accel_mps2: 0.0, heading_deg: 90.0, yaw_rate_rps: 0.0 };
        // Frame heading matches motion heading: the track runs along +x.
        let pts = predict_path(LocalFramePoint::new(0.0, 0.0), &kin, 90.0, 0.0, 2.0, 1.0);
        assert_eq!(pts.len(), 3);
        assert_abs_diff_eq!(pts[0].point.x_m, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pts[1].point.x_m, 10.0, epsilon = 1e-9);
        assert_abs_diff_eq!(pts[1].point.y_m, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(pts[2].point.x_m, 20.0, epsilon = 1e-9);
    }

    #[test]
    fn horizon_zero_returns_exactly_the_current_position() {
        let kin = KinematicState { speed_mps: 5.0, accel_mps2: 0.0, heading_deg: 10.0, yaw_rate_rps: 0.1 };
        let p = LocalFramePoint::new(3.0, 4.0);
        let pts = predict_path(p, &kin, 10.0, 7.0, 0.0, 0.1);
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].point, p);
        assert_eq!(pts[0].time_s, 7.0);
    }

    #[test]
    fn turning_prediction_traces_the_circle() {
        // v = 10 m/s, yaw 0.1 rad/s: a 100 m radius circle whose center sits
        // 100 m left of the start. Half a revolution lands diametrically
        // opposite at (0, 200); a quarter lands at (100, 100).
        let kin = KinematicState { speed_mps: 10.0, accel_mps2: 0.0, heading_deg: 0.0, yaw_rate_rps: 0.1 };
        let start = LocalFramePoint::new(0.0, 0.0);
        let half_rev = std::f64::consts::PI / 0.1;
        let end = predict_point(start, &kin, 0.0, half_rev);
        assert_abs_diff_eq!(end.x_m, 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(end.y_m, 200.0, epsilon = 1e-6);
        let quarter = predict_point(start, &kin, 0.0, half_rev / 2.0);
        assert_abs_diff_eq!(quarter.x_m, 100.0, epsilon = 1e-6);
        assert_abs_diff_eq!(quarter.y_m, 100.0, epsilon = 1e-6);
    }
}
