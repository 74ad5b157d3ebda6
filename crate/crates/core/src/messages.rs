//! BSM and PSM safety messages with a compact binary wire codec.
//!
//! The codec is bit-exact: every numeric field lives on a fixed-point lattice
//! (quantization step per field, little-endian integers), so
//! `decode(encode(m)) == m` holds exactly for lattice-valued messages.
//! Out-of-range values error at encode time; nothing is ever clamped silently.
//!
//! Wire layout
//!
//! ```text
//! tag (1B): 0x20 = BSM, 0x21 = PSM
//! common (30B, both messages):
//!   msg_count u8          [0,127]
//!   temp_id   [u8;4]
//!   dsecond   u16 ms      [0,60999]
//!   lat       i32 1e-7°   lon i32 1e-7°   elev i16 0.1m
//!   pos_acc   u8  0.1m    speed u16 0.02 m/s   heading u16 0.0125°
//!   accel     i16 ×3 0.01 m/s²   yaw_rate i16 0.01 °/s
//! BSM (8B):  transmission u8, steering i16 0.1°, brake u8 flags,
//!            length u16 0.01m, width u16 0.01m              → 39 bytes total
//! PSM (5B):  user_type u8, usage u16 flags, crossing u8, cluster u8
//!            → 36 bytes fixed, then:
//!   presence u8: bit7 prediction, bit6 history, bits0-4 history count
//!   history  5B per point: lat_off i16 1e-7°, lon_off i16 1e-7°, t_off u8 100ms
//!   prediction 5B: radius i32 0.01m, confidence u8 0.005
//! ```

use crate::geo::{normalize_longitude, GeodeticPosition};
use std::fmt;
use thiserror::Error;

pub const BSM_TAG: u8 = 0x20;
pub const PSM_TAG: u8 = 0x21;
/// Encoded size of a BSM, constant.
pub const BSM_WIRE_BYTES: usize = 39;
/// Encoded size of the fixed part of a PSM (everything before the presence byte).
pub const PSM_FIXED_WIRE_BYTES: usize = 36;
/// Maximum number of path-history points a PSM can carry.
pub const MAX_PATH_POINTS: usize = 23;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EncodeError {
    #[error("{field} = {value} outside [{min}, {max}]")]
    OutOfRange { field: &'static str, value: f64, min: f64, max: f64 },
    #[error("path history holds {0} points, max {MAX_PATH_POINTS}")]
    TooManyPathPoints(usize),
    #[error("path history time offsets must increase strictly into the past")]
    NonMonotonicHistory,
    #[error("unknown usage-state bits {0:#06x}")]
    UnknownUsageBits(u16),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecodeError {
    #[error("unknown message tag {0:#04x}")]
    UnknownTag(u8),
    #[error("buffer truncated while reading {0}")]
    Truncated(&'static str),
    #[error("{0} trailing bytes after message")]
    TrailingBytes(usize),
    #[error("{0} decoded out of range")]
    FieldOutOfRange(&'static str),
    #[error("reserved bits set in {0}")]
    ReservedBits(&'static str),
    #[error("path history time offsets not strictly increasing")]
    NonMonotonicHistory,
}

/// 4-byte rotating device identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TempId(pub [u8; 4]);

impl TempId {
    pub fn from_u32(v: u32) -> Self {
        TempId(v.to_le_bytes())
    }
}

impl fmt::Display for TempId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02x}{:02x}{:02x}{:02x}", self.0[0], self.0[1], self.0[2], self.0[3])
    }
}

/// Longitudinal/lateral/vertical acceleration plus yaw rate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AccelSet4Way {
    pub lon_mps2: f64,
    pub lat_mps2: f64,
    pub vert_mps2: f64,
    pub yaw_rate_dps: f64,
}

/// Fields shared by BSM and PSM.
#[derive(Debug, Clone, PartialEq)]
pub struct CommonSafetyFields {
    /// Wraps mod 128 per sender.
    pub msg_count: u8,
    pub temp_id: TempId,
    /// Milliseconds within the current minute.
    pub dsecond_ms: u16,
    pub position: GeodeticPosition,
    /// 1-sigma horizontal accuracy, meters.
    pub positional_accuracy_m: f64,
    pub speed_mps: f64,
    /// Compass heading, degrees in [0, 360).
    pub heading_deg: f64,
    pub accel: AccelSet4Way,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransmissionState {
    Neutral = 0,
    Park = 1,
    ForwardGears = 2,
    ReverseGears = 3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BrakeStatus {
    pub brake_applied: bool,
    pub abs_active: bool,
}

/// Vehicle-originated basic safety message.
#[derive(Debug, Clone, PartialEq)]
pub struct Bsm {
    pub common: CommonSafetyFields,
    pub transmission_state: TransmissionState,
    pub steering_angle_deg: f64,
    pub brake: BrakeStatus,
    pub vehicle_length_m: f64,
    pub vehicle_width_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PersonalUserType {
    Unavailable = 0,
    Pedestrian = 1,
    Pedalcyclist = 2,
    PublicSafetyWorker = 3,
    Animal = 4,
}

/// Device usage context, a flag set: several states can hold at once.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct UsageState(u16);

impl UsageState {
    pub const UNAVAILABLE: UsageState = UsageState(0x0001);
    pub const IDLE: UsageState = UsageState(0x0002);
    pub const LISTENING_TO_AUDIO: UsageState = UsageState(0x0004);
    pub const TYPING: UsageState = UsageState(0x0008);
    pub const CALLING: UsageState = UsageState(0x0010);
    const KNOWN_MASK: u16 = 0x001F;

    pub fn empty() -> Self {
        UsageState(0)
    }

    pub fn from_bits(bits: u16) -> Option<Self> {
        (bits & !Self::KNOWN_MASK == 0).then_some(UsageState(bits))
    }

    pub fn bits(self) -> u16 {
        self.0
    }

    pub fn contains(self, other: UsageState) -> bool {
        self.0 & other.0 == other.0
    }

    #[must_use]
    pub fn with(self, other: UsageState) -> Self {
        UsageState(self.0 | other.0)
    }
}

/// A past position, stored as an offset from the current position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPoint {
    /// Latitude offset in degrees (lattice 1e-7°).
    pub lat_offset_deg: f64,
    /// Longitude offset in degrees (lattice 1e-7°).
    pub lon_offset_deg: f64,
    /// Milliseconds before `dsecond` (lattice 100 ms), strictly increasing into the past.
    pub time_offset_ms: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPrediction {
    /// Signed radius of curvature, meters; positive curves left.
    pub radius_m: f64,
    /// Confidence in [0, 1] (lattice 0.005).
    pub confidence: f64,
}

/// VRU-originated personal safety message.
#[derive(Debug, Clone, PartialEq)]
pub struct Psm {
    pub common: CommonSafetyFields,
    pub user_type: PersonalUserType,
    pub usage_state: UsageState,
    pub crossing_request: bool,
    /// Number of co-located users this device speaks for, [1, 100].
    pub cluster_size: u8,
    /// Ordered oldest → newest (newest = smallest time offset last).
    pub path_history: Option<Vec<PathPoint>>,
    pub path_prediction: Option<PathPrediction>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    Bsm(Bsm),
    Psm(Psm),
}

impl Message {
    pub fn common(&self) -> &CommonSafetyFields {
        match self {
            Message::Bsm(m) => &m.common,
            Message::Psm(m) => &m.common,
        }
    }
}

// Quantization steps.
const STEP_LATLON: f64 = 1e-7;
const STEP_ELEV: f64 = 0.1;
const STEP_ACCURACY: f64 = 0.1;
const STEP_SPEED: f64 = 0.02;
const STEP_HEADING: f64 = 0.0125;
const STEP_ACCEL: f64 = 0.01;
const STEP_YAW: f64 = 0.01;
const STEP_STEERING: f64 = 0.1;
const STEP_SIZE: f64 = 0.01;
const STEP_RADIUS: f64 = 0.01;
const STEP_CONFIDENCE: f64 = 0.005;
const HEADING_UNITS: i64 = 28_800; // 360 / 0.0125
const LON_UNITS: i64 = 1_800_000_000;

fn quantize(field: &'static str, value: f64, step: f64, min_u: i64, max_u: i64) -> Result<i64, EncodeError> {
    let out_of_range = || EncodeError::OutOfRange {
        field,
        value,
        min: min_u as f64 * step,
        max: max_u as f64 * step,
    };
    if !value.is_finite() {
        return Err(out_of_range());
    }
    let units = (value / step).round();
    if units < min_u as f64 || units > max_u as f64 {
        return Err(out_of_range());
    }
    Ok(units as i64)
}

fn on_lattice(value: f64, step: f64) -> bool {
    value.is_finite() && (value / step).round() * step == value
}

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u16(&mut self, v: u16) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn i16(&mut self, v: i64) {
        self.0.extend_from_slice(&(v as i16).to_le_bytes());
    }
    fn i32(&mut self, v: i64) {
        self.0.extend_from_slice(&(v as i32).to_le_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }
    fn take(&mut self, n: usize, what: &'static str) -> Result<&'a [u8], DecodeError> {
        if self.pos + n > self.buf.len() {
            return Err(DecodeError::Truncated(what));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u8(&mut self, what: &'static str) -> Result<u8, DecodeError> {
        Ok(self.take(1, what)?[0])
    }
    fn u16(&mut self, what: &'static str) -> Result<u16, DecodeError> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }
    fn i16(&mut self, what: &'static str) -> Result<i16, DecodeError> {
        Ok(i16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }
    fn i32(&mut self, what: &'static str) -> Result<i32, DecodeError> {
        Ok(i32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
    fn finish(&self) -> Result<(), DecodeError> {
        let rest = self.buf.len() - self.pos;
        if rest != 0 {
            return Err(DecodeError::TrailingBytes(rest));
        }
        Ok(())
    }
}

fn encode_common(w: &mut Writer, c: &CommonSafetyFields) -> Result<(), EncodeError> {
    if c.msg_count > 127 {
        return Err(EncodeError::OutOfRange {
            field: "msg_count",
            value: c.msg_count as f64,
            min: 0.0,
            max: 127.0,
        });
    }
    if c.dsecond_ms > 60_999 {
        return Err(EncodeError::OutOfRange {
            field: "dsecond",
            value: c.dsecond_ms as f64,
            min: 0.0,
            max: 60_999.0,
        });
    }
    w.u8(c.msg_count);
    w.0.extend_from_slice(&c.temp_id.0);
    w.u16(c.dsecond_ms);
    w.i32(quantize("lat", c.position.lat_deg, STEP_LATLON, -900_000_000, 900_000_000)?);
    // Longitude and heading are circular: the top lattice point wraps to the bottom.
    let lon = normalize_longitude(c.position.lon_deg);
    let mut lon_u = quantize("lon", lon, STEP_LATLON, -LON_UNITS, LON_UNITS)?;
    if lon_u == LON_UNITS {
        lon_u = -LON_UNITS;
    }
    w.i32(lon_u);
    w.i16(quantize("elev", c.position.elev_m, STEP_ELEV, -32_768, 32_767)?);
    let acc = quantize("positional_accuracy", c.positional_accuracy_m, STEP_ACCURACY, 0, 255)?;
    w.u8(acc as u8);
    let speed = quantize("speed", c.speed_mps, STEP_SPEED, 0, 8_190)?;
    w.u16(speed as u16);
    if !(0.0..360.0).contains(&c.heading_deg) {
        return Err(EncodeError::OutOfRange {
            field: "heading",
            value: c.heading_deg,
            min: 0.0,
            max: 360.0,
        });
    }
    let heading = quantize("heading", c.heading_deg, STEP_HEADING, 0, HEADING_UNITS)? % HEADING_UNITS;
    w.u16(heading as u16);
    w.i16(quantize("accel_lon", c.accel.lon_mps2, STEP_ACCEL, -2_000, 2_000)?);
    w.i16(quantize("accel_lat", c.accel.lat_mps2, STEP_ACCEL, -2_000, 2_000)?);
    w.i16(quantize("accel_vert", c.accel.vert_mps2, STEP_ACCEL, -2_000, 2_000)?);
    w.i16(quantize("yaw_rate", c.accel.yaw_rate_dps, STEP_YAW, -32_700, 32_700)?);
    Ok(())
}

fn decode_common(r: &mut Reader) -> Result<CommonSafetyFields, DecodeError> {
    let msg_count = r.u8("msg_count")?;
    if msg_count > 127 {
        return Err(DecodeError::FieldOutOfRange("msg_count"));
    }
    let temp_id = TempId(r.take(4, "temp_id")?.try_into().unwrap());
    let dsecond_ms = r.u16("dsecond")?;
    if dsecond_ms > 60_999 {
        return Err(DecodeError::FieldOutOfRange("dsecond"));
    }
    let lat_u = r.i32("lat")?;
    if !(-900_000_000..=900_000_000).contains(&lat_u) {
        return Err(DecodeError::FieldOutOfRange("lat"));
    }
    let lon_u = r.i32("lon")?;
    if !(-1_800_000_000..1_800_000_000).contains(&(lon_u as i64)) {
        return Err(DecodeError::FieldOutOfRange("lon"));
    }
    let elev_u = r.i16("elev")?;
    let acc_u = r.u8("positional_accuracy")?;
    let speed_u = r.u16("speed")?;
    if speed_u > 8_190 {
        return Err(DecodeError::FieldOutOfRange("speed"));
    }
    let heading_u = r.u16("heading")?;
    if heading_u as i64 >= HEADING_UNITS {
        return Err(DecodeError::FieldOutOfRange("heading"));
    }
    let a_lon = r.i16("accel_lon")?;
    let a_lat = r.i16("accel_lat")?;
    let a_vert = r.i16("accel_vert")?;
    for (name, v) in [("accel_lon", a_lon), ("accel_lat", a_lat), ("accel_vert", a_vert)] {
        if !(-2_000..=2_000).contains(&v) {
            return Err(DecodeError::FieldOutOfRange(name));
        }
    }
    let yaw = r.i16("yaw_rate")?;
    if !(-32_700..=32_700).contains(&yaw) {
        return Err(DecodeError::FieldOutOfRange("yaw_rate"));
    }
    Ok(CommonSafetyFields {
        msg_count,
        temp_id,
        dsecond_ms,
        position: GeodeticPosition {
            lat_deg: lat_u as f64 * STEP_LATLON,
            lon_deg: lon_u as f64 * STEP_LATLON,
            elev_m: elev_u as f64 * STEP_ELEV,
        },
        positional_accuracy_m: acc_u as f64 * STEP_ACCURACY,
        speed_mps: speed_u as f64 * STEP_SPEED,
        heading_deg: heading_u as f64 * STEP_HEADING,
        accel: AccelSet4Way {
            lon_mps2: a_lon as f64 * STEP_ACCEL,
            lat_mps2: a_lat as f64 * STEP_ACCEL,
            vert_mps2: a_vert as f64 * STEP_ACCEL,
            yaw_rate_dps: yaw as f64 * STEP_YAW,
        },
    })
}

pub fn encode_bsm(m: &Bsm) -> Result<Vec<u8>, EncodeError> {
    let mut w = Writer(Vec::with_capacity(BSM_WIRE_BYTES));
    w.u8(BSM_TAG);
    encode_common(&mut w, &m.common)?;
    w.u8(m.transmission_state as u8);
    w.i16(quantize("steering_angle", m.steering_angle_deg, STEP_STEERING, -1_260, 1_260)?);
    w.u8(m.brake.brake_applied as u8 | (m.brake.abs_active as u8) << 1);
    let len = quantize("vehicle_length", m.vehicle_length_m, STEP_SIZE, 0, 4_095)?;
    w.u16(len as u16);
    let width = quantize("vehicle_width", m.vehicle_width_m, STEP_SIZE, 0, 1_023)?;
    w.u16(width as u16);
    debug_assert_eq!(w.0.len(), BSM_WIRE_BYTES);
    Ok(w.0)
}

pub fn decode_bsm(bytes: &[u8]) -> Result<Bsm, DecodeError> {
    let mut r = Reader::new(bytes);
    let tag = r.u8("tag")?;
    if tag != BSM_TAG {
        return Err(DecodeError::UnknownTag(tag));
    }
    let m = decode_bsm_body(&mut r)?;
    r.finish()?;
    Ok(m)
}

fn decode_bsm_body(r: &mut Reader) -> Result<Bsm, DecodeError> {
    let common = decode_common(r)?;
    let transmission_state = match r.u8("transmission_state")? {
        0 => TransmissionState::Neutral,
        1 => TransmissionState::Park,
        2 => TransmissionState::ForwardGears,
        3 => TransmissionState::ReverseGears,
        _ => return Err(DecodeError::FieldOutOfRange("transmission_state")),
    };
    let steering = r.i16("steering_angle")?;
    if !(-1_260..=1_260).contains(&steering) {
        return Err(DecodeError::FieldOutOfRange("steering_angle"));
    }
    let brake_bits = r.u8("brake_status")?;
    if brake_bits & !0x03 != 0 {
        return Err(DecodeError::ReservedBits("brake_status"));
    }
    let len_u = r.u16("vehicle_length")?;
    if len_u > 4_095 {
        return Err(DecodeError::FieldOutOfRange("vehicle_length"));
    }
    let width_u = r.u16("vehicle_width")?;
    if width_u > 1_023 {
        return Err(DecodeError::FieldOutOfRange("vehicle_width"));
    }
    Ok(Bsm {
        common,
        transmission_state,
        steering_angle_deg: steering as f64 * STEP_STEERING,
        brake: BrakeStatus {
            brake_applied: brake_bits & 0x01 != 0,
            abs_active: brake_bits & 0x02 != 0,
        },
        vehicle_length_m: len_u as f64 * STEP_SIZE,
        vehicle_width_m: width_u as f64 * STEP_SIZE,
    })
}

pub fn encode_psm(m: &Psm) -> Result<Vec<u8>, EncodeError> {
    let mut w = Writer(Vec::with_capacity(64));
    w.u8(PSM_TAG);
    encode_common(&mut w, &m.common)?;
    w.u8(m.user_type as u8);
    if UsageState::from_bits(m.usage_state.bits()).is_none() {
        return Err(EncodeError::UnknownUsageBits(m.usage_state.bits()));
    }
    w.u16(m.usage_state.bits());
    w.u8(m.crossing_request as u8);
    if !(1..=100).contains(&m.cluster_size) {
        return Err(EncodeError::OutOfRange {
            field: "cluster_size",
            value: m.cluster_size as f64,
            min: 1.0,
            max: 100.0,
        });
    }
    w.u8(m.cluster_size);
    debug_assert_eq!(w.0.len(), PSM_FIXED_WIRE_BYTES);

    let mut presence = 0u8;
    if let Some(history) = &m.path_history {
        if history.len() > MAX_PATH_POINTS {
            return Err(EncodeError::TooManyPathPoints(history.len()));
        }
        presence |= 0x40 | history.len() as u8;
    }
    if m.path_prediction.is_some() {
        presence |= 0x80;
    }
    w.u8(presence);

    if let Some(history) = &m.path_history {
        let mut prev_units: i64 = -1;
        for p in history {
            w.i16(quantize("path_history.lat_offset", p.lat_offset_deg, STEP_LATLON, -32_768, 32_767)?);
            w.i16(quantize("path_history.lon_offset", p.lon_offset_deg, STEP_LATLON, -32_768, 32_767)?);
            if p.time_offset_ms % 100 != 0 || p.time_offset_ms > 25_500 {
                return Err(EncodeError::OutOfRange {
                    field: "path_history.time_offset",
                    value: p.time_offset_ms as f64,
                    min: 0.0,
                    max: 25_500.0,
                });
            }
            let units = (p.time_offset_ms / 100) as i64;
            // Oldest-first storage means offsets decrease along the list.
            if prev_units >= 0 && units >= prev_units {
                return Err(EncodeError::NonMonotonicHistory);
            }
            prev_units = units;
            w.u8(units as u8);
        }
    }
    if let Some(pred) = &m.path_prediction {
        w.i32(quantize("path_prediction.radius", pred.radius_m, STEP_RADIUS, -10_000_000, 10_000_000)?);
        let conf = quantize("path_prediction.confidence", pred.confidence, STEP_CONFIDENCE, 0, 200)?;
        w.u8(conf as u8);
    }
    Ok(w.0)
}

pub fn decode_psm(bytes: &[u8]) -> Result<Psm, DecodeError> {
    let mut r = Reader::new(bytes);
    let tag = r.u8("tag")?;
    if tag != PSM_TAG {
        return Err(DecodeError::UnknownTag(tag));
    }
    let m = decode_psm_body(&mut r)?;
    r.finish()?;
    Ok(m)
}

fn decode_psm_body(r: &mut Reader) -> Result<Psm, DecodeError> {
    let common = decode_common(r)?;
    let user_type = match r.u8("user_type")? {
        0 => PersonalUserType::Unavailable,
        1 => PersonalUserType::Pedestrian,
        2 => PersonalUserType::Pedalcyclist,
        3 => PersonalUserType::PublicSafetyWorker,
        4 => PersonalUserType::Animal,
        _ => return Err(DecodeError::FieldOutOfRange("user_type")),
    };
    let usage_state = UsageState::from_bits(r.u16("usage_state")?)
        .ok_or(DecodeError::ReservedBits("usage_state"))?;
    let crossing_request = match r.u8("crossing_request")? {
        0 => false,
        1 => true,
        _ => return Err(DecodeError::FieldOutOfRange("crossing_request")),
    };
    let cluster_size = r.u8("cluster_size")?;
    if !(1..=100).contains(&cluster_size) {
        return Err(DecodeError::FieldOutOfRange("cluster_size"));
    }
    let presence = r.u8("presence")?;
    if presence & 0x20 != 0 {
        return Err(DecodeError::ReservedBits("presence"));
    }
    let count = (presence & 0x1F) as usize;
    let has_history = presence & 0x40 != 0;
    if !has_history && count != 0 {
        return Err(DecodeError::ReservedBits("presence"));
    }
    if count > MAX_PATH_POINTS {
        return Err(DecodeError::FieldOutOfRange("path_history.count"));
    }
    let path_history = if has_history {
        let mut points = Vec::with_capacity(count);
        let mut prev_units: i64 = -1;
        for _ in 0..count {
            let lat_off = r.i16("path_history.lat_offset")?;
            let lon_off = r.i16("path_history.lon_offset")?;
            let t_units = r.u8("path_history.time_offset")? as i64;
            if prev_units >= 0 && t_units >= prev_units {
                return Err(DecodeError::NonMonotonicHistory);
            }
            prev_units = t_units;
            points.push(PathPoint {
                lat_offset_deg: lat_off as f64 * STEP_LATLON,
                lon_offset_deg: lon_off as f64 * STEP_LATLON,
                time_offset_ms: t_units as u32 * 100,
            });
        }
        Some(points)
    } else {
        None
    };
    let path_prediction = if presence & 0x80 != 0 {
        let radius_u = r.i32("path_prediction.radius")?;
        if !(-10_000_000..=10_000_000).contains(&radius_u) {
            return Err(DecodeError::FieldOutOfRange("path_prediction.radius"));
        }
        let conf_u = r.u8("path_prediction.confidence")?;
        if conf_u > 200 {
            return Err(DecodeError::FieldOutOfRange("path_prediction.confidence"));
        }
        Some(PathPrediction {
            radius_m: radius_u as f64 * STEP_RADIUS,
            confidence: conf_u as f64 * STEP_CONFIDENCE,
        })
    } else {
        None
    };
    Ok(Psm {
        common,
        user_type,
        usage_state,
        crossing_request,
        cluster_size,
        path_history,
        path_prediction,
    })
}

/// Decodes either message type from its tag.
pub fn decode_message(bytes: &[u8]) -> Result<Message, DecodeError> {
    let mut r = Reader::new(bytes);
    let tag = r.u8("tag")?;
    let msg = match tag {
        BSM_TAG => Message::Bsm(decode_bsm_body(&mut r)?),
        PSM_TAG => Message::Psm(decode_psm_body(&mut r)?),
        other => return Err(DecodeError::UnknownTag(other)),
    };
    r.finish()?;
    Ok(msg)
}

pub fn encode_message(msg: &Message) -> Result<Vec<u8>, EncodeError> {
    match msg {
        Message::Bsm(m) => encode_bsm(m),
        Message::Psm(m) => encode_psm(m),
    }
}

fn common_off_lattice(c: &CommonSafetyFields, out: &mut Vec<&'static str>) {
    let checks: [(&'static str, f64, f64); 9] = [
        ("lat", c.position.lat_deg, STEP_LATLON),
        ("lon", c.position.lon_deg, STEP_LATLON),
        ("elev", c.position.elev_m, STEP_ELEV),
        ("positional_accuracy", c.positional_accuracy_m, STEP_ACCURACY),
        ("speed", c.speed_mps, STEP_SPEED),
        ("heading", c.heading_deg, STEP_HEADING),
        ("accel_lon", c.accel.lon_mps2, STEP_ACCEL),
        ("accel_lat", c.accel.lat_mps2, STEP_ACCEL),
        ("accel_vert", c.accel.vert_mps2, STEP_ACCEL),
    ];
    for (name, value, step) in checks {
        if !on_lattice(value, step) {
            out.push(name);
        }
    }
    if !on_lattice(c.accel.yaw_rate_dps, STEP_YAW) {
        out.push("yaw_rate");
    }
}

/// Lists the fields whose values do not sit on their quantization lattice,
/// i.e. the fields the codec would round. Empty iff encoding is lossless.
pub fn quantize_check(msg: &Message) -> Vec<&'static str> {
    let mut out = Vec::new();
    match msg {
        Message::Bsm(m) => {
            common_off_lattice(&m.common, &mut out);
            if !on_lattice(m.steering_angle_deg, STEP_STEERING) {
                out.push("steering_angle");
            }
            if !on_lattice(m.vehicle_length_m, STEP_SIZE) {
                out.push("vehicle_length");
            }
            if !on_lattice(m.vehicle_width_m, STEP_SIZE) {
                out.push("vehicle_width");
            }
        }
        Message::Psm(m) => {
            common_off_lattice(&m.common, &mut out);
            if let Some(history) = &m.path_history {
                if history.iter().any(|p| {
                    !on_lattice(p.lat_offset_deg, STEP_LATLON)
                        || !on_lattice(p.lon_offset_deg, STEP_LATLON)
                        || p.time_offset_ms % 100 != 0
                }) {
                    out.push("path_history");
                }
            }
            if let Some(pred) = &m.path_prediction {
                if !on_lattice(pred.radius_m, STEP_RADIUS) {
                    out.push("path_prediction.radius");
                }
                if !on_lattice(pred.confidence, STEP_CONFIDENCE) {
                    out.push("path_prediction.confidence");
                }
            }
        }
    }
    out
}

/// Renders a decoded message as indented, human-readable text.
pub fn describe(msg: &Message) -> String {
    use std::fmt::Write;
    let mut s = String::new();
    let c = msg.common();
    let kind = match msg {
        Message::Bsm(_) => "BSM",
        Message::Psm(_) => "PSM",
    };
    writeln!(s, "{kind}").unwrap();
    writeln!(s, "  msg_count:      {}", c.msg_count).unwrap();
    writeln!(s, "  temp_id:        {}", c.temp_id).unwrap();
    writeln!(s, "  dsecond:        {} ms", c.dsecond_ms).unwrap();
    writeln!(
        s,
        "  position:       lat {:.7} deg, lon {:.7} deg, elev {:.1} m",
        c.position.lat_deg, c.position.lon_deg, c.position.elev_m
    )
    .unwrap();
    writeln!(s, "  accuracy:       {:.1} m (1-sigma)", c.positional_accuracy_m).unwrap();
    writeln!(s, "  speed:          {:.2} m/s", c.speed_mps).unwrap();
    writeln!(s, "  heading:        {:.4} deg", c.heading_deg).unwrap();
    writeln!(
        s,
        "  accel (l/t/v):  {:.2} / {:.2} / {:.2} m/s^2",
        c.accel.lon_mps2, c.accel.lat_mps2, c.accel.vert_mps2
    )
    .unwrap();
    writeln!(s, "  yaw rate:       {:.2} deg/s", c.accel.yaw_rate_dps).unwrap();
    match msg {
        Message::Bsm(m) => {
            writeln!(s, "  transmission:   {:?}", m.transmission_state).unwrap();
            writeln!(s, "  steering:       {:.1} deg", m.steering_angle_deg).unwrap();
            writeln!(
                s,
                "  brake:          applied={} abs={}",
                m.brake.brake_applied, m.brake.abs_active
            )
            .unwrap();
            writeln!(
                s,
                "  vehicle size:   {:.2} x {:.2} m",
                m.vehicle_length_m, m.vehicle_width_m
            )
            .unwrap();
        }
        Message::Psm(m) => {
            writeln!(s, "  user type:      {:?}", m.user_type).unwrap();
            writeln!(s, "  usage state:    {:#06x}", m.usage_state.bits()).unwrap();
            writeln!(s, "  crossing req:   {}", m.crossing_request).unwrap();
            writeln!(s, "  cluster size:   {}", m.cluster_size).unwrap();
            match &m.path_history {
                Some(h) => {
                    writeln!(s, "  path history:   {} points", h.len()).unwrap();
                    for p in h {
                        writeln!(
                            s,
                            "    -{} ms: dlat {:+.7} deg, dlon {:+.7} deg",
                            p.time_offset_ms, p.lat_offset_deg, p.lon_offset_deg
                        )
                        .unwrap();
                    }
                }
                None => writeln!(s, "  path history:   absent").unwrap(),
            }
            match &m.path_prediction {
                Some(p) => writeln!(
                    s,
                    "  prediction:     radius {:+.2} m, confidence {:.3}",
                    p.radius_m, p.confidence
                )
                .unwrap(),
                None => writeln!(s, "  prediction:     absent").unwrap(),
            }
        }
    }
    s
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use rand::Rng;

    pub fn lattice_common(rng: &mut impl Rng, msg_count: u8) -> CommonSafetyFields {
        CommonSafetyFields {
            msg_count,
            temp_id: TempId(rng.gen()),
            dsecond_ms: rng.gen_range(0..=60_999),
            position: GeodeticPosition {
                lat_deg: rng.gen_range(-900_000_000i64..=900_000_000) as f64 * STEP_LATLON,
                lon_deg: rng.gen_range(-1_800_000_000i64..1_800_000_000) as f64 * STEP_LATLON,
                elev_m: rng.gen_range(-32_768i64..=32_767) as f64 * STEP_ELEV,
            },
            positional_accuracy_m: rng.gen_range(0i64..=255) as f64 * STEP_ACCURACY,
            speed_mps: rng.gen_range(0i64..=8_190) as f64 * STEP_SPEED,
            heading_deg: rng.gen_range(0i64..28_800) as f64 * STEP_HEADING,
            accel: AccelSet4Way {
                lon_mps2: rng.gen_range(-2_000i64..=2_000) as f64 * STEP_ACCEL,
                lat_mps2: rng.gen_range(-2_000i64..=2_000) as f64 * STEP_ACCEL,
                vert_mps2: rng.gen_range(-2_000i64..=2_000) as f64 * STEP_ACCEL,
                yaw_rate_dps: rng.gen_range(-32_700i64..=32_700) as f64 * STEP_YAW,
            },
        }
    }

    pub fn lattice_bsm(rng: &mut impl Rng) -> Bsm {
        let count = rng.gen_range(0..=127);
        Bsm {
            common: lattice_common(rng, count),
            transmission_state: match rng.gen_range(0..4) {
                0 => TransmissionState::Neutral,
                1 => TransmissionState::Park,
                2 => TransmissionState::ForwardGears,
                _ => TransmissionState::ReverseGears,
            },
            steering_angle_deg: rng.gen_range(-1_260i64..=1_260) as f64 * STEP_STEERING,
            brake: BrakeStatus {
                brake_applied: rng.gen(),
                abs_active: rng.gen(),
            },
            vehicle_length_m: rng.gen_range(0i64..=4_095) as f64 * STEP_SIZE,
            vehicle_width_m: rng.gen_range(0i64..=1_023) as f64 * STEP_SIZE,
        }
    }

    pub fn lattice_psm(rng: &mut impl Rng) -> Psm {
        let history = if rng.gen_bool(0.5) {
            let n = rng.gen_range(0..=MAX_PATH_POINTS);
            // Offsets decrease into the list tail (oldest first).
            let mut t_units: Vec<u32> = (0..=255u32).collect();
            partial_shuffle(&mut t_units, rng);
            let mut chosen: Vec<u32> = t_units.into_iter().take(n).collect();
            chosen.sort_unstable_by(|a, b| b.cmp(a));
            Some(
                chosen
                    .into_iter()
                    .map(|u| PathPoint {
                        lat_offset_deg: rng.gen_range(-32_768i64..=32_767) as f64 * STEP_LATLON,
                        lon_offset_deg: rng.gen_range(-32_768i64..=32_767) as f64 * STEP_LATLON,
                        time_offset_ms: u * 100,
                    })
                    .collect(),
            )
        } else {
            None
        };
        let count = rng.gen_range(0..=127);
        Psm {
            common: lattice_common(rng, count),
            user_type: match rng.gen_range(0..5) {
                0 => PersonalUserType::Unavailable,
                1 => PersonalUserType::Pedestrian,
                2 => PersonalUserType::Pedalcyclist,
                3 => PersonalUserType::PublicSafetyWorker,
                _ => PersonalUserType::Animal,
            },
            usage_state: UsageState::from_bits(rng.gen_range(0..=0x1F)).unwrap(),
            crossing_request: rng.gen(),
            cluster_size: rng.gen_range(1..=100),
            path_history: history,
            path_prediction: rng.gen_bool(0.5).then(|| PathPrediction {
                radius_m: rng.gen_range(-10_000_000i64..=10_000_000) as f64 * STEP_RADIUS,
                confidence: rng.gen_range(0i64..=200) as f64 * STEP_CONFIDENCE,
            }),
        }
    }

    fn partial_shuffle(v: &mut [u32], rng: &mut impl Rng) {
        for i in (1..v.len()).rev() {
            let j = rng.gen_range(0..=i);
            v.swap(i, j);
        }
    }
}
