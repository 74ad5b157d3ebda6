//! Smartphone-side congestion control and power consumption control.
//!
//! The power policy decides when the GPS receiver and DSRC radio can be shut
//! down from context alone (indoor, riding in a vehicle, nobody around); the
//! congestion policy decides, for a radio that stays on, between listen-only
//! and periodic transmission, and scales rate and power with the user's speed
//! and the surrounding density. A small ledger integrates the duty cycles
//! into per-component energy.

use crate::awareness::{predict_point, EntityKind, RealTimeMap};
use crate::safety::{compute_zone_set, SafetyParams};
use serde::{Deserialize, Serialize};

/// Raw context signals a phone can read without the radio.
#[derive(Debug, Clone, Copy, Default)]
pub struct SensorSnapshot {
    pub speed_mps: f64,
    /// How long the gyro has been quiet, seconds.
    pub gyro_quiet_for_s: f64,
    pub has_gps_signal: bool,
    pub in_building: bool,
    pub in_park_region: bool,
    pub is_high_risk_user: bool,
}

/// Distilled device context driving both policies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceContext {
    pub stationary: bool,
    pub indoor: bool,
    pub in_vehicle: bool,
    pub no_nearby_vehicles: bool,
    pub in_park_region: bool,
    /// How long `no_nearby_vehicles` has held continuously, seconds.
    pub no_vehicle_quiet_s: f64,
    pub own_speed_mps: f64,
    pub nearby_vehicle_count: usize,
    pub nearby_vru_count: usize,
    /// Distance of the closest vehicle predicted to come closer, if any.
    pub nearest_approaching_vehicle_m: Option<f64>,
    /// True when some vehicle's advisory zone already reaches this device.
    pub vehicle_within_dts_mod: bool,
    pub is_high_risk_user: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RadioPolicy {
    Off,
    ListenOnly,
    TxRx,
}

/// The combined policy outcome for one device tick.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyState {
    pub gps_on: bool,
    /// Fraction of time the GPS is actually powered (1.0 = continuous fixes).
    pub gps_duty: f64,
    pub radio_mode: RadioPolicy,
    /// 0 unless `radio_mode` is `TxRx`.
    pub tx_rate_hz: u32,
    pub tx_power_dbm: f64,
}

impl PolicyState {
    /// Everything on, full rate: the no-policy baseline.
    pub fn always_on(rate_hz: u32, power_dbm: f64) -> Self {
        PolicyState {
            gps_on: true,
            gps_duty: 1.0,
            radio_mode: RadioPolicy::TxRx,
            tx_rate_hz: rate_hz,
            tx_power_dbm: power_dbm,
        }
    }

    pub fn off() -> Self {
        PolicyState {
            gps_on: false,
            gps_duty: 0.0,
            radio_mode: RadioPolicy::Off,
            tx_rate_hz: 0,
            tx_power_dbm: 0.0,
        }
    }
}

/// Thresholds for both policies. Every number here is an operating point, not
/// a law of nature; the scenario layer can sweep them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    /// Gyro-quiet time before the device counts as stationary, seconds.
    pub stationary_min_s: f64,
    /// Radius for the "no nearby vehicles" flag, meters.
    pub nearby_vehicle_radius_m: f64,
    /// Sustained vehicle absence that turns the radio off, seconds.
    pub quiet_off_after_s: Option<f64>,
    /// Radius within which an approaching vehicle forces transmission, meters.
    pub approach_radius_m: f64,
    /// Prediction horizon used to call a vehicle "approaching", seconds.
    pub approach_horizon_s: f64,
    /// Speed cuts of the rate table: below the first → slow rate, between →
    /// mid rate, above the second → fast rate.
    pub speed_cut_low_mps: f64,
    pub speed_cut_high_mps: f64,
    pub rate_slow_hz: u32,
    pub rate_mid_hz: u32,
    pub rate_fast_hz: u32,
    /// Crowding trigger for power reduction: more VRUs than this...
    pub dense_vru_threshold: usize,
    /// ...and fewer vehicles than this.
    pub sparse_vehicle_threshold: usize,
    pub base_power_dbm: f64,
    pub reduced_power_dbm: f64,
    /// GPS duty while stationary outdoors with traffic around (1 Hz fixes).
    pub stationary_gps_duty: f64,
    /// Speed gate for the in-vehicle heuristic, m/s.
    pub covehicle_speed_min_mps: f64,
    /// Speed agreement for the in-vehicle heuristic, m/s.
    pub covehicle_speed_tolerance_mps: f64,
    /// Proximity for the in-vehicle heuristic, meters.
    pub covehicle_radius_m: f64,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig {
            stationary_min_s: 5.0,
            nearby_vehicle_radius_m: 500.0,
            quiet_off_after_s: Some(2.0),
            approach_radius_m: 500.0,
            approach_horizon_s: 5.0,
            speed_cut_low_mps: 3.0,
            speed_cut_high_mps: 9.0,
            rate_slow_hz: 2,
            rate_mid_hz: 5,
            rate_fast_hz: 10,
            dense_vru_threshold: 50,
            sparse_vehicle_threshold: 3,
            base_power_dbm: 10.0,
            reduced_power_dbm: 5.0,
            stationary_gps_duty: 0.2,
            covehicle_speed_min_mps: 3.0,
            covehicle_speed_tolerance_mps: 2.0,
            covehicle_radius_m: 3.0,
        }
    }
}

/// Tracks how long the no-nearby-vehicles condition has held.
#[derive(Debug, Clone, Copy, Default)]
pub struct QuietTracker {
    since_s: Option<f64>,
}

impl QuietTracker {
    pub fn update(&mut self, no_nearby: bool, now_s: f64) -> f64 {
        if !no_nearby {
            self.since_s = None;
            return 0.0;
        }
        let since = *self.since_s.get_or_insert(now_s);
        now_s - since
    }
}

/// Distills sensors plus the real-time map into a [`DeviceContext`].
pub fn evaluate_context(
    sensors: &SensorSnapshot,
    map: &RealTimeMap,
    cfg: &PolicyConfig,
    safety: &SafetyParams,
) -> DeviceContext {
    let stationary = sensors.gyro_quiet_for_s >= cfg.stationary_min_s;
    let indoor = !sensors.has_gps_signal || sensors.in_building;

    let mut nearby_vehicle_count = 0;
    let mut nearby_vru_count = 0;
    let mut in_vehicle = false;
    let mut nearest_approaching: Option<f64> = None;
    let mut vehicle_within_dts_mod = false;
    let self_point = crate::geo::LocalFramePoint::new(0.0, 0.0);

    for rec in map.records() {
        let dist = rec.position.norm();
        match rec.entity_kind {
            EntityKind::Vehicle => {
                if dist <= cfg.nearby_vehicle_radius_m {
                    nearby_vehicle_count += 1;
                }
                if dist <= cfg.covehicle_radius_m
                    && sensors.speed_mps > cfg.covehicle_speed_min_mps
                    && (sensors.speed_mps - rec.kin.speed_mps).abs()
                        <= cfg.covehicle_speed_tolerance_mps
                {
                    in_vehicle = true;
                }
                if dist <= cfg.approach_radius_m {
                    let future = predict_point(
                        rec.position,
                        &rec.kin,
                        map.self_heading_deg(),
                        cfg.approach_horizon_s,
                    );
                    if future.distance(&self_point) < dist {
                        nearest_approaching = Some(match nearest_approaching {
                            Some(d) => d.min(dist),
                            None => dist,
                        });
                    }
                }
                let zones = compute_zone_set(&rec.kin, safety);
                if dist <= zones.dts_mod_m {
                    vehicle_within_dts_mod = true;
                }
            }
            EntityKind::Vru => {
                if dist <= cfg.nearby_vehicle_radius_m {
                    nearby_vru_count += 1;
                }
            }
        }
    }

    DeviceContext {
        stationary,
        indoor,
        in_vehicle,
        no_nearby_vehicles: nearby_vehicle_count == 0,
        in_park_region: sensors.in_park_region,
        no_vehicle_quiet_s: 0.0,
        own_speed_mps: sensors.speed_mps,
        nearby_vehicle_count,
        nearby_vru_count,
        nearest_approaching_vehicle_m: nearest_approaching,
        vehicle_within_dts_mod,
        is_high_risk_user: sensors.is_high_risk_user,
    }
}

/// GPS/radio gate decided by the power consumption policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerDecision {
    pub gps_on: bool,
    pub gps_duty: f64,
    pub radio_enabled: bool,
}

/// Decides whether GPS and radio may shut down for this context.
///
/// The off conditions: indoor, riding inside a vehicle, a no-traffic region
/// (park with nobody around), or sustained absence of any vehicle record.
/// A device that is merely stationary outdoors with traffic around keeps a
/// duty-cycled GPS rather than going dark.
pub fn apply_power_policy(ctx: &DeviceContext, cfg: &PolicyConfig) -> PowerDecision {
    let quiet_off = cfg
        .quiet_off_after_s
        .is_some_and(|q| ctx.no_nearby_vehicles && ctx.no_vehicle_quiet_s >= q);
    let off = ctx.indoor
        || ctx.in_vehicle
        || (ctx.no_nearby_vehicles && ctx.in_park_region)
        || quiet_off;
    if off {
        return PowerDecision { gps_on: false, gps_duty: 0.0, radio_enabled: false };
    }
    if ctx.stationary {
        return PowerDecision { gps_on: true, gps_duty: cfg.stationary_gps_duty, radio_enabled: true };
    }
    PowerDecision { gps_on: true, gps_duty: 1.0, radio_enabled: true }
}

/// Decides listen-only versus periodic transmission, rate, and power.
///
/// Without an approaching vehicle the device only listens. Faster users
/// transmit more often; a crowd of VRUs with almost no vehicles around drops
/// the transmit power; public-safety users always run at full rate and power.
pub fn apply_congestion_policy(
    ctx: &DeviceContext,
    power: &PowerDecision,
    cfg: &PolicyConfig,
) -> PolicyState {
    if !power.radio_enabled {
        return PolicyState::off();
    }
    if ctx.is_high_risk_user {
        return PolicyState {
            gps_on: power.gps_on,
            gps_duty: power.gps_duty,
            radio_mode: RadioPolicy::TxRx,
            tx_rate_hz: cfg.rate_fast_hz,
            tx_power_dbm: cfg.base_power_dbm,
        };
    }
    // Safety floor: once any vehicle's advisory zone reaches the device it
    // must talk, whatever the density rules say.
    let must_tx = ctx.nearest_approaching_vehicle_m.is_some() || ctx.vehicle_within_dts_mod;
    if !must_tx {
        return PolicyState {
            gps_on: power.gps_on,
            gps_duty: power.gps_duty,
            radio_mode: RadioPolicy::ListenOnly,
            tx_rate_hz: 0,
            tx_power_dbm: cfg.base_power_dbm,
        };
    }
    let tx_rate_hz = if ctx.own_speed_mps < cfg.speed_cut_low_mps {
        cfg.rate_slow_hz
    } else if ctx.own_speed_mps <= cfg.speed_cut_high_mps {
        cfg.rate_mid_hz
    } else {
        cfg.rate_fast_hz
    };
    let dense_crowd = ctx.nearby_vru_count > cfg.dense_vru_threshold
        && ctx.nearby_vehicle_count < cfg.sparse_vehicle_threshold;
    PolicyState {
        gps_on: power.gps_on,
        gps_duty: power.gps_duty,
        radio_mode: RadioPolicy::TxRx,
        tx_rate_hz,
        tx_power_dbm: if dense_crowd { cfg.reduced_power_dbm } else { cfg.base_power_dbm },
    }
}

/// Component power draws for the energy ledger.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyModel {
    pub gps_mw: f64,
    pub rx_mw: f64,
    pub tx_mw: f64,
    /// Listen fraction of a radio parked in the duty-listen state.
    pub duty_listen_fraction: f64,
}

impl Default for EnergyModel {
    fn default() -> Self {
        EnergyModel { gps_mw: 50.0, rx_mw: 80.0, tx_mw: 200.0, duty_listen_fraction: 0.1 }
    }
}

/// Accumulated per-component energy, milliwatt-hours.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyLedger {
    pub gps_mwh: f64,
    pub radio_rx_mwh: f64,
    pub radio_tx_mwh: f64,
}

impl EnergyLedger {
    pub fn total_mwh(&self) -> f64 {
        self.gps_mwh + self.radio_rx_mwh + self.radio_tx_mwh
    }

    pub fn component_wise_leq(&self, other: &EnergyLedger, tol: f64) -> bool {
        self.gps_mwh <= other.gps_mwh + tol
            && self.radio_rx_mwh <= other.radio_rx_mwh + tol
            && self.radio_tx_mwh <= other.radio_tx_mwh + tol
    }
}

const MWS_PER_MWH: f64 = 3600.0;

/// Integrates one interval of `dt_s` seconds under `state` into the ledger.
/// `tx_airtime_s` is the transmit airtime actually spent in the interval.
pub fn account_energy(
    ledger: &mut EnergyLedger,
    state: &PolicyState,
    dt_s: f64,
    tx_airtime_s: f64,
    model: &EnergyModel,
) {
    debug_assert!(dt_s >= 0.0 && tx_airtime_s >= 0.0);
    if state.gps_on {
        ledger.gps_mwh += model.gps_mw * dt_s * state.gps_duty / MWS_PER_MWH;
    }
    match state.radio_mode {
        RadioPolicy::ListenOnly | RadioPolicy::TxRx => {
            ledger.radio_rx_mwh += model.rx_mw * dt_s / MWS_PER_MWH;
        }
        RadioPolicy::Off => {}
    }
    ledger.radio_tx_mwh += model.tx_mw * tx_airtime_s / MWS_PER_MWH;
}

/// Extra listen energy for a radio parked in the duty-listen state.
pub fn account_duty_listen(ledger: &mut EnergyLedger, dt_s: f64, model: &EnergyModel) {
    ledger.radio_rx_mwh += model.rx_mw * model.duty_listen_fraction * dt_s / MWS_PER_MWH;
}
