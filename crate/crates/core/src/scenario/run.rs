//! The deterministic simulation loop binding all modules.
//!
//! Tick order (every `tick_s`, default 100 ms):
//!
//! 1. drain the channel up to the tick instant and ingest deliveries,
//! 2. advance ground-truth motion and re-anchor every device's map,
//! 3. run the policy state machines on VRU devices,
//! 4. enqueue due messages onto the channel,
//! 5. drain a short contact window so frames sent this tick land,
//! 6. run discrimination/classification/collision detection everywhere,
//! 7. account energy and write trace rows.
//!
//! All randomness (MAC backoff, optional shadowing and GPS noise) comes from
//! seeded generators, so a run is a pure function of its config.

use super::build::{ActorKind, ScenarioConfig};
use super::motion::ActorState;
use super::output::{DtsRow, PolicyRow, RelPathRow, RunResult, RunSummary, TraceLog, WarningRow};
use super::ScenarioError;
use crate::awareness::{EntityKind, RealTimeMap};
use crate::channel::{Delivery, DsrcChannel, NodeHandle, NodeKind, RadioMode};
use crate::geo::enu_offset_to_geodetic;
use crate::messages::{
    decode_message, encode_bsm, encode_psm, AccelSet4Way, BrakeStatus, Bsm, CommonSafetyFields,
    PersonalUserType, Psm, TempId, TransmissionState, UsageState,
};
use crate::policy::{
    account_duty_listen, account_energy, apply_congestion_policy, apply_power_policy,
    evaluate_context, EnergyLedger, PolicyState, PowerDecision, QuietTracker, RadioPolicy,
    SensorSnapshot,
};
use crate::safety::{assess_target, detect_collision, discriminate_all, WarningLevel, WarningState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::collections::BTreeMap;

/// Sub-tick window drained right after transmissions are enqueued, so that
/// frames sent on a tick are evaluated on the same tick. Messages delayed
/// beyond it by contention arrive on the next tick.
const CONTACT_WINDOW_S: f64 = 0.005;

struct Device {
    actor: usize,
    kind: EntityKind,
    node: NodeHandle,
    temp_id: TempId,
    map: RealTimeMap,
    msg_count: u8,
    next_tx_s: f64,
    policy: PolicyState,
    quiet: QuietTracker,
    still_since: Option<f64>,
    warn: BTreeMap<TempId, WarningState>,
    ledger: EnergyLedger,
    braking: bool,
    tick_airtime_s: f64,
}

/// Runs one scenario to completion.
pub fn run(config: &ScenarioConfig) -> Result<RunResult, ScenarioError> {
    config.validate()?;
    let tick = config.tick_s;
    let n_ticks = (config.duration_s / tick).round() as usize;
    // The loop runs on the tick grid; snap the nominal duration onto it.
    let duration = n_ticks as f64 * tick;

    let mut channel = DsrcChannel::new(config.path_loss, config.seed);
    channel.set_duty_listen(2.0, 2.0 * config.energy.duty_listen_fraction);
    let mut noise_rng = ChaCha12Rng::seed_from_u64(config.seed ^ 0x6e6f_6973);
    let mut phase_rng = ChaCha12Rng::seed_from_u64(config.seed ^ 0x7068_6173);

    // Ground truth and devices.
    let mut actors: Vec<ActorState> = config.actors.iter().map(ActorState::new).collect();
    let mut devices: Vec<Device> = Vec::with_capacity(config.actors.len());
    for (i, a) in config.actors.iter().enumerate() {
        let kind = match a.kind {
            ActorKind::Vehicle => EntityKind::Vehicle,
            _ => EntityKind::Vru,
        };
        let node = channel.add_node(
            match kind {
                EntityKind::Vehicle => NodeKind::Vehicle,
                EntityKind::Vru => NodeKind::Vru,
            },
            match kind {
                EntityKind::Vehicle => config.vehicle_radio,
                EntityKind::Vru => config.phone_radio,
            },
            (a.start_east_m, a.start_north_m),
        );
        let geodetic = enu_offset_to_geodetic(a.start_east_m, a.start_north_m, &config.origin)?;
        let mut map = RealTimeMap::new(geodetic, a.heading_deg, actors[i].kinematics());
        if kind == EntityKind::Vehicle {
            map.road_half_width_m = Some(config.safety.lane_width_m / 2.0 + 1.5);
        }
        // Beacon phases are independent across devices, as they would be for
        // radios booted at different times; synchronized phases would collide
        // every frame. The ego pair gets early fixed phases so its first
        // exchange lands inside the first tick's contact window.
        let phase = if i == config.ego_vehicle {
            0.0
        } else if Some(i) == config.ego_vru {
            0.002
        } else {
            phase_rng.gen_range((2.0 * CONTACT_WINDOW_S)..tick)
        };
        devices.push(Device {
            actor: i,
            kind,
            node,
            temp_id: TempId::from_u32(i as u32 + 1),
            map,
            msg_count: 0,
            next_tx_s: phase,
            policy: PolicyState::always_on(config.fixed_rate_hz, config.phone_radio.tx_power_dbm),
            quiet: QuietTracker::default(),
            still_since: None,
            warn: BTreeMap::new(),
            ledger: EnergyLedger::default(),
            braking: false,
            tick_airtime_s: 0.0,
        });
    }
    let node_to_device: BTreeMap<usize, usize> =
        devices.iter().enumerate().map(|(d, dev)| (dev.node.0, d)).collect();

    let ego_vehicle_dev = config.ego_vehicle;
    let ego_vru_dev = config.ego_vru;
    let ego_vehicle_id = devices[ego_vehicle_dev].temp_id;
    let ego_vru_id = ego_vru_dev.map(|i| devices[i].temp_id);

    let mut trace = TraceLog::default();
    let mut summary = RunSummary {
        first_advisory: None,
        first_imminent: None,
        min_separation_m: f64::INFINITY,
        time_of_closest_approach_s: 0.0,
        vehicle_to_conflict_at_advisory_m: None,
    };

    for k in 0..=n_ticks {
        let t = k as f64 * tick;
        let last_tick = k == n_ticks;

        // 1. Drain the channel over the previous window and ingest.
        if k > 0 {
            let out = channel.advance_to(t);
            ingest_deliveries(&mut devices, &node_to_device, out.deliveries);
            for (node, airtime) in out.tx_airtime_s {
                devices[node_to_device[&node.0]].tick_airtime_s += airtime;
            }
        }

        // 2. Motion and map re-anchoring.
        if k > 0 {
            for (i, state) in actors.iter_mut().enumerate() {
                if devices[i].braking && state.accel_mps2 == 0.0 && state.speed_mps > 0.0 {
                    state.accel_mps2 = config.safety.d_mod_mps2;
                }
                let spec = config.actors[i].motion;
                state.step(&spec, tick);
            }
        }
        for dev in devices.iter_mut() {
            let s = &actors[dev.actor];
            channel.set_position(dev.node, (s.east_m, s.north_m));
            let geo = enu_offset_to_geodetic(s.east_m, s.north_m, &config.origin)?;
            dev.map.update_self(geo, s.heading_deg, s.kinematics());
        }

        // 3. Policies (VRU side). Vehicles beacon at the fixed rate.
        for dev in devices.iter_mut() {
            let (mode, new_policy) = {
                let s = &actors[dev.actor];
                if dev.kind == EntityKind::Vehicle {
                    let p = PolicyState::always_on(config.fixed_rate_hz, config.vehicle_radio.tx_power_dbm);
                    (RadioMode::TxRx, p)
                } else {
                    if s.speed_mps < 0.05 {
                        dev.still_since.get_or_insert(t);
                    } else {
                        dev.still_since = None;
                    }
                    let sensors = SensorSnapshot {
                        speed_mps: s.speed_mps,
                        gyro_quiet_for_s: dev.still_since.map_or(0.0, |since| t - since),
                        has_gps_signal: true,
                        in_building: false,
                        in_park_region: false,
                        is_high_risk_user: config.actors[dev.actor].is_high_risk_user,
                    };
                    if !config.power_control_on && !config.congestion_control_on {
                        (RadioMode::TxRx, PolicyState::always_on(config.fixed_rate_hz, config.phone_radio.tx_power_dbm))
                    } else {
                        let mut ctx = evaluate_context(&sensors, &dev.map, &config.policy, &config.safety);
                        ctx.no_vehicle_quiet_s = dev.quiet.update(ctx.no_nearby_vehicles, t);
                        let power = if config.power_control_on {
                            apply_power_policy(&ctx, &config.policy)
                        } else {
                            PowerDecision { gps_on: true, gps_duty: 1.0, radio_enabled: true }
                        };
                        let state = if config.congestion_control_on {
                            apply_congestion_policy(&ctx, &power, &config.policy)
                        } else if power.radio_enabled {
                            let mut p = PolicyState::always_on(config.fixed_rate_hz, config.phone_radio.tx_power_dbm);
                            p.gps_on = power.gps_on;
                            p.gps_duty = power.gps_duty;
                            p
                        } else {
                            PolicyState::off()
                        };
                        let mode = match state.radio_mode {
                            RadioPolicy::Off if config.power_control_on => RadioMode::DutyListen,
                            RadioPolicy::Off => RadioMode::Off,
                            RadioPolicy::ListenOnly => RadioMode::ListenOnly,
                            RadioPolicy::TxRx => RadioMode::TxRx,
                        };
                        (mode, state)
                    }
                }
            };
            if new_policy != dev.policy {
                trace.policy.push(PolicyRow {
                    time_s: t,
                    device: dev.temp_id,
                    from: dev.policy,
                    to: new_policy,
                });
                if new_policy.radio_mode == RadioPolicy::TxRx
                    && (dev.policy.radio_mode != RadioPolicy::TxRx
                        || new_policy.tx_rate_hz != dev.policy.tx_rate_hz)
                {
                    // Fresh random phase so devices switching on the same
                    // tick do not synchronize their beacons.
                    dev.next_tx_s = t + phase_rng.gen_range(0.0..(1.0 / new_policy.tx_rate_hz as f64));
                }
                dev.policy = new_policy;
            }
            channel.set_mode(dev.node, mode);
            channel.set_tx_power(dev.node, dev.policy.tx_power_dbm);
        }

        // 4-5. Transmissions (state sampled at the tick, sent at each
        // device's own beacon phase) and the contact window.
        if !last_tick {
            for dev in devices.iter_mut() {
                if dev.policy.radio_mode != RadioPolicy::TxRx || dev.policy.tx_rate_hz == 0 {
                    continue;
                }
                let period = 1.0 / dev.policy.tx_rate_hz as f64;
                while dev.next_tx_s < t + tick - 1e-9 {
                    let due = dev.next_tx_s.max(t);
                    let s = &actors[dev.actor];
                    let (payload, air) = build_message(config, dev, s, t, &mut noise_rng)?;
                    channel.enqueue_packet(dev.node, payload, air, due);
                    dev.msg_count = (dev.msg_count + 1) % 128;
                    // Application scheduling jitter: beacon phases drift
                    // instead of staying locked for the whole run.
                    let jitter = phase_rng.gen_range(-0.001..0.001);
                    dev.next_tx_s = due + period + jitter;
                }
            }
            let out = channel.advance_to(t + CONTACT_WINDOW_S);
            ingest_deliveries(&mut devices, &node_to_device, out.deliveries);
            for (node, airtime) in out.tx_airtime_s {
                devices[node_to_device[&node.0]].tick_airtime_s += airtime;
            }
        }

        // 6. Safety evaluation.
        for dev in devices.iter_mut() {
            let observer_is_vehicle = dev.kind == EntityKind::Vehicle;
            if observer_is_vehicle {
                discriminate_all(&mut dev.map, &config.discrimination, t);
            }
            let self_kin = actors[dev.actor].kinematics();
            let self_geo = *dev.map.self_position();

            let targets: Vec<TempId> = dev
                .map
                .records()
                .filter(|r| {
                    if observer_is_vehicle {
                        r.entity_kind == EntityKind::Vru
                    } else {
                        r.entity_kind == EntityKind::Vehicle
                    }
                })
                .map(|r| r.temp_id)
                .collect();

            for target_id in targets {
                let rec = dev.map.get(&target_id).unwrap().clone();
                let assessment = if observer_is_vehicle {
                    assess_target(
                        rec.position,
                        &rec.kin,
                        dev.map.self_heading_deg(),
                        &self_kin,
                        &config.safety,
                    )
                } else {
                    // Mirrored check: project *self* onto the vehicle's path
                    // in the vehicle's frame, using its broadcast kinematics.
                    let self_in_veh = match crate::geo::geodetic_to_local(
                        &self_geo,
                        &rec.geodetic,
                        rec.kin.heading_deg,
                    ) {
                        Ok(p) => p,
                        Err(_) => continue,
                    };
                    assess_target(self_in_veh, &self_kin, rec.kin.heading_deg, &rec.kin, &config.safety)
                };
                let Ok(assessment) = assessment else { continue };
                let prev = dev.warn.get(&target_id).copied().unwrap_or_default();
                let next = detect_collision(prev, &assessment.predicted, &assessment.zones);
                if next.level() != prev.level() {
                    trace.warnings.push(WarningRow {
                        time_s: t,
                        observer: dev.temp_id,
                        target: target_id,
                        level: next.level(),
                        d_lon_m: assessment.predicted.d_lon_m,
                        d_lat_m: assessment.predicted.d_lat_m,
                        dts_min_m: assessment.zones.dts_min_m,
                        dts_guard_m: assessment.zones.dts_guard_m,
                        dts_mod_m: assessment.zones.dts_mod_m,
                    });
                    if config.braking_response
                        && observer_is_vehicle
                        && next.level() >= WarningLevel::Advisory
                    {
                        dev.braking = true;
                    }
                    // Ego-pair warning onsets for the summary.
                    if dev.temp_id == ego_vehicle_id && Some(target_id) == ego_vru_id {
                        let d = assessment.predicted.d_lon_m;
                        if next.level() >= WarningLevel::Advisory && summary.first_advisory.is_none()
                        {
                            summary.first_advisory = Some((t, d));
                            if let Some((cx, cy)) = config.conflict_point {
                                let s = &actors[dev.actor];
                                summary.vehicle_to_conflict_at_advisory_m =
                                    Some((s.east_m - cx).hypot(s.north_m - cy));
                            }
                        }
                        if next.level() >= WarningLevel::Imminent && summary.first_imminent.is_none()
                        {
                            summary.first_imminent = Some((t, d));
                        }
                    }
                }
                dev.warn.insert(target_id, next);

                // Ego trace rows.
                if dev.temp_id == ego_vehicle_id && Some(target_id) == ego_vru_id {
                    trace.relpath_vehicle.push(RelPathRow {
                        time_s: t,
                        x_m: rec.position.x_m,
                        y_m: rec.position.y_m,
                        zone: assessment.label,
                    });
                    trace.dts.push(DtsRow {
                        time_s: t,
                        d_lon_m: assessment.predicted.d_lon_m,
                        dts_min_m: assessment.zones.dts_min_m,
                        dts_guard_m: assessment.zones.dts_guard_m,
                        dts_mod_m: assessment.zones.dts_mod_m,
                    });
                } else if Some(dev.temp_id) == ego_vru_id && target_id == ego_vehicle_id {
                    trace.relpath_phone.push(RelPathRow {
                        time_s: t,
                        x_m: rec.position.x_m,
                        y_m: rec.position.y_m,
                        zone: assessment.label,
                    });
                }
            }
            dev.map.expire_records(t);
        }

        // 7. Energy and separation tracking.
        for dev in devices.iter_mut() {
            if dev.kind != EntityKind::Vru {
                dev.tick_airtime_s = 0.0;
                continue;
            }
            let airtime = std::mem::take(&mut dev.tick_airtime_s);
            account_energy(&mut dev.ledger, &dev.policy, tick, airtime, &config.energy);
            if config.power_control_on && dev.policy.radio_mode == RadioPolicy::Off {
                account_duty_listen(&mut dev.ledger, tick, &config.energy);
            }
        }
        if let Some(vru) = ego_vru_dev {
            let v = &actors[devices[ego_vehicle_dev].actor];
            let p = &actors[devices[vru].actor];
            let sep = (v.east_m - p.east_m).hypot(v.north_m - p.north_m);
            if sep < summary.min_separation_m {
                summary.min_separation_m = sep;
                summary.time_of_closest_approach_s = t;
            }
        }
    }

    let metrics = channel.finish(duration);
    let energy = devices
        .iter()
        .filter(|d| d.kind == EntityKind::Vru)
        .map(|d| (d.temp_id, d.ledger))
        .collect();
    let node_ids = devices.iter().map(|d| d.temp_id).collect();
    Ok(RunResult {
        duration_s: duration,
        tick_s: tick,
        summary,
        trace,
        metrics,
        energy,
        node_ids,
    })
}

fn ingest_deliveries(
    devices: &mut [Device],
    node_to_device: &BTreeMap<usize, usize>,
    deliveries: Vec<Delivery>,
) {
    for d in deliveries {
        let Some(&di) = node_to_device.get(&d.receiver.0) else { continue };
        if let Ok(msg) = decode_message(&d.payload) {
            devices[di].map.ingest_message(&msg, d.time_s);
        }
    }
}

fn build_message(
    config: &ScenarioConfig,
    dev: &Device,
    s: &ActorState,
    t: f64,
    noise_rng: &mut ChaCha12Rng,
) -> Result<(Vec<u8>, usize), ScenarioError> {
    let (mut east, mut north) = (s.east_m, s.north_m);
    if let Some(sigma) = config.position_noise_sigma_m {
        east += sigma * gaussian(noise_rng);
        north += sigma * gaussian(noise_rng);
    }
    let position = enu_offset_to_geodetic(east, north, &config.origin)?;
    let common = CommonSafetyFields {
        msg_count: dev.msg_count,
        temp_id: dev.temp_id,
        dsecond_ms: ((t * 1000.0).round() as u64 % 60_000) as u16,
        position,
        positional_accuracy_m: 1.0,
        speed_mps: s.speed_mps,
        heading_deg: s.heading_deg.rem_euclid(360.0),
        accel: AccelSet4Way {
            lon_mps2: s.accel_mps2,
            lat_mps2: 0.0,
            vert_mps2: 0.0,
            yaw_rate_dps: s.yaw_rate_rps.to_degrees(),
        },
    };
    match dev.kind {
        EntityKind::Vehicle => {
            let bsm = Bsm {
                common,
                transmission_state: TransmissionState::ForwardGears,
                steering_angle_deg: 0.0,
                brake: BrakeStatus { brake_applied: dev.braking, abs_active: false },
                vehicle_length_m: 4.5,
                vehicle_width_m: 1.8,
            };
            Ok((encode_bsm(&bsm)?, config.bsm_air_bytes))
        }
        EntityKind::Vru => {
            let user_type = if config.psm_user_type_available {
                match config.actors[dev.actor].kind {
                    ActorKind::Pedestrian => PersonalUserType::Pedestrian,
                    ActorKind::Cyclist => PersonalUserType::Pedalcyclist,
                    ActorKind::Vehicle => PersonalUserType::Unavailable,
                }
            } else {
                PersonalUserType::Unavailable
            };
            let psm = Psm {
                common,
                user_type,
                usage_state: UsageState::empty(),
                crossing_request: false,
                cluster_size: 1,
                path_history: None,
                path_prediction: None,
            };
            Ok((encode_psm(&psm)?, config.psm_air_bytes))
        }
    }
}

fn gaussian(rng: &mut ChaCha12Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}
