//! Run results, trace rows, and CSV emission.
//!
//! Output files are byte-deterministic: identical runs produce identical
//! bytes, which is what the A/B comparisons and the replay guarantee lean on.

use super::ScenarioError;
use crate::channel::ChannelMetrics;
use crate::messages::TempId;
use crate::policy::{EnergyLedger, PolicyState};
use crate::safety::{WarningLevel, ZoneLabel};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

/// One ego relative-position sample (a target as seen by an observer).
#[derive(Debug, Clone, Copy)]
pub struct RelPathRow {
    pub time_s: f64,
    pub x_m: f64,
    pub y_m: f64,
    pub zone: ZoneLabel,
}

/// One ego zone trace sample.
#[derive(Debug, Clone, Copy)]
pub struct DtsRow {
    pub time_s: f64,
    pub d_lon_m: f64,
    pub dts_min_m: f64,
    pub dts_guard_m: f64,
    pub dts_mod_m: f64,
}

/// A warning-level transition.
#[derive(Debug, Clone, Copy)]
pub struct WarningRow {
    pub time_s: f64,
    pub observer: TempId,
    pub target: TempId,
    pub level: WarningLevel,
    pub d_lon_m: f64,
    pub d_lat_m: f64,
    pub dts_min_m: f64,
    pub dts_guard_m: f64,
    pub dts_mod_m: f64,
}

/// A policy-state transition.
#[derive(Debug, Clone, Copy)]
pub struct PolicyRow {
    pub time_s: f64,
    pub device: TempId,
    pub from: PolicyState,
    pub to: PolicyState,
}

/// Everything a run logs, replayable into identical CSV bytes.
#[derive(Debug, Default)]
pub struct TraceLog {
    pub relpath_vehicle: Vec<RelPathRow>,
    pub relpath_phone: Vec<RelPathRow>,
    pub dts: Vec<DtsRow>,
    pub warnings: Vec<WarningRow>,
    pub policy: Vec<PolicyRow>,
}

#[derive(Debug, Clone, Copy)]
pub struct RunSummary {
    /// Time and along-path distance of the first ego advisory.
    pub first_advisory: Option<(f64, f64)>,
    pub first_imminent: Option<(f64, f64)>,
    pub min_separation_m: f64,
    pub time_of_closest_approach_s: f64,
    /// Ground-truth vehicle distance to the designed conflict point when the
    /// advisory fired.
    pub vehicle_to_conflict_at_advisory_m: Option<f64>,
}

#[derive(Debug)]
pub struct RunResult {
    pub duration_s: f64,
    pub tick_s: f64,
    pub summary: RunSummary,
    pub trace: TraceLog,
    pub metrics: ChannelMetrics,
    /// Per-VRU-device energy ledgers.
    pub energy: Vec<(TempId, EnergyLedger)>,
    /// Device id per channel node index, for labeling CBP rows.
    pub node_ids: Vec<TempId>,
}

fn relpath_csv(rows: &[RelPathRow]) -> String {
    let mut s = String::from("time_s,x_m,y_m,zone\n");
    for r in rows {
        writeln!(s, "{:.1},{:.3},{:.3},{}", r.time_s, r.x_m, r.y_m, r.zone.as_str()).unwrap();
    }
    s
}

fn dts_csv(rows: &[DtsRow]) -> String {
    let mut s = String::from("time_s,d_lon_m,dts_min_m,dts_guard_m,dts_mod_m\n");
    for r in rows {
        writeln!(
            s,
            "{:.1},{:.3},{:.3},{:.3},{:.3}",
            r.time_s, r.d_lon_m, r.dts_min_m, r.dts_guard_m, r.dts_mod_m
        )
        .unwrap();
    }
    s
}

fn warnings_csv(rows: &[WarningRow]) -> String {
    let mut s =
        String::from("time_s,observer,target,level,d_lon_m,d_lat_m,dts_min_m,dts_guard_m,dts_mod_m\n");
    for r in rows {
        writeln!(
            s,
            "{:.1},{},{},{},{:.3},{:.3},{:.3},{:.3},{:.3}",
            r.time_s,
            r.observer,
            r.target,
            r.level.as_str(),
            r.d_lon_m,
            r.d_lat_m,
            r.dts_min_m,
            r.dts_guard_m,
            r.dts_mod_m
        )
        .unwrap();
    }
    s
}

fn policy_csv(rows: &[PolicyRow]) -> String {
    let mut s = String::from(
        "time_s,device,gps_on,gps_duty,radio_mode,tx_rate_hz,tx_power_dbm\n",
    );
    for r in rows {
        writeln!(
            s,
            "{:.1},{},{},{:.2},{:?},{},{:.1}",
            r.time_s,
            r.device,
            r.to.gps_on,
            r.to.gps_duty,
            r.to.radio_mode,
            r.to.tx_rate_hz,
            r.to.tx_power_dbm
        )
        .unwrap();
    }
    s
}

fn per_csv(metrics: &ChannelMetrics) -> String {
    let mut s = String::from("bin_low_m,attempted,failed,per\n");
    for (bin, b) in &metrics.per_bins {
        writeln!(s, "{},{},{},{:.6}", bin, b.attempted, b.failed, b.ratio()).unwrap();
    }
    s
}

fn cbp_csv(metrics: &ChannelMetrics, node_ids: &[TempId]) -> String {
    let mut s = String::from("time_s,device_id,cbp\n");
    for (&(w, node), &v) in &metrics.cbp {
        let id = node_ids
            .get(node as usize)
            .map(|id| id.to_string())
            .unwrap_or_else(|| format!("node{node}"));
        writeln!(s, "{},{},{:.6}", w, id, v).unwrap();
    }
    s
}

fn energy_csv(energy: &[(TempId, EnergyLedger)]) -> String {
    let mut s = String::from("device,gps_mwh,rx_mwh,tx_mwh,total_mwh\n");
    for (id, l) in energy {
        writeln!(
            s,
            "{},{:.6},{:.6},{:.6},{:.6}",
            id,
            l.gps_mwh,
            l.radio_rx_mwh,
            l.radio_tx_mwh,
            l.total_mwh()
        )
        .unwrap();
    }
    s
}

fn summary_text(r: &RunResult) -> String {
    let mut s = String::new();
    writeln!(s, "duration_s={:.1}", r.duration_s).unwrap();
    match r.summary.first_advisory {
        Some((t, d)) => writeln!(s, "first_advisory: t={t:.1} s, d_lon={d:.2} m").unwrap(),
        None => writeln!(s, "first_advisory: never").unwrap(),
    }
    match r.summary.first_imminent {
        Some((t, d)) => writeln!(s, "first_imminent: t={t:.1} s, d_lon={d:.2} m").unwrap(),
        None => writeln!(s, "first_imminent: never").unwrap(),
    }
    if let Some(d) = r.summary.vehicle_to_conflict_at_advisory_m {
        writeln!(s, "vehicle_to_conflict_at_advisory: {d:.2} m").unwrap();
    }
    if r.summary.min_separation_m.is_finite() {
        writeln!(
            s,
            "min_separation: {:.2} m at t={:.1} s",
            r.summary.min_separation_m, r.summary.time_of_closest_approach_s
        )
        .unwrap();
    }
    writeln!(
        s,
        "drops: below_sensitivity={} collision={} busy_expired={}",
        r.metrics.drops.below_sensitivity, r.metrics.drops.collision, r.metrics.drops.busy_expired
    )
    .unwrap();
    s
}

/// Writes the full output set into `out_dir` (created if needed).
pub fn emit_outputs(result: &RunResult, out_dir: &Path) -> Result<(), ScenarioError> {
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("relpath_vehicle.csv"), relpath_csv(&result.trace.relpath_vehicle))?;
    fs::write(out_dir.join("relpath_phone.csv"), relpath_csv(&result.trace.relpath_phone))?;
    fs::write(out_dir.join("dts_trace.csv"), dts_csv(&result.trace.dts))?;
    fs::write(out_dir.join("warnings.csv"), warnings_csv(&result.trace.warnings))?;
    fs::write(out_dir.join("policy.csv"), policy_csv(&result.trace.policy))?;
    fs::write(out_dir.join("per.csv"), per_csv(&result.metrics))?;
    fs::write(out_dir.join("cbp.csv"), cbp_csv(&result.metrics, &result.node_ids))?;
    fs::write(out_dir.join("energy.csv"), energy_csv(&result.energy))?;
    fs::write(out_dir.join("summary.txt"), summary_text(result))?;
    Ok(())
}
