//! Discrete-event DSRC channel and MAC model.
//!
//! Propagation is log-distance path loss; access is EDCA-style contention for
//! broadcast frames (AIFS wait, uniform backoff counted down over idle slots,
//! no acknowledgments, no retransmissions); reception requires the SINR to
//! clear a threshold for the whole frame. The engine runs on an integer
//! microsecond clock and is fully deterministic for a fixed seed.

mod metrics;
mod sim;

pub use metrics::{ChannelMetrics, DropCounters, PerBin};
pub use sim::{Delivery, DsrcChannel, NodeHandle, NodeKind, RadioMode, TickOutput};

use serde::{Deserialize, Serialize};

/// Width of a PER distance bin, meters.
pub const PER_BIN_M: f64 = 10.0;
/// Width of a CBP accounting window, seconds.
pub const CBP_WINDOW_S: f64 = 1.0;

/// Per-node radio and MAC parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioConfig {
    pub tx_power_dbm: f64,
    pub bitrate_bps: u64,
    /// Channel bandwidth, informational (the noise floor already assumes it).
    pub bandwidth_mhz: f64,
    pub aifsn: u32,
    /// Contention window: backoff is drawn uniformly from `[0, cw]` slots.
    pub cw: u32,
    pub slot_time_us: u64,
    pub sifs_us: u64,
    /// Carrier-sense threshold: the channel is busy above this level.
    pub cca_threshold_dbm: f64,
    pub rx_sensitivity_dbm: f64,
    pub sinr_threshold_db: f64,
    pub preamble_us: u64,
    pub noise_floor_dbm: f64,
}

impl RadioConfig {
    /// Vehicle-side defaults (20 dBm).
    pub fn vehicle() -> Self {
        RadioConfig { tx_power_dbm: 20.0, ..Self::phone() }
    }

    /// Smartphone defaults (10 dBm).
    pub fn phone() -> Self {
        RadioConfig {
            tx_power_dbm: 10.0,
            bitrate_bps: 6_000_000,
            bandwidth_mhz: 10.0,
            aifsn: 7,
            cw: 15,
            slot_time_us: 13,
            sifs_us: 32,
            cca_threshold_dbm: -94.0,
            rx_sensitivity_dbm: -92.0,
            sinr_threshold_db: 10.0,
            preamble_us: 40,
            noise_floor_dbm: -99.0,
        }
    }

    pub fn aifs_us(&self) -> u64 {
        self.sifs_us + self.aifsn as u64 * self.slot_time_us
    }

    /// On-air time of a frame of `air_bytes`, microseconds, rounded up.
    pub fn frame_duration_us(&self, air_bytes: usize) -> u64 {
        let bits = air_bytes as u64 * 8;
        self.preamble_us + (bits * 1_000_000).div_ceil(self.bitrate_bps)
    }
}

/// Log-distance propagation model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLossConfig {
    /// Loss at the reference distance, dB.
    pub ref_loss_db: f64,
    /// Path-loss exponent.
    pub exponent: f64,
    /// Reference distance, meters.
    pub ref_distance_m: f64,
    /// Optional log-normal shadowing sigma, dB; `None` keeps the channel
    /// deterministic given positions.
    pub shadowing_sigma_db: Option<f64>,
}

impl Default for PathLossConfig {
    /// 5.9 GHz free-space loss at 1 m with a 2.2 exponent; this places the
    /// edge of reception for a 20 dBm sender at roughly 800 m and for a
    /// 10 dBm sender at roughly 290 m.
    fn default() -> Self {
        PathLossConfig {
            ref_loss_db: 47.86,
            exponent: 2.2,
            ref_distance_m: 1.0,
            shadowing_sigma_db: None,
        }
    }
}

/// Path loss in dB at `distance_m`; distances clamp at 0.1 m.
pub fn path_loss_db(cfg: &PathLossConfig, distance_m: f64) -> f64 {
    let d = distance_m.max(0.1);
    cfg.ref_loss_db + 10.0 * cfg.exponent * (d / cfg.ref_distance_m).log10()
}

pub(crate) fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub(crate) fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn reference_distance_loss() {
        let cfg = PathLossConfig::default();
        assert_abs_diff_eq!(path_loss_db(&cfg, 1.0), 47.86, epsilon = 1e-12);
    }

    #[test]
    fn hundred_meter_loss_adds_two_decades() {
        let cfg = PathLossConfig::default();
        assert_abs_diff_eq!(path_loss_db(&cfg, 100.0), 47.86 + 22.0 * 2.0, epsilon = 1e-9);
    }

    #[test]
    fn five_hundred_meters_is_receivable_at_vehicle_power() {
        // 20 dBm − PL(500) ≈ −87.2 dBm, above the −92 dBm sensitivity: the
        // stated two-way awareness range of roughly 500 m holds at 20 dBm.
        let cfg = PathLossConfig::default();
        let rx = 20.0 - path_loss_db(&cfg, 500.0);
        assert!(rx > RadioConfig::vehicle().rx_sensitivity_dbm);
        assert_abs_diff_eq!(rx, -87.3, epsilon = 0.1);
    }

    #[test]
    fn nine_hundred_meters_at_phone_power_is_below_sensitivity() {
        let cfg = PathLossConfig::default();
        let rx = 10.0 - path_loss_db(&cfg, 900.0);
        assert_abs_diff_eq!(rx, -103.0, epsilon = 0.2);
        assert!(rx < RadioConfig::phone().rx_sensitivity_dbm);
    }

    #[test]
    fn short_distances_clamp() {
        let cfg = PathLossConfig::default();
        assert_eq!(path_loss_db(&cfg, 0.0), path_loss_db(&cfg, 0.1));
    }

    #[test]
    fn frame_durations_round_up() {
        let r = RadioConfig::phone();
        // 100 bytes = 800 bits at 6 Mb/s = 133.3 us + 40 us preamble.
        assert_eq!(r.frame_duration_us(100), 40 + 134);
        assert_eq!(r.frame_duration_us(300), 40 + 400);
        assert_eq!(r.aifs_us(), 32 + 7 * 13);
    }
}
