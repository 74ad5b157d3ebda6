//! PER and CBP accumulators.

use std::collections::BTreeMap;

/// One packet-error-ratio distance bin.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PerBin {
    pub attempted: u64,
    pub failed: u64,
}

impl PerBin {
    pub fn ratio(&self) -> f64 {
        if self.attempted == 0 {
            0.0
        } else {
            self.failed as f64 / self.attempted as f64
        }
    }
}

/// Why packets died.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DropCounters {
    /// Receive power under the sensitivity floor (out of range).
    pub below_sensitivity: u64,
    /// In range, but the SINR never cleared the threshold.
    pub collision: u64,
    /// Replaced in the MAC queue by the next periodic packet before airtime.
    pub busy_expired: u64,
}

/// Channel-level results of a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChannelMetrics {
    /// PER over all sender→receiver pairs, keyed by bin low edge in meters.
    pub per_bins: BTreeMap<u32, PerBin>,
    /// PER restricted to vehicle→VRU pairs.
    pub per_bins_veh_to_vru: BTreeMap<u32, PerBin>,
    /// Busy fraction per (window start second, node index).
    pub cbp: BTreeMap<(u32, u32), f64>,
    pub drops: DropCounters,
}

impl ChannelMetrics {
    /// Mean busy fraction across nodes for one window.
    pub fn mean_cbp(&self, window_s: u32) -> Option<f64> {
        let mut sum = 0.0;
        let mut n = 0usize;
        for (&(w, _), &v) in self.cbp.range((window_s, 0)..(window_s + 1, 0)) {
            debug_assert_eq!(w, window_s);
            sum += v;
            n += 1;
        }
        (n > 0).then(|| sum / n as f64)
    }

    /// Re-bins a PER map to a coarser granularity (meters).
    pub fn rebin(bins: &BTreeMap<u32, PerBin>, width_m: u32) -> BTreeMap<u32, PerBin> {
        let mut out: BTreeMap<u32, PerBin> = BTreeMap::new();
        for (&low, bin) in bins {
            let e = out.entry(low / width_m * width_m).or_default();
            e.attempted += bin.attempted;
            e.failed += bin.failed;
        }
        out
    }
}
