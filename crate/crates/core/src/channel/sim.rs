//! The deterministic event engine behind the channel.
//!
//! Time is integer microseconds. The only events are transmission starts and
//! ends; between two events every node's carrier-sense state is constant, so
//! EDCA progress (AIFS wait, backoff countdown) advances linearly and each
//! contender's transmit instant can be projected ahead and re-projected
//! whenever its medium state flips. Ties in the event queue break on a
//! sequence number, which makes runs bit-reproducible.

use super::metrics::ChannelMetrics;
use super::{dbm_to_mw, mw_to_dbm, path_loss_db, PathLossConfig, RadioConfig, PER_BIN_M};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

/// Upper bound on a frame's airtime; used to prune the interference log.
const MAX_FRAME_US: u64 = 10_000;
const WINDOW_US: u64 = 1_000_000;
/// Carrier-sense detection latency: a transmission becomes visible to other
/// nodes this long after it starts (and keeps them busy this long after it
/// ends). Contenders whose backoff expires inside the window fire blind,
/// which is how same-slot collisions happen.
const CCA_DELAY_US: u64 = 4;

/// Index of a node registered with the channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeHandle(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadioMode {
    /// Radio fully off: no reception, no transmission.
    Off,
    /// Off with periodic short listen windows for re-acquisition.
    DutyListen,
    ListenOnly,
    TxRx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Vehicle,
    Vru,
}

/// A frame handed to a listening node.
#[derive(Debug, Clone)]
pub struct Delivery {
    pub time_s: f64,
    pub sender: NodeHandle,
    pub receiver: NodeHandle,
    pub payload: Vec<u8>,
    pub distance_m: f64,
}

/// What one `advance_to` call produced.
#[derive(Debug, Default)]
pub struct TickOutput {
    pub deliveries: Vec<Delivery>,
    /// Airtime spent transmitting since the previous call, per node.
    pub tx_airtime_s: Vec<(NodeHandle, f64)>,
}

#[derive(Debug, Clone)]
struct Pending {
    payload: Vec<u8>,
    air_bytes: usize,
    /// Instant the frame reached the MAC; contention starts here.
    arrival_us: u64,
    /// Contiguous idle time still required before backoff may count down.
    aifs_left_us: u64,
    /// Remaining backoff; `None` until the first busy encounter draws one.
    backoff_left_us: Option<u64>,
}

#[derive(Debug)]
struct Node {
    kind: NodeKind,
    radio: RadioConfig,
    mode: RadioMode,
    pos: (f64, f64),
    pending: Option<Pending>,
    busy: bool,
    transmitting_until: u64,
    /// Invalidates projected transmit attempts when state changes.
    epoch: u64,
    /// Last instant contention progress was settled up to.
    last_progress_us: u64,
    busy_since_us: Option<u64>,
    busy_acc_us: Vec<u64>,
    tick_airtime_us: u64,
}

#[derive(Debug)]
struct ActiveTx {
    seq: u64,
    sender: usize,
    start_us: u64,
    end_us: u64,
    payload: Vec<u8>,
    /// Receive power at every node, milliwatts, fixed at transmit start.
    mw_at: Vec<f64>,
    dist_at: Vec<f64>,
}

#[derive(Debug, PartialEq, Eq)]
enum EvKind {
    /// rank 0: frees the medium before attempts at the same instant fire.
    TxEnd { tx_seq: u64 },
    /// rank 0: delayed carrier-sense refresh after a start or end of frame.
    MediumUpdate,
    /// rank 1: a projected transmit instant; valid only at matching epoch.
    TxAttempt { node: usize, epoch: u64 },
}

#[derive(Debug, PartialEq, Eq)]
struct Ev {
    time_us: u64,
    rank: u8,
    seq: u64,
    kind: EvKind,
}

impl Ord for Ev {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.time_us, self.rank, self.seq).cmp(&(other.time_us, other.rank, other.seq))
    }
}

impl PartialOrd for Ev {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

fn standard_normal(rng: &mut ChaCha12Rng) -> f64 {
    // Box-Muller; two uniform draws per sample keeps the stream predictable.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// The shared DSRC channel.
#[derive(Debug)]
pub struct DsrcChannel {
    path_loss: PathLossConfig,
    nodes: Vec<Node>,
    queue: BinaryHeap<Reverse<Ev>>,
    air_log: VecDeque<ActiveTx>,
    now_us: u64,
    ev_seq: u64,
    tx_seq: u64,
    rng: ChaCha12Rng,
    metrics: ChannelMetrics,
    deliveries: Vec<Delivery>,
    duty_period_us: u64,
    duty_on_us: u64,
}

impl DsrcChannel {
    pub fn new(path_loss: PathLossConfig, seed: u64) -> Self {
        DsrcChannel {
            path_loss,
            nodes: Vec::new(),
            queue: BinaryHeap::new(),
            air_log: VecDeque::new(),
            now_us: 0,
            ev_seq: 0,
            tx_seq: 0,
            rng: ChaCha12Rng::seed_from_u64(seed),
            metrics: ChannelMetrics::default(),
            deliveries: Vec::new(),
            duty_period_us: 2_000_000,
            duty_on_us: 200_000,
        }
    }

    pub fn add_node(&mut self, kind: NodeKind, radio: RadioConfig, pos: (f64, f64)) -> NodeHandle {
        self.nodes.push(Node {
            kind,
            radio,
            mode: RadioMode::TxRx,
            pos,
            pending: None,
            busy: false,
            transmitting_until: 0,
            epoch: 0,
            last_progress_us: 0,
            busy_since_us: None,
            busy_acc_us: Vec::new(),
            tick_airtime_us: 0,
        });
        NodeHandle(self.nodes.len() - 1)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn set_position(&mut self, h: NodeHandle, pos: (f64, f64)) {
        self.nodes[h.0].pos = pos;
    }

    pub fn set_tx_power(&mut self, h: NodeHandle, dbm: f64) {
        self.nodes[h.0].radio.tx_power_dbm = dbm;
    }

    /// Duty cycle used by [`RadioMode::DutyListen`] nodes.
    pub fn set_duty_listen(&mut self, period_s: f64, on_s: f64) {
        self.duty_period_us = (period_s * 1e6).round().max(1.0) as u64;
        self.duty_on_us = (on_s * 1e6).round() as u64;
    }

    pub fn set_mode(&mut self, h: NodeHandle, mode: RadioMode) {
        let node = &mut self.nodes[h.0];
        if node.mode == mode {
            return;
        }
        node.mode = mode;
        node.epoch += 1;
        if mode != RadioMode::TxRx {
            // A queued frame dies with the transmit capability.
            node.pending = None;
        }
    }

    pub fn mode(&self, h: NodeHandle) -> RadioMode {
        self.nodes[h.0].mode
    }

    /// Queues one broadcast frame. A frame still waiting from an earlier call
    /// is replaced and counted as `busy_expired`.
    pub fn enqueue_packet(&mut self, h: NodeHandle, payload: Vec<u8>, air_bytes: usize, now_s: f64) {
        let t_us = ((now_s * 1e6).round().max(0.0) as u64).max(self.now_us);
        debug_assert!(self.nodes[h.0].radio.frame_duration_us(air_bytes) <= MAX_FRAME_US);
        if self.nodes[h.0].mode != RadioMode::TxRx {
            return;
        }
        if self.nodes[h.0].pending.is_some() {
            self.metrics.drops.busy_expired += 1;
        }
        // Busy-at-arrival draws the backoff immediately; an arrival in the
        // future (a pre-queued beacon) defers the decision to the first busy
        // encounter after the arrival instant.
        let busy_now = t_us == self.now_us
            && (self.nodes[h.0].busy || self.nodes[h.0].transmitting_until > t_us);
        let backoff = busy_now.then(|| {
            self.rng.gen_range(0..=self.nodes[h.0].radio.cw) as u64
                * self.nodes[h.0].radio.slot_time_us
        });
        let node = &mut self.nodes[h.0];
        node.pending = Some(Pending {
            payload,
            air_bytes,
            arrival_us: t_us,
            aifs_left_us: node.radio.aifs_us(),
            backoff_left_us: backoff,
        });
        node.last_progress_us = t_us;
        node.epoch += 1;
        self.project_attempt(h.0, self.now_us);
    }

    /// Runs the event loop up to `t_s` and hands back everything that landed.
    pub fn advance_to(&mut self, t_s: f64) -> TickOutput {
        let t_us = (t_s * 1e6).round() as u64;
        assert!(t_us >= self.now_us, "time went backwards");
        // Positions may have moved since the last call; refresh carrier sense.
        self.update_busy_all(self.now_us);
        while let Some(Reverse(ev)) = self.queue.peek() {
            if ev.time_us > t_us {
                break;
            }
            let Reverse(ev) = self.queue.pop().unwrap();
            self.now_us = ev.time_us;
            match ev.kind {
                EvKind::TxEnd { tx_seq } => self.handle_tx_end(tx_seq),
                EvKind::MediumUpdate => self.update_busy_all(self.now_us),
                EvKind::TxAttempt { node, epoch } => self.handle_tx_attempt(node, epoch),
            }
        }
        self.now_us = t_us;
        let cutoff = self.now_us.saturating_sub(MAX_FRAME_US);
        while self.air_log.front().is_some_and(|tx| tx.end_us < cutoff) {
            self.air_log.pop_front();
        }
        TickOutput {
            deliveries: std::mem::take(&mut self.deliveries),
            tx_airtime_s: self
                .nodes
                .iter_mut()
                .enumerate()
                .filter(|(_, n)| n.tick_airtime_us > 0)
                .map(|(i, n)| (NodeHandle(i), std::mem::take(&mut n.tick_airtime_us) as f64 / 1e6))
                .collect(),
        }
    }

    /// Closes CBP accounting at `t_end_s` and returns the collected metrics.
    pub fn finish(mut self, t_end_s: f64) -> ChannelMetrics {
        let _ = self.advance_to(t_end_s);
        let t_end = self.now_us;
        for i in 0..self.nodes.len() {
            self.settle_cbp(i, t_end, false);
        }
        let windows = t_end.div_ceil(WINDOW_US);
        for w in 0..windows {
            let start = w * WINDOW_US;
            let len = (t_end - start).min(WINDOW_US);
            if len == 0 {
                continue;
            }
            for (i, node) in self.nodes.iter().enumerate() {
                let busy = node.busy_acc_us.get(w as usize).copied().unwrap_or(0);
                self.metrics
                    .cbp
                    .insert((w as u32, i as u32), busy as f64 / len as f64);
            }
        }
        self.metrics
    }

    pub fn metrics(&self) -> &ChannelMetrics {
        &self.metrics
    }

    fn schedule(&mut self, time_us: u64, rank: u8, kind: EvKind) {
        self.ev_seq += 1;
        self.queue.push(Reverse(Ev { time_us, rank, seq: self.ev_seq, kind }));
    }

    fn is_listening(&self, node: &Node, t_us: u64) -> bool {
        match node.mode {
            RadioMode::TxRx | RadioMode::ListenOnly => true,
            RadioMode::DutyListen => t_us % self.duty_period_us < self.duty_on_us,
            RadioMode::Off => false,
        }
    }

    /// Sum of receive powers at `node` from other senders' frames as the
    /// carrier-sense circuit perceives them (shifted by the CCA latency), mW.
    fn sensed_mw(&self, node_idx: usize, t_us: u64) -> f64 {
        self.air_log
            .iter()
            .filter(|tx| {
                tx.sender != node_idx
                    && tx.start_us + CCA_DELAY_US <= t_us
                    && t_us < tx.end_us + CCA_DELAY_US
            })
            .map(|tx| tx.mw_at[node_idx])
            .sum()
    }

    /// Recomputes carrier sense everywhere, settling contention progress and
    /// CBP accounting for every node whose state flipped.
    fn update_busy_all(&mut self, now: u64) {
        for i in 0..self.nodes.len() {
            let sensed = self.sensed_mw(i, now);
            let node = &self.nodes[i];
            let busy_new =
                node.transmitting_until > now || sensed > dbm_to_mw(node.radio.cca_threshold_dbm);
            if busy_new == node.busy {
                continue;
            }
            // Settle the elapsed interval under the old state, then flip.
            self.settle_contention(i, now);
            self.settle_cbp(i, now, busy_new);
            let node = &mut self.nodes[i];
            node.busy = busy_new;
            node.epoch += 1;
            // The backoff is drawn at the first busy encounter after the
            // frame's arrival: either the medium going busy on top of it, or
            // the medium clearing after an arrival that fell into busy air.
            let needs_draw = self.nodes[i]
                .pending
                .as_ref()
                .is_some_and(|p| p.backoff_left_us.is_none() && p.arrival_us <= now);
            if busy_new {
                let aifs = self.nodes[i].radio.aifs_us();
                let slot = self.nodes[i].radio.slot_time_us;
                let cw = self.nodes[i].radio.cw;
                let draw = needs_draw.then(|| self.rng.gen_range(0..=cw) as u64 * slot);
                if let Some(p) = self.nodes[i].pending.as_mut() {
                    // Busy interrupts the AIFS wait; the frozen backoff
                    // resumes after the next idle AIFS.
                    p.aifs_left_us = aifs;
                    if let Some(d) = draw {
                        p.backoff_left_us = Some(d);
                    }
                }
            } else {
                let arrived_in_busy_air = self.nodes[i]
                    .pending
                    .as_ref()
                    .is_some_and(|p| p.backoff_left_us.is_none() && p.arrival_us < now);
                if arrived_in_busy_air {
                    let slot = self.nodes[i].radio.slot_time_us;
                    let cw = self.nodes[i].radio.cw;
                    let d = self.rng.gen_range(0..=cw) as u64 * slot;
                    self.nodes[i].pending.as_mut().unwrap().backoff_left_us = Some(d);
                }
                self.project_attempt(i, now);
            }
        }
    }

    /// Applies idle-time progress to a pending frame up to `now`. Must be
    /// called before `busy` flips; it reads the pre-flip state. Progress only
    /// accrues after the frame's arrival instant.
    fn settle_contention(&mut self, node_idx: usize, now: u64) {
        let node = &mut self.nodes[node_idx];
        let start = node.last_progress_us;
        node.last_progress_us = now;
        if node.busy {
            return;
        }
        if let Some(p) = node.pending.as_mut() {
            let from = start.max(p.arrival_us);
            if now <= from {
                return;
            }
            let dt = now - from;
            let aifs_used = dt.min(p.aifs_left_us);
            p.aifs_left_us -= aifs_used;
            if let Some(b) = p.backoff_left_us.as_mut() {
                *b = b.saturating_sub(dt - aifs_used);
            }
        }
    }

    /// Tracks busy time per CBP window across a state flip at `now`.
    fn settle_cbp(&mut self, node_idx: usize, now: u64, becoming_busy: bool) {
        let node = &mut self.nodes[node_idx];
        if let Some(since) = node.busy_since_us.take() {
            let mut t = since;
            while t < now {
                let w = (t / WINDOW_US) as usize;
                let w_end = (t / WINDOW_US + 1) * WINDOW_US;
                let seg = now.min(w_end) - t;
                if node.busy_acc_us.len() <= w {
                    node.busy_acc_us.resize(w + 1, 0);
                }
                node.busy_acc_us[w] += seg;
                t += seg;
            }
        }
        if becoming_busy {
            node.busy_since_us = Some(now);
        }
    }

    /// Schedules the projected transmit instant for a contender, assuming its
    /// medium stays idle. A later state flip bumps the epoch and invalidates it.
    fn project_attempt(&mut self, node_idx: usize, now: u64) {
        let node = &self.nodes[node_idx];
        if node.busy || node.transmitting_until > now || node.mode != RadioMode::TxRx {
            return;
        }
        let Some(p) = node.pending.as_ref() else { return };
        let fire = now.max(p.arrival_us) + p.aifs_left_us + p.backoff_left_us.unwrap_or(0);
        let epoch = node.epoch;
        self.schedule(fire, 1, EvKind::TxAttempt { node: node_idx, epoch });
    }

    fn handle_tx_attempt(&mut self, node_idx: usize, epoch: u64) {
        if self.nodes[node_idx].epoch != epoch {
            return; // superseded projection
        }
        let now = self.now_us;
        self.settle_contention(node_idx, now);
        let node = &mut self.nodes[node_idx];
        let Some(pending) = node.pending.take() else { return };
        debug_assert!(!node.busy && node.transmitting_until <= now);
        debug_assert_eq!(pending.aifs_left_us + pending.backoff_left_us.unwrap_or(0), 0);

        let duration = node.radio.frame_duration_us(pending.air_bytes);
        let end = now + duration;
        node.transmitting_until = end;
        node.tick_airtime_us += duration;
        node.epoch += 1;
        let power = node.radio.tx_power_dbm;
        let sender_pos = node.pos;

        // Freeze per-receiver powers at transmit start.
        let shadowing = self.path_loss.shadowing_sigma_db;
        let mut mw_at = Vec::with_capacity(self.nodes.len());
        let mut dist_at = Vec::with_capacity(self.nodes.len());
        for j in 0..self.nodes.len() {
            let other = self.nodes[j].pos;
            let dist = (other.0 - sender_pos.0).hypot(other.1 - sender_pos.1);
            let mut rx_dbm = power - path_loss_db(&self.path_loss, dist);
            if let Some(sigma) = shadowing {
                rx_dbm += sigma * standard_normal(&mut self.rng);
            }
            mw_at.push(dbm_to_mw(rx_dbm));
            dist_at.push(dist);
        }

        self.tx_seq += 1;
        let tx_seq = self.tx_seq;
        self.air_log.push_back(ActiveTx {
            seq: tx_seq,
            sender: node_idx,
            start_us: now,
            end_us: end,
            payload: pending.payload,
            mw_at,
            dist_at,
        });
        self.schedule(end, 0, EvKind::TxEnd { tx_seq });
        // The sender knows it is busy now; everyone else senses it after the
        // CCA latency.
        self.update_busy_all(now);
        self.schedule(now + CCA_DELAY_US, 0, EvKind::MediumUpdate);
    }

    fn handle_tx_end(&mut self, tx_seq: u64) {
        let Some(tx_pos) = self.air_log.iter().position(|tx| tx.seq == tx_seq) else {
            return;
        };
        self.evaluate_receptions(tx_pos);
        // The sender itself frees up now; everyone else notices after the
        // carrier-sense latency.
        self.update_busy_all(self.now_us);
        self.schedule(self.now_us + CCA_DELAY_US, 0, EvKind::MediumUpdate);
    }

    /// Decides delivery of a finished frame at every listening node.
    fn evaluate_receptions(&mut self, tx_pos: usize) {
        let now = self.now_us;
        let time_s = now as f64 / 1e6;
        let sender = self.air_log[tx_pos].sender;
        let sender_kind = self.nodes[sender].kind;

        for r in 0..self.nodes.len() {
            if r == sender || !self.is_listening(&self.nodes[r], now) {
                continue;
            }
            let rx_mw = self.air_log[tx_pos].mw_at[r];
            let rx_dbm = mw_to_dbm(rx_mw);
            let radio = self.nodes[r].radio;
            if rx_dbm < radio.rx_sensitivity_dbm {
                self.metrics.drops.below_sensitivity += 1;
                continue;
            }
            // In range: this is a counted attempt.
            let dist = self.air_log[tx_pos].dist_at[r];
            let bin = ((dist / PER_BIN_M).floor() * PER_BIN_M) as u32;

            // Worst co-temporal interference across the frame; the receiver's
            // own transmissions are included, which models half-duplex loss.
            let interference = self.max_interference_mw(tx_pos, r);
            let sinr_db = rx_dbm - mw_to_dbm(dbm_to_mw(radio.noise_floor_dbm) + interference);
            let delivered = sinr_db >= radio.sinr_threshold_db;

            let overall = self.metrics.per_bins.entry(bin).or_default();
            overall.attempted += 1;
            if !delivered {
                overall.failed += 1;
            }
            if sender_kind == NodeKind::Vehicle && self.nodes[r].kind == NodeKind::Vru {
                let e = self.metrics.per_bins_veh_to_vru.entry(bin).or_default();
                e.attempted += 1;
                if !delivered {
                    e.failed += 1;
                }
            }
            if delivered {
                let payload = self.air_log[tx_pos].payload.clone();
                self.deliveries.push(Delivery {
                    time_s,
                    sender: NodeHandle(sender),
                    receiver: NodeHandle(r),
                    payload,
                    distance_m: dist,
                });
            } else {
                self.metrics.drops.collision += 1;
            }
        }
    }

    /// Maximum simultaneous interference power seen at `receiver` during the
    /// frame at `tx_pos`, mW. Sweeps the overlapping frames' boundaries.
    fn max_interference_mw(&self, tx_pos: usize, receiver: usize) -> f64 {
        let tx = &self.air_log[tx_pos];
        let mut boundaries: Vec<u64> = vec![tx.start_us];
        let mut overlapping: Vec<&ActiveTx> = Vec::new();
        for (i, other) in self.air_log.iter().enumerate() {
            if i != tx_pos && other.start_us < tx.end_us && other.end_us > tx.start_us {
                overlapping.push(other);
                boundaries.push(other.start_us.max(tx.start_us));
                boundaries.push(other.end_us.min(tx.end_us));
            }
        }
        if overlapping.is_empty() {
            return 0.0;
        }
        boundaries.sort_unstable();
        boundaries.dedup();
        let mut worst = 0.0f64;
        for &t in &boundaries {
            if t >= tx.end_us {
                continue;
            }
            let sum: f64 = overlapping
                .iter()
                .filter(|o| o.start_us <= t && t < o.end_us)
                .map(|o| o.mw_at[receiver])
                .sum();
            worst = worst.max(sum);
        }
        worst
    }
}
