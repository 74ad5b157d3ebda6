//! Ground-truth actor motion.

use super::build::{ActorConfig, MotionSpec};
use crate::awareness::KinematicState;

/// Ground-truth state of one actor, integrated tick by tick.
#[derive(Debug, Clone, Copy)]
pub struct ActorState {
    pub east_m: f64,
    pub north_m: f64,
    pub heading_deg: f64,
    pub speed_mps: f64,
    /// Commanded acceleration (braking response); zero otherwise.
    pub accel_mps2: f64,
    pub yaw_rate_rps: f64,
    traveled_m: f64,
    swept_rad: f64,
}

impl ActorState {
    pub fn new(cfg: &ActorConfig) -> Self {
        ActorState {
            east_m: cfg.start_east_m,
            north_m: cfg.start_north_m,
            heading_deg: cfg.heading_deg,
            speed_mps: cfg.speed_mps,
            accel_mps2: 0.0,
            yaw_rate_rps: 0.0,
            traveled_m: 0.0,
            swept_rad: 0.0,
        }
    }

    pub fn kinematics(&self) -> KinematicState {
        KinematicState {
            speed_mps: self.speed_mps,
            accel_mps2: self.accel_mps2,
            heading_deg: self.heading_deg,
            yaw_rate_rps: self.yaw_rate_rps,
        }
    }

    /// Advances the actor by `dt`, splitting the step exactly at phase
    /// boundaries (turn entry/exit, sidewalk ends, standstill).
    pub fn step(&mut self, spec: &MotionSpec, dt_s: f64) {
        let mut remaining = dt_s;
        let mut guard = 0;
        while remaining > 1e-12 {
            guard += 1;
            debug_assert!(guard < 32, "motion step failed to converge");
            remaining -= self.sub_step(spec, remaining);
            if self.speed_mps <= 0.0 {
                break;
            }
        }
    }

    /// Applies one phase-uniform piece of the step; returns the time consumed.
    fn sub_step(&mut self, spec: &MotionSpec, dt_s: f64) -> f64 {
        // Braking: cut the step at the standstill instant.
        let mut dt = dt_s;
        if self.accel_mps2 < 0.0 {
            let t_stop = -self.speed_mps / self.accel_mps2;
            dt = dt.min(t_stop);
        }
        if dt <= 0.0 {
            self.speed_mps = 0.0;
            self.yaw_rate_rps = 0.0;
            return dt_s;
        }

        match *spec {
            MotionSpec::Stationary => {
                self.yaw_rate_rps = 0.0;
                dt_s
            }
            MotionSpec::Straight => {
                self.yaw_rate_rps = 0.0;
                self.advance_straight(dt);
                dt
            }
            MotionSpec::TurnArc { turn_after_m, yaw_rate_rps, arc_angle_rad } => {
                if self.traveled_m < turn_after_m {
                    // Approach leg: stop the sub-step at the turn entry.
                    self.yaw_rate_rps = 0.0;
                    let to_turn = turn_after_m - self.traveled_m;
                    let (d, t) = self.distance_over(dt);
                    if d <= to_turn {
                        self.advance_straight(t.min(dt));
                        return t.min(dt);
                    }
                    let t_entry = self.time_to_cover(to_turn);
                    self.advance_straight(t_entry);
                    t_entry
                } else if self.swept_rad < arc_angle_rad {
                    self.yaw_rate_rps = yaw_rate_rps;
                    // Limit the sub-step to the remaining sweep.
                    let max_sweep = arc_angle_rad - self.swept_rad;
                    let sweep_rate = yaw_rate_rps.abs();
                    let t_exit = if sweep_rate > 0.0 { max_sweep / sweep_rate } else { f64::MAX };
                    let t = dt.min(t_exit);
                    self.advance_arc(yaw_rate_rps, t);
                    self.swept_rad += sweep_rate * t;
                    if self.swept_rad >= arc_angle_rad - 1e-12 {
                        self.yaw_rate_rps = 0.0;
                    }
                    t
                } else {
                    self.yaw_rate_rps = 0.0;
                    self.advance_straight(dt);
                    dt
                }
            }
            MotionSpec::SidewalkBounce { min_east_m, max_east_m } => {
                self.yaw_rate_rps = 0.0;
                let east_bound = self.heading_deg.to_radians().sin() > 0.0;
                let to_end = if east_bound {
                    max_east_m - self.east_m
                } else {
                    self.east_m - min_east_m
                };
                let (d, _) = self.distance_over(dt);
                if d < to_end || to_end <= 0.0 && d <= 0.0 {
                    self.advance_straight(dt);
                    dt
                } else if to_end <= 0.0 {
                    self.heading_deg = if east_bound { 270.0 } else { 90.0 };
                    0.0
                } else {
                    let t_hit = self.time_to_cover(to_end);
                    self.advance_straight(t_hit);
                    self.heading_deg = if east_bound { 270.0 } else { 90.0 };
                    t_hit.max(1e-9)
                }
            }
        }
    }

    fn advance_straight(&mut self, dt: f64) {
        let (d, _) = self.distance_over(dt);
        let h = self.heading_deg.to_radians();
        self.east_m += d * h.sin();
        self.north_m += d * h.cos();
        self.traveled_m += d;
        self.apply_speed(dt);
    }

    fn advance_arc(&mut self, yaw: f64, dt: f64) {
        // Rotate about the turn center; positive yaw turns left (CCW in the
        // east/north plane), which decreases the compass heading.
        let h = self.heading_deg.to_radians();
        let r = self.speed_mps / yaw;
        let (cx, cy) = (self.east_m - r * h.cos(), self.north_m + r * h.sin());
        let phi = yaw * dt;
        let (dx, dy) = (self.east_m - cx, self.north_m - cy);
        let (sin_p, cos_p) = phi.sin_cos();
        self.east_m = cx + dx * cos_p - dy * sin_p;
        self.north_m = cy + dx * sin_p + dy * cos_p;
        self.heading_deg = (self.heading_deg - phi.to_degrees()).rem_euclid(360.0);
        self.traveled_m += self.speed_mps * dt;
        self.apply_speed(dt);
    }

    fn apply_speed(&mut self, dt: f64) {
        if self.accel_mps2 != 0.0 {
            self.speed_mps = (self.speed_mps + self.accel_mps2 * dt).max(0.0);
            if self.speed_mps == 0.0 {
                self.yaw_rate_rps = 0.0;
            }
        }
    }

    /// Distance covered in `dt` under the commanded acceleration.
    fn distance_over(&self, dt: f64) -> (f64, f64) {
        if self.accel_mps2 >= 0.0 {
            (self.speed_mps * dt + 0.5 * self.accel_mps2 * dt * dt, dt)
        } else {
            let t_stop = -self.speed_mps / self.accel_mps2;
            let t = dt.min(t_stop);
            (self.speed_mps * t + 0.5 * self.accel_mps2 * t * t, t)
        }
    }

    /// Time to cover `d` meters from the current speed; infinite when stopped.
    fn time_to_cover(&self, d: f64) -> f64 {
        if self.accel_mps2 == 0.0 {
            if self.speed_mps <= 0.0 {
                return f64::MAX;
            }
            return d / self.speed_mps;
        }
        // Solve d = v t + a t^2 / 2 for the smallest positive root.
        let v = self.speed_mps;
        let a = self.accel_mps2;
        let disc = v * v + 2.0 * a * d;
        if disc < 0.0 {
            return f64::MAX; // stops before covering d
        }
        (-v + disc.sqrt()) / a
    }
}
