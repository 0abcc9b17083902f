//! Dormand–Prince 5(4) stepper with PI step control, cubic-Hermite dense
//! output and section-crossing detection.

use alloc::vec;
use alloc::vec::Vec;

use crate::plane::{self, Pt};

use super::{FlowError, IntegratorConfig};

pub(crate) trait Rhs {
    fn dim(&self) -> usize;
    fn eval(&self, y: &[f64], dy: &mut [f64]) -> Result<(), FlowError>;
}

// Dormand–Prince coefficients.
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B5: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
/// Difference between the 5th- and the embedded 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// One accepted step, with the endpoint derivatives needed for dense output.
pub(crate) struct StepRecord {
    pub t0: f64,
    pub h: f64,
    pub y0: Vec<f64>,
    pub f0: Vec<f64>,
    pub y1: Vec<f64>,
    pub f1: Vec<f64>,
}

impl StepRecord {
    /// Cubic Hermite interpolation at fraction `theta` of the step.
    pub fn interpolate(&self, theta: f64, out: &mut [f64]) {
        let t2 = theta * theta;
        let t3 = t2 * theta;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + theta;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        for i in 0..out.len() {
            out[i] = h00 * self.y0[i]
                + h10 * self.h * self.f0[i]
                + h01 * self.y1[i]
                + h11 * self.h * self.f1[i];
        }
    }
}

pub(crate) struct Stepper<'a, R: Rhs> {
    rhs: &'a R,
    cfg: &'a IntegratorConfig,
    pub t: f64,
    pub y: Vec<f64>,
    f: Vec<f64>,
    h: f64,
    err_prev: f64,
    k: [Vec<f64>; 7],
    ytmp: Vec<f64>,
}

impl<'a, R: Rhs> Stepper<'a, R> {
    pub fn new(rhs: &'a R, cfg: &'a IntegratorConfig, y0: Vec<f64>) -> Result<Self, FlowError> {
        let dim = rhs.dim();
        debug_assert_eq!(y0.len(), dim);
        let mut f = vec![0.0; dim];
        rhs.eval(&y0, &mut f)?;
        let mut s = Stepper {
            rhs,
            cfg,
            t: 0.0,
            y: y0,
            f,
            h: 0.0,
            err_prev: 1e-4,
            k: core::array::from_fn(|_| vec![0.0; dim]),
            ytmp: vec![0.0; dim],
        };
        s.h = s.initial_step()?;
        Ok(s)
    }

    fn scale(&self, i: usize, y_new: f64) -> f64 {
        self.cfg.abs_tol + self.cfg.rel_tol * self.y[i].abs().max(y_new.abs())
    }

    fn initial_step(&self) -> Result<f64, FlowError> {
        let dim = self.rhs.dim();
        let mut d0: f64 = 0.0;
        let mut d1: f64 = 0.0;
        for i in 0..dim {
            let sc = self.scale(i, self.y[i]);
            d0 += (self.y[i] / sc) * (self.y[i] / sc);
            d1 += (self.f[i] / sc) * (self.f[i] / sc);
        }
        let (d0, d1) = (crate::math::sqrt(d0 / dim as f64), crate::math::sqrt(d1 / dim as f64));
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(self.cfg.max_step);
        // one Euler probe to estimate the second derivative
        let mut y1 = vec![0.0; dim];
        for i in 0..dim {
            y1[i] = self.y[i] + h0 * self.f[i];
        }
        let mut f1 = vec![0.0; dim];
        self.rhs.eval(&y1, &mut f1)?;
        let mut d2: f64 = 0.0;
        for i in 0..dim {
            let sc = self.scale(i, y1[i]);
            let df = (f1[i] - self.f[i]) / sc;
            d2 += df * df;
        }
        let d2 = crate::math::sqrt(d2 / dim as f64) / h0;
        let dmax = d1.max(d2);
        let h1 = if dmax <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            crate::math::powf(0.01 / dmax, 0.2)
        };
        Ok(h1.min(100.0 * h0).min(self.cfg.max_step))
    }

    /// Advance one accepted step; the record carries dense-output data.
    pub fn step(&mut self) -> Result<StepRecord, FlowError> {
        const SAFETY: f64 = 0.9;
        const BETA: f64 = 0.04;
        const EXPO: f64 = 0.2 - BETA * 0.75;
        let dim = self.rhs.dim();
        loop {
            let h = self.h.min(self.cfg.max_step);
            if h < 1e-14 * (1.0 + self.t.abs()) {
                return Err(FlowError::StepFailure { t: self.t });
            }
            self.k[0].copy_from_slice(&self.f);
            self.stage(h, &A2, 1)?;
            self.stage(h, &A3, 2)?;
            self.stage(h, &A4, 3)?;
            self.stage(h, &A5, 4)?;
            self.stage(h, &A6, 5)?;
            // 7th stage argument is the 5th-order solution
            let mut y5 = vec![0.0; dim];
            for i in 0..dim {
                let mut acc = 0.0;
                for (j, b) in B5.iter().enumerate() {
                    acc += b * self.k[j][i];
                }
                y5[i] = self.y[i] + h * acc;
            }
            let mut f5 = vec![0.0; dim];
            self.rhs.eval(&y5, &mut f5)?;
            self.k[6].copy_from_slice(&f5);

            let mut err: f64 = 0.0;
            for i in 0..dim {
                let mut e = 0.0;
                for (j, c) in E.iter().enumerate() {
                    e += c * self.k[j][i];
                }
                let sc = self.scale(i, y5[i]);
                let r = h * e / sc;
                err += r * r;
            }
            let err = crate::math::sqrt(err / dim as f64).max(1e-30);

            if err <= 1.0 {
                let record = StepRecord {
                    t0: self.t,
                    h,
                    y0: core::mem::replace(&mut self.y, y5),
                    f0: core::mem::replace(&mut self.f, f5),
                    y1: self.y.clone(),
                    f1: self.f.clone(),
                };
                self.t += h;
                let scale =
                    (SAFETY * crate::math::powf(err, -EXPO) * crate::math::powf(self.err_prev, BETA))
                        .clamp(0.2, 5.0);
                self.h = (h * scale).min(self.cfg.max_step);
                self.err_prev = err.max(1e-4);
                return Ok(record);
            }
            let scale = (SAFETY * crate::math::powf(err, -EXPO)).clamp(0.2, 1.0);
            self.h = h * scale;
        }
    }

    fn stage(&mut self, h: f64, coeffs: &[f64], stage: usize) -> Result<(), FlowError> {
        let dim = self.rhs.dim();
        for i in 0..dim {
            let mut acc = 0.0;
            for (j, a) in coeffs.iter().enumerate() {
                acc += a * self.k[j][i];
            }
            self.ytmp[i] = self.y[i] + h * acc;
        }
        let (head, tail) = self.k.split_at_mut(stage);
        let _ = head;
        self.rhs.eval(&self.ytmp, &mut tail[0])?;
        Ok(())
    }

    /// Shrink the next step so it lands exactly on `t_end`.
    pub fn clamp_to(&mut self, t_end: f64) {
        if self.t + self.h > t_end {
            self.h = t_end - self.t;
        }
    }
}

/// Integrate the autonomous system to `t_end > 0`.
pub(crate) fn integrate_to<R: Rhs>(
    rhs: &R,
    y0: Vec<f64>,
    t_end: f64,
    cfg: &IntegratorConfig,
    mut on_step: impl FnMut(&StepRecord) -> Result<(), FlowError>,
) -> Result<Vec<f64>, FlowError> {
    debug_assert!(t_end >= 0.0);
    if t_end == 0.0 {
        return Ok(y0);
    }
    let mut stepper = Stepper::new(rhs, cfg, y0)?;
    loop {
        stepper.clamp_to(t_end);
        let rec = stepper.step()?;
        on_step(&rec)?;
        if stepper.t >= t_end - 1e-14 * t_end.abs() {
            return Ok(stepper.y);
        }
        if stepper.t > cfg.max_time {
            return Err(FlowError::NoReturn { elapsed: stepper.t });
        }
    }
}

/// A Poincaré section through `anchor` with unit normal `normal`; the signed
/// coordinate is `g(z) = (z − anchor)·normal`.
pub(crate) struct Section {
    pub anchor: Pt,
    pub normal: Pt,
}

impl Section {
    fn g(&self, y: &[f64]) -> f64 {
        (y[0] - self.anchor[0]) * self.normal[0] + (y[1] - self.anchor[1]) * self.normal[1]
    }
}

pub(crate) struct ReturnHit {
    pub t: f64,
    pub state: Vec<f64>,
    pub samples: Vec<(f64, Pt)>,
}

const MAX_SAMPLES: usize = 65_536;

/// Run until the trajectory returns to the section through its start point:
/// the first same-orientation crossing whose refined point closes up with the
/// anchor. The detector arms once the signed coordinate has been strictly
/// negative (this rejects the trivial crossing at t = 0), candidate times
/// below `guard_fraction` times the first candidate are ignored, and
/// candidates that fail the closure test (other intersections of the full
/// section line with the orbit) are skipped.
pub(crate) fn integrate_until_return<R: Rhs>(
    rhs: &R,
    y0: Vec<f64>,
    section: &Section,
    cfg: &IntegratorConfig,
) -> Result<ReturnHit, FlowError> {
    let dim = rhs.dim();
    let accept_radius = 1e-3 * (1.0 + plane::norm(section.anchor));
    let mut stepper = Stepper::new(rhs, cfg, y0)?;
    let mut samples: Vec<(f64, Pt)> = Vec::new();
    samples.push((0.0, [stepper.y[0], stepper.y[1]]));
    let mut armed = false;
    let mut min_accept_time = 0.0;
    let mut first_candidate: Option<f64> = None;
    let mut probe = vec![0.0; dim];

    loop {
        if stepper.t > cfg.max_time {
            return Err(FlowError::NoReturn { elapsed: stepper.t });
        }
        let rec = stepper.step()?;
        if samples.len() < MAX_SAMPLES {
            samples.push((rec.t0 + rec.h, [rec.y1[0], rec.y1[1]]));
        }
        // check the two half-steps so a dip below the section inside one
        // step is still seen
        let thetas = [0.0, 0.5, 1.0];
        let mut gs = [0.0; 3];
        gs[0] = section.g(&rec.y0);
        rec.interpolate(0.5, &mut probe);
        gs[1] = section.g(&probe);
        gs[2] = section.g(&rec.y1);
        for seg in 0..2 {
            let (ta, tb) = (thetas[seg], thetas[seg + 1]);
            let (ga, gb) = (gs[seg], gs[seg + 1]);
            if ga < 0.0 {
                armed = true;
            }
            if !(armed && ga < 0.0 && gb >= 0.0) {
                continue;
            }
            let theta = refine_crossing(&rec, section, ta, tb, ga, cfg.event_tol, &mut probe);
            let t_star = rec.t0 + theta * rec.h;
            if t_star < min_accept_time {
                continue;
            }
            if first_candidate.is_none() {
                first_candidate = Some(t_star);
                min_accept_time = cfg.guard_fraction * t_star;
            }
            rec.interpolate(theta, &mut probe);
            let z_star = [probe[0], probe[1]];
            if plane::dist(z_star, section.anchor) <= accept_radius {
                return Ok(ReturnHit { t: t_star, state: probe.clone(), samples });
            }
        }
        if gs[2] < 0.0 {
            armed = true;
        }
    }
}

/// Bisection on the dense output of the signed section coordinate.
fn refine_crossing(
    rec: &StepRecord,
    section: &Section,
    mut lo: f64,
    mut hi: f64,
    mut glo: f64,
    tol: f64,
    probe: &mut [f64],
) -> f64 {
    let scale = 1.0 + plane::norm(section.anchor);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        rec.interpolate(mid, probe);
        let gm = section.g(probe);
        if gm.abs() <= tol * scale || (hi - lo) < 1e-16 {
            return mid;
        }
        if (gm < 0.0) == (glo < 0.0) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
