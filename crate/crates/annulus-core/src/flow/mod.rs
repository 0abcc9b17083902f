//! Adaptive integration of planar flows: minimal-period detection via a
//! Poincaré section through the start point, quadratures of cofactor
//! integrands carried as extra state components, and advancement along
//! normalizer orbits.

mod rk;

use alloc::vec;
use alloc::vec::Vec;

use crate::expr::EvalError;
use crate::plane::{self, Pt};
use crate::systems::{PointField, Region, SystemError, EPS_STATIONARY};

use rk::{integrate_until_return, Rhs, Section};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FlowError {
    #[error("stationary point at ({x}, {y})", x = .0[0], y = .0[1])]
    StationaryPoint(Pt),
    #[error("no section return within t = {elapsed} (not a cycle, or period beyond budget)")]
    NoReturn { elapsed: f64 },
    #[error("step size collapsed at t = {t}; tolerance unreachable")]
    StepFailure { t: f64 },
    #[error("trajectory left the region at ({x}, {y}), t = {t}", x = z[0], y = z[1])]
    RegionExit { z: Pt, t: f64 },
    #[error("integrand {index} hit the blow-up cap at ({x}, {y}): {value:e}", x = z[0], y = z[1])]
    IntegrandBlowup { index: usize, z: Pt, value: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    System(#[from] SystemError),
}

/// Integrator settings; the defaults match the documented tolerances.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub max_time: f64,
    /// Tolerance, in the signed section coordinate, of event refinement.
    pub event_tol: f64,
    /// Fraction of the first return-candidate time below which later
    /// candidates are treated as retriggers.
    pub guard_fraction: f64,
    /// Integrand magnitude that aborts a quadrature (singular normalizer).
    pub blowup_cap: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 10.0,
            max_time: 1e4,
            event_tol: 1e-12,
            guard_fraction: 0.1,
            blowup_cap: 1e12,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), FlowError> {
        let ok = self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.max_step > 0.0
            && self.max_time > 0.0
            && self.event_tol > 0.0
            && self.guard_fraction > 0.0
            && self.guard_fraction < 1.0
            && self.blowup_cap > 0.0;
        if ok {
            Ok(())
        } else {
            Err(FlowError::StepFailure { t: 0.0 })
        }
    }
}

/// One closed orbit with its minimal period, closure residual, sample points
/// over one turn and any attached quadrature values.
#[derive(Debug, Clone)]
pub struct Cycle {
    pub anchor: Pt,
    pub period: f64,
    /// `|φ_V(T, z0) − z0|`.
    pub closure: f64,
    pub samples: Vec<(f64, Pt)>,
    /// `∫₀ᵀ f_j(φ_V(t, z0)) dt`, aligned with the requested integrands.
    pub quadratures: Vec<f64>,
}

/// A family of scalar integrands evaluated together (the cofactor sequence
/// shares one jet computation per point).
pub trait VectorIntegrand {
    fn len(&self) -> usize;
    fn eval(&self, z: Pt, out: &mut [f64]) -> Result<(), FlowError>;
}

/// A single closure as an integrand family of one.
pub struct ScalarIntegrand<F: Fn(Pt) -> Result<f64, FlowError>>(pub F);

impl<F: Fn(Pt) -> Result<f64, FlowError>> VectorIntegrand for ScalarIntegrand<F> {
    fn len(&self) -> usize {
        1
    }

    fn eval(&self, z: Pt, out: &mut [f64]) -> Result<(), FlowError> {
        out[0] = (self.0)(z)?;
        Ok(())
    }
}

impl<F: Fn(Pt) -> Result<f64, FlowError>> ScalarIntegrand<F> {
    pub fn new(f: F) -> Self {
        ScalarIntegrand(f)
    }
}

struct FieldRhs<'a> {
    field: &'a dyn PointField,
}

impl Rhs for FieldRhs<'_> {
    fn dim(&self) -> usize {
        2
    }

    fn eval(&self, y: &[f64], dy: &mut [f64]) -> Result<(), FlowError> {
        let v = self.field.at([y[0], y[1]])?;
        if !v[0].is_finite() || !v[1].is_finite() {
            return Err(FlowError::Eval(EvalError::NonFinite));
        }
        dy[0] = v[0];
        dy[1] = v[1];
        Ok(())
    }
}

struct AugmentedRhs<'a> {
    field: &'a dyn PointField,
    integrands: &'a dyn VectorIntegrand,
    cap: f64,
}

impl Rhs for AugmentedRhs<'_> {
    fn dim(&self) -> usize {
        2 + self.integrands.len()
    }

    fn eval(&self, y: &[f64], dy: &mut [f64]) -> Result<(), FlowError> {
        let z = [y[0], y[1]];
        let v = self.field.at(z)?;
        if !v[0].is_finite() || !v[1].is_finite() {
            return Err(FlowError::Eval(EvalError::NonFinite));
        }
        dy[0] = v[0];
        dy[1] = v[1];
        self.integrands.eval(z, &mut dy[2..])?;
        for (j, val) in dy[2..].iter().enumerate() {
            if !val.is_finite() || val.abs() > self.cap {
                return Err(FlowError::IntegrandBlowup { index: j, z, value: *val });
            }
        }
        Ok(())
    }
}

fn start_section(v: &dyn PointField, z0: Pt) -> Result<Section, FlowError> {
    let v0 = v.at(z0)?;
    let speed = plane::norm(v0);
    if speed <= EPS_STATIONARY {
        return Err(FlowError::StationaryPoint(z0));
    }
    Ok(Section { anchor: z0, normal: [v0[0] / speed, v0[1] / speed] })
}

/// The cycle through `z0`, with period refined to the event tolerance.
pub fn integrate_cycle(
    v: &dyn PointField,
    z0: Pt,
    cfg: &IntegratorConfig,
) -> Result<Cycle, FlowError> {
    let section = start_section(v, z0)?;
    let rhs = FieldRhs { field: v };
    let hit = integrate_until_return(&rhs, vec![z0[0], z0[1]], &section, cfg)?;
    Ok(Cycle {
        anchor: z0,
        period: hit.t,
        closure: plane::dist([hit.state[0], hit.state[1]], z0),
        samples: hit.samples,
        quadratures: Vec::new(),
    })
}

/// The cycle through `z0` together with `∫₀ᵀ f_j dt` for each integrand,
/// accumulated as extra state components so the quadratures inherit the
/// integrator's error control.
pub fn cycle_quadratures(
    v: &dyn PointField,
    z0: Pt,
    integrands: &dyn VectorIntegrand,
    cfg: &IntegratorConfig,
) -> Result<Cycle, FlowError> {
    let section = start_section(v, z0)?;
    let rhs = AugmentedRhs { field: v, integrands, cap: cfg.blowup_cap };
    let mut y0 = vec![0.0; rhs.dim()];
    y0[0] = z0[0];
    y0[1] = z0[1];
    let hit = integrate_until_return(&rhs, y0, &section, cfg)?;
    Ok(Cycle {
        anchor: z0,
        period: hit.t,
        closure: plane::dist([hit.state[0], hit.state[1]], z0),
        samples: hit.samples,
        quadratures: hit.state[2..].to_vec(),
    })
}

/// `φ_V(t, z)`; negative times integrate the reversed field.
pub fn flow_map(
    v: &dyn PointField,
    z: Pt,
    t: f64,
    cfg: &IntegratorConfig,
) -> Result<Pt, FlowError> {
    flow_map_watched(v, z, t, cfg, None)
}

/// Integrate forward for time `t > 0`, returning the accepted-step samples
/// (including both endpoints).
pub fn flow_trace(
    v: &dyn PointField,
    z: Pt,
    t: f64,
    cfg: &IntegratorConfig,
) -> Result<Vec<(f64, Pt)>, FlowError> {
    let rhs = FieldRhs { field: v };
    let mut samples = vec![(0.0, z)];
    let end = rk::integrate_to(&rhs, vec![z[0], z[1]], t, cfg, |rec| {
        samples.push((rec.t0 + rec.h, [rec.y1[0], rec.y1[1]]));
        Ok(())
    })?;
    samples.push((t, [end[0], end[1]]));
    Ok(samples)
}

/// `φ_W(Δs, z)` along a normalizer orbit, optionally confined to a region.
pub fn advance_w(
    w: &dyn PointField,
    z: Pt,
    ds: f64,
    cfg: &IntegratorConfig,
    region: Option<&Region>,
) -> Result<Pt, FlowError> {
    flow_map_watched(w, z, ds, cfg, region)
}

fn flow_map_watched(
    v: &dyn PointField,
    z: Pt,
    t: f64,
    cfg: &IntegratorConfig,
    region: Option<&Region>,
) -> Result<Pt, FlowError> {
    if t == 0.0 {
        return Ok(z);
    }
    let reversed;
    let field: &dyn PointField = if t < 0.0 {
        reversed = Reversed(v);
        &reversed
    } else {
        v
    };
    let rhs = FieldRhs { field };
    let out = rk::integrate_to(&rhs, vec![z[0], z[1]], t.abs(), cfg, |rec| {
        if let Some(region) = region {
            let zn = [rec.y1[0], rec.y1[1]];
            if !region.contains(zn) {
                return Err(FlowError::RegionExit { z: zn, t: rec.t0 + rec.h });
            }
        }
        Ok(())
    })?;
    Ok([out[0], out[1]])
}

struct Reversed<'a>(&'a dyn PointField);

impl PointField for Reversed<'_> {
    fn at(&self, z: Pt) -> Result<Pt, EvalError> {
        let v = self.0.at(z)?;
        Ok([-v[0], -v[1]])
    }
}

/// Scalar growth rate coupled to a flow: `dm/ds = rate(z)·m`.
pub trait GrowthRate {
    fn rate(&self, z: Pt) -> Result<f64, FlowError>;
}

impl<F: Fn(Pt) -> Result<f64, FlowError>> GrowthRate for F {
    fn rate(&self, z: Pt) -> Result<f64, FlowError> {
        self(z)
    }
}

struct GrowthRhs<'a> {
    field: &'a dyn PointField,
    rate: &'a dyn GrowthRate,
    reverse: bool,
}

impl Rhs for GrowthRhs<'_> {
    fn dim(&self) -> usize {
        3
    }

    fn eval(&self, y: &[f64], dy: &mut [f64]) -> Result<(), FlowError> {
        let z = [y[0], y[1]];
        let v = self.field.at(z)?;
        let r = self.rate.rate(z)?;
        if !v[0].is_finite() || !v[1].is_finite() || !r.is_finite() {
            return Err(FlowError::Eval(EvalError::NonFinite));
        }
        let sign = if self.reverse { -1.0 } else { 1.0 };
        dy[0] = sign * v[0];
        dy[1] = sign * v[1];
        dy[2] = sign * r * y[2];
        Ok(())
    }
}

/// Integrate `z' = W(z)` together with `m' = rate(z)·m`, `m(0) = 1`, over
/// the (possibly negative) parameter interval `s`. Returns `(φ_W(s, z0), m)`.
pub fn integrate_with_growth(
    w: &dyn PointField,
    rate: &dyn GrowthRate,
    z0: Pt,
    s: f64,
    cfg: &IntegratorConfig,
) -> Result<(Pt, f64), FlowError> {
    if s == 0.0 {
        return Ok((z0, 1.0));
    }
    let rhs = GrowthRhs { field: w, rate, reverse: s < 0.0 };
    let out = rk::integrate_to(&rhs, vec![z0[0], z0[1], 1.0], s.abs(), cfg, |_| Ok(()))?;
    Ok(([out[0], out[1]], out[2]))
}

/// As [`integrate_with_growth`], stopping at the orbit's closest approach to
/// `target` (a sign change of `(z − target)·W(z)` from negative to
/// positive). Errors with `NoReturn` if no approach within `accept_radius`
/// occurs before `max_time`.
pub fn growth_to_target(
    w: &dyn PointField,
    rate: &dyn GrowthRate,
    z0: Pt,
    target: Pt,
    cfg: &IntegratorConfig,
) -> Result<f64, FlowError> {
    let accept_radius = 1e-5 * (1.0 + plane::norm(target));
    let rhs = GrowthRhs { field: w, rate, reverse: false };
    let mut stepper = rk::Stepper::new(&rhs, cfg, vec![z0[0], z0[1], 1.0])?;
    let mut probe = vec![0.0; 3];
    let approach = |y: &[f64], dy: &[f64]| (y[0] - target[0]) * dy[0] + (y[1] - target[1]) * dy[1];
    loop {
        if stepper.t > cfg.max_time {
            return Err(FlowError::NoReturn { elapsed: stepper.t });
        }
        let rec = stepper.step()?;
        let ga = approach(&rec.y0, &rec.f0);
        let gb = approach(&rec.y1, &rec.f1);
        // also accept an endpoint already within tolerance (target = anchor)
        if plane::dist([rec.y1[0], rec.y1[1]], target) <= accept_radius {
            return Ok(rec.y1[2]);
        }
        if !(ga < 0.0 && gb >= 0.0) {
            continue;
        }
        let (mut lo, mut hi, mut glo) = (0.0, 1.0, ga);
        for _ in 0..120 {
            let mid = 0.5 * (lo + hi);
            rec.interpolate(mid, &mut probe);
            // derivative of the Hermite polynomial for the velocity
            let dz = hermite_velocity(&rec, mid);
            let gm = (probe[0] - target[0]) * dz[0] + (probe[1] - target[1]) * dz[1];
            if (gm < 0.0) == (glo < 0.0) {
                lo = mid;
                glo = gm;
            } else {
                hi = mid;
            }
        }
        rec.interpolate(0.5 * (lo + hi), &mut probe);
        if plane::dist([probe[0], probe[1]], target) <= accept_radius {
            return Ok(probe[2]);
        }
    }
}

fn hermite_velocity(rec: &rk::StepRecord, theta: f64) -> Pt {
    let t2 = theta * theta;
    let d00 = 6.0 * t2 - 6.0 * theta;
    let d10 = 3.0 * t2 - 4.0 * theta + 1.0;
    let d01 = -6.0 * t2 + 6.0 * theta;
    let d11 = 3.0 * t2 - 2.0 * theta;
    let mut out = [0.0; 2];
    for i in 0..2 {
        out[i] = (d00 * rec.y0[i] + d01 * rec.y1[i]) / rec.h + d10 * rec.f0[i] + d11 * rec.f1[i];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{Arity, ExprAst};
    use crate::systems::VectorField;
    use approx::assert_relative_eq;
    use core::f64::consts::PI;

    fn field(v1: &str, v2: &str) -> VectorField {
        VectorField::new(
            ExprAst::parse(v1, Arity::Two).unwrap(),
            ExprAst::parse(v2, Arity::Two).unwrap(),
        )
    }

    fn harmonic() -> VectorField {
        field("y", "-x")
    }

    #[test]
    fn harmonic_period() {
        let cfg = IntegratorConfig::default();
        let c = integrate_cycle(&harmonic(), [1.0, 0.0], &cfg).unwrap();
        assert_relative_eq!(c.period, 2.0 * PI, epsilon = 1e-8);
        assert!(c.closure < 1e-8);
        assert!(c.samples.len() > 10);
    }

    #[test]
    fn harmonic_flow_quarter_turn() {
        let cfg = IntegratorConfig::default();
        let z = flow_map(&harmonic(), [1.0, 0.0], PI / 2.0, &cfg).unwrap();
        assert_relative_eq!(z[0], 0.0, epsilon = 1e-8);
        assert_relative_eq!(z[1], -1.0, epsilon = 1e-8);
        // closure at t = T
        let z = flow_map(&harmonic(), [1.0, 0.0], 2.0 * PI, &cfg).unwrap();
        assert_relative_eq!(z[0], 1.0, epsilon = 1e-8);
        assert_relative_eq!(z[1], 0.0, epsilon = 1e-8);
    }

    #[test]
    fn duffing_energy_is_conserved() {
        let cfg = IntegratorConfig::default();
        let v = field("y", "-x - 2*x^3");
        let h = ExprAst::parse("(x^2 + x^4 + y^2)/2", Arity::Two).unwrap();
        let c = integrate_cycle(&v, [1.0, 0.0], &cfg).unwrap();
        let h0 = h.eval2([1.0, 0.0]).unwrap();
        for (_, z) in c.samples.iter().step_by(7) {
            assert_relative_eq!(h.eval2(*z).unwrap(), h0, max_relative = 1e-8);
        }
    }

    #[test]
    fn duffing_period_matches_energy_quadrature() {
        // frozen oracle: T = 4∫₀^{π/2} dθ/√(2 + sin²θ) computed independently
        let cfg = IntegratorConfig::default();
        let v = field("y", "-x - 2*x^3");
        let c = integrate_cycle(&v, [1.0, 0.0], &cfg).unwrap();
        assert_relative_eq!(c.period, 4.004309521824425, max_relative = 1e-6);
    }

    #[test]
    fn quadrature_of_one_is_the_period() {
        let cfg = IntegratorConfig::default();
        let one = ScalarIntegrand::new(|_| Ok(1.0));
        let c = cycle_quadratures(&harmonic(), [1.0, 0.0], &one, &cfg).unwrap();
        assert_relative_eq!(c.quadratures[0], c.period, max_relative = 1e-10);
        assert_relative_eq!(c.quadratures[0], 2.0 * PI, epsilon = 1e-8);
    }

    #[test]
    fn quadrature_is_additive() {
        struct Three;
        impl VectorIntegrand for Three {
            fn len(&self) -> usize {
                3
            }
            fn eval(&self, z: Pt, out: &mut [f64]) -> Result<(), FlowError> {
                out[0] = z[0] * z[0];
                out[1] = z[1].cos();
                out[2] = out[0] + out[1];
                Ok(())
            }
        }
        let cfg = IntegratorConfig::default();
        let c = cycle_quadratures(&harmonic(), [1.3, 0.0], &Three, &cfg).unwrap();
        assert_relative_eq!(c.quadratures[2], c.quadratures[0] + c.quadratures[1], epsilon = 1e-10);
    }

    #[test]
    fn radial_exponential_advance() {
        let cfg = IntegratorConfig::default();
        let w = field("x", "y");
        let z = advance_w(&w, [1.0, 0.0], 1.0, &cfg, None).unwrap();
        assert_relative_eq!(z[0], core::f64::consts::E, max_relative = 1e-9);
        assert_relative_eq!(z[1], 0.0, epsilon = 1e-12);
        // homog(k=2) normalizer (x/2, y/2): φ(2) scales by e
        let w = field("x/2", "y/2");
        let z = advance_w(&w, [1.0, 0.0], 2.0, &cfg, None).unwrap();
        assert_relative_eq!(z[0], core::f64::consts::E, max_relative = 1e-9);
        // backwards
        let z = advance_w(&w, [1.0, 0.0], -2.0, &cfg, None).unwrap();
        assert_relative_eq!(z[0], 1.0 / core::f64::consts::E, max_relative = 1e-9);
    }

    #[test]
    fn region_exit_is_reported() {
        let cfg = IntegratorConfig::default();
        let w = field("x", "y");
        let region = Region::Disk { center: [0.0, 0.0], radius: 1.5 };
        let err = advance_w(&w, [1.0, 0.0], 1.0, &cfg, Some(&region)).unwrap_err();
        assert!(matches!(err, FlowError::RegionExit { .. }));
    }

    #[test]
    fn stationary_point_is_an_error() {
        let cfg = IntegratorConfig::default();
        let err = integrate_cycle(&harmonic(), [0.0, 0.0], &cfg).unwrap_err();
        assert!(matches!(err, FlowError::StationaryPoint(_)));
    }

    #[test]
    fn no_return_for_non_cycles() {
        let cfg = IntegratorConfig { max_time: 50.0, ..Default::default() };
        let v = field("x", "y");
        let err = integrate_cycle(&v, [0.1, 0.0], &cfg).unwrap_err();
        assert!(matches!(err, FlowError::NoReturn { .. }));
    }

    #[test]
    fn blowup_cap_fires() {
        let cfg = IntegratorConfig { blowup_cap: 1e3, ..Default::default() };
        let f = ScalarIntegrand::new(|z: Pt| Ok(1.0 / (z[0] * z[0] + 1e-9)));
        let err = cycle_quadratures(&harmonic(), [1.0, 0.0], &f, &cfg).unwrap_err();
        assert!(matches!(err, FlowError::IntegrandBlowup { .. }));
    }

    #[test]
    fn time_reversal_preserves_period() {
        let cfg = IntegratorConfig::default();
        let v = field("y", "-x - 2*x^3");
        let back = field("-y", "x + 2*x^3");
        let a = integrate_cycle(&v, [0.8, 0.0], &cfg).unwrap();
        let b = integrate_cycle(&back, [0.8, 0.0], &cfg).unwrap();
        assert_relative_eq!(a.period, b.period, max_relative = 1e-9);
    }

    #[test]
    fn reanchoring_on_the_cycle_preserves_period() {
        // the period is a first integral: restart from any sample point
        let cfg = IntegratorConfig::default();
        let v = field("y", "-x - 2*x^3");
        let a = integrate_cycle(&v, [1.0, 0.0], &cfg).unwrap();
        let mid = a.samples[a.samples.len() / 3].1;
        let b = integrate_cycle(&v, mid, &cfg).unwrap();
        assert!((a.period - b.period).abs() <= 2e-8);
    }

    #[test]
    fn fifth_order_convergence_on_fixed_steps() {
        // loose tolerances + max_step force a fixed-step regime; halving the
        // step must shrink the period error by at least 8x
        let t_err = |h: f64| {
            let cfg = IntegratorConfig {
                rel_tol: 1e6,
                abs_tol: 1e6,
                max_step: h,
                ..Default::default()
            };
            let c = integrate_cycle(&harmonic(), [1.0, 0.0], &cfg).unwrap();
            (c.period - 2.0 * PI).abs()
        };
        let e1 = t_err(0.05);
        let e2 = t_err(0.025);
        assert!(
            e2 * 8.0 <= e1,
            "expected ≥8x error reduction: e(h)={e1:.3e}, e(h/2)={e2:.3e}"
        );
    }
}
