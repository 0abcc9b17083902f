//! Structural checks on the separable families: isochronicity of the
//! commuting companion system, linearization by the square-root map, and
//! invariance of critical cycles under a change of normalizer.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::expr::EvalError;
use crate::flow::{self, FlowError, IntegratorConfig};
use crate::math;
use crate::plane::{self, Pt};
use crate::systems::{NormalizerPair, PointField, SeparableSystem, SystemError};

use super::{derivative_profile, locate_critical, CriticalOrbitReport, SGrid};

/// The commuting companion system `x' = Q(y)/P'(x), y' = −P(x)/Q'(y)` as a
/// flow field. Pointwise only: derivative-bearing paths never route through
/// the sign function inside `P`, `Q`.
pub struct CompanionField(pub Arc<SeparableSystem>);

impl PointField for CompanionField {
    fn at(&self, z: Pt) -> Result<Pt, EvalError> {
        self.0.companion_at(z).map_err(|e| match e {
            SystemError::Eval(e) => e,
            _ => EvalError::NonFinite,
        })
    }
}

#[derive(Debug, Clone)]
pub struct IsochronyReport {
    pub periods: Vec<f64>,
    pub mean: f64,
    /// `max |T_i − mean| / mean`.
    pub spread: f64,
}

/// Integrate companion cycles through each sample point; for a system
/// satisfying the quadratic-leading-order hypothesis every one of them has
/// the same period 2π.
pub fn isochronicity_check(
    sys: &Arc<SeparableSystem>,
    points: &[Pt],
    cfg: &IntegratorConfig,
) -> Result<IsochronyReport, FlowError> {
    if !sys.is_second_order() {
        return Err(FlowError::System(SystemError::RequiresSecondOrder));
    }
    let field = CompanionField(sys.clone());
    let mut periods = Vec::with_capacity(points.len());
    for z in points {
        periods.push(flow::integrate_cycle(&field, *z, cfg)?.period);
    }
    let mean = periods.iter().sum::<f64>() / periods.len() as f64;
    let spread =
        periods.iter().fold(0.0_f64, |m, t| m.max((t - mean).abs())) / mean;
    Ok(IsochronyReport { periods, mean, spread })
}

#[derive(Debug, Clone)]
pub struct LinearizationReport {
    /// Max relative drift of `|Ψ|²` along the companion trajectories.
    pub radius_drift: f64,
    /// `|Δarg/Δt + 1|` over one full turn (the image rotates at rate −1).
    pub angular_rate_error: f64,
    /// Max drift of `arg Ψ` along a `W_s`-orbit (the image moves radially).
    pub w_arg_drift: f64,
}

/// Check that the square-root map sends companion trajectories to circles
/// traversed clockwise at unit angular speed, and `W_s`-orbits to rays.
pub fn linearization_check(
    sys: &Arc<SeparableSystem>,
    points: &[Pt],
    duration: f64,
    cfg: &IntegratorConfig,
) -> Result<LinearizationReport, FlowError> {
    if !sys.is_second_order() {
        return Err(FlowError::System(SystemError::RequiresSecondOrder));
    }
    let field = CompanionField(sys.clone());
    let mut radius_drift = 0.0_f64;
    let mut rate_error = 0.0_f64;
    for z in points {
        let trace = flow::flow_trace(&field, *z, duration, cfg)?;
        let psi0 = sys.psi_at(*z)?;
        let r0 = plane::norm2(psi0);
        let mut theta = math::atan2(psi0[1], psi0[0]);
        let mut total = 0.0;
        let mut t_prev = 0.0;
        for (t, zt) in &trace[1..] {
            let psi = sys.psi_at(*zt)?;
            radius_drift = radius_drift.max((plane::norm2(psi) / r0 - 1.0).abs());
            let raw = math::atan2(psi[1], psi[0]);
            let mut step = raw - theta;
            while step > core::f64::consts::PI {
                step -= core::f64::consts::TAU;
            }
            while step < -core::f64::consts::PI {
                step += core::f64::consts::TAU;
            }
            total += step;
            theta = raw;
            t_prev = *t;
        }
        rate_error = rate_error.max((total / t_prev + 1.0).abs());
    }
    // along W_s the image angle is constant
    let mut w_arg_drift = 0.0_f64;
    for z in points {
        let psi0 = sys.psi_at(*z)?;
        let theta0 = math::atan2(psi0[1], psi0[0]);
        let w = crate::systems::Field::SeparableW(sys.clone());
        for i in 1..=8 {
            let s = 0.05 * i as f64;
            let zs = flow::advance_w(&w, *z, s, cfg, None)?;
            let psi = sys.psi_at(zs)?;
            let dt = math::atan2(psi[1], psi[0]) - theta0;
            w_arg_drift = w_arg_drift.max(dt.abs());
        }
    }
    Ok(LinearizationReport { radius_drift, angular_rate_error: rate_error, w_arg_drift })
}

#[derive(Debug, Clone)]
pub struct InvarianceReport {
    pub report_a: CriticalOrbitReport,
    pub report_b: CriticalOrbitReport,
    pub counts_equal: bool,
    /// Critical periods paired in sorted order.
    pub matched: Vec<(f64, f64)>,
    pub max_period_gap: f64,
}

/// A cycle critical under one normalizer is critical under every other:
/// locate the critical orbits through both parametrizations and match them
/// by their (parametrization-independent) periods.
pub fn normalizer_invariance_check(
    pair_a: &NormalizerPair,
    grid_a: SGrid,
    pair_b: &NormalizerPair,
    grid_b: SGrid,
    z0: Pt,
    cfg: &IntegratorConfig,
) -> Result<InvarianceReport, FlowError> {
    let profile_a = derivative_profile(pair_a, z0, grid_a, 2, cfg)?;
    let report_a = locate_critical(pair_a, &profile_a, cfg)?;
    let profile_b = derivative_profile(pair_b, z0, grid_b, 2, cfg)?;
    let report_b = locate_critical(pair_b, &profile_b, cfg)?;
    let mut ta: Vec<f64> = report_a.orbits.iter().map(|o| o.period).collect();
    let mut tb: Vec<f64> = report_b.orbits.iter().map(|o| o.period).collect();
    ta.sort_by(|a, b| a.partial_cmp(b).expect("finite periods"));
    tb.sort_by(|a, b| a.partial_cmp(b).expect("finite periods"));
    let matched: Vec<(f64, f64)> = ta.iter().copied().zip(tb.iter().copied()).collect();
    let max_period_gap =
        matched.iter().fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(InvarianceReport {
        counts_equal: report_a.count() == report_b.count(),
        report_a,
        report_b,
        matched,
        max_period_gap,
    })
}
