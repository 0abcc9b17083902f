//! Derivative profiles of the period function along normalizer orbits,
//! critical-orbit location, and the sample-based certificates.
//!
//! Every profile row carries the quadrature values `∫μ_j dt` side by side
//! with central finite differences of the period column, so the two
//! independent routes to `∂_W^(j) T` check each other on every run.

mod certify;
mod checks;

use alloc::vec::Vec;

use crate::cofactors::cofactor_sequence;
use crate::flow::{
    self, Cycle, FlowError, IntegratorConfig, VectorIntegrand,
};
use crate::plane::Pt;
use crate::systems::{NormalizerKind, NormalizerPair, PointField};

pub use certify::{
    certify_condition_b, certify_convexity, check_condition_c, check_condition_c_lambda,
    check_corollary10, check_corollary11, check_corollary5, check_corollary8, check_sep,
    Certificate, CertificateKind, ConditionVerdict, ConvexityRoute, Cor11Family,
    CorollaryEightCase, PotentialConditionReport, Sample, Verdict,
};
pub use checks::{
    isochronicity_check, linearization_check, normalizer_invariance_check, CompanionField,
    InvarianceReport, IsochronyReport, LinearizationReport,
};

/// Uniform grid in the normalizer parameter `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SGrid {
    pub start: f64,
    pub end: f64,
    /// Number of rows (at least 2).
    pub steps: usize,
}

impl SGrid {
    pub fn new(start: f64, end: f64, steps: usize) -> Self {
        assert!(steps >= 2 && end > start);
        SGrid { start, end, steps }
    }

    pub fn h(&self) -> f64 {
        (self.end - self.start) / (self.steps - 1) as f64
    }

    pub fn value(&self, i: usize) -> f64 {
        self.start + self.h() * i as f64
    }
}

/// Why the integral columns of a row are absent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RowNote {
    /// A cofactor quadrature hit the blow-up cap (singular normalizer on
    /// this cycle); the period and FD columns are still valid.
    IntegrandBlowup { index: usize },
}

/// One row of a derivative profile.
#[derive(Debug, Clone)]
pub struct ProfileRow {
    pub s: f64,
    pub z: Pt,
    pub period: f64,
    pub closure: f64,
    /// `∫₀ᵀ μ_j dt` for `j = 1..=n`; `None` when the quadrature blew up.
    pub d_int: Vec<Option<f64>>,
    /// Finite differences of the period column (orders 1..=3 where the
    /// stencil fits).
    pub d_fd: Vec<Option<f64>>,
    /// Agreement flags where both routes are present.
    pub agree: Vec<Option<bool>>,
    pub note: Option<RowNote>,
}

/// `T` and its derivatives `D₁..Dₙ` sampled along a `W`-orbit.
#[derive(Debug, Clone)]
pub struct DerivativeProfile {
    pub kind: NormalizerKind,
    pub order: usize,
    pub anchor: Pt,
    pub grid: SGrid,
    pub rows: Vec<ProfileRow>,
}

impl DerivativeProfile {
    /// Largest period in the profile, used as the scale of FD error bounds.
    pub fn period_scale(&self) -> f64 {
        self.rows.iter().fold(1.0_f64, |m, r| m.max(r.period.abs()))
    }

    pub fn all_rows_agree(&self) -> bool {
        self.rows
            .iter()
            .flat_map(|r| r.agree.iter())
            .all(|a| a.unwrap_or(true))
    }
}

/// The cofactor sequence `μ₁..μₙ` as one integrand family: one jet
/// evaluation per point serves all components.
pub struct CofactorIntegrand<'a> {
    pair: &'a NormalizerPair,
    n: usize,
}

impl<'a> CofactorIntegrand<'a> {
    pub fn new(pair: &'a NormalizerPair, n: usize) -> Self {
        assert!(n >= 1);
        CofactorIntegrand { pair, n }
    }
}

impl VectorIntegrand for CofactorIntegrand<'_> {
    fn len(&self) -> usize {
        self.n
    }

    fn eval(&self, z: Pt, out: &mut [f64]) -> Result<(), FlowError> {
        let seq = cofactor_sequence(self.pair, z, self.n)?;
        out.copy_from_slice(&seq.values);
        Ok(())
    }
}

/// Compute `T` and `D₁..Dₙ` along the `W`-orbit of `pair` through `z0`.
///
/// For each grid value of `s` the anchor is advanced along `W`, the cycle
/// through it is integrated with the `μ₁..μₙ` quadratures attached, and the
/// finite-difference oracle is assembled from the period column afterwards
/// (orders 1 and 2 by second-order central stencils, order 3 by the 5-point
/// stencil). Rows whose quadratures hit the blow-up cap keep the period and
/// FD columns, with the integral columns marked absent.
pub fn derivative_profile(
    pair: &NormalizerPair,
    z0: Pt,
    grid: SGrid,
    n: usize,
    cfg: &IntegratorConfig,
) -> Result<DerivativeProfile, FlowError> {
    assert!(n >= 1);
    let w = pair.w();
    let v = pair.v();
    let mut rows = Vec::with_capacity(grid.steps);
    let mut z = flow::advance_w(w, z0, grid.start, cfg, None)?;
    for i in 0..grid.steps {
        let s = grid.value(i);
        if i > 0 {
            z = flow::advance_w(w, z, grid.h(), cfg, None)?;
        }
        let integrand = CofactorIntegrand::new(pair, n);
        let row = match flow::cycle_quadratures(v, z, &integrand, cfg) {
            Ok(cycle) => ProfileRow {
                s,
                z,
                period: cycle.period,
                closure: cycle.closure,
                d_int: cycle.quadratures.iter().map(|q| Some(*q)).collect(),
                d_fd: Vec::new(),
                agree: Vec::new(),
                note: None,
            },
            Err(FlowError::IntegrandBlowup { index, .. }) => {
                let cycle = flow::integrate_cycle(v, z, cfg)?;
                ProfileRow {
                    s,
                    z,
                    period: cycle.period,
                    closure: cycle.closure,
                    d_int: alloc::vec![None; n],
                    d_fd: Vec::new(),
                    agree: Vec::new(),
                    note: Some(RowNote::IntegrandBlowup { index }),
                }
            }
            Err(e) => return Err(e),
        };
        rows.push(row);
    }
    let mut profile =
        DerivativeProfile { kind: pair.kind(), order: n, anchor: z0, grid, rows };
    attach_fd_oracle(&mut profile);
    Ok(profile)
}

/// Central finite differences on the period column, independent of the
/// quadrature route.
///
/// The agreement flag compares the two routes up to the resolution of the
/// stencil: `1e-3` relative, or the truncation estimate `2h²·|D_(q+2)|`
/// (with the higher-derivative magnitude taken from the integral columns
/// and geometrically extrapolated past the computed order) plus the
/// amplified period roundoff `4·(1e-9·max T)/h^q`.
fn attach_fd_oracle(profile: &mut DerivativeProfile) {
    let n = profile.order;
    let h = profile.grid.h();
    let m = profile.rows.len();
    let periods: Vec<f64> = profile.rows.iter().map(|r| r.period).collect();
    let t = |i: usize| periods[i];
    let scale = profile.period_scale();

    // per-column magnitude of the integral route, orders 1..=n
    let mut maxabs = alloc::vec![0.0f64; n];
    for row in &profile.rows {
        for (j, v) in row.d_int.iter().enumerate() {
            if let Some(v) = v {
                maxabs[j] = maxabs[j].max(v.abs());
            }
        }
    }
    let mut rho = 1.0f64;
    for j in 0..n.saturating_sub(1) {
        if maxabs[j] > 1e-300 {
            rho = rho.max(maxabs[j + 1] / maxabs[j]);
        }
    }
    // each ∂_W roughly multiplies magnitudes by the top column's log-slope;
    // this is the only growth information an order-1 profile carries
    let noise_floor = 1e-6 * scale;
    for w in profile.rows.windows(2) {
        if let (Some(a), Some(b)) = (w[0].d_int[n - 1], w[1].d_int[n - 1]) {
            if a.abs() > noise_floor && b.abs() > noise_floor {
                let slope = ((b / a).abs().max(1e-12)).abs();
                let lambda = crate::math::ln(slope).abs() / h;
                rho = rho.max(lambda);
            }
        }
    }
    // |D_(q)| estimate for column index jj = q − 1, extrapolated beyond n
    let mag = |jj: usize| -> f64 {
        if jj < n {
            maxabs[jj]
        } else {
            maxabs[n - 1] * crate::math::powi(rho, (jj - (n - 1)) as i32)
        }
    };

    for i in 0..m {
        let mut fd: Vec<Option<f64>> = alloc::vec![None; n];
        if n >= 1 && i >= 1 && i + 1 < m {
            fd[0] = Some((t(i + 1) - t(i - 1)) / (2.0 * h));
        }
        if n >= 2 && i >= 1 && i + 1 < m {
            fd[1] = Some((t(i + 1) - 2.0 * t(i) + t(i - 1)) / (h * h));
        }
        if n >= 3 && i >= 2 && i + 2 < m {
            fd[2] = Some((-t(i - 2) + 2.0 * t(i - 1) - 2.0 * t(i + 1) + t(i + 2))
                / (2.0 * h * h * h));
        }
        let agree = (0..n)
            .map(|j| match (profile.rows[i].d_int[j], fd[j]) {
                (Some(di), Some(df)) => {
                    let q = (j + 1) as i32;
                    let resolution =
                        2.0 * h * h * mag(j + 2) + 4.0 * (1e-9 * scale) / crate::math::powi(h, q);
                    Some((di - df).abs() <= (1e-3 * di.abs()).max(resolution))
                }
                _ => None,
            })
            .collect();
        profile.rows[i].d_fd = fd;
        profile.rows[i].agree = agree;
    }
}

/// Classification of a located critical orbit by the sign of `D₂`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitClass {
    Min,
    Max,
    Undetermined,
}

#[derive(Debug, Clone)]
pub struct CriticalOrbit {
    pub s: f64,
    pub z: Pt,
    pub period: f64,
    pub bracket: (f64, f64),
    /// `|D₁|` at the refined parameter.
    pub residual: f64,
    pub class: OrbitClass,
}

#[derive(Debug, Clone)]
pub struct CriticalOrbitReport {
    pub orbits: Vec<CriticalOrbit>,
    /// Sign-change clusters that stayed ambiguous after one grid refinement.
    pub unresolved: Vec<(f64, f64)>,
}

impl CriticalOrbitReport {
    pub fn count(&self) -> usize {
        self.orbits.len()
    }
}

fn d1_at(
    pair: &NormalizerPair,
    z0: Pt,
    s: f64,
    cfg: &IntegratorConfig,
) -> Result<(f64, Pt, f64), FlowError> {
    let z = flow::advance_w(pair.w(), z0, s, cfg, None)?;
    let integrand = CofactorIntegrand::new(pair, 1);
    let cycle = flow::cycle_quadratures(pair.v(), z, &integrand, cfg)?;
    Ok((cycle.quadratures[0], z, cycle.period))
}

/// Sign with a noise floor: quadrature values below `eps` count as zero.
fn sgn(v: f64, eps: f64) -> i8 {
    if v > eps {
        1
    } else if v < -eps {
        -1
    } else {
        0
    }
}

/// Collect the indices between which `D₁` changes sign (ignoring noise-level
/// rows in between).
fn sign_changes(values: &[(usize, f64)], eps: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut last: Option<(usize, i8)> = None;
    for &(i, v) in values {
        let s = sgn(v, eps);
        if s == 0 {
            continue;
        }
        if let Some((j, prev)) = last {
            if prev != s {
                out.push((j, i));
            }
        }
        last = Some((i, s));
    }
    out
}

/// Locate the critical orbits of a computed profile: each sign change of
/// the `D₁` column is refined by bisection on `s ↦ ∫₀ᵀ μ₁ dt` and classified
/// by the sign of `D₂` at the root. Sign changes closer than three grid
/// cells are re-resolved once on a 4x finer local grid; clusters that stay
/// ambiguous are reported unresolved rather than double-counted.
pub fn locate_critical(
    pair: &NormalizerPair,
    profile: &DerivativeProfile,
    cfg: &IntegratorConfig,
) -> Result<CriticalOrbitReport, FlowError> {
    assert!(profile.rows.len() >= 3, "critical-orbit location needs at least 3 rows");
    let eps = 1e-11 * profile.period_scale();
    let values: Vec<(usize, f64)> = profile
        .rows
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.d_int[0].map(|v| (i, v)))
        .collect();
    let changes = sign_changes(&values, eps);

    // merge crossings separated by fewer than 3 grid cells
    let mut groups: Vec<Vec<(usize, usize)>> = Vec::new();
    for c in changes {
        match groups.last_mut() {
            Some(g) if c.0 - g.last().unwrap().1 < 3 => g.push(c),
            _ => groups.push(alloc::vec![c]),
        }
    }

    let mut orbits = Vec::new();
    let mut unresolved = Vec::new();
    let z0 = profile.anchor;
    for group in groups {
        let mut brackets: Vec<(f64, f64, f64, f64)> = Vec::new(); // (s_lo, s_hi, d_lo, d_hi)
        if group.len() == 1 {
            let (i, j) = group[0];
            brackets.push((
                profile.grid.value(i),
                profile.grid.value(j),
                profile.rows[i].d_int[0].unwrap(),
                profile.rows[j].d_int[0].unwrap(),
            ));
        } else {
            // one refinement round over the cluster's span
            let lo = profile.grid.value(group[0].0);
            let hi = profile.grid.value(group.last().unwrap().1);
            let steps = 4 * (group.last().unwrap().1 - group[0].0) + 1;
            let mut fine = Vec::with_capacity(steps);
            for i in 0..steps {
                let s = lo + (hi - lo) * i as f64 / (steps - 1) as f64;
                let (d1, _, _) = d1_at(pair, z0, s, cfg)?;
                fine.push((i, s, d1));
            }
            let vals: Vec<(usize, f64)> = fine.iter().map(|&(i, _, d)| (i, d)).collect();
            let fine_changes = sign_changes(&vals, eps);
            let isolated = fine_changes.len() == 1
                || fine_changes.windows(2).all(|w| w[1].0 - w[0].1 >= 3);
            if !isolated {
                unresolved.push((lo, hi));
                continue;
            }
            for (i, j) in fine_changes {
                brackets.push((fine[i].1, fine[j].1, fine[i].2, fine[j].2));
            }
        }
        for (mut s_lo, mut s_hi, mut d_lo, _d_hi) in brackets {
            let target = 1e-8 * (profile.grid.end - profile.grid.start);
            let mut d_mid = d_lo;
            while s_hi - s_lo > target {
                let mid = 0.5 * (s_lo + s_hi);
                let (d, _, _) = d1_at(pair, z0, mid, cfg)?;
                d_mid = d;
                if (d < 0.0) == (d_lo < 0.0) {
                    s_lo = mid;
                    d_lo = d;
                } else {
                    s_hi = mid;
                }
            }
            let s_star = 0.5 * (s_lo + s_hi);
            let z_star = flow::advance_w(pair.w(), z0, s_star, cfg, None)?;
            let integrand = CofactorIntegrand::new(pair, 2);
            let cycle = flow::cycle_quadratures(pair.v(), z_star, &integrand, cfg)?;
            let d2 = cycle.quadratures[1];
            let class = match sgn(d2, eps) {
                1 => OrbitClass::Min,
                -1 => OrbitClass::Max,
                _ => OrbitClass::Undetermined,
            };
            orbits.push(CriticalOrbit {
                s: s_star,
                z: z_star,
                period: cycle.period,
                bracket: (s_lo, s_hi),
                residual: d_mid.abs(),
                class,
            });
        }
    }
    Ok(CriticalOrbitReport { orbits, unresolved })
}

/// Integrate the cycles through a set of anchor points (helper for the
/// condition-(B) certificate and the isochronicity check).
pub fn cycles_through(
    v: &dyn PointField,
    anchors: &[Pt],
    cfg: &IntegratorConfig,
) -> Result<Vec<Cycle>, FlowError> {
    anchors.iter().map(|z| flow::integrate_cycle(v, *z, cfg)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeMap;
    use approx::assert_relative_eq;
    use core::f64::consts::PI;

    fn built(name: &str) -> crate::systems::BuiltSystem {
        crate::systems::build_system(name, &BTreeMap::new()).unwrap()
    }

    #[test]
    fn harmonic_profile_is_flat() {
        let pair = built("harmonic").main_pair().unwrap();
        let cfg = IntegratorConfig::default();
        let profile =
            derivative_profile(&pair, [1.0, 0.0], SGrid::new(0.0, 1.0, 11), 3, &cfg).unwrap();
        for row in &profile.rows {
            assert_relative_eq!(row.period, 2.0 * PI, epsilon = 1e-8);
            for d in row.d_int.iter().flatten() {
                assert!(d.abs() <= 1e-6, "integral derivative {d}");
            }
            for d in row.d_fd.iter().flatten() {
                assert!(d.abs() <= 1e-6, "fd derivative {d}");
            }
        }
        assert!(profile.all_rows_agree());
    }

    #[test]
    fn homog_scaling_profile() {
        // T(s) = T(0)e^{−s}: D₁ = −T, D₂ = +T
        let mut p = BTreeMap::new();
        p.insert(alloc::string::String::from("k"), 2.0);
        let pair = crate::systems::build_system("homog", &p).unwrap().main_pair().unwrap();
        let cfg = IntegratorConfig::default();
        let profile =
            derivative_profile(&pair, [1.0, 0.0], SGrid::new(0.0, 1.0, 21), 2, &cfg).unwrap();
        let t0 = profile.rows[0].period;
        for row in &profile.rows {
            assert_relative_eq!(row.period * (row.s).exp(), t0, max_relative = 1e-6);
            assert_relative_eq!(row.d_int[0].unwrap(), -row.period, max_relative = 1e-6);
            assert_relative_eq!(row.d_int[1].unwrap(), row.period, max_relative = 1e-6);
        }
        assert!(profile.all_rows_agree());
    }

    #[test]
    fn duffing_profile_signs_and_oracle() {
        let pair = built("duffing").main_pair().unwrap();
        let cfg = IntegratorConfig::default();
        let profile =
            derivative_profile(&pair, [1.0, 0.0], SGrid::new(0.0, 1.0, 21), 2, &cfg).unwrap();
        // frozen independent quadrature values at the anchor
        assert_relative_eq!(profile.rows[0].period, 4.004309521824425, max_relative = 1e-8);
        assert_relative_eq!(
            profile.rows[0].d_int[0].unwrap(),
            -1.5684824828770701,
            max_relative = 1e-8
        );
        assert_relative_eq!(
            profile.rows[0].d_int[1].unwrap(),
            0.11887362167628586,
            max_relative = 1e-7
        );
        for row in &profile.rows {
            assert!(row.d_int[0].unwrap() < 0.0);
            assert!(row.d_int[1].unwrap() > 0.0);
        }
        assert!(profile.all_rows_agree());
    }

    #[test]
    fn radial_quartic_critical_orbit() {
        let b = built("radial-quartic");
        let pair = b.main_pair().unwrap();
        let cfg = IntegratorConfig::default();
        // anchor (0.3, 0): s covers r = 0.3·e^s up to ~0.95
        let profile =
            derivative_profile(&pair, [0.3, 0.0], SGrid::new(0.0, 1.15, 24), 2, &cfg).unwrap();
        let report = locate_critical(&pair, &profile, &cfg).unwrap();
        assert_eq!(report.count(), 1);
        let orbit = &report.orbits[0];
        assert_eq!(orbit.class, OrbitClass::Min);
        let r = crate::plane::norm(orbit.z);
        assert_relative_eq!(r, core::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-4);
        assert_relative_eq!(orbit.period, 8.0 * PI, max_relative = 1e-6);
        assert!(report.unresolved.is_empty());
    }

    #[test]
    fn harmonic_has_no_critical_orbits() {
        let pair = built("harmonic").main_pair().unwrap();
        let cfg = IntegratorConfig::default();
        let profile =
            derivative_profile(&pair, [1.0, 0.0], SGrid::new(0.0, 1.0, 11), 1, &cfg).unwrap();
        let report = locate_critical(&pair, &profile, &cfg).unwrap();
        assert_eq!(report.count(), 0);
        assert!(report.unresolved.is_empty());
    }

    #[test]
    fn radial_quartic_closed_form_period() {
        // T(r) = 2π/(r² − r⁴): the reparametrized orbits are circles
        let b = built("radial-quartic");
        let v = b.vector_field().unwrap();
        let cfg = IntegratorConfig::default();
        let c = flow::integrate_cycle(&v, [0.5, 0.0], &cfg).unwrap();
        assert_relative_eq!(c.period, 32.0 * PI / 3.0, max_relative = 1e-6);
    }

    #[test]
    fn cubic_outer_cycle_blows_up_the_quadrature() {
        // outer cycles cross the line x = 1 where Γ diverges: the integral
        // columns must be absent while the period and FD columns survive
        let b = built("cubic");
        let pair = b.main_pair().unwrap();
        let cfg = IntegratorConfig::default();
        let profile =
            derivative_profile(&pair, [-0.5, 0.0], SGrid::new(0.0, 0.2, 5), 1, &cfg).unwrap();
        for row in &profile.rows {
            assert!(matches!(row.note, Some(RowNote::IntegrandBlowup { .. })), "row {}", row.s);
            assert!(row.d_int[0].is_none());
            assert!(row.period > 0.0);
        }
        // interior rows still carry the FD oracle
        assert!(profile.rows[2].d_fd[0].is_some());
    }

    #[test]
    fn cubic_inner_profile_is_clean() {
        let b = built("cubic");
        let pair = b.main_pair().unwrap();
        let cfg = IntegratorConfig::default();
        let profile =
            derivative_profile(&pair, [0.3, 0.0], SGrid::new(0.0, 0.3, 7), 1, &cfg).unwrap();
        for row in &profile.rows {
            assert!(row.note.is_none());
            assert!(row.d_int[0].is_some());
        }
        assert!(profile.all_rows_agree());
    }
}
