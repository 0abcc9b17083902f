//! Sample-based certificates: sign conditions on grids, cycles and
//! intervals. Every verdict is `holds-on-samples` semantics — a statement
//! about the evaluated sample set, never a proof — and a violation always
//! carries a concrete witness.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::cofactors::{cofactor_sequence, mu_flow_derivatives, zeta, zeta_lambda};
use crate::expr::{Arity, ExprAst};
use crate::flow::{Cycle, FlowError, IntegratorConfig};
use crate::plane::Pt;
use crate::systems::{build_system, NormalizerPair, Region, SystemError};

use super::{derivative_profile, locate_critical, SGrid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sample {
    Scalar(f64),
    Point(Pt),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    HoldsOnSamples,
    ViolatedAt { at: Sample, value: f64 },
    Inconclusive { reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateKind {
    Monotonicity,
    Convexity,
    AtMostNMinus1,
    Corollary5,
    Corollary8,
    Corollary10,
    Corollary11,
    ConditionB,
    SepHypothesis,
}

impl CertificateKind {
    pub fn name(&self) -> &'static str {
        match self {
            CertificateKind::Monotonicity => "monotonicity",
            CertificateKind::Convexity => "convexity",
            CertificateKind::AtMostNMinus1 => "at-most-n-minus-1",
            CertificateKind::Corollary5 => "corollary-5",
            CertificateKind::Corollary8 => "corollary-8",
            CertificateKind::Corollary10 => "corollary-10",
            CertificateKind::Corollary11 => "corollary-11",
            CertificateKind::ConditionB => "condition-B",
            CertificateKind::SepHypothesis => "sep-hypothesis",
        }
    }
}

/// Outcome of one sampled sign condition.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub samples: usize,
    /// Minimum of the certified quantity over the samples (sign-adjusted so
    /// nonnegative means the condition held with that much room).
    pub margin: f64,
    /// +1 when a nonnegative quantity was certified, −1 for nonpositive,
    /// 0 when not applicable.
    pub direction: i8,
    pub verdict: Verdict,
    /// Auxiliary numbers (inequality sides, discriminants, counts).
    pub details: Vec<(&'static str, f64)>,
}

impl Certificate {
    pub fn holds(&self) -> bool {
        matches!(self.verdict, Verdict::HoldsOnSamples)
    }
}

const SIGN_TOL: f64 = 1e-12;

/// Condition (B) for a scalar field over a family of sampled cycles: the
/// values keep one sign (zeros up to `tol` allowed) and every cycle carries
/// at least one sample that is nonzero beyond `tol`.
pub fn certify_condition_b(
    h: &dyn Fn(Pt) -> Result<f64, SystemError>,
    cycles: &[Cycle],
    tol: f64,
) -> Certificate {
    certify_sign_on_cycles(CertificateKind::ConditionB, h, cycles, tol, Vec::new())
}

/// Monotonicity: condition (B) applied to `μ₁`; a one-signed first
/// derivative leaves no critical orbit between the sampled cycles.
pub fn certify_monotonicity(
    pair: &NormalizerPair,
    cycles: &[Cycle],
    tol: f64,
) -> Certificate {
    let h = |z: Pt| pair.mu(z);
    certify_sign_on_cycles(CertificateKind::Monotonicity, &h, cycles, tol, Vec::new())
}

/// At most `n − 1` critical cycles: condition (B) applied to `μₙ`.
pub fn certify_at_most(
    pair: &NormalizerPair,
    cycles: &[Cycle],
    n: usize,
    tol: f64,
) -> Certificate {
    let h = |z: Pt| cofactor_sequence(pair, z, n).map(|s| s.values[n - 1]);
    let details = alloc::vec![("order", n as f64), ("bound", (n - 1) as f64)];
    certify_sign_on_cycles(CertificateKind::AtMostNMinus1, &h, cycles, tol, details)
}

fn certify_sign_on_cycles(
    kind: CertificateKind,
    h: &dyn Fn(Pt) -> Result<f64, SystemError>,
    cycles: &[Cycle],
    tol: f64,
    details: Vec<(&'static str, f64)>,
) -> Certificate {
    let mut count = 0usize;
    let mut sign = 0i8;
    let mut margin = f64::INFINITY;
    let mut first_signed: Option<(Pt, f64)> = None;
    for cycle in cycles {
        let mut cycle_has_nonzero = false;
        for z in spread_points(cycle, 32) {
            let value = match h(z) {
                Ok(v) => v,
                Err(e) => {
                    return Certificate {
                        kind,
                        samples: count,
                        margin: 0.0,
                        direction: 0,
                        verdict: Verdict::Inconclusive {
                            reason: format!("evaluation failed at ({}, {}): {e}", z[0], z[1]),
                        },
                        details,
                    }
                }
            };
            count += 1;
            let s = if value > tol {
                1
            } else if value < -tol {
                -1
            } else {
                0
            };
            if s != 0 {
                cycle_has_nonzero = true;
                if sign == 0 {
                    sign = s;
                    first_signed = Some((z, value));
                } else if s != sign {
                    return Certificate {
                        kind,
                        samples: count,
                        margin: 0.0,
                        direction: 0,
                        verdict: Verdict::ViolatedAt { at: Sample::Point(z), value },
                        details,
                    };
                }
            }
        }
        if !cycle_has_nonzero {
            return Certificate {
                kind,
                samples: count,
                margin: 0.0,
                direction: 0,
                verdict: Verdict::Inconclusive {
                    reason: format!(
                        "cycle through ({}, {}) has no sample beyond the tolerance",
                        cycle.anchor[0], cycle.anchor[1]
                    ),
                },
                details,
            };
        }
    }
    // margin: smallest |value| in the certified direction over all samples
    let sign_f = f64::from(sign);
    for cycle in cycles {
        for z in spread_points(cycle, 32) {
            if let Ok(v) = h(z) {
                margin = margin.min(sign_f * v);
            }
        }
    }
    let _ = first_signed;
    Certificate {
        kind,
        samples: count,
        margin: if margin.is_finite() { margin } else { 0.0 },
        direction: sign,
        verdict: Verdict::HoldsOnSamples,
        details,
    }
}

/// Up to `n` points spread evenly along a cycle's sample sequence.
fn spread_points(cycle: &Cycle, n: usize) -> Vec<Pt> {
    let m = cycle.samples.len();
    if m == 0 {
        return Vec::new();
    }
    (0..n.min(m)).map(|i| cycle.samples[i * m / n.min(m)].1).collect()
}

/// Which quantity backs a convexity certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvexityRoute {
    /// Sign of `μ₂ = μ² + ∂_W μ` (necessary and sufficient at quadrature
    /// level).
    MuSecond,
    /// Sign of `∂_W μ` alone (the simpler sufficient test; only certifies
    /// convexity, never concavity).
    DwMu,
}

/// Sample the convexity quantity on a tensor grid over the region's
/// projections. One sign throughout certifies W-convexity (+1) or
/// W-concavity (−1, for the `μ₂` route) on the samples.
pub fn certify_convexity(
    pair: &NormalizerPair,
    region: &Region,
    grid: (usize, usize),
    route: ConvexityRoute,
) -> Certificate {
    let kind = CertificateKind::Convexity;
    let ((x0, x1), (y0, y1)) = region.projections();
    let mut count = 0usize;
    let mut min = (f64::INFINITY, [0.0, 0.0]);
    let mut max = (f64::NEG_INFINITY, [0.0, 0.0]);
    for i in 0..grid.0 {
        for j in 0..grid.1 {
            let z = [
                x0 + (x1 - x0) * i as f64 / (grid.0 - 1) as f64,
                y0 + (y1 - y0) * j as f64 / (grid.1 - 1) as f64,
            ];
            if !region.contains(z) {
                continue;
            }
            let value = match route {
                ConvexityRoute::MuSecond => cofactor_sequence(pair, z, 2).map(|s| s.values[1]),
                ConvexityRoute::DwMu => mu_flow_derivatives(pair, z, 2).map(|d| d[1]),
            };
            let value = match value {
                Ok(v) => v,
                Err(e) => {
                    return Certificate {
                        kind,
                        samples: count,
                        margin: 0.0,
                        direction: 0,
                        verdict: Verdict::Inconclusive {
                            reason: format!("evaluation failed at ({}, {}): {e}", z[0], z[1]),
                        },
                        details: Vec::new(),
                    }
                }
            };
            count += 1;
            if value < min.0 {
                min = (value, z);
            }
            if value > max.0 {
                max = (value, z);
            }
        }
    }
    if min.0 >= -SIGN_TOL {
        return Certificate {
            kind,
            samples: count,
            margin: min.0,
            direction: 1,
            verdict: Verdict::HoldsOnSamples,
            details: Vec::new(),
        };
    }
    if max.0 <= SIGN_TOL && matches!(route, ConvexityRoute::MuSecond) {
        return Certificate {
            kind,
            samples: count,
            margin: -max.0,
            direction: -1,
            verdict: Verdict::HoldsOnSamples,
            details: Vec::new(),
        };
    }
    Certificate {
        kind,
        samples: count,
        margin: min.0,
        direction: 0,
        verdict: Verdict::ViolatedAt { at: Sample::Point(min.1), value: min.0 },
        details: Vec::new(),
    }
}

/// The two-homogeneous-parts criterion: for `ξ = ξ_k − ξ_n` with `k < n`,
/// the `μ₂` numerator is a quadratic form in `(ξ_k, ξ_n)` whose discriminant
/// `Δ = (n² − 6nk + k²)(n − k)²` is nonpositive exactly when
/// `(3 − 2√2)n ≤ k ≤ (3 + 2√2)n`; together with `ξ_k > 0` off the origin
/// this certifies W-convexity.
pub fn check_corollary5(
    k: u32,
    n: u32,
    xi_k: &ExprAst,
    xi_n: &ExprAst,
) -> Result<Certificate, SystemError> {
    if k >= n {
        return Err(SystemError::BadParameter(format!(
            "corollary-5 requires k < n, got k = {k}, n = {n}"
        )));
    }
    let (kf, nf) = (f64::from(k), f64::from(n));
    let delta = (nf * nf - 6.0 * nf * kf + kf * kf) * (nf - kf) * (nf - kf);
    let lo = (3.0 - 2.0 * core::f64::consts::SQRT_2) * nf;
    let hi = (3.0 + 2.0 * core::f64::consts::SQRT_2) * nf;
    let in_range = lo <= kf && kf <= hi;
    let mut details = alloc::vec![
        ("delta", delta),
        ("range_lo", lo),
        ("range_hi", hi),
        ("in_range", if in_range { 1.0 } else { 0.0 }),
    ];
    // ξ_k > 0 on the unit circle (positive homogeneous part)
    let mut min_xi = f64::INFINITY;
    let mut min_at = [1.0, 0.0];
    let m = 64;
    for i in 0..m {
        let th = core::f64::consts::TAU * i as f64 / m as f64;
        let z = [crate::math::cos(th), crate::math::sin(th)];
        let v = xi_k.eval2(z)?;
        if v < min_xi {
            min_xi = v;
            min_at = z;
        }
    }
    let _ = xi_n;
    details.push(("min_xi_k", min_xi));
    if min_xi <= 0.0 {
        return Ok(Certificate {
            kind: CertificateKind::Corollary5,
            samples: m,
            margin: min_xi,
            direction: 0,
            verdict: Verdict::ViolatedAt { at: Sample::Point(min_at), value: min_xi },
            details,
        });
    }
    if !in_range || delta > 0.0 {
        return Ok(Certificate {
            kind: CertificateKind::Corollary5,
            samples: m,
            margin: -delta,
            direction: 0,
            verdict: Verdict::Inconclusive {
                reason: format!(
                    "degree pair (k, n) = ({k}, {n}) outside the discriminant range"
                ),
            },
            details,
        });
    }
    Ok(Certificate {
        kind: CertificateKind::Corollary5,
        samples: m,
        margin: -delta,
        direction: 1,
        verdict: Verdict::HoldsOnSamples,
        details,
    })
}

/// Verdict of a one-dimensional potential condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConditionVerdict {
    HoldsOnSamples,
    ViolatedAt(f64),
}

/// Sampled check of condition (C) or (C_λ) over an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialConditionReport {
    pub interval: (f64, f64),
    pub samples: usize,
    pub lambda: Option<f64>,
    /// Minimum of `ζ` (resp. `ζ_λ − λL'⁴`) over the samples.
    pub min_margin: f64,
    pub min_at: f64,
    pub verdict: ConditionVerdict,
}

/// Condition (C): `ζ = 2LL''² − L'²L'' − LL'L''' ≥ 0` on samples.
pub fn check_condition_c(
    l: &ExprAst,
    interval: (f64, f64),
    samples: usize,
) -> Result<PotentialConditionReport, SystemError> {
    condition_scan(l, interval, samples, None)
}

/// Condition (C_λ): `2L²L''² + LL'²L'' − L²L'L''' ≥ λL'⁴` on samples.
pub fn check_condition_c_lambda(
    l: &ExprAst,
    interval: (f64, f64),
    lambda: f64,
    samples: usize,
) -> Result<PotentialConditionReport, SystemError> {
    condition_scan(l, interval, samples, Some(lambda))
}

fn condition_scan(
    l: &ExprAst,
    interval: (f64, f64),
    samples: usize,
    lambda: Option<f64>,
) -> Result<PotentialConditionReport, SystemError> {
    assert!(samples >= 2 && interval.1 > interval.0);
    let mut min_margin = f64::INFINITY;
    let mut min_at = interval.0;
    for i in 0..samples {
        let t = interval.0 + (interval.1 - interval.0) * i as f64 / (samples - 1) as f64;
        let v = match lambda {
            None => zeta(l, t)?,
            Some(lam) => zeta_lambda(l, t, lam)?,
        };
        if v < min_margin {
            min_margin = v;
            min_at = t;
        }
    }
    let verdict = if min_margin >= -SIGN_TOL {
        ConditionVerdict::HoldsOnSamples
    } else {
        ConditionVerdict::ViolatedAt(min_at)
    };
    Ok(PotentialConditionReport { interval, samples, lambda, min_margin, min_at, verdict })
}

/// Which case of the two-potential convexity criterion to check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CorollaryEightCase {
    /// Case i): `G` satisfies (C_α), `F` satisfies (C_β), with α + β ≥ 3.
    LambdaSplit { alpha: f64, beta: f64 },
    /// Case ii): both potentials satisfy condition (C).
    PlainC,
}

/// W_s-convexity of a separable system from one-dimensional conditions on
/// its potentials, sampled on the region projections.
pub fn check_corollary8(
    g: &ExprAst,
    f: &ExprAst,
    g_interval: (f64, f64),
    f_interval: (f64, f64),
    case: CorollaryEightCase,
    samples: usize,
) -> Result<Certificate, SystemError> {
    let kind = CertificateKind::Corollary8;
    match case {
        CorollaryEightCase::LambdaSplit { alpha, beta } => {
            if alpha + beta - 3.0 < 0.0 {
                return Ok(Certificate {
                    kind,
                    samples: 0,
                    margin: alpha + beta - 3.0,
                    direction: 0,
                    verdict: Verdict::Inconclusive {
                        reason: format!("case i) needs alpha + beta >= 3, got {}", alpha + beta),
                    },
                    details: alloc::vec![("alpha", alpha), ("beta", beta)],
                });
            }
            let rg = check_condition_c_lambda(g, g_interval, alpha, samples)?;
            let rf = check_condition_c_lambda(f, f_interval, beta, samples)?;
            Ok(combine_condition_reports(kind, &rg, &rf, alloc::vec![
                ("alpha", alpha),
                ("beta", beta),
            ]))
        }
        CorollaryEightCase::PlainC => {
            let rg = check_condition_c(g, g_interval, samples)?;
            let rf = check_condition_c(f, f_interval, samples)?;
            Ok(combine_condition_reports(kind, &rg, &rf, Vec::new()))
        }
    }
}

fn combine_condition_reports(
    kind: CertificateKind,
    rg: &PotentialConditionReport,
    rf: &PotentialConditionReport,
    mut details: Vec<(&'static str, f64)>,
) -> Certificate {
    details.push(("min_margin_g", rg.min_margin));
    details.push(("min_margin_f", rf.min_margin));
    let margin = rg.min_margin.min(rf.min_margin);
    let verdict = match (&rg.verdict, &rf.verdict) {
        (ConditionVerdict::HoldsOnSamples, ConditionVerdict::HoldsOnSamples) => {
            Verdict::HoldsOnSamples
        }
        (ConditionVerdict::ViolatedAt(t), _) | (_, ConditionVerdict::ViolatedAt(t)) => {
            Verdict::ViolatedAt { at: Sample::Scalar(*t), value: margin }
        }
    };
    Certificate {
        kind,
        samples: rg.samples + rf.samples,
        margin,
        direction: 1,
        verdict,
        details,
    }
}

/// The rational-potential family `G = P/(1 + P)`, `P = ax⁴ + bx⁶ + cx⁸`:
/// checks the two coefficient inequalities, then confirms the single
/// critical orbit on the built system's profile.
pub fn check_corollary10(
    a: f64,
    b: f64,
    c: f64,
    cfg: &IntegratorConfig,
) -> Result<Certificate, FlowError> {
    if a < 0.0 || b < 0.0 || c < 0.0 || a * b * c == 0.0 {
        return Err(FlowError::System(SystemError::BadParameter(format!(
            "corollary-10 requires a, b, c >= 0 with abc != 0, got ({a}, {b}, {c})"
        ))));
    }
    let pw = crate::math::powi;
    let lhs1 = 20.0 * pw(a, 4) * c;
    let rhs1 = 267.0 * b * b * a * c
        + 194.0 * a * a * c * c
        + 18.0 * pw(b, 4)
        + 90.0 * pw(a, 6)
        + 219.0 * pw(a, 3) * b * b;
    let lhs2 = 8.0 * pw(a, 3) * c;
    let rhs2 = 40.0 * pw(a, 5) + 99.0 * a * a * b * b;
    let mut details = alloc::vec![
        ("lhs1", lhs1),
        ("rhs1", rhs1),
        ("lhs2", lhs2),
        ("rhs2", rhs2),
    ];
    if lhs1 > rhs1 || lhs2 > rhs2 {
        return Ok(Certificate {
            kind: CertificateKind::Corollary10,
            samples: 0,
            margin: (rhs1 - lhs1).min(rhs2 - lhs2),
            direction: 0,
            verdict: Verdict::Inconclusive {
                reason: String::from("coefficient inequalities do not hold"),
            },
            details,
        });
    }
    let mut params = alloc::collections::BTreeMap::new();
    params.insert(String::from("a"), a);
    params.insert(String::from("b"), b);
    params.insert(String::from("c"), c);
    let built = build_system("rational-potential", &params)?;
    let pair = built.main_pair()?;
    let grid = SGrid::new(built.default_s_range.0, built.default_s_range.1, 33);
    let profile = derivative_profile(&pair, built.anchor, grid, 1, cfg)?;
    let report = locate_critical(&pair, &profile, cfg)?;
    details.push(("critical_orbits", report.count() as f64));
    if report.count() == 1 && report.unresolved.is_empty() {
        details.push(("critical_s", report.orbits[0].s));
        details.push(("critical_period", report.orbits[0].period));
        Ok(Certificate {
            kind: CertificateKind::Corollary10,
            samples: profile.rows.len(),
            margin: (rhs1 - lhs1).min(rhs2 - lhs2),
            direction: 1,
            verdict: Verdict::HoldsOnSamples,
            details,
        })
    } else {
        Ok(Certificate {
            kind: CertificateKind::Corollary10,
            samples: profile.rows.len(),
            margin: 0.0,
            direction: 0,
            verdict: Verdict::Inconclusive {
                reason: format!(
                    "expected exactly one critical orbit on the profile, found {}",
                    report.count()
                ),
            },
            details,
        })
    }
}

/// The two rational potential families behind the convexity corollary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cor11Family {
    /// `L = 1/(a + bt⁴ + ct⁸)`, inequality `5b² ≤ 56ac`.
    J,
    /// `L = at^{4k}/(1 + bt^{2k} + ct^{6k})`,
    /// inequality `2b³k ≤ 108a²ck + 18a²c + b³`.
    Jj { k: u32 },
}

/// Checks the printed coefficient inequality and samples `ζ ≥ 0` for the
/// family potential on the interval.
pub fn check_corollary11(
    family: Cor11Family,
    a: f64,
    b: f64,
    c: f64,
    interval: (f64, f64),
    samples: usize,
) -> Result<Certificate, SystemError> {
    if a <= 0.0 || b <= 0.0 || c <= 0.0 {
        return Err(SystemError::BadParameter(format!(
            "corollary-11 requires a, b, c > 0, got ({a}, {b}, {c})"
        )));
    }
    let (lhs, rhs, l) = match family {
        Cor11Family::J => {
            let l = ExprAst::parse(
                &format!("1/({a} + {b}*t^4 + {c}*t^8)"),
                Arity::One,
            )
            .expect("well-formed family expression");
            (5.0 * b * b, 56.0 * a * c, l)
        }
        Cor11Family::Jj { k } => {
            if k == 0 {
                return Err(SystemError::BadParameter(String::from(
                    "corollary-11 jj) requires a positive integer k",
                )));
            }
            let kf = f64::from(k);
            let l = ExprAst::parse(
                &format!("{a}*t^{}/(1 + {b}*t^{} + {c}*t^{})", 4 * k, 2 * k, 6 * k),
                Arity::One,
            )
            .expect("well-formed family expression");
            (
                2.0 * crate::math::powi(b, 3) * kf,
                108.0 * a * a * c * kf + 18.0 * a * a * c + crate::math::powi(b, 3),
                l,
            )
        }
    };
    let mut details = alloc::vec![("lhs", lhs), ("rhs", rhs)];
    if lhs > rhs {
        return Ok(Certificate {
            kind: CertificateKind::Corollary11,
            samples: 0,
            margin: rhs - lhs,
            direction: 0,
            verdict: Verdict::Inconclusive {
                reason: String::from("coefficient inequality does not hold"),
            },
            details,
        });
    }
    let report = check_condition_c(&l, interval, samples)?;
    details.push(("min_zeta", report.min_margin));
    let verdict = match report.verdict {
        ConditionVerdict::HoldsOnSamples => Verdict::HoldsOnSamples,
        ConditionVerdict::ViolatedAt(t) => {
            Verdict::ViolatedAt { at: Sample::Scalar(t), value: report.min_margin }
        }
    };
    Ok(Certificate {
        kind: CertificateKind::Corollary11,
        samples: report.samples,
        margin: report.min_margin.min(rhs - lhs),
        direction: 1,
        verdict,
        details,
    })
}

/// The regularity hypothesis on a potential: after the canonical shift,
/// `t·L'(t) > 0` on the punctured interval and `L''(0) > 0` (quadratic
/// leading order, the non-degeneracy the square-root map needs).
pub fn check_sep(
    l: &ExprAst,
    interval: (f64, f64),
    samples: usize,
) -> Result<Certificate, SystemError> {
    let l0 = l.eval1(0.0)?;
    let shifted =
        if l0 == 0.0 { l.clone() } else { l.clone().sub(ExprAst::constant(l0, Arity::One)) };
    let ldd0 = 2.0 * shifted.jet1(0.0, 2)?.coefficient(2);
    let mut details = alloc::vec![("second_derivative_at_0", ldd0)];
    if ldd0 <= SIGN_TOL {
        return Ok(Certificate {
            kind: CertificateKind::SepHypothesis,
            samples: 1,
            margin: ldd0,
            direction: 0,
            verdict: Verdict::ViolatedAt { at: Sample::Scalar(0.0), value: ldd0 },
            details,
        });
    }
    let deriv = shifted.derivative(crate::expr::Var::X);
    let mut margin = f64::INFINITY;
    let mut count = 1usize;
    for i in 0..samples {
        let t = interval.0 + (interval.1 - interval.0) * i as f64 / (samples - 1) as f64;
        if t.abs() < 1e-9 {
            continue;
        }
        let slope = t * deriv.eval1(t)?;
        count += 1;
        if slope <= 0.0 {
            details.push(("slope_violation_at", t));
            return Ok(Certificate {
                kind: CertificateKind::SepHypothesis,
                samples: count,
                margin: slope,
                direction: 0,
                verdict: Verdict::ViolatedAt { at: Sample::Scalar(t), value: slope },
                details,
            });
        }
        margin = margin.min(slope);
    }
    Ok(Certificate {
        kind: CertificateKind::SepHypothesis,
        samples: count,
        margin: margin.min(ldd0),
        direction: 1,
        verdict: Verdict::HoldsOnSamples,
        details,
    })
}

/// Convenience for the family j) closing remark: the `P/(1 + P)` potentials
/// of the rational family fail condition (C) near 0.
pub fn rational_potential_condition_c(
    a: f64,
    b: f64,
    c: f64,
    interval: (f64, f64),
    samples: usize,
) -> Result<PotentialConditionReport, SystemError> {
    let l = ExprAst::parse(
        &format!("({a}*t^4 + {b}*t^6 + {c}*t^8)/(1 + {a}*t^4 + {b}*t^6 + {c}*t^8)"),
        Arity::One,
    )
    .expect("well-formed family expression");
    check_condition_c(&l, interval, samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cofactors;
    use crate::flow;
    use alloc::collections::BTreeMap;
    use approx::assert_relative_eq;

    fn built(name: &str) -> crate::systems::BuiltSystem {
        build_system(name, &BTreeMap::new()).unwrap()
    }

    fn cycles_of(name: &str, anchors: &[Pt]) -> Vec<Cycle> {
        let b = built(name);
        let v = b.vector_field().unwrap();
        let cfg = IntegratorConfig::default();
        anchors.iter().map(|z| flow::integrate_cycle(&v, *z, &cfg).unwrap()).collect()
    }

    #[test]
    fn condition_b_trivial_cases() {
        let cycles = cycles_of("harmonic", &[[0.5, 0.0], [1.0, 0.0]]);
        // h ≡ 1 holds
        let cert = certify_condition_b(&|_| Ok(1.0), &cycles, 1e-12);
        assert!(cert.holds());
        assert_relative_eq!(cert.margin, 1.0);
        // h = x changes sign on a centered cycle
        let cert = certify_condition_b(&|z: Pt| Ok(z[0]), &cycles, 1e-12);
        assert!(matches!(cert.verdict, Verdict::ViolatedAt { .. }));
    }

    #[test]
    fn condition_b_on_sinsq_mu_s2() {
        // μ_s2 ≥ 0 in the central square: Γ''Γ = 2 tan²x (1 + tan²x) ≥ 0
        let b = built("sinsq");
        let s = b.separable().unwrap().clone();
        let cycles = cycles_of("sinsq", &[[0.4, 0.0], [0.8, 0.0], [1.2, 0.0]]);
        let h = move |z: Pt| cofactors::mu_s2_closed(&s, z);
        let cert = certify_condition_b(&h, &cycles, 1e-12);
        assert!(cert.holds(), "verdict: {:?}", cert.verdict);
        assert_eq!(cert.direction, 1);
    }

    #[test]
    fn convexity_certificates() {
        // harmonic: μ₂ ≡ 0, holds with zero margin
        let pair = built("harmonic").main_pair().unwrap();
        let region = Region::Rect { x: (-1.0, 1.0), y: (-1.0, 1.0) };
        let cert = certify_convexity(&pair, &region, (21, 21), ConvexityRoute::MuSecond);
        assert!(cert.holds());
        assert_relative_eq!(cert.margin, 0.0, epsilon = 1e-10);

        // duffing: μ₂ = x⁶(4x⁶ + 16x⁴ + 7x² − 6)/G'⁴ is negative on the band
        // 0 < |x| < 0.66, so the pointwise certificate over |x| ≤ 2 reports
        // a violation there; only the quadratures D₂ = ∫μ₂ dt are positive
        let b = built("duffing");
        let pair = b.main_pair().unwrap();
        let region = Region::Rect { x: (-2.0, 2.0), y: (-2.0, 2.0) };
        let cert = certify_convexity(&pair, &region, (41, 41), ConvexityRoute::MuSecond);
        match cert.verdict {
            Verdict::ViolatedAt { at: Sample::Point(z), value } => {
                assert!(z[0].abs() < 0.7, "witness x = {}", z[0]);
                assert!(value < 0.0);
            }
            other => panic!("expected a pointwise violation, got {other:?}"),
        }
        // away from the band the sign is uniform
        let region = Region::Rect { x: (0.7, 2.0), y: (-2.0, 2.0) };
        let cert = certify_convexity(&pair, &region, (41, 41), ConvexityRoute::MuSecond);
        assert!(cert.holds());
        assert_eq!(cert.direction, 1);
    }

    #[test]
    fn corollary9_numerator_for_duffing() {
        // the quartic numerator is x⁶(4x⁶ + 16x⁴ + 7x² − 6): value 21 at
        // x = 1, negative for 0 < |x| < ~0.66, nonnegative beyond
        let b = built("duffing");
        let g = b.separable().unwrap().g_ast().clone();
        let numerator = |x: f64| {
            let j = g.jet1(x, 3).unwrap();
            let (g0, g1, g2, g3) =
                (j.value(), j.derivative(1), j.derivative(2), j.derivative(3));
            g1.powi(4) - 8.0 * g0 * g1 * g1 * g2 + 12.0 * g0 * g0 * g2 * g2
                - 4.0 * g0 * g0 * g3 * g1
        };
        assert_relative_eq!(numerator(1.0), 21.0, max_relative = 1e-12);
        assert!(numerator(0.3) < 0.0);
        assert!(numerator(-0.6) < 0.0);
        for i in 0..=60 {
            let x = 0.7 + 1.3 * f64::from(i) / 60.0;
            assert!(numerator(x) >= 0.0, "numerator({x}) = {}", numerator(x));
            assert!(numerator(-x) >= 0.0);
        }
    }

    #[test]
    fn reparam_convexity_for_shrinking_xi() {
        // ξ = 1 − ξ₂: μ₂ ≥ 0 on the region where ξ > 0
        let xi = ExprAst::parse("1 - (x^2 + y^2)", Arity::Two).unwrap();
        let region = Region::Disk { center: [0.0, 0.0], radius: 0.95 };
        let pair = crate::systems::build_reparam_center(&xi, &region).unwrap();
        let cert = certify_convexity(&pair, &region, (41, 41), ConvexityRoute::MuSecond);
        assert!(cert.holds(), "verdict: {:?}", cert.verdict);
        assert_eq!(cert.direction, 1);
    }

    #[test]
    fn corollary5_cases() {
        let xi2 = ExprAst::parse("x^2 + y^2", Arity::Two).unwrap();
        let xi4 = ExprAst::parse("-(x^2 + y^2)^2", Arity::Two).unwrap();
        let cert = check_corollary5(2, 4, &xi2, &xi4).unwrap();
        assert!(cert.holds());
        let delta = cert.details.iter().find(|(k, _)| *k == "delta").unwrap().1;
        assert_relative_eq!(delta, -112.0);

        // k = 1, n = 10: below (3 − 2√2)·10 ≈ 1.716, out of range
        let xi1 = ExprAst::parse("sqrt(x^2 + y^2)", Arity::Two).unwrap();
        let xi10 = ExprAst::parse("-(x^2 + y^2)^5", Arity::Two).unwrap();
        let cert = check_corollary5(1, 10, &xi1, &xi10).unwrap();
        assert!(matches!(cert.verdict, Verdict::Inconclusive { .. }));

        // k = n is a precondition violation
        assert!(check_corollary5(3, 3, &xi2, &xi4).is_err());
    }

    #[test]
    fn corollary8_cases() {
        // sinsq: case ii) holds
        let g = ExprAst::parse("sin(t)^2", Arity::One).unwrap();
        let cert = check_corollary8(
            &g,
            &g,
            (-1.5, 1.5),
            (-1.5, 1.5),
            CorollaryEightCase::PlainC,
            201,
        )
        .unwrap();
        assert!(cert.holds(), "verdict: {:?}", cert.verdict);

        // quadratic: ζ ≡ 0, holds with zero margin
        let q = ExprAst::parse("t^2/2", Arity::One).unwrap();
        let cert = check_corollary8(
            &q,
            &q,
            (-1.0, 1.0),
            (-1.0, 1.0),
            CorollaryEightCase::PlainC,
            101,
        )
        .unwrap();
        assert!(cert.holds());
        assert_relative_eq!(cert.margin, 0.0, epsilon = 1e-12);

        // case i) on two quadratics: ratio is exactly 1 each, α + β = 2 < 3
        let cert = check_corollary8(
            &q,
            &q,
            (-1.0, 1.0),
            (-1.0, 1.0),
            CorollaryEightCase::LambdaSplit { alpha: 1.0, beta: 1.0 },
            51,
        )
        .unwrap();
        assert!(matches!(cert.verdict, Verdict::Inconclusive { .. }));
    }

    #[test]
    fn rational_family_fails_condition_c_near_zero() {
        // leading behavior ζ ~ −48a²b·t¹⁰ < 0
        let report = rational_potential_condition_c(1.0, 1.0, 1.0, (-0.5, 0.5), 201).unwrap();
        match report.verdict {
            ConditionVerdict::ViolatedAt(t) => assert!(t.abs() < 0.5),
            other => panic!("expected a violation, got {other:?}"),
        }
        assert!(report.min_margin < 0.0);
    }

    #[test]
    fn corollary10_accepts_ones() {
        let cfg = IntegratorConfig::default();
        let cert = check_corollary10(1.0, 1.0, 1.0, &cfg).unwrap();
        assert!(cert.holds(), "verdict: {:?}", cert.verdict);
        let get = |k: &str| cert.details.iter().find(|(n, _)| *n == k).unwrap().1;
        assert_relative_eq!(get("lhs1"), 20.0);
        assert_relative_eq!(get("rhs1"), 788.0);
        assert_relative_eq!(get("lhs2"), 8.0);
        assert_relative_eq!(get("rhs2"), 139.0);
        assert_relative_eq!(get("critical_orbits"), 1.0);
        assert!(check_corollary10(1.0, 0.0, 1.0, &cfg).is_err());
    }

    #[test]
    fn corollary11_cases() {
        let cert =
            check_corollary11(Cor11Family::J, 1.0, 1.0, 1.0, (-1.5, 1.5), 201).unwrap();
        assert!(cert.holds(), "verdict: {:?}", cert.verdict);
        // 5b² = 80 > 56 = 56ac: inconclusive
        let cert =
            check_corollary11(Cor11Family::J, 1.0, 4.0, 1.0, (-1.5, 1.5), 201).unwrap();
        assert!(matches!(cert.verdict, Verdict::Inconclusive { .. }));
        // jj with k = 1: 2 ≤ 108 + 18 + 1
        let cert =
            check_corollary11(Cor11Family::Jj { k: 1 }, 1.0, 1.0, 1.0, (-1.0, 1.0), 201)
                .unwrap();
        assert!(cert.holds(), "verdict: {:?}", cert.verdict);
    }

    #[test]
    fn sep_hypothesis_cases() {
        let q = ExprAst::parse("t^2/2", Arity::One).unwrap();
        assert!(check_sep(&q, (-1.0, 1.0), 101).unwrap().holds());
        // t⁴ is flat at 0 (degenerate): L''(0) = 0
        let quartic = ExprAst::parse("t^4", Arity::One).unwrap();
        let cert = check_sep(&quartic, (-1.0, 1.0), 101).unwrap();
        assert!(matches!(cert.verdict, Verdict::ViolatedAt { at: Sample::Scalar(t), .. } if t == 0.0));
        // sin² on (−π/2, π/2): L''(0) = 2
        let s = ExprAst::parse("sin(t)^2", Arity::One).unwrap();
        let cert = check_sep(&s, (-1.55, 1.55), 101).unwrap();
        assert!(cert.holds());
        let dd = cert.details.iter().find(|(k, _)| *k == "second_derivative_at_0").unwrap().1;
        assert_relative_eq!(dd, 2.0, max_relative = 1e-12);
    }
}
