//! Closed-form blind-spot probabilities: exact ingredients where they exist, an
//! independent-blocking approximation, and a near-pair approximation that keeps the
//! two nearest blockers exact and averages the rest.
//!
//! Everything is expressed through the visible area `A` seen from the disc centre:
//! a target is blind when fewer than `kv` anchors land in the visible region, so the
//! blind probability given `A` is the lower Poisson tail `P(N < kv)` with mean
//! `lambda * A`. The approximations differ only in how they average that tail over
//! the random blocker field.

use std::f64::consts::{PI, TAU};

use thiserror::Error;

use crate::geometry::{
    sector_overlap_fraction, shadow_angle, shadow_area, EnvParams, GeometryError, PolarPoint,
};
use crate::quad::{integrate_segmented, QuadratureSpec};

/// Errors from model-parameter validation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    /// Model parameters failed validation.
    #[error("invalid model parameters: {reason}")]
    InvalidParams { reason: &'static str },
    /// A geometric precondition failed.
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Full model: blocker environment, anchor intensity, and the visibility quota.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlindSpotParams {
    /// Blocker field and disc.
    pub env: EnvParams,
    /// Mean number of anchors per unit area.
    pub lambda: f64,
    /// Number of visible anchors needed to localize (typically 3).
    pub kv: u32,
}

impl BlindSpotParams {
    /// Validates `lambda >= 0` finite and `kv >= 1`.
    pub fn new(env: EnvParams, lambda: f64, kv: u32) -> Result<Self, AnalyticError> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(AnalyticError::InvalidParams {
                reason: "anchor intensity must be finite and non-negative",
            });
        }
        if kv == 0 {
            return Err(AnalyticError::InvalidParams {
                reason: "at least one visible anchor must be required",
            });
        }
        Ok(Self { env, lambda, kv })
    }
}

/// Blind probability for a fixed visible area: `P(Poisson(lambda * area) < kv)`.
pub fn blind_prob_given_area(area: f64, lambda: f64, kv: u32) -> f64 {
    debug_assert!(area >= 0.0 && lambda >= 0.0);
    if kv == 0 {
        return 0.0;
    }
    let t = lambda * area;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..kv {
        term *= t / k as f64;
        sum += term;
    }
    (-t).exp() * sum
}

/// Blind probability and its first two derivatives with respect to the area.
///
/// The lower Poisson tail telescopes, leaving single-term derivatives:
/// `d/da P(N < kv) = -lambda (lambda a)^(kv-1) e^(-lambda a) / (kv-1)!`.
pub fn blind_prob_given_area_derivs(area: f64, lambda: f64, kv: u32) -> (f64, f64, f64) {
    let g = blind_prob_given_area(area, lambda, kv);
    if kv == 0 {
        return (g, 0.0, 0.0);
    }
    let t = lambda * area;
    let et = (-t).exp();
    // t^(kv-1) / (kv-1)!
    let mut tail = 1.0;
    for k in 1..kv {
        tail *= t / k as f64;
    }
    let dg = -lambda * tail * et;
    let d2g = if kv == 1 {
        lambda * lambda * et
    } else {
        // t^(kv-2) / (kv-2)!
        let mut tail2 = 1.0;
        for k in 1..kv - 1 {
            tail2 *= t / k as f64;
        }
        lambda * lambda * et * tail2 * (t - (kv - 1) as f64) / (kv - 1) as f64
    };
    (g, dg, d2g)
}

/// Mean visible anchor count above which the blind probability, as a function of
/// the area, lies below every chord from the no-visibility point — the regime where
/// averaging the area before applying the Poisson tail can only underestimate.
///
/// Solves `e^(-u) (sum_(k<kv) u^k/k! + u^kv/(kv-1)!) = 1` for its positive root;
/// the classic quota `kv = 3` gives 3.3836. For `kv <= 1` the tail is globally
/// convex and the threshold is 0.
pub fn threshold_mean_count(kv: u32) -> f64 {
    if kv <= 1 {
        return 0.0;
    }
    let h = |u: f64| {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..kv {
            term *= u / k as f64;
            sum += term;
        }
        sum += term * u;
        (-u).exp() * sum - 1.0
    };
    // h rises on (0, kv-1) and falls beyond, so the positive root sits past kv-1.
    let mut lo = (kv - 1) as f64;
    debug_assert!(h(lo) > 0.0);
    let mut hi = 2.0 * lo;
    while h(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Visible area at which the mean visible anchor count reaches the threshold:
/// [`threshold_mean_count`]`(kv) / lambda` (infinite when `lambda` is 0).
pub fn threshold_area(lambda: f64, kv: u32) -> f64 {
    if lambda <= 0.0 {
        return f64::INFINITY;
    }
    threshold_mean_count(kv) / lambda
}

/// Merges interior breakpoints into a sorted segment list over `[lo, hi]`.
fn segment_points(lo: f64, hi: f64, interior: &[f64]) -> Vec<f64> {
    let mut pts = vec![lo, hi];
    for &p in interior {
        if p > lo && p < hi {
            pts.push(p);
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Antiderivative of `rho * atan(c / rho)`.
fn chord_reach_primitive(rho: f64, c: f64) -> f64 {
    if rho == 0.0 {
        return 0.0;
    }
    0.5 * rho * rho * (c / rho).atan() + 0.5 * c * (rho - c * (rho / c).atan())
}

/// Antiderivative of `rho * acos(rho / r)`.
fn horizon_primitive(rho: f64, r: f64) -> f64 {
    let x = (rho / r).clamp(0.0, 1.0);
    0.5 * rho * rho * x.acos() + 0.25 * r * r * (x.asin() - x * (1.0 - x * x).sqrt())
}

/// Area of the set of blocker midpoints that hide a point at distance `point_dist`
/// from the centre, restricted to midpoints farther than `min_radius` out.
///
/// A midpoint at radius `rho` hides the point iff the azimuth offset is within both
/// the chord's angular reach `atan(len/(2 rho))` and the horizon `acos(rho/point_dist)`;
/// integrating the smaller of the two gives the area in closed form.
pub fn blocking_region_area(min_radius: f64, point_dist: f64, env: &EnvParams) -> f64 {
    let c = 0.5 * env.obstacle_len;
    let r = point_dist;
    let lo = min_radius.max(0.0);
    if c == 0.0 || lo >= r {
        return 0.0;
    }
    // The reach is the binding constraint out to sqrt(r^2 - c^2), the horizon beyond.
    let cross = (r * r - c * c).max(0.0).sqrt().clamp(lo, r);
    2.0 * (chord_reach_primitive(cross, c) - chord_reach_primitive(lo, c)
        + horizon_primitive(r, r)
        - horizon_primitive(cross, r))
}

/// Quadrature route for [`blocking_region_area`]; kept as an independent cross-check
/// of the closed form.
pub fn blocking_region_area_quad(
    min_radius: f64,
    point_dist: f64,
    env: &EnvParams,
    spec: &QuadratureSpec,
) -> f64 {
    let c = 0.5 * env.obstacle_len;
    let r = point_dist;
    let lo = min_radius.max(0.0);
    if c == 0.0 || lo >= r {
        return 0.0;
    }
    let cross = (r * r - c * c).max(0.0).sqrt().clamp(lo, r);
    let pts = segment_points(lo, r, &[cross]);
    integrate_segmented(
        |rho| {
            let reach = (c / rho).atan();
            let horizon = (rho / r).clamp(0.0, 1.0).acos();
            2.0 * rho * reach.min(horizon)
        },
        &pts,
        spec,
    )
    .value
}

/// Mean area visible from the disc centre under the blocker field:
/// `2 pi * integral of exp(-lambda0 * blocking_region_area(0, r)) r dr`.
pub fn mean_visible_area(env: &EnvParams, spec: &QuadratureSpec) -> f64 {
    let rr = env.radius;
    if env.lambda0 == 0.0 || env.obstacle_len == 0.0 {
        return PI * rr * rr;
    }
    // Below len/2 the horizon binds everywhere and the blocking area is pi r^2 / 4;
    // the integrand changes character there.
    let pts = segment_points(0.0, rr, &[0.5 * env.obstacle_len]);
    let q = integrate_segmented(
        |r| (-env.lambda0 * blocking_region_area(0.0, r, env)).exp() * r,
        &pts,
        spec,
    );
    TAU * q.value
}

/// Independent-blocking approximation: apply the Poisson tail to the mean visible
/// area. A lower bound on the true blind probability once the mean visible anchor
/// count `lambda * mean_visible_area` clears [`threshold_mean_count`].
pub fn blind_prob_independent(params: &BlindSpotParams, spec: &QuadratureSpec) -> f64 {
    blind_prob_given_area(mean_visible_area(&params.env, spec), params.lambda, params.kv)
}

/// Blind probability when no blockers fall in the disc.
pub fn blind_prob_no_obstacles(params: &BlindSpotParams) -> f64 {
    let rr = params.env.radius;
    blind_prob_given_area(PI * rr * rr, params.lambda, params.kv)
}

/// Blind probability conditioned on exactly one blocker, uniformly placed.
pub fn blind_prob_single_obstacle(params: &BlindSpotParams, spec: &QuadratureSpec) -> f64 {
    let env = &params.env;
    let rr = env.radius;
    let disc = PI * rr * rr;
    let pts = segment_points(0.0, rr, &[env.branch_radius()]);
    let q = integrate_segmented(
        |r| {
            let shadow = shadow_area(PolarPoint::new(r, 0.0), env).expect("radius inside disc");
            blind_prob_given_area(disc - shadow, params.lambda, params.kv) * r
        },
        &pts,
        spec,
    );
    2.0 / (rr * rr) * q.value
}

/// Visible area inside the second-nearest blocker's radius `r2`: the full `r2`-disc
/// minus the shadow the nearest blocker (at `r1`) casts within it. Blockers beyond
/// `r2` cannot reach inside, so this part is exact.
pub fn near_visible_area(r1: f64, r2: f64, env: &EnvParams) -> Result<f64, GeometryError> {
    if r1 > r2 {
        return Err(GeometryError::RadiusOrder { r1, r2 });
    }
    if r2 > env.radius {
        return Err(GeometryError::OutsideDisc { r: r2, radius: env.radius });
    }
    if r2 == 0.0 {
        return Ok(0.0);
    }
    let sub = EnvParams::new(env.lambda0, env.obstacle_len, r2).expect("sub-disc is valid");
    Ok(PI * r2 * r2 - shadow_area(PolarPoint::new(r1, 0.0), &sub)?)
}

/// Mean visible depth beyond radius `r2` per unit azimuth, averaging over the
/// blocker field outside `r2`: `integral over (r2, R) of
/// exp(-lambda0 * blocking_region_area(r2, s)) s ds`.
pub fn mean_clear_span_area(r2: f64, env: &EnvParams, spec: &QuadratureSpec) -> f64 {
    let rr = env.radius;
    if r2 >= rr {
        return 0.0;
    }
    if env.lambda0 == 0.0 || env.obstacle_len == 0.0 {
        return 0.5 * (rr * rr - r2 * r2);
    }
    let c = 0.5 * env.obstacle_len;
    let pts = segment_points(r2, rr, &[(r2 * r2 + c * c).sqrt()]);
    integrate_segmented(
        |s| (-env.lambda0 * blocking_region_area(r2, s, env)).exp() * s,
        &pts,
        spec,
    )
    .value
}

fn near_pair_area_parts(r1: f64, r2: f64, env: &EnvParams) -> Result<(f64, f64, f64), GeometryError> {
    let a_n2 = near_visible_area(r1, r2, env)?;
    let th1 = shadow_angle(PolarPoint::new(r1, 0.0), env)?;
    let th2 = shadow_angle(PolarPoint::new(r2, 0.0), env)?;
    Ok((a_n2, th1, th2))
}

/// Angular width of the azimuths outside both near shadow spans: the full circle
/// minus the nearest span and the non-overlapped part of the second span.
fn clear_span_width(r1: f64, r2: f64, dphi: f64, th1: f64, th2: f64, env: &EnvParams) -> f64 {
    let alpha = sector_overlap_fraction(PolarPoint::new(r1, 0.0), PolarPoint::new(r2, dphi), env)
        .expect("ordered radii inside disc");
    (TAU - th1 - (1.0 - alpha) * th2).max(0.0)
}

fn near_pair_area_with(
    r1: f64,
    r2: f64,
    dphi: f64,
    a_n2: f64,
    th1: f64,
    th2: f64,
    clear_span: f64,
    env: &EnvParams,
) -> f64 {
    a_n2 + clear_span_width(r1, r2, dphi, th1, th2, env) * clear_span
}

/// Mean visible area beyond the second-nearest blocker, over the azimuths outside
/// both near shadow spans, averaging over the blocker field beyond `r2`: the
/// clear-span width times the per-azimuth mean visible depth.
pub fn mean_far_clear_area(
    r1: f64,
    r2: f64,
    dphi: f64,
    env: &EnvParams,
    spec: &QuadratureSpec,
) -> Result<f64, GeometryError> {
    let (_, th1, th2) = near_pair_area_parts(r1, r2, env)?;
    Ok(clear_span_width(r1, r2, dphi, th1, th2, env) * mean_clear_span_area(r2, env, spec))
}

/// Approximate visible area given the two nearest blockers at radii `r1 <= r2` with
/// azimuth separation `dphi`: the exact area inside `r2` plus the mean clear area
/// beyond it over the azimuths outside both near shadow spans.
pub fn near_pair_visible_area(
    r1: f64,
    r2: f64,
    dphi: f64,
    env: &EnvParams,
    spec: &QuadratureSpec,
) -> Result<f64, GeometryError> {
    let (a_n2, th1, th2) = near_pair_area_parts(r1, r2, env)?;
    let clear_span = mean_clear_span_area(r2, env, spec);
    Ok(near_pair_area_with(r1, r2, dphi, a_n2, th1, th2, clear_span, env))
}

/// Integrates `weight(approximate visible area)` against the exact joint law of the
/// two nearest blockers, over scenes with at least two blockers.
///
/// The joint density of the nearest pair collapses to
/// `lambda0^2 exp(-lambda0 pi r2^2)` per position pair (see
/// [`nearest_pair_density`]), leaving a triple integral over `r1 < r2` and the
/// azimuth separation; the separation integrand is smooth except where the two
/// shadow spans start or stop overlapping, which are supplied as breakpoints.
fn near_pair_triple<W: Fn(f64) -> f64>(env: &EnvParams, spec: &QuadratureSpec, weight: W) -> f64 {
    let lam0 = env.lambda0;
    if lam0 == 0.0 {
        return 0.0;
    }
    let rr = env.radius;
    let c = 0.5 * env.obstacle_len;
    let branch = env.branch_radius();
    let mid_spec = spec.tightened(20.0);
    let inner_spec = spec.tightened(200.0);
    let span_spec = spec.tightened(1000.0);
    let outer_pts = segment_points(0.0, rr, &[branch]);
    let outer = integrate_segmented(
        |r1| {
            let mid_pts = segment_points(r1, rr, &[(r1 * r1 + c * c).sqrt(), branch]);
            let middle = integrate_segmented(
                |r2| {
                    let clear_span = mean_clear_span_area(r2, env, &span_spec);
                    let (a_n2, th1, th2) =
                        near_pair_area_parts(r1, r2, env).expect("ordered radii inside disc");
                    let ang_pts = segment_points(
                        0.0,
                        PI,
                        &[0.5 * (th1 - th2).abs(), 0.5 * (th1 + th2)],
                    );
                    let angular = integrate_segmented(
                        |dphi| {
                            weight(near_pair_area_with(
                                r1, r2, dphi, a_n2, th1, th2, clear_span, env,
                            ))
                        },
                        &ang_pts,
                        &inner_spec,
                    );
                    lam0 * lam0 * (-lam0 * PI * r2 * r2).exp() * r2 * 2.0 * angular.value
                },
                &mid_pts,
                &mid_spec,
            );
            r1 * middle.value
        },
        &outer_pts,
        spec,
    );
    TAU * outer.value
}

/// Near-pair approximation to the blind probability: exact terms for zero and one
/// blocker, and for two or more the Poisson tail applied to the two-nearest
/// approximate visible area, integrated against the exact nearest-pair law.
pub fn blind_prob_near_pair(params: &BlindSpotParams, spec: &QuadratureSpec) -> f64 {
    let env = &params.env;
    let m = env.mean_obstacle_count();
    let em = (-m).exp();
    let b0 = blind_prob_no_obstacles(params);
    let b1 = if m > 0.0 { blind_prob_single_obstacle(params, spec) } else { 0.0 };
    let tail = near_pair_triple(env, spec, |area| {
        blind_prob_given_area(area, params.lambda, params.kv)
    });
    (b0 * em + b1 * m * em + tail).clamp(0.0, 1.0)
}

/// Mean of the two-nearest approximate visible area conditioned on at least two
/// blockers; with no blockers the convention is the full disc area.
pub fn mean_visible_area_given_two(env: &EnvParams, spec: &QuadratureSpec) -> f64 {
    let disc = PI * env.radius * env.radius;
    let m = env.mean_obstacle_count();
    let p_two = 1.0 - (-m).exp() * (1.0 + m);
    if p_two <= 0.0 {
        return disc;
    }
    near_pair_triple(env, spec, |area| area) / p_two
}

/// Joint position density of the two nearest blockers at radii `r1 <= r2`, computed
/// two ways: literally, as the Poisson mixture of per-count order-statistic factors
/// (nearest of `k`, then second-nearest given the first), and collapsed to
/// `lambda0^2 exp(-lambda0 pi r2^2)`. Returns `(literal, collapsed)`.
///
/// Requires `r1 < radius` so the conditional factor is well defined.
pub fn nearest_pair_density(r1: f64, r2: f64, env: &EnvParams) -> (f64, f64) {
    assert!(0.0 <= r1 && r1 <= r2 && r2 <= env.radius && r1 < env.radius);
    let rr2 = env.radius * env.radius;
    let disc = PI * rr2;
    let m = env.mean_obstacle_count();
    let past_first = (rr2 - r1 * r1) / rr2;
    let annulus = rr2 - r1 * r1;
    let past_second = (rr2 - r2 * r2) / annulus;
    let kmax = (m + 12.0 * m.sqrt() + 60.0).ceil() as i32;
    let mut literal = 0.0;
    let mut pk = (-m).exp();
    for k in 1..=kmax {
        pk *= m / k as f64;
        if k < 2 {
            continue;
        }
        let nearest = k as f64 / disc * past_first.powi(k - 1);
        let second = (k - 1) as f64 / (PI * annulus) * past_second.powi(k - 2);
        literal += pk * nearest * second;
    }
    let collapsed = env.lambda0 * env.lambda0 * (-env.lambda0 * PI * r2 * r2).exp();
    (literal, collapsed)
}
