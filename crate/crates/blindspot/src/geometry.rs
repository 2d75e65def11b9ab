//! Disc geometry of chord-shaped blockers: shadow sectors, overlap fractions,
//! line-of-sight predicates, and an exact visible-area sweep.
//!
//! The scene is always viewed from the disc centre. Every blocker is a chord of
//! length `obstacle_len` centred on its midpoint and perpendicular to the
//! midpoint's radial direction, so it faces the centre broadside. Shadows are
//! closed sets: a sight line that touches a chord, even at an endpoint, is blocked.

use std::f64::consts::{PI, TAU};

use thiserror::Error;

/// Errors from geometric preconditions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    /// A query point lies outside the disc (or has a negative radius).
    #[error("radius {r} outside disc of radius {radius}")]
    OutsideDisc { r: f64, radius: f64 },
    /// Ordered-pair operations require the first point to be the nearer one.
    #[error("expected r1 <= r2, got r1 = {r1} and r2 = {r2}")]
    RadiusOrder { r1: f64, r2: f64 },
    /// Environment parameters failed validation.
    #[error("invalid environment parameters: {reason}")]
    InvalidParams { reason: &'static str },
}

/// Obstacle-field environment: blocker midpoint intensity, blocker length, disc radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvParams {
    /// Mean number of blocker midpoints per unit area.
    pub lambda0: f64,
    /// Chord length of every blocker.
    pub obstacle_len: f64,
    /// Radius of the observation disc around the target.
    pub radius: f64,
}

impl EnvParams {
    /// Validates `lambda0 >= 0`, `obstacle_len >= 0`, `radius > 0`, all finite.
    pub fn new(lambda0: f64, obstacle_len: f64, radius: f64) -> Result<Self, GeometryError> {
        let invalid = |reason| Err(GeometryError::InvalidParams { reason });
        if !(lambda0 >= 0.0) || !lambda0.is_finite() {
            return invalid("obstacle intensity must be finite and non-negative");
        }
        if !(obstacle_len >= 0.0) || !obstacle_len.is_finite() {
            return invalid("obstacle length must be finite and non-negative");
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return invalid("disc radius must be finite and positive");
        }
        Ok(Self { lambda0, obstacle_len, radius })
    }

    /// Unit-disc environment with the given mean blocker count and length-to-radius ratio.
    pub fn from_mean_count(mean_obstacles: f64, len_over_radius: f64) -> Result<Self, GeometryError> {
        Self::new(mean_obstacles / PI, len_over_radius, 1.0)
    }

    /// Mean number of blockers in the disc, `lambda0 * pi * radius^2`.
    pub fn mean_obstacle_count(&self) -> f64 {
        self.lambda0 * PI * self.radius * self.radius
    }

    /// Midpoint radius at which a blocker's chord starts poking out of the disc:
    /// `sqrt(radius^2 - (obstacle_len/2)^2)`, clamped to zero for very long chords.
    pub fn branch_radius(&self) -> f64 {
        let half = 0.5 * self.obstacle_len;
        (self.radius * self.radius - half * half).max(0.0).sqrt()
    }
}

/// Point in polar coordinates about the disc centre; `phi` is stored in `[0, 2*pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarPoint {
    /// Distance from the disc centre (non-negative).
    pub r: f64,
    /// Azimuth, reduced to `[0, 2*pi)` on construction.
    pub phi: f64,
}

impl PolarPoint {
    /// Builds a point, reducing the azimuth modulo `2*pi`.
    pub fn new(r: f64, phi: f64) -> Self {
        debug_assert!(r >= 0.0 && r.is_finite());
        Self { r, phi: wrap_angle(phi) }
    }

    /// Cartesian coordinates `[x, y]`.
    pub fn to_cartesian(self) -> [f64; 2] {
        let (s, c) = self.phi.sin_cos();
        [self.r * c, self.r * s]
    }
}

/// Reduces an angle to `[0, 2*pi)`.
pub fn wrap_angle(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Reduces an angle to `(-pi, pi]`.
pub fn wrap_signed(phi: f64) -> f64 {
    let w = wrap_angle(phi);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

fn check_in_disc(r: f64, env: &EnvParams) -> Result<(), GeometryError> {
    if r.is_finite() && (0.0..=env.radius).contains(&r) {
        Ok(())
    } else {
        Err(GeometryError::OutsideDisc { r, radius: env.radius })
    }
}

/// Full angular width of the shadow cast by a blocker whose midpoint sits at `p`.
///
/// `2*atan(len/(2 r))` while the chord lies inside the disc, `2*acos(r/radius)`
/// once it pokes out; the branches meet continuously at [`EnvParams::branch_radius`].
/// A midpoint at the centre shadows a half-plane (width `pi`).
pub fn shadow_angle(p: PolarPoint, env: &EnvParams) -> Result<f64, GeometryError> {
    check_in_disc(p.r, env)?;
    if p.r == 0.0 {
        return Ok(if env.obstacle_len > 0.0 { PI } else { 0.0 });
    }
    let theta = if p.r <= env.branch_radius() {
        2.0 * (0.5 * env.obstacle_len / p.r).atan()
    } else {
        2.0 * (p.r / env.radius).clamp(-1.0, 1.0).acos()
    };
    Ok(theta)
}

/// Length of the part of the chord that actually blocks sight lines within the disc:
/// the full `obstacle_len` inside [`EnvParams::branch_radius`], the inscribed width
/// `2*sqrt(radius^2 - r^2)` beyond it.
pub fn blocking_chord_len(p: PolarPoint, env: &EnvParams) -> Result<f64, GeometryError> {
    check_in_disc(p.r, env)?;
    let len = if p.r <= env.branch_radius() {
        env.obstacle_len
    } else {
        2.0 * (env.radius * env.radius - p.r * p.r).max(0.0).sqrt()
    };
    Ok(len)
}

/// Area of the shadow a single blocker at `p` casts inside the disc:
/// circular sector minus the triangle cut off by the chord.
pub fn shadow_area(p: PolarPoint, env: &EnvParams) -> Result<f64, GeometryError> {
    let theta = shadow_angle(p, env)?;
    let chord = blocking_chord_len(p, env)?;
    Ok(0.5 * theta * env.radius * env.radius - 0.5 * p.r * chord)
}

/// Angular extent of one blocker's shadow: width `theta` centred on the blocker
/// azimuth, with wrapped edges `lower = phi - theta/2` and `upper = phi + theta/2`.
///
/// The arc runs counter-clockwise from `lower` to `upper`; when it spans the zero
/// azimuth, `lower > upper`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShadowSector {
    /// Angular width in `[0, pi]`.
    pub theta: f64,
    /// Wrapped start edge of the arc.
    pub lower: f64,
    /// Wrapped end edge of the arc.
    pub upper: f64,
}

impl ShadowSector {
    /// True iff `phi` lies on the closed sector arc.
    pub fn contains(&self, phi: f64) -> bool {
        let phi = wrap_angle(phi);
        if self.lower <= self.upper {
            self.lower <= phi && phi <= self.upper
        } else {
            phi >= self.lower || phi <= self.upper
        }
    }
}

/// Shadow sector of a blocker whose midpoint sits at `p`.
pub fn shadow_sector(p: PolarPoint, env: &EnvParams) -> Result<ShadowSector, GeometryError> {
    let theta = shadow_angle(p, env)?;
    Ok(ShadowSector {
        theta,
        lower: wrap_angle(p.phi - 0.5 * theta),
        upper: wrap_angle(p.phi + 0.5 * theta),
    })
}

/// Signed azimuthal overlap width of two sector arcs; values `<= 0` mean disjoint arcs.
///
/// Exact for arcs of width at most `pi`, except that a narrow arc nested inside a
/// wide one across the zero azimuth can report more than the narrow width, so
/// callers converting to a fraction must clamp from above.
pub fn sector_overlap_width(a: &ShadowSector, b: &ShadowSector) -> f64 {
    let wraps_a = a.lower > a.upper;
    let wraps_b = b.lower > b.upper;
    match (wraps_a, wraps_b) {
        (false, false) => a.upper.min(b.upper) - a.lower.max(b.lower),
        (true, true) => TAU - (a.lower.max(b.lower) - a.upper.min(b.upper)),
        _ => (b.upper - a.lower).max(a.upper - b.lower),
    }
}

/// Fraction of the farther blocker's shadow span that falls inside the nearer one's.
///
/// Requires `p1.r <= p2.r <= radius`. Returns 0 when the farther sector has zero
/// width. The result is clamped to `[0, 1]`: nested arcs give exactly 1, disjoint
/// arcs give exactly 0.
pub fn sector_overlap_fraction(
    p1: PolarPoint,
    p2: PolarPoint,
    env: &EnvParams,
) -> Result<f64, GeometryError> {
    if p1.r > p2.r {
        return Err(GeometryError::RadiusOrder { r1: p1.r, r2: p2.r });
    }
    let near = shadow_sector(p1, env)?;
    let far = shadow_sector(p2, env)?;
    if far.theta == 0.0 {
        return Ok(0.0);
    }
    Ok((sector_overlap_width(&near, &far) / far.theta).clamp(0.0, 1.0))
}

/// Cartesian endpoints of the blocking chord centred on `mid`.
pub fn chord_endpoints(mid: PolarPoint, env: &EnvParams) -> [[f64; 2]; 2] {
    let (s, c) = mid.phi.sin_cos();
    let [cx, cy] = [mid.r * c, mid.r * s];
    // The chord runs along the tangential direction (-sin, cos).
    let h = 0.5 * env.obstacle_len;
    [[cx + h * s, cy - h * c], [cx - h * s, cy + h * c]]
}

/// A chord-shaped blocker, stored with its midpoint and cached endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Obstacle {
    /// Midpoint of the chord, in polar coordinates.
    pub mid: PolarPoint,
    endpoints: [[f64; 2]; 2],
}

impl Obstacle {
    /// Builds a blocker at `mid`, caching its chord endpoints.
    pub fn new(mid: PolarPoint, env: &EnvParams) -> Self {
        Self { mid, endpoints: chord_endpoints(mid, env) }
    }

    /// Cached Cartesian endpoints of the chord.
    pub fn endpoints(&self) -> [[f64; 2]; 2] {
        self.endpoints
    }
}

/// Line of sight from the disc centre to `q`: true iff the sight segment meets no chord.
///
/// Shadows are closed: a point exactly on a chord, or a sight line grazing a chord
/// endpoint, counts as blocked. A degenerate chord through the centre blocks the
/// closed half-plane it faces (and the centre point itself).
pub fn is_visible(q: PolarPoint, obstacles: &[Obstacle], env: &EnvParams) -> bool {
    let target = q.to_cartesian();
    let _ = env;
    obstacles.iter().all(|ob| !blocks_sight(ob, q, target))
}

fn blocks_sight(ob: &Obstacle, q: PolarPoint, target: [f64; 2]) -> bool {
    if ob.mid.r == 0.0 {
        return q.r == 0.0 || wrap_signed(q.phi - ob.mid.phi).cos() > 0.0;
    }
    let [e0, e1] = ob.endpoints;
    segments_intersect([0.0, 0.0], target, e0, e1)
}

/// Same decision as [`is_visible`], computed from shadow-sector inequalities instead
/// of segment intersections; kept as an independent cross-check of the geometry.
pub fn is_visible_sector(q: PolarPoint, obstacles: &[Obstacle], env: &EnvParams) -> bool {
    let half_len = 0.5 * env.obstacle_len;
    for ob in obstacles {
        let d = wrap_signed(q.phi - ob.mid.phi);
        let (s, c) = d.sin_cos();
        if ob.mid.r == 0.0 {
            if q.r == 0.0 || c > 0.0 {
                return false;
            }
            continue;
        }
        if c <= 0.0 || q.r == 0.0 {
            continue;
        }
        // Beyond the chord's plane, and within the chord's angular reach.
        if ob.mid.r <= q.r * c && ob.mid.r * s.abs() <= half_len * c {
            return false;
        }
    }
    true
}

fn orient(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn on_segment(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> bool {
    p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
}

/// Closed segment-segment intersection test via orientation predicates.
fn segments_intersect(p0: [f64; 2], p1: [f64; 2], q0: [f64; 2], q1: [f64; 2]) -> bool {
    let d1 = orient(q0, q1, p0);
    let d2 = orient(q0, q1, p1);
    let d3 = orient(p0, p1, q0);
    let d4 = orient(p0, p1, q1);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(q0, q1, p0))
        || (d2 == 0.0 && on_segment(q0, q1, p1))
        || (d3 == 0.0 && on_segment(p0, p1, q0))
        || (d4 == 0.0 && on_segment(p0, p1, q1))
}

/// Exact area visible from the disc centre given the blockers.
///
/// Sweeps the azimuth over the breakpoints where shadow sectors start and end, and
/// on each piece integrates the squared sight distance analytically for a single
/// nearest blocker; where the nearest blocker changes inside a piece, the piece is
/// bisected down to an angular width of 1e-12. Relative accuracy is ~1e-9 or better.
pub fn visible_area(obstacles: &[Obstacle], env: &EnvParams) -> f64 {
    swept_area(obstacles, env, &[(0.0, TAU)], 0.0)
}

/// Area of the visible region beyond radius `r_min` whose azimuth avoids all
/// `excluded` arcs: integrates `max(d(phi)^2 - r_min^2, 0)/2` over the complement.
pub fn clear_area_beyond(
    obstacles: &[Obstacle],
    env: &EnvParams,
    r_min: f64,
    excluded: &[ShadowSector],
) -> f64 {
    debug_assert!((0.0..=env.radius).contains(&r_min));
    let arcs = complement_arcs(excluded);
    swept_area(obstacles, env, &arcs, r_min)
}

/// Splits the excluded sectors at the zero azimuth, unions them, and returns the
/// complementary arcs within `[0, 2*pi]` as non-wrapping `(lo, hi)` pairs.
fn complement_arcs(excluded: &[ShadowSector]) -> Vec<(f64, f64)> {
    let mut spans: Vec<(f64, f64)> = Vec::new();
    for s in excluded {
        if s.theta <= 0.0 {
            continue;
        }
        if s.lower <= s.upper {
            spans.push((s.lower, s.upper));
        } else {
            spans.push((s.lower, TAU));
            spans.push((0.0, s.upper));
        }
    }
    spans.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for span in spans {
        match merged.last_mut() {
            Some(last) if span.0 <= last.1 => last.1 = last.1.max(span.1),
            _ => merged.push(span),
        }
    }
    let mut arcs = Vec::new();
    let mut cursor = 0.0;
    for (lo, hi) in merged {
        if lo > cursor {
            arcs.push((cursor, lo));
        }
        cursor = cursor.max(hi);
    }
    if cursor < TAU {
        arcs.push((cursor, TAU));
    }
    arcs
}

/// Integrates `(max(d(phi), r_min)^2 - r_min^2)/2` over the given azimuth arcs, where
/// `d(phi)` is the sight distance: nearest chord hit along azimuth `phi`, capped at
/// the disc radius.
fn swept_area(obstacles: &[Obstacle], env: &EnvParams, arcs: &[(f64, f64)], r_min: f64) -> f64 {
    let sectors: Vec<ShadowSector> = obstacles
        .iter()
        .map(|ob| {
            shadow_sector(ob.mid, env).expect("obstacle midpoints must lie inside the disc")
        })
        .collect();

    let mut total = 0.0;
    for &(lo, hi) in arcs {
        if hi <= lo {
            continue;
        }
        let mut cuts = vec![lo, hi];
        for s in &sectors {
            if s.theta <= 0.0 {
                continue;
            }
            for edge in [s.lower, s.upper] {
                if edge > lo && edge < hi {
                    cuts.push(edge);
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let mid = 0.5 * (a + b);
            let active: Vec<usize> = sectors
                .iter()
                .enumerate()
                .filter(|(_, s)| s.theta > 0.0 && s.contains(mid))
                .map(|(i, _)| i)
                .collect();
            total += piece_area(a, b, &active, obstacles, env, r_min);
        }
    }
    total
}

/// Index of the nearest active blocker at azimuth `phi` (None = disc rim) and its distance.
fn nearest_at(phi: f64, active: &[usize], obstacles: &[Obstacle], env: &EnvParams) -> (Option<usize>, f64) {
    let mut best = (None, env.radius);
    for &i in active {
        let mid = obstacles[i].mid;
        let dist = if mid.r == 0.0 {
            0.0
        } else {
            mid.r / wrap_signed(phi - mid.phi).cos()
        };
        if dist < best.1 {
            best = (Some(i), dist);
        }
    }
    best
}

fn piece_area(
    a: f64,
    b: f64,
    active: &[usize],
    obstacles: &[Obstacle],
    env: &EnvParams,
    r_min: f64,
) -> f64 {
    if active.is_empty() {
        let rr = env.radius * env.radius - r_min * r_min;
        return 0.5 * rr.max(0.0) * (b - a);
    }
    let wa = nearest_at(a, active, obstacles, env).0;
    let wb = nearest_at(b, active, obstacles, env).0;
    refine_piece(a, b, wa, wb, active, obstacles, env, r_min)
}

const MIN_PIECE_WIDTH: f64 = 1e-12;
// Upper bound on a piece accepted without splitting; below pi so two sight-distance
// curves can cross at most once inside it.
const MAX_SMOOTH_WIDTH: f64 = 2.0;

#[allow(clippy::too_many_arguments)]
fn refine_piece(
    a: f64,
    b: f64,
    wa: Option<usize>,
    wb: Option<usize>,
    active: &[usize],
    obstacles: &[Obstacle],
    env: &EnvParams,
    r_min: f64,
) -> f64 {
    if b - a < MIN_PIECE_WIDTH {
        // Unresolved blocker change: a trapezoid over this sliver is well below tolerance.
        let da = nearest_at(a, active, obstacles, env).1;
        let db = nearest_at(b, active, obstacles, env).1;
        let ia = (da.max(r_min).powi(2) - r_min * r_min) * 0.5;
        let ib = (db.max(r_min).powi(2) - r_min * r_min) * 0.5;
        return 0.5 * (ia + ib) * (b - a);
    }
    let m = 0.5 * (a + b);
    let wm = nearest_at(m, active, obstacles, env).0;
    if wa == wb && wm == wa && b - a <= MAX_SMOOTH_WIDTH {
        // Guard against a blocker dipping below the candidate between samples.
        let w1 = nearest_at(0.75 * a + 0.25 * b, active, obstacles, env).0;
        let w2 = nearest_at(0.25 * a + 0.75 * b, active, obstacles, env).0;
        if w1 == wa && w2 == wa {
            return winner_area(wa, a, b, obstacles, env, r_min);
        }
    }
    refine_piece(a, m, wa, wm, active, obstacles, env, r_min)
        + refine_piece(m, b, wm, wb, active, obstacles, env, r_min)
}

/// Analytic integral of `(max(d, r_min)^2 - r_min^2)/2` over `[a, b]` when a single
/// blocker (or the rim) is nearest throughout.
fn winner_area(
    winner: Option<usize>,
    a: f64,
    b: f64,
    obstacles: &[Obstacle],
    env: &EnvParams,
    r_min: f64,
) -> f64 {
    let Some(i) = winner else {
        let rr = env.radius * env.radius - r_min * r_min;
        return 0.5 * rr.max(0.0) * (b - a);
    };
    let mid = obstacles[i].mid;
    if mid.r == 0.0 {
        // Sight distance is zero across the whole piece; nothing beyond any floor.
        return 0.0;
    }
    // Offsets relative to the blocker azimuth stay within (-pi/2, pi/2) on the piece.
    let da = wrap_signed(a - mid.phi);
    let db = da + (b - a);
    let segment = |x: f64, y: f64| -> f64 {
        if y <= x {
            return 0.0;
        }
        0.5 * mid.r * mid.r * (y.tan() - x.tan()) - 0.5 * r_min * r_min * (y - x)
    };
    if mid.r >= r_min {
        segment(da, db)
    } else {
        // The sight distance r/cos(offset) falls below r_min within |offset| < cut.
        let cut = (mid.r / r_min).clamp(-1.0, 1.0).acos();
        segment(da, db.min(-cut)) + segment(da.max(cut), db)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// SplitMix64: tiny deterministic generator for test-local sampling.
    struct TestRng(u64);

    impl TestRng {
        fn next_u64(&mut self) -> u64 {
            self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = self.0;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            z ^ (z >> 31)
        }

        fn f64(&mut self) -> f64 {
            (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
        }

        fn disc_point(&mut self, radius: f64) -> PolarPoint {
            let r = radius * self.f64().sqrt();
            PolarPoint::new(r, TAU * self.f64())
        }
    }

    fn env(lambda0: f64, len: f64, radius: f64) -> EnvParams {
        EnvParams::new(lambda0, len, radius).unwrap()
    }

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    /// Hit-or-miss estimate of the visible area: (mean, standard error).
    fn sampled_visible_area(
        obstacles: &[Obstacle],
        env: &EnvParams,
        n: u64,
        rng: &mut TestRng,
    ) -> (f64, f64) {
        let mut hits = 0u64;
        for _ in 0..n {
            if is_visible(rng.disc_point(env.radius), obstacles, env) {
                hits += 1;
            }
        }
        let disc = PI * env.radius * env.radius;
        let p = hits as f64 / n as f64;
        (disc * p, disc * (p * (1.0 - p) / n as f64).sqrt())
    }

    /// Brute-force overlap fraction by classifying equally spaced azimuths.
    fn binned_overlap_fraction(near: &ShadowSector, far: &ShadowSector, bins: u32) -> f64 {
        let mut in_far = 0u64;
        let mut in_both = 0u64;
        for j in 0..bins {
            let phi = (j as f64 + 0.5) * TAU / bins as f64;
            if far.contains(phi) {
                in_far += 1;
                if near.contains(phi) {
                    in_both += 1;
                }
            }
        }
        if in_far == 0 {
            0.0
        } else {
            in_both as f64 / in_far as f64
        }
    }

    #[test]
    fn wrap_helpers() {
        assert_close(wrap_angle(-0.2), TAU - 0.2, 1e-15);
        assert_close(wrap_angle(TAU + 0.3), 0.3, 1e-15);
        assert_eq!(wrap_angle(0.0), 0.0);
        assert!(wrap_angle(-1e-18) < TAU);
        assert_close(wrap_signed(TAU - 0.2), -0.2, 1e-15);
        assert_close(wrap_signed(PI), PI, 0.0);
        assert_close(wrap_signed(-PI), PI, 0.0);
    }

    #[test]
    fn env_params_validation() {
        assert!(EnvParams::new(-1.0, 0.5, 1.0).is_err());
        assert!(EnvParams::new(1.0, -0.5, 1.0).is_err());
        assert!(EnvParams::new(1.0, 0.5, 0.0).is_err());
        assert!(EnvParams::new(f64::NAN, 0.5, 1.0).is_err());
        let z = EnvParams::from_mean_count(8.0, 0.5).unwrap();
        assert_close(z.mean_obstacle_count(), 8.0, 1e-12);
        assert_close(z.lambda0, 8.0 / PI, 1e-15);
        assert_eq!(z.radius, 1.0);
    }

    #[test]
    fn shadow_angle_branches_meet_continuously() {
        for len in [0.1, 0.5, 1.0, 1.5] {
            let z = env(1.0, len, 1.0);
            let rb = z.branch_radius();
            if rb == 0.0 {
                continue;
            }
            let below = shadow_angle(PolarPoint::new(rb * (1.0 - 1e-9), 0.0), &z).unwrap();
            let above = shadow_angle(PolarPoint::new((rb * (1.0 + 1e-9)).min(1.0), 0.0), &z).unwrap();
            assert_close(below, above, 1e-7);
        }
        // At the branch radius for len = radius = 1 both forms give exactly pi/3.
        let z = env(1.0, 1.0, 1.0);
        let theta = shadow_angle(PolarPoint::new(z.branch_radius(), 1.0), &z).unwrap();
        assert_close(theta, PI / 3.0, 1e-12);
    }

    #[test]
    fn shadow_angle_edge_cases() {
        let z = env(1.0, 0.8, 1.0);
        assert_close(shadow_angle(PolarPoint::new(0.0, 0.3), &z).unwrap(), PI, 0.0);
        assert_close(shadow_angle(PolarPoint::new(1.0, 0.3), &z).unwrap(), 0.0, 0.0);
        let flat = env(1.0, 0.0, 1.0);
        assert_eq!(shadow_angle(PolarPoint::new(0.0, 0.0), &flat).unwrap(), 0.0);
        assert_eq!(shadow_angle(PolarPoint::new(0.5, 0.0), &flat).unwrap(), 0.0);
        assert!(shadow_angle(PolarPoint::new(1.2, 0.0), &z).is_err());
    }

    #[test]
    fn shadow_angle_non_increasing_in_radius() {
        let z = env(1.0, 0.7, 1.0);
        let mut last = f64::INFINITY;
        for k in 0..=400 {
            let r = k as f64 / 400.0;
            let theta = shadow_angle(PolarPoint::new(r, 0.0), &z).unwrap();
            assert!(theta <= last + 1e-12, "theta increased at r = {r}");
            last = theta;
        }
    }

    #[test]
    fn blocking_chord_branches() {
        let z = env(1.0, 0.5, 1.0);
        assert_eq!(blocking_chord_len(PolarPoint::new(0.3, 0.0), &z).unwrap(), 0.5);
        let r = 0.99;
        assert_close(
            blocking_chord_len(PolarPoint::new(r, 0.0), &z).unwrap(),
            2.0 * (1.0f64 - r * r).sqrt(),
            1e-15,
        );
        assert_eq!(blocking_chord_len(PolarPoint::new(1.0, 0.0), &z).unwrap(), 0.0);
    }

    #[test]
    fn shadow_area_reference_values() {
        // Frozen: theta = 2*atan(0.625); area = sector theta/2 minus the triangle
        // between the origin and the chord endpoints, r*len/2 = 0.1.
        let z = env(1.0, 0.5, 1.0);
        let a = shadow_area(PolarPoint::new(0.4, 1.1), &z).unwrap();
        assert_close(a, 0.458_599_315_343_562_46, 1e-14);
        // Midpoint at the centre shadows exactly half the disc.
        let a0 = shadow_area(PolarPoint::new(0.0, 0.0), &z).unwrap();
        assert_close(a0, PI / 2.0, 1e-14);
        // Midpoint on the rim shadows nothing.
        let a1 = shadow_area(PolarPoint::new(1.0, 0.0), &z).unwrap();
        assert_close(a1, 0.0, 1e-14);
    }

    #[test]
    fn shadow_area_matches_sampling() {
        let z = env(1.0, 0.5, 1.0);
        let p = PolarPoint::new(0.4, 1.1);
        let ob = [Obstacle::new(p, &z)];
        let mut rng = TestRng(7);
        let (sampled, se) = sampled_visible_area(&ob, &z, 200_000, &mut rng);
        let analytic = PI - shadow_area(p, &z).unwrap();
        assert!((analytic - sampled).abs() <= 3.5 * se, "analytic {analytic} sampled {sampled} se {se}");
    }

    #[test]
    fn sector_wraps_across_zero() {
        let z = env(1.0, 2.0 * 0.5 * 0.3f64.tan(), 1.0); // theta = 0.6 at r = 0.5
        let s = shadow_sector(PolarPoint::new(0.5, 0.1), &z).unwrap();
        assert_close(s.theta, 0.6, 1e-12);
        assert_close(s.lower, TAU - 0.2, 1e-12);
        assert_close(s.upper, 0.4, 1e-12);
        assert!(s.contains(0.0));
        assert!(s.contains(6.2));
        assert!(s.contains(0.39));
        assert!(!s.contains(1.0));
        assert!(!s.contains(PI));
    }

    #[test]
    fn overlap_width_cases() {
        let sec = |l: f64, u: f64| ShadowSector {
            theta: wrap_angle(u - l),
            lower: l,
            upper: u,
        };
        // Plain overlap of non-wrapping arcs.
        assert_close(sector_overlap_width(&sec(0.2, 1.0), &sec(0.8, 1.5)), 0.2, 1e-15);
        // Disjoint arcs give a negative width.
        assert!(sector_overlap_width(&sec(0.2, 1.0), &sec(1.5, 2.0)) < 0.0);
        // Both arcs wrapping: frozen pi/4 for [7pi/4, pi/4] against [15pi/8, pi/8].
        let w = sector_overlap_width(
            &sec(7.0 * PI / 4.0, PI / 4.0),
            &sec(15.0 * PI / 8.0, PI / 8.0),
        );
        assert_close(w, PI / 4.0, 1e-12);
        // Mixed: one wrapping, one not.
        assert_close(sector_overlap_width(&sec(6.0, 0.5), &sec(0.3, 0.9)), 0.2, 1e-12);
    }

    #[test]
    fn overlap_fraction_degenerations() {
        let z = env(1.0, 0.6, 1.0);
        // Same azimuth: the farther (narrower) sector nests inside the nearer one.
        // (Not exactly 1.0: the nested width re-derived from wrapped edges can land
        // an ulp away from the directly computed sector width.)
        let f = sector_overlap_fraction(PolarPoint::new(0.3, 1.0), PolarPoint::new(0.7, 1.0), &z).unwrap();
        assert_close(f, 1.0, 1e-12);
        // Opposite azimuths: disjoint.
        let f = sector_overlap_fraction(PolarPoint::new(0.3, 1.0), PolarPoint::new(0.7, 1.0 + PI), &z).unwrap();
        assert_eq!(f, 0.0);
        // Zero-width far sector.
        let f = sector_overlap_fraction(PolarPoint::new(0.3, 1.0), PolarPoint::new(1.0, 2.0), &z).unwrap();
        assert_eq!(f, 0.0);
        // Wrong ordering is rejected.
        assert!(sector_overlap_fraction(PolarPoint::new(0.7, 1.0), PolarPoint::new(0.3, 1.0), &z).is_err());
    }

    #[test]
    fn overlap_fraction_clamps_nested_wrap() {
        // Near blocker at the centre shadows the half-plane around azimuth 0 (its
        // sector wraps); a narrow far sector just inside that span must give exactly 1
        // even though the raw mixed-case width overshoots.
        let r2 = 0.3;
        let len = 2.0 * r2 * (PI / 8.0).tan();
        let z = env(1.0, len, 1.0);
        let p1 = PolarPoint::new(0.0, 0.0);
        let p2 = PolarPoint::new(r2, PI / 8.0);
        let near = shadow_sector(p1, &z).unwrap();
        let far = shadow_sector(p2, &z).unwrap();
        assert!(near.lower > near.upper, "near sector should wrap");
        assert!(sector_overlap_width(&near, &far) > far.theta, "raw width overshoots");
        let f = sector_overlap_fraction(p1, p2, &z).unwrap();
        assert_eq!(f, 1.0);
        assert_close(binned_overlap_fraction(&near, &far, 1 << 20), 1.0, 1e-3);
    }

    #[test]
    fn overlap_fraction_matches_binned_oracle() {
        let mut rng = TestRng(12345);
        let bins = 1 << 18;
        for _ in 0..60 {
            let len = 0.1 + 1.1 * rng.f64();
            let z = env(1.0, len, 1.0);
            let r2 = 0.05 + 0.85 * rng.f64();
            let r1 = r2 * rng.f64();
            let p1 = PolarPoint::new(r1, TAU * rng.f64());
            let p2 = PolarPoint::new(r2, TAU * rng.f64());
            let frac = sector_overlap_fraction(p1, p2, &z).unwrap();
            let near = shadow_sector(p1, &z).unwrap();
            let far = shadow_sector(p2, &z).unwrap();
            let brute = binned_overlap_fraction(&near, &far, bins);
            assert!(
                (frac - brute).abs() < 1e-3,
                "fraction {frac} vs binned {brute} (r1 {r1}, r2 {r2}, len {len})"
            );
        }
    }

    #[test]
    fn chord_endpoint_positions() {
        let z = env(1.0, 0.4, 1.0);
        let [e0, e1] = chord_endpoints(PolarPoint::new(0.5, 0.0), &z);
        assert_close(e0[0], 0.5, 1e-15);
        assert_close(e0[1], -0.2, 1e-15);
        assert_close(e1[0], 0.5, 1e-15);
        assert_close(e1[1], 0.2, 1e-15);
        // Perpendicularity and length hold at any azimuth.
        let mid = PolarPoint::new(0.6, 2.3);
        let [a, b] = chord_endpoints(mid, &z);
        let chord = [b[0] - a[0], b[1] - a[1]];
        let radial = mid.to_cartesian();
        assert_close(chord[0] * radial[0] + chord[1] * radial[1], 0.0, 1e-15);
        assert_close((chord[0] * chord[0] + chord[1] * chord[1]).sqrt(), 0.4, 1e-15);
    }

    #[test]
    fn visibility_hand_cases() {
        let z = env(1.0, 0.4, 1.0);
        let obs = [Obstacle::new(PolarPoint::new(0.5, 0.0), &z)];
        // Straight behind the chord: blocked.
        assert!(!is_visible(PolarPoint::new(0.8, 0.0), &obs, &z));
        // In front of the chord: visible.
        assert!(is_visible(PolarPoint::new(0.4, 0.0), &obs, &z));
        // Opposite side of the disc: visible.
        assert!(is_visible(PolarPoint::new(0.8, PI), &obs, &z));
        // Exactly on the chord: blocked (closed shadow).
        assert!(!is_visible(PolarPoint::new(0.5, 0.0), &obs, &z));
        // Beyond the chord plane but outside its angular reach: visible.
        assert!(is_visible(PolarPoint::new(0.9, 0.5), &obs, &z));
        // The centre itself is visible when no chord passes through it.
        assert!(is_visible(PolarPoint::new(0.0, 0.0), &obs, &z));
    }

    #[test]
    fn visibility_centre_chord_convention() {
        let z = env(1.0, 0.4, 1.0);
        let obs = [Obstacle::new(PolarPoint::new(0.0, 0.0), &z)];
        // A chord through the centre blocks the open half-plane it faces...
        assert!(!is_visible(PolarPoint::new(0.5, 0.3), &obs, &z));
        assert!(is_visible(PolarPoint::new(0.5, PI - 0.3), &obs, &z));
        // ...and the centre point itself (it lies on the chord).
        assert!(!is_visible(PolarPoint::new(0.0, 0.0), &obs, &z));
        assert!(!is_visible_sector(PolarPoint::new(0.5, 0.3), &obs, &z));
        assert!(is_visible_sector(PolarPoint::new(0.5, PI - 0.3), &obs, &z));
        assert!(!is_visible_sector(PolarPoint::new(0.0, 0.0), &obs, &z));
    }

    #[test]
    fn predicates_agree_on_random_scenes() {
        let mut rng = TestRng(99);
        for _ in 0..300 {
            let len = 0.05 + 1.2 * rng.f64();
            let z = env(1.0, len, 1.0);
            let k = (rng.next_u64() % 9) as usize;
            let obstacles: Vec<Obstacle> =
                (0..k).map(|_| Obstacle::new(rng.disc_point(1.0), &z)).collect();
            for _ in 0..40 {
                let q = rng.disc_point(1.0);
                assert_eq!(
                    is_visible(q, &obstacles, &z),
                    is_visible_sector(q, &obstacles, &z),
                    "disagreement at {q:?} with len {len}"
                );
            }
        }
    }

    #[test]
    fn removing_an_obstacle_never_hides_a_point() {
        let mut rng = TestRng(1234);
        for _ in 0..200 {
            let z = env(1.0, 0.05 + rng.f64(), 1.0);
            let k = 1 + (rng.next_u64() % 6) as usize;
            let obstacles: Vec<Obstacle> =
                (0..k).map(|_| Obstacle::new(rng.disc_point(1.0), &z)).collect();
            let q = rng.disc_point(1.0);
            if is_visible(q, &obstacles, &z) {
                let fewer = &obstacles[..k - 1];
                assert!(is_visible(q, fewer, &z));
            }
        }
    }

    #[test]
    fn visible_area_no_obstacles() {
        let z = env(1.0, 0.5, 1.0);
        assert_close(visible_area(&[], &z), PI, 1e-12);
        let z2 = env(1.0, 0.5, 2.5);
        assert_close(visible_area(&[], &z2), PI * 6.25, 1e-11);
    }

    #[test]
    fn visible_area_single_obstacle_matches_shadow_formula() {
        for (r, len) in [(0.4, 0.5), (0.9, 0.5), (0.2, 1.4), (0.97, 1.0), (0.0, 0.8)] {
            let z = env(1.0, len, 1.0);
            let p = PolarPoint::new(r, 2.0);
            let ob = [Obstacle::new(p, &z)];
            let got = visible_area(&ob, &z);
            let want = PI - shadow_area(p, &z).unwrap();
            assert!(
                (got - want).abs() <= 1e-9 * want.max(1e-3),
                "r {r} len {len}: swept {got} vs formula {want}"
            );
        }
    }

    #[test]
    fn visible_area_disjoint_and_duplicate_obstacles() {
        let z = env(1.0, 0.3, 1.0);
        let p1 = PolarPoint::new(0.5, 0.0);
        let p2 = PolarPoint::new(0.6, PI);
        let sh1 = shadow_area(p1, &z).unwrap();
        let sh2 = shadow_area(p2, &z).unwrap();
        let both = [Obstacle::new(p1, &z), Obstacle::new(p2, &z)];
        assert_close(visible_area(&both, &z), PI - sh1 - sh2, 1e-9);
        // A duplicated blocker must not shadow twice.
        let dup = [Obstacle::new(p1, &z), Obstacle::new(p1, &z)];
        assert_close(visible_area(&dup, &z), PI - sh1, 1e-9);
    }

    #[test]
    fn visible_area_matches_sampling_on_random_scenes() {
        let mut rng = TestRng(2024);
        for case in 0..3 {
            let len = [0.25, 0.6, 1.0][case];
            let z = env(1.0, len, 1.0);
            let k = 3 + (rng.next_u64() % 6) as usize;
            let obstacles: Vec<Obstacle> =
                (0..k).map(|_| Obstacle::new(rng.disc_point(1.0), &z)).collect();
            let swept = visible_area(&obstacles, &z);
            let (sampled, se) = sampled_visible_area(&obstacles, &z, 200_000, &mut rng);
            assert!(
                (swept - sampled).abs() <= 3.5 * se,
                "case {case}: swept {swept} sampled {sampled} se {se}"
            );
        }
    }

    #[test]
    fn visible_area_union_bounds() {
        let mut rng = TestRng(31);
        for _ in 0..40 {
            let z = env(1.0, 0.1 + 1.1 * rng.f64(), 1.0);
            let k = 1 + (rng.next_u64() % 5) as usize;
            let obstacles: Vec<Obstacle> =
                (0..k).map(|_| Obstacle::new(rng.disc_point(1.0), &z)).collect();
            let area = visible_area(&obstacles, &z);
            let shadows: Vec<f64> =
                obstacles.iter().map(|o| shadow_area(o.mid, &z).unwrap()).collect();
            let sum: f64 = shadows.iter().sum();
            let max = shadows.iter().cloned().fold(0.0, f64::max);
            assert!(area >= PI - sum - 1e-9, "area {area} below union bound");
            assert!(area <= PI - max + 1e-9, "area {area} above max-shadow bound");
            assert!(area <= PI + 1e-12);
        }
    }

    #[test]
    fn clear_area_beyond_no_obstacles() {
        let z = env(1.0, 0.5, 1.0);
        let r_min = 0.3;
        let got = clear_area_beyond(&[], &z, r_min, &[]);
        assert_close(got, PI * (1.0 - r_min * r_min), 1e-10);
        // Excluding the whole circle leaves nothing.
        let all = ShadowSector { theta: PI, lower: 0.0, upper: PI };
        let rest = ShadowSector { theta: PI, lower: PI, upper: 0.0 };
        assert_eq!(clear_area_beyond(&[], &z, r_min, &[all, rest]), 0.0);
    }

    #[test]
    fn clear_area_beyond_matches_sampling() {
        let mut rng = TestRng(555);
        let z = env(1.0, 0.7, 1.0);
        let mut obstacles: Vec<Obstacle> =
            (0..4).map(|_| Obstacle::new(rng.disc_point(1.0), &z)).collect();
        obstacles.sort_by(|a, b| a.mid.r.total_cmp(&b.mid.r));
        let r_min = obstacles[1].mid.r;
        let spans = [
            shadow_sector(obstacles[0].mid, &z).unwrap(),
            shadow_sector(obstacles[1].mid, &z).unwrap(),
        ];
        let got = clear_area_beyond(&obstacles, &z, r_min, &spans);
        // Hit-or-miss over the disc with membership test.
        let n = 400_000u64;
        let mut hits = 0u64;
        for _ in 0..n {
            let q = rng.disc_point(1.0);
            if q.r > r_min
                && !spans[0].contains(q.phi)
                && !spans[1].contains(q.phi)
                && is_visible(q, &obstacles, &z)
            {
                hits += 1;
            }
        }
        let p = hits as f64 / n as f64;
        let est = PI * p;
        let se = PI * (p * (1.0 - p) / n as f64).sqrt();
        assert!((got - est).abs() <= 3.5 * se, "swept {got} sampled {est} se {se}");
    }

    #[test]
    fn clear_area_handles_near_blocker_dipping_below_floor() {
        // A single blocker nearer than the floor radius: its sight distance crosses
        // r_min inside its sector, exercising the analytic crossing split.
        let z = env(1.0, 1.2, 1.0);
        let p = PolarPoint::new(0.25, 1.0);
        let obstacles = [Obstacle::new(p, &z)];
        let r_min = 0.5;
        let got = clear_area_beyond(&obstacles, &z, r_min, &[]);
        let mut rng = TestRng(808);
        let n = 400_000u64;
        let mut hits = 0u64;
        for _ in 0..n {
            let q = rng.disc_point(1.0);
            if q.r > r_min && is_visible(q, &obstacles, &z) {
                hits += 1;
            }
        }
        let pr = hits as f64 / n as f64;
        let est = PI * pr;
        let se = PI * (pr * (1.0 - pr) / n as f64).sqrt();
        assert!((got - est).abs() <= 3.5 * se, "swept {got} sampled {est} se {se}");
    }
}
