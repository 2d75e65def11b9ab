//! Monte-Carlo estimators for blind-spot probability and visible-area statistics.
//!
//! Every replication draws from its own counter-indexed random stream, and
//! reductions are either exact integer sums or sequential folds over an
//! index-ordered buffer, so estimates are bit-identical for any thread count.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::geometry::{
    clear_area_beyond, is_visible, shadow_area, shadow_sector, visible_area, EnvParams, Obstacle,
    PolarPoint,
};
use crate::rng::substream;

/// A Monte-Carlo estimate with its standard error and provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    /// Sample mean.
    pub mean: f64,
    /// Standard error of the mean.
    pub stderr: f64,
    /// Number of replications.
    pub n: u64,
    /// Experiment seed the estimate was computed under.
    pub seed: u64,
}

/// Histogram of a bounded statistic over `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// Lower edge of the first bin.
    pub lo: f64,
    /// Upper edge of the last bin.
    pub hi: f64,
    /// Per-bin counts.
    pub counts: Vec<u64>,
}

impl Histogram {
    /// Width of one bin.
    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.counts.len() as f64
    }

    /// Total number of samples recorded.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// One realization of the blocker and anchor fields, nearest blocker first.
/// Provenance lives with the caller: estimators key each replication's stream
/// by (seed, index) and record the seed on the resulting [`Estimate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    /// Blockers sorted by midpoint radius, ascending.
    pub obstacles: Vec<Obstacle>,
    /// Anchor positions, in draw order.
    pub anchors: Vec<PolarPoint>,
}

impl Scene {
    /// Draws Poisson numbers of blockers and anchors uniformly over the disc.
    ///
    /// The draw order (blocker count, blocker positions, anchor count, anchor
    /// positions) is part of the reproducibility contract; changing it changes
    /// sampled values. A zero `lambda` draws no anchors and consumes no
    /// randomness for them.
    pub fn sample(env: &EnvParams, lambda: f64, rng: &mut ChaCha8Rng) -> Self {
        let count = poisson_count(env.mean_obstacle_count(), rng);
        let mut obstacles: Vec<Obstacle> = (0..count)
            .map(|_| Obstacle::new(uniform_disc_point(env.radius, rng), env))
            .collect();
        obstacles.sort_by(|a, b| a.mid.r.total_cmp(&b.mid.r));
        let anchor_count = poisson_count(lambda * PI * env.radius * env.radius, rng);
        let anchors = (0..anchor_count).map(|_| uniform_disc_point(env.radius, rng)).collect();
        Self { obstacles, anchors }
    }
}

fn poisson_count(mean: f64, rng: &mut ChaCha8Rng) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mean).expect("Poisson mean must be finite and positive");
    dist.sample(rng) as u64
}

fn uniform_disc_point(radius: f64, rng: &mut ChaCha8Rng) -> PolarPoint {
    let u: f64 = rng.random();
    let v: f64 = rng.random();
    PolarPoint::new(radius * u.sqrt(), TAU * v)
}

/// True iff fewer than `kv` of the scene's anchors are visible from the disc centre.
pub fn is_blind(scene: &Scene, env: &EnvParams, kv: u32) -> bool {
    let mut seen = 0u32;
    for &q in &scene.anchors {
        if is_visible(q, &scene.obstacles, env) {
            seen += 1;
            if seen >= kv {
                return false;
            }
        }
    }
    true
}

fn binomial_estimate(hits: u64, reps: u64, seed: u64) -> Estimate {
    let n = reps as f64;
    let p = hits as f64 / n;
    Estimate { mean: p, stderr: (p * (1.0 - p) / n).sqrt(), n: reps, seed }
}

/// Sequential mean and standard error over an index-ordered sample buffer.
fn continuous_estimate(values: &[f64], seed: u64) -> Estimate {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let stderr = if values.len() > 1 {
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        (ss / (n - 1.0) / n).sqrt()
    } else {
        0.0
    };
    Estimate { mean, stderr, n: values.len() as u64, seed }
}

/// Probability that the target is blind: fewer than `kv` visible anchors, averaged
/// over both the blocker field and the anchor field.
pub fn estimate_blind_prob(env: &EnvParams, lambda: f64, kv: u32, reps: u64, seed: u64) -> Estimate {
    let hits: u64 = (0..reps)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, i);
            let scene = Scene::sample(env, lambda, &mut rng);
            is_blind(&scene, env, kv) as u64
        })
        .sum();
    binomial_estimate(hits, reps, seed)
}

/// Mean area visible from the disc centre under the blocker field.
pub fn estimate_mean_visible_area(env: &EnvParams, reps: u64, seed: u64) -> Estimate {
    let values: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, i);
            let scene = Scene::sample(env, 0.0, &mut rng);
            visible_area(&scene.obstacles, env)
        })
        .collect();
    continuous_estimate(&values, seed)
}

/// Histogram of the visible area over `[0, pi * radius^2]`.
pub fn visible_area_histogram(env: &EnvParams, reps: u64, bins: usize, seed: u64) -> Histogram {
    assert!(bins > 0, "histogram needs at least one bin");
    let hi = PI * env.radius * env.radius;
    let values: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, i);
            let scene = Scene::sample(env, 0.0, &mut rng);
            visible_area(&scene.obstacles, env)
        })
        .collect();
    let mut counts = vec![0u64; bins];
    for v in values {
        let idx = ((v / hi * bins as f64) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    Histogram { lo: 0.0, hi, counts }
}

fn sample_scene_with_two(env: &EnvParams, rng: &mut ChaCha8Rng) -> Scene {
    loop {
        let scene = Scene::sample(env, 0.0, rng);
        if scene.obstacles.len() >= 2 {
            return scene;
        }
    }
}

fn conditional_values<F>(env: &EnvParams, reps: u64, seed: u64, per_scene: F) -> Vec<f64>
where
    F: Fn(&Scene) -> f64 + Sync,
{
    assert!(
        env.mean_obstacle_count() > 0.0,
        "conditioning on two or more blockers requires a positive blocker intensity"
    );
    (0..reps)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, i);
            per_scene(&sample_scene_with_two(env, &mut rng))
        })
        .collect()
}

/// Mean fraction of the visible area lying farther out than the second-nearest
/// blocker, conditioned on at least two blockers.
pub fn estimate_far_visible_fraction(env: &EnvParams, reps: u64, seed: u64) -> Estimate {
    let values = conditional_values(env, reps, seed, |scene| {
        let av = visible_area(&scene.obstacles, env);
        if av <= 0.0 {
            return 0.0;
        }
        let r2 = scene.obstacles[1].mid.r;
        let far = clear_area_beyond(&scene.obstacles, env, r2, &[]);
        (far / av).clamp(0.0, 1.0)
    });
    continuous_estimate(&values, seed)
}

/// Mean share of the shadowed area contributed by blockers beyond the two nearest,
/// conditioned on at least two blockers: how much extra shadow the far field adds
/// over what the two nearest blockers already cast.
pub fn estimate_far_shadow_fraction(env: &EnvParams, reps: u64, seed: u64) -> Estimate {
    let disc = PI * env.radius * env.radius;
    let values = conditional_values(env, reps, seed, |scene| {
        let full = visible_area(&scene.obstacles, env);
        let shadowed = disc - full;
        if shadowed <= 0.0 {
            return 0.0;
        }
        let near2 = visible_area(&scene.obstacles[..2], env);
        ((near2 - full) / shadowed).clamp(0.0, 1.0)
    });
    continuous_estimate(&values, seed)
}

/// Mean of the two-nearest area decomposition, conditioned on at least two blockers:
/// exact visible area inside the second-nearest blocker's radius, plus the visible
/// area beyond it whose azimuth avoids both near shadow spans.
///
/// Its expectation is what the closed-form near-pair approximation integrates, so
/// the two must agree to Monte-Carlo error.
pub fn estimate_two_nearest_mean_area(env: &EnvParams, reps: u64, seed: u64) -> Estimate {
    let values = conditional_values(env, reps, seed, |scene| {
        let near = &scene.obstacles[0];
        let second = &scene.obstacles[1];
        let r2 = second.mid.r;
        let inner = if r2 > 0.0 {
            let inner_env = EnvParams { radius: r2, ..*env };
            PI * r2 * r2 - shadow_area(near.mid, &inner_env).expect("nearest blocker inside")
        } else {
            0.0
        };
        let spans = [
            shadow_sector(near.mid, env).expect("blocker inside disc"),
            shadow_sector(second.mid, env).expect("blocker inside disc"),
        ];
        inner + clear_area_beyond(&scene.obstacles, env, r2, &spans)
    });
    continuous_estimate(&values, seed)
}

/// Mean area that is visible beyond the second-nearest blocker yet lies inside
/// one of the two nearest blockers' azimuthal shadow spans, conditioned on at
/// least two blockers.
///
/// This is exactly the region the near-pair approximation treats as blocked, so
/// its mean measures that approximation's optimistic error on the visible area.
pub fn estimate_vin_area(env: &EnvParams, reps: u64, seed: u64) -> Estimate {
    let values = conditional_values(env, reps, seed, |scene| {
        let r2 = scene.obstacles[1].mid.r;
        let spans = [
            shadow_sector(scene.obstacles[0].mid, env).expect("blocker inside disc"),
            shadow_sector(scene.obstacles[1].mid, env).expect("blocker inside disc"),
        ];
        let all = clear_area_beyond(&scene.obstacles, env, r2, &[]);
        let outside_spans = clear_area_beyond(&scene.obstacles, env, r2, &spans);
        (all - outside_spans).max(0.0)
    });
    continuous_estimate(&values, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(mean_count: f64, len_over_radius: f64) -> EnvParams {
        EnvParams::from_mean_count(mean_count, len_over_radius).unwrap()
    }

    #[test]
    fn scene_sampling_distributions() {
        let z = env(8.0, 0.5);
        let mut radii_sq = Vec::new();
        let mut angles = Vec::new();
        let mut total = 0u64;
        let scenes = 2000u64;
        for i in 0..scenes {
            let mut rng = substream(11, i);
            let s = Scene::sample(&z, 0.0, &mut rng);
            total += s.obstacles.len() as u64;
            for ob in &s.obstacles {
                radii_sq.push(ob.mid.r * ob.mid.r);
                angles.push(ob.mid.phi / TAU);
            }
        }
        // Poisson mean within 4 standard errors.
        let mean = total as f64 / scenes as f64;
        let se = (8.0f64 / scenes as f64).sqrt();
        assert!((mean - 8.0).abs() < 4.0 * se, "count mean {mean}");
        // Squared radius and azimuth fraction are both uniform on [0, 1]:
        // Kolmogorov-Smirnov at the 1% level.
        for sample in [&mut radii_sq, &mut angles] {
            sample.sort_by(f64::total_cmp);
            let n = sample.len() as f64;
            let d = sample
                .iter()
                .enumerate()
                .map(|(k, x)| {
                    let lo = k as f64 / n;
                    let hi = (k + 1) as f64 / n;
                    (x - lo).abs().max((x - hi).abs())
                })
                .fold(0.0, f64::max);
            assert!(d * n.sqrt() < 1.63, "KS statistic {}", d * n.sqrt());
        }
    }

    #[test]
    fn blind_prob_without_anchors_is_one() {
        let z = env(8.0, 0.5);
        let e = estimate_blind_prob(&z, 0.0, 3, 500, 9);
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.stderr, 0.0);
        assert_eq!(e.n, 500);
    }

    #[test]
    fn constructed_scenes_decide_blindness() {
        let z = env(8.0, 1.8);
        let empty = Scene { obstacles: vec![], anchors: vec![] };
        assert!(is_blind(&empty, &z, 3), "no anchors means blind");

        let quota = Scene {
            obstacles: vec![],
            anchors: (0..3).map(|k| PolarPoint::new(0.5, k as f64)).collect(),
        };
        assert!(!is_blind(&quota, &z, 3), "quota met with no blockers");

        // One wide blocker in front of all three anchors.
        let wall = Obstacle::new(PolarPoint::new(0.5, 0.0), &z);
        let hidden = Scene {
            obstacles: vec![wall],
            anchors: vec![
                PolarPoint::new(0.9, -0.3),
                PolarPoint::new(0.9, 0.0),
                PolarPoint::new(0.9, 0.3),
            ],
        };
        assert!(is_blind(&hidden, &z, 3));
        assert!(!is_blind(&hidden, &z, 1) || !is_visible(hidden.anchors[0], &hidden.obstacles, &z));
    }

    #[test]
    fn blind_prob_grows_with_blocking() {
        // More blockers, or longer ones, can only hide more anchors.
        let lambda = 15.0 / PI;
        let sparse = estimate_blind_prob(&env(4.0, 0.5), lambda, 3, 20_000, 31);
        let dense = estimate_blind_prob(&env(8.0, 0.5), lambda, 3, 20_000, 32);
        let slack = 3.0 * (sparse.stderr.powi(2) + dense.stderr.powi(2)).sqrt();
        assert!(dense.mean + slack >= sparse.mean, "{} vs {}", sparse.mean, dense.mean);

        let short = estimate_blind_prob(&env(8.0, 0.3), lambda, 3, 20_000, 33);
        let long = estimate_blind_prob(&env(8.0, 0.8), lambda, 3, 20_000, 34);
        let slack = 3.0 * (short.stderr.powi(2) + long.stderr.powi(2)).sqrt();
        assert!(long.mean + slack >= short.mean, "{} vs {}", short.mean, long.mean);
    }

    #[test]
    fn blind_prob_without_obstacles_is_anchor_count_tail() {
        // With no blockers, blindness is just "fewer than kv anchors drawn":
        // P(N < 3) for N ~ Poisson(4) = e^-4 (1 + 4 + 8) = 0.2381...
        let z = env(0.0, 0.5);
        let lambda = 4.0 / PI;
        let e = estimate_blind_prob(&z, lambda, 3, 40_000, 21);
        let want = (-4.0f64).exp() * (1.0 + 4.0 + 8.0);
        assert!(
            (e.mean - want).abs() < 3.5 * e.stderr.max(1e-4),
            "mean {} want {want} se {}",
            e.mean,
            e.stderr
        );
    }

    #[test]
    fn zero_length_blockers_leave_full_disc_visible() {
        let z = env(8.0, 0.0);
        let e = estimate_mean_visible_area(&z, 200, 5);
        assert!((e.mean - PI).abs() < 1e-9);
        assert!(e.stderr < 1e-9);
    }

    #[test]
    fn estimates_are_identical_across_thread_counts() {
        let z = env(8.0, 0.5);
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| {
                (
                    estimate_blind_prob(&z, 15.0 / PI, 3, 4000, 77),
                    estimate_mean_visible_area(&z, 1500, 77),
                    estimate_far_shadow_fraction(&z, 800, 77),
                    estimate_two_nearest_mean_area(&z, 800, 77),
                )
            })
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a.0.mean.to_bits(), b.0.mean.to_bits());
        assert_eq!(a.0.stderr.to_bits(), b.0.stderr.to_bits());
        assert_eq!(a.1.mean.to_bits(), b.1.mean.to_bits());
        assert_eq!(a.1.stderr.to_bits(), b.1.stderr.to_bits());
        assert_eq!(a.2.mean.to_bits(), b.2.mean.to_bits());
        assert_eq!(a.3.mean.to_bits(), b.3.mean.to_bits());
    }

    #[test]
    fn fractions_stay_in_unit_interval() {
        let z = env(4.0, 0.7);
        let far = estimate_far_visible_fraction(&z, 600, 13);
        let shadow = estimate_far_shadow_fraction(&z, 600, 13);
        for e in [far, shadow] {
            assert!(e.mean >= 0.0 && e.mean <= 1.0, "mean {}", e.mean);
            assert!(e.stderr >= 0.0);
        }
    }

    #[test]
    fn two_nearest_area_bounded_by_disc() {
        let z = env(8.0, 0.5);
        let e = estimate_two_nearest_mean_area(&z, 600, 17);
        assert!(e.mean > 0.0 && e.mean < PI, "mean {}", e.mean);
    }

    #[test]
    fn spanned_visible_area_tracks_blocker_length() {
        // Zero-length blockers cast zero-width spans, so nothing is spanned.
        let e = estimate_vin_area(&env(8.0, 0.0), 400, 19);
        assert!(e.mean.abs() < 1e-12, "mean {}", e.mean);
        // Long blockers leave a strictly positive visible-but-spanned region,
        // and widening the spans can only grow it.
        let mid = estimate_vin_area(&env(8.0, 0.3), 4000, 20);
        let long = estimate_vin_area(&env(8.0, 1.0), 4000, 21);
        assert!(long.mean > 0.0);
        let slack = 3.0 * (mid.stderr.powi(2) + long.stderr.powi(2)).sqrt();
        assert!(long.mean + slack >= mid.mean, "{} vs {}", mid.mean, long.mean);
    }

    #[test]
    fn histogram_counts_all_replications() {
        let z = env(8.0, 0.5);
        let h = visible_area_histogram(&z, 3000, 32, 3);
        assert_eq!(h.total(), 3000);
        assert_eq!(h.counts.len(), 32);
        assert!((h.bin_width() - PI / 32.0).abs() < 1e-12);
    }

    #[test]
    fn histogram_without_blockers_masses_top_bin() {
        let z = env(0.0, 0.5);
        let h = visible_area_histogram(&z, 200, 16, 23);
        assert_eq!(h.counts[15], 200);
        assert!(h.counts[..15].iter().all(|&c| c == 0));
    }
}
