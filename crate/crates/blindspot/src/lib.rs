//! Blind-spot probability of a time-of-arrival localization network.
//!
//! A target at the centre of a disc needs line of sight to at least `kv` anchors to
//! localize. Anchors form a Poisson field of intensity `lambda`; chord-shaped
//! blockers form another Poisson field and cast shadows from the target's point of
//! view, so nearby blockers hide large parts of the disc and anchor visibilities are
//! strongly correlated.
//!
//! The crate computes the probability that fewer than `kv` anchors remain visible —
//! the blind-spot probability — three ways:
//!
//! - [`montecarlo::estimate_blind_prob`]: exact simulation of both fields;
//! - [`analytic::blind_prob_independent`]: the Poisson tail applied to the mean
//!   visible area, a lower bound once the mean visible anchor count clears
//!   [`analytic::threshold_mean_count`];
//! - [`analytic::blind_prob_near_pair`]: keeps the two nearest blockers exact and
//!   averages the field beyond them, accurate across blocker sizes.
//!
//! [`design::required_anchor_intensity`] inverts the near-pair approximation to find
//! the anchor intensity meeting a blind-spot budget.

pub mod analytic;
pub mod design;
pub mod geometry;
pub mod montecarlo;
pub mod quad;
pub mod rng;

pub use analytic::BlindSpotParams;
pub use geometry::EnvParams;
