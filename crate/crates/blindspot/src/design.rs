//! Anchor-intensity design: the smallest anchor intensity whose near-pair blind
//! probability meets a prescribed budget.

use thiserror::Error;

use crate::analytic::{
    blind_prob_near_pair, mean_visible_area, AnalyticError, BlindSpotParams,
};
use crate::geometry::EnvParams;
use crate::quad::QuadratureSpec;

/// Errors from the design search.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DesignError {
    /// The blind-probability budget must be a positive finite number.
    #[error("blind-probability budget must be positive and finite, got {mu}")]
    InvalidBudget { mu: f64 },
    /// The tolerance must be a positive finite number.
    #[error("design tolerance must be positive and finite, got {tol}")]
    InvalidTolerance { tol: f64 },
    /// The budget stayed out of reach after exhausting the bracket search.
    #[error("budget {mu} unreachable: blind probability {achieved} at intensity {lambda}")]
    Unreachable { mu: f64, lambda: f64, achieved: f64 },
    /// Model parameters failed validation.
    #[error(transparent)]
    Params(#[from] AnalyticError),
}

/// Outcome of the design search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignResult {
    /// Smallest anchor intensity found that meets the budget.
    pub lambda_star: f64,
    /// Near-pair blind probability at `lambda_star` (within `[mu - tol, mu]`).
    pub achieved: f64,
    /// Number of blind-probability evaluations spent.
    pub iterations: u32,
    /// Final search bracket: the budget is crossed between these intensities.
    pub bracket: (f64, f64),
}

/// Finds the smallest anchor intensity whose near-pair blind probability is at most
/// `mu`, to within `tol` on the probability scale: the returned intensity achieves
/// a blind probability in `[mu - tol, mu]`.
///
/// The blind probability falls monotonically from 1 at zero intensity, so a doubling
/// search brackets the budget and bisection closes in; a budget of 1 or more is met
/// by zero intensity.
pub fn required_anchor_intensity(
    env: &EnvParams,
    mu: f64,
    kv: u32,
    tol: f64,
    spec: &QuadratureSpec,
) -> Result<DesignResult, DesignError> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(DesignError::InvalidBudget { mu });
    }
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(DesignError::InvalidTolerance { tol });
    }
    BlindSpotParams::new(*env, 0.0, kv)?;
    if mu >= 1.0 {
        return Ok(DesignResult { lambda_star: 0.0, achieved: 1.0, iterations: 0, bracket: (0.0, 0.0) });
    }
    let blind = |lambda: f64| {
        let params = BlindSpotParams::new(*env, lambda, kv).expect("validated above");
        blind_prob_near_pair(&params, spec)
    };
    let mut iterations = 0u32;
    // Seed the bracket where the mean visible anchor count is comfortably past the
    // quota, then double outward until the budget is met.
    let mean_area = mean_visible_area(env, &QuadratureSpec::dim1());
    let mut lo = 0.0;
    let mut hi = 4.0 * kv as f64 / mean_area;
    let mut b_hi = blind(hi);
    iterations += 1;
    let mut doublings = 0;
    while b_hi > mu {
        lo = hi;
        hi *= 2.0;
        b_hi = blind(hi);
        iterations += 1;
        doublings += 1;
        if doublings > 60 {
            return Err(DesignError::Unreachable { mu, lambda: hi, achieved: b_hi });
        }
    }
    // Invariant: blind(lo) > mu >= blind(hi). Tighten until hi is within tol below mu.
    while b_hi < mu - tol && iterations < 200 {
        let mid = 0.5 * (lo + hi);
        let b_mid = blind(mid);
        iterations += 1;
        if b_mid > mu {
            lo = mid;
        } else {
            hi = mid;
            b_hi = b_mid;
        }
    }
    Ok(DesignResult { lambda_star: hi, achieved: b_hi, iterations, bracket: (lo, hi) })
}
