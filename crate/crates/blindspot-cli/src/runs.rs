//! Experiment runners: each builds a deterministic CSV body for one mode.

use std::f64::consts::PI;
use std::fmt::Write as _;

use anyhow::Result;
use blindspot::analytic::{blind_prob_independent, blind_prob_near_pair, mean_visible_area};
use blindspot::design::required_anchor_intensity;
use blindspot::geometry::EnvParams;
use blindspot::montecarlo::{
    estimate_blind_prob, estimate_far_shadow_fraction, estimate_far_visible_fraction,
    estimate_vin_area, Estimate,
};
use blindspot::quad::QuadratureSpec;
use blindspot::BlindSpotParams;

use crate::config::ExperimentConfig;

/// One sweep record: a parameter value with all three blind-probability routes.
pub struct SweepRow {
    pub param: f64,
    pub mc: Estimate,
    pub ind: f64,
    pub near: f64,
}

/// Loss-free float formatting: 17 significant digits.
fn full(v: f64) -> String {
    format!("{v:.16e}")
}

impl SweepRow {
    fn push_csv(&self, out: &mut String) {
        for p in [self.mc.mean, self.ind, self.near] {
            assert!((0.0..=1.0).contains(&p), "probability {p} out of range");
        }
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            self.param,
            full(self.mc.mean),
            full(self.mc.stderr),
            full(self.ind),
            full(self.near)
        );
    }
}

fn sweep_row(cfg: &ExperimentConfig, len: f64, lambda_mean: f64, seed: u64) -> Result<SweepRow> {
    let env = EnvParams::from_mean_count(cfg.lambda0_pi_r2, len)?;
    let params = BlindSpotParams::new(env, lambda_mean / PI, cfg.kv)?;
    let mc = estimate_blind_prob(&env, params.lambda, cfg.kv, cfg.reps, seed);
    let ind = blind_prob_independent(&params, &QuadratureSpec::dim1());
    let near = blind_prob_near_pair(&params, &QuadratureSpec::dim3());
    Ok(SweepRow { param: len, mc, ind, near })
}

/// Blind probability versus normalized obstacle length at fixed anchor intensity.
pub fn run_sweep_l(cfg: &ExperimentConfig) -> Result<String> {
    let lambda_mean = cfg.lambda_pi_r2[0];
    let mut out = String::from("l_over_r,b_mc,b_mc_stderr,b_ind,b_2plus\n");
    for (i, &len) in cfg.l_over_r.iter().enumerate() {
        let row = sweep_row(cfg, len, lambda_mean, cfg.seed.wrapping_add(i as u64))?;
        row.push_csv(&mut out);
    }
    Ok(out)
}

/// Blind probability versus mean anchor count, one panel per obstacle length.
pub fn run_sweep_lambda(cfg: &ExperimentConfig) -> Result<String> {
    let mut out = String::from("lambda_pi_r2,b_mc,b_mc_stderr,b_ind,b_2plus\n");
    for (p, &len) in cfg.l_over_r.iter().enumerate() {
        let _ = writeln!(out, "# panel l_over_r={len}");
        for (i, &lambda_mean) in cfg.lambda_pi_r2.iter().enumerate() {
            let seed = cfg.seed.wrapping_add((1000 * p + i) as u64);
            let mut row = sweep_row(cfg, len, lambda_mean, seed)?;
            row.param = lambda_mean;
            row.push_csv(&mut out);
        }
    }
    Ok(out)
}

/// Far-field shadow share versus obstacle length, one curve per mean obstacle
/// count. Companion columns report the far *visible* fraction of the visible
/// area and the mean visible-but-shadow-spanned area beyond the second blocker
/// (the region the near-pair approximation writes off), on the same seeds.
pub fn run_gamma(cfg: &ExperimentConfig) -> Result<String> {
    let mut out = String::from(
        "count,l_over_r,far_shadow_share,far_shadow_stderr,far_visible_fraction,far_visible_stderr,spanned_visible_area,spanned_visible_stderr\n",
    );
    for (p, &count) in cfg.counts.iter().enumerate() {
        for (i, &len) in cfg.l_over_r.iter().enumerate() {
            let env = EnvParams::from_mean_count(count, len)?;
            let seed = cfg.seed.wrapping_add((1000 * p + i) as u64);
            let shadow = estimate_far_shadow_fraction(&env, cfg.reps, seed);
            let visible = estimate_far_visible_fraction(&env, cfg.reps, seed);
            let spanned = estimate_vin_area(&env, cfg.reps, seed);
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                count,
                len,
                full(shadow.mean),
                full(shadow.stderr),
                full(visible.mean),
                full(visible.stderr),
                full(spanned.mean),
                full(spanned.stderr)
            );
        }
    }
    Ok(out)
}

/// Smallest anchor intensity meeting each blind-spot budget, with a
/// Monte-Carlo check of the blind probability at the designed intensity.
pub fn run_design(cfg: &ExperimentConfig) -> Result<String> {
    let len = cfg.l_over_r[0];
    let env = EnvParams::from_mean_count(cfg.lambda0_pi_r2, len)?;
    let mut out = String::from(
        "mu,lambda_star,lambda_star_pi_r2,b_2plus_at_star,b_mc,b_mc_stderr,iterations\n",
    );
    for (i, &mu) in cfg.mu.iter().enumerate() {
        let res = required_anchor_intensity(&env, mu, cfg.kv, cfg.design_tol, &QuadratureSpec::dim3())?;
        let mc = estimate_blind_prob(&env, res.lambda_star, cfg.kv, cfg.reps, cfg.seed.wrapping_add(i as u64));
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            mu,
            full(res.lambda_star),
            full(res.lambda_star * PI),
            full(res.achieved),
            full(mc.mean),
            full(mc.stderr),
            res.iterations
        );
    }
    Ok(out)
}

/// All three blind-probability routes at a single parameter point.
pub fn run_estimate(cfg: &ExperimentConfig) -> Result<String> {
    let len = cfg.l_over_r[0];
    let lambda_mean = cfg.lambda_pi_r2[0];
    let env = EnvParams::from_mean_count(cfg.lambda0_pi_r2, len)?;
    let row = sweep_row(cfg, len, lambda_mean, cfg.seed)?;
    let area = mean_visible_area(&env, &QuadratureSpec::dim1());
    let mut out =
        String::from("lambda_pi_r2,l_over_r,b_mc,b_mc_stderr,b_ind,b_2plus,mean_visible_area\n");
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{}",
        lambda_mean,
        len,
        full(row.mc.mean),
        full(row.mc.stderr),
        full(row.ind),
        full(row.near),
        full(area)
    );
    Ok(out)
}
