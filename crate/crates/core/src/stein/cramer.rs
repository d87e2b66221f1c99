//! Cramér-type tail ratios P(W > x)/P(Z > x), their conditional version at
//! coexistence, the moderate-deviation functional, and the hypothesis
//! constants δ₁, δ₂, θ estimated on the truncated support.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::law::{build_law, Interval, MagnetizationLaw, RescaledVariable};
use crate::model::{Couplings, ModelParams};
use crate::numeric::normal_tail;
use crate::phase::{find_stationary_points, m_star, PhaseConfig};

use super::{delta2_raw, lambda_forms, regression_raw};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CramerRow {
    pub n: usize,
    pub x: f64,
    pub p_exact: f64,
    pub p_normal: f64,
    pub ratio: f64,
    /// `|ratio − 1| · √n / (1 + x³)`.
    pub normalized_residual: f64,
}

/// `x` values from 0 to `c · n^{1/6}`.
pub fn cramer_grid(n: usize, c: f64, points: usize) -> Vec<f64> {
    let top = c * (n as f64).powf(1.0 / 6.0);
    let k = points.max(2) - 1;
    (0..=k).map(|i| top * i as f64 / k as f64).collect()
}

pub fn cramer_table(law: &MagnetizationLaw, rv: &RescaledVariable, x_grid: &[f64]) -> Vec<CramerRow> {
    let sqrt_n = (law.n() as f64).sqrt();
    x_grid
        .iter()
        .map(|&x| {
            let p_exact = law.survival(rv, x);
            let p_normal = normal_tail(x);
            let ratio = p_exact / p_normal;
            CramerRow {
                n: law.n(),
                x,
                p_exact,
                p_normal,
                ratio,
                normalized_residual: (ratio - 1.0).abs() * sqrt_n / (1.0 + x.powi(3)),
            }
        })
        .collect()
}

/// Row with the largest normalized residual over all x in `[0, x_max]`,
/// checking both one-sided limits at every atom of W.
pub fn cramer_sup(law: &MagnetizationLaw, rv: &RescaledVariable, x_max: f64) -> CramerRow {
    let sqrt_n = (law.n() as f64).sqrt();
    let row = |x: f64, p_exact: f64| {
        let p_normal = normal_tail(x);
        let ratio = p_exact / p_normal;
        CramerRow {
            n: law.n(),
            x,
            p_exact,
            p_normal,
            ratio,
            normalized_residual: (ratio - 1.0).abs() * sqrt_n / (1.0 + x.powi(3)),
        }
    };
    let mut best = row(0.0, law.survival(rv, 0.0));
    for (j, _) in law.pmf().iter().enumerate() {
        let w = rv.map(law.s_at(j));
        if w <= 0.0 || w > x_max {
            continue;
        }
        // just below the atom the atom itself still counts as exceedance
        let below = law.survival(rv, w) + law.pmf()[j];
        for cand in [row(w, law.survival(rv, w)), row(w, below)] {
            if cand.normalized_residual > best.normalized_residual {
                best = cand;
            }
        }
    }
    if x_max > 0.0 {
        let end = row(x_max, law.survival(rv, x_max));
        if end.normalized_residual > best.normalized_residual {
            best = end;
        }
    }
    best
}

/// Unconditional ratios at the pure phase; fails at coexistence.
pub fn cramer_ratio(p: ModelParams, cfg: &PhaseConfig, x_grid: &[f64]) -> Result<Vec<CramerRow>> {
    let rv = RescaledVariable::pure_phase(p, cfg)?;
    let law = build_law(p)?;
    Ok(cramer_table(&law, &rv, x_grid))
}

/// Conditioning window `m_i ± width · |m_i − m_other|`.
pub fn phase_window(m_i: f64, m_other: f64, width: f64) -> Interval {
    let r = width * (m_i - m_other).abs();
    Interval::closed(m_i - r, m_i + r)
}

/// Ratios for the law conditioned on `m_n ∈ A_i`, rescaled around the phase m_i.
pub fn cramer_ratio_conditional(p: ModelParams, m_i: f64, window: Interval, x_grid: &[f64]) -> Result<Vec<CramerRow>> {
    let law = build_law(p)?.conditional(window)?;
    let rv = RescaledVariable::around(p.n, p.couplings(), m_i)?;
    Ok(cramer_table(&law, &rv, x_grid))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MdpRow {
    pub n: usize,
    pub x: f64,
    pub a_n: f64,
    /// `log P(W > a_n x) / a_n²`.
    pub value: f64,
    pub target: f64,
    pub rel_err: f64,
}

/// Moderate-deviation functional with `a_n = n^{1/8}`.
pub fn mdp_table(p: ModelParams, cfg: &PhaseConfig, n_grid: &[usize], xs: &[f64]) -> Result<Vec<MdpRow>> {
    let c = p.couplings();
    let (m, _) = m_star(c, cfg)?;
    let per_n: Vec<Result<Vec<MdpRow>>> = n_grid
        .par_iter()
        .map(|&n| {
            let law = build_law(ModelParams { n, ..p })?;
            let rv = RescaledVariable::around(n, c, m)?;
            let a_n = (n as f64).powf(0.125);
            Ok(xs
                .iter()
                .map(|&x| {
                    let value = law.survival(&rv, a_n * x).ln() / (a_n * a_n);
                    let target = -x * x / 2.0;
                    MdpRow { n, x, a_n, value, target, rel_err: ((value - target) / target).abs() }
                })
                .collect())
        })
        .collect();
    let mut out = Vec::new();
    for rows in per_n {
        out.extend(rows?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypothesisConstants {
    pub d: f64,
    /// `sup |E(D|W) − 1| / (1 + |W|)` with `D = Δ²/(2λ)`.
    pub delta1: f64,
    /// `sup |R/λ| / (1 + |W|)`.
    pub delta2: f64,
    /// `sup |R/λ| / (1 + W²)`, the quadratic alternative.
    pub delta2_quadratic: f64,
    /// `delta2_quadratic · d√n`; the quadratic alternative needs this below 1.
    pub alpha: f64,
    /// `sup |E(D|W)|`.
    pub theta: f64,
    pub support_points: usize,
}

/// Truncation half-width d (in units of √n on the W scale) covering half the
/// distance from m to the nearest other stationary point or to ±1.
pub fn default_truncation(c: Couplings, m: f64, cfg: &PhaseConfig) -> Result<f64> {
    let dist = find_stationary_points(c, cfg)
        .iter()
        .map(|p| p.m)
        .filter(|x| (x - m).abs() > cfg.dedup_tol)
        .chain([-1.0, 1.0])
        .map(|x| (x - m).abs())
        .fold(f64::INFINITY, f64::min);
    Ok(0.5 * dist * c.phi_d2(m)?.sqrt())
}

/// Sup-norm constants over `|W| ≤ d√n` for the linear pair around the phase m.
pub fn hypothesis_constants(p: ModelParams, m: f64, d: f64) -> Result<HypothesisConstants> {
    if !(d > 0.0) {
        return Err(Error::InvalidParams(format!("truncation d must be positive, got {d}")));
    }
    let c = p.couplings();
    let rv = RescaledVariable::around(p.n, c, m)?;
    let (lambda, _) = lambda_forms(c, m, p.n)?;
    let limit = d * (p.n as f64).sqrt();
    let (mut delta1, mut delta2, mut delta2q, mut theta) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut count = 0;
    let ni = p.n as i64;
    for s in (-ni..=ni).step_by(2) {
        let w = rv.map(s);
        if w.abs() > limit {
            continue;
        }
        count += 1;
        let ed = delta2_raw(s, p, &rv) / (2.0 * lambda);
        let r = (regression_raw(s, p, &rv) - lambda * w) / lambda;
        delta1 = delta1.max((ed - 1.0).abs() / (1.0 + w.abs()));
        delta2 = delta2.max(r.abs() / (1.0 + w.abs()));
        delta2q = delta2q.max(r.abs() / (1.0 + w * w));
        theta = theta.max(ed.abs());
    }
    Ok(HypothesisConstants {
        d,
        delta1,
        delta2,
        delta2_quadratic: delta2q,
        alpha: delta2q * limit,
        theta,
        support_points: count,
    })
}
