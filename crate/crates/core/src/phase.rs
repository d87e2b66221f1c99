//! Equilibrium macrostates, the pure phase m*(K, J), the coexistence curve
//! γ(K) and the large-deviation rate function.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Couplings, EquilibriumPoint, PointKind, BOUNDARY_EPS};
use crate::numeric::bisect;

/// Tuning for root scans and depth comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseConfig {
    /// Number of grid points used to bracket sign changes of the residual.
    pub scan_points: usize,
    /// Bisection tolerance on m.
    pub root_tol: f64,
    /// Roots closer than this are merged.
    pub dedup_tol: f64,
    /// Two minima whose φ values differ by less than this are equal-depth.
    pub depth_tol: f64,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        Self { scan_points: 100_000, root_tol: 1e-12, dedup_tol: 1e-9, depth_tol: 1e-10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseLabel {
    /// m* = m₀ = 0, below the coexistence curve.
    Paramagnetic,
    /// m* = m₁ > 0 on the branch γ(K) < J < 1.
    PolarizedLow,
    /// m* = m₂ on the branch J ≥ 1.
    PolarizedHigh,
    Coexistence,
    Critical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePortrait {
    pub couplings: Couplings,
    pub stationary_points: Vec<EquilibriumPoint>,
    pub global_minimizers: Vec<f64>,
    pub phase_label: PhaseLabel,
    /// inf of φ over [−1, 1].
    pub inf_phi: f64,
}

/// Derivative magnitude below which φ″ (then φ‴) is treated as zero.
const DEGENERATE_TOL: f64 = 1e-10;

/// Kind of a stationary point. With φ″ = 0 the sign of φ‴ decides between an
/// inflection and a flat minimum (φ⁗ is positive on (−1, 1)).
fn classify(c: &Couplings, m: f64) -> (f64, PointKind) {
    let d2 = c.phi_d2_raw(m);
    let kind = if d2 > DEGENERATE_TOL {
        PointKind::LocalMin
    } else if d2 < -DEGENERATE_TOL {
        PointKind::LocalMax
    } else if c.phi_d3_raw(m).abs() > DEGENERATE_TOL {
        PointKind::Saddle
    } else {
        PointKind::LocalMin
    };
    (d2, kind)
}

/// All roots of `tanh(Km² + Jm) = m` in (−1, 1), classified by the sign of φ″.
///
/// Local minima whose depth is within `depth_tol` of the lowest are marked
/// [`PointKind::GlobalMin`]. The root m = 0 is always present.
pub fn find_stationary_points(c: Couplings, cfg: &PhaseConfig) -> Vec<EquilibriumPoint> {
    let lo = -1.0 + BOUNDARY_EPS;
    let hi = 1.0 - BOUNDARY_EPS;
    let npts = cfg.scan_points.max(3);
    let step = (hi - lo) / (npts - 1) as f64;
    let r = |m: f64| c.residual_raw(m);

    let mut roots = vec![0.0];
    let mut prev_x = lo;
    let mut prev_r = r(lo);
    for i in 1..npts {
        let x = if i == npts - 1 { hi } else { lo + step * i as f64 };
        let rx = r(x);
        if rx == 0.0 {
            roots.push(x);
        } else if prev_r != 0.0 && (rx < 0.0) != (prev_r < 0.0) {
            roots.push(bisect(r, prev_x, x, cfg.root_tol));
        }
        prev_x = x;
        prev_r = rx;
    }
    roots.sort_by(f64::total_cmp);
    let mut dedup: Vec<f64> = Vec::with_capacity(roots.len());
    for m in roots {
        match dedup.last_mut() {
            Some(last) if (m - *last).abs() < cfg.dedup_tol => {
                // keep the exact zero when merging with it
                if m == 0.0 {
                    *last = 0.0;
                }
            }
            _ => dedup.push(m),
        }
    }

    let mut points: Vec<EquilibriumPoint> = dedup
        .into_iter()
        .map(|m| {
            let (phi_dd, kind) = classify(&c, m);
            EquilibriumPoint { m, phi_value: c.phi_shifted_raw(m) - std::f64::consts::LN_2, phi_dd, kind }
        })
        .collect();

    let depth = |p: &EquilibriumPoint| c.phi_shifted_raw(p.m);
    let best = points.iter().filter(|p| p.kind == PointKind::LocalMin).map(depth).fold(f64::INFINITY, f64::min);
    if best.is_finite() {
        for p in points.iter_mut() {
            if p.kind == PointKind::LocalMin && c.phi_shifted_raw(p.m) - best <= cfg.depth_tol {
                p.kind = PointKind::GlobalMin;
            }
        }
    } else if let Some(p) = points.iter_mut().min_by(|a, b| c.phi_shifted_raw(a.m).total_cmp(&c.phi_shifted_raw(b.m))) {
        p.kind = PointKind::GlobalMin;
    }
    points
}

/// Full phase classification at (K, J).
pub fn phase_portrait(c: Couplings, cfg: &PhaseConfig) -> PhasePortrait {
    let stationary_points = find_stationary_points(c, cfg);
    let global_minimizers: Vec<f64> =
        stationary_points.iter().filter(|p| p.kind == PointKind::GlobalMin).map(|p| p.m).collect();
    let inf_phi =
        global_minimizers.iter().map(|&m| c.phi_shifted_raw(m)).fold(f64::INFINITY, f64::min) - std::f64::consts::LN_2;
    let phase_label = if c.is_critical() {
        PhaseLabel::Critical
    } else if global_minimizers.len() > 1 {
        PhaseLabel::Coexistence
    } else if global_minimizers[0].abs() < 1e-9 {
        PhaseLabel::Paramagnetic
    } else if c.j >= 1.0 {
        PhaseLabel::PolarizedHigh
    } else {
        PhaseLabel::PolarizedLow
    };
    PhasePortrait { couplings: c, stationary_points, global_minimizers, phase_label, inf_phi }
}

/// The unique pure phase m*(K, J) and its branch.
pub fn m_star(c: Couplings, cfg: &PhaseConfig) -> Result<(f64, PhaseLabel)> {
    if c.is_critical() {
        return Err(Error::CriticalPoint);
    }
    let portrait = phase_portrait(c, cfg);
    if portrait.phase_label == PhaseLabel::Coexistence {
        return Err(Error::Coexistence { k: c.k, j: c.j, minimizers: portrait.global_minimizers });
    }
    Ok((portrait.global_minimizers[0], portrait.phase_label))
}

/// A point (K, γ(K)) on the coexistence curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaCurvePoint {
    pub k: f64,
    pub j_gamma: f64,
    pub m_low: f64,
    pub m_high: f64,
    pub equal_depth_gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaConfig {
    pub j_lo: f64,
    pub j_hi: f64,
    /// Bisection tolerance on J.
    pub j_tol: f64,
    /// Points of the monotonicity check of D(J) across the bracket.
    pub check_points: usize,
    pub phase: PhaseConfig,
}

impl Default for GammaConfig {
    fn default() -> Self {
        Self { j_lo: -2.0, j_hi: 1.0, j_tol: 1e-12, check_points: 41, phase: PhaseConfig::default() }
    }
}

/// Deepest strictly positive local minimizer of φ, if any.
fn positive_local_min(c: Couplings, cfg: &PhaseConfig) -> Option<f64> {
    find_stationary_points(c, cfg)
        .into_iter()
        .filter(|p| p.m > cfg.dedup_tol && matches!(p.kind, PointKind::LocalMin | PointKind::GlobalMin))
        .min_by(|a, b| c.phi_shifted_raw(a.m).total_cmp(&c.phi_shifted_raw(b.m)))
        .map(|p| p.m)
}

/// Depth advantage of the positive phase, `φ(0) − φ(m₊)`; `None` if there is
/// no positive local minimizer (the zero phase wins outright).
fn depth_gap(k: f64, j: f64, cfg: &PhaseConfig) -> Option<(f64, f64)> {
    let c = Couplings { k, j };
    positive_local_min(c, cfg).map(|m| (-c.phi_shifted_raw(m), m))
}

/// γ(K): the J at which m₀ = 0 and the positive phase have equal depth.
pub fn gamma_of_k(k: f64, cfg: &GammaConfig) -> Result<GammaCurvePoint> {
    if !(k > 0.0) {
        return Err(Error::InvalidParams(format!("γ(K) needs K > 0, got {k}")));
    }
    let (lo0, hi0) = (cfg.j_lo, cfg.j_hi);
    let pts = cfg.check_points.max(2);
    let mut last: Option<f64> = None;
    let mut any_positive = false;
    for i in 0..pts {
        let j = lo0 + (hi0 - lo0) * i as f64 / (pts - 1) as f64;
        match depth_gap(k, j, &cfg.phase) {
            Some((d, _)) => {
                any_positive = true;
                if let Some(prev) = last {
                    if d < prev - cfg.phase.depth_tol {
                        return Err(Error::Bracket(format!("D(J) not monotone at K={k}, J={j}: {d} < {prev}")));
                    }
                }
                last = Some(d);
            }
            None if last.is_some() => {
                return Err(Error::Bracket(format!("positive phase disappears inside the bracket at K={k}, J={j}")));
            }
            None => {}
        }
    }
    if !any_positive {
        return Err(Error::NoCoexistence { k, lo: lo0, hi: hi0 });
    }
    let sign = |j: f64| depth_gap(k, j, &cfg.phase).map_or(-1.0, |(d, _)| d);
    if sign(lo0) >= 0.0 {
        return Err(Error::Bracket(format!("positive phase already deeper at J={lo0}; lower j_lo")));
    }
    if sign(hi0) <= 0.0 {
        return Err(Error::Bracket(format!("zero phase still deeper at J={hi0}; raise j_hi")));
    }
    let j_gamma = bisect(sign, lo0, hi0, cfg.j_tol);
    let (gap, m_high) = depth_gap(k, j_gamma, &cfg.phase)
        .ok_or_else(|| Error::Bracket(format!("no positive phase at the located J={j_gamma}")))?;
    Ok(GammaCurvePoint { k, j_gamma, m_low: 0.0, m_high, equal_depth_gap: gap.abs() })
}

/// `I_{K,J}(m) = φ(m) − inf φ`, with the infimum computed once.
#[derive(Debug, Clone)]
pub struct RateFunction {
    couplings: Couplings,
    inf_shifted: f64,
}

impl RateFunction {
    pub fn new(c: Couplings, cfg: &PhaseConfig) -> Self {
        let portrait = phase_portrait(c, cfg);
        let inf_shifted =
            portrait.global_minimizers.iter().map(|&m| c.phi_shifted_raw(m)).fold(f64::INFINITY, f64::min);
        Self { couplings: c, inf_shifted }
    }

    pub fn eval(&self, m: f64) -> Result<f64> {
        if m.is_nan() || m.abs() > 1.0 {
            return Err(Error::Domain(format!("|m| <= 1 required, got {m}")));
        }
        Ok((self.couplings.phi_shifted_raw(m) - self.inf_shifted).max(0.0))
    }
}

pub fn rate_function(m: f64, c: Couplings, cfg: &PhaseConfig) -> Result<f64> {
    RateFunction::new(c, cfg).eval(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRow {
    pub k: f64,
    pub m_star: f64,
    pub predicted: f64,
    /// `m_star / predicted`; absent when the predicted value is 0.
    pub ratio: Option<f64>,
}

/// m*(K, 1 + αK) along a decreasing K grid, against `√(3αK)`, `3K` or 0.
pub fn m_star_asymptotics(alpha: f64, k_grid: &[f64], cfg: &PhaseConfig) -> Result<Vec<AsymptoticRow>> {
    k_grid
        .iter()
        .map(|&k| {
            let c = Couplings::new(k, 1.0 + alpha * k)?;
            let (m, _) = m_star(c, cfg)?;
            let predicted = if alpha > 0.0 {
                (3.0 * alpha * k).sqrt()
            } else if alpha == 0.0 {
                3.0 * k
            } else {
                0.0
            };
            let ratio = (predicted != 0.0).then(|| m / predicted);
            Ok(AsymptoticRow { k, m_star: m, predicted, ratio })
        })
        .collect()
}
