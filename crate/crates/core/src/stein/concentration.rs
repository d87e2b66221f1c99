//! Concentration of the mean-field residual m − tanh(Jm + Km²).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::law::MagnetizationLaw;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRow {
    pub n: usize,
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Exact `P(|m − tanh(Jm + Km²)| ≥ (J + 4K)/n + t/√n)` against
/// `2 exp(−t² / (4(1 + J + 2K)))`.
pub fn concentration_check(law: &MagnetizationLaw, t_grid: &[f64]) -> Result<Vec<ConcentrationRow>> {
    let p = law.params();
    if !(p.j > 0.0) {
        return Err(Error::InvalidParams(format!("concentration bound needs J > 0, got {}", p.j)));
    }
    let nf = p.n as f64;
    let residuals: Vec<f64> = law
        .support()
        .map(|s| {
            let m = s as f64 / nf;
            (m - (p.j * m + p.k * m * m).tanh()).abs()
        })
        .collect();
    t_grid
        .iter()
        .map(|&t| {
            if !(t >= 0.0) {
                return Err(Error::InvalidParams(format!("t must be nonnegative, got {t}")));
            }
            let level = (p.j + 4.0 * p.k) / nf + t / nf.sqrt();
            let lhs: f64 = residuals.iter().zip(law.pmf()).filter(|(r, _)| **r >= level).map(|(_, q)| q).sum();
            let rhs = 2.0 * (-t * t / (4.0 * (1.0 + p.j + 2.0 * p.k))).exp();
            Ok(ConcentrationRow { n: p.n, t, lhs, rhs, holds: lhs <= rhs })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuarticTailRow {
    pub t: f64,
    /// `P(n^{1/4}|m| ≥ t)`.
    pub prob: f64,
    /// Largest c with `prob ≤ 2 exp(−c t⁴)` at this t.
    pub c_t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuarticTailFit {
    pub n: usize,
    pub rows: Vec<QuarticTailRow>,
    /// Largest c that works on the whole grid.
    pub c_fit: f64,
}

/// Fits c in `P(n^{1/4}|m| ≥ t) ≤ 2 exp(−c t⁴)`; meaningful at (K, J) = (0, 1).
pub fn quartic_tail_fit(law: &MagnetizationLaw, t_grid: &[f64]) -> QuarticTailFit {
    let nf = law.n() as f64;
    let rows: Vec<QuarticTailRow> = t_grid
        .iter()
        .filter(|t| **t > 0.0)
        .map(|&t| {
            let prob: f64 = law
                .support()
                .zip(law.pmf())
                .filter(|(s, _)| nf.powf(0.25) * (*s as f64 / nf).abs() >= t)
                .map(|(_, q)| q)
                .sum();
            let c_t = if prob > 0.0 { -(prob / 2.0).ln() / t.powi(4) } else { f64::INFINITY };
            QuarticTailRow { t, prob, c_t }
        })
        .collect();
    let c_fit = rows.iter().map(|r| r.c_t).fold(f64::INFINITY, f64::min);
    QuarticTailFit { n: law.n(), rows, c_fit }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::law::build_law;
    use crate::model::ModelParams;

    #[test]
    fn zero_t_always_holds() {
        let law = build_law(ModelParams::new(0.2, 0.5, 100).unwrap()).unwrap();
        let rows = concentration_check(&law, &[0.0]).unwrap();
        assert_eq!(rows[0].rhs, 2.0);
        assert!(rows[0].holds);
    }

    #[test]
    fn holds_on_grid() {
        let law = build_law(ModelParams::new(0.5, 0.8, 1000).unwrap()).unwrap();
        let ts: Vec<f64> = (1..=10).map(|i| 0.5 * i as f64).collect();
        for r in concentration_check(&law, &ts).unwrap() {
            assert!(r.holds, "{r:?}");
        }
    }

    #[test]
    fn lhs_matches_direct_sum() {
        let law = build_law(ModelParams::new(0.3, 1.2, 60).unwrap()).unwrap();
        let row = concentration_check(&law, &[1.0]).unwrap()[0];
        let level = (1.2 + 1.2) / 60.0 + 1.0 / 60f64.sqrt();
        let direct: f64 = (-60i64..=60)
            .step_by(2)
            .filter(|s| {
                let m = *s as f64 / 60.0;
                (m - (1.2 * m + 0.3 * m * m).tanh()).abs() >= level
            })
            .map(|s| law.prob(s))
            .sum();
        assert!((row.lhs - direct).abs() < 1e-15);
    }

    #[test]
    fn rejects_nonpositive_j() {
        let law = build_law(ModelParams::new(0.0, 0.0, 10).unwrap()).unwrap();
        assert!(concentration_check(&law, &[1.0]).is_err());
    }

    #[test]
    fn critical_fit_is_positive() {
        let law = build_law(ModelParams::new(0.0, 1.0, 10_000).unwrap()).unwrap();
        let fit = quartic_tail_fit(&law, &[0.5, 1.0, 1.5, 2.0, 2.5]);
        assert!(fit.c_fit > 0.0 && fit.c_fit.is_finite());
        for r in &fit.rows {
            assert!(r.prob <= 2.0 * (-fit.c_fit * r.t.powi(4)).exp() * (1.0 + 1e-12));
        }
    }
}
