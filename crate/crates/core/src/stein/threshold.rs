//! Berry–Esseen experiments along J = 1 + αK_n with K_n ↓ 0.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{GPoly, LimitDensity};
use crate::error::{Error, Result};
use crate::law::{build_law, RescaledVariable};
use crate::model::{Couplings, ModelParams};
use crate::numeric::normal_cdf;
use crate::phase::{m_star, PhaseConfig};
use crate::rate::RateFit;

use super::{be_certificate, RegressionDecomposition};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "case")]
pub enum ThresholdCase {
    /// K_n = n^{−1/2}, W = S/n^{3/4}, mixed quadratic–quartic target.
    Mixed,
    /// K_n = n^{−exponent} (exponent > 1/2), W = S/n^{3/4}, quartic target.
    Quartic { exponent: f64 },
    /// K_n = n^{−2δ}, W = S√(1−J)/√n, normal target.
    Normal { delta: f64 },
    /// K_n = n^{−2δ}, W = S/n^{3/4}, normal target.
    QuarticScaleNormal { delta: f64 },
}

impl ThresholdCase {
    /// Case by number, with the default exponent for case 2.
    pub fn from_number(case: u8, delta: f64) -> Result<Self> {
        match case {
            1 => Ok(Self::Mixed),
            2 => Ok(Self::Quartic { exponent: 0.75 }),
            3 => Ok(Self::Normal { delta }),
            4 => Ok(Self::QuarticScaleNormal { delta }),
            _ => Err(Error::InvalidParams(format!("threshold case must be 1..=4, got {case}"))),
        }
    }

    pub fn k_n(&self, n: usize) -> f64 {
        let nf = n as f64;
        match *self {
            Self::Mixed => nf.powf(-0.5),
            Self::Quartic { exponent } => nf.powf(-exponent),
            Self::Normal { delta } | Self::QuarticScaleNormal { delta } => nf.powf(-2.0 * delta),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Self::Mixed => Ok(()),
            Self::Quartic { exponent } if exponent > 0.5 => Ok(()),
            Self::Normal { delta } | Self::QuarticScaleNormal { delta } if delta > 0.0 && delta < 0.25 => Ok(()),
            _ => Err(Error::InvalidParams(format!("parameters out of range for {self:?}"))),
        }
    }

    /// Rescaling, target law and regression decomposition at size n.
    pub fn setup(&self, alpha: f64, n: usize) -> Result<(RescaledVariable, LimitDensity, RegressionDecomposition)> {
        let nf = n as f64;
        let k = self.k_n(n);
        let j = 1.0 + alpha * k;
        let j3 = j.powi(3);
        Ok(match *self {
            Self::Mixed => {
                let g = GPoly { k: 1, a1: -alpha, a2: j3 / 3.0 };
                (
                    RescaledVariable::quartic(n),
                    LimitDensity::family(0.0, g.k, g.a1, g.a2)?,
                    RegressionDecomposition::family(nf.powf(-1.5), g),
                )
            }
            Self::Quartic { .. } => {
                let g = GPoly { k: 2, a1: j3 / 3.0, a2: 0.0 };
                (
                    RescaledVariable::quartic(n),
                    LimitDensity::family(0.0, g.k, g.a1, g.a2)?,
                    RegressionDecomposition::family(nf.powf(-1.5), g),
                )
            }
            Self::Normal { .. } => (
                RescaledVariable::new(0.0, (nf / (1.0 - j)).sqrt())?,
                LimitDensity::standard_normal(),
                RegressionDecomposition::linear((1.0 - j) / nf),
            ),
            Self::QuarticScaleNormal { .. } => (
                RescaledVariable::quartic(n),
                LimitDensity::standard_normal(),
                RegressionDecomposition::linear((1.0 - j) / nf),
            ),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub n: usize,
    pub k_n: f64,
    pub j_n: f64,
    pub m_star: f64,
    /// Reason the size was left out of the fit, if any.
    pub excluded: Option<String>,
    pub d_k: f64,
    pub term_delta2: f64,
    pub term_r: f64,
    pub term_a: f64,
    pub be_bound: f64,
    pub nonuniform_sup: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub case: ThresholdCase,
    pub alpha: f64,
    pub rows: Vec<ThresholdRow>,
    /// Log-log fit of d_K over the included sizes.
    pub fit: Option<RateFit>,
}

impl ThresholdReport {
    pub const CSV_HEADER: &'static str =
        "n,K_n,J_n,m_star,dK,bound_term1,bound_term2,bound_term3,be_bound,nonuniform_sup,variance,excluded";

    pub fn csv_rows(&self) -> Vec<String> {
        self.rows
            .iter()
            .map(|r| {
                format!(
                    "{},{:e},{},{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{}",
                    r.n,
                    r.k_n,
                    r.j_n,
                    r.m_star,
                    r.d_k,
                    r.term_delta2,
                    r.term_r,
                    r.term_a,
                    r.be_bound,
                    r.nonuniform_sup,
                    r.variance,
                    r.excluded.as_deref().unwrap_or("")
                )
            })
            .collect()
    }
}

fn threshold_row(case: ThresholdCase, alpha: f64, n: usize, cfg: &PhaseConfig) -> Result<ThresholdRow> {
    let k_n = case.k_n(n);
    let j_n = 1.0 + alpha * k_n;
    let (m, _) = m_star(Couplings::new(k_n, j_n)?, cfg)?;
    let law = build_law(ModelParams::new(k_n, j_n, n)?)?;
    let (rv, target, decomp) = case.setup(alpha, n)?;
    let rep = be_certificate(&law, &rv, &target, &decomp)?;
    let variance = law.moments(&rv, &[2])[0];
    Ok(ThresholdRow {
        n,
        k_n,
        j_n,
        m_star: m,
        excluded: (m != 0.0).then(|| format!("pure phase is {m}, not 0")),
        d_k: rep.kolmogorov,
        term_delta2: rep.term_delta2,
        term_r: rep.term_r,
        term_a: rep.term_a,
        be_bound: rep.be_bound,
        nonuniform_sup: rep.nonuniform_sup,
        variance,
    })
}

/// Runs one case over `n_grid` (in parallel, output in grid order).
pub fn threshold_experiment(
    case: ThresholdCase,
    alpha: f64,
    n_grid: &[usize],
    cfg: &PhaseConfig,
) -> Result<ThresholdReport> {
    if !(alpha < 0.0) {
        return Err(Error::InvalidParams(format!("threshold experiments need α < 0, got {alpha}")));
    }
    case.validate()?;
    let rows: Vec<ThresholdRow> =
        n_grid.par_iter().map(|&n| threshold_row(case, alpha, n, cfg)).collect::<Result<_>>()?;
    let (ns, ds): (Vec<f64>, Vec<f64>) =
        rows.iter().filter(|r| r.excluded.is_none()).map(|r| (r.n as f64, r.d_k)).unzip();
    let fit = RateFit::fit(&ns, &ds).ok();
    Ok(ThresholdReport { case, alpha, rows, fit })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaZeroRow {
    pub n: usize,
    pub k_n: f64,
    pub m_star: f64,
    /// Target ∝ exp(−(3x²/2 − x³/3 + x⁴/12)).
    pub d_k_candidate: f64,
    /// Exactly standardized W against N(0, 1).
    pub d_k_standardized_normal: f64,
    /// Target ∝ exp(−x⁴/12).
    pub d_k_quartic: f64,
}

/// Exploratory table on J = 1 with K_n = n^{−1/4}: W = (S − n m*)/n^{3/4}
/// compared with several candidate limits. No bound is certified here.
pub fn alpha_zero_table(n_grid: &[usize], cfg: &PhaseConfig) -> Result<Vec<AlphaZeroRow>> {
    let candidate = LimitDensity::from_potential(vec![0.0, 0.0, 1.5, -1.0 / 3.0, 1.0 / 12.0])?;
    let quartic = LimitDensity::quartic(1.0)?;
    n_grid
        .par_iter()
        .map(|&n| {
            let k_n = (n as f64).powf(-0.25);
            let (m, _) = m_star(Couplings::new(k_n, 1.0)?, cfg)?;
            let law = build_law(ModelParams::new(k_n, 1.0, n)?)?;
            let rv = RescaledVariable::new(n as f64 * m, (n as f64).powf(0.75))?;
            let mom = law.moments(&rv, &[1, 2]);
            let sd = (mom[1] - mom[0] * mom[0]).sqrt();
            let standard = RescaledVariable::new(rv.center + mom[0] * rv.scale, sd * rv.scale)?;
            Ok(AlphaZeroRow {
                n,
                k_n,
                m_star: m,
                d_k_candidate: law.kolmogorov_distance(&rv, |z| candidate.cdf(z)),
                d_k_standardized_normal: law.kolmogorov_distance(&standard, normal_cdf),
                d_k_quartic: law.kolmogorov_distance(&rv, |z| quartic.cdf(z)),
            })
        })
        .collect()
}
