//! Model parameters and the scalar analytic functions of the cubic
//! Curie-Weiss model: binary entropy, the potential φ and its derivatives,
//! tanh derivative helpers and the mean-field fixed-point residual.
//!
//! The Gibbs weight of a configuration depends only on its magnetization
//! `m = S_n / n` through `exp(n (K/3 m³ + J/2 m²))`, so every quantity here
//! is a function of a single real variable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Interval clamp used by root searches: φ′ and φ″ diverge at |m| = 1.
pub const BOUNDARY_EPS: f64 = 1e-9;

/// The pair of couplings (K, J) without a system size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    /// Three-body (cubic) coupling.
    pub k: f64,
    /// Two-body (quadratic) coupling.
    pub j: f64,
}

/// Couplings together with the number of spins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub k: f64,
    pub j: f64,
    pub n: usize,
}

impl Couplings {
    pub fn new(k: f64, j: f64) -> Result<Self> {
        if !k.is_finite() || !j.is_finite() {
            return Err(Error::InvalidParams(format!("non-finite couplings K={k}, J={j}")));
        }
        if k < 0.0 {
            return Err(Error::InvalidParams(format!("K must be >= 0 (spin flip maps K to -K), got {k}")));
        }
        Ok(Self { k, j })
    }

    pub fn with_n(self, n: usize) -> Result<ModelParams> {
        ModelParams::new(self.k, self.j, n)
    }

    /// K = 0 and J = 1.
    pub fn is_critical(&self) -> bool {
        self.k == 0.0 && self.j == 1.0
    }
}

impl ModelParams {
    pub fn new(k: f64, j: f64, n: usize) -> Result<Self> {
        let c = Couplings::new(k, j)?;
        if n == 0 {
            return Err(Error::InvalidParams("n must be >= 1".into()));
        }
        Ok(Self { k: c.k, j: c.j, n })
    }

    pub fn couplings(&self) -> Couplings {
        Couplings { k: self.k, j: self.j }
    }
}

impl From<ModelParams> for Couplings {
    fn from(p: ModelParams) -> Self {
        p.couplings()
    }
}

fn check_closed(m: f64) -> Result<()> {
    if m.is_nan() || m.abs() > 1.0 {
        return Err(Error::Domain(format!("|m| <= 1 required, got {m}")));
    }
    Ok(())
}

fn check_open(m: f64) -> Result<()> {
    if m.is_nan() || m.abs() >= 1.0 {
        return Err(Error::Domain(format!("|m| < 1 required, got {m}")));
    }
    Ok(())
}

/// `I(m) + log 2 = ½[(1+m) log(1+m) + (1−m) log(1−m)]`, computed with
/// `ln_1p` so that it is accurate to relative precision near m = 0.
pub(crate) fn entropy_excess(m: f64) -> f64 {
    let plus = if m == -1.0 { 0.0 } else { (1.0 + m) * m.ln_1p() };
    let minus = if m == 1.0 { 0.0 } else { (1.0 - m) * (-m).ln_1p() };
    0.5 * (plus + minus)
}

/// Binary relative entropy
/// `I(m) = (1−m)/2 log((1−m)/2) + (1+m)/2 log((1+m)/2)` with `0 log 0 = 0`.
pub fn binary_entropy(m: f64) -> Result<f64> {
    check_closed(m)?;
    Ok(entropy_excess(m) - std::f64::consts::LN_2)
}

impl Couplings {
    /// `φ(m) − φ(0)`; the offset `−log 2` is dropped so that depth
    /// comparisons between nearby minima do not lose digits.
    pub(crate) fn phi_shifted_raw(&self, m: f64) -> f64 {
        entropy_excess(m) - self.k / 3.0 * m * m * m - 0.5 * self.j * m * m
    }

    pub(crate) fn phi_d1_raw(&self, m: f64) -> f64 {
        m.atanh() - self.k * m * m - self.j * m
    }

    pub(crate) fn phi_d2_raw(&self, m: f64) -> f64 {
        1.0 / (1.0 - m * m) - 2.0 * self.k * m - self.j
    }

    pub(crate) fn phi_d3_raw(&self, m: f64) -> f64 {
        let q = 1.0 - m * m;
        2.0 * m / (q * q) - 2.0 * self.k
    }

    pub(crate) fn residual_raw(&self, m: f64) -> f64 {
        (self.k * m * m + self.j * m).tanh() - m
    }

    /// `φ(m) = I(m) − (K/3) m³ − (J/2) m²` on the closed interval.
    pub fn phi(&self, m: f64) -> Result<f64> {
        check_closed(m)?;
        Ok(self.phi_shifted_raw(m) - std::f64::consts::LN_2)
    }

    /// `φ′(m) = atanh(m) − K m² − J m`.
    pub fn phi_d1(&self, m: f64) -> Result<f64> {
        check_open(m)?;
        Ok(self.phi_d1_raw(m))
    }

    /// `φ″(m) = 1/(1−m²) − 2Km − J`.
    pub fn phi_d2(&self, m: f64) -> Result<f64> {
        check_open(m)?;
        Ok(self.phi_d2_raw(m))
    }

    /// `φ‴(m) = 2m/(1−m²)² − 2K`.
    pub fn phi_d3(&self, m: f64) -> Result<f64> {
        check_open(m)?;
        Ok(self.phi_d3_raw(m))
    }

    /// `tanh(K m² + J m) − m`; vanishes exactly at the stationary points of φ.
    pub fn mean_field_residual(&self, m: f64) -> Result<f64> {
        check_closed(m)?;
        Ok(self.residual_raw(m))
    }

    /// Taylor coefficients of `x ↦ tanh(J(m+x) + K(m+x)²)` at `x = 0`.
    pub fn taylor_coeffs(&self, m: f64) -> Result<TaylorCoeffs> {
        check_open(m)?;
        let u = self.j * m + self.k * m * m;
        let t = u.tanh();
        let a = self.j + 2.0 * self.k * m;
        let (d1, d2, d3) = (tanh_d1(t), tanh_d2(t), tanh_d3(t));
        Ok(TaylorCoeffs {
            c0: t,
            c1: a * d1,
            c2: 2.0 * self.k * d1 + a * a * d2,
            c3: 6.0 * self.k * a * d2 + a * a * a * d3,
        })
    }
}

/// `tanh′` expressed through `t = tanh(u)`.
#[inline]
pub fn tanh_d1(t: f64) -> f64 {
    1.0 - t * t
}

#[inline]
pub fn tanh_d2(t: f64) -> f64 {
    -2.0 * t * (1.0 - t * t)
}

#[inline]
pub fn tanh_d3(t: f64) -> f64 {
    -2.0 * (1.0 - t * t) * (1.0 - 3.0 * t * t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaylorCoeffs {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointKind {
    GlobalMin,
    LocalMin,
    LocalMax,
    /// φ″ vanishes: inflection or degenerate critical point.
    Saddle,
}

/// A stationary point of φ, i.e. a root of the mean-field residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumPoint {
    pub m: f64,
    pub phi_value: f64,
    pub phi_dd: f64,
    pub kind: PointKind,
}
