//! Exact law of the total magnetization S_n = Σ x_i under the Gibbs measure.
//!
//! The weight of a configuration depends only on m = S_n / n, so the law of
//! S_n is a reweighted binomial and can be built in O(n) in the log domain.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Couplings, ModelParams};
use crate::numeric::log_sum_exp;
use crate::phase::{m_star, PhaseConfig};

/// `ln C(n, j)`; the two lower factorials are added first so that the value is
/// bit-identical for j and n − j.
pub fn ln_binomial(n: usize, j: usize) -> f64 {
    debug_assert!(j <= n);
    libm::lgamma((n + 1) as f64) - (libm::lgamma((j + 1) as f64) + libm::lgamma((n - j + 1) as f64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MagnetizationLaw {
    params: ModelParams,
    log_weights: Vec<f64>,
    log_z: f64,
    pmf: Vec<f64>,
    /// `cdf[j] = P(S ≤ 2j − n)`, summed from the left.
    cdf: Vec<f64>,
    /// `sf[j] = P(S ≥ 2j − n)`, summed from the right so upper tails keep
    /// their relative precision.
    sf: Vec<f64>,
}

/// Exact law of S_n for the given parameters.
pub fn build_law(p: ModelParams) -> Result<MagnetizationLaw> {
    if p.n == 0 {
        return Err(Error::InvalidParams("n must be at least 1".into()));
    }
    let n = p.n;
    let nf = n as f64;
    let log_weights = (0..=n)
        .map(|j| {
            let m = (2 * j as i64 - n as i64) as f64 / nf;
            ln_binomial(n, j) + nf * (p.k / 3.0 * m * m * m + p.j / 2.0 * m * m)
        })
        .collect();
    Ok(MagnetizationLaw::from_log_weights(p, log_weights))
}

impl MagnetizationLaw {
    fn from_log_weights(params: ModelParams, log_weights: Vec<f64>) -> Self {
        let log_z = log_sum_exp(&log_weights);
        let pmf: Vec<f64> = log_weights.iter().map(|lw| (lw - log_z).exp()).collect();
        let mut cdf = Vec::with_capacity(pmf.len());
        let mut acc = 0.0;
        for &q in &pmf {
            acc += q;
            cdf.push(acc.min(1.0));
        }
        let mut sf = vec![0.0; pmf.len()];
        let mut acc = 0.0;
        for (j, &q) in pmf.iter().enumerate().rev() {
            acc += q;
            sf[j] = acc.min(1.0);
        }
        Self { params, log_weights, log_z, pmf, cdf, sf }
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn params(&self) -> ModelParams {
        self.params
    }

    pub fn couplings(&self) -> Couplings {
        self.params.couplings()
    }

    /// Unnormalized log weights indexed by j = (s + n) / 2.
    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn log_z(&self) -> f64 {
        self.log_z
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// `P(S_n = s)`; zero off the support.
    pub fn prob(&self, s: i64) -> f64 {
        let n = self.n() as i64;
        if s.abs() > n || (s + n) % 2 != 0 {
            return 0.0;
        }
        self.pmf[((s + n) / 2) as usize]
    }

    /// Value of S_n at index j.
    pub fn s_at(&self, j: usize) -> i64 {
        2 * j as i64 - self.n() as i64
    }

    pub fn support(&self) -> impl Iterator<Item = i64> + '_ {
        (0..=self.n()).map(|j| self.s_at(j))
    }

    /// `E m_n`.
    pub fn mean_m(&self) -> f64 {
        let nf = self.n() as f64;
        self.pmf.iter().enumerate().map(|(j, q)| q * self.s_at(j) as f64 / nf).sum()
    }

    /// First index whose rescaled value exceeds `z`.
    fn first_above(&self, rv: &RescaledVariable, z: f64) -> usize {
        let (mut lo, mut hi) = (0usize, self.pmf.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            if rv.map(self.s_at(mid)) <= z {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// `P(W ≤ z)`.
    pub fn cdf_rescaled(&self, rv: &RescaledVariable, z: f64) -> f64 {
        match self.first_above(rv, z) {
            0 => 0.0,
            j => self.cdf[j - 1],
        }
    }

    /// `P(W > x)` summed from the upper end.
    pub fn survival(&self, rv: &RescaledVariable, x: f64) -> f64 {
        let j = self.first_above(rv, x);
        if j >= self.sf.len() {
            0.0
        } else {
            self.sf[j]
        }
    }

    /// `sup_z |P(W ≤ z) − target(z)|` for a continuous target CDF.
    pub fn kolmogorov_distance<F: Fn(f64) -> f64>(&self, rv: &RescaledVariable, target: F) -> f64 {
        let mut left = 0.0;
        let mut worst = 0.0f64;
        for j in 0..self.pmf.len() {
            let t = target(rv.map(self.s_at(j)));
            let right = self.cdf[j];
            worst = worst.max((right - t).abs()).max((left - t).abs());
            left = right;
        }
        worst
    }

    /// Restriction to `{s : s/n ∈ a}`, renormalized.
    pub fn conditional(&self, a: Interval) -> Result<MagnetizationLaw> {
        let nf = self.n() as f64;
        let mut any = false;
        let log_weights = self
            .log_weights
            .iter()
            .enumerate()
            .map(|(j, &lw)| {
                if a.contains(self.s_at(j) as f64 / nf) && self.pmf[j] > 0.0 {
                    any = true;
                    lw
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect();
        if !any {
            return Err(Error::EmptyCondition { lo: a.lo, hi: a.hi });
        }
        Ok(Self::from_log_weights(self.params, log_weights))
    }

    /// Raw moments `E W^k` for each requested order.
    pub fn moments(&self, rv: &RescaledVariable, orders: &[u32]) -> Vec<f64> {
        orders
            .iter()
            .map(|&k| {
                self.pmf
                    .iter()
                    .enumerate()
                    .filter(|(_, q)| **q > 0.0)
                    .map(|(j, q)| q * rv.map(self.s_at(j)).powi(k as i32))
                    .sum()
            })
            .collect()
    }

    /// `E |W|^p`.
    pub fn abs_moment(&self, rv: &RescaledVariable, p: f64) -> f64 {
        self.pmf
            .iter()
            .enumerate()
            .filter(|(_, q)| **q > 0.0)
            .map(|(j, q)| q * rv.map(self.s_at(j)).abs().powf(p))
            .sum()
    }

    /// Right-continuous step CDF of W as sorted `(w, P(W ≤ w))` pairs.
    pub fn step_cdf(&self, rv: &RescaledVariable) -> Vec<(f64, f64)> {
        (0..self.pmf.len()).map(|j| (rv.map(self.s_at(j)), self.cdf[j])).collect()
    }

    /// `(z, P(W ≤ z))` for each requested z.
    pub fn cdf_table(&self, rv: &RescaledVariable, zs: &[f64]) -> Vec<(f64, f64)> {
        zs.iter().map(|&z| (z, self.cdf_rescaled(rv, z))).collect()
    }

    /// CSV with columns `s,pmf`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,pmf\n");
        for (j, q) in self.pmf.iter().enumerate() {
            out.push_str(&format!("{},{:e}\n", self.s_at(j), q));
        }
        out
    }

    pub fn to_export(&self) -> LawExport {
        LawExport {
            n: self.n(),
            k: self.params.k,
            j: self.params.j,
            log_z: self.log_z,
            support: self.support().collect(),
            pmf: self.pmf.clone(),
        }
    }
}

/// Serializable snapshot of a law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawExport {
    pub n: usize,
    pub k: f64,
    pub j: f64,
    pub log_z: f64,
    pub support: Vec<i64>,
    pub pmf: Vec<f64>,
}

/// Sup distance between two right-continuous step CDFs given as sorted
/// `(point, value)` pairs.
pub fn kolmogorov_distance_steps(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let eval = |f: &[(f64, f64)], z: f64| match f.partition_point(|p| p.0 <= z) {
        0 => 0.0,
        i => f[i - 1].1,
    };
    a.iter().chain(b.iter()).map(|&(z, _)| (eval(a, z) - eval(b, z)).abs()).fold(0.0, f64::max)
}

/// Affine map `s ↦ (s − center) / scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescaledVariable {
    pub center: f64,
    pub scale: f64,
}

impl RescaledVariable {
    pub fn new(center: f64, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() || !center.is_finite() {
            return Err(Error::InvalidParams(format!("bad rescaling center={center} scale={scale}")));
        }
        Ok(Self { center, scale })
    }

    /// Centered at n m* with σ² = n / φ″(m*).
    pub fn pure_phase(p: ModelParams, cfg: &PhaseConfig) -> Result<Self> {
        let c = p.couplings();
        let (m, _) = m_star(c, cfg)?;
        Self::around(p.n, c, m)
    }

    /// Same normalization around an arbitrary phase m (used when conditioning
    /// at coexistence).
    pub fn around(n: usize, c: Couplings, m: f64) -> Result<Self> {
        let d2 = c.phi_d2(m)?;
        Self::new(n as f64 * m, (n as f64 / d2).sqrt())
    }

    /// `S_n / n^{3/4}`.
    pub fn quartic(n: usize) -> Self {
        Self { center: 0.0, scale: (n as f64).powf(0.75) }
    }

    #[inline]
    pub fn map(&self, s: i64) -> f64 {
        (s as f64 - self.center) / self.scale
    }
}

/// Interval of magnetization values with independently open or closed ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_closed: true, hi_closed: true }
    }

    pub fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Self {
        Self { lo, hi, lo_closed, hi_closed }
    }

    pub fn contains(&self, m: f64) -> bool {
        let above = if self.lo_closed { m >= self.lo } else { m > self.lo };
        let below = if self.hi_closed { m <= self.hi } else { m < self.hi };
        above && below
    }
}
