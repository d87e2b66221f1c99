//! Exchangeable-pair quantities for the heat-bath Glauber pair (W, W′): one
//! uniformly chosen spin is resampled from its conditional law.
//!
//! Given S_n = s, every configuration has the same conditional flip means, so
//! all conditional expectations below are exact functions of s.

pub mod concentration;
pub mod cramer;
pub mod threshold;

use serde::{Deserialize, Serialize};

use crate::density::{GPoly, LimitDensity};
use crate::error::{Error, Result};
use crate::law::{MagnetizationLaw, RescaledVariable};
use crate::model::{Couplings, ModelParams};

/// Local field seen by a spin when the other spins have magnetization sum
/// `s_rest`: `J m_i + K m_i² + K/(3n²)` with `m_i = s_rest / n`.
#[inline]
pub fn local_field(c: Couplings, n: usize, s_rest: i64) -> f64 {
    let nf = n as f64;
    let mi = s_rest as f64 / nf;
    c.j * mi + c.k * mi * mi + c.k / (3.0 * nf * nf)
}

fn check_support(s: i64, n: usize) -> Result<()> {
    let ni = n as i64;
    if n < 2 {
        return Err(Error::Domain(format!("the pair needs n >= 2, got {n}")));
    }
    if s.abs() > ni || (s + ni) % 2 != 0 {
        return Err(Error::Domain(format!("s = {s} is not in the support for n = {n}")));
    }
    Ok(())
}

/// `(E(X_i′ | S=s) for an up-spin, same for a down-spin)`.
pub fn conditional_flip_mean(s: i64, p: ModelParams) -> Result<(f64, f64)> {
    check_support(s, p.n)?;
    Ok(flip_means(s, p))
}

fn flip_means(s: i64, p: ModelParams) -> (f64, f64) {
    let c = p.couplings();
    (local_field(c, p.n, s - 1).tanh(), local_field(c, p.n, s + 1).tanh())
}

fn counts(s: i64, n: usize) -> (f64, f64) {
    let ni = n as i64;
    (((ni + s) / 2) as f64, ((ni - s) / 2) as f64)
}

/// `E(W − W′ | S = s)`.
pub fn exact_regression(s: i64, p: ModelParams, rv: &RescaledVariable) -> Result<f64> {
    check_support(s, p.n)?;
    Ok(regression_raw(s, p, rv))
}

fn regression_raw(s: i64, p: ModelParams, rv: &RescaledVariable) -> f64 {
    let (tp, tm) = flip_means(s, p);
    let (np, nm) = counts(s, p.n);
    let nf = p.n as f64;
    (s as f64 / nf - (np * tp + nm * tm) / nf) / rv.scale
}

/// `E((W − W′)² | S = s)`.
pub fn exact_delta2(s: i64, p: ModelParams, rv: &RescaledVariable) -> Result<f64> {
    check_support(s, p.n)?;
    Ok(delta2_raw(s, p, rv))
}

fn delta2_raw(s: i64, p: ModelParams, rv: &RescaledVariable) -> f64 {
    let (tp, tm) = flip_means(s, p);
    let (np, nm) = counts(s, p.n);
    let nf = p.n as f64;
    2.0 / (rv.scale * rv.scale) * (1.0 - (np * tp - nm * tm) / nf)
}

/// λ at a phase m, in the forms `(1 − (J + 2Km)(1 − m²))/n` and
/// `(1 − m²)φ″(m)/n`.
pub fn lambda_forms(c: Couplings, m: f64, n: usize) -> Result<(f64, f64)> {
    let nf = n as f64;
    let q = 1.0 - m * m;
    let first = (1.0 - (c.j + 2.0 * c.k * m) * q) / nf;
    let second = q * c.phi_d2(m)? / nf;
    Ok((first, second))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum RegressionMode {
    /// `E(W − W′|W) = λW + R`.
    Linear,
    /// `E(W − W′|W) = λg(W) + R` with `g = a₁x^{2k−1} + a₂x^{2k+1}`.
    CubicFamily(GPoly),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionDecomposition {
    pub mode: RegressionMode,
    pub lambda: f64,
}

impl RegressionDecomposition {
    pub fn linear(lambda: f64) -> Self {
        Self { mode: RegressionMode::Linear, lambda }
    }

    pub fn family(lambda: f64, g: GPoly) -> Self {
        Self { mode: RegressionMode::CubicFamily(g), lambda }
    }

    pub fn g(&self, w: f64) -> f64 {
        match self.mode {
            RegressionMode::Linear => w,
            RegressionMode::CubicFamily(GPoly { k, a1, a2 }) => {
                let p = w.powi(2 * k as i32 - 1);
                a1 * p + a2 * p * w * w
            }
        }
    }

    /// `R(s) = E(W − W′ | S = s) − λ g(w)`.
    pub fn remainder_at(&self, s: i64, p: ModelParams, rv: &RescaledVariable) -> Result<f64> {
        Ok(exact_regression(s, p, rv)? - self.lambda * self.g(rv.map(s)))
    }
}

/// Expectations of the Taylor remainders r₁ and r₃/(2λ) in the linear case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemainderDiagnostics {
    pub e_abs_r1: f64,
    pub e_abs_r3_over_2lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonUniformRow {
    pub z: f64,
    pub diff: f64,
    /// `diff · (1 + |z|)` or `diff · (1 + |g(z)|)`.
    pub weighted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteinReport {
    pub params: ModelParams,
    pub phase_m: f64,
    pub decomposition: RegressionDecomposition,
    pub lambda: f64,
    pub a: f64,
    pub term_delta2: f64,
    pub term_r: f64,
    pub term_a: f64,
    pub be_bound: f64,
    pub kolmogorov: f64,
    pub abs_first_moment: f64,
    /// E|W| ≤ 2.
    pub hypothesis_ok: bool,
    pub max_abs_step: f64,
    pub mean_regression: f64,
    pub diagnostics: RemainderDiagnostics,
    pub nonuniform: Vec<NonUniformRow>,
    pub nonuniform_sup: f64,
    pub regression_curve: Vec<(f64, f64)>,
}

impl SteinReport {
    pub const CSV_HEADER: &'static str = "n,K,J,dK,bound_term1,bound_term2,bound_term3,be_bound";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:e},{:e},{:e},{:e},{:e}",
            self.params.n,
            self.params.k,
            self.params.j,
            self.kolmogorov,
            self.term_delta2,
            self.term_r,
            self.term_a,
            self.be_bound
        )
    }
}

/// Default z grid of the non-uniform table.
pub fn default_z_grid() -> Vec<f64> {
    (0..=80).map(|i| -4.0 + 0.1 * i as f64).collect()
}

/// `(z, |F_n(z) − target(z)|, weighted)` with weight `1 + |g(z)|`.
pub fn nonuniform_table(
    law: &MagnetizationLaw,
    rv: &RescaledVariable,
    target: &LimitDensity,
    decomp: &RegressionDecomposition,
    zs: &[f64],
) -> Vec<NonUniformRow> {
    zs.iter()
        .map(|&z| {
            let diff = (law.cdf_rescaled(rv, z) - target.cdf(z)).abs();
            NonUniformRow { z, diff, weighted: diff * (1.0 + decomp.g(z).abs()) }
        })
        .collect()
}

/// Plug-in Berry–Esseen certificate: every expectation is an exact sum over
/// the support of `law`.
pub fn be_certificate(
    law: &MagnetizationLaw,
    rv: &RescaledVariable,
    target: &LimitDensity,
    decomp: &RegressionDecomposition,
) -> Result<SteinReport> {
    let p = law.params();
    if p.n < 2 {
        return Err(Error::Domain("the pair needs n >= 2".into()));
    }
    let lambda = decomp.lambda;
    if !(lambda > 0.0) {
        return Err(Error::InvalidParams(format!("λ must be positive, got {lambda}")));
    }
    let c = p.couplings();
    let nf = p.n as f64;
    let phase_m = rv.center / nf;
    let c_k = match decomp.mode {
        RegressionMode::Linear => 1.0,
        RegressionMode::CubicFamily(_) => target.log_c().exp(),
    };

    let mut term_delta2 = 0.0;
    let mut e_abs_r = 0.0;
    let mut mean_regression = 0.0;
    let mut e_abs_r1 = 0.0;
    let mut e_abs_r3 = 0.0;
    let mut curve = Vec::new();
    for (j, &q) in law.pmf().iter().enumerate() {
        if q == 0.0 {
            continue;
        }
        let s = law.s_at(j);
        let w = rv.map(s);
        let reg = regression_raw(s, p, rv);
        let d2 = delta2_raw(s, p, rv);
        term_delta2 += q * (1.0 - d2 / (2.0 * lambda)).abs();
        e_abs_r += q * (reg - lambda * decomp.g(w)).abs();
        mean_regression += q * reg;

        let (tp, tm) = flip_means(s, p);
        let (np, nm) = counts(s, p.n);
        let m = s as f64 / nf;
        let t_full = (c.j * m + c.k * m * m).tanh();
        let r1 = (t_full - (np * tp + nm * tm) / nf) / rv.scale;
        let r3 = 2.0 / (rv.scale * rv.scale) * (np * (tp - t_full) - nm * (tm - t_full)) / nf;
        e_abs_r1 += q * r1.abs();
        e_abs_r3 += q * r3.abs();
        if q > 1e-15 {
            curve.push((w, reg));
        }
    }
    let term_r = e_abs_r / (c_k * lambda);
    let a = 2.0 / rv.scale;
    let term_a = 3.0 * a;
    let abs_first_moment = law.abs_moment(rv, 1.0);
    let nonuniform = nonuniform_table(law, rv, target, decomp, &default_z_grid());
    let nonuniform_sup = nonuniform.iter().map(|r| r.weighted).fold(0.0, f64::max);
    Ok(SteinReport {
        params: p,
        phase_m,
        decomposition: *decomp,
        lambda,
        a,
        term_delta2,
        term_r,
        term_a,
        be_bound: term_delta2 + term_r + term_a,
        kolmogorov: law.kolmogorov_distance(rv, |z| target.cdf(z)),
        abs_first_moment,
        hypothesis_ok: abs_first_moment <= 2.0,
        max_abs_step: a,
        mean_regression,
        diagnostics: RemainderDiagnostics { e_abs_r1, e_abs_r3_over_2lambda: e_abs_r3 / (2.0 * lambda) },
        nonuniform,
        nonuniform_sup,
        regression_curve: curve,
    })
}

/// Certificate for the pure phase: W = (S − n m*)/σ against N(0, 1).
pub fn pure_phase_certificate(law: &MagnetizationLaw, cfg: &crate::phase::PhaseConfig) -> Result<SteinReport> {
    let p = law.params();
    let c = p.couplings();
    let (m, _) = crate::phase::m_star(c, cfg)?;
    let rv = RescaledVariable::around(p.n, c, m)?;
    let (lambda, _) = lambda_forms(c, m, p.n)?;
    be_certificate(law, &rv, &LimitDensity::standard_normal(), &RegressionDecomposition::linear(lambda))
}

/// Certificate at (K, J) = (0, 1): W = S/n^{3/4}, λ = n^{−3/2}, g = x³/3,
/// target ∝ exp(−x⁴/12).
pub fn critical_certificate(law: &MagnetizationLaw) -> Result<SteinReport> {
    let n = law.n();
    let rv = RescaledVariable::quartic(n);
    let g = GPoly { k: 2, a1: 1.0 / 3.0, a2: 0.0 };
    let target = LimitDensity::family(0.0, g.k, g.a1, g.a2)?;
    be_certificate(law, &rv, &target, &RegressionDecomposition::family((n as f64).powf(-1.5), g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::law::build_law;
    use crate::phase::{m_star, PhaseConfig};

    fn params(k: f64, j: f64, n: usize) -> ModelParams {
        ModelParams::new(k, j, n).unwrap()
    }

    fn gibbs_log_weight(k: f64, j: f64, n: usize, s: i64) -> f64 {
        let nf = n as f64;
        let m = s as f64 / nf;
        nf * (k / 3.0 * m.powi(3) + j / 2.0 * m * m)
    }

    /// Per-configuration oracle: for every x and every site i the resampling
    /// probability is read off the Gibbs weights of the two completions, and
    /// the results are averaged over configurations with the same S.
    /// Returns `(E(X_I − X_I′ | S), E((X_I − X_I′)² | S), mean flip field)`
    /// indexed by number of up-spins.
    fn enumerate_pair(k: f64, j: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
        let mut num1 = vec![0.0; n + 1];
        let mut num2 = vec![0.0; n + 1];
        let mut den = vec![0.0; n + 1];
        for mask in 0u32..(1 << n) {
            let x: Vec<i64> = (0..n).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }).collect();
            let s: i64 = x.iter().sum();
            let w = gibbs_log_weight(k, j, n, s).exp();
            let mut d1 = 0.0;
            let mut d2 = 0.0;
            for xi in &x {
                let rest = s - xi;
                let up = gibbs_log_weight(k, j, n, rest + 1).exp();
                let down = gibbs_log_weight(k, j, n, rest - 1).exp();
                let p_up = up / (up + down);
                // X_i' = +1 with p_up, −1 otherwise
                d1 += p_up * (*xi as f64 - 1.0) + (1.0 - p_up) * (*xi as f64 + 1.0);
                d2 += p_up * (*xi as f64 - 1.0).powi(2) + (1.0 - p_up) * (*xi as f64 + 1.0).powi(2);
            }
            let idx = mask.count_ones() as usize;
            num1[idx] += w * d1 / n as f64;
            num2[idx] += w * d2 / n as f64;
            den[idx] += w;
        }
        (num1.iter().zip(&den).map(|(a, b)| a / b).collect(), num2.iter().zip(&den).map(|(a, b)| a / b).collect())
    }

    #[test]
    fn free_spins_have_zero_field() {
        for s in [-4i64, 0, 2] {
            assert_eq!(conditional_flip_mean(s, params(0.0, 0.0, 4)).unwrap(), (0.0, 0.0));
        }
        assert!(conditional_flip_mean(3, params(0.0, 0.0, 4)).is_err());
        assert!(conditional_flip_mean(6, params(0.0, 0.0, 4)).is_err());
        assert!(conditional_flip_mean(1, params(0.0, 0.0, 1)).is_err());
    }

    #[test]
    fn all_up_configuration() {
        let p = params(0.4, 0.9, 7);
        let (tp, _) = conditional_flip_mean(7, p).unwrap();
        let mi: f64 = 6.0 / 7.0;
        assert_eq!(tp, (0.9 * mi + 0.4 * mi * mi + 0.4 / (3.0 * 49.0)).tanh());
        let rv = RescaledVariable::new(0.0, 1.0).unwrap();
        // only up-spins exist, so only t_plus enters
        assert!((exact_regression(7, p, &rv).unwrap() - (1.0 - tp)).abs() < 1e-15);
    }

    #[test]
    fn matches_configuration_enumeration() {
        for &(k, j) in &[(0.0, 0.7), (0.3, 0.5), (1.0, 1.3), (0.6, -0.4)] {
            for n in 2..=10 {
                let p = params(k, j, n);
                let rv = RescaledVariable::new(0.3 * n as f64, (n as f64).sqrt()).unwrap();
                let (e1, e2) = enumerate_pair(k, j, n);
                for up in 0..=n {
                    let s = 2 * up as i64 - n as i64;
                    let reg = exact_regression(s, p, &rv).unwrap();
                    let d2 = exact_delta2(s, p, &rv).unwrap();
                    let want1 = e1[up] / rv.scale;
                    let want2 = e2[up] / (rv.scale * rv.scale);
                    assert!((reg - want1).abs() <= 1e-12 * want1.abs().max(1e-3), "{k} {j} {n} {s}");
                    assert!((d2 - want2).abs() <= 1e-12 * want2.abs(), "{k} {j} {n} {s}");
                    // mean of E(X_i'|x) over sites from (t+, t-, n+)
                    let (tp, tm) = conditional_flip_mean(s, p).unwrap();
                    let (np, nm) = counts(s, n);
                    let avg = (np * tp + nm * tm) / n as f64;
                    assert!((s as f64 / n as f64 - avg - e1[up]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn independent_spins() {
        let n = 400;
        let law = build_law(params(0.0, 0.0, n)).unwrap();
        let rv = RescaledVariable::pure_phase(law.params(), &PhaseConfig::default()).unwrap();
        let (lambda, _) = lambda_forms(Couplings::new(0.0, 0.0).unwrap(), 0.0, n).unwrap();
        assert_eq!(lambda, 1.0 / n as f64);
        for s in [-400i64, -10, 0, 38] {
            let w = rv.map(s);
            assert!((exact_regression(s, law.params(), &rv).unwrap() - lambda * w).abs() < 1e-16);
            assert!((exact_delta2(s, law.params(), &rv).unwrap() - 2.0 * lambda).abs() < 1e-16);
        }
        let rep = pure_phase_certificate(&law, &PhaseConfig::default()).unwrap();
        assert!(rep.term_delta2.abs() < 1e-12);
        assert!(rep.term_r.abs() < 1e-12);
        assert!((rep.be_bound - 6.0 / (n as f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn lambda_forms_agree_and_lie_in_unit_interval() {
        for &(k, j) in &[(0.2, 0.5), (0.2, 1.1), (0.5, 0.8), (0.0, 0.5), (1.0, 2.0)] {
            let c = Couplings::new(k, j).unwrap();
            let (m, _) = m_star(c, &PhaseConfig::default()).unwrap();
            let (a, b) = lambda_forms(c, m, 1).unwrap();
            assert!((a - b).abs() < 1e-12);
            assert!(a > 0.0 && a < 1.0);
        }
    }

    #[test]
    fn decomposition_is_exact_and_centered() {
        let law = build_law(params(0.2, 0.5, 3000)).unwrap();
        let c = law.couplings();
        let rv = RescaledVariable::pure_phase(law.params(), &PhaseConfig::default()).unwrap();
        let (lambda, _) = lambda_forms(c, 0.0, 3000).unwrap();
        let d = RegressionDecomposition::linear(lambda);
        let mut mean = 0.0;
        let mut mean_d2 = 0.0;
        for (j, q) in law.pmf().iter().enumerate() {
            let s = law.s_at(j);
            let reg = exact_regression(s, law.params(), &rv).unwrap();
            let r = d.remainder_at(s, law.params(), &rv).unwrap();
            assert_eq!(reg - lambda * rv.map(s), r);
            mean += q * reg;
            mean_d2 += q * exact_delta2(s, law.params(), &rv).unwrap() * rv.scale * rv.scale / 2.0;
            assert!(rv.map(s + 2) - rv.map(s) <= 2.0 / rv.scale + 1e-15);
        }
        assert!(mean.abs() < 1e-12);
        assert!(mean_d2 > 0.0 && mean_d2 <= 1.0);
    }

    #[test]
    fn regression_slope_matches_lambda() {
        let n = 10_000;
        let law = build_law(params(0.2, 0.5, n)).unwrap();
        let rv = RescaledVariable::pure_phase(law.params(), &PhaseConfig::default()).unwrap();
        let (lambda, _) = lambda_forms(law.couplings(), 0.0, n).unwrap();
        let pts: Vec<(f64, f64)> = law
            .support()
            .map(|s| (rv.map(s), exact_regression(s, law.params(), &rv).unwrap()))
            .filter(|(w, _)| w.abs() <= 1.0)
            .collect();
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
            / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        assert!((slope / lambda - 1.0).abs() <= 0.1, "{slope} {lambda}");
    }

    #[test]
    fn certificate_dominates_distance() {
        let law = build_law(params(0.2, 0.5, 4096)).unwrap();
        let rep = pure_phase_certificate(&law, &PhaseConfig::default()).unwrap();
        assert!(rep.hypothesis_ok);
        assert!(rep.be_bound >= rep.kolmogorov);
        assert!(rep.lambda > 0.0 && rep.lambda < 1.0);
        assert!(rep.mean_regression.abs() < 1e-12);
        assert_eq!(rep.a, 2.0 / RescaledVariable::pure_phase(law.params(), &PhaseConfig::default()).unwrap().scale);
        let json = serde_json::to_string(&rep).unwrap();
        assert!(json.contains("\"term_delta2\""));
        assert_eq!(rep.csv_row().split(',').count(), SteinReport::CSV_HEADER.split(',').count());
    }

    #[test]
    fn terms_decrease_along_n() {
        let mut prev = (f64::INFINITY, f64::INFINITY);
        for e in 8..=13 {
            let law = build_law(params(0.2, 1.1, 1 << e)).unwrap();
            let rep = pure_phase_certificate(&law, &PhaseConfig::default()).unwrap();
            assert!(rep.term_delta2 < prev.0 && rep.term_r < prev.1, "n=2^{e}");
            prev = (rep.term_delta2, rep.term_r);
            // order claims on the Taylor remainders
            let n = (1u64 << e) as f64;
            assert!(rep.diagnostics.e_abs_r1 * n.powf(1.5) < 50.0);
            assert!(rep.diagnostics.e_abs_r3_over_2lambda * n < 50.0);
        }
    }

    #[test]
    fn critical_certificate_shrinks() {
        let a = critical_certificate(&build_law(params(0.0, 1.0, 1 << 10)).unwrap()).unwrap();
        let b = critical_certificate(&build_law(params(0.0, 1.0, 1 << 14)).unwrap()).unwrap();
        assert!(b.be_bound < a.be_bound);
        assert!(b.kolmogorov < a.kolmogorov);
        assert!(b.mean_regression.abs() < 1e-12);
    }
}
