//! Limit laws p(y) ∝ exp(−G(y)) with polynomial G: the standard normal, the
//! family G(y) = q y²/2 + ∫₀^y (a₁t^{2k−1} + a₂t^{2k+1}) dt, the critical
//! quartic and the mixed quadratic–quartic threshold law.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{integrate, normal_cdf, normal_tail};

const PANELS: usize = 256;
const PANEL_TOL: f64 = 1e-15;
const TAIL_CUT: f64 = 1e-17;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GPoly {
    pub k: u32,
    pub a1: f64,
    pub a2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitDensity {
    pub quadratic_coeff: f64,
    pub g_poly: Option<GPoly>,
    pub quadrature_tolerance: f64,
    /// G(y) = Σ coeffs[i] yⁱ.
    coeffs: Vec<f64>,
    gaussian: bool,
    symmetric: bool,
    half_width: f64,
    /// ∫_{−L}^{L} e^{−G}.
    mass: f64,
    /// `cum[i] = ∫_{−L}^{x_i} e^{−G}` at the panel edges.
    cum: Vec<f64>,
}

fn horner(c: &[f64], y: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * y + a)
}

fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(i, a)| i as f64 * a).collect()
}

/// Cauchy bound on the magnitude of real roots.
fn root_bound(c: &[f64]) -> f64 {
    let lead = *c.last().unwrap();
    1.0 + c[..c.len() - 1].iter().map(|a| (a / lead).abs()).fold(0.0, f64::max)
}

impl LimitDensity {
    pub fn standard_normal() -> Self {
        let mut d = Self::from_potential(vec![0.0, 0.0, 0.5]).expect("gaussian is integrable");
        d.gaussian = true;
        d.quadratic_coeff = 1.0;
        d
    }

    /// `G(y) = q y²/2 + a₁ y^{2k}/(2k) + a₂ y^{2k+2}/(2k+2)`.
    pub fn family(q: f64, k: u32, a1: f64, a2: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParams("k must be at least 1".into()));
        }
        let deg = 2 * k as usize + 2;
        let mut c = vec![0.0; deg + 1];
        c[2] += q / 2.0;
        c[2 * k as usize] += a1 / (2 * k) as f64;
        c[deg] += a2 / deg as f64;
        let mut d = Self::from_potential(c)?;
        d.quadratic_coeff = q;
        d.g_poly = Some(GPoly { k, a1, a2 });
        Ok(d)
    }

    /// Critical law ∝ exp(−J³y⁴/12).
    pub fn quartic(j: f64) -> Result<Self> {
        Self::family(0.0, 2, j.powi(3) / 3.0, 0.0)
    }

    /// Threshold law ∝ exp(α y²/2 − J³ y⁴/12).
    pub fn mixed(alpha: f64, j: f64) -> Result<Self> {
        Self::family(-alpha, 2, j.powi(3) / 3.0, 0.0)
    }

    /// Arbitrary polynomial potential given by its coefficients in y.
    pub fn from_potential(mut coeffs: Vec<f64>) -> Result<Self> {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidParams("non-finite potential coefficient".into()));
        }
        let deg = coeffs.len().saturating_sub(1);
        if deg < 2 || deg % 2 == 1 || coeffs[deg] <= 0.0 {
            return Err(Error::Integrability(format!(
                "leading term of G must be an even power with positive coefficient, got {coeffs:?}"
            )));
        }
        coeffs[0] = 0.0;
        let symmetric = coeffs.iter().skip(1).step_by(2).all(|&a| a == 0.0);
        let quadratic_coeff = 2.0 * coeffs[2];

        let d1 = derivative(&coeffs);
        let d2 = derivative(&d1);
        let mut half_width = root_bound(&d1).max(root_bound(&d2)).max(1.0);
        let tail_bound = |y: f64| (-horner(&coeffs, y)).exp() / horner(&d1, y).abs();
        let mut guard = 0;
        while tail_bound(half_width) > TAIL_CUT || tail_bound(-half_width) > TAIL_CUT {
            half_width *= 2.0;
            guard += 1;
            if guard > 60 {
                return Err(Error::Integrability("truncation radius diverged".into()));
            }
        }

        let f = |y: f64| (-horner(&coeffs, y)).exp();
        let h = 2.0 * half_width / PANELS as f64;
        let mut cum = Vec::with_capacity(PANELS + 1);
        cum.push(0.0);
        let mut acc = 0.0;
        for i in 0..PANELS {
            let a = -half_width + h * i as f64;
            acc += integrate(f, a, a + h, PANEL_TOL);
            cum.push(acc);
        }
        let mass = if symmetric { 2.0 * cum[PANELS / 2] } else { acc };
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::Integrability(format!("total mass {mass}")));
        }
        let outer = integrate(f, half_width, 2.0 * half_width, PANEL_TOL)
            + integrate(f, -2.0 * half_width, -half_width, PANEL_TOL);
        if outer > 1e-14 * mass {
            return Err(Error::Integrability(format!("mass beyond |y| = {half_width} is {outer}")));
        }
        Ok(Self {
            quadratic_coeff,
            g_poly: None,
            quadrature_tolerance: 1e-10,
            coeffs,
            gaussian: false,
            symmetric,
            half_width,
            mass,
            cum,
        })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Truncation radius L of the cached quadrature.
    pub fn truncation(&self) -> f64 {
        self.half_width
    }

    /// `log c` with c = 1 / ∫ e^{−G}.
    pub fn log_c(&self) -> f64 {
        if self.gaussian {
            -0.5 * (2.0 * std::f64::consts::PI).ln()
        } else {
            -self.mass.ln()
        }
    }

    /// ∫ e^{−G}.
    pub fn integral(&self) -> f64 {
        if self.gaussian {
            (2.0 * std::f64::consts::PI).sqrt()
        } else {
            self.mass
        }
    }

    pub fn potential(&self, y: f64) -> f64 {
        horner(&self.coeffs, y)
    }

    /// G′(y), the score of the density.
    pub fn score(&self, y: f64) -> f64 {
        let mut acc = 0.0;
        for (i, a) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * y + i as f64 * a;
        }
        acc
    }

    pub fn pdf(&self, y: f64) -> f64 {
        (self.log_c() - self.potential(y)).exp()
    }

    /// Unnormalized mass of (−∞, z] for z ≤ 0 or z within the panel grid.
    fn lower_mass(&self, z: f64) -> f64 {
        let f = |y: f64| (-self.potential(y)).exp();
        let l = self.half_width;
        if z <= -l {
            return self.far_tail(-z, true);
        }
        let h = 2.0 * l / PANELS as f64;
        let i = (((z + l) / h).floor() as usize).min(PANELS - 1);
        let a = -l + h * i as f64;
        self.cum[i] + integrate(f, a, z, PANEL_TOL)
    }

    /// Unnormalized ∫_x^∞ e^{−G} (or ∫_{−∞}^{−x} when `left`), for x beyond
    /// the point where G is convex and increasing in |y|.
    fn far_tail(&self, x: f64, left: bool) -> f64 {
        let sgn = if left { -1.0 } else { 1.0 };
        let g = |y: f64| self.potential(sgn * y);
        let f = |y: f64| (-g(y)).exp();
        let scale = f(x) / (sgn * self.score(sgn * x)).abs().max(1e-300);
        if scale == 0.0 {
            return 0.0;
        }
        let mut upper = x + 1.0;
        while f(upper) / (sgn * self.score(sgn * upper)).abs() > 1e-18 * scale {
            upper = x + 2.0 * (upper - x);
        }
        integrate(f, x, upper, 1e-14 * scale)
    }

    /// `P(Y ≤ z)`.
    pub fn cdf(&self, z: f64) -> f64 {
        if self.gaussian {
            return normal_cdf(z);
        }
        if z == f64::INFINITY {
            return 1.0;
        }
        if z == f64::NEG_INFINITY {
            return 0.0;
        }
        if self.symmetric && z > 0.0 {
            return 1.0 - self.lower_mass(-z) / self.mass;
        }
        if z >= self.half_width {
            return 1.0 - self.far_tail(z, false) / self.mass;
        }
        (self.lower_mass(z) / self.mass).clamp(0.0, 1.0)
    }

    /// `P(Y > x)`, with relative accuracy in the right tail.
    pub fn tail(&self, x: f64) -> f64 {
        if self.gaussian {
            return normal_tail(x);
        }
        if x < 0.0 {
            return 1.0 - self.cdf(x);
        }
        if x >= self.half_width {
            return self.far_tail(x, false) / self.mass;
        }
        if self.symmetric {
            return self.lower_mass(-x) / self.mass;
        }
        let f = |y: f64| (-self.potential(y)).exp();
        (integrate(f, x, self.half_width, PANEL_TOL) + self.far_tail(self.half_width, false)) / self.mass
    }

    /// `(z, pdf, cdf)` rows.
    pub fn table(&self, zs: &[f64]) -> Vec<(f64, f64, f64)> {
        zs.iter().map(|&z| (z, self.pdf(z), self.cdf(z))).collect()
    }

    pub fn to_csv(&self, zs: &[f64]) -> String {
        let mut out = String::from("z,pdf,cdf\n");
        for (z, p, c) in self.table(zs) {
            out.push_str(&format!("{z},{p:e},{c:e}\n"));
        }
        out
    }
}
