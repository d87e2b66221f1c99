//! Log-log rate fits and parameter grid parsing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares line through `(ln n, ln value)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: usize,
}

impl RateFit {
    pub fn fit(ns: &[f64], values: &[f64]) -> Result<Self> {
        if ns.len() != values.len() || ns.len() < 2 {
            return Err(Error::InvalidParams("rate fit needs at least two paired points".into()));
        }
        if ns.iter().chain(values).any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParams("rate fit needs positive finite values".into()));
        }
        let xs: Vec<f64> = ns.iter().map(|v| v.ln()).collect();
        let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
        let k = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / k;
        let my = ys.iter().sum::<f64>() / k;
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
        if sxx == 0.0 {
            return Err(Error::InvalidParams("rate fit needs at least two distinct n".into()));
        }
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
        Ok(Self { slope, intercept, r2, points: xs.len() })
    }

    /// Fitted constant c in `value ≈ c · n^slope`.
    pub fn constant(&self) -> f64 {
        self.intercept.exp()
    }
}

/// Parses a grid such as `0.1,0.5`, `0:5:0.5` (arithmetic) or `1024:65536:x2`
/// (geometric). Comma-separated pieces are concatenated.
pub fn parse_grid(raw: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for piece in raw.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let parts: Vec<&str> = piece.split(':').map(str::trim).collect();
        match parts.as_slice() {
            [single] => out.push(number(single)?),
            [start, stop, step] => {
                let (a, b) = (number(start)?, number(stop)?);
                if let Some(factor) = step.strip_prefix('x') {
                    let f = number(factor)?;
                    if !(f > 1.0) || !(a > 0.0) {
                        return Err(bad(piece, "geometric grid needs start > 0 and factor > 1"));
                    }
                    let mut v = a;
                    while v <= b * (1.0 + 1e-12) {
                        out.push(v);
                        v *= f;
                    }
                } else {
                    let h = number(step)?;
                    if !(h > 0.0) {
                        return Err(bad(piece, "step must be positive"));
                    }
                    let count = ((b - a) / h + 1e-9).floor();
                    if count < 0.0 {
                        return Err(bad(piece, "stop is below start"));
                    }
                    for i in 0..=(count as usize) {
                        out.push(a + h * i as f64);
                    }
                }
            }
            _ => return Err(bad(piece, "expected value or start:stop:step")),
        }
    }
    if out.is_empty() {
        return Err(bad(raw, "empty grid"));
    }
    Ok(out)
}

/// Integer grid for system sizes; every entry must be a positive integer.
pub fn parse_n_grid(raw: &str) -> Result<Vec<usize>> {
    parse_grid(raw)?
        .into_iter()
        .map(|v| {
            let r = v.round();
            if r >= 1.0 && (v - r).abs() < 1e-6 * r.max(1.0) {
                Ok(r as usize)
            } else {
                Err(bad(raw, "system sizes must be positive integers"))
            }
        })
        .collect()
}

/// `2^lo, 2^(lo+1), …, 2^hi`.
pub fn powers_of_two(lo: u32, hi: u32) -> Vec<usize> {
    (lo..=hi).map(|e| 1usize << e).collect()
}

fn number(s: &str) -> Result<f64> {
    s.parse::<f64>().map_err(|_| bad(s, "not a number"))
}

fn bad(s: &str, why: &str) -> Error {
    Error::InvalidParams(format!("grid '{s}': {why}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let ns = [10.0, 100.0, 1000.0];
        let v: Vec<f64> = ns.iter().map(|n: &f64| 3.0 * n.powf(-0.5)).collect();
        let f = RateFit::fit(&ns, &v).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12);
        assert!((f.constant() - 3.0).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_rejects_bad_input() {
        assert!(RateFit::fit(&[1.0], &[1.0]).is_err());
        assert!(RateFit::fit(&[1.0, 2.0], &[1.0, 0.0]).is_err());
        assert!(RateFit::fit(&[2.0, 2.0], &[1.0, 3.0]).is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0:1:0.25").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_n_grid("1024:8192:x2").unwrap(), vec![1024, 2048, 4096, 8192]);
        assert_eq!(parse_grid("0.1, 0.5,2").unwrap(), vec![0.1, 0.5, 2.0]);
        assert_eq!(parse_n_grid("100,1000:3000:1000").unwrap(), vec![100, 1000, 2000, 3000]);
        assert!(parse_grid("1:0:1").is_err());
        assert!(parse_grid("a").is_err());
        assert!(parse_grid("1:2:x1").is_err());
        assert!(parse_n_grid("0.5").is_err());
        assert!(parse_grid("").is_err());
        assert_eq!(powers_of_two(10, 12), vec![1024, 2048, 4096]);
    }
}
