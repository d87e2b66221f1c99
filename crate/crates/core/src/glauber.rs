//! Heat-bath Glauber dynamics on spin configurations.
//!
//! One step picks a uniform site I and redraws its spin from the exact
//! two-point conditional law given the other spins. The local field carries
//! the K/(3n²) self-term, which makes the kernel reversible for the Gibbs
//! weight `exp(n(K m³/3 + J m²/2))`.
//!
//! Randomness: each chain owns a `ChaCha20Rng` seeded with
//! `seed_from_u64(seed)` and switched to `set_stream(stream)`. Chain `c` of a
//! multi-chain run uses stream `c`. Per step the generator yields one index
//! draw followed by one uniform `f64`; the initial configuration consumes `n`
//! boolean draws before the first step.

use std::io::Write;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::law::MagnetizationLaw;
use crate::model::{Couplings, ModelParams};
use crate::stein::local_field;

/// Probability that the redrawn spin is +1 given the sum of the other spins.
pub fn flip_up_probability(c: Couplings, n: usize, s_rest: i64) -> f64 {
    let u = local_field(c, n, s_rest);
    1.0 / (1.0 + (-2.0 * u).exp())
}

#[derive(Debug, Clone)]
pub struct ChainState {
    spins: Vec<i8>,
    s_cache: i64,
    rng: ChaCha20Rng,
    step_count: u64,
}

impl ChainState {
    /// Chain with independent uniform initial spins drawn from the stream.
    pub fn new(n: usize, seed: u64, stream: u64) -> Result<Self> {
        let mut rng = Self::rng(seed, stream);
        let spins: Vec<i8> = (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        Self::from_parts(spins, rng)
    }

    /// Chain started from a given configuration.
    pub fn from_spins(spins: Vec<i8>, seed: u64, stream: u64) -> Result<Self> {
        Self::from_parts(spins, Self::rng(seed, stream))
    }

    fn rng(seed: u64, stream: u64) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        rng
    }

    fn from_parts(spins: Vec<i8>, rng: ChaCha20Rng) -> Result<Self> {
        if spins.len() < 2 {
            return Err(Error::InvalidParams(format!("a chain needs n >= 2 spins, got {}", spins.len())));
        }
        if spins.iter().any(|x| *x != 1 && *x != -1) {
            return Err(Error::InvalidParams("spins must be +1 or -1".into()));
        }
        let s_cache = spins.iter().map(|x| *x as i64).sum();
        Ok(Self { spins, s_cache, rng, step_count: 0 })
    }

    pub fn n(&self) -> usize {
        self.spins.len()
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    /// Running total magnetization S_n.
    pub fn s(&self) -> i64 {
        self.s_cache
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    fn recomputed_s(&self) -> i64 {
        self.spins.iter().map(|x| *x as i64).sum()
    }
}

/// Outcome of one heat-bath step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepRecord {
    pub site: usize,
    pub old: i8,
    pub new: i8,
}

/// One heat-bath update; O(1) apart from the RNG.
pub fn heat_bath_step(state: &mut ChainState, c: Couplings) -> StepRecord {
    let n = state.spins.len();
    let site = state.rng.random_range(0..n);
    let old = state.spins[site];
    let p_up = flip_up_probability(c, n, state.s_cache - old as i64);
    let new: i8 = if state.rng.random::<f64>() < p_up { 1 } else { -1 };
    state.spins[site] = new;
    state.s_cache += (new - old) as i64;
    state.step_count += 1;
    #[cfg(debug_assertions)]
    #[allow(clippy::manual_is_multiple_of)]
    if state.step_count % 10_000 == 0 {
        assert_eq!(state.s_cache, state.recomputed_s(), "incremental S_n drifted");
    }
    StepRecord { site, old, new }
}

/// Dense heat-bath kernel on `{−1,+1}^n`, rows indexed by the bit pattern
/// (bit i set means spin i is +1). Limited to n ≤ 12.
pub fn dense_kernel(p: ModelParams) -> Result<Vec<Vec<f64>>> {
    let n = p.n;
    if !(2..=12).contains(&n) {
        return Err(Error::InvalidParams(format!("dense kernel needs 2 <= n <= 12, got {n}")));
    }
    let c = p.couplings();
    let size = 1usize << n;
    let mut kernel = vec![vec![0.0; size]; size];
    for (x, row) in kernel.iter_mut().enumerate() {
        let s = 2 * x.count_ones() as i64 - n as i64;
        for i in 0..n {
            let up = x & (1 << i) != 0;
            let s_rest = s - if up { 1 } else { -1 };
            let q = flip_up_probability(c, n, s_rest) / n as f64;
            row[x | (1 << i)] += q;
            row[x & !(1 << i)] += 1.0 / n as f64 - q;
        }
    }
    Ok(kernel)
}

/// Stationary vector of a row-stochastic matrix by power iteration from the
/// uniform vector; stops once the L1 change drops below `tol`.
pub fn power_iteration(kernel: &[Vec<f64>], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let size = kernel.len();
    let mut pi = vec![1.0 / size as f64; size];
    for _ in 0..max_iter {
        let mut next = vec![0.0; size];
        for (x, row) in kernel.iter().enumerate() {
            for (y, k) in row.iter().enumerate() {
                next[y] += pi[x] * k;
            }
        }
        let change: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        pi = next;
        if change < tol {
            return Ok(pi);
        }
    }
    Err(Error::Integrability(format!("power iteration did not reach {tol} in {max_iter} sweeps")))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub n_samples: usize,
    /// Burn-in in sweeps of n steps; `None` means 100.
    pub burn_in_sweeps: Option<usize>,
    /// Steps between recorded samples; `None` means n.
    pub thinning: Option<usize>,
    pub seed: u64,
    /// Largest acceptable integrated autocorrelation time, in samples.
    pub tau_budget: f64,
}

impl SamplerConfig {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        Self { n_samples, burn_in_sweeps: None, thinning: None, seed, tau_budget: 20.0 }
    }
}

/// Run metadata, written next to sample dumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMetadata {
    pub n: usize,
    pub k: f64,
    pub j: f64,
    pub seed: u64,
    pub stream: u64,
    pub rng: String,
    pub burn_in_steps: u64,
    pub thinning: usize,
    pub n_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleResult {
    pub metadata: SampleMetadata,
    /// Recorded S_n values in chain order.
    pub samples: Vec<i64>,
    /// Empirical pmf on the support −n, −n+2, …, n.
    pub pmf: Vec<f64>,
    /// Integrated autocorrelation time of S_n in units of recorded samples.
    pub tau_int: f64,
    pub mixing_warning: Option<String>,
}

impl SampleResult {
    pub fn mean_s(&self) -> f64 {
        self.samples.iter().map(|s| *s as f64).sum::<f64>() / self.samples.len() as f64
    }

    /// Standard error of the mean of S_n, inflated by the autocorrelation time.
    pub fn std_error_s(&self) -> f64 {
        let m = self.mean_s();
        let len = self.samples.len() as f64;
        let var = self.samples.iter().map(|s| (*s as f64 - m).powi(2)).sum::<f64>() / (len - 1.0).max(1.0);
        (var * self.tau_int.max(1.0) / len).sqrt()
    }

    /// Kolmogorov distance between the empirical and an exact law of S_n.
    pub fn ks_distance(&self, law: &MagnetizationLaw) -> Result<f64> {
        if law.n() != self.metadata.n {
            return Err(Error::InvalidParams(format!("law has n = {}, samples have n = {}", law.n(), self.metadata.n)));
        }
        let (mut fe, mut fx, mut d) = (0.0f64, 0.0f64, 0.0f64);
        for (a, b) in self.pmf.iter().zip(law.pmf()) {
            fe += a;
            fx += b;
            d = d.max((fe - fx).abs());
        }
        Ok(d)
    }

    /// Sample dump as `step,s` where step counts heat-bath updates.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,s\n");
        let (b, t) = (self.metadata.burn_in_steps, self.metadata.thinning as u64);
        for (i, s) in self.samples.iter().enumerate() {
            out.push_str(&format!("{},{}\n", b + t * (i as u64 + 1), s));
        }
        out
    }

    /// Sample dump as little-endian i64 values.
    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for s in &self.samples {
            w.write_all(&s.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn metadata_json(&self) -> String {
        serde_json::to_string_pretty(&self.metadata).expect("metadata serializes")
    }
}

/// Initial-sequence estimate of the integrated autocorrelation time with
/// Sokal's self-consistent window (c = 5).
pub fn integrated_autocorrelation(xs: &[i64]) -> f64 {
    let len = xs.len();
    if len < 2 {
        return 1.0;
    }
    let mean = xs.iter().map(|x| *x as f64).sum::<f64>() / len as f64;
    let dev: Vec<f64> = xs.iter().map(|x| *x as f64 - mean).collect();
    let c0: f64 = dev.iter().map(|d| d * d).sum::<f64>() / len as f64;
    if c0 == 0.0 {
        return 1.0;
    }
    let mut tau = 1.0;
    for lag in 1..len {
        let c: f64 = dev[..len - lag].iter().zip(&dev[lag..]).map(|(a, b)| a * b).sum::<f64>() / len as f64;
        tau += 2.0 * c / c0;
        if lag as f64 >= 5.0 * tau {
            break;
        }
    }
    tau.max(1.0)
}

/// Runs one chain (stream `stream`) and records `n_samples` values of S_n.
pub fn sample_chain(p: ModelParams, cfg: &SamplerConfig, stream: u64) -> Result<SampleResult> {
    if cfg.n_samples < 1 {
        return Err(Error::InvalidParams("n_samples must be at least 1".into()));
    }
    let n = p.n;
    let thinning = cfg.thinning.unwrap_or(n);
    if thinning < 1 {
        return Err(Error::InvalidParams("thinning must be at least 1".into()));
    }
    let burn_in_steps = (cfg.burn_in_sweeps.unwrap_or(100) * n) as u64;
    let c = p.couplings();
    let mut state = ChainState::new(n, cfg.seed, stream)?;
    for _ in 0..burn_in_steps {
        heat_bath_step(&mut state, c);
    }
    let mut samples = Vec::with_capacity(cfg.n_samples);
    let mut counts = vec![0usize; n + 1];
    for _ in 0..cfg.n_samples {
        for _ in 0..thinning {
            heat_bath_step(&mut state, c);
        }
        let s = state.s();
        samples.push(s);
        counts[((s + n as i64) / 2) as usize] += 1;
    }
    debug_assert_eq!(state.s(), state.recomputed_s());
    let pmf = counts.iter().map(|k| *k as f64 / cfg.n_samples as f64).collect();
    let tau_int = integrated_autocorrelation(&samples);
    let mixing_warning = (tau_int > cfg.tau_budget).then(|| {
        let msg = format!(
            "slow mixing at (K, J, n) = ({}, {}, {}): tau_int = {tau_int:.1} samples exceeds budget {}",
            p.k, p.j, n, cfg.tau_budget
        );
        warn!("{msg}");
        msg
    });
    Ok(SampleResult {
        metadata: SampleMetadata {
            n,
            k: p.k,
            j: p.j,
            seed: cfg.seed,
            stream,
            rng: "ChaCha20Rng::seed_from_u64(seed), set_stream(stream)".into(),
            burn_in_steps,
            thinning,
            n_samples: cfg.n_samples,
        },
        samples,
        pmf,
        tau_int,
        mixing_warning,
    })
}

/// Single-chain run on stream 0.
pub fn sample_magnetization(p: ModelParams, cfg: &SamplerConfig) -> Result<SampleResult> {
    sample_chain(p, cfg, 0)
}

/// Independent chains on streams `0..chains`, run in parallel.
pub fn sample_chains(p: ModelParams, cfg: &SamplerConfig, chains: usize) -> Result<Vec<SampleResult>> {
    (0..chains as u64).into_par_iter().map(|c| sample_chain(p, cfg, c)).collect()
}
