//! Exact Boltzmann sampling from the stretch table, and Monte Carlo
//! estimators of the escape probability and of `r_beta`.
//!
//! All randomness comes from ChaCha8 streams keyed by `(seed, chunk)`, with
//! chunks of [`CHUNK`] draws, so results do not depend on how chunks are
//! scheduled.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::exact::{StretchTable, TableBudget, TableKind, Trajectory};
use crate::laplace::{cgf, ModelParams, TiltParam};

/// Samples per independent random stream.
pub const CHUNK: usize = 1024;

fn stream(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Independent draws from the polymer measure at one length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub beta: f64,
    pub length: usize,
    pub seed: u64,
    pub trajectories: Vec<Trajectory>,
}

/// Draw an index with probability proportional to `exp(logs[i])`.
fn pick<R: Rng>(rng: &mut R, logs: &[f64]) -> usize {
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = logs.iter().map(|&l| (l - max).exp()).sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &l) in logs.iter().enumerate() {
        u -= (l - max).exp();
        if u < 0.0 {
            return i;
        }
    }
    // rounding left u marginally positive: take the last positive-weight entry
    logs.iter().rposition(|&l| l > f64::NEG_INFINITY).unwrap_or(0)
}

/// Trace one configuration backwards through a full table.
fn sample_one<R: Rng>(
    table: &StretchTable,
    length: usize,
    rng: &mut R,
    logs: &mut Vec<f64>,
    moves: &mut Vec<i64>,
) -> Trajectory {
    let beta = table.beta();
    let mut rev = Vec::new();
    // terminal stretch at the full length
    logs.clear();
    moves.clear();
    logs.push(table.log_zero_end(length));
    moves.push(0);
    for m in 1..length {
        let w = table.log_cell(length, m);
        logs.extend([w, w]);
        moves.extend([m as i64, -(m as i64)]);
    }
    let mut last = moves[pick(rng, logs)];
    let mut l = length;
    loop {
        rev.push(last);
        let prev = l - 1 - last.unsigned_abs() as usize;
        if prev == 0 {
            break;
        }
        logs.clear();
        moves.clear();
        logs.push(table.log_zero_end(prev));
        moves.push(0);
        let mag = last.unsigned_abs();
        for m in 1..prev {
            let w = table.log_cell(prev, m);
            for sign in [1i64, -1] {
                let s = sign * m as i64;
                let opposite = (s > 0 && last < 0) || (s < 0 && last > 0);
                let gain = if opposite {
                    beta * (m as u64).min(mag) as f64
                } else {
                    0.0
                };
                logs.push(w + gain);
                moves.push(s);
            }
        }
        last = moves[pick(rng, logs)];
        l = prev;
    }
    rev.reverse();
    Trajectory::new(rev)
}

/// Draw from a prebuilt full table.
pub fn sample_from_table(table: &StretchTable, length: usize, count: usize, seed: u64) -> Result<SampleBatch> {
    if table.kind() != TableKind::Full {
        return Err(domain("sample_polymer", "sampling needs a full table"));
    }
    if length < 1 || length > table.l_max() {
        return Err(domain(
            "sample_polymer",
            format!("length must lie in 1..={}, got {length}", table.l_max()),
        ));
    }
    let mut trajectories = Vec::with_capacity(count);
    let mut logs = Vec::new();
    let mut moves = Vec::new();
    for chunk in 0..count.div_ceil(CHUNK) {
        let mut rng = stream(seed, chunk);
        let n = CHUNK.min(count - chunk * CHUNK);
        for _ in 0..n {
            trajectories.push(sample_one(table, length, &mut rng, &mut logs, &mut moves));
        }
    }
    Ok(SampleBatch {
        beta: table.beta(),
        length,
        seed,
        trajectories,
    })
}

/// `count` exact draws from the polymer measure of length `length`.
pub fn sample_polymer(
    params: &ModelParams,
    length: usize,
    count: usize,
    seed: u64,
    budget: &TableBudget,
) -> Result<SampleBatch> {
    let table = StretchTable::build(params, length.max(1), TableKind::Full, budget)?;
    sample_from_table(&table, length, count, seed)
}

impl SampleBatch {
    /// Header line followed by one comma-separated trajectory per line.
    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "# beta={:.16e} L={} seed={} count={}",
            self.beta,
            self.length,
            self.seed,
            self.trajectories.len()
        )?;
        let mut line = String::new();
        for t in &self.trajectories {
            line.clear();
            let _ = write!(line, "{t}");
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(input: R) -> Result<Self> {
        let bad = |detail: String| Error::Format {
            op: "SampleBatch::read_from",
            detail,
        };
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| bad("empty input".into()))?
            .map_err(|e| bad(e.to_string()))?;
        let mut beta = None;
        let mut length = None;
        let mut seed = None;
        for field in header.trim_start_matches('#').split_whitespace() {
            match field.split_once('=') {
                Some(("beta", v)) => beta = v.parse::<f64>().ok(),
                Some(("L", v)) => length = v.parse::<usize>().ok(),
                Some(("seed", v)) => seed = v.parse::<u64>().ok(),
                _ => {}
            }
        }
        let (Some(beta), Some(length), Some(seed)) = (beta, length, seed) else {
            return Err(bad(format!("malformed header {header:?}")));
        };
        let mut trajectories = Vec::new();
        for line in lines {
            let line = line.map_err(|e| bad(e.to_string()))?;
            if line.is_empty() {
                continue;
            }
            let stretches = line
                .split(',')
                .map(|v| v.trim().parse::<i64>().map_err(|e| bad(format!("{v:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            let t = Trajectory::new(stretches);
            if t.length() != length as u64 {
                return Err(bad(format!("trajectory {t} has length {} not {length}", t.length())));
            }
            trajectories.push(t);
        }
        Ok(Self {
            beta,
            length,
            seed,
            trajectories,
        })
    }
}

/// Monte Carlo estimate with its standard error and truncation bias bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub cap_bias_bound: f64,
    pub n_samples: u64,
}

impl McEstimate {
    fn from_sums(sum: f64, sum_sq: f64, n: u64, bias: f64) -> Self {
        let nf = n as f64;
        let mean = sum / nf;
        let var = ((sum_sq / nf - mean * mean) * nf / (nf - 1.0).max(1.0)).max(0.0);
        Self {
            estimate: mean,
            std_error: (var / nf).sqrt(),
            cap_bias_bound: bias,
            n_samples: n,
        }
    }

    /// Distance to `target` in standard errors.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.estimate - target).abs() / self.std_error
    }
}

fn draw_step<R: Rng>(tilt: &TiltParam, rng: &mut R) -> i64 {
    let side = rng.random::<f64>();
    let magnitude = rng.random::<f64>();
    tilt.invert(side, magnitude)
}

/// Fraction of `h`-tilted walks from 0 that stay positive for `step_cap` steps.
///
/// Survivors that would return later bias the estimate upwards by at most
/// `e^{-d (cap+1)} / (1 - e^{-d})` with `d = L(h) - L(h/2)`.
pub fn mc_kappa(params: &ModelParams, h: f64, n_samples: u64, step_cap: u64, seed: u64) -> Result<McEstimate> {
    if !(h > 0.0 && h < 0.5 * params.beta()) {
        return Err(domain(
            "mc_kappa",
            format!("h must lie in (0, beta/2 = {}), got {h}", 0.5 * params.beta()),
        ));
    }
    if n_samples < 2 {
        return Err(domain("mc_kappa", "need at least two samples"));
    }
    let tilt = TiltParam::new(params, h)?;
    let mut hits = 0u64;
    let chunks = (n_samples as usize).div_ceil(CHUNK);
    for chunk in 0..chunks {
        let mut rng = stream(seed, chunk);
        let n = CHUNK.min(n_samples as usize - chunk * CHUNK);
        for _ in 0..n {
            let mut x = 0i64;
            let mut alive = true;
            for _ in 0..step_cap {
                x += draw_step(&tilt, &mut rng);
                if x <= 0 {
                    alive = false;
                    break;
                }
            }
            hits += alive as u64;
        }
    }
    let d = cgf(params, h, 0)? - cgf(params, 0.5 * h, 0)?;
    let bias = (-d * (step_cap as f64 + 1.0)).exp() / -(-d).exp_m1();
    let k = hits as f64;
    Ok(McEstimate::from_sums(k, k, n_samples, bias))
}

/// Estimate of `E[1{X_1 > 0} 1{X_rho = 0} Gamma^rho]`, `rho` the first
/// return to `(-inf, 0]`, truncated at `rho_cap` with bias at most `Gamma^rho_cap`.
pub fn mc_r_beta(params: &ModelParams, n_samples: u64, rho_cap: u64, seed: u64) -> Result<McEstimate> {
    params.require_collapsed("mc_r_beta")?;
    if n_samples < 2 {
        return Err(domain("mc_r_beta", "need at least two samples"));
    }
    let walk = TiltParam::new(params, 0.0)?;
    let gamma = params.gamma_beta();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let chunks = (n_samples as usize).div_ceil(CHUNK);
    for chunk in 0..chunks {
        let mut rng = stream(seed, chunk);
        let n = CHUNK.min(n_samples as usize - chunk * CHUNK);
        for _ in 0..n {
            let mut x = draw_step(&walk, &mut rng);
            if x <= 0 {
                continue;
            }
            let mut weight = gamma;
            for _ in 1..rho_cap {
                weight *= gamma;
                x += draw_step(&walk, &mut rng);
                if x <= 0 {
                    if x == 0 {
                        sum += weight;
                        sum_sq += weight * weight;
                    }
                    break;
                }
            }
        }
    }
    Ok(McEstimate::from_sums(
        sum,
        sum_sq,
        n_samples,
        gamma.powf(rho_cap as f64),
    ))
}

/// Mean of `count` increments of the `h`-tilted law, with its standard error.
pub fn tilted_step_mean(params: &ModelParams, h: f64, count: u64, seed: u64) -> Result<McEstimate> {
    let tilt = TiltParam::new(params, h).map_err(|e| match e {
        Error::Domain { detail, .. } => domain("tilted_step_mean", detail),
        other => other,
    })?;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for chunk in 0..(count as usize).div_ceil(CHUNK) {
        let mut rng = stream(seed, chunk);
        for _ in 0..CHUNK.min(count as usize - chunk * CHUNK) {
            let k = draw_step(&tilt, &mut rng) as f64;
            sum += k;
            sum_sq += k * k;
        }
    }
    Ok(McEstimate::from_sums(sum, sum_sq, count, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laplace::kappa;
    use std::collections::HashMap;

    fn p(beta: f64) -> ModelParams {
        ModelParams::new(beta).unwrap()
    }

    #[test]
    fn length_one_is_forced() {
        let b = sample_polymer(&p(2.0), 1, 50, 3, &TableBudget::default()).unwrap();
        assert!(b.trajectories.iter().all(|t| t.stretches == vec![0]));
    }

    #[test]
    fn batches_are_reproducible() {
        let budget = TableBudget::default();
        let a = sample_polymer(&p(2.0), 4, 3000, 7, &budget).unwrap();
        let b = sample_polymer(&p(2.0), 4, 3000, 7, &budget).unwrap();
        assert_eq!(a, b);
        let c = sample_polymer(&p(2.0), 4, 3000, 8, &budget).unwrap();
        assert_ne!(a, c);
        assert!(a.trajectories.iter().all(|t| t.length() == 4));
    }

    /// Every configuration of a given length, by recursion.
    fn all_trajectories(l: i64) -> Vec<Vec<i64>> {
        if l == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for s in -(l - 1)..=(l - 1) {
            for mut rest in all_trajectories(l - 1 - s.abs()) {
                rest.insert(0, s);
                out.push(rest);
            }
        }
        out
    }

    #[test]
    fn sampler_matches_boltzmann_law() {
        let beta: f64 = 2.0;
        let prm = p(beta);
        for l in [4usize, 6] {
            let configs = all_trajectories(l as i64);
            let weights: Vec<f64> = configs
                .iter()
                .map(|c| (beta * Trajectory::new(c.clone()).hamiltonian() as f64).exp())
                .collect();
            let z: f64 = weights.iter().sum();
            let n = 100_000;
            let batch = sample_polymer(&prm, l, n, 11, &TableBudget::default()).unwrap();
            let mut counts: HashMap<Vec<i64>, f64> = HashMap::new();
            for t in &batch.trajectories {
                *counts.entry(t.stretches.clone()).or_default() += 1.0;
            }
            let mut chi2 = 0.0;
            for (c, w) in configs.iter().zip(&weights) {
                let expected = n as f64 * w / z;
                let got = counts.get(c).copied().unwrap_or(0.0);
                chi2 += (got - expected) * (got - expected) / expected;
            }
            // Wilson-Hilferty 99% quantile of chi-square with k - 1 degrees of freedom
            let k = (configs.len() - 1) as f64;
            let q99 = k * (1.0 - 2.0 / (9.0 * k) + 2.326348 * (2.0 / (9.0 * k)).sqrt()).powi(3);
            assert!(chi2 < q99, "L {l}: chi2 {chi2} vs {q99}");
            if l == 4 {
                let freq = counts.get(&vec![1, -1]).copied().unwrap_or(0.0) / n as f64;
                let target = beta.exp() / (15.0 + 2.0 * beta.exp());
                assert!((target - 0.24814).abs() < 1e-5);
                let sigma = (target * (1.0 - target) / n as f64).sqrt();
                assert!((freq - target).abs() < 4.0 * sigma);
            }
        }
    }

    #[test]
    fn batch_round_trips_through_text() {
        let b = sample_polymer(&p(2.0), 12, 40, 5, &TableBudget::default()).unwrap();
        let mut buf = Vec::new();
        b.write_to(&mut buf).unwrap();
        let back = SampleBatch::read_from(buf.as_slice()).unwrap();
        assert_eq!(back, b);
        assert!(SampleBatch::read_from("# beta=2 L=3 seed=1\n1,-1\n".as_bytes()).is_err());
    }

    #[test]
    fn tilted_steps_have_the_right_mean() {
        let prm = p(2.0);
        for h in [-0.6, 0.0, 0.5] {
            let m = tilted_step_mean(&prm, h, 1_000_000, 3).unwrap();
            let target = cgf(&prm, h, 1).unwrap();
            assert!(m.z_score(target) < 4.0, "h {h}: {m:?} vs {target}");
        }
    }

    #[test]
    fn kappa_estimate() {
        let prm = p(2.0);
        let est = mc_kappa(&prm, 0.5, 100_000, 500, 1).unwrap();
        let exact = kappa(&prm, 0.5).unwrap();
        assert!(est.z_score(exact) < 4.0, "{est:?} vs {exact}");
        assert!(est.cap_bias_bound < 1e-10);
        assert_eq!(est, mc_kappa(&prm, 0.5, 100_000, 500, 1).unwrap());
        assert!(mc_kappa(&prm, 1.0, 10, 10, 1).is_err());
        let small = mc_kappa(&prm, 0.01, 20_000, 4000, 2).unwrap();
        assert!(small.estimate < 0.1);
    }

    #[test]
    fn r_beta_estimate() {
        let prm = p(2.0);
        let est = mc_r_beta(&prm, 1_000_000, 200, 4).unwrap();
        let exact = crate::laplace::r_beta(&prm).unwrap();
        assert!(est.estimate >= 0.0);
        assert!(est.z_score(exact) < 4.0, "{est:?} vs {exact}");
        assert!(est.cap_bias_bound < 1e-100);
        assert!(mc_r_beta(&p(1.0), 10, 10, 1).is_err());
    }
}
