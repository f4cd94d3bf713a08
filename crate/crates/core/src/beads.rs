//! Bead decomposition of configurations and the largest-bead survey.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::exact::Trajectory;
use crate::sampling::SampleBatch;

/// Cut points of a configuration into extended beads.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeadDecomposition {
    /// `tau_0 = 0 < tau_1 < ...`: bead `j` spans stretches `tau_{j-1}..tau_j`
    pub tau: Vec<usize>,
    /// cumulative bead lengths, starting at 0
    pub cum_lengths: Vec<u64>,
    /// zero stretches after the last bead
    pub trailing_zeros: u64,
}

impl BeadDecomposition {
    pub fn bead_count(&self) -> usize {
        self.tau.len() - 1
    }

    /// Stretches of bead `j` (0-based).
    pub fn segment<'a>(&self, traj: &'a Trajectory, j: usize) -> &'a [i64] {
        &traj.stretches[self.tau[j]..self.tau[j + 1]]
    }
}

fn opposite(a: i64, b: i64) -> bool {
    (a > 0 && b < 0) || (a < 0 && b > 0)
}

/// Greedy left-to-right cut: each extended bead takes any zero stretches,
/// then the longest run of nonzero stretches with alternating signs.
pub fn decompose(traj: &Trajectory) -> BeadDecomposition {
    let s = &traj.stretches;
    let mut tau = vec![0];
    let mut cum = vec![0u64];
    let mut i = 0;
    let mut total = 0u64;
    while i < s.len() {
        let start = i;
        while i < s.len() && s[i] == 0 {
            i += 1;
        }
        if i == s.len() {
            // only zeros remain: they trail the last bead
            return BeadDecomposition {
                tau,
                cum_lengths: cum,
                trailing_zeros: (s.len() - start) as u64,
            };
        }
        i += 1;
        while i < s.len() && opposite(s[i - 1], s[i]) {
            i += 1;
        }
        total += s[start..i].iter().map(|l| l.unsigned_abs() + 1).sum::<u64>();
        tau.push(i);
        cum.push(total);
    }
    BeadDecomposition {
        tau,
        cum_lengths: cum,
        trailing_zeros: 0,
    }
}

/// Length of the largest bead: the maximum over runs `u..=v` with
/// `l_i l_{i+1} < 0` inside the run of `sum (1 + |l_i|)`. A single stretch
/// is a run, zero stretches included; the empty configuration gives 0.
pub fn i_max(traj: &Trajectory) -> u64 {
    let s = &traj.stretches;
    let mut best = 0;
    let mut run = 0;
    for (i, &l) in s.iter().enumerate() {
        let w = l.unsigned_abs() + 1;
        run = if i > 0 && opposite(s[i - 1], l) { run + w } else { w };
        best = best.max(run);
    }
    best
}

/// Empirical `P(|I_max| >= L - k)` over a batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeadSurvey {
    pub beta: f64,
    pub length: usize,
    pub samples: usize,
    pub k_grid: Vec<usize>,
    pub empirical_prob: Vec<f64>,
    pub counts: Vec<usize>,
}

pub fn bead_survey(batch: &SampleBatch, k_grid: &[usize]) -> Result<BeadSurvey> {
    if batch.trajectories.is_empty() {
        return Err(domain("bead_survey", "empty batch"));
    }
    let l = batch.length as u64;
    let largest: Vec<u64> = batch.trajectories.iter().map(i_max).collect();
    let counts: Vec<usize> = k_grid
        .iter()
        .map(|&k| {
            let threshold = l.saturating_sub(k as u64);
            largest.iter().filter(|&&m| m >= threshold).count()
        })
        .collect();
    let n = batch.trajectories.len();
    Ok(BeadSurvey {
        beta: batch.beta,
        length: batch.length,
        samples: n,
        k_grid: k_grid.to_vec(),
        empirical_prob: counts.iter().map(|&c| c as f64 / n as f64).collect(),
        counts,
    })
}

impl BeadSurvey {
    /// `k,empirical_prob,count` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "k,empirical_prob,count")?;
        for ((k, p), c) in self.k_grid.iter().zip(&self.empirical_prob).zip(&self.counts) {
            writeln!(out, "{k},{p:.16e},{c}")?;
        }
        Ok(())
    }

    /// Whether the curve is nondecreasing along an increasing `k_grid`.
    pub fn is_monotone(&self) -> bool {
        let sorted = self.k_grid.windows(2).all(|w| w[0] <= w[1]);
        sorted && self.empirical_prob.windows(2).all(|w| w[0] <= w[1])
    }
}
