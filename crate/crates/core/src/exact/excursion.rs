//! Probabilities of positive excursions with a prescribed area.
//!
//! `W(i, x, a)` is the probability that the walk stays positive through step
//! `i`, sits at height `x` and has accumulated area `a`. One step convolves
//! each area slice with the two-sided geometric kernel `r^{|d|} / c`, which a
//! forward and a backward recursion evaluate in linear time, and shifts the
//! area by the landing height.

use serde::{Deserialize, Serialize};

use super::TableBudget;
use crate::error::{domain, Result};
use crate::laplace::ModelParams;

/// `P(X_1..X_{n-1} > 0, X_n = 0, X_1 + ... + X_n = k)` for `k = 0..=area_cap`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcursionTable {
    pub beta: f64,
    pub n: usize,
    pub area_cap: usize,
    pub height_cap: usize,
    pub probabilities: Vec<f64>,
    /// Upper bound on the mass discarded by the height cap.
    pub tail_bound: f64,
}

impl ExcursionTable {
    pub fn get(&self, k: usize) -> f64 {
        self.probabilities.get(k).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }
}

/// `min(area_cap, 12/beta sqrt(area_cap) + 50)`, at least 1.
pub fn default_height_cap(beta: f64, area_cap: usize) -> usize {
    let soft = (12.0 / beta * (area_cap as f64).sqrt() + 50.0).ceil() as usize;
    soft.min(area_cap).max(1)
}

/// Bytes held by a sweep with the given caps.
pub fn excursion_bytes(area_cap: usize, height_cap: usize) -> u64 {
    2 * 8 * (area_cap as u64 + 1) * height_cap as u64
}

/// Tables for every `n = 1..=n_max` from one forward sweep.
pub fn excursion_sweep(
    params: &ModelParams,
    n_max: usize,
    area_cap: usize,
    height_cap: Option<usize>,
    budget: &TableBudget,
) -> Result<Vec<ExcursionTable>> {
    if n_max < 1 {
        return Err(domain("excursion_table", "n must be at least 1"));
    }
    let beta = params.beta();
    let h_cap = height_cap.unwrap_or_else(|| default_height_cap(beta, area_cap)).max(1);
    budget.check("excursion_table", excursion_bytes(area_cap, h_cap))?;
    let r = params.ratio();
    let c = params.c_beta();
    let kcap = area_cap;
    let slice = h_cap;
    // cur[a * slice + (x - 1)]
    let mut cur = vec![0.0f64; (kcap + 1) * slice];
    let mut next = vec![0.0f64; (kcap + 1) * slice];
    let mut pruned = 0.0;

    // pruning after the first step: landing heights above the cap with area within the cap
    for x in 1..=h_cap.min(kcap) {
        cur[x * slice + x - 1] = r.powi(x as i32) / c;
    }
    if kcap > h_cap {
        pruned += r.powi(h_cap as i32 + 1) * (1.0 - r.powi((kcap - h_cap) as i32)) / ((1.0 - r) * c);
    }

    let mut out = Vec::with_capacity(n_max);
    let mut first = vec![0.0; kcap + 1];
    first[0] = 1.0 / c;
    out.push(ExcursionTable {
        beta,
        n: 1,
        area_cap,
        height_cap: h_cap,
        probabilities: first,
        tail_bound: 0.0,
    });

    let mut forward = vec![0.0; slice];
    let mut backward = vec![0.0; slice + 1];
    for step in 1..n_max {
        // close the excursion: P(V_{step+1, k}) = sum_x W(step, x, k) r^x / c
        let mut probs = vec![0.0; kcap + 1];
        for (a, p) in probs.iter_mut().enumerate().skip(step) {
            let col = &cur[a * slice..(a + 1) * slice];
            let mut acc = 0.0;
            let mut rx = r;
            for &w in col {
                acc += w * rx;
                rx *= r;
            }
            *p = acc / c;
        }
        out.push(ExcursionTable {
            beta,
            n: step + 1,
            area_cap,
            height_cap: h_cap,
            probabilities: probs,
            tail_bound: pruned,
        });
        if step + 1 == n_max {
            break;
        }
        next.iter_mut().for_each(|v| *v = 0.0);
        // areas below `step` are unreachable after `step` positive steps
        for a in step..=kcap {
            let col = &cur[a * slice..(a + 1) * slice];
            if col.iter().all(|&w| w == 0.0) {
                continue;
            }
            let mut f = 0.0;
            for (x, &w) in col.iter().enumerate() {
                f = r * f + w;
                forward[x] = f;
            }
            backward[slice] = 0.0;
            let mut b = 0.0;
            for x in (0..slice).rev() {
                // b = sum_{y > x} col[y] r^{y - x}
                b = r * (b + if x + 1 < slice { col[x + 1] } else { 0.0 });
                backward[x] = b;
            }
            let room = kcap - a;
            for xp in 1..=slice.min(room) {
                next[(a + xp) * slice + xp - 1] += (forward[xp - 1] + backward[xp - 1]) / c;
            }
            if room > h_cap {
                let top = forward[slice - 1];
                pruned += top * r * (1.0 - r.powi((room - h_cap) as i32)) / ((1.0 - r) * c);
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(out)
}

/// Excursion probabilities of length `n`.
pub fn excursion_table(
    params: &ModelParams,
    n: usize,
    area_cap: usize,
    height_cap: Option<usize>,
    budget: &TableBudget,
) -> Result<ExcursionTable> {
    let mut all = excursion_sweep(params, n, area_cap, height_cap, budget)?;
    Ok(all.pop().expect("sweep returns n tables"))
}
