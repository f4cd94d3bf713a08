//! Finite-`n` counterparts of the continuum tilt: the Riemann sum `G_n`,
//! its inverse derivative `h_n^q`, the tilted exponent `psi_{n,h}`, and scans
//! of the discrete-to-continuum gap.

use serde::{Deserialize, Serialize};

use crate::continuum::{big_g, h_tilde};
use crate::error::{domain, Result};
use crate::laplace::{cgf_at_gap, ModelParams};
use crate::solve::increasing_root;

/// Largest admissible `|h|` for `G_n`, namely `n beta / (n - 1)`.
pub fn h_limit(params: &ModelParams, n: usize) -> f64 {
    let n = n as f64;
    n * params.beta() / (n - 1.0)
}

fn check(op: &'static str, params: &ModelParams, n: usize, h: f64) -> Result<()> {
    if n < 2 {
        return Err(domain(op, format!("n must be at least 2, got {n}")));
    }
    let limit = h_limit(params, n);
    if !(h.abs() < limit) {
        return Err(domain(op, format!("|h| must be < n beta/(n-1) = {limit}, got {h}")));
    }
    Ok(())
}

/// `[G_n, G_n', G_n'']` at `|h|`, where `top_gap` is the distance of the
/// largest argument `(|h|/2)(1 - 1/n)` to `beta/2`.
fn g_n_parts(params: &ModelParams, n: usize, h: f64, top_gap: f64) -> [f64; 3] {
    let nf = n as f64;
    let mut acc = [0.0; 3];
    // terms i and n+1-i have opposite arguments: pair them so evenness is exact
    for i in 1..=n.div_ceil(2) {
        let c = 1.0 - (2 * i - 1) as f64 / nf;
        let x = 0.5 * h * c;
        let gap = top_gap + h * (i - 1) as f64 / nf;
        let mirror = n + 1 - i;
        let [l0, l1, l2] = cgf_at_gap(params, x, gap);
        if mirror == i {
            // middle term has argument zero
            acc[0] += l0;
            acc[1] += 0.5 * c * l1;
            acc[2] += 0.25 * c * c * l2;
        } else {
            // L is even and L' odd, so the mirrored term doubles the even parts
            acc[0] += 2.0 * l0;
            acc[1] += c * l1;
            acc[2] += 0.5 * c * c * l2;
        }
    }
    acc.map(|v| v / nf)
}

/// `G_n(h) = (1/n) sum_i L((h/2)(1 - (2i-1)/n))` (order 0) or its derivative (order 1).
pub fn g_n(params: &ModelParams, n: usize, h: f64, order: u8) -> Result<f64> {
    check("g_n", params, n, h)?;
    if order > 1 {
        return Err(domain("g_n", format!("order must be 0 or 1, got {order}")));
    }
    let a = h.abs();
    let top_gap = 0.5 * params.beta() - 0.5 * a * (1.0 - 1.0 / n as f64);
    let parts = g_n_parts(params, n, a, top_gap);
    Ok(match order {
        0 => parts[0],
        _ if h < 0.0 => -parts[1],
        _ => parts[1],
    })
}

/// Unique `h` in `(0, n beta/(n-1))` with `G_n'(h) = q`.
pub fn h_n_q(params: &ModelParams, n: usize, q: f64) -> Result<f64> {
    if n < 2 {
        return Err(domain("h_n_q", format!("n must be at least 2, got {n}")));
    }
    if !(q > 0.0 && q.is_finite()) {
        return Err(domain("h_n_q", format!("q must be positive, got {q}")));
    }
    let limit = h_limit(params, n);
    let half_beta = 0.5 * params.beta();
    // h = limit (1 - e^{-t}); the top argument then sits beta/2 e^{-t} below beta/2
    let eval = |t: f64| -> Result<(f64, f64)> {
        let h = -limit * (-t).exp_m1();
        let top_gap = half_beta * (-t).exp();
        let [_, d1, d2] = g_n_parts(params, n, h, top_gap);
        Ok((d1 - q, d2 * limit * (-t).exp()))
    };
    let mut t_hi = 1.0;
    while eval(t_hi)?.0 <= 0.0 {
        t_hi *= 2.0;
        if t_hi > 300.0 {
            return Err(domain(
                "h_n_q",
                format!("q = {q} is beyond double precision at n = {n}"),
            ));
        }
    }
    let t = increasing_root("h_n_q", eval, 0.0, t_hi, 1e-3, 5e-13)?;
    Ok(-limit * (-t).exp_m1())
}

/// `psi_{n,h}(a, x) = h a/n - (h/2)(1 - 1/n) x - n G_n(h)`.
pub fn psi_nh(params: &ModelParams, n: usize, h: f64, a: i64, x: i64) -> Result<f64> {
    check("psi_nh", params, n, h)?;
    let nf = n as f64;
    let g = g_n(params, n, h, 0)?;
    Ok(h * a as f64 / nf - 0.5 * h * (1.0 - 1.0 / nf) * x as f64 - nf * g)
}

/// Tilt solving `G_n'(h) = q` for an area `q n^2` that is an integer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteTilt {
    pub n: usize,
    pub area: u64,
    pub q: f64,
    pub h_n_q: f64,
}

impl FiniteTilt {
    pub fn solve(params: &ModelParams, n: usize, area: u64) -> Result<Self> {
        if area == 0 {
            return Err(domain("FiniteTilt::solve", "area must be positive"));
        }
        let q = area as f64 / (n as f64 * n as f64);
        Ok(Self {
            n,
            area,
            q,
            h_n_q: h_n_q(params, n, q)?,
        })
    }
}

/// One row of a discrete-to-continuum gap scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub n: usize,
    pub sup_gap: f64,
    /// `n^2 * sup_gap`
    pub scaled: f64,
}

/// Grid spacing of [`em_gap_scan`].
pub const EM_GRID_STEP: f64 = 1e-3;

/// `sup_h |G_n^(j)(h) - G^(j)(h)|` over `[-beta + k, beta - k]` on a grid of
/// spacing [`EM_GRID_STEP`], for each `n`.
pub fn em_gap_scan(params: &ModelParams, n_list: &[usize], k: f64, order: u8) -> Result<Vec<GapRow>> {
    let beta = params.beta();
    if !(k > 0.0 && k < beta) {
        return Err(domain("em_gap_scan", format!("K must lie in (0, beta), got {k}")));
    }
    if order > 1 {
        return Err(domain("em_gap_scan", format!("order must be 0 or 1, got {order}")));
    }
    if let Some(&bad) = n_list.iter().find(|&&n| n < 2) {
        return Err(domain("em_gap_scan", format!("n must be at least 2, got {bad}")));
    }
    let half_width = beta - k;
    let steps = (2.0 * half_width / EM_GRID_STEP).round() as i64;
    let grid: Vec<f64> = (0..=steps)
        .map(|i| -half_width + 2.0 * half_width * i as f64 / steps as f64)
        .collect();
    let reference = grid
        .iter()
        .map(|&h| big_g(params, h, order))
        .collect::<Result<Vec<_>>>()?;
    n_list
        .iter()
        .map(|&n| {
            let mut sup: f64 = 0.0;
            for (&h, &g) in grid.iter().zip(&reference) {
                sup = sup.max((g_n(params, n, h, order)? - g).abs());
            }
            Ok(GapRow {
                n,
                sup_gap: sup,
                scaled: (n * n) as f64 * sup,
            })
        })
        .collect()
}

/// One row of the `n^2 |h_n^q - h^q|` scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TiltGapRow {
    pub n: usize,
    pub q: f64,
    pub h_n_q: f64,
    pub h_tilde: f64,
    pub scaled: f64,
}

pub fn tilt_gap_scan(params: &ModelParams, n_list: &[usize], q: f64) -> Result<Vec<TiltGapRow>> {
    let limit = h_tilde(params, q)?.value();
    n_list
        .iter()
        .map(|&n| {
            let h = h_n_q(params, n, q)?;
            Ok(TiltGapRow {
                n,
                q,
                h_n_q: h,
                h_tilde: limit,
                scaled: (n * n) as f64 * (h - limit).abs(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuum::psi_tilde;
    use crate::laplace::cgf;

    fn p(beta: f64) -> ModelParams {
        ModelParams::new(beta).unwrap()
    }

    #[test]
    fn g_n_vanishes_at_origin() {
        let prm = p(2.0);
        assert_eq!(g_n(&prm, 10, 0.0, 0).unwrap(), 0.0);
        assert_eq!(g_n(&prm, 10, 0.0, 1).unwrap(), 0.0);
        assert!(g_n(&prm, 1, 0.0, 0).is_err());
        assert!(g_n(&prm, 10, 2.3, 0).is_err());
        assert!(g_n(&prm, 10, 2.2, 0).is_ok());
    }

    #[test]
    fn g_n_matches_plain_sum() {
        let prm = p(2.0);
        let n = 7;
        let h = 1.3;
        let direct: f64 = (1..=n)
            .map(|i| cgf(&prm, 0.5 * h * (1.0 - (2 * i - 1) as f64 / n as f64), 0).unwrap())
            .sum::<f64>()
            / n as f64;
        assert!((g_n(&prm, n, h, 0).unwrap() - direct).abs() < 1e-15);
        let d = 1e-6;
        let fd = (g_n(&prm, n, h + d, 0).unwrap() - g_n(&prm, n, h - d, 0).unwrap()) / (2.0 * d);
        assert!((g_n(&prm, n, h, 1).unwrap() - fd).abs() < 1e-8);
    }

    #[test]
    fn g_n_is_even_and_increasing_slope() {
        let prm = p(2.0);
        let mut last = f64::NEG_INFINITY;
        for i in -200..=200 {
            let h = 0.01 * i as f64;
            assert!((g_n(&prm, 25, h, 0).unwrap() - g_n(&prm, 25, -h, 0).unwrap()).abs() < 1e-14);
            let d = g_n(&prm, 25, h, 1).unwrap();
            assert!(d > last);
            last = d;
        }
    }

    #[test]
    fn riemann_sum_approaches_continuum() {
        let prm = p(2.0);
        let gap = (g_n(&prm, 400, 1.0, 0).unwrap() - big_g(&prm, 1.0, 0).unwrap()).abs();
        assert!(gap < 1e-4);
    }

    #[test]
    fn h_n_q_solves_and_converges() {
        let prm = p(2.0);
        let h = h_n_q(&prm, 50, 0.5).unwrap();
        assert!((g_n(&prm, 50, h, 1).unwrap() - 0.5).abs() < 1e-12);
        assert!(h_n_q(&prm, 50, 1.0).unwrap() > h);
        let rows = tilt_gap_scan(&prm, &[25, 50, 100, 200, 400], 0.5).unwrap();
        let max = rows.iter().map(|r| r.scaled).fold(0.0, f64::max);
        let min = rows.iter().map(|r| r.scaled).fold(f64::INFINITY, f64::min);
        assert!(max < 2.0 * min, "{rows:?}");
    }

    #[test]
    fn psi_nh_properties() {
        let prm = p(2.0);
        assert_eq!(psi_nh(&prm, 10, 0.0, 0, 0).unwrap(), 0.0);
        let h = 0.7;
        let shift = psi_nh(&prm, 10, h, 37, 3).unwrap() - psi_nh(&prm, 10, h, 27, 3).unwrap();
        assert!((shift - h).abs() < 1e-12);
        // (1/n) psi_{n,h}(q n^2, 0) at h = h_n^q tends to the rate function
        let q = 0.5;
        let limit = psi_tilde(&prm, q).unwrap().psi;
        let mut scaled = Vec::new();
        for n in [20usize, 40, 80] {
            let t = FiniteTilt::solve(&prm, n, (q * (n * n) as f64) as u64).unwrap();
            let v = psi_nh(&prm, n, t.h_n_q, t.area as i64, 0).unwrap() / n as f64;
            scaled.push((n * n) as f64 * (v - limit).abs());
        }
        assert!(scaled[2] < 2.0 * scaled[0] + 1e-9, "{scaled:?}");
    }

    #[test]
    fn em_scan_is_bounded() {
        let prm = p(2.0);
        for order in [0, 1] {
            let rows = em_gap_scan(&prm, &[100, 1000], 0.3, order).unwrap();
            let ratio = rows[1].scaled / rows[0].scaled;
            assert!(ratio > 1.0 / 1.5 && ratio < 1.5, "order {order}: {rows:?}");
        }
        assert!(em_gap_scan(&prm, &[10], 2.5, 0).is_err());
    }
}
