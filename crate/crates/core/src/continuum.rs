//! Continuum objects of the large-deviation analysis: the area cgf `G`, its
//! inverse derivative `h^q`, the rate function `psi(q)`, the curvature
//! functional `vartheta`, the prefactor `C_{beta,q}`, the variational
//! objective `G~(x)` with its maximiser `a_beta`, and the sharp constant
//! `K_beta` assembled along two independent algebraic routes.
//!
//! `G(h) = 2 int_0^{1/2} L(h u) du` is finite on `(-beta, beta)` but its
//! derivatives blow up logarithmically (first) or like `1/gap` (second) at
//! the edge, and tilts solving `G'(h) = q` for `q` of order 20 sit within
//! `1e-26` of `beta`. A [`Tilt`] therefore carries `beta - |h|` explicitly,
//! and the integrals switch to a logarithmic substitution that resolves the
//! boundary layer when the gap is small.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::laplace::{self, cgf_at_gap, ModelParams};
use crate::quadrature::{integrate, Tolerance};
use crate::solve::{golden_max, increasing_root};

/// Gaps below this fraction of beta use the logarithmic substitution.
const EDGE_FRACTION: f64 = 0.25;

/// A tilt `h` in `(-beta, beta)` with its distance `beta - |h|` to the edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tilt {
    value: f64,
    gap: f64,
}

impl Tilt {
    pub fn new(params: &ModelParams, h: f64) -> Result<Self> {
        let gap = params.beta() - h.abs();
        if !(gap > 0.0) || !h.is_finite() {
            return Err(domain(
                "Tilt::new",
                format!("|h| must be < beta = {}, got {h}", params.beta()),
            ));
        }
        Ok(Self { value: h, gap })
    }

    /// Nonnegative tilt `beta - gap`, exact in `gap` even when `h` rounds to `beta`.
    pub fn from_gap(params: &ModelParams, gap: f64) -> Result<Self> {
        if !(gap > 0.0 && gap <= params.beta()) {
            return Err(domain(
                "Tilt::from_gap",
                format!("gap must lie in (0, beta], got {gap}"),
            ));
        }
        Ok(Self {
            value: params.beta() - gap,
            gap,
        })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// `beta - |h|`.
    pub fn gap(&self) -> f64 {
        self.gap
    }
}

/// Which derivative of `L` and which power of `u` enter `2 int_0^{1/2} u^k L^(j)(hu) du`.
#[derive(Clone, Copy)]
struct Moment {
    power: i32,
    order: usize,
}

const G0: Moment = Moment { power: 0, order: 0 };
const G1: Moment = Moment { power: 1, order: 1 };
const G2: Moment = Moment { power: 2, order: 2 };
const M0: Moment = Moment { power: 0, order: 2 };

/// `2 int_0^{1/2} u^k L^(j)(|h| u) du`.
fn half_moment(params: &ModelParams, tilt: &Tilt, m: Moment) -> Result<f64> {
    let h = tilt.value.abs();
    let eps = tilt.gap;
    let tol = Tolerance::default();
    // with v = 1/2 - u: argument h u, its distance to beta/2 is eps/2 + h v
    let integrand_v = |v: f64| {
        let u = 0.5 - v;
        let parts = cgf_at_gap(params, h * u, 0.5 * eps + h * v);
        2.0 * u.powi(m.power) * parts[m.order]
    };
    let value = if eps >= EDGE_FRACTION * params.beta() || h == 0.0 {
        integrate(integrand_v, 0.0, 0.5, tol)?
    } else {
        // v = eps/(2h) (e^s - 1), so the distance to beta/2 is eps/2 e^s
        let scale = eps / (2.0 * h);
        let s_max = (h / eps).ln_1p();
        let integrand_s = |s: f64| {
            let v = (scale * s.exp_m1()).min(0.5);
            let u = 0.5 - v;
            let parts = cgf_at_gap(params, h * u, 0.5 * eps * s.exp());
            2.0 * u.powi(m.power) * parts[m.order] * scale * s.exp()
        };
        integrate(integrand_s, 0.0, s_max, tol)?
    };
    Ok(value)
}

fn big_g_checked(params: &ModelParams, tilt: &Tilt, order: u8) -> Result<f64> {
    match order {
        0 => half_moment(params, tilt, G0),
        1 => {
            let v = half_moment(params, tilt, G1)?;
            Ok(if tilt.value < 0.0 { -v } else { v })
        }
        2 => half_moment(params, tilt, G2),
        _ => Err(domain("big_g", format!("order must be 0, 1 or 2, got {order}"))),
    }
}

/// `G(h) = int_0^1 L(h(1/2 - x)) dx` and its first two derivatives.
pub fn big_g(params: &ModelParams, h: f64, order: u8) -> Result<f64> {
    let tilt = Tilt::new(params, h)
        .map_err(|_| domain("big_g", format!("|h| must be < beta = {}, got {h}", params.beta())))?;
    big_g_checked(params, &tilt, order)
}

/// [`big_g`] at a tilt whose edge gap is known exactly.
pub fn big_g_at(params: &ModelParams, tilt: &Tilt, order: u8) -> Result<f64> {
    big_g_checked(params, tilt, order)
}

/// Tilts are searched as `h = beta (1 - e^{-t})`, i.e. `gap = beta e^{-t}`.
const T_LIMIT: f64 = 300.0;

/// The unique tilt in `(0, beta)` with `G'(h) = q`.
pub fn h_tilde(params: &ModelParams, q: f64) -> Result<Tilt> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(domain("h_tilde", format!("q must be positive, got {q}")));
    }
    let beta = params.beta();
    let at = |t: f64| Tilt::from_gap(params, beta * (-t).exp());
    let eval = |t: f64| -> Result<(f64, f64)> {
        let tilt = at(t)?;
        let g1 = half_moment(params, &tilt, G1)?;
        let g2 = half_moment(params, &tilt, G2)?;
        // d gap / dt = -gap, so d G'/dt = G'' * gap
        Ok((g1 - q, g2 * tilt.gap))
    };
    let mut t_hi = 1.0;
    while eval(t_hi)?.0 <= 0.0 {
        t_hi *= 2.0;
        if t_hi > T_LIMIT {
            return Err(domain(
                "h_tilde",
                format!("q = {q} needs a tilt closer to beta than double precision can represent"),
            ));
        }
    }
    let t = increasing_root("h_tilde", eval, 0.0, t_hi, 1e-3, 5e-13)?;
    at(t)
}

/// A point of the rate function together with its tilt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFunctionPoint {
    pub q: f64,
    pub h_tilde: f64,
    /// `beta - h_tilde`, exact even when `h_tilde` rounds to `beta`
    pub h_gap: f64,
    pub psi: f64,
    /// `psi'(q)`, equal to `h_tilde` by the envelope identity
    pub psi_prime: f64,
}

impl RateFunctionPoint {
    pub fn tilt(&self) -> Tilt {
        Tilt {
            value: self.h_tilde,
            gap: self.h_gap,
        }
    }
}

/// `psi(q) = q h^q - G(h^q)`.
pub fn psi_tilde(params: &ModelParams, q: f64) -> Result<RateFunctionPoint> {
    let tilt = h_tilde(params, q)?;
    let g = half_moment(params, &tilt, G0)?;
    Ok(RateFunctionPoint {
        q,
        h_tilde: tilt.value,
        h_gap: tilt.gap,
        psi: q * tilt.value - g,
        psi_prime: tilt.value,
    })
}

/// `psi''(q) = 1 / G''(h^q)`.
pub fn psi_second(params: &ModelParams, point: &RateFunctionPoint) -> Result<f64> {
    Ok(1.0 / half_moment(params, &point.tilt(), G2)?)
}

/// Determinant of the second-moment matrix of `L''` along the tilt profile.
pub fn vartheta(params: &ModelParams, h: f64) -> Result<f64> {
    let tilt = Tilt::new(params, h)
        .map_err(|_| domain("vartheta", format!("|h| must be < beta = {}, got {h}", params.beta())))?;
    vartheta_at(params, &tilt)
}

pub fn vartheta_at(params: &ModelParams, tilt: &Tilt) -> Result<f64> {
    // L'' is even, so the x- and x^2-moments over [0,1] reduce to the
    // half-line moments: m1 = m0/2 and m2 = G'' + m0/4, whence
    // m2 m0 - m1^2 = G'' m0.
    let m0 = half_moment(params, tilt, M0)?;
    let g2 = half_moment(params, tilt, G2)?;
    Ok(g2 * m0)
}

/// `C_{beta,q} = kappa(h^q/2)^2 / (2 pi vartheta(h^q)^{1/2})`.
pub fn c_prefactor(params: &ModelParams, q: f64) -> Result<f64> {
    let tilt = h_tilde(params, q)?;
    c_prefactor_at(params, &tilt)
}

pub fn c_prefactor_at(params: &ModelParams, tilt: &Tilt) -> Result<f64> {
    let k = laplace::kappa(params, 0.5 * tilt.value.abs())?;
    let theta = vartheta_at(params, tilt)?;
    Ok(k * k / (2.0 * std::f64::consts::PI * theta.sqrt()))
}

/// `G~(x) = x log Gamma_beta - x psi(x^{-2})` and its first two derivatives.
pub fn g_tilde(params: &ModelParams, x: f64, order: u8) -> Result<f64> {
    params.require_collapsed("g_tilde")?;
    if !(x > 0.0 && x.is_finite()) {
        return Err(domain("g_tilde", format!("x must be positive, got {x}")));
    }
    if order > 2 {
        return Err(domain("g_tilde", format!("order must be 0, 1 or 2, got {order}")));
    }
    let q = 1.0 / (x * x);
    let point = psi_tilde(params, q)?;
    g_tilde_from(params, x, &point, order)
}

fn g_tilde_from(params: &ModelParams, x: f64, point: &RateFunctionPoint, order: u8) -> Result<f64> {
    let log_gamma = params.gamma_beta().ln();
    let q = point.q;
    Ok(match order {
        0 => x * log_gamma - x * point.psi,
        1 => log_gamma - point.psi + 2.0 * q * point.psi_prime,
        _ => {
            let psi2 = psi_second(params, point)?;
            -2.0 * (point.psi_prime + 2.0 * q * psi2) / (x * x * x)
        }
    })
}

/// Default search interval for `a_beta`.
pub const A_BETA_BRACKET: (f64, f64) = (1e-3, 50.0);

/// Sign of `G~'` at `x`, treating tilts beyond double precision as the
/// `x -> 0` limit where `G~' -> +infinity`.
fn g_tilde_slope(params: &ModelParams, x: f64) -> Result<f64> {
    match g_tilde(params, x, 1) {
        Err(Error::Domain { op: "h_tilde", .. }) => Ok(f64::INFINITY),
        other => other,
    }
}

/// Unique maximiser of `G~` on `(0, infinity)`.
pub fn a_beta(params: &ModelParams) -> Result<f64> {
    params.require_collapsed("a_beta")?;
    let (mut lo, mut hi) = A_BETA_BRACKET;
    let mut widen = 0;
    while g_tilde_slope(params, hi)? >= 0.0 {
        hi *= 2.0;
        widen += 1;
        if widen > 60 {
            return Err(domain("a_beta", "no sign change of G~' above the bracket"));
        }
    }
    while g_tilde_slope(params, lo)? <= 0.0 {
        lo *= 0.5;
        widen += 1;
        if widen > 60 {
            return Err(domain("a_beta", "no sign change of G~' below the bracket"));
        }
    }
    let objective = |x: f64| match g_tilde(params, x, 0) {
        Err(Error::Domain { op: "h_tilde", .. }) => Ok(f64::NEG_INFINITY),
        other => other,
    };
    let x0 = golden_max(objective, lo, hi, 1e-6)?;
    // polish with Newton on G~', which is decreasing
    let slope = |x: f64| -> Result<(f64, f64)> {
        let point = psi_tilde(params, 1.0 / (x * x))?;
        let d1 = g_tilde_from(params, x, &point, 1)?;
        let d2 = g_tilde_from(params, x, &point, 2)?;
        // negate so the function is increasing for the shared solver
        Ok((-d1, -d2))
    };
    let width = 1e-3;
    increasing_root("a_beta", slope, (x0 - width).max(0.5 * x0), x0 + width, 0.0, 1e-12)
        .or_else(|_| increasing_root("a_beta", slope, lo, hi, 1e-3, 1e-12))
}

/// Constants of the collapsed-phase asymptotics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapsedConstants {
    pub beta: f64,
    pub a_beta: f64,
    pub g_tilde_max: f64,
    pub g_tilde_second: f64,
    /// `psi'(a_beta^{-2})`, the tilt at the saddle
    pub psi_prime: f64,
    pub c_prefactor: f64,
    pub k_circ: f64,
    pub k_hat: f64,
    pub k_bar: f64,
    /// `K_beta` from the closed product formula
    pub k_beta: f64,
    /// `K_beta` from the renewal combination of `K_hat`, `K_bar`, `delta_1`, `delta_2`
    pub k_beta_renewal: f64,
}

impl CollapsedConstants {
    pub fn route_gap(&self) -> f64 {
        ((self.k_beta - self.k_beta_renewal) / self.k_beta).abs()
    }
}

pub fn k_constants(params: &ModelParams) -> Result<CollapsedConstants> {
    params.require_collapsed("k_constants")?;
    let beta = params.beta();
    let a = a_beta(params)?;
    let point = psi_tilde(params, 1.0 / (a * a))?;
    let g_max = g_tilde_from(params, a, &point, 0)?;
    let g_second = g_tilde_from(params, a, &point, 2)?;
    let c = c_prefactor_at(params, &point.tilt())?;

    let saddle = (2.0 * std::f64::consts::PI).sqrt() * c * point.psi_prime.exp() / (a * a * g_second.abs().sqrt());
    let s = (-beta).exp();
    let one_minus_s = -(-beta).exp_m1();
    let k_circ = 2.0 * beta.exp() * saddle;
    let k_hat = k_circ * (1.0 + s) / (2.0 * one_minus_s);
    let k_bar = k_circ / one_minus_s;

    let zeta = laplace::zeta_beta(params)?;
    let denom = (1.0 + s) * zeta.exp() - (0.5 * beta).exp() * one_minus_s;
    let k_beta = 2.0 * saddle / (denom * denom);

    let d = laplace::delta_coeffs(params)?;
    let k_beta_renewal =
        (k_bar / (1.0 - d.delta2) + k_hat * d.delta1 / ((1.0 - d.delta2) * (1.0 - d.delta2))) / one_minus_s;

    let out = CollapsedConstants {
        beta,
        a_beta: a,
        g_tilde_max: g_max,
        g_tilde_second: g_second,
        psi_prime: point.psi_prime,
        c_prefactor: c,
        k_circ,
        k_hat,
        k_bar,
        k_beta,
        k_beta_renewal,
    };
    if !(out.route_gap() <= 1e-6) {
        return Err(Error::Inconsistent {
            op: "k_constants",
            detail: format!(
                "closed form {k_beta:e} and renewal route {k_beta_renewal:e} differ by {:e}",
                out.route_gap()
            ),
        });
    }
    Ok(out)
}

/// Residual of `L(h^q/2) - q h^q - G(h^q)`, which vanishes identically.
pub fn half_tilt_residual(params: &ModelParams, point: &RateFunctionPoint) -> Result<f64> {
    let tilt = point.tilt();
    let half = 0.5 * tilt.value;
    // distance of h/2 to beta/2 is half the tilt gap
    let l_half = cgf_at_gap(params, half, 0.5 * tilt.gap)[0];
    let g = half_moment(params, &tilt, G0)?;
    Ok(l_half - point.q * tilt.value - g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laplace::cgf;

    fn p(beta: f64) -> ModelParams {
        ModelParams::new(beta).unwrap()
    }

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
    }

    #[test]
    fn big_g_at_origin() {
        let prm = p(2.0);
        assert_eq!(big_g(&prm, 0.0, 0).unwrap(), 0.0);
        assert_eq!(big_g(&prm, 0.0, 1).unwrap(), 0.0);
        let l2 = cgf(&prm, 0.0, 2).unwrap();
        assert!((big_g(&prm, 0.0, 2).unwrap() - l2 / 12.0).abs() < 1e-14);
        assert!(big_g(&prm, 2.0, 0).is_err());
        assert!(big_g(&prm, -2.5, 1).is_err());
        assert!(big_g(&prm, 0.5, 3).is_err());
    }

    #[test]
    fn big_g_matches_simpson() {
        let prm = p(2.0);
        let h = 1.0;
        let oracle = simpson(|x| cgf(&prm, h * (0.5 - x), 0).unwrap(), 0.0, 1.0, 1_000_000);
        assert!((big_g(&prm, h, 0).unwrap() - oracle).abs() < 1e-10);
    }

    #[test]
    fn big_g_derivatives_across_the_edge_switch() {
        // the substitution kicks in below gap = beta/4; derivatives must stay smooth there
        let prm = p(2.0);
        for h in [-1.9, -1.2, 0.3, 1.0, 1.49, 1.5, 1.51, 1.9, 1.99] {
            let d = 1e-5;
            let fd1 = (big_g(&prm, h + d, 0).unwrap() - big_g(&prm, h - d, 0).unwrap()) / (2.0 * d);
            let fd2 = (big_g(&prm, h + d, 1).unwrap() - big_g(&prm, h - d, 1).unwrap()) / (2.0 * d);
            let g1 = big_g(&prm, h, 1).unwrap();
            let g2 = big_g(&prm, h, 2).unwrap();
            assert!((g1 - fd1).abs() < 1e-7 * (1.0 + g1.abs()), "h {h}: {g1} vs {fd1}");
            assert!((g2 - fd2).abs() < 1e-6 * (1.0 + g2.abs()), "h {h}: {g2} vs {fd2}");
        }
    }

    #[test]
    fn big_g_is_even_and_convex() {
        let prm = p(2.0);
        // K = 0.1 away from each edge on a 1e-3 grid
        let mut min_g2 = f64::INFINITY;
        let mut i = 0;
        loop {
            let h = -1.9 + 1e-3 * i as f64;
            if h > 1.9 {
                break;
            }
            min_g2 = min_g2.min(big_g(&prm, h, 2).unwrap());
            i += 1;
        }
        assert!(min_g2 > 0.0);
        for h in [0.2, 0.9, 1.7] {
            assert_eq!(big_g(&prm, h, 0).unwrap(), big_g(&prm, -h, 0).unwrap());
            assert_eq!(big_g(&prm, h, 1).unwrap(), -big_g(&prm, -h, 1).unwrap());
        }
    }

    #[test]
    fn h_tilde_inverts_g_prime() {
        let prm = p(2.0);
        let t = h_tilde(&prm, 0.5).unwrap();
        assert!((big_g_at(&prm, &t, 1).unwrap() - 0.5).abs() < 1e-12);
        assert!(h_tilde(&prm, 1.0).unwrap().value() > t.value());
        let tiny = h_tilde(&prm, 1e-8).unwrap();
        assert!(tiny.value() > 0.0 && tiny.value() < 1e-6);
        assert!(h_tilde(&prm, 0.0).is_err());
        assert!(h_tilde(&prm, -1.0).is_err());
        // deep in the edge layer the gap still carries full precision
        for beta in [1.5, 2.0, 3.0] {
            let prm = p(beta);
            let t = h_tilde(&prm, 20.0).unwrap();
            assert!(t.gap() > 0.0 && t.gap() < 1e-10);
            assert!((big_g_at(&prm, &t, 1).unwrap() - 20.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rate_function_identities() {
        for beta in [1.5, 2.0, 3.0] {
            let prm = p(beta);
            let grid = log_grid(0.05, 20.0, 25);
            let psis: Vec<f64> = grid.iter().map(|&q| psi_tilde(&prm, q).unwrap().psi).collect();
            for &q in &grid {
                let pt = psi_tilde(&prm, q).unwrap();
                assert!(pt.psi > 0.0);
                assert_eq!(pt.psi_prime, pt.h_tilde);
                let d = 1e-5;
                let fd = (psi_tilde(&prm, q + d).unwrap().psi - psi_tilde(&prm, q - d).unwrap().psi) / (2.0 * d);
                assert!((fd - pt.psi_prime).abs() < 1e-6, "beta {beta} q {q}");
                assert!(
                    half_tilt_residual(&prm, &pt).unwrap().abs() < 1e-10,
                    "beta {beta} q {q}"
                );
            }
            // convexity on the (nonuniform) grid via slopes
            for i in 1..grid.len() - 1 {
                let s0 = (psis[i] - psis[i - 1]) / (grid[i] - grid[i - 1]);
                let s1 = (psis[i + 1] - psis[i]) / (grid[i + 1] - grid[i]);
                assert!(s1 - s0 >= -1e-9);
            }
        }
        let small = psi_tilde(&p(2.0), 1e-6).unwrap();
        assert!(small.psi < 1e-10);
    }

    #[test]
    fn vartheta_matches_literal_moments() {
        let prm = p(2.0);
        let l2 = cgf(&prm, 0.0, 2).unwrap();
        assert!((vartheta(&prm, 0.0).unwrap() - l2 * l2 / 12.0).abs() < 1e-14);
        let h = 1.0;
        let n = 200_000;
        let f = |x: f64| cgf(&prm, h * (x - 0.5), 2).unwrap();
        let m0 = simpson(f, 0.0, 1.0, n);
        let m1 = simpson(|x| x * f(x), 0.0, 1.0, n);
        let m2 = simpson(|x| x * x * f(x), 0.0, 1.0, n);
        let oracle = m2 * m0 - m1 * m1;
        let v = vartheta(&prm, h).unwrap();
        assert!(v > 0.0);
        assert!((v - oracle).abs() < 1e-10);
        assert_eq!(vartheta(&prm, -h).unwrap(), v);
        assert!(vartheta(&prm, 2.0).is_err());
    }

    #[test]
    fn prefactor_is_continuous_and_vanishes_at_zero() {
        let prm = p(2.0);
        let mut last = c_prefactor(&prm, 0.5).unwrap();
        assert!(last > 0.0);
        for i in 1..=20 {
            let v = c_prefactor(&prm, 0.5 + 1e-4 * i as f64).unwrap();
            assert!(((v - last) / last).abs() < 1e-3);
            last = v;
        }
        assert!(c_prefactor(&prm, 1e-8).unwrap() < 1e-6);
        let again = c_prefactor(&prm, 0.5).unwrap();
        assert_eq!(again, c_prefactor(&prm, 0.5).unwrap());
    }

    #[test]
    fn g_tilde_derivatives() {
        let prm = p(2.0);
        for x in [0.4, 0.8, 1.2, 1.6, 2.5, 4.0] {
            assert!(g_tilde(&prm, x, 0).unwrap() < 0.0);
            let d = 1e-5;
            let fd1 = (g_tilde(&prm, x + d, 0).unwrap() - g_tilde(&prm, x - d, 0).unwrap()) / (2.0 * d);
            let fd2 = (g_tilde(&prm, x + d, 1).unwrap() - g_tilde(&prm, x - d, 1).unwrap()) / (2.0 * d);
            assert!((fd1 - g_tilde(&prm, x, 1).unwrap()).abs() < 1e-6, "x {x}");
            assert!((fd2 - g_tilde(&prm, x, 2).unwrap()).abs() < 1e-5, "x {x}");
        }
        assert!(g_tilde(&p(1.0), 1.0, 0).is_err());
        assert!(g_tilde(&prm, -1.0, 0).is_err());
    }

    #[test]
    fn a_beta_is_the_maximiser() {
        for beta in [1.5, 2.0, 3.0] {
            let prm = p(beta);
            let a = a_beta(&prm).unwrap();
            assert!(g_tilde(&prm, a, 1).unwrap().abs() < 1e-10);
            assert!(g_tilde(&prm, a, 2).unwrap() < 0.0);
            let top = g_tilde(&prm, a, 0).unwrap();
            assert!(top >= g_tilde(&prm, a - 1e-3, 0).unwrap());
            assert!(top >= g_tilde(&prm, a + 1e-3, 0).unwrap());
            // the saddle tilt is twice zeta
            let zeta = laplace::zeta_beta(&prm).unwrap();
            let q_star = big_g(&prm, 2.0 * zeta, 1).unwrap();
            assert!((a - q_star.powf(-0.5)).abs() < 1e-9, "beta {beta}");
        }
        assert!(a_beta(&p(1.2)).is_err());
    }

    #[test]
    fn k_constants_routes_agree() {
        for beta in [1.4, 1.8, 2.0, 2.5, 3.0] {
            let prm = p(beta);
            let k = k_constants(&prm).unwrap();
            assert!(k.route_gap() < 1e-9, "beta {beta}: {}", k.route_gap());
            for v in [k.k_circ, k.k_hat, k.k_bar, k.k_beta] {
                assert!(v > 0.0);
            }
            assert!(k.g_tilde_max < 0.0 && k.g_tilde_second < 0.0);
            let ratio = k.k_bar / k.k_hat;
            assert!((ratio - 2.0 / (1.0 + (-beta).exp())).abs() < 1e-12);
        }
        assert!(k_constants(&p(1.0)).is_err());
    }

    #[test]
    fn results_are_deterministic() {
        let prm = p(2.0);
        assert_eq!(k_constants(&prm).unwrap(), k_constants(&prm).unwrap());
        assert_eq!(psi_tilde(&prm, 3.0).unwrap(), psi_tilde(&prm, 3.0).unwrap());
    }
}
