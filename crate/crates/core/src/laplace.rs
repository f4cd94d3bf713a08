//! Discrete Laplace step law, its exponential tilts, and the scalar
//! constants of the collapsed phase that have closed forms.
//!
//! The step law puts mass `e^{-beta |k| / 2} / c_beta` on every integer `k`.
//! Writing `r = e^{-beta/2}`, its moment generating function factorises as
//! `(1 - r)^2 / ((1 - r e^h)(1 - r e^{-h}))`, which is what every routine here
//! differentiates. Near the edge of the tilt domain the distance to `beta/2`
//! is carried explicitly so that `1 - r e^h` keeps full relative precision.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Inverse temperature and the scalars derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    beta: f64,
    c_beta: f64,
    gamma_beta: f64,
}

impl ModelParams {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(domain("ModelParams::new", format!("beta must be positive, got {beta}")));
        }
        let c_beta = c_of(beta);
        Ok(Self {
            beta,
            c_beta,
            gamma_beta: c_beta * (-beta).exp(),
        })
    }

    #[inline]
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Normaliser of the step law, `(1 + e^{-beta/2}) / (1 - e^{-beta/2})`.
    #[inline]
    pub fn c_beta(&self) -> f64 {
        self.c_beta
    }

    /// `c_beta / e^beta`; below one exactly in the collapsed phase.
    #[inline]
    pub fn gamma_beta(&self) -> f64 {
        self.gamma_beta
    }

    /// Ratio `e^{-beta/2}` of the two-sided geometric law.
    #[inline]
    pub fn ratio(&self) -> f64 {
        (-0.5 * self.beta).exp()
    }

    /// `log(1 - e^{-beta/2})`, shared by every cgf evaluation.
    #[inline]
    pub(crate) fn log_one_minus_ratio(&self) -> f64 {
        (-(-0.5 * self.beta).exp_m1()).ln()
    }

    pub fn is_collapsed(&self) -> bool {
        self.beta > beta_c()
    }

    pub(crate) fn require_collapsed(&self, op: &'static str) -> Result<()> {
        if self.beta > beta_c() {
            Ok(())
        } else {
            Err(domain(
                op,
                format!("requires beta > beta_c = {:.6}, got {}", beta_c(), self.beta),
            ))
        }
    }

    pub(crate) fn require_at_least_critical(&self, op: &'static str) -> Result<()> {
        if self.beta >= beta_c() {
            Ok(())
        } else {
            Err(domain(
                op,
                format!("requires beta >= beta_c = {:.6}, got {}", beta_c(), self.beta),
            ))
        }
    }
}

fn c_of(beta: f64) -> f64 {
    let r = (-0.5 * beta).exp();
    (1.0 + r) / -(-0.5 * beta).exp_m1()
}

/// `P_beta(k) = e^{-beta |k| / 2} / c_beta`.
pub fn step_pmf(params: &ModelParams, k: i64) -> f64 {
    (-0.5 * params.beta * k.unsigned_abs() as f64).exp() / params.c_beta
}

/// Value and first two derivatives of the cgf at `x >= 0`, where `gap` is
/// `beta/2 - x` known to full relative precision.
#[inline]
pub(crate) fn cgf_at_gap(params: &ModelParams, x: f64, gap: f64) -> [f64; 3] {
    // a = r e^x = e^{-gap}, b = r e^{-x} = e^{-(beta/2 + x)}
    let one_minus_a = -(-gap).exp_m1();
    let a = (-gap).exp();
    let s = 0.5 * params.beta + x;
    let one_minus_b = -(-s).exp_m1();
    let b = (-s).exp();
    let value = 2.0 * params.log_one_minus_ratio() - one_minus_a.ln() - one_minus_b.ln();
    let first = a / one_minus_a - b / one_minus_b;
    let second = a / (one_minus_a * one_minus_a) + b / (one_minus_b * one_minus_b);
    [value, first, second]
}

/// Log moment generating function `log E[e^{hZ}]` (order 0) or its first
/// or second derivative.
pub fn cgf(params: &ModelParams, h: f64, order: u8) -> Result<f64> {
    let half = 0.5 * params.beta;
    if !(h.abs() < half) {
        return Err(domain("cgf", format!("|h| must be < beta/2 = {half}, got {h}")));
    }
    if order > 2 {
        return Err(domain("cgf", format!("order must be 0, 1 or 2, got {order}")));
    }
    let x = h.abs();
    let parts = cgf_at_gap(params, x, half - x);
    Ok(match order {
        0 => parts[0],
        1 => {
            if h < 0.0 {
                -parts[1]
            } else {
                parts[1]
            }
        }
        _ => parts[2],
    })
}

/// Critical inverse temperature: `2 ln x*` with `x*` the real root of
/// `X^3 - X^2 - X - 1`.
pub fn beta_c() -> f64 {
    static BETA_C: std::sync::OnceLock<f64> = std::sync::OnceLock::new();
    *BETA_C.get_or_init(|| {
        let mut x: f64 = 2.0;
        for _ in 0..100 {
            let f = ((x - 1.0) * x - 1.0) * x - 1.0;
            let df = (3.0 * x - 2.0) * x - 1.0;
            let step = f / df;
            x -= step;
            if step.abs() <= 4.0 * f64::EPSILON * x {
                break;
            }
        }
        2.0 * x.ln()
    })
}

/// Escape probability of the `h`-tilted walk, `(e^{2h} - 1) / (e^{h + beta/2} - 1)`.
pub fn kappa(params: &ModelParams, h: f64) -> Result<f64> {
    let half = 0.5 * params.beta;
    if !(0.0..half).contains(&h) {
        return Err(domain("kappa", format!("h must lie in [0, {half}), got {h}")));
    }
    Ok((2.0 * h).exp_m1() / (h + half).exp_m1())
}

/// Root `zeta_beta` of `L(-zeta) = -log Gamma_beta` in `[0, beta/2)`.
pub fn zeta_beta(params: &ModelParams) -> Result<f64> {
    params.require_at_least_critical("zeta_beta")?;
    // zeta has a square-root branch point at beta_c, so within rounding of
    // beta_c the value is pinned to its exact limit
    if params.beta - beta_c() <= 8.0 * f64::EPSILON * beta_c() {
        return Ok(0.0);
    }
    let arg = (-0.5 * params.beta).exp() * params.beta.cosh();
    Ok(arg.max(1.0).acosh())
}

/// `r_beta = E[1{X_1 > 0} 1{X_rho = 0} Gamma^rho]` in closed form.
///
/// The direct form `1 - e^{-beta} - e^{zeta - beta/2}` cancels badly for
/// large beta; with `s = e^{-beta/2}` it equals `2 s^6 / (u + v)`, where
/// `u = 1 - 2s^2 - s^4` and `v = ((1 + s^4)^2 - 4 s^2)^{1/2}`.
pub fn r_beta(params: &ModelParams) -> Result<f64> {
    // v = 2 s sinh(zeta) shares the branch point of zeta at beta_c
    let zeta = zeta_beta(params)?;
    let s2 = (-params.beta).exp();
    let s4 = s2 * s2;
    let u = 1.0 - 2.0 * s2 - s4;
    let v = if zeta == 0.0 {
        0.0
    } else {
        ((1.0 + s4) * (1.0 + s4) - 4.0 * s2).max(0.0).sqrt()
    };
    Ok(2.0 * s4 * s2 / (u + v))
}

/// Generating-function values of the extended-bead partition functions at
/// `z = e^{-beta}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaCoeffs {
    /// Sum over first beads, `sum_L Zbar_L e^{-beta L}`.
    pub delta1: f64,
    /// Sum over subsequent beads, `sum_L Zhat_L e^{-beta L}`.
    pub delta2: f64,
}

pub fn delta_coeffs(params: &ModelParams) -> Result<DeltaCoeffs> {
    let r = r_beta(params)?;
    let beta = params.beta;
    let one_minus_s = -(-beta).exp_m1();
    let c_2beta = c_of(2.0 * beta);
    Ok(DeltaCoeffs {
        delta1: 2.0 * beta.exp() * r / one_minus_s,
        delta2: beta.exp() * c_2beta * r,
    })
}

/// Exponentially tilted step law `e^{hk - L(h)} P_beta(k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltParam {
    h: f64,
    /// `1 / log(r e^h)`, from the ratio of the nonnegative side
    inv_log_up: f64,
    /// `1 / log(r e^{-h})`, from the ratio of the negative side
    inv_log_down: f64,
    /// probability of a nonnegative increment
    p_nonneg: f64,
    log_norm: f64,
}

impl TiltParam {
    pub fn new(params: &ModelParams, h: f64) -> Result<Self> {
        let log_norm = cgf(params, h, 0).map_err(|e| match e {
            Error::Domain { detail, .. } => domain("TiltParam::new", detail),
            other => other,
        })?;
        let r = params.ratio();
        let up = r * h.exp();
        let down = r * (-h).exp();
        // mass of k >= 0 is 1/(1-up), of k < 0 is down/(1-down), up to the same constant
        let pos = 1.0 / (1.0 - up);
        let neg = down / (1.0 - down);
        Ok(Self {
            h,
            inv_log_up: 1.0 / (h - 0.5 * params.beta),
            inv_log_down: 1.0 / (-h - 0.5 * params.beta),
            p_nonneg: pos / (pos + neg),
            log_norm,
        })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn pmf(&self, params: &ModelParams, k: i64) -> f64 {
        let log_p = self.h * k as f64 - 0.5 * params.beta * k.unsigned_abs() as f64;
        (log_p - self.log_norm).exp() / params.c_beta
    }

    /// Draw an increment from two uniforms in `[0, 1)` by inverting the
    /// two-sided geometric law.
    #[inline]
    pub fn invert(&self, side: f64, magnitude: f64) -> i64 {
        // 1 - magnitude lies in (0, 1]
        let u = 1.0 - magnitude;
        if side < self.p_nonneg {
            (u.ln() * self.inv_log_up).floor() as i64
        } else {
            -1 - (u.ln() * self.inv_log_down).floor() as i64
        }
    }
}
