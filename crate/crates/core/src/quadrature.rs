//! Globally adaptive Gauss-Legendre quadrature on 15-point panels.

use std::sync::LazyLock;

use crate::error::{Error, Result};

const ORDER: usize = 15;
const MAX_PANELS: usize = 4000;

/// Nodes on `[-1, 1]` and weights of the 15-point rule, by Newton iteration
/// on the Legendre recurrence.
static RULE: LazyLock<([f64; ORDER], [f64; ORDER])> = LazyLock::new(|| {
    let mut nodes = [0.0; ORDER];
    let mut weights = [0.0; ORDER];
    let n = ORDER as f64;
    for i in 0..ORDER {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=ORDER {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
});

fn gauss15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (nodes, weights) = &*RULE;
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut sum = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        sum += w * f(mid + half * x);
    }
    sum * half
}

struct Panel {
    a: f64,
    b: f64,
    /// rule applied to the whole panel
    coarse: f64,
    /// rule applied to each half, summed
    fine: f64,
}

impl Panel {
    fn new<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, coarse: f64) -> Self {
        let m = 0.5 * (a + b);
        let fine = gauss15(f, a, m) + gauss15(f, m, b);
        Self { a, b, coarse, fine }
    }

    fn err(&self) -> f64 {
        (self.fine - self.coarse).abs()
    }
}

/// Tolerances for [`integrate`]; the run stops once the summed panel error
/// estimate is below `max(abs_tol, rel_tol * |I|)`.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-14,
        }
    }
}

/// Integrate `f` over `[a, b]`, bisecting the panel with the largest error
/// estimate until the tolerance is met.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let coarse = gauss15(&f, a, b);
    let mut panels = vec![Panel::new(&f, a, b, coarse)];
    loop {
        let total: f64 = panels.iter().map(|p| p.fine).sum();
        let err: f64 = panels.iter().map(Panel::err).sum();
        if !total.is_finite() {
            return Err(Error::NoConvergence {
                op: "integrate",
                iterations: panels.len(),
                residual: f64::NAN,
            });
        }
        if err <= tol.abs_tol.max(tol.rel_tol * total.abs()) {
            return Ok(total);
        }
        if panels.len() >= MAX_PANELS {
            return Err(Error::NoConvergence {
                op: "integrate",
                iterations: panels.len(),
                residual: err,
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err().total_cmp(&y.1.err()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let p = panels.swap_remove(worst);
        let m = 0.5 * (p.a + p.b);
        if !(p.a < m && m < p.b) {
            // panel cannot be split further in floating point
            return Err(Error::NoConvergence {
                op: "integrate",
                iterations: panels.len(),
                residual: err,
            });
        }
        let left = gauss15(&f, p.a, m);
        let right = gauss15(&f, m, p.b);
        panels.push(Panel::new(&f, p.a, m, left));
        panels.push(Panel::new(&f, m, p.b, right));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let (nodes, weights) = &*RULE;
        let wsum: f64 = weights.iter().sum();
        assert!((wsum - 2.0).abs() < 1e-14);
        // degree 28 is the highest exact degree
        let v: f64 = nodes.iter().zip(weights).map(|(x, w)| w * x.powi(28)).sum();
        assert!((v - 2.0 / 29.0).abs() < 1e-14);
    }

    #[test]
    fn smooth_integrals() {
        let tol = Tolerance::default();
        let v = integrate(f64::exp, 0.0, 1.0, tol).unwrap();
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-14);
        let v = integrate(|x: f64| 1.0 / (1e-6 + x), 0.0, 1.0, tol).unwrap();
        let exact = ((1.0 + 1e-6) / 1e-6f64).ln();
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn log_singularity_near_endpoint() {
        let tol = Tolerance::default();
        let v = integrate(|x: f64| -(1.0 - x + 1e-12).ln(), 0.0, 1.0, tol).unwrap();
        // int_0^1 -ln(1 + e - x) dx with e = 1e-12
        let e: f64 = 1e-12;
        let exact = -((1.0 + e) * (1.0 + e).ln() - e * e.ln() - 1.0);
        assert!((v - exact).abs() < 1e-11);
    }
}
