//! Identities and asymptotic checks built on the exact tables.

use serde::{Deserialize, Serialize};

use super::excursion::{excursion_sweep, ExcursionTable};
use super::logweight::LogWeight;
use super::stretch::{series_from_table, StretchTable, TableKind, Variant};
use super::TableBudget;
use crate::continuum::{c_prefactor_at, psi_tilde};
use crate::error::{domain, Error, Result};
use crate::laplace::{self, cgf, ModelParams};
use crate::solve::golden_max;

/// Single-bead partition functions `Z°_L` for `L = 2..=l_max` through the
/// excursion representation `Z°_L e^{-beta L} = 2c sum_N Gamma^N P(V_{N+1, L-N})`.
/// Entry `L` of the result; entries 0 and 1 are zero.
pub fn walk_rep_series(params: &ModelParams, l_max: usize, budget: &TableBudget) -> Result<Vec<LogWeight>> {
    if l_max < 2 {
        return Err(domain(
            "walk_rep_single_bead",
            format!("L must be at least 2, got {l_max}"),
        ));
    }
    let n_max = l_max / 2 + 1;
    // heights never exceed the area, so capping at the area loses nothing
    let tables = excursion_sweep(params, n_max, l_max - 1, Some(l_max - 1), budget)?;
    let log_gamma = params.gamma_beta().ln();
    let log_2c = (2.0 * params.c_beta()).ln();
    let mut out = vec![LogWeight::ZERO; l_max + 1];
    for (l, slot) in out.iter_mut().enumerate().skip(2) {
        let terms = (1..=l / 2).map(|big_n| {
            let p = tables[big_n].get(l - big_n);
            LogWeight::from_log(big_n as f64 * log_gamma + p.ln())
        });
        let s: LogWeight = terms.sum();
        *slot = LogWeight::from_log(log_2c + params.beta() * l as f64 + s.ln());
    }
    Ok(out)
}

/// `Z°_L` through the excursion representation.
pub fn walk_rep_single_bead(params: &ModelParams, l: usize, budget: &TableBudget) -> Result<LogWeight> {
    Ok(walk_rep_series(params, l, budget)?[l])
}

/// Largest length accepted by [`renewal_check`].
pub const RENEWAL_MAX: usize = 80;

/// Outcome of the bead-renewal identities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenewalCheck {
    pub l_max: usize,
    /// max relative error of `Z^c_L` against its bead convolution
    pub c_end_error: f64,
    /// max relative error of `Z_L = sum_k Z^c_{L-k}`
    pub full_error: f64,
}

impl RenewalCheck {
    pub fn max_error(&self) -> f64 {
        self.c_end_error.max(self.full_error)
    }
}

/// Rebuild `Z^c` from bead partition functions and `Z` from `Z^c`, and compare
/// both with the direct tables.
pub fn renewal_check(params: &ModelParams, l_max: usize, budget: &TableBudget) -> Result<RenewalCheck> {
    if l_max > RENEWAL_MAX {
        return Err(Error::Size {
            op: "renewal_check",
            size: l_max,
            limit: RENEWAL_MAX,
        });
    }
    if l_max < 2 {
        return Err(domain("renewal_check", "l_max must be at least 2"));
    }
    let beta = params.beta();
    let full_table = StretchTable::build(params, l_max, TableKind::Full, budget)?;
    let circ_table = StretchTable::build(params, l_max, TableKind::Circ, budget)?;
    // linear values scaled by e^{-beta L}
    let scaled = |s: &super::PartitionSeries| -> Vec<f64> {
        s.values
            .iter()
            .enumerate()
            .map(|(l, w)| (w.ln() - beta * l as f64).exp())
            .collect()
    };
    let hat = scaled(&series_from_table(&circ_table, Variant::HatCirc));
    let bar = scaled(&series_from_table(&circ_table, Variant::BarCirc));
    let cend = scaled(&series_from_table(&full_table, Variant::CEnd));
    let full = scaled(&series_from_table(&full_table, Variant::Full));

    // f[L]: sequences of subsequent beads with total length L
    let mut f = vec![0.0; l_max + 1];
    f[0] = 1.0;
    for l in 2..=l_max {
        f[l] = (2..=l).map(|t| hat[t] * f[l - t]).sum();
    }
    let mut cend_renewal = vec![0.0; l_max + 1];
    cend_renewal[0] = 1.0;
    for l in 1..=l_max {
        cend_renewal[l] = (2..=l).map(|t| bar[t] * f[l - t]).sum();
    }
    let decay = (-beta).exp();
    let rel = |a: f64, b: f64| if b == 0.0 { a.abs() } else { ((a - b) / b).abs() };
    let mut c_end_error: f64 = 0.0;
    let mut full_error: f64 = 0.0;
    for l in 1..=l_max {
        c_end_error = c_end_error.max(rel(cend_renewal[l], cend[l]));
        // trailing zeros each add one monomer: Z_L = sum_k Z^c_{L-k}
        let mut z = 0.0;
        let mut w = 1.0;
        for k in 0..=l {
            z += cend_renewal[l - k] * w;
            w *= decay;
        }
        full_error = full_error.max(rel(z, full[l]));
    }
    Ok(RenewalCheck {
        l_max,
        c_end_error,
        full_error,
    })
}

/// Truncated generating series of the extended beads against the closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaSeriesCheck {
    pub beta: f64,
    pub l_star: usize,
    pub delta1: f64,
    pub delta2: f64,
    /// `sum_{L <= L*} Zbar_L e^{-beta L}`
    pub series1: f64,
    /// `sum_{L <= L*} Zhat_L e^{-beta L}`
    pub series2: f64,
    /// upper bound on `delta1 - series1`
    pub tail1: f64,
    /// upper bound on `delta2 - series2`
    pub tail2: f64,
}

impl DeltaSeriesCheck {
    /// Whether each closed form lies in `[series, series + tail]` up to rounding.
    pub fn consistent(&self) -> bool {
        let ok = |closed: f64, series: f64, tail: f64| {
            let slack = 8.0 * f64::EPSILON * closed.abs().max(series.abs());
            closed - series >= -slack && closed - series <= tail + slack
        };
        ok(self.delta1, self.series1, self.tail1) && ok(self.delta2, self.series2, self.tail2)
    }
}

/// Chernoff bound on `P(A_N >= m)` for the area `A_N = X_1 + ... + X_N`.
fn area_chernoff(params: &ModelParams, big_n: usize, m: f64) -> Result<f64> {
    let theta_max = 0.5 * params.beta() / big_n as f64 * (1.0 - 1e-9);
    let exponent = |theta: f64| -> Result<f64> {
        let mut s = -theta * m;
        for j in 1..=big_n {
            s += cgf(params, theta * j as f64, 0)?;
        }
        Ok(s)
    };
    let theta = golden_max(|t| exponent(t).map(|v| -v), 0.0, theta_max, 1e-10 * theta_max)?;
    Ok(exponent(theta)?.exp())
}

/// Bound on `sum_{L > L*} Z°_L e^{-beta L}` from the excursion representation.
fn circ_tail_bound(params: &ModelParams, l_star: usize) -> Result<f64> {
    let gamma = params.gamma_beta();
    let mut total = 0.0;
    let mut gn = 1.0;
    for big_n in 1..=l_star {
        gn *= gamma;
        let m = (l_star + 1 - big_n) as f64;
        // P(X_1 > 0) < 1/2 bounds the excursion event itself
        total += gn * area_chernoff(params, big_n, m)?.min(0.5);
    }
    total += 0.5 * gn * gamma / (1.0 - gamma);
    Ok(2.0 * params.c_beta() * total)
}

/// Compare `delta_1, delta_2` with their series truncated at `l_star`.
pub fn delta_series(params: &ModelParams, l_star: usize, budget: &TableBudget) -> Result<DeltaSeriesCheck> {
    params.require_collapsed("delta_series")?;
    let d = laplace::delta_coeffs(params)?;
    let beta = params.beta();
    let table = StretchTable::build(params, l_star, TableKind::Circ, budget)?;
    let scaled = |v: Variant| -> Vec<f64> {
        series_from_table(&table, v)
            .values
            .iter()
            .enumerate()
            .map(|(l, w)| (w.ln() - beta * l as f64).exp())
            .collect()
    };
    let circ = scaled(Variant::Circ);
    let series1: f64 = scaled(Variant::BarCirc).iter().sum();
    let series2: f64 = scaled(Variant::HatCirc).iter().sum();
    let s = (-beta).exp();
    let one_minus_s = -(-beta).exp_m1();
    // beads up to L* spilling into lengths beyond L* through leading zeros
    let spill: f64 = (0..=l_star)
        .map(|t| circ[t] * (-beta * (l_star + 1 - t) as f64).exp() / one_minus_s)
        .sum();
    let t_circ = circ_tail_bound(params, l_star)?;
    Ok(DeltaSeriesCheck {
        beta,
        l_star,
        delta1: d.delta1,
        delta2: d.delta2,
        series1,
        series2,
        tail1: spill + t_circ / one_minus_s,
        tail2: spill + (0.5 + s / one_minus_s) * t_circ,
    })
}

/// `sum_{n >= 2} Gamma^n sum_k P(V_{n,k})` over the computed tables, an
/// inner approximation of `r_beta` (the first step must be positive, so the
/// `n = 1` table is skipped).
pub fn r_beta_series(params: &ModelParams, tables: &[ExcursionTable]) -> f64 {
    let gamma = params.gamma_beta();
    tables
        .iter()
        .filter(|t| t.n >= 2)
        .map(|t| gamma.powi(t.n as i32) * t.total())
        .sum()
}

/// Local limit ratio at one `(n, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LltPoint {
    pub n: usize,
    pub q: f64,
    pub area: u64,
    pub probability: f64,
    pub ratio: f64,
    /// mass pruned by the height cap, and the mass the table kept
    pub tail_bound: f64,
    pub retained_mass: f64,
}

fn integral_area(op: &'static str, n: usize, q: f64) -> Result<u64> {
    if !(q > 0.0) {
        return Err(domain(op, format!("q must be positive, got {q}")));
    }
    let raw = q * (n * n) as f64;
    let area = raw.round();
    if (raw - area).abs() > 1e-9 * raw.max(1.0) {
        return Err(domain(op, format!("q n^2 = {raw} is not an integer")));
    }
    Ok(area as u64)
}

/// `n^2 P(V_{n, q n^2}) e^{n psi(q)} / C_{beta,q}` for each `n`, from one sweep.
pub fn llt_scan(params: &ModelParams, q: f64, n_list: &[usize], budget: &TableBudget) -> Result<Vec<LltPoint>> {
    let areas = n_list
        .iter()
        .map(|&n| integral_area("llt_ratio", n, q))
        .collect::<Result<Vec<_>>>()?;
    let n_max = n_list.iter().copied().max().unwrap_or(0);
    let area_cap = areas.iter().copied().max().unwrap_or(0) as usize;
    if n_max < 1 {
        return Err(domain("llt_ratio", "n must be at least 1"));
    }
    let point = psi_tilde(params, q)?;
    let c = c_prefactor_at(params, &point.tilt())?;
    let tables = excursion_sweep(params, n_max, area_cap, None, budget)?;
    Ok(n_list
        .iter()
        .zip(&areas)
        .map(|(&n, &area)| {
            let t = &tables[n - 1];
            let prob = t.get(area as usize);
            let nf = n as f64;
            LltPoint {
                n,
                q,
                area,
                probability: prob,
                ratio: nf * nf * prob * (nf * point.psi).exp() / c,
                tail_bound: t.tail_bound,
                retained_mass: t.total(),
            }
        })
        .collect())
}

pub fn llt_ratio(params: &ModelParams, n: usize, q: f64, budget: &TableBudget) -> Result<f64> {
    Ok(llt_scan(params, q, &[n], budget)?[0].ratio)
}

/// Minimum window `l_max - l_min` for [`asymptotics_fit`].
pub const FIT_MIN_WINDOW: usize = 50;

/// Least-squares fit of `log Z_L - beta L = c1 sqrt(L) + g log L + c0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsFit {
    pub l_min: usize,
    pub l_max: usize,
    pub sqrt_coeff: f64,
    pub log_slope: f64,
    pub intercept: f64,
    pub rms_residual: f64,
}

pub fn asymptotics_fit(
    params: &ModelParams,
    l_min: usize,
    l_max: usize,
    budget: &TableBudget,
) -> Result<AsymptoticsFit> {
    params.require_collapsed("asymptotics_fit")?;
    if l_max < l_min + FIT_MIN_WINDOW || l_min < 1 {
        return Err(domain(
            "asymptotics_fit",
            format!("window [{l_min}, {l_max}] is shorter than {FIT_MIN_WINDOW} and ill-conditioned"),
        ));
    }
    let table = StretchTable::build(params, l_max, TableKind::Full, budget)?;
    let beta = params.beta();
    let rows: Vec<([f64; 3], f64)> = (l_min..=l_max)
        .map(|l| {
            let lf = l as f64;
            ([lf.sqrt(), lf.ln(), 1.0], table.total(l).ln() - beta * lf)
        })
        .collect();
    let coef = least_squares(&rows)?;
    let rss: f64 = rows
        .iter()
        .map(|(x, y)| {
            let fit: f64 = x.iter().zip(&coef).map(|(a, b)| a * b).sum();
            (y - fit) * (y - fit)
        })
        .sum();
    Ok(AsymptoticsFit {
        l_min,
        l_max,
        sqrt_coeff: coef[0],
        log_slope: coef[1],
        intercept: coef[2],
        rms_residual: (rss / rows.len() as f64).sqrt(),
    })
}

/// Householder QR solve of a tall least-squares problem with three unknowns.
#[allow(clippy::needless_range_loop)]
fn least_squares(rows: &[([f64; 3], f64)]) -> Result<[f64; 3]> {
    let m = rows.len();
    let mut a: Vec<[f64; 3]> = rows.iter().map(|r| r.0).collect();
    let mut b: Vec<f64> = rows.iter().map(|r| r.1).collect();
    for j in 0..3 {
        let norm = (j..m).map(|i| a[i][j] * a[i][j]).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(domain("asymptotics_fit", "rank-deficient design"));
        }
        let alpha = if a[j][j] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (j..m).map(|i| a[i][j]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        for k in j..3 {
            let dot: f64 = (j..m).map(|i| v[i - j] * a[i][k]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in j..m {
                a[i][k] -= f * v[i - j];
            }
        }
        let dot: f64 = (j..m).map(|i| v[i - j] * b[i]).sum();
        let f = 2.0 * dot / vnorm2;
        for i in j..m {
            b[i] -= f * v[i - j];
        }
    }
    let mut x = [0.0; 3];
    for j in (0..3).rev() {
        let s: f64 = (j + 1..3).map(|k| a[j][k] * x[k]).sum();
        x[j] = (b[j] - s) / a[j][j];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::stretch_dp;

    fn p(beta: f64) -> ModelParams {
        ModelParams::new(beta).unwrap()
    }

    #[test]
    fn walk_representation_matches_dp() {
        let b = TableBudget::default();
        for beta in [1.5, 2.0, 3.0] {
            let prm = p(beta);
            let walk = walk_rep_series(&prm, 40, &b).unwrap();
            let circ = stretch_dp(&prm, 40, Variant::Circ, &b).unwrap();
            for l in 2..=40 {
                assert!(walk[l].rel_diff(circ.get(l)) < 1e-10, "beta {beta} L {l}");
            }
        }
        let two = walk_rep_single_bead(&p(2.0), 2, &b).unwrap();
        assert!((two.value() - 2.0).abs() < 1e-13);
        assert!(walk_rep_single_bead(&p(2.0), 1, &b).is_err());
    }

    #[test]
    fn renewal_identities_hold() {
        let chk = renewal_check(&p(2.0), 60, &TableBudget::default()).unwrap();
        assert!(chk.max_error() < 1e-10, "{chk:?}");
        assert!(renewal_check(&p(2.0), 81, &TableBudget::default()).is_err());
    }

    #[test]
    fn delta_series_within_tail() {
        for beta in [1.5, 2.0, 3.0] {
            let chk = delta_series(&p(beta), 200, &TableBudget::default()).unwrap();
            assert!(chk.consistent(), "{chk:?}");
        }
    }

    #[test]
    fn excursions_sum_to_r_beta() {
        let prm = p(2.0);
        let tables = excursion_sweep(&prm, 32, 1500, None, &TableBudget::default()).unwrap();
        let r = laplace::r_beta(&prm).unwrap();
        let s = r_beta_series(&prm, &tables);
        assert!(s <= r + 1e-15 && r - s < 1e-12, "{s} vs {r}");
    }

    #[test]
    fn llt_requires_integral_area() {
        let b = TableBudget::default();
        assert!(llt_ratio(&p(2.0), 3, 0.5, &b).is_err());
        let tiny = llt_ratio(&p(2.0), 2, 1.0, &b).unwrap();
        assert!(tiny > 0.0 && tiny.is_finite());
    }

    #[test]
    fn least_squares_recovers_coefficients() {
        let rows: Vec<([f64; 3], f64)> = (300..=1000)
            .map(|l| {
                let lf = l as f64;
                ([lf.sqrt(), lf.ln(), 1.0], -2.5 * lf.sqrt() - 0.75 * lf.ln() + 1.4)
            })
            .collect();
        let c = least_squares(&rows).unwrap();
        assert!((c[0] + 2.5).abs() < 1e-9 && (c[1] + 0.75).abs() < 1e-8 && (c[2] - 1.4).abs() < 1e-7);
        assert!(asymptotics_fit(&p(2.0), 100, 120, &TableBudget::default()).is_err());
    }
}
