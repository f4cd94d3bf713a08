//! The full verification campaign behind `verify-all`.

use std::time::Instant;

use ipdsaw_core::beads::bead_survey;
use ipdsaw_core::continuum::{half_tilt_residual, k_constants, psi_tilde};
use ipdsaw_core::exact::{
    asymptotics_fit, delta_series, enumerate_all, evaluate_counts, exact_polynomial, llt_scan, renewal_check,
    stretch_dp, walk_rep_series, TableBudget, Variant,
};
use ipdsaw_core::finite_n::{em_gap_scan, tilt_gap_scan};
use ipdsaw_core::laplace::{beta_c, delta_coeffs, kappa, r_beta};
use ipdsaw_core::sampling::{mc_kappa, mc_r_beta, sample_polymer};
use ipdsaw_core::{ModelParams, Result};
use serde::Serialize;
use serde_json::{json, Value};

use crate::report::Check;

/// Inputs shared by every stage.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct VerifyConfig {
    pub beta: f64,
    pub seed: u64,
    pub table_budget_bytes: u64,
}

/// Result data of a stage and its verdicts.
type Outcome = Result<(Value, Vec<Check>)>;

/// One stage of the campaign with its wall-clock allowance.
pub struct Stage {
    pub criterion: u8,
    pub title: &'static str,
    pub budget_seconds: f64,
    run: fn(&VerifyConfig) -> Outcome,
}

pub const STAGES: [Stage; 11] = [
    Stage {
        criterion: 1,
        title: "brute-force equivalence",
        budget_seconds: 10.0,
        run: brute_force,
    },
    Stage {
        criterion: 2,
        title: "walk representation",
        budget_seconds: 120.0,
        run: walk_representation,
    },
    Stage {
        criterion: 3,
        title: "renewal identities",
        budget_seconds: 60.0,
        run: renewal,
    },
    Stage {
        criterion: 4,
        title: "closed-form chain",
        budget_seconds: 60.0,
        run: closed_forms,
    },
    Stage {
        criterion: 5,
        title: "Monte Carlo vs closed forms",
        budget_seconds: 120.0,
        run: monte_carlo,
    },
    Stage {
        criterion: 6,
        title: "Legendre identities",
        budget_seconds: 30.0,
        run: legendre,
    },
    Stage {
        criterion: 7,
        title: "discrete-to-continuum gaps",
        budget_seconds: 120.0,
        run: gaps,
    },
    Stage {
        criterion: 8,
        title: "local limit theorem",
        budget_seconds: 600.0,
        run: local_limit,
    },
    Stage {
        criterion: 9,
        title: "partition asymptotics fit",
        budget_seconds: 600.0,
        run: fit,
    },
    Stage {
        criterion: 10,
        title: "constant routes",
        budget_seconds: 60.0,
        run: routes,
    },
    Stage {
        criterion: 11,
        title: "largest bead",
        budget_seconds: 300.0,
        run: largest_bead,
    },
];

pub const MC_KAPPA_H: f64 = 0.5;
pub const MC_KAPPA_SAMPLES: u64 = 1_000_000;
pub const MC_R_SAMPLES: u64 = 10_000_000;
/// Walk-length caps; both truncation biases are below 1e-17 at beta = 2.
pub const MC_CAP: u64 = 200;
pub const GAP_N: [usize; 10] = [100, 200, 300, 400, 500, 600, 700, 800, 900, 1000];
pub const LLT_N: [usize; 5] = [16, 24, 32, 40, 48];

/// Runs every stage in order. `on_stage` sees each stage and its elapsed time.
pub fn verify_all(cfg: &VerifyConfig, mut on_stage: impl FnMut(&Stage, f64)) -> (Value, Vec<Check>) {
    let mut results = Vec::new();
    let mut checks = Vec::new();
    for stage in &STAGES {
        let start = Instant::now();
        let outcome = (stage.run)(cfg);
        on_stage(stage, start.elapsed().as_secs_f64());
        let data = match outcome {
            Ok((data, cs)) => {
                checks.extend(cs.into_iter().map(|c| Check {
                    criterion: Some(stage.criterion),
                    ..c
                }));
                data
            }
            Err(e) => {
                checks.push(Check {
                    criterion: Some(stage.criterion),
                    ..Check::named(format!("c{}.error", stage.criterion), "harness", "verify_all").holds(
                        &format!("no error ({e})"),
                        f64::NAN,
                        false,
                    )
                });
                Value::Null
            }
        };
        results.push(json!({"criterion": stage.criterion, "title": stage.title, "data": data}));
    }
    (Value::Array(results), checks)
}

fn params(beta: f64) -> Result<ModelParams> {
    ModelParams::new(beta)
}

fn budget(cfg: &VerifyConfig) -> TableBudget {
    TableBudget {
        bytes: cfg.table_budget_bytes,
    }
}

fn brute_force(cfg: &VerifyConfig) -> Outcome {
    const L_MAX: usize = 12;
    let counts = (1..=L_MAX).map(enumerate_all).collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for beta in [0.5, beta_c(), 2.0, 3.0] {
        let full = stretch_dp(&params(beta)?, L_MAX, Variant::Full, &budget(cfg))?;
        let worst = (1..=L_MAX)
            .map(|l| {
                (full.get(l).ln() - evaluate_counts(&counts[l - 1], beta))
                    .exp_m1()
                    .abs()
            })
            .fold(0.0, f64::max);
        rows.push(json!({"beta": beta, "max_rel_error": worst}));
        checks
            .push(Check::named(format!("c1.dp_vs_enumeration.beta={beta}"), "exact", "stretch_dp").below(worst, 1e-12));
    }
    let mut mismatches = 0;
    for (l, c) in (1..=L_MAX).zip(&counts) {
        let poly = exact_polynomial(l)?;
        let same = poly.len() == c.len()
            && poly
                .iter()
                .zip(c)
                .all(|((m1, a), (m2, b))| m1 == m2 && u64::try_from(a).ok() == Some(*b));
        mismatches += !same as u32;
    }
    checks.push(
        Check::named("c1.polynomial_vs_enumeration", "exact", "exact_polynomial").holds(
            "coefficient maps identical for L <= 12",
            mismatches as f64,
            mismatches == 0,
        ),
    );
    let z4: Vec<(u64, String)> = exact_polynomial(4)?
        .into_iter()
        .map(|(m, c)| (m, c.to_string()))
        .collect();
    let z4_ok = z4 == [(0, "15".to_owned()), (1, "2".to_owned())];
    checks.push(Check::named("c1.z4_polynomial", "exact", "exact_polynomial").holds("Z_4 = 15 + 2 e^beta", 0.0, z4_ok));
    Ok((json!({"rows": rows, "z4_coefficients": z4}), checks))
}

fn walk_representation(cfg: &VerifyConfig) -> Outcome {
    const L_MAX: usize = 40;
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for beta in [1.5, 2.0, 3.0] {
        let p = params(beta)?;
        let circ = stretch_dp(&p, L_MAX, Variant::Circ, &budget(cfg))?;
        let walk = walk_rep_series(&p, L_MAX, &budget(cfg))?;
        let worst = (2..=L_MAX).map(|l| circ.get(l).rel_diff(walk[l])).fold(0.0, f64::max);
        rows.push(json!({"beta": beta, "max_rel_error": worst}));
        checks.push(
            Check::named(format!("c2.circ_vs_walk.beta={beta}"), "exact", "walk_rep_single_bead").below(worst, 1e-10),
        );
    }
    Ok((json!({"l_max": L_MAX, "rows": rows}), checks))
}

fn renewal(cfg: &VerifyConfig) -> Outcome {
    let p = params(cfg.beta)?;
    let rc = renewal_check(&p, 60, &budget(cfg))?;
    let c_end = stretch_dp(&p, 4, Variant::CEnd, &budget(cfg))?;
    let z2 = c_end.get(2).value();
    let z4 = c_end.get(4).value();
    let z4_expected = 8.0 + 2.0 * cfg.beta.exp();
    let checks = vec![
        Check::named("c3.renewal_max_error", "exact", "renewal_check").below(rc.max_error(), 1e-10),
        Check::named("c3.zc2", "exact", "stretch_dp").below((z2 / 2.0 - 1.0).abs(), 1e-10),
        Check::named("c3.zc4", "exact", "stretch_dp").below((z4 / z4_expected - 1.0).abs(), 1e-10),
    ];
    Ok((
        json!({"renewal": rc, "zc2": z2, "zc4": z4, "zc4_expected": z4_expected}),
        checks,
    ))
}

fn closed_forms(cfg: &VerifyConfig) -> Outcome {
    let at_critical = delta_coeffs(&params(beta_c())?)?.delta2;
    let mut checks =
        vec![Check::named("c4.delta2_at_critical", "laplace", "delta_coeffs").below((at_critical - 1.0).abs(), 1e-10)];
    let mut rows = Vec::new();
    for beta in [1.4, 2.0, 3.0] {
        let d2 = delta_coeffs(&params(beta)?)?.delta2;
        rows.push(json!({"beta": beta, "delta2": d2}));
        checks.push(Check::named(format!("c4.delta2_below_one.beta={beta}"), "laplace", "delta_coeffs").below(d2, 1.0));
    }
    let s = delta_series(&params(cfg.beta)?, 200, &budget(cfg))?;
    let slack = 8.0 * f64::EPSILON * s.delta2.abs().max(s.series2.abs());
    checks.push(Check::named("c4.delta2_vs_series", "exact", "delta_series").within(
        s.delta2 - s.series2,
        -slack,
        s.tail2 + slack,
    ));
    checks.push(Check::named("c4.series_consistent", "exact", "delta_series").holds(
        "both closed forms within [series, series + tail]",
        s.delta1 - s.series1,
        s.consistent(),
    ));
    Ok((
        json!({"beta_c": beta_c(), "delta2_at_critical": at_critical, "rows": rows, "series": s}),
        checks,
    ))
}

/// Seed of the second Monte Carlo stream, kept apart from the first.
fn derived_seed(seed: u64, salt: u64) -> u64 {
    seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn monte_carlo(cfg: &VerifyConfig) -> Outcome {
    let p = params(cfg.beta)?;
    let k_exact = kappa(&p, MC_KAPPA_H)?;
    let k_mc = mc_kappa(&p, MC_KAPPA_H, MC_KAPPA_SAMPLES, MC_CAP, cfg.seed)?;
    let r_exact = r_beta(&p)?;
    let r_mc = mc_r_beta(&p, MC_R_SAMPLES, MC_CAP, derived_seed(cfg.seed, 1))?;
    let checks = vec![
        Check::named("c5.kappa_z", "sampling", "mc_kappa").below(k_mc.z_score(k_exact), 4.0),
        Check::named("c5.kappa_cap_bias", "sampling", "mc_kappa").below(k_mc.cap_bias_bound / k_mc.std_error, 1e-3),
        Check::named("c5.r_beta_z", "sampling", "mc_r_beta").below(r_mc.z_score(r_exact), 4.0),
        Check::named("c5.r_beta_cap_bias", "sampling", "mc_r_beta").below(r_mc.cap_bias_bound / r_mc.std_error, 1e-3),
    ];
    Ok((
        json!({
            "h": MC_KAPPA_H,
            "kappa": {"closed_form": k_exact, "estimate": k_mc},
            "r_beta": {"closed_form": r_exact, "estimate": r_mc},
        }),
        checks,
    ))
}

pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let step = (hi / lo).ln() / (points - 1) as f64;
    (0..points).map(|i| lo * (step * i as f64).exp()).collect()
}

fn legendre(_: &VerifyConfig) -> Outcome {
    const FD_STEP: f64 = 1e-5;
    let grid = log_grid(0.05, 20.0, 41);
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for beta in [1.5, 2.0, 3.0] {
        let p = params(beta)?;
        let mut residual: f64 = 0.0;
        let mut fd_gap: f64 = 0.0;
        for &q in &grid {
            let pt = psi_tilde(&p, q)?;
            residual = residual.max(half_tilt_residual(&p, &pt)?.abs());
            let fd = (psi_tilde(&p, q + FD_STEP)?.psi - psi_tilde(&p, q - FD_STEP)?.psi) / (2.0 * FD_STEP);
            fd_gap = fd_gap.max((fd - pt.psi_prime).abs());
        }
        rows.push(json!({"beta": beta, "max_residual": residual, "max_fd_gap": fd_gap}));
        checks.push(
            Check::named(format!("c6.legendre_residual.beta={beta}"), "continuum", "psi_tilde").below(residual, 1e-10),
        );
        checks.push(Check::named(format!("c6.psi_prime_fd.beta={beta}"), "continuum", "psi_tilde").below(fd_gap, 1e-6));
    }
    Ok((json!({"q_grid": grid, "rows": rows}), checks))
}

/// Largest factor by which `values` strays from its first entry.
fn drift_factor(values: &[f64]) -> f64 {
    values
        .iter()
        .map(|v| (v / values[0]).max(values[0] / v))
        .fold(1.0, f64::max)
}

fn gaps(cfg: &VerifyConfig) -> Outcome {
    let p = params(cfg.beta)?;
    let mut data = Vec::new();
    let mut checks = Vec::new();
    for order in [0u8, 1] {
        let rows = em_gap_scan(&p, &GAP_N, 0.3, order)?;
        let scaled: Vec<f64> = rows.iter().map(|r| r.scaled).collect();
        checks.push(
            Check::named(format!("c7.g_n_gap.order={order}"), "finite_n", "em_gap_scan").within(
                drift_factor(&scaled),
                1.0,
                1.5,
            ),
        );
        data.push(json!({"kind": "g_n", "order": order, "k": 0.3, "rows": rows}));
    }
    for q in [0.3, 1.0, 3.0] {
        let rows = tilt_gap_scan(&p, &GAP_N, q)?;
        let scaled: Vec<f64> = rows.iter().map(|r| r.scaled).collect();
        checks.push(
            Check::named(format!("c7.h_n_gap.q={q}"), "finite_n", "tilt_gap_scan").within(
                drift_factor(&scaled),
                1.0,
                1.5,
            ),
        );
        data.push(json!({"kind": "h_n_q", "q": q, "rows": rows}));
    }
    Ok((Value::Array(data), checks))
}

fn local_limit(cfg: &VerifyConfig) -> Outcome {
    let pts = llt_scan(&params(cfg.beta)?, 1.0, &LLT_N, &budget(cfg))?;
    let dist: Vec<f64> = pts.iter().map(|p| (p.ratio - 1.0).abs()).collect();
    // largest increase of |ratio - 1| between consecutive n; negative means strictly shrinking
    let worst_step = dist.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let tail = pts.iter().map(|p| p.tail_bound / p.retained_mass).fold(0.0, f64::max);
    let last = pts.last().expect("nonempty n list");
    let checks = vec![
        Check::named("c8.trend_toward_one", "exact", "llt_scan").holds(
            "|ratio - 1| strictly decreasing in n",
            worst_step,
            worst_step < 0.0,
        ),
        Check::named(format!("c8.ratio_at_n={}", last.n), "exact", "llt_ratio").below((last.ratio - 1.0).abs(), 0.15),
        Check::named("c8.height_cap_tail", "exact", "excursion_table").below(tail, 1e-14),
    ];
    Ok((json!({"q": 1.0, "rows": pts}), checks))
}

fn fit(cfg: &VerifyConfig) -> Outcome {
    let p = params(cfg.beta)?;
    let f = asymptotics_fit(&p, 300, 1000, &budget(cfg))?;
    let k = k_constants(&p)?;
    let log_k = k.k_beta.ln();
    let checks = vec![
        Check::named("c9.sqrt_coefficient", "exact", "asymptotics_fit")
            .below((f.sqrt_coeff / k.g_tilde_max - 1.0).abs(), 0.01),
        Check::named("c9.log_slope", "exact", "asymptotics_fit").within(f.log_slope, -0.90, -0.60),
        Check::named("c9.intercept_vs_log_k", "exact", "asymptotics_fit").within(f.intercept / log_k, 1.0 / 1.5, 1.5),
    ];
    Ok((
        json!({"fit": f, "g_tilde_max": k.g_tilde_max, "log_k_beta": log_k}),
        checks,
    ))
}

fn routes(_: &VerifyConfig) -> Outcome {
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for beta in [1.4, 1.5, 2.0, 2.5, 3.0] {
        let k = k_constants(&params(beta)?)?;
        checks.push(
            Check::named(format!("c10.route_gap.beta={beta}"), "continuum", "k_constants").below(k.route_gap(), 1e-9),
        );
        rows.push(json!({"beta": beta, "k_beta": k.k_beta, "k_beta_renewal": k.k_beta_renewal, "gap": k.route_gap()}));
    }
    Ok((Value::Array(rows), checks))
}

pub const BEAD_LENGTH: usize = 400;
pub const BEAD_SAMPLES: usize = 10_000;

fn largest_bead(cfg: &VerifyConfig) -> Outcome {
    let p = params(cfg.beta)?;
    let batch = sample_polymer(&p, BEAD_LENGTH, BEAD_SAMPLES, derived_seed(cfg.seed, 2), &budget(cfg))?;
    let ks: Vec<usize> = (0..=40).step_by(5).collect();
    let survey = bead_survey(&batch, &ks)?;
    let at_40 = *survey.empirical_prob.last().expect("k grid ends at 40");
    let checks = vec![
        Check::named("c11.monotone_in_k", "beads", "bead_survey").holds(
            "nondecreasing in k",
            at_40,
            survey.is_monotone(),
        ),
        Check::named("c11.probability_at_k=40", "beads", "bead_survey").within(at_40, 0.9, 1.0),
    ];
    Ok((serde_json::to_value(&survey).expect("survey serializes"), checks))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spans_the_interval() {
        let g = log_grid(0.05, 20.0, 41);
        assert_eq!(g.len(), 41);
        assert!((g[0] - 0.05).abs() < 1e-15 && (g[40] - 20.0).abs() < 1e-12);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn drift_is_symmetric() {
        assert_eq!(drift_factor(&[2.0, 3.0, 1.0]), 2.0);
        assert_eq!(drift_factor(&[4.0]), 1.0);
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derived_seed(1, 1), derived_seed(1, 2));
        assert_eq!(derived_seed(7, 0), 7);
    }
}
