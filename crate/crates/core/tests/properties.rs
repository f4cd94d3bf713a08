use ipdsaw_core::beads::{decompose, i_max};
use ipdsaw_core::exact::{stretch_dp, LogWeight, TableBudget, Trajectory, Variant};
use ipdsaw_core::finite_n::g_n;
use ipdsaw_core::laplace::{beta_c, cgf, TiltParam};
use ipdsaw_core::sampling::SampleBatch;
use ipdsaw_core::ModelParams;
use proptest::prelude::*;

fn log_weight() -> impl Strategy<Value = LogWeight> {
    prop_oneof![
        1 => Just(LogWeight::ZERO),
        9 => (-700.0f64..700.0).prop_map(LogWeight::from_log),
    ]
}

fn trajectory() -> impl Strategy<Value = Trajectory> {
    prop::collection::vec(-6i64..=6, 0..24).prop_map(Trajectory::new)
}

fn nonempty_trajectory() -> impl Strategy<Value = Trajectory> {
    prop::collection::vec(-6i64..=6, 1..24).prop_map(Trajectory::new)
}

/// Relative resolution of a value stored by its logarithm: a few ulps of `ln`.
fn ulps(w: LogWeight) -> f64 {
    8.0 * f64::EPSILON * (1.0 + w.ln().abs())
}

fn collapsed_beta() -> impl Strategy<Value = f64> {
    (beta_c() + 0.05)..4.0
}

proptest! {
    #[test]
    fn log_addition_is_commutative_and_associative(a in log_weight(), b in log_weight(), c in log_weight()) {
        prop_assert_eq!(a + b, b + a);
        let left = (a + b) + c;
        let right = a + (b + c);
        prop_assert!(left.rel_diff(right) < ulps(left));
        prop_assert_eq!(a + LogWeight::ZERO, a);
    }

    #[test]
    fn log_product_distributes(a in log_weight(), b in log_weight(), c in log_weight()) {
        let left = a * (b + c);
        let right = a * b + a * c;
        prop_assert!(left.rel_diff(right) < ulps(left));
    }

    #[test]
    fn decompose_round_trips(t in trajectory()) {
        let d = decompose(&t);
        let mut joined = Vec::new();
        for j in 0..d.bead_count() {
            joined.extend_from_slice(d.segment(&t, j));
        }
        let tail = t.stretches.len() - joined.len();
        prop_assert_eq!(tail as u64, d.trailing_zeros);
        joined.extend(std::iter::repeat_n(0, tail));
        prop_assert_eq!(&joined, &t.stretches);
        let beads = *d.cum_lengths.last().unwrap();
        prop_assert_eq!(beads + d.trailing_zeros, t.length());
    }

    #[test]
    fn largest_bead_fits_in_the_walk(t in trajectory()) {
        let m = i_max(&t);
        prop_assert!(m <= t.length());
        let one_run = !t.stretches.is_empty()
            && t.stretches.iter().all(|&l| l != 0)
            && t.stretches.windows(2).all(|w| w[0].signum() == -w[1].signum());
        prop_assert_eq!(m == t.length() && !t.stretches.is_empty(), one_run || t.stretches.len() == 1);
    }

    #[test]
    fn cgf_is_even(beta in collapsed_beta(), frac in -0.95f64..0.95) {
        let p = ModelParams::new(beta).unwrap();
        let h = frac * beta / 2.0;
        let plus = cgf(&p, h, 0).unwrap();
        let minus = cgf(&p, -h, 0).unwrap();
        prop_assert!((plus - minus).abs() <= 1e-13 * (1.0 + plus.abs()));
        let slope = cgf(&p, h, 1).unwrap() + cgf(&p, -h, 1).unwrap();
        prop_assert!(slope.abs() <= 1e-11 * (1.0 + cgf(&p, h, 1).unwrap().abs()));
    }

    #[test]
    fn finite_g_is_even(beta in collapsed_beta(), n in 2usize..200, frac in -0.9f64..0.9) {
        let p = ModelParams::new(beta).unwrap();
        let h = frac * beta / 2.0;
        let plus = g_n(&p, n, h, 0).unwrap();
        let minus = g_n(&p, n, -h, 0).unwrap();
        prop_assert!((plus - minus).abs() <= 1e-12 * (1.0 + plus.abs()));
    }

    #[test]
    fn tilted_inversion_hits_the_support(beta in collapsed_beta(), frac in -0.9f64..0.9, u in 0.0f64..1.0, v in 0.0f64..1.0) {
        let p = ModelParams::new(beta).unwrap();
        let tilt = TiltParam::new(&p, frac * beta / 2.0).unwrap();
        let k = tilt.invert(u, v);
        prop_assert!(tilt.pmf(&p, k) > 0.0);
        // sides are separated by the probability of a nonnegative step
        let nonneg: f64 = (0..2000).map(|j| tilt.pmf(&p, j)).sum();
        prop_assert_eq!(k >= 0, u < nonneg || (u - nonneg).abs() < 1e-12);
    }

    #[test]
    fn sample_text_round_trips(ts in prop::collection::vec(nonempty_trajectory(), 1..8), seed in any::<u64>()) {
        let len = ts[0].length();
        let ts: Vec<Trajectory> = ts.into_iter().filter(|t| t.length() == len).collect();
        let batch = SampleBatch { beta: 2.0, length: len as usize, seed, trajectories: ts };
        let mut buf = Vec::new();
        batch.write_to(&mut buf).unwrap();
        prop_assert_eq!(SampleBatch::read_from(buf.as_slice()).unwrap(), batch);
    }
}

#[test]
fn partition_functions_increase_with_length() {
    let budget = TableBudget::default();
    for beta in [0.5, beta_c(), 2.0, 3.0] {
        let p = ModelParams::new(beta).unwrap();
        let z = stretch_dp(&p, 300, Variant::Full, &budget).unwrap();
        // Z_0 = Z_1 = 1, strict growth starts after that
        for l in 1..300 {
            assert!(z.get(l + 1).ln() > z.get(l).ln(), "beta {beta} L {l}");
        }
    }
}
