//! Exhaustive enumeration and exact integer polynomials of the partition function.

use std::collections::BTreeMap;

use num_bigint::BigUint;

use super::trajectory::touching;
use crate::error::{Error, Result};

/// Largest length accepted by [`enumerate_all`].
pub const ENUMERATE_MAX: usize = 14;
/// Largest length accepted by [`exact_polynomial`].
pub const POLYNOMIAL_MAX: usize = 30;

/// Number of configurations of length `l` with each energy `m`, i.e. the
/// coefficients of `Z_L = sum_m count(m) e^{beta m}`.
pub fn enumerate_all(l: usize) -> Result<BTreeMap<u64, u64>> {
    if l > ENUMERATE_MAX {
        return Err(Error::Size {
            op: "enumerate_all",
            size: l,
            limit: ENUMERATE_MAX,
        });
    }
    let mut counts = BTreeMap::new();
    if l > 0 {
        walk(l as i64, None, 0, &mut counts);
    }
    Ok(counts)
}

fn walk(remaining: i64, last: Option<i64>, energy: u64, counts: &mut BTreeMap<u64, u64>) {
    if remaining == 0 {
        *counts.entry(energy).or_insert(0) += 1;
        return;
    }
    let reach = remaining - 1;
    for s in -reach..=reach {
        let gain = last.map_or(0, |p| touching(p, s));
        walk(remaining - 1 - s.abs(), Some(s), energy + gain, counts);
    }
}

/// Polynomial in `e^beta` with arbitrary-size coefficients.
type Poly = Vec<BigUint>;

fn add_shifted(dst: &mut Poly, src: &Poly, shift: usize) {
    if dst.len() < src.len() + shift {
        dst.resize(src.len() + shift, BigUint::ZERO);
    }
    for (i, c) in src.iter().enumerate() {
        dst[i + shift] += c;
    }
}

/// Exact coefficients of `Z_L` in powers of `e^beta`, by a transfer recursion
/// over (length, last signed stretch).
pub fn exact_polynomial(l: usize) -> Result<BTreeMap<u64, BigUint>> {
    if l > POLYNOMIAL_MAX {
        return Err(Error::Size {
            op: "exact_polynomial",
            size: l,
            limit: POLYNOMIAL_MAX,
        });
    }
    if l == 0 {
        return Ok(BTreeMap::new());
    }
    let span = l as i64;
    let idx = |s: i64| (s + span) as usize;
    // table[len][s + span]: configurations of length len ending with stretch s
    let mut table: Vec<Vec<Poly>> = vec![vec![Poly::new(); 2 * l + 1]; l + 1];
    for len in 1..=l {
        let reach = len as i64 - 1;
        for s in -reach..=reach {
            let prev = len - 1 - s.unsigned_abs() as usize;
            let mut acc = Poly::new();
            if prev == 0 {
                add_shifted(&mut acc, &vec![BigUint::from(1u32)], 0);
            } else {
                let prev_reach = prev as i64 - 1;
                for p in -prev_reach..=prev_reach {
                    let src = &table[prev][idx(p)];
                    if !src.is_empty() {
                        add_shifted(&mut acc, src, touching(p, s) as usize);
                    }
                }
            }
            table[len][idx(s)] = acc;
        }
    }
    let mut out = BTreeMap::new();
    for poly in &table[l] {
        for (m, c) in poly.iter().enumerate() {
            if *c != BigUint::ZERO {
                *out.entry(m as u64).or_insert_with(|| BigUint::ZERO) += c;
            }
        }
    }
    Ok(out)
}

/// `sum_m count(m) e^{beta m}` in log space.
pub fn evaluate_counts(counts: &BTreeMap<u64, u64>, beta: f64) -> f64 {
    let terms: Vec<f64> = counts
        .iter()
        .map(|(&m, &c)| (c as f64).ln() + beta * m as f64)
        .collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}
