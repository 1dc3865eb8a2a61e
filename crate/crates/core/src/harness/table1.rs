//! Drivers needed until every block value has been seen once.
//!
//! Each responding driver contributes one i.i.d. uniform block value from
//! `[0, 2^l)`; the attack in strict mode needs all `2^l` of them. The
//! expected count is the coupon-collector value `2^l * H_{2^l}`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::seed::{child_rng, Stream};

/// Published expected driver counts for `l = 1..=4`.
pub const PUBLISHED_COUNTS: [(u32, u64); 4] = [(1, 3), (2, 9), (3, 22), (4, 55)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub l: u32,
    pub trials: usize,
    pub seed: u64,
    pub mean: f64,
    pub std_err: f64,
    pub min: u64,
    pub max: u64,
    pub analytic: f64,
    pub ceiling: u64,
    pub published: Option<u64>,
}

/// `2^l * H_{2^l}`
pub fn analytic_expectation(l: u32) -> f64 {
    let n = 1u64 << l;
    let harmonic: f64 = (1..=n).rev().map(|k| 1.0 / k as f64).sum();
    n as f64 * harmonic
}

/// Draw uniform `l`-bit values until all `2^l` have appeared.
pub fn draws_to_full_coverage<R: Rng + ?Sized>(l: u32, rng: &mut R) -> u64 {
    assert!((1..=6).contains(&l), "block width {l} outside 1..=6");
    let radix = 1u32 << l;
    let full = if radix == 64 { u64::MAX } else { (1u64 << radix) - 1 };
    let mut seen = 0u64;
    let mut draws = 0;
    while seen != full {
        seen |= 1 << rng.gen_range(0..radix);
        draws += 1;
    }
    draws
}

pub fn run_table1(l: u32, trials: usize, seed: u64, parallel: bool) -> Table1Row {
    let trial = |t: usize| {
        let mut rng = child_rng(seed ^ (u64::from(l) << 56), Stream::Table1, t as u64);
        draws_to_full_coverage(l, &mut rng)
    };
    let counts: Vec<u64> = if parallel {
        (0..trials).into_par_iter().map(trial).collect()
    } else {
        (0..trials).map(trial).collect()
    };

    // integer accumulation keeps the aggregate independent of evaluation order
    let sum: u128 = counts.iter().map(|&c| u128::from(c)).sum();
    let sum_sq: u128 = counts.iter().map(|&c| u128::from(c) * u128::from(c)).sum();
    let n = trials as f64;
    let mean = sum as f64 / n;
    let var = if trials > 1 {
        (sum_sq as f64 - sum as f64 * mean) / (n - 1.0)
    } else {
        0.0
    };
    let analytic = analytic_expectation(l);
    Table1Row {
        l,
        trials,
        seed,
        mean,
        std_err: (var.max(0.0) / n).sqrt(),
        min: counts.iter().copied().min().unwrap_or(0),
        max: counts.iter().copied().max().unwrap_or(0),
        analytic,
        ceiling: analytic.ceil() as u64,
        published: PUBLISHED_COUNTS.iter().find(|(w, _)| *w == l).map(|&(_, v)| v),
    }
}
