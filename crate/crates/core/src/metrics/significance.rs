//! Paired tests over per-document metric values.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignTest {
    pub wins: usize,
    pub losses: usize,
    pub ties: usize,
    /// Two-sided exact binomial p-value over non-tied pairs.
    pub p_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PermutationTest {
    pub mean_difference: f64,
    pub rounds: usize,
    pub p_value: f64,
}

fn check(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(())
}

fn ln_choose(n: usize, k: usize) -> f64 {
    let ln_fact = |m: usize| (1..=m).map(|i| (i as f64).ln()).sum::<f64>();
    ln_fact(n) - ln_fact(k) - ln_fact(n - k)
}

/// Counts pairs where `a` beats `b`.
pub fn paired_sign_test(a: &[f64], b: &[f64]) -> Result<SignTest> {
    check(a, b)?;
    let wins = a.iter().zip(b).filter(|(x, y)| x > y).count();
    let losses = a.iter().zip(b).filter(|(x, y)| x < y).count();
    let ties = a.len() - wins - losses;
    let n = wins + losses;
    let p_value = if n == 0 {
        1.0
    } else {
        let extreme = wins.min(losses);
        let tail: f64 = (0..=extreme)
            .map(|k| (ln_choose(n, k) - n as f64 * 2f64.ln()).exp())
            .sum();
        (2.0 * tail).min(1.0)
    };
    Ok(SignTest {
        wins,
        losses,
        ties,
        p_value,
    })
}

/// Random sign-flip test of the mean paired difference `a - b`.
pub fn paired_permutation_test(a: &[f64], b: &[f64], rounds: usize, seed: u64) -> Result<PermutationTest> {
    check(a, b)?;
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = diffs.len().max(1) as f64;
    let observed = diffs.iter().sum::<f64>() / n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut extreme = 0usize;
    for _ in 0..rounds {
        let s: f64 = diffs
            .iter()
            .map(|d| if rng.random_bool(0.5) { *d } else { -*d })
            .sum::<f64>()
            / n;
        if s.abs() >= observed.abs() - 1e-15 {
            extreme += 1;
        }
    }
    Ok(PermutationTest {
        mean_difference: observed,
        rounds,
        p_value: (extreme + 1) as f64 / (rounds + 1) as f64,
    })
}
