//! Two-universal hashing by uniformly random GF(2) matrices.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, resource, Result};
use crate::rng::stream;

/// Longest supported code, in bits.
pub const MAX_OUTPUT_BITS: u32 = 64;

/// Exact collision enumeration is limited to `ℓ·b` at most this.
pub const EXACT_SEED_BITS: u32 = 24;

/// Upper limit on `(distinct differences) × (seeds)` for exact enumeration.
const EXACT_WORK_LIMIT: u64 = 1 << 30;

/// An `ℓ × b` bit matrix; row `i` produces code bit `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashSeed {
    rows: Vec<u64>,
    input_bits: u32,
}

/// `b = max(1, ⌈log₂ domain_size⌉)`.
pub fn input_bits_for(domain_size: usize) -> u32 {
    let b = usize::BITS - domain_size.saturating_sub(1).leading_zeros();
    b.max(1)
}

fn row_mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

fn check_output_bits(output_bits: u32) -> Result<()> {
    if output_bits > MAX_OUTPUT_BITS {
        return Err(resource(format!("hash output of {output_bits} bits exceeds {MAX_OUTPUT_BITS}")));
    }
    Ok(())
}

/// Draws every matrix entry independently and uniformly.
pub fn draw_seed<R: Rng + ?Sized>(domain_size: usize, output_bits: u32, rng: &mut R) -> Result<HashSeed> {
    if domain_size == 0 {
        return Err(domain("hash domain must contain at least one symbol"));
    }
    check_output_bits(output_bits)?;
    let input_bits = input_bits_for(domain_size);
    let mask = row_mask(input_bits);
    let rows = (0..output_bits).map(|_| rng.random::<u64>() & mask).collect();
    Ok(HashSeed { rows, input_bits })
}

impl HashSeed {
    pub fn from_rows(rows: Vec<u64>, input_bits: u32) -> Result<Self> {
        if input_bits == 0 || input_bits > 64 {
            return Err(domain(format!("input_bits {input_bits} must lie in 1..=64")));
        }
        check_output_bits(rows.len() as u32)?;
        if rows.iter().any(|&r| r & !row_mask(input_bits) != 0) {
            return Err(domain("matrix row has bits beyond input_bits"));
        }
        Ok(HashSeed { rows, input_bits })
    }

    pub fn zero(input_bits: u32, output_bits: u32) -> Result<Self> {
        Self::from_rows(vec![0; output_bits as usize], input_bits)
    }

    /// `ℓ = b` identity: the code is the index itself.
    pub fn identity(bits: u32) -> Result<Self> {
        Self::from_rows((0..bits).map(|i| 1u64 << i).collect(), bits)
    }

    pub fn input_bits(&self) -> u32 {
        self.input_bits
    }

    pub fn output_bits(&self) -> u32 {
        self.rows.len() as u32
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    /// `M·x` over GF(2); bit `i` of the result is row `i` dotted with `x`.
    pub fn eval(&self, index: u64) -> Result<u64> {
        if index & !row_mask(self.input_bits) != 0 {
            return Err(domain(format!("index {index} needs more than {} bits", self.input_bits)));
        }
        Ok(self.eval_unchecked(index))
    }

    pub(crate) fn eval_unchecked(&self, index: u64) -> u64 {
        self.rows
            .iter()
            .enumerate()
            .fold(0, |code, (i, &row)| code | (((row & index).count_ones() as u64) & 1) << i)
    }

    /// Row-major bit string (most significant input bit first in each row),
    /// zero-padded to whole bytes, as lowercase hex.
    pub fn to_hex(&self) -> String {
        let mut bytes = Vec::new();
        let mut acc = 0u8;
        let mut filled = 0;
        for &row in &self.rows {
            for j in (0..self.input_bits).rev() {
                acc = acc << 1 | (row >> j & 1) as u8;
                filled += 1;
                if filled == 8 {
                    bytes.push(acc);
                    acc = 0;
                    filled = 0;
                }
            }
        }
        if filled > 0 {
            bytes.push(acc << (8 - filled));
        }
        hex::encode(bytes)
    }

    pub fn from_hex(matrix: &str, input_bits: u32, output_bits: u32) -> Result<Self> {
        let bytes = hex::decode(matrix).map_err(|e| domain(format!("matrix: {e}")))?;
        let needed = (input_bits as usize * output_bits as usize).div_ceil(8);
        if bytes.len() != needed {
            return Err(domain(format!("matrix: expected {needed} bytes, got {}", bytes.len())));
        }
        let mut rows = vec![0u64; output_bits as usize];
        let mut pos = 0usize;
        for row in rows.iter_mut() {
            for _ in 0..input_bits {
                let bit = bytes[pos / 8] >> (7 - pos % 8) & 1;
                *row = *row << 1 | bit as u64;
                pos += 1;
            }
        }
        Self::from_rows(rows, input_bits)
    }

    pub fn to_file(&self) -> HashSeedFile {
        HashSeedFile { output_bits: self.output_bits(), input_bits: self.input_bits, matrix: self.to_hex() }
    }
}

/// Serialized seed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HashSeedFile {
    pub output_bits: u32,
    pub input_bits: u32,
    pub matrix: String,
}

impl HashSeedFile {
    pub fn to_seed(&self) -> Result<HashSeed> {
        HashSeed::from_hex(&self.matrix, self.input_bits, self.output_bits)
    }
}

pub fn hash_eval(seed: &HashSeed, index: u64) -> Result<u64> {
    seed.eval(index)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollisionMode {
    /// Enumerate every seed.
    Exact,
    /// Each trial draws a seed and a uniformly random distinct pair.
    MonteCarlo { trials: u64, master_seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionStats {
    pub mode: String,
    pub domain_size: usize,
    pub input_bits: u32,
    pub output_bits: u32,
    /// `2^-ℓ`.
    pub ideal: f64,
    /// Exact: largest per-pair collision probability. Monte Carlo: the
    /// estimate over random pairs.
    pub max_pair_probability: f64,
    /// Exact: smallest per-pair collision probability.
    pub min_pair_probability: f64,
    /// Exact: seeds enumerated. Monte Carlo: trials.
    pub trials: u64,
    /// Exact: colliding seeds for the worst pair. Monte Carlo: collisions.
    pub collisions: u64,
    /// Binomial standard error at the ideal probability (0 in exact mode).
    pub stderr: f64,
}

/// Per-pair collision probability of the family on `domain_size` symbols.
pub fn collision_probability(domain_size: usize, output_bits: u32, mode: CollisionMode) -> Result<CollisionStats> {
    if domain_size == 0 {
        return Err(domain("hash domain must contain at least one symbol"));
    }
    check_output_bits(output_bits)?;
    let b = input_bits_for(domain_size);
    let ideal = 0.5f64.powi(output_bits as i32);
    let mut stats = CollisionStats {
        mode: String::new(),
        domain_size,
        input_bits: b,
        output_bits,
        ideal,
        max_pair_probability: 0.0,
        min_pair_probability: 0.0,
        trials: 0,
        collisions: 0,
        stderr: 0.0,
    };
    match mode {
        CollisionMode::Exact => {
            stats.mode = "exact_enumeration".into();
            let seed_bits = output_bits * b;
            if seed_bits > EXACT_SEED_BITS {
                return Err(resource(format!(
                    "exact enumeration needs output_bits * input_bits <= {EXACT_SEED_BITS}, got {seed_bits}"
                )));
            }
            // A pair collides exactly when M·(x ⊕ x') = 0, so only the
            // differences that occur in the domain matter.
            let n = domain_size as u64;
            let diffs: Vec<u64> = (1..1u64 << b).filter(|&d| (0..n).any(|x| (x ^ d) < n)).collect();
            let seeds = 1u64 << seed_bits;
            stats.trials = seeds;
            if diffs.is_empty() {
                return Ok(stats);
            }
            if diffs.len() as u64 * seeds > EXACT_WORK_LIMIT {
                return Err(resource(format!("exact enumeration of {seeds} seeds over {} differences", diffs.len())));
            }
            let counts: Vec<u64> = diffs
                .par_iter()
                .map(|&d| {
                    (0..seeds)
                        .filter(|&s| {
                            let rows: Vec<u64> =
                                (0..output_bits).map(|i| s >> (i * b) & row_mask(b)).collect();
                            HashSeed { rows, input_bits: b }.eval_unchecked(d) == 0
                        })
                        .count() as u64
                })
                .collect();
            let max = *counts.iter().max().unwrap();
            let min = *counts.iter().min().unwrap();
            stats.collisions = max;
            stats.max_pair_probability = max as f64 / seeds as f64;
            stats.min_pair_probability = min as f64 / seeds as f64;
        }
        CollisionMode::MonteCarlo { trials, master_seed } => {
            stats.mode = "monte_carlo".into();
            if trials == 0 {
                return Err(domain("trials must be at least 1"));
            }
            stats.trials = trials;
            if domain_size < 2 {
                return Ok(stats);
            }
            let hits: Vec<bool> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = stream(master_seed, t);
                    let seed = draw_seed(domain_size, output_bits, &mut rng).expect("validated above");
                    let x = rng.random_range(0..domain_size as u64);
                    let mut y = rng.random_range(0..domain_size as u64 - 1);
                    if y >= x {
                        y += 1;
                    }
                    seed.eval_unchecked(x) == seed.eval_unchecked(y)
                })
                .collect();
            stats.collisions = hits.iter().filter(|&&h| h).count() as u64;
            let p = stats.collisions as f64 / trials as f64;
            stats.max_pair_probability = p;
            stats.min_pair_probability = p;
            stats.stderr = (ideal * (1.0 - ideal) / trials as f64).sqrt();
        }
    }
    Ok(stats)
}
