//! Rényi entropies of every order in `[-∞, ∞]`, in bits.
//!
//! Sums for finite orders run over the support only, which keeps negative
//! orders finite. `0 log 0 = 0` throughout.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::probability::JointPmf;

/// Order of a Rényi entropy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyOrder {
    NegInfinity,
    /// Any real order other than 0 and 1; may be negative.
    Finite(f64),
    One,
    Zero,
    Infinity,
}

impl EntropyOrder {
    /// Routes `0`, `1` and `±∞` to their dedicated variants.
    pub fn from_alpha(alpha: f64) -> Self {
        if alpha == f64::NEG_INFINITY {
            EntropyOrder::NegInfinity
        } else if alpha == f64::INFINITY {
            EntropyOrder::Infinity
        } else if alpha == 0.0 {
            EntropyOrder::Zero
        } else if alpha == 1.0 {
            EntropyOrder::One
        } else {
            EntropyOrder::Finite(alpha)
        }
    }

    pub fn alpha(self) -> f64 {
        match self {
            EntropyOrder::NegInfinity => f64::NEG_INFINITY,
            EntropyOrder::Finite(a) => a,
            EntropyOrder::One => 1.0,
            EntropyOrder::Zero => 0.0,
            EntropyOrder::Infinity => f64::INFINITY,
        }
    }
}

impl fmt::Display for EntropyOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntropyOrder::NegInfinity => write!(f, "-inf"),
            EntropyOrder::Infinity => write!(f, "inf"),
            other => write!(f, "{}", other.alpha()),
        }
    }
}

impl FromStr for EntropyOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "+inf" | "max" => Ok(EntropyOrder::Infinity),
            "-inf" | "neg_infinity" | "neginf" | "-infinity" => Ok(EntropyOrder::NegInfinity),
            other => other
                .parse::<f64>()
                .map(EntropyOrder::from_alpha)
                .map_err(|_| domain(format!("order: cannot parse {s:?}"))),
        }
    }
}

pub(crate) fn shannon_of(masses: impl Iterator<Item = f64>) -> f64 {
    let h: f64 = masses.filter(|&m| m > 0.0).map(|m| -m * m.log2()).sum();
    h.max(0.0)
}

pub(crate) fn renyi_of(masses: &[f64], order: EntropyOrder) -> f64 {
    let support = masses.iter().copied().filter(|&m| m > 0.0);
    match order {
        EntropyOrder::Zero => (support.count() as f64).log2(),
        EntropyOrder::One => shannon_of(support),
        EntropyOrder::Infinity => -support.fold(0.0, f64::max).log2(),
        EntropyOrder::NegInfinity => -support.fold(f64::INFINITY, f64::min).log2(),
        EntropyOrder::Finite(alpha) => {
            let s: f64 = support.map(|m| m.powf(alpha)).sum();
            s.log2() / (1.0 - alpha)
        }
    }
}

/// Shannon entropy `-Σ p log2 p`.
pub fn shannon(p: &JointPmf) -> f64 {
    shannon_of(p.masses())
}

/// Unconditional Rényi entropy of the given order.
pub fn renyi(p: &JointPmf, order: EntropyOrder) -> f64 {
    let masses: Vec<f64> = p.masses().collect();
    renyi_of(&masses, order)
}

/// Conditional Rényi entropy `H_α(target | given)`.
///
/// All orders take the worst case over rows `y` of positive mass: order zero
/// is `max_y log |supp P_{X|Y=y}|`, infinity is `-log max_y max_x P_{X|Y=y}`,
/// minus infinity is `-log min_y min_x P_{X|Y=y}(x)` over the support. Finite
/// orders use `1/(1-α) log max_y Σ_x P^α_{X|Y=y}(x)` literally, with the max
/// outside the sum for every α.
///
/// Order one is the α→1 limit of that form, `max_y H(X | Y=y)`. This is *not*
/// the usual average conditional Shannon entropy `H(X|Y)`.
pub fn renyi_conditional(joint: &JointPmf, target: &str, given: &str, order: EntropyOrder) -> Result<f64> {
    if joint.arity() < 2 {
        return Err(domain("conditional entropy needs a joint with at least two axes"));
    }
    let rows = joint.conditional_rows(target, given)?;
    let row_masses = rows.iter().map(|r| r.cells.iter().map(|c| c.2).collect::<Vec<f64>>());
    let value = match order {
        EntropyOrder::Zero | EntropyOrder::One => {
            row_masses.map(|m| renyi_of(&m, order)).fold(f64::NEG_INFINITY, f64::max)
        }
        EntropyOrder::Infinity => {
            let worst = row_masses.map(|m| m.into_iter().fold(0.0, f64::max)).fold(0.0, f64::max);
            -worst.log2()
        }
        EntropyOrder::NegInfinity => {
            let worst = row_masses.map(|m| m.into_iter().fold(1.0, f64::min)).fold(1.0, f64::min);
            -worst.log2()
        }
        EntropyOrder::Finite(alpha) => {
            let best = row_masses
                .map(|m| m.into_iter().map(|q| q.powf(alpha)).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max);
            best.log2() / (1.0 - alpha)
        }
    };
    Ok(value.max(0.0))
}
