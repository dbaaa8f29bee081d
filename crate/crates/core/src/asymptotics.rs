//! Finite-blocklength behaviour of the smooth entropies of i.i.d. sources.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::shannon;
use crate::error::{domain, Result};
use crate::probability::{Caps, JointPmf, Pmf};
use crate::smoothing::{smooth_h0, smooth_hneginf};

/// `2^{-n δ² / (2 log²(|X|+3))}`.
pub fn hr_tail_bound(n: u64, delta: f64, alphabet_size: usize) -> Result<f64> {
    if n == 0 {
        return Err(domain("n must be at least 1"));
    }
    if !(delta >= 0.0) {
        return Err(domain(format!("delta {delta} must be nonnegative")));
    }
    let l = ((alphabet_size + 3) as f64).log2();
    Ok((-(n as f64) * delta * delta / (2.0 * l * l)).exp2())
}

/// `√(−2 log(ε₀/2) log²(|X|+3) / (log²|X| ε₀²))`.
pub fn n0(eps0: f64, alphabet_size: usize) -> Result<f64> {
    if !(eps0 > 0.0 && eps0 < 1.0) {
        return Err(domain(format!("eps0 {eps0} must lie in (0, 1)")));
    }
    if alphabet_size < 2 {
        return Err(domain("alphabet size must be at least 2"));
    }
    let l3 = ((alphabet_size + 3) as f64).log2();
    let lx = (alphabet_size as f64).log2();
    Ok((-2.0 * (eps0 / 2.0).log2() * l3 * l3 / (lx * lx * eps0 * eps0)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    /// `H_-∞^ε(X^n) / n`.
    pub value_per_n: f64,
    /// `H_0^ε(X^n) / n`.
    pub companion: f64,
    /// `H(X)`.
    pub target: f64,
}

pub const CONVERGENCE_CSV_HEADER: &str = "n,value,companion,target";

impl ConvergenceRow {
    pub fn to_csv_row(&self) -> String {
        format!("{},{},{},{}", self.n, self.value_per_n, self.companion, self.target)
    }
}

/// One row per `n` in `1..=n_max`, from the exact smoothers on `P^{⊗n}`.
pub fn convergence_scan(p: &Pmf, eps: f64, n_max: usize, caps: &Caps) -> Result<Vec<ConvergenceRow>> {
    if n_max == 0 {
        return Err(domain("n_max must be at least 1"));
    }
    let target = shannon(p);
    (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let pn = p.iid_extension(n, caps)?;
            Ok(ConvergenceRow {
                n,
                value_per_n: smooth_hneginf(&pn, eps)?.value_bits / n as f64,
                companion: smooth_h0(&pn, eps)?.value_bits / n as f64,
                target,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma4Check {
    pub n: usize,
    pub eps_typ: f64,
    /// `Pr[X^n ∈ T]` for `T = {x^n : |-(1/n) log P(x^n) - H| ≤ ε}`.
    pub typical_mass: f64,
    /// `H + ε`.
    pub bound: f64,
    /// `H_-∞(Z) / n`, with `Z` equal to `X^n` on `T` and uniform on `T`
    /// otherwise.
    pub z_value_per_n: f64,
    /// `H_-∞^ε(X^n) / n` from the exact smoother.
    pub smooth_value_per_n: f64,
    /// `smooth ≤ Z ≤ H + ε` within 1e-9.
    pub holds: bool,
}

/// Outcome of the constructive bound at one blocklength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Lemma4Outcome {
    /// The typical set still misses more than ε of the mass.
    NotYetMet { n: usize, typical_mass: f64 },
    Checked(Lemma4Check),
}

/// Builds `Z` and checks `H_-∞^ε(X^n)/n ≤ H_-∞(Z)/n ≤ H(X) + ε` once the
/// typical set holds at least `1 - ε` of the mass.
pub fn lemma4_z_bound(p: &Pmf, n: usize, eps_typ: f64, caps: &Caps) -> Result<Lemma4Outcome> {
    if !(eps_typ > 0.0 && eps_typ < 1.0) {
        return Err(domain(format!("eps {eps_typ} must lie in (0, 1)")));
    }
    let h = shannon(p);
    let pn = p.iid_extension(n, caps)?;
    let nf = n as f64;
    let typical: Vec<f64> = pn.masses().filter(|&m| (-m.log2() / nf - h).abs() <= eps_typ).collect();
    let typical_mass = typical.iter().sum::<f64>() + 0.0;
    if 1.0 - typical_mass > eps_typ + 1e-12 || typical.is_empty() {
        return Ok(Lemma4Outcome::NotYetMet { n, typical_mass });
    }
    let spread = (1.0 - typical_mass).max(0.0) / typical.len() as f64;
    let z_min = typical.iter().fold(f64::INFINITY, |a, &m| a.min(m + spread));
    let z_value_per_n = -z_min.log2() / nf;
    let smooth_value_per_n = smooth_hneginf(&pn, eps_typ)?.value_bits / nf;
    let bound = h + eps_typ;
    let holds = smooth_value_per_n <= z_value_per_n + 1e-9 && z_value_per_n <= bound + 1e-9;
    Ok(Lemma4Outcome::Checked(Lemma4Check {
        n,
        eps_typ,
        typical_mass,
        bound,
        z_value_per_n,
        smooth_value_per_n,
        holds,
    }))
}

/// `(H(X|Y), H(Y|X), H(XY))` in the Shannon sense.
pub fn sw_asymptotic_targets(joint: &JointPmf) -> Result<(f64, f64, f64)> {
    if joint.arity() != 2 {
        return Err(domain("expected a two-axis joint"));
    }
    let hxy = shannon(joint);
    let hx = shannon(&joint.marginalize_axes(&[0]));
    let hy = shannon(&joint.marginalize_axes(&[1]));
    Ok((hxy - hy, hxy - hx, hxy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probability::{Alphabet, Axis};

    #[test]
    fn hr_values() {
        assert_eq!(hr_tail_bound(10, 0.0, 2).unwrap(), 1.0);
        // 2^{-1/(2·log²5)}, log²5 = 5.3913…, evaluated independently.
        assert!((hr_tail_bound(100, 0.1, 2).unwrap() - 0.937739).abs() < 1e-6);
        let mut last = 1.0;
        for n in [1, 10, 100, 1000, 10_000] {
            let v = hr_tail_bound(n, 0.5, 4).unwrap();
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn n0_values() {
        assert!((n0(0.1, 2).unwrap() - 68.266).abs() < 1e-3);
        assert!(n0(0.1, 1).is_err());
        let grid = [0.01, 0.05, 0.1, 0.3, 0.9];
        assert!(grid.windows(2).all(|w| n0(w[0], 2).unwrap() > n0(w[1], 2).unwrap()));
    }

    #[test]
    fn uniform_scan() {
        // Exactly 1 while a single atom outweighs ε; beyond that the ball can
        // drop ⌊εK⌋ atoms and spread their mass over the rest.
        let rows = convergence_scan(&Pmf::uniform(2), 0.1, 8, &Caps::default()).unwrap();
        for r in &rows {
            let k = (1u64 << r.n) as f64;
            let kept = k - (0.1 * k).floor();
            assert!((r.value_per_n - kept.log2() / r.n as f64).abs() < 1e-12, "{r:?}");
        }
        assert!(rows[..3].iter().all(|r| r.value_per_n == 1.0));
    }

    #[test]
    fn bernoulli_single_letter() {
        let rows = convergence_scan(&Pmf::bernoulli(0.3).unwrap(), 0.0, 1, &Caps::default()).unwrap();
        assert!((rows[0].value_per_n - 1.73697).abs() < 1e-5);
    }

    #[test]
    fn lemma4_degenerate_and_uniform() {
        for n in 1..6 {
            match lemma4_z_bound(&Pmf::uniform(2), n, 0.1, &Caps::default()).unwrap() {
                Lemma4Outcome::Checked(c) => {
                    assert!(c.holds);
                    assert!((c.bound - 1.1).abs() < 1e-12);
                }
                other => panic!("{other:?}"),
            }
        }
        match lemma4_z_bound(&Pmf::point(3, 0), 4, 0.2, &Caps::default()).unwrap() {
            Lemma4Outcome::Checked(c) => {
                assert_eq!(c.typical_mass, 1.0);
                assert!((c.bound - 0.2).abs() < 1e-12 && c.holds);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn targets() {
        let j = JointPmf::from_dense(
            vec![Axis::new("X", Alphabet::range(2)), Axis::new("Y", Alphabet::range(2))],
            &[0.45, 0.05, 0.05, 0.45],
        )
        .unwrap();
        let (a, b, c) = sw_asymptotic_targets(&j).unwrap();
        assert!((a - 0.4690).abs() < 1e-4 && (b - 0.4690).abs() < 1e-4 && (c - 1.4690).abs() < 1e-4);
    }
}
