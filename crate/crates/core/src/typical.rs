//! One-shot typical sets and their Ξ intervals.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::shannon;
use crate::error::{domain, resource, Error, Result};
use crate::probability::{Caps, JointPmf};
use crate::smoothing::{hinf_level, hneginf_level};

/// Slack, in bits, on the surprisal window. Absorbs summation-order noise
/// between a marginal's masses and the entropies computed from them.
pub const SURPRISAL_SLACK: f64 = 1e-9;

/// Default grid step for [`find_delta`].
pub const DEFAULT_DELTA_STEP: f64 = 0.005;

/// The interval `[Ξ_min, Ξ_max]` for one variable (or tuple of variables).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XiBounds {
    pub xi_min: f64,
    pub xi_max: f64,
    pub delta: f64,
    /// Shannon entropy of the variable.
    pub entropy: f64,
    /// `H_∞^δ`.
    pub hinf: f64,
    /// `H_-∞^δ`.
    pub hneginf: f64,
    /// log₂ of the full (product) alphabet size.
    pub log_alphabet: f64,
}

/// `Ξ_min = H - |H - H_∞^δ| - δ log|A|` and `Ξ_max = H + |H - H_-∞^δ| + δ log|A|`.
///
/// The smoothing radius equals δ. All axes of `p` are treated as a single
/// variable.
pub fn xi_bounds(p: &JointPmf, delta: f64) -> Result<XiBounds> {
    if !(0.0..1.0).contains(&delta) {
        return Err(domain(format!("delta {delta} must lie in [0, 1)")));
    }
    let masses: Vec<f64> = p.masses().collect();
    let entropy = shannon(p);
    let hinf = -hinf_level(&masses, p.total_cells(), delta).log2();
    let hneginf = -hneginf_level(&masses, delta).log2();
    let log_alphabet = p.log_alphabet();
    // Written without the absolute value so that δ = 0 returns H_∞ and H_-∞
    // bit for bit.
    let low = if hinf <= entropy { hinf } else { 2.0 * entropy - hinf };
    let high = if hneginf >= entropy { hneginf } else { 2.0 * entropy - hneginf };
    Ok(XiBounds {
        xi_min: low - delta * log_alphabet,
        xi_max: high + delta * log_alphabet,
        delta,
        entropy,
        hinf,
        hneginf,
        log_alphabet,
    })
}

/// `(ε_0, ε_1, ε_2, ε_3)` with `Σ ε_i ≤ ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonBudget {
    pub total: f64,
    pub parts: [f64; 4],
}

impl EpsilonBudget {
    pub fn new(total: f64, parts: [f64; 4]) -> Result<Self> {
        if !(total > 0.0 && total < 1.0) {
            return Err(domain(format!("eps {total} must lie in (0, 1)")));
        }
        if parts.iter().any(|&e| !(e > 0.0)) {
            return Err(domain(format!("eps-split {parts:?}: every part must be positive")));
        }
        let sum: f64 = parts.iter().sum();
        if sum > total * (1.0 + 1e-12) {
            return Err(domain(format!("eps-split sums to {sum}, more than eps {total}")));
        }
        Ok(EpsilonBudget { total, parts })
    }

    /// Four equal quarters.
    pub fn equal(total: f64) -> Result<Self> {
        Self::new(total, [total / 4.0; 4])
    }
}

/// Ξ bounds of the marginal on a subset of axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetBounds {
    pub axes: Vec<String>,
    #[serde(flatten)]
    pub bounds: XiBounds,
}

#[derive(Debug, Clone)]
pub struct TypicalSet {
    source: JointPmf,
    delta: f64,
    /// Sorted flat indices into `source`.
    members: Vec<usize>,
    /// One entry per nonempty axis subset, in bitmask order (the full set last).
    bounds: Vec<SubsetBounds>,
    tail: f64,
}

struct Window {
    mask: usize,
    axes: Vec<usize>,
    marginal: JointPmf,
    bounds: XiBounds,
}

impl Window {
    fn admits(&self, tuple: &[usize]) -> bool {
        let sub: Vec<usize> = self.axes.iter().map(|&a| tuple[a]).collect();
        let m = self.marginal.mass_of(&sub);
        if m <= 0.0 {
            return false;
        }
        let s = -m.log2();
        s >= self.bounds.xi_min - SURPRISAL_SLACK && s <= self.bounds.xi_max + SURPRISAL_SLACK
    }
}

/// Builds `A_δ` of a joint with one to three axes.
///
/// A tuple is a member when its surprisal under every marginal, including
/// the full joint, falls in that marginal's Ξ window. For two axes this is
/// the joint window plus both single-axis windows; for three it is the joint
/// window plus the three pair sets, which in turn enforce the single-axis
/// windows.
pub fn build_typical_set(p: &JointPmf, delta: f64, caps: &Caps) -> Result<TypicalSet> {
    let arity = p.arity();
    if !(1..=3).contains(&arity) {
        return Err(domain(format!("typical sets need 1 to 3 axes, got {arity}")));
    }
    if p.support_len() > caps.enumeration {
        return Err(resource(format!(
            "typical set would enumerate {} tuples, cap is {}",
            p.support_len(),
            caps.enumeration
        )));
    }
    let windows: Vec<Window> = (1..1usize << arity)
        .map(|mask| {
            let axes: Vec<usize> = (0..arity).filter(|a| mask >> a & 1 == 1).collect();
            let marginal = if axes.len() == arity { p.clone() } else { p.marginalize_axes(&axes) };
            let bounds = xi_bounds(&marginal, delta)?;
            Ok(Window { mask, axes, marginal, bounds })
        })
        .collect::<Result<_>>()?;
    let members: Vec<usize> = p
        .entries()
        .par_iter()
        .filter(|&&(flat, _)| {
            let tuple = p.decode(flat);
            windows.iter().all(|w| w.admits(&tuple))
        })
        .map(|&(flat, _)| flat)
        .collect();
    let inside: f64 = members.iter().map(|&f| p.mass_flat(f)).sum();
    let bounds = windows
        .iter()
        .map(|w| {
            debug_assert!(w.mask > 0);
            SubsetBounds { axes: w.axes.iter().map(|&a| p.axes()[a].name.clone()).collect(), bounds: w.bounds }
        })
        .collect();
    Ok(TypicalSet { source: p.clone(), delta, members, bounds, tail: (1.0 - inside).clamp(0.0, 1.0) })
}

impl TypicalSet {
    pub fn source(&self) -> &JointPmf {
        &self.source
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Member flat indices, ascending.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains_flat(&self, flat: usize) -> bool {
        self.members.binary_search(&flat).is_ok()
    }

    pub fn contains(&self, tuple: &[usize]) -> bool {
        tuple.len() == self.source.arity()
            && tuple.iter().zip(self.source.shape()).all(|(&t, &s)| t < s)
            && self.contains_flat(self.source.encode(tuple))
    }

    pub fn member_tuples(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        self.members.iter().map(|&f| self.source.decode(f))
    }

    pub fn all_bounds(&self) -> &[SubsetBounds] {
        &self.bounds
    }

    /// Bounds of the marginal on exactly these axes (any order).
    pub fn bounds(&self, axes: &[&str]) -> Option<&XiBounds> {
        self.bounds
            .iter()
            .find(|b| b.axes.len() == axes.len() && axes.iter().all(|a| b.axes.iter().any(|x| x == a)))
            .map(|b| &b.bounds)
    }

    /// Bounds of the full joint.
    pub fn joint_bounds(&self) -> &XiBounds {
        &self.bounds.last().expect("at least one axis").bounds
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    /// `{x : (x, y) ∈ A_δ}` for a two-axis set, as first-axis indices.
    pub fn conditional_slice(&self, y: usize) -> Result<Vec<usize>> {
        if self.source.arity() != 2 {
            return Err(domain("conditional slices need a two-axis typical set"));
        }
        if y >= self.source.shape()[1] {
            return Err(domain(format!("symbol index {y} outside the second alphabet")));
        }
        Ok(self.member_tuples().filter(|t| t[1] == y).map(|t| t[0]).collect())
    }

    /// [`conditional_slice`](Self::conditional_slice) by label, returning labels.
    pub fn conditional_slice_label(&self, y: &str) -> Result<Vec<String>> {
        let alphabet = &self.source.axes()[1.min(self.source.arity() - 1)].alphabet;
        let yi = alphabet.index_of(y).ok_or_else(|| domain(format!("unknown symbol {y:?}")))?;
        let first = &self.source.axes()[0].alphabet;
        Ok(self.conditional_slice(yi)?.into_iter().map(|x| first.symbol(x).to_string()).collect())
    }

    pub fn to_export(&self) -> TypicalSetExport {
        TypicalSetExport {
            delta: self.delta,
            tail: self.tail,
            bounds: self.bounds.clone(),
            members: self
                .members
                .iter()
                .map(|&f| self.source.labels(f).into_iter().map(String::from).collect())
                .collect(),
        }
    }
}

/// JSON form of a typical set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TypicalSetExport {
    pub delta: f64,
    pub tail: f64,
    pub bounds: Vec<SubsetBounds>,
    pub members: Vec<Vec<String>>,
}

/// `Pr[source ∉ members]`.
pub fn tail_probability(set: &TypicalSet) -> f64 {
    set.tail()
}

/// Smallest δ on `{0, step, 2·step, …}` below 1 whose typical set leaves at
/// most `eps0` of the mass outside.
pub fn find_delta(p: &JointPmf, eps0: f64, step: f64, caps: &Caps) -> Result<f64> {
    if !(step > 0.0 && step < 1.0) {
        return Err(domain(format!("delta step {step} must lie in (0, 1)")));
    }
    let count = ((1.0 / step) - 1e-9).ceil() as usize;
    let grid: Vec<f64> = (0..count).map(|k| k as f64 * step).filter(|&d| d < 1.0).collect();
    scan_delta(p, eps0, &grid, caps)
}

/// First δ of `grid`, in order, meeting the tail condition. The scan does not
/// assume the tail is monotone in δ.
pub fn scan_delta(p: &JointPmf, eps0: f64, grid: &[f64], caps: &Caps) -> Result<f64> {
    if !(eps0 > 0.0 && eps0 < 1.0) {
        return Err(domain(format!("eps0 {eps0} must lie in (0, 1)")));
    }
    for &delta in grid {
        if build_typical_set(p, delta, caps)?.tail() <= eps0 {
            return Ok(delta);
        }
    }
    Err(Error::Infeasible(format!(
        "no delta among {} grid points keeps the atypical mass within {eps0}",
        grid.len()
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probability::{Alphabet, Axis, Pmf};

    fn two_bits(m: &[f64]) -> JointPmf {
        JointPmf::from_dense(
            vec![Axis::new("X", Alphabet::range(2)), Axis::new("Y", Alphabet::range(2))],
            m,
        )
        .unwrap()
    }

    #[test]
    fn xi_examples() {
        let b = xi_bounds(&Pmf::uniform(4), 0.1).unwrap();
        assert!((b.xi_min - 1.8).abs() < 1e-12 && (b.xi_max - 2.2).abs() < 1e-12);
        let b = xi_bounds(&Pmf::point(1, 0), 0.3).unwrap();
        assert_eq!((b.xi_min, b.xi_max), (0.0, 0.0));
        let b = xi_bounds(&Pmf::uniform(2), 0.0).unwrap();
        assert_eq!((b.xi_min, b.xi_max), (1.0, 1.0));
        assert!(xi_bounds(&Pmf::uniform(2), 1.0).is_err());
    }

    #[test]
    fn xi_at_zero_delta_is_min_and_max_entropy() {
        let p = Pmf::new(Alphabet::range(3), &[0.5, 0.3, 0.2]).unwrap();
        let b = xi_bounds(&p, 0.0).unwrap();
        assert_eq!(b.xi_min, 1.0);
        assert_eq!(b.xi_max, -(0.2f64.log2()));
        assert!(b.xi_min <= b.entropy && b.entropy <= b.xi_max);
    }

    #[test]
    fn uniform_sets_are_full() {
        let caps = Caps::default();
        for delta in [0.0, 0.1, 0.4] {
            let s = build_typical_set(&two_bits(&[0.25; 4]), delta, &caps).unwrap();
            assert_eq!(s.len(), 4);
            assert_eq!(s.tail(), 0.0);
        }
    }

    #[test]
    fn point_product_has_one_member() {
        let p = Pmf::point(3, 2).product(&Pmf::point(2, 0).renamed("Y")).unwrap();
        let s = build_typical_set(&p, 0.2, &Caps::default()).unwrap();
        assert_eq!(s.member_tuples().collect::<Vec<_>>(), vec![vec![2, 0]]);
        assert_eq!(s.tail(), 0.0);
    }

    #[test]
    fn slices() {
        let caps = Caps::default();
        let s = build_typical_set(&two_bits(&[0.5, 0.0, 0.0, 0.5]), 0.0, &caps).unwrap();
        assert_eq!(s.conditional_slice(0).unwrap(), vec![0]);
        let s = build_typical_set(&two_bits(&[0.25; 4]), 0.0, &caps).unwrap();
        assert_eq!(s.conditional_slice(1).unwrap(), vec![0, 1]);
        assert_eq!(s.conditional_slice_label("1").unwrap(), vec!["0", "1"]);
    }

    #[test]
    fn zero_delta_admits_everything() {
        let p = Pmf::bernoulli(0.3).unwrap().iid_extension(3, &Caps::default()).unwrap();
        let s = build_typical_set(&p, 0.0, &Caps::default()).unwrap();
        assert_eq!(s.len(), 8);
        assert_eq!(find_delta(&p, 1e-9, 0.01, &Caps::default()).unwrap(), 0.0);
    }

    #[test]
    fn budget_validation() {
        assert!(EpsilonBudget::equal(0.2).is_ok());
        assert!(EpsilonBudget::new(0.2, [0.1, 0.1, 0.1, 0.1]).is_err());
        assert!(EpsilonBudget::new(0.2, [0.1, 0.1, 0.0, 0.0]).is_err());
        assert!(EpsilonBudget::equal(1.0).is_err());
    }

    #[test]
    fn infeasible_grid() {
        let p = Pmf::new(Alphabet::range(2), &[1.0 - 1e-6, 1e-6]).unwrap();
        let err = scan_delta(&p, 1e-9, &[0.5, 0.9], &Caps::default()).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)));
    }

    #[test]
    fn enumeration_cap() {
        let caps = Caps { enumeration: 3, ..Caps::default() };
        assert!(matches!(build_typical_set(&Pmf::uniform(4), 0.0, &caps), Err(Error::Resource(_))));
    }
}
