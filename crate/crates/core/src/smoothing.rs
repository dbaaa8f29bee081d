//! ε-smooth entropies of orders 0, ∞ and -∞.
//!
//! The smoothing ball is the total-variation ball of radius ε on the same
//! alphabet: candidate distributions may put mass on zero-mass cells but
//! never on new symbols. Unconditional smoothers are exact. Conditional
//! smoothers are greedy and only bound the optimum from one side; the
//! exhaustive reference lives in [`oracle`].

pub mod oracle;

use serde::{Deserialize, Serialize};

use crate::entropy::renyi_of;
use crate::entropy::EntropyOrder;
use crate::error::{domain, Result};
use crate::probability::{tv_distance, JointPmf};

/// Slack on "cost ≤ ε" comparisons.
pub const COST_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmoothingMethod {
    ExactGreedy,
    GreedyHeuristic,
    ExhaustiveOracle,
}

#[derive(Debug, Clone)]
pub struct SmoothingResult {
    pub value_bits: f64,
    /// Optimizing (or, for heuristics, achieving) distribution.
    pub witness: JointPmf,
    /// Total-variation distance between the input and the witness.
    pub moved_mass: f64,
    pub method: SmoothingMethod,
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if !(0.0..1.0).contains(&eps) {
        return Err(domain(format!("smoothing radius {eps} must lie in [0, 1)")));
    }
    Ok(())
}

fn finish(p: &JointPmf, entries: Vec<(usize, f64)>, value_bits: f64, method: SmoothingMethod) -> Result<SmoothingResult> {
    let witness = p.with_entries(entries)?;
    let moved_mass = tv_distance(p, &witness)?;
    Ok(SmoothingResult { value_bits, witness, moved_mass, method })
}

/// Adds `amount` to the largest atom (lowest index among ties).
fn pour_onto_largest(atoms: &mut [(usize, f64)], amount: f64) {
    if amount <= 0.0 {
        return;
    }
    let mut best = 0;
    for (i, a) in atoms.iter().enumerate() {
        let b = &atoms[best];
        if a.1 > b.1 || (a.1 == b.1 && a.0 < b.0) {
            best = i;
        }
    }
    atoms[best].1 += amount;
}

fn by_mass_desc(atoms: &mut [(usize, f64)]) {
    atoms.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
}

/// `H_0^ε`: drop the smallest atoms while the dropped mass stays within ε.
pub fn smooth_h0(p: &JointPmf, eps: f64) -> Result<SmoothingResult> {
    check_eps(eps)?;
    let mut atoms = p.entries().to_vec();
    // Ascending mass; equal masses leave in alphabet order.
    atoms.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let mut removed = 0.0;
    let mut cut = 0;
    while cut + 1 < atoms.len() && removed + atoms[cut].1 <= eps + COST_TOLERANCE {
        removed += atoms[cut].1;
        cut += 1;
    }
    let mut kept = atoms.split_off(cut);
    pour_onto_largest(&mut kept, removed);
    let value = (kept.len() as f64).log2();
    finish(p, kept, value, SmoothingMethod::ExactGreedy)
}

/// Smallest achievable maximum mass within the ball.
///
/// Solves `Σ (p - m)^+ = ε` on the sorted masses and clamps at the uniform
/// level over the full alphabet.
pub(crate) fn hinf_level(masses: &[f64], cells: usize, eps: f64) -> f64 {
    let mut desc: Vec<f64> = masses.iter().copied().filter(|&m| m > 0.0).collect();
    desc.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut level = desc[0];
    for j in 0..desc.len() {
        cum += desc[j];
        let m = (cum - eps) / (j + 1) as f64;
        let next = desc.get(j + 1).copied().unwrap_or(0.0);
        if m >= next {
            level = m;
            break;
        }
    }
    level.max(1.0 / cells as f64)
}

/// `H_∞^ε`: cut the largest atoms down to a common level and spread the
/// removed mass over atoms below it, in alphabet order.
pub fn smooth_hinf(p: &JointPmf, eps: f64) -> Result<SmoothingResult> {
    check_eps(eps)?;
    let masses: Vec<f64> = p.masses().collect();
    let cells = p.total_cells();
    let level = hinf_level(&masses, cells, eps);
    let mut removed = 0.0;
    let mut out: Vec<(usize, f64)> = p
        .entries()
        .iter()
        .map(|&(i, m)| {
            if m > level {
                removed += m - level;
                (i, level)
            } else {
                (i, m)
            }
        })
        .collect();
    let mut added = Vec::new();
    let mut remaining = removed;
    let mut pos = 0;
    let mut cell = 0;
    let mut last_touched: Option<(bool, usize)> = None;
    while remaining > 0.0 && cell < cells {
        let current = if pos < out.len() && out[pos].0 == cell { Some(pos) } else { None };
        let mass = current.map_or(0.0, |k| out[k].1);
        if mass < level {
            let add = (level - mass).min(remaining);
            remaining -= add;
            match current {
                Some(k) => {
                    out[k].1 += add;
                    last_touched = Some((true, k));
                }
                None => {
                    added.push((cell, add));
                    last_touched = Some((false, added.len() - 1));
                }
            }
        }
        if current.is_some() {
            pos += 1;
        }
        cell += 1;
    }
    // Rounding leftovers from the fill.
    if remaining > 0.0 {
        match last_touched {
            Some((true, k)) => out[k].1 += remaining,
            Some((false, k)) => added[k].1 += remaining,
            None => pour_onto_largest(&mut out, remaining),
        }
    }
    out.extend(added);
    finish(p, out, -level.log2(), SmoothingMethod::ExactGreedy)
}

/// Largest `m` with `Σ (m - q)^+ ≤ budget` over the top `k` of `desc`
/// (sorted descending, `prefix[i] = Σ desc[..i]`).
///
/// Raising the `j` smallest atoms gives `m_j = (budget + S_j) / j`, valid
/// once `m_j` does not exceed the next atom up. `j·q_{j+1} - S_j` is
/// nondecreasing in `j`, so the first valid `j` is found by bisection.
fn water_level(desc: &[f64], prefix: &[f64], k: usize, budget: f64) -> f64 {
    let level = |j: usize| {
        if j == 1 {
            desc[k - 1] + budget
        } else {
            (budget + prefix[k] - prefix[k - j]) / j as f64
        }
    };
    let valid = |j: usize| j == k || level(j) <= desc[k - j - 1];
    let (mut lo, mut hi) = (1, k);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if valid(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    level(lo)
}

/// Best kept-prefix size and level for `H_-∞^ε` on descending masses.
fn hneginf_plan(desc: &[f64], eps: f64) -> (usize, f64) {
    let mut prefix = vec![0.0; desc.len() + 1];
    for (i, q) in desc.iter().enumerate() {
        prefix[i + 1] = prefix[i] + q;
    }
    let mut tail = 0.0;
    let mut best = (desc.len(), desc[desc.len() - 1]);
    let mut best_level = f64::NEG_INFINITY;
    for k in (1..=desc.len()).rev() {
        if k < desc.len() {
            tail += desc[k];
        }
        if tail > eps + COST_TOLERANCE {
            break;
        }
        let level = water_level(desc, &prefix, k, eps).min(1.0 / k as f64);
        if level > best_level {
            best_level = level;
            best = (k, level);
        }
    }
    best
}

pub(crate) fn hneginf_level(masses: &[f64], eps: f64) -> f64 {
    let mut desc: Vec<f64> = masses.iter().copied().filter(|&m| m > 0.0).collect();
    desc.sort_by(|a, b| b.total_cmp(a));
    hneginf_plan(&desc, eps).1
}

/// Keeps `kept` (descending), raises every atom to at least `level`, and
/// balances total mass against `removed`: surplus goes to the largest atom,
/// a deficit is shaved from the top without crossing `level`.
fn reshape_kept(kept: &[(usize, f64)], removed: f64, level: f64) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64)> = kept.iter().map(|&(i, m)| (i, m.max(level))).collect();
    let raised: f64 = kept.iter().map(|&(_, m)| (level - m).max(0.0)).sum();
    if removed >= raised {
        if let Some(first) = out.first_mut() {
            first.1 += removed - raised;
        }
    } else {
        let mut deficit = raised - removed;
        for atom in out.iter_mut() {
            if deficit <= 0.0 {
                break;
            }
            let take = (atom.1 - level).max(0.0).min(deficit);
            atom.1 -= take;
            deficit -= take;
        }
    }
    out
}

/// `H_-∞^ε`: keep the k largest atoms and water-fill them, maximizing the
/// smallest positive mass over k.
pub fn smooth_hneginf(p: &JointPmf, eps: f64) -> Result<SmoothingResult> {
    check_eps(eps)?;
    let mut atoms = p.entries().to_vec();
    by_mass_desc(&mut atoms);
    let desc: Vec<f64> = atoms.iter().map(|a| a.1).collect();
    let (k, level) = hneginf_plan(&desc, eps);
    let removed: f64 = desc[k..].iter().sum();
    let out = reshape_kept(&atoms[..k], removed, level);
    finish(p, out, -level.log2(), SmoothingMethod::ExactGreedy)
}

/// Two-axis marginal `(target, given)` in the joint's own axis order.
fn pair_marginal(joint: &JointPmf, target: &str, given: &str) -> Result<JointPmf> {
    if joint.arity() < 2 {
        return Err(domain("conditional smoothing needs a joint with at least two axes"));
    }
    let t = joint.axis_index(target)?;
    let g = joint.axis_index(given)?;
    if t == g {
        return Err(domain("target and given axes must differ"));
    }
    let mut keep = vec![t, g];
    keep.sort_unstable();
    Ok(joint.marginalize_axes(&keep))
}

/// Greedy upper bound on `H_0^ε(target | given)`.
///
/// Each round removes the smallest atom of every row attaining the current
/// maximum row support, as long as the total removed mass stays within ε.
/// The removed mass is poured onto the largest surviving atom. The witness is
/// over the `(target, given)` marginal.
pub fn smooth_conditional_h0(joint: &JointPmf, target: &str, given: &str, eps: f64) -> Result<SmoothingResult> {
    check_eps(eps)?;
    let pair = pair_marginal(joint, target, given)?;
    let rows = pair.conditional_rows(target, given)?;
    // Per row: joint atoms ascending by (mass, index).
    let mut rows: Vec<Vec<(usize, f64)>> = rows
        .into_iter()
        .map(|r| {
            let mut atoms: Vec<(usize, f64)> = r.cells.iter().map(|c| (c.1, c.2 * r.weight)).collect();
            atoms.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            atoms.reverse();
            atoms
        })
        .collect();
    // Rows are stored descending so the smallest atom is popped from the back.
    let mut removed = 0.0;
    loop {
        let widest = rows.iter().map(Vec::len).max().unwrap_or(0);
        if widest <= 1 {
            break;
        }
        let cost: f64 = rows.iter().filter(|r| r.len() == widest).map(|r| r[widest - 1].1).sum();
        if removed + cost > eps + COST_TOLERANCE {
            break;
        }
        for r in rows.iter_mut().filter(|r| r.len() == widest) {
            r.pop();
        }
        removed += cost;
    }
    let widest = rows.iter().map(Vec::len).max().unwrap_or(1);
    let mut kept: Vec<(usize, f64)> = rows.into_iter().flatten().collect();
    pour_onto_largest(&mut kept, removed);
    finish(&pair, kept, (widest as f64).log2(), SmoothingMethod::GreedyHeuristic)
}

/// Cheapest way to lift one conditional row (descending) to minimum `level`:
/// `(cost as a fraction of the row's mass, kept prefix size)`.
fn row_lift_cost(desc: &[f64], prefix: &[f64], level: f64) -> (f64, usize) {
    let n = desc.len();
    // Atoms already at or above the level.
    let above = desc.partition_point(|&q| q >= level);
    let mut best = (f64::INFINITY, 1);
    for k in 1..=n {
        if level > 1.0 / k as f64 + 1e-15 {
            break;
        }
        let removed = 1.0 - prefix[k];
        let raise = if k <= above { 0.0 } else { (k - above) as f64 * level - (prefix[k] - prefix[above]) };
        let cost = removed.max(raise.max(0.0));
        if cost < best.0 {
            best = (cost, k);
        }
    }
    best
}

/// Greedy bound on `H_-∞^ε(target | given)`.
///
/// Every row is lifted to a common minimum conditional mass `m` by the same
/// keep-top-k and water-filling move as [`smooth_hneginf`], with row `y`
/// charged `P(y)` times its conditional cost. The largest `m` whose total
/// charge fits in ε is found by bisection. The witness is feasible, so the
/// returned value is an upper bound on the true smooth entropy.
pub fn smooth_conditional_hneginf(joint: &JointPmf, target: &str, given: &str, eps: f64) -> Result<SmoothingResult> {
    check_eps(eps)?;
    let pair = pair_marginal(joint, target, given)?;
    let rows = pair.conditional_rows(target, given)?;
    struct Row {
        weight: f64,
        atoms: Vec<(usize, f64)>,
        desc: Vec<f64>,
        prefix: Vec<f64>,
    }
    let rows: Vec<Row> = rows
        .into_iter()
        .map(|r| {
            let mut atoms: Vec<(usize, f64)> = r.cells.iter().map(|c| (c.1, c.2)).collect();
            by_mass_desc(&mut atoms);
            let desc: Vec<f64> = atoms.iter().map(|a| a.1).collect();
            let mut prefix = vec![0.0; desc.len() + 1];
            for (i, q) in desc.iter().enumerate() {
                prefix[i + 1] = prefix[i] + q;
            }
            Row { weight: r.weight, atoms, desc, prefix }
        })
        .collect();
    let total_cost = |level: f64| -> f64 {
        rows.iter().map(|r| r.weight * row_lift_cost(&r.desc, &r.prefix, level).0).sum()
    };
    let floor = rows.iter().map(|r| *r.desc.last().unwrap()).fold(1.0, f64::min);
    let (mut lo, mut hi) = (floor, 1.0);
    if total_cost(hi) <= eps {
        lo = hi;
    } else {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if total_cost(mid) <= eps {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let level = lo;
    let mut out = Vec::new();
    for r in &rows {
        let (_, k) = row_lift_cost(&r.desc, &r.prefix, level);
        let removed = 1.0 - r.prefix[k];
        let k = if level <= floor { r.atoms.len() } else { k };
        let reshaped = reshape_kept(&r.atoms[..k], if level <= floor { 0.0 } else { removed }, level);
        out.extend(reshaped.into_iter().map(|(i, q)| (i, q * r.weight)));
    }
    let witness = pair.with_entries(out)?;
    let achieved = crate::entropy::renyi_conditional(&witness, target, given, EntropyOrder::NegInfinity)?;
    let moved_mass = tv_distance(&pair, &witness)?;
    Ok(SmoothingResult { value_bits: achieved, witness, moved_mass, method: SmoothingMethod::GreedyHeuristic })
}

/// Unsmoothed order check used by witness tests.
pub fn witness_entropy(witness: &JointPmf, order: EntropyOrder) -> f64 {
    let m: Vec<f64> = witness.masses().collect();
    renyi_of(&m, order)
}
