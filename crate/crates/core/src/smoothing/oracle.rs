//! Exhaustive reference smoothers for tiny alphabets.
//!
//! Enumerates every candidate support and, for the conditional orders that
//! need it, solves a linear feasibility program per candidate. Intended for
//! cross-checking the fast smoothers, not for production use.

use minilp::{ComparisonOp, OptimizationDirection, Problem, Variable};

use super::{check_eps, SmoothingMethod, SmoothingResult, COST_TOLERANCE};
use crate::error::{domain, resource, Result};
use crate::probability::{tv_distance, JointPmf};

/// Largest number of cells the oracle accepts.
pub const ORACLE_MAX_CELLS: usize = 12;

/// Slack allowed on LP objectives.
const LP_TOLERANCE: f64 = 1e-9;
const BISECTIONS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmoothOrder {
    Zero,
    Infinity,
    NegInfinity,
}

/// Reference value of `H_order^ε(P)`, or of `H_order^ε(target | given)` when
/// `conditional` is set.
pub fn oracle_smooth(
    p: &JointPmf,
    eps: f64,
    order: SmoothOrder,
    conditional: Option<(&str, &str)>,
) -> Result<SmoothingResult> {
    check_eps(eps)?;
    match conditional {
        None => {
            check_size(p)?;
            match order {
                SmoothOrder::Zero => h0(p, eps),
                SmoothOrder::Infinity => hinf(p, eps),
                SmoothOrder::NegInfinity => hneginf(p, eps),
            }
        }
        Some((target, given)) => {
            let pair = super::pair_marginal(p, target, given)?;
            check_size(&pair)?;
            let _ = pair.axis_index(target)?;
            let c = CondView::new(&pair, pair.axis_index(given)?);
            match order {
                SmoothOrder::Zero => cond_h0(&pair, &c, eps),
                SmoothOrder::Infinity => cond_hinf(&pair, &c, eps),
                SmoothOrder::NegInfinity => cond_hneginf(&pair, &c, eps),
            }
        }
    }
}

fn check_size(p: &JointPmf) -> Result<()> {
    if p.total_cells() > ORACLE_MAX_CELLS {
        return Err(resource(format!(
            "oracle accepts at most {ORACLE_MAX_CELLS} cells, got {}",
            p.total_cells()
        )));
    }
    Ok(())
}

fn result(p: &JointPmf, entries: Vec<(usize, f64)>, value_bits: f64) -> Result<SmoothingResult> {
    let witness = p.with_entries(entries.into_iter().filter(|e| e.1 > 0.0))?;
    let moved_mass = tv_distance(p, &witness)?;
    Ok(SmoothingResult { value_bits, witness, moved_mass, method: SmoothingMethod::ExhaustiveOracle })
}

fn subset(atoms: &[(usize, f64)], mask: u32) -> (Vec<(usize, f64)>, f64) {
    let mut kept = Vec::new();
    let mut removed = 0.0;
    for (i, &a) in atoms.iter().enumerate() {
        if mask >> i & 1 == 1 {
            kept.push(a);
        } else {
            removed += a.1;
        }
    }
    (kept, removed)
}

fn pour(kept: &mut [(usize, f64)], amount: f64) {
    super::pour_onto_largest(kept, amount);
}

fn h0(p: &JointPmf, eps: f64) -> Result<SmoothingResult> {
    let atoms = p.entries();
    let mut best: Option<(u32, Vec<(usize, f64)>, f64)> = None;
    for mask in 1u32..1 << atoms.len() {
        let (kept, removed) = subset(atoms, mask);
        if removed > eps + COST_TOLERANCE {
            continue;
        }
        if best.as_ref().is_none_or(|b| mask.count_ones() < b.0) {
            best = Some((mask.count_ones(), kept, removed));
        }
    }
    let (size, mut kept, removed) = best.expect("the full support is always feasible");
    pour(&mut kept, removed);
    result(p, kept, (size as f64).log2())
}

fn hinf(p: &JointPmf, eps: f64) -> Result<SmoothingResult> {
    let atoms = p.entries();
    let cells = p.total_cells();
    let floor = 1.0 / cells as f64;
    let excess = |m: f64| atoms.iter().map(|a| (a.1 - m).max(0.0)).sum::<f64>();
    let mut best = atoms.iter().map(|a| a.1).fold(0.0, f64::max);
    for mask in 1u32..1 << atoms.len() {
        let (cut, _) = subset(atoms, mask);
        let outside_max =
            atoms.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 0).map(|(_, a)| a.1).fold(0.0, f64::max);
        let total: f64 = cut.iter().map(|a| a.1).sum();
        let m = ((total - eps) / cut.len() as f64).max(outside_max).max(floor);
        if excess(m) <= eps + COST_TOLERANCE && m < best {
            best = m;
        }
    }
    // Cut to the level, then fill cells below it in index order.
    let level = best.max(floor);
    let mut dense = vec![0.0; cells];
    let mut removed = 0.0;
    for &(i, m) in atoms {
        dense[i] = m.min(level);
        removed += (m - level).max(0.0);
    }
    for slot in dense.iter_mut() {
        if removed <= 0.0 {
            break;
        }
        let add = (level - *slot).max(0.0).min(removed);
        *slot += add;
        removed -= add;
    }
    result(p, dense.into_iter().enumerate().collect(), -level.log2())
}

fn hneginf(p: &JointPmf, eps: f64) -> Result<SmoothingResult> {
    let atoms = p.entries();
    let mut best: Option<(f64, Vec<(usize, f64)>, f64)> = None;
    for mask in 1u32..1 << atoms.len() {
        let (kept, removed) = subset(atoms, mask);
        if removed > eps + COST_TOLERANCE {
            continue;
        }
        let cap = 1.0 / kept.len() as f64;
        let raise = |m: f64| kept.iter().map(|a| (m - a.1).max(0.0)).sum::<f64>();
        let level = if raise(cap) <= eps {
            cap
        } else {
            let (mut lo, mut hi) = (kept.iter().map(|a| a.1).fold(1.0, f64::min), cap);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if raise(mid) <= eps {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        if best.as_ref().is_none_or(|b| level > b.0) {
            best = Some((level, kept, removed));
        }
    }
    let (level, mut kept, removed) = best.expect("the full support is always feasible");
    kept.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let out = super::reshape_kept(&kept, removed, level);
    result(p, out, -level.log2())
}

/// Row structure of a two-axis joint.
struct CondView {
    /// `(flat, row, mass)` for every cell of the pair alphabet.
    cells: Vec<(usize, usize, f64)>,
}

impl CondView {
    fn new(pair: &JointPmf, g: usize) -> Self {
        let cells = (0..pair.total_cells())
            .map(|flat| {
                let tup = pair.decode(flat);
                (flat, tup[g], pair.mass_flat(flat))
            })
            .collect();
        CondView { cells }
    }

    fn support(&self) -> Vec<(usize, usize, f64)> {
        self.cells.iter().copied().filter(|c| c.2 > 0.0).collect()
    }
}

fn cond_h0(pair: &JointPmf, c: &CondView, eps: f64) -> Result<SmoothingResult> {
    let atoms = c.support();
    let mut best: Option<(usize, u32, f64)> = None;
    for mask in 1u32..1 << atoms.len() {
        let removed: f64 = atoms.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 0).map(|(_, a)| a.2).sum();
        if removed > eps + COST_TOLERANCE {
            continue;
        }
        let mut counts = std::collections::BTreeMap::new();
        for (i, a) in atoms.iter().enumerate() {
            if mask >> i & 1 == 1 {
                *counts.entry(a.1).or_insert(0usize) += 1;
            }
        }
        let widest = counts.values().copied().max().unwrap_or(0);
        if best.is_none_or(|b| widest < b.0) {
            best = Some((widest, mask, removed));
        }
    }
    let (widest, mask, removed) = best.expect("the full support is always feasible");
    let mut kept: Vec<(usize, f64)> =
        atoms.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, a)| (a.0, a.2)).collect();
    pour(&mut kept, removed);
    result(pair, kept, (widest as f64).log2())
}

/// Minimum of `Σ (p - r)^+` over distributions `r` supported on `cells` with
/// `r_a ≤ m Σ_row r` (`upper`) or `r_a ≥ m Σ_row r` (`!upper`) in every row.
/// `None` if infeasible.
fn lp_cost(cells: &[(usize, usize, f64)], m: f64, upper: bool) -> Option<(f64, Vec<f64>)> {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let r: Vec<Variable> = cells.iter().map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
    let d: Vec<Variable> = cells.iter().map(|_| lp.add_var(1.0, (0.0, 1.0))).collect();
    for (i, cell) in cells.iter().enumerate() {
        // d ≥ p - r
        lp.add_constraint([(d[i], 1.0), (r[i], 1.0)], ComparisonOp::Ge, cell.2);
        let row: Vec<(Variable, f64)> = cells
            .iter()
            .enumerate()
            .filter(|(_, o)| o.1 == cell.1)
            .map(|(j, _)| (r[j], if j == i { 1.0 - m } else { -m }))
            .collect();
        let op = if upper { ComparisonOp::Le } else { ComparisonOp::Ge };
        lp.add_constraint(row, op, 0.0);
    }
    lp.add_constraint(r.iter().map(|&v| (v, 1.0)), ComparisonOp::Eq, 1.0);
    let solution = lp.solve().ok()?;
    let values: Vec<f64> = r.iter().map(|&v| solution[v].max(0.0)).collect();
    let cost = cells.iter().zip(&values).map(|(c, &v)| (c.2 - v).max(0.0)).sum();
    Some((cost, values))
}

fn witness_from(cells: &[(usize, usize, f64)], values: &[f64]) -> Vec<(usize, f64)> {
    let total: f64 = values.iter().sum();
    cells.iter().zip(values).map(|(c, &v)| (c.0, v / total)).filter(|e| e.1 > 0.0).collect()
}

fn cond_hinf(pair: &JointPmf, c: &CondView, eps: f64) -> Result<SmoothingResult> {
    let cells = &c.cells;
    let fits = |m: f64| lp_cost(cells, m, true).filter(|s| s.0 <= eps + LP_TOLERANCE);
    let mut hi = conditional_max(c);
    let mut hi_values = fits(hi).map(|s| s.1);
    if hi_values.is_none() {
        return Err(domain("conditional oracle: LP failed at the unsmoothed level"));
    }
    let mut lo = 0.0;
    for _ in 0..BISECTIONS {
        let mid = 0.5 * (lo + hi);
        match fits(mid) {
            Some((_, v)) => {
                hi = mid;
                hi_values = Some(v);
            }
            None => lo = mid,
        }
    }
    let out = witness_from(cells, &hi_values.unwrap());
    result(pair, out, -hi.log2())
}

/// Largest conditional mass over all rows.
fn conditional_max(c: &CondView) -> f64 {
    let mut totals = std::collections::BTreeMap::new();
    for a in c.support() {
        *totals.entry(a.1).or_insert(0.0) += a.2;
    }
    c.support().into_iter().map(|a| a.2 / totals[&a.1]).fold(0.0, f64::max)
}

fn cond_hneginf(pair: &JointPmf, c: &CondView, eps: f64) -> Result<SmoothingResult> {
    let atoms = c.support();
    let mut best: Option<(f64, Vec<(usize, usize, f64)>, Vec<f64>)> = None;
    for mask in 1u32..1 << atoms.len() {
        let kept: Vec<(usize, usize, f64)> =
            atoms.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &a)| a).collect();
        let removed: f64 = atoms.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 0).map(|(_, a)| a.2).sum();
        if removed > eps + COST_TOLERANCE {
            continue;
        }
        // Each kept row of size s forces m ≤ 1/s.
        let mut sizes = std::collections::BTreeMap::new();
        for a in &kept {
            *sizes.entry(a.1).or_insert(0usize) += 1;
        }
        let cap = 1.0 / *sizes.values().max().unwrap() as f64;
        if best.as_ref().is_some_and(|b| cap <= b.0) {
            continue;
        }
        let fits = |m: f64| lp_cost(&kept, m, false).filter(|s| s.0 + removed <= eps + LP_TOLERANCE);
        let (mut lo, mut lo_values) = match fits(0.0) {
            Some((_, v)) => (0.0, v),
            None => continue,
        };
        if let Some((_, v)) = fits(cap) {
            lo = cap;
            lo_values = v;
        } else {
            let mut hi = cap;
            for _ in 0..BISECTIONS {
                let mid = 0.5 * (lo + hi);
                match fits(mid) {
                    Some((_, v)) => {
                        lo = mid;
                        lo_values = v;
                    }
                    None => hi = mid,
                }
            }
        }
        if best.as_ref().is_none_or(|b| lo > b.0) {
            best = Some((lo, kept, lo_values));
        }
    }
    let (level, kept, values) = best.ok_or_else(|| domain("conditional oracle: no feasible support"))?;
    let out = witness_from(&kept, &values);
    result(pair, out, -level.log2())
}
