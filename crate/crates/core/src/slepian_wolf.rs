//! One-shot distributed source coding of a correlated pair `(X, Y)`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, resource, Error, Result};
use crate::hashing::{draw_seed, HashSeed, MAX_OUTPUT_BITS};
use crate::probability::{Caps, JointPmf};
use crate::report::SimulationReport;
use crate::rng::stream;
use crate::smoothing::oracle::{oracle_smooth, SmoothOrder, ORACLE_MAX_CELLS};
use crate::smoothing::{smooth_conditional_h0, smooth_h0};
use crate::typical::{build_typical_set, xi_bounds, EpsilonBudget, TypicalSet, XiBounds};

/// Largest joint alphabet for which exact-per-seed simulation is allowed.
pub const EXACT_MAX_CELLS: usize = 1 << 16;

fn check_pair(joint: &JointPmf) -> Result<()> {
    if joint.arity() != 2 {
        return Err(domain(format!("distributed coding needs a two-axis joint, got {} axes", joint.arity())));
    }
    Ok(())
}

fn axis_names(joint: &JointPmf) -> (String, String) {
    (joint.axes()[0].name.clone(), joint.axes()[1].name.clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwLowerBounds {
    /// `H_0^ε(X|Y)`.
    pub l_x: f64,
    /// `H_0^ε(Y|X)`.
    pub l_y: f64,
    /// `H_0^ε(XY)`.
    pub l_sum: f64,
    /// True when `l_x`/`l_y` come from the greedy smoother and are only
    /// upper estimates of the true smooth entropies.
    pub heuristic: bool,
}

fn conditional_h0(joint: &JointPmf, target: &str, given: &str, eps: f64) -> Result<(f64, bool)> {
    if joint.total_cells() <= ORACLE_MAX_CELLS {
        let r = oracle_smooth(joint, eps, SmoothOrder::Zero, Some((target, given)))?;
        return Ok((r.value_bits, false));
    }
    Ok((smooth_conditional_h0(joint, target, given, eps)?.value_bits, true))
}

/// Converse bounds: any protocol with error at most ε needs lengths at least
/// these. Conditional terms are exact for joints of at most
/// [`ORACLE_MAX_CELLS`] cells and greedy estimates beyond that.
pub fn sw_lower_bounds(joint: &JointPmf, eps: f64) -> Result<SwLowerBounds> {
    check_pair(joint)?;
    let (x, y) = axis_names(joint);
    let (l_x, hx) = conditional_h0(joint, &x, &y, eps)?;
    let (l_y, hy) = conditional_h0(joint, &y, &x, eps)?;
    let l_sum = smooth_h0(joint, eps)?.value_bits;
    Ok(SwLowerBounds { l_x, l_y, l_sum, heuristic: hx || hy })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwLengths {
    pub l_x: f64,
    pub l_y: f64,
    pub l_sum: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwXi {
    pub joint: XiBounds,
    pub x: XiBounds,
    pub y: XiBounds,
}

impl SwXi {
    pub fn new(joint: &JointPmf, delta: f64) -> Result<Self> {
        check_pair(joint)?;
        let (x, y) = axis_names(joint);
        Ok(SwXi {
            joint: xi_bounds(joint, delta)?,
            x: xi_bounds(&joint.marginalize(&[&x])?, delta)?,
            y: xi_bounds(&joint.marginalize(&[&y])?, delta)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwRateRegion {
    pub lower: SwLowerBounds,
    /// Real-valued achievable lengths, negatives clamped to 0.
    pub achievable: SwLengths,
    /// Which of `(l_x, l_y, l_sum)` were clamped.
    pub clamped: [bool; 3],
    pub budget: EpsilonBudget,
    pub delta: f64,
    /// Exact `Pr[(X, Y) ∉ A_δ]`.
    pub tail: f64,
    pub xi: SwXi,
}

/// Achievable lengths `Ξ_max(XY) - Ξ_min(Y) - log ε₁`,
/// `Ξ_max(XY) - Ξ_min(X) - log ε₂` and `Ξ_max(XY) - log ε₃`, together with
/// the lower bounds at the budget's total ε.
pub fn sw_achievable_region(
    joint: &JointPmf,
    budget: &EpsilonBudget,
    delta: f64,
    caps: &Caps,
) -> Result<SwRateRegion> {
    check_pair(joint)?;
    let set = build_typical_set(joint, delta, caps)?;
    let [e0, e1, e2, e3] = budget.parts;
    if set.tail() > e0 + 1e-12 {
        return Err(Error::Precondition(format!(
            "delta {delta} leaves atypical mass {} above eps0 = {e0}",
            set.tail()
        )));
    }
    let xi = SwXi::new(joint, delta)?;
    let raw = [
        xi.joint.xi_max - xi.y.xi_min - e1.log2(),
        xi.joint.xi_max - xi.x.xi_min - e2.log2(),
        xi.joint.xi_max - e3.log2(),
    ];
    let clamped = raw.map(|v| v < 0.0);
    let [l_x, l_y, l_sum] = raw.map(|v| v.max(0.0));
    Ok(SwRateRegion {
        lower: sw_lower_bounds(joint, budget.total)?,
        achievable: SwLengths { l_x, l_y, l_sum },
        clamped,
        budget: *budget,
        delta,
        tail: set.tail(),
        xi,
    })
}

impl SwRateRegion {
    /// Integer code lengths: each length ceiled, then `ℓ_Y` raised if needed
    /// so that `ℓ_X + ℓ_Y ≥ ⌈ℓ_sum⌉`.
    pub fn integer_lengths(&self) -> Result<(u32, u32)> {
        integer_lengths(&self.achievable)
    }
}

pub fn integer_lengths(l: &SwLengths) -> Result<(u32, u32)> {
    let cx = l.l_x.ceil();
    let mut cy = l.l_y.ceil();
    let cs = l.l_sum.ceil();
    if cx + cy < cs {
        cy = cs - cx;
    }
    for v in [cx, cy] {
        if v > MAX_OUTPUT_BITS as f64 {
            return Err(resource(format!("code length {v} exceeds {MAX_OUTPUT_BITS} bits")));
        }
    }
    Ok((cx as u32, cy as u32))
}

/// `ε₀ + 2^{Ξmax(XY)-Ξmin(Y)-ℓ_X} + 2^{Ξmax(XY)-Ξmin(X)-ℓ_Y} + 2^{Ξmax(XY)-ℓ_X-ℓ_Y}`.
pub fn sw_union_bound(joint: &JointPmf, lengths: (f64, f64), delta: f64, eps0: f64) -> Result<f64> {
    let xi = SwXi::new(joint, delta)?;
    Ok(union_terms(&xi, lengths, eps0).iter().sum())
}

fn union_terms(xi: &SwXi, (lx, ly): (f64, f64), eps0: f64) -> [f64; 4] {
    let top = xi.joint.xi_max;
    [
        eps0,
        (top - xi.y.xi_min - lx).exp2().min(1.0),
        (top - xi.x.xi_min - ly).exp2().min(1.0),
        (top - lx - ly).exp2().min(1.0),
    ]
}

/// The typical set a decoder searches, with its members as `(x, y)` pairs.
#[derive(Debug)]
pub struct SwDecoderSet {
    set: TypicalSet,
    pairs: Vec<(u64, u64)>,
}

impl SwDecoderSet {
    pub fn new(set: TypicalSet) -> Result<Self> {
        check_pair(set.source())?;
        let pairs = set.member_tuples().map(|t| (t[0] as u64, t[1] as u64)).collect();
        Ok(SwDecoderSet { set, pairs })
    }

    pub fn set(&self) -> &TypicalSet {
        &self.set
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwDecoded {
    Pair(usize, usize),
    NoCandidate,
    Ambiguous,
}

#[derive(Debug, Clone)]
pub struct SwProtocol {
    pub seed_x: HashSeed,
    pub seed_y: HashSeed,
    decoder: Arc<SwDecoderSet>,
}

impl SwProtocol {
    pub fn new(decoder: Arc<SwDecoderSet>, seed_x: HashSeed, seed_y: HashSeed) -> Result<Self> {
        let shape = decoder.set.source().shape();
        if (1u128 << seed_x.input_bits()) < shape[0] as u128 || (1u128 << seed_y.input_bits()) < shape[1] as u128 {
            return Err(domain("hash seeds do not cover the source alphabets"));
        }
        Ok(SwProtocol { seed_x, seed_y, decoder })
    }

    /// Draws `U`: one seed per encoder, `x` first.
    pub fn draw<R: rand::Rng + ?Sized>(decoder: Arc<SwDecoderSet>, lengths: (u32, u32), rng: &mut R) -> Result<Self> {
        let shape = decoder.set.source().shape().to_vec();
        let seed_x = draw_seed(shape[0], lengths.0, rng)?;
        let seed_y = draw_seed(shape[1], lengths.1, rng)?;
        Self::new(decoder, seed_x, seed_y)
    }

    pub fn lengths(&self) -> (u32, u32) {
        (self.seed_x.output_bits(), self.seed_y.output_bits())
    }

    pub fn encode_x(&self, x: usize) -> Result<u64> {
        self.seed_x.eval(x as u64)
    }

    pub fn encode_y(&self, y: usize) -> Result<u64> {
        self.seed_y.eval(y as u64)
    }

    /// The unique decoder-set member hashing to `(i, j)`.
    pub fn decode(&self, i: u64, j: u64) -> SwDecoded {
        let mut found = None;
        for &(x, y) in &self.decoder.pairs {
            if self.seed_x.eval_unchecked(x) == i && self.seed_y.eval_unchecked(y) == j {
                if found.is_some() {
                    return SwDecoded::Ambiguous;
                }
                found = Some((x as usize, y as usize));
            }
        }
        found.map_or(SwDecoded::NoCandidate, |(x, y)| SwDecoded::Pair(x, y))
    }

    /// Decoding with per-symbol code tables, for repeated use under one seed.
    fn decode_with(&self, hx: &[u64], hy: &[u64], i: u64, j: u64) -> SwDecoded {
        let mut found = None;
        for &(x, y) in &self.decoder.pairs {
            if hx[x as usize] == i && hy[y as usize] == j {
                if found.is_some() {
                    return SwDecoded::Ambiguous;
                }
                found = Some((x as usize, y as usize));
            }
        }
        found.map_or(SwDecoded::NoCandidate, |(x, y)| SwDecoded::Pair(x, y))
    }

    fn tables(&self) -> (Vec<u64>, Vec<u64>) {
        let shape = self.decoder.set.source().shape();
        (
            (0..shape[0] as u64).map(|x| self.seed_x.eval_unchecked(x)).collect(),
            (0..shape[1] as u64).map(|y| self.seed_y.eval_unchecked(y)).collect(),
        )
    }

    /// Exact error probability under this seed pair.
    pub fn exact_error(&self) -> f64 {
        let (hx, hy) = self.tables();
        let source = self.decoder.set.source();
        let mut keys: Vec<(u64, u64)> = self.decoder.pairs.iter().map(|&(x, y)| (hx[x as usize], hy[y as usize])).collect();
        keys.sort_unstable();
        let mut correct = 0.0;
        for &(x, y) in &self.decoder.pairs {
            let key = (hx[x as usize], hy[y as usize]);
            let lo = keys.partition_point(|k| *k < key);
            if keys.get(lo + 1) != Some(&key) {
                correct += source.mass_of(&[x as usize, y as usize]);
            }
        }
        (1.0 - correct).clamp(0.0, 1.0)
    }
}

pub fn sw_encode(proto: &SwProtocol, x: Option<usize>, y: Option<usize>) -> Result<(Option<u64>, Option<u64>)> {
    Ok((x.map(|x| proto.encode_x(x)).transpose()?, y.map(|y| proto.encode_y(y)).transpose()?))
}

pub fn sw_decode(proto: &SwProtocol, i: u64, j: u64) -> SwDecoded {
    proto.decode(i, j)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig {
    pub trials: u64,
    pub master_seed: u64,
    /// Average exact per-seed error instead of sampling the source.
    pub exact: bool,
    /// ε the report's verdict is judged against.
    pub target_eps: f64,
}

/// Error rate of the hash protocol with the given integer lengths.
///
/// Trial `t` uses RNG stream `t`: it draws the two seeds, then (in Monte
/// Carlo mode) one source pair. The analytic bound uses the exact atypical
/// mass as `Pr[E₀]`.
pub fn sw_simulate(
    joint: &JointPmf,
    lengths: (u32, u32),
    delta: f64,
    config: &SimulationConfig,
    caps: &Caps,
) -> Result<SimulationReport> {
    check_pair(joint)?;
    if config.trials == 0 {
        return Err(domain("trials must be at least 1"));
    }
    if config.exact && joint.total_cells() > EXACT_MAX_CELLS {
        return Err(resource(format!(
            "exact-per-seed mode needs at most {EXACT_MAX_CELLS} joint cells, got {}",
            joint.total_cells()
        )));
    }
    let set = build_typical_set(joint, delta, caps)?;
    let tail = set.tail();
    let decoder = Arc::new(SwDecoderSet::new(set)?);
    let sampler = joint.sampler();
    let shape = joint.shape().to_vec();
    let outcomes: Vec<f64> = (0..config.trials)
        .into_par_iter()
        .map(|t| -> Result<f64> {
            let mut rng = stream(config.master_seed, t);
            let proto = SwProtocol::draw(decoder.clone(), lengths, &mut rng)?;
            if config.exact {
                return Ok(proto.exact_error());
            }
            let flat = sampler.sample_flat(&mut rng);
            let (x, y) = (flat / shape[1], flat % shape[1]);
            let (hx, hy) = proto.tables();
            let ok = proto.decode_with(&hx, &hy, hx[x], hy[y]) == SwDecoded::Pair(x, y);
            Ok(if ok { 0.0 } else { 1.0 })
        })
        .collect::<Result<_>>()?;
    let bound = sw_union_bound(joint, (lengths.0 as f64, lengths.1 as f64), delta, tail)?;
    Ok(if config.exact {
        SimulationReport::from_exact(&outcomes, bound, config.target_eps)
    } else {
        let failures = outcomes.iter().filter(|&&v| v > 0.0).count() as u64;
        SimulationReport::from_counts(failures, config.trials, bound, config.target_eps)
    })
}
