//! One-shot coding over a two-user multiple-access channel.
//!
//! Messages are 0-based indices into the codebooks: message `m` of sender 1
//! is `codebook_x[m]`.

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, resource, Error, Result};
use crate::probability::{Alphabet, Axis, Caps, Channel, JointPmf, Pmf};
use crate::report::SimulationReport;
use crate::rng::stream;
use crate::typical::{build_typical_set, xi_bounds, EpsilonBudget, TypicalSet, XiBounds};

/// Largest codebook size exponent.
pub const MAX_RATE_BITS: u32 = 24;

/// `P(x, y, z) = P_X(x) P_Y(y) W(z | x, y)` on axes named after the
/// channel's inputs and output.
pub fn induced_joint(p_x: &Pmf, p_y: &Pmf, ch: &Channel) -> Result<JointPmf> {
    let inputs = ch.inputs();
    if inputs.len() != 2 {
        return Err(domain("a multiple-access channel needs two input axes"));
    }
    for (p, axis) in [(p_x, &inputs[0]), (p_y, &inputs[1])] {
        if p.alphabet() != &axis.alphabet {
            return Err(domain(format!("input distribution alphabet does not match channel input {:?}", axis.name)));
        }
    }
    let axes = vec![inputs[0].clone(), inputs[1].clone(), ch.output().clone()];
    let (ky, kz) = (inputs[1].alphabet.len(), ch.output().alphabet.len());
    let mut entries = Vec::new();
    for &(x, px) in p_x.entries() {
        for &(y, py) in p_y.entries() {
            for &(z, w) in ch.row(&[x, y]) {
                entries.push(((x * ky + y) * kz + z, px * py * w));
            }
        }
    }
    JointPmf::from_entries(axes, entries)
}

fn binary_inputs() -> Vec<Axis> {
    vec![Axis::new("X", Alphabet::range(2)), Axis::new("Y", Alphabet::range(2))]
}

/// `Z = X + Y` over binary inputs, output alphabet `{0, 1, 2}`.
pub fn adder_channel() -> Channel {
    Channel::deterministic(binary_inputs(), Axis::new("Z", Alphabet::range(3)), |t| t[0] + t[1])
        .expect("fixed construction")
}

/// `Z = X ⊕ Y` over binary inputs.
pub fn xor_channel() -> Channel {
    Channel::deterministic(binary_inputs(), Axis::new("Z", Alphabet::range(2)), |t| t[0] ^ t[1])
        .expect("fixed construction")
}

/// `Z = (X, Y)` over binary inputs; output labels `00, 01, 10, 11`.
pub fn noiseless_pair_channel() -> Channel {
    let out = Alphabet::new(["00", "01", "10", "11"]).expect("distinct labels");
    Channel::deterministic(binary_inputs(), Axis::new("Z", out), |t| 2 * t[0] + t[1]).expect("fixed construction")
}

/// Ξ bounds of every marginal the rate formulas use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacXi {
    pub x: XiBounds,
    pub y: XiBounds,
    pub z: XiBounds,
    pub xz: XiBounds,
    pub yz: XiBounds,
    pub xyz: XiBounds,
}

impl MacXi {
    pub fn new(joint3: &JointPmf, delta: f64) -> Result<Self> {
        check_triple(joint3)?;
        let m = |axes: &[usize]| xi_bounds(&joint3.marginalize_axes(axes), delta);
        Ok(MacXi {
            x: m(&[0])?,
            y: m(&[1])?,
            z: m(&[2])?,
            xz: m(&[0, 2])?,
            yz: m(&[1, 2])?,
            xyz: xi_bounds(joint3, delta)?,
        })
    }

    /// `(c1, c2, sum)` caps before the `log ε_i` terms.
    pub fn information_terms(&self) -> [f64; 3] {
        let top = self.xyz.xi_max;
        [
            self.x.xi_min + self.yz.xi_min - top,
            self.y.xi_min + self.xz.xi_min - top,
            self.x.xi_min + self.y.xi_min + self.z.xi_min - top,
        ]
    }
}

fn check_triple(joint3: &JointPmf) -> Result<()> {
    if joint3.arity() != 3 {
        return Err(domain(format!("expected a joint over (X, Y, Z), got {} axes", joint3.arity())));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacRateRegion {
    pub c1_max: f64,
    pub c2_max: f64,
    pub sum_max: f64,
    pub budget: EpsilonBudget,
    pub delta: f64,
    /// Exact `Pr[(X, Y, Z) ∉ A_δ]`.
    pub tail: f64,
    pub xi: MacXi,
}

/// `C₁ ≤ Ξmin(X)+Ξmin(YZ)−Ξmax(XYZ)+log ε₁`,
/// `C₂ ≤ Ξmin(Y)+Ξmin(XZ)−Ξmax(XYZ)+log ε₂` and
/// `C₁+C₂ ≤ Ξmin(X)+Ξmin(Y)+Ξmin(Z)−Ξmax(XYZ)+log ε₃`. Negative caps are
/// reported as they are.
pub fn mac_achievable_region(
    joint3: &JointPmf,
    budget: &EpsilonBudget,
    delta: f64,
    caps: &Caps,
) -> Result<MacRateRegion> {
    check_triple(joint3)?;
    let set = build_typical_set(joint3, delta, caps)?;
    let [e0, e1, e2, e3] = budget.parts;
    if set.tail() > e0 + 1e-12 {
        return Err(Error::Precondition(format!(
            "delta {delta} leaves atypical mass {} above eps0 = {e0}",
            set.tail()
        )));
    }
    let xi = MacXi::new(joint3, delta)?;
    let [a, b, c] = xi.information_terms();
    Ok(MacRateRegion {
        c1_max: a + e1.log2(),
        c2_max: b + e2.log2(),
        sum_max: c + e3.log2(),
        budget: *budget,
        delta,
        tail: set.tail(),
        xi,
    })
}

impl MacRateRegion {
    /// Integer rates inside all three caps with the largest sum; ties go to
    /// the most balanced pair, with `C₁ ≥ C₂`.
    pub fn integer_rates(&self) -> Result<(u32, u32)> {
        let (f1, f2, fs) = (self.c1_max.floor(), self.c2_max.floor(), self.sum_max.floor());
        if f1 < 0.0 || f2 < 0.0 || fs < 0.0 {
            return Err(Error::Infeasible(format!(
                "no nonnegative integer rates fit caps ({}, {}, {})",
                self.c1_max, self.c2_max, self.sum_max
            )));
        }
        let total = (f1 + f2).min(fs);
        let mut c1 = f1.min((total / 2.0).ceil());
        let mut c2 = total - c1;
        if c2 > f2 {
            c2 = f2;
            c1 = total - f2;
        }
        Ok((c1 as u32, c2 as u32))
    }

    pub fn contains(&self, c1: f64, c2: f64) -> bool {
        c1 <= self.c1_max && c2 <= self.c2_max && c1 + c2 <= self.sum_max
    }
}

/// `ε₀ + 2^{C₁-I₁} + 2^{C₂-I₂} + 2^{C₁+C₂-I₃}` with `I_k` the caps' Ξ terms.
pub fn mac_union_bound(joint3: &JointPmf, c1: f64, c2: f64, delta: f64, eps0: f64) -> Result<f64> {
    let xi = MacXi::new(joint3, delta)?;
    Ok(union_terms(&xi, c1, c2, eps0).iter().sum())
}

fn union_terms(xi: &MacXi, c1: f64, c2: f64, eps0: f64) -> [f64; 4] {
    let [a, b, c] = xi.information_terms();
    [eps0, (c1 - a).exp2().min(1.0), (c2 - b).exp2().min(1.0), (c1 + c2 - c).exp2().min(1.0)]
}

#[derive(Debug, Clone)]
pub struct MacCode {
    pub codebook_x: Vec<usize>,
    pub codebook_y: Vec<usize>,
    pub rates: (u32, u32),
    decoder: Arc<TypicalSet>,
}

fn check_rates(c1: u32, c2: u32) -> Result<()> {
    if c1 > MAX_RATE_BITS || c2 > MAX_RATE_BITS {
        return Err(resource(format!("rates ({c1}, {c2}) exceed {MAX_RATE_BITS} bits")));
    }
    Ok(())
}

/// `2^{C₁}` codewords i.i.d. from `p_x`, then `2^{C₂}` from `p_y`, all from
/// the same stream.
pub fn generate_codebooks<R: Rng + ?Sized>(
    p_x: &Pmf,
    p_y: &Pmf,
    c1: u32,
    c2: u32,
    decoder: Arc<TypicalSet>,
    rng: &mut R,
) -> Result<MacCode> {
    check_rates(c1, c2)?;
    if decoder.source().arity() != 3 {
        return Err(domain("decoder set must be built on (X, Y, Z)"));
    }
    let sx = p_x.sampler();
    let sy = p_y.sampler();
    let codebook_x = (0..1usize << c1).map(|_| sx.sample_flat(rng)).collect();
    let codebook_y = (0..1usize << c2).map(|_| sy.sample_flat(rng)).collect();
    Ok(MacCode { codebook_x, codebook_y, rates: (c1, c2), decoder })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MacDecoded {
    Messages(usize, usize),
    NoCandidate,
    Ambiguous,
}

impl MacCode {
    pub fn from_codebooks(codebook_x: Vec<usize>, codebook_y: Vec<usize>, decoder: Arc<TypicalSet>) -> Result<Self> {
        let ok = |n: usize| n.is_power_of_two();
        if !ok(codebook_x.len()) || !ok(codebook_y.len()) {
            return Err(domain("codebook sizes must be powers of two"));
        }
        let shape = decoder.source().shape();
        if codebook_x.iter().any(|&x| x >= shape[0]) || codebook_y.iter().any(|&y| y >= shape[1]) {
            return Err(domain("codeword outside the input alphabet"));
        }
        let rates = (codebook_x.len().trailing_zeros(), codebook_y.len().trailing_zeros());
        Ok(MacCode { codebook_x, codebook_y, rates, decoder })
    }

    pub fn decoder_set(&self) -> &TypicalSet {
        &self.decoder
    }

    /// The unique message pair whose codewords are jointly typical with `z`.
    pub fn decode(&self, z: usize) -> MacDecoded {
        let source = self.decoder.source();
        let mut found = None;
        for (m1, &x) in self.codebook_x.iter().enumerate() {
            for (m2, &y) in self.codebook_y.iter().enumerate() {
                if self.decoder.contains_flat(source.encode(&[x, y, z])) {
                    if found.is_some() {
                        return MacDecoded::Ambiguous;
                    }
                    found = Some((m1, m2));
                }
            }
        }
        found.map_or(MacDecoded::NoCandidate, |(a, b)| MacDecoded::Messages(a, b))
    }
}

pub fn mac_decode(z: usize, code: &MacCode) -> Result<MacDecoded> {
    if z >= code.decoder.source().shape()[2] {
        return Err(domain(format!("output index {z} outside the channel alphabet")));
    }
    Ok(code.decode(z))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageChoice {
    /// Always send message pair `(0, 0)`.
    Fixed,
    /// Draw both messages uniformly per trial.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacSimulationConfig {
    pub trials: u64,
    pub master_seed: u64,
    /// Sum the channel output exactly given each codebook.
    pub exact: bool,
    pub target_eps: f64,
    pub messages: MessageChoice,
    /// When set, rates above the region's caps add a warning to the report.
    pub budget: Option<EpsilonBudget>,
}

fn draw_row<R: Rng + ?Sized>(row: &[(usize, f64)], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for &(z, p) in row {
        acc += p;
        if u < acc {
            return z;
        }
    }
    row.last().map_or(0, |e| e.0)
}

/// Error rate of random codes at integer rates `(C₁, C₂)`.
///
/// Trial `t` uses RNG stream `t` for the codebooks, then the messages (if
/// random), then the channel output. The analytic bound uses the exact
/// atypical mass as `Pr[E₀]`.
pub fn mac_simulate(
    p_x: &Pmf,
    p_y: &Pmf,
    ch: &Channel,
    rates: (u32, u32),
    delta: f64,
    config: &MacSimulationConfig,
    caps: &Caps,
) -> Result<SimulationReport> {
    if config.trials == 0 {
        return Err(domain("trials must be at least 1"));
    }
    check_rates(rates.0, rates.1)?;
    let joint3 = induced_joint(p_x, p_y, ch)?;
    let set = Arc::new(build_typical_set(&joint3, delta, caps)?);
    let tail = set.tail();
    let outcomes: Vec<f64> = (0..config.trials)
        .into_par_iter()
        .map(|t| -> Result<f64> {
            let mut rng = stream(config.master_seed, t);
            let code = generate_codebooks(p_x, p_y, rates.0, rates.1, set.clone(), &mut rng)?;
            let (m1, m2) = match config.messages {
                MessageChoice::Fixed => (0, 0),
                MessageChoice::Uniform => {
                    (rng.random_range(0..code.codebook_x.len()), rng.random_range(0..code.codebook_y.len()))
                }
            };
            let row = ch.row(&[code.codebook_x[m1], code.codebook_y[m2]]);
            let right = MacDecoded::Messages(m1, m2);
            if config.exact {
                Ok(row.iter().filter(|&&(z, _)| code.decode(z) != right).map(|e| e.1).sum::<f64>() + 0.0)
            } else {
                let z = draw_row(row, &mut rng);
                Ok(if code.decode(z) == right { 0.0 } else { 1.0 })
            }
        })
        .collect::<Result<_>>()?;
    let xi = MacXi::new(&joint3, delta)?;
    let bound: f64 = union_terms(&xi, rates.0 as f64, rates.1 as f64, tail).iter().sum();
    let mut report = if config.exact {
        SimulationReport::from_exact(&outcomes, bound, config.target_eps)
    } else {
        let failures = outcomes.iter().filter(|&&v| v > 0.0).count() as u64;
        SimulationReport::from_counts(failures, config.trials, bound, config.target_eps)
    };
    if let Some(budget) = config.budget {
        let [a, b, c] = xi.information_terms();
        let [_, e1, e2, e3] = budget.parts;
        let (c1, c2) = (rates.0 as f64, rates.1 as f64);
        if c1 > a + e1.log2() || c2 > b + e2.log2() || c1 + c2 > c + e3.log2() {
            report.warnings.push(format!("rates ({c1}, {c2}) lie outside the achievable region at delta {delta}"));
        }
    }
    Ok(report)
}
