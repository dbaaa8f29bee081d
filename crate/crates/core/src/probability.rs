//! Exact finite distributions and channels.
//!
//! A [`JointPmf`] is a distribution over the product of one to three named
//! alphabets. Only cells with positive mass are stored, ordered by their
//! row-major (last axis fastest) flat index, so n-fold extensions whose dense
//! product alphabet is far larger than their support stay enumerable.
//! [`Pmf`] is the arity-one special case and derefs to a `JointPmf`.

use std::collections::{BTreeMap, HashSet};
use std::ops::Deref;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, resource, Error, Result};

/// Tolerance on total mass (and per-row mass for channels).
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Enumeration limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    /// Maximum number of symbols in a single alphabet.
    pub alphabet: usize,
    /// Maximum number of enumerated entries (support cells, typical-set
    /// members, channel transitions).
    pub enumeration: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { alphabet: 1 << 20, enumeration: 1 << 24 }
    }
}

/// Ordered set of distinct symbol labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<I, S>(symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(domain("alphabet must contain at least one symbol"));
        }
        let mut seen = HashSet::with_capacity(symbols.len());
        for s in &symbols {
            if !seen.insert(s.as_str()) {
                return Err(domain(format!("duplicate symbol label {s:?}")));
            }
        }
        Ok(Alphabet { symbols })
    }

    /// Symbols `"0"`, `"1"`, ..., `"k-1"`.
    pub fn range(k: usize) -> Self {
        assert!(k >= 1, "alphabet size must be positive");
        Alphabet { symbols: (0..k).map(|i| i.to_string()).collect() }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn symbol(&self, i: usize) -> &str {
        &self.symbols[i]
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == label)
    }

    /// n-fold Cartesian power in lexicographic order (first position slowest).
    ///
    /// Labels are concatenated; if any label is longer than one character the
    /// components are joined with `,` so the result stays unambiguous.
    pub fn power(&self, n: usize, caps: &Caps) -> Result<Alphabet> {
        if n == 0 {
            return Err(domain("blocklength must be positive"));
        }
        let k = self.len();
        let size = checked_pow(k, n)
            .filter(|&s| s <= caps.alphabet)
            .ok_or_else(|| resource(format!("alphabet of size {k}^{n} exceeds cap {}", caps.alphabet)))?;
        let sep = if self.symbols.iter().all(|s| s.chars().count() == 1) { "" } else { "," };
        let mut symbols = Vec::with_capacity(size);
        let mut digits = vec![0usize; n];
        for _ in 0..size {
            let parts: Vec<&str> = digits.iter().map(|&d| self.symbols[d].as_str()).collect();
            symbols.push(parts.join(sep));
            for pos in (0..n).rev() {
                digits[pos] += 1;
                if digits[pos] < k {
                    break;
                }
                digits[pos] = 0;
            }
        }
        Ok(Alphabet { symbols })
    }
}

fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// A named alphabet, one coordinate of a joint distribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Axis {
    pub name: String,
    pub alphabet: Alphabet,
}

impl Axis {
    pub fn new(name: impl Into<String>, alphabet: Alphabet) -> Self {
        Axis { name: name.into(), alphabet }
    }
}

/// Joint probability mass function over one to three named axes.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    axes: Vec<Axis>,
    shape: Vec<usize>,
    /// `(flat index, mass)` for positive-mass cells, sorted by index.
    entries: Vec<(usize, f64)>,
}

fn validate_axes(axes: &[Axis]) -> Result<Vec<usize>> {
    if axes.is_empty() || axes.len() > 3 {
        return Err(domain(format!("axes: arity must be 1, 2 or 3 (got {})", axes.len())));
    }
    let mut names = HashSet::new();
    for a in axes {
        if !names.insert(a.name.as_str()) {
            return Err(domain(format!("axes: duplicate axis name {:?}", a.name)));
        }
    }
    let shape: Vec<usize> = axes.iter().map(|a| a.alphabet.len()).collect();
    shape
        .iter()
        .try_fold(1usize, |acc, &k| acc.checked_mul(k))
        .ok_or_else(|| resource("product alphabet size overflows"))?;
    Ok(shape)
}

fn check_total(total: f64, what: &str) -> Result<()> {
    if (total - 1.0).abs() > MASS_TOLERANCE {
        return Err(domain(format!("{what}: masses sum to {total}, expected 1")));
    }
    Ok(())
}

impl JointPmf {
    /// Builds from a dense row-major mass vector.
    pub fn from_dense(axes: Vec<Axis>, mass: &[f64]) -> Result<Self> {
        let shape = validate_axes(&axes)?;
        let cells: usize = shape.iter().product();
        if mass.len() != cells {
            return Err(domain(format!("mass: expected {cells} entries, got {}", mass.len())));
        }
        let mut entries = Vec::new();
        let mut total = 0.0;
        for (i, &m) in mass.iter().enumerate() {
            if !m.is_finite() || m < 0.0 {
                return Err(domain(format!("mass[{i}]: {m} is not a nonnegative number")));
            }
            total += m;
            if m > 0.0 {
                entries.push((i, m));
            }
        }
        check_total(total, "mass")?;
        Ok(JointPmf { axes, shape, entries })
    }

    /// Builds from sparse `(flat index, mass)` pairs; duplicates are summed.
    pub fn from_entries(axes: Vec<Axis>, entries: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let shape = validate_axes(&axes)?;
        let cells: usize = shape.iter().product();
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        for (i, m) in entries {
            if i >= cells {
                return Err(domain(format!("mass: flat index {i} out of range {cells}")));
            }
            if !m.is_finite() || m < 0.0 {
                return Err(domain(format!("mass: {m} at index {i} is not a nonnegative number")));
            }
            *acc.entry(i).or_insert(0.0) += m;
        }
        let entries: Vec<(usize, f64)> = acc.into_iter().filter(|&(_, m)| m > 0.0).collect();
        check_total(entries.iter().map(|e| e.1).sum(), "mass")?;
        Ok(JointPmf { axes, shape, entries })
    }

    /// Builds from labelled tuples, e.g. `(vec!["a", "0"], 0.5)`.
    pub fn from_labeled<'a>(
        axes: Vec<Axis>,
        items: impl IntoIterator<Item = (Vec<&'a str>, f64)>,
    ) -> Result<Self> {
        let shape = validate_axes(&axes)?;
        let mut flat = Vec::new();
        for (labels, m) in items {
            if labels.len() != axes.len() {
                return Err(domain(format!("tuple {labels:?} has wrong arity")));
            }
            let mut idx = 0usize;
            for ((axis, k), label) in axes.iter().zip(&shape).zip(&labels) {
                let pos = axis
                    .alphabet
                    .index_of(label)
                    .ok_or_else(|| domain(format!("symbol {label:?} not in axis {:?}", axis.name)))?;
                idx = idx * k + pos;
            }
            flat.push((idx, m));
        }
        Self::from_entries(axes, flat)
    }

    /// Same axes, new support. Used for smoothing witnesses.
    pub fn with_entries(&self, entries: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        Self::from_entries(self.axes.clone(), entries)
    }

    pub fn arity(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// Number of cells of the full product alphabet.
    pub fn total_cells(&self) -> usize {
        self.shape.iter().product()
    }

    /// log2 of the full product alphabet size.
    pub fn log_alphabet(&self) -> f64 {
        self.shape.iter().map(|&k| (k as f64).log2()).sum()
    }

    pub fn axis_index(&self, name: &str) -> Result<usize> {
        self.axes
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| domain(format!("unknown axis {name:?}")))
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn masses(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.1)
    }

    pub fn encode(&self, tuple: &[usize]) -> usize {
        debug_assert_eq!(tuple.len(), self.shape.len());
        tuple.iter().zip(&self.shape).fold(0, |acc, (&t, &k)| acc * k + t)
    }

    pub fn decode(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.shape.len()];
        for (slot, &k) in out.iter_mut().zip(&self.shape).rev() {
            *slot = flat % k;
            flat /= k;
        }
        out
    }

    pub fn mass_flat(&self, flat: usize) -> f64 {
        match self.entries.binary_search_by_key(&flat, |e| e.0) {
            Ok(pos) => self.entries[pos].1,
            Err(_) => 0.0,
        }
    }

    pub fn mass_of(&self, tuple: &[usize]) -> f64 {
        self.mass_flat(self.encode(tuple))
    }

    pub fn labels(&self, flat: usize) -> Vec<&str> {
        self.decode(flat)
            .into_iter()
            .zip(&self.axes)
            .map(|(i, a)| a.alphabet.symbol(i))
            .collect()
    }

    /// Dense row-major masses; fails if the product alphabet exceeds the cap.
    pub fn to_dense(&self, caps: &Caps) -> Result<Vec<f64>> {
        let cells = self.total_cells();
        if cells > caps.enumeration {
            return Err(resource(format!("dense form has {cells} cells, cap {}", caps.enumeration)));
        }
        let mut out = vec![0.0; cells];
        for &(i, m) in &self.entries {
            out[i] = m;
        }
        Ok(out)
    }

    /// Marginal on the named axes; axis order of `self` is preserved.
    pub fn marginalize(&self, keep: &[&str]) -> Result<JointPmf> {
        if keep.is_empty() {
            return Err(domain("marginalize: keep set must be nonempty"));
        }
        let mut idx = Vec::with_capacity(keep.len());
        for name in keep {
            idx.push(self.axis_index(name)?);
        }
        idx.sort_unstable();
        idx.dedup();
        Ok(self.marginalize_axes(&idx))
    }

    /// Marginal on axis positions (sorted ascending, deduplicated).
    pub(crate) fn marginalize_axes(&self, keep: &[usize]) -> JointPmf {
        if keep.len() == self.arity() {
            return self.clone();
        }
        let axes: Vec<Axis> = keep.iter().map(|&i| self.axes[i].clone()).collect();
        let shape: Vec<usize> = keep.iter().map(|&i| self.shape[i]).collect();
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        for &(flat, m) in &self.entries {
            let t = self.decode(flat);
            let j = keep.iter().zip(&shape).fold(0, |a, (&i, &k)| a * k + t[i]);
            *acc.entry(j).or_insert(0.0) += m;
        }
        JointPmf { axes, shape, entries: acc.into_iter().collect() }
    }

    /// Distribution of the remaining axes given `axis = value`.
    pub fn condition(&self, axis: &str, value: &str) -> Result<JointPmf> {
        let a = self.axis_index(axis)?;
        let v = self.axes[a]
            .alphabet
            .index_of(value)
            .ok_or_else(|| domain(format!("symbol {value:?} not in axis {axis:?}")))?;
        self.condition_index(a, v)
    }

    pub fn condition_index(&self, axis: usize, value: usize) -> Result<JointPmf> {
        if self.arity() < 2 {
            return Err(domain("condition: need at least two axes"));
        }
        let rest: Vec<usize> = (0..self.arity()).filter(|&i| i != axis).collect();
        let axes: Vec<Axis> = rest.iter().map(|&i| self.axes[i].clone()).collect();
        let shape: Vec<usize> = rest.iter().map(|&i| self.shape[i]).collect();
        let mut picked = Vec::new();
        let mut marginal = 0.0;
        for &(flat, m) in &self.entries {
            let t = self.decode(flat);
            if t[axis] == value {
                let j = rest.iter().zip(&shape).fold(0, |acc, (&i, &k)| acc * k + t[i]);
                picked.push((j, m));
                marginal += m;
            }
        }
        if marginal <= 0.0 {
            return Err(domain(format!(
                "cannot condition on zero-probability value {:?} of axis {:?}",
                self.axes[axis].alphabet.symbol(value),
                self.axes[axis].name
            )));
        }
        for e in &mut picked {
            e.1 /= marginal;
        }
        picked.sort_unstable_by_key(|e| e.0);
        Ok(JointPmf { axes, shape, entries: picked })
    }

    /// Rows of the conditional distribution of `target` given `given`.
    ///
    /// Only rows with positive marginal mass are returned, in alphabet order.
    pub fn conditional_rows(&self, target: &str, given: &str) -> Result<Vec<ConditionalRow>> {
        let t = self.axis_index(target)?;
        let g = self.axis_index(given)?;
        if t == g {
            return Err(domain("target and given axes must differ"));
        }
        let pair = self.marginalize_axes(&{
            let mut v = vec![t, g];
            v.sort_unstable();
            v
        });
        let (ti, gi) = if t < g { (0, 1) } else { (1, 0) };
        let mut rows: BTreeMap<usize, Vec<(usize, usize, f64)>> = BTreeMap::new();
        for &(flat, m) in pair.entries() {
            let tup = pair.decode(flat);
            rows.entry(tup[gi]).or_default().push((tup[ti], flat, m));
        }
        Ok(rows
            .into_iter()
            .map(|(y, cells)| {
                let weight: f64 = cells.iter().map(|c| c.2).sum();
                ConditionalRow {
                    given: y,
                    weight,
                    cells: cells.into_iter().map(|(x, flat, m)| (x, flat, m / weight)).collect(),
                }
            })
            .collect())
    }

    /// Independent product; the axes of `q` follow those of `self`.
    pub fn product(&self, q: &JointPmf) -> Result<JointPmf> {
        let mut axes = self.axes.clone();
        axes.extend(q.axes.iter().cloned());
        let shape = validate_axes(&axes)?;
        let qcells = q.total_cells();
        let mut entries = Vec::with_capacity(self.entries.len() * q.entries.len());
        for &(i, a) in &self.entries {
            for &(j, b) in &q.entries {
                entries.push((i * qcells + j, a * b));
            }
        }
        Ok(JointPmf { axes, shape, entries })
    }

    /// n i.i.d. copies; each axis becomes its n-fold power alphabet.
    pub fn iid_extension(&self, n: usize, caps: &Caps) -> Result<JointPmf> {
        if n == 0 {
            return Err(domain("blocklength must be positive"));
        }
        if n == 1 {
            return Ok(self.clone());
        }
        let support = self.entries.len();
        checked_pow(support, n)
            .filter(|&s| s <= caps.enumeration)
            .ok_or_else(|| resource(format!("support {support}^{n} exceeds enumeration cap {}", caps.enumeration)))?;
        let axes: Vec<Axis> = self
            .axes
            .iter()
            .map(|a| Ok(Axis::new(a.name.clone(), a.alphabet.power(n, caps)?)))
            .collect::<Result<_>>()?;
        let shape = validate_axes(&axes)?;
        let base: Vec<(Vec<usize>, f64)> = self.entries.iter().map(|&(f, m)| (self.decode(f), m)).collect();
        let mut current: Vec<(Vec<usize>, f64)> = base.clone();
        for _ in 1..n {
            let mut next = Vec::with_capacity(current.len() * base.len());
            for (t, m) in &current {
                for (b, p) in &base {
                    let tup: Vec<usize> = t.iter().zip(b).zip(&self.shape).map(|((&x, &y), &k)| x * k + y).collect();
                    next.push((tup, m * p));
                }
            }
            current = next;
        }
        let mut entries: Vec<(usize, f64)> = current
            .into_iter()
            .map(|(t, m)| (t.iter().zip(&shape).fold(0, |acc, (&x, &k)| acc * k + x), m))
            .collect();
        entries.sort_unstable_by_key(|e| e.0);
        Ok(JointPmf { axes, shape, entries })
    }

    /// One inverse-CDF draw, returning the symbol tuple.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let u: f64 = rng.random();
        let mut cum = 0.0;
        for &(flat, m) in &self.entries {
            cum += m;
            if u < cum {
                return self.decode(flat);
            }
        }
        self.decode(self.entries.last().expect("nonempty support").0)
    }

    pub fn sampler(&self) -> Sampler {
        let mut cum = 0.0;
        let cdf = self
            .entries
            .iter()
            .map(|&(flat, m)| {
                cum += m;
                (cum, flat)
            })
            .collect();
        Sampler { cdf }
    }

    /// Whether `other` is over the same axes (names and labels).
    pub fn same_axes(&self, other: &JointPmf) -> bool {
        self.axes == other.axes
    }

    pub fn to_file(&self, caps: &Caps) -> Result<PmfFile> {
        Ok(PmfFile {
            axes: self.axes.iter().map(AxisSpec::from).collect(),
            mass: self.to_dense(caps)?,
        })
    }
}

/// One row `y` of a conditional distribution `P_{X|Y=y}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalRow {
    pub given: usize,
    /// Marginal mass `P_Y(y)`.
    pub weight: f64,
    /// `(target index, flat index in the two-axis marginal, conditional mass)`.
    pub cells: Vec<(usize, usize, f64)>,
}

/// Precomputed cumulative table for repeated draws.
#[derive(Debug, Clone)]
pub struct Sampler {
    cdf: Vec<(f64, usize)>,
}

impl Sampler {
    /// Flat index of one inverse-CDF draw.
    pub fn sample_flat<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let pos = self.cdf.partition_point(|&(c, _)| c <= u);
        self.cdf[pos.min(self.cdf.len() - 1)].1
    }
}

/// Total-variation distance `(1/2) Σ |p - q|`.
pub fn tv_distance(p: &JointPmf, q: &JointPmf) -> Result<f64> {
    if !p.same_axes(q) {
        return Err(domain("tv_distance: distributions are over different alphabets"));
    }
    let (a, b) = (p.entries(), q.entries());
    let (mut i, mut j) = (0, 0);
    let mut l1 = 0.0;
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(&(fi, mi)), Some(&(fj, mj))) if fi == fj => {
                l1 += (mi - mj).abs();
                i += 1;
                j += 1;
            }
            (Some(&(fi, mi)), Some(&(fj, _))) if fi < fj => {
                l1 += mi;
                i += 1;
            }
            (Some(&(_, mi)), None) => {
                l1 += mi;
                i += 1;
            }
            (_, Some(&(_, mj))) => {
                l1 += mj;
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    Ok((0.5 * l1).min(1.0))
}

/// Distribution over a single alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf(JointPmf);

impl Pmf {
    pub fn new(alphabet: Alphabet, mass: &[f64]) -> Result<Self> {
        Ok(Pmf(JointPmf::from_dense(vec![Axis::new("X", alphabet)], mass)?))
    }

    pub fn named(name: &str, alphabet: Alphabet, mass: &[f64]) -> Result<Self> {
        Ok(Pmf(JointPmf::from_dense(vec![Axis::new(name, alphabet)], mass)?))
    }

    pub fn uniform(k: usize) -> Self {
        Pmf::new(Alphabet::range(k), &vec![1.0 / k as f64; k]).expect("uniform is valid")
    }

    /// Bernoulli on `{"0","1"}` with `P(1) = p`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(domain(format!("bernoulli parameter {p} outside [0,1]")));
        }
        Pmf::new(Alphabet::range(2), &[1.0 - p, p])
    }

    pub fn point(k: usize, at: usize) -> Self {
        let mut mass = vec![0.0; k];
        mass[at] = 1.0;
        Pmf::new(Alphabet::range(k), &mass).expect("point mass is valid")
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.0.axes()[0].alphabet
    }

    pub fn name(&self) -> &str {
        &self.0.axes()[0].name
    }

    pub fn prob(&self, i: usize) -> f64 {
        self.0.mass_flat(i)
    }

    pub fn mass(&self) -> Vec<f64> {
        (0..self.alphabet().len()).map(|i| self.prob(i)).collect()
    }

    pub fn renamed(&self, name: &str) -> Pmf {
        let mut j = self.0.clone();
        j.axes[0].name = name.to_string();
        Pmf(j)
    }

    pub fn as_joint(&self) -> &JointPmf {
        &self.0
    }

    pub fn into_joint(self) -> JointPmf {
        self.0
    }

    pub fn iid_extension(&self, n: usize, caps: &Caps) -> Result<Pmf> {
        Ok(Pmf(self.0.iid_extension(n, caps)?))
    }
}

impl Deref for Pmf {
    type Target = JointPmf;
    fn deref(&self) -> &JointPmf {
        &self.0
    }
}

impl TryFrom<JointPmf> for Pmf {
    type Error = Error;
    fn try_from(j: JointPmf) -> Result<Pmf> {
        if j.arity() != 1 {
            return Err(domain(format!("expected a single-axis distribution, got arity {}", j.arity())));
        }
        Ok(Pmf(j))
    }
}

/// Transition law from one or two input alphabets to an output alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    inputs: Vec<Axis>,
    output: Axis,
    /// Sparse rows in row-major input order: `(output index, probability)`.
    rows: Vec<Vec<(usize, f64)>>,
}

impl Channel {
    pub fn from_dense(inputs: Vec<Axis>, output: Axis, rows: &[Vec<f64>]) -> Result<Self> {
        let k = output.alphabet.len();
        let sparse = rows
            .iter()
            .enumerate()
            .map(|(r, row)| {
                if row.len() != k {
                    return Err(domain(format!("rows[{r}]: expected {k} entries, got {}", row.len())));
                }
                Ok(row.iter().enumerate().filter(|e| *e.1 != 0.0).map(|(z, &p)| (z, p)).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_sparse(inputs, output, sparse)
    }

    pub fn from_sparse(inputs: Vec<Axis>, output: Axis, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        if inputs.is_empty() || inputs.len() > 2 {
            return Err(domain(format!("inputs: a channel has one or two input axes (got {})", inputs.len())));
        }
        let expected: usize = inputs.iter().map(|a| a.alphabet.len()).product();
        if rows.len() != expected {
            return Err(domain(format!("rows: expected {expected} rows, got {}", rows.len())));
        }
        let k = output.alphabet.len();
        let mut clean = Vec::with_capacity(rows.len());
        for (r, mut row) in rows.into_iter().enumerate() {
            let mut total = 0.0;
            for &(z, p) in &row {
                if z >= k || !p.is_finite() || p < 0.0 {
                    return Err(domain(format!("rows[{r}]: invalid entry ({z}, {p})")));
                }
                total += p;
            }
            check_total(total, &format!("rows[{r}]"))?;
            row.retain(|e| e.1 > 0.0);
            row.sort_unstable_by_key(|e| e.0);
            clean.push(row);
        }
        Ok(Channel { inputs, output, rows: clean })
    }

    /// Deterministic channel `z = f(inputs)`.
    pub fn deterministic(inputs: Vec<Axis>, output: Axis, f: impl Fn(&[usize]) -> usize) -> Result<Self> {
        let shape: Vec<usize> = inputs.iter().map(|a| a.alphabet.len()).collect();
        let count: usize = shape.iter().product();
        let rows = (0..count)
            .map(|r| {
                let t = decode_with(&shape, r);
                vec![(f(&t), 1.0)]
            })
            .collect();
        Self::from_sparse(inputs, output, rows)
    }

    pub fn inputs(&self) -> &[Axis] {
        &self.inputs
    }

    pub fn output(&self) -> &Axis {
        &self.output
    }

    pub fn input_shape(&self) -> Vec<usize> {
        self.inputs.iter().map(|a| a.alphabet.len()).collect()
    }

    pub fn row(&self, input: &[usize]) -> &[(usize, f64)] {
        let shape = self.input_shape();
        let r = input.iter().zip(&shape).fold(0, |acc, (&i, &k)| acc * k + i);
        &self.rows[r]
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    pub fn prob(&self, input: &[usize], z: usize) -> f64 {
        let row = self.row(input);
        match row.binary_search_by_key(&z, |e| e.0) {
            Ok(p) => row[p].1,
            Err(_) => 0.0,
        }
    }

    /// Memoryless n-fold extension: the row of `(x^n, y^n)` at `z^n` is
    /// `Π P(z_i | x_i, y_i)`.
    pub fn iid_extension(&self, n: usize, caps: &Caps) -> Result<Channel> {
        if n == 0 {
            return Err(domain("blocklength must be positive"));
        }
        if n == 1 {
            return Ok(self.clone());
        }
        let inputs: Vec<Axis> = self
            .inputs
            .iter()
            .map(|a| Ok(Axis::new(a.name.clone(), a.alphabet.power(n, caps)?)))
            .collect::<Result<_>>()?;
        let output = Axis::new(self.output.name.clone(), self.output.alphabet.power(n, caps)?);
        let base_shape = self.input_shape();
        let ext_shape: Vec<usize> = inputs.iter().map(|a| a.alphabet.len()).collect();
        let row_count: usize = ext_shape.iter().product();
        let kz = self.output.alphabet.len();
        let mut budget = caps.enumeration;
        let mut rows = Vec::with_capacity(row_count);
        for r in 0..row_count {
            let tuple = decode_with(&ext_shape, r);
            // Per-axis digits, first letter most significant.
            let letters: Vec<Vec<usize>> = tuple
                .iter()
                .zip(&base_shape)
                .map(|(&v, &k)| {
                    let mut d = decode_with(&vec![k; n], v);
                    d.truncate(n);
                    d
                })
                .collect();
            let mut acc: Vec<(usize, f64)> = vec![(0, 1.0)];
            for i in 0..n {
                let input: Vec<usize> = letters.iter().map(|d| d[i]).collect();
                let row = self.row(&input);
                let mut next = Vec::with_capacity(acc.len() * row.len());
                for &(z, p) in &acc {
                    for &(zi, q) in row {
                        next.push((z * kz + zi, p * q));
                    }
                }
                acc = next;
            }
            budget = budget
                .checked_sub(acc.len())
                .ok_or_else(|| resource(format!("channel extension exceeds enumeration cap {}", caps.enumeration)))?;
            acc.sort_unstable_by_key(|e| e.0);
            rows.push(acc);
        }
        Ok(Channel { inputs, output, rows })
    }

    pub fn to_file(&self) -> ChannelFile {
        let k = self.output.alphabet.len();
        ChannelFile {
            inputs: self.inputs.iter().map(AxisSpec::from).collect(),
            output: AxisSpec::from(&self.output),
            rows: self
                .rows
                .iter()
                .map(|row| {
                    let mut dense = vec![0.0; k];
                    for &(z, p) in row {
                        dense[z] = p;
                    }
                    dense
                })
                .collect(),
        }
    }
}

pub(crate) fn decode_with(shape: &[usize], mut flat: usize) -> Vec<usize> {
    let mut out = vec![0; shape.len()];
    for (slot, &k) in out.iter_mut().zip(shape).rev() {
        *slot = flat % k;
        flat /= k;
    }
    out
}

/// JSON form of a named axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub name: String,
    pub symbols: Vec<String>,
}

impl From<&Axis> for AxisSpec {
    fn from(a: &Axis) -> Self {
        AxisSpec { name: a.name.clone(), symbols: a.alphabet.symbols().to_vec() }
    }
}

impl AxisSpec {
    fn to_axis(&self, field: &str) -> Result<Axis> {
        let alphabet = Alphabet::new(self.symbols.iter().cloned())
            .map_err(|e| domain(format!("{field}.symbols: {e}")))?;
        Ok(Axis::new(self.name.clone(), alphabet))
    }
}

/// `{"axes":[{"name":..,"symbols":[..]},..],"mass":[..]}`, mass row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PmfFile {
    pub axes: Vec<AxisSpec>,
    pub mass: Vec<f64>,
}

impl PmfFile {
    pub fn to_joint(&self) -> Result<JointPmf> {
        let axes = self
            .axes
            .iter()
            .enumerate()
            .map(|(i, a)| a.to_axis(&format!("axes[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        JointPmf::from_dense(axes, &self.mass)
    }
}

/// `{"inputs":[..],"output":{..},"rows":[[..],..]}`, rows row-major in the inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub inputs: Vec<AxisSpec>,
    pub output: AxisSpec,
    pub rows: Vec<Vec<f64>>,
}

impl ChannelFile {
    pub fn to_channel(&self) -> Result<Channel> {
        let inputs = self
            .inputs
            .iter()
            .enumerate()
            .map(|(i, a)| a.to_axis(&format!("inputs[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        Channel::from_dense(inputs, self.output.to_axis("output")?, &self.rows)
    }
}
