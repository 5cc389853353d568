//! Truth-table vectorial Boolean functions `F_2^n → F_2^τ`.
//!
//! Inputs are integers `0..2^n` (bit `i` = coordinate `i`), outputs are
//! `τ`-bit words. This is the oracle object fed to the Simon simulator and
//! the carrier for ANF manipulation and low-weight reconstruction.

use std::collections::HashMap;
use std::io::{self, Read, Write};

use rayon::prelude::*;
use thiserror::Error;

use crate::bitlinalg::{canonical_basis, low_mask, BitVector, SpanBuilder};

/// Hard ceiling on the number of input bits of a truth table.
pub const MAX_INPUT_BITS: u32 = 24;

/// Default input-size cap for oracles built by experiments.
pub const DEFAULT_INPUT_CAP: u32 = 16;

#[derive(Debug, Error)]
pub enum BoolFuncError {
    #[error("{n} input bits exceeds the cap of {cap}")]
    TooManyInputs { n: u32, cap: u32 },
    #[error("output width {0} outside 1..=64")]
    BadOutputWidth(u32),
    #[error("truth table has {actual} entries, expected {expected}")]
    TableLength { expected: usize, actual: usize },
    #[error("output {value:#x} at input {input:#x} does not fit in {tau} bits")]
    OutputTooWide { input: u64, value: u64, tau: u32 },
    #[error("length mismatch: expected {expected} bits, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("{0:#x} is not in the image of the function")]
    NotInImage(u64),
    #[error("functions have different shapes")]
    ShapeMismatch,
    #[error("samples cover {have} of the {need} inputs of weight <= {d}")]
    IncompleteSamples { have: usize, need: u128, d: u32 },
    #[error("sample input {0:#x} is duplicated or heavier than the degree bound")]
    BadSample(u64),
    #[error("reconstructed coordinate has degree {found}, above the bound {bound}")]
    DegreeOverflow { found: u32, bound: u32 },
    #[error("truth table file: {0}")]
    Io(#[from] io::Error),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VectorialFunction {
    n: u32,
    tau: u32,
    table: Vec<u64>,
}

impl std::fmt::Debug for VectorialFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "VectorialFunction(n={}, tau={})", self.n, self.tau)
    }
}

fn check_shape(n: u32, tau: u32) -> Result<(), BoolFuncError> {
    if n > MAX_INPUT_BITS {
        return Err(BoolFuncError::TooManyInputs { n, cap: MAX_INPUT_BITS });
    }
    if !(1..=64).contains(&tau) {
        return Err(BoolFuncError::BadOutputWidth(tau));
    }
    Ok(())
}

impl VectorialFunction {
    pub fn new(n: u32, tau: u32, table: Vec<u64>) -> Result<Self, BoolFuncError> {
        check_shape(n, tau)?;
        let expected = 1usize << n;
        if table.len() != expected {
            return Err(BoolFuncError::TableLength {
                expected,
                actual: table.len(),
            });
        }
        let mask = low_mask(tau as usize);
        if let Some((input, &value)) = table.iter().enumerate().find(|(_, &v)| v & !mask != 0) {
            return Err(BoolFuncError::OutputTooWide {
                input: input as u64,
                value,
                tau,
            });
        }
        Ok(VectorialFunction { n, tau, table })
    }

    /// Tabulates `f` over all `2^n` inputs; outputs are masked to `tau`
    /// bits. Evaluation is spread over the rayon pool for large domains.
    pub fn from_fn<F>(n: u32, tau: u32, f: F) -> Result<Self, BoolFuncError>
    where
        F: Fn(u64) -> u64 + Sync,
    {
        check_shape(n, tau)?;
        let mask = low_mask(tau as usize);
        let size = 1u64 << n;
        let table: Vec<u64> = if n >= 10 {
            (0..size).into_par_iter().map(|x| f(x) & mask).collect()
        } else {
            (0..size).map(|x| f(x) & mask).collect()
        };
        Ok(VectorialFunction { n, tau, table })
    }

    /// Like [`VectorialFunction::from_fn`], but rejects `n` above `cap`.
    pub fn from_fn_capped<F>(n: u32, tau: u32, cap: u32, f: F) -> Result<Self, BoolFuncError>
    where
        F: Fn(u64) -> u64 + Sync,
    {
        if n > cap {
            return Err(BoolFuncError::TooManyInputs { n, cap });
        }
        Self::from_fn(n, tau, f)
    }

    pub fn zero(n: u32, tau: u32) -> Result<Self, BoolFuncError> {
        Self::new(n, tau, vec![0; 1 << n])
    }

    pub fn input_bits(&self) -> u32 {
        self.n
    }

    pub fn output_bits(&self) -> u32 {
        self.tau
    }

    pub fn table(&self) -> &[u64] {
        &self.table
    }

    pub fn domain_size(&self) -> u64 {
        1u64 << self.n
    }

    pub fn eval(&self, x: u64) -> u64 {
        self.table[x as usize]
    }

    pub fn eval_bits(&self, x: &BitVector) -> Result<BitVector, BoolFuncError> {
        self.check_input_len(x)?;
        Ok(BitVector::from_u64(
            self.eval(x.to_u64().expect("n <= 24")),
            self.tau as usize,
        ))
    }

    fn check_input_len(&self, v: &BitVector) -> Result<(), BoolFuncError> {
        if v.len() != self.n as usize {
            return Err(BoolFuncError::LengthMismatch {
                expected: self.n as usize,
                actual: v.len(),
            });
        }
        Ok(())
    }

    /// `x ↦ f(x) ⊕ f(x ⊕ a)`.
    pub fn derivative(&self, a: &BitVector) -> Result<VectorialFunction, BoolFuncError> {
        self.check_input_len(a)?;
        Ok(self.derivative_raw(a.to_u64().expect("n <= 24")))
    }

    pub fn derivative_raw(&self, a: u64) -> VectorialFunction {
        let table = (0..self.table.len())
            .map(|x| self.table[x] ^ self.table[x ^ a as usize])
            .collect();
        VectorialFunction {
            n: self.n,
            tau: self.tau,
            table,
        }
    }

    /// `f(x ⊕ s) = f(x)` for every `x`.
    pub fn is_period(&self, s: u64) -> bool {
        let s = s as usize;
        (0..self.table.len()).all(|x| x > (x ^ s) || self.table[x] == self.table[x ^ s])
    }

    /// Every period as a raw value (including zero), by exhaustive check.
    ///
    /// Candidates are restricted to the preimage of `f(0)`; a candidate
    /// already in the span of confirmed periods is accepted without a check.
    pub fn periods_bruteforce(&self) -> Vec<u64> {
        let f0 = self.table[0];
        let mut span = SpanBuilder::new(self.n.max(1) as usize);
        let width = self.n.max(1) as usize;
        for s in 1..self.table.len() as u64 {
            if self.table[s as usize] != f0 {
                continue;
            }
            let v = BitVector::from_u64(s, width);
            if span.contains(&v) {
                continue;
            }
            if self.is_period(s) {
                span.insert(&v);
            }
        }
        let basis: Vec<u64> = span.basis().iter().map(|v| v.to_u64().unwrap()).collect();
        let mut all = vec![0u64];
        for b in basis {
            let extra: Vec<u64> = all.iter().map(|&v| v ^ b).collect();
            all.extend(extra);
        }
        all.sort_unstable();
        all
    }

    /// Canonical (row-reduced) basis of the full period space; the ground
    /// truth every Simon result is compared against.
    pub fn period_space_bruteforce(&self) -> Vec<BitVector> {
        if self.n == 0 {
            return Vec::new();
        }
        let width = self.n as usize;
        let periods: Vec<BitVector> = self
            .periods_bruteforce()
            .into_iter()
            .filter(|&s| s != 0)
            .map(|s| BitVector::from_u64(s, width))
            .collect();
        canonical_basis(&periods)
    }

    /// Inputs mapped to `a`.
    pub fn preimage(&self, a: u64) -> Vec<u64> {
        (0..self.table.len() as u64)
            .filter(|&x| self.table[x as usize] == a)
            .collect()
    }

    /// Map from each output value to its preimage set.
    pub fn preimage_index(&self) -> HashMap<u64, Vec<u64>> {
        let mut index: HashMap<u64, Vec<u64>> = HashMap::new();
        for (x, &v) in self.table.iter().enumerate() {
            index.entry(v).or_default().push(x as u64);
        }
        index
    }

    /// Exact distribution of the Hadamard-basis measurement after the
    /// output register collapsed to `a`.
    pub fn preimage_spectrum(&self, a: u64) -> Result<Spectrum, BoolFuncError> {
        let omega = self.preimage(a);
        if omega.is_empty() {
            return Err(BoolFuncError::NotInImage(a));
        }
        Ok(Spectrum::of_set(self.n, &omega))
    }

    pub fn mobius_transform(&self) -> AnfTable {
        let mut coeffs = self.table.clone();
        mobius_in_place(&mut coeffs, self.n);
        AnfTable {
            n: self.n,
            tau: self.tau,
            coeffs,
        }
    }

    /// Maximum algebraic degree over all output coordinates; 0 for
    /// constant functions.
    pub fn anf_degree(&self) -> u32 {
        self.mobius_transform().degree()
    }

    /// The Boolean function `x ↦ λ · f(x)`.
    pub fn component(&self, lambda: &BitVector) -> Result<VectorialFunction, BoolFuncError> {
        if lambda.len() != self.tau as usize {
            return Err(BoolFuncError::LengthMismatch {
                expected: self.tau as usize,
                actual: lambda.len(),
            });
        }
        Ok(self.component_raw(lambda.to_u64().expect("tau <= 64")))
    }

    pub fn component_raw(&self, lambda: u64) -> VectorialFunction {
        let table = self
            .table
            .iter()
            .map(|&v| ((v & lambda).count_ones() & 1) as u64)
            .collect();
        VectorialFunction {
            n: self.n,
            tau: 1,
            table,
        }
    }

    /// `x ↦ f(x) ⊕ g(x)`.
    pub fn xor(&self, other: &VectorialFunction) -> Result<VectorialFunction, BoolFuncError> {
        if self.n != other.n || self.tau != other.tau {
            return Err(BoolFuncError::ShapeMismatch);
        }
        let table = self.table.iter().zip(&other.table).map(|(a, b)| a ^ b).collect();
        Ok(VectorialFunction {
            n: self.n,
            tau: self.tau,
            table,
        })
    }

    /// Writes the binary truth-table format: `n` and `τ` as little-endian
    /// `u32`, then `2^n` little-endian `u64` output words.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), BoolFuncError> {
        w.write_all(&self.n.to_le_bytes())?;
        w.write_all(&self.tau.to_le_bytes())?;
        for v in &self.table {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self, BoolFuncError> {
        let mut word = [0u8; 4];
        r.read_exact(&mut word)?;
        let n = u32::from_le_bytes(word);
        r.read_exact(&mut word)?;
        let tau = u32::from_le_bytes(word);
        check_shape(n, tau)?;
        let mut table = Vec::with_capacity(1 << n);
        let mut out = [0u8; 8];
        for _ in 0..(1u64 << n) {
            r.read_exact(&mut out)?;
            table.push(u64::from_le_bytes(out));
        }
        let mut trailing = [0u8; 1];
        if r.read(&mut trailing)? != 0 {
            return Err(BoolFuncError::Io(io::Error::new(
                io::ErrorKind::InvalidData,
                "trailing bytes after truth table",
            )));
        }
        Self::new(n, tau, table)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + 8 * self.table.len());
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, BoolFuncError> {
        Self::read_from(bytes)
    }
}

fn mobius_in_place(t: &mut [u64], n: u32) {
    for i in 0..n {
        let bit = 1usize << i;
        for x in 0..t.len() {
            if x & bit != 0 {
                t[x] ^= t[x ^ bit];
            }
        }
    }
}

/// In-place Walsh–Hadamard transform (unnormalised butterflies).
pub fn walsh_hadamard(t: &mut [i64]) {
    let mut h = 1;
    while h < t.len() {
        for block in (0..t.len()).step_by(2 * h) {
            for x in block..block + h {
                let (a, b) = (t[x], t[x + h]);
                t[x] = a + b;
                t[x + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Algebraic normal form: bit `c` of `coeffs[u]` is the coefficient `λ_u`
/// of the monomial `Π x_i^{u_i}` in output coordinate `c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnfTable {
    n: u32,
    tau: u32,
    coeffs: Vec<u64>,
}

impl AnfTable {
    pub fn new(n: u32, tau: u32, coeffs: Vec<u64>) -> Result<Self, BoolFuncError> {
        let f = VectorialFunction::new(n, tau, coeffs)?;
        Ok(AnfTable {
            n,
            tau,
            coeffs: f.table,
        })
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn degree(&self) -> u32 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(u, _)| u.count_ones())
            .max()
            .unwrap_or(0)
    }

    pub fn coordinate_degree(&self, c: u32) -> u32 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, &v)| v >> c & 1 == 1)
            .map(|(u, _)| u.count_ones())
            .max()
            .unwrap_or(0)
    }

    /// The Möbius transform is an involution, so this inverts
    /// [`VectorialFunction::mobius_transform`].
    pub fn to_function(&self) -> VectorialFunction {
        let mut table = self.coeffs.clone();
        mobius_in_place(&mut table, self.n);
        VectorialFunction {
            n: self.n,
            tau: self.tau,
            table,
        }
    }
}

/// Measurement distribution `P(y) = numerators[y] / denominator`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spectrum {
    n: u32,
    numerators: Vec<u64>,
    denominator: u64,
}

impl Spectrum {
    /// Spectrum of the uniform superposition over `omega`:
    /// `P(y) = (Σ_{x∈Ω} (-1)^{x·y})² / (|Ω| 2^n)`.
    pub fn of_set(n: u32, omega: &[u64]) -> Spectrum {
        let mut w = vec![0i64; 1 << n];
        for &x in omega {
            w[x as usize] = 1;
        }
        walsh_hadamard(&mut w);
        let numerators = w.into_iter().map(|c| (c * c) as u64).collect();
        Spectrum {
            n,
            numerators,
            denominator: (omega.len() as u64) << n,
        }
    }

    pub fn input_bits(&self) -> u32 {
        self.n
    }

    pub fn numerators(&self) -> &[u64] {
        &self.numerators
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    pub fn probability(&self, y: u64) -> f64 {
        self.numerators[y as usize] as f64 / self.denominator as f64
    }

    /// Outcomes with nonzero probability.
    pub fn support(&self) -> impl Iterator<Item = u64> + '_ {
        self.numerators
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(y, _)| y as u64)
    }

    /// Draws `y` given a uniform integer `r < denominator`.
    pub fn pick(&self, mut r: u64) -> u64 {
        debug_assert!(r < self.denominator);
        for (y, &c) in self.numerators.iter().enumerate() {
            if r < c {
                return y as u64;
            }
            r -= c;
        }
        unreachable!("numerators sum to the denominator")
    }
}

/// `C(m, k) mod 2` by Lucas' theorem: odd iff `k`'s bits are a submask of
/// `m`'s bits.
pub fn binomial_parity(m: u64, k: u64) -> bool {
    k & !m == 0
}

/// `#S_t = Σ_{j=0}^{t} C(n, j)`, the number of inputs of weight at most `t`.
pub fn s_set_size(n: u32, t: u32) -> u128 {
    let t = t.min(n);
    let mut binom: u128 = 1;
    let mut total: u128 = 1;
    for j in 1..=t {
        binom = binom * (n - j + 1) as u128 / j as u128;
        total += binom;
    }
    total
}

/// All inputs of weight at most `d`, in increasing order.
pub fn low_weight_inputs(n: u32, d: u32) -> Vec<u64> {
    (0..1u64 << n).filter(|x| x.count_ones() <= d).collect()
}

/// Values of a function on the low-weight set `S_d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LowWeightSamples {
    n: u32,
    tau: u32,
    d: u32,
    pairs: Vec<(u64, u64)>,
}

impl LowWeightSamples {
    pub fn new(n: u32, tau: u32, d: u32, pairs: Vec<(u64, u64)>) -> Result<Self, BoolFuncError> {
        check_shape(n, tau)?;
        let mut seen = std::collections::HashSet::new();
        for &(x, y) in &pairs {
            if x >> n != 0 || x.count_ones() > d || !seen.insert(x) {
                return Err(BoolFuncError::BadSample(x));
            }
            if y & !low_mask(tau as usize) != 0 {
                return Err(BoolFuncError::OutputTooWide {
                    input: x,
                    value: y,
                    tau,
                });
            }
        }
        Ok(LowWeightSamples { n, tau, d, pairs })
    }

    /// Restriction of `f` to `S_d`.
    pub fn restrict(f: &VectorialFunction, d: u32) -> Self {
        let pairs = low_weight_inputs(f.n, d).into_iter().map(|x| (x, f.eval(x))).collect();
        LowWeightSamples {
            n: f.n,
            tau: f.tau,
            d,
            pairs,
        }
    }

    pub fn degree_bound(&self) -> u32 {
        self.d
    }

    pub fn pairs(&self) -> &[(u64, u64)] {
        &self.pairs
    }

    pub fn is_complete(&self) -> bool {
        self.pairs.len() as u128 == s_set_size(self.n, self.d)
    }
}

/// Rebuilds the unique degree-≤d function from its values on `S_d`:
///
/// `g(x) = ⊕_{y ⪯ x, wt(y) ≤ d} g(y) · [Σ_{i=0}^{d-wt(y)} C(wt(x)-wt(y), i) mod 2]`
///
/// applied to all output coordinates at once.
pub fn recover_from_low_weight(samples: &LowWeightSamples) -> Result<VectorialFunction, BoolFuncError> {
    let n = samples.n;
    let d = samples.d.min(n);
    if !samples.is_complete() {
        return Err(BoolFuncError::IncompleteSamples {
            have: samples.pairs.len(),
            need: s_set_size(n, d),
            d,
        });
    }
    let mut known = vec![0u64; 1 << n];
    for &(x, y) in &samples.pairs {
        known[x as usize] = y;
    }

    // weight[m][t] = Σ_{i=0}^{t} C(m, i) mod 2
    let weight: Vec<Vec<bool>> = (0..=n as u64)
        .map(|m| {
            (0..=d as u64)
                .map(|t| (0..=t).filter(|&i| binomial_parity(m, i)).count() % 2 == 1)
                .collect()
        })
        .collect();

    let table: Vec<u64> = (0..1u64 << n)
        .map(|x| {
            let wx = x.count_ones();
            let mut acc = 0u64;
            // walk every submask y of x, including 0
            let mut y = x;
            loop {
                let wy = y.count_ones();
                if wy <= d && weight[(wx - wy) as usize][(d - wy) as usize] {
                    acc ^= known[y as usize];
                }
                if y == 0 {
                    break;
                }
                y = (y - 1) & x;
            }
            acc
        })
        .collect();
    let f = VectorialFunction {
        n,
        tau: samples.tau,
        table,
    };
    let found = f.anf_degree();
    if found > d {
        return Err(BoolFuncError::DegreeOverflow { found, bound: d });
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(n: u32, tau: u32, g: impl Fn(u64) -> u64 + Sync) -> VectorialFunction {
        VectorialFunction::from_fn(n, tau, g).unwrap()
    }

    #[test]
    fn shape_checks() {
        assert!(matches!(
            VectorialFunction::new(3, 4, vec![0; 7]),
            Err(BoolFuncError::TableLength { .. })
        ));
        assert!(matches!(
            VectorialFunction::new(1, 2, vec![0, 4]),
            Err(BoolFuncError::OutputTooWide { .. })
        ));
        assert!(matches!(
            VectorialFunction::zero(25, 1),
            Err(BoolFuncError::TooManyInputs { .. })
        ));
        assert!(matches!(
            VectorialFunction::from_fn_capped(17, 1, DEFAULT_INPUT_CAP, |_| 0),
            Err(BoolFuncError::TooManyInputs { .. })
        ));
    }

    #[test]
    fn derivative_examples() {
        let g = f(5, 5, |x| (x * 7 + 3) % 32);
        let d0 = g.derivative(&BitVector::zeros(5)).unwrap();
        assert!(d0.table().iter().all(|&v| v == 0));

        // linear: x ↦ rotate-and-xor
        let lin = f(5, 5, |x| x ^ ((x << 1 | x >> 4) & 31));
        let a = 0b10110;
        let da = lin.derivative_raw(a);
        let c = lin.eval(a) ^ lin.eval(0);
        assert!(da.table().iter().all(|&v| v == c));

        assert!(matches!(
            g.derivative(&BitVector::zeros(4)),
            Err(BoolFuncError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn period_space_examples() {
        let inj = f(6, 6, |x| x ^ 0b101010);
        assert!(inj.period_space_bruteforce().is_empty());

        // ignores the top input bit
        let g = f(6, 4, |x| (((x & 0b11111) * 13) % 16) ^ (x & 1));
        let expected = g.period_space_bruteforce();
        assert!(expected.contains(&BitVector::unit(6, 5)));

        let constant = f(8, 3, |_| 5);
        assert_eq!(constant.period_space_bruteforce().len(), 8);
    }

    #[test]
    fn spectrum_examples() {
        // constant: Ω is everything, all mass on y = 0
        let c = f(4, 2, |_| 1);
        let s = c.preimage_spectrum(1).unwrap();
        assert_eq!(s.numerators()[0], s.denominator());
        assert!(matches!(c.preimage_spectrum(0), Err(BoolFuncError::NotInImage(0))));

        // unique period 0b101: uniform on y·s = 0
        let period = 0b101u64;
        let g = f(3, 3, move |x| x.min(x ^ period));
        let s = g.preimage_spectrum(g.eval(2)).unwrap();
        for y in 0..8u64 {
            let orth = (y & period).count_ones().is_multiple_of(2);
            assert_eq!(s.probability(y), if orth { 0.25 } else { 0.0 });
        }
    }

    #[test]
    fn spectrum_of_three_element_set_matches_direct_sum() {
        let omega = [0b001u64, 0b010, 0b111];
        let s = Spectrum::of_set(3, &omega);
        for y in 0..8u64 {
            let sum: i64 = omega
                .iter()
                .map(|x| if (x & y).count_ones() % 2 == 0 { 1 } else { -1 })
                .sum();
            assert_eq!(s.numerators()[y as usize], (sum * sum) as u64);
        }
        assert_eq!(s.denominator(), 3 * 8);
        assert_eq!(s.numerators().iter().sum::<u64>(), s.denominator());
    }

    #[test]
    fn mobius_examples() {
        let zero = VectorialFunction::zero(4, 1).unwrap();
        assert!(zero.mobius_transform().coeffs().iter().all(|&c| c == 0));
        assert_eq!(zero.anf_degree(), 0);

        let x1x2 = f(4, 1, |x| (x & 1) & (x >> 1 & 1));
        let anf = x1x2.mobius_transform();
        assert_eq!(anf.coeffs().iter().filter(|&&c| c != 0).count(), 1);
        assert_eq!(anf.degree(), 2);

        let g = f(6, 3, |x| (x * x + 5 * x) % 8);
        assert_eq!(g.mobius_transform().to_function(), g);
    }

    #[test]
    fn binomial_parity_examples() {
        assert!(binomial_parity(9, 0));
        assert!(binomial_parity(3, 1));
        assert!(!binomial_parity(4, 2));
        assert!(!binomial_parity(2, 5));
    }

    #[test]
    fn s_set_size_examples() {
        assert_eq!(s_set_size(10, 0), 1);
        assert_eq!(s_set_size(64, 3), 43745);
        assert_eq!(s_set_size(6, 6), 64);
        assert_eq!(s_set_size(8, 2), 37);
    }

    #[test]
    fn component_examples() {
        let g = f(5, 4, |x| (x * 11 + 2) % 16);
        let zero = g.component(&BitVector::zeros(4)).unwrap();
        assert!(zero.table().iter().all(|&v| v == 0));
        let e2 = g.component(&BitVector::unit(4, 2)).unwrap();
        for x in 0..32 {
            assert_eq!(e2.eval(x), g.eval(x) >> 2 & 1);
        }
        assert!(g.component(&BitVector::zeros(3)).is_err());
    }

    #[test]
    fn low_weight_full_samples_are_identity() {
        let g = f(4, 3, |x| (x * 5 + 1) % 8);
        let samples = LowWeightSamples::restrict(&g, 4);
        assert_eq!(recover_from_low_weight(&samples).unwrap(), g);
    }

    #[test]
    fn low_weight_errors() {
        let g = f(4, 1, |x| x & 1);
        let mut pairs = LowWeightSamples::restrict(&g, 1).pairs().to_vec();
        pairs.pop();
        let partial = LowWeightSamples::new(4, 1, 1, pairs).unwrap();
        assert!(matches!(
            recover_from_low_weight(&partial),
            Err(BoolFuncError::IncompleteSamples { .. })
        ));
        assert!(matches!(
            LowWeightSamples::new(4, 1, 1, vec![(0b11, 0)]),
            Err(BoolFuncError::BadSample(3))
        ));
        assert!(matches!(
            LowWeightSamples::new(4, 1, 1, vec![(1, 0), (1, 1)]),
            Err(BoolFuncError::BadSample(1))
        ));
    }

    #[test]
    fn truth_table_file_round_trip() {
        let g = f(5, 12, |x| x * 97 % 4096);
        let bytes = g.to_bytes();
        assert_eq!(bytes.len(), 8 + 32 * 8);
        assert_eq!(&bytes[..8], &[5, 0, 0, 0, 12, 0, 0, 0]);
        assert_eq!(VectorialFunction::from_bytes(&bytes).unwrap(), g);
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(VectorialFunction::from_bytes(&extra).is_err());
        assert!(VectorialFunction::from_bytes(&bytes[..20]).is_err());
    }
}
