//! Toy-parameter Farfalle and its SAE, SIV and WBC modes.
//!
//! Block values are `b`-bit integers; bit `i` of block `t` sits at string
//! position `t·b + i`. A [`MessageSequence`] stores its strings in
//! processing order, so the sequence written `X ∘ Y` is `[Y, X]`.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::bitlinalg::{BitMatrix, BitVector};
use crate::finitefield::{is_primitive, least_primitive};
use crate::random_permutation;

pub const MIN_BLOCK_BITS: u32 = 4;
pub const MAX_BLOCK_BITS: u32 = 16;

/// Masks `roll_c^i(k)` precomputed per key state.
const MASK_CACHE: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FarfalleError {
    #[error("block size {0} outside {MIN_BLOCK_BITS}..={MAX_BLOCK_BITS}")]
    BlockSize(u32),
    #[error("key has {len} bits; at most b - 1 = {max} allowed")]
    KeyTooLong { len: usize, max: usize },
    #[error("rolling function is not a permutation of the {0}-bit blocks")]
    RollNotPermutation(u32),
    #[error("{0:#x} is not a primitive polynomial of degree b")]
    BadRollPolynomial(u64),
    #[error("a message sequence needs at least one string")]
    EmptySequence,
    #[error("length mismatch: {0} vs {1} bits")]
    LengthMismatch(usize, usize),
    #[error("tag mismatch")]
    TagMismatch,
    #[error("plaintext has {len} bits; the wide block cipher needs at least {min}")]
    PlaintextTooShort { len: usize, min: usize },
    #[error("invalid hex string")]
    BadHex,
}

/// A bit string of any length, including zero.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    bits: Vec<bool>,
}

impl std::fmt::Debug for BitString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BitString({}; 0x{})", self.len(), self.to_hex())
    }
}

impl std::fmt::Display for BitString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl Serialize for BitString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn zeros(len: usize) -> Self {
        BitString { bits: vec![false; len] }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        BitString { bits }
    }

    /// The low `len` bits of `value`, bit `i` at position `i`.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64);
        BitString {
            bits: (0..len).map(|i| value >> i & 1 == 1).collect(),
        }
    }

    /// Concatenation of `b`-bit blocks.
    pub fn from_blocks(blocks: &[u64], b: u32) -> Self {
        let mut s = BitString::new();
        for &v in blocks {
            s.append(&BitString::from_u64(v, b as usize));
        }
        s
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    pub fn append(&mut self, other: &BitString) {
        self.bits.extend_from_slice(&other.bits);
    }

    /// `self ‖ other`.
    pub fn concat(&self, other: &BitString) -> BitString {
        let mut out = self.clone();
        out.append(other);
        out
    }

    /// `self ‖ bit`.
    pub fn with_bit(&self, bit: bool) -> BitString {
        let mut out = self.clone();
        out.push(bit);
        out
    }

    pub fn slice(&self, start: usize, len: usize) -> BitString {
        BitString {
            bits: self.bits[start..start + len].to_vec(),
        }
    }

    pub fn split_at(&self, mid: usize) -> (BitString, BitString) {
        let (a, b) = self.bits.split_at(mid);
        (BitString::from_bits(a.to_vec()), BitString::from_bits(b.to_vec()))
    }

    pub fn xor(&self, other: &BitString) -> Result<BitString, FarfalleError> {
        if self.len() != other.len() {
            return Err(FarfalleError::LengthMismatch(self.len(), other.len()));
        }
        Ok(BitString {
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| a ^ b).collect(),
        })
    }

    /// XORs `other` into the prefix of `self`.
    pub fn xor_prefix(&mut self, other: &BitString) {
        assert!(other.len() <= self.len());
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a ^= b;
        }
    }

    /// Integer value with position `i` as bit `i`. Panics above 64 bits.
    pub fn to_u64(&self) -> u64 {
        assert!(self.len() <= 64);
        self.bits
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &bit)| acc | (bit as u64) << i)
    }

    /// Splits into `b`-bit block values; the length must be a multiple of `b`.
    pub fn blocks(&self, b: u32) -> Vec<u64> {
        assert_eq!(self.len() % b as usize, 0, "unaligned string");
        self.bits
            .chunks(b as usize)
            .map(|c| c.iter().enumerate().fold(0, |acc, (i, &bit)| acc | (bit as u64) << i))
            .collect()
    }

    /// Hex of the string read as an integer (position 0 least significant).
    pub fn to_hex(&self) -> String {
        if self.is_empty() {
            return String::new();
        }
        let mut v = BitVector::zeros(self.len());
        for (i, &bit) in self.bits.iter().enumerate() {
            v.set(i, bit);
        }
        v.to_hex()
    }

    pub fn from_hex(hex: &str, len: usize) -> Result<BitString, FarfalleError> {
        if len == 0 {
            return if hex.chars().all(|c| c == '0') {
                Ok(BitString::new())
            } else {
                Err(FarfalleError::BadHex)
            };
        }
        let v = BitVector::from_hex(hex, len).ok_or(FarfalleError::BadHex)?;
        Ok(BitString {
            bits: (0..len).map(|i| v.get(i)).collect(),
        })
    }
}

/// Appends a 1 bit and then the fewest 0 bits reaching a multiple of `b`.
/// Always appends, so aligned input grows by a full block.
pub fn pad10star(s: &BitString, b: u32) -> BitString {
    let mut out = s.with_bit(true);
    while !out.len().is_multiple_of(b as usize) {
        out.push(false);
    }
    out
}

/// Strips trailing zeros and the final 1 bit; `None` without a 1 bit.
pub fn unpad(s: &BitString) -> Option<BitString> {
    let last_one = s.bits.iter().rposition(|&bit| bit)?;
    Some(BitString::from_bits(s.bits[..last_one].to_vec()))
}

/// A rolling function on `b`-bit blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RollSpec {
    /// `v ↦ M v` for an invertible `b × b` matrix.
    LinearMatrix(BitMatrix),
    /// An arbitrary permutation given as a lookup table.
    TablePermutation(Vec<u64>),
}

impl RollSpec {
    /// Multiplication by `x` modulo a degree-`b` polynomial: an LFSR step.
    pub fn companion(b: u32, poly: u64) -> Result<RollSpec, FarfalleError> {
        if poly >> b != 1 || poly & 1 == 0 {
            return Err(FarfalleError::BadRollPolynomial(poly));
        }
        let low = poly & ((1u64 << b) - 1);
        let mut m = BitMatrix::zero(b as usize, b as usize);
        for c in 0..b as usize {
            let image = if c + 1 < b as usize { 1u64 << (c + 1) } else { low };
            for r in 0..b as usize {
                m.set(r, c, image >> r & 1 == 1);
            }
        }
        Ok(RollSpec::LinearMatrix(m))
    }

    pub fn matrix(&self) -> Option<&BitMatrix> {
        match self {
            RollSpec::LinearMatrix(m) => Some(m),
            RollSpec::TablePermutation(_) => None,
        }
    }

    fn validate(&self, b: u32) -> Result<(), FarfalleError> {
        let ok = match self {
            RollSpec::LinearMatrix(m) => m.row_count() == b as usize && m.is_invertible(),
            RollSpec::TablePermutation(t) => {
                let mut sorted = t.clone();
                sorted.sort_unstable();
                sorted.iter().copied().eq(0..1u64 << b)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(FarfalleError::RollNotPermutation(b))
        }
    }

    fn compile(&self) -> CompiledRoll {
        match self {
            RollSpec::LinearMatrix(m) => {
                CompiledRoll::Rows(m.rows().iter().map(|r| r.to_u64().expect("b <= 16")).collect())
            }
            RollSpec::TablePermutation(t) => CompiledRoll::Table(t.clone()),
        }
    }
}

#[derive(Debug, Clone)]
enum CompiledRoll {
    Rows(Vec<u64>),
    Table(Vec<u64>),
}

impl CompiledRoll {
    fn apply(&self, v: u64) -> u64 {
        match self {
            CompiledRoll::Rows(rows) => rows
                .iter()
                .enumerate()
                .fold(0, |acc, (i, r)| acc | (((r & v).count_ones() & 1) as u64) << i),
            CompiledRoll::Table(t) => t[v as usize],
        }
    }

    fn apply_pow(&self, mut v: u64, times: u64) -> u64 {
        for _ in 0..times {
            v = self.apply(v);
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RollKind {
    /// Companion matrix of a primitive polynomial.
    Linear,
    /// Seeded random permutation (nonlinear).
    Table,
}

/// Everything needed to generate a toy instance deterministically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FarfalleConfig {
    pub b: u32,
    pub seed: u64,
    pub roll_c: RollKind,
    /// Overrides the least primitive polynomial for a linear `roll_c`.
    pub roll_poly: Option<u64>,
    pub blank_index_mode: bool,
}

impl FarfalleConfig {
    pub fn new(b: u32, seed: u64) -> Self {
        FarfalleConfig {
            b,
            seed,
            roll_c: RollKind::Linear,
            roll_poly: None,
            blank_index_mode: false,
        }
    }
}

/// The public part of a toy Farfalle instance.
#[derive(Debug, Clone)]
pub struct FarfalleParams {
    b: u32,
    p_b: Vec<u64>,
    p_b_inv: Vec<u64>,
    p_c: Vec<u64>,
    p_d: Vec<u64>,
    p_e: Vec<u64>,
    roll_c: RollSpec,
    roll_e: RollSpec,
    roll_c_fast: CompiledRoll,
    roll_e_fast: CompiledRoll,
    blank_index_mode: bool,
}

fn invert_table(t: &[u64]) -> Vec<u64> {
    let mut inv = vec![0; t.len()];
    for (x, &y) in t.iter().enumerate() {
        inv[y as usize] = x as u64;
    }
    inv
}

impl FarfalleParams {
    /// Draws `p_b, p_c, p_d, p_e`, then `roll_c` (if tabulated), then
    /// `roll_e`, all from one seeded stream.
    pub fn generate(config: &FarfalleConfig) -> Result<Self, FarfalleError> {
        let b = config.b;
        if !(MIN_BLOCK_BITS..=MAX_BLOCK_BITS).contains(&b) {
            return Err(FarfalleError::BlockSize(b));
        }
        let mut rng = crate::seeded_rng(config.seed);
        let p_b = random_permutation(b, &mut rng);
        let p_c = random_permutation(b, &mut rng);
        let p_d = random_permutation(b, &mut rng);
        let p_e = random_permutation(b, &mut rng);
        let roll_c = match config.roll_c {
            RollKind::Linear => {
                let poly = config.roll_poly.unwrap_or_else(|| least_primitive(b));
                if !is_primitive(poly) {
                    return Err(FarfalleError::BadRollPolynomial(poly));
                }
                RollSpec::companion(b, poly)?
            }
            RollKind::Table => RollSpec::TablePermutation(random_permutation(b, &mut rng)),
        };
        let roll_e = RollSpec::TablePermutation(random_permutation(b, &mut rng));
        Self::from_parts(b, [p_b, p_c, p_d, p_e], roll_c, roll_e, config.blank_index_mode)
    }

    pub fn from_parts(
        b: u32,
        perms: [Vec<u64>; 4],
        roll_c: RollSpec,
        roll_e: RollSpec,
        blank_index_mode: bool,
    ) -> Result<Self, FarfalleError> {
        if !(MIN_BLOCK_BITS..=MAX_BLOCK_BITS).contains(&b) {
            return Err(FarfalleError::BlockSize(b));
        }
        for p in &perms {
            RollSpec::TablePermutation(p.clone()).validate(b)?;
        }
        roll_c.validate(b)?;
        roll_e.validate(b)?;
        let [p_b, p_c, p_d, p_e] = perms;
        Ok(FarfalleParams {
            b,
            p_b_inv: invert_table(&p_b),
            p_b,
            p_c,
            p_d,
            p_e,
            roll_c_fast: roll_c.compile(),
            roll_e_fast: roll_e.compile(),
            roll_c,
            roll_e,
            blank_index_mode,
        })
    }

    /// Same permutations with a different compression roll.
    pub fn with_roll_c(&self, roll_c: RollSpec) -> Result<Self, FarfalleError> {
        roll_c.validate(self.b)?;
        let mut out = self.clone();
        out.roll_c_fast = roll_c.compile();
        out.roll_c = roll_c;
        Ok(out)
    }

    pub fn with_blank_index_mode(&self, on: bool) -> Self {
        let mut out = self.clone();
        out.blank_index_mode = on;
        out
    }

    pub fn block_bits(&self) -> u32 {
        self.b
    }

    pub fn roll_c(&self) -> &RollSpec {
        &self.roll_c
    }

    pub fn roll_e(&self) -> &RollSpec {
        &self.roll_e
    }

    pub fn blank_index_mode(&self) -> bool {
        self.blank_index_mode
    }

    pub fn p_b(&self) -> &[u64] {
        &self.p_b
    }

    pub fn p_c(&self) -> &[u64] {
        &self.p_c
    }

    pub fn p_d(&self) -> &[u64] {
        &self.p_d
    }

    pub fn p_e(&self) -> &[u64] {
        &self.p_e
    }

    /// `roll_c^i(v)`.
    pub fn roll_c_pow(&self, v: u64, i: u64) -> u64 {
        self.roll_c_fast.apply_pow(v, i)
    }

    /// `roll_e^j(v)`.
    pub fn roll_e_pow(&self, v: u64, j: u64) -> u64 {
        self.roll_e_fast.apply_pow(v, j)
    }
}

/// The secret key `K` and its mask `k = p_b(pad10*(K))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FarfalleKeyState {
    key: BitString,
    k: u64,
    masks: Vec<u64>,
}

impl FarfalleKeyState {
    pub fn new(params: &FarfalleParams, key: &BitString) -> Result<Self, FarfalleError> {
        let max = params.b as usize - 1;
        if key.len() > max {
            return Err(FarfalleError::KeyTooLong { len: key.len(), max });
        }
        let padded = pad10star(key, params.b);
        let k = params.p_b[padded.to_u64() as usize];
        let mut masks = Vec::with_capacity(MASK_CACHE);
        let mut m = k;
        for _ in 0..MASK_CACHE {
            masks.push(m);
            m = params.roll_c_fast.apply(m);
        }
        Ok(FarfalleKeyState {
            key: key.clone(),
            k,
            masks,
        })
    }

    pub fn key(&self) -> &BitString {
        &self.key
    }

    pub fn mask(&self) -> u64 {
        self.k
    }

    /// `roll_c^i(k)`.
    pub fn rolled(&self, params: &FarfalleParams, i: u64) -> u64 {
        match self.masks.get(i as usize) {
            Some(&m) => m,
            None => params.roll_c_pow(self.masks[MASK_CACHE - 1], i - (MASK_CACHE as u64 - 1)),
        }
    }
}

/// `unpad(p_b^{-1}(k))`: the key behind a mask, if the mask is well formed.
pub fn key_from_mask(params: &FarfalleParams, k: u64) -> Option<BitString> {
    let padded = BitString::from_u64(params.p_b_inv[k as usize], params.b as usize);
    unpad(&padded)
}

/// Input strings in processing order (`strings[0]` is `M^(0)`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MessageSequence {
    strings: Vec<BitString>,
}

impl MessageSequence {
    pub fn new(strings: Vec<BitString>) -> Result<Self, FarfalleError> {
        if strings.is_empty() {
            return Err(FarfalleError::EmptySequence);
        }
        Ok(MessageSequence { strings })
    }

    pub fn single(s: BitString) -> Self {
        MessageSequence { strings: vec![s] }
    }

    pub fn strings(&self) -> &[BitString] {
        &self.strings
    }

    /// `s ∘ self`: `s` is processed after every current string.
    pub fn then(&self, s: BitString) -> Self {
        let mut strings = self.strings.clone();
        strings.push(s);
        MessageSequence { strings }
    }
}

/// Compression indices assigned to each padded string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockLayout {
    /// First index and block count per string, in processing order.
    pub strings: Vec<(u64, u64)>,
    /// The running index after the last string; `k' = roll_c^I(k)`.
    pub final_index: u64,
}

impl BlockLayout {
    /// Index of block `t` of string `s`.
    pub fn index(&self, s: usize, t: u64) -> u64 {
        let (start, count) = self.strings[s];
        assert!(t < count, "block {t} outside string {s}");
        start + t
    }
}

/// Layout for strings of the given lengths.
pub fn block_layout(params: &FarfalleParams, lengths: &[usize]) -> BlockLayout {
    let b = params.b as usize;
    let mut index = 0u64;
    let mut strings = Vec::with_capacity(lengths.len());
    for &len in lengths {
        let mu = (len / b + 1) as u64;
        strings.push((index, mu));
        index += mu + params.blank_index_mode as u64;
    }
    BlockLayout {
        strings,
        final_index: index,
    }
}

/// The compression accumulator `x` and the final index `I`.
fn compress(params: &FarfalleParams, key: &FarfalleKeyState, m: &MessageSequence) -> (u64, u64) {
    let mut x = 0u64;
    let mut index = 0u64;
    for s in &m.strings {
        let blocks = pad10star(s, params.b).blocks(params.b);
        for (t, &block) in blocks.iter().enumerate() {
            let mask = key.rolled(params, index + t as u64);
            x ^= params.p_c[(block ^ mask) as usize];
        }
        index += blocks.len() as u64 + params.blank_index_mode as u64;
    }
    (x, index)
}

/// `n` bits of `z_0 ‖ z_1 ‖ …` starting at bit `q`, where
/// `z_j = p_e(roll_e^j(p_d(x))) ⊕ roll_c^I(k)`.
pub fn farfalle(params: &FarfalleParams, key: &FarfalleKeyState, m: &MessageSequence, n: usize, q: usize) -> BitString {
    if n == 0 {
        return BitString::new();
    }
    let b = params.b as usize;
    let (x, index) = compress(params, key, m);
    let k_prime = key.rolled(params, index);
    let y = params.p_d[x as usize];
    let first = q / b;
    let last = (q + n - 1) / b;
    let mut state = params.roll_e_pow(y, first as u64);
    let mut stream = BitString::new();
    for _ in first..=last {
        let z = params.p_e[state as usize] ^ k_prime;
        stream.append(&BitString::from_u64(z, b));
        state = params.roll_e_fast.apply(state);
    }
    stream.slice(q - first * b, n)
}

/// Running totals of oracle usage.
#[derive(Debug, Default)]
pub struct QueryCounter {
    superposition: AtomicU64,
    classical: AtomicU64,
    evaluations: AtomicU64,
    verification: AtomicU64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct QueryCounts {
    /// Simulated superposition queries (one full truth table each).
    pub superposition: u64,
    /// Classical queries made by the adversary.
    pub classical: u64,
    /// Underlying PRF evaluations behind all of the above.
    pub evaluations: u64,
    /// Forgery or candidate checks submitted to the verifier.
    pub verification: u64,
}

impl QueryCounter {
    pub fn add_superposition(&self, queries: u64) {
        self.superposition.fetch_add(queries, Ordering::Relaxed);
    }

    pub fn add_classical(&self, queries: u64) {
        self.classical.fetch_add(queries, Ordering::Relaxed);
    }

    pub fn add_verification(&self, queries: u64) {
        self.verification.fetch_add(queries, Ordering::Relaxed);
    }

    pub fn add_evaluations(&self, evaluations: u64) {
        self.evaluations.fetch_add(evaluations, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> QueryCounts {
        QueryCounts {
            superposition: self.superposition.load(Ordering::Relaxed),
            classical: self.classical.load(Ordering::Relaxed),
            evaluations: self.evaluations.load(Ordering::Relaxed),
            verification: self.verification.load(Ordering::Relaxed),
        }
    }
}

/// A keyed Farfalle PRF `F_K`.
#[derive(Debug, Clone)]
pub struct Farfalle {
    params: Arc<FarfalleParams>,
    key: FarfalleKeyState,
}

impl Farfalle {
    pub fn new(params: Arc<FarfalleParams>, key: &BitString) -> Result<Self, FarfalleError> {
        let key = FarfalleKeyState::new(&params, key)?;
        Ok(Farfalle { params, key })
    }

    pub fn params(&self) -> &FarfalleParams {
        &self.params
    }

    pub fn key_state(&self) -> &FarfalleKeyState {
        &self.key
    }

    pub fn block_bits(&self) -> u32 {
        self.params.b
    }

    pub fn eval(&self, m: &MessageSequence, n: usize, q: usize) -> BitString {
        farfalle(&self.params, &self.key, m, n, q)
    }

    /// `roll_c^i(k)`.
    pub fn rolled_mask(&self, i: u64) -> u64 {
        self.key.rolled(&self.params, i)
    }

    pub fn layout(&self, m: &MessageSequence) -> BlockLayout {
        let lengths: Vec<usize> = m.strings.iter().map(BitString::len).collect();
        block_layout(&self.params, &lengths)
    }
}

/// Farfalle-SAE session state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionState {
    history: MessageSequence,
    t: usize,
    offset: usize,
}

impl SessionState {
    pub fn history(&self) -> &MessageSequence {
        &self.history
    }

    pub fn tag_bits(&self) -> usize {
        self.t
    }

    pub fn offset(&self) -> usize {
        self.offset
    }
}

/// Initialization: `history ← N`, `T ← F_K(history)`.
pub fn sae_start(prf: &Farfalle, t: usize, ell: usize, nonce: &BitString) -> (SessionState, BitString) {
    assert!(ell >= 1, "alignment unit must be positive");
    let history = MessageSequence::single(nonce.clone());
    let tag = prf.eval(&history, t, 0);
    let state = SessionState {
        history,
        t,
        offset: ell * t.div_ceil(ell),
    };
    (state, tag)
}

/// Wrap: the keystream skips `offset` bits of `F_K(history)`; `A ‖ 0` is
/// absorbed when `|A| > 0` or `|P| = 0`, then `C ‖ 1` when `|P| > 0`.
pub fn sae_wrap(
    prf: &Farfalle,
    state: &SessionState,
    a: &BitString,
    p: &BitString,
) -> (BitString, BitString, SessionState) {
    let keystream = prf.eval(&state.history, p.len(), state.offset);
    let c = p.xor(&keystream).expect("keystream has |P| bits");
    let mut history = state.history.clone();
    if !a.is_empty() || p.is_empty() {
        history = history.then(a.with_bit(false));
    }
    if !p.is_empty() {
        history = history.then(c.with_bit(true));
    }
    let tag = prf.eval(&history, state.t, 0);
    let next = SessionState {
        history,
        t: state.t,
        offset: state.offset,
    };
    (c, tag, next)
}

/// Inverse of [`sae_wrap`]: recovers `P` and checks the tag.
pub fn sae_unwrap(
    prf: &Farfalle,
    state: &SessionState,
    a: &BitString,
    c: &BitString,
    tag: &BitString,
) -> Result<(BitString, SessionState), FarfalleError> {
    let keystream = prf.eval(&state.history, c.len(), state.offset);
    let p = c.xor(&keystream)?;
    let mut history = state.history.clone();
    if !a.is_empty() || c.is_empty() {
        history = history.then(a.with_bit(false));
    }
    if !c.is_empty() {
        history = history.then(c.with_bit(true));
    }
    if prf.eval(&history, state.t, 0) != *tag {
        return Err(FarfalleError::TagMismatch);
    }
    let next = SessionState {
        history,
        t: state.t,
        offset: state.offset,
    };
    Ok((p, next))
}

/// `T ← F_K(P ∘ A)` truncated to `t` bits; `C ← P ⊕ F_K(T ∘ A)`.
pub fn siv_wrap(prf: &Farfalle, t: usize, a: &BitString, p: &BitString) -> (BitString, BitString) {
    let tag = siv_tag(prf, t, a, p);
    let keystream = prf.eval(&siv_keystream_input(a, &tag), p.len(), 0);
    (p.xor(&keystream).expect("keystream has |P| bits"), tag)
}

pub fn siv_unwrap(prf: &Farfalle, a: &BitString, c: &BitString, tag: &BitString) -> Result<BitString, FarfalleError> {
    let keystream = prf.eval(&siv_keystream_input(a, tag), c.len(), 0);
    let p = c.xor(&keystream)?;
    if siv_tag(prf, tag.len(), a, &p) == *tag {
        Ok(p)
    } else {
        Err(FarfalleError::TagMismatch)
    }
}

fn siv_tag(prf: &Farfalle, t: usize, a: &BitString, p: &BitString) -> BitString {
    let seq = MessageSequence::single(a.clone()).then(p.clone());
    prf.eval(&seq, t, 0)
}

fn siv_keystream_input(a: &BitString, tag: &BitString) -> MessageSequence {
    MessageSequence::single(a.clone()).then(tag.clone())
}

/// Length of the left branch: `ℓ · ⌈|P| / (2ℓ)⌉`.
pub fn wbc_split(len: usize, ell: usize) -> usize {
    ell * len.div_ceil(2 * ell)
}

fn wbc_check(prf: &Farfalle, ell: usize, p: &BitString) -> Result<usize, FarfalleError> {
    let min = 2 * prf.block_bits() as usize;
    if p.len() < min {
        return Err(FarfalleError::PlaintextTooShort { len: p.len(), min });
    }
    let split = wbc_split(p.len(), ell);
    if split >= p.len() {
        return Err(FarfalleError::PlaintextTooShort { len: p.len(), min });
    }
    Ok(split)
}

/// `H_K(x)`: Farfalle on the single string `x`.
fn wbc_h(prf: &Farfalle, x: &BitString, n: usize) -> BitString {
    prf.eval(&MessageSequence::single(x.clone()), n, 0)
}

/// `G_K(x ∘ W)`: the tweak is processed first.
fn wbc_g(prf: &Farfalle, x: &BitString, w: &BitString, n: usize) -> BitString {
    prf.eval(&MessageSequence::single(w.clone()).then(x.clone()), n, 0)
}

/// The four-round Feistel encipherment; `H` and `G` are both `prf`.
pub fn wbc_encipher(prf: &Farfalle, ell: usize, w: &BitString, p: &BitString) -> Result<BitString, FarfalleError> {
    let split = wbc_check(prf, ell, p)?;
    let b = prf.block_bits() as usize;
    let (mut l, mut r) = p.split_at(split);
    r.xor_prefix(&wbc_h(prf, &l.with_bit(false), b.min(r.len())));
    l.xor_prefix(&wbc_g(prf, &r.with_bit(true), w, l.len()));
    r.xor_prefix(&wbc_g(prf, &l.with_bit(false), w, r.len()));
    l.xor_prefix(&wbc_h(prf, &r.with_bit(true), b.min(l.len())));
    Ok(l.concat(&r))
}

pub fn wbc_decipher(prf: &Farfalle, ell: usize, w: &BitString, c: &BitString) -> Result<BitString, FarfalleError> {
    let split = wbc_check(prf, ell, c)?;
    let b = prf.block_bits() as usize;
    let (mut l, mut r) = c.split_at(split);
    l.xor_prefix(&wbc_h(prf, &r.with_bit(true), b.min(l.len())));
    r.xor_prefix(&wbc_g(prf, &l.with_bit(false), w, r.len()));
    l.xor_prefix(&wbc_g(prf, &r.with_bit(true), w, l.len()));
    r.xor_prefix(&wbc_h(prf, &l.with_bit(false), b.min(r.len())));
    Ok(l.concat(&r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfunc::VectorialFunction;

    fn instance(b: u32, seed: u64) -> Farfalle {
        let params = FarfalleParams::generate(&FarfalleConfig::new(b, seed)).unwrap();
        Farfalle::new(Arc::new(params), &BitString::from_u64(0x2a, (b - 1) as usize)).unwrap()
    }

    #[test]
    fn pad10star_examples() {
        let empty = pad10star(&BitString::new(), 8);
        assert_eq!(empty.bits(), BitString::from_u64(1, 8).bits());
        let seven = BitString::from_u64(0x55, 7);
        assert_eq!(pad10star(&seven, 8), seven.with_bit(true));
        let eight = BitString::from_u64(0xa5, 8);
        assert_eq!(pad10star(&eight, 8), eight.concat(&BitString::from_u64(1, 8)));
        for len in 0..20 {
            let s = BitString::from_u64(0xabcde, len);
            assert_eq!(unpad(&pad10star(&s, 6)).unwrap(), s);
        }
        assert_eq!(unpad(&BitString::zeros(5)), None);
    }

    #[test]
    fn companion_roll_is_multiplication_by_x() {
        let poly = least_primitive(8);
        let spec = RollSpec::companion(8, poly).unwrap();
        let fast = spec.compile();
        for v in 0..256u64 {
            let mut expected = v << 1;
            if expected & 0x100 != 0 {
                expected ^= poly;
            }
            assert_eq!(fast.apply(v), expected);
        }
        assert!(RollSpec::companion(8, 0x1_0000).is_err());
    }

    #[test]
    fn rolled_mask_sums_are_invertible_for_lfsr() {
        let params = FarfalleParams::generate(&FarfalleConfig::new(8, 1)).unwrap();
        let m = params.roll_c().matrix().unwrap();
        for i in 0..6u64 {
            for j in i + 1..8 {
                let sum = m.pow(i).unwrap().add(&m.pow(j).unwrap()).unwrap();
                assert!(sum.is_invertible(), "M^{i} + M^{j}");
            }
        }
    }

    #[test]
    fn key_state_round_trip() {
        let params = FarfalleParams::generate(&FarfalleConfig::new(10, 3)).unwrap();
        for len in 0..10 {
            let key = BitString::from_u64(0x1ff & (0x16b >> (9 - len)), len);
            let ks = FarfalleKeyState::new(&params, &key).unwrap();
            assert_eq!(key_from_mask(&params, ks.mask()).unwrap(), key);
            let padded = pad10star(&key, 10).to_u64();
            assert_eq!(ks.mask(), params.p_b()[padded as usize]);
        }
        assert!(matches!(
            FarfalleKeyState::new(&params, &BitString::zeros(10)),
            Err(FarfalleError::KeyTooLong { .. })
        ));
    }

    #[test]
    fn layout_and_blank_indices() {
        let params = FarfalleParams::generate(&FarfalleConfig::new(8, 1)).unwrap();
        let layout = block_layout(&params, &[8, 17, 0]);
        assert_eq!(layout.strings, vec![(0, 2), (2, 3), (5, 1)]);
        assert_eq!(layout.final_index, 6);
        let blank = block_layout(&params.with_blank_index_mode(true), &[8, 17, 0]);
        assert_eq!(blank.strings, vec![(0, 2), (3, 3), (7, 1)]);
        assert_eq!(blank.final_index, 9);
    }

    /// Straight-line evaluation of a single-string input from the raw
    /// tables, sharing no code with `farfalle` beyond parameter generation.
    fn reference_single(prf: &Farfalle, msg: &[bool], n: usize, q: usize) -> Vec<bool> {
        let p = prf.params();
        let b = p.block_bits() as usize;
        let roll = |v: u64| -> u64 {
            let m = p.roll_c().matrix().unwrap();
            let mut out = 0;
            for r in 0..b {
                let mut bit = false;
                for c in 0..b {
                    bit ^= m.get(r, c) && v >> c & 1 == 1;
                }
                out |= (bit as u64) << r;
            }
            out
        };
        let mut key_bits: Vec<bool> = prf.key_state().key().bits().to_vec();
        key_bits.push(true);
        key_bits.resize(b, false);
        let kp: u64 = key_bits.iter().rev().fold(0, |acc, &bit| acc << 1 | bit as u64);
        let k = p.p_b()[kp as usize];
        let mut padded = msg.to_vec();
        padded.push(true);
        while !padded.len().is_multiple_of(b) {
            padded.push(false);
        }
        let mut x = 0;
        let mut mask = k;
        for chunk in padded.chunks(b) {
            let block: u64 = chunk.iter().rev().fold(0, |acc, &bit| acc << 1 | bit as u64);
            x ^= p.p_c()[(block ^ mask) as usize];
            mask = roll(mask);
        }
        let k_prime = mask;
        let mut y = p.p_d()[x as usize];
        let mut out = Vec::new();
        while out.len() < q + n {
            let z = p.p_e()[y as usize] ^ k_prime;
            for i in 0..b {
                out.push(z >> i & 1 == 1);
            }
            y = match p.roll_e() {
                RollSpec::TablePermutation(t) => t[y as usize],
                RollSpec::LinearMatrix(_) => unreachable!(),
            };
        }
        out[q..q + n].to_vec()
    }

    #[test]
    fn matches_straight_line_reference() {
        let prf = instance(8, 42);
        for (msg, n, q) in [(0x11u64, 8, 0), (0x3, 20, 5), (0xbeef, 33, 17)] {
            let bits = BitString::from_u64(msg, 16);
            let got = prf.eval(&MessageSequence::single(bits.clone()), n, q);
            assert_eq!(got.bits(), reference_single(&prf, bits.bits(), n, q).as_slice());
        }
    }

    #[test]
    fn golden_vector() {
        let params = Arc::new(FarfalleParams::generate(&FarfalleConfig::new(8, 42)).unwrap());
        let prf = Farfalle::new(params, &BitString::from_u64(0x2a, 7)).unwrap();
        let m = BitString::from_u64(0x11, 8);
        let z = prf.eval(&MessageSequence::single(m.clone()), 8, 0);
        assert_eq!(z.bits(), reference_single(&prf, m.bits(), 8, 0).as_slice());
        assert_eq!(z.to_hex(), GOLDEN_Z);
    }

    const GOLDEN_Z: &str = "9d";

    #[test]
    fn offset_output_is_a_window() {
        let prf = instance(8, 5);
        let m = MessageSequence::single(BitString::from_u64(0x1234, 16));
        let long = prf.eval(&m, 64, 0);
        for q in [0, 3, 8, 13] {
            assert_eq!(prf.eval(&m, 20, q), long.slice(q, 20));
        }
    }

    #[test]
    fn duplicated_block_gives_construction_period() {
        for seed in 0..20 {
            let b = 8 + 2 * (seed % 2) as u32;
            let prf = instance(b, seed);
            let s = prf.rolled_mask(0) ^ prf.rolled_mask(1);
            for j in [0usize, 2] {
                let z = VectorialFunction::from_fn(b, b, |m| {
                    let msg = BitString::from_blocks(&[m, m], b);
                    prf.eval(&MessageSequence::single(msg), b as usize, j * b as usize)
                        .to_u64()
                })
                .unwrap();
                assert!(z.periods_bruteforce().contains(&s), "seed {seed}");
            }
        }
    }

    #[test]
    fn equal_index_contributions_cancel() {
        let prf = instance(8, 9);
        // blocks (m, m) at indices 0, 1 cancel against shifting both by s
        let s = prf.rolled_mask(0) ^ prf.rolled_mask(1);
        let tail = BitString::from_u64(0x5a, 8);
        for m in [0u64, 7, 200] {
            let a = BitString::from_blocks(&[m, m], 8).concat(&tail);
            let b = BitString::from_blocks(&[m ^ s, m ^ s], 8).concat(&tail);
            assert_eq!(
                prf.eval(&MessageSequence::single(a), 16, 0),
                prf.eval(&MessageSequence::single(b), 16, 0)
            );
        }
    }

    #[test]
    fn sae_branches_and_determinism() {
        let prf = instance(8, 11);
        let nonce = BitString::from_u64(0x77, 8);
        let (state, t0) = sae_start(&prf, 16, 8, &nonce);
        assert_eq!(t0.len(), 16);
        assert_eq!(state.offset(), 16);
        let (c, _, next) = sae_wrap(&prf, &state, &BitString::new(), &BitString::new());
        assert!(c.is_empty());
        assert_eq!(next.history().strings().len(), 2);
        assert_eq!(next.history().strings()[1], BitString::from_bits(vec![false]));

        let a = BitString::from_u64(0x1, 8);
        let p = BitString::from_u64(0xabc, 12);
        let (c1, t1, s1) = sae_wrap(&prf, &state, &a, &p);
        let (c2, t2, _) = sae_wrap(&prf, &sae_start(&prf, 16, 8, &nonce).0, &a, &p);
        assert_eq!((c1.clone(), t1.clone()), (c2, t2));
        assert_eq!(s1.history().strings().len(), 3);
        let keystream = prf.eval(state.history(), 12, 16);
        assert_eq!(c1, p.xor(&keystream).unwrap());

        let (p1, _) = sae_unwrap(&prf, &state, &a, &c1, &t1).unwrap();
        assert_eq!(p1, p);
        assert_eq!(sae_unwrap(&prf, &state, &a, &c1, &t0), Err(FarfalleError::TagMismatch));

        let (_, _, only_p) = sae_wrap(&prf, &state, &BitString::new(), &p);
        assert_eq!(only_p.history().strings().len(), 2);
        assert_eq!(sae_start(&prf, 10, 8, &nonce).0.offset(), 16);
    }

    #[test]
    fn sae_tag_is_periodic_in_doubled_metadata() {
        let prf = instance(8, 12);
        let nonce = BitString::from_u64(0x31, 8);
        // nonce occupies two padded blocks, A‖0 starts at index 2
        let s = prf.rolled_mask(2) ^ prf.rolled_mask(3);
        let tag = |a: u64| {
            let (state, _) = sae_start(&prf, 16, 8, &nonce);
            sae_wrap(&prf, &state, &BitString::from_blocks(&[a, a], 8), &BitString::new()).1
        };
        for a in [0u64, 1, 99, 255] {
            assert_eq!(tag(a), tag(a ^ s));
        }
    }

    #[test]
    fn siv_round_trip_and_tamper() {
        let prf = instance(8, 13);
        let a = BitString::from_u64(0x1234, 16);
        let p = BitString::from_u64(0xfeed_beef, 32);
        let (c, t) = siv_wrap(&prf, 16, &a, &p);
        assert_eq!(siv_unwrap(&prf, &a, &c, &t).unwrap(), p);
        let mut bad = c.bits().to_vec();
        bad[3] = !bad[3];
        assert_eq!(
            siv_unwrap(&prf, &a, &BitString::from_bits(bad), &t),
            Err(FarfalleError::TagMismatch)
        );
    }

    #[test]
    fn siv_shifted_inputs_share_tags() {
        let prf = instance(8, 14);
        // A = a‖a at indices 0, 1; P = m‖m at indices 3, 4
        let s2 = prf.rolled_mask(0) ^ prf.rolled_mask(1);
        let s1 = prf.rolled_mask(3) ^ prf.rolled_mask(4);
        let (m, a) = (0x3cu64, 0xa1u64);
        let t1 = siv_wrap(
            &prf,
            16,
            &BitString::from_blocks(&[a, a], 8),
            &BitString::from_blocks(&[m, m], 8),
        )
        .1;
        let t2 = siv_wrap(
            &prf,
            16,
            &BitString::from_blocks(&[a ^ s2, a ^ s2], 8),
            &BitString::from_blocks(&[m ^ s1, m ^ s1], 8),
        )
        .1;
        assert_eq!(t1, t2);
    }

    #[test]
    fn wbc_is_a_permutation() {
        for b in 4..=6u32 {
            let prf = instance(b, 15);
            let w = BitString::from_u64(0x9, 4);
            let mut seen = std::collections::HashSet::new();
            for x in 0..1u64 << (2 * b) {
                let p = BitString::from_u64(x, 2 * b as usize);
                let c = wbc_encipher(&prf, b as usize, &w, &p).unwrap();
                assert_eq!(wbc_decipher(&prf, b as usize, &w, &c).unwrap(), p);
                assert!(seen.insert(c));
            }
        }
    }

    #[test]
    fn wbc_round_trip_at_four_blocks() {
        let prf = instance(8, 16);
        let w = BitString::from_u64(0x42, 8);
        for x in [0u64, 1, 0xdead_beef, 0x1234_5678] {
            let p = BitString::from_u64(x, 32);
            let c = wbc_encipher(&prf, 8, &w, &p).unwrap();
            assert_eq!(c, wbc_encipher(&prf, 8, &w, &p).unwrap());
            assert_eq!(wbc_decipher(&prf, 8, &w, &c).unwrap(), p);
        }
        assert!(matches!(
            wbc_encipher(&prf, 8, &w, &BitString::zeros(15)),
            Err(FarfalleError::PlaintextTooShort { .. })
        ));
    }
}
