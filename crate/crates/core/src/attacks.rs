//! End-to-end attacks: periodic oracles from Farfalle, key extraction for a
//! linear `roll_c`, SAE and SIV forgeries, the WBC distinguisher, and round
//! key extraction from Feistel periods by Lagrange or ANF interpolation.
//!
//! Every oracle wrapper here keeps its secret behind a narrow query API and
//! counts what the adversary spends. `secret()` accessors exist only so the
//! harness can compute ground truth.

use std::collections::{HashMap, HashSet};
use std::sync::Mutex;

use rand::{Rng, RngCore};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::bitlinalg::{BitMatrix, BitVector, LinAlgError};
use crate::boolfunc::{recover_from_low_weight, BoolFuncError, LowWeightSamples, VectorialFunction, MAX_INPUT_BITS};
use crate::farfalle::{
    block_layout, key_from_mask, sae_start, sae_unwrap, sae_wrap, siv_unwrap, siv_wrap, wbc_encipher, BitString,
    Farfalle, FarfalleError, FarfalleParams, MessageSequence, QueryCounter, QueryCounts,
};
use crate::finitefield::{lagrange_interpolate, FieldError, FieldPolynomial, FieldSpec};
use crate::seeded_rng;
use crate::simon::{
    concat_functions, recover_period_space, recover_with_source, PerQueryOracle, PeriodSpace, SimonError,
    SimonRunReport, StabilizationPolicy,
};

/// Input-size cap for construction oracles (`2b` bits at `b = 10`).
pub const CONSTRUCTION_INPUT_CAP: u32 = 20;

/// Largest branch size for Feistel instances.
pub const MAX_GFN_BITS: u32 = 12;

/// Largest candidate space the residual filter will walk.
const MAX_CANDIDATE_DIM: usize = 16;

#[derive(Debug, Error)]
pub enum AttackError {
    #[error(transparent)]
    Farfalle(#[from] FarfalleError),
    #[error(transparent)]
    Function(#[from] BoolFuncError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Simon(#[from] SimonError),
    #[error("linear algebra: {0}")]
    LinAlg(LinAlgError),
    #[error("invalid construction: {0}")]
    BadConstruction(String),
    #[error("period equations are inconsistent")]
    InconsistentPeriods,
    #[error("Simon's algorithm returned no verified period")]
    NoPeriod,
    #[error("the recovered period space does not single out one period")]
    AmbiguousPeriod,
    #[error("candidate space of dimension {0} is too large to filter")]
    Undetermined(usize),
    #[error("no key candidate survives the residual filter")]
    NoSurvivor,
    #[error("nonce {0} was already used")]
    NonceReuse(String),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
}

impl From<LinAlgError> for AttackError {
    fn from(e: LinAlgError) -> Self {
        match e {
            LinAlgError::NoSolution => AttackError::InconsistentPeriods,
            other => AttackError::LinAlg(other),
        }
    }
}

fn hex_u64<S: Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{v:x}"))
}

fn hex_u64_vec<S: Serializer>(v: &[u64], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| format!("{x:x}")))
}

fn low_mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

fn parity(v: u64) -> u64 {
    (v.count_ones() & 1) as u64
}

/// Keyed Farfalle reachable only through counted queries.
#[derive(Debug)]
pub struct FarfalleOracle {
    prf: Farfalle,
    counter: QueryCounter,
}

impl FarfalleOracle {
    pub fn new(prf: Farfalle) -> Self {
        FarfalleOracle {
            prf,
            counter: QueryCounter::default(),
        }
    }

    pub fn params(&self) -> &FarfalleParams {
        self.prf.params()
    }

    pub fn block_bits(&self) -> u32 {
        self.prf.block_bits()
    }

    pub fn counts(&self) -> QueryCounts {
        self.counter.snapshot()
    }

    /// The keyed instance, for ground-truth computations only.
    pub fn secret(&self) -> &Farfalle {
        &self.prf
    }

    /// The full truth table of `x ↦ F_K(build(x))`, `tau` bits from offset
    /// `q`. Builds it once; callers charge superposition queries per use.
    pub fn truth_table<G>(&self, n: u32, tau: usize, q: usize, build: G) -> Result<VectorialFunction, AttackError>
    where
        G: Fn(u64) -> MessageSequence + Sync,
    {
        let f = VectorialFunction::from_fn_capped(n, tau as u32, CONSTRUCTION_INPUT_CAP, |x| {
            self.prf.eval(&build(x), tau, q).to_u64()
        })?;
        self.counter.add_evaluations(1 << n);
        Ok(f)
    }

    pub fn charge_superposition(&self, queries: u64) {
        self.counter.add_superposition(queries);
    }
}

/// The periodic oracles built from a single input string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ConstructionVariant {
    /// `m ‖ m`.
    C1a,
    /// `(m ⊕ α) ‖ (m ⊕ β)`.
    C1b {
        #[serde(serialize_with = "hex_u64")]
        alpha: u64,
        #[serde(serialize_with = "hex_u64")]
        beta: u64,
    },
    /// Constant blocks with the variable `m` placed at both indices of `pair`.
    C2i {
        #[serde(serialize_with = "hex_u64_vec")]
        constants: Vec<u64>,
        pair: (usize, usize),
    },
    /// `(m0 ⊕ α0) ‖ (m0 ⊕ α0) ‖ (m1 ⊕ α1) ‖ (m1 ⊕ α1)`; the input is
    /// `m0` in the low `b` bits and `m1` in the high `b` bits.
    C2ii {
        #[serde(serialize_with = "hex_u64")]
        alpha0: u64,
        #[serde(serialize_with = "hex_u64")]
        alpha1: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConstructionSpec {
    pub variant: ConstructionVariant,
    /// Which expansion block `z_j` is observed.
    pub output_block: usize,
}

impl ConstructionSpec {
    pub fn new(variant: ConstructionVariant, output_block: usize) -> Self {
        ConstructionSpec { variant, output_block }
    }

    pub fn input_bits(&self, b: u32) -> u32 {
        match self.variant {
            ConstructionVariant::C2ii { .. } => 2 * b,
            _ => b,
        }
    }

    fn validate(&self, b: u32) -> Result<(), AttackError> {
        let fits = |v: u64| v >> b == 0;
        let ok = match &self.variant {
            ConstructionVariant::C1a => true,
            ConstructionVariant::C1b { alpha, beta } => fits(*alpha) && fits(*beta),
            ConstructionVariant::C2i { constants, pair } => {
                pair.0 < pair.1 && pair.1 < constants.len() && constants.iter().all(|&c| fits(c))
            }
            ConstructionVariant::C2ii { alpha0, alpha1 } => fits(*alpha0) && fits(*alpha1),
        };
        if ok {
            Ok(())
        } else {
            Err(AttackError::BadConstruction(format!("{:?} at b = {b}", self.variant)))
        }
    }

    /// The blocks of the single input string for input `x`.
    pub fn blocks(&self, b: u32, x: u64) -> Vec<u64> {
        let mask = low_mask(b);
        match &self.variant {
            ConstructionVariant::C1a => vec![x, x],
            ConstructionVariant::C1b { alpha, beta } => vec![x ^ alpha, x ^ beta],
            ConstructionVariant::C2i { constants, pair } => {
                let mut blocks = constants.clone();
                blocks[pair.0] = x;
                blocks[pair.1] = x;
                blocks
            }
            ConstructionVariant::C2ii { alpha0, alpha1 } => {
                let (m0, m1) = (x & mask, x >> b);
                vec![m0 ^ alpha0, m0 ^ alpha0, m1 ^ alpha1, m1 ^ alpha1]
            }
        }
    }

    /// The periods the construction is designed to have, from the secret
    /// masks. Block `t` of the string sits at compression index `t`.
    pub fn asserted_periods(&self, prf: &Farfalle) -> Vec<u64> {
        let r = |i: usize| prf.rolled_mask(i as u64);
        match &self.variant {
            ConstructionVariant::C1a => vec![r(0) ^ r(1)],
            ConstructionVariant::C1b { alpha, beta } => vec![alpha ^ beta ^ r(0) ^ r(1)],
            ConstructionVariant::C2i { pair, .. } => vec![r(pair.0) ^ r(pair.1)],
            ConstructionVariant::C2ii { .. } => {
                vec![r(0) ^ r(1), (r(2) ^ r(3)) << prf.block_bits()]
            }
        }
    }
}

/// Truth table of the observed block as a function of the variable input.
pub fn build_construction(spec: &ConstructionSpec, oracle: &FarfalleOracle) -> Result<VectorialFunction, AttackError> {
    let b = oracle.block_bits();
    spec.validate(b)?;
    let q = spec.output_block * b as usize;
    oracle.truth_table(spec.input_bits(b), b as usize, q, |x| {
        MessageSequence::single(BitString::from_blocks(&spec.blocks(b, x), b))
    })
}

/// One period `s = roll_c^i(k) ⊕ roll_c^j(k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PeriodEquation {
    pub i: u64,
    pub j: u64,
    #[serde(serialize_with = "hex_u64")]
    pub s: u64,
}

/// The affine space of masks consistent with the equations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CandidateSpace {
    pub particular: BitVector,
    pub null_basis: Vec<BitVector>,
}

impl CandidateSpace {
    pub fn size_log2(&self) -> usize {
        self.null_basis.len()
    }

    pub fn contains(&self, k: u64) -> bool {
        let b = self.particular.len();
        let diff = BitVector::from_u64(k, b).xor(&self.particular).expect("same length");
        PeriodSpace::new(b as u32, &self.null_basis, false).contains_raw(diff.to_u64().expect("b <= 16"))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtractionReport {
    pub periods_used: Vec<PeriodEquation>,
    pub system_rank: usize,
    pub candidates: CandidateSpace,
    pub recovered_k: Option<BitVector>,
    pub recovered_key: Option<BitString>,
    pub superposition_queries: u64,
}

/// Stacks one block `(M^i ⊕ M^j) k = s` per period and solves for `k`.
pub fn extract_k_linear_roll(
    periods: &[PeriodEquation],
    m: &BitMatrix,
    params: &FarfalleParams,
) -> Result<ExtractionReport, AttackError> {
    let b = params.block_bits() as usize;
    if m.row_count() != b || m.col_count() != b {
        return Err(AttackError::BadParameter(format!("roll matrix must be {b}x{b}")));
    }
    if periods.is_empty() {
        return Ok(ExtractionReport {
            periods_used: Vec::new(),
            system_rank: 0,
            candidates: CandidateSpace {
                particular: BitVector::zeros(b),
                null_basis: (0..b).map(|i| BitVector::unit(b, i)).collect(),
            },
            recovered_k: None,
            recovered_key: None,
            superposition_queries: 0,
        });
    }
    let mut rows = Vec::with_capacity(b * periods.len());
    let mut rhs = Vec::with_capacity(b * periods.len());
    for eq in periods {
        let block = m.pow(eq.i)?.add(&m.pow(eq.j)?)?;
        rows.extend_from_slice(block.rows());
        rhs.extend((0..b).map(|r| eq.s >> r & 1 == 1));
    }
    let system = BitMatrix::from_rows(rows)?;
    let solution = system.solve_affine(&BitVector::from_bools(&rhs))?;
    let (recovered_k, recovered_key) = if solution.rank == b {
        let k = solution.particular.clone();
        let key = key_from_mask(params, k.to_u64().expect("b <= 16"));
        (Some(k), key)
    } else {
        (None, None)
    };
    Ok(ExtractionReport {
        periods_used: periods.to_vec(),
        system_rank: solution.rank,
        candidates: CandidateSpace {
            particular: solution.particular,
            null_basis: solution.null_basis,
        },
        recovered_k,
        recovered_key,
        superposition_queries: 0,
    })
}

/// The unique nonzero period of a one-dimensional verified space.
fn single_period(report: &SimonRunReport) -> Result<u64, AttackError> {
    if !report.verified {
        return Err(AttackError::NoPeriod);
    }
    match report.recovered.basis_raw().as_slice() {
        [] => Err(AttackError::NoPeriod),
        [s] => Ok(*s),
        _ => Err(AttackError::AmbiguousPeriod),
    }
}

/// Learns `s_{i,j}` with Simon on a string holding `m` at blocks `i` and
/// `j` and zero blocks elsewhere.
pub fn learn_pair_period<R: RngCore>(
    oracle: &FarfalleOracle,
    i: usize,
    j: usize,
    stop: StabilizationPolicy,
    rng: &mut R,
) -> Result<(PeriodEquation, SimonRunReport), AttackError> {
    if i >= j {
        return Err(AttackError::BadConstruction(format!("index pair ({i}, {j})")));
    }
    let spec = ConstructionSpec::new(
        ConstructionVariant::C2i {
            constants: vec![0; j + 1],
            pair: (i, j),
        },
        0,
    );
    let f = build_construction(&spec, oracle)?;
    let report = recover_period_space(&f, stop, rng);
    oracle.charge_superposition(report.superposition_queries);
    let s = single_period(&report)?;
    Ok((
        PeriodEquation {
            i: i as u64,
            j: j as u64,
            s,
        },
        report,
    ))
}

/// Learns one period per index pair, then solves for the key.
pub fn extract_key<R: RngCore>(
    oracle: &FarfalleOracle,
    pairs: &[(usize, usize)],
    stop: StabilizationPolicy,
    rng: &mut R,
) -> Result<ExtractionReport, AttackError> {
    let m = oracle
        .params()
        .roll_c()
        .matrix()
        .ok_or_else(|| AttackError::BadParameter("roll_c is not linear".into()))?
        .clone();
    let mut equations = Vec::new();
    let mut queries = 0;
    for &(i, j) in pairs {
        let (eq, report) = learn_pair_period(oracle, i, j, stop, rng)?;
        queries += report.superposition_queries;
        equations.push(eq);
    }
    let mut report = extract_k_linear_roll(&equations, &m, oracle.params())?;
    report.superposition_queries = queries;
    Ok(report)
}

/// Outcome of submitting a forgery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Accepted,
    Rejected,
    /// The claim repeats something the oracle already produced.
    Replay,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ForgedClaim {
    pub nonce: Option<BitString>,
    pub metadata: BitString,
    pub ciphertext: BitString,
    pub tag: BitString,
}

#[derive(Debug, Clone, Serialize)]
pub struct ForgeryResult {
    pub learned_periods: Vec<BitVector>,
    pub forged: ForgedClaim,
    pub verdict: Verdict,
    pub accepted: bool,
    pub simon_queries: u64,
    pub queries: QueryCounts,
}

#[derive(Debug, Default)]
struct SaeLedger {
    /// Nonces spent, by superposition or classical queries.
    used_nonces: HashSet<BitString>,
    /// Nonces whose whole metadata range was queried in superposition.
    superposed: HashSet<BitString>,
    /// Classical `(nonce, A, C)` queries.
    wrapped: HashSet<(BitString, BitString, BitString)>,
}

/// A Farfalle-SAE service: each query opens a session under a nonce and
/// performs one wrap.
#[derive(Debug)]
pub struct SaeService {
    prf: Farfalle,
    t: usize,
    ell: usize,
    nonce_bits: usize,
    counter: QueryCounter,
    ledger: Mutex<SaeLedger>,
}

impl SaeService {
    pub fn new(prf: Farfalle, t: usize, ell: usize, nonce_bits: usize) -> Result<Self, AttackError> {
        if t == 0 || t > 64 || ell == 0 || nonce_bits == 0 || nonce_bits > 64 {
            return Err(AttackError::BadParameter(format!(
                "SAE needs 1 <= t <= 64, l >= 1, 1 <= nonce bits <= 64 (t = {t}, l = {ell}, nonce = {nonce_bits})"
            )));
        }
        Ok(SaeService {
            prf,
            t,
            ell,
            nonce_bits,
            counter: QueryCounter::default(),
            ledger: Mutex::new(SaeLedger::default()),
        })
    }

    pub fn block_bits(&self) -> u32 {
        self.prf.block_bits()
    }

    pub fn nonce_bits(&self) -> usize {
        self.nonce_bits
    }

    pub fn counts(&self) -> QueryCounts {
        self.counter.snapshot()
    }

    pub fn secret(&self) -> &Farfalle {
        &self.prf
    }

    pub fn nonce_used(&self, nonce: &BitString) -> bool {
        self.ledger.lock().expect("ledger lock").used_nonces.contains(nonce)
    }

    /// A uniformly drawn nonce not used before.
    pub fn fresh_nonce<R: Rng + ?Sized>(&self, rng: &mut R) -> BitString {
        loop {
            let nonce = BitString::from_u64(rng.gen::<u64>(), self.nonce_bits);
            if !self.nonce_used(&nonce) {
                return nonce;
            }
        }
    }

    fn claim_nonce(&self, nonce: &BitString, superposed: bool) -> Result<(), AttackError> {
        let mut ledger = self.ledger.lock().expect("ledger lock");
        if !ledger.used_nonces.insert(nonce.clone()) {
            return Err(AttackError::NonceReuse(nonce.to_hex()));
        }
        if superposed {
            ledger.superposed.insert(nonce.clone());
        }
        Ok(())
    }

    /// One superposition query: the tag of `wrap(metadata(x), ε)` under a
    /// fresh session for `nonce`, for every `x`.
    pub fn superposition_tags<G>(
        &self,
        nonce: &BitString,
        n: u32,
        metadata: G,
    ) -> Result<VectorialFunction, AttackError>
    where
        G: Fn(u64) -> BitString + Sync,
    {
        self.claim_nonce(nonce, true)?;
        let (state, _) = sae_start(&self.prf, self.t, self.ell, nonce);
        let empty = BitString::new();
        let f = VectorialFunction::from_fn_capped(n, self.t as u32, CONSTRUCTION_INPUT_CAP, |x| {
            sae_wrap(&self.prf, &state, &metadata(x), &empty).1.to_u64()
        })?;
        self.counter.add_superposition(1);
        self.counter.add_evaluations(1 + (1 << n));
        Ok(f)
    }

    /// Classical query: start a session under `nonce` and wrap once.
    pub fn wrap(&self, nonce: &BitString, a: &BitString, p: &BitString) -> Result<(BitString, BitString), AttackError> {
        self.claim_nonce(nonce, false)?;
        let (state, _) = sae_start(&self.prf, self.t, self.ell, nonce);
        let (c, tag, _) = sae_wrap(&self.prf, &state, a, p);
        self.ledger
            .lock()
            .expect("ledger lock")
            .wrapped
            .insert((nonce.clone(), a.clone(), c.clone()));
        self.counter.add_classical(1);
        self.counter.add_evaluations(2 + !p.is_empty() as u64);
        Ok((c, tag))
    }

    pub fn verify(&self, nonce: &BitString, a: &BitString, c: &BitString, tag: &BitString) -> Verdict {
        self.counter.add_verification(1);
        {
            let ledger = self.ledger.lock().expect("ledger lock");
            if ledger.superposed.contains(nonce) || ledger.wrapped.contains(&(nonce.clone(), a.clone(), c.clone())) {
                return Verdict::Replay;
            }
        }
        self.counter.add_evaluations(2 + !c.is_empty() as u64);
        let (state, _) = sae_start(&self.prf, self.t, self.ell, nonce);
        match sae_unwrap(&self.prf, &state, a, c, tag) {
            Ok(_) => Verdict::Accepted,
            Err(_) => Verdict::Rejected,
        }
    }
}

/// The period of the SAE tag in the doubled metadata block `a ‖ a`.
pub fn sae_expected_period(service: &SaeService) -> u64 {
    let prf = service.secret();
    let b = prf.block_bits() as usize;
    let layout = block_layout(prf.params(), &[service.nonce_bits, 2 * b + 1]);
    let start = layout.strings[1].0;
    prf.rolled_mask(start) ^ prf.rolled_mask(start + 1)
}

/// Learns the tag period with one fresh nonce per superposition query, then
/// shifts the metadata of one classically tagged query.
pub fn forge_sae<R: RngCore>(
    service: &SaeService,
    stop: StabilizationPolicy,
    rng: &mut R,
    period_override: Option<u64>,
) -> Result<ForgeryResult, AttackError> {
    let b = service.block_bits();
    let mut nonce_rng = seeded_rng(rng.gen());
    let mut failure = None;
    let report = {
        let mut source = PerQueryOracle::new(b, |_| {
            let nonce = service.fresh_nonce(&mut nonce_rng);
            match service.superposition_tags(&nonce, b, |a| BitString::from_blocks(&[a, a], b)) {
                Ok(f) => f,
                Err(e) => {
                    failure = Some(e);
                    VectorialFunction::zero(b, 1).expect("small table")
                }
            }
        });
        recover_with_source(&mut source, stop, rng)
    };
    if let Some(e) = failure {
        return Err(e);
    }
    let learned = report.recovered.basis_raw().first().copied().unwrap_or(0);
    let s = period_override.unwrap_or(learned);

    let nonce = service.fresh_nonce(rng);
    let a = rng.gen_range(0..1u64 << b);
    let empty = BitString::new();
    let (c, tag) = service.wrap(&nonce, &BitString::from_blocks(&[a, a], b), &empty)?;
    let forged_a = BitString::from_blocks(&[a ^ s, a ^ s], b);
    let verdict = service.verify(&nonce, &forged_a, &c, &tag);
    Ok(ForgeryResult {
        learned_periods: report.recovered.basis.clone(),
        forged: ForgedClaim {
            nonce: Some(nonce),
            metadata: forged_a,
            ciphertext: c,
            tag,
        },
        accepted: verdict == Verdict::Accepted,
        verdict,
        simon_queries: report.superposition_queries,
        queries: service.counts(),
    })
}

/// A Farfalle-SIV service.
#[derive(Debug)]
pub struct SivService {
    prf: Farfalle,
    t: usize,
    counter: QueryCounter,
    wrapped: Mutex<HashSet<(BitString, BitString, BitString)>>,
}

impl SivService {
    pub fn new(prf: Farfalle, t: usize) -> Result<Self, AttackError> {
        if t == 0 || t > 64 {
            return Err(AttackError::BadParameter(format!("SIV tag length {t} outside 1..=64")));
        }
        Ok(SivService {
            prf,
            t,
            counter: QueryCounter::default(),
            wrapped: Mutex::new(HashSet::new()),
        })
    }

    pub fn block_bits(&self) -> u32 {
        self.prf.block_bits()
    }

    pub fn counts(&self) -> QueryCounts {
        self.counter.snapshot()
    }

    pub fn secret(&self) -> &Farfalle {
        &self.prf
    }

    /// Truth table of the tag over `x ↦ (A(x), P(x))`.
    pub fn tag_table<G>(&self, n: u32, build: G) -> Result<VectorialFunction, AttackError>
    where
        G: Fn(u64) -> (BitString, BitString) + Sync,
    {
        let f = VectorialFunction::from_fn_capped(n, self.t as u32, CONSTRUCTION_INPUT_CAP, |x| {
            let (a, p) = build(x);
            siv_wrap(&self.prf, self.t, &a, &p).1.to_u64()
        })?;
        self.counter.add_evaluations(2 << n);
        Ok(f)
    }

    pub fn charge_superposition(&self, queries: u64) {
        self.counter.add_superposition(queries);
    }

    pub fn wrap(&self, a: &BitString, p: &BitString) -> (BitString, BitString) {
        let (c, tag) = siv_wrap(&self.prf, self.t, a, p);
        self.wrapped
            .lock()
            .expect("ledger lock")
            .insert((a.clone(), c.clone(), tag.clone()));
        self.counter.add_classical(1);
        self.counter.add_evaluations(2);
        (c, tag)
    }

    pub fn verify(&self, a: &BitString, c: &BitString, tag: &BitString) -> Verdict {
        self.counter.add_verification(1);
        if self
            .wrapped
            .lock()
            .expect("ledger lock")
            .contains(&(a.clone(), c.clone(), tag.clone()))
        {
            return Verdict::Replay;
        }
        self.counter.add_evaluations(2);
        match siv_unwrap(&self.prf, a, c, tag) {
            Ok(_) => Verdict::Accepted,
            Err(_) => Verdict::Rejected,
        }
    }
}

/// `(s', s'')`: the periods of the doubled plaintext and doubled metadata
/// blocks of a two-block SIV input.
pub fn siv_expected_shifts(service: &SivService) -> (u64, u64) {
    let prf = service.secret();
    let b = prf.block_bits() as usize;
    // A is processed first, then P
    let layout = block_layout(prf.params(), &[2 * b, 2 * b]);
    let pair = |s: usize| {
        let start = layout.strings[s].0;
        prf.rolled_mask(start) ^ prf.rolled_mask(start + 1)
    };
    (pair(1), pair(0))
}

/// Learns `s'` and `s''` from the tag of `(a ‖ a, m ‖ m)` and shifts both.
pub fn forge_siv_variant_i<R: RngCore>(
    service: &SivService,
    stop: StabilizationPolicy,
    rng: &mut R,
    shifts_override: Option<(u64, u64)>,
) -> Result<ForgeryResult, AttackError> {
    let b = service.block_bits();
    let mask = low_mask(b);
    let f = service.tag_table(2 * b, |x| {
        let (m, a) = (x & mask, x >> b);
        (BitString::from_blocks(&[a, a], b), BitString::from_blocks(&[m, m], b))
    })?;
    let report = recover_period_space(&f, stop, rng);
    service.charge_superposition(report.superposition_queries);
    let elements = report.recovered.elements_raw();
    let s1 = elements.iter().copied().find(|&v| v != 0 && v >> b == 0).unwrap_or(0);
    let s2 = elements.iter().copied().find(|&v| v != 0 && v & mask == 0).unwrap_or(0) >> b;
    let (s1, s2) = shifts_override.unwrap_or((s1, s2));

    let (m, a) = (rng.gen_range(0..=mask), rng.gen_range(0..=mask));
    let (c, tag) = service.wrap(&BitString::from_blocks(&[a, a], b), &BitString::from_blocks(&[m, m], b));
    let forged_a = BitString::from_blocks(&[a ^ s2, a ^ s2], b);
    let forged_c = c.xor(&BitString::from_blocks(&[s1, s1], b))?;
    let verdict = service.verify(&forged_a, &forged_c, &tag);
    Ok(ForgeryResult {
        learned_periods: vec![BitVector::from_u64(s1, b as usize), BitVector::from_u64(s2, b as usize)],
        forged: ForgedClaim {
            nonce: None,
            metadata: forged_a,
            ciphertext: forged_c,
            tag,
        },
        accepted: verdict == Verdict::Accepted,
        verdict,
        simon_queries: report.superposition_queries,
        queries: service.counts(),
    })
}

/// Learns `s''` from the tag of `(a ‖ a, P)` for a fixed two-block `P`,
/// then reuses the ciphertext of another plaintext under shifted metadata.
pub fn forge_siv_variant_ii<R: RngCore>(
    service: &SivService,
    stop: StabilizationPolicy,
    rng: &mut R,
    shift_override: Option<u64>,
) -> Result<ForgeryResult, AttackError> {
    let b = service.block_bits();
    let mask = low_mask(b);
    let distinct_pair = |rng: &mut R| loop {
        let (m0, m1) = (rng.gen_range(0..=mask), rng.gen_range(0..=mask));
        if m0 != m1 {
            return BitString::from_blocks(&[m0, m1], b);
        }
    };
    let probe = distinct_pair(rng);
    let f = service.tag_table(b, |a| (BitString::from_blocks(&[a, a], b), probe.clone()))?;
    let report = recover_period_space(&f, stop, rng);
    service.charge_superposition(report.superposition_queries);
    let learned = report.recovered.basis_raw().first().copied().unwrap_or(0);
    let s2 = shift_override.unwrap_or(learned);

    let a = rng.gen_range(0..=mask);
    let p = distinct_pair(rng);
    let (c, tag) = service.wrap(&BitString::from_blocks(&[a, a], b), &p);
    let forged_a = BitString::from_blocks(&[a ^ s2, a ^ s2], b);
    let verdict = service.verify(&forged_a, &c, &tag);
    Ok(ForgeryResult {
        learned_periods: vec![BitVector::from_u64(s2, b as usize)],
        forged: ForgedClaim {
            nonce: None,
            metadata: forged_a,
            ciphertext: c,
            tag,
        },
        accepted: verdict == Verdict::Accepted,
        verdict,
        simon_queries: report.superposition_queries,
        queries: service.counts(),
    })
}

/// A seeded random permutation sampled lazily on first use of each input.
#[derive(Debug)]
pub struct LazyPermutation {
    bits: u32,
    state: Mutex<LazyState>,
}

#[derive(Debug)]
struct LazyState {
    rng: crate::SeededRng,
    forward: HashMap<u64, u64>,
    taken: HashSet<u64>,
}

impl LazyPermutation {
    pub fn new(bits: u32, seed: u64) -> Self {
        assert!((1..=64).contains(&bits));
        LazyPermutation {
            bits,
            state: Mutex::new(LazyState {
                rng: seeded_rng(seed),
                forward: HashMap::new(),
                taken: HashSet::new(),
            }),
        }
    }

    pub fn apply(&self, x: u64) -> u64 {
        let mut st = self.state.lock().expect("permutation lock");
        if let Some(&y) = st.forward.get(&x) {
            return y;
        }
        let mask = low_mask(self.bits);
        let y = loop {
            let y = st.rng.gen::<u64>() & mask;
            if !st.taken.contains(&y) {
                break y;
            }
        };
        st.taken.insert(y);
        st.forward.insert(x, y);
        y
    }
}

/// The keyed cipher behind a WBC oracle.
#[derive(Debug)]
#[allow(clippy::large_enum_variant)]
pub enum WbcCipher {
    Real {
        prf: Farfalle,
        ell: usize,
        tweak: BitString,
    },
    Random(LazyPermutation),
}

/// Either a Farfalle-WBC instance on `4b`-bit blocks or a random
/// permutation of the same width.
#[derive(Debug)]
pub struct WbcOracle {
    b: u32,
    cipher: WbcCipher,
    counter: QueryCounter,
}

impl WbcOracle {
    pub fn real(prf: Farfalle, ell: usize, tweak: BitString) -> Result<Self, AttackError> {
        let b = prf.block_bits();
        if 4 * b > 64 || ell == 0 {
            return Err(AttackError::BadParameter(format!(
                "WBC needs 4b <= 64 and l >= 1 (b = {b}, l = {ell})"
            )));
        }
        Ok(WbcOracle {
            b,
            cipher: WbcCipher::Real { prf, ell, tweak },
            counter: QueryCounter::default(),
        })
    }

    pub fn random(b: u32, seed: u64) -> Result<Self, AttackError> {
        if !(1..=16).contains(&b) {
            return Err(AttackError::BadParameter(format!("WBC block size {b}")));
        }
        Ok(WbcOracle {
            b,
            cipher: WbcCipher::Random(LazyPermutation::new(4 * b, seed)),
            counter: QueryCounter::default(),
        })
    }

    pub fn block_bits(&self) -> u32 {
        self.b
    }

    pub fn is_real(&self) -> bool {
        matches!(self.cipher, WbcCipher::Real { .. })
    }

    pub fn counts(&self) -> QueryCounts {
        self.counter.snapshot()
    }

    pub fn cipher(&self) -> &WbcCipher {
        &self.cipher
    }

    fn encipher_raw(&self, p: u64) -> u64 {
        let width = 4 * self.b as usize;
        match &self.cipher {
            WbcCipher::Real { prf, ell, tweak } => wbc_encipher(prf, *ell, tweak, &BitString::from_u64(p, width))
                .expect("4b-bit plaintexts are long enough")
                .to_u64(),
            WbcCipher::Random(perm) => perm.apply(p),
        }
    }

    /// Truth table of `f(m) = P_2 ⊕ C_2(α, m ‖ m)`.
    pub fn distinguisher_table(&self, alpha: u64) -> Result<VectorialFunction, AttackError> {
        let b = self.b;
        let f = VectorialFunction::from_fn(b, 2 * b, |m| {
            let right = m | m << b;
            let c = self.encipher_raw(alpha | right << (2 * b));
            right ^ (c >> (2 * b))
        })?;
        self.counter.add_evaluations(1 << b);
        Ok(f)
    }

    pub fn charge_superposition(&self, queries: u64) {
        self.counter.add_superposition(queries);
    }
}

/// `β_1 ⊕ roll^{i}(k) ⊕ roll^{i+1}(k)`, where `β_1` is the first-round
/// mask on the right branch and `i` the index of its first block inside
/// `G_K(R ‖ 1 ∘ W)`.
pub fn wbc_expected_period(prf: &Farfalle, tweak: &BitString, alpha: u64) -> u64 {
    let b = prf.block_bits() as usize;
    let left = BitString::from_u64(alpha, 2 * b).with_bit(false);
    let beta1 = prf.eval(&MessageSequence::single(left), b, 0).to_u64();
    let layout = block_layout(prf.params(), &[tweak.len(), 2 * b + 1]);
    let start = layout.strings[1].0;
    beta1 ^ prf.rolled_mask(start) ^ prf.rolled_mask(start + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WbcVerdict {
    Real,
    Random,
}

#[derive(Debug, Clone, Serialize)]
pub struct WbcReport {
    pub verdict: WbcVerdict,
    pub period: Option<BitVector>,
    pub simon_queries: u64,
    pub queries: QueryCounts,
}

/// Real iff `f(m) = P_2 ⊕ C_2(α, m ‖ m)` has a verified nonzero period.
pub fn wbc_distinguisher<R: RngCore>(
    oracle: &WbcOracle,
    alpha: u64,
    stop: StabilizationPolicy,
    rng: &mut R,
) -> Result<WbcReport, AttackError> {
    if alpha >> (2 * oracle.block_bits()) != 0 {
        return Err(AttackError::BadParameter(format!(
            "alpha {alpha:#x} wider than 2b bits"
        )));
    }
    let f = oracle.distinguisher_table(alpha)?;
    let report = recover_period_space(&f, stop, rng);
    oracle.charge_superposition(report.superposition_queries);
    let period = report.recovered.basis.first().cloned();
    let verdict = if report.verified && period.is_some() {
        WbcVerdict::Real
    } else {
        WbcVerdict::Random
    };
    Ok(WbcReport {
        verdict,
        period,
        simon_queries: report.superposition_queries,
        queries: oracle.counts(),
    })
}

/// A balanced Feistel network on two `n`-bit branches with round functions
/// `F_i(z) = F^{(i)}(z ⊕ k_i)` for public `F^{(i)}`.
#[derive(Debug, Clone)]
pub struct GfnSpec {
    n: u32,
    functions: Vec<VectorialFunction>,
    round_keys: Vec<u64>,
}

impl GfnSpec {
    pub fn new(n: u32, functions: Vec<VectorialFunction>, round_keys: Vec<u64>) -> Result<Self, AttackError> {
        if n == 0 || n > MAX_GFN_BITS {
            return Err(AttackError::BadParameter(format!(
                "branch size {n} outside 1..={MAX_GFN_BITS}"
            )));
        }
        if functions.is_empty() || functions.len() != round_keys.len() {
            return Err(AttackError::BadParameter("one public function per round key".into()));
        }
        if functions.iter().any(|f| f.input_bits() != n || f.output_bits() != n) {
            return Err(AttackError::BadParameter(format!(
                "round functions must map {n} bits to {n} bits"
            )));
        }
        if round_keys.iter().any(|&k| k >> n != 0) {
            return Err(AttackError::BadParameter("round key wider than the branch".into()));
        }
        Ok(GfnSpec {
            n,
            functions,
            round_keys,
        })
    }

    /// Every round uses the same public function.
    pub fn with_public_function(n: u32, f: VectorialFunction, round_keys: Vec<u64>) -> Result<Self, AttackError> {
        let functions = vec![f; round_keys.len()];
        Self::new(n, functions, round_keys)
    }

    pub fn branch_bits(&self) -> u32 {
        self.n
    }

    pub fn rounds(&self) -> usize {
        self.functions.len()
    }

    pub fn public_function(&self, round: usize) -> &VectorialFunction {
        &self.functions[round]
    }

    pub fn round_key(&self, round: usize) -> u64 {
        self.round_keys[round]
    }

    /// `F_{round+1}(z)`.
    pub fn round_function(&self, round: usize, z: u64) -> u64 {
        self.functions[round].eval(z ^ self.round_keys[round])
    }

    /// Rounds `(x_0, x_1) ↦ (x_1 ⊕ F_i(x_0), x_0)`.
    pub fn encrypt(&self, x0: u64, x1: u64) -> (u64, u64) {
        let (mut l, mut r) = (x0, x1);
        for round in 0..self.rounds() {
            let next = r ^ self.round_function(round, l);
            r = l;
            l = next;
        }
        (l, r)
    }
}

/// `f(0, x) = y_1(α, x) ⊕ β`, `f(1, x) = y_1(β, x) ⊕ α` on the 3-round
/// Feistel; the selector bit is the most significant input bit.
pub fn feistel3_distinguisher_oracle(gfn: &GfnSpec, alpha: u64, beta: u64) -> Result<VectorialFunction, AttackError> {
    if gfn.rounds() != 3 {
        return Err(AttackError::BadParameter(format!(
            "expected 3 rounds, got {}",
            gfn.rounds()
        )));
    }
    let n = gfn.n;
    let g = VectorialFunction::from_fn(n, n, |x| gfn.encrypt(alpha, x).1 ^ beta)?;
    let h = VectorialFunction::from_fn(n, n, |x| gfn.encrypt(beta, x).1 ^ alpha)?;
    Ok(concat_functions(&g, &h)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GfnPeriodSample {
    #[serde(serialize_with = "hex_u64")]
    pub x: u64,
    #[serde(serialize_with = "hex_u64")]
    pub s: u64,
    pub simon_queries: u64,
}

/// Runs Simon on the distinguisher for `(α, β) = (x, x ⊕ σ)` and returns
/// the verified period value `s(x)`.
pub fn gfn_period_sampler<R: RngCore>(
    gfn: &GfnSpec,
    sigma: u64,
    x: u64,
    stop: StabilizationPolicy,
    rng: &mut R,
) -> Result<GfnPeriodSample, AttackError> {
    if sigma == 0 {
        return Err(AttackError::BadParameter("sigma must be nonzero".into()));
    }
    let n = gfn.n;
    let f = feistel3_distinguisher_oracle(gfn, x, x ^ sigma)?;
    let report = recover_period_space(&f, stop, rng);
    if !report.verified {
        return Err(AttackError::NoPeriod);
    }
    let selected: Vec<u64> = report
        .recovered
        .elements_raw()
        .into_iter()
        .filter(|v| v >> n == 1)
        .collect();
    match selected.as_slice() {
        [] => Err(AttackError::NoPeriod),
        [v] => Ok(GfnPeriodSample {
            x,
            s: v & low_mask(n),
            simon_queries: report.superposition_queries,
        }),
        _ => Err(AttackError::AmbiguousPeriod),
    }
}

/// Result of a round-key extraction.
#[derive(Debug, Clone, Serialize)]
pub struct KeyCandidates {
    /// Candidates passing the constant-residual test, ascending.
    #[serde(serialize_with = "hex_u64_vec")]
    pub survivors: Vec<u64>,
    pub delta_periods: PeriodSpace,
    pub samples_used: usize,
    pub simon_queries: u64,
    /// The interpolated `s` (or `λ·s`) as a truth table.
    #[serde(skip)]
    pub reconstructed: VectorialFunction,
}

impl KeyCandidates {
    /// Exactly one pair `{κ, κ ⊕ σ}` survived.
    pub fn determined(&self) -> bool {
        self.survivors.len() == 2
    }
}

/// Periods of `delta`, then every period `κ` for which
/// `x ↦ s(x) ⊕ F(x ⊕ κ) ⊕ F(x ⊕ σ ⊕ κ)` is constant.
fn filter_candidates<R: RngCore>(
    s: &VectorialFunction,
    f: &VectorialFunction,
    sigma: u64,
    delta: &VectorialFunction,
    stop: StabilizationPolicy,
    rng: &mut R,
) -> Result<(Vec<u64>, PeriodSpace, u64), AttackError> {
    let report = recover_period_space(delta, stop, rng);
    if !report.verified {
        return Err(AttackError::NoPeriod);
    }
    let space = report.recovered.clone();
    if space.dim() > MAX_CANDIDATE_DIM {
        return Err(AttackError::Undetermined(space.dim()));
    }
    let survivors: Vec<u64> = space
        .elements_raw()
        .into_iter()
        .filter(|&kappa| constant_residual(s, f, sigma, kappa))
        .collect();
    if survivors.is_empty() {
        return Err(AttackError::NoSurvivor);
    }
    Ok((survivors, space, report.superposition_queries))
}

/// `x ↦ s(x) ⊕ F(x ⊕ κ) ⊕ F(x ⊕ σ ⊕ κ)` is constant.
pub fn constant_residual(s: &VectorialFunction, f: &VectorialFunction, sigma: u64, kappa: u64) -> bool {
    let residual = |x: u64| s.eval(x) ^ f.eval(x ^ kappa) ^ f.eval(x ^ sigma ^ kappa);
    let c = residual(0);
    (1..s.domain_size()).all(|x| residual(x) == c)
}

/// Interpolates `s` from `(x_i, s(x_i))`, forms
/// `Δ(x) = s(x) ⊕ F(x) ⊕ F(x ⊕ σ)` and filters the periods of `Δ`.
pub fn extract_round_key_lagrange<R: RngCore>(
    f: &FieldPolynomial,
    sigma: u64,
    samples: &[(u64, u64)],
    stop: StabilizationPolicy,
    rng: &mut R,
) -> Result<KeyCandidates, AttackError> {
    let spec = f.spec();
    let n = spec.degree();
    if n > MAX_GFN_BITS {
        return Err(AttackError::BadParameter(format!(
            "field degree {n} above {MAX_GFN_BITS}"
        )));
    }
    if sigma == 0 || sigma >> n != 0 {
        return Err(AttackError::BadParameter(format!("sigma {sigma:#x}")));
    }
    let points = samples
        .iter()
        .map(|&(x, y)| Ok((spec.element(x)?, spec.element(y)?)))
        .collect::<Result<Vec<_>, FieldError>>()?;
    let s_poly = lagrange_interpolate(&points)?;
    let s = VectorialFunction::new(n, n, s_poly.evaluate_all())?;
    let big_f = VectorialFunction::new(n, n, f.evaluate_all())?;
    let delta = VectorialFunction::from_fn(n, n, |x| s.eval(x) ^ big_f.eval(x) ^ big_f.eval(x ^ sigma))?;
    let (survivors, delta_periods, simon_queries) = filter_candidates(&s, &big_f, sigma, &delta, stop, rng)?;
    Ok(KeyCandidates {
        survivors,
        delta_periods,
        samples_used: samples.len(),
        simon_queries,
        reconstructed: s,
    })
}

/// The nonzero `λ` minimising `deg(λ·F)` among components of degree at
/// least 2 (lower degrees make `Δ` constant); ties go to the smallest `λ`.
pub fn choose_lambda(f: &VectorialFunction) -> Option<(u64, u32)> {
    let anf = f.mobius_transform();
    let coeffs = anf.coeffs();
    let mut best: Option<(u64, u32)> = None;
    for lambda in 1..=low_mask(f.output_bits()) {
        let degree = coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| parity(c & lambda) == 1)
            .map(|(u, _)| u.count_ones())
            .max()
            .unwrap_or(0);
        if degree < 2 {
            continue;
        }
        if best.is_none_or(|(_, d)| degree < d) {
            best = Some((lambda, degree));
        }
    }
    best
}

/// Rebuilds `λ·s` from its values on `S_{d-1}`, forms the Boolean
/// `Δ(x) = λ·(s(x) ⊕ F(x) ⊕ F(x ⊕ σ))` and filters the periods of `Δ`.
pub fn extract_round_key_anf<R: RngCore>(
    f: &VectorialFunction,
    lambda: u64,
    sigma: u64,
    samples: &LowWeightSamples,
    stop: StabilizationPolicy,
    rng: &mut R,
) -> Result<KeyCandidates, AttackError> {
    let n = f.input_bits();
    if n > MAX_GFN_BITS {
        return Err(AttackError::BadParameter(format!(
            "input size {n} above {MAX_GFN_BITS}"
        )));
    }
    if sigma == 0 || sigma >> n != 0 {
        return Err(AttackError::BadParameter(format!("sigma {sigma:#x}")));
    }
    let component_pairs: Vec<(u64, u64)> = samples.pairs().iter().map(|&(x, y)| (x, parity(y & lambda))).collect();
    let component = LowWeightSamples::new(n, 1, samples.degree_bound(), component_pairs)?;
    let g = recover_from_low_weight(&component)?;
    let lf = f.component_raw(lambda);
    let delta = VectorialFunction::from_fn(n, 1, |x| g.eval(x) ^ lf.eval(x) ^ lf.eval(x ^ sigma))?;
    let (survivors, delta_periods, simon_queries) = filter_candidates(&g, &lf, sigma, &delta, stop, rng)?;
    Ok(KeyCandidates {
        survivors,
        delta_periods,
        samples_used: samples.pairs().len(),
        simon_queries,
        reconstructed: g,
    })
}

/// A random `n → n` function whose coordinates have ANF monomials of weight
/// at most `degree`, each present with probability 1/2.
pub fn random_low_degree_function<R: Rng + ?Sized>(
    n: u32,
    degree: u32,
    rng: &mut R,
) -> Result<VectorialFunction, AttackError> {
    if n > MAX_INPUT_BITS {
        return Err(AttackError::BadParameter(format!("{n} input bits")));
    }
    let mask = low_mask(n);
    let coeffs: Vec<u64> = (0..1u64 << n)
        .map(|u| {
            if u.count_ones() <= degree {
                rng.gen::<u64>() & mask
            } else {
                0
            }
        })
        .collect();
    Ok(crate::boolfunc::AnfTable::new(n, n, coeffs)?.to_function())
}

/// A univariate polynomial of degree `d` with every coefficient nonzero.
pub fn dense_polynomial<R: Rng + ?Sized>(
    spec: FieldSpec,
    d: usize,
    rng: &mut R,
) -> Result<FieldPolynomial, AttackError> {
    let coeffs = (0..=d).map(|_| rng.gen_range(1..spec.order())).collect();
    Ok(FieldPolynomial::from_coeffs(spec, coeffs)?)
}
