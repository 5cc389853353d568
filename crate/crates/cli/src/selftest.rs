//! Invariant suites run by `selftest`. Each suite draws from its own seed.

use std::sync::Arc;

use rand::Rng;
use serde_json::{json, Value};
use simonbench::attacks::{build_construction, ConstructionSpec, ConstructionVariant, FarfalleOracle};
use simonbench::bitlinalg::{BitMatrix, BitVector};
use simonbench::boolfunc::{recover_from_low_weight, walsh_hadamard, AnfTable, LowWeightSamples, VectorialFunction};
use simonbench::farfalle::{
    sae_start, sae_unwrap, sae_wrap, siv_unwrap, siv_wrap, wbc_decipher, wbc_encipher, BitString, Farfalle,
    FarfalleConfig, FarfalleParams,
};
use simonbench::finitefield::FieldSpec;
use simonbench::simon::{planted_period_oracle, recover_period_space, PeriodSpace, StabilizationPolicy};
use simonbench::{derive_seed, seeded_rng, SeededRng};

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 0x5eed;

type Suite = fn(&mut SeededRng) -> Result<(), String>;

const SUITES: &[(&str, Suite)] = &[
    ("field-axioms", field_axioms),
    ("matrix-inverse-and-null-space", matrix_suite),
    ("walsh-parseval", walsh_parseval),
    ("mobius-involution", mobius_involution),
    ("low-weight-recovery-n4-exhaustive", low_weight_exhaustive),
    ("simon-planted-spaces", simon_planted),
    ("construction-periods", construction_periods),
    ("mode-round-trips", mode_round_trips),
];

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn field_axioms(rng: &mut SeededRng) -> Result<(), String> {
    for n in 1..=12 {
        let f = FieldSpec::with_default_modulus(n).map_err(|e| e.to_string())?;
        for _ in 0..200 {
            let (a, b, c) = (
                rng.gen_range(0..f.order()),
                rng.gen_range(0..f.order()),
                rng.gen_range(0..f.order()),
            );
            ensure(f.mul_raw(a, f.mul_raw(b, c)) == f.mul_raw(f.mul_raw(a, b), c), || {
                format!("associativity fails in GF(2^{n})")
            })?;
            ensure(f.mul_raw(a, b ^ c) == f.mul_raw(a, b) ^ f.mul_raw(a, c), || {
                format!("distributivity fails in GF(2^{n})")
            })?;
            if a != 0 {
                let inv = f.inv_raw(a).map_err(|e| e.to_string())?;
                ensure(f.mul_raw(a, inv) == 1, || format!("bad inverse of {a:x} in GF(2^{n})"))?;
            }
        }
    }
    Ok(())
}

fn matrix_suite(rng: &mut SeededRng) -> Result<(), String> {
    for _ in 0..50 {
        let n = rng.gen_range(1..=24);
        let rows: Vec<u64> = (0..n).map(|_| rng.gen::<u64>() & ((1 << n) - 1)).collect();
        let m = BitMatrix::from_u64_rows(&rows, n);
        if let Some(inv) = m.inverse() {
            ensure(
                m.mul(&inv).map_err(|e| e.to_string())? == BitMatrix::identity(n),
                || "M * M^-1 != I".into(),
            )?;
        }
        for v in m.null_space() {
            ensure(m.mul_vec(&v).map_err(|e| e.to_string())? == BitVector::zeros(n), || {
                "null space vector not annihilated".into()
            })?;
        }
        ensure(m.rank() + m.null_space().len() == n, || "rank-nullity fails".into())?;
    }
    Ok(())
}

fn walsh_parseval(rng: &mut SeededRng) -> Result<(), String> {
    for n in 1..=12u32 {
        let mut t: Vec<i64> = (0..1u64 << n).map(|_| if rng.gen() { -1 } else { 1 }).collect();
        walsh_hadamard(&mut t);
        let energy: i64 = t.iter().map(|w| w * w).sum();
        ensure(energy == 1 << (2 * n), || format!("Parseval fails at n = {n}"))?;
    }
    Ok(())
}

fn mobius_involution(rng: &mut SeededRng) -> Result<(), String> {
    for n in 1..=10u32 {
        let table: Vec<u64> = (0..1u64 << n).map(|_| rng.gen::<u64>() & 0xff).collect();
        let f = VectorialFunction::new(n, 8, table).map_err(|e| e.to_string())?;
        let anf = f.mobius_transform();
        let back = AnfTable::new(n, 8, anf.coeffs().to_vec())
            .map_err(|e| e.to_string())?
            .to_function();
        ensure(back == f, || format!("ANF round trip fails at n = {n}"))?;
    }
    Ok(())
}

fn low_weight_exhaustive(_: &mut SeededRng) -> Result<(), String> {
    // degree <= 2 on 4 variables: 11 monomials, 2^11 functions
    let monomials: Vec<usize> = (0..16usize).filter(|u| u.count_ones() <= 2).collect();
    for mask in 0..1u32 << monomials.len() {
        let mut coeffs = vec![0u64; 16];
        for (bit, &u) in monomials.iter().enumerate() {
            coeffs[u] = (mask >> bit & 1) as u64;
        }
        let f = AnfTable::new(4, 1, coeffs).map_err(|e| e.to_string())?.to_function();
        let g = recover_from_low_weight(&LowWeightSamples::restrict(&f, 2)).map_err(|e| e.to_string())?;
        ensure(g == f, || format!("recovery fails for ANF mask {mask:x}"))?;
    }
    Ok(())
}

fn simon_planted(rng: &mut SeededRng) -> Result<(), String> {
    for _ in 0..10 {
        let n = rng.gen_range(4..=12);
        let s = rng.gen_range(1..1u64 << n);
        let f = planted_period_oracle(n, &[s], rng).map_err(|e| e.to_string())?;
        let report = recover_period_space(&f, StabilizationPolicy::default(), rng);
        let truth = PeriodSpace::new(n, &f.period_space_bruteforce(), true);
        ensure(report.verified && report.recovered.same_space(&truth), || {
            format!("planted period {s:x} on {n} bits not recovered")
        })?;
    }
    Ok(())
}

fn keyed_prf(b: u32, rng: &mut SeededRng) -> Result<Farfalle, String> {
    let params = FarfalleParams::generate(&FarfalleConfig::new(b, rng.gen())).map_err(|e| e.to_string())?;
    let key = BitString::from_u64(rng.gen(), b as usize - 1);
    Farfalle::new(Arc::new(params), &key).map_err(|e| e.to_string())
}

fn construction_periods(rng: &mut SeededRng) -> Result<(), String> {
    for _ in 0..5 {
        let oracle = FarfalleOracle::new(keyed_prf(8, rng)?);
        let spec = ConstructionSpec::new(ConstructionVariant::C1a, 0);
        let f = build_construction(&spec, &oracle).map_err(|e| e.to_string())?;
        let asserted = spec.asserted_periods(oracle.secret())[0];
        ensure(f.is_period(asserted), || format!("C1a period {asserted:x} missing"))?;
    }
    Ok(())
}

fn mode_round_trips(rng: &mut SeededRng) -> Result<(), String> {
    for b in 4..=10 {
        let prf = keyed_prf(b, rng)?;
        let p = BitString::from_u64(rng.gen(), 4 * b as usize);
        let w = BitString::from_u64(rng.gen(), b as usize);
        let c = wbc_encipher(&prf, b as usize, &w, &p).map_err(|e| e.to_string())?;
        let back = wbc_decipher(&prf, b as usize, &w, &c).map_err(|e| e.to_string())?;
        ensure(back == p, || format!("WBC round trip fails at b = {b}"))?;

        let a = BitString::from_u64(rng.gen(), 2 * b as usize);
        let (c, tag) = siv_wrap(&prf, 16, &a, &p);
        ensure(siv_unwrap(&prf, &a, &c, &tag).ok() == Some(p.clone()), || {
            format!("SIV round trip fails at b = {b}")
        })?;

        let nonce = BitString::from_u64(rng.gen(), b as usize);
        let (state, _) = sae_start(&prf, 16, b as usize, &nonce);
        let (c, tag, _) = sae_wrap(&prf, &state, &a, &p);
        ensure(
            sae_unwrap(&prf, &state, &a, &c, &tag).map(|r| r.0).ok() == Some(p),
            || format!("SAE round trip fails at b = {b}"),
        )?;
    }
    Ok(())
}

/// One record per suite, then a summary.
pub fn run(seed: u64) -> (Vec<Value>, bool) {
    let mut records = Vec::new();
    let mut all = true;
    for (i, (name, suite)) in SUITES.iter().enumerate() {
        let mut rng = seeded_rng(derive_seed(seed, i as u64));
        let result = suite(&mut rng);
        all &= result.is_ok();
        let mut rec = json!({
            "record": "suite",
            "suite": name,
            "outcome": if result.is_ok() { "success" } else { "failure" },
        });
        if let Err(e) = result {
            rec["error"] = e.into();
        }
        records.push(rec);
    }
    records.push(json!({
        "record": "summary",
        "subcommand": "selftest",
        "master_seed": seed,
        "suites": SUITES.len(),
        "outcome": if all { "success" } else { "failure" },
    }));
    (records, all)
}
