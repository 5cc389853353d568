//! One runner per attack subcommand. Each resolves its keys with defaults,
//! validates caps, and runs seeded trials.

use std::sync::Arc;

use rand::Rng;
use serde::Serialize;
use serde_json::Value;
use simonbench::attacks::{
    build_construction, choose_lambda, dense_polynomial, extract_key, extract_round_key_anf,
    extract_round_key_lagrange, forge_sae, forge_siv_variant_i, forge_siv_variant_ii, gfn_period_sampler,
    random_low_degree_function, sae_expected_period, siv_expected_shifts, wbc_distinguisher, wbc_expected_period,
    AttackError, ConstructionSpec, ConstructionVariant, FarfalleOracle, GfnSpec, SaeService, SivService, WbcOracle,
    WbcVerdict, CONSTRUCTION_INPUT_CAP, MAX_GFN_BITS,
};
use simonbench::bitlinalg::BitVector;
use simonbench::bitlinalg::SpanBuilder;
use simonbench::boolfunc::{low_weight_inputs, s_set_size, LowWeightSamples, VectorialFunction, DEFAULT_INPUT_CAP};
use simonbench::farfalle::{BitString, Farfalle, FarfalleConfig, FarfalleParams, RollKind, RollSpec};
use simonbench::finitefield::{FieldPolynomial, FieldSpec};
use simonbench::simon::{
    demo_oracles, planted_period_oracle, recover_period_space, DemoKind, PeriodSpace, SimonRunReport,
    StabilizationPolicy,
};
use simonbench::{random_permutation, seeded_rng, SeededRng};

use crate::config::{check_range, parse_hex, parse_pairs, ConfigError, Options};
use crate::report::{hex, hex_all, run_trials, Experiment, Trial};

pub type Records = (Vec<Value>, usize);

const MAX_TRIALS: usize = 100_000;

fn trials(opts: &Options, default: usize) -> Result<usize, ConfigError> {
    check_range("trials", opts.trials.unwrap_or(default), 1, MAX_TRIALS)
}

fn experiment(
    subcommand: &'static str,
    opts: &Options,
    trials: usize,
    config: impl Serialize,
) -> Result<Experiment, ConfigError> {
    Ok(Experiment {
        subcommand,
        master_seed: opts.require_seed()?,
        trials,
        config: serde_json::to_value(config).expect("config serializes"),
    })
}

fn stop() -> StabilizationPolicy {
    StabilizationPolicy::default()
}

fn simon_fields(trial: &mut Trial, report: &SimonRunReport) {
    trial.set("recovered", hex_all(&report.recovered.basis_raw()));
    trial.set("verified", report.verified);
    trial.set("simon_queries", report.superposition_queries);
}

#[derive(Debug, Clone, Serialize)]
struct FarfalleSetup {
    b: u32,
    roll: RollKind,
    blank_index_mode: bool,
}

impl FarfalleSetup {
    fn from_opts(opts: &Options, b_default: u32, b_max: u32) -> Result<Self, ConfigError> {
        let b = check_range("b", opts.b.unwrap_or(b_default), 4, b_max)?;
        let roll = match opts.roll.as_deref().unwrap_or("linear") {
            "linear" => RollKind::Linear,
            "table" => RollKind::Table,
            other => return Err(ConfigError::invalid("roll", format!("unknown roll {other:?}"))),
        };
        Ok(FarfalleSetup {
            b,
            roll,
            blank_index_mode: opts.blank_index_mode.unwrap_or(false),
        })
    }

    fn params(&self, rng: &mut SeededRng) -> Result<FarfalleParams, AttackError> {
        let mut config = FarfalleConfig::new(self.b, rng.gen());
        config.roll_c = self.roll;
        config.blank_index_mode = self.blank_index_mode;
        Ok(FarfalleParams::generate(&config)?)
    }
}

/// Draws keys until `accept` holds; the harness uses it to skip keys whose
/// periods would be zero.
fn keyed<F>(params: Arc<FarfalleParams>, rng: &mut SeededRng, accept: F) -> Result<Farfalle, AttackError>
where
    F: Fn(&Farfalle) -> bool,
{
    let key_bits = params.block_bits() as usize - 1;
    loop {
        let key = BitString::from_u64(rng.gen(), key_bits);
        let prf = Farfalle::new(params.clone(), &key)?;
        if accept(&prf) {
            return Ok(prf);
        }
    }
}

fn nonzero_mask(prf: &Farfalle) -> bool {
    prf.key_state().mask() != 0
}

fn guarded(result: Result<Trial, AttackError>) -> Trial {
    result.unwrap_or_else(Trial::failure)
}

// simon-demo

#[derive(Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "kebab-case")]
enum DemoChoice {
    Planted,
    EvenMansour,
    Lrw,
    Feistel3,
}

#[derive(Debug, Clone, Serialize)]
struct SimonDemoConfig {
    kind: DemoChoice,
    n: u32,
    dim: Option<usize>,
}

pub fn simon_demo(opts: &Options) -> Result<Records, ConfigError> {
    opts.restrict("simon-demo", &["seed", "trials", "kind", "n", "dim"])?;
    let kind = match opts.kind.as_deref().unwrap_or("planted") {
        "planted" => DemoChoice::Planted,
        "even-mansour" => DemoChoice::EvenMansour,
        "lrw" => DemoChoice::Lrw,
        "feistel3" => DemoChoice::Feistel3,
        other => return Err(ConfigError::invalid("kind", format!("unknown oracle {other:?}"))),
    };
    let n_max = match kind {
        DemoChoice::Planted => DEFAULT_INPUT_CAP,
        DemoChoice::Feistel3 => 11,
        _ => 12,
    };
    let n = check_range("n", opts.n.unwrap_or(10), 2, n_max)?;
    let dim = match (kind, opts.dim) {
        (DemoChoice::Planted, Some(d)) => Some(check_range("dim", d, 0, n as usize)?),
        (_, Some(_)) => return Err(ConfigError::invalid("dim", "only the planted oracle takes a dimension")),
        (_, None) => None,
    };
    let cfg = SimonDemoConfig { kind, n, dim };
    let exp = experiment("simon-demo", opts, trials(opts, 20)?, &cfg)?;
    Ok(run_trials(&exp, |seed| guarded(simon_demo_trial(&cfg, seed))))
}

fn random_basis(n: u32, dim: usize, rng: &mut SeededRng) -> Vec<u64> {
    let mut span = SpanBuilder::new(n as usize);
    let mut basis = Vec::new();
    while basis.len() < dim {
        let v = rng.gen_range(1..1u64 << n);
        if span.insert(&BitVector::from_u64(v, n as usize)) {
            basis.push(v);
        }
    }
    basis
}

fn simon_demo_trial(cfg: &SimonDemoConfig, seed: u64) -> Result<Trial, AttackError> {
    let mut rng = seeded_rng(seed);
    let n = cfg.n;
    let (f, expected): (VectorialFunction, Vec<u64>) = match cfg.kind {
        DemoChoice::Planted => {
            let dim = cfg.dim.unwrap_or_else(|| rng.gen_range(1..=2));
            let basis = random_basis(n, dim, &mut rng);
            (planted_period_oracle(n, &basis, &mut rng)?, basis)
        }
        DemoChoice::EvenMansour => {
            let demo = demo_oracles(DemoKind::EvenMansour, n, rng.gen())?;
            (demo.function, vec![demo.planted])
        }
        DemoChoice::Lrw => {
            let t0 = rng.gen_range(0..1u64 << n);
            let t1 = (t0 + rng.gen_range(1..1u64 << n)) % (1 << n);
            let demo = demo_oracles(DemoKind::Lrw { t0, t1 }, n, rng.gen())?;
            (demo.function, vec![demo.planted])
        }
        DemoChoice::Feistel3 => {
            let gfn = random_feistel(n, &mut rng)?;
            let alpha = rng.gen_range(0..1u64 << n);
            let beta = alpha ^ rng.gen_range(1..1u64 << n);
            let f = simonbench::attacks::feistel3_distinguisher_oracle(&gfn, alpha, beta)?;
            let s = gfn.round_function(0, alpha) ^ gfn.round_function(0, beta);
            (f, vec![1 << n | s])
        }
    };
    let truth = PeriodSpace::new(f.input_bits(), &f.period_space_bruteforce(), true);
    let report = recover_period_space(&f, stop(), &mut rng);
    let planted_in = expected.iter().all(|&s| truth.contains_raw(s));
    let exact = report.verified && report.recovered.same_space(&truth);
    let mut trial = Trial::new(exact && planted_in);
    trial.set("planted", hex_all(&expected));
    trial.set("brute_force", hex_all(&truth.basis_raw()));
    simon_fields(&mut trial, &report);
    Ok(trial)
}

fn random_feistel(n: u32, rng: &mut SeededRng) -> Result<GfnSpec, AttackError> {
    let functions = (0..3)
        .map(|_| VectorialFunction::new(n, n, random_permutation(n, rng)))
        .collect::<Result<Vec<_>, _>>()?;
    let keys = (0..3).map(|_| rng.gen_range(0..1u64 << n)).collect();
    GfnSpec::new(n, functions, keys)
}

// farfalle-period

#[derive(Debug, Clone, Serialize)]
struct PeriodConfig {
    farfalle: FarfalleSetup,
    variants: Vec<String>,
    output_block: usize,
}

pub fn farfalle_period(opts: &Options) -> Result<Records, ConfigError> {
    opts.restrict(
        "farfalle-period",
        &[
            "seed",
            "trials",
            "b",
            "variant",
            "output-block",
            "roll",
            "blank-index-mode",
        ],
    )?;
    let farfalle = FarfalleSetup::from_opts(opts, 8, CONSTRUCTION_INPUT_CAP / 2)?;
    let all = ["c1a", "c1b", "c2i", "c2ii"];
    let variants: Vec<String> = match opts.variant.as_deref().unwrap_or("all") {
        "all" => all.iter().map(|s| s.to_string()).collect(),
        v if all.contains(&v) => vec![v.to_string()],
        other => {
            return Err(ConfigError::invalid(
                "variant",
                format!("unknown construction {other:?}"),
            ))
        }
    };
    let output_block = check_range("output-block", opts.output_block.unwrap_or(0), 0, 8)?;
    let cfg = PeriodConfig {
        farfalle,
        variants,
        output_block,
    };
    let exp = experiment("farfalle-period", opts, trials(opts, 20)?, &cfg)?;
    Ok(run_trials(&exp, |seed| guarded(farfalle_period_trial(&cfg, seed))))
}

fn random_variant(name: &str, b: u32, rng: &mut SeededRng) -> ConstructionVariant {
    let mut c = || rng.gen_range(0..1u64 << b);
    match name {
        "c1a" => ConstructionVariant::C1a,
        "c1b" => ConstructionVariant::C1b { alpha: c(), beta: c() },
        "c2i" => {
            let constants = (0..5).map(|_| c()).collect();
            let i = rng.gen_range(0..4);
            let j = rng.gen_range(i + 1..5);
            ConstructionVariant::C2i {
                constants,
                pair: (i, j),
            }
        }
        _ => ConstructionVariant::C2ii {
            alpha0: c(),
            alpha1: c(),
        },
    }
}

fn farfalle_period_trial(cfg: &PeriodConfig, seed: u64) -> Result<Trial, AttackError> {
    let mut rng = seeded_rng(seed);
    let params = Arc::new(cfg.farfalle.params(&mut rng)?);
    let prf = keyed(params, &mut rng, nonzero_mask)?;
    let oracle = FarfalleOracle::new(prf);
    let mut success = true;
    let mut rows = Vec::new();
    for name in &cfg.variants {
        let spec = ConstructionSpec::new(random_variant(name, cfg.farfalle.b, &mut rng), cfg.output_block);
        let f = build_construction(&spec, &oracle)?;
        let asserted = spec.asserted_periods(oracle.secret());
        let asserted_space = PeriodSpace::from_raw(f.input_bits(), &asserted, true);
        let truth = PeriodSpace::new(f.input_bits(), &f.period_space_bruteforce(), true);
        let report = recover_period_space(&f, stop(), &mut rng);
        oracle.charge_superposition(report.superposition_queries);
        let ok = truth.same_space(&asserted_space) && report.verified && report.recovered.same_space(&truth);
        success &= ok;
        rows.push(serde_json::json!({
            "construction": spec,
            "asserted": hex_all(&asserted),
            "brute_force": hex_all(&truth.basis_raw()),
            "recovered": hex_all(&report.recovered.basis_raw()),
            "simon_queries": report.superposition_queries,
            "ok": ok,
        }));
    }
    Ok(Trial::new(success)
        .with("constructions", rows)
        .with("queries", oracle.counts()))
}

// extract-key

#[derive(Debug, Clone, Serialize)]
struct ExtractConfig {
    b: u32,
    pairs: Vec<(usize, usize)>,
    roll_poly: Option<String>,
    blank_index_mode: bool,
}

pub fn extract_key_cmd(opts: &Options) -> Result<Records, ConfigError> {
    opts.restrict(
        "extract-key",
        &["seed", "trials", "b", "pairs", "roll-poly", "blank-index-mode"],
    )?;
    let b = check_range("b", opts.b.unwrap_or(16), 4, 16)?;
    let pairs = parse_pairs(opts.pairs.as_deref().unwrap_or("0-1"))?;
    if pairs.is_empty() {
        return Err(ConfigError::invalid("pairs", "at least one pair is needed"));
    }
    let roll_poly = match &opts.roll_poly {
        Some(text) => {
            let poly = parse_hex("roll-poly", text)?;
            RollSpec::companion(b, poly).map_err(|e| ConfigError::invalid("roll-poly", e.to_string()))?;
            Some(hex(poly))
        }
        None => None,
    };
    let cfg = ExtractConfig {
        b,
        pairs,
        roll_poly,
        blank_index_mode: opts.blank_index_mode.unwrap_or(false),
    };
    let exp = experiment("extract-key", opts, trials(opts, 50)?, &cfg)?;
    Ok(run_trials(&exp, |seed| guarded(extract_key_trial(&cfg, seed))))
}

fn extract_key_trial(cfg: &ExtractConfig, seed: u64) -> Result<Trial, AttackError> {
    let mut rng = seeded_rng(seed);
    let mut config = FarfalleConfig::new(cfg.b, rng.gen());
    config.blank_index_mode = cfg.blank_index_mode;
    let mut params = FarfalleParams::generate(&config)?;
    if let Some(poly) = &cfg.roll_poly {
        let poly = u64::from_str_radix(poly, 16).expect("validated");
        params = params.with_roll_c(RollSpec::companion(cfg.b, poly)?)?;
    }
    let prf = keyed(Arc::new(params), &mut rng, nonzero_mask)?;
    let planted_k = prf.key_state().mask();
    let planted_key = prf.key_state().key().clone();
    let oracle = FarfalleOracle::new(prf);
    let report = extract_key(&oracle, &cfg.pairs, stop(), &mut rng)?;
    let full = report.system_rank == cfg.b as usize;
    let success = if full {
        report.recovered_k.as_ref().and_then(|k| k.to_u64()) == Some(planted_k)
            && report.recovered_key.as_ref() == Some(&planted_key)
    } else {
        report.candidates.contains(planted_k)
    };
    Ok(Trial::new(success)
        .with("planted_k", hex(planted_k))
        .with("planted_key", &planted_key)
        .with("extraction", &report)
        .with("queries", oracle.counts()))
}

// forge-sae

#[derive(Debug, Clone, Serialize)]
struct SaeConfig {
    farfalle: FarfalleSetup,
    t: usize,
    ell: usize,
    nonce_bits: usize,
}

pub fn forge_sae_cmd(opts: &Options) -> Result<Records, ConfigError> {
    opts.restrict(
        "forge-sae",
        &[
            "seed",
            "trials",
            "b",
            "t",
            "ell",
            "nonce-bits",
            "roll",
            "blank-index-mode",
        ],
    )?;
    let farfalle = FarfalleSetup::from_opts(opts, 8, 16)?;
    let b = farfalle.b as usize;
    let cfg = SaeConfig {
        t: check_range("t", opts.t.unwrap_or(16), 1, 64)?,
        ell: check_range("ell", opts.ell.unwrap_or(b), 1, 64)?,
        nonce_bits: check_range("nonce-bits", opts.nonce_bits.unwrap_or(b), 1, 64)?,
        farfalle,
    };
    let exp = experiment("forge-sae", opts, trials(opts, 50)?, &cfg)?;
    Ok(run_trials(&exp, |seed| guarded(forge_sae_trial(&cfg, seed))))
}

fn forge_sae_trial(cfg: &SaeConfig, seed: u64) -> Result<Trial, AttackError> {
    let mut rng = seeded_rng(seed);
    let params = Arc::new(cfg.farfalle.params(&mut rng)?);
    let (t, ell, nb) = (cfg.t, cfg.ell, cfg.nonce_bits);
    let prf = keyed(params, &mut rng, |p| {
        SaeService::new(p.clone(), t, ell, nb).is_ok_and(|s| sae_expected_period(&s) != 0)
    })?;
    let service = SaeService::new(prf, t, ell, nb)?;
    let expected = sae_expected_period(&service);
    let result = forge_sae(&service, stop(), &mut rng, None)?;
    Ok(Trial::new(result.accepted)
        .with("expected_period", hex(expected))
        .with("forgery", &result))
}

// forge-siv

#[derive(Debug, Clone, Serialize)]
struct SivConfig {
    farfalle: FarfalleSetup,
    t: usize,
    variants: Vec<String>,
}

pub fn forge_siv_cmd(opts: &Options) -> Result<Records, ConfigError> {
    opts.restrict(
        "forge-siv",
        &["seed", "trials", "b", "t", "variant", "roll", "blank-index-mode"],
    )?;
    let farfalle = FarfalleSetup::from_opts(opts, 8, CONSTRUCTION_INPUT_CAP / 2)?;
    let variants = match opts.variant.as_deref().unwrap_or("both") {
        "both" => vec!["i".to_string(), "ii".to_string()],
        v @ ("i" | "ii") => vec![v.to_string()],
        other => {
            return Err(ConfigError::invalid(
                "variant",
                format!("unknown SIV variant {other:?}"),
            ))
        }
    };
    let cfg = SivConfig {
        t: check_range("t", opts.t.unwrap_or(16), 1, 64)?,
        farfalle,
        variants,
    };
    let exp = experiment("forge-siv", opts, trials(opts, 50)?, &cfg)?;
    Ok(run_trials(&exp, |seed| guarded(forge_siv_trial(&cfg, seed))))
}

fn forge_siv_trial(cfg: &SivConfig, seed: u64) -> Result<Trial, AttackError> {
    let mut rng = seeded_rng(seed);
    let params = Arc::new(cfg.farfalle.params(&mut rng)?);
    let t = cfg.t;
    let prf = keyed(params, &mut rng, |p| {
        SivService::new(p.clone(), t).is_ok_and(|s| {
            let (s1, s2) = siv_expected_shifts(&s);
            s1 != 0 && s2 != 0
        })
    })?;
    let mut success = true;
    let mut trial = Trial::new(true);
    for variant in &cfg.variants {
        let service = SivService::new(prf.clone(), t)?;
        let (s1, s2) = siv_expected_shifts(&service);
        let result = if variant == "i" {
            forge_siv_variant_i(&service, stop(), &mut rng, None)?
        } else {
            forge_siv_variant_ii(&service, stop(), &mut rng, None)?
        };
        success &= result.accepted;
        trial.set(
            &format!("variant_{variant}"),
            serde_json::json!({
                "expected_shifts": [hex(s1), hex(s2)],
                "forgery": result,
            }),
        );
    }
    trial.success = success;
    Ok(trial)
}

// distinguish-wbc

#[derive(Debug, Clone, Serialize)]
struct WbcConfig {
    farfalle: FarfalleSetup,
    oracles: Vec<String>,
}

pub fn distinguish_wbc(opts: &Options) -> Result<Records, ConfigError> {
    opts.restrict(
        "distinguish-wbc",
        &["seed", "trials", "b", "oracle", "roll", "blank-index-mode"],
    )?;
    let farfalle = FarfalleSetup::from_opts(opts, 8, 16)?;
    let oracles = match opts.oracle.as_deref().unwrap_or("both") {
        "both" => vec!["real".to_string(), "random".to_string()],
        v @ ("real" | "random") => vec![v.to_string()],
        other => return Err(ConfigError::invalid("oracle", format!("unknown oracle {other:?}"))),
    };
    let cfg = WbcConfig { farfalle, oracles };
    let exp = experiment("distinguish-wbc", opts, trials(opts, 50)?, &cfg)?;
    Ok(run_trials(&exp, |seed| guarded(wbc_trial(&cfg, seed))))
}

fn wbc_trial(cfg: &WbcConfig, seed: u64) -> Result<Trial, AttackError> {
    let mut rng = seeded_rng(seed);
    let b = cfg.farfalle.b;
    let params = Arc::new(cfg.farfalle.params(&mut rng)?);
    let tweak = BitString::from_u64(rng.gen(), b as usize);
    let alpha = rng.gen_range(0..1u64 << (2 * b));
    let prf = keyed(params, &mut rng, |p| wbc_expected_period(p, &tweak, alpha) != 0)?;
    let mut trial = Trial::new(true);
    let mut success = true;
    for kind in &cfg.oracles {
        let (oracle, expected_verdict) = if kind == "real" {
            (
                WbcOracle::real(prf.clone(), b as usize, tweak.clone())?,
                WbcVerdict::Real,
            )
        } else {
            (WbcOracle::random(b, rng.gen())?, WbcVerdict::Random)
        };
        let report = wbc_distinguisher(&oracle, alpha, stop(), &mut rng)?;
        let correct = report.verdict == expected_verdict;
        success &= correct;
        let mut row = serde_json::json!({ "report": report, "correct": correct });
        if kind == "real" {
            row["expected_period"] = hex(wbc_expected_period(&prf, &tweak, alpha)).into();
        }
        trial.set(kind, row);
    }
    trial.set("alpha", hex(alpha));
    trial.success = success;
    Ok(trial)
}

// gfn-extract

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Method {
    Lagrange,
    Anf,
}

#[derive(Debug, Clone, Serialize)]
struct GfnConfig {
    method: Method,
    n: u32,
    degree: u32,
    modulus: Option<String>,
}

/// Either a report or the bare sample count.
pub enum GfnOutput {
    Records(Records),
    Count(u128),
}

pub fn gfn_extract(opts: &Options) -> Result<GfnOutput, ConfigError> {
    opts.restrict(
        "gfn-extract",
        &["seed", "trials", "method", "n", "degree", "modulus", "count-only"],
    )?;
    let method = match opts.method.as_deref().unwrap_or("lagrange") {
        "lagrange" => Method::Lagrange,
        "anf" => Method::Anf,
        other => return Err(ConfigError::invalid("method", format!("unknown method {other:?}"))),
    };
    if opts.count_only.unwrap_or(false) {
        if method != Method::Anf {
            return Err(ConfigError::invalid(
                "count-only",
                "only the anf method has a sample count",
            ));
        }
        let n = check_range("n", opts.n.unwrap_or(8), 1, 64)?;
        let d = check_range("degree", opts.degree.unwrap_or(3), 1, n)?;
        return Ok(GfnOutput::Count(s_set_size(n, d - 1)));
    }
    let n = check_range("n", opts.n.unwrap_or(8), 2, MAX_GFN_BITS)?;
    let degree = match method {
        Method::Lagrange => check_range("degree", opts.degree.unwrap_or(8), 2, (1u32 << n) - 1)?,
        Method::Anf => check_range("degree", opts.degree.unwrap_or(3), 2, n)?,
    };
    let modulus = match (&opts.modulus, method) {
        (Some(_), Method::Anf) => return Err(ConfigError::invalid("modulus", "only the lagrange method uses a field")),
        (Some(text), Method::Lagrange) => {
            let m = parse_hex("modulus", text)?;
            FieldSpec::new(n, m).map_err(|e| ConfigError::invalid("modulus", e.to_string()))?;
            Some(hex(m))
        }
        (None, _) => None,
    };
    let cfg = GfnConfig {
        method,
        n,
        degree,
        modulus,
    };
    let exp = experiment("gfn-extract", opts, trials(opts, 50)?, &cfg)?;
    Ok(GfnOutput::Records(run_trials(&exp, |seed| {
        guarded(match cfg.method {
            Method::Lagrange => lagrange_trial(&cfg, seed),
            Method::Anf => anf_trial(&cfg, seed),
        })
    })))
}

/// Round key `k`, difference `σ` and a Feistel keyed with `k` in round 1.
fn planted_gfn(f: VectorialFunction, n: u32, rng: &mut SeededRng) -> Result<(GfnSpec, u64, u64), AttackError> {
    let k = rng.gen_range(1..1u64 << n);
    let sigma = rng.gen_range(1..1u64 << n);
    let keys = vec![k, rng.gen_range(0..1u64 << n), rng.gen_range(0..1u64 << n)];
    Ok((GfnSpec::with_public_function(n, f, keys)?, k, sigma))
}

fn lagrange_trial(cfg: &GfnConfig, seed: u64) -> Result<Trial, AttackError> {
    let mut rng = seeded_rng(seed);
    let n = cfg.n;
    let spec = match &cfg.modulus {
        Some(m) => FieldSpec::new(n, u64::from_str_radix(m, 16).expect("validated"))?,
        None => FieldSpec::with_default_modulus(n)?,
    };
    let poly: FieldPolynomial = dense_polynomial(spec, cfg.degree as usize, &mut rng)?;
    let table = VectorialFunction::new(n, n, poly.evaluate_all())?;
    let (gfn, k, sigma) = planted_gfn(table, n, &mut rng)?;
    let mut xs: Vec<u64> = Vec::new();
    while xs.len() < cfg.degree as usize {
        let x = rng.gen_range(0..1u64 << n);
        if !xs.contains(&x) {
            xs.push(x);
        }
    }
    let mut samples = Vec::with_capacity(xs.len());
    let mut queries = 0;
    for &x in &xs {
        let sample = gfn_period_sampler(&gfn, sigma, x, stop(), &mut rng)?;
        queries += sample.simon_queries;
        samples.push((x, sample.s));
    }
    let result = extract_round_key_lagrange(&poly, sigma, &samples, stop(), &mut rng)?;
    let mut expected = vec![k, k ^ sigma];
    expected.sort_unstable();
    let success = result.survivors == expected && result.samples_used == cfg.degree as usize;
    Ok(Trial::new(success)
        .with("k", hex(k))
        .with("sigma", hex(sigma))
        .with("polynomial", hex_all(poly.coeffs()))
        .with("survivors", hex_all(&result.survivors))
        .with("delta_period_dim", result.delta_periods.dim())
        .with("samples_used", result.samples_used)
        .with("sampling_queries", queries)
        .with("simon_queries", result.simon_queries))
}

fn anf_trial(cfg: &GfnConfig, seed: u64) -> Result<Trial, AttackError> {
    let mut rng = seeded_rng(seed);
    let n = cfg.n;
    let (f, lambda, d) = loop {
        let f = random_low_degree_function(n, cfg.degree, &mut rng)?;
        if let Some((lambda, d)) = choose_lambda(&f) {
            break (f, lambda, d);
        }
    };
    let (gfn, k, sigma) = planted_gfn(f.clone(), n, &mut rng)?;
    let mut pairs = Vec::new();
    let mut queries = 0;
    for x in low_weight_inputs(n, d - 1) {
        let sample = gfn_period_sampler(&gfn, sigma, x, stop(), &mut rng)?;
        queries += sample.simon_queries;
        pairs.push((x, sample.s));
    }
    let samples = LowWeightSamples::new(n, n, d - 1, pairs)?;
    let result = extract_round_key_anf(&f, lambda, sigma, &samples, stop(), &mut rng)?;
    let truth = VectorialFunction::from_fn(n, 1, |x| {
        ((lambda & (f.eval(x ^ k) ^ f.eval(x ^ k ^ sigma))).count_ones() & 1) as u64
    })?;
    let exact = result.reconstructed == truth;
    let count_ok = result.samples_used as u128 == s_set_size(n, d - 1);
    let success = exact && count_ok && result.survivors.contains(&k);
    Ok(Trial::new(success)
        .with("k", hex(k))
        .with("sigma", hex(sigma))
        .with("lambda", hex(lambda))
        .with("component_degree", d)
        .with("reconstruction_exact", exact)
        .with("survivors", hex_all(&result.survivors))
        .with("delta_period_dim", result.delta_periods.dim())
        .with("samples_used", result.samples_used)
        .with("sampling_queries", queries)
        .with("simon_queries", result.simon_queries))
}
