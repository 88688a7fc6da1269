//! Randomized property suites over the whole library, and planted
//! convertible / non-convertible instance pairs.

use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, RngExt};
use serde::Serialize;

use crate::channel::{
    apply_fuzzifying, apply_lpsr, lpsr_to_fuzzifying, preprocess_from_sharp, random_unital_with,
    sharp_preprocessing_isometry, FuzzifyingOperation, LpsrOperation,
};
use crate::error::{Error, Result};
use crate::monotones::{
    autotuning, measurement_robustness, trivial_tuning, tunability_robustness, tuning_degree, tuning_value,
    uniform_correlation, RobustnessConfig,
};
use crate::operator::HermitianOperator;
use crate::povm::{extend_to_programmable, random_povm_with, random_sharp_povm_with, trivial_povm, Povm};
use crate::preorder::{always_more_tunable, always_more_tunable_on, extract_witness, is_sharper, ConvertibilityStatus, TunabilityEvidence};
use crate::random::{random_distribution, seeded_rng};
use crate::tolerances::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Blackwell,
    Monotone,
    CorollaryBounds,
    PgmSandwich,
    Theorem1Construction,
    LpsrRoundtrip,
    Robustness,
    Endpoints,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Blackwell,
        Suite::Monotone,
        Suite::CorollaryBounds,
        Suite::PgmSandwich,
        Suite::Theorem1Construction,
        Suite::LpsrRoundtrip,
        Suite::Robustness,
        Suite::Endpoints,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Blackwell => "blackwell",
            Suite::Monotone => "monotone",
            Suite::CorollaryBounds => "corollary_bounds",
            Suite::PgmSandwich => "pgm_sandwich",
            Suite::Theorem1Construction => "theorem1_construction",
            Suite::LpsrRoundtrip => "lpsr_roundtrip",
            Suite::Robustness => "robustness",
            Suite::Endpoints => "endpoints",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown suite `{s}`")))
    }
}

/// Upper limits for randomly drawn dimensions and outcome counts.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DimsConfig {
    pub max_dim: usize,
    pub max_outcomes: usize,
}

impl Default for DimsConfig {
    fn default() -> Self {
        Self { max_dim: 3, max_outcomes: 3 }
    }
}

impl DimsConfig {
    fn dim<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        rng.random_range(2..=self.max_dim.max(2))
    }

    fn outcomes<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        rng.random_range(2..=self.max_outcomes.max(2))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Failure {
    pub seed: u64,
    pub instance: String,
    pub violation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub trials: usize,
    pub seed: u64,
    pub passed: bool,
    pub failures: Vec<Failure>,
    /// Wall-clock time; kept out of the serialized report so that reports
    /// are reproducible byte for byte.
    #[serde(skip)]
    pub runtime_seconds: f64,
    pub tolerances: Tolerances,
}

/// Outcome of one trial: `None` on success, or a description and the size
/// of the violation.
type Trial = Option<(String, f64)>;

/// Runs `trials` instances of a suite; trial `k` uses seed `seed + k`.
pub fn run_suite(suite: Suite, trials: usize, seed: u64, dims: &DimsConfig) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut failures = Vec::new();
    for k in 0..trials {
        let s = seed.wrapping_add(k as u64);
        let outcome = run_trial(suite, k, s, dims)
            .map_err(|e| Error::SolverFailure(format!("suite {}, seed {s}: {e}", suite.name())))?;
        if let Some((instance, violation)) = outcome {
            failures.push(Failure { seed: s, instance, violation });
        }
    }
    Ok(SuiteReport {
        suite,
        trials,
        seed,
        passed: failures.is_empty(),
        failures,
        runtime_seconds: start.elapsed().as_secs_f64(),
        tolerances: *Tolerances::current(),
    })
}

fn run_trial(suite: Suite, k: usize, seed: u64, dims: &DimsConfig) -> Result<Trial> {
    let mut rng = seeded_rng(seed);
    match suite {
        Suite::Blackwell => blackwell_trial(k, seed, dims),
        Suite::Monotone => monotone_trial(&mut rng, dims),
        Suite::CorollaryBounds => corollary_trial(&mut rng, dims),
        Suite::PgmSandwich => pgm_trial(&mut rng, dims),
        Suite::Theorem1Construction => construction_trial(k, &mut rng, dims),
        Suite::LpsrRoundtrip => lpsr_trial(k, &mut rng, dims),
        Suite::Robustness => robustness_trial(&mut rng, dims),
        Suite::Endpoints => endpoints_trial(k, &mut rng, dims),
    }
}

fn fail(instance: String, violation: f64) -> Result<Trial> {
    Ok(Some((instance, violation)))
}

/// Random fuzzifying operation `A → B` with weight `μ ∈ [0, mu_max]`.
pub fn random_fuzzifying_with<R: Rng + ?Sized>(
    in_dim: usize,
    out_dim: usize,
    outcomes: usize,
    mu_max: f64,
    rng: &mut R,
) -> Result<FuzzifyingOperation> {
    let dual = random_unital_with(in_dim, out_dim, rng)?;
    let mu = mu_max * rng.random::<f64>();
    FuzzifyingOperation::new(dual, mu, random_distribution(outcomes, rng))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PlantKind {
    Convertible,
    NotConvertible,
}

#[derive(Clone, Debug, Serialize)]
pub struct PlantedInstance {
    pub p: Povm,
    pub q: Povm,
    pub truth: PlantKind,
    /// The operation used to build a convertible pair.
    pub transformation: Option<FuzzifyingOperation>,
    /// Verified witness margin of a non-convertible pair.
    pub witness_margin: Option<f64>,
}

/// Builds a pair with known convertibility. Convertible pairs are `(p, L(p))`
/// for random `p` and random fuzzifying `L` with `μ ≤ 0.9`. Non-convertible
/// pairs are `(L(p), p)` with `μ ≤ 0.9`; their status is confirmed by a
/// verified witness, and candidates too close to convertible are redrawn.
pub fn plant_instance(kind: PlantKind, dims: (usize, usize, usize), seed: u64) -> Result<PlantedInstance> {
    let (da, db, n) = dims;
    let mut rng = seeded_rng(seed);
    match kind {
        PlantKind::Convertible => {
            let p = random_povm_with(da, n, &mut rng)?;
            let f = random_fuzzifying_with(da, db, n, 0.9, &mut rng)?;
            let q = apply_fuzzifying(&f, &p)?;
            Ok(PlantedInstance { p, q, truth: kind, transformation: Some(f), witness_margin: None })
        }
        PlantKind::NotConvertible => {
            for _ in 0..20 {
                // the sharper side lives on B, its fuzzification on A
                let q = random_povm_with(db, n, &mut rng)?;
                let f = random_fuzzifying_with(db, da, n, 0.9, &mut rng)?;
                let p = apply_fuzzifying(&f, &q)?;
                if let Ok(w) = extract_witness(&p, &q) {
                    return Ok(PlantedInstance {
                        p,
                        q,
                        truth: kind,
                        transformation: None,
                        witness_margin: Some(w.margin),
                    });
                }
            }
            Err(Error::SolverFailure(format!("no verifiable non-convertible pair for seed {seed}")))
        }
    }
}

/// Planted pair with its dimensions drawn from `dims`; even trials are
/// convertible, odd ones not.
fn blackwell_trial(k: usize, seed: u64, dims: &DimsConfig) -> Result<Trial> {
    let mut rng = seeded_rng(seed);
    let shape = (dims.dim(&mut rng), dims.dim(&mut rng), dims.outcomes(&mut rng));
    let kind = if k.is_multiple_of(2) { PlantKind::Convertible } else { PlantKind::NotConvertible };
    let inst = plant_instance(kind, shape, seed)?;
    let label = format!("{kind:?} pair, (d_A, d_B, N) = {shape:?}");
    let verdict = is_sharper(&inst.p, &inst.q)?;
    match (kind, verdict.status) {
        (PlantKind::Convertible, ConvertibilityStatus::Convertible) => {
            if verdict.residual > 1e-7 {
                return fail(format!("{label}: transformation residual"), verdict.residual);
            }
            if let TunabilityEvidence::Violation { lhs, rhs, .. } = always_more_tunable(&inst.p, &inst.q, 3, seed)? {
                return fail(format!("{label}: convertible but a reference separates"), rhs - lhs);
            }
            Ok(None)
        }
        (PlantKind::NotConvertible, ConvertibilityStatus::NotConvertible) => {
            let w = verdict.witness.expect("non-convertible verdicts carry a witness");
            if w.margin < Tolerances::current().witness_margin {
                return fail(format!("{label}: witness margin too small"), w.margin);
            }
            match always_more_tunable_on(&inst.p, &inst.q, std::slice::from_ref(&w.reference))? {
                TunabilityEvidence::Violation { .. } => Ok(None),
                TunabilityEvidence::NoViolationFound { .. } => fail(format!("{label}: witness does not separate"), w.margin),
            }
        }
        (_, status) => fail(format!("{label}: verdict {status:?}"), verdict.proximity),
    }
}

fn monotone_trial<R: Rng + ?Sized>(rng: &mut R, dims: &DimsConfig) -> Result<Trial> {
    let (da, db, dr, n) = (dims.dim(rng), dims.dim(rng), dims.dim(rng), dims.outcomes(rng));
    let p = random_povm_with(da, n, rng)?;
    let f = random_fuzzifying_with(da, db, n, 1.0, rng)?;
    let z = random_povm_with(dr, n, rng)?;
    let before = tuning_value(&p, &z)?;
    let after = tuning_value(&apply_fuzzifying(&f, &p)?, &z)?;
    if after > before + 1e-7 {
        return fail(format!("tuning degree rose from {before} to {after}"), after - before);
    }
    Ok(None)
}

fn corollary_trial<R: Rng + ?Sized>(rng: &mut R, dims: &DimsConfig) -> Result<Trial> {
    let (da, dr, n) = (dims.dim(rng), dims.dim(rng), dims.outcomes(rng));
    let p = random_povm_with(da, n, rng)?;
    let z = random_povm_with(dr, n, rng)?;
    // tuning_degree itself rejects values outside the bounds
    match tuning_degree(&p, &z) {
        Ok(r) => {
            let excess = (r.trivial_bound - r.value).max(r.value - r.guessing_bound);
            if excess > 1e-7 {
                return fail(format!("κ* = {} outside [{}, {}]", r.value, r.trivial_bound, r.guessing_bound), excess);
            }
            Ok(None)
        }
        Err(Error::SolverFailure(msg)) if msg.contains("outside") => fail(msg, f64::NAN),
        Err(e) => Err(e),
    }
}

fn pgm_trial<R: Rng + ?Sized>(rng: &mut R, dims: &DimsConfig) -> Result<Trial> {
    let p = random_povm_with(dims.dim(rng), dims.outcomes(rng), rng)?;
    let k = autotuning(&p)?;
    let u = uniform_correlation(&p, &p)?;
    let slack = (k - u).min(u - (2.0 * k - 1.0));
    if slack < -1e-7 {
        return fail(format!("κ*(P‖P) = {k}, κ(P:P) = {u}"), -slack);
    }
    Ok(None)
}

/// Targets with a zero element on every third trial.
fn construction_trial<R: Rng + ?Sized>(k: usize, rng: &mut R, dims: &DimsConfig) -> Result<Trial> {
    let (da, db) = (dims.dim(rng), dims.dim(rng));
    let n = rng.random_range(2..=da.min(dims.max_outcomes.max(2)));
    let p = random_sharp_povm_with(da, n, rng)?;
    let q = if k % 3 == 2 {
        let inner = random_povm_with(db, n - 1, rng)?;
        let mut els = inner.elements().to_vec();
        els.insert(rng.random_range(0..n), HermitianOperator::zeros(db));
        Povm::validate(els, db)?
    } else {
        random_povm_with(db, n, rng)?
    };
    let v = sharp_preprocessing_isometry(&p, &q)?;
    let defect = v.isometry_defect();
    if defect > 1e-10 {
        return fail(format!("isometry defect, (d_A, d_B, N) = ({da}, {db}, {n})"), defect);
    }
    let e = preprocess_from_sharp(&p, &q)?;
    let worst = p
        .elements()
        .iter()
        .zip(q.elements())
        .map(|(px, qx)| Ok(e.apply(px)?.distance(qx)))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    if worst > 1e-9 {
        return fail(format!("E†(P^x) ≠ Q^x, (d_A, d_B, N) = ({da}, {db}, {n})"), worst);
    }
    let unital = e.apply(&HermitianOperator::identity(da))?.distance(&HermitianOperator::identity(db));
    if unital > 1e-9 {
        return fail("preprocessing is not unital".into(), unital);
    }
    Ok(None)
}

/// Random LPSR operation; one shared value always runs the device
/// unfuzzified (`μ(0|r) = 1`), and every fifth trial all of them do.
pub fn random_lpsr_with<R: Rng + ?Sized>(
    in_dim: usize,
    out_dim: usize,
    outcomes: usize,
    all_unfuzzified: bool,
    rng: &mut R,
) -> Result<LpsrOperation> {
    let r = rng.random_range(1..=3);
    let channels = (0..r).map(|_| random_unital_with(in_dim, out_dim, rng)).collect::<Result<Vec<_>>>()?;
    let cond = (0..r)
        .map(|i| {
            if i == 0 || all_unfuzzified {
                let mut c = vec![0.0; outcomes + 1];
                c[0] = 1.0;
                c
            } else {
                random_distribution(outcomes + 1, rng)
            }
        })
        .collect();
    LpsrOperation::new(random_distribution(r, rng), channels, cond)
}

fn lpsr_trial<R: Rng + ?Sized>(k: usize, rng: &mut R, dims: &DimsConfig) -> Result<Trial> {
    let (da, db, n) = (dims.dim(rng), dims.dim(rng), dims.outcomes(rng));
    let l = random_lpsr_with(da, db, n, k % 5 == 4, rng)?;
    let p = random_povm_with(da, n, rng)?;
    let via_lpsr = apply_lpsr(&l, &extend_to_programmable(&p))?;
    let via_f = apply_fuzzifying(&lpsr_to_fuzzifying(&l)?, &p)?;
    let diff = via_f.distance(via_lpsr.base());
    if diff > 1e-9 {
        return fail(format!("slot-0 mismatch, (d_A, d_B, N) = ({da}, {db}, {n})"), diff);
    }
    Ok(None)
}

fn robustness_trial<R: Rng + ?Sized>(rng: &mut R, dims: &DimsConfig) -> Result<Trial> {
    let (d, n) = (dims.dim(rng), dims.outcomes(rng));
    let p1 = random_povm_with(d, n, rng)?;
    let p2 = random_povm_with(d, n, rng)?;
    let alpha: f64 = rng.random();
    let p = Povm::mixture(&[(alpha, &p1), (1.0 - alpha, &p2)])?;
    let cfg = RobustnessConfig { random_references: 2, seed: rng.random(), seesaw_rounds: 1 };
    let r = tunability_robustness(&p, &cfg)?;
    let cap = (n - 1) as f64;
    if r.lower < 0.0 || r.lower > r.upper || r.upper > cap + 1e-7 {
        return fail(format!("interval [{}, {}] with N = {n}", r.lower, r.upper), r.lower - r.upper);
    }
    measurement_robustness(&p)?;
    let u1 = tunability_robustness(&p1, &cfg)?.upper;
    let u2 = tunability_robustness(&p2, &cfg)?.upper;
    let excess = r.upper - (alpha * u1 + (1.0 - alpha) * u2);
    if excess > 1e-7 {
        return fail("upper bound is not convex".into(), excess);
    }
    Ok(None)
}

/// Even trials: random trivial POVMs must give `[0, 0]`. Odd trials: sharp
/// bases with `N = d` must give `[N − 1, N − 1]`.
fn endpoints_trial<R: Rng + ?Sized>(k: usize, rng: &mut R, dims: &DimsConfig) -> Result<Trial> {
    let cfg = RobustnessConfig { random_references: 1, seed: 0, seesaw_rounds: 1 };
    if k.is_multiple_of(2) {
        let (d, n) = (dims.dim(rng), dims.outcomes(rng));
        let t = trivial_povm(&random_distribution(n, rng), d)?;
        let r = tunability_robustness(&t, &cfg)?;
        let dev = r.lower.abs().max(r.upper.abs());
        if dev > 1e-6 {
            return fail(format!("trivial POVM interval [{}, {}]", r.lower, r.upper), dev);
        }
        let z = random_povm_with(d, n, rng)?;
        let dev = (tuning_value(&t, &z)? - trivial_tuning(&z)).abs();
        if dev > 1e-7 {
            return fail("trivial tuning degree".into(), dev);
        }
    } else {
        let d = dims.dim(rng).min(dims.max_outcomes.max(2));
        let p = random_sharp_povm_with(d, d, rng)?;
        let r = tunability_robustness(&p, &cfg)?;
        let target = (d - 1) as f64;
        let dev = (r.lower - target).abs().max((r.upper - target).abs());
        if dev > 1e-6 {
            return fail(format!("sharp basis d = {d}: interval [{}, {}]", r.lower, r.upper), dev);
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn planting_is_deterministic() {
        let a = plant_instance(PlantKind::Convertible, (2, 2, 2), 7).unwrap();
        let b = plant_instance(PlantKind::Convertible, (2, 2, 2), 7).unwrap();
        assert_eq!(a.p, b.p);
        assert_eq!(a.q, b.q);
        assert_eq!(is_sharper(&a.p, &a.q).unwrap().status, ConvertibilityStatus::Convertible);
    }

    #[test]
    fn planted_not_convertible_has_witness() {
        let inst = plant_instance(PlantKind::NotConvertible, (2, 2, 2), 3).unwrap();
        assert!(inst.witness_margin.unwrap() >= 1e-8);
        assert_eq!(is_sharper(&inst.p, &inst.q).unwrap().status, ConvertibilityStatus::NotConvertible);
    }

    #[test]
    fn small_suites_pass() {
        for s in Suite::ALL {
            let r = run_suite(s, 4, 11, &DimsConfig::default()).unwrap();
            assert!(r.passed, "{}: {:?}", s.name(), r.failures);
        }
    }
}
