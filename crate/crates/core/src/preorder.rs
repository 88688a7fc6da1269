//! Decision procedures for the preprocessing, postprocessing and sharpness
//! preorders, with witness extraction for non-convertible pairs.

use serde::Serialize;

use crate::channel::{apply_fuzzifying, unital_from_approximate_choi, Channel, FuzzifyingOperation};
use crate::error::{dim_mismatch, Error, Result};
use crate::monotones::{is_full_rank, random_full_rank_reference, tuning_value, uniform_correlation, FuzzifyingVariables};
use crate::operator::HermitianOperator;
use crate::povm::Povm;
use crate::random::seeded_rng;
use crate::sdp::{feasibility, solve, BlockId, Coef, ConstraintId, Feasibility, SdpProblem, SdpSolution};
use crate::tolerances::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FeasibilityStatus {
    Feasible,
    Infeasible,
    Undecided,
}

fn check_outcomes(p: &Povm, q: &Povm) -> Result<()> {
    if p.outcomes() != q.outcomes() {
        return Err(dim_mismatch(format!("{} outcomes versus {}", p.outcomes(), q.outcomes())));
    }
    Ok(())
}

fn status_of(f: &Feasibility) -> FeasibilityStatus {
    match f {
        Feasibility::Feasible { .. } => FeasibilityStatus::Feasible,
        Feasibility::Infeasible { .. } => FeasibilityStatus::Infeasible,
        Feasibility::Undecided { .. } => FeasibilityStatus::Undecided,
    }
}

fn violation_of(f: &Feasibility) -> f64 {
    match f {
        Feasibility::Feasible { violation, .. } | Feasibility::Undecided { violation } => *violation,
        Feasibility::Infeasible { certificate } => certificate.margin,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PreprocessingVerdict {
    pub status: FeasibilityStatus,
    /// Unital map `E†: A → B` with `E†(P^x) = Q^x`, when feasible.
    pub channel: Option<Channel>,
    /// Phase-1 violation, or the certificate margin when infeasible.
    pub violation: f64,
}

/// Is there a unital CP map `E†` with `E†(P^x) = Q^x` for all `x`?
pub fn is_preprocessing_cleaner(p: &Povm, q: &Povm) -> Result<PreprocessingVerdict> {
    check_outcomes(p, q)?;
    let (da, db) = (p.dim(), q.dim());
    let mut prob = SdpProblem::new();
    let j = prob.add_hermitian("choi", da * db);
    for (px, qx) in p.elements().iter().zip(q.elements()) {
        prob.add_operator_constraint("image", qx, |e| {
            vec![(j, Coef::Herm(FuzzifyingVariables::image_coef(px, e)))]
        });
    }
    let f = feasibility(&prob)?;
    let mut status = status_of(&f);
    let violation = violation_of(&f);
    let channel = match &f {
        Feasibility::Feasible { point, .. } => {
            let c = unital_from_approximate_choi(point.hermitian(j), da, db)?;
            let residual = image_residual(&c, p, q)?;
            if residual > 1e-7 {
                status = FeasibilityStatus::Undecided;
                None
            } else {
                Some(c)
            }
        }
        _ => None,
    };
    Ok(PreprocessingVerdict { status, channel, violation })
}

fn image_residual(c: &Channel, p: &Povm, q: &Povm) -> Result<f64> {
    let mut s = 0.0;
    for (px, qx) in p.elements().iter().zip(q.elements()) {
        s += c.apply(px)?.distance(qx).powi(2);
    }
    Ok(s.sqrt())
}

#[derive(Clone, Debug, Serialize)]
pub struct PostprocessingVerdict {
    pub status: FeasibilityStatus,
    /// `post[x][y] = μ(y|x)` with `Q^y = Σ_x μ(y|x) P^x`, when feasible.
    pub post: Option<Vec<Vec<f64>>>,
    pub violation: f64,
}

/// Is there a stochastic matrix `μ(y|x)` with `Q^y = Σ_x μ(y|x) P^x`?
pub fn is_postprocessing_cleaner(p: &Povm, q: &Povm) -> Result<PostprocessingVerdict> {
    if p.dim() != q.dim() {
        return Err(dim_mismatch("postprocessing compares POVMs on the same space"));
    }
    let (np, nq) = (p.outcomes(), q.outcomes());
    let len = np * nq;
    let mut prob = SdpProblem::new();
    let m = prob.add_nonneg("post", len);
    for x in 0..np {
        let mut v = vec![0.0; len];
        v[x * nq..(x + 1) * nq].fill(1.0);
        prob.add_scalar_constraint("stochastic", vec![(m, Coef::Vector(v))], 1.0);
    }
    for (y, qy) in q.elements().iter().enumerate() {
        prob.add_operator_constraint("image", qy, |e| {
            let mut v = vec![0.0; len];
            for (x, px) in p.elements().iter().enumerate() {
                v[x * nq + y] = e.inner(px);
            }
            vec![(m, Coef::Vector(v))]
        });
    }
    let f = feasibility(&prob)?;
    let post = match &f {
        Feasibility::Feasible { point, .. } => {
            let v = point.nonneg(m);
            Some(
                (0..np)
                    .map(|x| {
                        let row: Vec<f64> = v[x * nq..(x + 1) * nq].iter().map(|a| a.max(0.0)).collect();
                        let s: f64 = row.iter().sum();
                        row.iter().map(|a| a / s).collect()
                    })
                    .collect(),
            )
        }
        _ => None,
    };
    Ok(PostprocessingVerdict { status: status_of(&f), post, violation: violation_of(&f) })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvertibilityStatus {
    Convertible,
    NotConvertible,
    Undecided,
}

/// A full-rank reference `Z` with `κ*_u(P‖Z) < κ_u(Q:Z)`.
#[derive(Clone, Debug, Serialize)]
pub struct WitnessCertificate {
    pub reference: Povm,
    /// `rhs − lhs`.
    pub margin: f64,
    /// `κ*_u(P‖Z)`.
    pub lhs: f64,
    /// `κ_u(Q:Z)`.
    pub rhs: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvertibilityVerdict {
    pub status: ConvertibilityStatus,
    pub transformation: Option<FuzzifyingOperation>,
    pub witness: Option<WitnessCertificate>,
    /// Aggregate Frobenius residual of the decoded transformation when
    /// convertible; otherwise the minimal operator-norm deviation `s`.
    pub residual: f64,
    /// Minimal `s` with `−sI ⪯ L(P)^x − Q^x ⪯ sI` over fuzzifying `L`.
    pub proximity: f64,
}

struct Proximity {
    value: f64,
    vars: FuzzifyingVariables,
    solution: SdpSolution,
    upper: Vec<ConstraintId>,
    lower: Vec<ConstraintId>,
}

/// `min s` over fuzzifying operations `L` with `−sI ⪯ L(P)^x − Q^x ⪯ sI`.
fn proximity(p: &Povm, q: &Povm) -> Result<Proximity> {
    check_outcomes(p, q)?;
    let (da, db, n) = (p.dim(), q.dim(), p.outcomes());
    let mut prob = SdpProblem::new();
    let vars = FuzzifyingVariables::add_to(&mut prob, da, db, n);
    let s = prob.add_nonneg("deviation", 1);
    prob.add_objective(s, Coef::Vector(vec![-1.0]));
    let mut upper = Vec::with_capacity(n);
    let mut lower = Vec::with_capacity(n);
    for (x, (px, qx)) in p.elements().iter().zip(q.elements()).enumerate() {
        let above: BlockId = prob.add_hermitian(&format!("above_{x}"), db);
        let below: BlockId = prob.add_hermitian(&format!("below_{x}"), db);
        let image = |e: &HermitianOperator| -> Vec<(BlockId, Coef)> {
            vec![
                (vars.choi, Coef::Herm(FuzzifyingVariables::image_coef(px, e))),
                (vars.weights, Coef::unit(n + 1, x + 1, e.trace())),
            ]
        };
        // L(P)^x − s I + below = Q^x
        upper.push(prob.add_operator_constraint("upper", qx, |e| {
            let mut t = image(e);
            t.push((s, Coef::Vector(vec![-e.trace()])));
            t.push((below, Coef::hermitian(e)));
            t
        }));
        // L(P)^x + s I − above = Q^x
        lower.push(prob.add_operator_constraint("lower", qx, |e| {
            let mut t = image(e);
            t.push((s, Coef::Vector(vec![e.trace()])));
            t.push((above, Coef::hermitian(&e.scale(-1.0))));
            t
        }));
    }
    let solution = solve(&prob)?.require_optimal("convertibility proximity problem")?;
    Ok(Proximity { value: (-solution.objective).max(0.0), vars, solution, upper, lower })
}

impl Proximity {
    /// Operators `Γ^x` with `Σ_x Tr[Γ^x Q^x] > max_L Σ_x Tr[Γ^x L(P)^x]`.
    fn separating_operators(&self) -> Vec<HermitianOperator> {
        self.upper
            .iter()
            .zip(&self.lower)
            .map(|(u, l)| {
                self.solution
                    .operator_multiplier(*u)
                    .add(&self.solution.operator_multiplier(*l))
                    .scale(-1.0)
            })
            .collect()
    }
}

/// Shifts and rescales `Γ^x` into the POVM `Z^x = I/N + (Γ^x − Γ̄)/β` with
/// the smallest `β` keeping every element's minimum eigenvalue at least
/// `1e-6 · Tr Z^x / d`.
fn shift_and_rescale(gammas: &[HermitianOperator]) -> Result<Povm> {
    let n = gammas.len();
    let d = gammas[0].dim();
    let mean = gammas
        .iter()
        .fold(HermitianOperator::zeros(d), |acc, g| acc.add(g))
        .scale(1.0 / n as f64);
    let centered: Vec<HermitianOperator> = gammas.iter().map(|g| g.sub(&mean)).collect();
    let floor = 1e-6;
    let mut beta = 0.0f64;
    for c in &centered {
        let needed = n as f64 * (floor * c.trace() / d as f64 - c.min_eigenvalue()?) / (1.0 - floor);
        beta = beta.max(needed);
    }
    if beta <= 0.0 {
        return Err(Error::SolverFailure("separating operators are trivial".into()));
    }
    // a hair above the threshold so rounding cannot undercut the rank floor
    let beta = beta * (1.0 + 1e-6);
    let id = HermitianOperator::identity(d).scale(1.0 / n as f64);
    Povm::normalized(centered.iter().map(|c| id.add(&c.scale(1.0 / beta))).collect(), d)
}

fn verified_witness(p: &Povm, q: &Povm, reference: Povm) -> Result<WitnessCertificate> {
    if !is_full_rank(&reference)? {
        return Err(Error::SolverFailure("witness reference is not full rank".into()));
    }
    let lhs = tuning_value(p, &reference)?;
    let rhs = uniform_correlation(q, &reference)?;
    let margin = rhs - lhs;
    if margin < Tolerances::current().witness_margin {
        return Err(Error::SolverFailure(format!("witness failed verification (margin {margin:.3e})")));
    }
    Ok(WitnessCertificate { reference, margin, lhs, rhs })
}

/// Builds and verifies a witness of non-convertibility from the dual
/// multipliers of the proximity problem.
pub fn extract_witness(p: &Povm, q: &Povm) -> Result<WitnessCertificate> {
    let prox = proximity(p, q)?;
    if prox.value < Tolerances::current().margin {
        return Err(Error::Precondition(format!(
            "the pair is within {:.3e} of convertible; no separating witness",
            prox.value
        )));
    }
    witness_from(p, q, &prox)
}

fn witness_from(p: &Povm, q: &Povm, prox: &Proximity) -> Result<WitnessCertificate> {
    let z = shift_and_rescale(&prox.separating_operators())?;
    verified_witness(p, q, z)
}

/// Decides `P ⪰ Q`: is there a fuzzifying operation mapping `P` to `Q`?
/// Convertible verdicts carry a verified transformation, non-convertible
/// ones a verified witness.
pub fn is_sharper(p: &Povm, q: &Povm) -> Result<ConvertibilityVerdict> {
    let tol = Tolerances::current();
    let prox = proximity(p, q)?;
    let s = prox.value;
    if s <= tol.feasible_below {
        let t = prox.vars.decode(&prox.solution)?;
        let residual = apply_fuzzifying(&t, p)?.aggregate_distance(q);
        if residual <= 1e-7 {
            return Ok(ConvertibilityVerdict {
                status: ConvertibilityStatus::Convertible,
                transformation: Some(t),
                witness: None,
                residual,
                proximity: s,
            });
        }
        return Ok(undecided(residual, s));
    }
    if s >= tol.margin {
        let w = witness_from(p, q, &prox)?;
        return Ok(ConvertibilityVerdict {
            status: ConvertibilityStatus::NotConvertible,
            transformation: None,
            witness: Some(w),
            residual: s,
            proximity: s,
        });
    }
    Ok(undecided(s, s))
}

fn undecided(residual: f64, proximity: f64) -> ConvertibilityVerdict {
    ConvertibilityVerdict {
        status: ConvertibilityStatus::Undecided,
        transformation: None,
        witness: None,
        residual,
        proximity,
    }
}

/// One-sided evidence for `P ⪰ Q` from sampled references.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TunabilityEvidence {
    NoViolationFound { trials: usize },
    Violation { reference: Povm, lhs: f64, rhs: f64 },
}

/// Checks `κ*_u(P‖Z) ≥ κ_u(Q:Z) − 1e-7` on `trials` random full-rank
/// references on the space of `q`. Finding no violation is evidence, not
/// proof; [`is_sharper`] is the exact decision.
pub fn always_more_tunable(p: &Povm, q: &Povm, trials: usize, seed: u64) -> Result<TunabilityEvidence> {
    check_outcomes(p, q)?;
    let mut rng = seeded_rng(seed);
    let refs = (0..trials)
        .map(|_| random_full_rank_reference(q.dim(), q.outcomes(), &mut rng))
        .collect::<Result<Vec<_>>>()?;
    always_more_tunable_on(p, q, &refs)
}

/// The same check on caller-chosen references.
pub fn always_more_tunable_on(p: &Povm, q: &Povm, references: &[Povm]) -> Result<TunabilityEvidence> {
    check_outcomes(p, q)?;
    for z in references {
        let lhs = tuning_value(p, z)?;
        let rhs = uniform_correlation(q, z)?;
        if lhs < rhs - 1e-7 {
            return Ok(TunabilityEvidence::Violation { reference: z.clone(), lhs, rhs });
        }
    }
    Ok(TunabilityEvidence::NoViolationFound { trials: references.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::povm::{extremal_trivial, random_povm, random_sharp_povm, trivial_povm};

    fn i0() -> Povm {
        extremal_trivial(1, 2, 2).unwrap()
    }

    fn zero_i() -> Povm {
        extremal_trivial(2, 2, 2).unwrap()
    }

    #[test]
    fn preprocessing_examples() {
        let q = random_povm(3, 2, 1).unwrap();
        let v = is_preprocessing_cleaner(&Povm::computational_basis(2), &q).unwrap();
        assert_eq!(v.status, FeasibilityStatus::Feasible);
        assert!(image_residual(v.channel.as_ref().unwrap(), &Povm::computational_basis(2), &q).unwrap() < 1e-7);

        assert_eq!(is_preprocessing_cleaner(&i0(), &zero_i()).unwrap().status, FeasibilityStatus::Infeasible);

        let with_zero = Povm::validate(
            vec![HermitianOperator::identity(2).scale(0.5), HermitianOperator::identity(2).scale(0.5), HermitianOperator::zeros(2)],
            2,
        )
        .unwrap();
        let target = trivial_povm(&[0.2, 0.3, 0.5], 2).unwrap();
        assert_eq!(
            is_preprocessing_cleaner(&with_zero, &target).unwrap().status,
            FeasibilityStatus::Infeasible
        );
    }

    #[test]
    fn postprocessing_examples() {
        let h0 = HermitianOperator::basis_projector(0, 2).scale(0.5);
        let h1 = HermitianOperator::basis_projector(1, 2).scale(0.5);
        let doubled = Povm::validate(vec![h0.clone(), h0, h1.clone(), h1], 2).unwrap();
        let v = is_postprocessing_cleaner(&doubled, &Povm::computational_basis(2)).unwrap();
        assert_eq!(v.status, FeasibilityStatus::Feasible);
        let post = v.post.unwrap();
        assert!((post[0][0] - 1.0).abs() < 1e-6 && (post[3][1] - 1.0).abs() < 1e-6);

        let half = trivial_povm(&[0.5, 0.5], 2).unwrap();
        let v = is_postprocessing_cleaner(&half, &Povm::computational_basis(2)).unwrap();
        assert_eq!(v.status, FeasibilityStatus::Infeasible);

        let p = random_povm(2, 3, 5).unwrap();
        assert_eq!(is_postprocessing_cleaner(&p, &p).unwrap().status, FeasibilityStatus::Feasible);
    }

    #[test]
    fn sharper_examples() {
        let b = Povm::computational_basis(2);
        let noisy = Povm::noisy_qubit_basis(0.4).unwrap();
        let v = is_sharper(&b, &noisy).unwrap();
        assert_eq!(v.status, ConvertibilityStatus::Convertible);
        assert!(v.residual <= 1e-7);
        let t = v.transformation.unwrap();
        assert!(apply_fuzzifying(&t, &b).unwrap().aggregate_distance(&noisy) <= 1e-7);

        let v = is_sharper(&i0(), &zero_i()).unwrap();
        assert_eq!(v.status, ConvertibilityStatus::Convertible);
        let t = v.transformation.unwrap();
        assert!(t.mu() < 1e-6 && (t.dist()[1] - 1.0).abs() < 1e-6);

        let v = is_sharper(&Povm::noisy_qubit_basis(0.5).unwrap(), &b).unwrap();
        assert_eq!(v.status, ConvertibilityStatus::NotConvertible);
        let w = v.witness.unwrap();
        assert!(w.margin >= 1e-8 && w.rhs - w.lhs >= 1e-8);
    }

    #[test]
    fn witness_examples() {
        let half = trivial_povm(&[0.5, 0.5], 2).unwrap();
        let b = Povm::computational_basis(2);
        let w = extract_witness(&half, &b).unwrap();
        assert!(w.lhs < w.rhs);
        assert!(is_full_rank(&w.reference).unwrap());

        let w = extract_witness(&Povm::noisy_qubit_basis(0.5).unwrap(), &Povm::noisy_qubit_basis(0.9).unwrap()).unwrap();
        assert!(w.margin > 0.0);

        assert!(matches!(extract_witness(&b, &half), Err(Error::Precondition(_))));
    }

    #[test]
    fn tunability_evidence() {
        let b = Povm::computational_basis(2);
        let noisy = Povm::noisy_qubit_basis(0.5).unwrap();
        assert!(matches!(
            always_more_tunable(&b, &noisy, 5, 1).unwrap(),
            TunabilityEvidence::NoViolationFound { trials: 5 }
        ));
        let half = trivial_povm(&[0.5, 0.5], 2).unwrap();
        match always_more_tunable_on(&half, &b, std::slice::from_ref(&b)).unwrap() {
            TunabilityEvidence::Violation { lhs, rhs, .. } => {
                assert!((lhs - 0.5).abs() < 1e-7 && (rhs - 1.0).abs() < 1e-12)
            }
            other => panic!("{other:?}"),
        }
        let p = random_povm(2, 2, 3).unwrap();
        assert!(matches!(
            always_more_tunable(&p, &p, 3, 2).unwrap(),
            TunabilityEvidence::NoViolationFound { .. }
        ));
    }

    #[test]
    fn sharp_povms_are_equivalent() {
        let p = random_sharp_povm(3, 2, 1).unwrap();
        let q = random_sharp_povm(2, 2, 2).unwrap();
        assert_eq!(is_sharper(&p, &q).unwrap().status, ConvertibilityStatus::Convertible);
        assert_eq!(is_sharper(&q, &p).unwrap().status, ConvertibilityStatus::Convertible);
    }
}
