//! Correlation-based sharpness measures: uniform correlations, tuning
//! degree, guessing probability, measurement robustness and bounds on the
//! tunability robustness.

use rand::Rng;
use serde::Serialize;

use crate::channel::{unital_from_approximate_choi, Channel, FuzzifyingOperation};
use crate::error::{dim_mismatch, Error, Result};
use crate::operator::{maximally_entangled, tensor, CMatrix, DensityMatrix, HermitianOperator, C64};
use crate::povm::{random_povm_with, sharp_eigenvectors, Povm};
use crate::random::seeded_rng;
use crate::sdp::{solve, BlockId, Coef, SdpProblem};

fn check_shapes(p: &Povm, z: &Povm) -> Result<()> {
    if p.dim() != z.dim() || p.outcomes() != z.outcomes() {
        return Err(dim_mismatch(format!(
            "POVMs with (dim, outcomes) = ({}, {}) and ({}, {})",
            p.dim(),
            p.outcomes(),
            z.dim(),
            z.outcomes()
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Correlation {
    Value { value: f64 },
    /// Some `Tr[P^x Z^{x'} ρ]` is not a probability.
    NotJointlyDistributed { max_imaginary: f64, min_real: f64 },
}

/// `κ_ρ = Σ_x Tr[P^x Z^x ρ]`, provided every `Tr[P^x Z^{x'} ρ]` is a
/// nonnegative real number.
pub fn degree_of_correlation(p: &Povm, z: &Povm, rho: &DensityMatrix) -> Result<Correlation> {
    check_shapes(p, z)?;
    if rho.dim() != p.dim() {
        return Err(dim_mismatch("state and POVMs act on different spaces"));
    }
    let mut max_imaginary = 0.0f64;
    let mut min_real = f64::INFINITY;
    let mut value = 0.0;
    for (x, px) in p.elements().iter().enumerate() {
        for (y, zy) in z.elements().iter().enumerate() {
            let t = (px.matrix() * zy.matrix() * rho.op().matrix()).trace();
            max_imaginary = max_imaginary.max(t.im.abs());
            min_real = min_real.min(t.re);
            if x == y {
                value += t.re;
            }
        }
    }
    Ok(if max_imaginary <= 1e-9 && min_real >= -1e-9 {
        Correlation::Value { value }
    } else {
        Correlation::NotJointlyDistributed { max_imaginary, min_real }
    })
}

/// `κ_u(P:Z) = (1/d) Σ_x Tr[P^x Z^x]`.
pub fn uniform_correlation(p: &Povm, z: &Povm) -> Result<f64> {
    check_shapes(p, z)?;
    let s: f64 = p.elements().iter().zip(z.elements()).map(|(a, b)| a.inner(b)).sum();
    Ok(s / p.dim() as f64)
}

/// `Σ_x ⟨Φ⁺|(P^x)ᵀ ⊗ Z^x|Φ⁺⟩`, the same quantity evaluated on a maximally
/// entangled pair. Squares the dimension; meant as a cross-check.
pub fn uniform_correlation_entangled(p: &Povm, z: &Povm) -> Result<f64> {
    check_shapes(p, z)?;
    let phi = maximally_entangled(p.dim());
    Ok(p.elements()
        .iter()
        .zip(z.elements())
        .map(|(a, b)| tensor(&a.transpose(), b).inner(phi.op()))
        .sum())
}

/// Optimal fuzzification of `p` against a reference `z`.
#[derive(Clone, Debug, Serialize)]
pub struct TuningReport {
    /// `κ*_u(P‖Z)`.
    pub value: f64,
    pub optimizer: FuzzifyingOperation,
    /// `κ_u(L(P):Z)` for the decoded optimizer `L`.
    pub optimizer_value: f64,
    pub reference: Povm,
    pub gap: f64,
    /// `(1/d_R) max_x Tr[Z^x]`.
    pub trivial_bound: f64,
    /// `κ*_u(Z)`.
    pub guessing_bound: f64,
}

struct TuningSolution {
    value: f64,
    gap: f64,
    optimizer: FuzzifyingOperation,
}

/// The fuzzifying-operation cone: Choi block `J` on `A⊗B`, and a vector
/// block `(μ, w_0, …, w_{N−1})` with `Tr_A J = μ I_B`, `μ + Σ w = 1`.
pub(crate) struct FuzzifyingVariables {
    pub(crate) choi: BlockId,
    pub(crate) weights: BlockId,
    pub(crate) in_dim: usize,
    pub(crate) out_dim: usize,
    pub(crate) outcomes: usize,
}

impl FuzzifyingVariables {
    pub(crate) fn add_to(prob: &mut SdpProblem, in_dim: usize, out_dim: usize, outcomes: usize) -> Self {
        let choi = prob.add_hermitian("choi", in_dim * out_dim);
        let weights = prob.add_nonneg("weights", outcomes + 1);
        let n = outcomes + 1;
        prob.add_operator_constraint("unital", &HermitianOperator::zeros(out_dim), |e| {
            let lifted = CMatrix::identity(in_dim, in_dim).kronecker(e.matrix());
            vec![(choi, Coef::Herm(lifted)), (weights, Coef::unit(n, 0, -e.trace()))]
        });
        prob.add_scalar_constraint("normalization", vec![(weights, Coef::Vector(vec![1.0; n]))], 1.0);
        Self { choi, weights, in_dim, out_dim, outcomes }
    }

    /// Coefficient of `J` whose pairing gives `Tr[Z · Tr_A[(Pᵀ ⊗ I) J]]`.
    pub(crate) fn image_coef(p: &HermitianOperator, z: &HermitianOperator) -> CMatrix {
        p.matrix().transpose().kronecker(z.matrix())
    }

    /// Decodes `(J, μ, w)` into a fuzzifying operation, repairing solver noise.
    pub(crate) fn decode(&self, sol: &crate::sdp::SdpSolution) -> Result<FuzzifyingOperation> {
        let v = sol.nonneg(self.weights);
        let mu = v[0].clamp(0.0, 1.0);
        let w: Vec<f64> = v[1..].iter().map(|x| x.max(0.0)).collect();
        let ws: f64 = w.iter().sum();
        let n = self.outcomes;
        let dist = if ws > 1e-12 { w.iter().map(|x| x / ws).collect() } else { vec![1.0 / n as f64; n] };
        if mu <= 1e-9 {
            let placeholder = Channel::completely_depolarizing_dual(self.in_dim, self.out_dim);
            return FuzzifyingOperation::new(placeholder, 0.0, dist);
        }
        let j = sol.hermitian(self.choi).scale(1.0 / mu);
        let dual = unital_from_approximate_choi(&j, self.in_dim, self.out_dim)?;
        let dist = if 1.0 - mu > 1e-9 { dist } else { vec![1.0 / n as f64; n] };
        FuzzifyingOperation::new(dual, mu, dist)
    }
}

fn solve_tuning(p: &Povm, z: &Povm) -> Result<TuningSolution> {
    if p.outcomes() != z.outcomes() {
        return Err(dim_mismatch(format!("{} outcomes versus {}", p.outcomes(), z.outcomes())));
    }
    let (da, dr, n) = (p.dim(), z.dim(), p.outcomes());
    let mut prob = SdpProblem::new();
    let vars = FuzzifyingVariables::add_to(&mut prob, da, dr, n);
    let scale = 1.0 / dr as f64;
    let mut c = CMatrix::zeros(da * dr, da * dr);
    for (px, zx) in p.elements().iter().zip(z.elements()) {
        c += FuzzifyingVariables::image_coef(px, zx) * C64::new(scale, 0.0);
    }
    prob.add_objective(vars.choi, Coef::Herm(c));
    let mut wc = vec![0.0; n + 1];
    for (x, zx) in z.elements().iter().enumerate() {
        wc[x + 1] = zx.trace() * scale;
    }
    prob.add_objective(vars.weights, Coef::Vector(wc));
    let sol = solve(&prob)?.require_optimal("tuning degree")?;
    let optimizer = vars.decode(&sol)?;
    Ok(TuningSolution { value: sol.objective, gap: sol.gap, optimizer })
}

/// `κ*_u(P‖Z)` without the bound checks of [`tuning_degree`].
pub fn tuning_value(p: &Povm, z: &Povm) -> Result<f64> {
    Ok(solve_tuning(p, z)?.value)
}

/// `(1/d_R) max_x Tr[Z^x]`, the tuning degree of every trivial POVM.
pub fn trivial_tuning(z: &Povm) -> f64 {
    z.elements().iter().map(|e| e.trace()).fold(0.0, f64::max) / z.dim() as f64
}

/// `κ*_u(P‖Z) = max_L κ_u(L(P):Z)` over fuzzifying operations `L: A → R`,
/// checked against `(1/d_R) max_x Tr Z^x ≤ κ*_u(P‖Z) ≤ κ*_u(Z)`.
pub fn tuning_degree(p: &Povm, z: &Povm) -> Result<TuningReport> {
    let sol = solve_tuning(p, z)?;
    let fuzzed = crate::channel::apply_fuzzifying(&sol.optimizer, p)?;
    let optimizer_value = uniform_correlation(&fuzzed, z)?;
    let trivial_bound = trivial_tuning(z);
    let guessing_bound = optimal_guessing(z)?.value;
    if sol.value < trivial_bound - 1e-7 || sol.value > guessing_bound + 1e-7 {
        return Err(Error::SolverFailure(format!(
            "tuning degree {} outside [{trivial_bound}, {guessing_bound}]",
            sol.value
        )));
    }
    Ok(TuningReport {
        value: sol.value,
        optimizer: sol.optimizer,
        optimizer_value,
        reference: z.clone(),
        gap: sol.gap,
        trivial_bound,
        guessing_bound,
    })
}

/// Guessing probability with primal and dual optimizers.
#[derive(Clone, Debug, Serialize)]
pub struct GuessingReport {
    /// `κ*_u(Z)` from the primal problem over measurements.
    pub value: f64,
    /// `(1/d) Tr Y` from the separately solved dual problem.
    pub dual_value: f64,
    pub gap: f64,
    pub measurement: Povm,
    /// Dual certificate `Y ⪰ Z^x` for all `x`.
    pub certificate: HermitianOperator,
}

/// `κ*_u(Z) = max_{Z̃} (1/d) Σ_x Tr[Z̃^x Z^x] = min { (1/d) Tr Y : Y ⪰ Z^x }`,
/// solving both problems.
pub fn optimal_guessing(z: &Povm) -> Result<GuessingReport> {
    let (d, n) = (z.dim(), z.outcomes());
    let scale = 1.0 / d as f64;

    let mut primal = SdpProblem::new();
    let blocks: Vec<BlockId> = (0..n).map(|x| primal.add_hermitian(&format!("measurement_{x}"), d)).collect();
    for (b, zx) in blocks.iter().zip(z.elements()) {
        primal.add_objective(*b, Coef::hermitian(&zx.scale(scale)));
    }
    primal.add_operator_constraint("completeness", &HermitianOperator::identity(d), |e| {
        blocks.iter().map(|b| (*b, Coef::hermitian(e))).collect()
    });
    let ps = solve(&primal)?.require_optimal("guessing probability")?;
    let measurement = Povm::normalized(blocks.iter().map(|b| ps.hermitian(*b).clone()).collect(), d)?;

    let mut dual = SdpProblem::new();
    let y = dual.add_hermitian("y", d);
    let slacks: Vec<BlockId> = (0..n).map(|x| dual.add_hermitian(&format!("slack_{x}"), d)).collect();
    dual.add_objective(y, Coef::hermitian(&HermitianOperator::identity(d).scale(-scale)));
    for (s, zx) in slacks.iter().zip(z.elements()) {
        let s = *s;
        dual.add_operator_constraint("dominance", zx, |e| {
            vec![(y, Coef::hermitian(e)), (s, Coef::hermitian(&e.scale(-1.0)))]
        });
    }
    let ds = solve(&dual)?.require_optimal("guessing probability (dual)")?;
    let dual_value = -ds.objective;
    let gap = (dual_value - ps.objective).abs();
    if gap > 1e-8 * (1.0 + dual_value.abs()) {
        return Err(Error::SolverFailure(format!(
            "guessing probability: primal {} and dual {} disagree",
            ps.objective, dual_value
        )));
    }
    Ok(GuessingReport { value: ps.objective, dual_value, gap, measurement, certificate: ds.hermitian(y).clone() })
}

/// `κ*_u(P‖P)`.
pub fn autotuning(p: &Povm) -> Result<f64> {
    tuning_value(p, p)
}

#[derive(Clone, Debug, Serialize)]
pub struct MeasurementRobustness {
    /// `min Σ_x s_x − 1` subject to `s_x I ⪰ P^x`.
    pub sdp: f64,
    /// `Σ_x λ_max(P^x) − 1`.
    pub closed_form: f64,
}

/// Robustness of `p` against the trivial POVMs, by SDP and in closed form;
/// fails if the two disagree by more than `1e-7`.
pub fn measurement_robustness(p: &Povm) -> Result<MeasurementRobustness> {
    let closed_form = measurement_robustness_closed_form(p)?;
    let (d, n) = (p.dim(), p.outcomes());
    let mut prob = SdpProblem::new();
    let s = prob.add_nonneg("levels", n);
    prob.add_objective(s, Coef::Vector(vec![-1.0; n]));
    for (x, px) in p.elements().iter().enumerate() {
        let t = prob.add_hermitian(&format!("gap_{x}"), d);
        prob.add_operator_constraint("domination", px, |e| {
            vec![(s, Coef::unit(n, x, e.trace())), (t, Coef::hermitian(&e.scale(-1.0)))]
        });
    }
    let sol = solve(&prob)?.require_optimal("measurement robustness")?;
    let sdp = -sol.objective - 1.0;
    if (sdp - closed_form).abs() > 1e-7 {
        return Err(Error::SolverFailure(format!(
            "measurement robustness: SDP {sdp} and closed form {closed_form} disagree"
        )));
    }
    Ok(MeasurementRobustness { sdp, closed_form })
}

pub fn measurement_robustness_closed_form(p: &Povm) -> Result<f64> {
    Ok(p.elements().iter().map(|e| e.max_eigenvalue()).sum::<Result<f64>>()? - 1.0)
}

#[derive(Clone, Debug, Serialize)]
pub struct RobustnessConfig {
    /// Random full-rank references tried per reference dimension.
    pub random_references: usize,
    pub seed: u64,
    /// Alternating refinement rounds started from the best reference.
    pub seesaw_rounds: usize,
}

impl Default for RobustnessConfig {
    fn default() -> Self {
        Self { random_references: 4, seed: 0, seesaw_rounds: 2 }
    }
}

/// Certified interval for the tunability robustness.
#[derive(Clone, Debug, Serialize)]
pub struct RobustnessReport {
    pub lower: f64,
    pub upper: f64,
    /// `upper − lower ≤ 1e-6`.
    pub exact: bool,
    pub lower_method: String,
    pub upper_method: String,
    /// Reference attaining the lower bound.
    pub lower_reference: Povm,
}

/// `d_R κ*_u(P‖Z) / max_x Tr Z^x − 1`.
pub fn reference_advantage(p: &Povm, z: &Povm) -> Result<f64> {
    let max_tr = z.elements().iter().map(|e| e.trace()).fold(0.0, f64::max);
    Ok(z.dim() as f64 * tuning_value(p, z)? / max_tr - 1.0)
}

fn eigenbasis_reference(p: &Povm) -> Option<Povm> {
    let (d, n) = (p.dim(), p.outcomes());
    if n > d || n < 2 {
        return None;
    }
    let tops: Vec<_> = p
        .elements()
        .iter()
        .map(|e| e.eig().ok().map(|eig| eig.vector(d - 1)))
        .collect::<Option<Vec<_>>>()?;
    // orthonormalize the top eigenvectors, then complete to a basis
    let mut basis: Vec<crate::operator::CVector> = Vec::with_capacity(d);
    let candidates = tops.into_iter().chain((0..d).map(|i| crate::povm::unit(d, i)));
    for mut v in candidates {
        for b in &basis {
            let c = b.dotc(&v);
            v -= b * c;
        }
        let nv = v.norm();
        if nv > 1e-6 {
            basis.push(v / C64::new(nv, 0.0));
        }
        if basis.len() == d {
            break;
        }
    }
    let mut elements = vec![HermitianOperator::zeros(d); n];
    for (k, v) in basis.iter().enumerate() {
        let x = k.min(n - 1);
        elements[x] = elements[x].add(&HermitianOperator::projector(v));
    }
    Povm::normalized(elements, d).ok()
}

/// Maximizes `Σ_x Tr[Q^x Z^x] / max_x Tr Z^x` over references `Z` on the
/// space of `q` by Dinkelbach iteration.
fn best_reference_for(q: &Povm) -> Result<Povm> {
    let (d, n) = (q.dim(), q.outcomes());
    let mut lambda = 0.0;
    let mut best: Option<Povm> = None;
    for _ in 0..20 {
        let mut prob = SdpProblem::new();
        let blocks: Vec<BlockId> = (0..n).map(|x| prob.add_hermitian(&format!("reference_{x}"), d)).collect();
        let t = prob.add_nonneg("level", 1 + n);
        for (b, qx) in blocks.iter().zip(q.elements()) {
            prob.add_objective(*b, Coef::hermitian(qx));
        }
        prob.add_objective(t, Coef::unit(1 + n, 0, -lambda));
        prob.add_operator_constraint("completeness", &HermitianOperator::identity(d), |e| {
            blocks.iter().map(|b| (*b, Coef::hermitian(e))).collect()
        });
        for (x, b) in blocks.iter().enumerate() {
            // Tr Z^x + slack_x = t
            let mut tv = vec![0.0; 1 + n];
            tv[0] = -1.0;
            tv[1 + x] = 1.0;
            prob.add_scalar_constraint(
                "level",
                vec![(*b, Coef::hermitian(&HermitianOperator::identity(d))), (t, Coef::Vector(tv))],
                0.0,
            );
        }
        let sol = solve(&prob)?.require_optimal("reference refinement")?;
        let z = Povm::normalized(blocks.iter().map(|b| sol.hermitian(*b).clone()).collect(), d)?;
        let num: f64 = q.elements().iter().zip(z.elements()).map(|(a, b)| a.inner(b)).sum();
        let den = z.elements().iter().map(|e| e.trace()).fold(0.0, f64::max);
        let ratio = num / den;
        best = Some(z);
        if ratio - lambda < 1e-10 {
            break;
        }
        lambda = ratio;
    }
    Ok(best.expect("at least one iteration"))
}

/// Tunability robustness as a certified interval: the upper end is
/// `min(Σ_x λ_max(P^x) − 1, N − 1)`, the lower end the best reference
/// advantage over a candidate family of references.
pub fn tunability_robustness(p: &Povm, config: &RobustnessConfig) -> Result<RobustnessReport> {
    let n = p.outcomes();
    let closed = measurement_robustness_closed_form(p)?;
    let cap = (n - 1) as f64;
    let (upper, upper_method) = if closed <= cap {
        (closed, "measurement robustness (sum of largest eigenvalues minus one)".to_string())
    } else {
        (cap, "outcome count minus one".to_string())
    };

    let mut candidates: Vec<(String, Povm)> = vec![("canonical basis reference".into(), Povm::computational_basis(n))];
    if let Some(z) = eigenbasis_reference(p) {
        candidates.push(("eigenbasis reference".into(), z));
    }
    if sharp_eigenvectors(p)?.is_none() {
        candidates.push(("autotuning reference".into(), p.clone()));
    }
    let mut rng = seeded_rng(config.seed);
    let mut dims = vec![n];
    if p.dim() != n {
        dims.push(p.dim());
    }
    for &dr in &dims {
        for _ in 0..config.random_references {
            candidates.push(("random reference".into(), random_full_rank_reference(dr, n, &mut rng)?));
        }
    }

    let mut best = (f64::NEG_INFINITY, String::new(), candidates[0].1.clone());
    for (method, z) in candidates {
        let adv = reference_advantage(p, &z)?;
        if adv > best.0 {
            best = (adv, method, z);
        }
    }
    for _ in 0..config.seesaw_rounds {
        if upper - best.0 <= 1e-7 {
            break;
        }
        let sol = solve_tuning(p, &best.2)?;
        let q = crate::channel::apply_fuzzifying(&sol.optimizer, p)?;
        let z = best_reference_for(&q)?;
        let adv = reference_advantage(p, &z)?;
        if adv > best.0 + 1e-10 {
            best = (adv, "see-saw refinement".into(), z);
        } else {
            break;
        }
    }

    let (mut lower, lower_method, lower_reference) = best;
    if lower > upper + 1e-7 {
        return Err(Error::SolverFailure(format!(
            "tunability robustness: lower bound {lower} exceeds upper bound {upper}"
        )));
    }
    lower = lower.clamp(0.0, upper.max(0.0));
    let upper = upper.max(0.0);
    Ok(RobustnessReport { lower, upper, exact: upper - lower <= 1e-6, lower_method, upper_method, lower_reference })
}

/// Random POVM whose elements all have minimum eigenvalue at least
/// `1e-6 · Tr/d`.
pub fn random_full_rank_reference<R: Rng + ?Sized>(dim: usize, n: usize, rng: &mut R) -> Result<Povm> {
    loop {
        let z = random_povm_with(dim, n, rng)?;
        if is_full_rank(&z)? {
            return Ok(z);
        }
    }
}

pub fn is_full_rank(z: &Povm) -> Result<bool> {
    for e in z.elements() {
        if e.min_eigenvalue()? < 1e-6 * e.trace() / z.dim() as f64 {
            return Ok(false);
        }
    }
    Ok(true)
}
