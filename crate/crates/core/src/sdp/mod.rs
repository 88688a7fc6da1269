//! Dense semidefinite programming over complex Hermitian variables.
//!
//! A problem has Hermitian PSD blocks and nonnegative vector blocks, a linear
//! objective to maximize, and real-linear equality constraints. Constraints
//! are either scalar or operator-valued; an operator constraint
//! `Σ_b Φ_b(X_b) = C` is given through the adjoints `Φ_b*`, evaluated on an
//! orthonormal basis of Hermitian matrices so that each basis element yields
//! one real row.
//!
//! A Hermitian block of dimension `n` is solved as a real symmetric block of
//! dimension `2n` through the embedding
//!
//! ```text
//!   H ↦ [[Re H, −Im H], [Im H, Re H]]
//! ```
//!
//! with `Re Tr[A H] = ½ Tr[emb(A) emb(H)]`. Returned complex values are read
//! back by averaging over the embedding's symmetry, which makes them exactly
//! Hermitian.

mod ipm;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::operator::{CMatrix, HermitianOperator, C64};
use crate::tolerances::Tolerances;
use ipm::{RData, StdProblem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BlockId(usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ConstraintId(usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockKind {
    /// Complex Hermitian PSD matrix of the given dimension.
    Hermitian(usize),
    /// Vector of nonnegative reals of the given length.
    Nonneg(usize),
}

/// Coefficient of a linear functional on one block: `Re Tr[A X]` for a
/// Hermitian block, `aᵀx` for a vector block.
#[derive(Clone, Debug)]
pub enum Coef {
    Herm(CMatrix),
    Vector(Vec<f64>),
}

impl Coef {
    pub fn hermitian(h: &HermitianOperator) -> Self {
        Coef::Herm(h.matrix().clone())
    }

    /// `e_index` scaled by `value` in a vector block of length `len`.
    pub fn unit(len: usize, index: usize, value: f64) -> Self {
        let mut v = vec![0.0; len];
        v[index] = value;
        Coef::Vector(v)
    }
}

#[derive(Clone, Debug)]
struct Block {
    name: String,
    kind: BlockKind,
}

#[derive(Clone, Debug)]
struct Row {
    terms: Vec<(BlockId, Coef)>,
    rhs: f64,
}

#[derive(Clone, Debug)]
enum GroupKind {
    Scalar,
    Operator { dim: usize },
}

#[derive(Clone, Debug)]
struct Group {
    name: String,
    kind: GroupKind,
    first_row: usize,
}

#[derive(Clone, Debug, Default)]
pub struct SdpProblem {
    blocks: Vec<Block>,
    objective: Vec<(BlockId, Coef)>,
    objective_constant: f64,
    rows: Vec<Row>,
    groups: Vec<Group>,
}

/// Orthonormal basis of `d×d` Hermitian matrices under `Re Tr[A B]`.
pub fn hermitian_basis(d: usize) -> Vec<HermitianOperator> {
    let mut out = Vec::with_capacity(d * d);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..d {
        out.push(HermitianOperator::basis_projector(i, d));
    }
    for i in 0..d {
        for j in (i + 1)..d {
            let mut re = CMatrix::zeros(d, d);
            re[(i, j)] = C64::new(s, 0.0);
            re[(j, i)] = C64::new(s, 0.0);
            out.push(HermitianOperator::symmetrized(re));
            let mut im = CMatrix::zeros(d, d);
            im[(i, j)] = C64::new(0.0, s);
            im[(j, i)] = C64::new(0.0, -s);
            out.push(HermitianOperator::symmetrized(im));
        }
    }
    out
}

impl SdpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_hermitian(&mut self, name: &str, dim: usize) -> BlockId {
        self.blocks.push(Block { name: name.into(), kind: BlockKind::Hermitian(dim) });
        BlockId(self.blocks.len() - 1)
    }

    pub fn add_nonneg(&mut self, name: &str, len: usize) -> BlockId {
        self.blocks.push(Block { name: name.into(), kind: BlockKind::Nonneg(len) });
        BlockId(self.blocks.len() - 1)
    }

    pub fn block_kind(&self, b: BlockId) -> BlockKind {
        self.blocks[b.0].kind
    }

    pub fn block_name(&self, b: BlockId) -> &str {
        &self.blocks[b.0].name
    }

    /// Adds `coef` to the objective (maximized).
    pub fn add_objective(&mut self, block: BlockId, coef: Coef) {
        self.objective.push((block, coef));
    }

    pub fn add_objective_constant(&mut self, c: f64) {
        self.objective_constant += c;
    }

    pub fn add_scalar_constraint(
        &mut self,
        name: &str,
        terms: Vec<(BlockId, Coef)>,
        rhs: f64,
    ) -> ConstraintId {
        let first_row = self.rows.len();
        self.rows.push(Row { terms, rhs });
        self.groups.push(Group { name: name.into(), kind: GroupKind::Scalar, first_row });
        ConstraintId(self.groups.len() - 1)
    }

    /// Adds the operator equality `Σ_b Φ_b(X_b) = rhs`. `adjoint(E)` must
    /// return the coefficients `Φ_b*(E)` for a Hermitian `E` of the same
    /// dimension as `rhs`.
    pub fn add_operator_constraint<F>(
        &mut self,
        name: &str,
        rhs: &HermitianOperator,
        adjoint: F,
    ) -> ConstraintId
    where
        F: Fn(&HermitianOperator) -> Vec<(BlockId, Coef)>,
    {
        let dim = rhs.dim();
        let first_row = self.rows.len();
        for e in hermitian_basis(dim) {
            let terms = adjoint(&e);
            self.rows.push(Row { terms, rhs: e.inner(rhs) });
        }
        self.groups.push(Group {
            name: name.into(),
            kind: GroupKind::Operator { dim },
            first_row,
        });
        ConstraintId(self.groups.len() - 1)
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Real dimension of the variable space.
    pub fn real_dimension(&self) -> usize {
        self.blocks
            .iter()
            .map(|b| match b.kind {
                BlockKind::Hermitian(n) => n * n,
                BlockKind::Nonneg(n) => n,
            })
            .sum()
    }

    fn check(&self) -> Result<()> {
        if self.real_dimension() > 10_000 {
            return Err(Error::InvalidInput(format!(
                "problem has real dimension {} (limit 10000)",
                self.real_dimension()
            )));
        }
        let check_terms = |terms: &[(BlockId, Coef)]| -> Result<()> {
            for (b, c) in terms {
                let kind = self
                    .blocks
                    .get(b.0)
                    .ok_or_else(|| Error::InvalidInput("unknown block".into()))?
                    .kind;
                match (kind, c) {
                    (BlockKind::Hermitian(n), Coef::Herm(m)) if m.nrows() == n && m.ncols() == n => {}
                    (BlockKind::Nonneg(n), Coef::Vector(v)) if v.len() == n => {}
                    _ => {
                        return Err(Error::DimensionMismatch(format!(
                            "coefficient shape does not match block `{}`",
                            self.blocks[b.0].name
                        )))
                    }
                }
            }
            Ok(())
        };
        check_terms(&self.objective)?;
        for r in &self.rows {
            check_terms(&r.terms)?;
        }
        Ok(())
    }

    /// Real standard form (minimization of the negated objective), with rows
    /// normalized to unit norm. Returns the row scales.
    fn to_standard(&self) -> (StdProblem, Vec<f64>) {
        let shapes: Vec<RData> = self
            .blocks
            .iter()
            .map(|b| match b.kind {
                BlockKind::Hermitian(n) => RData::Mat(DMatrix::zeros(2 * n, 2 * n)),
                BlockKind::Nonneg(n) => RData::Diag(DVector::zeros(n)),
            })
            .collect();
        let embed = |c: &Coef| -> RData {
            match c {
                Coef::Herm(m) => RData::Mat(embed_hermitian(m) * 0.5),
                Coef::Vector(v) => RData::Diag(DVector::from_column_slice(v)),
            }
        };
        let accumulate = |terms: &[(BlockId, Coef)]| -> Vec<(usize, RData)> {
            let mut out: Vec<(usize, RData)> = Vec::new();
            for (b, c) in terms {
                let e = embed(c);
                match out.iter_mut().find(|(k, _)| *k == b.0) {
                    Some((_, acc)) => add_into(acc, &e),
                    None => out.push((b.0, e)),
                }
            }
            out
        };
        let mut c: Vec<RData> = shapes.clone();
        for (k, e) in accumulate(&self.objective) {
            add_into(&mut c[k], &e);
        }
        for ck in c.iter_mut() {
            scale_into(ck, -1.0);
        }
        let mut a = Vec::with_capacity(self.rows.len());
        let mut b = DVector::zeros(self.rows.len());
        let mut scales = Vec::with_capacity(self.rows.len());
        for (i, r) in self.rows.iter().enumerate() {
            let mut terms = accumulate(&r.terms);
            let norm = terms.iter().map(|(_, t)| t.inner(t)).sum::<f64>().sqrt();
            let s = if norm > 0.0 { 1.0 / norm } else { 1.0 };
            for (_, t) in terms.iter_mut() {
                scale_into(t, s);
            }
            b[i] = r.rhs * s;
            scales.push(s);
            a.push(terms);
        }
        (StdProblem { shapes, c, a, b }, scales)
    }
}

fn add_into(acc: &mut RData, e: &RData) {
    match (acc, e) {
        (RData::Mat(a), RData::Mat(b)) => *a += b,
        (RData::Diag(a), RData::Diag(b)) => *a += b,
        _ => unreachable!("block kind mismatch"),
    }
}

fn scale_into(acc: &mut RData, s: f64) {
    match acc {
        RData::Mat(a) => *a *= s,
        RData::Diag(a) => *a *= s,
    }
}

/// Real symmetric embedding of a (Hermitian) complex matrix.
pub fn embed_hermitian(m: &CMatrix) -> DMatrix<f64> {
    let n = m.nrows();
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let (bi, ii) = (i / n, i % n);
        let (bj, jj) = (j / n, j % n);
        let z = h[(ii, jj)];
        match (bi, bj) {
            (0, 0) | (1, 1) => z.re,
            (0, 1) => -z.im,
            _ => z.im,
        }
    })
}

/// Hermitian matrix represented by a real `2n×2n` symmetric matrix, averaged
/// over the embedding symmetry.
pub fn project_embedded(x: &DMatrix<f64>) -> HermitianOperator {
    let n = x.nrows() / 2;
    let m = CMatrix::from_fn(n, n, |i, j| {
        let re = 0.5 * (x[(i, j)] + x[(n + i, n + j)]);
        let im = 0.5 * (x[(n + i, j)] - x[(i, n + j)]);
        C64::new(re, im)
    });
    HermitianOperator::symmetrized(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    SolverFailure,
}

#[derive(Clone, Debug)]
pub enum BlockValue {
    Hermitian(HermitianOperator),
    Nonneg(Vec<f64>),
}

/// Result of [`solve`]. Multipliers follow the convention of the dual
/// `min Σ_i b_i y_i  s.t.  Σ_i y_i A_i − C = Z ⪰ 0`.
#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub objective: f64,
    pub dual_objective: f64,
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    primal: Vec<BlockValue>,
    dual_slack: Vec<BlockValue>,
    multipliers: Vec<f64>,
    groups: Vec<Group>,
}

impl SdpSolution {
    pub fn hermitian(&self, b: BlockId) -> &HermitianOperator {
        match &self.primal[b.0] {
            BlockValue::Hermitian(h) => h,
            BlockValue::Nonneg(_) => panic!("block is not Hermitian"),
        }
    }

    pub fn nonneg(&self, b: BlockId) -> &[f64] {
        match &self.primal[b.0] {
            BlockValue::Nonneg(v) => v,
            BlockValue::Hermitian(_) => panic!("block is not a vector block"),
        }
    }

    pub fn dual_slack_hermitian(&self, b: BlockId) -> &HermitianOperator {
        match &self.dual_slack[b.0] {
            BlockValue::Hermitian(h) => h,
            BlockValue::Nonneg(_) => panic!("block is not Hermitian"),
        }
    }

    pub fn dual_slack_nonneg(&self, b: BlockId) -> &[f64] {
        match &self.dual_slack[b.0] {
            BlockValue::Nonneg(v) => v,
            BlockValue::Hermitian(_) => panic!("block is not a vector block"),
        }
    }

    pub fn scalar_multiplier(&self, c: ConstraintId) -> f64 {
        let g = &self.groups[c.0];
        self.multipliers[g.first_row]
    }

    /// Multiplier of an operator constraint, assembled as `Σ_k y_k E_k`.
    pub fn operator_multiplier(&self, c: ConstraintId) -> HermitianOperator {
        let g = &self.groups[c.0];
        let GroupKind::Operator { dim } = g.kind else {
            panic!("constraint `{}` is scalar", g.name)
        };
        let mut m = HermitianOperator::zeros(dim);
        for (k, e) in hermitian_basis(dim).iter().enumerate() {
            m = m.add(&e.scale(self.multipliers[g.first_row + k]));
        }
        m
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SdpStatus::Optimal
    }

    /// Converts a non-optimal status into an error naming `context`.
    pub fn require_optimal(self, context: &str) -> Result<Self> {
        match self.status {
            SdpStatus::Optimal => Ok(self),
            SdpStatus::Infeasible => Err(Error::SolverFailure(format!("{context}: infeasible"))),
            SdpStatus::SolverFailure => Err(Error::SolverFailure(format!(
                "{context}: no convergence after {} iterations (gap {:.2e}, residuals {:.2e}/{:.2e})",
                self.iterations, self.gap, self.primal_residual, self.dual_residual
            ))),
        }
    }
}

fn raw_solve(p: &SdpProblem, tol: &Tolerances) -> Result<(SdpSolution, bool)> {
    p.check()?;
    let (std, scales) = p.to_standard();
    let res = ipm::solve(&std, tol.max_iter);

    let primal = p
        .blocks
        .iter()
        .zip(&res.x)
        .map(|(b, x)| match (b.kind, x) {
            (BlockKind::Hermitian(_), RData::Mat(m)) => BlockValue::Hermitian(project_embedded(m)),
            (BlockKind::Nonneg(_), RData::Diag(v)) => BlockValue::Nonneg(v.iter().copied().collect()),
            _ => unreachable!(),
        })
        .collect();
    let dual_slack = p
        .blocks
        .iter()
        .zip(&res.z)
        .map(|(b, z)| match (b.kind, z) {
            (BlockKind::Hermitian(_), RData::Mat(m)) => {
                BlockValue::Hermitian(project_embedded(m).scale(2.0))
            }
            (BlockKind::Nonneg(_), RData::Diag(v)) => BlockValue::Nonneg(v.iter().copied().collect()),
            _ => unreachable!(),
        })
        .collect();
    // internal form: min −cᵀx, dual max bᵀy with C − Aᵀy = Z; reported y' = −y, unscaled
    let multipliers: Vec<f64> = res.y.iter().zip(&scales).map(|(y, s)| -y * s).collect();
    let objective = -res.pobj + p.objective_constant;
    let dual_objective = -res.dobj + p.objective_constant;
    let gap = (objective - dual_objective).abs();
    let optimal = gap <= tol.gap * (1.0 + objective.abs())
        && res.pinf <= tol.feas
        && res.dinf <= tol.feas
        && !res.diverged;
    let sol = SdpSolution {
        status: if optimal { SdpStatus::Optimal } else { SdpStatus::SolverFailure },
        objective,
        dual_objective,
        gap,
        primal_residual: res.pinf,
        dual_residual: res.dinf,
        iterations: res.iterations,
        primal,
        dual_slack,
        multipliers,
        groups: p.groups.clone(),
    };
    Ok((sol, res.diverged))
}

/// Solves `p` with the active tolerances.
pub fn solve(p: &SdpProblem) -> Result<SdpSolution> {
    solve_with(p, Tolerances::current())
}

/// Solves `p`. A run that does not converge is classified through a phase-1
/// problem so that an infeasible instance is never reported as a failure of
/// the optimizer and vice versa.
pub fn solve_with(p: &SdpProblem, tol: &Tolerances) -> Result<SdpSolution> {
    let (mut sol, _) = raw_solve(p, tol)?;
    if sol.status != SdpStatus::Optimal {
        if let Ok(PhaseOne { violation, .. }) = phase_one_with(p, tol) {
            if violation >= tol.margin {
                sol.status = SdpStatus::Infeasible;
            }
        }
    }
    Ok(sol)
}

/// A separating functional proving infeasibility: multipliers `λ_k` with
/// `Σ_k ⟨λ_k, A_k(X)⟩ ≤ 0` for every feasible cone point `X` while
/// `Σ_k ⟨λ_k, b_k⟩ = margin > 0`.
#[derive(Clone, Debug)]
pub struct InfeasibilityCertificate {
    pub margin: f64,
    multipliers: Vec<f64>,
    groups: Vec<Group>,
}

impl InfeasibilityCertificate {
    pub fn scalar(&self, c: ConstraintId) -> f64 {
        self.multipliers[self.groups[c.0].first_row]
    }

    pub fn operator(&self, c: ConstraintId) -> HermitianOperator {
        let g = &self.groups[c.0];
        let GroupKind::Operator { dim } = g.kind else {
            panic!("constraint `{}` is scalar", g.name)
        };
        hermitian_basis(dim)
            .iter()
            .enumerate()
            .fold(HermitianOperator::zeros(dim), |acc, (k, e)| {
                acc.add(&e.scale(self.multipliers[g.first_row + k]))
            })
    }

    /// Largest value of the functional over unit-trace points of the cone;
    /// nonpositive for a valid certificate.
    pub fn cone_excess(&self, p: &SdpProblem) -> Result<f64> {
        let mut worst = f64::NEG_INFINITY;
        for (bi, block) in p.blocks.iter().enumerate() {
            match block.kind {
                BlockKind::Hermitian(n) => {
                    let mut acc = CMatrix::zeros(n, n);
                    for (row, lam) in p.rows.iter().zip(&self.multipliers) {
                        for (b, c) in &row.terms {
                            if b.0 == bi {
                                if let Coef::Herm(m) = c {
                                    acc += m * C64::new(*lam, 0.0);
                                }
                            }
                        }
                    }
                    worst = worst.max(HermitianOperator::symmetrized(acc).max_eigenvalue()?);
                }
                BlockKind::Nonneg(n) => {
                    let mut acc = vec![0.0; n];
                    for (row, lam) in p.rows.iter().zip(&self.multipliers) {
                        for (b, c) in &row.terms {
                            if b.0 == bi {
                                if let Coef::Vector(v) = c {
                                    for (a, x) in acc.iter_mut().zip(v) {
                                        *a += lam * x;
                                    }
                                }
                            }
                        }
                    }
                    worst = acc.into_iter().fold(worst, f64::max);
                }
            }
        }
        Ok(worst)
    }
}

/// Output of the phase-1 problem `min Σ_i (s⁺_i + s⁻_i)` subject to
/// `A(X) + s⁺ − s⁻ = b`.
#[derive(Clone, Debug)]
pub struct PhaseOne {
    /// Minimal total constraint violation.
    pub violation: f64,
    /// Solution of the phase-1 problem; original blocks keep their ids.
    pub solution: SdpSolution,
    pub certificate: InfeasibilityCertificate,
}

pub fn phase_one(p: &SdpProblem) -> Result<PhaseOne> {
    phase_one_with(p, Tolerances::current())
}

pub fn phase_one_with(p: &SdpProblem, tol: &Tolerances) -> Result<PhaseOne> {
    let m = p.rows.len();
    let mut q = SdpProblem {
        blocks: p.blocks.clone(),
        objective: Vec::new(),
        objective_constant: 0.0,
        rows: p.rows.clone(),
        groups: p.groups.clone(),
    };
    let slack = q.add_nonneg("phase1_slack", 2 * m);
    for (i, row) in q.rows.iter_mut().enumerate() {
        let mut v = vec![0.0; 2 * m];
        v[i] = 1.0;
        v[m + i] = -1.0;
        row.terms.push((slack, Coef::Vector(v)));
    }
    q.add_objective(slack, Coef::Vector(vec![-1.0; 2 * m]));
    let (sol, _) = raw_solve(&q, tol)?;
    let sol = sol.require_optimal("phase-1 feasibility problem")?;
    let violation = (-sol.objective).max(0.0);
    let certificate = InfeasibilityCertificate {
        margin: -sol.dual_objective,
        multipliers: sol.multipliers.iter().map(|y| -y).collect(),
        groups: p.groups.clone(),
    };
    Ok(PhaseOne { violation, solution: sol, certificate })
}

#[derive(Clone, Debug)]
pub enum Feasibility {
    Feasible { violation: f64, point: SdpSolution },
    Infeasible { certificate: InfeasibilityCertificate },
    /// Violation inside the band where neither verdict is reliable.
    Undecided { violation: f64 },
}

/// Decides feasibility of the constraints of `p` (the objective is ignored).
pub fn feasibility(p: &SdpProblem) -> Result<Feasibility> {
    let tol = Tolerances::current();
    let ph = phase_one_with(p, tol)?;
    Ok(if ph.violation <= tol.feasible_below {
        Feasibility::Feasible { violation: ph.violation, point: ph.solution }
    } else if ph.violation >= tol.margin && ph.certificate.margin >= tol.margin {
        Feasibility::Infeasible { certificate: ph.certificate }
    } else {
        Feasibility::Undecided { violation: ph.violation }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::tensor;

    fn sigma_z() -> HermitianOperator {
        HermitianOperator::diagonal(&[1.0, -1.0])
    }

    #[test]
    fn basis_is_orthonormal() {
        let b = hermitian_basis(3);
        assert_eq!(b.len(), 9);
        for (i, x) in b.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((x.inner(y) - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn embedding_round_trip_and_inner_product() {
        let a = crate::random::random_density(3, 1).op().clone();
        let h = crate::random::random_density(3, 2).op().clone();
        let ea = embed_hermitian(a.matrix());
        let eh = embed_hermitian(h.matrix());
        assert!(project_embedded(&eh).approx_eq(&h, 1e-15));
        assert!((0.5 * ea.dot(&eh) - a.inner(&h)).abs() < 1e-14);
    }

    #[test]
    fn trace_under_identity_bound() {
        // max Tr X s.t. X + S = I, X, S ⪰ 0
        let d = 3;
        let mut p = SdpProblem::new();
        let x = p.add_hermitian("X", d);
        let s = p.add_hermitian("S", d);
        p.add_objective(x, Coef::hermitian(&HermitianOperator::identity(d)));
        p.add_operator_constraint("bound", &HermitianOperator::identity(d), |e| {
            vec![(x, Coef::hermitian(e)), (s, Coef::hermitian(e))]
        });
        let sol = solve(&p).unwrap();
        assert!(sol.is_optimal());
        assert!((sol.objective - 3.0).abs() < 1e-8);
    }

    #[test]
    fn variational_top_eigenvalue() {
        let mut p = SdpProblem::new();
        let x = p.add_hermitian("X", 2);
        p.add_objective(x, Coef::hermitian(&sigma_z()));
        p.add_scalar_constraint("trace", vec![(x, Coef::hermitian(&HermitianOperator::identity(2)))], 1.0);
        let sol = solve(&p).unwrap();
        assert!(sol.is_optimal());
        assert!((sol.objective - 1.0).abs() < 1e-8, "{}", sol.objective);
        assert!(sol.gap <= 1e-8 * (1.0 + sol.objective.abs()));
        // multiplier of the trace constraint is the top eigenvalue
        let c = ConstraintId(0);
        assert!((sol.scalar_multiplier(c) - 1.0).abs() < 1e-7);
    }

    #[test]
    fn complex_objective_is_respected() {
        // top eigenvalue of σ_y is 1 and needs a complex eigenvector
        let mut sy = CMatrix::zeros(2, 2);
        sy[(0, 1)] = C64::new(0.0, -1.0);
        sy[(1, 0)] = C64::new(0.0, 1.0);
        let sy = HermitianOperator::new(sy).unwrap();
        let mut p = SdpProblem::new();
        let x = p.add_hermitian("X", 2);
        p.add_objective(x, Coef::hermitian(&sy));
        p.add_scalar_constraint("trace", vec![(x, Coef::hermitian(&HermitianOperator::identity(2)))], 1.0);
        let sol = solve(&p).unwrap();
        assert!((sol.objective - 1.0).abs() < 1e-8);
        let rho = sol.hermitian(x);
        assert!((rho.inner(&sy) - 1.0).abs() < 1e-7);
    }

    #[test]
    fn helstrom_dual_form() {
        // min Tr Y s.t. Y ⪰ ρ₁/2, Y ⪰ ρ₂/2, written as max −Tr Y
        for eta in [0.1, 0.5, 0.9] {
            let i2 = HermitianOperator::identity(2);
            let rho1 = i2.add(&sigma_z().scale(eta)).scale(0.5);
            let rho2 = i2.sub(&sigma_z().scale(eta)).scale(0.5);
            let mut p = SdpProblem::new();
            let y = p.add_hermitian("Y", 2);
            let s1 = p.add_hermitian("S1", 2);
            let s2 = p.add_hermitian("S2", 2);
            // Y is PSD here, harmless since the optimum is PSD
            p.add_objective(y, Coef::hermitian(&i2.scale(-1.0)));
            for (s, rho) in [(s1, &rho1), (s2, &rho2)] {
                p.add_operator_constraint("dominate", &rho.scale(0.5), |e| {
                    vec![(y, Coef::hermitian(e)), (s, Coef::hermitian(&e.scale(-1.0)))]
                });
            }
            let sol = solve(&p).unwrap();
            assert!(sol.is_optimal());
            assert!((-sol.objective - (1.0 + eta) / 2.0).abs() < 1e-8);
        }
    }

    #[test]
    fn scaling_objective_scales_value() {
        let build = |c: f64| {
            let mut p = SdpProblem::new();
            let x = p.add_hermitian("X", 2);
            let w = HermitianOperator::diagonal(&[0.3, 0.8]);
            p.add_objective(x, Coef::hermitian(&w.scale(c)));
            p.add_scalar_constraint("trace", vec![(x, Coef::hermitian(&HermitianOperator::identity(2)))], 1.0);
            solve(&p).unwrap().objective
        };
        let v1 = build(1.0);
        let v3 = build(3.0);
        assert!((v3 - 3.0 * v1).abs() <= 1e-8 * v3.abs());
    }

    #[test]
    fn feasibility_examples() {
        let d = 2;
        let mut p = SdpProblem::new();
        let x = p.add_hermitian("X", d);
        p.add_scalar_constraint("trace", vec![(x, Coef::hermitian(&HermitianOperator::identity(d)))], 1.0);
        match feasibility(&p).unwrap() {
            Feasibility::Feasible { point, .. } => {
                assert!((point.hermitian(x).trace() - 1.0).abs() < 1e-8);
            }
            other => panic!("expected feasible, got {other:?}"),
        }
        let mut q = SdpProblem::new();
        let x = q.add_hermitian("X", d);
        let c = q.add_scalar_constraint("trace", vec![(x, Coef::hermitian(&HermitianOperator::identity(d)))], -1.0);
        match feasibility(&q).unwrap() {
            Feasibility::Infeasible { certificate } => {
                assert!(certificate.margin >= 1e-7);
                assert!(certificate.scalar(c) < 0.0);
                assert!(certificate.cone_excess(&q).unwrap() <= 1e-9);
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
        let sol = solve(&q).unwrap();
        assert_eq!(sol.status, SdpStatus::Infeasible);
    }

    #[test]
    fn mixed_blocks() {
        // max x₀ + 2x₁ s.t. x₀ + x₁ + Tr[σ⊗σ-ish X] = 1 with a Hermitian block on 2⊗2
        let mut p = SdpProblem::new();
        let v = p.add_nonneg("v", 2);
        let x = p.add_hermitian("X", 4);
        let w = tensor(&sigma_z(), &sigma_z());
        p.add_objective(v, Coef::Vector(vec![1.0, 2.0]));
        p.add_objective(x, Coef::hermitian(&w));
        p.add_scalar_constraint(
            "budget",
            vec![(v, Coef::Vector(vec![1.0, 1.0])), (x, Coef::hermitian(&HermitianOperator::identity(4)))],
            1.0,
        );
        let sol = solve(&p).unwrap();
        assert!(sol.is_optimal());
        assert!((sol.objective - 2.0).abs() < 1e-8);
    }
}
