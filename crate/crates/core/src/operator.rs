//! Dense complex linear algebra on finite-dimensional Hilbert spaces.
//!
//! Composite spaces use the row-major Kronecker convention: the basis vector
//! `|i⟩⊗|k⟩` of `A⊗B` has index `i·d_B + k`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{dim_mismatch, Error, Result};
use crate::tolerances::Tolerances;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Largest matrix dimension accepted by [`eig_hermitian`].
pub const MAX_EIG_DIM: usize = 36;

pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// A complex square matrix equal to its conjugate transpose.
///
/// Serializes as a row-major array of rows whose entries are `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    m: CMatrix,
}

/// Row-major `[re, im]` rows of a complex matrix.
pub fn to_pair_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

/// Inverse of [`to_pair_rows`]; rows must be rectangular.
pub fn from_pair_rows(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let n = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != c) {
        return Err(dim_mismatch("ragged matrix rows"));
    }
    Ok(CMatrix::from_fn(n, c, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
}

impl Serialize for HermitianOperator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        to_pair_rows(&self.m).serialize(s)
    }
}

impl<'de> Deserialize<'de> for HermitianOperator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        let m = from_pair_rows(&rows).map_err(serde::de::Error::custom)?;
        HermitianOperator::new(m).map_err(serde::de::Error::custom)
    }
}

/// Largest entrywise modulus of `m − m†`.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

impl HermitianOperator {
    /// Validates and symmetrizes `m`. Deviations from Hermiticity above the
    /// configured tolerance are rejected rather than repaired.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(dim_mismatch(format!(
                "operator must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidInput("operator dimension must be at least 1".into()));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("operator has non-finite entries".into()));
        }
        let deviation = hermiticity_deviation(&m);
        if deviation > Tolerances::current().hermiticity {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self::symmetrized(m))
    }

    /// Symmetrizes without checking; for matrices Hermitian by construction.
    pub(crate) fn symmetrized(m: CMatrix) -> Self {
        let mut h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        for i in 0..h.nrows() {
            h[(i, i)].im = 0.0;
        }
        Self { m: h }
    }

    pub fn identity(d: usize) -> Self {
        Self { m: CMatrix::identity(d, d) }
    }

    pub fn zeros(d: usize) -> Self {
        Self { m: CMatrix::zeros(d, d) }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let d = values.len();
        let mut m = CMatrix::zeros(d, d);
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(*v, 0.0);
        }
        Self { m }
    }

    /// Builds an operator from real row-major entries.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(dim_mismatch("rows must form a square matrix"));
        }
        Self::new(CMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j], 0.0)))
    }

    /// The rank-one operator `|v⟩⟨v|`.
    pub fn projector(v: &CVector) -> Self {
        Self::symmetrized(v * v.adjoint())
    }

    /// `|i⟩⟨i|` in dimension `d`.
    pub fn basis_projector(i: usize, d: usize) -> Self {
        let mut m = CMatrix::zeros(d, d);
        m[(i, i)] = ONE;
        Self { m }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.m[(i, i)].re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.norm()
    }

    /// Hilbert–Schmidt inner product `Tr[A B]`, real for Hermitian pairs.
    pub fn inner(&self, other: &Self) -> f64 {
        // Tr[AB] = Σ_ij A_ij B_ji = Σ_ij A_ij conj(B_ij)
        self.m
            .iter()
            .zip(other.m.iter())
            .map(|(a, b)| (a * b.conj()).re)
            .sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { m: &self.m * C64::new(s, 0.0) }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { m: &self.m + &other.m }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { m: &self.m - &other.m }
    }

    /// Transpose in the computational basis (equal to the entrywise conjugate).
    pub fn transpose(&self) -> Self {
        Self { m: self.m.transpose() }
    }

    /// `B† A B`, Hermitian for any `B`.
    pub fn congruence(&self, b: &CMatrix) -> Self {
        Self::symmetrized(b.adjoint() * &self.m * b)
    }

    /// Frobenius distance to `other`.
    pub fn distance(&self, other: &Self) -> f64 {
        (&self.m - &other.m).norm()
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim() == other.dim() && self.distance(other) <= tol
    }

    pub fn eig(&self) -> Result<Eigen> {
        eig_hermitian(self)
    }

    pub fn max_eigenvalue(&self) -> Result<f64> {
        max_eigenvalue(self)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eig()?.values[0])
    }

    /// Applies `f` to the spectrum.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let e = self.eig()?;
        let d = self.dim();
        let mut m = CMatrix::zeros(d, d);
        for (k, &lam) in e.values.iter().enumerate() {
            let v = e.vectors.column(k);
            m += (v * v.adjoint()) * C64::new(f(lam), 0.0);
        }
        Ok(Self::symmetrized(m))
    }

    /// Square root of the positive part.
    pub fn sqrt_psd(&self) -> Result<Self> {
        self.map_spectrum(|x| x.max(0.0).sqrt())
    }
}

/// Spectral decomposition with ascending eigenvalues and orthonormal
/// eigenvector columns.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigen {
    pub fn vector(&self, k: usize) -> CVector {
        self.vectors.column(k).into_owned()
    }
}

/// Kronecker product `a ⊗ b`.
pub fn tensor(a: &HermitianOperator, b: &HermitianOperator) -> HermitianOperator {
    HermitianOperator { m: a.m.kronecker(&b.m) }
}

/// Which factor of a bipartite space survives a partial trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Partial trace over one factor of `A⊗B`.
pub fn partial_trace(
    m: &HermitianOperator,
    dims: (usize, usize),
    keep: Subsystem,
) -> Result<HermitianOperator> {
    let (da, db) = dims;
    if da * db != m.dim() {
        return Err(dim_mismatch(format!(
            "partial trace: {}x{} does not factor as {}⊗{}",
            m.dim(),
            m.dim(),
            da,
            db
        )));
    }
    let out = match keep {
        Subsystem::A => CMatrix::from_fn(da, da, |i, j| {
            (0..db).map(|k| m.m[(i * db + k, j * db + k)]).sum()
        }),
        Subsystem::B => CMatrix::from_fn(db, db, |k, l| {
            (0..da).map(|i| m.m[(i * db + k, i * db + l)]).sum()
        }),
    };
    Ok(HermitianOperator::symmetrized(out))
}

/// Eigendecomposition of a Hermitian operator.
pub fn eig_hermitian(m: &HermitianOperator) -> Result<Eigen> {
    let d = m.dim();
    if d > MAX_EIG_DIM {
        return Err(dim_mismatch(format!(
            "eigensolver dimension cap is {MAX_EIG_DIM}, got {d}"
        )));
    }
    let se = m
        .m
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 100_000)
        .ok_or_else(|| Error::SolverFailure("Hermitian eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let values = order.iter().map(|&k| se.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(d, d, |i, j| se.eigenvectors[(i, order[j])]);
    Ok(Eigen { values, vectors })
}

pub fn max_eigenvalue(m: &HermitianOperator) -> Result<f64> {
    Ok(*eig_hermitian(m)?.values.last().expect("dim >= 1"))
}

/// True iff the smallest eigenvalue is at least `−tol·max(1, max|λ|)`.
pub fn is_psd(m: &HermitianOperator, tol: f64) -> bool {
    match eig_hermitian(m) {
        Ok(e) => {
            let scale = e.values.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
            e.values[0] >= -tol * scale
        }
        Err(_) => false,
    }
}

/// A positive semidefinite operator of unit trace.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityMatrix {
    op: HermitianOperator,
}

impl DensityMatrix {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let tol = Tolerances::current();
        if !is_psd(&op, tol.psd) {
            return Err(Error::NotPsd {
                index: 0,
                min_eigenvalue: op.min_eigenvalue()?,
            });
        }
        let tr = op.trace();
        if (tr - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!("density matrix trace is {tr}")));
        }
        Ok(Self { op })
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self { op: HermitianOperator::identity(d).scale(1.0 / d as f64) }
    }

    pub fn pure(v: &CVector) -> Result<Self> {
        let n = v.norm();
        if n == 0.0 {
            return Err(Error::InvalidInput("zero state vector".into()));
        }
        Ok(Self { op: HermitianOperator::projector(&(v / C64::new(n, 0.0))) })
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }
}

/// Projector onto `(1/√d) Σ_i |i⟩⊗|i⟩` on the `d²`-dimensional space.
pub fn maximally_entangled(d: usize) -> DensityMatrix {
    let mut v = CVector::zeros(d * d);
    let amp = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    for i in 0..d {
        v[i * d + i] = amp;
    }
    DensityMatrix { op: HermitianOperator::projector(&v) }
}

/// A linear operator between spaces of dimension `in_dim` and `out_dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearMap {
    m: CMatrix,
}

impl LinearMap {
    pub fn new(m: CMatrix) -> Self {
        Self { m }
    }

    pub fn in_dim(&self) -> usize {
        self.m.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn adjoint(&self) -> Self {
        Self { m: self.m.adjoint() }
    }

    /// `‖V†V − I‖_F`.
    pub fn isometry_defect(&self) -> f64 {
        let n = self.in_dim();
        (self.m.adjoint() * &self.m - CMatrix::identity(n, n)).norm()
    }

    /// `V X V†`.
    pub fn conjugate(&self, x: &HermitianOperator) -> Result<HermitianOperator> {
        if x.dim() != self.in_dim() {
            return Err(dim_mismatch("conjugation input dimension"));
        }
        Ok(HermitianOperator::symmetrized(&self.m * x.matrix() * self.m.adjoint()))
    }
}
