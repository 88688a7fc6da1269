//! Channels in Choi form, trace duals, the sharp-to-anything preprocessing
//! and the fuzzifying / LPSR transformations.
//!
//! Choi convention: `J(Φ) = Σ_{ij} |i⟩⟨j|_in ⊗ Φ(|i⟩⟨j|)` on `in ⊗ out`, so
//! that `Φ(X) = Tr_in[(Xᵀ ⊗ I_out) J]` with the transpose taken in the
//! computational basis. Every module uses this single convention.

use rand::Rng;
use serde::Serialize;

use crate::error::{dim_mismatch, Error, Result};
use crate::operator::{is_psd, partial_trace, CMatrix, CVector, HermitianOperator, LinearMap, Subsystem, C64};
use crate::povm::{extend_to_programmable, sharp_eigenvectors, validate_distribution, Povm, ProgrammableDevice};
use crate::random::ginibre;
use crate::tolerances::Tolerances;

/// Normalization condition carried by a channel's Choi matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    /// `Tr_out J = I_in`.
    TracePreserving,
    /// `Tr_in J = I_out`, as for the dual of a trace-preserving map.
    Unital,
}

/// A completely positive map stored as its Choi matrix.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Channel {
    in_dim: usize,
    out_dim: usize,
    choi: HermitianOperator,
    kind: ChannelKind,
}

const NORMALIZATION_TOL: f64 = 1e-8;

fn elementary(d: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(i, j)] = C64::new(1.0, 0.0);
    m
}

impl Channel {
    /// Validates complete positivity and the normalization matching `kind`.
    pub fn from_choi(choi: HermitianOperator, in_dim: usize, out_dim: usize, kind: ChannelKind) -> Result<Self> {
        if in_dim == 0 || out_dim == 0 || choi.dim() != in_dim * out_dim {
            return Err(dim_mismatch(format!(
                "Choi matrix of dimension {} for a {in_dim}→{out_dim} map",
                choi.dim()
            )));
        }
        if !is_psd(&choi, Tolerances::current().psd) {
            return Err(Error::NotPsd { index: 0, min_eigenvalue: choi.min_eigenvalue()? });
        }
        let c = Self { in_dim, out_dim, choi, kind };
        let defect = c.normalization_defect(kind)?;
        if defect > NORMALIZATION_TOL {
            return Err(Error::InvalidInput(format!("channel normalization violated by {defect:.3e}")));
        }
        Ok(c)
    }

    /// Builds the Choi matrix of a linear map by evaluating it on matrix units.
    pub fn from_fn(
        in_dim: usize,
        out_dim: usize,
        kind: ChannelKind,
        f: impl Fn(&CMatrix) -> CMatrix,
    ) -> Result<Self> {
        let n = in_dim * out_dim;
        let mut j = CMatrix::zeros(n, n);
        for a in 0..in_dim {
            for b in 0..in_dim {
                let img = f(&elementary(in_dim, a, b));
                if img.nrows() != out_dim || img.ncols() != out_dim {
                    return Err(dim_mismatch("map output has the wrong dimension"));
                }
                j.view_mut((a * out_dim, b * out_dim), (out_dim, out_dim)).copy_from(&img);
            }
        }
        Self::from_choi(HermitianOperator::new(j)?, in_dim, out_dim, kind)
    }

    /// `X ↦ Σ_k K_k X K_k†`.
    pub fn from_kraus(kraus: &[CMatrix], kind: ChannelKind) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::InvalidInput("no Kraus operators".into()))?;
        let (out_dim, in_dim) = first.shape();
        if kraus.iter().any(|k| k.shape() != (out_dim, in_dim)) {
            return Err(dim_mismatch("Kraus operators of different shapes"));
        }
        Self::from_fn(in_dim, out_dim, kind, |x| kraus.iter().map(|k| k * x * k.adjoint()).sum())
    }

    pub fn identity(d: usize) -> Self {
        Self::from_fn(d, d, ChannelKind::TracePreserving, |x| x.clone()).expect("identity channel")
    }

    /// `ρ ↦ (1 − λ) ρ + λ Tr[ρ] I/d`.
    pub fn depolarizing(d: usize, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidInput(format!("depolarizing parameter {lambda} outside [0, 1]")));
        }
        Self::from_fn(d, d, ChannelKind::TracePreserving, |x| {
            x * C64::new(1.0 - lambda, 0.0) + CMatrix::identity(d, d) * (x.trace() * lambda / d as f64)
        })
    }

    /// `ρ ↦ U ρ U†`.
    pub fn unitary(u: &LinearMap) -> Result<Self> {
        if u.in_dim() != u.out_dim() || u.isometry_defect() > 1e-9 {
            return Err(Error::InvalidInput("conjugation requires a unitary".into()));
        }
        Self::from_kraus(std::slice::from_ref(u.matrix()), ChannelKind::TracePreserving)
    }

    /// The unital map `X ↦ Tr[X]/d_in · I_out`.
    pub fn completely_depolarizing_dual(in_dim: usize, out_dim: usize) -> Self {
        Self::from_fn(in_dim, out_dim, ChannelKind::Unital, |x| {
            CMatrix::identity(out_dim, out_dim) * (x.trace() / in_dim as f64)
        })
        .expect("completely depolarizing dual")
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn choi(&self) -> &HermitianOperator {
        &self.choi
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    /// `‖Tr_out J − I_in‖_F` or `‖Tr_in J − I_out‖_F`.
    pub fn normalization_defect(&self, kind: ChannelKind) -> Result<f64> {
        let dims = (self.in_dim, self.out_dim);
        Ok(match kind {
            ChannelKind::TracePreserving => partial_trace(&self.choi, dims, Subsystem::A)?
                .distance(&HermitianOperator::identity(self.in_dim)),
            ChannelKind::Unital => partial_trace(&self.choi, dims, Subsystem::B)?
                .distance(&HermitianOperator::identity(self.out_dim)),
        })
    }

    pub(crate) fn apply_matrix(&self, x: &CMatrix) -> CMatrix {
        let (di, dout) = (self.in_dim, self.out_dim);
        let j = self.choi.matrix();
        let mut out = CMatrix::zeros(dout, dout);
        for a in 0..di {
            for b in 0..di {
                let w = x[(a, b)];
                if w.norm() == 0.0 {
                    continue;
                }
                out += j.view((a * dout, b * dout), (dout, dout)) * w;
            }
        }
        out
    }

    /// `Tr_in[(Xᵀ ⊗ I) J]`.
    pub fn apply(&self, x: &HermitianOperator) -> Result<HermitianOperator> {
        if x.dim() != self.in_dim {
            return Err(dim_mismatch(format!("input of dimension {} for a map on {}", x.dim(), self.in_dim)));
        }
        Ok(HermitianOperator::symmetrized(self.apply_matrix(x.matrix())))
    }

    /// The trace dual `Φ†` with `Tr[Φ†(Y) X] = Tr[Y Φ(X)]`. Its Choi matrix is
    /// the subsystem swap of `J̄`.
    pub fn dual(&self) -> Self {
        let (di, dout) = (self.in_dim, self.out_dim);
        let j = self.choi.matrix();
        let n = di * dout;
        let m = CMatrix::from_fn(n, n, |r, c| {
            let (a, i) = (r / di, r % di);
            let (b, k) = (c / di, c % di);
            j[(i * dout + a, k * dout + b)].conj()
        });
        let kind = match self.kind {
            ChannelKind::TracePreserving => ChannelKind::Unital,
            ChannelKind::Unital => ChannelKind::TracePreserving,
        };
        Self { in_dim: dout, out_dim: di, choi: HermitianOperator::symmetrized(m), kind }
    }

    /// Kraus operators from the spectral decomposition of the Choi matrix,
    /// dropping eigenvalues below `1e-14` of the largest.
    pub fn kraus(&self) -> Result<Vec<CMatrix>> {
        let eig = self.choi.eig()?;
        let top = eig.values.last().copied().unwrap_or(0.0).max(0.0);
        let (di, dout) = (self.in_dim, self.out_dim);
        Ok(eig
            .values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v > 1e-14 * top)
            .map(|(k, v)| {
                let vec = eig.vector(k);
                CMatrix::from_fn(dout, di, |a, i| vec[i * dout + a] * v.sqrt())
            })
            .collect())
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &Channel) -> Result<Self> {
        if self.out_dim != next.in_dim {
            return Err(dim_mismatch("composition of maps with mismatched dimensions"));
        }
        if self.kind != next.kind {
            return Err(Error::InvalidInput("composition of maps with different normalizations".into()));
        }
        Self::from_fn(self.in_dim, next.out_dim, self.kind, |x| next.apply_matrix(&self.apply_matrix(x)))
    }

    /// Convex combination of maps with equal shape and normalization.
    pub fn mixture(parts: &[(f64, &Channel)]) -> Result<Self> {
        let (_, first) = parts.first().ok_or_else(|| Error::InvalidInput("empty mixture".into()))?;
        let weights: Vec<f64> = parts.iter().map(|(w, _)| *w).collect();
        validate_distribution(&weights)?;
        if parts
            .iter()
            .any(|(_, c)| c.in_dim != first.in_dim || c.out_dim != first.out_dim || c.kind != first.kind)
        {
            return Err(dim_mismatch("mixture of maps with different shapes"));
        }
        let choi = parts
            .iter()
            .fold(HermitianOperator::zeros(first.choi.dim()), |acc, (w, c)| acc.add(&c.choi.scale(*w)));
        Self::from_choi(choi, first.in_dim, first.out_dim, first.kind)
    }

    /// Distance between Choi matrices.
    pub fn distance(&self, other: &Channel) -> f64 {
        if self.in_dim != other.in_dim || self.out_dim != other.out_dim {
            return f64::INFINITY;
        }
        self.choi.distance(&other.choi)
    }
}

/// Turns an approximately unital Choi matrix (e.g. solver output) into an
/// exactly unital one: negative eigenvalues are clipped, then `J ↦ (I ⊗ T^{-1/2}) J (I ⊗ T^{-1/2})`
/// with `T = Tr_in J`.
pub(crate) fn unital_from_approximate_choi(choi: &HermitianOperator, in_dim: usize, out_dim: usize) -> Result<Channel> {
    let c = choi.map_spectrum(|v| v.max(0.0))?;
    let t = partial_trace(&c, (in_dim, out_dim), Subsystem::B)?;
    if t.min_eigenvalue()? <= 0.5 {
        return Err(Error::SolverFailure("decoded map is far from unital".into()));
    }
    let root = t.map_spectrum(|v| 1.0 / v.sqrt())?;
    let k = CMatrix::identity(in_dim, in_dim).kronecker(root.matrix());
    Channel::from_choi(c.congruence(&k), in_dim, out_dim, ChannelKind::Unital)
}

/// Random trace-preserving map `in → out` from a Ginibre isometry. The
/// environment is enlarged to `⌈in/out⌉` when `env` is too small.
pub fn random_channel_with<R: Rng + ?Sized>(in_dim: usize, out_dim: usize, env: usize, rng: &mut R) -> Result<Channel> {
    let env = env.max(in_dim.div_ceil(out_dim.max(1)));
    let g = ginibre(out_dim * env, in_dim, rng);
    let gram = HermitianOperator::symmetrized(g.adjoint() * &g);
    let v = &g * gram.map_spectrum(|x| 1.0 / x.sqrt())?.matrix();
    let kraus: Vec<CMatrix> = (0..env)
        .map(|e| CMatrix::from_fn(out_dim, in_dim, |a, i| v[(a * env + e, i)]))
        .collect();
    Channel::from_kraus(&kraus, ChannelKind::TracePreserving)
}

/// Random unital map `in → out`: the dual of a random trace-preserving map.
pub fn random_unital_with<R: Rng + ?Sized>(in_dim: usize, out_dim: usize, rng: &mut R) -> Result<Channel> {
    Ok(random_channel_with(out_dim, in_dim, 2, rng)?.dual())
}

/// Unit eigenvectors of a sharp POVM, re-orthonormalized.
fn sharp_basis(p: &Povm) -> Result<Vec<CVector>> {
    let mut vs = sharp_eigenvectors(p)?.ok_or(Error::NotSharp)?;
    for k in 0..vs.len() {
        for l in 0..k {
            let overlap = vs[l].dotc(&vs[k]);
            let proj = &vs[l] * overlap;
            vs[k] -= proj;
        }
        let n = vs[k].norm();
        vs[k] /= C64::new(n, 0.0);
    }
    Ok(vs)
}

/// The isometry `V = Σ_x |ψ^x⟩ ⊗ √Q^x : B → A⊗B` built from the unit
/// eigenvectors of a sharp `p`.
pub fn sharp_preprocessing_isometry(p_sharp: &Povm, q: &Povm) -> Result<LinearMap> {
    if p_sharp.outcomes() != q.outcomes() {
        return Err(dim_mismatch(format!(
            "{} outcomes versus {}",
            p_sharp.outcomes(),
            q.outcomes()
        )));
    }
    let psi = sharp_basis(p_sharp)?;
    let (da, db) = (p_sharp.dim(), q.dim());
    let mut v = CMatrix::zeros(da * db, db);
    for (x, qx) in q.elements().iter().enumerate() {
        let root = qx.sqrt_psd()?;
        v += psi[x].kronecker(root.matrix());
    }
    Ok(LinearMap::new(v))
}

/// Unital map `X ↦ V†(X ⊗ I_B)V` sending each `P^x` to `Q^x`.
pub fn preprocess_from_sharp(p_sharp: &Povm, q: &Povm) -> Result<Channel> {
    let v = sharp_preprocessing_isometry(p_sharp, q)?;
    let (da, db) = (p_sharp.dim(), q.dim());
    let vm = v.matrix();
    Channel::from_fn(da, db, ChannelKind::Unital, |x| {
        vm.adjoint() * x.kronecker(&CMatrix::identity(db, db)) * vm
    })
}

/// `P^x ↦ μ E†(P^x) + (1 − μ) p(x) I_B`, with the unital map `E†: A → B`
/// stored directly.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FuzzifyingOperation {
    dual: Channel,
    mu: f64,
    dist: Vec<f64>,
}

impl FuzzifyingOperation {
    pub fn new(dual: Channel, mu: f64, dist: Vec<f64>) -> Result<Self> {
        if !(-1e-10..=1.0 + 1e-10).contains(&mu) {
            return Err(Error::InvalidInput(format!("weight {mu} outside [0, 1]")));
        }
        if dual.kind() != ChannelKind::Unital {
            return Err(Error::InvalidInput("fuzzifying operations carry a unital map".into()));
        }
        let dist = validate_distribution(&dist)?;
        Ok(Self { dual, mu: mu.clamp(0.0, 1.0), dist })
    }

    /// `μ = 1` with the identity map.
    pub fn identity(d: usize, n: usize) -> Self {
        Self { dual: Channel::identity(d).dual(), mu: 1.0, dist: vec![1.0 / n as f64; n] }
    }

    pub fn dual(&self) -> &Channel {
        &self.dual
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn dist(&self) -> &[f64] {
        &self.dist
    }

    pub fn in_dim(&self) -> usize {
        self.dual.in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.dual.out_dim()
    }

    pub fn outcomes(&self) -> usize {
        self.dist.len()
    }
}

pub fn apply_fuzzifying(f: &FuzzifyingOperation, p: &Povm) -> Result<Povm> {
    if p.outcomes() != f.outcomes() {
        return Err(dim_mismatch(format!("{} outcomes for an operation on {}", p.outcomes(), f.outcomes())));
    }
    if p.dim() != f.in_dim() {
        return Err(dim_mismatch(format!("POVM on {} for an operation on {}", p.dim(), f.in_dim())));
    }
    let id = HermitianOperator::identity(f.out_dim());
    let elements = p
        .elements()
        .iter()
        .zip(&f.dist)
        .map(|(e, px)| Ok(f.dual.apply(e)?.scale(f.mu).add(&id.scale((1.0 - f.mu) * px))))
        .collect::<Result<Vec<_>>>()?;
    Povm::validate(elements, f.out_dim())
}

/// `f2 ∘ f1`: weight `μ₂μ₁`, map `E₂† ∘ E₁†`, and noise distribution
/// `(μ₂(1 − μ₁) p₁ + (1 − μ₂) p₂) / (1 − μ₂μ₁)`.
pub fn compose_fuzzifying(f2: &FuzzifyingOperation, f1: &FuzzifyingOperation) -> Result<FuzzifyingOperation> {
    if f1.out_dim() != f2.in_dim() || f1.outcomes() != f2.outcomes() {
        return Err(dim_mismatch("composition of operations with mismatched systems"));
    }
    let mu = f2.mu * f1.mu;
    let dual = f1.dual.then(&f2.dual)?;
    let n = f1.outcomes();
    let dist = if 1.0 - mu > 1e-12 {
        let raw: Vec<f64> = (0..n)
            .map(|x| (f2.mu * (1.0 - f1.mu) * f1.dist[x] + (1.0 - f2.mu) * f2.dist[x]) / (1.0 - mu))
            .collect();
        let s: f64 = raw.iter().sum();
        raw.iter().map(|v| v / s).collect()
    } else {
        vec![1.0 / n as f64; n]
    };
    FuzzifyingOperation::new(dual, mu, dist)
}

/// Shared randomness `ν(r)`, unital maps `E_r†: A → B` and program
/// conditionals `μ(i|r)` over `i ∈ {0, …, N}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LpsrOperation {
    shared: Vec<f64>,
    channels: Vec<Channel>,
    program_cond: Vec<Vec<f64>>,
}

impl LpsrOperation {
    pub fn new(shared: Vec<f64>, channels: Vec<Channel>, program_cond: Vec<Vec<f64>>) -> Result<Self> {
        let shared = validate_distribution(&shared)?;
        if channels.len() != shared.len() || program_cond.len() != shared.len() {
            return Err(dim_mismatch("one map and one program distribution per shared value"));
        }
        let (a, b) = (channels[0].in_dim(), channels[0].out_dim());
        if channels.iter().any(|c| c.kind() != ChannelKind::Unital || c.in_dim() != a || c.out_dim() != b) {
            return Err(Error::InvalidInput("LPSR maps must be unital with a common shape".into()));
        }
        let slots = program_cond[0].len();
        if slots < 2 || program_cond.iter().any(|c| c.len() != slots) {
            return Err(dim_mismatch("program distributions must cover N + 1 ≥ 2 slots"));
        }
        let program_cond = program_cond
            .iter()
            .map(|c| validate_distribution(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { shared, channels, program_cond })
    }

    pub fn shared(&self) -> &[f64] {
        &self.shared
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn program_cond(&self) -> &[Vec<f64>] {
        &self.program_cond
    }

    pub fn outcomes(&self) -> usize {
        self.program_cond[0].len() - 1
    }

    pub fn in_dim(&self) -> usize {
        self.channels[0].in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.channels[0].out_dim()
    }
}

/// `Q^{x|0} = Σ_r ν(r) E_r†(Σ_i μ(i|r) P^{x|i})`; the trivial slots of the
/// output device are the extremal trivial POVMs on `B`.
pub fn apply_lpsr(l: &LpsrOperation, dev: &ProgrammableDevice) -> Result<ProgrammableDevice> {
    if dev.dim() != l.in_dim() || dev.outcomes() != l.outcomes() {
        return Err(dim_mismatch("LPSR operation and device have different shapes"));
    }
    let n = dev.outcomes();
    let mut elements = vec![HermitianOperator::zeros(l.out_dim()); n];
    for ((nu, chan), cond) in l.shared.iter().zip(&l.channels).zip(&l.program_cond) {
        for (x, acc) in elements.iter_mut().enumerate() {
            let mixed = cond
                .iter()
                .enumerate()
                .fold(HermitianOperator::zeros(l.in_dim()), |m, (i, w)| m.add(&dev.slot(i).element(x).scale(*w)));
            *acc = acc.add(&chan.apply(&mixed)?.scale(*nu));
        }
    }
    Ok(extend_to_programmable(&Povm::validate(elements, l.out_dim())?))
}

/// Collapses an LPSR operation to its fuzzifying action on slot 0:
/// `μ = Σ_r ν(r) μ(0|r)`, `E† = Σ_r ν(r) μ(0|r) E_r† / μ` and
/// `p(x) = Σ_r ν(r) μ(x+1|r) / (1 − μ)`. Degenerate weights fall back to the
/// completely depolarizing map and the uniform distribution.
pub fn lpsr_to_fuzzifying(l: &LpsrOperation) -> Result<FuzzifyingOperation> {
    let n = l.outcomes();
    let mu: f64 = l.shared.iter().zip(&l.program_cond).map(|(nu, c)| nu * c[0]).sum();
    let dual = if mu > 1e-14 {
        let parts: Vec<(f64, &Channel)> = l
            .shared
            .iter()
            .zip(&l.program_cond)
            .zip(&l.channels)
            .map(|((nu, c), ch)| (nu * c[0] / mu, ch))
            .collect();
        renormalized_mixture(&parts)?
    } else {
        Channel::completely_depolarizing_dual(l.in_dim(), l.out_dim())
    };
    let dist = if 1.0 - mu > 1e-14 {
        let raw: Vec<f64> = (0..n)
            .map(|x| l.shared.iter().zip(&l.program_cond).map(|(nu, c)| nu * c[x + 1]).sum::<f64>() / (1.0 - mu))
            .collect();
        let s: f64 = raw.iter().sum();
        raw.iter().map(|v| v / s).collect()
    } else {
        vec![1.0 / n as f64; n]
    };
    FuzzifyingOperation::new(dual, mu.min(1.0), dist)
}

fn renormalized_mixture(parts: &[(f64, &Channel)]) -> Result<Channel> {
    let s: f64 = parts.iter().map(|(w, _)| w).sum();
    let scaled: Vec<(f64, &Channel)> = parts.iter().map(|(w, c)| (w / s, *c)).collect();
    Channel::mixture(&scaled)
}

/// A single shared value with `μ(0) = μ` and `μ(i) = (1 − μ) p(i − 1)`.
pub fn fuzzifying_to_lpsr(f: &FuzzifyingOperation) -> Result<LpsrOperation> {
    let mut cond = Vec::with_capacity(f.outcomes() + 1);
    cond.push(f.mu);
    cond.extend(f.dist.iter().map(|p| (1.0 - f.mu) * p));
    LpsrOperation::new(vec![1.0], vec![f.dual.clone()], vec![cond])
}
