//! POVMs, their classification, trivial POVMs, the programmable-device
//! extension and the testing region.

use rand::{Rng, RngExt};
use serde::Serialize;

use crate::error::{dim_mismatch, Error, Result};
use crate::operator::{is_psd, CVector, DensityMatrix, HermitianOperator, C64};
use crate::random::{ginibre, random_unitary_with, seeded_rng};
use crate::sdp::{phase_one, Coef, SdpProblem};
use crate::tolerances::Tolerances;

/// An ordered family of PSD operators summing to the identity. Outcomes are
/// labelled by position `0..N`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Povm {
    dim: usize,
    elements: Vec<HermitianOperator>,
}

/// Checks a probability vector, flushing negligible negative entries to zero.
pub fn validate_distribution(dist: &[f64]) -> Result<Vec<f64>> {
    if dist.is_empty() {
        return Err(Error::InvalidDistribution("empty distribution".into()));
    }
    if let Some(v) = dist.iter().find(|v| !v.is_finite() || **v < -1e-12) {
        return Err(Error::InvalidDistribution(format!("entry {v} is negative")));
    }
    let sum: f64 = dist.iter().sum();
    if (sum - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidDistribution(format!("entries sum to {sum}")));
    }
    Ok(dist.iter().map(|v| v.max(0.0)).collect())
}

impl Povm {
    /// Validates candidate elements on a space of dimension `dim`.
    pub fn validate(elements: Vec<HermitianOperator>, dim: usize) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidInput("a POVM needs at least one element".into()));
        }
        if let Some(e) = elements.iter().find(|e| e.dim() != dim) {
            return Err(dim_mismatch(format!("element of dimension {} in a {dim}-dimensional POVM", e.dim())));
        }
        let tol = Tolerances::current();
        for (index, e) in elements.iter().enumerate() {
            if !is_psd(e, tol.psd) {
                return Err(Error::NotPsd { index, min_eigenvalue: e.min_eigenvalue()? });
            }
        }
        let total = elements.iter().fold(HermitianOperator::zeros(dim), |acc, e| acc.add(e));
        let residual = total.sub(&HermitianOperator::identity(dim));
        let worst = residual.matrix().iter().map(|z| z.norm()).fold(0.0, f64::max);
        if worst > tol.completeness {
            return Err(Error::Completeness { residual: residual.frobenius_norm() });
        }
        Ok(Self { dim, elements })
    }

    /// Validates elements, taking the dimension from the first one.
    pub fn new(elements: Vec<HermitianOperator>) -> Result<Self> {
        let dim = elements
            .first()
            .ok_or_else(|| Error::InvalidInput("a POVM needs at least one element".into()))?
            .dim();
        Self::validate(elements, dim)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcomes(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[HermitianOperator] {
        &self.elements
    }

    pub fn element(&self, x: usize) -> &HermitianOperator {
        &self.elements[x]
    }

    /// Computational-basis measurement `{|x⟩⟨x|}`.
    pub fn computational_basis(d: usize) -> Self {
        Self { dim: d, elements: (0..d).map(|i| HermitianOperator::basis_projector(i, d)).collect() }
    }

    /// `{(I + η σ_z)/2, (I − η σ_z)/2}`.
    pub fn noisy_qubit_basis(eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidInput(format!("noise parameter {eta} outside [0, 1]")));
        }
        let a = (1.0 + eta) / 2.0;
        let b = (1.0 - eta) / 2.0;
        Self::validate(vec![HermitianOperator::diagonal(&[a, b]), HermitianOperator::diagonal(&[b, a])], 2)
    }

    /// Convex combination `Σ_k w_k P_k` of POVMs with equal shape.
    pub fn mixture(parts: &[(f64, &Povm)]) -> Result<Self> {
        let (_, first) = parts
            .first()
            .ok_or_else(|| Error::InvalidInput("empty mixture".into()))?;
        let weights: Vec<f64> = parts.iter().map(|(w, _)| *w).collect();
        validate_distribution(&weights)?;
        if parts.iter().any(|(_, p)| p.dim != first.dim || p.outcomes() != first.outcomes()) {
            return Err(dim_mismatch("mixture of POVMs with different shapes"));
        }
        let elements = (0..first.outcomes())
            .map(|x| {
                parts
                    .iter()
                    .fold(HermitianOperator::zeros(first.dim), |acc, (w, p)| acc.add(&p.elements[x].scale(*w)))
            })
            .collect();
        Self::validate(elements, first.dim)
    }

    /// Largest Frobenius distance between corresponding elements.
    pub fn distance(&self, other: &Povm) -> f64 {
        if self.dim != other.dim || self.outcomes() != other.outcomes() {
            return f64::INFINITY;
        }
        self.elements
            .iter()
            .zip(&other.elements)
            .map(|(a, b)| a.distance(b))
            .fold(0.0, f64::max)
    }

    /// `(Σ_x ‖P^x − Q^x‖_F²)^{1/2}`.
    pub fn aggregate_distance(&self, other: &Povm) -> f64 {
        if self.dim != other.dim || self.outcomes() != other.outcomes() {
            return f64::INFINITY;
        }
        self.elements
            .iter()
            .zip(&other.elements)
            .map(|(a, b)| a.distance(b).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Turns nearly valid elements (e.g. solver output) into a POVM: negative
    /// eigenvalues are clipped and the sum is renormalized by `S^{-1/2}·S^{-1/2}`.
    pub fn normalized(elements: Vec<HermitianOperator>, dim: usize) -> Result<Self> {
        if elements.is_empty() || elements.iter().any(|e| e.dim() != dim) {
            return Err(dim_mismatch("normalization needs nonempty elements of one dimension"));
        }
        let clipped = elements
            .iter()
            .map(|e| e.map_spectrum(|v| v.max(0.0)))
            .collect::<Result<Vec<_>>>()?;
        let s = clipped.iter().fold(HermitianOperator::zeros(dim), |acc, e| acc.add(e));
        if s.min_eigenvalue()? < 0.5 {
            return Err(Error::Completeness { residual: s.distance(&HermitianOperator::identity(dim)) });
        }
        let root = s.map_spectrum(|v| 1.0 / v.sqrt())?;
        Self::validate(clipped.iter().map(|e| e.congruence(root.matrix())).collect(), dim)
    }

    pub(crate) fn from_parts_unchecked(dim: usize, elements: Vec<HermitianOperator>) -> Self {
        Self { dim, elements }
    }
}

/// Unit eigenvectors `|ψ^x⟩` with `P^x|ψ^x⟩ = |ψ^x⟩`, if every element has
/// eigenvalue one (within the sharpness tolerance).
pub fn sharp_eigenvectors(p: &Povm) -> Result<Option<Vec<CVector>>> {
    let tol = Tolerances::current().sharp;
    let mut out = Vec::with_capacity(p.outcomes());
    for e in p.elements() {
        let eig = e.eig()?;
        let top = *eig.values.last().expect("dim >= 1");
        if top < 1.0 - tol {
            return Ok(None);
        }
        out.push(eig.vector(p.dim() - 1));
    }
    Ok(Some(out))
}

pub fn is_sharp(p: &Povm) -> bool {
    matches!(sharp_eigenvectors(p), Ok(Some(_)))
}

pub fn is_trivial(p: &Povm) -> bool {
    let tol = Tolerances::current().classify;
    let d = p.dim();
    p.elements().iter().all(|e| {
        let c = e.trace() / d as f64;
        e.sub(&HermitianOperator::identity(d).scale(c))
            .matrix()
            .iter()
            .all(|z| z.norm() <= tol)
    })
}

pub fn is_projective(p: &Povm) -> bool {
    let tol = Tolerances::current().classify;
    let els = p.elements();
    for (x, a) in els.iter().enumerate() {
        if (a.matrix() * a.matrix() - a.matrix()).norm() > tol {
            return false;
        }
        for b in &els[x + 1..] {
            if (a.matrix() * b.matrix()).norm() > tol {
                return false;
            }
        }
    }
    true
}

/// Every nonzero element has exactly one eigenvalue above the threshold.
pub fn is_rank_one(p: &Povm) -> bool {
    let tol = Tolerances::current().classify;
    p.elements().iter().all(|e| {
        if e.frobenius_norm() <= tol {
            return true;
        }
        match e.eig() {
            Ok(eig) => eig.values.iter().filter(|v| **v > tol).count() == 1,
            Err(_) => false,
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub sharp: bool,
    /// Sharp only within tolerance: some element's top eigenvalue is below
    /// one by more than rounding noise.
    pub numerically_sharp: bool,
    pub trivial: bool,
    pub projective: bool,
    pub rank_one: bool,
    /// `|ψ^x⟩` as `[re, im]` pairs, present iff sharp.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unit_eigenvectors: Option<Vec<Vec<[f64; 2]>>>,
}

pub fn classify(p: &Povm) -> Result<Classification> {
    let vectors = sharp_eigenvectors(p)?;
    let numerically_sharp = match vectors {
        Some(_) => p
            .elements()
            .iter()
            .map(|e| e.max_eigenvalue())
            .collect::<Result<Vec<_>>>()?
            .iter()
            .any(|m| *m < 1.0 - 1e-12),
        None => false,
    };
    Ok(Classification {
        sharp: vectors.is_some(),
        numerically_sharp,
        trivial: is_trivial(p),
        projective: is_projective(p),
        rank_one: is_rank_one(p),
        unit_eigenvectors: vectors.map(|vs| {
            vs.iter()
                .map(|v| v.iter().map(|z| [z.re, z.im]).collect())
                .collect()
        }),
    })
}

/// `{p(x)·I}`.
pub fn trivial_povm(dist: &[f64], dim: usize) -> Result<Povm> {
    let dist = validate_distribution(dist)?;
    Ok(Povm::from_parts_unchecked(
        dim,
        dist.iter().map(|p| HermitianOperator::identity(dim).scale(*p)).collect(),
    ))
}

/// Extremal trivial POVM `T^(i)` with elements `δ_{x,i}·I`, for `i ∈ 1..=n`
/// (program labels; outcome `x` is zero-based, so slot `i` fires outcome `i−1`).
pub fn extremal_trivial(i: usize, n: usize, dim: usize) -> Result<Povm> {
    if i == 0 || i > n {
        return Err(Error::InvalidInput(format!("extremal index {i} outside 1..={n}")));
    }
    let mut dist = vec![0.0; n];
    dist[i - 1] = 1.0;
    trivial_povm(&dist, dim)
}

/// A POVM together with the `N` extremal trivial POVMs, indexed by the
/// program `i ∈ {0, 1, …, N}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProgrammableDevice {
    slots: Vec<Povm>,
}

impl ProgrammableDevice {
    pub fn base(&self) -> &Povm {
        &self.slots[0]
    }

    pub fn slots(&self) -> &[Povm] {
        &self.slots
    }

    pub fn slot(&self, i: usize) -> &Povm {
        &self.slots[i]
    }

    pub fn dim(&self) -> usize {
        self.slots[0].dim()
    }

    pub fn outcomes(&self) -> usize {
        self.slots[0].outcomes()
    }

    /// Builds a device from slots, checking the trivial-slot structure.
    pub fn from_slots(slots: Vec<Povm>) -> Result<Self> {
        let base = slots.first().ok_or_else(|| Error::InvalidInput("no slots".into()))?;
        let n = base.outcomes();
        if slots.len() != n + 1 {
            return Err(dim_mismatch(format!("expected {} slots, got {}", n + 1, slots.len())));
        }
        for (i, s) in slots.iter().enumerate().skip(1) {
            let expected = extremal_trivial(i, n, base.dim())?;
            if s.distance(&expected) > 1e-9 {
                return Err(Error::InvalidInput(format!("slot {i} is not the extremal trivial POVM")));
            }
        }
        Ok(Self { slots })
    }
}

pub fn extend_to_programmable(p: &Povm) -> ProgrammableDevice {
    let n = p.outcomes();
    let mut slots = Vec::with_capacity(n + 1);
    slots.push(p.clone());
    for i in 1..=n {
        slots.push(extremal_trivial(i, n, p.dim()).expect("index in range"));
    }
    ProgrammableDevice { slots }
}

/// Membership of a distribution in the testing region of a POVM.
#[derive(Clone, Debug)]
pub struct TestingRegionMembership {
    pub contains: bool,
    /// Minimal total deviation `Σ_x |Tr[P^x ρ] − target_x|` over states.
    pub violation: f64,
    /// A state reproducing the target, when contained.
    pub state: Option<DensityMatrix>,
}

/// Decides whether some state `ρ` has `Tr[P^x ρ] = target_x` for all `x`.
pub fn testing_region_contains(p: &Povm, target: &[f64], tol: f64) -> Result<TestingRegionMembership> {
    if target.len() != p.outcomes() {
        return Err(dim_mismatch(format!(
            "target has {} entries for {} outcomes",
            target.len(),
            p.outcomes()
        )));
    }
    validate_distribution(target)?;
    let mut prob = SdpProblem::new();
    let rho = prob.add_hermitian("rho", p.dim());
    for (x, e) in p.elements().iter().enumerate() {
        prob.add_scalar_constraint(&format!("outcome_{x}"), vec![(rho, Coef::hermitian(e))], target[x]);
    }
    let ph = phase_one(&prob)?;
    let contains = ph.violation <= tol;
    let state = if contains {
        let r = ph.solution.hermitian(rho);
        let r = r.map_spectrum(|v| v.max(0.0))?;
        let tr = r.trace();
        Some(DensityMatrix::new(r.scale(1.0 / tr))?)
    } else {
        None
    };
    Ok(TestingRegionMembership { contains, violation: ph.violation, state })
}

/// Random POVM `S^{-1/2} G_x G_x† S^{-1/2}` with `S = Σ_x G_x G_x†` and
/// `G_x` complex Gaussian.
pub fn random_povm_with<R: Rng + ?Sized>(dim: usize, n: usize, rng: &mut R) -> Result<Povm> {
    if dim == 0 || n == 0 {
        return Err(Error::InvalidInput("dimension and outcome count must be positive".into()));
    }
    for _ in 0..10 {
        let blocks: Vec<HermitianOperator> = (0..n)
            .map(|_| {
                let g = ginibre(dim, dim, rng);
                HermitianOperator::symmetrized(&g * g.adjoint())
            })
            .collect();
        let s = blocks.iter().fold(HermitianOperator::zeros(dim), |acc, b| acc.add(b));
        let eig = s.eig()?;
        if eig.values[0] <= 1e-10 * eig.values[dim - 1] {
            continue;
        }
        let s_inv_half = s.map_spectrum(|v| 1.0 / v.sqrt())?;
        let elements = blocks.iter().map(|b| b.congruence(s_inv_half.matrix())).collect();
        return Povm::validate(elements, dim);
    }
    Err(Error::SolverFailure("random POVM: normalizer singular after 10 draws".into()))
}

pub fn random_povm(dim: usize, n: usize, seed: u64) -> Result<Povm> {
    random_povm_with(dim, n, &mut seeded_rng(seed))
}

/// Random projective POVM with `n ≤ dim` outcomes: a Haar basis split into
/// `n` nonempty groups.
pub fn random_sharp_povm_with<R: Rng + ?Sized>(dim: usize, n: usize, rng: &mut R) -> Result<Povm> {
    if n == 0 || n > dim {
        return Err(Error::InvalidInput(format!("a sharp POVM on dimension {dim} cannot have {n} outcomes")));
    }
    let u = random_unitary_with(dim, rng);
    let mut owner: Vec<usize> = (0..dim).map(|k| if k < n { k } else { rng.random_range(0..n) }).collect();
    // shuffle which basis vector goes where
    for k in (1..dim).rev() {
        let j = rng.random_range(0..=k);
        owner.swap(k, j);
    }
    let mut elements = vec![HermitianOperator::zeros(dim); n];
    for (k, x) in owner.iter().enumerate() {
        let v: CVector = u.matrix().column(k).into_owned();
        elements[*x] = elements[*x].add(&HermitianOperator::projector(&v));
    }
    Povm::validate(elements, dim)
}

pub fn random_sharp_povm(dim: usize, n: usize, seed: u64) -> Result<Povm> {
    random_sharp_povm_with(dim, n, &mut seeded_rng(seed))
}

pub(crate) fn unit(d: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(d);
    v[i] = C64::new(1.0, 0.0);
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qubit_basis() -> Povm {
        Povm::computational_basis(2)
    }

    #[test]
    fn validate_examples() {
        assert!(Povm::validate(qubit_basis().elements().to_vec(), 2).is_ok());
        let h = HermitianOperator::identity(2).scale(0.5);
        assert!(Povm::validate(vec![h.clone(), h, HermitianOperator::zeros(2)], 2).is_ok());
        let i2 = HermitianOperator::identity(2);
        assert!(matches!(
            Povm::validate(vec![i2.clone(), i2], 2),
            Err(Error::Completeness { .. })
        ));
        let bad = HermitianOperator::diagonal(&[1.5, -0.5]);
        assert!(matches!(
            Povm::validate(vec![bad, HermitianOperator::diagonal(&[-0.5, 1.5])], 2),
            Err(Error::NotPsd { index: 0, .. })
        ));
        assert!(Povm::validate(vec![], 2).is_err());
        assert!(Povm::validate(vec![HermitianOperator::identity(3)], 2).is_err());
    }

    #[test]
    fn sharpness_examples() {
        assert!(is_sharp(&qubit_basis()));
        assert!(!is_sharp(&Povm::noisy_qubit_basis(0.5).unwrap()));
        let p = Povm::validate(
            vec![HermitianOperator::diagonal(&[1.0, 1.0, 0.0]), HermitianOperator::diagonal(&[0.0, 0.0, 1.0])],
            3,
        )
        .unwrap();
        let c = classify(&p).unwrap();
        assert!(c.sharp && c.projective && !c.rank_one);
        let vs = sharp_eigenvectors(&p).unwrap().unwrap();
        for (x, v) in vs.iter().enumerate() {
            let pv = p.element(x).matrix() * v;
            assert!((pv - v).norm() < 1e-6);
        }
        assert!(vs[0].dotc(&vs[1]).norm() < 1e-6);
    }

    #[test]
    fn predicate_examples() {
        let h = HermitianOperator::identity(2).scale(0.5);
        let half = Povm::validate(vec![h.clone(), h], 2).unwrap();
        assert!(is_trivial(&half));
        let zi = Povm::validate(vec![HermitianOperator::zeros(2), HermitianOperator::identity(2)], 2).unwrap();
        assert!(is_trivial(&zi) && is_projective(&zi));
        let c = classify(&zi).unwrap();
        assert!(!c.sharp && !c.rank_one);

        // half-weighted doubled basis on a qutrit: rank-one but unsharp
        let h0 = HermitianOperator::basis_projector(0, 3).scale(0.5);
        let h1 = HermitianOperator::basis_projector(1, 3).scale(0.5);
        let p2 = HermitianOperator::basis_projector(2, 3);
        let doubled = Povm::validate(vec![h0.clone(), h0, h1.clone(), h1, p2], 3).unwrap();
        assert!(is_rank_one(&doubled));
        assert!(!is_sharp(&doubled));
        assert!(!is_projective(&doubled));
    }

    #[test]
    fn trivial_constructors() {
        let t = trivial_povm(&[0.5, 0.5], 2).unwrap();
        assert!(t.element(0).approx_eq(&HermitianOperator::identity(2).scale(0.5), 0.0));
        let e = extremal_trivial(1, 2, 2).unwrap();
        assert!(e.element(0).approx_eq(&HermitianOperator::identity(2), 0.0));
        assert!(e.element(1).approx_eq(&HermitianOperator::zeros(2), 0.0));
        assert_eq!(trivial_povm(&[1.0, 0.0], 3).unwrap(), extremal_trivial(1, 2, 3).unwrap());
        assert!(trivial_povm(&[0.7, 0.7], 2).is_err());
        assert!(trivial_povm(&[1.5, -0.5], 2).is_err());
        assert!(extremal_trivial(0, 2, 2).is_err());
    }

    #[test]
    fn programmable_extension() {
        let dev = extend_to_programmable(&qubit_basis());
        assert_eq!(dev.slots().len(), 3);
        assert_eq!(dev.slot(1), &extremal_trivial(1, 2, 2).unwrap());
        assert_eq!(dev.slot(2), &extremal_trivial(2, 2, 2).unwrap());
        assert_eq!(dev.base(), &qubit_basis());

        let single = Povm::validate(vec![HermitianOperator::identity(2)], 2).unwrap();
        let dev = extend_to_programmable(&single);
        assert_eq!(dev.slots().len(), 2);
        assert_eq!(dev.slot(0), dev.slot(1));
        assert!(ProgrammableDevice::from_slots(dev.slots().to_vec()).is_ok());
    }

    #[test]
    fn testing_region_examples() {
        let r = testing_region_contains(&qubit_basis(), &[1.0, 0.0], 1e-7).unwrap();
        assert!(r.contains);
        let rho = r.state.unwrap();
        assert!(rho.op().approx_eq(&HermitianOperator::basis_projector(0, 2), 1e-6));

        let h = HermitianOperator::identity(2).scale(0.5);
        let half = Povm::validate(vec![h.clone(), h], 2).unwrap();
        assert!(!testing_region_contains(&half, &[0.6, 0.4], 1e-7).unwrap().contains);
        assert!(testing_region_contains(&half, &[0.5, 0.5], 1e-7).unwrap().contains);

        let noisy = Povm::noisy_qubit_basis(0.5).unwrap();
        for (p, inside) in [(0.2, false), (0.3, true), (0.5, true), (0.7, true), (0.8, false), (0.74, true)] {
            let r = testing_region_contains(&noisy, &[p, 1.0 - p], 1e-7).unwrap();
            assert_eq!(r.contains, inside, "p = {p}, violation {}", r.violation);
        }
    }

    #[test]
    fn random_povm_properties() {
        let p = random_povm(3, 4, 9).unwrap();
        assert_eq!(p, random_povm(3, 4, 9).unwrap());
        assert_eq!(p.outcomes(), 4);
        for seed in 0..1000 {
            assert!(!is_sharp(&random_povm(2, 2, seed).unwrap()));
        }
    }

    #[test]
    fn random_sharp_povm_is_sharp() {
        for (d, n) in [(2, 2), (3, 2), (3, 3)] {
            let p = random_sharp_povm(d, n, 4).unwrap();
            assert!(is_sharp(&p) && is_projective(&p));
            if n == d {
                assert!(is_rank_one(&p));
            }
        }
        assert!(random_sharp_povm(2, 3, 0).is_err());
    }

    #[test]
    fn unit_vector() {
        assert_eq!(unit(3, 1)[1], C64::new(1.0, 0.0));
    }
}
