//! Primal-dual interior-point method on real symmetric and diagonal blocks.
//!
//! Solves
//!
//! ```text
//!   min ⟨C, X⟩  s.t.  ⟨A_i, X⟩ = b_i,  X ⪰ 0
//!   max bᵀy     s.t.  Σ_i y_i A_i + Z = C,  Z ⪰ 0
//! ```
//!
//! with the HKM search direction and Mehrotra's predictor-corrector scheme.

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Debug)]
pub(crate) enum RData {
    Mat(DMatrix<f64>),
    Diag(DVector<f64>),
}

impl RData {
    fn zeros_like(&self) -> RData {
        match self {
            RData::Mat(m) => RData::Mat(DMatrix::zeros(m.nrows(), m.ncols())),
            RData::Diag(v) => RData::Diag(DVector::zeros(v.len())),
        }
    }

    fn identity_like(&self, s: f64) -> RData {
        match self {
            RData::Mat(m) => RData::Mat(DMatrix::identity(m.nrows(), m.nrows()) * s),
            RData::Diag(v) => RData::Diag(DVector::from_element(v.len(), s)),
        }
    }

    pub(crate) fn inner(&self, other: &RData) -> f64 {
        match (self, other) {
            (RData::Mat(a), RData::Mat(b)) => a.dot(b),
            (RData::Diag(a), RData::Diag(b)) => a.dot(b),
            _ => unreachable!("block kind mismatch"),
        }
    }

    fn norm_sq(&self) -> f64 {
        self.inner(self)
    }

    fn axpy(&mut self, alpha: f64, x: &RData) {
        match (self, x) {
            (RData::Mat(a), RData::Mat(b)) => *a += b * alpha,
            (RData::Diag(a), RData::Diag(b)) => a.axpy(alpha, b, 1.0),
            _ => unreachable!("block kind mismatch"),
        }
    }

    fn order(&self) -> usize {
        match self {
            RData::Mat(m) => m.nrows(),
            RData::Diag(v) => v.len(),
        }
    }
}

/// Problem in standard (minimization) form.
#[derive(Clone, Debug)]
pub(crate) struct StdProblem {
    /// Template per block (its shape); values are ignored.
    pub shapes: Vec<RData>,
    pub c: Vec<RData>,
    /// Sparse by block: `a[i]` lists `(block, coefficient)` pairs of row `i`.
    pub a: Vec<Vec<(usize, RData)>>,
    pub b: DVector<f64>,
}

#[derive(Clone, Debug)]
pub(crate) struct IpmResult {
    pub x: Vec<RData>,
    pub y: DVector<f64>,
    pub z: Vec<RData>,
    pub pobj: f64,
    pub dobj: f64,
    pub pinf: f64,
    pub dinf: f64,
    pub iterations: usize,
    /// Norms blew up: the problem looks infeasible or unbounded.
    pub diverged: bool,
}

impl IpmResult {
    pub fn rel_gap(&self) -> f64 {
        (self.pobj - self.dobj).abs() / (1.0 + self.pobj.abs() + self.dobj.abs())
    }

    fn merit(&self) -> f64 {
        self.rel_gap().max(self.pinf).max(self.dinf)
    }
}

/// Internal accuracy target, tighter than the reported contract.
const TARGET: f64 = 1e-13;
const DIVERGENCE: f64 = 1e12;

struct Workspace<'a> {
    p: &'a StdProblem,
    b_norm: f64,
    c_norm: f64,
}

impl<'a> Workspace<'a> {
    fn apply_a(&self, x: &[RData]) -> DVector<f64> {
        DVector::from_iterator(
            self.p.a.len(),
            self.p.a.iter().map(|row| row.iter().map(|(k, a)| a.inner(&x[*k])).sum::<f64>()),
        )
    }

    fn apply_at(&self, y: &DVector<f64>) -> Vec<RData> {
        let mut out: Vec<RData> = self.p.shapes.iter().map(RData::zeros_like).collect();
        for (i, row) in self.p.a.iter().enumerate() {
            if y[i] != 0.0 {
                for (k, a) in row {
                    out[*k].axpy(y[i], a);
                }
            }
        }
        out
    }

    fn residuals(&self, x: &[RData], y: &DVector<f64>, z: &[RData]) -> (DVector<f64>, Vec<RData>) {
        let rp = &self.p.b - self.apply_a(x);
        let aty = self.apply_at(y);
        let rd = self
            .p
            .c
            .iter()
            .zip(z.iter().zip(aty.iter()))
            .map(|(c, (zk, ak))| {
                let mut r = c.clone();
                r.axpy(-1.0, zk);
                r.axpy(-1.0, ak);
                r
            })
            .collect();
        (rp, rd)
    }

    fn snapshot(&self, x: &[RData], y: &DVector<f64>, z: &[RData], iterations: usize) -> IpmResult {
        let (rp, rd) = self.residuals(x, y, z);
        let pobj: f64 = self.p.c.iter().zip(x).map(|(c, x)| c.inner(x)).sum();
        let dobj = self.p.b.dot(y);
        let rd_norm = rd.iter().map(RData::norm_sq).sum::<f64>().sqrt();
        IpmResult {
            x: x.to_vec(),
            y: y.clone(),
            z: z.to_vec(),
            pobj,
            dobj,
            pinf: rp.norm() / (1.0 + self.b_norm),
            dinf: rd_norm / (1.0 + self.c_norm),
            iterations,
            diverged: false,
        }
    }
}

fn sym(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

fn inverse_spd(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    m.clone().cholesky().map(|c| c.inverse())
}

/// Largest `α ≤ cap` with `x + α dx ⪰ 0`.
fn max_step(x: &RData, dx: &RData) -> f64 {
    match (x, dx) {
        (RData::Diag(x), RData::Diag(dx)) => x
            .iter()
            .zip(dx.iter())
            .filter(|(_, d)| **d < 0.0)
            .map(|(v, d)| -v / d)
            .fold(f64::INFINITY, f64::min),
        (RData::Mat(x), RData::Mat(dx)) => {
            let lam = match x.clone().cholesky() {
                Some(ch) => {
                    let l = ch.l();
                    let li = l.clone().try_inverse().unwrap_or_else(|| DMatrix::identity(l.nrows(), l.nrows()));
                    let t = sym(&li * dx * li.transpose());
                    t.symmetric_eigenvalues().min()
                }
                None => return 0.0,
            };
            if lam < 0.0 {
                -1.0 / lam
            } else {
                f64::INFINITY
            }
        }
        _ => unreachable!("block kind mismatch"),
    }
}

struct Direction {
    dx: Vec<RData>,
    dy: DVector<f64>,
    dz: Vec<RData>,
}

pub(crate) fn solve(p: &StdProblem, max_iter: usize) -> IpmResult {
    let m = p.a.len();
    let n_total: usize = p.shapes.iter().map(RData::order).sum();
    let ws = Workspace {
        p,
        b_norm: p.b.norm(),
        c_norm: p.c.iter().map(RData::norm_sq).sum::<f64>().sqrt(),
    };

    // starting point after the SDPT3 heuristic
    let mut x = Vec::with_capacity(p.shapes.len());
    let mut z = Vec::with_capacity(p.shapes.len());
    for (k, shape) in p.shapes.iter().enumerate() {
        let n = shape.order() as f64;
        let mut xi = 10f64.max(n.sqrt());
        let mut eta = 10f64.max(n.sqrt());
        let c_norm = p.c[k].norm_sq().sqrt();
        eta = eta.max(c_norm);
        for (i, row) in p.a.iter().enumerate() {
            for (kk, a) in row {
                if *kk == k {
                    let an = a.norm_sq().sqrt();
                    xi = xi.max(n * (1.0 + p.b[i].abs()) / (1.0 + an));
                    eta = eta.max(an);
                }
            }
        }
        x.push(shape.identity_like(xi));
        z.push(shape.identity_like(eta));
    }
    let mut y = DVector::zeros(m);

    let mut best = ws.snapshot(&x, &y, &z, 0);
    let mut stall = 0usize;

    for it in 1..=max_iter {
        let cur = ws.snapshot(&x, &y, &z, it - 1);
        if cur.merit() < best.merit() {
            best = cur.clone();
            stall = 0;
        } else {
            stall += 1;
        }
        if cur.merit() < TARGET || stall > 8 {
            break;
        }
        let x_norm = x.iter().map(RData::norm_sq).sum::<f64>().sqrt();
        if x_norm > DIVERGENCE || y.norm() > DIVERGENCE {
            best.diverged = true;
            break;
        }

        let mu = x.iter().zip(&z).map(|(a, b)| a.inner(b)).sum::<f64>() / n_total as f64;
        let (rp, rd) = ws.residuals(&x, &y, &z);

        let zinv: Option<Vec<RData>> = z
            .iter()
            .map(|zk| match zk {
                RData::Mat(m) => inverse_spd(m).map(RData::Mat),
                RData::Diag(v) => Some(RData::Diag(v.map(|e| 1.0 / e))),
            })
            .collect();
        let Some(zinv) = zinv else { break };

        // Schur complement M_ij = Σ_blocks Tr(A_i X A_j Z⁻¹)
        let mut g: Vec<Vec<(usize, RData)>> = Vec::with_capacity(m);
        for row in &p.a {
            g.push(
                row.iter()
                    .map(|(k, a)| {
                        let v = match (a, &x[*k], &zinv[*k]) {
                            (RData::Mat(a), RData::Mat(xk), RData::Mat(zi)) => RData::Mat(xk * a * zi),
                            (RData::Diag(a), RData::Diag(xk), RData::Diag(zi)) => {
                                RData::Diag(a.component_mul(xk).component_mul(zi))
                            }
                            _ => unreachable!(),
                        };
                        (*k, v)
                    })
                    .collect(),
            );
        }
        let mut schur = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let mut s = 0.0;
                for (ki, ai) in &p.a[i] {
                    for (kj, gj) in &g[j] {
                        if ki == kj {
                            s += ai.inner(gj);
                        }
                    }
                }
                schur[(i, j)] = s;
                schur[(j, i)] = s;
            }
        }
        let Some(solver) = SchurSolver::new(schur) else { break };

        let direction = |sigma_mu: f64, corr: Option<&Direction>| -> Option<Direction> {
            // K = σμ Z⁻¹ − X − ΔXa ΔZa Z⁻¹
            let kmat: Vec<RData> = (0..x.len())
                .map(|k| match (&x[k], &zinv[k]) {
                    (RData::Mat(xk), RData::Mat(zi)) => {
                        let mut km = zi * sigma_mu - xk;
                        if let Some(c) = corr {
                            if let (RData::Mat(dxa), RData::Mat(dza)) = (&c.dx[k], &c.dz[k]) {
                                km -= dxa * dza * zi;
                            }
                        }
                        RData::Mat(km)
                    }
                    (RData::Diag(xk), RData::Diag(zi)) => {
                        let mut km = zi * sigma_mu - xk;
                        if let Some(c) = corr {
                            if let (RData::Diag(dxa), RData::Diag(dza)) = (&c.dx[k], &c.dz[k]) {
                                km -= dxa.component_mul(dza).component_mul(zi);
                            }
                        }
                        RData::Diag(km)
                    }
                    _ => unreachable!(),
                })
                .collect();
            // X Rd Z⁻¹
            let xrz: Vec<RData> = (0..x.len())
                .map(|k| match (&x[k], &rd[k], &zinv[k]) {
                    (RData::Mat(xk), RData::Mat(r), RData::Mat(zi)) => RData::Mat(xk * r * zi),
                    (RData::Diag(xk), RData::Diag(r), RData::Diag(zi)) => {
                        RData::Diag(xk.component_mul(r).component_mul(zi))
                    }
                    _ => unreachable!(),
                })
                .collect();
            let rhs = &rp - ws.apply_a(&kmat) + ws.apply_a(&xrz);
            let dy = solver.solve(&rhs)?;
            let aty = ws.apply_at(&dy);
            let mut dz = Vec::with_capacity(x.len());
            let mut dx = Vec::with_capacity(x.len());
            for k in 0..x.len() {
                let mut dzk = rd[k].clone();
                dzk.axpy(-1.0, &aty[k]);
                let dxk = match (&kmat[k], &x[k], &dzk, &zinv[k]) {
                    (RData::Mat(km), RData::Mat(xk), RData::Mat(d), RData::Mat(zi)) => {
                        RData::Mat(sym(km - xk * d * zi))
                    }
                    (RData::Diag(km), RData::Diag(xk), RData::Diag(d), RData::Diag(zi)) => {
                        RData::Diag(km - xk.component_mul(d).component_mul(zi))
                    }
                    _ => unreachable!(),
                };
                dz.push(dzk);
                dx.push(dxk);
            }
            Some(Direction { dx, dy, dz })
        };

        let steps = |d: &Direction| -> (f64, f64) {
            let ap = x.iter().zip(&d.dx).map(|(a, b)| max_step(a, b)).fold(f64::INFINITY, f64::min);
            let ad = z.iter().zip(&d.dz).map(|(a, b)| max_step(a, b)).fold(f64::INFINITY, f64::min);
            (ap, ad)
        };

        // predictor
        let Some(pred) = direction(0.0, None) else { break };
        let (ap, ad) = steps(&pred);
        let (ap1, ad1) = (ap.min(1.0), ad.min(1.0));
        let mut mu_aff = 0.0;
        for k in 0..x.len() {
            let mut xa = x[k].clone();
            xa.axpy(ap1, &pred.dx[k]);
            let mut za = z[k].clone();
            za.axpy(ad1, &pred.dz[k]);
            mu_aff += xa.inner(&za);
        }
        mu_aff /= n_total as f64;
        let ratio = (mu_aff / mu).clamp(0.0, 1.0);
        let expon = if ap1.min(ad1) > 0.3 { 3.0 } else { 2.0 };
        let sigma = ratio.powf(expon).clamp(0.0, 1.0);

        // corrector
        let Some(corr) = direction(sigma * mu, Some(&pred)) else { break };
        let (ap, ad) = steps(&corr);
        let gamma = 0.9 + 0.09 * ap.min(ad).min(1.0);
        let ap = (gamma * ap).min(1.0);
        let ad = (gamma * ad).min(1.0);
        if ap < 1e-12 && ad < 1e-12 {
            break;
        }
        for k in 0..x.len() {
            x[k].axpy(ap, &corr.dx[k]);
            z[k].axpy(ad, &corr.dz[k]);
        }
        y.axpy(ad, &corr.dy, 1.0);
    }

    let last = ws.snapshot(&x, &y, &z, best.iterations + 1);
    if last.merit() < best.merit() {
        let diverged = best.diverged;
        best = last;
        best.diverged = diverged;
    }
    best
}

struct SchurSolver {
    chol: Option<nalgebra::Cholesky<f64, nalgebra::Dyn>>,
    lu: Option<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>>,
}

impl SchurSolver {
    fn new(mut m: DMatrix<f64>) -> Option<Self> {
        if let Some(chol) = m.clone().cholesky() {
            return Some(Self { chol: Some(chol), lu: None });
        }
        // nearly dependent rows: regularize lightly, then fall back to LU
        let scale = m.diagonal().amax().max(1e-300);
        for i in 0..m.nrows() {
            m[(i, i)] += 1e-14 * scale;
        }
        if let Some(chol) = m.clone().cholesky() {
            return Some(Self { chol: Some(chol), lu: None });
        }
        let lu = m.lu();
        if lu.is_invertible() {
            Some(Self { chol: None, lu: Some(lu) })
        } else {
            None
        }
    }

    fn solve(&self, rhs: &DVector<f64>) -> Option<DVector<f64>> {
        let out = match (&self.chol, &self.lu) {
            (Some(c), _) => c.solve(rhs),
            (None, Some(lu)) => lu.solve(rhs)?,
            _ => return None,
        };
        out.iter().all(|v| v.is_finite()).then_some(out)
    }
}
