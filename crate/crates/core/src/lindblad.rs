//! Local GKLS master equation: thermal transitions, the Liouvillian
//! superoperator, and steady-state solvers.
//!
//! Every rotor couples to its own bosonic bath. Jumps connect product states
//! that differ by ±1 in a single clock digit, with rates fixed by the bath
//! spectral function evaluated at the diagonal energy difference, so each
//! site's rates satisfy detailed balance at its own temperature.
//!
//! Vectorisation is column-stacking throughout: `vec(ρ)[i + j·D] = ρ[i, j]`,
//! hence `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`. A unit test pins the convention.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, Eigh, UPLO};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::HamiltonianSplit;
use crate::sparse::CsrMatrix;

/// Per-site inverse temperatures and the microscopic rate constant.
#[derive(Debug, Clone, PartialEq)]
pub struct BathConfig {
    beta: Vec<f64>,
    g: f64,
}

impl BathConfig {
    pub fn new(beta: Vec<f64>, g: f64) -> Result<Self> {
        if beta.is_empty() || beta.iter().any(|&b| b <= 0.0 || !b.is_finite()) {
            return Err(Error::InvalidParams("all inverse temperatures must be positive".into()));
        }
        if g <= 0.0 || !g.is_finite() {
            return Err(Error::InvalidParams(format!("microscopic rate g = {g} must be positive")));
        }
        Ok(Self { beta, g })
    }

    /// Staggered sub-lattice temperatures: with 1-based site numbering, even
    /// sites couple to β_e and odd sites to β_o.
    pub fn staggered(beta_e: f64, beta_o: f64, g: f64, rotors: usize) -> Result<Self> {
        let beta = (1..=rotors).map(|j| if j % 2 == 0 { beta_e } else { beta_o }).collect();
        Self::new(beta, g)
    }

    pub fn uniform(beta: f64, g: f64, rotors: usize) -> Result<Self> {
        Self::new(vec![beta; rotors], g)
    }

    pub fn beta(&self, site: usize) -> f64 {
        self.beta[site]
    }

    pub fn betas(&self) -> &[f64] {
        &self.beta
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn rotors(&self) -> usize {
        self.beta.len()
    }
}

/// One allowed jump: `source → target` rotates the clock at `site` by ±1.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub site: usize,
    pub source: usize,
    pub target: usize,
    pub rate: f64,
}

/// Bosonic bath rate for a jump that releases energy `delta_e`
/// (`delta_e = E_source − E_target`).
///
/// Positive `delta_e` (downhill) gives `g·Δ/(1 − e^{−βΔ})`; uphill jumps pick
/// up the extra `e^{βΔ}` factor, so the pair satisfies detailed balance
/// exactly. The Δ → 0 limit is the finite value `g/β`; excluding resonant
/// jumps instead would break detailed-balance completeness wherever the
/// diagonal spectrum is flat.
pub fn bath_rate(delta_e: f64, beta: f64, g: f64) -> f64 {
    if delta_e == 0.0 {
        return g / beta;
    }
    let x = delta_e.abs();
    // 1 − e^{−βx} via expm1 keeps the small-Δ limit accurate
    let base = g * x / (-(-beta * x).exp_m1());
    if delta_e > 0.0 {
        base
    } else {
        base * (beta * delta_e).exp()
    }
}

/// All single-digit jumps with their bath rates: one per (state, site,
/// direction), `2·M·D` in total, ordered by site, then state, then direction.
pub fn enumerate_transitions(
    h: &HamiltonianSplit,
    params: &crate::model::CcmParams,
    baths: &BathConfig,
) -> Result<Vec<Transition>> {
    let clock = &params.clock;
    if baths.rotors() != clock.rotors() {
        return Err(Error::DimensionMismatch(format!(
            "{} baths for {} rotors",
            baths.rotors(),
            clock.rotors()
        )));
    }
    if h.dim() != clock.dim() {
        return Err(Error::DimensionMismatch("Hamiltonian dimension mismatch".into()));
    }
    let energies = h.diagonal_energies()?;
    let mut out = Vec::with_capacity(2 * clock.rotors() * clock.dim());
    for site in 0..clock.rotors() {
        let beta = baths.beta(site);
        for source in 0..clock.dim() {
            for delta in [1i64, -1] {
                let target = clock.shift_digit(source, site, delta);
                let rate = bath_rate(energies[source] - energies[target], beta, baths.g());
                out.push(Transition { site, source, target, rate });
            }
        }
    }
    Ok(out)
}

/// Orbit bookkeeping for a permutation symmetry of the superoperator.
#[derive(Debug, Clone)]
struct PairSymmetry {
    /// Orbit index of every vectorised position.
    orbit_id: Vec<usize>,
    /// One representative position per orbit.
    reps: Vec<usize>,
}

/// The full generator `ρ̇ = −i[H, ρ] + Σ_m D_m(ρ)` as a sparse superoperator
/// on vectorised density matrices, with the per-site dissipators kept
/// separately retrievable.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    dim: usize,
    hamiltonian: CsrMatrix,
    superop: CsrMatrix,
    by_site: Vec<Vec<Transition>>,
    norm_inf: f64,
    symmetry: Option<PairSymmetry>,
}

pub fn build_liouvillian(h: &HamiltonianSplit, transitions: &[Transition]) -> Result<Liouvillian> {
    let dim = h.dim();
    let n = dim * dim;
    let sites = transitions.iter().map(|t| t.site + 1).max().unwrap_or(0);
    let mut by_site: Vec<Vec<Transition>> = vec![Vec::new(); sites];
    for t in transitions {
        if t.source >= dim || t.target >= dim {
            return Err(Error::DimensionMismatch(format!(
                "transition {} → {} outside dimension {dim}",
                t.source, t.target
            )));
        }
        by_site[t.site].push(t.clone());
    }

    // −i (I ⊗ H − Hᵀ ⊗ I)
    let id = CsrMatrix::identity(dim);
    let comm = id
        .kron(&h.total.matrix)
        .add_scaled(&h.total.matrix.transpose().kron(&id), Complex64::new(-1.0, 0.0))?
        .scaled(Complex64::new(0.0, -1.0));

    // dissipators: jump entries plus a diagonal damping profile
    let mut diag = vec![0.0f64; n];
    let mut jumps = Vec::with_capacity(transitions.len());
    for t in transitions {
        let (s, tgt, w) = (t.source, t.target, t.rate);
        jumps.push((tgt + tgt * dim, s + s * dim, Complex64::new(w, 0.0)));
        for j in 0..dim {
            diag[s + j * dim] -= 0.5 * w;
            diag[j + s * dim] -= 0.5 * w;
        }
    }
    let mut dis_triplets = jumps;
    for (v, &d) in diag.iter().enumerate() {
        if d != 0.0 {
            dis_triplets.push((v, v, Complex64::new(d, 0.0)));
        }
    }
    let dissipator = CsrMatrix::from_triplets(n, n, &dis_triplets)?;
    let superop = comm.add_scaled(&dissipator, Complex64::new(1.0, 0.0))?;
    let norm_inf = superop.norm_inf();

    Ok(Liouvillian {
        dim,
        hamiltonian: h.total.matrix.clone(),
        superop,
        by_site,
        norm_inf,
        symmetry: None,
    })
}

impl Liouvillian {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sites(&self) -> usize {
        self.by_site.len()
    }

    pub fn superop(&self) -> &CsrMatrix {
        &self.superop
    }

    pub fn norm_inf(&self) -> f64 {
        self.norm_inf
    }

    pub fn hamiltonian(&self) -> &CsrMatrix {
        &self.hamiltonian
    }

    pub fn site_transitions(&self, site: usize) -> &[Transition] {
        &self.by_site[site]
    }

    /// `ρ̇` for a dense density matrix.
    pub fn apply(&self, rho: &Array2<Complex64>) -> Array2<Complex64> {
        let h_rho = self.hamiltonian.matmul_dense(rho);
        let rho_h = self.hamiltonian.rmatmul_dense(rho);
        let mut out = (&h_rho - &rho_h).mapv(|z| Complex64::new(z.im, -z.re));
        for site in 0..self.by_site.len() {
            self.add_site_dissipator(site, rho, &mut out);
        }
        out
    }

    /// `D_m(ρ)` for a single site.
    pub fn apply_site_dissipator(&self, site: usize, rho: &Array2<Complex64>) -> Array2<Complex64> {
        let mut out = Array2::zeros((self.dim, self.dim));
        self.add_site_dissipator(site, rho, &mut out);
        out
    }

    fn add_site_dissipator(&self, site: usize, rho: &Array2<Complex64>, out: &mut Array2<Complex64>) {
        for t in &self.by_site[site] {
            let w = Complex64::new(t.rate, 0.0);
            let half = Complex64::new(0.5 * t.rate, 0.0);
            let (s, tgt) = (t.source, t.target);
            out[[tgt, tgt]] += w * rho[[s, s]];
            for j in 0..self.dim {
                out[[s, j]] -= half * rho[[s, j]];
                out[[j, s]] -= half * rho[[j, s]];
            }
        }
    }

    /// 2-norm of `L vec(ρ)`; the steady-state contract compares this against
    /// `residual_factor · ‖L‖_∞`.
    pub fn residual(&self, rho: &Array2<Complex64>) -> f64 {
        let v = vectorize(rho);
        let y = self.superop.matvec(&v);
        y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Register a basis-state permutation `perm` under which the generator is
    /// invariant, `L ∘ (P · Pᵀ) = (P · Pᵀ) ∘ L`. The claim is verified entry
    /// by entry on the superoperator and rejected if it fails; once
    /// registered, the steady state is searched inside the symmetric orbit
    /// sector, a factor |orbit| smaller.
    pub fn with_state_permutation(mut self, perm: &[usize]) -> Result<Self> {
        let dim = self.dim;
        if perm.len() != dim {
            return Err(Error::DimensionMismatch("permutation length differs from dim".into()));
        }
        let mut seen = vec![false; dim];
        for &p in perm {
            if p >= dim || seen[p] {
                return Err(Error::InvalidParams("not a permutation of the basis".into()));
            }
            seen[p] = true;
        }
        let n = dim * dim;
        let pair = |v: usize| -> usize {
            let (i, j) = (v % dim, v / dim);
            perm[i] + perm[j] * dim
        };
        let tol = 1e-13 * self.norm_inf.max(1.0);
        for (r, c, v) in self.superop.triplets() {
            let w = self.superop.get(pair(r), pair(c));
            if (v - w).norm() > tol {
                return Err(Error::InvalidParams(format!(
                    "generator is not invariant under the permutation: |ΔL| = {:.3e}",
                    (v - w).norm()
                )));
            }
        }
        let mut orbit_id = vec![usize::MAX; n];
        let mut reps = Vec::new();
        for v in 0..n {
            if orbit_id[v] == usize::MAX {
                let id = reps.len();
                let mut w = v;
                loop {
                    orbit_id[w] = id;
                    w = pair(w);
                    if w == v {
                        break;
                    }
                }
                reps.push(v);
            }
        }
        self.symmetry = Some(PairSymmetry { orbit_id, reps });
        Ok(self)
    }

    pub fn has_symmetry(&self) -> bool {
        self.symmetry.is_some()
    }

    /// Unknown count of the sparse steady-state solve (orbit count when a
    /// symmetry is registered).
    pub fn effective_unknowns(&self) -> usize {
        match &self.symmetry {
            Some(s) => s.reps.len(),
            None => self.dim * self.dim,
        }
    }
}

/// Column-stacking vectorisation.
pub fn vectorize(rho: &Array2<Complex64>) -> Vec<Complex64> {
    let d = rho.nrows();
    let mut v = vec![Complex64::new(0.0, 0.0); d * d];
    for j in 0..d {
        for i in 0..d {
            v[i + j * d] = rho[[i, j]];
        }
    }
    v
}

pub fn unvectorize(v: &[Complex64], dim: usize) -> Array2<Complex64> {
    assert_eq!(v.len(), dim * dim);
    let mut rho = Array2::zeros((dim, dim));
    for j in 0..dim {
        for i in 0..dim {
            rho[[i, j]] = v[i + j * dim];
        }
    }
    rho
}

/// A validated density matrix: Hermitian within 1e-10, unit trace within
/// 1e-10, and eigenvalues above −1e-8.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: Array2<Complex64>,
}

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = -1e-8;

impl DensityMatrix {
    pub fn new(matrix: Array2<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidState("density matrix must be square".into()));
        }
        let herm_defect = hermiticity_defect(&matrix);
        if herm_defect > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!("Hermiticity defect {herm_defect:.3e}")));
        }
        let tr = trace(&matrix);
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from one")));
        }
        let herm = hermitize(&matrix);
        let (vals, _) = herm.eigh(UPLO::Lower)?;
        if let Some(&min) = vals.iter().min_by(|a, b| a.partial_cmp(b).unwrap()) {
            if min < POSITIVITY_TOL {
                return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
            }
        }
        Ok(Self { matrix })
    }

    pub fn from_pure(psi: &[Complex64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if norm <= 0.0 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let d = psi.len();
        let mut m = Array2::zeros((d, d));
        for i in 0..d {
            for j in 0..d {
                m[[i, j]] = psi[i] * psi[j].conj() / norm;
            }
        }
        Self::new(m)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let mut m = Array2::zeros((dim, dim));
        let p = Complex64::new(1.0 / dim as f64, 0.0);
        for i in 0..dim {
            m[[i, i]] = p;
        }
        Self { matrix: m }
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Array2<Complex64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let (vals, _) = hermitize(&self.matrix).eigh(UPLO::Lower)?;
        Ok(vals.to_vec())
    }
}

pub fn trace(m: &Array2<Complex64>) -> Complex64 {
    (0..m.nrows()).map(|i| m[[i, i]]).sum()
}

pub fn hermiticity_defect(m: &Array2<Complex64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    worst
}

pub fn hermitize(m: &Array2<Complex64>) -> Array2<Complex64> {
    let dag = m.t().mapv(|z| z.conj());
    (m + &dag).mapv(|z| z * 0.5)
}

/// `½ ‖a − b‖₁`, the trace distance between two states.
pub fn trace_distance(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Result<f64> {
    let diff = hermitize(&(a - b));
    let (vals, _) = diff.eigh(UPLO::Lower)?;
    Ok(0.5 * vals.iter().map(|v| v.abs()).sum::<f64>())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteadyStateMethod {
    /// Dense null space below ~1000 superoperator rows, then sparse direct,
    /// then preconditioned GMRES once the factorisation would not fit.
    Auto,
    DenseNull,
    SparseDirect,
    /// ILU(0)-preconditioned restarted GMRES on the constrained system.
    SparseIterative,
    Propagation,
}

#[derive(Debug, Clone)]
pub struct SteadyStateOptions {
    pub method: SteadyStateMethod,
    /// Residual contract: ‖L vec(ρ)‖₂ ≤ residual_factor · ‖L‖_∞.
    pub residual_factor: f64,
    /// Refinement sweeps for the sparse direct path.
    pub max_refine: usize,
    /// Time horizon for the propagation fallback, in units of 1/rate.
    pub propagation_horizon: f64,
    /// GMRES restart length for the iterative path.
    pub gmres_restart: usize,
    /// Maximum GMRES iterations across restarts.
    pub gmres_max_iter: usize,
}

impl Default for SteadyStateOptions {
    fn default() -> Self {
        Self {
            method: SteadyStateMethod::Auto,
            residual_factor: 1e-10,
            max_refine: 4,
            propagation_horizon: 1e4,
            gmres_restart: 100,
            gmres_max_iter: 6000,
        }
    }
}

#[derive(Debug)]
pub struct SteadyStateSolution {
    pub rho: DensityMatrix,
    pub residual: f64,
    pub method: SteadyStateMethod,
}

pub fn steady_state(l: &Liouvillian) -> Result<SteadyStateSolution> {
    steady_state_with(l, &SteadyStateOptions::default())
}

pub fn steady_state_with(l: &Liouvillian, opts: &SteadyStateOptions) -> Result<SteadyStateSolution> {
    let n = l.dim() * l.dim();
    let method = match opts.method {
        SteadyStateMethod::Auto => {
            if n <= 1024 {
                SteadyStateMethod::DenseNull
            } else if l.effective_unknowns() <= 30_000 {
                SteadyStateMethod::SparseDirect
            } else {
                SteadyStateMethod::SparseIterative
            }
        }
        m => m,
    };
    let tol = opts.residual_factor * l.norm_inf().max(1.0);
    let raw = match method {
        SteadyStateMethod::DenseNull => dense_null_state(l)?,
        SteadyStateMethod::SparseDirect => sparse_direct_state(l, opts)?,
        SteadyStateMethod::SparseIterative => sparse_iterative_state(l, opts)?,
        SteadyStateMethod::Propagation => propagation_state(l, opts, tol)?,
        SteadyStateMethod::Auto => unreachable!(),
    };

    // normalise and validate against the state contract
    let tr = trace(&raw);
    if tr.norm() < 1e-12 {
        return Err(Error::SteadyState("null vector is traceless".into()));
    }
    let normalized = raw.mapv(|z| z / tr);
    let rho = hermitize(&normalized);
    let residual = l.residual(&rho);
    if residual > tol {
        return Err(Error::SteadyState(format!(
            "residual {residual:.3e} above tolerance {tol:.3e}"
        )));
    }
    let rho = DensityMatrix::new(rho)?;
    Ok(SteadyStateSolution { rho, residual, method })
}

/// Kernel vector from a dense eigendecomposition of the superoperator.
/// Reports degenerate steady states instead of averaging them.
fn dense_null_state(l: &Liouvillian) -> Result<Array2<Complex64>> {
    let dense = l.superop().to_dense();
    let (vals, vecs) = dense.eig()?;
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[a].norm().partial_cmp(&vals[b].norm()).unwrap());
    let gap_tol = 1e-8 * l.norm_inf().max(1.0);
    if order.len() > 1 && vals[order[1]].norm() < gap_tol {
        return Err(Error::SteadyState(format!(
            "degenerate null space: |λ₁| = {:.3e}, |λ₂| = {:.3e}",
            vals[order[0]].norm(),
            vals[order[1]].norm()
        )));
    }
    let v: Vec<Complex64> = vecs.column(order[0]).to_vec();
    Ok(unvectorize(&v, l.dim()))
}

/// The trace-constrained linear system, reduced to the symmetric orbit
/// sector when a symmetry is registered. In reduced coordinates the unknown
/// is the common value of `vec(ρ)` on each orbit; the anchor row carries the
/// trace functional with the orbit's diagonal multiplicity.
struct ConstrainedSystem {
    matrix: CsrMatrix,
    rhs_index: usize,
}

impl Liouvillian {
    fn constrained_system(&self, anchor_position: usize) -> Result<ConstrainedSystem> {
        let dim = self.dim;
        let n = dim * dim;
        match &self.symmetry {
            None => {
                let mut triplets: Vec<(usize, usize, Complex64)> =
                    Vec::with_capacity(self.superop.nnz() + dim);
                for (r, c, v) in self.superop.triplets() {
                    if r != anchor_position {
                        triplets.push((r, c, v));
                    }
                }
                for k in 0..dim {
                    triplets.push((anchor_position, k + k * dim, Complex64::new(1.0, 0.0)));
                }
                Ok(ConstrainedSystem {
                    matrix: CsrMatrix::from_triplets(n, n, &triplets)?,
                    rhs_index: anchor_position,
                })
            }
            Some(sym) => {
                let nr = sym.reps.len();
                let anchor_orbit = sym.orbit_id[anchor_position];
                let mut is_rep = vec![usize::MAX; n];
                for (id, &r) in sym.reps.iter().enumerate() {
                    is_rep[r] = id;
                }
                let mut triplets: Vec<(usize, usize, Complex64)> =
                    Vec::with_capacity(self.superop.nnz() / sym.reps.len().max(1) * 2 + dim);
                for (r, c, v) in self.superop.triplets() {
                    let row = is_rep[r];
                    if row != usize::MAX && row != anchor_orbit {
                        triplets.push((row, sym.orbit_id[c], v));
                    }
                }
                // trace row: each orbit contributes once per diagonal member
                for k in 0..dim {
                    triplets.push((anchor_orbit, sym.orbit_id[k + k * dim], Complex64::new(1.0, 0.0)));
                }
                Ok(ConstrainedSystem {
                    matrix: CsrMatrix::from_triplets(nr, nr, &triplets)?,
                    rhs_index: anchor_orbit,
                })
            }
        }
    }

    /// Expand a solution of the (possibly reduced) constrained system back to
    /// a dense density-matrix candidate.
    fn expand_solution(&self, x: &[Complex64]) -> Array2<Complex64> {
        let n = self.dim * self.dim;
        match &self.symmetry {
            None => unvectorize(x, self.dim),
            Some(sym) => {
                let mut v = vec![Complex64::new(0.0, 0.0); n];
                for (idx, slot) in v.iter_mut().enumerate() {
                    *slot = x[sym.orbit_id[idx]];
                }
                unvectorize(&v, self.dim)
            }
        }
    }
}

/// Direct solve of the trace-constrained system: one row of L is replaced by
/// the vectorised trace functional and the right-hand side selects trace one.
fn sparse_direct_state(l: &Liouvillian, opts: &SteadyStateOptions) -> Result<Array2<Complex64>> {
    let mut last_err = None;
    for anchor in [0usize, l.dim() * l.dim() - 1] {
        match sparse_direct_attempt(l, opts, anchor) {
            Ok(rho) => return Ok(rho),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or_else(|| Error::SteadyState("sparse solve failed".into())))
}

fn sparse_direct_attempt(
    l: &Liouvillian,
    opts: &SteadyStateOptions,
    anchor_position: usize,
) -> Result<Array2<Complex64>> {
    use faer::prelude::SpSolver;
    faer_serial_once();

    let sys = l.constrained_system(anchor_position)?;
    let n = sys.matrix.nrows();
    let triplets: Vec<(usize, usize, faer::complex_native::c64)> = sys
        .matrix
        .triplets()
        .map(|(r, c, v)| (r, c, faer::complex_native::c64::new(v.re, v.im)))
        .collect();
    let a = faer::sparse::SparseColMat::<usize, faer::complex_native::c64>::try_new_from_triplets(
        n, n, &triplets,
    )
    .map_err(|e| Error::SteadyState(format!("superoperator assembly: {e:?}")))?;
    let lu = a
        .sp_lu()
        .map_err(|e| Error::SteadyState(format!("sparse LU factorisation: {e:?}")))?;

    let mut b = vec![Complex64::new(0.0, 0.0); n];
    b[sys.rhs_index] = Complex64::new(1.0, 0.0);
    let mut rhs = faer::Mat::<faer::complex_native::c64>::zeros(n, 1);
    rhs[(sys.rhs_index, 0)] = faer::complex_native::c64::new(1.0, 0.0);
    let xm = lu.solve(&rhs);
    let mut x: Vec<Complex64> = (0..n).map(|i| Complex64::new(xm[(i, 0)].re, xm[(i, 0)].im)).collect();

    // iterative refinement against the constrained system
    for _ in 0..opts.max_refine {
        let mut r = sys.matrix.matvec(&x);
        for (ri, bi) in r.iter_mut().zip(b.iter()) {
            *ri -= bi;
        }
        let rnorm: f64 = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if rnorm < 1e-13 * (n as f64).sqrt() {
            break;
        }
        let mut rm = faer::Mat::<faer::complex_native::c64>::zeros(n, 1);
        for (i, z) in r.iter().enumerate() {
            rm[(i, 0)] = faer::complex_native::c64::new(z.re, z.im);
        }
        let dxm = lu.solve(&rm);
        for (i, xi) in x.iter_mut().enumerate() {
            *xi -= Complex64::new(dxm[(i, 0)].re, dxm[(i, 0)].im);
        }
    }

    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::SteadyState("singular constrained system".into()));
    }
    Ok(l.expand_solution(&x))
}

/// ILU(0)-preconditioned restarted GMRES; the path that scales past the
/// direct factorisation, at a relaxed residual target.
fn sparse_iterative_state(l: &Liouvillian, opts: &SteadyStateOptions) -> Result<Array2<Complex64>> {
    let sys = l.constrained_system(0)?;
    let n = sys.matrix.nrows();
    let mut b = vec![Complex64::new(0.0, 0.0); n];
    b[sys.rhs_index] = Complex64::new(1.0, 0.0);

    let precond = Ilu0::factor(&sys.matrix)?;
    // start from the maximally mixed candidate: constant on diagonal slots
    let mut x0 = vec![Complex64::new(0.0, 0.0); n];
    {
        let dim = l.dim();
        let val = Complex64::new(1.0 / dim as f64, 0.0);
        match &l.symmetry {
            None => {
                for k in 0..dim {
                    x0[k + k * dim] = val;
                }
            }
            Some(sym) => {
                for k in 0..dim {
                    x0[sym.orbit_id[k + k * dim]] = val;
                }
            }
        }
    }
    let rel_target = (opts.residual_factor * 1e-2).clamp(1e-14, 1e-10);
    let (x, prec_res, iters) =
        gmres(&sys.matrix, &precond, &b, x0, opts.gmres_restart, opts.gmres_max_iter, rel_target);
    if !prec_res.is_finite() {
        return Err(Error::SteadyState("GMRES diverged".into()));
    }
    if iters >= opts.gmres_max_iter && prec_res > rel_target {
        // the caller's residual contract still decides; keep going only if
        // the candidate already looks plausible
        let rho = l.expand_solution(&x);
        let tr = trace(&rho);
        if tr.norm() < 1e-12 {
            return Err(Error::NonConvergence(format!(
                "GMRES stalled at preconditioned residual {prec_res:.3e} after {iters} iterations"
            )));
        }
        return Ok(rho);
    }
    Ok(l.expand_solution(&x))
}

/// Zero-fill incomplete LU factorisation on the sparsity pattern of `a`,
/// stored as a single combined matrix (unit lower / upper split on the
/// diagonal).
struct Ilu0 {
    factors: CsrMatrix,
    diag_ptr: Vec<usize>,
}

impl Ilu0 {
    fn factor(a: &CsrMatrix) -> Result<Ilu0> {
        let n = a.nrows();
        let mut factors = a.clone();
        // mutable access through raw parts
        let (indptr, indices, data) = factors.raw_parts_mut();
        let mut diag_ptr = vec![usize::MAX; n];
        for i in 0..n {
            // position of the diagonal in row i
            for k in indptr[i]..indptr[i + 1] {
                if indices[k] == i {
                    diag_ptr[i] = k;
                    break;
                }
            }
            if diag_ptr[i] == usize::MAX {
                return Err(Error::SteadyState(format!("ILU(0): empty diagonal at row {i}")));
            }
        }
        // IKJ variant restricted to the existing pattern
        let mut colmap = vec![usize::MAX; n];
        for i in 0..n {
            let (lo, hi) = (indptr[i], indptr[i + 1]);
            for k in lo..hi {
                colmap[indices[k]] = k;
            }
            for kk in lo..hi {
                let k = indices[kk];
                if k >= i {
                    break;
                }
                let pivot = data[diag_ptr[k]];
                if pivot.norm() < 1e-300 {
                    return Err(Error::SteadyState(format!("ILU(0): zero pivot at row {k}")));
                }
                let lik = data[kk] / pivot;
                data[kk] = lik;
                for jj in (diag_ptr[k] + 1)..indptr[k + 1] {
                    let j = indices[jj];
                    let slot = colmap[j];
                    if slot != usize::MAX {
                        data[slot] -= lik * data[jj];
                    }
                }
            }
            for k in lo..hi {
                colmap[indices[k]] = usize::MAX;
            }
        }
        Ok(Ilu0 { factors, diag_ptr })
    }

    /// Solve `LU z = r`.
    fn apply(&self, r: &[Complex64]) -> Vec<Complex64> {
        let n = self.factors.nrows();
        let mut z = r.to_vec();
        // forward: unit lower triangle
        for i in 0..n {
            let (cols, vals) = self.factors.row(i);
            let mut acc = z[i];
            for (&c, &v) in cols.iter().zip(vals.iter()) {
                if c >= i {
                    break;
                }
                acc -= v * z[c];
            }
            z[i] = acc;
        }
        // backward: upper triangle including diagonal
        for i in (0..n).rev() {
            let (cols, vals) = self.factors.row(i);
            let mut acc = z[i];
            let dpos = self.diag_ptr[i] - self.factors.row_start(i);
            for (&c, &v) in cols.iter().zip(vals.iter()).skip(dpos + 1) {
                acc -= v * z[c];
            }
            z[i] = acc / vals[dpos];
        }
        z
    }
}

/// Left-preconditioned restarted GMRES. Returns the solution, the final
/// preconditioned relative residual, and the iteration count.
fn gmres(
    a: &CsrMatrix,
    precond: &Ilu0,
    b: &[Complex64],
    x0: Vec<Complex64>,
    restart: usize,
    max_iter: usize,
    rel_tol: f64,
) -> (Vec<Complex64>, f64, usize) {
    let n = b.len();
    let mut x = x0;
    let mb = precond.apply(b);
    let b_norm: f64 = mb.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1e-300);
    let mut total_iters = 0usize;
    let mut final_rel = f64::INFINITY;

    'outer: while total_iters < max_iter {
        // r = M⁻¹(b − A x)
        let ax = a.matvec(&x);
        let mut r = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            r[i] = b[i] - ax[i];
        }
        let mut r = precond.apply(&r);
        let beta: f64 = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        final_rel = beta / b_norm;
        if final_rel <= rel_tol {
            break;
        }
        for ri in r.iter_mut() {
            *ri /= Complex64::new(beta, 0.0);
        }
        let m = restart.min(max_iter - total_iters);
        let mut basis: Vec<Vec<Complex64>> = vec![r];
        let mut h = vec![vec![Complex64::new(0.0, 0.0); m]; m + 1];
        let mut cs = vec![Complex64::new(0.0, 0.0); m];
        let mut sn = vec![Complex64::new(0.0, 0.0); m];
        let mut g = vec![Complex64::new(0.0, 0.0); m + 1];
        g[0] = Complex64::new(beta, 0.0);
        let mut k_used = 0usize;

        for k in 0..m {
            total_iters += 1;
            let mut w = precond.apply(&a.matvec(&basis[k]));
            // modified Gram-Schmidt
            for (j, base) in basis.iter().enumerate() {
                let hjk: Complex64 = base.iter().zip(w.iter()).map(|(p, q)| p.conj() * q).sum();
                h[j][k] = hjk;
                for (wi, pi) in w.iter_mut().zip(base.iter()) {
                    *wi -= hjk * pi;
                }
            }
            let wnorm: f64 = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            h[k + 1][k] = Complex64::new(wnorm, 0.0);
            // apply the accumulated Givens rotations
            for j in 0..k {
                let tmp = cs[j].conj() * h[j][k] + sn[j].conj() * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = tmp;
            }
            let (c, s) = givens(h[k][k], h[k + 1][k]);
            cs[k] = c;
            sn[k] = s;
            h[k][k] = c.conj() * h[k][k] + s.conj() * h[k + 1][k];
            h[k + 1][k] = Complex64::new(0.0, 0.0);
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k].conj() * g[k];
            k_used = k + 1;
            let rel = g[k + 1].norm() / b_norm;
            if rel <= rel_tol || wnorm < 1e-300 {
                break;
            }
            for wi in w.iter_mut() {
                *wi /= Complex64::new(wnorm, 0.0);
            }
            basis.push(w);
        }

        // back substitution for the small triangular system
        let mut y = vec![Complex64::new(0.0, 0.0); k_used];
        for i in (0..k_used).rev() {
            let mut acc = g[i];
            for j in (i + 1)..k_used {
                acc -= h[i][j] * y[j];
            }
            y[i] = acc / h[i][i];
        }
        for (j, base) in basis.iter().take(k_used).enumerate() {
            for (xi, pi) in x.iter_mut().zip(base.iter()) {
                *xi += y[j] * pi;
            }
        }
        if total_iters >= max_iter {
            break 'outer;
        }
    }
    // final preconditioned residual
    let ax = a.matvec(&x);
    let mut r = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        r[i] = b[i] - ax[i];
    }
    let r = precond.apply(&r);
    let rel = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() / b_norm;
    (x, rel.min(final_rel), total_iters)
}

fn givens(a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    }
    let t = (na * na + nb * nb).sqrt();
    if na == 0.0 {
        return (Complex64::new(0.0, 0.0), b.conj() / nb);
    }
    let c = Complex64::new(na / t, 0.0);
    let s = (a / na) * (b.conj() / t);
    (c, s)
}

fn faer_serial_once() {
    use std::sync::Once;
    static ONCE: Once = Once::new();
    // deterministic factorisation regardless of the ambient thread pool
    ONCE.call_once(|| faer::set_global_parallelism(faer::Parallelism::None));
}

fn propagation_state(
    l: &Liouvillian,
    opts: &SteadyStateOptions,
    tol: f64,
) -> Result<Array2<Complex64>> {
    let dt = 0.1 / l.norm_inf().max(1e-12);
    let mut rho = DensityMatrix::maximally_mixed(l.dim());
    let chunk = (200.0 * dt).max(1.0);
    let mut elapsed = 0.0;
    while elapsed < opts.propagation_horizon {
        rho = propagate(&rho, l, chunk, dt)?;
        elapsed += chunk;
        if l.residual(rho.matrix()) <= 0.5 * tol {
            return Ok(rho.into_matrix());
        }
    }
    Err(Error::NonConvergence(format!(
        "propagation did not reach the steady state within t = {:.1}",
        opts.propagation_horizon
    )))
}

/// Fourth-order Runge–Kutta integration of `ρ̇ = L(ρ)`.
///
/// The step must satisfy `dt ≤ 0.1/‖L‖_∞` (stability heuristic, enforced).
/// Trace and Hermiticity drift beyond 1e-8 over the run abort the
/// integration.
pub fn propagate(rho0: &DensityMatrix, l: &Liouvillian, t: f64, dt: f64) -> Result<DensityMatrix> {
    if !(t >= 0.0) || !(dt > 0.0) {
        return Err(Error::InvalidParams("propagation needs t ≥ 0 and dt > 0".into()));
    }
    let dt_max = 0.1 / l.norm_inf().max(1e-300);
    if dt > dt_max * (1.0 + 1e-9) {
        return Err(Error::InvalidParams(format!(
            "dt = {dt:.3e} exceeds the stability bound 0.1/‖L‖ = {dt_max:.3e}"
        )));
    }
    let mut rho = rho0.matrix().clone();
    let tr0 = trace(&rho);
    let herm0 = hermiticity_defect(&rho);

    let mut remaining = t;
    while remaining > 0.0 {
        let h = dt.min(remaining);
        let k1 = l.apply(&rho);
        let k2 = l.apply(&(&rho + &k1.mapv(|z| z * Complex64::new(0.5 * h, 0.0))));
        let k3 = l.apply(&(&rho + &k2.mapv(|z| z * Complex64::new(0.5 * h, 0.0))));
        let k4 = l.apply(&(&rho + &k3.mapv(|z| z * Complex64::new(h, 0.0))));
        let sixth = Complex64::new(h / 6.0, 0.0);
        rho = &rho
            + &(&(&k1 + &k4) + &(&k2 + &k3).mapv(|z| z * Complex64::new(2.0, 0.0)))
                .mapv(|z| z * sixth);
        remaining -= h;
    }

    let drift = (trace(&rho) - tr0).norm();
    if drift > 1e-8 {
        return Err(Error::Instability(format!("trace drift {drift:.3e} over the run")));
    }
    let herm_drift = hermiticity_defect(&rho) - herm0;
    if herm_drift > 1e-8 {
        return Err(Error::Instability(format!("Hermiticity drift {herm_drift:.3e}")));
    }
    // the integrator output satisfies the state contract up to drift already
    DensityMatrix::new(hermitize(&rho).mapv(|z| z / trace(&rho)))
}

/// Full dense spectrum of the superoperator, sorted by modulus. Only for
/// desk-scale instances.
pub fn liouvillian_spectrum(l: &Liouvillian) -> Result<Vec<Complex64>> {
    let dense = l.superop().to_dense();
    let (vals, _) = dense.eig()?;
    let mut v = vals.to_vec();
    v.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap());
    Ok(v)
}

/// Gibbs state `e^{−βH}/Z` of a diagonal energy vector (classical oracle
/// helper for equal-temperature checks).
pub fn gibbs_diagonal(energies: &[f64], beta: f64) -> Array1<f64> {
    let emin = energies.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut w: Array1<f64> = energies.iter().map(|&e| (-beta * (e - emin)).exp()).collect();
    let z: f64 = w.sum();
    w.mapv_inplace(|x| x / z);
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clockops::ClockParams;
    use crate::model::{build_hamiltonian, CcmParams, Variant};
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn setup(
        m: usize,
        f: f64,
        phi: f64,
        beta_e: f64,
        beta_o: f64,
    ) -> (CcmParams, HamiltonianSplit, BathConfig, Vec<Transition>, Liouvillian) {
        let clock = ClockParams::new(3, m).unwrap();
        let params = CcmParams::staggered(clock, f, phi, Variant::Standard).unwrap();
        let h = build_hamiltonian(&params).unwrap();
        let baths = BathConfig::staggered(beta_e, beta_o, 0.2, m).unwrap();
        let transitions = enumerate_transitions(&h, &params, &baths).unwrap();
        let l = build_liouvillian(&h, &transitions).unwrap();
        (params, h, baths, transitions, l)
    }

    #[test]
    fn rate_zero_gap_limit() {
        assert_abs_diff_eq!(bath_rate(0.0, 1.0, 0.2), 0.2, epsilon = 1e-15);
        // tiny gaps approach the same limit smoothly
        assert_abs_diff_eq!(bath_rate(1e-14, 1.0, 0.2), 0.2, epsilon = 1e-10);
        assert_abs_diff_eq!(bath_rate(-1e-14, 1.0, 0.2), 0.2, epsilon = 1e-10);
    }

    #[test]
    fn rate_detailed_balance_ratio() {
        let (delta, beta) = (2.0, 1.0);
        let ratio = bath_rate(delta, beta, 0.2) / bath_rate(-delta, beta, 0.2);
        assert_abs_diff_eq!(ratio, (beta * delta).exp(), epsilon = 1e-12);
    }

    #[test]
    fn rate_downhill_value() {
        // g Δ / (1 − e^{−βΔ}) at Δ = 1, β = 1, g = 0.2
        let expect = 0.2 / (-(-1.0f64).exp_m1());
        assert_abs_diff_eq!(bath_rate(1.0, 1.0, 0.2), expect, epsilon = 1e-15);
        // cross-check through the detailed-balance ratio with the uphill value
        assert_abs_diff_eq!(bath_rate(-1.0, 1.0, 0.2) * 1.0f64.exp(), expect, epsilon = 1e-12);
    }

    #[test]
    fn transition_counts() {
        let (_, _, _, t2, _) = setup(2, 0.5, PI / 2.0, 1.0, 1.1);
        assert_eq!(t2.len(), 36);
        let (_, _, _, t4, _) = setup(4, 0.5, PI / 2.0, 1.0, 1.1);
        assert_eq!(t4.len(), 648);
    }

    #[test]
    fn every_transition_has_exact_reverse_partner() {
        let (params, h, baths, transitions, _) = setup(2, 0.37, 0.9, 1.0, 1.3);
        let energies = h.diagonal_energies().unwrap();
        let _ = params;
        for t in &transitions {
            let rev = transitions
                .iter()
                .find(|r| r.site == t.site && r.source == t.target && r.target == t.source)
                .expect("reverse partner");
            let lhs = t.rate / rev.rate;
            let rhs = (baths.beta(t.site) * (energies[t.source] - energies[t.target])).exp();
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12 * rhs.abs().max(1.0));
        }
    }

    #[test]
    fn column_stacking_convention() {
        // vec(AρB) = (Bᵀ ⊗ A) vec(ρ)
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut rand_mat = |d: usize| {
            Array2::from_shape_fn((d, d), |_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        };
        let (a, b, rho) = (rand_mat(3), rand_mat(3), rand_mat(3));
        let lhs = vectorize(&a.dot(&rho).dot(&b));
        let sup = CsrMatrix::from_dense(&b.t().to_owned(), 0.0).kron(&CsrMatrix::from_dense(&a, 0.0));
        let rhs = sup.matvec(&vectorize(&rho));
        for (x, y) in lhs.iter().zip(rhs.iter()) {
            assert!((x - y).norm() < 1e-13);
        }
    }

    #[test]
    fn superoperator_preserves_trace() {
        let (_, _, _, _, l) = setup(2, 0.45, PI / 2.0, 1.0, 1.1);
        let n = l.dim() * l.dim();
        let mut tr_vec = vec![c(0.0, 0.0); n];
        for k in 0..l.dim() {
            tr_vec[k + k * l.dim()] = c(1.0, 0.0);
        }
        let y = l.superop().transpose().matvec(&tr_vec);
        let worst = y.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(worst < 1e-10, "1ᵀ L = {worst:.3e}");
    }

    #[test]
    fn superoperator_matches_dense_apply() {
        let (_, _, _, _, l) = setup(2, 0.3, 1.1, 1.0, 1.4);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rho = Array2::from_shape_fn((9, 9), |_| {
            c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let via_super = unvectorize(&l.superop().matvec(&vectorize(&rho)), 9);
        let via_apply = l.apply(&rho);
        let worst = (&via_super - &via_apply).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(worst < 1e-12);
    }

    #[test]
    fn zero_rate_spectrum_is_commutator_spectrum() {
        // with all rates removed the superoperator spectrum is {i(E_a − E_b)}
        let clock = ClockParams::new(3, 2).unwrap();
        let params = CcmParams::staggered(clock, 0.6, PI / 2.0, Variant::Standard).unwrap();
        let h = build_hamiltonian(&params).unwrap();
        let l = build_liouvillian(&h, &[]).unwrap();
        let (evals, _) = h.total.matrix.to_dense().eigh(UPLO::Lower).unwrap();
        let mut expected: Vec<Complex64> = Vec::new();
        for &ea in evals.iter() {
            for &eb in evals.iter() {
                expected.push(c(0.0, eb - ea));
            }
        }
        let mut got = liouvillian_spectrum(&l).unwrap();
        // greedy matching between the two multisets
        for e in expected {
            let (k, dist) = got
                .iter()
                .enumerate()
                .map(|(k, z)| (k, (z - e).norm()))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            assert!(dist < 1e-8, "unmatched commutator eigenvalue {e}");
            got.swap_remove(k);
        }
    }

    #[test]
    fn classical_block_matches_rate_matrix_at_f_zero() {
        let (_, _, _, transitions, l) = setup(2, 0.0, PI / 2.0, 1.0, 1.1);
        let d = l.dim();
        // independent classical generator from the transition list
        let mut q = Array2::<f64>::zeros((d, d));
        for t in &transitions {
            q[[t.target, t.source]] += t.rate;
            q[[t.source, t.source]] -= t.rate;
        }
        for a in 0..d {
            for b in 0..d {
                let got = l.superop().get(a + a * d, b + b * d);
                assert_abs_diff_eq!(got.re, q[[a, b]], epsilon = 1e-12);
                assert_abs_diff_eq!(got.im, 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn equal_temperature_classical_limit_is_gibbs() {
        // f = 0, homogeneous phases, equal baths: the steady state is the
        // Gibbs distribution of the diagonal energies
        let clock = ClockParams::new(3, 2).unwrap();
        let params = CcmParams::homogeneous(clock, 0.0, 0.0, Variant::Standard).unwrap();
        let h = build_hamiltonian(&params).unwrap();
        let baths = BathConfig::uniform(0.8, 0.2, 2).unwrap();
        let transitions = enumerate_transitions(&h, &params, &baths).unwrap();
        let l = build_liouvillian(&h, &transitions).unwrap();
        let sol = steady_state(&l).unwrap();
        let gibbs = gibbs_diagonal(&h.diagonal_energies().unwrap(), 0.8);
        for i in 0..l.dim() {
            assert_abs_diff_eq!(sol.rho.matrix()[[i, i]].re, gibbs[i], epsilon = 1e-8);
            for j in 0..l.dim() {
                if i != j {
                    assert!(sol.rho.matrix()[[i, j]].norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn dense_and_sparse_paths_agree() {
        let (_, _, _, _, l) = setup(2, 0.5, PI / 2.0, 1.0, 1.1);
        let dense = steady_state_with(
            &l,
            &SteadyStateOptions { method: SteadyStateMethod::DenseNull, ..Default::default() },
        )
        .unwrap();
        let sparse = steady_state_with(
            &l,
            &SteadyStateOptions { method: SteadyStateMethod::SparseDirect, ..Default::default() },
        )
        .unwrap();
        let dist = trace_distance(dense.rho.matrix(), sparse.rho.matrix()).unwrap();
        assert!(dist < 1e-10, "methods disagree by {dist:.3e}");
    }

    #[test]
    fn steady_state_residual_contract() {
        let (_, _, _, _, l) = setup(2, 0.45, PI / 2.0, 1.0, 1.1);
        let sol = steady_state(&l).unwrap();
        assert!(sol.residual <= 1e-10 * l.norm_inf().max(1.0));
    }

    #[test]
    fn uniqueness_gap_at_desk_scale() {
        for m in [2usize, 3] {
            let (_, _, _, _, l) = setup(m, 0.5, PI / 2.0, 1.0, 1.1);
            let spec = liouvillian_spectrum(&l).unwrap();
            assert!(spec[0].norm() < 1e-10);
            assert!(spec[1].norm() > 1e-8, "second eigenvalue {:.3e} at M={m}", spec[1].norm());
        }
    }

    #[test]
    fn propagate_identity_generator_is_constant() {
        let clock = ClockParams::new(3, 2).unwrap();
        let params = CcmParams::homogeneous(clock, 0.0, 0.0, Variant::Standard).unwrap();
        // zero Hamiltonian (f=0 has only diagonal; scale it away) and no jumps
        let h = build_hamiltonian(&params.with_f(1.0).unwrap()).unwrap();
        let mut h_zero = h.clone();
        h_zero.total.matrix = CsrMatrix::zeros(9, 9);
        let l = build_liouvillian(&h_zero, &[]).unwrap();
        let rho0 = DensityMatrix::maximally_mixed(9);
        let out = propagate(&rho0, &l, 5.0, 0.5).unwrap();
        let dist = trace_distance(rho0.matrix(), out.matrix()).unwrap();
        assert!(dist < 1e-14);
    }

    #[test]
    fn propagate_keeps_eigenprojector_stationary_without_rates() {
        let clock = ClockParams::new(3, 2).unwrap();
        let params = CcmParams::staggered(clock, 0.7, PI / 2.0, Variant::Standard).unwrap();
        let h = build_hamiltonian(&params).unwrap();
        let l = build_liouvillian(&h, &[]).unwrap();
        let (_, vecs) = h.total.matrix.to_dense().eigh(UPLO::Lower).unwrap();
        let psi: Vec<Complex64> = vecs.column(0).to_vec();
        let rho0 = DensityMatrix::from_pure(&psi).unwrap();
        let dt = 0.05 / l.norm_inf();
        let out = propagate(&rho0, &l, 3.0, dt).unwrap();
        let dist = trace_distance(rho0.matrix(), out.matrix()).unwrap();
        assert!(dist < 1e-9, "eigenprojector moved by {dist:.3e}");
    }

    #[test]
    fn propagation_reaches_null_space_state() {
        let (_, _, _, _, l) = setup(2, 0.5, 0.9, 1.0, 1.1);
        let exact = steady_state(&l).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let g = Array2::from_shape_fn((9, 9), |_| {
            c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let gg = g.dot(&g.t().mapv(|z| z.conj()));
        let rho0 = DensityMatrix::new(gg.mapv(|z| z / trace(&gg))).unwrap();
        let dt = 0.1 / l.norm_inf();
        let out = propagate(&rho0, &l, 200.0 / 0.2, dt).unwrap();
        let dist = trace_distance(exact.rho.matrix(), out.matrix()).unwrap();
        assert!(dist < 1e-6, "propagation endpoint off by {dist:.3e}");
    }

    #[test]
    fn propagate_rejects_oversized_step() {
        let (_, _, _, _, l) = setup(2, 0.5, 0.9, 1.0, 1.1);
        let rho0 = DensityMatrix::maximally_mixed(9);
        assert!(propagate(&rho0, &l, 1.0, 10.0 / l.norm_inf()).is_err());
    }

    #[test]
    fn density_matrix_validation() {
        let ok = DensityMatrix::maximally_mixed(3);
        assert_eq!(ok.dim(), 3);
        // non-unit trace
        let bad = Array2::from_diag(&array![c(0.7, 0.0), c(0.2, 0.0), c(0.2, 0.0)]);
        assert!(DensityMatrix::new(bad).is_err());
        // non-Hermitian
        let mut nh = Array2::zeros((2, 2));
        nh[[0, 0]] = c(1.0, 0.0);
        nh[[0, 1]] = c(0.5, 0.0);
        assert!(DensityMatrix::new(nh).is_err());
        // negative eigenvalue
        let neg = Array2::from_diag(&array![c(1.5, 0.0), c(-0.5, 0.0)]);
        assert!(DensityMatrix::new(neg).is_err());
    }
}
