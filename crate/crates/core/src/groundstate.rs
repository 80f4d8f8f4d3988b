//! Ground-state and low-excitation analysis: sparse eigensolves in the
//! charge sector, order-parameter moments, Binder cumulants, gap scaling,
//! and ground-state tunneling currents of the rotated chain.
//!
//! The iterative path is Lanczos with full reorthogonalisation; dense
//! diagonalisation takes over below ~1000 states and wherever degeneracy
//! counting matters. For the rotated chain the solver works inside the
//! zero-charge sector whenever a projector is supplied, which is a factor
//! N_s in dimension and keeps the sub-critical ground state unique.

use ndarray::Array2;
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::clockops::{build_mu, build_sigma, embed_local, ClockParams, ManyBodyOperator};
use crate::error::{Error, Result};
use crate::model::{build_hamiltonian, build_symmetry_projector, CcmParams, SectorProjector, Variant};
use crate::observables::tunneling_current_operator;
use crate::sparse::CsrMatrix;

/// Residual contract per eigenpair.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-10;

/// Adjacent levels closer than this are reported as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Dense diagonalisation handles dimensions up to this.
const DENSE_DIM_LIMIT: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sector {
    Full,
    Symmetric,
}

/// Lowest eigenpairs in ascending order. States live in the full space even
/// when the solve ran inside the symmetry sector.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub energies: Vec<f64>,
    pub states: Vec<Vec<Complex64>>,
    pub sector: Sector,
    /// Indices i where `energies[i+1] − energies[i] < DEGENERACY_TOL`.
    pub degeneracies: Vec<usize>,
}

impl SpectrumResult {
    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }

    pub fn ground_state(&self) -> &[Complex64] {
        &self.states[0]
    }

    pub fn gap(&self) -> Option<f64> {
        (self.energies.len() >= 2).then(|| self.energies[1] - self.energies[0])
    }
}

/// `k` lowest eigenpairs of a Hermitian operator, optionally restricted to
/// the symmetry sector (the returned states are lifted back to full space).
pub fn lowest_eigenpairs(
    op: &ManyBodyOperator,
    k: usize,
    sector: Option<&SectorProjector>,
) -> Result<SpectrumResult> {
    if k == 0 {
        return Err(Error::InvalidParams("need at least one eigenpair".into()));
    }
    if op.hermitian == Some(false) {
        return Err(Error::InvalidParams("eigensolver expects a Hermitian operator".into()));
    }
    let (matrix, label) = match sector {
        Some(p) => {
            if p.full_dim() != op.dim() {
                return Err(Error::DimensionMismatch("projector built for another chain".into()));
            }
            (p.project_operator(&op.matrix), Sector::Symmetric)
        }
        None => (op.matrix.clone(), Sector::Full),
    };
    let dim = matrix.nrows();
    if k > dim {
        return Err(Error::InvalidParams(format!("asked for {k} pairs in dimension {dim}")));
    }

    let (energies, vectors) = if dim <= DENSE_DIM_LIMIT {
        dense_lowest(&matrix, k)?
    } else {
        lanczos_lowest(&matrix, k)?
    };

    // explicit residual verification
    for (e, v) in energies.iter().zip(vectors.iter()) {
        let hv = matrix.matvec(v);
        let res: f64 = hv
            .iter()
            .zip(v.iter())
            .map(|(h, x)| (h - x * Complex64::new(*e, 0.0)).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if res > EIGEN_RESIDUAL_TOL * matrix.norm_inf().max(1.0) {
            return Err(Error::NonConvergence(format!(
                "eigenpair residual {res:.3e} at energy {e:.6}"
            )));
        }
    }

    let states = match sector {
        Some(p) => vectors.iter().map(|v| p.lift_vector(v)).collect(),
        None => vectors,
    };
    let degeneracies = energies
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1] - w[0] < DEGENERACY_TOL)
        .map(|(i, _)| i)
        .collect();
    Ok(SpectrumResult { energies, states, sector: label, degeneracies })
}

fn dense_lowest(matrix: &CsrMatrix, k: usize) -> Result<(Vec<f64>, Vec<Vec<Complex64>>)> {
    let dense = matrix.to_dense();
    let (vals, vecs) = crate::linalg::eigh_cols(&dense)?;
    let energies: Vec<f64> = vals.iter().take(k).cloned().collect();
    let vectors: Vec<Vec<Complex64>> = (0..k).map(|i| vecs.column(i).to_vec()).collect();
    Ok((energies, vectors))
}

/// Lanczos with full reorthogonalisation (two Gram-Schmidt passes per step).
fn lanczos_lowest(matrix: &CsrMatrix, k: usize) -> Result<(Vec<f64>, Vec<Vec<Complex64>>)> {
    let dim = matrix.nrows();
    let scale = matrix.norm_inf().max(1.0);
    let max_iter = if dim > 100_000 { 240 } else { 420.min(dim) };
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1234_abcd_0042);

    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();

    let mut v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    normalize(&mut v);
    basis.push(v);

    let mut converged: Option<(Vec<f64>, Vec<Vec<f64>>)> = None;
    for j in 0..max_iter {
        let vj = basis[j].clone();
        let mut w = matrix.matvec(&vj);
        if j > 0 {
            let beta = betas[j - 1];
            let prev = &basis[j - 1];
            for (wi, pi) in w.iter_mut().zip(prev.iter()) {
                *wi -= pi * Complex64::new(beta, 0.0);
            }
        }
        let alpha = dot(&vj, &w).re;
        for (wi, vi) in w.iter_mut().zip(vj.iter()) {
            *wi -= vi * Complex64::new(alpha, 0.0);
        }
        alphas.push(alpha);
        // full reorthogonalisation, two passes
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                if c.norm() > 0.0 {
                    for (wi, bi) in w.iter_mut().zip(b.iter()) {
                        *wi -= bi * c;
                    }
                }
            }
        }
        let beta = norm(&w);

        // assess convergence of the k lowest Ritz pairs
        let m = alphas.len();
        if m >= k && (m % 5 == 0 || beta < 1e-13 * scale || j + 1 == max_iter) {
            let (theta, s) = tridiag_eigh(&alphas, &betas)?;
            let all_tight = (0..k).all(|i| {
                let bound = beta * s[i][m - 1].abs();
                bound <= 0.5 * EIGEN_RESIDUAL_TOL * scale
            });
            if all_tight || beta < 1e-13 * scale {
                converged = Some((theta, s));
                break;
            }
        }

        if beta < 1e-13 * scale {
            // invariant subspace without convergence: restart direction
            let mut fresh: Vec<Complex64> = (0..dim)
                .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(b, &fresh);
                    for (fi, bi) in fresh.iter_mut().zip(b.iter()) {
                        *fi -= bi * c;
                    }
                }
            }
            let n = norm(&fresh);
            if n < 1e-12 {
                break; // space exhausted
            }
            for f in fresh.iter_mut() {
                *f /= Complex64::new(n, 0.0);
            }
            betas.push(0.0);
            basis.push(fresh);
            continue;
        }

        betas.push(beta);
        let mut next = w;
        for x in next.iter_mut() {
            *x /= Complex64::new(beta, 0.0);
        }
        basis.push(next);
    }

    let (theta, s) = match converged {
        Some(ts) => ts,
        None => {
            let (theta, s) = tridiag_eigh(&alphas, &betas)?;
            (theta, s)
        }
    };
    if theta.len() < k {
        return Err(Error::NonConvergence("Krylov space too small".into()));
    }

    let m = alphas.len();
    let mut energies = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(k);
    for i in 0..k {
        energies.push(theta[i]);
        let mut x = vec![Complex64::new(0.0, 0.0); dim];
        for (b, &coeff) in basis.iter().take(m).zip(s[i].iter()) {
            if coeff != 0.0 {
                for (xi, bi) in x.iter_mut().zip(b.iter()) {
                    *xi += bi * Complex64::new(coeff, 0.0);
                }
            }
        }
        normalize(&mut x);
        vectors.push(x);
    }
    Ok((energies, vectors))
}

/// Eigen-decomposition of the symmetric tridiagonal (α, β) matrix; returns
/// values ascending with their eigenvectors as rows.
fn tridiag_eigh(alphas: &[f64], betas: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let m = alphas.len();
    let mut t = Array2::<f64>::zeros((m, m));
    for (i, &a) in alphas.iter().enumerate() {
        t[[i, i]] = a;
    }
    for (i, &b) in betas.iter().take(m.saturating_sub(1)).enumerate() {
        t[[i, i + 1]] = b;
        t[[i + 1, i]] = b;
    }
    let (vals, vecs) = t.eigh(UPLO::Lower)?;
    let values: Vec<f64> = vals.to_vec();
    let vectors: Vec<Vec<f64>> = (0..m).map(|i| vecs.column(i).to_vec()).collect();
    Ok((values, vectors))
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(v: &mut [Complex64]) {
    let n = norm(v);
    for x in v.iter_mut() {
        *x /= Complex64::new(n, 0.0);
    }
}

/// The order parameter of the chain, in the operator frame matching the
/// variant: the standard chain uses the diagonal `Σ_j (μ_j + μ_j†)/M`, the
/// rotated chain the relabelled `Σ_j (σ_j + σ_j†)/M`, which is the image of
/// the same observable under the σ ↔ μ swap and the one that carries charge
/// under the conserved symmetry.
pub fn order_parameter(params: &CcmParams) -> Result<ManyBodyOperator> {
    let clock = &params.clock;
    let local = match params.variant {
        Variant::Standard => build_mu(clock.n_states())?,
        Variant::Rotated => build_sigma(clock.n_states())?,
    };
    let one = Complex64::new(1.0, 0.0);
    let mut acc = CsrMatrix::zeros(clock.dim(), clock.dim());
    for site in 0..clock.rotors() {
        let emb = embed_local(&local, site, clock)?;
        acc = acc.add_scaled(&emb.matrix, one)?;
        acc = acc.add_scaled(&emb.matrix.dagger(), one)?;
    }
    let matrix = acc.scaled(Complex64::new(1.0 / clock.rotors() as f64, 0.0));
    Ok(ManyBodyOperator { matrix, hermitian: Some(true) })
}

/// ⟨m⟩ on a normalized state.
pub fn order_parameter_mean(state: &[Complex64], params: &CcmParams) -> Result<f64> {
    let m = order_parameter(params)?;
    let z = m.expectation_state(state);
    Ok(z.re)
}

/// (⟨m²⟩, ⟨m⁴⟩) on a normalized state.
pub fn order_parameter_moments(state: &[Complex64], params: &CcmParams) -> Result<(f64, f64)> {
    let m = order_parameter(params)?;
    let mv = m.matrix.matvec(state);
    let m2: f64 = mv.iter().map(|z| z.norm_sqr()).sum();
    let m2v = m.matrix.matvec(&mv);
    let m4: f64 = m2v.iter().map(|z| z.norm_sqr()).sum();
    Ok((m2, m4))
}

/// `B = (3 − ⟨m⁴⟩/⟨m²⟩²)/2`.
pub fn binder_cumulant(m2: f64, m4: f64) -> Result<f64> {
    if m2 <= 0.0 {
        return Err(Error::InvalidParams("⟨m²⟩ must be positive".into()));
    }
    Ok(0.5 * (3.0 - m4 / (m2 * m2)))
}

/// One Binder-cumulant data point.
#[derive(Debug, Clone, PartialEq)]
pub struct BinderPoint {
    pub f: f64,
    pub rotors: usize,
    pub m2: f64,
    pub m4: f64,
    pub binder: f64,
}

/// Ground state of the configured chain; the rotated variant is solved in
/// the zero-charge sector (where it is unique for every f), the standard one
/// in the full space.
pub fn ground_state(params: &CcmParams) -> Result<SpectrumResult> {
    let h = build_hamiltonian(params)?;
    match params.variant {
        Variant::Rotated => {
            let proj = build_symmetry_projector(params)?;
            lowest_eigenpairs(&h.total, 1, Some(&proj))
        }
        Variant::Standard => lowest_eigenpairs(&h.total, 1, None),
    }
}

/// Binder cumulant of the sector ground state at one control-parameter value.
pub fn binder_point(params: &CcmParams) -> Result<BinderPoint> {
    let spec = ground_state(params)?;
    let (m2, m4) = order_parameter_moments(spec.ground_state(), params)?;
    Ok(BinderPoint {
        f: params.f,
        rotors: params.clock.rotors(),
        m2,
        m4,
        binder: binder_cumulant(m2, m4)?,
    })
}

/// Crossing of two Binder curves sharing the same f grid, located by linear
/// interpolation of the sign change of their difference.
pub fn binder_crossing(a: &[BinderPoint], b: &[BinderPoint]) -> Option<f64> {
    let shared: Vec<(f64, f64)> = a
        .iter()
        .zip(b.iter())
        .filter(|(pa, pb)| (pa.f - pb.f).abs() < 1e-12)
        .map(|(pa, pb)| (pa.f, pa.binder - pb.binder))
        .collect();
    for w in shared.windows(2) {
        let (f0, d0) = w[0];
        let (f1, d1) = w[1];
        if d0 == 0.0 {
            return Some(f0);
        }
        if d0 * d1 < 0.0 {
            return Some(f0 + (f1 - f0) * d0 / (d0 - d1));
        }
    }
    None
}

/// Gap between the two lowest levels over a control-parameter grid,
/// sector-resolved when requested (rotated variant only).
pub fn gap_curve(params: &CcmParams, f_grid: &[f64], symmetric: bool) -> Result<Vec<(f64, f64)>> {
    if f_grid.iter().any(|f| !(0.0..=1.0).contains(f)) {
        return Err(Error::InvalidParams("grid must stay in [0, 1]".into()));
    }
    let projector = if symmetric { Some(build_symmetry_projector(params)?) } else { None };
    let mut out = Vec::with_capacity(f_grid.len());
    for &f in f_grid {
        let p = params.with_f(f)?;
        let h = build_hamiltonian(&p)?;
        let spec = lowest_eigenpairs(&h.total, 2, projector.as_ref())?;
        out.push((f, spec.gap().expect("two levels requested")));
    }
    Ok(out)
}

/// Least-squares exponent zν of `Δ ∼ |f − f_c|^{zν}` from gap data on one
/// side of the critical point.
pub fn fit_gap_exponent(curve: &[(f64, f64)], f_c: f64) -> Result<f64> {
    let usable: Vec<(f64, f64)> = curve
        .iter()
        .filter(|(f, gap)| *gap > 0.0 && (*f - f_c).abs() > 1e-12)
        .map(|&(f, gap)| ((f - f_c).abs().ln(), gap.ln()))
        .collect();
    if usable.len() < 3 {
        return Err(Error::InvalidParams("need at least three usable gap points".into()));
    }
    let below = curve.iter().any(|&(f, _)| f < f_c);
    let above = curve.iter().any(|&(f, _)| f > f_c);
    if below && above {
        return Err(Error::InvalidParams("gap points must lie on one side of f_c".into()));
    }
    let n = usable.len() as f64;
    let sx: f64 = usable.iter().map(|p| p.0).sum();
    let sy: f64 = usable.iter().map(|p| p.1).sum();
    let sxx: f64 = usable.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = usable.iter().map(|p| p.0 * p.1).sum();
    Ok((n * sxy - sx * sy) / (n * sxx - sx * sx))
}

/// Ground-state tunneling currents of the rotated chain over a grid:
/// per grid point, the per-rotor expectation of the (0 → 1) tunneling
/// operator on the zero-charge ground state.
pub fn ground_tunneling_current(
    params: &CcmParams,
    f_grid: &[f64],
) -> Result<Vec<(f64, Vec<f64>)>> {
    if params.variant != Variant::Rotated {
        return Err(Error::InvalidParams(
            "ground-state tunneling currents target the rotated variant".into(),
        ));
    }
    let clock = params.clock;
    let mut out = Vec::with_capacity(f_grid.len());
    for &f in f_grid {
        let p = params.with_f(f)?;
        let h = build_hamiltonian(&p)?;
        let proj = build_symmetry_projector(&p)?;
        let spec = lowest_eigenpairs(&h.total, 1, Some(&proj))?;
        let psi = spec.ground_state();
        let mut per_rotor = Vec::with_capacity(clock.rotors());
        for site in 0..clock.rotors() {
            let op = tunneling_current_operator(&h, site, 0, 1, &clock)?;
            let z = op.expectation_state(psi);
            if z.im.abs() > 1e-10 {
                return Err(Error::InvalidState(format!(
                    "current expectation has imaginary part {:.3e}",
                    z.im
                )));
            }
            per_rotor.push(z.re);
        }
        out.push((f, per_rotor));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn clock(m: usize) -> ClockParams {
        ClockParams::new(3, m).unwrap()
    }

    #[test]
    fn rotated_f1_ground_is_polarized() {
        let params = CcmParams::staggered(clock(3), 1.0, PI / 2.0, Variant::Rotated).unwrap();
        let h = build_hamiltonian(&params).unwrap();
        let spec = lowest_eigenpairs(&h.total, 1, None).unwrap();
        assert_abs_diff_eq!(spec.ground_energy(), -6.0, epsilon = 1e-12);
        assert!(spec.ground_state()[0].norm() > 1.0 - 1e-10);
        assert!(spec.degeneracies.is_empty());
    }

    #[test]
    fn dense_path_matches_lanczos_on_projected_chain() {
        // force the Lanczos path by comparing against the dense answer on a
        // sector small enough for both
        let params = CcmParams::homogeneous(clock(4), 0.5, PI / 8.0, Variant::Rotated).unwrap();
        let h = build_hamiltonian(&params).unwrap();
        let proj = build_symmetry_projector(&params).unwrap();
        let sub = proj.project_operator(&h.total.matrix);
        let (dense_e, _) = dense_lowest(&sub, 2).unwrap();
        let (lan_e, lan_v) = lanczos_lowest(&sub, 2).unwrap();
        for (a, b) in dense_e.iter().zip(lan_e.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
        // residual of the Lanczos pair
        for (e, v) in lan_e.iter().zip(lan_v.iter()) {
            let hv = sub.matvec(v);
            let res: f64 = hv
                .iter()
                .zip(v.iter())
                .map(|(h, x)| (h - x * Complex64::new(*e, 0.0)).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(res < 1e-9, "residual {res:.3e}");
        }
    }

    #[test]
    fn standard_m4_matches_dense_reference() {
        let params = CcmParams::staggered(clock(4), 0.5, PI / 2.0, Variant::Standard).unwrap();
        let h = build_hamiltonian(&params).unwrap();
        let spec = lowest_eigenpairs(&h.total, 3, None).unwrap();
        let dense = h.total.matrix.to_dense();
        let (vals, _) = dense.eigh(UPLO::Lower).unwrap();
        for (a, b) in spec.energies.iter().zip(vals.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn subcritical_rotated_ground_is_threefold_degenerate_in_full_space() {
        // deep in the ordered phase the ground multiplet splits only at
        // O(f^M); the multiplet must be tight compared with the true gap
        let params = CcmParams::homogeneous(clock(4), 0.05, PI / 8.0, Variant::Rotated).unwrap();
        let h = build_hamiltonian(&params).unwrap();
        let full = lowest_eigenpairs(&h.total, 4, None).unwrap();
        let multiplet = full.energies[2] - full.energies[0];
        let gap_to_fourth = full.energies[3] - full.energies[0];
        assert!(multiplet < 1e-4, "ground multiplet spread {multiplet:.3e}");
        assert!(gap_to_fourth > 1e3 * multiplet, "multiplet not separated from the spectrum");
        // unique within the sector
        let proj = build_symmetry_projector(&params).unwrap();
        let sec = lowest_eigenpairs(&h.total, 2, Some(&proj)).unwrap();
        assert!(sec.gap().unwrap() > 1e3 * multiplet);
    }

    #[test]
    fn sector_ground_energy_equals_full_ground_energy() {
        for m in [4usize, 6] {
            let params =
                CcmParams::homogeneous(clock(m), 0.52, PI / 8.0, Variant::Rotated).unwrap();
            let h = build_hamiltonian(&params).unwrap();
            let proj = build_symmetry_projector(&params).unwrap();
            let sec = lowest_eigenpairs(&h.total, 1, Some(&proj)).unwrap();
            let full = lowest_eigenpairs(&h.total, 1, None).unwrap();
            assert_abs_diff_eq!(sec.ground_energy(), full.ground_energy(), epsilon = 1e-10);
        }
    }

    #[test]
    fn order_parameter_examples() {
        // diagonal frame: |00…0⟩ has m = 2 exactly
        let params = CcmParams::staggered(clock(4), 0.5, PI / 2.0, Variant::Standard).unwrap();
        let mut psi = vec![Complex64::new(0.0, 0.0); 81];
        psi[0] = Complex64::new(1.0, 0.0);
        let (m2, m4) = order_parameter_moments(&psi, &params).unwrap();
        assert_abs_diff_eq!(m2, 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m4, 16.0, epsilon = 1e-12);
        assert_abs_diff_eq!(binder_cumulant(m2, m4).unwrap(), 1.0, epsilon = 1e-12);

        // equal superposition of the three polarized states |kkkk⟩:
        // m eigenvalues {2, −1, −1} → ⟨m²⟩ = 2, ⟨m⁴⟩ = 6, B = 3/4
        let clockp = clock(4);
        let polarized: Vec<usize> = (0..3)
            .map(|k| (0..4).fold(0usize, |acc, _| acc * 3 + k))
            .collect();
        let mut psi = vec![Complex64::new(0.0, 0.0); 81];
        for &idx in &polarized {
            psi[idx] = Complex64::new(1.0 / 3.0f64.sqrt(), 0.0);
        }
        let params = CcmParams::staggered(clockp, 0.5, PI / 2.0, Variant::Standard).unwrap();
        let (m2, m4) = order_parameter_moments(&psi, &params).unwrap();
        assert_abs_diff_eq!(m2, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m4, 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(binder_cumulant(m2, m4).unwrap(), 0.75, epsilon = 1e-12);
    }

    #[test]
    fn binder_limits() {
        // delta-distributed m: m4 = m2² → B = 1
        assert_abs_diff_eq!(binder_cumulant(2.0, 4.0).unwrap(), 1.0, epsilon = 1e-15);
        // Gaussian: m4 = 3 m2² → B = 0
        assert_abs_diff_eq!(binder_cumulant(2.0, 12.0).unwrap(), 0.0, epsilon = 1e-15);
        assert!(binder_cumulant(0.0, 1.0).is_err());
    }

    #[test]
    fn binder_is_scale_free() {
        // rescaling m by c multiplies m2 by c² and m4 by c⁴
        let (m2, m4) = (1.7, 6.3);
        let c2 = 2.9f64;
        assert_abs_diff_eq!(
            binder_cumulant(m2, m4).unwrap(),
            binder_cumulant(m2 * c2, m4 * c2 * c2).unwrap(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn sector_mean_order_parameter_vanishes() {
        let params = CcmParams::homogeneous(clock(4), 0.3, PI / 8.0, Variant::Rotated).unwrap();
        let spec = ground_state(&params).unwrap();
        let mean = order_parameter_mean(spec.ground_state(), &params).unwrap();
        assert!(mean.abs() < 1e-10, "⟨m⟩ = {mean:.3e}");
    }

    #[test]
    fn gap_at_f1_is_the_single_flip_cost() {
        // diagonal chain: the cheapest excitation inside the zero-charge
        // sector moves two digits, the full-space one a single digit
        let params = CcmParams::homogeneous(clock(4), 1.0, PI / 8.0, Variant::Rotated).unwrap();
        let full = gap_curve(&params, &[1.0], false).unwrap();
        assert_abs_diff_eq!(full[0].1, 3.0, epsilon = 1e-10);
        let sector = gap_curve(&params, &[1.0], true).unwrap();
        assert_abs_diff_eq!(sector[0].1, 6.0, epsilon = 1e-10);
    }

    #[test]
    fn gap_positive_away_from_degeneracy() {
        let params = CcmParams::homogeneous(clock(4), 0.5, PI / 8.0, Variant::Rotated).unwrap();
        let curve = gap_curve(&params, &[0.2, 0.46, 0.8], true).unwrap();
        assert!(curve.iter().all(|&(_, gap)| gap > 0.0));
    }

    #[test]
    fn exponent_fit_recovers_synthetic_data() {
        let f_c = 0.46;
        let curve: Vec<(f64, f64)> =
            (1..12).map(|i| (f_c + 0.01 * i as f64, (0.01 * i as f64).powf(0.8))).collect();
        let fit = fit_gap_exponent(&curve, f_c).unwrap();
        assert_abs_diff_eq!(fit, 0.8, epsilon = 1e-6);
        // 1% multiplicative noise moves the slope only slightly
        let noisy: Vec<(f64, f64)> = curve
            .iter()
            .enumerate()
            .map(|(i, &(f, g))| (f, g * (1.0 + 0.01 * ((i * 2654435761) % 200) as f64 / 100.0 - 0.01)))
            .collect();
        let fit = fit_gap_exponent(&noisy, f_c).unwrap();
        assert!((fit - 0.8).abs() < 0.05, "noisy fit {fit}");
        // mixed-side data is rejected
        let mixed = vec![(f_c - 0.05, 0.1), (f_c + 0.05, 0.1), (f_c + 0.1, 0.2)];
        assert!(fit_gap_exponent(&mixed, f_c).is_err());
    }

    #[test]
    fn binder_crossing_interpolates() {
        let mk = |f: f64, b: f64| BinderPoint { f, rotors: 4, m2: 1.0, m4: 1.0, binder: b };
        let a = vec![mk(0.4, 0.9), mk(0.5, 0.5)];
        let b = vec![mk(0.4, 0.7), mk(0.5, 0.6)];
        let x = binder_crossing(&a, &b).unwrap();
        assert_abs_diff_eq!(x, 0.4 + 0.1 * (2.0 / 3.0), epsilon = 1e-12);
    }

    #[test]
    fn ground_current_requires_rotated_variant() {
        let params = CcmParams::staggered(clock(4), 0.3, PI / 2.0, Variant::Standard).unwrap();
        assert!(ground_tunneling_current(&params, &[0.3]).is_err());
    }
}
