//! Chiral clock chain Hamiltonians on a periodic ring.
//!
//! Two variants are supported. The standard form couples neighbours through
//! the diagonal clock operators and drives single-rotor hopping,
//!
//! ```text
//!   H = −f Σ_j (σ_j + σ_j†) − (1−f) Σ_j (μ_j μ_{j+1}† e^{iφ_j} + h.c.),
//! ```
//!
//! while the rotated form swaps the roles of σ and μ. Both are split into
//! their diagonal and off-diagonal parts in the product basis; the split is
//! exact by construction. The rotated variant conserves the total clock
//! charge Σ_j k_j (mod N_s), which [`SectorProjector`] exploits.

use num_complex::Complex64;

use crate::clockops::{build_mu, build_sigma, embed_local, two_site_bond, ClockParams, ManyBodyOperator};
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Standard,
    Rotated,
}

/// Full parameter set of the chain: geometry, control parameter `f`,
/// per-bond chiral phases, and the variant. Bond `j` couples site `j` to
/// site `j+1 (mod M)`, so a ring of M sites carries M bonds; at M = 2 both
/// bonds are kept and the interaction doubles.
#[derive(Debug, Clone, PartialEq)]
pub struct CcmParams {
    pub clock: ClockParams,
    pub f: f64,
    pub phases: Vec<f64>,
    pub variant: Variant,
}

impl CcmParams {
    pub fn new(clock: ClockParams, f: f64, phases: Vec<f64>, variant: Variant) -> Result<Self> {
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::InvalidParams(format!("f = {f} outside [0, 1]")));
        }
        if phases.len() != clock.rotors() {
            return Err(Error::InvalidParams(format!(
                "got {} phases for {} bonds",
                phases.len(),
                clock.rotors()
            )));
        }
        Ok(Self { clock, f, phases, variant })
    }

    /// Homogeneous chiral phase φ on every bond.
    pub fn homogeneous(clock: ClockParams, f: f64, phi: f64, variant: Variant) -> Result<Self> {
        let phases = vec![phi; clock.rotors()];
        Self::new(clock, f, phases, variant)
    }

    /// Staggered phases φ_j = (−1)^j φ with 1-based bond numbering, so the
    /// first bond carries −φ.
    pub fn staggered(clock: ClockParams, f: f64, phi: f64, variant: Variant) -> Result<Self> {
        let phases = (1..=clock.rotors())
            .map(|j| if j % 2 == 0 { phi } else { -phi })
            .collect();
        Self::new(clock, f, phases, variant)
    }

    pub fn with_f(&self, f: f64) -> Result<Self> {
        Self::new(self.clock, f, self.phases.clone(), self.variant)
    }
}

/// A Hamiltonian together with its exact diagonal/off-diagonal split in the
/// product basis: `total = diagonal + off_diagonal`.
#[derive(Debug, Clone)]
pub struct HamiltonianSplit {
    pub total: ManyBodyOperator,
    pub diagonal: ManyBodyOperator,
    pub off_diagonal: ManyBodyOperator,
}

impl HamiltonianSplit {
    pub fn dim(&self) -> usize {
        self.total.dim()
    }

    /// Real diagonal entries E_j = ⟨j|H|j⟩. Fails if any residual imaginary
    /// part exceeds 1e-14.
    pub fn diagonal_energies(&self) -> Result<Vec<f64>> {
        let diag = self.total.matrix.diagonal();
        let worst = diag.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        if worst > 1e-14 {
            return Err(Error::NonRealDiagonal(worst));
        }
        Ok(diag.iter().map(|z| z.re).collect())
    }
}

/// Assemble the requested variant.
pub fn build_hamiltonian(params: &CcmParams) -> Result<HamiltonianSplit> {
    match params.variant {
        Variant::Standard => build_hccm(params),
        Variant::Rotated => build_hccm_rotated(params),
    }
}

/// Standard chain: the bond term is diagonal, the field term off-diagonal.
pub fn build_hccm(params: &CcmParams) -> Result<HamiltonianSplit> {
    if params.variant != Variant::Standard {
        return Err(Error::InvalidParams("build_hccm expects the standard variant".into()));
    }
    assemble(params, false)
}

/// Rotated chain (σ ↔ μ): the field term is diagonal, the bond term
/// off-diagonal.
pub fn build_hccm_rotated(params: &CcmParams) -> Result<HamiltonianSplit> {
    if params.variant != Variant::Rotated {
        return Err(Error::InvalidParams("build_hccm_rotated expects the rotated variant".into()));
    }
    assemble(params, true)
}

fn assemble(params: &CcmParams, rotated: bool) -> Result<HamiltonianSplit> {
    let clock = &params.clock;
    let m = clock.rotors();
    let dim = clock.dim();
    let ns = clock.n_states();
    let sigma = build_sigma(ns)?;
    let mu = build_mu(ns)?;
    let (field_op, bond_op) = if rotated { (&mu, &sigma) } else { (&sigma, &mu) };

    let one = Complex64::new(1.0, 0.0);

    // field term: −f Σ_j (op_j + op_j†)
    let mut field = CsrMatrix::zeros(dim, dim);
    for site in 0..m {
        let local = embed_local(field_op, site, clock)?;
        field = field.add_scaled(&local.matrix, one)?;
        field = field.add_scaled(&local.matrix.dagger(), one)?;
    }
    let field = field.scaled(Complex64::new(-params.f, 0.0));

    // bond term: −(1−f) Σ_j (op_j op_{j+1}† e^{iφ_j} + h.c.), periodic
    let mut bond = CsrMatrix::zeros(dim, dim);
    for site in 0..m {
        let partner = (site + 1) % m;
        let pair = two_site_bond(bond_op, site, bond_op, partner, params.phases[site], clock)?;
        bond = bond.add_scaled(&pair.matrix, one)?;
    }
    let bond = bond.scaled(Complex64::new(-(1.0 - params.f), 0.0));

    let (diag_part, offdiag_part) = if rotated { (field, bond) } else { (bond, field) };
    let total = diag_part.add_scaled(&offdiag_part, one)?;

    debug_assert!(offdiag_part.diagonal().iter().all(|z| z.norm() == 0.0));
    debug_assert!(total.is_hermitian(1e-12));

    Ok(HamiltonianSplit {
        total: ManyBodyOperator { matrix: total, hermitian: Some(true) },
        diagonal: ManyBodyOperator { matrix: diag_part, hermitian: Some(true) },
        off_diagonal: ManyBodyOperator { matrix: offdiag_part, hermitian: Some(true) },
    })
}

/// Isometry onto the zero-charge sector of the rotated chain.
///
/// The conserved charge is the digit sum mod N_s; the sector basis is the
/// ordered list of product states with charge zero. The global symmetry
/// operator `U = Π_j μ_j†` acts as ω^{−charge}, so this is its
/// eigenvalue-one subspace, which contains the rotated ground state.
#[derive(Debug, Clone)]
pub struct SectorProjector {
    full_dim: usize,
    states: Vec<usize>,
}

impl SectorProjector {
    pub fn full_dim(&self) -> usize {
        self.full_dim
    }

    pub fn sector_dim(&self) -> usize {
        self.states.len()
    }

    /// Indices of the retained basis states, ascending.
    pub fn states(&self) -> &[usize] {
        &self.states
    }

    /// Restrict an operator to the sector: Π₀ A Π₀†.
    pub fn project_operator(&self, op: &CsrMatrix) -> CsrMatrix {
        op.select(&self.states)
    }

    /// Embed a sector vector back into the full space.
    pub fn lift_vector(&self, sector: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(sector.len(), self.states.len());
        let mut full = vec![Complex64::new(0.0, 0.0); self.full_dim];
        for (k, &s) in self.states.iter().enumerate() {
            full[s] = sector[k];
        }
        full
    }

    /// Restrict a full-space vector to the sector.
    pub fn project_vector(&self, full: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(full.len(), self.full_dim);
        self.states.iter().map(|&s| full[s]).collect()
    }
}

/// Build the zero-charge projector; only meaningful for the rotated variant,
/// which is the one that conserves the charge.
pub fn build_symmetry_projector(params: &CcmParams) -> Result<SectorProjector> {
    if params.variant != Variant::Rotated {
        return Err(Error::InvalidParams(
            "the charge sector projector applies to the rotated variant".into(),
        ));
    }
    let clock = &params.clock;
    let states: Vec<usize> = (0..clock.dim()).filter(|&s| clock.digit_sum(s) == 0).collect();
    if states.is_empty() {
        return Err(Error::InvalidParams("empty symmetry sector".into()));
    }
    Ok(SectorProjector { full_dim: clock.dim(), states })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::Array2;
    use ndarray_linalg::{Eigh, UPLO};
    use std::f64::consts::{PI, TAU};

    fn dense_eigvals(h: &HamiltonianSplit) -> Vec<f64> {
        let (vals, _) = h.total.matrix.to_dense().eigh(UPLO::Lower).unwrap();
        vals.to_vec()
    }

    #[test]
    fn split_is_exact_and_shaped() {
        let clock = ClockParams::new(3, 3).unwrap();
        let params = CcmParams::staggered(clock, 0.4, PI / 2.0, Variant::Standard).unwrap();
        let h = build_hccm(&params).unwrap();
        let sum = h
            .diagonal
            .matrix
            .add_scaled(&h.off_diagonal.matrix, Complex64::new(1.0, 0.0))
            .unwrap();
        let diff = sum.add_scaled(&h.total.matrix, Complex64::new(-1.0, 0.0)).unwrap();
        assert_eq!(diff.nnz(), 0, "total must equal diagonal + off-diagonal exactly");
        // diagonal part strictly diagonal, off-diagonal part traceless on the diagonal
        for (r, c, _) in h.diagonal.matrix.triplets() {
            assert_eq!(r, c);
        }
        for (r, c, _) in h.off_diagonal.matrix.triplets() {
            assert_ne!(r, c);
        }
    }

    #[test]
    fn f_one_standard_is_purely_off_diagonal() {
        let clock = ClockParams::new(3, 2).unwrap();
        let params = CcmParams::homogeneous(clock, 1.0, 0.7, Variant::Standard).unwrap();
        let h = build_hccm(&params).unwrap();
        assert_eq!(h.diagonal.matrix.nnz(), 0);
        assert!(h.diagonal_energies().unwrap().iter().all(|&e| e == 0.0));
    }

    #[test]
    fn f_zero_standard_diagonal_energies() {
        // E_j = −Σ_j 2 cos(2π (k_j − k_{j+1})/3 + φ_j)
        let clock = ClockParams::new(3, 4).unwrap();
        let phases = vec![0.3, -0.1, 0.9, 0.2];
        let params = CcmParams::new(clock, 0.0, phases.clone(), Variant::Standard).unwrap();
        let h = build_hccm(&params).unwrap();
        assert_eq!(h.off_diagonal.matrix.nnz(), 0);
        let energies = h.diagonal_energies().unwrap();
        for state in 0..clock.dim() {
            let mut expect = 0.0;
            for j in 0..4 {
                let k = clock.digit(state, j) as f64;
                let kp = clock.digit(state, (j + 1) % 4) as f64;
                expect -= 2.0 * (TAU * (k - kp) / 3.0 + phases[j]).cos();
            }
            assert_abs_diff_eq!(energies[state], expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn m2_periodic_ring_doubles_the_bond() {
        let clock = ClockParams::new(3, 2).unwrap();
        let params = CcmParams::new(clock, 0.0, vec![0.0, 0.0], Variant::Standard).unwrap();
        let h = build_hccm(&params).unwrap();
        let energies = h.diagonal_energies().unwrap();
        // |00⟩: two bonds, each −2
        assert_abs_diff_eq!(energies[0], -4.0, epsilon = 1e-13);
    }

    #[test]
    fn diagonal_energies_match_elementwise_probe() {
        let clock = ClockParams::new(3, 4).unwrap();
        let params = CcmParams::staggered(clock, 0.5, PI / 2.0, Variant::Standard).unwrap();
        let h = build_hccm(&params).unwrap();
        let energies = h.diagonal_energies().unwrap();
        let dense = h.total.matrix.to_dense();
        for j in 0..clock.dim() {
            assert_abs_diff_eq!(energies[j], dense[[j, j]].re, epsilon = 1e-13);
        }
    }

    #[test]
    fn hermitian_for_random_parameter_draws() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let clock = ClockParams::new(3, 3).unwrap();
        for _ in 0..20 {
            let f: f64 = rng.random();
            let phases: Vec<f64> = (0..3).map(|_| rng.random_range(-PI..PI)).collect();
            for variant in [Variant::Standard, Variant::Rotated] {
                let params = CcmParams::new(clock, f, phases.clone(), variant).unwrap();
                let h = build_hamiltonian(&params).unwrap();
                assert!(h.total.matrix.is_hermitian(1e-12));
            }
        }
    }

    #[test]
    fn phase_two_pi_periodicity() {
        let clock = ClockParams::new(3, 3).unwrap();
        let a = build_hccm(
            &CcmParams::new(clock, 0.3, vec![0.4, 1.0, -0.2], Variant::Standard).unwrap(),
        )
        .unwrap();
        let b = build_hccm(
            &CcmParams::new(clock, 0.3, vec![0.4 + TAU, 1.0, -0.2 - TAU], Variant::Standard)
                .unwrap(),
        )
        .unwrap();
        let diff = a
            .total
            .matrix
            .add_scaled(&b.total.matrix, Complex64::new(-1.0, 0.0))
            .unwrap();
        assert!(diff.max_abs() < 1e-12);
    }

    #[test]
    fn rotated_f_limits() {
        let clock = ClockParams::new(3, 3).unwrap();
        // f = 0: purely off-diagonal
        let p0 = CcmParams::staggered(clock, 0.0, PI / 2.0, Variant::Rotated).unwrap();
        let h0 = build_hccm_rotated(&p0).unwrap();
        assert_eq!(h0.diagonal.matrix.nnz(), 0);
        // f = 1: diagonal, ground state |0…0⟩ with energy −2M
        let p1 = CcmParams::staggered(clock, 1.0, PI / 2.0, Variant::Rotated).unwrap();
        let h1 = build_hccm_rotated(&p1).unwrap();
        assert_eq!(h1.off_diagonal.matrix.nnz(), 0);
        let energies = h1.diagonal_energies().unwrap();
        let (ground_idx, ground_e) = energies
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        assert_eq!(ground_idx, 0);
        assert_abs_diff_eq!(*ground_e, -6.0, epsilon = 1e-13);
    }

    #[test]
    fn standard_and_rotated_are_isospectral() {
        let clock = ClockParams::new(3, 4).unwrap();
        for (f, phi) in [(0.5, PI / 2.0), (0.3, 0.9)] {
            let ps = CcmParams::staggered(clock, f, phi, Variant::Standard).unwrap();
            let pr = CcmParams::staggered(clock, f, phi, Variant::Rotated).unwrap();
            let es = dense_eigvals(&build_hccm(&ps).unwrap());
            let er = dense_eigvals(&build_hccm_rotated(&pr).unwrap());
            for (a, b) in es.iter().zip(er.iter()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn charge_operator_commutes_with_rotated_hamiltonian() {
        // U = Π_j μ_j†, diagonal with phases ω^{−Σ k_j}
        let clock = ClockParams::new(3, 3).unwrap();
        let params = CcmParams::staggered(clock, 0.37, 1.1, Variant::Rotated).unwrap();
        let h = build_hccm_rotated(&params).unwrap().total.matrix.to_dense();
        let dim = clock.dim();
        let mut u = Array2::<Complex64>::zeros((dim, dim));
        for s in 0..dim {
            let charge = clock.digit_sum(s) as f64;
            u[[s, s]] = Complex64::from_polar(1.0, -TAU * charge / 3.0);
        }
        let comm = u.dot(&h) - h.dot(&u);
        let worst = comm.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(worst < 1e-12, "[U, H] = {worst:.2e}");
    }

    #[test]
    fn sector_dimensions_and_counting() {
        let clock = ClockParams::new(3, 2).unwrap();
        let params = CcmParams::homogeneous(clock, 0.5, 0.0, Variant::Rotated).unwrap();
        let proj = build_symmetry_projector(&params).unwrap();
        assert_eq!(proj.sector_dim(), 3);
        // |00⟩, |12⟩, |21⟩
        assert_eq!(proj.states(), &[0, 5, 7]);

        let clock4 = ClockParams::new(3, 4).unwrap();
        let params4 = CcmParams::homogeneous(clock4, 0.5, 0.0, Variant::Rotated).unwrap();
        assert_eq!(build_symmetry_projector(&params4).unwrap().sector_dim(), 27);
    }

    #[test]
    fn projector_rejects_standard_variant() {
        let clock = ClockParams::new(3, 2).unwrap();
        let params = CcmParams::homogeneous(clock, 0.5, 0.0, Variant::Standard).unwrap();
        assert!(build_symmetry_projector(&params).is_err());
    }

    #[test]
    fn projected_ground_energy_matches_full_space() {
        let clock = ClockParams::new(3, 4).unwrap();
        let params = CcmParams::homogeneous(clock, 0.55, PI / 8.0, Variant::Rotated).unwrap();
        let h = build_hccm_rotated(&params).unwrap();
        let full_vals = dense_eigvals(&h);
        let proj = build_symmetry_projector(&params).unwrap();
        let sub = proj.project_operator(&h.total.matrix).to_dense();
        let (sec_vals, _) = sub.eigh(UPLO::Lower).unwrap();
        assert_abs_diff_eq!(full_vals[0], sec_vals[0], epsilon = 1e-10);
    }
}
