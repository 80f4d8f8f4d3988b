//! Clock-operator algebra over a chain of N_s-level rotors.
//!
//! The product basis is indexed base-N_s with site 0 as the most significant
//! digit; all other modules inherit this encoding. Digit arithmetic is
//! modular, `|k + N_s⟩ = |k⟩`.

use ndarray::Array2;
use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Hermiticity tolerance used when flagging operators.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Chain geometry: `n_states` levels per rotor, `rotors` sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClockParams {
    n_states: usize,
    rotors: usize,
}

impl ClockParams {
    pub fn new(n_states: usize, rotors: usize) -> Result<Self> {
        if n_states < 2 {
            return Err(Error::InvalidParams(format!("n_states = {n_states}, need at least 2")));
        }
        if rotors < 2 {
            return Err(Error::InvalidParams(format!("rotors = {rotors}, need at least 2")));
        }
        // the Hilbert dimension must stay addressable
        let mut dim = 1usize;
        for _ in 0..rotors {
            dim = dim
                .checked_mul(n_states)
                .ok_or_else(|| Error::InvalidParams("Hilbert dimension overflows usize".into()))?;
        }
        Ok(Self { n_states, rotors })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn rotors(&self) -> usize {
        self.rotors
    }

    /// Hilbert-space dimension N_s^M.
    pub fn dim(&self) -> usize {
        self.n_states.pow(self.rotors as u32)
    }

    /// Positional weight of `site`: site 0 is the most significant digit.
    pub fn stride(&self, site: usize) -> usize {
        self.n_states.pow((self.rotors - 1 - site) as u32)
    }

    /// Clock digit of `state` at `site`.
    pub fn digit(&self, state: usize, site: usize) -> usize {
        (state / self.stride(site)) % self.n_states
    }

    /// `state` with the digit at `site` shifted by `delta` (mod N_s).
    pub fn shift_digit(&self, state: usize, site: usize, delta: i64) -> usize {
        let stride = self.stride(site);
        let old = (state / stride) % self.n_states;
        let ns = self.n_states as i64;
        let new = (old as i64 + delta).rem_euclid(ns) as usize;
        state - old * stride + new * stride
    }

    /// Sum of digits modulo N_s (the Z_N charge of a basis state).
    pub fn digit_sum(&self, state: usize) -> usize {
        (0..self.rotors).map(|s| self.digit(state, s)).sum::<usize>() % self.n_states
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.rotors {
            Err(Error::SiteOutOfRange { site, rotors: self.rotors })
        } else {
            Ok(())
        }
    }
}

/// A product basis state as its digit string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisState {
    pub digits: Vec<u8>,
}

impl BasisState {
    pub fn from_index(index: usize, params: &ClockParams) -> Self {
        let digits = (0..params.rotors()).map(|s| params.digit(index, s) as u8).collect();
        Self { digits }
    }

    pub fn to_index(&self, params: &ClockParams) -> usize {
        self.digits
            .iter()
            .fold(0usize, |acc, &d| acc * params.n_states() + d as usize)
    }
}

/// A many-body operator on the product space, stored sparse.
#[derive(Debug, Clone)]
pub struct ManyBodyOperator {
    pub matrix: CsrMatrix,
    /// `Some(true)` when the operator is Hermitian within [`HERMITICITY_TOL`].
    pub hermitian: Option<bool>,
}

impl ManyBodyOperator {
    pub fn new(matrix: CsrMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "operator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { matrix, hermitian: None })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Check and cache Hermiticity.
    pub fn check_hermitian(&mut self) -> bool {
        let h = self.matrix.is_hermitian(HERMITICITY_TOL);
        self.hermitian = Some(h);
        h
    }

    /// `tr(ρ · Op)`.
    pub fn expectation(&self, rho: &Array2<Complex64>) -> Complex64 {
        debug_assert_eq!(rho.nrows(), self.dim());
        let mut acc = Complex64::new(0.0, 0.0);
        for (r, c, v) in self.matrix.triplets() {
            acc += rho[[c, r]] * v;
        }
        acc
    }

    /// `⟨ψ| Op |ψ⟩`.
    pub fn expectation_state(&self, psi: &[Complex64]) -> Complex64 {
        let y = self.matrix.matvec(psi);
        psi.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum()
    }
}

/// The permutation of basis states induced by rotating every clock one step:
/// `perm[s]` is `s` with all digits shifted by +1 (mod N_s). Conjugation by
/// it leaves the standard chain and its jump structure invariant, which the
/// steady-state solver exploits.
pub fn global_shift_permutation(params: &ClockParams) -> Vec<usize> {
    (0..params.dim())
        .map(|s| (0..params.rotors()).fold(s, |acc, site| params.shift_digit(acc, site, 1)))
        .collect()
}

/// Cyclic lowering operator: entries at `(k, k+1 mod N_s)`, so `σ|k+1⟩ = |k⟩`.
pub fn build_sigma(n_states: usize) -> Result<Array2<Complex64>> {
    if n_states < 2 {
        return Err(Error::InvalidParams(format!("n_states = {n_states}, need at least 2")));
    }
    let mut m = Array2::zeros((n_states, n_states));
    for k in 0..n_states {
        m[[k, (k + 1) % n_states]] = Complex64::new(1.0, 0.0);
    }
    Ok(m)
}

/// Clock phase operator: `diag(1, ω, ω², …)` with `ω = exp(i 2π / N_s)`.
pub fn build_mu(n_states: usize) -> Result<Array2<Complex64>> {
    if n_states < 2 {
        return Err(Error::InvalidParams(format!("n_states = {n_states}, need at least 2")));
    }
    let mut m = Array2::zeros((n_states, n_states));
    for k in 0..n_states {
        let phi = TAU * k as f64 / n_states as f64;
        m[[k, k]] = Complex64::from_polar(1.0, phi);
    }
    Ok(m)
}

/// Embed a single-site operator at `site` (identity elsewhere).
pub fn embed_local(
    op: &Array2<Complex64>,
    site: usize,
    params: &ClockParams,
) -> Result<ManyBodyOperator> {
    params.check_site(site)?;
    let ns = params.n_states();
    if op.dim() != (ns, ns) {
        return Err(Error::DimensionMismatch(format!(
            "single-site operator must be {ns}x{ns}, got {}x{}",
            op.nrows(),
            op.ncols()
        )));
    }
    let local = CsrMatrix::from_dense(op, 0.0);
    let left = CsrMatrix::identity(ns.pow(site as u32));
    let right = CsrMatrix::identity(params.stride(site));
    let matrix = left.kron(&local).kron(&right);
    let mut out = ManyBodyOperator::new(matrix)?;
    out.hermitian = Some(is_dense_hermitian(op, HERMITICITY_TOL));
    Ok(out)
}

/// `opA_a · opB†_b · e^{i φ} + h.c.` on two distinct sites; Hermitian by
/// construction.
pub fn two_site_bond(
    op_a: &Array2<Complex64>,
    site_a: usize,
    op_b: &Array2<Complex64>,
    site_b: usize,
    phase: f64,
    params: &ClockParams,
) -> Result<ManyBodyOperator> {
    params.check_site(site_a)?;
    params.check_site(site_b)?;
    if site_a == site_b {
        return Err(Error::InvalidParams(format!("bond sites collide at {site_a}")));
    }
    let ns = params.n_states();
    if op_a.dim() != (ns, ns) || op_b.dim() != (ns, ns) {
        return Err(Error::DimensionMismatch("bond operators must be single-site".into()));
    }

    let b_dag = op_b.t().mapv(|z| z.conj());
    // order the pair along the chain so the Kronecker chain is well defined
    let (first_site, first_op, second_site, second_op) = if site_a < site_b {
        (site_a, op_a, site_b, &b_dag)
    } else {
        (site_b, &b_dag, site_a, op_a)
    };
    let left = CsrMatrix::identity(ns.pow(first_site as u32));
    let mid = CsrMatrix::identity(ns.pow((second_site - first_site - 1) as u32));
    let right = CsrMatrix::identity(ns.pow((params.rotors() - 1 - second_site) as u32));
    let product = left
        .kron(&CsrMatrix::from_dense(first_op, 0.0))
        .kron(&mid)
        .kron(&CsrMatrix::from_dense(second_op, 0.0))
        .kron(&right);

    let directed = product.scaled(Complex64::from_polar(1.0, phase));
    let matrix = directed.add_scaled(&directed.dagger(), Complex64::new(1.0, 0.0))?;
    Ok(ManyBodyOperator { matrix, hermitian: Some(true) })
}

fn is_dense_hermitian(op: &Array2<Complex64>, tol: f64) -> bool {
    if op.nrows() != op.ncols() {
        return false;
    }
    for i in 0..op.nrows() {
        for j in 0..op.ncols() {
            if (op[[i, j]] - op[[j, i]].conj()).norm() > tol {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn mat_diff(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn sigma_matrix_entries() {
        let s = build_sigma(3).unwrap();
        // ones at (0,1), (1,2), (2,0)
        assert_eq!(s[[0, 1]], Complex64::new(1.0, 0.0));
        assert_eq!(s[[1, 2]], Complex64::new(1.0, 0.0));
        assert_eq!(s[[2, 0]], Complex64::new(1.0, 0.0));
        assert_eq!(s.iter().filter(|z| z.norm() > 0.0).count(), 3);
    }

    #[test]
    fn mu_matrix_entries() {
        let m = build_mu(3).unwrap();
        let w = Complex64::from_polar(1.0, TAU / 3.0);
        assert!((m[[0, 0]] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((m[[1, 1]] - w).norm() < 1e-15);
        assert!((m[[2, 2]] - w * w).norm() < 1e-15);
    }

    #[test]
    fn mu_plus_dagger_is_two_cosine() {
        let m = build_mu(3).unwrap();
        let s = &m + &m.t().mapv(|z| z.conj());
        assert_abs_diff_eq!(s[[0, 0]].re, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s[[1, 1]].re, -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s[[2, 2]].re, -1.0, epsilon = 1e-14);
    }

    #[test]
    fn clock_operators_unitary_of_order_ns() {
        for ns in 2..=5 {
            let s = build_sigma(ns).unwrap();
            let m = build_mu(ns).unwrap();
            let id = Array2::<Complex64>::eye(ns);
            let mut sp = id.clone();
            let mut mp = id.clone();
            for _ in 0..ns {
                sp = sp.dot(&s);
                mp = mp.dot(&m);
            }
            assert!(mat_diff(&sp, &id) < 1e-14, "sigma^N != 1 for N={ns}");
            assert!(mat_diff(&mp, &id) < 1e-14, "mu^N != 1 for N={ns}");
            // unitarity
            let sdag = s.t().mapv(|z| z.conj());
            assert!(mat_diff(&sdag.dot(&s), &id) < 1e-14);
        }
    }

    #[test]
    fn clock_shift_commutation() {
        // σμ = ω μσ
        for ns in 2..=5 {
            let s = build_sigma(ns).unwrap();
            let m = build_mu(ns).unwrap();
            let w = Complex64::from_polar(1.0, TAU / ns as f64);
            let lhs = s.dot(&m);
            let rhs = m.dot(&s).mapv(|z| w * z);
            assert!(mat_diff(&lhs, &rhs) < 1e-14, "commutation fails for N={ns}");
        }
    }

    #[test]
    fn index_digit_roundtrip() {
        for (ns, m) in [(3usize, 4usize), (2, 6), (4, 3)] {
            let p = ClockParams::new(ns, m).unwrap();
            for idx in 0..p.dim() {
                let bs = BasisState::from_index(idx, &p);
                assert!(bs.digits.iter().all(|&d| (d as usize) < ns));
                assert_eq!(bs.to_index(&p), idx);
            }
        }
    }

    #[test]
    fn site_zero_is_most_significant() {
        let p = ClockParams::new(3, 2).unwrap();
        // |10⟩ has index 1*3 + 0 = 3
        let bs = BasisState { digits: vec![1, 0] };
        assert_eq!(bs.to_index(&p), 3);
        assert_eq!(p.digit(3, 0), 1);
        assert_eq!(p.digit(3, 1), 0);
    }

    #[test]
    fn embed_identity_gives_identity() {
        let p = ClockParams::new(3, 3).unwrap();
        let id = Array2::<Complex64>::eye(3);
        for site in 0..3 {
            let op = embed_local(&id, site, &p).unwrap();
            let diff = op
                .matrix
                .add_scaled(&CsrMatrix::identity(27), Complex64::new(-1.0, 0.0))
                .unwrap();
            assert!(diff.max_abs() < 1e-15);
        }
    }

    #[test]
    fn embed_mu_acts_on_correct_digit() {
        // M=2: μ at site 0 applied to |10⟩ gives ω |10⟩
        let p = ClockParams::new(3, 2).unwrap();
        let mu = build_mu(3).unwrap();
        let op = embed_local(&mu, 0, &p).unwrap();
        let idx = BasisState { digits: vec![1, 0] }.to_index(&p);
        let mut psi = vec![Complex64::new(0.0, 0.0); 9];
        psi[idx] = Complex64::new(1.0, 0.0);
        let out = op.matrix.matvec(&psi);
        let w = Complex64::from_polar(1.0, TAU / 3.0);
        assert!((out[idx] - w).norm() < 1e-15);
        assert!(out.iter().enumerate().all(|(i, z)| i == idx || z.norm() < 1e-15));
    }

    #[test]
    fn different_site_embeddings_commute() {
        let p = ClockParams::new(3, 2).unwrap();
        let sig = embed_local(&build_sigma(3).unwrap(), 0, &p).unwrap();
        let mu = embed_local(&build_mu(3).unwrap(), 1, &p).unwrap();
        let a = sig.matrix.to_dense();
        let b = mu.matrix.to_dense();
        assert!(mat_diff(&a.dot(&b), &b.dot(&a)) < 1e-14);
    }

    #[test]
    fn embed_preserves_sparsity_count() {
        let p = ClockParams::new(3, 4).unwrap();
        let sig = build_sigma(3).unwrap();
        for site in 0..4 {
            let op = embed_local(&sig, site, &p).unwrap();
            assert_eq!(op.matrix.nnz(), 3usize.pow(3) * 3);
        }
    }

    #[test]
    fn bond_diagonal_values_at_phase_zero() {
        // μ μ† bond at phase 0: diagonal entry 2 cos(2π (k0 − k1)/3)
        let p = ClockParams::new(3, 2).unwrap();
        let mu = build_mu(3).unwrap();
        let bond = two_site_bond(&mu, 0, &mu, 1, 0.0, &p).unwrap();
        for idx in 0..9 {
            let (k0, k1) = (p.digit(idx, 0) as f64, p.digit(idx, 1) as f64);
            let expected = 2.0 * (TAU * (k0 - k1) / 3.0).cos();
            let got = bond.matrix.get(idx, idx);
            assert_abs_diff_eq!(got.re, expected, epsilon = 1e-14);
            assert_abs_diff_eq!(got.im, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn bond_is_hermitian() {
        let p = ClockParams::new(3, 3).unwrap();
        let sig = build_sigma(3).unwrap();
        let bond = two_site_bond(&sig, 2, &sig, 0, 0.7, &p).unwrap();
        assert!(bond.matrix.is_hermitian(1e-14));
    }

    #[test]
    fn bond_phase_quarter_turn_kills_diagonal() {
        let p = ClockParams::new(3, 2).unwrap();
        let mu = build_mu(3).unwrap();
        let bond = two_site_bond(&mu, 0, &mu, 1, std::f64::consts::FRAC_PI_2, &p).unwrap();
        // |00⟩: 2 cos(π/2) = 0
        assert!(bond.matrix.get(0, 0).norm() < 1e-15);
    }

    #[test]
    fn bond_site_collision_rejected() {
        let p = ClockParams::new(3, 2).unwrap();
        let mu = build_mu(3).unwrap();
        assert!(two_site_bond(&mu, 1, &mu, 1, 0.0, &p).is_err());
    }

    #[test]
    fn shift_digit_wraps() {
        let p = ClockParams::new(3, 2).unwrap();
        let idx = BasisState { digits: vec![2, 1] }.to_index(&p);
        let up = p.shift_digit(idx, 0, 1);
        assert_eq!(BasisState::from_index(up, &p).digits, vec![0, 1]);
        let down = p.shift_digit(idx, 1, -2);
        assert_eq!(BasisState::from_index(down, &p).digits, vec![2, 2]);
    }
}
