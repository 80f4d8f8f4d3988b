//! Rotational currents, heat flows, and entropy production.
//!
//! Two current species live on every rotor. The tunneling current between
//! local states j and j' is the coherent probability flow
//! `i(x_j H x_{j'} − x_{j'} H x_j)` with `x_j` the local projectors; the
//! thermal current is the bath-induced flow, which collapses to the classical
//! `W_{j'j} p_j − W_{jj'} p_{j'}` on diagonal states. Positive current means
//! flow towards increasing clock index (0 → 1 → 2 → 0), the paper-plot
//! orientation, and positive heat flows from bath to system.

use num_complex::Complex64;

use crate::clockops::{ClockParams, ManyBodyOperator};
use crate::error::{Error, Result};
use crate::infotheory::{mutual_information, Partition};
use crate::lindblad::{
    build_liouvillian, enumerate_transitions, steady_state_with, BathConfig, Liouvillian,
    SteadyStateOptions, Transition,
};
use crate::model::{build_hamiltonian, CcmParams, HamiltonianSplit};
use crate::sparse::CsrMatrix;
use ndarray::Array2;

/// Imaginary parts of current expectations above this abort the evaluation.
pub const IMAG_TOL: f64 = 1e-10;

/// Per-rotor pair-independence tolerance at a steady state.
pub const PAIR_TOL: f64 = 1e-9;

/// First-law residual tolerance at a steady state.
pub const FIRST_LAW_TOL: f64 = 1e-9;

/// Steady-state currents, per rotor and summed.
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentRecord {
    pub per_rotor_tunneling: Vec<f64>,
    pub per_rotor_thermal: Vec<f64>,
    pub total_tunneling: f64,
    pub total_thermal: f64,
}

/// Diagonal/non-diagonal heat currents per rotor and the entropy production
/// rate at stationarity.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatRecord {
    pub diagonal: Vec<f64>,
    pub off_diagonal: Vec<f64>,
    pub entropy_production: f64,
}

fn real_part(label: &str, z: Complex64) -> Result<f64> {
    if z.im.abs() > IMAG_TOL {
        return Err(Error::InvalidState(format!(
            "{label} expectation has imaginary part {:.3e}",
            z.im
        )));
    }
    Ok(z.re)
}

/// The tunneling current operator `i(x_j H x_{j'} − h.c.)` for one rotor.
pub fn tunneling_current_operator(
    h: &HamiltonianSplit,
    site: usize,
    j: usize,
    j_prime: usize,
    clock: &ClockParams,
) -> Result<ManyBodyOperator> {
    if j == j_prime {
        return Err(Error::InvalidParams("tunneling current needs two distinct states".into()));
    }
    if j >= clock.n_states() || j_prime >= clock.n_states() {
        return Err(Error::InvalidParams("local state outside the clock".into()));
    }
    if site >= clock.rotors() {
        return Err(Error::SiteOutOfRange { site, rotors: clock.rotors() });
    }
    // x_j H x_{j'} keeps rows with digit j and columns with digit j'
    let mut triplets = Vec::new();
    for (r, c, v) in h.total.matrix.triplets() {
        if clock.digit(r, site) == j && clock.digit(c, site) == j_prime {
            triplets.push((r, c, v));
        }
    }
    let masked = CsrMatrix::from_triplets(clock.dim(), clock.dim(), &triplets)?;
    let i = Complex64::new(0.0, 1.0);
    let matrix = masked.scaled(i).add_scaled(&masked.dagger().scaled(i), Complex64::new(-1.0, 0.0))?;
    Ok(ManyBodyOperator { matrix, hermitian: Some(true) })
}

/// `Tr(ρ J^tun)` for the given rotor and state pair.
pub fn tunneling_current(
    rho: &Array2<Complex64>,
    h: &HamiltonianSplit,
    site: usize,
    j: usize,
    j_prime: usize,
    clock: &ClockParams,
) -> Result<f64> {
    let op = tunneling_current_operator(h, site, j, j_prime, clock)?;
    real_part("tunneling current", op.expectation(rho))
}

/// The thermal current operator for one rotor. With projector-sandwiched
/// jump operators the λ-sum collapses to a diagonal matrix, and transitions
/// on other sites cancel entry by entry; `restrict_to_site` keeps only the
/// site's own λ-terms so the cancellation can be asserted rather than
/// assumed.
pub fn thermal_current_operator(
    transitions: &[Transition],
    site: usize,
    j: usize,
    j_prime: usize,
    clock: &ClockParams,
    restrict_to_site: bool,
) -> Result<ManyBodyOperator> {
    if j == j_prime {
        return Err(Error::InvalidParams("thermal current needs two distinct states".into()));
    }
    if j >= clock.n_states() || j_prime >= clock.n_states() {
        return Err(Error::InvalidParams("local state outside the clock".into()));
    }
    if site >= clock.rotors() {
        return Err(Error::SiteOutOfRange { site, rotors: clock.rotors() });
    }
    let mut diag = vec![Complex64::new(0.0, 0.0); clock.dim()];
    for t in transitions {
        if restrict_to_site && t.site != site {
            continue;
        }
        let ds = clock.digit(t.source, site);
        let dt = clock.digit(t.target, site);
        if ds == j && dt == j_prime {
            diag[t.source] += Complex64::new(t.rate, 0.0);
        } else if ds == j_prime && dt == j {
            diag[t.source] -= Complex64::new(t.rate, 0.0);
        }
    }
    Ok(ManyBodyOperator { matrix: CsrMatrix::from_diagonal(&diag), hermitian: Some(true) })
}

/// `Tr(ρ J^th)`; on diagonal ρ this is the classical probability current.
pub fn thermal_current(
    rho: &Array2<Complex64>,
    transitions: &[Transition],
    site: usize,
    j: usize,
    j_prime: usize,
    clock: &ClockParams,
) -> Result<f64> {
    let op = thermal_current_operator(transitions, site, j, j_prime, clock, false)?;
    real_part("thermal current", op.expectation(rho))
}

/// Evaluate both current species for every rotor at the pair (0, 1) and
/// assert that every pair (k, k+1) agrees, which holds only on stationary
/// states.
pub fn steady_currents(
    rho: &Array2<Complex64>,
    h: &HamiltonianSplit,
    transitions: &[Transition],
    clock: &ClockParams,
) -> Result<CurrentRecord> {
    let ns = clock.n_states();
    let mut per_tun = Vec::with_capacity(clock.rotors());
    let mut per_th = Vec::with_capacity(clock.rotors());
    for site in 0..clock.rotors() {
        let mut tun = Vec::with_capacity(ns);
        let mut th = Vec::with_capacity(ns);
        for k in 0..ns {
            tun.push(tunneling_current(rho, h, site, k, (k + 1) % ns, clock)?);
            th.push(thermal_current(rho, transitions, site, k, (k + 1) % ns, clock)?);
        }
        for (label, vals) in [("tunneling", &tun), ("thermal", &th)] {
            let spread = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                - vals.iter().cloned().fold(f64::INFINITY, f64::min);
            if spread > PAIR_TOL {
                return Err(Error::PairIndependence(format!(
                    "{label} current at rotor {site} varies by {spread:.3e} across state pairs"
                )));
            }
        }
        per_tun.push(tun[0]);
        per_th.push(th[0]);
    }
    Ok(CurrentRecord {
        total_tunneling: per_tun.iter().sum(),
        total_thermal: per_th.iter().sum(),
        per_rotor_tunneling: per_tun,
        per_rotor_thermal: per_th,
    })
}

/// Per-bath heat currents through the diagonal and off-diagonal Hamiltonian
/// parts, `Q̇_{D,m} = tr(D_m(ρ) H_D)` and `Q̇_{ND,m} = tr(D_m(ρ) H_ND)`,
/// plus the entropy production rate `Σ̇ = −Σ_m β_m Q̇_{D,m}` (stationary
/// form). Fails when the first law `Σ_m (Q̇_D + Q̇_ND) = 0` is violated,
/// which signals a non-stationary input.
pub fn heat_currents(
    rho: &Array2<Complex64>,
    h: &HamiltonianSplit,
    liouvillian: &Liouvillian,
    baths: &BathConfig,
) -> Result<HeatRecord> {
    if liouvillian.sites() > baths.rotors() {
        return Err(Error::DimensionMismatch("more dissipator sites than baths".into()));
    }
    let m = baths.rotors();
    let mut diagonal = Vec::with_capacity(m);
    let mut off_diagonal = Vec::with_capacity(m);
    for site in 0..m {
        // sites beyond the transition list carry no dissipator at all
        if site >= liouvillian.sites() {
            diagonal.push(0.0);
            off_diagonal.push(0.0);
            continue;
        }
        let d_rho = liouvillian.apply_site_dissipator(site, rho);
        diagonal.push(real_part("diagonal heat", h.diagonal.expectation(&d_rho))?);
        off_diagonal.push(real_part("non-diagonal heat", h.off_diagonal.expectation(&d_rho))?);
    }
    let first_law: f64 = diagonal.iter().chain(off_diagonal.iter()).sum();
    if first_law.abs() > FIRST_LAW_TOL {
        return Err(Error::Stationarity(format!(
            "first-law residual {first_law:.3e}; the input is not a steady state"
        )));
    }
    let entropy_production = -diagonal
        .iter()
        .enumerate()
        .map(|(site, q)| baths.beta(site) * q)
        .sum::<f64>();
    Ok(HeatRecord { diagonal, off_diagonal, entropy_production })
}

/// `Tr(ρ J²)` for a current operator.
pub fn mean_square_current(rho: &Array2<Complex64>, op: &ManyBodyOperator) -> Result<f64> {
    // tr(ρ J J) = Σ (ρJ)[r,k] J[k,r]
    let rho_j = op.matrix.rmatmul_dense(rho);
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, r, v) in op.matrix.triplets() {
        acc += rho_j[[r, k]] * v;
    }
    real_part("mean-square current", acc)
}

/// Forward finite-difference susceptibilities of the total thermal current
/// and of the half-chain mutual information to a temperature bias:
/// the even sub-lattice stays at `beta_e` while the odd one moves to
/// `1/(T_e + delta_t)`.
pub fn current_susceptibility(
    params: &CcmParams,
    beta_e: f64,
    g: f64,
    delta_t: f64,
    solver: &SteadyStateOptions,
) -> Result<(f64, f64)> {
    if beta_e <= 0.0 || g <= 0.0 {
        return Err(Error::InvalidParams("beta_e and g must be positive".into()));
    }
    if delta_t == 0.0 {
        return Err(Error::InvalidParams("delta_t must be non-zero".into()));
    }
    let t_e = 1.0 / beta_e;
    if t_e + delta_t <= 0.0 {
        return Err(Error::InvalidParams("biased temperature must stay positive".into()));
    }
    let beta_o = 1.0 / (t_e + delta_t);

    let clock = &params.clock;
    let partition = Partition::half_chain(clock.rotors())?;
    let h = build_hamiltonian(params)?;

    let solve = |beta_odd: f64| -> Result<(f64, f64)> {
        let baths = BathConfig::staggered(beta_e, beta_odd, g, clock.rotors())?;
        let transitions = enumerate_transitions(&h, params, &baths)?;
        let l = build_liouvillian(&h, &transitions)?;
        let sol = steady_state_with(&l, solver)?;
        let currents = steady_currents(sol.rho.matrix(), &h, &transitions, clock)?;
        let info = mutual_information(sol.rho.matrix(), &partition, clock.n_states())?;
        Ok((currents.total_thermal, info))
    };

    let (j_base, i_base) = solve(beta_e)?;
    let (j_bias, i_bias) = solve(beta_o)?;
    Ok(((j_bias - j_base) / delta_t, (i_bias - i_base) / delta_t))
}
