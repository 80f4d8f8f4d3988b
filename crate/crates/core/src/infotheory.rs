//! Correlation and quantumness measures on density matrices.
//!
//! Entropies use the natural logarithm, with eigenvalues below 1e-12 clamped
//! to zero before taking logs. The measurement bases entering the global
//! discord are parameterised by per-rotor Gell-Mann rotations
//! `R_i(θ_i) = exp(i θ_i · Λ)` and the minimisation runs a seeded simulated
//! annealer with independent restarts, so results are reproducible bit for
//! bit for a fixed seed.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lindblad::{hermitize, trace};

/// Eigenvalues below this are treated as exact zeros inside entropies.
pub const ENTROPY_CLAMP: f64 = 1e-12;

/// A bipartition of the chain into complementary site sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    subset_a: Vec<usize>,
    subset_b: Vec<usize>,
}

impl Partition {
    pub fn new(subset_a: &[usize], rotors: usize) -> Result<Self> {
        let mut a: Vec<usize> = subset_a.to_vec();
        a.sort_unstable();
        a.dedup();
        if a.is_empty() || a.len() == rotors {
            return Err(Error::InvalidParams("partition blocks must both be non-empty".into()));
        }
        if a.iter().any(|&s| s >= rotors) {
            return Err(Error::InvalidParams("partition site out of range".into()));
        }
        let b: Vec<usize> = (0..rotors).filter(|s| !a.contains(s)).collect();
        Ok(Self { subset_a: a, subset_b: b })
    }

    /// First half of the chain (sites 0..M/2) against the rest.
    pub fn half_chain(rotors: usize) -> Result<Self> {
        Self::new(&(0..rotors / 2).collect::<Vec<_>>(), rotors)
    }

    pub fn subset_a(&self) -> &[usize] {
        &self.subset_a
    }

    pub fn subset_b(&self) -> &[usize] {
        &self.subset_b
    }
}

fn infer_rotors(dim: usize, n_states: usize) -> Result<usize> {
    let mut d = dim;
    let mut m = 0;
    while d > 1 {
        if d % n_states != 0 {
            return Err(Error::DimensionMismatch(format!(
                "dimension {dim} is not a power of {n_states}"
            )));
        }
        d /= n_states;
        m += 1;
    }
    Ok(m)
}

/// Positional weight of `site` in an M-site register (site 0 most
/// significant).
fn stride(site: usize, rotors: usize, n_states: usize) -> usize {
    n_states.pow((rotors - 1 - site) as u32)
}

/// Reduced state on `keep` (ascending site order preserved).
pub fn partial_trace(
    rho: &Array2<Complex64>,
    keep: &[usize],
    n_states: usize,
) -> Result<Array2<Complex64>> {
    let rotors = infer_rotors(rho.nrows(), n_states)?;
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.is_empty() {
        return Err(Error::InvalidParams("must keep at least one site".into()));
    }
    if keep.iter().any(|&s| s >= rotors) {
        return Err(Error::InvalidParams("kept site out of range".into()));
    }
    let traced: Vec<usize> = (0..rotors).filter(|s| !keep.contains(s)).collect();

    let dim_keep = n_states.pow(keep.len() as u32);
    let dim_tr = n_states.pow(traced.len() as u32);

    // offsets of every sub-register configuration inside the full index
    let offsets = |sites: &[usize], count: usize| -> Vec<usize> {
        (0..count)
            .map(|idx| {
                let mut full = 0;
                let mut rest = idx;
                for (pos, &site) in sites.iter().enumerate() {
                    let digit = rest / n_states.pow((sites.len() - 1 - pos) as u32);
                    rest %= n_states.pow((sites.len() - 1 - pos) as u32);
                    full += digit * stride(site, rotors, n_states);
                }
                full
            })
            .collect()
    };
    let keep_off = offsets(&keep, dim_keep);
    let tr_off = offsets(&traced, dim_tr);

    let mut out = Array2::zeros((dim_keep, dim_keep));
    for (rk, &ro) in keep_off.iter().enumerate() {
        for (ck, &co) in keep_off.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for &t in &tr_off {
                acc += rho[[ro + t, co + t]];
            }
            out[[rk, ck]] = acc;
        }
    }
    Ok(out)
}

/// −Tr ρ ln ρ through the eigenvalues of the Hermitian part.
pub fn von_neumann_entropy(rho: &Array2<Complex64>) -> Result<f64> {
    let (vals, _) = hermitize(rho).eigh(UPLO::Lower)?;
    Ok(shannon_entropy(vals.iter().cloned()))
}

fn shannon_entropy(probs: impl Iterator<Item = f64>) -> f64 {
    probs
        .map(|p| if p <= ENTROPY_CLAMP { 0.0 } else { -p * p.ln() })
        .sum()
}

/// Partial transpose with respect to `subset_a` of the partition.
pub fn partial_transpose(
    rho: &Array2<Complex64>,
    partition: &Partition,
    n_states: usize,
) -> Result<Array2<Complex64>> {
    let rotors = infer_rotors(rho.nrows(), n_states)?;
    if partition.subset_a.iter().chain(&partition.subset_b).any(|&s| s >= rotors) {
        return Err(Error::InvalidParams("partition does not fit the state".into()));
    }
    let dim = rho.nrows();
    // split every index into its A-part offset and the remainder
    let a_part: Vec<usize> = (0..dim)
        .map(|idx| {
            partition
                .subset_a
                .iter()
                .map(|&s| {
                    let st = stride(s, rotors, n_states);
                    ((idx / st) % n_states) * st
                })
                .sum()
        })
        .collect();
    let mut out = Array2::zeros((dim, dim));
    for r in 0..dim {
        for c in 0..dim {
            let rt = a_part[c] + (r - a_part[r]);
            let ct = a_part[r] + (c - a_part[c]);
            out[[rt, ct]] = rho[[r, c]];
        }
    }
    Ok(out)
}

/// Sum of |negative eigenvalues| of the partial transpose.
pub fn negativity(rho: &Array2<Complex64>, partition: &Partition, n_states: usize) -> Result<f64> {
    let pt = partial_transpose(rho, partition, n_states)?;
    let (vals, _) = hermitize(&pt).eigh(UPLO::Lower)?;
    Ok(vals.iter().filter(|&&v| v < 0.0).map(|v| -v).sum())
}

/// I(A:B) = S_A + S_B − S_{A∪B}.
pub fn mutual_information(
    rho: &Array2<Complex64>,
    partition: &Partition,
    n_states: usize,
) -> Result<f64> {
    let rho_a = partial_trace(rho, &partition.subset_a, n_states)?;
    let rho_b = partial_trace(rho, &partition.subset_b, n_states)?;
    Ok(von_neumann_entropy(&rho_a)? + von_neumann_entropy(&rho_b)? - von_neumann_entropy(rho)?)
}

/// L1 coherence: sum of off-diagonal moduli in the fixed product basis.
pub fn l1_coherence(rho: &Array2<Complex64>) -> f64 {
    let mut acc = 0.0;
    for ((i, j), v) in rho.indexed_iter() {
        if i != j {
            acc += v.norm();
        }
    }
    acc
}

/// The eight Gell-Mann matrices, normalised to Tr(Λ_a Λ_b) = 2δ_ab.
pub fn gellmann_generators() -> [Array2<Complex64>; 8] {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let s3 = 1.0 / 3.0f64.sqrt();
    let mk = |rows: [[Complex64; 3]; 3]| {
        Array2::from_shape_vec((3, 3), rows.concat()).expect("3x3 shape")
    };
    [
        mk([[z, one, z], [one, z, z], [z, z, z]]),
        mk([[z, -i, z], [i, z, z], [z, z, z]]),
        mk([[one, z, z], [z, -one, z], [z, z, z]]),
        mk([[z, z, one], [z, z, z], [one, z, z]]),
        mk([[z, z, -i], [z, z, z], [i, z, z]]),
        mk([[z, z, z], [z, z, one], [z, one, z]]),
        mk([[z, z, z], [z, z, -i], [z, i, z]]),
        mk([
            [one * s3, z, z],
            [z, one * s3, z],
            [z, z, -2.0 * s3 * one],
        ]),
    ]
}

/// Single-rotor rotation `exp(i θ·Λ)`.
pub fn gellmann_rotation(theta: &[f64]) -> Result<Array2<Complex64>> {
    if theta.len() != 8 {
        return Err(Error::InvalidParams("rotation needs 8 angles".into()));
    }
    let gens = gellmann_generators();
    let mut g = Array2::<Complex64>::zeros((3, 3));
    for (t, lam) in theta.iter().zip(gens.iter()) {
        g = g + lam.mapv(|z| z * Complex64::new(*t, 0.0));
    }
    let (vals, vecs) = crate::linalg::eigh_cols(&g)?;
    let mut r = Array2::<Complex64>::zeros((3, 3));
    for k in 0..3 {
        let phase = Complex64::from_polar(1.0, vals[k]);
        for a in 0..3 {
            for b in 0..3 {
                r[[a, b]] += vecs[[a, k]] * phase * vecs[[b, k]].conj();
            }
        }
    }
    Ok(r)
}

/// Apply a single-site unitary sandwich `u†_site ρ u_site` in place of site
/// `site` of an M-rotor register.
fn conjugate_site(
    rho: &Array2<Complex64>,
    u: &Array2<Complex64>,
    site: usize,
    rotors: usize,
    n_states: usize,
) -> Array2<Complex64> {
    let dim = rho.nrows();
    let st = stride(site, rotors, n_states);
    let udag = u.t().mapv(|z| z.conj());
    // rows: out = u† ρ  (contract the site index of the row label)
    let mut tmp: Array2<Complex64> = Array2::zeros((dim, dim));
    for r in 0..dim {
        let k = (r / st) % n_states;
        let base = r - k * st;
        for kp in 0..n_states {
            let w = udag[[k, kp]];
            if w != Complex64::new(0.0, 0.0) {
                let src = base + kp * st;
                for c in 0..dim {
                    tmp[[r, c]] += w * rho[[src, c]];
                }
            }
        }
    }
    // columns: out = tmp u
    let mut out: Array2<Complex64> = Array2::zeros((dim, dim));
    for c in 0..dim {
        let k = (c / st) % n_states;
        let base = c - k * st;
        for kp in 0..n_states {
            let w = u[[kp, k]];
            if w != Complex64::new(0.0, 0.0) {
                let src = base + kp * st;
                for r in 0..dim {
                    out[[r, c]] += tmp[[r, src]] * w;
                }
            }
        }
    }
    out
}

/// Rotate into the measurement frame: `R† ρ R` with `R = ⊗_i R_i(θ_i)`.
fn to_measurement_frame(
    rho: &Array2<Complex64>,
    angles: &Array2<f64>,
    n_states: usize,
) -> Result<Array2<Complex64>> {
    let rotors = angles.nrows();
    let mut out = rho.clone();
    for site in 0..rotors {
        let theta: Vec<f64> = angles.row(site).to_vec();
        let r = gellmann_rotation(&theta)?;
        out = conjugate_site(&out, &r, site, rotors, n_states);
    }
    Ok(out)
}

/// Dephase in the rotated product basis: Π(ρ) = Σ_j Π^j ρ Π^j with
/// Π^j = R|j⟩⟨j|R†. Idempotent and trace preserving.
pub fn dephase(rho: &Array2<Complex64>, angles: &Array2<f64>) -> Result<Array2<Complex64>> {
    let n_states = 3;
    let rotors = infer_rotors(rho.nrows(), n_states)?;
    if angles.dim() != (rotors, 8) {
        return Err(Error::InvalidParams(format!(
            "angles must be {rotors}x8, got {}x{}",
            angles.nrows(),
            angles.ncols()
        )));
    }
    let frame = to_measurement_frame(rho, angles, n_states)?;
    let mut diag = Array2::zeros(frame.dim());
    for k in 0..frame.nrows() {
        diag[[k, k]] = frame[[k, k]];
    }
    // rotate back site by site with the adjoint rotations
    let mut out = diag;
    for site in 0..rotors {
        let theta: Vec<f64> = angles.row(site).to_vec();
        let r = gellmann_rotation(&theta)?;
        let rdag = r.t().mapv(|z| z.conj());
        out = conjugate_site(&out, &rdag, site, rotors, n_states);
    }
    Ok(out)
}

/// Annealing schedule for the global-discord minimisation.
#[derive(Debug, Clone)]
pub struct AnnealConfig {
    pub initial_temperature: f64,
    pub cooling_factor: f64,
    pub steps_per_temperature: usize,
    pub restarts: usize,
    pub proposal_width: f64,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        Self {
            initial_temperature: 1.0,
            cooling_factor: 0.95,
            steps_per_temperature: 200,
            restarts: 8,
            proposal_width: 0.3,
            seed: 1,
            tolerance: 1e-6,
        }
    }
}

impl AnnealConfig {
    fn validate(&self) -> Result<()> {
        if self.initial_temperature <= 0.0
            || !(0.0..1.0).contains(&self.cooling_factor)
            || self.steps_per_temperature == 0
            || self.restarts == 0
            || self.proposal_width <= 0.0
            || self.tolerance <= 0.0
        {
            return Err(Error::InvalidParams("annealing schedule out of range".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct DiscordResult {
    /// Minimised objective.
    pub value: f64,
    /// Minimising angles, one row of 8 per rotor.
    pub angles: Array2<f64>,
    /// Which restart produced the minimum.
    pub best_restart: usize,
    /// Best value found by each restart.
    pub restart_values: Vec<f64>,
    /// Objective evaluations across all restarts.
    pub evaluations: usize,
}

/// Global quantum discord via the measured-entropy identity
/// `S(ρ‖Π(ρ)) = S(Π(ρ)) − S(ρ)` (valid because Π dephases in an orthonormal
/// product basis), minimised over the local rotation angles by simulated
/// annealing with restarts.
pub fn global_discord(rho: &Array2<Complex64>, config: &AnnealConfig) -> Result<DiscordResult> {
    config.validate()?;
    let n_states = 3;
    let rotors = infer_rotors(rho.nrows(), n_states)?;
    if rotors < 1 {
        return Err(Error::InvalidParams("need at least one rotor".into()));
    }

    // fixed parts of the objective
    let s_global = von_neumann_entropy(rho)?;
    let mut locals: Vec<Array2<Complex64>> = Vec::with_capacity(rotors);
    let mut s_locals = Vec::with_capacity(rotors);
    for site in 0..rotors {
        let r = partial_trace(rho, &[site], n_states)?;
        s_locals.push(von_neumann_entropy(&r)?);
        locals.push(r);
    }

    let objective = |theta: &[f64]| -> f64 {
        let angles = Array2::from_shape_vec((rotors, 8), theta.to_vec()).expect("angle shape");
        let frame = to_measurement_frame(rho, &angles, n_states).expect("rotation");
        let joint = shannon_entropy((0..frame.nrows()).map(|k| frame[[k, k]].re));
        let mut local_term = 0.0;
        for site in 0..rotors {
            let r = gellmann_rotation(&angles.row(site).to_vec()).expect("rotation");
            let redframe = r.t().mapv(|z| z.conj()).dot(&locals[site]).dot(&r);
            let measured = shannon_entropy((0..3).map(|k| redframe[[k, k]].re));
            local_term += measured - s_locals[site];
        }
        (joint - s_global) - local_term
    };

    let nvar = rotors * 8;
    let runs: Vec<(f64, Vec<f64>, usize)> = (0..config.restarts)
        .into_par_iter()
        .map(|restart| {
            let seed = config
                .seed
                .wrapping_add((restart as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut theta: Vec<f64> = (0..nvar).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut value = objective(&theta);
            let mut best = theta.clone();
            let mut best_value = value;
            let mut evals = 1usize;

            let gaussian = |rng: &mut ChaCha8Rng| -> f64 {
                // Box-Muller
                let u1: f64 = rng.random::<f64>().max(1e-300);
                let u2: f64 = rng.random();
                (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
            };

            let mut temperature = config.initial_temperature;
            while temperature > config.tolerance {
                for _ in 0..config.steps_per_temperature {
                    let coord = rng.random_range(0..nvar);
                    let old = theta[coord];
                    theta[coord] += config.proposal_width * gaussian(&mut rng);
                    let candidate = objective(&theta);
                    evals += 1;
                    let delta = candidate - value;
                    if delta <= 0.0 || rng.random::<f64>() < (-delta / temperature).exp() {
                        value = candidate;
                        if value < best_value {
                            best_value = value;
                            best.copy_from_slice(&theta);
                        }
                    } else {
                        theta[coord] = old;
                    }
                }
                temperature *= config.cooling_factor;
            }
            // zero-temperature quench from the best point
            theta.copy_from_slice(&best);
            value = best_value;
            for _ in 0..config.steps_per_temperature {
                let coord = rng.random_range(0..nvar);
                let old = theta[coord];
                theta[coord] += 0.25 * config.proposal_width * gaussian(&mut rng);
                let candidate = objective(&theta);
                evals += 1;
                if candidate < value {
                    value = candidate;
                    best_value = value;
                    best.copy_from_slice(&theta);
                } else {
                    theta[coord] = old;
                }
            }
            (best_value, best, evals)
        })
        .collect();

    let best_restart = runs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .0.partial_cmp(&b.1 .0).unwrap())
        .map(|(i, _)| i)
        .expect("at least one restart");
    let (value, best, _) = runs[best_restart].clone();
    Ok(DiscordResult {
        value,
        angles: Array2::from_shape_vec((rotors, 8), best).expect("angle shape"),
        best_restart,
        restart_values: runs.iter().map(|r| r.0).collect(),
        evaluations: runs.iter().map(|r| r.2).sum(),
    })
}

/// Purity helper used in a few tests and diagnostics.
pub fn purity(rho: &Array2<Complex64>) -> f64 {
    trace(&rho.dot(rho)).re
}
