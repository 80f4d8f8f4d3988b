use faer::prelude::SpSolver;
use num_complex::Complex64;
use qrotor::clockops::ClockParams;
use qrotor::lindblad::*;
use qrotor::model::*;
use std::time::Instant;

fn main() {
    let clock = ClockParams::new(3, 4).unwrap();
    let params =
        CcmParams::staggered(clock, 0.5, std::f64::consts::PI / 2.0, Variant::Standard).unwrap();
    let h = build_hamiltonian(&params).unwrap();
    let baths = BathConfig::staggered(1.0, 1.1, 0.2, 4).unwrap();
    let transitions = enumerate_transitions(&h, &params, &baths).unwrap();
    let l = build_liouvillian(&h, &transitions).unwrap();
    let dim = l.dim();
    let n = dim * dim;

    // raw faer factorization timing on the constrained full system
    let anchor = 0usize;
    let mut triplets: Vec<(usize, usize, faer::complex_native::c64)> = Vec::new();
    for (r, c, v) in l.superop().triplets() {
        if r != anchor {
            triplets.push((r, c, faer::complex_native::c64::new(v.re, v.im)));
        }
    }
    for k in 0..dim {
        triplets.push((anchor, k + k * dim, faer::complex_native::c64::new(1.0, 0.0)));
    }
    let a = faer::sparse::SparseColMat::<usize, faer::complex_native::c64>::try_new_from_triplets(
        n, n, &triplets,
    )
    .unwrap();
    let t0 = Instant::now();
    let lu = a.sp_lu().unwrap();
    println!("full system: factorization {:.2?}", t0.elapsed());
    let t0 = Instant::now();
    let mut rhs = faer::Mat::<faer::complex_native::c64>::zeros(n, 1);
    rhs[(anchor, 0)] = faer::complex_native::c64::new(1.0, 0.0);
    let _x = lu.solve(&rhs);
    println!("full system: substitution {:.2?}", t0.elapsed());

    // shift-sector reduction: orbits of (a, b) -> (Pa, Pb) with P the global
    // digit shift; steady state lives in the symmetric orbit sector
    let t0 = Instant::now();
    let shift = |s: usize| -> usize {
        (0..4).fold(s, |acc, site| clock.shift_digit(acc, site, 1))
    };
    let pair_shift = |v: usize| -> usize {
        let (i, j) = (v % dim, v / dim);
        shift(i) + shift(j) * dim
    };
    let mut orbit_id = vec![usize::MAX; n];
    let mut reps: Vec<usize> = Vec::new();
    for v in 0..n {
        if orbit_id[v] == usize::MAX {
            let id = reps.len();
            let mut w = v;
            loop {
                orbit_id[w] = id;
                w = pair_shift(w);
                if w == v {
                    break;
                }
            }
            reps.push(v);
        }
    }
    let nr = reps.len();
    println!("orbits: {nr} (expect {})", n / 3);
    let mut rep_row = vec![usize::MAX; n];
    for (id, &r) in reps.iter().enumerate() {
        rep_row[r] = id;
    }
    let mut red: Vec<(usize, usize, faer::complex_native::c64)> = Vec::new();
    let anchor_red = orbit_id[0]; // orbit of rho[0,0]
    for (r, c, v) in l.superop().triplets() {
        if rep_row[r] != usize::MAX && rep_row[r] != anchor_red {
            red.push((rep_row[r], orbit_id[c], faer::complex_native::c64::new(v.re, v.im)));
        }
    }
    for k in 0..dim {
        let o = orbit_id[k + k * dim];
        red.push((anchor_red, o, faer::complex_native::c64::new(1.0, 0.0)));
    }
    let ar = faer::sparse::SparseColMat::<usize, faer::complex_native::c64>::try_new_from_triplets(
        nr, nr, &red,
    )
    .unwrap();
    println!("reduction assembly {:.2?}", t0.elapsed());
    let t0 = Instant::now();
    let lur = ar.sp_lu().unwrap();
    println!("sector system: factorization {:.2?}", t0.elapsed());
    let t0 = Instant::now();
    let mut rhsr = faer::Mat::<faer::complex_native::c64>::zeros(nr, 1);
    rhsr[(anchor_red, 0)] = faer::complex_native::c64::new(1.0, 0.0);
    let xr = lur.solve(&rhsr);
    println!("sector system: substitution {:.2?}", t0.elapsed());

    // expand and compare with the reference solution
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    for idx in 0..n {
        let z = xr[(orbit_id[idx], 0)];
        v[idx] = Complex64::new(z.re, z.im);
    }
    let rho = unvectorize(&v, dim);
    let tr = trace(&rho);
    let rho = hermitize(&rho.mapv(|z| z / tr));
    println!("sector residual vs full L: {:.2e}", l.residual(&rho));
    let reference = steady_state(&l).unwrap();
    let dist = trace_distance(reference.rho.matrix(), &rho).unwrap();
    println!("trace distance to reference: {:.2e}", dist);
}
