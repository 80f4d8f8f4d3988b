use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;
use qrotor::clockops::ClockParams;
use qrotor::model::*;
use std::f64::consts::PI;

fn main() {
    let clock = ClockParams::new(3, 4).unwrap();
    let params = CcmParams::homogeneous(clock, 0.3, PI / 8.0, Variant::Rotated).unwrap();
    let h = build_hamiltonian(&params).unwrap();
    let proj = build_symmetry_projector(&params).unwrap();
    let sub = proj.project_operator(&h.total.matrix);
    let dense = sub.to_dense();
    for uplo in [UPLO::Lower, UPLO::Upper] {
        let (vals, vecs) = dense.eigh(uplo).unwrap();
        for i in 0..2 {
            let variants: Vec<(&str, Vec<Complex64>)> = vec![
                ("col      ", vecs.column(i).to_vec()),
                ("col conj ", vecs.column(i).iter().map(|z| z.conj()).collect()),
                ("row      ", vecs.row(i).to_vec()),
                ("row conj ", vecs.row(i).iter().map(|z| z.conj()).collect()),
            ];
            for (name, v) in variants {
                let hv = sub.matvec(&v);
                let res: f64 = hv.iter().zip(v.iter()).map(|(h, x)| (h - x * Complex64::new(vals[i], 0.0)).norm_sqr()).sum::<f64>().sqrt();
                println!("{uplo:?} {name} {i}: residual {:.3e}", res);
            }
        }
    }
}
