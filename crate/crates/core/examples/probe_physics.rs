// Scratch survey of the acceptance-relevant observables. Run with a section
// name: peaks | zeros | heat | ground | appc | binder | m6 | sus
use ndarray::Array2;
use num_complex::Complex64;
use qrotor::clockops::ClockParams;
use qrotor::groundstate::*;
use qrotor::infotheory::*;
use qrotor::lindblad::*;
use qrotor::model::*;
use qrotor::observables::*;
use std::f64::consts::PI;
use std::time::Instant;

fn ness(
    m: usize,
    f: f64,
    phi: f64,
    beta_e: f64,
    beta_o: f64,
) -> (ClockParams, HamiltonianSplit, BathConfig, Vec<Transition>, Liouvillian, DensityMatrix) {
    let clock = ClockParams::new(3, m).unwrap();
    let params = CcmParams::staggered(clock, f, phi, Variant::Standard).unwrap();
    let h = build_hamiltonian(&params).unwrap();
    let baths = BathConfig::staggered(beta_e, beta_o, 0.2, m).unwrap();
    let transitions = enumerate_transitions(&h, &params, &baths).unwrap();
    let l = build_liouvillian(&h, &transitions).unwrap();
    let rho = steady_state(&l).unwrap().rho;
    (clock, h, baths, transitions, l, rho)
}

fn main() {
    let section = std::env::args().nth(1).unwrap_or_else(|| "peaks".into());
    match section.as_str() {
        "peaks" => peaks(),
        "zeros" => zeros(),
        "heat" => heat(),
        "ground" => ground(),
        "appc" => appc(),
        "binder" => binder(),
        "m6" => m6(),
        "sus" => sus(),
        other => eprintln!("unknown section {other}"),
    }
}

fn peaks() {
    let t0 = Instant::now();
    let mut best_tun = vec![(0.0f64, 0.0f64); 4];
    let mut best_th = vec![(0.0f64, 0.0f64); 4];
    for i in 0..51 {
        let f = i as f64 / 50.0;
        let (clock, h, _, transitions, _, rho) = ness(4, f, PI / 2.0, 1.0, 1.1);
        let rec = steady_currents(rho.matrix(), &h, &transitions, &clock).unwrap();
        for m in 0..4 {
            if rec.per_rotor_tunneling[m].abs() > best_tun[m].1 {
                best_tun[m] = (f, rec.per_rotor_tunneling[m].abs());
            }
            if rec.per_rotor_thermal[m].abs() > best_th[m].1 {
                best_th[m] = (f, rec.per_rotor_thermal[m].abs());
            }
        }
        if i % 10 == 0 {
            println!(
                "f={f:.2} tun[0]={:+.5e} th[0]={:+.5e} total_tun={:+.4e} total_th={:+.4e}",
                rec.per_rotor_tunneling[0],
                rec.per_rotor_thermal[0],
                rec.total_tunneling,
                rec.total_thermal
            );
        }
    }
    println!("tunneling peaks per rotor: {best_tun:?}");
    println!("thermal   peaks per rotor: {best_th:?}");
    println!("51 solves in {:.1?}", t0.elapsed());
}

fn zeros() {
    for k in [1, 2, 3] {
        let phi = k as f64 * PI / 3.0;
        let (clock, h, _, transitions, _, rho) = ness(4, 0.5, phi, 1.0, 1.1);
        let rec = steady_currents(rho.matrix(), &h, &transitions, &clock).unwrap();
        println!(
            "phi={k}π/3: max|tun|={:.3e} max|th|={:.3e}",
            rec.per_rotor_tunneling.iter().fold(0.0f64, |a, x| a.max(x.abs())),
            rec.per_rotor_thermal.iter().fold(0.0f64, |a, x| a.max(x.abs()))
        );
    }
    // ΔT = 0 at generic phi
    let (clock, h, _, transitions, _, rho) = ness(4, 0.5, PI / 2.0, 1.0, 1.0);
    let rec = steady_currents(rho.matrix(), &h, &transitions, &clock).unwrap();
    println!(
        "ΔT=0: |total_tun|={:.3e} |total_th|={:.3e} (per-rotor tun {:+.3e})",
        rec.total_tunneling.abs(),
        rec.total_thermal.abs(),
        rec.per_rotor_tunneling[0]
    );
    // periodicity phi vs phi + 2π/3
    let (clock2, h2, _, tr2, _, rho2) = ness(4, 0.5, 0.9, 1.0, 1.1);
    let (_, h3, _, tr3, _, rho3) = ness(4, 0.5, 0.9 + 2.0 * PI / 3.0, 1.0, 1.1);
    let a = steady_currents(rho2.matrix(), &h2, &tr2, &clock2).unwrap();
    let b = steady_currents(rho3.matrix(), &h3, &tr3, &clock).unwrap();
    println!(
        "periodicity: Δtun={:.3e} Δth={:.3e}",
        (a.per_rotor_tunneling[0] - b.per_rotor_tunneling[0]).abs(),
        (a.per_rotor_thermal[0] - b.per_rotor_thermal[0]).abs()
    );
    let pa = Partition::half_chain(4).unwrap();
    for (name, x, y) in [
        ("S_A", von_neumann_entropy(&partial_trace(rho2.matrix(), &[0, 1], 3).unwrap()).unwrap(),
               von_neumann_entropy(&partial_trace(rho3.matrix(), &[0, 1], 3).unwrap()).unwrap()),
        ("I", mutual_information(rho2.matrix(), &pa, 3).unwrap(),
              mutual_information(rho3.matrix(), &pa, 3).unwrap()),
        ("C", l1_coherence(rho2.matrix()), l1_coherence(rho3.matrix())),
        ("N", negativity(rho2.matrix(), &pa, 3).unwrap(), negativity(rho3.matrix(), &pa, 3).unwrap()),
    ] {
        println!("periodicity {name}: |Δ|={:.3e}  (value {x:.6e})", (x - y).abs());
    }
}

fn heat() {
    for beta_e in [1.0, 0.2] {
        for f in [0.3, 0.5, 0.7] {
            let (_, h, baths, _, l, rho) = ness(4, f, PI / 2.0, beta_e, 1.1);
            let rec = heat_currents(rho.matrix(), &h, &l, &baths).unwrap();
            let even: f64 = rec.diagonal.iter().skip(1).step_by(2).sum();
            let odd: f64 = rec.diagonal.iter().step_by(2).sum();
            let nd: f64 = rec.off_diagonal.iter().sum();
            println!(
                "βe={beta_e} f={f}: Q_D(even 1-based)={even:+.4e} Q_D(odd)={odd:+.4e} ΣQ_ND={nd:+.4e} Σ̇={:+.3e}",
                rec.entropy_production
            );
        }
    }
}

fn ground() {
    // standard-model ground state: both current species
    for f in [0.1, 0.3, 0.45, 0.6, 0.9] {
        let clock = ClockParams::new(3, 4).unwrap();
        let params = CcmParams::staggered(clock, f, PI / 2.0, Variant::Standard).unwrap();
        let h = build_hamiltonian(&params).unwrap();
        let spec = ground_state(&params).unwrap();
        let psi = spec.ground_state();
        let rho = DensityMatrix::from_pure(psi).unwrap();
        let baths = BathConfig::staggered(1.0, 1.1, 0.2, 4).unwrap();
        let transitions = enumerate_transitions(&h, &params, &baths).unwrap();
        let mut max_tun = 0.0f64;
        let mut max_th = 0.0f64;
        let mut max_th_t0 = 0.0f64;
        // zero-temperature limit rates: only downhill jumps, γ = g·ΔE
        let t0_transitions: Vec<Transition> = {
            let energies = h.diagonal_energies().unwrap();
            transitions
                .iter()
                .map(|t| Transition {
                    rate: (0.2 * (energies[t.source] - energies[t.target])).max(0.0),
                    ..t.clone()
                })
                .filter(|t| t.rate > 0.0)
                .collect()
        };
        for site in 0..4 {
            max_tun = max_tun.max(tunneling_current(rho.matrix(), &h, site, 0, 1, &clock).unwrap().abs());
            max_th = max_th.max(thermal_current(rho.matrix(), &transitions, site, 0, 1, &clock).unwrap().abs());
            max_th_t0 = max_th_t0
                .max(thermal_current(rho.matrix(), &t0_transitions, site, 0, 1, &clock).unwrap().abs());
        }
        println!("standard ground f={f}: max|Jtun|={max_tun:.3e} max|Jth(β)|={max_th:.3e} max|Jth(T=0)|={max_th_t0:.3e}");
    }
}

fn appc() {
    // rotated-model ground-state tunneling current
    for m in [4usize, 6] {
        let clock = ClockParams::new(3, m).unwrap();
        let params = CcmParams::staggered(clock, 0.3, PI / 2.0, Variant::Rotated).unwrap();
        let grid = [0.1, 0.3, 0.44, 0.47, 0.5, 0.6, 0.9];
        let t0 = Instant::now();
        let curve = ground_tunneling_current(&params, &grid).unwrap();
        for (f, per) in &curve {
            println!(
                "M={m} f={f}: odd={:+.5e} even={:+.5e} (sum={:+.2e})",
                per[0],
                per[1],
                per.iter().sum::<f64>()
            );
        }
        println!("  took {:.1?}", t0.elapsed());
    }
}

fn binder() {
    for (label, staggered) in [("homogeneous", false), ("staggered", true)] {
        println!("== {label} φ=π/8");
        let grid: Vec<f64> = (0..13).map(|i| 0.40 + 0.01 * i as f64).collect();
        let mut curves = Vec::new();
        for m in [4usize, 6, 8] {
            let clock = ClockParams::new(3, m).unwrap();
            let t0 = Instant::now();
            let mut pts = Vec::new();
            for &f in &grid {
                let params = if staggered {
                    CcmParams::staggered(clock, f, PI / 8.0, Variant::Rotated).unwrap()
                } else {
                    CcmParams::homogeneous(clock, f, PI / 8.0, Variant::Rotated).unwrap()
                };
                pts.push(binder_point(&params).unwrap());
            }
            println!(
                "M={m}: B(0.40)={:.4} B(0.46)={:.4} B(0.52)={:.4}  [{:.1?}]",
                pts[0].binder,
                pts[6].binder,
                pts[12].binder,
                t0.elapsed()
            );
            curves.push((m, pts));
        }
        for i in 0..curves.len() {
            for j in (i + 1)..curves.len() {
                let x = binder_crossing(&curves[i].1, &curves[j].1);
                println!("crossing M{} vs M{}: {x:?}", curves[i].0, curves[j].0);
            }
        }
    }
}

fn m6() {
    let t0 = Instant::now();
    println!("building M=6 NESS at f=0.5 ...");
    let (clock, h, _, transitions, l, rho) = ness(6, 0.5, PI / 2.0, 1.0, 1.1);
    println!("M=6 solve took {:.1?}, superop nnz = {}", t0.elapsed(), l.superop().nnz());
    let rec = steady_currents(rho.matrix(), &h, &transitions, &clock).unwrap();
    println!("M=6: total_tun={:+.5e} total_th={:+.5e}", rec.total_tunneling, rec.total_thermal);
    let (clock4, h4, _, tr4, _, rho4) = ness(4, 0.5, PI / 2.0, 1.0, 1.1);
    let rec4 = steady_currents(rho4.matrix(), &h4, &tr4, &clock4).unwrap();
    println!("M=4: total_tun={:+.5e} total_th={:+.5e}", rec4.total_tunneling, rec4.total_thermal);
}

fn sus() {
    let clock = ClockParams::new(3, 4).unwrap();
    for f in [0.2, 0.45, 0.7] {
        let params = CcmParams::staggered(clock, f, PI / 2.0, Variant::Standard).unwrap();
        let (dj, di) =
            current_susceptibility(&params, 1.0, 0.2, 1e-3, &SteadyStateOptions::default()).unwrap();
        println!("f={f}: dJth/dT={dj:+.5e}  dI/dT={di:+.5e}");
    }
    // φ = kπ/3: current susceptibility zero, information one not
    let params = CcmParams::staggered(clock, 0.5, PI / 3.0, Variant::Standard).unwrap();
    let (dj, di) =
        current_susceptibility(&params, 1.0, 0.2, 1e-3, &SteadyStateOptions::default()).unwrap();
    println!("phi=π/3: dJth/dT={dj:+.3e}  dI/dT={di:+.3e}");
    let _ = Array2::<Complex64>::zeros((1, 1));
}
