use qrotor::clockops::ClockParams;
use qrotor::lindblad::*;
use qrotor::model::*;
use qrotor::observables::*;
use std::f64::consts::PI;

fn main() {
    let clock = ClockParams::new(3, 4).unwrap();
    let params = CcmParams::staggered(clock, 0.0, PI / 2.0, Variant::Standard).unwrap();
    let h = build_hamiltonian(&params).unwrap();
    let baths = BathConfig::staggered(1.0, 1.1, 0.2, 4).unwrap();
    let transitions = enumerate_transitions(&h, &params, &baths).unwrap();
    let l = build_liouvillian(&h, &transitions).unwrap();
    let sol = steady_state(&l).unwrap();
    println!("residual = {:.3e}  method = {:?}", sol.residual, sol.method);
    let rec = steady_currents(sol.rho.matrix(), &h, &transitions, &clock).unwrap();
    println!("thermal per rotor: {:?}", rec.per_rotor_thermal);
    println!("tunnel  per rotor: {:?}", rec.per_rotor_tunneling);
}
