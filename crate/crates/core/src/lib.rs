//! Dissipative chains of quantum clock rotors.
//!
//! The crate builds chiral clock Hamiltonians on periodic rings of
//! N_s-level rotors, couples every rotor to its own thermal bath through a
//! local GKLS master equation, solves for the non-equilibrium steady state,
//! and evaluates the quantities that characterise it: rotational
//! (tunneling/thermal) currents, diagonal and non-diagonal heat flows,
//! entropy production, and a set of correlation measures (entropy,
//! negativity, mutual information, coherence, global discord). A ground-state
//! toolbox covers symmetry-sector eigensolves, order-parameter moments,
//! Binder cumulants and gap scaling for locating the quantum critical point.

pub mod clockops;
pub mod error;
pub mod groundstate;
pub mod infotheory;
pub mod lindblad;
mod linalg;
pub mod model;
pub mod observables;
pub mod sparse;

pub use clockops::{BasisState, ClockParams, ManyBodyOperator};
pub use error::{Error, Result};
pub use model::{CcmParams, HamiltonianSplit, SectorProjector, Variant};
