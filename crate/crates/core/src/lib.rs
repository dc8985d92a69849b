//! Exact diagonalization of the S=1/2 XYZ model in a uniform field on
//! periodic chains and two-leg ladders, with pairwise and single-site
//! entanglement estimators.
//!
//! The crate is organized bottom-up:
//!
//! * [`lattice`]: geometry, bonds, sublattices, translation classes of pairs
//! * [`hamiltonian`]: model parameters, state vectors, matrix-free `H v`
//! * [`eigensolver`]: parity-resolved Lanczos ground states
//! * [`observables`]: magnetizations, correlators, reduced density matrices
//! * [`entanglement`]: one-tangle, concurrence, `tau2`, entanglement ratio
//! * [`analytic`]: factorized product state and free-fermion solution
//! * [`scan`]: field sweeps and the factorizing/critical field detectors
//!
//! ```
//! use spin_ent::{Lattice, ModelParams, SolverOptions, lanczos_ground};
//!
//! let lattice = Lattice::chain(4)?;
//! let params = ModelParams::new(1.0, 1.0, 0.0)?;
//! let gs = lanczos_ground(&params, &lattice, &SolverOptions::default())?;
//! assert!((gs.energy + 2.0).abs() < 1e-10);
//! # Ok::<(), spin_ent::Error>(())
//! ```

pub mod analytic;
pub mod eigensolver;
pub mod entanglement;
mod error;
pub mod hamiltonian;
pub mod lattice;
pub mod observables;
pub mod scan;

pub use analytic::{
    build_factorized_state, factorizing_field, free_fermion_solution, overlap, FactorizedAnsatz,
    FreeFermionSolution,
};
pub use eigensolver::{lanczos_ground, low_spectrum, GroundStateResult, SolverOptions};
pub use entanglement::{
    concurrence_formula, concurrence_wootters, entanglement_ratio, one_tangle, tau2,
    ConcurrenceTriple, EntanglementReport, Tau1Variant,
};
pub use error::{Error, Result};
pub use hamiltonian::{
    apply_hamiltonian, dense_hamiltonian, parity_of_basis_state, Frame, ModelParams, StateVector,
};
pub use lattice::{pair_classes, Lattice, LatticeKind, PairClass, PairLabel};
pub use observables::{
    correlation_length_fit, correlator, magnetization, mx_longrange, rdm, Axis, CorrelatorSet,
    ReducedDensityMatrix,
};
pub use scan::{
    analyze_point, field_sweep, locate_critical_dip, locate_factorizing_field, CriticalDip,
    FactorizationReport, Sweep, SweepRow,
};
