//! Non-Hermitian, CP-symmetric Dirac Hamiltonians in 1+1 dimensions.
//!
//! The crate covers a catalog of superpotentials W(x), the discretized
//! two-component Hamiltonian on a symmetric Dirichlet grid, its C, P and T
//! symmetry diagnostics, stationary spinor solutions at real energy, and a
//! verification suite that checks the pieces against each other.

pub mod error;
pub mod hamiltonian;
pub mod ode;
pub mod potential;
pub mod quadrature;
pub mod stationary;
pub mod symmetry;
pub mod verification;

pub use error::{Error, Result};
pub use hamiltonian::{
    build_cp_class, build_hamiltonian, reality_report, spectrum, DiscreteDiracOperator,
    EnergySpectrum, GridSpec, RealityReport,
};
pub use potential::{
    catalog, Branch, CatalogRow, CustomPotential, Family, ParamConstraint, PotentialInstance,
    Subclass,
};
pub use stationary::{
    classify_localization, solve, BoundaryConditionAtOrigin, Localization, Route, SolveSettings,
    SpinorSolution,
};
pub use symmetry::{symmetry_report, SymmetryReport};
pub use verification::{run_suite, CheckEntry, CheckStatus, Fault, SuiteConfig, VerificationReport};
