//! Exact finite-volume machinery for nearest-neighbor spin models on Cayley
//! trees: Boltzmann kernels, their composition and compatibility checks,
//! boundary-law fixed points and the splitting measures they induce.
//!
//! Everything here is enumeration-exact at desk scale. Kernels are full
//! probability tables over the configurations of a ball, normalized in the
//! log domain, so consistency statements can be certified to near machine
//! precision instead of sampled.
//!
//! # Modules
//!
//! - [`topology`] — finite truncations of the order-`k` Cayley tree: spheres,
//!   balls, successor sets, distances.
//! - [`spins`] — spin spaces, configurations on vertex subsets, exhaustive
//!   enumeration and the pointwise partial order.
//! - [`hamiltonian`] — pair interactions (Ising, Potts, table-backed models),
//!   the range-1 potential and finite-volume Hamiltonians.
//! - [`specification`] — exact kernels of both boundary flavors, kernel
//!   composition, and the enumeration-based consistency certificates.
//! - [`boundary_law`] — the analytic consistency condition, the transfer
//!   function `f(h, theta)`, homogeneous fixed points and the bifurcation
//!   threshold at `theta = 1/k`.
//! - [`measures`] — marginal families built from a boundary field, projection
//!   consistency and magnetization observables.
//! - [`cli`] — the `gibbslab` binary: `tree`, `verify-spec`, `verify-compat`,
//!   `check-law`, `solve`, `scan`, `marginals`.
//!
//! # Examples
//!
//! Each major capability has a runnable example:
//!
//! ```bash
//! cargo run --release -p gibbslab --example tree_info
//! cargo run --release -p gibbslab --example exact_kernels
//! cargo run --release -p gibbslab --example specification_check
//! cargo run --release -p gibbslab --example boundary_law_solutions
//! cargo run --release -p gibbslab --example compatibility_equivalence
//! cargo run --release -p gibbslab --example splitting_measures
//! cargo run --release -p gibbslab --example phase_diagram_scan
//! ```

pub mod boundary_law;
pub mod cli;
pub mod error;
pub mod hamiltonian;
pub mod measures;
mod numeric;
pub mod specification;
pub mod spins;
pub mod topology;

pub use boundary_law::{
    check_functional_equation, critical_theta, functional_equation_residual, ising_f,
    ising_field_from_boundary, solve_homogeneous, splitting_field, BoundaryField, FixedPointReport,
    IsingParameters, Stability,
};
pub use error::{GibbsError, Result};
pub use hamiltonian::{
    hamiltonian_volume, is_finite_range, pair_potential, FieldRule, ModelSpec, PairInteraction,
    PairPotential, Potential,
};
pub use measures::{build_marginals, check_kolmogorov_consistency, project, MarginalFamily};
pub use specification::{
    check_compatibility_bruteforce, check_specification, compose, kernel_config_boundary,
    kernel_field_boundary, ConsistencyCertificate, FiniteVolumeKernel, KernelFlavor,
};
pub use spins::{enumerate_configs, Configuration, SpinSpace, StateSpace, DEFAULT_MAX_STATES};
pub use topology::{CayleyTree, VertexId, DEFAULT_MAX_VERTICES};
