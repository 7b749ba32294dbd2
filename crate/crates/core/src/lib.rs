//! Product-state approximations for weighted quantum Heisenberg models.
//!
//! The Hamiltonian is `H = sum_e w_e (I - alpha X_i X_j - beta Y_i Y_j - gamma Z_i Z_j)`
//! and the goal is a product state with large energy `tr(H rho)`. The
//! pipeline solves a level-1 moment relaxation of `lambda_max(H)`
//! ([`moment_sdp`]), rounds the Gram vectors to a product state
//! ([`rounding`]), and certifies the result against the relaxation value and,
//! for small `n`, against exact diagonalization ([`oracle`]).

pub mod edge_analysis;
pub mod instance;
pub mod moment_sdp;
pub mod oracle;
pub mod pauli;
pub mod pipeline;
pub mod ratio_numerics;
pub mod rng;
pub mod rounding;

pub use edge_analysis::{EdgeCoeffs, EdgeOptimum};
pub use instance::{generate, Edge, FamilyTag, GenerateParams, GraphKind, Instance, InstanceError};
pub use moment_sdp::{check_feasibility, sdp_objective, solve_moment_sdp, MomentSolution, SdpError, SolverConfig};
pub use oracle::{
    best_product_state, exact_max_eigenvalue, ExactMethod, ExactResult, OracleError, ProductSearchResult,
};
pub use pauli::{product_energy, PauliError, ProductState};
pub use pipeline::{reproduce_constants, run_pipeline, PipelineConfig, PipelineError, RatioReport};
pub use ratio_numerics::{Rank, RatioCurve};
pub use rounding::{caratheodory_split, split_instance, CornerDecomposition, RoundingOutcome, Scheme};
