//! Centralized and distributed Barzilai-Borwein gradient methods on strongly
//! convex quadratic networks, with diagnostics that certify the convergence
//! and consensus bounds numerically.

pub mod centralized;
pub mod diagnostics;
pub mod distributed;
pub mod error;
pub mod numerics;
pub mod objectives;
pub mod step;
pub mod topology;

pub use centralized::{solve_centralized, SolverTrace, StepInfo};
pub use diagnostics::{
    c1, c2, check_consensus_bound, classify_convergence, consensus_bound, contraction_bound,
    contraction_bound_distributed, mixing_factor, BoundCheck, Classification, ConvergenceVerdict,
    IterationRecord, TERMINATION_ERR,
};
pub use distributed::{
    consensus_round, local_bb_step, record_round, run_distributed, AgentState, DistributedTrace,
    NetworkState,
};
pub use error::{Error, Result};
pub use numerics::SymMatrix;
pub use objectives::{
    random_least_squares, random_network_objective, random_spd_with_spectrum,
    LeastSquaresObjective, NetworkObjective, Objective, QuadraticAgentObjective,
};
pub use step::{
    bb1_step, bb2_step, fallback_step, safeguard, BbOutcome, ClampMode, StepChoice, StepRule,
    StepVariant, CURVATURE_BREACH_DELTA,
};
pub use topology::{
    make_graph, metropolis_weights, second_eigenvalue, sinkhorn_random_weights, Graph, GraphKind,
    MixingMatrix,
};
