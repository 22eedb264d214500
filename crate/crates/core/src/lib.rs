//! Feedback equilibria of a two-echelon (farmer, retailer) carbon-reduction
//! differential game with carbon-sink trading.
//!
//! The reduction level `H` evolves as `H' = mu_f E_f + mu_r E_r - delta H`.
//! Three cooperation modes are solved: simultaneous feedback Nash play,
//! retailer-led play with a cost-sharing subsidy, and joint optimisation.
//! Every routine is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases are what most callers want.
//!
//! ```
//! use carbon_sink_game::{solve, GameMode, ModelParams64, SolverConfig64};
//!
//! let params = ModelParams64::baseline();
//! let sol = solve(GameMode::Centralized, &params, &SolverConfig64::default()).unwrap();
//! assert!(sol.alpha < 0.0);
//! assert!((sol.steady_state - 15.5083).abs() < 1e-3);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail these checks

pub mod error;
pub mod model;
pub mod num;
pub mod oracle;
pub mod profit;
pub mod sim;
pub mod solution;
pub mod solver;

pub use error::{GameError, ParamViolation, Result};
pub use model::{DerivedConstants, GameMode, ModelParams, Role, DEFAULT_H0};
pub use num::Scalar;
pub use oracle::{
    equilibrium_check, grid_best_response, leader_perturbation_check, BestResponse, CertificationReport, GridSpec,
    LeaderCertificate, LeaderSampling, RoleCertificate,
};
pub use profit::{discounted_profit, payoff_rates, value_at, PayoffBreakdown};
pub use sim::{exact_trajectory, integrate_trajectory, simulate, steady_state, Integrator, SimConfig, Trajectory};
pub use solution::{
    AffineRule, Backend, ClosedLoop, Controls, Diagnostics, FeedbackPolicy, FollowerConvention, GameSolution,
    QuadraticValue, SubsidyRule,
};
pub use solver::{hjb_residual, max_hjb_residual, solve, SolverConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type ModelParams64 = ModelParams<f64>;
pub type ModelParams32 = ModelParams<f32>;
pub type GameSolution64 = GameSolution<f64>;
pub type GameSolution32 = GameSolution<f32>;
pub type SolverConfig64 = SolverConfig<f64>;
pub type SolverConfig32 = SolverConfig<f32>;
pub type SimConfig64 = SimConfig<f64>;
pub type SimConfig32 = SimConfig<f32>;
pub type Trajectory64 = Trajectory<f64>;
pub type Trajectory32 = Trajectory<f32>;
pub type GridSpec64 = GridSpec<f64>;
pub type GridSpec32 = GridSpec<f32>;
