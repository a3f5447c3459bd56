//! Kantian equilibria of concave social-dilemma games.
//!
//! A profile `x` is a multiplicative Kantian equilibrium (MKE) when no
//! player gains from rescaling *everyone's* action by a common factor:
//! `U_i(x) >= U_i(a * x)` for every `a >= 0` and every player `i`. Under
//! the concavity this crate validates, that is equivalent to the
//! first-order condition `grad U_i(x) . x = 0` for all `i`.
//!
//! The crate solves for such equilibria, sweeps Pareto frontiers of the
//! supported game families, and — the main construction — builds a vector
//! of lower-bound shifts `c` so that any interior Pareto point of the
//! original game reappears as the MKE of the shifted game. Every
//! equilibrium claim is re-checked against a dense 1-D grid oracle before
//! it is reported.

pub mod error;
pub mod export;
pub mod game;
pub mod kantian;
pub mod pareto;
pub mod select;
pub mod shift;
pub mod solve;

pub use error::{Error, Result};
pub use export::{fmt_sig, frontier_csv, plan_csv, report_csv};
pub use game::{
    validate_game, Family, Game, GradientMatrix, PayoffModel, Profile, ValidationReport, Violation,
    MAX_PLAYERS,
};
pub use kantian::{
    mke_residual, solve_mke, solve_nash, verify_mke, verify_nash, EquilibriumKind,
    EquilibriumReport, Verdict, DEFAULT_A_HI,
};
pub use pareto::{
    certify_efficiency, scalarize, sweep_frontier, CertifyOutcome, Frontier, FrontierPoint,
    ParetoPoint, DEFAULT_CERT_TOL, MULTIPLIER_FLOOR,
};
pub use select::{select_point, Criterion, CriterionKind, Selection};
pub use shift::{
    build_shift, orthogonality_defect, plan_geometry, tangent_direction, tangent_line_2d,
    AffineGame, ShiftGeometry, ShiftPlan, ShiftedGame, POSITIVE_MARGIN,
};
pub use solve::{
    argmax_1d, central_gradient, maximize_concave, newton_root, nullspace, SolverConfig,
};
