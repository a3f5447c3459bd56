//! Error type shared by every solver and construction in this crate.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Game construction or validation rejected the definition itself.
    #[error("invalid game: {0}")]
    InvalidGame(String),

    /// A player index outside `0..n`.
    #[error("player index {index} out of range for {n} players")]
    PlayerIndex { index: usize, n: usize },

    /// A profile or parameter vector whose length does not match the game.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Profiles must be finite and componentwise nonnegative.
    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    /// A gradient was requested where the payoff is not differentiable
    /// (e.g. the commons family at the zero profile).
    #[error("gradient undefined at this profile: {0}")]
    GradientSingular(String),

    /// An iterative solver ran out of iterations. Carries the last iterate
    /// so callers can inspect how far it got.
    #[error("no convergence after {iterations} iterations (last residual {residual:.3e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        last: Vec<f64>,
    },

    /// The golden-section refinement and the dense-grid scan disagree, which
    /// signals a non-unimodal (non-concave) objective along the scanned line.
    #[error("1-D search not unimodal: golden-section at {refined:.6e}, grid at {grid:.6e}")]
    NonUnimodal { refined: f64, grid: f64 },

    /// A scalarized optimum landed on the boundary; the operation only
    /// handles interior points.
    #[error("non-interior solution: {0}")]
    NonInterior(String),

    /// The tangent space at this point contains no strictly positive
    /// direction, so no feasible lower-bound shift exists.
    #[error("no interior shift direction at this point")]
    NoInteriorShiftDirection,

    /// The point is not efficient to the requested tolerance (empty
    /// gradient-matrix nullspace).
    #[error("point not efficient to tolerance: {0}")]
    NotEfficient(String),

    /// A root-finder converged to the zero profile or a profile with a
    /// non-positive coordinate.
    #[error("degenerate root: {0}")]
    DegenerateRoot(String),

    /// A constructed equilibrium failed its own definitional verification.
    /// This indicates an internal inconsistency, not bad input.
    #[error("verification failed: {0}")]
    VerificationFailed(String),

    /// A selection criterion found no admissible point (e.g. nothing
    /// dominates the disagreement payoffs).
    #[error("empty admissible set: {0}")]
    EmptyAdmissibleSet(String),

    /// Solver configuration with non-positive tolerances or absurd sizes.
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    /// NaN or infinity encountered mid-computation.
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
}

pub type Result<T> = std::result::Result<T, Error>;
