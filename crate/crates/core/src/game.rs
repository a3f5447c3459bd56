//! Payoff families, strategy profiles, gradients, and sampling-based
//! validation of the structural assumptions the solvers rely on: payoffs
//! strictly concave in a player's own strategy, concave along proportional
//! deviations, and externalities that all point one way.

use crate::error::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Hard cap on the number of players; everything here is dense `n x n`.
pub const MAX_PLAYERS: usize = 64;

/// Step for second-difference checks in [`validate_game`]. Chosen large
/// enough that cancellation noise (~eps/h^2) stays below the thresholds.
const H_SECOND: f64 = 5e-4;

/// Own-strategy curvature must be at least this negative at sampled points.
const OWN_CONCAVITY_MAX: f64 = -1e-6;

/// Second differences along rays may exceed zero by at most this slack.
const RAY_CONVEXITY_SLACK: f64 = 1e-6;

/// Cross-partials smaller than this (relative to payoff scale) count as
/// zero rather than as evidence for either externality sign.
const CROSS_SIGN_BAND: f64 = 1e-6;

/// A nonnegative strategy profile, one coordinate per player.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile(Vec<f64>);

impl Profile {
    /// Validates finiteness and nonnegativity.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidProfile("empty profile".into()));
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidProfile(format!(
                    "coordinate {i} is not finite"
                )));
            }
            if *v < 0.0 {
                return Err(Error::InvalidProfile(format!(
                    "coordinate {i} is negative ({v})"
                )));
            }
        }
        Ok(Profile(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// True when every coordinate is strictly positive.
    pub fn is_strictly_positive(&self) -> bool {
        self.0.iter().all(|v| *v > 0.0)
    }
}

impl std::ops::Deref for Profile {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Dense matrix of payoff gradients: row `i` is the gradient of player `i`'s
/// payoff with respect to the full profile.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientMatrix {
    n: usize,
    data: Vec<f64>,
}

impl GradientMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in &rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(GradientMatrix { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Largest Euclidean row norm; the natural scale of the matrix.
    pub fn max_row_norm(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }
}

/// Anything that exposes per-player payoffs and analytic gradients. The base
/// [`Game`] implements this, as do its shifted and rescaled wrappers.
pub trait PayoffModel {
    fn num_players(&self) -> usize;

    /// Payoff of `player` at profile `x` (length must equal `num_players`).
    fn payoff(&self, x: &[f64], player: usize) -> Result<f64>;

    /// Gradient of `player`'s payoff with respect to the full profile.
    fn gradient_row(&self, x: &[f64], player: usize) -> Result<Vec<f64>>;

    fn payoffs(&self, x: &[f64]) -> Result<Vec<f64>> {
        (0..self.num_players()).map(|i| self.payoff(x, i)).collect()
    }

    fn gradient(&self, x: &[f64]) -> Result<GradientMatrix> {
        let rows = (0..self.num_players())
            .map(|i| self.gradient_row(x, i))
            .collect::<Result<Vec<_>>>()?;
        GradientMatrix::from_rows(rows)
    }
}

/// The built-in payoff families.
///
/// All four share the same shape: each player gains from their own strategy
/// with strictly diminishing returns, while everyone else's strategies enter
/// through a one-signed externality.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `U_i = a_i x_i - (b_i/2) x_i^2 + gamma * sum_{j != i} x_j`
    QuadraticPublicGoods {
        a: Vec<f64>,
        b: Vec<f64>,
        gamma: f64,
    },
    /// `U_i = x_i (p0 - p1 * sum_j x_j) - cost_i x_i`
    LinearCournot { p0: f64, p1: f64, cost: Vec<f64> },
    /// `U_i = x_i (sum_j x_j)^(beta-1) - alpha x_i` with `beta` in (0,1);
    /// the payoff is defined as 0 at the zero profile (its limit).
    Commons { alpha: f64, beta: f64 },
    /// Quadratic own terms with per-pair externality coefficients:
    /// `U_i = a_i x_i - (b_i/2) x_i^2 + sum_{j != i} gamma[i][j] x_j`.
    CustomQuadratic {
        a: Vec<f64>,
        b: Vec<f64>,
        gamma: Vec<Vec<f64>>,
    },
}

/// A validated game: player count, payoff family, and the declared sign of
/// the externalities (+1 or -1), which [`validate_game`] checks numerically.
#[derive(Debug, Clone, PartialEq)]
pub struct Game {
    n: usize,
    family: Family,
    externality_sign: i8,
}

fn check_vec(name: &str, v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::InvalidGame(format!(
            "parameter `{name}` has length {}, expected {n}",
            v.len()
        )));
    }
    if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidGame(format!(
            "parameter `{name}` contains a non-finite entry ({bad})"
        )));
    }
    Ok(())
}

impl Game {
    pub fn new(n: usize, family: Family, externality_sign: i8) -> Result<Self> {
        if !(2..=MAX_PLAYERS).contains(&n) {
            return Err(Error::InvalidGame(format!(
                "player count {n} outside 2..={MAX_PLAYERS}"
            )));
        }
        if externality_sign != 1 && externality_sign != -1 {
            return Err(Error::InvalidGame(format!(
                "externality_sign must be +1 or -1, got {externality_sign}"
            )));
        }
        match &family {
            Family::QuadraticPublicGoods { a, b, gamma } => {
                check_vec("a", a, n)?;
                check_vec("b", b, n)?;
                if b.iter().any(|bi| *bi <= 0.0) {
                    return Err(Error::InvalidGame("all b_i must be positive".into()));
                }
                if !gamma.is_finite() {
                    return Err(Error::InvalidGame("gamma must be finite".into()));
                }
            }
            Family::LinearCournot { p0, p1, cost } => {
                check_vec("cost", cost, n)?;
                if !(p0.is_finite() && *p0 > 0.0) || !(p1.is_finite() && *p1 > 0.0) {
                    return Err(Error::InvalidGame("p0 and p1 must be positive".into()));
                }
                if cost.iter().any(|c| *c < 0.0) {
                    return Err(Error::InvalidGame("costs must be nonnegative".into()));
                }
            }
            Family::Commons { alpha, beta } => {
                if !(alpha.is_finite() && *alpha > 0.0) {
                    return Err(Error::InvalidGame("alpha must be positive".into()));
                }
                if !(*beta > 0.0 && *beta < 1.0) {
                    return Err(Error::InvalidGame("beta must lie in (0, 1)".into()));
                }
            }
            Family::CustomQuadratic { a, b, gamma } => {
                check_vec("a", a, n)?;
                check_vec("b", b, n)?;
                if b.iter().any(|bi| *bi <= 0.0) {
                    return Err(Error::InvalidGame("all b_i must be positive".into()));
                }
                if gamma.len() != n {
                    return Err(Error::InvalidGame(format!(
                        "gamma must be an {n}x{n} matrix"
                    )));
                }
                for (i, row) in gamma.iter().enumerate() {
                    check_vec("gamma row", row, n)?;
                    if row[i] != 0.0 {
                        return Err(Error::InvalidGame(format!(
                            "gamma[{i}][{i}] must be 0 (own terms live in a, b)"
                        )));
                    }
                }
            }
        }
        Ok(Game {
            n,
            family,
            externality_sign,
        })
    }

    pub fn quadratic_public_goods(a: Vec<f64>, b: Vec<f64>, gamma: f64) -> Result<Self> {
        let n = a.len();
        let sign = if gamma < 0.0 { -1 } else { 1 };
        Game::new(n, Family::QuadraticPublicGoods { a, b, gamma }, sign)
    }

    pub fn linear_cournot(p0: f64, p1: f64, cost: Vec<f64>) -> Result<Self> {
        let n = cost.len();
        Game::new(n, Family::LinearCournot { p0, p1, cost }, -1)
    }

    pub fn commons(n: usize, alpha: f64, beta: f64) -> Result<Self> {
        Game::new(n, Family::Commons { alpha, beta }, -1)
    }

    pub fn custom_quadratic(
        a: Vec<f64>,
        b: Vec<f64>,
        gamma: Vec<Vec<f64>>,
        sign: i8,
    ) -> Result<Self> {
        let n = a.len();
        Game::new(n, Family::CustomQuadratic { a, b, gamma }, sign)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn externality_sign(&self) -> i8 {
        self.externality_sign
    }

    fn check_args(&self, x: &[f64], player: usize) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        if player >= self.n {
            return Err(Error::PlayerIndex {
                index: player,
                n: self.n,
            });
        }
        Ok(())
    }
}

impl PayoffModel for Game {
    fn num_players(&self) -> usize {
        self.n
    }

    fn payoff(&self, x: &[f64], player: usize) -> Result<f64> {
        self.check_args(x, player)?;
        let i = player;
        let u = match &self.family {
            Family::QuadraticPublicGoods { a, b, gamma } => {
                let others: f64 = x
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, v)| v)
                    .sum();
                a[i] * x[i] - 0.5 * b[i] * x[i] * x[i] + gamma * others
            }
            Family::LinearCournot { p0, p1, cost } => {
                let total: f64 = x.iter().sum();
                x[i] * (p0 - p1 * total) - cost[i] * x[i]
            }
            Family::Commons { alpha, beta } => {
                let total: f64 = x.iter().sum();
                if total <= 0.0 {
                    0.0
                } else {
                    x[i] * total.powf(beta - 1.0) - alpha * x[i]
                }
            }
            Family::CustomQuadratic { a, b, gamma } => {
                let cross: f64 = x
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(j, v)| gamma[i][j] * v)
                    .sum();
                a[i] * x[i] - 0.5 * b[i] * x[i] * x[i] + cross
            }
        };
        if !u.is_finite() {
            return Err(Error::NonFinite(format!("payoff of player {i} at {x:?}")));
        }
        Ok(u)
    }

    fn gradient_row(&self, x: &[f64], player: usize) -> Result<Vec<f64>> {
        self.check_args(x, player)?;
        let i = player;
        let row = match &self.family {
            Family::QuadraticPublicGoods { a, b, gamma } => (0..self.n)
                .map(|j| if j == i { a[i] - b[i] * x[i] } else { *gamma })
                .collect(),
            Family::LinearCournot { p0, p1, cost } => {
                let total: f64 = x.iter().sum();
                (0..self.n)
                    .map(|j| {
                        let own = if j == i {
                            p0 - p1 * total - cost[i]
                        } else {
                            0.0
                        };
                        own - p1 * x[i]
                    })
                    .collect()
            }
            Family::Commons { alpha, beta } => {
                let total: f64 = x.iter().sum();
                if total <= 0.0 {
                    return Err(Error::GradientSingular(
                        "commons gradient at the zero profile".into(),
                    ));
                }
                let shared = (beta - 1.0) * x[i] * total.powf(beta - 2.0);
                (0..self.n)
                    .map(|j| {
                        let own = if j == i {
                            total.powf(beta - 1.0) - alpha
                        } else {
                            0.0
                        };
                        own + shared
                    })
                    .collect()
            }
            Family::CustomQuadratic { a, b, gamma } => (0..self.n)
                .map(|j| {
                    if j == i {
                        a[i] - b[i] * x[i]
                    } else {
                        gamma[i][j]
                    }
                })
                .collect::<Vec<f64>>(),
        };
        if row.iter().any(|v: &f64| !v.is_finite()) {
            return Err(Error::NonFinite(format!("gradient of player {i} at {x:?}")));
        }
        Ok(row)
    }
}

/// One structural violation found by [`validate_game`].
#[derive(Debug, Clone)]
pub enum Violation {
    /// Own-strategy second partial not strictly negative.
    OwnConcavity {
        player: usize,
        profile: Vec<f64>,
        second: f64,
    },
    /// Payoff convex along a proportional deviation a -> U_i(a * x).
    RayConcavity {
        player: usize,
        profile: Vec<f64>,
        a: f64,
        second: f64,
    },
    /// An externality derivative dU_i/dx_j whose sign contradicts the
    /// declared one.
    ExternalitySign {
        player: usize,
        partner: usize,
        profile: Vec<f64>,
        cross: f64,
    },
    /// Externality derivatives of both signs observed across the sampled
    /// profiles: the game's spillovers are not unidirectional.
    NonUnidirectional { positive: usize, negative: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::OwnConcavity { player, second, .. } => write!(
                f,
                "player {player}: own-strategy second partial {second:.3e} not strictly negative"
            ),
            Violation::RayConcavity { player, a, second, .. } => write!(
                f,
                "player {player}: payoff convex along proportional deviation at a={a} (second difference {second:.3e})"
            ),
            Violation::ExternalitySign { player, partner, cross, .. } => write!(
                f,
                "players ({player},{partner}): externality derivative {cross:.3e} contradicts the declared sign"
            ),
            Violation::NonUnidirectional { positive, negative } => write!(
                f,
                "non-unidirectional externalities: {positive} positive and {negative} negative derivatives observed"
            ),
        }
    }
}

/// Outcome of [`validate_game`].
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub samples: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the assumptions the equilibrium machinery needs, by finite
/// differences at `samples` random interior profiles (coordinates drawn
/// uniformly from [0.1, 3]):
///
/// 1. strictly negative own-strategy second partials,
/// 2. concavity along proportional deviations `a -> U_i(a * x)`,
/// 3. externality derivatives `dU_i/dx_j` consistent with the declared
///    sign, and all of one sign overall.
///
/// Joint concavity in the full profile is deliberately *not* required: the
/// Cournot and commons families fail it while still satisfying everything
/// the solvers use (their proportional-deviation slices and their payoff
/// sum are concave).
pub fn validate_game(game: &Game, samples: usize, seed: u64) -> Result<ValidationReport> {
    let n = game.num_players();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = Vec::new();
    let mut positive_crosses = 0usize;
    let mut negative_crosses = 0usize;
    let h = H_SECOND;

    for _ in 0..samples {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..3.0)).collect();
        let scale = {
            let us = game.payoffs(&x)?;
            us.iter().fold(1.0f64, |m, u| m.max(u.abs()))
        };

        for i in 0..n {
            // Own-strategy curvature via a central second difference.
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let second =
                (game.payoff(&xp, i)? - 2.0 * game.payoff(&x, i)? + game.payoff(&xm, i)?) / (h * h);
            if second > OWN_CONCAVITY_MAX {
                violations.push(Violation::OwnConcavity {
                    player: i,
                    profile: x.clone(),
                    second,
                });
            }

            // Concavity along the proportional deviation a -> U_i(a * x).
            for &a in &[0.25, 0.5, 1.0, 1.75, 2.5] {
                let eval = |t: f64| -> Result<f64> {
                    let scaled: Vec<f64> = x.iter().map(|v| t * v).collect();
                    game.payoff(&scaled, i)
                };
                let second = (eval(a + h)? - 2.0 * eval(a)? + eval(a - h)?) / (h * h);
                if second > RAY_CONVEXITY_SLACK * scale {
                    violations.push(Violation::RayConcavity {
                        player: i,
                        profile: x.clone(),
                        a,
                        second,
                    });
                }
            }

            // Externality direction against the declared sign: the first
            // partial dU_i/dx_j says how partner j's action moves player
            // i's payoff.
            for j in 0..n {
                if j == i {
                    continue;
                }
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += h;
                xm[j] -= h;
                let cross = (game.payoff(&xp, i)? - game.payoff(&xm, i)?) / (2.0 * h);
                if cross.abs() <= CROSS_SIGN_BAND * scale {
                    continue; // numerically zero: consistent with either sign
                }
                if cross > 0.0 {
                    positive_crosses += 1;
                } else {
                    negative_crosses += 1;
                }
                if cross * f64::from(game.externality_sign()) < 0.0 {
                    violations.push(Violation::ExternalitySign {
                        player: i,
                        partner: j,
                        profile: x.clone(),
                        cross,
                    });
                }
            }
        }
    }

    if positive_crosses > 0 && negative_crosses > 0 {
        violations.push(Violation::NonUnidirectional {
            positive: positive_crosses,
            negative: negative_crosses,
        });
    }

    Ok(ValidationReport {
        samples,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn qpg() -> Game {
        Game::quadratic_public_goods(vec![1.0, 1.0], vec![1.0, 1.0], 0.5).unwrap()
    }

    #[test]
    fn quadratic_payoff_at_unit_profile() {
        // 1*1 - 0.5*1 + 0.5*1 = 1
        let g = qpg();
        assert_abs_diff_eq!(g.payoff(&[1.0, 1.0], 0).unwrap(), 1.0);
        assert_abs_diff_eq!(g.payoff(&[1.0, 1.0], 1).unwrap(), 1.0);
    }

    #[test]
    fn cournot_payoff_matches_hand_value() {
        // x_1 (p0 - p1 * 6) - c x_1 = 3 * (10 - 6) - 3 = 9
        let g = Game::linear_cournot(10.0, 1.0, vec![1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(g.payoff(&[3.0, 3.0], 0).unwrap(), 9.0);
    }

    #[test]
    fn zero_profile_payoffs_vanish() {
        let zero = [0.0, 0.0];
        assert_eq!(qpg().payoff(&zero, 0).unwrap(), 0.0);
        let cournot = Game::linear_cournot(10.0, 1.0, vec![1.0, 1.0]).unwrap();
        assert_eq!(cournot.payoff(&zero, 1).unwrap(), 0.0);
        let commons = Game::commons(2, 0.25, 0.5).unwrap();
        assert_eq!(commons.payoff(&zero, 0).unwrap(), 0.0);
    }

    #[test]
    fn quadratic_gradient_rows() {
        let g = qpg();
        let grad = g.gradient(&[1.25, 2.0]).unwrap();
        assert_eq!(grad.row(0), &[-0.25, 0.5]);
        assert_eq!(grad.row(1), &[0.5, -1.0]);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let games = [
            qpg(),
            Game::linear_cournot(10.0, 1.0, vec![1.0, 2.0]).unwrap(),
            Game::commons(2, 0.25, 0.5).unwrap(),
            Game::custom_quadratic(
                vec![1.0, 2.0],
                vec![1.0, 0.5],
                vec![vec![0.0, 0.3], vec![0.7, 0.0]],
                1,
            )
            .unwrap(),
        ];
        let x = [1.3, 0.8];
        let h = 1e-5;
        for g in &games {
            for i in 0..2 {
                let row = g.gradient_row(&x, i).unwrap();
                for j in 0..2 {
                    let mut xp = x;
                    let mut xm = x;
                    xp[j] += h;
                    xm[j] -= h;
                    let fd = (g.payoff(&xp, i).unwrap() - g.payoff(&xm, i).unwrap()) / (2.0 * h);
                    assert_abs_diff_eq!(row[j], fd, epsilon = 1e-6 * (1.0 + row[j].abs()));
                }
            }
        }
    }

    #[test]
    fn commons_gradient_singular_at_zero() {
        let g = Game::commons(2, 0.25, 0.5).unwrap();
        assert!(matches!(
            g.gradient_row(&[0.0, 0.0], 0),
            Err(Error::GradientSingular(_))
        ));
    }

    #[test]
    fn player_index_checked() {
        assert!(matches!(
            qpg().payoff(&[1.0, 1.0], 2),
            Err(Error::PlayerIndex { index: 2, n: 2 })
        ));
    }

    #[test]
    fn profile_rejects_negative_and_non_finite() {
        assert!(Profile::new(vec![1.0, -0.1]).is_err());
        assert!(Profile::new(vec![f64::NAN, 1.0]).is_err());
        assert!(Profile::new(vec![]).is_err());
    }

    #[test]
    fn validate_accepts_all_builtin_families() {
        let games = [
            qpg(),
            Game::linear_cournot(10.0, 1.0, vec![1.0, 1.0]).unwrap(),
            Game::commons(3, 0.25, 0.5).unwrap(),
        ];
        for g in &games {
            let report = validate_game(g, 50, 7).unwrap();
            assert!(
                report.passed(),
                "unexpected violations: {:?}",
                report.violations
            );
        }
    }

    #[test]
    fn validate_flags_mixed_sign_externalities() {
        let g = Game::custom_quadratic(
            vec![1.0, 1.0],
            vec![1.0, 1.0],
            vec![vec![0.0, 0.5], vec![-0.5, 0.0]],
            1,
        )
        .unwrap();
        let report = validate_game(&g, 20, 7).unwrap();
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::NonUnidirectional { .. })));
    }

    #[test]
    fn validate_tolerates_zero_externalities() {
        let g = Game::quadratic_public_goods(vec![1.0, 1.0], vec![1.0, 1.0], 0.0).unwrap();
        let report = validate_game(&g, 20, 7).unwrap();
        assert!(report.passed());
    }

    #[test]
    fn rejects_structurally_bad_parameters() {
        assert!(Game::quadratic_public_goods(vec![1.0], vec![1.0], 0.5).is_err()); // n = 1
        assert!(Game::quadratic_public_goods(vec![1.0, 1.0], vec![1.0, 0.0], 0.5).is_err());
        assert!(Game::linear_cournot(0.0, 1.0, vec![1.0, 1.0]).is_err());
        assert!(Game::commons(2, 0.25, 1.0).is_err());
        assert!(Game::new(
            2,
            Family::QuadraticPublicGoods {
                a: vec![1.0, 1.0],
                b: vec![1.0, 1.0],
                gamma: 0.5
            },
            0
        )
        .is_err());
    }
}
