//! Cross-module invariants checked on randomized game instances.

use kantian_core::{
    certify_efficiency, mke_residual, nullspace, plan_geometry, scalarize, solve_mke,
    sweep_frontier, CertifyOutcome, Game, PayoffModel, SolverConfig, DEFAULT_A_HI,
    DEFAULT_CERT_TOL,
};
use proptest::prelude::*;

/// Agreement between analytic gradients and central differences.
const GRAD_FD_TOL: f64 = 1e-6;
/// `max_i |grad U_i(x_p) . z_star|` after normalization.
const ORTHO_TOL: f64 = 1e-9;
/// `|G v|` for nullspace vectors, relative to the gradient scale.
const NULLSPACE_TOL: f64 = 1e-6;
/// Exact polynomial identities evaluated in floating point.
const IDENTITY_TOL: f64 = 1e-10;
/// Solver agreement for permuted / re-run instances.
const SOLVE_TOL: f64 = 1e-8;

/// Verification scans inside property bodies use a smaller grid than the
/// default so the randomized suites stay fast; the pinned pipeline tests
/// keep the full-resolution oracle.
fn prop_cfg() -> SolverConfig {
    SolverConfig {
        grid_points: 50_001,
        ..SolverConfig::default()
    }
}

fn qpg_params(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>, f64)> {
    (
        prop::collection::vec(0.5..2.0f64, n),
        prop::collection::vec(0.5..2.0f64, n),
        0.05..0.45f64,
    )
}

fn interior_x(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.1..3.0f64, n)
}

fn admissible_weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.2..1.0f64, n)
}

fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1.0)
}

proptest! {
    /// Analytic gradient rows match central differences of the payoff for
    /// every family, at random interior profiles.
    #[test]
    fn gradients_match_central_differences(
        (a, b, gamma) in qpg_params(3),
        cost in prop::collection::vec(0.5..2.0f64, 3),
        alpha in 0.1..0.5f64,
        beta in 0.3..0.7f64,
        x in interior_x(3),
    ) {
        let games = vec![
            Game::quadratic_public_goods(a.clone(), b.clone(), gamma).unwrap(),
            Game::linear_cournot(10.0, 1.0, cost).unwrap(),
            Game::commons(3, alpha, beta).unwrap(),
            Game::custom_quadratic(
                a,
                b,
                vec![
                    vec![0.0, 0.3, 0.1],
                    vec![0.2, 0.0, 0.1],
                    vec![0.1, 0.2, 0.0],
                ],
                1,
            )
            .unwrap(),
        ];
        for game in &games {
            let g = game.gradient(&x).unwrap();
            for i in 0..3 {
                let fd = kantian_core::central_gradient(
                    |y| game.payoff(y, i),
                    &x,
                    1e-6,
                )
                .unwrap();
                for (j, fdj) in fd.iter().enumerate() {
                    prop_assert!(
                        rel_err(g.get(i, j), *fdj) <= GRAD_FD_TOL,
                        "family {:?} dU_{i}/dx_{j}: analytic {} vs fd {}",
                        game.family(),
                        g.get(i, j),
                        fdj,
                    );
                }
            }
        }
    }

    /// For the public-goods family the stationarity residual obeys
    /// `r_i(s x) = s r_i(x) + s (1 - s) b_i x_i^2` exactly: the own term is
    /// quadratic along the ray while the externality term is linear.
    #[test]
    fn qpg_residual_scaling_identity(
        (a, b, gamma) in qpg_params(3),
        x in interior_x(3),
        s in 0.2..3.0f64,
    ) {
        let game = Game::quadratic_public_goods(a, b.clone(), gamma).unwrap();
        let r = mke_residual(&game, &x).unwrap();
        let sx: Vec<f64> = x.iter().map(|v| s * v).collect();
        let rs = mke_residual(&game, &sx).unwrap();
        for i in 0..3 {
            let want = s * r[i] + s * (1.0 - s) * b[i] * x[i] * x[i];
            prop_assert!(
                rel_err(rs[i], want) <= IDENTITY_TOL,
                "player {i}: r(sx) = {} vs identity {}",
                rs[i],
                want,
            );
        }
    }

    /// The shift geometry holds for the whole admissible range of theta:
    /// the gradient rows at the target stay orthogonal to `z_star`, the
    /// split is exact in floating point, and the pieces stay signed.
    #[test]
    fn shift_geometry_for_all_theta(
        (a, b, gamma) in qpg_params(2),
        w in admissible_weights(2),
        theta in 0.01..0.99f64,
    ) {
        let cfg = prop_cfg();
        let game = Game::quadratic_public_goods(a, b, gamma).unwrap();
        let point = scalarize(&game, &w, &cfg).unwrap();
        let geom = plan_geometry(&game, &point.x, theta, &cfg).unwrap();

        let defect = kantian_core::orthogonality_defect(&game, &geom).unwrap();
        prop_assert!(defect <= ORTHO_TOL, "defect {defect}");

        for i in 0..2 {
            prop_assert!(geom.c[i] >= 0.0);
            prop_assert!(geom.z_star[i] > 0.0);
            // Bit-exact split, not approximate.
            prop_assert_eq!(geom.z_star[i] + geom.c[i], geom.x_p[i]);
        }
        let vnorm: f64 = geom.v.iter().map(|t| t * t).sum::<f64>().sqrt();
        prop_assert!((vnorm - 1.0).abs() <= 1e-12);
        prop_assert!(geom.eps >= 0.0 && geom.eps.is_finite());
    }

    /// Nullspace vectors of the gradient matrix at a certified frontier
    /// point: unit length, pairwise orthogonal, and annihilated by G.
    #[test]
    fn frontier_gradient_nullspace_invariants(
        (a, b, gamma) in qpg_params(3),
        w in admissible_weights(3),
    ) {
        let cfg = prop_cfg();
        let game = Game::quadratic_public_goods(a, b, gamma).unwrap();
        let point = scalarize(&game, &w, &cfg).unwrap();
        let g = game.gradient(&point.x).unwrap();
        let basis = nullspace(&g, cfg.rank_tol).unwrap();
        prop_assert!(!basis.is_empty(), "efficient point must have a degenerate gradient matrix");

        let scale = g.max_row_norm().max(1.0);
        for v in &basis {
            let norm: f64 = v.iter().map(|t| t * t).sum::<f64>().sqrt();
            prop_assert!((norm - 1.0).abs() <= 1e-12);
            for i in 0..3 {
                let dot: f64 = g.row(i).iter().zip(v).map(|(p, q)| p * q).sum();
                prop_assert!(
                    dot.abs() <= NULLSPACE_TOL * scale,
                    "|row {i} . v| = {}",
                    dot.abs()
                );
            }
        }
        for i in 0..basis.len() {
            for j in (i + 1)..basis.len() {
                let dot: f64 = basis[i].iter().zip(&basis[j]).map(|(p, q)| p * q).sum();
                prop_assert!(dot.abs() <= 1e-9);
            }
        }
    }

    /// No point of a sweep strictly dominates another.
    #[test]
    fn sweep_points_are_mutually_undominated(
        (a, b, gamma) in qpg_params(2),
    ) {
        let cfg = prop_cfg();
        let game = Game::quadratic_public_goods(a, b, gamma).unwrap();
        let f = sweep_frontier(&game, 6, &cfg).unwrap();
        for p in &f.points {
            for q in &f.points {
                let strictly_better = p
                    .point
                    .payoffs
                    .iter()
                    .zip(&q.point.payoffs)
                    .all(|(pp, qq)| *pp > qq + 1e-7 * qq.abs().max(1.0));
                prop_assert!(
                    !strictly_better,
                    "{:?} dominates {:?}",
                    p.point.payoffs,
                    q.point.payoffs
                );
            }
        }
    }

    /// Relabeling players relabels the equilibrium: solving the transposed
    /// two-player game returns the swapped profile.
    #[test]
    fn mke_respects_player_permutation(
        (a, b, gamma) in qpg_params(2),
    ) {
        let cfg = prop_cfg();
        let game = Game::quadratic_public_goods(a.clone(), b.clone(), gamma).unwrap();
        let swapped = Game::quadratic_public_goods(
            vec![a[1], a[0]],
            vec![b[1], b[0]],
            gamma,
        )
        .unwrap();
        let r1 = solve_mke(&game, None, DEFAULT_A_HI, &cfg).unwrap();
        let r2 = solve_mke(&swapped, None, DEFAULT_A_HI, &cfg).unwrap();
        prop_assert!((r1.x[0] - r2.x[1]).abs() <= SOLVE_TOL);
        prop_assert!((r1.x[1] - r2.x[0]).abs() <= SOLVE_TOL);
    }

    /// With a symmetric interaction matrix the Kantian equilibrium is its
    /// own efficiency certificate: the profile, normalized to the simplex,
    /// is a valid multiplier vector, so certification must accept it.
    #[test]
    fn mke_of_symmetric_game_is_certified_efficient(
        (a, b, gamma) in qpg_params(3),
    ) {
        let cfg = prop_cfg();
        let game = Game::quadratic_public_goods(a, b, gamma).unwrap();
        let report = solve_mke(&game, None, DEFAULT_A_HI, &cfg).unwrap();
        prop_assert!(report.verdict.is_verified());

        match certify_efficiency(&game, &report.x, DEFAULT_CERT_TOL, &cfg).unwrap() {
            CertifyOutcome::Accepted { multipliers, .. } => {
                let total: f64 = report.x.iter().sum();
                for (m, x) in multipliers.iter().zip(&report.x) {
                    prop_assert!(
                        (m - x / total).abs() <= 1e-5,
                        "multiplier {m} vs normalized action {}",
                        x / total
                    );
                }
            }
            CertifyOutcome::Rejected { residual, .. } => {
                return Err(TestCaseError::fail(format!(
                    "equilibrium rejected with residual {residual}"
                )));
            }
        }
    }
}
