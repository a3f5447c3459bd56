//! End-to-end runs of the full stack — validate, sweep, select, shift,
//! verify, render — on pinned game instances at full oracle resolution.

use kantian_core::{
    build_shift, frontier_csv, plan_csv, select_point, solve_mke, solve_nash, sweep_frontier,
    validate_game, Criterion, CriterionKind, Game, PayoffModel, ShiftPlan, ShiftedGame,
    SolverConfig, DEFAULT_A_HI,
};

const PIN_TOL: f64 = 1e-9;
const DOMINATION_MARGIN: f64 = 1e-6;

fn cfg() -> SolverConfig {
    SolverConfig::default()
}

fn sweep_and_shift(game: &Game, k: usize, theta: f64) -> Vec<ShiftPlan> {
    let cfg = cfg();
    let report = validate_game(game, 64, cfg.seed).unwrap();
    assert!(report.violations.is_empty(), "{:?}", report.violations);

    let frontier = sweep_frontier(game, k, &cfg).unwrap();
    assert!(!frontier.points.is_empty());
    frontier
        .points
        .iter()
        .map(|fp| build_shift(game, &fp.point.x, theta, DEFAULT_A_HI, &cfg).unwrap())
        .collect()
}

/// The shifted game's payoffs at the realized equilibrium must equal the
/// base game's payoffs at the target — bitwise, because the split is exact.
fn assert_exact_payoff_transfer(game: &Game, plans: &[ShiftPlan]) {
    for plan in plans {
        let g = &plan.geometry;
        let shifted = ShiftedGame::new(game, g.c.clone()).unwrap();
        let at_equilibrium = shifted.payoffs(&g.z_star).unwrap();
        let at_target = game.payoffs(&g.x_p).unwrap();
        assert_eq!(at_equilibrium, at_target);
        assert!(plan.verification.verdict.is_verified());
    }
}

#[test]
fn public_goods_pipeline_realizes_every_swept_point() {
    let game = Game::quadratic_public_goods(vec![1.0, 1.0], vec![1.0, 1.0], 0.5).unwrap();
    let plans = sweep_and_shift(&game, 9, 0.5);
    assert_exact_payoff_transfer(&game, &plans);
    // Interior points that are not the base equilibrium need a real shift.
    assert!(plans
        .iter()
        .any(|p| p.geometry.c.iter().any(|ci| *ci > 1e-6)));
}

#[test]
fn heterogeneous_cournot_interior_arc_is_thin_but_realizable() {
    let cfg = cfg();
    let game = Game::linear_cournot(10.0, 1.0, vec![1.0, 1.5]).unwrap();

    // With unequal unit costs almost every weight vector pushes production
    // to the cheap firm: the interior efficient arc only spans aggregates
    // X in (4.25, 4.5), i.e. weights m_1 in (0.4706, 0.4722). A coarse
    // uniform sweep honestly reports every grid weight as inadmissible.
    let frontier = kantian_core::sweep_frontier(&game, 25, &cfg).unwrap();
    assert!(frontier.points.is_empty());
    assert_eq!(frontier.rejected, 25);

    // Weights inside the window: m proportional to (4.1, 4.6) picks the
    // aggregate X = 4.4 and the exact split (2.76, 1.64).
    let point = kantian_core::scalarize(&game, &[4.1 / 8.7, 4.6 / 8.7], &cfg).unwrap();
    assert!((point.x[0] - 2.76).abs() <= 1e-8);
    assert!((point.x[1] - 1.64).abs() <= 1e-8);

    let plan = build_shift(&game, &point.x, 0.5, DEFAULT_A_HI, &cfg).unwrap();
    assert_exact_payoff_transfer(&game, std::slice::from_ref(&plan));
    // This point is not an equilibrium of the base game: the shift is real.
    assert!(plan.geometry.c.iter().any(|ci| *ci > 1e-3));
}

#[test]
fn uniform_cournot_pipeline_needs_no_shift() {
    let game = Game::linear_cournot(10.0, 1.0, vec![1.0, 1.0, 1.0]).unwrap();
    let plans = sweep_and_shift(&game, 7, 0.5);
    assert_exact_payoff_transfer(&game, &plans);
    // Every efficient split of the optimal total is already an equilibrium.
    for plan in &plans {
        assert!(plan.geometry.c.iter().all(|ci| *ci == 0.0));
        assert!((plan.geometry.x_p.iter().sum::<f64>() - 4.5).abs() <= PIN_TOL);
    }
}

#[test]
fn commons_pipeline_needs_no_shift() {
    let game = Game::commons(2, 0.25, 0.5).unwrap();
    let plans = sweep_and_shift(&game, 7, 0.5);
    assert_exact_payoff_transfer(&game, &plans);
    for plan in &plans {
        assert!(plan.geometry.c.iter().all(|ci| *ci == 0.0));
        assert!((plan.geometry.x_p.iter().sum::<f64>() - 4.0).abs() <= PIN_TOL);
    }
}

#[test]
fn custom_quadratic_pipeline_with_asymmetric_interactions() {
    let game = Game::custom_quadratic(
        vec![1.0, 1.2],
        vec![1.0, 0.9],
        vec![vec![0.0, 0.3], vec![0.2, 0.0]],
        1,
    )
    .unwrap();
    let plans = sweep_and_shift(&game, 9, 0.31);
    assert_exact_payoff_transfer(&game, &plans);
}

#[test]
fn kantian_play_dominates_nash_in_each_dilemma() {
    let cfg = cfg();
    let games = vec![
        Game::quadratic_public_goods(vec![1.0, 1.0], vec![1.0, 1.0], 0.5).unwrap(),
        Game::linear_cournot(10.0, 1.0, vec![1.0, 1.0]).unwrap(),
        Game::commons(2, 0.25, 0.5).unwrap(),
    ];
    for game in &games {
        let nash = solve_nash(game, DEFAULT_A_HI, &cfg).unwrap();
        let mke = solve_mke(game, None, DEFAULT_A_HI, &cfg).unwrap();
        assert!(nash.verdict.is_verified());
        assert!(mke.verdict.is_verified());
        for (k, n) in mke.payoffs.iter().zip(&nash.payoffs) {
            assert!(
                *k > n + DOMINATION_MARGIN,
                "family {:?}: kantian {k} vs nash {n}",
                game.family()
            );
        }
    }
}

#[test]
fn pinned_equilibria_of_the_symmetric_dilemmas() {
    let cfg = cfg();

    let qpg = Game::quadratic_public_goods(vec![1.0, 1.0], vec![1.0, 1.0], 0.5).unwrap();
    let mke = solve_mke(&qpg, None, DEFAULT_A_HI, &cfg).unwrap();
    let nash = solve_nash(&qpg, DEFAULT_A_HI, &cfg).unwrap();
    for i in 0..2 {
        assert!((mke.x[i] - 1.5).abs() <= PIN_TOL);
        assert!((mke.payoffs[i] - 1.125).abs() <= PIN_TOL);
        assert!((nash.x[i] - 1.0).abs() <= PIN_TOL);
        assert!((nash.payoffs[i] - 1.0).abs() <= PIN_TOL);
    }

    let cournot = Game::linear_cournot(10.0, 1.0, vec![1.0, 1.0]).unwrap();
    let mke = solve_mke(&cournot, None, DEFAULT_A_HI, &cfg).unwrap();
    let nash = solve_nash(&cournot, DEFAULT_A_HI, &cfg).unwrap();
    for i in 0..2 {
        assert!((mke.x[i] - 2.25).abs() <= PIN_TOL);
        assert!((nash.x[i] - 3.0).abs() <= PIN_TOL);
    }
}

#[test]
fn selection_criteria_agree_with_closed_forms() {
    let cfg = cfg();
    let game = Game::quadratic_public_goods(vec![1.5, 1.0], vec![1.0, 1.0], 0.5).unwrap();

    let util = select_point(&game, &Criterion::new(CriterionKind::Utilitarian), 21, &cfg).unwrap();
    assert!((util.point.x[0] - 2.0).abs() <= 1e-6);
    assert!((util.point.x[1] - 1.5).abs() <= 1e-6);

    // The bargaining criteria measure gains from the Nash outcome, so
    // their selections must weakly dominate it.
    let nash = solve_nash(&game, DEFAULT_A_HI, &cfg).unwrap();
    for kind in [
        CriterionKind::NashBargaining,
        CriterionKind::KalaiSmorodinsky,
    ] {
        let sel = select_point(&game, &Criterion::new(kind), 21, &cfg).unwrap();
        assert!(sel.point.cert_residual <= 1e-5);
        for (p, d) in sel.point.payoffs.iter().zip(&nash.payoffs) {
            assert!(
                *p >= d - 1e-9,
                "{kind:?} selected an inadmissible payoff {p} < {d}"
            );
        }
    }

    // Maximin ignores the disagreement point; its guarantee is that no
    // swept point has a better worst payoff.
    let maximin = select_point(&game, &Criterion::new(CriterionKind::Maximin), 21, &cfg).unwrap();
    let sel_floor = maximin
        .point
        .payoffs
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let frontier = kantian_core::sweep_frontier(&game, 21, &cfg).unwrap();
    for fp in &frontier.points {
        let floor = fp
            .point
            .payoffs
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        assert!(sel_floor >= floor - 1e-9);
    }
}

#[test]
fn rendered_artifacts_are_bit_identical_across_runs() {
    let game = Game::quadratic_public_goods(vec![1.5, 1.0], vec![1.0, 1.0], 0.5).unwrap();
    let run = || {
        let cfg = cfg();
        let frontier = sweep_frontier(&game, 11, &cfg).unwrap();
        let plans: Vec<ShiftPlan> = frontier
            .points
            .iter()
            .map(|fp| build_shift(&game, &fp.point.x, 0.5, DEFAULT_A_HI, &cfg).unwrap())
            .collect();
        (frontier_csv(&frontier, 2), plan_csv(&plans, 2))
    };
    let (f1, p1) = run();
    let (f2, p2) = run();
    assert_eq!(f1, f2);
    assert_eq!(p1, p2);
}
