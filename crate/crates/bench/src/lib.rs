//! Shared instances for the kernel benchmarks: one representative game
//! per family, sized so a benchmark run exercises the same code paths the
//! CLI does (dense-grid scan included).

use kantian_core::{Game, SolverConfig};

pub fn public_goods(n: usize) -> Game {
    let a: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * i as f64).collect();
    let b = vec![1.0; n];
    Game::quadratic_public_goods(a, b, 0.3).expect("valid public goods instance")
}

pub fn cournot(n: usize) -> Game {
    Game::linear_cournot(10.0, 1.0, vec![1.0; n]).expect("valid cournot instance")
}

pub fn commons(n: usize) -> Game {
    Game::commons(n, 0.25, 0.5).expect("valid commons instance")
}

pub fn bench_config() -> SolverConfig {
    SolverConfig::default()
}
