//! Choosing one point from a swept frontier: utilitarian, maximin, Nash
//! bargaining, and Kalai-Smorodinsky rules.
//!
//! The bargaining rules need a disagreement point; when none is supplied,
//! the payoffs of the game's own Nash equilibrium are used — the natural
//! "no deal" outcome of a social dilemma.

use crate::error::{Error, Result};
use crate::game::{Game, PayoffModel};
use crate::kantian::{solve_nash, DEFAULT_A_HI};
use crate::pareto::{scalarize, sweep_frontier, ParetoPoint};
use crate::solve::SolverConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriterionKind {
    /// Maximize the payoff sum.
    Utilitarian,
    /// Maximize the smallest payoff.
    Maximin,
    /// Maximize the product of gains over the disagreement point.
    NashBargaining,
    /// Maximize the smallest gain normalized by its ideal-point range.
    KalaiSmorodinsky,
}

/// A selection rule, with an optional explicit disagreement point for the
/// bargaining criteria.
#[derive(Debug, Clone)]
pub struct Criterion {
    pub kind: CriterionKind,
    pub disagreement: Option<Vec<f64>>,
}

impl Criterion {
    pub fn new(kind: CriterionKind) -> Self {
        Criterion {
            kind,
            disagreement: None,
        }
    }
}

/// The chosen frontier point, the weights that generate it, the criterion
/// value it achieves, and the disagreement point used (when one was).
#[derive(Debug, Clone)]
pub struct Selection {
    pub point: ParetoPoint,
    pub weights: Vec<f64>,
    pub objective: f64,
    pub disagreement: Option<Vec<f64>>,
}

const TIE_TOL: f64 = 1e-12;
const WEIGHT_FLOOR: f64 = 1e-6;

fn score(kind: CriterionKind, payoffs: &[f64], d: Option<&[f64]>, ideal: Option<&[f64]>) -> f64 {
    match kind {
        CriterionKind::Utilitarian => payoffs.iter().sum(),
        CriterionKind::Maximin => payoffs.iter().cloned().fold(f64::INFINITY, f64::min),
        CriterionKind::NashBargaining => {
            let d = d.expect("bargaining needs a disagreement point");
            let mut s = 0.0;
            for (u, di) in payoffs.iter().zip(d) {
                let gain = u - di;
                if gain <= 0.0 {
                    return f64::NEG_INFINITY; // outside the admissible set
                }
                s += gain.ln();
            }
            s
        }
        CriterionKind::KalaiSmorodinsky => {
            let d = d.expect("bargaining needs a disagreement point");
            let ideal = ideal.expect("KS needs the ideal point");
            payoffs
                .iter()
                .zip(d)
                .zip(ideal)
                .map(|((u, di), ii)| (u - di) / (ii - di))
                .fold(f64::INFINITY, f64::min)
        }
    }
}

/// True when `a` beats `b`: strictly better score, or a tie broken toward
/// the lexicographically larger payoff vector (which makes selections on
/// flat frontier faces deterministic).
fn better(score_a: f64, payoffs_a: &[f64], score_b: f64, payoffs_b: &[f64]) -> bool {
    let tol = TIE_TOL * score_b.abs().max(1.0);
    if score_a > score_b + tol {
        return true;
    }
    if score_a < score_b - tol {
        return false;
    }
    payoffs_a
        .iter()
        .zip(payoffs_b)
        .find_map(|(a, b)| {
            if a > b {
                Some(true)
            } else if a < b {
                Some(false)
            } else {
                None
            }
        })
        .unwrap_or(false)
}

/// Picks the best point of a `k`-point frontier sweep under `criterion`,
/// then polishes the generating weights (1-D golden-section bracket for two
/// players, compass search on the simplex otherwise). Every candidate goes
/// through the certifying [`scalarize`], so the returned point is efficient
/// by construction.
pub fn select_point(
    game: &Game,
    criterion: &Criterion,
    k: usize,
    cfg: &SolverConfig,
) -> Result<Selection> {
    cfg.validate()?;
    let n = game.num_players();
    if k == 0 {
        return Err(Error::InvalidConfig(
            "selection needs at least one sweep point".into(),
        ));
    }

    let needs_d = matches!(
        criterion.kind,
        CriterionKind::NashBargaining | CriterionKind::KalaiSmorodinsky
    );
    let d: Option<Vec<f64>> = if needs_d {
        match &criterion.disagreement {
            Some(d) => {
                if d.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: d.len(),
                    });
                }
                if d.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidProfile(
                        "disagreement payoffs must be finite".into(),
                    ));
                }
                Some(d.clone())
            }
            None => {
                let nash = solve_nash(game, DEFAULT_A_HI, cfg)?;
                Some(nash.payoffs)
            }
        }
    } else {
        None
    };

    let frontier = sweep_frontier(game, k, cfg)?;
    if frontier.points.is_empty() {
        return Err(Error::EmptyAdmissibleSet(
            "the frontier sweep produced no certified interior points".into(),
        ));
    }

    let ideal: Option<Vec<f64>> = match criterion.kind {
        CriterionKind::KalaiSmorodinsky => {
            let d = d.as_ref().expect("resolved above");
            let mut ideal = vec![f64::NEG_INFINITY; n];
            for p in &frontier.points {
                for (ii, u) in ideal.iter_mut().zip(&p.point.payoffs) {
                    *ii = ii.max(*u);
                }
            }
            if ideal.iter().zip(d).any(|(i, di)| i - di <= TIE_TOL) {
                return Err(Error::EmptyAdmissibleSet(
                    "the swept ideal point does not dominate the disagreement point".into(),
                ));
            }
            Some(ideal)
        }
        _ => None,
    };

    let eval = |p: &ParetoPoint| score(criterion.kind, &p.payoffs, d.as_deref(), ideal.as_deref());

    let mut best = &frontier.points[0];
    let mut best_score = eval(&best.point);
    for fp in &frontier.points[1..] {
        let s = eval(&fp.point);
        if better(s, &fp.point.payoffs, best_score, &best.point.payoffs) {
            best = fp;
            best_score = s;
        }
    }
    if best_score == f64::NEG_INFINITY {
        return Err(Error::EmptyAdmissibleSet(
            "no swept point improves on the disagreement point".into(),
        ));
    }

    let mut chosen = best.clone();
    let mut chosen_score = best_score;

    // Weight polish around the winning grid cell.
    if n == 2 {
        let spacing = 1.0 / (k + 1) as f64;
        let center = best.weights[0];
        let mut lo = (center - spacing).max(WEIGHT_FLOOR);
        let mut hi = (center + spacing).min(1.0 - WEIGHT_FLOOR);
        let obj = |w1: f64| -> Option<(f64, f64, ParetoPoint)> {
            let p = scalarize(game, &[w1, 1.0 - w1], cfg).ok()?;
            let s = eval(&p);
            Some((s, w1, p))
        };
        let inv_phi = 0.618_033_988_749_894_9;
        let mut c = hi - inv_phi * (hi - lo);
        let mut dpt = lo + inv_phi * (hi - lo);
        let mut fc = obj(c);
        let mut fd = obj(dpt);
        for _ in 0..40 {
            if hi - lo <= 1e-7 {
                break;
            }
            let sc = fc.as_ref().map(|(s, ..)| *s).unwrap_or(f64::NEG_INFINITY);
            let sd = fd.as_ref().map(|(s, ..)| *s).unwrap_or(f64::NEG_INFINITY);
            if sc >= sd {
                hi = dpt;
                dpt = c;
                fd = fc;
                c = hi - inv_phi * (hi - lo);
                fc = obj(c);
            } else {
                lo = c;
                c = dpt;
                fc = fd;
                dpt = lo + inv_phi * (hi - lo);
                fd = obj(dpt);
            }
        }
        for (s, w1, p) in [fc, fd].into_iter().flatten() {
            let margin = TIE_TOL * chosen_score.abs().max(1.0);
            if s > chosen_score + margin {
                chosen = crate::pareto::FrontierPoint {
                    weights: vec![w1, 1.0 - w1],
                    point: p,
                };
                chosen_score = s;
            }
        }
    } else {
        // Compass search over weight space with halving steps.
        let mut w = best.weights.clone();
        let mut step = 0.5 / (k + 1) as f64;
        let mut evals = 0usize;
        while step > 1e-4 && evals < 400 {
            let mut improved = false;
            'dirs: for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let mut trial = w.clone();
                    trial[i] += step;
                    trial[j] -= step;
                    if trial[j] < WEIGHT_FLOOR {
                        continue;
                    }
                    let total: f64 = trial.iter().sum();
                    for t in &mut trial {
                        *t /= total;
                    }
                    evals += 1;
                    if let Ok(p) = scalarize(game, &trial, cfg) {
                        let s = eval(&p);
                        let margin = TIE_TOL * chosen_score.abs().max(1.0);
                        if s > chosen_score + margin {
                            chosen = crate::pareto::FrontierPoint {
                                weights: trial.clone(),
                                point: p,
                            };
                            chosen_score = s;
                            w = trial;
                            improved = true;
                            break 'dirs;
                        }
                    }
                    if evals >= 400 {
                        break 'dirs;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
    }

    Ok(Selection {
        point: chosen.point,
        weights: chosen.weights,
        objective: chosen_score,
        disagreement: d,
    })
}
