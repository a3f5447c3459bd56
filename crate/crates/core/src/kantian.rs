//! Equilibrium solvers and the grid-oracle verifier.
//!
//! The multiplicative Kantian equilibrium (MKE) condition: no player wants
//! the whole profile rescaled, `U_i(x) >= U_i(a * x)` for all `a >= 0`.
//! With payoffs concave along rays (enforced by `validate_game`) this is
//! equivalent to the stationarity system `r_i(x) = grad U_i(x) . x = 0`.
//!
//! Every solve ends in [`verify_mke`], which never trusts the algebra: for
//! each player it rescans the full deviation curve `a -> U_i(a * x)` on a
//! dense grid and golden-section refines it, requiring the maximum to sit
//! at `a = 1` and no grid point to beat the candidate payoff.

use crate::error::{Error, Result};
use crate::game::PayoffModel;
use crate::solve::{line_scan, root_with_margin, SolverConfig};

/// Upper end of the deviation scan `a in [0, a_hi]` used by verification.
pub const DEFAULT_A_HI: f64 = 3.0;
/// How far the oracle argmax may sit from its predicted location.
pub const ARGMAX_WINDOW: f64 = 1e-3;
/// Slack for "no grid point does better", relative to the payoff scale.
pub const DOMINANCE_SLACK: f64 = 1e-9;
/// Converged profiles smaller than this are the collapse-to-zero root of
/// the residual system, not an equilibrium of interest.
pub const DEGENERATE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumKind {
    Kantian,
    Nash,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Verified,
    Failed { reasons: Vec<String> },
}

impl Verdict {
    pub fn is_verified(&self) -> bool {
        matches!(self, Verdict::Verified)
    }
}

/// A solved or checked equilibrium, with everything the oracle measured.
#[derive(Debug, Clone)]
pub struct EquilibriumReport {
    pub kind: EquilibriumKind,
    pub x: Vec<f64>,
    pub payoffs: Vec<f64>,
    /// Kantian: `grad U_i . x` per player. Nash: the projected own-partial
    /// (clamped to its nonnegative part on binding coordinates).
    pub residuals: Vec<f64>,
    /// Oracle argmax per player: of `a -> U_i(a x)` (Kantian, expected at
    /// 1) or of the own-action slice (Nash, expected at `x_i`).
    pub oracle_argmax: Vec<f64>,
    pub max_rel_residual: f64,
    pub verdict: Verdict,
}

/// Kantian stationarity residuals `r_i = grad U_i(x) . x`.
pub fn mke_residual<M: PayoffModel + ?Sized>(model: &M, x: &[f64]) -> Result<Vec<f64>> {
    let n = model.num_players();
    let g = model.gradient(x)?;
    Ok((0..n)
        .map(|i| g.row(i).iter().zip(x).map(|(gij, xj)| gij * xj).sum())
        .collect())
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Residual normalized by the natural scale of the directional derivative,
/// `|grad U_i| * |x|`, so the tolerance means the same thing across games.
/// The scale is floored at 1: when the gradient itself vanishes at the
/// solution, the comparison falls back to absolute terms instead of
/// dividing two rounding errors by each other.
fn relative_residual(raw: f64, grad_row: &[f64], x: &[f64]) -> f64 {
    raw.abs() / (norm2(grad_row) * norm2(x)).max(1.0)
}

/// Checks the MKE property of `x` directly from payoff evaluations.
///
/// Per player: (1) relative stationarity residual within `cfg.tol_grad`,
/// (2) the rescanned deviation curve peaks within [`ARGMAX_WINDOW`] of
/// `a = 1`, and (3) no point of the dense grid on `[0, a_hi]` improves on
/// the candidate payoff beyond [`DOMINANCE_SLACK`]. The report carries the
/// verdict; it only errors on structural failures (non-unimodal curves,
/// invalid profiles).
pub fn verify_mke<M: PayoffModel + ?Sized>(
    model: &M,
    x: &[f64],
    a_hi: f64,
    cfg: &SolverConfig,
) -> Result<EquilibriumReport> {
    cfg.validate()?;
    if !(a_hi > 1.0 && a_hi.is_finite()) {
        return Err(Error::InvalidConfig(
            "deviation scan bound a_hi must exceed 1".into(),
        ));
    }
    let n = model.num_players();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    let payoffs = model.payoffs(x)?;
    let residuals = mke_residual(model, x)?;
    let grad = model.gradient(x)?;

    let mut reasons = Vec::new();
    let mut oracle_argmax = Vec::with_capacity(n);
    let mut max_rel = 0.0f64;

    for i in 0..n {
        let rel = relative_residual(residuals[i], grad.row(i), x);
        max_rel = max_rel.max(rel);
        if rel > cfg.tol_grad {
            reasons.push(format!(
                "player {i}: relative stationarity residual {rel:.3e} exceeds {:.0e}",
                cfg.tol_grad
            ));
        }

        let mut buf = vec![0.0; n];
        let scan = line_scan(
            |a: f64| {
                for (b, &xj) in buf.iter_mut().zip(x) {
                    *b = a * xj;
                }
                model.payoff(&buf, i)
            },
            0.0,
            a_hi,
            cfg,
        )?;
        oracle_argmax.push(scan.refined);
        if (scan.refined - 1.0).abs() > ARGMAX_WINDOW {
            reasons.push(format!(
                "player {i}: deviation curve peaks at a = {:.6} instead of 1",
                scan.refined
            ));
        }
        let slack = DOMINANCE_SLACK * payoffs[i].abs().max(1.0);
        if scan.grid_max > payoffs[i] + slack {
            reasons.push(format!(
                "player {i}: grid point at a = {:.6} improves payoff by {:.3e}",
                scan.grid_argmax,
                scan.grid_max - payoffs[i]
            ));
        }
    }

    Ok(EquilibriumReport {
        kind: EquilibriumKind::Kantian,
        x: x.to_vec(),
        payoffs,
        residuals,
        oracle_argmax,
        max_rel_residual: max_rel,
        verdict: if reasons.is_empty() {
            Verdict::Verified
        } else {
            Verdict::Failed { reasons }
        },
    })
}

/// Solves for an interior MKE by damped Newton on the *normalized*
/// residuals `r_i(x) / x_i`. The normalization removes the spurious
/// collapse-to-zero root, and the pseudo-inverse Newton step copes with the
/// families whose equilibria form a face rather than a point. The result
/// always passes through [`verify_mke`]; the verdict is in the report.
pub fn solve_mke<M: PayoffModel + ?Sized>(
    model: &M,
    x0: Option<&[f64]>,
    a_hi: f64,
    cfg: &SolverConfig,
) -> Result<EquilibriumReport> {
    cfg.validate()?;
    let n = model.num_players();
    let start = match x0 {
        Some(s) => {
            if s.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: s.len(),
                });
            }
            if s.iter().any(|v| !v.is_finite() || *v <= 0.0) {
                return Err(Error::InvalidProfile(
                    "interior solve needs a strictly positive start".into(),
                ));
            }
            s.to_vec()
        }
        None => vec![1.0; n],
    };

    let normalized = |x: &[f64]| -> Result<Vec<f64>> {
        if x.iter().any(|v| *v <= 0.0) {
            return Err(Error::InvalidProfile(
                "normalized residual probed at a boundary profile".into(),
            ));
        }
        let r = mke_residual(model, x)?;
        Ok(r.iter().zip(x).map(|(ri, xi)| ri / xi).collect())
    };

    // The verdict gate measures |r_i| against the gradient scale, while the
    // root system is the normalized r_i / x_i; solve with extra margin so
    // the two conventions cannot disagree at the tolerance edge.
    let x = root_with_margin(normalized, &start, cfg, |x| {
        x.iter().all(|v| *v > 0.0 && v.is_finite())
    })?;
    if x.iter().fold(0.0f64, |m, v| m.max(v.abs())) < DEGENERATE_FLOOR {
        return Err(Error::DegenerateRoot(format!(
            "residual system collapsed to the zero profile: {x:?}"
        )));
    }
    verify_mke(model, &x, a_hi, cfg)
}

/// Projected own-action stationarity residuals for a Nash candidate:
/// `dU_i/dx_i` on interior coordinates, its positive part on binding ones.
fn nash_residuals<M: PayoffModel + ?Sized>(model: &M, x: &[f64]) -> Result<Vec<f64>> {
    let n = model.num_players();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let own = model.gradient_row(x, i)?[i];
        out.push(if x[i] > 0.0 { own } else { own.max(0.0) });
    }
    Ok(out)
}

/// Checks a Nash candidate against the oracle: each player's own-action
/// slice is rescanned on `[0, a_hi * max(1, x_i)]`; the peak must sit at
/// `x_i` and no grid point may beat the candidate payoff.
pub fn verify_nash<M: PayoffModel + ?Sized>(
    model: &M,
    x: &[f64],
    a_hi: f64,
    cfg: &SolverConfig,
) -> Result<EquilibriumReport> {
    cfg.validate()?;
    if !(a_hi > 1.0 && a_hi.is_finite()) {
        return Err(Error::InvalidConfig(
            "deviation scan bound a_hi must exceed 1".into(),
        ));
    }
    let n = model.num_players();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    let payoffs = model.payoffs(x)?;
    let residuals = nash_residuals(model, x)?;
    let grad = model.gradient(x)?;

    let mut reasons = Vec::new();
    let mut oracle_argmax = Vec::with_capacity(n);
    let mut max_rel = 0.0f64;

    for i in 0..n {
        let rel = relative_residual(residuals[i], grad.row(i), x);
        max_rel = max_rel.max(rel);
        if rel > cfg.tol_grad {
            reasons.push(format!(
                "player {i}: relative best-response residual {rel:.3e} exceeds {:.0e}",
                cfg.tol_grad
            ));
        }

        let hi = a_hi * x[i].max(1.0);
        let mut buf = x.to_vec();
        let scan = line_scan(
            |t: f64| {
                buf[i] = t;
                model.payoff(&buf, i)
            },
            0.0,
            hi,
            cfg,
        )?;
        oracle_argmax.push(scan.refined);
        if (scan.refined - x[i]).abs() > ARGMAX_WINDOW * x[i].max(1.0) {
            reasons.push(format!(
                "player {i}: own-action slice peaks at {:.6} instead of {:.6}",
                scan.refined, x[i]
            ));
        }
        let slack = DOMINANCE_SLACK * payoffs[i].abs().max(1.0);
        if scan.grid_max > payoffs[i] + slack {
            reasons.push(format!(
                "player {i}: unilateral deviation to {:.6} improves payoff by {:.3e}",
                scan.grid_argmax,
                scan.grid_max - payoffs[i]
            ));
        }
    }

    Ok(EquilibriumReport {
        kind: EquilibriumKind::Nash,
        x: x.to_vec(),
        payoffs,
        residuals,
        oracle_argmax,
        max_rel_residual: max_rel,
        verdict: if reasons.is_empty() {
            Verdict::Verified
        } else {
            Verdict::Failed { reasons }
        },
    })
}

/// Best response of player `i` to the rest of the profile: bisection on the
/// own-partial, which own-concavity makes strictly decreasing in `t`.
fn best_response<M: PayoffModel + ?Sized>(model: &M, x: &[f64], i: usize) -> Result<f64> {
    let mut probe = x.to_vec();
    let mut own = |t: f64| -> Result<f64> {
        probe[i] = t;
        match model.gradient_row(&probe, i) {
            Ok(row) => Ok(row[i]),
            // A singular marginal at the origin (the commons extraction
            // family) means unbounded gain from entering: treat as ascent.
            Err(Error::GradientSingular(_)) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    };

    if own(0.0)? <= 0.0 {
        return Ok(0.0);
    }
    let mut hi = 1.0f64;
    let mut doublings = 0;
    while own(hi)? > 0.0 {
        hi *= 2.0;
        doublings += 1;
        if doublings > 60 {
            return Err(Error::NonConvergence {
                iterations: doublings,
                residual: f64::INFINITY,
                last: vec![hi],
            });
        }
    }
    let mut lo = 0.0f64;
    while hi - lo > 1e-14 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if own(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Iterated best response to a Nash equilibrium, then oracle verification.
pub fn solve_nash<M: PayoffModel + ?Sized>(
    model: &M,
    a_hi: f64,
    cfg: &SolverConfig,
) -> Result<EquilibriumReport> {
    cfg.validate()?;
    let n = model.num_players();
    let mut x = vec![1.0; n];
    for _ in 0..cfg.max_iter {
        for i in 0..n {
            x[i] = best_response(model, &x, i)?;
        }
        let res = nash_residuals(model, &x)?;
        let worst = res.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        if worst <= cfg.tol_grad {
            return verify_nash(model, &x, a_hi, cfg);
        }
    }
    let res = nash_residuals(model, &x)?;
    Err(Error::NonConvergence {
        iterations: cfg.max_iter,
        residual: res.iter().fold(0.0f64, |m, r| m.max(r.abs())),
        last: x,
    })
}
