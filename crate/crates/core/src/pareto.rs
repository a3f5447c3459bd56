//! Pareto frontier machinery: weighted scalarization, an efficiency
//! certificate, and frontier sweeps.
//!
//! A profile `x` is certified efficient when some strictly positive simplex
//! vector `m` of Pareto multipliers drives the weighted gradient stack to
//! zero: `G(x)^T m = 0`, where row `i` of `G` is player i's payoff
//! gradient. The certificate is found by minimizing `|G^T m|^2` over the
//! simplex, so rejection comes with the best achievable residual attached.

use crate::error::{Error, Result};
use crate::game::{Family, Game, PayoffModel};
use crate::solve::{maximize_concave, root_with_margin, SolverConfig};
use nalgebra::{DMatrix, DVector};

/// Default acceptance threshold for the (relative) certificate residual.
pub const DEFAULT_CERT_TOL: f64 = 1e-5;
/// Pareto multipliers below this are treated as zero: the certificate must
/// be strictly positive to witness strong efficiency.
pub const MULTIPLIER_FLOOR: f64 = 1e-6;

const TINY: f64 = 1e-300;
/// Cost spread below which a Cournot game is treated as uniform-cost, so
/// its efficient set is the flat face `sum(x) = X*` and any split works.
const UNIFORM_COST_TOL: f64 = 1e-12;

/// An efficient profile together with its certificate.
#[derive(Debug, Clone)]
pub struct ParetoPoint {
    pub x: Vec<f64>,
    /// Certified Pareto multipliers: strictly positive, summing to one.
    pub multipliers: Vec<f64>,
    pub payoffs: Vec<f64>,
    /// Relative certificate residual `|G^T m|_inf / max_i |grad U_i|`.
    pub cert_residual: f64,
}

/// Result of an efficiency check.
#[derive(Debug, Clone)]
pub enum CertifyOutcome {
    Accepted {
        multipliers: Vec<f64>,
        residual: f64,
    },
    Rejected {
        /// Best simplex multipliers found; they fail the tolerance or the
        /// positivity floor.
        multipliers: Vec<f64>,
        residual: f64,
    },
}

/// One swept frontier sample: the scalarization weights that generated it
/// plus the certified point itself.
#[derive(Debug, Clone)]
pub struct FrontierPoint {
    pub weights: Vec<f64>,
    pub point: ParetoPoint,
}

/// A swept frontier. `rejected` counts weight vectors whose scalarized
/// optimum fell on the boundary or failed certification.
#[derive(Debug, Clone)]
pub struct Frontier {
    pub points: Vec<FrontierPoint>,
    pub rejected: usize,
}

/// Euclidean projection onto the probability simplex (sort-based).
fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).expect("finite multipliers"));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        cumsum += uk;
        let t = (cumsum - 1.0) / (k + 1) as f64;
        if uk - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&vi| (vi - theta).max(0.0)).collect()
}

fn normalize_weights(weights: &[f64], n: usize) -> Result<Vec<f64>> {
    if weights.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: weights.len(),
        });
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidProfile(
            "scalarization weights must be finite and nonnegative".into(),
        ));
    }
    let sum: f64 = weights.iter().sum();
    if sum <= 0.0 {
        return Err(Error::InvalidProfile(
            "scalarization weights must not all be zero".into(),
        ));
    }
    Ok(weights.iter().map(|w| w / sum).collect())
}

/// Searches for simplex multipliers certifying that `x` is Pareto
/// efficient. Two routes: a direct KKT solve assuming full support, then a
/// projected-gradient polish that handles active bounds. Acceptance needs
/// the relative residual within `tol` *and* every multiplier at or above
/// [`MULTIPLIER_FLOOR`].
pub fn certify_efficiency(
    game: &Game,
    x: &[f64],
    tol: f64,
    cfg: &SolverConfig,
) -> Result<CertifyOutcome> {
    cfg.validate()?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidConfig(
            "certificate tol must be positive".into(),
        ));
    }
    let n = game.num_players();
    let g = game.gradient(x)?;
    let scale = g.max_row_norm().max(TINY);

    // A = G G^T drives the quadratic |G^T m|^2 = m^T A m.
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let dot: f64 = g.row(i).iter().zip(g.row(j)).map(|(p, q)| p * q).sum();
            a[(i, j)] = dot;
        }
    }

    let residual_of = |m: &[f64]| -> f64 {
        let mut worst = 0.0f64;
        for j in 0..n {
            let s: f64 = m.iter().enumerate().map(|(i, mi)| g.get(i, j) * mi).sum();
            worst = worst.max(s.abs());
        }
        worst / scale
    };

    // Route 1: stationarity of m^T A m on the affine hull of the simplex,
    // usable whenever it lands strictly inside.
    let mut best: Option<Vec<f64>> = None;
    let mut kkt = DMatrix::zeros(n + 1, n + 1);
    for i in 0..n {
        for j in 0..n {
            kkt[(i, j)] = 2.0 * a[(i, j)];
        }
        kkt[(i, n)] = 1.0;
        kkt[(n, i)] = 1.0;
    }
    let mut rhs = DVector::zeros(n + 1);
    rhs[n] = 1.0;
    if let Some(sol) = kkt.lu().solve(&rhs) {
        let m: Vec<f64> = (0..n).map(|i| sol[i]).collect();
        if m.iter().all(|v| v.is_finite() && *v >= 0.0) {
            best = Some(m);
        }
    }

    // Route 2: projected gradient on the simplex; also refines route 1.
    let start = best.clone().unwrap_or_else(|| vec![1.0 / n as f64; n]);
    let lipschitz: f64 = (0..n)
        .map(|i| (0..n).map(|j| a[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
        .max(TINY)
        * 2.0;
    let step = 1.0 / lipschitz;
    let mut m = project_simplex(&start);
    for _ in 0..cfg.max_iter {
        let grad: Vec<f64> = (0..n)
            .map(|i| 2.0 * (0..n).map(|j| a[(i, j)] * m[j]).sum::<f64>())
            .collect();
        let trial: Vec<f64> = m.iter().zip(&grad).map(|(mi, gi)| mi - step * gi).collect();
        let next = project_simplex(&trial);
        let moved = next
            .iter()
            .zip(&m)
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
        m = next;
        if moved <= cfg.tol_step {
            break;
        }
    }
    if best
        .as_ref()
        .map(|b| residual_of(b) > residual_of(&m))
        .unwrap_or(true)
    {
        best = Some(m);
    }

    let multipliers = best.expect("a candidate always exists");
    let residual = residual_of(&multipliers);
    if residual <= tol && multipliers.iter().all(|v| *v >= MULTIPLIER_FLOOR) {
        Ok(CertifyOutcome::Accepted {
            multipliers,
            residual,
        })
    } else {
        Ok(CertifyOutcome::Rejected {
            multipliers,
            residual,
        })
    }
}

/// Derivative of the total payoff with respect to the aggregate `X`,
/// evaluated on the uniform split — analytic, via the gradient rows.
fn aggregate_slope(game: &Game, total: f64) -> Result<f64> {
    let n = game.num_players();
    let split = vec![total / n as f64; n];
    let g = game.gradient(&split)?;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += g.get(i, j);
        }
    }
    Ok(s / n as f64)
}

/// Maximum of the total payoff along the aggregate axis for games whose
/// welfare depends on the profile only through `X = sum(x)` (commons, and
/// Cournot with uniform costs). Returns `X*`.
fn aggregate_optimum(game: &Game, cfg: &SolverConfig) -> Result<f64> {
    let n = game.num_players();
    let phi = |total: f64| -> Result<f64> {
        let split = vec![total / n as f64; n];
        Ok(game.payoffs(&split)?.iter().sum())
    };
    // Bracket the peak by doubling, then hand over to the checked 1-D search.
    let mut hi = 1.0f64;
    let mut steps = 0;
    while phi(2.0 * hi)? >= phi(hi)? {
        hi *= 2.0;
        steps += 1;
        if steps > 60 {
            return Err(Error::NonConvergence {
                iterations: steps,
                residual: f64::INFINITY,
                last: vec![hi],
            });
        }
    }
    let scan = crate::solve::line_scan(&mut { |t| phi(t) }, 0.0, 2.0 * hi, cfg)?;
    let coarse = scan.refined;

    // The grid/golden search fixed the basin to within one cell; Newton on
    // the analytic slope removes the remaining search-width error, which
    // would otherwise leak into the stationarity residuals of every point
    // on the flat face.
    let mut x = coarse;
    let mut slope = aggregate_slope(game, x)?;
    for _ in 0..12 {
        let h = 1e-6 * (1.0 + x.abs());
        if x - h <= 0.0 {
            break;
        }
        let d = (aggregate_slope(game, x + h)? - aggregate_slope(game, x - h)?) / (2.0 * h);
        // Only descend through a strict peak.
        if !(d.is_finite() && d < 0.0) {
            break;
        }
        let next = x - slope / d;
        if !(next > 0.0 && next.is_finite()) {
            break;
        }
        let next_slope = aggregate_slope(game, next)?;
        if next_slope.abs() >= slope.abs() {
            break;
        }
        x = next;
        slope = next_slope;
    }
    if (x - coarse).abs() <= scan.cell {
        Ok(x)
    } else {
        Ok(coarse)
    }
}

fn is_uniform_cost_cournot(game: &Game) -> Option<bool> {
    match game.family() {
        Family::LinearCournot { cost, .. } => {
            let lo = cost.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = cost.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let scale = hi.abs().max(1.0);
            Some(hi - lo <= UNIFORM_COST_TOL * scale)
        }
        _ => None,
    }
}

/// Scalarized solve: maximize `sum_i m_i U_i` over the orthant. Projected
/// gradient finds the basin and the active set; when the result is
/// interior, a Newton polish on the weighted gradient system drives the
/// stationarity residual to the configured tolerance.
fn scalarize_concave(game: &Game, m: &[f64], cfg: &SolverConfig) -> Result<Vec<f64>> {
    let n = game.num_players();
    let f = |x: &[f64]| -> Result<f64> {
        let us = game.payoffs(x)?;
        Ok(us.iter().zip(m).map(|(u, w)| u * w).sum())
    };
    let grad = |x: &[f64]| -> Result<Vec<f64>> {
        let g = game.gradient(x)?;
        Ok((0..n)
            .map(|j| (0..n).map(|i| m[i] * g.get(i, j)).sum())
            .collect())
    };
    let mut coarse = cfg.clone();
    coarse.tol_grad = cfg.tol_grad.max(1e-7);
    let x_pg = maximize_concave(f, grad, &vec![1.0; n], &coarse)?;
    if x_pg.iter().all(|v| *v > 0.0) {
        if let Ok(x) = root_with_margin(grad, &x_pg, cfg, |x| x.iter().all(|v| *v >= 0.0)) {
            if x.iter().all(|v| *v > 0.0) {
                return Ok(x);
            }
        }
    }
    Ok(x_pg)
}

/// Share-targeted solve for aggregative games: every split of the optimal
/// aggregate `X*` is efficient, so the weights are read as shares.
fn scalarize_shares(game: &Game, m: &[f64], cfg: &SolverConfig) -> Result<Vec<f64>> {
    let x_star = aggregate_optimum(game, cfg)?;
    Ok(m.iter().map(|mi| mi * x_star).collect())
}

/// Cournot with heterogeneous costs: interior efficiency pins down both the
/// aggregate and the split, via the linear system `G(x)^T m = 0`. The
/// damped Newton step solves it exactly (the system is affine in x).
fn scalarize_cournot_kkt(game: &Game, m: &[f64], cfg: &SolverConfig) -> Result<Vec<f64>> {
    let n = game.num_players();
    let (p0, p1, cbar) = match game.family() {
        Family::LinearCournot { p0, p1, cost } => (*p0, *p1, cost.iter().sum::<f64>() / n as f64),
        _ => unreachable!("dispatch guarantees a Cournot family"),
    };
    let weighted_gradient = |x: &[f64]| -> Result<Vec<f64>> {
        let g = game.gradient(x)?;
        Ok((0..n)
            .map(|j| (0..n).map(|i| m[i] * g.get(i, j)).sum())
            .collect())
    };
    let x_mid = (p0 - cbar) / (2.0 * p1);
    let x0 = vec![x_mid / n as f64; n];
    let x = root_with_margin(weighted_gradient, &x0, cfg, |x| {
        x.iter().all(|v| v.is_finite())
    })
    .map_err(|_| {
        Error::NotEfficient(
            "no interior profile realizes these weights for this cost vector".into(),
        )
    })?;
    Ok(x)
}

/// Maximizes the `weights`-weighted sum of payoffs and certifies the result.
///
/// Errors with [`Error::NonInterior`] when the scalarized optimum sits on
/// the boundary of the orthant (such weight vectors have no interior
/// efficient representative) and with [`Error::NotEfficient`] when the
/// certificate fails — which is how non-concavities reveal themselves.
pub fn scalarize(game: &Game, weights: &[f64], cfg: &SolverConfig) -> Result<ParetoPoint> {
    cfg.validate()?;
    let n = game.num_players();
    let m = normalize_weights(weights, n)?;

    let x = match game.family() {
        Family::QuadraticPublicGoods { .. } | Family::CustomQuadratic { .. } => {
            scalarize_concave(game, &m, cfg)?
        }
        Family::Commons { .. } => scalarize_shares(game, &m, cfg)?,
        Family::LinearCournot { .. } => {
            if is_uniform_cost_cournot(game).unwrap_or(false) {
                scalarize_shares(game, &m, cfg)?
            } else {
                scalarize_cournot_kkt(game, &m, cfg)?
            }
        }
    };

    if x.iter().any(|v| *v <= 0.0) {
        return Err(Error::NonInterior(format!(
            "scalarized optimum {x:?} touches the boundary"
        )));
    }

    match certify_efficiency(game, &x, DEFAULT_CERT_TOL, cfg)? {
        CertifyOutcome::Accepted {
            multipliers,
            residual,
        } => Ok(ParetoPoint {
            payoffs: game.payoffs(&x)?,
            x,
            multipliers,
            cert_residual: residual,
        }),
        CertifyOutcome::Rejected { residual, .. } => Err(Error::NotEfficient(format!(
            "certificate residual {residual:.3e} exceeds {DEFAULT_CERT_TOL:.0e}"
        ))),
    }
}

/// Interior simplex weight grids. For two players this is the uniform grid
/// `j / (k + 1)`; in higher dimensions, a Kronecker low-discrepancy
/// sequence mapped to the simplex and mixed 4% toward the centroid so no
/// weight starts degenerate.
fn weight_grid(n: usize, k: usize) -> Vec<Vec<f64>> {
    if k == 0 {
        return Vec::new();
    }
    if n == 2 {
        return (1..=k)
            .map(|j| {
                let w = j as f64 / (k + 1) as f64;
                vec![w, 1.0 - w]
            })
            .collect();
    }
    if k == 1 {
        return vec![vec![1.0 / n as f64; n]];
    }
    // Generalized golden-ratio sequence: alphas from the root of
    // t^(d+1) = t + 1 with d = n - 1.
    let d = n - 1;
    let mut phi = 1.5f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (d as f64 + 1.0));
    }
    let alphas: Vec<f64> = (1..=d)
        .map(|j| (1.0 / phi.powi(j as i32)).fract())
        .collect();
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        let mut cuts: Vec<f64> = alphas
            .iter()
            .map(|a| (0.5 + a * (i + 1) as f64).fract())
            .collect();
        cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite cuts"));
        let mut w = Vec::with_capacity(n);
        let mut prev = 0.0;
        for c in &cuts {
            w.push(c - prev);
            prev = *c;
        }
        w.push(1.0 - prev);
        // Pull toward the centroid to keep every weight strictly positive.
        let mixed: Vec<f64> = w.iter().map(|wi| 0.96 * wi + 0.04 / n as f64).collect();
        out.push(mixed);
    }
    out
}

/// Sweeps `k` interior weight vectors through [`scalarize`], deduplicates
/// the resulting profiles, and reports how many weights were rejected for
/// boundary or certification reasons.
pub fn sweep_frontier(game: &Game, k: usize, cfg: &SolverConfig) -> Result<Frontier> {
    cfg.validate()?;
    let mut points: Vec<FrontierPoint> = Vec::new();
    let mut rejected = 0usize;
    for weights in weight_grid(game.num_players(), k) {
        match scalarize(game, &weights, cfg) {
            Ok(point) => {
                let duplicate = points.iter().any(|p| {
                    p.point
                        .x
                        .iter()
                        .zip(&point.x)
                        .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()))
                        <= 1e-6
                });
                if !duplicate {
                    points.push(FrontierPoint { weights, point });
                }
            }
            Err(
                Error::NonInterior(_)
                | Error::NotEfficient(_)
                | Error::NonConvergence { .. }
                | Error::DegenerateRoot(_),
            ) => rejected += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(Frontier { points, rejected })
}
