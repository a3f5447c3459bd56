//! Shared numerical kernels: concave maximization on the nonnegative
//! orthant, 1-D line search with a mandatory dense-grid cross-check,
//! SVD-based nullspace extraction, and a damped Newton root finder.
//!
//! The grid cross-check is not optional instrumentation: every 1-D search
//! compares the golden-section result against a dense scan and fails loudly
//! if they disagree, so a non-concave objective cannot slip through.

use crate::error::{Error, Result};
use crate::game::{GradientMatrix, MAX_PLAYERS};
use nalgebra::{DMatrix, DVector};

/// Tolerances and iteration budgets shared by all solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// First-order stationarity tolerance (infinity norm).
    pub tol_grad: f64,
    /// Step-size / bracket-width floor for line searches.
    pub tol_step: f64,
    /// Iteration cap for outer loops.
    pub max_iter: usize,
    /// Number of evaluation points in every dense 1-D oracle grid.
    pub grid_points: usize,
    /// Relative singular-value threshold for rank decisions.
    pub rank_tol: f64,
    /// Seed for any sampling done under this configuration.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol_grad: 1e-9,
            tol_step: 1e-12,
            max_iter: 500,
            grid_points: 300_001,
            rank_tol: 1e-8,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_grad > 0.0 && self.tol_grad.is_finite()) {
            return Err(Error::InvalidConfig("tol_grad must be positive".into()));
        }
        if !(self.tol_step > 0.0 && self.tol_step.is_finite()) {
            return Err(Error::InvalidConfig("tol_step must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
        }
        if self.grid_points < 3 {
            return Err(Error::InvalidConfig(
                "grid_points must be at least 3".into(),
            ));
        }
        if !(self.rank_tol > 0.0 && self.rank_tol < 1.0) {
            return Err(Error::InvalidConfig("rank_tol must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

const ARMIJO_SIGMA: f64 = 1e-4;
const STEP_GROWTH: f64 = 4.0;
const MAX_STEP: f64 = 1e12;
const MIN_STEP: f64 = 1e-18;

fn infinity_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Maximizes a concave function over the nonnegative orthant by projected
/// gradient ascent: Barzilai-Borwein step initialization with Armijo
/// backtracking as the safeguard. Binding coordinates come back as exact
/// zeros (they are produced by the projection itself).
///
/// Concavity is the caller's responsibility; downstream certification
/// catches the consequences when it does not hold.
pub fn maximize_concave<F, G>(f: F, grad: G, x0: &[f64], cfg: &SolverConfig) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
    G: Fn(&[f64]) -> Result<Vec<f64>>,
{
    cfg.validate()?;
    let n = x0.len();
    if n == 0 || n > MAX_PLAYERS {
        return Err(Error::InvalidConfig(format!(
            "dimension {n} outside 1..={MAX_PLAYERS}"
        )));
    }
    let mut x: Vec<f64> = x0.iter().map(|v| v.max(0.0)).collect();
    let mut fx = f(&x)?;
    let mut last_step = 1.0f64;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None; // previous (x, gradient)

    for _ in 0..cfg.max_iter {
        let g = grad(&x)?;
        // Stationarity on the orthant: interior coordinates need zero
        // gradient, binding ones only a non-ascending direction.
        let pg = x
            .iter()
            .zip(&g)
            .map(|(&xi, &gi)| if xi > 0.0 { gi.abs() } else { gi.max(0.0) })
            .fold(0.0f64, f64::max);
        if pg <= cfg.tol_grad {
            return Ok(x);
        }

        // Spectral step: matches the inverse curvature of the last move and
        // avoids the plateau that plain Armijo hits near step = 2/L.
        let mut step = match &prev {
            Some((px, pgrad)) => {
                let num: f64 = x.iter().zip(px).map(|(a, b)| (a - b) * (a - b)).sum();
                let den: f64 = x
                    .iter()
                    .zip(px)
                    .zip(g.iter().zip(pgrad))
                    .map(|((a, b), (ga, gb))| -(a - b) * (ga - gb))
                    .sum();
                if num > 0.0 && den > 0.0 {
                    (num / den).clamp(MIN_STEP, MAX_STEP)
                } else {
                    (last_step * STEP_GROWTH).min(MAX_STEP)
                }
            }
            None => 1.0,
        };
        prev = Some((x.clone(), g.clone()));

        loop {
            let xt: Vec<f64> = x
                .iter()
                .zip(&g)
                .map(|(&xi, &gi)| (xi + step * gi).max(0.0))
                .collect();
            let dir_dot: f64 = g
                .iter()
                .zip(xt.iter().zip(&x))
                .map(|(&gi, (&ti, &xi))| gi * (ti - xi))
                .sum();
            let moved = xt.iter().zip(&x).any(|(t, xi)| t != xi);
            if moved {
                let ft = f(&xt)?;
                if ft >= fx + ARMIJO_SIGMA * dir_dot {
                    x = xt;
                    fx = ft;
                    last_step = step;
                    break;
                }
            }
            step *= 0.5;
            if step < MIN_STEP {
                return Err(Error::NonConvergence {
                    iterations: cfg.max_iter,
                    residual: pg,
                    last: x,
                });
            }
        }
    }

    let g = grad(&x)?;
    let pg = x
        .iter()
        .zip(&g)
        .map(|(&xi, &gi)| if xi > 0.0 { gi.abs() } else { gi.max(0.0) })
        .fold(0.0f64, f64::max);
    if pg <= cfg.tol_grad {
        return Ok(x);
    }
    Err(Error::NonConvergence {
        iterations: cfg.max_iter,
        residual: pg,
        last: x,
    })
}

/// Result of one oracle line scan: the golden-section refinement, the dense
/// grid's argmax and maximum value, and the grid spacing.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LineScan {
    pub refined: f64,
    pub grid_argmax: f64,
    pub grid_max: f64,
    pub cell: f64,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9; // (sqrt(5) - 1) / 2
const GOLDEN_ITER_CAP: usize = 200;

pub(crate) fn line_scan<G>(mut g: G, lo: f64, hi: f64, cfg: &SolverConfig) -> Result<LineScan>
where
    G: FnMut(f64) -> Result<f64>,
{
    cfg.validate()?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidConfig(format!(
            "bad 1-D search interval [{lo}, {hi}]"
        )));
    }

    // Dense scan first: the grid is the oracle of record.
    let m = cfg.grid_points;
    let cell = (hi - lo) / (m - 1) as f64;
    let mut best_k = 0usize;
    let mut best_v = f64::NEG_INFINITY;
    for k in 0..m {
        let a = if k == m - 1 { hi } else { lo + cell * k as f64 };
        let v = g(a)?;
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("1-D objective at a = {a}")));
        }
        if v > best_v {
            best_v = v;
            best_k = k;
        }
    }
    let grid_argmax = if best_k == m - 1 {
        hi
    } else {
        lo + cell * best_k as f64
    };

    // Golden-section refinement of the same maximum.
    let mut a = lo;
    let mut b = hi;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = g(c)?;
    let mut fd = g(d)?;
    let mut iters = 0;
    while b - a > cfg.tol_step && iters < GOLDEN_ITER_CAP {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = g(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = g(d)?;
        }
        iters += 1;
    }
    let refined = 0.5 * (a + b);

    // The two routes must land in the same grid cell; anything else means
    // the objective was not unimodal on [lo, hi].
    if (refined - grid_argmax).abs() > cell + 1e-12 {
        return Err(Error::NonUnimodal {
            refined,
            grid: grid_argmax,
        });
    }

    Ok(LineScan {
        refined,
        grid_argmax,
        grid_max: best_v,
        cell,
    })
}

/// Location of the maximum of `g` on `[lo, hi]`, found by golden-section
/// search and cross-checked against a dense grid of `cfg.grid_points`
/// evaluations on every call. Monotone objectives resolve to the boundary.
pub fn argmax_1d<G>(g: G, lo: f64, hi: f64, cfg: &SolverConfig) -> Result<f64>
where
    G: FnMut(f64) -> Result<f64>,
{
    Ok(line_scan(g, lo, hi, cfg)?.refined)
}

/// Orthonormal basis of the (numerical) nullspace of a square matrix:
/// right singular vectors whose singular values fall at or below
/// `rank_tol * sigma_max`. The zero matrix yields the full basis.
pub fn nullspace(g: &GradientMatrix, rank_tol: f64) -> Result<Vec<Vec<f64>>> {
    if !(rank_tol > 0.0 && rank_tol < 1.0) {
        return Err(Error::InvalidConfig("rank_tol must lie in (0, 1)".into()));
    }
    let n = g.n();
    let mut data = Vec::with_capacity(n * n);
    for i in 0..n {
        data.extend_from_slice(g.row(i));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix passed to nullspace".into()));
    }
    let mat = DMatrix::from_row_slice(n, n, &data);
    let svd = mat.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::NonFinite("SVD failed to produce singular vectors".into()))?;
    let sigma_max = svd.singular_values.iter().fold(0.0f64, |m, s| m.max(*s));
    let threshold = rank_tol * sigma_max;
    let mut basis = Vec::new();
    for (k, s) in svd.singular_values.iter().enumerate() {
        if *s <= threshold {
            basis.push(v_t.row(k).iter().copied().collect::<Vec<f64>>());
        }
    }
    Ok(basis)
}

/// Damped Newton iteration for `F(x) = 0` with a central finite-difference
/// Jacobian. The step solves the local linear model through a truncated
/// SVD pseudo-inverse (cutoff `rank_tol * sigma_max`), which keeps
/// rank-deficient systems — equilibrium faces rather than isolated roots —
/// convergent instead of exploding. Each step is halved (up to 40 times)
/// until the residual norm decreases and the trial point satisfies
/// `domain_ok`. Returns the root and the number of iterations taken.
pub fn newton_root<F, D>(
    f: F,
    x0: &[f64],
    cfg: &SolverConfig,
    domain_ok: D,
) -> Result<(Vec<f64>, usize)>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
    D: Fn(&[f64]) -> bool,
{
    cfg.validate()?;
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x)?;
    if fx.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: fx.len(),
        });
    }

    for iter in 0..cfg.max_iter {
        let norm = infinity_norm(&fx);
        if norm <= cfg.tol_grad {
            return Ok((x, iter));
        }

        // Central-difference Jacobian, column by column. Probes that leave
        // the domain (an iterate hugging a boundary) fall back to the
        // one-sided difference; a column with no usable probe ends the
        // iteration as non-convergence rather than a hard error.
        let mut jac = DMatrix::zeros(n, n);
        for j in 0..n {
            let h = 1e-6 * (1.0 + x[j].abs());
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let fp = if domain_ok(&xp) { f(&xp).ok() } else { None };
            let fm = if domain_ok(&xm) { f(&xm).ok() } else { None };
            let column: Vec<f64> = match (&fp, &fm) {
                (Some(fp), Some(fm)) => (0..n).map(|i| (fp[i] - fm[i]) / (2.0 * h)).collect(),
                (Some(fp), None) => (0..n).map(|i| (fp[i] - fx[i]) / h).collect(),
                (None, Some(fm)) => (0..n).map(|i| (fx[i] - fm[i]) / h).collect(),
                (None, None) => {
                    return Err(Error::NonConvergence {
                        iterations: iter,
                        residual: norm,
                        last: x,
                    })
                }
            };
            for i in 0..n {
                jac[(i, j)] = column[i];
            }
        }

        let rhs = DVector::from_iterator(n, fx.iter().map(|v| -v));
        let svd = jac.svd(true, true);
        let sigma_max = svd.singular_values.iter().fold(0.0f64, |m, s| m.max(*s));
        let cutoff = (cfg.rank_tol * sigma_max).max(f64::MIN_POSITIVE);
        let direction = svd.solve(&rhs, cutoff).map_err(|_| Error::NonConvergence {
            iterations: iter,
            residual: norm,
            last: x.clone(),
        })?;

        let mut accepted = false;
        let mut t = 1.0f64;
        for _ in 0..=40 {
            let xt: Vec<f64> = x
                .iter()
                .zip(direction.iter())
                .map(|(xi, di)| xi + t * di)
                .collect();
            if domain_ok(&xt) {
                if let Ok(ft) = f(&xt) {
                    if infinity_norm(&ft) < norm {
                        x = xt;
                        fx = ft;
                        accepted = true;
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        if !accepted {
            return Err(Error::NonConvergence {
                iterations: iter,
                residual: norm,
                last: x,
            });
        }
    }

    let norm = infinity_norm(&fx);
    if norm <= cfg.tol_grad {
        return Ok((x, cfg.max_iter));
    }
    Err(Error::NonConvergence {
        iterations: cfg.max_iter,
        residual: norm,
        last: x,
    })
}

/// Roots `system` at three orders of magnitude tighter than the caller's
/// tolerance, so downstream gates that measure the same point in a
/// different normalization keep their margin. A stall above the inner
/// target that still meets the caller's tolerance is accepted — the
/// oracle-backed verifiers downstream have the final word anyway.
pub(crate) fn root_with_margin<F, D>(
    system: F,
    x0: &[f64],
    cfg: &SolverConfig,
    domain_ok: D,
) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
    D: Fn(&[f64]) -> bool,
{
    let inner = SolverConfig {
        tol_grad: (cfg.tol_grad * 1e-3).max(1e-15),
        ..cfg.clone()
    };
    match newton_root(&system, x0, &inner, &domain_ok) {
        Ok((x, _iters)) => Ok(x),
        Err(Error::NonConvergence { residual, last, .. })
            if residual <= cfg.tol_grad && domain_ok(&last) =>
        {
            Ok(last)
        }
        Err(e) => Err(e),
    }
}

/// Central-difference gradient of a scalar function; the reference
/// implementation the analytic gradients are tested against.
pub fn central_gradient<F>(f: F, x: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let mut out = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += h;
        xm[j] -= h;
        out.push((f(&xp)? - f(&xm)?) / (2.0 * h));
    }
    Ok(out)
}
