//! Lower-bound shifts that turn Pareto points into Kantian equilibria.
//!
//! Given an interior efficient profile `x_p`, pick a strictly positive unit
//! direction `v` in the nullspace of the gradient matrix `G(x_p)` and a
//! step `eps = theta * eps_max` with `eps_max = min_i x_p_i / v_i`. The
//! shift `c = x_p - eps * v` defines a floored game `U~_i(z) = U_i(z + c)`
//! whose multiplicative Kantian equilibrium is `z* = x_p - c = eps * v`:
//! every stationarity product `grad U~_i(z*) . z* = eps * (G v)_i` vanishes
//! by the choice of `v`, and ray concavity does the rest. At `z*` players
//! enjoy exactly the payoffs of `x_p`.
//!
//! The arithmetic is arranged so that `z* + c == x_p` holds *exactly* in
//! floating point (a Sterbenz-style adjustment absorbs the one rounding
//! error into whichever side tolerates it), and every constructed plan is
//! re-verified against the dense deviation-grid oracle before it is
//! returned.

use crate::error::{Error, Result};
use crate::game::{GradientMatrix, PayoffModel};
use crate::kantian::{mke_residual, verify_mke, EquilibriumReport};
use crate::solve::{nullspace, SolverConfig};

/// Minimum component of an acceptable interior tangent direction.
pub const POSITIVE_MARGIN: f64 = 1e-9;

/// The geometric part of a shift construction.
#[derive(Debug, Clone)]
pub struct ShiftGeometry {
    /// The Pareto profile being realized.
    pub x_p: Vec<f64>,
    /// Unit tangent direction, strictly positive.
    pub v: Vec<f64>,
    /// Largest step keeping `c = x_p - eps * v` nonnegative.
    pub eps_max: f64,
    /// Actual step, `theta * eps_max`.
    pub eps: f64,
    pub theta: f64,
    /// Lower-bound shift vector.
    pub c: Vec<f64>,
    /// Equilibrium of the shifted game; `z_star + c == x_p` exactly.
    pub z_star: Vec<f64>,
}

/// A fully verified shift construction.
#[derive(Debug, Clone)]
pub struct ShiftPlan {
    pub geometry: ShiftGeometry,
    pub verification: EquilibriumReport,
}

/// The game seen by players who control only the margin above a floor:
/// `U~_i(z) = U_i(z + shift)`.
#[derive(Debug, Clone)]
pub struct ShiftedGame<'a, M: PayoffModel + ?Sized> {
    base: &'a M,
    shift: Vec<f64>,
}

impl<'a, M: PayoffModel + ?Sized> ShiftedGame<'a, M> {
    pub fn new(base: &'a M, shift: Vec<f64>) -> Result<Self> {
        if shift.len() != base.num_players() {
            return Err(Error::DimensionMismatch {
                expected: base.num_players(),
                got: shift.len(),
            });
        }
        if shift.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidProfile(
                "shift vector must be finite and nonnegative".into(),
            ));
        }
        Ok(ShiftedGame { base, shift })
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    fn lift(&self, z: &[f64]) -> Vec<f64> {
        z.iter().zip(&self.shift).map(|(zi, ci)| zi + ci).collect()
    }
}

impl<M: PayoffModel + ?Sized> PayoffModel for ShiftedGame<'_, M> {
    fn num_players(&self) -> usize {
        self.base.num_players()
    }

    fn payoff(&self, z: &[f64], player: usize) -> Result<f64> {
        self.base.payoff(&self.lift(z), player)
    }

    fn gradient_row(&self, z: &[f64], player: usize) -> Result<Vec<f64>> {
        // d/dz_j U(z + c) = (dU/dx_j)(z + c): a pure translation.
        self.base.gradient_row(&self.lift(z), player)
    }
}

/// A diagonal reparametrization `U~_i(y) = U_i(scale .* y + offset)` for
/// studying how equilibria respond to rescaled action units and floors.
#[derive(Debug, Clone)]
pub struct AffineGame<'a, M: PayoffModel + ?Sized> {
    base: &'a M,
    scale: Vec<f64>,
    offset: Vec<f64>,
}

impl<'a, M: PayoffModel + ?Sized> AffineGame<'a, M> {
    pub fn new(base: &'a M, scale: Vec<f64>, offset: Vec<f64>) -> Result<Self> {
        let n = base.num_players();
        if scale.len() != n || offset.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: if scale.len() != n {
                    scale.len()
                } else {
                    offset.len()
                },
            });
        }
        if scale.iter().any(|s| !s.is_finite() || *s <= 0.0) {
            return Err(Error::InvalidProfile(
                "scales must be finite and strictly positive".into(),
            ));
        }
        if offset.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::InvalidProfile(
                "offsets must be finite and nonnegative".into(),
            ));
        }
        Ok(AffineGame {
            base,
            scale,
            offset,
        })
    }

    pub fn map_to_base(&self, y: &[f64]) -> Vec<f64> {
        y.iter()
            .zip(&self.scale)
            .zip(&self.offset)
            .map(|((yi, si), ti)| si * yi + ti)
            .collect()
    }
}

impl<M: PayoffModel + ?Sized> PayoffModel for AffineGame<'_, M> {
    fn num_players(&self) -> usize {
        self.base.num_players()
    }

    fn payoff(&self, y: &[f64], player: usize) -> Result<f64> {
        self.base.payoff(&self.map_to_base(y), player)
    }

    fn gradient_row(&self, y: &[f64], player: usize) -> Result<Vec<f64>> {
        // Chain rule: d/dy_j U(S y + t) = s_j * (dU/dx_j)(S y + t).
        let row = self.base.gradient_row(&self.map_to_base(y), player)?;
        Ok(row.iter().zip(&self.scale).map(|(g, s)| g * s).collect())
    }
}

/// The strictly positive unit tangent to the efficient set at `x`: a
/// nullspace direction of the gradient matrix, oriented positive. When the
/// nullspace has dimension above one (degenerate geometry), the projection
/// of the all-ones direction onto it is used.
pub fn tangent_direction<M: PayoffModel + ?Sized>(
    model: &M,
    x: &[f64],
    cfg: &SolverConfig,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    let g = model.gradient(x)?;
    let basis = nullspace(&g, cfg.rank_tol)?;
    if basis.is_empty() {
        return Err(Error::NoInteriorShiftDirection);
    }
    let n = x.len();
    let mut v = if basis.len() == 1 {
        basis[0].clone()
    } else {
        // Project the all-ones direction onto the nullspace.
        let mut acc = vec![0.0; n];
        for b in &basis {
            let w: f64 = b.iter().sum();
            for (a, bi) in acc.iter_mut().zip(b) {
                *a += w * bi;
            }
        }
        acc
    };
    let norm: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if norm < POSITIVE_MARGIN {
        return Err(Error::NoInteriorShiftDirection);
    }
    for a in &mut v {
        *a /= norm;
    }
    if v.iter().sum::<f64>() < 0.0 {
        for a in &mut v {
            *a = -*a;
        }
    }
    if v.iter().any(|a| *a < POSITIVE_MARGIN) {
        return Err(Error::NoInteriorShiftDirection);
    }
    Ok(v)
}

fn relative_mke_residual<M: PayoffModel + ?Sized>(model: &M, x: &[f64]) -> Result<(Vec<f64>, f64)> {
    let residuals = mke_residual(model, x)?;
    let g = model.gradient(x)?;
    let x_norm: f64 = x.iter().map(|a| a * a).sum::<f64>().sqrt();
    let mut worst = 0.0f64;
    for (i, r) in residuals.iter().enumerate() {
        let row_norm: f64 = g.row(i).iter().map(|a| a * a).sum::<f64>().sqrt();
        worst = worst.max(r.abs() / (row_norm * x_norm).max(1.0));
    }
    Ok((residuals, worst))
}

/// Builds the shift geometry for realizing `x_p` at deviation fraction
/// `theta` (strictly between 0 and 1). Pure construction — no oracle here;
/// [`build_shift`] adds verification.
///
/// A profile that is already a Kantian equilibrium of the base game (its
/// relative stationarity residual is within `cfg.tol_grad`) short-circuits
/// to the zero shift.
pub fn plan_geometry<M: PayoffModel + ?Sized>(
    model: &M,
    x_p: &[f64],
    theta: f64,
    cfg: &SolverConfig,
) -> Result<ShiftGeometry> {
    cfg.validate()?;
    let n = model.num_players();
    if x_p.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x_p.len(),
        });
    }
    if x_p.iter().any(|v| !v.is_finite() || *v <= 0.0) {
        return Err(Error::NonInterior(
            "shift construction needs a strictly positive profile".into(),
        ));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "theta must lie strictly inside (0, 1), got {theta}"
        )));
    }

    let (_, worst) = relative_mke_residual(model, x_p)?;
    if worst <= cfg.tol_grad {
        // Already an equilibrium: the profile itself spans the tangent.
        let norm: f64 = x_p.iter().map(|a| a * a).sum::<f64>().sqrt();
        let v: Vec<f64> = x_p.iter().map(|a| a / norm).collect();
        return Ok(ShiftGeometry {
            x_p: x_p.to_vec(),
            v,
            eps_max: norm,
            eps: 0.0,
            theta,
            c: vec![0.0; n],
            z_star: x_p.to_vec(),
        });
    }

    let v = tangent_direction(model, x_p, cfg)?;
    let eps_max = x_p
        .iter()
        .zip(&v)
        .map(|(xi, vi)| xi / vi)
        .fold(f64::INFINITY, f64::min);
    if !(eps_max.is_finite() && eps_max > 0.0) {
        return Err(Error::NoInteriorShiftDirection);
    }
    let eps = theta * eps_max;

    let mut c = Vec::with_capacity(n);
    let mut z_star = Vec::with_capacity(n);
    for i in 0..n {
        let mut ci = x_p[i] - eps * v[i];
        let mut zi = x_p[i] - ci;
        // One of the two differences is exact by the Sterbenz lemma; make
        // the pair consistent so z + c reproduces x_p bit for bit.
        if zi + ci != x_p[i] {
            if zi >= ci {
                ci = x_p[i] - zi;
            } else {
                zi = x_p[i] - ci;
            }
        }
        if !(ci >= 0.0 && zi > 0.0 && (zi + ci == x_p[i])) {
            return Err(Error::DegenerateRoot(format!(
                "coordinate {i}: step theta = {theta} leaves no representable margin"
            )));
        }
        c.push(ci);
        z_star.push(zi);
    }

    Ok(ShiftGeometry {
        x_p: x_p.to_vec(),
        v,
        eps_max,
        eps,
        theta,
        c,
        z_star,
    })
}

/// Full shift construction: geometry plus oracle verification that
/// `z_star` really is a Kantian equilibrium of the shifted game. A failed
/// verdict is an error here — an unverified plan is not a plan.
pub fn build_shift<M: PayoffModel + ?Sized>(
    model: &M,
    x_p: &[f64],
    theta: f64,
    a_hi: f64,
    cfg: &SolverConfig,
) -> Result<ShiftPlan> {
    let geometry = plan_geometry(model, x_p, theta, cfg)?;
    let shifted = ShiftedGame::new(model, geometry.c.clone())?;
    let verification = verify_mke(&shifted, &geometry.z_star, a_hi, cfg)?;
    match &verification.verdict {
        crate::kantian::Verdict::Verified => Ok(ShiftPlan {
            geometry,
            verification,
        }),
        crate::kantian::Verdict::Failed { reasons } => {
            Err(Error::VerificationFailed(reasons.join("; ")))
        }
    }
}

/// Two-player tangent line at `x`, written as `x_1 = slope * x_2 +
/// intercept`. Errors when the tangent is parallel to the `x_1` axis.
pub fn tangent_line_2d<M: PayoffModel + ?Sized>(
    model: &M,
    x: &[f64],
    cfg: &SolverConfig,
) -> Result<(f64, f64)> {
    if model.num_players() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: model.num_players(),
        });
    }
    let v = tangent_direction(model, x, cfg)?;
    if v[1].abs() < POSITIVE_MARGIN {
        return Err(Error::GradientSingular(
            "tangent direction parallel to the x_1 axis".into(),
        ));
    }
    let slope = v[0] / v[1];
    let intercept = x[0] - slope * x[1];
    Ok((slope, intercept))
}

/// Convenience check used by tests and the CLI: the residual orthogonality
/// `max_i |grad U_i(x_p) . z_star|`, normalized like the verifier does.
pub fn orthogonality_defect<M: PayoffModel + ?Sized>(
    model: &M,
    geometry: &ShiftGeometry,
) -> Result<f64> {
    let g: GradientMatrix = model.gradient(&geometry.x_p)?;
    let z_norm: f64 = geometry.z_star.iter().map(|a| a * a).sum::<f64>().sqrt();
    let mut worst = 0.0f64;
    for i in 0..model.num_players() {
        let dot: f64 = g
            .row(i)
            .iter()
            .zip(&geometry.z_star)
            .map(|(a, b)| a * b)
            .sum();
        let row_norm: f64 = g.row(i).iter().map(|a| a * a).sum::<f64>().sqrt();
        worst = worst.max(dot.abs() / (row_norm * z_norm).max(1.0));
    }
    Ok(worst)
}
