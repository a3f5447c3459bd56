//! Dispatch and output plumbing for the subcommands.
//!
//! Contract: CSV (with `# key = value` config comments) goes to stdout or
//! `--out`; prose goes to stderr. Exit code 0 means every reported claim
//! was oracle-verified, 1 means a solver or verification failure, 2 means
//! the input itself was rejected.

use std::path::PathBuf;

use kantian_core::{
    build_shift, certify_efficiency, frontier_csv, plan_csv, report_csv, scalarize, select_point,
    solve_mke, solve_nash, sweep_frontier, validate_game, verify_mke, CertifyOutcome, Criterion,
    EquilibriumReport, Game, PayoffModel, ShiftPlan, ShiftedGame, SolverConfig, Verdict, Violation,
    DEFAULT_CERT_TOL,
};

use crate::args::{
    Cli, Command, CommonArgs, CriterionArg, FrontierArgs, MkeArgs, NashArgs, RealizeArgs,
    SweepRealizeArgs, ValidateArgs, VerifyArgs,
};
use crate::game_file::{family_name, load_game};
use crate::Failure;

/// What a subcommand hands back to `run` for writing.
pub struct Output {
    pub csv: Option<String>,
    pub out: Option<PathBuf>,
    pub code: i32,
}

fn solver_config(common: &CommonArgs) -> SolverConfig {
    SolverConfig {
        tol_grad: common.tol,
        seed: common.seed,
        ..SolverConfig::default()
    }
}

/// Collapses per-profile repeats of the same structural problem into one
/// exemplar line with a count, keyed by violation kind and player indices.
fn violation_summary(violations: &[Violation]) -> Vec<String> {
    let mut groups: std::collections::BTreeMap<(u8, usize, usize), (String, usize)> =
        std::collections::BTreeMap::new();
    for v in violations {
        let key = match v {
            Violation::OwnConcavity { player, .. } => (0u8, *player, 0),
            Violation::RayConcavity { player, .. } => (1, *player, 0),
            Violation::ExternalitySign {
                player, partner, ..
            } => (2, *player, *partner),
            Violation::NonUnidirectional { .. } => (3, 0, 0),
        };
        let entry = groups.entry(key).or_insert_with(|| (v.to_string(), 0));
        entry.1 += 1;
    }
    groups
        .into_values()
        .map(|(line, count)| {
            if count == 1 {
                line
            } else {
                format!("{line} (at {count} sampled profiles)")
            }
        })
        .collect()
}

/// Every command refuses to run on a game that fails its assumption checks.
fn gate(game: &Game, common: &CommonArgs) -> Result<(), Failure> {
    let report = validate_game(game, common.samples, common.seed)?;
    if report.passed() {
        return Ok(());
    }
    let mut message = format!(
        "game failed validation at {} sampled profiles:",
        report.samples
    );
    for line in violation_summary(&report.violations) {
        message.push_str("\n  ");
        message.push_str(&line);
    }
    Err(Failure { code: 2, message })
}

fn check_theta(theta: f64) -> Result<(), Failure> {
    if theta > 0.0 && theta < 1.0 {
        Ok(())
    } else {
        Err(Failure {
            code: 2,
            message: format!("theta must lie strictly between 0 and 1, got {theta}"),
        })
    }
}

/// `# key = value` comment lines prepended to every CSV table.
fn echo(pairs: &[(&str, String)]) -> String {
    let mut s = String::new();
    for (k, v) in pairs {
        s.push_str(&format!("# {k} = {v}\n"));
    }
    s
}

fn base_echo(command: &str, game: &Game, common: &CommonArgs) -> Vec<(&'static str, String)> {
    vec![
        ("command", command.to_string()),
        ("family", family_name(game).to_string()),
        ("players", game.num_players().to_string()),
        ("tol", format!("{:e}", common.tol)),
        ("seed", common.seed.to_string()),
    ]
}

fn show(xs: &[f64]) -> String {
    let cells: Vec<String> = xs.iter().map(|v| format!("{v:.6e}")).collect();
    format!("[{}]", cells.join(", "))
}

fn verdict_prose(report: &EquilibriumReport) -> (String, i32) {
    match &report.verdict {
        Verdict::Verified => (
            format!(
                "verdict: verified (max relative residual {:.3e})",
                report.max_rel_residual
            ),
            0,
        ),
        Verdict::Failed { reasons } => (format!("verdict: FAILED — {}", reasons.join("; ")), 1),
    }
}

pub fn execute(cli: Cli) -> Result<Output, Failure> {
    match cli.command {
        Command::Validate(a) => validate(a),
        Command::Frontier(a) => frontier(a),
        Command::Mke(a) => mke(a),
        Command::Nash(a) => nash(a),
        Command::Verify(a) => verify(a),
        Command::Realize(a) => realize(a),
        Command::SweepRealize(a) => sweep_realize(a),
    }
}

fn validate(a: ValidateArgs) -> Result<Output, Failure> {
    let game = load_game(&a.common.game)?;
    let report = validate_game(&game, a.common.samples, a.common.seed)?;
    eprintln!(
        "{} with {} players, checked at {} sampled profiles",
        family_name(&game),
        game.num_players(),
        report.samples
    );
    let code = if report.passed() {
        eprintln!("all assumptions hold");
        0
    } else {
        for line in violation_summary(&report.violations) {
            eprintln!("violation: {line}");
        }
        2
    };
    Ok(Output {
        csv: None,
        out: a.common.out,
        code,
    })
}

fn frontier(a: FrontierArgs) -> Result<Output, Failure> {
    let game = load_game(&a.common.game)?;
    gate(&game, &a.common)?;
    let cfg = solver_config(&a.common);
    let n = game.num_players();

    let frontier = sweep_frontier(&game, a.points, &cfg)?;
    eprintln!(
        "swept {} weight vectors: {} certified efficient, {} rejected",
        a.points,
        frontier.points.len(),
        frontier.rejected
    );

    if let Some(kind) = a.criterion {
        let mut criterion = Criterion::new(kind.into());
        criterion.disagreement = a.disagreement.clone();
        let sel = select_point(&game, &criterion, a.points, &cfg)?;
        eprintln!(
            "{} selection: weights {}, x {}, payoffs {}, objective {:.6e}",
            kind.label(),
            show(&sel.weights),
            show(&sel.point.x),
            show(&sel.point.payoffs),
            sel.objective
        );
        if let Some(d) = &sel.disagreement {
            eprintln!("disagreement payoffs {}", show(d));
        }
    }

    let mut pairs = base_echo("frontier", &game, &a.common);
    pairs.push(("points", a.points.to_string()));
    let mut csv = echo(&pairs);
    csv.push_str(&frontier_csv(&frontier, n));

    let code = if frontier.points.is_empty() {
        eprintln!("no interior efficient points at this sweep resolution; try more --points or explicit weights");
        1
    } else {
        0
    };
    Ok(Output {
        csv: Some(csv),
        out: a.common.out,
        code,
    })
}

fn mke(a: MkeArgs) -> Result<Output, Failure> {
    let game = load_game(&a.common.game)?;
    gate(&game, &a.common)?;
    let cfg = solver_config(&a.common);

    let report = solve_mke(&game, a.start.as_deref(), a.a_hi, &cfg)?;
    eprintln!(
        "kantian equilibrium: x {}, payoffs {}",
        show(&report.x),
        show(&report.payoffs)
    );
    let (prose, code) = verdict_prose(&report);
    eprintln!("{prose}");

    let mut pairs = base_echo("mke", &game, &a.common);
    pairs.push(("a_hi", format!("{:e}", a.a_hi)));
    let mut csv = echo(&pairs);
    csv.push_str(&report_csv(&report));
    Ok(Output {
        csv: Some(csv),
        out: a.common.out,
        code,
    })
}

fn nash(a: NashArgs) -> Result<Output, Failure> {
    let game = load_game(&a.common.game)?;
    gate(&game, &a.common)?;
    let cfg = solver_config(&a.common);

    let report = solve_nash(&game, a.a_hi, &cfg)?;
    eprintln!(
        "best-response equilibrium: x {}, payoffs {}",
        show(&report.x),
        show(&report.payoffs)
    );
    let (prose, code) = verdict_prose(&report);
    eprintln!("{prose}");

    let mut pairs = base_echo("nash", &game, &a.common);
    pairs.push(("a_hi", format!("{:e}", a.a_hi)));
    let mut csv = echo(&pairs);
    csv.push_str(&report_csv(&report));
    Ok(Output {
        csv: Some(csv),
        out: a.common.out,
        code,
    })
}

fn verify(a: VerifyArgs) -> Result<Output, Failure> {
    let game = load_game(&a.common.game)?;
    gate(&game, &a.common)?;
    let cfg = solver_config(&a.common);

    let report = match &a.c {
        None => verify_mke(&game, &a.point, a.a_hi, &cfg)?,
        Some(c) => {
            let shifted = ShiftedGame::new(&game, c.clone())?;
            eprintln!("verifying in the game shifted by c {}", show(c));
            verify_mke(&shifted, &a.point, a.a_hi, &cfg)?
        }
    };
    let (prose, code) = verdict_prose(&report);
    eprintln!("{prose}");

    let mut pairs = base_echo("verify", &game, &a.common);
    pairs.push(("a_hi", format!("{:e}", a.a_hi)));
    let mut csv = echo(&pairs);
    csv.push_str(&report_csv(&report));
    Ok(Output {
        csv: Some(csv),
        out: a.common.out,
        code,
    })
}

fn realize(a: RealizeArgs) -> Result<Output, Failure> {
    let game = load_game(&a.common.game)?;
    gate(&game, &a.common)?;
    check_theta(a.theta)?;
    let cfg = solver_config(&a.common);
    let n = game.num_players();

    let x_p: Vec<f64> = if let Some(point) = &a.point {
        // Direct targets get a courtesy certificate check; the shift
        // construction itself will fail on points that are not efficient.
        match certify_efficiency(&game, point, DEFAULT_CERT_TOL, &cfg)? {
            CertifyOutcome::Accepted { residual, .. } => {
                eprintln!("target certified efficient (residual {residual:.3e})");
            }
            CertifyOutcome::Rejected { residual, .. } => {
                eprintln!(
                    "warning: efficiency certificate rejected (residual {residual:.3e}); \
                     the construction will likely fail"
                );
            }
        }
        point.clone()
    } else if let Some(w) = &a.weights {
        let p = scalarize(&game, w, &cfg)?;
        eprintln!(
            "weights {} target x_p {} (certificate residual {:.3e})",
            show(w),
            show(&p.x),
            p.cert_residual
        );
        p.x
    } else {
        let kind = a.criterion.expect("clap group guarantees a target");
        let mut criterion = Criterion::new(kind.into());
        criterion.disagreement = a.disagreement.clone();
        let sel = select_point(&game, &criterion, a.points, &cfg)?;
        eprintln!(
            "criterion selected x_p {} with payoffs {}",
            show(&sel.point.x),
            show(&sel.point.payoffs)
        );
        sel.point.x
    };

    let plan = build_shift(&game, &x_p, a.theta, a.a_hi, &cfg)?;
    eprintln!(
        "shift c {} realizes z* {} (eps {:.6e} of eps_max {:.6e})",
        show(&plan.geometry.c),
        show(&plan.geometry.z_star),
        plan.geometry.eps,
        plan.geometry.eps_max
    );
    let (prose, code) = verdict_prose(&plan.verification);
    eprintln!("{prose}");

    let mut pairs = base_echo("realize", &game, &a.common);
    pairs.push(("theta", format!("{:e}", a.theta)));
    pairs.push(("a_hi", format!("{:e}", a.a_hi)));
    let mut csv = echo(&pairs);
    csv.push_str(&plan_csv(std::slice::from_ref(&plan), n));
    Ok(Output {
        csv: Some(csv),
        out: a.common.out,
        code,
    })
}

fn sweep_realize(a: SweepRealizeArgs) -> Result<Output, Failure> {
    let game = load_game(&a.common.game)?;
    gate(&game, &a.common)?;
    check_theta(a.theta)?;
    let cfg = solver_config(&a.common);
    let n = game.num_players();

    let frontier = sweep_frontier(&game, a.points, &cfg)?;
    let mut plans: Vec<ShiftPlan> = Vec::new();
    let mut failures = 0usize;
    for fp in &frontier.points {
        match build_shift(&game, &fp.point.x, a.theta, a.a_hi, &cfg) {
            Ok(plan) => plans.push(plan),
            Err(e) => {
                failures += 1;
                eprintln!("realization failed at x_p {}: {e}", show(&fp.point.x));
            }
        }
    }
    eprintln!(
        "swept {} weight vectors: {} certified efficient, {} rejected; realized {}/{}",
        a.points,
        frontier.points.len(),
        frontier.rejected,
        plans.len(),
        frontier.points.len()
    );

    let mut pairs = base_echo("sweep-realize", &game, &a.common);
    pairs.push(("points", a.points.to_string()));
    pairs.push(("theta", format!("{:e}", a.theta)));
    pairs.push(("a_hi", format!("{:e}", a.a_hi)));
    let mut csv = echo(&pairs);
    csv.push_str(&plan_csv(&plans, n));

    let code = if frontier.points.is_empty() {
        eprintln!("no interior efficient points at this sweep resolution; try more --points or explicit weights");
        1
    } else if failures > 0 {
        1
    } else {
        0
    };
    Ok(Output {
        csv: Some(csv),
        out: a.common.out,
        code,
    })
}

impl CriterionArg {
    fn label(self) -> &'static str {
        match self {
            CriterionArg::Utilitarian => "utilitarian",
            CriterionArg::Maximin => "maximin",
            CriterionArg::NashBargaining => "nash-bargaining",
            CriterionArg::KalaiSmorodinsky => "kalai-smorodinsky",
        }
    }
}
