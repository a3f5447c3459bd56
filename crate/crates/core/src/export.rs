//! CSV rendering for frontier sweeps, shift plans, and equilibrium reports.
//!
//! All numeric cells use a fixed 12-significant-digit scientific format so
//! that repeated runs with identical inputs produce byte-identical files.
//! Functions here emit pure CSV (header + rows); callers that want a config
//! echo prepend their own `# key = value` comment lines.

use crate::kantian::{EquilibriumReport, Verdict};
use crate::pareto::Frontier;
use crate::shift::ShiftPlan;

/// Render one numeric cell: 12 significant digits in scientific notation,
/// so parsed values match the solver output to 5e-12 relative.
pub fn fmt_sig(v: f64) -> String {
    format!("{v:.11e}")
}

fn verdict_cell(v: &Verdict) -> &'static str {
    if v.is_verified() {
        "verified"
    } else {
        "failed"
    }
}

fn push_row(out: &mut String, cells: &[String]) {
    out.push_str(&cells.join(","));
    out.push('\n');
}

fn indexed(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}_{i}")).collect()
}

/// CSV for a Pareto sweep: certified multipliers, the efficient profile, its
/// payoffs, and the stationarity residual of the efficiency certificate.
///
/// Header for `n` players:
/// `m_1,..,m_n,x_1,..,x_n,U_1,..,U_n,cert_residual`
pub fn frontier_csv(frontier: &Frontier, n: usize) -> String {
    let mut header: Vec<String> = Vec::new();
    header.extend(indexed("m", n));
    header.extend(indexed("x", n));
    header.extend(indexed("U", n));
    header.push("cert_residual".into());

    let mut out = String::new();
    push_row(&mut out, &header);
    for fp in &frontier.points {
        let p = &fp.point;
        let mut cells: Vec<String> = Vec::new();
        cells.extend(p.multipliers.iter().map(|v| fmt_sig(*v)));
        cells.extend(p.x.iter().map(|v| fmt_sig(*v)));
        cells.extend(p.payoffs.iter().map(|v| fmt_sig(*v)));
        cells.push(fmt_sig(p.cert_residual));
        push_row(&mut out, &cells);
    }
    out
}

/// CSV for shift plans: the target profile, the constructed shift vector,
/// the step along the tangent direction, and the verification summary.
///
/// Header for `n` players:
/// `x_p_1,..,x_p_n,c_1,..,c_n,eps,theta,residual_max,argmax_1,..,argmax_n,verdict`
pub fn plan_csv(plans: &[ShiftPlan], n: usize) -> String {
    let mut header: Vec<String> = Vec::new();
    header.extend(indexed("x_p", n));
    header.extend(indexed("c", n));
    header.push("eps".into());
    header.push("theta".into());
    header.push("residual_max".into());
    header.extend(indexed("argmax", n));
    header.push("verdict".into());

    let mut out = String::new();
    push_row(&mut out, &header);
    for plan in plans {
        let g = &plan.geometry;
        let r = &plan.verification;
        let mut cells: Vec<String> = Vec::new();
        cells.extend(g.x_p.iter().map(|v| fmt_sig(*v)));
        cells.extend(g.c.iter().map(|v| fmt_sig(*v)));
        cells.push(fmt_sig(g.eps));
        cells.push(fmt_sig(g.theta));
        cells.push(fmt_sig(r.max_rel_residual));
        cells.extend(r.oracle_argmax.iter().map(|v| fmt_sig(*v)));
        cells.push(verdict_cell(&r.verdict).into());
        push_row(&mut out, &cells);
    }
    out
}

/// CSV for a single equilibrium report (one row).
///
/// Header for `n` players:
/// `x_1,..,x_n,U_1,..,U_n,residual_1,..,residual_n,argmax_1,..,argmax_n,max_rel_residual,verdict`
pub fn report_csv(report: &EquilibriumReport) -> String {
    let n = report.x.len();
    let mut header: Vec<String> = Vec::new();
    header.extend(indexed("x", n));
    header.extend(indexed("U", n));
    header.extend(indexed("residual", n));
    header.extend(indexed("argmax", n));
    header.push("max_rel_residual".into());
    header.push("verdict".into());

    let mut out = String::new();
    push_row(&mut out, &header);
    let mut cells: Vec<String> = Vec::new();
    cells.extend(report.x.iter().map(|v| fmt_sig(*v)));
    cells.extend(report.payoffs.iter().map(|v| fmt_sig(*v)));
    cells.extend(report.residuals.iter().map(|v| fmt_sig(*v)));
    cells.extend(report.oracle_argmax.iter().map(|v| fmt_sig(*v)));
    cells.push(fmt_sig(report.max_rel_residual));
    cells.push(verdict_cell(&report.verdict).into());
    push_row(&mut out, &cells);
    out
}
