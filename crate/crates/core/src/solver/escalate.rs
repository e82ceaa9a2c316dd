//! Step-count escalation: solve at `m`, seed `m + 1` with splits of the best
//! solution plus fresh starts, and check that nothing better appears.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::ObjectiveConfig;
use crate::stepfn::{aligned_l1, StepFunction};

use super::{solve_report, ConstraintSet, SolveReport, SolverConfig};

pub const SPLIT_LAMBDAS: [f64; 3] = [0.25, 0.5, 0.75];
pub const OBJECTIVE_TOL: f64 = 1e-6;
pub const GAP_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EscalationLevel {
    pub m: usize,
    pub best_objective: f64,
    /// `best(m) − best(m − 1)`; absent at the first level.
    pub objective_change: Option<f64>,
    /// Aligned L1 distance from the best solution to the previous level's best
    /// (equal, as a function, to any of its splits).
    pub l1_gap: Option<f64>,
    pub objective_nonincreasing: bool,
    pub pod_holds: bool,
    pub report: SolveReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EscalationReport {
    pub levels: Vec<EscalationLevel>,
    /// True iff the verdict holds at every level after the first.
    pub pod_holds: bool,
    pub objective_tol: f64,
    pub gap_tol: f64,
}

/// Solve at `m_from, …, m_to`, seeding each level with splits
/// `θ(W*, λ, k)` of the previous best for `λ ∈ {¼, ½, ¾}` and every `k`.
pub fn escalate(
    cs: &ConstraintSet,
    cfg: &SolverConfig,
    obj: &ObjectiveConfig,
    m_from: usize,
    m_to: usize,
) -> Result<EscalationReport> {
    if m_from == 0 || m_to < m_from {
        return Err(Error::InvalidConfig(format!("bad escalation range {m_from}..={m_to}")));
    }
    let mut levels: Vec<EscalationLevel> = Vec::new();
    let mut prev: Option<(StepFunction, f64)> = None;
    for m in m_from..=m_to {
        let level_cfg = SolverConfig { m, ..cfg.clone() };
        let seeds: Vec<StepFunction> = match &prev {
            None => Vec::new(),
            Some((w, _)) => {
                let mut s = Vec::new();
                for k in 0..w.m() {
                    for &lambda in &SPLIT_LAMBDAS {
                        s.push(w.split(lambda, k)?);
                    }
                }
                s
            }
        };
        let report = solve_report(cs, &level_cfg, obj, &seeds)?.into_result()?;
        let best = report.best_solution().expect("converged report has a best solution");
        let (best_w, best_f) = (best.step.clone(), best.objective);
        let (change, gap) = match &prev {
            None => (None, None),
            Some((pw, pf)) => (Some(best_f - pf), Some(aligned_l1(&best_w, pw)?)),
        };
        let nonincreasing = change.is_none_or(|d| d <= OBJECTIVE_TOL);
        let stable = change.is_none_or(|d| d.abs() <= OBJECTIVE_TOL);
        let close = gap.is_none_or(|g| g < GAP_TOL);
        levels.push(EscalationLevel {
            m,
            best_objective: best_f,
            objective_change: change,
            l1_gap: gap,
            objective_nonincreasing: nonincreasing,
            pod_holds: stable && close,
            report,
        });
        prev = Some((best_w, best_f));
    }
    Ok(EscalationReport {
        pod_holds: levels.iter().all(|l| l.pod_holds),
        levels,
        objective_tol: OBJECTIVE_TOL,
        gap_tol: GAP_TOL,
    })
}
