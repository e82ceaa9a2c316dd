//! Constrained minimization of density functionals over `m`-step functions.
//!
//! Each restart runs an augmented-Lagrangian outer loop around a projected
//! gradient inner loop, then a Newton step on the KKT system. Converged
//! restarts are clustered and reported with their multipliers.

mod escalate;
mod kkt;
mod m0;
mod problem;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::jacobian;
use crate::error::{Error, Result};
use crate::model::{QuantumGraph, Signature};
use crate::objective::ObjectiveConfig;
use crate::stepfn::{aligned_l1, random_simplex, Mode, StepFunction};

pub use escalate::{escalate, EscalationLevel, EscalationReport, SPLIT_LAMBDAS};
pub use kkt::{fit_multipliers, kkt_residual, kkt_residual_a};
pub use m0::{find_m0, M0Config, M0Report};

use kkt::{fit_from_parts, newton_polish, norm};
use problem::Problem;

/// One equality constraint `t(F, W) = u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub graph: QuantumGraph,
    pub target: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// `(𝓕, u)` over a signature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub signature: Signature,
    pub constraints: Vec<Constraint>,
}

impl ConstraintSet {
    pub fn new(signature: Signature, constraints: Vec<(QuantumGraph, f64)>) -> Result<Self> {
        let cs = ConstraintSet {
            signature,
            constraints: constraints
                .into_iter()
                .map(|(graph, target)| Constraint {
                    graph,
                    target,
                    label: None,
                })
                .collect(),
        };
        cs.validate()?;
        Ok(cs)
    }

    /// Re-validate every constituent against the signature.
    pub fn validate(&self) -> Result<()> {
        self.signature.validate()?;
        for c in &self.constraints {
            if !c.target.is_finite() {
                return Err(Error::NonFinite);
            }
            c.graph.clone().validated(&self.signature)?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn targets(&self) -> Vec<f64> {
        self.constraints.iter().map(|c| c.target).collect()
    }

    pub fn graphs(&self) -> Vec<QuantumGraph> {
        self.constraints.iter().map(|c| c.graph.clone()).collect()
    }

    /// Whether every constituent is a linear hypergraph.
    pub fn all_linear(&self) -> bool {
        self.constraints.iter().all(|c| c.graph.all_linear())
    }
}

/// Solver settings. Every field has a default, so partial JSON is accepted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub m: usize,
    pub restarts: usize,
    pub seed: u64,
    pub mu0: f64,
    pub mu_growth: f64,
    pub mu_max: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    /// Projected-gradient norm at which the inner loop stops.
    pub inner_tol: f64,
    /// Max-abs constraint violation accepted for a solution.
    pub constraint_tol: f64,
    /// A entries are kept in `[eps_box, 1 - eps_box]` in graphon modes.
    pub eps_box: f64,
    pub pi_floor: f64,
    pub mode: Mode,
    pub fixed_pi: Option<Vec<f64>>,
    pub polish: bool,
    /// Aligned L1 distance below which two solutions are the same.
    pub cluster_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            m: 2,
            restarts: 16,
            seed: 0,
            mu0: 1e4,
            mu_growth: 10.0,
            mu_max: 1e8,
            max_outer: 50,
            max_inner: 5000,
            inner_tol: 1e-7,
            constraint_tol: 1e-8,
            eps_box: 1e-6,
            pi_floor: 1e-6,
            mode: Mode::GraphonInterior,
            fixed_pi: None,
            polish: true,
            cluster_tol: 1e-6,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if self.m == 0 {
            return bad("m must be at least 1");
        }
        if self.restarts == 0 {
            return bad("restarts must be at least 1");
        }
        for (name, v) in [
            ("inner_tol", self.inner_tol),
            ("constraint_tol", self.constraint_tol),
            ("mu0", self.mu0),
            ("mu_max", self.mu_max),
            ("cluster_tol", self.cluster_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(&format!("{name} must be positive"));
            }
        }
        if self.mu_growth < 1.0 {
            return bad("mu_growth must be at least 1");
        }
        if !(self.eps_box > 0.0 && self.eps_box < 0.5) {
            return bad("eps_box must lie in (0, 0.5)");
        }
        if !(self.pi_floor >= 0.0 && self.pi_floor * (self.m as f64) < 1.0) {
            return bad("pi_floor must be non-negative with m * pi_floor < 1");
        }
        if let Some(pi) = &self.fixed_pi {
            if pi.len() != self.m {
                return bad("fixed_pi length must equal m");
            }
            if pi.iter().any(|&p| !(p > 0.0)) || (pi.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                return bad("fixed_pi must be a positive vector summing to 1");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    NonConvergent,
    Infeasible,
}

/// A reported local minimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub step: StepFunction,
    pub objective: f64,
    /// Multipliers carried by the solver.
    pub beta: Vec<f64>,
    /// Least-squares multipliers recomputed from the solution.
    pub beta_fit: Vec<f64>,
    pub fit_residual: f64,
    pub kkt_residual: f64,
    /// Max-abs constraint violation.
    pub constraint_residual: f64,
    pub densities: Vec<f64>,
    pub jacobian_rank: usize,
    pub singular_values: Vec<f64>,
    /// Smallest distance of an entry to `{0, 1}`.
    pub boundary_margin: f64,
    pub restart: usize,
    /// Number of converged restarts in this cluster.
    pub multiplicity: usize,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
}

/// A restart that did not yield a reportable solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub restart: usize,
    pub objective: Option<f64>,
    /// Absent when the restart failed to evaluate.
    pub constraint_residual: Option<f64>,
    pub kkt_residual: Option<f64>,
    pub step: Option<StepFunction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    /// Sorted by objective; the best is first.
    pub solutions: Vec<Solution>,
    pub best: Option<usize>,
    pub restarts_run: usize,
    pub converged_restarts: usize,
    pub unconverged: Vec<RestartSummary>,
    pub seed: u64,
    pub config: SolverConfig,
    pub objective: ObjectiveConfig,
    pub relation_weights: Vec<f64>,
    /// False when some constituent is not linear (counting-lemma checks do not apply).
    pub constituents_linear: bool,
    pub warnings: Vec<String>,
}

impl SolveReport {
    pub fn best_solution(&self) -> Option<&Solution> {
        self.best.map(|i| &self.solutions[i])
    }

    /// Turn a non-converged status into the matching error.
    pub fn into_result(self) -> Result<SolveReport> {
        match self.status {
            SolveStatus::Converged => Ok(self),
            SolveStatus::Infeasible => Err(Error::Infeasible {
                best_residual: self
                    .unconverged
                    .iter()
                    .filter_map(|r| r.constraint_residual)
                    .fold(f64::INFINITY, f64::min),
            }),
            SolveStatus::NonConvergent => Err(Error::NonConvergent(format!(
                "{} restarts met the constraints but not the stationarity tolerance",
                self.unconverged
                    .iter()
                    .filter(|r| r.constraint_residual.is_some_and(|c| c < self.config.constraint_tol))
                    .count()
            ))),
        }
    }
}

struct Outcome {
    restart: usize,
    x: Vec<f64>,
    beta: Vec<f64>,
    outer: usize,
    inner: usize,
    failed: bool,
}

/// Minimize the objective subject to the constraints; errors unless at
/// least one restart converges.
pub fn solve(cs: &ConstraintSet, cfg: &SolverConfig, obj: &ObjectiveConfig) -> Result<SolveReport> {
    solve_report(cs, cfg, obj, &[])?.into_result()
}

/// Like [`solve`] but always returns the report (with its status), seeding
/// the first restarts from `inits` before the random ones.
pub fn solve_report(
    cs: &ConstraintSet,
    cfg: &SolverConfig,
    obj: &ObjectiveConfig,
    inits: &[StepFunction],
) -> Result<SolveReport> {
    cfg.validate()?;
    cs.validate()?;
    let weights = obj.weights(&cs.signature)?;
    let mut warnings = Vec::new();
    let n_params = cs.signature.array_parameter_count(cfg.m);
    if n_params < cs.len() {
        warnings.push(format!(
            "n(m,r,d) = {n_params} is smaller than the number of constraints ({})",
            cs.len()
        ));
    }
    for w in inits {
        if w.m() != cfg.m || !w.signature().compatible(&cs.signature) {
            return Err(Error::InvalidConfig("initial step function does not match m or signature".into()));
        }
    }
    let p = Problem::new(cs, obj, cfg.m, cfg.fixed_pi.clone(), cfg.mode, cfg.eps_box, cfg.pi_floor);
    let total = inits.len() + cfg.restarts;
    let outcomes: Vec<Outcome> = (0..total)
        .into_par_iter()
        .map(|i| {
            let x0 = if i < inits.len() {
                p.from_step(&inits[i])
            } else {
                random_start(&p, cfg.seed.wrapping_add((i - inits.len()) as u64))
            };
            run_restart(&p, cfg, i, x0)
        })
        .collect();

    let evaluated: Vec<(Outcome, Option<Solution>, RestartSummary)> = outcomes
        .into_par_iter()
        .map(|o| {
            let (sol, summary) = assess(&p, cfg, &o);
            (o, sol, summary)
        })
        .collect();

    let mut converged: Vec<Solution> = Vec::new();
    let mut unconverged = Vec::new();
    for (_, sol, summary) in evaluated {
        match sol {
            Some(s) => converged.push(s),
            None => unconverged.push(summary),
        }
    }
    let converged_restarts = converged.len();
    let solutions = cluster(converged, cfg.cluster_tol)?;
    let status = if !solutions.is_empty() {
        SolveStatus::Converged
    } else if unconverged
        .iter()
        .any(|r| r.constraint_residual.is_some_and(|c| c < cfg.constraint_tol)) {
        SolveStatus::NonConvergent
    } else {
        SolveStatus::Infeasible
    };
    Ok(SolveReport {
        status,
        best: if solutions.is_empty() { None } else { Some(0) },
        solutions,
        restarts_run: total,
        converged_restarts,
        unconverged,
        seed: cfg.seed,
        config: cfg.clone(),
        objective: obj.clone(),
        relation_weights: weights,
        constituents_linear: cs.all_linear(),
        warnings,
    })
}

fn random_start(p: &Problem, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..p.a_len).map(|_| rng.gen_range(0.2..=0.8)).collect();
    if p.include_pi() {
        let pi = random_simplex(p.m, &mut rng);
        x.extend_from_slice(&pi[..p.m - 1]);
    }
    p.project(&mut x);
    x
}

/// Handoff tolerances from the first-order loop to the Newton polish.
const HANDOFF_CONSTRAINT_TOL: f64 = 1e-6;
const HANDOFF_GRADIENT_TOL: f64 = 1e-5;

/// Iteration budget of the feasibility phase that precedes the multiplier loop.
const FEASIBILITY_ITERS: usize = 2000;

fn run_restart(p: &Problem, cfg: &SolverConfig, restart: usize, mut x0: Vec<f64>) -> Outcome {
    // starting near the constraint manifold keeps restarts out of the basin of
    // the flattest (constant) step function
    let restored = if p.cs.is_empty() {
        Ok(0.0)
    } else {
        m0::restore_feasibility(p, &mut x0, FEASIBILITY_ITERS, cfg.constraint_tol)
    };
    // first-order multiplier estimate at the starting point
    let beta0 = match p.eval(&x0) {
        Ok(e) => fit_from_parts(&e.grad_f, &e.jac).0,
        Err(_) => vec![0.0; p.cs.len()],
    };
    let mut state = AlState {
        x: x0,
        beta: beta0,
        mu: cfg.mu0,
        outer: 0,
        inner: 0,
    };
    let result = (|| -> Result<()> {
        restored?;
        if state.solve(p, cfg)? {
            return Ok(());
        }
        // a block squeezed to the weight floor is replaced by a half of the
        // heaviest block: same function, but an interior critical point
        if let Some(x) = revive_vanished_blocks(p, &state.x) {
            state.beta = fit_from_parts(&p.eval(&x)?.grad_f, &p.eval(&x)?.jac).0;
            state.x = x;
            state.solve(p, cfg)?;
        }
        Ok(())
    })();
    Outcome {
        restart,
        x: state.x,
        beta: state.beta,
        outer: state.outer,
        inner: state.inner,
        failed: result.is_err(),
    }
}

/// Drop blocks at the weight floor and refill by halving the heaviest blocks.
fn revive_vanished_blocks(p: &Problem, x: &[f64]) -> Option<Vec<f64>> {
    if !p.include_pi() {
        return None;
    }
    let thresh = (10.0 * p.pi_floor).max(1e-9);
    let w = p.to_step(x);
    if w.pi().iter().all(|&q| q > thresh) {
        return None;
    }
    let mut w = w.reduced(0.0, thresh);
    while w.m() < p.m {
        let k = (0..w.m()).max_by(|&i, &j| w.pi()[i].total_cmp(&w.pi()[j]))?;
        w = w.split(0.5, k).ok()?;
    }
    Some(p.from_step(&w))
}

fn accepted(p: &Problem, cfg: &SolverConfig, x: &[f64], beta: &[f64]) -> Result<bool> {
    let e = p.eval(x)?;
    let c = p.residuals(&e.t);
    let kkt = norm(&kkt::stationarity(&e.grad_f, &e.jac, beta));
    Ok(max_abs(&c) < cfg.constraint_tol && kkt < 10.0 * cfg.inner_tol)
}

pub(crate) fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

struct AlState {
    x: Vec<f64>,
    beta: Vec<f64>,
    mu: f64,
    outer: usize,
    inner: usize,
}

impl AlState {
    /// First-order loop to the handoff tolerances and Newton polish, then the
    /// full-tolerance loop and a second polish if still short.
    fn solve(&mut self, p: &Problem, cfg: &SolverConfig) -> Result<bool> {
        if cfg.polish {
            self.run(
                p,
                cfg,
                cfg.constraint_tol.max(HANDOFF_CONSTRAINT_TOL),
                cfg.inner_tol.max(HANDOFF_GRADIENT_TOL),
            )?;
            self.polish(p)?;
            if accepted(p, cfg, &self.x, &self.beta)? {
                return Ok(true);
            }
        }
        self.run(p, cfg, cfg.constraint_tol, cfg.inner_tol)?;
        if cfg.polish {
            self.polish(p)?;
        }
        accepted(p, cfg, &self.x, &self.beta)
    }

    fn polish(&mut self, p: &Problem) -> Result<()> {
        let (x, beta) = newton_polish(p, &self.x, &self.beta)?;
        self.x = x;
        self.beta = beta;
        Ok(())
    }

    /// Augmented-Lagrangian iterations until the constraint violation and
    /// projected gradient fall below the given tolerances.
    fn run(&mut self, p: &Problem, cfg: &SolverConfig, ctol: f64, gtol: f64) -> Result<()> {
        let mut omega = 1e-2_f64.max(gtol);
        let mut prev_c = f64::INFINITY;
        let mut stalls = 0;
        for _ in 0..cfg.max_outer {
            self.outer += 1;
            let (pg, its) = inner_loop(p, &mut self.x, &self.beta, self.mu, omega, cfg.max_inner)?;
            self.inner += its;
            if its >= cfg.max_inner && self.mu >= cfg.mu_max {
                stalls += 1;
                if stalls >= MAX_STALLS {
                    return Ok(());
                }
            } else {
                stalls = 0;
            }
            let c = p.residuals(&p.constraint_values(&self.x)?);
            let cn = max_abs(&c);
            for (b, ci) in self.beta.iter_mut().zip(&c) {
                *b -= self.mu * ci;
            }
            if cn < ctol && pg < gtol {
                return Ok(());
            }
            if cn > ctol && cn > 0.25 * prev_c {
                self.mu = (self.mu * cfg.mu_growth).min(cfg.mu_max);
            }
            prev_c = cn;
            omega = (omega * 0.1).max(gtol);
        }
        Ok(())
    }
}

const ARMIJO_C: f64 = 1e-4;

/// Exhausted inner solves at the penalty cap before a restart is abandoned.
const MAX_STALLS: usize = 3;

/// Projected gradient with Barzilai–Borwein steps and Armijo backtracking on
/// `L = f − β·c + μ/2 |c|²`. Returns the final projected-gradient norm.
fn inner_loop(
    p: &Problem,
    x: &mut Vec<f64>,
    beta: &[f64],
    mu: f64,
    tol: f64,
    max_it: usize,
) -> Result<(f64, usize)> {
    let lag_value = |x: &[f64]| -> Result<f64> {
        let (f, t) = p.values(x)?;
        let c = p.residuals(&t);
        Ok(f + c.iter().zip(beta).map(|(ci, b)| -b * ci + 0.5 * mu * ci * ci).sum::<f64>())
    };
    let lag_grad = |x: &[f64]| -> Result<(f64, Vec<f64>)> {
        let e = p.eval(x)?;
        let c = p.residuals(&e.t);
        let l = e.f + c.iter().zip(beta).map(|(ci, b)| -b * ci + 0.5 * mu * ci * ci).sum::<f64>();
        let eff: Vec<f64> = beta.iter().zip(&c).map(|(b, ci)| b - mu * ci).collect();
        Ok((l, kkt::stationarity(&e.grad_f, &e.jac, &eff)))
    };
    let step_to = |x: &[f64], g: &[f64], a: f64| -> Vec<f64> {
        let mut y: Vec<f64> = x.iter().zip(g).map(|(xi, gi)| xi - a * gi).collect();
        p.project(&mut y);
        y
    };
    let (mut l, mut g) = lag_grad(x)?;
    let mut alpha = 1.0 / norm(&g).max(1.0);
    let mut pg = f64::INFINITY;
    for it in 0..max_it {
        let probe = step_to(x, &g, 1.0);
        pg = norm(&sub(&probe, x));
        if pg < tol {
            return Ok((pg, it));
        }
        let mut a = alpha;
        let (xn, ln) = loop {
            let xn = step_to(x, &g, a);
            let d = sub(&xn, x);
            let ln = lag_value(&xn)?;
            if ln <= l + ARMIJO_C * dot(&g, &d) {
                break (xn, ln);
            }
            a *= 0.5;
            if a < 1e-20 {
                return Ok((pg, it));
            }
        };
        let (_, gn) = lag_grad(&xn)?;
        let s = sub(&xn, x);
        let y = sub(&gn, &g);
        let sy = dot(&s, &y);
        alpha = if sy > 0.0 { (dot(&s, &s) / sy).clamp(1e-12, 1e12) } else { (2.0 * a).min(1e12) };
        let stalled = norm(&s) <= 1e-15 * norm(x).max(1.0);
        *x = xn;
        l = ln;
        g = gn;
        if stalled {
            return Ok((pg, it + 1));
        }
    }
    Ok((pg, max_it))
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn assess(p: &Problem, cfg: &SolverConfig, o: &Outcome) -> (Option<Solution>, RestartSummary) {
    let fail = |c: Option<f64>, k: Option<f64>, f: Option<f64>, step: Option<StepFunction>| RestartSummary {
        restart: o.restart,
        objective: f,
        constraint_residual: c,
        kkt_residual: k,
        step,
    };
    if o.failed {
        return (None, fail(None, None, None, None));
    }
    let built = (|| -> Result<Solution> {
        let e = p.eval(&o.x)?;
        let c = p.residuals(&e.t);
        let kkt_res = norm(&kkt::stationarity(&e.grad_f, &e.jac, &o.beta));
        let (beta_fit, fit_residual) = fit_from_parts(&e.grad_f, &e.jac);
        let raw = p.to_step(&o.x);
        let step = StepFunction::new(raw.signature().clone(), raw.pi().to_vec(), raw.arrays().to_vec(), cfg.mode)?;
        let jac = jacobian(&p.cs.graphs(), &step)?;
        let (lo, hi) = step.value_range();
        Ok(Solution {
            objective: e.f,
            beta: o.beta.clone(),
            beta_fit,
            fit_residual,
            kkt_residual: kkt_res,
            constraint_residual: max_abs(&c),
            densities: e.t,
            jacobian_rank: jac.rank,
            singular_values: jac.singular_values,
            boundary_margin: lo.min(1.0 - hi),
            restart: o.restart,
            multiplicity: 1,
            outer_iterations: o.outer,
            inner_iterations: o.inner,
            step,
        })
    })();
    match built {
        Err(_) => (None, fail(None, None, None, None)),
        Ok(s) => {
            let summary = fail(Some(s.constraint_residual), Some(s.kkt_residual), Some(s.objective), Some(s.step.clone()));
            if s.constraint_residual < cfg.constraint_tol && s.kkt_residual < 10.0 * cfg.inner_tol {
                (Some(s), summary)
            } else {
                (None, summary)
            }
        }
    }
}

/// Reduced form used to compare solutions that differ only by splits.
fn comparison_form(w: &StepFunction) -> StepFunction {
    w.reduced(1e-7, 1e-9).canonical_order()
}

fn canonical_key(w: &StepFunction) -> Vec<f64> {
    let c = comparison_form(w);
    c.pi().iter().chain(c.arrays().iter().flatten()).copied().collect()
}

/// Sort by objective (ties by canonical form) and merge solutions whose
/// reduced forms agree within `tol` in aligned L1.
fn cluster(mut sols: Vec<Solution>, tol: f64) -> Result<Vec<Solution>> {
    let keyed: Vec<Vec<f64>> = sols.iter().map(|s| canonical_key(&s.step)).collect();
    let mut order: Vec<usize> = (0..sols.len()).collect();
    order.sort_by(|&a, &b| {
        sols[a]
            .objective
            .partial_cmp(&sols[b].objective)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| keyed[a].partial_cmp(&keyed[b]).unwrap_or(std::cmp::Ordering::Equal))
            .then(sols[a].restart.cmp(&sols[b].restart))
    });
    let mut slots: Vec<Option<Solution>> = sols.drain(..).map(Some).collect();
    let mut reps: Vec<(Solution, StepFunction)> = Vec::new();
    for i in order {
        let s = slots[i].take().expect("each index visited once");
        let form = comparison_form(&s.step);
        let mut merged = false;
        for (rep, rep_form) in reps.iter_mut() {
            if rep_form.signature().compatible(form.signature()) && aligned_l1(rep_form, &form)? < tol {
                rep.multiplicity += 1;
                merged = true;
                break;
            }
        }
        if !merged {
            reps.push((s, form));
        }
    }
    Ok(reps.into_iter().map(|(s, _)| s).collect())
}

/// True iff every array entry lies in `(delta, 1 − delta)`.
pub fn interior_check(w: &StepFunction, delta: f64) -> bool {
    w.arrays().iter().flatten().all(|&v| v > delta && v < 1.0 - delta)
}
