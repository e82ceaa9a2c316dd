//! Base size search: the smallest `m` with more array parameters than
//! constraints for which the targets are attained by some `m`-step function.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::ObjectiveConfig;
use crate::stepfn::{random_simplex, Mode, StepFunction};

use super::kkt::{norm, pinv_solve};
use super::problem::Problem;
use super::{dot, max_abs, sub, ConstraintSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct M0Config {
    pub m_max: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Max-abs violation accepted as feasible.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for M0Config {
    fn default() -> Self {
        M0Config {
            m_max: 6,
            restarts: 8,
            seed: 0,
            tol: 1e-8,
            max_iter: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct M0Report {
    pub m0: usize,
    pub residual: f64,
    /// A step function attaining the targets at `m0`.
    pub witness: StepFunction,
    /// Best residual per tried `m` (levels skipped by the parameter count are absent).
    pub tried: Vec<(usize, f64)>,
}

/// `m₀ = min{m : n(m,r,d) > |𝓕| and u ∈ t(𝓕, m-step functions)}`, with
/// feasibility decided by multistart least squares on `Σ(tᵢ − uᵢ)²`.
pub fn find_m0(cs: &ConstraintSet, cfg: &M0Config) -> Result<M0Report> {
    cs.validate()?;
    if cfg.restarts == 0 || !(cfg.tol > 0.0) {
        return Err(Error::InvalidConfig("m0 search needs restarts >= 1 and tol > 0".into()));
    }
    let obj = ObjectiveConfig::entropy();
    let mut tried = Vec::new();
    for m in 1..=cfg.m_max {
        if cs.signature.array_parameter_count(m) <= cs.len() {
            continue;
        }
        let p = Problem::new(cs, &obj, m, None, Mode::GraphonUnit, 0.0, 0.0);
        let runs: Vec<Result<(Vec<f64>, f64)>> = (0..cfg.restarts)
            .into_par_iter()
            .map(|i| feasibility_run(&p, cfg, cfg.seed.wrapping_add(i as u64)))
            .collect();
        let mut best: Option<(Vec<f64>, f64)> = None;
        for run in runs.into_iter().flatten() {
            if best.as_ref().is_none_or(|b| run.1 < b.1) {
                best = Some(run);
            }
        }
        let Some((x, res)) = best else {
            continue;
        };
        tried.push((m, res));
        if res < cfg.tol {
            let raw = p.to_step(&x);
            let witness = StepFunction::new(
                raw.signature().clone(),
                raw.pi().to_vec(),
                raw.arrays().to_vec(),
                Mode::GraphonUnit,
            )?;
            return Ok(M0Report {
                m0: m,
                residual: res,
                witness,
                tried,
            });
        }
    }
    Err(Error::InfeasibleUpToMax(cfg.m_max))
}

fn feasibility_run(p: &Problem, cfg: &M0Config, seed: u64) -> Result<(Vec<f64>, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..p.a_len).map(|_| rng.gen_range(0.0..=1.0)).collect();
    let pi = random_simplex(p.m, &mut rng);
    x.extend_from_slice(&pi[..p.m - 1]);
    p.project(&mut x);
    let res = restore_feasibility(p, &mut x, cfg.max_iter, cfg.tol)?;
    Ok((x, res))
}

/// Drive `x` towards `t(x) = u` inside the feasible box: projected gradient on
/// `½|t − u|²` followed by Gauss–Newton on the free coordinates. Returns the
/// final max-abs violation.
pub(crate) fn restore_feasibility(p: &Problem, x: &mut Vec<f64>, max_iter: usize, tol: f64) -> Result<f64> {
    let phi = |x: &[f64]| -> Result<f64> {
        let c = p.residuals(&p.constraint_values(x)?);
        Ok(0.5 * dot(&c, &c))
    };
    let mut alpha = 1.0;
    for _ in 0..max_iter {
        let (t, jac) = p.constraint_jacobian(x)?;
        let c = p.residuals(&t);
        if max_abs(&c) < 1e-4 * tol.sqrt() {
            break;
        }
        let f = 0.5 * dot(&c, &c);
        let mut g = vec![0.0; x.len()];
        for (row, ci) in jac.iter().zip(&c) {
            for (gi, ri) in g.iter_mut().zip(row) {
                *gi += ci * ri;
            }
        }
        let mut a = alpha;
        let mut moved = false;
        while a > 1e-16 {
            let mut xn: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - a * gi).collect();
            p.project(&mut xn);
            let d = sub(&xn, x);
            if phi(&xn)? <= f + 1e-4 * dot(&g, &d) {
                moved = norm(&d) > 1e-15;
                *x = xn;
                break;
            }
            a *= 0.5;
        }
        alpha = (a * 2.0).min(1e6);
        if !moved {
            break;
        }
    }
    for _ in 0..50 {
        let (t, jac) = p.constraint_jacobian(x)?;
        let c = p.residuals(&t);
        let cn = max_abs(&c);
        if cn < 1e-3 * tol {
            break;
        }
        let free: Vec<usize> = (0..x.len())
            .filter(|&i| x[i] > p.lower[i] + 1e-12 && x[i] < p.upper[i] - 1e-12)
            .collect();
        if free.is_empty() {
            break;
        }
        let jm = DMatrix::from_fn(c.len(), free.len(), |i, j| jac[i][free[j]]);
        let dx = pinv_solve(jm, &DVector::from_iterator(c.len(), c.iter().map(|v| -v)), 1e-12);
        let mut step = 1.0;
        let mut improved = false;
        while step > 1e-8 {
            let mut xn = x.clone();
            for (k, &i) in free.iter().enumerate() {
                xn[i] += step * dx[k];
            }
            p.project(&mut xn);
            let cn2 = max_abs(&p.residuals(&p.constraint_values(&xn)?));
            if cn2 < cn {
                *x = xn;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Ok(max_abs(&p.residuals(&p.constraint_values(x)?)))
}
