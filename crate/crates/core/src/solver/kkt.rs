//! Stationarity residuals, least-squares multipliers and the Newton polish
//! on the KKT system.

use nalgebra::{DMatrix, DVector};

use crate::density::quantum_gradient;
use crate::error::Result;
use crate::objective::{objective_gradient, ObjectiveConfig};
use crate::stepfn::StepFunction;

use super::problem::Problem;
use super::{max_abs, ConstraintSet};

/// Relative singular-value cutoff for the multiplier regression.
pub const FIT_RCOND: f64 = 1e-10;

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `∇f − Σ βᵢ ∇tᵢ`.
pub(crate) fn stationarity(grad_f: &[f64], jac: &[Vec<f64>], beta: &[f64]) -> Vec<f64> {
    let mut r = grad_f.to_vec();
    for (row, b) in jac.iter().zip(beta) {
        for (ri, gi) in r.iter_mut().zip(row) {
            *ri -= b * gi;
        }
    }
    r
}

fn gradients(w: &StepFunction, cs: &ConstraintSet, obj: &ObjectiveConfig, include_pi: bool) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let gf = objective_gradient(obj, w)?.flatten(include_pi);
    let jac = cs
        .constraints
        .iter()
        .map(|c| Ok(quantum_gradient(&c.graph, w)?.flatten(include_pi)))
        .collect::<Result<_>>()?;
    Ok((gf, jac))
}

/// Euclidean norm of `∇f_s − Σ βᵢ ∇t(𝓕ᵢ)` over canonical A coordinates and
/// reduced π coordinates.
pub fn kkt_residual(w: &StepFunction, beta: &[f64], cs: &ConstraintSet, obj: &ObjectiveConfig) -> Result<f64> {
    let (gf, jac) = gradients(w, cs, obj, true)?;
    Ok(norm(&stationarity(&gf, &jac, beta)))
}

/// As [`kkt_residual`] but over the A coordinates only (fixed-π problems).
pub fn kkt_residual_a(w: &StepFunction, beta: &[f64], cs: &ConstraintSet, obj: &ObjectiveConfig) -> Result<f64> {
    let (gf, jac) = gradients(w, cs, obj, false)?;
    Ok(norm(&stationarity(&gf, &jac, beta)))
}

/// `argmin_β ‖∇f_s − Σ βᵢ ∇t(𝓕ᵢ)‖₂` (minimum-norm when rank deficient) and
/// the attained residual.
pub fn fit_multipliers(w: &StepFunction, cs: &ConstraintSet, obj: &ObjectiveConfig) -> Result<(Vec<f64>, f64)> {
    let (gf, jac) = gradients(w, cs, obj, true)?;
    Ok(fit_from_parts(&gf, &jac))
}

pub(crate) fn fit_from_parts(grad_f: &[f64], jac: &[Vec<f64>]) -> (Vec<f64>, f64) {
    let p = jac.len();
    if p == 0 {
        return (Vec::new(), norm(grad_f));
    }
    let n = grad_f.len();
    let design = DMatrix::from_fn(n, p, |i, j| jac[j][i]);
    let beta = pinv_solve(design, &DVector::from_column_slice(grad_f), FIT_RCOND);
    let beta: Vec<f64> = beta.iter().copied().collect();
    let r = norm(&stationarity(grad_f, jac, &beta));
    (beta, r)
}

/// Minimum-norm least-squares solution with a relative singular-value cutoff.
pub(crate) fn pinv_solve(a: DMatrix<f64>, b: &DVector<f64>, rcond: f64) -> DVector<f64> {
    let svd = a.svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let utb = u.transpose() * b;
    let mut y = DVector::zeros(svd.singular_values.len());
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > rcond * smax && s > 0.0 {
            y[i] = utb[i] / s;
        }
    }
    vt.transpose() * y
}

const POLISH_ITERS: usize = 40;
const POLISH_TARGET: f64 = 1e-13;
const POLISH_RCOND: f64 = 1e-12;
const BOUND_GAP: f64 = 1e-10;

/// Newton iterations on `(∇f − Jᵀβ, t − u) = 0` over coordinates away from
/// their bounds. The Hessian of the Lagrangian comes from central differences
/// of its gradient; steps are minimum-norm solves so flat directions (split
/// families) are left alone. Falls back to the input if nothing improves.
pub(crate) fn newton_polish(p: &Problem, x0: &[f64], beta0: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = p.n_vars();
    let nc = beta0.len();
    let in_box = |x: &[f64]| -> bool {
        (0..n).all(|i| x[i] >= p.lower[i] && x[i] <= p.upper[i])
            && (!p.include_pi() || 1.0 - x[p.a_len..].iter().sum::<f64>() >= p.pi_floor)
    };
    let pi_sum_active = p.include_pi() && 1.0 - x0[p.a_len..].iter().sum::<f64>() <= p.pi_floor + BOUND_GAP;
    let free: Vec<usize> = (0..n)
        .filter(|&i| {
            let interior = x0[i] > p.lower[i] + BOUND_GAP && x0[i] < p.upper[i] - BOUND_GAP;
            interior && !(i >= p.a_len && pi_sum_active)
        })
        .collect();
    let nf = free.len();

    let residual = |x: &[f64], beta: &[f64]| -> Result<Vec<f64>> {
        let e = p.eval(x)?;
        let s = stationarity(&e.grad_f, &e.jac, beta);
        let mut r: Vec<f64> = free.iter().map(|&i| s[i]).collect();
        r.extend(p.residuals(&e.t));
        Ok(r)
    };

    let mut x = x0.to_vec();
    let mut beta = beta0.to_vec();
    let mut r = residual(&x, &beta)?;
    let mut rn = norm(&r);
    for _ in 0..POLISH_ITERS {
        if rn < POLISH_TARGET || nf == 0 {
            break;
        }
        let e = p.eval(&x)?;
        let mut k = DMatrix::zeros(nf + nc, nf + nc);
        for (col, &j) in free.iter().enumerate() {
            let h = fd_step(p, &x, j);
            let mut xp = x.clone();
            xp[j] += h;
            let mut xm = x.clone();
            xm[j] -= h;
            let ep = p.eval(&xp)?;
            let em = p.eval(&xm)?;
            let gp = stationarity(&ep.grad_f, &ep.jac, &beta);
            let gm = stationarity(&em.grad_f, &em.jac, &beta);
            for (row, &i) in free.iter().enumerate() {
                k[(row, col)] = (gp[i] - gm[i]) / (2.0 * h);
            }
        }
        for a in 0..nf {
            for b in 0..a {
                let s = 0.5 * (k[(a, b)] + k[(b, a)]);
                k[(a, b)] = s;
                k[(b, a)] = s;
            }
        }
        for (ci, row) in e.jac.iter().enumerate() {
            for (col, &j) in free.iter().enumerate() {
                k[(nf + ci, col)] = row[j];
                k[(col, nf + ci)] = -row[j];
            }
        }
        let rhs = DVector::from_iterator(nf + nc, r.iter().map(|v| -v));
        let dz = pinv_solve(k, &rhs, POLISH_RCOND);
        let mut step = 1.0;
        let mut improved = false;
        while step > 1e-6 {
            let mut xt = x.clone();
            for (col, &j) in free.iter().enumerate() {
                xt[j] += step * dz[col];
            }
            let bt: Vec<f64> = beta.iter().enumerate().map(|(i, b)| b + step * dz[nf + i]).collect();
            if in_box(&xt) {
                if let Ok(rt) = residual(&xt, &bt) {
                    let rtn = norm(&rt);
                    if rtn < rn * (1.0 - 1e-4 * step) {
                        x = xt;
                        beta = bt;
                        r = rt;
                        rn = rtn;
                        improved = true;
                        break;
                    }
                }
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    let before = residual(x0, beta0)?;
    if norm(&before) <= rn || max_abs(&r).is_nan() {
        return Ok((x0.to_vec(), beta0.to_vec()));
    }
    Ok((x, beta))
}

/// Central-difference step that keeps both probes inside the open domain.
fn fd_step(p: &Problem, x: &[f64], j: usize) -> f64 {
    let base = 1e-6;
    if j < p.a_len {
        match p.mode {
            crate::stepfn::Mode::RealValued => base * x[j].abs().max(1.0),
            _ => base.min(0.5 * x[j]).min(0.5 * (1.0 - x[j])),
        }
    } else {
        let last = 1.0 - x[p.a_len..].iter().sum::<f64>();
        base.min(0.5 * x[j]).min(0.5 * last)
    }
}
