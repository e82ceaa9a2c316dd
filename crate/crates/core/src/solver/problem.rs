//! Flat parameter vector `x = (canonical A entries, reduced π)` and the
//! evaluation of objective and constraint values with their gradients.

use crate::density::{quantum_density, quantum_gradient};
use crate::error::Result;
use crate::index::{canonical_indices, flat};
use crate::model::{index_orbit, Signature};
use crate::objective::{objective_gradient, objective_value, ObjectiveConfig};
use crate::stepfn::{Mode, StepFunction};

use super::ConstraintSet;

pub(crate) struct Problem<'a> {
    pub sig: &'a Signature,
    pub cs: &'a ConstraintSet,
    pub obj: &'a ObjectiveConfig,
    pub m: usize,
    pub fixed_pi: Option<Vec<f64>>,
    pub mode: Mode,
    /// Flat offsets of every orbit copy, per relation and canonical index.
    orbits: Vec<Vec<Vec<usize>>>,
    pub a_len: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub pi_floor: f64,
}

pub(crate) struct Eval {
    pub f: f64,
    pub grad_f: Vec<f64>,
    pub t: Vec<f64>,
    pub jac: Vec<Vec<f64>>,
}

impl<'a> Problem<'a> {
    pub fn new(
        cs: &'a ConstraintSet,
        obj: &'a ObjectiveConfig,
        m: usize,
        fixed_pi: Option<Vec<f64>>,
        mode: Mode,
        eps_box: f64,
        pi_floor: f64,
    ) -> Self {
        let sig = &cs.signature;
        let orbits: Vec<Vec<Vec<usize>>> = sig
            .arities
            .iter()
            .map(|&d| {
                canonical_indices(m, d)
                    .iter()
                    .map(|idx| index_orbit(idx).iter().map(|o| flat(m, o)).collect())
                    .collect()
            })
            .collect();
        let a_len = orbits.iter().map(Vec::len).sum();
        let (lo, hi) = match mode {
            Mode::RealValued => (f64::NEG_INFINITY, f64::INFINITY),
            Mode::GraphonUnit | Mode::GraphonInterior => (eps_box, 1.0 - eps_box),
        };
        let n_pi = if fixed_pi.is_some() { 0 } else { m - 1 };
        let mut lower = vec![lo; a_len];
        let mut upper = vec![hi; a_len];
        lower.extend(std::iter::repeat_n(pi_floor, n_pi));
        upper.extend(std::iter::repeat_n(1.0 - pi_floor, n_pi));
        Problem {
            sig,
            cs,
            obj,
            m,
            fixed_pi,
            mode,
            orbits,
            a_len,
            lower,
            upper,
            pi_floor,
        }
    }

    pub fn n_vars(&self) -> usize {
        self.lower.len()
    }

    pub fn include_pi(&self) -> bool {
        self.fixed_pi.is_none()
    }

    pub fn pi_of(&self, x: &[f64]) -> Vec<f64> {
        match &self.fixed_pi {
            Some(pi) => pi.clone(),
            None => {
                let mut pi = x[self.a_len..].to_vec();
                pi.push(1.0 - pi.iter().sum::<f64>());
                pi
            }
        }
    }

    pub fn to_step(&self, x: &[f64]) -> StepFunction {
        let m = self.m;
        let mut arrays = Vec::with_capacity(self.orbits.len());
        let mut pos = 0;
        for (k, orbs) in self.orbits.iter().enumerate() {
            let d = self.sig.arities[k];
            let mut a = vec![0.0; m.pow(d as u32)];
            for offs in orbs {
                for &o in offs {
                    a[o] = x[pos];
                }
                pos += 1;
            }
            arrays.push(a);
        }
        StepFunction::from_parts_unchecked(self.sig.clone(), self.pi_of(x), arrays, self.mode)
    }

    pub fn from_step(&self, w: &StepFunction) -> Vec<f64> {
        let mut x: Vec<f64> = w.canonical_values().into_iter().flatten().collect();
        if self.include_pi() {
            x.extend_from_slice(&w.pi()[..self.m - 1]);
        }
        self.project(&mut x);
        x
    }

    pub fn objective(&self, w: &StepFunction) -> Result<f64> {
        objective_value(self.obj, w)
    }

    pub fn values(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let w = self.to_step(x);
        let f = self.objective(&w)?;
        let t = self
            .cs
            .constraints
            .iter()
            .map(|c| quantum_density(&c.graph, &w))
            .collect::<Result<_>>()?;
        Ok((f, t))
    }

    pub fn constraint_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        let w = self.to_step(x);
        self.cs
            .constraints
            .iter()
            .map(|c| quantum_density(&c.graph, &w))
            .collect()
    }

    pub fn constraint_jacobian(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let w = self.to_step(x);
        let mut t = Vec::new();
        let mut jac = Vec::new();
        for c in &self.cs.constraints {
            t.push(quantum_density(&c.graph, &w)?);
            jac.push(quantum_gradient(&c.graph, &w)?.flatten(self.include_pi()));
        }
        Ok((t, jac))
    }

    pub fn eval(&self, x: &[f64]) -> Result<Eval> {
        let w = self.to_step(x);
        let f = self.objective(&w)?;
        let grad_f = objective_gradient(self.obj, &w)?.flatten(self.include_pi());
        let (t, jac) = self.constraint_jacobian(x)?;
        Ok(Eval { f, grad_f, t, jac })
    }

    pub fn residuals(&self, t: &[f64]) -> Vec<f64> {
        t.iter()
            .zip(&self.cs.constraints)
            .map(|(v, c)| v - c.target)
            .collect()
    }

    /// Box for A, capped simplex `{p ≥ floor, Σp ≤ 1 − floor}` for reduced π.
    pub fn project(&self, x: &mut [f64]) {
        for i in 0..self.a_len {
            x[i] = x[i].clamp(self.lower[i], self.upper[i]);
        }
        if self.include_pi() {
            project_capped_simplex(&mut x[self.a_len..], self.pi_floor);
        }
    }
}

/// Euclidean projection onto `{q : q_i ≥ floor, Σ q ≤ 1 − floor}`.
pub(crate) fn project_capped_simplex(p: &mut [f64], floor: f64) {
    let cap = 1.0 - floor;
    let clipped_sum: f64 = p.iter().map(|&v| v.max(floor)).sum();
    if clipped_sum <= cap {
        p.iter_mut().for_each(|v| *v = v.max(floor));
        return;
    }
    let total = |tau: f64| p.iter().map(|&v| (v - tau).max(floor)).sum::<f64>();
    let (mut lo, mut hi) = (0.0, p.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - floor);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total(mid) > cap {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
    }
    p.iter_mut().for_each(|v| *v = (*v - hi).max(floor));
}
