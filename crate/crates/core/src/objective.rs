//! Density functionals `f_s(A,π) = Σ_k w_k Σ_idx f0(A_k[idx]) ∏π`, including
//! the entropy rate function, with values and gradients.

use serde::{Deserialize, Serialize};

use crate::density::GradientVector;
use crate::error::{Error, Result};
use crate::index::{canonical_indices, odometer, weight};
use crate::model::{factorial, orbit_size, Signature};
use crate::stepfn::StepFunction;

/// Clamp used by diagnostic evaluation of the entropy at `{0, 1}`.
pub const CLAMP_EPS: f64 = 1e-12;

/// The scalar function `f0` applied cell by cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum ScalarDensityFn {
    /// `h_{1/2}(x) = x log(2x) + (1-x) log(2(1-x))` on `(0,1)`.
    Entropy,
    /// `c (x - center)^2` on the real line.
    Quadratic { c: f64, center: f64 },
    /// Natural cubic spline through the knots, defined on `[xs[0], xs[n-1]]`.
    Tabulated { xs: Vec<f64>, ys: Vec<f64> },
}

impl ScalarDensityFn {
    pub fn name(&self) -> &'static str {
        match self {
            ScalarDensityFn::Entropy => "entropy",
            ScalarDensityFn::Quadratic { .. } => "quadratic",
            ScalarDensityFn::Tabulated { .. } => "tabulated",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ScalarDensityFn::Entropy => Ok(()),
            ScalarDensityFn::Quadratic { c, center } => {
                if c.is_finite() && center.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidObjective("non-finite quadratic parameters".into()))
                }
            }
            ScalarDensityFn::Tabulated { xs, ys } => {
                if xs.len() < 2 || xs.len() != ys.len() {
                    return Err(Error::InvalidObjective(
                        "tabulated function needs at least two knots and matching lengths".into(),
                    ));
                }
                if xs.windows(2).any(|p| !(p[1] > p[0])) || ys.iter().any(|y| !y.is_finite()) {
                    return Err(Error::InvalidObjective(
                        "tabulated knots must be strictly increasing with finite values".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    fn in_domain(&self, x: f64) -> bool {
        match self {
            ScalarDensityFn::Entropy => x > 0.0 && x < 1.0,
            ScalarDensityFn::Quadratic { .. } => x.is_finite(),
            ScalarDensityFn::Tabulated { xs, .. } => x >= xs[0] && x <= xs[xs.len() - 1],
        }
    }

    fn check(&self, x: f64) -> Result<()> {
        if self.in_domain(x) {
            Ok(())
        } else {
            Err(Error::DomainViolation {
                name: self.name().into(),
                value: x,
            })
        }
    }

    /// `f0(x)`, erroring outside the domain.
    pub fn value(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(self.eval(x))
    }

    /// `f0'(x)`, erroring outside the domain.
    pub fn derivative(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(self.eval_derivative(x))
    }

    /// `f0` at `x` clamped into the domain (entropy: `[ε, 1-ε]`).
    pub fn value_clamped(&self, x: f64) -> f64 {
        match self {
            ScalarDensityFn::Entropy => self.eval(x.clamp(CLAMP_EPS, 1.0 - CLAMP_EPS)),
            ScalarDensityFn::Tabulated { xs, .. } => self.eval(x.clamp(xs[0], xs[xs.len() - 1])),
            ScalarDensityFn::Quadratic { .. } => self.eval(x),
        }
    }

    fn eval(&self, x: f64) -> f64 {
        match self {
            ScalarDensityFn::Entropy => x * (2.0 * x).ln() + (1.0 - x) * (2.0 * (1.0 - x)).ln(),
            ScalarDensityFn::Quadratic { c, center } => c * (x - center).powi(2),
            ScalarDensityFn::Tabulated { xs, ys } => spline(xs, ys, x).0,
        }
    }

    fn eval_derivative(&self, x: f64) -> f64 {
        match self {
            ScalarDensityFn::Entropy => (x / (1.0 - x)).ln(),
            ScalarDensityFn::Quadratic { c, center } => 2.0 * c * (x - center),
            ScalarDensityFn::Tabulated { xs, ys } => spline(xs, ys, x).1,
        }
    }
}

/// Natural cubic spline value and slope at `x`.
fn spline(xs: &[f64], ys: &[f64], x: f64) -> (f64, f64) {
    let n = xs.len();
    let h: Vec<f64> = xs.windows(2).map(|p| p[1] - p[0]).collect();
    // second derivatives by the tridiagonal (Thomas) solve; natural ends
    let mut m2 = vec![0.0; n];
    if n > 2 {
        let k = n - 2;
        let mut diag = vec![0.0; k];
        let mut rhs = vec![0.0; k];
        for i in 0..k {
            diag[i] = 2.0 * (h[i] + h[i + 1]);
            rhs[i] = 6.0 * ((ys[i + 2] - ys[i + 1]) / h[i + 1] - (ys[i + 1] - ys[i]) / h[i]);
        }
        for i in 1..k {
            let f = h[i] / diag[i - 1];
            diag[i] -= f * h[i];
            rhs[i] -= f * rhs[i - 1];
        }
        for i in (0..k).rev() {
            let upper = if i + 1 < k { h[i + 1] * m2[i + 2] } else { 0.0 };
            m2[i + 1] = (rhs[i] - upper) / diag[i];
        }
    }
    let j = xs[1..n - 1].partition_point(|&k| k < x);
    let (x0, x1, hj) = (xs[j], xs[j + 1], h[j]);
    let (a, b) = ((x1 - x) / hj, (x - x0) / hj);
    let v = a * ys[j]
        + b * ys[j + 1]
        + ((a.powi(3) - a) * m2[j] + (b.powi(3) - b) * m2[j + 1]) * hj * hj / 6.0;
    let s = (ys[j + 1] - ys[j]) / hj
        + ((1.0 - 3.0 * a * a) * m2[j] + (3.0 * b * b - 1.0) * m2[j + 1]) * hj / 6.0;
    (v, s)
}

/// Objective: scalar function plus per-relation weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveConfig {
    pub scalar_fn: ScalarDensityFn,
    /// Per-relation weights; `None` means `1/d_k!`.
    #[serde(default)]
    pub relation_weights: Option<Vec<f64>>,
}

impl Default for ObjectiveConfig {
    fn default() -> Self {
        ObjectiveConfig::entropy()
    }
}

impl ObjectiveConfig {
    /// The rate function `I` with weights `1/d_k!`.
    pub fn entropy() -> Self {
        ObjectiveConfig {
            scalar_fn: ScalarDensityFn::Entropy,
            relation_weights: None,
        }
    }

    pub fn with_scalar(scalar_fn: ScalarDensityFn) -> Self {
        ObjectiveConfig {
            scalar_fn,
            relation_weights: None,
        }
    }

    /// Resolved weights for a signature.
    pub fn weights(&self, sig: &Signature) -> Result<Vec<f64>> {
        self.scalar_fn.validate()?;
        match &self.relation_weights {
            None => Ok(sig.arities.iter().map(|&d| 1.0 / factorial(d) as f64).collect()),
            Some(w) => {
                if w.len() != sig.r() {
                    return Err(Error::InvalidObjective(format!(
                        "expected {} relation weights, got {}",
                        sig.r(),
                        w.len()
                    )));
                }
                if w.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                    return Err(Error::InvalidObjective("relation weights must be positive".into()));
                }
                Ok(w.clone())
            }
        }
    }
}

/// Per-relation sums `Σ_idx g(A_k[idx]) ∏π` over full multi-indices.
fn relation_sums(w: &StepFunction, mut g: impl FnMut(f64) -> Result<f64>) -> Result<Vec<f64>> {
    let m = w.m();
    let pi = w.pi();
    let mut out = Vec::with_capacity(w.signature().r());
    for (k, &d) in w.signature().arities.iter().enumerate() {
        let a = w.array(k);
        let mut idx = vec![0; d];
        let mut s = 0.0;
        let mut off = 0;
        loop {
            s += g(a[off])? * weight(pi, &idx);
            off += 1;
            if !odometer(&mut idx, m) {
                break;
            }
        }
        out.push(s);
    }
    Ok(out)
}

/// Contribution of each relation to `f_s`, weights included.
pub fn objective_terms(cfg: &ObjectiveConfig, w: &StepFunction) -> Result<Vec<f64>> {
    let weights = cfg.weights(w.signature())?;
    let sums = relation_sums(w, |x| cfg.scalar_fn.value(x))?;
    Ok(sums.iter().zip(&weights).map(|(s, wk)| s * wk).collect())
}

/// `f_s(W)`; errors if any entry is outside the domain of `f0`.
pub fn objective_value(cfg: &ObjectiveConfig, w: &StepFunction) -> Result<f64> {
    Ok(objective_terms(cfg, w)?.iter().sum())
}

/// `f_s(W)` with entries clamped into the domain; diagnostics only.
pub fn objective_value_clamped(cfg: &ObjectiveConfig, w: &StepFunction) -> Result<f64> {
    let weights = cfg.weights(w.signature())?;
    let sums = relation_sums(w, |x| Ok(cfg.scalar_fn.value_clamped(x)))?;
    Ok(sums.iter().zip(&weights).map(|(s, wk)| s * wk).sum())
}

/// Gradient of `f_s` in canonical A coordinates and in π.
pub fn objective_gradient(cfg: &ObjectiveConfig, w: &StepFunction) -> Result<GradientVector> {
    let weights = cfg.weights(w.signature())?;
    let f0 = &cfg.scalar_fn;
    let m = w.m();
    let pi = w.pi();
    let mut a_part = Vec::with_capacity(weights.len());
    let mut pi_part = vec![0.0; m];
    for (k, &d) in w.signature().arities.iter().enumerate() {
        let wk = weights[k];
        let mut part = Vec::new();
        for idx in canonical_indices(m, d) {
            let g = f0.derivative(w.entry(k, &idx))?;
            part.push(wk * orbit_size(&idx) as f64 * g * weight(pi, &idx));
        }
        a_part.push(part);
        // first index pinned to i, the remaining d-1 indices weighted by π
        let a = w.array(k);
        let inner = m.pow(d as u32 - 1);
        let mut rest = vec![0; d - 1];
        for (i, slot) in pi_part.iter_mut().enumerate() {
            rest.iter_mut().for_each(|r| *r = 0);
            let mut s = 0.0;
            for off in 0..inner {
                s += f0.value(a[i * inner + off])? * weight(pi, &rest);
                odometer(&mut rest, m);
            }
            *slot += wk * d as f64 * s;
        }
    }
    Ok(GradientVector::from_parts(a_part, pi_part))
}
