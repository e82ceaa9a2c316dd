//! Homomorphism densities `t(F, (A,π))`, partial densities of labeled graphs,
//! analytic gradients, and the marginal map with its Jacobian.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::{canonical_indices, flat, weight};
use crate::model::{
    edge_labeled_derivative, index_orbit, vertex_labeled_derivative, LabeledMultiHypergraph,
    MultiHypergraph, QuantumGraph,
};
use crate::stepfn::StepFunction;

/// Exact-summation guard on `m^{free vertices}`.
pub const MAX_TERMS: f64 = 1e9;

/// Sum over maps of the free vertices into blocks, with some vertices pinned.
/// Pinned vertices carry no `π` factor.
fn hom_sum(f: &MultiHypergraph, w: &StepFunction, pinned: &[(usize, usize)]) -> Result<f64> {
    if f.r() != w.signature().r() {
        return Err(Error::SignatureMismatch(
            "graph and step function have different relation counts".into(),
        ));
    }
    let m = w.m();
    let n = f.n_vertices;
    let mut assign = vec![usize::MAX; n];
    for &(v, b) in pinned {
        assign[v] = b;
    }
    let free: Vec<usize> = (0..n).filter(|&v| assign[v] == usize::MAX).collect();
    let terms = (m as f64).powi(free.len() as i32);
    if terms > MAX_TERMS {
        return Err(Error::TooManyTerms(terms));
    }
    // position at which each vertex gets assigned; pinned vertices come first
    let mut step_of = vec![0usize; n];
    for (s, &v) in free.iter().enumerate() {
        step_of[v] = s + 1;
    }
    // edges become evaluable once their last free vertex is assigned
    let mut ready: Vec<Vec<(usize, &[usize])>> = vec![Vec::new(); free.len() + 1];
    for (k, es) in f.edges.iter().enumerate() {
        for e in es {
            let s = e.iter().map(|&v| step_of[v]).max().unwrap_or(0);
            ready[s].push((k, e.as_slice()));
        }
    }
    let mut base = 1.0;
    let mut scratch = Vec::new();
    for &(k, e) in &ready[0] {
        base *= edge_value(w, k, e, &assign, &mut scratch);
    }
    if base == 0.0 || free.is_empty() {
        return Ok(base);
    }
    let mut ctx = Walk {
        w,
        free: &free,
        ready: &ready,
        assign,
        scratch,
    };
    Ok(base * ctx.descend(0))
}

#[inline]
fn edge_value(w: &StepFunction, k: usize, e: &[usize], assign: &[usize], scratch: &mut Vec<usize>) -> f64 {
    scratch.clear();
    scratch.extend(e.iter().map(|&v| assign[v]));
    w.array(k)[flat(w.m(), scratch)]
}

struct Walk<'a> {
    w: &'a StepFunction,
    free: &'a [usize],
    ready: &'a [Vec<(usize, &'a [usize])>],
    assign: Vec<usize>,
    scratch: Vec<usize>,
}

impl Walk<'_> {
    fn descend(&mut self, s: usize) -> f64 {
        let v = self.free[s];
        let pi = self.w.pi();
        let mut total = 0.0;
        for b in 0..self.w.m() {
            if pi[b] == 0.0 {
                continue;
            }
            self.assign[v] = b;
            let mut prod = pi[b];
            for &(k, e) in &self.ready[s + 1] {
                prod *= edge_value(self.w, k, e, &self.assign, &mut self.scratch);
                if prod == 0.0 {
                    break;
                }
            }
            if prod == 0.0 {
                continue;
            }
            if s + 1 < self.free.len() {
                prod *= self.descend(s + 1);
            }
            total += prod;
        }
        self.assign[v] = usize::MAX;
        total
    }
}

/// `t(F, W)`: exact sum over all maps `V(F) → [m]`.
pub fn density(f: &MultiHypergraph, w: &StepFunction) -> Result<f64> {
    hom_sum(f, w, &[])
}

/// `t_{idx}(F^{•a}, W)`: labels pinned to blocks `idx`, no `π` factor on labels.
pub fn partial_density(fl: &LabeledMultiHypergraph, idx: &[usize], w: &StepFunction) -> Result<f64> {
    if idx.len() != fl.labels.len() {
        return Err(Error::IndexArityMismatch {
            expected: fl.labels.len(),
            found: idx.len(),
        });
    }
    if let Some(&b) = idx.iter().find(|&&b| b >= w.m()) {
        return Err(Error::BadBlockIndex { index: b, m: w.m() });
    }
    let pinned: Vec<(usize, usize)> = fl.labels.iter().copied().zip(idx.iter().copied()).collect();
    hom_sum(&fl.base, w, &pinned)
}

/// Linear combination `Σ α_i t(F_i, W)`.
pub fn quantum_density(q: &QuantumGraph, w: &StepFunction) -> Result<f64> {
    q.terms
        .iter()
        .try_fold(0.0, |acc, t| Ok(acc + t.coeff * density(&t.graph, w)?))
}

/// Marginal map `t(𝓕, W)`.
pub fn marginal(fset: &[QuantumGraph], w: &StepFunction) -> Result<Vec<f64>> {
    fset.iter().map(|q| quantum_density(q, w)).collect()
}

/// Gradient in the free coordinates of a step function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientVector {
    /// Per relation, indexed like [`canonical_indices`].
    pub a_part: Vec<Vec<f64>>,
    /// Unreduced `∂/∂π_i`.
    pub pi_part: Vec<f64>,
    /// `∂/∂π_i − ∂/∂π_m` for `i < m`.
    pub pi_reduced: Vec<f64>,
}

impl GradientVector {
    pub fn zeros(w: &StepFunction) -> Self {
        let m = w.m();
        GradientVector {
            a_part: w
                .signature()
                .arities
                .iter()
                .map(|&d| vec![0.0; canonical_indices(m, d).len()])
                .collect(),
            pi_part: vec![0.0; m],
            pi_reduced: vec![0.0; m - 1],
        }
    }

    pub(crate) fn from_parts(a_part: Vec<Vec<f64>>, pi_part: Vec<f64>) -> Self {
        let last = *pi_part.last().expect("at least one block");
        let pi_reduced = pi_part[..pi_part.len() - 1].iter().map(|p| p - last).collect();
        GradientVector {
            a_part,
            pi_part,
            pi_reduced,
        }
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: f64, other: &GradientVector) {
        for (a, b) in self.a_part.iter_mut().zip(&other.a_part) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += c * y;
            }
        }
        for (x, y) in self.pi_part.iter_mut().zip(&other.pi_part) {
            *x += c * y;
        }
        let last = *self.pi_part.last().unwrap();
        for (r, p) in self.pi_reduced.iter_mut().zip(&self.pi_part) {
            *r = p - last;
        }
    }

    /// Canonical A coordinates followed by the reduced π coordinates (if requested).
    pub fn flatten(&self, include_pi: bool) -> Vec<f64> {
        let mut out: Vec<f64> = self.a_part.iter().flatten().copied().collect();
        if include_pi {
            out.extend_from_slice(&self.pi_reduced);
        }
        out
    }
}

/// Analytic gradient of `t(F, (A,π))`: orbit sums of edge-labeled partial
/// densities for `A`, vertex-labeled partial densities for `π`.
pub fn gradient(f: &MultiHypergraph, w: &StepFunction) -> Result<GradientVector> {
    let m = w.m();
    let pi = w.pi();
    let mut a_part = Vec::with_capacity(f.r());
    for (k, &d) in w.signature().arities.iter().enumerate() {
        let deriv = edge_labeled_derivative(f, k)?;
        let idxs = canonical_indices(m, d);
        let mut part = vec![0.0; idxs.len()];
        if !deriv.is_empty() {
            // t_j(∂_k F) for every full multi-index j, computed once
            let mut table = vec![0.0; m.pow(d as u32)];
            let mut filled = vec![false; table.len()];
            for (c, idx) in idxs.iter().enumerate() {
                let mut s = 0.0;
                for o in index_orbit(idx) {
                    let off = flat(m, &o);
                    if !filled[off] {
                        let mut acc = 0.0;
                        for term in &deriv.terms {
                            acc += partial_density(term, &o, w)?;
                        }
                        table[off] = acc;
                        filled[off] = true;
                    }
                    s += table[off];
                }
                part[c] = weight(pi, idx) * s;
            }
        }
        a_part.push(part);
    }
    let vderiv = vertex_labeled_derivative(f);
    let mut pi_part = vec![0.0; m];
    for (i, slot) in pi_part.iter_mut().enumerate() {
        for term in &vderiv.terms {
            *slot += partial_density(term, &[i], w)?;
        }
    }
    Ok(GradientVector::from_parts(a_part, pi_part))
}

/// Gradient of a quantum graph by linearity.
pub fn quantum_gradient(q: &QuantumGraph, w: &StepFunction) -> Result<GradientVector> {
    let mut g = GradientVector::zeros(w);
    for t in &q.terms {
        if t.coeff != 0.0 {
            g.axpy(t.coeff, &gradient(&t.graph, w)?);
        }
    }
    Ok(g)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Jacobian {
    /// `|𝓕|` rows; columns are canonical A coordinates then reduced π.
    pub matrix: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub rank: usize,
}

pub const RANK_RTOL: f64 = 1e-8;

/// Jacobian of the marginal map and its numerical rank.
pub fn jacobian(fset: &[QuantumGraph], w: &StepFunction) -> Result<Jacobian> {
    let rows: Vec<Vec<f64>> = fset
        .iter()
        .map(|q| Ok(quantum_gradient(q, w)?.flatten(true)))
        .collect::<Result<_>>()?;
    let ncols = rows.first().map_or(0, Vec::len);
    let matrix = DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]);
    let (singular_values, rank) = numerical_rank(&matrix);
    Ok(Jacobian {
        matrix,
        singular_values,
        rank,
    })
}

pub(crate) fn numerical_rank(mat: &DMatrix<f64>) -> (Vec<f64>, usize) {
    if mat.nrows() == 0 || mat.ncols() == 0 {
        return (Vec::new(), 0);
    }
    let mut sv: Vec<f64> = mat.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let smax = sv.first().copied().unwrap_or(0.0);
    let rank = if smax == 0.0 {
        0
    } else {
        sv.iter().filter(|&&s| s > RANK_RTOL * smax).count()
    };
    (sv, rank)
}

/// Analytic gradient against central finite differences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientCheck {
    pub coordinates: usize,
    pub max_abs_error: f64,
    /// `|analytic − fd| / max(|fd|, 1e-2)`: relative, with an absolute floor.
    pub max_rel_error: f64,
}

/// Compare [`quantum_gradient`] with central differences of step `h` in every
/// canonical `A` coordinate (moving the whole orbit) and every reduced `π`
/// coordinate (mass moved to or from the last block).
pub fn gradient_check(q: &QuantumGraph, w: &StepFunction, h: f64) -> Result<GradientCheck> {
    let g = quantum_gradient(q, w)?;
    let m = w.m();
    let t = |v: &StepFunction| quantum_density(q, v);
    let mut out = GradientCheck {
        coordinates: 0,
        max_abs_error: 0.0,
        max_rel_error: 0.0,
    };
    let mut record = |analytic: f64, fd: f64| {
        let err = (analytic - fd).abs();
        out.coordinates += 1;
        out.max_abs_error = out.max_abs_error.max(err);
        out.max_rel_error = out.max_rel_error.max(err / fd.abs().max(1e-2));
    };
    for (k, &d) in w.signature().arities.iter().enumerate() {
        for (ci, idx) in canonical_indices(m, d).iter().enumerate() {
            let shifted = |delta: f64| {
                let mut arrays = w.arrays().to_vec();
                for o in index_orbit(idx) {
                    arrays[k][flat(m, &o)] += delta;
                }
                StepFunction::from_parts_unchecked(w.signature().clone(), w.pi().to_vec(), arrays, w.mode())
            };
            let fd = (t(&shifted(h))? - t(&shifted(-h))?) / (2.0 * h);
            record(g.a_part[k][ci], fd);
        }
    }
    for i in 0..m.saturating_sub(1) {
        let shifted = |delta: f64| {
            let mut pi = w.pi().to_vec();
            pi[i] += delta;
            pi[m - 1] -= delta;
            StepFunction::from_parts_unchecked(w.signature().clone(), pi, w.arrays().to_vec(), w.mode())
        };
        let fd = (t(&shifted(h))? - t(&shifted(-h))?) / (2.0 * h);
        record(g.pi_reduced[i], fd);
    }
    Ok(out)
}
