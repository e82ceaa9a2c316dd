//! Finitely parameterized hypergraphons `(A, π)`.
//!
//! Each relation `k` carries a dense symmetric array of `m^{d_k}` values,
//! flattened row-major (lexicographic multi-index). Block `i` occupies the
//! right-closed interval `(c_{i-1}, c_i]` of `[0,1]` where `c` are the
//! cumulative sums of `π`; `x = 0` belongs to the first block.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::{canonical_indices, flat, odometer, unflat, weight};
use crate::model::{index_orbit, MultiHypergraph, Signature};

/// Allowed value range of the arrays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    RealValued,
    #[default]
    GraphonUnit,
    GraphonInterior,
}

impl Mode {
    fn admits(self, v: f64) -> bool {
        match self {
            Mode::RealValued => v.is_finite(),
            Mode::GraphonUnit => (0.0..=1.0).contains(&v),
            Mode::GraphonInterior => v > 0.0 && v < 1.0,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Mode::RealValued => "real",
            Mode::GraphonUnit => "[0,1]",
            Mode::GraphonInterior => "(0,1)",
        }
    }
}

pub const SIMPLEX_TOL: f64 = 1e-12;
pub const SYMMETRY_TOL: f64 = 1e-9;

/// An `m`-step function over a signature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StepFunctionJson", into = "StepFunctionJson")]
pub struct StepFunction {
    sig: Signature,
    pi: Vec<f64>,
    arrays: Vec<Vec<f64>>,
    mode: Mode,
}

/// JSON form: `{"arities":[…], "pi":[…], "arrays":[[…row-major…] per relation]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepFunctionJson {
    pub arities: Vec<usize>,
    pub pi: Vec<f64>,
    pub arrays: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
}

impl TryFrom<StepFunctionJson> for StepFunction {
    type Error = Error;

    fn try_from(j: StepFunctionJson) -> Result<Self> {
        StepFunction::from_json(j)
    }
}

impl From<StepFunction> for StepFunctionJson {
    fn from(w: StepFunction) -> Self {
        w.to_json()
    }
}

impl StepFunction {
    /// Validate dimensions, the simplex condition and the mode range; symmetrize
    /// each array by orbit averaging after checking it is already symmetric.
    pub fn new(sig: Signature, pi: Vec<f64>, arrays: Vec<Vec<f64>>, mode: Mode) -> Result<Self> {
        sig.validate()?;
        let m = pi.len();
        if m == 0 {
            return Err(Error::DimensionMismatch("empty partition vector".into()));
        }
        if arrays.len() != sig.r() {
            return Err(Error::DimensionMismatch(format!(
                "{} arrays for {} relations",
                arrays.len(),
                sig.r()
            )));
        }
        for (k, (a, &d)) in arrays.iter().zip(&sig.arities).enumerate() {
            let want = m.pow(d as u32);
            if a.len() != want {
                return Err(Error::DimensionMismatch(format!(
                    "relation {k}: expected {want} entries, got {}",
                    a.len()
                )));
            }
        }
        check_simplex(&pi)?;
        let mut out = Vec::with_capacity(arrays.len());
        for (k, (a, &d)) in arrays.into_iter().zip(&sig.arities).enumerate() {
            let sym = symmetrize(&a, m, d);
            let deviation = a
                .iter()
                .zip(&sym)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            if !(deviation < SYMMETRY_TOL) {
                return Err(Error::SymmetryViolation {
                    relation: k,
                    deviation,
                });
            }
            if let Some(&v) = sym.iter().find(|&&v| !mode.admits(v)) {
                return Err(Error::RangeViolation {
                    relation: k,
                    value: v,
                    mode: mode.name(),
                });
            }
            out.push(sym);
        }
        Ok(StepFunction {
            sig,
            pi,
            arrays: out,
            mode,
        })
    }

    /// Constant value `p` in every relation, one block.
    pub fn constant(sig: &Signature, p: f64, mode: Mode) -> Result<Self> {
        let arrays = sig.arities.iter().map(|_| vec![p]).collect();
        StepFunction::new(sig.clone(), vec![1.0], arrays, mode)
    }

    /// Build from canonical (sorted multi-index) values, relation by relation,
    /// in the order of [`canonical_indices`].
    pub fn from_canonical(
        sig: &Signature,
        pi: Vec<f64>,
        canonical: &[Vec<f64>],
        mode: Mode,
    ) -> Result<Self> {
        let m = pi.len();
        let mut arrays = Vec::with_capacity(sig.r());
        for (k, &d) in sig.arities.iter().enumerate() {
            let idxs = canonical_indices(m, d);
            let vals = canonical.get(k).ok_or_else(|| {
                Error::DimensionMismatch(format!("missing canonical values for relation {k}"))
            })?;
            if vals.len() != idxs.len() {
                return Err(Error::DimensionMismatch(format!(
                    "relation {k}: expected {} canonical values, got {}",
                    idxs.len(),
                    vals.len()
                )));
            }
            let mut a = vec![0.0; m.pow(d as u32)];
            for (idx, &v) in idxs.iter().zip(vals) {
                for o in index_orbit(idx) {
                    a[flat(m, &o)] = v;
                }
            }
            arrays.push(a);
        }
        StepFunction::new(sig.clone(), pi, arrays, mode)
    }

    pub(crate) fn from_parts_unchecked(
        sig: Signature,
        pi: Vec<f64>,
        arrays: Vec<Vec<f64>>,
        mode: Mode,
    ) -> Self {
        StepFunction {
            sig,
            pi,
            arrays,
            mode,
        }
    }

    pub fn from_json(j: StepFunctionJson) -> Result<Self> {
        let sig = Signature::new(j.arities)?;
        StepFunction::new(sig, j.pi, j.arrays, j.mode.unwrap_or(Mode::GraphonUnit))
    }

    pub fn to_json(&self) -> StepFunctionJson {
        StepFunctionJson {
            arities: self.sig.arities.clone(),
            pi: self.pi.clone(),
            arrays: self.arrays.clone(),
            mode: Some(self.mode),
        }
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn m(&self) -> usize {
        self.pi.len()
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn array(&self, k: usize) -> &[f64] {
        &self.arrays[k]
    }

    pub fn arrays(&self) -> &[Vec<f64>] {
        &self.arrays
    }

    pub fn with_mode(&self, mode: Mode) -> Result<Self> {
        StepFunction::new(self.sig.clone(), self.pi.clone(), self.arrays.clone(), mode)
    }

    /// `A_k[idx]` for an arbitrary (not necessarily sorted) multi-index.
    #[inline]
    pub fn entry(&self, k: usize, idx: &[usize]) -> f64 {
        self.arrays[k][flat(self.m(), idx)]
    }

    /// Canonical values per relation, in [`canonical_indices`] order.
    pub fn canonical_values(&self) -> Vec<Vec<f64>> {
        let m = self.m();
        self.sig
            .arities
            .iter()
            .enumerate()
            .map(|(k, &d)| {
                canonical_indices(m, d)
                    .iter()
                    .map(|idx| self.entry(k, idx))
                    .collect()
            })
            .collect()
    }

    /// Free parameters: `n(m,r,d) + m - 1`.
    pub fn free_parameter_count(&self) -> usize {
        self.sig.array_parameter_count(self.m()) + self.m() - 1
    }

    /// Block containing coordinate `x`, using right-closed cells.
    pub fn cell_of(&self, x: f64) -> usize {
        let m = self.m();
        if x <= 0.0 {
            return 0;
        }
        let mut c = 0.0;
        for (i, &p) in self.pi.iter().enumerate() {
            c += p;
            if x <= c {
                return i;
            }
        }
        m - 1
    }

    pub fn value_at(&self, k: usize, x: &[f64]) -> f64 {
        let idx: Vec<usize> = x.iter().map(|&xi| self.cell_of(xi)).collect();
        self.entry(k, &idx)
    }

    /// `θ((A,π), λ, k)`: split block `k` into weights `λπ_k` and `(1-λ)π_k`.
    pub fn split(&self, lambda: f64, k: usize) -> Result<Self> {
        let m = self.m();
        if k >= m {
            return Err(Error::BadBlockIndex { index: k, m });
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::DimensionMismatch(format!(
                "split weight {lambda} outside [0,1]"
            )));
        }
        let map: Vec<usize> = (0..=m).map(|i| if i <= k { i } else { i - 1 }).collect();
        let mut pi = Vec::with_capacity(m + 1);
        pi.extend_from_slice(&self.pi[..k]);
        pi.push(lambda * self.pi[k]);
        pi.push(self.pi[k] - lambda * self.pi[k]);
        pi.extend_from_slice(&self.pi[k + 1..]);
        Ok(self.reindexed(&map, pi))
    }

    /// New step function whose block `i` copies old block `map[i]` with weight `pi[i]`.
    pub(crate) fn reindexed(&self, map: &[usize], pi: Vec<f64>) -> Self {
        let (m_old, m_new) = (self.m(), map.len());
        let arrays = self
            .sig
            .arities
            .iter()
            .enumerate()
            .map(|(k, &d)| {
                let mut a = vec![0.0; m_new.pow(d as u32)];
                let mut idx = vec![0; d];
                let mut old = vec![0; d];
                for slot in a.iter_mut() {
                    for (o, &i) in old.iter_mut().zip(&idx) {
                        *o = map[i];
                    }
                    *slot = self.arrays[k][flat(m_old, &old)];
                    odometer(&mut idx, m_new);
                }
                a
            })
            .collect();
        StepFunction {
            sig: self.sig.clone(),
            pi,
            arrays,
            mode: self.mode,
        }
    }

    /// Reorder blocks: new block `i` is old block `perm[i]`.
    pub fn permute_blocks(&self, perm: &[usize]) -> Self {
        let pi = perm.iter().map(|&i| self.pi[i]).collect();
        self.reindexed(perm, pi)
    }

    /// Drop blocks of zero weight.
    pub fn normalize(&self) -> Self {
        let keep: Vec<usize> = (0..self.m()).filter(|&i| self.pi[i] > 0.0).collect();
        if keep.len() == self.m() {
            return self.clone();
        }
        let pi = keep.iter().map(|&i| self.pi[i]).collect();
        self.reindexed(&keep, pi)
    }

    /// Merge blocks whose weight is below `weight_tol` into nothing and blocks
    /// whose array slices agree within `value_tol` into one block.
    pub fn reduced(&self, value_tol: f64, weight_tol: f64) -> Self {
        let w = self.normalize();
        let keep: Vec<usize> = (0..w.m()).filter(|&i| w.pi[i] > weight_tol).collect();
        let pi_keep: Vec<f64> = keep.iter().map(|&i| w.pi[i]).collect();
        let total: f64 = pi_keep.iter().sum();
        let w = w.reindexed(&keep, pi_keep.iter().map(|p| p / total).collect());
        let m = w.m();
        let mut rep: Vec<usize> = (0..m).collect();
        for i in 0..m {
            for j in 0..i {
                if rep[j] == j && w.blocks_agree(i, j, value_tol) {
                    rep[i] = j;
                    break;
                }
            }
        }
        let reps: Vec<usize> = (0..m).filter(|&i| rep[i] == i).collect();
        let pi: Vec<f64> = reps
            .iter()
            .map(|&j| (0..m).filter(|&i| rep[i] == j).map(|i| w.pi[i]).sum())
            .collect();
        w.reindexed(&reps, pi)
    }

    /// Blocks `i` and `j` are twins when replacing `i` by `j` in any
    /// multi-index leaves the entry unchanged.
    fn blocks_agree(&self, i: usize, j: usize, tol: f64) -> bool {
        let m = self.m();
        self.sig.arities.iter().enumerate().all(|(k, &d)| {
            let mut idx = vec![0; d];
            loop {
                if idx.contains(&i) {
                    let twin: Vec<usize> = idx.iter().map(|&x| if x == i { j } else { x }).collect();
                    if (self.entry(k, &idx) - self.entry(k, &twin)).abs() > tol {
                        return false;
                    }
                }
                if !odometer(&mut idx, m) {
                    return true;
                }
            }
        })
    }

    /// Canonical block order: descending weight, then lexicographic block rows.
    pub fn canonical_order(&self) -> Self {
        let m = self.m();
        let rows: Vec<Vec<f64>> = (0..m).map(|i| self.block_row(i)).collect();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| {
            self.pi[b]
                .partial_cmp(&self.pi[a])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| {
                    rows[a]
                        .partial_cmp(&rows[b])
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
        });
        self.permute_blocks(&order)
    }

    /// Sorted values of every array entry touching block `i`, concatenated per relation.
    fn block_row(&self, i: usize) -> Vec<f64> {
        let m = self.m();
        let mut out = Vec::new();
        for (k, &d) in self.sig.arities.iter().enumerate() {
            let mut vals: Vec<f64> = Vec::new();
            let mut rest = vec![0; d - 1];
            loop {
                let mut idx = vec![i];
                idx.extend_from_slice(&rest);
                vals.push(self.entry(k, &idx));
                if d == 1 || !odometer(&mut rest, m) {
                    break;
                }
            }
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
            out.push(self.entry(k, &vec![i; d]));
            out.extend(vals);
        }
        out
    }

    /// Pointwise difference on the common refinement (real-valued mode).
    pub fn difference(&self, other: &StepFunction) -> Result<StepFunction> {
        let (a, b) = common_refinement(self, other)?;
        let arrays = a
            .arrays
            .iter()
            .zip(&b.arrays)
            .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p - q).collect())
            .collect();
        Ok(StepFunction {
            sig: a.sig.clone(),
            pi: a.pi.clone(),
            arrays,
            mode: Mode::RealValued,
        })
    }

    /// Largest and smallest array entry.
    pub fn value_range(&self) -> (f64, f64) {
        self.arrays
            .iter()
            .flatten()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

fn check_simplex(pi: &[f64]) -> Result<()> {
    if let Some(p) = pi.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(Error::SimplexViolation(format!("entry {p}")));
    }
    let s: f64 = pi.iter().sum();
    if (s - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::SimplexViolation(format!("sum {s}")));
    }
    Ok(())
}

fn symmetrize(a: &[f64], m: usize, d: usize) -> Vec<f64> {
    let mut out = vec![0.0; a.len()];
    for idx in canonical_indices(m, d) {
        let orb = index_orbit(&idx);
        let first = a[flat(m, &orb[0])];
        let mean = if orb.iter().all(|o| a[flat(m, o)] == first) {
            first
        } else {
            orb.iter().map(|o| a[flat(m, o)]).sum::<f64>() / orb.len() as f64
        };
        for o in &orb {
            out[flat(m, o)] = mean;
        }
    }
    out
}

/// Both step functions re-expressed on the overlay of their cumulative
/// boundaries. Values as functions are unchanged.
pub fn common_refinement(w: &StepFunction, v: &StepFunction) -> Result<(StepFunction, StepFunction)> {
    if !w.sig.compatible(&v.sig) {
        return Err(Error::SignatureMismatch(format!(
            "{:?} vs {:?}",
            w.sig.arities, v.sig.arities
        )));
    }
    if w.pi == v.pi {
        return Ok((w.clone(), v.clone()));
    }
    let bounds = |pi: &[f64]| -> Vec<f64> {
        let mut c = 0.0;
        pi.iter()
            .map(|p| {
                c += p;
                c
            })
            .collect()
    };
    let (bw, bv) = (bounds(&w.pi), bounds(&v.pi));
    let mut all: Vec<f64> = bw.iter().chain(&bv).copied().filter(|&c| c < 1.0 - 1e-12).collect();
    all.push(1.0);
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut cuts: Vec<f64> = Vec::new();
    for c in all {
        if c <= 1e-12 {
            continue;
        }
        if cuts.last().is_none_or(|&l| c - l > 1e-12) {
            cuts.push(c);
        }
    }
    let mut pi = Vec::with_capacity(cuts.len());
    let mut map_w = Vec::with_capacity(cuts.len());
    let mut map_v = Vec::with_capacity(cuts.len());
    let mut prev = 0.0;
    for &c in &cuts {
        let mid = 0.5 * (prev + c);
        pi.push(c - prev);
        map_w.push(w.cell_of(mid));
        map_v.push(v.cell_of(mid));
        prev = c;
    }
    Ok((w.reindexed(&map_w, pi.clone()), v.reindexed(&map_v, pi)))
}

/// `Σ_k ∫ |W_k - V_k|`, exact on the common refinement.
pub fn l1_distance(w: &StepFunction, v: &StepFunction) -> Result<f64> {
    let (a, b) = common_refinement(w, v)?;
    let m = a.m();
    let mut total = 0.0;
    for (k, &d) in a.sig.arities.iter().enumerate() {
        for (off, (x, y)) in a.arrays[k].iter().zip(&b.arrays[k]).enumerate() {
            let idx = unflat(m, d, off);
            total += (x - y).abs() * weight(&a.pi, &idx);
        }
    }
    Ok(total)
}

/// Minimum L1 distance over block relabelings. Both sides are relabeled when
/// `m_w! · m_v!` is at most 10^5; otherwise one side at a time (at most 8 blocks).
pub fn aligned_l1(w: &StepFunction, v: &StepFunction) -> Result<f64> {
    let mut best = l1_distance(&w.canonical_order(), &v.canonical_order())?;
    let perms = |m: usize| -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut perm: Vec<usize> = (0..m).collect();
        loop {
            out.push(perm.clone());
            if !crate::model::next_permutation(&mut perm) {
                return out;
            }
        }
    };
    let budget = crate::model::factorial(w.m().min(20)) as f64 * crate::model::factorial(v.m().min(20)) as f64;
    if w.m() <= 8 && v.m() <= 8 && budget <= 1e5 {
        let pv: Vec<StepFunction> = perms(v.m()).iter().map(|p| v.permute_blocks(p)).collect();
        for p in perms(w.m()) {
            let wp = w.permute_blocks(&p);
            for vp in &pv {
                best = best.min(l1_distance(&wp, vp)?);
            }
        }
        return Ok(best);
    }
    for (fixed, moving) in [(w, v), (v, w)] {
        if moving.m() > 8 {
            continue;
        }
        for p in perms(moving.m()) {
            best = best.min(l1_distance(fixed, &moving.permute_blocks(&p))?);
        }
    }
    Ok(best)
}

/// Graphon representation `f^G`: `m = n`, uniform weights, indicator arrays.
pub fn from_finite_graph(sig: &Signature, g: &MultiHypergraph) -> Result<StepFunction> {
    let n = g.n_vertices;
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if g.r() != sig.r() {
        return Err(Error::SignatureMismatch("edge sets vs relations".into()));
    }
    let arrays = sig
        .arities
        .iter()
        .enumerate()
        .map(|(k, &d)| {
            let mut a = vec![0.0; n.pow(d as u32)];
            for e in &g.edges[k] {
                for o in index_orbit(e) {
                    a[flat(n, &o)] = 1.0;
                }
            }
            a
        })
        .collect();
    Ok(StepFunction {
        sig: sig.clone(),
        pi: vec![1.0 / n as f64; n],
        arrays,
        mode: Mode::GraphonUnit,
    })
}

/// Random symmetric step function: canonical entries uniform in `[lo, hi]`,
/// weights from a flat Dirichlet.
pub fn random_step_function<R: Rng + ?Sized>(
    sig: &Signature,
    m: usize,
    lo: f64,
    hi: f64,
    mode: Mode,
    rng: &mut R,
) -> StepFunction {
    let pi = random_simplex(m, rng);
    random_arrays_on(sig, pi, lo, hi, mode, rng)
}

/// Random symmetric arrays on a given partition vector.
pub fn random_arrays_on<R: Rng + ?Sized>(
    sig: &Signature,
    pi: Vec<f64>,
    lo: f64,
    hi: f64,
    mode: Mode,
    rng: &mut R,
) -> StepFunction {
    let m = pi.len();
    let canonical: Vec<Vec<f64>> = sig
        .arities
        .iter()
        .map(|&d| {
            (0..canonical_indices(m, d).len())
                .map(|_| rng.gen_range(lo..=hi))
                .collect()
        })
        .collect();
    StepFunction::from_canonical(sig, pi, &canonical, mode).expect("random step function is valid")
}

/// Flat Dirichlet sample, renormalized so the sum is exactly representable as 1.
pub fn random_simplex<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<f64> {
    let mut e: Vec<f64> = (0..m)
        .map(|_| -(1.0 - rng.gen::<f64>()).ln() + 1e-300)
        .collect();
    let s: f64 = e.iter().sum();
    for x in e.iter_mut() {
        *x /= s;
    }
    fix_simplex_sum(&mut e);
    e
}

/// Push rounding error of the sum into the largest entry.
pub(crate) fn fix_simplex_sum(pi: &mut [f64]) {
    let s: f64 = pi.iter().sum();
    if let Some((imax, _)) = pi
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
    {
        pi[imax] += 1.0 - s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::graphs;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn g1() -> Signature {
        Signature::new(vec![2]).unwrap()
    }

    fn checkerboard(lo: f64, hi: f64) -> StepFunction {
        StepFunction::new(g1(), vec![0.5, 0.5], vec![vec![lo, hi, hi, lo]], Mode::RealValued).unwrap()
    }

    #[test]
    fn construction_and_counts() {
        let w = StepFunction::constant(&g1(), 0.3, Mode::GraphonUnit).unwrap();
        assert_eq!(w.free_parameter_count(), 1);
        let w = checkerboard(0.0, 1.0);
        assert_eq!(w.signature().array_parameter_count(2), 3);
        assert_eq!(w.free_parameter_count(), 4);
        assert!(matches!(
            StepFunction::new(g1(), vec![0.6, 0.6], vec![vec![0.0; 4]], Mode::GraphonUnit),
            Err(Error::SimplexViolation(_))
        ));
        assert!(matches!(
            StepFunction::new(g1(), vec![0.5, 0.5], vec![vec![0.0, 0.1, 0.2, 0.0]], Mode::GraphonUnit),
            Err(Error::SymmetryViolation { .. })
        ));
        assert!(matches!(
            StepFunction::new(g1(), vec![1.0], vec![vec![1.0]], Mode::GraphonInterior),
            Err(Error::RangeViolation { .. })
        ));
        assert!(matches!(
            StepFunction::new(g1(), vec![1.0], vec![vec![1.5]], Mode::GraphonUnit),
            Err(Error::RangeViolation { .. })
        ));
    }

    #[test]
    fn evaluation_and_boundaries() {
        let c = StepFunction::constant(&g1(), 0.7, Mode::GraphonUnit).unwrap();
        assert_eq!(c.value_at(0, &[0.1, 0.9]), 0.7);
        let w = checkerboard(0.0, 1.0);
        assert_eq!(w.value_at(0, &[0.25, 0.75]), 1.0);
        assert_eq!(w.value_at(0, &[0.5, 0.5]), 0.0);
        assert_eq!(w.value_at(0, &[0.0, 1.0]), 1.0);
    }

    #[test]
    fn split_keeps_function() {
        let c = StepFunction::constant(&g1(), 0.3, Mode::GraphonUnit).unwrap();
        let s = c.split(0.4, 0).unwrap();
        assert_eq!(s.m(), 2);
        assert!((s.pi()[0] - 0.4).abs() < 1e-15 && (s.pi()[1] - 0.6).abs() < 1e-15);
        assert!(s.array(0).iter().all(|&v| v == 0.3));
        assert!(matches!(c.split(0.5, 1), Err(Error::BadBlockIndex { .. })));

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sig = Signature::new(vec![2, 3, 1]).unwrap();
        for _ in 0..20 {
            let w = random_step_function(&sig, 3, 0.0, 1.0, Mode::GraphonUnit, &mut rng);
            let lambda: f64 = rng.gen();
            let k = rng.gen_range(0..3);
            let s = w.split(lambda, k).unwrap();
            assert!(l1_distance(&w, &s).unwrap() < 1e-12);
            for _ in 0..10 {
                let x: Vec<f64> = (0..3).map(|_| rng.gen()).collect();
                assert_eq!(w.value_at(1, &x), s.value_at(1, &x));
            }
        }
    }

    #[test]
    fn split_then_merge_recovers() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sig = Signature::new(vec![2, 1]).unwrap();
        let w = random_step_function(&sig, 3, 0.0, 1.0, Mode::GraphonUnit, &mut rng);
        for k in 0..3 {
            for lambda in [0.0, 1.0] {
                let back = w.split(lambda, k).unwrap().normalize();
                assert_eq!(back.m(), 3);
                assert_eq!(back.arrays(), w.arrays());
                assert!(back.pi().iter().zip(w.pi()).all(|(a, b)| (a - b).abs() < 1e-15));
            }
        }
    }

    #[test]
    fn refinement_overlay() {
        let w = StepFunction::new(g1(), vec![0.5, 0.5], vec![vec![0.1, 0.2, 0.2, 0.3]], Mode::GraphonUnit).unwrap();
        let v = StepFunction::new(g1(), vec![0.3, 0.7], vec![vec![0.4, 0.5, 0.5, 0.6]], Mode::GraphonUnit).unwrap();
        let (a, b) = common_refinement(&w, &v).unwrap();
        assert_eq!(a.m(), 3);
        let cum: Vec<f64> = a.pi().iter().scan(0.0, |s, p| { *s += p; Some(*s) }).collect();
        assert!((cum[0] - 0.3).abs() < 1e-15 && (cum[1] - 0.5).abs() < 1e-15 && (cum[2] - 1.0).abs() < 1e-15);
        assert_eq!(a.pi(), b.pi());
        assert!(l1_distance(&w, &a).unwrap() < 1e-15);
        assert!(l1_distance(&v, &b).unwrap() < 1e-15);
        let (a2, b2) = common_refinement(&w, &w).unwrap();
        assert_eq!(a2, w);
        assert_eq!(b2, w);
    }

    #[test]
    fn l1_examples() {
        let p = StepFunction::constant(&g1(), 0.2, Mode::GraphonUnit).unwrap();
        let q = StepFunction::constant(&g1(), 0.7, Mode::GraphonUnit).unwrap();
        assert!((l1_distance(&p, &q).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(l1_distance(&p, &p).unwrap(), 0.0);
        // 4 cells, each |Δ| = 1/2 with weight 1/4
        let half = StepFunction::constant(&g1(), 0.5, Mode::GraphonUnit).unwrap();
        assert!((l1_distance(&checkerboard(0.0, 1.0), &half).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn aligned_l1_ignores_block_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sig = Signature::new(vec![2]).unwrap();
        let w = random_step_function(&sig, 4, 0.0, 1.0, Mode::GraphonUnit, &mut rng);
        let v = w.permute_blocks(&[2, 0, 3, 1]).split(0.3, 1).unwrap();
        assert!(l1_distance(&w, &v).unwrap() > 1e-3);
        assert!(aligned_l1(&w, &v).unwrap() < 1e-14);
    }

    #[test]
    fn reduce_merges_duplicates() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let sig = Signature::new(vec![2, 1]).unwrap();
        let w = random_step_function(&sig, 3, 0.0, 1.0, Mode::GraphonUnit, &mut rng);
        let s = w.split(0.3, 1).unwrap().split(0.5, 3).unwrap();
        let r = s.reduced(1e-12, 0.0);
        assert_eq!(r.m(), 3);
        assert!(l1_distance(&r, &w).unwrap() < 1e-14);
    }

    #[test]
    fn finite_graph_representation() {
        let sig = g1();
        let e = from_finite_graph(&sig, &graphs::edge(&sig, 0)).unwrap();
        assert_eq!(e.pi(), &[0.5, 0.5]);
        assert_eq!(e.array(0), &[0.0, 1.0, 1.0, 0.0]);
        let empty = from_finite_graph(&sig, &MultiHypergraph::edgeless(&sig, 4)).unwrap();
        assert!(empty.array(0).iter().all(|&v| v == 0.0));
        assert_eq!(
            from_finite_graph(&sig, &MultiHypergraph::edgeless(&sig, 0)),
            Err(Error::EmptyGraph)
        );
    }

    #[test]
    fn value_at_matches_cell_lookup() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let sig = Signature::new(vec![2]).unwrap();
        let w = random_step_function(&sig, 5, 0.0, 1.0, Mode::GraphonUnit, &mut rng);
        let cum: Vec<f64> = w.pi().iter().scan(0.0, |s, p| { *s += p; Some(*s) }).collect();
        for _ in 0..200 {
            let x: f64 = rng.gen();
            let y: f64 = rng.gen();
            let cx = cum.iter().position(|&c| x <= c).unwrap();
            let cy = cum.iter().position(|&c| y <= c).unwrap();
            assert_eq!(w.value_at(0, &[x, y]), w.entry(0, &[cx, cy]));
        }
    }

    #[test]
    fn json_roundtrip() {
        let w = checkerboard(0.2, 0.4);
        let text = serde_json::to_string(&w.to_json()).unwrap();
        let back = StepFunction::from_json(serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, w);
    }
}
