//! Finite combinatorial objects: signatures, multi-relational hypergraphs,
//! labeled hypergraphs and quantum graphs.
//!
//! Vertex ids are 0-based. Hyperedges are unordered sets of distinct
//! vertices, stored as ascending tuples; each relation's edge list is kept
//! sorted and deduplicated.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relational schema: one arity per symmetric relation symbol.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub arities: Vec<usize>,
    /// Optional relation names, used by the formula parser.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub names: Option<Vec<String>>,
}

impl Signature {
    pub fn new(arities: Vec<usize>) -> Result<Self> {
        let sig = Signature {
            arities,
            names: None,
        };
        sig.validate()?;
        Ok(sig)
    }

    pub fn with_names(arities: Vec<usize>, names: Vec<String>) -> Result<Self> {
        let sig = Signature {
            arities,
            names: Some(names),
        };
        sig.validate()?;
        Ok(sig)
    }

    pub fn validate(&self) -> Result<()> {
        if self.arities.is_empty() {
            return Err(Error::InvalidSignature("need at least one relation".into()));
        }
        if let Some(k) = self.arities.iter().position(|&d| d == 0) {
            return Err(Error::InvalidSignature(format!("relation {k} has arity 0")));
        }
        if let Some(names) = &self.names {
            if names.len() != self.arities.len() {
                return Err(Error::InvalidSignature(format!(
                    "{} names for {} relations",
                    names.len(),
                    self.arities.len()
                )));
            }
        }
        Ok(())
    }

    /// Number of relations `r`.
    pub fn r(&self) -> usize {
        self.arities.len()
    }

    pub fn max_arity(&self) -> usize {
        self.arities.iter().copied().max().unwrap_or(0)
    }

    /// Equality of the arity vectors, ignoring names.
    pub fn compatible(&self, other: &Signature) -> bool {
        self.arities == other.arities
    }

    /// Index of a relation by name; unnamed signatures answer to `R1, …, Rr`.
    pub fn relation_index(&self, name: &str) -> Option<usize> {
        match &self.names {
            Some(names) => names.iter().position(|n| n == name),
            None => name
                .strip_prefix('R')
                .and_then(|d| d.parse::<usize>().ok())
                .filter(|&k| k >= 1 && k <= self.r())
                .map(|k| k - 1),
        }
    }

    pub fn relation_name(&self, k: usize) -> String {
        match &self.names {
            Some(names) => names[k].clone(),
            None => format!("R{}", k + 1),
        }
    }

    /// `n(m,r,d) = sum_k C(m + d_k - 1, d_k)`: free entries of the symmetric arrays.
    pub fn array_parameter_count(&self, m: usize) -> usize {
        self.arities.iter().map(|&d| binomial(m + d - 1, d)).sum()
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// A finite `(r,d)`-hypergraph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiHypergraph {
    #[serde(rename = "n")]
    pub n_vertices: usize,
    /// Per relation, the list of hyperedges.
    pub edges: Vec<Vec<Vec<usize>>>,
}

impl MultiHypergraph {
    /// Validates and canonicalizes in one step.
    pub fn new(sig: &Signature, n_vertices: usize, edges: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        validate_and_canonicalize(
            sig,
            MultiHypergraph {
                n_vertices,
                edges,
            },
        )
    }

    pub fn edgeless(sig: &Signature, n_vertices: usize) -> Self {
        MultiHypergraph {
            n_vertices,
            edges: vec![Vec::new(); sig.r()],
        }
    }

    pub fn r(&self) -> usize {
        self.edges.len()
    }

    /// `|E(F)|`, summed over relations.
    pub fn edge_count(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    /// A uniform hypergraph is linear when two distinct hyperedges share at
    /// most one vertex. Checked per relation; unary relations are always linear.
    pub fn is_linear(&self) -> bool {
        self.edges.iter().all(|es| {
            es.iter().enumerate().all(|(i, a)| {
                es[i + 1..]
                    .iter()
                    .all(|b| a.iter().filter(|v| b.contains(v)).count() <= 1)
            })
        })
    }

    fn without_edge(&self, relation: usize, edge: &[usize]) -> Self {
        let mut g = self.clone();
        g.edges[relation].retain(|e| e.as_slice() != edge);
        g
    }

    /// Relabel vertices: vertex `v` becomes `perm[v]`; result re-canonicalized.
    pub fn relabeled(&self, perm: &[usize]) -> Self {
        let edges = self
            .edges
            .iter()
            .map(|es| {
                let mut mapped: Vec<Vec<usize>> = es
                    .iter()
                    .map(|e| {
                        let mut t: Vec<usize> = e.iter().map(|&v| perm[v]).collect();
                        t.sort_unstable();
                        t
                    })
                    .collect();
                mapped.sort();
                mapped.dedup();
                mapped
            })
            .collect();
        MultiHypergraph {
            n_vertices: self.n_vertices,
            edges,
        }
    }
}

/// Check tuple arity, vertex range and distinctness; sort and dedupe.
pub fn validate_and_canonicalize(sig: &Signature, raw: MultiHypergraph) -> Result<MultiHypergraph> {
    sig.validate()?;
    if raw.edges.len() != sig.r() {
        return Err(Error::SignatureMismatch(format!(
            "graph has {} edge sets, signature has {} relations",
            raw.edges.len(),
            sig.r()
        )));
    }
    let n = raw.n_vertices;
    let mut edges = Vec::with_capacity(sig.r());
    for (k, (es, &d)) in raw.edges.into_iter().zip(&sig.arities).enumerate() {
        let mut out = Vec::with_capacity(es.len());
        for mut e in es {
            if e.len() != d {
                return Err(Error::ArityMismatch {
                    relation: k,
                    expected: d,
                    found: e.len(),
                });
            }
            if let Some(&v) = e.iter().find(|&&v| v >= n) {
                return Err(Error::VertexOutOfRange { vertex: v, n });
            }
            e.sort_unstable();
            if let Some(w) = e.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::RepeatedVertexInTuple(w[0]));
            }
            out.push(e);
        }
        out.sort();
        out.dedup();
        edges.push(out);
    }
    Ok(MultiHypergraph {
        n_vertices: n,
        edges,
    })
}

/// `F^{•a_1…a_j}`: a hypergraph with an ordered vector of distinct labeled vertices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledMultiHypergraph {
    pub base: MultiHypergraph,
    pub labels: Vec<usize>,
}

impl LabeledMultiHypergraph {
    pub fn new(base: MultiHypergraph, labels: Vec<usize>) -> Result<Self> {
        if labels.len() > base.n_vertices {
            return Err(Error::BadLabels(format!(
                "{} labels on {} vertices",
                labels.len(),
                base.n_vertices
            )));
        }
        for (i, &a) in labels.iter().enumerate() {
            if a >= base.n_vertices {
                return Err(Error::VertexOutOfRange {
                    vertex: a,
                    n: base.n_vertices,
                });
            }
            if labels[..i].contains(&a) {
                return Err(Error::BadLabels(format!("label {a} repeated")));
            }
        }
        Ok(LabeledMultiHypergraph { base, labels })
    }
}

/// A unit-coefficient formal sum of labeled hypergraphs, e.g. `∂_k F` or `∂^• F`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabeledDerivativeSum {
    pub terms: Vec<LabeledMultiHypergraph>,
}

impl LabeledDerivativeSum {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Delete each hyperedge of relation `k` in turn and label its vertices in tuple order.
pub fn edge_labeled_derivative(f: &MultiHypergraph, k: usize) -> Result<LabeledDerivativeSum> {
    if k >= f.r() {
        return Err(Error::BadRelationIndex { index: k, r: f.r() });
    }
    let terms = f.edges[k]
        .iter()
        .map(|e| LabeledMultiHypergraph {
            base: f.without_edge(k, e),
            labels: e.clone(),
        })
        .collect();
    Ok(LabeledDerivativeSum { terms })
}

/// Label each vertex in turn; the graph itself is unchanged.
pub fn vertex_labeled_derivative(f: &MultiHypergraph) -> LabeledDerivativeSum {
    let terms = (0..f.n_vertices)
        .map(|a| LabeledMultiHypergraph {
            base: f.clone(),
            labels: vec![a],
        })
        .collect();
    LabeledDerivativeSum { terms }
}

/// All distinct reorderings of a multi-index, in lexicographic order.
pub fn index_orbit(tuple: &[usize]) -> Vec<Vec<usize>> {
    let mut cur = tuple.to_vec();
    cur.sort_unstable();
    let mut out = vec![cur.clone()];
    while next_permutation(&mut cur) {
        out.push(cur.clone());
    }
    out
}

/// Size of the orbit of a sorted multi-index: `d! / prod(multiplicity!)`.
pub fn orbit_size(sorted: &[usize]) -> usize {
    let mut size = factorial(sorted.len());
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|&&x| x == sorted[i]).count();
        size /= factorial(j);
        i += j;
    }
    size
}

pub fn factorial(n: usize) -> usize {
    (1..=n).product()
}

pub(crate) fn next_permutation<T: Ord>(v: &mut [T]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Exact isomorphism test by backtracking over vertex bijections.
pub fn isomorphic(f: &MultiHypergraph, g: &MultiHypergraph) -> Result<bool> {
    let n = f.n_vertices.max(g.n_vertices);
    if n > 10 {
        return Err(Error::TooLargeForExactIso(n));
    }
    if f.n_vertices != g.n_vertices || f.r() != g.r() {
        return Ok(false);
    }
    if f.edges.iter().zip(&g.edges).any(|(a, b)| a.len() != b.len()) {
        return Ok(false);
    }
    let (df, dg) = (degree_profile(f), degree_profile(g));
    let mut sf = df.clone();
    let mut sg = dg.clone();
    sf.sort();
    sg.sort();
    if sf != sg {
        return Ok(false);
    }
    let mut perm = vec![usize::MAX; n];
    let mut used = vec![false; n];
    Ok(extend_bijection(f, g, &df, &dg, 0, &mut perm, &mut used))
}

fn degree_profile(f: &MultiHypergraph) -> Vec<Vec<usize>> {
    let mut deg = vec![vec![0; f.r()]; f.n_vertices];
    for (k, es) in f.edges.iter().enumerate() {
        for e in es {
            for &v in e {
                deg[v][k] += 1;
            }
        }
    }
    deg
}

fn extend_bijection(
    f: &MultiHypergraph,
    g: &MultiHypergraph,
    df: &[Vec<usize>],
    dg: &[Vec<usize>],
    v: usize,
    perm: &mut [usize],
    used: &mut [bool],
) -> bool {
    let n = f.n_vertices;
    if v == n {
        return f.relabeled(perm) == *g;
    }
    for w in 0..n {
        if used[w] || df[v] != dg[w] {
            continue;
        }
        perm[v] = w;
        used[w] = true;
        // edges of f lying inside the assigned prefix must map onto edges of g
        let consistent = f.edges.iter().zip(&g.edges).all(|(fe, ge)| {
            fe.iter()
                .filter(|e| e.contains(&v) && e.iter().all(|&x| x <= v))
                .all(|e| {
                    let mut t: Vec<usize> = e.iter().map(|&x| perm[x]).collect();
                    t.sort_unstable();
                    ge.binary_search(&t).is_ok()
                })
        });
        if consistent && extend_bijection(f, g, df, dg, v + 1, perm, used) {
            return true;
        }
        used[w] = false;
        perm[v] = usize::MAX;
    }
    false
}

/// `Σ α_i F_i`: a finite real-weighted formal sum of hypergraphs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumGraph {
    pub terms: Vec<QuantumTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumTerm {
    pub coeff: f64,
    pub graph: MultiHypergraph,
}

impl QuantumGraph {
    /// Canonicalizes constituents and merges exact duplicates. Terms whose
    /// coefficients cancel are dropped; if everything cancels the result is a
    /// single zero-coefficient edgeless term.
    pub fn new(sig: &Signature, terms: Vec<(f64, MultiHypergraph)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::EmptyQuantumGraph);
        }
        let mut merged: BTreeMap<MultiHypergraph, f64> = BTreeMap::new();
        let mut first_order: Vec<MultiHypergraph> = Vec::new();
        let mut fallback_n = 0;
        for (c, g) in terms {
            if !c.is_finite() {
                return Err(Error::NonFinite);
            }
            let g = validate_and_canonicalize(sig, g)?;
            fallback_n = fallback_n.max(g.n_vertices);
            match merged.get_mut(&g) {
                Some(acc) => *acc += c,
                None => {
                    first_order.push(g.clone());
                    merged.insert(g, c);
                }
            }
        }
        let mut out: Vec<QuantumTerm> = first_order
            .into_iter()
            .filter_map(|g| {
                let c = merged[&g];
                (c != 0.0).then_some(QuantumTerm { coeff: c, graph: g })
            })
            .collect();
        if out.is_empty() {
            out.push(QuantumTerm {
                coeff: 0.0,
                graph: MultiHypergraph::edgeless(sig, fallback_n),
            });
        }
        Ok(QuantumGraph { terms: out })
    }

    /// A single hypergraph with coefficient one.
    pub fn single(sig: &Signature, g: MultiHypergraph) -> Result<Self> {
        QuantumGraph::new(sig, vec![(1.0, g)])
    }

    /// Re-validate a deserialized quantum graph against a signature.
    pub fn validated(self, sig: &Signature) -> Result<Self> {
        QuantumGraph::new(
            sig,
            self.terms.into_iter().map(|t| (t.coeff, t.graph)).collect(),
        )
    }

    /// Merge isomorphic constituents (summing coefficients). Exponential in
    /// vertex count; constituents above 10 vertices are left untouched.
    pub fn merge_isomorphic(&self, sig: &Signature) -> Result<Self> {
        let mut groups: Vec<(f64, MultiHypergraph)> = Vec::new();
        for t in &self.terms {
            let mut placed = false;
            if t.graph.n_vertices <= 10 {
                for (c, rep) in groups.iter_mut() {
                    if rep.n_vertices <= 10 && isomorphic(rep, &t.graph)? {
                        *c += t.coeff;
                        placed = true;
                        break;
                    }
                }
            }
            if !placed {
                groups.push((t.coeff, t.graph.clone()));
            }
        }
        QuantumGraph::new(sig, groups)
    }

    pub fn all_linear(&self) -> bool {
        self.terms.iter().all(|t| t.graph.is_linear())
    }

    pub fn max_vertices(&self) -> usize {
        self.terms.iter().map(|t| t.graph.n_vertices).max().unwrap_or(0)
    }
}

/// Small named graphs for single-relation signatures.
pub mod graphs {
    use super::*;

    fn on(sig: &Signature, relation: usize, n: usize, es: &[&[usize]]) -> MultiHypergraph {
        let mut edges = vec![Vec::new(); sig.r()];
        edges[relation] = es.iter().map(|e| e.to_vec()).collect();
        MultiHypergraph::new(sig, n, edges).expect("well-formed fixture graph")
    }

    /// A single binary edge in relation `k`.
    pub fn edge(sig: &Signature, k: usize) -> MultiHypergraph {
        on(sig, k, 2, &[&[0, 1]])
    }

    pub fn triangle(sig: &Signature, k: usize) -> MultiHypergraph {
        on(sig, k, 3, &[&[0, 1], &[1, 2], &[0, 2]])
    }

    pub fn path(sig: &Signature, k: usize, n_edges: usize) -> MultiHypergraph {
        let es: Vec<Vec<usize>> = (0..n_edges).map(|i| vec![i, i + 1]).collect();
        let refs: Vec<&[usize]> = es.iter().map(Vec::as_slice).collect();
        on(sig, k, n_edges + 1, &refs)
    }

    pub fn cycle(sig: &Signature, k: usize, n: usize) -> MultiHypergraph {
        let es: Vec<Vec<usize>> = (0..n).map(|i| vec![i, (i + 1) % n]).collect();
        let refs: Vec<&[usize]> = es.iter().map(Vec::as_slice).collect();
        on(sig, k, n, &refs)
    }

    pub fn star(sig: &Signature, k: usize, leaves: usize) -> MultiHypergraph {
        let es: Vec<Vec<usize>> = (1..=leaves).map(|i| vec![0, i]).collect();
        let refs: Vec<&[usize]> = es.iter().map(Vec::as_slice).collect();
        on(sig, k, leaves + 1, &refs)
    }

    /// One hyperedge of relation `k` covering all of its `d_k` vertices.
    pub fn single_edge(sig: &Signature, k: usize) -> MultiHypergraph {
        let d = sig.arities[k];
        let e: Vec<usize> = (0..d).collect();
        on(sig, k, d, &[&e])
    }
}

#[cfg(test)]
mod tests {
    use super::graphs::*;
    use super::*;
    use proptest::prelude::*;

    fn g1() -> Signature {
        Signature::new(vec![2]).unwrap()
    }

    #[test]
    fn canonicalizes_triangle() {
        let sig = g1();
        let raw = MultiHypergraph {
            n_vertices: 3,
            edges: vec![vec![vec![1, 0], vec![0, 2], vec![2, 1]]],
        };
        let c = validate_and_canonicalize(&sig, raw).unwrap();
        assert_eq!(c.edges[0], vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(validate_and_canonicalize(&sig, c.clone()).unwrap(), c);
    }

    #[test]
    fn rejects_bad_tuples() {
        let sig = g1();
        assert_eq!(
            MultiHypergraph::new(&sig, 2, vec![vec![vec![1, 1]]]),
            Err(Error::RepeatedVertexInTuple(1))
        );
        assert!(matches!(
            MultiHypergraph::new(&sig, 2, vec![vec![vec![0, 1, 2]]]),
            Err(Error::ArityMismatch { .. })
        ));
        assert!(matches!(
            MultiHypergraph::new(&sig, 2, vec![vec![vec![0, 5]]]),
            Err(Error::VertexOutOfRange { vertex: 5, n: 2 })
        ));
        let empty = MultiHypergraph::new(&sig, 3, vec![vec![]]).unwrap();
        assert_eq!(empty.edge_count(), 0);
    }

    #[test]
    fn edge_derivative_of_triangle() {
        let sig = g1();
        let d = edge_labeled_derivative(&triangle(&sig, 0), 0).unwrap();
        assert_eq!(d.len(), 3);
        for t in &d.terms {
            assert_eq!(t.base.edge_count(), 2);
            assert_eq!(t.labels.len(), 2);
            assert!(!t.base.edges[0].contains(&t.labels));
        }
        let single = edge_labeled_derivative(&edge(&sig, 0), 0).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(single.terms[0].base.edge_count(), 0);
        assert_eq!(single.terms[0].labels, vec![0, 1]);
        let none = edge_labeled_derivative(&MultiHypergraph::edgeless(&sig, 3), 0).unwrap();
        assert!(none.is_empty());
        assert!(matches!(
            edge_labeled_derivative(&triangle(&sig, 0), 1),
            Err(Error::BadRelationIndex { .. })
        ));
    }

    #[test]
    fn vertex_derivative_counts() {
        let sig = g1();
        assert_eq!(vertex_labeled_derivative(&edge(&sig, 0)).len(), 2);
        assert_eq!(vertex_labeled_derivative(&triangle(&sig, 0)).len(), 3);
        assert_eq!(vertex_labeled_derivative(&MultiHypergraph::edgeless(&sig, 1)).len(), 1);
    }

    #[test]
    fn orbits() {
        assert_eq!(index_orbit(&[1, 1]), vec![vec![1, 1]]);
        assert_eq!(index_orbit(&[1, 2]), vec![vec![1, 2], vec![2, 1]]);
        // brute force: all 3! permutations of (1,2,2), deduplicated
        let src = [1usize, 2, 2];
        let mut all: Vec<Vec<usize>> = Vec::new();
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    if a != b && b != c && a != c {
                        all.push(vec![src[a], src[b], src[c]]);
                    }
                }
            }
        }
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 3);
        assert_eq!(index_orbit(&[1, 2, 2]), all);
        assert_eq!(orbit_size(&[1, 2, 2]), 3);
    }

    #[test]
    fn isomorphism_cases() {
        let sig = g1();
        let t = triangle(&sig, 0);
        let relabeled = t.relabeled(&[2, 0, 1]);
        assert!(isomorphic(&t, &relabeled).unwrap());
        assert!(!isomorphic(&path(&sig, 0, 2), &t).unwrap());
        // C4 vs C4 plus a chord: 4! bijections, none match
        let c4 = cycle(&sig, 0, 4);
        let mut chord = c4.clone();
        chord.edges[0].push(vec![0, 2]);
        let chord = validate_and_canonicalize(&sig, chord).unwrap();
        assert!(!isomorphic(&c4, &chord).unwrap());
        // path on 4 vertices vs star with 3 leaves: same edge count
        assert!(!isomorphic(&path(&sig, 0, 3), &star(&sig, 0, 3)).unwrap());
        let big = MultiHypergraph::edgeless(&sig, 11);
        assert_eq!(isomorphic(&big, &big), Err(Error::TooLargeForExactIso(11)));
    }

    #[test]
    fn quantum_graph_merging() {
        let sig = g1();
        let e = edge(&sig, 0);
        let q = QuantumGraph::new(&sig, vec![(1.0, e.clone()), (-1.0, e.clone())]).unwrap();
        assert_eq!(q.terms.len(), 1);
        assert_eq!(q.terms[0].coeff, 0.0);
        let q = QuantumGraph::new(&sig, vec![(1.0, e.clone()), (2.0, e.relabeled(&[1, 0]))]).unwrap();
        assert_eq!(q.terms.len(), 1);
        assert_eq!(q.terms[0].coeff, 3.0);
        assert_eq!(QuantumGraph::new(&sig, vec![]), Err(Error::EmptyQuantumGraph));
        assert_eq!(
            QuantumGraph::new(&sig, vec![(f64::NAN, e)]),
            Err(Error::NonFinite)
        );
    }

    #[test]
    fn merge_isomorphic_constituents() {
        let sig = Signature::new(vec![2, 1]).unwrap();
        let fx = MultiHypergraph::new(&sig, 2, vec![vec![vec![0, 1]], vec![vec![0]]]).unwrap();
        let fy = MultiHypergraph::new(&sig, 2, vec![vec![vec![0, 1]], vec![vec![1]]]).unwrap();
        let q = QuantumGraph::new(&sig, vec![(-1.0, fx), (-1.0, fy)]).unwrap();
        assert_eq!(q.terms.len(), 2);
        let merged = q.merge_isomorphic(&sig).unwrap();
        assert_eq!(merged.terms.len(), 1);
        assert_eq!(merged.terms[0].coeff, -2.0);
    }

    #[test]
    fn linearity() {
        let sig = Signature::new(vec![3]).unwrap();
        let lin = MultiHypergraph::new(&sig, 5, vec![vec![vec![0, 1, 2], vec![2, 3, 4]]]).unwrap();
        let non = MultiHypergraph::new(&sig, 4, vec![vec![vec![0, 1, 2], vec![1, 2, 3]]]).unwrap();
        assert!(lin.is_linear());
        assert!(!non.is_linear());
        assert!(triangle(&g1(), 0).is_linear());
    }

    #[test]
    fn parameter_count() {
        let sig = g1();
        assert_eq!(sig.array_parameter_count(1), 1);
        assert_eq!(sig.array_parameter_count(2), 3);
        let s21 = Signature::new(vec![2, 1]).unwrap();
        assert_eq!(s21.array_parameter_count(2), 5);
        assert_eq!(Signature::new(vec![3]).unwrap().array_parameter_count(3), 10);
    }

    fn arb_graph(n: usize) -> impl Strategy<Value = MultiHypergraph> {
        let pairs: Vec<Vec<usize>> = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| vec![i, j]))
            .collect();
        proptest::sample::subsequence(pairs.clone(), 0..=pairs.len()).prop_map(move |es| {
            MultiHypergraph::new(&Signature::new(vec![2]).unwrap(), n, vec![es]).unwrap()
        })
    }

    proptest! {
        #[test]
        fn canonicalization_idempotent(g in arb_graph(5), perm in Just((0..5).collect::<Vec<usize>>()).prop_shuffle()) {
            let sig = g1();
            let shuffled = g.relabeled(&perm);
            let mut reversed = shuffled.clone();
            for es in reversed.edges.iter_mut() {
                es.reverse();
                for e in es.iter_mut() { e.reverse(); }
            }
            let c = validate_and_canonicalize(&sig, reversed).unwrap();
            prop_assert_eq!(&c, &shuffled);
            prop_assert_eq!(validate_and_canonicalize(&sig, c.clone()).unwrap(), c);
        }

        #[test]
        fn isomorphism_is_an_equivalence(a in arb_graph(5), b in arb_graph(5), c in arb_graph(5),
                                         perm in Just((0..5).collect::<Vec<usize>>()).prop_shuffle()) {
            prop_assert!(isomorphic(&a, &a).unwrap());
            prop_assert!(isomorphic(&a, &a.relabeled(&perm)).unwrap());
            prop_assert_eq!(isomorphic(&a, &b).unwrap(), isomorphic(&b, &a).unwrap());
            if isomorphic(&a, &b).unwrap() && isomorphic(&b, &c).unwrap() {
                prop_assert!(isomorphic(&a, &c).unwrap());
            }
        }

        #[test]
        fn orbit_size_divides_factorial(t in proptest::collection::vec(0usize..3, 1..5)) {
            let orb = index_orbit(&t);
            prop_assert_eq!(factorial(t.len()) % orb.len(), 0);
            let mut s = t.clone();
            s.sort();
            prop_assert_eq!(orb.len(), orbit_size(&s));
        }

        #[test]
        fn derivative_term_counts(g in arb_graph(5)) {
            prop_assert_eq!(edge_labeled_derivative(&g, 0).unwrap().len(), g.edges[0].len());
            prop_assert_eq!(vertex_labeled_derivative(&g).len(), g.n_vertices);
        }
    }
}
