//! A universally quantified language over symmetric relational atoms,
//! compiled to quantum graphs by arithmetization.

mod parser;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::density::quantum_density;
use crate::error::{Error, Result};
use crate::model::{MultiHypergraph, QuantumGraph, Signature};
use crate::stepfn::StepFunction;

pub use parser::parse;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    /// `R_relation(v_args...)`, arguments as indices into the quantified variables.
    Atom { relation: usize, args: Vec<usize> },
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Implies(Box<Expr>, Box<Expr>),
    Iff(Box<Expr>, Box<Expr>),
}

impl Expr {
    /// Classical truth value given the truth of each atom.
    pub fn holds(&self, atom: &dyn Fn(usize, &[usize]) -> bool) -> bool {
        match self {
            Expr::Atom { relation, args } => atom(*relation, args),
            Expr::Not(a) => !a.holds(atom),
            Expr::And(a, b) => a.holds(atom) && b.holds(atom),
            Expr::Or(a, b) => a.holds(atom) || b.holds(atom),
            Expr::Implies(a, b) => !a.holds(atom) || b.holds(atom),
            Expr::Iff(a, b) => a.holds(atom) == b.holds(atom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Formula {
    pub vars: Vec<String>,
    pub matrix: Expr,
}

/// An atom up to symmetry: relation and sorted variable tuple.
pub type AtomKey = (usize, Vec<usize>);

/// Multilinear polynomial in atoms: each key is a set of distinct atoms.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MultilinearPoly {
    pub terms: BTreeMap<Vec<AtomKey>, f64>,
}

impl MultilinearPoly {
    pub fn constant(c: f64) -> Self {
        let mut terms = BTreeMap::new();
        if c != 0.0 {
            terms.insert(Vec::new(), c);
        }
        MultilinearPoly { terms }
    }

    pub fn atom(relation: usize, args: &[usize]) -> Self {
        let mut key = args.to_vec();
        key.sort_unstable();
        let mut terms = BTreeMap::new();
        terms.insert(vec![(relation, key)], 1.0);
        MultilinearPoly { terms }
    }

    fn add_term(&mut self, key: Vec<AtomKey>, c: f64) {
        let entry = self.terms.entry(key).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.terms.retain(|_, v| *v != 0.0);
        }
    }

    pub fn scaled_add(&self, other: &Self, c: f64) -> Self {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(k.clone(), c * v);
        }
        out
    }

    /// Product with `a·a = a` applied to every repeated atom.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = MultilinearPoly::default();
        for (ka, va) in &self.terms {
            for (kb, vb) in &other.terms {
                let mut key: Vec<AtomKey> = ka.iter().chain(kb).cloned().collect();
                key.sort();
                key.dedup();
                out.add_term(key, va * vb);
            }
        }
        out
    }

    /// `1 − p`.
    pub fn complement(&self) -> Self {
        MultilinearPoly::constant(1.0).scaled_add(self, -1.0)
    }
}

/// Arithmetize the matrix: `¬p → 1−p`, `p∧q → pq`, `p∨q → p+q−pq`,
/// `p⇒q → 1−p(1−q)`, `p⇔q → (p⇒q)(q⇒p)`.
pub fn arithmetize(e: &Expr) -> MultilinearPoly {
    match e {
        Expr::Atom { relation, args } => MultilinearPoly::atom(*relation, args),
        Expr::Not(a) => arithmetize(a).complement(),
        Expr::And(a, b) => arithmetize(a).mul(&arithmetize(b)),
        Expr::Or(a, b) => {
            let (p, q) = (arithmetize(a), arithmetize(b));
            p.scaled_add(&q, 1.0).scaled_add(&p.mul(&q), -1.0)
        }
        Expr::Implies(a, b) => implies(&arithmetize(a), &arithmetize(b)),
        Expr::Iff(a, b) => {
            let (p, q) = (arithmetize(a), arithmetize(b));
            implies(&p, &q).mul(&implies(&q, &p))
        }
    }
}

fn implies(p: &MultilinearPoly, q: &MultilinearPoly) -> MultilinearPoly {
    p.mul(&q.complement()).complement()
}

/// Each multilinear term becomes a hypergraph on the quantified variables
/// whose edges are the term's atoms; isomorphic constituents are merged.
pub fn compile(f: &Formula, sig: &Signature) -> Result<QuantumGraph> {
    let poly = arithmetize(&f.matrix);
    let n = f.vars.len();
    let terms: Vec<(f64, MultiHypergraph)> = poly
        .terms
        .iter()
        .map(|(atoms, &c)| {
            let mut edges = vec![Vec::new(); sig.r()];
            for (k, vars) in atoms {
                edges[*k].push(vars.clone());
            }
            Ok((c, MultiHypergraph::new(sig, n, edges)?))
        })
        .collect::<Result<_>>()?;
    let terms = if terms.is_empty() {
        vec![(0.0, MultiHypergraph::edgeless(sig, n))]
    } else {
        terms
    };
    QuantumGraph::new(sig, terms)?.merge_isomorphic(sig)
}

/// Parse and compile in one step.
pub fn compile_str(text: &str, sig: &Signature) -> Result<QuantumGraph> {
    compile(&parse(text, sig)?, sig)
}

/// Mean of the compiled density over a solution set.
pub fn query_probability(f: &Formula, sig: &Signature, solutions: &[StepFunction]) -> Result<f64> {
    if solutions.is_empty() {
        return Err(Error::EmptySolutionSet);
    }
    let q = compile(f, sig)?;
    let mut total = 0.0;
    for w in solutions {
        if !w.signature().compatible(sig) {
            return Err(Error::SignatureMismatch("formula vs solution".into()));
        }
        total += quantum_density(&q, w)?;
    }
    Ok(total / solutions.len() as f64)
}

#[cfg(test)]
mod tests;
