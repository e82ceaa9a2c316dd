use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::index::{canonical_indices, odometer};
use crate::model::graphs;
use crate::stepfn::{random_step_function, Mode};

fn sig() -> Signature {
    Signature::with_names(vec![2, 1], vec!["Friends".into(), "Sm".into()]).unwrap()
}

/// Fraction of π-weighted variable-to-block maps under which the formula
/// holds, reading atoms off a 0/1 step function.
fn truth_fraction(f: &Formula, w: &StepFunction) -> f64 {
    let m = w.m();
    let n = f.vars.len();
    let mut map = vec![0; n];
    let mut total = 0.0;
    loop {
        let weight: f64 = map.iter().map(|&b| w.pi()[b]).product();
        let atom = |k: usize, args: &[usize]| {
            let blocks: Vec<usize> = args.iter().map(|&v| map[v]).collect();
            w.entry(k, &blocks) == 1.0
        };
        if f.matrix.holds(&atom) {
            total += weight;
        }
        if !odometer(&mut map, m) {
            break;
        }
    }
    total
}

/// Every 0/1 step function of signature (2,1) with `m` blocks and the given π.
fn all_worlds(pi: &[f64]) -> Vec<StepFunction> {
    let s = sig();
    let m = pi.len();
    let nf = canonical_indices(m, 2).len();
    let bits = nf + m;
    (0..1u32 << bits)
        .map(|mask| {
            let friends: Vec<f64> = (0..nf).map(|i| f64::from((mask >> i) & 1)).collect();
            let sm: Vec<f64> = (0..m).map(|i| f64::from((mask >> (nf + i)) & 1)).collect();
            StepFunction::from_canonical(&s, pi.to_vec(), &[friends, sm], Mode::GraphonUnit).unwrap()
        })
        .collect()
}

const FIXTURES: &[&str] = &[
    "forall x : Sm(x)",
    "forall x,y : Friends(x,y)",
    "forall x,y,z : Friends(x,y) and Friends(y,z) and Friends(z,x)",
    "forall x,y : Friends(x,y) => (Sm(x) <=> Sm(y))",
    "forall x,y,z : Friends(x,y) and Friends(y,z) and Friends(z,x) => Sm(x) and Sm(y) and Sm(z)",
    "forall x,y : Sm(x) or Sm(y) or not Friends(x,y)",
    "forall x,y,z : (Friends(x,y) <=> Friends(y,z)) <=> Sm(z)",
    "forall x,y,z : not (Sm(x) => Friends(x,z)) or (Friends(y,z) and Friends(x,y))",
    "forall x,y : Friends(x,y) and not Friends(x,y)",
    "forall x : Sm(x) or not Sm(x)",
    "forall x,y,z : Sm(x) => Sm(y) => Sm(z)",
];

#[test]
fn boolean_soundness_exhaustive() {
    let s = sig();
    let formulas: Vec<(Formula, QuantumGraph)> = FIXTURES
        .iter()
        .map(|t| {
            let f = parse(t, &s).unwrap();
            let q = compile(&f, &s).unwrap();
            (f, q)
        })
        .collect();
    for pi in [vec![1.0], vec![0.3, 0.7], vec![0.2, 0.5, 0.3]] {
        for w in all_worlds(&pi) {
            for (f, q) in &formulas {
                let got = quantum_density(q, &w).unwrap();
                let want = truth_fraction(f, &w);
                assert!((got - want).abs() < 1e-12, "{f:?}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn single_atom_compiles_to_unary_edge() {
    let s = sig();
    let q = compile_str("forall x : Sm(x)", &s).unwrap();
    assert_eq!(q.terms.len(), 1);
    assert_eq!(q.terms[0].coeff, 1.0);
    assert_eq!(q.terms[0].graph, MultiHypergraph::new(&s, 1, vec![vec![], vec![vec![0]]]).unwrap());
}

#[test]
fn friends_smokers_axiom() {
    let s = sig();
    let q = compile_str("forall x,y : Friends(x,y) => (Sm(x) <=> Sm(y))", &s).unwrap();
    let empty = MultiHypergraph::edgeless(&s, 2);
    let one_end = MultiHypergraph::new(&s, 2, vec![vec![vec![0, 1]], vec![vec![0]]]).unwrap();
    let both = MultiHypergraph::new(&s, 2, vec![vec![vec![0, 1]], vec![vec![0], vec![1]]]).unwrap();
    let coeff = |g: &MultiHypergraph| {
        q.terms
            .iter()
            .filter(|t| crate::model::isomorphic(&t.graph, g).unwrap())
            .map(|t| t.coeff)
            .sum::<f64>()
    };
    assert_eq!(q.terms.len(), 3);
    assert_eq!(coeff(&empty), 1.0);
    assert_eq!(coeff(&one_end), -2.0);
    assert_eq!(coeff(&both), 2.0);

    // Against the unreduced integrand F(x,y)(1 − (1 − a(1−b))(1 − b(1−a))),
    // which on [0,1]-valued W differs only by the idempotence move.
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..20 {
        let w = random_step_function(&s, 3, 0.0, 1.0, Mode::GraphonUnit, &mut rng);
        let m = w.m();
        let mut reduced = 0.0;
        for i in 0..m {
            for j in 0..m {
                let (f, a, b) = (w.entry(0, &[i, j]), w.entry(1, &[i]), w.entry(1, &[j]));
                reduced += w.pi()[i] * w.pi()[j] * (1.0 - f * (a + b - 2.0 * a * b));
            }
        }
        assert!((quantum_density(&q, &w).unwrap() - reduced).abs() < 1e-12);
    }
}

#[test]
fn contradiction_and_tautology() {
    let s = sig();
    let q = compile_str("forall x,y : Friends(x,y) and not Friends(x,y)", &s).unwrap();
    assert!(q.terms.iter().all(|t| t.coeff == 0.0));
    let taut = parse("forall x : Sm(x) or not Sm(x)", &s).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let ws: Vec<StepFunction> = (0..4)
        .map(|_| random_step_function(&s, 3, 0.0, 1.0, Mode::GraphonUnit, &mut rng))
        .collect();
    assert!((query_probability(&taut, &s, &ws).unwrap() - 1.0).abs() < 1e-15);
    assert_eq!(query_probability(&taut, &s, &[]), Err(Error::EmptySolutionSet));
}

#[test]
fn smoker_query_is_cell_sum() {
    let s = sig();
    let w = StepFunction::from_canonical(
        &s,
        vec![0.4, 0.6],
        &[vec![0.5, 0.2, 0.4], vec![0.6, 0.2]],
        Mode::GraphonUnit,
    )
    .unwrap();
    let f = parse("forall x : Sm(x)", &s).unwrap();
    let p = query_probability(&f, &s, std::slice::from_ref(&w)).unwrap();
    assert!((p - (0.4 * 0.6 + 0.6 * 0.2)).abs() < 1e-15);
}

#[test]
fn triangle_of_smokers_query() {
    let s = sig();
    let text = "forall x,y,z : Friends(x,y) and Friends(y,z) and Friends(z,x) => Sm(x) and Sm(y) and Sm(z)";
    let f = parse(text, &s).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let ws: Vec<StepFunction> = (0..3)
        .map(|_| random_step_function(&s, 3, 0.0, 1.0, Mode::GraphonUnit, &mut rng))
        .collect();
    let mut oracle = 0.0;
    for w in &ws {
        let (m, pi) = (w.m(), w.pi());
        let mut b = [0usize; 3];
        loop {
            let (x, y, z) = (b[0], b[1], b[2]);
            let tri = w.entry(0, &[x, y]) * w.entry(0, &[y, z]) * w.entry(0, &[z, x]);
            let sm = w.entry(1, &[x]) * w.entry(1, &[y]) * w.entry(1, &[z]);
            oracle += pi[x] * pi[y] * pi[z] * (1.0 - tri * (1.0 - sm));
            if !odometer(&mut b, m) {
                break;
            }
        }
    }
    oracle /= ws.len() as f64;
    assert!((query_probability(&f, &s, &ws).unwrap() - oracle).abs() < 1e-12);
}

#[test]
fn compile_is_deterministic() {
    let s = sig();
    for t in FIXTURES {
        assert_eq!(compile_str(t, &s).unwrap(), compile_str(t, &s).unwrap());
    }
}

#[test]
fn triangle_axiom_is_the_triangle() {
    let s = sig();
    let q = compile_str("forall x,y,z : Friends(x,y) and Friends(y,z) and Friends(z,x)", &s).unwrap();
    assert_eq!(q.terms.len(), 1);
    assert!(crate::model::isomorphic(&q.terms[0].graph, &graphs::triangle(&s, 0)).unwrap());
}

fn expr_on(vars: Vec<usize>) -> impl Strategy<Value = Expr> {
    let pairs: Vec<Vec<usize>> = vars
        .iter()
        .flat_map(|&a| vars.iter().filter(move |&&b| b > a).map(move |&b| vec![a, b]))
        .collect();
    let unary = prop::sample::select(vars).prop_map(|v| Expr::Atom { relation: 1, args: vec![v] });
    let leaf = if pairs.is_empty() {
        unary.boxed()
    } else {
        prop_oneof![unary, prop::sample::select(pairs).prop_map(|p| Expr::Atom { relation: 0, args: p })].boxed()
    };
    leaf.prop_recursive(4, 16, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Expr::Not(Box::new(a))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::And(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Or(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Implies(Box::new(a), Box::new(b))),
            (inner.clone(), inner).prop_map(|(a, b)| Expr::Iff(Box::new(a), Box::new(b))),
        ]
    })
}

fn formula(matrix: Expr) -> Formula {
    Formula {
        vars: vec!["x".into(), "y".into(), "z".into()],
        matrix,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn disjoint_conjunction_multiplies(f in expr_on(vec![0, 1]), g in expr_on(vec![2]), seed in 0u64..1000) {
        let s = sig();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = random_step_function(&s, 3, 0.0, 1.0, Mode::GraphonUnit, &mut rng);
        let d = |e: Expr| quantum_density(&compile(&formula(e), &s).unwrap(), &w).unwrap();
        let both = d(Expr::And(Box::new(f.clone()), Box::new(g.clone())));
        prop_assert!((both - d(f) * d(g)).abs() < 1e-12);
    }

    #[test]
    fn negation_complements(f in expr_on(vec![0, 1, 2]), seed in 0u64..1000) {
        let s = sig();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = random_step_function(&s, 3, 0.0, 1.0, Mode::GraphonUnit, &mut rng);
        let d = |e: Expr| quantum_density(&compile(&formula(e), &s).unwrap(), &w).unwrap();
        let neg = d(Expr::Not(Box::new(f.clone())));
        prop_assert!((neg - (1.0 - d(f))).abs() < 1e-12);
    }

    #[test]
    fn random_formulas_sound_on_worlds(f in expr_on(vec![0, 1, 2]), mask in 0u32..512) {
        let s = sig();
        let friends: Vec<f64> = (0..6).map(|i| f64::from((mask >> i) & 1)).collect();
        let sm: Vec<f64> = (0..3).map(|i| f64::from((mask >> (6 + i)) & 1)).collect();
        let w = StepFunction::from_canonical(&s, vec![0.5, 0.3, 0.2], &[friends, sm], Mode::GraphonUnit).unwrap();
        let form = formula(f);
        let q = compile(&form, &s).unwrap();
        prop_assert!((quantum_density(&q, &w).unwrap() - truth_fraction(&form, &w)).abs() < 1e-12);
    }
}
