//! Cut norm of step functions and the block-permutation cut distance.
//!
//! For a step function the supremum over measurable boxes is attained on
//! unions of cells, so the search runs over cell subsets `S_1 × … × S_d`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::{flat, odometer};
use crate::model::next_permutation;
use crate::stepfn::{common_refinement, StepFunction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutMode {
    /// Enumerate subsets of the first `d-1` axes; last axis chosen greedily.
    Exact { bound: usize },
    /// Alternating coordinate ascent from random starts.
    Heuristic { restarts: usize, seed: u64 },
}

impl Default for CutMode {
    fn default() -> Self {
        CutMode::Exact { bound: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationCut {
    pub value: f64,
    /// Achieving cell subsets, one per axis.
    pub subsets: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutNorm {
    pub per_relation: Vec<RelationCut>,
    pub total: f64,
}

/// `‖W‖_□` per relation.
pub fn cut_norm(w: &StepFunction, mode: CutMode) -> Result<CutNorm> {
    let m = w.m();
    let mut per_relation = Vec::with_capacity(w.signature().r());
    for (k, &d) in w.signature().arities.iter().enumerate() {
        let rc = match mode {
            CutMode::Exact { bound } => {
                if m > bound {
                    return Err(Error::ExactBoundExceeded { m, bound });
                }
                exact_relation(w, k, d)
            }
            CutMode::Heuristic { restarts, seed } => heuristic_relation(w, k, d, restarts, seed),
        };
        per_relation.push(rc);
    }
    let total = per_relation.iter().fold(0.0, |s, r| s + r.value);
    Ok(CutNorm {
        per_relation,
        total,
    })
}

/// Signed mass per cell of the free axis `axis`, given indicator sets on the others.
fn axis_contributions(w: &StepFunction, k: usize, d: usize, sets: &[Vec<bool>], axis: usize) -> Vec<f64> {
    let m = w.m();
    let pi = w.pi();
    let a = w.array(k);
    let mut out = vec![0.0; m];
    let mut idx = vec![0; d];
    loop {
        let inside = (0..d).all(|ax| ax == axis || sets[ax][idx[ax]]);
        if inside {
            let wgt: f64 = idx.iter().map(|&i| pi[i]).product();
            out[idx[axis]] += a[flat(m, &idx)] * wgt;
        }
        if !odometer(&mut idx, m) {
            break;
        }
    }
    out
}

fn best_last_axis(contrib: &[f64]) -> (f64, Vec<bool>) {
    let pos: f64 = contrib.iter().filter(|&&c| c > 0.0).sum();
    let neg: f64 = -contrib.iter().filter(|&&c| c < 0.0).sum::<f64>();
    if pos >= neg {
        (pos, contrib.iter().map(|&c| c > 0.0).collect())
    } else {
        (neg, contrib.iter().map(|&c| c < 0.0).collect())
    }
}

fn to_subsets(sets: &[Vec<bool>]) -> Vec<Vec<usize>> {
    sets.iter()
        .map(|s| (0..s.len()).filter(|&i| s[i]).collect())
        .collect()
}

fn exact_relation(w: &StepFunction, k: usize, d: usize) -> RelationCut {
    let m = w.m();
    let free_axes = d - 1;
    let mut masks = vec![0u64; free_axes];
    let mut sets = vec![vec![true; m]; d];
    let mut best = (f64::NEG_INFINITY, Vec::new());
    loop {
        for (ax, &mask) in masks.iter().enumerate() {
            for (i, slot) in sets[ax].iter_mut().enumerate() {
                *slot = mask >> i & 1 == 1;
            }
        }
        let contrib = axis_contributions(w, k, d, &sets, d - 1);
        let (val, last) = best_last_axis(&contrib);
        if val > best.0 {
            let mut s = sets.clone();
            s[d - 1] = last;
            best = (val, to_subsets(&s));
        }
        // next combination of masks
        let mut ax = 0;
        loop {
            if ax == free_axes {
                return RelationCut {
                    value: best.0,
                    subsets: best.1,
                };
            }
            masks[ax] += 1;
            if masks[ax] < 1u64 << m {
                break;
            }
            masks[ax] = 0;
            ax += 1;
        }
    }
}

fn heuristic_relation(w: &StepFunction, k: usize, d: usize, restarts: usize, seed: u64) -> RelationCut {
    let m = w.m();
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
    let mut best = RelationCut {
        value: f64::NEG_INFINITY,
        subsets: Vec::new(),
    };
    let starts = restarts.max(1) + m;
    for start in 0..starts {
        for sign in [1.0, -1.0] {
            let mut sets: Vec<Vec<bool>> = if start < m {
                // singleton starts on the first axis, everything elsewhere
                (0..d)
                    .map(|ax| (0..m).map(|i| ax != 0 || i == start).collect())
                    .collect()
            } else {
                (0..d).map(|_| (0..m).map(|_| rng.gen_bool(0.5)).collect()).collect()
            };
            let mut value = f64::NEG_INFINITY;
            for _sweep in 0..100 {
                let mut changed = false;
                for axis in 0..d {
                    let contrib = axis_contributions(w, k, d, &sets, axis);
                    let next: Vec<bool> = contrib.iter().map(|&c| sign * c > 0.0).collect();
                    if next != sets[axis] {
                        changed = true;
                        sets[axis] = next;
                    }
                    value = contrib
                        .iter()
                        .zip(&sets[axis])
                        .filter(|(_, &s)| s)
                        .map(|(c, _)| sign * c)
                        .sum();
                }
                if !changed {
                    break;
                }
            }
            if value > best.value {
                best = RelationCut {
                    value,
                    subsets: to_subsets(&sets),
                };
            }
        }
    }
    best.value = if best.value > 0.0 { best.value } else { 0.0 };
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutDistance {
    /// Upper bound on `δ_□`: minimum over block permutations only.
    pub value: f64,
    pub permutation: Vec<usize>,
    pub cut: CutNorm,
}

/// `min_σ ‖W − V^σ‖_□` over block permutations `σ` preserving the shared
/// partition (after common refinement). At most 8 blocks.
pub fn cut_distance_aligned(w: &StepFunction, v: &StepFunction) -> Result<CutDistance> {
    if !w.signature().compatible(v.signature()) {
        return Err(Error::PartitionsNotPermutable(
            "step functions have different signatures".into(),
        ));
    }
    let (a, b) = if sorted(w.pi()) == sorted(v.pi()) && w.m() == v.m() {
        (w.clone(), v.clone())
    } else {
        common_refinement(w, v)?
    };
    let m = a.m();
    if m > 8 {
        return Err(Error::ExactBoundExceeded { m, bound: 8 });
    }
    let mut perm: Vec<usize> = (0..m).collect();
    let mut best: Option<CutDistance> = None;
    loop {
        let admissible = perm
            .iter()
            .enumerate()
            .all(|(i, &j)| (a.pi()[i] - b.pi()[j]).abs() <= 1e-12);
        if admissible {
            let bp = b.permute_blocks(&perm);
            let bp = StepFunction::from_parts_unchecked(
                bp.signature().clone(),
                a.pi().to_vec(),
                bp.arrays().to_vec(),
                bp.mode(),
            );
            let diff = a.difference(&bp)?;
            let cut = cut_norm(&diff, CutMode::Exact { bound: 8 })?;
            if best.as_ref().is_none_or(|bst| cut.total < bst.value) {
                best = Some(CutDistance {
                    value: cut.total,
                    permutation: perm.clone(),
                    cut,
                });
            }
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    best.ok_or_else(|| Error::PartitionsNotPermutable("no weight-preserving permutation".into()))
}

fn sorted(pi: &[f64]) -> Vec<f64> {
    let mut s = pi.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Signature;
    use crate::stepfn::{l1_distance, random_arrays_on, random_step_function, Mode};

    fn g1() -> Signature {
        Signature::new(vec![2]).unwrap()
    }

    /// Independent oracle: enumerate every pair of cell subsets.
    fn brute_force_2d(w: &StepFunction) -> f64 {
        let m = w.m();
        let mut best: f64 = 0.0;
        for s in 0u32..1 << m {
            for t in 0u32..1 << m {
                let mut acc = 0.0;
                for i in 0..m {
                    for j in 0..m {
                        if s >> i & 1 == 1 && t >> j & 1 == 1 {
                            acc += w.entry(0, &[i, j]) * w.pi()[i] * w.pi()[j];
                        }
                    }
                }
                best = best.max(acc.abs());
            }
        }
        best
    }

    #[test]
    fn constant_and_checkerboard() {
        let c = StepFunction::constant(&g1(), 0.4, Mode::GraphonUnit).unwrap();
        assert!((cut_norm(&c, CutMode::default()).unwrap().total - 0.4).abs() < 1e-15);
        let cb = StepFunction::new(g1(), vec![0.5, 0.5], vec![vec![1.0, -1.0, -1.0, 1.0]], Mode::RealValued).unwrap();
        assert!((brute_force_2d(&cb) - 0.25).abs() < 1e-15);
        let n = cut_norm(&cb, CutMode::default()).unwrap();
        assert!((n.total - 0.25).abs() < 1e-15);
    }

    #[test]
    fn exact_matches_brute_force_and_heuristic_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for trial in 0..40 {
            let m = 1 + trial % 6;
            let w = random_step_function(&g1(), m, -1.0, 1.0, Mode::RealValued, &mut rng);
            let exact = cut_norm(&w, CutMode::Exact { bound: 10 }).unwrap().total;
            assert!((exact - brute_force_2d(&w)).abs() < 1e-14);
            let heur = cut_norm(&w, CutMode::Heuristic { restarts: 20, seed: trial as u64 }).unwrap().total;
            assert!(heur <= exact + 1e-14);
        }
    }

    #[test]
    fn bound_enforced() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = random_step_function(&g1(), 11, 0.0, 1.0, Mode::GraphonUnit, &mut rng);
        assert!(matches!(
            cut_norm(&w, CutMode::default()),
            Err(Error::ExactBoundExceeded { m: 11, bound: 10 })
        ));
    }

    #[test]
    fn hypergraph_and_unary_relations() {
        let sig = Signature::new(vec![3, 1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let w = random_step_function(&sig, 3, -1.0, 1.0, Mode::RealValued, &mut rng);
        let n = cut_norm(&w, CutMode::default()).unwrap();
        // unary: best of positive or negative mass
        let pos: f64 = (0..3).map(|i| (w.entry(1, &[i]) * w.pi()[i]).max(0.0)).sum();
        let neg: f64 = (0..3).map(|i| (-w.entry(1, &[i]) * w.pi()[i]).max(0.0)).sum();
        assert!((n.per_relation[1].value - pos.max(neg)).abs() < 1e-15);
        let h = cut_norm(&w, CutMode::Heuristic { restarts: 30, seed: 0 }).unwrap();
        assert!(h.per_relation[0].value <= n.per_relation[0].value + 1e-14);
    }

    #[test]
    fn cut_below_l1() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let w = random_step_function(&g1(), 4, 0.0, 1.0, Mode::GraphonUnit, &mut rng);
            let v = random_arrays_on(&g1(), w.pi().to_vec(), 0.0, 1.0, Mode::GraphonUnit, &mut rng);
            let zero = StepFunction::constant(&g1(), 0.0, Mode::GraphonUnit).unwrap();
            assert!(cut_norm(&w, CutMode::default()).unwrap().total <= l1_distance(&w, &zero).unwrap() + 1e-14);
            assert!(cut_distance_aligned(&w, &v).unwrap().value <= l1_distance(&w, &v).unwrap() + 1e-14);
        }
    }

    #[test]
    fn permuted_copy_has_zero_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let w = random_step_function(&g1(), 4, 0.0, 1.0, Mode::GraphonUnit, &mut rng);
        let v = w.permute_blocks(&[3, 1, 0, 2]);
        assert!(cut_distance_aligned(&w, &v).unwrap().value < 1e-15);
    }

    #[test]
    fn single_entry_perturbation() {
        let eps = 0.01;
        let w = StepFunction::new(g1(), vec![0.5, 0.5], vec![vec![0.3, 0.6, 0.6, 0.2]], Mode::GraphonUnit).unwrap();
        let v = StepFunction::new(g1(), vec![0.5, 0.5], vec![vec![0.3 + eps, 0.6, 0.6, 0.2]], Mode::GraphonUnit).unwrap();
        let d = cut_distance_aligned(&w, &v).unwrap().value;
        assert!(d > 0.0 && d <= eps / 4.0 + 1e-15);
    }
}
