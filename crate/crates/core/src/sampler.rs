//! W-random hypergraphs, empirical densities, and convergence tables.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{quantum_density, MAX_TERMS};
use crate::error::{Error, Result};
use crate::index::flat;
use crate::model::{MultiHypergraph, QuantumGraph, Signature};
use crate::stepfn::{from_finite_graph, Mode, StepFunction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SampleConfig {
    pub n: usize,
    pub seed: u64,
    pub trials: usize,
    /// Vertex maps drawn by the Monte Carlo density estimator.
    pub mc_samples: usize,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            n: 100,
            seed: 0,
            trials: 1,
            mc_samples: 100_000,
        }
    }
}

impl SampleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.trials == 0 {
            return Err(Error::InvalidConfig("n and trials must be at least 1".into()));
        }
        Ok(())
    }
}

/// Draw a W-random hypergraph on `n` vertices: block labels from `π`, then
/// every `d_k`-subset independently with probability `A_k[labels]`.
pub fn sample_w_random(w: &StepFunction, n: usize, seed: u64) -> Result<MultiHypergraph> {
    if w.mode() == Mode::RealValued {
        let (lo, hi) = w.value_range();
        if lo < 0.0 || hi > 1.0 {
            return Err(Error::RangeViolation {
                relation: 0,
                value: if lo < 0.0 { lo } else { hi },
                mode: "[0,1]",
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cum: Vec<f64> = w
        .pi()
        .iter()
        .scan(0.0, |c, p| {
            *c += p;
            Some(*c)
        })
        .collect();
    let labels: Vec<usize> = (0..n)
        .map(|_| {
            let u: f64 = rng.gen();
            cum.partition_point(|&c| c <= u).min(w.m() - 1)
        })
        .collect();
    let m = w.m();
    let mut edges = Vec::with_capacity(w.signature().r());
    for (k, &d) in w.signature().arities.iter().enumerate() {
        let a = w.array(k);
        let mut es = Vec::new();
        let mut tuple: Vec<usize> = (0..d).collect();
        let mut blocks = vec![0; d];
        if d <= n {
            loop {
                for (b, &v) in blocks.iter_mut().zip(&tuple) {
                    *b = labels[v];
                }
                let p = a[flat(m, &blocks)];
                if rng.gen::<f64>() < p {
                    es.push(tuple.clone());
                }
                if !next_combination(&mut tuple, n) {
                    break;
                }
            }
        }
        edges.push(es);
    }
    Ok(MultiHypergraph { n_vertices: n, edges })
}

/// Next `d`-subset of `[n]` in lexicographic order.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let d = c.len();
    for i in (0..d).rev() {
        if c[i] < n - d + i {
            c[i] += 1;
            for j in i + 1..d {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum DensityMethod {
    Exact,
    MonteCarlo { samples: usize, seed: u64 },
    /// Exact when within the term guard, Monte Carlo otherwise.
    Auto { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub value: f64,
    /// Standard error for Monte Carlo estimates.
    pub stderr: Option<f64>,
    pub exact: bool,
}

/// `t(F, f^G)`, exactly or by averaging edge indicators over random vertex
/// maps (with repetition).
pub fn empirical_density(
    sig: &Signature,
    q: &QuantumGraph,
    g: &MultiHypergraph,
    method: DensityMethod,
) -> Result<DensityEstimate> {
    if g.n_vertices == 0 {
        return Err(Error::EmptyGraph);
    }
    if g.r() != sig.r() {
        return Err(Error::SignatureMismatch("sample vs signature".into()));
    }
    let exact_ok = (g.n_vertices as f64).powi(q.max_vertices() as i32) <= MAX_TERMS;
    match method {
        DensityMethod::Exact => exact_density(sig, q, g),
        DensityMethod::Auto { .. } if exact_ok => exact_density(sig, q, g),
        DensityMethod::Auto { samples, seed } | DensityMethod::MonteCarlo { samples, seed } => {
            monte_carlo(q, g, samples, seed)
        }
    }
}

fn exact_density(sig: &Signature, q: &QuantumGraph, g: &MultiHypergraph) -> Result<DensityEstimate> {
    let w = from_finite_graph(sig, g)?;
    Ok(DensityEstimate {
        value: quantum_density(q, &w)?,
        stderr: None,
        exact: true,
    })
}

fn monte_carlo(q: &QuantumGraph, g: &MultiHypergraph, samples: usize, seed: u64) -> Result<DensityEstimate> {
    if samples < 2 {
        return Err(Error::InvalidConfig("Monte Carlo needs at least 2 samples".into()));
    }
    let sets: Vec<std::collections::HashSet<&[usize]>> =
        g.edges.iter().map(|es| es.iter().map(Vec::as_slice).collect()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nv = q.max_vertices();
    let (mut sum, mut sumsq) = (0.0, 0.0);
    let mut map = vec![0usize; nv];
    let mut img = Vec::new();
    for _ in 0..samples {
        for v in map.iter_mut() {
            *v = rng.gen_range(0..g.n_vertices);
        }
        let mut x = 0.0;
        for t in &q.terms {
            let hit = t.graph.edges.iter().enumerate().all(|(k, es)| {
                es.iter().all(|e| {
                    img.clear();
                    img.extend(e.iter().map(|&v| map[v]));
                    img.sort_unstable();
                    img.windows(2).all(|p| p[0] != p[1]) && sets[k].contains(img.as_slice())
                })
            });
            if hit {
                x += t.coeff;
            }
        }
        sum += x;
        sumsq += x * x;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = ((sumsq - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(DensityEstimate {
        value: mean,
        stderr: Some((var / n).sqrt()),
        exact: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub graph: usize,
    pub trials: usize,
    pub mean: f64,
    pub std: f64,
    pub stderr: f64,
    pub target: f64,
    /// `(mean − target) / stderr`; absent when the standard error is zero.
    pub z_gap: Option<f64>,
}

/// For each `n` and graph: mean and spread of `t(F, f^G)` over W-random
/// samples against `t(F, W)`.
pub fn convergence_report(
    w: &StepFunction,
    fset: &[QuantumGraph],
    n_list: &[usize],
    cfg: &SampleConfig,
) -> Result<Vec<ConvergenceRow>> {
    cfg.validate()?;
    let targets: Vec<f64> = fset.iter().map(|q| quantum_density(q, w)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for &n in n_list {
        if n == 0 {
            return Err(Error::InvalidConfig("sample sizes must be positive".into()));
        }
        let per_trial: Vec<Vec<f64>> = (0..cfg.trials)
            .into_par_iter()
            .map(|trial| {
                let g = sample_w_random(w, n, trial_seed(cfg.seed, n, trial))?;
                fset.iter()
                    .map(|q| {
                        let method = DensityMethod::Auto {
                            samples: cfg.mc_samples,
                            seed: trial_seed(cfg.seed, n, trial) ^ 0x5eed,
                        };
                        Ok(empirical_density(w.signature(), q, &g, method)?.value)
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        for (gi, &target) in targets.iter().enumerate() {
            let vals: Vec<f64> = per_trial.iter().map(|v| v[gi]).collect();
            let t = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / t;
            let std = if vals.len() > 1 {
                (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (t - 1.0)).sqrt()
            } else {
                0.0
            };
            let stderr = std / t.sqrt();
            rows.push(ConvergenceRow {
                n,
                graph: gi,
                trials: vals.len(),
                mean,
                std,
                stderr,
                target,
                z_gap: if stderr > 0.0 { Some((mean - target) / stderr) } else { None },
            });
        }
    }
    Ok(rows)
}

/// Per-trial seed derived from the run seed, the sample size and the trial.
pub fn trial_seed(seed: u64, n: usize, trial: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((n as u64).wrapping_mul(0xD1B5_4A32_D192_ED03))
        .wrapping_add(trial as u64)
}
