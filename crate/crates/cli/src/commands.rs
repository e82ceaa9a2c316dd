use std::path::Path;

use hypergraphon::cut::cut_distance_aligned;
use hypergraphon::density::{gradient_check, quantum_density};
use hypergraphon::logic::{compile, parse, query_probability};
use hypergraphon::objective::ObjectiveConfig;
use hypergraphon::sampler::{convergence_report, sample_w_random, SampleConfig};
use hypergraphon::solver::{
    escalate, find_m0, fit_multipliers, kkt_residual, solve_report, M0Config, SolveReport, SolveStatus,
    SolverConfig,
};
use hypergraphon::stepfn::random_step_function;
use hypergraphon::{Mode, MultiHypergraph, QuantumGraph, Signature, StepFunction};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::input::{load_constraints, load_graphs, load_step, load_steps, parse_json, parse_relations};
use crate::manifest::Run;
use crate::{Command, SignatureArgs, SolveArgs};

/// Run one subcommand; `Ok` carries the exit code.
pub fn dispatch(cmd: &Command, run: &mut Run) -> CliResult<i32> {
    match cmd {
        Command::Solve(args) => solve(args, run),
        Command::Escalate(args) => {
            let (cs, cfg, obj) = solve_inputs(&args.solve, run)?;
            let rep = escalate(&cs, &cfg, &obj, args.m_from, args.m_to)?;
            run.write("escalation.json", &rep)?;
            let last = &rep.levels.last().expect("escalation has levels").report;
            print_json(&json!({
                "levels": rep.levels.iter().map(|l| json!({
                    "m": l.m,
                    "best_objective": l.best_objective,
                    "objective_change": l.objective_change,
                    "l1_gap": l.l1_gap,
                    "pod_holds": l.pod_holds,
                })).collect::<Vec<_>>(),
                "pod_holds": rep.pod_holds,
            }));
            Ok(status_code(last))
        }
        Command::Eval { stepfn, graph } => {
            let w = load_step(run, stepfn)?;
            let graphs = load_graphs(run, graph, w.signature())?;
            let densities = graphs
                .iter()
                .map(|q| quantum_density(q, &w))
                .collect::<hypergraphon::Result<Vec<f64>>>()?;
            let out = json!({ "densities": densities });
            run.write("density.json", &out)?;
            print_json(&out);
            Ok(0)
        }
        Command::GradCheck {
            stepfn,
            graphs,
            random,
            h,
        } => {
            if !(*h > 0.0 && h.is_finite()) {
                return Err(CliError::Usage("--h must be positive".into()));
            }
            let fixtures = match (stepfn, graphs) {
                (Some(s), Some(g)) => {
                    let w = load_step(run, s)?;
                    let qs = load_graphs(run, g, w.signature())?;
                    qs.into_iter().map(|q| (q, w.clone())).collect()
                }
                _ => random_fixtures(*random, run.seed.unwrap_or(0))?,
            };
            let mut max_abs: f64 = 0.0;
            let mut max_rel: f64 = 0.0;
            let mut coordinates = 0;
            for (q, w) in &fixtures {
                let c = gradient_check(q, w, *h)?;
                max_abs = max_abs.max(c.max_abs_error);
                max_rel = max_rel.max(c.max_rel_error);
                coordinates += c.coordinates;
            }
            let out = json!({
                "fixtures": fixtures.len(),
                "coordinates": coordinates,
                "h": h,
                "max_abs_error": max_abs,
                "max_rel_error": max_rel,
            });
            run.write("grad_check.json", &out)?;
            print_json(&out);
            Ok(0)
        }
        Command::Sample { stepfn, n } => {
            if *n == 0 {
                return Err(CliError::Usage("--n must be positive".into()));
            }
            let w = load_step(run, stepfn)?;
            let g = sample_w_random(&w, *n, run.seed.unwrap_or(0))?;
            run.write("graph.json", &g)?;
            print_json(&json!({ "n": g.n_vertices, "edge_count": g.edge_count() }));
            Ok(0)
        }
        Command::Convergence {
            stepfn,
            graphs,
            n,
            trials,
            mc_samples,
        } => {
            let w = load_step(run, stepfn)?;
            let qs = load_graphs(run, graphs, w.signature())?;
            let cfg = SampleConfig {
                n: n[0],
                seed: run.seed.unwrap_or(0),
                trials: *trials,
                mc_samples: *mc_samples,
            };
            let rows = convergence_report(&w, &qs, n, &cfg)?;
            let out = json!({ "seed": cfg.seed, "trials": cfg.trials, "rows": rows });
            run.write("table.json", &out)?;
            print_json(&out);
            Ok(0)
        }
        Command::CutDistance { a, b } => {
            let w = load_step(run, a)?;
            let v = load_step(run, b)?;
            let d = cut_distance_aligned(&w, &v)?;
            run.write("cut_distance.json", &d)?;
            print_json(&json!({ "value": d.value, "permutation": d.permutation }));
            Ok(0)
        }
        Command::Compile { formula, sig } => {
            let sig = signature(run, sig)?.ok_or_else(|| {
                CliError::Usage("compile needs --relations or --signature".into())
            })?;
            let f = parse(formula, &sig)?;
            let q = compile(&f, &sig)?;
            run.write("quantum_graph.json", &q)?;
            print_json(&serde_json::to_value(&q).expect("quantum graph serializes"));
            Ok(0)
        }
        Command::Query {
            formula,
            solutions,
            sig,
        } => {
            let steps = load_steps(run, solutions)?;
            let first = steps.first().ok_or(hypergraphon::Error::EmptySolutionSet)?;
            let sig = match signature(run, sig)? {
                Some(s) => s,
                None => first.signature().clone(),
            };
            let f = parse(formula, &sig)?;
            let p = query_probability(&f, &sig, &steps)?;
            let out = json!({ "formula": formula, "solutions": steps.len(), "probability": p });
            run.write("query.json", &out)?;
            print_json(&out);
            Ok(0)
        }
        Command::FitBeta {
            stepfn,
            constraints,
            objective,
        } => {
            let w = load_step(run, stepfn)?;
            let cs = load_constraints(run, constraints)?;
            let obj = load_or_default::<ObjectiveConfig>(run, objective.as_deref(), "objective")?;
            let (beta, residual) = fit_multipliers(&w, &cs, &obj)?;
            let kkt = kkt_residual(&w, &beta, &cs, &obj)?;
            let out = json!({ "beta": beta, "fit_residual": residual, "kkt_residual": kkt });
            run.write("beta.json", &out)?;
            print_json(&out);
            Ok(0)
        }
        Command::M0 {
            constraints,
            config,
            m_max,
        } => {
            let cs = load_constraints(run, constraints)?;
            let mut cfg = load_or_default::<M0Config>(run, config.as_deref(), "m0")?;
            if let Some(m) = m_max {
                cfg.m_max = *m;
            }
            if let Some(s) = run.seed {
                cfg.seed = s;
            }
            let rep = find_m0(&cs, &cfg)?;
            run.write("m0.json", &rep)?;
            print_json(&json!({ "m0": rep.m0, "residual": rep.residual }));
            Ok(0)
        }
    }
}

fn solve(args: &SolveArgs, run: &mut Run) -> CliResult<i32> {
    let (cs, cfg, obj) = solve_inputs(args, run)?;
    let rep = solve_report(&cs, &cfg, &obj, &[])?;
    run.write("report.json", &rep)?;
    let best = rep.best_solution();
    print_json(&json!({
        "status": rep.status,
        "solutions": rep.solutions.len(),
        "converged_restarts": rep.converged_restarts,
        "best_objective": best.map(|s| s.objective),
        "best_kkt_residual": best.map(|s| s.kkt_residual),
    }));
    Ok(status_code(&rep))
}

fn solve_inputs(
    args: &SolveArgs,
    run: &mut Run,
) -> CliResult<(hypergraphon::solver::ConstraintSet, SolverConfig, ObjectiveConfig)> {
    let cs = load_constraints(run, &args.constraints)?;
    let mut cfg = load_or_default::<SolverConfig>(run, args.config.as_deref(), "solver")?;
    if let Some(m) = args.m {
        cfg.m = m;
    }
    if let Some(r) = args.restarts {
        cfg.restarts = r;
    }
    if let Some(s) = run.seed {
        cfg.seed = s;
    }
    let obj = load_or_default::<ObjectiveConfig>(run, args.objective.as_deref(), "objective")?;
    Ok((cs, cfg, obj))
}

/// Exit code for a report status; the matching error goes to stderr.
fn status_code(rep: &SolveReport) -> i32 {
    if rep.status == SolveStatus::Converged {
        return 0;
    }
    let err = CliError::Core(rep.clone().into_result().expect_err("non-converged status"));
    eprintln!("{}", err.to_json());
    err.exit_code()
}

fn load_or_default<T: DeserializeOwned + Default>(run: &mut Run, path: Option<&Path>, role: &str) -> CliResult<T> {
    match path {
        Some(p) => {
            let text = run.read(p, Some(role))?;
            parse_json(p, &text)
        }
        None => Ok(T::default()),
    }
}

fn signature(run: &mut Run, args: &SignatureArgs) -> CliResult<Option<Signature>> {
    if let Some(spec) = &args.relations {
        return Ok(Some(parse_relations(spec)?));
    }
    if let Some(path) = &args.signature {
        let text = run.read(path, Some("signature"))?;
        let v: Value = parse_json(path, &text)?;
        let v = v.get("signature").cloned().unwrap_or(v);
        let sig: Signature = serde_json::from_value(v).map_err(|e| CliError::Schema {
            path: path.clone(),
            message: e.to_string(),
        })?;
        sig.validate()?;
        return Ok(Some(sig));
    }
    Ok(None)
}

/// Random (quantum graph, step function) pairs over small signatures.
fn random_fixtures(count: usize, seed: u64) -> CliResult<Vec<(QuantumGraph, StepFunction)>> {
    const SIGNATURES: [&[usize]; 4] = [&[2], &[3], &[2, 1], &[2, 3]];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let sig = Signature::new(SIGNATURES.choose(&mut rng).expect("non-empty").to_vec())?;
        let m = rng.gen_range(1..=4);
        let w = random_step_function(&sig, m, 0.05, 0.95, Mode::GraphonUnit, &mut rng);
        let n_terms = rng.gen_range(1..=2);
        let terms = (0..n_terms)
            .map(|_| Ok((rng.gen_range(-2.0..2.0), random_graph(&sig, &mut rng)?)))
            .collect::<CliResult<Vec<_>>>()?;
        out.push((QuantumGraph::new(&sig, terms)?, w));
    }
    Ok(out)
}

fn random_graph(sig: &Signature, rng: &mut ChaCha8Rng) -> CliResult<MultiHypergraph> {
    let n = rng.gen_range(sig.max_arity()..=sig.max_arity() + 2);
    let vertices: Vec<usize> = (0..n).collect();
    let edges = sig
        .arities
        .iter()
        .map(|&d| {
            let count = rng.gen_range(0..=2);
            let mut es: Vec<Vec<usize>> = (0..count)
                .map(|_| {
                    let mut e: Vec<usize> = vertices.choose_multiple(rng, d).copied().collect();
                    e.sort_unstable();
                    e
                })
                .collect();
            es.sort();
            es.dedup();
            es
        })
        .collect();
    Ok(MultiHypergraph::new(sig, n, edges)?)
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json value serializes"));
}
