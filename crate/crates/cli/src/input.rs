//! Loading the JSON artifacts accepted by the subcommands.

use std::path::Path;

use hypergraphon::logic::compile_str;
use hypergraphon::solver::{Constraint, ConstraintSet, EscalationReport, SolveReport};
use hypergraphon::{MultiHypergraph, QuantumGraph, Signature, StepFunction};
use serde::de::DeserializeOwned;
use serde_json::Value;

use crate::error::{CliError, CliResult};
use crate::manifest::Run;

pub fn parse_json<T: DeserializeOwned>(path: &Path, text: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|source| json_error(path, source))
}

fn from_value<T: DeserializeOwned>(path: &Path, v: Value) -> CliResult<T> {
    serde_json::from_value(v).map_err(|source| json_error(path, source))
}

/// Syntax errors are I/O-level; well-formed JSON with bad content is a validation error.
fn json_error(path: &Path, source: serde_json::Error) -> CliError {
    match source.classify() {
        serde_json::error::Category::Data => schema(path, source.to_string()),
        _ => CliError::Json {
            path: path.to_path_buf(),
            source,
        },
    }
}

fn schema(path: &Path, message: impl Into<String>) -> CliError {
    CliError::Schema {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

pub fn read_value(run: &mut Run, path: &Path, role: Option<&str>) -> CliResult<Value> {
    let text = run.read(path, role)?;
    parse_json(path, &text)
}

/// A graph entry: a quantum graph (`{"terms": …}`) or a plain hypergraph.
fn graph_value(path: &Path, sig: &Signature, v: Value) -> CliResult<QuantumGraph> {
    if v.get("terms").is_some() {
        let q: QuantumGraph = from_value(path, v)?;
        Ok(q.validated(sig)?)
    } else {
        let g: MultiHypergraph = from_value(path, v)?;
        Ok(QuantumGraph::single(sig, g)?)
    }
}

/// Constraints: `{"signature": …, "constraints": [{"graph"|"formula": …, "target": u, "label"?: …}]}`.
pub fn load_constraints(run: &mut Run, path: &Path) -> CliResult<ConstraintSet> {
    let v = read_value(run, path, Some("constraints"))?;
    constraints_from_value(path, v)
}

pub fn constraints_from_value(path: &Path, mut v: Value) -> CliResult<ConstraintSet> {
    let sig: Signature = from_value(
        path,
        v.get_mut("signature")
            .map(Value::take)
            .ok_or_else(|| schema(path, "missing `signature`"))?,
    )?;
    sig.validate()?;
    let entries = match v.get_mut("constraints").map(Value::take) {
        Some(Value::Array(a)) => a,
        _ => return Err(schema(path, "`constraints` must be an array")),
    };
    let mut constraints = Vec::with_capacity(entries.len());
    for (i, mut e) in entries.into_iter().enumerate() {
        let target = e
            .get("target")
            .and_then(Value::as_f64)
            .ok_or_else(|| schema(path, format!("constraint {i}: missing numeric `target`")))?;
        let label = e.get("label").and_then(Value::as_str).map(str::to_string);
        let graph = match (e.get_mut("graph").map(Value::take), e.get("formula").and_then(Value::as_str)) {
            (Some(g), None) => graph_value(path, &sig, g)?,
            (None, Some(f)) => compile_str(f, &sig)?,
            _ => return Err(schema(path, format!("constraint {i}: give exactly one of `graph`, `formula`"))),
        };
        constraints.push(Constraint { graph, target, label });
    }
    let cs = ConstraintSet {
        signature: sig,
        constraints,
    };
    cs.validate()?;
    Ok(cs)
}

/// Step functions from a step-function file, an array of them, a solve report
/// (all solutions, best first) or an escalation report (its last level).
pub fn load_steps(run: &mut Run, path: &Path) -> CliResult<Vec<StepFunction>> {
    let v = read_value(run, path, None)?;
    steps_from_value(path, v)
}

fn steps_from_value(path: &Path, v: Value) -> CliResult<Vec<StepFunction>> {
    if v.is_array() {
        return from_value(path, v);
    }
    if v.get("levels").is_some() {
        let rep: EscalationReport = from_value(path, v)?;
        let last = rep.levels.last().ok_or_else(|| schema(path, "escalation report has no levels"))?;
        return Ok(last.report.solutions.iter().map(|s| s.step.clone()).collect());
    }
    if v.get("solutions").is_some() {
        let rep: SolveReport = from_value(path, v)?;
        return Ok(rep.solutions.into_iter().map(|s| s.step).collect());
    }
    if v.get("witness").is_some() {
        return Ok(vec![from_value(path, v["witness"].clone())?]);
    }
    Ok(vec![from_value(path, v)?])
}

/// The first (best) step function of [`load_steps`].
pub fn load_step(run: &mut Run, path: &Path) -> CliResult<StepFunction> {
    load_steps(run, path)?
        .into_iter()
        .next()
        .ok_or_else(|| schema(path, "no step function found"))
}

/// Graphs from a single graph, an array of graphs, or a constraints file.
pub fn load_graphs(run: &mut Run, path: &Path, sig: &Signature) -> CliResult<Vec<QuantumGraph>> {
    let v = read_value(run, path, None)?;
    match v {
        Value::Array(items) => items.into_iter().map(|g| graph_value(path, sig, g)).collect(),
        v if v.get("constraints").is_some() => {
            let cs = constraints_from_value(path, v)?;
            if !cs.signature.compatible(sig) {
                return Err(hypergraphon::Error::SignatureMismatch("constraints vs step function".into()).into());
            }
            Ok(cs.graphs())
        }
        v => Ok(vec![graph_value(path, sig, v)?]),
    }
}

/// `Friends:2,Sm:1` → a named signature.
pub fn parse_relations(spec: &str) -> CliResult<Signature> {
    let mut names = Vec::new();
    let mut arities = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, d) = part
            .split_once(':')
            .ok_or_else(|| CliError::Usage(format!("relation `{part}` is not NAME:ARITY")))?;
        let d: usize = d
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("bad arity in `{part}`")))?;
        names.push(name.trim().to_string());
        arities.push(d);
    }
    Ok(Signature::with_names(arities, names)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relations_spec() {
        let sig = parse_relations("Friends:2, Sm:1").unwrap();
        assert_eq!(sig.arities, vec![2, 1]);
        assert_eq!(sig.relation_index("Sm"), Some(1));
        assert!(matches!(parse_relations("Friends"), Err(CliError::Usage(_))));
        assert!(matches!(parse_relations("Friends:x"), Err(CliError::Usage(_))));
    }

    #[test]
    fn constraint_entries_need_one_source() {
        let p = Path::new("c.json");
        let both: Value = serde_json::from_str(
            r#"{"signature": {"arities": [1]}, "constraints": [
                {"target": 0.5, "graph": {"n": 1, "edges": [[[0]]]}, "formula": "forall x : R1(x)"}]}"#,
        )
        .unwrap();
        assert!(matches!(constraints_from_value(p, both), Err(CliError::Schema { .. })));
        let formula: Value = serde_json::from_str(
            r#"{"signature": {"arities": [1]}, "constraints": [{"target": 0.5, "formula": "forall x : R1(x)"}]}"#,
        )
        .unwrap();
        let cs = constraints_from_value(p, formula).unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(cs.constraints[0].graph.terms.len(), 1);
    }

    #[test]
    fn steps_from_any_container() {
        let p = Path::new("s.json");
        let sig = Signature::new(vec![2]).unwrap();
        let w = StepFunction::constant(&sig, 0.4, hypergraphon::Mode::GraphonUnit).unwrap();
        let single = serde_json::to_value(&w).unwrap();
        let array = Value::Array(vec![single.clone(), single.clone()]);
        let witness = serde_json::json!({ "witness": single.clone(), "m0": 1 });
        assert_eq!(steps_from_value(p, single).unwrap(), vec![w.clone()]);
        assert_eq!(steps_from_value(p, array).unwrap().len(), 2);
        assert_eq!(steps_from_value(p, witness).unwrap(), vec![w]);
    }
}
