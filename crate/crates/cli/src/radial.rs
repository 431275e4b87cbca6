use serde::Serialize;
use spingeo_core::io::{parse_json, read_text, state_csv, to_json, write_text, ProblemDoc};
use spingeo_core::radial::{
    nonlinear_iterate, ode_defect, reduction_defect, solve_bound_state, RadialState,
};
use spingeo_core::{Error, Result};

use crate::{create_dir, Outcome, RunConfig};

#[derive(Serialize)]
struct Summary {
    #[serde(rename = "E")]
    energy: f64,
    norm: f64,
    iterations: usize,
    node_counts: [usize; 4],
    matching_defect: f64,
    /// Only for the linear solve; the loop's last iterate solves a modified
    /// problem.
    #[serde(skip_serializing_if = "Option::is_none")]
    ode_defect: Option<f64>,
    reduction_defect: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    history: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    energies: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    flagged_nodes: Option<Vec<usize>>,
}

#[derive(Serialize)]
struct Failure<'a> {
    error: String,
    bracket: [f64; 2],
    #[serde(skip_serializing_if = "<[_]>::is_empty")]
    trace: &'a [(f64, f64)],
    #[serde(skip_serializing_if = "<[_]>::is_empty")]
    history: &'a [f64],
}

fn write_failure(config: &RunConfig, bracket: [f64; 2], e: &Error) -> Result<()> {
    let (trace, history): (&[(f64, f64)], &[f64]) = match e {
        Error::NoRootInBracket { trace, .. } => (trace, &[]),
        Error::DivergenceDetected { history, .. } => (&[], history),
        _ => (&[], &[]),
    };
    let f = Failure { error: e.to_string(), bracket, trace, history };
    write_text(&config.output.join("summary.json"), &to_json(&f))
}

pub fn run(config: &RunConfig) -> Result<Outcome> {
    let doc: ProblemDoc = parse_json(&read_text(&config.input)?)?;
    let problem = doc.to_problem()?;
    let bracket = (doc.bracket[0], doc.bracket[1]);
    create_dir(&config.output)?;

    let solved: Result<(RadialState, Option<_>)> = match &doc.nonlinear {
        None => solve_bound_state(&problem, bracket).map(|s| (s, None)),
        Some(nl) => nonlinear_iterate(&problem, bracket, &nl.options()).map(|r| (r.state.clone(), Some(r))),
    };
    let (state, loop_result) = match solved {
        Ok(v) => v,
        Err(e @ (Error::NoRootInBracket { .. } | Error::DivergenceDetected { .. })) => {
            write_failure(config, doc.bracket, &e)?;
            let mut msg = format!("radial solve failed: {e}");
            if let Error::NoRootInBracket { trace, .. } = &e {
                for (energy, value) in trace {
                    msg.push_str(&format!("\n  E = {energy:.12}  matching = {value:.6e}"));
                }
            }
            return Ok(Outcome::Fail(msg));
        }
        Err(e) => return Err(e),
    };
    let summary = Summary {
        energy: state.energy,
        norm: state.norm,
        iterations: loop_result.as_ref().map_or(1, |r| r.iterations),
        node_counts: state.node_counts,
        matching_defect: state.matching_defect,
        ode_defect: match &loop_result {
            None => Some(ode_defect(&problem, &state)?),
            Some(_) => None,
        },
        reduction_defect: reduction_defect(&state),
        converged: loop_result.as_ref().map(|r| r.converged),
        history: loop_result.as_ref().map(|r| r.history.clone()),
        energies: loop_result.as_ref().map(|r| r.energies.clone()),
        flagged_nodes: loop_result.as_ref().map(|r| r.flagged_nodes.clone()),
    };
    write_text(&config.output.join("state.csv"), &state_csv(&state))?;
    write_text(&config.output.join("summary.json"), &to_json(&summary))?;
    Ok(Outcome::Pass)
}
