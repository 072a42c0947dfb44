//! Runs a scenario and writes its outputs from a single thread.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::thread;

use idobs_core::ode::{OdeError, StateTrace};
use idobs_core::scenario::{self, ScenarioError, ScenarioOutcome, ScenarioSpec, ScenarioTag, SweepReport};

use crate::{config, plot, trace_csv};

/// Like [`scenario::run`], with sweep members on separate threads.
pub fn execute(spec: &ScenarioSpec) -> Result<ScenarioOutcome, ScenarioError> {
    if spec.tag != ScenarioTag::EpsilonSweep {
        return scenario::run(spec);
    }
    let issues = spec.issues();
    if !issues.is_empty() {
        return Err(ScenarioError::Invalid(issues));
    }
    let members = thread::scope(|s| {
        let handles: Vec<_> =
            spec.sweep.iter().map(|&eps| s.spawn(move || scenario::run_sweep_member(spec, eps))).collect();
        handles.into_iter().map(|h| h.join().expect("sweep member panicked")).collect()
    });
    Ok(ScenarioOutcome::Sweep(SweepReport { members }))
}

#[derive(Debug, Clone)]
pub struct OutputOptions {
    pub dir: PathBuf,
    /// Keep every `decimate`-th row in CSV output.
    pub decimate: usize,
    pub plot: bool,
}

/// In-memory output files, name and contents, in write order.
pub fn render_outputs(
    spec: &ScenarioSpec,
    outcome: &ScenarioOutcome,
    decimate: usize,
    with_plot: bool,
) -> Vec<(String, String)> {
    let config = config::to_json(spec);
    let report = outcome.report_lines();
    let mut files = Vec::new();
    let mut emit = |stem: &str, trace: &StateTrace, title: &str| {
        let trace = if decimate > 1 { trace.decimate(decimate) } else { trace.clone() };
        files.push((format!("{stem}.csv"), trace_csv::render(&trace, &config, &report)));
        if with_plot {
            files.push((format!("{stem}.svg"), plot::render(&trace, title)));
        }
    };
    match outcome {
        ScenarioOutcome::Tracking(r) | ScenarioOutcome::ClosedLoop(r) => emit("trace", &r.trace, spec.tag.name()),
        ScenarioOutcome::Drift(d) => emit("trace", &d.run.trace, spec.tag.name()),
        ScenarioOutcome::Sweep(s) => {
            for (i, m) in s.members.iter().enumerate() {
                if let Ok(r) = &m.outcome {
                    emit(&format!("sweep_{i}"), &r.trace, &format!("epsilon = {}", m.epsilon));
                }
            }
        }
    }
    let mut metrics = report.join("\n");
    metrics.push('\n');
    files.push(("metrics.txt".into(), metrics));
    files
}

pub fn write_outputs(spec: &ScenarioSpec, outcome: &ScenarioOutcome, opts: &OutputOptions) -> io::Result<Vec<PathBuf>> {
    write_files(&opts.dir, render_outputs(spec, outcome, opts.decimate, opts.plot))
}

/// Writes the partial trace of a diverged run as `partial.csv`.
pub fn write_partial(spec: &ScenarioSpec, err: &ScenarioError, dir: &Path) -> io::Result<Option<PathBuf>> {
    let ScenarioError::Ode(OdeError::Diverged { partial: Some(trace), t, .. }) = err else {
        return Ok(None);
    };
    let report = vec![format!("diverged_at = {t:.17e}")];
    let text = trace_csv::render(trace, &config::to_json(spec), &report);
    Ok(write_files(dir, vec![("partial.csv".into(), text)])?.pop())
}

fn write_files(dir: &Path, files: Vec<(String, String)>) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    files
        .into_iter()
        .map(|(name, text)| {
            let path = dir.join(name);
            fs::write(&path, text)?;
            Ok(path)
        })
        .collect()
}
