//! Subcommand drivers.

use crate::checks::{run_check, CHECK_NAMES};
use crate::config::Job;
use crate::report::{CheckResult, Report, Status};
use crate::CliError;
use std::io::Write;
use std::path::Path;
use std::time::Instant;
use takiff::invariants::{all_derivations, apply_derivation_direct};
use takiff::multicurrent::MCElement;
use takiff::rational::rat_to_string;
use takiff::slice::TruncatedSlice;

fn job_header(job: &Job) -> (serde_json::Value, serde_json::Value) {
    let lie = match job.lie.sl_n() {
        Some(n) => serde_json::json!({ "type": "sl", "n": n, "dim": job.lie.dim() }),
        None => serde_json::json!({ "type": "custom", "dim": job.lie.dim() }),
    };
    (lie, job.staircase.to_json())
}

fn write_or_print(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            std::io::stdout().flush().ok();
            Ok(())
        }
    }
}

fn run_report(
    command: &str,
    job: &Job,
    names: &[&str],
    exact_rank: bool,
    out: Option<&Path>,
) -> Result<i32, CliError> {
    let mut results = Vec::new();
    for name in names {
        let start = Instant::now();
        let result = run_check(name, job, exact_rank);
        eprintln!("[timing] {name}: {} ms", start.elapsed().as_millis());
        let line = match &result.status {
            Status::Pass => format!("{} {name}", result.status.word()),
            Status::Fail(reason) | Status::Skipped(reason) => {
                format!("{} {name}: {reason}", result.status.word())
            }
        };
        println!("{line}");
        results.push(result);
    }
    let (lie, staircase) = job_header(job);
    let report = Report::new(command, job.seed, lie, staircase, results);
    let failed = report.any_failure();
    write_or_print(&report.to_json_string(), out)?;
    Ok(if failed { 1 } else { 0 })
}

pub fn cmd_verify(
    job: &Job,
    selected: Option<Vec<String>>,
    exact_rank: bool,
    out: Option<&Path>,
) -> Result<i32, CliError> {
    let names: Vec<&str> = match &selected {
        Some(list) => {
            for name in list {
                if !CHECK_NAMES.contains(&name.as_str()) {
                    return Err(CliError::Config(format!(
                        "unknown check {name:?}; known checks: {}",
                        CHECK_NAMES.join(", ")
                    )));
                }
            }
            list.iter().map(String::as_str).collect()
        }
        None => CHECK_NAMES.to_vec(),
    };
    let vars = job.mca.dim();
    if exact_rank
        && names.contains(&"independence")
        && vars > takiff::invariants::EXACT_RANK_MAX_VARS
    {
        return Err(CliError::Config(format!(
            "--exact-rank supports at most {} variables, this algebra has {vars}; \
             rerun without the flag to use seeded evaluation",
            takiff::invariants::EXACT_RANK_MAX_VARS
        )));
    }
    run_report("verify", job, &names, exact_rank, out)
}

pub fn cmd_index(job: &Job, out: Option<&Path>) -> Result<i32, CliError> {
    run_report("index", job, &["index"], false, out)
}

pub fn cmd_forms(job: &Job, out: Option<&Path>) -> Result<i32, CliError> {
    run_report("forms", job, &["forms"], false, out)
}

/// Emits the generator families as JSON files, one per generator and
/// picture, into the output directory.
pub fn cmd_generators(job: &Job, out: Option<&Path>) -> Result<i32, CliError> {
    if job.dual_families.is_empty() {
        return Err(CliError::Math(
            "no built-in invariant generators for this algebra".into(),
        ));
    }
    let dir = out.unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
    let has_mu = job.staircase.greatest_element().is_some();
    let mut written = 0usize;
    for fam in &job.primal_families {
        let path = dir.join(format!("primal_j{}.json", fam.j));
        let mut text = serde_json::to_string_pretty(&fam.to_json(&job.staircase)).unwrap();
        text.push('\n');
        std::fs::write(&path, text)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
        println!("wrote {}", path.display());
        written += 1;
    }
    if has_mu {
        for fam in &job.dual_families {
            let path = dir.join(format!("dual_j{}.json", fam.j));
            let mut text = serde_json::to_string_pretty(&fam.to_json(&job.staircase)).unwrap();
            text.push('\n');
            std::fs::write(&path, text)
                .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
            println!("wrote {}", path.display());
            written += 1;
        }
    } else {
        println!("dual families skipped: no greatest element");
    }
    println!("{written} family files written");
    Ok(0)
}

/// Conjugates a regular element onto the slice and emits the slice point,
/// the conjugation log, and the uniqueness cross-check.
pub fn cmd_reduce(job: &Job, element_path: &Path, out: Option<&Path>) -> Result<i32, CliError> {
    let Some(slice) = &job.slice else {
        return Err(CliError::Config(
            "reduce needs a special linear algebra with its built-in slice".into(),
        ));
    };
    if job.staircase.greatest_element().is_none() {
        return Err(CliError::Config(
            "reduce needs a staircase with a greatest element".into(),
        ));
    }
    let text = std::fs::read_to_string(element_path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", element_path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("invalid element JSON: {e}")))?;
    let x = MCElement::from_json(&value)
        .map_err(|e| CliError::Config(format!("invalid element: {e}")))?;

    let ts = TruncatedSlice::new(slice, &job.mca);
    let result = ts
        .reduce_to_slice(&x)
        .map_err(|e| CliError::Math(e.to_string()))?;
    ts.verify_uniqueness(&x, &result.output, &job.dual_families)
        .map_err(|e| CliError::Math(e.to_string()))?;
    let rank = ts
        .transversality(&result.output)
        .map_err(|e| CliError::Math(e.to_string()))?;
    let eps = ts
        .epsilon_coords(&result.output)
        .map_err(|e| CliError::Math(e.to_string()))?;

    let epsilon: Vec<serde_json::Value> = eps
        .iter()
        .map(|((i, omega), v)| {
            serde_json::json!({ "j": i, "omega": omega.0, "value": rat_to_string(v) })
        })
        .collect();
    let payload = serde_json::json!({
        "schema": "takiff-reduction/v1",
        "input": x.to_json(),
        "output": result.output.to_json(),
        "epsilon": epsilon,
        "log": result.log.iter().map(|s| s.to_json()).collect::<Vec<_>>(),
        "uniqueness": "pass",
        "transversality_rank": rank,
    });
    let mut text = serde_json::to_string_pretty(&payload).unwrap();
    text.push('\n');
    write_or_print(&text, out)?;
    Ok(0)
}

/// Re-verifies invariance by raw derivation application and compares it
/// with the table-driven path on every component.
pub fn cmd_oracle(job: &Job, out: Option<&Path>) -> Result<i32, CliError> {
    let mut res = CheckResult::new(
        "oracle",
        "raw derivation application agrees with the table-driven derivations on every component, and confirms invariance of all admissible components",
    );
    if job.dual_families.is_empty() {
        res = res.skipped("no built-in invariant generators for this algebra");
    } else {
        let mut comparisons = 0i64;
        let mut admissible_confirmed = 0i64;
        'outer: for fam in job.dual_families.iter().chain(job.primal_families.iter()) {
            let derivations = all_derivations(&job.mca, fam.picture);
            let admissible = fam.admissible_indices(&job.staircase);
            for (gamma, component) in &fam.components {
                let mut invariant = true;
                for ((y, nu), d) in &derivations {
                    let table = d.apply(component);
                    let direct = apply_derivation_direct(&job.mca, *y, nu, fam.picture, component);
                    comparisons += 1;
                    if table != direct {
                        res = res.failed(format!(
                            "paths disagree on family {} at {gamma} under ({y}, {nu})",
                            fam.j
                        ));
                        break 'outer;
                    }
                    if !direct.is_zero() {
                        invariant = false;
                    }
                }
                if admissible.contains(gamma) {
                    if !invariant {
                        res = res.failed(format!(
                            "admissible component at {gamma} of family {} is not invariant",
                            fam.j
                        ));
                        break 'outer;
                    }
                    admissible_confirmed += 1;
                }
            }
        }
        res.count("comparisons", comparisons);
        res.count("admissible_confirmed", admissible_confirmed);
    }

    let line = match &res.status {
        Status::Pass => "PASS oracle".to_string(),
        Status::Fail(reason) | Status::Skipped(reason) => {
            format!("{} oracle: {reason}", res.status.word())
        }
    };
    println!("{line}");
    let (lie, staircase) = job_header(job);
    let report = Report::new("oracle", job.seed, lie, staircase, vec![res]);
    let failed = report.any_failure();
    write_or_print(&report.to_json_string(), out)?;
    Ok(if failed { 1 } else { 0 })
}
