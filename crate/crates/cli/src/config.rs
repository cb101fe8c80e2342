//! Job configuration: a single JSON file naming the algebra, the
//! staircase, the seed, and the checks to run.  Unknown fields are
//! rejected; every structural problem is reported before any computation
//! starts.

use crate::CliError;
use serde::Deserialize;
use std::path::{Path, PathBuf};
use takiff::invariants::InvariantFamily;
use takiff::lie::{LieAlgebra, Sl2Triple, StructureConstantsJson};
use takiff::multicurrent::MulticurrentAlgebra;
use takiff::slice::{build_slice, PrincipalSlice};
use takiff::staircase::{Staircase, StaircaseJson};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub lie: LieSpec,
    pub staircase: StaircaseJson,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub checks: Option<Vec<String>>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

/// Either `{"type": "sl", "n": ...}` or
/// `{"structure_constants": {...}, "triple": {...}?}`.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LieSpec {
    #[serde(rename = "type", default)]
    pub kind: Option<String>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub structure_constants: Option<StructureConstantsJson>,
    #[serde(default)]
    pub triple: Option<serde_json::Value>,
}

impl JobConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
    }
}

/// A fully built job: validated algebra, staircase, and (for `sl_n`) the
/// slice with its normalized generators expanded into families.
pub struct Job {
    pub lie: LieAlgebra,
    pub staircase: Staircase,
    pub mca: MulticurrentAlgebra,
    pub seed: u64,
    pub checks: Option<Vec<String>>,
    pub output: Option<PathBuf>,
    pub slice: Option<PrincipalSlice>,
    /// Normalized generators expanded in the dual picture (sl_n only).
    pub dual_families: Vec<InvariantFamily>,
    /// Their transports to the symmetric algebra (sl_n only).
    pub primal_families: Vec<InvariantFamily>,
}

impl Job {
    pub fn build(config: JobConfig, seed_override: Option<u64>) -> Result<Self, CliError> {
        let lie = build_lie(&config.lie)?;
        let staircase = config
            .staircase
            .build()
            .map_err(|e| CliError::Config(format!("invalid staircase: {e}")))?;

        if let Some(names) = &config.checks {
            for name in names {
                if !crate::checks::CHECK_NAMES.contains(&name.as_str()) {
                    return Err(CliError::Config(format!(
                        "unknown check {name:?}; known checks: {}",
                        crate::checks::CHECK_NAMES.join(", ")
                    )));
                }
            }
        }

        let slice = match lie.sl_n() {
            Some(_) => Some(
                build_slice(&lie, staircase.ell())
                    .map_err(|e| CliError::Math(format!("slice construction failed: {e}")))?,
            ),
            None => None,
        };
        let mut dual_families = Vec::new();
        let mut primal_families = Vec::new();
        if let Some(slice) = &slice {
            let kappa = lie.killing_form();
            for (idx, gen) in slice.generators.iter().enumerate() {
                let fam = InvariantFamily::expand_seed(idx + 1, gen.clone(), &staircase)
                    .map_err(|e| CliError::Math(format!("expansion failed: {e}")))?;
                dual_families.push(fam);
                let primal_seed = takiff::invariants::seed_to_primal(gen, &kappa, staircase.ell())
                    .map_err(|e| CliError::Math(format!("transport failed: {e}")))?;
                primal_families.push(
                    InvariantFamily::expand_seed(idx + 1, primal_seed, &staircase)
                        .map_err(|e| CliError::Math(format!("expansion failed: {e}")))?,
                );
            }
        }
        let mca = MulticurrentAlgebra::new(lie.clone(), staircase.clone());
        Ok(Job {
            lie,
            staircase,
            mca,
            seed: seed_override.unwrap_or(config.seed),
            checks: config.checks,
            output: config.output,
            slice,
            dual_families,
            primal_families,
        })
    }
}

fn build_lie(spec: &LieSpec) -> Result<LieAlgebra, CliError> {
    match (&spec.kind, &spec.structure_constants) {
        (Some(kind), None) => {
            if kind != "sl" {
                return Err(CliError::Config(format!(
                    "unknown lie type {kind:?}; supported: \"sl\""
                )));
            }
            let n = spec
                .n
                .ok_or_else(|| CliError::Config("lie type \"sl\" needs a field \"n\"".into()))?;
            if spec.triple.is_some() {
                return Err(CliError::Config(
                    "a custom triple is only accepted with structure constants".into(),
                ));
            }
            LieAlgebra::sl_n_chevalley(n).map_err(|e| CliError::Config(e.to_string()))
        }
        (None, Some(sc)) => {
            let lie = sc
                .build()
                .map_err(|e| CliError::Math(format!("structure constants rejected: {e}")))?;
            if let Some(triple_json) = &spec.triple {
                let triple = Sl2Triple::from_json(triple_json)
                    .map_err(|e| CliError::Config(e.to_string()))?;
                lie.validate_sl2_triple(&triple)
                    .map_err(|e| CliError::Math(format!("supplied triple rejected: {e}")))?;
            }
            Ok(lie)
        }
        _ => Err(CliError::Config(
            "lie must be either {\"type\": \"sl\", \"n\": ...} or {\"structure_constants\": ...}"
                .into(),
        )),
    }
}
