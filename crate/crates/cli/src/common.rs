use std::fs;
use std::path::{Path, PathBuf};

use gadm_core::policy_dsl::{parse_template, ParameterVector, TemplateAst};
use gadm_core::simulator::{NoiseSchedule, Ontology, SimulationSetup};
use gadm_core::stats::mean_std;
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub fn read_input(path: &Path) -> CliResult<String> {
    fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))
}

/// Fails early when an input file is missing.
pub fn require_file(path: &Path) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::config(format!(
            "no such file: {}",
            path.display()
        )))
    }
}

pub fn require_files<'a>(paths: impl IntoIterator<Item = &'a Option<PathBuf>>) -> CliResult<()> {
    paths
        .into_iter()
        .flatten()
        .try_for_each(|p| require_file(p))
}

pub fn template(path: Option<&Path>, builtin: &str) -> CliResult<TemplateAst> {
    let text = match path {
        Some(p) => read_input(p)?,
        None => builtin.to_string(),
    };
    Ok(parse_template(&text)?)
}

pub fn ontology(path: Option<&Path>) -> CliResult<Ontology> {
    match path {
        Some(p) => Ok(Ontology::from_toml_str(&read_input(p)?)?),
        None => Ok(Ontology::restaurant()),
    }
}

/// `mixed` or a single error rate.
pub fn noise_schedule(spec: &str) -> CliResult<NoiseSchedule> {
    if spec == "mixed" {
        return Ok(NoiseSchedule::mixed());
    }
    let e: f64 = spec
        .parse()
        .map_err(|_| CliError::config(format!("bad noise level `{spec}`")))?;
    Ok(NoiseSchedule::Fixed(e))
}

pub fn setup(ontology_path: Option<&Path>, schedule: NoiseSchedule) -> CliResult<SimulationSetup> {
    let setup = SimulationSetup {
        ontology: ontology(ontology_path)?,
        ..SimulationSetup::restaurant()
    }
    .with_schedule(schedule);
    setup.validate()?;
    Ok(setup)
}

#[derive(serde::Deserialize)]
struct ParamsFile {
    params: Vec<f64>,
}

/// A comma-separated list, or a JSON file holding `{"params": [...]}`.
pub fn params(spec: &str) -> CliResult<ParameterVector> {
    let path = Path::new(spec);
    let values = if path.is_file() {
        let text = read_input(path)?;
        serde_json::from_str::<ParamsFile>(&text)
            .map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?
            .params
    } else {
        spec.split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| {
                CliError::config(format!(
                    "`{spec}` is neither a parameter file nor a comma-separated list"
                ))
            })?
    };
    Ok(ParameterVector::new(values)?)
}

pub fn out_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path)
        .map_err(|e| CliError::data(format!("cannot create {}: {e}", path.display())))
}

pub fn write(path: &Path, contents: impl AsRef<[u8]>) -> CliResult<()> {
    fs::write(path, contents)
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("results serialize");
    text.push('\n');
    write(path, text)
}

pub fn write_csv<R: Serialize>(path: &Path, rows: &[R]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::data(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::data(e.to_string()))?;
    write(path, bytes)
}

pub fn finite(x: f64, what: &str) -> CliResult<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::numeric(format!("{what} is not finite")))
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

pub fn summarize(xs: &[f64]) -> MeanStd {
    let (mean, std) = mean_std(xs);
    MeanStd { mean, std }
}
