//! TOML experiment-spec files.
//!
//! ```toml
//! [experiment]
//! axis = "beta"                 # beta | heavy | gamma
//! values = ["0.05", "0.10"]     # heavy axis: [["0.05","0.05","0.01"], ...]
//! cases = 200
//! methods = ["DM", "DMR", "OPDCA", "OPT"]
//! opt_budget = 20000            # optional
//! timings = false               # optional
//!
//! [base]                        # all optional; defaults shown in the README
//! aps = 8
//! servers = 6
//! jobs = 30
//! offload = [2, 200]
//! compute = [50, 500]
//! download = [2, 100]
//! beta = "0.15"
//! heavy = ["0.05", "0.05", "0.01"]
//! gamma = "0.7"
//! seed = 42
//! ```
//!
//! Rational parameters are written as strings so they parse exactly.

use serde::Deserialize;

use msmr_core::error::{Error, Result};
use msmr_core::workload::{parse_ratio, EdgeConfig};

use crate::experiment::{AxisValues, ExperimentSpec, Method, SWEEP_NODE_BUDGET};

#[derive(Deserialize)]
struct SpecFile {
    experiment: ExperimentSection,
    #[serde(default)]
    base: BaseSection,
}

#[derive(Deserialize)]
struct ExperimentSection {
    axis: String,
    values: toml::Value,
    cases: usize,
    methods: Vec<String>,
    opt_budget: Option<u64>,
    #[serde(default)]
    timings: bool,
    output: Option<String>,
}

#[derive(Deserialize, Default)]
struct BaseSection {
    aps: Option<usize>,
    servers: Option<usize>,
    jobs: Option<usize>,
    offload: Option<[u64; 2]>,
    compute: Option<[u64; 2]>,
    download: Option<[u64; 2]>,
    beta: Option<String>,
    heavy: Option<[String; 3]>,
    gamma: Option<String>,
    deadline_cap: Option<u64>,
    seed: Option<u64>,
}

fn toml_error(text: &str, e: toml::de::Error) -> Error {
    let (line, column) = e
        .span()
        .map(|span| {
            let upto = &text[..span.start.min(text.len())];
            let line = upto.matches('\n').count() + 1;
            let column = upto.rsplit('\n').next().map(|l| l.len()).unwrap_or(0) + 1;
            (line, column)
        })
        .unwrap_or((1, 1));
    Error::Parse {
        line,
        column,
        message: e.message().to_string(),
    }
}

fn string_values(values: &toml::Value, axis: &str) -> Result<Vec<String>> {
    let arr = values
        .as_array()
        .ok_or_else(|| Error::Argument(format!("{axis} values must be an array")))?;
    arr.iter()
        .map(|v| {
            v.as_str().map(str::to_owned).ok_or_else(|| {
                Error::Argument(format!(
                    "{axis} values must be strings (exact rationals), got {v}"
                ))
            })
        })
        .collect()
}

fn heavy_values(values: &toml::Value) -> Result<Vec<[String; 3]>> {
    let arr = values
        .as_array()
        .ok_or_else(|| Error::Argument("heavy values must be an array".into()))?;
    arr.iter()
        .map(|triple| {
            let inner = triple
                .as_array()
                .filter(|a| a.len() == 3)
                .ok_or_else(|| {
                    Error::Argument("each heavy value must be a 3-element array".into())
                })?;
            let mut out: [String; 3] = Default::default();
            for (slot, v) in out.iter_mut().zip(inner) {
                *slot = v
                    .as_str()
                    .map(str::to_owned)
                    .ok_or_else(|| Error::Argument("heavy entries must be strings".into()))?;
            }
            Ok(out)
        })
        .collect()
}

/// Parses an experiment spec from TOML text.
pub fn load_spec(text: &str) -> Result<ExperimentSpec> {
    let file: SpecFile = toml::from_str(text).map_err(|e| toml_error(text, e))?;
    let axis = match file.experiment.axis.as_str() {
        "beta" => AxisValues::Beta(string_values(&file.experiment.values, "beta")?),
        "gamma" => AxisValues::Gamma(string_values(&file.experiment.values, "gamma")?),
        "heavy" => AxisValues::Heavy(heavy_values(&file.experiment.values)?),
        other => {
            return Err(Error::Argument(format!(
                "axis must be beta, heavy, or gamma; got '{other}'"
            )))
        }
    };
    let methods = file
        .experiment
        .methods
        .iter()
        .map(|m| Method::parse(m))
        .collect::<Result<Vec<_>>>()?;

    let mut base = EdgeConfig::default();
    let b = file.base;
    if let Some(v) = b.aps {
        base.num_aps = v;
    }
    if let Some(v) = b.servers {
        base.num_servers = v;
    }
    if let Some(v) = b.jobs {
        base.num_jobs = v;
    }
    if let Some([lo, hi]) = b.offload {
        base.offload_range = (lo, hi);
    }
    if let Some([lo, hi]) = b.compute {
        base.compute_range = (lo, hi);
    }
    if let Some([lo, hi]) = b.download {
        base.download_range = (lo, hi);
    }
    if let Some(v) = &b.beta {
        base.beta = parse_ratio(v)?;
    }
    if let Some(h) = &b.heavy {
        for (slot, s) in base.heavy_targets.iter_mut().zip(h) {
            *slot = parse_ratio(s)?;
        }
    }
    if let Some(v) = &b.gamma {
        base.gamma = parse_ratio(v)?;
    }
    if let Some(v) = b.deadline_cap {
        base.deadline_cap = Some(v);
    }
    if let Some(v) = b.seed {
        base.seed = v;
    }

    Ok(ExperimentSpec {
        axis,
        cases: file.experiment.cases,
        methods,
        base,
        opt_budget: file.experiment.opt_budget.unwrap_or(SWEEP_NODE_BUDGET),
        timings: file.experiment.timings,
        output: file.experiment.output.map(Into::into),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_spec() {
        let text = r#"
            [experiment]
            axis = "beta"
            values = ["0.05", "0.10"]
            cases = 10
            methods = ["DM", "OPT"]
            opt_budget = 500

            [base]
            aps = 4
            servers = 3
            jobs = 8
            beta = "0.2"
            gamma = "1.1"
            seed = 9
        "#;
        let spec = load_spec(text).unwrap();
        assert_eq!(spec.axis.len(), 2);
        assert_eq!(spec.cases, 10);
        assert_eq!(spec.methods, vec![Method::Dm, Method::Opt]);
        assert_eq!(spec.base.num_aps, 4);
        assert_eq!(spec.opt_budget, 500);
    }

    #[test]
    fn parses_heavy_axis() {
        let text = r#"
            [experiment]
            axis = "heavy"
            values = [["0.01", "0.01", "0.01"], ["0.10", "0.10", "0.05"]]
            cases = 2
            methods = ["DMR"]
        "#;
        let spec = load_spec(text).unwrap();
        match spec.axis {
            AxisValues::Heavy(v) => assert_eq!(v.len(), 2),
            _ => panic!(),
        }
    }

    #[test]
    fn reports_toml_errors_with_position() {
        match load_spec("[experiment\naxis = 1") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_numeric_axis_values() {
        let text = r#"
            [experiment]
            axis = "beta"
            values = [0.05]
            cases = 1
            methods = ["DM"]
        "#;
        assert!(load_spec(text).is_err());
    }
}
