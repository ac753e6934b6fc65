//! JSON description of a predictive stack: channels top first, the top
//! prior, the clamped datum and the descent settings.
//!
//! ```json
//! {"levels": [{"mean": {"linear": {"A": [[2.0]], "b": [0.0]}}, "cov": [[1.0]]}],
//!  "prior": {"mean": [0.0], "cov": [[1.0]]},
//!  "data": [1.0],
//!  "config": {"lambda": 0.05}}
//! ```

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use crate::error::{Error, Result};

use super::channel::{GaussianChannel, GaussianState};
use super::system::LaplaceConfig;

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum MeanSpec {
    Linear {
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        #[serde(default)]
        b: Option<Vec<f64>>,
    },
    Named {
        name: String,
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        #[serde(default)]
        b: Option<Vec<f64>>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LevelSpec {
    mean: MeanSpec,
    cov: Vec<Vec<f64>>,
    #[serde(default)]
    prior: Option<StateSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateSpec {
    mean: Vec<f64>,
    cov: Vec<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelSpec {
    #[serde(default)]
    name: Option<String>,
    levels: Vec<LevelSpec>,
    #[serde(default)]
    prior: Option<StateSpec>,
    data: Vec<f64>,
    #[serde(default)]
    config: Option<LaplaceConfig>,
    #[serde(default)]
    steps: Option<u64>,
}

/// A parsed predictive stack.
#[derive(Debug, Clone)]
pub struct LaplaceModel {
    pub name: String,
    pub levels: Vec<GaussianChannel>,
    pub prior: GaussianState,
    pub datum: DVector<f64>,
    pub config: LaplaceConfig,
    /// Default number of ticks to run.
    pub steps: u64,
}

fn matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(Error::Parse(format!("{what} is not a non-empty rectangular matrix")));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

fn channel(spec: &LevelSpec) -> Result<GaussianChannel> {
    let cov = matrix(&spec.cov, "cov")?;
    let offset = |b: &Option<Vec<f64>>, m: usize| match b {
        Some(b) => DVector::from_column_slice(b),
        None => DVector::zeros(m),
    };
    match &spec.mean {
        MeanSpec::Linear { a, b } => {
            let a = matrix(a, "A")?;
            let b = offset(b, a.nrows());
            GaussianChannel::linear(a, b, cov)
        }
        MeanSpec::Named { name, a, b } => {
            let a = matrix(a, "A")?;
            let b = offset(b, a.nrows());
            match name.as_str() {
                "tanh" => GaussianChannel::tanh(a, b, cov),
                other => Err(Error::Parse(format!("unknown mean {other:?}; expected \"tanh\""))),
            }
        }
    }
}

impl LaplaceModel {
    pub fn from_json(text: &str) -> Result<LaplaceModel> {
        let spec: ModelSpec = serde_json::from_str(text)?;
        let first = spec.levels.first().ok_or_else(|| Error::Parse("model has no levels".into()))?;
        let prior = spec
            .prior
            .as_ref()
            .or(first.prior.as_ref())
            .ok_or_else(|| Error::Parse("model has no top-level prior".into()))?;
        if spec.levels.iter().skip(1).any(|l| l.prior.is_some()) {
            return Err(Error::Parse("only the top level takes a prior; lower ones are fed from above".into()));
        }
        let prior = GaussianState::new(DVector::from_column_slice(&prior.mean), matrix(&prior.cov, "prior cov")?)?;
        let levels = spec.levels.iter().map(channel).collect::<Result<Vec<_>>>()?;
        let datum = DVector::from_column_slice(&spec.data);
        if prior.dim() != levels[0].in_dim() || datum.len() != levels.last().expect("non-empty").out_dim() {
            return Err(Error::Shape("prior or data dimension does not match the levels".into()));
        }
        let config = spec.config.unwrap_or_default();
        config.validate()?;
        Ok(LaplaceModel {
            name: spec.name.unwrap_or_else(|| "laplace".into()),
            levels,
            prior,
            datum,
            config,
            steps: spec.steps.unwrap_or(200),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_documented_example() {
        let m = LaplaceModel::from_json(
            r#"{"levels": [{"mean": {"linear": {"A": [[2.0]], "b": [0.0]}}, "cov": [[1.0]]}],
                "prior": {"mean": [0.0], "cov": [[1.0]]}, "data": [1.0], "config": {"lambda": 0.05}}"#,
        )
        .unwrap();
        assert_eq!(m.levels.len(), 1);
        assert!(m.levels[0].is_linear());
        assert_eq!(m.config.lambda, 0.05);
    }

    #[test]
    fn rejects_malformed_models() {
        for bad in [
            r#"{"levels": [], "data": [1.0]}"#,
            r#"{"levels": [{"mean": {"linear": {"A": [[1.0, 2.0], [1.0]]}}, "cov": [[1.0]]}], "prior": {"mean": [0.0], "cov": [[1.0]]}, "data": [1.0]}"#,
            r#"{"levels": [{"mean": {"named": {"name": "sin", "A": [[1.0]]}}, "cov": [[1.0]]}], "prior": {"mean": [0.0], "cov": [[1.0]]}, "data": [1.0]}"#,
            r#"{"levels": [{"mean": {"linear": {"A": [[1.0]]}}, "cov": [[1.0]]}], "prior": {"mean": [0.0], "cov": [[1.0]]}, "data": [1.0, 2.0]}"#,
            r#"{"levels": [{"mean": {"linear": {"A": [[1.0]]}}, "cov": [[1.0]]}], "prior": {"mean": [0.0], "cov": [[1.0]]}, "data": [1.0], "config": {"lambda": -1}}"#,
        ] {
            assert!(LaplaceModel::from_json(bad).is_err(), "{bad}");
        }
    }
}
