use gibbs_core::{GibbsError, GibbsModel, Result};
use serde::Deserialize;

/// JSON model descriptor accepted by `--model`.
#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    EwensPitman { alpha: f64, theta: f64 },
    Gnedin { gamma: f64, zeta: f64 },
    /// `w[j-1] = w_j`, `v[n-1][k-1] = v_{n,k}`.
    Custom { w: Vec<f64>, v: Vec<Vec<f64>> },
}

impl ModelSpec {
    pub fn build(self) -> Result<GibbsModel> {
        match self {
            ModelSpec::EwensPitman { alpha, theta } => GibbsModel::ewens_pitman(alpha, theta),
            ModelSpec::Gnedin { gamma, zeta } => GibbsModel::gnedin(gamma, zeta),
            ModelSpec::Custom { w, v } => GibbsModel::custom_table(w, v),
        }
    }
}

pub fn parse_model(json: &str) -> Result<GibbsModel> {
    let spec: ModelSpec =
        serde_json::from_str(json).map_err(|e| GibbsError::Param(format!("bad --model descriptor: {e}")))?;
    spec.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_kind() {
        assert!(parse_model(r#"{"type":"ewens_pitman","alpha":0.5,"theta":1}"#).is_ok());
        assert!(parse_model(r#"{"type":"gnedin","gamma":1,"zeta":1}"#).is_ok());
        assert!(parse_model(r#"{"type":"custom","w":[1,1],"v":[[1],[0.5,0.5]]}"#).is_ok());
        assert!(matches!(parse_model(r#"{"type":"ewens_pitman","alpha":2,"theta":1}"#), Err(GibbsError::Param(_))));
        assert!(matches!(parse_model(r#"{"type":"nope"}"#), Err(GibbsError::Param(_))));
    }
}
