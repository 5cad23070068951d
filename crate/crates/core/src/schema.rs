//! JSON documents for systems, basis families and controls.
//!
//! A system document has the fields `basis`, `coeffs`, `eigen_table`,
//! `offset` (full form) or `basis`, `coeffs`, `eigen_params`, `jordan_tag`
//! (compact form, selected by the presence of `jordan_tag`). It may also carry
//! `G` and `tau`. A controls document has `G` and optionally `tau`.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::SchemaError;
use crate::response::{BasisFamily, CompactSystemParams, ControlMatrix, FullSystemParams, JordanTag, SystemParams};

/// Raw system document; `coeffs` is interpreted once the form is known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDoc {
    pub basis: BasisFamily,
    pub coeffs: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigen_table: Option<Vec<[f64; 4]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigen_params: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jordan_tag: Option<JordanTag>,
    #[serde(rename = "G", default, skip_serializing_if = "Option::is_none")]
    pub g: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
}

/// Controls document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlsDoc {
    #[serde(rename = "G")]
    pub g: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
}

/// A validated system document.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub params: SystemParams,
    pub family: BasisFamily,
    pub g: Option<ControlMatrix>,
    pub tau: Option<f64>,
}

/// A validated controls document.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlsSpec {
    pub g: ControlMatrix,
    pub tau: Option<f64>,
}

/// Deserializes `value`, reporting failures with the offending field path.
pub fn from_value_with_path<T: DeserializeOwned>(value: Value, prefix: &str) -> Result<T, SchemaError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let path = match (prefix.is_empty(), inner.as_str()) {
            (true, p) => p.to_string(),
            (false, ".") => prefix.to_string(),
            (false, p) if p.starts_with('[') => format!("{prefix}{p}"),
            (false, p) => format!("{prefix}.{p}"),
        };
        SchemaError::new(path, e.into_inner().to_string())
    })
}

/// Parses JSON text into `T`, reporting failures with the offending field path.
pub fn from_str_with_path<T: DeserializeOwned>(text: &str) -> Result<T, SchemaError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| SchemaError::new(e.path().to_string(), e.into_inner().to_string()))
}

fn check_tau(tau: Option<f64>, path: &str) -> Result<(), SchemaError> {
    match tau {
        Some(t) if !(t.is_finite() && t > 0.0) => Err(SchemaError::new(path, format!("tau must be positive, got {t}"))),
        _ => Ok(()),
    }
}

fn controls(rows: &[Vec<f64>], path: &str) -> Result<ControlMatrix, SchemaError> {
    ControlMatrix::from_rows(rows).map_err(|e| SchemaError::new(path, e.to_string()))
}

impl SystemDoc {
    pub fn validate(self) -> Result<SystemSpec, SchemaError> {
        check_tau(self.tau, "tau")?;
        let params: SystemParams = match &self.jordan_tag {
            Some(tag) => {
                if self.eigen_table.is_some() {
                    return Err(SchemaError::new("eigen_table", "not allowed together with jordan_tag"));
                }
                if self.offset.is_some() {
                    return Err(SchemaError::new("offset", "compact systems have no offset"));
                }
                let rows: Vec<Vec<f64>> = from_value_with_path(self.coeffs.clone(), "coeffs")?;
                let eigen = self
                    .eigen_params
                    .clone()
                    .ok_or_else(|| SchemaError::new("eigen_params", "required with jordan_tag"))?;
                if tag.dimension() != eigen.len() {
                    return Err(SchemaError::new(
                        "jordan_tag",
                        format!(
                            "describes {} parameters, eigen_params has {}",
                            tag.dimension(),
                            eigen.len()
                        ),
                    ));
                }
                for (i, r) in rows.iter().enumerate() {
                    if r.len() != eigen.len() {
                        return Err(SchemaError::new(
                            format!("coeffs[{i}]"),
                            format!("expected {} entries, got {}", eigen.len(), r.len()),
                        ));
                    }
                }
                CompactSystemParams::new(rows.len(), rows.concat(), eigen, tag.clone())
                    .map_err(|e| SchemaError::new(".", e.to_string()))?
                    .into()
            }
            None => {
                if self.eigen_params.is_some() {
                    return Err(SchemaError::new(
                        "eigen_params",
                        "only allowed together with jordan_tag",
                    ));
                }
                let coeffs: Vec<Vec<Vec<Vec<f64>>>> = from_value_with_path(self.coeffs.clone(), "coeffs")?;
                let table = self
                    .eigen_table
                    .clone()
                    .ok_or_else(|| SchemaError::new("eigen_table", "required for the full parameterization"))?;
                let offset = self
                    .offset
                    .clone()
                    .ok_or_else(|| SchemaError::new("offset", "required for the full parameterization"))?;
                FullSystemParams::new(coeffs, table, offset)
                    .map_err(|e| SchemaError::new(".", e.to_string()))?
                    .into()
            }
        };
        let g = self.g.as_deref().map(|rows| controls(rows, "G")).transpose()?;
        Ok(SystemSpec {
            params,
            family: self.basis,
            g,
            tau: self.tau,
        })
    }

    /// Document for an already validated system.
    pub fn from_params(params: &SystemParams, family: &BasisFamily) -> Self {
        match params {
            SystemParams::Full(f) => Self {
                basis: family.clone(),
                coeffs: serde_json::to_value(f.coeffs_nested()).expect("numbers serialize"),
                eigen_table: Some(f.eigen_table().to_vec()),
                eigen_params: None,
                offset: Some(f.offset().to_vec()),
                jordan_tag: None,
                g: None,
                tau: None,
            },
            SystemParams::Compact(c) => Self {
                basis: family.clone(),
                coeffs: serde_json::to_value(c.coeffs().chunks(c.n()).collect::<Vec<_>>()).expect("numbers serialize"),
                eigen_table: None,
                eigen_params: Some(c.eigen_params().to_vec()),
                offset: None,
                jordan_tag: Some(c.tag().clone()),
                g: None,
                tau: None,
            },
        }
    }
}

impl ControlsDoc {
    pub fn validate(self) -> Result<ControlsSpec, SchemaError> {
        check_tau(self.tau, "tau")?;
        Ok(ControlsSpec {
            g: controls(&self.g, "G")?,
            tau: self.tau,
        })
    }
}

pub fn parse_system(text: &str) -> Result<SystemSpec, SchemaError> {
    from_str_with_path::<SystemDoc>(text)?.validate()
}

pub fn parse_controls(text: &str) -> Result<ControlsSpec, SchemaError> {
    from_str_with_path::<ControlsDoc>(text)?.validate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::response::response_full;

    const EXP_BASIS: &str = r#"{
        "basis": [
            {"ell": 0, "alpha": 1.0, "beta": 0.0, "kind": "cos"},
            {"ell": 0, "alpha": 2.0, "beta": 0.0, "kind": "cos"}
        ],
        "coeffs": [[[[0.5], [-1.5]]]],
        "eigen_table": [[0.3, 0.7, 1.0324289629116616, 0.8696029191140402]],
        "offset": [0.0],
        "G": [[1.0, -2.0]],
        "tau": 1.0
    }"#;

    #[test]
    fn full_document_round_trips() {
        let spec = parse_system(EXP_BASIS).unwrap();
        assert_eq!(spec.family.len(), 2);
        let y = response_full(&spec.params.to_full(), spec.g.as_ref().unwrap(), &spec.family, 1.0).unwrap();
        let doc = SystemDoc::from_params(&spec.params, &spec.family);
        let again = parse_system(&serde_json::to_string(&doc).unwrap()).unwrap();
        assert_eq!(again.params, spec.params);
        assert_eq!(again.family, spec.family);
        assert!(y[0].is_finite());
    }

    #[test]
    fn compact_document() {
        let text = r#"{"basis": [{"ell":0,"alpha":0.0,"beta":3.14159,"kind":"sin"}],
            "coeffs": [[0.2, -0.4]], "eigen_params": [0.1, 0.5], "jordan_tag": ["complex_pair"]}"#;
        let spec = parse_system(text).unwrap();
        assert!(matches!(spec.params, SystemParams::Compact(_)));
        let doc = SystemDoc::from_params(&spec.params, &spec.family);
        assert_eq!(doc.validate().unwrap().params, spec.params);
    }

    #[test]
    fn errors_carry_field_paths() {
        let bad_kind = EXP_BASIS.replace("\"cos\"}\n", "\"tan\"}\n");
        let e = parse_system(&bad_kind).unwrap_err();
        assert!(e.path.starts_with("basis"), "{e}");

        let bad_coeff = EXP_BASIS.replace("[-1.5]", "[\"x\"]");
        let e = parse_system(&bad_coeff).unwrap_err();
        assert_eq!(e.path, "coeffs[0][0][1][0]", "{e}");

        let unknown = EXP_BASIS.replace("\"tau\"", "\"horizon\"");
        assert_eq!(parse_system(&unknown).unwrap_err().path, "horizon");

        let e = parse_system(&EXP_BASIS.replace("0.8696029191140402", "0.5")).unwrap_err();
        assert!(e.message.contains("eigen_table"), "{e}");

        let e = parse_controls(r#"{"G": [[1.0], [1.0, 2.0]]}"#).unwrap_err();
        assert_eq!(e.path, "G");
        let e = parse_controls(r#"{"G": [[1.0]], "tau": -1}"#).unwrap_err();
        assert_eq!(e.path, "tau");
    }
}
