use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use crate::error::{Error, Result};
use crate::model::{InitialConditions, KeyedMap, ParamValue, ParameterSet};

pub const FIXTURE_NAME: &str = "austria2010q1_synthetic";
pub const FIXTURE_JSON: &str = include_str!("../../fixtures/austria2010q1_synthetic.json");

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_year: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_quarter: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<u32>,
}

/// A parameter set, initial conditions and optional metadata.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConfigDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
    pub parameters: ParameterSet,
    pub initial_conditions: InitialConditions,
}

fn parse_value(v: &Json) -> Option<ParamValue> {
    fn reals(a: &[Json]) -> Option<Vec<f64>> {
        a.iter().map(Json::as_f64).collect()
    }
    match v {
        Json::Number(n) => n.as_f64().map(ParamValue::Scalar),
        Json::Array(a) if a.iter().all(Json::is_array) && !a.is_empty() => a
            .iter()
            .map(|row| reals(row.as_array().expect("checked")))
            .collect::<Option<Vec<_>>>()
            .map(ParamValue::Matrix),
        Json::Array(a) => reals(a).map(ParamValue::Array),
        _ => None,
    }
}

fn section(root: &Json, name: &str, problems: &mut Vec<String>) -> KeyedMap {
    let mut map = KeyedMap::default();
    match root.get(name) {
        None => problems.push(format!("{name}: missing section")),
        Some(Json::Object(obj)) => {
            for (k, v) in obj {
                match parse_value(v) {
                    Some(pv) => map.insert(k.clone(), pv),
                    None => problems.push(format!(
                        "{name}.{k}: expected a number, an array or a matrix of numbers"
                    )),
                }
            }
        }
        Some(_) => problems.push(format!("{name}: expected an object")),
    }
    map
}

fn schema_problems(r: Result<()>, problems: &mut Vec<String>) -> Result<()> {
    match r {
        Ok(()) => Ok(()),
        Err(Error::Schema(p)) => {
            problems.extend(p);
            Ok(())
        }
        Err(e) => Err(e),
    }
}

/// Parses and validates a config document.
///
/// Syntax errors carry line and column. Every schema problem in both
/// sections is reported in one [`Error::Schema`], keyed as
/// `parameters.<key>` or `initial_conditions.<key>`.
pub fn load_document(text: &str) -> Result<ConfigDocument> {
    let root: Json = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut problems = Vec::new();
    if !root.is_object() {
        return Err(Error::Schema(vec![
            "document: expected an object with `parameters` and `initial_conditions`".into(),
        ]));
    }
    let meta = match root.get("meta") {
        None => None,
        Some(m) => match serde_json::from_value::<Meta>(m.clone()) {
            Ok(m) => Some(m),
            Err(e) => {
                problems.push(format!("meta: {e}"));
                None
            }
        },
    };
    let params = ParameterSet(section(&root, "parameters", &mut problems));
    let ic = InitialConditions(section(&root, "initial_conditions", &mut problems));
    schema_problems(params.validate(), &mut problems)?;
    schema_problems(ic.validate(params.sectors()), &mut problems)?;
    if !problems.is_empty() {
        return Err(Error::Schema(problems));
    }
    Ok(ConfigDocument {
        meta,
        parameters: params,
        initial_conditions: ic,
    })
}

pub fn load_config(text: &str) -> Result<(ParameterSet, InitialConditions)> {
    let doc = load_document(text)?;
    Ok((doc.parameters, doc.initial_conditions))
}

pub fn load_config_file(path: impl AsRef<Path>) -> Result<ConfigDocument> {
    load_document(&std::fs::read_to_string(path)?)
}

/// Pretty-printed JSON; numbers keep full double precision.
pub fn serialize_config(doc: &ConfigDocument) -> Result<String> {
    Ok(serde_json::to_string_pretty(doc)?)
}

/// The bundled synthetic calibration.
pub fn fixture() -> ConfigDocument {
    load_document(FIXTURE_JSON).expect("bundled fixture is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_round_trips() {
        let doc = fixture();
        let text = serialize_config(&doc).unwrap();
        assert_eq!(load_document(&text).unwrap(), doc);
    }

    #[test]
    fn missing_keys_are_all_reported() {
        let mut doc = fixture();
        doc.parameters.0.remove("tau_INC");
        doc.initial_conditions.0.remove("gov_debt");
        let text = serialize_config(&doc).unwrap();
        let Err(Error::Schema(p)) = load_document(&text) else {
            panic!("expected schema error")
        };
        assert!(p.iter().any(|s| s.starts_with("parameters.tau_INC")));
        assert!(p.iter().any(|s| s.starts_with("initial_conditions.gov_debt")));
    }

    #[test]
    fn syntax_errors_have_positions() {
        let err = load_document("{\n  \"parameters\": {,\n}").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn strings_are_schema_errors() {
        let err = load_document(r#"{"parameters": {"psi": "high"}, "initial_conditions": {}}"#)
            .unwrap_err();
        let Error::Schema(p) = err else { panic!() };
        assert!(p.iter().any(|s| s.starts_with("parameters.psi: expected")));
        assert!(p.iter().any(|s| s.starts_with("initial_conditions.N_firms")));
    }
}
