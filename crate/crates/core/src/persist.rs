//! Model files and JSON output helpers.
//!
//! A model file is a JSON object `{"schema": "<kind>/<version>", "version":
//! <version>, "attribute": …, "model": {…}}`. Floats are written in shortest round-trip form, so a
//! saved model reloads bit-for-bit.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use crate::axis::AxisModel;
use crate::bayes::NaiveBayes;
use crate::error::{Error, Result};
use crate::labeling::Attribute;

pub const NB_SCHEMA: &str = "nb/1";
pub const AXIS_SCHEMA: &str = "axis/1";
pub const MODEL_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    NaiveBayes(NaiveBayes),
    Axis(AxisModel),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub attribute: Option<Attribute>,
    pub model: Model,
}

impl ModelFile {
    pub fn schema(&self) -> &'static str {
        match self.model {
            Model::NaiveBayes(_) => NB_SCHEMA,
            Model::Axis(_) => AXIS_SCHEMA,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let body = match &self.model {
            Model::NaiveBayes(m) => serde_json::to_value(m),
            Model::Axis(m) => serde_json::to_value(m),
        }
        .map_err(|e| Error::ModelFormat(e.to_string()))?;
        let v = json!({ "schema": self.schema(), "version": MODEL_VERSION, "attribute": self.attribute, "model": body });
        to_pretty_json(&v)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let bad = |e: serde_json::Error| Error::ModelFormat(e.to_string());
        let mut v: Value = serde_json::from_str(text).map_err(bad)?;
        let schema = v
            .get("schema")
            .and_then(Value::as_str)
            .unwrap_or_default()
            .to_string();
        match v.get("version") {
            None => {}
            Some(ver) if ver.as_u64() == Some(MODEL_VERSION) => {}
            Some(ver) => {
                return Err(Error::ModelFormat(format!(
                    "unsupported model version {ver} (this build reads {MODEL_VERSION})"
                )))
            }
        }
        let attribute: Option<Attribute> =
            serde_json::from_value(v.get("attribute").cloned().unwrap_or(Value::Null))
                .map_err(bad)?;
        let body = v
            .get_mut("model")
            .map(Value::take)
            .ok_or_else(|| Error::ModelFormat("missing `model`".into()))?;
        let model = match schema.as_str() {
            NB_SCHEMA => {
                let m: NaiveBayes = serde_json::from_value(body).map_err(bad)?;
                m.check().map_err(|e| Error::ModelFormat(e.to_string()))?;
                Model::NaiveBayes(m)
            }
            AXIS_SCHEMA => {
                let m: AxisModel = serde_json::from_value(body).map_err(bad)?;
                if m.z.len() != m.communities.len() {
                    return Err(Error::ModelFormat(
                        "axis model has mismatched z-scores".into(),
                    ));
                }
                Model::Axis(m)
            }
            "" => return Err(Error::ModelFormat("missing `schema`".into())),
            other => {
                return Err(Error::ModelFormat(format!(
                    "unsupported schema `{other}` (this build reads {NB_SCHEMA} and {AXIS_SCHEMA})"
                )))
            }
        };
        Ok(Self { attribute, model })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_pretty_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::data(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize + ?Sized>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_pretty_json(value)?).map_err(|e| Error::io(path, e))
}
