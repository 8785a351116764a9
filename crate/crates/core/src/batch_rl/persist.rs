//! Binary model files: an 8-byte magic, a little-endian format version, then
//! the bincode-encoded model including its feature schema.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::models::{ActionClassifier, QModel};
use super::BatchError;
use crate::dialog_core::FEATURE_SCHEMA_VERSION;

const FORMAT_VERSION: u32 = 1;
const Q_MAGIC: &[u8; 8] = b"GADM-QM\0";
const CLF_MAGIC: &[u8; 8] = b"GADM-AC\0";

fn encode<T: Serialize>(magic: &[u8; 8], model: &T) -> Result<Vec<u8>, BatchError> {
    let mut out = magic.to_vec();
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend(bincode::serialize(model).map_err(|e| BatchError::Serialization(e.to_string()))?);
    Ok(out)
}

fn decode<T: DeserializeOwned>(magic: &[u8; 8], bytes: &[u8]) -> Result<T, BatchError> {
    if bytes.len() < 12 || &bytes[..8] != magic {
        return Err(BatchError::Serialization(
            "not a model file of the expected kind".into(),
        ));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("four bytes"));
    if version != FORMAT_VERSION {
        return Err(BatchError::SchemaMismatch(format!(
            "file format {version}, supported {FORMAT_VERSION}"
        )));
    }
    bincode::deserialize(&bytes[12..]).map_err(|e| BatchError::Serialization(e.to_string()))
}

fn check_schema(version: u32, names: &[String], expected: &[String]) -> Result<(), BatchError> {
    if version != FEATURE_SCHEMA_VERSION {
        return Err(BatchError::SchemaMismatch(format!(
            "feature schema {version}, supported {FEATURE_SCHEMA_VERSION}"
        )));
    }
    if names != expected {
        return Err(BatchError::SchemaMismatch(format!(
            "model features {names:?} differ from {expected:?}"
        )));
    }
    Ok(())
}

impl QModel {
    pub fn to_bytes(&self) -> Result<Vec<u8>, BatchError> {
        encode(Q_MAGIC, self)
    }

    /// Decodes a model and refuses it unless its feature schema equals
    /// `expected_features`.
    pub fn from_bytes(bytes: &[u8], expected_features: &[String]) -> Result<Self, BatchError> {
        let model: QModel = decode(Q_MAGIC, bytes)?;
        check_schema(
            model.schema_version,
            &model.feature_names,
            expected_features,
        )?;
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), BatchError> {
        fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>, expected_features: &[String]) -> Result<Self, BatchError> {
        Self::from_bytes(&fs::read(path)?, expected_features)
    }
}

impl ActionClassifier {
    pub fn to_bytes(&self) -> Result<Vec<u8>, BatchError> {
        encode(CLF_MAGIC, self)
    }

    pub fn from_bytes(bytes: &[u8], expected_features: &[String]) -> Result<Self, BatchError> {
        let model: ActionClassifier = decode(CLF_MAGIC, bytes)?;
        check_schema(
            model.schema_version,
            &model.feature_names,
            expected_features,
        )?;
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), BatchError> {
        fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>, expected_features: &[String]) -> Result<Self, BatchError> {
        Self::from_bytes(&fs::read(path)?, expected_features)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::batch_rl::ForestConfig;

    fn model() -> (QModel, Vec<String>) {
        let f = vec!["x".to_string()];
        let a = vec!["A".to_string(), "B".to_string()];
        let s: &[f64] = &[0.5];
        let q = QModel::fit(
            &f,
            &a,
            &[s, s],
            &[0, 1],
            &[1.0, -1.0],
            &ForestConfig {
                n_trees: 3,
                ..Default::default()
            },
        )
        .unwrap();
        (q, f)
    }

    #[test]
    fn round_trip_and_schema_refusal() {
        let (q, f) = model();
        let bytes = q.to_bytes().unwrap();
        assert_eq!(QModel::from_bytes(&bytes, &f).unwrap(), q);
        assert!(matches!(
            QModel::from_bytes(&bytes, &["y".to_string()]),
            Err(BatchError::SchemaMismatch(_))
        ));
        assert!(matches!(
            ActionClassifier::from_bytes(&bytes, &f),
            Err(BatchError::Serialization(_))
        ));
        let mut newer = bytes.clone();
        newer[8] = 9;
        assert!(matches!(
            QModel::from_bytes(&newer, &f),
            Err(BatchError::SchemaMismatch(_))
        ));
        let mut old_schema = q.clone();
        old_schema.schema_version = 0;
        let b = old_schema.to_bytes().unwrap();
        assert!(matches!(
            QModel::from_bytes(&b, &f),
            Err(BatchError::SchemaMismatch(_))
        ));
    }
}
