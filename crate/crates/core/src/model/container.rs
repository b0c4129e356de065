//! Binary tensor container: the native serialization for checkpoints and
//! pretrained-weight files.
//!
//! Layout: `b"PCWC1\n"` magic, little-endian u32 header length, JSON header
//! (dtype, container kind, model spec, tensor directory, free-form metadata),
//! then the raw little-endian tensor data concatenated in directory order.

use super::BackboneSpec;
use crate::error::{Error, Result};
use crate::nn::Graph;
use crate::Scalar;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

pub const MAGIC: &[u8; 6] = b"PCWC1\n";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub shape: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContainerHeader {
    pub dtype: String,
    /// "checkpoint" for full models, "weights" for backbone-only files.
    pub kind: String,
    pub spec: Option<BackboneSpec>,
    pub feature_layer: Option<String>,
    #[serde(default)]
    pub meta: BTreeMap<String, String>,
    pub tensors: Vec<TensorEntry>,
}

pub struct Container<F: Scalar> {
    pub header: ContainerHeader,
    pub tensors: BTreeMap<String, Vec<F>>,
}

fn checkpoint_err(path: &Path, msg: impl Into<String>) -> Error {
    Error::Checkpoint {
        path: path.to_path_buf(),
        msg: msg.into(),
    }
}

/// Serialize every parameter of `graph` into a container file.
pub fn write_graph<F: Scalar>(
    graph: &Graph<F>,
    kind: &str,
    spec: Option<&BackboneSpec>,
    feature_layer: Option<&str>,
    meta: BTreeMap<String, String>,
    path: &Path,
) -> Result<()> {
    let mut entries = Vec::new();
    let mut blob: Vec<u8> = Vec::new();
    graph.visit_params(&mut |name, data, shape| {
        entries.push(TensorEntry {
            name: name.to_string(),
            shape,
        });
        for &v in data {
            v.write_le(&mut blob);
        }
    });

    let header = ContainerHeader {
        dtype: F::DTYPE.to_string(),
        kind: kind.to_string(),
        spec: spec.cloned(),
        feature_layer: feature_layer.map(|s| s.to_string()),
        meta,
        tensors: entries,
    };
    let header_json = serde_json::to_vec(&header)
        .map_err(|e| checkpoint_err(path, format!("header serialization failed: {e}")))?;

    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(MAGIC).map_err(|e| Error::io(path, e))?;
    file.write_all(&(header_json.len() as u32).to_le_bytes())
        .map_err(|e| Error::io(path, e))?;
    file.write_all(&header_json).map_err(|e| Error::io(path, e))?;
    file.write_all(&blob).map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Read a container back. Fails with a checkpoint error naming the path on
/// any structural problem (missing file, bad magic, dtype mismatch,
/// truncated data).
pub fn read<F: Scalar>(path: &Path) -> Result<Container<F>> {
    let mut file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut bytes = Vec::new();
    file.read_to_end(&mut bytes).map_err(|e| Error::io(path, e))?;

    if bytes.len() < MAGIC.len() + 4 || &bytes[..MAGIC.len()] != MAGIC {
        return Err(checkpoint_err(path, "not a model container (bad magic)"));
    }
    let header_len =
        u32::from_le_bytes(bytes[MAGIC.len()..MAGIC.len() + 4].try_into().expect("4 bytes"))
            as usize;
    let header_start = MAGIC.len() + 4;
    let data_start = header_start + header_len;
    if bytes.len() < data_start {
        return Err(checkpoint_err(path, "truncated header"));
    }
    let header: ContainerHeader = serde_json::from_slice(&bytes[header_start..data_start])
        .map_err(|e| checkpoint_err(path, format!("corrupt header: {e}")))?;
    if header.dtype != F::DTYPE {
        return Err(checkpoint_err(
            path,
            format!("dtype {} does not match requested {}", header.dtype, F::DTYPE),
        ));
    }

    let mut tensors = BTreeMap::new();
    let mut offset = data_start;
    for entry in &header.tensors {
        let len: usize = entry.shape.iter().product();
        let nbytes = len * F::BYTES;
        if bytes.len() < offset + nbytes {
            return Err(checkpoint_err(
                path,
                format!("truncated tensor data for {}", entry.name),
            ));
        }
        let data: Vec<F> = (0..len)
            .map(|i| F::read_le(&bytes[offset + i * F::BYTES..]))
            .collect();
        tensors.insert(entry.name.clone(), data);
        offset += nbytes;
    }
    Ok(Container { header, tensors })
}

/// Copy tensors from a container into a freshly built graph. Every visited
/// parameter accepted by `filter` must be present with the right length.
pub fn load_into_graph<F: Scalar>(
    graph: &mut Graph<F>,
    container: &Container<F>,
    filter: &dyn Fn(&str) -> bool,
    path: &Path,
) -> Result<()> {
    let mut missing: Vec<String> = Vec::new();
    let mut mismatched: Vec<String> = Vec::new();
    graph.visit_params_mut(&mut |name, data| {
        if !filter(name) {
            return;
        }
        match container.tensors.get(name) {
            Some(source) if source.len() == data.len() => {
                data.copy_from_slice(source);
            }
            Some(_) => mismatched.push(name.to_string()),
            None => missing.push(name.to_string()),
        }
    });
    if !missing.is_empty() || !mismatched.is_empty() {
        return Err(checkpoint_err(
            path,
            format!(
                "incompatible tensor set: {} missing ({}), {} mismatched ({})",
                missing.len(),
                missing.iter().take(3).cloned().collect::<Vec<_>>().join(", "),
                mismatched.len(),
                mismatched.iter().take(3).cloned().collect::<Vec<_>>().join(", "),
            ),
        ));
    }
    Ok(())
}
