//! Binary model checkpoints.
//!
//! Layout: the magic `G2GM`, a little-endian `u32` format version, a `u32` byte length
//! followed by UTF-8 JSON metadata, then every parameter tensor as little-endian `f64` in
//! the order hidden layers (weight, bias), mean head, variance head.

use std::fs;
use std::path::Path;

use gaussembed::encoder::{Dense, EncoderParameters};
use gaussembed::{Error, Result};
use serde::{Deserialize, Serialize};

pub const MAGIC: &[u8; 4] = b"G2GM";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub input_dim: usize,
    pub hidden_sizes: Vec<usize>,
    pub l_half: usize,
    pub k: usize,
    pub directed: bool,
    pub seed: u64,
    pub hidden_activation: String,
    pub mean_activation: String,
    pub variance_activation: String,
    #[serde(default)]
    pub one_hot: bool,
    #[serde(default)]
    pub hops_undirected: bool,
}

impl ModelMetadata {
    pub fn new(params: &EncoderParameters, k: usize, directed: bool, seed: u64) -> Self {
        Self {
            input_dim: params.input_dim(),
            hidden_sizes: params.hidden_sizes(),
            l_half: params.l_half(),
            k,
            directed,
            seed,
            hidden_activation: "relu".into(),
            mean_activation: "identity".into(),
            variance_activation: "elu_plus_one".into(),
            one_hot: false,
            hops_undirected: false,
        }
    }
}

pub fn encode(params: &EncoderParameters, meta: &ModelMetadata) -> Vec<u8> {
    let json = serde_json::to_vec(meta).expect("metadata serializes");
    let mut out = Vec::with_capacity(12 + json.len() + 8 * params.num_params());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    for t in params.tensors() {
        for v in t {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(Error::Integrity(format!(
                "checkpoint truncated while reading {what}"
            ))),
        }
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes(b.try_into().expect("4 bytes")))
    }

    fn f64s(&mut self, n: usize, what: &str) -> Result<Vec<f64>> {
        let b = self.take(n.checked_mul(8).ok_or_else(|| overflow(what))?, what)?;
        Ok(b.chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }
}

fn overflow(what: &str) -> Error {
    Error::Integrity(format!("implausible size for {what}"))
}

pub fn decode(bytes: &[u8]) -> Result<(EncoderParameters, ModelMetadata)> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4, "magic")? != MAGIC {
        return Err(Error::Integrity(
            "not a model checkpoint (bad magic)".into(),
        ));
    }
    let version = r.u32("version")?;
    if version != FORMAT_VERSION {
        return Err(Error::Integrity(format!(
            "unsupported checkpoint version {version} (expected {FORMAT_VERSION})"
        )));
    }
    let len = r.u32("metadata length")? as usize;
    let meta: ModelMetadata = serde_json::from_slice(r.take(len, "metadata")?)
        .map_err(|e| Error::Integrity(format!("bad checkpoint metadata: {e}")))?;
    if meta.input_dim == 0 || meta.l_half == 0 || meta.hidden_sizes.contains(&0) {
        return Err(Error::Integrity(
            "checkpoint declares an empty layer".into(),
        ));
    }

    let mut layer = |fan_in: usize, fan_out: usize, name: &str| -> Result<Dense> {
        let size = fan_in.checked_mul(fan_out).ok_or_else(|| overflow(name))?;
        let weight = r.f64s(size, name)?;
        let bias = r.f64s(fan_out, name)?;
        Dense::from_vecs(fan_in, fan_out, weight, bias)
    };
    let mut fan_in = meta.input_dim;
    let mut hidden = Vec::new();
    for (i, &s) in meta.hidden_sizes.iter().enumerate() {
        hidden.push(layer(fan_in, s, &format!("hidden layer {i}"))?);
        fan_in = s;
    }
    let mu_head = layer(fan_in, meta.l_half, "mean head")?;
    let var_head = layer(fan_in, meta.l_half, "variance head")?;
    if r.pos != bytes.len() {
        return Err(Error::Integrity(format!(
            "{} trailing bytes after the last tensor",
            bytes.len() - r.pos
        )));
    }
    Ok((
        EncoderParameters {
            hidden,
            mu_head,
            var_head,
        },
        meta,
    ))
}

pub fn save_model(path: &Path, params: &EncoderParameters, meta: &ModelMetadata) -> Result<()> {
    fs::write(path, encode(params, meta)).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

pub fn load_model(path: &Path) -> Result<(EncoderParameters, ModelMetadata)> {
    let bytes = fs::read(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    decode(&bytes)
}
