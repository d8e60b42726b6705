//! Model files: 8-byte magic `SSRNETv1`, a little-endian `u32` header length,
//! a JSON header describing the architecture, output grid, precision and
//! tensor shapes, then every tensor as raw little-endian floats in header order.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{ArchitectureSpec, LayerParams, NetworkParams, Real};
use crate::spectral::WavelengthGrid;

pub const MODEL_MAGIC: &[u8; 8] = b"SSRNETv1";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct ModelHeader {
    version: u32,
    dtype: String,
    spec: ArchitectureSpec,
    wavelengths_nm: Vec<f64>,
    tensors: Vec<TensorEntry>,
}

#[derive(Debug, PartialEq, Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    shape: Vec<usize>,
}

fn tensor_entries(spec: &ArchitectureSpec) -> Result<Vec<TensorEntry>> {
    let mut out = Vec::new();
    for (n, g) in spec.layers()?.iter().enumerate() {
        out.push(TensorEntry {
            name: format!("layer{n}.weight"),
            shape: vec![g.out_features, g.in_features, g.kernel_len],
        });
        out.push(TensorEntry {
            name: format!("layer{n}.bias"),
            shape: vec![g.out_features],
        });
    }
    Ok(out)
}

pub fn encode_model<T: Real>(params: &NetworkParams<T>) -> Result<Vec<u8>> {
    let header = ModelHeader {
        version: FORMAT_VERSION,
        dtype: T::DTYPE.into(),
        spec: params.spec().clone(),
        wavelengths_nm: params.grid().as_slice().to_vec(),
        tensors: tensor_entries(params.spec())?,
    };
    let json = serde_json::to_vec(&header).map_err(|e| Error::ModelFormat(e.to_string()))?;
    let mut out = Vec::with_capacity(12 + json.len() + params.param_count() * T::BYTES);
    out.extend_from_slice(MODEL_MAGIC);
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    for v in params.iter() {
        v.extend_le(&mut out);
    }
    Ok(out)
}

fn parse_header(bytes: &[u8]) -> Result<(ModelHeader, usize)> {
    let fail = |m: &str| Error::ModelFormat(m.to_string());
    if bytes.len() < 12 {
        return Err(fail("file truncated before header"));
    }
    if &bytes[..8] != MODEL_MAGIC {
        return Err(fail("bad magic"));
    }
    let len = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let json = bytes
        .get(12..12 + len)
        .ok_or_else(|| fail("file truncated inside header"))?;
    let header: ModelHeader =
        serde_json::from_slice(json).map_err(|e| Error::ModelFormat(format!("header: {e}")))?;
    Ok((header, 12 + len))
}

/// Precision tag stored in a model file (`"f32le"` or `"f64le"`).
pub fn model_dtype(bytes: &[u8]) -> Result<String> {
    Ok(parse_header(bytes)?.0.dtype)
}

pub fn decode_model<T: Real>(bytes: &[u8]) -> Result<NetworkParams<T>> {
    let (header, data_start) = parse_header(bytes)?;
    if header.version != FORMAT_VERSION {
        return Err(Error::ModelFormat(format!("unsupported version {}", header.version)));
    }
    if header.dtype != T::DTYPE {
        return Err(Error::ModelFormat(format!(
            "model precision is {}, requested {}",
            header.dtype,
            T::DTYPE
        )));
    }
    let geoms = header
        .spec
        .layers()
        .map_err(|e| Error::ModelFormat(e.to_string()))?;
    let expected = tensor_entries(&header.spec)?;
    if header.tensors != expected {
        return Err(Error::ModelFormat(
            "shape mismatch: tensor table disagrees with the architecture".into(),
        ));
    }
    let blob = &bytes[data_start..];
    let want: usize = geoms
        .iter()
        .map(|g| (g.weight_count() + g.out_features) * T::BYTES)
        .sum();
    if blob.len() != want {
        return Err(Error::ModelFormat(format!(
            "shape mismatch: architecture needs {want} tensor bytes, file has {}",
            blob.len()
        )));
    }
    let mut values = blob.chunks_exact(T::BYTES).map(T::read_le);
    let layers = geoms
        .iter()
        .map(|g| LayerParams {
            weights: values.by_ref().take(g.weight_count()).collect(),
            biases: values.by_ref().take(g.out_features).collect(),
        })
        .collect();
    let grid = WavelengthGrid::new(header.wavelengths_nm)
        .map_err(|e| Error::ModelFormat(format!("grid: {e}")))?;
    NetworkParams::from_layers(header.spec, grid, layers)
        .map_err(|e| Error::ModelFormat(e.to_string()))
}

pub fn save_model<T: Real>(params: &NetworkParams<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_model(params)?).map_err(|e| Error::io(path, e))
}

pub fn load_model<T: Real>(path: impl AsRef<Path>) -> Result<NetworkParams<T>> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_model(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ssr");
        let p = NetworkParams::<f32>::init(ArchitectureSpec::default(), 8).unwrap();
        save_model(&p, &path).unwrap();
        let back: NetworkParams<f32> = load_model(&path).unwrap();
        assert_eq!(back, p);
        assert!(back.iter().zip(p.iter()).all(|(a, b)| a.to_bits() == b.to_bits()));
        let p64 = NetworkParams::<f64>::init(ArchitectureSpec::with_width(4), 8).unwrap();
        assert_eq!(decode_model::<f64>(&encode_model(&p64).unwrap()).unwrap(), p64);
    }

    #[test]
    fn truncated_file() {
        let bytes = encode_model(&NetworkParams::<f32>::init(ArchitectureSpec::default(), 1).unwrap()).unwrap();
        for cut in [4, 20, bytes.len() - 1] {
            assert!(matches!(decode_model::<f32>(&bytes[..cut]), Err(Error::ModelFormat(_))));
        }
    }

    #[test]
    fn precision_mismatch() {
        let bytes = encode_model(&NetworkParams::<f32>::zeros(ArchitectureSpec::default()).unwrap()).unwrap();
        assert!(decode_model::<f64>(&bytes).is_err());
    }

    #[test]
    fn blob_sized_for_other_band_count() {
        // header declares the 24-band architecture; blob comes from a 27-band model
        let spec24 = ArchitectureSpec::default();
        let mut spec27 = spec24.clone();
        spec27.input_bands = 27;
        spec27.output_bands = 27;
        spec27.upscale_layers.clear();
        spec27.fuse_conv.in_features = 1;
        let p24 = NetworkParams::<f32>::zeros(spec24).unwrap();
        let p27 = NetworkParams::<f32>::zeros(spec27).unwrap();
        let good = encode_model(&p24).unwrap();
        let other = encode_model(&p27).unwrap();
        let hlen = 12 + u32::from_le_bytes(good[8..12].try_into().unwrap()) as usize;
        let olen = 12 + u32::from_le_bytes(other[8..12].try_into().unwrap()) as usize;
        let mut frankenstein = good[..hlen].to_vec();
        frankenstein.extend_from_slice(&other[olen..]);
        let err = decode_model::<f32>(&frankenstein).unwrap_err();
        assert!(err.to_string().contains("shape mismatch"), "{err}");
    }

    #[test]
    fn bad_magic() {
        let mut bytes = encode_model(&NetworkParams::<f32>::zeros(ArchitectureSpec::default()).unwrap()).unwrap();
        bytes[0] = b'x';
        assert!(decode_model::<f32>(&bytes).unwrap_err().to_string().contains("bad magic"));
    }
}
