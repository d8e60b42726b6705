//! `.mcube` container codec.
//!
//! Layout: 8-byte magic `MCUBE\0v1`, a little-endian `u32` header length,
//! that many bytes of UTF-8 JSON header, then `width * height * bands`
//! little-endian `f32` values in BIP order.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"MCUBE\x00v1";

const MAX_HEADER_LEN: u32 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainerHeader {
    pub width: usize,
    pub height: usize,
    pub bands: usize,
    pub wavelengths_nm: Vec<f64>,
    pub dtype: String,
    pub layout: String,
}

impl ContainerHeader {
    pub fn new(width: usize, height: usize, wavelengths_nm: Vec<f64>) -> Self {
        Self {
            width,
            height,
            bands: wavelengths_nm.len(),
            wavelengths_nm,
            dtype: "f32le".into(),
            layout: "bip".into(),
        }
    }

    fn value_count(&self) -> Result<usize> {
        self.width
            .checked_mul(self.height)
            .and_then(|n| n.checked_mul(self.bands))
            .ok_or_else(|| Error::format("header dimensions overflow"))
    }

    fn validate(&self) -> Result<()> {
        if self.dtype != "f32le" {
            return Err(Error::format(format!("unsupported dtype {:?}", self.dtype)));
        }
        if self.layout != "bip" {
            return Err(Error::format(format!("unsupported layout {:?}", self.layout)));
        }
        if self.bands == 0 || self.wavelengths_nm.len() != self.bands {
            return Err(Error::format(format!(
                "header declares {} bands but lists {} wavelengths",
                self.bands,
                self.wavelengths_nm.len()
            )));
        }
        Ok(())
    }
}

pub fn encode_container<W: Write>(
    mut out: W,
    header: &ContainerHeader,
    data: &[f32],
) -> Result<()> {
    header.validate()?;
    if data.len() != header.value_count()? {
        return Err(Error::format(format!(
            "payload has {} values, header requires {}",
            data.len(),
            header.value_count()?
        )));
    }
    let json = serde_json::to_vec(header).map_err(|e| Error::format(e.to_string()))?;
    out.write_all(MAGIC)?;
    out.write_all(&(json.len() as u32).to_le_bytes())?;
    out.write_all(&json)?;
    let mut payload = Vec::with_capacity(data.len() * 4);
    for v in data {
        payload.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&payload)?;
    Ok(())
}

pub fn decode_container<R: Read>(mut input: R) -> Result<(ContainerHeader, Vec<f32>)> {
    let mut magic = [0u8; 8];
    input
        .read_exact(&mut magic)
        .map_err(|_| Error::format("file too short for magic"))?;
    if &magic != MAGIC {
        return Err(Error::format("bad magic"));
    }
    let mut len = [0u8; 4];
    input
        .read_exact(&mut len)
        .map_err(|_| Error::format("truncated header length"))?;
    let len = u32::from_le_bytes(len);
    if len > MAX_HEADER_LEN {
        return Err(Error::format(format!("header length {len} is implausible")));
    }
    let mut json = vec![0u8; len as usize];
    input
        .read_exact(&mut json)
        .map_err(|_| Error::format("truncated header"))?;
    let header: ContainerHeader =
        serde_json::from_slice(&json).map_err(|e| Error::format(format!("header: {e}")))?;
    header.validate()?;

    let mut payload = Vec::new();
    input.read_to_end(&mut payload)?;
    let expected = header.value_count()?;
    if payload.len() != expected * 4 {
        return Err(Error::format(format!(
            "size mismatch: header requires {} payload bytes, found {}",
            expected * 4,
            payload.len()
        )));
    }
    let data: Vec<f32> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::format("payload contains non-finite values"));
    }
    Ok((header, data))
}

pub(crate) fn write_file(path: &Path, header: &ContainerHeader, data: &[f32]) -> Result<()> {
    let mut buf = Vec::new();
    encode_container(&mut buf, header, data)?;
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_file(path: &Path) -> Result<(ContainerHeader, Vec<f32>)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_container(bytes.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{SpectralCube, WavelengthGrid};
    use proptest::prelude::*;

    fn sample_cube() -> SpectralCube {
        let grid = WavelengthGrid::default();
        let data = (0..2 * 3 * 24).map(|k| (k as f32 * 0.37).fract()).collect();
        SpectralCube::new(3, 2, grid, data).unwrap()
    }

    fn encoded(cube: &SpectralCube) -> Vec<u8> {
        let mut buf = Vec::new();
        encode_container(
            &mut buf,
            &ContainerHeader::new(cube.width(), cube.height(), cube.grid().as_slice().to_vec()),
            cube.data(),
        )
        .unwrap();
        buf
    }

    #[test]
    fn round_trip_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.mcube");
        let cube = sample_cube();
        cube.save(&path).unwrap();
        let back = SpectralCube::load(&path).unwrap();
        assert_eq!(back, cube);
        let bits = |c: &SpectralCube| c.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back), bits(&cube));
    }

    #[test]
    fn bad_magic() {
        let mut buf = encoded(&sample_cube());
        buf[0] = b'X';
        let err = decode_container(buf.as_slice()).unwrap_err();
        assert!(err.to_string().contains("bad magic"), "{err}");
    }

    #[test]
    fn payload_sized_for_fewer_bands() {
        let cube = sample_cube();
        let mut buf = encoded(&cube);
        // drop one band's worth of values for every pixel: 23 bands of payload
        buf.truncate(buf.len() - cube.pixels() * 4);
        let err = decode_container(buf.as_slice()).unwrap_err();
        assert!(err.to_string().contains("size mismatch"), "{err}");
    }

    #[test]
    fn trailing_bytes_rejected() {
        let mut buf = encoded(&sample_cube());
        buf.extend_from_slice(&[0, 0, 0, 0]);
        assert!(decode_container(buf.as_slice()).is_err());
    }

    #[test]
    fn non_finite_rejected() {
        let mut buf = encoded(&sample_cube());
        let n = buf.len();
        buf[n - 4..].copy_from_slice(&f32::NAN.to_le_bytes());
        let err = decode_container(buf.as_slice()).unwrap_err();
        assert!(err.to_string().contains("non-finite"), "{err}");
    }

    #[test]
    fn header_is_json_after_magic() {
        let buf = encoded(&sample_cube());
        assert_eq!(&buf[..8], MAGIC);
        let len = u32::from_le_bytes(buf[8..12].try_into().unwrap()) as usize;
        let v: serde_json::Value = serde_json::from_slice(&buf[12..12 + len]).unwrap();
        assert_eq!(v["bands"], 24);
        assert_eq!(v["dtype"], "f32le");
        assert_eq!(v["layout"], "bip");
        assert_eq!(v["wavelengths_nm"][0], 460.0);
    }

    proptest! {
        #[test]
        fn round_trip_bitwise(w in 1usize..5, h in 1usize..5, b in 2usize..6, seed in any::<u64>()) {
            let mut state = seed;
            let data: Vec<f32> = (0..w * h * b).map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 40) as f32 / (1u64 << 24) as f32
            }).collect();
            let grid = WavelengthGrid::uniform(400.0, 7.5, b).unwrap();
            let cube = SpectralCube::new(w, h, grid, data).unwrap();
            let buf = encoded(&cube);
            let (header, back) = decode_container(buf.as_slice()).unwrap();
            let back = SpectralCube::from_container(header, back).unwrap();
            prop_assert_eq!(back, cube);
        }
    }
}
