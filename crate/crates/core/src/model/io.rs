//! Little-endian parameter file:
//!
//! ```text
//! magic      8 bytes  "VFNETPRM"
//! version    u32
//! k          u32, then k filter heights as u32
//! channels   u32
//! freq_bins  u32
//! width      u32
//! regions    u32
//! hidden     u32
//! classes    u32
//! tensors    f64 values, in VFNetParams::tensors() order
//! ```

use std::fs;
use std::path::Path;

use super::{VFNetConfig, VFNetParams};
use crate::error::{Error, Result};

pub const PARAMS_MAGIC: &[u8; 8] = b"VFNETPRM";
pub const PARAMS_VERSION: u32 = 1;

pub fn encode_params(params: &VFNetParams) -> Vec<u8> {
    let cfg = params.config();
    let mut out = Vec::with_capacity(64 + 8 * params.num_values());
    out.extend_from_slice(PARAMS_MAGIC);
    out.extend_from_slice(&PARAMS_VERSION.to_le_bytes());
    let mut put = |v: usize| out.extend_from_slice(&(v as u32).to_le_bytes());
    put(cfg.filter_heights.len());
    cfg.filter_heights.iter().for_each(|&h| put(h));
    put(cfg.channels_per_height);
    put(cfg.freq_bins);
    put(cfg.segment_width);
    put(cfg.pool_regions);
    put(cfg.hidden_units);
    put(cfg.num_classes);
    for t in params.tensors() {
        for v in t.data() {
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
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| {
            Error::FormatVersionMismatch(format!("file truncated at byte {}", self.bytes.len()))
        })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn dim(&mut self) -> Result<usize> {
        self.u32().map(|v| v as usize)
    }
}

pub fn decode_params(bytes: &[u8]) -> Result<VFNetParams> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8)? != PARAMS_MAGIC {
        return Err(Error::FormatVersionMismatch("not a parameter file (bad magic)".into()));
    }
    let version = r.u32()?;
    if version != PARAMS_VERSION {
        return Err(Error::FormatVersionMismatch(format!(
            "parameter file version {version}, expected {PARAMS_VERSION}"
        )));
    }
    let k = r.dim()?;
    if k > 4096 {
        return Err(Error::FormatVersionMismatch(format!("implausible filter count {k}")));
    }
    let filter_heights = (0..k).map(|_| r.dim()).collect::<Result<Vec<_>>>()?;
    let config = VFNetConfig {
        filter_heights,
        channels_per_height: r.dim()?,
        freq_bins: r.dim()?,
        segment_width: r.dim()?,
        pool_regions: r.dim()?,
        hidden_units: r.dim()?,
        num_classes: r.dim()?,
    };
    config
        .validate()
        .map_err(|e| Error::FormatVersionMismatch(format!("stored config invalid: {e}")))?;
    let remaining = bytes.len() - r.pos;
    let mut params = VFNetParams::zeros(&config)?;
    let needed = 8 * params.num_values();
    if remaining != needed {
        return Err(Error::FormatVersionMismatch(format!(
            "expected {needed} bytes of weights, found {remaining}"
        )));
    }
    for t in params.tensors_mut() {
        for v in t.data_mut() {
            *v = f64::from_le_bytes(r.take(8)?.try_into().unwrap());
        }
    }
    Ok(params)
}

pub fn save_params(params: &VFNetParams, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_params(params)).map_err(|e| Error::from(e).at_path(path))
}

pub fn load_params(path: impl AsRef<Path>) -> Result<VFNetParams> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::from(e).at_path(path))?;
    decode_params(&bytes).map_err(|e| e.at_path(path))
}

/// Loads and checks that the stored architecture equals `expected`.
pub fn load_params_for(path: impl AsRef<Path>, expected: &VFNetConfig) -> Result<VFNetParams> {
    let path = path.as_ref();
    let params = load_params(path)?;
    if params.config() != expected {
        return Err(Error::ConfigMismatch(format!(
            "file holds {:?}, run expects {:?}",
            params.config(),
            expected
        ))
        .at_path(path));
    }
    Ok(params)
}
