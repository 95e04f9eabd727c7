//! Raw array files: a 16-byte header (magic u16, dtype u16, H u32, W u32,
//! C u32, all little-endian) followed by H*W*C float32 payload in row-major
//! (H, W, C) order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array3;

use crate::error::{CoreError, Result};

const MAGIC: u16 = 0x4D56;
const DTYPE_F32: u16 = 0;

/// An (H, W, C) float array as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct RawArray {
    pub data: Array3<f64>,
}

impl RawArray {
    pub fn new(data: Array3<f64>) -> Self {
        Self { data }
    }
}

pub fn write_raw(path: &Path, arr: &RawArray) -> Result<()> {
    let (h, w, c) = arr.data.dim();
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(&MAGIC.to_le_bytes())?;
    out.write_all(&DTYPE_F32.to_le_bytes())?;
    out.write_all(&(h as u32).to_le_bytes())?;
    out.write_all(&(w as u32).to_le_bytes())?;
    out.write_all(&(c as u32).to_le_bytes())?;
    for v in arr.data.iter() {
        out.write_all(&(*v as f32).to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_raw(path: &Path) -> Result<RawArray> {
    let mut input = BufReader::new(File::open(path)?);
    let mut header = [0u8; 16];
    input.read_exact(&mut header)?;
    let magic = u16::from_le_bytes([header[0], header[1]]);
    let dtype = u16::from_le_bytes([header[2], header[3]]);
    if magic != MAGIC {
        return Err(CoreError::Shape(format!("bad raw magic {magic:#06x}")));
    }
    if dtype != DTYPE_F32 {
        return Err(CoreError::Shape(format!("unsupported raw dtype {dtype}")));
    }
    let h = u32::from_le_bytes([header[4], header[5], header[6], header[7]]) as usize;
    let w = u32::from_le_bytes([header[8], header[9], header[10], header[11]]) as usize;
    let c = u32::from_le_bytes([header[12], header[13], header[14], header[15]]) as usize;
    let mut payload = vec![0u8; h * w * c * 4];
    input.read_exact(&mut payload)?;
    let values: Vec<f64> = payload
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
        .collect();
    let data = Array3::from_shape_vec((h, w, c), values)
        .map_err(|e| CoreError::Shape(format!("raw payload: {e}")))?;
    Ok(RawArray { data })
}
