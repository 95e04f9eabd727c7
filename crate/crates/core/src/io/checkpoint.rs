//! Checkpoint file: config JSON plus named parameter arrays.
//!
//! Layout (all integers little-endian):
//! magic `MVCK`, version u32, config byte length u32, config JSON bytes,
//! entry count u32, then per entry: name length u32, name bytes, ndim u32,
//! dims (u32 each), float32 payload.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{ArrayD, IxDyn};

use crate::error::{CoreError, Result};

const MAGIC: &[u8; 4] = b"MVCK";
const VERSION: u32 = 1;

pub struct Checkpoint {
    pub config_json: String,
    pub params: BTreeMap<String, ArrayD<f64>>,
}

pub fn write_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    let cfg = ckpt.config_json.as_bytes();
    out.write_all(&(cfg.len() as u32).to_le_bytes())?;
    out.write_all(cfg)?;
    out.write_all(&(ckpt.params.len() as u32).to_le_bytes())?;
    for (name, arr) in &ckpt.params {
        let nb = name.as_bytes();
        out.write_all(&(nb.len() as u32).to_le_bytes())?;
        out.write_all(nb)?;
        out.write_all(&(arr.ndim() as u32).to_le_bytes())?;
        for d in arr.shape() {
            out.write_all(&(*d as u32).to_le_bytes())?;
        }
        for v in arr.iter() {
            out.write_all(&(*v as f32).to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    let mut input = BufReader::new(
        File::open(path).map_err(|_| CoreError::MissingCheckpoint(path.display().to_string()))?,
    );
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(CoreError::Shape("bad checkpoint magic".into()));
    }
    let version = read_u32(&mut input)?;
    if version != VERSION {
        return Err(CoreError::Shape(format!("unsupported checkpoint version {version}")));
    }
    let cfg_len = read_u32(&mut input)? as usize;
    let mut cfg = vec![0u8; cfg_len];
    input.read_exact(&mut cfg)?;
    let config_json = String::from_utf8(cfg)
        .map_err(|e| CoreError::Shape(format!("checkpoint config not utf-8: {e}")))?;
    let count = read_u32(&mut input)? as usize;
    let mut params = BTreeMap::new();
    for _ in 0..count {
        let name_len = read_u32(&mut input)? as usize;
        let mut name = vec![0u8; name_len];
        input.read_exact(&mut name)?;
        let name = String::from_utf8(name)
            .map_err(|e| CoreError::Shape(format!("param name not utf-8: {e}")))?;
        let ndim = read_u32(&mut input)? as usize;
        let mut dims = Vec::with_capacity(ndim);
        for _ in 0..ndim {
            dims.push(read_u32(&mut input)? as usize);
        }
        let len: usize = dims.iter().product();
        let mut payload = vec![0u8; len * 4];
        input.read_exact(&mut payload)?;
        let values: Vec<f64> = payload
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
            .collect();
        let arr = ArrayD::from_shape_vec(IxDyn(&dims), values)
            .map_err(|e| CoreError::Shape(format!("param {name}: {e}")))?;
        params.insert(name, arr);
    }
    Ok(Checkpoint {
        config_json,
        params,
    })
}

fn read_u32(input: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    input.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}
