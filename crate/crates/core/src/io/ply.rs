use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::Vector3;

use crate::error::Result;

/// Write an ASCII PLY point cloud (`x y z`, optional `r g b` per point).
pub fn write_ply(
    path: &Path,
    points: &[Vector3<f64>],
    colors: Option<&[[u8; 3]]>,
) -> Result<()> {
    if let Some(c) = colors {
        assert_eq!(c.len(), points.len(), "one color per point");
    }
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "ply")?;
    writeln!(out, "format ascii 1.0")?;
    writeln!(out, "element vertex {}", points.len())?;
    writeln!(out, "property float x")?;
    writeln!(out, "property float y")?;
    writeln!(out, "property float z")?;
    if colors.is_some() {
        writeln!(out, "property uchar red")?;
        writeln!(out, "property uchar green")?;
        writeln!(out, "property uchar blue")?;
    }
    writeln!(out, "end_header")?;
    for (i, p) in points.iter().enumerate() {
        match colors {
            Some(c) => writeln!(
                out,
                "{} {} {} {} {} {}",
                p.x, p.y, p.z, c[i][0], c[i][1], c[i][2]
            )?,
            None => writeln!(out, "{} {} {}", p.x, p.y, p.z)?,
        }
    }
    out.flush()?;
    Ok(())
}
