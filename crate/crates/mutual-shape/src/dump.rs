//! Raw float dumps for debugging: little-endian `f32` samples in row-major
//! order, with a text header alongside.

use std::fs;
use std::path::Path;

use mutual_shape_core::RasterGrid;

/// Writes `<stem>.f32` and `<stem>.hdr` into `dir`.
pub fn write_field(dir: &Path, stem: &str, grid: RasterGrid, values: &[f64]) -> std::io::Result<()> {
    let mut raw = Vec::with_capacity(values.len() * 4);
    for &v in values {
        raw.extend_from_slice(&(v as f32).to_le_bytes());
    }
    fs::write(dir.join(format!("{stem}.f32")), raw)?;
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let header = format!(
        "width={}\nheight={}\ndtype=float32le\nmin={}\nmax={}\n",
        grid.width(),
        grid.height(),
        lo,
        hi
    );
    fs::write(dir.join(format!("{stem}.hdr")), header)
}

/// Reads back a dump written by [`write_field`].
pub fn read_field(dir: &Path, stem: &str) -> std::io::Result<Vec<f32>> {
    let raw = fs::read(dir.join(format!("{stem}.f32")))?;
    Ok(raw.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = RasterGrid::new(3, 2).unwrap();
        let v = [0.5, -1.25, 3.0, 0.0, 1e-3, -7.0];
        write_field(dir.path(), "u_00001", g, &v).unwrap();
        let back = read_field(dir.path(), "u_00001").unwrap();
        assert_eq!(back, v.iter().map(|&x| x as f32).collect::<Vec<_>>());
        let hdr = fs::read_to_string(dir.path().join("u_00001.hdr")).unwrap();
        assert!(hdr.contains("width=3\nheight=2\n"));
        assert!(hdr.contains("min=-7\nmax=3\n"));
    }
}
