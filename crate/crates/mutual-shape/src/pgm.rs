//! Netpbm graymaps (P2 ASCII, P5 binary) as binary masks.
//!
//! Masks are written as P5 with a fixed header `P5\n<w> <h>\n255\n` followed
//! by one byte per pixel, 255 for foreground and 0 for background.

use std::fs;
use std::io::Write;
use std::path::Path;

use mutual_shape_core::{BinaryMask, RasterGrid};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("byte {offset}: {message}")]
pub struct PgmError {
    pub offset: usize,
    pub message: String,
}

fn err<T>(offset: usize, message: impl Into<String>) -> Result<T, PgmError> {
    Err(PgmError {
        offset,
        message: message.into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encoding {
    Ascii,
    Binary,
}

/// Decoded graymap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graymap {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub pixels: Vec<u16>,
}

/// Foreground rule for turning gray levels into labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Threshold {
    /// Gray level at or above which a pixel is foreground; `None` means
    /// `(maxval + 1) / 2`, i.e. 128 for 8-bit files.
    pub level: Option<u16>,
    /// Foreground is dark instead of bright.
    pub invert: bool,
}

impl Threshold {
    pub fn level_for(&self, maxval: u16) -> u16 {
        self.level.unwrap_or((maxval as u32).div_ceil(2) as u16)
    }
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.data.len() {
            match self.data[self.pos] {
                b'#' => {
                    while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32, PgmError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.data.len() && self.data[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return if start >= self.data.len() {
                err(start, format!("unexpected end of file, expected {what}"))
            } else {
                err(start, format!("expected {what}, found byte 0x{:02x}", self.data[start]))
            };
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .map_or_else(|| err(start, format!("{what} out of range")), Ok)
    }
}

pub fn parse_graymap(data: &[u8]) -> Result<Graymap, PgmError> {
    let encoding = match data.get(..2) {
        Some(b"P2") => Encoding::Ascii,
        Some(b"P5") => Encoding::Binary,
        _ => return err(0, "not a PGM file (magic must be P2 or P5)"),
    };
    let mut c = Cursor { data, pos: 2 };
    if c.pos < data.len() && !data[c.pos].is_ascii_whitespace() && data[c.pos] != b'#' {
        return err(c.pos, "missing whitespace after magic number");
    }
    let dims_at = c.pos;
    let width = c.number("width")? as usize;
    let height = c.number("height")? as usize;
    if width == 0 || height == 0 {
        return err(dims_at, format!("zero image dimension {width}x{height}"));
    }
    let max_at = c.pos;
    let maxval = c.number("maxval")?;
    if maxval == 0 || maxval > 65535 {
        return err(max_at, format!("maxval {maxval} outside 1..=65535"));
    }
    let maxval = maxval as u16;
    let n = width
        .checked_mul(height)
        .map_or_else(|| err(dims_at, "image dimensions overflow"), Ok)?;

    let mut pixels = Vec::with_capacity(n);
    match encoding {
        Encoding::Binary => {
            match data.get(c.pos) {
                Some(b) if b.is_ascii_whitespace() => c.pos += 1,
                Some(_) => return err(c.pos, "missing whitespace after maxval"),
                None => return err(c.pos, "truncated payload: no raster"),
            }
            let bytes = if maxval > 255 { 2 } else { 1 };
            let need = n * bytes;
            let raster = &data[c.pos..];
            if raster.len() < need {
                return err(
                    data.len(),
                    format!("truncated payload: expected {need} raster bytes, found {}", raster.len()),
                );
            }
            if bytes == 1 {
                pixels.extend(raster[..n].iter().map(|&b| b as u16));
            } else {
                pixels.extend(raster[..need].chunks_exact(2).map(|p| u16::from_be_bytes([p[0], p[1]])));
            }
            if let Some(i) = pixels.iter().position(|&v| v > maxval) {
                return err(c.pos + i * bytes, format!("sample {} exceeds maxval {maxval}", pixels[i]));
            }
        }
        Encoding::Ascii => {
            for _ in 0..n {
                c.skip_space_and_comments();
                if c.pos >= data.len() {
                    return err(c.pos, format!("truncated payload: {} of {n} samples", pixels.len()));
                }
                let at = c.pos;
                let v = c.number("sample")?;
                if v > maxval as u32 {
                    return err(at, format!("sample {v} exceeds maxval {maxval}"));
                }
                pixels.push(v as u16);
            }
        }
    }
    Ok(Graymap {
        width,
        height,
        maxval,
        pixels,
    })
}

impl Graymap {
    pub fn to_mask(&self, t: Threshold) -> BinaryMask {
        let level = t.level_for(self.maxval);
        let grid = RasterGrid::new(self.width, self.height).expect("parser rejects zero dimensions");
        BinaryMask::from_fn(grid, |x, y| (self.pixels[y * self.width + x] >= level) != t.invert)
    }
}

pub fn decode_mask(data: &[u8], t: Threshold) -> Result<BinaryMask, PgmError> {
    Ok(parse_graymap(data)?.to_mask(t))
}

/// Mask as PGM bytes: 255 foreground, 0 background.
pub fn encode_mask(m: &BinaryMask, encoding: Encoding) -> Vec<u8> {
    let g = m.grid();
    encode_gray(g.width(), g.height(), &m.values().iter().map(|&v| v * 255).collect::<Vec<_>>(), encoding)
}

/// 8-bit graymap bytes with the fixed header layout.
pub fn encode_gray(width: usize, height: usize, pixels: &[u8], encoding: Encoding) -> Vec<u8> {
    assert_eq!(pixels.len(), width * height);
    let mut out = Vec::with_capacity(pixels.len() * 4 + 20);
    match encoding {
        Encoding::Binary => {
            write!(out, "P5\n{width} {height}\n255\n").unwrap();
            out.extend_from_slice(pixels);
        }
        Encoding::Ascii => {
            write!(out, "P2\n{width} {height}\n255\n").unwrap();
            for row in pixels.chunks(width) {
                let line: Vec<String> = row.iter().map(u8::to_string).collect();
                out.extend_from_slice(line.join(" ").as_bytes());
                out.push(b'\n');
            }
        }
    }
    out
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Format(#[from] PgmError),
}

pub fn load_mask(path: &Path, t: Threshold) -> Result<BinaryMask, LoadError> {
    let data = fs::read(path)?;
    Ok(decode_mask(&data, t)?)
}

pub fn save_mask(path: &Path, m: &BinaryMask) -> std::io::Result<()> {
    fs::write(path, encode_mask(m, Encoding::Binary))
}

pub fn save_gray(path: &Path, width: usize, height: usize, pixels: &[u8]) -> std::io::Result<()> {
    fs::write(path, encode_gray(width, height, pixels, Encoding::Binary))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascii_threshold_example() {
        let m = decode_mask(b"P2\n2 2\n255\n0 255\n255 0\n", Threshold::default()).unwrap();
        assert_eq!(m.values(), &[0, 1, 1, 0]);
        let inv = decode_mask(b"P2\n2 2\n255\n0 255\n255 0\n", Threshold { level: None, invert: true }).unwrap();
        assert_eq!(inv.values(), &[1, 0, 0, 1]);
    }

    #[test]
    fn all_zero_image_is_empty() {
        let m = decode_mask(b"P5\n3 2\n255\n\0\0\0\0\0\0", Threshold::default()).unwrap();
        assert_eq!(m.area(), 0);
    }

    #[test]
    fn comments_and_sixteen_bit() {
        let mut data = b"P5 # comment\n# another\n2 1\n1000\n".to_vec();
        data.extend_from_slice(&[0x03, 0xe8, 0x00, 0x10]);
        let g = parse_graymap(&data).unwrap();
        assert_eq!(g.pixels, vec![1000, 16]);
        assert_eq!(g.to_mask(Threshold::default()).values(), &[1, 0]);
        assert_eq!(decode_mask(b"P2 1 1 1 1", Threshold::default()).unwrap().values(), &[1]);
    }

    #[test]
    fn errors_name_offsets() {
        assert_eq!(parse_graymap(b"P6\n1 1\n255\n\0").unwrap_err().offset, 0);
        let e = parse_graymap(b"P5\n0 4\n255\n").unwrap_err();
        assert_eq!(e.offset, 2);
        assert!(e.message.contains("zero"));
        let e = parse_graymap(b"P5\n2 2\n255\n\x01\x02").unwrap_err();
        assert_eq!(e.offset, 13);
        assert!(e.message.contains("truncated"));
        let e = parse_graymap(b"P2\n2 2\n255\n1 2 3").unwrap_err();
        assert!(e.message.contains("truncated"));
        let e = parse_graymap(b"P2\n2 x\n255\n").unwrap_err();
        assert_eq!(e.offset, 5);
        let e = parse_graymap(b"P2\n1 1\n10\n11").unwrap_err();
        assert_eq!(e.offset, 10);
    }

    #[test]
    fn fixed_header_layout() {
        let g = RasterGrid::new(3, 1).unwrap();
        let m = BinaryMask::new(g, vec![1, 0, 1]).unwrap();
        assert_eq!(encode_mask(&m, Encoding::Binary), b"P5\n3 1\n255\n\xff\x00\xff".to_vec());
        assert_eq!(encode_mask(&m, Encoding::Ascii), b"P2\n3 1\n255\n255 0 255\n".to_vec());
    }
}
