//! Raster grids, binary masks and mask sets.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Pixel raster with unit spacing. Pixel `(x, y)` lives at index `y * width + x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RasterGrid {
    width: usize,
    height: usize,
}

impl RasterGrid {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyGrid { width, height });
        }
        Ok(Self { width, height })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.width * self.height
    }

    /// Always false; a grid has at least one pixel.
    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        debug_assert!(x < self.width && y < self.height);
        y * self.width + x
    }

    #[inline]
    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index % self.width, index / self.width)
    }

    /// 4-neighbors of a pixel that lie inside the grid.
    pub fn neighbors4(&self, index: usize) -> impl Iterator<Item = usize> {
        let (x, y) = self.coords(index);
        let w = self.width;
        let h = self.height;
        [
            (x > 0).then(|| index - 1),
            (x + 1 < w).then(|| index + 1),
            (y > 0).then(|| index - w),
            (y + 1 < h).then(|| index + w),
        ]
        .into_iter()
        .flatten()
    }

    pub(crate) fn check_same(&self, other: &RasterGrid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left_w: self.width,
                left_h: self.height,
                right_w: other.width,
                right_h: other.height,
            })
        }
    }
}

/// Characteristic function of one segmentation: every pixel is 0 or 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    grid: RasterGrid,
    values: Vec<u8>,
}

impl BinaryMask {
    pub fn new(grid: RasterGrid, values: Vec<u8>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::SampleCount {
                expected: grid.len(),
                actual: values.len(),
            });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, &v)| v > 1) {
            return Err(Error::NonBinary { index, value });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: RasterGrid, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for y in 0..grid.height() {
            for x in 0..grid.width() {
                values.push(u8::from(f(x, y)));
            }
        }
        Self { grid, values }
    }

    pub fn empty(grid: RasterGrid) -> Self {
        Self {
            grid,
            values: alloc::vec![0; grid.len()],
        }
    }

    pub fn full(grid: RasterGrid) -> Self {
        Self {
            grid,
            values: alloc::vec![1; grid.len()],
        }
    }

    #[inline]
    pub fn grid(&self) -> RasterGrid {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[u8] {
        &self.values
    }

    #[inline]
    pub fn get(&self, index: usize) -> bool {
        self.values[index] == 1
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> bool {
        self.get(self.grid.index(x, y))
    }

    pub fn set(&mut self, index: usize, on: bool) {
        self.values[index] = u8::from(on);
    }

    /// `|m|`, the number of foreground pixels.
    pub fn area(&self) -> usize {
        self.values.iter().map(|&v| v as usize).sum()
    }

    pub fn complement(&self) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| 1 - v).collect(),
        }
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn symmetric_difference(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a ^ b)
    }

    /// `|a ∩ b|` without allocating.
    pub fn overlap(&self, other: &Self) -> Result<usize> {
        self.grid.check_same(&other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .filter(|(&a, &b)| a & b == 1)
            .count())
    }

    fn zip_with(&self, other: &Self, op: impl Fn(u8, u8) -> u8) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        })
    }

    /// Stable 64-bit FNV-1a fingerprint of the grid and pixel values.
    pub fn fingerprint(&self) -> u64 {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h = OFFSET;
        let mut feed = |b: u8| {
            h ^= u64::from(b);
            h = h.wrapping_mul(PRIME);
        };
        for b in (self.grid.width as u64).to_le_bytes() {
            feed(b);
        }
        for b in (self.grid.height as u64).to_le_bytes() {
            feed(b);
        }
        for &v in &self.values {
            feed(v);
        }
        h
    }
}

/// `|m|`.
pub fn region_area(m: &BinaryMask) -> usize {
    m.area()
}

/// Dice coefficient `2|a∩b| / (|a|+|b|)`; two empty masks score 1.
pub fn dice(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    let inter = a.overlap(b)?;
    let total = a.area() + b.area();
    if total == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * inter as f64 / total as f64)
}

/// Ordered family of masks on one grid, with a label per mask.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeSet {
    grid: RasterGrid,
    masks: Vec<BinaryMask>,
    names: Vec<String>,
}

impl ShapeSet {
    pub fn new(masks: Vec<BinaryMask>, names: Vec<String>) -> Result<Self> {
        let first = masks.first().ok_or(Error::TooFewMasks { needed: 1, got: 0 })?;
        let grid = first.grid();
        for m in &masks[1..] {
            grid.check_same(&m.grid())?;
        }
        if names.len() != masks.len() {
            return Err(Error::InvalidParameter(alloc::format!(
                "{} names for {} masks",
                names.len(),
                masks.len()
            )));
        }
        Ok(Self { grid, masks, names })
    }

    /// Masks labelled `mask1`, `mask2`, ...
    pub fn unnamed(masks: Vec<BinaryMask>) -> Result<Self> {
        let names = (1..=masks.len()).map(|i| alloc::format!("mask{i}")).collect();
        Self::new(masks, names)
    }

    #[inline]
    pub fn grid(&self) -> RasterGrid {
        self.grid
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.masks.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    #[inline]
    pub fn masks(&self) -> &[BinaryMask] {
        &self.masks
    }

    #[inline]
    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Number of masks containing pixel `index`.
    #[inline]
    pub fn coverage(&self, index: usize) -> usize {
        self.masks.iter().filter(|m| m.get(index)).count()
    }

    pub(crate) fn require_fusable(&self) -> Result<()> {
        if self.masks.len() < 2 {
            return Err(Error::TooFewMasks {
                needed: 2,
                got: self.masks.len(),
            });
        }
        Ok(())
    }
}

/// Pixelwise mean `(1/n) Σ d_i` of the characteristic functions.
pub fn average_image(s: &ShapeSet) -> Vec<f64> {
    let n = s.len() as f64;
    (0..s.grid().len())
        .map(|i| s.coverage(i) as f64 / n)
        .collect()
}
