//! Synthetic lozenge fixture: a diamond ground truth, its four quarters and an
//! optional disjoint outlier blob.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{BinaryMask, RasterGrid, ShapeSet};

pub const MIN_SIZE: usize = 64;

/// Geometry of the fixture on a `size × size` grid. Pixel centers sit at
/// integer coordinates; the diamond is centered at `((size-1)/2, (size-1)/2)`
/// and quarters are cut by the half-open axes `x < size/2`, `y < size/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LozengeGeometry {
    pub size: usize,
    /// Diamond semi-axes along x and y.
    pub semi_axes: (f64, f64),
    /// Rows by which the top-left quarter extends below the horizontal axis,
    /// overlapping the bottom-left quarter.
    pub overlap: usize,
    pub outlier_center: (f64, f64),
    pub outlier_radius: f64,
}

impl LozengeGeometry {
    /// Default proportions: semi-axis `17/64` of the side, outlier disk of
    /// radius `9/64` in the top-left corner (about 44% of the lozenge area).
    pub fn for_size(size: usize) -> Result<Self> {
        if size < MIN_SIZE {
            return Err(Error::InvalidParameter(alloc::format!(
                "lozenge grid must be at least {MIN_SIZE} pixels, got {size}"
            )));
        }
        let s = size as f64;
        let a = s * 17.0 / 64.0;
        Ok(Self {
            size,
            semi_axes: (a, a),
            overlap: 2,
            outlier_center: (s / 4.0, s / 4.0),
            outlier_radius: s * 9.0 / 64.0,
        })
    }

    pub fn grid(&self) -> Result<RasterGrid> {
        RasterGrid::new(self.size, self.size)
    }

    fn center(&self) -> f64 {
        (self.size as f64 - 1.0) / 2.0
    }

    pub fn truth(&self) -> Result<BinaryMask> {
        let c = self.center();
        let (a, b) = self.semi_axes;
        Ok(BinaryMask::from_fn(self.grid()?, |x, y| {
            libm::fabs(x as f64 - c) / a + libm::fabs(y as f64 - c) / b <= 1.0
        }))
    }

    /// Quarter `k` of the truth (0 = top-left, 1 = top-right, 2 = bottom-left,
    /// 3 = bottom-right), without any overlap.
    pub fn quarter(&self, k: usize) -> Result<BinaryMask> {
        let truth = self.truth()?;
        let h = self.size / 2;
        let (left, top) = (k.is_multiple_of(2), k < 2);
        Ok(BinaryMask::from_fn(truth.grid(), |x, y| {
            truth.at(x, y) && (x < h) == left && (y < h) == top
        }))
    }

    pub fn outlier(&self) -> Result<BinaryMask> {
        let (cx, cy) = self.outlier_center;
        let r = self.outlier_radius;
        let out = BinaryMask::from_fn(self.grid()?, |x, y| {
            libm::hypot(x as f64 - cx, y as f64 - cy) <= r
        });
        if out.overlap(&self.truth()?)? > 0 {
            return Err(Error::InvalidParameter(alloc::string::ToString::to_string(
                "outlier overlaps the lozenge",
            )));
        }
        Ok(out)
    }

    /// `[truth, top-left (extended by the overlap), top-right, bottom-left,
    /// bottom-right]`, plus the outlier when requested.
    pub fn build(&self, with_outlier: bool) -> Result<(BinaryMask, ShapeSet)> {
        let truth = self.truth()?;
        let h = self.size / 2;
        let tl = BinaryMask::from_fn(truth.grid(), |x, y| truth.at(x, y) && x < h && y < h + self.overlap);
        let mut masks = alloc::vec![truth.clone(), tl];
        for k in 1..4 {
            masks.push(self.quarter(k)?);
        }
        let mut names: Vec<String> = ["truth", "quarter_tl", "quarter_tr", "quarter_bl", "quarter_br"]
            .iter()
            .map(|s| String::from(*s))
            .collect();
        if with_outlier {
            masks.push(self.outlier()?);
            names.push(String::from("outlier"));
        }
        Ok((truth, ShapeSet::new(masks, names)?))
    }
}

/// Ground truth and the fixture set for a `grid_size × grid_size` grid.
pub fn make_lozenge_set(grid_size: usize, with_outlier: bool) -> Result<(BinaryMask, ShapeSet)> {
    LozengeGeometry::for_size(grid_size)?.build(with_outlier)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::average_image;

    #[test]
    fn quarters_partition_truth() {
        for size in [64, 100, 128] {
            let g = LozengeGeometry::for_size(size).unwrap();
            let truth = g.truth().unwrap();
            let qs: Vec<_> = (0..4).map(|k| g.quarter(k).unwrap()).collect();
            let quarter = truth.area() as f64 / 4.0;
            for q in &qs {
                assert!((q.area() as f64 - quarter).abs() <= 0.03 * quarter, "{size}: {}", q.area());
            }
            let mut u = BinaryMask::empty(truth.grid());
            for q in &qs {
                assert_eq!(u.overlap(q).unwrap(), 0);
                u = u.union(q).unwrap();
            }
            assert_eq!(u, truth);
        }
    }

    #[test]
    fn average_image_peaks_at_three_fifths() {
        let (_, s) = make_lozenge_set(128, false).unwrap();
        assert_eq!(s.len(), 5);
        let avg = average_image(&s);
        let max = avg.iter().cloned().fold(0.0, f64::max);
        assert!((max - 0.6).abs() < 1e-12);
        // the 0.6 pixels are exactly the overlap strip
        let strip = avg.iter().filter(|&&v| v > 0.55).count();
        assert!(strip > 0 && strip <= 2 * 64);
    }

    #[test]
    fn outlier_disjoint_and_sized() {
        let (truth, s) = make_lozenge_set(128, true).unwrap();
        assert_eq!(s.len(), 6);
        let out = &s.masks()[5];
        assert_eq!(out.overlap(&truth).unwrap(), 0);
        let ratio = out.area() as f64 / truth.area() as f64;
        assert!((0.35..0.5).contains(&ratio), "{ratio}");
        assert_eq!(s.names()[5], "outlier");
        assert_eq!(&s.masks()[0], &truth);
    }

    #[test]
    fn small_grid_rejected() {
        assert!(make_lozenge_set(63, false).is_err());
        let mut g = LozengeGeometry::for_size(64).unwrap();
        g.outlier_radius = 30.0;
        assert!(g.build(true).is_err());
        assert!(g.build(false).is_ok());
    }
}
