//! Pointwise normal speeds obtained from the shape derivatives of the
//! energies. A positive speed moves the contour inward (shrinks `μ`); to first
//! order, adding pixel `x` to `μ` changes the energy by `+v(x)` and removing it
//! changes the energy by `-v(x)`.
//!
//! Statistics are frozen per iteration: a [`VelocityContext`] is built from the
//! current contour and only evaluated against that same contour.

use alloc::vec::Vec;

use crate::criterion::{log_odds, neg_binary_entropy, KernelSpec, RegionStatistics};
use crate::error::{Error, Result};
use crate::grid::{BinaryMask, ShapeSet};
use crate::levelset::{ContourBand, LevelSetField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FusionMode {
    /// Joint entropy plus conditional entropy.
    Mutual,
    /// Summed symmetric-difference area.
    Sd,
}

pub struct VelocityContext<'a> {
    shapes: &'a ShapeSet,
    stats: RegionStatistics,
    kernel: KernelSpec,
    lambda: f64,
}

impl<'a> VelocityContext<'a> {
    pub fn new(shapes: &'a ShapeSet, stats: RegionStatistics, kernel: KernelSpec, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "lambda must be non-negative, got {lambda}"
            )));
        }
        if stats.counts.len() != shapes.len() {
            return Err(Error::InvalidParameter(alloc::format!(
                "statistics cover {} masks, shape set has {}",
                stats.counts.len(),
                shapes.len()
            )));
        }
        Ok(Self {
            shapes,
            stats,
            kernel,
            lambda,
        })
    }

    pub fn stats(&self) -> &RegionStatistics {
        &self.stats
    }

    pub fn shapes(&self) -> &ShapeSet {
        self.shapes
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Weight on the curvature speed: `λ / |W|`. The statistical energies are
    /// area fractions of the working area, so the length penalty is measured
    /// on the same per-unit-area scale in both modes.
    pub fn reg_weight(&self) -> f64 {
        self.lambda / self.stats.work_area as f64
    }

    /// Errors unless the statistics were computed from `mu`.
    pub fn check_fresh(&self, mu: &BinaryMask) -> Result<()> {
        if mu.fingerprint() == self.stats.state {
            Ok(())
        } else {
            Err(Error::StaleStatistics)
        }
    }
}

/// `Σ_i (1 - 2 d_i(x)) = n - 2k`, `k` the number of inputs containing `x`.
pub fn v_sd(ctx: &VelocityContext<'_>, x: usize) -> f64 {
    let n = ctx.shapes.len() as f64;
    n - 2.0 * ctx.shapes.coverage(x) as f64
}

/// Speed of the conditional-entropy term `Σ_i H(D_i | T)`:
///
/// `(1/|W|) Σ_i [ (p_i - K(d_i-1)) log(p_i/(1-p_i)) - (q_i - K(d_i)) log(q_i/(1-q_i))
///                - φ(p_i) + φ(q_i) ]`
///
/// with `φ(p) = p log p + (1-p) log(1-p)`. Adding `x` to `μ` moves `|μ|/|W|`
/// up and `|μ̄|/|W|` down by `1/|W|`, hence the opposite signs on the two
/// entropy terms.
pub fn v_mi(ctx: &VelocityContext<'_>, x: usize) -> f64 {
    let qp = &ctx.stats.quality;
    let sum: f64 = ctx
        .shapes
        .masks()
        .iter()
        .zip(qp.p.iter().zip(&qp.q))
        .map(|(m, (&p, &q))| {
            let d = m.get(x);
            let k1 = ctx.kernel.match_weight(d, true);
            let k0 = ctx.kernel.match_weight(d, false);
            (p - k1) * log_odds(p) - (q - k0) * log_odds(q) - neg_binary_entropy(p) + neg_binary_entropy(q)
        })
        .sum();
    sum / ctx.stats.work_area as f64
}

/// Speed of the joint-entropy term `Σ_i H(D_i, T)`:
///
/// `(-1/|W|) Σ_i [ K(d_i-1) log(p(1,1)/p(1,0)) + K(d_i) log(p(0,1)/p(0,0)) ]`.
pub fn v_jh(ctx: &VelocityContext<'_>, x: usize) -> f64 {
    let jp = &ctx.stats.joint;
    let sum: f64 = ctx
        .shapes
        .masks()
        .iter()
        .zip(&jp.tables)
        .map(|(m, t)| {
            let d = m.get(x);
            let k1 = ctx.kernel.match_weight(d, true);
            let k0 = ctx.kernel.match_weight(d, false);
            k1 * (libm::log(t[1][1]) - libm::log(t[1][0])) + k0 * (libm::log(t[0][1]) - libm::log(t[0][0]))
        })
        .sum();
    -sum / ctx.stats.work_area as f64
}

/// Curvature speed; shortens the contour.
pub fn v_reg(levelset: &LevelSetField, x: usize) -> f64 {
    levelset.curvature(x)
}

/// `v_jh + v_mi + (λ/|W|) κ` in mutual mode, `v_sd + (λ/|W|) κ` in SD mode.
pub fn composite_f(ctx: &VelocityContext<'_>, levelset: &LevelSetField, x: usize, mode: FusionMode) -> f64 {
    let data = match mode {
        FusionMode::Mutual => v_jh(ctx, x) + v_mi(ctx, x),
        FusionMode::Sd => v_sd(ctx, x),
    };
    if ctx.lambda == 0.0 {
        data
    } else {
        data + ctx.reg_weight() * v_reg(levelset, x)
    }
}

/// Full-grid speed array: the composite speed on the band, zero elsewhere.
pub fn velocity_field(
    ctx: &VelocityContext<'_>,
    levelset: &LevelSetField,
    band: &ContourBand,
    mode: FusionMode,
) -> Result<Vec<f64>> {
    ctx.check_fresh(&levelset.extract_mask())?;
    let mut speed = alloc::vec![0.0; levelset.grid().len()];
    for &x in &band.pixels {
        speed[x] = composite_f(ctx, levelset, x, mode);
    }
    Ok(speed)
}
