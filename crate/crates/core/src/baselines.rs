//! Reference fusers: majority vote, union, intersection and binary STAPLE.

use alloc::vec::Vec;

use crate::criterion::{clamp_prob, QualityParams, DEFAULT_EPS};
use crate::error::{Error, Result};
use crate::grid::{BinaryMask, ShapeSet};

/// Pixel is foreground iff at least half the inputs contain it (ties count as
/// foreground).
pub fn majority_vote(s: &ShapeSet) -> BinaryMask {
    let n = s.len();
    let g = s.grid();
    BinaryMask::from_fn(g, |x, y| 2 * s.coverage(g.index(x, y)) >= n)
}

pub fn union(s: &ShapeSet) -> BinaryMask {
    let g = s.grid();
    BinaryMask::from_fn(g, |x, y| s.coverage(g.index(x, y)) > 0)
}

pub fn intersection(s: &ShapeSet) -> BinaryMask {
    let g = s.grid();
    BinaryMask::from_fn(g, |x, y| s.coverage(g.index(x, y)) == s.len())
}

#[derive(Debug, Clone, PartialEq)]
pub struct StapleConfig {
    pub max_iters: usize,
    pub tol: f64,
    /// Starting sensitivity and specificity for every input.
    pub init_quality: f64,
    pub eps: f64,
}

impl Default for StapleConfig {
    fn default() -> Self {
        Self {
            max_iters: 100,
            tol: 1e-8,
            init_quality: 0.99,
            eps: DEFAULT_EPS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StapleResult {
    /// Posterior probability that each pixel is truly foreground.
    pub posterior: Vec<f64>,
    pub quality: QualityParams,
    /// `posterior >= 0.5`.
    pub consensus: BinaryMask,
    /// Fixed foreground prior (mean input foreground fraction).
    pub prior: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Set when the inputs do not identify the labelling: a flat posterior, or
    /// no input better than chance (`p + q > 1`).
    pub ambiguous: bool,
}

/// Binary STAPLE expectation-maximization without spatial regularization.
pub fn staple_em(s: &ShapeSet, cfg: &StapleConfig) -> Result<StapleResult> {
    s.require_fusable()?;
    if !(cfg.init_quality > 0.0 && cfg.init_quality < 1.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "initial quality must be in (0, 1), got {}",
            cfg.init_quality
        )));
    }
    let n = s.len();
    let len = s.grid().len();
    let total: usize = s.masks().iter().map(BinaryMask::area).sum();
    let prior = clamp_prob(total as f64 / (n * len) as f64, cfg.eps);
    let (lf, lb) = (libm::log(prior), libm::log(1.0 - prior));

    let mut p = alloc::vec![cfg.init_quality; n];
    let mut q = alloc::vec![cfg.init_quality; n];
    let mut w = alloc::vec![0.0; len];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iters {
        iterations += 1;
        // E-step, in log space
        let lp: Vec<(f64, f64)> = p.iter().map(|&v| (libm::log(v), libm::log(1.0 - v))).collect();
        let lq: Vec<(f64, f64)> = q.iter().map(|&v| (libm::log(v), libm::log(1.0 - v))).collect();
        for (x, wx) in w.iter_mut().enumerate() {
            let (mut a, mut b) = (lf, lb);
            for (i, m) in s.masks().iter().enumerate() {
                if m.get(x) {
                    a += lp[i].0;
                    b += lq[i].1;
                } else {
                    a += lp[i].1;
                    b += lq[i].0;
                }
            }
            *wx = 1.0 / (1.0 + libm::exp(b - a));
        }
        // M-step
        let fg: f64 = w.iter().sum();
        let bg = len as f64 - fg;
        let mut delta = 0.0f64;
        for (i, m) in s.masks().iter().enumerate() {
            let (mut tp, mut tn) = (0.0, 0.0);
            for (x, &wx) in w.iter().enumerate() {
                if m.get(x) {
                    tp += wx;
                } else {
                    tn += 1.0 - wx;
                }
            }
            let np = if fg > 0.0 { clamp_prob(tp / fg, cfg.eps) } else { p[i] };
            let nq = if bg > 0.0 { clamp_prob(tn / bg, cfg.eps) } else { q[i] };
            delta = delta.max(libm::fabs(np - p[i])).max(libm::fabs(nq - q[i]));
            p[i] = np;
            q[i] = nq;
        }
        if delta < cfg.tol {
            converged = true;
            break;
        }
    }

    let lo = w.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ambiguous = hi - lo < 1e-9 || p.iter().zip(&q).all(|(a, b)| a + b <= 1.0);
    let g = s.grid();
    let consensus = BinaryMask::from_fn(g, |x, y| w[g.index(x, y)] >= 0.5);
    Ok(StapleResult {
        posterior: w,
        quality: QualityParams { p, q, eps: cfg.eps },
        consensus,
        prior,
        iterations,
        converged,
        ambiguous,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criterion::energy_sd;
    use crate::grid::RasterGrid;
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn px(values: &[u8]) -> ShapeSet {
        let g = RasterGrid::new(1, 1).unwrap();
        ShapeSet::unnamed(values.iter().map(|&v| BinaryMask::new(g, vec![v]).unwrap()).collect()).unwrap()
    }

    #[test]
    fn vote_cases() {
        assert!(majority_vote(&px(&[1, 1, 0])).get(0));
        assert!(majority_vote(&px(&[1, 0])).get(0));
        assert!(!majority_vote(&px(&[1, 0, 0])).get(0));
    }

    #[test]
    fn union_intersection_match_pixel_logic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = RasterGrid::new(9, 7).unwrap();
        let masks: Vec<_> = (0..4).map(|_| BinaryMask::from_fn(g, |_, _| rng.gen_bool(0.4))).collect();
        let s = ShapeSet::unnamed(masks.clone()).unwrap();
        let (u, i) = (union(&s), intersection(&s));
        for x in 0..g.len() {
            assert_eq!(u.get(x), masks.iter().any(|m| m.get(x)));
            assert_eq!(i.get(x), masks.iter().all(|m| m.get(x)));
        }
        let same = ShapeSet::unnamed(vec![masks[0].clone(), masks[0].clone()]).unwrap();
        assert_eq!(union(&same), masks[0]);
        assert_eq!(intersection(&same), masks[0]);
        let a = BinaryMask::from_fn(g, |x, _| x < 4);
        let disjoint = ShapeSet::unnamed(vec![a.clone(), a.complement()]).unwrap();
        assert_eq!(intersection(&disjoint).area(), 0);
    }

    #[test]
    fn vote_minimizes_sd_on_3x3() {
        let g = RasterGrid::new(3, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let masks: Vec<_> = (0..3).map(|_| BinaryMask::from_fn(g, |_, _| rng.gen_bool(0.5))).collect();
            let s = ShapeSet::unnamed(masks).unwrap();
            let vote = majority_vote(&s);
            let best = (0u32..512)
                .map(|bits| {
                    let m = BinaryMask::from_fn(g, |x, y| bits >> (3 * y + x) & 1 == 1);
                    energy_sd(&s, &m).unwrap()
                })
                .min()
                .unwrap();
            assert_eq!(energy_sd(&s, &vote).unwrap(), best);
        }
    }

    #[test]
    fn staple_perfect_raters() {
        let g = RasterGrid::new(10, 10).unwrap();
        let m = BinaryMask::from_fn(g, |x, y| x > 2 && y < 6);
        let s = ShapeSet::unnamed(vec![m.clone(); 3]).unwrap();
        let r = staple_em(&s, &StapleConfig::default()).unwrap();
        assert!(r.converged);
        assert!(!r.ambiguous);
        assert_eq!(r.consensus, m);
        for i in 0..3 {
            assert!((r.quality.p[i] - (1.0 - DEFAULT_EPS)).abs() < 1e-9);
            assert!((r.quality.q[i] - (1.0 - DEFAULT_EPS)).abs() < 1e-9);
        }
    }

    #[test]
    fn staple_complementary_pair_is_ambiguous() {
        let g = RasterGrid::new(8, 8).unwrap();
        let m = BinaryMask::from_fn(g, |x, _| x < 4);
        let s = ShapeSet::unnamed(vec![m.clone(), m.complement()]).unwrap();
        let r = staple_em(&s, &StapleConfig::default()).unwrap();
        assert!(r.ambiguous);
    }

    #[test]
    fn staple_permutation_equivariant() {
        let g = RasterGrid::new(20, 20).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let base = BinaryMask::from_fn(g, |x, y| (5..15).contains(&x) && (4..16).contains(&y));
        let masks: Vec<_> = (0..4)
            .map(|_| {
                let mut m = base.clone();
                for i in 0..g.len() {
                    if rng.gen_bool(0.1) {
                        m.set(i, !m.get(i));
                    }
                }
                m
            })
            .collect();
        let a = staple_em(&ShapeSet::unnamed(masks.clone()).unwrap(), &StapleConfig::default()).unwrap();
        let perm = [2, 0, 3, 1];
        let b = staple_em(
            &ShapeSet::unnamed(perm.iter().map(|&i| masks[i].clone()).collect()).unwrap(),
            &StapleConfig::default(),
        )
        .unwrap();
        assert_eq!(a.consensus, b.consensus);
        for (j, &i) in perm.iter().enumerate() {
            assert!((a.quality.p[i] - b.quality.p[j]).abs() < 1e-9);
            assert!((a.quality.q[i] - b.quality.q[j]).abs() < 1e-9);
        }
    }
}
