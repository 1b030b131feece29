//! Single-pixel flips of the discrete energies against the pointwise speeds.
//! Adding pixel `x` to the region changes an energy by about `+v(x)`,
//! removing it by about `-v(x)`.

use mutual_shape_core::criterion::{energy_sd, KernelSpec, RegionStatistics, DEFAULT_EPS};
use mutual_shape_core::grid::{BinaryMask, RasterGrid, ShapeSet};
use mutual_shape_core::velocity::{v_jh, v_mi, v_sd, VelocityContext};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SIZE: usize = 32;

fn blob(g: RasterGrid, rng: &mut ChaCha8Rng, c: (f64, f64), r: f64) -> BinaryMask {
    let (cx, cy) = (c.0 + rng.gen_range(-3.0..3.0), c.1 + rng.gen_range(-3.0..3.0));
    let r = r + rng.gen_range(-2.0..2.0);
    let (ax, ay) = (rng.gen_range(0.7..1.3), rng.gen_range(0.7..1.3));
    BinaryMask::from_fn(g, |x, y| {
        let dx = (x as f64 - cx) / ax;
        let dy = (y as f64 - cy) / ay;
        (dx * dx + dy * dy).sqrt() <= r
    })
}

fn random_state(rng: &mut ChaCha8Rng) -> (ShapeSet, BinaryMask) {
    let g = RasterGrid::new(SIZE, SIZE).unwrap();
    let c = (15.5, 15.5);
    let n = rng.gen_range(3..=6);
    let masks = (0..n).map(|_| blob(g, rng, c, 8.0)).collect();
    let mu = blob(g, rng, c, 9.0);
    (ShapeSet::unnamed(masks).unwrap(), mu)
}

struct Agreement {
    total: usize,
    same_sign: usize,
    rel_errors: Vec<f64>,
}

impl Agreement {
    fn sign_rate(&self) -> f64 {
        self.same_sign as f64 / self.total as f64
    }

    fn median_rel_error(&mut self) -> f64 {
        self.rel_errors.sort_by(f64::total_cmp);
        self.rel_errors[self.rel_errors.len() / 2]
    }
}

fn check(states: usize, seed: u64, energy: impl Fn(&RegionStatistics) -> f64, speed: impl Fn(&VelocityContext<'_>, usize) -> f64) -> Agreement {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = KernelSpec::default();
    let mut a = Agreement { total: 0, same_sign: 0, rel_errors: Vec::new() };
    for _ in 0..states {
        let (s, mu) = random_state(&mut rng);
        let st = RegionStatistics::compute(&s, &mu, k, None, DEFAULT_EPS).unwrap();
        let e0 = energy(&st);
        let ctx = VelocityContext::new(&s, st, k, 0.0).unwrap();
        let g = s.grid();
        for x in 0..g.len() {
            if !g.neighbors4(x).any(|j| mu.get(j) != mu.get(x)) {
                continue;
            }
            let mut flipped = mu.clone();
            flipped.set(x, !mu.get(x));
            let st1 = RegionStatistics::compute(&s, &flipped, k, None, DEFAULT_EPS).unwrap();
            let de = energy(&st1) - e0;
            let predicted = if mu.get(x) { -speed(&ctx, x) } else { speed(&ctx, x) };
            a.total += 1;
            if de.signum() == predicted.signum() {
                a.same_sign += 1;
            }
            if de != 0.0 {
                a.rel_errors.push(((predicted - de) / de).abs());
            }
        }
    }
    a
}

#[test]
fn mi_speed_matches_flips() {
    let mut a = check(20, 1, RegionStatistics::energy_mi, v_mi);
    assert!(a.sign_rate() >= 0.85, "sign agreement {}", a.sign_rate());
    let med = a.median_rel_error();
    assert!(med <= 0.15, "median relative error {med}");
}

#[test]
fn jh_speed_matches_flips() {
    let mut a = check(20, 2, RegionStatistics::energy_jh, v_jh);
    assert!(a.sign_rate() >= 0.85, "sign agreement {}", a.sign_rate());
    let med = a.median_rel_error();
    assert!(med <= 0.15, "median relative error {med}");
}

#[test]
fn sd_speed_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let k = KernelSpec::default();
    for _ in 0..20 {
        let (s, mu) = random_state(&mut rng);
        let st = RegionStatistics::compute(&s, &mu, k, None, DEFAULT_EPS).unwrap();
        let ctx = VelocityContext::new(&s, st, k, 0.0).unwrap();
        let e0 = energy_sd(&s, &mu).unwrap() as i64;
        for x in 0..s.grid().len() {
            let mut flipped = mu.clone();
            flipped.set(x, !mu.get(x));
            let de = energy_sd(&s, &flipped).unwrap() as i64 - e0;
            let v = v_sd(&ctx, x) as i64;
            assert_eq!(de, if mu.get(x) { -v } else { v });
        }
    }
}
