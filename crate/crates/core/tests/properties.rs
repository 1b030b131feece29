use mutual_shape_core::criterion::{entropy, joint_entropy, marginals, mutual_information, phi_metric, JointTable};
use mutual_shape_core::grid::{dice, BinaryMask, RasterGrid};
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn normalized(w: &[f64]) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    w.iter().map(|v| v / s).collect()
}

fn table() -> impl Strategy<Value = JointTable> {
    prop::collection::vec(0.0f64..1.0, 4)
        .prop_filter("nonzero mass", |w| w.iter().sum::<f64>() > 1e-3)
        .prop_map(|w| {
            let p = normalized(&w);
            [[p[0], p[1]], [p[2], p[3]]]
        })
}

/// pmf over (x, y, z) in {0,1}^3, indexed `4x + 2y + z`.
fn triple() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, 8)
        .prop_filter("nonzero mass", |w| w.iter().sum::<f64>() > 1e-3)
        .prop_map(|w| normalized(&w))
}

fn pair(p: &[f64], a: usize, b: usize) -> JointTable {
    let mut t = [[0.0; 2]; 2];
    for (k, &v) in p.iter().enumerate() {
        let bits = [(k >> 2) & 1, (k >> 1) & 1, k & 1];
        t[bits[a]][bits[b]] += v;
    }
    t
}

fn transpose(t: &JointTable) -> JointTable {
    [[t[0][0], t[1][0]], [t[0][1], t[1][1]]]
}

fn mask(grid: RasterGrid, bits: &[bool]) -> BinaryMask {
    BinaryMask::new(grid, bits.iter().map(|&b| u8::from(b)).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn phi_nonnegative_and_symmetric(t in table()) {
        let d = phi_metric(&t).unwrap();
        prop_assert!(d >= -TOL);
        prop_assert!((d - phi_metric(&transpose(&t)).unwrap()).abs() <= TOL);
    }

    #[test]
    fn phi_triangle_inequality(p in triple()) {
        let xy = phi_metric(&pair(&p, 0, 1)).unwrap();
        let yz = phi_metric(&pair(&p, 1, 2)).unwrap();
        let xz = phi_metric(&pair(&p, 0, 2)).unwrap();
        prop_assert!(xz <= xy + yz + TOL);
        prop_assert!(xy <= xz + yz + TOL);
        prop_assert!(yz <= xy + xz + TOL);
    }

    #[test]
    fn phi_zero_iff_deterministic_relabeling(a in 0.0f64..1.0, swap in any::<bool>()) {
        let t = if swap { [[0.0, a], [1.0 - a, 0.0]] } else { [[a, 0.0], [0.0, 1.0 - a]] };
        prop_assert!(phi_metric(&t).unwrap().abs() <= TOL);
    }

    #[test]
    fn phi_positive_when_not_deterministic(t in table()) {
        // a variable is a function of the other iff each row and each column has one nonzero cell
        let det = |cells: [f64; 2]| cells.iter().filter(|&&v| v > 0.0).count() <= 1;
        let functional = (0..2).all(|i| det(t[i])) && (0..2).all(|j| det([t[0][j], t[1][j]]));
        if !functional && t.iter().flatten().all(|&v| v > 1e-3) {
            prop_assert!(phi_metric(&t).unwrap() > 1e-9);
        }
    }

    #[test]
    fn area_measure_identity(t in table()) {
        let (px, py) = marginals(&t);
        let lhs = joint_entropy(&t) + mutual_information(&t);
        prop_assert!((lhs - entropy(&px) - entropy(&py)).abs() <= TOL);
    }

    #[test]
    fn mask_set_identities(a in prop::collection::vec(any::<bool>(), 48), b in prop::collection::vec(any::<bool>(), 48)) {
        let g = RasterGrid::new(8, 6).unwrap();
        let (a, b) = (mask(g, &a), mask(g, &b));
        let inter = a.intersection(&b).unwrap().area();
        prop_assert_eq!(a.area() + b.area(), a.union(&b).unwrap().area() + inter);
        prop_assert_eq!(a.symmetric_difference(&b).unwrap().area(), a.area() + b.area() - 2 * inter);
        prop_assert_eq!(dice(&a, &b).unwrap(), dice(&b, &a).unwrap());
        prop_assert_eq!(a.complement().complement(), a.clone());
    }
}

#[test]
fn phi_rejects_non_pmf() {
    assert!(phi_metric(&[[0.5, 0.5], [0.5, 0.0]]).is_err());
    assert!(phi_metric(&[[-0.1, 0.6], [0.5, 0.0]]).is_err());
}
