//! Probability estimates and energy terms.
//!
//! All region statistics are taken over a working area `W` (the whole grid
//! unless a working mask is given): `μ_W = μ ∩ W` and `μ̄_W = W \ μ`. Inputs
//! are binary, so every kernel integral reduces to contingency counts
//! weighted by `K(0)` and `K(±1)`, which keeps sums exact and order-free.
//!
//! Energies are in nats; contour length is in pixels.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{BinaryMask, ShapeSet};
use crate::levelset::LevelSetField;

/// Default clamp applied to every probability before a logarithm.
pub const DEFAULT_EPS: f64 = 1e-6;

/// Half-width of the hat-shaped smoothed Dirac used for contour length.
pub const LENGTH_DIRAC_HALF_WIDTH: f64 = 1.5;

/// Gaussian kernel normalized to a unit peak, `K(x) = exp(-x²/(2σ²))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub sigma: f64,
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self { sigma: 0.1 }
    }
}

impl KernelSpec {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParameter(alloc::format!(
                "kernel sigma must be positive, got {sigma}"
            )));
        }
        Ok(Self { sigma })
    }

    /// `K(d - a)` for a binary label `d` and target `a`.
    #[inline]
    pub fn match_weight(&self, d: bool, a: bool) -> f64 {
        if d == a {
            kernel(0.0, *self)
        } else {
            kernel(1.0, *self)
        }
    }
}

#[inline]
pub fn kernel(x: f64, k: KernelSpec) -> f64 {
    libm::exp(-x * x / (2.0 * k.sigma * k.sigma))
}

#[inline]
pub fn clamp_prob(p: f64, eps: f64) -> f64 {
    p.clamp(eps, 1.0 - eps)
}

/// `x log x` with the `0 log 0 = 0` convention.
#[inline]
pub fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * libm::log(x)
    }
}

/// `φ(p) = p log p + (1-p) log(1-p)`, i.e. minus the binary entropy.
#[inline]
pub fn neg_binary_entropy(p: f64) -> f64 {
    xlogx(p) + xlogx(1.0 - p)
}

/// Log-odds `log(p / (1-p))`.
#[inline]
pub fn log_odds(p: f64) -> f64 {
    libm::log(p) - libm::log(1.0 - p)
}

/// Per-input sensitivity `p_i` and specificity `q_i`, clamped to `[ε, 1-ε]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityParams {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub eps: f64,
}

impl QualityParams {
    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }
}

/// 2x2 joint table of one input against the consensus, indexed `[d][t]`.
pub type JointTable = [[f64; 2]; 2];

/// Per-input joint probabilities `p(d_i = a, t = b)`, clamped to `[ε, 1-ε]`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointProbs {
    pub tables: Vec<JointTable>,
    pub eps: f64,
}

impl JointProbs {
    #[inline]
    pub fn get(&self, mask: usize, d: bool, t: bool) -> f64 {
        self.tables[mask][d as usize][t as usize]
    }
}

/// Energy terms for one contour state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyBreakdown {
    /// `Σ_i H(D_i, T)`.
    pub jh: f64,
    /// `Σ_i H(D_i | T)`.
    pub mi_surrogate: f64,
    /// Summed symmetric-difference area `Σ_i |Ω_i △ μ|`, in pixels.
    pub sd: f64,
    /// Contour length in pixels.
    pub reg: f64,
    /// Objective actually minimized, including the weighted length.
    pub total: f64,
}

/// Contingency counts of one input against `μ` inside the working area,
/// indexed `[d][t]`.
pub type Counts = [[usize; 2]; 2];

/// Everything the velocities need, computed once per contour state.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionStatistics {
    pub counts: Vec<Counts>,
    pub quality: QualityParams,
    pub joint: JointProbs,
    /// `|μ_W|`
    pub mu_area: usize,
    /// `|μ̄_W|`
    pub omu_area: usize,
    /// `|W|`
    pub work_area: usize,
    /// Fingerprint of the `μ` these were computed from.
    pub state: u64,
}

fn in_work(work: Option<&BinaryMask>, i: usize) -> bool {
    work.is_none_or(|w| w.get(i))
}

/// Contingency counts for every input inside the working area.
pub fn contingency(s: &ShapeSet, mu: &BinaryMask, work: Option<&BinaryMask>) -> Result<Vec<Counts>> {
    s.grid().check_same(&mu.grid())?;
    if let Some(w) = work {
        s.grid().check_same(&w.grid())?;
    }
    let mut out: Vec<Counts> = alloc::vec![[[0; 2]; 2]; s.len()];
    for i in 0..s.grid().len() {
        if !in_work(work, i) {
            continue;
        }
        let t = mu.get(i) as usize;
        for (c, m) in out.iter_mut().zip(s.masks()) {
            c[m.get(i) as usize][t] += 1;
        }
    }
    Ok(out)
}

/// Unclamped `(p_i, q_i)` from contingency counts.
fn raw_quality(counts: &[Counts], k: KernelSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    let k_hit = kernel(0.0, k);
    let k_miss = kernel(1.0, k);
    let mut p = Vec::with_capacity(counts.len());
    let mut q = Vec::with_capacity(counts.len());
    for c in counts {
        let mu = c[0][1] + c[1][1];
        let omu = c[0][0] + c[1][0];
        if mu == 0 {
            return Err(Error::DegenerateRegion("consensus region is empty"));
        }
        if omu == 0 {
            return Err(Error::DegenerateRegion("consensus complement is empty"));
        }
        p.push((c[1][1] as f64 * k_hit + c[0][1] as f64 * k_miss) / mu as f64);
        q.push((c[0][0] as f64 * k_hit + c[1][0] as f64 * k_miss) / omu as f64);
    }
    Ok((p, q))
}

/// Sensitivity/specificity before clamping; see [`sensitivity_specificity`].
pub fn sensitivity_specificity_raw(
    s: &ShapeSet,
    mu: &BinaryMask,
    k: KernelSpec,
    work: Option<&BinaryMask>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    raw_quality(&contingency(s, mu, work)?, k)
}

/// `p_i = (1/|μ|) Σ_μ K(d_i - 1)` and `q_i = (1/|μ̄|) Σ_μ̄ K(d_i)`, clamped.
pub fn sensitivity_specificity(
    s: &ShapeSet,
    mu: &BinaryMask,
    k: KernelSpec,
    work: Option<&BinaryMask>,
    eps: f64,
) -> Result<QualityParams> {
    let (p, q) = sensitivity_specificity_raw(s, mu, k, work)?;
    Ok(QualityParams {
        p: p.into_iter().map(|v| clamp_prob(v, eps)).collect(),
        q: q.into_iter().map(|v| clamp_prob(v, eps)).collect(),
        eps,
    })
}

fn raw_joint(counts: &[Counts], k: KernelSpec, work_area: usize) -> Vec<JointTable> {
    let k_hit = kernel(0.0, k);
    let k_miss = kernel(1.0, k);
    let norm = work_area as f64;
    counts
        .iter()
        .map(|c| {
            let mut t = [[0.0; 2]; 2];
            for a in 0..2 {
                for b in 0..2 {
                    t[a][b] = (c[a][b] as f64 * k_hit + c[1 - a][b] as f64 * k_miss) / norm;
                }
            }
            t
        })
        .collect()
}

/// Joint tables before clamping; see [`joint_probs`].
pub fn joint_probs_raw(
    s: &ShapeSet,
    mu: &BinaryMask,
    k: KernelSpec,
    work: Option<&BinaryMask>,
) -> Result<Vec<JointTable>> {
    let counts = contingency(s, mu, work)?;
    let area = work.map_or(s.grid().len(), BinaryMask::area);
    if area == 0 {
        return Err(Error::DegenerateRegion("working area is empty"));
    }
    Ok(raw_joint(&counts, k, area))
}

/// `p(d_i = a, t = 1) = (1/|W|) Σ_μ K(d_i - a)` and the `t = 0` analogue on
/// `μ̄`, clamped.
pub fn joint_probs(
    s: &ShapeSet,
    mu: &BinaryMask,
    k: KernelSpec,
    work: Option<&BinaryMask>,
    eps: f64,
) -> Result<JointProbs> {
    let tables = joint_probs_raw(s, mu, k, work)?
        .into_iter()
        .map(|t| t.map(|row| row.map(|v| clamp_prob(v, eps))))
        .collect();
    Ok(JointProbs { tables, eps })
}

impl RegionStatistics {
    pub fn compute(
        s: &ShapeSet,
        mu: &BinaryMask,
        k: KernelSpec,
        work: Option<&BinaryMask>,
        eps: f64,
    ) -> Result<Self> {
        let counts = contingency(s, mu, work)?;
        let work_area = work.map_or(s.grid().len(), BinaryMask::area);
        let (mu_area, omu_area) = counts
            .first()
            .map(|c| (c[0][1] + c[1][1], c[0][0] + c[1][0]))
            .unwrap_or((0, 0));
        let (p, q) = raw_quality(&counts, k)?;
        let quality = QualityParams {
            p: p.into_iter().map(|v| clamp_prob(v, eps)).collect(),
            q: q.into_iter().map(|v| clamp_prob(v, eps)).collect(),
            eps,
        };
        let joint = JointProbs {
            tables: raw_joint(&counts, k, work_area)
                .into_iter()
                .map(|t| t.map(|row| row.map(|v| clamp_prob(v, eps))))
                .collect(),
            eps,
        };
        Ok(Self {
            counts,
            quality,
            joint,
            mu_area,
            omu_area,
            work_area,
            state: mu.fingerprint(),
        })
    }

    pub fn energy_mi(&self) -> f64 {
        energy_mi(&self.quality, self.mu_area, self.omu_area, self.work_area)
    }

    pub fn energy_jh(&self) -> f64 {
        energy_jh(&self.joint)
    }
}

/// `Σ_i H(D_i | T) = -Σ_i [ (|μ|/|W|) φ(p_i) + (|μ̄|/|W|) φ(q_i) ]`.
///
/// This is the mutual-information term with the `T`-independent `H(D_i)`
/// dropped.
pub fn energy_mi(qp: &QualityParams, mu_area: usize, omu_area: usize, omega_area: usize) -> f64 {
    let a = mu_area as f64 / omega_area as f64;
    let b = omu_area as f64 / omega_area as f64;
    -qp.p
        .iter()
        .zip(&qp.q)
        .map(|(&p, &q)| a * neg_binary_entropy(p) + b * neg_binary_entropy(q))
        .sum::<f64>()
}

/// `Σ_i H(D_i, T) = -Σ_i Σ_{a,b} p(a,b) log p(a,b)`.
pub fn energy_jh(jp: &JointProbs) -> f64 {
    jp.tables.iter().map(joint_entropy).sum()
}

/// `Σ_i |Ω_i △ μ|`.
pub fn energy_sd(s: &ShapeSet, mu: &BinaryMask) -> Result<usize> {
    s.grid().check_same(&mu.grid())?;
    Ok(s.masks()
        .iter()
        .map(|m| {
            m.values()
                .iter()
                .zip(mu.values())
                .filter(|(&a, &b)| a != b)
                .count()
        })
        .sum())
}

pub fn entropy(pmf: &[f64]) -> f64 {
    -pmf.iter().copied().map(xlogx).sum::<f64>()
}

pub fn joint_entropy(t: &JointTable) -> f64 {
    entropy(&[t[0][0], t[0][1], t[1][0], t[1][1]])
}

/// Marginals `(p(X), p(Y))` of a table indexed `[x][y]`.
pub fn marginals(t: &JointTable) -> ([f64; 2], [f64; 2]) {
    (
        [t[0][0] + t[0][1], t[1][0] + t[1][1]],
        [t[0][0] + t[1][0], t[0][1] + t[1][1]],
    )
}

pub fn mutual_information(t: &JointTable) -> f64 {
    let (px, py) = marginals(t);
    entropy(&px) + entropy(&py) - joint_entropy(t)
}

/// `φ(X, Y) = H(X,Y) - I(X,Y) = H(X|Y) + H(Y|X)`, a metric on binary
/// variables. Errors if the table is not a pmf.
pub fn phi_metric(t: &JointTable) -> Result<f64> {
    let total: f64 = t.iter().flatten().sum();
    if t.iter().flatten().any(|&v| !(v >= 0.0)) || libm::fabs(total - 1.0) > 1e-9 {
        return Err(Error::InvalidParameter(alloc::format!(
            "joint table is not a pmf (sum {total})"
        )));
    }
    Ok(joint_entropy(t) - mutual_information(t))
}

/// Contour length `Σ δ(u) |∇u|` with a hat-shaped Dirac of half-width 1.5 px.
pub fn contour_length(f: &LevelSetField) -> f64 {
    let beta = LENGTH_DIRAC_HALF_WIDTH;
    (0..f.grid().len())
        .filter_map(|i| {
            let a = libm::fabs(f.value(i));
            (a < beta).then(|| {
                let (gx, gy) = f.gradient(i);
                (1.0 - a / beta) / beta * libm::hypot(gx, gy)
            })
        })
        .sum()
}
