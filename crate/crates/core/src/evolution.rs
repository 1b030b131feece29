//! Outer optimization loop: statistics, speeds, an upwind explicit step,
//! periodic redistancing and convergence detection.

use alloc::vec::Vec;

use crate::criterion::{
    contour_length, energy_sd, EnergyBreakdown, KernelSpec, QualityParams, RegionStatistics, DEFAULT_EPS,
};
use crate::error::{Error, Result};
use crate::grid::{BinaryMask, ShapeSet};
use crate::levelset::{
    init_bubbles, init_centered_circle, init_circle, init_from_mask, LevelSetField, DEFAULT_BAND_WIDTH,
};
use crate::velocity::{composite_f, FusionMode, VelocityContext};

/// Radius of the default initial circle as a fraction of the shorter side.
pub const DEFAULT_CIRCLE_FRACTION: f64 = 0.36;

#[derive(Debug, Clone, PartialEq)]
pub enum Initializer {
    /// Centered circle of radius `fraction * min(width, height)`.
    CenteredCircle { fraction: f64 },
    Circle { center: (f64, f64), radius: f64 },
    Bubbles { spacing: f64, radius: f64 },
    Mask(BinaryMask),
}

impl Default for Initializer {
    fn default() -> Self {
        Initializer::CenteredCircle {
            fraction: DEFAULT_CIRCLE_FRACTION,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionConfig {
    pub lambda: f64,
    pub sigma: f64,
    pub cfl: f64,
    pub max_iters: usize,
    pub reinit_every: usize,
    pub conv_window: usize,
    pub conv_tol: usize,
    pub mode: FusionMode,
    pub init: Initializer,
    /// Restricts statistics and motion to this region.
    pub working_mask: Option<BinaryMask>,
    pub band_width: f64,
    pub eps: f64,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            lambda: 10.0,
            sigma: 0.1,
            cfl: 0.45,
            max_iters: 1000,
            reinit_every: 20,
            conv_window: 25,
            conv_tol: 0,
            mode: FusionMode::Mutual,
            init: Initializer::default(),
            working_mask: None,
            band_width: DEFAULT_BAND_WIDTH,
            eps: DEFAULT_EPS,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(alloc::string::ToString::to_string(what)));
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad("lambda must be a finite non-negative number");
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad("cfl must be in (0, 1]");
        }
        if self.reinit_every == 0 {
            return bad("reinit_every must be at least 1");
        }
        if self.conv_window == 0 {
            return bad("conv_window must be at least 1");
        }
        if !(self.band_width >= 1.0) {
            return bad("band width must be at least 1 pixel");
        }
        if !(self.eps > 0.0 && self.eps < 0.5) {
            return bad("eps must be in (0, 0.5)");
        }
        KernelSpec::new(self.sigma)?;
        Ok(())
    }
}

/// State at the start of one iteration, plus how many pixels that iteration
/// flipped.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub energy: EnergyBreakdown,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub area: usize,
    pub changed: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvolutionTrace {
    pub records: Vec<IterationRecord>,
}

impl EvolutionTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub mask: BinaryMask,
    /// Parameters estimated on the final mask.
    pub quality: QualityParams,
    pub energy: EnergyBreakdown,
    pub trace: EvolutionTrace,
    pub converged: bool,
    pub levelset: LevelSetField,
}

/// A failed run keeps whatever trace was recorded before the failure.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionFailure {
    pub error: Error,
    pub trace: EvolutionTrace,
}

impl core::fmt::Display for EvolutionFailure {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{} (after {} iterations)", self.error, self.trace.len())
    }
}

impl core::error::Error for EvolutionFailure {}

impl From<Error> for EvolutionFailure {
    fn from(error: Error) -> Self {
        Self {
            error,
            trace: EvolutionTrace::default(),
        }
    }
}

/// What an observer sees after each step.
pub struct StepView<'a> {
    pub iteration: usize,
    /// Field before the step.
    pub levelset: &'a LevelSetField,
    pub speed: &'a [f64],
    pub record: &'a IterationRecord,
}

/// True iff the last `conv_window` iterations each flipped at most
/// `conv_tol` pixels.
pub fn check_convergence(trace: &EvolutionTrace, cfg: &EvolutionConfig) -> bool {
    let w = cfg.conv_window;
    trace.records.len() >= w && trace.records[trace.records.len() - w..].iter().all(|r| r.changed <= cfg.conv_tol)
}

pub fn initial_levelset(s: &ShapeSet, init: &Initializer) -> Result<LevelSetField> {
    let g = s.grid();
    match init {
        Initializer::CenteredCircle { fraction } => init_centered_circle(g, *fraction),
        Initializer::Circle { center, radius } => init_circle(g, *center, *radius),
        Initializer::Bubbles { spacing, radius } => init_bubbles(g, *spacing, *radius),
        Initializer::Mask(m) => {
            g.check_same(&m.grid())?;
            Ok(init_from_mask(m))
        }
    }
}

fn restrict(mask: BinaryMask, work: Option<&BinaryMask>) -> BinaryMask {
    match work {
        Some(w) => mask.intersection(w).unwrap_or(mask),
        None => mask,
    }
}

fn energy_of(s: &ShapeSet, stats: &RegionStatistics, mu: &BinaryMask, ls: &LevelSetField, cfg: &EvolutionConfig) -> Result<EnergyBreakdown> {
    let jh = stats.energy_jh();
    let mi = stats.energy_mi();
    let sd = energy_sd(s, mu)? as f64;
    // between redistancing passes the band values drift off the distance
    // scale, so measure the length on a redistanced copy
    let reg = contour_length(&ls.redistance());
    let weighted = cfg.lambda / stats.work_area as f64 * reg;
    let data = match cfg.mode {
        FusionMode::Mutual => jh + mi,
        FusionMode::Sd => sd,
    };
    Ok(EnergyBreakdown {
        jh,
        mi_surrogate: mi,
        sd,
        reg,
        total: data + weighted,
    })
}

pub fn evolve(s: &ShapeSet, cfg: &EvolutionConfig) -> core::result::Result<Outcome, EvolutionFailure> {
    evolve_with(s, cfg, |_| {})
}

/// [`evolve`] with a callback invoked after every step.
pub fn evolve_with(
    s: &ShapeSet,
    cfg: &EvolutionConfig,
    mut observe: impl FnMut(&StepView<'_>),
) -> core::result::Result<Outcome, EvolutionFailure> {
    s.require_fusable()?;
    cfg.validate()?;
    let kernel = KernelSpec::new(cfg.sigma)?;
    let work = cfg.working_mask.as_ref();
    if let Some(w) = work {
        s.grid().check_same(&w.grid())?;
    }
    let mut ls = initial_levelset(s, &cfg.init)?;
    let mut trace = EvolutionTrace::default();
    let fail = |error: Error, trace: EvolutionTrace| EvolutionFailure { error, trace };

    let mut mu = restrict(ls.extract_mask(), work);
    let mut converged = false;
    for it in 0..cfg.max_iters {
        let stats = match RegionStatistics::compute(s, &mu, kernel, work, cfg.eps) {
            Ok(st) => st,
            Err(Error::DegenerateRegion(_)) => {
                return Err(fail(Error::DegenerateEvolution { iteration: it, area: mu.area() }, trace))
            }
            Err(e) => return Err(fail(e, trace)),
        };
        let energy = energy_of(s, &stats, &mu, &ls, cfg).map_err(|e| fail(e, trace.clone()))?;
        let (p, q) = (stats.quality.p.clone(), stats.quality.q.clone());
        let area = stats.mu_area;

        let ctx = VelocityContext::new(s, stats, kernel, cfg.lambda).map_err(|e| fail(e, trace.clone()))?;
        // statistics belong to the restricted mask; check against it
        ctx.check_fresh(&mu).map_err(|e| fail(e, trace.clone()))?;
        let band = ls.band(cfg.band_width);
        let mut speed = alloc::vec![0.0; ls.grid().len()];
        for &x in &band.pixels {
            if work.is_none_or(|w| w.get(x)) {
                speed[x] = composite_f(&ctx, &ls, x, cfg.mode);
            }
        }
        if speed.iter().any(|v| !v.is_finite()) {
            return Err(fail(Error::NonFinite { iteration: it }, trace));
        }
        let max_speed = speed.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let dt = cfg.cfl / max_speed.max(1e-12);

        let mut next = ls.advance(&speed, dt);
        if (it + 1) % cfg.reinit_every == 0 {
            next = next.redistance();
        }
        let next_mu = restrict(next.extract_mask(), work);
        let changed = mu.symmetric_difference(&next_mu).map(|d| d.area()).unwrap_or(0);

        trace.records.push(IterationRecord {
            iteration: it,
            energy,
            p,
            q,
            area,
            changed,
        });
        observe(&StepView {
            iteration: it,
            levelset: &ls,
            speed: &speed,
            record: trace.records.last().expect("just pushed"),
        });
        ls = next;
        mu = next_mu;
        if check_convergence(&trace, cfg) {
            converged = true;
            break;
        }
    }

    let stats = match RegionStatistics::compute(s, &mu, kernel, work, cfg.eps) {
        Ok(st) => st,
        Err(Error::DegenerateRegion(_)) => {
            let iteration = trace.len();
            return Err(fail(Error::DegenerateEvolution { iteration, area: mu.area() }, trace));
        }
        Err(e) => return Err(fail(e, trace)),
    };
    let energy = energy_of(s, &stats, &mu, &ls, cfg).map_err(|e| fail(e, trace.clone()))?;
    Ok(Outcome {
        mask: mu,
        quality: stats.quality,
        energy,
        trace,
        converged,
        levelset: ls,
    })
}
