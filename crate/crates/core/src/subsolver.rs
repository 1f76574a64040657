//! First-order maximization of a concave composite bound over the feasible
//! set (zero pattern plus per-BS power balls).
//!
//! Iterates live in block-normalized coordinates `y = x / sqrt(P)` where every
//! power constraint is a unit ball, so one step length fits MBS and SBS blocks
//! alike. The returned point is the best iterate seen on the exact bound, so
//! the bound never decreases relative to the start.

use serde::{Deserialize, Serialize};

use crate::beamformer::{project_in_place, BeamformerSet, Dims, PowerBudget};
use crate::clustering::Clustering;
use crate::error::{Error, Result};
use crate::surrogates::{Smoothed, Surrogate};

/// Accepted spectral steps per progress check.
const STALL_WINDOW: usize = 50;

/// What the subsolver needs from a concave objective.
pub trait ConcaveObjective {
    fn dims(&self) -> Dims;
    /// Exact value; negative infinity outside the domain.
    fn value(&self, x: &BeamformerSet) -> f64;
    /// Exact value and a subgradient (None outside the domain).
    fn subgradient(&self, x: &BeamformerSet) -> (f64, Option<BeamformerSet>);
    /// Smooth concave minorant with parameter `mu`; objectives that are
    /// already smooth ignore `mu`.
    fn smoothed(&self, x: &BeamformerSet, mu: f64) -> Smoothed;
}

impl ConcaveObjective for Surrogate<'_> {
    fn dims(&self) -> Dims {
        Surrogate::dims(self)
    }

    fn value(&self, x: &BeamformerSet) -> f64 {
        Surrogate::value(self, x)
    }

    fn subgradient(&self, x: &BeamformerSet) -> (f64, Option<BeamformerSet>) {
        let c = self.evaluate(x);
        if c.weighted_sum.is_finite() {
            (c.weighted_sum, Some(c.subgradient))
        } else {
            (c.weighted_sum, None)
        }
    }

    fn smoothed(&self, x: &BeamformerSet, mu: f64) -> Smoothed {
        Surrogate::smoothed(self, x, mu)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum StepRule {
    /// Spectral projected gradient with Armijo backtracking on the soft-min
    /// smoothing, `mu` shrinking from `mu_start` to `mu_end` by `mu_factor`
    /// whenever progress stalls; at `mu_end` the loop ends once a whole
    /// stage brings no improvement.
    Spectral { mu_start: f64, mu_end: f64, mu_factor: f64 },
    /// Projected subgradient with normalized direction and step `a / (b + i)`
    /// in normalized coordinates.
    Diminishing { a: f64, b: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SubsolverConfig {
    pub max_inner_iters: usize,
    /// Relative gain below which progress counts as stalled: per window of
    /// 50 accepted steps for the spectral rule, per 50 iterations for the
    /// diminishing rule.
    pub tol_inner: f64,
    pub step_rule: StepRule,
    pub backtrack_shrink: f64,
    pub best_iterate_tracking: bool,
    pub record_trace: bool,
}

impl Default for SubsolverConfig {
    fn default() -> Self {
        Self {
            max_inner_iters: 3000,
            tol_inner: 1e-5,
            step_rule: StepRule::Spectral { mu_start: 0.1, mu_end: 1e-5, mu_factor: 0.1 },
            backtrack_shrink: 0.5,
            best_iterate_tracking: true,
            record_trace: false,
        }
    }
}

impl SubsolverConfig {
    pub fn diminishing() -> Self {
        Self { step_rule: StepRule::Diminishing { a: 0.1, b: 10.0 }, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_inner_iters == 0 {
            return Err(Error::Config("max_inner_iters must be at least 1".into()));
        }
        if !(self.tol_inner > 0.0) {
            return Err(Error::Config("tol_inner must be positive".into()));
        }
        if !(self.backtrack_shrink > 0.0 && self.backtrack_shrink < 1.0) {
            return Err(Error::Config("backtrack_shrink must lie in (0, 1)".into()));
        }
        match self.step_rule {
            StepRule::Spectral { mu_start, mu_end, mu_factor } => {
                if !(mu_start >= mu_end && mu_end > 0.0 && mu_factor > 0.0 && mu_factor < 1.0) {
                    return Err(Error::Config("need mu_start >= mu_end > 0 and mu_factor in (0, 1)".into()));
                }
            }
            StepRule::Diminishing { a, b } => {
                if !(a > 0.0 && b > 0.0) {
                    return Err(Error::Config("diminishing step needs a, b > 0".into()));
                }
            }
        }
        Ok(())
    }
}

/// One inner iteration of the trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InnerRecord {
    pub iter: usize,
    pub value: f64,
    pub step: f64,
}

#[derive(Debug, Clone)]
pub struct SubsolveResult {
    pub x: BeamformerSet,
    pub value: f64,
    pub start_value: f64,
    pub iterations: usize,
    pub trace: Vec<InnerRecord>,
}

/// Multiplies every w block of SBS n by `P_n^e` and every v block by `P_M^e`.
fn scale_blocks(x: &mut BeamformerSet, budget: &PowerBudget, e: f64) {
    let d = x.dims();
    for k in 0..d.users {
        for n in 0..d.sbs {
            let f = budget.sbs[n].powf(e);
            x.w_mut(k, n).iter_mut().for_each(|z| *z *= f);
        }
        let f = budget.mbs.powf(e);
        x.v_mut(k).iter_mut().for_each(|z| *z *= f);
    }
}

fn scaled(x: &BeamformerSet, budget: &PowerBudget, e: f64) -> BeamformerSet {
    let mut y = x.clone();
    scale_blocks(&mut y, budget, e);
    y
}

/// `project(x + step * g)`, backtracking the step while the objective is not
/// finite at the result.
pub fn subgradient_step(
    obj: &dyn ConcaveObjective,
    x: &BeamformerSet,
    g: &BeamformerSet,
    step: f64,
    shrink: f64,
    cl: &Clustering,
    budget: &PowerBudget,
) -> Result<BeamformerSet> {
    if g.norm_sqr() == 0.0 {
        return Ok(x.clone());
    }
    let mut t = step;
    loop {
        let mut xn = x.clone();
        xn.add_scaled(t, g);
        project_in_place(&mut xn, cl, budget);
        if obj.value(&xn).is_finite() {
            return Ok(xn);
        }
        t *= shrink;
        if t < 1e-18 {
            return Err(Error::StepUnderflow(t));
        }
    }
}

/// Norm of the projected-gradient map `P(y + grad) - y` in normalized
/// coordinates, using the smoothed gradient at `mu`.
pub fn gradient_mapping_norm(
    obj: &dyn ConcaveObjective,
    x: &BeamformerSet,
    mu: f64,
    cl: &Clustering,
    budget: &PowerBudget,
) -> f64 {
    let Some(g) = obj.smoothed(x, mu).gradient else {
        return f64::INFINITY;
    };
    let y = scaled(x, budget, -0.5);
    let gy = scaled(&g, budget, 0.5);
    let mut p = y.clone();
    p.add_scaled(1.0, &gy);
    let mut px = scaled(&p, budget, 0.5);
    project_in_place(&mut px, cl, budget);
    scaled(&px, budget, -0.5).dist_sqr(&y).sqrt()
}

/// Maximizes `obj` over the feasible set from `x_init`.
pub fn solve_subproblem(
    obj: &dyn ConcaveObjective,
    x_init: &BeamformerSet,
    cl: &Clustering,
    budget: &PowerBudget,
    cfg: &SubsolverConfig,
) -> Result<SubsolveResult> {
    cfg.validate()?;
    let mut x0 = x_init.clone();
    project_in_place(&mut x0, cl, budget);
    let start_value = obj.value(&x0);
    if !start_value.is_finite() {
        return Err(Error::NonFiniteStart);
    }
    match cfg.step_rule {
        StepRule::Spectral { mu_start, mu_end, mu_factor } => {
            spectral(obj, x0, start_value, cl, budget, cfg, (mu_start, mu_end, mu_factor))
        }
        StepRule::Diminishing { a, b } => diminishing(obj, x0, start_value, cl, budget, cfg, a, b),
    }
}

struct Best {
    x: BeamformerSet,
    value: f64,
    tracking: bool,
}

impl Best {
    fn offer(&mut self, x: &BeamformerSet, value: f64) {
        if !self.tracking || value > self.value {
            self.x = x.clone();
            self.value = value;
        }
    }
}

fn spectral(
    obj: &dyn ConcaveObjective,
    x0: BeamformerSet,
    start_value: f64,
    cl: &Clustering,
    budget: &PowerBudget,
    cfg: &SubsolverConfig,
    (mu_start, mu_end, mu_factor): (f64, f64, f64),
) -> Result<SubsolveResult> {
    const ARMIJO: f64 = 1e-4;
    let mut best = Best { x: x0.clone(), value: start_value, tracking: cfg.best_iterate_tracking };
    let mut trace = Vec::new();
    let mut mu = mu_start;
    let mut x = x0;
    let mut ev = obj.smoothed(&x, mu);
    let mut g = match ev.gradient.take() {
        Some(g) => scaled(&g, budget, 0.5),
        None => return Err(Error::NonFiniteStart),
    };
    let gn = g.norm();
    let mut alpha = if gn > 0.0 { 0.1 / gn } else { 1.0 };
    let mut stage_mark = start_value;
    let mut window_mark = ev.value;
    let mut in_window = 0;
    let mut iterations = 0;
    while iterations < cfg.max_inner_iters {
        iterations += 1;
        let y = scaled(&x, budget, -0.5);
        let mut trial = y.clone();
        trial.add_scaled(alpha, &g);
        let mut tx = scaled(&trial, budget, 0.5);
        project_in_place(&mut tx, cl, budget);
        let mut dir = scaled(&tx, budget, -0.5);
        dir.add_scaled(-1.0, &y);
        let slope = g.real_dot(&dir);
        let stalled = if dir.norm_sqr() <= 1e-28 || slope <= 0.0 {
            true
        } else {
            let mut lam = 1.0;
            let accepted = loop {
                let mut yn = y.clone();
                yn.add_scaled(lam, &dir);
                // Scaling back can overshoot a budget by a few ulps; the point
                // evaluated must be the exactly feasible one that is returned.
                let mut xn = scaled(&yn, budget, 0.5);
                project_in_place(&mut xn, cl, budget);
                let evn = obj.smoothed(&xn, mu);
                if evn.value.is_finite() && evn.value >= ev.value + ARMIJO * lam * slope {
                    break Some((xn, yn, evn));
                }
                lam *= cfg.backtrack_shrink;
                if lam < 1e-18 {
                    break None;
                }
            };
            match accepted {
                None => true,
                Some((xn, yn, mut evn)) => {
                    let gnew = scaled(&evn.gradient.take().expect("finite point has a gradient"), budget, 0.5);
                    let mut s = yn;
                    s.add_scaled(-1.0, &y);
                    let mut r = gnew.clone();
                    r.add_scaled(-1.0, &g);
                    let sy = -s.real_dot(&r);
                    alpha = if sy > 0.0 { (s.norm_sqr() / sy).clamp(1e-12, 1e12) } else { 1e12_f64.min(alpha * 10.0) };
                    best.offer(&xn, evn.exact);
                    if cfg.record_trace {
                        trace.push(InnerRecord { iter: iterations, value: evn.exact, step: lam * alpha });
                    }
                    x = xn;
                    g = gnew;
                    ev = evn;
                    // Single spectral steps gain erratically, so progress is
                    // judged over a window of accepted steps.
                    in_window += 1;
                    if in_window == STALL_WINDOW {
                        let small = ev.value - window_mark <= cfg.tol_inner * ev.value.abs().max(1.0);
                        window_mark = ev.value;
                        in_window = 0;
                        small
                    } else {
                        false
                    }
                }
            }
        };
        if stalled {
            if mu <= mu_end {
                if best.value - stage_mark <= cfg.tol_inner * best.value.abs().max(1.0) {
                    break;
                }
            } else {
                mu = (mu * mu_factor).max(mu_end);
            }
            stage_mark = best.value;
            ev = obj.smoothed(&x, mu);
            match ev.gradient.take() {
                Some(gr) => g = scaled(&gr, budget, 0.5),
                None => break,
            }
            window_mark = ev.value;
            in_window = 0;
            let gn = g.norm();
            if gn > 0.0 {
                alpha = alpha.max(1e-3 / gn);
            }
        }
    }
    Ok(SubsolveResult { x: best.x, value: best.value, start_value, iterations, trace })
}

#[allow(clippy::too_many_arguments)]
fn diminishing(
    obj: &dyn ConcaveObjective,
    x0: BeamformerSet,
    start_value: f64,
    cl: &Clustering,
    budget: &PowerBudget,
    cfg: &SubsolverConfig,
    a: f64,
    b: f64,
) -> Result<SubsolveResult> {
    const WINDOW: usize = 50;
    let mut best = Best { x: x0.clone(), value: start_value, tracking: cfg.best_iterate_tracking };
    let mut trace = Vec::new();
    let mut x = x0;
    let mut mark = start_value;
    let mut iterations = 0;
    while iterations < cfg.max_inner_iters {
        let (_, g) = obj.subgradient(&x);
        let Some(g) = g else { break };
        let gy = scaled(&g, budget, 0.5);
        let gn = gy.norm();
        if gn == 0.0 {
            break;
        }
        let dir = scaled(&gy, budget, 0.5);
        let step = a / (b + iterations as f64) / gn;
        x = subgradient_step(obj, &x, &dir, step, cfg.backtrack_shrink, cl, budget)?;
        iterations += 1;
        let v = obj.value(&x);
        best.offer(&x, v);
        if cfg.record_trace {
            trace.push(InnerRecord { iter: iterations, value: v, step: step * gn });
        }
        if iterations % WINDOW == 0 {
            if best.value - mark <= cfg.tol_inner * mark.abs().max(1.0) {
                break;
            }
            mark = best.value;
        }
    }
    Ok(SubsolveResult { x: best.x, value: best.value, start_value, iterations, trace })
}
