use std::time::Instant;

use rand::Rng;

use super::SlbmConfig;
use crate::beamformer::BeamformerSet;
use crate::error::{Error, Result};
use crate::rates::Problem;
use crate::subsolver::{solve_subproblem, SubsolverConfig};
use crate::surrogates::Surrogate;
use crate::trace::{IterRecord, RunTrace};

/// Fraction of every BS budget used by the random starting point.
const START_FRACTION: f64 = 0.5;

/// Random feasible start with every BS at half of its budget.
pub fn initial_point<R: Rng + ?Sized>(problem: &Problem, rng: &mut R) -> BeamformerSet {
    BeamformerSet::random_interior(problem.dims(), &problem.clustering, &problem.budget, START_FRACTION, rng)
}

/// Start to use: the given point restricted to the feasible set, unless that
/// leaves nothing to expand around (all zero), in which case a random start.
pub(crate) fn resolve_start<R: Rng + ?Sized>(problem: &Problem, x0: Option<&BeamformerSet>, rng: &mut R) -> BeamformerSet {
    match x0 {
        Some(x) => {
            let x = crate::beamformer::project_feasible(x, &problem.clustering, &problem.budget);
            // Every bound expanded at zero is identically zero, so zero is a fixed point.
            if x.norm_sqr() > 0.0 {
                x
            } else {
                initial_point(problem, rng)
            }
        }
        None => initial_point(problem, rng),
    }
}

pub(crate) fn aborted(records: &[IterRecord], e: Error) -> Error {
    Error::Aborted { completed: records.len().saturating_sub(1), objectives: records.iter().map(|r| r.objective).collect(), source: Box::new(e) }
}

/// Successive lower-bound maximization of the problem's objective.
pub fn slbm<R: Rng + ?Sized>(
    problem: &Problem,
    cfg: &SlbmConfig,
    sub: &SubsolverConfig,
    x0: Option<&BeamformerSet>,
    rng: &mut R,
) -> Result<RunTrace> {
    cfg.validate()?;
    let start = Instant::now();
    let mut x = resolve_start(problem, x0, rng);
    let mut f = problem.objective(&x);
    let mut records = vec![IterRecord { iteration: 0, objective: f, surrogate: f, elapsed_ms: 0.0 }];
    let mut stopped_by_tolerance = false;
    let mut inner = 0;
    for t in 1..=cfg.max_outer_iters {
        let surrogate = Surrogate::expand(problem, cfg.family, &x);
        let res = solve_subproblem(&surrogate, &x, &problem.clustering, &problem.budget, sub)
            .map_err(|e| aborted(&records, e))?;
        inner += res.iterations;
        x = res.x;
        let f_new = problem.objective(&x);
        records.push(IterRecord {
            iteration: t,
            objective: f_new,
            surrogate: res.value,
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        });
        let gain = f_new - f;
        f = f_new;
        if gain <= cfg.rel_tol * f.abs() {
            stopped_by_tolerance = true;
            break;
        }
    }
    Ok(RunTrace {
        algorithm: format!("{:?}-slbm", cfg.family).to_lowercase(),
        records,
        report: problem.rate_report(&x),
        x,
        clustering: problem.clustering.clone(),
        stopped_by_tolerance,
        inner_iterations: inner,
    })
}
