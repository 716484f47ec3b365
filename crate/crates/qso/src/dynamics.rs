//! Trajectory iteration, convergence and period classification,
//! multi-start fixed-point search, and empirical Lipschitz estimation.
//!
//! Sampling-based estimators derive one RNG stream per sample index from
//! the seed, so results are identical at any worker count.

use std::collections::VecDeque;

use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::contraction::tangent_block_norm;
use crate::error::{QsoError, Result, Sex};
use crate::model::{BisexualModel, PopulationState};
use crate::operator::{evolve, is_idempotent, jacobian};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_STEPS: usize = 100_000;
pub const DEFAULT_MAX_PERIOD: usize = 12;

/// Iteration aborts when a coordinate sum drifts this far from 1.
/// The operator preserves the sums analytically, so larger drift
/// signals a numerical pathology rather than normal rounding.
const DRIFT_LIMIT: f64 = 1e-6;

/// Sampled pairs closer than this are rejected to avoid 0/0 ratios.
const MIN_PAIR_DISTANCE: f64 = 1e-12;

/// An orbit `z0, W(z0), W^2(z0), ...` stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    points: Vec<PopulationState>,
}

impl Trajectory {
    pub fn points(&self) -> &[PopulationState] {
        &self.points
    }

    pub fn last(&self) -> &PopulationState {
        self.points.last().expect("trajectory holds at least z0")
    }
}

fn check_drift(z: &PopulationState, step: usize) -> Result<()> {
    let sx: f64 = z.x().sum();
    if (sx - 1.0).abs() > DRIFT_LIMIT {
        return Err(QsoError::SumDrift {
            step,
            sex: Sex::Female,
            sum: sx,
        });
    }
    let sy: f64 = z.y().sum();
    if (sy - 1.0).abs() > DRIFT_LIMIT {
        return Err(QsoError::SumDrift {
            step,
            sex: Sex::Male,
            sum: sy,
        });
    }
    Ok(())
}

/// Iterate the operator `steps` times, returning all `steps + 1` states.
pub fn trajectory(model: &BisexualModel, z0: &PopulationState, steps: usize) -> Result<Trajectory> {
    let mut points = Vec::with_capacity(steps + 1);
    points.push(z0.clone());
    for step in 1..=steps {
        let next = evolve(model, points.last().unwrap())?;
        check_drift(&next, step)?;
        points.push(next);
    }
    Ok(Trajectory { points })
}

/// Outcome of trajectory classification.
#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    /// Consecutive states came within `tol` and the limit candidate is
    /// idempotent at `10 * tol`.
    Converged {
        limit: PopulationState,
        steps: usize,
    },
    /// The minimal lag `2 <= p <= max_period` whose distances stayed
    /// below `tol` over a confirmation window of `2p` steps, while
    /// consecutive distances did not. `cycle` holds the last `p` states
    /// in orbit order.
    Periodic {
        period: usize,
        cycle: Vec<PopulationState>,
    },
    /// Neither condition certified within `max_steps`.
    Undecided { last: PopulationState },
}

/// A verdict together with the parameters that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub verdict: Verdict,
    pub tol: f64,
    pub max_steps: usize,
    pub max_period: usize,
}

/// Classify the trajectory started at `z0`.
///
/// Periods are scanned in ascending order each step, so a reported
/// period is minimal. `undecided` is an honest outcome; classification
/// never guesses.
pub fn classify(
    model: &BisexualModel,
    z0: &PopulationState,
    max_steps: usize,
    tol: f64,
    max_period: usize,
) -> Result<Classification> {
    if max_steps < 1 || tol.is_nan() || tol <= 0.0 || max_period < 1 {
        return Err(QsoError::InvalidParameters(format!(
            "need max_steps >= 1, tol > 0, max_period >= 1; got {max_steps}, {tol}, {max_period}"
        )));
    }
    let done = |verdict| {
        Ok(Classification {
            verdict,
            tol,
            max_steps,
            max_period,
        })
    };

    // For a lag-p scan at step t we compare states z^s and z^{s-p} for
    // the last 2p values of s, which reaches 3p states into the past.
    let window_cap = 3 * max_period;
    let mut history: VecDeque<PopulationState> = VecDeque::with_capacity(window_cap + 1);
    history.push_back(z0.clone());
    let mut current = z0.clone();

    for step in 1..=max_steps {
        let next = evolve(model, &current)?;
        check_drift(&next, step)?;
        let consecutive = next.l1_distance(&current);
        history.push_back(next.clone());
        while history.len() > window_cap + 1 {
            history.pop_front();
        }

        if consecutive < tol {
            if is_idempotent(model, &next, 10.0 * tol)? {
                return done(Verdict::Converged {
                    limit: next,
                    steps: step,
                });
            }
        } else if max_period >= 2 {
            let len = history.len();
            for period in 2..=max_period {
                if len < 3 * period + 1 {
                    break;
                }
                // history[len-1] is z^step; lag pairs for the last 2p steps.
                let confirmed = (0..2 * period).all(|back| {
                    let s = len - 1 - back;
                    history[s].l1_distance(&history[s - period]) < tol
                });
                if confirmed {
                    let cycle = history.iter().skip(len - period).cloned().collect();
                    return done(Verdict::Periodic { period, cycle });
                }
            }
        }
        current = next;
    }

    done(Verdict::Undecided { last: current })
}

/// Iterate from each start and collect the distinct idempotent limits.
///
/// Limits are verified by the idempotence test at `10 * tol` and
/// deduplicated at l1 radius `100 * tol`; starts that do not converge
/// contribute nothing.
pub fn find_fixed_points(
    model: &BisexualModel,
    starts: &[PopulationState],
    max_steps: usize,
    tol: f64,
) -> Result<Vec<PopulationState>> {
    if starts.is_empty() {
        return Err(QsoError::InvalidParameters(
            "need at least one start".into(),
        ));
    }
    let mut found: Vec<PopulationState> = Vec::new();
    for start in starts {
        let outcome = classify(model, start, max_steps, tol, DEFAULT_MAX_PERIOD)?;
        let Verdict::Converged { limit, .. } = outcome.verdict else {
            continue;
        };
        if !is_idempotent(model, &limit, 10.0 * tol)? {
            continue;
        }
        if found.iter().all(|p| p.l1_distance(&limit) > 100.0 * tol) {
            found.push(limit);
        }
    }
    Ok(found)
}

/// A sampled lower bound on the operator's l1 Lipschitz constant.
#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzEstimate {
    pub lower_bound: f64,
    /// The maximizing pair; recomputing the ratio from it reproduces
    /// `lower_bound` exactly.
    pub witness: (PopulationState, PopulationState),
    pub samples: usize,
    pub seed: u64,
}

/// RNG stream for one sample index: same key, per-index stream.
fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draw a state uniformly on the product simplex (flat Dirichlet per
/// part, via normalized exponential draws).
pub fn sample_state<R: Rng + ?Sized>(n: usize, nu: usize, rng: &mut R) -> PopulationState {
    PopulationState::new(sample_simplex(n, rng), sample_simplex(nu, rng))
        .expect("normalized draws lie on the simplex")
}

fn sample_simplex<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Array1<f64> {
    let mut v = Array1::zeros(len);
    let mut sum = 0.0;
    for e in v.iter_mut() {
        // -ln(1 - U) with U in [0, 1) is Exp(1).
        let draw = -f64::ln_1p(-rng.gen::<f64>());
        *e = draw;
        sum += draw;
    }
    if sum > 0.0 {
        v.mapv_inplace(|e| e / sum);
    } else {
        v.fill(1.0 / len as f64);
    }
    // Nudge the largest coordinate until the floating-point sum is
    // exactly 1: iteration doubles sum deviations per step, so starts
    // must not carry one.
    for _ in 0..4 {
        let err = v.sum() - 1.0;
        if err == 0.0 {
            break;
        }
        let idx = v
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        v[idx] -= err;
    }
    v
}

/// Maximize `||Wz - Wt|| / ||z - t||` over sampled pairs.
///
/// Deterministic for a given seed at any worker count: each sample uses
/// its own RNG stream and ties resolve to the smallest sample index.
pub fn empirical_lipschitz(
    model: &BisexualModel,
    samples: usize,
    seed: u64,
) -> Result<LipschitzEstimate> {
    if samples < 1 {
        return Err(QsoError::InvalidParameters("need samples >= 1".into()));
    }
    let (n, nu) = (model.n(), model.nu());

    let best = (0..samples as u64)
        .into_par_iter()
        .map(|index| {
            let mut rng = sample_rng(seed, index);
            let (z, t, dist) = loop {
                let z = sample_state(n, nu, &mut rng);
                let t = sample_state(n, nu, &mut rng);
                let dist = z.l1_distance(&t);
                if dist > MIN_PAIR_DISTANCE {
                    break (z, t, dist);
                }
            };
            let image_dist = evolve(model, &z)
                .expect("sampled state matches model dimensions")
                .l1_distance(&evolve(model, &t).expect("sampled state matches model dimensions"));
            (image_dist / dist, index, z, t)
        })
        .reduce_with(|a, b| {
            // Larger ratio wins; ties go to the smaller sample index.
            if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                b
            } else {
                a
            }
        })
        .expect("samples >= 1");

    Ok(LipschitzEstimate {
        lower_bound: best.0,
        witness: (best.2, best.3),
        samples,
        seed,
    })
}

/// Maximize the tangent-restricted norm of the Jacobian over sampled
/// states.
///
/// At a state on the simplex each column block of the Jacobian has
/// equal column sums, so the zero-sum operator norm is evaluated
/// blockwise and the larger block wins. A block with a single column
/// contributes 0 (a single type admits no scatter).
pub fn jacobian_lipschitz(model: &BisexualModel, samples: usize, seed: u64) -> Result<f64> {
    if samples < 1 {
        return Err(QsoError::InvalidParameters("need samples >= 1".into()));
    }
    let (n, nu) = (model.n(), model.nu());

    let best = (0..samples as u64)
        .into_par_iter()
        .map(|index| {
            let mut rng = sample_rng(seed, index);
            let z = sample_state(n, nu, &mut rng);
            let jac = jacobian(model, &z).expect("sampled state matches model dimensions");
            let entries = jac.entries();
            let block_norm = |cols: std::ops::Range<usize>| -> f64 {
                if cols.len() < 2 {
                    0.0
                } else {
                    tangent_block_norm(entries.slice(ndarray::s![.., cols]))
                        .expect("Jacobian blocks have equal column sums on the simplex")
                }
            };
            block_norm(0..n).max(block_norm(n..n + nu))
        })
        .reduce(|| 0.0, f64::max);

    Ok(best)
}

/// Closed form for the iterates of the interval map `x -> (1 - x) / 2`:
///
/// ```text
/// f^steps(x0) = sum_{k=1..steps} (-1)^(k+1) / 2^k  +  (-1)^steps * x0 / 2^steps
/// ```
///
/// Provided as an independent oracle for trajectories whose first
/// female coordinate follows this map.
pub fn scalar_iterate_closed_form(x0: f64, steps: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&x0) {
        return Err(QsoError::DomainError(format!(
            "x0 must lie in [0, 1], got {x0}"
        )));
    }
    let mut sum = 0.0;
    let mut power = 1.0;
    for k in 1..=steps {
        power *= 0.5;
        if k % 2 == 1 {
            sum += power;
        } else {
            sum -= power;
        }
    }
    let sign = if steps.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sum + sign * x0 * power)
}
