//! Derivative-free maximization with Hooke-Jeeves pattern search.
//!
//! The objectives in this crate (clearance to a sampled singular set, grown
//! square edge as a function of center) are cheap but non-smooth, which is
//! exactly the regime pattern search handles well. The implementation is
//! deterministic: given the same options and objective it always evaluates
//! the same sequence of points.

use crate::error::{Error, Result};

/// Options for [`hooke_jeeves`].
#[derive(Debug, Clone)]
pub struct HjOptions {
    /// Initial exploratory step, applied to every coordinate.
    pub initial_step: f64,
    /// Terminate once the step shrinks below this value.
    pub min_step: f64,
    /// Step contraction factor after a failed exploratory sweep.
    pub shrink_factor: f64,
    /// Hard budget on objective evaluations.
    pub max_evals: usize,
}

impl HjOptions {
    /// Validates the parameter ranges (`0 < min_step < initial_step`,
    /// `0 < shrink < 1`, `max_evals >= 1`).
    pub fn new(
        initial_step: f64,
        min_step: f64,
        shrink_factor: f64,
        max_evals: usize,
    ) -> Result<Self> {
        if !(initial_step.is_finite() && min_step.is_finite() && shrink_factor.is_finite()) {
            return Err(Error::InvalidArgument(
                "pattern search options must be finite".into(),
            ));
        }
        if !(min_step > 0.0 && min_step < initial_step) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < min_step < initial_step, got min_step={min_step}, initial_step={initial_step}"
            )));
        }
        if !(shrink_factor > 0.0 && shrink_factor < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < shrink_factor < 1, got {shrink_factor}"
            )));
        }
        if max_evals == 0 {
            return Err(Error::InvalidArgument("max_evals must be at least 1".into()));
        }
        Ok(Self {
            initial_step,
            min_step,
            shrink_factor,
            max_evals,
        })
    }
}

/// Outcome of a pattern search run.
#[derive(Debug, Clone)]
pub struct HjResult {
    /// Best point found.
    pub x: Vec<f64>,
    /// Objective value at `x`; the maximum over every evaluation performed.
    pub value: f64,
    /// Number of objective evaluations.
    pub evals: usize,
    /// True when the run stopped on the evaluation budget rather than on
    /// step-size convergence.
    pub budget_exhausted: bool,
}

/// Maximizes `f` from `x0` by coordinate exploration plus pattern moves.
///
/// Each exploratory sweep tries `+step` then `-step` on every coordinate,
/// keeping strict improvements. A successful sweep is followed by pattern
/// moves that extrapolate along the accepted displacement for as long as
/// they keep improving. A failed sweep contracts the step by
/// `options.shrink`; the search stops when the step drops below
/// `options.min_step` or the evaluation budget is spent.
pub fn hooke_jeeves(
    f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    options: &HjOptions,
) -> HjResult {
    assert!(!x0.is_empty(), "need at least one coordinate");
    let mut s = Search {
        f,
        evals: 0,
        max_evals: options.max_evals,
        best_f: f64::NEG_INFINITY,
        best_x: x0.to_vec(),
    };

    let mut base = x0.to_vec();
    let mut f_base = s.eval(&base);
    let mut step = options.initial_step;
    let mut budget_exhausted = false;

    'outer: while step >= options.min_step {
        if s.spent() {
            budget_exhausted = true;
            break;
        }
        // Exploratory sweep around the current base.
        let mut trial = base.clone();
        let mut f_trial = f_base;
        if !explore(&mut s, &mut trial, &mut f_trial, step) {
            budget_exhausted = true;
            break;
        }
        if f_trial > f_base {
            // Pattern moves: extrapolate along base -> trial while it helps.
            loop {
                let prev = std::mem::replace(&mut base, trial.clone());
                f_base = f_trial;
                if s.spent() {
                    budget_exhausted = true;
                    break 'outer;
                }
                let mut pattern: Vec<f64> = base
                    .iter()
                    .zip(prev.iter())
                    .map(|(b, p)| b + (b - p))
                    .collect();
                let mut f_pattern = s.eval(&pattern);
                if !explore(&mut s, &mut pattern, &mut f_pattern, step) {
                    budget_exhausted = true;
                    break 'outer;
                }
                // Continue only on meaningful progress: near a maximizer
                // the explored pattern point can beat the base by a
                // rounding-level amount every round, and a strict
                // comparison would keep the chain (and the budget) going
                // without the step ever shrinking.
                if f_pattern > f_base + 1e-12 * (1.0 + f_base.abs()) {
                    trial = pattern;
                    f_trial = f_pattern;
                } else {
                    break;
                }
            }
        } else {
            step *= options.shrink_factor;
        }
    }

    HjResult {
        x: s.best_x,
        value: s.best_f,
        evals: s.evals,
        budget_exhausted,
    }
}

struct Search<F: FnMut(&[f64]) -> f64> {
    f: F,
    evals: usize,
    max_evals: usize,
    best_f: f64,
    best_x: Vec<f64>,
}

impl<F: FnMut(&[f64]) -> f64> Search<F> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        self.evals += 1;
        let v = (self.f)(x);
        if v > self.best_f {
            self.best_f = v;
            self.best_x = x.to_vec();
        }
        v
    }

    fn spent(&self) -> bool {
        self.evals >= self.max_evals
    }
}

/// One first-improvement coordinate sweep around `x`, updating `x` and
/// `f_x` in place. Returns false when the evaluation budget ran out.
fn explore<F: FnMut(&[f64]) -> f64>(
    s: &mut Search<F>,
    x: &mut [f64],
    f_x: &mut f64,
    step: f64,
) -> bool {
    for i in 0..x.len() {
        for dir in [1.0, -1.0] {
            if s.spent() {
                return false;
            }
            x[i] += dir * step;
            let v = s.eval(x);
            if v > *f_x {
                *f_x = v;
                break;
            }
            x[i] -= dir * step;
        }
    }
    true
}
