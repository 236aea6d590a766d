//! Iteration counts over a grid of stepsizes, one solver run per
//! `(t, rule)` cell.

use rayon::prelude::*;

use crate::likelihood::ObjectiveContext;
use crate::quantum::DensityMatrix;
use crate::scalar::Real;
use crate::solver::{solve, SolverConfig, StepSizeRule, Termination};

/// Rules compared in a sweep. For `Armijo`, the swept `t` is used as `t_max`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SweepRule {
    Armijo,
    Fixed,
}

impl SweepRule {
    pub fn name(&self) -> &'static str {
        match self {
            SweepRule::Armijo => "armijo",
            SweepRule::Fixed => "fixed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "armijo" => Some(SweepRule::Armijo),
            "fixed" => Some(SweepRule::Fixed),
            _ => None,
        }
    }

    pub fn rule<T: Real>(&self, t: T) -> StepSizeRule<T> {
        match self {
            SweepRule::Armijo => StepSizeRule::armijo(t),
            SweepRule::Fixed => StepSizeRule::FixedT { t },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow<T> {
    pub t: T,
    pub rule: SweepRule,
    pub iterations: usize,
    pub converged: bool,
    pub final_loglik: T,
    /// Termination reason, or the error message of a failed run.
    pub outcome: String,
}

/// `count` log-spaced values from `lo` to `hi` inclusive.
pub fn log_space<T: Real>(lo: T, hi: T, count: usize) -> Vec<T> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            let last = T::from_usize(count - 1).unwrap();
            (0..count)
                .map(|i| T::lit(10.0).powf(a + (b - a) * T::from_usize(i).unwrap() / last))
                .collect()
        }
    }
}

/// Runs every `(t, rule)` cell in parallel. `base` supplies tolerances and
/// the iteration cap; its rule is replaced per cell. Rows are sorted by `t`,
/// then rule name, and failed runs are reported as non-converged rows.
pub fn run_sweep<T: Real>(
    ctx: &ObjectiveContext<T>,
    rho0: &DensityMatrix<T>,
    t_values: &[T],
    rules: &[SweepRule],
    base: &SolverConfig<T>,
) -> Vec<SweepRow<T>> {
    let cells: Vec<(T, SweepRule)> = t_values.iter().flat_map(|&t| rules.iter().map(move |&r| (t, r))).collect();
    let mut rows: Vec<SweepRow<T>> = cells
        .into_par_iter()
        .map(|(t, rule)| {
            let config = SolverConfig { rule: rule.rule(t), record_iterates: false, ..*base };
            match solve(ctx, rho0, &config) {
                Ok(sol) => {
                    let termination = sol.termination();
                    SweepRow {
                        t,
                        rule,
                        iterations: sol.log.iterations(),
                        converged: termination == Termination::Converged,
                        final_loglik: sol.log.final_loglik(),
                        outcome: termination.to_string(),
                    }
                }
                Err(failure) => SweepRow {
                    t,
                    rule,
                    iterations: failure.log.iterations(),
                    converged: false,
                    final_loglik: failure.log.final_loglik(),
                    outcome: failure.error.to_string(),
                },
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        a.t.partial_cmp(&b.t)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.rule.name().cmp(b.rule.name()))
    });
    rows
}
