//! Iterative maximum-likelihood solvers: pure RρR, diluted RρR with a fixed
//! stepsize, diluted RρR with Armijo backtracking along the curved path, and
//! an exact line-search reference.

mod reference;
mod step;

use std::collections::VecDeque;
use std::fmt;

use crate::error::{Error, Result};
use crate::likelihood::{extremal_residual, ObjectiveContext};
use crate::quantum::DensityMatrix;
use crate::scalar::Real;

pub use reference::{
    check_rhobar_subproblem, exact_reference_step, gradient_related_check, log_grid, weighted_norm_sq,
    GradientRelatedCheck,
};
pub use step::{
    armijo_accepts, combined_direction, compute_directions, diluted_step, path_denominator, rrhor_step, DirectionPair,
};

/// Number of past iterates kept for cycle detection.
pub const CYCLE_WINDOW: usize = 32;

/// How the stepsize `t_k` is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepSizeRule<T> {
    PureRrhoR,
    FixedT { t: T },
    Armijo { t_max: T, gamma: T, alpha0: T, alpha1: T, max_backtracks: usize },
    ExactReference { t_max: T, grid: usize, refinements: usize },
}

impl<T: Real> StepSizeRule<T> {
    /// Armijo with `γ = 1e-4`, `α₀ = α₁ = 0.5`.
    pub fn armijo(t_max: T) -> Self {
        StepSizeRule::Armijo {
            t_max,
            gamma: T::lit(1e-4),
            alpha0: T::lit(0.5),
            alpha1: T::lit(0.5),
            max_backtracks: 60,
        }
    }

    pub fn exact(t_max: T) -> Self {
        StepSizeRule::ExactReference { t_max, grid: 200, refinements: 60 }
    }

    pub fn name(&self) -> &'static str {
        match self {
            StepSizeRule::PureRrhoR => "rrhor",
            StepSizeRule::FixedT { .. } => "fixed",
            StepSizeRule::Armijo { .. } => "armijo",
            StepSizeRule::ExactReference { .. } => "exact",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: T| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} must be positive and finite, got {v}")))
            }
        };
        match *self {
            StepSizeRule::PureRrhoR => Ok(()),
            StepSizeRule::FixedT { t } => positive("t", t),
            StepSizeRule::Armijo { t_max, gamma, alpha0, alpha1, max_backtracks } => {
                positive("t_max", t_max)?;
                if !(gamma > T::zero() && gamma < T::one()) {
                    return Err(Error::InvalidConfig(format!("gamma must lie in (0, 1), got {gamma}")));
                }
                if !(alpha0 > T::zero() && alpha0 <= alpha1 && alpha1 < T::one()) {
                    return Err(Error::InvalidConfig(format!(
                        "need 0 < alpha0 <= alpha1 < 1, got alpha0 = {alpha0}, alpha1 = {alpha1}"
                    )));
                }
                if max_backtracks == 0 {
                    return Err(Error::InvalidConfig("max_backtracks must be at least 1".into()));
                }
                Ok(())
            }
            StepSizeRule::ExactReference { t_max, grid, .. } => {
                positive("t_max", t_max)?;
                if grid < 2 {
                    return Err(Error::InvalidConfig(format!("grid needs at least 2 points, got {grid}")));
                }
                Ok(())
            }
        }
    }
}

impl<T: Real> fmt::Display for StepSizeRule<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepSizeRule::PureRrhoR => write!(f, "rrhor"),
            StepSizeRule::FixedT { t } => write!(f, "fixed(t={t})"),
            StepSizeRule::Armijo { t_max, gamma, alpha0, alpha1, max_backtracks } => write!(
                f,
                "armijo(t_max={t_max}, gamma={gamma}, alpha0={alpha0}, alpha1={alpha1}, max_backtracks={max_backtracks})"
            ),
            StepSizeRule::ExactReference { t_max, grid, refinements } => {
                write!(f, "exact(t_max={t_max}, grid={grid}, refinements={refinements})")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig<T> {
    pub rule: StepSizeRule<T>,
    /// Stop when consecutive iterates are closer than this (Frobenius).
    pub tol_iterate: T,
    /// Stop when `‖Rρ - ρ‖_F` falls below this.
    pub tol_stationarity: T,
    pub max_iterations: usize,
    /// Keep every iterate in the log.
    pub record_iterates: bool,
}

impl<T: Real> SolverConfig<T> {
    pub fn new(rule: StepSizeRule<T>) -> Self {
        Self {
            rule,
            tol_iterate: T::lit(1e-7),
            tol_stationarity: T::lit(1e-8),
            max_iterations: 100_000,
            record_iterates: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.rule.validate()?;
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(self.tol_iterate > T::zero()) || !(self.tol_stationarity > T::zero()) {
            return Err(Error::InvalidConfig("tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Termination {
    Converged,
    MaxIterations,
    CycleDetected,
    BoundaryError,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::MaxIterations => "max_iterations",
            Termination::CycleDetected => "cycle_detected",
            Termination::BoundaryError => "boundary_error",
        }
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One accepted step `ρ^{k-1} → ρ^k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord<T> {
    pub k: usize,
    /// Stepsize used; infinite for pure RρR.
    pub t: T,
    /// `F(ρ^k)`
    pub loglik: T,
    /// `‖R(ρ^k)ρ^k - ρ^k‖_F`
    pub residual_extremal: T,
    pub backtracks: usize,
    /// `‖ρ^k - ρ^{k-1}‖_F`
    pub iterate_distance: T,
}

#[derive(Clone, Debug)]
pub struct IterationLog<T> {
    pub initial_loglik: T,
    pub initial_residual: T,
    pub records: Vec<IterationRecord<T>>,
    /// `ρ^0, ρ^1, …` when the config asks for them.
    pub iterates: Vec<DensityMatrix<T>>,
    pub termination: Option<Termination>,
}

impl<T: Real> IterationLog<T> {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn final_loglik(&self) -> T {
        self.records.last().map_or(self.initial_loglik, |r| r.loglik)
    }

    /// `F` at `ρ^0, ρ^1, …`.
    pub fn logliks(&self) -> Vec<T> {
        std::iter::once(self.initial_loglik).chain(self.records.iter().map(|r| r.loglik)).collect()
    }
}

#[derive(Clone, Debug)]
pub struct Solution<T> {
    pub rho: DensityMatrix<T>,
    pub log: IterationLog<T>,
}

impl<T: Real> Solution<T> {
    pub fn termination(&self) -> Termination {
        self.log.termination.expect("set by solve")
    }
}

/// A run that stopped on a numerical error, with everything logged so far.
#[derive(Clone, Debug)]
pub struct SolveFailure<T> {
    pub error: Error,
    pub log: IterationLog<T>,
}

impl<T: Real> fmt::Display for SolveFailure<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} after {} iterations", self.error, self.log.iterations())
    }
}

impl<T: Real> std::error::Error for SolveFailure<T> {}

impl<T: Real> From<Error> for SolveFailure<T> {
    fn from(error: Error) -> Self {
        let log = IterationLog {
            initial_loglik: T::nan(),
            initial_residual: T::nan(),
            records: Vec::new(),
            iterates: Vec::new(),
            termination: None,
        };
        Self { error, log }
    }
}

fn backtrack<T: Real>(t: T, alpha0: T, alpha1: T) -> T {
    if alpha0 == alpha1 {
        t * alpha0
    } else {
        t * (alpha0 + alpha1) / T::lit(2.0)
    }
}

/// Runs the configured iteration from `rho0`.
pub fn solve<T: Real>(
    ctx: &ObjectiveContext<T>,
    rho0: &DensityMatrix<T>,
    config: &SolverConfig<T>,
) -> std::result::Result<Solution<T>, SolveFailure<T>> {
    config.validate()?;
    if rho0.dim() != ctx.dim() {
        return Err(Error::DimensionMismatch { expected: ctx.dim(), found: rho0.dim() }.into());
    }
    let policy = T::policy();
    if rho0.as_operator().min_eigenvalue()? <= T::zero() {
        let min_eigenvalue = rho0.as_operator().min_eigenvalue()?.to_f64().unwrap_or(f64::NAN);
        return Err(Error::NotInterior { min_eigenvalue }.into());
    }
    let mut eval = ctx.evaluate(rho0)?;
    let mut rho = rho0.clone();
    let mut residual = extremal_residual(&eval.gradient, rho.as_operator());
    let mut log = IterationLog {
        initial_loglik: eval.loglik,
        initial_residual: residual,
        records: Vec::new(),
        iterates: Vec::new(),
        termination: None,
    };
    if config.record_iterates {
        log.iterates.push(rho.clone());
    }
    let fail = |error: Error, mut log: IterationLog<T>| {
        log.termination = None;
        Err(SolveFailure { error, log })
    };

    let mut recent: VecDeque<DensityMatrix<T>> = VecDeque::with_capacity(CYCLE_WINDOW);
    let mut t_prev = match config.rule {
        StepSizeRule::Armijo { t_max, .. } => t_max,
        _ => T::one(),
    };
    let mut termination = Termination::MaxIterations;

    for k in 1..=config.max_iterations {
        if residual < config.tol_stationarity {
            termination = Termination::Converged;
            break;
        }
        let (next, t, backtracks) = match config.rule {
            StepSizeRule::PureRrhoR => (step::rrhor_from(&eval.gradient, &rho), T::infinity(), 0),
            StepSizeRule::FixedT { t } => (step::diluted_from(&eval.gradient, &rho, t), t, 0),
            StepSizeRule::Armijo { t_max, gamma, alpha0, alpha1, max_backtracks } => {
                let pair = step::directions_from(eval.gradient.clone(), &rho);
                if pair.trace_rrr - T::one() <= T::zero() {
                    termination = Termination::Converged;
                    break;
                }
                let cap = t_max.max(T::one());
                let mut t = t_prev.max(T::one()).min(cap);
                let mut backtracks = 0;
                loop {
                    match step::armijo_gain(ctx, &eval.probabilities, &pair, t, gamma) {
                        Ok(Some(_)) => break,
                        Ok(None) => {}
                        Err(e) => return fail(e, log),
                    }
                    if backtracks == max_backtracks {
                        return fail(Error::BacktrackLimit { iteration: k, max_backtracks }, log);
                    }
                    backtracks += 1;
                    t = backtrack(t, alpha0, alpha1);
                }
                t_prev = t;
                (step::diluted_from(&pair.gradient, &rho, t), t, backtracks)
            }
            StepSizeRule::ExactReference { t_max, grid, refinements } => {
                let pair = step::directions_from(eval.gradient.clone(), &rho);
                if pair.trace_rrr - T::one() <= T::zero() {
                    termination = Termination::Converged;
                    break;
                }
                let t = match exact_reference_step(ctx, &rho, &pair, t_max, grid, refinements) {
                    Ok(t) => t,
                    Err(e) => return fail(e, log),
                };
                (step::diluted_from(&pair.gradient, &rho, t), t, 0)
            }
        };

        let next_eval = match ctx.evaluate(&next) {
            Ok(e) => e,
            Err(Error::BoundaryLikelihood { .. }) => {
                termination = Termination::BoundaryError;
                break;
            }
            Err(e) => return fail(e, log),
        };
        if !next_eval.loglik.is_finite() {
            return fail(Error::NonFiniteObjective { iteration: k }, log);
        }
        let distance = next.as_operator().frobenius_distance(rho.as_operator())?;
        residual = extremal_residual(&next_eval.gradient, next.as_operator());
        log.records.push(IterationRecord {
            k,
            t,
            loglik: next_eval.loglik,
            residual_extremal: residual,
            backtracks,
            iterate_distance: distance,
        });
        if config.record_iterates {
            log.iterates.push(next.clone());
        }

        let cycled = matches!(config.rule, StepSizeRule::PureRrhoR)
            && distance >= config.tol_iterate
            && recent
                .iter()
                .any(|old| old.as_operator().frobenius_distance(next.as_operator()).unwrap() <= policy.cycle);
        if matches!(config.rule, StepSizeRule::PureRrhoR) {
            if recent.len() == CYCLE_WINDOW {
                recent.pop_front();
            }
            recent.push_back(rho);
        }
        rho = next;
        eval = next_eval;
        if distance < config.tol_iterate {
            termination = Termination::Converged;
            break;
        }
        if cycled {
            termination = Termination::CycleDetected;
            break;
        }
    }
    log.termination = Some(termination);
    Ok(Solution { rho, log })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use crate::hermitian::HermitianOperator;
    use crate::simulate::{counterexample_spec, random_density_matrix, w_state_spec};

    type Op = HermitianOperator<f64>;

    fn counterexample() -> ObjectiveContext<f64> {
        let spec = counterexample_spec();
        ObjectiveContext::new(spec.povm, spec.dataset).unwrap()
    }

    fn mixed() -> DensityMatrix<f64> {
        DensityMatrix::maximally_mixed(2).unwrap()
    }

    /// Fixed-t iteration on the diagonal `(a, 1 - a)` in closed form, with the
    /// solver's stopping rules.
    fn fixed_t_scalar_oracle(t: f64, max_iterations: usize) -> (usize, f64) {
        let (f0, f1) = (1.0 / 3.0, 2.0 / 3.0);
        let mut a = 0.5f64;
        for k in 1..=max_iterations {
            if 2f64.sqrt() * (f0 - a).abs() < 1e-8 {
                return (k - 1, a);
            }
            let b = 1.0 - a;
            let x = (a + t * f0).powi(2) / a;
            let y = (b + t * f1).powi(2) / b;
            let next = x / (x + y);
            let dist = 2f64.sqrt() * (next - a).abs();
            a = next;
            if dist < 1e-7 {
                return (k, a);
            }
        }
        (max_iterations, a)
    }

    #[test]
    fn defaults() {
        let c = SolverConfig::new(StepSizeRule::<f64>::PureRrhoR);
        assert_eq!(c.tol_iterate, 1e-7);
        assert_eq!(c.tol_stationarity, 1e-8);
        assert_eq!(c.max_iterations, 100_000);
        assert_eq!(StepSizeRule::<f64>::armijo(1.0).name(), "armijo");
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad = [
            StepSizeRule::FixedT { t: 0.0 },
            StepSizeRule::FixedT { t: f64::INFINITY },
            StepSizeRule::Armijo { t_max: 1.0, gamma: 1.0, alpha0: 0.5, alpha1: 0.5, max_backtracks: 10 },
            StepSizeRule::Armijo { t_max: 1.0, gamma: 1e-4, alpha0: 0.6, alpha1: 0.5, max_backtracks: 10 },
            StepSizeRule::Armijo { t_max: 1.0, gamma: 1e-4, alpha0: 0.5, alpha1: 1.0, max_backtracks: 10 },
            StepSizeRule::Armijo { t_max: 1.0, gamma: 1e-4, alpha0: 0.5, alpha1: 0.5, max_backtracks: 0 },
            StepSizeRule::ExactReference { t_max: 1.0, grid: 1, refinements: 0 },
        ];
        for rule in bad {
            let err = solve(&counterexample(), &mixed(), &SolverConfig::new(rule)).unwrap_err();
            assert!(matches!(err.error, Error::InvalidConfig(_)), "{rule}");
        }
    }

    #[test]
    fn backtrack_midpoint() {
        assert_eq!(backtrack(1.0, 0.5, 0.5), 0.5);
        assert_eq!(backtrack(1.0, 0.2, 0.6), 0.4);
    }

    #[test]
    fn pure_rrhor_cycles() {
        let mut config = SolverConfig::new(StepSizeRule::PureRrhoR);
        config.record_iterates = true;
        let sol = solve(&counterexample(), &mixed(), &config).unwrap();
        assert_eq!(sol.termination(), Termination::CycleDetected);
        assert_eq!(sol.log.iterations(), 2);
        let a = Op::from_diagonal(&[0.2, 0.8]).unwrap();
        assert!(sol.log.iterates[1].as_operator().frobenius_distance(&a).unwrap() <= 1e-12);
        assert!(sol.log.iterates[2].as_operator().frobenius_distance(mixed().as_operator()).unwrap() <= 1e-12);
    }

    #[test]
    fn armijo_counterexample() {
        let sol = solve(&counterexample(), &mixed(), &SolverConfig::new(StepSizeRule::armijo(1.0))).unwrap();
        assert_eq!(sol.termination(), Termination::Converged);
        let d = sol.rho.as_operator().diagonal();
        assert_abs_diff_eq!(d[0], 1.0 / 3.0, epsilon = 1e-6);
        assert_abs_diff_eq!(d[1], 2.0 / 3.0, epsilon = 1e-6);
        let f_star = (1.0f64 / 3.0).ln() / 3.0 + 2.0 * (2.0f64 / 3.0).ln() / 3.0;
        assert_abs_diff_eq!(sol.log.final_loglik(), f_star, epsilon = 1e-9);
        assert_abs_diff_eq!(f_star, -0.636514, epsilon = 1e-6);
        for w in sol.log.logliks().windows(2) {
            assert!(w[1] > w[0] - 1e-14);
        }
    }

    #[test]
    fn armijo_first_trial_is_clamped() {
        let config = SolverConfig::new(StepSizeRule::armijo(0.25));
        let sol = solve(&counterexample(), &mixed(), &config).unwrap();
        // first trial is max(t_max, 1) = 1 and never exceeds it
        assert!(sol.log.records.iter().all(|r| r.t <= 1.0));
        let config = SolverConfig::new(StepSizeRule::armijo(50.0));
        let sol = solve(&counterexample(), &mixed(), &config).unwrap();
        assert!(sol.log.records.iter().all(|r| r.t <= 50.0 && r.t > 0.0));
        assert_eq!(sol.termination(), Termination::Converged);
    }

    #[test]
    fn fixed_t_matches_scalar_oracle() {
        for t in [0.1, 1.0, 10.0] {
            let sol = solve(&counterexample(), &mixed(), &SolverConfig::new(StepSizeRule::FixedT { t })).unwrap();
            let (iterations, a) = fixed_t_scalar_oracle(t, 100_000);
            assert_eq!(sol.termination(), Termination::Converged, "t = {t}");
            assert_eq!(sol.log.iterations(), iterations, "t = {t}");
            assert_abs_diff_eq!(sol.rho.as_operator().get(0, 0).re, a, epsilon = 1e-12);
            assert_abs_diff_eq!(a, 1.0 / 3.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn fixed_t_regression_counts() {
        let counts: Vec<usize> = [0.1, 1.0, 10.0]
            .iter()
            .map(|&t| {
                solve(&counterexample(), &mixed(), &SolverConfig::new(StepSizeRule::FixedT { t })).unwrap().log.iterations()
            })
            .collect();
        assert_eq!(counts, vec![FIXED_T_COUNTS[0], FIXED_T_COUNTS[1], FIXED_T_COUNTS[2]]);
    }

    const FIXED_T_COUNTS: [usize; 3] = [66, 3, 77];

    #[test]
    fn exact_reference_converges() {
        let sol = solve(&counterexample(), &mixed(), &SolverConfig::new(StepSizeRule::exact(10.0))).unwrap();
        assert_eq!(sol.termination(), Termination::Converged);
        assert_abs_diff_eq!(sol.rho.as_operator().get(0, 0).re, 1.0 / 3.0, epsilon = 1e-6);
    }

    #[test]
    fn stationary_start_stops_immediately() {
        let rho = DensityMatrix::new(Op::from_diagonal(&[1.0 / 3.0, 2.0 / 3.0]).unwrap()).unwrap();
        for rule in [StepSizeRule::PureRrhoR, StepSizeRule::FixedT { t: 1.0 }, StepSizeRule::armijo(1.0)] {
            let sol = solve(&counterexample(), &rho, &SolverConfig::new(rule)).unwrap();
            assert_eq!(sol.termination(), Termination::Converged);
            assert_eq!(sol.log.iterations(), 0);
        }
    }

    #[test]
    fn max_iterations_is_reported() {
        let mut config = SolverConfig::new(StepSizeRule::FixedT { t: 1.0 });
        config.max_iterations = 3;
        let sol = solve(&counterexample(), &mixed(), &config).unwrap();
        assert_eq!(sol.termination(), Termination::MaxIterations);
        assert_eq!(sol.log.iterations(), 3);
    }

    #[test]
    fn boundary_start_is_an_error() {
        let ctx = counterexample();
        let rho = DensityMatrix::new(Op::from_diagonal(&[0.0, 1.0]).unwrap()).unwrap();
        let err = solve(&ctx, &rho, &SolverConfig::new(StepSizeRule::armijo(1.0))).unwrap_err();
        assert!(matches!(err.error, Error::NotInterior { .. }));
    }

    #[test]
    fn iterates_stay_feasible_from_random_starts() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let ctx = counterexample();
        for _ in 0..5 {
            let rho0 = random_density_matrix(2, &mut rng);
            let mut config = SolverConfig::new(StepSizeRule::armijo(10.0));
            config.record_iterates = true;
            let sol = solve(&ctx, &rho0, &config).unwrap();
            for rho in &sol.log.iterates {
                assert!((rho.as_operator().trace() - 1.0).abs() <= 1e-12);
                assert!(rho.as_operator().min_eigenvalue().unwrap() >= -1e-10);
            }
        }
    }

    #[test]
    fn w_state_two_qubits() {
        let spec = w_state_spec::<f64>(2, None).unwrap();
        let ctx = ObjectiveContext::new(spec.povm, spec.dataset).unwrap();
        let sol = solve(&ctx, &DensityMatrix::maximally_mixed(4).unwrap(), &SolverConfig::new(StepSizeRule::armijo(10.0)))
            .unwrap();
        let psi = crate::PureState::w_state(2).unwrap();
        assert!(sol.rho.fidelity_with_pure(&psi).unwrap() >= 0.999);
    }
}
