//! `estimate`, `simulate` and `sweep`.

use std::fmt;
use std::path::Path;

use tomoml::simulate::{counterexample_spec, noiseless_dataset, pauli_povm, sample_counts, RngSeed, SAMPLER_ALGORITHM};
use tomoml::solver::{IterationLog, SolverConfig, StepSizeRule, Termination};
use tomoml::sweep::{log_space, run_sweep, SweepRule};
use tomoml::{solve, Context64, Density64, PureState64};

use crate::exit;
use crate::formats::{
    load_initial_state, matrix_to_json, sweep_csv, to_json, write_output, ConfigEcho, DatasetFile, FormatError,
    PovmFile, ResultFile, SamplerInfo,
};
use crate::{EstimateArgs, RuleArg, SimulateArgs, SweepArgs};

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => exit::INPUT_ERROR,
            CliError::Numeric(_) => exit::NUMERIC_ERROR,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Numeric(m) => write!(f, "numerical error: {m}"),
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<tomoml::Error> for CliError {
    fn from(e: tomoml::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

fn report(result: Result<i32, CliError>) -> i32 {
    result.unwrap_or_else(|e| {
        eprintln!("tomoml: {e}");
        e.exit_code()
    })
}

pub fn exit_code(termination: Termination) -> i32 {
    match termination {
        Termination::Converged => exit::OK,
        Termination::MaxIterations => exit::MAX_ITERATIONS,
        Termination::CycleDetected => exit::CYCLE_DETECTED,
        Termination::BoundaryError => exit::NUMERIC_ERROR,
    }
}

/// Step rule and its echo, refusing flags that do not belong to the rule.
pub fn build_rule(a: &EstimateArgs) -> Result<(StepSizeRule<f64>, ConfigEcho), CliError> {
    let given = [
        ("--t", a.t.is_some(), &[RuleArg::Fixed][..]),
        ("--t-max", a.t_max.is_some(), &[RuleArg::Armijo, RuleArg::Exact][..]),
        ("--gamma", a.gamma.is_some(), &[RuleArg::Armijo][..]),
        ("--alpha0", a.alpha0.is_some(), &[RuleArg::Armijo][..]),
        ("--alpha1", a.alpha1.is_some(), &[RuleArg::Armijo][..]),
        ("--max-backtracks", a.max_backtracks.is_some(), &[RuleArg::Armijo][..]),
        ("--grid", a.grid.is_some(), &[RuleArg::Exact][..]),
        ("--refinements", a.refinements.is_some(), &[RuleArg::Exact][..]),
    ];
    for (flag, present, rules) in given {
        if present && !rules.contains(&a.rule) {
            let rule = format!("{:?}", a.rule).to_lowercase();
            return Err(CliError::Input(format!("{flag} does not apply to --rule {rule}")));
        }
    }
    let mut echo = ConfigEcho {
        rule: String::new(),
        t: None,
        t_max: None,
        gamma: None,
        alpha0: None,
        alpha1: None,
        max_backtracks: None,
        tol_iterate: a.tol,
        tol_stationarity: a.tol_stationarity,
        max_iterations: a.max_iter,
        init: a.init.clone(),
    };
    let rule = match a.rule {
        RuleArg::Rrhor => StepSizeRule::PureRrhoR,
        RuleArg::Fixed => StepSizeRule::FixedT { t: a.t.unwrap_or(1.0) },
        RuleArg::Armijo => {
            let mut rule = StepSizeRule::armijo(a.t_max.unwrap_or(1.0));
            if let StepSizeRule::Armijo { gamma, alpha0, alpha1, max_backtracks, .. } = &mut rule {
                *gamma = a.gamma.unwrap_or(*gamma);
                *alpha0 = a.alpha0.unwrap_or(*alpha0);
                *alpha1 = a.alpha1.unwrap_or(*alpha1);
                *max_backtracks = a.max_backtracks.unwrap_or(*max_backtracks);
            }
            rule
        }
        RuleArg::Exact => {
            let mut rule = StepSizeRule::exact(a.t_max.unwrap_or(1.0));
            if let StepSizeRule::ExactReference { grid, refinements, .. } = &mut rule {
                *grid = a.grid.unwrap_or(*grid);
                *refinements = a.refinements.unwrap_or(*refinements);
            }
            rule
        }
    };
    match rule {
        StepSizeRule::PureRrhoR => {}
        StepSizeRule::FixedT { t } => echo.t = Some(t),
        StepSizeRule::Armijo { t_max, gamma, alpha0, alpha1, max_backtracks } => {
            echo.t_max = Some(t_max);
            echo.gamma = Some(gamma);
            echo.alpha0 = Some(alpha0);
            echo.alpha1 = Some(alpha1);
            echo.max_backtracks = Some(max_backtracks);
        }
        StepSizeRule::ExactReference { t_max, .. } => echo.t_max = Some(t_max),
    }
    echo.rule = rule.to_string();
    rule.validate()?;
    Ok((rule, echo))
}

fn iteration_log_csv(log: &IterationLog<f64>) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Input(e.to_string());
    w.write_record(["k", "t", "loglik", "residual_extremal", "backtracks", "iterate_distance"]).map_err(fail)?;
    w.write_record(["0", "", &log.initial_loglik.to_string(), &log.initial_residual.to_string(), "0", ""])
        .map_err(fail)?;
    for r in &log.records {
        w.write_record([
            r.k.to_string(),
            r.t.to_string(),
            r.loglik.to_string(),
            r.residual_extremal.to_string(),
            r.backtracks.to_string(),
            r.iterate_distance.to_string(),
        ])
        .map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Input(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("ASCII output"))
}

fn load_context(povm: &Path, data: &Path) -> Result<Context64, CliError> {
    let povm = PovmFile::load(povm)?;
    let data = DatasetFile::load(data)?;
    Ok(Context64::new(povm, data)?)
}

pub fn estimate(a: &EstimateArgs) -> i32 {
    report(estimate_inner(a))
}

fn estimate_inner(a: &EstimateArgs) -> Result<i32, CliError> {
    let (rule, echo) = build_rule(a)?;
    let ctx = load_context(&a.povm, &a.data)?;
    let rho0 = if a.init == "mixed" {
        Density64::maximally_mixed(ctx.dim())?
    } else {
        load_initial_state(Path::new(&a.init))?
    };
    let config = SolverConfig {
        rule,
        tol_iterate: a.tol,
        tol_stationarity: a.tol_stationarity,
        max_iterations: a.max_iter,
        record_iterates: false,
    };
    config.validate()?;
    let sol = match solve(&ctx, &rho0, &config) {
        Ok(sol) => sol,
        Err(failure) => {
            if failure.log.initial_loglik.is_nan() {
                return Err(CliError::Input(failure.error.to_string()));
            }
            if let Some(path) = &a.log {
                write_output(Some(path), &iteration_log_csv(&failure.log)?)?;
            }
            return Err(CliError::Numeric(failure.to_string()));
        }
    };
    if let Some(path) = &a.log {
        write_output(Some(path), &iteration_log_csv(&sol.log)?)?;
    }
    let termination = sol.termination();
    let result = ResultFile {
        rho: matrix_to_json(sol.rho.as_operator()),
        loglik: sol.log.final_loglik(),
        iterations: sol.log.iterations(),
        termination: termination.to_string(),
        config: echo,
    };
    write_output(a.out.as_deref(), &to_json(&result))?;
    if termination != Termination::Converged {
        eprintln!("tomoml: stopped with {termination} after {} iterations", sol.log.iterations());
    }
    Ok(exit_code(termination))
}

pub fn simulate(a: &SimulateArgs) -> i32 {
    report(simulate_inner(a))
}

fn simulate_inner(a: &SimulateArgs) -> Result<i32, CliError> {
    let (povm, data) = match a.experiment.as_str() {
        "counterexample" => {
            if a.shots.is_some() {
                return Err(CliError::Input("--shots does not apply to the counterexample, whose counts are fixed".into()));
            }
            let spec = counterexample_spec::<f64>();
            (spec.povm, DatasetFile { counts: Some(vec![1, 2]), ..Default::default() })
        }
        "w-state" => {
            let povm = pauli_povm::<f64>(a.qubits)?;
            let truth = Density64::from_pure(&PureState64::w_state(a.qubits)?);
            let data = match a.shots {
                Some(shots) => DatasetFile {
                    counts: Some(sample_counts(&truth, &povm, shots, RngSeed(a.seed))?),
                    sampler: Some(SamplerInfo { algorithm: SAMPLER_ALGORITHM.into(), seed: a.seed, shots }),
                    ..Default::default()
                },
                None => DatasetFile {
                    frequencies: Some(noiseless_dataset(&truth, &povm)?.frequencies().to_vec()),
                    ..Default::default()
                },
            };
            (povm, data)
        }
        other => {
            return Err(CliError::Input(format!("unknown experiment '{other}', expected counterexample or w-state")));
        }
    };
    write_output(Some(&a.out_povm), &to_json(&PovmFile::from_povm(&povm)))?;
    write_output(Some(&a.out_data), &to_json(&data))?;
    Ok(exit::OK)
}

/// Comma-separated values or `log:LO:HI:COUNT`.
pub fn parse_t_values(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = |m: String| CliError::Input(format!("--t-values: {m}"));
    let values = if let Some(rest) = spec.strip_prefix("log:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let [lo, hi, count] = parts[..] else {
            return Err(bad(format!("expected log:LO:HI:COUNT, got '{spec}'")));
        };
        let lo: f64 = lo.trim().parse().map_err(|_| bad(format!("bad lower end '{lo}'")))?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad(format!("bad upper end '{hi}'")))?;
        let count: usize = count.trim().parse().map_err(|_| bad(format!("bad count '{count}'")))?;
        if count == 0 {
            return Err(bad("count must be at least 1".into()));
        }
        if !(lo > 0.0 && hi > 0.0) {
            return Err(bad("log range ends must be positive".into()));
        }
        log_space(lo, hi, count)
    } else {
        spec.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad(format!("bad value '{s}'"))))
            .collect::<Result<Vec<_>, _>>()?
    };
    if let Some(t) = values.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(bad(format!("every t must be positive and finite, got {t}")));
    }
    Ok(values)
}

pub fn parse_rules(spec: &str) -> Result<Vec<SweepRule>, CliError> {
    let mut rules = Vec::new();
    for name in spec.split(',').map(str::trim) {
        let rule = SweepRule::parse(name)
            .ok_or_else(|| CliError::Input(format!("--rules: unknown rule '{name}', expected armijo or fixed")))?;
        if !rules.contains(&rule) {
            rules.push(rule);
        }
    }
    Ok(rules)
}

pub fn sweep(a: &SweepArgs) -> i32 {
    report(sweep_inner(a))
}

fn sweep_inner(a: &SweepArgs) -> Result<i32, CliError> {
    let ts = parse_t_values(&a.t_values)?;
    let rules = parse_rules(&a.rules)?;
    let ctx = load_context(&a.povm, &a.data)?;
    let rho0 = Density64::maximally_mixed(ctx.dim())?;
    let mut base = SolverConfig::new(StepSizeRule::PureRrhoR);
    base.tol_iterate = a.tol;
    base.max_iterations = a.max_iter;
    base.validate()?;
    let rows = run_sweep(&ctx, &rho0, &ts, &rules, &base);
    for r in rows.iter().filter(|r| !r.converged) {
        eprintln!("tomoml: t = {}, {}: {}", r.t, r.rule.name(), r.outcome);
    }
    write_output(a.out.as_deref(), &sweep_csv(&rows)?)?;
    Ok(exit::OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_value_specs() {
        assert_eq!(parse_t_values("0.1, 1,10").unwrap(), vec![0.1, 1.0, 10.0]);
        let v = parse_t_values("log:1e-3:1e3:13").unwrap();
        assert_eq!(v.len(), 13);
        assert!((v[6] - 1.0).abs() < 1e-15);
        for bad in ["", "a,b", "log:1:2", "log:0:1:3", "0,1", "-1", "log:1:10:0"] {
            assert!(parse_t_values(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn rule_lists() {
        assert_eq!(parse_rules("fixed,armijo,fixed").unwrap(), vec![SweepRule::Fixed, SweepRule::Armijo]);
        assert!(parse_rules("armijo,newton").is_err());
    }

    #[test]
    fn exit_codes_are_stable() {
        assert_eq!(exit_code(Termination::Converged), 0);
        assert_eq!(exit_code(Termination::MaxIterations), 2);
        assert_eq!(exit_code(Termination::CycleDetected), 3);
        assert_eq!(exit::INPUT_ERROR, 4);
    }
}
