//! `verify`: invariant families of the likelihood and solver on seeded random
//! instances, one report line per family.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tomoml::simulate::{random_density_matrix, random_frequencies, random_povm, random_traceless};
use tomoml::solver::{check_rhobar_subproblem, combined_direction, compute_directions, diluted_step, gradient_related_check};
use tomoml::{Context64, Dataset64, Density64, Hermitian64};

use crate::{exit, VerifyArgs};

/// Worst observed value of one invariant family against its tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyReport {
    pub name: &'static str,
    pub worst: f64,
    pub tolerance: f64,
    /// `worst` must stay at or below the tolerance when true, at or above it otherwise.
    pub upper_bound: bool,
}

impl FamilyReport {
    fn max(name: &'static str, tolerance: f64) -> Self {
        Self { name, worst: 0.0, tolerance, upper_bound: true }
    }

    fn min(name: &'static str, tolerance: f64) -> Self {
        Self { name, worst: f64::INFINITY, tolerance, upper_bound: false }
    }

    fn observe(&mut self, x: f64) {
        // NaN makes the family fail
        if x.is_nan() {
            self.worst = f64::NAN;
        } else if !self.worst.is_nan() {
            self.worst = if self.upper_bound { self.worst.max(x) } else { self.worst.min(x) };
        }
    }

    pub fn passed(&self) -> bool {
        if self.upper_bound {
            self.worst <= self.tolerance
        } else {
            self.worst >= self.tolerance
        }
    }

    pub fn line(&self) -> String {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let relation = if self.upper_bound { "<=" } else { ">=" };
        format!("{:<28} {verdict}  worst {:.3e}  (need {relation} {:.0e})", self.name, self.worst, self.tolerance)
    }
}

fn random_ctx(d: usize, rng: &mut ChaCha8Rng) -> Context64 {
    let povm = random_povm(d, d * d, rng);
    let f = random_frequencies(povm.len(), rng);
    Context64::new(povm, Dataset64::from_frequencies(f, None).expect("Dirichlet draw")).expect("matching sizes")
}

/// Data equal to the Born probabilities of `rho`, which makes `rho` stationary.
fn consistent_ctx(rho: &Density64, rng: &mut ChaCha8Rng) -> Context64 {
    let povm = random_povm(rho.dim(), rho.dim() * rho.dim(), rng);
    let p = povm.born_probabilities(rho).expect("matching dimension");
    let total: f64 = p.iter().sum();
    let f = p.iter().map(|x| x / total).collect();
    Context64::new(povm, Dataset64::from_frequencies(f, None).expect("probabilities")).expect("matching sizes")
}

/// Runs every family; identical arguments give identical reports.
pub fn run_families(trials: usize, seed: u64, dim_max: usize) -> Vec<FamilyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lemma1 = FamilyReport::max("lemma1 |Tr(R rho) - 1|", 1e-10);
    let mut lemma2 = FamilyReport::min("lemma2 Tr(R rho R) - 1", -1e-10);
    let mut lemma2_eq = FamilyReport::max("lemma2 equality |Tr - 1|", 1e-8);
    let mut lemma3 = FamilyReport::max("lemma3 subproblem residual", 1e-9);
    let mut lemma4 = FamilyReport::max("lemma4 identity gap", 1e-9);
    let mut ascent = FamilyReport::min("ascent min Tr(R d)", 0.0);
    let mut ascent_id = FamilyReport::max("ascent Tr(R dbar) identity", 1e-10);
    let mut path = FamilyReport::max("path identity", 1e-12);
    let mut fd = FamilyReport::max("gradient finite difference", 1e-5);

    for i in 0..trials {
        let d = 2 + i % (dim_max - 1);
        let ctx = random_ctx(d, &mut rng);
        let rho: Density64 = random_density_matrix(d, &mut rng);

        let report = ctx.stationarity(&rho).expect("interior point");
        lemma1.observe((report.trace_r_rho - 1.0).abs());
        lemma2.observe(report.trace_rrr - 1.0);
        lemma3.observe(check_rhobar_subproblem(&ctx, &rho).unwrap_or(f64::NAN));
        lemma4.observe(gradient_related_check(&ctx, &rho).map(|c| c.gap()).unwrap_or(f64::NAN));

        let pair = compute_directions(&ctx, &rho).expect("interior point");
        let inner_bar = pair.gradient.inner(&pair.d_bar).expect("same dimension");
        let inner_tilde = pair.gradient.inner(&pair.d_tilde).expect("same dimension");
        ascent.observe(inner_bar.min(inner_tilde));
        ascent_id.observe((inner_bar - (pair.trace_rrr - 1.0)).abs());

        let t = 10f64.powf(rng.gen_range(-3.0..=3.0));
        let end = rho.as_operator().add_scaled(&combined_direction(&pair, t), 1.0, t).expect("same dimension");
        let step = diluted_step(&ctx, &rho, t).expect("interior point");
        path.observe(end.frobenius_distance(step.as_operator()).expect("same dimension"));

        let dir: Hermitian64 = random_traceless(d, &mut rng);
        let dir = dir.scale(1.0 / dir.frobenius_norm());
        let h = 1e-6;
        let shifted = |s: f64| Density64::new(rho.as_operator().add_scaled(&dir, 1.0, s).expect("same dimension"));
        let rel = match (shifted(h), shifted(-h)) {
            (Ok(plus), Ok(minus)) => {
                let num = (ctx.log_likelihood(&plus).unwrap_or(f64::NAN) - ctx.log_likelihood(&minus).unwrap_or(f64::NAN))
                    / (2.0 * h);
                let an = ctx.directional_derivative(&rho, &dir).unwrap_or(f64::NAN);
                (num - an).abs() / an.abs()
            }
            _ => f64::NAN,
        };
        fd.observe(rel);

        let stationary = consistent_ctx(&rho, &mut rng);
        let report = stationary.stationarity(&rho).expect("interior point");
        lemma2_eq.observe((report.trace_rrr - 1.0).abs());
    }
    vec![lemma1, lemma2, lemma2_eq, lemma3, lemma4, ascent, ascent_id, path, fd]
}

pub fn run(a: &VerifyArgs) -> i32 {
    let dim_max = a.dim_max as usize;
    println!("verify: {} trials, seed {}, dimensions 2..={dim_max}", a.trials, a.seed);
    let reports = run_families(a.trials, a.seed, dim_max);
    for r in &reports {
        println!("{}", r.line());
    }
    let failed = reports.iter().filter(|r| !r.passed()).count();
    println!("{} families passed, {failed} failed", reports.len() - failed);
    if failed == 0 {
        exit::OK
    } else {
        exit::CHECK_FAILED
    }
}
