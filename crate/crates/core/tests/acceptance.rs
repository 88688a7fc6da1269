//! Acceptance gate: one line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use sharpkit::monotones::{
    measurement_robustness, optimal_guessing, tunability_robustness, tuning_value, RobustnessConfig,
};
use sharpkit::operator::{eig_hermitian, HermitianOperator};
use sharpkit::povm::{extremal_trivial, random_sharp_povm, trivial_povm, Povm};
use sharpkit::preorder::{is_preprocessing_cleaner, is_sharper, ConvertibilityStatus, FeasibilityStatus};
use sharpkit::random::{ginibre, random_distribution, random_unitary, seeded_rng};
use sharpkit::sdp::{solve, Coef, SdpProblem};
use sharpkit::verify::{run_suite, DimsConfig, Suite, SuiteReport};
use sharpkit::Result;

type Criterion = (&'static str, fn() -> Result<Outcome>);

struct Outcome {
    passed: bool,
    detail: String,
}

fn suite_outcome(report: SuiteReport, budget: Option<Duration>) -> Outcome {
    let over = budget.is_some_and(|b| report.runtime_seconds > b.as_secs_f64());
    let detail = match report.failures.first() {
        Some(f) => format!(
            "{} failure(s) in {} trials; first: seed {}, {} (violation {:.3e})",
            report.failures.len(),
            report.trials,
            f.seed,
            f.instance,
            f.violation
        ),
        None => format!("{} trials, {:.1}s", report.trials, report.runtime_seconds),
    };
    Outcome { passed: report.passed && !over, detail: if over { format!("{detail}, over budget") } else { detail } }
}

fn check(cond: bool, what: String, failures: &mut Vec<String>) {
    if !cond {
        failures.push(what);
    }
}

fn summarize(failures: Vec<String>, ok: String) -> Outcome {
    match failures.first() {
        None => Outcome { passed: true, detail: ok },
        Some(first) => Outcome { passed: false, detail: format!("{} failure(s); first: {first}", failures.len()) },
    }
}

fn blackwell() -> Result<Outcome> {
    let report = run_suite(Suite::Blackwell, 200, 1_000, &DimsConfig::default())?;
    Ok(suite_outcome(report, Some(Duration::from_secs(600))))
}

fn monotonicity() -> Result<Outcome> {
    let report = run_suite(Suite::Monotone, 100, 2_000, &DimsConfig::default())?;
    Ok(suite_outcome(report, Some(Duration::from_secs(300))))
}

fn corollary_bounds() -> Result<Outcome> {
    Ok(suite_outcome(run_suite(Suite::CorollaryBounds, 100, 3_000, &DimsConfig::default())?, None))
}

fn endpoints() -> Result<Outcome> {
    let mut failures = Vec::new();
    let mut rng = seeded_rng(4_000);
    let cfg = RobustnessConfig::default();
    for k in 0..20 {
        let d = 2 + k % 2;
        let n = 2 + (k / 2) % 2;
        let t = trivial_povm(&random_distribution(n, &mut rng), d)?;
        let r = tunability_robustness(&t, &cfg)?;
        check(
            r.lower.abs() <= 1e-6 && r.upper.abs() <= 1e-6,
            format!("trivial d={d} N={n}: [{}, {}]", r.lower, r.upper),
            &mut failures,
        );
    }
    for d in [2, 3] {
        for seed in 0..3 {
            let p = if seed == 0 { Povm::computational_basis(d) } else { random_sharp_povm(d, d, seed)? };
            let r = tunability_robustness(&p, &cfg)?;
            let target = (d - 1) as f64;
            check(
                (r.lower - target).abs() <= 1e-6 && (r.upper - target).abs() <= 1e-6,
                format!("sharp basis d={d}: [{}, {}]", r.lower, r.upper),
                &mut failures,
            );
        }
    }
    Ok(summarize(failures, "20 trivial POVMs at [0, 0]; sharp bases d = 2, 3 at [d-1, d-1]".into()))
}

fn noisy_family() -> Result<Outcome> {
    let mut failures = Vec::new();
    let basis = Povm::computational_basis(2);
    for k in 1..=9 {
        let eta = k as f64 / 10.0;
        let p = Povm::noisy_qubit_basis(eta)?;
        let oracle = (1.0 + eta) / 2.0;
        let tune = tuning_value(&p, &basis)?;
        check((tune - oracle).abs() <= 1e-6, format!("η={eta}: tuning degree {tune}"), &mut failures);
        let guess = optimal_guessing(&p)?.value;
        check((guess - oracle).abs() <= 1e-6, format!("η={eta}: guessing {guess}"), &mut failures);
        let rob = measurement_robustness(&p)?;
        check(
            (rob.sdp - eta).abs() <= 1e-7 && (rob.closed_form - eta).abs() <= 1e-7,
            format!("η={eta}: measurement robustness {} / {}", rob.sdp, rob.closed_form),
            &mut failures,
        );
        let r = tunability_robustness(&p, &RobustnessConfig::default())?;
        check(
            (r.lower - eta).abs() <= 1e-6 && (r.upper - eta).abs() <= 1e-6,
            format!("η={eta}: tunability robustness [{}, {}]", r.lower, r.upper),
            &mut failures,
        );
    }
    Ok(summarize(failures, "η = 0.1 … 0.9 match (1+η)/2 and η".into()))
}

fn pgm_sandwich() -> Result<Outcome> {
    Ok(suite_outcome(run_suite(Suite::PgmSandwich, 100, 6_000, &DimsConfig::default())?, None))
}

fn construction() -> Result<Outcome> {
    Ok(suite_outcome(run_suite(Suite::Theorem1Construction, 50, 7_000, &DimsConfig::default())?, None))
}

fn lpsr_roundtrip() -> Result<Outcome> {
    Ok(suite_outcome(run_suite(Suite::LpsrRoundtrip, 50, 8_000, &DimsConfig::default())?, None))
}

fn separations() -> Result<Outcome> {
    let i0 = extremal_trivial(1, 2, 2)?;
    let zero_i = extremal_trivial(2, 2, 2)?;
    let pre = is_preprocessing_cleaner(&i0, &zero_i)?.status;
    let sharper = is_sharper(&i0, &zero_i)?.status;
    let passed = pre == FeasibilityStatus::Infeasible && sharper == ConvertibilityStatus::Convertible;
    Ok(Outcome { passed, detail: format!("preprocessing {pre:?}, sharpness {sharper:?}") })
}

fn sdp_self_test() -> Result<Outcome> {
    let mut failures = Vec::new();
    let i2 = HermitianOperator::identity(2);
    let sz = HermitianOperator::diagonal(&[1.0, -1.0]);
    for k in 0..10 {
        let eta = 0.05 + 0.1 * k as f64;
        let u = random_unitary(2, k);
        let rho1 = u.conjugate(&i2.add(&sz.scale(eta)).scale(0.5))?;
        let rho2 = u.conjugate(&i2.sub(&sz.scale(eta)).scale(0.5))?;
        let mut p = SdpProblem::new();
        let y = p.add_hermitian("y", 2);
        p.add_objective(y, Coef::hermitian(&i2.scale(-1.0)));
        for rho in [&rho1, &rho2] {
            let s = p.add_hermitian("slack", 2);
            p.add_operator_constraint("dominance", &rho.scale(0.5), |e| {
                vec![(y, Coef::hermitian(e)), (s, Coef::hermitian(&e.scale(-1.0)))]
            });
        }
        let sol = solve(&p)?;
        check(sol.is_optimal(), format!("Helstrom η={eta}: status {:?}", sol.status), &mut failures);
        check(sol.gap <= 1e-8 * (1.0 + sol.objective.abs()), format!("Helstrom η={eta}: gap {}", sol.gap), &mut failures);
        let v = -sol.objective;
        check((v - (1.0 + eta) / 2.0).abs() <= 1e-8, format!("Helstrom η={eta}: {v}"), &mut failures);
    }
    let mut rng = seeded_rng(10_000);
    for k in 0..10 {
        let d = 2 + k % 3;
        let g = ginibre(d, d, &mut rng);
        let h = HermitianOperator::new((&g + g.adjoint()) * sharpkit::operator::C64::new(0.5, 0.0))?;
        let top = *eig_hermitian(&h)?.values.last().expect("nonempty");
        let mut p = SdpProblem::new();
        let x = p.add_hermitian("x", d);
        p.add_objective(x, Coef::hermitian(&h));
        p.add_scalar_constraint("trace", vec![(x, Coef::hermitian(&HermitianOperator::identity(d)))], 1.0);
        let sol = solve(&p)?;
        check(sol.is_optimal(), format!("eigenvalue d={d}: status {:?}", sol.status), &mut failures);
        check(sol.gap <= 1e-8 * (1.0 + sol.objective.abs()), format!("eigenvalue d={d}: gap {}", sol.gap), &mut failures);
        check((sol.objective - top).abs() <= 1e-8, format!("eigenvalue d={d}: {} vs {top}", sol.objective), &mut failures);
    }
    Ok(summarize(failures, "10 Helstrom and 10 top-eigenvalue instances within 1e-8".into()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("blackwell equivalence", blackwell),
        ("monotonicity", monotonicity),
        ("corollary bounds", corollary_bounds),
        ("faithfulness endpoints", endpoints),
        ("noisy-basis closed forms", noisy_family),
        ("pgm sandwich", pgm_sandwich),
        ("sharp preprocessing construction", construction),
        ("lpsr round trip", lpsr_roundtrip),
        ("preorder separations", separations),
        ("sdp self-test", sdp_self_test),
    ];
    let mut all = true;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run().unwrap_or_else(|e| Outcome { passed: false, detail: format!("error: {e}") });
        all &= outcome.passed;
        println!(
            "criterion {:>2} {:<34} {} ({}; {:.1}s)",
            i + 1,
            name,
            if outcome.passed { "PASS" } else { "FAIL" },
            outcome.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
