//! End-to-end acceptance run: one PASS/FAIL line per numbered criterion.

use std::time::Instant;

use invmetric::ball::kobayashi_ball;
use invmetric::bounds::{bracket_counts, kobayashi_upper_path, Backend, IntervalValue};
use invmetric::harness::{
    calibrate_with, sample_pairs, verify_suite, CalibrationConfig, CalibrationReport, DistanceKind, RegimeKind,
    SampleRegime, Suite, SuiteConfig, SuiteReport,
};
use invmetric::DomainSpec;

const SEED: u64 = 2024;
const CALIBRATION_PAIRS: usize = 10_000;

struct Tally {
    results: Vec<(usize, bool, String)>,
}

impl Tally {
    fn record(&mut self, id: usize, passed: bool, detail: String) {
        println!("criterion {id:>2}: {} {detail}", if passed { "PASS" } else { "FAIL" });
        self.results.push((id, passed, detail));
    }
}

fn pair_regimes(per: usize, delta_min: f64) -> Vec<SampleRegime> {
    [RegimeKind::Transversal, RegimeKind::Tangential, RegimeKind::Mixed]
        .into_iter()
        .map(|k| SampleRegime::new(k, delta_min, 0.9, per, SEED).unwrap())
        .collect()
}

fn suite(domain: &DomainSpec, s: Suite, samples: usize) -> SuiteReport {
    let cfg = SuiteConfig {
        seed: SEED,
        samples,
        ..SuiteConfig::default()
    };
    verify_suite(domain, s, &cfg).unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn failing_checks(r: &SuiteReport) -> String {
    let bad: Vec<String> = r
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{}: {}", c.name, c.detail))
        .collect();
    if bad.is_empty() {
        r.checks.iter().map(|c| c.detail.clone()).collect::<Vec<_>>().join("; ")
    } else {
        bad.join("; ")
    }
}

fn calibration(domain: &DomainSpec, distance: DistanceKind) -> CalibrationReport {
    let per = CALIBRATION_PAIRS.div_ceil(3);
    let cfg = CalibrationConfig {
        distance,
        ..CalibrationConfig::default()
    };
    calibrate_with(domain, &pair_regimes(per, 1e-4), &cfg).unwrap()
}

fn criterion_1(t: &mut Tally, ball: &DomainSpec) {
    let start = Instant::now();
    let regime = SampleRegime::new(RegimeKind::Mixed, 1e-3, 0.9, 100, SEED).unwrap();
    let pairs = sample_pairs(ball, &regime).unwrap();
    let mut worst = 0.0f64;
    let mut brackets_ok = true;
    for (z, w) in &pairs {
        let exact = kobayashi_ball(z, w).unwrap();
        let upper = kobayashi_upper_path(ball, z, w, 64, Backend::ExactBall).unwrap();
        brackets_ok &= IntervalValue::new(exact, upper.value).is_ok();
        worst = worst.max((upper.value - exact).abs() / exact);
    }
    let secs = start.elapsed().as_secs_f64();
    t.record(
        1,
        worst <= 5e-3 && secs < 60.0 && brackets_ok && pairs.len() == 100,
        format!("{} pairs, max relative error {worst:.3e}, {secs:.1} s", pairs.len()),
    );
}

fn criterion_2(t: &mut Tally, ball: &DomainSpec) {
    let s = calibration(ball, DistanceKind::Kobayashi).summary;
    let ok = s.c_emp > 0.0
        && s.c_emp < s.big_c_emp
        && s.big_c_emp.is_finite()
        && s.holdout_fraction >= 0.999
        && s.c_change < 0.10
        && s.big_c_change < 0.10;
    t.record(
        2,
        ok,
        format!(
            "{} pairs, c_emp {:.4e} (Δ {:.2e}), C_emp {:.4e} (Δ {:.2e}), holdout {}/{}",
            s.pairs, s.c_emp, s.c_change, s.big_c_emp, s.big_c_change, s.holdout_inside, s.holdout_pairs
        ),
    );
}

fn criterion_3(t: &mut Tally, ball: &DomainSpec) {
    let s = calibration(ball, DistanceKind::Bergman).summary;
    let ok = s.c_emp > 0.0 && s.c_emp <= s.big_c_emp && s.big_c_emp.is_finite() && s.stable;
    t.record(
        3,
        ok,
        format!(
            "{} pairs, c_emp {:.4e} (Δ {:.2e}), C_emp {:.4e} (Δ {:.2e}), holdout {}/{}",
            s.pairs, s.c_emp, s.c_change, s.big_c_emp, s.big_c_change, s.holdout_inside, s.holdout_pairs
        ),
    );
}

fn criterion_4(t: &mut Tally, ball: &DomainSpec) {
    let r = suite(ball, Suite::Prop2, CALIBRATION_PAIRS.div_ceil(3));
    let tangential = r.metrics["min_ratio_tangential"];
    t.record(
        4,
        r.passed && tangential > 0.0,
        format!("tangential min {tangential:.4e}; {}", failing_checks(&r)),
    );
}

fn main_suite(t: &mut Tally, id: usize, r: &SuiteReport) {
    t.record(id, r.passed, failing_checks(r));
}

fn criterion_7_8(t: &mut Tally, ball: &DomainSpec) {
    let p4 = suite(ball, Suite::Prop4, 200);
    let p5 = suite(ball, Suite::Thm5, 200);
    let bands: Vec<_> = p4.checks.iter().chain(&p5.checks).filter(|c| c.name != "tangency").collect();
    let ok = bands.iter().all(|c| c.passed);
    let detail = bands
        .iter()
        .map(|c| format!("{}: {}", c.name, if c.passed { "ok" } else { &c.detail }))
        .collect::<Vec<_>>()
        .join("; ");
    t.record(7, ok, detail);
    let tan = p4.checks.iter().find(|c| c.name == "tangency").unwrap();
    t.record(8, tan.passed, tan.detail.clone());
}

fn criterion_10(t: &mut Tally, ball: &DomainSpec) {
    let ellipsoid = DomainSpec::ellipsoid(&[1.0, 4.0]).unwrap();
    let s9 = DomainSpec::local_model_s9();
    let reports = [
        ("ball", suite(ball, Suite::SLC, 256)),
        ("ellipsoid", suite(&ellipsoid, Suite::SLC, 256)),
        ("s9", suite(&s9, Suite::SLC, 256)),
    ];
    let ok = reports.iter().all(|(_, r)| r.passed);
    let detail = reports
        .iter()
        .map(|(n, r)| format!("{n}: {}", failing_checks(r)))
        .collect::<Vec<_>>()
        .join(" | ");
    t.record(10, ok, detail);
}

fn criterion_12(t: &mut Tally, ball: &DomainSpec) {
    let s9 = DomainSpec::local_model_s9();
    let mut mismatched = Vec::new();
    for s in Suite::ALL {
        let d = if s == Suite::S9Example { &s9 } else { ball };
        let a = suite(d, s, 24).csv_string().unwrap();
        let b = suite(d, s, 24).csv_string().unwrap();
        if a != b {
            mismatched.push(s.to_string());
        }
    }
    let cal = || {
        let r = calibrate_with(ball, &pair_regimes(40, 1e-4), &CalibrationConfig::default()).unwrap();
        r.table().to_csv_string(&r.meta()).unwrap()
    };
    if cal() != cal() {
        mismatched.push("calibration".into());
    }
    t.record(
        12,
        mismatched.is_empty(),
        if mismatched.is_empty() {
            format!("{} suites and the calibration rerun byte-identical", Suite::ALL.len())
        } else {
            format!("differing CSV: {}", mismatched.join(", "))
        },
    );
}

fn main() {
    let ball = DomainSpec::unit_ball(2);
    let mut t = Tally { results: Vec::new() };

    criterion_1(&mut t, &ball);
    criterion_2(&mut t, &ball);
    criterion_3(&mut t, &ball);
    criterion_4(&mut t, &ball);
    main_suite(&mut t, 5, &suite(&ball, Suite::BaloghBonk, CALIBRATION_PAIRS.div_ceil(3)));
    main_suite(&mut t, 6, &suite(&ball, Suite::Prop3, 1000));
    criterion_7_8(&mut t, &ball);
    main_suite(&mut t, 9, &suite(&DomainSpec::local_model_s9(), Suite::S9Example, 1));
    criterion_10(&mut t, &ball);

    let (built, violated) = bracket_counts();
    t.record(11, built > 0 && violated == 0, format!("{built} brackets, {violated} violations"));

    criterion_12(&mut t, &ball);

    t.results.sort_by_key(|r| r.0);
    let failed: Vec<usize> = t.results.iter().filter(|r| !r.1).map(|r| r.0).collect();
    println!(
        "acceptance: {}/{} criteria passed",
        t.results.len() - failed.len(),
        t.results.len()
    );
    if !failed.is_empty() {
        eprintln!("failing criteria: {failed:?}");
        std::process::exit(1);
    }
}
