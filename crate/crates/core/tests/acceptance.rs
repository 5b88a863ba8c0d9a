//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on failure.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use isocap::capacity::{cap_ellipsoid, DEFAULT_QUAD_TOL};
use isocap::corpus;
use isocap::verify::{self, Check, VerifyOptions};
use isocap::{Shape, ShapeSpec};

struct Outcome {
    checks: Vec<Check>,
    summary: String,
}

fn run(n: usize, title: &str, budget: Duration, f: impl FnOnce() -> isocap::Result<Outcome>) -> bool {
    let start = Instant::now();
    let result = f();
    let elapsed = start.elapsed();
    let (pass, detail) = match result {
        Ok(o) => {
            let failures: Vec<&Check> = o.checks.iter().filter(|c| !c.pass).collect();
            let mut detail = format!("{} checks, {}", o.checks.len(), o.summary);
            for c in failures.iter().take(5) {
                detail.push_str(&format!("; failed {} {} = {:.6e} vs {:.6e} (tol {:.2e})", c.subject, c.quantity, c.value, c.reference, c.tolerance));
            }
            (failures.is_empty() && !o.checks.is_empty(), detail)
        }
        Err(e) => (false, format!("error: {e}")),
    };
    let in_time = elapsed <= budget;
    let pass = pass && in_time;
    println!(
        "criterion {n:>2} {title}: {} [{:.1} s, budget {} s{}] {detail}",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs(),
        if in_time { "" } else { ", over budget" },
    );
    pass
}

fn worst_rel(checks: &[Check]) -> f64 {
    checks.iter().map(|c| (c.value / c.reference - 1.0).abs()).fold(0.0, f64::max)
}

fn main() {
    let opts = VerifyOptions::default();
    let secs = Duration::from_secs;
    let mut all = true;

    all &= run(1, "ball equalities", secs(1), || {
        let checks = verify::ball_equalities()?;
        Ok(Outcome { summary: format!("max |slack - 1| = {:.2e}", worst_rel(&checks)), checks })
    });

    all &= run(2, "ellipsoid reference", secs(1), || {
        let oracle = 8.0 * PI / ((7.0 + 4.0 * 3f64.sqrt()).ln() / 3f64.sqrt());
        let c = cap_ellipsoid(&Shape::new(ShapeSpec::ellipsoid(&[2.0, 1.0, 1.0]))?, DEFAULT_QUAD_TOL)?.value;
        let s = cap_ellipsoid(&Shape::new(ShapeSpec::ellipsoid(&[1.0, 1.0, 1.0]))?, DEFAULT_QUAD_TOL)?.value;
        let checks = vec![
            Check::close("ellipsoid_2_1_1", "capacity", c, oracle, 1e-8),
            Check::close("sphere", "capacity", s, 4.0 * PI, 1e-9),
        ];
        Ok(Outcome { summary: format!("cap(2,1,1) = {c:.12}, oracle {oracle:.12}"), checks })
    });

    all &= run(3, "dominance over random ellipsoids", secs(30), || {
        let checks = verify::dominance(&corpus::ellipsoids(opts.seed), &opts)?;
        let min = checks.iter().map(|c| c.value).fold(f64::INFINITY, f64::min);
        Ok(Outcome { summary: format!("min slack ratio = {min:.6}"), checks })
    });

    all &= run(4, "refined bound ordering, c in {0.01, 0.1}", secs(300), || {
        let o = VerifyOptions { c_d: vec![0.01, 0.1], ..opts.clone() };
        let checks = verify::dominance(&corpus::convex(opts.seed), &o)?;
        let refined = checks.iter().filter(|c| c.quantity.starts_with(isocap::bounds::FRAENKEL_REFINED)).count();
        Ok(Outcome { summary: format!("{refined} refined-bound checks on {} shapes", corpus::convex(opts.seed).len()), checks })
    });

    all &= run(5, "G_alpha maximised by the ball", secs(600), || {
        let checks = verify::theorem3(&opts)?;
        let g0 = checks.last().map_or(f64::NAN, |c| c.value);
        Ok(Outcome { summary: format!("G_0(B_1) = {g0:.12e}"), checks })
    });

    all &= run(6, "planar T cap / P^5 maximised by the disc", secs(1), || {
        let checks = verify::theorem4()?;
        Ok(Outcome { summary: format!("disc value = {:.12e}", checks.last().map_or(f64::NAN, |c| c.value)), checks })
    });

    all &= run(7, "sausage growth rate, d = 5", secs(1800), || {
        let mut checks = verify::prop3(&opts)?;
        let b = isocap::bounds::sausage_bound_ball(5, 0.5)?;
        checks.push(Check::close("sausage_d5", "ball_bound", b, 27.0 * PI * PI, 1e-12));
        let slope = checks[0].value;
        let change = checks[3].value;
        Ok(Outcome { summary: format!("slope = {slope:.4} (pi^2 = {:.4}), |dt-halving change| = {change:.4}", PI * PI), checks })
    });

    all &= run(8, "segment family", secs(600), || {
        let checks = verify::prop1(&opts)?;
        Ok(Outcome { summary: format!("bound = {:.12}", checks[0].value), checks })
    });

    all &= run(9, "Aleksandrov-Fenchel", secs(60), || {
        let checks = verify::af(opts.seed)?;
        let min = checks.iter().filter(|c| c.quantity == "af_min_log_slack").map(|c| c.value).fold(f64::INFINITY, f64::min);
        Ok(Outcome { summary: format!("min log-slack = {min:.3e}"), checks })
    });

    all &= run(10, "scaling, monotonicity, isocapacitary floor", secs(600), || {
        let mut checks = verify::scaling(opts.seed)?;
        checks.extend(verify::properties(&opts)?);
        Ok(Outcome { summary: "scaling exact, nested pairs ordered".to_string(), checks })
    });

    println!("acceptance: {}", if all { "all criteria pass" } else { "FAILED" });
    if !all {
        std::process::exit(1);
    }
}
