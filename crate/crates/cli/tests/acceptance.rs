//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured numbers (run with `--nocapture` to see them).

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use ridgegap::closed_form::{
    closed_form_report, transformed_function, SmoothFunction2D, DEFAULT_CHECK_GRID,
    DEFAULT_QUAD_ORDER,
};
use ridgegap::expr::{differentiate, eval, parse};
use ridgegap::extremal::{enumerate_closed_paths, sup_closed_path, sup_via_enumeration};
use ridgegap::geometry::{sample_box, BoxDomainSpec, DirectionPair};
use ridgegap::network::{build_network, Activation};
use ridgegap::paths::path_functional;
use ridgegap::ridge::{best_ridge_linf, evaluate_ridge};
use ridgegap::verify::{
    random_domain, random_expr, random_fvals, random_network, random_ridge_pair, InstanceProfile,
};
use std::process::Command;
use std::time::Instant;

fn axis_dirs() -> DirectionPair {
    DirectionPair::new(vec![1.0, 0.0], vec![0.0, 1.0]).unwrap()
}

/// Criterion 1: the closed-path supremum equals the LP error on 200 seeded
/// random instances (grids up to 12x12 and scattered sets up to 150 points
/// with level collisions), within 1e-7 whenever a closed path exists, and
/// the LP error vanishes when none exists.
#[test]
fn criterion_1_duality_equality_at_desk_scale() {
    let started = Instant::now();
    let mut with_paths = 0;
    let mut without_paths = 0;
    for trial in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0xDE5C + trial);
        let profile = if trial % 8 == 3 {
            InstanceProfile::GenericPosition { max_points: 40 }
        } else if trial % 2 == 0 {
            InstanceProfile::Grid { max_m: 12 }
        } else {
            InstanceProfile::Scattered { max_points: 150 }
        };
        let domain = random_domain(&mut rng, profile);
        let fvals = random_fvals(&mut rng, domain.len());
        let sup = sup_closed_path(&domain, &fvals);
        let best = best_ridge_linf(&domain, &fvals).expect("LP solves");
        if sup.witness.is_some() {
            with_paths += 1;
            assert!(
                (sup.value - best.error).abs() <= 1e-7,
                "trial {trial}: sup {} vs LP {}",
                sup.value,
                best.error
            );
        } else {
            without_paths += 1;
            assert!(
                best.error <= 1e-9,
                "trial {trial}: no closed path but LP error {}",
                best.error
            );
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 60, "took {elapsed:.1?}");
    println!(
        "criterion 1 PASS: 200 instances ({with_paths} with closed paths, \
         {without_paths} without), |sup - lp| <= 1e-7, in {elapsed:.1?}"
    );
}

/// Criterion 2: full enumeration soundness on 50 small instances: every
/// closed path lower-bounds the LP error, and the enumeration maximum
/// matches the max-mean-cycle value.
#[test]
fn criterion_2_lower_bound_soundness_under_full_enumeration() {
    let started = Instant::now();
    for trial in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x1e44 + trial);
        let domain = random_domain(&mut rng, InstanceProfile::Tiny { max_points: 8 });
        let fvals = random_fvals(&mut rng, domain.len());
        assert!(domain.len() <= 10);
        let best = best_ridge_linf(&domain, &fvals).expect("LP solves");
        let enumerated = enumerate_closed_paths(&domain, 8, 1_000_000);
        assert!(!enumerated.truncated);
        for cp in &enumerated.paths {
            let g = path_functional(cp, &fvals).abs();
            assert!(
                g <= best.error + 1e-8,
                "trial {trial}: G {g} above LP error {}",
                best.error
            );
        }
        let brute = sup_via_enumeration(&domain, &fvals, 8, 1_000_000);
        let exact = sup_closed_path(&domain, &fvals);
        assert!(
            (brute.value - exact.value).abs() <= 1e-9,
            "trial {trial}: enumeration {} vs mean-cycle {}",
            brute.value,
            exact.value
        );
    }
    println!(
        "criterion 2 PASS: 50 instances fully enumerated, bounds sound, \
         enumeration equals mean cycle, in {:.1?}",
        started.elapsed()
    );
}

/// Criterion 3: the product on the unit square: every route gives exactly
/// 1/4 at every grid resolution, and the quadrature self-test gives 1.
#[test]
fn criterion_3_worked_example_product_on_unit_square() {
    let started = Instant::now();
    let spec = BoxDomainSpec::new(0.0, 1.0, 0.0, 1.0, axis_dirs()).unwrap();
    let f = SmoothFunction2D::new(parse("x1*x2", 2).unwrap());
    for m in [2usize, 9, 17, 33] {
        let domain = sample_box(&spec, m).unwrap();
        let fvals = domain.tabulate(|p| f.value([p[0], p[1]])).unwrap();
        let sup = sup_closed_path(&domain, &fvals);
        let best = best_ridge_linf(&domain, &fvals).unwrap();
        assert!((sup.value - 0.25).abs() <= 1e-9, "m={m}: sup {}", sup.value);
        assert!(
            (best.error - 0.25).abs() <= 1e-9,
            "m={m}: lp {}",
            best.error
        );
    }
    let report = closed_form_report(&f, &spec, DEFAULT_CHECK_GRID, DEFAULT_QUAD_ORDER).unwrap();
    assert!((report.corner_value - 0.25).abs() <= 1e-9);
    let g = transformed_function(&f, spec.dirs()).unwrap();
    let integral = ridgegap::closed_form::mixed_partial_integral(&g, &spec, 64).unwrap();
    assert!((integral - 1.0).abs() <= 1e-8, "integral {integral}");
    assert!((integral - 4.0 * report.corner_value).abs() <= 1e-8);
    assert!(
        report.note.contains("1/4"),
        "constant-correction note missing: {}",
        report.note
    );
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 5);
    println!(
        "criterion 3 PASS: all routes 0.25 on grids 2/9/17/33, integral 1.0, \
         note present, in {elapsed:.1?}"
    );
}

/// Criterion 4: the rotated example: margin 4, transformed function is the
/// coordinate product, and the three routes agree at 1/4.
#[test]
fn criterion_4_rotated_example() {
    let started = Instant::now();
    let dirs = DirectionPair::new(vec![1.0, 1.0], vec![1.0, -1.0]).unwrap();
    let spec = BoxDomainSpec::new(0.0, 1.0, 0.0, 1.0, dirs.clone()).unwrap();
    let f = SmoothFunction2D::new(parse("x1^2 - x2^2", 2).unwrap());

    let report = closed_form_report(&f, &spec, DEFAULT_CHECK_GRID, DEFAULT_QUAD_ORDER).unwrap();
    assert!(
        (report.margin - 4.0).abs() <= 1e-9,
        "margin {}",
        report.margin
    );
    assert!(report.in_class && report.certified);

    let g = transformed_function(&f, &dirs).unwrap();
    for i in 0..=4 {
        for j in 0..=4 {
            let (y1, y2) = (i as f64 / 4.0, j as f64 / 4.0);
            assert!((g.value(y1, y2).unwrap() - y1 * y2).abs() <= 1e-12);
        }
    }

    let domain = sample_box(&spec, 9).unwrap();
    let fvals = domain.tabulate(|p| f.value([p[0], p[1]])).unwrap();
    let sup = sup_closed_path(&domain, &fvals);
    let best = best_ridge_linf(&domain, &fvals).unwrap();
    for (name, value) in [
        ("lower bound", sup.value),
        ("lp", best.error),
        ("corner", report.corner_value),
    ] {
        assert!((value - 0.25).abs() <= 1e-7, "{name} = {value}");
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 5);
    println!(
        "criterion 4 PASS: margin 4, transform is the coordinate product, \
         three routes at 0.25, in {elapsed:.1?}"
    );
}

/// Criterion 5: closed-path suprema annihilate 100 random ridge pairs and
/// 100 random tagged networks.
#[test]
fn criterion_5_annihilation() {
    let started = Instant::now();
    for trial in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0xA221 + trial);
        let domain = random_domain(&mut rng, InstanceProfile::Grid { max_m: 8 });
        let pair = random_ridge_pair(&mut rng, &domain);
        let fvals: Vec<f64> = (0..domain.len())
            .map(|i| evaluate_ridge(&pair, &domain, i).unwrap())
            .collect();
        let sup = sup_closed_path(&domain, &fvals);
        assert!(
            sup.value <= 1e-8,
            "trial {trial}: ridge pair sup {}",
            sup.value
        );
    }
    for trial in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0xB331 + trial);
        let domain = random_domain(&mut rng, InstanceProfile::Scattered { max_points: 60 });
        let net = random_network(&mut rng, &domain);
        let fvals = domain.tabulate(|p| net.evaluate(domain.dirs(), p)).unwrap();
        let sup = sup_closed_path(&domain, &fvals);
        assert!(
            sup.value <= 1e-8,
            "trial {trial}: network sup {}",
            sup.value
        );
    }
    println!(
        "criterion 5 PASS: 100 ridge pairs and 100 networks annihilated, in {:.1?}",
        started.elapsed()
    );
}

/// Criterion 6: constructed networks meet the best error plus epsilon for
/// each bundled smooth activation.
#[test]
fn criterion_6_constructive_upper_bound() {
    let spec = BoxDomainSpec::new(0.0, 1.0, 0.0, 1.0, axis_dirs()).unwrap();
    let domain = sample_box(&spec, 9).unwrap();
    let fvals = domain.tabulate(|p| Ok::<_, ()>(p[0] * p[1])).unwrap();
    for name in ["sigmoid", "tanh", "gaussian"] {
        let started = Instant::now();
        let sigma = Activation::lookup(name).unwrap();
        let build = build_network(&domain, &fvals, sigma, 0.05, 257).unwrap();
        assert!(
            build.error <= 0.25 + 0.05 + 1e-9,
            "{name}: network error {}",
            build.error
        );
        let elapsed = started.elapsed();
        assert!(elapsed.as_secs() < 30, "{name} took {elapsed:.1?}");
        println!(
            "criterion 6 PASS ({name}): network error {:.4} <= 0.30 with {} terms, in {elapsed:.1?}",
            build.error,
            build.network.terms.len()
        );
    }
}

/// Criterion 7: 500 random expressions pass the central-difference
/// derivative check and the parse-print-parse fixpoint.
#[test]
fn criterion_7_parser_and_differentiator() {
    let started = Instant::now();
    let mut checked = 0;
    for trial in 0..500u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x9a25e + trial);
        let e = random_expr(&mut rng, 2, 4);

        let printed = e.to_string();
        let reparsed = parse(&printed, 2).expect("printed form parses");
        assert_eq!(e, reparsed, "fixpoint failed for `{printed}`");

        let p = [rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)];
        let h = 1e-5;
        for var in 1..=2usize {
            let d = differentiate(&e, var);
            let exact = eval(&d, &p).unwrap();
            let mut hi = p;
            let mut lo = p;
            hi[var - 1] += h;
            lo[var - 1] -= h;
            let fd = (eval(&e, &hi).unwrap() - eval(&e, &lo).unwrap()) / (2.0 * h);
            let tol = (1e-6f64).max(1e-6 * exact.abs());
            assert!(
                (exact - fd).abs() <= tol,
                "trial {trial} d{var} of `{printed}`: {exact} vs {fd}"
            );
            checked += 1;
        }
    }
    println!(
        "criterion 7 PASS: 500 ASTs, {checked} derivative checks and fixpoints, in {:.1?}",
        started.elapsed()
    );
}

/// Criterion 8: the error command is deterministic byte for byte.
#[test]
fn criterion_8_byte_identical_reports() {
    let bin = env!("CARGO_BIN_EXE_ridgegap");
    let dir = std::env::temp_dir();
    let out1 = dir.join("ridgegap-acceptance-report-1.json");
    let out2 = dir.join("ridgegap-acceptance-report-2.json");
    let mut outputs = Vec::new();
    for out in [&out1, &out2] {
        let status = Command::new(bin)
            .env("RIDGEGAP_LOG", "quiet")
            .args([
                "error", "--f", "x1*x2", "--a", "1,0", "--b", "0,1", "--box", "0", "1", "0", "1",
                "--grid", "9", "--seed", "7", "--output",
            ])
            .arg(out)
            .status()
            .expect("binary runs");
        assert!(status.success());
        outputs.push(std::fs::read(out).expect("report written"));
    }
    assert_eq!(outputs[0], outputs[1], "reports differ between runs");
    assert!(!outputs[0].is_empty());
    let _ = std::fs::remove_file(&out1);
    let _ = std::fs::remove_file(&out2);
    println!(
        "criterion 8 PASS: two runs produced byte-identical {}-byte reports",
        outputs[0].len()
    );
}
