#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Acceptance runner: one line per criterion, nonzero exit on any failure.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use fermat_chabauty::chabauty::{chabauty_distance, Patch};
use fermat_chabauty::forest::{
    density_ratio, empty_rectangle_search, verify_empty, SearchOptions, SpiralSource,
};
use fermat_chabauty::lattice::{covolume, fit_lattice, gauss_reduce, lattice_ball, same_lattice, Basis2};
use fermat_chabauty::limits::{
    empirical_limit_patch, empirical_vs_predicted, finite_covolume_determinants, group_closure, predicted_basis,
    rotation_orbit, BetaMode, ComparisonReport, PredictionInput,
};
use fermat_chabauty::number_theory::{convergents, triplet, verify_cf_identities};
use fermat_chabauty::spiral::Spiral;
use fermat_chabauty::{AngleSpec, Point2};
use num_traits::{One, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn quadratics() -> Vec<(&'static str, AngleSpec)> {
    vec![
        ("phi", AngleSpec::golden()),
        ("sqrt2", AngleSpec::quadratic(0, 1, 1, 2).unwrap()),
        ("sqrt3", AngleSpec::quadratic(0, 1, 1, 3).unwrap()),
        ("(1+sqrt13)/2", AngleSpec::quadratic(1, 1, 2, 13).unwrap()),
    ]
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn cf_identities() -> Outcome {
    let bound = 2f64.powi(-80);
    let mut worst = 0.0f64;
    for (name, alpha) in quadratics() {
        let report = verify_cf_identities(&alpha, 1..=40).map_err(err)?;
        if report.rows.len() != 40 {
            return Err(format!("{name}: {} rows", report.rows.len()));
        }
        if let Some(r) = report.rows.iter().find(|r| !(r.residual < bound)) {
            return Err(format!("{name}: residual {:e} at j={}", r.residual, r.j));
        }
        if let Some(r) = report.rows.iter().find(|r| !r.sign_product_negative) {
            return Err(format!("{name}: sign product not certified negative at j={}", r.j));
        }
        worst = worst.max(report.max_residual());
    }
    Ok(format!("4 angles x 40 indices, max residual {worst:e}"))
}

fn sunflower_triplet() -> Outcome {
    let t = triplet(&AngleSpec::golden(), 40).map_err(err)?;
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let beta_gap = (t.beta.value - phi).abs();
    let c_gap = (t.c.value.abs() - 1.0 / 5f64.sqrt()).abs();
    let opposite = matches!(
        (t.c.sign(), t.ctilde.sign()),
        (Some(a), Some(b)) if a != b && a != std::cmp::Ordering::Equal && b != std::cmp::Ordering::Equal
    );
    let msg = format!("|beta-phi|={beta_gap:e}, ||c|-1/sqrt5|={c_gap:e}, c={:.12}, c~={:.12}", t.c.value, t.ctilde.value);
    if beta_gap < 1e-8 && c_gap < 1e-6 && opposite {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// Exhaustive nearest neighbour: seed a radius from nearby indices, then scan every
/// index whose radius `√m` is within that distance of `√n`.
fn brute_nearest(spiral: &Spiral, n: u64) -> (u64, f64) {
    let consider = |best: &mut (u64, f64), m: u64| {
        if m != n && m >= 1 {
            let d = spiral.displacement(m, n).norm();
            if d < best.1 || (d == best.1 && m < best.0) {
                *best = (m, d);
            }
        }
    };
    let mut best = (0u64, f64::INFINITY);
    for k in 1..=64u64 {
        consider(&mut best, n + k);
        if k < n {
            consider(&mut best, n - k);
        }
    }
    let r = (n as f64).sqrt();
    let reach = best.1 * (1.0 + 1e-9) + 1e-9;
    let lo = ((r - reach).max(0.0).powi(2)).floor() as u64;
    let hi = ((r + reach).powi(2)).ceil() as u64;
    for m in lo.max(1)..=hi {
        consider(&mut best, m);
    }
    best
}

fn closest_point() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    let samples: Vec<u64> = (0..1000).map(|_| rng.gen_range(1_000..=1_000_000)).collect();
    let mut lines = Vec::new();
    let mut failures = Vec::new();
    for (name, alpha) in quadratics().into_iter().take(2) {
        let spiral = Spiral::with_defaults(&alpha).map_err(err)?;
        let denominators: Vec<u64> = convergents(&alpha, 40)
            .map_err(err)?
            .iter()
            .filter_map(|c| u64::try_from(&c.q).ok())
            .collect();
        let mut hits = 0;
        for &n in &samples {
            let (m, d) = brute_nearest(&spiral, n);
            let offset = m.abs_diff(n);
            if denominators.contains(&offset) {
                hits += 1;
            } else {
                failures.push(format!("{name} n={n}: nearest m={m} offset {offset} distance {d:.9}"));
            }
        }
        lines.push(format!("{name} {hits}/{}", samples.len()));
    }
    if failures.is_empty() {
        Ok(lines.join(", "))
    } else {
        for f in &failures {
            println!("    {f}");
        }
        Err(format!("{} exceptions ({})", failures.len(), lines.join(", ")))
    }
}

fn predicted_covolume() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    let mut worst = 0.0f64;
    for k in 0..20 {
        let t = rng.gen_range(0.2..5.0);
        let theta = rng.gen_range(0.0..2.0 * PI);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let input = PredictionInput::sunflower(sign, t, theta).map_err(err)?;
        let area = covolume(&predicted_basis(&input).basis).map_err(err)?;
        worst = worst.max((area - PI).abs());
    }
    if !(worst < 1e-9) {
        return Err(format!("covolume gap {worst:e}"));
    }
    for (name, alpha) in quadratics() {
        for (j, det) in finite_covolume_determinants(&alpha, 1..=40).map_err(err)? {
            if !det.abs().is_one() {
                return Err(format!("{name}: determinant {det} at j={j}"));
            }
        }
    }
    Ok(format!("20 samples, max |covol-pi|={worst:e}; |det|=1 for j<=40 on 4 angles"))
}

fn empirical_convergence(report: &ComparisonReport) -> Outcome {
    for r in &report.rows {
        println!(
            "    j={:>2} n={:>11} proof={:.5} (W={}) theorem={:.5} (W={}) points={}",
            r.center.j,
            r.center.n,
            r.proof_form.value,
            r.proof_form.window_radius,
            r.theorem_form.value,
            r.theorem_form.window_radius,
            r.points
        );
    }
    let d: Vec<f64> = report.rows.iter().map(|r| r.proof_form.value).collect();
    if d.len() < 10 {
        return Err(format!("only {} rows", d.len()));
    }
    let min = |s: &[f64]| s.iter().copied().fold(f64::INFINITY, f64::min);
    let tail3 = &d[d.len() - 3..];
    let (first, last) = (min(&d[..5]), min(&d[d.len() - 5..]));
    let msg = format!(
        "last three {:.4?}, min first5 {first:.4} vs last5 {last:.4}, verdict {:?}",
        tail3, report.verdict
    );
    if tail3.iter().all(|&x| x < 0.1) && last < first {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn fitted_lattice(report: &ComparisonReport) -> Outcome {
    let row = report.last().ok_or("no rows")?;
    let fit = row
        .fit
        .as_ref()
        .ok_or_else(|| format!("fit failed at j={}: {:?}", row.center.j, row.fit_error))?;
    let cov_gap = (fit.fit.covolume - PI).abs();
    let msg = format!(
        "j={} covolume {:.8} (gap {cov_gap:.2e}), shortest-vector gap {:.2e}",
        row.center.j, fit.fit.covolume, fit.shortest_vector_gap
    );
    if cov_gap <= 0.05 && fit.shortest_vector_gap <= 0.05 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn group_structure(spiral: &Spiral, n: u64) -> Outcome {
    let patch = empirical_limit_patch(spiral, n, 8.0).map_err(err)?.patch;
    let c = group_closure(&patch, 0.05);
    let msg = format!(
        "n={n}: {} sums, {} inverses, {} violations, worst gaps {:.2e}/{:.2e}",
        c.sums_checked, c.inverses_checked, c.violations(), c.worst_sum_gap, c.worst_inverse_gap
    );
    if c.violations() == 0 && c.sums_checked > 0 && c.inverses_checked > 0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn dense_forest() -> Outcome {
    let opts = SearchOptions::default();
    let eps = 0.2;
    let mut parts = Vec::new();
    let golden = SpiralSource::new(&AngleSpec::golden(), 5000.0).map_err(err)?;
    for v in [10.0, 20.0, 40.0] {
        let w = empty_rectangle_search(&golden, eps, v, &opts)
            .map_err(err)?
            .ok_or_else(|| format!("phi: no empty {eps}x{v} rectangle"))?;
        if !verify_empty(&golden, &w.probe).map_err(err)? {
            return Err(format!("phi: witness for V={v} failed verification"));
        }
        parts.push(format!("phi V={v} at ({:.1},{:.1})", w.probe.center.x, w.probe.center.y));
    }
    let half = SpiralSource::new(&AngleSpec::rational(1, 2).map_err(err)?, 5000.0).map_err(err)?;
    for v in [10.0, 1000.0, 9000.0] {
        let w = empty_rectangle_search(&half, eps, v, &opts)
            .map_err(err)?
            .ok_or_else(|| format!("1/2: no empty {eps}x{v} rectangle"))?;
        if !verify_empty(&half, &w.probe).map_err(err)? {
            return Err(format!("1/2: witness for V={v} failed verification"));
        }
        parts.push(format!("1/2 V={v}"));
    }
    Ok(parts.join(", "))
}

fn rotation_check(spiral: &Spiral, n: u64) -> Outcome {
    let report = rotation_orbit(spiral, n, 0..=20, 8.0, 0.05).map_err(err)?;
    for e in report.entries.iter().filter(|e| !e.matched) {
        println!("    b={} center={} gap={:.3e} error={:?}", e.b, e.center, e.generator_distance, e.error);
    }
    let msg = format!("{}/21 matched at base n={n}", report.matches);
    if report.matches >= 18 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn random_patch(rng: &mut ChaCha8Rng) -> Patch {
    let k = rng.gen_range(1..=12);
    let pts = (0..k)
        .map(|_| Point2::new(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)))
        .collect();
    Patch::new(pts, 1e6, "random").unwrap()
}

fn integer_shortest(b: &Basis2) -> i64 {
    let (a, c) = (b.v1.x as i64, b.v1.y as i64);
    let (e, f) = (b.v2.x as i64, b.v2.y as i64);
    let det = a * f - c * e;
    let bound = b.v1.norm().min(b.v2.norm()).ceil() as i64;
    let mut best = i64::MAX;
    for x in -bound..=bound {
        for y in -bound..=bound {
            let member = (x * f - y * e) % det == 0 && (a * y - c * x) % det == 0;
            if (x, y) != (0, 0) && member {
                best = best.min(x * x + y * y);
            }
        }
    }
    best
}

fn property_suites() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0010);
    let slack = 1e-8;
    for i in 0..200 {
        let (a, b, c) = (random_patch(&mut rng), random_patch(&mut rng), random_patch(&mut rng));
        let d = |x: &Patch, y: &Patch| chabauty_distance(x, y).map_err(err);
        let (ab, ba, bc, ac, aa) = (d(&a, &b)?, d(&b, &a)?, d(&b, &c)?, d(&a, &c)?, d(&a, &a)?);
        if aa > slack || (ab - ba).abs() > slack || ac > ab + bc + slack || !(0.0..=1.0).contains(&ab) {
            return Err(format!("metric triple {i}: d(a,a)={aa} d(a,b)={ab} d(b,a)={ba} d(b,c)={bc} d(a,c)={ac}"));
        }
    }
    let mut bases = 0;
    while bases < 100 {
        let mut v = || rng.gen_range(-50i64..=50) as f64;
        let (x1, y1, x2, y2) = (v(), v(), v(), v());
        if x1 * y2 - y1 * x2 == 0.0 {
            continue;
        }
        bases += 1;
        let b = Basis2::new(Point2::new(x1, y1), Point2::new(x2, y2)).map_err(err)?;
        let r = gauss_reduce(&b).map_err(err)?;
        let brute = integer_shortest(&b) as f64;
        if (r.v1().norm_sq() - brute).abs() > 1e-9 * brute.max(1.0) {
            return Err(format!("reduction of {b:?}: |v1|^2={} vs brute force {brute}", r.v1().norm_sq()));
        }
    }
    let mut fits = 0;
    while fits < 50 {
        let l1 = rng.gen_range(0.3..1.5);
        let turn = rng.gen_range(0.0..2.0 * PI);
        let v1 = Point2::from_polar(l1, turn);
        let v2 = Point2::from_polar(l1 * rng.gen_range(1.0..1.8), turn + rng.gen_range(1.1..2.0));
        let r = gauss_reduce(&Basis2::new(v1, v2).map_err(err)?).map_err(err)?;
        if r.v1().norm() < 0.3 {
            continue;
        }
        fits += 1;
        let ball = lattice_ball(&r.basis, 10.0 * r.v2().norm()).map_err(err)?;
        let fit = fit_lattice(&ball, 0.05).map_err(err)?;
        if !(fit.residual < 1e-9) || !same_lattice(&r.basis, &fit.basis.basis, 1e-9).map_err(err)?.equal {
            return Err(format!("fit of ball around {:?} did not recover it", r.basis));
        }
    }
    Ok("200 metric triples, 100 integer reductions, 50 fit-of-ball round trips".into())
}

fn density() -> Outcome {
    let mut parts = Vec::new();
    for r in [10.0, 100.0, 1000.0] {
        let d = density_ratio(r, 1).map_err(err)?;
        let gap = (d.ratio - 1.0).abs();
        if gap > 1.0 / (r * r) {
            return Err(format!("r={r}: ratio {} gap {gap:e}", d.ratio));
        }
        parts.push(format!("r={r} gap {gap:e}"));
    }
    Ok(parts.join(", "))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut failed = 0;
    let mut record = |id: u32, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let outcome = f();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(m) => println!("[PASS] {id:>2} {name} ({secs:.1}s): {m}"),
            Err(m) => {
                failed += 1;
                println!("[FAIL] {id:>2} {name} ({secs:.1}s): {m}");
            }
        }
    };

    let golden = AngleSpec::golden();
    let spiral = Spiral::with_defaults(&golden).expect("spiral");
    let report = empirical_vs_predicted(&golden, 1.0, 10..=25, 8.0, 0.05, BetaMode::Limit);
    let last_center = report.as_ref().ok().and_then(|r| r.last()).map(|r| r.center.n);

    record(1, "cf identities", &mut cf_identities);
    record(2, "sunflower triplet", &mut sunflower_triplet);
    record(3, "closest point", &mut closest_point);
    record(4, "predicted covolume", &mut predicted_covolume);
    record(5, "empirical convergence", &mut || match &report {
        Ok(r) => empirical_convergence(r),
        Err(e) => Err(err(e)),
    });
    record(6, "fitted lattice", &mut || match &report {
        Ok(r) => fitted_lattice(r),
        Err(e) => Err(err(e)),
    });
    record(7, "group structure", &mut || {
        group_structure(&spiral, last_center.ok_or("no center from the empirical run")?)
    });
    record(8, "dense forest failure", &mut dense_forest);
    record(9, "rotation orbit", &mut || {
        rotation_check(&spiral, last_center.ok_or("no center from the empirical run")?)
    });
    record(10, "property suites", &mut property_suites);
    record(11, "density", &mut density);

    println!("acceptance: {} failed, {:.1}s total", failed, start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
