use std::fs;
use std::path::Path;

use fermat_chabauty::chabauty::{chabauty_distance, delta_bounded};
use fermat_chabauty::forest::{delone_constants, density_ratio, empty_rectangle_search, verify_empty, PointSource, SearchOptions, SpiralSource, Witness};
use fermat_chabauty::format::sig17;
use fermat_chabauty::lattice::{gauss_reduce, lattice_ball};
use fermat_chabauty::limits::{
    center_indices, empirical_limit_patch, empirical_vs_predicted, predicted_basis, rotation_orbit, theorem_form_basis, BetaMode,
    ComparisonReport, PredictionInput,
};
use fermat_chabauty::number_theory::{
    badly_approx_profile, convergents, expand_cf, limit_triplet, limit_triplets, triplet, triplets, verify_cf_identities, AngleSpec,
};
use fermat_chabauty::spiral::{Spiral, SpiralConfig, ANGLE_GUARD_BITS};
use fermat_chabauty::{Error, Point2};
use serde::Serialize;
use serde_json::{json, Value};

use crate::output::{read_manifest, ExperimentManifest, RunWriter};
use crate::plot::{emit_plot, LatticeLayer, Marker, Plot, PlotStyle, STYLE_VERSION};
use crate::{BetaChoice, Cli, CliError, Command, EmpiricalArgs, IndexRange};

const MAX_LISTED_POINTS: u64 = 10_000_000;

struct Meta {
    alpha: Option<String>,
    n_min: u64,
    tolerances: Value,
}

fn parse_alpha(s: &str) -> Result<AngleSpec, CliError> {
    Ok(s.parse::<AngleSpec>()?)
}

fn spiral_with(alpha: &AngleSpec, n_min: u64) -> Result<Spiral, CliError> {
    Ok(Spiral::new(
        alpha,
        SpiralConfig {
            n_min,
            ..SpiralConfig::default()
        },
    )?)
}

fn js(range: &IndexRange) -> Result<std::ops::RangeInclusive<usize>, CliError> {
    let (a, b) = range.unsigned("j")?;
    if a == 0 {
        return Err(CliError::Usage("convergent indices start at 1".into()));
    }
    Ok(a as usize..=b as usize)
}

fn svg(w: &mut RunWriter, name: &str, plot: &Plot) -> Result<(), CliError> {
    let text = emit_plot(plot, &PlotStyle::default())?;
    w.text(name, &text)
}

fn row(fields: impl IntoIterator<Item = String>) -> Vec<String> {
    fields.into_iter().collect()
}

pub(crate) fn dispatch(command: &Command, argv: Vec<String>, w: &mut RunWriter) -> Result<ExperimentManifest, CliError> {
    let (params, meta) = match command {
        Command::Cf(a) => (json!(a), cf(a, w)?),
        Command::Triplets(a) => (json!(a), triplet_table(a, w)?),
        Command::Spiral(a) => (json!(a), spiral_points(a, w)?),
        Command::Patch(a) => (json!(a), patch(a, w)?),
        Command::Delta(a) => (json!(a), delta(a, w)?),
        Command::Predict(a) => (json!(a), predict(a, w)?),
        Command::Empirical(a) => (json!(a), empirical(a, w, true)?),
        Command::CompareForms(a) => (json!(a), empirical(a, w, false)?),
        Command::Orbit(a) => (json!(a), orbit(a, w)?),
        Command::Forest(a) => (json!(a), forest(a, w)?),
        Command::Density(a) => (json!(a), density(a, w)?),
        Command::Delone(a) => (json!(a), delone(a, w)?),
        Command::Report(_) => unreachable!("report does not write a run directory"),
    };
    Ok(ExperimentManifest {
        tool: "fermat-chabauty".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.name().into(),
        argv,
        alpha: meta.alpha,
        precision_bits: ANGLE_GUARD_BITS,
        n_min: meta.n_min,
        parameters: params,
        tolerances: meta.tolerances,
        outputs: Vec::new(),
        svg_style_version: STYLE_VERSION,
    })
}

fn cf(a: &crate::CfArgs, w: &mut RunWriter) -> Result<Meta, CliError> {
    let alpha = parse_alpha(&a.alpha)?;
    if a.count == 0 {
        return Err(CliError::Usage("count must be at least 1".into()));
    }
    let quotients = expand_cf(&alpha, a.count)?;
    let cs = convergents(&alpha, a.count)?;
    w.csv(
        "convergents.csv",
        &["j", "a", "p", "q"],
        cs.iter()
            .zip(&quotients)
            .map(|(c, q)| row([c.j.to_string(), q.to_string(), c.p.to_string(), c.q.to_string()])),
    )?;
    let qs: Vec<String> = quotients.iter().map(|q| q.to_string()).collect();
    w.json("convergents.json", &json!({ "alpha": alpha.to_string(), "quotients": qs, "convergents": cs }))?;
    println!("{} convergents of {alpha}", cs.len());
    Ok(Meta {
        alpha: Some(alpha.to_string()),
        n_min: 1,
        tolerances: json!({}),
    })
}

fn triplet_table(a: &crate::TripletArgs, w: &mut RunWriter) -> Result<Meta, CliError> {
    let alpha = parse_alpha(&a.alpha)?;
    let range = js(&a.j)?;
    let samples = triplets(&alpha, range.clone())?;
    let identities = verify_cf_identities(&alpha, range.clone())?;
    let profile = badly_approx_profile(&alpha, (*range.end() + 1).max(2))?;
    let limits = match alpha {
        AngleSpec::QuadraticIrrational(_) => Some(limit_triplets(&alpha)?),
        _ => None,
    };
    w.csv(
        "triplets.csv",
        &["j", "beta", "c", "ctilde", "err"],
        samples.iter().map(|s| {
            let err = s.beta.error_bound.max(s.c.error_bound).max(s.ctilde.error_bound);
            row([s.j.to_string(), sig17(s.beta.value), sig17(s.c.value), sig17(s.ctilde.value), sig17(err)])
        }),
    )?;
    w.json(
        "triplets.json",
        &json!({
            "alpha": alpha.to_string(),
            "samples": samples,
            "identities": identities,
            "profile": profile,
            "limits": limits,
        }),
    )?;
    println!(
        "{} triplets, max identity residual {:e}, signs negative: {}",
        samples.len(),
        identities.max_residual(),
        identities.all_signs_negative()
    );
    Ok(Meta {
        alpha: Some(alpha.to_string()),
        n_min: 1,
        tolerances: json!({}),
    })
}

fn spiral_points(a: &crate::SpiralArgs, w: &mut RunWriter) -> Result<Meta, CliError> {
    let alpha = parse_alpha(&a.alpha)?;
    let spiral = spiral_with(&alpha, a.n_min)?;
    let indices: Vec<u64> = match (&a.n, a.radius) {
        (Some(r), None) => {
            let (lo, hi) = r.unsigned("n")?;
            let lo = lo.max(a.n_min);
            if hi >= lo && hi - lo >= MAX_LISTED_POINTS {
                return Err(CliError::Usage(format!("at most {MAX_LISTED_POINTS} points per listing")));
            }
            (lo..=hi).collect()
        }
        (None, Some(radius)) => spiral.indices_in_ball(Point2::ORIGIN, radius)?.indices,
        _ => return Err(CliError::Usage("give exactly one of --n or --radius".into())),
    };
    let points = indices.iter().map(|&n| spiral.point(n)).collect::<Result<Vec<_>, _>>()?;
    w.csv(
        "points.csv",
        &["n", "x", "y", "err"],
        points
            .iter()
            .map(|p| row([p.n.to_string(), sig17(p.position.x), sig17(p.position.y), sig17(p.error_bound)])),
    )?;
    if a.plot {
        let positions: Vec<Point2> = points.iter().map(|p| p.position).collect();
        let extent = a.radius.unwrap_or_else(|| positions.iter().map(|p| p.norm()).fold(1.0, f64::max));
        svg(
            w,
            "spiral.svg",
            &Plot {
                window_radius: extent,
                points: positions,
                ..Default::default()
            },
        )?;
    }
    println!("{} points of the spiral for {alpha}", points.len());
    Ok(Meta {
        alpha: Some(alpha.to_string()),
        n_min: a.n_min,
        tolerances: json!({}),
    })
}

/// Recentered window as `(m, x, y, err)` rows; `err` adds the two position bounds.
fn patch_rows(spiral: &Spiral, n: u64, window: f64) -> Result<(Vec<Point2>, Vec<Vec<String>>), CliError> {
    let ep = empirical_limit_patch(spiral, n, window)?;
    let base = spiral.point(n)?.error_bound;
    let mut rows = Vec::with_capacity(ep.indices.len());
    for (&m, p) in ep.indices.iter().zip(&ep.patch.points) {
        let err = if m == n { 0.0 } else { base + spiral.point(m)?.error_bound };
        rows.push(row([m.to_string(), sig17(p.x), sig17(p.y), sig17(err)]));
    }
    Ok((ep.patch.points, rows))
}

fn patch(a: &crate::PatchArgs, w: &mut RunWriter) -> Result<Meta, CliError> {
    let alpha = parse_alpha(&a.alpha)?;
    let spiral = spiral_with(&alpha, a.n_min)?;
    let ep = empirical_limit_patch(&spiral, a.center, a.window)?;
    let (points, rows) = patch_rows(&spiral, a.center, a.window)?;
    w.csv("patch.csv", &["n", "x", "y", "err"], rows)?;
    w.json("patch.json", &ep)?;
    svg(
        w,
        "patch.svg",
        &Plot {
            window_radius: a.window,
            points,
            ..Default::default()
        },
    )?;
    println!("{} points within {} of x_{}", ep.patch.len(), a.window, a.center);
    Ok(Meta {
        alpha: Some(alpha.to_string()),
        n_min: a.n_min,
        tolerances: json!({}),
    })
}

fn delta(a: &crate::DeltaArgs, w: &mut RunWriter) -> Result<Meta, CliError> {
    let alpha = parse_alpha(&a.alpha)?;
    let spiral = spiral_with(&alpha, a.n_min)?;
    let p1 = empirical_limit_patch(&spiral, a.first, a.window)?.patch;
    let p2 = empirical_limit_patch(&spiral, a.second, a.window)?.patch;
    let bounded = delta_bounded(&p1, &p2)?;
    let distance = match chabauty_distance(&p1, &p2) {
        Ok(d) => Some(d),
        Err(Error::WindowTooSmall { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    w.json(
        "delta.json",
        &json!({
            "first": a.first,
            "second": a.second,
            "window_radius": sig17(a.window),
            "delta": bounded,
            "distance": distance.map(sig17),
        }),
    )?;
    match distance {
        Some(d) => println!("d = {d:.6}"),
        None => println!("not certified on W={}: delta <= {:.6}", a.window, bounded.value),
    }
    Ok(Meta {
        alpha: Some(alpha.to_string()),
        n_min: a.n_min,
        tolerances: json!({}),
    })
}

fn prediction_input(alpha: &AngleSpec, a: &crate::PredictArgs) -> Result<PredictionInput, CliError> {
    if let (Some(beta), Some(c), Some(ct)) = (a.beta, a.c, a.ctilde) {
        return Ok(PredictionInput::new(beta, c, ct, a.t, a.theta)?);
    }
    let (beta, c, ct) = match alpha {
        AngleSpec::QuadraticIrrational(_) => {
            let l = limit_triplet(alpha, a.j)?;
            (l.beta, l.c, l.ctilde)
        }
        _ => {
            let s = triplet(alpha, a.j)?;
            (s.beta.value, s.c.value, s.ctilde.value)
        }
    };
    Ok(PredictionInput::new(beta, c, ct, a.t, a.theta)?)
}

fn predict(a: &crate::PredictArgs, w: &mut RunWriter) -> Result<Meta, CliError> {
    let alpha = parse_alpha(&a.alpha)?;
    let input = prediction_input(&alpha, a)?;
    let proof = predicted_basis(&input);
    let theorem = theorem_form_basis(&input);
    w.json(
        "predict.json",
        &json!({
            "alpha": alpha.to_string(),
            "input": input,
            "proof_form": proof,
            "proof_form_reduced": gauss_reduce(&proof.basis)?,
            "theorem_form": theorem,
            "theorem_form_reduced": gauss_reduce(&theorem.basis)?,
        }),
    )?;
    svg(
        w,
        "predict.svg",
        &Plot {
            window_radius: a.window,
            lattices: vec![
                layer("proof_form", lattice_ball(&proof.basis, a.window)?.points, Marker::Plus, "#2e8b57"),
                layer("theorem_form", lattice_ball(&theorem.basis, a.window)?.points, Marker::Cross, "#8e44ad"),
            ],
            ..Default::default()
        },
    )?;
    println!(
        "v = ({:.7}, {:.7}), v~ = ({:.7}, {:.7}), covolume {:.9}",
        proof.basis.v1.x, proof.basis.v1.y, proof.basis.v2.x, proof.basis.v2.y, proof.covolume
    );
    Ok(Meta {
        alpha: Some(alpha.to_string()),
        n_min: 1,
        tolerances: json!({}),
    })
}

fn layer(label: &str, points: Vec<Point2>, marker: Marker, color: &'static str) -> LatticeLayer {
    LatticeLayer {
        label: label.into(),
        points,
        marker,
        color,
    }
}

fn beta_mode(c: BetaChoice) -> BetaMode {
    match c {
        BetaChoice::Limit => BetaMode::Limit,
        BetaChoice::Finite => BetaMode::FiniteRatio,
    }
}

#[derive(Serialize)]
struct FormRow {
    j: usize,
    n: u64,
    proof_form: fermat_chabauty::limits::DistanceRecord,
    theorem_form: fermat_chabauty::limits::DistanceRecord,
}

fn distance_rows(report: &ComparisonReport) -> Vec<Vec<String>> {
    report
        .rows
        .iter()
        .map(|r| {
            row([
                r.center.j.to_string(),
                r.center.n.to_string(),
                sig17(r.proof_form.value),
                sig17(r.proof_form.window_radius),
                r.proof_form.resolution_limited.to_string(),
                sig17(r.theorem_form.value),
                sig17(r.theorem_form.window_radius),
                r.theorem_form.resolution_limited.to_string(),
            ])
        })
        .collect()
}

const DISTANCE_HEADER: [&str; 8] = [
    "j",
    "n",
    "proof_form",
    "proof_window",
    "proof_limited",
    "theorem_form",
    "theorem_window",
    "theorem_limited",
];

fn empirical(a: &EmpiricalArgs, w: &mut RunWriter, full: bool) -> Result<Meta, CliError> {
    let alpha = parse_alpha(&a.alpha)?;
    let report = empirical_vs_predicted(&alpha, a.t, js(&a.j)?, a.window, a.tol, beta_mode(a.beta_mode))?;
    if full {
        w.json("report.json", &report)?;
        w.csv("distances.csv", &DISTANCE_HEADER, distance_rows(&report))?;
        let spiral = Spiral::with_defaults(&alpha)?;
        for r in &report.rows {
            let (points, rows) = patch_rows(&spiral, r.center.n, a.window)?;
            w.csv(&format!("patch_j{}.csv", r.center.j), &["n", "x", "y", "err"], rows)?;
            let proof = predicted_basis(&r.center.prediction);
            let theorem = theorem_form_basis(&r.center.prediction);
            svg(
                w,
                &format!("overlay_j{}.svg", r.center.j),
                &Plot {
                    window_radius: a.window,
                    points,
                    lattices: vec![
                        layer("proof_form", lattice_ball(&proof.basis, a.window)?.points, Marker::Plus, "#2e8b57"),
                        layer("theorem_form", lattice_ball(&theorem.basis, a.window)?.points, Marker::Cross, "#8e44ad"),
                    ],
                    rectangles: vec![],
                },
            )?;
        }
    } else {
        let rows: Vec<FormRow> = report
            .rows
            .iter()
            .map(|r| FormRow {
                j: r.center.j,
                n: r.center.n,
                proof_form: r.proof_form,
                theorem_form: r.theorem_form,
            })
            .collect();
        w.json("compare.json", &json!({ "alpha": report.alpha, "verdict": report.verdict, "rows": rows }))?;
        w.csv("compare.csv", &DISTANCE_HEADER, distance_rows(&report))?;
    }
    for r in &report.rows {
        println!(
            "j={:>3} n={:>12} proof_form={:.5} theorem_form={:.5}",
            r.center.j, r.center.n, r.proof_form.value, r.theorem_form.value
        );
    }
    println!("verdict: {:?}", report.verdict);
    Ok(Meta {
        alpha: Some(alpha.to_string()),
        n_min: 1,
        tolerances: json!({ "fit": sig17(a.tol), "verdict": sig17(0.1) }),
    })
}

fn orbit(a: &crate::OrbitArgs, w: &mut RunWriter) -> Result<Meta, CliError> {
    let alpha = parse_alpha(&a.alpha)?;
    let spiral = Spiral::with_defaults(&alpha)?;
    let center = match (a.center, a.j) {
        (Some(c), _) => c,
        (None, Some(j)) => center_indices(&alpha, a.t, j..=j, BetaMode::Limit)?.entries[0].n,
        (None, None) => return Err(CliError::Usage("give --center or --j".into())),
    };
    let report = rotation_orbit(&spiral, center, a.b.start..=a.b.end, a.window, a.tol)?;
    w.json("orbit.json", &report)?;
    w.csv(
        "orbit.csv",
        &["b", "center", "rotation_turns", "matched", "generator_distance"],
        report.entries.iter().map(|e| {
            row([
                e.b.to_string(),
                e.center.to_string(),
                sig17(e.rotation_turns),
                e.matched.to_string(),
                sig17(e.generator_distance),
            ])
        }),
    )?;
    println!("{}/{} matched around n={center}", report.matches, report.entries.len());
    Ok(Meta {
        alpha: Some(alpha.to_string()),
        n_min: 1,
        tolerances: json!({ "fit": sig17(a.tol) }),
    })
}

#[derive(Serialize)]
struct ForestRow {
    length: fermat_chabauty::format::Num,
    witness: Option<Witness>,
    verified: bool,
}

fn forest(a: &crate::ForestArgs, w: &mut RunWriter) -> Result<Meta, CliError> {
    let alpha = parse_alpha(&a.alpha)?;
    let source = SpiralSource::with_config(
        &alpha,
        a.radius,
        SpiralConfig {
            n_min: a.n_min,
            ..SpiralConfig::default()
        },
    )?;
    let options = SearchOptions::default();
    let mut rows = Vec::new();
    for (k, &length) in a.lengths.iter().enumerate() {
        let witness = empty_rectangle_search(&source, a.eps, length, &options)?;
        let verified = match &witness {
            Some(wit) => verify_empty(&source, &wit.probe)?,
            None => false,
        };
        if let Some(wit) = &witness {
            let reach = wit.probe.circumradius() + 2.0;
            let c = wit.probe.center;
            let points = source
                .points_in_disc(c, reach.min(source.region_radius() - c.norm()).max(0.0))?
                .into_iter()
                .map(|p| p - c)
                .collect();
            let corners = wit.probe.corners().map(|p| p - c);
            let plot = Plot {
                window_radius: reach,
                points,
                lattices: vec![],
                rectangles: vec![corners],
            };
            match svg(w, &format!("witness_{k}.svg"), &plot) {
                Err(CliError::Core(e @ Error::TooManyPoints { .. })) => eprintln!("witness_{k}.svg skipped: {e}"),
                other => other?,
            }
            println!("V={length}: empty rectangle at ({:.4}, {:.4}), verified {verified}", c.x, c.y);
        } else {
            println!("V={length}: no empty rectangle found");
        }
        rows.push(ForestRow {
            length: length.into(),
            witness,
            verified,
        });
    }
    w.json(
        "forest.json",
        &json!({ "alpha": alpha.to_string(), "region_radius": sig17(a.radius), "width": sig17(a.eps), "options": options, "rows": rows }),
    )?;
    Ok(Meta {
        alpha: Some(alpha.to_string()),
        n_min: a.n_min,
        tolerances: json!({}),
    })
}

fn density(a: &crate::DensityArgs, w: &mut RunWriter) -> Result<Meta, CliError> {
    let rows = a.r.iter().map(|&r| density_ratio(r, a.n_min)).collect::<Result<Vec<_>, _>>()?;
    w.json("density.json", &rows)?;
    for d in &rows {
        println!("r={} count={} ratio={:.12}", d.r, d.count, d.ratio);
    }
    Ok(Meta {
        alpha: None,
        n_min: a.n_min,
        tolerances: json!({}),
    })
}

fn delone(a: &crate::DeloneArgs, w: &mut RunWriter) -> Result<Meta, CliError> {
    let alpha = parse_alpha(&a.alpha)?;
    let center = Point2::new(a.center_x, a.center_y);
    let source = SpiralSource::with_config(
        &alpha,
        center.norm() + a.window + 1.0,
        SpiralConfig {
            n_min: a.n_min,
            ..SpiralConfig::default()
        },
    )?;
    let c = delone_constants(&source, center, a.window, a.step)?;
    w.json("delone.json", &json!({ "alpha": alpha.to_string(), "constants": c }))?;
    println!("packing {:.6}, covering estimate {:.6} over {} points", c.packing, c.covering_estimate, c.points);
    Ok(Meta {
        alpha: Some(alpha.to_string()),
        n_min: a.n_min,
        tolerances: json!({}),
    })
}

/// Re-runs the manifest in a scratch directory and compares every recorded file.
pub(crate) fn report(dir: &Path) -> Result<(), CliError> {
    use clap::Parser;

    let manifest = read_manifest(dir)?;
    let scratch = tempfile::tempdir()?;
    let mut args = vec![
        "fermat-chabauty".to_string(),
        "--out".to_string(),
        scratch.path().display().to_string(),
    ];
    args.extend(manifest.argv.iter().cloned());
    let cli = Cli::try_parse_from(&args).map_err(|e| CliError::Usage(format!("manifest argv does not parse: {e}")))?;
    let rerun = crate::execute(&cli, &args[1..])?.expect("re-run writes a manifest");
    let mut names = manifest.outputs.clone();
    names.push(crate::MANIFEST_FILE.to_string());
    let mut differing = Vec::new();
    for name in &names {
        let old = fs::read(dir.join(name))?;
        let new = fs::read(scratch.path().join(name)).unwrap_or_default();
        let same = old == new;
        println!("[{}] {name}", if same { "same" } else { "diff" });
        if !same {
            differing.push(name.clone());
        }
    }
    if rerun.outputs != manifest.outputs {
        differing.push("output list".into());
    }
    if differing.is_empty() {
        println!("reproduced {} files", names.len());
        Ok(())
    } else {
        Err(CliError::Mismatch(format!("outputs differ: {}", differing.join(", "))))
    }
}
