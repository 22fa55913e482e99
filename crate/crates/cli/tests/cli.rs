use std::fs;
use std::path::Path;

use fermat_chabauty_cli::{read_manifest, run};

fn run_in(dir: &Path, args: &[&str]) -> i32 {
    let mut full = vec!["fermat-chabauty".to_string(), "--out".into(), dir.display().to_string()];
    full.extend(args.iter().map(|s| s.to_string()));
    run(full)
}

fn report(dir: &Path) -> i32 {
    run(["fermat-chabauty", "report", "--run", &dir.display().to_string()])
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn num(v: &serde_json::Value) -> f64 {
    v.as_str().unwrap().parse().unwrap()
}

#[test]
fn cf_lists_fibonacci_convergents() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run_in(tmp.path(), &["cf", "--alpha", "quad:1,1,2,5", "--count", "10"]), 0);
    let csv = fs::read_to_string(tmp.path().join("convergents.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "j,a,p,q");
    assert_eq!(lines[1], "1,1,1,1");
    assert_eq!(lines[10], "10,1,89,55");
    let m = read_manifest(tmp.path()).unwrap();
    assert_eq!(m.command, "cf");
    assert_eq!(m.argv, ["cf", "--alpha", "quad:1,1,2,5", "--count", "10"]);
    assert_eq!(m.outputs, ["convergents.csv", "convergents.json"]);
}

#[test]
fn predict_matches_sunflower_basis() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run_in(tmp.path(), &["predict", "--alpha", "quad:1,1,2,5", "--t", "1", "--theta", "0"]), 0);
    let v = json(&tmp.path().join("predict.json"));
    let b = &v["proof_form"]["basis"];
    let (v1, v2) = (&b["v1"], &b["v2"]);
    assert!((num(&v1[0]) - 1.0).abs() < 1e-12);
    assert!((num(&v1[1]) - 1.4049629).abs() < 1e-7);
    assert!((num(&v2[0]) - 1.6180340).abs() < 1e-7);
    assert!((num(&v2[1]) + 0.8683149).abs() < 1e-7);
    assert!((num(&v["proof_form"]["covolume"]) - std::f64::consts::PI).abs() < 1e-12);
    let svg = fs::read_to_string(tmp.path().join("predict.svg")).unwrap();
    assert_eq!(svg.matches(r#"class="lattice""#).count(), 2);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run_in(tmp.path(), &["cf", "--alpha", "nonsense"]), 2);
    assert_eq!(run_in(tmp.path(), &["triplets", "--alpha", "quad:1,1,2,5", "--j", "5:1"]), 2);
    assert_eq!(run_in(tmp.path(), &["patch", "--alpha", "quad:1,1,2,5", "--center", "100", "--window", "1"]), 2);
    // a two-digit decimal cannot certify later partial quotients
    assert_eq!(run_in(tmp.path(), &["cf", "--alpha", "dec:1.5@64", "--count", "5"]), 3);
    assert_eq!(run(["fermat-chabauty", "frobnicate"]), 2);
}

#[test]
fn report_reproduces_and_detects_tampering() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    let args = ["empirical", "--alpha", "quad:1,1,2,5", "--t", "1", "--j", "10:12", "--window", "8"];
    assert_eq!(run_in(&dir, &args), 0);
    let m = read_manifest(&dir).unwrap();
    assert!(m.outputs.contains(&"report.json".to_string()));
    assert!(m.outputs.contains(&"overlay_j12.svg".to_string()));
    assert!(m.outputs.contains(&"patch_j10.csv".to_string()));
    assert_eq!(report(&dir), 0);

    let path = dir.join("distances.csv");
    let mut text = fs::read_to_string(&path).unwrap();
    text.push('\n');
    fs::write(&path, text).unwrap();
    assert_eq!(report(&dir), 1);
}

#[test]
fn identical_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["spiral", "--alpha", "quad:0,1,1,2", "--radius", "12", "--plot"];
    assert_eq!(run_in(&tmp.path().join("a"), &args), 0);
    assert_eq!(run_in(&tmp.path().join("b"), &args), 0);
    for name in ["points.csv", "spiral.svg", "manifest.json"] {
        assert_eq!(fs::read(tmp.path().join("a").join(name)).unwrap(), fs::read(tmp.path().join("b").join(name)).unwrap());
    }
}

fn attr(tag: &str, name: &str) -> String {
    let key = format!(" {name}=\"");
    let start = tag.find(&key).unwrap() + key.len();
    tag[start..].split('"').next().unwrap().to_string()
}

fn inside(corners: &[(f64, f64)], p: (f64, f64)) -> bool {
    let signs: Vec<f64> = (0..4)
        .map(|i| {
            let (a, b) = (corners[i], corners[(i + 1) % 4]);
            (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0)
        })
        .collect();
    signs.iter().all(|&s| s > 0.0) || signs.iter().all(|&s| s < 0.0)
}

#[test]
fn forest_witness_plot_encloses_no_points() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["forest", "--alpha", "quad:1,1,2,5", "--radius", "2000", "--lengths", "20"];
    assert_eq!(run_in(tmp.path(), &args), 0);
    let v = json(&tmp.path().join("forest.json"));
    assert_eq!(v["rows"][0]["verified"], true);
    let svg = fs::read_to_string(tmp.path().join("witness_0.svg")).unwrap();
    let polygon = svg.lines().find(|l| l.starts_with("<polygon")).unwrap();
    let corners: Vec<(f64, f64)> = attr(polygon, "points")
        .split(' ')
        .map(|c| {
            let (x, y) = c.split_once(',').unwrap();
            (x.parse().unwrap(), y.parse().unwrap())
        })
        .collect();
    assert_eq!(corners.len(), 4);
    let circles: Vec<(f64, f64)> = svg
        .lines()
        .filter(|l| l.starts_with("<circle"))
        .map(|l| (attr(l, "cx").parse().unwrap(), attr(l, "cy").parse().unwrap()))
        .collect();
    assert!(circles.len() > 20);
    assert!(circles.iter().all(|&c| !inside(&corners, c)));
}

#[test]
fn density_and_delone() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run_in(&tmp.path().join("d"), &["density", "--r", "10,100"]), 0);
    let v = json(&tmp.path().join("d").join("density.json"));
    assert_eq!(v[1]["count"], 10000);
    assert!(read_manifest(&tmp.path().join("d")).unwrap().alpha.is_none());

    let args = ["delone", "--alpha", "quad:1,1,2,5", "--center-x", "200", "--window", "20", "--step", "0.2"];
    assert_eq!(run_in(&tmp.path().join("e"), &args), 0);
    let c = &json(&tmp.path().join("e").join("delone.json"))["constants"];
    let (packing, covering) = (num(&c["packing"]), num(&c["covering_estimate"]));
    assert!(packing > 0.2 && packing < covering && covering < 3.0);
}

#[test]
fn orbit_and_compare_forms() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["orbit", "--alpha", "quad:1,1,2,5", "--j", "20", "--b", "0:5"];
    assert_eq!(run_in(&tmp.path().join("o"), &args), 0);
    let v = json(&tmp.path().join("o").join("orbit.json"));
    assert_eq!(v["matches"], 6);

    let args = ["compare-forms", "--alpha", "quad:1,1,2,5", "--j", "20:22"];
    assert_eq!(run_in(&tmp.path().join("c"), &args), 0);
    let v = json(&tmp.path().join("c").join("compare.json"));
    assert_eq!(v["verdict"], "proof_form");
}
