use std::path::PathBuf;

use adinkra::cli::{
    run, BuildReport, CensusReport, CodeAnalysis, DetReport, ErrorReport, OrigamiReport, PipelineReport,
    SurfaceReport,
};
use adinkra::formats::{from_json, read_spectrum_csv, read_torus_csv, to_json, CosetActionDoc, OrigamiDoc};
use adinkra_core::hyperbolic::LengthSpectrum;
use adinkra_core::spectral::ActionResult;
use adinkra_core::torus::{OrigamiAction, PoissonCheck};
use serde::de::DeserializeOwned;
use serde::Serialize;

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn adinkra(args: &[&str]) -> Output {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("adinkra").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Output { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn ok<T: DeserializeOwned + Serialize + PartialEq + std::fmt::Debug>(args: &[&str]) -> T {
    let o = adinkra(args);
    assert_eq!(o.code, 0, "{args:?}: {}", o.stderr);
    let v: T = from_json(&o.stdout).unwrap();
    // what was emitted re-ingests to the same value and re-emits the same bytes
    let again = to_json(&v).unwrap() + "\n";
    assert_eq!(again, o.stdout);
    v
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("adinkra-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn build_a41_has_genus_one() {
    let r: BuildReport = ok(&["adinkra", "build", "--n", "4", "--code", "1111"]);
    assert_eq!(r.genus.genus, 1);
    assert_eq!(r.genus.closed_form, Some(1));
    assert_eq!(r.graph.vertices.len(), 8);
    assert_eq!(r.graph.edges.len(), 16);
    assert!(r.well_dashed);
}

#[test]
fn empty_spectrum_has_no_geodesic_term() {
    let r: ActionResult = ok(&["action", "laplace", "--lambda", "10"]);
    assert_eq!(r.geodesic_term.re, 0.0);
    assert_eq!(r.geodesic_term.im, 0.0);
    assert_eq!(r.contributing_class_count, 0);
}

#[test]
fn pipeline_n5_trivial() {
    let r: PipelineReport = ok(&["pipeline", "--n", "5", "--code", "trivial"]);
    assert_eq!(r.genus.genus, 5);
    assert_eq!(r.area_over_pi, "16");
    assert!((r.area - 16.0 * std::f64::consts::PI).abs() < 1e-12);
    assert!(!r.dual.accepted);
    assert!(r.dual.reason.unwrap().contains("odd"));
}

#[test]
fn pipeline_n4_dual_is_a_torus() {
    let r: PipelineReport = ok(&["pipeline", "--n", "4", "--code", "1111"]);
    assert!(r.dual.accepted);
    assert_eq!(r.dual.origami_genus, Some(1));
}

#[test]
fn outputs_are_deterministic() {
    let cases: &[&[&str]] = &[
        &["pipeline", "--n", "6", "--code", "111100"],
        &["geodesics", "--l-max", "3", "--workers", "1"],
        &["zeta", "det", "--beta", "1.5", "--nodes", "16"],
        &["torus", "action", "--omega", "ignored"],
    ];
    for args in &cases[..3] {
        let a = adinkra(args);
        let b = adinkra(args);
        assert_eq!(a.code, 0, "{}", a.stderr);
        assert_eq!(a.stdout, b.stdout);
    }
    let many = adinkra(&["geodesics", "--l-max", "3", "--workers", "4"]);
    assert_eq!(many.stdout, adinkra(cases[1]).stdout);
}

#[test]
fn geodesics_csv_reads_back() {
    let o = adinkra(&["geodesics", "--l-max", "3.5", "--format", "csv", "--powers"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert!(o.stdout.starts_with("length,trace,multiplicity,word,primitive_flag\n"));
    let classes = read_spectrum_csv(o.stdout.as_bytes()).unwrap();
    assert!(classes.iter().any(|c| !c.primitive));
    let json: LengthSpectrum = ok(&["geodesics", "--l-max", "3.5", "--powers"]);
    assert_eq!(json.classes.len(), classes.len());
    for (a, b) in json.classes.iter().zip(&classes) {
        assert_eq!(a.length.to_bits(), b.length.to_bits());
        assert_eq!(a.words, b.words);
    }
}

#[test]
fn spectrum_file_feeds_actions() {
    let path = scratch("spectrum.json");
    let o = adinkra(&["geodesics", "--l-max", "4", "--output", path.to_str().unwrap()]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert!(o.stdout.is_empty());
    let p = path.to_str().unwrap();
    let l: ActionResult = ok(&["action", "laplace", "--genus", "2", "--spectrum", p, "--lambda", "0.3"]);
    assert!(l.contributing_class_count > 0);
    let d: ActionResult = ok(&["action", "dirac", "--genus", "2", "--spectrum", p, "--lambda", "0.3"]);
    assert!((d.geodesic_term - l.geodesic_term).norm() <= 1e-12 * l.geodesic_term.norm());
    let s: ActionResult =
        ok(&["action", "super", "--genus", "2", "--spectrum", p, "--lambda", "0.3", "--variant", "r", "--test", "poly"]);
    assert_eq!(s.lambda, 0.3);
    // the spectrum is certified to length 4, so Λ = 0.2 reaches past it
    let far = adinkra(&["action", "laplace", "--spectrum", p, "--lambda", "0.2"]);
    assert_eq!(far.code, 1);
}

#[test]
fn origami_documents() {
    let doc = OrigamiDoc { d: 3, sigma_x: vec![2, 3, 1], sigma_y: vec![1, 3, 2] };
    let path = scratch("origami.json");
    std::fs::write(&path, to_json(&doc).unwrap()).unwrap();
    let r: OrigamiReport = ok(&["origami", "validate", "--file", path.to_str().unwrap()]);
    assert_eq!(r.origami, doc);
    // the commutator is a 3-cycle: one cone point of angle 6π
    assert_eq!(r.genus, 2);
    assert!(r.validation.connected);

    let bad = OrigamiDoc { d: 2, sigma_x: vec![1, 1], sigma_y: vec![1, 2] };
    std::fs::write(&path, to_json(&bad).unwrap()).unwrap();
    let o = adinkra(&["origami", "validate", "--file", path.to_str().unwrap()]);
    assert_eq!(o.code, 1);
    let e: ErrorReport = from_json(&o.stderr).unwrap();
    assert_eq!(e.error.kind, "validation");
}

#[test]
fn surface_emits_dual() {
    let path = scratch("dual.json");
    let r: SurfaceReport = ok(&["surface", "--n", "6", "--code", "111100", "--emit-dual", path.to_str().unwrap()]);
    assert_eq!(r.surface.euler_genus, 9);
    assert!(r.triangulation.gauss_bonnet);
    assert!(std::fs::read_to_string(&path).unwrap().contains("\"orientation\""));
    let odd = adinkra(&["surface", "--n", "5", "--emit-dual", path.to_str().unwrap()]);
    assert_eq!(odd.code, 1);
}

#[test]
fn graph_round_trips_through_files() {
    let built: BuildReport = ok(&["adinkra", "build", "--n", "4", "--code", "1111"]);
    let path = scratch("graph.json");
    std::fs::write(&path, to_json(&built.graph).unwrap()).unwrap();
    let again: BuildReport = ok(&["adinkra", "build", "--graph", path.to_str().unwrap()]);
    assert_eq!(again, built);
    let census: CensusReport = ok(&["adinkra", "census", "--graph", path.to_str().unwrap()]);
    assert_eq!((census.census.well_dashed, census.census.well_dashed_classes), (512, 4));
    let cycles: CensusReport = ok(&["adinkra", "census", "--n", "4", "--code", "1111", "--faces", "cycles"]);
    assert_eq!(cycles.census.disagreements, 256);
}

#[test]
fn sampling_requires_a_seed() {
    let o = adinkra(&["adinkra", "census", "--n", "4", "--samples", "100"]);
    assert_eq!(o.code, 1);
    assert!(o.stderr.contains("--seed"));
    let a: CensusReport = ok(&["adinkra", "census", "--n", "4", "--samples", "5000", "--seed", "3"]);
    let b: CensusReport = ok(&["adinkra", "census", "--n", "4", "--samples", "5000", "--seed", "3", "--workers", "2"]);
    assert_eq!(a, b);
    assert_eq!(a.census.seed, Some(3));
}

#[test]
fn code_analysis() {
    let r: CodeAnalysis = ok(&["code", "analyze", "--n", "8", "--code", "11110000,00111100,00001111", "--cosets"]);
    assert_eq!(r.dimension, 3);
    assert!(r.report.is_doubly_even);
    assert_eq!(r.cosets.unwrap().len(), 32);
}

#[test]
fn transfer_determinants() {
    let r: DetReport = ok(&["zeta", "det", "--beta", "1"]);
    assert!((r.eigenvalues[0].re - 1.0).abs() < 1e-8);
    assert!(r.singular);
    let cover = CosetActionDoc {
        d: 2,
        permutations: (1..=40)
            .map(|i| (i.to_string(), if i == 1 { vec![2, 1] } else { vec![1, 2] }))
            .chain([("tail".to_string(), vec![1, 2])])
            .collect(),
    };
    let path = scratch("cover.json");
    std::fs::write(&path, to_json(&cover).unwrap()).unwrap();
    let c: DetReport = ok(&["zeta", "det", "--beta", "2", "--cover", path.to_str().unwrap()]);
    assert_eq!(c.size, 64);
    assert!(!c.singular);
    let t: DetReport = ok(&["zeta", "det", "--beta", "2", "--truncate", "30"]);
    let e: DetReport = ok(&["zeta", "det", "--beta", "2"]);
    assert!((t.value - e.value).norm() < 1e-8);
}

#[test]
fn torus_commands() {
    let path = scratch("omega.json");
    std::fs::write(&path, "[[0.0, 1.0]]").unwrap();
    let p = path.to_str().unwrap();
    let o = adinkra(&["torus", "spectrum", "--omega", p, "--n", "0", "--m", "1", "--box", "3", "--format", "csv"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let rows = read_torus_csv(o.stdout.as_bytes()).unwrap();
    assert_eq!(rows.len(), 48);
    let a: OrigamiAction = ok(&["torus", "action", "--omega", p, "--n", "0", "--m", "1", "--box", "30", "--width", "1"]);
    assert!(a.tail_bound.unwrap() < 1e-12);
    let z: OrigamiAction = ok(&["torus", "action", "--omega", p, "--n", "0", "--m", "1", "--box", "3"]);
    assert_eq!(z.partial_sum, 0.0);
    let q: PoissonCheck = ok(&["torus", "poisson", "--omega", p, "--n", "-2", "--m", "-1", "--box", "50"]);
    assert!(q.discrepancy < 1e-8 * q.direct);
    let zero = adinkra(&["torus", "spectrum", "--omega", p, "--n", "0", "--m", "0"]);
    assert_eq!(zero.code, 1);
}

#[test]
fn bad_invocations_report_json() {
    for args in [&["frobnicate"][..], &["adinkra", "build"], &["--tolerance", "-1", "pipeline", "--n", "4"]] {
        let o = adinkra(args);
        assert_eq!(o.code, 1, "{args:?}");
        let e: ErrorReport = from_json(&o.stderr).unwrap();
        assert_eq!(e.error.kind, "validation");
    }
    let v = adinkra(&["--version"]);
    assert_eq!(v.code, 0);
    assert!(v.stdout.starts_with("adinkra "));
}

#[test]
fn products() {
    let o = adinkra(&["product", "cartesian", "--n1", "2", "--n2", "2"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let o = adinkra(&["product", "fibered", "--n1", "4", "--code1", "1111", "--n2", "4", "--code2", "1111"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert!(o.stdout.contains("\"additivity_ok\": false"));
}
