use proptest::prelude::*;
use statcp::models::{data, quesenberry_hurst_ci, ModelParams};
use statcp_cli::coverage::{coverage, CoverageRun};
use statcp_cli::input::{parse_bins, CovarianceArg};
use statcp_cli::region::{parse_grid, scan, Axis, Cell, RegionGrid};
use statcp_cli::{ci, Dataset, ModelArgs, ModelKind, RunSpec, Status};
use std::path::PathBuf;
use std::process::{Command, Output};

fn data_file(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn statcp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_statcp")).args(args).output().unwrap()
}

fn statcp_env(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_statcp"))
        .args(args)
        .env("STATCP_THREADS", threads)
        .output()
        .unwrap()
}

fn stderr_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stderr).expect("stderr carries one JSON object")
}

// Independent oracle for the open-bin linear statistic: Pearson's statistic
// of the residual counts against normal bin probabilities, with the normal
// CDF integrated by Simpson's rule.
fn normal_cdf(z: f64) -> f64 {
    let n = 20_000;
    let (a, b) = (0.0, z);
    let h = (b - a) / n as f64;
    let f = |x: f64| (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    0.5 + s * h / 3.0
}

fn linear_statistic(a: f64, b: f64, sigma: f64) -> f64 {
    let bounds: Vec<f64> = (0..=5).map(|k| -10.0 + 4.0 * k as f64).collect();
    let v = data::linear_trend();
    let mut counts = [0.0; 5];
    for (i, y) in v.iter().enumerate() {
        let e = y - (a * (i + 1) as f64 + b);
        for j in 0..5 {
            if bounds[j] <= e && e < bounds[j + 1] {
                counts[j] += 1.0;
            }
        }
    }
    (0..5)
        .map(|j| {
            let expect = v.len() as f64 * (normal_cdf(bounds[j + 1] / sigma) - normal_cdf(bounds[j] / sigma));
            (counts[j] - expect).powi(2) / expect
        })
        .sum()
}

const CHI2_4_95: f64 = 9.487729;

fn linear_spec(kind: ModelKind) -> RunSpec {
    let mut p = ModelParams::with_alpha(0.05);
    p.bins = Some(parse_bins("-10:10:5").unwrap());
    p.known_sigma = Some(5.0);
    let mut spec = RunSpec::new(kind, p);
    if kind == ModelKind::Linear {
        spec.fixes.push(("sigma".into(), 5.0));
    }
    spec
}

#[test]
fn region_scan_agrees_with_direct_statistic() {
    let (x, y) = parse_grid("a=-0.5:3.5:4,b=-27.5:22.5:10").unwrap();
    let res = scan(&linear_spec(ModelKind::Linear), &Dataset::Variates(data::linear_trend()), &x, &y, false).unwrap();
    assert_eq!(res.unresolved, 0);
    assert_eq!(res.grid.cells.len(), 40);
    for (a, b, feasible) in [(1.0, -5.0, true), (3.0, 20.0, false)] {
        let s = linear_statistic(a, b, 5.0);
        assert_eq!(s <= CHI2_4_95, feasible, "oracle at ({a}, {b}) gives {s}");
        match res.grid.cell_at(a, b) {
            Cell::Feasible { best_s } => {
                assert!(feasible);
                assert!((best_s - s).abs() < 1e-6, "{best_s} vs {s}");
            }
            Cell::Infeasible => assert!(!feasible),
        }
    }
}

#[test]
fn known_sigma_region_contains_least_squares_point() {
    let (x, y) = parse_grid("a=0.4:1.0:3,b=-3.703:-0.703:3").unwrap();
    let spec = linear_spec(ModelKind::LinearKnownSigma);
    let res = scan(&spec, &Dataset::Variates(data::linear_trend()), &x, &y, false).unwrap();
    assert!((x.center(1) - 0.7).abs() < 1e-12 && (y.center(1) + 2.203).abs() < 1e-12);
    assert!(matches!(res.grid.cell(1, 1), Cell::Feasible { .. }));
    // far from the fitted line the region ends
    let (x, y) = parse_grid("a=3:3:1,b=20:20:1").unwrap();
    let far = scan(&spec, &Dataset::Variates(data::linear_trend()), &x, &y, false).unwrap();
    assert_eq!(far.grid.cells, vec![Cell::Infeasible]);
}

#[test]
fn scanned_grid_survives_csv_round_trip() {
    let (x, y) = parse_grid("a=-0.5:3.5:4,b=-27.5:22.5:10").unwrap();
    let res = scan(&linear_spec(ModelKind::Linear), &Dataset::Variates(data::linear_trend()), &x, &y, true).unwrap();
    let text = res.grid.to_csv();
    assert!(text.starts_with("x,y,feasible,best_s\n"));
    let back = RegionGrid::read_csv(text.as_bytes(), x, y).unwrap();
    assert_eq!(back, res.grid);
}

fn cell() -> impl Strategy<Value = Cell> {
    prop_oneof![
        Just(Cell::Infeasible),
        (0.0..1e6f64).prop_map(|best_s| Cell::Feasible { best_s }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn any_grid_survives_csv_round_trip(
        lo in -1e3..1e3f64, w in 0.0..1e3f64, nx in 1usize..6,
        ylo in -1e3..1e3f64, yw in 0.0..1e3f64, ny in 1usize..6,
        pool in prop::collection::vec(cell(), 36),
    ) {
        let x = Axis::new("a", lo, lo + w, nx).unwrap();
        let y = Axis::new("b", ylo, ylo + yw, ny).unwrap();
        let grid = RegionGrid { x: x.clone(), y: y.clone(), cells: pool[..nx * ny].to_vec() };
        let back = RegionGrid::read_csv(grid.to_csv().as_bytes(), x, y).unwrap();
        prop_assert_eq!(back, grid);
    }
}

#[test]
fn malformed_csv_is_rejected() {
    let x = Axis::new("a", 0.0, 1.0, 1).unwrap();
    let y = Axis::new("b", 0.0, 1.0, 1).unwrap();
    for text in [
        "x,y,ok,best_s\n0.5,0.5,0,\n",
        "x,y,feasible,best_s\n0.5,0.5,1,\n",
        "x,y,feasible,best_s\n0.5,0.4,0,\n",
        "x,y,feasible,best_s\n",
    ] {
        assert!(RegionGrid::read_csv(text.as_bytes(), x.clone(), y.clone()).is_err(), "{text}");
    }
}

#[test]
fn exit_codes_follow_the_contract() {
    let linear = data_file("linear.json");
    let linear = linear.to_str().unwrap();
    let groups = data_file("groups.json");
    let groups = groups.to_str().unwrap();

    let feasible = statcp(&["region", "linear", linear, "--bins=-10:10:5", "--fix", "sigma=5", "--grid", "a=1:1:1,b=-5:-5:1"]);
    assert_eq!(feasible.status.code(), Some(0));
    assert!(feasible.stderr.is_empty());

    let infeasible = statcp(&["fit", "anova", groups]);
    assert_eq!(infeasible.status.code(), Some(2));
    assert_eq!(stderr_json(&infeasible)["error"], "infeasible");

    let limited = statcp(&["fit", "linear", linear, "--bins=-10:10:5", "--node-limit", "3"]);
    assert_eq!(limited.status.code(), Some(3));
    assert_eq!(stderr_json(&limited)["error"], "resource_limit");

    for bad in [
        vec!["fit", "linear", linear],
        vec!["fit", "anova", linear],
        vec!["fit", "linear", "/nonexistent.json", "--bins=-10:10:5"],
        vec!["fit", "linear", linear, "--bins=-10:10:5", "--fix", "zeta=1"],
        vec!["fit", "linear", linear, "--bins=-10:10:5", "--objective", "up:a"],
        vec!["region", "linear", linear, "--bins=-10:10:5", "--grid", "a=0:1:2"],
        vec!["fit", "nosuchmodel", linear],
    ] {
        let out = statcp(&bad);
        assert_eq!(out.status.code(), Some(1), "{bad:?}");
        assert!(stderr_json(&out)["error"].is_string(), "{bad:?}");
    }

    let bad_threads = statcp_env(&["region", "linear", linear, "--bins=-10:10:5", "--grid", "a=1:1:1,b=-5:-5:1"], "zero");
    assert_eq!(bad_threads.status.code(), Some(1));
}

#[test]
fn malformed_dataset_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"variates\": [1, 2,").unwrap();
    let out = statcp(&["fit", "linear", path.to_str().unwrap(), "--bins=-10:10:5"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"], "json");
}

#[test]
fn outputs_are_byte_identical_across_runs_and_pool_sizes() {
    let linear = data_file("linear.json");
    let args = [
        "region", "linear", linear.to_str().unwrap(), "--bins=-10:10:5", "--fix", "sigma=5",
        "--grid", "a=-1:3:6,b=-20:10:6", "--min-s",
    ];
    let one = statcp_env(&args, "1");
    let three = statcp_env(&args, "3");
    let again = statcp_env(&args, "3");
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, three.stdout);
    assert_eq!(three.stdout, again.stdout);

    let cov = ["coverage", "linear", "--truth", "a=1,b=-5,sigma=5", "--replicates", "20", "--seed", "9", "--bins=-10:10:5"];
    let first = statcp(&cov);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, statcp(&cov).stdout);
    let report: serde_json::Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(report["replicates"], 20);
}

#[test]
fn empty_coverage_run_is_defined() {
    let spec = linear_spec(ModelKind::Linear);
    let run = CoverageRun { truth: vec![("a".into(), 1.0), ("b".into(), -5.0), ("sigma".into(), 5.0)], replicates: 0, seed: 1, length: None };
    let r = coverage(&spec, &run).unwrap();
    assert_eq!((r.replicates, r.hits, r.coverage), (0, 0, None));
    assert!(!r.within(3.0));
}

#[test]
fn coverage_needs_complete_truth_and_a_generator() {
    let spec = linear_spec(ModelKind::Linear);
    let run = CoverageRun { truth: vec![("a".into(), 1.0)], replicates: 5, seed: 1, length: None };
    assert!(coverage(&spec, &run).is_err());
    let anova = RunSpec::new(ModelKind::Anova, ModelParams::with_alpha(0.05));
    assert!(coverage(&anova, &CoverageRun { truth: vec![], replicates: 5, seed: 1, length: None }).is_err());
}

#[test]
fn multinomial_interval_matches_closed_form_under_known_covariance() {
    let args = ModelArgs { alpha: Some(0.1), covariance: Some(CovarianceArg::Known), ..ModelArgs::default() };
    let spec = args.into_spec(ModelKind::Multinomial).unwrap();
    let data = Dataset::load(&data_file("multinomial.json")).unwrap();
    let closed = quesenberry_hurst_ci(&[3, 5, 2], 0.1).unwrap();
    let r = ci(&spec, &data, "p1").unwrap();
    assert_eq!(r.status, Status::Feasible);
    let (lo, hi) = (r.lower.unwrap(), r.upper.unwrap());
    assert!(lo <= closed[0].0 + 1e-6 && closed[0].1 <= hi + 1e-6, "({lo}, {hi})");
    assert!(closed[0].0 - lo <= 2e-3 && hi - closed[0].1 <= 2e-3, "({lo}, {hi})");
    let [al, ah] = r.attained.unwrap();
    assert!(lo <= al && al <= ah && ah <= hi);
    assert!(ci(&spec, &data, "p9").is_err());
}
