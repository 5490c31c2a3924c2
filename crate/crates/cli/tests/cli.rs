use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cppdip_cli::svg::{render_svg, Layers};
use cppdip_cli::treefile::{load_scenario, load_trees, save_trees};
use cppdip_core::coverage::Tree;
use cppdip_core::geometry::Point;
use cppdip_core::pipeline::{plan, PlanConfig, PolylineVertex, Scenario, VertexKind};
use serde_json::Value;

fn cppdip(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cppdip")).args(args).output().expect("binary runs")
}

fn s(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

/// Two close pairs and two isolated trees.
const SIX_TREES: &str = "id,x,y\n0,100,100\n1,180,120\n2,900,150\n3,960,230\n4,500,800\n5,1300,900\n";

fn report(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn six_tree_layout_needs_at_most_five_waypoints() {
    let dir = tempfile::tempdir().unwrap();
    let trees = write(dir.path(), "six.csv", SIX_TREES);
    let out = dir.path().join("r.json");
    let o = cppdip(&["plan", "--trees", &s(&trees), "--out", &s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    let n = r["waypoints"].as_array().unwrap().len();
    assert!((1..=5).contains(&n), "{n} waypoints");
    assert_eq!(r["tree_count"], 6);
}

#[test]
fn missing_tree_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = cppdip(&["plan", "--trees", &s(&dir.path().join("nope.csv")), "--out", &s(&dir.path().join("r.json"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("r.json").exists());
}

#[test]
fn malformed_row_exits_2_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let trees = write(dir.path(), "bad.csv", "id,x,y\n0,1,2\n1,abc,3\n");
    let o = cppdip(&["plan", "--trees", &s(&trees), "--out", &s(&dir.path().join("r.json"))]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains('x') && err.contains("row"), "{err}");
}

#[test]
fn plan_twice_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let trees = write(dir.path(), "six.csv", SIX_TREES);
    let run = |tag: &str| {
        let out = dir.path().join(format!("{tag}.json"));
        let svg = dir.path().join(format!("{tag}.svg"));
        let poly = dir.path().join(format!("{tag}.csv"));
        let o = cppdip(&[
            "plan", "--trees", &s(&trees), "--solver", "aco", "--seed", "9", "--out", &s(&out), "--plot", &s(&svg),
            "--polyline", &s(&poly),
        ]);
        assert!(o.status.success());
        [out, svg, poly].map(|p| std::fs::read(p).unwrap())
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn report_echoes_every_config_parameter() {
    let dir = tempfile::tempdir().unwrap();
    let trees = write(dir.path(), "six.csv", SIX_TREES);
    let out = dir.path().join("r.json");
    assert!(cppdip(&["plan", "--trees", &s(&trees), "--out", &s(&out)]).status.success());
    let echoed = &report(&out)["config"];
    let default = serde_json::to_value(PlanConfig::default()).unwrap();
    assert_eq!(echoed, &default);
}

#[test]
fn report_metrics_recompute_from_polyline() {
    let dir = tempfile::tempdir().unwrap();
    let trees = dir.path().join("t.csv");
    assert!(cppdip(&["generate", "--n", "50", "--seed", "4", "--out", &s(&trees)]).status.success());
    let out = dir.path().join("r.json");
    assert!(cppdip(&["plan", "--trees", &s(&trees), "--solver", "ghi", "--out", &s(&out)]).status.success());
    let r = report(&out);
    let pts: Vec<Point> = r["polyline"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| Point::new(v["point"]["x"].as_f64().unwrap(), v["point"]["y"].as_f64().unwrap()))
        .collect();
    let m = cppdip_core::evaluation::closed_metrics(&pts);
    assert_eq!(r["metrics"]["full"]["distance"].as_f64().unwrap(), m.distance);
    assert_eq!(r["metrics"]["full"]["angle"].as_f64().unwrap(), m.angle);
    assert_eq!(r["metrics"]["full"]["intersections"].as_u64().unwrap(), m.intersections as u64);
}

#[test]
fn compare_shape_and_values_match_plan_reports() {
    let dir = tempfile::tempdir().unwrap();
    let trees = dir.path().join("t.csv");
    assert!(cppdip(&["generate", "--n", "30", "--clusters", "1", "--seed", "2", "--out", &s(&trees)]).status.success());
    let table = dir.path().join("table.csv");
    let o = cppdip(&[
        "compare", "--trees", &s(&trees), "--solvers", "ghi,aco,mcrl", "--stages", "1,2,3,4", "--seeds", "5,6",
        "--out", &s(&table),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rd = csv::Reader::from_path(&table).unwrap();
    assert_eq!(
        rd.headers().unwrap().iter().collect::<Vec<_>>(),
        ["solver", "stage", "seed", "distance", "angle", "intersections", "canonical_cost"]
    );
    let rows: Vec<csv::StringRecord> = rd.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 24);

    for row in rows.iter().filter(|r| &r[2] == "6").take(4) {
        let out = dir.path().join(format!("{}-{}.json", &row[0], &row[1]));
        let o = cppdip(&[
            "plan", "--trees", &s(&trees), "--solver", &row[0], "--stage", &row[1], "--seed", "6", "--out", &s(&out),
        ]);
        assert!(o.status.success());
        let r = report(&out);
        let full = &r["metrics"]["full"];
        assert_eq!(row[3].parse::<f64>().unwrap(), full["distance"].as_f64().unwrap());
        assert_eq!(row[4].parse::<f64>().unwrap(), full["angle"].as_f64().unwrap());
        assert_eq!(row[5].parse::<u64>().unwrap(), full["intersections"].as_u64().unwrap());
        assert_eq!(row[6].parse::<f64>().unwrap(), r["metrics"]["canonical_cost"].as_f64().unwrap());
    }
}

#[test]
fn empty_solver_list_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let trees = write(dir.path(), "six.csv", SIX_TREES);
    let o = cppdip(&["compare", "--trees", &s(&trees), "--solvers", "", "--out", &s(&dir.path().join("t.csv"))]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn invalid_config_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let trees = write(dir.path(), "six.csv", SIX_TREES);
    let out = s(&dir.path().join("r.json"));
    let bad = write(dir.path(), "bad.json", r#"{"coverage": {"fov_radius": -5}}"#);
    let o = cppdip(&["plan", "--trees", &s(&trees), "--config", &s(&bad), "--out", &out]);
    assert_eq!(o.status.code(), Some(3));
    let unknown = write(dir.path(), "unknown.json", r#"{"mcrl": {"episodez": 10}}"#);
    let o = cppdip(&["plan", "--trees", &s(&trees), "--config", &s(&unknown), "--out", &out]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("episodez"));
    let o = cppdip(&["plan", "--trees", &s(&trees), "--stage", "7", "--out", &out]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn partial_config_takes_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let trees = write(dir.path(), "six.csv", SIX_TREES);
    let cfg = write(dir.path(), "c.json", r#"{"seed": 11, "mcrl": {"episodes": 300}}"#);
    let out = dir.path().join("r.json");
    assert!(cppdip(&["plan", "--trees", &s(&trees), "--config", &s(&cfg), "--out", &s(&out)]).status.success());
    let r = report(&out);
    assert_eq!(r["config"]["seed"], 11);
    assert_eq!(r["config"]["mcrl"]["episodes"], 300);
    assert_eq!(r["config"]["mcrl"]["gamma"], 0.2);
}

#[test]
fn unwritable_output_exits_4_without_partial_files() {
    let dir = tempfile::tempdir().unwrap();
    let trees = write(dir.path(), "six.csv", SIX_TREES);
    let out = dir.path().join("r.json");
    let plot = dir.path().join("missing-dir").join("p.svg");
    let o = cppdip(&["plan", "--trees", &s(&trees), "--out", &s(&out), "--plot", &s(&plot)]);
    assert_eq!(o.status.code(), Some(4));
    assert!(!out.exists());
}

#[test]
fn generate_single_tree_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let one = dir.path().join("one.csv");
    assert!(cppdip(&["generate", "--n", "1", "--out", &s(&one)]).status.success());
    assert_eq!(load_trees(&one, 50.0).unwrap().len(), 1);

    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        assert!(cppdip(&["generate", "--n", "100", "--clusters", "3", "--seed", "8", "--out", &s(p)]).status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let sc = load_scenario(&a, 50.0).unwrap();
    assert_eq!(sc.trees.len(), 100);
    sc.validate().unwrap();
    for (i, t) in sc.trees.iter().enumerate() {
        for u in &sc.trees[i + 1..] {
            assert!(t.center.dist(&u.center) >= 100.0 - 1e-9);
        }
    }
}

#[test]
fn generate_infeasible_packing_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = cppdip(&["generate", "--n", "500", "--bounds", "300x300", "--out", &s(&dir.path().join("t.csv"))]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn tree_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let trees = vec![Tree::new(3, 10.5, 20.25, 40.0), Tree::new(7, 300.0, 0.0, 55.5), Tree::new(9, 1e3, 2e3, 50.0)];
    for name in ["t.csv", "t.json"] {
        let p = dir.path().join(name);
        save_trees(&p, &trees).unwrap();
        let back = load_trees(&p, 50.0).unwrap();
        assert_eq!(back, trees);
        let q = dir.path().join(format!("again-{name}"));
        save_trees(&q, &back).unwrap();
        assert_eq!(load_trees(&q, 50.0).unwrap(), trees);
    }
}

#[test]
fn emit_default_config_parses_back() {
    let o = cppdip(&["--emit-default-config"]);
    assert!(o.status.success());
    let cfg: PlanConfig = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(cfg, PlanConfig::default());
}

#[test]
fn svg_single_tree_has_one_tree_and_one_waypoint() {
    let trees = vec![Tree::new(0, 200.0, 200.0, 50.0)];
    let sc = Scenario::from_trees("one", trees.clone());
    let cfg = PlanConfig::default();
    let r = plan(&sc, &cfg).unwrap();
    let svg = render_svg(&r, &trees, cfg.coverage.fov_radius, &Layers::default());
    assert_eq!(svg.matches(r#"class="tree""#).count(), 1);
    assert_eq!(svg.matches(r#"class="waypoint""#).count(), 1);
    assert_eq!(svg, render_svg(&r, &trees, cfg.coverage.fov_radius, &Layers::default()));
}

#[test]
fn svg_bowtie_shows_one_crossing() {
    let trees: Vec<Tree> =
        [(0.0, 0.0), (400.0, 0.0), (0.0, 400.0), (400.0, 400.0)].iter().enumerate().map(|(i, &(x, y))| Tree::new(i as u64, x, y, 50.0)).collect();
    let sc = Scenario::from_trees("bowtie", trees.clone());
    let cfg = PlanConfig::default();
    let mut r = plan(&sc, &cfg).unwrap();
    r.polyline = [(0.0, 0.0), (400.0, 400.0), (400.0, 0.0), (0.0, 400.0)]
        .iter()
        .enumerate()
        .map(|(k, &(x, y))| PolylineVertex { point: Point::new(x, y), kind: VertexKind::Waypoint, node: k })
        .collect();
    let svg = render_svg(&r, &trees, cfg.coverage.fov_radius, &Layers::default());
    assert_eq!(svg.matches(r#"class="crossing""#).count(), 1);
    assert!(svg.contains("intersections: 1<"));
    let off = render_svg(&r, &trees, cfg.coverage.fov_radius, &Layers::parse("trees,path").unwrap());
    assert_eq!(off.matches(r#"class="crossing""#).count(), 0);
    assert_eq!(off.matches(r#"class="waypoint""#).count(), 0);
}

#[test]
fn bad_thread_count_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let trees = write(dir.path(), "six.csv", SIX_TREES);
    let o = Command::new(env!("CARGO_BIN_EXE_cppdip"))
        .env("CPP_DIP_THREADS", "zero")
        .args(["plan", "--trees", &s(&trees), "--out", &s(&dir.path().join("r.json"))])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}
