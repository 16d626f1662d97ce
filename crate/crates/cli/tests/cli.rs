use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mint_core::dataset::{discretize, equal_width_grid, import_grid, load_csv};
use mint_core::miner::{mine, MinerConfig, PruneMode};
use mint_core::BinsSpec;
use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/data")
        .join(name)
}

fn mint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mint"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = mint(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn running_example_args<'a>(example: &'a str, grid: &'a str) -> Vec<&'a str> {
    vec![
        "mine",
        "--input",
        example,
        "--grid-file",
        grid,
        "--k",
        "1",
        "--knn-propagate",
        "--prune-at-end",
    ]
}

#[test]
fn mine_reproduces_the_running_example() {
    let (example, grid) = (data("example.csv"), data("example_grid.txt"));
    let mut args = running_example_args(path(&example), path(&grid));
    args.push("--emit-covers");
    let doc: Value = serde_json::from_str(&ok(&args)).unwrap();
    let covers: Vec<Vec<u64>> = doc["patterns"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| {
            p["cover"]
                .as_array()
                .unwrap()
                .iter()
                .map(|v| v.as_u64().unwrap())
                .collect()
        })
        .collect();
    assert_eq!(covers, vec![(4..12).collect::<Vec<_>>(), vec![0, 1, 2, 3]]);
    let merged: Vec<Value> = doc["trace"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["merged"].clone())
        .collect();
    assert_eq!(
        merged,
        vec![
            serde_json::json!([0, 2]),
            serde_json::json!([3, 5]),
            serde_json::json!([4, 6]),
            serde_json::json!([8, 9]),
            serde_json::json!([1, 7])
        ]
    );
    let p = &doc["patterns"][1];
    assert_eq!(p["bounds"], serde_json::json!([[0, 4], [0, 4]]));
    assert_eq!(p["sizes"], serde_json::json!([5, 5]));
    assert_eq!(p["usage"], 4);
}

#[test]
fn covers_are_omitted_by_default() {
    let (example, grid) = (data("example.csv"), data("example_grid.txt"));
    let doc: Value =
        serde_json::from_str(&ok(&running_example_args(path(&example), path(&grid)))).unwrap();
    assert!(doc["patterns"][0].get("cover").is_none());
}

#[test]
fn mined_rectangles_round_trip_through_json() {
    let iris = data("iris.csv");
    let doc: Value = serde_json::from_str(&ok(&[
        "mine",
        "--input",
        path(&iris),
        "--label-column",
        "class",
        "--bins",
        "5",
        "--k",
        "5",
    ]))
    .unwrap();

    let dataset = load_csv(&iris, Some("class")).unwrap();
    let grid = equal_width_grid(&dataset, &BinsSpec::Uniform(5), false).unwrap();
    let d = discretize(&dataset, &grid).unwrap();
    let cfg = MinerConfig {
        k_neighbors: 5,
        ..MinerConfig::default()
    };
    let lib = mine(&d, &cfg).unwrap();

    let patterns = doc["patterns"].as_array().unwrap();
    assert_eq!(patterns.len(), lib.patterns.len());
    for (p, h) in patterns.iter().zip(lib.patterns.iter()) {
        let bounds: Vec<[u32; 2]> = serde_json::from_value(p["bounds"].clone()).unwrap();
        let lower: Vec<u32> = bounds.iter().map(|b| b[0]).collect();
        let upper: Vec<u32> = bounds.iter().map(|b| b[1]).collect();
        assert_eq!((lower, upper), (h.lower.clone(), h.upper.clone()));
        assert_eq!(p["usage"].as_u64().unwrap() as usize, h.usage());
        let interval: Vec<[f64; 2]> = serde_json::from_value(p["interval"].clone()).unwrap();
        let real = h.to_real(&grid);
        for (i, side) in interval.iter().enumerate() {
            assert_eq!(*side, [real.lo[i], real.hi[i]]);
        }
    }
    assert_eq!(
        doc["compression_ratio"].as_f64().unwrap(),
        lib.compression_ratio()
    );
}

#[test]
fn mine_is_byte_for_byte_deterministic() {
    let wine = data("wine.csv");
    let args = [
        "mine",
        "--input",
        path(&wine),
        "--label-column",
        "class",
        "--emit-covers",
    ];
    assert_eq!(ok(&args), ok(&args));
}

#[test]
fn iris_defaults_give_a_modest_pattern_count() {
    let iris = data("iris.csv");
    let doc: Value = serde_json::from_str(&ok(&[
        "mine",
        "--input",
        path(&iris),
        "--label-column",
        "class",
    ]))
    .unwrap();
    let n = doc["patterns"].as_array().unwrap().len();
    assert!((2..=30).contains(&n), "{n}");
    assert!(doc["compression_ratio"].as_f64().unwrap() < 1.0);
}

#[test]
fn eval_without_ground_truth_reports_ratio_and_count_only() {
    let dir = tempfile::tempdir().unwrap();
    let (example, grid) = (data("example.csv"), data("example_grid.txt"));
    let out = dir.path().join("example.json");
    let mut args = running_example_args(path(&example), path(&grid));
    args.extend(["--output", path(&out)]);
    ok(&args);
    let mined: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let report: Value = serde_json::from_str(&ok(&["eval", "--patterns", path(&out)])).unwrap();
    assert_eq!(report["n_patterns"], 2);
    assert_eq!(report["compression_ratio"], mined["compression_ratio"]);
    for key in [
        "pairwise_cover_jaccard",
        "accuracy",
        "jcd_h_t",
        "jcd_t_h",
        "runtime_seconds",
    ] {
        assert!(report[key].is_null(), "{key}");
    }
}

#[test]
fn eval_scores_synthetic_ground_truth_and_labels() {
    let dir = tempfile::tempdir().unwrap();
    let syn = dir.path().join("simple");
    ok(&[
        "synth",
        "--layout",
        "simple",
        "--support",
        "100",
        "--seed",
        "2",
        "--output",
        path(&syn),
    ]);
    let csv = syn.join("data.csv");
    let truth = syn.join("truth.txt");
    let json = dir.path().join("p.json");
    ok(&[
        "mine",
        "--input",
        path(&csv),
        "--knn-propagate",
        "--prune-at-end",
        "--output",
        path(&json),
    ]);
    let report: Value = serde_json::from_str(&ok(&[
        "eval",
        "--patterns",
        path(&json),
        "--truth",
        path(&truth),
        "--input",
        path(&csv),
    ]))
    .unwrap();
    assert!(report["jcd_t_h"].as_f64().unwrap() > 0.8);
    assert!(report["jcd_h_t"].as_f64().unwrap() > 0.5);
    assert!(report["pairwise_cover_jaccard"].as_f64().unwrap() <= 0.05);

    let iris = data("iris.csv");
    let ijson = dir.path().join("iris.json");
    ok(&[
        "mine",
        "--input",
        path(&iris),
        "--label-column",
        "class",
        "--emit-covers",
        "--output",
        path(&ijson),
    ]);
    let csv_report = ok(&[
        "eval",
        "--patterns",
        path(&ijson),
        "--input",
        path(&iris),
        "--label-column",
        "class",
        "--csv",
    ]);
    let lines: Vec<&str> = csv_report.lines().collect();
    assert_eq!(lines[0], "compression_ratio,n_patterns,pairwise_cover_jaccard,accuracy,jcd_h_t,jcd_t_h,runtime_seconds");
    let accuracy: f64 = lines[1].split(',').nth(3).unwrap().parse().unwrap();
    assert!(accuracy > 0.5 && accuracy <= 1.0);
}

#[test]
fn accuracy_without_covers_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let iris = data("iris.csv");
    let json = dir.path().join("iris.json");
    ok(&[
        "mine",
        "--input",
        path(&iris),
        "--label-column",
        "class",
        "--output",
        path(&json),
    ]);
    let out = mint(&[
        "eval",
        "--patterns",
        path(&json),
        "--input",
        path(&iris),
        "--label-column",
        "class",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--emit-covers"));
}

#[test]
fn synth_is_seeded_and_writes_both_files() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        ok(&[
            "synth",
            "--layout",
            "variations",
            "--support",
            "40",
            "--seed",
            "5",
            "--output",
            path(d),
        ]);
    }
    for f in ["data.csv", "truth.txt"] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap()
        );
    }
    let rows = std::fs::read_to_string(a.join("data.csv"))
        .unwrap()
        .lines()
        .count();
    assert_eq!(rows, 1 + 4 * 40);
}

#[test]
fn discretize_with_a_grid_file_writes_indices() {
    let (example, grid) = (data("example.csv"), data("example_grid.txt"));
    let text = ok(&[
        "discretize",
        "--input",
        path(&example),
        "--grid-file",
        path(&grid),
    ]);
    let dataset = load_csv(&example, None).unwrap();
    let d = discretize(&dataset, &import_grid(&grid, &dataset).unwrap()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("m1,m2"));
    for (g, line) in lines.enumerate() {
        let want: Vec<String> = d.coords(g).iter().map(u32::to_string).collect();
        assert_eq!(line, want.join(","));
    }
}

#[test]
fn sweep_covers_the_full_setting_grid() {
    let dir = tempfile::tempdir().unwrap();
    let iris = data("iris.csv");
    let (first, second) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for out in [&first, &second] {
        ok(&[
            "sweep",
            "--input",
            path(&iris),
            "--label-column",
            "class",
            "--output",
            path(out),
        ]);
    }
    let text = std::fs::read_to_string(&first).unwrap();
    assert_eq!(text.lines().count(), 1 + 28);
    assert_eq!(text, std::fs::read_to_string(&second).unwrap());
    let timing = std::fs::read_to_string(dir.path().join("a.timing.csv")).unwrap();
    assert_eq!(timing.lines().count(), 1 + 28);
    assert!(text
        .lines()
        .next()
        .unwrap()
        .starts_with("bins_setting,k_setting,bins,k,compression_ratio,n_patterns"));
}

#[test]
fn single_cell_sweep_matches_mine() {
    let wine = data("wine.csv");
    let row = ok(&[
        "sweep",
        "--input",
        path(&wine),
        "--label-column",
        "class",
        "--bins",
        "sqrt",
        "--k",
        "sqrt",
    ]);
    let fields: Vec<&str> = row.lines().nth(1).unwrap().split(',').collect();
    let doc: Value = serde_json::from_str(&ok(&[
        "mine",
        "--input",
        path(&wine),
        "--label-column",
        "class",
    ]))
    .unwrap();
    assert_eq!(row.lines().count(), 2);
    assert_eq!(
        fields[4].parse::<f64>().unwrap(),
        doc["compression_ratio"].as_f64().unwrap()
    );
    assert_eq!(
        fields[5].parse::<usize>().unwrap(),
        doc["patterns"].as_array().unwrap().len()
    );
}

#[test]
fn prune_flags_reach_the_miner() {
    let iris = data("iris.csv");
    let base = [
        "mine",
        "--input",
        path(&iris),
        "--label-column",
        "class",
        "--bins",
        "5",
        "--k",
        "5",
    ];
    for (flag, mode) in [
        ("--no-prune", PruneMode::Off),
        ("--prune-at-end", PruneMode::AtEnd),
    ] {
        let mut args = base.to_vec();
        args.push(flag);
        let doc: Value = serde_json::from_str(&ok(&args)).unwrap();
        assert_eq!(doc["config"]["prune"], serde_json::to_value(mode).unwrap());
    }
}

#[test]
fn usage_errors_exit_with_one() {
    let iris = data("iris.csv");
    let i = path(&iris);
    for args in [
        vec!["mine"],
        vec!["mine", "--input", i, "--no-prune", "--prune-at-end"],
        vec!["mine", "--input", i, "--bins", "4", "--grid-file", "g.txt"],
        vec!["mine", "--input", i, "--k", "zero"],
        vec!["mine", "--input", i, "--epsilon", "0"],
        vec!["mine", "--input", i, "--prune-top-n", "0"],
        vec![
            "synth",
            "--layout",
            "circle",
            "--support",
            "5",
            "--output",
            "x",
        ],
        vec!["frobnicate"],
    ] {
        assert_eq!(mint(&args).status.code(), Some(1), "{args:?}");
    }
    assert_eq!(mint(&["--help"]).status.code(), Some(0));
}

#[test]
fn data_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "").unwrap();
    let ragged = dir.path().join("ragged.csv");
    std::fs::write(&ragged, "a,b\n1,2\n3\n").unwrap();
    let missing = dir.path().join("missing.csv");
    let iris = data("iris.csv");
    for args in [
        vec!["mine", "--input", path(&empty)],
        vec!["mine", "--input", path(&ragged)],
        vec!["mine", "--input", path(&missing)],
        vec!["mine", "--input", path(&iris), "--label-column", "nope"],
        vec!["eval", "--patterns", path(&missing)],
    ] {
        let out = mint(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}
