use mint_core::dataset::load_csv;
use mint_core::synth::{export, generate, import_truth, parse_truth, truth_to_text, Layout};

#[test]
fn export_then_import_reproduces_data_and_truth() {
    let dir = tempfile::tempdir().unwrap();
    for layout in Layout::ALL {
        let (data, truth) = generate(layout, 50, 7).unwrap();
        let sub = dir.path().join(layout.name());
        std::fs::create_dir(&sub).unwrap();
        let (data_path, truth_path) = export(&data, &truth, &sub).unwrap();
        assert_eq!(import_truth(&truth_path).unwrap(), truth);
        let back = load_csv(&data_path, None).unwrap();
        assert_eq!(back.n_objects(), data.n_objects());
        for g in 0..data.n_objects() {
            assert_eq!(back.row(g), data.row(g));
        }
    }
}

#[test]
fn points_fall_inside_the_ground_truth() {
    for layout in Layout::ALL {
        let (data, truth) = generate(layout, 200, 3).unwrap();
        for row in data.rows() {
            assert!(
                truth.rectangles.iter().any(|r| r.contains_point(row)),
                "{layout}: {row:?}"
            );
        }
    }
}

#[test]
fn generation_is_seeded() {
    let (a, _) = generate(Layout::Variations, 100, 11).unwrap();
    let (b, _) = generate(Layout::Variations, 100, 11).unwrap();
    let (c, _) = generate(Layout::Variations, 100, 12).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn export_into_missing_directory_fails() {
    let dir = tempfile::tempdir().unwrap();
    let (data, truth) = generate(Layout::Simple, 10, 1).unwrap();
    assert!(export(&data, &truth, dir.path().join("absent")).is_err());
}

#[test]
fn malformed_truth_is_rejected() {
    assert!(parse_truth("").is_err());
    assert!(parse_truth("0,0,1,1\n").is_err());
    assert!(parse_truth("# layout=simple seed=1 support=5\n2,0,1,1\n").is_err());
    let (_, truth) = generate(Layout::SimpleInclusion, 5, 9).unwrap();
    assert_eq!(parse_truth(&truth_to_text(&truth)).unwrap(), truth);
}
