//! Synthetic 2-D benchmarks with known ground-truth rectangles.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::pattern::RealRect;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// Pairwise disjoint, well separated rectangles.
    Simple,
    /// Touching rectangles of different shapes and densities.
    Variations,
    /// A dense region with a sparse rectangular hole.
    Inverted,
    SimpleOverlaps,
    /// One rectangle nested inside another.
    SimpleInclusion,
    /// Nesting over several levels.
    ComplexInclusion,
}

impl Layout {
    pub const ALL: [Layout; 6] = [
        Layout::Simple,
        Layout::Variations,
        Layout::Inverted,
        Layout::SimpleOverlaps,
        Layout::SimpleInclusion,
        Layout::ComplexInclusion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Layout::Simple => "simple",
            Layout::Variations => "variations",
            Layout::Inverted => "inverted",
            Layout::SimpleOverlaps => "simple_overlaps",
            Layout::SimpleInclusion => "simple_inclusion",
            Layout::ComplexInclusion => "complex_inclusion",
        }
    }

    /// Ground-truth rectangles as `[x_lo, y_lo, x_hi, y_hi]`. For
    /// [`Layout::Inverted`] the first is the dense region, the second the hole.
    pub fn rectangles(self) -> &'static [[f64; 4]] {
        match self {
            Layout::Simple => &[
                [5.0, 5.0, 25.0, 25.0],
                [40.0, 5.0, 60.0, 30.0],
                [75.0, 10.0, 95.0, 35.0],
                [10.0, 60.0, 35.0, 90.0],
                [60.0, 55.0, 90.0, 85.0],
            ],
            Layout::Variations => &[
                [10.0, 60.0, 40.0, 90.0],
                [40.0, 70.0, 60.0, 80.0],
                [60.0, 50.0, 90.0, 90.0],
                [20.0, 10.0, 70.0, 30.0],
            ],
            Layout::Inverted => &[[10.0, 10.0, 90.0, 90.0], [35.0, 35.0, 65.0, 65.0]],
            Layout::SimpleOverlaps => &[
                [10.0, 10.0, 40.0, 40.0],
                [34.0, 34.0, 52.0, 52.0],
                [65.0, 10.0, 90.0, 35.0],
                [80.0, 30.0, 95.0, 55.0],
                [15.0, 70.0, 45.0, 95.0],
            ],
            Layout::SimpleInclusion => &[
                [10.0, 10.0, 60.0, 60.0],
                [30.0, 30.0, 42.0, 42.0],
                [70.0, 60.0, 95.0, 95.0],
                [70.0, 10.0, 90.0, 40.0],
            ],
            Layout::ComplexInclusion => &[
                [5.0, 5.0, 70.0, 70.0],
                [15.0, 15.0, 55.0, 55.0],
                [25.0, 25.0, 40.0, 40.0],
                [75.0, 50.0, 95.0, 95.0],
                [80.0, 70.0, 90.0, 85.0],
                [75.0, 5.0, 95.0, 35.0],
            ],
        }
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Layout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Layout::ALL
            .into_iter()
            .find(|l| l.name() == s.trim().to_ascii_lowercase().replace('-', "_"))
            .ok_or_else(|| Error::UnknownLayout(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub layout: Layout,
    pub support: usize,
    pub seed: u64,
    pub rectangles: Vec<RealRect>,
}

/// Sparse points placed in the hole of [`Layout::Inverted`] by default.
pub fn default_hole_points(support: usize) -> usize {
    (support / 10).max(1)
}

/// Samples `support` points uniformly in each ground-truth rectangle.
pub fn generate(layout: Layout, support: usize, seed: u64) -> Result<(Dataset, GroundTruth)> {
    generate_with_hole(layout, support, seed, default_hole_points(support))
}

/// As [`generate`], with an explicit number of sparse hole points for
/// [`Layout::Inverted`] (ignored by other layouts).
pub fn generate_with_hole(
    layout: Layout,
    support: usize,
    seed: u64,
    hole_points: usize,
) -> Result<(Dataset, GroundTruth)> {
    if support == 0 {
        return Err(Error::ZeroSupport);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rects: Vec<RealRect> = layout
        .rectangles()
        .iter()
        .map(|r| RealRect::new(vec![r[0], r[1]], vec![r[2], r[3]]))
        .collect();
    let mut rows = Vec::new();
    if layout == Layout::Inverted {
        let (outer, hole) = (&rects[0], &rects[1]);
        while rows.len() < support {
            let p = sample(&mut rng, outer);
            if !hole.contains_point(&p) {
                rows.push(p);
            }
        }
        rows.extend((0..hole_points).map(|_| sample(&mut rng, hole)));
    } else {
        for r in &rects {
            rows.extend((0..support).map(|_| sample(&mut rng, r)));
        }
    }
    let data = Dataset::new(vec!["x".into(), "y".into()], rows, None)?;
    let truth = GroundTruth {
        layout,
        support,
        seed,
        rectangles: rects,
    };
    Ok((data, truth))
}

fn sample(rng: &mut ChaCha8Rng, r: &RealRect) -> Vec<f64> {
    (0..r.n_dims())
        .map(|i| rng.gen_range(r.lo[i]..=r.hi[i]))
        .collect()
}

pub const DATA_FILE: &str = "data.csv";
pub const TRUTH_FILE: &str = "truth.txt";

/// Writes `data.csv` and `truth.txt` into an existing directory.
pub fn export(
    data: &Dataset,
    truth: &GroundTruth,
    dir: impl AsRef<Path>,
) -> Result<(PathBuf, PathBuf)> {
    let dir = dir.as_ref();
    if !dir.is_dir() {
        return Err(Error::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "directory does not exist"),
        ));
    }
    let data_path = dir.join(DATA_FILE);
    data.write_csv(&data_path, None)?;
    let truth_path = dir.join(TRUTH_FILE);
    fs::write(&truth_path, truth_to_text(truth)).map_err(|e| Error::io(&truth_path, e))?;
    Ok((data_path, truth_path))
}

pub fn truth_to_text(truth: &GroundTruth) -> String {
    let mut out = format!(
        "# layout={} seed={} support={}\n",
        truth.layout, truth.seed, truth.support
    );
    for r in &truth.rectangles {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.lo[0], r.lo[1], r.hi[0], r.hi[1]
        ));
    }
    out
}

pub fn import_truth(path: impl AsRef<Path>) -> Result<GroundTruth> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_truth(&text)
}

/// Parses the ground-truth format; a header line is required.
pub fn parse_truth(text: &str) -> Result<GroundTruth> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::EmptyInput("ground-truth file".into()))?;
    let header = header
        .trim()
        .strip_prefix('#')
        .ok_or_else(|| Error::BadGridLine {
            line: 1,
            message: "expected a '# layout=... seed=... support=...' header".into(),
        })?;
    let (mut layout, mut seed, mut support) = (None, None, None);
    for field in header.split_whitespace() {
        let bad = |m: &str| Error::BadGridLine {
            line: 1,
            message: format!("{m}: '{field}'"),
        };
        match field.split_once('=') {
            Some(("layout", v)) => layout = Some(v.parse::<Layout>()?),
            Some(("seed", v)) => seed = Some(v.parse().map_err(|_| bad("bad seed"))?),
            Some(("support", v)) => support = Some(v.parse().map_err(|_| bad("bad support"))?),
            _ => return Err(bad("unknown header field")),
        }
    }
    let missing = |what: &str| Error::BadGridLine {
        line: 1,
        message: format!("header lacks {what}"),
    };
    let mut rectangles = Vec::new();
    for (idx, line) in lines {
        let values: Vec<f64> = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::BadGridLine {
                line: idx + 1,
                message: e.to_string(),
            })?;
        if values.len() != 4 || values[0] > values[2] || values[1] > values[3] {
            return Err(Error::BadGridLine {
                line: idx + 1,
                message: "expected x_lo,y_lo,x_hi,y_hi with lo <= hi".into(),
            });
        }
        rectangles.push(RealRect::new(
            vec![values[0], values[1]],
            vec![values[2], values[3]],
        ));
    }
    Ok(GroundTruth {
        layout: layout.ok_or_else(|| missing("layout"))?,
        seed: seed.ok_or_else(|| missing("seed"))?,
        support: support.ok_or_else(|| missing("support"))?,
        rectangles,
    })
}
