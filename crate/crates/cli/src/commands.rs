use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use mint_core::dataset::{discretize as to_indices, equal_width_grid, import_grid, load_csv};
use mint_core::eval::{
    compression_ratio, grid_resolution, jcd, pairwise_cover_jaccard, pattern_accuracy, EvalReport,
};
use mint_core::miner::mine as run_miner;
use mint_core::synth::{export, generate, import_truth};
use mint_core::{BinsSpec, Dataset, DiscretizationGrid};
use rayon::prelude::*;
use serde::Serialize;

use crate::document::PatternDocument;
use crate::{
    DiscretizeArgs, EvalArgs, GridArgs, InputArgs, MineArgs, Neighbours, SweepArgs, SynthArgs,
};

/// Partner count taken into account by the overlap score.
const OVERLAP_PARTNERS: usize = 10;

fn load(input: &InputArgs) -> Result<Dataset> {
    load_csv(&input.input, input.label_column.as_deref())
        .with_context(|| format!("reading {}", input.input.display()))
}

fn build_grid(data: &Dataset, grid: &GridArgs) -> Result<DiscretizationGrid> {
    Ok(match &grid.grid_file {
        Some(path) => {
            import_grid(path, data).with_context(|| format!("reading {}", path.display()))?
        }
        None => equal_width_grid(data, &grid.bins, grid.grid_pad)?,
    })
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let mut out = sink(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

pub fn mine(args: &MineArgs) -> Result<()> {
    let data = load(&args.input)?;
    let grid = build_grid(&data, &args.grid)?;
    let d = to_indices(&data, &grid)?;
    let cfg = args.search.config(args.k.resolve(data.n_objects()));
    let result = run_miner(&d, &cfg)?;
    eprintln!(
        "{} patterns, compression ratio {:.4}, {:.3} s",
        result.patterns.len(),
        result.compression_ratio(),
        result.elapsed.as_secs_f64()
    );
    let doc = PatternDocument::new(&data, &grid, &cfg, &result, args.emit_covers);
    write_json(&doc, args.output.as_deref())
}

pub fn synth(args: &SynthArgs) -> Result<()> {
    let (data, truth) = generate(args.layout, args.support as usize, args.seed)?;
    fs::create_dir_all(&args.output)
        .with_context(|| format!("creating {}", args.output.display()))?;
    let (data_path, truth_path) = export(&data, &truth, &args.output)?;
    eprintln!(
        "{} objects written to {}, ground truth to {}",
        data.n_objects(),
        data_path.display(),
        truth_path.display()
    );
    Ok(())
}

fn read_document(path: &Path) -> Result<PatternDocument> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc: PatternDocument =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if doc.patterns.is_empty() {
        bail!("{} holds no patterns", path.display());
    }
    Ok(doc)
}

pub fn eval(args: &EvalArgs) -> Result<()> {
    let doc = read_document(&args.patterns)?;
    let grid = DiscretizationGrid::new(
        (0..doc.grid.n_attributes())
            .map(|i| doc.grid.cuts(i).to_vec())
            .collect(),
    )?;
    let patterns = doc.pattern_set()?;
    let mut report = EvalReport {
        compression_ratio: compression_ratio(&doc.lengths, &doc.baseline)?,
        n_patterns: patterns.len(),
        pairwise_cover_jaccard: None,
        accuracy: None,
        jcd_h_t: None,
        jcd_t_h: None,
        runtime_seconds: None,
    };

    if let Some(path) = &args.truth {
        let truth = import_truth(path).with_context(|| format!("reading {}", path.display()))?;
        let mined = doc.rectangles(args.mapping());
        if truth
            .rectangles
            .iter()
            .any(|r| r.n_dims() != doc.attributes.len())
        {
            bail!(
                "ground truth is {}-dimensional but the patterns have {} attributes",
                truth.rectangles[0].n_dims(),
                doc.attributes.len()
            );
        }
        let eta = grid_resolution(&grid);
        report.jcd_h_t = Some(jcd(&mined, &truth.rectangles, eta)?);
        report.jcd_t_h = Some(jcd(&truth.rectangles, &mined, eta)?);
    }

    if let Some(path) = &args.input {
        let data = load_csv(path, args.label_column.as_deref())
            .with_context(|| format!("reading {}", path.display()))?;
        if data.n_objects() != doc.n_objects || data.attributes() != doc.attributes.as_slice() {
            bail!(
                "{} does not match the data the patterns were mined from",
                path.display()
            );
        }
        let d = to_indices(&data, &grid)?;
        report.pairwise_cover_jaccard = pairwise_cover_jaccard(&patterns, &d, OVERLAP_PARTNERS);
        if let Some(labels) = data.labels() {
            if !doc.has_covers() {
                bail!("accuracy needs pattern covers; mine with --emit-covers");
            }
            patterns.check_partition(data.n_objects())?;
            report.accuracy = Some(pattern_accuracy(&patterns, labels, args.weighted)?);
        }
    }

    let mut out = sink(args.output.as_deref())?;
    if args.csv {
        report.write_csv(&mut out, true)?;
    } else {
        writeln!(out, "{}", report.to_json()?)?;
    }
    out.flush()?;
    Ok(())
}

pub fn discretize(args: &DiscretizeArgs) -> Result<()> {
    let data = load(&args.input)?;
    let grid = build_grid(&data, &args.grid)?;
    let d = to_indices(&data, &grid)?;
    let mut out = csv::Writer::from_writer(sink(args.output.as_deref())?);
    out.write_record(d.attributes())?;
    for g in 0..d.n_objects() {
        out.write_record(d.coords(g).iter().map(u32::to_string))?;
    }
    out.flush()?;
    if let Some(path) = &args.grid_output {
        fs::write(path, grid.to_text()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct SweepRow {
    bins_setting: String,
    k_setting: String,
    bins: usize,
    k: usize,
    compression_ratio: f64,
    n_patterns: usize,
    pairwise_cover_jaccard: Option<f64>,
    accuracy: Option<f64>,
}

#[derive(Debug, Serialize)]
struct TimingRow<'a> {
    bins_setting: &'a str,
    k_setting: &'a str,
    runtime_seconds: f64,
}

/// Display label and resolved count of one sweep setting.
type Setting = (String, usize);

fn scaled(factor: f64, base: f64) -> usize {
    ((factor * base).round() as usize).max(1)
}

/// Interval settings `5, ½√n, √n, 2√n` and neighbour settings
/// `5, ½√n, √n, 2√n, ½√(nm), √(nm), 2√(nm)`.
fn sweep_grid(n: usize, m: usize) -> (Vec<Setting>, Vec<Setting>) {
    let root = (n as f64).sqrt();
    let wide = ((n * m) as f64).sqrt();
    let bins = vec![
        ("5".to_string(), 5),
        ("0.5sqrt(n)".to_string(), scaled(0.5, root)),
        ("sqrt(n)".to_string(), scaled(1.0, root)),
        ("2sqrt(n)".to_string(), scaled(2.0, root)),
    ];
    let mut ks = bins.clone();
    ks.extend([
        ("0.5sqrt(nm)".to_string(), scaled(0.5, wide)),
        ("sqrt(nm)".to_string(), scaled(1.0, wide)),
        ("2sqrt(nm)".to_string(), scaled(2.0, wide)),
    ]);
    (bins, ks)
}

pub fn sweep(args: &SweepArgs) -> Result<()> {
    let data = load(&args.input)?;
    let (n, m) = (data.n_objects(), data.n_attributes());
    let (mut bin_settings, mut k_settings) = sweep_grid(n, m);
    if let Some(spec) = &args.bins {
        let resolved = spec.resolve(n, m)?;
        if resolved.iter().any(|&b| b != resolved[0]) {
            bail!("sweep takes a single interval count for all attributes");
        }
        bin_settings = vec![(spec.to_string(), resolved[0])];
    }
    if let Some(k) = args.k {
        let label = match k {
            Neighbours::Sqrt => "sqrt".to_string(),
            Neighbours::Fixed(k) => k.to_string(),
        };
        k_settings = vec![(label, k.resolve(n))];
    }

    let cells: Vec<(&Setting, &Setting)> = bin_settings
        .iter()
        .flat_map(|b| k_settings.iter().map(move |k| (b, k)))
        .collect();
    let results: Vec<Result<(SweepRow, f64)>> = cells
        .par_iter()
        .map(|&((bin_label, bins), (k_label, k))| {
            let grid = equal_width_grid(&data, &BinsSpec::Uniform(*bins), args.grid_pad)?;
            let d = to_indices(&data, &grid)?;
            let start = Instant::now();
            let result = run_miner(&d, &args.search.config(*k))?;
            let seconds = start.elapsed().as_secs_f64();
            let accuracy = data
                .labels()
                .map(|l| pattern_accuracy(&result.patterns, l, args.weighted))
                .transpose()?;
            let row = SweepRow {
                bins_setting: bin_label.clone(),
                k_setting: k_label.clone(),
                bins: *bins,
                k: *k,
                compression_ratio: result.compression_ratio(),
                n_patterns: result.patterns.len(),
                pairwise_cover_jaccard: pairwise_cover_jaccard(
                    &result.patterns,
                    &d,
                    OVERLAP_PARTNERS,
                ),
                accuracy,
            };
            Ok((row, seconds))
        })
        .collect();
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;

    let mut out = csv::Writer::from_writer(sink(args.output.as_deref())?);
    for (row, _) in &results {
        out.serialize(row)?;
    }
    out.flush()?;

    let timing_sink: Box<dyn Write> = match &args.output {
        Some(path) => {
            let path = timing_path(path);
            Box::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?)
        }
        None => Box::new(io::stderr()),
    };
    let mut timing = csv::Writer::from_writer(timing_sink);
    for (row, seconds) in &results {
        timing.serialize(TimingRow {
            bins_setting: &row.bins_setting,
            k_setting: &row.k_setting,
            runtime_seconds: *seconds,
        })?;
    }
    timing.flush()?;
    Ok(())
}

pub fn timing_path(output: &Path) -> PathBuf {
    let stem = output
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("sweep");
    output.with_file_name(format!("{stem}.timing.csv"))
}
