use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use gseed::bench::{self, CompareOptions, SWEEP_LEVELS};
use gseed::manifest::{parse_manifest, points_to_csv, read_points_csv};
use gseed::{synth, BBox, CellCode, GeoCoord, Geometry, IndexStore, Pipeline, PipelineConfig};

#[derive(Parser)]
#[command(
    name = "gseed",
    version,
    about = "GeoSOT grid encoding, ingestion and query tool"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the cell containing a coordinate.
    Encode {
        #[arg(long, allow_hyphen_values = true)]
        lon: f64,
        #[arg(long, allow_hyphen_values = true)]
        lat: f64,
        #[arg(long)]
        level: u8,
    },
    /// Print the bounds and centre of a cell.
    Decode {
        #[arg(long)]
        code: String,
    },
    /// Print the cells covering a GeoJSON geometry, one per line.
    Cover {
        #[arg(long)]
        geometry_file: PathBuf,
        #[arg(long)]
        level: u8,
    },
    /// Encode a JSON Lines manifest into an index file.
    Ingest {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Print the keys of matching records.
    Query(QueryArgs),
    /// Run a benchmark suite and write `<suite>.csv` and `<suite>.md`.
    Bench(BenchArgs),
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long, required_unless_present = "bbox", conflicts_with = "bbox")]
    prefix: Option<String>,
    /// west,south,east,north
    #[arg(long, allow_hyphen_values = true)]
    bbox: Option<String>,
    /// Filter level for --bbox; chosen from the box area by default.
    #[arg(long, requires = "bbox")]
    level: Option<u8>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Levels,
    Adaptive,
    Hetero,
    Compare,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum)]
    suite: Suite,
    /// CSV of points with header `lon,lat`; synthesized from the seed when absent.
    #[arg(long)]
    points: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Also write the synthesized points to `<out>/<suite>_points.csv`.
    #[arg(long)]
    synthesize: bool,
    /// Number of synthesized points.
    #[arg(long, default_value_t = 20_000)]
    count: usize,
    /// Area of the synthesized adaptive-suite cloud, km².
    #[arg(long, default_value_t = 2.1)]
    area_km2: f64,
    /// Files per kind in the synthesized heterogeneous corpus.
    #[arg(long, default_value_t = 100)]
    files_per_kind: usize,
    /// Test box of the comparison suite, west,south,east,north; the
    /// points' bounding box by default.
    #[arg(long, allow_hyphen_values = true)]
    r#box: Option<String>,
    /// Omit timing metrics from the CSV.
    #[arg(long)]
    no_timing: bool,
    /// Evaluate the heterogeneous suite on all cores.
    #[arg(long)]
    parallel: bool,
}

fn parse_box(text: &str) -> anyhow::Result<BBox> {
    let v: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("box {text:?} is not four numbers"))?;
    let [w, s, e, n] = v[..] else {
        bail!("box {text:?} needs four values west,south,east,north");
    };
    Ok(BBox::new(w, s, e, n)?)
}

fn run(cmd: Command) -> anyhow::Result<()> {
    let stdout = std::io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    match cmd {
        Command::Encode { lon, lat, level } => {
            writeln!(out, "{}", gseed::z_encode(GeoCoord::new(lon, lat)?, level)?)?;
        }
        Command::Decode { code } => {
            let cell: CellCode = code.parse()?;
            let b = gseed::decode(&cell)?;
            let (cx, cy) = b.center();
            writeln!(out, "level {}", b.level)?;
            writeln!(
                out,
                "bounds {} {} {} {}",
                b.lon_min, b.lat_min, b.lon_max, b.lat_max
            )?;
            writeln!(out, "center {cx} {cy}")?;
        }
        Command::Cover {
            geometry_file,
            level,
        } => {
            let text = std::fs::read_to_string(&geometry_file)
                .with_context(|| format!("reading {}", geometry_file.display()))?;
            let value: serde_json::Value =
                serde_json::from_str(&text).context("geometry file is not JSON")?;
            let g = Geometry::from_geojson(&value)?;
            for c in
                gseed::cover_geometry(&g, level, gseed::geometry::DEFAULT_COVERAGE_CAP)?.cells()
            {
                writeln!(out, "{c}")?;
            }
        }
        Command::Ingest {
            manifest,
            out: index_path,
            config,
        } => {
            let cfg = match config {
                Some(p) => {
                    PipelineConfig::load(&p).with_context(|| format!("config {}", p.display()))?
                }
                None => PipelineConfig::default(),
            };
            let cap = cfg.coverage_cap;
            let pipeline = Pipeline::new(cfg)?;
            let text = std::fs::read_to_string(&manifest)
                .with_context(|| format!("reading {}", manifest.display()))?;
            let mut skipped = 0usize;
            let mut lines = Vec::new();
            let mut inputs = Vec::new();
            for (line, parsed) in parse_manifest(&text) {
                match parsed {
                    Ok(i) => {
                        lines.push(line);
                        inputs.push(i);
                    }
                    Err(e) => {
                        eprintln!("line {line}: {e}");
                        skipped += 1;
                    }
                }
            }
            let mut store = IndexStore::with_coverage_cap(cap);
            for (line, result) in lines.into_iter().zip(pipeline.encode_batch(inputs)) {
                if let Err(e) = result.and_then(|r| store.insert(r)) {
                    eprintln!("line {line}: {e}");
                    skipped += 1;
                }
            }
            store.save(&index_path)?;
            writeln!(out, "{} ok, {} skipped", store.len(), skipped)?;
        }
        Command::Query(q) => {
            let store = IndexStore::load(&q.index)
                .with_context(|| format!("index {}", q.index.display()))?;
            let hits = match (&q.prefix, &q.bbox) {
                (Some(p), _) => store.prefix_query(p)?,
                (None, Some(b)) => store.bbox_query(&parse_box(b)?, q.level)?,
                (None, None) => unreachable!("clap requires one query mode"),
            };
            for r in hits {
                writeln!(out, "{}", r.pk_text())?;
            }
        }
        Command::Bench(b) => bench_command(&b, &mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn load_or_synthesize(
    b: &BenchArgs,
    make: impl FnOnce() -> Vec<GeoCoord>,
    name: &str,
) -> anyhow::Result<(Vec<GeoCoord>, Option<u64>)> {
    if let Some(p) = &b.points {
        let pts = read_points_csv(p).with_context(|| format!("points {}", p.display()))?;
        return Ok((pts, None));
    }
    let pts = make();
    if b.synthesize {
        std::fs::create_dir_all(&b.out)?;
        std::fs::write(
            b.out.join(format!("{name}_points.csv")),
            points_to_csv(&pts),
        )?;
    }
    Ok((pts, Some(b.seed)))
}

fn bench_command(b: &BenchArgs, out: &mut impl Write) -> anyhow::Result<()> {
    let (mut report, seed) = match b.suite {
        Suite::Levels => {
            let (pts, seed) =
                load_or_synthesize(b, || synth::default_cloud(b.seed, b.count), "levels")?;
            (bench::run_level_sweep(&pts, &SWEEP_LEVELS)?, seed)
        }
        Suite::Adaptive => {
            if b.area_km2.is_nan() || b.area_km2 <= 0.0 {
                bail!("--area-km2 must be > 0");
            }
            let (pts, seed) = load_or_synthesize(
                b,
                || {
                    let area = synth::square_of_area(synth::study_area().center(), b.area_km2);
                    synth::cloud_spanning(&mut synth::rng(b.seed), b.count, &area)
                },
                "adaptive",
            )?;
            (bench::run_adaptive(&pts)?, seed)
        }
        Suite::Hetero => {
            let corpus = synth::heterogeneous_corpus(b.seed, b.files_per_kind, bench::HETERO_LEVEL);
            (
                bench::run_heterogeneous(&corpus, bench::HETERO_LEVEL, b.parallel)?
                    .param("files_per_kind", b.files_per_kind),
                Some(b.seed),
            )
        }
        Suite::Compare => {
            let (pts, seed) =
                load_or_synthesize(b, || synth::default_cloud(b.seed, b.count), "compare")?;
            let test_box = match &b.r#box {
                Some(t) => parse_box(t)?,
                None => BBox::of_points(&pts),
            };
            let opts = CompareOptions {
                seed: b.seed,
                ..CompareOptions::default()
            };
            (bench::run_comparison(&pts, &test_box, &opts)?, seed)
        }
    };
    report.seed = seed;
    report.write(&b.out, !b.no_timing)?;
    let name = &report.suite;
    writeln!(
        out,
        "{}",
        Path::new(&b.out).join(format!("{name}.csv")).display()
    )?;
    writeln!(
        out,
        "{}",
        Path::new(&b.out).join(format!("{name}.md")).display()
    )?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
