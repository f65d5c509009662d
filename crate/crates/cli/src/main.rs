use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use geoscore::apls::DEFAULT_BUFFER;
use geoscore::geometry::LocalProjection;
use geoscore::ingest::{parse_roads, roads_to_geojson, DEFAULT_TILE_PATTERN};
use geoscore::mask::{
    pixel_metrics, read_mask, MaskError, DEFAULT_CORNER_PX, DEFAULT_HALFWIDTH, DEFAULT_PRUNE_PX, DEFAULT_RELAX_RADIUS,
};
use geoscore::pipeline::{
    graph_to_roads, make_mask_file, mask_file_to_graph, score_buildings_dirs, score_roads_dirs, write_buildings_csv,
    write_csv_file, write_json, write_roads_csv, BuildingsConfig, ErrorClass, MaskConfig, PipelineError,
    RefineConfig, RoadsConfig,
};
use geoscore::road_graph::{
    build_graph, graph_to_geojson, inject_midpoints, DEFAULT_MERGE_TOLERANCE, DEFAULT_MIDPOINT_SPACING,
};

#[derive(Parser)]
#[command(name = "geoscore", version, about = "Score building footprints and road networks against ground truth")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Building footprint F1 over paired truth/proposal GeoJSON directories.
    ScoreBuildings(ScoreBuildings),
    /// APLS over paired truth/proposal road GeoJSON directories.
    ScoreRoads(ScoreRoads),
    /// Rasterize road GeoJSON files into PNG masks with geotransform sidecars.
    MakeMasks(MakeMasks),
    /// Convert PNG masks back into road GeoJSON via thinning.
    Mask2graph(Mask2Graph),
    /// Pixel IoU, F1 and relaxed F1 between two masks.
    PixelMetrics(PixelMetricsArgs),
    /// Write a road file's graph (nodes and edges) as GeoJSON for inspection.
    ExportGraph(ExportGraph),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    proposal: PathBuf,
    /// CSV report path; the JSON summary goes next to it unless --summary is set.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Regex with a `tile` group (and optionally a `city` group) applied to file names.
    #[arg(long, default_value = DEFAULT_TILE_PATTERN)]
    tile_regex: String,
    /// Worker threads.
    #[arg(long, default_value_t = default_parallelism())]
    parallelism: usize,
}

impl Common {
    fn summary_path(&self) -> PathBuf {
        self.summary.clone().unwrap_or_else(|| self.out.with_extension("json"))
    }
}

#[derive(Args)]
struct ScoreBuildings {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 0.5)]
    iou_threshold: f64,
}

#[derive(Args)]
struct ScoreRoads {
    #[command(flatten)]
    common: Common,
    /// Snap buffer in meters.
    #[arg(long, default_value_t = DEFAULT_BUFFER)]
    buffer: f64,
    /// Midpoint spacing in meters.
    #[arg(long, default_value_t = DEFAULT_MIDPOINT_SPACING)]
    spacing: f64,
    /// Endpoint merge distance in meters.
    #[arg(long, default_value_t = DEFAULT_MERGE_TOLERANCE)]
    merge_tolerance: f64,
}

#[derive(Args)]
struct MakeMasks {
    /// Directory of road GeoJSON files.
    #[arg(long)]
    roads: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pixel_size: f64,
    #[arg(long, default_value_t = DEFAULT_HALFWIDTH)]
    halfwidth: f64,
    /// Extra border around the road extent, in meters.
    #[arg(long, default_value_t = 10.0)]
    margin: f64,
}

#[derive(Args)]
struct Mask2Graph {
    /// Directory of PNG masks with sidecars.
    #[arg(long)]
    masks: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Foreground threshold as a fraction of 255.
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    #[arg(long, default_value_t = 0)]
    open_radius: usize,
    #[arg(long, default_value_t = 0)]
    close_radius: usize,
    /// Terminal spurs shorter than this many pixels are dropped.
    #[arg(long, default_value_t = DEFAULT_PRUNE_PX)]
    prune_px: f64,
    /// Line simplification tolerance in pixels.
    #[arg(long, default_value_t = 1.0)]
    simplify_px: f64,
    /// Corner-cutting segments up to this many pixels are squared off; 0 disables.
    #[arg(long, default_value_t = DEFAULT_CORNER_PX)]
    corner_px: f64,
}

#[derive(Args)]
struct PixelMetricsArgs {
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    proposal: PathBuf,
    #[arg(long, default_value_t = DEFAULT_RELAX_RADIUS)]
    relax_radius: usize,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    /// Write JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportGraph {
    #[arg(long)]
    roads: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MERGE_TOLERANCE)]
    merge_tolerance: f64,
    /// Inject midpoints at this spacing before export.
    #[arg(long)]
    spacing: Option<f64>,
}

fn default_parallelism() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<PipelineError>().map(PipelineError::class) {
        Some(ErrorClass::MalformedInput) => 3,
        Some(ErrorClass::TileConflict) => 4,
        _ => 2,
    }
}

fn files_with_ext(dir: &Path, exts: &[&str]) -> Result<Vec<PathBuf>, PipelineError> {
    let io = |source| PipelineError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        let ok = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| exts.iter().any(|x| x.eq_ignore_ascii_case(e)));
        if path.is_file() && ok {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

fn create_dir(dir: &Path) -> Result<(), PipelineError> {
    std::fs::create_dir_all(dir).map_err(|source| PipelineError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn write_text(path: &Path, text: String) -> Result<(), PipelineError> {
    std::fs::write(path, text).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::ScoreBuildings(a) => {
            let config = BuildingsConfig {
                truth: a.common.truth.clone(),
                proposal: a.common.proposal.clone(),
                iou_threshold: a.iou_threshold,
                tile_pattern: a.common.tile_regex.clone(),
                parallelism: a.common.parallelism,
            };
            let report = score_buildings_dirs(&config)?;
            write_csv_file(&a.common.out, |buf| write_buildings_csv(&report, buf))?;
            write_json(&a.common.summary_path(), &report)?;
            println!("overall F1 {:.4} over {} cities", report.overall, report.cities.len());
        }
        Command::ScoreRoads(a) => {
            let config = RoadsConfig {
                truth: a.common.truth.clone(),
                proposal: a.common.proposal.clone(),
                buffer: a.buffer,
                spacing: a.spacing,
                merge_tolerance: a.merge_tolerance,
                tile_pattern: a.common.tile_regex.clone(),
                parallelism: a.common.parallelism,
            };
            let report = score_roads_dirs(&config)?;
            write_csv_file(&a.common.out, |buf| write_roads_csv(&report, buf))?;
            write_json(&a.common.summary_path(), &report)?;
            println!(
                "overall APLS {:.4} over {} cities",
                report.challenge.total,
                report.challenge.cities.len()
            );
        }
        Command::MakeMasks(a) => {
            create_dir(&a.out)?;
            let config = MaskConfig {
                pixel_size: a.pixel_size,
                halfwidth: a.halfwidth,
                margin: a.margin,
            };
            let mut written = 0;
            for input in files_with_ext(&a.roads, &["geojson", "json"])? {
                if make_mask_file(&input, &a.out, &config)?.is_some() {
                    written += 1;
                }
            }
            println!("wrote {written} masks to {}", a.out.display());
        }
        Command::Mask2graph(a) => {
            create_dir(&a.out)?;
            let config = RefineConfig {
                threshold: a.threshold,
                open_radius: a.open_radius,
                close_radius: a.close_radius,
                prune_px: a.prune_px,
                simplify_px: a.simplify_px,
                corner_px: a.corner_px,
            };
            let masks = files_with_ext(&a.masks, &["png"])?;
            for png in &masks {
                let (graph, projection) = mask_file_to_graph(png, &config)?;
                let projection = projection.ok_or_else(|| PipelineError::Mask {
                    path: png.clone(),
                    source: MaskError::Sidecar("origin_lon/origin_lat missing, cannot write lon/lat".into()),
                })?;
                let fc = roads_to_geojson(&graph_to_roads(&graph), &projection);
                let out = a.out.join(png.file_stem().unwrap_or_default()).with_extension("geojson");
                write_text(&out, fc.to_string())?;
            }
            println!("wrote {} road files to {}", masks.len(), a.out.display());
        }
        Command::PixelMetrics(a) => {
            let load = |p: &Path| {
                read_mask(p, a.threshold).map_err(|source| PipelineError::Mask {
                    path: p.to_path_buf(),
                    source,
                })
            };
            let (t, p) = (load(&a.truth)?, load(&a.proposal)?);
            let m = pixel_metrics(&t, &p, a.relax_radius).map_err(|source| PipelineError::Mask {
                path: a.proposal.clone(),
                source,
            })?;
            let text = serde_json::to_string_pretty(&m)?;
            match &a.out {
                Some(path) => write_text(path, text + "\n")?,
                None => println!("{text}"),
            }
        }
        Command::ExportGraph(a) => {
            let bytes = std::fs::read(&a.roads).map_err(|source| PipelineError::Io {
                path: a.roads.clone(),
                source,
            })?;
            let parsed = parse_roads(&bytes, None)
                .map_err(PipelineError::from)
                .with_context(|| a.roads.display().to_string())?;
            let mut graph = build_graph(&parsed.records, a.merge_tolerance)
                .map_err(PipelineError::from)?
                .graph;
            if let Some(spacing) = a.spacing {
                graph = inject_midpoints(&graph, spacing).map_err(PipelineError::from)?.0;
            }
            let projection = parsed
                .origin
                .map(LocalProjection::new)
                .transpose()
                .map_err(|e| PipelineError::Config(e.to_string()))?;
            write_text(&a.out, graph_to_geojson(&graph, projection.as_ref()).to_string())?;
            println!(
                "{} nodes, {} edges written to {}",
                graph.node_count(),
                graph.edge_count(),
                a.out.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
