use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use voxel_spectral::eval::{instances, leave_one_out, results_csv, LabeledImageSet, ShapeKind};
use voxel_spectral::graph::{bridge_components, build_adjacency_graph};
use voxel_spectral::image_io::{write_csv, write_pgm, ImageWriteSettings, Scaling};
use voxel_spectral::voxel::{normalize_mesh, parse_voxel_text, voxelize_surface, VoxelGrid};
use voxel_spectral::{embed_grid, embed_mesh, parse_off, selftest, Connectivity, EmbedReport, PipelineConfig, SolveSettings};
use walkdir::WalkDir;

#[derive(Parser)]
#[command(name = "voxel-spectral", version, about = "Spectral embedding of voxel objects into 2D images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Embed one OFF mesh or voxel text file.
    Embed {
        input: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Also write the bridged graph as `<stem>.edges.txt`.
        #[arg(long)]
        dump_graph: bool,
    },
    /// Embed every `.off` and `.voxels` file under a directory.
    Batch {
        input: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
        jobs: u16,
    },
    /// Leave-one-out 1-NN accuracy on synthetic boxes, spheres and tori.
    Eval {
        #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u32).range(2..))]
        instances: u32,
        #[arg(long, default_value_t = 0)]
        base_seed: u64,
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
        jobs: u16,
    },
    /// Check the sparse eigensolver against the dense one on random graphs.
    Selftest {
        #[arg(long, default_value_t = 20)]
        graphs: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Linear,
    Log1p,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConnArg {
    #[value(name = "6")]
    Six,
    #[value(name = "18")]
    Eighteen,
    #[value(name = "26")]
    TwentySix,
}

#[derive(Args, Clone)]
struct PipelineArgs {
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long, value_enum, default_value_t = ConnArg::Six)]
    connectivity: ConnArg,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    dim: Option<u32>,
    #[arg(long)]
    fill: bool,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 5000)]
    max_iter: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ScaleArg::Linear)]
    scale: ScaleArg,
    #[arg(long, default_value_t = 255, value_parser = clap::value_parser!(u32).range(1..=65535))]
    max_gray: u32,
}

impl PipelineArgs {
    fn config(&self, default_resolution: usize, default_dim: usize) -> Result<PipelineConfig> {
        let config = PipelineConfig {
            resolution: self.resolution.unwrap_or(default_resolution),
            connectivity: match self.connectivity {
                ConnArg::Six => Connectivity::Six,
                ConnArg::Eighteen => Connectivity::Eighteen,
                ConnArg::TwentySix => Connectivity::TwentySix,
            },
            dim: self.dim.map_or(default_dim, |d| d as usize),
            fill: self.fill,
            solve: SolveSettings { tol: self.tol, max_iter: self.max_iter, seed: self.seed },
            write: ImageWriteSettings {
                scaling: match self.scale {
                    ScaleArg::Linear => Scaling::Linear,
                    ScaleArg::Log1p => Scaling::Log1p,
                },
                max_gray: self.max_gray,
                ..Default::default()
            },
        };
        config.validate()?;
        Ok(config)
    }
}

fn is_mesh(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("off"))
}

fn load_grid(path: &Path, config: &PipelineConfig) -> Result<VoxelGrid> {
    let text = fs::read_to_string(path)?;
    if is_mesh(path) {
        let mesh = normalize_mesh(&parse_off(&text)?)?;
        Ok(voxelize_surface(&mesh, config.resolution)?)
    } else {
        Ok(parse_voxel_text(&text)?)
    }
}

/// Embed one file and write its outputs into `out_dir`.
fn embed_file(input: &Path, out_dir: &Path, config: &PipelineConfig, dump_graph: bool) -> Result<EmbedReport> {
    let text = fs::read_to_string(input).context("cannot read input")?;
    let (image, report) = if is_mesh(input) {
        embed_mesh(&parse_off(&text)?, config)?
    } else {
        embed_grid(&parse_voxel_text(&text)?, config)?
    };
    let stem = input.file_stem().context("input has no file name")?.to_string_lossy();
    fs::create_dir_all(out_dir).with_context(|| format!("cannot create {}", out_dir.display()))?;
    fs::write(out_dir.join(format!("{stem}.pgm")), write_pgm(&image, &config.write)?)?;
    fs::write(out_dir.join(format!("{stem}.csv")), write_csv(&image))?;
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    fs::write(out_dir.join(format!("{stem}.report.json")), json)?;
    if dump_graph {
        let mut grid = load_grid(input, config)?;
        if config.fill {
            grid = grid.fill_interior();
        }
        let (graph, _) = bridge_components(&build_adjacency_graph(&grid, config.connectivity)?);
        let mut buf = Vec::new();
        graph.write_edge_list(&mut buf)?;
        fs::write(out_dir.join(format!("{stem}.edges.txt")), buf)?;
    }
    Ok(report)
}

fn pool(jobs: u16) -> Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(jobs as usize).build()?)
}

fn batch(input: &Path, out: &Path, config: &PipelineConfig, jobs: u16) -> Result<bool> {
    if !input.is_dir() {
        bail!("{} is not a directory", input.display());
    }
    let mut files = Vec::new();
    for entry in WalkDir::new(input).sort_by_file_name() {
        let entry = entry?;
        let path = entry.path();
        let wanted = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("off") || e == "voxels");
        if entry.file_type().is_file() && wanted {
            files.push(path.to_path_buf());
        }
    }
    let results: Vec<Result<EmbedReport>> = pool(jobs)?.install(|| {
        files
            .par_iter()
            .map(|f| {
                let rel = f.strip_prefix(input).expect("walked under input");
                let dir = out.join(rel.parent().unwrap_or(Path::new("")));
                embed_file(f, &dir, config, false)
            })
            .collect()
    });
    let mut failed = 0;
    for (f, r) in files.iter().zip(&results) {
        match r {
            Ok(report) => log::info!("{}: {} nodes", f.display(), report.node_count),
            Err(e) => {
                failed += 1;
                eprintln!("error: {}: {e:#}", f.display());
            }
        }
    }
    println!("processed {} files, {} failed", files.len(), failed);
    Ok(failed == 0)
}

fn eval(per_kind: u32, base_seed: u64, config: &PipelineConfig, out: &Path, jobs: u16) -> Result<()> {
    let started = Instant::now();
    let items = instances(&[ShapeKind::Box, ShapeKind::Sphere, ShapeKind::Torus], per_kind as usize, base_seed);
    let embedded = pool(jobs)?.install(|| items.par_iter().map(|i| i.embed(config)).collect::<Result<Vec<_>, _>>())?;
    let predictions = leave_one_out(&LabeledImageSet { items: embedded })?;
    fs::create_dir_all(out)?;
    fs::write(out.join("eval_results.csv"), results_csv(&items, &predictions))?;
    let correct = predictions.iter().filter(|p| p.correct()).count();
    println!(
        "accuracy {:.4} ({correct}/{}) in {:.1}s",
        correct as f64 / predictions.len() as f64,
        predictions.len(),
        started.elapsed().as_secs_f64()
    );
    Ok(())
}

fn run_selftest(graphs: usize, seed: u64) -> bool {
    let mut ok = true;
    for (i, result) in selftest::run(graphs, 5, 200, seed, &SolveSettings::default()).into_iter().enumerate() {
        match result {
            Ok(c) => {
                let status = if c.passed { "ok" } else { "MISMATCH" };
                println!(
                    "graph {i:3}: n = {:3}  eigenvalue error {:.2e}  alignment {:.9}  {status}",
                    c.nodes, c.eigenvalue_error, c.min_alignment
                );
                ok &= c.passed;
            }
            Err(e) => {
                println!("graph {i:3}: {e}");
                ok = false;
            }
        }
    }
    println!("{}", if ok { "selftest passed" } else { "selftest FAILED" });
    ok
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Embed { input, pipeline, out, dump_graph } => {
            let config = pipeline.config(voxel_spectral::voxel::DEFAULT_RESOLUTION, voxel_spectral::pipeline::DEFAULT_DIM)?;
            let report = embed_file(&input, &out, &config, dump_graph).with_context(|| format!("{}", input.display()))?;
            println!(
                "{}: {} nodes, {} bridges, {} collisions",
                input.display(),
                report.node_count,
                report.bridges_added,
                report.collision_count
            );
            Ok(true)
        }
        Command::Batch { input, pipeline, out, jobs } => {
            let config = pipeline.config(voxel_spectral::voxel::DEFAULT_RESOLUTION, voxel_spectral::pipeline::DEFAULT_DIM)?;
            batch(&input, &out, &config, jobs)
        }
        Command::Eval { instances, base_seed, pipeline, out, jobs } => {
            let config = pipeline.config(32, 32)?;
            eval(instances, base_seed, &config, &out, jobs)?;
            Ok(true)
        }
        Command::Selftest { graphs, seed } => Ok(run_selftest(graphs, seed)),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
