use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fusegrb_bench::gen::{erdos_renyi, Rmat};
use fusegrb_bench::{
    emit_report, read_matrix_market_file, run_pagerank_bench_on, write_edges, BarrierPolicy,
    BenchConfig, BenchError, ExecMode, OutputFormat,
};

#[derive(Parser)]
#[command(name = "bench", about = "fusegrb PageRank benchmark", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time PageRank on a Matrix Market graph.
    Pagerank(PagerankArgs),
    /// Write a synthetic graph as a Matrix Market pattern file.
    Gen(GenArgs),
}

#[derive(Args)]
struct PagerankArgs {
    /// Matrix Market coordinate file; entry (i, j) is the edge i -> j.
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long, value_enum, default_value = "nonblocking")]
    mode: ModeArg,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long, default_value_t = 1)]
    warmup: usize,
    #[arg(long, default_value_t = 16)]
    runs: usize,
    #[arg(long, default_value_t = 0.85)]
    damping: f32,
    #[arg(long, default_value_t = 1e-4)]
    tol: f32,
    #[arg(long, default_value_t = 100)]
    itermax: usize,
    #[arg(long, default_value_t = 32)]
    index_width: u32,
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
    /// Representation thresholds, e.g. `full=0.9,bitset=0.05`.
    #[arg(long)]
    rep_thresholds: Option<String>,
    /// Estimated fill above which element-wise add uses the dense strategy.
    #[arg(long)]
    add_threshold: Option<f64>,
    #[arg(long, value_enum, default_value = "interior")]
    mxv_barrier: BarrierArg,
    /// Repeat the benchmark at each thread count in this comma list.
    #[arg(long, value_delimiter = ',')]
    thread_sweep: Option<Vec<usize>>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "rmat")]
    kind: GenKind,
    /// R-MAT: log2 of the vertex count.
    #[arg(long, default_value_t = 16)]
    scale: u32,
    /// R-MAT: edges per vertex.
    #[arg(long, default_value_t = 8)]
    edge_factor: usize,
    /// Erdos-Renyi: vertex count.
    #[arg(long, default_value_t = 1000)]
    vertices: usize,
    /// Erdos-Renyi: edge count.
    #[arg(long, default_value_t = 8000)]
    edges: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Blocking,
    Nonblocking,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum BarrierArg {
    Interior,
    Capability,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Rmat,
    Er,
}

fn parse_thresholds(text: &str, config: &mut BenchConfig) -> Result<(), BenchError> {
    for part in text.split(',').filter(|p| !p.trim().is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| BenchError::Config(format!("expected key=value in '{part}'")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| BenchError::Config(format!("bad threshold value '{value}'")))?;
        match key.trim() {
            "full" => config.full_threshold = value,
            "bitset" => config.bitset_threshold = value,
            other => return Err(BenchError::Config(format!("unknown threshold '{other}'"))),
        }
    }
    Ok(())
}

fn pagerank_cmd(args: PagerankArgs) -> Result<(), BenchError> {
    let mut config = BenchConfig {
        matrix_path: args.matrix,
        mode: match args.mode {
            ModeArg::Blocking => ExecMode::Blocking,
            ModeArg::Nonblocking => ExecMode::Nonblocking,
        },
        threads: args.threads,
        warmup_runs: args.warmup,
        measured_runs: args.runs,
        damping: args.damping,
        tolerance: args.tol,
        itermax: args.itermax,
        index_width: args.index_width,
        output_format: match args.format {
            FormatArg::Text => OutputFormat::Text,
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Csv => OutputFormat::Csv,
        },
        mxv_barrier: match args.mxv_barrier {
            BarrierArg::Interior => BarrierPolicy::Interior,
            BarrierArg::Capability => BarrierPolicy::Capability,
        },
        ..Default::default()
    };
    if let Some(text) = &args.rep_thresholds {
        parse_thresholds(text, &mut config)?;
    }
    if let Some(t) = args.add_threshold {
        config.add_threshold = t;
    }
    config.validate()?;
    let graph = read_matrix_market_file(&config.matrix_path, config.index_kind()?)?;
    let sweep = args.thread_sweep.unwrap_or_else(|| vec![config.threads]);
    for threads in sweep {
        let c = BenchConfig {
            threads,
            ..config.clone()
        };
        let report = run_pagerank_bench_on(&graph, &c)?;
        print!("{}", emit_report(&report, c.output_format));
        if c.output_format == OutputFormat::Json {
            println!();
        }
    }
    Ok(())
}

fn gen_cmd(args: GenArgs) -> Result<(), BenchError> {
    let (n, edges) = match args.kind {
        GenKind::Rmat => {
            let g = Rmat::new(args.scale, args.edge_factor, args.seed);
            (g.vertices(), g.edges())
        }
        GenKind::Er => (
            args.vertices,
            erdos_renyi(args.vertices, args.edges, args.seed),
        ),
    };
    let io = |e| BenchError::Io {
        path: args.out.display().to_string(),
        source: e,
    };
    let file = File::create(&args.out).map_err(io)?;
    write_edges(n, &edges, BufWriter::new(file)).map_err(io)?;
    eprintln!(
        "wrote {} vertices, {} edges to {}",
        n,
        edges.len(),
        args.out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Pagerank(a) => pagerank_cmd(a),
        Command::Gen(a) => gen_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bench: error: {e}");
            ExitCode::FAILURE
        }
    }
}
