//! PageRank benchmark protocol: load once, warm the kernel cache, then time
//! the measured runs.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use fusegrb::algorithms::{pagerank, PageRankParams};
use fusegrb::{Engine, EngineSettings, EngineStats, IndexKind, Mode, MxvBarrier, Thresholds};
use serde::{Deserialize, Serialize};

use crate::error::BenchError;
use crate::mtx::{read_matrix_market_file, Graph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecMode {
    Blocking,
    Nonblocking,
}

impl From<ExecMode> for Mode {
    fn from(m: ExecMode) -> Mode {
        match m {
            ExecMode::Blocking => Mode::Blocking,
            ExecMode::Nonblocking => Mode::Nonblocking,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BarrierPolicy {
    Interior,
    Capability,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub matrix_path: PathBuf,
    pub mode: ExecMode,
    pub threads: usize,
    pub warmup_runs: usize,
    pub measured_runs: usize,
    pub damping: f32,
    pub tolerance: f32,
    pub itermax: usize,
    pub index_width: u32,
    pub output_format: OutputFormat,
    pub full_threshold: f64,
    pub bitset_threshold: f64,
    pub add_threshold: f64,
    pub mxv_barrier: BarrierPolicy,
}

impl Default for BenchConfig {
    fn default() -> Self {
        let t = Thresholds::default();
        BenchConfig {
            matrix_path: PathBuf::new(),
            mode: ExecMode::Nonblocking,
            threads: 1,
            warmup_runs: 1,
            measured_runs: 16,
            damping: 0.85,
            tolerance: 1e-4,
            itermax: 100,
            index_width: 32,
            output_format: OutputFormat::Text,
            full_threshold: t.full,
            bitset_threshold: t.bitset,
            add_threshold: t.add_dense,
            mxv_barrier: BarrierPolicy::Interior,
        }
    }
}

impl BenchConfig {
    pub fn index_kind(&self) -> Result<IndexKind, BenchError> {
        IndexKind::from_bits(self.index_width).ok_or_else(|| {
            BenchError::Config(format!(
                "index width must be 32 or 64, got {}",
                self.index_width
            ))
        })
    }

    pub fn engine_settings(&self) -> EngineSettings {
        EngineSettings {
            mode: self.mode.into(),
            worker_count: self.threads,
            thresholds: Thresholds {
                full: self.full_threshold,
                bitset: self.bitset_threshold,
                add_dense: self.add_threshold,
            },
            mxv_barrier: match self.mxv_barrier {
                BarrierPolicy::Interior => MxvBarrier::Interior,
                BarrierPolicy::Capability => MxvBarrier::Capability,
            },
            ..Default::default()
        }
    }

    pub fn params(&self) -> PageRankParams {
        PageRankParams {
            damping: self.damping,
            tolerance: self.tolerance,
            itermax: self.itermax,
            parallel: self.threads > 1,
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.measured_runs == 0 {
            return Err(BenchError::Config(
                "measured runs must be at least 1".into(),
            ));
        }
        self.index_kind()?;
        self.engine_settings().validate()?;
        self.params().validate()?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CacheStats {
    pub hits: u64,
    pub misses: u64,
    pub constructions: u64,
    pub construction_time_s: f64,
}

impl From<EngineStats> for CacheStats {
    fn from(s: EngineStats) -> Self {
        CacheStats {
            hits: s.kernel_hits,
            misses: s.kernel_misses,
            constructions: s.kernel_constructions,
            construction_time_s: s.construction_time.as_secs_f64(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub vertices: usize,
    pub edges: usize,
    /// Wall time of each measured run, seconds. Warmup runs are excluded.
    pub run_times_s: Vec<f64>,
    pub mean_s: f64,
    pub stddev_s: f64,
    pub iterations: usize,
    pub cache_after_warmup: CacheStats,
    pub cache_final: CacheStats,
    /// Kernels constructed during the measured runs.
    pub measured_constructions: u64,
    /// Sum of the final ranks.
    pub rank_sum: f64,
    /// Hash of the final rank bits, for determinism checks.
    pub rank_digest: String,
}

/// Loads `config.matrix_path` and runs the benchmark on it.
pub fn run_pagerank_bench(config: &BenchConfig) -> Result<BenchReport, BenchError> {
    config.validate()?;
    let graph = read_matrix_market_file(&config.matrix_path, config.index_kind()?)?;
    run_pagerank_bench_on(&graph, config)
}

/// Runs the benchmark on an already loaded graph. One engine serves every
/// run so the warmup fills its kernel cache.
pub fn run_pagerank_bench_on(
    graph: &Graph,
    config: &BenchConfig,
) -> Result<BenchReport, BenchError> {
    config.validate()?;
    let engine = Engine::new(config.engine_settings())?;
    let params = config.params();
    let run = |i: usize| {
        pagerank(&engine, &graph.at, &graph.out_degree, &params)
            .map_err(|e| BenchError::Run { run: i, source: e })
    };

    for i in 0..config.warmup_runs {
        run(i)?;
    }
    let cache_after_warmup = CacheStats::from(engine.stats());
    let mut run_times_s = Vec::with_capacity(config.measured_runs);
    let mut last = None;
    for i in 0..config.measured_runs {
        let start = Instant::now();
        let result = run(config.warmup_runs + i)?;
        run_times_s.push(start.elapsed().as_secs_f64());
        last = Some(result);
    }
    let cache_final = CacheStats::from(engine.stats());
    let result = last.expect("at least one measured run");
    let ranks = result.ranks.materialized().expect("ranks are materialized");
    let values: Vec<f32> = match ranks.payload() {
        fusegrb::containers::Payload::Values(v) => v.as_slice::<f32>().expect("f32 ranks").to_vec(),
        fusegrb::containers::Payload::Iso(s) => vec![s.to_f64() as f32; ranks.len()],
    };
    let (mean_s, stddev_s) = mean_stddev(&run_times_s);
    Ok(BenchReport {
        config: config.clone(),
        vertices: graph.n(),
        edges: graph.nnz(),
        mean_s,
        stddev_s,
        run_times_s,
        iterations: result.iterations,
        measured_constructions: cache_final.constructions - cache_after_warmup.constructions,
        cache_after_warmup,
        cache_final,
        rank_sum: values.iter().map(|&x| x as f64).sum(),
        rank_digest: digest(&values),
    })
}

fn mean_stddev(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// FNV-1a over the rank bit patterns.
fn digest(values: &[f32]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in values {
        for b in v.to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    format!("{h:016x}")
}

pub fn emit_report(report: &BenchReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => serde_json::to_string_pretty(report).expect("report serializes"),
        OutputFormat::Csv => emit_csv(report),
        OutputFormat::Text => emit_text(report),
    }
}

fn emit_text(r: &BenchReport) -> String {
    let c = &r.config;
    let mut s = String::new();
    let _ = writeln!(s, "pagerank  {}", c.matrix_path.display());
    let _ = writeln!(
        s,
        "  graph       {} vertices, {} edges",
        r.vertices, r.edges
    );
    let _ = writeln!(
        s,
        "  engine      {:?}, {} thread(s), index{}, barrier {:?}",
        c.mode, c.threads, c.index_width, c.mxv_barrier
    );
    let _ = writeln!(
        s,
        "  params      damping {}, tol {}, itermax {}",
        c.damping, c.tolerance, c.itermax
    );
    let _ = writeln!(
        s,
        "  runs        {} warmup, {} measured",
        c.warmup_runs,
        r.run_times_s.len()
    );
    let _ = writeln!(s, "  iterations  {}", r.iterations);
    let _ = writeln!(
        s,
        "  mean        {:.6} s  (stddev {:.6} s)",
        r.mean_s, r.stddev_s
    );
    for (i, t) in r.run_times_s.iter().enumerate() {
        let _ = writeln!(s, "    run {:>3}   {:.6} s", i + 1, t);
    }
    let _ = writeln!(
        s,
        "  cache       {:>10} {:>10} {:>14} {:>14}",
        "hits", "misses", "constructions", "build time s"
    );
    for (label, k) in [
        ("  after warmup", &r.cache_after_warmup),
        ("  final", &r.cache_final),
    ] {
        let _ = writeln!(
            s,
            "  {:<12}{:>10} {:>10} {:>14} {:>14.6}",
            label.trim(),
            k.hits,
            k.misses,
            k.constructions,
            k.construction_time_s
        );
    }
    let _ = writeln!(
        s,
        "  measured-run constructions  {}",
        r.measured_constructions
    );
    let _ = writeln!(
        s,
        "  rank sum    {:.9}  digest {}",
        r.rank_sum, r.rank_digest
    );
    s
}

/// Header, one row per measured run, then a `mean` summary row.
fn emit_csv(r: &BenchReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let row = |w: &mut csv::Writer<Vec<u8>>, cols: [String; 9]| {
        w.write_record(&cols).expect("in-memory write")
    };
    row(
        &mut w,
        [
            "row",
            "seconds",
            "stddev",
            "iterations",
            "mode",
            "threads",
            "hits",
            "misses",
            "constructions",
        ]
        .map(String::from),
    );
    let c = &r.config;
    let mode = format!("{:?}", c.mode).to_lowercase();
    for (i, t) in r.run_times_s.iter().enumerate() {
        row(
            &mut w,
            [
                (i + 1).to_string(),
                t.to_string(),
                String::new(),
                r.iterations.to_string(),
                mode.clone(),
                c.threads.to_string(),
                String::new(),
                String::new(),
                String::new(),
            ],
        );
    }
    row(
        &mut w,
        [
            "mean".into(),
            r.mean_s.to_string(),
            r.stddev_s.to_string(),
            r.iterations.to_string(),
            mode,
            c.threads.to_string(),
            r.cache_final.hits.to_string(),
            r.cache_final.misses.to_string(),
            r.cache_final.constructions.to_string(),
        ],
    );
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report() -> BenchReport {
        let graph = Graph::from_edges(
            4,
            4,
            IndexKind::Index32,
            [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0), (3, 0, 1.0)],
        )
        .unwrap();
        let config = BenchConfig {
            measured_runs: 5,
            ..Default::default()
        };
        run_pagerank_bench_on(&graph, &config).unwrap()
    }

    #[test]
    fn protocol_counts() {
        let r = report();
        assert_eq!(r.run_times_s.len(), 5);
        assert_eq!(r.measured_constructions, 0);
        assert!(r.cache_after_warmup.constructions > 0);
        let mean = r.run_times_s.iter().sum::<f64>() / 5.0;
        assert!((r.mean_s - mean).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let r = report();
        let back: BenchReport = serde_json::from_str(&emit_report(&r, OutputFormat::Json)).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn csv_rows() {
        let r = report();
        let text = emit_report(&r, OutputFormat::Csv);
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        let rows: Vec<_> = rd.records().map(|x| x.unwrap()).collect();
        assert_eq!(rows.len(), r.config.measured_runs + 1);
        assert_eq!(&rows.last().unwrap()[0], "mean");
    }

    #[test]
    fn text_mentions_cache_counters() {
        let t = emit_report(&report(), OutputFormat::Text);
        assert!(t.contains("hits") && t.contains("misses") && t.contains("constructions"));
    }

    #[test]
    fn invalid_configs() {
        let g = Graph::from_edges(1, 1, IndexKind::Index32, []).unwrap();
        for c in [
            BenchConfig {
                measured_runs: 0,
                ..Default::default()
            },
            BenchConfig {
                threads: 0,
                ..Default::default()
            },
            BenchConfig {
                index_width: 16,
                ..Default::default()
            },
            BenchConfig {
                damping: 1.0,
                ..Default::default()
            },
        ] {
            assert!(run_pagerank_bench_on(&g, &c).is_err());
        }
    }
}
