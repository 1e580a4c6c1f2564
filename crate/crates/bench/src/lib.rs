//! Benchmark harness for fusegrb PageRank: Matrix Market ingestion,
//! synthetic graph generation, the warmup-then-measure protocol and report
//! emission.

pub mod error;
pub mod gen;
pub mod harness;
pub mod mtx;

pub use error::BenchError;
pub use harness::{
    emit_report, run_pagerank_bench, run_pagerank_bench_on, BarrierPolicy, BenchConfig,
    BenchReport, CacheStats, ExecMode, OutputFormat,
};
pub use mtx::{
    read_matrix_market, read_matrix_market_file, write_edges, write_matrix_market, Graph,
};
