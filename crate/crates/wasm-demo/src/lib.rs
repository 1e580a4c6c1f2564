//! Browser demo: three operations returning JSON for `www/index.html`.
//!
//! The logic lives in plain functions so it is testable natively; the
//! `wasm_bindgen` exports only serialize results and map errors.

use fusegrb::algorithms::{out_degrees, pagerank, PageRankParams};
use fusegrb::engine::planned_representation;
use fusegrb::estimator::estimate;
use fusegrb::{
    BinaryOp, CsrMatrix, DupPolicy, Engine, EngineSettings, IndexKind, MatrixHandle, Mode,
    SparseVector, UnaryOp, VectorHandle,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const IK: IndexKind = IndexKind::Index32;

/// Deterministic pseudo-random unit value for position `i` (splitmix64).
fn unit(seed: u64, i: usize) -> f64 {
    let mut z = seed.wrapping_add((i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    (z ^ (z >> 31)) as f64 / u64::MAX as f64
}

fn random_vector(len: usize, fill: f64, seed: u64) -> Result<VectorHandle, String> {
    let pairs: Vec<(usize, f64)> = (0..len)
        .filter(|&i| unit(seed, i) < fill)
        .map(|i| (i, (unit(seed ^ 0xabcd, i) * 10.0).round()))
        .collect();
    let v = SparseVector::from_pairs::<f64>(len, IK, pairs, Default::default())
        .map_err(|e| e.to_string())?;
    Ok(VectorHandle::from_materialized(v))
}

#[derive(Debug, Serialize)]
pub struct NodeReport {
    pub name: String,
    pub estimated_fill: f64,
    pub actual_fill: f64,
    pub planned: String,
    pub materialized: String,
}

/// Estimated vs actual fill for two random vectors and their combinations.
pub fn fill_explorer(
    len: usize,
    fill_a: f64,
    fill_b: f64,
    seed: u64,
) -> Result<Vec<NodeReport>, String> {
    if len == 0 || len > 1_000_000 {
        return Err("length must be in 1..=1000000".into());
    }
    let e = Engine::nonblocking();
    let a = random_vector(len, fill_a.clamp(0.0, 1.0), seed)?;
    let b = random_vector(len, fill_b.clamp(0.0, 1.0), seed.wrapping_add(1))?;
    let mult = e
        .ewise_mult(&BinaryOp::times(), &a, &b)
        .map_err(|e| e.to_string())?;
    let add = e
        .ewise_add(&BinaryOp::plus(), &a, &b)
        .map_err(|e| e.to_string())?;
    let abs = e.apply(&UnaryOp::abs(), &mult).map_err(|e| e.to_string())?;
    let nodes = [
        ("a", a),
        ("b", b),
        ("a .* b", mult),
        ("a .+ b", add),
        ("abs(a .* b)", abs),
    ];
    // estimate every node before anything is materialized
    let plans: Vec<(f64, String)> = nodes
        .iter()
        .map(|(_, h)| {
            (
                estimate(h).ratio(),
                planned_representation(&e, h).to_string(),
            )
        })
        .collect();
    nodes
        .into_iter()
        .zip(plans)
        .map(|((name, h), (estimated_fill, planned))| {
            let m = e.materialize(&h, false).map_err(|e| e.to_string())?;
            Ok(NodeReport {
                name: name.into(),
                estimated_fill,
                actual_fill: m.nnz() as f64 / len as f64,
                planned,
                materialized: m.representation().to_string(),
            })
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct PageRankReport {
    pub vertices: usize,
    pub edges: usize,
    pub iterations: usize,
    pub ranks: Vec<f32>,
    pub blocking_iterations: usize,
    pub max_mode_difference: f32,
    pub kernels_built: u64,
}

/// Parses `u v` pairs (0-based, one per line; `#` starts a comment).
pub fn parse_edges(text: &str) -> Result<(usize, Vec<(usize, usize)>), String> {
    let mut edges = Vec::new();
    let mut n = 0;
    for (k, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let nums: Vec<usize> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|w| !w.is_empty())
            .map(|w| {
                w.parse()
                    .map_err(|_| format!("line {}: '{w}' is not a vertex number", k + 1))
            })
            .collect::<Result<_, _>>()?;
        let [u, v] = nums[..] else {
            return Err(format!("line {}: expected two vertex numbers", k + 1));
        };
        n = n.max(u + 1).max(v + 1);
        edges.push((u, v));
    }
    if n > 100_000 {
        return Err("at most 100000 vertices".into());
    }
    Ok((n, edges))
}

/// PageRank of an edge list in both modes.
pub fn pagerank_edges(text: &str, damping: f32) -> Result<PageRankReport, String> {
    let (n, edges) = parse_edges(text)?;
    if n == 0 {
        return Err("the graph has no edges".into());
    }
    let triples: Vec<(usize, usize, f32)> = edges.iter().map(|&(u, v)| (u, v, 1.0)).collect();
    let a = CsrMatrix::from_triples::<f32>(n, n, IK, triples, DupPolicy::Sum)
        .map_err(|e| e.to_string())?;
    let at = MatrixHandle::new(a.transpose());
    let deg = out_degrees(&MatrixHandle::new(a));
    let params = PageRankParams {
        damping,
        parallel: false,
        ..Default::default()
    };
    let run = |mode| {
        let e = Engine::new(EngineSettings::new(mode, 1)).map_err(|e| e.to_string())?;
        let r = pagerank(&e, &at, &deg, &params).map_err(|e| e.to_string())?;
        let m = r.ranks.materialized().expect("ranks are materialized");
        let ranks: Vec<f32> = m
            .entries()
            .into_iter()
            .map(|(_, s)| s.to_f64() as f32)
            .collect();
        Ok::<_, String>((ranks, r.iterations, e.stats().kernel_constructions))
    };
    let (ranks, iterations, kernels_built) = run(Mode::Nonblocking)?;
    let (blocking, blocking_iterations, _) = run(Mode::Blocking)?;
    let max_mode_difference = ranks
        .iter()
        .zip(&blocking)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f32::max);
    Ok(PageRankReport {
        vertices: n,
        edges: at.matrix().nnz(),
        iterations,
        ranks,
        blocking_iterations,
        max_mode_difference,
        kernels_built,
    })
}

#[derive(Debug, Serialize)]
pub struct ModeReport {
    pub mode: String,
    pub containers_allocated: u64,
    pub kernels_built: u64,
    pub kernel_hits: u64,
    pub signature: String,
}

/// Evaluates `apply^depth(x .* (y + 1))` twice per mode and reports the
/// allocation and kernel-cache counters.
pub fn fusion_demo(len: usize, depth: usize) -> Result<Vec<ModeReport>, String> {
    if len == 0 || len > 1_000_000 || depth > 12 {
        return Err("length must be in 1..=1000000 and depth at most 12".into());
    }
    let inc = UnaryOp::parse("(x) -> x + 1").map_err(|e| e.to_string())?;
    let half = UnaryOp::parse("(x) -> x * 0.5").map_err(|e| e.to_string())?;
    [Mode::Blocking, Mode::Nonblocking]
        .into_iter()
        .map(|mode| {
            let e = Engine::new(EngineSettings::new(mode, 1)).map_err(|e| e.to_string())?;
            let mut signature = String::new();
            for round in 0..2u64 {
                let x = random_vector(len, 1.0, 10 + round)?;
                let y = random_vector(len, 1.0, 20 + round)?;
                let mut h = e.ewise_mult(
                    &BinaryOp::times(),
                    &x,
                    &e.apply(&inc, &y).map_err(|e| e.to_string())?,
                );
                for _ in 0..depth {
                    h = e.apply(&half, &h.map_err(|e| e.to_string())?);
                }
                let h = h.map_err(|e| e.to_string())?;
                if round == 0 {
                    signature = e.signature_of(&h).as_str().to_string();
                }
                e.wait(&h, false).map_err(|e| e.to_string())?;
            }
            let s = e.stats();
            Ok(ModeReport {
                mode: format!("{mode:?}").to_lowercase(),
                containers_allocated: s.containers_allocated,
                kernels_built: s.kernel_constructions,
                kernel_hits: s.kernel_hits,
                signature,
            })
        })
        .collect()
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
    r.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string()))
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = fillExplorer)]
pub fn fill_explorer_js(
    len: usize,
    fill_a: f64,
    fill_b: f64,
    seed: u32,
) -> Result<String, JsValue> {
    to_js(fill_explorer(len, fill_a, fill_b, seed as u64))
}

#[wasm_bindgen(js_name = pageRank)]
pub fn pagerank_js(edges: &str, damping: f32) -> Result<String, JsValue> {
    to_js(pagerank_edges(edges, damping))
}

#[wasm_bindgen(js_name = fusionDemo)]
pub fn fusion_demo_js(len: usize, depth: usize) -> Result<String, JsValue> {
    to_js(fusion_demo(len, depth))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn explorer_estimates_match_formulas() {
        let r = fill_explorer(10_000, 0.5, 0.2, 1).unwrap();
        let (a, b) = (r[0].estimated_fill, r[1].estimated_fill);
        assert_eq!(r[0].estimated_fill, r[0].actual_fill);
        assert_eq!(r[2].estimated_fill, a * b);
        assert_eq!(r[3].estimated_fill, (a + b).min(1.0));
        assert_eq!(r[4].estimated_fill, a * b);
        assert!((r[2].actual_fill - a * b).abs() < 0.02);
        assert!(fill_explorer(0, 0.5, 0.5, 1).is_err());
    }

    #[test]
    fn pagerank_of_a_cycle() {
        let r = pagerank_edges("0 1\n1 2 # comment\n2,0\n", 0.85).unwrap();
        assert_eq!(r.vertices, 3);
        assert!(r.ranks.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-4));
        assert_eq!(r.iterations, r.blocking_iterations);
        assert!(r.max_mode_difference <= 1e-6);
        assert!(pagerank_edges("0 x", 0.85).is_err());
        assert!(pagerank_edges("0 1 2", 0.85).is_err());
        assert!(pagerank_edges("", 0.85).is_err());
    }

    #[test]
    fn fusion_counts() {
        let r = fusion_demo(1000, 3).unwrap();
        let (b, nb) = (&r[0], &r[1]);
        // blocking materializes every one of the 5 operations, twice
        assert_eq!(b.containers_allocated, 10);
        assert_eq!(nb.containers_allocated, 2);
        assert_eq!(nb.kernels_built, 1);
        assert_eq!(nb.kernel_hits, 1);
    }
}
