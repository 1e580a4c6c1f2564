use fusegrb::algorithms::{out_degrees, pagerank, PageRankParams, PageRankResult};
use fusegrb::{Engine, EngineSettings, IndexKind, Mode, Representation};
use fusegrb_testkit::{dense_pagerank, graph_matrices, random_digraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ranks(r: &PageRankResult) -> Vec<f32> {
    let m = r.ranks.materialized().expect("ranks are materialized");
    assert_eq!(m.representation(), Representation::Full);
    assert_eq!(m.value_kind(), fusegrb::ValueKind::Float32);
    m.entries()
        .into_iter()
        .map(|(_, s)| s.to_f64() as f32)
        .collect()
}

fn l1(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs() as f64).sum()
}

fn linf(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() as f64)
        .fold(0.0, f64::max)
}

fn run(
    mode: Mode,
    workers: usize,
    parallel: bool,
    n: usize,
    edges: &[(usize, usize)],
    params: PageRankParams,
) -> PageRankResult {
    let e = Engine::new(EngineSettings::new(mode, workers)).unwrap();
    let (a, at) = graph_matrices(n, edges, IndexKind::Index32);
    pagerank(
        &e,
        &at,
        &out_degrees(&a),
        &PageRankParams { parallel, ..params },
    )
    .unwrap()
}

fn graphs() -> Vec<(usize, Vec<(usize, usize)>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut out = vec![
        (3, vec![(0, 1), (1, 2), (2, 0)]),
        (4, vec![(0, 1), (1, 2), (2, 0), (3, 0)]),
    ];
    for _ in 0..20 {
        let n = rng.gen_range(2..=200);
        out.push((n, random_digraph(n, 0.05, &mut rng)));
    }
    out
}

#[test]
fn three_cycle_is_uniform() {
    let p = PageRankParams {
        tolerance: 1e-9,
        ..Default::default()
    };
    let r = run(Mode::Nonblocking, 1, false, 3, &[(0, 1), (1, 2), (2, 0)], p);
    for x in ranks(&r) {
        assert!((x - 1.0 / 3.0).abs() < 1e-6);
    }
}

#[test]
fn matches_dense_oracle() {
    let p = PageRankParams::default();
    for (n, edges) in graphs() {
        let r = run(Mode::Nonblocking, 1, false, n, &edges, p);
        let (want, iters) = dense_pagerank(n, &edges, p.damping, p.tolerance, p.itermax);
        assert_eq!(r.iterations, iters, "n={n}");
        assert!(
            l1(&ranks(&r), &want) <= 1e-5,
            "n={n}: L1 {}",
            l1(&ranks(&r), &want)
        );
    }
}

#[test]
fn blocking_and_nonblocking_agree() {
    let p = PageRankParams::default();
    for (n, edges) in graphs() {
        let b = run(Mode::Blocking, 1, false, n, &edges, p);
        let nb = run(Mode::Nonblocking, 1, false, n, &edges, p);
        assert_eq!(b.iterations, nb.iterations);
        assert!(linf(&ranks(&b), &ranks(&nb)) <= 1e-6);
    }
}

#[test]
fn parallel_is_deterministic_and_matches_sequential() {
    let p = PageRankParams::default();
    for (n, edges) in graphs().into_iter().skip(2).take(6) {
        let seq = run(Mode::Nonblocking, 1, false, n, &edges, p);
        let par1 = run(Mode::Nonblocking, 4, true, n, &edges, p);
        let par2 = run(Mode::Nonblocking, 4, true, n, &edges, p);
        let (s, a, b) = (ranks(&seq), ranks(&par1), ranks(&par2));
        assert_eq!(
            a.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
            b.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
        );
        assert_eq!(par1.iterations, par2.iterations);
        assert!(linf(&s, &a) <= 1e-6);
    }
}

#[test]
fn index64_gives_the_same_ranks() {
    let p = PageRankParams::default();
    let (n, edges) = graphs().remove(5);
    let e = Engine::nonblocking();
    let (a, at) = graph_matrices(n, &edges, IndexKind::Index64);
    let r64 = pagerank(&e, &at, &out_degrees(&a), &p).unwrap();
    let r32 = run(Mode::Nonblocking, 1, true, n, &edges, p);
    assert_eq!(ranks(&r64), ranks(&r32));
}

#[test]
fn kernels_are_reused_across_runs() {
    let (n, edges) = graphs().remove(4);
    let e = Engine::nonblocking();
    let (a, at) = graph_matrices(n, &edges, IndexKind::Index32);
    let deg = out_degrees(&a);
    pagerank(&e, &at, &deg, &PageRankParams::default()).unwrap();
    let warm = e.stats().kernel_constructions;
    pagerank(&e, &at, &deg, &PageRankParams::default()).unwrap();
    assert_eq!(e.stats().kernel_constructions, warm);
}
