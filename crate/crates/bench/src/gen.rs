//! Synthetic graph generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Recursive-matrix (R-MAT) generator parameters. Quadrant probabilities
/// `a`, `b`, `c` and implicitly `d = 1 - a - b - c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rmat {
    pub scale: u32,
    pub edge_factor: usize,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub seed: u64,
}

impl Rmat {
    pub fn new(scale: u32, edge_factor: usize, seed: u64) -> Rmat {
        Rmat {
            scale,
            edge_factor,
            a: 0.57,
            b: 0.19,
            c: 0.19,
            seed,
        }
    }

    pub fn vertices(&self) -> usize {
        1usize << self.scale
    }

    /// `edge_factor * 2^scale` directed edges; self loops are dropped,
    /// repeats are kept (readers merge them).
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let m = self.edge_factor * self.vertices();
        let (ab, abc) = (self.a + self.b, self.a + self.b + self.c);
        let mut out = Vec::with_capacity(m);
        for _ in 0..m {
            let (mut u, mut v) = (0usize, 0usize);
            for bit in (0..self.scale).rev() {
                let p: f64 = rng.gen();
                let (du, dv) = if p < self.a {
                    (0, 0)
                } else if p < ab {
                    (0, 1)
                } else if p < abc {
                    (1, 0)
                } else {
                    (1, 1)
                };
                u |= du << bit;
                v |= dv << bit;
            }
            if u != v {
                out.push((u, v));
            }
        }
        out
    }
}

/// `m` uniformly random directed edges over `n` vertices, no self loops.
pub fn erdos_renyi(n: usize, m: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(m);
    if n < 2 {
        return out;
    }
    while out.len() < m {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v {
            out.push((u, v));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rmat_is_deterministic_and_in_range() {
        let g = Rmat::new(8, 4, 1);
        let e1 = g.edges();
        assert_eq!(e1, g.edges());
        assert!(e1.len() > 900 && e1.len() <= 1024);
        assert!(e1.iter().all(|&(u, v)| u < 256 && v < 256 && u != v));
        // skewed towards low ids
        let low = e1.iter().filter(|&&(u, _)| u < 128).count();
        assert!(low > e1.len() / 2);
    }

    #[test]
    fn er_counts() {
        let e = erdos_renyi(100, 500, 3);
        assert_eq!(e.len(), 500);
        assert!(erdos_renyi(1, 5, 0).is_empty());
    }
}
