//! Potential kernel `𝔞` of the planar simple random walk by Fourier
//! quadrature:
//!
//! `𝔞(x) = ∫_{(−π,π)²} (1 − cos(k·x)) / D̂(k) dk/(2π)²`, with
//! `D̂(k) = 4 sin²(k₁/2) + 4 sin²(k₂/2)`.
//!
//! The midpoint grid on `(−π,π)²` with an even number of nodes per axis
//! never touches `k = 0`. On that grid the discrete Laplacian identities
//! `Δ𝔞(0) = 1` and `Δ𝔞(x) = 0` for `0 < |x|∞ < M` hold up to rounding.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

pub const DEFAULT_RESOLUTION: usize = 2048;

pub struct PotentialKernel {
    m: usize,
    // quadrant nodes k_i = (i + ½)·2π/M, i < M/2
    nodes: Vec<f64>,
    // 1/D̂ on the positive quadrant, row-major
    inv: Vec<f64>,
    cache: Mutex<HashMap<[i64; 2], f64>>,
}

impl PotentialKernel {
    /// `m` is rounded up to an even number of nodes, at least 64.
    pub fn new(m: usize) -> Self {
        let m = m.max(64).next_multiple_of(2);
        let h = 2.0 * PI / m as f64;
        let half = m / 2;
        let nodes: Vec<f64> = (0..half).map(|i| (i as f64 + 0.5) * h).collect();
        let s2: Vec<f64> = nodes.iter().map(|k| 4.0 * (k / 2.0).sin().powi(2)).collect();
        let mut inv = Vec::with_capacity(half * half);
        for a in &s2 {
            for b in &s2 {
                inv.push(1.0 / (a + b));
            }
        }
        Self { m, nodes, inv, cache: Mutex::new(HashMap::new()) }
    }

    pub fn resolution(&self) -> usize {
        self.m
    }

    /// `𝔞(x)`; exactly zero at the origin.
    pub fn value(&self, x: [i64; 2]) -> f64 {
        let (a, b) = (x[0].abs(), x[1].abs());
        let key = if a <= b { [a, b] } else { [b, a] };
        if key == [0, 0] {
            return 0.0;
        }
        if let Some(&v) = self.cache.lock().unwrap().get(&key) {
            return v;
        }
        let v = self.integrate(key);
        self.cache.lock().unwrap().insert(key, v);
        v
    }

    fn integrate(&self, x: [i64; 2]) -> f64 {
        let half = self.m / 2;
        let c1: Vec<f64> = self.nodes.iter().map(|k| (k * x[0] as f64).cos()).collect();
        let c2: Vec<f64> = self.nodes.iter().map(|k| (k * x[1] as f64).cos()).collect();
        let mut total = 0.0;
        for i in 0..half {
            let row = &self.inv[i * half..(i + 1) * half];
            let ci = c1[i];
            let s: f64 = row.iter().zip(&c2).map(|(w, c)| w * (1.0 - ci * c)).sum();
            total += s;
        }
        // four symmetric quadrants, M² nodes, dk/(2π)² = 1/M² per node
        4.0 * total / (self.m as f64 * self.m as f64)
    }

    /// `Σ_{y~x} 𝔞(y) − 4𝔞(x)`.
    pub fn laplacian(&self, x: [i64; 2]) -> f64 {
        let [i, j] = x;
        self.value([i + 1, j]) + self.value([i - 1, j]) + self.value([i, j + 1])
            + self.value([i, j - 1])
            - 4.0 * self.value(x)
    }
}

impl Default for PotentialKernel {
    fn default() -> Self {
        Self::new(DEFAULT_RESOLUTION)
    }
}

/// Convenience one-shot evaluation.
pub fn potential_kernel(x: [i64; 2], m: usize) -> f64 {
    PotentialKernel::new(m).value(x)
}
