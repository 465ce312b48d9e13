//! Solvers for the killed Laplacian `4I − A` on `D_N`, whose inverse is the
//! Green function.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::LatticeDomain;

/// Anything that can apply `G = (4I − A)⁻¹` to a vector.
pub trait GreenSolve: Sync {
    fn dim(&self) -> usize;

    fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>>;

    /// `r(x) = Σ_y G(x,y)`.
    fn row_sums(&self) -> Result<Vec<f64>> {
        self.solve(&vec![1.0; self.dim()])
    }

    fn column(&self, y: usize) -> Result<Vec<f64>> {
        let mut e = vec![0.0; self.dim()];
        e[y] = 1.0;
        self.solve(&e)
    }
}

/// `y = (4I − A) x`, edges to `ϱ` contributing nothing.
pub fn apply_laplacian(domain: &LatticeDomain, x: &[f64], y: &mut [f64]) {
    let rho = domain.rho();
    for (v, out) in y.iter_mut().enumerate() {
        let mut s = 4.0 * x[v];
        for &w in domain.neighbors(v) {
            if w != rho {
                s -= x[w as usize];
            }
        }
        *out = s;
    }
}

/// Banded Cholesky factor `LLᵀ = 4I − A` in the row-major vertex order.
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    // row i holds columns i-bw..=i at offsets 0..=bw
    band: Vec<f64>,
}

impl BandedCholesky {
    pub fn new(domain: &LatticeDomain) -> Result<Self> {
        let n = domain.len();
        let rho = domain.rho();
        let mut bw = 0;
        for v in 0..n {
            for &w in domain.neighbors(v) {
                if w != rho {
                    bw = bw.max((w as usize).abs_diff(v));
                }
            }
        }
        let w = bw + 1;
        let mut band = vec![0.0; n * w];
        for v in 0..n {
            band[v * w + bw] = 4.0;
            for &u in domain.neighbors(v) {
                if u != rho && (u as usize) < v {
                    band[v * w + bw - (v - u as usize)] = -1.0;
                }
            }
        }
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let jlo = j.saturating_sub(bw).max(lo);
                let mut s = band[i * w + bw - (i - j)];
                let ri = &band[i * w + bw - (i - jlo)..i * w + bw - (i - j)];
                let rj = &band[j * w + bw - (j - jlo)..j * w + bw];
                s -= ri.iter().zip(rj).map(|(a, b)| a * b).sum::<f64>();
                if i == j {
                    if s <= 0.0 {
                        return Err(Error::Cholesky);
                    }
                    band[i * w + bw] = s.sqrt();
                } else {
                    band[i * w + bw - (i - j)] = s / band[j * w + bw];
                }
            }
        }
        Ok(Self { n, bw, band })
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    /// Solve `L y = b` in place.
    pub fn forward(&self, x: &mut [f64]) {
        let (bw, w) = (self.bw, self.bw + 1);
        for i in 0..self.n {
            let lo = i.saturating_sub(bw);
            let row = &self.band[i * w + bw - (i - lo)..i * w + bw];
            let s: f64 = row.iter().zip(&x[lo..i]).map(|(a, b)| a * b).sum();
            x[i] = (x[i] - s) / self.band[i * w + bw];
        }
    }

    /// Solve `Lᵀ y = b` in place.
    pub fn backward(&self, x: &mut [f64]) {
        let (bw, w) = (self.bw, self.bw + 1);
        for i in (0..self.n).rev() {
            x[i] /= self.band[i * w + bw];
            let xi = x[i];
            let lo = i.saturating_sub(bw);
            let row = &self.band[i * w + bw - (i - lo)..i * w + bw];
            for (t, a) in x[lo..i].iter_mut().zip(row) {
                *t -= a * xi;
            }
        }
    }
}

impl GreenSolve for BandedCholesky {
    fn dim(&self) -> usize {
        self.n
    }

    fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let mut x = rhs.to_vec();
        self.forward(&mut x);
        self.backward(&mut x);
        Ok(x)
    }
}

/// Matrix-free conjugate gradients for domains too large to factor.
pub struct ConjugateGradient<'a> {
    domain: &'a LatticeDomain,
    pub tol: f64,
    pub max_iter: usize,
}

impl<'a> ConjugateGradient<'a> {
    pub fn new(domain: &'a LatticeDomain) -> Self {
        Self { domain, tol: 1e-12, max_iter: 200_000 }
    }
}

impl GreenSolve for ConjugateGradient<'_> {
    fn dim(&self) -> usize {
        self.domain.len()
    }

    fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = b.len();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let mut x = vec![0.0; n];
        let mut r = b.to_vec();
        let mut p = r.clone();
        let mut ap = vec![0.0; n];
        let bnorm = dot(b, b).sqrt();
        if bnorm == 0.0 {
            return Ok(x);
        }
        let mut rr = dot(&r, &r);
        for it in 0..self.max_iter {
            if rr.sqrt() <= self.tol * bnorm {
                return Ok(x);
            }
            apply_laplacian(self.domain, &p, &mut ap);
            let alpha = rr / dot(&p, &ap);
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            let rr_new = dot(&r, &r);
            let beta = rr_new / rr;
            rr = rr_new;
            for i in 0..n {
                p[i] = r[i] + beta * p[i];
            }
            if it + 1 == self.max_iter {
                break;
            }
        }
        Err(Error::NoConvergence { residual: rr.sqrt() / bnorm, iterations: self.max_iter })
    }
}

/// Solve for many right-hand sides in parallel.
pub fn solve_many<S: GreenSolve>(solver: &S, cols: &[usize]) -> Result<Vec<Vec<f64>>> {
    cols.par_iter().map(|&c| solver.column(c)).collect()
}
