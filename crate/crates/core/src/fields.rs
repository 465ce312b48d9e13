//! Discrete Gaussian free field sampling, the zero-average decomposition
//! and the local covariance windows of the pinned and modified fields.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::green::GreenOperator;
use crate::lattice::LatticeDomain;
use crate::linalg::{BandedCholesky, GreenSolve};
use crate::potential::PotentialKernel;
use crate::rng::{stream, Purpose};

pub const DEFAULT_FIELD_CAP: usize = 5000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldSample {
    pub values: Vec<f64>,
    pub seed: u64,
    pub replicate: u64,
    /// Spatial average `Y = |D_N|⁻¹ Σ h_x`.
    pub y: f64,
    pub zero_average: bool,
}

impl FieldSample {
    fn new(values: Vec<f64>, seed: u64, replicate: u64) -> Self {
        let y = values.iter().sum::<f64>() / values.len() as f64;
        Self { values, seed, replicate, y, zero_average: false }
    }
}

fn normals<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Exact sampler through the dense Cholesky factor of `G`.
pub struct DgffSampler {
    chol: DMatrix<f64>,
    purpose: Purpose,
}

impl DgffSampler {
    pub fn new(green: &GreenOperator) -> Result<Self> {
        Self::with_cap(green, DEFAULT_FIELD_CAP)
    }

    pub fn with_cap(green: &GreenOperator, cap: usize) -> Result<Self> {
        let n = green.dim();
        if n > cap {
            return Err(Error::TooLarge { n, cap });
        }
        let m = DMatrix::from_row_slice(n, n, green.entries());
        let l = match m.clone().cholesky() {
            Some(c) => c.l(),
            None => {
                let jitter = 1e-12 * m.trace() / n as f64;
                let mut j = m;
                for i in 0..n {
                    j[(i, i)] += jitter;
                }
                j.cholesky().ok_or(Error::Cholesky)?.l()
            }
        };
        Ok(Self { chol: l, purpose: Purpose::Field })
    }

    /// Draw from a different stream family, e.g. for an independent copy.
    pub fn purpose(mut self, purpose: Purpose) -> Self {
        self.purpose = purpose;
        self
    }

    pub fn dim(&self) -> usize {
        self.chol.nrows()
    }

    pub fn sample(&self, seed: u64, replicate: u64) -> FieldSample {
        let mut rng = stream(seed, replicate, self.purpose);
        let z = DVector::from_vec(normals(&mut rng, self.dim()));
        let h = &self.chol * z;
        FieldSample::new(h.as_slice().to_vec(), seed, replicate)
    }
}

/// `count` i.i.d. samples, replicate `k` on its own stream.
pub fn sample_dgff(green: &GreenOperator, seed: u64, count: usize) -> Result<Vec<FieldSample>> {
    if count == 0 {
        return Err(Error::Parameter("count must be at least 1".into()));
    }
    let s = DgffSampler::new(green)?;
    Ok((0..count as u64).into_par_iter().map(|k| s.sample(seed, k)).collect())
}

/// Sampler through the banded factor of the precision matrix `4I − A`:
/// `h = L⁻ᵀ z` has covariance `(LLᵀ)⁻¹ = G`. Needs no dense `G`, so it
/// reaches domains far beyond the dense cap.
pub struct PrecisionSampler {
    chol: BandedCholesky,
    n: usize,
    purpose: Purpose,
}

impl PrecisionSampler {
    pub fn new(domain: &LatticeDomain) -> Result<Self> {
        Ok(Self { chol: BandedCholesky::new(domain)?, n: domain.len(), purpose: Purpose::Field })
    }

    pub fn purpose(mut self, purpose: Purpose) -> Self {
        self.purpose = purpose;
        self
    }

    pub fn sample(&self, seed: u64, replicate: u64) -> FieldSample {
        let mut rng = stream(seed, replicate, self.purpose);
        let mut z = normals(&mut rng, self.n);
        self.chol.backward(&mut z);
        FieldSample::new(z, seed, replicate)
    }
}

/// Precomputed pieces of `ĥ = h − 𝔡_N Y`.
#[derive(Clone, Debug)]
pub struct ZeroAverage {
    /// `𝔡_N(x) = |D_N| r(x) / Σ r`, `r` the row sums of `G`.
    pub d_n: Vec<f64>,
    pub row_sums: Vec<f64>,
    /// `Var Y_N = Σ r / |D_N|²`.
    pub var_y: f64,
}

impl ZeroAverage {
    pub fn new<S: GreenSolve>(green: &S) -> Result<Self> {
        Ok(Self::from_row_sums(green.row_sums()?))
    }

    pub fn from_row_sums(row_sums: Vec<f64>) -> Self {
        let n = row_sums.len() as f64;
        let total: f64 = row_sums.iter().sum();
        let d_n = row_sums.iter().map(|r| n * r / total).collect();
        Self { d_n, row_sums, var_y: total / (n * n) }
    }

    pub fn decompose(&self, sample: &FieldSample) -> Decomposition {
        let y = sample.values.iter().sum::<f64>() / sample.values.len() as f64;
        let values = sample.values.iter().zip(&self.d_n).map(|(h, d)| h - d * y).collect();
        let hat = FieldSample {
            values,
            seed: sample.seed,
            replicate: sample.replicate,
            y: 0.0,
            zero_average: true,
        };
        Decomposition { y, hat }
    }

    /// `Cov(Y, ĥ_x) = r(x)/|D_N| − 𝔡_N(x) Var Y`, from `G` alone.
    pub fn cov_y_hat(&self, x: usize) -> f64 {
        self.row_sums[x] / self.row_sums.len() as f64 - self.d_n[x] * self.var_y
    }
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub y: f64,
    pub hat: FieldSample,
}

pub fn zero_average_decompose(
    sample: &FieldSample,
    green: &GreenOperator,
) -> (Decomposition, Vec<f64>) {
    let za = ZeroAverage::new(green).expect("dense row sums cannot fail");
    (za.decompose(sample), za.d_n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CovarianceKind {
    Pinned,
    Tilde,
}

/// Covariance of the pinned field `φ` or the modified field `φ̃` on
/// `Λ_r(0) = {z : |z|∞ ≤ r}`.
#[derive(Clone, Debug)]
pub struct CovarianceWindow {
    pub radius: usize,
    pub kind: CovarianceKind,
    /// Row-major offsets, `(2r+1)²` of them.
    pub offsets: Vec<[i64; 2]>,
    pub matrix: DMatrix<f64>,
}

pub fn window_offsets(r: usize) -> Vec<[i64; 2]> {
    let r = r as i64;
    (-r..=r).flat_map(|i| (-r..=r).map(move |j| [i, j])).collect()
}

/// `𝔞(x) + 𝔞(y) − 𝔞(x − y)`.
pub fn pinned_cov(a: &PotentialKernel, x: [i64; 2], y: [i64; 2]) -> f64 {
    a.value(x) + a.value(y) - a.value([x[0] - y[0], x[1] - y[1]])
}

/// `⅛ [1 − δ_{x0} − δ_{y0} + δ_{xy}]`.
pub fn tilde_correction(x: [i64; 2], y: [i64; 2]) -> f64 {
    let d = |b: bool| if b { 1.0 } else { 0.0 };
    0.125 * (1.0 - d(x == [0, 0]) - d(y == [0, 0]) + d(x == y))
}

pub fn tilde_cov(a: &PotentialKernel, x: [i64; 2], y: [i64; 2]) -> f64 {
    pinned_cov(a, x, y) - tilde_correction(x, y)
}

pub fn local_covariance(kind: CovarianceKind, r: usize, a: &PotentialKernel) -> Result<CovarianceWindow> {
    if r < 1 {
        return Err(Error::Parameter("window radius must be at least 1".into()));
    }
    let offsets = window_offsets(r);
    let k = offsets.len();
    let matrix = DMatrix::from_fn(k, k, |i, j| match kind {
        CovarianceKind::Pinned => pinned_cov(a, offsets[i], offsets[j]),
        CovarianceKind::Tilde => tilde_cov(a, offsets[i], offsets[j]),
    });
    Ok(CovarianceWindow { radius: r, kind, offsets, matrix })
}

impl CovarianceWindow {
    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix.clone().symmetric_eigen().eigenvalues.min()
    }

    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        let v = DVector::from_column_slice(v);
        v.dot(&(&self.matrix * &v))
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PinnedReport {
    pub max_identity_error: f64,
    pub min_eigenvalue: f64,
}

pub fn verify_pinned_relation(r: usize, a: &PotentialKernel) -> Result<PinnedReport> {
    let tilde = local_covariance(CovarianceKind::Tilde, r, a)?;
    let pinned = local_covariance(CovarianceKind::Pinned, r, a)?;
    let mut err = 0.0f64;
    for i in 0..tilde.offsets.len() {
        for j in 0..tilde.offsets.len() {
            let c = tilde_correction(tilde.offsets[i], tilde.offsets[j]);
            err = err.max((tilde.matrix[(i, j)] + c - pinned.matrix[(i, j)]).abs());
        }
    }
    Ok(PinnedReport { max_identity_error: err, min_eigenvalue: tilde.min_eigenvalue() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::green::compute_green;

    #[test]
    fn tilde_vanishes_at_origin() {
        let a = PotentialKernel::new(128);
        assert_eq!(tilde_cov(&a, [0, 0], [0, 0]), 0.0);
        assert_eq!(tilde_cov(&a, [0, 0], [2, 1]), 0.0);
        assert_eq!(pinned_cov(&a, [1, 2], [1, 2]), 2.0 * a.value([1, 2]));
    }

    #[test]
    fn decomposition_identities() {
        let d = LatticeDomain::square_block(7, 8).unwrap();
        let g = compute_green(&d).unwrap();
        let s = &sample_dgff(&g, 5, 1).unwrap()[0];
        let (dec, dn) = zero_average_decompose(s, &g);
        assert!(dec.hat.values.iter().sum::<f64>().abs() < 1e-12);
        assert!((dn.iter().sum::<f64>() - 49.0).abs() < 1e-12);
    }

    #[test]
    fn samplers_are_deterministic() {
        let d = LatticeDomain::square_block(5, 6).unwrap();
        let g = compute_green(&d).unwrap();
        let a = DgffSampler::new(&g).unwrap();
        assert_eq!(a.sample(3, 7), a.sample(3, 7));
        let p = PrecisionSampler::new(&d).unwrap();
        assert_eq!(p.sample(3, 7), p.sample(3, 7));
        assert_ne!(p.sample(3, 7), p.sample(3, 8));
    }
}
