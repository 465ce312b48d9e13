//! Continuum quantities by discrete approximation: `σ_D²`, `𝔡` and the
//! continuum Green function.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{build_lattice, DomainSpec, LatticeDomain, Shape};
use crate::linalg::{BandedCholesky, GreenSolve};

/// `Var Y_N = |D_N|⁻² Σ_{x,y} G(x,y)`, the finite-`N` estimator of `σ_D²`.
/// It approximates `σ_D²/Leb(D)²`, which is `σ_D²` for the unit square.
pub fn sigma_d2<S: GreenSolve>(green: &S) -> Result<f64> {
    let n = green.dim() as f64;
    Ok(green.row_sums()?.iter().sum::<f64>() / (n * n))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    DFunction,
    GreenSlice,
}

/// Function values at points of `D`, each standing for one cell.
#[derive(Clone, Debug, Serialize)]
pub struct ContinuumGrid {
    pub resolution: usize,
    pub quantity: Quantity,
    pub points: Vec<[f64; 2]>,
    pub values: Vec<f64>,
    pub cell_area: f64,
    /// `σ_D²` used by the Poisson route.
    pub sigma2: Option<f64>,
}

impl ContinuumGrid {
    /// Midpoint-rule integral.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_area
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Bilinear interpolation on a Poisson-route grid (zero on `∂D`).
    pub fn interpolate(&self, p: [f64; 2]) -> f64 {
        let m = self.resolution;
        let at = |i: usize, j: usize| {
            if i == 0 || j == 0 || i >= m || j >= m {
                0.0
            } else {
                self.values[(i - 1) * (m - 1) + (j - 1)]
            }
        };
        let (x, y) = (p[0] * m as f64, p[1] * m as f64);
        if !(0.0..=m as f64).contains(&x) || !(0.0..=m as f64).contains(&y) {
            return 0.0;
        }
        let (i, j) = ((x.floor() as usize).min(m - 1), (y.floor() as usize).min(m - 1));
        let (fx, fy) = (x - i as f64, y - j as f64);
        at(i, j) * (1.0 - fx) * (1.0 - fy)
            + at(i + 1, j) * fx * (1.0 - fy)
            + at(i, j + 1) * (1.0 - fx) * fy
            + at(i + 1, j + 1) * fx * fy
    }
}

/// `𝔡_N(x) = |D_N| Σ_y G(x,y) / Σ_{z,y} G(z,y)` at the points `x/N`.
pub fn d_function_green<S: GreenSolve>(domain: &LatticeDomain, green: &S) -> Result<ContinuumGrid> {
    let r = green.row_sums()?;
    let total: f64 = r.iter().sum();
    let n = r.len() as f64;
    let s = domain.scale() as f64;
    Ok(ContinuumGrid {
        resolution: domain.scale() as usize,
        quantity: Quantity::DFunction,
        points: (0..domain.len()).map(|v| domain.position(v)).collect(),
        values: r.iter().map(|x| n * x / total).collect(),
        cell_area: 1.0 / (s * s),
        sigma2: None,
    })
}

/// Dirichlet solution of `−Δ𝔡 = Leb(D)/σ_D²` on the unit square, five-point
/// Laplacian on the nodes `(i/M, j/M)`, `0 < i, j < M`, solved exactly
/// through the discrete sine transform.
pub fn d_function_poisson(spec: &DomainSpec, m: usize, sigma2: f64) -> Result<ContinuumGrid> {
    if spec.shape != Shape::UnitSquare {
        return Err(Error::UnsupportedShape("the Poisson route (unit square only)"));
    }
    if m < 2 || !(sigma2 > 0.0) {
        return Err(Error::Parameter("Poisson route needs M >= 2 and sigma2 > 0".into()));
    }
    let f = spec.area() / sigma2;
    let k = m - 1;
    let h = 1.0 / m as f64;
    let sine: Vec<f64> = (0..k * k)
        .map(|ip| {
            let (i, p) = (ip / k + 1, ip % k + 1);
            (PI * (i * p) as f64 / m as f64).sin()
        })
        .collect();
    let lam: Vec<f64> = (1..=k).map(|p| 4.0 / (h * h) * (PI * p as f64 / (2.0 * m as f64)).sin().powi(2)).collect();
    // S is symmetric with S² = (M/2) I
    let rhs = vec![f; k * k];
    let mut hat = sine_2d(&sine, &rhs, k);
    let norm = (2.0 / m as f64).powi(2);
    for p in 0..k {
        for q in 0..k {
            hat[p * k + q] *= norm / (lam[p] + lam[q]);
        }
    }
    let values = sine_2d(&sine, &hat, k);
    let anchor = spec.anchor;
    let points = (0..k * k)
        .map(|ij| [anchor[0] + (ij / k + 1) as f64 * h, anchor[1] + (ij % k + 1) as f64 * h])
        .collect();
    Ok(ContinuumGrid {
        resolution: m,
        quantity: Quantity::DFunction,
        points,
        values,
        cell_area: h * h,
        sigma2: Some(sigma2),
    })
}

// S · X · S for the k×k sine matrix S.
fn sine_2d(s: &[f64], x: &[f64], k: usize) -> Vec<f64> {
    let mul = |a: &[f64], b: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; k * k];
        out.par_chunks_mut(k).enumerate().for_each(|(i, row)| {
            for l in 0..k {
                let a_il = a[i * k + l];
                let b_row = &b[l * k..(l + 1) * k];
                for (o, b) in row.iter_mut().zip(b_row) {
                    *o += a_il * b;
                }
            }
        });
        out
    };
    let sx = mul(s, x);
    mul(&sx, s)
}

/// `max |Δ_h 𝔡 + Leb(D)/σ²|` over interior nodes of a Poisson-route grid.
pub fn poisson_residual(grid: &ContinuumGrid, area: f64) -> f64 {
    let m = grid.resolution;
    let k = m - 1;
    let h2 = (1.0 / m as f64).powi(2);
    let f = area / grid.sigma2.unwrap_or(f64::NAN);
    let at = |i: isize, j: isize| {
        if i < 0 || j < 0 || i >= k as isize || j >= k as isize {
            0.0
        } else {
            grid.values[i as usize * k + j as usize]
        }
    };
    let mut worst = 0.0f64;
    for i in 0..k as isize {
        for j in 0..k as isize {
            let lap = (at(i + 1, j) + at(i - 1, j) + at(i, j + 1) + at(i, j - 1) - 4.0 * at(i, j)) / h2;
            worst = worst.max((lap + f).abs());
        }
    }
    worst
}

/// `sup |𝔡_green − 𝔡_poisson|`, the Poisson grid interpolated at the lattice
/// points of the Green route.
pub fn d_route_difference(green_route: &ContinuumGrid, poisson_route: &ContinuumGrid) -> f64 {
    green_route
        .points
        .iter()
        .zip(&green_route.values)
        .map(|(p, v)| (v - poisson_route.interpolate(*p)).abs())
        .fold(0.0, f64::max)
}

/// `G^{D_N}(⌊xN⌋, ⌊yN⌋)` with one factorization cached per `N`.
pub struct ContinuumGreen {
    spec: DomainSpec,
    cache: Mutex<HashMap<u32, std::sync::Arc<(LatticeDomain, BandedCholesky)>>>,
}

impl ContinuumGreen {
    pub fn new(spec: DomainSpec) -> Self {
        Self { spec, cache: Mutex::new(HashMap::new()) }
    }

    pub fn estimate(&self, x: [f64; 2], y: [f64; 2], n: u32) -> Result<f64> {
        if x == y {
            return Err(Error::Diagonal);
        }
        let entry = {
            let mut c = self.cache.lock().unwrap();
            match c.get(&n) {
                Some(e) => e.clone(),
                None => {
                    let d = build_lattice(&self.spec, n)?;
                    let f = BandedCholesky::new(&d)?;
                    let e = std::sync::Arc::new((d, f));
                    c.insert(n, e.clone());
                    e
                }
            }
        };
        let (domain, chol) = &*entry;
        let s = n as f64;
        let site = |p: [f64; 2]| [(p[0] * s).floor() as i64, (p[1] * s).floor() as i64];
        let (a, b) = (site(x), site(y));
        let ia = domain.index_of(a).ok_or(Error::OutsideDomain(a))?;
        let ib = domain.index_of(b).ok_or(Error::OutsideDomain(b))?;
        Ok(chol.column(ib)?[ia])
    }
}

pub fn continuum_green_estimate(spec: &DomainSpec, x: [f64; 2], y: [f64; 2], n: u32) -> Result<f64> {
    ContinuumGreen::new(spec.clone()).estimate(x, y, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_route_solves_its_system() {
        let g = d_function_poisson(&DomainSpec::unit_square(), 32, 0.035).unwrap();
        assert!(poisson_residual(&g, 1.0) < 1e-8);
        assert!(g.min() > 0.0);
        assert!(d_function_poisson(&DomainSpec::disk(0.5), 32, 0.03).is_err());
    }

    #[test]
    fn diagonal_is_rejected() {
        let e = continuum_green_estimate(&DomainSpec::unit_square(), [0.5, 0.5], [0.5, 0.5], 16);
        assert!(matches!(e, Err(Error::Diagonal)));
    }
}
