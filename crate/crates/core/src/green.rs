//! Green operator `G^{D_N}` of the walk killed at `ϱ`, in local-time units.

use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::LatticeDomain;
use crate::linalg::{BandedCholesky, GreenSolve};

pub const DEFAULT_GREEN_CAP: usize = 20_000;
const MAGIC: &[u8; 8] = b"WLGREEN1";

/// Dense symmetric `G(x,y) = E^x ℓ_{H_ϱ}(y)`, with `(4I − A) G = I`.
#[derive(Clone, Debug, PartialEq)]
pub struct GreenOperator {
    n: usize,
    // row-major
    entries: Vec<f64>,
}

pub fn compute_green(domain: &LatticeDomain) -> Result<GreenOperator> {
    compute_green_capped(domain, DEFAULT_GREEN_CAP)
}

pub fn compute_green_capped(domain: &LatticeDomain, cap: usize) -> Result<GreenOperator> {
    let n = domain.len();
    if n > cap {
        return Err(Error::TooLarge { n, cap });
    }
    let chol = BandedCholesky::new(domain)?;
    let cols: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|y| {
            let mut e = vec![0.0; n];
            e[y] = 1.0;
            chol.forward(&mut e);
            chol.backward(&mut e);
            e
        })
        .collect();
    let mut entries = vec![0.0; n * n];
    for (y, col) in cols.into_iter().enumerate() {
        for (x, v) in col.into_iter().enumerate() {
            entries[x * n + y] = v;
        }
    }
    let g = GreenOperator { n, entries };
    let res = g.residual(domain);
    if res > 1e-9 {
        return Err(Error::NoConvergence { residual: res, iterations: 0 });
    }
    Ok(g)
}

impl GreenOperator {
    pub fn from_entries(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::Format(format!("expected {} entries, got {}", n * n, entries.len())));
        }
        Ok(Self { n, entries })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.entries[x * self.n + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.entries[x * self.n..(x + 1) * self.n]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|x| self.get(x, x)).collect()
    }

    /// `r(x) = Σ_y G(x,y)`.
    pub fn row_sum_vec(&self) -> Vec<f64> {
        (0..self.n).map(|x| self.row(x).iter().sum()).collect()
    }

    /// `Σ_{x,y} G(x,y)`.
    pub fn total(&self) -> f64 {
        self.row_sum_vec().iter().sum()
    }

    pub fn symmetry_defect(&self) -> f64 {
        let mut m = 0.0f64;
        for x in 0..self.n {
            for y in 0..x {
                m = m.max((self.get(x, y) - self.get(y, x)).abs());
            }
        }
        m
    }

    /// `max |¼ Σ_{z~x} G(z,y) − G(x,y) + δ_{xy}/4|`.
    pub fn residual(&self, domain: &LatticeDomain) -> f64 {
        let rho = domain.rho();
        (0..self.n)
            .into_par_iter()
            .map(|x| {
                let nb: Vec<usize> =
                    domain.neighbors(x).iter().filter(|&&z| z != rho).map(|&z| z as usize).collect();
                let mut m = 0.0f64;
                for y in 0..self.n {
                    let s: f64 = nb.iter().map(|&z| self.get(z, y)).sum();
                    let d = if x == y { 0.25 } else { 0.0 };
                    m = m.max((0.25 * s - self.get(x, y) + d).abs());
                }
                m
            })
            .reduce(|| 0.0, f64::max)
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.entries.len() * 8);
        for v in &self.entries {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("bad Green file magic".into()));
        }
        let mut nb = [0u8; 8];
        r.read_exact(&mut nb)?;
        let n = u64::from_le_bytes(nb) as usize;
        let mut raw = vec![0u8; n * n * 8];
        r.read_exact(&mut raw)?;
        let entries = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Self::from_entries(n, entries)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_binary(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_binary(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

impl GreenSolve for GreenOperator {
    fn dim(&self) -> usize {
        self.n
    }

    fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        Ok((0..self.n).map(|x| self.row(x).iter().zip(rhs).map(|(a, b)| a * b).sum()).collect())
    }

    fn row_sums(&self) -> Result<Vec<f64>> {
        Ok(self.row_sum_vec())
    }

    fn column(&self, y: usize) -> Result<Vec<f64>> {
        Ok((0..self.n).map(|x| self.get(x, y)).collect())
    }
}

/// Closed-form moments from the Kac formula.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KacMoments {
    /// `E^x[H_ϱ²]` for the continuous-time walk.
    pub second_moment_h_rho: f64,
    /// `Var U_N(t) = (2t/|D_N|²) Σ G`.
    pub var_u: f64,
}

pub fn kac_moments(green: &GreenOperator, domain: &LatticeDomain, x: usize, t: f64) -> KacMoments {
    let n = green.dim();
    let deg = |v: usize| domain.degree(v as u32) as f64;
    // Σ_z deg(z) G(y,z)
    let weighted: Vec<f64> =
        (0..n).map(|y| green.row(y).iter().enumerate().map(|(z, g)| deg(z) * g).sum()).collect();
    let second: f64 = 2.0 * (0..n).map(|y| deg(y) * green.get(x, y) * weighted[y]).sum::<f64>();
    let var_u = 2.0 * t * green.total() / (n as f64 * n as f64);
    KacMoments { second_moment_h_rho: second, var_u }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, DomainSpec};

    #[test]
    fn single_vertex() {
        let d = build_lattice(&DomainSpec::unit_square(), 4).unwrap();
        let g = compute_green(&d).unwrap();
        assert_eq!(g.get(0, 0), 0.25);
        let k = kac_moments(&g, &d, 0, 1.0);
        assert_eq!(k.var_u, 0.5);
        assert_eq!(k.second_moment_h_rho, 2.0);
    }

    #[test]
    fn small_square_is_exact_and_ordered() {
        let d = LatticeDomain::square_block(8, 11).unwrap();
        let g = compute_green(&d).unwrap();
        assert!(g.residual(&d) <= 1e-12);
        assert!(g.symmetry_defect() <= 1e-12);
        for x in 0..d.len() {
            for y in 0..d.len() {
                assert!(g.get(x, y) >= 0.0 && g.get(x, y) <= g.get(y, y) + 1e-14);
            }
        }
    }

    #[test]
    fn binary_roundtrip() {
        let d = LatticeDomain::square_block(3, 4).unwrap();
        let g = compute_green(&d).unwrap();
        let mut buf = Vec::new();
        g.write_binary(&mut buf).unwrap();
        assert_eq!(&buf[..8], b"WLGREEN1");
        assert_eq!(buf.len(), 16 + 81 * 8);
        assert_eq!(GreenOperator::read_binary(&buf[..]).unwrap(), g);
        assert!(GreenOperator::read_binary(&b"NOTGREEN"[..]).is_err());
    }

    #[test]
    fn cap_is_enforced() {
        let d = LatticeDomain::square_block(10, 11).unwrap();
        assert!(matches!(compute_green_capped(&d, 50), Err(Error::TooLarge { n: 100, cap: 50 })));
    }
}
