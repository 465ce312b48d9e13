use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{DgffSampler, PrecisionSampler};
use crate::green::GreenOperator;
use crate::lattice::LatticeDomain;
use crate::rng::Purpose;
use crate::stats;
use crate::walk::{fluctuations, Horizon, Start, Walker};

pub const COVER_STEP_CAP: u64 = 10_000_000_000;

impl Walker<'_> {
    /// Discrete steps until every vertex of `D_N` has been visited.
    pub fn advance_until_cover(&mut self, cap: u64) -> Result<u64> {
        let rho = self.domain.rho() as usize;
        let mut left = self.visits[..rho].iter().filter(|&&c| c == 0).count();
        while left > 0 {
            if self.steps >= cap {
                return Err(Error::StepCap(cap));
            }
            let v = self.next_vertex();
            self.pos = v;
            self.steps += 1;
            let c = &mut self.visits[v as usize];
            if *c == 0 && (v as usize) != rho {
                left -= 1;
            }
            *c += 1;
        }
        Ok(self.steps)
    }
}

pub fn cover_time(domain: &LatticeDomain, start: Start, seed: u64, replicate: u64) -> Result<u64> {
    Walker::new(domain, start, seed, replicate)?.advance_until_cover(COVER_STEP_CAP)
}

/// `H_ϱ` for the continuous-time walk started at `x`.
pub fn hitting_time_rho(domain: &LatticeDomain, x: usize, seed: u64, replicate: u64) -> Result<f64> {
    Ok(Walker::new(domain, Start::Vertex(x), seed, replicate)?.run_to_rho())
}

#[derive(Clone, Debug, Serialize)]
pub struct RayKnightReport {
    pub vertex: usize,
    pub t: f64,
    pub reps: usize,
    /// `t + ½ G(u,u)`.
    pub exact_mean: f64,
    pub left_mean: f64,
    pub right_mean: f64,
    /// `(mean(L̂_t(u) + ½h_u²) − exact) / SE`.
    pub left_error_se: f64,
    /// `(mean(½(h̃_u + √(2t))²) − exact) / SE`.
    pub right_error_se: f64,
    /// Two-sample discrepancy of the means in SE units.
    pub mean_error_se: f64,
    pub ks_statistic: f64,
    pub ks_pvalue: f64,
}

/// Compare `L̂_t(u) + ½h_u²` with `½(h̃_u + √(2t))²` in law, `L̂_t` from a walk
/// started at `ϱ`, `h` and `h̃` independent fields.
pub fn ray_knight_verify(
    domain: &LatticeDomain,
    green: &GreenOperator,
    t: f64,
    reps: usize,
    seed: u64,
    u: usize,
) -> Result<RayKnightReport> {
    if !(t > 0.0) {
        return Err(Error::Parameter("t must be positive".into()));
    }
    let h = DgffSampler::new(green)?;
    let h_tilde = DgffSampler::new(green)?.purpose(Purpose::FieldTilde);
    let shift = (2.0 * t).sqrt();
    let pairs: Vec<(f64, f64)> = (0..reps as u64)
        .into_par_iter()
        .map(|k| {
            let mut w = Walker::new(domain, Start::Boundary, seed, k)?;
            w.advance_boundary(t);
            let l = w.times()[u] / 4.0;
            let hu = h.sample(seed, k).values[u];
            let hv = h_tilde.sample(seed, k).values[u];
            Ok((l + 0.5 * hu * hu, 0.5 * (hv + shift).powi(2)))
        })
        .collect::<Result<_>>()?;
    let (left, right): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let exact = t + 0.5 * green.get(u, u);
    let (ml, mr) = (stats::mean(&left), stats::mean(&right));
    let (sl, sr) = (stats::std_error(&left), stats::std_error(&right));
    let ks = stats::ks_two_sample(&left, &right);
    Ok(RayKnightReport {
        vertex: u,
        t,
        reps,
        exact_mean: exact,
        left_mean: ml,
        right_mean: mr,
        left_error_se: (ml - exact) / sl,
        right_error_se: (mr - exact) / sr,
        mean_error_se: (ml - mr) / (sl * sl + sr * sr).sqrt(),
        ks_statistic: ks.statistic,
        ks_pvalue: ks.p_value,
    })
}

/// Sign-coupled proxy for the Ray-Knight coupling: with `L̂_t` and an
/// independent `h`, set `h̃_x = √(2L̂_t(x) + h_x²) − √(2t)`, which solves the
/// coupling identity pathwise. Returns `(T_N(t), Y_N)` per replicate, `Y_N`
/// the average of `h̃`.
pub fn coupled_t_and_y(domain: &LatticeDomain, t: f64, seed: u64, reps: usize) -> Result<Vec<(f64, f64)>> {
    let sampler = PrecisionSampler::new(domain)?;
    let shift = (2.0 * t).sqrt();
    (0..reps as u64)
        .into_par_iter()
        .map(|k| {
            let mut w = Walker::new(domain, Start::Boundary, seed, k)?;
            w.advance_boundary(t);
            let f = w.continuous_field(Horizon::Boundary(t));
            let rec = fluctuations(&f, domain, t);
            let h = sampler.sample(seed, k);
            let y = f
                .interior()
                .iter()
                .zip(&h.values)
                .map(|(l, hx)| (2.0 * l + hx * hx).sqrt() - shift)
                .sum::<f64>()
                / domain.len() as f64;
            Ok((rec.t_norm, y))
        })
        .collect()
}
