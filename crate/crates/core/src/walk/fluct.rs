use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::lattice::LatticeDomain;
use crate::walk::{Horizon, LocalTimeField, Start, Walker};

/// Fluctuation of the total local time at boundary time `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FluctuationRecord {
    /// `U_N(t) = |D_N|⁻¹ Σ_x [L̂_t(x) − t]`.
    pub u: f64,
    /// `T_N(t) = U_N(t)/√(2t)`; zero when `t = 0`.
    pub t_norm: f64,
    /// `t° = t − (1 − deg ϱ / deg D_N) √(2t) T_N(t)`.
    pub t_circ: f64,
    /// `τ̂_ϱ(t)`.
    pub tau_rho: f64,
    /// Set when `t = 0` forced `T = 0`.
    pub degenerate: bool,
}

pub fn t_circ(t: f64, t_norm: f64, domain: &LatticeDomain) -> f64 {
    let ratio = domain.deg_rho() as f64 / domain.deg_total() as f64;
    t - (1.0 - ratio) * (2.0 * t).sqrt() * t_norm
}

pub fn fluctuations(field: &LocalTimeField, domain: &LatticeDomain, t: f64) -> FluctuationRecord {
    let n = domain.len() as f64;
    let u = field.interior().iter().map(|l| l - t).sum::<f64>() / n;
    let (t_norm, degenerate) = if t > 0.0 { (u / (2.0 * t).sqrt(), false) } else { (0.0, u != 0.0) };
    FluctuationRecord { u, t_norm, t_circ: t_circ(t, t_norm, domain), tau_rho: field.elapsed, degenerate }
}

/// `|t − τ̂_ϱ(t)/deg D_N + (1 − deg ϱ/deg D_N) U_N(t)|`.
pub fn time_identity_check(t: f64, record: &FluctuationRecord, domain: &LatticeDomain) -> f64 {
    let dt = domain.deg_total() as f64;
    let ratio = domain.deg_rho() as f64 / dt;
    (t - record.tau_rho / dt + (1.0 - ratio) * record.u).abs()
}

/// `t* = inf{s : τ̂_ϱ(s) ≥ deg(D_N)·t}`, the `ϱ` local time at continuous
/// time `deg(D_N)·t`.
pub fn t_star(domain: &LatticeDomain, t: f64, seed: u64, replicate: u64) -> Result<f64> {
    let mut w = Walker::new(domain, Start::Boundary, seed, replicate)?;
    w.advance_time(domain.deg_total() as f64 * t);
    Ok(w.times()[domain.rho() as usize] / domain.deg_rho() as f64)
}

/// Boundary-mode fluctuation records of `reps` independent walks from `ϱ`.
pub fn boundary_fluctuations(
    domain: &LatticeDomain,
    t: f64,
    seed: u64,
    reps: usize,
) -> Result<Vec<(FluctuationRecord, f64)>> {
    (0..reps as u64)
        .into_par_iter()
        .map(|k| {
            let mut w = Walker::new(domain, Start::Boundary, seed, k)?;
            w.advance_boundary(t);
            let f = w.continuous_field(Horizon::Boundary(t));
            let rec = fluctuations(&f, domain, t);
            Ok((rec, time_identity_check(t, &rec, domain)))
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct SandwichReport {
    pub t: f64,
    pub b: f64,
    pub reps: usize,
    pub holds: usize,
    /// Replicates whose lower boundary time was negative and clipped to 0.
    pub clipped: usize,
    pub fraction: f64,
}

/// Whether `L̂_{t°−b t^{1/4}} ≤ L̃_{deg(D_N) t} ≤ L̂_{t°+b t^{1/4}}` holds
/// on one path, with `t = 2gθ(log N)²`.
pub fn sandwich_once(domain: &LatticeDomain, t: f64, b: f64, seed: u64, k: u64) -> Result<(bool, bool)> {
    let mut w = Walker::new(domain, Start::Boundary, seed, k)?;
    w.advance_boundary(t);
    let rec = fluctuations(&w.continuous_field(Horizon::Boundary(t)), domain, t);
    let width = b * t.powf(0.25);
    let lower = rec.t_circ - width;
    let clipped = lower < 0.0;
    let lower = lower.max(0.0);
    let upper = rec.t_circ + width;

    let mut w = Walker::new(domain, Start::Boundary, seed, k)?;
    w.advance_boundary(lower);
    let lo = w.continuous_field(Horizon::Boundary(lower));
    w.advance_boundary(upper);
    let hi = w.continuous_field(Horizon::Boundary(upper));

    let s = domain.deg_total() as f64 * t;
    let mut w = Walker::new(domain, Start::Boundary, seed, k)?;
    w.advance_time(s);
    let mid = w.continuous_field(Horizon::Time(s));
    Ok((lo.dominated_by(&mid) && mid.dominated_by(&hi), clipped))
}

pub fn sandwich_check(
    domain: &LatticeDomain,
    theta: f64,
    b: f64,
    seed: u64,
    reps: usize,
) -> Result<SandwichReport> {
    let n = domain.scale() as f64;
    let t = 2.0 * crate::G * theta * n.ln().powi(2);
    sandwich_at(domain, t, b, seed, reps)
}

pub fn sandwich_at(domain: &LatticeDomain, t: f64, b: f64, seed: u64, reps: usize) -> Result<SandwichReport> {
    let out: Vec<(bool, bool)> = (0..reps as u64)
        .into_par_iter()
        .map(|k| sandwich_once(domain, t, b, seed, k))
        .collect::<Result<_>>()?;
    let holds = out.iter().filter(|o| o.0).count();
    let clipped = out.iter().filter(|o| o.1).count();
    Ok(SandwichReport { t, b, reps, holds, clipped, fraction: holds as f64 / reps as f64 })
}
