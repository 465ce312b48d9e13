use serde::Serialize;
use statrs::function::gamma::{gamma_lr, gamma_ur};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GammaLemma {
    /// Upper tail, `s ≥ t ≥ 0`.
    Upper,
    /// Lower tail, `s + t < k`.
    Lower,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GammaTailReport {
    pub lhs_ratio: f64,
    pub rhs_bound: f64,
    pub holds: bool,
}

/// With `S_k` a sum of `k` unit exponentials:
/// upper: `P(S_k − k ≥ s+t)/P(S_k − k ≥ s) ≤ e^{−st/(k+s+t)}`;
/// lower: `P(S_k − k ≤ −(s+t))/P(S_k − k ≤ −s) ≤ e^{−t(s−1)/(k−s)}`.
pub fn gamma_tail_inequality_check(k: u32, s: f64, t: f64, which: GammaLemma) -> Result<GammaTailReport> {
    if k == 0 {
        return Err(Error::Parameter("k must be at least 1".into()));
    }
    let kf = k as f64;
    let (lhs, rhs) = match which {
        GammaLemma::Upper => {
            if !(s >= t && t >= 0.0) {
                return Err(Error::Parameter(format!("upper tail needs s >= t >= 0, got s={s}, t={t}")));
            }
            (gamma_ur(kf, kf + s + t) / gamma_ur(kf, kf + s), (-s * t / (kf + s + t)).exp())
        }
        GammaLemma::Lower => {
            if !(s >= 0.0 && t >= 0.0 && s + t < kf) {
                return Err(Error::Parameter(format!("lower tail needs s,t >= 0 and s+t < k, got s={s}, t={t}, k={k}")));
            }
            (gamma_lr(kf, kf - s - t) / gamma_lr(kf, kf - s), (-t * (s - 1.0) / (kf - s)).exp())
        }
    };
    Ok(GammaTailReport { lhs_ratio: lhs, rhs_bound: rhs, holds: lhs <= rhs + 1e-12 })
}
