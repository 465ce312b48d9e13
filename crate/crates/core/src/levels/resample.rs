use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::rng::{stream, Purpose};

/// `¼ Σ_{j ≤ 4ℓ(z)} τ_{z,j}` per entry, i.i.d. unit exponentials.
pub fn resample_exponential_profile(profile: &[f64], seed: u64, replicate: u64) -> Result<Vec<f64>> {
    let counts = quarter_counts(profile)?;
    let mut rng = stream(seed, replicate, Purpose::Resample);
    Ok(counts
        .iter()
        .map(|&k| 0.25 * (0..k).map(|_| rng.sample::<f64, _>(Exp1)).sum::<f64>())
        .collect())
}

/// `4ℓ(z)` as integers; errors off the quarter lattice.
pub fn quarter_counts(profile: &[f64]) -> Result<Vec<u64>> {
    profile
        .iter()
        .map(|&l| {
            let k = 4.0 * l;
            if l >= 0.0 && (k - k.round()).abs() <= 1e-9 {
                Ok(k.round() as u64)
            } else {
                Err(Error::Parameter(format!("{l} is not in (1/4)N_0")))
            }
        })
        .collect()
}

/// `E exp(−Σ t(z) out(z)) = exp(−Σ 4ℓ(z) log(1 + t(z)/4))`.
pub fn resampled_laplace_exact(profile: &[f64], t: &[f64]) -> f64 {
    (-profile.iter().zip(t).map(|(l, t)| 4.0 * l * (t / 4.0).ln_1p()).sum::<f64>()).exp()
}
