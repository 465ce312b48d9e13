use crate::quad::integrate_half_line;
use crate::ALPHA;

/// Mass of the atom at 0.
pub const MU_TILDE_ATOM: f64 = 1.0;

/// Density of the absolutely continuous part,
/// `Σ_n (α²θ/2)^{n+1} hⁿ / (n!(n+1)!)` for `h > 0`.
pub fn mu_tilde_density(theta: f64, h: f64) -> f64 {
    let c = ALPHA * ALPHA * theta / 2.0;
    let x = c * h.max(0.0);
    let mut term = c;
    let mut sum = term;
    let mut n = 0.0;
    loop {
        n += 1.0;
        term *= x / (n * (n + 1.0));
        sum += term;
        if term <= 1e-17 * sum {
            return sum;
        }
    }
}

/// `∫ e^{−sh} μ̃(dh) = 1 + ∫_0^∞ density · e^{−sh} dh`, by adaptive
/// quadrature.
pub fn mu_tilde_laplace(theta: f64, s: f64) -> f64 {
    assert!(s > 0.0, "s must be positive");
    1.0 + integrate_half_line(|h| mu_tilde_density(theta, h) * (-s * h).exp(), 1e-13)
}

/// Closed form `exp(α²θ/(2s))`.
pub fn mu_tilde_laplace_exact(theta: f64, s: f64) -> f64 {
    (ALPHA * ALPHA * theta / (2.0 * s)).exp()
}

#[derive(Clone, Copy, Debug)]
pub enum MuTildeQuery {
    Density(f64),
    Laplace(f64),
}

pub fn mu_tilde(theta: f64, query: MuTildeQuery) -> f64 {
    match query {
        MuTildeQuery::Density(h) => mu_tilde_density(theta, h),
        MuTildeQuery::Laplace(s) => mu_tilde_laplace(theta, s),
    }
}
