use serde::Serialize;

use crate::error::{Error, Result};
use crate::ALPHA;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QSequence {
    pub theta: f64,
    pub q: Vec<f64>,
}

/// `q_0 = 1`, `q_{n+1} = Σ_j C(n,j) c^{j+1}/(j+1)!` with `c = α²θ/8`.
pub fn q_sequence(theta: f64, nmax: usize) -> Result<QSequence> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Parameter(format!("theta = {theta} violates 0 < theta < 1")));
    }
    let c = ALPHA * ALPHA * theta / 8.0;
    let mut q = vec![1.0];
    for n in 0..nmax {
        // term_j = C(n,j) c^{j+1}/(j+1)!
        let mut term = c;
        let mut sum = term;
        for j in 0..n {
            term *= (n - j) as f64 / (j + 1) as f64 * c / (j + 2) as f64;
            sum += term;
        }
        if !sum.is_finite() {
            return Err(Error::Parameter(format!("q_{} overflows at nmax = {nmax}", n + 1)));
        }
        q.push(sum);
    }
    Ok(QSequence { theta, q })
}

impl QSequence {
    /// `Σ_{n ≤ nmax} q_n (1 + s/4)^{−n}`.
    pub fn generating_function(&self, s: f64) -> f64 {
        let r = 1.0 / (1.0 + s / 4.0);
        let mut w = 1.0;
        let mut total = 0.0;
        for q in &self.q {
            total += q * w;
            w *= r;
        }
        total
    }

    /// Closed form `exp(α²θ/(2s))` of the full series.
    pub fn generating_limit(&self, s: f64) -> f64 {
        (ALPHA * ALPHA * self.theta / (2.0 * s)).exp()
    }
}

/// Second route to `q_n`: expand `e^t` and `t^{-1/2} I₁(x√t)` (with
/// `x²/4 = α²θ/8`) as power series in `t`, multiply them, and read off
/// `q_{m+1} = m! · [t^m]`.
pub fn q_sequence_bessel(theta: f64, nmax: usize) -> Vec<f64> {
    let c = ALPHA * ALPHA * theta / 8.0;
    let len = nmax.max(1);
    let mut exp_coef = vec![1.0; len];
    let mut bessel_coef = vec![c; len];
    for i in 1..len {
        exp_coef[i] = exp_coef[i - 1] / i as f64;
        bessel_coef[i] = bessel_coef[i - 1] * c / (i as f64 * (i + 1) as f64);
    }
    let mut q = vec![1.0];
    let mut fact = 1.0;
    for m in 0..nmax {
        if m > 0 {
            fact *= m as f64;
        }
        let cm: f64 = (0..=m).map(|j| bessel_coef[j] * exp_coef[m - j]).sum();
        q.push(fact * cm);
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_terms() {
        let q = q_sequence(0.5, 3).unwrap();
        assert_eq!(q.q[0], 1.0);
        let c = std::f64::consts::PI * 0.5;
        assert!((q.q[1] - c).abs() < 1e-15);
        // q_2 = c + c²/2
        assert!((q.q[2] - (c + c * c / 2.0)).abs() < 1e-14);
        assert!(q_sequence(1.0, 3).is_err());
    }
}
