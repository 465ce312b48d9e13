use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{ALPHA, G};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LevelKind {
    Thick,
    Thin,
    Light,
    Avoided,
}

impl std::str::FromStr for LevelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "thick" => Ok(Self::Thick),
            "thin" => Ok(Self::Thin),
            "light" => Ok(Self::Light),
            "avoided" => Ok(Self::Avoided),
            _ => Err(Error::Parameter(format!("unknown level kind `{s}`"))),
        }
    }
}

impl std::fmt::Display for LevelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Thick => "thick",
            Self::Thin => "thin",
            Self::Light => "light",
            Self::Avoided => "avoided",
        })
    }
}

/// Normalizing sequences for one `(N, θ, λ, kind)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleSequences {
    pub n: u32,
    pub theta: f64,
    pub lambda: f64,
    pub kind: LevelKind,
    pub g: f64,
    pub alpha: f64,
    /// `2gθ (log N)²`.
    pub t_n: f64,
    /// `2g(√θ ± λ)² (log N)²`, `+` for thick, `−` for thin; `t_N` otherwise.
    pub a_n: f64,
    /// `(N²/√log N) exp(−(√(2t_N) − √(2a_N))²/(2g log N))`.
    pub w_n: f64,
    /// `N² exp(−t_N/(g log N))`.
    pub w_hat_n: f64,
    /// `(N²/√log N) exp(−â_N²/(2g log N))`, `â_N = 2λ√g log N`.
    pub k_n: f64,
}

/// Validated construction.
pub fn scale_sequences(n: u32, theta: f64, lambda: f64, kind: LevelKind) -> Result<ScaleSequences> {
    if n < 2 {
        return Err(Error::Parameter("N must be at least 2 (log N > 0)".into()));
    }
    let open01 = |v: f64| v > 0.0 && v < 1.0;
    match kind {
        LevelKind::Thick => {
            if !(theta > 0.0) {
                return Err(Error::Parameter(format!("thick: theta = {theta} must be positive")));
            }
            if !open01(lambda) {
                return Err(Error::Parameter(format!("thick: lambda = {lambda} violates 0 < lambda < 1")));
            }
        }
        LevelKind::Thin => {
            if !(theta > 0.0) {
                return Err(Error::Parameter(format!("thin: theta = {theta} must be positive")));
            }
            let cap = theta.sqrt().min(1.0);
            if !(lambda > 0.0 && lambda < cap) {
                return Err(Error::Parameter(format!(
                    "thin: lambda = {lambda} violates 0 < lambda < min(sqrt(theta), 1) = {cap}"
                )));
            }
        }
        LevelKind::Light | LevelKind::Avoided => {
            if !open01(theta) {
                return Err(Error::Parameter(format!("{kind}: theta = {theta} violates 0 < theta < 1")));
            }
        }
    }
    Ok(ScaleSequences::unchecked(n, theta, lambda, kind))
}

impl ScaleSequences {
    /// Formula evaluation without range checks (degenerate `λ = 0` allowed).
    pub fn unchecked(n: u32, theta: f64, lambda: f64, kind: LevelKind) -> Self {
        let log_n = (n as f64).ln();
        let n2 = (n as f64).powi(2);
        let t_n = 2.0 * G * theta * log_n * log_n;
        let root = match kind {
            LevelKind::Thick => theta.sqrt() + lambda,
            LevelKind::Thin => theta.sqrt() - lambda,
            _ => theta.sqrt(),
        };
        let a_n = 2.0 * G * root * root * log_n * log_n;
        let gap = (2.0 * t_n).sqrt() - (2.0 * a_n).sqrt();
        let w_n = n2 / log_n.sqrt() * (-gap * gap / (2.0 * G * log_n)).exp();
        let w_hat_n = n2 * (-t_n / (G * log_n)).exp();
        let a_hat = 2.0 * lambda * G.sqrt() * log_n;
        let k_n = n2 / log_n.sqrt() * (-a_hat * a_hat / (2.0 * G * log_n)).exp();
        Self { n, theta, lambda, kind, g: G, alpha: ALPHA, t_n, a_n, w_n, w_hat_n, k_n }
    }

    /// Normalization `W` such that each atom weighs `1/W`.
    pub fn normalizer(&self) -> f64 {
        match self.kind {
            LevelKind::Thick | LevelKind::Thin => self.w_n,
            LevelKind::Light | LevelKind::Avoided => self.w_hat_n,
        }
    }

    /// Discrete horizon `⌊t_N · deg(D_N)⌋`.
    pub fn steps(&self, deg_total: u64) -> u64 {
        (self.t_n * deg_total as f64).floor() as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_and_exact_cases() {
        let s = ScaleSequences::unchecked(100, 0.7, 0.0, LevelKind::Thick);
        assert!((s.w_n / (1e4 / 100f64.ln().sqrt()) - 1.0).abs() < 1e-12);
        let s = scale_sequences(77, 0.5, 0.1, LevelKind::Avoided).unwrap();
        assert!((s.w_hat_n - 77.0).abs() < 1e-10);
    }

    #[test]
    fn ranges_name_the_constraint() {
        let e = scale_sequences(64, 1.0, 1.2, LevelKind::Thick).unwrap_err().to_string();
        assert!(e.contains("0 < lambda < 1"), "{e}");
        let e = scale_sequences(64, 0.25, 0.6, LevelKind::Thin).unwrap_err().to_string();
        assert!(e.contains("min(sqrt(theta), 1)"), "{e}");
        assert!(scale_sequences(64, 1.0, 0.1, LevelKind::Light).is_err());
        assert!(scale_sequences(1, 0.5, 0.1, LevelKind::Light).is_err());
    }
}
