//! Named verification checks with measured values, targets and verdicts.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::continuum::{d_function_green, d_function_poisson, d_route_difference, sigma_d2};
use crate::error::{Error, Result};
use crate::fields::{sample_dgff, verify_pinned_relation, ZeroAverage};
use crate::green::{compute_green, kac_moments};
use crate::lattice::{build_lattice, DomainSpec, LatticeDomain};
use crate::levels::{
    gamma_tail_inequality_check, mu_tilde_laplace, mu_tilde_laplace_exact, q_sequence, q_sequence_bessel,
    resample_exponential_profile, resampled_laplace_exact, scale_sequences, GammaLemma, LevelKind,
};
use crate::linalg::{BandedCholesky, ConjugateGradient, GreenSolve};
use crate::potential::PotentialKernel;
use crate::stats;
use crate::walk::{
    boundary_fluctuations, hitting_time_rho, ray_knight_verify, run_walk, sandwich_at, Horizon, Start,
    WalkConfig,
};
use crate::G;

/// How a measured value is judged.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum Bound {
    /// `|value − target| ≤ tol`.
    Near { target: f64, tol: f64 },
    /// `value ≤ limit`.
    AtMost { limit: f64 },
    /// `value ≥ limit`.
    AtLeast { limit: f64 },
    /// `lo ≤ value ≤ hi`.
    Between { lo: f64, hi: f64 },
}

impl Bound {
    pub fn admits(&self, v: f64) -> bool {
        match *self {
            Bound::Near { target, tol } => (v - target).abs() <= tol,
            Bound::AtMost { limit } => v <= limit,
            Bound::AtLeast { limit } => v >= limit,
            Bound::Between { lo, hi } => lo <= v && v <= hi,
        }
    }

    /// Replace the numeric tolerance.
    fn with(self, x: f64) -> Self {
        match self {
            Bound::Near { target, .. } => Bound::Near { target, tol: x },
            Bound::AtMost { .. } => Bound::AtMost { limit: x },
            Bound::AtLeast { .. } => Bound::AtLeast { limit: x },
            Bound::Between { lo, hi } => {
                let mid = 0.5 * (lo + hi);
                Bound::Between { lo: mid - x, hi: mid + x }
            }
        }
    }
}

impl std::fmt::Display for Bound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            Bound::Near { target, tol } => write!(f, "{target:.10} ± {tol:e}"),
            Bound::AtMost { limit } => write!(f, "≤ {limit:e}"),
            Bound::AtLeast { limit } => write!(f, "≥ {limit}"),
            Bound::Between { lo, hi } => write!(f, "in [{lo:.6}, {hi:.6}]"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Measurement {
    pub label: String,
    pub value: f64,
    pub bound: Bound,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub name: &'static str,
    pub criterion: u8,
    pub measurements: Vec<Measurement>,
    pub seconds: f64,
}

impl CheckReport {
    pub fn pass(&self) -> bool {
        self.measurements.iter().all(|m| m.pass)
    }

    pub fn get(&self, label: &str) -> Option<&Measurement> {
        self.measurements.iter().find(|m| m.label == label)
    }
}

impl std::fmt::Display for CheckReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "[{}] {:>2} {} ({:.1} s)",
            if self.pass() { "PASS" } else { "FAIL" },
            self.criterion,
            self.name,
            self.seconds
        )?;
        for m in &self.measurements {
            writeln!(
                f,
                "       {} {:<28} {:<22} target {}",
                if m.pass { "ok  " } else { "FAIL" },
                m.label,
                format!("{:.10e}", m.value),
                m.bound
            )?;
        }
        Ok(())
    }
}

/// Tolerance overrides keyed `check.label` (or `label` alone).
pub type Overrides = HashMap<String, f64>;

struct Recorder<'a> {
    name: &'static str,
    overrides: &'a Overrides,
    out: Vec<Measurement>,
}

impl Recorder<'_> {
    fn put(&mut self, label: impl Into<String>, value: f64, bound: Bound) {
        let label = label.into();
        let key = format!("{}.{}", self.name, label);
        let bound = match self.overrides.get(&key).or_else(|| self.overrides.get(&label)) {
            Some(&x) => bound.with(x),
            None => bound,
        };
        self.out.push(Measurement { pass: bound.admits(value), label, value, bound });
    }
}

type CheckFn = fn(&mut Recorder) -> Result<()>;

pub const CHECKS: [(&str, u8, &str); 15] = [
    ("green-exactness", 1, "Green residual and symmetry on the 64x64 square"),
    ("green-log-growth", 2, "diagonal Green increments versus g log 2"),
    ("potential-kernel", 3, "potential kernel values and harmonicity"),
    ("zero-average", 4, "zero-average decomposition identities"),
    ("ray-knight", 5, "Ray-Knight coupling in law"),
    ("time-identity", 6, "pathwise boundary-time identity"),
    ("variance-formula", 7, "Kac variance and hitting-time moment"),
    ("sandwich", 8, "time-conversion sandwich"),
    ("q-sequence", 9, "q_n closed form, generating function, Bessel route"),
    ("mu-tilde", 10, "Laplace transform of mu-tilde"),
    ("covariance-algebra", 11, "pinned and modified covariance windows"),
    ("gamma-tail", 12, "gamma tail ratio inequalities"),
    ("d-function", 13, "d-function by Green and Poisson routes"),
    ("trends", 14, "extreme local times and avoided mass"),
    ("resampling", 15, "exponential resampling Laplace functional"),
];

fn dispatch(name: &str) -> Option<CheckFn> {
    Some(match name {
        "green-exactness" => green_exactness,
        "green-log-growth" => green_log_growth,
        "potential-kernel" => potential_kernel,
        "zero-average" => zero_average,
        "ray-knight" => ray_knight,
        "time-identity" => time_identity,
        "variance-formula" => variance_formula,
        "sandwich" => sandwich,
        "q-sequence" => q_seq,
        "mu-tilde" => mu_tilde,
        "covariance-algebra" => covariance_algebra,
        "gamma-tail" => gamma_tail,
        "d-function" => d_function,
        "trends" => trends,
        "resampling" => resampling,
        _ => return None,
    })
}

pub fn run_check(name: &str, overrides: &Overrides) -> Result<CheckReport> {
    let (name, criterion, _) = CHECKS
        .iter()
        .find(|c| c.0 == name)
        .copied()
        .ok_or_else(|| Error::UnknownCheck(name.to_string()))?;
    let f = dispatch(name).unwrap();
    let start = Instant::now();
    let mut rec = Recorder { name, overrides, out: Vec::new() };
    f(&mut rec)?;
    Ok(CheckReport { name, criterion, measurements: rec.out, seconds: start.elapsed().as_secs_f64() })
}

/// `all` or a single check name.
pub fn verify_suite(selector: &str, overrides: &Overrides) -> Result<Vec<CheckReport>> {
    if selector == "all" {
        CHECKS.iter().map(|c| run_check(c.0, overrides)).collect()
    } else {
        Ok(vec![run_check(selector, overrides)?])
    }
}

/// The `k × k` block `{2, …, k+1}²`, which is exactly the unit-square
/// lattice at scale `k + 3`.
pub fn square(k: u32) -> LatticeDomain {
    build_lattice(&DomainSpec::unit_square(), k + 3).expect("nonempty square")
}

const SEED: u64 = 20_240_601;

fn green_exactness(r: &mut Recorder) -> Result<()> {
    let d = square(64);
    let t0 = Instant::now();
    let g = compute_green(&d)?;
    let secs = t0.elapsed().as_secs_f64();
    r.put("residual", g.residual(&d), Bound::AtMost { limit: 1e-10 });
    r.put("symmetry", g.symmetry_defect(), Bound::AtMost { limit: 1e-10 });
    r.put("seconds", secs, Bound::AtMost { limit: 60.0 });
    Ok(())
}

fn green_log_growth(r: &mut Recorder) -> Result<()> {
    let ks = [16u32, 32, 64, 128];
    let diag: Vec<f64> = ks
        .iter()
        .map(|&k| {
            let d = square(k);
            let c = d.center_vertex();
            Ok(BandedCholesky::new(&d)?.column(c)?[c])
        })
        .collect::<Result<_>>()?;
    let step = G * 2f64.ln();
    for i in 1..ks.len() {
        let inc = diag[i] - diag[i - 1];
        r.put(format!("increment_{}_{}", ks[i - 1], ks[i]), inc / step, Bound::Near { target: 1.0, tol: 0.05 });
    }
    Ok(())
}

fn potential_kernel(r: &mut Recorder) -> Result<()> {
    let a = PotentialKernel::new(2048);
    r.put("a(0,0)", a.value([0, 0]), Bound::Near { target: 0.0, tol: 0.0 });
    r.put("a(1,0)", a.value([1, 0]), Bound::Near { target: 0.25, tol: 1e-6 });
    r.put("a(1,1)", a.value([1, 1]), Bound::Near { target: 1.0 / PI, tol: 1e-6 });
    let mut worst = 0.0f64;
    for i in -5i64..=5 {
        for j in -5i64..=5 {
            if (i, j) != (0, 0) {
                worst = worst.max(a.laplacian([i, j]).abs());
            }
        }
    }
    r.put("harmonic_residual", worst, Bound::AtMost { limit: 1e-6 });
    r.put("laplacian_at_origin", a.laplacian([0, 0]), Bound::Near { target: 1.0, tol: 1e-6 });
    Ok(())
}

fn zero_average(r: &mut Recorder) -> Result<()> {
    let d = square(32);
    let g = compute_green(&d)?;
    let za = ZeroAverage::new(&g)?;
    let samples = sample_dgff(&g, SEED, 20)?;
    let hat_sum = samples
        .iter()
        .map(|s| za.decompose(s).hat.values.iter().sum::<f64>().abs())
        .fold(0.0, f64::max);
    r.put("sum_hat", hat_sum, Bound::AtMost { limit: 1e-9 });
    r.put("sum_d_minus_n", (za.d_n.iter().sum::<f64>() - d.len() as f64).abs(), Bound::AtMost { limit: 1e-9 });
    let cov = (0..d.len()).map(|x| za.cov_y_hat(x).abs()).fold(0.0, f64::max);
    r.put("max_cov_y_hat", cov, Bound::AtMost { limit: 1e-12 });
    Ok(())
}

fn ray_knight(r: &mut Recorder) -> Result<()> {
    let t0 = Instant::now();
    let d = square(16);
    let g = compute_green(&d)?;
    let rep = ray_knight_verify(&d, &g, 4.0, 20_000, SEED, d.center_vertex())?;
    r.put("left_mean_error_se", rep.left_error_se.abs(), Bound::AtMost { limit: 3.0 });
    r.put("ks_pvalue", rep.ks_pvalue, Bound::AtLeast { limit: 0.01 });
    r.put("seconds", t0.elapsed().as_secs_f64(), Bound::AtMost { limit: 300.0 });
    Ok(())
}

fn time_identity(r: &mut Recorder) -> Result<()> {
    let d = square(32);
    let t = 2.0 * G * 32f64.ln().powi(2);
    let runs = boundary_fluctuations(&d, t, SEED, 1000)?;
    let worst = runs.iter().map(|x| x.1).fold(0.0, f64::max);
    r.put("max_residual", worst, Bound::AtMost { limit: 1e-9 });
    r.put("runs", runs.len() as f64, Bound::AtLeast { limit: 1000.0 });
    Ok(())
}

fn variance_formula(r: &mut Recorder) -> Result<()> {
    let d = square(16);
    let g = compute_green(&d)?;
    let x = d.center_vertex();
    let kac = kac_moments(&g, &d, x, 2.0);
    let u: Vec<f64> = boundary_fluctuations(&d, 2.0, SEED, 20_000)?.iter().map(|f| f.0.u).collect();
    let se = stats::variance_std_error(&u);
    r.put("var_u_error_se", (stats::variance(&u) - kac.var_u).abs() / se, Bound::AtMost { limit: 3.0 });
    let h2: Vec<f64> = (0..20_000u64)
        .into_par_iter()
        .map(|k| hitting_time_rho(&d, x, SEED ^ 0x5a5a, k).map(|h| h * h))
        .collect::<Result<_>>()?;
    let se = stats::std_error(&h2);
    r.put(
        "h_rho_second_moment_error_se",
        (stats::mean(&h2) - kac.second_moment_h_rho).abs() / se,
        Bound::AtMost { limit: 3.0 },
    );
    Ok(())
}

fn sandwich(r: &mut Recorder) -> Result<()> {
    let d = square(64);
    let log_n = 64f64.ln();
    let t = 2.0 * G * log_n * log_n;
    let rep = sandwich_at(&d, t, log_n, SEED, 1000)?;
    r.put("fraction", rep.fraction, Bound::AtLeast { limit: 0.90 });
    Ok(())
}

fn q_seq(r: &mut Recorder) -> Result<()> {
    let q = q_sequence(0.2, 200)?;
    r.put("q_0", q.q[0], Bound::Near { target: 1.0, tol: 0.0 });
    for theta in [0.2, 0.5] {
        let q1 = q_sequence(theta, 1)?.q[1];
        r.put(format!("q_1(theta={theta})"), q1, Bound::Near { target: PI * theta, tol: 1e-12 });
    }
    for s in [1.0, 2.0, 4.0] {
        r.put(
            format!("generating(s={s})"),
            q.generating_function(s),
            Bound::Near { target: q.generating_limit(s), tol: 1e-8 },
        );
    }
    let b = q_sequence_bessel(0.2, 50);
    let worst = (0..=50).map(|n| ((q.q[n] - b[n]) / q.q[n]).abs()).fold(0.0, f64::max);
    r.put("bessel_route_rel_diff", worst, Bound::AtMost { limit: 1e-10 });
    Ok(())
}

fn mu_tilde(r: &mut Recorder) -> Result<()> {
    for theta in [0.2, 0.5] {
        for s in [0.5, 1.0, 2.0] {
            r.put(
                format!("laplace(theta={theta},s={s})"),
                mu_tilde_laplace(theta, s),
                Bound::Near { target: mu_tilde_laplace_exact(theta, s), tol: 1e-6 },
            );
        }
    }
    Ok(())
}

fn covariance_algebra(r: &mut Recorder) -> Result<()> {
    let a = PotentialKernel::new(2048);
    let rep = verify_pinned_relation(5, &a)?;
    r.put("identity_error", rep.max_identity_error, Bound::AtMost { limit: 1e-9 });
    r.put("min_eigenvalue", rep.min_eigenvalue, Bound::AtLeast { limit: -1e-8 });
    Ok(())
}

fn gamma_tail(r: &mut Recorder) -> Result<()> {
    let grid = [0.5, 1.0, 2.0, 5.0];
    let (mut cases, mut fails, mut slack) = (0usize, 0usize, f64::NEG_INFINITY);
    for k in [5u32, 10, 20, 50] {
        for &s in &grid {
            for &t in &grid {
                for which in [GammaLemma::Upper, GammaLemma::Lower] {
                    let ok = match which {
                        GammaLemma::Upper => s >= t,
                        GammaLemma::Lower => s + t < k as f64,
                    };
                    if !ok {
                        continue;
                    }
                    let rep = gamma_tail_inequality_check(k, s, t, which)?;
                    cases += 1;
                    fails += (!rep.holds) as usize;
                    slack = slack.max(rep.lhs_ratio - rep.rhs_bound);
                }
            }
        }
    }
    r.put("cases", cases as f64, Bound::AtLeast { limit: 1.0 });
    r.put("violations", fails as f64, Bound::AtMost { limit: 0.0 });
    r.put("max_lhs_minus_rhs", slack, Bound::AtMost { limit: 1e-12 });
    Ok(())
}

/// `σ²` source for the Poisson route: `Var Y_N` on the unit square at this
/// scale, by conjugate gradients.
pub const SIGMA_SCALE: u32 = 512;

fn d_function(r: &mut Recorder) -> Result<()> {
    let spec = DomainSpec::unit_square();
    let d = build_lattice(&spec, 128)?;
    let green = d_function_green(&d, &BandedCholesky::new(&d)?)?;
    let big = build_lattice(&spec, SIGMA_SCALE)?;
    let sigma2 = sigma_d2(&ConjugateGradient::new(&big))?;
    let poisson = d_function_poisson(&spec, 128, sigma2)?;
    r.put("poisson_integral", poisson.integral(), Bound::Near { target: spec.area(), tol: 0.01 * spec.area() });
    r.put("green_integral", green.integral(), Bound::Near { target: spec.area(), tol: 0.01 * spec.area() });
    r.put("min_value", green.min().min(poisson.min()), Bound::AtLeast { limit: -1e-9 });
    r.put("sup_route_difference", d_route_difference(&green, &poisson), Bound::AtMost { limit: 0.05 });
    Ok(())
}

fn trends(r: &mut Recorder) -> Result<()> {
    let spec = DomainSpec::unit_square();
    let n = 256u32;
    let d = build_lattice(&spec, n)?;
    let log2 = (n as f64).ln().powi(2);
    let s = scale_sequences(n, 0.5, 0.1, LevelKind::Thick)?;
    let t1 = 2.0 * G * log2;
    let steps = (t1 * d.deg_total() as f64).floor() as u64;
    let _ = s;
    let ext: Vec<(f64, f64)> = (0..50u64)
        .into_par_iter()
        .map(|k| {
            let f = run_walk(&d, &WalkConfig::new(Start::Boundary, Horizon::Steps(steps), SEED).replicate(k))?;
            let l = f.interior();
            Ok((
                l.iter().copied().fold(0.0, f64::max) / log2,
                l.iter().copied().fold(f64::INFINITY, f64::min) / log2,
            ))
        })
        .collect::<Result<_>>()?;
    let max_med = stats::median(&ext.iter().map(|e| e.0).collect::<Vec<_>>());
    let min_med = stats::median(&ext.iter().map(|e| e.1).collect::<Vec<_>>());
    r.put("median_max_l", max_med, Bound::Between { lo: 0.7 * 8.0 * G, hi: 1.3 * 8.0 * G });
    r.put("median_min_l", min_med, Bound::AtMost { limit: 0.1 * 2.0 * G });
    let mut meds = Vec::new();
    for n in [64u32, 128, 256] {
        let d = build_lattice(&spec, n)?;
        let sc = scale_sequences(n, 0.3, 0.0, LevelKind::Avoided)?;
        let steps = sc.steps(d.deg_total());
        let m: Vec<f64> = (0..200u64)
            .into_par_iter()
            .map(|k| {
                let f = run_walk(&d, &WalkConfig::new(Start::Boundary, Horizon::Steps(steps), SEED).replicate(k))?;
                Ok(f.interior().iter().filter(|&&x| x == 0.0).count() as f64 / sc.w_hat_n)
            })
            .collect::<Result<_>>()?;
        let med = stats::median(&m);
        r.put(format!("avoided_median_N{n}"), med, Bound::AtLeast { limit: 0.0 });
        meds.push(med);
    }
    let hi = meds.iter().copied().fold(0.0, f64::max);
    let lo = meds.iter().copied().fold(f64::INFINITY, f64::min);
    r.put("avoided_median_spread", hi / lo, Bound::AtMost { limit: 2.0 });
    Ok(())
}

fn resampling(r: &mut Recorder) -> Result<()> {
    let profile = [0.25, 1.0, 2.5];
    let t = [0.5, 1.0, 2.0];
    let vals: Vec<f64> = (0..20_000u64)
        .into_par_iter()
        .map(|k| {
            let out = resample_exponential_profile(&profile, SEED, k)?;
            Ok((-out.iter().zip(&t).map(|(o, t)| o * t).sum::<f64>()).exp())
        })
        .collect::<Result<_>>()?;
    let exact = resampled_laplace_exact(&profile, &t);
    r.put("laplace_error_se", (stats::mean(&vals) - exact).abs() / stats::std_error(&vals), Bound::AtMost { limit: 3.0 });
    Ok(())
}
