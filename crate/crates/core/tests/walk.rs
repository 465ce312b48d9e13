use rayon::prelude::*;
use walklab::green::compute_green;
use walklab::lattice::{build_lattice, DomainSpec, LatticeDomain};
use walklab::stats;
use walklab::walk::{
    boundary_fluctuations, coupled_t_and_y, cover_time, fluctuations, ray_knight_verify, run_walk, sandwich_at,
    sandwich_check, t_circ, t_star, time_identity_check, FluctuationRecord, Horizon, LocalTimeField, Mode, Start,
    WalkConfig, Walker,
};
use walklab::G;

fn square(k: u32) -> LatticeDomain {
    build_lattice(&DomainSpec::unit_square(), k + 3).unwrap()
}

fn single() -> LatticeDomain {
    build_lattice(&DomainSpec::unit_square(), 4).unwrap()
}

#[test]
fn zero_steps_is_one_visit() {
    let d = square(5);
    let f = run_walk(&d, &WalkConfig::new(Start::Vertex(3), Horizon::Steps(0), 1)).unwrap();
    for (v, &l) in f.values.iter().enumerate() {
        assert_eq!(l, if v == 3 { 0.25 } else { 0.0 });
    }
}

#[test]
fn discrete_values_are_quarter_integers_and_conserved() {
    let d = build_lattice(&DomainSpec::disk(0.5), 20).unwrap();
    for n in [1u64, 17, 1000, 123_457] {
        let f = run_walk(&d, &WalkConfig::new(Start::Boundary, Horizon::Steps(n), n)).unwrap();
        let total: f64 = f.values.iter().enumerate().map(|(v, l)| l * d.degree(v as u32) as f64).sum();
        assert_eq!(total, (n + 1) as f64);
        assert!(f.interior().iter().all(|&l| l >= 0.0 && (4.0 * l).fract() == 0.0));
        assert_eq!(f.steps, n);
    }
}

#[test]
fn boundary_value_is_exact_on_every_path() {
    let d = square(6);
    for k in 0..200 {
        for t in [0.0, 0.3, 1.0, 7.5] {
            let f = run_walk(&d, &WalkConfig::new(Start::Boundary, Horizon::Boundary(t), 3).replicate(k)).unwrap();
            assert_eq!(f.rho_value(), t);
            assert_eq!(f.mode, Mode::BoundaryTime);
        }
    }
}

#[test]
fn boundary_mean_local_time_is_t() {
    let d = square(6);
    let t = 1.5;
    let runs: Vec<LocalTimeField> = (0..20_000u64)
        .into_par_iter()
        .map(|k| run_walk(&d, &WalkConfig::new(Start::Boundary, Horizon::Boundary(t), 11).replicate(k)).unwrap())
        .collect();
    for v in [0, d.center_vertex(), d.len() - 1] {
        let x: Vec<f64> = runs.iter().map(|f| f.values[v]).collect();
        let z = (stats::mean(&x) - t).abs() / stats::std_error(&x);
        assert!(z < 3.5, "v = {v}, z = {z}");
    }
}

#[test]
fn continuous_and_discrete_share_the_jump_chain() {
    let d = square(10);
    let mut c = Walker::new(&d, Start::Boundary, 5, 2).unwrap();
    c.advance_time(300.0);
    let steps = c.steps();
    let mut w = Walker::new(&d, Start::Boundary, 5, 2).unwrap();
    w.advance_steps(steps);
    assert_eq!(w.visits(), c.visits());
    assert_eq!(w.position(), c.position());
}

#[test]
fn fluctuation_formulas() {
    let d = single();
    let field = LocalTimeField {
        values: vec![3.2, 2.0],
        mode: Mode::BoundaryTime,
        horizon: Horizon::Boundary(2.0),
        final_position: 1,
        steps: 0,
        elapsed: 0.0,
    };
    let r = fluctuations(&field, &d, 2.0);
    assert!((r.u - 1.2).abs() < 1e-15 && (r.t_norm - 0.6).abs() < 1e-15);
    assert!((r.t_norm * 2.0f64.sqrt() * 2.0f64.sqrt() - r.u).abs() < 1e-15);
    assert_eq!(t_circ(2.0, 0.0, &d), 2.0);
    let zero = LocalTimeField { values: vec![0.5, 0.0], horizon: Horizon::Boundary(0.0), ..field };
    let r0 = fluctuations(&zero, &d, 0.0);
    assert!(r0.degenerate && r0.t_norm == 0.0);
}

#[test]
fn hand_traced_excursion_on_one_vertex() {
    // hold 2.0 at ϱ, 1.2 at x, then 2.0 at ϱ: ϱ local time (2+2)/4 = 1
    let d = single();
    let rec = FluctuationRecord { u: 1.2 / 4.0 - 1.0, t_norm: 0.0, t_circ: 0.0, tau_rho: 5.2, degenerate: false };
    assert!(time_identity_check(1.0, &rec, &d) < 1e-15);
    let still = FluctuationRecord { u: 0.0, t_norm: 0.0, t_circ: 0.0, tau_rho: 0.0, degenerate: false };
    assert_eq!(time_identity_check(0.0, &still, &d), 0.0);
}

#[test]
fn pathwise_time_identity() {
    let d = square(8);
    for (rec, res) in boundary_fluctuations(&d, 4.0, 21, 500).unwrap() {
        assert!(res <= 1e-9);
        let alt = (rec.tau_rho - d.deg_total() as f64 * 4.0) / (4.0 * d.len() as f64);
        assert!((rec.u - alt).abs() <= 1e-9);
    }
}

#[test]
fn sandwich_monotone_and_degenerate_window() {
    let d = square(12);
    let mut w = Walker::new(&d, Start::Boundary, 8, 0).unwrap();
    w.advance_boundary(1.0);
    let a = w.continuous_field(Horizon::Boundary(1.0));
    w.advance_boundary(2.5);
    let b = w.continuous_field(Horizon::Boundary(2.5));
    assert!(a.dominated_by(&b));
    let r = sandwich_at(&d, 2.0, 1e3, 3, 50).unwrap();
    assert_eq!(r.fraction, 1.0);
    assert_eq!(r.clipped, 50);
    let s = sandwich_check(&d, 0.5, (15f64).ln(), 3, 40).unwrap();
    assert!((s.t - 2.0 * G * 0.5 * 15f64.ln().powi(2)).abs() < 1e-12);
}

#[test]
fn t_star_is_the_boundary_clock_inverse() {
    let d = square(6);
    let t = 0.8;
    let ts = t_star(&d, t, 4, 0).unwrap();
    let mut w = Walker::new(&d, Start::Boundary, 4, 0).unwrap();
    w.advance_boundary(ts);
    let s = d.deg_total() as f64 * t;
    assert!(w.elapsed() <= s + 1e-9);
    let mut v = Walker::new(&d, Start::Boundary, 4, 0).unwrap();
    v.advance_time(s);
    assert!((v.times()[d.rho() as usize] - ts * d.deg_rho() as f64).abs() < 1e-9);
    assert!(v.elapsed() >= w.elapsed());
}

#[test]
fn cover_time_small_cases() {
    let d = single();
    assert_eq!(cover_time(&d, Start::Vertex(0), 1, 0).unwrap(), 0);

    // two adjacent vertices a, b: from a, hit b directly (1/4) or via ϱ (3/4),
    // and ϱ goes to a or b with probability 1/2 each
    let two = LatticeDomain::from_points(8, vec![[3, 3], [4, 3]]).unwrap();
    let (pa_b, pa_r, pr_a) = (0.25f64, 0.75f64, 0.5f64);
    // h_a = 1 + pa_r h_r, h_r = 1 + pr_a h_a
    let h_a = (1.0 + pa_r) / (1.0 - pa_r * pr_a);
    assert!((h_a - 2.8).abs() < 1e-12 && pa_b + pa_r == 1.0);
    let x: Vec<f64> = (0..40_000u64).map(|k| cover_time(&two, Start::Vertex(0), 6, k).unwrap() as f64).collect();
    let z = (stats::mean(&x) - h_a).abs() / stats::std_error(&x);
    assert!(z < 3.0, "z = {z}");
}

#[test]
fn cover_time_scaling() {
    for n in [32u32, 64, 128] {
        let d = build_lattice(&DomainSpec::unit_square(), n).unwrap();
        let ln = (n as f64).ln();
        let scale = 4.0 / std::f64::consts::PI * (n as f64).powi(2) * ln * ln;
        let r: Vec<f64> = (0..21u64)
            .into_par_iter()
            .map(|k| cover_time(&d, Start::Boundary, 13, k).unwrap() as f64 / scale)
            .collect();
        let m = stats::median(&r);
        assert!((0.5..=1.5).contains(&m), "N = {n}: median ratio {m}");
    }
}

#[test]
fn ray_knight_small_t_limit() {
    let d = square(8);
    let g = compute_green(&d).unwrap();
    let r = ray_knight_verify(&d, &g, 1e-8, 20_000, 17, d.center_vertex()).unwrap();
    assert!(r.ks_pvalue > 0.01, "{r:?}");
    assert!(r.left_error_se.abs() < 3.5 && r.right_error_se.abs() < 3.5);
    assert!(ray_knight_verify(&d, &g, 0.0, 10, 1, 0).is_err());
}

#[test]
fn average_fluctuation_tracks_field_average() {
    let d = build_lattice(&DomainSpec::unit_square(), 64).unwrap();
    let t = 2.0 * G * 0.5 * 64f64.ln().powi(2);
    let pairs = coupled_t_and_y(&d, t, 31, 400).unwrap();
    let tn: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let diff: Vec<f64> = pairs.iter().map(|p| p.0 - p.1).collect();
    assert!(stats::variance(&diff).sqrt() < stats::variance(&tn).sqrt());
}

#[test]
fn configs_validate() {
    let d = square(4);
    assert!(WalkConfig::new(Start::Vertex(999), Horizon::Steps(1), 0).validate(&d).is_err());
    assert!(WalkConfig::new(Start::Boundary, Horizon::Time(-1.0), 0).validate(&d).is_err());
    assert_eq!(Horizon::paper_time(2.0, &d), Horizon::Steps(2 * d.deg_total()));
}
