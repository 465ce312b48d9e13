use walklab::continuum::*;
use walklab::green::compute_green;
use walklab::io::grid_table;
use walklab::lattice::{build_lattice, DomainSpec};
use walklab::linalg::BandedCholesky;
use walklab::{fields::sample_dgff, stats, Error};

fn sigma_at(n: u32) -> f64 {
    let d = build_lattice(&DomainSpec::unit_square(), n).unwrap();
    sigma_d2(&BandedCholesky::new(&d).unwrap()).unwrap()
}

#[test]
fn single_vertex_sigma() {
    let d = build_lattice(&DomainSpec::unit_square(), 4).unwrap();
    assert_eq!(sigma_d2(&compute_green(&d).unwrap()).unwrap(), 0.25);
}

#[test]
fn sigma_is_the_variance_of_the_average() {
    let d = build_lattice(&DomainSpec::unit_square(), 12).unwrap();
    let g = compute_green(&d).unwrap();
    let y: Vec<f64> = sample_dgff(&g, 6, 10_000).unwrap().iter().map(|s| s.y).collect();
    let s2 = sigma_d2(&g).unwrap();
    assert!((sigma_d2(&BandedCholesky::new(&d).unwrap()).unwrap() - s2).abs() < 1e-12);
    let z = (stats::variance(&y) - s2).abs() / stats::variance_std_error(&y);
    assert!(z < 3.0, "z = {z}");
}

#[test]
fn sigma_converges() {
    let (a, b, c) = (sigma_at(32), sigma_at(64), sigma_at(128));
    assert!(a > b && b > c);
    assert!((b - c) / c < 0.05);
    let ratio = (b - a) / (c - b);
    assert!((1.5..3.0).contains(&ratio), "gap ratio {ratio}");
}

#[test]
fn green_route_d_function() {
    let d = build_lattice(&DomainSpec::unit_square(), 48).unwrap();
    let chol = BandedCholesky::new(&d).unwrap();
    let g = d_function_green(&d, &chol).unwrap();
    assert!((g.values.iter().sum::<f64>() - d.len() as f64).abs() < 1e-8);
    assert!(g.min() > 0.0);
    assert!(g.max() > 1.0);
    let centre = g.values[d.center_vertex()];
    assert!((centre - g.max()).abs() < 0.05);
    assert_eq!(grid_table(&g).rows.len(), d.len());
    assert_eq!(grid_table(&g).header, ["x", "y", "value"]);
}

#[test]
fn poisson_route_d_function() {
    let s2 = sigma_at(64);
    let p = d_function_poisson(&DomainSpec::unit_square(), 64, s2).unwrap();
    assert!(poisson_residual(&p, 1.0) <= 1e-8);
    assert!(p.min() >= 0.0);
    assert_eq!(p.values.len(), 63 * 63);
    assert_eq!(p.interpolate([0.0, 0.3]), 0.0);
    let mid = p.interpolate([0.5, 0.5]);
    assert!((mid - p.values[31 * 63 + 31]).abs() < 1e-12);
    assert!(matches!(
        d_function_poisson(&DomainSpec::disk(0.5), 32, s2),
        Err(Error::UnsupportedShape(_))
    ));
    assert!(d_function_poisson(&DomainSpec::unit_square(), 32, 0.0).is_err());
}

#[test]
fn continuum_green() {
    let sq = DomainSpec::unit_square();
    let (x, y) = ([0.3, 0.4], [0.6, 0.55]);
    assert!(matches!(continuum_green_estimate(&sq, x, x, 32), Err(Error::Diagonal)));
    let cg = ContinuumGreen::new(sq.clone());
    let a = cg.estimate(x, y, 64).unwrap();
    assert!((a - cg.estimate(y, x, 64).unwrap()).abs() < 1e-12);
    let b = cg.estimate(x, y, 128).unwrap();
    assert!((a / b - 1.0).abs() < 0.05, "{a} vs {b}");
    assert!(cg.estimate([0.001, 0.5], y, 64).is_err());
}
