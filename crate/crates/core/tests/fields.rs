use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use walklab::fields::{
    local_covariance, pinned_cov, sample_dgff, tilde_cov, verify_pinned_relation, zero_average_decompose,
    CovarianceKind, DgffSampler, PrecisionSampler, ZeroAverage,
};
use walklab::green::compute_green;
use walklab::io::{field_table, Meta};
use walklab::lattice::{build_lattice, DomainSpec, LatticeDomain};
use walklab::potential::PotentialKernel;
use walklab::stats;

fn square(k: u32) -> LatticeDomain {
    build_lattice(&DomainSpec::unit_square(), k + 3).unwrap()
}

#[test]
fn single_vertex_variance_is_a_quarter() {
    let d = build_lattice(&DomainSpec::unit_square(), 4).unwrap();
    let g = compute_green(&d).unwrap();
    let x: Vec<f64> = sample_dgff(&g, 1, 100_000).unwrap().iter().map(|s| s.values[0]).collect();
    let z = (stats::variance(&x) - 0.25).abs() / stats::variance_std_error(&x);
    assert!(z < 3.0, "z = {z}");
}

#[test]
fn samples_are_reproducible() {
    let g = compute_green(&square(6)).unwrap();
    let a = sample_dgff(&g, 42, 3).unwrap();
    let b = sample_dgff(&g, 42, 3).unwrap();
    assert_eq!(a.iter().map(|s| s.values.clone()).collect::<Vec<_>>(), b.iter().map(|s| s.values.clone()).collect::<Vec<_>>());
    assert_ne!(a[0].values, sample_dgff(&g, 43, 1).unwrap()[0].values);
}

#[test]
fn empirical_covariance_matches_green() {
    let d = square(16);
    let g = compute_green(&d).unwrap();
    let s = sample_dgff(&g, 5, 10_000).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..10 {
        let (x, y) = (rng.random_range(0..d.len()), rng.random_range(0..d.len()));
        let a: Vec<f64> = s.iter().map(|f| f.values[x]).collect();
        let b: Vec<f64> = s.iter().map(|f| f.values[y]).collect();
        let z = (stats::covariance(&a, &b) - g.get(x, y)).abs() / stats::covariance_std_error(&a, &b);
        assert!(z < 3.5, "({x},{y}) z = {z}");
    }
}

#[test]
fn precision_sampler_has_the_same_law() {
    let d = square(10);
    let g = compute_green(&d).unwrap();
    let p = PrecisionSampler::new(&d).unwrap();
    let u = d.center_vertex();
    let x: Vec<f64> = (0..20_000).map(|k| p.sample(3, k).values[u]).collect();
    let z = (stats::variance(&x) - g.get(u, u)).abs() / stats::variance_std_error(&x);
    assert!(z < 3.0, "z = {z}");
}

#[test]
fn marginals_are_gaussian() {
    let d = square(12);
    let g = compute_green(&d).unwrap();
    let u = d.corner_vertex();
    let sampler = DgffSampler::new(&g).unwrap();
    let x: Vec<f64> = (0..10_000).map(|k| sampler.sample(8, k).values[u] / g.get(u, u).sqrt()).collect();
    assert!(stats::ks_one_sample(&x, stats::normal_cdf).p_value > 0.01);
}

#[test]
fn zero_average_identities() {
    let d = square(20);
    let g = compute_green(&d).unwrap();
    for s in sample_dgff(&g, 2, 5).unwrap() {
        let (parts, dn) = zero_average_decompose(&s, &g);
        assert!(parts.hat.zero_average);
        assert!(parts.hat.values.iter().sum::<f64>().abs() < 1e-9);
        assert!((dn.iter().sum::<f64>() - d.len() as f64).abs() < 1e-9);
        assert!((parts.y - s.y).abs() < 1e-15);
        for x in 0..d.len() {
            assert!((s.values[x] - dn[x] * s.y - parts.hat.values[x]).abs() < 1e-12);
        }
    }
}

#[test]
fn mean_is_uncorrelated_with_the_zero_average_part() {
    let d = square(8);
    let g = compute_green(&d).unwrap();
    let za = ZeroAverage::new(&g).unwrap();
    let s = sample_dgff(&g, 4, 10_000).unwrap();
    let y: Vec<f64> = s.iter().map(|f| f.y).collect();
    let hats: Vec<Vec<f64>> = s.iter().map(|f| za.decompose(f).hat.values).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10 {
        let x = rng.random_range(0..d.len());
        let h: Vec<f64> = hats.iter().map(|v| v[x]).collect();
        let z = stats::covariance(&y, &h).abs() / stats::covariance_std_error(&y, &h);
        assert!(z < 3.5, "x = {x}, z = {z}");
        assert!(za.cov_y_hat(x).abs() < 1e-12);
    }
}

#[test]
fn field_csv_columns() {
    let d = square(3);
    let g = compute_green(&d).unwrap();
    let t = field_table(&d, &sample_dgff(&g, 1, 2).unwrap());
    assert_eq!(t.header, ["x_i", "x_j", "value", "replicate"]);
    assert_eq!(t.rows.len(), 18);
    let mut buf = Vec::new();
    t.write(&Meta::new(1, &"cfg").unwrap(), &mut buf).unwrap();
    assert!(String::from_utf8(buf).unwrap().starts_with("# walklab "));
}

#[test]
fn covariance_windows() {
    let a = PotentialKernel::new(1024);
    assert_eq!(pinned_cov(&a, [2, 1], [2, 1]), 2.0 * a.value([2, 1]));
    assert_eq!(tilde_cov(&a, [0, 0], [0, 0]), 0.0);
    for y in [[1, 0], [2, -3], [0, 4]] {
        assert_eq!(tilde_cov(&a, [0, 0], y), 0.0);
        assert_eq!(pinned_cov(&a, [0, 0], y), 0.0);
    }
    for kind in [CovarianceKind::Pinned, CovarianceKind::Tilde] {
        let w = local_covariance(kind, 3, &a).unwrap();
        assert_eq!(w.offsets.len(), 49);
        assert_eq!(w.matrix, w.matrix.transpose());
        assert!(w.min_eigenvalue() >= -1e-8);
    }
    let w = local_covariance(CovarianceKind::Tilde, 5, &a).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let v: Vec<f64> = (0..w.offsets.len()).map(|_| rng.sample(StandardNormal)).collect();
        let norm2: f64 = v.iter().map(|x| x * x).sum();
        assert!(w.quadratic_form(&v) >= -1e-8 * norm2);
    }
    let r = verify_pinned_relation(5, &a).unwrap();
    assert!(r.max_identity_error <= 1e-9 && r.min_eigenvalue >= -1e-8);
    assert!(local_covariance(CovarianceKind::Pinned, 0, &a).is_err());
}
