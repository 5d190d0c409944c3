use std::f64::consts::PI;
use std::sync::Arc;

use dgp::asymptotics::{
    kramers_time, laplace_log_min, laplace_log_quadrature, lemma_sum, mfpt_asymptotic, phi0, phi1, BistabilityClass,
    LemmaInput, PotentialGrid, Profile,
};
use dgp::exact::{mfpt_exact_right, stationary_distribution};
use dgp::model::build_expansion;
use dgp::{presets, BirthDeathModel, RateTerm};

#[test]
fn lemma_examples() {
    let one = |_: f64| 1.0;
    let zero = |_: f64| 0.0;
    let constant = LemmaInput { f0: &one, f0_prime: &zero, f1: &zero, f2: &zero };
    for (x, v) in [(0.7, 10.0), (2.0, 3.0), (1.25, 8.0)] {
        assert!((lemma_sum(&constant, x, v).unwrap() - x).abs() < 1e-14);
    }

    let sq = |z: f64| z * z;
    let dsq = |z: f64| 2.0 * z;
    let squares = LemmaInput { f0: &sq, f0_prime: &dsq, f1: &zero, f2: &zero };
    let closed = 9.0 * 10.0 * 19.0 / 6000.0;
    assert!((lemma_sum(&squares, 1.0, 10.0).unwrap() - closed).abs() < 1e-14);
    assert!((closed - 0.285).abs() < 1e-15);

    let id = |z: f64| z;
    let linear = LemmaInput { f0: &id, f0_prime: &one, f1: &zero, f2: &zero };
    assert!((lemma_sum(&linear, 1.0, 4.0).unwrap() - 6.0 / 16.0).abs() < 1e-15);
}

#[test]
fn poisson_leading_potential() {
    let exp = build_expansion(&presets::poisson(1.0, 2.0)).unwrap();
    let closed = |x: f64| x * (x / 0.5).ln() - x + 0.5;
    let base = phi0(&exp, 0.5).unwrap();
    assert!((phi0(&exp, 1.0).unwrap() - base - 0.193147).abs() < 1e-6);
    let grid = PotentialGrid::new(&exp, 3.0).unwrap();
    for x in [0.1, 0.5, 1.0, 2.7] {
        assert!((grid.phi0(x).unwrap() - grid.phi0(0.5).unwrap() - closed(x)).abs() < 1e-10);
    }
}

#[test]
fn binomial_leading_potential_has_its_minimum_at_half() {
    let exp = build_expansion(&presets::binomial(1.0, 1.0, 1.0)).unwrap();
    let closed = |x: f64| (1.0 - x).ln() - x * ((1.0 - x) / x).ln();
    let grid = PotentialGrid::new(&exp, 0.99).unwrap();
    for x in [0.2, 0.5, 0.8] {
        assert!((grid.phi0(x).unwrap() - closed(x)).abs() < 1e-9, "x = {x}");
    }
    assert!(grid.phi0(0.5).unwrap() < grid.phi0(0.49).unwrap());
    assert!(grid.phi0(0.5).unwrap() < grid.phi0(0.51).unwrap());
}

#[test]
fn poisson_first_order_potential() {
    let exp = build_expansion(&presets::poisson(1.0, 2.0)).unwrap();
    // phi1 = ln sqrt(2 x) + const
    let d = phi1(&exp, 1.0).unwrap() - phi1(&exp, 0.25).unwrap();
    assert!((d - 0.5 * 4f64.ln()).abs() < 1e-10);
    assert!((exp.phi1_prime(0.8) - 1.0 / 1.6).abs() < 1e-14);
}

#[test]
fn constant_equal_rates_have_flat_first_order_potential() {
    let m = BirthDeathModel::new(
        vec![RateTerm::mass_action(1.5, 0)],
        vec![RateTerm::with_exponent(1.5, 0, 1)],
    )
    .unwrap();
    let exp = build_expansion(&m).unwrap();
    assert!((phi1(&exp, 2.0).unwrap() - phi1(&exp, 0.3).unwrap()).abs() < 1e-14);
}

#[test]
fn regularized_keizer_first_order_potential_matches_exact() {
    let m = presets::keizer_regularized(2.0, 1.0, 1.0, 0.01);
    let exp = build_expansion(&m).unwrap();
    let v = 1e4;
    let d = stationary_distribution(&m, v, None).unwrap();
    let big_phi = |n: u64| -d.log_probability(n) / v;
    let exact = v * ((big_phi(10_000) - big_phi(5_000)) - (phi0(&exp, 1.0).unwrap() - phi0(&exp, 0.5).unwrap()));
    let asym = phi1(&exp, 1.0).unwrap() - phi1(&exp, 0.5).unwrap();
    assert!((exact - asym).abs() < 1e-3, "{exact} vs {asym}");
}

#[test]
fn asymptotic_mfpt_examples() {
    let poisson = presets::poisson(1.0, 2.0);
    let exp = build_expansion(&poisson).unwrap();
    let grid = PotentialGrid::new(&exp, 1.1).unwrap();
    let t = mfpt_asymptotic(&exp, &grid, 200.0, 0.5, 1.0).unwrap();
    let exact = mfpt_exact_right(&poisson, 200.0, 100, 200).unwrap();
    assert!((t / exact - 1.0).abs() < 0.10, "{t} vs {exact}");
    assert_eq!(mfpt_asymptotic(&exp, &grid, 200.0, 0.7, 0.7).unwrap(), 0.0);

    let schlogl = presets::schlogl_shallow();
    let exp = build_expansion(&schlogl).unwrap();
    let grid = PotentialGrid::new(&exp, 2.0).unwrap();
    let t = mfpt_asymptotic(&exp, &grid, 60.0, 0.5, 1.25).unwrap();
    let exact = mfpt_exact_right(&schlogl, 60.0, 30, 75).unwrap();
    assert!((t / exact - 1.0).abs() < 0.20, "{t} vs {exact}");
}

#[test]
fn first_order_correction_improves_kramers() {
    let m = presets::schlogl_deep();
    let exp = build_expansion(&m).unwrap();
    let grid = PotentialGrid::new(&exp, 5.5).unwrap();
    let v = 200.0;
    let exact = mfpt_exact_right(&m, v, 200, 1000).unwrap();
    let k = kramers_time(&exp, &grid, v, 1.0, 3.0).unwrap();
    assert!((k.time / exact - 1.0).abs() < (k.time_leading_only / exact - 1.0).abs());
    assert_eq!(k.bistability_class, BistabilityClass::Nonlinear);
    assert!((k.log_time() - k.time.ln()).abs() < 1e-12);
}

fn parabola() -> Profile {
    Profile::new(
        Arc::new(|y: f64| (y - 0.5).powi(2)),
        Arc::new(|y: f64| 2.0 * (y - 0.5)),
        Arc::new(|_| 2.0),
        2.0,
    )
}

#[test]
fn laplace_gaussian_and_enthalpic_branches() {
    let p = parabola();
    let v = 400.0;
    let full = laplace_log_min(&p, v, 1.0).unwrap();
    let gaussian = (2.0 * PI / (2.0 * v)).ln() / (2.0 * v);
    assert!((full - gaussian).abs() < 5.0 / (v * v));
    assert!((full - laplace_log_quadrature(&p, v, 1.0).unwrap()).abs() < 5.0 / (v * v));

    let left = laplace_log_min(&p, v, 0.2).unwrap();
    let enthalpic = -0.09 - (v * 0.6).ln() / v;
    assert!((left - enthalpic).abs() < 1e-3);
    assert!((left - laplace_log_quadrature(&p, v, 0.2).unwrap()).abs() < 5.0 / (v * v));
}

#[test]
fn laplace_large_deviation_limit() {
    let p = parabola();
    for (x, inf) in [(1.0, 0.0), (0.2, 0.09)] {
        let at = |v: f64| laplace_log_min(&p, v, x).unwrap();
        assert!((at(1e3) + inf).abs() > (at(1e5) + inf).abs());
        assert!((at(1e5) + inf).abs() < 1e-3);
    }
}
