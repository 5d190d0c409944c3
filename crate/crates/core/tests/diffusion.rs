use dgp::diffusion::{
    d_hgtt, diffusion_mfpt, effective_diffusion, hgtt_approx, hu_residual, km_approx, psi, DiffusionSpec,
    StationaryDensity,
};
use dgp::model::build_expansion;
use dgp::presets;

#[test]
fn psi_of_simple_diffusions() {
    let ou = DiffusionSpec::new(|_| 1.0, |x| -x, 1.0, 0.0, 3.0).unwrap();
    assert!((psi(&ou, 2.0).unwrap() - 2.0).abs() < 1e-12);
    let table = ou.psi_potential().unwrap();
    assert!((table.eval(1.5).unwrap() - 1.125).abs() < 1e-12);

    let flat = DiffusionSpec::new(|x| 1.0 + x * x, |_| 0.0, 0.3, 0.0, 3.0).unwrap();
    for x in [0.0, 1.0, 2.9] {
        assert_eq!(psi(&flat, x).unwrap(), 0.0);
    }
}

#[test]
fn hgtt_density_peaks_at_the_poisson_mean() {
    let exp = build_expansion(&presets::poisson(1.0, 2.0)).unwrap();
    let spec = hgtt_approx(&exp, 50.0, 0.0, 2.0).unwrap();
    let table = spec.psi_potential().unwrap();
    let h = 1e-4;
    let slope = (table.eval(0.5 + h).unwrap() - table.eval(0.5 - h).unwrap()) / (2.0 * h);
    assert!(slope.abs() < 1e-7, "{slope}");
    // Psi' = -b/D = ln(lambda0/mu0) = phi0'
    for x in [0.2, 1.1] {
        let s = (table.eval(x + h).unwrap() - table.eval(x - h).unwrap()) / (2.0 * h);
        assert!((s - exp.phi0_prime(x)).abs() < 1e-7);
    }
}

#[test]
fn kramers_moyal_matches_curvature_but_not_tails() {
    let exp = build_expansion(&presets::schlogl_shallow()).unwrap();
    let v = 100.0;
    let km = |x: f64| {
        let (m, l) = (exp.mu0(x), exp.lambda0(x));
        2.0 * v * (m - l) / (m + l)
    };
    let wkb = |x: f64| -v * exp.phi0_prime(x);
    let x_star = 0.5;
    assert!(km(x_star).abs() < 1e-10 && wkb(x_star).abs() < 1e-10);
    let h = 1e-5;
    let curv_km = (km(x_star + h) - km(x_star - h)) / (2.0 * h);
    let curv_wkb = (wkb(x_star + h) - wkb(x_star - h)) / (2.0 * h);
    assert!((curv_km / curv_wkb - 1.0).abs() < 1e-6);
    // The two gradients separate at third order in the distance from x*.
    let gap = |x: f64| (km(x) - wkb(x)).abs() / wkb(x).abs();
    for x in [x_star - 0.1, x_star + 0.1] {
        assert!(gap(x) > 1e-6, "x = {x}: {} vs {}", km(x), wkb(x));
    }
    assert!(gap(0.2) > 1e-3);
}

#[test]
fn kramers_moyal_coefficient_is_positive_on_the_interior() {
    let exp = build_expansion(&presets::keizer_regularized(2.0, 1.0, 1.0, 0.5)).unwrap();
    let spec = km_approx(&exp, 100.0, 0.0, 3.0).unwrap();
    for i in 1..60 {
        let x = 3.0 * i as f64 / 60.0;
        assert!((spec.d)(x) > 0.0, "x = {x}");
    }
}

#[test]
fn effective_and_hgtt_coefficients_at_ratio_two() {
    // mu0 = 2, lambda0 = 1 at x = 1
    let exp = build_expansion(&presets::poisson(2.0, 1.0)).unwrap();
    let eff = effective_diffusion(&exp, 1.0).unwrap();
    let dh = d_hgtt(exp.mu0(1.0), exp.lambda0(1.0));
    assert!((eff.d_tilde - 1.04068).abs() < 1e-5);
    assert!((dh - std::f64::consts::LOG2_E).abs() < 1e-12); // 1/ln 2 = 1.44270
    assert!((dh / eff.d_tilde - 1.38629).abs() < 1e-5);
    assert!(dh / eff.d_tilde > 1.0);

    // mu0 = lambda0: both reduce to lambda0
    let eff = effective_diffusion(&exp, 2.0).unwrap();
    assert!((eff.d_tilde - 2.0).abs() < 1e-12);
    assert!((d_hgtt(2.0, 2.0) - 2.0).abs() < 1e-12);
}

#[test]
fn hu_equation_residuals() {
    let exp = build_expansion(&presets::poisson(2.0, 1.0)).unwrap();
    let exact = exp.phi0_prime(1.0);
    assert!(hu_residual(&exp, 1.0, exact).abs() < 1e-15);
    // 2(e^{ln 0.5 + 0.1} - 1) + (e^{-ln 0.5 - 0.1} - 1)
    assert!((hu_residual(&exp, 1.0, exact + 0.1) + 0.0851542).abs() < 1e-6);
    for i in 1..40 {
        let x = 0.1 * i as f64;
        assert!(hu_residual(&exp, x, exp.phi0_prime(x)).abs() < 1e-12);
    }
}

#[test]
fn ou_mfpt_and_density() {
    let ou = DiffusionSpec::new(|_| 1.0, |x| -x, 0.5, -6.0, 6.0).unwrap();
    let dens = StationaryDensity::new(&ou).unwrap();
    let ln_f0 = dens.log_density(0.0).unwrap();
    assert!((ln_f0 + 0.5 * std::f64::consts::PI.ln()).abs() < 1e-9);
    let t1 = diffusion_mfpt(&ou, -6.0, 0.0, 1.0).unwrap();
    let t2 = diffusion_mfpt(&ou, -6.0, 0.0, 1.5).unwrap();
    assert!(t2 > t1 && t1 > 0.0);
}

#[test]
fn effective_diffusion_reproduces_the_chain_passage_time() {
    use dgp::asymptotics::{mfpt_asymptotic, PotentialGrid};
    use dgp::diffusion::effective_spec;
    use dgp::exact::mfpt_exact_right;

    let m = presets::schlogl_shallow();
    let exp = build_expansion(&m).unwrap();
    let v = 60.0;
    let eff = diffusion_mfpt(&effective_spec(&exp, v, 0.0, 3.0).unwrap(), 1e-3, 0.5, 1.25).unwrap();
    let asym = mfpt_asymptotic(&exp, &PotentialGrid::new(&exp, 2.0).unwrap(), v, 0.5, 1.25).unwrap();
    let exact = mfpt_exact_right(&m, v, 30, 75).unwrap();
    println!("effective {eff}, asymptotic {asym}, exact {exact}");
    assert!((eff / asym - 1.0).abs() < 0.05);
    assert!((eff / exact - 1.0).abs() < 0.2);
}
