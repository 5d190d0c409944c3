use dgp::analysis::{
    classify_bistability, linspace, phase_transition_scan, potential_extrema, scan_bifurcations, vanthoff_decompose,
    BifurcationKind, ModelFamily,
};
use dgp::asymptotics::{BistabilityClass, PotentialGrid};
use dgp::model::build_expansion;
use dgp::{presets, BirthDeathModel};

fn extrema_and_classes(model: &BirthDeathModel, v: f64, hi: f64) -> (Vec<f64>, Vec<BistabilityClass>) {
    let exp = build_expansion(model).unwrap();
    let grid = PotentialGrid::new(&exp, hi).unwrap();
    let ext = potential_extrema(&grid, v, 0.05, hi - 0.05).unwrap();
    let classes = classify_bistability(&grid, v, &ext.minima, &ext.maxima).unwrap();
    (ext.minima, classes.iter().map(|c| c.class).collect())
}

#[test]
fn deep_schlogl_is_nonlinearly_bistable() {
    let (minima, classes) = extrema_and_classes(&presets::schlogl_deep(), 1000.0, 6.0);
    assert_eq!(minima.len(), 2);
    assert_eq!(classes, [BistabilityClass::Nonlinear, BistabilityClass::Nonlinear]);
}

#[test]
fn flat_drift_model_is_stochastically_bistable() {
    let (minima, classes) = extrema_and_classes(&presets::flat_drift_bistable(), 50.0, 4.0);
    assert!(minima.len() >= 2);
    assert!(classes.iter().all(|&c| c == BistabilityClass::Stochastic), "{classes:?}");
}

#[test]
fn single_basin_has_nothing_to_classify() {
    let (minima, classes) = extrema_and_classes(&presets::poisson(1.0, 2.0), 100.0, 2.0);
    assert_eq!(minima.len(), 1);
    assert!(classes.is_empty());
}

#[test]
fn poisson_entropy_is_half_log() {
    let v = 2000.0;
    let xs: Vec<f64> = [0.25, 0.5, 1.0, 1.5].to_vec();
    let c = vanthoff_decompose(&presets::poisson(1.0, 2.0), v, &xs).unwrap();
    for (i, &x) in xs.iter().enumerate() {
        let d = c.phi1_tilde[i] - c.phi1_tilde[1];
        assert!((d - 0.5 * (x / 0.5).ln()).abs() < 2e-3, "x = {x}: {d}");
        assert!((c.phi0_tilde[i] + c.phi1_tilde[i] / v - c.big_phi[i]).abs() < 1e-12);
    }
    assert_eq!(c.rows().len(), xs.len());
}

#[test]
fn schlogl_scan_finds_folds_and_one_maxwell_point() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("models/schlogl.json");
    let family = ModelFamily::from_scan(&BirthDeathModel::from_json_file(path).unwrap()).unwrap();
    let grid = linspace(0.5, 1.5, 201);

    let events = scan_bifurcations(&family, &grid, (0.0, 3.0)).unwrap();
    assert_eq!(events.len(), 2);
    assert!(events.iter().all(|e| e.kind == BifurcationKind::SaddleNode));

    let diagram = phase_transition_scan(&family, &grid, (0.0, 3.0)).unwrap();
    assert_eq!(diagram.transitions.len(), 1);
    let t = diagram.transitions[0];
    assert!(events[0].parameter_value < t.mu && t.mu < events[1].parameter_value);
    assert!((t.phi0.0 - t.phi0.1).abs() < 1e-8);

    let rows = diagram.rows();
    let at: Vec<_> = rows.iter().filter(|r| r.mu == t.mu).collect();
    assert_eq!(at.len(), 2);
    assert!(at.iter().all(|r| r.is_global));
    // Away from the transition exactly one minimum is global.
    for p in &diagram.points {
        let globals = rows.iter().filter(|r| r.mu == p.mu && r.is_global).count();
        assert_eq!(globals, usize::from(!p.minima.is_empty()));
    }
}

#[test]
fn keizer_has_a_transcritical_point_at_one() {
    let family = ModelFamily::from_fn("k1", |k1| Ok(presets::keizer(k1, 1.0, 1.0)));
    let events = scan_bifurcations(&family, &linspace(0.5, 1.5, 41), (-0.5, 2.0)).unwrap();
    assert_eq!(events.len(), 1);
    assert_eq!(events[0].kind, BifurcationKind::Transcritical);
    assert!((events[0].parameter_value - 1.0).abs() < 1e-6);
    assert!(events[0].location.abs() < 1e-6);
}
