use super::*;
use crate::eta::{build_whitney_eta, quadratic_eta};
use crate::geometry::{FnSampler, FnVectorSampler};

fn setup_1d(n: usize, eps: f64) -> (Arc<Domain<f64>>, MollifierConfig<f64>) {
    let d = Domain::<f64>::unit_box(1, n).unwrap().into_arc();
    let eta = build_whitney_eta(&d, &d.theta(), eps).unwrap();
    let k = make_kernel(Profile::Bump, 1, 64).unwrap();
    (d, MollifierConfig::new(k, eta))
}

#[test]
fn constants_are_fixed() {
    let (d, cfg) = setup_1d(257, 0.5);
    let f = ScalarField::constant(&d, 3.25);
    let tf = mollify(&f, &cfg).unwrap();
    assert!(tf.values().iter().all(|&v| (v - 3.25).abs() <= 1e-12));
}

#[test]
fn affine_reproduced() {
    let (d, cfg) = setup_1d(257, 0.5);
    let f = ScalarField::from_fn(&d, |p| 2.0 * p[0] - 0.3);
    let tf = mollify(&f, &cfg).unwrap();
    for (a, b) in tf.values().iter().zip(f.values()) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn identity_where_step_vanishes() {
    let d = Domain::<f64>::unit_box(1, 101).unwrap();
    let mut delta = vec![false; 101];
    delta[40] = true;
    let d = d.with_delta(delta).unwrap().into_arc();
    let eta = build_whitney_eta(&d, &d.theta(), 0.5).unwrap();
    let cfg = MollifierConfig::new(make_kernel(Profile::Bump, 1, 32).unwrap(), eta);
    let f = ScalarField::from_fn(&d, |p| (7.0 * p[0]).sin());
    let out = mollify_with(&f, &cfg).unwrap();
    assert_eq!(out.field.values()[40], f.values()[40]);
    assert_eq!(out.field.values()[0], f.values()[0]);
    assert!(out.report.identity_nodes >= 1);
}

#[test]
fn linear_and_positive() {
    let (d, cfg) = setup_1d(129, 0.5);
    let f = ScalarField::from_fn(&d, |p| (5.0 * p[0]).cos().abs());
    let g = ScalarField::from_fn(&d, |p| p[0] * p[0]);
    let comb = f.zip_with(&g, |a, b| 2.0 * a - 0.5 * b).unwrap();
    let tf = mollify(&f, &cfg).unwrap();
    let tg = mollify(&g, &cfg).unwrap();
    let tc = mollify(&comb, &cfg).unwrap();
    for i in 0..d.len() {
        assert!((tc.values()[i] - (2.0 * tf.values()[i] - 0.5 * tg.values()[i])).abs() < 1e-12);
        assert!(tf.values()[i] >= 0.0);
    }
}

#[test]
fn oscillation_and_sup_bounds() {
    let (d, cfg) = setup_1d(129, 0.5);
    let f = ScalarField::from_fn(&d, |p| (11.0 * p[0]).sin());
    let out = mollify_with(&f, &cfg).unwrap();
    assert!(out.report.sup_ratio <= 1.0);
    let steps = cfg.steps();
    for i in 0..d.len() {
        let x = d.grid().point(i)[0];
        let osc = cfg
            .kernel
            .nodes()
            .iter()
            .map(|z| (f.eval(&[x - steps[i] * z[0], 0.0, 0.0]).unwrap() - f.values()[i]).abs())
            .fold(0.0f64, f64::max);
        assert!((out.field.values()[i] - f.values()[i]).abs() <= osc + 1e-15);
    }
}

#[test]
fn support_preserved_near_boundary() {
    let (d, cfg) = setup_1d(201, 0.25);
    let w = 0.2;
    let f = ScalarField::from_fn(&d, |p| {
        let s = p[0].min(1.0 - p[0]);
        if s < w { 0.0 } else { 1.0 }
    });
    let tf = mollify(&f, &cfg).unwrap();
    let steps = cfg.steps();
    // the interpolant of f vanishes only up to one cell short of the jump
    let h = d.grid().h_max();
    for i in d.inside_indices() {
        if d.sigma()[i] + steps[i] < w - h - 1e-12 {
            assert_eq!(tf.values()[i], 0.0);
        }
    }
}

#[test]
fn gradient_matches_differences() {
    let d = Domain::<f64>::unit_box(1, 513).unwrap().into_arc();
    let k = make_kernel(Profile::Bump, 1, 64).unwrap();
    let q = quadratic_eta(&d, 0.1, &k).unwrap();
    let cfg = MollifierConfig::new(k, q).with_n(1);
    let f = FnSampler::new(&d, |p| p[0] * p[0]);
    let g = FnVectorSampler::new(&d, |p| [2.0 * p[0], 0.0, 0.0]);
    let tf = mollify_with(&f, &cfg).unwrap().field;
    let grad = mollify_gradient(&f, &g, &cfg).unwrap();
    let h = d.grid().h_max();
    for i in 2..d.len() - 2 {
        let fd = tf.partial(i, 0);
        assert!((grad.values()[i][0] - fd).abs() <= 1e-4f64.max(5.0 * h * h), "node {i}");
    }
}

#[test]
fn affine_gradient_exact() {
    let (d, cfg) = setup_1d(129, 0.5);
    let f = FnSampler::new(&d, |p| 3.0 * p[0] + 1.0);
    let g = FnVectorSampler::new(&d, |_| [3.0, 0.0, 0.0]);
    let parts = gradient_parts(&f, &g, &cfg).unwrap();
    for i in 0..d.len() {
        assert!((parts.grad.values()[i][0] - 3.0).abs() < 1e-12);
        assert!(parts.correction.values()[i][0].abs() < 1e-12);
    }
    let rep = pointwise_gradient_bound_check(&f, &g, &cfg).unwrap();
    assert!(rep.passed());
}

#[test]
fn rejects_steps_reaching_boundary() {
    let d = Domain::<f64>::unit_box(1, 65).unwrap().into_arc();
    let eta = EtaProfile::from_field(ScalarField::from_fn(&d, |p| p[0].min(1.0 - p[0]))).unwrap();
    let cfg = MollifierConfig::new(make_kernel(Profile::Bump, 1, 16).unwrap(), eta);
    let f = ScalarField::constant(&d, 1.0);
    assert!(matches!(mollify(&f, &cfg), Err(Error::StepViolation { .. })));
}

#[test]
fn box_profile_is_quarantined() {
    let (d, mut cfg) = setup_1d(65, 0.5);
    cfg.kernel = make_kernel(Profile::Box, 1, 16).unwrap();
    let f = ScalarField::constant(&d, 1.0);
    assert!(mollify(&f, &cfg).is_err());
    cfg.allow_touch = true;
    assert!(mollify(&f, &cfg).is_ok());
}

#[test]
fn subgrid_nodes_are_flagged() {
    let (d, cfg) = setup_1d(65, 0.5);
    let f = ScalarField::from_fn(&d, |p| p[0].sin());
    let out = mollify_with(&f, &cfg).unwrap();
    assert!(out.report.flagged_subgrid_nodes > 0);
    for &i in &out.subgrid_nodes {
        assert_eq!(out.field.values()[i], f.values()[i]);
        assert!(cfg.steps()[i] < d.grid().h_max());
    }
}

#[test]
fn composite_matches_summed_step_without_delta() {
    let (d, cfg) = setup_1d(129, 0.25);
    let e0 = build_whitney_eta(&d, &d.theta(), 0.25).unwrap();
    let f = ScalarField::from_fn(&d, |p| (3.0 * p[0]).exp());
    let a = mollify_composite(&f, &cfg.eta, &e0, 4, &cfg.kernel).unwrap();
    let summed: Vec<f64> = cfg.eta.values().iter().zip(e0.values()).map(|(x, y)| x + y / 4.0).collect();
    let mut p = cfg.eta.clone();
    p.field = ScalarField::new(d.clone(), summed).unwrap();
    let b = mollify(&f, &MollifierConfig::new(cfg.kernel.clone(), p)).unwrap();
    assert_eq!(a.values(), b.values());
}

#[test]
fn zeta_shrinks() {
    assert!(zeta::<f64>(16, 0.5) < zeta::<f64>(4, 0.5));
    assert!((zeta::<f64>(2, 0.0) - 1.05).abs() < 1e-12);
}

#[test]
fn f32_pipeline_runs() {
    let d = Domain::<f32>::unit_box(1, 65).unwrap().into_arc();
    let eta = build_whitney_eta(&d, &d.theta(), 0.5).unwrap();
    let cfg = MollifierConfig::new(make_kernel(Profile::Bump, 1, 32).unwrap(), eta);
    let f = ScalarField::constant(&d, 2.0f32);
    let tf = mollify(&f, &cfg).unwrap();
    assert!(tf.values().iter().all(|&v| (v - 2.0).abs() < 1e-5));
}
