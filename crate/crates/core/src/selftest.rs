//! Built-in invariant suite. Every computation is deterministic, so the report
//! is byte-identical across thread counts.

use std::sync::Arc;

use serde::Serialize;

use crate::analysis::fixtures::Fixture;
use crate::analysis::norms::NormKind;
use crate::analysis::opnorm::l1_operator_norm;
use crate::analysis::study::{convergence_study, trace_check, BoundCheck, Family};
use crate::analysis::weak_l1::{log_sweep, weak_l1_check};
use crate::error::Result;
use crate::eta::{build_whitney_eta, certify, quadratic_eta, regularized_distance};
use crate::feasible::{calibrated_setup, feasible_smooth, ConstraintSpec, Mode};
use crate::geometry::{Domain, ScalarField};
use crate::kernels::{make_kernel, Profile};
use crate::mollify::{mollify, mollify_with, pointwise_gradient_bound_check, MollifierConfig};

#[derive(Clone, Debug, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub checks: Vec<BoundCheck>,
    pub passed: bool,
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn exactness(dim: usize, nodes: usize, order: usize, out: &mut Vec<BoundCheck>) -> Result<()> {
    let d: Arc<Domain<f64>> = Domain::unit_box(dim, nodes)?.into_arc();
    let eta = build_whitney_eta(&d, &d.theta(), 0.25)?;
    let cfg = MollifierConfig::new(make_kernel(Profile::Bump, dim, order)?, eta);
    let tag = format!("{dim}d");

    let c = ScalarField::constant(&d, 0.7);
    let tc = mollify(&c, &cfg)?;
    out.push(BoundCheck::new(format!("{tag} constant reproduced"), max_diff(tc.values(), c.values()), 1e-12, 0.0));

    let aff = ScalarField::from_fn(&d, |p| 1.5 * p[0] - 0.25 * p[1] + 0.1);
    let ta = mollify(&aff, &cfg)?;
    out.push(BoundCheck::new(format!("{tag} affine reproduced"), max_diff(ta.values(), aff.values()), 1e-10, 0.0));

    let f = ScalarField::from_fn(&d, |p| (9.0 * p[0]).sin() + p[1] * p[1]);
    let g = ScalarField::from_fn(&d, |p| (p[0] - 0.3).abs());
    let comb = f.zip_with(&g, |a, b| 3.0 * a - 2.0 * b)?;
    let tf = mollify_with(&f, &cfg)?;
    let tg = mollify(&g, &cfg)?;
    let tcomb = mollify(&comb, &cfg)?;
    let lin: Vec<f64> = tf.field.values().iter().zip(tg.values()).map(|(a, b)| 3.0 * a - 2.0 * b).collect();
    out.push(BoundCheck::new(format!("{tag} linearity"), max_diff(tcomb.values(), &lin), 1e-10, 0.0));
    out.push(BoundCheck::new(format!("{tag} sup bound"), tf.report.sup_ratio, 1.0, 0.0));
    let positive = tg.values().iter().all(|&v| v >= 0.0);
    out.push(BoundCheck::new(format!("{tag} positivity"), 0.0, 0.0, 0.0).require(positive));
    let steps = cfg.steps();
    let ident = (0..d.len()).filter(|&i| steps[i] == 0.0).all(|i| tf.field.values()[i] == f.values()[i]);
    out.push(BoundCheck::new(format!("{tag} identity where the step vanishes"), 0.0, 0.0, 0.0).require(ident));
    Ok(())
}

/// Runs the suite; `seed` drives the randomized probes and modulus sampling.
pub fn run(seed: u64) -> Result<SelftestReport> {
    let mut checks = Vec::new();
    exactness(1, 257, 64, &mut checks)?;
    exactness(2, 49, 16, &mut checks)?;

    let d1: Arc<Domain<f64>> = Domain::unit_box(1, 257)?.into_arc();
    let k1 = make_kernel(Profile::Bump, 1, 64)?;
    let reg = regularized_distance(&d1, 0.1, &k1)?;
    checks.push(BoundCheck::new("regularized distance certificate", certify(&reg).violations.len() as f64, 0.0, 0.0));
    let quad = quadratic_eta(&d1, 0.1, &k1)?;
    checks.push(BoundCheck::new("quadratic profile certificate", certify(&quad).violations.len() as f64, 0.0, 0.0));

    let d2: Arc<Domain<f64>> = Domain::unit_box(2, 33)?.into_arc();
    let k2 = make_kernel(Profile::Bump, 2, 12)?;
    let q2 = quadratic_eta(&d2, 0.1, &k2)?;
    let sin2 = Fixture::sin(&d2);
    let cfg2 = MollifierConfig::new(k2.clone(), q2).with_n(4);
    let gb = pointwise_gradient_bound_check(&*sin2.f, &**sin2.grad.as_ref().expect("sin gradient"), &cfg2)?;
    checks.push(BoundCheck::new(
        "gradient bounds (2d sin, n=4)",
        (gb.total_bound_violations + gb.deviation_bound_violations) as f64,
        0.0,
        0.0,
    ));

    let mut spike = ScalarField::zeros(&d1);
    spike.values_mut()[100] = 1.0 / d1.grid().cell_volume();
    let whitney = build_whitney_eta(&d1, &d1.theta(), 0.25)?;
    let wcfg = MollifierConfig::new(k1.clone(), whitney.clone());
    let wl = weak_l1_check(&spike, &wcfg, &log_sweep(1e-3, 1e3, 13))?;
    checks.push(BoundCheck::new("weak-L1 inequality (spike)", wl.violations as f64, 0.0, 0.0));

    let qcfg = MollifierConfig::new(k1.clone(), quad.clone()).with_n(1);
    let op = l1_operator_norm(&qcfg, 100, seed)?;
    checks.push(BoundCheck::new("L1 operator norm (rescaled) <= 1.1 bound", op.estimate_rescaled, op.bound * 1.1, 0.0));

    let sin1 = Fixture::sin(&d1);
    let fam = Family::Standard { kernel: k1.clone(), eta: whitney.clone() };
    let study = convergence_study(&sin1, &fam, &[1, 2, 4, 8, 16], &[NormKind::Lp(2.0), NormKind::W1p(2.0)])?;
    for c in study.checks {
        checks.push(BoundCheck { name: format!("sin 1d {}", c.name), ..c });
    }
    let tr = trace_check(&*Fixture::bubble(&d1).f, &wcfg)?;
    for r in &tr.rows {
        checks.push(BoundCheck::new(format!("trace shell {}h", r.width_cells), r.max_error, r.oscillation_bound, 1e-14));
    }

    let tent = ConstraintSpec::new(ScalarField::from_fn(&d1, |p| p[0].min(1.0 - p[0])), Mode::Value)?;
    let (ceta, _) = calibrated_setup(&tent, 0.5, 32, seed)?;
    let f = tent.alpha.map(|v| 0.9 * v);
    for n in [1, 4, 16] {
        let sm = feasible_smooth(&f, &tent, &ceta, &make_kernel(Profile::Bump, 1, 32)?, n)?;
        checks.push(BoundCheck::new(format!("feasible iterate n={n}"), sm.membership.margin, 0.0, sm.slack));
    }

    let passed = checks.iter().all(|c| c.pass);
    Ok(SelftestReport { seed, checks, passed })
}
