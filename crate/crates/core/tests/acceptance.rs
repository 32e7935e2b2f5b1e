//! End-to-end acceptance criteria. Each criterion prints one PASS/FAIL line with
//! the measured quantities; the test fails if any criterion fails.

use std::sync::Arc;
use std::time::Instant;

use mollikit::analysis::counterexample::counterexample_run;
use mollikit::analysis::fixtures::Fixture;
use mollikit::analysis::norms::{total_variation, NormKind};
use mollikit::analysis::opnorm::l1_operator_norm;
use mollikit::analysis::study::{convergence_study, Family};
use mollikit::analysis::weak_l1::{log_sweep, weak_l1_check};
use mollikit::eta::{build_whitney_eta, certify, quadratic_eta, regularized_distance, EtaProfile};
use mollikit::feasible::{calibrated_setup, density_study, feasibility_slack, ConstraintSpec, Mode};
use mollikit::geometry::{Domain, FnSampler, FnVectorSampler, Sampler, ScalarField};
use mollikit::kernels::{make_kernel, Kernel, Profile};
use mollikit::mollify::{
    modified_config, mollify, mollify_composite, mollify_gradient, mollify_with, pointwise_gradient_bound_check,
    psi_field, MollifierConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn order_for(dim: usize) -> usize {
    if dim == 1 {
        64
    } else {
        32
    }
}

fn bump(dim: usize) -> Kernel<f64> {
    make_kernel(Profile::Bump, dim, order_for(dim)).unwrap()
}

fn unit(dim: usize, n: usize) -> Arc<Domain<f64>> {
    Domain::unit_box(dim, n).unwrap().into_arc()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn ensure(cond: bool, msg: String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg)
    }
}

fn criterion_1() -> Outcome {
    let mut notes = Vec::new();
    for (dim, nodes) in [(1usize, 1024usize), (2, 256)] {
        let d0 = Domain::unit_box(dim, nodes).unwrap();
        // an interior zero set gives η = 0 nodes away from the boundary too
        let mut delta = vec![false; d0.len()];
        let g = d0.grid().clone();
        let centre = g.index([nodes / 3, if dim > 1 { nodes / 2 } else { 0 }, 0]);
        delta[centre] = true;
        let d = d0.with_delta(delta).unwrap().into_arc();
        let eta = build_whitney_eta(&d, &d.theta(), 0.25).unwrap();
        let cfg = MollifierConfig::new(bump(dim), eta);
        let steps = cfg.steps();

        let c = ScalarField::constant(&d, -1.75);
        let e_const = max_diff(mollify(&c, &cfg).unwrap().values(), c.values());
        ensure(e_const <= 1e-12, format!("{dim}d constant error {e_const:e}"))?;

        let f = ScalarField::from_fn(&d, |p| (7.0 * p[0]).sin() * (1.0 + p[1]) + (3.0 * p[1]).cos());
        let g2 = ScalarField::from_fn(&d, |p| ((p[0] - 0.4).abs() - p[1]).max(0.0));
        let tf = mollify_with(&f, &cfg).unwrap();
        let tg = mollify(&g2, &cfg).unwrap();
        let zero_nodes: Vec<usize> = (0..d.len()).filter(|&i| steps[i] == 0.0).collect();
        let ident = zero_nodes.iter().all(|&i| tf.field.values()[i] == f.values()[i]);
        ensure(ident && zero_nodes.contains(&centre), format!("{dim}d identity on eta = 0 nodes"))?;

        let comb = f.zip_with(&g2, |a, b| 2.5 * a - 0.75 * b).unwrap();
        let tc = mollify(&comb, &cfg).unwrap();
        let lin: Vec<f64> = tf.field.values().iter().zip(tg.values()).map(|(a, b)| 2.5 * a - 0.75 * b).collect();
        let e_lin = max_diff(tc.values(), &lin);
        ensure(e_lin <= 1e-10, format!("{dim}d linearity error {e_lin:e}"))?;

        let fmax = f.max_abs_inside();
        let tmax = tf.field.max_abs_inside();
        ensure(tmax <= fmax, format!("{dim}d sup bound {tmax} > {fmax}"))?;

        let aff = ScalarField::from_fn(&d, |p| 0.3 - 1.2 * p[0] + 0.8 * p[1]);
        let e_aff = max_diff(mollify(&aff, &cfg).unwrap().values(), aff.values());
        ensure(e_aff <= 1e-10, format!("{dim}d affine error {e_aff:e}"))?;
        notes.push(format!(
            "{dim}d: const {e_const:.1e}, linear {e_lin:.1e}, affine {e_aff:.1e}, sup {tmax:.6}<={fmax:.6}, {} identity nodes",
            zero_nodes.len()
        ));
    }
    Ok(notes.join("; "))
}

fn criterion_2() -> Outcome {
    let d = unit(1, 2049);
    let k = bump(1);
    let q = quadratic_eta(&d, 0.1, &k).map_err(|e| e.to_string())?;
    let cfg = MollifierConfig::new(k.clone(), q).with_n(4);
    let pi = std::f64::consts::PI;
    let f = FnSampler::new(&d, move |p| (pi * p[0]).sin());
    let g = FnVectorSampler::new(&d, move |p| [pi * (pi * p[0]).cos(), 0.0, 0.0]);
    let tf = mollify_with(&f, &cfg).unwrap().field;
    let grad = mollify_gradient(&f, &g, &cfg).unwrap();
    let h = d.grid().h_max();
    let tol = 1e-4f64.max(5.0 * h * h);
    let mut worst = 0.0f64;
    for i in 1..d.len() - 1 {
        worst = worst.max((grad.values()[i][0] - tf.partial(i, 0)).abs());
    }
    ensure(worst <= tol, format!("gradient vs differences {worst:e} > {tol:e}"))?;

    let rep1 = pointwise_gradient_bound_check(&f, &g, &cfg).unwrap();
    let d2 = unit(2, 65);
    let k2 = bump(2);
    let q2 = quadratic_eta(&d2, 0.1, &k2).map_err(|e| e.to_string())?;
    let cfg2 = MollifierConfig::new(k2, q2).with_n(4);
    let sin2 = Fixture::sin(&d2);
    let rep2 = pointwise_gradient_bound_check(&*sin2.f, &**sin2.grad.as_ref().unwrap(), &cfg2).unwrap();
    ensure(
        rep1.passed() && rep2.passed(),
        format!(
            "pointwise bounds: 1d {}+{} violations, 2d {}+{} violations",
            rep1.total_bound_violations,
            rep1.deviation_bound_violations,
            rep2.total_bound_violations,
            rep2.deviation_bound_violations
        ),
    )?;
    Ok(format!(
        "max |grad T f - D(Tf)| = {worst:.2e} <= {tol:.1e}; pointwise bounds hold (worst margins {:.2e}, {:.2e})",
        rep1.worst_margin, rep2.worst_margin
    ))
}

fn criterion_3() -> Outcome {
    let mut notes = Vec::new();
    for (dim, nodes) in [(1usize, 1024usize), (2, 129)] {
        let d = unit(dim, nodes);
        let k = bump(dim);
        for eps in [0.05, 0.1, 0.25] {
            let reg = regularized_distance(&d, eps, &k).map_err(|e| format!("{dim}d eps {eps}: {e}"))?;
            let s = d.sigma();
            let bad = d
                .inside_indices()
                .into_iter()
                .filter(|&i| reg.values()[i] < (1.0 - eps) * s[i] || reg.values()[i] > (1.0 + eps) * s[i])
                .count();
            ensure(bad == 0, format!("{dim}d eps {eps}: {bad} sandwich violations"))?;
            let q = quadratic_eta(&d, eps, &k).map_err(|e| format!("{dim}d eps {eps}: {e}"))?;
            let kappa = ((1.0 - eps) / (1.0 + eps)).powi(2);
            let badq = d
                .inside_indices()
                .into_iter()
                .filter(|&i| q.values()[i] < kappa * s[i] * s[i] || q.values()[i] > s[i] * s[i])
                .count();
            let cert = certify(&q);
            ensure(badq == 0 && cert.passed(), format!("{dim}d eps {eps}: {badq} quadratic violations"))?;
            let worst = d
                .inside_indices()
                .into_iter()
                .map(|i| (reg.values()[i] / s[i] - 1.0).abs())
                .fold(0.0, f64::max);
            notes.push(format!("{dim}d eps {eps}: max|Tσ/σ-1| {worst:.3}"));
        }
    }
    Ok(notes.join(", "))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut runs = 0;
    let mut worst_ratio = 0.0f64;
    for (dim, nodes) in [(1usize, 1024usize), (2, 129)] {
        let d = unit(dim, nodes);
        let eta = build_whitney_eta(&d, &d.theta(), 0.25).unwrap();
        let cfg = MollifierConfig::new(bump(dim), eta);
        let cell = d.grid().cell_volume();
        let mut spike = ScalarField::zeros(&d);
        let mid = d.grid().index([nodes / 2, if dim > 1 { nodes / 3 } else { 0 }, 0]);
        spike.values_mut()[mid] = 1.0 / cell;
        let step = Fixture::step(&d).field();
        let mut random = ScalarField::zeros(&d);
        for i in d.inside_indices() {
            random.values_mut()[i] = rng.gen_range(-3.0..3.0);
        }
        for f in [&spike, &step, &random] {
            let rep = weak_l1_check(f, &cfg, &log_sweep(1e-3, 1e3, 25)).unwrap();
            ensure(rep.violations == 0, format!("{dim}d: {} weak-L1 violations", rep.violations))?;
            for r in &rep.rows {
                if r.measure > 0.0 {
                    worst_ratio = worst_ratio.max(r.measure / r.bound);
                }
            }
            runs += 1;
        }
    }
    Ok(format!("{runs} fixtures x 25 levels over 6 decades, max measure/bound {worst_ratio:.3}"))
}

fn criterion_5() -> Outcome {
    let mut notes = Vec::new();
    for (dim, nodes) in [(1usize, 1024usize), (2, 97)] {
        let d = unit(dim, nodes);
        let k = bump(dim);
        let q = quadratic_eta(&d, 0.1, &k).map_err(|e| e.to_string())?;
        let mut ests = Vec::new();
        for n in [1u32, 4, 16] {
            let cfg = MollifierConfig::new(k.clone(), q.clone()).with_n(n);
            let rep = l1_operator_norm(&cfg, 100, 5).unwrap();
            if n == 1 {
                ensure(
                    rep.estimate_rescaled <= 1.1 * rep.bound,
                    format!("{dim}d K {} > 1.1 x {}", rep.estimate_rescaled, rep.bound),
                )?;
                notes.push(format!(
                    "{dim}d kappa {:.4} K {:.4} (raw {:.4}) <= 1.1 x {:.4}",
                    rep.kappa, rep.estimate_rescaled, rep.estimate_raw, rep.bound
                ));
            }
            ests.push((rep.estimate_rescaled, rep.limsup_bound));
        }
        let mono = ests.windows(2).all(|w| w[1].0 <= w[0].0 + 1e-12);
        let (last, lim) = *ests.last().unwrap();
        ensure(mono, format!("{dim}d T_n estimates not nonincreasing: {ests:?}"))?;
        ensure(last <= 1.1 * lim, format!("{dim}d T_16 estimate {last} > 1.1 x {lim}"))?;
        notes.push(format!(
            "T_n (1,4,16): {:.4}, {:.4}, {:.4} <= 1.1 x {:.4}",
            ests[0].0, ests[1].0, ests[2].0, lim
        ));
    }
    Ok(notes.join("; "))
}

fn criterion_6() -> Outcome {
    let rep = counterexample_run(&[257, 1025]).unwrap();
    let detail = format!(
        "L1 rel err {:.1e}, Tf0(1/4) = {:.6} (closed {:.6}), slope {:.4} (required [{}, {}]); grid Tf0(1/4): {}",
        rep.l1_rows.iter().map(|r| r.rel_err).fold(0.0, f64::max),
        rep.tf0_quarter,
        rep.tf0_quarter_closed,
        rep.slope,
        rep.slope_range[0],
        rep.slope_range[1],
        rep.grid_cross_check.iter().map(|g| format!("{}@{}", g.tf0_quarter, g.nodes)).collect::<Vec<_>>().join(", ")
    );
    let failed: Vec<&str> = rep.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    if rep.passed {
        Ok(detail)
    } else {
        Err(format!("{detail}; failed: {}", failed.join(", ")))
    }
}

fn criterion_7() -> Outcome {
    let norms = [NormKind::Lp(2.0), NormKind::W1p(2.0), NormKind::Lp(1.0), NormKind::W1p(1.0)];
    let ns = [1, 2, 4, 8, 16];
    let mut notes = Vec::new();
    let start = Instant::now();
    for (dim, nodes) in [(1usize, 1024usize), (2, 129)] {
        let d = unit(dim, nodes);
        let k = bump(dim);
        let eta = build_whitney_eta(&d, &d.theta(), 0.5).unwrap();
        let fam = Family::Standard { kernel: k, eta };
        for fx in [Fixture::sin(&d), Fixture::poly(&d)] {
            let rep = convergence_study(&fx, &fam, &ns, &norms).unwrap();
            let failed: Vec<String> =
                rep.checks.iter().filter(|c| !c.pass).map(|c| format!("{} ({:.3e} vs {:.3e})", c.name, c.lhs, c.rhs)).collect();
            ensure(rep.passed, format!("{dim}d {}: {}", fx.name, failed.join(", ")))?;
            let l2 = rep.errors("L2");
            let w12 = rep.errors("W12");
            notes.push(format!(
                "{dim}d {}: L2 ratio {:.3}, W12 ratio {:.3}",
                fx.name,
                l2[4] / l2[0],
                w12[4] / w12[0]
            ));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs <= 300.0, format!("runtime {secs:.1}s"))?;
    Ok(format!("{} ({secs:.1}s)", notes.join(", ")))
}

fn criterion_8() -> Outcome {
    let d = unit(1, 1024);
    let k = bump(1);
    let step = Fixture::step(&d);
    let q = quadratic_eta(&d, 0.1, &k).map_err(|e| e.to_string())?;
    let f = step.field();
    let tv_f = total_variation(&f);
    let cfg16 = modified_config(&q, &k, 16, 64).map_err(|e| e.to_string())?;
    let t16 = mollify_with(&*step.f, &cfg16).unwrap().field;
    let tv16 = total_variation(&t16);
    ensure((tv16 - 1.0).abs() <= 0.1, format!("TV(modified T_16 f) = {tv16}"))?;
    let fam_mod = Family::Modified { quadratic: q, smoothing: k.clone(), order: 64 };
    let rep_mod = convergence_study(&step, &fam_mod, &[2, 4, 8, 16], &[NormKind::Lp(1.0), NormKind::TV]).unwrap();
    ensure(rep_mod.passed, format!("modified study failed: {:?}", rep_mod.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>()))?;

    let eta = build_whitney_eta(&d, &d.theta(), 0.5).unwrap();
    let fam = Family::Standard { kernel: k, eta };
    let rep = convergence_study(&step, &fam, &[1, 2, 4, 8, 16], &[NormKind::Lp(1.0)]).unwrap();
    let l1 = rep.errors("L1");
    let tvs: Vec<f64> = rep.rows.iter().map(|r| r.tv).collect();
    let tv_ok = tvs.iter().all(|&t| t <= 1.5);
    ensure(rep.passed && tv_ok, format!("standard: L1 {l1:?}, TV {tvs:?}"))?;
    Ok(format!(
        "TV(f) = {tv_f}, TV(modified T_16 f) = {tv16:.6}; standard L1 error {:.2e} -> {:.2e}, max TV {:.4}",
        l1[0],
        l1[4],
        tvs.iter().cloned().fold(0.0, f64::max)
    ))
}

fn criterion_9() -> Outcome {
    let nodes = 1025;
    let d0 = Domain::<f64>::unit_box(1, nodes).unwrap();
    let mut delta = vec![false; nodes];
    delta[512] = true;
    let d = d0.with_delta(delta).unwrap().into_arc();
    let k = bump(1);
    let eta1 = build_whitney_eta(&d, &d.theta(), 0.25).unwrap();
    let boundary: Vec<bool> = (0..nodes).map(|i| !d.is_inside(i)).collect();
    let eta0 = build_whitney_eta(&d, &boundary, 0.25).unwrap();
    let pi = std::f64::consts::PI;
    let f = FnSampler::new(&d, move |p| (3.0 * pi * p[0]).sin() + (p[0] - 0.5).abs());
    let grad = FnVectorSampler::new(&d, move |p| {
        let s = p[0] - 0.5;
        let kink = if s == 0.0 { 0.0 } else { s.signum() };
        [3.0 * pi * (3.0 * pi * p[0]).cos() + kink, 0.0, 0.0]
    });
    let x = 0.5;
    let fx = f.at_node(512);
    let t1 = mollify_with(&f, &MollifierConfig::new(k.clone(), eta1.clone())).unwrap().field;
    let mut notes = Vec::new();
    for n in [4u32, 16, 64] {
        let tn = mollify_composite(&f, &eta1, &eta0, n, &k).unwrap();
        let r = eta0.values()[512] / n as f64;
        let osc = (0..=2000)
            .map(|j| {
                let y = x - r + 2.0 * r * j as f64 / 2000.0;
                (f.call(&[y, 0.0, 0.0]) - fx).abs()
            })
            .fold(0.0, f64::max);
        let err = (tn.values()[512] - fx).abs();
        ensure(err <= osc, format!("n={n}: |T^n f - f| = {err:e} > osc {osc:e}"))?;
        notes.push(format!("n={n}: {err:.2e}<={osc:.2e}"));
        if n == 64 {
            let off = (0..nodes).filter(|&i| i != 512).map(|i| (tn.values()[i] - t1.values()[i]).abs()).fold(0.0, f64::max);
            ensure(off <= 1e-3, format!("off-delta deviation {off:e}"))?;
            notes.push(format!("off-delta |T^64 f - T f| {off:.2e}"));
        }
    }
    let psi = psi_field(&f, &grad, &eta1, &eta0, None, &k).unwrap();
    ensure(psi.values()[512] == [0.0; 3], "psi nonzero on delta".into())?;
    Ok(format!("{}; psi = 0 on delta", notes.join(", ")))
}

fn density_block(
    label: &str,
    spec: &ConstraintSpec<f64>,
    f: &ScalarField<f64>,
    kernel: &Kernel<f64>,
    eta: &EtaProfile<f64>,
    truncated: bool,
) -> Result<String, String> {
    let ns = [1, 2, 4, 8, 16, 64];
    let rep = density_study(f, spec, eta, kernel, &ns, NormKind::W1p(2.0), truncated).map_err(|e| e.to_string())?;
    let failed: Vec<String> =
        rep.checks.iter().filter(|c| !c.pass).map(|c| format!("{} ({:.3e} vs {:.3e})", c.name, c.lhs, c.rhs)).collect();
    ensure(rep.passed, format!("{label}: {}", failed.join(", ")))?;
    let r64 = rep.rows.iter().find(|r| r.n == 64).unwrap();
    let first = &rep.rows[0];
    let last = rep.rows.iter().find(|r| r.n == 16).unwrap();
    let mut s = format!(
        "{label}: beta_64 {:.4}, |M_64-1|/|M_1-1| {:.3}, W12 err(16)/err(1) {:.3}, worst margin {:.1e} (slack {:.1e})",
        r64.beta,
        r64.m_sup / first.m_sup,
        last.error / first.error,
        rep.rows.iter().map(|r| r.margin).fold(f64::NEG_INFINITY, f64::max),
        feasibility_slack(spec)
    );
    if truncated {
        s += &format!(
            ", truncated L2 {:.2e} -> {:.2e}",
            first.truncated_error.unwrap(),
            r64.truncated_error.unwrap()
        );
    }
    Ok(s)
}

fn criterion_10() -> Outcome {
    let mut notes = Vec::new();
    // 1d, value constraint with the tent bound
    let d = unit(1, 1025);
    let k = make_kernel(Profile::Bump, 1, 64).unwrap();
    let spec = ConstraintSpec::new(ScalarField::from_fn(&d, |p| p[0].min(1.0 - p[0])), Mode::Value).unwrap();
    let (eta, _) = calibrated_setup(&spec, 0.5, 64, 3).map_err(|e| e.to_string())?;
    let f = spec.alpha.map(|v| 0.9 * v);
    notes.push(density_block("1d value", &spec, &f, &k, &eta, true)?);

    // 1d, gradient constraint: |f'| = 0.9 α
    let gspec = ConstraintSpec::new(spec.alpha.clone(), Mode::Gradient).unwrap();
    let prim = ScalarField::from_fn(&d, |p| {
        let x = p[0];
        0.9 * if x <= 0.5 { 0.5 * x * x } else { 0.25 - 0.5 * (1.0 - x) * (1.0 - x) }
    });
    let (geta, _) = calibrated_setup(&gspec, 0.5, 64, 3).map_err(|e| e.to_string())?;
    notes.push(density_block("1d gradient", &gspec, &prim, &k, &geta, false)?);

    // 2d, α = σ · dist to a disk, Δ = the disk
    let d2 = unit(2, 65);
    let (c, r) = ([0.5, 0.5], 0.2);
    let s2 = d2.clone();
    let alpha = ScalarField::from_fn(&d2, move |p| {
        let rho = ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt();
        s2.sigma_at(p) * (rho - r).max(0.0)
    });
    let spec2 = ConstraintSpec::new(alpha, Mode::Value).unwrap();
    let k2 = make_kernel(Profile::Bump, 2, 32).unwrap();
    let (eta2, _) = calibrated_setup(&spec2, 0.5, 64, 3).map_err(|e| e.to_string())?;
    let f2 = spec2.alpha.map(|v| 0.9 * v);
    let disk_nodes = spec2.delta().iter().filter(|&&b| b).count();
    notes.push(density_block(&format!("2d value ({disk_nodes} disk nodes)"), &spec2, &f2, &k2, &eta2, true)?);
    Ok(notes.join("; "))
}

fn criterion_11() -> Outcome {
    let run = |threads: usize| -> String {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| serde_json::to_string_pretty(&mollikit::selftest::run(42).unwrap()).unwrap())
    };
    let a = run(1);
    let b = run(8);
    ensure(a == b, "selftest reports differ between 1 and 8 threads".into())?;
    Ok(format!("selftest reports identical ({} bytes)", a.len()))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("exactness", criterion_1),
        ("gradient formula", criterion_2),
        ("regularized distance", criterion_3),
        ("weak-L1 inequality", criterion_4),
        ("L1 operator norm", criterion_5),
        ("counterexample", criterion_6),
        ("convergence", criterion_7),
        ("bounded variation", criterion_8),
        ("composite operator", criterion_9),
        ("density and feasibility", criterion_10),
        ("determinism", criterion_11),
    ];
    let mut failed = Vec::new();
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({secs:.1}s) {detail}", k + 1),
            Err(detail) => {
                println!("criterion {:>2} {name}: FAIL ({secs:.1}s) {detail}", k + 1);
                failed.push(k + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
