use std::collections::BTreeMap;

use serde::Serialize;

use super::fixtures::{Fixture, Regularity};
use super::norms::{distance, total_variation, NormKind};
use crate::error::Result;
use crate::eta::EtaProfile;
use crate::geometry::{boundary_shell, Sampler, VectorField};
use crate::kernels::Kernel;
use crate::mollify::{modified_config, mollify_gradient, mollify_with, zeta, MollifierConfig};
use crate::scalar::{from_usize, lit, to_f64, Scalar};

/// One inequality `lhs ≤ rhs + slack` with both sides recorded.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct BoundCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
}

impl BoundCheck {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, slack: f64) -> Self {
        let pass = lhs <= rhs + slack;
        Self { name: name.into(), lhs, rhs, slack, pass }
    }

    /// Additionally requires `cond`.
    pub fn require(mut self, cond: bool) -> Self {
        self.pass &= cond;
        self
    }
}

/// Operator family indexed by n.
#[derive(Clone, Debug)]
pub enum Family<S: Scalar> {
    /// Tₙ: step η/n.
    Standard { kernel: Kernel<S>, eta: EtaProfile<S> },
    /// T̃ₙ: plateau kernel ρₙ of the given quadrature order, step ηₙ/n built from a
    /// quadratic profile with the smoothing kernel.
    Modified { quadratic: EtaProfile<S>, smoothing: Kernel<S>, order: usize },
}

impl<S: Scalar> Family<S> {
    pub fn config(&self, n: u32) -> Result<MollifierConfig<S>> {
        match self {
            Family::Standard { kernel, eta } => Ok(MollifierConfig::new(kernel.clone(), eta.clone()).with_n(n)),
            Family::Modified { quadratic, smoothing, order } => modified_config(quadratic, smoothing, n, *order),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Standard { .. } => "standard",
            Family::Modified { .. } => "modified",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StudyRow {
    pub n: u32,
    /// ‖Tₙf − f‖ per norm name (|TV(Tₙf) − TV(f)| under "TV").
    pub errors: BTreeMap<String, f64>,
    pub tv: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StudyReport {
    pub fixture: String,
    pub variant: String,
    pub n_values: Vec<u32>,
    pub rows: Vec<StudyRow>,
    pub checks: Vec<BoundCheck>,
    pub passed: bool,
}

impl StudyReport {
    pub fn strip_timing(&mut self) {
        for r in &mut self.rows {
            r.runtime_ms = None;
        }
    }

    pub fn errors(&self, norm: &str) -> Vec<f64> {
        self.rows.iter().map(|r| r.errors.get(norm).copied().unwrap_or(f64::NAN)).collect()
    }

    /// `n,<norm>...,tv` table.
    pub fn to_csv(&self) -> String {
        let names: Vec<&String> = self.rows.first().map(|r| r.errors.keys().collect()).unwrap_or_default();
        let mut out = String::from("n");
        for n in &names {
            out += &format!(",{n}");
        }
        out += ",tv\n";
        for r in &self.rows {
            out += &r.n.to_string();
            for n in &names {
                out += &format!(",{:e}", r.errors[*n]);
            }
            out += &format!(",{:e}\n", r.tv);
        }
        out
    }
}

/// Monotone decrease within 5 % between consecutive n and a final error at most
/// 0.3× the first.
pub fn decay_checks(label: &str, errs: &[f64]) -> Vec<BoundCheck> {
    let mut out = Vec::new();
    for (k, w) in errs.windows(2).enumerate() {
        out.push(BoundCheck::new(format!("{label} step {k} within 5%"), w[1], 1.05 * w[0], 1e-12));
    }
    if let (Some(&first), Some(&last)) = (errs.first(), errs.last()) {
        out.push(BoundCheck::new(format!("{label} final <= 0.3 x first"), last, 0.3 * first, 1e-12));
    }
    out
}

/// Errors of Tₙf against f for each n and norm. W^{1,p} errors use the exact
/// gradient formula when the fixture has a closed-form gradient.
pub fn convergence_study<S: Scalar>(
    fixture: &Fixture<S>,
    family: &Family<S>,
    n_list: &[u32],
    norms: &[NormKind],
) -> Result<StudyReport> {
    let f = fixture.field();
    let tv_f = total_variation(&f);
    let want_grad = norms.iter().any(|k| matches!(k, NormKind::W1p(_)));
    let exact_df: Option<VectorField<S>> = match (&fixture.grad, want_grad) {
        (Some(g), true) => {
            let d = f.domain();
            Some(VectorField::new(d.clone(), (0..d.len()).map(|i| g.at_node(i)).collect())?)
        }
        _ => None,
    };
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for &n in n_list {
        let cfg = family.config(n)?;
        let out = mollify_with(&*fixture.f, &cfg)?;
        let tf = out.field;
        let dtf = match (&fixture.grad, &exact_df) {
            (Some(g), Some(_)) => Some(mollify_gradient(&*fixture.f, &**g, &cfg)?),
            _ => None,
        };
        let mut errors = BTreeMap::new();
        for &k in norms {
            let grads = dtf.as_ref().zip(exact_df.as_ref());
            errors.insert(k.to_string(), to_f64(distance(&tf, &f, k, grads)?));
        }
        let tv = total_variation(&tf);
        if fixture.regularity == Regularity::Bv {
            match family {
                Family::Modified { .. } => {
                    let z = zeta(n, cfg.eta.grad_bound);
                    checks.push(BoundCheck::new(
                        format!("n={n} |TV(Tf) - TV(f)| <= zeta_n TV(f)"),
                        to_f64((tv - tv_f).abs()),
                        to_f64(z * tv_f),
                        0.0,
                    ));
                }
                Family::Standard { .. } => checks.push(BoundCheck::new(
                    format!("n={n} TV(Tf) <= 1.5 TV(f)"),
                    to_f64(tv),
                    to_f64(lit::<S>(1.5) * tv_f),
                    0.0,
                )),
            }
        }
        rows.push(StudyRow { n, errors, tv: to_f64(tv), runtime_ms: out.report.runtime_ms });
    }
    for &k in norms {
        if k == NormKind::TV {
            continue;
        }
        let name = k.to_string();
        let errs: Vec<f64> = rows.iter().map(|r| r.errors[&name]).collect();
        checks.extend(decay_checks(&name, &errs));
    }
    let passed = checks.iter().all(|c| c.pass);
    Ok(StudyReport {
        fixture: fixture.name.clone(),
        variant: family.name().into(),
        n_values: n_list.to_vec(),
        rows,
        checks,
        passed,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceRow {
    pub width_cells: usize,
    pub width: f64,
    pub nodes: usize,
    pub max_error: f64,
    pub oscillation_bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceReport {
    pub rows: Vec<TraceRow>,
    pub passed: bool,
}

/// On the shells {σ ≤ w}, w ∈ {4h, 8h, 16h}: max |Tf − f| against the largest
/// sampled oscillation |f(x − s z_k) − f(x)| over the shell.
pub fn trace_check<S: Scalar, F: Sampler<S> + ?Sized>(f: &F, cfg: &MollifierConfig<S>) -> Result<TraceReport> {
    let tf = mollify_with(f, cfg)?.field;
    let d = cfg.domain();
    let g = d.grid();
    let steps = cfg.steps();
    let h = g.h_max();
    let mut rows = Vec::new();
    for cells in [4usize, 8, 16] {
        let w = from_usize::<S>(cells) * h;
        let shell = boundary_shell(d, w);
        let mut err = S::zero();
        let mut osc = S::zero();
        for &i in &shell {
            let fx = f.at_node(i);
            err = err.max((tf.values()[i] - fx).abs());
            let x = g.point(i);
            for z in cfg.kernel.nodes() {
                let p = [x[0] - steps[i] * z[0], x[1] - steps[i] * z[1], x[2] - steps[i] * z[2]];
                osc = osc.max((f.eval(&p)? - fx).abs());
            }
        }
        let pass = err <= osc + lit(1e-14);
        rows.push(TraceRow {
            width_cells: cells,
            width: to_f64(w),
            nodes: shell.len(),
            max_error: to_f64(err),
            oscillation_bound: to_f64(osc),
            pass,
        });
    }
    let passed = rows.iter().all(|r| r.pass);
    Ok(TraceReport { rows, passed })
}
