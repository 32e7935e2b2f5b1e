//! The variable-step mollifier T, its families Tₙ, T̃ₙ and Tⁿ, and the analytic
//! gradient of Tf.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::eta::EtaProfile;
use crate::geometry::{
    norm, Component, Domain, Magnitude, Point, Sampler, ScalarField, VectorField, VectorSampler,
};
use crate::kernels::{make_kernel, Kernel, Profile};
use crate::scalar::{from_usize, lit, to_f64, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Variant {
    Standard,
    /// Plateau kernel ρₙ with the squared regularized step ηₙ.
    Modified(u32),
}

/// Operator configuration. The effective step is `η/n` (or `η` when `n` is
/// `None`); with a composite `eta0` it is `η + η⁰/n`.
#[derive(Clone, Debug)]
pub struct MollifierConfig<S: Scalar> {
    pub kernel: Kernel<S>,
    pub eta: EtaProfile<S>,
    pub n: Option<u32>,
    pub variant: Variant,
    pub eta0: Option<EtaProfile<S>>,
    /// Permit s(x) = σ(x) (closed balls touching ∂Ω). Only the counterexample needs this.
    pub allow_touch: bool,
    /// Return f(x) unchanged where the step is below the sampler's resolution.
    pub subgrid_identity: bool,
}

impl<S: Scalar> MollifierConfig<S> {
    pub fn new(kernel: Kernel<S>, eta: EtaProfile<S>) -> Self {
        Self {
            kernel,
            eta,
            n: None,
            variant: Variant::Standard,
            eta0: None,
            allow_touch: false,
            subgrid_identity: true,
        }
    }

    pub fn with_n(mut self, n: u32) -> Self {
        self.n = Some(n);
        self
    }

    /// Tⁿ with step η¹ + η⁰/n.
    pub fn composite(kernel: Kernel<S>, eta1: EtaProfile<S>, eta0: EtaProfile<S>, n: u32) -> Self {
        let mut c = Self::new(kernel, eta1);
        c.eta0 = Some(eta0);
        c.n = Some(n);
        c
    }

    pub fn domain(&self) -> &Arc<Domain<S>> {
        self.eta.field.domain()
    }

    pub fn divisor(&self) -> S {
        from_usize(self.n.unwrap_or(1) as usize)
    }

    /// s(x) at every node.
    pub fn steps(&self) -> Vec<S> {
        let inv = S::one() / self.divisor();
        let e = self.eta.field.values();
        match &self.eta0 {
            None => e.iter().map(|&v| v * inv).collect(),
            Some(e0) => e
                .iter()
                .zip(e0.field.values())
                .map(|(&a, &b)| a + b * inv)
                .collect(),
        }
    }

    pub fn step_field(&self) -> ScalarField<S> {
        ScalarField::new(self.domain().clone(), self.steps()).expect("steps live on the eta grid")
    }

    fn validate(&self, steps: &[S]) -> Result<()> {
        let d = self.domain();
        if self.kernel.dim() != d.dim() {
            return Err(Error::InvalidParameter(format!(
                "kernel dimension {} differs from domain dimension {}",
                self.kernel.dim(),
                d.dim()
            )));
        }
        if let Some(e0) = &self.eta0 {
            if !e0.field.same_grid(&self.eta.field) {
                return Err(Error::GridMismatch);
            }
            if self.n.is_none() {
                return Err(Error::InvalidParameter("composite operator needs n".into()));
            }
        }
        if matches!(self.n, Some(0)) {
            return Err(Error::InvalidParameter("n must be positive".into()));
        }
        if self.kernel.profile() == Profile::Box && !self.allow_touch {
            return Err(Error::InvalidParameter(
                "the box profile is reserved for the counterexample runner".into(),
            ));
        }
        let sigma = d.sigma();
        for i in 0..d.len() {
            if !d.is_inside(i) {
                continue;
            }
            let s = steps[i];
            let bad = if self.allow_touch { s > sigma[i] } else { s >= sigma[i] && s > S::zero() };
            if bad || s < S::zero() || !s.is_finite() {
                return Err(Error::StepViolation { node: i, step: to_f64(s), sigma: to_f64(sigma[i]) });
            }
        }
        Ok(())
    }

    fn engine<'a>(&'a self, steps: &'a [S]) -> Engine<'a, S> {
        Engine {
            kernel: &self.kernel,
            domain: self.domain(),
            steps,
            subgrid: self.subgrid_identity,
        }
    }
}

/// How a node is treated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum NodeRule {
    Outside,
    Identity,
    Subgrid,
    Mollify,
}

pub(crate) struct Engine<'a, S: Scalar> {
    pub kernel: &'a Kernel<S>,
    pub domain: &'a Arc<Domain<S>>,
    pub steps: &'a [S],
    pub subgrid: bool,
}

impl<S: Scalar> Engine<'_, S> {
    pub fn rule(&self, i: usize, resolution: S) -> NodeRule {
        if !self.domain.is_inside(i) {
            NodeRule::Outside
        } else if self.steps[i] == S::zero() {
            NodeRule::Identity
        } else if self.subgrid && self.steps[i] < resolution {
            NodeRule::Subgrid
        } else {
            NodeRule::Mollify
        }
    }

    /// Visits the quadrature samples of node `i` in pair order: the callback gets
    /// the tap index and sample point.
    #[inline]
    fn samples(&self, i: usize, mut visit: impl FnMut(usize, &Point<S>) -> Result<()>) -> Result<()> {
        let x = self.domain.grid().point(i);
        let s = self.steps[i];
        for (k, z) in self.kernel.nodes().iter().enumerate() {
            let p = [x[0] - s * z[0], x[1] - s * z[1], x[2] - s * z[2]];
            visit(k, &p).map_err(|e| match e {
                Error::OutOfDomain { point } => Error::SampleOutside { node: i, tap: k, point },
                other => other,
            })?;
        }
        Ok(())
    }

    /// Σ_k tap_k f(x − s z_k), clamped to the sample range.
    pub fn value<F: Sampler<S> + ?Sized>(&self, f: &F, i: usize) -> Result<S> {
        let taps = self.kernel.taps();
        let mut acc = S::zero();
        let mut lo = S::infinity();
        let mut hi = S::neg_infinity();
        let mut pending = S::zero();
        self.samples(i, |k, p| {
            let v = f.eval(p)?;
            lo = lo.min(v);
            hi = hi.max(v);
            // pair members are adjacent and share a tap weight
            if k % 2 == 0 && k + 1 < taps.len() {
                pending = v;
            } else if k % 2 == 1 {
                acc += taps[k] * (pending + v);
            } else {
                acc += taps[k] * v;
            }
            Ok(())
        })?;
        Ok(acc.max(lo).min(hi))
    }

    pub fn apply<F: Sampler<S> + ?Sized>(&self, f: &F) -> Result<(Vec<S>, Vec<NodeRule>)> {
        let res = f.resolution();
        let out: Vec<Result<(S, NodeRule)>> = (0..self.domain.len())
            .into_par_iter()
            .map(|i| {
                let rule = self.rule(i, res);
                let v = match rule {
                    NodeRule::Mollify => self.value(f, i)?,
                    _ => f.at_node(i),
                };
                Ok((v, rule))
            })
            .collect();
        let mut vals = Vec::with_capacity(out.len());
        let mut rules = Vec::with_capacity(out.len());
        for r in out {
            let (v, rule) = r?;
            vals.push(v);
            rules.push(rule);
        }
        Ok((vals, rules))
    }

    /// Quadrature pieces of the gradient at node `i`: (T∇f, q, T|∇f|) where
    /// q = Σ tap (−z)·∇f(x − s z).
    pub fn gradient_terms<G: VectorSampler<S> + ?Sized>(
        &self,
        gf: &G,
        i: usize,
    ) -> Result<(Point<S>, S, S)> {
        let taps = self.kernel.taps();
        let nodes = self.kernel.nodes();
        let mut tg = [S::zero(); 3];
        let mut q = S::zero();
        let mut ta = S::zero();
        self.samples(i, |k, p| {
            let g = gf.eval(p)?;
            let w = taps[k];
            let z = &nodes[k];
            tg[0] += w * g[0];
            tg[1] += w * g[1];
            tg[2] += w * g[2];
            q -= w * (z[0] * g[0] + z[1] * g[1] + z[2] * g[2]);
            ta += w * norm(&g);
            Ok(())
        })?;
        Ok((tg, q, ta))
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct MollifyReport {
    /// max|Tf| / max|f| over inside nodes (1 when f ≡ 0).
    pub sup_ratio: f64,
    pub identity_nodes: usize,
    pub flagged_subgrid_nodes: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Mollified<S: Scalar> {
    pub field: ScalarField<S>,
    pub report: MollifyReport,
    /// Inside nodes left unchanged because the step was below grid resolution.
    pub subgrid_nodes: Vec<usize>,
}

/// Tf on the grid of `f`.
pub fn mollify<S: Scalar>(f: &ScalarField<S>, cfg: &MollifierConfig<S>) -> Result<ScalarField<S>> {
    Ok(mollify_with(f, cfg)?.field)
}

/// Tf for any sampler, with the per-run report.
pub fn mollify_with<S: Scalar, F: Sampler<S> + ?Sized>(f: &F, cfg: &MollifierConfig<S>) -> Result<Mollified<S>> {
    let start = std::time::Instant::now();
    let steps = cfg.steps();
    cfg.validate(&steps)?;
    if f.domain().grid() != cfg.domain().grid() {
        return Err(Error::GridMismatch);
    }
    let (vals, rules) = cfg.engine(&steps).apply(f)?;
    let d = cfg.domain();
    let mut fmax = S::zero();
    let mut tmax = S::zero();
    let mut identity = 0;
    let mut subgrid = Vec::new();
    for i in 0..d.len() {
        if !d.is_inside(i) {
            continue;
        }
        fmax = fmax.max(f.at_node(i).abs());
        tmax = tmax.max(vals[i].abs());
        match rules[i] {
            NodeRule::Identity => identity += 1,
            NodeRule::Subgrid => subgrid.push(i),
            _ => {}
        }
    }
    let sup_ratio = if fmax == S::zero() { 1.0 } else { to_f64(tmax / fmax) };
    let report = MollifyReport {
        sup_ratio,
        identity_nodes: identity,
        flagged_subgrid_nodes: subgrid.len(),
        runtime_ms: Some(start.elapsed().as_secs_f64() * 1e3),
    };
    Ok(Mollified { field: ScalarField::new(d.clone(), vals)?, report, subgrid_nodes: subgrid })
}

/// Componentwise T of a vector field, using `resolution` for the subgrid rule.
pub fn mollify_vector<S: Scalar, G: VectorSampler<S> + ?Sized>(
    g: &G,
    cfg: &MollifierConfig<S>,
) -> Result<VectorField<S>> {
    let comps = (0..cfg.domain().dim())
        .map(|axis| {
            let c = Component { inner: g, axis, resolution: g.resolution() };
            mollify_with(&c, cfg).map(|m| m.field)
        })
        .collect::<Result<Vec<_>>>()?;
    VectorField::from_components(&comps)
}

/// Pieces of ∇Tf at every node.
#[derive(Clone, Debug)]
pub struct GradientParts<S: Scalar> {
    /// ∇Tf = T(∇f) + q ∇s.
    pub grad: VectorField<S>,
    /// T(∇f).
    pub t_grad: VectorField<S>,
    /// q ∇s, the step-variation term.
    pub correction: VectorField<S>,
    /// T(|∇f|).
    pub t_abs: ScalarField<S>,
    /// |∇s| from difference quotients of the step field.
    pub step_slope: ScalarField<S>,
}

/// ∇Tf = T(∇f) + ∇s · Σ_k tap_k (−z_k)ᵀ∇f(x − s z_k), with ∇s from difference
/// quotients of the step field. Nodes left unchanged by T return ∇f(x).
pub fn gradient_parts<S: Scalar, F: Sampler<S> + ?Sized, G: VectorSampler<S> + ?Sized>(
    f: &F,
    grad_f: &G,
    cfg: &MollifierConfig<S>,
) -> Result<GradientParts<S>> {
    let steps = cfg.steps();
    cfg.validate(&steps)?;
    let engine = cfg.engine(&steps);
    let step_field = cfg.step_field();
    let d = cfg.domain().clone();
    let dim = d.dim();
    let res = f.resolution();
    type Row<S> = (Point<S>, Point<S>, Point<S>, S, S);
    let rows: Vec<Result<Row<S>>> = (0..d.len())
        .into_par_iter()
        .map(|i| {
            let mut ds = [S::zero(); 3];
            for (a, v) in ds.iter_mut().enumerate().take(dim) {
                *v = step_field.partial(i, a);
            }
            let slope = norm(&ds);
            match engine.rule(i, res) {
                NodeRule::Mollify => {
                    let (tg, q, ta) = engine.gradient_terms(grad_f, i)?;
                    let corr = [q * ds[0], q * ds[1], q * ds[2]];
                    let g = [tg[0] + corr[0], tg[1] + corr[1], tg[2] + corr[2]];
                    Ok((g, tg, corr, ta, slope))
                }
                _ => {
                    let g = grad_f.at_node(i);
                    Ok((g, g, [S::zero(); 3], norm(&g), slope))
                }
            }
        })
        .collect();
    let mut grad = Vec::with_capacity(rows.len());
    let mut tgrad = Vec::with_capacity(rows.len());
    let mut corr = Vec::with_capacity(rows.len());
    let mut tabs = Vec::with_capacity(rows.len());
    let mut slope = Vec::with_capacity(rows.len());
    for r in rows {
        let (g, t, c, a, s) = r?;
        grad.push(g);
        tgrad.push(t);
        corr.push(c);
        tabs.push(a);
        slope.push(s);
    }
    Ok(GradientParts {
        grad: VectorField::new(d.clone(), grad)?,
        t_grad: VectorField::new(d.clone(), tgrad)?,
        correction: VectorField::new(d.clone(), corr)?,
        t_abs: ScalarField::new(d.clone(), tabs)?,
        step_slope: ScalarField::new(d, slope)?,
    })
}

pub fn mollify_gradient<S: Scalar, F: Sampler<S> + ?Sized, G: VectorSampler<S> + ?Sized>(
    f: &F,
    grad_f: &G,
    cfg: &MollifierConfig<S>,
) -> Result<VectorField<S>> {
    Ok(gradient_parts(f, grad_f, cfg)?.grad)
}

#[derive(Clone, Debug, Serialize)]
pub struct GradientBoundReport {
    pub nodes_checked: usize,
    /// |∇Tf| ≤ |T∇f| + |∇s| T|∇f| failures.
    pub total_bound_violations: usize,
    /// |∇Tf − T∇f| ≤ |∇s| T|∇f| failures.
    pub deviation_bound_violations: usize,
    /// Smallest (rhs + slack − lhs) over both inequalities; negative means a violation.
    pub worst_margin: f64,
    pub worst_node: Option<usize>,
    pub slack: f64,
}

impl GradientBoundReport {
    pub fn passed(&self) -> bool {
        self.total_bound_violations == 0 && self.deviation_bound_violations == 0
    }
}

/// Checks the pointwise gradient bounds at every inside node, with ∇Tf taken as
/// difference quotients of the computed Tf (independent of the quadrature
/// formula) and slack 1e−8 + 5h.
pub fn pointwise_gradient_bound_check<S: Scalar, F: Sampler<S> + ?Sized, G: VectorSampler<S> + ?Sized>(
    f: &F,
    grad_f: &G,
    cfg: &MollifierConfig<S>,
) -> Result<GradientBoundReport> {
    let tf = mollify_with(f, cfg)?.field;
    let dtf = tf.gradient();
    let parts = gradient_parts(f, grad_f, cfg)?;
    let d = cfg.domain();
    let slack = lit::<S>(1e-8) + lit::<S>(5.0) * d.grid().h_max();
    let mut report = GradientBoundReport {
        nodes_checked: 0,
        total_bound_violations: 0,
        deviation_bound_violations: 0,
        worst_margin: f64::INFINITY,
        worst_node: None,
        slack: to_f64(slack),
    };
    for i in 0..d.len() {
        if !d.is_inside(i) {
            continue;
        }
        report.nodes_checked += 1;
        let g = dtf.values()[i];
        let t = parts.t_grad.values()[i];
        let rhs_extra = parts.step_slope.values()[i] * parts.t_abs.values()[i];
        let m1 = norm(&t) + rhs_extra + slack - norm(&g);
        let dev = [g[0] - t[0], g[1] - t[1], g[2] - t[2]];
        let m2 = rhs_extra + slack - norm(&dev);
        if m1 < S::zero() {
            report.total_bound_violations += 1;
        }
        if m2 < S::zero() {
            report.deviation_bound_violations += 1;
        }
        let m = to_f64(m1.min(m2));
        if m < report.worst_margin {
            report.worst_margin = m;
            report.worst_node = Some(i);
        }
    }
    Ok(report)
}

/// Same check with ∇f from difference quotients of `f`.
pub fn pointwise_gradient_bound_check_field<S: Scalar>(
    f: &ScalarField<S>,
    cfg: &MollifierConfig<S>,
) -> Result<GradientBoundReport> {
    let g = f.gradient();
    pointwise_gradient_bound_check(f, &g, cfg)
}

/// Tⁿf with step η¹ + η⁰/n.
pub fn mollify_composite<S: Scalar, F: Sampler<S> + ?Sized>(
    f: &F,
    eta1: &EtaProfile<S>,
    eta0: &EtaProfile<S>,
    n: u32,
    kernel: &Kernel<S>,
) -> Result<ScalarField<S>> {
    let cfg = MollifierConfig::composite(kernel.clone(), eta1.clone(), eta0.clone(), n);
    Ok(mollify_with(f, &cfg)?.field)
}

/// ψₙ = ∇s · Σ tap (−z)ᵀ∇f(x − s z) with s = η¹ + η⁰/n, or its limit ψ (step η¹)
/// when `n` is `None`. ψ vanishes wherever the step does, in particular on Δ.
pub fn psi_field<S: Scalar, F: Sampler<S> + ?Sized, G: VectorSampler<S> + ?Sized>(
    f: &F,
    grad_f: &G,
    eta1: &EtaProfile<S>,
    eta0: &EtaProfile<S>,
    n: Option<u32>,
    kernel: &Kernel<S>,
) -> Result<VectorField<S>> {
    let cfg = match n {
        Some(n) => MollifierConfig::composite(kernel.clone(), eta1.clone(), eta0.clone(), n),
        None => MollifierConfig::new(kernel.clone(), eta1.clone()),
    };
    Ok(gradient_parts(f, grad_f, &cfg)?.correction)
}

/// T̃ₙ: plateau kernel ρₙ and step ηₙ/n with ηₙ = (Tₙσ)² built from a quadratic
/// step profile.
pub fn modified_config<S: Scalar>(
    quadratic: &EtaProfile<S>,
    smoothing_kernel: &Kernel<S>,
    n: u32,
    order: usize,
) -> Result<MollifierConfig<S>> {
    let eta_n = crate::eta::modified_eta(quadratic, smoothing_kernel, n)?;
    let kernel = make_kernel(Profile::Plateau(n), quadratic.field.domain().dim(), order)?;
    let mut cfg = MollifierConfig::new(kernel, eta_n).with_n(n);
    cfg.variant = Variant::Modified(n);
    Ok(cfg)
}

/// ζₙ = 1/(1 − 1/n) − 1 + max|∇ηₙ|/n + 0.05, the relative TV tolerance of T̃ₙ.
pub fn zeta<S: Scalar>(n: u32, eta_n_grad_bound: S) -> S {
    let nn = from_usize::<S>(n as usize);
    S::one() / (S::one() - S::one() / nn) - S::one() + eta_n_grad_bound / nn + lit(0.05)
}

/// Magnitude view of a vector sampler, for T(|∇f|).
pub fn mollify_magnitude<S: Scalar, G: VectorSampler<S> + ?Sized>(
    g: &G,
    cfg: &MollifierConfig<S>,
) -> Result<ScalarField<S>> {
    let m = Magnitude { inner: g, resolution: g.resolution() };
    Ok(mollify_with(&m, cfg)?.field)
}

#[cfg(test)]
mod tests;
