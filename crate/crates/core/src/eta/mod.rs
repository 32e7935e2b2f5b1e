//! Step functions η: the smoothed Whitney-type profile, the regularized distance
//! η̃ = Tσ, its quadratic-decay square, the modulus-calibrated profile, and the
//! squared profiles ηₙ of the modified family.

mod modulus;

use std::sync::Arc;

use serde::Serialize;

pub use modulus::{estimate_modulus, modulus_floor, ModulusOfContinuity};

use crate::error::{Error, Result};
use crate::geometry::{theta_shell, Domain, FnSampler, ScalarField, Shape};
use crate::kernels::{make_kernel, Kernel, Profile};
use crate::mollify::Engine;
use crate::scalar::{from_usize, lit, to_f64, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Decay {
    Linear,
    Quadratic,
    Calibrated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Builder {
    Whitney,
    Regdist,
    Quadratic,
    Calibrated,
    Modified,
    Custom,
}

impl Builder {
    pub fn name(self) -> &'static str {
        match self {
            Builder::Whitney => "whitney",
            Builder::Regdist => "regdist",
            Builder::Quadratic => "quadratic",
            Builder::Calibrated => "calibrated",
            Builder::Modified => "modified",
            Builder::Custom => "custom",
        }
    }
}

/// A step function on the grid together with what has been certified about it.
#[derive(Clone, Debug)]
pub struct EtaProfile<S: Scalar> {
    pub field: ScalarField<S>,
    /// sup |∇η| over inside nodes (difference quotients).
    pub grad_bound: S,
    pub decay: Decay,
    /// Lower constant κ of κσ² ≤ η ≤ σ² for quadratic profiles.
    pub kappa: Option<S>,
    /// Zero set Θ as a node mask.
    pub theta: Vec<bool>,
    /// dist(·, Θ) at nodes.
    pub theta_dist: Vec<S>,
    pub builder: Builder,
    pub epsilon: Option<S>,
}

impl<S: Scalar> EtaProfile<S> {
    /// Wraps a user field. Θ is taken as the nodes outside Ω plus the inside
    /// nodes where the field vanishes.
    pub fn from_field(field: ScalarField<S>) -> Result<Self> {
        let d = field.domain().clone();
        let v = field.values();
        if let Some(i) = (0..d.len()).find(|&i| d.is_inside(i) && !(v[i] >= S::zero() && v[i].is_finite())) {
            return Err(Error::InvalidParameter(format!("eta is negative or not finite at node {i}")));
        }
        let theta: Vec<bool> = (0..d.len()).map(|i| !d.is_inside(i) || v[i] == S::zero()).collect();
        let theta_dist = theta_distance_for(&d, &theta)?;
        let mut field = field;
        for i in 0..d.len() {
            if !d.is_inside(i) {
                field.values_mut()[i] = S::zero();
            }
        }
        let grad_bound = max_slope(&field);
        Ok(Self {
            field,
            grad_bound,
            decay: Decay::Linear,
            kappa: None,
            theta,
            theta_dist,
            builder: Builder::Custom,
            epsilon: None,
        })
    }

    /// Constant step `c` at inside nodes (diagnostic use only: it does not vanish
    /// on ∂Ω).
    pub fn constant(domain: &Arc<Domain<S>>, c: S) -> Self {
        let values = (0..domain.len())
            .map(|i| if domain.is_inside(i) { c } else { S::zero() })
            .collect();
        let theta: Vec<bool> = (0..domain.len()).map(|i| !domain.is_inside(i)).collect();
        Self {
            field: ScalarField::new(domain.clone(), values).expect("grid"),
            grad_bound: S::zero(),
            decay: Decay::Linear,
            kappa: None,
            theta_dist: domain.sigma().to_vec(),
            theta,
            builder: Builder::Custom,
            epsilon: None,
        }
    }

    pub fn domain(&self) -> &Arc<Domain<S>> {
        self.field.domain()
    }

    pub fn values(&self) -> &[S] {
        self.field.values()
    }
}

/// Max difference-quotient slope |∇η| over inside nodes.
pub fn max_slope<S: Scalar>(field: &ScalarField<S>) -> S {
    let d = field.domain();
    let dim = d.dim();
    (0..d.len())
        .filter(|&i| d.is_inside(i))
        .map(|i| {
            (0..dim)
                .map(|a| {
                    let p = field.partial(i, a);
                    p * p
                })
                .sum::<S>()
                .sqrt()
        })
        .fold(S::zero(), S::max)
}

/// dist(·, Θ) at nodes for a node set Θ that contains every node outside Ω.
fn theta_distance_for<S: Scalar>(domain: &Arc<Domain<S>>, theta: &[bool]) -> Result<Vec<S>> {
    if theta.len() != domain.len() {
        return Err(Error::GridMismatch);
    }
    if let Some(i) = (0..domain.len()).find(|&i| !domain.is_inside(i) && !theta[i]) {
        return Err(Error::InvalidParameter(format!(
            "Θ must contain every boundary node (missing node {i})"
        )));
    }
    let same = (0..domain.len()).all(|i| theta[i] == (!domain.is_inside(i) || domain.delta()[i]));
    if same {
        return Ok(domain.theta_distance().to_vec());
    }
    let delta: Vec<bool> = (0..domain.len()).map(|i| theta[i] && domain.is_inside(i)).collect();
    let tmp = (**domain).clone().with_delta(delta)?;
    Ok(tmp.theta_distance().to_vec())
}

/// Domain whose Δ is `theta ∩ Ω`, for sampling dist(·, Θ) off the grid.
fn domain_with_theta<S: Scalar>(domain: &Arc<Domain<S>>, theta: &[bool]) -> Result<Arc<Domain<S>>> {
    let delta: Vec<bool> = (0..domain.len()).map(|i| theta[i] && domain.is_inside(i)).collect();
    if delta == domain.delta() {
        return Ok(domain.clone());
    }
    Ok((**domain).clone().with_delta(delta)?.into_arc())
}

/// Quadrature order of the internal smoothing passes.
fn smoothing_order(dim: usize) -> usize {
    match dim {
        1 => 32,
        2 => 12,
        _ => 6,
    }
}

/// Smoothed, flattened distance profile with η ≤ ε·dist(·,Θ), slope ≤ ε, η > 0 off
/// Θ and η = 0 on Θ.
///
/// d = dist(·,Θ) is mollified twice with step εd/2, clamped below
/// ε·d·(1 − 1e−6), multiplied by exp(−(ℓ/d)²) so that difference quotients
/// vanish to O(h) within two grid shells of Θ, and finally rescaled if the slope
/// exceeds ε.
pub fn build_whitney_eta<S: Scalar>(
    domain: &Arc<Domain<S>>,
    theta: &[bool],
    epsilon: S,
) -> Result<EtaProfile<S>> {
    if !(epsilon > S::zero() && epsilon <= lit(0.5)) {
        return Err(Error::InvalidParameter(format!(
            "epsilon {} outside (0, 1/2]",
            to_f64(epsilon)
        )));
    }
    let dist = theta_distance_for(domain, theta)?;
    let dom_t = domain_with_theta(domain, theta)?;
    let g = domain.grid();
    let n = domain.len();
    let kernel = make_kernel::<S>(Profile::Bump, domain.dim(), smoothing_order(domain.dim()))?;
    let half_eps = epsilon * lit(0.5);
    let steps: Vec<S> = (0..n)
        .map(|i| if theta[i] { S::zero() } else { half_eps * dist[i] })
        .collect();
    let engine = Engine { kernel: &kernel, domain, steps: &steps, subgrid: false };

    let analytic = !dom_t.has_delta() && !matches!(domain.shape(), Shape::Mask);
    let first = if analytic {
        let dt = dom_t.clone();
        let s = FnSampler::new(domain, move |p| dt.theta_distance_at(p));
        engine.apply(&s)?.0
    } else {
        let f = ScalarField::new(domain.clone(), dist.clone())?;
        engine.apply(&f)?.0
    };
    let first = ScalarField::new(domain.clone(), first)?;
    let second = engine.apply(&first)?.0;

    let hmin = g.h_min();
    let reach = lit::<S>(3.0) * g.cell_diagonal();
    let log_arg = lit::<S>(2.0) * epsilon * reach / (lit::<S>(5.0) * hmin * hmin * hmin);
    let ell = reach * log_arg.ln().max(S::zero()).sqrt();

    let clamp = S::one() - lit::<S>(1e-6);
    let mut values: Vec<S> = (0..n)
        .map(|i| {
            if theta[i] {
                return S::zero();
            }
            let d = dist[i];
            let base = (epsilon * second[i]).min(epsilon * d * clamp);
            let r = ell / d;
            base * (-(r * r)).exp()
        })
        .collect();

    let mut field = ScalarField::new(domain.clone(), values.clone())?;
    let slope = max_slope(&field);
    if slope > epsilon {
        let scale = epsilon / slope * (S::one() - lit::<S>(1e-12));
        for v in values.iter_mut() {
            *v *= scale;
        }
    }
    let tiny = S::min_positive_value();
    for i in 0..n {
        if !theta[i] && values[i] < tiny {
            values[i] = tiny;
        }
    }
    field = ScalarField::new(domain.clone(), values)?;
    let grad_bound = max_slope(&field);
    Ok(EtaProfile {
        field,
        grad_bound,
        decay: Decay::Linear,
        kappa: None,
        theta: theta.to_vec(),
        theta_dist: dist,
        builder: Builder::Whitney,
        epsilon: Some(epsilon),
    })
}

fn check_kernel<S: Scalar>(kernel: &Kernel<S>, domain: &Domain<S>) -> Result<()> {
    if !kernel.profile().is_smooth() {
        return Err(Error::InvalidParameter("regularized distance needs a smooth kernel".into()));
    }
    if kernel.dim() != domain.dim() {
        return Err(Error::InvalidParameter("kernel and domain dimensions differ".into()));
    }
    Ok(())
}

/// σ as a sampler: closed form for box and ball domains, gridded otherwise.
fn sigma_values<S: Scalar>(domain: &Arc<Domain<S>>, engine: &Engine<'_, S>) -> Result<Vec<S>> {
    if matches!(domain.shape(), Shape::Mask) {
        let f = ScalarField::new(domain.clone(), domain.sigma().to_vec())?;
        Ok(engine.apply(&f)?.0)
    } else {
        let d = domain.clone();
        let s = FnSampler::new(domain, move |p| d.sigma_at(p));
        Ok(engine.apply(&s)?.0)
    }
}

/// η̃ = Tσ with the Whitney step for Θ = ∂Ω, certified (1−ε)σ ≤ η̃ ≤ (1+ε)σ.
pub fn regularized_distance<S: Scalar>(
    domain: &Arc<Domain<S>>,
    epsilon: S,
    kernel: &Kernel<S>,
) -> Result<EtaProfile<S>> {
    if !(epsilon > S::zero() && epsilon < S::one()) {
        return Err(Error::InvalidParameter(format!("epsilon {} outside (0, 1)", to_f64(epsilon))));
    }
    check_kernel(kernel, domain)?;
    let boundary: Vec<bool> = (0..domain.len()).map(|i| !domain.is_inside(i)).collect();
    let base = build_whitney_eta(domain, &boundary, epsilon.min(lit(0.5)))?;
    let engine = Engine { kernel, domain, steps: base.field.values(), subgrid: false };
    let mut values = sigma_values(domain, &engine)?;
    let sigma = domain.sigma();
    let lo = S::one() - epsilon;
    let hi = S::one() + epsilon;
    let mut worst: Option<(usize, S, S)> = None;
    for i in 0..domain.len() {
        if !domain.is_inside(i) {
            values[i] = S::zero();
            continue;
        }
        let v = values[i];
        let (l, u) = (lo * sigma[i], hi * sigma[i]);
        if v < l || v > u {
            let excess = if v < l { l - v } else { v - u };
            if worst.is_none_or(|(_, e, _)| excess > e) {
                worst = Some((i, excess, if v < l { l } else { u }));
            }
        }
    }
    if let Some((node, _, bound)) = worst {
        return Err(Error::Certification {
            what: "regularized distance sandwich".into(),
            node,
            value: to_f64(values[node]),
            bound: to_f64(bound),
        });
    }
    let field = ScalarField::new(domain.clone(), values)?;
    let grad_bound = max_slope(&field);
    Ok(EtaProfile {
        field,
        grad_bound,
        decay: Decay::Linear,
        kappa: None,
        theta: boundary,
        theta_dist: sigma.to_vec(),
        builder: Builder::Regdist,
        epsilon: Some(epsilon),
    })
}

/// η = (η̃/(1+ε))², certified κσ² ≤ η ≤ σ² with κ = ((1−ε)/(1+ε))², and η < σ.
pub fn quadratic_eta<S: Scalar>(
    domain: &Arc<Domain<S>>,
    epsilon: S,
    kernel: &Kernel<S>,
) -> Result<EtaProfile<S>> {
    let reg = regularized_distance(domain, epsilon, kernel)?;
    let onep = S::one() + epsilon;
    let kappa = ((S::one() - epsilon) / onep).powi(2);
    let sigma = domain.sigma();
    let values: Vec<S> = reg
        .field
        .values()
        .iter()
        .map(|&v| {
            let r = v / onep;
            r * r
        })
        .collect();
    for i in 0..domain.len() {
        if !domain.is_inside(i) {
            continue;
        }
        let (v, s2) = (values[i], sigma[i] * sigma[i]);
        let fail = |bound: S| Error::Certification {
            what: "quadratic decay".into(),
            node: i,
            value: to_f64(v),
            bound: to_f64(bound),
        };
        if v < kappa * s2 {
            return Err(fail(kappa * s2));
        }
        if v > s2 {
            return Err(fail(s2));
        }
        if v >= sigma[i] {
            return Err(fail(sigma[i]));
        }
    }
    let field = ScalarField::new(domain.clone(), values)?;
    let grad_bound = max_slope(&field);
    Ok(EtaProfile {
        field,
        grad_bound,
        decay: Decay::Quadratic,
        kappa: Some(kappa),
        theta: reg.theta,
        theta_dist: reg.theta_dist,
        builder: Builder::Quadratic,
        epsilon: Some(epsilon),
    })
}

/// η = min(η⁰, ω⁻¹(α η⁰)) with η⁰ the Whitney base for Θ = ∂Ω ∪ α⁻¹(0), so that
/// ω(η) ≤ α η⁰ ≤ α pointwise.
pub fn calibrated_eta<S: Scalar>(
    domain: &Arc<Domain<S>>,
    alpha: &ScalarField<S>,
    modulus: &ModulusOfContinuity<S>,
    base: &EtaProfile<S>,
) -> Result<EtaProfile<S>> {
    if alpha.grid() != domain.grid() || base.field.grid() != domain.grid() {
        return Err(Error::GridMismatch);
    }
    let a = alpha.values();
    let b = base.field.values();
    for i in 0..domain.len() {
        if !domain.is_inside(i) {
            continue;
        }
        if a[i] < S::zero() {
            return Err(Error::Precondition { what: "alpha ≥ 0".into(), node: i, margin: to_f64(a[i]) });
        }
        if a[i] == S::zero() && !base.theta[i] {
            return Err(Error::Precondition {
                what: "base profile vanishes on alpha's zero set".into(),
                node: i,
                margin: 0.0,
            });
        }
    }
    let tiny = S::min_positive_value();
    let values: Vec<S> = (0..domain.len())
        .map(|i| {
            if base.theta[i] {
                S::zero()
            } else {
                let target = modulus.inverse(a[i] * b[i]);
                // ω(η) must not exceed α η⁰ after rounding
                let mut eta = b[i].min(target);
                while eta > tiny && modulus.eval(eta) > a[i] * b[i] {
                    eta *= lit(1.0 - 1e-9);
                }
                eta.max(tiny)
            }
        })
        .collect();
    let field = ScalarField::new(domain.clone(), values)?;
    let grad_bound = max_slope(&field);
    Ok(EtaProfile {
        field,
        grad_bound,
        decay: Decay::Calibrated,
        kappa: None,
        theta: base.theta.clone(),
        theta_dist: base.theta_dist.clone(),
        builder: Builder::Calibrated,
        epsilon: base.epsilon,
    })
}

/// max over inside nodes off Θ of Hₙ(x) = ω(η(x)/n)/α(x).
pub fn calibration_ratio<S: Scalar>(
    eta: &EtaProfile<S>,
    alpha: &ScalarField<S>,
    modulus: &ModulusOfContinuity<S>,
    n: u32,
) -> S {
    let d = eta.domain();
    let nn = from_usize::<S>(n as usize);
    (0..d.len())
        .filter(|&i| d.is_inside(i) && !eta.theta[i])
        .map(|i| modulus.eval(eta.values()[i] / nn) / alpha.values()[i])
        .fold(S::zero(), S::max)
}

/// ηₙ = min((Tₙσ)², σ²), Tₙ using the quadratic profile's step, certified
/// (1 − σ/n)²σ² ≤ ηₙ ≤ σ².
pub fn modified_eta<S: Scalar>(
    quadratic: &EtaProfile<S>,
    kernel: &Kernel<S>,
    n: u32,
) -> Result<EtaProfile<S>> {
    if quadratic.decay != Decay::Quadratic {
        return Err(Error::InvalidParameter("modified family needs a quadratic step profile".into()));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let domain = quadratic.domain().clone();
    check_kernel(kernel, &domain)?;
    let nn = from_usize::<S>(n as usize);
    let steps: Vec<S> = quadratic.values().iter().map(|&v| v / nn).collect();
    let engine = Engine { kernel, domain: &domain, steps: &steps, subgrid: false };
    let tsigma = sigma_values(&domain, &engine)?;
    let sigma = domain.sigma();
    let mut values = vec![S::zero(); domain.len()];
    for i in 0..domain.len() {
        if !domain.is_inside(i) {
            continue;
        }
        let s = sigma[i];
        let v = (tsigma[i] * tsigma[i]).min(s * s);
        let lower = ((S::one() - s / nn) * s).powi(2);
        if v < lower {
            return Err(Error::Certification {
                what: "modified step lower bound".into(),
                node: i,
                value: to_f64(v),
                bound: to_f64(lower),
            });
        }
        if v >= s {
            return Err(Error::Certification {
                what: "modified step below boundary distance".into(),
                node: i,
                value: to_f64(v),
                bound: to_f64(s),
            });
        }
        values[i] = v;
    }
    let field = ScalarField::new(domain.clone(), values)?;
    let grad_bound = max_slope(&field);
    Ok(EtaProfile {
        field,
        grad_bound,
        decay: Decay::Quadratic,
        kappa: None,
        theta: quadratic.theta.clone(),
        theta_dist: quadratic.theta_dist.clone(),
        builder: Builder::Modified,
        epsilon: quadratic.epsilon,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub check: String,
    pub node: usize,
    pub value: f64,
    pub bound: f64,
}

/// Certification report `{builder, epsilon, kappa?, max_slope, violations: []}`.
#[derive(Clone, Debug, Serialize)]
pub struct EtaCertificate {
    pub builder: String,
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    pub max_slope: f64,
    pub violations: Vec<Violation>,
}

impl EtaCertificate {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Re-checks every certified property of a profile on its nodes with exact
/// comparisons.
pub fn certify<S: Scalar>(eta: &EtaProfile<S>) -> EtaCertificate {
    let d = eta.domain();
    let v = eta.values();
    let sigma = d.sigma();
    let slope = max_slope(&eta.field);
    let mut out = Vec::new();
    let mut push = |check: &str, node: usize, value: S, bound: S| {
        out.push(Violation { check: check.into(), node, value: to_f64(value), bound: to_f64(bound) })
    };
    let step_like = eta.builder != Builder::Regdist;
    for i in 0..d.len() {
        if !d.is_inside(i) {
            continue;
        }
        if eta.theta[i] {
            if v[i] != S::zero() {
                push("zero on theta", i, v[i], S::zero());
            }
            continue;
        }
        if v[i] <= S::zero() {
            push("positive off theta", i, v[i], S::zero());
        }
        if step_like && v[i] >= eta.theta_dist[i] {
            push("below distance to theta", i, v[i], eta.theta_dist[i]);
        }
        if let (Some(e), Builder::Regdist) = (eta.epsilon, eta.builder) {
            if v[i] < (S::one() - e) * sigma[i] || v[i] > (S::one() + e) * sigma[i] {
                push("regularized distance sandwich", i, v[i], sigma[i]);
            }
        }
        if let Some(k) = eta.kappa {
            let s2 = sigma[i] * sigma[i];
            if v[i] < k * s2 {
                push("quadratic lower bound", i, v[i], k * s2);
            }
            if v[i] > s2 {
                push("quadratic upper bound", i, v[i], s2);
            }
        }
        if let (Some(e), Builder::Whitney) = (eta.epsilon, eta.builder) {
            if v[i] > e * eta.theta_dist[i] {
                push("scaled distance bound", i, v[i], e * eta.theta_dist[i]);
            }
        }
    }
    if slope > eta.grad_bound {
        push("gradient bound", 0, slope, eta.grad_bound);
    }
    if let (Some(e), Builder::Whitney) = (eta.epsilon, eta.builder) {
        if slope > e {
            push("slope at most epsilon", 0, slope, e);
        }
        let flat = vanishing_derivatives(eta);
        if flat.max_first > flat.tolerance {
            push("first differences near theta", flat.worst_node, lit(flat.max_first), lit(flat.tolerance));
        }
        if flat.max_second > flat.tolerance {
            push("second differences near theta", flat.worst_node, lit(flat.max_second), lit(flat.tolerance));
        }
    }
    EtaCertificate {
        builder: eta.builder.name().into(),
        epsilon: eta.epsilon.map(to_f64),
        kappa: eta.kappa.map(to_f64),
        max_slope: to_f64(slope),
        violations: out,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FlatnessReport {
    pub shell_nodes: usize,
    /// max |first difference quotient| over the shell.
    pub max_first: f64,
    /// max |second difference quotient| over the shell.
    pub max_second: f64,
    pub tolerance: f64,
    pub worst_node: usize,
}

/// Difference quotients of orders one and two on the nodes within two grid
/// shells of Θ; they should be O(h) (tolerance 10h) for a profile whose
/// derivatives vanish on Θ.
pub fn vanishing_derivatives<S: Scalar>(eta: &EtaProfile<S>) -> FlatnessReport {
    let d = eta.domain();
    let g = d.grid();
    let v = eta.values();
    let width = lit::<S>(2.0) * g.h_max() * (S::one() + lit(1e-9));
    let tmp;
    let dom: &Domain<S> = if (0..d.len()).all(|i| eta.theta[i] == (!d.is_inside(i) || d.delta()[i])) {
        d
    } else {
        let delta = (0..d.len()).map(|i| eta.theta[i] && d.is_inside(i)).collect();
        tmp = (**d).clone().with_delta(delta).expect("mask length");
        &tmp
    };
    let shell = theta_shell(dom, width);
    let mut max_first = 0.0f64;
    let mut max_second = 0.0f64;
    let mut worst = 0;
    for &i in &shell {
        for a in 0..g.dim() {
            let h = g.spacing()[a];
            let first = to_f64(eta.field.partial(i, a).abs());
            let second = match (g.neighbor(i, a, false), g.neighbor(i, a, true)) {
                (Some(b), Some(f)) => to_f64(((v[f] - v[i] - v[i] + v[b]) / (h * h)).abs()),
                _ => 0.0,
            };
            if first.max(second) > max_first.max(max_second) {
                worst = i;
            }
            max_first = max_first.max(first);
            max_second = max_second.max(second);
        }
    }
    FlatnessReport {
        shell_nodes: shell.len(),
        max_first,
        max_second,
        tolerance: 10.0 * to_f64(g.h_min()),
        worst_node: worst,
    }
}

/// Parses `whitney:<ε>`, `regdist:<ε>`, `quadratic:<ε>` into a builder and ε.
pub fn parse_eta_spec(spec: &str) -> Result<(Builder, f64)> {
    let (name, eps) = spec.split_once(':').unwrap_or((spec, "0.1"));
    let eps: f64 = eps
        .parse()
        .map_err(|_| Error::Parse(format!("bad epsilon in eta spec `{spec}`")))?;
    let b = match name {
        "whitney" => Builder::Whitney,
        "regdist" => Builder::Regdist,
        "quadratic" => Builder::Quadratic,
        other => return Err(Error::Parse(format!("unknown eta builder `{other}`"))),
    };
    Ok((b, eps))
}

/// Builds a profile from a parsed spec on `domain` (Θ = ∂Ω ∪ Δ for Whitney).
pub fn build_from_spec<S: Scalar>(
    domain: &Arc<Domain<S>>,
    builder: Builder,
    epsilon: S,
    kernel: &Kernel<S>,
) -> Result<EtaProfile<S>> {
    match builder {
        Builder::Whitney => build_whitney_eta(domain, &domain.theta(), epsilon),
        Builder::Regdist => regularized_distance(domain, epsilon, kernel),
        Builder::Quadratic => quadratic_eta(domain, epsilon, kernel),
        other => Err(Error::InvalidParameter(format!(
            "builder `{}` needs extra inputs",
            other.name()
        ))),
    }
}
