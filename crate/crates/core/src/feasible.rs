//! Pointwise constraint sets K = {|w| ≤ α} and K_G = {|∇w| ≤ α}, and the
//! feasibility-preserving smoothing f ↦ βₙTₙf.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::norms::{distance, NormKind};
use crate::analysis::study::{decay_checks, BoundCheck};
use crate::error::{Error, Result};
use crate::eta::{build_whitney_eta, calibrated_eta, estimate_modulus, EtaProfile, ModulusOfContinuity};
use crate::geometry::{norm, Domain, ScalarField, Shape};
use crate::kernels::Kernel;
use crate::mollify::{mollify_with, MollifierConfig};
use crate::scalar::{from_usize, to_f64, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// |w| ≤ α.
    Value,
    /// |∇w| ≤ α.
    Gradient,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "value" => Ok(Mode::Value),
            "gradient" => Ok(Mode::Gradient),
            other => Err(Error::Parse(format!("unknown constraint mode `{other}`"))),
        }
    }
}

/// Bound α ≥ 0 with zero set Δ = α⁻¹(0) ∩ Ω. The domain of `alpha` carries Δ.
#[derive(Clone, Debug)]
pub struct ConstraintSpec<S: Scalar> {
    pub alpha: ScalarField<S>,
    pub mode: Mode,
    pub gamma: Option<Vec<bool>>,
}

impl<S: Scalar> ConstraintSpec<S> {
    pub fn new(alpha: ScalarField<S>, mode: Mode) -> Result<Self> {
        let d = alpha.domain();
        let v = alpha.values();
        if let Some(i) = (0..d.len()).find(|&i| d.is_inside(i) && !(v[i] >= S::zero() && v[i].is_finite())) {
            return Err(Error::Precondition { what: "alpha >= 0".into(), node: i, margin: to_f64(v[i]) });
        }
        let delta: Vec<bool> = (0..d.len()).map(|i| d.is_inside(i) && v[i] == S::zero()).collect();
        let gamma = d.gamma().map(|g| g.to_vec());
        let domain = if delta == d.delta() { d.clone() } else { (**d).clone().with_delta(delta)?.into_arc() };
        let alpha = ScalarField::new(domain, v.to_vec())?;
        Ok(Self { alpha, mode, gamma })
    }

    pub fn domain(&self) -> &Arc<Domain<S>> {
        self.alpha.domain()
    }

    pub fn delta(&self) -> &[bool] {
        self.domain().delta()
    }

    /// `field` moved onto this spec's domain (same grid required).
    pub fn adopt(&self, field: &ScalarField<S>) -> Result<ScalarField<S>> {
        if field.grid() != self.alpha.grid() {
            return Err(Error::GridMismatch);
        }
        ScalarField::new(self.domain().clone(), field.values().to_vec())
    }

    /// max |Δα|/h over adjacent node pairs.
    pub fn lipschitz(&self) -> S {
        let g = self.alpha.grid();
        let v = self.alpha.values();
        let mut l = S::zero();
        for i in 0..g.len() {
            for a in 0..g.dim() {
                if let Some(j) = g.neighbor(i, a, true) {
                    l = l.max((v[j] - v[i]).abs() / g.spacing()[a]);
                }
            }
        }
        l
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Membership {
    pub member: bool,
    pub worst_node: usize,
    /// max over nodes of |f| − α (or |∇f| − α).
    pub margin: f64,
}

/// Membership test with tolerance 1e−12. Values are checked on every grid node
/// of box and ball domains (boundary nodes feed interpolation) and on the inside
/// nodes of mask domains; gradients use difference quotients.
pub fn membership<S: Scalar>(f: &ScalarField<S>, spec: &ConstraintSpec<S>) -> Result<Membership> {
    membership_with_tol(f, spec, 1e-12)
}

pub fn membership_with_tol<S: Scalar>(f: &ScalarField<S>, spec: &ConstraintSpec<S>, tol: f64) -> Result<Membership> {
    if f.grid() != spec.alpha.grid() {
        return Err(Error::GridMismatch);
    }
    let d = spec.domain();
    let a = spec.alpha.values();
    let grad = (spec.mode == Mode::Gradient).then(|| f.gradient());
    let mask = matches!(d.shape(), Shape::Mask);
    let mut worst = (f64::NEG_INFINITY, 0);
    for i in 0..d.len() {
        let checked = match spec.mode {
            Mode::Value => !mask || d.is_inside(i),
            Mode::Gradient => d.is_inside(i),
        };
        if !checked {
            continue;
        }
        let lhs = match &grad {
            Some(g) => norm(&g.values()[i]),
            None => f.values()[i].abs(),
        };
        let m = to_f64(lhs - a[i]);
        if m > worst.0 {
            worst = (m, i);
        }
    }
    Ok(Membership { member: worst.0 <= tol, worst_node: worst.1, margin: worst.0 })
}

/// Mₙ(x) = max α over the Tₙ quadrature samples, the 2N axis extremes of
/// B_{η(x)/n}(x) and x itself, divided by α(x); 1 on Θ and outside Ω.
/// Returns the field and ‖Mₙ − 1‖_∞.
pub fn convergence_factor<S: Scalar>(
    spec: &ConstraintSpec<S>,
    eta: &EtaProfile<S>,
    kernel: &Kernel<S>,
    n: u32,
) -> Result<(ScalarField<S>, S)> {
    let d = spec.domain();
    if eta.field.grid() != d.grid() {
        return Err(Error::GridMismatch);
    }
    let g = d.grid();
    let a = spec.alpha.values();
    let nn = from_usize::<S>(n as usize);
    let rows: Vec<Result<S>> = (0..d.len())
        .into_par_iter()
        .map(|i| {
            if !d.is_inside(i) || eta.theta[i] {
                return Ok(S::one());
            }
            if a[i] == S::zero() {
                return Err(Error::Precondition {
                    what: "alpha vanishes off the zero set of eta".into(),
                    node: i,
                    margin: 0.0,
                });
            }
            let x = g.point(i);
            let s = eta.field.values()[i] / nn;
            let mut best = a[i];
            let mut visit = |p: [S; 3]| -> Result<()> {
                best = best.max(g.interpolate(a, &p)?);
                Ok(())
            };
            for z in kernel.nodes() {
                visit([x[0] - s * z[0], x[1] - s * z[1], x[2] - s * z[2]])?;
            }
            for axis in 0..g.dim() {
                for sign in [-S::one(), S::one()] {
                    let mut p = x;
                    p[axis] += sign * s;
                    visit(p)?;
                }
            }
            Ok(best / a[i])
        })
        .collect();
    let vals = rows.into_iter().collect::<Result<Vec<S>>>()?;
    let sup = vals.iter().map(|&m| (m - S::one()).abs()).fold(S::zero(), S::max);
    Ok((ScalarField::new(d.clone(), vals)?, sup))
}

/// βₙ = 1/(1 + ‖Mₙ − 1‖_∞), with Mₙ scaled by (1 + sup|∇η|/n) in gradient mode.
pub fn beta<S: Scalar>(mode: Mode, m_sup: S, eta_slope: S, n: u32) -> S {
    match mode {
        Mode::Value => S::one() / (S::one() + m_sup),
        Mode::Gradient => {
            let c = S::one() + eta_slope / from_usize::<S>(n as usize);
            // ‖M̃ₙ − 1‖ = ‖c Mₙ − 1‖ ≤ c(1 + ‖Mₙ − 1‖) − 1 since Mₙ ≥ 1
            S::one() / (c * (S::one() + m_sup))
        }
    }
}

#[derive(Clone, Debug)]
pub struct Smoothed<S: Scalar> {
    pub field: ScalarField<S>,
    pub beta: S,
    /// ‖Mₙ − 1‖_∞.
    pub m_sup: S,
    pub membership: Membership,
    /// 1e−8 + 3h·Lip(α).
    pub slack: f64,
}

/// g = βₙTₙf for f ∈ K (or K_G), feasible up to 1e−8 + 3h·Lip(α).
pub fn feasible_smooth<S: Scalar>(
    f: &ScalarField<S>,
    spec: &ConstraintSpec<S>,
    eta: &EtaProfile<S>,
    kernel: &Kernel<S>,
    n: u32,
) -> Result<Smoothed<S>> {
    let f = spec.adopt(f)?;
    let pre = membership(&f, spec)?;
    if !pre.member {
        return Err(Error::Precondition {
            what: "input lies outside the constraint set".into(),
            node: pre.worst_node,
            margin: pre.margin,
        });
    }
    let eta = EtaProfile { field: spec.adopt(&eta.field)?, ..eta.clone() };
    let (_, m_sup) = convergence_factor(spec, &eta, kernel, n)?;
    let b = beta(spec.mode, m_sup, eta.grad_bound, n);
    let cfg = MollifierConfig::new(kernel.clone(), eta).with_n(n);
    let tf = mollify_with(&f, &cfg)?.field;
    let field = tf.map(|v| b * v);
    let slack = 1e-8 + 3.0 * to_f64(spec.domain().grid().h_max() * spec.lipschitz());
    let membership = membership_with_tol(&field, spec, slack)?;
    Ok(Smoothed { field, beta: b, m_sup, membership, slack })
}

/// fₘ: f with the values within distance 1/m of Θ set to zero.
pub fn truncate<S: Scalar>(f: &ScalarField<S>, theta_dist: &[S], m: u32) -> ScalarField<S> {
    let r = S::one() / from_usize::<S>(m as usize);
    let vals = f
        .values()
        .iter()
        .zip(theta_dist)
        .map(|(&v, &t)| if t < r { S::zero() } else { v })
        .collect();
    ScalarField::new(f.domain().clone(), vals).expect("same grid")
}

/// Calibrated step for a bound α: Whitney base η⁰ for Θ = ∂Ω ∪ α⁻¹(0), the
/// empirical modulus of α, and η = min(η⁰, ω⁻¹(α η⁰)).
pub fn calibrated_setup<S: Scalar>(
    spec: &ConstraintSpec<S>,
    epsilon: S,
    bins: usize,
    seed: u64,
) -> Result<(EtaProfile<S>, ModulusOfContinuity<S>)> {
    let d = spec.domain();
    let base = build_whitney_eta(d, &d.theta(), epsilon)?;
    let modulus = estimate_modulus(&spec.alpha, bins, seed)?;
    Ok((calibrated_eta(d, &spec.alpha, &modulus, &base)?, modulus))
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityRow {
    pub n: u32,
    pub beta: f64,
    pub m_sup: f64,
    pub margin: f64,
    pub feasible: bool,
    pub error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncated_error: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityReport {
    pub mode: Mode,
    pub norm: String,
    pub rows: Vec<DensityRow>,
    pub checks: Vec<BoundCheck>,
    pub passed: bool,
}

/// ‖βₙTₙf − f‖ for each n, with the feasibility, βₙ and Mₙ checks; when
/// `truncated` is set, also the diagonal sequence βₙTₙfₙ with fₙ cut off within
/// 1/n of Θ (measured in L²).
pub fn density_study<S: Scalar>(
    f: &ScalarField<S>,
    spec: &ConstraintSpec<S>,
    eta: &EtaProfile<S>,
    kernel: &Kernel<S>,
    n_list: &[u32],
    error_norm: NormKind,
    truncated: bool,
) -> Result<DensityReport> {
    let f = spec.adopt(f)?;
    let mut rows = Vec::new();
    for &n in n_list {
        let sm = feasible_smooth(&f, spec, eta, kernel, n)?;
        let error = to_f64(distance(&sm.field, &f, error_norm, None)?);
        let truncated_error = if truncated {
            let fm = truncate(&f, &eta.theta_dist, n);
            let g = feasible_smooth(&fm, spec, eta, kernel, n)?;
            Some(to_f64(distance(&g.field, &f, NormKind::Lp(2.0), None)?))
        } else {
            None
        };
        rows.push(DensityRow {
            n,
            beta: to_f64(sm.beta),
            m_sup: to_f64(sm.m_sup),
            margin: sm.membership.margin,
            feasible: sm.membership.member,
            error,
            truncated_error,
        });
    }
    let mut checks = Vec::new();
    for r in &rows {
        checks.push(BoundCheck::new(format!("n={} feasible", r.n), r.margin, 0.0, feasibility_slack(spec)));
    }
    for w in rows.windows(2) {
        checks.push(BoundCheck::new(format!("beta nondecreasing {}->{}", w[0].n, w[1].n), w[0].beta, w[1].beta, 1e-15));
    }
    for r in &rows {
        if let Some(q) = rows.iter().find(|q| q.n == 4 * r.n) {
            checks.push(BoundCheck::new(
                format!("|M_{} - 1| <= 0.55 |M_{} - 1|", q.n, r.n),
                q.m_sup,
                0.55 * r.m_sup,
                1e-15,
            ));
        }
    }
    if let (Some(first), Some(r64)) = (rows.iter().find(|r| r.n == 1), rows.iter().find(|r| r.n == 64)) {
        checks.push(BoundCheck::new("beta_64 >= 0.95", 0.95, r64.beta, 0.0));
        checks.push(BoundCheck::new("|M_64 - 1| <= 0.25 |M_1 - 1|", r64.m_sup, 0.25 * first.m_sup, 1e-15));
    }
    let errs: Vec<f64> = rows.iter().map(|r| r.error).collect();
    checks.extend(decay_checks(&format!("{error_norm} error"), &errs));
    if truncated {
        let t: Vec<f64> = rows.iter().filter_map(|r| r.truncated_error).collect();
        checks.extend(decay_checks("truncated L2 error", &t));
    }
    let passed = checks.iter().all(|c| c.pass);
    Ok(DensityReport { mode: spec.mode, norm: error_norm.to_string(), rows, checks, passed })
}

/// 1e−8 + 3h·Lip(α).
pub fn feasibility_slack<S: Scalar>(spec: &ConstraintSpec<S>) -> f64 {
    1e-8 + 3.0 * to_f64(spec.domain().grid().h_max() * spec.lipschitz())
}
