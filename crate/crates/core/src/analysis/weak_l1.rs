use serde::Serialize;

use super::norms::lp_norm;
use crate::error::Result;
use crate::geometry::{Sampler, ScalarField};
use crate::mollify::{mollify_with, MollifierConfig};
use crate::scalar::{from_usize, lit, to_f64, unit_ball_volume, Scalar};

#[derive(Clone, Debug, Serialize)]
pub struct WeakL1Row {
    pub lambda: f64,
    /// h^N · #{inside nodes with |Tf| > λ}.
    pub measure: f64,
    /// (C/λ)‖f‖₁ + h^N.
    pub bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeakL1Report {
    /// 5^N ω_N M_ρ.
    pub constant: f64,
    pub l1_norm: f64,
    pub rows: Vec<WeakL1Row>,
    pub violations: usize,
}

/// The Vitali-covering constant 5^N ω_N M_ρ.
pub fn weak_l1_constant<S: Scalar>(dim: usize, m_rho: S) -> S {
    lit::<S>(5.0).powi(dim as i32) * unit_ball_volume::<S>(dim) * m_rho
}

/// measure(|Tf| > λ) ≤ (5^N ω_N M_ρ / λ)‖f‖₁ + h^N for every λ.
pub fn weak_l1_check<S: Scalar, F: Sampler<S> + ?Sized>(
    f: &F,
    cfg: &MollifierConfig<S>,
    lambdas: &[S],
) -> Result<WeakL1Report> {
    let d = cfg.domain();
    let tf = mollify_with(f, cfg)?.field;
    let fvals = ScalarField::new(d.clone(), (0..d.len()).map(|i| f.at_node(i)).collect())?;
    let l1 = lp_norm(&fvals, 1.0);
    let cell = d.grid().cell_volume();
    let c = weak_l1_constant(d.dim(), cfg.kernel.m_rho());
    let rows: Vec<WeakL1Row> = lambdas
        .iter()
        .map(|&lambda| {
            let count = tf.inside_values().filter(|v| v.abs() > lambda).count();
            let measure = cell * from_usize::<S>(count);
            let bound = c / lambda * l1 + cell;
            WeakL1Row {
                lambda: to_f64(lambda),
                measure: to_f64(measure),
                bound: to_f64(bound),
                pass: measure <= bound,
            }
        })
        .collect();
    let violations = rows.iter().filter(|r| !r.pass).count();
    Ok(WeakL1Report { constant: to_f64(c), l1_norm: to_f64(l1), rows, violations })
}

/// `count` values geometrically spaced over [lo, hi].
pub fn log_sweep<S: Scalar>(lo: S, hi: S, count: usize) -> Vec<S> {
    let (a, b) = (lo.ln(), hi.ln());
    let m = from_usize::<S>(count.max(2) - 1);
    (0..count).map(|k| (a + (b - a) * from_usize::<S>(k) / m).exp()).collect()
}
