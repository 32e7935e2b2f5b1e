//! L¹ operator norm of the discrete mollifier: the largest column sum
//! max_j Σ_i A_ij of the matrix A with (Tf)_i = Σ_j A_ij f_j, which is the grid
//! analogue of sup_y ∫ C(x) ρ((x − y)/s(x)) dx.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::eta::Decay;
use crate::geometry::{boundary_shell, Domain};
use crate::kernels::Kernel;
use crate::mollify::MollifierConfig;
use crate::scalar::{lit, to_f64, unit_ball_volume, Scalar};

/// Row blocks accumulated independently and summed in a fixed order, so the
/// result does not depend on the thread count.
const BLOCKS: usize = 64;

/// Column sums Σ_i A_ij over the rows i inside Ω for steps `steps` (no subgrid
/// shortcut: every positive step is integrated).
pub fn column_sums<S: Scalar>(kernel: &Kernel<S>, domain: &Arc<Domain<S>>, steps: &[S]) -> Result<Vec<S>> {
    let g = domain.grid();
    let n = domain.len();
    let per = n.div_ceil(BLOCKS);
    let taps = kernel.taps();
    let partial: Vec<Result<Vec<S>>> = (0..BLOCKS)
        .into_par_iter()
        .map(|b| {
            let mut acc = vec![S::zero(); n];
            for i in (b * per)..((b + 1) * per).min(n) {
                if !domain.is_inside(i) {
                    continue;
                }
                let s = steps[i];
                if s == S::zero() {
                    acc[i] += S::one();
                    continue;
                }
                let x = g.point(i);
                for (k, z) in kernel.nodes().iter().enumerate() {
                    let p = [x[0] - s * z[0], x[1] - s * z[1], x[2] - s * z[2]];
                    let t = taps[k];
                    g.stencil(&p, |j, w| acc[j] += t * w).map_err(|e| match e {
                        Error::OutOfDomain { point } => Error::SampleOutside { node: i, tap: k, point },
                        other => other,
                    })?;
                }
            }
            Ok(acc)
        })
        .collect();
    let mut total = vec![S::zero(); n];
    for block in partial {
        for (t, v) in total.iter_mut().zip(block?) {
            *t += v;
        }
    }
    Ok(total)
}

/// Inside nodes with σ ≤ diam/8 plus `random` seeded inside nodes, sorted and
/// deduplicated.
pub fn probe_nodes<S: Scalar>(domain: &Domain<S>, random: usize, seed: u64) -> Vec<usize> {
    let mut probes = boundary_shell(domain, domain.diameter() / lit(8.0));
    let inside = domain.inside_indices();
    if !inside.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        probes.extend((0..random).map(|_| inside[rng.gen_range(0..inside.len())]));
    }
    probes.sort_unstable();
    probes.dedup();
    probes
}

/// M_ρ ω_N (1 + N ln(2/κ)).
pub fn uniform_bound(dim: usize, m_rho: f64, kappa: f64) -> f64 {
    m_rho * unit_ball_volume::<f64>(dim) * (1.0 + dim as f64 * (2.0 / kappa).ln())
}

/// M_ρ ω_N (1 + N ln(1/κ)), the bound on limsup ‖Tₙ‖.
pub fn limsup_bound(dim: usize, m_rho: f64, kappa: f64) -> f64 {
    m_rho * unit_ball_volume::<f64>(dim) * (1.0 + dim as f64 * (1.0 / kappa).ln())
}

#[derive(Clone, Debug, Serialize)]
pub struct OperatorNormReport {
    pub dim: usize,
    pub n: Option<u32>,
    pub kappa: f64,
    pub m_rho: f64,
    pub probes: usize,
    /// max column sum over the probes on the given domain.
    pub estimate_raw: f64,
    pub argmax_raw: usize,
    /// Same after shrinking the domain by `scale` so that sup σ < 1/8 (the
    /// quadratic profile rescales to the step scale·η).
    pub estimate_rescaled: f64,
    pub argmax_rescaled: usize,
    pub scale: f64,
    pub bound: f64,
    pub limsup_bound: f64,
    /// estimate_rescaled ≤ 1.1 · bound.
    pub pass: bool,
}

fn max_over(sums: &[f64], probes: &[usize]) -> (f64, usize) {
    probes
        .iter()
        .fold((f64::NEG_INFINITY, 0), |best, &j| if sums[j] > best.0 { (sums[j], j) } else { best })
}

/// Estimates ‖T‖_{L¹→L¹} for a configuration with a quadratic step profile and
/// compares it with the uniform bound.
pub fn l1_operator_norm<S: Scalar>(cfg: &MollifierConfig<S>, probe_count: usize, seed: u64) -> Result<OperatorNormReport> {
    let kappa = match (cfg.eta.decay, cfg.eta.kappa) {
        (Decay::Quadratic, Some(k)) => to_f64(k),
        _ => {
            return Err(Error::Precondition {
                what: "L1 operator norm needs a quadratic step profile with certified kappa".into(),
                node: 0,
                margin: f64::NAN,
            })
        }
    };
    let d = cfg.domain();
    let steps = cfg.steps();
    let probes = probe_nodes(d, probe_count, seed);
    let to64 = |v: Vec<S>| v.into_iter().map(to_f64).collect::<Vec<f64>>();
    let raw = to64(column_sums(&cfg.kernel, d, &steps)?);
    let (estimate_raw, argmax_raw) = max_over(&raw, &probes);

    let max_sigma = to_f64(d.max_sigma());
    let scale = (0.999 * 0.125 / max_sigma).min(1.0);
    let scaled_steps: Vec<S> = steps.iter().map(|&s| s * lit(scale)).collect();
    let resc = to64(column_sums(&cfg.kernel, d, &scaled_steps)?);
    let (estimate_rescaled, argmax_rescaled) = max_over(&resc, &probes);

    let m_rho = to_f64(cfg.kernel.m_rho());
    let bound = uniform_bound(d.dim(), m_rho, kappa);
    Ok(OperatorNormReport {
        dim: d.dim(),
        n: cfg.n,
        kappa,
        m_rho,
        probes: probes.len(),
        estimate_raw,
        argmax_raw,
        estimate_rescaled,
        argmax_rescaled,
        scale,
        bound,
        limsup_bound: limsup_bound(d.dim(), m_rho, kappa),
        pass: estimate_rescaled <= 1.1 * bound,
    })
}

/// Column sum at `node` for the constant step `c`, integrating only rows whose
/// ball stays inside the grid: 1 up to round-off away from the boundary.
pub fn constant_step_column_sum<S: Scalar>(kernel: &Kernel<S>, domain: &Arc<Domain<S>>, c: S, node: usize) -> Result<S> {
    let g = domain.grid();
    let y = g.point(node);
    let reach = c * kernel.radius() + g.cell_diagonal();
    let taps = kernel.taps();
    let mut sum = S::zero();
    for i in 0..g.len() {
        let x = g.point(i);
        if crate::geometry::norm(&crate::geometry::sub(&x, &y)) > reach {
            continue;
        }
        for (k, z) in kernel.nodes().iter().enumerate() {
            let p = [x[0] - c * z[0], x[1] - c * z[1], x[2] - c * z[2]];
            g.stencil(&p, |j, w| {
                if j == node {
                    sum += taps[k] * w;
                }
            })?;
        }
    }
    Ok(sum)
}
