use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Point, ScalarField, VectorField};
use crate::scalar::{lit, to_f64, Scalar};

/// Discrete norms; integrals are Riemann sums h^N Σ over inside nodes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum NormKind {
    /// L^p, p ∈ [1, ∞] (`f64::INFINITY` for the sup norm).
    Lp(f64),
    /// W^{1,p} with difference-quotient gradients.
    W1p(f64),
    /// Total variation h^N Σ |forward-difference gradient|.
    TV,
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = |p: f64| if p.is_infinite() { "inf".to_string() } else { format!("{p}") };
        match self {
            NormKind::Lp(q) => write!(f, "L{}", p(*q)),
            NormKind::W1p(q) => write!(f, "W1{}", p(*q)),
            NormKind::TV => write!(f, "TV"),
        }
    }
}

impl FromStr for NormKind {
    type Err = Error;

    /// `L1`, `L2`, `Linf`, `W11`, `W12`, `TV` (any real p after `L` / `W1`).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unknown norm `{s}`"));
        let p = |t: &str| -> Result<f64> {
            let p = if t == "inf" { f64::INFINITY } else { t.parse().map_err(|_| bad())? };
            if p >= 1.0 { Ok(p) } else { Err(bad()) }
        };
        if s.eq_ignore_ascii_case("tv") {
            Ok(NormKind::TV)
        } else if let Some(t) = s.strip_prefix("W1") {
            Ok(NormKind::W1p(p(t)?))
        } else if let Some(t) = s.strip_prefix('L') {
            Ok(NormKind::Lp(p(t)?))
        } else {
            Err(bad())
        }
    }
}

pub fn parse_norms(list: &str) -> Result<Vec<NormKind>> {
    list.split(',').map(|s| s.trim().parse()).collect()
}

fn lp_of<S: Scalar>(vals: impl Iterator<Item = S>, p: f64, cell: S) -> S {
    if p.is_infinite() {
        return vals.map(|v| v.abs()).fold(S::zero(), S::max);
    }
    let pp: S = lit(p);
    let sum: S = vals.map(|v| v.abs().powf(pp)).sum();
    (cell * sum).powf(S::one() / pp)
}

/// ‖g‖_p of the pointwise ℓ² magnitude of a vector field.
fn lp_vec<S: Scalar>(g: &VectorField<S>, p: f64) -> S {
    let d = g.domain();
    let mags = g
        .values()
        .iter()
        .zip(d.inside())
        .filter(|(_, &ins)| ins)
        .map(|(v, _)| crate::geometry::norm(v));
    lp_of(mags, p, d.grid().cell_volume())
}

pub fn lp_norm<S: Scalar>(f: &ScalarField<S>, p: f64) -> S {
    lp_of(f.inside_values(), p, f.grid().cell_volume())
}

/// ‖∇f‖_p with difference-quotient gradients.
pub fn w1p_seminorm<S: Scalar>(f: &ScalarField<S>, p: f64) -> S {
    lp_vec(&f.gradient(), p)
}

/// (‖f‖_p^p + ‖∇f‖_p^p)^{1/p}, or the max of the two for p = ∞.
pub fn w1p_norm<S: Scalar>(f: &ScalarField<S>, p: f64) -> S {
    combine(lp_norm(f, p), w1p_seminorm(f, p), p)
}

fn combine<S: Scalar>(a: S, b: S, p: f64) -> S {
    if p.is_infinite() {
        return a.max(b);
    }
    let pp: S = lit(p);
    (a.powf(pp) + b.powf(pp)).powf(S::one() / pp)
}

/// h^N Σ |(forward differences)| over nodes with a forward neighbour on every
/// axis, where the node or one of those neighbours lies in Ω.
pub fn total_variation<S: Scalar>(f: &ScalarField<S>) -> S {
    let d = f.domain();
    let g = d.grid();
    let v = f.values();
    let mut sum = S::zero();
    for i in 0..g.len() {
        let mut grad: Point<S> = [S::zero(); 3];
        let mut touches = d.is_inside(i);
        let mut complete = true;
        for a in 0..g.dim() {
            match g.neighbor(i, a, true) {
                Some(j) => {
                    grad[a] = (v[j] - v[i]) / g.spacing()[a];
                    touches |= d.is_inside(j);
                }
                None => complete = false,
            }
        }
        if complete && touches {
            sum += crate::geometry::norm(&grad);
        }
    }
    sum * g.cell_volume()
}

pub fn norm<S: Scalar>(f: &ScalarField<S>, kind: NormKind) -> S {
    match kind {
        NormKind::Lp(p) => lp_norm(f, p),
        NormKind::W1p(p) => w1p_norm(f, p),
        NormKind::TV => total_variation(f),
    }
}

/// Distance ‖a − b‖ in the given norm; for W^{1,p} the gradients may be given
/// explicitly (e.g. the exact ∇Tf and ∇f) instead of differencing.
pub fn distance<S: Scalar>(
    a: &ScalarField<S>,
    b: &ScalarField<S>,
    kind: NormKind,
    grads: Option<(&VectorField<S>, &VectorField<S>)>,
) -> Result<S> {
    let diff = a.zip_with(b, |x, y| x - y)?;
    Ok(match (kind, grads) {
        (NormKind::W1p(p), Some((ga, gb))) => {
            let vals = ga
                .values()
                .iter()
                .zip(gb.values())
                .map(|(x, y)| [x[0] - y[0], x[1] - y[1], x[2] - y[2]])
                .collect();
            let dg = VectorField::new(a.domain().clone(), vals)?;
            combine(lp_norm(&diff, p), lp_vec(&dg, p), p)
        }
        (NormKind::TV, _) => (total_variation(a) - total_variation(b)).abs(),
        _ => norm(&diff, kind),
    })
}

/// Report form of a norm value.
pub fn norm_f64<S: Scalar>(f: &ScalarField<S>, kind: NormKind) -> f64 {
    to_f64(norm(f, kind))
}
