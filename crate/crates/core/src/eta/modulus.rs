use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{norm, sub, ScalarField};
use crate::scalar::{from_usize, lit, to_f64, Scalar};

/// Fields with at most this many nodes are scanned over all node pairs.
const ALL_PAIRS_LIMIT: usize = 4096;
/// Random partners per node when sampling.
const RANDOM_PARTNERS: usize = 48;
/// Chebyshev radius (in cells) of the always-included local neighbourhood.
const LOCAL_RADIUS: isize = 3;

/// Slope of the strictly increasing floor added to every modulus.
pub fn modulus_floor<S: Scalar>() -> S {
    lit(1e-12)
}

/// Nondecreasing piecewise-linear ω with ω(0) = 0, plus a floor of slope 1e−12
/// so that it is strictly increasing and invertible.
#[derive(Clone, Debug, Serialize)]
pub struct ModulusOfContinuity<S> {
    knots: Vec<S>,
    values: Vec<S>,
    /// Slope continuing the last segment beyond the final knot (before the floor).
    tail_slope: S,
}

impl<S: Scalar> ModulusOfContinuity<S> {
    /// User-supplied modulus through `(knots[j], values[j])`, extended linearly past
    /// the last knot with the final segment's slope.
    pub fn from_knots(knots: Vec<S>, values: Vec<S>) -> Result<Self> {
        if knots.len() != values.len() || knots.len() < 2 {
            return Err(Error::InvalidParameter("modulus needs ≥ 2 matching knots and values".into()));
        }
        if knots[0] != S::zero() || values[0] != S::zero() {
            return Err(Error::InvalidParameter("modulus must start at (0, 0)".into()));
        }
        for w in knots.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidParameter("modulus knots must increase".into()));
            }
        }
        for w in values.windows(2) {
            if w[1] < w[0] {
                return Err(Error::InvalidParameter("modulus values must not decrease".into()));
            }
        }
        let m = knots.len();
        let tail_slope = (values[m - 1] - values[m - 2]) / (knots[m - 1] - knots[m - 2]);
        Ok(Self { knots, values, tail_slope })
    }

    /// ω(t) = L·t.
    pub fn linear(lipschitz: S) -> Self {
        Self {
            knots: vec![S::zero(), S::one()],
            values: vec![S::zero(), lipschitz],
            tail_slope: lipschitz,
        }
    }

    pub fn knots(&self) -> &[S] {
        &self.knots
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    fn base(&self, t: S) -> S {
        let k = &self.knots;
        let v = &self.values;
        let m = k.len();
        if t >= k[m - 1] {
            return v[m - 1] + self.tail_slope * (t - k[m - 1]);
        }
        let j = k.partition_point(|&x| x <= t).max(1);
        let (t0, t1) = (k[j - 1], k[j]);
        v[j - 1] + (v[j] - v[j - 1]) * (t - t0) / (t1 - t0)
    }

    pub fn eval(&self, t: S) -> S {
        if t <= S::zero() {
            return S::zero();
        }
        self.base(t) + modulus_floor::<S>() * t
    }

    /// The t ≥ 0 with ω(t) = y (0 for y ≤ 0).
    pub fn inverse(&self, y: S) -> S {
        if y <= S::zero() {
            return S::zero();
        }
        let floor = modulus_floor::<S>();
        let k = &self.knots;
        let m = k.len();
        for j in 1..m {
            let hi = self.eval(k[j]);
            if y <= hi {
                let lo = self.eval(k[j - 1]);
                let (t0, t1) = (k[j - 1], k[j]);
                if hi == lo {
                    return t1;
                }
                return (t0 + (y - lo) * (t1 - t0) / (hi - lo)).min(t1);
            }
        }
        let last = self.eval(k[m - 1]);
        k[m - 1] + (y - last) / (self.tail_slope + floor)
    }
}

/// Empirical modulus of `alpha` over node pairs. Fields with at most 4096 nodes
/// use every pair; larger ones use each node's local neighbourhood plus seeded
/// random partners. Per distance bin the largest |Δα| is kept, and the modulus is
/// the least concave majorant of those points (capped at its maximum), which is
/// nondecreasing and dominates every sampled pair.
pub fn estimate_modulus<S: Scalar>(
    alpha: &ScalarField<S>,
    bins: usize,
    seed: u64,
) -> Result<ModulusOfContinuity<S>> {
    if bins < 8 {
        return Err(Error::InvalidParameter(format!("bins = {bins} < 8")));
    }
    let vals = alpha.values();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("alpha has non-finite values".into()));
    }
    let g = alpha.grid();
    let n = g.len();
    let diam = g.diameter();
    let width = diam / from_usize::<S>(bins);
    let bin_of = |d: S| -> usize {
        let b = (d / width).ceil().to_usize().unwrap_or(bins);
        b.clamp(1, bins) - 1
    };
    let empty = (S::zero(), S::zero());
    let better = |cur: (S, S), d: S, v: S| v > cur.0 || (v == cur.0 && v > S::zero() && d < cur.1);

    let per_node: Vec<Vec<(S, S)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = vec![empty; bins];
            let pi = g.point(i);
            let mut visit = |j: usize| {
                if j == i {
                    return;
                }
                let d = norm(&sub(&pi, &g.point(j)));
                let v = (vals[i] - vals[j]).abs();
                let b = bin_of(d);
                if better(acc[b], d, v) {
                    acc[b] = (v, d);
                }
            };
            if n <= ALL_PAIRS_LIMIT {
                (i + 1..n).for_each(&mut visit);
            } else {
                let c = g.multi_index(i);
                let dim = g.dim();
                let span = |a: usize| if a < dim { LOCAL_RADIUS } else { 0 };
                for o0 in -span(0)..=span(0) {
                    for o1 in -span(1)..=span(1) {
                        for o2 in -span(2)..=span(2) {
                            let ijk = [c[0] as isize + o0, c[1] as isize + o1, c[2] as isize + o2];
                            if (0..3).all(|a| ijk[a] >= 0 && (ijk[a] as usize) < g.shape_full()[a]) {
                                visit(g.index([ijk[0] as usize, ijk[1] as usize, ijk[2] as usize]));
                            }
                        }
                    }
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
                for _ in 0..RANDOM_PARTNERS {
                    visit(rng.gen_range(0..n));
                }
            }
            acc
        })
        .collect();

    let mut best = vec![empty; bins];
    for acc in &per_node {
        for (b, &(v, d)) in acc.iter().enumerate() {
            if better(best[b], d, v) {
                best[b] = (v, d);
            }
        }
    }

    let mut pts: Vec<(S, S)> = vec![(S::zero(), S::zero())];
    pts.extend(best.iter().filter(|(v, _)| *v > S::zero()).map(|&(v, d)| (d, v)));
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.partial_cmp(&b.1).unwrap()));
    // keep points up to the first attainment of the overall maximum
    let vmax = pts.iter().map(|p| p.1).fold(S::zero(), S::max);
    let cut = pts.iter().position(|p| p.1 == vmax).unwrap_or(0);
    pts.truncate(cut + 1);

    let mut hull: Vec<(S, S)> = Vec::new();
    for p in pts {
        if let Some(last) = hull.last() {
            if p.0 == last.0 {
                hull.pop();
            }
        }
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b if it lies on or below the chord a→p
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross >= S::zero() {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    if hull.len() < 2 {
        hull.push((diam.max(S::one()), S::zero()));
    }
    let knots = hull.iter().map(|p| p.0).collect();
    let values = hull.iter().map(|p| p.1).collect();
    Ok(ModulusOfContinuity { knots, values, tail_slope: S::zero() })
}

impl<S: Scalar> ModulusOfContinuity<S> {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "knots": self.knots.iter().map(|&k| to_f64(k)).collect::<Vec<_>>(),
            "values": self.values.iter().map(|&v| to_f64(v)).collect::<Vec<_>>(),
        })
    }
}
