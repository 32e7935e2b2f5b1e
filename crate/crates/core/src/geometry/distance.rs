use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Arc;

use rayon::prelude::*;

use super::{norm, sub, Domain, Point, ScalarField, Shape};
use crate::scalar::{from_usize, lit, to_f64, Scalar};

/// Node count above which mask domains switch from brute force to propagation.
const BRUTE_FORCE_LIMIT: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    /// σ = dist(·, ∂Ω).
    Boundary,
    /// dist(·, Θ) with Θ = ∂Ω ∪ Δ.
    Theta,
}

pub fn distance_field<S: Scalar>(domain: &Arc<Domain<S>>, target: Target) -> ScalarField<S> {
    let values = match target {
        Target::Boundary => domain.sigma().to_vec(),
        Target::Theta => domain.theta_distance().to_vec(),
    };
    ScalarField::new(domain.clone(), values).expect("cached distance matches grid")
}

/// Inside nodes with σ ≤ width, in index order.
pub fn boundary_shell<S: Scalar>(domain: &Domain<S>, width: S) -> Vec<usize> {
    shell(domain, domain.sigma(), width)
}

/// Inside nodes off Δ with dist(·, Θ) ≤ width, in index order.
pub fn theta_shell<S: Scalar>(domain: &Domain<S>, width: S) -> Vec<usize> {
    let d = domain.theta_distance();
    (0..domain.len())
        .filter(|&i| domain.is_inside(i) && !domain.delta()[i] && d[i] <= width)
        .collect()
}

fn shell<S: Scalar>(domain: &Domain<S>, d: &[S], width: S) -> Vec<usize> {
    (0..domain.len())
        .filter(|&i| domain.is_inside(i) && d[i] <= width)
        .collect()
}

pub(super) fn compute_sigma<S: Scalar>(d: &Domain<S>) -> Vec<S> {
    match d.shape() {
        Shape::Box | Shape::Ball { .. } => (0..d.len())
            .into_par_iter()
            .map(|i| {
                if d.is_inside(i) {
                    d.sigma_at(&d.grid().point(i))
                } else {
                    S::zero()
                }
            })
            .collect(),
        Shape::Mask => {
            if d.len() <= BRUTE_FORCE_LIMIT {
                brute_force_sigma(d)
            } else {
                propagate_sigma(d)
            }
        }
    }
}

/// Midpoints of grid edges joining an inside node to an outside one; the
/// grid-resolved boundary of a mask domain.
fn face_midpoints<S: Scalar>(d: &Domain<S>) -> Vec<(usize, Point<S>)> {
    let g = d.grid();
    let half = lit::<S>(0.5);
    let mut out = Vec::new();
    for i in 0..d.len() {
        if !d.is_inside(i) {
            continue;
        }
        for a in 0..g.dim() {
            for fwd in [false, true] {
                if let Some(j) = g.neighbor(i, a, fwd) {
                    if !d.is_inside(j) {
                        let (p, q) = (g.point(i), g.point(j));
                        let m = [
                            (p[0] + q[0]) * half,
                            (p[1] + q[1]) * half,
                            (p[2] + q[2]) * half,
                        ];
                        out.push((i, m));
                    }
                }
            }
        }
    }
    out
}

/// Exact σ at nodes against the edge-midpoint boundary, by exhaustive search.
pub fn brute_force_sigma<S: Scalar>(d: &Domain<S>) -> Vec<S> {
    let sites = face_midpoints(d);
    let g = d.grid();
    (0..d.len())
        .into_par_iter()
        .map(|i| {
            if !d.is_inside(i) {
                return S::zero();
            }
            let p = g.point(i);
            sites
                .iter()
                .map(|(_, m)| norm(&sub(&p, m)))
                .fold(S::infinity(), S::min)
        })
        .collect()
}

#[derive(PartialEq)]
struct Entry {
    dist: f64,
    node: usize,
    site: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
            .then_with(|| other.site.cmp(&self.site))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Ordered nearest-site propagation: every inside node inherits the closest
/// boundary site among its axis neighbours' sites. Deterministic (ties broken by
/// index); error against brute force is at most one cell diagonal.
pub fn propagate_sigma<S: Scalar>(d: &Domain<S>) -> Vec<S> {
    let g = d.grid();
    let sites = face_midpoints(d);
    let n = d.len();
    let mut best = vec![f64::INFINITY; n];
    let mut owner = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    for (s, (i, m)) in sites.iter().enumerate() {
        let dist = to_f64(norm(&sub(&g.point(*i), m)));
        if dist < best[*i] {
            best[*i] = dist;
            owner[*i] = s;
            heap.push(Entry { dist, node: *i, site: s });
        }
    }
    while let Some(Entry { dist, node, site }) = heap.pop() {
        if dist > best[node] || owner[node] != site {
            continue;
        }
        let m = sites[site].1;
        for a in 0..g.dim() {
            for fwd in [false, true] {
                if let Some(j) = g.neighbor(node, a, fwd) {
                    if !d.is_inside(j) {
                        continue;
                    }
                    let dj = to_f64(norm(&sub(&g.point(j), &m)));
                    if dj < best[j] {
                        best[j] = dj;
                        owner[j] = site;
                        heap.push(Entry { dist: dj, node: j, site });
                    }
                }
            }
        }
    }
    (0..n)
        .map(|i| {
            if d.is_inside(i) {
                lit(best[i])
            } else {
                S::zero()
            }
        })
        .collect()
}

pub(super) fn compute_theta<S: Scalar>(d: &Domain<S>) -> Vec<S> {
    let g = d.grid();
    let sigma = d.sigma();
    (0..d.len())
        .into_par_iter()
        .map(|i| {
            if !d.is_inside(i) || d.delta()[i] {
                S::zero()
            } else {
                delta_distance(d, &g.point(i), sigma[i])
            }
        })
        .collect()
}

/// min(cap, distance from `p` to the nearest Δ node), by searching Chebyshev
/// rings of nodes outward from `p` until no closer node can exist.
pub(super) fn delta_distance<S: Scalar>(d: &Domain<S>, p: &Point<S>, cap: S) -> S {
    let g = d.grid();
    let dim = g.dim();
    let shape = g.shape();
    let hmin = g.h_min();
    let mut c = [0isize; 3];
    for a in 0..dim {
        let t = ((p[a] - g.lo()[a]) / g.spacing()[a]).round();
        let t = t.to_isize().unwrap_or(0);
        c[a] = t.clamp(0, shape[a] as isize - 1);
    }
    let max_r = (0..dim).map(|a| shape[a]).max().unwrap_or(1) as isize;
    let mut best = cap;
    let delta = d.delta();
    for r in 0..=max_r {
        let lower = (from_usize::<S>(r as usize) - lit(0.5)).max(S::zero()) * hmin;
        if lower > best {
            break;
        }
        ring(dim, &c, r, shape, |ijk| {
            let idx = g.index(ijk);
            if delta[idx] {
                let dist = norm(&sub(p, &g.point(idx)));
                if dist < best {
                    best = dist;
                }
            }
        });
    }
    best
}

/// Visits every in-grid multi-index at Chebyshev distance exactly `r` from `c`.
fn ring(dim: usize, c: &[isize; 3], r: isize, shape: &[usize], mut visit: impl FnMut([usize; 3])) {
    let inb = |a: usize, v: isize| v >= 0 && v < shape[a] as isize;
    match dim {
        1 => {
            for v in [c[0] - r, c[0] + r] {
                if inb(0, v) {
                    visit([v as usize, 0, 0]);
                }
                if r == 0 {
                    break;
                }
            }
        }
        2 => {
            for o0 in -r..=r {
                let x = c[0] + o0;
                if !inb(0, x) {
                    continue;
                }
                if o0.abs() == r {
                    for o1 in -r..=r {
                        let y = c[1] + o1;
                        if inb(1, y) {
                            visit([x as usize, y as usize, 0]);
                        }
                    }
                } else {
                    for y in [c[1] - r, c[1] + r] {
                        if inb(1, y) {
                            visit([x as usize, y as usize, 0]);
                        }
                    }
                }
            }
        }
        _ => {
            for o0 in -r..=r {
                let x = c[0] + o0;
                if !inb(0, x) {
                    continue;
                }
                for o1 in -r..=r {
                    let y = c[1] + o1;
                    if !inb(1, y) {
                        continue;
                    }
                    if o0.abs() == r || o1.abs() == r {
                        for o2 in -r..=r {
                            let z = c[2] + o2;
                            if inb(2, z) {
                                visit([x as usize, y as usize, z as usize]);
                            }
                        }
                    } else {
                        for z in [c[2] - r, c[2] + r] {
                            if inb(2, z) {
                                visit([x as usize, y as usize, z as usize]);
                            }
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Grid;

    fn disk_mask(n: usize) -> Domain<f64> {
        let g = Grid::<f64>::unit(2, n).unwrap();
        let inside = (0..g.len())
            .map(|i| {
                let p = g.point(i);
                ((p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2)).sqrt() < 0.4
            })
            .collect();
        Domain::mask(g, inside).unwrap()
    }

    #[test]
    fn shell_unit_interval() {
        let d = Domain::<f64>::unit_box(1, 101).unwrap();
        let s = boundary_shell(&d, 0.1 + 1e-12);
        let expect: Vec<usize> = (1..=10).chain(90..=99).collect();
        assert_eq!(s, expect);
        assert_eq!(boundary_shell(&d, 0.5).len(), 99);
    }

    #[test]
    fn shell_is_monotone() {
        let d = disk_mask(41);
        let a = boundary_shell(&d, 0.05);
        let b = boundary_shell(&d, 0.1);
        assert!(a.iter().all(|i| b.contains(i)));
    }

    #[test]
    fn propagation_within_one_cell_diagonal() {
        let d = disk_mask(61);
        let exact = brute_force_sigma(&d);
        let prop = propagate_sigma(&d);
        let diag = d.grid().cell_diagonal();
        for i in 0..d.len() {
            assert!(prop[i] >= exact[i] - 1e-12);
            assert!(prop[i] - exact[i] <= diag, "node {i}");
        }
    }

    #[test]
    fn theta_distance_matches_brute_force() {
        let d = Domain::<f64>::unit_box(2, 33).unwrap();
        let g = d.grid().clone();
        let delta: Vec<bool> = (0..g.len())
            .map(|i| {
                let p = g.point(i);
                ((p[0] - 0.4).powi(2) + (p[1] - 0.6).powi(2)).sqrt() <= 0.15
            })
            .collect();
        let d = d.with_delta(delta.clone()).unwrap();
        for i in 0..g.len() {
            if !d.is_inside(i) || delta[i] {
                continue;
            }
            let p = g.point(i);
            let brute = (0..g.len())
                .filter(|&j| delta[j])
                .map(|j| norm(&sub(&p, &g.point(j))))
                .fold(d.sigma()[i], f64::min);
            assert!((d.theta_distance()[i] - brute).abs() < 1e-15);
        }
    }
}
