//! Uniform Cartesian grids, bounded domains on them, and distance fields.

mod distance;
mod field;
pub mod io;

use std::sync::Arc;

pub use distance::{boundary_shell, brute_force_sigma, distance_field, propagate_sigma, theta_shell, Target};
pub(crate) use field::{Component, Magnitude};
pub use field::{
    FnSampler, FnVectorSampler, Sampler, ScalarField, ScalarFn, VectorField, VectorFn, VectorSampler,
};

use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, to_f64, Scalar};

pub type Point<S> = [S; 3];

/// Uniform node lattice `lo + i*h` on a box in 1–3 dimensions, stored row-major
/// with axis 0 slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<S> {
    dim: usize,
    lo: [S; 3],
    hi: [S; 3],
    shape: [usize; 3],
    h: [S; 3],
    strides: [usize; 3],
}

impl<S: Scalar> Grid<S> {
    pub fn new(bbox: &[(S, S)], shape: &[usize]) -> Result<Self> {
        let dim = bbox.len();
        if !(1..=3).contains(&dim) {
            return Err(Error::UnsupportedDim(dim));
        }
        if shape.len() != dim {
            return Err(Error::InvalidDomain(format!(
                "bbox has {dim} axes but resolution has {}",
                shape.len()
            )));
        }
        let mut lo = [S::zero(); 3];
        let mut hi = [S::zero(); 3];
        let mut sh = [1usize; 3];
        let mut h = [S::one(); 3];
        for a in 0..dim {
            let (l, u) = bbox[a];
            if !(l.is_finite() && u.is_finite() && l < u) {
                return Err(Error::InvalidDomain(format!("axis {a}: empty interval")));
            }
            if shape[a] < 3 {
                return Err(Error::InvalidDomain(format!("axis {a}: need at least 3 nodes")));
            }
            lo[a] = l;
            hi[a] = u;
            sh[a] = shape[a];
            h[a] = (u - l) / from_usize::<S>(shape[a] - 1);
        }
        let strides = [sh[1] * sh[2], sh[2], 1];
        Ok(Self { dim, lo, hi, shape: sh, h, strides })
    }

    /// `n` nodes per axis on the unit cube.
    pub fn unit(dim: usize, n: usize) -> Result<Self> {
        let bbox = vec![(S::zero(), S::one()); dim];
        let shape = vec![n; dim];
        Self::new(&bbox, &shape)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.shape[0] * self.shape[1] * self.shape[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape[..self.dim]
    }

    /// Shape padded with 1 for unused axes.
    pub(crate) fn shape_full(&self) -> [usize; 3] {
        self.shape
    }

    pub fn lo(&self) -> &[S] {
        &self.lo[..self.dim]
    }

    pub fn hi(&self) -> &[S] {
        &self.hi[..self.dim]
    }

    pub fn spacing(&self) -> &[S] {
        &self.h[..self.dim]
    }

    pub fn h_min(&self) -> S {
        self.spacing().iter().copied().fold(S::infinity(), S::min)
    }

    pub fn h_max(&self) -> S {
        self.spacing().iter().copied().fold(S::zero(), S::max)
    }

    /// Volume of one grid cell, the Riemann-sum weight.
    pub fn cell_volume(&self) -> S {
        self.spacing().iter().copied().fold(S::one(), |a, b| a * b)
    }

    pub fn cell_diagonal(&self) -> S {
        self.spacing().iter().map(|&h| h * h).sum::<S>().sqrt()
    }

    pub fn diameter(&self) -> S {
        (0..self.dim)
            .map(|a| (self.hi[a] - self.lo[a]) * (self.hi[a] - self.lo[a]))
            .sum::<S>()
            .sqrt()
    }

    #[inline]
    pub fn index(&self, ijk: [usize; 3]) -> usize {
        ijk[0] * self.strides[0] + ijk[1] * self.strides[1] + ijk[2]
    }

    #[inline]
    pub fn multi_index(&self, idx: usize) -> [usize; 3] {
        [
            idx / self.strides[0],
            (idx / self.strides[1]) % self.shape[1],
            idx % self.shape[2],
        ]
    }

    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    #[inline]
    pub fn point(&self, idx: usize) -> Point<S> {
        let ijk = self.multi_index(idx);
        let mut p = [S::zero(); 3];
        for a in 0..self.dim {
            p[a] = self.lo[a] + from_usize::<S>(ijk[a]) * self.h[a];
        }
        p
    }

    /// Neighbour of `idx` one step along `axis` (`+1` or `-1`), if on the grid.
    #[inline]
    pub fn neighbor(&self, idx: usize, axis: usize, forward: bool) -> Option<usize> {
        let i = self.multi_index(idx)[axis];
        if forward {
            (i + 1 < self.shape[axis]).then(|| idx + self.strides[axis])
        } else {
            (i > 0).then(|| idx - self.strides[axis])
        }
    }

    pub fn on_face(&self, idx: usize) -> bool {
        let ijk = self.multi_index(idx);
        (0..self.dim).any(|a| ijk[a] == 0 || ijk[a] + 1 == self.shape[a])
    }

    pub fn contains_closed(&self, p: &Point<S>) -> bool {
        let tol = lit::<S>(1e-9);
        (0..self.dim).all(|a| {
            let t = (p[a] - self.lo[a]) / self.h[a];
            t >= -tol && t <= from_usize::<S>(self.shape[a] - 1) + tol
        })
    }

    /// Multilinear interpolation of node `values` at `p`.
    pub fn interpolate(&self, values: &[S], p: &Point<S>) -> Result<S> {
        let mut acc = S::zero();
        self.stencil(p, |j, w| acc += w * values[j])?;
        Ok(acc)
    }

    /// Node indices and weights used by `interpolate` at `p`; the callback receives
    /// every corner with nonzero weight.
    pub fn stencil(&self, p: &Point<S>, mut visit: impl FnMut(usize, S)) -> Result<()> {
        let tol = lit::<S>(1e-9);
        let mut base = [0usize; 3];
        let mut frac = [S::zero(); 3];
        for a in 0..self.dim {
            let n1 = self.shape[a] - 1;
            let t = (p[a] - self.lo[a]) / self.h[a];
            if !(t >= -tol && t <= from_usize::<S>(n1) + tol) {
                return Err(Error::OutOfDomain {
                    point: p[..self.dim].iter().map(|&x| to_f64(x)).collect(),
                });
            }
            let t = t.max(S::zero()).min(from_usize(n1));
            let i = t.floor().to_usize().unwrap_or(0).min(n1 - 1);
            base[a] = i;
            frac[a] = t - from_usize::<S>(i);
        }
        let b = self.index(base);
        for corner in 0..(1usize << self.dim) {
            let mut w = S::one();
            let mut off = 0;
            for a in 0..self.dim {
                if corner >> a & 1 == 1 {
                    w *= frac[a];
                    off += self.strides[a];
                } else {
                    w *= S::one() - frac[a];
                }
            }
            if w != S::zero() {
                visit(b + off, w);
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Shape<S> {
    /// The open bounding box itself.
    Box,
    /// Open ball inscribed in the bounding box.
    Ball { center: Point<S>, radius: S },
    /// Arbitrary open set given by node membership.
    Mask,
}

impl<S> Shape<S> {
    pub fn kind(&self) -> &'static str {
        match self {
            Shape::Box => "box",
            Shape::Ball { .. } => "ball",
            Shape::Mask => "mask",
        }
    }
}

/// Bounded open domain Ω on a grid, with the optional interior zero set Δ and
/// boundary portion Γ. σ = dist(·, ∂Ω) and dist(·, Θ), Θ = ∂Ω ∪ Δ, are cached.
#[derive(Clone, Debug)]
pub struct Domain<S> {
    grid: Grid<S>,
    shape: Shape<S>,
    inside: Vec<bool>,
    delta: Vec<bool>,
    any_delta: bool,
    gamma: Option<Vec<bool>>,
    sigma: Vec<S>,
    theta_dist: Vec<S>,
}

impl<S: Scalar> Domain<S> {
    pub fn boxed(grid: Grid<S>) -> Result<Self> {
        let n = grid.len();
        let inside: Vec<bool> = (0..n).map(|i| !grid.on_face(i)).collect();
        Self::assemble(grid, Shape::Box, inside)
    }

    pub fn ball(grid: Grid<S>) -> Result<Self> {
        let mut center = [S::zero(); 3];
        let mut radius = S::infinity();
        for a in 0..grid.dim() {
            center[a] = (grid.lo[a] + grid.hi[a]) * lit(0.5);
            radius = radius.min((grid.hi[a] - grid.lo[a]) * lit(0.5));
        }
        let inside: Vec<bool> = (0..grid.len())
            .map(|i| norm(&sub(&grid.point(i), &center)) < radius)
            .collect();
        Self::assemble(grid, Shape::Ball { center, radius }, inside)
    }

    pub fn mask(grid: Grid<S>, inside: Vec<bool>) -> Result<Self> {
        if inside.len() != grid.len() {
            return Err(Error::InvalidDomain("mask length differs from node count".into()));
        }
        if let Some(i) = (0..grid.len()).find(|&i| inside[i] && grid.on_face(i)) {
            return Err(Error::InvalidDomain(format!(
                "mask node {i} lies on the bounding box face; the domain must be open"
            )));
        }
        Self::assemble(grid, Shape::Mask, inside)
    }

    /// Open unit box (0,1)^dim with `n` nodes per axis.
    pub fn unit_box(dim: usize, n: usize) -> Result<Self> {
        Self::boxed(Grid::unit(dim, n)?)
    }

    fn assemble(grid: Grid<S>, shape: Shape<S>, inside: Vec<bool>) -> Result<Self> {
        if !inside.iter().any(|&b| b) {
            return Err(Error::EmptyDomain);
        }
        let n = grid.len();
        let mut d = Self {
            grid,
            shape,
            inside,
            delta: vec![false; n],
            any_delta: false,
            gamma: None,
            sigma: Vec::new(),
            theta_dist: Vec::new(),
        };
        d.sigma = distance::compute_sigma(&d);
        d.theta_dist = d.sigma.clone();
        Ok(d)
    }

    /// Attaches the interior zero set Δ (restricted to inside nodes).
    pub fn with_delta(mut self, delta: Vec<bool>) -> Result<Self> {
        if delta.len() != self.grid.len() {
            return Err(Error::InvalidDomain("delta mask length differs from node count".into()));
        }
        self.delta = delta
            .iter()
            .zip(&self.inside)
            .map(|(&d, &i)| d && i)
            .collect();
        self.any_delta = self.delta.iter().any(|&d| d);
        self.theta_dist = distance::compute_theta(&self);
        Ok(self)
    }

    pub fn with_gamma(mut self, gamma: Vec<bool>) -> Result<Self> {
        if gamma.len() != self.grid.len() {
            return Err(Error::InvalidDomain("gamma mask length differs from node count".into()));
        }
        self.gamma = Some(gamma);
        Ok(self)
    }

    pub fn into_arc(self) -> Arc<Self> {
        Arc::new(self)
    }

    pub fn grid(&self) -> &Grid<S> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn shape(&self) -> &Shape<S> {
        &self.shape
    }

    pub fn inside(&self) -> &[bool] {
        &self.inside
    }

    pub fn is_inside(&self, idx: usize) -> bool {
        self.inside[idx]
    }

    pub fn inside_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.inside[i]).collect()
    }

    pub fn delta(&self) -> &[bool] {
        &self.delta
    }

    pub fn has_delta(&self) -> bool {
        self.any_delta
    }

    pub fn gamma(&self) -> Option<&[bool]> {
        self.gamma.as_deref()
    }

    /// Θ = ∂Ω ∪ Δ as a node set: every node that is not inside, plus Δ.
    pub fn theta(&self) -> Vec<bool> {
        (0..self.len()).map(|i| !self.inside[i] || self.delta[i]).collect()
    }

    /// Cached σ at nodes (0 off Ω).
    pub fn sigma(&self) -> &[S] {
        &self.sigma
    }

    /// Cached dist(·, Θ) at nodes (0 on Θ).
    pub fn theta_distance(&self) -> &[S] {
        &self.theta_dist
    }

    pub fn max_sigma(&self) -> S {
        self.sigma.iter().copied().fold(S::zero(), S::max)
    }

    /// Diameter of Ω, bounded by the bounding-box diameter (exact for box domains).
    pub fn diameter(&self) -> S {
        match &self.shape {
            Shape::Ball { radius, .. } => *radius + *radius,
            _ => self.grid.diameter(),
        }
    }

    /// σ at an arbitrary point: closed form for box and ball, interpolated for masks.
    pub fn sigma_at(&self, p: &Point<S>) -> S {
        let g = &self.grid;
        match &self.shape {
            Shape::Box => {
                let mut s = S::infinity();
                for a in 0..g.dim {
                    s = s.min(p[a] - g.lo[a]).min(g.hi[a] - p[a]);
                }
                s.max(S::zero())
            }
            Shape::Ball { center, radius } => (*radius - norm(&sub(p, center))).max(S::zero()),
            Shape::Mask => g.interpolate(&self.sigma, p).unwrap_or(S::zero()),
        }
    }

    /// dist(p, Θ) at an arbitrary point.
    pub fn theta_distance_at(&self, p: &Point<S>) -> S {
        let s = self.sigma_at(p);
        if !self.has_delta() {
            return s;
        }
        distance::delta_distance(self, p, s)
    }
}

#[inline]
pub fn sub<S: Scalar>(a: &Point<S>, b: &Point<S>) -> Point<S> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn norm<S: Scalar>(a: &Point<S>) -> S {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}
