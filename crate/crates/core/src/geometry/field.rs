use std::fmt;
use std::sync::Arc;

use super::{Domain, Grid, Point, Shape};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Anything the mollifier can read values from: a gridded field (interpolated) or
/// an analytic function.
pub trait Sampler<S: Scalar>: Sync {
    fn domain(&self) -> &Arc<Domain<S>>;

    fn eval(&self, p: &Point<S>) -> Result<S>;

    fn at_node(&self, idx: usize) -> S;

    /// Length scale below which the sampler carries no information (grid spacing
    /// for gridded data, 0 for analytic samplers).
    fn resolution(&self) -> S;
}

pub trait VectorSampler<S: Scalar>: Sync {
    fn domain(&self) -> &Arc<Domain<S>>;

    fn eval(&self, p: &Point<S>) -> Result<Point<S>>;

    fn at_node(&self, idx: usize) -> Point<S>;

    fn resolution(&self) -> S;
}

/// Real values on every grid node (including nodes outside Ω, which carry the
/// extension used by interpolation near ∂Ω).
#[derive(Clone)]
pub struct ScalarField<S> {
    domain: Arc<Domain<S>>,
    values: Vec<S>,
}

impl<S: Scalar> fmt::Debug for ScalarField<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("shape", &self.domain.grid().shape())
            .field("len", &self.values.len())
            .finish()
    }
}

impl<S: Scalar> ScalarField<S> {
    pub fn new(domain: Arc<Domain<S>>, values: Vec<S>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { domain, values })
    }

    pub fn from_fn(domain: &Arc<Domain<S>>, f: impl Fn(&Point<S>) -> S + Sync) -> Self {
        use rayon::prelude::*;
        let g = domain.grid();
        let values = (0..g.len()).into_par_iter().map(|i| f(&g.point(i))).collect();
        Self { domain: domain.clone(), values }
    }

    pub fn constant(domain: &Arc<Domain<S>>, c: S) -> Self {
        Self { domain: domain.clone(), values: vec![c; domain.len()] }
    }

    pub fn zeros(domain: &Arc<Domain<S>>) -> Self {
        Self::constant(domain, S::zero())
    }

    pub fn domain(&self) -> &Arc<Domain<S>> {
        &self.domain
    }

    pub fn grid(&self) -> &Grid<S> {
        self.domain.grid()
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [S] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<S> {
        self.values
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.domain, &other.domain) || self.grid() == other.grid()
    }

    pub fn map(&self, f: impl Fn(S) -> S) -> Self {
        Self {
            domain: self.domain.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(S, S) -> S) -> Result<Self> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            domain: self.domain.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    /// max |f| over inside nodes.
    pub fn max_abs_inside(&self) -> S {
        self.inside_values().map(|v| v.abs()).fold(S::zero(), S::max)
    }

    pub fn inside_values(&self) -> impl Iterator<Item = S> + '_ {
        self.values
            .iter()
            .zip(self.domain.inside())
            .filter(|(_, &ins)| ins)
            .map(|(&v, _)| v)
    }

    /// Difference quotient of node values along `axis`: central where both
    /// neighbours are usable, one-sided otherwise. On mask domains nodes outside
    /// Ω are unusable; box and ball domains carry valid values on the closure.
    pub fn partial(&self, idx: usize, axis: usize) -> S {
        let g = self.grid();
        let h = g.spacing()[axis];
        let usable = |j: usize| match self.domain.shape() {
            Shape::Mask => self.domain.is_inside(j),
            _ => true,
        };
        let back = g.neighbor(idx, axis, false).filter(|&j| usable(j));
        let fwd = g.neighbor(idx, axis, true).filter(|&j| usable(j));
        let v = &self.values;
        match (back, fwd) {
            (Some(b), Some(f)) => (v[f] - v[b]) / (h + h),
            (None, Some(f)) => (v[f] - v[idx]) / h,
            (Some(b), None) => (v[idx] - v[b]) / h,
            (None, None) => S::zero(),
        }
    }

    /// Difference-quotient gradient at every node.
    pub fn gradient(&self) -> VectorField<S> {
        use rayon::prelude::*;
        let dim = self.grid().dim();
        let values = (0..self.values.len())
            .into_par_iter()
            .map(|i| {
                let mut g = [S::zero(); 3];
                for (a, ga) in g.iter_mut().enumerate().take(dim) {
                    *ga = self.partial(i, a);
                }
                g
            })
            .collect();
        VectorField { domain: self.domain.clone(), values }
    }
}

impl<S: Scalar> Sampler<S> for ScalarField<S> {
    fn domain(&self) -> &Arc<Domain<S>> {
        &self.domain
    }

    fn eval(&self, p: &Point<S>) -> Result<S> {
        self.grid().interpolate(&self.values, p)
    }

    fn at_node(&self, idx: usize) -> S {
        self.values[idx]
    }

    fn resolution(&self) -> S {
        self.grid().h_min()
    }
}

/// N-component field; unused components (beyond the domain dimension) are zero.
#[derive(Clone)]
pub struct VectorField<S> {
    domain: Arc<Domain<S>>,
    values: Vec<Point<S>>,
}

impl<S: Scalar> fmt::Debug for VectorField<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorField")
            .field("shape", &self.domain.grid().shape())
            .finish()
    }
}

impl<S: Scalar> VectorField<S> {
    pub fn new(domain: Arc<Domain<S>>, values: Vec<Point<S>>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { domain, values })
    }

    pub fn from_components(components: &[ScalarField<S>]) -> Result<Self> {
        let first = components.first().ok_or(Error::GridMismatch)?;
        let dim = first.grid().dim();
        if components.len() != dim {
            return Err(Error::InvalidParameter(format!(
                "expected {dim} components, got {}",
                components.len()
            )));
        }
        if components.iter().any(|c| !c.same_grid(first)) {
            return Err(Error::GridMismatch);
        }
        let values = (0..first.values.len())
            .map(|i| {
                let mut v = [S::zero(); 3];
                for (a, c) in components.iter().enumerate() {
                    v[a] = c.values[i];
                }
                v
            })
            .collect();
        Ok(Self { domain: first.domain.clone(), values })
    }

    pub fn from_fn(domain: &Arc<Domain<S>>, f: impl Fn(&Point<S>) -> Point<S> + Sync) -> Self {
        use rayon::prelude::*;
        let g = domain.grid();
        let values = (0..g.len()).into_par_iter().map(|i| f(&g.point(i))).collect();
        Self { domain: domain.clone(), values }
    }

    pub fn domain(&self) -> &Arc<Domain<S>> {
        &self.domain
    }

    pub fn values(&self) -> &[Point<S>] {
        &self.values
    }

    pub fn component(&self, axis: usize) -> ScalarField<S> {
        ScalarField {
            domain: self.domain.clone(),
            values: self.values.iter().map(|v| v[axis]).collect(),
        }
    }

    pub fn components(&self) -> Vec<ScalarField<S>> {
        (0..self.domain.dim()).map(|a| self.component(a)).collect()
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> ScalarField<S> {
        ScalarField {
            domain: self.domain.clone(),
            values: self.values.iter().map(|v| super::norm(v)).collect(),
        }
    }
}

impl<S: Scalar> VectorSampler<S> for VectorField<S> {
    fn domain(&self) -> &Arc<Domain<S>> {
        &self.domain
    }

    fn eval(&self, p: &Point<S>) -> Result<Point<S>> {
        let mut acc = [S::zero(); 3];
        self.domain.grid().stencil(p, |j, w| {
            let v = &self.values[j];
            acc[0] += w * v[0];
            acc[1] += w * v[1];
            acc[2] += w * v[2];
        })?;
        Ok(acc)
    }

    fn at_node(&self, idx: usize) -> Point<S> {
        self.values[idx]
    }

    fn resolution(&self) -> S {
        self.domain.grid().h_min()
    }
}

pub type ScalarFn<S> = Arc<dyn Fn(&Point<S>) -> S + Send + Sync>;
pub type VectorFn<S> = Arc<dyn Fn(&Point<S>) -> Point<S> + Send + Sync>;

/// Closed-form function viewed through the domain's grid: exact off-grid values,
/// resolution 0.
#[derive(Clone)]
pub struct FnSampler<S> {
    domain: Arc<Domain<S>>,
    f: ScalarFn<S>,
}

impl<S: Scalar> FnSampler<S> {
    pub fn new(domain: &Arc<Domain<S>>, f: impl Fn(&Point<S>) -> S + Send + Sync + 'static) -> Self {
        Self { domain: domain.clone(), f: Arc::new(f) }
    }

    pub fn from_arc(domain: &Arc<Domain<S>>, f: ScalarFn<S>) -> Self {
        Self { domain: domain.clone(), f }
    }

    pub fn call(&self, p: &Point<S>) -> S {
        (self.f)(p)
    }

    pub fn to_field(&self) -> ScalarField<S> {
        ScalarField::from_fn(&self.domain, |p| (self.f)(p))
    }
}

impl<S: Scalar> Sampler<S> for FnSampler<S> {
    fn domain(&self) -> &Arc<Domain<S>> {
        &self.domain
    }

    fn eval(&self, p: &Point<S>) -> Result<S> {
        if !self.domain.grid().contains_closed(p) {
            return Err(Error::OutOfDomain {
                point: p[..self.domain.dim()].iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect(),
            });
        }
        Ok((self.f)(p))
    }

    fn at_node(&self, idx: usize) -> S {
        (self.f)(&self.domain.grid().point(idx))
    }

    fn resolution(&self) -> S {
        S::zero()
    }
}

#[derive(Clone)]
pub struct FnVectorSampler<S> {
    domain: Arc<Domain<S>>,
    f: VectorFn<S>,
}

impl<S: Scalar> FnVectorSampler<S> {
    pub fn new(
        domain: &Arc<Domain<S>>,
        f: impl Fn(&Point<S>) -> Point<S> + Send + Sync + 'static,
    ) -> Self {
        Self { domain: domain.clone(), f: Arc::new(f) }
    }

    pub fn from_arc(domain: &Arc<Domain<S>>, f: VectorFn<S>) -> Self {
        Self { domain: domain.clone(), f }
    }

    pub fn to_field(&self) -> VectorField<S> {
        VectorField::from_fn(&self.domain, |p| (self.f)(p))
    }
}

impl<S: Scalar> VectorSampler<S> for FnVectorSampler<S> {
    fn domain(&self) -> &Arc<Domain<S>> {
        &self.domain
    }

    fn eval(&self, p: &Point<S>) -> Result<Point<S>> {
        if !self.domain.grid().contains_closed(p) {
            return Err(Error::OutOfDomain {
                point: p[..self.domain.dim()].iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect(),
            });
        }
        Ok((self.f)(p))
    }

    fn at_node(&self, idx: usize) -> Point<S> {
        (self.f)(&self.domain.grid().point(idx))
    }

    fn resolution(&self) -> S {
        S::zero()
    }
}

/// Magnitude of a vector sampler, itself a scalar sampler.
pub(crate) struct Magnitude<'a, S: Scalar, V: VectorSampler<S> + ?Sized> {
    pub inner: &'a V,
    pub resolution: S,
}

impl<S: Scalar, V: VectorSampler<S> + ?Sized> Sampler<S> for Magnitude<'_, S, V> {
    fn domain(&self) -> &Arc<Domain<S>> {
        self.inner.domain()
    }

    fn eval(&self, p: &Point<S>) -> Result<S> {
        Ok(super::norm(&self.inner.eval(p)?))
    }

    fn at_node(&self, idx: usize) -> S {
        super::norm(&self.inner.at_node(idx))
    }

    fn resolution(&self) -> S {
        self.resolution
    }
}

/// One component of a vector sampler.
pub(crate) struct Component<'a, S: Scalar, V: VectorSampler<S> + ?Sized> {
    pub inner: &'a V,
    pub axis: usize,
    pub resolution: S,
}

impl<S: Scalar, V: VectorSampler<S> + ?Sized> Sampler<S> for Component<'_, S, V> {
    fn domain(&self) -> &Arc<Domain<S>> {
        self.inner.domain()
    }

    fn eval(&self, p: &Point<S>) -> Result<S> {
        Ok(self.inner.eval(p)?[self.axis])
    }

    fn at_node(&self, idx: usize) -> S {
        self.inner.at_node(idx)[self.axis]
    }

    fn resolution(&self) -> S {
        self.resolution
    }
}
