//! Built-in test functions with closed-form gradients.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Domain, FnSampler, FnVectorSampler, Point, Sampler, ScalarField, VectorSampler};
use crate::scalar::{lit, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regularity {
    Continuous,
    Sobolev,
    /// Bounded variation with jumps.
    Bv,
}

pub type DynSampler<S> = Arc<dyn Sampler<S> + Send + Sync>;
pub type DynVectorSampler<S> = Arc<dyn VectorSampler<S> + Send + Sync>;

#[derive(Clone)]
pub struct Fixture<S: Scalar> {
    pub name: String,
    pub regularity: Regularity,
    pub f: DynSampler<S>,
    /// Exact gradient when known.
    pub grad: Option<DynVectorSampler<S>>,
}

impl<S: Scalar> Fixture<S> {
    fn analytic(
        name: &str,
        regularity: Regularity,
        domain: &Arc<Domain<S>>,
        f: impl Fn(&Point<S>) -> S + Send + Sync + 'static,
        grad: Option<Box<dyn Fn(&Point<S>) -> Point<S> + Send + Sync>>,
    ) -> Self {
        Self {
            name: name.into(),
            regularity,
            f: Arc::new(FnSampler::new(domain, f)),
            grad: grad.map(|g| Arc::new(FnVectorSampler::new(domain, move |p| g(p))) as DynVectorSampler<S>),
        }
    }

    /// Π sin(π xᵢ), vanishing on the boundary of the unit box.
    pub fn sin(domain: &Arc<Domain<S>>) -> Self {
        let dim = domain.dim();
        let pi: S = lit(PI);
        let f = move |p: &Point<S>| (0..dim).map(|a| (pi * p[a]).sin()).fold(S::one(), |x, y| x * y);
        let g = move |p: &Point<S>| {
            let mut out = [S::zero(); 3];
            for (a, o) in out.iter_mut().enumerate().take(dim) {
                *o = (0..dim)
                    .map(|b| if a == b { pi * (pi * p[b]).cos() } else { (pi * p[b]).sin() })
                    .fold(S::one(), |x, y| x * y);
            }
            out
        };
        Self::analytic("sin", Regularity::Continuous, domain, f, Some(Box::new(g)))
    }

    /// Σ xᵢ³.
    pub fn poly(domain: &Arc<Domain<S>>) -> Self {
        let dim = domain.dim();
        let three: S = lit(3.0);
        let f = move |p: &Point<S>| (0..dim).map(|a| p[a] * p[a] * p[a]).sum::<S>();
        let g = move |p: &Point<S>| {
            let mut out = [S::zero(); 3];
            for (a, o) in out.iter_mut().enumerate().take(dim) {
                *o = three * p[a] * p[a];
            }
            out
        };
        Self::analytic("poly", Regularity::Sobolev, domain, f, Some(Box::new(g)))
    }

    /// χ{x₀ > 1/2}, total variation 1 across the unit box's cross-section.
    pub fn step(domain: &Arc<Domain<S>>) -> Self {
        let half: S = lit(0.5);
        let f = move |p: &Point<S>| if p[0] > half { S::one() } else { S::zero() };
        Self::analytic("step", Regularity::Bv, domain, f, None)
    }

    /// Π xᵢ(1 − xᵢ).
    pub fn bubble(domain: &Arc<Domain<S>>) -> Self {
        let dim = domain.dim();
        let two: S = lit(2.0);
        let f = move |p: &Point<S>| (0..dim).map(|a| p[a] * (S::one() - p[a])).fold(S::one(), |x, y| x * y);
        let g = move |p: &Point<S>| {
            let mut out = [S::zero(); 3];
            for (a, o) in out.iter_mut().enumerate().take(dim) {
                *o = (0..dim)
                    .map(|b| if a == b { S::one() - two * p[b] } else { p[b] * (S::one() - p[b]) })
                    .fold(S::one(), |x, y| x * y);
            }
            out
        };
        Self::analytic("bubble", Regularity::Continuous, domain, f, Some(Box::new(g)))
    }

    pub fn constant(domain: &Arc<Domain<S>>, c: S) -> Self {
        Self::analytic("constant", Regularity::Continuous, domain, move |_| c, Some(Box::new(|_| [S::zero(); 3])))
    }

    /// A gridded field (interpolated between nodes; no exact gradient).
    pub fn custom(name: &str, field: ScalarField<S>) -> Self {
        Self { name: name.into(), regularity: Regularity::Sobolev, f: Arc::new(field), grad: None }
    }

    pub fn by_name(name: &str, domain: &Arc<Domain<S>>) -> Result<Self> {
        match name {
            "sin" => Ok(Self::sin(domain)),
            "poly" => Ok(Self::poly(domain)),
            "step" => Ok(Self::step(domain)),
            "bubble" => Ok(Self::bubble(domain)),
            "constant" => Ok(Self::constant(domain, S::one())),
            other => Err(Error::InvalidParameter(format!("unknown fixture `{other}`"))),
        }
    }

    pub fn field(&self) -> ScalarField<S> {
        let d = self.f.domain();
        let vals = (0..d.len()).map(|i| self.f.at_node(i)).collect();
        ScalarField::new(d.clone(), vals).expect("fixture lives on its domain")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradients_match_differences() {
        let d = Domain::<f64>::unit_box(2, 81).unwrap().into_arc();
        for fx in [Fixture::sin(&d), Fixture::poly(&d), Fixture::bubble(&d)] {
            let grad = fx.grad.clone().unwrap();
            let fd = fx.field().gradient();
            let h = d.grid().h_max();
            for i in d.inside_indices() {
                let g = grad.at_node(i);
                let e = fd.values()[i];
                assert!((g[0] - e[0]).abs() < 20.0 * h * h && (g[1] - e[1]).abs() < 20.0 * h * h, "{}", fx.name);
            }
        }
    }
}
