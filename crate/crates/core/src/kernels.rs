//! Radial kernel profiles and the symmetric midpoint quadrature on the unit ball.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::scalar::{from_usize, lit, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Profile {
    /// exp(−1/(1−r²)).
    Bump,
    /// Indicator of the unit ball. Not smooth; only for the counterexample.
    Box,
    /// Equal to 1 on r ≤ 1 − 1/n, smooth bridge down to 0 at r = 1.
    Plateau(u32),
}

impl Profile {
    pub fn is_smooth(self) -> bool {
        !matches!(self, Profile::Box)
    }

    /// Profile value at radius `r ≥ 0`.
    pub fn value<S: Scalar>(self, r: S) -> S {
        let one = S::one();
        if r >= one {
            return S::zero();
        }
        match self {
            Profile::Bump => (-one / (one - r * r)).exp(),
            Profile::Box => one,
            Profile::Plateau(n) => {
                let a = one - one / from_usize::<S>(n.max(1) as usize);
                if r <= a {
                    one
                } else {
                    let t = (r - a) / (one - a);
                    smooth_step_down(t)
                }
            }
        }
    }
}

/// C∞ transition equal to 1 at t ≤ 0 and 0 at t ≥ 1.
fn smooth_step_down<S: Scalar>(t: S) -> S {
    let g = |s: S| if s <= S::zero() { S::zero() } else { (-S::one() / s).exp() };
    let a = g(S::one() - t);
    let b = g(t);
    if a + b == S::zero() {
        S::zero()
    } else {
        a / (a + b)
    }
}

/// Kernel with its quadrature rule. Nodes come in ± pairs stored consecutively
/// (`nodes[2k+1] = −nodes[2k]`), followed by the centre node when `order` is odd,
/// so odd moments cancel exactly.
#[derive(Clone, Debug)]
pub struct Kernel<S> {
    profile: Profile,
    dim: usize,
    order: usize,
    nodes: Vec<Point<S>>,
    weights: Vec<S>,
    rho: Vec<S>,
    /// w_k ρ(z_k) M_ρ, the normalized tap weights.
    taps: Vec<S>,
    m_rho: S,
    radius: S,
}

impl<S: Scalar> Kernel<S> {
    pub fn profile(&self) -> Profile {
        self.profile
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nodes(&self) -> &[Point<S>] {
        &self.nodes
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn rho_values(&self) -> &[S] {
        &self.rho
    }

    /// Normalized weights M_ρ w_k ρ(z_k); they sum to 1.
    pub fn taps(&self) -> &[S] {
        &self.taps
    }

    pub fn m_rho(&self) -> S {
        self.m_rho
    }

    /// Largest |z_k| among nodes with nonzero weight.
    pub fn radius(&self) -> S {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

pub fn make_kernel<S: Scalar>(profile: Profile, dim: usize, order: usize) -> Result<Kernel<S>> {
    if !(1..=3).contains(&dim) {
        return Err(Error::UnsupportedDim(dim));
    }
    if order < 2 {
        return Err(Error::InvalidParameter(format!("quadrature order {order} < 2")));
    }
    if let Profile::Plateau(0) = profile {
        return Err(Error::InvalidParameter("plateau index must be ≥ 1".into()));
    }
    let q = order as i64;
    let coord = |k: i64| -> S { lit::<S>((2 * k + 1 - q) as f64) / from_usize::<S>(order) };
    let cell = (lit::<S>(2.0) / from_usize::<S>(order)).powi(dim as i32);
    let per_axis = |d: usize| if d < dim { q } else { 1 };
    let mut nodes = Vec::new();
    let mut rho = Vec::new();
    let mut centre = None;
    for i in 0..per_axis(0) {
        for j in 0..per_axis(1) {
            for k in 0..per_axis(2) {
                let idx = [i, j, k];
                let mirror = [
                    if dim > 0 { q - 1 - i } else { i },
                    if dim > 1 { q - 1 - j } else { j },
                    if dim > 2 { q - 1 - k } else { k },
                ];
                if idx > mirror {
                    continue;
                }
                let mut z = [S::zero(); 3];
                for a in 0..dim {
                    z[a] = coord(idx[a]);
                }
                let r = (z[0] * z[0] + z[1] * z[1] + z[2] * z[2]).sqrt();
                let v = profile.value(r);
                if v <= S::zero() {
                    continue;
                }
                if idx == mirror {
                    centre = Some((z, v));
                } else {
                    nodes.push(z);
                    rho.push(v);
                    nodes.push([-z[0], -z[1], -z[2]]);
                    rho.push(v);
                }
            }
        }
    }
    if let Some((z, v)) = centre {
        nodes.push(z);
        rho.push(v);
    }
    let weights = vec![cell; nodes.len()];
    let mass: S = rho.iter().map(|&r| r * cell).sum();
    let m_rho = S::one() / mass;
    let taps = rho.iter().map(|&r| r * cell * m_rho).collect();
    let radius = nodes
        .iter()
        .map(|z| (z[0] * z[0] + z[1] * z[1] + z[2] * z[2]).sqrt())
        .fold(S::zero(), S::max);
    Ok(Kernel { profile, dim, order, nodes, weights, rho, taps, m_rho, radius })
}

/// Σ_k w_k ρ(z_k) z_k^α for a multi-index α of total degree ≤ 4. Pairs are
/// summed together so odd moments vanish exactly.
pub fn kernel_moment<S: Scalar>(kernel: &Kernel<S>, multi_index: &[u32]) -> Result<S> {
    if multi_index.len() != kernel.dim {
        return Err(Error::InvalidParameter("multi-index length must equal the dimension".into()));
    }
    if multi_index.iter().sum::<u32>() > 4 {
        return Err(Error::InvalidParameter("moment degree above 4".into()));
    }
    let mono = |z: &Point<S>| {
        multi_index
            .iter()
            .enumerate()
            .fold(S::one(), |acc, (a, &e)| acc * z[a].powi(e as i32))
    };
    let n = kernel.nodes.len();
    let paired = n - n % 2;
    let mut acc = S::zero();
    let mut k = 0;
    while k + 1 < paired {
        let w = kernel.weights[k] * kernel.rho[k];
        acc += w * (mono(&kernel.nodes[k]) + mono(&kernel.nodes[k + 1]));
        k += 2;
    }
    if n % 2 == 1 {
        acc += kernel.weights[n - 1] * kernel.rho[n - 1] * mono(&kernel.nodes[n - 1]);
    }
    Ok(acc)
}

/// JSON kernel description `{"profile":"bump"|"box"|"plateau","n":<int?>,"order":<int>}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub profile: String,
    #[serde(default)]
    pub n: Option<u32>,
    pub order: usize,
}

impl KernelSpec {
    pub fn bump(order: usize) -> Self {
        Self { profile: "bump".into(), n: None, order }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn profile(&self) -> Result<Profile> {
        match self.profile.as_str() {
            "bump" => Ok(Profile::Bump),
            "box" => Ok(Profile::Box),
            "plateau" => Ok(Profile::Plateau(self.n.ok_or_else(|| {
                Error::InvalidParameter("plateau kernel needs \"n\"".into())
            })?)),
            other => Err(Error::InvalidParameter(format!("unknown kernel profile `{other}`"))),
        }
    }

    pub fn build<S: Scalar>(&self, dim: usize) -> Result<Kernel<S>> {
        make_kernel(self.profile()?, dim, self.order)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// ∫₋₁¹ exp(−1/(1−x²)) dx by composite Simpson on a substitution-free fine grid,
    /// Richardson-extrapolated.
    fn bump_integral_1d() -> f64 {
        let simpson = |m: usize| {
            let h = 2.0 / m as f64;
            let f = |x: f64| if x.abs() >= 1.0 { 0.0 } else { (-1.0 / (1.0 - x * x)).exp() };
            let mut s = f(-1.0) + f(1.0);
            for i in 1..m {
                let x = -1.0 + i as f64 * h;
                s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
            }
            s * h / 3.0
        };
        let a = simpson(20_000);
        let b = simpson(40_000);
        b + (b - a) / 15.0
    }

    #[test]
    fn bump_constant_1d() {
        let k = make_kernel::<f64>(Profile::Bump, 1, 200).unwrap();
        let oracle = 1.0 / bump_integral_1d();
        assert!((oracle - 2.2523).abs() < 1e-3, "oracle {oracle}");
        assert!((k.m_rho() - oracle).abs() < 1e-6, "{} vs {oracle}", k.m_rho());
    }

    #[test]
    fn box_constant_and_moments() {
        for order in [2, 7, 64] {
            let k = make_kernel::<f64>(Profile::Box, 1, order).unwrap();
            assert!((k.m_rho() - 0.5).abs() < 1e-15);
            assert!((kernel_moment(&k, &[0]).unwrap() - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn odd_moments_vanish_exactly() {
        let k1 = make_kernel::<f64>(Profile::Bump, 1, 65).unwrap();
        assert_eq!(kernel_moment(&k1, &[1]).unwrap(), 0.0);
        assert_eq!(kernel_moment(&k1, &[3]).unwrap(), 0.0);
        let k2 = make_kernel::<f64>(Profile::Bump, 2, 32).unwrap();
        assert_eq!(kernel_moment(&k2, &[1, 0]).unwrap(), 0.0);
        assert_eq!(kernel_moment(&k2, &[2, 1]).unwrap(), 0.0);
        assert!(kernel_moment(&k2, &[2, 0]).unwrap() > 0.0);
    }

    #[test]
    fn nodes_are_paired() {
        let k = make_kernel::<f64>(Profile::Bump, 2, 9).unwrap();
        let n = k.len();
        for p in (0..n - n % 2).step_by(2) {
            let (a, b) = (k.nodes()[p], k.nodes()[p + 1]);
            assert_eq!([a[0], a[1]], [-b[0], -b[1]]);
        }
        assert_eq!(k.nodes()[n - 1], [0.0, 0.0, 0.0]);
    }

    #[test]
    fn taps_normalized() {
        let k = make_kernel::<f64>(Profile::Bump, 2, 32).unwrap();
        let s: f64 = k.taps().iter().sum();
        assert!((s - 1.0).abs() < 1e-13);
        assert!((k.m_rho() * k.rho_values().iter().zip(k.weights()).map(|(r, w)| r * w).sum::<f64>() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn plateau_is_one_on_inner_ball() {
        for n in [2u32, 4, 8, 16] {
            let r = 1.0 - 1.0 / n as f64 - 1e-9;
            assert_eq!(Profile::Plateau(n).value(r), 1.0);
            assert!(Profile::Plateau(n).value(0.999_999_f64) < 1e-3);
            assert_eq!(Profile::Plateau(n).value(1.0_f64), 0.0);
        }
    }

    #[test]
    fn plateau_constant_bound() {
        for n in [2u32, 4, 8, 16] {
            for dim in [1usize, 2] {
                let order = if dim == 1 { 256 } else { 96 };
                let k = make_kernel::<f64>(Profile::Plateau(n), dim, order).unwrap();
                let omega = crate::scalar::unit_ball_volume::<f64>(dim);
                let bound = 1.0 / (omega * (1.0 - 1.0 / n as f64).powi(dim as i32));
                assert!(k.m_rho() <= bound * 1.01, "n={n} dim={dim}");
            }
        }
    }

    #[test]
    fn profiles_monotone_in_radius() {
        for p in [Profile::Bump, Profile::Box, Profile::Plateau(3)] {
            let mut prev = 1.0_f64;
            for i in 0..=1000 {
                let v = p.value(i as f64 / 1000.0);
                assert!((0.0..=1.0).contains(&v) && v <= prev + 1e-15);
                prev = v;
            }
        }
    }

    #[test]
    fn bump_refinement_converges_quadratically() {
        let m = |q| make_kernel::<f64>(Profile::Bump, 1, q).unwrap().m_rho();
        let (a, b, c) = (m(16), m(32), m(64));
        assert!((c - b).abs() < (b - a).abs());
        assert!((b - a).abs() * 16.0f64.powi(2) < 10.0);
    }
}
