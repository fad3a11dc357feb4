//! Compactly supported polynomial kernels, the smoothed indicator built on
//! them, and the moment weights `w_k(u) = u^k K(u)`.
//!
//! Every kernel is supported on `(-1, 1)`, symmetric and integrates to one.
//! Inside the support all evaluators are closed-form polynomials, outside
//! they return exactly zero.

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// Closed family of kernels used by the estimator.
///
/// `Triweight` is the x-localising kernel (twice continuously differentiable),
/// `Biweight` is the y-smoothing kernel (continuously differentiable).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kernel {
    /// `(35/32) (1 - u^2)^3`
    Triweight,
    /// `(15/16) (1 - u^2)^2`
    Biweight,
}

impl Kernel {
    pub const SUPPORT_RADIUS: f64 = 1.0;

    pub fn name(self) -> &'static str {
        match self {
            Kernel::Triweight => "triweight",
            Kernel::Biweight => "biweight",
        }
    }

    /// Highest derivative order the estimator may request.
    pub fn max_order(self) -> usize {
        match self {
            Kernel::Triweight => 2,
            Kernel::Biweight => 1,
        }
    }

    /// Kernel value or derivative of order `order` at `u`.
    pub fn eval(self, u: f64, order: usize) -> Result<f64> {
        if order > self.max_order() {
            return Err(Error::UnsupportedOrder {
                kernel: self.name(),
                order,
            });
        }
        Ok(self.eval_unchecked(u, order))
    }

    /// Same as [`Kernel::eval`] without the order check. Orders above the
    /// supported maximum evaluate to zero.
    #[inline]
    pub fn eval_unchecked(self, u: f64, order: usize) -> f64 {
        if !(u > -1.0 && u < 1.0) {
            return 0.0;
        }
        let s = 1.0 - u * u;
        match (self, order) {
            (Kernel::Triweight, 0) => 35.0 / 32.0 * s * s * s,
            (Kernel::Triweight, 1) => -105.0 / 16.0 * u * s * s,
            (Kernel::Triweight, 2) => -105.0 / 16.0 * s * (1.0 - 5.0 * u * u),
            (Kernel::Biweight, 0) => 15.0 / 16.0 * s * s,
            (Kernel::Biweight, 1) => -15.0 / 4.0 * u * s,
            _ => 0.0,
        }
    }

    /// Value, first and second derivative in one pass (second is zero for
    /// the biweight).
    #[inline]
    pub fn eval_all(self, u: f64) -> [f64; 3] {
        if !(u > -1.0 && u < 1.0) {
            return [0.0; 3];
        }
        let s = 1.0 - u * u;
        match self {
            Kernel::Triweight => [
                35.0 / 32.0 * s * s * s,
                -105.0 / 16.0 * u * s * s,
                -105.0 / 16.0 * s * (1.0 - 5.0 * u * u),
            ],
            Kernel::Biweight => [15.0 / 16.0 * s * s, -15.0 / 4.0 * u * s, 0.0],
        }
    }

    /// Antiderivative `∫_{-∞}^{u} k(t) dt`, clamped to 0 and 1 outside the
    /// support.
    #[inline]
    pub fn integral(self, u: f64) -> f64 {
        if u <= -1.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return 1.0;
        }
        let u2 = u * u;
        match self {
            Kernel::Biweight => 15.0 / 16.0 * u * (1.0 - u2 * (2.0 / 3.0 - u2 / 5.0)) + 0.5,
            Kernel::Triweight => 35.0 / 32.0 * u * (1.0 - u2 * (1.0 - u2 * (3.0 / 5.0 - u2 / 7.0))) + 0.5,
        }
    }

    /// Moment weight `w_k(u) = u^k K(u)` or its derivative of order `order`.
    pub fn weight(self, k: usize, u: f64, order: usize) -> Result<f64> {
        if k > 3 {
            return Err(crate::error::invalid("k", format!("moment index {k} > 3")));
        }
        if order > self.max_order() {
            return Err(Error::UnsupportedOrder {
                kernel: self.name(),
                order,
            });
        }
        let [k0, k1, k2] = self.eval_all(u);
        let pw = |e: i32| if e < 0 { 0.0 } else { u.powi(e) };
        let kk = k as i32;
        let kf = k as f64;
        Ok(match order {
            0 => pw(kk) * k0,
            1 => kf * pw(kk - 1) * k0 + pw(kk) * k1,
            _ => kf * (kf - 1.0) * pw(kk - 2) * k0 + 2.0 * kf * pw(kk - 1) * k1 + pw(kk) * k2,
        })
    }

    /// Constants `a_K = 2∫₀¹ u K(u) du` and `c_K = 2∫₀¹ (u - a_K)² K(u) du`
    /// that bound the local-linear determinant from below.
    pub fn moment_constants(self) -> (f64, f64) {
        let gl = GaussLegendre::new(64);
        let a = 2.0 * gl.integrate(0.0, 1.0, |u| u * self.eval_unchecked(u, 0));
        let c = 2.0 * gl.integrate(0.0, 1.0, |u| (u - a) * (u - a) * self.eval_unchecked(u, 0));
        (a, c)
    }
}

/// `φ_h(y, Y) = ∫_{-∞}^{y} L_h(t - Y) dt`, a smooth replacement for the
/// indicator `1{Y ≤ y}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothedIndicator {
    kernel: Kernel,
    bandwidth: f64,
}

impl SmoothedIndicator {
    pub fn new(kernel: Kernel, bandwidth: f64) -> Result<Self> {
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(crate::error::invalid(
                "h",
                format!("bandwidth must be positive, got {bandwidth}"),
            ));
        }
        Ok(Self { kernel, bandwidth })
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    #[inline]
    pub fn phi(&self, y: f64, obs: f64) -> f64 {
        self.kernel.integral((y - obs) / self.bandwidth)
    }

    /// `∂φ_h(y, Y)/∂y = L_h(y - Y)`.
    #[inline]
    pub fn phi_dy(&self, y: f64, obs: f64) -> f64 {
        self.kernel.eval_unchecked((y - obs) / self.bandwidth, 0) / self.bandwidth
    }
}
