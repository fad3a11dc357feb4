//! Smoothed local-linear estimator of a conditional distribution function.
//!
//! For a sample `(X_i, Y_i)` the estimate of `F(y|x)` is the intercept of a
//! weighted least-squares fit of `a + b (X_i - x)` to the smoothed indicators
//! `φ_{h2}(y, Y_i)`, with weights `K((x - X_i)/h1)`. Writing
//!
//! ```text
//! p_k(x)    = n⁻¹ Σ w_{k,h1}(x - X_i)
//! Q_k(y, x) = n⁻¹ Σ φ_{h2}(y, Y_i) w_{k,h1}(x - X_i)
//! q_k(y, x) = n⁻¹ Σ L_{h2}(y - Y_i) w_{k,h1}(x - X_i)
//! ```
//!
//! with `w_{k,h}(t) = h⁻¹ (t/h)^k K(t/h)`, the intercept has the closed form
//! `(Q_0 p_2 - Q_1 p_1) / (p_0 p_2 - p_1²)` and the estimated density is the
//! same expression with `q_k` in place of `Q_k`.
//!
//! The sample is kept sorted by `x`, so every evaluation only touches the
//! observations in `(x - h1, x + h1)`.

use std::ops::Range;

use crate::error::{invalid, Error, Result};
use crate::kernels::{Kernel, SmoothedIndicator};

/// Number of equally spaced points of the inversion grid.
pub const INVERSION_GRID_SIZE: usize = 512;
/// Relative determinant floor, scaled by the squared peak of `p_0`.
pub const DET_FLOOR_RELATIVE: f64 = 1e-12;
/// Pilot grid used to locate the peak of `p_0`.
const PILOT_GRID_SIZE: usize = 64;
/// Bisection stops once the bracket is below this fraction of the grid span.
const BISECTION_TOL_RELATIVE: f64 = 1e-10;

/// Observations `(x, y)` sorted ascending in `x`.
#[derive(Clone, Debug)]
pub struct Sample1D {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Sample1D {
    pub fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        if x.len() != y.len() {
            return Err(invalid(
                "y",
                format!("length {} differs from x length {}", y.len(), x.len()),
            ));
        }
        if x.len() < 2 {
            return Err(invalid("n", "at least two observations are required"));
        }
        if x.iter().chain(y).any(|v| !v.is_finite()) {
            return Err(invalid("sample", "all values must be finite"));
        }
        let mut idx: Vec<usize> = (0..x.len()).collect();
        idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
        Ok(Self {
            x: idx.iter().map(|&i| x[i]).collect(),
            y: idx.iter().map(|&i| y[i]).collect(),
        })
    }

    pub fn from_pairs(points: &[(f64, f64)]) -> Result<Self> {
        let (x, y): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
        Self::new(&x, &y)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    fn y_range(&self) -> (f64, f64) {
        self.y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
    }
}

/// `h1` localises in `x`, `h2` smooths in `y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bandwidths {
    pub h1: f64,
    pub h2: f64,
}

impl Bandwidths {
    pub fn new(h1: f64, h2: f64) -> Result<Self> {
        if !(h1 > 0.0 && h1.is_finite()) {
            return Err(invalid("h1", format!("must be positive, got {h1}")));
        }
        if !(h2 > 0.0 && h2.is_finite()) {
            return Err(invalid("h2", format!("must be positive, got {h2}")));
        }
        Ok(Self { h1, h2 })
    }

    /// `h1 = h2 = c · n^exponent`.
    pub fn from_rule(c: f64, exponent: f64, n: usize) -> Result<Self> {
        let h = c * (n as f64).powf(exponent);
        Self::new(h, h)
    }
}

/// Fitted smoothed local-linear estimator (triweight `K`, biweight `L`).
#[derive(Clone, Debug)]
pub struct ConditionalCdfFit {
    sample: Sample1D,
    bandwidths: Bandwidths,
    x_kernel: Kernel,
    indicator: SmoothedIndicator,
    grid: Vec<f64>,
    det_floor: f64,
}

/// The local design at a fixed `x`: per-observation weights and the moments
/// `p_0, p_1, p_2`. Reused across many `y` evaluations at the same `x`.
#[derive(Clone, Debug)]
pub struct LocalDesign<'a> {
    fit: &'a ConditionalCdfFit,
    x: f64,
    window: Range<usize>,
    // w_{0,h1}(x - X_i)/n and w_{1,h1}(x - X_i)/n for i in the window
    w0: Vec<f64>,
    w1: Vec<f64>,
    p: [f64; 3],
    det: f64,
}

impl ConditionalCdfFit {
    pub fn new(sample: Sample1D, bandwidths: Bandwidths) -> Result<Self> {
        let indicator = SmoothedIndicator::new(Kernel::Biweight, bandwidths.h2)?;
        let (ymin, ymax) = sample.y_range();
        let lo = ymin - bandwidths.h2;
        let hi = ymax + bandwidths.h2;
        let step = (hi - lo) / (INVERSION_GRID_SIZE - 1) as f64;
        let grid = (0..INVERSION_GRID_SIZE).map(|i| lo + step * i as f64).collect();
        let mut fit = Self {
            sample,
            bandwidths,
            x_kernel: Kernel::Triweight,
            indicator,
            grid,
            det_floor: 0.0,
        };
        let xs = fit.sample.x();
        let (xmin, xmax) = (xs[0], xs[xs.len() - 1]);
        let peak = (0..PILOT_GRID_SIZE)
            .map(|i| xmin + (xmax - xmin) * i as f64 / (PILOT_GRID_SIZE - 1) as f64)
            .map(|x| fit.p_hat_unchecked(0, x, 0))
            .fold(0.0f64, f64::max);
        fit.det_floor = DET_FLOOR_RELATIVE * peak * peak;
        Ok(fit)
    }

    pub fn from_xy(x: &[f64], y: &[f64], bandwidths: Bandwidths) -> Result<Self> {
        Self::new(Sample1D::new(x, y)?, bandwidths)
    }

    pub fn sample(&self) -> &Sample1D {
        &self.sample
    }

    pub fn bandwidths(&self) -> Bandwidths {
        self.bandwidths
    }

    pub fn inversion_grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn det_floor(&self) -> f64 {
        self.det_floor
    }

    fn n(&self) -> f64 {
        self.sample.len() as f64
    }

    /// Indices of the observations with `|x - X_i| < h1`.
    fn window(&self, x: f64) -> Range<usize> {
        let xs = self.sample.x();
        let h = self.bandwidths.h1;
        let lo = xs.partition_point(|&v| v <= x - h);
        let hi = xs.partition_point(|&v| v < x + h);
        lo..hi.max(lo)
    }

    /// `p_k(x)` or its `deriv`-th derivative in `x`, for `k ∈ {0,1,2,3}`.
    pub fn p_hat(&self, k: usize, x: f64, deriv: usize) -> Result<f64> {
        if k > 3 {
            return Err(invalid("k", format!("moment index {k} > 3")));
        }
        if deriv > 2 {
            return Err(Error::UnsupportedOrder {
                kernel: self.x_kernel.name(),
                order: deriv,
            });
        }
        Ok(self.p_hat_unchecked(k, x, deriv))
    }

    fn p_hat_unchecked(&self, k: usize, x: f64, deriv: usize) -> f64 {
        let h = self.bandwidths.h1;
        let scale = h.powi(-(1 + deriv as i32)) / self.n();
        self.window(x)
            .map(|i| {
                let u = (x - self.sample.x[i]) / h;
                self.x_kernel.weight(k, u, deriv).unwrap_or(0.0)
            })
            .sum::<f64>()
            * scale
    }

    /// `Q_k(y, x)` for `k ∈ {0, 1}`.
    pub fn q_cdf_hat(&self, k: usize, y: f64, x: f64) -> Result<f64> {
        if k > 1 {
            return Err(invalid("k", format!("Q_k is only needed for k <= 1, got {k}")));
        }
        let h = self.bandwidths.h1;
        let s: f64 = self
            .window(x)
            .map(|i| {
                let u = (x - self.sample.x[i]) / h;
                self.indicator.phi(y, self.sample.y[i]) * self.x_kernel.weight(k, u, 0).unwrap_or(0.0)
            })
            .sum();
        Ok(s / (h * self.n()))
    }

    /// `q_k(y, x)` for `k ∈ {0, 1}`.
    pub fn q_density_hat(&self, k: usize, y: f64, x: f64) -> Result<f64> {
        if k > 1 {
            return Err(invalid("k", format!("q_k is only needed for k <= 1, got {k}")));
        }
        let h = self.bandwidths.h1;
        let s: f64 = self
            .window(x)
            .map(|i| {
                let u = (x - self.sample.x[i]) / h;
                self.indicator.phi_dy(y, self.sample.y[i]) * self.x_kernel.weight(k, u, 0).unwrap_or(0.0)
            })
            .sum();
        Ok(s / (h * self.n()))
    }

    /// Local design at `x` (never fails; check [`LocalDesign::is_degenerate`]).
    pub fn design(&self, x: f64) -> LocalDesign<'_> {
        let h = self.bandwidths.h1;
        let norm = 1.0 / (h * self.n());
        let window = self.window(x);
        let mut w0 = Vec::with_capacity(window.len());
        let mut w1 = Vec::with_capacity(window.len());
        let mut p = [0.0; 3];
        for i in window.clone() {
            let u = (x - self.sample.x[i]) / h;
            let k = self.x_kernel.eval_unchecked(u, 0);
            w0.push(k);
            w1.push(u * k);
            p[0] += k;
            p[1] += u * k;
            p[2] += u * u * k;
        }
        for v in &mut p {
            *v *= norm;
        }
        for v in w0.iter_mut().chain(w1.iter_mut()) {
            *v *= norm;
        }
        let det = p[0] * p[2] - p[1] * p[1];
        LocalDesign {
            fit: self,
            x,
            window,
            w0,
            w1,
            p,
            det,
        }
    }

    /// `p_0(x) p_2(x) - p_1(x)²`.
    pub fn determinant(&self, x: f64) -> f64 {
        self.design(x).det
    }

    fn checked_design(&self, x: f64) -> Result<LocalDesign<'_>> {
        let d = self.design(x);
        if d.is_degenerate() {
            return Err(Error::DegenerateDesign {
                x,
                det: d.det,
                floor: self.det_floor,
            });
        }
        Ok(d)
    }

    /// `F̂(y|x)`. Not clamped to `[0, 1]`.
    pub fn cdf(&self, y: f64, x: f64) -> Result<f64> {
        Ok(self.checked_design(x)?.cdf(y))
    }

    /// `f̂(y|x) = ∂F̂(y|x)/∂y`.
    pub fn density(&self, y: f64, x: f64) -> Result<f64> {
        Ok(self.checked_design(x)?.density(y))
    }

    /// `∂ₓF̂(y|x)` (`order = 1`) or `∂ₓ²F̂(y|x)` (`order = 2`).
    pub fn cdf_dx(&self, y: f64, x: f64, order: usize) -> Result<f64> {
        if !(1..=2).contains(&order) {
            return Err(Error::UnsupportedOrder {
                kernel: self.x_kernel.name(),
                order,
            });
        }
        let d = self.checked_design(x)?;
        let h = self.bandwidths.h1;
        let n = self.n();
        // p[k][d], q[k][d]: d-th x-derivative of p_k and Q_k
        let mut p = [[0.0; 3]; 3];
        let mut q = [[0.0; 3]; 2];
        for i in d.window.clone() {
            let u = (x - self.sample.x[i]) / h;
            let phi = self.indicator.phi(y, self.sample.y[i]);
            for (dd, scale) in [1.0 / h, 1.0 / (h * h), 1.0 / (h * h * h)].into_iter().enumerate() {
                for k in 0..3 {
                    let w = self.x_kernel.weight(k, u, dd)? * scale;
                    p[k][dd] += w;
                    if k < 2 {
                        q[k][dd] += phi * w;
                    }
                }
            }
        }
        for row in p.iter_mut().chain(q.iter_mut()) {
            for v in row.iter_mut() {
                *v /= n;
            }
        }
        let num = [
            q[0][0] * p[2][0] - q[1][0] * p[1][0],
            q[0][1] * p[2][0] + q[0][0] * p[2][1] - q[1][1] * p[1][0] - q[1][0] * p[1][1],
            q[0][2] * p[2][0] + 2.0 * q[0][1] * p[2][1] + q[0][0] * p[2][2]
                - q[1][2] * p[1][0]
                - 2.0 * q[1][1] * p[1][1]
                - q[1][0] * p[1][2],
        ];
        let den = [
            p[0][0] * p[2][0] - p[1][0] * p[1][0],
            p[0][1] * p[2][0] + p[0][0] * p[2][1] - 2.0 * p[1][0] * p[1][1],
            p[0][2] * p[2][0] + 2.0 * p[0][1] * p[2][1] + p[0][0] * p[2][2]
                - 2.0 * (p[1][1] * p[1][1] + p[1][0] * p[1][2]),
        ];
        let f = num[0] / den[0];
        let f1 = (num[1] - f * den[1]) / den[0];
        if order == 1 {
            return Ok(f1);
        }
        Ok((num[2] - 2.0 * f1 * den[1] - f * den[2]) / den[0])
    }

    /// Generalised inverse `inf{y : F̂(y|x) ≥ u}`, located as the first
    /// upcrossing on the inversion grid and refined by bisection.
    pub fn quantile(&self, u: f64, x: f64) -> Result<f64> {
        check_level(u)?;
        let d = self.checked_design(x)?;
        let values = d.cdf_on_grid();
        d.quantile_with_grid(u, &values)
    }

    /// Quantiles at several levels, sharing one grid scan.
    pub fn quantiles(&self, levels: &[f64], x: f64) -> Result<Vec<f64>> {
        for &u in levels {
            check_level(u)?;
        }
        let d = self.checked_design(x)?;
        let values = d.cdf_on_grid();
        levels.iter().map(|&u| d.quantile_with_grid(u, &values)).collect()
    }

    /// Scans `f̂(·|x)` between the estimated `γ` and `1 - γ` quantiles.
    pub fn monotonicity_check(&self, x: f64, gamma: f64) -> Result<MonotonicityReport> {
        if !(gamma > 0.0 && gamma < 0.5) {
            return Err(invalid("gamma", format!("must lie in (0, 0.5), got {gamma}")));
        }
        let degenerate = MonotonicityReport {
            x,
            min_density: f64::NAN,
            violation: true,
            degenerate: true,
            negative_stretch: None,
        };
        let d = self.design(x);
        if d.is_degenerate() {
            return Ok(degenerate);
        }
        let values = d.cdf_on_grid();
        let (lo, hi) = match (
            d.quantile_with_grid(gamma, &values),
            d.quantile_with_grid(1.0 - gamma, &values),
        ) {
            (Ok(lo), Ok(hi)) => (lo, hi),
            _ => return Ok(degenerate),
        };
        let mut points = vec![lo];
        points.extend(self.grid.iter().copied().filter(|&g| g > lo && g < hi));
        points.push(hi);

        let mut min_density = f64::INFINITY;
        let mut stretch: Option<(f64, f64)> = None;
        let mut closed = false;
        for &y in &points {
            let f = d.density(y);
            min_density = min_density.min(f);
            if f <= 0.0 && !closed {
                stretch = Some(match stretch {
                    None => (y, y),
                    Some((a, _)) => (a, y),
                });
            } else if stretch.is_some() {
                closed = true;
            }
        }
        Ok(MonotonicityReport {
            x,
            min_density,
            violation: min_density <= 0.0,
            degenerate: false,
            negative_stretch: stretch,
        })
    }
}

fn check_level(u: f64) -> Result<()> {
    if !(u > 0.0 && u < 1.0) {
        return Err(invalid("u", format!("quantile level must lie in (0, 1), got {u}")));
    }
    Ok(())
}

impl LocalDesign<'_> {
    pub fn x(&self) -> f64 {
        self.x
    }

    /// `[p_0, p_1, p_2]` at this `x`.
    pub fn moments(&self) -> [f64; 3] {
        self.p
    }

    pub fn determinant(&self) -> f64 {
        self.det
    }

    pub fn window_len(&self) -> usize {
        self.window.len()
    }

    // NaN determinants count as degenerate
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn is_degenerate(&self) -> bool {
        !(self.det > self.fit.det_floor)
    }

    /// Closed-form intercept; meaningful only when the design is not degenerate.
    pub fn cdf(&self, y: f64) -> f64 {
        let ys = &self.fit.sample.y[self.window.clone()];
        let mut q0 = 0.0;
        let mut q1 = 0.0;
        for ((&yi, &a), &b) in ys.iter().zip(&self.w0).zip(&self.w1) {
            let phi = self.fit.indicator.phi(y, yi);
            q0 += phi * a;
            q1 += phi * b;
        }
        (q0 * self.p[2] - q1 * self.p[1]) / self.det
    }

    pub fn density(&self, y: f64) -> f64 {
        let ys = &self.fit.sample.y[self.window.clone()];
        let mut q0 = 0.0;
        let mut q1 = 0.0;
        for ((&yi, &a), &b) in ys.iter().zip(&self.w0).zip(&self.w1) {
            let l = self.fit.indicator.phi_dy(y, yi);
            q0 += l * a;
            q1 += l * b;
        }
        (q0 * self.p[2] - q1 * self.p[1]) / self.det
    }

    fn cdf_on_grid(&self) -> Vec<f64> {
        self.fit.grid.iter().map(|&g| self.cdf(g)).collect()
    }

    fn quantile_with_grid(&self, u: f64, values: &[f64]) -> Result<f64> {
        let grid = &self.fit.grid;
        let j = values
            .iter()
            .position(|&v| v >= u)
            .ok_or(Error::NoCrossing { x: self.x, u })?;
        if j == 0 {
            return Ok(grid[0]);
        }
        let tol = BISECTION_TOL_RELATIVE * (grid[grid.len() - 1] - grid[0]);
        let (mut lo, mut hi) = (grid[j - 1], grid[j]);
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid) >= u {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }
}

/// Outcome of [`ConditionalCdfFit::monotonicity_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct MonotonicityReport {
    pub x: f64,
    /// Smallest estimated density on the scanned band (`NaN` when degenerate).
    pub min_density: f64,
    pub violation: bool,
    /// The local design or the band quantiles could not be computed.
    pub degenerate: bool,
    /// First run of scanned points with non-positive density.
    pub negative_stretch: Option<(f64, f64)>,
}

impl MonotonicityReport {
    pub const CSV_HEADER: &'static str = "x,min_density,violation_flag";

    pub fn csv_row(&self) -> String {
        format!("{:.16e},{:.16e},{}", self.x, self.min_density, u8::from(self.violation))
    }
}
