//! Trivariate Gaussian reference model on the copula scale.
//!
//! `(Y_1, Y_2, X)` are standard normals with correlations `ρ_12, ρ_1X, ρ_2X`,
//! mapped coordinate-wise through `Φ`. The conditional copula of `(Y_1, Y_2)`
//! given `X` is then the Gaussian copula with the partial correlation
//! `ρ_12|X` for every `x`, and every target quantity of the Monte Carlo
//! experiments has a closed form here.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::OnceLock;

use nalgebra::{Cholesky, Matrix3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::copula::{ConditionalMargin, TrivariateSample};
use crate::error::{invalid, Error, Result};
use crate::quadrature::GaussLegendre;

/// Standard normal distribution function.
#[inline]
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

#[inline]
pub fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Standard normal quantile: Wichura's AS 241 rational approximation
/// followed by one Newton step against [`std_normal_cdf`].
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid("p", format!("normal quantile needs p in (0, 1), got {p}")));
    }
    let z = as241(p);
    let dens = std_normal_pdf(z);
    if dens > 0.0 {
        let err = if p < 0.5 {
            std_normal_cdf(z) - p
        } else {
            // upper tail keeps precision for p close to 1
            (1.0 - p) - std_normal_cdf(-z)
        };
        return Ok(z - err / dens);
    }
    Ok(z)
}

#[allow(clippy::excessive_precision)]
fn as241(p: f64) -> f64 {
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let num = (((((((2.509_080_928_730_122_7e3 * r + 3.343_057_558_358_813e4) * r + 6.726_577_092_700_87e4)
            * r
            + 4.592_195_393_154_987e4)
            * r
            + 1.373_169_376_550_946e4)
            * r
            + 1.971_590_950_306_551_3e3)
            * r
            + 1.331_416_678_917_843_8e2)
            * r
            + 3.387_132_872_796_366_5)
            * q;
        let den = ((((((5.226_495_278_852_545e3 * r + 2.872_908_573_572_194_3e4) * r + 3.930_789_580_009_271e4) * r
            + 2.121_379_430_158_659_7e4)
            * r
            + 5.394_196_021_424_751e3)
            * r
            + 6.871_870_074_920_579e2)
            * r
            + 4.231_333_070_160_091e1)
            * r
            + 1.0;
        return num / den;
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let val = if r <= 5.0 {
        r -= 1.6;
        let num = ((((((7.745_450_142_783_414e-4 * r + 2.272_384_498_926_918_4e-2) * r + 2.417_807_251_774_506e-1)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_545)
            * r
            + 1.423_437_110_749_683_5;
        let den =
            ((((((1.050_750_071_644_416_9e-9 * r + 5.475_938_084_995_345e-4) * r + 1.519_866_656_361_645_7e-2) * r
                + 1.481_039_764_274_800_8e-1)
                * r
                + 6.897_673_349_851e-1)
                * r
                + 1.676_384_830_183_803_8)
                * r
                + 2.053_191_626_637_759)
                * r
                + 1.0;
        num / den
    } else {
        r -= 5.0;
        let num = ((((((2.010_334_399_292_288_1e-7 * r + 2.711_555_568_743_487_6e-5) * r
            + 1.242_660_947_388_078_4e-3)
            * r
            + 2.653_218_952_657_612_4e-2)
            * r
            + 2.965_605_718_285_048_7e-1)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103;
        let den = ((((((2.044_263_103_389_939_7e-15 * r + 1.421_511_758_316_445_9e-7) * r
            + 1.846_318_317_510_054_8e-5)
            * r
            + 7.868_691_311_456_133e-4)
            * r
            + 1.487_536_129_085_061_5e-2)
            * r
            + 1.369_298_809_227_358e-1)
            * r
            + 5.998_322_065_558_88e-1)
            * r
            + 1.0;
        num / den
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

fn gl20() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(20))
}

/// `P(Z_1 ≤ z1, Z_2 ≤ z2)` for standard normals with correlation `rho`.
///
/// Genz's refinement of the Drezner–Wesolowsky method: a single Gauss–Legendre
/// quadrature over the correlation (via `asin`) for `|ρ| < 0.925`, and an
/// asymptotic expansion plus quadrature of the remainder otherwise.
pub fn bivariate_normal_cdf(z1: f64, z2: f64, rho: f64) -> f64 {
    upper_orthant(-z1, -z2, rho)
}

/// `P(Z_1 > h, Z_2 > k)`.
fn upper_orthant(h: f64, k: f64, r: f64) -> f64 {
    if h == f64::INFINITY || k == f64::INFINITY {
        return 0.0;
    }
    if h == f64::NEG_INFINITY {
        return if k == f64::NEG_INFINITY {
            1.0
        } else {
            std_normal_cdf(-k)
        };
    }
    if k == f64::NEG_INFINITY {
        return std_normal_cdf(-h);
    }
    if r >= 1.0 {
        return std_normal_cdf(-h.max(k));
    }
    if r <= -1.0 {
        return (std_normal_cdf(-h) - std_normal_cdf(k)).max(0.0);
    }
    let gl = gl20();
    let mut hk = h * k;
    if r.abs() < 0.925 {
        let hs = 0.5 * (h * h + k * k);
        let asr = r.asin();
        let mut sum = 0.0;
        for (&t, &w) in gl.nodes.iter().zip(&gl.weights) {
            let sn = (asr * 0.5 * (t + 1.0)).sin();
            sum += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
        }
        return sum * asr / (4.0 * PI) + std_normal_cdf(-h) * std_normal_cdf(-k);
    }
    let mut kk = k;
    if r < 0.0 {
        kk = -kk;
        hk = -hk;
    }
    let mut bvn = 0.0;
    if r.abs() < 1.0 {
        let a_s = (1.0 - r) * (1.0 + r);
        let mut a = a_s.sqrt();
        let bs = (h - kk) * (h - kk);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 16.0;
        bvn = a
            * (-(bs / a_s + hk) / 2.0).exp()
            * (1.0 - c * (bs - a_s) * (1.0 - d * bs / 5.0) / 3.0 + c * d * a_s * a_s / 5.0);
        if hk > -160.0 {
            let b = bs.sqrt();
            bvn -= (-hk / 2.0).exp()
                * (2.0 * PI).sqrt()
                * std_normal_cdf(-b / a)
                * b
                * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
        }
        a /= 2.0;
        for (&t, &w) in gl.nodes.iter().zip(&gl.weights) {
            let xs = (a * (t + 1.0)).powi(2);
            let rs = (1.0 - xs).sqrt();
            bvn += a
                * w
                * ((-bs / (2.0 * xs) - hk / (1.0 + rs)).exp() / rs
                    - (-(bs / xs + hk) / 2.0).exp() * (1.0 + c * xs * (1.0 + d * xs)));
        }
        bvn = -bvn / (2.0 * PI);
    }
    if r > 0.0 {
        bvn + std_normal_cdf(-h.max(kk))
    } else {
        -bvn + (std_normal_cdf(-h) - std_normal_cdf(-kk)).max(0.0)
    }
}

fn check_rho(name: &'static str, rho: f64) -> Result<()> {
    if !(rho > -1.0 && rho < 1.0) {
        return Err(invalid(name, format!("correlation must lie in (-1, 1), got {rho}")));
    }
    Ok(())
}

fn check_open_unit(name: &'static str, v: f64) -> Result<()> {
    if !(v > 0.0 && v < 1.0) {
        return Err(invalid(name, format!("must lie in the open interval (0, 1), got {v}")));
    }
    Ok(())
}

/// Gaussian copula `C(u) = Φ₂(Φ⁻¹(u_1), Φ⁻¹(u_2); ρ)` on the open square.
pub fn gaussian_copula(u1: f64, u2: f64, rho: f64) -> Result<f64> {
    check_open_unit("u1", u1)?;
    check_open_unit("u2", u2)?;
    check_rho("rho", rho)?;
    Ok(bivariate_normal_cdf(
        std_normal_quantile(u1)?,
        std_normal_quantile(u2)?,
        rho,
    ))
}

/// Gaussian copula on the closed square, using `C(a, 1) = a`, `C(1, b) = b`
/// and `C(0, ·) = C(·, 0) = 0`.
pub fn gaussian_copula_closed(u1: f64, u2: f64, rho: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u1) || !(0.0..=1.0).contains(&u2) {
        return Err(invalid("u", format!("({u1}, {u2}) outside the unit square")));
    }
    if u1 == 0.0 || u2 == 0.0 {
        return Ok(0.0);
    }
    if u1 == 1.0 {
        return Ok(u2);
    }
    if u2 == 1.0 {
        return Ok(u1);
    }
    gaussian_copula(u1, u2, rho)
}

/// `∂C/∂u_j` of the Gaussian copula, `j ∈ {1, 2}`.
pub fn gaussian_copula_du(u1: f64, u2: f64, rho: f64, j: usize) -> Result<f64> {
    check_open_unit("u1", u1)?;
    check_open_unit("u2", u2)?;
    check_rho("rho", rho)?;
    let (a, b) = match j {
        1 => (u1, u2),
        2 => (u2, u1),
        _ => return Err(invalid("j", format!("coordinate must be 1 or 2, got {j}"))),
    };
    let za = std_normal_quantile(a)?;
    let zb = std_normal_quantile(b)?;
    Ok(std_normal_cdf((zb - rho * za) / (1.0 - rho * rho).sqrt()))
}

/// `F_j(v|x) = Φ((Φ⁻¹(v) - ρ Φ⁻¹(x)) / √(1 - ρ²))` for copula-scale data.
pub fn conditional_margin(v: f64, x: f64, rho: f64) -> Result<f64> {
    check_open_unit("v", v)?;
    check_open_unit("x", x)?;
    check_rho("rho", rho)?;
    let zv = std_normal_quantile(v)?;
    let zx = std_normal_quantile(x)?;
    Ok(std_normal_cdf((zv - rho * zx) / (1.0 - rho * rho).sqrt()))
}

/// Inverse of [`conditional_margin`] in `v`.
pub fn conditional_quantile(u: f64, x: f64, rho: f64) -> Result<f64> {
    check_open_unit("u", u)?;
    check_open_unit("x", x)?;
    check_rho("rho", rho)?;
    let z = rho * std_normal_quantile(x)? + (1.0 - rho * rho).sqrt() * std_normal_quantile(u)?;
    Ok(std_normal_cdf(z))
}

fn correlation_matrix(rho12: f64, rho1x: f64, rho2x: f64) -> Matrix3<f64> {
    Matrix3::new(1.0, rho12, rho1x, rho12, 1.0, rho2x, rho1x, rho2x, 1.0)
}

/// `(ρ_12 - ρ_1X ρ_2X) / √((1 - ρ_1X²)(1 - ρ_2X²))`.
pub fn partial_correlation(rho12: f64, rho1x: f64, rho2x: f64) -> Result<f64> {
    check_rho("rho12", rho12)?;
    check_rho("rho1x", rho1x)?;
    check_rho("rho2x", rho2x)?;
    if Cholesky::new(correlation_matrix(rho12, rho1x, rho2x)).is_none() {
        return Err(Error::NotPositiveDefinite);
    }
    let r = (rho12 - rho1x * rho2x) / ((1.0 - rho1x * rho1x) * (1.0 - rho2x * rho2x)).sqrt();
    if !(r > -1.0 && r < 1.0) {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(r)
}

/// Correlations of the trivariate Gaussian model.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianCopulaSpec {
    rho1x: f64,
    rho2x: f64,
    rho12: f64,
    rho12_given_x: f64,
    chol: Matrix3<f64>,
}

impl GaussianCopulaSpec {
    pub fn new(rho1x: f64, rho2x: f64, rho12: f64) -> Result<Self> {
        let rho12_given_x = partial_correlation(rho12, rho1x, rho2x)?;
        let chol = Cholesky::new(correlation_matrix(rho12, rho1x, rho2x))
            .ok_or(Error::NotPositiveDefinite)?
            .l();
        Ok(Self {
            rho1x,
            rho2x,
            rho12,
            rho12_given_x,
            chol,
        })
    }

    /// Correlations used in the reported experiments: `ρ_1X = 0.4`,
    /// `ρ_2X = -0.2`, `ρ_12 = 0.3689989` (so that `ρ_12|X = 0.5`).
    pub fn reference() -> Self {
        Self::new(0.4, -0.2, 0.3689989).expect("reference correlations are positive definite")
    }

    pub fn rho1x(&self) -> f64 {
        self.rho1x
    }

    pub fn rho2x(&self) -> f64 {
        self.rho2x
    }

    pub fn rho12(&self) -> f64 {
        self.rho12
    }

    pub fn rho12_given_x(&self) -> f64 {
        self.rho12_given_x
    }

    pub fn margin(&self, j: usize) -> GaussianMargin {
        GaussianMargin {
            rho: if j == 1 { self.rho1x } else { self.rho2x },
        }
    }

    /// Copula value `C(u)` of the conditional copula.
    pub fn copula(&self, u1: f64, u2: f64) -> Result<f64> {
        gaussian_copula(u1, u2, self.rho12_given_x)
    }

    /// `n` draws `(X_i, Y_1i, Y_2i)` on the copula scale, deterministic in
    /// `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> TrivariateSample {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut x = Vec::with_capacity(n);
        let mut y1 = Vec::with_capacity(n);
        let mut y2 = Vec::with_capacity(n);
        for _ in 0..n {
            let e = Vector3::new(
                StandardNormal.sample(&mut rng),
                StandardNormal.sample(&mut rng),
                StandardNormal.sample(&mut rng),
            );
            let z: Vector3<f64> = self.chol * e;
            y1.push(std_normal_cdf(z[0]));
            y2.push(std_normal_cdf(z[1]));
            x.push(std_normal_cdf(z[2]));
        }
        TrivariateSample { x, y1, y2 }
    }
}

/// Closed-form conditional margin `F_j(·|·)` of the reference model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianMargin {
    pub rho: f64,
}

impl GaussianMargin {
    pub fn quantile(&self, u: f64, x: f64) -> Result<f64> {
        conditional_quantile(u, x, self.rho)
    }
}

impl ConditionalMargin for GaussianMargin {
    fn cdf(&self, y: f64, x: f64) -> Result<f64> {
        conditional_margin(y, x, self.rho)
    }
}

/// `cov(𝔹(u), 𝔹(v)) = C(u ∧ v) - C(u) C(v)` of the C-Brownian bridge.
pub fn bridge_cov(u: (f64, f64), v: (f64, f64), rho: f64) -> Result<f64> {
    for w in [u.0, u.1, v.0, v.1] {
        if !(w > 0.0 && w <= 1.0) {
            return Err(invalid(
                "u",
                format!("bridge covariance needs points in (0, 1]², got {w}"),
            ));
        }
    }
    let meet = gaussian_copula_closed(u.0.min(v.0), u.1.min(v.1), rho)?;
    Ok(meet - gaussian_copula_closed(u.0, u.1, rho)? * gaussian_copula_closed(v.0, v.1, rho)?)
}

/// Gaussian limit of `√n (Ĉ_n(u) - C(u))` at a fixed point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimitLaw {
    pub rho: f64,
    pub u: (f64, f64),
    pub copula: f64,
    pub dc1: f64,
    pub dc2: f64,
    pub variance: f64,
}

impl LimitLaw {
    /// Variance of `𝔹(u) - Ċ_1(u) 𝔹(u_1, 1) - Ċ_2(u) 𝔹(1, u_2)`.
    pub fn new(u: (f64, f64), rho: f64) -> Result<Self> {
        let copula = gaussian_copula(u.0, u.1, rho)?;
        let dc1 = gaussian_copula_du(u.0, u.1, rho, 1)?;
        let dc2 = gaussian_copula_du(u.0, u.1, rho, 2)?;
        let points = [u, (u.0, 1.0), (1.0, u.1)];
        let coef = [1.0, -dc1, -dc2];
        let mut variance = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                variance += coef[i] * coef[j] * bridge_cov(points[i], points[j], rho)?;
            }
        }
        if variance < -1e-12 {
            return Err(Error::NegativeVariance(variance));
        }
        Ok(Self {
            rho,
            u,
            copula,
            dc1,
            dc2,
            variance: variance.max(0.0),
        })
    }

    pub fn sigma(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Limit standard deviation `σ(u)`.
pub fn limit_sigma(u1: f64, u2: f64, rho: f64) -> Result<f64> {
    Ok(LimitLaw::new((u1, u2), rho)?.sigma())
}
