mod common;

use condcop::copula::{margin_evaluations, TrivariateSample};
use condcop::gauss::{
    bivariate_normal_cdf, conditional_margin, conditional_quantile, gaussian_copula, gaussian_copula_closed,
    gaussian_copula_du, limit_sigma, partial_correlation, std_normal_quantile, GaussianCopulaSpec,
};
use condcop::quadrature::GaussLegendre;
use condcop::stats;
use rand::Rng;

fn oracle_pairs(spec: &GaussianCopulaSpec, sample: &TrivariateSample) -> Vec<(f64, f64)> {
    margin_evaluations(sample, &spec.margin(1), &spec.margin(2))
        .into_iter()
        .map(|r| r.unwrap())
        .collect()
}

#[test]
fn copula_matches_two_dimensional_quadrature() {
    let rho: f64 = 0.5;
    let z1 = std_normal_quantile(0.5).unwrap();
    let z2 = std_normal_quantile(0.7).unwrap();
    let s = (1.0 - rho * rho).sqrt();
    let density = |a: f64, b: f64| {
        (-(a * a - 2.0 * rho * a * b + b * b) / (2.0 * s * s)).exp() / (2.0 * std::f64::consts::PI * s)
    };
    let gl = GaussLegendre::new(20);
    let value = gl.integrate_composite(-12.0, z1, 40, |a| {
        gl.integrate_composite(-12.0, z2, 40, |b| density(a, b))
    });
    let c = gaussian_copula(0.5, 0.7, rho).unwrap();
    assert!((c - value).abs() < 1e-10, "{c} vs {value}");
}

#[test]
fn bivariate_normal_matches_plackett_integral() {
    let mut rng = common::rng(7);
    for _ in 0..200 {
        let z1 = rng.random_range(-4.0..4.0);
        let z2 = rng.random_range(-4.0..4.0);
        let rho = rng.random_range(-0.95..0.95);
        let got = bivariate_normal_cdf(z1, z2, rho);
        let want = common::bvn_plackett(z1, z2, rho);
        assert!((got - want).abs() < 1e-12, "({z1}, {z2}, {rho}): {got} vs {want}");
    }
}

#[test]
fn taylor_remainder_is_quadratic() {
    let rho = 0.5;
    let u = (0.5, 0.7);
    let grad = (
        gaussian_copula_du(u.0, u.1, rho, 1).unwrap(),
        gaussian_copula_du(u.0, u.1, rho, 2).unwrap(),
    );
    let dir = (0.6, -0.8);
    let remainder = |t: f64| {
        gaussian_copula(u.0 + t * dir.0, u.1 + t * dir.1, rho).unwrap()
            - gaussian_copula(u.0, u.1, rho).unwrap()
            - t * (grad.0 * dir.0 + grad.1 * dir.1)
    };
    for t in [0.04, 0.02, 0.01] {
        let ratio = remainder(t) / remainder(t / 2.0);
        assert!((3.5..=4.5).contains(&ratio), "t = {t}: ratio {ratio}");
    }
}

#[test]
fn gaussian_copula_axioms() {
    let grid: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    for rho in [-0.8, -0.3, 0.0, 0.5, 0.9] {
        for &a in &grid {
            assert!((gaussian_copula_closed(a, 1.0, rho).unwrap() - a).abs() < 1e-14);
            assert!((gaussian_copula_closed(1.0, a, rho).unwrap() - a).abs() < 1e-14);
            assert_eq!(gaussian_copula_closed(a, 0.0, rho).unwrap(), 0.0);
            assert_eq!(gaussian_copula_closed(0.0, a, rho).unwrap(), 0.0);
            for &b in &grid {
                let c = gaussian_copula_closed(a, b, rho).unwrap();
                assert!(c >= (a + b - 1.0).max(0.0) - 1e-14 && c <= a.min(b) + 1e-14);
            }
        }
        for w in grid.windows(2) {
            for v in grid.windows(2) {
                let vol = gaussian_copula_closed(w[1], v[1], rho).unwrap()
                    - gaussian_copula_closed(w[0], v[1], rho).unwrap()
                    - gaussian_copula_closed(w[1], v[0], rho).unwrap()
                    + gaussian_copula_closed(w[0], v[0], rho).unwrap();
                assert!(vol >= -1e-14, "rho {rho}: volume {vol}");
            }
        }
    }
}

#[test]
fn partial_correlation_matches_precision_matrix() {
    let mut rng = common::rng(11);
    let mut checked = 0;
    while checked < 100 {
        let r12: f64 = rng.random_range(-0.9..0.9);
        let r1x: f64 = rng.random_range(-0.9..0.9);
        let r2x: f64 = rng.random_range(-0.9..0.9);
        let det = 1.0 + 2.0 * r12 * r1x * r2x - r12 * r12 - r1x * r1x - r2x * r2x;
        if det <= 1e-6 {
            continue;
        }
        // cofactors of the correlation matrix ordered (Y1, Y2, X)
        let p11 = 1.0 - r2x * r2x;
        let p22 = 1.0 - r1x * r1x;
        let p12 = -(r12 - r1x * r2x);
        let want = -p12 / (p11 * p22).sqrt();
        let got = partial_correlation(r12, r1x, r2x).unwrap();
        assert!((got - want).abs() < 1e-13);
        checked += 1;
    }
}

#[test]
fn sampler_reproduces_latent_correlations() {
    let spec = GaussianCopulaSpec::reference();
    let s = spec.sample(100_000, 3);
    let latent = |v: &[f64]| v.iter().map(|&p| std_normal_quantile(p).unwrap()).collect::<Vec<_>>();
    let (x, y1, y2) = (latent(&s.x), latent(&s.y1), latent(&s.y2));
    assert!((stats::pearson(&y1, &x) - 0.4).abs() < 0.01);
    assert!((stats::pearson(&y2, &x) + 0.2).abs() < 0.01);
    assert!((stats::pearson(&y1, &y2) - 0.3689989).abs() < 0.01);
    for v in [&s.x, &s.y1, &s.y2] {
        assert!(v.iter().all(|&p| p > 0.0 && p < 1.0));
    }
}

#[test]
fn oracle_pseudo_observations_are_uniform() {
    let spec = GaussianCopulaSpec::reference();
    let s = spec.sample(2000, 5);
    let pairs = oracle_pairs(&spec, &s);
    for coord in [0, 1] {
        let v: Vec<f64> = pairs.iter().map(|p| if coord == 0 { p.0 } else { p.1 }).collect();
        let d = stats::ks_statistic(&v, |t| t.clamp(0.0, 1.0));
        assert!(stats::ks_pvalue(d, v.len()) > 0.01, "coordinate {coord}: D = {d}");
    }
}

#[test]
fn conditional_margin_matches_monte_carlo() {
    let spec = GaussianCopulaSpec::reference();
    let s = spec.sample(200_000, 9);
    let x0 = 0.3;
    let band: Vec<usize> = (0..s.len()).filter(|&i| (s.x[i] - x0).abs() < 0.01).collect();
    assert!(band.len() > 2000);
    for y in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let freq = band.iter().filter(|&&i| s.y1[i] <= y).count() as f64 / band.len() as f64;
        let exact = conditional_margin(y, x0, 0.4).unwrap();
        assert!((freq - exact).abs() < 0.03, "y = {y}: {freq} vs {exact}");
    }
}

#[test]
fn conditional_quantile_inverts_margin() {
    for x in [0.05, 0.3, 0.5, 0.9] {
        for rho in [-0.6, 0.4] {
            for u in [0.01, 0.2, 0.5, 0.8, 0.99] {
                let q = conditional_quantile(u, x, rho).unwrap();
                assert!((conditional_margin(q, x, rho).unwrap() - u).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn copula_derivative_matches_closed_form() {
    let rho: f64 = 0.5;
    for (u1, u2) in [(0.5, 0.7), (0.2, 0.3), (0.9, 0.4)] {
        let z1 = std_normal_quantile(u1).unwrap();
        let z2 = std_normal_quantile(u2).unwrap();
        let want = condcop::std_normal_cdf((z2 - rho * z1) / (1.0 - rho * rho).sqrt());
        assert!((gaussian_copula_du(u1, u2, rho, 1).unwrap() - want).abs() < 1e-12);
    }
}

#[test]
fn sigma_is_lipschitz_near_reference_point() {
    let base = limit_sigma(0.5, 0.7, 0.5).unwrap();
    let mut rng = common::rng(13);
    for _ in 0..200 {
        let d1: f64 = rng.random_range(-1e-3..1e-3);
        let d2: f64 = rng.random_range(-1e-3..1e-3);
        let s = limit_sigma(0.5 + d1, 0.7 + d2, 0.5).unwrap();
        assert!((s - base).abs() <= 5.0 * d1.hypot(d2));
    }
}

#[test]
fn sigma_matches_monte_carlo_of_oracle() {
    // sd of √n(Ĉ_or - C) over 400 replications at n = 1000
    let spec = GaussianCopulaSpec::reference();
    let c = spec.copula(0.5, 0.7).unwrap();
    let n = 1000;
    let draws: Vec<f64> = (0..400)
        .map(|r| {
            let s = spec.sample(n, 1000 + r);
            let pairs = oracle_pairs(&spec, &s);
            (n as f64).sqrt() * (common::brute_force_copula(&pairs, 0.5, 0.7) - c)
        })
        .collect();
    let sd = stats::std_dev(&draws);
    assert!((sd - limit_sigma(0.5, 0.7, 0.5).unwrap()).abs() < 0.025, "sd {sd}");
}

#[test]
fn simplifying_assumption_holds_in_sample() {
    let spec = GaussianCopulaSpec::reference();
    let s = spec.sample(20_000, 17);
    let pairs = oracle_pairs(&spec, &s);
    let spearman = |idx: &[usize]| {
        let rank = |vals: Vec<f64>| {
            let mut order: Vec<usize> = (0..vals.len()).collect();
            order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
            let mut r = vec![0.0; vals.len()];
            for (k, &i) in order.iter().enumerate() {
                r[i] = k as f64;
            }
            r
        };
        let a = rank(idx.iter().map(|&i| pairs[i].0).collect());
        let b = rank(idx.iter().map(|&i| pairs[i].1).collect());
        stats::pearson(&a, &b)
    };
    let low: Vec<usize> = (0..s.len()).filter(|&i| s.x[i] < 0.5).collect();
    let high: Vec<usize> = (0..s.len()).filter(|&i| s.x[i] >= 0.5).collect();
    let theory = 6.0 / std::f64::consts::PI * (0.25f64).asin();
    for half in [&low, &high] {
        assert!((spearman(half) - theory).abs() < 0.03);
    }
    let v1: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    assert!(stats::pearson(&v1, &s.x).abs() < 0.03);
}
