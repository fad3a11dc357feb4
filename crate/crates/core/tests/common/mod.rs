//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn triweight(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        35.0 / 32.0 * (1.0 - u * u).powi(3)
    }
}

pub fn biweight(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        15.0 / 16.0 * (1.0 - u * u).powi(2)
    }
}

/// `∫_{-∞}^t` of the biweight kernel, expanded by hand.
pub fn biweight_cdf(t: f64) -> f64 {
    if t <= -1.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        0.5 + 15.0 / 16.0 * (t - 2.0 * t.powi(3) / 3.0 + t.powi(5) / 5.0)
    }
}

/// Intercept of the weighted least-squares fit of `a + b (x_i - x0)` to the
/// smoothed indicators, solved by SVD of the square-root-weighted design.
/// `None` when fewer than two points carry positive weight.
pub fn wls_intercept(xs: &[f64], ys: &[f64], x0: f64, y: f64, h1: f64, h2: f64) -> Option<f64> {
    let rows: Vec<(f64, f64, f64)> = xs
        .iter()
        .zip(ys)
        .map(|(&xi, &yi)| {
            let w = triweight((xi - x0) / h1).sqrt();
            (w, w * (xi - x0), w * biweight_cdf((y - yi) / h2))
        })
        .filter(|r| r.0 > 0.0)
        .collect();
    if rows.len() < 2 {
        return None;
    }
    let a = DMatrix::from_fn(rows.len(), 2, |i, j| if j == 0 { rows[i].0 } else { rows[i].1 });
    let b = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.2));
    let sol = a.svd(true, true).solve(&b, 1e-14).ok()?;
    Some(sol[0])
}

/// `#{v ≤ t} / n` by direct counting.
pub fn step_cdf(values: &[f64], t: f64) -> f64 {
    values.iter().filter(|&&v| v <= t).count() as f64 / values.len() as f64
}

/// `inf{t : step_cdf(t) ≥ u}` by scanning every candidate jump point.
pub fn step_inverse(values: &[f64], u: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .iter()
        .copied()
        .find(|&t| step_cdf(values, t) >= u)
        .expect("u must lie in (0, 1]")
}

/// Empirical copula by explicit enumeration of ranks.
pub fn brute_force_copula(pairs: &[(f64, f64)], u1: f64, u2: f64) -> f64 {
    let n = pairs.len();
    let rank = |i: usize, coord: fn(&(f64, f64)) -> f64| {
        let v = coord(&pairs[i]);
        pairs.iter().filter(|p| coord(p) <= v).count()
    };
    let need = |u: f64| {
        // smallest k with k/n ≥ u
        (1..=n).find(|&k| k as f64 / n as f64 >= u).unwrap()
    };
    let (k1, k2) = (need(u1), need(u2));
    let hits = (0..n)
        .filter(|&i| rank(i, |p| p.0) <= k1 && rank(i, |p| p.1) <= k2)
        .count();
    hits as f64 / n as f64
}

/// `Φ(z1) Φ(z2) + ∫_0^ρ φ_2(z1, z2; r) dr` by composite Simpson.
pub fn bvn_plackett(z1: f64, z2: f64, rho: f64) -> f64 {
    let phi2 = |r: f64| {
        let s = 1.0 - r * r;
        (-(z1 * z1 - 2.0 * r * z1 * z2 + z2 * z2) / (2.0 * s)).exp() / (2.0 * std::f64::consts::PI * s.sqrt())
    };
    let m = 4000;
    let h = rho / m as f64;
    let mut sum = phi2(0.0) + phi2(rho);
    for i in 1..m {
        sum += if i % 2 == 1 { 4.0 } else { 2.0 } * phi2(i as f64 * h);
    }
    condcop::std_normal_cdf(z1) * condcop::std_normal_cdf(z2) + sum * h / 3.0
}

pub fn random_sample(rng: &mut ChaCha20Rng, n: usize) -> (Vec<f64>, Vec<f64>) {
    let x = (0..n).map(|_| rng.random::<f64>()).collect();
    let y = (0..n).map(|_| rng.random::<f64>()).collect();
    (x, y)
}
