//! Empirical distribution functions, pseudo-observations and the empirical
//! (conditional) copula.
//!
//! All indicators use `≤`; ties are counted, never split.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::loclin::ConditionalCdfFit;

/// A conditional distribution function `F(y|x)`.
pub trait ConditionalMargin: Sync {
    fn cdf(&self, y: f64, x: f64) -> Result<f64>;
}

impl ConditionalMargin for ConditionalCdfFit {
    fn cdf(&self, y: f64, x: f64) -> Result<f64> {
        ConditionalCdfFit::cdf(self, y, x)
    }
}

/// Right-continuous step function `G(v) = #{values ≤ v} / n`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepEcdf {
    sorted: Vec<f64>,
}

impl StepEcdf {
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("values", "empirical distribution of an empty set"));
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(invalid("values", "NaN value"));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted_values(&self) -> &[f64] {
        &self.sorted
    }

    pub fn eval(&self, v: f64) -> f64 {
        self.sorted.partition_point(|&s| s <= v) as f64 / self.len() as f64
    }

    /// Generalised inverse `inf{v : G(v) ≥ u}` for `u ∈ (0, 1]`: the
    /// `⌈n u⌉`-th order statistic.
    pub fn inverse(&self, u: f64) -> Result<f64> {
        Ok(self.sorted[self.order_index(u)? - 1])
    }

    /// Smallest `k` with `k/n ≥ u`, evaluated with the same floating-point
    /// comparison that defines the step function.
    fn order_index(&self, u: f64) -> Result<usize> {
        if !(u > 0.0 && u <= 1.0) {
            return Err(invalid("u", format!("generalised inverse needs u in (0, 1], got {u}")));
        }
        let n = self.len();
        let nf = n as f64;
        let mut k = ((nf * u).ceil() as usize).clamp(1, n);
        while k > 1 && (k - 1) as f64 / nf >= u {
            k -= 1;
        }
        while k < n && (k as f64) / nf < u {
            k += 1;
        }
        Ok(k)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Provenance {
    Estimated,
    Oracle,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Estimated => "estimated",
            Provenance::Oracle => "oracle",
        }
    }
}

impl std::str::FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "estimated" => Ok(Provenance::Estimated),
            "oracle" => Ok(Provenance::Oracle),
            other => Err(Error::Parse(format!("unknown provenance `{other}`"))),
        }
    }
}

/// The pairs `(F_1(Y_1i | X_i), F_2(Y_2i | X_i))`, in input order.
#[derive(Clone, Debug, PartialEq)]
pub struct PseudoObservations {
    pairs: Vec<(f64, f64)>,
    provenance: Provenance,
}

impl PseudoObservations {
    pub fn new(pairs: Vec<(f64, f64)>, provenance: Provenance) -> Result<Self> {
        if pairs.is_empty() {
            return Err(invalid("pairs", "at least one pseudo-observation is required"));
        }
        if pairs.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
            return Err(invalid("pairs", "pseudo-observations must be finite"));
        }
        Ok(Self { pairs, provenance })
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Keeps only the pairs whose index satisfies `keep`.
    pub fn retain_indices(&self, keep: &[bool]) -> Result<Self> {
        let pairs = self
            .pairs
            .iter()
            .zip(keep)
            .filter(|(_, &k)| k)
            .map(|(&p, _)| p)
            .collect();
        Self::new(pairs, self.provenance)
    }

    /// Builds an evaluator that can be queried at many `u`.
    pub fn copula(&self) -> EmpiricalCopula<'_> {
        let first: Vec<f64> = self.pairs.iter().map(|p| p.0).collect();
        let second: Vec<f64> = self.pairs.iter().map(|p| p.1).collect();
        EmpiricalCopula {
            obs: self,
            margins: [
                StepEcdf::new(&first).expect("validated non-empty"),
                StepEcdf::new(&second).expect("validated non-empty"),
            ],
        }
    }

    pub fn csv_rows(&self) -> impl Iterator<Item = String> + '_ {
        self.pairs
            .iter()
            .map(move |(a, b)| format!("{a:.16e},{b:.16e},{}", self.provenance.as_str()))
    }

    pub const CSV_HEADER: &'static str = "v1,v2,provenance";
}

/// Empirical copula of a fixed set of pseudo-observations.
#[derive(Clone, Debug)]
pub struct EmpiricalCopula<'a> {
    obs: &'a PseudoObservations,
    margins: [StepEcdf; 2],
}

impl EmpiricalCopula<'_> {
    pub fn eval(&self, u1: f64, u2: f64) -> Result<f64> {
        let t1 = self.margins[0].inverse(u1)?;
        let t2 = self.margins[1].inverse(u2)?;
        let hits = self.obs.pairs.iter().filter(|(a, b)| *a <= t1 && *b <= t2).count();
        Ok(hits as f64 / self.obs.len() as f64)
    }
}

/// `Ĉ(u) = n⁻¹ Σ 1{V_1i ≤ Ĝ_1⁻(u_1)} 1{V_2i ≤ Ĝ_2⁻(u_2)}`.
pub fn empirical_copula(obs: &PseudoObservations, u1: f64, u2: f64) -> Result<f64> {
    obs.copula().eval(u1, u2)
}

/// `Ĉ(u_1, 1)`; equals `⌈n u_1⌉ / n` when the first coordinate has no ties.
pub fn copula_margin_identity(obs: &PseudoObservations, u1: f64) -> Result<f64> {
    empirical_copula(obs, u1, 1.0)
}

/// Trivariate observations `(X_i, Y_1i, Y_2i)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrivariateSample {
    pub x: Vec<f64>,
    pub y1: Vec<f64>,
    pub y2: Vec<f64>,
}

impl TrivariateSample {
    pub fn new(x: Vec<f64>, y1: Vec<f64>, y2: Vec<f64>) -> Result<Self> {
        if x.len() != y1.len() || x.len() != y2.len() {
            return Err(invalid("sample", "columns have different lengths"));
        }
        if x.is_empty() {
            return Err(invalid("sample", "empty sample"));
        }
        if x.iter().chain(&y1).chain(&y2).any(|v| !v.is_finite()) {
            return Err(invalid("sample", "all values must be finite"));
        }
        Ok(Self { x, y1, y2 })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Per-observation margin evaluations; entries are `Err` where a margin
/// could not be evaluated.
pub fn margin_evaluations<M1, M2>(sample: &TrivariateSample, m1: &M1, m2: &M2) -> Vec<Result<(f64, f64)>>
where
    M1: ConditionalMargin + ?Sized,
    M2: ConditionalMargin + ?Sized,
{
    (0..sample.len())
        .into_par_iter()
        .map(|i| {
            let x = sample.x[i];
            Ok((m1.cdf(sample.y1[i], x)?, m2.cdf(sample.y2[i], x)?))
        })
        .collect()
}

/// Pseudo-observations from two conditional margins. The first failing
/// observation aborts with its index.
pub fn pseudo_observations<M1, M2>(
    sample: &TrivariateSample,
    m1: &M1,
    m2: &M2,
    provenance: Provenance,
) -> Result<PseudoObservations>
where
    M1: ConditionalMargin + ?Sized,
    M2: ConditionalMargin + ?Sized,
{
    let pairs = margin_evaluations(sample, m1, m2)
        .into_iter()
        .enumerate()
        .map(|(index, r)| {
            r.map_err(|e| Error::DegenerateObservation {
                index,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    PseudoObservations::new(pairs, provenance)
}
