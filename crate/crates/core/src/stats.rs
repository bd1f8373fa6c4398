//! Empirical distributions of `ω` and their comparison with the closed-form
//! laws.

use crate::analytics::densities::{DensityModel, Domain};
use crate::error::{Error, Result};
use crate::model::{Matrix9, ProjectionBundle};
use crate::rng::{normal_vector, SimRng};

pub use crate::trimer::extract_omega;

pub const DEFAULT_BINS: usize = 60;

/// Fixed-width histogram over a domain; out-of-range samples are rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    lo: f64,
    hi: f64,
    counts: Vec<u64>,
}

impl Histogram {
    pub fn new(domain: Domain, bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::InvalidArgument("need at least one bin".into()));
        }
        Ok(Self {
            lo: domain.lo,
            hi: domain.hi,
            counts: vec![0; bins],
        })
    }

    pub fn add(&mut self, x: f64) -> Result<()> {
        if !(self.lo <= x && x <= self.hi) {
            return Err(Error::InvalidArgument(format!(
                "sample {x} outside [{}, {}]",
                self.lo, self.hi
            )));
        }
        let bins = self.counts.len();
        let k = (((x - self.lo) / (self.hi - self.lo)) * bins as f64) as usize;
        self.counts[k.min(bins - 1)] += 1;
        Ok(())
    }

    pub fn extend(&mut self, xs: &[f64]) -> Result<()> {
        xs.iter().try_for_each(|&x| self.add(x))
    }

    /// Adds the counts of a histogram with identical binning.
    pub fn merge(&mut self, other: &Histogram) -> Result<()> {
        if self.lo != other.lo || self.hi != other.hi || self.counts.len() != other.counts.len() {
            return Err(Error::InvalidArgument("histogram binning differs".into()));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        Ok(())
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.counts.len() as f64
    }

    pub fn edges(&self) -> Vec<f64> {
        let n = self.counts.len();
        (0..=n)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / n as f64)
            .collect()
    }

    pub fn centers(&self) -> Vec<f64> {
        let w = self.bin_width();
        (0..self.counts.len())
            .map(|i| self.lo + w * (i as f64 + 0.5))
            .collect()
    }

    /// Counts divided by `n · width`, so the area is one.
    pub fn density(&self) -> Vec<f64> {
        let norm = self.total() as f64 * self.bin_width();
        self.counts
            .iter()
            .map(|&c| if norm > 0.0 { c as f64 / norm } else { 0.0 })
            .collect()
    }
}

/// Binned empirical density of `ω` set against a reference law.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramReport {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub n_samples: u64,
    pub ks_statistic: f64,
    pub reference: String,
    /// `(threshold, empirical P(ω > threshold), model P(ω > threshold))`.
    pub tail_estimates: Vec<(f64, f64, f64)>,
    pub model_density: Vec<f64>,
}

impl HistogramReport {
    pub fn build(
        samples: &[f64],
        model: &DensityModel,
        bins: usize,
        thresholds: &[f64],
    ) -> Result<Self> {
        let mut hist = Histogram::new(model.domain, bins)?;
        hist.extend(samples)?;
        let ks_statistic = ks_distance(samples, model)?;
        let n = samples.len() as f64;
        let tail_estimates = thresholds
            .iter()
            .map(|&t| {
                let emp = samples.iter().filter(|&&x| x > t).count() as f64 / n;
                model.tail(t).map(|m| (t, emp, m))
            })
            .collect::<Result<Vec<_>>>()?;
        let model_density = hist.centers().iter().map(|&c| model.pdf(c)).collect();
        Ok(Self {
            bin_edges: hist.edges(),
            counts: hist.counts().to_vec(),
            n_samples: hist.total(),
            ks_statistic,
            reference: model.id(),
            tail_estimates,
            model_density,
        })
    }

    pub fn centers(&self) -> Vec<f64> {
        self.bin_edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn empirical_density(&self) -> Vec<f64> {
        self.bin_edges
            .windows(2)
            .zip(&self.counts)
            .map(|(w, &c)| c as f64 / (self.n_samples as f64 * (w[1] - w[0])))
            .collect()
    }
}

fn sorted_copy(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no samples".into()));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::InvalidArgument("samples contain NaN".into()));
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(s)
}

/// Sup-distance between the empirical CDF of `samples` and the model CDF.
pub fn ks_distance(samples: &[f64], model: &DensityModel) -> Result<f64> {
    let sorted = sorted_copy(samples)?;
    let (lo, hi) = (model.domain.lo, model.domain.hi);
    if sorted[0] < lo || sorted[sorted.len() - 1] > hi {
        return Err(Error::InvalidArgument(format!(
            "samples leave the model domain [{lo}, {hi}]"
        )));
    }
    let cdf = model.cdf_sorted(&sorted)?;
    let n = sorted.len() as f64;
    Ok(cdf
        .iter()
        .enumerate()
        .map(|(i, &f)| (f - i as f64 / n).max((i + 1) as f64 / n - f))
        .fold(0.0, f64::max))
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    let a = sorted_copy(a)?;
    let b = sorted_copy(b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Kolmogorov survival function `Q(λ) = 2 Σ (−1)^(k−1) exp(−2k²λ²)`.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = f64::from(k);
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Asymptotic p-value of a two-sample statistic `d` with sizes `n`, `m`.
pub fn ks_two_sample_pvalue(d: f64, n: usize, m: usize) -> f64 {
    let ne = (n * m) as f64 / (n + m) as f64;
    let s = ne.sqrt();
    kolmogorov_survival((s + 0.12 + 0.11 / s) * d)
}

/// Rejection threshold of the two-sample test at the 1% level.
pub fn ks_critical_1pct(n: usize, m: usize) -> f64 {
    1.628 * ((n + m) as f64 / (n * m) as f64).sqrt()
}

/// Sample covariance of `P ξ / √β` for `n` standard normal vectors `ξ`;
/// converges to `β⁻¹ P`.
pub fn velocity_covariance_oracle(
    bundle: &ProjectionBundle,
    beta: f64,
    n: usize,
    rng: &mut SimRng,
) -> Result<Matrix9> {
    if n < 10_000 {
        return Err(Error::Precondition(format!("need n >= 10000 draws, got {n}")));
    }
    if !(beta > 0.0) {
        return Err(Error::InvalidArgument("beta must be positive".into()));
    }
    let scale = beta.sqrt().recip();
    let p = bundle.p();
    let mut sum = crate::model::Vector9::zeros();
    let mut outer = Matrix9::zeros();
    for _ in 0..n {
        let v = p * normal_vector(rng) * scale;
        sum += v;
        outer.ger(1.0, &v, &v, 1.0);
    }
    let nf = n as f64;
    let mean = sum / nf;
    Ok((outer - mean * mean.transpose() * nf) / (nf - 1.0))
}

/// Lag-one autocorrelation of a series.
pub fn lag1_autocorrelation(xs: &[f64]) -> f64 {
    if xs.len() < 3 {
        return f64::NAN;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    let cov: f64 = xs.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum();
    if var == 0.0 {
        return f64::NAN;
    }
    cov / var
}
