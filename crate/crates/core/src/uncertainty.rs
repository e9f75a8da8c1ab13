//! Second-order Monte Carlo over deaths, per-patient costs and the
//! mortality-to-incidence ratio.
//!
//! Each iteration draws one factor per parameter and applies it to every
//! cell, so all cost cells move together. Iteration `i` draws from its own
//! ChaCha stream `(seed, i)` and results are reduced in iteration order, which
//! makes the summary independent of the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::burden::{evaluate, metric_names, metric_values, prepare, Perturbation, PreparedModel};
use crate::bundle::ScenarioBundle;
use crate::error::{ModelError, ModelResult};

/// Ratio between a 95% half-width and the standard deviation of a normal.
pub const Z_95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UncertaintySpec {
    /// Standard deviation of the deaths factor (mean 1).
    pub deaths_sd: f64,
    /// Standard deviation of the cost factor (mean 1).
    pub cost_sd: f64,
    pub mi_mean: f64,
    pub mi_sd: f64,
}

impl UncertaintySpec {
    /// Ranges from the manifest read as 95% intervals; m:i centred on
    /// deaths / incidence so the central draw reproduces the deterministic run.
    pub fn from_bundle(bundle: &ScenarioBundle) -> Self {
        let r = &bundle.manifest.uncertainty;
        UncertaintySpec {
            deaths_sd: r.deaths_halfwidth / Z_95,
            cost_sd: r.cost_halfwidth / Z_95,
            mi_mean: bundle.epi.deaths / bundle.epi.incidence,
            mi_sd: r.mi_ratio_halfwidth / Z_95,
        }
    }

    pub fn zero_variance(self) -> Self {
        UncertaintySpec {
            deaths_sd: 0.0,
            cost_sd: 0.0,
            mi_sd: 0.0,
            ..self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Factors {
    pub deaths: f64,
    pub cost: f64,
    pub mi_ratio: f64,
}

impl Factors {
    /// Deaths scale by the deaths factor; incidence is deaths / m:i, so cases
    /// scale by the deaths factor times the ratio of central to drawn m:i.
    pub fn perturbation(&self, mi_mean: f64) -> Perturbation {
        Perturbation {
            case_scale: self.deaths * (mi_mean / self.mi_ratio),
            death_scale: self.deaths,
            cost_scale: self.cost,
        }
    }
}

fn positive_normal<R: Rng + ?Sized>(mean: f64, sd: f64, rng: &mut R) -> f64 {
    if sd == 0.0 {
        return mean;
    }
    loop {
        let z: f64 = rng.sample(StandardNormal);
        let x = mean + sd * z;
        if x > 0.0 {
            return x;
        }
    }
}

/// Three independent normal draws, each resampled until positive.
pub fn draw_factors<R: Rng + ?Sized>(spec: &UncertaintySpec, rng: &mut R) -> Factors {
    Factors {
        deaths: positive_normal(1.0, spec.deaths_sd, rng),
        cost: positive_normal(1.0, spec.cost_sd, rng),
        mi_ratio: positive_normal(spec.mi_mean, spec.mi_sd, rng),
    }
}

/// Random stream for one iteration.
pub fn iteration_rng(seed: u64, iteration: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(iteration);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
    pub sd: f64,
}

/// Empirical quantile with linear interpolation between order statistics at
/// rank (n − 1)·p. `sorted` must be ascending; `p` in percent.
pub fn quantile(sorted: &[f64], p: f64) -> ModelResult<f64> {
    if sorted.is_empty() {
        return Err(ModelError::EmptyDraws);
    }
    if !(p > 0.0 && p < 100.0) {
        return Err(ModelError::InvalidPercentile(p));
    }
    let h = (sorted.len() - 1) as f64 * p / 100.0;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    Ok(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

/// Mean, sd and percentile interval of one metric's draws, in iteration order.
pub fn summarize(draws: &[f64], percentiles: (f64, f64)) -> ModelResult<Interval> {
    if draws.is_empty() {
        return Err(ModelError::EmptyDraws);
    }
    // running mean: exact when every draw is equal
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (k, &x) in draws.iter().enumerate() {
        let delta = x - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (x - mean);
    }
    let sd = if draws.len() > 1 {
        (m2 / (draws.len() - 1) as f64).sqrt()
    } else {
        0.0
    };
    let mut sorted = draws.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(Interval {
        mean,
        lower: quantile(&sorted, percentiles.0)?,
        upper: quantile(&sorted, percentiles.1)?,
        sd,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSummary {
    pub name: String,
    pub deterministic: f64,
    pub interval: Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub iterations: usize,
    pub seed: u64,
    pub percentiles: (f64, f64),
    pub spec: UncertaintySpec,
    pub metrics: Vec<MetricSummary>,
}

impl SimulationSummary {
    pub fn metric(&self, name: &str) -> Option<&MetricSummary> {
        self.metrics.iter().find(|m| m.name == name)
    }
}

fn check_percentiles(p: (f64, f64)) -> ModelResult<()> {
    for v in [p.0, p.1] {
        if !(v > 0.0 && v < 100.0) {
            return Err(ModelError::InvalidPercentile(v));
        }
    }
    if p.0 >= p.1 {
        return Err(ModelError::InvalidPercentile(p.0));
    }
    Ok(())
}

/// Metric draws of every iteration, in iteration order.
pub fn simulate_draws(
    model: &PreparedModel,
    spec: &UncertaintySpec,
    iterations: usize,
    seed: u64,
) -> ModelResult<Vec<Vec<f64>>> {
    (0..iterations)
        .into_par_iter()
        .map(|i| {
            let mut rng = iteration_rng(seed, i as u64);
            let factors = draw_factors(spec, &mut rng);
            let report = evaluate(model, factors.perturbation(spec.mi_mean))?;
            Ok(metric_values(&report))
        })
        .collect()
}

pub fn simulate_prepared(
    model: &PreparedModel,
    spec: &UncertaintySpec,
    iterations: usize,
    seed: u64,
    percentiles: (f64, f64),
) -> ModelResult<SimulationSummary> {
    check_percentiles(percentiles)?;
    if iterations == 0 {
        return Err(ModelError::EmptyDraws);
    }
    let deterministic = metric_values(&evaluate(model, Perturbation::IDENTITY)?);
    let draws = simulate_draws(model, spec, iterations, seed)?;
    let mut column = Vec::with_capacity(iterations);
    let mut metrics = Vec::with_capacity(deterministic.len());
    for (j, name) in metric_names().into_iter().enumerate() {
        column.clear();
        column.extend(draws.iter().map(|d| d[j]));
        metrics.push(MetricSummary {
            name,
            deterministic: deterministic[j],
            interval: summarize(&column, percentiles)?,
        });
    }
    Ok(SimulationSummary {
        iterations,
        seed,
        percentiles,
        spec: *spec,
        metrics,
    })
}

/// Monte Carlo summary of a bundle with the manifest's uncertainty ranges.
pub fn simulate(
    bundle: &ScenarioBundle,
    iterations: usize,
    seed: u64,
    percentiles: (f64, f64),
) -> ModelResult<SimulationSummary> {
    let model = prepare(bundle)?;
    simulate_prepared(
        &model,
        &UncertaintySpec::from_bundle(bundle),
        iterations,
        seed,
        percentiles,
    )
}
