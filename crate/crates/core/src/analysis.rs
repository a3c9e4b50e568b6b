//! Cycle-time bounds, per-cycle sandwich bounds and estimation.

use std::fmt;

use serde::Serialize;

use crate::maxplus::{Finite, MaxPlus};
use crate::quadrature::{integrate, Integral};
use crate::scalar::Scalar;
use crate::stochastic::{Distribution, ServiceModel, ServiceSampler};

/// Relative allowance for rounding when checking ‖x(k)‖ against the upper sandwich bound.
const ROUNDING_SLACK: f64 = 1e-9;

/// One simulated cycle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CycleRecord {
    pub k: usize,
    /// ‖x(k)‖, completion time of the k-th cycle.
    pub norm: f64,
    pub lower: f64,
    pub upper: f64,
    /// ‖x(k)‖ / k.
    pub gamma_hat: f64,
}

impl CycleRecord {
    pub fn new(k: usize, norm: f64, lower: f64, upper: f64) -> Self {
        CycleRecord {
            k,
            norm,
            lower,
            upper,
            gamma_hat: norm / k as f64,
        }
    }

    pub fn within_bounds(&self) -> bool {
        self.lower <= self.norm && self.norm <= self.upper + ROUNDING_SLACK * self.upper.abs().max(1.0)
    }
}

/// Trajectory of a run together with its sandwich-bound audit.
#[derive(Clone, Debug, PartialEq)]
pub struct CycleTrajectory {
    records: Vec<CycleRecord>,
    q: usize,
    violations: usize,
}

impl CycleTrajectory {
    pub fn new(records: Vec<CycleRecord>, q: usize) -> Self {
        let violations = records.iter().filter(|r| !r.within_bounds()).count();
        CycleTrajectory {
            records,
            q,
            violations,
        }
    }

    pub fn records(&self) -> &[CycleRecord] {
        &self.records
    }

    /// Path length used in the upper sandwich bound.
    pub fn q(&self) -> usize {
        self.q
    }

    /// Cycles whose norm fell outside the sandwich bounds. Always 0 for a correct run.
    pub fn violations(&self) -> usize {
        self.violations
    }

    pub fn last(&self) -> &CycleRecord {
        self.records.last().expect("trajectory has at least one cycle")
    }
}

/// Running computation of the per-cycle bounds
/// ‖Σ_i T_i‖ ≤ ‖x(k)‖ ≤ Σ_i ‖T_i‖ + q · max_i ‖T_i‖.
#[derive(Clone, Debug)]
pub struct Sandwich<T> {
    sums: Vec<T>,
    norm_sum: T,
    norm_max: MaxPlus<T>,
    q: usize,
}

impl<T: Scalar> Sandwich<T> {
    pub fn new(nodes: usize, q: usize) -> Self {
        Sandwich {
            sums: vec![T::zero(); nodes],
            norm_sum: T::zero(),
            norm_max: MaxPlus::Epsilon,
            q,
        }
    }

    /// Adds cycle k's service times and returns (lower_k, upper_k).
    pub fn push(&mut self, taus: &[T]) -> (MaxPlus<T>, MaxPlus<T>) {
        assert_eq!(taus.len(), self.sums.len());
        for (s, &t) in self.sums.iter_mut().zip(taus) {
            *s = *s + t;
        }
        let norm: MaxPlus<T> = taus.iter().map(|&t| Finite(t)).sum();
        self.norm_max = self.norm_max.oplus(norm);
        self.norm_sum = self.norm_sum + norm.finite().expect("at least one node");
        let lower = self.sums.iter().map(|&s| Finite(s)).sum();
        let upper = Finite(self.norm_sum).otimes(self.norm_max.pow(self.q));
        (lower, upper)
    }
}

/// Per-cycle sandwich bounds for a recorded service history and state norms.
#[derive(Clone, Debug, PartialEq)]
pub struct SandwichReport {
    pub bounds: Vec<(f64, f64)>,
    /// 1-based cycles where the bound failed.
    pub violations: Vec<usize>,
}

pub fn sandwich<T: Scalar>(taus: &[Vec<T>], norms: &[MaxPlus<T>], q: usize) -> SandwichReport {
    assert_eq!(taus.len(), norms.len(), "one norm per cycle");
    let nodes = taus.first().map_or(0, Vec::len);
    let mut acc = Sandwich::new(nodes, q);
    let mut bounds = Vec::with_capacity(taus.len());
    let mut violations = Vec::new();
    for (k, (t, norm)) in taus.iter().zip(norms).enumerate() {
        let (lo, up) = acc.push(t);
        let rec = CycleRecord::new(k + 1, norm.as_f64(), lo.as_f64(), up.as_f64());
        if !rec.within_bounds() {
            violations.push(k + 1);
        }
        bounds.push((rec.lower, rec.upper));
    }
    SandwichReport { bounds, violations }
}

/// Mean cycle time estimate from a single trajectory.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub cycles: usize,
    pub gamma_hat: f64,
    /// 1/γ̂; infinite when γ̂ = 0.
    pub throughput: f64,
    pub zero_cycle_time: bool,
    /// γ̂_k at k = 1, 2, 5, 10, 20, 50, … and at the final cycle.
    pub series: Vec<(usize, f64)>,
}

pub fn estimate(trajectory: &CycleTrajectory) -> Estimate {
    let last = trajectory.last();
    let gamma_hat = last.gamma_hat;
    let zero = gamma_hat == 0.0;
    let mut series = Vec::new();
    let mut decade = 1usize;
    'outer: loop {
        for mult in [1usize, 2, 5] {
            let k = decade * mult;
            if k > last.k {
                break 'outer;
            }
            series.push((k, trajectory.records()[k - 1].gamma_hat));
        }
        decade *= 10;
    }
    if series.last().map(|&(k, _)| k) != Some(last.k) {
        series.push((last.k, gamma_hat));
    }
    Estimate {
        cycles: last.k,
        gamma_hat,
        throughput: if zero { f64::INFINITY } else { 1.0 / gamma_hat },
        zero_cycle_time: zero,
        series,
    }
}

/// How the upper bound E‖T_1‖ was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum UpperMethod {
    Analytic,
    Quadrature,
    MonteCarlo { ci_halfwidth: f64 },
}

impl fmt::Display for UpperMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UpperMethod::Analytic => f.write_str("analytic"),
            UpperMethod::Quadrature => f.write_str("quadrature"),
            UpperMethod::MonteCarlo { ci_halfwidth } => write!(f, "monte-carlo(±{ci_halfwidth:.6})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UpperBound {
    pub value: f64,
    pub method: UpperMethod,
    pub warnings: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UpperBoundOptions {
    pub abs_tol: f64,
    pub max_segments: usize,
    pub mc_samples: usize,
    pub mc_seed: u64,
}

impl Default for UpperBoundOptions {
    fn default() -> Self {
        UpperBoundOptions {
            abs_tol: 1e-9,
            max_segments: 4000,
            mc_samples: 10_000_000,
            mc_seed: 0x5EED,
        }
    }
}

/// H_n = 1 + 1/2 + … + 1/n.
pub fn harmonic(n: usize) -> f64 {
    (1..=n).rev().map(|k| 1.0 / k as f64).sum()
}

/// Lower bound ‖E[T_1]‖: the largest mean service time.
pub fn lower_bound(model: &ServiceModel) -> f64 {
    model
        .moments()
        .into_iter()
        .map(|(m, _)| m)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Upper bound E‖T_1‖ = E[max_i τ_i1].
pub fn upper_bound(model: &ServiceModel) -> UpperBound {
    upper_bound_with(model, &UpperBoundOptions::default())
}

pub fn upper_bound_with(model: &ServiceModel, opts: &UpperBoundOptions) -> UpperBound {
    let analytic = |value| UpperBound {
        value,
        method: UpperMethod::Analytic,
        warnings: Vec::new(),
    };
    match model {
        ServiceModel::CorrelatedExponential { nodes, .. } => {
            // max_i (own ξ_i + shared Σξ) = own max ξ + shared Σξ since own ≥ 0
            let m = model.mixing().expect("correlated");
            analytic(m.own * harmonic(*nodes) + m.shared * *nodes as f64)
        }
        ServiceModel::Independent(dists) => {
            if let Some(c) = all_constant(dists) {
                return analytic(c);
            }
            if let Some(means) = all_exponential(dists) {
                if means.len() <= 16 {
                    return analytic(expected_max_exponentials(&means));
                }
            }
            let integral = expected_max_quadrature(dists, opts.abs_tol, opts.max_segments);
            if integral.converged {
                UpperBound {
                    value: integral.value,
                    method: UpperMethod::Quadrature,
                    warnings: Vec::new(),
                }
            } else {
                let (value, ci) = expected_max_monte_carlo(model, opts.mc_samples, opts.mc_seed);
                UpperBound {
                    value,
                    method: UpperMethod::MonteCarlo { ci_halfwidth: ci },
                    warnings: vec![format!(
                        "quadrature did not converge (error estimate {:.3e}); using Monte Carlo",
                        integral.error
                    )],
                }
            }
        }
    }
}

fn all_constant(dists: &[Distribution]) -> Option<f64> {
    dists
        .iter()
        .map(|d| match d {
            Distribution::Constant { value } => Some(*value),
            _ => None,
        })
        .try_fold(f64::NEG_INFINITY, |acc, v| v.map(|v| acc.max(v)))
}

fn all_exponential(dists: &[Distribution]) -> Option<Vec<f64>> {
    dists
        .iter()
        .map(|d| match d {
            Distribution::Exponential { mean } => Some(*mean),
            _ => None,
        })
        .collect()
}

/// E[max_i τ_i] for independent exponentials by inclusion–exclusion:
/// Σ_{S ≠ ∅} (-1)^{|S|+1} / Σ_{i∈S} 1/μ_i.
pub fn expected_max_exponentials(means: &[f64]) -> f64 {
    let n = means.len();
    assert!(n < 31, "too many terms for inclusion-exclusion");
    let mut total = 0.0;
    for subset in 1u32..(1 << n) {
        let rate: f64 = (0..n)
            .filter(|&i| subset & (1 << i) != 0)
            .map(|i| 1.0 / means[i])
            .sum();
        let sign = if subset.count_ones() % 2 == 1 { 1.0 } else { -1.0 };
        total += sign / rate;
    }
    total
}

/// E[max_i τ_i] = ∫_0^∞ (1 - Π_i F_i(t)) dt for independent nodes.
pub fn expected_max_quadrature(dists: &[Distribution], abs_tol: f64, max_segments: usize) -> Integral {
    let survival_sum = |t: f64| dists.iter().map(|d| 1.0 - d.cdf(t)).sum::<f64>();
    let scale = dists.iter().map(Distribution::mean).fold(1.0, f64::max);
    let mut horizon = scale;
    while survival_sum(horizon) > 1e-13 {
        horizon *= 2.0;
    }
    let mut breaks: Vec<f64> = (0..=16).map(|i| horizon * i as f64 / 16.0).collect();
    for d in dists {
        if let Distribution::Constant { value } = d {
            breaks.push(*value);
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    integrate(
        |t| 1.0 - dists.iter().map(|d| d.cdf(t)).product::<f64>(),
        &breaks,
        abs_tol,
        max_segments,
    )
}

/// Monte Carlo estimate of E[max_i τ_i] with a 95% confidence half-width.
pub fn expected_max_monte_carlo(model: &ServiceModel, samples: usize, seed: u64) -> (f64, f64) {
    assert!(samples >= 2);
    let mut sampler = ServiceSampler::new(model.clone(), seed, u32::MAX);
    let mut buf = vec![0.0; model.node_count()];
    let (mut mean, mut m2) = (0.0, 0.0);
    for i in 0..samples {
        sampler.sample_into(&mut buf);
        let x = buf.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let delta = x - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (x - mean);
    }
    let sd = (m2 / (samples - 1) as f64).sqrt();
    (mean, 1.96 * sd / (samples as f64).sqrt())
}

/// Upper bound on the expected maximum of k i.i.d. variables:
/// mean + (k-1)/√(2k-1) · √variance.
pub fn gumbel_hartley(mean: f64, variance: f64, k: usize) -> f64 {
    assert!(k >= 1 && variance >= 0.0);
    let k = k as f64;
    mean + (k - 1.0) / (2.0 * k - 1.0).sqrt() * variance.sqrt()
}

/// Bounds ‖E[T_1]‖ ≤ γ ≤ E‖T_1‖, optionally with a simulated estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundsReport {
    pub lower: f64,
    pub upper: f64,
    pub method: UpperMethod,
    pub gamma_estimate: Option<f64>,
    pub throughput: Option<f64>,
    pub warnings: Vec<String>,
}

impl BoundsReport {
    pub fn new(model: &ServiceModel) -> Self {
        Self::with_options(model, &UpperBoundOptions::default())
    }

    pub fn with_options(model: &ServiceModel, opts: &UpperBoundOptions) -> Self {
        let up = upper_bound_with(model, opts);
        BoundsReport {
            lower: lower_bound(model),
            upper: up.value,
            method: up.method,
            gamma_estimate: None,
            throughput: None,
            warnings: up.warnings,
        }
    }

    pub fn with_estimate(mut self, est: &Estimate) -> Self {
        self.gamma_estimate = Some(est.gamma_hat);
        self.throughput = Some(est.throughput);
        if est.zero_cycle_time {
            self.warnings.push("estimated cycle time is zero; throughput is infinite".into());
        }
        self
    }
}
