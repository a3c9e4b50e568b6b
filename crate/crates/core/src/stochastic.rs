//! Service-time models and seeded samplers.
//!
//! Every node owns an independent random stream. Streams are ChaCha8 instances
//! sharing the master seed and distinguished by their stream number
//! `(replica << 32) | node`, so adding replicas or nodes never shifts the
//! numbers drawn by an existing stream.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distribution of a single node's service time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Distribution {
    Constant { value: f64 },
    Exponential { mean: f64 },
    /// Erlang-`shape` variable of unit rate divided by `shape`: mean 1, variance 1/shape.
    ScaledErlang { shape: u32 },
}

impl Distribution {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Distribution::Constant { value } if !(value.is_finite() && value >= 0.0) => Err(
                Error::Service(format!("constant service time must be finite and >= 0, got {value}")),
            ),
            Distribution::Exponential { mean } if !(mean.is_finite() && mean > 0.0) => Err(
                Error::Service(format!("exponential mean must be finite and > 0, got {mean}")),
            ),
            Distribution::ScaledErlang { shape: 0 } => {
                Err(Error::Service("scaled Erlang shape must be >= 1".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Distribution::Constant { value } => value,
            Distribution::Exponential { mean } => mean,
            Distribution::ScaledErlang { .. } => 1.0,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Distribution::Constant { .. } => 0.0,
            Distribution::Exponential { mean } => mean * mean,
            Distribution::ScaledErlang { shape } => 1.0 / f64::from(shape),
        }
    }

    /// P(τ ≤ t).
    pub fn cdf(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        match *self {
            Distribution::Constant { value } => {
                if t >= value {
                    1.0
                } else {
                    0.0
                }
            }
            Distribution::Exponential { mean } => -(-t / mean).exp_m1(),
            Distribution::ScaledErlang { shape } => {
                // 1 - e^{-rt} Σ_{j<r} (rt)^j / j!
                let x = f64::from(shape) * t;
                let mut term = 1.0;
                let mut sum = 1.0;
                for j in 1..shape {
                    term *= x / f64::from(j);
                    sum += term;
                }
                (1.0 - (-x).exp() * sum).max(0.0)
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Distribution::Constant { value } => value,
            Distribution::Exponential { mean } => mean * unit_exponential(rng),
            Distribution::ScaledErlang { shape } => {
                let total: f64 = (0..shape).map(|_| unit_exponential(rng)).sum();
                total / f64::from(shape)
            }
        }
    }
}

/// Inverse-CDF draw of a mean-one exponential: -ln(1 - u), u uniform on [0, 1).
fn unit_exponential<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    -(-u).ln_1p()
}

/// Joint law of the per-cycle service vector.
#[derive(Clone, Debug, PartialEq)]
pub enum ServiceModel {
    /// Independent nodes, one distribution each.
    Independent(Vec<Distribution>),
    /// τ_i = Σ_j a_ij ξ_j with ξ_j i.i.d. unit exponentials, a_ii = a and
    /// a_ij = (1 - a)/(n - 1) otherwise, for a in [1/n, 1].
    CorrelatedExponential { nodes: usize, a: f64 },
}

/// Mixing of a correlated model written as τ_i = own·ξ_i + shared·Σ_j ξ_j.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mixing {
    pub own: f64,
    pub shared: f64,
}

impl ServiceModel {
    pub fn node_count(&self) -> usize {
        match self {
            ServiceModel::Independent(d) => d.len(),
            ServiceModel::CorrelatedExponential { nodes, .. } => *nodes,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ServiceModel::Independent(dists) => {
                for (i, d) in dists.iter().enumerate() {
                    d.validate()
                        .map_err(|e| Error::Service(format!("node {}: {}", i + 1, strip(&e))))?;
                }
                Ok(())
            }
            &ServiceModel::CorrelatedExponential { nodes, a } => {
                if nodes == 0 {
                    return Err(Error::Service("correlated model needs at least one node".into()));
                }
                let lo = 1.0 / nodes as f64;
                if !(a.is_finite() && a <= 1.0 && a >= lo - 1e-12) {
                    return Err(Error::Service(format!(
                        "mixing parameter a must lie in [1/{nodes}, 1], got {a}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Own/shared decomposition of the correlated mixing matrix.
    ///
    /// At a = 1/n the own weight is exactly zero, so all nodes receive the
    /// identical value within a cycle.
    pub fn mixing(&self) -> Option<Mixing> {
        match *self {
            ServiceModel::Independent(_) => None,
            ServiceModel::CorrelatedExponential { nodes, a } => {
                if nodes == 1 {
                    return Some(Mixing { own: 1.0, shared: 0.0 });
                }
                let n = nodes as f64;
                if (a * n - 1.0).abs() <= 1e-12 {
                    return Some(Mixing { own: 0.0, shared: 1.0 / n });
                }
                let shared = (1.0 - a) / (n - 1.0);
                Some(Mixing { own: a - shared, shared })
            }
        }
    }

    /// Full mixing matrix a_ij (correlated model only).
    pub fn mixing_weights(&self) -> Option<Vec<Vec<f64>>> {
        let n = self.node_count();
        self.mixing().map(|m| {
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| if i == j { m.own + m.shared } else { m.shared })
                        .collect()
                })
                .collect()
        })
    }

    /// Exact (mean, variance) of τ_{i1} for every node.
    pub fn moments(&self) -> Vec<(f64, f64)> {
        match self {
            ServiceModel::Independent(dists) => {
                dists.iter().map(|d| (d.mean(), d.variance())).collect()
            }
            ServiceModel::CorrelatedExponential { nodes, .. } => {
                let m = self.mixing().expect("correlated");
                let n = *nodes as f64;
                let mean = m.own + n * m.shared;
                let diag = m.own + m.shared;
                let var = diag * diag + (n - 1.0) * m.shared * m.shared;
                vec![(mean, var); *nodes]
            }
        }
    }
}

fn strip(e: &Error) -> String {
    match e {
        Error::Service(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Seeded source of per-cycle service vectors for one replica.
#[derive(Clone, Debug)]
pub struct ServiceSampler {
    model: ServiceModel,
    streams: Vec<ChaCha8Rng>,
    seed: u64,
    replica: u32,
    base: Vec<f64>,
}

impl ServiceSampler {
    pub fn new(model: ServiceModel, seed: u64, replica: u32) -> Self {
        let n = model.node_count();
        let streams = (0..n)
            .map(|node| stream(seed, replica, node as u32))
            .collect();
        ServiceSampler {
            model,
            streams,
            seed,
            replica,
            base: vec![0.0; n],
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn replica(&self) -> u32 {
        self.replica
    }

    pub fn model(&self) -> &ServiceModel {
        &self.model
    }

    /// A fresh sampler for another replica, positioned at its first cycle.
    pub fn for_replica(&self, replica: u32) -> Self {
        Self::new(self.model.clone(), self.seed, replica)
    }

    pub fn node_count(&self) -> usize {
        self.streams.len()
    }

    /// Fills `out` with the next cycle's service times.
    pub fn sample_into(&mut self, out: &mut [f64]) {
        assert_eq!(out.len(), self.streams.len(), "service vector length");
        match &self.model {
            ServiceModel::Independent(dists) => {
                for ((slot, d), rng) in out.iter_mut().zip(dists).zip(&mut self.streams) {
                    *slot = d.sample(rng);
                }
            }
            ServiceModel::CorrelatedExponential { .. } => {
                let m = self.model.mixing().expect("correlated");
                for (xi, rng) in self.base.iter_mut().zip(&mut self.streams) {
                    *xi = unit_exponential(rng);
                }
                let total: f64 = self.base.iter().sum();
                for (slot, xi) in out.iter_mut().zip(&self.base) {
                    *slot = m.own * xi + m.shared * total;
                }
            }
        }
    }

    pub fn sample_cycle(&mut self) -> Vec<f64> {
        let mut out = vec![0.0; self.streams.len()];
        self.sample_into(&mut out);
        out
    }
}

fn stream(seed: u64, replica: u32, node: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((u64::from(replica) << 32) | u64::from(node));
    rng
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, v)
    }

    #[test]
    fn constant_model_is_constant() {
        let mut s = ServiceSampler::new(
            ServiceModel::Independent(vec![Distribution::Constant { value: 2.0 }; 3]),
            9,
            0,
        );
        for _ in 0..5 {
            assert_eq!(s.sample_cycle(), vec![2.0; 3]);
        }
    }

    #[test]
    fn fully_shared_mixing_gives_equal_services() {
        let mut s = ServiceSampler::new(ServiceModel::CorrelatedExponential { nodes: 5, a: 0.2 }, 3, 0);
        for _ in 0..100 {
            let t = s.sample_cycle();
            assert!(t.iter().all(|&x| x == t[0]));
        }
    }

    #[test]
    fn exponential_sample_mean() {
        let mut s = ServiceSampler::new(
            ServiceModel::Independent(vec![Distribution::Exponential { mean: 1.0 }]),
            17,
            0,
        );
        let xs: Vec<f64> = (0..100_000).map(|_| s.sample_cycle()[0]).collect();
        let (m, _) = mean_var(&xs);
        assert!((m - 1.0).abs() <= 0.02, "mean {m}");
    }

    #[test]
    fn scaled_erlang_moments_within_three_standard_errors() {
        for shape in [1u32, 2, 4, 10] {
            let d = Distribution::ScaledErlang { shape };
            let mut s = ServiceSampler::new(ServiceModel::Independent(vec![d]), 5, 0);
            let n = 100_000;
            let xs: Vec<f64> = (0..n).map(|_| s.sample_cycle()[0]).collect();
            let (m, v) = mean_var(&xs);
            let var = 1.0 / f64::from(shape);
            let se_mean = (var / n as f64).sqrt();
            // Var of the sample variance for Gamma(r, r): (μ4 - σ^4 (n-3)/(n-1))/n with
            // μ4 = 3σ^4 + 6σ^4/r for this family.
            let mu4 = 3.0 * var * var + 6.0 * var * var / f64::from(shape);
            let se_var = ((mu4 - var * var) / n as f64).sqrt();
            assert!((m - 1.0).abs() <= 3.0 * se_mean, "shape {shape}: mean {m}");
            assert!((v - var).abs() <= 3.0 * se_var, "shape {shape}: var {v}");
        }
    }

    #[test]
    fn moments_table() {
        let erl = ServiceModel::Independent(vec![Distribution::ScaledErlang { shape: 4 }]);
        assert_eq!(erl.moments(), vec![(1.0, 0.25)]);
        let exp = ServiceModel::Independent(vec![Distribution::Exponential { mean: 3.0 }]);
        assert_eq!(exp.moments(), vec![(3.0, 9.0)]);
        let corr = ServiceModel::CorrelatedExponential { nodes: 5, a: 0.5 };
        for (m, v) in corr.moments() {
            assert!((m - 1.0).abs() < 1e-15);
            // 0.5^2 + 4 * 0.125^2
            assert!((v - 0.3125).abs() < 1e-15);
        }
    }

    #[test]
    fn mixing_rows_sum_to_one() {
        for a in [1.0, 0.5, 1.0 / 3.0, 0.25, 0.2] {
            let w = ServiceModel::CorrelatedExponential { nodes: 5, a }.mixing_weights().unwrap();
            for row in &w {
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
            assert!((w[0][0] - a).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(Distribution::Exponential { mean: 0.0 }.validate().is_err());
        assert!(Distribution::Constant { value: -1.0 }.validate().is_err());
        assert!(Distribution::ScaledErlang { shape: 0 }.validate().is_err());
        assert!(ServiceModel::CorrelatedExponential { nodes: 5, a: 0.1 }.validate().is_err());
        assert!(ServiceModel::CorrelatedExponential { nodes: 5, a: 1.5 }.validate().is_err());
        assert!(ServiceModel::CorrelatedExponential { nodes: 5, a: 0.2 }.validate().is_ok());
    }

    #[test]
    fn streams_are_reproducible_and_stable_under_replicas() {
        let model = ServiceModel::Independent(vec![Distribution::Exponential { mean: 1.0 }; 3]);
        let mut a = ServiceSampler::new(model.clone(), 42, 0);
        let mut b = ServiceSampler::new(model.clone(), 42, 0);
        let mut other = a.for_replica(1);
        let xa: Vec<Vec<f64>> = (0..50).map(|_| a.sample_cycle()).collect();
        let xb: Vec<Vec<f64>> = (0..50).map(|_| b.sample_cycle()).collect();
        let xo: Vec<Vec<f64>> = (0..50).map(|_| other.sample_cycle()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xo);

        // A node's stream does not depend on how many nodes the model has.
        let wider = ServiceModel::Independent(vec![Distribution::Exponential { mean: 1.0 }; 6]);
        let mut c = ServiceSampler::new(wider, 42, 0);
        let xc: Vec<Vec<f64>> = (0..50).map(|_| c.sample_cycle()).collect();
        for (short, long) in xa.iter().zip(&xc) {
            assert_eq!(short[..], long[..3]);
        }
    }

    #[test]
    fn distinct_streams_look_independent() {
        let model = ServiceModel::Independent(vec![Distribution::Exponential { mean: 1.0 }; 2]);
        let mut s = ServiceSampler::new(model, 7, 0);
        let n = 50_000;
        let pairs: Vec<Vec<f64>> = (0..n).map(|_| s.sample_cycle()).collect();
        let (mx, _) = mean_var(&pairs.iter().map(|p| p[0]).collect::<Vec<_>>());
        let (my, _) = mean_var(&pairs.iter().map(|p| p[1]).collect::<Vec<_>>());
        let cov = pairs.iter().map(|p| (p[0] - mx) * (p[1] - my)).sum::<f64>() / n as f64;
        // correlation estimate has standard error ≈ 1/√n
        assert!(cov.abs() < 4.0 / (n as f64).sqrt(), "cov {cov}");
    }

    #[test]
    fn erlang_cdf_reduces_to_exponential() {
        let e = Distribution::ScaledErlang { shape: 1 };
        let x = Distribution::Exponential { mean: 1.0 };
        for t in [0.0, 0.3, 1.0, 4.0] {
            assert!((e.cdf(t) - x.cdf(t)).abs() < 1e-15);
        }
    }
}
