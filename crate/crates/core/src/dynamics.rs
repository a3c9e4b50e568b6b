//! Cycle-by-cycle evolution x(k) = ⊕_m A_m(k) ⊗ x(k-m).
//!
//! The transition matrices are
//!
//! ```text
//! A_1(k) = (I ⊕ T_k ⊗ G_0ᵀ)^p ⊗ T_k ⊗ (I ⊕ G_1ᵀ)
//! A_m(k) = (I ⊕ T_k ⊗ G_0ᵀ)^p ⊗ T_k ⊗ G_mᵀ,   m ≥ 2
//! ```
//!
//! with T_k the diagonal matrix of k-th service times and p the longest path
//! of the graph of G_0. [`step`] evaluates the product right to left and applies
//! the closure (I ⊕ T_k ⊗ G_0ᵀ)^p by substitution in topological order, so no
//! matrix is formed per cycle. Because rounded addition is monotone this gives
//! bit-for-bit the same values as the per-node recursion in [`LindleyOracle`].

use std::collections::VecDeque;

use rayon::prelude::*;

use crate::analysis::{CycleRecord, CycleTrajectory, Sandwich};
use crate::maxplus::{Epsilon, Finite, Matrix, MaxPlus};
use crate::network::{Buffer, Network, PartialGraphs};
use crate::scalar::Scalar;
use crate::stochastic::ServiceSampler;

/// Diagonal matrix T_k of one cycle's service times.
#[derive(Clone, Debug, PartialEq)]
pub struct ServiceMatrix<T> {
    taus: Vec<T>,
}

impl<T: Scalar> ServiceMatrix<T> {
    /// Panics if a service time is negative or incomparable.
    pub fn new(taus: Vec<T>) -> Self {
        assert!(
            taus.iter().all(|t| *t >= T::zero()),
            "service times must be nonnegative"
        );
        ServiceMatrix { taus }
    }

    pub fn from_samples(samples: &[f64]) -> Self {
        Self::new(samples.iter().map(|&x| T::from_sample(x)).collect())
    }

    pub fn taus(&self) -> &[T] {
        &self.taus
    }

    pub fn to_matrix(&self) -> Matrix<T> {
        Matrix::diag(&self.taus)
    }

    /// ‖T_k‖ = max_i τ_ik.
    pub fn norm(&self) -> MaxPlus<T> {
        self.taus.iter().map(|&t| Finite(t)).sum()
    }
}

/// Transition matrices of one cycle, kept in factored form.
#[derive(Clone, Debug)]
pub struct TransitionSet<'a, T> {
    service: ServiceMatrix<T>,
    graphs: &'a PartialGraphs<T>,
}

impl<'a, T: Scalar> TransitionSet<'a, T> {
    pub fn new(service: ServiceMatrix<T>, graphs: &'a PartialGraphs<T>) -> Self {
        assert_eq!(service.taus.len(), graphs.node_count(), "service vector length");
        TransitionSet { service, graphs }
    }

    pub fn service(&self) -> &ServiceMatrix<T> {
        &self.service
    }

    /// Longest path of the graph of G_0.
    pub fn p(&self) -> usize {
        self.graphs.p()
    }

    /// Number of history terms, max(M, 1).
    pub fn depth(&self) -> usize {
        self.graphs.depth()
    }

    /// Overwrites y with (I ⊕ T ⊗ G_0ᵀ)^p ⊗ y, i.e. the solution of z = T ⊗ G_0ᵀ ⊗ z ⊕ y.
    fn close(&self, y: &mut [MaxPlus<T>]) {
        for &i in self.graphs.order() {
            let upstream: MaxPlus<T> = self.graphs.inbound(0, i).iter().map(|&j| y[j]).sum();
            y[i] = y[i].oplus(Finite(self.service.taus[i]).otimes(upstream));
        }
    }

    /// (I ⊕ T ⊗ G_0ᵀ)^p, built column by column.
    pub fn closure(&self) -> Matrix<T> {
        let n = self.graphs.node_count();
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            let mut e: Vec<MaxPlus<T>> = (0..n)
                .map(|i| if i == j { MaxPlus::e() } else { Epsilon })
                .collect();
            self.close(&mut e);
            cols.push(e);
        }
        Matrix::from_fn(n, n, |i, j| cols[j][i])
    }

    /// Dense A_m(k) for m = 1..=depth.
    pub fn matrix(&self, m: usize) -> Matrix<T> {
        assert!(m >= 1 && m <= self.depth(), "A_m defined for m in 1..=depth");
        let n = self.graphs.node_count();
        let gt = self.graphs.graph(m).transpose();
        let right = if m == 1 {
            Matrix::identity(n).add(&gt).expect("square")
        } else {
            gt
        };
        self.closure()
            .mul(&self.service.to_matrix())
            .and_then(|ct| ct.mul(&right))
            .expect("conforming shapes")
    }

    pub fn matrices(&self) -> Vec<Matrix<T>> {
        (1..=self.depth()).map(|m| self.matrix(m)).collect()
    }

    /// ⊕_m A_m(k) ⊗ x(k-m) for the given history.
    pub fn apply(&self, history: &StateHistory<T>) -> Vec<MaxPlus<T>> {
        let n = self.graphs.node_count();
        assert_eq!(history.depth(), self.depth(), "history depth");
        let prev = history.back(1);
        let mut y = Vec::with_capacity(n);
        for (i, &own) in prev.iter().enumerate() {
            // (I ⊕ G_1ᵀ) ⊗ x(k-1) ⊕ ⊕_{m≥2} G_mᵀ ⊗ x(k-m), row i
            let mut w = own;
            for m in 1..=self.depth() {
                let past = history.back(m);
                for &j in self.graphs.inbound(m, i) {
                    w = w.oplus(past[j]);
                }
            }
            y.push(Finite(self.service.taus[i]).otimes(w));
        }
        self.close(&mut y);
        y
    }
}

/// The last max(M, 1) state vectors, newest first.
///
/// Starts from x(0) = 0 and x(k) = ε for k < 0.
#[derive(Clone, Debug, PartialEq)]
pub struct StateHistory<T> {
    states: VecDeque<Vec<MaxPlus<T>>>,
}

impl<T: Scalar> StateHistory<T> {
    pub fn new(nodes: usize, depth: usize) -> Self {
        assert!(depth >= 1);
        let mut states = VecDeque::with_capacity(depth);
        states.push_back(vec![MaxPlus::e(); nodes]);
        for _ in 1..depth {
            states.push_back(vec![Epsilon; nodes]);
        }
        StateHistory { states }
    }

    pub fn depth(&self) -> usize {
        self.states.len()
    }

    /// x(k - m) relative to the next cycle k, for m in 1..=depth.
    pub fn back(&self, m: usize) -> &[MaxPlus<T>] {
        &self.states[m - 1]
    }

    /// Most recent state x(k-1).
    pub fn latest(&self) -> &[MaxPlus<T>] {
        self.back(1)
    }

    pub fn push(&mut self, x: Vec<MaxPlus<T>>) {
        self.states.pop_back();
        self.states.push_front(x);
    }
}

/// Computes x(k) from the transitions and appends it to the history.
pub fn step<T: Scalar>(ts: &TransitionSet<'_, T>, history: &mut StateHistory<T>) -> Vec<MaxPlus<T>> {
    let x = ts.apply(history);
    history.push(x.clone());
    x
}

/// Per-node queue recursion, kept independent of the matrix machinery:
///
/// ```text
/// x_i(k) = τ_ik ⊗ u_i(k) ⊕ τ_ik ⊗ x_i(k-1)
/// u_i(k) = ⊕_{j ∈ P(i)} x_j(k - r_i)     (ε when P(i) is empty)
/// ```
#[derive(Clone, Debug)]
pub struct LindleyOracle<T> {
    preds: Vec<Vec<usize>>,
    delay: Vec<Option<usize>>,
    // past[0] = x(k-1), past[r-1] = x(k-r)
    past: VecDeque<Vec<MaxPlus<T>>>,
}

impl<T: Scalar> LindleyOracle<T> {
    pub fn new(network: &Network) -> Self {
        let n = network.node_count();
        let delay: Vec<Option<usize>> = (0..n)
            .map(|i| match network.buffer(i) {
                Buffer::Saturated => None,
                Buffer::Finite(r) => Some(r as usize),
            })
            .collect();
        let longest = delay.iter().flatten().copied().max().unwrap_or(0).max(1);
        let mut past = VecDeque::with_capacity(longest);
        past.push_back(vec![MaxPlus::e(); n]);
        for _ in 1..longest {
            past.push_back(vec![Epsilon; n]);
        }
        LindleyOracle {
            preds: (0..n).map(|i| network.predecessors(i).to_vec()).collect(),
            delay,
            past,
        }
    }

    pub fn step(&mut self, taus: &[T]) -> Vec<MaxPlus<T>> {
        let n = self.preds.len();
        let mut current: Vec<Option<MaxPlus<T>>> = vec![None; n];
        for i in 0..n {
            self.resolve(i, taus, &mut current);
        }
        let x: Vec<MaxPlus<T>> = current.into_iter().map(Option::unwrap).collect();
        self.past.pop_back();
        self.past.push_front(x.clone());
        x
    }

    fn resolve(&self, i: usize, taus: &[T], current: &mut Vec<Option<MaxPlus<T>>>) -> MaxPlus<T> {
        if let Some(x) = current[i] {
            return x;
        }
        let arrival = match self.delay[i] {
            None => Epsilon,
            Some(0) => {
                let mut u = Epsilon;
                for &j in &self.preds[i] {
                    u = u.oplus(self.resolve(j, taus, current));
                }
                u
            }
            Some(r) => {
                let mut u = Epsilon;
                if let Some(old) = self.past.get(r - 1) {
                    for &j in &self.preds[i] {
                        u = u.oplus(old[j]);
                    }
                }
                u
            }
        };
        let tau = Finite(taus[i]);
        let x = tau.otimes(arrival).oplus(tau.otimes(self.past[0][i]));
        current[i] = Some(x);
        x
    }
}

/// Step-by-step driver holding the partial graphs, history and sandwich bounds.
#[derive(Clone, Debug)]
pub struct Simulator<T> {
    graphs: PartialGraphs<T>,
    history: StateHistory<T>,
    sandwich: Sandwich<T>,
    cycle: usize,
}

impl<T: Scalar> Simulator<T> {
    pub fn new(graphs: PartialGraphs<T>) -> Self {
        let n = graphs.node_count();
        let history = StateHistory::new(n, graphs.depth());
        let sandwich = Sandwich::new(n, graphs.q());
        Simulator {
            graphs,
            history,
            sandwich,
            cycle: 0,
        }
    }

    pub fn for_network(network: &Network) -> Self {
        Self::new(network.partial_graphs())
    }

    pub fn graphs(&self) -> &PartialGraphs<T> {
        &self.graphs
    }

    pub fn cycle(&self) -> usize {
        self.cycle
    }

    pub fn state(&self) -> &[MaxPlus<T>] {
        self.history.latest()
    }

    /// Runs one cycle with the given service times and returns its record.
    pub fn advance(&mut self, service: ServiceMatrix<T>) -> CycleRecord {
        let (lower, upper) = self.sandwich.push(service.taus());
        let ts = TransitionSet::new(service, &self.graphs);
        let x = step(&ts, &mut self.history);
        self.cycle += 1;
        let norm: MaxPlus<T> = x.iter().copied().sum();
        CycleRecord::new(self.cycle, norm.as_f64(), lower.as_f64(), upper.as_f64())
    }
}

/// Simulates `cycles` cycles with services drawn from `sampler`.
pub fn run<T: Scalar>(network: &Network, sampler: &mut ServiceSampler, cycles: usize) -> CycleTrajectory {
    assert!(cycles >= 1, "at least one cycle");
    let mut sim = Simulator::<T>::for_network(network);
    let q = sim.graphs().q();
    let mut buf = vec![0.0; network.node_count()];
    let mut records = Vec::with_capacity(cycles);
    for _ in 0..cycles {
        sampler.sample_into(&mut buf);
        records.push(sim.advance(ServiceMatrix::from_samples(&buf)));
    }
    CycleTrajectory::new(records, q)
}

/// Independent replicas 0..replicas of the same network, run in parallel.
pub fn run_replicas(
    network: &Network,
    sampler: &ServiceSampler,
    cycles: usize,
    replicas: u32,
) -> Vec<CycleTrajectory> {
    (0..replicas)
        .into_par_iter()
        .map(|r| run::<f64>(network, &mut sampler.for_replica(r), cycles))
        .collect()
}
