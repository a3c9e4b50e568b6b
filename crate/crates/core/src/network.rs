//! Fork-join network topology, initial buffer contents and the partial
//! adjacency matrices G_0..G_M.

use std::fmt;

use crate::error::{Error, Result};
use crate::maxplus::{longest_path, topological_order, Matrix};
use crate::scalar::Scalar;
use crate::stochastic::ServiceModel;

/// Initial number of customers waiting in a node's buffer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Buffer {
    /// r = ∞: an external arrival stream, only valid on nodes without predecessors.
    Saturated,
    Finite(u32),
}

impl fmt::Display for Buffer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Buffer::Saturated => f.write_str("inf"),
            Buffer::Finite(r) => write!(f, "{r}"),
        }
    }
}

/// Unvalidated network description. Node indices are 0-based here.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkSpec {
    pub nodes: usize,
    pub arcs: Vec<(usize, usize)>,
    pub buffers: Vec<Buffer>,
    pub service: ServiceModel,
}

impl NetworkSpec {
    /// Open tandem of `n` nodes: 1 → 2 → … → n, saturated first node, empty buffers elsewhere.
    pub fn tandem(n: usize, service: ServiceModel) -> Self {
        let mut buffers = vec![Buffer::Finite(0); n];
        if n > 0 {
            buffers[0] = Buffer::Saturated;
        }
        NetworkSpec {
            nodes: n,
            arcs: (1..n).map(|i| (i - 1, i)).collect(),
            buffers,
            service,
        }
    }

    /// The five-node fork-join example: arcs 1→3, 1→4, 2→4, 3→5, 4→5 and
    /// r = (∞, ∞, 0, 1, 0).
    pub fn fork_join_example(service: ServiceModel) -> Self {
        NetworkSpec {
            nodes: 5,
            arcs: vec![(0, 2), (0, 3), (1, 3), (2, 4), (3, 4)],
            buffers: vec![
                Buffer::Saturated,
                Buffer::Saturated,
                Buffer::Finite(0),
                Buffer::Finite(1),
                Buffer::Finite(0),
            ],
            service,
        }
    }

    pub fn validate(self) -> Result<Network> {
        let n = self.nodes;
        if n == 0 {
            return Err(Error::Network("network has no nodes".into()));
        }
        if self.buffers.len() != n {
            return Err(Error::Network(format!(
                "expected {n} buffer entries, got {}",
                self.buffers.len()
            )));
        }
        if self.service.node_count() != n {
            return Err(Error::Network(format!(
                "expected {n} service entries, got {}",
                self.service.node_count()
            )));
        }
        let mut preds = vec![Vec::new(); n];
        let mut succs = vec![Vec::new(); n];
        for &(i, j) in &self.arcs {
            if i >= n || j >= n {
                return Err(Error::Network(format!(
                    "arc ({}, {}) references a node outside 1..={n}",
                    i + 1,
                    j + 1
                )));
            }
            if succs[i].contains(&j) {
                return Err(Error::Network(format!("duplicate arc ({}, {})", i + 1, j + 1)));
            }
            succs[i].push(j);
            preds[j].push(i);
        }
        let order = topological_order(&Matrix::<f64>::adjacency(n, self.arcs.iter().copied()))?;
        for (i, (p, b)) in preds.iter().zip(&self.buffers).enumerate() {
            match (p.is_empty(), b) {
                (true, Buffer::Finite(_)) => {
                    return Err(Error::Network(format!(
                        "node {} has no predecessors and must have a saturated buffer",
                        i + 1
                    )))
                }
                (false, Buffer::Saturated) => {
                    return Err(Error::Network(format!(
                        "node {} has predecessors and cannot have a saturated buffer",
                        i + 1
                    )))
                }
                _ => {}
            }
        }
        self.service.validate()?;
        for list in preds.iter_mut().chain(succs.iter_mut()) {
            list.sort_unstable();
        }
        Ok(Network {
            spec: self,
            preds,
            succs,
            order,
        })
    }
}

/// A validated network.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    spec: NetworkSpec,
    preds: Vec<Vec<usize>>,
    succs: Vec<Vec<usize>>,
    order: Vec<usize>,
}

impl Network {
    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn node_count(&self) -> usize {
        self.spec.nodes
    }

    pub fn service(&self) -> &ServiceModel {
        &self.spec.service
    }

    pub fn buffer(&self, i: usize) -> Buffer {
        self.spec.buffers[i]
    }

    /// P(i).
    pub fn predecessors(&self, i: usize) -> &[usize] {
        &self.preds[i]
    }

    /// S(i).
    pub fn successors(&self, i: usize) -> &[usize] {
        &self.succs[i]
    }

    /// A topological order of the full arc graph.
    pub fn topological_order(&self) -> &[usize] {
        &self.order
    }

    /// M: the largest finite initial buffer content.
    pub fn max_buffer(&self) -> usize {
        self.spec
            .buffers
            .iter()
            .filter_map(|b| match b {
                Buffer::Finite(r) => Some(*r as usize),
                Buffer::Saturated => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// Number of past state vectors the dynamics depend on: max(M, 1).
    pub fn history_depth(&self) -> usize {
        self.max_buffer().max(1)
    }

    /// Same topology and services with every finite buffer emptied.
    pub fn with_empty_buffers(&self) -> Network {
        let mut spec = self.spec.clone();
        for b in &mut spec.buffers {
            if let Buffer::Finite(r) = b {
                *r = 0;
            }
        }
        spec.validate().expect("emptying buffers keeps a network valid")
    }

    /// G_m has g_ij = 0 iff (i, j) is an arc and r_j = m.
    pub fn partial_graphs<T: Scalar>(&self) -> PartialGraphs<T> {
        let n = self.node_count();
        let depth = self.history_depth();
        let mut graphs = vec![Matrix::null(n, n); depth + 1];
        for &(i, j) in &self.spec.arcs {
            // arcs always end at a node with predecessors, hence a finite buffer
            let Buffer::Finite(r) = self.spec.buffers[j] else {
                unreachable!("validated: saturated nodes have no predecessors")
            };
            graphs[r as usize][(i, j)] = crate::maxplus::MaxPlus::e();
        }
        PartialGraphs::from_graphs(self.max_buffer(), graphs)
    }
}

/// The partial adjacency matrices G_0..G_depth and their ⊕-sum.
///
/// `graphs` always holds at least G_0 and G_1; when M = 0 the latter is ℰ.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialGraphs<T> {
    max_buffer: usize,
    graphs: Vec<Matrix<T>>,
    all: Matrix<T>,
    p: usize,
    q: usize,
    order: Vec<usize>,
    inbound: Vec<Vec<Vec<usize>>>,
}

impl<T: Scalar> PartialGraphs<T> {
    fn from_graphs(max_buffer: usize, graphs: Vec<Matrix<T>>) -> Self {
        let all = graphs[1..]
            .iter()
            .fold(graphs[0].clone(), |acc, g| acc.add(g).expect("same shape"));
        let p = longest_path(&graphs[0]).expect("partial graph of an acyclic network");
        let q = longest_path(&all).expect("acyclic network");
        let order = topological_order(&graphs[0]).expect("acyclic");
        let n = all.rows();
        let inbound = graphs
            .iter()
            .map(|g| {
                let mut lists = vec![Vec::new(); n];
                for (i, j) in g.arcs() {
                    lists[j].push(i);
                }
                lists
            })
            .collect();
        PartialGraphs {
            max_buffer,
            graphs,
            all,
            p,
            q,
            order,
            inbound,
        }
    }

    /// M.
    pub fn max_buffer(&self) -> usize {
        self.max_buffer
    }

    /// max(M, 1).
    pub fn depth(&self) -> usize {
        self.graphs.len() - 1
    }

    pub fn node_count(&self) -> usize {
        self.all.rows()
    }

    /// G_m for m = 0..=depth.
    pub fn graph(&self, m: usize) -> &Matrix<T> {
        &self.graphs[m]
    }

    pub fn graphs(&self) -> &[Matrix<T>] {
        &self.graphs
    }

    /// G_0 ⊕ … ⊕ G_M.
    pub fn all(&self) -> &Matrix<T> {
        &self.all
    }

    /// Longest path of the graph of G_0.
    pub fn p(&self) -> usize {
        self.p
    }

    /// Longest path of the graph of G_0 ⊕ … ⊕ G_M.
    pub fn q(&self) -> usize {
        self.q
    }

    /// Topological order of the graph of G_0.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Nodes i with (i, j) an arc of G_m, i.e. the support of row j of G_mᵀ.
    pub fn inbound(&self, m: usize, j: usize) -> &[usize] {
        &self.inbound[m][j]
    }

    /// Partial graphs after reducing every finite buffer to zero:
    /// G̃_0 = G_0 ⊕ … ⊕ G_M and G̃_m = ℰ for m ≥ 1.
    pub fn zero_buffer_transform(&self) -> Self {
        let n = self.node_count();
        let mut graphs = vec![Matrix::null(n, n); self.graphs.len()];
        graphs[0] = self.all.clone();
        Self::from_graphs(0, graphs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::Distribution;

    fn exp_services(n: usize) -> ServiceModel {
        ServiceModel::Independent(vec![Distribution::Exponential { mean: 1.0 }; n])
    }

    fn arcs_of(m: &Matrix<f64>) -> Vec<(usize, usize)> {
        m.arcs().map(|(i, j)| (i + 1, j + 1)).collect()
    }

    #[test]
    fn fork_join_example_partial_graphs() {
        let net = NetworkSpec::fork_join_example(exp_services(5)).validate().unwrap();
        assert_eq!(net.max_buffer(), 1);
        let pg = net.partial_graphs::<f64>();
        assert_eq!(arcs_of(pg.graph(0)), vec![(1, 3), (3, 5), (4, 5)]);
        assert_eq!(arcs_of(pg.graph(1)), vec![(1, 4), (2, 4)]);
        assert_eq!(pg.p(), 2);
        assert_eq!(pg.q(), 2);
        assert_eq!(net.predecessors(4), &[2, 3]);
        assert_eq!(net.successors(0), &[2, 3]);
    }

    #[test]
    fn larger_buffer_moves_arcs() {
        let mut spec = NetworkSpec::fork_join_example(exp_services(5));
        spec.buffers[3] = Buffer::Finite(2);
        let pg = spec.validate().unwrap().partial_graphs::<f64>();
        assert_eq!(pg.max_buffer(), 2);
        assert!(pg.graph(1).is_null());
        assert_eq!(arcs_of(pg.graph(2)), vec![(1, 4), (2, 4)]);
    }

    #[test]
    fn tandem_has_no_history_arcs() {
        let net = NetworkSpec::tandem(3, exp_services(3)).validate().unwrap();
        let pg = net.partial_graphs::<f64>();
        assert_eq!(pg.max_buffer(), 0);
        assert_eq!(pg.depth(), 1);
        assert!(pg.graph(1).is_null());
        assert_eq!(arcs_of(pg.graph(0)), vec![(1, 2), (2, 3)]);
        assert_eq!(pg.zero_buffer_transform(), pg);
    }

    #[test]
    fn zero_buffer_transform_merges_graphs() {
        let pg = NetworkSpec::fork_join_example(exp_services(5))
            .validate()
            .unwrap()
            .partial_graphs::<f64>();
        let z = pg.zero_buffer_transform();
        assert_eq!(z.graph(0), pg.all());
        assert!(z.graph(1).is_null());
        assert_eq!(z.max_buffer(), 0);
        // 1→3→5, 1→4→5 and 2→4→5 all have two arcs
        assert_eq!(z.p(), 2);
        assert_eq!(z.zero_buffer_transform(), z);
        let emptied = NetworkSpec::fork_join_example(exp_services(5))
            .validate()
            .unwrap()
            .with_empty_buffers()
            .partial_graphs::<f64>();
        assert_eq!(emptied.graph(0), z.graph(0));
    }

    #[test]
    fn cycle_rejected() {
        let mut spec = NetworkSpec::fork_join_example(exp_services(5));
        spec.arcs.push((4, 0));
        let err = spec.validate().unwrap_err();
        assert!(matches!(err, Error::Cyclic { .. }), "{err}");
        assert!(err.to_string().contains("1 -> 3 -> 5 -> 1"), "{err}");
    }

    #[test]
    fn buffer_placement_rules() {
        let mut spec = NetworkSpec::tandem(3, exp_services(3));
        spec.buffers[1] = Buffer::Saturated;
        assert!(spec.validate().unwrap_err().to_string().contains("node 2"));
        let mut spec = NetworkSpec::tandem(3, exp_services(3));
        spec.buffers[0] = Buffer::Finite(0);
        assert!(spec.validate().unwrap_err().to_string().contains("node 1"));
    }

    #[test]
    fn malformed_specs_rejected() {
        let mut spec = NetworkSpec::tandem(3, exp_services(3));
        spec.arcs.push((0, 1));
        assert!(spec.validate().unwrap_err().to_string().contains("duplicate"));
        let mut spec = NetworkSpec::tandem(3, exp_services(3));
        spec.arcs.push((0, 7));
        assert!(spec.validate().is_err());
        let spec = NetworkSpec::tandem(3, exp_services(2));
        assert!(spec.validate().is_err());
        let spec = NetworkSpec::tandem(
            2,
            ServiceModel::Independent(vec![Distribution::Exponential { mean: -1.0 }; 2]),
        );
        assert!(spec.validate().unwrap_err().to_string().contains("node 1"));
    }
}
