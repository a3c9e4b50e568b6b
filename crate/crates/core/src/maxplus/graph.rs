//! Graph reading of a max-plus matrix: entry (i, j) ≠ ε is an arc i → j.

use super::matrix::Matrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn successors<T: Scalar>(g: &Matrix<T>) -> Vec<Vec<usize>> {
    let mut succ = vec![Vec::new(); g.rows()];
    for (i, j) in g.arcs() {
        succ[i].push(j);
    }
    succ
}

/// Topological order of the graph of `g` (every arc goes forward in the order).
///
/// On a circuit, returns [`Error::Cyclic`] naming its nodes 1-based.
pub fn topological_order<T: Scalar>(g: &Matrix<T>) -> Result<Vec<usize>> {
    if !g.is_square() {
        return Err(Error::NotSquare {
            rows: g.rows(),
            cols: g.cols(),
        });
    }
    let n = g.rows();
    let succ = successors(g);
    let mut indegree = vec![0usize; n];
    for targets in &succ {
        for &j in targets {
            indegree[j] += 1;
        }
    }
    let mut ready: Vec<usize> = (0..n).rev().filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = ready.pop() {
        order.push(i);
        for &j in succ[i].iter().rev() {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                ready.push(j);
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        Err(Error::Cyclic {
            cycle: find_cycle(&succ).into_iter().map(|i| i + 1).collect(),
        })
    }
}

/// Number of arcs on the longest path; 0 for the null matrix.
pub fn longest_path<T: Scalar>(g: &Matrix<T>) -> Result<usize> {
    let order = topological_order(g)?;
    let succ = successors(g);
    let mut depth = vec![0usize; g.rows()];
    let mut longest = 0;
    for &i in &order {
        for &j in &succ[i] {
            depth[j] = depth[j].max(depth[i] + 1);
            longest = longest.max(depth[j]);
        }
    }
    Ok(longest)
}

fn find_cycle(succ: &[Vec<usize>]) -> Vec<usize> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        White,
        Grey,
        Black,
    }
    let n = succ.len();
    let mut mark = vec![Mark::White; n];
    for root in 0..n {
        if mark[root] != Mark::White {
            continue;
        }
        // (node, next successor index)
        let mut stack = vec![(root, 0usize)];
        mark[root] = Mark::Grey;
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            if let Some(&child) = succ[node].get(*next) {
                *next += 1;
                match mark[child] {
                    Mark::White => {
                        mark[child] = Mark::Grey;
                        stack.push((child, 0));
                    }
                    Mark::Grey => {
                        let start = stack.iter().position(|&(v, _)| v == child).unwrap();
                        return stack[start..].iter().map(|&(v, _)| v).collect();
                    }
                    Mark::Black => {}
                }
            } else {
                mark[node] = Mark::Black;
                stack.pop();
            }
        }
    }
    Vec::new()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_graph_has_zero_longest_path() {
        assert_eq!(longest_path(&Matrix::<f64>::null(4, 4)).unwrap(), 0);
    }

    #[test]
    fn fig1_partial_graph() {
        let g0 = Matrix::<f64>::adjacency(5, [(0, 2), (2, 4), (3, 4)]);
        assert_eq!(longest_path(&g0).unwrap(), 2);
    }

    #[test]
    fn tandem_chain() {
        for n in 1..8 {
            let g = Matrix::<f64>::adjacency(n, (1..n).map(|i| (i - 1, i)));
            assert_eq!(longest_path(&g).unwrap(), n - 1);
        }
    }

    #[test]
    fn cycle_is_named() {
        let g = Matrix::<f64>::adjacency(4, [(0, 1), (1, 2), (2, 3), (3, 1)]);
        match longest_path(&g) {
            Err(Error::Cyclic { cycle }) => assert_eq!(cycle, vec![2, 3, 4]),
            other => panic!("expected cycle, got {other:?}"),
        }
        let self_loop = Matrix::<f64>::adjacency(2, [(1, 1)]);
        assert_eq!(
            topological_order(&self_loop).unwrap_err().to_string(),
            "graph is not acyclic: cycle 2 -> 2"
        );
    }

    #[test]
    fn order_respects_arcs() {
        let arcs = [(4, 0), (0, 3), (2, 3), (1, 2)];
        let g = Matrix::<f64>::adjacency(5, arcs);
        let order = topological_order(&g).unwrap();
        let pos: Vec<usize> = (0..5).map(|v| order.iter().position(|&x| x == v).unwrap()).collect();
        for (i, j) in arcs {
            assert!(pos[i] < pos[j]);
        }
    }
}
