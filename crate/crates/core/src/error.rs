use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch in {op}: left is {left_rows}x{left_cols}, right is {right_rows}x{right_cols}")]
    Shape {
        op: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    /// The graph contains a circuit; nodes are 1-based.
    #[error("graph is not acyclic: cycle {}", fmt_cycle(.cycle))]
    Cyclic { cycle: Vec<usize> },

    #[error("no unique bounded solution: graph of the matrix is not acyclic (cycle {})", fmt_cycle(.cycle))]
    NoBoundedSolution { cycle: Vec<usize> },

    #[error("invalid network: {0}")]
    Network(String),

    #[error("invalid service model: {0}")]
    Service(String),

    #[error("config error: {0}")]
    Config(String),
}

fn fmt_cycle(cycle: &[usize]) -> String {
    let mut parts: Vec<String> = cycle.iter().map(|c| c.to_string()).collect();
    if let Some(first) = cycle.first() {
        parts.push(first.to_string());
    }
    parts.join(" -> ")
}

pub type Result<T> = std::result::Result<T, Error>;
