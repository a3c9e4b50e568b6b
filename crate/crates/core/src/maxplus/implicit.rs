use super::element::MaxPlus;
use super::graph::topological_order;
use super::matrix::Matrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Solves x = U ⊗ x ⊕ v for acyclic U.
///
/// The solution equals (I ⊕ U)^p ⊗ v with p the longest path of U's graph; it is
/// computed here by substitution along the reversed topological order, each
/// x_i depending only on the x_j with u_ij ≠ ε.
pub fn solve_implicit<T: Scalar>(u: &Matrix<T>, v: &[MaxPlus<T>]) -> Result<Vec<MaxPlus<T>>> {
    if u.cols() != v.len() {
        return Err(Error::Shape {
            op: "solve_implicit",
            left_rows: u.rows(),
            left_cols: u.cols(),
            right_rows: v.len(),
            right_cols: 1,
        });
    }
    let order = topological_order(u).map_err(|e| match e {
        Error::Cyclic { cycle } => Error::NoBoundedSolution { cycle },
        other => other,
    })?;
    let mut x = v.to_vec();
    for &i in order.iter().rev() {
        let mut xi = x[i];
        for (j, &uij) in u.row(i).iter().enumerate() {
            xi = xi.oplus(uij.otimes(x[j]));
        }
        x[i] = xi;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maxplus::{longest_path, Epsilon, Finite};

    fn closed_form(u: &Matrix<f64>, v: &[MaxPlus<f64>]) -> Vec<MaxPlus<f64>> {
        let p = longest_path(u).unwrap();
        Matrix::identity(u.rows())
            .add(u)
            .unwrap()
            .power(p)
            .unwrap()
            .mul_vec(v)
            .unwrap()
    }

    #[test]
    fn null_matrix_returns_rhs() {
        let v = vec![Finite(1.0), Epsilon, Finite(-3.0)];
        assert_eq!(solve_implicit(&Matrix::null(3, 3), &v).unwrap(), v);
    }

    #[test]
    fn single_arc() {
        // x2 = 2 ⊗ x1 ⊕ ε
        let mut u = Matrix::null(2, 2);
        u[(1, 0)] = Finite(2.0);
        let x = solve_implicit(&u, &[Finite(1.0), Epsilon]).unwrap();
        assert_eq!(x, vec![Finite(1.0), Finite(3.0)]);
    }

    #[test]
    fn matches_closed_form_on_chain() {
        let mut u = Matrix::null(4, 4);
        u[(1, 0)] = Finite(1.5);
        u[(2, 1)] = Finite(0.5);
        u[(3, 1)] = Finite(2.0);
        u[(3, 2)] = Finite(0.25);
        let v = vec![Finite(0.0), Finite(-1.0), Epsilon, Finite(0.0)];
        assert_eq!(solve_implicit(&u, &v).unwrap(), closed_form(&u, &v));
    }

    #[test]
    fn cyclic_matrix_has_no_bounded_solution() {
        let mut u = Matrix::null(2, 2);
        u[(0, 1)] = Finite(1.0);
        u[(1, 0)] = Finite(1.0);
        let err = solve_implicit(&u, &[Finite(0.0), Finite(0.0)]).unwrap_err();
        assert!(matches!(err, Error::NoBoundedSolution { .. }));
        assert!(err.to_string().starts_with("no unique bounded solution"));
    }
}
