//! Exact Gaussian elimination over the rationals.

use crate::expr::Rat;
use num_traits::{One, Zero};

/// Outcome of solving `A x = b` exactly.
#[derive(Debug, Clone, PartialEq)]
pub enum LinSolve {
    /// No solution exists.
    Inconsistent,
    /// Unique solution.
    Unique(Vec<Rat>),
    /// Affine solution family: any `particular + sum c_i * basis_i` solves
    /// the system. `basis` spans the kernel.
    Family {
        particular: Vec<Rat>,
        basis: Vec<Vec<Rat>>,
    },
}

/// Solve `A x = b` by fraction-free-ish Gauss-Jordan over `Rat`.
/// `a` is row-major with `cols` unknowns; `b` has one entry per row.
pub fn solve(a: &[Vec<Rat>], b: &[Rat], cols: usize) -> LinSolve {
    assert_eq!(a.len(), b.len());
    let rows = a.len();
    // augmented matrix
    let mut m: Vec<Vec<Rat>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            assert_eq!(row.len(), cols);
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();

    let mut pivot_col_of_row: Vec<usize> = Vec::new();
    let mut r = 0usize;
    for c in 0..cols {
        // find pivot
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= inv.clone();
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..=cols {
                    let delta = &f * &m[r][j];
                    m[i][j] -= delta;
                }
            }
        }
        pivot_col_of_row.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }

    // inconsistency: zero row with nonzero rhs
    for i in r..rows {
        if m[i][..cols].iter().all(|x| x.is_zero()) && !m[i][cols].is_zero() {
            return LinSolve::Inconsistent;
        }
    }

    let pivot_cols: Vec<usize> = pivot_col_of_row.clone();
    let is_pivot = |c: usize| pivot_cols.contains(&c);
    let mut particular = vec![Rat::zero(); cols];
    for (row, &pc) in pivot_col_of_row.iter().enumerate() {
        particular[pc] = m[row][cols].clone();
    }
    let free_cols: Vec<usize> = (0..cols).filter(|c| !is_pivot(*c)).collect();
    if free_cols.is_empty() {
        return LinSolve::Unique(particular);
    }
    let mut basis = Vec::with_capacity(free_cols.len());
    for &fc in &free_cols {
        let mut v = vec![Rat::zero(); cols];
        v[fc] = Rat::one();
        for (row, &pc) in pivot_col_of_row.iter().enumerate() {
            v[pc] = -m[row][fc].clone();
        }
        basis.push(v);
    }
    LinSolve::Family { particular, basis }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rat {
        Rat::from_integer(n.into())
    }

    #[test]
    fn unique_system() {
        // x + y = 3 ; x - y = 1  ->  x = 2, y = 1
        let a = vec![vec![r(1), r(1)], vec![r(1), r(-1)]];
        let b = vec![r(3), r(1)];
        assert_eq!(solve(&a, &b, 2), LinSolve::Unique(vec![r(2), r(1)]));
    }

    #[test]
    fn inconsistent_system() {
        let a = vec![vec![r(1), r(1)], vec![r(2), r(2)]];
        let b = vec![r(1), r(3)];
        assert_eq!(solve(&a, &b, 2), LinSolve::Inconsistent);
    }

    #[test]
    fn underdetermined_family() {
        // x + y = 2 with y free
        let a = vec![vec![r(1), r(1)]];
        let b = vec![r(2)];
        match solve(&a, &b, 2) {
            LinSolve::Family { particular, basis } => {
                assert_eq!(particular, vec![r(2), r(0)]);
                assert_eq!(basis, vec![vec![r(-1), r(1)]]);
            }
            other => panic!("expected family, got {other:?}"),
        }
    }

    #[test]
    fn rational_pivoting() {
        // 2x = 1 -> x = 1/2
        let a = vec![vec![r(2)]];
        let b = vec![r(1)];
        assert_eq!(
            solve(&a, &b, 1),
            LinSolve::Unique(vec![Rat::new(1.into(), 2.into())])
        );
    }
}
