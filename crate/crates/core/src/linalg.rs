//! Dense LU factorization with partial pivoting over [`ScaledComplex`].

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::scaled::ScaledComplex;

/// Row-major square matrix.
pub type Matrix = Vec<Vec<ScaledComplex>>;

/// In-place LU factorization; returns the row permutation and its parity.
fn factor(a: &mut Matrix) -> Result<(Vec<usize>, bool)> {
    let n = a.len();
    if a.iter().any(|row| row.len() != n) {
        return Err(Error::LengthMismatch {
            expected: n,
            found: a.iter().map(Vec::len).find(|&l| l != n).unwrap_or(n),
        });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut odd = false;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| a[r][col].cmp_abs(&a[s][col]).then(Ordering::Greater))
            .expect("non-empty range");
        if a[pivot][col].is_zero() {
            return Err(Error::SingularMatrix { pivot: col });
        }
        if pivot != col {
            a.swap(pivot, col);
            perm.swap(pivot, col);
            odd = !odd;
        }
        let p = a[col][col];
        for r in col + 1..n {
            let factor = a[r][col] / p;
            a[r][col] = factor;
            for c in col + 1..n {
                let sub = factor * a[col][c];
                a[r][c] -= sub;
            }
        }
    }
    Ok((perm, odd))
}

pub fn determinant(mut a: Matrix) -> Result<ScaledComplex> {
    let (_, odd) = factor(&mut a)?;
    let det: ScaledComplex = (0..a.len()).map(|i| a[i][i]).product();
    Ok(if odd { -det } else { det })
}

/// Solves `a·x = b`.
pub fn solve(mut a: Matrix, b: &[ScaledComplex]) -> Result<Vec<ScaledComplex>> {
    let n = a.len();
    if b.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: b.len(),
        });
    }
    let (perm, _) = factor(&mut a)?;
    let mut y: Vec<ScaledComplex> = perm.iter().map(|&p| b[p]).collect();
    for i in 0..n {
        for j in 0..i {
            let sub = a[i][j] * y[j];
            y[i] -= sub;
        }
    }
    for i in (0..n).rev() {
        for j in i + 1..n {
            let sub = a[i][j] * y[j];
            y[i] -= sub;
        }
        y[i] = y[i] / a[i][i];
    }
    Ok(y)
}
