//! Named example spaces.

use crate::cmatrix::ComplexMatrix;
use crate::discover::{cartan, CartanKind};
use crate::error::Result;
use crate::opspace::OperatorSpace;

/// Upper-triangular `n x n` matrices.
pub fn upper_triangular(n: usize) -> Result<OperatorSpace> {
    let mut basis = Vec::new();
    for i in 0..n {
        for j in i..n {
            basis.push(ComplexMatrix::unit(n, n, i, j));
        }
    }
    OperatorSpace::new(format!("upper-triangular-{n}"), n, n, basis)
}

/// Diagonal `n x n` matrices.
pub fn diagonal(n: usize) -> Result<OperatorSpace> {
    let basis = (0..n).map(|i| ComplexMatrix::unit(n, n, i, i)).collect();
    OperatorSpace::new(format!("diagonal-{n}"), n, n, basis)
}

/// All `p x q` matrices.
pub fn full(p: usize, q: usize) -> Result<OperatorSpace> {
    let mut s = cartan(CartanKind::Rectangular { p, q })?;
    s.rename(format!("full-{p}x{q}"));
    Ok(s)
}

/// Column vectors of length `p`, as `p x 1` matrices.
pub fn column(p: usize) -> Result<OperatorSpace> {
    let mut s = cartan(CartanKind::Rectangular { p, q: 1 })?;
    s.rename(format!("column-{p}"));
    Ok(s)
}

/// Symmetric `n x n` matrices.
pub fn symmetric(n: usize) -> Result<OperatorSpace> {
    cartan(CartanKind::Symmetric { n })
}

/// Unital operator algebras with their identity as `v`.
pub fn operator_algebras() -> Result<Vec<(OperatorSpace, ComplexMatrix)>> {
    Ok(vec![
        (upper_triangular(2)?, ComplexMatrix::identity(2)),
        (upper_triangular(3)?, ComplexMatrix::identity(3)),
        (full(2, 2)?, ComplexMatrix::identity(2)),
        (diagonal(2)?, ComplexMatrix::identity(2)),
    ])
}
