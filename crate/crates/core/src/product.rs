//! The binary product built from amplified triple products.
//!
//! For a distinguished element `v`, the product `y·x` is read off the corner
//! of `2{[x,0;0,0], [0,v;0,0], [0,y;0,0]}`. Expanding the block triple gives
//! the closed form `y v* x`, which serves as the oracle.

use crate::cmatrix::{blocks2, ComplexMatrix};
use crate::error::{LabError, Result};
use crate::opspace::{AmpElement, OperatorSpace};
use crate::triple::triple;

/// Largest operator-norm residual `‖{b, v, v} - b‖` over the declared basis,
/// with the zero-based index of the worst basis element.
pub fn cond_i_residual(space: &OperatorSpace, v: &ComplexMatrix) -> Result<(f64, usize)> {
    let mut worst = (0.0, 0);
    for (k, b) in space.basis().iter().enumerate() {
        let r = (&triple(b, v, v)? - b).opnorm()?;
        if r > worst.0 {
            worst = (r, k);
        }
    }
    Ok(worst)
}

/// A space together with its distinguished element `v`.
#[derive(Debug, Clone)]
pub struct ProductContext<'a> {
    space: &'a OperatorSpace,
    v: ComplexMatrix,
    v_adjoint: ComplexMatrix,
    norm_v: f64,
    cond_i_residual: f64,
}

impl<'a> ProductContext<'a> {
    pub fn new(space: &'a OperatorSpace, v: ComplexMatrix) -> Result<Self> {
        let membership = space.member(&v)?;
        if !membership.is_member {
            return Err(LabError::NotMember {
                row: 0,
                col: 0,
                residual: membership.residual,
            });
        }
        let (cond_i_residual, _) = cond_i_residual(space, &v)?;
        Ok(Self {
            space,
            norm_v: v.opnorm()?,
            v_adjoint: v.adjoint(),
            v,
            cond_i_residual,
        })
    }

    pub fn space(&self) -> &'a OperatorSpace {
        self.space
    }

    pub fn v(&self) -> &ComplexMatrix {
        &self.v
    }

    pub fn norm_v(&self) -> f64 {
        self.norm_v
    }

    pub fn cond_i_residual(&self) -> f64 {
        self.cond_i_residual
    }

    /// `diag(v, ..., v)` at level `n`.
    pub fn big_v(&self, n: usize) -> Result<AmpElement<'a>> {
        AmpElement::diagonal(self.space, n, &self.v)
    }

    /// `y·x`, the corner of `2{[x,0;0,0], [0,v;0,0], [0,y;0,0]}`.
    pub fn dot(&self, y: &ComplexMatrix, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        let zero = ComplexMatrix::zeros(self.space.rows(), self.space.cols());
        let xb = blocks2(x, &zero, &zero, &zero)?;
        let vb = blocks2(&zero, &self.v, &zero, &zero)?;
        let yb = blocks2(&zero, y, &zero, &zero)?;
        let t = triple(&xb, &vb, &yb)?.scale_real(2.0);
        Ok(t.block(0, 0, self.space.rows(), self.space.cols()))
    }

    /// Closed form `y v* x`.
    pub fn quasi_product(&self, y: &ComplexMatrix, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        y.matmul(&self.v_adjoint)?.matmul(x)
    }

    /// Distance of `m` to the space; positive when the product leaves it.
    pub fn closure_residual(&self, m: &ComplexMatrix) -> Result<f64> {
        Ok(self.space.member(m)?.residual)
    }

    /// Realization of `X·Y`, entry `(i, j)` being `sum_k x_ik·y_kj`.
    pub fn matrix_dot_realization(&self, x: &AmpElement<'_>, y: &AmpElement<'_>) -> Result<ComplexMatrix> {
        let n = check_levels(x, y)?;
        let (p, q) = self.space.shape();
        let xs = x.grid();
        let ys = y.grid();
        let grid = xs
            .iter()
            .map(|row| {
                (0..n)
                    .map(|j| {
                        row.iter().zip(&ys).try_fold(ComplexMatrix::zeros(p, q), |z, (xik, yk)| {
                            Ok(&z + &self.dot(xik, &yk[j])?)
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        crate::cmatrix::block_embed(&grid)
    }

    /// `X·Y` as an element of `M_n(A)`; fails when an entry leaves the space.
    pub fn matrix_dot(&self, x: &AmpElement<'_>, y: &AmpElement<'_>) -> Result<AmpElement<'a>> {
        let n = check_levels(x, y)?;
        let m = self.matrix_dot_realization(x, y)?;
        self.space.element_from_realization(n, &m)
    }

    /// Realization-level oracle `X V* Y`.
    pub fn matrix_quasi_product(&self, x: &AmpElement<'_>, y: &AmpElement<'_>) -> Result<ComplexMatrix> {
        let n = check_levels(x, y)?;
        let v = self.big_v(n)?;
        x.realization().matmul(&v.realization().adjoint())?.matmul(y.realization())
    }

    /// `‖{x, v, y} - (x·y + y·x)/2‖`.
    pub fn symmetrization_residual(&self, x: &ComplexMatrix, y: &ComplexMatrix) -> Result<f64> {
        self.require_members(&[x, y])?;
        let lhs = triple(x, &self.v, y)?;
        let rhs = (&self.dot(x, y)? + &self.dot(y, x)?).scale_real(0.5);
        (&lhs - &rhs).opnorm()
    }

    /// `‖(x·y)·z - x·(y·z)‖`.
    pub fn associativity_residual(&self, x: &ComplexMatrix, y: &ComplexMatrix, z: &ComplexMatrix) -> Result<f64> {
        self.require_members(&[x, y, z])?;
        let left = self.dot(&self.dot(x, y)?, z)?;
        let right = self.dot(x, &self.dot(y, z)?)?;
        (&left - &right).opnorm()
    }

    /// The block triple `{[Y,0;0,0], [V,0;0,0], [0,X;0,0]}` at level `2n`.
    pub fn remark_triple(&self, x: &AmpElement<'_>, y: &AmpElement<'_>) -> Result<ComplexMatrix> {
        let n = check_levels(x, y)?;
        let v = self.big_v(n)?;
        let (rows, cols) = (n * self.space.rows(), n * self.space.cols());
        let zero = ComplexMatrix::zeros(rows, cols);
        let yb = blocks2(y.realization(), &zero, &zero, &zero)?;
        let vb = blocks2(v.realization(), &zero, &zero, &zero)?;
        let xb = blocks2(&zero, x.realization(), &zero, &zero)?;
        triple(&yb, &vb, &xb)
    }

    /// `‖Y·X - 2 {[Y,0;0,0], [V,0;0,0], [0,X;0,0]}_{12}‖`.
    pub fn remark_residual(&self, x: &AmpElement<'_>, y: &AmpElement<'_>) -> Result<f64> {
        let n = check_levels(x, y)?;
        let t = self.remark_triple(x, y)?;
        let corner = t.block(0, 1, n * self.space.rows(), n * self.space.cols()).scale_real(2.0);
        (&self.matrix_dot_realization(y, x)? - &corner).opnorm()
    }

    fn require_members(&self, xs: &[&ComplexMatrix]) -> Result<()> {
        for x in xs {
            let m = self.space.member(x)?;
            if !m.is_member {
                return Err(LabError::NotMember {
                    row: 0,
                    col: 0,
                    residual: m.residual,
                });
            }
        }
        Ok(())
    }
}

fn check_levels(x: &AmpElement<'_>, y: &AmpElement<'_>) -> Result<usize> {
    if x.n() != y.n() {
        return Err(LabError::Level {
            expected: x.n(),
            found: y.n(),
        });
    }
    Ok(x.n())
}
