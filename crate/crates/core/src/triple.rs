//! Ternary products and the Jordan main identity.
//!
//! The triple product is fixed with the half normalization
//! `{x, y, z} = (x y* z + z y* x) / 2`, so `{x, v, v} = x` is the same as
//! `x v* v + v v* x = 2x`. Residuals are measured in operator norm.

use serde::{Deserialize, Serialize};

use crate::cmatrix::ComplexMatrix;
use crate::discover;
use crate::error::{LabError, Result};
use crate::opspace::OperatorSpace;

fn same_shape(op: &'static str, mats: &[&ComplexMatrix]) -> Result<()> {
    let first = mats[0];
    for m in &mats[1..] {
        if m.shape() != first.shape() {
            return Err(LabError::Shape {
                op,
                left_rows: first.rows(),
                left_cols: first.cols(),
                right_rows: m.rows(),
                right_cols: m.cols(),
            });
        }
    }
    Ok(())
}

/// `{x, y, z} = (x y* z + z y* x) / 2`.
pub fn triple(x: &ComplexMatrix, y: &ComplexMatrix, z: &ComplexMatrix) -> Result<ComplexMatrix> {
    same_shape("triple", &[x, y, z])?;
    let ys = y.adjoint();
    let left = &(x * &ys) * z;
    let right = &(z * &ys) * x;
    Ok((&left + &right).scale_real(0.5))
}

/// Quadratic part `Q_a(z) = {z, a, z}`.
pub fn quadratic(a: &ComplexMatrix, z: &ComplexMatrix) -> Result<ComplexMatrix> {
    triple(z, a, z)
}

/// Polarized form `Q_a(x, y) = (Q_a(x + y) - Q_a(x) - Q_a(y)) / 2`.
pub fn polarized_q(a: &ComplexMatrix, x: &ComplexMatrix, y: &ComplexMatrix) -> Result<ComplexMatrix> {
    same_shape("polarized_q", &[a, x, y])?;
    let sum = quadratic(a, &(x + y))?;
    let qx = quadratic(a, x)?;
    let qy = quadratic(a, y)?;
    Ok((&(&sum - &qx) - &qy).scale_real(0.5))
}

/// Operator norm of
/// `{a,b,{x,y,z}} - {{a,b,x},y,z} + {x,{b,a,y},z} - {x,y,{a,b,z}}`.
pub fn main_identity_residual(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    x: &ComplexMatrix,
    y: &ComplexMatrix,
    z: &ComplexMatrix,
) -> Result<f64> {
    same_shape("main_identity", &[a, b, x, y, z])?;
    let lhs = triple(a, b, &triple(x, y, z)?)?;
    let t1 = triple(&triple(a, b, x)?, y, z)?;
    let t2 = triple(x, &triple(b, a, y)?, z)?;
    let t3 = triple(x, y, &triple(a, b, z)?)?;
    let diff = &(&(&lhs - &t1) + &t2) - &t3;
    diff.opnorm()
}

/// `‖{x, a, y}‖ - ‖x‖ ‖a‖ ‖y‖`; nonpositive for ambient products.
pub fn norm_inequality_gap(x: &ComplexMatrix, a: &ComplexMatrix, y: &ComplexMatrix) -> Result<f64> {
    let t = triple(x, a, y)?;
    Ok(t.opnorm()? - x.opnorm()? * a.opnorm()? * y.opnorm()?)
}

/// Gap for a projected product `P{x, a, y}`.
///
/// Used to probe whether contractive projections of ambient products can
/// violate the norm inequality. A positive value is a finding, not an error.
pub fn projected_norm_gap(
    projection: impl Fn(&ComplexMatrix) -> Result<ComplexMatrix>,
    x: &ComplexMatrix,
    a: &ComplexMatrix,
    y: &ComplexMatrix,
) -> Result<f64> {
    let t = projection(&triple(x, a, y)?)?;
    Ok(t.opnorm()? - x.opnorm()? * a.opnorm()? * y.opnorm()?)
}

/// Why ambient products may stand in for the partial triple product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Restriction {
    /// The space is closed under `a b* c`.
    Tro,
    /// Every middle argument lies in `A ∩ A*`.
    SelfAdjointPart,
    /// Asserted by the caller without a check.
    Assumed,
}

/// Standing assumption that the partial triple product with middle arguments
/// from a designated set is the restriction of the ambient product.
#[derive(Debug, Clone)]
pub struct TripleContext<'a> {
    space: &'a OperatorSpace,
    middle: Vec<ComplexMatrix>,
    restriction: Restriction,
    warnings: Vec<String>,
}

impl<'a> TripleContext<'a> {
    /// Establishes the restriction by checking TRO closure of the space, or
    /// membership of every middle argument in `A ∩ A*`.
    pub fn justified(space: &'a OperatorSpace, middle: Vec<ComplexMatrix>) -> Result<Self> {
        let restriction = justify(space, &middle)?;
        match restriction {
            Some(restriction) => Ok(Self {
                space,
                middle,
                restriction,
                warnings: Vec::new(),
            }),
            None => Err(LabError::Precondition(format!(
                "space '{}' is not TRO-closed and the middle arguments are not in A ∩ A*",
                space.name()
            ))),
        }
    }

    /// Asserts the restriction without checking it; the context carries a warning.
    pub fn assumed(space: &'a OperatorSpace, middle: Vec<ComplexMatrix>) -> Self {
        Self {
            space,
            middle,
            restriction: Restriction::Assumed,
            warnings: vec![format!(
                "partial triple product on '{}' assumed to be the ambient restriction",
                space.name()
            )],
        }
    }

    pub fn space(&self) -> &'a OperatorSpace {
        self.space
    }

    pub fn middle(&self) -> &[ComplexMatrix] {
        &self.middle
    }

    pub fn restriction(&self) -> Restriction {
        self.restriction
    }

    pub fn restriction_valid(&self) -> bool {
        self.restriction != Restriction::Assumed
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }
}

/// Which restriction, if any, can be verified for `middle` in `space`.
pub fn justify(space: &OperatorSpace, middle: &[ComplexMatrix]) -> Result<Option<Restriction>> {
    if discover::tro_closure(space)?.is_tro {
        return Ok(Some(Restriction::Tro));
    }
    if space.is_square() {
        let mut all = true;
        for m in middle {
            all &= space.member(m)?.is_member && space.member(&m.adjoint())?.is_member;
        }
        if all {
            return Ok(Some(Restriction::SelfAdjointPart));
        }
    }
    Ok(None)
}
