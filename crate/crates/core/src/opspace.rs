//! Concrete operator spaces and their matrix amplifications.
//!
//! An [`OperatorSpace`] is a subspace `A` of `p x q` complex matrices given by a
//! basis. An element of `M_n(A)` is an [`AmpElement`]: an `n x n` grid of
//! entries from `A`, realized as the `np x nq` block matrix whose block `(i, j)`
//! is entry `(i, j)`. The amplified norm is the operator norm of that
//! realization, and `M_n(A)` sits inside `M_{n+1}(A)` by padding with zeros.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::cmatrix::{block_embed, check_basis, ComplexMatrix, Tolerances, C64};
use crate::error::{LabError, Result};

/// A finite-dimensional concrete operator space.
#[derive(Debug, Clone)]
pub struct OperatorSpace {
    name: String,
    rows: usize,
    cols: usize,
    basis: Vec<ComplexMatrix>,
    orthonormal: Vec<ComplexMatrix>,
    tol: Tolerances,
}

/// Outcome of a membership test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Membership {
    pub is_member: bool,
    /// Frobenius distance to the space.
    pub residual: f64,
}

impl OperatorSpace {
    /// Builds a space from a nonempty, linearly independent basis of `rows x cols` matrices.
    pub fn new(
        name: impl Into<String>,
        rows: usize,
        cols: usize,
        basis: Vec<ComplexMatrix>,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(LabError::Unsupported("ambient dimensions must be positive".into()));
        }
        check_basis(&basis, rows, cols)?;
        let orthonormal = orthonormalize(&basis, rows, cols);
        Ok(Self {
            name: name.into(),
            rows,
            cols,
            basis,
            orthonormal,
            tol: Tolerances::default(),
        })
    }

    /// Space spanned by an already orthonormal family, which may be empty.
    pub(crate) fn from_orthonormal(
        name: impl Into<String>,
        rows: usize,
        cols: usize,
        orthonormal: Vec<ComplexMatrix>,
    ) -> Self {
        Self {
            name: name.into(),
            rows,
            cols,
            basis: orthonormal.clone(),
            orthonormal,
            tol: Tolerances::default(),
        }
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rename(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Dimension `d` of the space.
    pub fn dim(&self) -> usize {
        self.orthonormal.len()
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    /// Frobenius-orthonormal basis of the same span.
    pub fn orthonormal_basis(&self) -> &[ComplexMatrix] {
        &self.orthonormal
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tol
    }

    fn check_shape(&self, x: &ComplexMatrix) -> Result<()> {
        if x.shape() != (self.rows, self.cols) {
            return Err(LabError::Shape {
                op: "member",
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: x.rows(),
                right_cols: x.cols(),
            });
        }
        Ok(())
    }

    /// `sum_k coeffs[k] * q_k` over the orthonormal basis.
    pub fn combine(&self, coeffs: &[C64]) -> ComplexMatrix {
        assert_eq!(coeffs.len(), self.dim(), "coefficient count must equal dim");
        let mut out = ComplexMatrix::zeros(self.rows, self.cols);
        for (c, q) in coeffs.iter().zip(&self.orthonormal) {
            out.axpy(*c, q);
        }
        out
    }

    /// Coordinates of the orthogonal projection of `x` onto the space, and the
    /// Frobenius distance from `x` to it.
    pub fn coordinates(&self, x: &ComplexMatrix) -> Result<(Vec<C64>, f64)> {
        self.check_shape(x)?;
        let coeffs: Vec<C64> = self.orthonormal.iter().map(|q| x.inner(q)).collect();
        let residual = (x - &self.combine(&coeffs)).frobenius();
        Ok((coeffs, residual))
    }

    pub fn member(&self, x: &ComplexMatrix) -> Result<Membership> {
        let (_, residual) = self.coordinates(x)?;
        Ok(Membership {
            is_member: residual <= self.tol.membership,
            residual,
        })
    }

    /// Builds an element of `M_n(A)` from an `n x n` grid of members.
    pub fn amplify(&self, grid: &[Vec<ComplexMatrix>]) -> Result<AmpElement<'_>> {
        let n = grid.len();
        if n == 0 || grid.iter().any(|row| row.len() != n) {
            return Err(LabError::RaggedGrid("amplification grid must be square and nonempty".into()));
        }
        let mut coeffs = Vec::with_capacity(n * n * self.dim());
        for (i, row) in grid.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                let (c, residual) = self.coordinates(x)?;
                if residual > self.tol.membership {
                    return Err(LabError::NotMember {
                        row: i,
                        col: j,
                        residual,
                    });
                }
                coeffs.extend(c);
            }
        }
        AmpElement::from_coefficients(self, n, coeffs)
    }

    /// Splits an `np x nq` matrix into blocks and amplifies them.
    pub fn element_from_realization(&self, n: usize, m: &ComplexMatrix) -> Result<AmpElement<'_>> {
        if m.shape() != (n * self.rows, n * self.cols) {
            return Err(LabError::Shape {
                op: "element_from_realization",
                left_rows: n * self.rows,
                left_cols: n * self.cols,
                right_rows: m.rows(),
                right_cols: m.cols(),
            });
        }
        let grid: Vec<Vec<ComplexMatrix>> = (0..n)
            .map(|i| (0..n).map(|j| m.block(i, j, self.rows, self.cols)).collect())
            .collect();
        self.amplify(&grid)
    }

    pub fn to_file(&self) -> SpaceFile {
        SpaceFile {
            name: self.name.clone(),
            ambient: Ambient {
                rows: self.rows,
                cols: self.cols,
            },
            basis: self.basis.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: SpaceFile = serde_json::from_str(s)?;
        file.into_space()
    }
}

fn orthonormalize(basis: &[ComplexMatrix], rows: usize, cols: usize) -> Vec<ComplexMatrix> {
    let mut stacked = DMatrix::zeros(rows * cols, basis.len());
    for (k, b) in basis.iter().enumerate() {
        stacked.set_column(k, &b.vectorize());
    }
    let q = stacked.qr().q();
    (0..basis.len())
        .map(|k| {
            let col: Vec<C64> = q.column(k).iter().copied().collect();
            ComplexMatrix::from_row_major(rows, cols, &col)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ambient {
    pub rows: usize,
    pub cols: usize,
}

/// On-disk space description: `{ "name", "ambient": {"rows", "cols"}, "basis": [matrix] }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceFile {
    pub name: String,
    pub ambient: Ambient,
    pub basis: Vec<ComplexMatrix>,
}

impl SpaceFile {
    pub fn into_space(self) -> Result<OperatorSpace> {
        OperatorSpace::new(self.name, self.ambient.rows, self.ambient.cols, self.basis)
    }
}

/// An element of `M_n(A)`.
///
/// Entries are stored as coefficient vectors against the orthonormal basis of
/// the space, so every entry is a member by construction; the block
/// realization is computed once on construction.
#[derive(Debug, Clone)]
pub struct AmpElement<'a> {
    space: &'a OperatorSpace,
    n: usize,
    coeffs: Vec<C64>,
    realization: ComplexMatrix,
    norm: OnceLock<f64>,
}

impl<'a> AmpElement<'a> {
    /// `coeffs` holds the grid row-major, `d` coefficients per entry.
    pub fn from_coefficients(space: &'a OperatorSpace, n: usize, coeffs: Vec<C64>) -> Result<Self> {
        let d = space.dim();
        if n == 0 {
            return Err(LabError::Unsupported("amplification level must be at least 1".into()));
        }
        if coeffs.len() != n * n * d {
            return Err(LabError::Unsupported(format!(
                "expected {} coefficients for level {n}, got {}",
                n * n * d,
                coeffs.len()
            )));
        }
        let grid: Vec<Vec<ComplexMatrix>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let start = (i * n + j) * d;
                        space.combine(&coeffs[start..start + d])
                    })
                    .collect()
            })
            .collect();
        let realization = block_embed(&grid)?;
        Ok(Self {
            space,
            n,
            coeffs,
            realization,
            norm: OnceLock::new(),
        })
    }

    pub fn zero(space: &'a OperatorSpace, n: usize) -> Result<Self> {
        Self::from_coefficients(space, n, vec![C64::new(0.0, 0.0); n * n * space.dim()])
    }

    /// `diag(x, ..., x)` at level `n`.
    pub fn diagonal(space: &'a OperatorSpace, n: usize, x: &ComplexMatrix) -> Result<Self> {
        let zero = ComplexMatrix::zeros(space.rows(), space.cols());
        let grid: Vec<Vec<ComplexMatrix>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { x.clone() } else { zero.clone() }).collect())
            .collect();
        space.amplify(&grid)
    }

    /// `x ⊗ e_ij`: `x` at zero-based position `(i, j)` of level `n`.
    pub fn elementary(
        space: &'a OperatorSpace,
        n: usize,
        i: usize,
        j: usize,
        x: &ComplexMatrix,
    ) -> Result<Self> {
        if i >= n || j >= n {
            return Err(LabError::InvalidIndex(format!("({i}, {j}) outside level {n}")));
        }
        let zero = ComplexMatrix::zeros(space.rows(), space.cols());
        let grid: Vec<Vec<ComplexMatrix>> = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| if (a, b) == (i, j) { x.clone() } else { zero.clone() })
                    .collect()
            })
            .collect();
        space.amplify(&grid)
    }

    pub fn space(&self) -> &'a OperatorSpace {
        self.space
    }

    /// Amplification level.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.coeffs
    }

    /// Coefficients of zero-based entry `(i, j)`.
    pub fn entry_coefficients(&self, i: usize, j: usize) -> &[C64] {
        let d = self.space.dim();
        let start = (i * self.n + j) * d;
        &self.coeffs[start..start + d]
    }

    pub fn entry(&self, i: usize, j: usize) -> ComplexMatrix {
        self.space.combine(self.entry_coefficients(i, j))
    }

    pub fn grid(&self) -> Vec<Vec<ComplexMatrix>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.entry(i, j)).collect())
            .collect()
    }

    pub fn realization(&self) -> &ComplexMatrix {
        &self.realization
    }

    /// Amplified norm: operator norm of the realization, cached.
    pub fn norm(&self) -> Result<f64> {
        if let Some(v) = self.norm.get() {
            return Ok(*v);
        }
        let v = self.realization.opnorm()?;
        Ok(*self.norm.get_or_init(|| v))
    }

    pub fn scaled(&self, z: C64) -> Result<Self> {
        Self::from_coefficients(self.space, self.n, self.coeffs.iter().map(|c| c * z).collect())
    }

    pub fn try_add(&self, other: &AmpElement<'_>) -> Result<Self> {
        self.check_compatible(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Self::from_coefficients(self.space, self.n, coeffs)
    }

    pub fn try_sub(&self, other: &AmpElement<'_>) -> Result<Self> {
        self.check_compatible(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Self::from_coefficients(self.space, self.n, coeffs)
    }

    fn check_compatible(&self, other: &AmpElement<'_>) -> Result<()> {
        if self.n != other.n {
            return Err(LabError::Level {
                expected: self.n,
                found: other.n,
            });
        }
        if self.space.dim() != other.space.dim() || self.space.shape() != other.space.shape() {
            return Err(LabError::Unsupported("elements belong to different spaces".into()));
        }
        Ok(())
    }

    /// Embeds into level `n + 1` by appending a zero row and column of entries.
    pub fn padded(&self) -> Result<Self> {
        let d = self.space.dim();
        let m = self.n + 1;
        let mut coeffs = vec![C64::new(0.0, 0.0); m * m * d];
        for i in 0..self.n {
            for j in 0..self.n {
                let dst = (i * m + j) * d;
                coeffs[dst..dst + d].copy_from_slice(self.entry_coefficients(i, j));
            }
        }
        Self::from_coefficients(self.space, m, coeffs)
    }

    /// Builds a new element of the same space and level from a per-entry map
    /// over coefficient slices, `f(i, j) -> coefficients of new entry (i, j)`.
    pub(crate) fn map_entries(&self, mut f: impl FnMut(usize, usize) -> Vec<C64>) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for i in 0..self.n {
            for j in 0..self.n {
                coeffs.extend(f(i, j));
            }
        }
        Self::from_coefficients(self.space, self.n, coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmatrix::c64;

    fn e(i: usize, j: usize) -> ComplexMatrix {
        ComplexMatrix::unit(2, 2, i, j)
    }

    fn upper() -> OperatorSpace {
        OperatorSpace::new("upper", 2, 2, vec![e(0, 0), e(0, 1), e(1, 1)]).unwrap()
    }

    fn symmetric() -> OperatorSpace {
        OperatorSpace::new("sym", 2, 2, vec![e(0, 0), e(1, 1), &e(0, 1) + &e(1, 0)]).unwrap()
    }

    #[test]
    fn make_space_examples() {
        assert_eq!(upper().dim(), 3);
        let full = OperatorSpace::new("m2", 2, 2, vec![e(0, 0), e(0, 1), e(1, 0), e(1, 1)]).unwrap();
        assert_eq!(full.dim(), 4);
        let err = OperatorSpace::new("dup", 2, 2, vec![e(0, 0), e(0, 0)]).unwrap_err();
        assert!(matches!(err, LabError::DegenerateBasis { index: 1 }));
        let err = OperatorSpace::new("shape", 2, 2, vec![ComplexMatrix::zeros(2, 3)]).unwrap_err();
        assert!(matches!(err, LabError::Shape { .. }));
        assert!(matches!(
            OperatorSpace::new("empty", 2, 2, vec![]),
            Err(LabError::EmptyBasis)
        ));
    }

    #[test]
    fn orthonormal_basis_is_orthonormal_and_spans() {
        let s = symmetric();
        let q = s.orthonormal_basis();
        for (a, qa) in q.iter().enumerate() {
            for (b, qb) in q.iter().enumerate() {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((qa.inner(qb) - c64(want, 0.0)).norm() < 1e-12);
            }
        }
        for b in s.basis() {
            assert!(crate::cmatrix::project_onto_span(b, q).unwrap().residual < 1e-10);
        }
        for qk in q {
            assert!(crate::cmatrix::project_onto_span(qk, s.basis()).unwrap().residual < 1e-10);
        }
    }

    #[test]
    fn member_examples() {
        let m = upper().member(&e(1, 0)).unwrap();
        assert!(!m.is_member);
        assert!((m.residual - 1.0).abs() < 1e-12);

        let m = upper().member(&(&e(0, 0) + &e(0, 1))).unwrap();
        assert!(m.is_member);
        assert!(m.residual < 1e-12);

        let m = symmetric().member(&e(0, 1)).unwrap();
        assert!(!m.is_member);
        assert!((m.residual - 0.5f64.sqrt()).abs() < 1e-12);

        assert!(matches!(
            upper().member(&ComplexMatrix::zeros(3, 2)),
            Err(LabError::Shape { .. })
        ));
    }

    #[test]
    fn amplify_examples() {
        let s = upper();
        let v = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[0.0, -1.0]]).unwrap();
        let one = s.amplify(&[vec![v.clone()]]).unwrap();
        assert!((one.realization() - &v).max_abs() < 1e-12);
        assert!((one.norm().unwrap() - v.opnorm().unwrap()).abs() < 1e-12);

        let dd = AmpElement::diagonal(&s, 2, &v).unwrap();
        assert!((dd.norm().unwrap() - v.opnorm().unwrap()).abs() < 1e-12);

        let x = &e(0, 1).scale_real(3.0) + &e(0, 0);
        let y = e(1, 1).scale_real(0.5);
        let z = ComplexMatrix::zeros(2, 2);
        let off = s.amplify(&[vec![z.clone(), x.clone()], vec![y.clone(), z.clone()]]).unwrap();
        let want = x.opnorm().unwrap().max(y.opnorm().unwrap());
        assert!((off.norm().unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn amplify_rejects_non_members_with_position() {
        let s = upper();
        let z = ComplexMatrix::zeros(2, 2);
        let err = s
            .amplify(&[vec![z.clone(), z.clone()], vec![z.clone(), e(1, 0)]])
            .unwrap_err();
        match err {
            LabError::NotMember { row, col, residual } => {
                assert_eq!((row, col), (1, 1));
                assert!((residual - 1.0).abs() < 1e-12);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn amp_norm_examples() {
        let full = OperatorSpace::new("m2", 2, 2, vec![e(0, 0), e(0, 1), e(1, 0), e(1, 1)]).unwrap();
        let u = ComplexMatrix::from_rows(&[
            vec![c64(0.0, 0.0), c64(0.0, 1.0)],
            vec![c64(1.0, 0.0), c64(0.0, 0.0)],
        ])
        .unwrap();
        let big_v = AmpElement::diagonal(&full, 3, &u).unwrap();
        assert!((big_v.norm().unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(AmpElement::zero(&full, 2).unwrap().norm().unwrap(), 0.0);
    }

    #[test]
    fn padding_preserves_entries_and_norm() {
        let s = upper();
        let x = &e(0, 0) + &e(0, 1).scale(c64(0.0, 2.0));
        let el = AmpElement::elementary(&s, 2, 0, 1, &x).unwrap();
        let p = el.padded().unwrap();
        assert_eq!(p.n(), 3);
        assert!((&p.entry(0, 1) - &x).max_abs() < 1e-12);
        assert!((p.norm().unwrap() - el.norm().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let basis = vec![
            ComplexMatrix::from_rows(&[
                vec![c64(0.1, -1e-300), c64(1.0 / 3.0, 0.0)],
                vec![c64(-0.0, 2.5e3), c64(0.0, 0.0)],
            ])
            .unwrap(),
            e(1, 1),
        ];
        let s = OperatorSpace::new("odd", 2, 2, basis).unwrap();
        let json = s.to_json().unwrap();
        let back = OperatorSpace::from_json(&json).unwrap();
        assert_eq!(back.to_file(), s.to_file());
        for (a, b) in back.basis().iter().zip(s.basis()) {
            assert_eq!(a.fingerprint(), b.fingerprint());
        }
        assert_eq!(back.to_json().unwrap(), json);
    }

    #[test]
    fn json_schema_field_names() {
        let json = r#"{"name":"col","ambient":{"rows":2,"cols":1},
            "basis":[[[[1,0]],[[0,0]]],[[[0,0]],[[1,0]]]]}"#;
        let s = OperatorSpace::from_json(json).unwrap();
        assert_eq!(s.shape(), (2, 1));
        assert_eq!(s.dim(), 2);
        assert!(OperatorSpace::from_json(r#"{"name":"x"}"#).is_err());
    }
}
