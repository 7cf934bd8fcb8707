//! Dense complex matrices.
//!
//! [`ComplexMatrix`] is the carrier for every computation in the crate. It wraps
//! a column-major `nalgebra` matrix, but all public indexing and serialization is
//! row-major: JSON payloads write a matrix as a list of rows, each row a list of
//! `[re, im]` pairs.
//!
//! Norms follow one convention throughout: `opnorm` is the largest singular
//! value, `frobenius` is the Hilbert-Schmidt norm, and the inner product used
//! for all least-squares work is `<a, b> = trace(b* a)`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{LabError, Result};

pub type C64 = Complex64;

/// Default absolute tolerance for equality residuals on unit-scale data.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Relative singular-value threshold below which a basis is rank deficient.
pub const RANK_RTOL: f64 = 1e-10;

const SVD_MAX_ITERS: usize = 10_000;

/// Tolerances shared by spaces, contexts and checkers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Absolute bound on equality residuals.
    pub equality: f64,
    /// Absolute bound on subspace membership residuals.
    pub membership: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            equality: DEFAULT_TOL,
            membership: DEFAULT_TOL,
        }
    }
}

impl Tolerances {
    pub fn uniform(tol: f64) -> Self {
        Self {
            equality: tol,
            membership: tol,
        }
    }
}

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// A dense complex matrix with finite entries and positive dimensions.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    data: DMatrix<C64>,
}

impl ComplexMatrix {
    /// Zero matrix. Panics if either dimension is zero.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            data: DMatrix::zeros(rows, cols),
        }
    }

    pub fn identity(n: usize) -> Self {
        assert!(n > 0, "matrix dimensions must be positive");
        Self {
            data: DMatrix::identity(n, n),
        }
    }

    /// Matrix unit `E_ij` (zero-based indices).
    pub fn unit(rows: usize, cols: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        m.data[(i, j)] = C64::new(1.0, 0.0);
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            data: DMatrix::from_fn(rows, cols, f),
        }
    }

    /// Builds a matrix from row-major rows, rejecting ragged input and non-finite entries.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 {
            return Err(LabError::RaggedGrid("matrix must have at least one row and column".into()));
        }
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, row)| row.len() != c) {
            return Err(LabError::RaggedGrid(format!(
                "row {i} has {} entries, expected {c}",
                row.len()
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            for (j, z) in row.iter().enumerate() {
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(LabError::NonFinite {
                        row: i,
                        col: j,
                        value: format!("{z}"),
                    });
                }
            }
        }
        Ok(Self {
            data: DMatrix::from_fn(r, c, |i, j| rows[i][j]),
        })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|row| row.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    /// Reshapes a row-major vector into a `rows x cols` matrix.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[C64]) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count must equal rows * cols");
        Self::from_fn(rows, cols, |i, j| entries[i * cols + j])
    }

    pub(crate) fn from_dmatrix(data: DMatrix<C64>) -> Self {
        Self { data }
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.data.shape()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, z: C64) {
        self.data[(i, j)] = z;
    }

    /// Entries in row-major order.
    pub fn row_major(&self) -> Vec<C64> {
        let (r, c) = self.shape();
        let mut out = Vec::with_capacity(r * c);
        for i in 0..r {
            for j in 0..c {
                out.push(self.data[(i, j)]);
            }
        }
        out
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.data[(i, j)]).collect())
            .collect()
    }

    pub(crate) fn vectorize(&self) -> DVector<C64> {
        DVector::from_vec(self.row_major())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols() != other.rows() {
            return Err(shape_error("matmul", self, other));
        }
        Ok(Self {
            data: &self.data * &other.data,
        })
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        Self {
            data: self.data.adjoint(),
        }
    }

    pub fn conj(&self) -> ComplexMatrix {
        Self {
            data: self.data.map(|z| z.conj()),
        }
    }

    pub fn scale(&self, z: C64) -> ComplexMatrix {
        Self {
            data: self.data.map(|w| w * z),
        }
    }

    pub fn scale_real(&self, s: f64) -> ComplexMatrix {
        Self {
            data: self.data.map(|w| w * s),
        }
    }

    pub fn try_add(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.shape() != other.shape() {
            return Err(shape_error("add", self, other));
        }
        Ok(Self {
            data: &self.data + &other.data,
        })
    }

    pub fn try_sub(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.shape() != other.shape() {
            return Err(shape_error("sub", self, other));
        }
        Ok(Self {
            data: &self.data - &other.data,
        })
    }

    /// `self += z * other`; shapes must agree.
    pub fn axpy(&mut self, z: C64, other: &ComplexMatrix) {
        assert_eq!(self.shape(), other.shape(), "axpy shape mismatch");
        self.data.zip_apply(&other.data, |a, b| *a += z * b);
    }

    /// Frobenius inner product `trace(other* self)`.
    pub fn inner(&self, other: &ComplexMatrix) -> C64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> C64 {
        self.data.diagonal().iter().sum()
    }

    /// Singular values in non-increasing order.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        let svd = SVD::try_new(self.data.clone(), false, false, f64::EPSILON, SVD_MAX_ITERS)
            .ok_or_else(|| LabError::Numerical {
                fingerprint: self.fingerprint(),
            })?;
        let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        Ok(s)
    }

    /// Operator (spectral) norm: the largest singular value.
    pub fn opnorm(&self) -> Result<f64> {
        if self.data.iter().all(|z| *z == C64::new(0.0, 0.0)) {
            return Ok(0.0);
        }
        Ok(self.singular_values()?[0])
    }

    /// Zero-based block `(bi, bj)` of size `p x q`.
    pub fn block(&self, bi: usize, bj: usize, p: usize, q: usize) -> ComplexMatrix {
        Self {
            data: self.data.view((bi * p, bj * q), (p, q)).into_owned(),
        }
    }

    /// Stable 64-bit FNV-1a hash of shape and entry bits, as 16 hex digits.
    pub fn fingerprint(&self) -> String {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h = OFFSET;
        let mut feed = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(PRIME);
            }
        };
        feed(self.rows() as u64);
        feed(self.cols() as u64);
        for z in self.row_major() {
            feed(z.re.to_bits());
            feed(z.im.to_bits());
        }
        format!("{h:016x}")
    }
}

fn shape_error(op: &'static str, a: &ComplexMatrix, b: &ComplexMatrix) -> LabError {
    LabError::Shape {
        op,
        left_rows: a.rows(),
        left_cols: a.cols(),
        right_rows: b.rows(),
        right_cols: b.cols(),
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix{:?}[", self.shape())?;
        for (i, row) in self.to_rows().iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            for (j, z) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{z}")?;
            }
        }
        write!(f, "]")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_add(rhs).expect("matrix addition shape mismatch")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_sub(rhs).expect("matrix subtraction shape mismatch")
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product shape mismatch")
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = self
            .to_rows()
            .into_iter()
            .map(|row| row.into_iter().map(|z| [z.re, z.im]).collect())
            .collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(deserializer)?;
        let rows: Vec<Vec<C64>> = rows
            .into_iter()
            .map(|row| row.into_iter().map(|[re, im]| C64::new(re, im)).collect())
            .collect();
        ComplexMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// Least-squares projection of a matrix onto the span of a basis.
#[derive(Debug, Clone)]
pub struct Projection {
    /// Coefficients against the supplied basis.
    pub coefficients: Vec<C64>,
    /// Frobenius distance from the input to the span.
    pub residual: f64,
}

fn stack_columns(basis: &[ComplexMatrix]) -> DMatrix<C64> {
    let (p, q) = basis[0].shape();
    let mut m = DMatrix::zeros(p * q, basis.len());
    for (k, b) in basis.iter().enumerate() {
        m.set_column(k, &b.vectorize());
    }
    m
}

fn numerical_rank(m: &DMatrix<C64>) -> Result<usize> {
    let svd = SVD::try_new(m.clone(), false, false, f64::EPSILON, SVD_MAX_ITERS).ok_or_else(|| {
        LabError::Numerical {
            fingerprint: ComplexMatrix::from_dmatrix(m.clone()).fingerprint(),
        }
    })?;
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return Ok(0);
    }
    Ok(svd
        .singular_values
        .iter()
        .filter(|&&s| s > RANK_RTOL * smax)
        .count())
}

/// Checks that `basis` is nonempty, shape-consistent and linearly independent.
///
/// On rank deficiency the error names the first element that depends on its
/// predecessors.
pub fn check_basis(basis: &[ComplexMatrix], rows: usize, cols: usize) -> Result<()> {
    if basis.is_empty() {
        return Err(LabError::EmptyBasis);
    }
    for b in basis {
        if b.shape() != (rows, cols) {
            return Err(LabError::Shape {
                op: "basis",
                left_rows: rows,
                left_cols: cols,
                right_rows: b.rows(),
                right_cols: b.cols(),
            });
        }
    }
    if basis.len() > rows * cols {
        return Err(LabError::DegenerateBasis { index: rows * cols });
    }
    let stacked = stack_columns(basis);
    if numerical_rank(&stacked)? == basis.len() {
        return Ok(());
    }
    for k in 0..basis.len() {
        let prefix = stacked.columns(0, k + 1).into_owned();
        if numerical_rank(&prefix)? < k + 1 {
            return Err(LabError::DegenerateBasis { index: k });
        }
    }
    Err(LabError::DegenerateBasis {
        index: basis.len() - 1,
    })
}

/// Least-squares coefficients of `x` against `basis` under the Frobenius inner product.
pub fn project_onto_span(x: &ComplexMatrix, basis: &[ComplexMatrix]) -> Result<Projection> {
    check_basis(basis, x.rows(), x.cols())?;
    let m = stack_columns(basis);
    let svd = SVD::try_new(m.clone(), true, true, f64::EPSILON, SVD_MAX_ITERS).ok_or_else(|| {
        LabError::Numerical {
            fingerprint: x.fingerprint(),
        }
    })?;
    let target = x.vectorize();
    let coeffs = svd
        .solve(&target, 0.0)
        .map_err(|_| LabError::Numerical {
            fingerprint: x.fingerprint(),
        })?;
    let fitted = &m * &coeffs;
    let residual = (&target - fitted).norm();
    Ok(Projection {
        coefficients: coeffs.iter().copied().collect(),
        residual,
    })
}

/// Assembles an `n_r x n_c` grid of equally shaped blocks into one matrix,
/// with `grid[i][j]` placed at block position `(i, j)`.
pub fn block_embed(grid: &[Vec<ComplexMatrix>]) -> Result<ComplexMatrix> {
    let nr = grid.len();
    let nc = grid.first().map_or(0, Vec::len);
    if nr == 0 || nc == 0 {
        return Err(LabError::RaggedGrid("block grid is empty".into()));
    }
    if let Some((i, row)) = grid.iter().enumerate().find(|(_, row)| row.len() != nc) {
        return Err(LabError::RaggedGrid(format!(
            "grid row {i} has {} blocks, expected {nc}",
            row.len()
        )));
    }
    let (p, q) = grid[0][0].shape();
    for (i, row) in grid.iter().enumerate() {
        for (j, b) in row.iter().enumerate() {
            if b.shape() != (p, q) {
                return Err(LabError::RaggedGrid(format!(
                    "block ({i}, {j}) is {}x{}, expected {p}x{q}",
                    b.rows(),
                    b.cols()
                )));
            }
        }
    }
    let mut out = DMatrix::zeros(nr * p, nc * q);
    for (i, row) in grid.iter().enumerate() {
        for (j, b) in row.iter().enumerate() {
            out.view_mut((i * p, j * q), (p, q)).copy_from(&b.data);
        }
    }
    Ok(ComplexMatrix { data: out })
}

/// Block-diagonal matrix with `blocks` down the diagonal.
pub fn block_diag(blocks: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let first = blocks
        .first()
        .ok_or_else(|| LabError::RaggedGrid("no diagonal blocks".into()))?;
    let (p, q) = first.shape();
    let n = blocks.len();
    let grid: Vec<Vec<ComplexMatrix>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        blocks[i].clone()
                    } else {
                        ComplexMatrix::zeros(p, q)
                    }
                })
                .collect()
        })
        .collect();
    block_embed(&grid)
}

/// The 2x2 block matrix `[a, b; c, d]`.
pub fn blocks2(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    d: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    block_embed(&[vec![a.clone(), b.clone()], vec![c.clone(), d.clone()]])
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix {
        data: a.data.kronecker(&b.data),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(i: usize, j: usize) -> ComplexMatrix {
        ComplexMatrix::unit(2, 2, i, j)
    }

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        (a - b).max_abs() <= tol
    }

    #[test]
    fn matmul_examples() {
        let x = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        assert_eq!(ComplexMatrix::identity(2).matmul(&x).unwrap(), x);
        assert_eq!(e(0, 1).matmul(&e(1, 0)).unwrap(), e(0, 0));
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        let b = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[1.0, 1.0]]).unwrap();
        let want = ComplexMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 1.0]]).unwrap();
        assert_eq!(a.matmul(&b).unwrap(), want);
    }

    #[test]
    fn matmul_shape_error_names_both_shapes() {
        let err = ComplexMatrix::zeros(2, 3)
            .matmul(&ComplexMatrix::zeros(2, 3))
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("2x3 vs 2x3"), "{msg}");
    }

    #[test]
    fn adjoint_examples() {
        assert_eq!(e(0, 1).adjoint(), e(1, 0));
        let mut m = ComplexMatrix::zeros(2, 2);
        m.set(0, 0, c64(0.0, 1.0));
        let mut want = ComplexMatrix::zeros(2, 2);
        want.set(0, 0, c64(0.0, -1.0));
        assert_eq!(m.adjoint(), want);
        let h = ComplexMatrix::from_rows(&[
            vec![c64(2.0, 0.0), c64(1.0, -1.0)],
            vec![c64(1.0, 1.0), c64(-3.0, 0.0)],
        ])
        .unwrap();
        assert_eq!(h.adjoint(), h);
        assert_eq!(h.adjoint().adjoint(), h);
    }

    #[test]
    fn opnorm_examples() {
        assert!((e(0, 1).opnorm().unwrap() - 1.0).abs() < 1e-14);
        assert!((ComplexMatrix::identity(5).opnorm().unwrap() - 1.0).abs() < 1e-14);
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((a.opnorm().unwrap() - golden).abs() < 1e-12 * golden);
        assert_eq!(ComplexMatrix::zeros(3, 2).opnorm().unwrap(), 0.0);
    }

    #[test]
    fn projection_examples() {
        let p = project_onto_span(&e(0, 0), &[e(0, 0), e(1, 1)]).unwrap();
        assert!((p.coefficients[0] - c64(1.0, 0.0)).norm() < 1e-14);
        assert!(p.coefficients[1].norm() < 1e-14);
        assert!(p.residual < 1e-14);

        let s = (&e(0, 1) + &e(1, 0)).scale_real(1.0 / 2f64.sqrt());
        let p = project_onto_span(&e(0, 1), &[e(0, 0), e(1, 1), s]).unwrap();
        assert!((p.residual - 0.5f64.sqrt()).abs() < 1e-12);

        let p = project_onto_span(&ComplexMatrix::zeros(2, 2), &[e(0, 1), e(1, 0)]).unwrap();
        assert!(p.coefficients.iter().all(|z| z.norm() == 0.0));
        assert_eq!(p.residual, 0.0);
    }

    #[test]
    fn degenerate_basis_names_dependent_index() {
        let err = project_onto_span(&e(0, 0), &[e(0, 0), e(0, 1), &e(0, 0) + &e(0, 1)]).unwrap_err();
        assert!(matches!(err, LabError::DegenerateBasis { index: 2 }), "{err}");
        let err = check_basis(&[e(0, 0), e(0, 0)], 2, 2).unwrap_err();
        assert!(matches!(err, LabError::DegenerateBasis { index: 1 }));
    }

    #[test]
    fn block_embed_examples() {
        let x = ComplexMatrix::from_real_rows(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]).unwrap();
        assert_eq!(block_embed(&[vec![x.clone()]]).unwrap(), x);
        let z = ComplexMatrix::zeros(2, 3);
        let m = block_embed(&[vec![z.clone(), x.clone()], vec![z.clone(), z.clone()]]).unwrap();
        assert_eq!(m.shape(), (4, 6));
        assert_eq!(m.block(0, 1, 2, 3), x);
        assert_eq!(m.block(1, 0, 2, 3), z);
        assert_eq!(m.block(0, 0, 2, 3), z);

        let y = ComplexMatrix::from_real_rows(&[&[0.0, 7.0, 0.0], &[0.5, 0.0, 0.0]]).unwrap();
        let d = block_diag(&[x.clone(), y.clone()]).unwrap();
        let want = x.opnorm().unwrap().max(y.opnorm().unwrap());
        assert!((d.opnorm().unwrap() - want).abs() < 1e-12 * want);
    }

    #[test]
    fn ragged_grid_is_rejected() {
        let a = ComplexMatrix::zeros(2, 2);
        let b = ComplexMatrix::zeros(2, 3);
        assert!(matches!(
            block_embed(&[vec![a.clone(), b]]),
            Err(LabError::RaggedGrid(_))
        ));
        assert!(matches!(
            block_embed(&[vec![a.clone(), a.clone()], vec![a]]),
            Err(LabError::RaggedGrid(_))
        ));
    }

    #[test]
    fn non_finite_entries_are_rejected() {
        let err = ComplexMatrix::from_rows(&[vec![c64(f64::NAN, 0.0)]]).unwrap_err();
        assert!(matches!(err, LabError::NonFinite { row: 0, col: 0, .. }));
    }

    #[test]
    fn json_is_row_major_re_im_pairs() {
        let m = ComplexMatrix::from_rows(&[vec![c64(1.0, 2.0), c64(3.0, -4.0)]]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, "[[[1.0,2.0],[3.0,-4.0]]]");
        let back: ComplexMatrix = serde_json::from_str(&s).unwrap();
        assert!(close(&back, &m, 0.0));
    }

    #[test]
    fn fingerprint_is_shape_and_bit_sensitive() {
        let a = ComplexMatrix::zeros(2, 2);
        let b = ComplexMatrix::zeros(1, 4);
        assert_ne!(a.fingerprint(), b.fingerprint());
        let mut c = a.clone();
        c.set(1, 1, c64(-0.0, 0.0));
        assert_ne!(a.fingerprint(), c.fingerprint());
        assert_eq!(a.fingerprint(), ComplexMatrix::zeros(2, 2).fingerprint());
    }
}
