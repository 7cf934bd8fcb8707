//! Search and classification.
//!
//! - [`find_unit`] looks for an element `v` of the unit ball with `{x, v, v} = x`
//!   on the whole space.
//! - [`tro_closure`] scans every ordered basis triple for closure under `a b* c`.
//! - [`adjoint_intersection`] extracts `A ∩ A*` from principal angles.
//! - [`cartan`] builds finite-dimensional Cartan factors of types 1-4.

use nalgebra::{DMatrix, SVD};
use serde::{Deserialize, Serialize};

use crate::cmatrix::{kron, ComplexMatrix, C64};
use crate::error::{LabError, Result};
use crate::opspace::OperatorSpace;
use crate::product::cond_i_residual;
use crate::sample::{gaussian_vec, substream};
use crate::triple::triple;

/// Central-difference step for numerical gradients.
pub const FD_STEP: f64 = 1e-5;

/// Where a unit candidate came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    User,
    Search { seed: u64, restarts: usize, steps: usize },
}

/// A candidate for the distinguished element `v`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnitCandidate {
    pub v: ComplexMatrix,
    pub norm: f64,
    /// Largest operator-norm residual `‖{b, v, v} - b‖` over the declared basis.
    pub cond_i_residual: f64,
    /// Search objective `sum_k ‖{q_k, v, v} - q_k‖_F²` over the orthonormal basis.
    pub objective: f64,
    pub provenance: Provenance,
}

impl UnitCandidate {
    pub fn from_user(space: &OperatorSpace, v: ComplexMatrix) -> Result<Self> {
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
            norm: v.opnorm()?,
            objective: unit_objective(space, &v)?,
            cond_i_residual,
            v,
            provenance: Provenance::User,
        })
    }
}

/// Result of [`find_unit`].
#[derive(Debug, Clone)]
pub struct UnitSearch {
    pub candidate: UnitCandidate,
    /// Objective after each accepted iterate of the winning restart.
    pub trace: Vec<f64>,
}

/// `sum_k ‖{q_k, v, v} - q_k‖_F²` over the orthonormal basis `q_k`.
pub fn unit_objective(space: &OperatorSpace, v: &ComplexMatrix) -> Result<f64> {
    Ok(unit_residuals(space, v)?.iter().map(|r| r * r).sum())
}

/// Real and imaginary parts of every entry of `{q_k, v, v} - q_k`.
fn unit_residuals(space: &OperatorSpace, v: &ComplexMatrix) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(2 * space.dim() * space.rows() * space.cols());
    for q in space.orthonormal_basis() {
        let r = &triple(q, v, v)? - q;
        out.extend(r.row_major().iter().flat_map(|z| [z.re, z.im]));
    }
    Ok(out)
}

fn coeffs_from_params(theta: &[f64]) -> Vec<C64> {
    theta.chunks(2).map(|c| C64::new(c[0], c[1])).collect()
}

fn params_from_coeffs(c: &[C64]) -> Vec<f64> {
    c.iter().flat_map(|z| [z.re, z.im]).collect()
}

/// Central-difference gradient of `f` at `theta`.
pub(crate) fn numerical_gradient(
    f: &mut impl FnMut(&[f64]) -> Result<f64>,
    theta: &[f64],
    h: f64,
) -> Result<Vec<f64>> {
    let mut probe = theta.to_vec();
    let mut grad = Vec::with_capacity(theta.len());
    for i in 0..theta.len() {
        probe[i] = theta[i] + h;
        let up = f(&probe)?;
        probe[i] = theta[i] - h;
        let down = f(&probe)?;
        probe[i] = theta[i];
        grad.push((up - down) / (2.0 * h));
    }
    Ok(grad)
}

/// Central-difference Jacobian of a vector-valued `f`, one column per parameter.
fn numerical_jacobian(
    f: &impl Fn(&[f64]) -> Result<Vec<f64>>,
    theta: &[f64],
    h: f64,
) -> Result<DMatrix<f64>> {
    let mut probe = theta.to_vec();
    let mut columns = Vec::with_capacity(theta.len());
    for i in 0..theta.len() {
        probe[i] = theta[i] + h;
        let up = f(&probe)?;
        probe[i] = theta[i] - h;
        let down = f(&probe)?;
        probe[i] = theta[i];
        columns.push(nalgebra::DVector::from_iterator(
            up.len(),
            up.iter().zip(&down).map(|(u, d)| (u - d) / (2.0 * h)),
        ));
    }
    Ok(DMatrix::from_columns(&columns))
}

/// Minimizes the unit objective over the operator-norm unit ball of the space.
///
/// Each restart starts from complex Gaussian coefficients scaled to norm one.
/// Steps are damped Gauss-Newton steps on the residual vector, built from a
/// central-difference Jacobian, followed by projection onto the ball by
/// rescaling. A step is accepted only if it lowers the objective, otherwise the
/// damping grows, so each restart's objective trace is non-increasing.
pub fn find_unit(space: &OperatorSpace, restarts: usize, steps: usize, seed: u64) -> Result<UnitSearch> {
    if restarts == 0 {
        return Err(LabError::Unsupported("find_unit needs at least one restart".into()));
    }
    let d = space.dim();
    if d == 0 {
        return Err(LabError::EmptyBasis);
    }
    let project = |theta: Vec<f64>| -> Result<Vec<f64>> {
        let norm = space.combine(&coeffs_from_params(&theta)).opnorm()?;
        if norm > 1.0 {
            Ok(theta.iter().map(|t| t / norm).collect())
        } else {
            Ok(theta)
        }
    };
    let residuals = |theta: &[f64]| unit_residuals(space, &space.combine(&coeffs_from_params(theta)));
    let sq = |r: &[f64]| r.iter().map(|x| x * x).sum::<f64>();

    let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    for r in 0..restarts {
        let mut rng = substream(seed, r as u64);
        let start = space.combine(&gaussian_vec(&mut rng, d));
        let norm = start.opnorm()?;
        let c0 = space.coordinates(&start.scale_real(1.0 / norm.max(1e-300)))?.0;
        let mut theta = params_from_coeffs(&c0);
        let mut res = residuals(&theta)?;
        let mut value = sq(&res);
        let mut trace = vec![value];
        let mut damping = 1e-3;
        for _ in 0..steps {
            if value == 0.0 {
                break;
            }
            let jac = numerical_jacobian(&residuals, &theta, FD_STEP)?;
            let rvec = nalgebra::DVector::from_column_slice(&res);
            let grad = jac.transpose() * &rvec;
            if grad.norm() < 1e-15 {
                break;
            }
            let normal = jac.transpose() * &jac;
            let mut accepted = false;
            while damping < 1e12 {
                let mut system = normal.clone();
                for i in 0..system.nrows() {
                    system[(i, i)] += damping;
                }
                let Some(chol) = system.cholesky() else {
                    damping *= 4.0;
                    continue;
                };
                let delta = chol.solve(&grad);
                let trial: Vec<f64> = theta.iter().zip(delta.iter()).map(|(t, s)| t - s).collect();
                let trial = project(trial)?;
                let trial_res = residuals(&trial)?;
                let trial_value = sq(&trial_res);
                if trial_value < value {
                    theta = trial;
                    res = trial_res;
                    value = trial_value;
                    trace.push(value);
                    damping = (damping / 3.0).max(1e-15);
                    accepted = true;
                    break;
                }
                damping *= 4.0;
            }
            if !accepted {
                break;
            }
        }
        let better = best.as_ref().is_none_or(|(b, _, _)| value < *b);
        if better {
            best = Some((value, theta, trace));
        }
    }
    let (objective_value, theta, trace) = best.expect("at least one restart");
    let v = space.combine(&coeffs_from_params(&theta));
    let (cond_i, _) = cond_i_residual(space, &v)?;
    Ok(UnitSearch {
        candidate: UnitCandidate {
            norm: v.opnorm()?,
            v,
            cond_i_residual: cond_i,
            objective: objective_value,
            provenance: Provenance::Search {
                seed,
                restarts,
                steps,
            },
        },
        trace,
    })
}

/// Outcome of the TRO closure scan over ordered basis triples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosureReport {
    pub max_triple_residual: f64,
    /// Zero-based basis indices `(i, j, k)` of the worst product `b_i b_j* b_k`.
    pub worst: (usize, usize, usize),
    pub is_tro: bool,
}

/// Distance of `b_i b_j* b_k` to the space, maximized over all `d³` ordered
/// triples of the declared basis.
pub fn tro_closure(space: &OperatorSpace) -> Result<ClosureReport> {
    let basis = space.basis();
    let adjoints: Vec<ComplexMatrix> = basis.iter().map(ComplexMatrix::adjoint).collect();
    let mut max = 0.0;
    let mut worst = (0, 0, 0);
    for (i, bi) in basis.iter().enumerate() {
        for (j, bj) in adjoints.iter().enumerate() {
            let left = bi.matmul(bj)?;
            for (k, bk) in basis.iter().enumerate() {
                let (_, residual) = space.coordinates(&left.matmul(bk)?)?;
                if residual > max {
                    max = residual;
                    worst = (i, j, k);
                }
            }
        }
    }
    Ok(ClosureReport {
        max_triple_residual: max,
        worst,
        is_tro: max <= space.tolerances().equality,
    })
}

/// Cosine threshold above which a principal vector lies in both subspaces.
const INTERSECTION_COS: f64 = 1.0 - 1e-8;

/// `A ∩ A*` for a square ambient space.
pub fn adjoint_intersection(space: &OperatorSpace) -> Result<OperatorSpace> {
    if !space.is_square() {
        return Err(LabError::NonSquare {
            rows: space.rows(),
            cols: space.cols(),
        });
    }
    let (p, q) = space.shape();
    let name = format!("{} ∩ adjoint", space.name());
    let onb = space.orthonormal_basis();
    let d = onb.len();
    if d == 0 {
        return Ok(OperatorSpace::from_orthonormal(name, p, q, Vec::new()));
    }
    // <a_l*, a_k> for orthonormal a_k; the adjoints are orthonormal in A*.
    let adj: Vec<ComplexMatrix> = onb.iter().map(ComplexMatrix::adjoint).collect();
    let cross = DMatrix::from_fn(d, d, |k, l| adj[l].inner(&onb[k]));
    let svd = SVD::try_new(cross, true, false, f64::EPSILON, 10_000).ok_or_else(|| {
        LabError::Numerical {
            fingerprint: onb[0].fingerprint(),
        }
    })?;
    let u = svd.u.as_ref().expect("left singular vectors requested");
    let mut family = Vec::new();
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s >= INTERSECTION_COS {
            let coeffs: Vec<C64> = u.column(i).iter().copied().collect();
            family.push(space.combine(&coeffs));
        }
    }
    Ok(OperatorSpace::from_orthonormal(name, p, q, family))
}

/// The four families of finite-dimensional Cartan factors realized as matrix spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum CartanKind {
    /// Type 1: all `p x q` matrices.
    Rectangular { p: usize, q: usize },
    /// Type 2: antisymmetric `n x n` matrices.
    Antisymmetric { n: usize },
    /// Type 3: symmetric `n x n` matrices.
    Symmetric { n: usize },
    /// Type 4: span of the identity and `n` anticommuting self-adjoint unitaries.
    Spin { n: usize },
}

/// Largest number of spin generators built.
pub const MAX_SPIN_GENERATORS: usize = 6;

fn pauli() -> (ComplexMatrix, ComplexMatrix, ComplexMatrix) {
    let o = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let x = ComplexMatrix::from_row_major(2, 2, &[o, one, one, o]);
    let y = ComplexMatrix::from_row_major(2, 2, &[o, -i, i, o]);
    let z = ComplexMatrix::from_row_major(2, 2, &[one, o, o, -one]);
    (x, y, z)
}

/// `n` pairwise anticommuting self-adjoint unitaries on `(C²)^{⊗k}`, `k = ceil(n/2)`,
/// in Jordan-Wigner form: generator `2j` is `Z^{⊗j} ⊗ X ⊗ I...` and
/// generator `2j + 1` is `Z^{⊗j} ⊗ Y ⊗ I...`.
pub fn spin_generators(n: usize) -> Result<Vec<ComplexMatrix>> {
    if n == 0 || n > MAX_SPIN_GENERATORS {
        return Err(LabError::Unsupported(format!(
            "spin factors are built for 1..={MAX_SPIN_GENERATORS} generators, got {n}"
        )));
    }
    let (x, y, z) = pauli();
    let id = ComplexMatrix::identity(2);
    let k = n.div_ceil(2);
    let mut out = Vec::with_capacity(n);
    for g in 0..n {
        let site = g / 2;
        let local = if g % 2 == 0 { &x } else { &y };
        let mut m: Option<ComplexMatrix> = None;
        for s in 0..k {
            let factor = match s.cmp(&site) {
                std::cmp::Ordering::Less => &z,
                std::cmp::Ordering::Equal => local,
                std::cmp::Ordering::Greater => &id,
            };
            m = Some(match m {
                None => factor.clone(),
                Some(acc) => kron(&acc, factor),
            });
        }
        out.push(m.expect("at least one site"));
    }
    Ok(out)
}

/// Builds a Cartan factor of the given kind.
pub fn cartan(kind: CartanKind) -> Result<OperatorSpace> {
    match kind {
        CartanKind::Rectangular { p, q } => {
            if p == 0 || q == 0 {
                return Err(LabError::Unsupported("type 1 needs p, q >= 1".into()));
            }
            let basis = (0..p)
                .flat_map(|i| (0..q).map(move |j| ComplexMatrix::unit(p, q, i, j)))
                .collect();
            OperatorSpace::new(format!("cartan-1-{p}x{q}"), p, q, basis)
        }
        CartanKind::Antisymmetric { n } => {
            if n < 2 {
                return Err(LabError::Unsupported("type 2 needs n >= 2".into()));
            }
            let mut basis = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    basis.push(&ComplexMatrix::unit(n, n, i, j) - &ComplexMatrix::unit(n, n, j, i));
                }
            }
            OperatorSpace::new(format!("cartan-2-{n}"), n, n, basis)
        }
        CartanKind::Symmetric { n } => {
            if n < 1 {
                return Err(LabError::Unsupported("type 3 needs n >= 1".into()));
            }
            let mut basis: Vec<ComplexMatrix> = (0..n).map(|i| ComplexMatrix::unit(n, n, i, i)).collect();
            for i in 0..n {
                for j in i + 1..n {
                    basis.push(&ComplexMatrix::unit(n, n, i, j) + &ComplexMatrix::unit(n, n, j, i));
                }
            }
            OperatorSpace::new(format!("cartan-3-{n}"), n, n, basis)
        }
        CartanKind::Spin { n } => {
            if n < 2 {
                return Err(LabError::Unsupported("type 4 needs at least 2 generators".into()));
            }
            let gens = spin_generators(n)?;
            let dim = gens[0].rows();
            let mut basis = vec![ComplexMatrix::identity(dim)];
            basis.extend(gens);
            OperatorSpace::new(format!("cartan-4-{n}"), dim, dim, basis)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmatrix::project_onto_span;

    fn e(i: usize, j: usize) -> ComplexMatrix {
        ComplexMatrix::unit(2, 2, i, j)
    }

    fn column_space() -> OperatorSpace {
        cartan(CartanKind::Rectangular { p: 2, q: 1 }).unwrap()
    }

    fn upper(n: usize) -> OperatorSpace {
        let mut basis = Vec::new();
        for i in 0..n {
            for j in i..n {
                basis.push(ComplexMatrix::unit(n, n, i, j));
            }
        }
        OperatorSpace::new("upper", n, n, basis).unwrap()
    }

    /// Brute-force closure residual using normal equations on the declared basis.
    fn closure_oracle(space: &OperatorSpace) -> f64 {
        let b = space.basis();
        let mut max: f64 = 0.0;
        for x in b {
            for y in b {
                for z in b {
                    let t = &(x * &y.adjoint()) * z;
                    max = max.max(project_onto_span(&t, b).unwrap().residual);
                }
            }
        }
        max
    }

    #[test]
    fn find_unit_on_full_matrices_returns_a_unitary() {
        let m2 = cartan(CartanKind::Rectangular { p: 2, q: 2 }).unwrap();
        let s = find_unit(&m2, 4, 400, 3).unwrap();
        let v = &s.candidate.v;
        assert!(s.candidate.cond_i_residual <= 1e-8, "{}", s.candidate.cond_i_residual);
        let i2 = ComplexMatrix::identity(2);
        assert!((&(&v.adjoint() * v) - &i2).max_abs() <= 1e-6);
        assert!((&(v * &v.adjoint()) - &i2).max_abs() <= 1e-6);
    }

    #[test]
    fn find_unit_on_upper_triangular() {
        let s = find_unit(&upper(2), 4, 400, 5).unwrap();
        assert!(s.candidate.cond_i_residual <= 1e-8, "{}", s.candidate.cond_i_residual);
        // v = I attains zero
        assert_eq!(unit_objective(&upper(2), &ComplexMatrix::identity(2)).unwrap(), 0.0);
    }

    #[test]
    fn find_unit_on_column_space_matches_analytic_minimum() {
        // f(t) = (t²-1)² + (t²/2-1)² for ‖v‖ = t; minimum on [0,1] is 1/4 at t = 1.
        let analytic = |t: f64| (t * t - 1.0).powi(2) + (t * t / 2.0 - 1.0).powi(2);
        let grid_min = (0..=10_000)
            .map(|k| analytic(k as f64 / 10_000.0))
            .fold(f64::INFINITY, f64::min);
        assert!((grid_min - 0.25).abs() < 1e-12);
        let s = find_unit(&column_space(), 4, 200, 9).unwrap();
        assert!((s.candidate.objective - grid_min).abs() <= 1e-6, "{}", s.candidate.objective);
        assert!((s.candidate.norm - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn find_unit_trace_is_monotone() {
        let s = find_unit(&upper(3), 2, 100, 1).unwrap();
        assert!(s.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn tro_closure_examples() {
        let full = cartan(CartanKind::Rectangular { p: 2, q: 3 }).unwrap();
        let r = tro_closure(&full).unwrap();
        assert!(r.is_tro && r.max_triple_residual <= 1e-12);

        let sym = cartan(CartanKind::Symmetric { n: 2 }).unwrap();
        let r = tro_closure(&sym).unwrap();
        assert!(!r.is_tro);
        assert!((r.max_triple_residual - 0.5f64.sqrt()).abs() <= 1e-10);
        assert!((r.max_triple_residual - closure_oracle(&sym)).abs() <= 1e-10);

        let up = upper(2);
        let r = tro_closure(&up).unwrap();
        assert!(!r.is_tro);
        assert!((r.max_triple_residual - closure_oracle(&up)).abs() <= 1e-10);
        // E11 E12* E12 = 0 but E12 E12* E11 = E11 stays; E22 E12* E11 = E21 is at distance 1
        assert!((r.max_triple_residual - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn adjoint_intersection_examples() {
        let diag = adjoint_intersection(&upper(2)).unwrap();
        assert_eq!(diag.dim(), 2);
        for q in diag.orthonormal_basis() {
            assert!(q.get(0, 1).norm() < 1e-12 && q.get(1, 0).norm() < 1e-12);
        }
        let m2 = cartan(CartanKind::Rectangular { p: 2, q: 2 }).unwrap();
        assert_eq!(adjoint_intersection(&m2).unwrap().dim(), 4);
        let strict = OperatorSpace::new("strict", 2, 2, vec![e(0, 1)]).unwrap();
        assert_eq!(adjoint_intersection(&strict).unwrap().dim(), 0);
        assert!(matches!(
            adjoint_intersection(&column_space()),
            Err(LabError::NonSquare { rows: 2, cols: 1 })
        ));
    }

    #[test]
    fn adjoint_intersection_is_idempotent() {
        let once = adjoint_intersection(&upper(3)).unwrap();
        let twice = adjoint_intersection(&once).unwrap();
        assert_eq!(once.dim(), twice.dim());
        for q in twice.orthonormal_basis() {
            assert!(once.member(q).unwrap().residual <= 1e-10);
        }
        for q in once.orthonormal_basis() {
            assert!(twice.member(q).unwrap().residual <= 1e-10);
        }
    }

    #[test]
    fn cartan_dimensions() {
        assert_eq!(cartan(CartanKind::Rectangular { p: 2, q: 3 }).unwrap().dim(), 6);
        assert_eq!(cartan(CartanKind::Antisymmetric { n: 3 }).unwrap().dim(), 3);
        assert_eq!(cartan(CartanKind::Symmetric { n: 3 }).unwrap().dim(), 6);
        assert_eq!(cartan(CartanKind::Spin { n: 3 }).unwrap().dim(), 4);
        assert!(cartan(CartanKind::Spin { n: 7 }).is_err());
    }

    #[test]
    fn spin_generators_anticommute() {
        let (x, y, _) = pauli();
        let g = spin_generators(2).unwrap();
        assert_eq!(g[0], x);
        assert_eq!(g[1], y);
        for n in 1..=MAX_SPIN_GENERATORS {
            let g = spin_generators(n).unwrap();
            let id = ComplexMatrix::identity(g[0].rows());
            for (a, ga) in g.iter().enumerate() {
                assert_eq!(&ga.adjoint(), ga);
                for (b, gb) in g.iter().enumerate() {
                    let anti = &(ga * gb) + &(gb * ga);
                    let want = if a == b { id.scale_real(2.0) } else { ComplexMatrix::zeros(id.rows(), id.cols()) };
                    assert!((&anti - &want).max_abs() <= 1e-12);
                }
            }
        }
    }
}
