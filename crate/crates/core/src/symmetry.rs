//! Isometries of `M_n(A)` and the averaged corner projections.
//!
//! Every catalogued isometry acts on the grid of entries as
//! `(a, b) -> l_a r_b x_{π(a), σ(b)}` with unimodular scalars `l`, `r` and
//! permutations `π`, `σ`. On realizations this is `L X R` for the unitaries
//! `L = (scalars · permutation) ⊗ I_p` and `R` likewise, which is how the
//! dense cross-check is built. Row, column and level indices are one-based.

use serde::{Deserialize, Serialize};

use crate::cmatrix::{kron, ComplexMatrix, C64};
use crate::error::{LabError, Result};
use crate::opspace::AmpElement;

/// A catalogued isometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum IsometryKind {
    RowSign { i: usize },
    ColSign { j: usize },
    RowSwap { i: usize, j: usize },
    ColSwap { i: usize, j: usize },
    RowPhase { i: usize, theta: f64 },
    ColPhase { j: usize, theta: f64 },
    /// `[a, b; c, d] -> [a, -b; -c, d]` split after row and column `m`.
    BlockSignPsi1 { m: usize },
    /// `[a, b; c, d] -> [a, -b; c, -d]` split after row and column `m`.
    BlockSignPsi2 { m: usize },
    /// `[a, b; c, d] -> [l0 r0 a, l0 r1 b; l1 r0 c, l1 r1 d]` for signs `l`, `r`.
    BlockSign { m: usize, left: [i8; 2], right: [i8; 2] },
}

/// An isometry together with the level it acts on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsometrySpec {
    #[serde(flatten)]
    pub kind: IsometryKind,
    pub level: usize,
}

/// Row and column action `(scalars, permutation)` of an isometry.
struct Action {
    left: Vec<C64>,
    row_perm: Vec<usize>,
    right: Vec<C64>,
    col_perm: Vec<usize>,
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

fn check_index(name: &str, i: usize, n: usize) -> Result<usize> {
    if i == 0 || i > n {
        return Err(LabError::InvalidIndex(format!("{name} = {i} outside 1..={n}")));
    }
    Ok(i - 1)
}

fn check_split(m: usize, n: usize) -> Result<()> {
    if m == 0 || m >= n {
        return Err(LabError::InvalidIndex(format!("split m = {m} outside 1..{n}")));
    }
    Ok(())
}

fn check_sign(s: i8) -> Result<f64> {
    match s {
        1 => Ok(1.0),
        -1 => Ok(-1.0),
        _ => Err(LabError::InvalidIndex(format!("sign {s} is not ±1"))),
    }
}

impl IsometrySpec {
    pub fn new(kind: IsometryKind, level: usize) -> Self {
        Self { kind, level }
    }

    /// Whether `ψ ∘ ψ = Id`.
    pub fn is_involution(&self) -> bool {
        !matches!(
            self.kind,
            IsometryKind::RowPhase { .. } | IsometryKind::ColPhase { .. }
        )
    }

    fn action(&self) -> Result<Action> {
        let n = self.level;
        if n == 0 {
            return Err(LabError::InvalidIndex("level must be at least 1".into()));
        }
        let id: Vec<usize> = (0..n).collect();
        let mut act = Action {
            left: vec![one(); n],
            row_perm: id.clone(),
            right: vec![one(); n],
            col_perm: id,
        };
        match self.kind {
            IsometryKind::RowSign { i } => act.left[check_index("i", i, n)?] = -one(),
            IsometryKind::ColSign { j } => act.right[check_index("j", j, n)?] = -one(),
            IsometryKind::RowSwap { i, j } => {
                act.row_perm.swap(check_index("i", i, n)?, check_index("j", j, n)?)
            }
            IsometryKind::ColSwap { i, j } => {
                act.col_perm.swap(check_index("i", i, n)?, check_index("j", j, n)?)
            }
            IsometryKind::RowPhase { i, theta } => {
                act.left[check_index("i", i, n)?] = C64::from_polar(1.0, theta)
            }
            IsometryKind::ColPhase { j, theta } => {
                act.right[check_index("j", j, n)?] = C64::from_polar(1.0, theta)
            }
            IsometryKind::BlockSignPsi1 { m } => {
                return IsometrySpec::new(IsometryKind::BlockSign { m, left: [1, -1], right: [1, -1] }, n).action()
            }
            IsometryKind::BlockSignPsi2 { m } => {
                return IsometrySpec::new(IsometryKind::BlockSign { m, left: [1, 1], right: [1, -1] }, n).action()
            }
            IsometryKind::BlockSign { m, left, right } => {
                check_split(m, n)?;
                let (l0, l1) = (check_sign(left[0])?, check_sign(left[1])?);
                let (r0, r1) = (check_sign(right[0])?, check_sign(right[1])?);
                for k in 0..n {
                    act.left[k] = C64::new(if k < m { l0 } else { l1 }, 0.0);
                    act.right[k] = C64::new(if k < m { r0 } else { r1 }, 0.0);
                }
            }
        }
        Ok(act)
    }

    /// Applies the isometry as a grid transformation.
    pub fn apply<'a>(&self, e: &AmpElement<'a>) -> Result<AmpElement<'a>> {
        if e.n() != self.level {
            return Err(LabError::Level {
                expected: self.level,
                found: e.n(),
            });
        }
        let act = self.action()?;
        e.map_entries(|a, b| {
            let s = act.left[a] * act.right[b];
            e.entry_coefficients(act.row_perm[a], act.col_perm[b])
                .iter()
                .map(|c| c * s)
                .collect()
        })
    }

    /// Dense unitaries `(L, R)` with `ψ(X) = L X R` on `np x nq` realizations.
    pub fn dense(&self, p: usize, q: usize) -> Result<(ComplexMatrix, ComplexMatrix)> {
        let act = self.action()?;
        let n = self.level;
        // (L X)_{a,.} = l_a X_{π(a),.}  and  (X R)_{.,b} = r_b X_{.,σ(b)}
        let l = ComplexMatrix::from_fn(n, n, |a, k| if act.row_perm[a] == k { act.left[a] } else { C64::new(0.0, 0.0) });
        let r = ComplexMatrix::from_fn(n, n, |k, b| if act.col_perm[b] == k { act.right[b] } else { C64::new(0.0, 0.0) });
        Ok((kron(&l, &ComplexMatrix::identity(p)), kron(&r, &ComplexMatrix::identity(q))))
    }
}

/// Applies `spec` to `e`.
pub fn apply_isometry<'a>(spec: &IsometrySpec, e: &AmpElement<'a>) -> Result<AmpElement<'a>> {
    spec.apply(e)
}

/// The closed catalogue of isometries at level `n`, with phases at `π/2` and `π/3`.
pub fn catalogue(n: usize) -> Vec<IsometrySpec> {
    let mut kinds = Vec::new();
    for i in 1..=n {
        kinds.push(IsometryKind::RowSign { i });
        kinds.push(IsometryKind::ColSign { j: i });
        for theta in [std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_3] {
            kinds.push(IsometryKind::RowPhase { i, theta });
            kinds.push(IsometryKind::ColPhase { j: i, theta });
        }
        for j in i + 1..=n {
            kinds.push(IsometryKind::RowSwap { i, j });
            kinds.push(IsometryKind::ColSwap { i, j });
        }
    }
    for m in 1..n {
        kinds.push(IsometryKind::BlockSignPsi1 { m });
        kinds.push(IsometryKind::BlockSignPsi2 { m });
        for (left, right) in [([1, -1], [1, 1]), ([-1, 1], [1, 1]), ([1, -1], [-1, 1])] {
            kinds.push(IsometryKind::BlockSign { m, left, right });
        }
    }
    kinds.into_iter().map(|k| IsometrySpec::new(k, n)).collect()
}

/// `P_m`: compression to the top-left `m x m` corner, kept at level `e.n()`.
pub fn project_pm<'a>(m: usize, e: &AmpElement<'a>) -> Result<AmpElement<'a>> {
    if m == 0 || m > e.n() {
        return Err(LabError::InvalidIndex(format!("m = {m} outside 1..={}", e.n())));
    }
    let d = e.space().dim();
    e.map_entries(|a, b| {
        if a < m && b < m {
            e.entry_coefficients(a, b).to_vec()
        } else {
            vec![C64::new(0.0, 0.0); d]
        }
    })
}

/// `P_m = (ψ2 ψ1 + ψ2 + ψ1 + Id) / 4` evaluated term by term.
pub fn average_pm<'a>(m: usize, e: &AmpElement<'a>) -> Result<AmpElement<'a>> {
    let n = e.n();
    if m == n {
        return project_pm(m, e);
    }
    let psi1 = IsometrySpec::new(IsometryKind::BlockSignPsi1 { m }, n);
    let psi2 = IsometrySpec::new(IsometryKind::BlockSignPsi2 { m }, n);
    let a = psi1.apply(e)?;
    let b = psi2.apply(e)?;
    let c = psi2.apply(&a)?;
    c.try_add(&b)?.try_add(&a)?.try_add(e)?.scaled(C64::new(0.25, 0.0))
}

/// The level-two corner maps `R±` and `S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CornerMap {
    /// `[a, b; c, d] -> ½[a+b, a+b; c+d, c+d]`.
    AveragePlus,
    /// `[a, b; c, d] -> ½[a-b, b-a; c-d, d-c]`.
    AverageMinus,
    /// `[a, b; c, d] -> [a, b; 0, 0]`.
    Restrict,
}

impl CornerMap {
    /// The map as a convex combination of catalogued level-two isometries;
    /// each term is a weight and a composition applied left to right.
    pub fn terms(&self) -> Vec<(f64, Vec<IsometrySpec>)> {
        let swap = IsometrySpec::new(IsometryKind::ColSwap { i: 1, j: 2 }, 2);
        let negate = IsometrySpec::new(IsometryKind::BlockSign { m: 1, left: [-1, -1], right: [1, 1] }, 2);
        let row_sign = IsometrySpec::new(IsometryKind::RowSign { i: 2 }, 2);
        match self {
            CornerMap::AveragePlus => vec![(0.5, vec![]), (0.5, vec![swap])],
            CornerMap::AverageMinus => vec![(0.5, vec![]), (0.5, vec![swap, negate])],
            CornerMap::Restrict => vec![(0.5, vec![]), (0.5, vec![row_sign])],
        }
    }

    pub fn apply<'a>(&self, e: &AmpElement<'a>) -> Result<AmpElement<'a>> {
        if e.n() != 2 {
            return Err(LabError::Level {
                expected: 2,
                found: e.n(),
            });
        }
        let half = C64::new(0.5, 0.0);
        e.map_entries(|a, b| {
            let x = e.entry_coefficients(a, 0);
            let y = e.entry_coefficients(a, 1);
            match self {
                CornerMap::AveragePlus => x.iter().zip(y).map(|(x, y)| (x + y) * half).collect(),
                CornerMap::AverageMinus => {
                    let s = if b == 0 { 1.0 } else { -1.0 };
                    x.iter().zip(y).map(|(x, y)| (x - y) * half * s).collect()
                }
                CornerMap::Restrict => {
                    let src = e.entry_coefficients(a, b);
                    if a == 0 {
                        src.to_vec()
                    } else {
                        vec![C64::new(0.0, 0.0); src.len()]
                    }
                }
            }
        })
    }
}

/// `Q₂ = S ∘ R ∘ P₂`, landing at level two.
pub fn q2<'a>(average: CornerMap, e: &AmpElement<'a>) -> Result<AmpElement<'a>> {
    if average == CornerMap::Restrict {
        return Err(LabError::Unsupported("Q2 takes an averaging map".into()));
    }
    if e.n() < 2 {
        return Err(LabError::Level {
            expected: 2,
            found: e.n(),
        });
    }
    let p = project_pm(2, e)?;
    let coeffs = [(0, 0), (0, 1), (1, 0), (1, 1)]
        .iter()
        .flat_map(|&(a, b)| p.entry_coefficients(a, b).to_vec())
        .collect();
    let corner = AmpElement::from_coefficients(e.space(), 2, coeffs)?;
    CornerMap::Restrict.apply(&average.apply(&corner)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opspace::OperatorSpace;
    use crate::sample::{rng_from_seed, unit_element};
    use crate::triple::triple;

    fn upper() -> OperatorSpace {
        let e = |i, j| ComplexMatrix::unit(2, 2, i, j);
        OperatorSpace::new("upper", 2, 2, vec![e(0, 0), e(0, 1), e(1, 1)]).unwrap()
    }

    fn column() -> OperatorSpace {
        let e = |i| ComplexMatrix::unit(2, 1, i, 0);
        OperatorSpace::new("column", 2, 1, vec![e(0), e(1)]).unwrap()
    }

    fn grid<'a>(s: &'a OperatorSpace, g: [[&ComplexMatrix; 2]; 2]) -> AmpElement<'a> {
        s.amplify(&[vec![g[0][0].clone(), g[0][1].clone()], vec![g[1][0].clone(), g[1][1].clone()]])
            .unwrap()
    }

    fn close(a: &AmpElement<'_>, b: &AmpElement<'_>) -> f64 {
        (a.realization() - b.realization()).max_abs()
    }

    #[test]
    fn psi1_flips_off_diagonal_blocks() {
        let s = upper();
        let mut rng = rng_from_seed(1);
        let x = unit_element(&s, 2, &mut rng).unwrap();
        let [a, b, c, d] = [x.entry(0, 0), x.entry(0, 1), x.entry(1, 0), x.entry(1, 1)];
        let psi1 = IsometrySpec::new(IsometryKind::BlockSignPsi1 { m: 1 }, 2);
        let y = psi1.apply(&x).unwrap();
        assert!(close(&y, &grid(&s, [[&a, &-&b], [&-&c, &d]])) <= 1e-15);
        let psi2 = IsometrySpec::new(IsometryKind::BlockSignPsi2 { m: 1 }, 2);
        let z = psi2.apply(&x).unwrap();
        assert!(close(&z, &grid(&s, [[&a, &-&b], [&c, &-&d]])) <= 1e-15);
        assert_eq!(close(&psi1.apply(&y).unwrap(), &x), 0.0);
    }

    #[test]
    fn row_swap_and_phase() {
        let s = upper();
        let mut rng = rng_from_seed(2);
        let x = unit_element(&s, 1, &mut rng).unwrap().entry(0, 0);
        let y = unit_element(&s, 1, &mut rng).unwrap().entry(0, 0);
        let z = ComplexMatrix::zeros(2, 2);
        let e = grid(&s, [[&z, &x], [&y, &z]]);
        let swapped = IsometrySpec::new(IsometryKind::RowSwap { i: 1, j: 2 }, 2).apply(&e).unwrap();
        assert!(close(&swapped, &grid(&s, [[&y, &z], [&z, &x]])) <= 1e-15);

        let phase = IsometrySpec::new(IsometryKind::ColPhase { j: 2, theta: std::f64::consts::FRAC_PI_2 }, 2);
        let twice = phase.apply(&phase.apply(&e).unwrap()).unwrap();
        let sign = IsometrySpec::new(IsometryKind::ColSign { j: 2 }, 2).apply(&e).unwrap();
        assert!(close(&twice, &sign) <= 1e-15);
    }

    #[test]
    fn level_and_index_errors() {
        let s = upper();
        let x = AmpElement::zero(&s, 2).unwrap();
        let spec = IsometrySpec::new(IsometryKind::RowSign { i: 1 }, 3);
        assert!(matches!(spec.apply(&x), Err(LabError::Level { expected: 3, found: 2 })));
        let spec = IsometrySpec::new(IsometryKind::RowSign { i: 3 }, 2);
        assert!(matches!(spec.apply(&x), Err(LabError::InvalidIndex(_))));
        let spec = IsometrySpec::new(IsometryKind::BlockSignPsi1 { m: 2 }, 2);
        assert!(matches!(spec.apply(&x), Err(LabError::InvalidIndex(_))));
    }

    #[test]
    fn catalogue_matches_dense_and_preserves_structure() {
        for space in [upper(), column()] {
            let (p, q) = space.shape();
            let mut rng = rng_from_seed(3);
            for n in 1..=3 {
                for spec in catalogue(n) {
                    let (l, r) = spec.dense(p, q).unwrap();
                    for _ in 0..5 {
                        let xs: Vec<_> = (0..3).map(|_| unit_element(&space, n, &mut rng).unwrap()).collect();
                        let ys: Vec<_> = xs.iter().map(|x| spec.apply(x).unwrap()).collect();
                        for (x, y) in xs.iter().zip(&ys) {
                            let dense = &(&l * x.realization()) * &r;
                            assert!((&dense - y.realization()).max_abs() <= 1e-14, "{spec:?}");
                            assert!((y.norm().unwrap() - x.norm().unwrap()).abs() <= 1e-12);
                            if spec.is_involution() {
                                assert_eq!(close(&spec.apply(y).unwrap(), x), 0.0);
                            }
                        }
                        let t = triple(xs[0].realization(), xs[1].realization(), xs[2].realization()).unwrap();
                        let mapped = &(&l * &t) * &r;
                        let t2 = triple(ys[0].realization(), ys[1].realization(), ys[2].realization()).unwrap();
                        assert!((&mapped - &t2).opnorm().unwrap() <= 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn spec_json_shape() {
        let spec = IsometrySpec::new(IsometryKind::RowSwap { i: 1, j: 2 }, 2);
        let json = serde_json::to_value(spec).unwrap();
        assert_eq!(json["kind"], "row_swap");
        assert_eq!(json["params"]["j"], 2);
        assert_eq!(json["level"], 2);
        let back: IsometrySpec = serde_json::from_value(json).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn pm_examples() {
        let s = upper();
        let mut rng = rng_from_seed(4);
        let x = unit_element(&s, 2, &mut rng).unwrap();
        let z = ComplexMatrix::zeros(2, 2);
        let p1 = project_pm(1, &x).unwrap();
        assert!(close(&p1, &grid(&s, [[&x.entry(0, 0), &z], [&z, &z]])) <= 1e-15);
        assert!(close(&average_pm(1, &x).unwrap(), &p1) <= 1e-15);

        let y = unit_element(&s, 3, &mut rng).unwrap();
        let p2 = project_pm(2, &y).unwrap();
        for k in 0..3 {
            assert!(p2.entry(2, k).max_abs() == 0.0 && p2.entry(k, 2).max_abs() == 0.0);
        }
        assert!(close(&average_pm(2, &y).unwrap(), &p2) <= 1e-15);
        let inner = unit_element(&s, 2, &mut rng).unwrap().padded().unwrap();
        assert_eq!(close(&project_pm(2, &inner).unwrap(), &inner), 0.0);
        assert!(project_pm(0, &y).is_err() && project_pm(4, &y).is_err());
    }

    #[test]
    fn corner_map_examples() {
        let s = upper();
        let mut rng = rng_from_seed(5);
        let x = unit_element(&s, 2, &mut rng).unwrap();
        let [a, b, c, d] = [x.entry(0, 0), x.entry(0, 1), x.entry(1, 0), x.entry(1, 1)];
        let z = ComplexMatrix::zeros(2, 2);
        let ab = (&a + &b).scale_real(0.5);
        let cd = (&c + &d).scale_real(0.5);
        assert!(close(&CornerMap::AveragePlus.apply(&x).unwrap(), &grid(&s, [[&ab, &ab], [&cd, &cd]])) <= 1e-15);
        let amb = (&a - &b).scale_real(0.5);
        let cmd = (&c - &d).scale_real(0.5);
        let want = grid(&s, [[&amb, &-&amb], [&cmd, &-&cmd]]);
        assert!(close(&CornerMap::AverageMinus.apply(&x).unwrap(), &want) <= 1e-15);
        assert!(close(&CornerMap::Restrict.apply(&x).unwrap(), &grid(&s, [[&a, &b], [&z, &z]])) <= 1e-15);
        let fixed = grid(&s, [[&a, &a], [&z, &z]]);
        assert!(close(&CornerMap::AveragePlus.apply(&fixed).unwrap(), &fixed) <= 1e-15);
    }

    #[test]
    fn corner_maps_are_convex_combinations_of_isometries() {
        let s = upper();
        let mut rng = rng_from_seed(6);
        for map in [CornerMap::AveragePlus, CornerMap::AverageMinus, CornerMap::Restrict] {
            for _ in 0..20 {
                let x = unit_element(&s, 2, &mut rng).unwrap();
                let mut sum = AmpElement::zero(&s, 2).unwrap();
                for (w, iso) in map.terms() {
                    let mut term = x.clone();
                    for spec in iso {
                        term = spec.apply(&term).unwrap();
                    }
                    sum = sum.try_add(&term.scaled(C64::new(w, 0.0)).unwrap()).unwrap();
                }
                let y = map.apply(&x).unwrap();
                assert!(close(&sum, &y) <= 1e-15);
                assert!(y.norm().unwrap() <= x.norm().unwrap() + 1e-12);
            }
        }
    }

    #[test]
    fn q2_fixes_the_diagonal_copy() {
        let s = upper();
        let mut rng = rng_from_seed(7);
        let a = unit_element(&s, 1, &mut rng).unwrap().entry(0, 0);
        let z = ComplexMatrix::zeros(2, 2);
        let lifted = grid(&s, [[&a, &a], [&z, &z]]).padded().unwrap();
        let out = q2(CornerMap::AveragePlus, &lifted).unwrap();
        assert!(close(&out, &grid(&s, [[&a, &a], [&z, &z]])) <= 1e-15);
        let minus = grid(&s, [[&a, &-&a], [&z, &z]]);
        assert!(close(&q2(CornerMap::AverageMinus, &minus).unwrap(), &minus) <= 1e-15);
    }
}
