//! Lemma residual suite and the two-condition checker.
//!
//! Lemma cases evaluate both sides of each displayed identity on random
//! unit-scale inputs and record the worst operator-norm residual with its
//! inputs. Condition (ii), complete contractivity of the product and the
//! half-norm bound on the corner triple are estimated by gradient ascent on
//! norm ratios from random starts.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cmatrix::{blocks2, ComplexMatrix, DEFAULT_TOL};
use crate::discover::{numerical_gradient, UnitCandidate, FD_STEP};
use crate::error::{LabError, Result};
use crate::opspace::{OperatorSpace, SpaceFile};
use crate::product::{cond_i_residual, ProductContext};
use crate::sample::{gaussian_vec, substream, unit_element, unit_member, LabRng};
use crate::triple::{justify, triple, Restriction};

/// Largest lemma residual that still passes.
pub const LEMMA_TOL: f64 = 1e-9;
/// Slack above the analytic bound allowed for the ratio checks.
pub const RATIO_SLACK: f64 = 1e-7;
/// Line-search step below which an ascent counts as converged.
const MIN_STEP: f64 = 1e-12;
/// An ascent also counts as converged once `STALL_WINDOW` steps gain less than
/// `STALL_GAIN` relative to the current value.
const STALL_WINDOW: usize = 10;
const STALL_GAIN: f64 = 1e-10;

/// Named inputs of a trial or witness.
pub type Inputs = BTreeMap<String, ComplexMatrix>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    /// Combines statuses: any failure fails, then any inconclusive.
    pub fn merge(self, other: Status) -> Status {
        match (self, other) {
            (Status::Fail, _) | (_, Status::Fail) => Status::Fail,
            (Status::Inconclusive, _) | (_, Status::Inconclusive) => Status::Inconclusive,
            _ => Status::Pass,
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Inconclusive => 2,
        }
    }
}

// ---------------------------------------------------------------------------
// Lemma cases

/// Which inputs a case draws: members of the space, or level-two elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampler {
    Members,
    LevelTwo,
}

type ResidualFn = fn(&ProductContext<'_>, &Inputs) -> Result<f64>;

/// One identity of the suite.
#[derive(Clone, Copy)]
pub struct LemmaCase {
    pub id: &'static str,
    pub statement: &'static str,
    pub inputs: &'static [&'static str],
    pub sampler: Sampler,
    residual_fn: ResidualFn,
}

impl std::fmt::Debug for LemmaCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LemmaCase").field("id", &self.id).finish()
    }
}

impl LemmaCase {
    pub fn residual(&self, ctx: &ProductContext<'_>, inputs: &Inputs) -> Result<f64> {
        for name in self.inputs {
            if !inputs.contains_key(*name) {
                return Err(LabError::Precondition(format!("case {} needs input '{name}'", self.id)));
            }
        }
        (self.residual_fn)(ctx, inputs)
    }

    fn draw(&self, ctx: &ProductContext<'_>, rng: &mut LabRng) -> Result<Inputs> {
        let mut out = Inputs::new();
        for name in self.inputs {
            let m = match self.sampler {
                Sampler::Members => unit_member(ctx.space(), rng)?,
                Sampler::LevelTwo => unit_element(ctx.space(), 2, rng)?.realization().clone(),
            };
            out.insert((*name).to_string(), m);
        }
        Ok(out)
    }
}

struct Blocks<'c> {
    z: ComplexMatrix,
    v: &'c ComplexMatrix,
}

impl<'c> Blocks<'c> {
    fn new(ctx: &'c ProductContext<'_>) -> Self {
        let (p, q) = ctx.space().shape();
        Self {
            z: ComplexMatrix::zeros(p, q),
            v: ctx.v(),
        }
    }

    /// `[a, b; c, d]` with `None` for a zero block.
    fn b(&self, a: Option<&ComplexMatrix>, b: Option<&ComplexMatrix>, c: Option<&ComplexMatrix>, d: Option<&ComplexMatrix>) -> ComplexMatrix {
        let pick = |m: Option<&ComplexMatrix>| m.unwrap_or(&self.z).clone();
        blocks2(&pick(a), &pick(b), &pick(c), &pick(d)).expect("blocks share the ambient shape")
    }
}

fn get<'i>(inputs: &'i Inputs, name: &str) -> &'i ComplexMatrix {
    &inputs[name]
}

fn t(x: &ComplexMatrix, y: &ComplexMatrix, z: &ComplexMatrix) -> Result<ComplexMatrix> {
    triple(x, y, z)
}

fn norm_of(m: ComplexMatrix) -> Result<f64> {
    m.opnorm()
}

fn l3_2(ctx: &ProductContext<'_>, i: &Inputs) -> Result<f64> {
    let k = Blocks::new(ctx);
    let x = get(i, "x");
    let xvx = t(x, k.v, x)?;
    let mut worst: f64 = 0.0;
    for s in [1.0, -1.0] {
        let sx = x.scale_real(s);
        let sv = k.v.scale_real(s);
        let lhs = t(&k.b(Some(x), Some(&sx), None, None), &k.b(Some(k.v), Some(&sv), None, None), &k.b(Some(x), Some(&sx), None, None))?;
        let rhs = k.b(Some(&xvx), Some(&xvx.scale_real(s)), None, None).scale_real(2.0);
        worst = worst.max(norm_of(&lhs - &rhs)?);
    }
    Ok(worst)
}

fn l3_3(ctx: &ProductContext<'_>, i: &Inputs) -> Result<f64> {
    let k = Blocks::new(ctx);
    let x = get(i, "x");
    let lhs = k.b(Some(&t(x, k.v, x)?), None, None, None);
    let r1 = t(&k.b(None, Some(x), None, None), &k.b(Some(k.v), None, None, None), &k.b(None, Some(x), None, None))?;
    let r2 = t(&k.b(Some(x), None, None, None), &k.b(None, Some(k.v), None, None), &k.b(None, Some(x), None, None))?;
    norm_of(&(&lhs - &r1) - &r2.scale_real(2.0))
}

fn l3_4(ctx: &ProductContext<'_>, i: &Inputs) -> Result<f64> {
    let k = Blocks::new(ctx);
    let (a, b) = (get(i, "a"), get(i, "b"));
    let avb = t(a, k.v, b)?;
    let mut worst: f64 = 0.0;
    for s in [1.0, -1.0] {
        let d = |m: &ComplexMatrix| k.b(Some(m), None, None, Some(&m.scale_real(s)));
        let lhs = t(&d(a), &d(k.v), &d(b))?;
        worst = worst.max(norm_of(&lhs - &d(&avb))?);
    }
    Ok(worst)
}

fn l3_5(ctx: &ProductContext<'_>, i: &Inputs) -> Result<f64> {
    let k = Blocks::new(ctx);
    let (x, y) = (get(i, "x"), get(i, "y"));
    let dv = k.b(None, None, None, Some(k.v));
    let first = &t(&k.b(Some(x), None, None, None), &dv, &k.b(None, None, None, Some(y)))?
        + &t(&k.b(Some(y), None, None, None), &dv, &k.b(None, None, None, Some(x)))?;
    let second = t(&k.b(None, None, None, Some(x)), &k.b(Some(k.v), None, None, None), &k.b(None, None, None, Some(y)))?;
    Ok(norm_of(first)?.max(norm_of(second)?))
}

fn l3_6(ctx: &ProductContext<'_>, i: &Inputs) -> Result<f64> {
    let k = Blocks::new(ctx);
    let (x, a, b, c, d) = (get(i, "x"), get(i, "a"), get(i, "b"), get(i, "c"), get(i, "d"));
    let x11 = k.b(Some(x), None, None, None);
    let v22 = k.b(None, None, None, Some(k.v));
    let x12 = k.b(None, Some(x), None, None);
    let v21 = k.b(None, None, Some(k.v), None);
    let terms = [
        t(&x11, &v22, &k.b(Some(a), Some(b), Some(c), None))?,
        t(&x11, &v22, &v22)?,
        t(&x12, &v21, &k.b(Some(a), Some(b), None, Some(d)))?,
        t(&x12, &v21, &v21)?,
    ];
    let mut worst: f64 = 0.0;
    for m in terms {
        worst = worst.max(m.opnorm()?);
    }
    Ok(worst)
}

fn l3_7(ctx: &ProductContext<'_>, i: &Inputs) -> Result<f64> {
    let k = Blocks::new(ctx);
    let (x, y) = (get(i, "x"), get(i, "y"));
    let lhs = k.b(Some(&t(x, k.v, y)?), None, None, None);
    let r1 = t(&k.b(None, Some(x), None, None), &k.b(Some(k.v), None, None, None), &k.b(None, Some(y), None, None))?;
    let r2 = t(&k.b(Some(x), None, None, None), &k.b(None, Some(k.v), None, None), &k.b(None, Some(y), None, None))?;
    let r3 = t(&k.b(None, Some(x), None, None), &k.b(None, Some(k.v), None, None), &k.b(Some(y), None, None, None))?;
    norm_of(&(&(&lhs - &r1) - &r2) - &r3)
}

fn l3_8(ctx: &ProductContext<'_>, i: &Inputs) -> Result<f64> {
    let k = Blocks::new(ctx);
    let x = get(i, "x");
    let xvx2 = t(x, k.v, x)?.scale_real(2.0);
    let mut worst: f64 = 0.0;
    for s in [1.0, -1.0] {
        let col = |m: &ComplexMatrix| k.b(None, Some(m), None, Some(&m.scale_real(s)));
        let lhs = t(&col(x), &col(k.v), &col(x))?;
        worst = worst.max(norm_of(&lhs - &col(&xvx2))?);
    }
    Ok(worst)
}

fn l3_9(ctx: &ProductContext<'_>, i: &Inputs) -> Result<f64> {
    let k = Blocks::new(ctx);
    let x = get(i, "x");
    let lhs = k.b(None, Some(&t(x, k.v, x)?), None, None);
    let x22 = k.b(None, None, None, Some(x));
    let r1 = t(&x22, &k.b(None, Some(k.v), None, None), &x22)?;
    let r2 = t(&x22, &k.b(None, None, None, Some(k.v)), &k.b(None, Some(x), None, None))?;
    norm_of(&(&lhs - &r1) - &r2.scale_real(2.0))
}

fn l3_10(ctx: &ProductContext<'_>, i: &Inputs) -> Result<f64> {
    let k = Blocks::new(ctx);
    let (x, y) = (get(i, "x"), get(i, "y"));
    let lhs = k.b(None, Some(&t(x, k.v, y)?), None, None);
    let v22 = k.b(None, None, None, Some(k.v));
    let r1 = t(&k.b(None, None, None, Some(x)), &k.b(None, Some(k.v), None, None), &k.b(None, None, None, Some(y)))?;
    let r2 = t(&k.b(None, None, None, Some(x)), &v22, &k.b(None, Some(y), None, None))?;
    let r3 = t(&k.b(None, None, None, Some(y)), &v22, &k.b(None, Some(x), None, None))?;
    norm_of(&(&(&lhs - &r1) - &r2) - &r3)
}

fn l3_11(ctx: &ProductContext<'_>, i: &Inputs) -> Result<f64> {
    let k = Blocks::new(ctx);
    let x = get(i, "x");
    norm_of(t(&k.b(None, Some(k.v), None, None), &k.b(Some(k.v), None, None, None), &k.b(None, Some(x), None, None))?)
}

fn l3_12(ctx: &ProductContext<'_>, i: &Inputs) -> Result<f64> {
    let k = Blocks::new(ctx);
    let (x, y) = (get(i, "x"), get(i, "y"));
    norm_of(t(&k.b(None, Some(x), None, None), &k.b(Some(k.v), None, None, None), &k.b(None, Some(y), None, None))?)
}

fn l4_1(ctx: &ProductContext<'_>, i: &Inputs) -> Result<f64> {
    let k = Blocks::new(ctx);
    let (x, y) = (get(i, "x"), get(i, "y"));
    let x21 = k.b(None, None, Some(x), None);
    let lhs = t(&x21, &k.b(Some(k.v), None, None, None), &k.b(None, Some(y), None, None))?;
    let rhs = t(&x21, &k.b(None, None, Some(k.v), None), &k.b(None, None, None, Some(y)))?;
    norm_of(&lhs - &rhs)
}

fn l4_2(ctx: &ProductContext<'_>, i: &Inputs) -> Result<f64> {
    let x = get(i, "x");
    let right = norm_of(&ctx.dot(x, ctx.v())? - x)?;
    let left = norm_of(&ctx.dot(ctx.v(), x)? - x)?;
    Ok(right.max(left))
}

fn l4_3(ctx: &ProductContext<'_>, i: &Inputs) -> Result<f64> {
    let k = Blocks::new(ctx);
    let x = get(i, "x");
    let v22 = k.b(None, None, None, Some(k.v));
    let lhs = t(&v22, &k.b(None, None, Some(k.v), None), &k.b(None, None, Some(x), None))?;
    let rhs = t(&v22, &k.b(None, Some(k.v), None, None), &k.b(None, Some(x), None, None))?;
    norm_of(&lhs - &rhs)
}

fn c4_4(ctx: &ProductContext<'_>, i: &Inputs) -> Result<f64> {
    let k = Blocks::new(ctx);
    let (x, y) = (get(i, "x"), get(i, "y"));
    norm_of(t(&k.b(Some(y), None, None, None), &k.b(None, None, None, Some(k.v)), &k.b(None, None, None, Some(x)))?)
}

fn level_two<'a>(ctx: &ProductContext<'a>, m: &ComplexMatrix) -> Result<crate::opspace::AmpElement<'a>> {
    ctx.space().element_from_realization(2, m)
}

fn p4_5a(ctx: &ProductContext<'_>, i: &Inputs) -> Result<f64> {
    let x = get(i, "X");
    let v = ctx.big_v(2)?;
    norm_of(&t(x, v.realization(), v.realization())? - x)
}

fn p4_5b(ctx: &ProductContext<'_>, i: &Inputs) -> Result<f64> {
    let x = level_two(ctx, get(i, "X"))?;
    let y = level_two(ctx, get(i, "Y"))?;
    ctx.remark_residual(&x, &y)
}

fn p4_5c(ctx: &ProductContext<'_>, i: &Inputs) -> Result<f64> {
    let x = level_two(ctx, get(i, "X"))?;
    let y = level_two(ctx, get(i, "Y"))?;
    let v = ctx.big_v(2)?;
    let sym = &ctx.matrix_dot_realization(&x, &y)? + &ctx.matrix_dot_realization(&y, &x)?;
    let xvy = t(x.realization(), v.realization(), y.realization())?.scale_real(2.0);
    norm_of(&sym - &xvy)
}

/// The full suite, in order.
pub fn lemma_cases() -> Vec<LemmaCase> {
    use Sampler::*;
    let case = |id, statement, inputs, sampler, residual_fn| LemmaCase {
        id,
        statement,
        inputs,
        sampler,
        residual_fn,
    };
    vec![
        case("L3.2", "{[x,±x;0,0],[v,±v;0,0],[x,±x;0,0]} = 2[{xvx},±{xvx};0,0]", &["x"], Members, l3_2 as ResidualFn),
        case("L3.3", "[{xvx},0;0,0] = {[0,x;0,0],[v,0;0,0],[0,x;0,0]} + 2{[x,0;0,0],[0,v;0,0],[0,x;0,0]}", &["x"], Members, l3_3),
        case("L3.4", "{diag(a,±a),diag(v,±v),diag(b,±b)} = diag({avb},±{avb})", &["a", "b"], Members, l3_4),
        case("L3.5", "{[x,0;0,0],[0,0;0,v],[0,0;0,y]} + {[y,0;0,0],[0,0;0,v],[0,0;0,x]} = 0 and {[0,0;0,x],[v,0;0,0],[0,0;0,y]} = 0", &["x", "y"], Members, l3_5),
        case("L3.6", "{[x,0;0,0],[0,0;0,v],[a,b;c,0]} = {[x,0;0,0],[0,0;0,v],[0,0;0,v]} = {[0,x;0,0],[0,0;v,0],[a,b;0,d]} = {[0,x;0,0],[0,0;v,0],[0,0;v,0]} = 0", &["x", "a", "b", "c", "d"], Members, l3_6),
        case("L3.7", "[{xvy},0;0,0] = {[0,x;0,0],[v,0;0,0],[0,y;0,0]} + {[x,0;0,0],[0,v;0,0],[0,y;0,0]} + {[0,x;0,0],[0,v;0,0],[y,0;0,0]}", &["x", "y"], Members, l3_7),
        case("L3.8", "{[0,x;0,±x],[0,v;0,±v],[0,x;0,±x]} = [0,2{xvx};0,±2{xvx}]", &["x"], Members, l3_8),
        case("L3.9", "[0,{xvx};0,0] = {[0,0;0,x],[0,v;0,0],[0,0;0,x]} + 2{[0,0;0,x],[0,0;0,v],[0,x;0,0]}", &["x"], Members, l3_9),
        case("L3.10", "[0,{xvy};0,0] = {[0,0;0,x],[0,v;0,0],[0,0;0,y]} + {[0,0;0,x],[0,0;0,v],[0,y;0,0]} + {[0,0;0,y],[0,0;0,v],[0,x;0,0]}", &["x", "y"], Members, l3_10),
        case("L3.11", "{[0,v;0,0],[v,0;0,0],[0,x;0,0]} = 0", &["x"], Members, l3_11),
        case("L3.12", "{[0,x;0,0],[v,0;0,0],[0,y;0,0]} = 0", &["x", "y"], Members, l3_12),
        case("L4.1", "{[0,0;x,0],[v,0;0,0],[0,y;0,0]} = {[0,0;x,0],[0,0;v,0],[0,0;0,y]}", &["x", "y"], Members, l4_1),
        case("L4.2", "x·v = v·x = x", &["x"], Members, l4_2),
        case("L4.3", "{[0,0;0,v],[0,0;v,0],[0,0;x,0]} = {[0,0;0,v],[0,v;0,0],[0,x;0,0]}", &["x"], Members, l4_3),
        case("C4.4", "{[y,0;0,0],[0,0;0,v],[0,0;0,x]} = 0", &["x", "y"], Members, c4_4),
        case("P4.5a", "{X,V,V} = X", &["X"], LevelTwo, p4_5a),
        case("P4.5b", "[0,Y·X;0,0] = 2{[Y,0;0,0],[V,0;0,0],[0,X;0,0]}", &["X", "Y"], LevelTwo, p4_5b),
        case("P4.5c", "X·Y + Y·X = 2{X,V,Y}", &["X", "Y"], LevelTwo, p4_5c),
    ]
}

pub fn lemma_case(id: &str) -> Option<LemmaCase> {
    lemma_cases().into_iter().find(|c| c.id == id)
}

/// Per-case outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaseReport {
    pub id: String,
    pub statement: String,
    pub trials: usize,
    pub max_residual: f64,
    pub witness: Inputs,
    pub status: Status,
}

/// Runs one case for `trials` random draws from stream `stream` of `seed`.
pub fn run_case(ctx: &ProductContext<'_>, case: &LemmaCase, trials: usize, seed: u64, stream: u64) -> Result<CaseReport> {
    let mut rng = substream(seed, stream);
    let mut max = -1.0;
    let mut witness = Inputs::new();
    for _ in 0..trials {
        let inputs = case.draw(ctx, &mut rng)?;
        let r = case.residual(ctx, &inputs)?;
        if r > max {
            max = r;
            witness = inputs;
        }
    }
    let max = max.max(0.0);
    Ok(CaseReport {
        id: case.id.to_string(),
        statement: case.statement.to_string(),
        trials,
        max_residual: max,
        witness,
        status: if max <= LEMMA_TOL { Status::Pass } else { Status::Fail },
    })
}

/// Stream offset for lemma case `k`.
const LEMMA_STREAM: u64 = 1_000;

/// Runs every case of the suite.
pub fn run_lemma_suite(ctx: &ProductContext<'_>, trials: usize, seed: u64) -> Result<Vec<CaseReport>> {
    lemma_cases()
        .iter()
        .enumerate()
        .map(|(k, case)| run_case(ctx, case, trials, seed, LEMMA_STREAM + k as u64))
        .collect()
}

// ---------------------------------------------------------------------------
// Condition (i)

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionIReport {
    pub residual: f64,
    /// Zero-based index of the worst declared basis element.
    pub witness_index: usize,
    pub witness: ComplexMatrix,
    pub status: Status,
}

/// `max_b ‖{b, v, v} - b‖` over the declared basis.
pub fn check_condition_i(ctx: &ProductContext<'_>, tol: f64) -> Result<ConditionIReport> {
    let (residual, k) = cond_i_residual(ctx.space(), ctx.v())?;
    Ok(ConditionIReport {
        residual,
        witness_index: k,
        witness: ctx.space().basis()[k].clone(),
        status: if residual <= tol { Status::Pass } else { Status::Fail },
    })
}

// ---------------------------------------------------------------------------
// Ratio ascent

/// Restarts and ascent steps per restart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub restarts: usize,
    pub steps: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self { restarts: 32, steps: 200 }
    }
}

/// Whether the condition-(i) gate is enforced before a ratio check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    Enforce(f64),
    /// Runs the check regardless; used for fault injection.
    Bypass,
}

/// The three ratio checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RatioKind {
    /// `‖{X, V, X}‖ / ‖X‖²`, bound 1.
    ConditionIi,
    /// `‖X·Y‖ / (‖X‖ ‖Y‖)`, bound 1.
    Contractivity,
    /// `‖{[Y,0;0,0], [V,0;0,0], [0,X;0,0]}‖ / (‖X‖ ‖Y‖)`, bound 1/2.
    Remark,
}

impl RatioKind {
    pub fn bound(self) -> f64 {
        match self {
            RatioKind::Remark => 0.5,
            _ => 1.0,
        }
    }

    fn arity(self) -> usize {
        match self {
            RatioKind::ConditionIi => 1,
            _ => 2,
        }
    }

    fn stream_base(self) -> u64 {
        match self {
            RatioKind::ConditionIi => 100_000,
            RatioKind::Contractivity => 200_000,
            RatioKind::Remark => 300_000,
        }
    }

    fn names(self) -> &'static [&'static str] {
        match self {
            RatioKind::ConditionIi => &["X"],
            _ => &["X", "Y"],
        }
    }
}

/// Outcome of one ratio ascent at one level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AscentReport {
    pub kind: RatioKind,
    pub level: usize,
    pub ratio: f64,
    pub threshold: f64,
    /// Realizations of the maximizing elements.
    pub witness: Inputs,
    /// Best ratio among the starting points.
    pub best_start: f64,
    pub converged: bool,
    pub status: Status,
}

/// Ratio evaluated from witness realizations; this is what reports record and replay.
pub fn ratio_from_witness(ctx: &ProductContext<'_>, kind: RatioKind, level: usize, witness: &Inputs) -> Result<f64> {
    let fetch = |name: &str| {
        witness
            .get(name)
            .ok_or_else(|| LabError::Precondition(format!("witness needs '{name}'")))
            .and_then(|m| ctx.space().element_from_realization(level, m))
    };
    let x = fetch("X")?;
    let nx = x.norm()?;
    match kind {
        RatioKind::ConditionIi => {
            if nx == 0.0 {
                return Ok(0.0);
            }
            let v = ctx.big_v(level)?;
            Ok(t(x.realization(), v.realization(), x.realization())?.opnorm()? / (nx * nx))
        }
        RatioKind::Contractivity | RatioKind::Remark => {
            let y = fetch("Y")?;
            let ny = y.norm()?;
            if nx == 0.0 || ny == 0.0 {
                return Ok(0.0);
            }
            let num = if kind == RatioKind::Contractivity {
                ctx.matrix_dot_realization(&x, &y)?.opnorm()?
            } else {
                ctx.remark_triple(&x, &y)?.opnorm()?
            };
            Ok(num / (nx * ny))
        }
    }
}

/// Fast evaluator on coefficient parameters, used inside the ascent.
struct RatioObjective<'c, 'a> {
    ctx: &'c ProductContext<'a>,
    kind: RatioKind,
    n: usize,
    v_adj: ComplexMatrix,
    v_real: ComplexMatrix,
    per_element: usize,
}

impl<'c, 'a> RatioObjective<'c, 'a> {
    fn new(ctx: &'c ProductContext<'a>, kind: RatioKind, n: usize) -> Result<Self> {
        let v = ctx.big_v(n)?;
        Ok(Self {
            ctx,
            kind,
            n,
            v_adj: v.realization().adjoint(),
            v_real: v.realization().clone(),
            per_element: 2 * n * n * ctx.space().dim(),
        })
    }

    fn params_len(&self) -> usize {
        self.per_element * self.kind.arity()
    }

    fn realize(&self, theta: &[f64]) -> ComplexMatrix {
        let space = self.ctx.space();
        let (p, q) = space.shape();
        let d = space.dim();
        let basis = space.orthonormal_basis();
        let n = self.n;
        let mut out = ComplexMatrix::zeros(n * p, n * q);
        for i in 0..n {
            for j in 0..n {
                for (k, b) in basis.iter().enumerate() {
                    let idx = 2 * ((i * n + j) * d + k);
                    let c = crate::cmatrix::c64(theta[idx], theta[idx + 1]);
                    if c.re == 0.0 && c.im == 0.0 {
                        continue;
                    }
                    for r in 0..p {
                        for s in 0..q {
                            let cur = out.get(i * p + r, j * q + s);
                            out.set(i * p + r, j * q + s, cur + c * b.get(r, s));
                        }
                    }
                }
            }
        }
        out
    }

    fn eval(&self, theta: &[f64]) -> Result<f64> {
        let x = self.realize(&theta[..self.per_element]);
        let nx = x.opnorm()?;
        if nx == 0.0 {
            return Ok(0.0);
        }
        match self.kind {
            RatioKind::ConditionIi => {
                let xvx = x.matmul(&self.v_adj)?.matmul(&x)?;
                Ok(xvx.opnorm()? / (nx * nx))
            }
            RatioKind::Contractivity => {
                let y = self.realize(&theta[self.per_element..]);
                let ny = y.opnorm()?;
                if ny == 0.0 {
                    return Ok(0.0);
                }
                Ok(x.matmul(&self.v_adj)?.matmul(&y)?.opnorm()? / (nx * ny))
            }
            RatioKind::Remark => {
                let y = self.realize(&theta[self.per_element..]);
                let ny = y.opnorm()?;
                if ny == 0.0 {
                    return Ok(0.0);
                }
                // the corner triple equals ½[0, Y V* X; 0, 0]
                Ok(0.5 * y.matmul(&self.v_adj)?.matmul(&x)?.opnorm()? / (nx * ny))
            }
        }
    }

    /// Parameters of `diag(v, ..., v)` repeated for each argument.
    fn v_start(&self) -> Result<Vec<f64>> {
        let el = self.ctx.space().element_from_realization(self.n, &self.v_real)?;
        let one: Vec<f64> = el.coefficients().iter().flat_map(|z| [z.re, z.im]).collect();
        Ok(one.repeat(self.kind.arity()))
    }

    fn witness(&self, theta: &[f64]) -> Inputs {
        self.kind
            .names()
            .iter()
            .enumerate()
            .map(|(k, name)| {
                let slice = &theta[k * self.per_element..(k + 1) * self.per_element];
                ((*name).to_string(), self.realize(slice))
            })
            .collect()
    }
}

fn normalize(theta: &mut [f64]) {
    let n = theta.iter().map(|t| t * t).sum::<f64>().sqrt();
    if n > 0.0 {
        theta.iter_mut().for_each(|t| *t /= n);
    }
}

/// Estimates the supremum of a ratio at level `n`.
///
/// Restart 0 starts at `V` (or `(V, V)`); the others start from complex
/// Gaussian coefficients. Each restart climbs along the normalized
/// central-difference gradient with step doubling on success and halving on
/// failure, accepting only increases. A restart converges when the step falls
/// below `1e-12`, the gradient vanishes, or ten steps gain less than `1e-10`
/// relative.
pub fn ratio_ascent(
    ctx: &ProductContext<'_>,
    kind: RatioKind,
    n: usize,
    budget: Budget,
    seed: u64,
    gate: Gate,
) -> Result<AscentReport> {
    if n == 0 {
        return Err(LabError::Unsupported("level must be at least 1".into()));
    }
    if let Gate::Enforce(tol) = gate {
        if ctx.cond_i_residual() > tol {
            return Err(LabError::Precondition(format!(
                "condition (i) residual {:e} exceeds {tol:e}",
                ctx.cond_i_residual()
            )));
        }
    }
    if budget.restarts == 0 {
        return Err(LabError::Unsupported("at least one restart is needed".into()));
    }
    let obj = RatioObjective::new(ctx, kind, n)?;
    let len = obj.params_len();
    let mut f = |theta: &[f64]| obj.eval(theta);

    // Candidates are compared by the recorded (replayable) ratio, so the
    // reported value is never below any start.
    let mut best: Option<(f64, Inputs)> = None;
    let mut best_start = f64::NEG_INFINITY;
    let mut converged_any = false;
    let consider = |theta: &[f64], best: &mut Option<(f64, Inputs)>| -> Result<f64> {
        let witness = obj.witness(theta);
        let value = ratio_from_witness(ctx, kind, n, &witness)?;
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            *best = Some((value, witness));
        }
        Ok(value)
    };
    for r in 0..budget.restarts {
        let mut theta = if r == 0 {
            obj.v_start()?
        } else {
            let mut rng = substream(seed, kind.stream_base() + 1_000 * n as u64 + r as u64);
            gaussian_vec(&mut rng, len / 2).iter().flat_map(|z| [z.re, z.im]).collect()
        };
        normalize(&mut theta);
        best_start = best_start.max(consider(&theta, &mut best)?);
        let mut value = f(&theta)?;
        let mut alpha = 0.1;
        let mut converged = false;
        let mut history = vec![value];
        for _ in 0..budget.steps {
            if history.len() > STALL_WINDOW {
                let past = history[history.len() - 1 - STALL_WINDOW];
                if value - past <= STALL_GAIN * value.abs().max(1e-300) {
                    converged = true;
                    break;
                }
            }
            let grad = numerical_gradient(&mut f, &theta, FD_STEP)?;
            let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if gnorm < 1e-12 {
                converged = true;
                break;
            }
            let mut accepted = false;
            while alpha >= MIN_STEP {
                let mut trial: Vec<f64> = theta.iter().zip(&grad).map(|(t, g)| t + alpha * g / gnorm).collect();
                normalize(&mut trial);
                let tv = f(&trial)?;
                if tv > value {
                    theta = trial;
                    value = tv;
                    history.push(value);
                    alpha = (alpha * 2.0).min(1.0);
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted {
                converged = true;
                break;
            }
        }
        converged_any |= converged;
        consider(&theta, &mut best)?;
    }

    let (ratio, witness) = best.expect("at least one restart");
    let threshold = kind.bound() + RATIO_SLACK;
    let status = if ratio > threshold {
        Status::Fail
    } else if converged_any {
        Status::Pass
    } else {
        Status::Inconclusive
    };
    Ok(AscentReport {
        kind,
        level: n,
        ratio,
        threshold,
        witness,
        best_start,
        converged: converged_any,
        status,
    })
}

/// Condition (ii): `sup ‖{X, V, X}‖ / ‖X‖²` over `M_n(A)`.
pub fn check_condition_ii(ctx: &ProductContext<'_>, n: usize, budget: Budget, seed: u64, gate: Gate) -> Result<AscentReport> {
    ratio_ascent(ctx, RatioKind::ConditionIi, n, budget, seed, gate)
}

/// `sup ‖X·Y‖ / (‖X‖ ‖Y‖)` over `M_n(A)`.
pub fn check_complete_contractivity(ctx: &ProductContext<'_>, n: usize, budget: Budget, seed: u64, gate: Gate) -> Result<AscentReport> {
    ratio_ascent(ctx, RatioKind::Contractivity, n, budget, seed, gate)
}

/// `sup ‖{[Y,0;0,0], [V,0;0,0], [0,X;0,0]}‖ / (‖X‖ ‖Y‖)` over `M_n(A)`.
pub fn check_remark_bound(ctx: &ProductContext<'_>, n: usize, budget: Budget, seed: u64, gate: Gate) -> Result<AscentReport> {
    ratio_ascent(ctx, RatioKind::Remark, n, budget, seed, gate)
}

// ---------------------------------------------------------------------------
// Reports

/// Ratio checks across levels `1..=n_max`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatioSummary {
    pub ratio: f64,
    pub witness: Inputs,
    pub level: usize,
    pub budget: Budget,
    pub seed: u64,
    pub levels: Vec<AscentReport>,
    pub status: Status,
}

impl RatioSummary {
    fn from_levels(levels: Vec<AscentReport>, budget: Budget, seed: u64) -> Self {
        let worst = levels
            .iter()
            .max_by(|a, b| (a.ratio - a.threshold).total_cmp(&(b.ratio - b.threshold)))
            .expect("at least one level");
        let status = levels.iter().fold(Status::Pass, |s, l| s.merge(l.status));
        Self {
            ratio: worst.ratio,
            witness: worst.witness.clone(),
            level: worst.level,
            budget,
            seed,
            levels,
            status,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    pub summary: String,
}

/// Everything needed to re-evaluate a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub space: SpaceFile,
    pub v: ComplexMatrix,
    pub v_fingerprint: String,
    pub restriction: Option<Restriction>,
    pub unit: Option<UnitCandidate>,
    pub cases: Vec<CaseReport>,
    pub condition_i: ConditionIReport,
    pub condition_ii: Option<RatioSummary>,
    pub contractivity: Option<RatioSummary>,
    pub remark: Option<RatioSummary>,
    pub notes: Vec<String>,
    pub verdict: Verdict,
}

/// What to run.
#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub lemmas: bool,
    pub conditions: bool,
    pub trials: usize,
    pub n_max: usize,
    pub budget: Budget,
    pub seed: u64,
    pub tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            lemmas: true,
            conditions: true,
            trials: 1000,
            n_max: 3,
            budget: Budget::default(),
            seed: 0,
            tol: DEFAULT_TOL,
        }
    }
}

pub const VERDICT_PASS: &str = "unital operator algebra conditions satisfied";

/// Runs the requested checks and assembles a report.
pub fn verify(space: &OperatorSpace, unit: Option<UnitCandidate>, v: ComplexMatrix, opts: &VerifyOptions) -> Result<VerificationReport> {
    if opts.trials == 0 || opts.n_max == 0 || opts.tol.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(LabError::Unsupported("trials and n_max must be at least 1 and tol positive".into()));
    }
    let ctx = ProductContext::new(space, v.clone())?;
    let restriction = justify(space, std::slice::from_ref(&v))?;
    let mut notes = Vec::new();
    if restriction.is_none() {
        notes.push("partial triple products assumed to be ambient restrictions".to_string());
    }
    let condition_i = check_condition_i(&ctx, opts.tol)?;
    let mut status = condition_i.status;

    let cases = if opts.lemmas && condition_i.status == Status::Pass {
        run_lemma_suite(&ctx, opts.trials, opts.seed)?
    } else {
        if opts.lemmas {
            notes.push("lemma suite skipped: condition (i) fails".to_string());
        }
        Vec::new()
    };
    for c in &cases {
        status = status.merge(c.status);
    }

    let (mut condition_ii, mut contractivity, mut remark) = (None, None, None);
    if opts.conditions && condition_i.status == Status::Pass {
        let gate = Gate::Enforce(opts.tol);
        let run = |kind| -> Result<RatioSummary> {
            let levels = (1..=opts.n_max)
                .map(|n| ratio_ascent(&ctx, kind, n, opts.budget, opts.seed, gate))
                .collect::<Result<Vec<_>>>()?;
            Ok(RatioSummary::from_levels(levels, opts.budget, opts.seed))
        };
        let ii = run(RatioKind::ConditionIi)?;
        let cc = run(RatioKind::Contractivity)?;
        let rm = run(RatioKind::Remark)?;
        status = status.merge(ii.status).merge(cc.status).merge(rm.status);
        condition_ii = Some(ii);
        contractivity = Some(cc);
        remark = Some(rm);
    } else if opts.conditions {
        notes.push("ratio checks skipped: condition (i) fails".to_string());
    }

    let summary = match status {
        Status::Pass if opts.conditions => VERDICT_PASS.to_string(),
        Status::Pass => "all requested checks passed".to_string(),
        Status::Fail if condition_i.status == Status::Fail => format!(
            "condition (i) fails with residual {:e} at basis element {}",
            condition_i.residual, condition_i.witness_index
        ),
        Status::Fail => "a check failed; see witnesses".to_string(),
        Status::Inconclusive => "no violation found but an ascent did not converge within budget".to_string(),
    };
    Ok(VerificationReport {
        space: space.to_file(),
        v_fingerprint: v.fingerprint(),
        v,
        restriction,
        unit,
        cases,
        condition_i,
        condition_ii,
        contractivity,
        remark,
        notes,
        verdict: Verdict { status, summary },
    })
}

/// One re-evaluated witness.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplayEntry {
    pub label: String,
    pub recorded: f64,
    pub replayed: f64,
}

impl ReplayEntry {
    pub fn deviation(&self) -> f64 {
        (self.recorded - self.replayed).abs()
    }
}

/// Re-evaluates every witness of a report.
pub fn replay(report: &VerificationReport) -> Result<Vec<ReplayEntry>> {
    let space = report.space.clone().into_space()?;
    let ctx = ProductContext::new(&space, report.v.clone())?;
    let mut out = Vec::new();
    let ci = check_condition_i(&ctx, DEFAULT_TOL)?;
    out.push(ReplayEntry {
        label: "condition_i".into(),
        recorded: report.condition_i.residual,
        replayed: ci.residual,
    });
    for c in &report.cases {
        let case = lemma_case(&c.id).ok_or_else(|| LabError::Precondition(format!("unknown case {}", c.id)))?;
        out.push(ReplayEntry {
            label: c.id.clone(),
            recorded: c.max_residual,
            replayed: case.residual(&ctx, &c.witness)?,
        });
    }
    for summary in [&report.condition_ii, &report.contractivity, &report.remark].into_iter().flatten() {
        for l in &summary.levels {
            out.push(ReplayEntry {
                label: format!("{}@{}", serde_json::to_value(l.kind)?.as_str().unwrap_or("ratio"), l.level),
                recorded: l.ratio,
                replayed: ratio_from_witness(&ctx, l.kind, l.level, &l.witness)?,
            });
        }
    }
    Ok(out)
}
