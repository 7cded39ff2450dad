//! Constructive generation of admissible* sets of any size.
//!
//! Three quantities close every set: given the first `n − 1` cells, the last
//! cell's `a_n, b_n, c_n, d_n` follow from the marginals ([`complete_tail`]).
//! Where an existence argument lets a cell mass tend to zero, the constructor
//! walks a geometric schedule instead and re-checks every strict inequality
//! exactly at each step.
//!
//! *Literal* mode produces sets satisfying the admissible* conditions only.
//! *Realizable* mode additionally pins the joint sum `Σ c_i d_i` to
//! `p(A∧B)`, which an embedding into an extension space requires.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::admissibility::{check_admissible_star, AdmissibleStarSet};
use crate::error::{Error, Result};
use crate::rational::{self, ratio, Rational};
use crate::space::CorrelationSummary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Literal,
    Realizable,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(Mode::Literal),
            "realizable" => Ok(Mode::Realizable),
            other => Err(Error::Parse(format!("unknown mode {other:?}"))),
        }
    }
}

/// Geometric retry schedule: trial `r` uses `epsilon · shrink^r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    #[serde(with = "rational::serde_str")]
    pub epsilon: Rational,
    #[serde(with = "rational::serde_str")]
    pub shrink: Rational,
    pub max_retries: u32,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            epsilon: ratio(1, 64),
            shrink: ratio(1, 2),
            max_retries: 64,
        }
    }
}

impl Schedule {
    fn validate(&self) -> Result<()> {
        if !self.epsilon.is_positive() {
            return Err(Error::InvalidSchedule(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if !rational::in_open_unit(&self.shrink) {
            return Err(Error::InvalidSchedule(format!(
                "shrink factor must lie in (0, 1), got {}",
                self.shrink
            )));
        }
        Ok(())
    }

    /// Values `epsilon · shrink^r` for `r = 0..max_retries`.
    fn trials(&self) -> impl Iterator<Item = Rational> + '_ {
        std::iter::successors(Some(self.epsilon.clone()), |e| Some(e * &self.shrink))
            .take(self.max_retries as usize)
    }
}

/// Caller-pinned two-cell core for realizable mode: the low cell's mass and
/// its `p(A|C)`. The matching `p(B|C)` is solved from the joint sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreChoice {
    #[serde(with = "rational::serde_str")]
    pub c: Rational,
    #[serde(with = "rational::serde_str")]
    pub a: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstructionRequest {
    pub target: CorrelationSummary,
    pub n: usize,
    pub mode: Mode,
    pub schedule: Schedule,
    /// Realizable mode only; `None` searches the grid.
    pub core: Option<CoreChoice>,
}

impl ConstructionRequest {
    pub fn new(target: CorrelationSummary, n: usize, mode: Mode) -> Self {
        ConstructionRequest {
            target,
            n,
            mode,
            schedule: Schedule::default(),
            core: None,
        }
    }

    pub fn with_core(mut self, c: Rational, a: Rational) -> Self {
        self.core = Some(CoreChoice { c, a });
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RequestJson =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Ok(ConstructionRequest {
            target: CorrelationSummary::from_marginals(raw.target.a, raw.target.b, raw.target.p_ab),
            n: raw.n,
            mode: raw.mode,
            schedule: raw.schedule.unwrap_or_default(),
            core: raw.core,
        })
    }

    pub fn to_json(&self) -> String {
        let raw = RequestJson {
            target: TargetJson {
                a: self.target.a.clone(),
                b: self.target.b.clone(),
                p_ab: self.target.p_ab.clone(),
            },
            n: self.n,
            mode: self.mode,
            schedule: Some(self.schedule.clone()),
            core: self.core.clone(),
        };
        serde_json::to_string_pretty(&raw).expect("request serializes")
    }
}

#[derive(Serialize, Deserialize)]
struct TargetJson {
    #[serde(with = "rational::serde_str")]
    a: Rational,
    #[serde(with = "rational::serde_str")]
    b: Rational,
    #[serde(rename = "pAB", with = "rational::serde_str")]
    p_ab: Rational,
}

#[derive(Serialize, Deserialize)]
struct RequestJson {
    target: TargetJson,
    n: usize,
    mode: Mode,
    #[serde(default)]
    schedule: Option<Schedule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    core: Option<CoreChoice>,
}

/// The last cell of an admissible* set, determined by the first `n − 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailCompletion {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    pub d: Rational,
}

/// Close a set given its leading cells:
/// `c_n = 1 − Σc_k`, `a_n = (a − Σc_k a_k)/c_n`, `b_n = (b − Σc_k b_k)/c_n`
/// and `d_n = (a − Σa_k c_k)(b − Σb_k c_k)/c_n²`.
pub fn complete_tail(
    a: &[Rational],
    b: &[Rational],
    c: &[Rational],
    target: &CorrelationSummary,
) -> Result<TailCompletion> {
    if a.len() != c.len() || b.len() != c.len() {
        return Err(Error::InvalidInput(format!(
            "leading lists differ in length: a={}, b={}, c={}",
            a.len(),
            b.len(),
            c.len()
        )));
    }
    let used: Rational = c.iter().sum();
    if used >= Rational::one() {
        return Err(Error::DegenerateTail(rational::format(&used)));
    }
    let rest = Rational::one() - used;
    let a_rest = &target.a - dot(a, c);
    let b_rest = &target.b - dot(b, c);
    let d = &a_rest * &b_rest / (&rest * &rest);
    Ok(TailCompletion {
        a: a_rest / &rest,
        b: b_rest / &rest,
        c: rest,
        d,
    })
}

fn dot(x: &[Rational], y: &[Rational]) -> Rational {
    x.iter().zip(y).map(|(x, y)| x * y).sum()
}

/// Solve for `b_{n−1}` so that, after tail completion, `Σ c_i a_i b_i`
/// equals `p(A∧B)`. The joint sum is affine in `b_{n−1}` with slope
/// `c_{n−1}(a_{n−1} − a_n)`.
///
/// `a` and `c` hold the first `n − 1` cells, `b` the first `n − 2`.
pub fn solve_joint_constraint(
    a: &[Rational],
    b: &[Rational],
    c: &[Rational],
    target: &CorrelationSummary,
) -> Result<Rational> {
    let m = c.len();
    if m == 0 || a.len() != m || b.len() + 1 != m {
        return Err(Error::InvalidInput(format!(
            "expected a and c of length n-1 and b of length n-2, got a={}, b={}, c={}",
            a.len(),
            b.len(),
            m
        )));
    }
    let used: Rational = c.iter().sum();
    if used >= Rational::one() {
        return Err(Error::DegenerateTail(rational::format(&used)));
    }
    let rest = Rational::one() - &used;
    let a_last = (&target.a - dot(a, c)) / &rest;
    let (fixed_c, last_c) = c.split_at(m - 1);
    let last_c = &last_c[0];
    let last_a = &a[m - 1];
    let slope = last_c * (last_a - &a_last);
    if slope.is_zero() {
        return Err(Error::SingularSolve);
    }
    let fixed_joint: Rational = (0..m - 1).map(|k| &fixed_c[k] * &a[k] * &b[k]).sum();
    let fixed_b = dot(b, fixed_c);
    let intercept = fixed_joint + &a_last * (&target.b - fixed_b);
    Ok((&target.p_ab - intercept) / slope)
}

/// Two-cell skeleton `(c, a_lo, b_lo)` of a realizable set: one cell of mass
/// `c` with conditionals below the marginals, and its complement above.
#[derive(Debug, Clone, PartialEq)]
struct Core {
    mass: Rational,
    a: Rational,
    b: Rational,
}

const GRID_DEPTH: u32 = 16;

fn min(x: Rational, y: Rational) -> Rational {
    if x <= y {
        x
    } else {
        y
    }
}

/// Feasible core for low-cell mass `c`, if any.
///
/// With `t = (1 − c)/c` and `x = a − a_lo`, the joint constraint on two
/// screening cells reads `x·(b − b_lo) = γ t`; the bounds `0 < a_lo`,
/// `a_hi < 1` give `x < min(a, (1 − a)t)` and likewise for `b`. The midpoint
/// of the admissible `x` interval is taken.
fn core_at(target: &CorrelationSummary, c: &Rational) -> Option<Core> {
    let t = (Rational::one() - c) / c;
    let gt = &target.gamma * &t;
    let lo = &gt / min(target.b.clone(), (Rational::one() - &target.b) * &t);
    let hi = min(target.a.clone(), (Rational::one() - &target.a) * &t);
    if lo >= hi {
        return None;
    }
    let x = (lo + hi) / rational::int(2);
    let y = gt / &x;
    Some(Core {
        mass: c.clone(),
        a: &target.a - x,
        b: &target.b - y,
    })
}

/// First feasible point of the dyadic grid `k/2^level · (1 − max(a, b))`,
/// odd `k`, levels refined one at a time.
fn find_core(target: &CorrelationSummary) -> Option<Core> {
    let upper = Rational::one() - std::cmp::max(&target.a, &target.b);
    (1..=GRID_DEPTH).find_map(|level| {
        let den = BigInt::from(1u64 << level);
        (1u64..(1u64 << level)).step_by(2).find_map(|k| {
            let c = &upper * Rational::new(BigInt::from(k), den.clone());
            core_at(target, &c)
        })
    })
}

fn pinned_core(target: &CorrelationSummary, choice: &CoreChoice) -> Result<Core> {
    if !rational::in_open_unit(&choice.c) || !rational::in_open_unit(&choice.a) {
        return Err(Error::InvalidInput(format!(
            "core choice c={}, a={} must lie in (0, 1)",
            choice.c, choice.a
        )));
    }
    let b = solve_joint_constraint(
        std::slice::from_ref(&choice.a),
        &[],
        std::slice::from_ref(&choice.c),
        target,
    )?;
    Ok(Core {
        mass: choice.c.clone(),
        a: choice.a.clone(),
        b,
    })
}

fn assemble(
    mut a: Vec<Rational>,
    mut b: Vec<Rational>,
    mut c: Vec<Rational>,
    target: &CorrelationSummary,
) -> Result<AdmissibleStarSet> {
    let tail = complete_tail(&a, &b, &c, target)?;
    a.push(tail.a);
    b.push(tail.b);
    c.push(tail.c);
    let d = a.iter().zip(&b).map(|(x, y)| x * y).collect();
    Ok(AdmissibleStarSet {
        a,
        b,
        c,
        d,
        target: target.clone(),
    })
}

fn accept(set: &AdmissibleStarSet, mode: Mode) -> bool {
    let report = check_admissible_star(set);
    report.verdict && (mode == Mode::Literal || report.joint_sum_matches)
}

fn realizable(req: &ConstructionRequest) -> Result<AdmissibleStarSet> {
    let target = &req.target;
    if let Some(q) = target.zero_quadrant() {
        return Err(Error::StrictCorrelationUnsupported {
            quadrant: q.name().to_string(),
        });
    }
    let core = match &req.core {
        Some(choice) => pinned_core(target, choice)?,
        None => find_core(target).ok_or(Error::NoFeasibleParameters { retries: 0 })?,
    };
    let n = req.n;
    let spread =
        |lo: &Rational, hi: &Rational, i: usize| lo + (hi - lo) * ratio(i as i64, (n - 1) as i64);

    let attempt = |eps: &Rational| -> Result<AdmissibleStarSet> {
        let mut c = Vec::with_capacity(n);
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        let mut cell = eps.clone();
        for i in 1..=n - 2 {
            cell /= rational::int(2);
            c.push(cell.clone());
            a.push(spread(&core.a, &target.a, i));
            b.push(spread(&core.b, &target.b, i));
        }
        c.push(core.mass.clone());
        a.push(core.a.clone());
        let b_low = solve_joint_constraint(&a, &b, &c, target)?;
        b.push(b_low);
        assemble(a, b, c, target)
    };

    if n == 2 {
        // no small cells, so the schedule plays no role
        let set = attempt(&Rational::zero())?;
        return if accept(&set, Mode::Realizable) {
            Ok(set)
        } else {
            Err(Error::NoFeasibleParameters { retries: 1 })
        };
    }
    let mut tried = 0;
    for eps in req.schedule.trials() {
        tried += 1;
        match attempt(&eps) {
            Ok(set) if accept(&set, Mode::Realizable) => return Ok(set),
            Ok(_) | Err(Error::DegenerateTail(_)) | Err(Error::SingularSolve) => {}
            Err(e) => return Err(e),
        }
    }
    Err(Error::NoFeasibleParameters { retries: tried })
}

/// Induction on size: a two-cell base with a vanishing first cell, then at
/// each step keep all but the last cell, add a cell below all of them in
/// `a`, `b` and `c`, and re-complete the tail.
fn literal(req: &ConstructionRequest) -> Result<AdmissibleStarSet> {
    let target = &req.target;
    let half = ratio(1, 2);
    let mut tried = 0;

    let mut current = None;
    for eps in req.schedule.trials() {
        tried += 1;
        let set = assemble(
            vec![&target.a * &half],
            vec![&target.b * &half],
            vec![eps],
            target,
        );
        match set {
            Ok(set) if accept(&set, Mode::Literal) => {
                current = Some(set);
                break;
            }
            Ok(_) | Err(Error::DegenerateTail(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let mut current = current.ok_or(Error::NoFeasibleParameters { retries: tried })?;

    while current.n() < req.n {
        let keep = current.n() - 1;
        let smallest = |xs: &[Rational]| xs[..keep].iter().min().cloned().expect("nonempty");
        let a_new = smallest(&current.a) * &half;
        let b_new = smallest(&current.b) * &half;
        let c_floor = smallest(&current.c);
        let mut next = None;
        let mut c_new = c_floor;
        for _ in 0..req.schedule.max_retries {
            tried += 1;
            c_new *= &req.schedule.shrink;
            let mut a = current.a[..keep].to_vec();
            let mut b = current.b[..keep].to_vec();
            let mut c = current.c[..keep].to_vec();
            a.push(a_new.clone());
            b.push(b_new.clone());
            c.push(c_new.clone());
            match assemble(a, b, c, target) {
                Ok(set) if accept(&set, Mode::Literal) => {
                    next = Some(set);
                    break;
                }
                Ok(_) | Err(Error::DegenerateTail(_)) => {}
                Err(e) => return Err(e),
            }
        }
        current = next.ok_or(Error::NoFeasibleParameters { retries: tried })?;
    }
    Ok(current)
}

/// Construct an admissible* set of size `req.n` for the target pair.
///
/// Every returned set has passed [`check_admissible_star`]; in realizable
/// mode its joint sum also equals `p(A∧B)`.
pub fn construct_admissible_star(req: &ConstructionRequest) -> Result<AdmissibleStarSet> {
    if req.n < 2 {
        return Err(Error::SizeTooSmall(req.n));
    }
    if !req.target.is_consistent() {
        return Err(Error::InvalidInput(format!(
            "marginals a={}, b={}, pAB={} admit no joint distribution",
            req.target.a, req.target.b, req.target.p_ab
        )));
    }
    if !req.target.gamma.is_positive() {
        return Err(Error::NotCorrelated(rational::format(&req.target.gamma)));
    }
    req.schedule.validate()?;
    if req.core.is_some() && req.mode == Mode::Literal {
        return Err(Error::InvalidInput(
            "a core choice applies to realizable mode only".into(),
        ));
    }
    match req.mode {
        Mode::Literal => literal(req),
        Mode::Realizable => realizable(req),
    }
}
