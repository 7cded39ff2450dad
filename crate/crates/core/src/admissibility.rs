//! Admissible and admissible* number sets, their checkers, and the
//! cancellation diagnosis.
//!
//! An *admissible* set is `3n` numbers `(a_i, b_i, c_i)` constrained only
//! through the joint sum `Σ a_i b_i c_i = p(A∧B)`. That constraint lets
//! per-cell screening defects of opposite sign cancel, so admissibility does
//! not imply screening off. An *admissible** set adds `d_i` with
//! `d_i = a_i b_i` cell by cell, which does.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::forks::cell_profiles;
use crate::rational::{self, in_closed_unit, in_open_unit, Rational};
use crate::space::{CorrelationSummary, Event, Partition, ProbSpace, Quadrant, SpaceDocument};

/// `3n` numbers: cell masses `c`, and conditionals `a`, `b` of A and B.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibleSet {
    pub a: Vec<Rational>,
    pub b: Vec<Rational>,
    pub c: Vec<Rational>,
    pub target: CorrelationSummary,
}

impl AdmissibleSet {
    pub fn n(&self) -> usize {
        self.c.len()
    }
}

/// `4n` numbers: `AdmissibleSet` plus joint conditionals `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibleStarSet {
    pub a: Vec<Rational>,
    pub b: Vec<Rational>,
    pub c: Vec<Rational>,
    pub d: Vec<Rational>,
    pub target: CorrelationSummary,
}

impl AdmissibleStarSet {
    /// Build a set, checking that all four lists have one common length ≥ 2.
    pub fn new(
        a: Vec<Rational>,
        b: Vec<Rational>,
        c: Vec<Rational>,
        d: Vec<Rational>,
        target: CorrelationSummary,
    ) -> Result<Self> {
        let n = c.len();
        if a.len() != n || b.len() != n || d.len() != n {
            return Err(Error::Parse(format!(
                "list lengths differ: a={}, b={}, c={}, d={}",
                a.len(),
                b.len(),
                n,
                d.len()
            )));
        }
        if n < 2 {
            return Err(Error::SizeTooSmall(n));
        }
        Ok(AdmissibleStarSet { a, b, c, d, target })
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    /// `Σ c_i d_i`, the value `p(A∧B)` would take in a realization.
    pub fn joint_sum(&self) -> Rational {
        self.c.iter().zip(&self.d).map(|(c, d)| c * d).sum()
    }

    /// Drop the `d_i`.
    pub fn to_admissible(&self) -> AdmissibleSet {
        AdmissibleSet {
            a: self.a.clone(),
            b: self.b.clone(),
            c: self.c.clone(),
            target: self.target.clone(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("set serializes")
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
struct StarSetJson {
    n: usize,
    #[serde(with = "rational::serde_str::vec")]
    a: Vec<Rational>,
    #[serde(with = "rational::serde_str::vec")]
    b: Vec<Rational>,
    #[serde(with = "rational::serde_str::vec")]
    c: Vec<Rational>,
    #[serde(with = "rational::serde_str::vec")]
    d: Vec<Rational>,
    target: TargetJson,
}

impl Serialize for AdmissibleStarSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        StarSetJson {
            n: self.n(),
            a: self.a.clone(),
            b: self.b.clone(),
            c: self.c.clone(),
            d: self.d.clone(),
            target: TargetJson {
                a: self.target.a.clone(),
                b: self.target.b.clone(),
                p_ab: self.target.p_ab.clone(),
            },
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for AdmissibleStarSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = StarSetJson::deserialize(d)?;
        if raw.c.len() != raw.n {
            return Err(D::Error::custom(format!(
                "n = {} but {} cell masses given",
                raw.n,
                raw.c.len()
            )));
        }
        let target =
            CorrelationSummary::from_marginals(raw.target.a, raw.target.b, raw.target.p_ab);
        AdmissibleStarSet::new(raw.a, raw.b, raw.c, raw.d, target).map_err(D::Error::custom)
    }
}

/// One condition of a checker report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckItem {
    pub id: &'static str,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckItem {
    fn new(id: &'static str, holds: bool) -> Self {
        CheckItem {
            id,
            holds,
            detail: None,
        }
    }

    fn equality(id: &'static str, lhs: &Rational, rhs: &Rational) -> Self {
        CheckItem {
            id,
            holds: lhs == rhs,
            detail: (lhs != rhs).then(|| format!("{lhs} != {rhs}")),
        }
    }

    fn failing(id: &'static str, bad: Vec<String>) -> Self {
        CheckItem {
            id,
            holds: bad.is_empty(),
            detail: (!bad.is_empty()).then(|| bad.join("; ")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub n: usize,
    pub conditions: Vec<CheckItem>,
    /// `Σ c_i d_i` (admissible*) or `Σ a_i b_i c_i` (admissible).
    #[serde(with = "rational::serde_str")]
    pub joint_sum: Rational,
    pub joint_sum_matches: bool,
    pub verdict: bool,
}

impl AdmissibilityReport {
    pub fn failed(&self) -> Vec<&'static str> {
        self.conditions
            .iter()
            .filter(|c| !c.holds)
            .map(|c| c.id)
            .collect()
    }
}

fn weighted_sum(x: &[Rational], c: &[Rational]) -> Rational {
    x.iter().zip(c).map(|(x, c)| x * c).sum()
}

fn ordering_violations(a: &[Rational], b: &[Rational]) -> Vec<String> {
    let mut bad = Vec::new();
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            let prod = (&a[i] - &a[j]) * (&b[i] - &b[j]);
            if !prod.is_positive() {
                bad.push(format!("cells {},{}: {prod}", i + 1, j + 1));
            }
        }
    }
    bad
}

fn bound_violations(name: &str, xs: &[Rational], ok: impl Fn(&Rational) -> bool) -> Vec<String> {
    xs.iter()
        .enumerate()
        .filter(|(_, x)| !ok(x))
        .map(|(i, x)| format!("{name}_{} = {x}", i + 1))
        .collect()
}

fn same_length(n: usize, lists: &[&[Rational]]) -> bool {
    n >= 2 && lists.iter().all(|l| l.len() == n)
}

/// Evaluate the original admissibility conditions. Bounds on `a_i, b_i` are
/// closed; bounds on `c_i` are open.
pub fn check_admissible(s: &AdmissibleSet) -> AdmissibilityReport {
    let n = s.n();
    let t = &s.target;
    let shape = same_length(n, &[&s.a, &s.b]);
    let joint_sum: Rational = if shape {
        (0..n).map(|i| &s.a[i] * &s.b[i] * &s.c[i]).sum()
    } else {
        Rational::zero()
    };
    let mut conditions = vec![CheckItem::new("size", shape)];
    if shape {
        let mut bounds = bound_violations("a", &s.a, in_closed_unit);
        bounds.extend(bound_violations("b", &s.b, in_closed_unit));
        conditions.extend([
            CheckItem::equality("sum_a", &weighted_sum(&s.a, &s.c), &t.a),
            CheckItem::equality("sum_b", &weighted_sum(&s.b, &s.c), &t.b),
            CheckItem::equality("sum_ab", &joint_sum, &t.p_ab),
            CheckItem::equality("sum_c", &s.c.iter().sum(), &Rational::one()),
            CheckItem::failing("ordering", ordering_violations(&s.a, &s.b)),
            CheckItem::failing("bounds_ab", bounds),
            CheckItem::failing("bounds_c", bound_violations("c", &s.c, in_open_unit)),
        ]);
    }
    let verdict = conditions.iter().all(|c| c.holds);
    AdmissibilityReport {
        n,
        joint_sum_matches: shape && joint_sum == t.p_ab,
        joint_sum,
        conditions,
        verdict,
    }
}

/// Evaluate the admissible* conditions. The joint-sum condition is reported
/// separately in `joint_sum_matches` and does not enter the verdict.
pub fn check_admissible_star(s: &AdmissibleStarSet) -> AdmissibilityReport {
    let n = s.n();
    let t = &s.target;
    let shape = same_length(n, &[&s.a, &s.b, &s.d]);
    let joint_sum = if shape {
        s.joint_sum()
    } else {
        Rational::zero()
    };
    let mut conditions = vec![CheckItem::new("size", shape)];
    if shape {
        let products: Vec<String> = (0..n)
            .filter(|&i| s.d[i] != &s.a[i] * &s.b[i])
            .map(|i| {
                format!(
                    "d_{0} = {1} but a_{0} b_{0} = {2}",
                    i + 1,
                    s.d[i],
                    &s.a[i] * &s.b[i]
                )
            })
            .collect();
        let mut bounds = bound_violations("a", &s.a, in_open_unit);
        bounds.extend(bound_violations("b", &s.b, in_open_unit));
        bounds.extend(bound_violations("d", &s.d, in_open_unit));
        conditions.extend([
            CheckItem::equality("sum_a", &weighted_sum(&s.a, &s.c), &t.a),
            CheckItem::equality("sum_b", &weighted_sum(&s.b, &s.c), &t.b),
            CheckItem::equality("sum_c", &s.c.iter().sum(), &Rational::one()),
            CheckItem::failing("product_d", products),
            CheckItem::failing("ordering", ordering_violations(&s.a, &s.b)),
            CheckItem::failing("bounds_abd", bounds),
            CheckItem::failing("bounds_c", bound_violations("c", &s.c, in_open_unit)),
        ]);
    }
    let verdict = conditions.iter().all(|c| c.holds);
    AdmissibilityReport {
        n,
        joint_sum_matches: shape && joint_sum == t.p_ab,
        joint_sum,
        conditions,
        verdict,
    }
}

/// Read off `c_i = p(C_i)`, `a_i = p(A|C_i)`, `b_i = p(B|C_i)` and
/// `d_i = p(A∧B|C_i)` from a partition of positive-measure cells.
pub fn extract_admissible_star(
    space: &ProbSpace,
    a: &Event,
    b: &Event,
    partition: &Partition,
) -> Result<AdmissibleStarSet> {
    let target = space.correlation_summary(a, b)?;
    let profiles = cell_profiles(space, a, b, partition)?
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::ZeroMeasureCondition("0".into()))?;
    let mut set = AdmissibleStarSet {
        a: Vec::with_capacity(profiles.len()),
        b: Vec::with_capacity(profiles.len()),
        c: Vec::with_capacity(profiles.len()),
        d: Vec::with_capacity(profiles.len()),
        target,
    };
    for p in profiles {
        set.a.push(p.a);
        set.b.push(p.b);
        set.c.push(p.mass);
        set.d.push(p.ab);
    }
    Ok(set)
}

/// Decide "is an RCCS" through the admissible* characterization: the
/// extracted numbers exist and pass the admissible* checker.
pub fn rccs_via_admissible_star(
    space: &ProbSpace,
    a: &Event,
    b: &Event,
    partition: &Partition,
) -> Result<bool> {
    if partition.len() < 2 {
        return Err(Error::SizeTooSmall(partition.len()));
    }
    match extract_admissible_star(space, a, b, partition) {
        Ok(set) => Ok(check_admissible_star(&set).verdict),
        Err(Error::ZeroMeasureCondition(_)) => Ok(false),
        Err(e) => Err(e),
    }
}

pub const NOT_SUFFICIENT_NOTE: &str = "screening off in every cell implies the joint-sum \
     condition, but the joint-sum condition does not imply screening off: per-cell defects \
     of opposite sign can cancel";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosisReport {
    /// `p(X∧Y|Z_i) − p(X|Z_i)p(Y|Z_i)` per cell.
    #[serde(with = "rational::serde_str::vec")]
    pub residuals: Vec<Rational>,
    /// `p(Z_i)` times the residual.
    #[serde(with = "rational::serde_str::vec")]
    pub defects: Vec<Rational>,
    /// Sum of `defects`; zero exactly when the joint-sum condition holds.
    #[serde(with = "rational::serde_str")]
    pub defect_sum: Rational,
    pub admissible: bool,
    pub screening: bool,
    /// Admissible but not screening off: the cancellation phenomenon.
    pub cancellation: bool,
    pub note: &'static str,
}

/// Per-cell screening defects and how they combine.
pub fn diagnose_cancellation(
    space: &ProbSpace,
    x: &Event,
    y: &Event,
    partition: &Partition,
) -> Result<DiagnosisReport> {
    let target = space.correlation_summary(x, y)?;
    let profiles = cell_profiles(space, x, y, partition)?
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::ZeroMeasureCondition("0".into()))?;
    let residuals: Vec<Rational> = profiles.iter().map(|p| p.residual()).collect();
    let defects: Vec<Rational> = profiles
        .iter()
        .zip(&residuals)
        .map(|(p, r)| &p.mass * r)
        .collect();
    let defect_sum = defects.iter().sum();
    let admissible = check_admissible(&AdmissibleSet {
        a: profiles.iter().map(|p| p.a.clone()).collect(),
        b: profiles.iter().map(|p| p.b.clone()).collect(),
        c: profiles.iter().map(|p| p.mass.clone()).collect(),
        target,
    })
    .verdict;
    let screening = residuals.iter().all(Zero::is_zero);
    Ok(DiagnosisReport {
        residuals,
        defects,
        defect_sum,
        admissible,
        screening,
        cancellation: admissible && !screening,
        note: NOT_SUFFICIENT_NOTE,
    })
}

/// Per-cell data `(c_i, a_i, b_i, d_i)` used to lay out a space.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSpec {
    pub mass: Rational,
    pub a: Rational,
    pub b: Rational,
    pub ab: Rational,
}

/// A space realizing prescribed cell data, with its pair and partition.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub space: ProbSpace,
    pub a: Event,
    pub b: Event,
    pub partition: Partition,
}

impl Realization {
    /// Space file with events `A`, `B`, `C1..Cn`.
    pub fn document(&self) -> SpaceDocument {
        let mut doc = SpaceDocument::new(self.space.clone());
        doc.events.insert("A".into(), self.a.clone());
        doc.events.insert("B".into(), self.b.clone());
        for (i, cell) in self.partition.cells().iter().enumerate() {
            doc.events.insert(format!("C{}", i + 1), cell.clone());
        }
        doc
    }
}

/// Lay out one atom per (cell, quadrant) with weights
/// `c·d, c·(a − d), c·(b − d), c·(1 − a − b + d)`.
pub fn realize_cells(cells: &[CellSpec]) -> Result<Realization> {
    let mut atoms = Vec::with_capacity(cells.len() * 4);
    for (i, cell) in cells.iter().enumerate() {
        let within = [
            cell.ab.clone(),
            &cell.a - &cell.ab,
            &cell.b - &cell.ab,
            Rational::one() - &cell.a - &cell.b + &cell.ab,
        ];
        for q in Quadrant::ALL {
            let w = &within[q.index()];
            if w.is_negative() {
                return Err(Error::InvalidSpace(format!(
                    "cell {} quadrant {q} would get negative weight {w}",
                    i + 1
                )));
            }
            atoms.push((format!("C{}.{}", i + 1, q.name()), &cell.mass * w));
        }
    }
    let space = ProbSpace::new(atoms)?;
    let pick = |keep: &dyn Fn(usize, Quadrant) -> bool| {
        space.event_from_indices((0..space.len()).filter(|&k| keep(k / 4, Quadrant::ALL[k % 4])))
    };
    let a = pick(&|_, q| matches!(q, Quadrant::AB | Quadrant::ANotB));
    let b = pick(&|_, q| matches!(q, Quadrant::AB | Quadrant::NotAB));
    let partition =
        space.validate_partition((0..cells.len()).map(|i| pick(&|ci, _| ci == i)).collect())?;
    Ok(Realization {
        space,
        a,
        b,
        partition,
    })
}

/// Cell data of the two-cell configuration that satisfies the joint-sum
/// condition while violating screening off in both cells.
pub fn counterexample_cells() -> [CellSpec; 2] {
    use crate::rational::ratio;
    [
        CellSpec {
            mass: ratio(1, 2),
            a: ratio(1, 4),
            b: ratio(1, 3),
            ab: ratio(1, 24),
        },
        CellSpec {
            mass: ratio(1, 2),
            a: ratio(1, 8),
            b: ratio(1, 6),
            ab: ratio(1, 16),
        },
    ]
}

/// Eight-atom space (cell × quadrant) realizing [`counterexample_cells`].
pub fn realize_counterexample() -> Realization {
    realize_cells(&counterexample_cells()).expect("counterexample weights are nonnegative")
}
