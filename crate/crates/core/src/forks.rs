//! Conjunctive forks, common cause systems, and the covariance decomposition
//! over a partition.

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::space::{Event, Partition, ProbSpace};

/// One named condition and whether it holds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Condition {
    pub id: &'static str,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForkReport {
    /// `eq1` (0 < p(C) < 1) through `eq5` (p(B|C) > p(B|C̄)).
    pub conditions: Vec<Condition>,
    /// p(A∧B|C) − p(A|C)p(B|C).
    #[serde(with = "rational::serde_str")]
    pub screening_in_cause: Rational,
    /// p(A∧B|C̄) − p(A|C̄)p(B|C̄).
    #[serde(with = "rational::serde_str")]
    pub screening_in_complement: Rational,
    /// p(A|C) − p(A|C̄).
    #[serde(with = "rational::serde_str")]
    pub a_difference: Rational,
    /// p(B|C) − p(B|C̄).
    #[serde(with = "rational::serde_str")]
    pub b_difference: Rational,
    pub verdict: bool,
}

/// Check whether `⟨A, B, C⟩` is a conjunctive fork for `(A, B)`.
pub fn verify_fork(space: &ProbSpace, a: &Event, b: &Event, c: &Event) -> Result<ForkReport> {
    for e in [a, b, c] {
        if !space.owns(e) {
            return Err(Error::ForeignEvent);
        }
    }
    if a == b || a == c || b == c {
        return Err(Error::IndistinctEvents);
    }
    let pc = space.probability(c)?;
    if pc.is_zero() || pc == rational::one() {
        return Err(Error::ZeroMeasureCondition(rational::format(&pc)));
    }
    let nc = c.complement();
    let ab = a.meet(b);
    let residual = |given: &Event| -> Result<Rational> {
        Ok(space.conditional(&ab, given)?
            - space.conditional(a, given)? * space.conditional(b, given)?)
    };
    let screening_in_cause = residual(c)?;
    let screening_in_complement = residual(&nc)?;
    let a_difference = space.conditional(a, c)? - space.conditional(a, &nc)?;
    let b_difference = space.conditional(b, c)? - space.conditional(b, &nc)?;

    let conditions = vec![
        Condition {
            id: "eq1",
            holds: true,
        },
        Condition {
            id: "eq2",
            holds: screening_in_cause.is_zero(),
        },
        Condition {
            id: "eq3",
            holds: screening_in_complement.is_zero(),
        },
        Condition {
            id: "eq4",
            holds: a_difference.is_positive(),
        },
        Condition {
            id: "eq5",
            holds: b_difference.is_positive(),
        },
    ];
    let verdict = conditions.iter().all(|c| c.holds);
    Ok(ForkReport {
        conditions,
        screening_in_cause,
        screening_in_complement,
        a_difference,
        b_difference,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingProduct {
    /// 1-based cell indices, `i < j`.
    pub i: usize,
    pub j: usize,
    /// `[p(A|C_i) − p(A|C_j)][p(B|C_i) − p(B|C_j)]`, absent if a cell has
    /// measure zero.
    #[serde(with = "rational::serde_str::option")]
    pub value: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RccsReport {
    pub n: usize,
    pub positivity: Vec<bool>,
    /// `p(A∧B|C_i) − p(A|C_i)p(B|C_i)` per cell; absent for null cells.
    #[serde(serialize_with = "rational::serde_str::option_vec::serialize")]
    pub screening_residuals: Vec<Option<Rational>>,
    pub ordering_products: Vec<OrderingProduct>,
    /// `eq7` positivity, `eq8` screening off, `eq9` co-monotone ordering.
    pub conditions: Vec<Condition>,
    pub verdict: bool,
}

/// Conditional probabilities of `A`, `B` and `A∧B` in one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellProfile {
    pub mass: Rational,
    pub a: Rational,
    pub b: Rational,
    pub ab: Rational,
}

impl CellProfile {
    pub fn residual(&self) -> Rational {
        &self.ab - &self.a * &self.b
    }
}

/// Per-cell profile, `None` where the cell has measure zero.
pub fn cell_profiles(
    space: &ProbSpace,
    a: &Event,
    b: &Event,
    partition: &Partition,
) -> Result<Vec<Option<CellProfile>>> {
    for e in [a, b] {
        if !space.owns(e) {
            return Err(Error::ForeignEvent);
        }
    }
    partition
        .cells()
        .iter()
        .map(|cell| {
            if !space.owns(cell) {
                return Err(Error::ForeignEvent);
            }
            // one pass per cell; this sits on the hot path of every sweep
            let (mut mass, mut pa, mut pb, mut pab) = (
                Rational::zero(),
                Rational::zero(),
                Rational::zero(),
                Rational::zero(),
            );
            for i in cell.indices() {
                let w = space.weight(i);
                mass += w;
                match (a.contains(i), b.contains(i)) {
                    (true, true) => {
                        pa += w;
                        pb += w;
                        pab += w;
                    }
                    (true, false) => pa += w,
                    (false, true) => pb += w,
                    (false, false) => {}
                }
            }
            if mass.is_zero() {
                return Ok(None);
            }
            Ok(Some(CellProfile {
                a: pa / &mass,
                b: pb / &mass,
                ab: pab / &mass,
                mass,
            }))
        })
        .collect()
}

/// Check whether `partition` is a Reichenbachian common cause system for
/// `(A, B)`.
pub fn verify_rccs(
    space: &ProbSpace,
    a: &Event,
    b: &Event,
    partition: &Partition,
) -> Result<RccsReport> {
    let n = partition.len();
    if n < 2 {
        return Err(Error::SizeTooSmall(n));
    }
    for e in [a, b] {
        if !space.owns(e) {
            return Err(Error::ForeignEvent);
        }
    }
    let profiles = cell_profiles(space, a, b, partition)?;
    let positivity: Vec<bool> = profiles.iter().map(Option::is_some).collect();
    let screening_residuals: Vec<Option<Rational>> = profiles
        .iter()
        .map(|p| p.as_ref().map(CellProfile::residual))
        .collect();

    let mut ordering_products = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let value = match (&profiles[i], &profiles[j]) {
                (Some(pi), Some(pj)) => Some((&pi.a - &pj.a) * (&pi.b - &pj.b)),
                _ => None,
            };
            ordering_products.push(OrderingProduct {
                i: i + 1,
                j: j + 1,
                value,
            });
        }
    }

    let conditions = vec![
        Condition {
            id: "eq7",
            holds: positivity.iter().all(|&p| p),
        },
        Condition {
            id: "eq8",
            holds: screening_residuals
                .iter()
                .all(|r| r.as_ref().is_some_and(Zero::is_zero)),
        },
        Condition {
            id: "eq9",
            holds: ordering_products
                .iter()
                .all(|o| o.value.as_ref().is_some_and(Signed::is_positive)),
        },
    ];
    let verdict = conditions.iter().all(|c| c.holds);
    Ok(RccsReport {
        n,
        positivity,
        screening_residuals,
        ordering_products,
        conditions,
        verdict,
    })
}

/// Covariance of a pair split into a co-monotone part and a screening defect.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    /// `p(X∧Y) − p(X)p(Y)`.
    #[serde(with = "rational::serde_str")]
    pub pair_covariance: Rational,
    /// `½ Σ_{i,j} p(Z_i)p(Z_j)[p(X|Z_i) − p(X|Z_j)][p(Y|Z_i) − p(Y|Z_j)]`.
    #[serde(with = "rational::serde_str")]
    pub comonotone_sum: Rational,
    /// `Σ_i p(Z_i)[p(X∧Y|Z_i) − p(X|Z_i)p(Y|Z_i)]`.
    #[serde(with = "rational::serde_str")]
    pub defect_sum: Rational,
    /// `pair_covariance − comonotone_sum − defect_sum`; always zero.
    #[serde(with = "rational::serde_str")]
    pub identity_gap: Rational,
    pub note: &'static str,
}

pub const DEFECT_COEFFICIENT_NOTE: &str = "the defect sum enters with coefficient 1; a factor of \
     1/2 on it fails already for the one-cell partition, where the co-monotone sum vanishes";

impl Decomposition {
    /// The covariance equals the co-monotone sum alone, which is what
    /// screening off in every cell guarantees.
    pub fn special_form_holds(&self) -> bool {
        self.pair_covariance == self.comonotone_sum
    }
}

/// Decompose the covariance of `(X, Y)` over a partition of positive-measure
/// cells.
pub fn correlation_decomposition(
    space: &ProbSpace,
    x: &Event,
    y: &Event,
    partition: &Partition,
) -> Result<Decomposition> {
    let summary = space.correlation_summary(x, y)?;
    let profiles = cell_profiles(space, x, y, partition)?
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::ZeroMeasureCondition("0".into()))?;

    let mut comonotone_sum = Rational::zero();
    for (i, pi) in profiles.iter().enumerate() {
        for pj in &profiles[i + 1..] {
            comonotone_sum += &pi.mass * &pj.mass * (&pi.a - &pj.a) * (&pi.b - &pj.b);
        }
    }
    let defect_sum: Rational = profiles.iter().map(|p| &p.mass * p.residual()).sum();
    let identity_gap = &summary.gamma - &comonotone_sum - &defect_sum;
    Ok(Decomposition {
        pair_covariance: summary.gamma,
        comonotone_sum,
        defect_sum,
        identity_gap,
        note: DEFECT_COEFFICIENT_NOTE,
    })
}
