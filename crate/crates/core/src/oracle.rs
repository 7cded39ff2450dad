//! Brute-force cross-checks over small spaces.
//!
//! Nothing here calls into [`crate::forks`]. Conditions are re-derived from
//! raw atom weights scaled to a common integer denominator, and compared by
//! cross-multiplication, so a bug in the rational conditional-probability
//! path cannot hide behind the same bug here.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::space::{Event, Partition, ProbSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SearchBudget {
    pub max_atoms: usize,
    pub max_partition_size: usize,
    pub max_partitions: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_atoms: 12,
            max_partition_size: 6,
            max_partitions: 2_000_000,
        }
    }
}

/// Restricted-growth strings of length `len` using exactly `blocks` labels,
/// in lexicographic order. Each string encodes a set partition: position
/// `i` holds the block of element `i`.
#[derive(Debug, Clone)]
pub struct RestrictedGrowth {
    current: Option<Vec<usize>>,
    blocks: usize,
}

impl RestrictedGrowth {
    pub fn new(len: usize, blocks: usize) -> Self {
        let current = if blocks == 0 || blocks > len {
            None
        } else {
            let mut s = vec![0; len];
            fill_minimal(&mut s, 1, 0, blocks);
            Some(s)
        };
        RestrictedGrowth { current, blocks }
    }
}

/// Lexicographically smallest completion of `s[from..]` given that labels
/// `0..=top` are already used, reaching exactly `blocks` labels.
fn fill_minimal(s: &mut [usize], from: usize, mut top: usize, blocks: usize) {
    for j in from..s.len() {
        let slots = s.len() - j;
        let needed = blocks - 1 - top;
        if slots > needed {
            s[j] = 0;
        } else {
            top += 1;
            s[j] = top;
        }
    }
}

impl Iterator for RestrictedGrowth {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.take()?;
        let len = out.len();
        let mut prefix_max = vec![0; len];
        for i in 1..len {
            prefix_max[i] = prefix_max[i - 1].max(out[i]);
        }
        let mut next = None;
        for i in (1..len).rev() {
            let cap = (prefix_max[i - 1] + 1).min(self.blocks - 1);
            if out[i] < cap {
                let mut s = out.clone();
                s[i] += 1;
                let top = prefix_max[i - 1].max(s[i]);
                if len - 1 - i >= self.blocks - 1 - top {
                    fill_minimal(&mut s, i + 1, top, self.blocks);
                    next = Some(s);
                    break;
                }
            }
        }
        self.current = next;
        Some(out)
    }
}

/// Stirling number of the second kind, for enumeration completeness checks.
pub fn stirling2(k: usize, n: usize) -> BigInt {
    let mut row = vec![BigInt::zero(); n + 1];
    row[0] = BigInt::one();
    for i in 1..=k {
        for j in (1..=n.min(i)).rev() {
            row[j] = &row[j] * BigInt::from(j) + &row[j - 1];
        }
        row[0] = BigInt::zero();
    }
    row[n].clone()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Enumeration {
    pub partitions: Vec<Partition>,
    /// Number of `n`-block partitions examined.
    pub examined: u64,
}

/// Atom weights as integers over one common denominator.
fn integer_weights(space: &ProbSpace) -> Vec<BigInt> {
    let common = space
        .atoms()
        .iter()
        .fold(BigInt::one(), |acc, a| acc.lcm(a.weight.denom()));
    space
        .atoms()
        .iter()
        .map(|a| a.weight.numer() * (&common / a.weight.denom()))
        .collect()
}

struct CellMass {
    all: BigInt,
    a: BigInt,
    b: BigInt,
    ab: BigInt,
}

fn cell_masses(weights: &[BigInt], a: &[bool], b: &[bool], cell: &[bool]) -> CellMass {
    let mut m = CellMass {
        all: BigInt::zero(),
        a: BigInt::zero(),
        b: BigInt::zero(),
        ab: BigInt::zero(),
    };
    for (k, w) in weights.iter().enumerate() {
        if !cell[k] {
            continue;
        }
        m.all += w;
        if a[k] {
            m.a += w;
        }
        if b[k] {
            m.b += w;
        }
        if a[k] && b[k] {
            m.ab += w;
        }
    }
    m
}

fn is_rccs(weights: &[BigInt], a: &[bool], b: &[bool], cells: &[&[bool]]) -> bool {
    if cells.len() < 2 {
        return false;
    }
    let atoms = weights.len();
    for k in 0..atoms {
        if cells.iter().filter(|c| c[k]).count() != 1 {
            return false;
        }
    }
    let masses: Vec<CellMass> = cells
        .iter()
        .map(|c| cell_masses(weights, a, b, c))
        .collect();
    for m in &masses {
        if !m.all.is_positive() {
            return false;
        }
        // p(AB|C) = p(A|C) p(B|C)  ⇔  m_ab · m = m_a · m_b
        if &m.ab * &m.all != &m.a * &m.b {
            return false;
        }
    }
    for (i, x) in masses.iter().enumerate() {
        for y in &masses[i + 1..] {
            // sign of [p(A|Ci) − p(A|Cj)][p(B|Ci) − p(B|Cj)] after scaling by m_i² m_j²
            let da = &x.a * &y.all - &y.a * &x.all;
            let db = &x.b * &y.all - &y.b * &x.all;
            if !(da * db).is_positive() {
                return false;
            }
        }
    }
    true
}

/// Independent yes/no decision of "`partition` is a common cause system for
/// `(A, B)`". Cells that overlap or fail to cover the space give `false`.
pub fn verify_by_enumeration(
    space: &ProbSpace,
    a: &Event,
    b: &Event,
    partition: &Partition,
) -> bool {
    if ![a, b].iter().all(|e| space.owns(e)) || !partition.cells().iter().all(|c| space.owns(c)) {
        return false;
    }
    let weights = integer_weights(space);
    let cells: Vec<&[bool]> = partition.cells().iter().map(Event::mask).collect();
    is_rccs(&weights, a.mask(), b.mask(), &cells)
}

/// Every `n`-block partition of the atoms that is a common cause system for
/// `(A, B)`, in restricted-growth-string order.
pub fn enumerate_rccs(
    space: &ProbSpace,
    a: &Event,
    b: &Event,
    n: usize,
    budget: SearchBudget,
) -> Result<Enumeration> {
    if !space.owns(a) || !space.owns(b) {
        return Err(Error::ForeignEvent);
    }
    let k = space.len();
    if k > budget.max_atoms {
        return Err(Error::BudgetExceeded(format!(
            "{k} atoms exceed the limit of {}",
            budget.max_atoms
        )));
    }
    if n > budget.max_partition_size {
        return Err(Error::BudgetExceeded(format!(
            "partition size {n} exceeds the limit of {}",
            budget.max_partition_size
        )));
    }
    let weights = integer_weights(space);
    let mut partitions = Vec::new();
    let mut examined = 0u64;
    for rgs in RestrictedGrowth::new(k, n) {
        examined += 1;
        if examined > budget.max_partitions {
            return Err(Error::BudgetExceeded(format!(
                "more than {} partitions",
                budget.max_partitions
            )));
        }
        let masks: Vec<Vec<bool>> = (0..n)
            .map(|blk| rgs.iter().map(|&x| x == blk).collect())
            .collect();
        let cells: Vec<&[bool]> = masks.iter().map(Vec::as_slice).collect();
        if is_rccs(&weights, a.mask(), b.mask(), &cells) {
            let events = masks.iter().map(|m| space.event_from_mask(m)).collect();
            partitions.push(space.validate_partition(events)?);
        }
    }
    Ok(Enumeration {
        partitions,
        examined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn rgs_counts_match_stirling() {
        for k in 1..=8 {
            for n in 1..=k {
                let count = RestrictedGrowth::new(k, n).count();
                assert_eq!(BigInt::from(count), stirling2(k, n), "k={k} n={n}");
            }
        }
        assert_eq!(stirling2(8, 2), BigInt::from(127));
        assert_eq!(RestrictedGrowth::new(3, 4).count(), 0);
    }

    #[test]
    fn rgs_is_lexicographic_and_valid() {
        let all: Vec<Vec<usize>> = RestrictedGrowth::new(5, 3).collect();
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        for s in &all {
            assert_eq!(s[0], 0);
            let mut top = 0;
            for &x in &s[1..] {
                assert!(x <= top + 1);
                top = top.max(x);
            }
            assert_eq!(top, 2);
        }
        assert_eq!(
            RestrictedGrowth::new(3, 2).collect::<Vec<_>>(),
            vec![vec![0, 0, 1], vec![0, 1, 0], vec![0, 1, 1]]
        );
    }

    fn s4() -> (ProbSpace, Event, Event) {
        let s = ProbSpace::new([
            ("w1", ratio(3, 8)),
            ("w2", ratio(1, 8)),
            ("w3", ratio(1, 8)),
            ("w4", ratio(3, 8)),
        ])
        .unwrap();
        let a = s.event(&["w1", "w2"]).unwrap();
        let b = s.event(&["w1", "w3"]).unwrap();
        (s, a, b)
    }

    #[test]
    fn s4_two_cell_systems_are_the_pair_events() {
        // {A, Ā} and {B, B̄} make A (resp. B) deterministic in each cell
        let (s, a, b) = s4();
        let found = enumerate_rccs(&s, &a, &b, 2, SearchBudget::default()).unwrap();
        assert_eq!(found.examined, 7);
        let mut got: Vec<Vec<Event>> = found
            .partitions
            .iter()
            .map(|p| p.cells().to_vec())
            .collect();
        got.sort_by_key(|cells| cells[0].labels(&s).join(","));
        assert_eq!(
            got,
            vec![
                vec![a.clone(), a.complement()],
                vec![b.clone(), b.complement()],
            ]
        );
        let none = enumerate_rccs(&s, &a, &b, 5, SearchBudget::default()).unwrap();
        assert!(none.partitions.is_empty());
        assert_eq!(none.examined, 0);
    }

    #[test]
    fn quadrant_partition_is_rejected() {
        let (s, a, b) = s4();
        let p = s
            .validate_partition(s.quadrant_cells(&a, &b).to_vec())
            .unwrap();
        assert!(!verify_by_enumeration(&s, &a, &b, &p));
    }

    #[test]
    fn budget_limits() {
        let (s, a, b) = s4();
        let tight = SearchBudget {
            max_atoms: 3,
            ..SearchBudget::default()
        };
        assert!(matches!(
            enumerate_rccs(&s, &a, &b, 2, tight),
            Err(Error::BudgetExceeded(_))
        ));
        let few = SearchBudget {
            max_partitions: 3,
            ..SearchBudget::default()
        };
        assert!(matches!(
            enumerate_rccs(&s, &a, &b, 2, few),
            Err(Error::BudgetExceeded(_))
        ));
    }
}
