//! Embedding a space into an extension that carries a common cause system.
//!
//! Every atom `x` of positive weight is split into `n` children `x#1..x#n`.
//! The child `x#i` gets weight `p(x)·r_i^k`, where `k` is the quadrant of `x`
//! with respect to `(A, B)`, and cell `C_i` collects all `#i` children. The
//! map `h` sending an event to the set of children of its atoms is an
//! injective, complement-preserving lattice homomorphism, and `p′∘h = p`
//! exactly when every weight column sums to one.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::admissibility::{check_admissible_star, AdmissibleStarSet};
use crate::error::{Error, Result};
use crate::forks::verify_rccs;
use crate::rational::{self, Rational};
use crate::space::{Event, Partition, ProbSpace, Quadrant, SpaceDocument};

/// `r_i^k` for quadrant `k` (in [`Quadrant::ALL`] order) and cell `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitWeights {
    pub columns: [Vec<Rational>; 4],
}

impl SplitWeights {
    pub fn column(&self, q: Quadrant) -> &[Rational] {
        &self.columns[q.index()]
    }

    fn to_json_value(&self) -> serde_json::Value {
        let map: BTreeMap<&str, Vec<String>> = Quadrant::ALL
            .iter()
            .map(|q| {
                (
                    q.name(),
                    self.column(*q).iter().map(rational::format).collect(),
                )
            })
            .collect();
        serde_json::to_value(map).expect("weights serialize")
    }
}

/// Quadrant-wise split weights:
///
/// ```text
/// r_i^1 = c_i d_i / p(A∧B)
/// r_i^2 = c_i (a_i − d_i) / p(A∧B̄)
/// r_i^3 = c_i (b_i − d_i) / p(Ā∧B)
/// r_i^4 = c_i (1 − a_i − b_i + d_i) / p(Ā∧B̄)
/// ```
///
/// A quadrant of probability zero gets an all-zero column, provided its
/// numerators vanish too.
pub fn split_weights(set: &AdmissibleStarSet, quadrants: &[Rational; 4]) -> Result<SplitWeights> {
    let n = set.n();
    let numerators = |q: Quadrant| -> Vec<Rational> {
        (0..n)
            .map(|i| {
                let (a, b, c, d) = (&set.a[i], &set.b[i], &set.c[i], &set.d[i]);
                match q {
                    Quadrant::AB => c * d,
                    Quadrant::ANotB => c * (a - d),
                    Quadrant::NotAB => c * (b - d),
                    Quadrant::NotANotB => c * (Rational::one() - a - b + d),
                }
            })
            .collect()
    };
    let mut columns: [Vec<Rational>; 4] = Default::default();
    for q in Quadrant::ALL {
        let num = numerators(q);
        let mass = &quadrants[q.index()];
        columns[q.index()] = if mass.is_zero() {
            if num.iter().any(|x| !x.is_zero()) {
                return Err(Error::ZeroQuadrantMismatch {
                    quadrant: q.name().to_string(),
                });
            }
            num
        } else {
            num.into_iter().map(|x| x / mass).collect()
        };
    }
    Ok(SplitWeights { columns })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionResult {
    pub space: ProbSpace,
    /// Original atom index of every new atom; defines `h`.
    pub parent_of: Vec<usize>,
    pub original_len: usize,
    /// `h(A)` and `h(B)`.
    pub a: Event,
    pub b: Event,
    /// `C_i` = all `#i` children, in admissible* index order.
    pub rccs: Partition,
    pub weights: SplitWeights,
}

impl ExtensionResult {
    /// `h(X)`: all children of the atoms of `X`.
    pub fn embed(&self, x: &Event) -> Event {
        assert_eq!(
            x.mask().len(),
            self.original_len,
            "event must come from the original space"
        );
        self.space.event_from_indices(
            self.parent_of
                .iter()
                .enumerate()
                .filter(|(_, &p)| x.contains(p))
                .map(|(k, _)| k),
        )
    }

    /// Extension file: the new space with every named event of `original`
    /// carried through `h`, cells `C1..Cn`, the parent map, the partition
    /// and the weight table. It is a valid space file on its own.
    pub fn to_json_value(&self, original: &SpaceDocument, pair: (&str, &str)) -> serde_json::Value {
        let doc = self.document(original);
        let mut value = doc.to_json_value();
        let obj = value.as_object_mut().expect("space document is an object");
        let parents: BTreeMap<&str, &str> = self
            .parent_of
            .iter()
            .enumerate()
            .map(|(k, &p)| (self.space.label(k), original.space.label(p)))
            .collect();
        obj.insert("parentOf".into(), serde_json::to_value(parents).unwrap());
        obj.insert(
            "partition".into(),
            serde_json::to_value(self.cell_names(original)).unwrap(),
        );
        obj.insert(
            "cells".into(),
            serde_json::to_value(self.rccs.labels(&self.space)).unwrap(),
        );
        obj.insert("pair".into(), serde_json::json!([pair.0, pair.1]));
        obj.insert("weights".into(), self.weights.to_json_value());
        value
    }

    /// Names under which the cells are stored: `C1..Cn`, or `RCCS_C1..` if
    /// the original already uses a `C<i>` name.
    pub fn cell_names(&self, original: &SpaceDocument) -> Vec<String> {
        let n = self.rccs.len();
        let plain: Vec<String> = (1..=n).map(|i| format!("C{i}")).collect();
        if plain.iter().any(|name| original.events.contains_key(name)) {
            (1..=n).map(|i| format!("RCCS_C{i}")).collect()
        } else {
            plain
        }
    }

    pub fn document(&self, original: &SpaceDocument) -> SpaceDocument {
        let mut doc = SpaceDocument::new(self.space.clone());
        for (name, e) in &original.events {
            doc.events.insert(name.clone(), self.embed(e));
        }
        for (name, cell) in self.cell_names(original).into_iter().zip(self.rccs.cells()) {
            doc.events.insert(name, cell.clone());
        }
        doc
    }
}

/// Build an extension of `space` in which the cells given by `set` form a
/// common cause system for `(h(A), h(B))`.
///
/// The set must pass the admissible* checker, describe the pair's own
/// marginals, and have joint sum `p(A∧B)`. Non-realizable sets are refused,
/// never renormalized.
pub fn extend_with_rccs(
    space: &ProbSpace,
    a: &Event,
    b: &Event,
    set: &AdmissibleStarSet,
) -> Result<ExtensionResult> {
    let report = check_admissible_star(set);
    if !report.verdict {
        return Err(Error::NotAdmissible(report.failed().join(", ")));
    }
    let summary = space.correlation_summary(a, b)?;
    let t = &set.target;
    if t.a != summary.a || t.b != summary.b || t.p_ab != summary.p_ab {
        return Err(Error::TargetMismatch(format!(
            "set targets a={}, b={}, pAB={} but the pair has a={}, b={}, pAB={}",
            t.a, t.b, t.p_ab, summary.a, summary.b, summary.p_ab
        )));
    }
    let weights = split_weights(set, &summary.quadrants)?;
    if !report.joint_sum_matches {
        return Err(Error::NotRealizable {
            joint_sum: rational::format(&report.joint_sum),
            p_ab: rational::format(&summary.p_ab),
        });
    }
    for q in Quadrant::ALL {
        let col = weights.column(q);
        if col.iter().any(Signed::is_negative) {
            return Err(Error::VerificationFailed(format!(
                "negative split weight in quadrant {q}"
            )));
        }
        let total: Rational = col.iter().sum();
        if !summary.quadrant(q).is_zero() && !total.is_one() {
            return Err(Error::VerificationFailed(format!(
                "split weights of quadrant {q} sum to {total}"
            )));
        }
    }

    let n = set.n();
    let mut atoms = Vec::with_capacity(space.len() * n);
    let mut parent_of = Vec::with_capacity(space.len() * n);
    let mut cell_of = Vec::with_capacity(space.len() * n);
    for (x, atom) in space.atoms().iter().enumerate() {
        if atom.weight.is_zero() {
            atoms.push((format!("{}#1", atom.label), Rational::zero()));
            parent_of.push(x);
            cell_of.push(0);
            continue;
        }
        let q = Quadrant::of(a.contains(x), b.contains(x));
        for (i, r) in weights.column(q).iter().enumerate() {
            atoms.push((format!("{}#{}", atom.label, i + 1), &atom.weight * r));
            parent_of.push(x);
            cell_of.push(i);
        }
    }
    let new_space = ProbSpace::new(atoms)?;
    let cells = (0..n)
        .map(|i| new_space.event_from_indices((0..cell_of.len()).filter(|&k| cell_of[k] == i)))
        .collect();
    let rccs = new_space.validate_partition(cells)?;
    let mut result = ExtensionResult {
        a: new_space.empty_event(),
        b: new_space.empty_event(),
        space: new_space,
        parent_of,
        original_len: space.len(),
        rccs,
        weights,
    };
    result.a = result.embed(a);
    result.b = result.embed(b);

    let check = verify_rccs(&result.space, &result.a, &result.b, &result.rccs)?;
    if !check.verdict {
        return Err(Error::VerificationFailed(
            "embedded partition is not a common cause system".into(),
        ));
    }
    let after = result.space.correlation_summary(&result.a, &result.b)?;
    if after != summary {
        return Err(Error::VerificationFailed(
            "correlation of the embedded pair changed".into(),
        ));
    }
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomomorphismReport {
    pub parent_map_total: bool,
    pub injective: bool,
    pub preserves_meet: bool,
    pub preserves_join: bool,
    pub preserves_complement: bool,
    pub measure_preserved: bool,
    /// Number of original events whose measure was compared.
    pub events_checked: usize,
    pub exhaustive: bool,
    pub failures: Vec<String>,
    pub verdict: bool,
}

/// Spaces with at most this many atoms get an exhaustive measure check.
pub const EXHAUSTIVE_ATOM_LIMIT: usize = 12;
const SAMPLE_SEED: u64 = 0x5eed;
const LATTICE_SAMPLE: usize = 24;
const MEASURE_SAMPLE: usize = 512;

fn random_events(space: &ProbSpace, count: usize, rng: &mut ChaCha8Rng) -> Vec<Event> {
    (0..count)
        .map(|_| {
            let mask: Vec<bool> = (0..space.len()).map(|_| rng.gen()).collect();
            space.event_from_mask(&mask)
        })
        .collect()
}

/// Check that `result` describes an extension of `original`.
///
/// Lattice operations are checked on singletons plus a seeded random sample.
/// Measure preservation is exhaustive over all `2^k` events when the original
/// has at most [`EXHAUSTIVE_ATOM_LIMIT`] atoms, and otherwise covers
/// singletons, the whole space, and a fixed-seed sample of 512 events.
pub fn verify_homomorphism(result: &ExtensionResult, original: &ProbSpace) -> HomomorphismReport {
    let mut failures = Vec::new();
    let k = original.len();
    let parent_map_total = result.original_len == k
        && result.parent_of.len() == result.space.len()
        && result.parent_of.iter().all(|&p| p < k);
    if !parent_map_total {
        failures.push("parent map is not a total map into the original atoms".into());
        return HomomorphismReport {
            parent_map_total,
            injective: false,
            preserves_meet: false,
            preserves_join: false,
            preserves_complement: false,
            measure_preserved: false,
            events_checked: 0,
            exhaustive: false,
            failures,
            verdict: false,
        };
    }

    let mut children = vec![0usize; k];
    for &p in &result.parent_of {
        children[p] += 1;
    }
    let childless: Vec<&str> = (0..k)
        .filter(|&x| children[x] == 0)
        .map(|x| original.label(x))
        .collect();
    let injective = childless.is_empty();
    if !injective {
        failures.push(format!("atoms without children: {}", childless.join(", ")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
    let mut family: Vec<Event> = (0..k).map(|x| original.event_from_indices([x])).collect();
    family.push(original.empty_event());
    family.push(original.whole());
    family.extend(random_events(original, LATTICE_SAMPLE, &mut rng));
    let images: Vec<Event> = family.iter().map(|x| result.embed(x)).collect();
    let mut preserves_meet = true;
    let mut preserves_join = true;
    let mut preserves_complement = true;
    for (i, x) in family.iter().enumerate() {
        if result.embed(&x.complement()) != images[i].complement() {
            preserves_complement = false;
        }
        for (j, y) in family.iter().enumerate().skip(i) {
            if result.embed(&x.meet(y)) != images[i].meet(&images[j]) {
                preserves_meet = false;
            }
            if result.embed(&x.join(y)) != images[i].join(&images[j]) {
                preserves_join = false;
            }
        }
    }
    for (ok, what) in [
        (preserves_meet, "meet"),
        (preserves_join, "join"),
        (preserves_complement, "complement"),
    ] {
        if !ok {
            failures.push(format!("{what} is not preserved"));
        }
    }

    let mut measure_preserved = true;
    let mut events_checked = 0usize;
    let mut compare = |x: &Event, failures: &mut Vec<String>| {
        events_checked += 1;
        let lhs: Rational = result
            .space
            .probability(&result.embed(x))
            .expect("embedded events belong to the new space");
        let rhs: Rational = x.indices().map(|i| original.weight(i)).sum();
        if lhs != rhs {
            if measure_preserved {
                failures.push(format!(
                    "p'(h(X)) = {lhs} but p(X) = {rhs} for X = {{{}}}",
                    x.labels(original).join(",")
                ));
            }
            measure_preserved = false;
        }
    };
    let exhaustive = k <= EXHAUSTIVE_ATOM_LIMIT;
    if exhaustive {
        for bits in 0u32..(1u32 << k) {
            let mask: Vec<bool> = (0..k).map(|i| bits >> i & 1 == 1).collect();
            compare(&original.event_from_mask(&mask), &mut failures);
        }
    } else {
        for x in &family {
            compare(x, &mut failures);
        }
        for x in random_events(original, MEASURE_SAMPLE, &mut rng) {
            compare(&x, &mut failures);
        }
    }

    let verdict =
        injective && preserves_meet && preserves_join && preserves_complement && measure_preserved;
    HomomorphismReport {
        parent_map_total,
        injective,
        preserves_meet,
        preserves_join,
        preserves_complement,
        measure_preserved,
        events_checked,
        exhaustive,
        failures,
        verdict,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::admissibility::AdmissibleStarSet;
    use crate::construct::{construct_admissible_star, ConstructionRequest, Mode};
    use crate::rational::ratio;
    use crate::space::CorrelationSummary;

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

    fn reference_star() -> AdmissibleStarSet {
        AdmissibleStarSet::new(
            vec![ratio(1, 8), ratio(7, 8)],
            vec![ratio(1, 6), ratio(5, 6)],
            vec![ratio(1, 2), ratio(1, 2)],
            vec![ratio(1, 48), ratio(35, 48)],
            CorrelationSummary::from_marginals(ratio(1, 2), ratio(1, 2), ratio(3, 8)),
        )
        .unwrap()
    }

    #[test]
    fn s4_weights_and_conditionals() {
        let (s, a, b) = s4();
        let ext = extend_with_rccs(&s, &a, &b, &reference_star()).unwrap();
        let w = &ext.weights;
        assert_eq!(w.column(Quadrant::AB), [ratio(1, 36), ratio(35, 36)]);
        assert_eq!(w.column(Quadrant::ANotB), [ratio(5, 12), ratio(7, 12)]);
        assert_eq!(w.column(Quadrant::NotAB), [ratio(7, 12), ratio(5, 12)]);
        assert_eq!(w.column(Quadrant::NotANotB), [ratio(35, 36), ratio(1, 36)]);
        assert_eq!(ext.space.len(), 8);
        let c1 = &ext.rccs.cells()[0];
        assert_eq!(ext.space.probability(c1).unwrap(), ratio(1, 2));
        assert_eq!(ext.space.conditional(&ext.a, c1).unwrap(), ratio(1, 8));
        assert_eq!(ext.space.label(0), "w1#1");

        let report = verify_homomorphism(&ext, &s);
        assert!(report.verdict, "{report:?}");
        assert!(report.exhaustive);
        assert_eq!(report.events_checked, 16);
    }

    #[test]
    fn literal_set_is_not_realizable() {
        let (s, a, b) = s4();
        let target = s.correlation_summary(&a, &b).unwrap();
        let set =
            construct_admissible_star(&ConstructionRequest::new(target, 2, Mode::Literal)).unwrap();
        assert!(matches!(
            extend_with_rccs(&s, &a, &b, &set),
            Err(Error::NotRealizable { .. })
        ));
    }

    #[test]
    fn zero_quadrant_is_rejected() {
        // A ⊆ B, so A∧B̄ is null
        let s = ProbSpace::new([
            ("ab", ratio(1, 4)),
            ("nb", ratio(1, 4)),
            ("nn", ratio(1, 2)),
        ])
        .unwrap();
        let a = s.event(&["ab"]).unwrap();
        let b = s.event(&["ab", "nb"]).unwrap();
        let target = s.correlation_summary(&a, &b).unwrap();
        let set =
            construct_admissible_star(&ConstructionRequest::new(target, 2, Mode::Literal)).unwrap();
        assert!(matches!(
            extend_with_rccs(&s, &a, &b, &set),
            Err(Error::ZeroQuadrantMismatch { .. })
        ));
    }

    #[test]
    fn foreign_target_is_rejected() {
        let (s, a, _) = s4();
        assert!(matches!(
            extend_with_rccs(&s, &a, &a, &reference_star()),
            Err(Error::TargetMismatch(_))
        ));
    }

    #[test]
    fn zero_weight_atoms_pass_through() {
        let s = ProbSpace::new([
            ("w1", ratio(3, 8)),
            ("w2", ratio(1, 8)),
            ("w3", ratio(1, 8)),
            ("w4", ratio(3, 8)),
            ("z", ratio(0, 1)),
        ])
        .unwrap();
        let a = s.event(&["w1", "w2"]).unwrap();
        let b = s.event(&["w1", "w3"]).unwrap();
        let ext = extend_with_rccs(&s, &a, &b, &reference_star()).unwrap();
        assert_eq!(ext.space.len(), 9);
        let z = ext.space.atom_index("z#1").unwrap();
        assert!(ext.rccs.cells()[0].contains(z));
        assert!(verify_homomorphism(&ext, &s).verdict);
    }

    #[test]
    fn identity_extension_is_a_homomorphism() {
        let (s, a, b) = s4();
        let rccs = s.validate_partition(vec![s.whole()]).unwrap();
        let ext = ExtensionResult {
            space: s.clone(),
            parent_of: (0..4).collect(),
            original_len: 4,
            a,
            b,
            rccs,
            weights: SplitWeights {
                columns: Default::default(),
            },
        };
        assert!(verify_homomorphism(&ext, &s).verdict);
    }

    #[test]
    fn perturbed_weight_breaks_measure() {
        let (s, a, b) = s4();
        let mut ext = extend_with_rccs(&s, &a, &b, &reference_star()).unwrap();
        let bump = ratio(1, 1000);
        let scale = Rational::one() / (Rational::one() + &bump);
        let atoms: Vec<(String, Rational)> = ext
            .space
            .atoms()
            .iter()
            .enumerate()
            .map(|(k, at)| {
                let w = if k == 0 {
                    &at.weight + &bump
                } else {
                    at.weight.clone()
                };
                (at.label.clone(), w * &scale)
            })
            .collect();
        ext.space = ProbSpace::new(atoms).unwrap();
        let report = verify_homomorphism(&ext, &s);
        assert!(!report.measure_preserved);
        assert!(!report.verdict);
        assert!(report.injective && report.preserves_meet);
    }

    #[test]
    fn childless_atom_breaks_injectivity() {
        let (s, a, b) = s4();
        let mut ext = extend_with_rccs(&s, &a, &b, &reference_star()).unwrap();
        // re-point both children of w4 to w3
        for p in ext.parent_of.iter_mut() {
            if *p == 3 {
                *p = 2;
            }
        }
        let report = verify_homomorphism(&ext, &s);
        assert!(!report.injective);
        assert!(!report.verdict);
    }
}
