//! Finite probability spaces, events, partitions and conditional probability.
//!
//! A [`ProbSpace`] is an ordered list of labelled atoms with rational weights
//! summing to exactly one. Events are subsets of atoms; the event algebra is
//! the full power set. Atoms of weight zero are allowed, but conditioning on
//! an event of measure zero is an error.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap};
use std::hash::{Hash, Hasher};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, PartitionDefect, Result};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub label: String,
    pub weight: Rational,
}

#[derive(Debug, Clone)]
pub struct ProbSpace {
    atoms: Vec<Atom>,
    index: HashMap<String, usize>,
    id: u64,
}

impl PartialEq for ProbSpace {
    fn eq(&self, other: &Self) -> bool {
        self.atoms == other.atoms
    }
}

impl Eq for ProbSpace {}

impl ProbSpace {
    /// Build a space, rejecting negative weights, duplicate labels, an empty
    /// atom list, and weights that do not sum to exactly one.
    pub fn new<L: Into<String>>(atoms: impl IntoIterator<Item = (L, Rational)>) -> Result<Self> {
        let atoms: Vec<Atom> = atoms
            .into_iter()
            .map(|(label, weight)| Atom {
                label: label.into(),
                weight,
            })
            .collect();
        if atoms.is_empty() {
            return Err(Error::InvalidSpace(
                "a space needs at least one atom".into(),
            ));
        }
        let mut index = HashMap::with_capacity(atoms.len());
        for (i, atom) in atoms.iter().enumerate() {
            if atom.weight.is_negative() {
                return Err(Error::InvalidSpace(format!(
                    "atom {:?} has negative weight {}",
                    atom.label, atom.weight
                )));
            }
            if index.insert(atom.label.clone(), i).is_some() {
                return Err(Error::InvalidSpace(format!(
                    "duplicate atom label {:?}",
                    atom.label
                )));
            }
        }
        let total: Rational = atoms.iter().map(|a| &a.weight).sum();
        if !total.is_one() {
            return Err(Error::InvalidSpace(format!(
                "weights sum to {total}, not 1"
            )));
        }
        let mut hasher = DefaultHasher::new();
        for atom in &atoms {
            atom.label.hash(&mut hasher);
            atom.weight.hash(&mut hasher);
        }
        Ok(ProbSpace {
            atoms,
            index,
            id: hasher.finish(),
        })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn weight(&self, atom: usize) -> &Rational {
        &self.atoms[atom].weight
    }

    pub fn label(&self, atom: usize) -> &str {
        &self.atoms[atom].label
    }

    pub fn atom_index(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn empty_event(&self) -> Event {
        Event {
            space: self.id,
            members: vec![false; self.len()],
        }
    }

    pub fn whole(&self) -> Event {
        Event {
            space: self.id,
            members: vec![true; self.len()],
        }
    }

    pub fn event_from_indices(&self, indices: impl IntoIterator<Item = usize>) -> Event {
        let mut e = self.empty_event();
        for i in indices {
            e.members[i] = true;
        }
        e
    }

    pub fn event_from_mask(&self, mask: &[bool]) -> Event {
        assert_eq!(mask.len(), self.len(), "mask length must equal atom count");
        Event {
            space: self.id,
            members: mask.to_vec(),
        }
    }

    /// Event made of the named atoms.
    pub fn event<S: AsRef<str>>(&self, labels: &[S]) -> Result<Event> {
        let mut e = self.empty_event();
        for l in labels {
            let i = self
                .atom_index(l.as_ref())
                .ok_or_else(|| Error::UnknownName(l.as_ref().to_string()))?;
            e.members[i] = true;
        }
        Ok(e)
    }

    pub fn owns(&self, e: &Event) -> bool {
        e.space == self.id && e.members.len() == self.len()
    }

    fn check(&self, e: &Event) -> Result<()> {
        if self.owns(e) {
            Ok(())
        } else {
            Err(Error::ForeignEvent)
        }
    }

    /// Sum of the weights of the atoms in `e`.
    pub fn probability(&self, e: &Event) -> Result<Rational> {
        self.check(e)?;
        Ok(e.indices().map(|i| &self.atoms[i].weight).sum())
    }

    /// `p(x | given) = p(x ∧ given) / p(given)`.
    pub fn conditional(&self, x: &Event, given: &Event) -> Result<Rational> {
        self.check(x)?;
        let pg = self.probability(given)?;
        if pg.is_zero() {
            return Err(Error::ZeroMeasureCondition(rational::format(&pg)));
        }
        Ok(self.probability(&x.meet(given))? / pg)
    }

    pub fn correlation_summary(&self, a: &Event, b: &Event) -> Result<CorrelationSummary> {
        let pa = self.probability(a)?;
        let pb = self.probability(b)?;
        let pab = self.probability(&a.meet(b))?;
        let summary = CorrelationSummary::from_marginals(pa, pb, pab);
        debug_assert_eq!(
            summary.quadrants[3],
            self.probability(&a.complement().meet(&b.complement()))?
        );
        Ok(summary)
    }

    /// Accept `cells` as a partition iff they are pairwise disjoint and cover
    /// every atom.
    pub fn validate_partition(&self, cells: Vec<Event>) -> Result<Partition> {
        if cells.is_empty() {
            return Err(Error::NotAPartition {
                defect: PartitionDefect::Gap,
                detail: "no cells".into(),
            });
        }
        for c in &cells {
            self.check(c)?;
        }
        let mut owner: Vec<Option<usize>> = vec![None; self.len()];
        for (ci, cell) in cells.iter().enumerate() {
            for atom in cell.indices() {
                if let Some(prev) = owner[atom] {
                    return Err(Error::NotAPartition {
                        defect: PartitionDefect::Overlap,
                        detail: format!(
                            "atom {:?} lies in cells {} and {}",
                            self.label(atom),
                            prev + 1,
                            ci + 1
                        ),
                    });
                }
                owner[atom] = Some(ci);
            }
        }
        if let Some(missing) = owner.iter().position(Option::is_none) {
            return Err(Error::NotAPartition {
                defect: PartitionDefect::Gap,
                detail: format!("atom {:?} is in no cell", self.label(missing)),
            });
        }
        Ok(Partition { cells })
    }

    /// The partition into `{A∧B, A∧B̄, Ā∧B, Ā∧B̄}` in that order, empty cells
    /// included.
    pub fn quadrant_cells(&self, a: &Event, b: &Event) -> [Event; 4] {
        let na = a.complement();
        let nb = b.complement();
        [a.meet(b), a.meet(&nb), na.meet(b), na.meet(&nb)]
    }
}

/// A subset of the atoms of one particular space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Event {
    space: u64,
    members: Vec<bool>,
}

impl Event {
    pub fn contains(&self, atom: usize) -> bool {
        self.members.get(atom).copied().unwrap_or(false)
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.members
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
    }

    pub fn count(&self) -> usize {
        self.members.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.members.iter().any(|&m| m)
    }

    pub fn mask(&self) -> &[bool] {
        &self.members
    }

    pub fn labels<'s>(&self, space: &'s ProbSpace) -> Vec<&'s str> {
        self.indices().map(|i| space.label(i)).collect()
    }

    pub fn complement(&self) -> Event {
        Event {
            space: self.space,
            members: self.members.iter().map(|m| !m).collect(),
        }
    }

    /// Intersection. Both events must come from the same space.
    pub fn meet(&self, other: &Event) -> Event {
        self.zip(other, |x, y| x && y)
    }

    /// Union. Both events must come from the same space.
    pub fn join(&self, other: &Event) -> Event {
        self.zip(other, |x, y| x || y)
    }

    fn zip(&self, other: &Event, f: impl Fn(bool, bool) -> bool) -> Event {
        assert!(
            self.space == other.space && self.members.len() == other.members.len(),
            "events from different spaces cannot be combined"
        );
        Event {
            space: self.space,
            members: self
                .members
                .iter()
                .zip(&other.members)
                .map(|(&x, &y)| f(x, y))
                .collect(),
        }
    }
}

/// Pairwise-disjoint, covering list of events, in caller order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    cells: Vec<Event>,
}

impl Partition {
    pub fn cells(&self) -> &[Event] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn into_cells(self) -> Vec<Event> {
        self.cells
    }

    pub fn labels<'s>(&self, space: &'s ProbSpace) -> Vec<Vec<&'s str>> {
        self.cells.iter().map(|c| c.labels(space)).collect()
    }
}

/// The four cells generated by a pair of events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quadrant {
    AB,
    ANotB,
    NotAB,
    NotANotB,
}

impl Quadrant {
    pub const ALL: [Quadrant; 4] = [
        Quadrant::AB,
        Quadrant::ANotB,
        Quadrant::NotAB,
        Quadrant::NotANotB,
    ];

    pub fn of(in_a: bool, in_b: bool) -> Quadrant {
        match (in_a, in_b) {
            (true, true) => Quadrant::AB,
            (true, false) => Quadrant::ANotB,
            (false, true) => Quadrant::NotAB,
            (false, false) => Quadrant::NotANotB,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Quadrant::AB => "A&B",
            Quadrant::ANotB => "A&!B",
            Quadrant::NotAB => "!A&B",
            Quadrant::NotANotB => "!A&!B",
        }
    }
}

impl std::fmt::Display for Quadrant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Marginals, joint, covariance and quadrant masses of a pair `(A, B)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorrelationSummary {
    #[serde(with = "rational::serde_str")]
    pub a: Rational,
    #[serde(with = "rational::serde_str")]
    pub b: Rational,
    #[serde(rename = "pAB", with = "rational::serde_str")]
    pub p_ab: Rational,
    #[serde(with = "rational::serde_str")]
    pub gamma: Rational,
    /// `p(A∧B), p(A∧B̄), p(Ā∧B), p(Ā∧B̄)`.
    #[serde(with = "rational::serde_str::vec")]
    pub quadrants: [Rational; 4],
    pub positive: bool,
}

impl CorrelationSummary {
    /// Everything about a pair is determined by `p(A)`, `p(B)` and `p(A∧B)`.
    pub fn from_marginals(a: Rational, b: Rational, p_ab: Rational) -> Self {
        let gamma = &p_ab - &a * &b;
        let quadrants = [
            p_ab.clone(),
            &a - &p_ab,
            &b - &p_ab,
            Rational::one() - &a - &b + &p_ab,
        ];
        CorrelationSummary {
            positive: gamma.is_positive(),
            a,
            b,
            p_ab,
            gamma,
            quadrants,
        }
    }

    pub fn quadrant(&self, q: Quadrant) -> &Rational {
        &self.quadrants[q.index()]
    }

    /// First quadrant of probability zero, if any.
    pub fn zero_quadrant(&self) -> Option<Quadrant> {
        Quadrant::ALL
            .into_iter()
            .find(|q| self.quadrant(*q).is_zero())
    }

    /// `true` when the marginals describe a genuine joint distribution.
    pub fn is_consistent(&self) -> bool {
        self.quadrants.iter().all(|q| !q.is_negative())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct AtomJson {
    label: String,
    weight: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct SpaceJson {
    atoms: Vec<AtomJson>,
    #[serde(default)]
    events: BTreeMap<String, Vec<String>>,
}

/// A space together with named events, as stored in space files.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceDocument {
    pub space: ProbSpace,
    pub events: BTreeMap<String, Event>,
}

impl SpaceDocument {
    pub fn new(space: ProbSpace) -> Self {
        SpaceDocument {
            space,
            events: BTreeMap::new(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: SpaceJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_value(raw)
    }

    /// Parse the space part of any JSON value carrying `atoms` and `events`.
    pub fn from_json_value(value: serde_json::Value) -> Result<Self> {
        let raw: SpaceJson =
            serde_json::from_value(value).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_value(raw)
    }

    fn from_value(raw: SpaceJson) -> Result<Self> {
        let atoms = raw
            .atoms
            .into_iter()
            .map(|a| Ok((a.label, rational::parse(&a.weight)?)))
            .collect::<Result<Vec<_>>>()?;
        let space = ProbSpace::new(atoms)?;
        let events = raw
            .events
            .into_iter()
            .map(|(name, labels)| Ok((name, space.event(&labels)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(SpaceDocument { space, events })
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let raw = SpaceJson {
            atoms: self
                .space
                .atoms()
                .iter()
                .map(|a| AtomJson {
                    label: a.label.clone(),
                    weight: rational::format(&a.weight),
                })
                .collect(),
            events: self
                .events
                .iter()
                .map(|(name, e)| {
                    (
                        name.clone(),
                        e.labels(&self.space)
                            .into_iter()
                            .map(String::from)
                            .collect(),
                    )
                })
                .collect(),
        };
        serde_json::to_value(raw).expect("space serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("space serializes")
    }

    pub fn named(&self, name: &str) -> Result<&Event> {
        self.events
            .get(name)
            .ok_or_else(|| Error::UnknownName(name.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn s4() -> ProbSpace {
        ProbSpace::new([
            ("w1", ratio(3, 8)),
            ("w2", ratio(1, 8)),
            ("w3", ratio(1, 8)),
            ("w4", ratio(3, 8)),
        ])
        .unwrap()
    }

    #[test]
    fn probability_examples() {
        let s = s4();
        assert_eq!(s.probability(&s.whole()).unwrap(), ratio(1, 1));
        assert_eq!(s.probability(&s.empty_event()).unwrap(), ratio(0, 1));
        let e = s.event(&["w1", "w2"]).unwrap();
        assert_eq!(s.probability(&e).unwrap(), ratio(1, 2));
    }

    #[test]
    fn foreign_event_is_rejected() {
        let s = s4();
        let other = ProbSpace::new([("x", ratio(1, 2)), ("y", ratio(1, 2))]).unwrap();
        let e = other.whole();
        assert_eq!(s.probability(&e), Err(Error::ForeignEvent));
    }

    #[test]
    fn conditional_examples() {
        let s = s4();
        let a = s.event(&["w1", "w2"]).unwrap();
        let c = s.event(&["w1", "w3"]).unwrap();
        assert_eq!(s.conditional(&a, &c).unwrap(), ratio(3, 4));
        assert_eq!(
            s.conditional(&a, &s.whole()).unwrap(),
            s.probability(&a).unwrap()
        );
        assert!(matches!(
            s.conditional(&a, &s.empty_event()),
            Err(Error::ZeroMeasureCondition(_))
        ));
    }

    #[test]
    fn zero_weight_atom_conditioning_errors() {
        let s = ProbSpace::new([("x", ratio(1, 1)), ("z", ratio(0, 1))]).unwrap();
        let z = s.event(&["z"]).unwrap();
        assert!(matches!(
            s.conditional(&s.whole(), &z),
            Err(Error::ZeroMeasureCondition(_))
        ));
    }

    #[test]
    fn correlation_summary_examples() {
        let s = s4();
        let a = s.event(&["w1", "w2"]).unwrap();
        let b = s.event(&["w1", "w3"]).unwrap();
        let sum = s.correlation_summary(&a, &b).unwrap();
        assert_eq!(sum.a, ratio(1, 2));
        assert_eq!(sum.b, ratio(1, 2));
        assert_eq!(sum.p_ab, ratio(3, 8));
        assert_eq!(sum.gamma, ratio(1, 8));
        assert!(sum.positive);

        let same = s.correlation_summary(&a, &a).unwrap();
        assert_eq!(same.gamma, ratio(1, 4));

        // product weights make the pair independent
        let ind = ProbSpace::new([
            ("ab", ratio(1, 6)),
            ("a_", ratio(1, 6)),
            ("_b", ratio(2, 6)),
            ("__", ratio(2, 6)),
        ])
        .unwrap();
        let ia = ind.event(&["ab", "a_"]).unwrap();
        let ib = ind.event(&["ab", "_b"]).unwrap();
        let isum = ind.correlation_summary(&ia, &ib).unwrap();
        assert_eq!(isum.gamma, ratio(0, 1));
        assert!(!isum.positive);
    }

    #[test]
    fn partition_examples() {
        let s = s4();
        assert_eq!(s.validate_partition(vec![s.whole()]).unwrap().len(), 1);
        let overlap = s.validate_partition(vec![
            s.event(&["w1"]).unwrap(),
            s.event(&["w1", "w2"]).unwrap(),
            s.event(&["w3", "w4"]).unwrap(),
        ]);
        assert!(matches!(
            overlap,
            Err(Error::NotAPartition {
                defect: PartitionDefect::Overlap,
                ..
            })
        ));
        let gap = s.validate_partition(vec![s.event(&["w1", "w2"]).unwrap()]);
        assert!(matches!(
            gap,
            Err(Error::NotAPartition {
                defect: PartitionDefect::Gap,
                ..
            })
        ));
        let singletons = (0..4).map(|i| s.event_from_indices([i])).collect();
        assert_eq!(s.validate_partition(singletons).unwrap().len(), 4);
    }

    #[test]
    fn space_construction_errors() {
        assert!(ProbSpace::new(Vec::<(String, Rational)>::new()).is_err());
        assert!(ProbSpace::new([("a", ratio(1, 2)), ("a", ratio(1, 2))]).is_err());
        assert!(ProbSpace::new([("a", ratio(3, 2)), ("b", ratio(-1, 2))]).is_err());
        assert!(ProbSpace::new([("a", ratio(1, 2)), ("b", ratio(1, 3))]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"atoms":[{"label":"w1","weight":"3/8"},{"label":"w2","weight":"1/8"},
            {"label":"w3","weight":"1/8"},{"label":"w4","weight":"3/8"}],
            "events":{"A":["w1","w2"],"B":["w1","w3"]}}"#;
        let doc = SpaceDocument::from_json(text).unwrap();
        assert_eq!(doc.space, s4());
        let again = SpaceDocument::from_json(&doc.to_json()).unwrap();
        assert_eq!(again, doc);
    }

    #[test]
    fn json_rejects_bad_weights() {
        let bad = r#"{"atoms":[{"label":"w1","weight":"3/0"}]}"#;
        assert!(matches!(
            SpaceDocument::from_json(bad),
            Err(Error::Parse(_))
        ));
        let short = r#"{"atoms":[{"label":"w1","weight":"1/2"}]}"#;
        assert!(matches!(
            SpaceDocument::from_json(short),
            Err(Error::InvalidSpace(_))
        ));
    }
}
