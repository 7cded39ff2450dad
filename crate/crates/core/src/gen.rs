//! Seeded generators of small random spaces, partitions and forks.
//!
//! Used by the randomized identity sweeps and the test suites. All weights
//! are drawn from small denominators so that exact ties (and hence genuine
//! screening off) occur often enough to exercise both sides of every check.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::admissibility::{realize_cells, CellSpec, Realization};
use crate::rational::{ratio, Rational};
use crate::space::{Event, Partition, ProbSpace};

/// Space with `2..=max_atoms` atoms and weights `w_i / Σw`, `w_i ∈ 0..=grain`.
/// Zero weights occur.
pub fn random_space<R: Rng>(rng: &mut R, max_atoms: usize, grain: i64) -> ProbSpace {
    let k = rng.gen_range(2..=max_atoms.max(2));
    loop {
        let raw: Vec<i64> = (0..k).map(|_| rng.gen_range(0..=grain)).collect();
        let total: i64 = raw.iter().sum();
        if total == 0 {
            continue;
        }
        let atoms = raw
            .iter()
            .enumerate()
            .map(|(i, &w)| (format!("w{}", i + 1), ratio(w, total)));
        return ProbSpace::new(atoms).expect("normalized weights");
    }
}

pub fn random_event<R: Rng>(rng: &mut R, space: &ProbSpace) -> Event {
    space.event_from_indices((0..space.len()).filter(|_| rng.gen_bool(0.5)))
}

/// Uniformly labelled partition into exactly `n` nonempty cells; `None` if
/// the space has fewer than `n` atoms.
pub fn random_partition<R: Rng>(rng: &mut R, space: &ProbSpace, n: usize) -> Option<Partition> {
    let k = space.len();
    if n == 0 || n > k {
        return None;
    }
    // seed each cell with a distinct atom, scatter the rest
    let mut order: Vec<usize> = (0..k).collect();
    order.shuffle(rng);
    let mut block = vec![0usize; k];
    for (pos, &atom) in order.iter().enumerate() {
        block[atom] = if pos < n { pos } else { rng.gen_range(0..n) };
    }
    let cells = (0..n)
        .map(|c| space.event_from_indices((0..k).filter(|&x| block[x] == c)))
        .collect();
    Some(
        space
            .validate_partition(cells)
            .expect("blocks form a partition"),
    )
}

fn unit_fraction<R: Rng>(rng: &mut R, den: i64) -> Rational {
    ratio(rng.gen_range(1..den), den)
}

/// Cells realized atom-by-quadrant with screening off in every cell:
/// `d_i = a_i b_i`. Whether the cells are co-monotone is left to chance.
pub fn screening_cells<R: Rng>(rng: &mut R, n: usize) -> Realization {
    let raw: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=6)).collect();
    let total: i64 = raw.iter().sum();
    let cells: Vec<CellSpec> = raw
        .iter()
        .map(|&w| {
            let a = unit_fraction(rng, 6);
            let b = unit_fraction(rng, 6);
            CellSpec {
                mass: ratio(w, total),
                ab: &a * &b,
                a,
                b,
            }
        })
        .collect();
    realize_cells(&cells).expect("screening cells have nonnegative quadrants")
}

/// A conjunctive fork: two cells `C`, `C̄` with screening off in each and
/// `p(A|C) > p(A|C̄)`, `p(B|C) > p(B|C̄)`. Returns the space, `A`, `B`, `C`.
pub fn random_fork<R: Rng>(rng: &mut R) -> (ProbSpace, Event, Event, Event) {
    let den = 12;
    let pair = |rng: &mut R| {
        let mut x = rng.gen_range(1..den);
        let mut y = rng.gen_range(1..den);
        while x == y {
            y = rng.gen_range(1..den);
        }
        if x < y {
            std::mem::swap(&mut x, &mut y);
        }
        (ratio(x, den), ratio(y, den))
    };
    let (a_hi, a_lo) = pair(rng);
    let (b_hi, b_lo) = pair(rng);
    let pc = unit_fraction(rng, den);
    let cells = [
        CellSpec {
            mass: pc.clone(),
            ab: &a_hi * &b_hi,
            a: a_hi,
            b: b_hi,
        },
        CellSpec {
            mass: Rational::from_integer(1.into()) - pc,
            ab: &a_lo * &b_lo,
            a: a_lo,
            b: b_lo,
        },
    ];
    let r = realize_cells(&cells).expect("fork cells are valid");
    let c = r.partition.cells()[0].clone();
    (r.space, r.a, r.b, c)
}
