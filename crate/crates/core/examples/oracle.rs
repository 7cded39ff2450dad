//! Exhaustively search the 8-atom extension of a space for 2-cell systems.

use rccs::rational::ratio;
use rccs::{
    construct_admissible_star, enumerate_rccs, extend_with_rccs, ConstructionRequest, Mode,
    ProbSpace, SearchBudget,
};

fn main() -> rccs::Result<()> {
    let space = ProbSpace::new([
        ("w1", ratio(3, 8)),
        ("w2", ratio(1, 8)),
        ("w3", ratio(1, 8)),
        ("w4", ratio(3, 8)),
    ])?;
    let a = space.event(&["w1", "w2"])?;
    let b = space.event(&["w1", "w3"])?;
    let target = space.correlation_summary(&a, &b)?;
    let set = construct_admissible_star(&ConstructionRequest::new(target, 2, Mode::Realizable))?;
    let ext = extend_with_rccs(&space, &a, &b, &set)?;

    let found = enumerate_rccs(&ext.space, &ext.a, &ext.b, 2, SearchBudget::default())?;
    println!(
        "{} of {} partitions qualify",
        found.partitions.len(),
        found.examined
    );
    for p in &found.partitions {
        let cells: Vec<String> = p.labels(&ext.space).iter().map(|c| c.join(",")).collect();
        let marker = if p.cells() == ext.rccs.cells() {
            "  <- constructed"
        } else {
            ""
        };
        println!("  {{{}}}{marker}", cells.join("} {"));
    }
    Ok(())
}
