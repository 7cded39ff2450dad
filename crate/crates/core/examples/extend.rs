//! Embed a four-atom space into one carrying a 3-cell common cause system.

use rccs::rational::ratio;
use rccs::{
    construct_admissible_star, extend_with_rccs, verify_homomorphism, verify_rccs,
    ConstructionRequest, Mode, ProbSpace,
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
    let set = construct_admissible_star(&ConstructionRequest::new(target, 3, Mode::Realizable))?;
    let ext = extend_with_rccs(&space, &a, &b, &set)?;

    let hom = verify_homomorphism(&ext, &space);
    println!(
        "{} atoms; embedding ok: {} ({} events)",
        ext.space.len(),
        hom.verdict,
        hom.events_checked
    );
    println!(
        "common cause system: {}",
        verify_rccs(&ext.space, &ext.a, &ext.b, &ext.rccs)?.verdict
    );
    for (i, cell) in ext.rccs.cells().iter().enumerate() {
        println!("  C{}: {}", i + 1, cell.labels(&ext.space).join(" "));
    }
    Ok(())
}
