//! Check a conjunctive fork and a two-cell common cause system on one space.

use rccs::rational::ratio;
use rccs::{verify_fork, verify_rccs, ProbSpace};

fn main() -> rccs::Result<()> {
    // inside C and outside it, A and B are independent; both are likelier in C
    let space = ProbSpace::new([
        ("c_ab", ratio(1, 8)),
        ("c_a", ratio(1, 8)),
        ("c_b", ratio(1, 8)),
        ("c_n", ratio(1, 8)),
        ("x_ab", ratio(1, 32)),
        ("x_a", ratio(3, 32)),
        ("x_b", ratio(3, 32)),
        ("x_n", ratio(9, 32)),
    ])?;
    let a = space.event(&["c_ab", "c_a", "x_ab", "x_a"])?;
    let b = space.event(&["c_ab", "c_b", "x_ab", "x_b"])?;
    let c = space.event(&["c_ab", "c_a", "c_b", "c_n"])?;

    let fork = verify_fork(&space, &a, &b, &c)?;
    println!("conjunctive fork: {}", fork.verdict);
    for cond in &fork.conditions {
        println!("  {} holds: {}", cond.id, cond.holds);
    }

    let partition = space.validate_partition(vec![c.clone(), c.complement()])?;
    let report = verify_rccs(&space, &a, &b, &partition)?;
    println!("{{C, not C}} is a common cause system: {}", report.verdict);
    println!("gamma = {}", space.correlation_summary(&a, &b)?.gamma);
    Ok(())
}
