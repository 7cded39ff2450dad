//! Two cells whose screening defects cancel: admissible numbers, yet no
//! screening off.

use rccs::admissibility::counterexample_cells;
use rccs::AdmissibleSet;
use rccs::{check_admissible, diagnose_cancellation, realize_counterexample, verify_rccs};

fn main() -> rccs::Result<()> {
    let r = realize_counterexample();
    let diag = diagnose_cancellation(&r.space, &r.a, &r.b, &r.partition)?;
    for (i, d) in diag.defects.iter().enumerate() {
        println!("weighted defect in C{}: {d}", i + 1);
    }
    println!("sum: {}", diag.defect_sum);

    let cells = counterexample_cells();
    let set = AdmissibleSet {
        a: cells.iter().map(|c| c.a.clone()).collect(),
        b: cells.iter().map(|c| c.b.clone()).collect(),
        c: cells.iter().map(|c| c.mass.clone()).collect(),
        target: r.space.correlation_summary(&r.a, &r.b)?,
    };
    let adm = check_admissible(&set);
    println!("admissible: {} (joint sum {})", adm.verdict, adm.joint_sum);
    println!(
        "common cause system: {}",
        verify_rccs(&r.space, &r.a, &r.b, &r.partition)?.verdict
    );
    println!("{}", diag.note);
    Ok(())
}
