//! Build admissible* sets in both modes and re-check them.

use rccs::rational::ratio;
use rccs::{
    check_admissible_star, construct_admissible_star, ConstructionRequest, CorrelationSummary, Mode,
};

fn main() -> rccs::Result<()> {
    let target = CorrelationSummary::from_marginals(ratio(1, 3), ratio(1, 4), ratio(1, 6));
    for mode in [Mode::Literal, Mode::Realizable] {
        let set = construct_admissible_star(&ConstructionRequest::new(target.clone(), 4, mode))?;
        let check = check_admissible_star(&set);
        println!(
            "{mode:?}: admissible* {}, joint sum {} (pAB = {})",
            check.verdict, check.joint_sum, target.p_ab
        );
        println!("{}", set.to_json());
    }
    Ok(())
}
