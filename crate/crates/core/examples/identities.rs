//! The covariance of a pair splits into a co-monotone part and a screening
//! defect part over any partition.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rccs::{correlation_decomposition, gen};

fn main() -> rccs::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..5 {
        let space = gen::random_space(&mut rng, 6, 5);
        let a = gen::random_event(&mut rng, &space);
        let b = gen::random_event(&mut rng, &space);
        let n = rng.gen_range(1..=space.len().min(3));
        let partition = gen::random_partition(&mut rng, &space, n).expect("n <= atoms");
        match correlation_decomposition(&space, &a, &b, &partition) {
            Ok(d) => println!(
                "n={n}: cov {} = co-monotone {} + defects {} (gap {})",
                d.pair_covariance, d.comonotone_sum, d.defect_sum, d.identity_gap
            ),
            Err(e) => println!("n={n}: skipped ({e})"),
        }
    }
    Ok(())
}
