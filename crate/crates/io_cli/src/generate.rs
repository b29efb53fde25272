//! Uniformly random complete markets.

use matching_core::{Instance, Partner};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuotaMode {
    #[default]
    Unit,
    /// Quotas drawn uniformly from `1..=max`, clamped to the market size.
    Random { max: usize },
}

fn full_order(rng: &mut ChaCha8Rng, n: usize) -> Vec<Partner> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order.into_iter().map(Some).chain([None]).collect()
}

/// `n` students `a1..` and `n` schools `b1..`, each ranking every agent of
/// the other side in uniformly random order with the outside option last.
pub fn generate_random(n: usize, seed: u64, quota: QuotaMode) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let quotas: Vec<usize> = match quota {
        QuotaMode::Unit => vec![1; n],
        QuotaMode::Random { max } => (0..n).map(|_| rng.gen_range(1..=max.clamp(1, n.max(1)))).collect(),
    };
    let student_pref = (0..n).map(|_| full_order(&mut rng, n)).collect();
    let school_pref = (0..n).map(|_| full_order(&mut rng, n)).collect();
    Instance::new(
        (1..=n).map(|i| format!("a{i}")).collect(),
        (1..=n).map(|i| format!("b{i}")).collect(),
        quotas,
        student_pref,
        school_pref,
    )
    .expect("generated instance is valid")
}
