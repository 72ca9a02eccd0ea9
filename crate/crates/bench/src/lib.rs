//! Benchmark fixtures shared by the criterion targets.

use ccauchy::verify::{random_distribution, random_map};
use ccauchy::{ComplexCauchy, MobiusMap};

/// Deterministic distribution and map pair of dimension `p`.
pub fn fixture(p: usize) -> (ComplexCauchy, MobiusMap) {
    (random_distribution(p, 11), random_map(p, 12))
}
