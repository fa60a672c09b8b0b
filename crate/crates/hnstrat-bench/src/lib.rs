//! Shared instance builders for the benchmark targets.

use hnstrat_core::complex::{FormalComplex, FormalSheaf};
use hnstrat_core::poly::Poly;
use hnstrat_core::rational::Rational;
use hnstrat_core::stability::EpsilonFamily;

fn sheaf(rank: u64, c1: i64, c0: i64) -> FormalSheaf {
    FormalSheaf::new(rank, Poly::linear(c1, c0))
}

/// Two-term curve complex with a three-block refined type; the same instance
/// the integration tests walk through, so timings track the documented path.
pub fn walkthrough_complex() -> FormalComplex {
    FormalComplex {
        dim_x: 1,
        deg_x: Rational::one(),
        m1: 0,
        m2: 1,
        terms: vec![Some(sheaf(2, 2, 2)), Some(sheaf(2, 2, 3))],
        images: vec![Some(sheaf(1, 1, 1))],
        cohomology_hn: Some(vec![vec![sheaf(1, 1, 1)], vec![sheaf(1, 1, 2)]]),
        image_hn: Some(vec![vec![sheaf(1, 1, 1)]]),
    }
}

/// The matching parameter family: eta = (0, 1), constant delta, epsilon 1/10.
pub fn walkthrough_family() -> EpsilonFamily {
    EpsilonFamily {
        eta: [(0, Rational::zero()), (1, Rational::one())].into(),
        delta: Poly::constant(Rational::one()),
        epsilon: Rational::new(1, 10).unwrap(),
    }
}
