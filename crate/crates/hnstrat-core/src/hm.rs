//! One-parameter subgroups of the ambient group and their Hilbert-Mumford
//! weights on a parameter point, at the level of formal invariants.
//!
//! A 1-PS is recorded by its strictly decreasing global weights and, per
//! position, the dimensions of the weight blocks of V^i = H^0(F^i(n)) (so
//! dim V^i = P^i(n), which must be a positive integer). The induced sheaf
//! filtration is part of the data: `quotient_ranks[i][j]` is the rank of the
//! j-th successive quotient. Whether the 1-PS preserves the boundary maps
//! cannot be seen from invariants alone, so compatibility and the crossing
//! weight N (the minimal block weight carrying the surviving boundary when
//! not compatible) are recorded fields, produced by the concrete oracle or
//! supplied by the caller.
//!
//! The weight formulas: with B = P_sigma(n) / (r_sigma delta(n)),
//!
//! ```text
//!   mu = sum_i sum_j k_j (sigma_i B + eta_i) rk E^i_j        (compatible)
//!   mu = (same sum) - N                                       (otherwise)
//! ```
//!
//! An equivalent three-part route goes through the linearization data: the
//! decoration weight plus sum_i a_i times the Gieseker weight at position i,
//! minus the character pairing with the c_i; both routes agree exactly for
//! every 1-PS satisfying the determinant-one condition.

use crate::complex::FormalComplex;
use crate::error::Error;
use crate::rational::{denominator_lcm, Rational};
use crate::stability::StabilityParameters;
use num::BigInt;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct OneParameterSubgroup {
    /// Strictly decreasing weights k_1 > ... > k_s.
    pub weights: Vec<Rational>,
    /// Per position, dim V^i_j for each weight slot; entries sum to P^i(n).
    pub blocks: BTreeMap<i64, Vec<u64>>,
    /// Per position, rk of the j-th successive sheaf quotient E^i_j.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quotient_ranks: Option<BTreeMap<i64, Vec<u64>>>,
    /// Whether the 1-PS preserves the boundary maps (induces a filtration by
    /// subcomplexes). Absent means unknown; the weight routines then assume
    /// the compatible case.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compatible: Option<bool>,
    /// The crossing weight N < 0 of the surviving boundary blocks when not
    /// compatible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crossing: Option<Rational>,
}

impl OneParameterSubgroup {
    /// Scale the weights by the least common multiple of their denominators;
    /// returns the integer-weight subgroup and the scale used. Weights scale
    /// the Hilbert-Mumford weight linearly.
    pub fn integerize(&self) -> (OneParameterSubgroup, BigInt) {
        let scale = denominator_lcm(self.weights.iter());
        let factor = Rational::from_bigint(scale.clone());
        let weights = self.weights.iter().map(|k| k * &factor).collect();
        let crossing = self.crossing.as_ref().map(|n| n * &factor);
        (
            OneParameterSubgroup {
                weights,
                crossing,
                ..self.clone()
            },
            scale,
        )
    }

    fn block_dims(&self, i: i64, slots: usize) -> Vec<u64> {
        self.blocks.get(&i).cloned().unwrap_or_else(|| vec![0; slots])
    }
}

/// dim V^i = P^i(n) for each nonzero term, checked to be a positive integer.
pub fn global_dims(c: &FormalComplex, n: u64) -> Result<BTreeMap<i64, u64>, Error> {
    let mut dims = BTreeMap::new();
    for (i, _, p) in c.position_data() {
        let v = p.eval_int(n as i64);
        if !v.is_positive() {
            return Err(Error::NonpositiveValueAtN {
                label: format!("P^{i}(n)"),
                value: v.to_string(),
            });
        }
        if !v.is_integer() {
            return Err(Error::NonIntegralMultiplicity {
                label: format!("P^{i}(n)"),
                value: v.to_string(),
            });
        }
        let d = v.to_u64().ok_or_else(|| Error::InvalidInput(format!(
            "P^{i}(n) is too large for a dimension"
        )))?;
        dims.insert(i, d);
    }
    Ok(dims)
}

/// Structural validity of a 1-PS against the ambient dimensions: strictly
/// decreasing weights (at least two, a single weight is the trivial
/// subgroup), blocks of the right shape summing to the dimensions, quotient
/// ranks (when present) summing to the sheaf ranks and vanishing on empty
/// blocks, and the determinant-one condition
/// sum_i sigma_i sum_j k_j dim V^i_j = 0.
pub fn check_1ps(
    lambda: &OneParameterSubgroup,
    sigma: &BTreeMap<i64, u64>,
    dims: &BTreeMap<i64, u64>,
    ranks: Option<&BTreeMap<i64, u64>>,
) -> Result<(), Error> {
    let s = lambda.weights.len();
    if s < 2 {
        return Err(Error::MalformedDecomposition(
            "a one-parameter subgroup needs at least two distinct weights".into(),
        ));
    }
    for w in lambda.weights.windows(2) {
        if !(w[0] > w[1]) {
            return Err(Error::MalformedDecomposition(
                "weights must be strictly decreasing".into(),
            ));
        }
    }
    for (i, v) in &lambda.blocks {
        if !dims.contains_key(i) && v.iter().any(|&d| d != 0) {
            return Err(Error::MalformedDecomposition(format!(
                "blocks given at position {i} where the complex has no term"
            )));
        }
    }
    let mut det = Rational::zero();
    for (&i, &dim) in dims {
        let b = lambda.block_dims(i, s);
        if b.len() != s {
            return Err(Error::MalformedDecomposition(format!(
                "blocks at position {i} must have one entry per weight"
            )));
        }
        if b.iter().sum::<u64>() != dim {
            return Err(Error::MalformedDecomposition(format!(
                "blocks at position {i} must sum to dim V^{i} = {dim}"
            )));
        }
        let sig = Rational::from_int(*sigma.get(&i).unwrap_or(&0) as i64);
        for (k, &d) in lambda.weights.iter().zip(&b) {
            det = det + &(k * &Rational::from_int(d as i64)) * &sig;
        }
    }
    if !det.is_zero() {
        return Err(Error::MalformedDecomposition(format!(
            "determinant-one condition fails: weighted trace is {det}"
        )));
    }
    if let Some(ranks) = ranks {
        let Some(q) = &lambda.quotient_ranks else {
            return Err(Error::MalformedDecomposition(
                "quotient ranks are required".into(),
            ));
        };
        for (&i, &rk) in ranks {
            let qi = q.get(&i).cloned().unwrap_or_else(|| vec![0; s]);
            if qi.len() != s {
                return Err(Error::MalformedDecomposition(format!(
                    "quotient ranks at position {i} must have one entry per weight"
                )));
            }
            if qi.iter().sum::<u64>() != rk {
                return Err(Error::MalformedDecomposition(format!(
                    "quotient ranks at position {i} must sum to the sheaf rank {rk}"
                )));
            }
            let b = lambda.block_dims(i, s);
            for (j, (&dv, &rv)) in b.iter().zip(&qi).enumerate() {
                if dv == 0 && rv != 0 {
                    return Err(Error::MalformedDecomposition(format!(
                        "empty weight block {} at position {i} cannot produce sheaf rank",
                        j + 1
                    )));
                }
            }
        }
    }
    Ok(())
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum MuCase {
    /// The limit stays in the parameter space: the graded complex.
    SubcomplexFiltration,
    /// The limit leaves the parameter space; the weight picks up -N.
    LimitOutsideParameterSpace { crossing: Rational },
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct MuReport {
    pub mu: Rational,
    pub case: MuCase,
    /// (sigma_i B + eta_i) per position, B = P_sigma(n)/(r_sigma delta(n)).
    pub factors: BTreeMap<i64, Rational>,
    /// factor_i * sum_j k_j rk E^i_j per position.
    pub contributions: BTreeMap<i64, Rational>,
}

struct Ambient {
    /// P_sigma(n)
    p_n: Rational,
    /// r_sigma
    r: u64,
    delta_n: Rational,
    /// per nonzero position: (sigma, eta, rank, P^i(n))
    at: BTreeMap<i64, (u64, Rational, u64, Rational)>,
}

fn ambient_data(
    c: &FormalComplex,
    params: &StabilityParameters,
    n: u64,
) -> Result<Ambient, Error> {
    params.check_delta(c.dim_x)?;
    params.check_support(c.position_data().into_iter().map(|(i, _, _)| i))?;
    let delta_n = params.delta.eval_int(n as i64);
    if !delta_n.is_positive() {
        return Err(Error::NonpositiveValueAtN {
            label: "delta(n)".into(),
            value: delta_n.to_string(),
        });
    }
    let mut p_n = Rational::zero();
    let mut r = 0u64;
    let mut at = BTreeMap::new();
    for (i, rank, p) in c.position_data() {
        let sig = params.sigma[&i];
        let pi_n = p.eval_int(n as i64);
        if !pi_n.is_positive() {
            return Err(Error::NonpositiveValueAtN {
                label: format!("P^{i}(n)"),
                value: pi_n.to_string(),
            });
        }
        p_n = p_n + &pi_n * &Rational::from_int(sig as i64);
        r += sig * rank;
        at.insert(i, (sig, params.eta[&i].clone(), rank, pi_n));
    }
    if r == 0 {
        return Err(Error::DenominatorZero);
    }
    Ok(Ambient {
        p_n,
        r,
        delta_n,
        at,
    })
}

/// Hilbert-Mumford weight of the 1-PS at the point with the given invariantsassuming
/// and parameters. The eta values are used exactly as given; for the epsilon
/// family, normalize first so the weights match the stratification
/// conventions. Quotient ranks are required.
pub fn hm_weight(
    c: &FormalComplex,
    params: &StabilityParameters,
    n: u64,
    lambda: &OneParameterSubgroup,
) -> Result<MuReport, Error> {
    let dims = global_dims(c, n)?;
    check_1ps(lambda, &params.sigma, &dims, Some(&c.ranks()))?;
    let amb = ambient_data(c, params, n)?;
    let b = amb.p_n.checked_div(&(&Rational::from_int(amb.r as i64) * &amb.delta_n))?;
    let q = lambda
        .quotient_ranks
        .as_ref()
        .expect("checked by check_1ps");
    let s = lambda.weights.len();
    let mut factors = BTreeMap::new();
    let mut contributions = BTreeMap::new();
    let mut mu = Rational::zero();
    for (&i, (sig, eta, _, _)) in &amb.at {
        let factor = &(&b * &Rational::from_int(*sig as i64)) + eta;
        let qi = q.get(&i).cloned().unwrap_or_else(|| vec![0; s]);
        let mut weighted = Rational::zero();
        for (k, &rk) in lambda.weights.iter().zip(&qi) {
            weighted = weighted + k * &Rational::from_int(rk as i64);
        }
        let contribution = &factor * &weighted;
        mu = mu + &contribution;
        factors.insert(i, factor);
        contributions.insert(i, contribution);
    }
    let case = if lambda.compatible == Some(false) {
        let n_cross = lambda.crossing.clone().ok_or(Error::MissingCrossing)?;
        if !n_cross.is_negative() {
            return Err(Error::InvalidInput(
                "crossing weight must be negative when the limit leaves the parameter space"
                    .into(),
            ));
        }
        mu = mu - &n_cross;
        MuCase::LimitOutsideParameterSpace { crossing: n_cross }
    } else {
        MuCase::SubcomplexFiltration
    };
    Ok(MuReport {
        mu,
        case,
        factors,
        contributions,
    })
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct LinearizationData {
    pub n: u64,
    #[serde(rename = "pSigmaN")]
    pub p_sigma_n: Rational,
    pub r_sigma: u64,
    pub delta_n: Rational,
    /// Gieseker-factor exponents a_i; all must be positive for the
    /// linearization to be ample, which bounds n from below.
    pub a: BTreeMap<i64, Rational>,
    /// Character exponents c_i.
    pub c: BTreeMap<i64, Rational>,
    pub positivity_ok: bool,
}

/// The linearization constants at level n:
///
/// ```text
///   a_i = sigma_i (P_sigma(n) - r_sigma delta(n)) / (r_sigma delta(n)) + eta_i
///   c_i = sigma_i (B - 1)(r_sigma/P_sigma(n) - r^i/P^i(n)) - r^i eta_i / P^i(n)
/// ```
///
/// with B = P_sigma(n)/(r_sigma delta(n)). Positions with a zero term are
/// skipped.
pub fn linearization_data(
    c: &FormalComplex,
    params: &StabilityParameters,
    n: u64,
) -> Result<LinearizationData, Error> {
    let amb = ambient_data(c, params, n)?;
    let r_sigma = Rational::from_int(amb.r as i64);
    let b = amb.p_n.checked_div(&(&r_sigma * &amb.delta_n))?;
    let b_minus_one = &b - &Rational::one();
    let r_over_p = r_sigma.checked_div(&amb.p_n)?;
    let mut a = BTreeMap::new();
    let mut cc = BTreeMap::new();
    let mut positivity_ok = true;
    for (&i, (sig, eta, rank, pi_n)) in &amb.at {
        let sig_q = Rational::from_int(*sig as i64);
        let rk_over_pi = Rational::from_int(*rank as i64).checked_div(pi_n)?;
        let a_i = &(&sig_q * &b_minus_one) + eta;
        if !a_i.is_positive() {
            positivity_ok = false;
        }
        let c_i = &(&(&sig_q * &b_minus_one) * &(&r_over_p - &rk_over_pi))
            - &(&rk_over_pi * eta);
        a.insert(i, a_i);
        cc.insert(i, c_i);
    }
    Ok(LinearizationData {
        n,
        p_sigma_n: amb.p_n,
        r_sigma: amb.r,
        delta_n: amb.delta_n,
        a,
        c: cc,
        positivity_ok,
    })
}

/// Gieseker's weight of the induced 1-PS at position i:
/// sum_j k_j (rk E^i_j - dim V^i_j r^i / P^i(n)).
fn gieseker_weight(
    lambda: &OneParameterSubgroup,
    i: i64,
    rank: u64,
    pi_n: &Rational,
) -> Result<Rational, Error> {
    let s = lambda.weights.len();
    let q = lambda
        .quotient_ranks
        .as_ref()
        .ok_or_else(|| Error::MalformedDecomposition("quotient ranks are required".into()))?;
    let qi = q.get(&i).cloned().unwrap_or_else(|| vec![0; s]);
    let b = lambda.block_dims(i, s);
    let ratio = Rational::from_int(rank as i64).checked_div(pi_n)?;
    let mut out = Rational::zero();
    for ((k, &rk), &dim) in lambda.weights.iter().zip(&qi).zip(&b) {
        out = out
            + k * &(&Rational::from_int(rk as i64)
                - &(&Rational::from_int(dim as i64) * &ratio));
    }
    Ok(out)
}

/// The same Hilbert-Mumford weight assembled through the linearization: the
/// decoration weight, plus a_i times the Gieseker weight per position, minus
/// the character pairing. Agrees exactly with [`hm_weight`] on every 1-PS
/// satisfying the determinant condition; exposed as an independent route for
/// cross-checking.
pub fn hm_weight_via_linearization(
    c: &FormalComplex,
    params: &StabilityParameters,
    n: u64,
    lambda: &OneParameterSubgroup,
) -> Result<Rational, Error> {
    let dims = global_dims(c, n)?;
    check_1ps(lambda, &params.sigma, &dims, Some(&c.ranks()))?;
    let amb = ambient_data(c, params, n)?;
    let lin = linearization_data(c, params, n)?;
    let s = lambda.weights.len();
    let q = lambda
        .quotient_ranks
        .as_ref()
        .expect("checked by check_1ps");
    // decoration weight: sum k_j sigma_i rk E^i_j, minus N when the limit
    // leaves the parameter space
    let mut decoration = Rational::zero();
    for (&i, (sig, _, _, _)) in &amb.at {
        let qi = q.get(&i).cloned().unwrap_or_else(|| vec![0; s]);
        for (k, &rk) in lambda.weights.iter().zip(&qi) {
            decoration = decoration + k * &Rational::from_int((sig * rk) as i64);
        }
    }
    if lambda.compatible == Some(false) {
        let n_cross = lambda.crossing.clone().ok_or(Error::MissingCrossing)?;
        decoration = decoration - n_cross;
    }
    let mut total = decoration;
    for (&i, (_, _, rank, pi_n)) in &amb.at {
        total = total + &lin.a[&i] * &gieseker_weight(lambda, i, *rank, pi_n)?;
        // character pairing: c_i <k, dim V^i>
        let b = lambda.block_dims(i, s);
        let mut pairing = Rational::zero();
        for (k, &dim) in lambda.weights.iter().zip(&b) {
            pairing = pairing + k * &Rational::from_int(dim as i64);
        }
        total = total - &lin.c[&i] * &pairing;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::FormalSheaf;
    use crate::poly::Poly;
    use crate::stability::{normalize_eta, EpsilonFamily};

    fn sheaf(rank: u64, c1: i64, c0: i64) -> FormalSheaf {
        FormalSheaf::new(rank, Poly::linear(c1, c0))
    }

    fn c1() -> FormalComplex {
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

    /// Family parameters at epsilon = 1/10, eta normalized: eta' = (-5, 5).
    fn normalized_params() -> StabilityParameters {
        let family = EpsilonFamily {
            eta: [(0, Rational::zero()), (1, Rational::one())].into(),
            delta: Poly::constant(Rational::one()),
            epsilon: Rational::new(1, 10).unwrap(),
        };
        normalize_eta(&family.to_parameters().unwrap(), &c1().ranks()).unwrap()
    }

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    /// Picks out ker d^0: top weight block is H^0(ker d^0 (n)).
    fn kernel_1ps() -> OneParameterSubgroup {
        OneParameterSubgroup {
            weights: vec![Rational::from_int(34), Rational::from_int(-11)],
            blocks: [(0, vec![11, 11]), (1, vec![0, 23])].into(),
            quotient_ranks: Some([(0, vec![1, 1]), (1, vec![0, 2])].into()),
            compatible: Some(true),
            crossing: None,
        }
    }

    fn beta_1ps() -> OneParameterSubgroup {
        OneParameterSubgroup {
            weights: vec![rat(19, 44), rat(-1, 44), rat(-17, 48)],
            blocks: [(0, vec![11, 11, 0]), (1, vec![0, 11, 12])].into(),
            quotient_ranks: Some([(0, vec![1, 1, 0]), (1, vec![0, 1, 1])].into()),
            compatible: Some(true),
            crossing: None,
        }
    }

    #[test]
    fn dims_are_hilbert_values() {
        let dims = global_dims(&c1(), 10).unwrap();
        assert_eq!(dims, [(0, 22), (1, 23)].into());
    }

    #[test]
    fn kernel_subgroup_weight() {
        let report = hm_weight(&c1(), &normalized_params(), 10, &kernel_1ps()).unwrap();
        assert_eq!(report.mu, rat(-855, 4));
        assert_eq!(report.case, MuCase::SubcomplexFiltration);
        assert_eq!(report.factors[&0], rat(25, 4));
        assert_eq!(report.factors[&1], rat(65, 4));
    }

    #[test]
    fn beta_subgroup_weight() {
        let report = hm_weight(&c1(), &normalized_params(), 10, &beta_1ps()).unwrap();
        assert_eq!(report.mu, rat(-7535, 2112));
    }

    #[test]
    fn both_routes_agree() {
        let params = normalized_params();
        for lambda in [kernel_1ps(), beta_1ps()] {
            let direct = hm_weight(&c1(), &params, 10, &lambda).unwrap().mu;
            let via_lin = hm_weight_via_linearization(&c1(), &params, 10, &lambda).unwrap();
            assert_eq!(direct, via_lin);
        }
    }

    #[test]
    fn noncompatible_subtracts_the_crossing() {
        let params = normalized_params();
        let mut lambda = kernel_1ps();
        let base = hm_weight(&c1(), &params, 10, &lambda).unwrap().mu;
        lambda.compatible = Some(false);
        lambda.crossing = Some(Rational::from_int(-45));
        let report = hm_weight(&c1(), &params, 10, &lambda).unwrap();
        assert_eq!(report.mu, base + Rational::from_int(45));
        lambda.crossing = None;
        assert!(matches!(
            hm_weight(&c1(), &params, 10, &lambda),
            Err(Error::MissingCrossing)
        ));
    }

    #[test]
    fn determinant_condition_is_enforced() {
        let mut lambda = kernel_1ps();
        lambda.blocks.insert(1, vec![1, 22]);
        assert!(matches!(
            hm_weight(&c1(), &normalized_params(), 10, &lambda),
            Err(Error::MalformedDecomposition(_))
        ));
    }

    #[test]
    fn linearization_constants_with_raw_eta() {
        let params = StabilityParameters {
            sigma: [(0, 1), (1, 1)].into(),
            eta: [(0, Rational::zero()), (1, Rational::one())].into(),
            delta: Poly::constant(Rational::one()),
        };
        let lin = linearization_data(&c1(), &params, 10).unwrap();
        assert_eq!(lin.p_sigma_n, Rational::from_int(45));
        assert_eq!(lin.r_sigma, 4);
        assert_eq!(lin.a[&0], rat(41, 4));
        assert_eq!(lin.a[&1], rat(45, 4));
        assert!(lin.positivity_ok);
    }

    #[test]
    fn small_n_breaks_positivity() {
        // at n = 0, P_sigma(0) = 5 < r delta = 4 fails only marginally; eta
        // can push a_i negative
        let params = StabilityParameters {
            sigma: [(0, 1), (1, 1)].into(),
            eta: [(0, Rational::from_int(-1)), (1, Rational::one())].into(),
            delta: Poly::constant(Rational::one()),
        };
        let lin = linearization_data(&c1(), &params, 0).unwrap();
        assert!(!lin.positivity_ok);
    }

    #[test]
    fn integerize_beta_subgroup() {
        let (int, scale) = beta_1ps().integerize();
        assert_eq!(scale, num::BigInt::from(528));
        assert_eq!(
            int.weights,
            vec![
                Rational::from_int(228),
                Rational::from_int(-12),
                Rational::from_int(-187)
            ]
        );
    }

    #[test]
    fn nonintegral_dimension_is_rejected() {
        let half = FormalComplex::from_sheaf(
            FormalSheaf::new(
                1,
                Poly::from_coeffs(vec![Rational::one(), rat(1, 2)]),
            ),
            0,
            1,
            rat(1, 2),
            None,
        );
        assert!(half.validate().is_valid(), "{}", half.validate());
        assert!(matches!(
            global_dims(&half, 11),
            Err(Error::NonIntegralMultiplicity { .. })
        ));
        assert!(global_dims(&half, 10).is_ok());
    }
}
