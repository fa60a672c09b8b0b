//! Stratification indices for non-semistable points.
//!
//! A Harder-Narasimhan type cuts out a stratum of the unstable locus. The
//! stratum is indexed by a rational cocharacter datum beta: one weight per
//! block of the type, an a-value for each cohomology block and a b-value
//! for each image block, computed from the block's Hilbert value at a
//! chosen evaluation point n. The weights satisfy a sum-zero constraint,
//! strictly decrease along the refined chain once n is large enough, and
//! assemble into a distinguished one-parameter subgroup lambda_beta whose
//! Hilbert-Mumford weight at the graded limit point equals minus the
//! squared norm of beta.

use crate::complex::{BlockLabel, FormalComplex, HnType};
use crate::error::Error;
use crate::hm::{hm_weight, OneParameterSubgroup};
use crate::hn::refined_hn_filtration;
use crate::rational::Rational;
use crate::stability::{normalize_eta, EpsilonFamily};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// One weight slot of the index.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct WeightEntry {
    pub label: BlockLabel,
    /// An a-value for cohomology blocks, a b-value for image blocks.
    pub weight: Rational,
    /// Hilbert value of the block at n; the dimension of each slot copy.
    pub dimension: u64,
    pub rank: u64,
}

impl WeightEntry {
    /// Image blocks occupy two adjacent positions, cohomology blocks one.
    pub fn copies(&self) -> u64 {
        match self.label {
            BlockLabel::H { .. } => 1,
            BlockLabel::I { .. } => 2,
        }
    }
}

/// The weight data of a type at an evaluation point n, in chain order.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct IndexData {
    pub m1: i64,
    pub m2: i64,
    pub n: u64,
    pub delta_n: Rational,
    /// P_1(n) / (r_1 delta(n)) for the ambient total Hilbert value P_1 and
    /// total rank r_1.
    pub base_factor: Rational,
    /// Normalized eta divided by epsilon: weighting by ambient ranks sums
    /// to zero, so the verdicts of the family member are unchanged.
    pub eta_over_epsilon: BTreeMap<i64, Rational>,
    pub entries: Vec<WeightEntry>,
}

impl IndexData {
    /// Sum of weight^2 times slot dimension over all copies.
    pub fn norm_squared(&self) -> Rational {
        let mut total = Rational::zero();
        for e in &self.entries {
            let copies = Rational::from_int((e.dimension * e.copies()) as i64);
            total = total + &e.weight.square() * &copies;
        }
        total
    }
}

fn eta_term(
    eta: &BTreeMap<i64, Rational>,
    label: BlockLabel,
) -> Result<Rational, Error> {
    let at = |i: i64| {
        eta.get(&i)
            .cloned()
            .ok_or_else(|| Error::InvalidInput(format!("eta is not defined at position {i}")))
    };
    match label {
        BlockLabel::H { i, .. } => at(i),
        BlockLabel::I { i, .. } => {
            Ok((at(i)? + at(i + 1)?).checked_div(&Rational::from_int(2))?)
        }
    }
}

/// The index weights of a type: for each block with Hilbert value B(n),
/// rank r and chain constant c (eta'_i/epsilon for cohomology blocks, the
/// midpoint for image blocks),
///
///   weight = 1/delta(n) - (P_1(n)/(r_1 delta(n)) + c) r / B(n).
///
/// Every block value must be a positive integer at n; the rank-weighted
/// sum-zero identity is asserted defensively.
pub fn index_weights(
    tau: &HnType,
    family: &EpsilonFamily,
    n: u64,
) -> Result<IndexData, Error> {
    family.check()?;
    if tau.entries.is_empty() || tau.m1 > tau.m2 {
        return Err(Error::EmptyType);
    }
    let mut ranks: BTreeMap<i64, u64> = BTreeMap::new();
    for i in tau.positions() {
        ranks.insert(i, tau.ambient_rank(i));
    }
    let params = normalize_eta(&family.to_parameters()?, &ranks)?;
    let delta_n = family.delta.eval_int(n as i64);
    if !delta_n.is_positive() {
        return Err(Error::NonpositiveValueAtN {
            label: "delta(n)".into(),
            value: delta_n.to_string(),
        });
    }
    let mut p1 = Rational::zero();
    let mut r1: u64 = 0;
    for i in tau.positions() {
        p1 = p1 + tau.ambient_poly(i).eval_int(n as i64);
        r1 += ranks[&i];
    }
    if r1 == 0 {
        return Err(Error::EmptyType);
    }
    if !p1.is_positive() {
        return Err(Error::NonpositiveValueAtN {
            label: "P_1(n)".into(),
            value: p1.to_string(),
        });
    }
    let base_factor = p1.checked_div(&(&Rational::from_int(r1 as i64) * &delta_n))?;
    let inv_delta_n = delta_n.recip()?;
    let mut entries = Vec::with_capacity(tau.entries.len());
    for e in &tau.entries {
        let label = e.label;
        if e.rank == 0 {
            return Err(Error::InvalidInput(format!("block {label} has rank zero")));
        }
        let value = e.hilbert.eval_int(n as i64);
        if !value.is_positive() {
            return Err(Error::NonpositiveValueAtN {
                label: format!("{label}(n)"),
                value: value.to_string(),
            });
        }
        let dimension = value.to_u64().ok_or_else(|| Error::NonIntegralMultiplicity {
            label: format!("{label}(n)"),
            value: value.to_string(),
        })?;
        let c = eta_term(&params.eta, label)?;
        let weight = &inv_delta_n
            - &(&(&base_factor + &c) * &Rational::from_int(e.rank as i64)).checked_div(&value)?;
        entries.push(WeightEntry {
            label,
            weight,
            dimension,
            rank: e.rank,
        });
    }
    let mut total = Rational::zero();
    for e in &entries {
        total = total + &e.weight * &Rational::from_int((e.dimension * e.copies()) as i64);
    }
    if !total.is_zero() {
        return Err(Error::SumZeroViolated(total.to_string()));
    }
    Ok(IndexData {
        m1: tau.m1,
        m2: tau.m2,
        n,
        delta_n,
        base_factor,
        eta_over_epsilon: params.eta,
        entries,
    })
}

/// Strict decrease of the weights along the chain. Holds for every n large
/// enough; a violation means the evaluation point is too small for this
/// type, not that the type is malformed.
pub fn check_weight_ordering(data: &IndexData) -> Result<(), Error> {
    for (k, pair) in data.entries.windows(2).enumerate() {
        if pair[0].weight <= pair[1].weight {
            return Err(Error::OrderingViolated {
                position: k + 1,
                left: pair[0].weight.to_string(),
                right: pair[1].weight.to_string(),
            });
        }
    }
    Ok(())
}

/// Smallest n in `from..=to` at which every block value is a positive
/// integer and the weight ordering holds. The ordering holds for all n
/// beyond some bound, so a scan from the intended working point finds the
/// admissible range cheaply.
pub fn minimal_admissible_n(
    tau: &HnType,
    family: &EpsilonFamily,
    from: u64,
    to: u64,
) -> Result<u64, Error> {
    for n in from..=to {
        match index_weights(tau, family, n).and_then(|d| check_weight_ordering(&d)) {
            Ok(()) => return Ok(n),
            Err(
                Error::OrderingViolated { .. }
                | Error::NonpositiveValueAtN { .. }
                | Error::NonIntegralMultiplicity { .. },
            ) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::InvalidInput(format!(
        "no admissible evaluation point in {from}..={to}"
    )))
}

/// The distinguished one-parameter subgroup of the index: weights in chain
/// order; at each position the slots carry the blocks supported there, so
/// an image block contributes its dimension and rank at both of its
/// positions. Requires the ordering to hold at this n.
pub fn lambda_beta(data: &IndexData) -> Result<OneParameterSubgroup, Error> {
    check_weight_ordering(data)?;
    let weights: Vec<Rational> = data.entries.iter().map(|e| e.weight.clone()).collect();
    let mut blocks = BTreeMap::new();
    let mut qranks = BTreeMap::new();
    for i in data.m1..=data.m2 {
        let mut dims = Vec::with_capacity(data.entries.len());
        let mut rks = Vec::with_capacity(data.entries.len());
        for e in &data.entries {
            if e.label.support().contains(&i) {
                dims.push(e.dimension);
                rks.push(e.rank);
            } else {
                dims.push(0);
                rks.push(0);
            }
        }
        blocks.insert(i, dims);
        qranks.insert(i, rks);
    }
    Ok(OneParameterSubgroup {
        weights,
        blocks,
        quotient_ranks: Some(qranks),
        compatible: Some(true),
        crossing: None,
    })
}

/// Exponent of one block determinant in the stratum character: the factor
/// (base + c) from the weight definition, scaled by minus the rank and the
/// number of copies. Equivalently (weight - 1/delta(n)) times the total
/// slot dimension.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChiExponent {
    pub label: BlockLabel,
    pub exponent: Rational,
}

pub fn chi_exponents(data: &IndexData) -> Result<Vec<ChiExponent>, Error> {
    let inv_delta_n = data.delta_n.recip()?;
    let mut out = Vec::with_capacity(data.entries.len());
    for e in &data.entries {
        let copies = Rational::from_int(e.copies() as i64);
        let c = eta_term(&data.eta_over_epsilon, e.label)?;
        let exponent =
            -(&(&data.base_factor + &c) * &(&Rational::from_int(e.rank as i64) * &copies));
        // same number through the weight: (weight - 1/delta(n)) dim copies
        let via_weight = &(&e.weight - &inv_delta_n)
            * &Rational::from_int((e.dimension * e.copies()) as i64);
        if exponent != via_weight {
            return Err(Error::Discrepancy(format!(
                "character exponent for {}: {} via factor, {} via weight",
                e.label, exponent, via_weight
            )));
        }
        out.push(ChiExponent {
            label: e.label,
            exponent,
        });
    }
    Ok(out)
}

/// Everything needed to place a point on its stratum: the type, the index
/// weights at n, the squared norm, the distinguished 1-PS in rational and
/// integer form, its Hilbert-Mumford weight at the graded point, and the
/// character exponents. A single-block type indexes the open stratum: the
/// index is zero and the 1-PS degenerates to the trivial one.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct StratumCertificate {
    pub tau: HnType,
    pub epsilon: Rational,
    pub index: IndexData,
    pub norm_squared: Rational,
    /// True when the type has a single block (the semistable stratum).
    pub trivial: bool,
    /// False when the weight ordering fails at this n; pick a larger n.
    pub ordering_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub insufficient_n: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<OneParameterSubgroup>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_integer: Option<OneParameterSubgroup>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_lambda: Option<Rational>,
    pub chi_exponents: Vec<ChiExponent>,
}

/// Certificate for the stratum indexed by `tau` with ambient invariants
/// `c`. The Hilbert-Mumford weight of lambda_beta is recomputed through the
/// general weight formula on `c` and must equal minus the squared norm;
/// the two routes share no code beyond the normalized parameters.
pub fn certify_type(
    tau: &HnType,
    c: &FormalComplex,
    family: &EpsilonFamily,
    n: u64,
) -> Result<StratumCertificate, Error> {
    let ranks = c.ranks();
    for i in tau.positions() {
        if ranks.get(&i).copied().unwrap_or(0) != tau.ambient_rank(i) {
            return Err(Error::InvalidInput(format!(
                "ambient rank mismatch at position {i}: complex has {}, type has {}",
                ranks.get(&i).copied().unwrap_or(0),
                tau.ambient_rank(i)
            )));
        }
    }
    let index = index_weights(tau, family, n)?;
    let norm_squared = index.norm_squared();
    let chi = chi_exponents(&index)?;
    let trivial = index.entries.len() == 1;
    let ordering = check_weight_ordering(&index);
    let ordering_ok = ordering.is_ok();
    let insufficient_n = ordering.err().map(|e| e.to_string());
    let mut cert = StratumCertificate {
        tau: tau.clone(),
        epsilon: family.epsilon.clone(),
        index,
        norm_squared,
        trivial,
        ordering_ok,
        insufficient_n,
        lambda: None,
        lambda_integer: None,
        scale: None,
        mu_lambda: None,
        chi_exponents: chi,
    };
    if trivial || !ordering_ok {
        return Ok(cert);
    }
    let lambda = lambda_beta(&cert.index)?;
    let params = normalize_eta(&family.to_parameters()?, &ranks)?;
    let report = hm_weight(c, &params, n, &lambda)?;
    if report.mu != -&cert.norm_squared {
        return Err(Error::Discrepancy(format!(
            "weight of lambda_beta is {}, expected {}",
            report.mu,
            -&cert.norm_squared
        )));
    }
    let (integer, scale) = lambda.integerize();
    cert.mu_lambda = Some(report.mu);
    cert.lambda = Some(lambda);
    cert.lambda_integer = Some(integer);
    cert.scale = Some(Rational::from_bigint(scale));
    Ok(cert)
}

/// Certificate for the stratum of a complex: runs the refined filtration at
/// the family's epsilon (rejecting epsilon >= epsilon_0) and indexes the
/// resulting type.
pub fn certify_membership(
    c: &FormalComplex,
    family: &EpsilonFamily,
    n: u64,
) -> Result<StratumCertificate, Error> {
    let refined = refined_hn_filtration(c, family)?;
    certify_type(&refined.tau, c, family, n)
}
