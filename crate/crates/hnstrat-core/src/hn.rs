//! Harder-Narasimhan structure of the degenerate limit and its refinement at
//! small epsilon.
//!
//! In the epsilon -> 0 limit the semistable objects are exactly the shifts of
//! single sheaves and the two-term cones of identity maps; every complex has
//! a canonical filtration whose quotients alternate between cohomologies
//! `H^i` (placed at position i) and cones on the boundary images `im d^i`
//! (placed at positions i, i+1). Refining each quotient by the sheaf-level HN
//! filtrations of `H^i` and `im d^i` gives the filtration that computes the
//! actual HN filtration of the complex for every small enough epsilon; the
//! threshold `epsilon0` below which this holds is computed exactly from slope
//! gaps between consecutive blocks.
//!
//! Throughout, eta must be strictly increasing across the support: the chain
//! constants `eta_i` (cohomology blocks) and `(eta_i + eta_{i+1})/2` (image
//! blocks) are then strictly ascending in the peeling order.

use crate::complex::{
    BlockLabel, FormalComplex, FormalSheaf, HNFiltration, HnType, HnTypeEntry, Quotient,
    QuotientLabel, RkPoly, SubcomplexInvariants,
};
use crate::error::Error;
use crate::poly::Poly;
use crate::rational::Rational;
use crate::stability::EpsilonFamily;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum NeitherReason {
    /// The boundary map leaving the first nonzero position has a kernel.
    KernelPresent { position: i64 },
    /// The boundary is injective but not onto the next term.
    NonIsoBoundary { position: i64 },
    /// More than two nonzero terms, or two that are not adjacent.
    MultiplePositions,
}

/// Shape classification of the complex in the degenerate limit: the
/// semistable objects there are exactly the one-term complexes and the
/// two-term identity cones.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Sigma0Class {
    ShiftOfSheaf { position: i64 },
    ConeOfIdentity { position: i64 },
    Neither { reason: NeitherReason },
}

impl Sigma0Class {
    pub fn is_semistable(&self) -> bool {
        !matches!(self, Sigma0Class::Neither { .. })
    }
}

fn ensure_valid(c: &FormalComplex) -> Result<(), Error> {
    let report = c.validate();
    if report.is_valid() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("invalid complex:\n{report}")))
    }
}

fn ensure_hn_data(c: &FormalComplex) -> Result<(), Error> {
    if c.has_hn_data() {
        Ok(())
    } else {
        Err(Error::MissingHNData)
    }
}

/// eta must be defined and strictly increasing on every position of the
/// support range.
fn ensure_eta_increasing(c: &FormalComplex, eta: &BTreeMap<i64, Rational>) -> Result<(), Error> {
    let mut prev: Option<&Rational> = None;
    for i in c.positions() {
        let e = eta.get(&i).ok_or_else(|| {
            Error::InvalidInput(format!("eta is not defined at position {i}"))
        })?;
        if let Some(p) = prev {
            if !(p < e) {
                return Err(Error::InvalidInput(
                    "eta must be strictly increasing across the support".into(),
                ));
            }
        }
        prev = Some(e);
    }
    Ok(())
}

pub fn sigma0_classify(c: &FormalComplex) -> Result<Sigma0Class, Error> {
    ensure_valid(c)?;
    let nonzero: Vec<i64> = c.positions().filter(|&i| c.term(i).is_some()).collect();
    match nonzero.as_slice() {
        [k] => Ok(Sigma0Class::ShiftOfSheaf { position: *k }),
        [k, l] if *l == *k + 1 => {
            if !c.ker_rkpoly(*k).is_zero() {
                return Ok(Sigma0Class::Neither {
                    reason: NeitherReason::KernelPresent { position: *k },
                });
            }
            let im = c.image(*k).expect("injective boundary has nonzero image");
            let next = c.term(*l).expect("nonzero by construction");
            if im == next {
                Ok(Sigma0Class::ConeOfIdentity { position: *k })
            } else {
                Ok(Sigma0Class::Neither {
                    reason: NeitherReason::NonIsoBoundary { position: *k },
                })
            }
        }
        _ => Ok(Sigma0Class::Neither {
            reason: NeitherReason::MultiplePositions,
        }),
    }
}

/// The maximal destabilizing subcomplex of the degenerate limit, assuming a
/// strictly increasing eta. With k the first nonzero position this is
/// `ker d^k` placed at k when that kernel is nonzero, and otherwise the pair
/// `(F^k, im d^k)` at positions (k, k+1). It is the unique subcomplex that is
/// itself semistable in the limit and has a strictly smaller eta-average than
/// every subcomplex strictly containing it; for a semistable complex it is
/// the whole complex.
pub fn sigma0_max_destabilizer(c: &FormalComplex) -> Result<SubcomplexInvariants, Error> {
    ensure_valid(c)?;
    let k = c
        .positions()
        .find(|&i| c.term(i).is_some())
        .expect("a valid complex has a nonzero term");
    let ker = c.ker_rkpoly(k);
    if !ker.is_zero() {
        SubcomplexInvariants::from_rkpolys(k, vec![ker])
    } else {
        SubcomplexInvariants::from_rkpolys(
            k,
            vec![
                RkPoly::from_piece(&c.term(k).cloned()),
                RkPoly::from_piece(&c.image(k).cloned()),
            ],
        )
    }
}

/// The canonical filtration of the degenerate limit. Walking positions left
/// to right, each step first absorbs the cohomology at the position, then the
/// cone on the boundary image leaving it; zero quotients are skipped. The
/// steps are strictly increasing and the last one is the whole complex.
pub fn sigma0_hn_filtration(c: &FormalComplex) -> Result<HNFiltration, Error> {
    ensure_valid(c)?;
    let span = c.span();
    let mut cur = vec![RkPoly::zero(); span];
    let mut steps = Vec::new();
    let mut quotients = Vec::new();
    for i in c.positions() {
        let k = (i - c.m1) as usize;
        let h = c.cohomology_rkpoly(i);
        if !h.is_zero() {
            cur[k] = cur[k].add(&h);
            steps.push(SubcomplexInvariants::from_rkpolys(c.m1, cur.clone())?);
            quotients.push(Quotient {
                label: QuotientLabel::Cohomology {
                    position: i,
                    piece: None,
                },
                vector: SubcomplexInvariants::from_rkpolys(i, vec![h])?,
            });
        }
        if i < c.m2 {
            let im = c.image_rkpoly(i);
            if !im.is_zero() {
                cur[k] = cur[k].add(&im);
                cur[k + 1] = cur[k + 1].add(&im);
                steps.push(SubcomplexInvariants::from_rkpolys(c.m1, cur.clone())?);
                quotients.push(Quotient {
                    label: QuotientLabel::Cone {
                        position: i,
                        piece: None,
                    },
                    vector: SubcomplexInvariants::from_rkpolys(i, vec![im.clone(), im])?,
                });
            }
        }
    }
    assert!(
        steps.last().is_some_and(|s| s.equals_whole(c)),
        "filtration must end at the whole complex"
    );
    Ok(HNFiltration { steps, quotients })
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum EpsilonBound {
    Unbounded,
    Finite { value: Rational },
}

impl EpsilonBound {
    pub fn admits(&self, epsilon: &Rational) -> bool {
        match self {
            EpsilonBound::Unbounded => true,
            EpsilonBound::Finite { value } => epsilon < value,
        }
    }
}

/// One adjacency of the refined chain: `lower` is the last block of the
/// earlier group, `upper` the first block of the later one. The pair
/// constrains epsilon exactly when the slope gap is positive.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ChainConstraint {
    pub lower: BlockLabel,
    pub upper: BlockLabel,
    /// mu(upper) - mu(lower); only positive gaps constrain.
    pub slope_gap: Rational,
    /// Difference of the chain constants of the two groups; always positive.
    pub c_gap: Rational,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<Rational>,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Epsilon0Result {
    pub constraints: Vec<ChainConstraint>,
    pub epsilon0: EpsilonBound,
}

/// The blocks of the refined chain, grouped by chain constant, in peeling
/// order: for each position, the sheaf HN quotients of the cohomology (chain
/// constant eta_i), then those of the boundary image (constant the midpoint
/// of eta_i and eta_{i+1}).
fn chain_groups(
    c: &FormalComplex,
    eta: &BTreeMap<i64, Rational>,
) -> Vec<(Rational, Vec<(BlockLabel, FormalSheaf)>)> {
    let mut groups = Vec::new();
    let two = Rational::from_int(2);
    for i in c.positions() {
        let hs = c.cohomology_hn_at(i).expect("caller checked HN data");
        if !hs.is_empty() {
            groups.push((
                eta[&i].clone(),
                hs.iter()
                    .enumerate()
                    .map(|(j, q)| (BlockLabel::H { i, j: j + 1 }, q.clone()))
                    .collect(),
            ));
        }
        if i < c.m2 {
            let ims = c.image_hn_at(i).expect("caller checked HN data");
            if !ims.is_empty() {
                groups.push((
                    (&eta[&i] + &eta[&(i + 1)]) / &two,
                    ims.iter()
                        .enumerate()
                        .map(|(j, q)| (BlockLabel::I { i, j: j + 1 }, q.clone()))
                        .collect(),
                ));
            }
        }
    }
    groups
}

/// Largest epsilon below which the refined chain is strictly decreasing in
/// the family order, computed from the slope gaps across consecutive chain
/// groups: each adjacency with slope gap M > 0 and chain-constant gap g
/// contributes the bound deltaTop * g / M, and epsilon0 is the minimum.
/// Within a group the sheaf HN order already decreases strictly at every
/// epsilon, so only adjacencies across groups constrain.
pub fn epsilon_threshold(
    c: &FormalComplex,
    family: &EpsilonFamily,
) -> Result<Epsilon0Result, Error> {
    ensure_valid(c)?;
    ensure_hn_data(c)?;
    ensure_eta_increasing(c, &family.eta)?;
    let params = family.to_parameters()?;
    params.check_delta(c.dim_x)?;
    let groups = chain_groups(c, &family.eta);
    let delta_top = params.delta_top();
    let mut constraints = Vec::new();
    let mut epsilon0 = EpsilonBound::Unbounded;
    for w in groups.windows(2) {
        let (c_lo, lo) = &w[0];
        let (c_hi, hi) = &w[1];
        let (lo_label, lo_sheaf) = lo.last().expect("groups are nonempty");
        let (hi_label, hi_sheaf) = hi.first().expect("groups are nonempty");
        let slope_gap = hi_sheaf.slope(c.dim_x) - lo_sheaf.slope(c.dim_x);
        let c_gap = c_hi - c_lo;
        let bound = slope_gap
            .is_positive()
            .then(|| &delta_top * &c_gap / &slope_gap);
        if let Some(b) = &bound {
            match &epsilon0 {
                EpsilonBound::Finite { value } if value <= b => {}
                _ => {
                    epsilon0 = EpsilonBound::Finite { value: b.clone() };
                }
            }
        }
        constraints.push(ChainConstraint {
            lower: *lo_label,
            upper: *hi_label,
            slope_gap,
            c_gap,
            bound,
        });
    }
    Ok(Epsilon0Result {
        constraints,
        epsilon0,
    })
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RefinedFiltration {
    pub filtration: HNFiltration,
    pub tau: HnType,
    /// Family-reduced polynomial of each quotient, strictly decreasing.
    pub chain: Vec<Poly>,
    pub epsilon0: EpsilonBound,
}

/// The HN filtration of the complex at the family's epsilon, valid whenever
/// epsilon < epsilon0; larger epsilon is rejected. Each degenerate-limit
/// quotient is split along its sheaf HN filtration, and the chain records the
/// family-reduced polynomial of every refined quotient: red(piece) minus
/// delta times (chain constant / epsilon).
pub fn refined_hn_filtration(
    c: &FormalComplex,
    family: &EpsilonFamily,
) -> Result<RefinedFiltration, Error> {
    let thr = epsilon_threshold(c, family)?;
    if !thr.epsilon0.admits(&family.epsilon) {
        if let EpsilonBound::Finite { value } = &thr.epsilon0 {
            return Err(Error::EpsilonTooLarge {
                bound: value.to_string(),
            });
        }
    }
    let inv_eps = family.epsilon.recip()?;
    let span = c.span();
    let mut cur = vec![RkPoly::zero(); span];
    let mut steps = Vec::new();
    let mut quotients = Vec::new();
    let mut entries = Vec::new();
    let mut chain = Vec::new();
    for (c_const, blocks) in chain_groups(c, &family.eta) {
        let shift = family.delta.scale(&(&c_const * &inv_eps));
        for (label, sheaf) in blocks {
            let piece = RkPoly::from_piece(&Some(sheaf.clone()));
            let (pos, quotient_label, vector) = match label {
                BlockLabel::H { i, j } => (
                    i,
                    QuotientLabel::Cohomology {
                        position: i,
                        piece: Some(j),
                    },
                    SubcomplexInvariants::from_rkpolys(i, vec![piece.clone()])?,
                ),
                BlockLabel::I { i, j } => (
                    i,
                    QuotientLabel::Cone {
                        position: i,
                        piece: Some(j),
                    },
                    SubcomplexInvariants::from_rkpolys(i, vec![piece.clone(), piece.clone()])?,
                ),
            };
            let k = (pos - c.m1) as usize;
            cur[k] = cur[k].add(&piece);
            if matches!(label, BlockLabel::I { .. }) {
                cur[k + 1] = cur[k + 1].add(&piece);
            }
            steps.push(SubcomplexInvariants::from_rkpolys(c.m1, cur.clone())?);
            quotients.push(Quotient {
                label: quotient_label,
                vector,
            });
            chain.push(&sheaf.reduced() - &shift);
            entries.push(HnTypeEntry {
                label,
                rank: sheaf.rank,
                hilbert: sheaf.hilbert,
            });
        }
    }
    assert!(
        steps.last().is_some_and(|s| s.equals_whole(c)),
        "refined filtration must end at the whole complex"
    );
    for w in chain.windows(2) {
        if !(w[0] > w[1]) {
            return Err(Error::ChainNotDecreasing(format!(
                "{} does not strictly dominate {}",
                w[0], w[1]
            )));
        }
    }
    Ok(RefinedFiltration {
        filtration: HNFiltration { steps, quotients },
        tau: HnType {
            m1: c.m1,
            m2: c.m2,
            entries,
        },
        chain,
        epsilon0: thr.epsilon0,
    })
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum NotSemistableReason {
    /// The refined chain has more than one block, so the first block
    /// destabilizes at every small epsilon.
    MultiplePieces,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum SmallEpsilonClass {
    Semistable {
        shape: Sigma0Class,
    },
    NotSemistable {
        reason: NotSemistableReason,
        blocks: usize,
    },
}

/// Whether the complex is semistable for every small enough epsilon: true
/// exactly when the refined chain consists of a single block, i.e. the
/// complex is a shift of a semistable sheaf or the identity cone on one.
pub fn classify_small_epsilon(c: &FormalComplex) -> Result<SmallEpsilonClass, Error> {
    ensure_valid(c)?;
    ensure_hn_data(c)?;
    let blocks: usize = c
        .positions()
        .map(|i| {
            c.cohomology_hn_at(i).map_or(0, <[FormalSheaf]>::len)
                + c.image_hn_at(i).map_or(0, <[FormalSheaf]>::len)
        })
        .sum();
    if blocks == 1 {
        Ok(SmallEpsilonClass::Semistable {
            shape: sigma0_classify(c)?,
        })
    } else {
        Ok(SmallEpsilonClass::NotSemistable {
            reason: NotSemistableReason::MultiplePieces,
            blocks,
        })
    }
}

/// The graded complex of a Harder-Narasimhan type: terms are the sums of the
/// blocks supported at each position, the boundary images are the sums of the
/// image blocks, and the HN data is the blocks themselves. This is the
/// invariant vector of the limit point gr(z) whose stratum the type indexes.
pub fn graded_complex_from_type(
    tau: &HnType,
    dim_x: u32,
    deg_x: Rational,
) -> Result<FormalComplex, Error> {
    if tau.m1 > tau.m2 || tau.entries.is_empty() {
        return Err(Error::EmptyType);
    }
    let span = tau.span();
    let mut cohomology_hn = vec![Vec::new(); span];
    let mut image_hn = vec![Vec::new(); span - 1];
    for e in &tau.entries {
        let sheaf = FormalSheaf::new(e.rank, e.hilbert.clone());
        match e.label {
            BlockLabel::H { i, .. } => {
                cohomology_hn[(i - tau.m1) as usize].push(sheaf);
            }
            BlockLabel::I { i, .. } => {
                if i >= tau.m2 {
                    return Err(Error::InvalidInput(format!(
                        "image block at position {i} has no target inside [{}, {}]",
                        tau.m1, tau.m2
                    )));
                }
                image_hn[(i - tau.m1) as usize].push(sheaf);
            }
        }
    }
    let sum = |v: &[FormalSheaf]| {
        v.iter().fold(RkPoly::zero(), |acc, s| {
            acc.add(&RkPoly::from_piece(&Some(s.clone())))
        })
    };
    let mut terms = Vec::with_capacity(span);
    let mut images = Vec::with_capacity(span - 1);
    for i in tau.positions() {
        let k = (i - tau.m1) as usize;
        let mut t = sum(&cohomology_hn[k]);
        if k < span - 1 {
            let im = sum(&image_hn[k]);
            t = t.add(&im);
            images.push(im.to_piece()?);
        }
        if k > 0 {
            t = t.add(&sum(&image_hn[k - 1]));
        }
        terms.push(t.to_piece()?);
    }
    let c = FormalComplex {
        dim_x,
        deg_x,
        m1: tau.m1,
        m2: tau.m2,
        terms,
        images,
        cohomology_hn: Some(cohomology_hn),
        image_hn: Some(image_hn),
    };
    let report = c.validate();
    if !report.is_valid() {
        return Err(Error::InvalidInput(format!(
            "type does not assemble into a valid complex:\n{report}"
        )));
    }
    Ok(c)
}

/// Test objects that decide the degenerate-limit verdict, and in dimension 0
/// also the family verdict: the maximal destabilizer, the truncation
/// subcomplexes (everything up to a position, capped by the kernel there),
/// and the steps of the limit filtration.
pub fn structural_test_family(
    c: &FormalComplex,
) -> Result<Vec<(String, SubcomplexInvariants)>, Error> {
    ensure_valid(c)?;
    let mut tests = Vec::new();
    tests.push(("maxDestabilizer".to_string(), sigma0_max_destabilizer(c)?));
    for k in c.positions() {
        let mut parts: Vec<RkPoly> = (c.m1..k).map(|i| RkPoly::from_piece(&c.term(i).cloned())).collect();
        parts.push(c.ker_rkpoly(k));
        let t = SubcomplexInvariants::from_rkpolys(c.m1, parts)?;
        if !t.is_zero() {
            tests.push((format!("T({k})"), t));
        }
    }
    for (idx, step) in sigma0_hn_filtration(c)?.steps.into_iter().enumerate() {
        tests.push((format!("S{}", idx + 1), step));
    }
    tests.dedup_by(|a, b| a.1 == b.1);
    Ok(tests)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Poly;

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

    fn family(eps: (i64, i64)) -> EpsilonFamily {
        EpsilonFamily {
            eta: [(0, Rational::zero()), (1, Rational::one())].into(),
            delta: Poly::constant(Rational::one()),
            epsilon: Rational::new(eps.0, eps.1).unwrap(),
        }
    }

    #[test]
    fn classify_shapes() {
        assert_eq!(
            sigma0_classify(&c1()).unwrap(),
            Sigma0Class::Neither {
                reason: NeitherReason::KernelPresent { position: 0 }
            }
        );
        let shift = FormalComplex::from_sheaf(sheaf(2, 2, 3), -1, 1, Rational::one(), None);
        assert_eq!(
            sigma0_classify(&shift).unwrap(),
            Sigma0Class::ShiftOfSheaf { position: -1 }
        );
        let cone = FormalComplex::cone_of_identity(sheaf(1, 1, 1), 0, 1, Rational::one());
        assert_eq!(
            sigma0_classify(&cone).unwrap(),
            Sigma0Class::ConeOfIdentity { position: 0 }
        );
        let mut wide = c1();
        wide.m2 = 2;
        wide.terms = vec![Some(sheaf(1, 1, 1)), None, Some(sheaf(1, 1, 1))];
        wide.images = vec![None, None];
        wide.cohomology_hn = None;
        wide.image_hn = None;
        assert_eq!(
            sigma0_classify(&wide).unwrap(),
            Sigma0Class::Neither {
                reason: NeitherReason::MultiplePositions
            }
        );
        // injective but not surjective boundary
        let mut narrow = c1();
        narrow.images = vec![Some(sheaf(2, 2, 2))];
        narrow.terms[1] = Some(sheaf(3, 3, 4));
        narrow.cohomology_hn = None;
        narrow.image_hn = None;
        assert_eq!(
            sigma0_classify(&narrow).unwrap(),
            Sigma0Class::Neither {
                reason: NeitherReason::NonIsoBoundary { position: 0 }
            }
        );
    }

    #[test]
    fn max_destabilizer_of_c1_is_the_kernel() {
        let d = sigma0_max_destabilizer(&c1()).unwrap();
        assert_eq!(d.start, 0);
        assert_eq!(d.pieces, vec![Some(sheaf(1, 1, 1))]);
    }

    #[test]
    fn max_destabilizer_of_injective_complex_spans_two_positions() {
        let cone = FormalComplex::cone_of_identity(sheaf(1, 1, 1), 0, 1, Rational::one());
        let d = sigma0_max_destabilizer(&cone).unwrap();
        assert!(d.equals_whole(&cone));
    }

    #[test]
    fn limit_filtration_of_c1() {
        let f = sigma0_hn_filtration(&c1()).unwrap();
        assert_eq!(f.steps.len(), 3);
        assert_eq!(
            f.quotients.iter().map(|q| q.label).collect::<Vec<_>>(),
            vec![
                QuotientLabel::Cohomology { position: 0, piece: None },
                QuotientLabel::Cone { position: 0, piece: None },
                QuotientLabel::Cohomology { position: 1, piece: None },
            ]
        );
        assert_eq!(f.steps[0], sigma0_max_destabilizer(&c1()).unwrap());
        assert!(f.steps[2].equals_whole(&c1()));
    }

    #[test]
    fn threshold_of_c1_is_one_half() {
        let thr = epsilon_threshold(&c1(), &family((1, 10))).unwrap();
        assert_eq!(
            thr.epsilon0,
            EpsilonBound::Finite { value: Rational::new(1, 2).unwrap() }
        );
        assert_eq!(thr.constraints.len(), 2);
        // H(0,1) -> I(0,1): equal slopes, no constraint
        assert_eq!(thr.constraints[0].bound, None);
        assert_eq!(thr.constraints[0].slope_gap, Rational::zero());
        // I(0,1) -> H(1,1): slope gap 1, constant gap 1/2
        assert_eq!(thr.constraints[1].slope_gap, Rational::one());
        assert_eq!(
            thr.constraints[1].bound,
            Some(Rational::new(1, 2).unwrap())
        );
        assert_eq!(thr.constraints[1].lower, BlockLabel::I { i: 0, j: 1 });
        assert_eq!(thr.constraints[1].upper, BlockLabel::H { i: 1, j: 1 });
    }

    #[test]
    fn refined_chain_of_c1() {
        let r = refined_hn_filtration(&c1(), &family((1, 10))).unwrap();
        assert_eq!(
            r.chain,
            vec![Poly::linear(1, 1), Poly::linear(1, -4), Poly::linear(1, -8)]
        );
        assert_eq!(r.tau.entries.len(), 3);
        assert_eq!(r.tau.entries[0].label, BlockLabel::H { i: 0, j: 1 });
        assert_eq!(r.tau.entries[1].label, BlockLabel::I { i: 0, j: 1 });
        assert_eq!(r.tau.entries[2].label, BlockLabel::H { i: 1, j: 1 });
        assert!(r.filtration.steps.last().unwrap().equals_whole(&c1()));
    }

    #[test]
    fn epsilon_at_or_above_threshold_is_rejected() {
        for eps in [(1, 2), (3, 4), (2, 1)] {
            let err = refined_hn_filtration(&c1(), &family(eps)).unwrap_err();
            assert!(
                matches!(&err, Error::EpsilonTooLarge { bound } if bound == "1/2"),
                "unexpected error {err:?}"
            );
        }
    }

    #[test]
    fn unstable_sheaf_shift_has_unbounded_threshold() {
        // one position: no cross-group adjacency with a positive slope gap
        let s = FormalSheaf::new(2, Poly::linear(2, 3));
        let shift = FormalComplex::from_sheaf(
            s,
            0,
            1,
            Rational::one(),
            Some(vec![sheaf(1, 1, 2), sheaf(1, 1, 1)]),
        );
        let fam = EpsilonFamily {
            eta: [(0, Rational::zero())].into(),
            delta: Poly::constant(Rational::one()),
            epsilon: Rational::from_int(5),
        };
        let thr = epsilon_threshold(&shift, &fam).unwrap();
        assert_eq!(thr.epsilon0, EpsilonBound::Unbounded);
        let r = refined_hn_filtration(&shift, &fam).unwrap();
        assert_eq!(r.chain.len(), 2);
        assert!(r.chain[0] > r.chain[1]);
        assert_eq!(
            classify_small_epsilon(&shift).unwrap(),
            SmallEpsilonClass::NotSemistable {
                reason: NotSemistableReason::MultiplePieces,
                blocks: 2
            }
        );
    }

    #[test]
    fn single_block_complexes_are_small_epsilon_semistable() {
        let shift = FormalComplex::from_sheaf(sheaf(2, 2, 3), 0, 1, Rational::one(), None);
        assert_eq!(
            classify_small_epsilon(&shift).unwrap(),
            SmallEpsilonClass::Semistable {
                shape: Sigma0Class::ShiftOfSheaf { position: 0 }
            }
        );
        let cone = FormalComplex::cone_of_identity(sheaf(1, 1, 1), 0, 1, Rational::one());
        assert_eq!(
            classify_small_epsilon(&cone).unwrap(),
            SmallEpsilonClass::Semistable {
                shape: Sigma0Class::ConeOfIdentity { position: 0 }
            }
        );
        assert_eq!(
            classify_small_epsilon(&c1()).unwrap(),
            SmallEpsilonClass::NotSemistable {
                reason: NotSemistableReason::MultiplePieces,
                blocks: 3
            }
        );
    }

    #[test]
    fn structural_family_contains_the_destabilizer_and_whole() {
        let c = c1();
        let tests = structural_test_family(&c).unwrap();
        let d = sigma0_max_destabilizer(&c).unwrap();
        assert!(tests.iter().any(|(_, t)| *t == d));
        assert!(tests.iter().any(|(_, t)| t.equals_whole(&c)));
    }

    #[test]
    fn zero_middle_term_complex() {
        let c = FormalComplex {
            dim_x: 1,
            deg_x: Rational::one(),
            m1: 0,
            m2: 2,
            terms: vec![Some(sheaf(1, 1, 1)), None, Some(sheaf(1, 1, 1))],
            images: vec![None, None],
            cohomology_hn: Some(vec![vec![sheaf(1, 1, 1)], vec![], vec![sheaf(1, 1, 1)]]),
            image_hn: Some(vec![vec![], vec![]]),
        };
        assert!(c.validate().is_valid(), "{}", c.validate());
        let fam = EpsilonFamily {
            eta: [
                (0, Rational::zero()),
                (1, Rational::one()),
                (2, Rational::from_int(2)),
            ]
            .into(),
            delta: Poly::constant(Rational::one()),
            epsilon: Rational::new(1, 10).unwrap(),
        };
        let f = sigma0_hn_filtration(&c).unwrap();
        assert_eq!(f.steps.len(), 2);
        // equal slopes across the gap: no epsilon constraint
        let thr = epsilon_threshold(&c, &fam).unwrap();
        assert_eq!(thr.epsilon0, EpsilonBound::Unbounded);
        let r = refined_hn_filtration(&c, &fam).unwrap();
        assert_eq!(r.chain.len(), 2);
        assert!(r.chain[0] > r.chain[1]);
    }
}
