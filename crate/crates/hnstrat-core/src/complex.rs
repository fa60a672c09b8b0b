//! Formal data model: sheaves and bounded complexes presented by invariants.
//!
//! A sheaf is presented by its rank and Hilbert polynomial only; a complex by
//! the invariants of its terms and of its boundary images. Kernels and
//! cohomologies are derived by subtraction, so validity of a complex is a set
//! of nonnegativity and bookkeeping constraints checked by [`FormalComplex::validate`].
//!
//! Optionally a complex carries sheaf-level Harder-Narasimhan data for each
//! cohomology and image: the list of HN quotient invariants, with strictly
//! decreasing reduced Hilbert polynomials. The torsion-freeness that the sheaf
//! theory assumes is recorded here as a modeling convention (rank 0 means the
//! zero sheaf), never verified.

use crate::error::Error;
use crate::poly::{Degree, Poly};
use crate::rational::Rational;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormalSheaf {
    pub rank: u64,
    pub hilbert: Poly,
}

/// `None` is the zero sheaf.
pub type Piece = Option<FormalSheaf>;

impl FormalSheaf {
    pub fn new(rank: u64, hilbert: Poly) -> Self {
        FormalSheaf { rank, hilbert }
    }

    /// Hilbert polynomial divided by rank.
    pub fn reduced(&self) -> Poly {
        self.hilbert
            .scale(&Rational::new(1, self.rank as i64).expect("rank > 0"))
    }

    /// Second-to-top coefficient of the reduced Hilbert polynomial; 0 in
    /// dimension 0, where every sheaf has the same reduced polynomial.
    pub fn slope(&self, dim_x: u32) -> Rational {
        if dim_x == 0 {
            Rational::zero()
        } else {
            self.reduced().coeff(dim_x as usize - 1)
        }
    }

    fn check(&self, dim_x: u32, deg_x: &Rational, what: &str, out: &mut Vec<String>) {
        if self.rank == 0 {
            out.push(format!("{what}: rank must be positive"));
            return;
        }
        if self.hilbert.degree() != Degree::Of(dim_x as usize) {
            out.push(format!(
                "{what}: Hilbert polynomial degree must equal the ambient dimension {dim_x}"
            ));
            return;
        }
        let expected = Rational::from_int(self.rank as i64) * deg_x
            / dim_factorial(dim_x);
        if self.hilbert.coeff(dim_x as usize) != expected {
            out.push(format!(
                "{what}: leading coefficient must be rank*degX/dimX! = {expected}"
            ));
        }
        if !self.hilbert.is_asymptotically_positive() {
            out.push(format!("{what}: Hilbert polynomial must be positive at large arguments"));
        }
    }
}

pub fn dim_factorial(dim_x: u32) -> Rational {
    let mut f: i64 = 1;
    for k in 2..=dim_x as i64 {
        f *= k;
    }
    Rational::from_int(f)
}

pub fn piece_rank(p: &Piece) -> u64 {
    p.as_ref().map_or(0, |s| s.rank)
}

pub fn piece_poly(p: &Piece) -> Poly {
    p.as_ref().map_or_else(Poly::zero, |s| s.hilbert.clone())
}

/// Signed (rank, polynomial) pair for derived invariants; kernels and
/// cohomologies come out of subtraction and are validated on conversion back
/// to a [`Piece`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RkPoly {
    pub rank: i64,
    pub hilbert: Poly,
}

impl RkPoly {
    pub fn zero() -> Self {
        RkPoly {
            rank: 0,
            hilbert: Poly::zero(),
        }
    }

    pub fn from_piece(p: &Piece) -> Self {
        RkPoly {
            rank: piece_rank(p) as i64,
            hilbert: piece_poly(p),
        }
    }

    pub fn add(&self, other: &RkPoly) -> RkPoly {
        RkPoly {
            rank: self.rank + other.rank,
            hilbert: &self.hilbert + &other.hilbert,
        }
    }

    pub fn sub(&self, other: &RkPoly) -> RkPoly {
        RkPoly {
            rank: self.rank - other.rank,
            hilbert: &self.hilbert - &other.hilbert,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rank == 0 && self.hilbert.is_zero()
    }

    /// Structural conversion; the zero sheaf must be exactly (0, 0).
    pub fn to_piece(&self) -> Result<Piece, Error> {
        if self.rank < 0 {
            return Err(Error::InvalidInput(format!(
                "derived invariant has negative rank {}",
                self.rank
            )));
        }
        if self.rank == 0 {
            if !self.hilbert.is_zero() {
                return Err(Error::InvalidInput(
                    "derived invariant has rank 0 but a nonzero Hilbert polynomial (torsion is not modeled)"
                        .into(),
                ));
            }
            return Ok(None);
        }
        if !self.hilbert.is_asymptotically_positive() {
            return Err(Error::InvalidInput(
                "derived invariant has nonpositive Hilbert polynomial".into(),
            ));
        }
        Ok(Some(FormalSheaf::new(self.rank as u64, self.hilbert.clone())))
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            write!(f, "valid")
        } else {
            for v in &self.violations {
                writeln!(f, "- {v}")?;
            }
            Ok(())
        }
    }
}

/// Bounded complex concentrated in `[m1, m2]`, presented by invariants.
///
/// `terms[k]` is the sheaf at position `m1 + k`; `images[k]` is the image of
/// the boundary map leaving position `m1 + k` (so `images` has one entry less
/// than `terms`). The optional HN sections list, for each position, the HN
/// quotients of the cohomology there and of each image.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormalComplex {
    #[serde(rename = "dimX")]
    pub dim_x: u32,
    #[serde(rename = "degX")]
    pub deg_x: Rational,
    pub m1: i64,
    pub m2: i64,
    pub terms: Vec<Piece>,
    pub images: Vec<Piece>,
    #[serde(rename = "cohomologyHN", default, skip_serializing_if = "Option::is_none")]
    pub cohomology_hn: Option<Vec<Vec<FormalSheaf>>>,
    #[serde(rename = "imageHN", default, skip_serializing_if = "Option::is_none")]
    pub image_hn: Option<Vec<Vec<FormalSheaf>>>,
}

impl FormalComplex {
    pub fn span(&self) -> usize {
        (self.m2 - self.m1 + 1).max(0) as usize
    }

    pub fn positions(&self) -> impl Iterator<Item = i64> {
        self.m1..=self.m2
    }

    fn idx(&self, i: i64) -> Option<usize> {
        (i >= self.m1 && i <= self.m2).then(|| (i - self.m1) as usize)
    }

    pub fn term(&self, i: i64) -> Option<&FormalSheaf> {
        self.idx(i).and_then(|k| self.terms.get(k)).and_then(Option::as_ref)
    }

    /// Image of the boundary map leaving position `i`; defined for
    /// `m1 <= i < m2`, zero elsewhere.
    pub fn image(&self, i: i64) -> Option<&FormalSheaf> {
        if i < self.m1 || i >= self.m2 {
            return None;
        }
        self.images.get((i - self.m1) as usize).and_then(Option::as_ref)
    }

    pub fn term_rank(&self, i: i64) -> u64 {
        self.term(i).map_or(0, |s| s.rank)
    }

    pub fn term_rkpoly(&self, i: i64) -> RkPoly {
        self.term(i)
            .map_or_else(RkPoly::zero, |s| RkPoly::from_piece(&Some(s.clone())))
    }

    pub fn image_rkpoly(&self, i: i64) -> RkPoly {
        self.image(i)
            .map_or_else(RkPoly::zero, |s| RkPoly::from_piece(&Some(s.clone())))
    }

    /// Kernel of the boundary map leaving position `i` (the full term at `m2`).
    pub fn ker_rkpoly(&self, i: i64) -> RkPoly {
        self.term_rkpoly(i).sub(&self.image_rkpoly(i))
    }

    /// Cohomology at position `i`: kernel minus the incoming image.
    pub fn cohomology_rkpoly(&self, i: i64) -> RkPoly {
        self.ker_rkpoly(i).sub(&self.image_rkpoly(i - 1))
    }

    pub fn has_hn_data(&self) -> bool {
        self.cohomology_hn.is_some() && self.image_hn.is_some()
    }

    pub fn cohomology_hn_at(&self, i: i64) -> Option<&[FormalSheaf]> {
        let k = self.idx(i)?;
        self.cohomology_hn.as_ref().map(|v| v[k].as_slice())
    }

    pub fn image_hn_at(&self, i: i64) -> Option<&[FormalSheaf]> {
        if i < self.m1 || i >= self.m2 {
            return None;
        }
        self.image_hn
            .as_ref()
            .map(|v| v[(i - self.m1) as usize].as_slice())
    }

    pub fn ranks(&self) -> BTreeMap<i64, u64> {
        self.positions().map(|i| (i, self.term_rank(i))).collect()
    }

    /// Nonzero terms as (position, rank, Hilbert polynomial).
    pub fn position_data(&self) -> Vec<(i64, u64, Poly)> {
        self.positions()
            .filter_map(|i| self.term(i).map(|s| (i, s.rank, s.hilbert.clone())))
            .collect()
    }

    pub fn whole_subcomplex(&self) -> SubcomplexInvariants {
        SubcomplexInvariants {
            start: self.m1,
            pieces: self.terms.clone(),
        }
        .trimmed()
    }

    pub fn validate(&self) -> ValidationReport {
        let mut out = Vec::new();
        if self.m1 > self.m2 {
            out.push("m1 must be <= m2".into());
            return ValidationReport { violations: out };
        }
        let span = self.span();
        if self.terms.len() != span {
            out.push(format!(
                "terms must have one entry per position ({} expected, {} given)",
                span,
                self.terms.len()
            ));
            return ValidationReport { violations: out };
        }
        if self.images.len() != span - 1 {
            out.push(format!(
                "images must have one entry per boundary map ({} expected, {} given)",
                span - 1,
                self.images.len()
            ));
            return ValidationReport { violations: out };
        }
        if !self.deg_x.is_positive() {
            out.push("degX must be positive".into());
        }
        if self.terms[0].is_none() {
            out.push("term at m1 must be nonzero".into());
        }
        if self.terms[span - 1].is_none() {
            out.push("term at m2 must be nonzero".into());
        }
        for (k, t) in self.terms.iter().enumerate() {
            if let Some(s) = t {
                s.check(
                    self.dim_x,
                    &self.deg_x,
                    &format!("term at position {}", self.m1 + k as i64),
                    &mut out,
                );
            }
        }
        for (k, im) in self.images.iter().enumerate() {
            let i = self.m1 + k as i64;
            if let Some(s) = im {
                s.check(self.dim_x, &self.deg_x, &format!("image of d^{i}"), &mut out);
                let lo = piece_rank(&self.terms[k]).min(piece_rank(&self.terms[k + 1]));
                if s.rank > lo {
                    out.push(format!(
                        "image of d^{i} has rank {} exceeding min of adjacent term ranks {lo}",
                        s.rank
                    ));
                }
            }
        }
        if !out.is_empty() {
            return ValidationReport { violations: out };
        }
        // Derived invariants: kernels and cohomologies must be honest sheaf
        // invariants (or exactly zero).
        for i in self.positions() {
            let ker = self.ker_rkpoly(i);
            if let Err(e) = ker.to_piece() {
                out.push(format!("kernel of d^{i}: {e}"));
            }
            let h = self.cohomology_rkpoly(i);
            match h.to_piece() {
                Err(e) => out.push(format!("cohomology at {i}: {e}")),
                Ok(Some(s)) => s.check(
                    self.dim_x,
                    &self.deg_x,
                    &format!("cohomology at {i}"),
                    &mut out,
                ),
                Ok(None) => {}
            }
        }
        // HN sections, when present, must sum to the invariants they refine
        // and be strictly decreasing in the reduced order.
        let check_hn = |data: &[FormalSheaf], total: &RkPoly, what: &str, out: &mut Vec<String>| {
            let mut sum = RkPoly::zero();
            for (j, q) in data.iter().enumerate() {
                q.check(self.dim_x, &self.deg_x, &format!("{what} HN quotient {}", j + 1), out);
                sum = sum.add(&RkPoly::from_piece(&Some(q.clone())));
            }
            if &sum != total {
                out.push(format!("{what}: HN quotients must sum to the invariant they refine"));
            }
            for w in data.windows(2) {
                if !(w[0].reduced() > w[1].reduced()) {
                    out.push(format!(
                        "{what}: HN quotients must have strictly decreasing reduced Hilbert polynomials"
                    ));
                }
            }
        };
        if let Some(chn) = &self.cohomology_hn {
            if chn.len() != span {
                out.push("cohomologyHN must have one entry per position".into());
            } else {
                for i in self.positions() {
                    check_hn(
                        &chn[(i - self.m1) as usize],
                        &self.cohomology_rkpoly(i),
                        &format!("cohomology at {i}"),
                        &mut out,
                    );
                }
            }
        }
        if let Some(ihn) = &self.image_hn {
            if ihn.len() != span - 1 {
                out.push("imageHN must have one entry per boundary map".into());
            } else {
                for i in self.m1..self.m2 {
                    check_hn(
                        &ihn[(i - self.m1) as usize],
                        &self.image_rkpoly(i),
                        &format!("image of d^{i}"),
                        &mut out,
                    );
                }
            }
        }
        ValidationReport { violations: out }
    }

    /// Translate all positions by `k`.
    pub fn shift(&self, k: i64) -> FormalComplex {
        FormalComplex {
            m1: self.m1 + k,
            m2: self.m2 + k,
            ..self.clone()
        }
    }

    /// Single sheaf placed at `position`. When no HN data is given the sheaf
    /// is recorded as semistable (one-quotient HN).
    pub fn from_sheaf(
        s: FormalSheaf,
        position: i64,
        dim_x: u32,
        deg_x: Rational,
        hn: Option<Vec<FormalSheaf>>,
    ) -> FormalComplex {
        let hn = hn.unwrap_or_else(|| vec![s.clone()]);
        FormalComplex {
            dim_x,
            deg_x,
            m1: position,
            m2: position,
            terms: vec![Some(s)],
            images: vec![],
            cohomology_hn: Some(vec![hn]),
            image_hn: Some(vec![]),
        }
    }

    /// Two-term complex `s -> s` with the identity as boundary: acyclic, with
    /// image equal to `s`. The image is recorded as semistable.
    pub fn cone_of_identity(
        s: FormalSheaf,
        position: i64,
        dim_x: u32,
        deg_x: Rational,
    ) -> FormalComplex {
        FormalComplex {
            dim_x,
            deg_x,
            m1: position,
            m2: position + 1,
            terms: vec![Some(s.clone()), Some(s.clone())],
            images: vec![Some(s.clone())],
            cohomology_hn: Some(vec![vec![], vec![]]),
            image_hn: Some(vec![vec![s]]),
        }
    }
}

/// Per-position invariants of a subcomplex (or of any per-position sheaf
/// vector, e.g. an HN quotient). Stored trimmed: the first and last pieces are
/// nonzero; the zero object has no pieces.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubcomplexInvariants {
    pub start: i64,
    pub pieces: Vec<Piece>,
}

impl SubcomplexInvariants {
    pub fn zero() -> Self {
        SubcomplexInvariants {
            start: 0,
            pieces: vec![],
        }
    }

    pub fn from_rkpolys(start: i64, parts: Vec<RkPoly>) -> Result<Self, Error> {
        let pieces = parts
            .iter()
            .map(RkPoly::to_piece)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SubcomplexInvariants { start, pieces }.trimmed())
    }

    fn trimmed(mut self) -> Self {
        while self.pieces.last().is_some_and(Option::is_none) {
            self.pieces.pop();
        }
        let lead = self.pieces.iter().take_while(|p| p.is_none()).count();
        if lead > 0 {
            self.pieces.drain(..lead);
            self.start += lead as i64;
        }
        if self.pieces.is_empty() {
            self.start = 0;
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn piece(&self, i: i64) -> Option<&FormalSheaf> {
        let k = i - self.start;
        if k < 0 {
            return None;
        }
        self.pieces.get(k as usize).and_then(Option::as_ref)
    }

    /// Nonzero pieces as (position, rank, Hilbert polynomial).
    pub fn parts(&self) -> impl Iterator<Item = (i64, u64, &Poly)> {
        self.pieces
            .iter()
            .enumerate()
            .filter_map(move |(k, p)| p.as_ref().map(|s| (self.start + k as i64, s.rank, &s.hilbert)))
    }

    pub fn total_rank(&self) -> u64 {
        self.parts().map(|(_, r, _)| r).sum()
    }

    /// Rank-weighted average of the eta values over the support.
    pub fn eta_average(&self, eta: &BTreeMap<i64, Rational>) -> Result<Rational, Error> {
        let mut num = Rational::zero();
        let mut den = Rational::zero();
        for (i, r, _) in self.parts() {
            let e = eta
                .get(&i)
                .ok_or_else(|| Error::InvalidInput(format!("eta is not defined at position {i}")))?;
            let rk = Rational::from_int(r as i64);
            num = num + e * &rk;
            den = den + rk;
        }
        if den.is_zero() {
            return Err(Error::DenominatorZero);
        }
        Ok(num / den)
    }

    /// Formal containment in the ambient complex: per-position rank does not
    /// exceed the term rank and the Hilbert-polynomial difference is
    /// asymptotically nonnegative.
    pub fn check_contained_in(&self, c: &FormalComplex) -> Result<(), Error> {
        if self.is_zero() {
            return Err(Error::InvalidTestObject("test object is zero".into()));
        }
        for (i, r, p) in self.parts() {
            let Some(t) = c.term(i) else {
                return Err(Error::InvalidTestObject(format!(
                    "piece at position {i} lies outside the support of the complex"
                )));
            };
            if r > t.rank {
                return Err(Error::InvalidTestObject(format!(
                    "piece at position {i} has rank {r} exceeding the term rank {}",
                    t.rank
                )));
            }
            if !(&t.hilbert - p).is_asymptotically_nonnegative() {
                return Err(Error::InvalidTestObject(format!(
                    "piece at position {i} has Hilbert polynomial exceeding the term's"
                )));
            }
        }
        Ok(())
    }

    pub fn equals_whole(&self, c: &FormalComplex) -> bool {
        *self == c.whole_subcomplex()
    }
}

/// Which Harder-Narasimhan quotient a filtration step peels off. `piece` is
/// the index within the sheaf HN data when the step comes from the refined
/// filtration, `None` for the coarse (degenerate-family) filtration.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum QuotientLabel {
    Cohomology { position: i64, piece: Option<usize> },
    Cone { position: i64, piece: Option<usize> },
}

impl fmt::Display for QuotientLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuotientLabel::Cohomology { position, piece: None } => write!(f, "H({position})"),
            QuotientLabel::Cohomology {
                position,
                piece: Some(j),
            } => write!(f, "H({position},{j})"),
            QuotientLabel::Cone { position, piece: None } => write!(f, "I({position})"),
            QuotientLabel::Cone {
                position,
                piece: Some(j),
            } => write!(f, "I({position},{j})"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quotient {
    pub label: QuotientLabel,
    pub vector: SubcomplexInvariants,
}

/// Filtration by subcomplex invariants with labeled quotients. Steps are
/// strictly increasing and end at the whole complex; `quotients[k]` is the
/// difference `steps[k] - steps[k-1]`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HNFiltration {
    pub steps: Vec<SubcomplexInvariants>,
    pub quotients: Vec<Quotient>,
}

/// Block label inside an HN type: `H(i,j)` is the j-th HN quotient of the
/// cohomology at position i (supported at i); `I(i,j)` is the j-th HN quotient
/// of the image of d^i (supported at i and i+1). Indices j start at 1.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum BlockLabel {
    H { i: i64, j: usize },
    I { i: i64, j: usize },
}

impl BlockLabel {
    pub fn position(&self) -> i64 {
        match self {
            BlockLabel::H { i, .. } | BlockLabel::I { i, .. } => *i,
        }
    }

    /// Positions where the block contributes rank.
    pub fn support(&self) -> Vec<i64> {
        match self {
            BlockLabel::H { i, .. } => vec![*i],
            BlockLabel::I { i, .. } => vec![*i, *i + 1],
        }
    }
}

impl fmt::Display for BlockLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockLabel::H { i, j } => write!(f, "H({i},{j})"),
            BlockLabel::I { i, j } => write!(f, "I({i},{j})"),
        }
    }
}

impl FromStr for BlockLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let err = || Error::InvalidInput(format!("not a block label: {s:?}"));
        let (kind, rest) = s.split_at(1);
        let rest = rest.strip_prefix('(').and_then(|r| r.strip_suffix(')')).ok_or_else(err)?;
        let (i, j) = rest.split_once(',').ok_or_else(err)?;
        let i: i64 = i.trim().parse().map_err(|_| err())?;
        let j: usize = j.trim().parse().map_err(|_| err())?;
        match kind {
            "H" => Ok(BlockLabel::H { i, j }),
            "I" => Ok(BlockLabel::I { i, j }),
            _ => Err(err()),
        }
    }
}

impl Serialize for BlockLabel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BlockLabel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HnTypeEntry {
    pub label: BlockLabel,
    pub rank: u64,
    pub hilbert: Poly,
}

impl HnTypeEntry {
    pub fn reduced(&self) -> Poly {
        self.hilbert
            .scale(&Rational::new(1, self.rank as i64).expect("rank > 0"))
    }

    pub fn slope(&self, dim_x: u32) -> Rational {
        if dim_x == 0 {
            Rational::zero()
        } else {
            self.reduced().coeff(dim_x as usize - 1)
        }
    }
}

/// Harder-Narasimhan type: the ordered list of quotient blocks of the refined
/// filtration. Entry order is the chain order (cohomology pieces at each
/// position, then image pieces of the boundary leaving it).
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HnType {
    pub m1: i64,
    pub m2: i64,
    pub entries: Vec<HnTypeEntry>,
}

impl HnType {
    pub fn span(&self) -> usize {
        (self.m2 - self.m1 + 1) as usize
    }

    /// Ambient rank at a position: sum of block ranks supported there.
    pub fn ambient_rank(&self, i: i64) -> u64 {
        self.entries
            .iter()
            .filter(|e| e.label.support().contains(&i))
            .map(|e| e.rank)
            .sum()
    }

    /// Ambient Hilbert polynomial at a position.
    pub fn ambient_poly(&self, i: i64) -> Poly {
        self.entries
            .iter()
            .filter(|e| e.label.support().contains(&i))
            .fold(Poly::zero(), |acc, e| &acc + &e.hilbert)
    }

    pub fn positions(&self) -> impl Iterator<Item = i64> {
        self.m1..=self.m2
    }

    /// The polynomial vector of each block over the full range, in entry order.
    pub fn polynomial_vectors(&self) -> Vec<(BlockLabel, Vec<Poly>)> {
        self.entries
            .iter()
            .map(|e| {
                let mut v = vec![Poly::zero(); self.span()];
                for i in e.label.support() {
                    v[(i - self.m1) as usize] = e.hilbert.clone();
                }
                (e.label, v)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub fn sheaf(rank: u64, c1: i64, c0: i64) -> FormalSheaf {
        FormalSheaf::new(rank, Poly::linear(c1, c0))
    }

    /// The two-term fixture: terms (2, 2x+2) and (2, 2x+3), image (1, x+1).
    pub fn c1() -> FormalComplex {
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

    #[test]
    fn c1_is_valid_and_derives() {
        let c = c1();
        assert!(c.validate().is_valid(), "{}", c.validate());
        assert_eq!(c.ker_rkpoly(0), RkPoly { rank: 1, hilbert: Poly::linear(1, 1) });
        assert_eq!(
            c.cohomology_rkpoly(0),
            RkPoly { rank: 1, hilbert: Poly::linear(1, 1) }
        );
        assert_eq!(
            c.cohomology_rkpoly(1),
            RkPoly { rank: 1, hilbert: Poly::linear(1, 2) }
        );
    }

    #[test]
    fn euler_bookkeeping() {
        // sum of cohomology polys + twice images = sum of terms.
        let c = c1();
        let mut lhs = Poly::zero();
        for i in c.positions() {
            lhs = &lhs + &c.cohomology_rkpoly(i).hilbert;
        }
        for i in c.m1..c.m2 {
            let im = c.image(i).map_or_else(Poly::zero, |s| s.hilbert.clone());
            lhs = &(&lhs + &im) + &im;
        }
        let mut rhs = Poly::zero();
        for t in &c.terms {
            rhs = &rhs + &piece_poly(t);
        }
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn validation_catches_bad_image_rank() {
        let mut c = c1();
        c.images[0] = Some(sheaf(2, 2, 2)); // rank 2 image forces ker rank 0 with nonzero poly
        let report = c.validate();
        assert!(!report.is_valid());
    }

    #[test]
    fn validation_catches_negative_cohomology() {
        let mut c = c1();
        // image bigger than the kernel of the next map is fine rank-wise but
        // pushes H^1 negative in polynomial terms.
        c.terms[1] = Some(sheaf(1, 1, 0));
        let report = c.validate();
        assert!(!report.is_valid());
    }

    #[test]
    fn shift_round_trip() {
        let c = c1();
        assert_eq!(c.shift(3).shift(-3), c);
        assert_eq!(c.shift(-2).m1, -2);
        assert!(c.shift(5).validate().is_valid());
    }

    #[test]
    fn cone_is_acyclic_and_valid() {
        let cone = FormalComplex::cone_of_identity(sheaf(2, 2, 2), 0, 1, Rational::one());
        assert!(cone.validate().is_valid(), "{}", cone.validate());
        assert!(cone.cohomology_rkpoly(0).is_zero());
        assert!(cone.cohomology_rkpoly(1).is_zero());
    }

    #[test]
    fn subcomplex_trimming_and_containment() {
        let c = c1();
        let w = c.whole_subcomplex();
        assert!(w.equals_whole(&c));
        let sub = SubcomplexInvariants {
            start: -1,
            pieces: vec![None, Some(sheaf(1, 1, 1)), None],
        }
        .trimmed();
        assert_eq!(sub.start, 0);
        assert_eq!(sub.pieces.len(), 1);
        assert!(sub.check_contained_in(&c).is_ok());
        let too_big = SubcomplexInvariants {
            start: 0,
            pieces: vec![Some(sheaf(3, 3, 3))],
        };
        assert!(too_big.check_contained_in(&c).is_err());
        assert!(SubcomplexInvariants::zero().check_contained_in(&c).is_err());
    }

    #[test]
    fn complex_json_round_trip() {
        let c = c1();
        let s = serde_json::to_string_pretty(&c).unwrap();
        let back: FormalComplex = serde_json::from_str(&s).unwrap();
        assert_eq!(c, back);
        // unknown fields must be rejected
        let bad = s.replace("\"dimX\"", "\"dimY\"");
        assert!(serde_json::from_str::<FormalComplex>(&bad).is_err());
    }

    #[test]
    fn block_label_round_trip() {
        for label in [BlockLabel::H { i: -2, j: 1 }, BlockLabel::I { i: 0, j: 3 }] {
            let s = label.to_string();
            assert_eq!(s.parse::<BlockLabel>().unwrap(), label);
        }
        assert!("X(0,1)".parse::<BlockLabel>().is_err());
    }
}
