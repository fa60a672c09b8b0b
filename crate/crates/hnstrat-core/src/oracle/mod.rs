//! Brute-force oracle over a small prime field. A complex of actual vector
//! spaces is searched exhaustively: every subcomplex, the verdict, the
//! maximal destabilizer, the limit filtration, and one-parameter-subgroup
//! limits are computed from matrices alone, then compared against the
//! structural answers derived from the formal invariants. Disagreements are
//! reported, never repaired.

pub mod linalg;

use crate::complex::{FormalComplex, FormalSheaf, RkPoly, SubcomplexInvariants};
use crate::error::Error;
use crate::hn::{sigma0_classify, sigma0_hn_filtration, sigma0_max_destabilizer, structural_test_family};
use crate::poly::Poly;
use crate::rational::Rational;
use crate::stability::{is_semistable, sigma0_semistable, StabilityParameters, Verdict};
use linalg::{enumerate_subspaces, is_small_prime, subspace_count, MatFp, Subspace};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const DEFAULT_BUDGET: u128 = 1_000_000;

/// A bounded complex of F_p vector spaces: dims[k] is the dimension at
/// position m1 + k, maps[k] the boundary matrix into position m1 + k + 1
/// (rows index the target). Consecutive maps must compose to zero.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteComplex {
    pub p: u64,
    pub m1: i64,
    pub dims: Vec<usize>,
    pub maps: Vec<MatFp>,
}

/// Everything the exhaustive search determines about the degenerate-limit
/// verdict of one complex.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BruteReport {
    pub verdict: Verdict,
    pub ambient_average: Rational,
    pub minimum_average: Rational,
    /// Nonzero subcomplexes attaining the minimum; their sum is the
    /// maximal destabilizer.
    pub minimizer_count: usize,
    pub max_destabilizer: SubcomplexInvariants,
    /// Nonzero subcomplexes, the whole one included.
    pub subcomplex_count: usize,
}

/// Limit behaviour of a diagonal one-parameter subgroup given by a weight
/// per basis vector, computed twice: through the induced subspace
/// filtration and through the matrix entries directly.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct OnePsExperiment {
    /// Distinct weights, strictly decreasing.
    pub weights: Vec<i64>,
    pub compatible_by_containment: bool,
    pub compatible_by_entries: bool,
    /// min over pairs (j, l) with d(E_(j)) not inside E_(l-1) of k_l - k_j;
    /// None when the boundary is zero.
    pub crossing_by_scan: Option<i64>,
    /// min over nonzero boundary entries of (target weight - source weight).
    pub crossing_by_entries: Option<i64>,
    /// The weight-preserving part of the boundary squares to zero.
    pub limit_is_complex: bool,
}

impl FiniteComplex {
    pub fn span(&self) -> usize {
        self.dims.len()
    }

    pub fn m2(&self) -> i64 {
        self.m1 + self.span() as i64 - 1
    }

    pub fn positions(&self) -> impl Iterator<Item = i64> + '_ {
        self.m1..=self.m2()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !is_small_prime(self.p) {
            return Err(Error::InvalidInput(format!(
                "field order {} is not a supported small prime",
                self.p
            )));
        }
        if self.dims.is_empty() || self.total_dim() == 0 {
            return Err(Error::InvalidInput("complex has no basis vectors".into()));
        }
        if self.maps.len() + 1 != self.dims.len() {
            return Err(Error::InvalidInput(format!(
                "{} positions need {} boundary maps, found {}",
                self.dims.len(),
                self.dims.len() - 1,
                self.maps.len()
            )));
        }
        for (k, m) in self.maps.iter().enumerate() {
            if m.p != self.p {
                return Err(Error::InvalidInput(format!("map {k} is over F_{}", m.p)));
            }
            if m.rows != self.dims[k + 1] || m.cols != self.dims[k] {
                return Err(Error::InvalidInput(format!(
                    "map {k} is {}x{}, expected {}x{}",
                    m.rows,
                    m.cols,
                    self.dims[k + 1],
                    self.dims[k]
                )));
            }
            if m.entries.len() != m.rows * m.cols {
                return Err(Error::InvalidInput(format!("map {k} has a ragged entry list")));
            }
            if m.entries.iter().any(|&v| v >= self.p) {
                return Err(Error::InvalidInput(format!("map {k} has entries not reduced mod p")));
            }
        }
        for k in 0..self.maps.len().saturating_sub(1) {
            if !self.maps[k + 1].mul(&self.maps[k]).is_zero() {
                return Err(Error::InvalidInput(format!(
                    "maps {k} and {} do not compose to zero",
                    k + 1
                )));
            }
        }
        Ok(())
    }

    pub fn whole_tuple(&self) -> Vec<Subspace> {
        self.dims.iter().map(|&d| Subspace::full(self.p, d)).collect()
    }

    pub fn zero_tuple(&self) -> Vec<Subspace> {
        self.dims.iter().map(|&d| Subspace::zero(self.p, d)).collect()
    }

    fn is_whole(&self, t: &[Subspace]) -> bool {
        t.iter().zip(&self.dims).all(|(s, &d)| s.dim() == d)
    }

    /// Formal invariants of a subcomplex tuple: constant Hilbert polynomials
    /// equal to the dimensions.
    pub fn tuple_invariants(&self, t: &[Subspace]) -> Result<SubcomplexInvariants, Error> {
        let parts = t
            .iter()
            .map(|s| RkPoly {
                rank: s.dim() as i64,
                hilbert: Poly::constant(Rational::from_int(s.dim() as i64)),
            })
            .collect();
        SubcomplexInvariants::from_rkpolys(self.m1, parts)
    }

    /// Rank-weighted eta average of a nonzero tuple.
    fn tuple_average(&self, t: &[Subspace], eta: &BTreeMap<i64, Rational>) -> Result<Rational, Error> {
        let mut num = Rational::zero();
        let mut den = Rational::zero();
        for (k, s) in t.iter().enumerate() {
            if s.is_zero() {
                continue;
            }
            let i = self.m1 + k as i64;
            let e = eta
                .get(&i)
                .ok_or_else(|| Error::InvalidInput(format!("eta is not defined at position {i}")))?;
            let d = Rational::from_int(s.dim() as i64);
            num = num + e * &d;
            den = den + d;
        }
        if den.is_zero() {
            return Err(Error::DenominatorZero);
        }
        num.checked_div(&den)
    }

    /// Number of subspace tuples the exhaustive search must visit.
    pub fn enumeration_cost(&self) -> Option<u128> {
        let mut total: u128 = 1;
        for &d in &self.dims {
            total = total.checked_mul(subspace_count(self.p, d)?)?;
        }
        Some(total)
    }

    /// Every subcomplex, the zero one included: tuples of subspaces carried
    /// into each other by the boundary maps.
    pub fn enumerate_subcomplexes(&self, budget: u128) -> Result<Vec<Vec<Subspace>>, Error> {
        self.validate()?;
        let needed = self.enumeration_cost().unwrap_or(u128::MAX);
        if needed > budget {
            return Err(Error::BudgetExceeded { needed, budget });
        }
        let per_position: Vec<Vec<Subspace>> = self
            .dims
            .iter()
            .map(|&d| enumerate_subspaces(self.p, d))
            .collect();
        let mut out = Vec::new();
        let mut partial: Vec<Subspace> = Vec::with_capacity(self.span());
        self.search(&per_position, &mut partial, &mut out);
        Ok(out)
    }

    fn search(
        &self,
        per_position: &[Vec<Subspace>],
        partial: &mut Vec<Subspace>,
        out: &mut Vec<Vec<Subspace>>,
    ) {
        let k = partial.len();
        if k == self.span() {
            out.push(partial.clone());
            return;
        }
        let image = (k > 0).then(|| partial[k - 1].image_under(&self.maps[k - 1]));
        for cand in &per_position[k] {
            if let Some(img) = &image {
                if !cand.contains(img) {
                    continue;
                }
            }
            partial.push(cand.clone());
            self.search(per_position, partial, out);
            partial.pop();
        }
    }

    /// Formal invariant vector of the complex: dimension-0 sheaves with
    /// constant Hilbert polynomials and singleton HN data. Zero positions at
    /// the ends are trimmed.
    pub fn extract_invariants(&self) -> Result<FormalComplex, Error> {
        self.validate()?;
        let lead = self.dims.iter().take_while(|&&d| d == 0).count();
        let tail = self.dims.iter().rev().take_while(|&&d| d == 0).count();
        let dims = &self.dims[lead..self.dims.len() - tail];
        let maps = &self.maps[lead..self.maps.len() - tail];
        let m1 = self.m1 + lead as i64;
        let sheaf = |d: usize| -> Option<FormalSheaf> {
            (d > 0).then(|| FormalSheaf::new(d as u64, Poly::constant(Rational::from_int(d as i64))))
        };
        let ranks: Vec<usize> = maps.iter().map(MatFp::rank).collect();
        let mut terms = Vec::with_capacity(dims.len());
        let mut cohomology_hn = Vec::with_capacity(dims.len());
        for (k, &d) in dims.iter().enumerate() {
            terms.push(sheaf(d));
            let h = d - ranks.get(k).copied().unwrap_or(0) - if k > 0 { ranks[k - 1] } else { 0 };
            cohomology_hn.push(sheaf(h).into_iter().collect::<Vec<_>>());
        }
        let images: Vec<Option<FormalSheaf>> = ranks.iter().map(|&r| sheaf(r)).collect();
        let image_hn: Vec<Vec<FormalSheaf>> =
            images.iter().map(|s| s.clone().into_iter().collect()).collect();
        let c = FormalComplex {
            dim_x: 0,
            deg_x: Rational::one(),
            m1,
            m2: m1 + dims.len() as i64 - 1,
            terms,
            images,
            cohomology_hn: Some(cohomology_hn),
            image_hn: Some(image_hn),
        };
        let report = c.validate();
        if !report.is_valid() {
            return Err(Error::Discrepancy(format!(
                "extracted invariants are inconsistent:\n{report}"
            )));
        }
        Ok(c)
    }

    /// Maximal destabilizer as an actual subspace tuple: the sum of every
    /// average-minimizing subcomplex. The sum must itself attain the
    /// minimum; the theory makes minimizers closed under sums, so a
    /// violation is a uniqueness failure worth surfacing.
    pub fn brute_max_tuple(
        &self,
        eta: &BTreeMap<i64, Rational>,
        budget: u128,
    ) -> Result<(Vec<Subspace>, BruteReport), Error> {
        let tuples = self.enumerate_subcomplexes(budget)?;
        let nonzero: Vec<&Vec<Subspace>> = tuples
            .iter()
            .filter(|t| t.iter().any(|s| !s.is_zero()))
            .collect();
        let ambient_average = self.tuple_average(&self.whole_tuple(), eta)?;
        let mut minimum = ambient_average.clone();
        let mut averages = Vec::with_capacity(nonzero.len());
        for t in &nonzero {
            let avg = self.tuple_average(t, eta)?;
            if avg < minimum {
                minimum = avg.clone();
            }
            averages.push(avg);
        }
        let minimizers: Vec<&Vec<Subspace>> = nonzero
            .iter()
            .zip(&averages)
            .filter(|(_, a)| **a == minimum)
            .map(|(t, _)| *t)
            .collect();
        let mut max_tuple = self.zero_tuple();
        for t in &minimizers {
            max_tuple = max_tuple
                .iter()
                .zip(t.iter())
                .map(|(a, b)| a.sum(b))
                .collect();
        }
        let max_average = self.tuple_average(&max_tuple, eta)?;
        if max_average != minimum {
            return Err(Error::NonUnique(format!(
                "sum of the {} minimizers has average {max_average}, expected {minimum}",
                minimizers.len()
            )));
        }
        let mut strict = true;
        for (t, a) in nonzero.iter().zip(&averages) {
            if self.is_whole(t) {
                continue;
            }
            if *a == ambient_average {
                strict = false;
            }
        }
        let verdict = if minimum < ambient_average {
            Verdict::Destabilized {
                label: "bruteMaxDestabilizer".to_string(),
                witness: self.tuple_invariants(&max_tuple)?,
                test_value: Poly::constant(minimum.clone()),
                ambient_value: Poly::constant(ambient_average.clone()),
            }
        } else if strict {
            Verdict::Stable
        } else {
            Verdict::Semistable
        };
        let report = BruteReport {
            verdict,
            ambient_average,
            minimum_average: minimum,
            minimizer_count: minimizers.len(),
            max_destabilizer: self.tuple_invariants(&max_tuple)?,
            subcomplex_count: nonzero.len(),
        };
        Ok((max_tuple, report))
    }

    pub fn brute_report(
        &self,
        eta: &BTreeMap<i64, Rational>,
        budget: u128,
    ) -> Result<BruteReport, Error> {
        Ok(self.brute_max_tuple(eta, budget)?.1)
    }

    /// Quotient by a subcomplex tuple, with the projection matrices and the
    /// sections picking coordinate representatives.
    pub fn quotient_with_maps(&self, t: &[Subspace]) -> (FiniteComplex, Vec<MatFp>, Vec<MatFp>) {
        let p = self.p;
        let mut projections = Vec::with_capacity(self.span());
        let mut sections = Vec::with_capacity(self.span());
        let mut dims = Vec::with_capacity(self.span());
        for (k, u) in t.iter().enumerate() {
            let d = self.dims[k];
            let pivots: Vec<usize> = u
                .basis
                .iter()
                .map(|row| row.iter().position(|&x| x != 0).expect("echelon rows are nonzero"))
                .collect();
            let free: Vec<usize> = (0..d).filter(|c| !pivots.contains(c)).collect();
            let q = free.len();
            let mut proj = MatFp::zero(p, q, d);
            for c in 0..d {
                let mut e = vec![0u64; d];
                e[c] = 1;
                // residual of the standard vector modulo u, read off the
                // free coordinates
                let mut w = e;
                for (row, &pc) in u.basis.iter().zip(&pivots) {
                    let f = w[pc];
                    if f == 0 {
                        continue;
                    }
                    for (wi, &bi) in w.iter_mut().zip(row) {
                        *wi = (*wi + (p - f) * bi % p) % p;
                    }
                }
                for (r, &fc) in free.iter().enumerate() {
                    proj.set(r, c, w[fc]);
                }
            }
            let mut sec = MatFp::zero(p, d, q);
            for (r, &fc) in free.iter().enumerate() {
                sec.set(fc, r, 1);
            }
            projections.push(proj);
            sections.push(sec);
            dims.push(q);
        }
        let maps = (0..self.maps.len())
            .map(|k| projections[k + 1].mul(&self.maps[k]).mul(&sections[k]))
            .collect();
        (
            FiniteComplex {
                p,
                m1: self.m1,
                dims,
                maps,
            },
            projections,
            sections,
        )
    }

    /// Limit filtration by repeated maximal destabilizers of the successive
    /// quotients, returned as ambient invariant vectors ending at the whole
    /// complex.
    pub fn brute_hn(
        &self,
        eta: &BTreeMap<i64, Rational>,
        budget: u128,
    ) -> Result<Vec<SubcomplexInvariants>, Error> {
        self.validate()?;
        let mut steps = Vec::new();
        let mut current = self.zero_tuple();
        // composed sections: quotient coordinates -> ambient coordinates
        let mut lift: Vec<MatFp> = self.dims.iter().map(|&d| MatFp::identity(self.p, d)).collect();
        let mut q = self.clone();
        for _ in 0..=self.total_dim() {
            let (w, _) = q.brute_max_tuple(eta, budget)?;
            current = current
                .iter()
                .zip(w.iter().enumerate())
                .map(|(cur, (k, wk))| {
                    let lifted: Vec<Vec<u64>> =
                        wk.basis.iter().map(|v| lift[k].apply(v)).collect();
                    cur.sum(&Subspace::from_span(self.p, cur.ambient, &lifted))
                })
                .collect();
            steps.push(self.tuple_invariants(&current)?);
            if q.is_whole(&w) {
                assert!(
                    self.is_whole(&current),
                    "limit filtration must end at the whole complex"
                );
                return Ok(steps);
            }
            let (next, _, sections) = q.quotient_with_maps(&w);
            lift = lift
                .iter()
                .zip(&sections)
                .map(|(l, s)| l.mul(s))
                .collect();
            q = next;
        }
        unreachable!("each step strictly increases the filtration");
    }

    /// Tuple-level containment of the boundary image of `src` in `dst`.
    fn image_contained(&self, src: &[Subspace], dst: &[Subspace]) -> bool {
        (0..self.maps.len()).all(|k| dst[k + 1].contains(&src[k].image_under(&self.maps[k])))
    }

    /// Diagonal one-parameter subgroup given by one weight per basis
    /// vector; the two compatibility routes and the two crossing values
    /// must agree, and a compatible limit must again be a complex.
    pub fn one_ps_experiment(&self, assignment: &[Vec<i64>]) -> Result<OnePsExperiment, Error> {
        self.validate()?;
        if assignment.len() != self.span() {
            return Err(Error::MalformedDecomposition(format!(
                "{} weight lists for {} positions",
                assignment.len(),
                self.span()
            )));
        }
        for (k, ws) in assignment.iter().enumerate() {
            if ws.len() != self.dims[k] {
                return Err(Error::MalformedDecomposition(format!(
                    "position {} has {} weights for dimension {}",
                    self.m1 + k as i64,
                    ws.len(),
                    self.dims[k]
                )));
            }
        }
        let mut weights: Vec<i64> = assignment.iter().flatten().copied().collect();
        if weights.is_empty() {
            return Err(Error::MalformedDecomposition("no basis vectors carry weights".into()));
        }
        weights.sort_unstable_by(|a, b| b.cmp(a));
        weights.dedup();
        let filt: Vec<Vec<Subspace>> = weights
            .iter()
            .map(|&w| {
                assignment
                    .iter()
                    .zip(&self.dims)
                    .map(|(ws, &d)| {
                        let rows: Vec<Vec<u64>> = ws
                            .iter()
                            .enumerate()
                            .filter(|(_, &x)| x >= w)
                            .map(|(b, _)| {
                                let mut e = vec![0u64; d];
                                e[b] = 1;
                                e
                            })
                            .collect();
                        Subspace::from_span(self.p, d, &rows)
                    })
                    .collect()
            })
            .collect();
        let compatible_by_containment =
            filt.iter().all(|e| self.image_contained(e, e));
        let mut crossing_by_entries: Option<i64> = None;
        for (k, m) in self.maps.iter().enumerate() {
            for r in 0..m.rows {
                for c in 0..m.cols {
                    if m.get(r, c) != 0 {
                        let v = assignment[k + 1][r] - assignment[k][c];
                        crossing_by_entries =
                            Some(crossing_by_entries.map_or(v, |cur| cur.min(v)));
                    }
                }
            }
        }
        let compatible_by_entries = crossing_by_entries.is_none_or(|v| v >= 0);
        let zero = self.zero_tuple();
        let mut crossing_by_scan: Option<i64> = None;
        for (j, ej) in filt.iter().enumerate() {
            for l in 0..weights.len() {
                let prev = if l == 0 { &zero } else { &filt[l - 1] };
                if !self.image_contained(ej, prev) {
                    let v = weights[l] - weights[j];
                    crossing_by_scan = Some(crossing_by_scan.map_or(v, |cur| cur.min(v)));
                }
            }
        }
        let limit_maps: Vec<MatFp> = self
            .maps
            .iter()
            .enumerate()
            .map(|(k, m)| {
                let mut out = MatFp::zero(self.p, m.rows, m.cols);
                for r in 0..m.rows {
                    for c in 0..m.cols {
                        if assignment[k + 1][r] == assignment[k][c] {
                            out.set(r, c, m.get(r, c));
                        }
                    }
                }
                out
            })
            .collect();
        let limit_is_complex = (0..limit_maps.len().saturating_sub(1))
            .all(|k| limit_maps[k + 1].mul(&limit_maps[k]).is_zero());
        Ok(OnePsExperiment {
            weights,
            compatible_by_containment,
            compatible_by_entries,
            crossing_by_scan,
            crossing_by_entries,
            limit_is_complex,
        })
    }
}

/// Strictly increasing integer eta, one unit per position.
pub fn default_eta(c: &FiniteComplex) -> BTreeMap<i64, Rational> {
    c.positions().map(|i| (i, Rational::from_int(i))).collect()
}

/// Run every structural computation against the exhaustive search. The
/// returned list describes the disagreements; an empty list is agreement.
pub fn cross_validate(
    c: &FiniteComplex,
    eta: &BTreeMap<i64, Rational>,
    budget: u128,
) -> Result<Vec<String>, Error> {
    let formal = c.extract_invariants()?;
    let brute = c.brute_report(eta, budget)?;
    let mut issues = Vec::new();

    let class = sigma0_classify(&formal)?;
    if class.is_semistable() != brute.verdict.is_semistable() {
        issues.push(format!(
            "shape classifier says semistable={}, search says semistable={}",
            class.is_semistable(),
            brute.verdict.is_semistable()
        ));
    }

    let tests = structural_test_family(&formal)?;
    let limit = sigma0_semistable(&formal, eta, &tests)?;
    if limit.is_semistable() != brute.verdict.is_semistable() {
        issues.push(format!(
            "structural limit verdict {limit:?} disagrees with search verdict {:?}",
            brute.verdict
        ));
    }

    // dimension 0: every family member decides by the eta average, so the
    // verdict must match for any positive constant delta
    let params = StabilityParameters {
        sigma: formal.positions().map(|i| (i, 1)).collect(),
        eta: eta.clone(),
        delta: Poly::constant(Rational::one()),
    };
    let family = is_semistable(&formal, &params, &tests)?;
    if family.is_semistable() != brute.verdict.is_semistable() {
        issues.push(format!(
            "family verdict {family:?} disagrees with search verdict {:?}",
            brute.verdict
        ));
    }

    let structural_max = sigma0_max_destabilizer(&formal)?;
    if structural_max != brute.max_destabilizer {
        issues.push(format!(
            "structural maximal destabilizer {structural_max:?} differs from search {:?}",
            brute.max_destabilizer
        ));
    }

    let filtration = sigma0_hn_filtration(&formal)?;
    let brute_steps = c.brute_hn(eta, budget)?;
    if filtration.steps != brute_steps {
        issues.push(format!(
            "limit filtration steps differ: structural {:?}, search {:?}",
            filtration.steps, brute_steps
        ));
    }

    Ok(issues)
}

/// Deterministic generator for sampled sweeps; splitmix64 stream.
pub struct OracleRng(pub u64);

impl OracleRng {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }
}

/// Every complex with the given span, all positions of dimension 1..=max_dim,
/// boundary maps exhaustive subject to consecutive composition being zero.
pub fn enumerate_complexes(p: u64, span: usize, max_dim: usize) -> Vec<FiniteComplex> {
    fn dims_rec(span: usize, max_dim: usize) -> Vec<Vec<usize>> {
        if span == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for rest in dims_rec(span - 1, max_dim) {
            for d in 1..=max_dim {
                let mut v = vec![d];
                v.extend(&rest);
                out.push(v);
            }
        }
        out
    }

    fn maps_rec(
        p: u64,
        dims: &[usize],
        k: usize,
        acc: &mut Vec<MatFp>,
        out: &mut Vec<FiniteComplex>,
        m1: i64,
    ) {
        if k + 1 == dims.len() {
            out.push(FiniteComplex {
                p,
                m1,
                dims: dims.to_vec(),
                maps: acc.clone(),
            });
            return;
        }
        // rows of the next map must kill the image of the previous one:
        // they range over the left kernel of the previous matrix
        let allowed = match acc.last() {
            Some(prev) => prev.transpose().kernel(),
            None => Subspace::full(p, dims[0]),
        };
        let rows = allowed.elements();
        let height = dims[k + 1];
        let mut counter = vec![0usize; height];
        loop {
            let chosen: Vec<Vec<u64>> = counter.iter().map(|&i| rows[i].clone()).collect();
            let m = MatFp::from_rows(p, dims[k], &chosen).expect("rows have matching width");
            acc.push(m);
            maps_rec(p, dims, k + 1, acc, out, m1);
            acc.pop();
            let mut i = 0;
            loop {
                if i == height {
                    return;
                }
                counter[i] += 1;
                if counter[i] < rows.len() {
                    break;
                }
                counter[i] = 0;
                i += 1;
            }
        }
    }

    let mut out = Vec::new();
    for dims in dims_rec(span, max_dim) {
        let mut acc = Vec::new();
        maps_rec(p, &dims, 0, &mut acc, &mut out, 0);
    }
    out
}

/// One random complex with the given dimensions; maps sampled uniformly
/// from the matrices satisfying the composition constraint.
pub fn random_complex(p: u64, dims: &[usize], rng: &mut OracleRng) -> FiniteComplex {
    let mut maps: Vec<MatFp> = Vec::with_capacity(dims.len().saturating_sub(1));
    for k in 0..dims.len().saturating_sub(1) {
        let allowed = match maps.last() {
            Some(prev) => prev.transpose().kernel(),
            None => Subspace::full(p, dims[k]),
        };
        let basis = &allowed.basis;
        let mut rows = Vec::with_capacity(dims[k + 1]);
        for _ in 0..dims[k + 1] {
            let mut v = vec![0u64; dims[k]];
            for b in basis {
                let cf = rng.below(p);
                for (vi, &bi) in v.iter_mut().zip(b) {
                    *vi = (*vi + cf * bi) % p;
                }
            }
            rows.push(v);
        }
        maps.push(MatFp::from_rows(p, dims[k], &rows).expect("rows have matching width"));
    }
    FiniteComplex {
        p,
        m1: 0,
        dims: dims.to_vec(),
        maps,
    }
}

/// All weight assignments with values in the given set, one per basis
/// vector.
pub fn enumerate_assignments(c: &FiniteComplex, values: &[i64]) -> Vec<Vec<Vec<i64>>> {
    let total = c.total_dim();
    let mut out = Vec::new();
    let mut counter = vec![0usize; total];
    loop {
        let mut flat = counter.iter().map(|&i| values[i]);
        let assignment: Vec<Vec<i64>> = c
            .dims
            .iter()
            .map(|&d| (0..d).map(|_| flat.next().expect("counter covers all slots")).collect())
            .collect();
        out.push(assignment);
        let mut i = 0;
        loop {
            if i == total {
                return out;
            }
            counter[i] += 1;
            if counter[i] < values.len() {
                break;
            }
            counter[i] = 0;
            i += 1;
        }
    }
}
