//! Stability parameters, reduced Hilbert polynomials, and semistability
//! verdicts.
//!
//! A parameter triple assigns each position a positive integer weight
//! `sigma_i`, a rational `eta_i`, and fixes one positive polynomial `delta`
//! (degree dimX-1, constant in dimension 0). The reduced Hilbert polynomial
//! of a nonzero per-position vector E is
//!
//! ```text
//!   red(E) = (sum_i sigma_i P(E^i) - delta * sum_i eta_i rk(E^i)) / (sum_i sigma_i rk(E^i))
//! ```
//!
//! and the complex is semistable when no proper nonzero subcomplex has a
//! strictly larger reduced polynomial in the asymptotic order.
//!
//! The one-parameter family of interest fixes sigma = 1 and rescales eta by
//! 1/epsilon; its epsilon -> 0 limit is the degenerate order where only the
//! rank-weighted eta-average matters, with the direction reversed: a
//! subcomplex destabilizes in the limit exactly when its eta-average is
//! strictly smaller than that of the whole complex.

use crate::complex::{FormalComplex, SubcomplexInvariants};
use crate::error::Error;
use crate::poly::{Degree, Poly};
use crate::rational::Rational;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityParameters {
    pub sigma: BTreeMap<i64, u64>,
    pub eta: BTreeMap<i64, Rational>,
    pub delta: Poly,
}

/// The sigma = 1 family with eta scaled by 1/epsilon.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsilonFamily {
    pub eta: BTreeMap<i64, Rational>,
    pub delta: Poly,
    pub epsilon: Rational,
}

/// A parameter file is either the family form (has `epsilon`, sigma implied
/// to be 1) or an explicit triple (has `sigma`).
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ParameterInput {
    Family(EpsilonFamily),
    Raw(StabilityParameters),
}

impl Serialize for ParameterInput {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ParameterInput::Family(f) => f.serialize(serializer),
            ParameterInput::Raw(p) => p.serialize(serializer),
        }
    }
}

// Dispatch on the presence of "epsilon" by hand: untagged derive buffers the
// input in a way that breaks integer-keyed maps.
impl<'de> Deserialize<'de> for ParameterInput {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(deserializer)?;
        if v.get("epsilon").is_some() {
            serde_json::from_value(v)
                .map(ParameterInput::Family)
                .map_err(serde::de::Error::custom)
        } else {
            serde_json::from_value(v)
                .map(ParameterInput::Raw)
                .map_err(serde::de::Error::custom)
        }
    }
}

impl ParameterInput {
    pub fn family(&self) -> Option<&EpsilonFamily> {
        match self {
            ParameterInput::Family(f) => Some(f),
            ParameterInput::Raw(_) => None,
        }
    }

    pub fn to_parameters(&self) -> Result<StabilityParameters, Error> {
        match self {
            ParameterInput::Family(f) => f.to_parameters(),
            ParameterInput::Raw(p) => Ok(p.clone()),
        }
    }
}

impl StabilityParameters {
    /// Degree and positivity constraints on delta: exact degree dimX-1
    /// (a positive constant in dimension 0) with positive leading term.
    pub fn check_delta(&self, dim_x: u32) -> Result<(), Error> {
        let want = if dim_x == 0 { 0 } else { dim_x as usize - 1 };
        let lead_ok = self.delta.leading().is_some_and(Rational::is_positive);
        if self.delta.degree() != Degree::Of(want) || !lead_ok {
            return Err(Error::InvalidInput(format!(
                "delta must have degree exactly {want} with positive leading coefficient"
            )));
        }
        Ok(())
    }

    /// Leading coefficient of delta (the x^(dimX-1) term).
    pub fn delta_top(&self) -> Rational {
        self.delta.leading().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_sigma_zero(&self) -> bool {
        self.sigma.values().all(|&s| s == 0)
    }

    /// sigma and eta must be defined on the same positions, covering the
    /// support of the complex.
    pub fn check_support(&self, positions: impl Iterator<Item = i64>) -> Result<(), Error> {
        if !self.sigma.keys().eq(self.eta.keys()) {
            return Err(Error::InvalidInput(
                "sigma and eta must be defined on the same positions".into(),
            ));
        }
        for i in positions {
            if !self.eta.contains_key(&i) {
                return Err(Error::InvalidInput(format!(
                    "parameters are not defined at position {i}"
                )));
            }
        }
        Ok(())
    }
}

impl EpsilonFamily {
    pub fn check(&self) -> Result<(), Error> {
        if !self.epsilon.is_positive() {
            return Err(Error::InvalidInput("epsilon must be positive".into()));
        }
        Ok(())
    }

    /// Explicit triple for this member of the family: sigma = 1 everywhere,
    /// eta scaled by 1/epsilon.
    pub fn to_parameters(&self) -> Result<StabilityParameters, Error> {
        self.check()?;
        let inv = self.epsilon.recip()?;
        Ok(StabilityParameters {
            sigma: self.eta.keys().map(|&i| (i, 1)).collect(),
            eta: self.eta.iter().map(|(&i, e)| (i, e * &inv)).collect(),
            delta: self.delta.clone(),
        })
    }

    pub fn with_epsilon(&self, epsilon: Rational) -> EpsilonFamily {
        EpsilonFamily {
            epsilon,
            ..self.clone()
        }
    }
}

/// Numerator and denominator of the reduced Hilbert polynomial of a
/// per-position vector: (sum sigma P - delta sum eta rk, sum sigma rk).
pub fn reduced_hilbert_parts(
    sub: &SubcomplexInvariants,
    params: &StabilityParameters,
) -> Result<(Poly, Rational), Error> {
    if sub.is_zero() {
        return Err(Error::InvalidTestObject("the zero object has no reduced polynomial".into()));
    }
    let mut num = Poly::zero();
    let mut eta_mass = Rational::zero();
    let mut den = Rational::zero();
    for (i, r, p) in sub.parts() {
        let (Some(&s), Some(e)) = (params.sigma.get(&i), params.eta.get(&i)) else {
            return Err(Error::InvalidInput(format!(
                "parameters are not defined at position {i}"
            )));
        };
        let rk = Rational::from_int(r as i64);
        num = &num + &p.scale(&Rational::from_int(s as i64));
        eta_mass = eta_mass + e * &rk;
        den = den + Rational::from_int((s * r) as i64);
    }
    num = &num - &params.delta.scale(&eta_mass);
    Ok((num, den))
}

pub fn reduced_hilbert(
    sub: &SubcomplexInvariants,
    params: &StabilityParameters,
) -> Result<Poly, Error> {
    let (num, den) = reduced_hilbert_parts(sub, params)?;
    if den.is_zero() {
        return Err(Error::DenominatorZero);
    }
    Ok(num.scale(&den.recip()?))
}

pub fn reduced_hilbert_complex(
    c: &FormalComplex,
    params: &StabilityParameters,
) -> Result<Poly, Error> {
    reduced_hilbert(&c.whole_subcomplex(), params)
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "camelCase")]
pub enum Verdict {
    Stable,
    Semistable,
    Destabilized {
        label: String,
        witness: SubcomplexInvariants,
        #[serde(rename = "testValue")]
        test_value: Poly,
        #[serde(rename = "ambientValue")]
        ambient_value: Poly,
    },
}

impl Verdict {
    pub fn is_semistable(&self) -> bool {
        !matches!(self, Verdict::Destabilized { .. })
    }
}

/// Check the complex against a finite family of test objects. The verdict is
/// relative to the family: Destabilized on the first test object with a
/// strictly larger reduced polynomial, Semistable if some comparison is an
/// equality, Stable if all are strict in the complex's favor.
pub fn is_semistable(
    c: &FormalComplex,
    params: &StabilityParameters,
    tests: &[(String, SubcomplexInvariants)],
) -> Result<Verdict, Error> {
    params.check_delta(c.dim_x)?;
    params.check_support(c.position_data().into_iter().map(|(i, _, _)| i))?;
    let ambient = reduced_hilbert(&c.whole_subcomplex(), params)?;
    let mut strict = true;
    for (label, sub) in tests {
        sub.check_contained_in(c)?;
        if sub.equals_whole(c) {
            continue;
        }
        let red = reduced_hilbert(sub, params)?;
        if red > ambient {
            return Ok(Verdict::Destabilized {
                label: label.clone(),
                witness: sub.clone(),
                test_value: red,
                ambient_value: ambient,
            });
        }
        if red == ambient {
            strict = false;
        }
    }
    Ok(if strict { Verdict::Stable } else { Verdict::Semistable })
}

/// The epsilon -> 0 limit verdict: a test object destabilizes exactly when
/// its rank-weighted eta-average is strictly smaller than the ambient one.
pub fn sigma0_semistable(
    c: &FormalComplex,
    eta: &BTreeMap<i64, Rational>,
    tests: &[(String, SubcomplexInvariants)],
) -> Result<Verdict, Error> {
    let ambient_avg = c.whole_subcomplex().eta_average(eta)?;
    let mut strict = true;
    for (label, sub) in tests {
        sub.check_contained_in(c)?;
        if sub.equals_whole(c) {
            continue;
        }
        let avg = sub.eta_average(eta)?;
        if avg < ambient_avg {
            return Ok(Verdict::Destabilized {
                label: label.clone(),
                witness: sub.clone(),
                test_value: Poly::constant(avg),
                ambient_value: Poly::constant(ambient_avg),
            });
        }
        if avg == ambient_avg {
            strict = false;
        }
    }
    Ok(if strict { Verdict::Stable } else { Verdict::Semistable })
}

/// eta' = eta - C*sigma with C = (sum eta_i r^i) / (sum sigma_i r^i), so the
/// normalized eta has rank-weighted, sigma-paired sum zero over the complex.
/// Every reduced polynomial shifts by the same constant, so verdicts are
/// unchanged.
pub fn normalize_eta(
    params: &StabilityParameters,
    ranks: &BTreeMap<i64, u64>,
) -> Result<StabilityParameters, Error> {
    let mut num = Rational::zero();
    let mut den = Rational::zero();
    for (i, &r) in ranks {
        if r == 0 {
            continue;
        }
        let (Some(&s), Some(e)) = (params.sigma.get(i), params.eta.get(i)) else {
            return Err(Error::InvalidInput(format!(
                "parameters are not defined at position {i}"
            )));
        };
        num = num + e * &Rational::from_int(r as i64);
        den = den + Rational::from_int((s * r) as i64);
    }
    if den.is_zero() {
        return Err(Error::DenominatorZero);
    }
    let c = num / den;
    let eta = params
        .eta
        .iter()
        .map(|(&i, e)| {
            let s = Rational::from_int(*params.sigma.get(&i).unwrap_or(&0) as i64);
            (i, e - &(&c * &s))
        })
        .collect();
    Ok(StabilityParameters {
        sigma: params.sigma.clone(),
        eta,
        delta: params.delta.clone(),
    })
}

/// (sigma, K*delta, eta/K) for positive K: reduced polynomials are unchanged.
pub fn rescale_parameters(
    params: &StabilityParameters,
    k: &Rational,
) -> Result<StabilityParameters, Error> {
    if !k.is_positive() {
        return Err(Error::InvalidInput("rescaling factor must be positive".into()));
    }
    let kinv = k.recip()?;
    Ok(StabilityParameters {
        sigma: params.sigma.clone(),
        eta: params.eta.iter().map(|(&i, e)| (i, e * &kinv)).collect(),
        delta: params.delta.scale(k),
    })
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum WitnessThreshold {
    /// The witness does not destabilize at any epsilon in the family.
    NotDestabilizing,
    /// The witness destabilizes at every epsilon > 0.
    AllEpsilon,
    /// The witness destabilizes for every epsilon strictly below the bound.
    Below { bound: Rational },
}

/// For a fixed witness with strictly smaller eta-average, the range of
/// epsilon at which it destabilizes within the family.
///
/// Writing g = etaAvg(F) - etaAvg(E) and s for the x^(dimX-1) coefficient of
/// the plain (eta-free) reduced difference red(E) - red(F), the family
/// difference at epsilon has top coefficient s + g*deltaTop/epsilon, so the
/// witness destabilizes iff epsilon < deltaTop*g/(-s) when s < 0, and at all
/// epsilon when s >= 0.
pub fn sigma0_witness_epsilon_star(
    c: &FormalComplex,
    family: &EpsilonFamily,
    witness: &SubcomplexInvariants,
) -> Result<WitnessThreshold, Error> {
    family.check()?;
    witness.check_contained_in(c)?;
    if witness.equals_whole(c) {
        return Ok(WitnessThreshold::NotDestabilizing);
    }
    let g = c.whole_subcomplex().eta_average(&family.eta)?
        - witness.eta_average(&family.eta)?;
    if !g.is_positive() {
        return Ok(WitnessThreshold::NotDestabilizing);
    }
    if c.dim_x == 0 {
        return Ok(WitnessThreshold::AllEpsilon);
    }
    let plain = |sub: &SubcomplexInvariants| -> Result<Poly, Error> {
        let mut num = Poly::zero();
        let mut den = Rational::zero();
        for (_, r, p) in sub.parts() {
            num = &num + p;
            den = den + Rational::from_int(r as i64);
        }
        Ok(num.scale(&den.recip()?))
    };
    let diff = &plain(witness)? - &plain(&c.whole_subcomplex())?;
    let s = diff.coeff(c.dim_x as usize - 1);
    if s.is_negative() {
        let delta_top = family.delta.coeff(c.dim_x as usize - 1);
        Ok(WitnessThreshold::Below {
            bound: delta_top * g / (-s),
        })
    } else {
        Ok(WitnessThreshold::AllEpsilon)
    }
}
