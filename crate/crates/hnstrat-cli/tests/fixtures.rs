//! The fixture files are stored in canonical serialized form: parsing one
//! and serializing it again must reproduce the file byte for byte. The
//! ignored test rewrites them all; run it after a deliberate schema change:
//!
//!   cargo test -p hnstrat-cli --test fixtures -- --ignored regenerate

use std::fs;
use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

use hnstrat_core::complex::{FormalComplex, FormalSheaf};
use hnstrat_core::hm::OneParameterSubgroup;
use hnstrat_core::poly::Poly;
use hnstrat_core::rational::Rational;
use hnstrat_core::stability::{EpsilonFamily, ParameterInput, StabilityParameters};

fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n, d).unwrap()
}

fn sheaf(rank: u64, c1: i64, c0: i64) -> FormalSheaf {
    FormalSheaf::new(rank, Poly::linear(c1, c0))
}

pub fn c1_complex() -> FormalComplex {
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

pub fn setup_a_family() -> ParameterInput {
    ParameterInput::Family(EpsilonFamily {
        eta: [(0, Rational::zero()), (1, Rational::one())].into(),
        delta: Poly::constant(Rational::one()),
        epsilon: rat(1, 10),
    })
}

pub fn raw_params() -> ParameterInput {
    ParameterInput::Raw(StabilityParameters {
        sigma: [(0, 1), (1, 1)].into(),
        eta: [(0, Rational::zero()), (1, Rational::one())].into(),
        delta: Poly::constant(Rational::one()),
    })
}

pub fn semistable_complex() -> FormalComplex {
    let s = sheaf(2, 2, 2);
    FormalComplex::from_sheaf(s.clone(), 0, 1, Rational::one(), Some(vec![s]))
}

pub fn cone_complex() -> FormalComplex {
    FormalComplex::cone_of_identity(sheaf(1, 1, 1), 0, 1, Rational::one())
}

pub fn kernel_one_ps() -> OneParameterSubgroup {
    OneParameterSubgroup {
        weights: vec![Rational::from_int(34), Rational::from_int(-11)],
        blocks: [(0, vec![11, 11]), (1, vec![0, 23])].into(),
        quotient_ranks: Some([(0, vec![1, 1]), (1, vec![0, 2])].into()),
        compatible: Some(true),
        crossing: None,
    }
}

pub fn sweep_f2() -> serde_json::Value {
    json!({
        "p": 2,
        "maxSpan": 2,
        "maxDim": 2,
        "onePs": true,
    })
}

pub fn sweep_sampled() -> serde_json::Value {
    json!({
        "p": 2,
        "maxSpan": 1,
        "maxDim": 1,
        "random": [
            { "count": 15, "dims": [2, 3, 2], "seed": 11 },
            { "count": 15, "dims": [3, 3, 3], "seed": 12 },
            { "count": 10, "dims": [3, 2, 3], "seed": 13 },
        ],
    })
}

fn canonical<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).unwrap();
    text.push('\n');
    text
}

fn check_fixture<T: Serialize + DeserializeOwned>(name: &str) {
    let path = fixtures_dir().join(name);
    let text = fs::read_to_string(&path).unwrap_or_else(|e| panic!("reading {name}: {e}"));
    let value: T = serde_json::from_str(&text).unwrap_or_else(|e| panic!("parsing {name}: {e}"));
    assert_eq!(canonical(&value), text, "{name} is not in canonical form");
}

#[test]
fn fixtures_parse_and_reserialize_byte_identically() {
    check_fixture::<FormalComplex>("c1_complex.json");
    check_fixture::<FormalComplex>("semistable_complex.json");
    check_fixture::<FormalComplex>("cone_complex.json");
    check_fixture::<ParameterInput>("setup_a_family.json");
    check_fixture::<ParameterInput>("raw_params.json");
    check_fixture::<OneParameterSubgroup>("kernel_1ps.json");
    check_fixture::<serde_json::Value>("sweep_f2.json");
    check_fixture::<serde_json::Value>("sweep_sampled.json");
}

#[test]
fn malformed_fixture_does_not_parse() {
    let text = fs::read_to_string(fixtures_dir().join("malformed.json")).unwrap();
    assert!(serde_json::from_str::<serde_json::Value>(&text).is_err());
}

#[test]
#[ignore = "rewrites the fixture files in canonical form"]
fn regenerate() {
    let dir = fixtures_dir();
    fs::create_dir_all(&dir).unwrap();
    fs::write(dir.join("c1_complex.json"), canonical(&c1_complex())).unwrap();
    fs::write(dir.join("semistable_complex.json"), canonical(&semistable_complex())).unwrap();
    fs::write(dir.join("cone_complex.json"), canonical(&cone_complex())).unwrap();
    fs::write(dir.join("setup_a_family.json"), canonical(&setup_a_family())).unwrap();
    fs::write(dir.join("raw_params.json"), canonical(&raw_params())).unwrap();
    fs::write(dir.join("kernel_1ps.json"), canonical(&kernel_one_ps())).unwrap();
    fs::write(dir.join("sweep_f2.json"), canonical(&sweep_f2())).unwrap();
    fs::write(dir.join("sweep_sampled.json"), canonical(&sweep_sampled())).unwrap();
    fs::write(dir.join("malformed.json"), "{ \"complex\": [unbalanced\n").unwrap();
}
