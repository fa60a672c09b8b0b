//! One builder per subcommand: parse and validate the input files, run the
//! library, shape the payload, pick the exit code. Exit 1 is reserved for
//! definite negative outcomes (destabilized, epsilon at or beyond the
//! threshold, a sweep with discrepancies); everything unexpected is exit 2.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use hnstrat_core::beta::certify_membership;
use hnstrat_core::beta::StratumCertificate;
use hnstrat_core::complex::{BlockLabel, FormalComplex, HNFiltration};
use hnstrat_core::hm::{hm_weight, linearization_data, OneParameterSubgroup};
use hnstrat_core::hn::{
    epsilon_threshold, refined_hn_filtration, sigma0_hn_filtration, structural_test_family,
    EpsilonBound,
};
use hnstrat_core::oracle::{
    cross_validate, enumerate_assignments, enumerate_complexes, random_complex, FiniteComplex,
    OracleRng, DEFAULT_BUDGET,
};
use hnstrat_core::rational::Rational;
use hnstrat_core::stability::{is_semistable, normalize_eta, EpsilonFamily, ParameterInput};
use hnstrat_core::Error;

use crate::report;
use crate::{Cli, Command};

pub fn run(cli: Cli) -> anyhow::Result<u8> {
    let built = match &cli.command {
        Command::CheckSs { complex, params, epsilon } => {
            cmd_check_ss(complex, params, epsilon.as_deref())?
        }
        Command::Hn { complex, params, epsilon, force_sigma0 } => {
            cmd_hn(complex, params.as_deref(), epsilon.as_deref(), *force_sigma0)?
        }
        Command::Epsilon0 { complex, params, epsilon } => {
            cmd_epsilon0(complex, params, epsilon.as_deref())?
        }
        Command::Beta { complex, params, n, epsilon } => {
            cmd_beta(complex, params, *n, epsilon.as_deref())?
        }
        Command::Mu { complex, one_ps, params, n, epsilon } => {
            cmd_mu(complex, one_ps, params, *n, epsilon.as_deref())?
        }
        Command::Linearize { complex, params, n } => cmd_linearize(complex, params, *n)?,
        Command::Oracle { sweep, budget } => cmd_oracle(sweep, *budget)?,
    };
    let report = report::build(built.0, built.1, built.2);
    report::emit(&report, cli.out.as_deref(), cli.format)?;
    Ok(built.3)
}

type Built = (&'static str, Value, Value, u8);

fn read_json<T: DeserializeOwned>(path: &Path, what: &str) -> anyhow::Result<T> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {what} file {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {what} file {}", path.display()))
}

fn read_complex(path: &Path) -> anyhow::Result<FormalComplex> {
    let c: FormalComplex = read_json(path, "complex")?;
    let report = c.validate();
    if !report.is_valid() {
        bail!(
            "complex file {} is invalid: {}",
            path.display(),
            report.violations.join("; ")
        );
    }
    Ok(c)
}

fn apply_epsilon(
    pin: ParameterInput,
    epsilon: Option<&str>,
    path: &Path,
) -> anyhow::Result<ParameterInput> {
    let Some(text) = epsilon else {
        return Ok(pin);
    };
    let eps: Rational = text
        .parse()
        .map_err(|e: Error| anyhow!("--epsilon {text:?}: {e}"))?;
    match pin {
        ParameterInput::Family(f) => Ok(ParameterInput::Family(f.with_epsilon(eps))),
        ParameterInput::Raw(_) => bail!(
            "--epsilon applies only to the family form; {} is an explicit triple",
            path.display()
        ),
    }
}

fn read_params(path: &Path, epsilon: Option<&str>) -> anyhow::Result<ParameterInput> {
    apply_epsilon(read_json(path, "params")?, epsilon, path)
}

fn family_required(pin: &ParameterInput, path: &Path) -> anyhow::Result<EpsilonFamily> {
    pin.family().cloned().ok_or_else(|| {
        anyhow!(
            "{} must use the family form (with an `epsilon` field) for this command",
            path.display()
        )
    })
}

fn val<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("library types serialize")
}

fn bound_json(b: &EpsilonBound) -> Value {
    match b {
        EpsilonBound::Finite { value } => val(value),
        EpsilonBound::Unbounded => Value::String("unbounded".into()),
    }
}

/// Steps paired with their quotients, one object per filtration step.
fn filtration_json(f: &HNFiltration) -> Value {
    let rows: Vec<Value> = f
        .steps
        .iter()
        .zip(&f.quotients)
        .map(|(step, q)| json!({ "object": step, "quotient": q }))
        .collect();
    Value::Array(rows)
}

fn cmd_check_ss(complex: &Path, params: &Path, epsilon: Option<&str>) -> anyhow::Result<Built> {
    let c = read_complex(complex)?;
    let pin = read_params(params, epsilon)?;
    let tests = structural_test_family(&c)?;
    let verdict = is_semistable(&c, &pin.to_parameters()?, &tests)?;
    let code = u8::from(!verdict.is_semistable());
    let input = json!({ "complex": c, "params": pin });
    Ok(("check-ss", input, val(&verdict), code))
}

fn cmd_hn(
    complex: &Path,
    params: Option<&Path>,
    epsilon: Option<&str>,
    force_sigma0: bool,
) -> anyhow::Result<Built> {
    let c = read_complex(complex)?;
    let sigma0 = filtration_json(&sigma0_hn_filtration(&c)?);

    if force_sigma0 {
        let mut input = json!({ "complex": c, "forceSigma0": true });
        let mut payload = json!({ "sigma0_filtration": sigma0 });
        if let Some(path) = params {
            let pin = read_params(path, epsilon)?;
            let family = family_required(&pin, path)?;
            let thr = epsilon_threshold(&c, &family)?;
            payload
                .as_object_mut()
                .unwrap()
                .insert("epsilon0".into(), bound_json(&thr.epsilon0));
            input.as_object_mut().unwrap().insert("params".into(), val(&pin));
        }
        return Ok(("hn", input, payload, 0));
    }

    let Some(path) = params else {
        bail!("hn requires --params unless --force-sigma0 is given");
    };
    let pin = read_params(path, epsilon)?;
    let family = family_required(&pin, path)?;
    let thr = epsilon_threshold(&c, &family)?;
    let input = json!({ "complex": c, "params": pin });
    match refined_hn_filtration(&c, &family) {
        Ok(refined) => {
            let payload = json!({
                "sigma0_filtration": sigma0,
                "epsilon0": bound_json(&thr.epsilon0),
                "refined": { "steps": filtration_json(&refined.filtration), "type": refined.tau.entries },
                "chain": refined.chain,
                "cone_identification_assumed": true,
            });
            Ok(("hn", input, payload, 0))
        }
        Err(Error::EpsilonTooLarge { bound }) => {
            eprintln!("epsilon >= bound {bound}");
            let payload = json!({
                "sigma0_filtration": sigma0,
                "epsilon0": bound_json(&thr.epsilon0),
                "error": {
                    "kind": "epsilonTooLarge",
                    "bound": bound,
                    "message": format!("epsilon >= bound {bound}"),
                },
            });
            Ok(("hn", input, payload, 1))
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_epsilon0(complex: &Path, params: &Path, epsilon: Option<&str>) -> anyhow::Result<Built> {
    let c = read_complex(complex)?;
    let pin = read_params(params, epsilon)?;
    let family = family_required(&pin, params)?;
    let thr = epsilon_threshold(&c, &family)?;
    let input = json!({ "complex": c, "params": pin });
    let payload = json!({
        "epsilon0": bound_json(&thr.epsilon0),
        "constraints": thr.constraints,
    });
    Ok(("epsilon0", input, payload, 0))
}

fn cmd_beta(complex: &Path, params: &Path, n: u64, epsilon: Option<&str>) -> anyhow::Result<Built> {
    let c = read_complex(complex)?;
    let pin = read_params(params, epsilon)?;
    let family = family_required(&pin, params)?;
    let input = json!({ "complex": c, "params": pin, "n": n });
    match certify_membership(&c, &family, n) {
        Ok(cert) => Ok(("beta", input, beta_payload(&cert, &c), 0)),
        Err(Error::EpsilonTooLarge { bound }) => {
            eprintln!("epsilon >= bound {bound}");
            let payload = json!({
                "error": {
                    "kind": "epsilonTooLarge",
                    "bound": bound,
                    "message": format!("epsilon >= bound {bound}"),
                },
            });
            Ok(("beta", input, payload, 1))
        }
        Err(e) => Err(e.into()),
    }
}

/// Certificate JSON: the index weights split into the cohomology (`a`) and
/// cone (`b`) slots, the diagonal entries with multiplicities, and the
/// recomputed consistency verdicts.
fn beta_payload(cert: &StratumCertificate, c: &FormalComplex) -> Value {
    let mut a = serde_json::Map::new();
    let mut b = serde_json::Map::new();
    let mut rows = Vec::new();
    let mut balance = Rational::zero();
    for e in &cert.index.entries {
        let mult = e.dimension * e.copies();
        match e.label {
            BlockLabel::H { .. } => a.insert(e.label.to_string(), val(&e.weight)),
            BlockLabel::I { .. } => b.insert(e.label.to_string(), val(&e.weight)),
        };
        rows.push(json!({ "label": e.label, "weight": e.weight, "multiplicity": mult }));
        balance = balance + &e.weight * &Rational::from_int(mult as i64);
    }
    let weight_identity = if cert.trivial {
        "trivial"
    } else if !cert.ordering_ok {
        "skipped"
    } else {
        let expected = Rational::zero() - &cert.norm_squared;
        match &cert.mu_lambda {
            Some(mu) if *mu == expected => "verified",
            _ => "failed",
        }
    };
    let graded: Vec<Value> = c
        .positions()
        .map(|i| {
            let blocks: Vec<String> = cert
                .tau
                .entries
                .iter()
                .filter(|e| e.label.support().contains(&i))
                .map(|e| e.label.to_string())
                .collect();
            json!({ "position": i, "blocks": blocks })
        })
        .collect();

    let mut payload = json!({
        "tau": cert.tau.entries,
        "n": cert.index.n,
        "epsilon": cert.epsilon,
        "a": a,
        "b": b,
        "beta": rows,
        "normSquared": cert.norm_squared,
        "sumZero": balance.is_zero(),
        "ordering": if cert.ordering_ok { "ok" } else { "violated" },
        "weightIdentity": weight_identity,
        "gradedPieces": graded,
        "chiExponents": cert.chi_exponents,
    });
    let obj = payload.as_object_mut().unwrap();
    if let Some(l) = &cert.lambda {
        obj.insert("lambda".into(), val(l));
    }
    if let Some(l) = &cert.lambda_integer {
        obj.insert("lambdaInteger".into(), val(l));
    }
    if let Some(s) = &cert.scale {
        obj.insert("scale".into(), val(s));
    }
    if let Some(m) = &cert.mu_lambda {
        obj.insert("mu".into(), val(m));
    }
    if let Some(h) = &cert.insufficient_n {
        obj.insert("insufficientN".into(), Value::String(h.clone()));
    }
    payload
}

fn cmd_mu(
    complex: &Path,
    one_ps: &Path,
    params: &Path,
    n: u64,
    epsilon: Option<&str>,
) -> anyhow::Result<Built> {
    let c = read_complex(complex)?;
    let lambda: OneParameterSubgroup = read_json(one_ps, "one-parameter subgroup")?;
    let pin = read_params(params, epsilon)?;
    // The weight formula reads eta as given; center it first so family and
    // raw inputs mean the same thing they do in the certificates.
    let centered = normalize_eta(&pin.to_parameters()?, &c.ranks())?;
    let rep = hm_weight(&c, &centered, n, &lambda)?;
    let mut payload = val(&rep);
    payload
        .as_object_mut()
        .unwrap()
        .insert("etaUsed".into(), val(&centered.eta));
    let input = json!({ "complex": c, "params": pin, "onePs": lambda, "n": n });
    Ok(("mu", input, payload, 0))
}

fn cmd_linearize(complex: &Path, params: &Path, n: u64) -> anyhow::Result<Built> {
    let c = read_complex(complex)?;
    let pin = read_params(params, None)?;
    let lin = linearization_data(&c, &pin.to_parameters()?, n)?;
    let input = json!({ "complex": c, "params": pin, "n": n });
    Ok(("linearize", input, val(&lin), 0))
}

/// A sweep: exhaustive enumeration up to the given span and dimension, plus
/// optional seeded random shapes, every complex cross-checked between the
/// structural routines and the brute-force search. `onePs` additionally runs
/// every weight assignment with values in {-1, 0, 1} through both readings
/// of the limit bookkeeping (skipped when 3^dim explodes past 2187).
#[derive(Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct SweepSpec {
    p: u64,
    max_span: usize,
    max_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eta: Option<BTreeMap<i64, Rational>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    budget: Option<u128>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    one_ps: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    random: Vec<RandomSweep>,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct RandomSweep {
    count: u64,
    dims: Vec<usize>,
    seed: u64,
}

const ONE_PS_CAP: usize = 2187;

fn cmd_oracle(sweep: &Path, budget_flag: Option<u128>) -> anyhow::Result<Built> {
    let spec: SweepSpec = read_json(sweep, "sweep")?;
    let env_budget = std::env::var("HNSTRAT_BUDGET")
        .ok()
        .map(|s| {
            s.parse::<u128>()
                .map_err(|_| anyhow!("HNSTRAT_BUDGET must be an integer, got {s:?}"))
        })
        .transpose()?;
    let budget = budget_flag
        .or(spec.budget)
        .or(env_budget)
        .unwrap_or(DEFAULT_BUDGET);

    let mut rows = Vec::new();
    let mut discrepancies = Vec::new();
    let mut complexes = 0u64;
    let mut assignments = 0u64;

    let mut handle = |c: &FiniteComplex| -> anyhow::Result<()> {
        complexes += 1;
        let eta = sweep_eta(&spec, c)?;
        let tag = serde_json::to_string(c).expect("complex serializes");
        let issues = cross_validate(c, &eta, budget)?;
        let brute = c.brute_report(&eta, budget)?;
        let mut one_ps_runs = 0u64;
        if spec.one_ps {
            if c.total_dim() <= 7 && 3usize.pow(c.total_dim() as u32) <= ONE_PS_CAP {
                for assignment in enumerate_assignments(c, &[-1, 0, 1]) {
                    let ex = c.one_ps_experiment(&assignment)?;
                    one_ps_runs += 1;
                    if ex.compatible_by_containment != ex.compatible_by_entries {
                        discrepancies.push(format!(
                            "{tag} {assignment:?}: compatibility disagrees between readings"
                        ));
                    }
                    if ex.crossing_by_scan != ex.crossing_by_entries {
                        discrepancies.push(format!(
                            "{tag} {assignment:?}: crossing disagrees between readings"
                        ));
                    }
                    if ex.compatible_by_entries && !ex.limit_is_complex {
                        discrepancies.push(format!(
                            "{tag} {assignment:?}: compatible limit fails to square to zero"
                        ));
                    }
                    if c.span() <= 2 && !ex.limit_is_complex {
                        discrepancies.push(format!(
                            "{tag} {assignment:?}: no compositions, yet limit flagged"
                        ));
                    }
                }
            }
        }
        assignments += one_ps_runs;
        for issue in &issues {
            discrepancies.push(format!("{tag}: {issue}"));
        }
        rows.push(json!({
            "complex": c,
            "verdict": brute.verdict,
            "minimumAverage": brute.minimum_average,
            "maxDestabilizer": brute.max_destabilizer,
            "subcomplexes": brute.subcomplex_count,
            "assignments": one_ps_runs,
            "issues": issues,
        }));
        Ok(())
    };

    for span in 1..=spec.max_span {
        for c in enumerate_complexes(spec.p, span, spec.max_dim) {
            handle(&c)?;
        }
    }
    for rs in &spec.random {
        let mut rng = OracleRng(rs.seed);
        for _ in 0..rs.count {
            let c = random_complex(spec.p, &rs.dims, &mut rng);
            handle(&c)?;
        }
    }

    let code = u8::from(!discrepancies.is_empty());
    let payload = json!({
        "complexesChecked": complexes,
        "assignmentsChecked": assignments,
        "budget": budget.to_string(),
        "discrepancies": discrepancies,
        "perComplex": rows,
    });
    Ok(("oracle", val(&spec), payload, code))
}

fn sweep_eta(spec: &SweepSpec, c: &FiniteComplex) -> anyhow::Result<BTreeMap<i64, Rational>> {
    let Some(eta) = &spec.eta else {
        return Ok(c.positions().map(|i| (i, Rational::from_int(i))).collect());
    };
    c.positions()
        .map(|i| {
            eta.get(&i)
                .cloned()
                .map(|e| (i, e))
                .ok_or_else(|| anyhow!("sweep eta does not cover position {i}"))
        })
        .collect()
}
