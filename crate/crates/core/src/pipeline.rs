//! The end-to-end analysis: validate, spectral data, lift, classification,
//! Markov structure and verification, collected into one JSON bundle. A
//! failing stage is recorded in `errors` and only its dependents are skipped.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::Config;
use crate::decay::{certify_decay, DecayNorm};
use crate::diagnostics::{classify, fixed_point_audit, monotonicity_audit};
use crate::error::{Error, Result};
use crate::io::ChannelDocument;
use crate::lift::{
    lift_from_peripheral, poisson_boundary, verify_asymptotic_equalities, wedderburn, AsymptoticLift,
};
use crate::markov::{analyze_structure, build_markov_lift, decay_certificate, peripheral_spectrum_check};
use crate::operator::{matrix_to_rows, CMat};
use crate::sampling::rng_from_seed;
use crate::spectral::{eigendecompose, kuperberg_iter, peripheral, power_limit_check, PeripheralDecomposition};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Matrix levels checked by the verification stage.
pub const DEFAULT_LEVELS: [usize; 2] = [1, 2];
/// Powers of `S` compared with `Q` along the return-time sequence.
const POWER_LIMIT_POINTS: usize = 8;
/// Iterates used by the monotonicity audit.
const MONOTONICITY_STEPS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageError {
    pub stage: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisBundle {
    pub tool_version: String,
    pub config: Config,
    pub input: Value,
    pub validation: Option<Value>,
    pub spectral: Option<Value>,
    pub lift: Option<Value>,
    pub classification: Option<Value>,
    pub markov: Option<Value>,
    pub verification: Option<Value>,
    pub errors: Vec<StageError>,
}

impl AnalysisBundle {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle values are JSON")
    }
}

struct Stages {
    errors: Vec<StageError>,
}

impl Stages {
    fn run<T>(&mut self, stage: &str, f: impl FnOnce() -> Result<T>) -> Option<T> {
        match f() {
            Ok(v) => Some(v),
            Err(e) => {
                self.errors.push(StageError { stage: stage.to_string(), message: e.to_string() });
                None
            }
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn complex_list(values: &[crate::operator::C64]) -> Value {
    json!(values.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())
}

/// Runs every stage on one parsed document.
pub fn run_pipeline(doc: &ChannelDocument, cfg: &Config) -> AnalysisBundle {
    let mut stages = Stages { errors: Vec::new() };
    let mut bundle = AnalysisBundle {
        tool_version: TOOL_VERSION.to_string(),
        config: cfg.clone(),
        input: json!({ "kind": doc.kind, "dim": doc.dim }),
        validation: None,
        spectral: None,
        lift: None,
        classification: None,
        markov: None,
        verification: None,
        errors: Vec::new(),
    };
    if let Err(e) = cfg.validate() {
        stages.errors.push(StageError { stage: "config".into(), message: e.to_string() });
        bundle.errors = stages.errors;
        return bundle;
    }
    let Some(input) = stages.run("parse", || doc.to_input(cfg)) else {
        bundle.errors = stages.errors;
        return bundle;
    };
    let ch = &input.channel;
    bundle.input = json!({ "kind": input.kind, "dim": ch.dim(), "system": ch.system() });

    let report = ch.validate(cfg);
    bundle.validation = Some(to_value(&report));
    let ucp = stages.run("validate", || ch.require_ucp(cfg)).is_some();

    if let Some(p) = &input.stochastic {
        bundle.markov = Some(markov_section(p, cfg, &mut stages));
    }
    if !ucp {
        bundle.errors = stages.errors;
        return bundle;
    }

    let pd = stages.run("spectral", || -> Result<(Value, PeripheralDecomposition)> {
        let spec = eigendecompose(ch.superoperator(), cfg)?;
        let pd = peripheral(&spec, cfg.tol_per)?;
        Ok((spectral_section(ch.superoperator().matrix(), &spec, &pd, cfg), pd))
    });
    let Some((spectral_value, pd)) = pd else {
        bundle.errors = stages.errors;
        return bundle;
    };
    bundle.spectral = Some(spectral_value);

    let Some(lift) = stages.run("lift", || lift_from_peripheral(ch, pd, cfg)) else {
        bundle.errors = stages.errors;
        return bundle;
    };
    let mut rng = rng_from_seed(cfg.seed);
    let wb = wedderburn(&lift.algebra, cfg.tol_alg, &mut rng);
    let mut lift_value = lift_section(&lift);
    lift_value["wedderburn"] = to_value(&wb);
    if let Some(poisson) = stages.run("poisson", || poisson_boundary(ch, &lift, cfg, &mut rng)) {
        lift_value["poisson_boundary"] = to_value(&poisson);
    }
    bundle.lift = Some(lift_value);

    if let Some(cls) = stages.run("classify", || {
        let report = classify(ch, &lift, cfg, &mut rng)?;
        let fixed = fixed_point_audit(ch, &lift, cfg, &mut rng)?;
        Ok(json!({ "report": report, "fixed_point_audit": fixed }))
    }) {
        bundle.classification = Some(cls);
    }

    let mut verification = serde_json::Map::new();
    if let Some(v) = stages.run("verify.asymptotic_equalities", || {
        verify_asymptotic_equalities(ch, &lift, &DEFAULT_LEVELS, cfg, &mut rng)
    }) {
        verification.insert("asymptotic_equalities".into(), to_value(&v));
    }
    if let Some(v) = stages.run("verify.monotonicity", || {
        monotonicity_audit(ch, &DEFAULT_LEVELS, MONOTONICITY_STEPS, cfg, &mut rng)
    }) {
        verification.insert("monotonicity".into(), to_value(&v));
    }
    let complement = ch.superoperator().matrix() * (CMat::identity(lift.peripheral.dim, lift.peripheral.dim) - &lift.peripheral.q);
    let cert = certify_decay(&complement, DecayNorm::Frobenius, lift.peripheral.sub_radius, cfg.n_max);
    verification.insert("decay".into(), to_value(&cert));
    bundle.verification = Some(Value::Object(verification));

    bundle.errors = stages.errors;
    bundle
}

fn spectral_section(
    s: &CMat,
    spec: &crate::spectral::SpectralData,
    pd: &PeripheralDecomposition,
    cfg: &Config,
) -> Value {
    let values = pd.values();
    let seq: Vec<u64> = kuperberg_iter(&values, cfg.kuperberg_epsilon, cfg.kuperberg_max).collect();
    let power_limit = if seq.is_empty() {
        Value::Null
    } else {
        let thinned = thin(&seq, POWER_LIMIT_POINTS);
        power_limit_check(s, pd, &thinned, cfg.tol_idem).map(|r| to_value(&r)).unwrap_or(Value::Null)
    };
    json!({
        "eigenvalues": complex_list(&spec.sorted_eigenvalues()),
        "peripheral_eigenvalues": pd.peripheral_eigenvalues,
        "sub_radius": pd.sub_radius,
        "complement_radius": pd.complement_radius(s),
        "semisimple": pd.semisimple,
        "diagonalizable": pd.diagonalizable,
        "defect_report": spec.defect_report,
        "q_idempotency_residual": pd.idempotency_residual(),
        "q_commutation_residual": pd.commutation_residual(s),
        "biorthogonality_residual": spec.biorthogonality_residual(),
        "reconstruction_residual": (spec.reconstruct() - s).norm(),
        "return_times": {
            "epsilon": cfg.kuperberg_epsilon,
            "searched_up_to": cfg.kuperberg_max,
            "count": seq.len(),
            "first": seq.first(),
            "last": seq.last(),
        },
        "power_limit": power_limit,
    })
}

/// At most `points` entries of `seq`, spread logarithmically and ending with
/// its last element.
fn thin(seq: &[u64], points: usize) -> Vec<u64> {
    if seq.len() <= points {
        return seq.to_vec();
    }
    let len = seq.len() as f64;
    let mut idx: Vec<usize> =
        (0..points).map(|i| (len.powf(i as f64 / (points - 1) as f64)).round() as usize - 1).collect();
    idx.dedup();
    idx.into_iter().map(|i| seq[i]).collect()
}

fn lift_section(lift: &AsymptoticLift) -> Value {
    let m = lift.dim();
    let structure: Vec<[f64; 2]> = lift.algebra.structure_constants().iter().map(|z| [z.re, z.im]).collect();
    json!({
        "dim": m,
        "basis": lift.basis().iter().map(matrix_to_rows).collect::<Vec<_>>(),
        "structure_constants": structure,
        "alpha": matrix_to_rows(&lift.alpha),
        "unit": lift.algebra.unit().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
        "axiom_residuals": lift.algebra.residuals,
        "invariant_residuals": lift.residuals,
    })
}

fn markov_section(p: &crate::stochastic::StochasticMatrix, cfg: &Config, stages: &mut Stages) -> Value {
    let cs = analyze_structure(p);
    let mut out = json!({ "structure": cs, "clamped_entries": p.clamped_entries() });
    if !cs.irreducible {
        return out;
    }
    if let Some(r) = stages.run("markov.peripheral_spectrum", || peripheral_spectrum_check(p, &cs, cfg)) {
        out["peripheral_spectrum"] = to_value(&r);
    }
    if let Some(ml) = stages.run("markov.lift", || build_markov_lift(p, &cs, cfg)) {
        out["lift"] = json!({
            "period": ml.period,
            "indicators": ml.indicators,
            "alpha": matrix_to_rows(&ml.alpha),
            "q": matrix_to_rows(&ml.q),
            "sub_radius": ml.sub_radius,
            "residuals": ml.residuals,
        });
        out["decay"] = to_value(&decay_certificate(p, &ml, cfg.n_max));
    }
    out
}

/// Parses `text` and runs the pipeline; parse failures land in `errors`.
pub fn run_text(text: &str, cfg: &Config) -> AnalysisBundle {
    match ChannelDocument::parse(text) {
        Ok(doc) => run_pipeline(&doc, cfg),
        Err(e) => AnalysisBundle {
            tool_version: TOOL_VERSION.to_string(),
            config: cfg.clone(),
            input: Value::Null,
            validation: None,
            spectral: None,
            lift: None,
            classification: None,
            markov: None,
            verification: None,
            errors: vec![StageError { stage: "parse".into(), message: e.to_string() }],
        },
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Drift {
    pub file: String,
    /// JSON pointer of the differing field.
    pub path: String,
    pub expected: Value,
    pub actual: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct GoldenSummary {
    pub checked: usize,
    pub passed: usize,
    pub blessed: usize,
    pub missing_expected: Vec<String>,
    pub drifts: Vec<Drift>,
}

impl GoldenSummary {
    pub fn ok(&self) -> bool {
        self.drifts.is_empty() && self.missing_expected.is_empty()
    }
}

/// Fields that legitimately change between releases.
const IGNORED_KEYS: [&str; 1] = ["tool_version"];

/// Runs every `NAME.json` input in `dir` and compares the bundle with
/// `NAME.expected.json`, numbers within `cfg.tol_alg` (relative above one).
/// With `bless`, missing or drifting expectations are rewritten instead.
pub fn golden_suite(dir: &Path, cfg: &Config, bless: bool) -> Result<GoldenSummary> {
    let mut inputs: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            name.ends_with(".json") && !name.ends_with(".expected.json") && !name.ends_with(".config.json")
        })
        .collect();
    inputs.sort();
    let mut summary = GoldenSummary { checked: 0, passed: 0, blessed: 0, missing_expected: Vec::new(), drifts: Vec::new() };
    for input in inputs {
        let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        let file_cfg = match std::fs::read_to_string(dir.join(format!("{stem}.config.json"))) {
            Ok(text) => serde_json::from_str(&text)?,
            Err(_) => cfg.clone(),
        };
        let bundle = run_text(&std::fs::read_to_string(&input)?, &file_cfg);
        let actual = serde_json::to_value(&bundle)?;
        let expected_path = dir.join(format!("{stem}.expected.json"));
        summary.checked += 1;
        let expected: Option<Value> = match std::fs::read_to_string(&expected_path) {
            Ok(text) => Some(serde_json::from_str(&text)?),
            Err(_) => None,
        };
        let drifts = match &expected {
            Some(exp) => {
                let mut out = Vec::new();
                compare(exp, &actual, "", cfg.tol_alg, &stem, &mut out);
                out
            }
            None => Vec::new(),
        };
        if bless && (expected.is_none() || !drifts.is_empty()) {
            std::fs::write(&expected_path, bundle.to_json() + "\n")?;
            summary.blessed += 1;
            summary.passed += 1;
            continue;
        }
        if expected.is_none() {
            summary.missing_expected.push(stem);
        } else if drifts.is_empty() {
            summary.passed += 1;
        } else {
            summary.drifts.extend(drifts);
        }
    }
    Ok(summary)
}

fn compare(expected: &Value, actual: &Value, path: &str, tol: f64, file: &str, out: &mut Vec<Drift>) {
    let drift = |out: &mut Vec<Drift>| {
        out.push(Drift { file: file.into(), path: path.into(), expected: expected.clone(), actual: actual.clone() })
    };
    match (expected, actual) {
        (Value::Number(a), Value::Number(b)) => {
            let (a, b) = (a.as_f64().unwrap_or(f64::NAN), b.as_f64().unwrap_or(f64::NAN));
            // NaN never compares close, so it always drifts.
            let close = (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0);
            if !close {
                drift(out);
            }
        }
        (Value::Object(a), Value::Object(b)) => {
            let keys: BTreeMap<&String, ()> = a.keys().chain(b.keys()).map(|k| (k, ())).collect();
            for key in keys.keys() {
                if IGNORED_KEYS.contains(&key.as_str()) {
                    continue;
                }
                let sub = format!("{path}/{key}");
                match (a.get(*key), b.get(*key)) {
                    (Some(x), Some(y)) => compare(x, y, &sub, tol, file, out),
                    (x, y) => out.push(Drift {
                        file: file.into(),
                        path: sub,
                        expected: x.cloned().unwrap_or(Value::Null),
                        actual: y.cloned().unwrap_or(Value::Null),
                    }),
                }
            }
        }
        (Value::Array(a), Value::Array(b)) => {
            if a.len() != b.len() {
                drift(out);
                return;
            }
            for (i, (x, y)) in a.iter().zip(b).enumerate() {
                compare(x, y, &format!("{path}/{i}"), tol, file, out);
            }
        }
        (a, b) if a == b => {}
        _ => drift(out),
    }
}

/// Convenience for callers holding a path.
pub fn run_file(path: &Path, cfg: &Config) -> Result<AnalysisBundle> {
    let text = std::fs::read_to_string(path).map_err(Error::Io)?;
    Ok(run_text(&text, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{ad_z, cycle, lazy_chain};

    fn cfg() -> Config {
        Config { samples: 6, k_max: 40, kuperberg_max: 10_000, n_max: 60, ..Config::default() }
    }

    #[test]
    fn bundle_for_ad_z_is_complete() {
        let cfg = cfg();
        let doc = ChannelDocument::from_kraus(ad_z(&cfg).kraus().unwrap().operators());
        let bundle = run_pipeline(&doc, &cfg);
        assert!(bundle.errors.is_empty(), "{:?}", bundle.errors);
        assert_eq!(bundle.lift.as_ref().unwrap()["dim"], 4);
        assert_eq!(bundle.lift.as_ref().unwrap()["wedderburn"]["blocks"], json!([2]));
        assert_eq!(bundle.classification.as_ref().unwrap()["report"]["verdict"], "not_slowly_oscillating");
        assert!(bundle.spectral.as_ref().unwrap()["power_limit"]["pass"].as_bool().unwrap());
        assert!(bundle.verification.as_ref().unwrap()["asymptotic_equalities"]["pass"].as_bool().unwrap());
    }

    #[test]
    fn bundle_round_trips_bit_exactly() {
        let cfg = cfg();
        let doc = ChannelDocument::from_stochastic(&lazy_chain());
        let bundle = run_pipeline(&doc, &cfg);
        let text = bundle.to_json();
        let back: AnalysisBundle = serde_json::from_str(&text).unwrap();
        assert_eq!(back, bundle);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn stochastic_input_gets_markov_section() {
        let cfg = cfg();
        let bundle = run_pipeline(&ChannelDocument::from_stochastic(&cycle(3)), &cfg);
        assert!(bundle.errors.is_empty(), "{:?}", bundle.errors);
        let markov = bundle.markov.unwrap();
        assert_eq!(markov["lift"]["period"], 3);
    }

    #[test]
    fn non_ucp_input_stops_after_validation() {
        let cfg = cfg();
        let text = r#"{"kind": "kraus", "data": [[[2, 0], [0, 1]]]}"#;
        let bundle = run_text(text, &cfg);
        assert!(bundle.validation.is_some());
        assert!(bundle.spectral.is_none());
        assert_eq!(bundle.errors[0].stage, "validate");
    }

    #[test]
    fn resource_guard_only_fails_verification() {
        let cfg = Config { dim_ceiling: 8, ..cfg() };
        let bundle = run_pipeline(&ChannelDocument::from_kraus(ad_z(&cfg).kraus().unwrap().operators()), &cfg);
        assert!(bundle.lift.is_some() && bundle.classification.is_some());
        assert!(bundle.errors.iter().all(|e| e.stage.starts_with("verify.")));
        assert!(!bundle.errors.is_empty());
    }

    #[test]
    fn thinning_keeps_endpoints() {
        let seq: Vec<u64> = (1..=1000).collect();
        let t = thin(&seq, 8);
        assert_eq!(t.first(), Some(&1));
        assert_eq!(t.last(), Some(&1000));
        assert!(t.len() <= 8);
    }

    #[test]
    fn golden_compare_tolerates_small_float_noise() {
        let mut out = Vec::new();
        compare(&json!({"a": 1.0, "tool_version": "x"}), &json!({"a": 1.0 + 1e-12, "tool_version": "y"}), "", 1e-8, "f", &mut out);
        assert!(out.is_empty());
        compare(&json!({"a": [1.0]}), &json!({"a": [1.1]}), "", 1e-8, "f", &mut out);
        assert_eq!(out[0].path, "/a/0");
    }
}
