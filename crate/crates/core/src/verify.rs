//! Batch comparison of the three index computations on seeded random
//! return maps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chebyshev::{default_validation_tol, iterate_blocks};
use crate::darwin::{nondegeneracy_check, random_return_map, ReturnMapBlocks};
use crate::error::Result;
use crate::half_integer::HalfInteger;
use crate::hormander::{hormander_index_formula, IndexResult, hormander_index_quadratic_form, Method, DEFAULT_TOL};
use crate::maslov::{mix_seed, path_difference_iterate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub n: usize,
    pub trials: usize,
    pub k_max: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    /// Spread of the random generator (see [`random_return_map`]).
    pub scale: f64,
    pub tol: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            n: 2,
            trials: 100,
            k_max: 6,
            seed: 0,
            methods: vec![Method::Formula, Method::QuadraticForm, Method::PathDifference],
            scale: 1.0,
            tol: DEFAULT_TOL,
        }
    }
}

/// One method's outcome on one `(instance, k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodValue {
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub s: Option<HalfInteger>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Disagreement {
    pub trial: usize,
    pub seed: u64,
    pub k: usize,
    pub blocks: ReturnMapBlocksDoc,
    pub values: Vec<MethodValue>,
}

/// Blocks as nested rows, for reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnMapBlocksDoc {
    pub n: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    pub c: Vec<Vec<f64>>,
    #[serde(rename = "D")]
    pub d: Vec<Vec<f64>>,
}

impl From<&ReturnMapBlocks> for ReturnMapBlocksDoc {
    fn from(b: &ReturnMapBlocks) -> Self {
        let rows = |m: &crate::linalg::Matrix| m.row_iter().map(|r| r.iter().copied().collect()).collect();
        ReturnMapBlocksDoc { n: b.n(), a: rows(&b.a), b: rows(&b.b), c: rows(&b.c), d: rows(&b.d) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub v: u32,
    pub n: usize,
    pub seed: u64,
    pub tol: f64,
    pub k_max: usize,
    pub methods: Vec<Method>,
    pub trials: usize,
    /// Nondegenerate `(instance, k)` pairs compared.
    pub comparisons: usize,
    pub agreements: usize,
    /// `(instance, k)` pairs skipped because `det(Φᵏ − I)` is below threshold.
    pub skipped_degenerate: usize,
    pub disagreements: Vec<Disagreement>,
}

impl VerifyReport {
    pub fn all_agree(&self) -> bool {
        self.disagreements.is_empty()
    }
}

/// Index of `Φᵏ` by one method. The path method gets its own derived seed.
pub fn index_of_iterate(
    blocks: &ReturnMapBlocks,
    k: usize,
    method: Method,
    tol: f64,
    seed: u64,
) -> Result<IndexResult> {
    match method {
        Method::Formula => hormander_index_formula(blocks, k, tol),
        Method::QuadraticForm => {
            let phi_k = iterate_blocks(blocks, k, default_validation_tol(blocks))?.assemble();
            hormander_index_quadratic_form(&phi_k, tol).map(|r| IndexResult { k, ..r })
        }
        // Along a path through the iterates Φʲ; Φᵏ itself is never formed.
        Method::PathDifference => path_difference_iterate(&blocks.assemble(), k, mix_seed(seed, k as u64)),
    }
}

pub fn evaluate(blocks: &ReturnMapBlocks, k: usize, method: Method, tol: f64, seed: u64) -> Result<HalfInteger> {
    index_of_iterate(blocks, k, method, tol, seed).map(|r| r.s)
}

struct TrialResult {
    comparisons: usize,
    agreements: usize,
    skipped: usize,
    disagreements: Vec<Disagreement>,
}

fn run_trial(cfg: &VerifyConfig, trial: usize) -> TrialResult {
    let seed = mix_seed(cfg.seed, trial as u64);
    let blocks = random_return_map(cfg.n, seed, cfg.scale);
    let report = nondegeneracy_check(&blocks, cfg.k_max, None);
    let mut out = TrialResult { comparisons: 0, agreements: 0, skipped: 0, disagreements: Vec::new() };
    for k in 1..=cfg.k_max {
        if !report.is_nondegenerate(k) {
            out.skipped += 1;
            continue;
        }
        out.comparisons += 1;
        let values: Vec<MethodValue> = cfg
            .methods
            .iter()
            .map(|&method| match evaluate(&blocks, k, method, cfg.tol, seed) {
                Ok(s) => MethodValue { method, s: Some(s), error: None },
                Err(e) => MethodValue { method, s: None, error: Some(format!("{}: {e}", e.kind())) },
            })
            .collect();
        let first = values[0].s;
        if first.is_some() && values.iter().all(|v| v.s == first) {
            out.agreements += 1;
        } else {
            out.disagreements.push(Disagreement { trial, seed, k, blocks: (&blocks).into(), values });
        }
    }
    out
}

/// Runs all trials (in parallel, collected in trial order so the report is
/// reproducible).
pub fn run_verification(cfg: &VerifyConfig) -> VerifyReport {
    let results: Vec<TrialResult> = (0..cfg.trials).into_par_iter().map(|t| run_trial(cfg, t)).collect();
    let mut report = VerifyReport {
        v: 1,
        n: cfg.n,
        seed: cfg.seed,
        tol: cfg.tol,
        k_max: cfg.k_max,
        methods: cfg.methods.clone(),
        trials: cfg.trials,
        comparisons: 0,
        agreements: 0,
        skipped_degenerate: 0,
        disagreements: Vec::new(),
    };
    for r in results {
        report.comparisons += r.comparisons;
        report.agreements += r.agreements;
        report.skipped_degenerate += r.skipped;
        report.disagreements.extend(r.disagreements);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_batch_agrees_and_is_reproducible() {
        let cfg = VerifyConfig { n: 2, trials: 8, k_max: 3, seed: 42, ..VerifyConfig::default() };
        let a = run_verification(&cfg);
        assert!(a.all_agree(), "{:?}", a.disagreements);
        assert_eq!(a.comparisons + a.skipped_degenerate, 8 * 3);
        let b = run_verification(&cfg);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn single_method_always_agrees_with_itself() {
        let cfg = VerifyConfig { n: 1, trials: 5, k_max: 2, methods: vec![Method::Formula], ..VerifyConfig::default() };
        let r = run_verification(&cfg);
        assert_eq!(r.agreements + r.disagreements.len(), r.comparisons);
    }

    #[test]
    fn minus_identity_only_has_a_path_value() {
        // Rotation by π/3: Φ³ = −I is nondegenerate, but U₂(A) = 0 and Gr(−I)
        // meets L × L, so only the path method evaluates it.
        let blocks = ReturnMapBlocks::rotation(std::f64::consts::PI / 3.0);
        assert!(evaluate(&blocks, 3, Method::Formula, DEFAULT_TOL, 0).is_err());
        assert!(evaluate(&blocks, 3, Method::QuadraticForm, DEFAULT_TOL, 0).is_err());
        assert!(evaluate(&blocks, 3, Method::PathDifference, DEFAULT_TOL, 0).is_ok());
    }
}
