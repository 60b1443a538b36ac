use serde_json::{json, Value};

use hormander::chebyshev::{cheb_scalar, default_validation_tol, ChebKind};
use hormander::darwin::{nondegeneracy_check, parse_blocks_json, validate_darwin, ReturnMapBlocks};
use hormander::hormander::Method;
use hormander::orbit::section::build_transverse_section_seeded;
use hormander::orbit::{
    estimate_half_period, find_symmetric_orbit, parse_seed_point, parse_system_spec, reduced_monodromy,
    HALF_PERIOD_SEARCH,
};
use hormander::verify::{index_of_iterate, run_verification, VerifyConfig};
use hormander::Error;

use crate::{ChebArgs, IndexArgs, OrbitArgs, Outcome, SingleMethod, VerifyArgs};

const VERSION: &str = env!("CARGO_PKG_VERSION");

fn describe(e: &Error) -> String {
    format!("{}: {e}", e.kind())
}

fn document(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    text.push('\n');
    text
}

struct IndexTable {
    results: Vec<Value>,
    degenerate: Vec<usize>,
    nondegeneracy: Value,
    agree: bool,
}

/// Every method on every nondegenerate iterate. Failures are reported in
/// place; two successful methods with different values are a disagreement.
fn index_table(blocks: &ReturnMapBlocks, k_max: usize, methods: &[Method], tol: f64, seed: u64) -> IndexTable {
    let report = nondegeneracy_check(blocks, k_max, None);
    let mut results = Vec::new();
    let mut agree = true;
    for k in 1..=k_max {
        if !report.is_nondegenerate(k) {
            continue;
        }
        let mut seen = None;
        for &method in methods {
            match index_of_iterate(blocks, k, method, tol, seed) {
                Ok(r) => {
                    if *seen.get_or_insert(r.s) != r.s {
                        agree = false;
                    }
                    results.push(serde_json::to_value(&r).expect("index results serialize"));
                }
                Err(e) => results.push(json!({
                    "k": k,
                    "method": method,
                    "error": { "kind": e.kind(), "message": e.to_string() },
                })),
            }
        }
    }
    IndexTable {
        results,
        degenerate: report.degenerate.clone(),
        nondegeneracy: serde_json::to_value(&report).expect("report serializes"),
        agree,
    }
}

pub fn index(args: &IndexArgs, text: &str) -> Result<Outcome, String> {
    let blocks = parse_blocks_json(text).map_err(|e| describe(&e))?;
    let darwin = validate_darwin(&blocks, default_validation_tol(&blocks)).map_err(|e| describe(&e))?;
    if !darwin.passes {
        return Err(format!(
            "InvalidBlocks: input misses the return-map identities by {:e} (tolerance {:e})",
            darwin.residuals.max(),
            darwin.tol
        ));
    }
    let methods = args.method.methods();
    let table = index_table(&blocks, args.k_max as usize, &methods, args.tol, args.seed);
    let doc = json!({
        "v": 1,
        "version": VERSION,
        "seed": args.seed,
        "tol": args.tol,
        "k_max": args.k_max,
        "methods": methods,
        "darwin": darwin,
        "nondegeneracy": table.nondegeneracy,
        "degenerate": table.degenerate,
        "results": table.results,
        "agree": table.agree,
    });
    Ok(Outcome { text: document(&doc), code: if table.agree { 0 } else { 2 } })
}

pub fn verify(args: &VerifyArgs) -> Result<Outcome, String> {
    let mut methods: Vec<Method> = Vec::new();
    for m in &args.methods {
        let m = match m {
            SingleMethod::Formula => Method::Formula,
            SingleMethod::Qform => Method::QuadraticForm,
            SingleMethod::Paths => Method::PathDifference,
        };
        if !methods.contains(&m) {
            methods.push(m);
        }
    }
    let cfg = VerifyConfig {
        n: args.n as usize,
        trials: args.trials,
        k_max: args.k_max as usize,
        seed: args.seed,
        methods,
        tol: args.tol,
        ..VerifyConfig::default()
    };
    let report = run_verification(&cfg);
    let code = if report.all_agree() { 0 } else { 2 };
    let mut doc = serde_json::to_value(&report).expect("report serializes");
    doc["version"] = json!(VERSION);
    Ok(Outcome { text: document(&doc), code })
}

pub fn cheb(args: &ChebArgs) -> Result<Outcome, String> {
    let degrees: Vec<usize> = match (args.k, args.k_max) {
        (Some(k), _) => vec![k],
        (None, Some(k_max)) => (0..=k_max).collect(),
        (None, None) => (0..=4).collect(),
    };
    let points = args.points as usize;
    let mut text = format!(
        "# v=1 version={VERSION} degrees={}..={} points={points}\nk,x,T_k,U_k\n",
        degrees[0],
        degrees[degrees.len() - 1]
    );
    for &k in &degrees {
        for i in 0..points {
            let x = -1.0 + 2.0 * i as f64 / (points - 1) as f64;
            let t = cheb_scalar(ChebKind::First, k, x);
            let u = cheb_scalar(ChebKind::Second, k, x);
            text.push_str(&format!("{k},{x},{t},{u}\n"));
        }
    }
    Ok(Outcome { text, code: 0 })
}

pub fn orbit(args: &OrbitArgs) -> Result<Outcome, String> {
    let sys = parse_system_spec(&args.system).map_err(|e| describe(&e))?;
    let seed_point = parse_seed_point(&args.seed_point, sys.dim()).map_err(|e| describe(&e))?;
    let guess = match args.half_period {
        Some(t) => t,
        None => estimate_half_period(sys.as_ref(), &seed_point, HALF_PERIOD_SEARCH.0, HALF_PERIOD_SEARCH.1, args.tol)
            .map_err(|e| describe(&e))?,
    };
    let orbit = find_symmetric_orbit(sys.as_ref(), &seed_point, guess, args.tol).map_err(|e| describe(&e))?;
    let section = build_transverse_section_seeded(sys.as_ref(), &orbit, args.seed).map_err(|e| describe(&e))?;
    let blocks = reduced_monodromy(sys.as_ref(), &orbit, &section, args.tol).map_err(|e| describe(&e))?;
    let darwin = validate_darwin(&blocks, hormander::orbit::section::REDUCTION_TOL).map_err(|e| describe(&e))?;
    let methods = args.method.methods();
    let table = index_table(&blocks, args.k_max as usize, &methods, hormander::hormander::DEFAULT_TOL, args.seed);
    let doc = json!({
        "v": 1,
        "version": VERSION,
        "seed": args.seed,
        "tol": args.tol,
        "system": sys.name(),
        "half_period_guess": guess,
        "k_max": args.k_max,
        "methods": methods,
        "orbit": orbit,
        "blocks": blocks,
        "darwin": darwin,
        "nondegeneracy": table.nondegeneracy,
        "degenerate": table.degenerate,
        "indices": table.results,
        "agree": table.agree,
    });
    Ok(Outcome { text: document(&doc), code: if table.agree { 0 } else { 2 } })
}
