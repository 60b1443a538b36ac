//! Replays the checked-in fuzz corpus through the same checks as the fuzz
//! targets, so parser regressions show up without cargo-fuzz.

use std::fs;
use std::path::PathBuf;

use hormander::darwin::{blocks_to_json, parse_blocks_json, validate_darwin};
use hormander::orbit::{parse_seed_point, parse_system_spec};

fn corpus(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut files: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|entry| entry.unwrap().path())
        .collect();
    files.sort();
    assert!(!files.is_empty(), "empty corpus for {target}");
    files.into_iter().map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())).collect()
}

#[test]
fn parse_blocks_corpus() {
    let mut accepted = 0;
    for (name, data) in corpus("parse_blocks") {
        let Ok(s) = std::str::from_utf8(&data) else { continue };
        let Ok(blocks) = parse_blocks_json(s) else { continue };
        accepted += 1;
        let _ = validate_darwin(&blocks, 1e-8);
        let again = parse_blocks_json(&blocks_to_json(&blocks).to_string()).expect(&name);
        assert_eq!(again, blocks, "{name}");
    }
    assert!(accepted >= 3);
}

#[test]
fn parse_system_spec_corpus() {
    let mut accepted = 0;
    for (_, data) in corpus("parse_system_spec") {
        if let Ok(sys) = std::str::from_utf8(&data).map_err(|_| ()).and_then(|s| parse_system_spec(s).map_err(|_| ())) {
            assert_eq!(sys.dim() % 2, 0);
            accepted += 1;
        }
    }
    assert_eq!(accepted, 2);
}

#[test]
fn parse_seed_point_corpus() {
    let mut accepted = 0;
    for (_, data) in corpus("parse_seed_point") {
        let Some((&dim, rest)) = data.split_first() else { continue };
        let dim = usize::from(dim % 9);
        if let Ok(x) = std::str::from_utf8(rest).map_err(|_| ()).and_then(|s| parse_seed_point(s, dim).map_err(|_| ())) {
            assert_eq!(x.len(), dim);
            accepted += 1;
        }
    }
    assert_eq!(accepted, 2);
}
