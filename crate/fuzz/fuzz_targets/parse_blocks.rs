#![no_main]
use libfuzzer_sys::fuzz_target;

use hormander::darwin::{blocks_to_json, parse_blocks_json, validate_darwin};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let Ok(blocks) = parse_blocks_json(s) else { return };
    // Accepted documents must be checkable and survive a round trip.
    let _ = validate_darwin(&blocks, 1e-8);
    let text = blocks_to_json(&blocks).to_string();
    let again = parse_blocks_json(&text).expect("serialized blocks parse");
    assert_eq!(again, blocks);
});
