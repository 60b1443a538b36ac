#![no_main]
use libfuzzer_sys::fuzz_target;

use hormander::orbit::parse_seed_point;

fuzz_target!(|data: &[u8]| {
    let Some((&dim, rest)) = data.split_first() else { return };
    let dim = usize::from(dim % 9);
    if let Ok(s) = std::str::from_utf8(rest) {
        if let Ok(x) = parse_seed_point(s, dim) {
            assert_eq!(x.len(), dim);
            assert!(x.iter().all(|v| v.is_finite()));
        }
    }
});
