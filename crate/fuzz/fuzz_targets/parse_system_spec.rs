#![no_main]
use libfuzzer_sys::fuzz_target;

use hormander::orbit::parse_system_spec;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(sys) = parse_system_spec(s) {
            assert_eq!(sys.dim() % 2, 0);
            let _ = sys.name();
        }
    }
});
