#![no_main]

use dbcount_core::counter::brute_force_count;
use dbcount_core::formats::{decode_utf8, parse_cspneg, write_cspneg};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = decode_utf8(data) else { return };
    let Ok(parsed) = parse_cspneg(text) else {
        return;
    };
    // Anything accepted must survive a write/parse round trip with its count intact.
    if parsed.num_vars <= 12 {
        if let Ok(inst) = parsed.to_instance() {
            let again = parse_cspneg(&write_cspneg(&inst)).expect("writer output parses");
            let again = again.to_instance().expect("writer output is valid");
            assert_eq!(brute_force_count(&inst), brute_force_count(&again));
        }
    }
});
