#![no_main]

use dbcount_core::formats::{decode_utf8, read_decomposition, write_decomposition};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = decode_utf8(data) else { return };
    let Ok((h, d)) = read_decomposition(text) else {
        return;
    };
    let written = write_decomposition(&d, &h).expect("accepted trees can be written");
    let (h2, d2) = read_decomposition(&written).expect("writer output reads back");
    assert_eq!(h.num_edges(), h2.num_edges());
    assert_eq!(d.preorder(), d2.preorder());
});
