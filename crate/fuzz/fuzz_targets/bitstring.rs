#![no_main]
use concentratable::swaptest::{bitstring, parse_bitstring};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&width, rest)) = data.split_first() else { return };
    let width = usize::from(width % 20);
    let Ok(text) = std::str::from_utf8(rest) else { return };
    if let Ok(z) = parse_bitstring(text, width) {
        assert_eq!(bitstring(z, width), text);
    }
});
