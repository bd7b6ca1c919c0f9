#![no_main]
use concentratable::statevector::parse_mask;
use concentratable::QubitSet;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(mask) = parse_mask(text) {
        assert_eq!(parse_mask(&mask.to_string()).unwrap(), mask);
        assert_eq!(parse_mask(&format!("{mask:#b}")).unwrap(), mask);
        if let Ok(s) = QubitSet::new(63, mask) {
            assert_eq!(s.cardinality(), mask.count_ones() as usize);
        }
    }
});
