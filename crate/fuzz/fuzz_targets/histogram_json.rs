#![no_main]
use concentratable::ShotHistogram;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(h) = ShotHistogram::from_json_str(text) {
        assert_eq!(ShotHistogram::from_json_str(&h.to_json()).unwrap(), h);
    }
});
