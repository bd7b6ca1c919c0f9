#![no_main]
use concentratable::CeResult;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(r) = CeResult::from_json_str(text) {
        assert_eq!(CeResult::from_json_str(&r.to_json()).unwrap(), r);
    }
});
