#![no_main]
use concentratable::OutcomeDistribution;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(d) = OutcomeDistribution::from_json_str(text) {
        assert_eq!(OutcomeDistribution::from_json_str(&d.to_json()).unwrap(), d);
    }
});
