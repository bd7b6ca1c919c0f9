#![no_main]
use concentratable::verify::VerifyReport;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(report) = VerifyReport::from_json_str(text) {
        let again = VerifyReport::from_json_str(&report.to_json()).unwrap();
        assert_eq!(again.passed, report.passed);
    }
});
