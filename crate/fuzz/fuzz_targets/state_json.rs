#![no_main]
use concentratable::Statevector;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(psi) = Statevector::from_json_slice(data) {
        let again = Statevector::from_json_str(&psi.to_json()).expect("re-encoded state parses");
        assert_eq!(again, psi);
    }
});
