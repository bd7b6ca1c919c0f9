#![no_main]
use concentratable::measures::{read_comparison_csv, write_comparison_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = read_comparison_csv(data) {
        let mut buf = Vec::new();
        write_comparison_csv(&rows, &mut buf).unwrap();
        let again = read_comparison_csv(&buf[..]).unwrap();
        assert_eq!(again.len(), rows.len());
    }
});
