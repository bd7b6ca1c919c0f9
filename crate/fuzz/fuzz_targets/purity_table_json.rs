#![no_main]
use concentratable::PurityTable;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(table) = PurityTable::from_json_str(text) {
        assert_eq!(PurityTable::from_json_str(&table.to_json()).unwrap(), table);
    }
});
