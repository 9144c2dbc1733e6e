#![no_main]

use joindeg_core::instance::InstanceFile;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(file) = InstanceFile::from_json(text) {
        let again = InstanceFile::from_json(&file.to_json_pretty()).expect("round trip");
        assert_eq!(again, file);
        let _ = file.build();
    }
});
