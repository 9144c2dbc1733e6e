#![no_main]

use joindeg_core::field::FieldSpec;
use joindeg_core::poly::{parse_form, parse_poly};
use libfuzzer_sys::fuzz_target;

// First byte picks the variable count, the rest is the text.
fuzz_target!(|data: &[u8]| {
    let Some((&n, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let nvars = 1 + usize::from(n % 4);
    if parse_poly(text, nvars).is_ok() {
        let _ = parse_form(text, nvars, FieldSpec::rationals());
        let _ = parse_form(text, nvars, FieldSpec::prime(31).unwrap());
    }
});
