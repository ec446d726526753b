#![no_main]

use cubalg::AlgebraDocument;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(doc) = AlgebraDocument::parse(text) else {
        return;
    };
    // Canonical text is a fixed point of parse/emit.
    let canonical = doc.to_text();
    let again = AlgebraDocument::parse(&canonical).expect("canonical text parses");
    assert_eq!(again.to_text(), canonical);
    let _ = doc.algebra();
});
