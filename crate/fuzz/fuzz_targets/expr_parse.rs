#![no_main]

use libfuzzer_sys::fuzz_target;
use prequant_core::expr::parse;

const VARS: [&str; 4] = ["q", "p", "x", "theta"];
const POINT: [f64; 4] = [0.3, -1.2, 0.7, 2.0];

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(e) = parse(text, &VARS) else { return };
    // printing must produce text that parses back to the same function
    let printed = e.to_string();
    let again = parse(&printed, &VARS).unwrap_or_else(|err| panic!("`{printed}` does not reparse: {err}"));
    if let (Ok(a), Ok(b)) = (e.evaluate(&POINT), again.evaluate(&POINT)) {
        if a.is_finite() && b.is_finite() {
            assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "`{text}` -> `{printed}`: {a} vs {b}");
        }
    }
    for i in 0..VARS.len() {
        let _ = e.partial(i).evaluate(&POINT);
    }
});
