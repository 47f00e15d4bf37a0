#![no_main]

use fmfix::Point;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(p) = serde_json::from_slice::<Point>(data) {
        let _ = p.render_exact();
        let _ = serde_json::to_string(&p);
    }
});
