#![no_main]

use fmfix::cli::{parse_trace_line, render_trace_line};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    for line in text.lines() {
        if let Ok(Some(record)) = parse_trace_line(line) {
            // rendering a parsed record must parse back to the same record
            let again = parse_trace_line(&render_trace_line(&record))
                .unwrap()
                .unwrap();
            assert_eq!(again.index, record.index);
            assert_eq!(
                again.point.canonical_cmp(&record.point),
                std::cmp::Ordering::Equal
            );
            assert_eq!(
                again.successive_grade.to_bits(),
                record.successive_grade.to_bits()
            );
        }
    }
});
