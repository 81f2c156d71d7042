#![no_main]

use expu_core::Channel;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(ch) = Channel::from_json_str(text) {
        for row in ch.rows() {
            let sum: f64 = row.iter().sum();
            assert!((sum - 1.0).abs() <= 1e-9);
        }
        let bm = ch.bhattacharyya_matrix();
        for a in 0..ch.inputs() {
            for b in 0..ch.inputs() {
                let z = bm.get(a, b);
                assert!((0.0..=1.0).contains(&z));
            }
        }
        let back = Channel::from_json_str(&ch.to_json_string()).expect("round trip");
        assert_eq!(back, ch);
    }
});
