#![no_main]

use expu_core::Codebook;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(code) = serde_json::from_slice::<Codebook>(data) {
        assert_eq!(code.len() as u64, code.spec().m_prime());
        let k = code.spec().alphabet_size();
        assert!(code
            .rows()
            .all(|r| r.len() == code.n() && r.iter().all(|&s| s < k)));
    }
});
