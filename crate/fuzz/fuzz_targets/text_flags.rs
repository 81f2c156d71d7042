#![no_main]

use expu_core::{EvalMethod, GammaKind, InputDistribution, RateGrid};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(q) = text.parse::<InputDistribution>() {
        let back: InputDistribution = q.to_string().parse().expect("round trip");
        assert_eq!(back, q);
    }
    if let Ok(grid) = text.parse::<RateGrid>() {
        let points = grid.points();
        assert!(!points.is_empty());
        assert!(points.windows(2).all(|w| w[0] < w[1]));
    }
    if let Ok(kind) = text.parse::<GammaKind>() {
        assert_eq!(
            kind.to_string().parse::<GammaKind>().expect("round trip"),
            kind
        );
        assert!(kind.gamma(1) >= 1.0);
    }
    if let Ok(m) = text.parse::<EvalMethod>() {
        assert_eq!(m.to_string().parse::<EvalMethod>().expect("round trip"), m);
    }
});
