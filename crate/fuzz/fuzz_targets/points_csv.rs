#![no_main]

use energy_core::points::PointSet;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok((points, weights)) = PointSet::from_csv_str(text) {
        let again = PointSet::from_csv_str(&points.to_csv(weights.as_deref())).expect("own output parses");
        assert_eq!(again.0.len(), points.len());
        assert_eq!(again.0.dim(), points.dim());
    }
});
