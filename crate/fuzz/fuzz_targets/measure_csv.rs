#![no_main]

use energy_core::discrete_energy::SignedAtomicMeasure;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(mu) = SignedAtomicMeasure::from_csv_str(text) {
        assert!((mu.total_mass() - 1.0).abs() <= 1e-9);
        let again = SignedAtomicMeasure::from_csv_str(&mu.to_csv()).expect("own output parses");
        assert_eq!(again.weights().len(), mu.weights().len());
    }
});
