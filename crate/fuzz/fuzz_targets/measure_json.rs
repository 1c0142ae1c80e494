#![no_main]

use energy_core::discrete_energy::{energy_of_measure, SignedAtomicMeasure};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(mu) = SignedAtomicMeasure::from_json_str(text) {
        if mu.weights().len() <= 64 {
            let _ = energy_of_measure(&mu, 2.0, 1.0);
        }
    }
});
