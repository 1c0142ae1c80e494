#![no_main]

use energy_core::bodies::BodySpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(body) = BodySpec::from_json_str(text) {
        if body.dim() <= 64 {
            let origin = vec![0.0; body.dim()];
            assert_eq!(body.gauge(&origin).expect("origin is valid"), 0.0);
        }
        let json = serde_json::to_string(&body).expect("serializable");
        BodySpec::from_json_str(&json).expect("own output parses");
    }
});
