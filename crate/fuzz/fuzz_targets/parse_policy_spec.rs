#![no_main]

use klucb_switch::PolicySpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(spec) = serde_json::from_slice::<PolicySpec>(data) else {
        return;
    };
    let text = serde_json::to_string(&spec).unwrap();
    assert_eq!(serde_json::from_str::<PolicySpec>(&text).unwrap(), spec);
    let mut bound = spec.clone();
    bound.bind_horizon(100);
    bound
        .validate()
        .expect("a parsed spec with a horizon is valid");
});
