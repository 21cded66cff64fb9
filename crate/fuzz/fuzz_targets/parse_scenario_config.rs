#![no_main]

use klucb_switch::config::ScenarioConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(config) = text.parse::<ScenarioConfig>() else {
        return;
    };
    if let Ok(expanded) = config.expand() {
        let echoed: ScenarioConfig = expanded.to_json().parse().expect("echoed config parses");
        assert_eq!(echoed.expand().expect("echoed config expands"), expanded);
    }
});
