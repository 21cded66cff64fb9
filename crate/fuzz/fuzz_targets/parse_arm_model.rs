#![no_main]

use klucb_switch::ArmModel;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(arm) = serde_json::from_slice::<ArmModel>(data) else {
        return;
    };
    let mean = arm.true_mean();
    assert!((0.0..=1.0).contains(&mean), "{arm:?} has mean {mean}");
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(data.len() as u64);
    for _ in 0..16 {
        let x = arm.sample(&mut rng);
        assert!((0.0..=1.0).contains(&x), "{arm:?} sampled {x}");
    }
    let text = serde_json::to_string(&arm).unwrap();
    assert_eq!(serde_json::from_str::<ArmModel>(&text).unwrap(), arm);
});
