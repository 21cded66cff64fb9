#![no_main]

//! Input layout: two bytes for `μ`, then three-byte atoms (two bytes of
//! value on a 65535 grid, one byte of count).

use klucb_switch::kinf::{kinf, kinf_witness, klucb_index};
use klucb_switch::EmpiricalDistribution;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if data.len() < 5 {
        return;
    }
    let mu = (u16::from_le_bytes([data[0], data[1]]) as f64 + 1.0) / 65_537.0;
    let atoms = data[2..].chunks_exact(3).map(|c| {
        let value = u16::from_le_bytes([c[0], c[1]]) as f64 / 65_535.0;
        (value, u64::from(c[2]))
    });
    let nu = EmpiricalDistribution::from_counts(atoms).expect("values lie on [0, 1]");
    if nu.is_empty() {
        return;
    }
    let res = kinf(&nu, mu).expect("mu lies in (0, 1)");
    assert!(res.value.is_finite() && res.value >= 0.0, "{res:?}");
    assert!((0.0..=1.0).contains(&res.lambda_star));
    if res.converged && !(res.lambda_star >= 1.0 && nu.has_atom_at_one()) {
        let w = kinf_witness(&nu, mu, &res).expect("converged result has a witness");
        assert!((w.total_mass() - 1.0).abs() < 1e-6);
    }
    let d = f64::from(data[data.len() - 1]) / 64.0;
    let u = klucb_index(&nu, d);
    assert!(
        u >= nu.mean() - 1e-12 && u <= 1.0,
        "index {u} for mean {}",
        nu.mean()
    );
});
