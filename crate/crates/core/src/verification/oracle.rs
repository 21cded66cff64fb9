use rand::Rng;

use crate::distributions::EmpiricalDistribution;
use crate::kinf::{objective, Support};

/// `max_i H(i / (points − 1))` over a uniform λ grid; a lower bound on
/// `K_inf(ν, μ)` that converges to it as the grid refines.
pub fn grid_kinf<S: Support + ?Sized>(nu: &S, mu: f64, points: usize) -> f64 {
    let last = points.max(2) - 1;
    let step = 1.0 / last as f64;
    let atom_at_one = nu.has_atom_at_one();
    let atoms: Vec<(f64, f64)> = nu
        .weighted_atoms()
        .map(|(x, w)| ((x - mu) / (1.0 - mu), w))
        .collect();
    let mut best = objective(nu, mu, 0.0);
    let end = if atom_at_one { last - 1 } else { last };
    for i in 1..=end {
        let lambda = i as f64 * step;
        let h: f64 = atoms.iter().map(|&(z, w)| w * (-lambda * z).ln_1p()).sum();
        best = best.max(h);
    }
    best
}

/// Random empirical distribution with between 1 and `max_atoms` atoms on
/// `[0, 1]` and integer weights in `1..=10`. About one atom in ten sits
/// exactly on an endpoint.
pub fn random_empirical<R: Rng + ?Sized>(rng: &mut R, max_atoms: usize) -> EmpiricalDistribution {
    let atoms = rng.random_range(1..=max_atoms.max(1));
    let pairs = (0..atoms).map(|_| {
        let value = match rng.random_range(0..20) {
            0 => 0.0,
            1 => 1.0,
            _ => rng.random::<f64>(),
        };
        (value, rng.random_range(1..=10u64))
    });
    let pairs: Vec<_> = pairs.collect();
    EmpiricalDistribution::from_counts(pairs).expect("values drawn in [0, 1]")
}
