//! One runner per scenario table of the config.

pub mod chern;
pub mod cym;
pub mod gma;
pub mod hitchin;
pub mod moment;

use prequant_core::fields::{i_ddbar, reference_omega, ClosedKKSpec};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent ChaCha stream per (scenario kind, index) under one seed.
pub fn rng_for(seed: u64, kind: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((kind << 32) | index as u64);
    rng
}

/// Log-log least-squares slope of `(x, y)` pairs with positive entries.
pub fn fitted_exponent(pts: &[(f64, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> =
        pts.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if logs.len() < 2 {
        return None;
    }
    Some(prequant_core::moment::least_squares_slope(&logs))
}

/// `sup |i ddbar eta| / (|c| omega_0)`, the size of the exact part of a closed
/// form relative to its constant part; `omega_0` is the diagonal of the reference form.
pub fn relative_perturbation(spec: &ClosedKKSpec) -> f64 {
    let omega0 = reference_omega(spec.eta.grid).comps[0][0].re;
    let sup = i_ddbar(&spec.eta).comps.iter().flatten().fold(0.0f64, |m, v| m.max(v.norm()));
    sup / (spec.c.abs() * omega0)
}
