//! Normalisation constants shared by every numerical module.
//!
//! The torus is `C^n / (Z + iZ)^n` with real coordinates ordered
//! `(x1, y1, x2, y2)`, `z_j = x_j + i y_j`. A real (1,1)-form is stored through
//! its Hermitian coefficient matrix `g` in `i * sum g_{jk} dz_j ^ dzbar_k`.
//!
//! Chern forms follow the "absorbed" convention: a complex gauge
//! transformation `g` moves the first Chern form by `i ddbar ln|g|^2`, and the
//! first Chern form of a unitary connection with curvature `Theta` is
//! `i Theta / 2 pi`. Every constant that depends on these choices is routed
//! through this module.

use std::f64::consts::PI;

/// Diagonal entry `s` of the reference Kahler form `omega = s * i sum dz_j ^ dzbar_j`,
/// fixed so that `int omega^n = 1` on the unit torus.
pub fn omega_scale(n: usize) -> f64 {
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    0.5 / fact.powf(1.0 / n as f64)
}

/// Density (against `omega^n`) of the wedge of `n` (1,1)-forms whose
/// coefficient matrices' mixed determinant is 1. For n = 1 a (1,1)-form
/// `i g dz ^ dzbar = 2 g dx ^ dy`; for n = 2 the mixed determinant multiplies
/// `(i dz1 dzbar1)(i dz2 dzbar2) = 4 dV`.
pub fn wedge_constant(n: usize) -> f64 {
    let s = omega_scale(n);
    1.0 / s.powi(n as i32) / (1..=n).map(|k| k as f64).product::<f64>()
}

/// Multiplier turning `i Theta` into the first Chern form.
pub const CHERN_FORM_FACTOR: f64 = 1.0 / (2.0 * PI);

/// A unitary line-bundle connection whose (0,1)-part is shifted by `dbar u`
/// has its first Chern form shifted by `i ddbar (POTENTIAL_FROM_U * Re u)`.
pub const POTENTIAL_FROM_U: f64 = 2.0;

/// Real connection one-forms whose curvature moves the first Chern form by
/// `i ddbar phi` are `CONNECTION_SCALE * (dbar - d) (phi / 2)`.
pub const CONNECTION_SCALE: f64 = 2.0 * PI;
