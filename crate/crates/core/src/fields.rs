//! Spectral field calculus on the flat tori `T^1` and `T^2`.

use std::f64::consts::PI;
use std::io::{Read, Write};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::conventions::{omega_scale, wedge_constant};
use crate::error::{LabError, Result};
use crate::spectral::Spectral;

/// Periodic grid on the unit torus `C^n / (Z + iZ)^n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusGrid {
    pub n: usize,
    pub pts: usize,
}

impl TorusGrid {
    pub fn new(n: usize, pts: usize) -> Result<Self> {
        if !(1..=2).contains(&n) {
            return Err(LabError::UnsupportedDimension(n));
        }
        if pts < 8 || !pts.is_power_of_two() {
            return Err(LabError::InvalidInput(format!("pts = {pts} must be a power of two >= 8")));
        }
        Ok(Self { n, pts })
    }

    /// Number of real axes.
    pub fn dims(&self) -> usize {
        2 * self.n
    }

    pub fn len(&self) -> usize {
        self.pts.pow(self.dims() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spectral(&self) -> Spectral {
        Spectral::new(self.pts, self.dims())
    }

    /// Real coordinates `(x1, y1, x2, y2)` of a flat index.
    pub fn coords(&self, flat: usize) -> [f64; 4] {
        let mut out = [0.0; 4];
        let mut rem = flat;
        for axis in (0..self.dims()).rev() {
            out[axis] = (rem % self.pts) as f64 / self.pts as f64;
            rem /= self.pts;
        }
        out
    }

    pub fn check(&self, other: &TorusGrid) -> Result<()> {
        if self != other {
            return Err(LabError::GridMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

/// Real-valued periodic function.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub grid: TorusGrid,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: TorusGrid) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Self {
        Self { grid, values: vec![c; grid.len()] }
    }

    pub fn from_fn(grid: TorusGrid, f: impl Fn([f64; 4]) -> f64) -> Self {
        Self { grid, values: (0..grid.len()).map(|i| f(grid.coords(i))).collect() }
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn add(&self, other: &ScalarField) -> Self {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &ScalarField) -> Self {
        self.axpy(-1.0, other)
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &ScalarField) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Self { grid: self.grid, values: self.values.iter().zip(&other.values).map(|(x, y)| x + a * y).collect() }
    }

    pub fn mul(&self, other: &ScalarField) -> Self {
        Self { grid: self.grid, values: self.values.iter().zip(&other.values).map(|(x, y)| x * y).collect() }
    }

    pub fn remove_mean(&self) -> Self {
        let m = self.mean();
        Self { grid: self.grid, values: self.values.iter().map(|v| v - m).collect() }
    }

    pub fn dot(&self, other: &ScalarField) -> f64 {
        self.values.iter().zip(&other.values).map(|(x, y)| x * y).sum::<f64>() / self.values.len() as f64
    }

    pub fn to_complex(&self) -> ComplexField {
        ComplexField { grid: self.grid, values: self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect() }
    }

    /// Spectral interpolation onto a grid of the same dimension.
    pub fn resample(&self, target: TorusGrid) -> Result<ScalarField> {
        Ok(self.to_complex().resample(target)?.re())
    }

    /// Flat binary snapshot: `n` and `pts` as little-endian u64, then row-major f64 values.
    pub fn write_binary(&self, mut w: impl Write) -> Result<()> {
        w.write_all(&(self.grid.n as u64).to_le_bytes())?;
        w.write_all(&(self.grid.pts as u64).to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary(mut r: impl Read) -> Result<ScalarField> {
        let mut word = [0u8; 8];
        r.read_exact(&mut word)?;
        let n = u64::from_le_bytes(word) as usize;
        r.read_exact(&mut word)?;
        let pts = u64::from_le_bytes(word) as usize;
        let grid = TorusGrid::new(n, pts)?;
        let mut values = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            r.read_exact(&mut word)?;
            values.push(f64::from_le_bytes(word));
        }
        Ok(ScalarField { grid, values })
    }

    /// CSV with one row per grid point: coordinates then value.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        let names = ["x1", "y1", "x2", "y2"];
        let header: Vec<&str> = names[..self.grid.dims()].to_vec();
        writeln!(w, "{},value", header.join(","))?;
        for (i, v) in self.values.iter().enumerate() {
            let c = self.grid.coords(i);
            let coords: Vec<String> = c[..self.grid.dims()].iter().map(|x| format!("{x}")).collect();
            writeln!(w, "{},{v:e}", coords.join(","))?;
        }
        Ok(())
    }
}

/// Complex-valued periodic function.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField {
    pub grid: TorusGrid,
    pub values: Vec<Complex64>,
}

impl ComplexField {
    pub fn zeros(grid: TorusGrid) -> Self {
        Self { grid, values: vec![Complex64::default(); grid.len()] }
    }

    pub fn constant(grid: TorusGrid, c: Complex64) -> Self {
        Self { grid, values: vec![c; grid.len()] }
    }

    pub fn from_parts(re: &ScalarField, im: &ScalarField) -> Self {
        Self { grid: re.grid, values: re.values.iter().zip(&im.values).map(|(&a, &b)| Complex64::new(a, b)).collect() }
    }

    pub fn re(&self) -> ScalarField {
        ScalarField { grid: self.grid, values: self.values.iter().map(|v| v.re).collect() }
    }

    pub fn im(&self) -> ScalarField {
        ScalarField { grid: self.grid, values: self.values.iter().map(|v| v.im).collect() }
    }

    pub fn mean(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() / self.values.len() as f64
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn axpy(&self, a: Complex64, other: &ComplexField) -> Self {
        Self { grid: self.grid, values: self.values.iter().zip(&other.values).map(|(x, y)| x + a * y).collect() }
    }

    pub fn scale(&self, a: Complex64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| v * a).collect() }
    }

    pub fn resample(&self, target: TorusGrid) -> Result<ComplexField> {
        if target.n != self.grid.n {
            return Err(LabError::GridMismatch("resample across dimensions".into()));
        }
        let src = self.grid.spectral();
        let dst = target.spectral();
        let mut spec = self.values.clone();
        src.forward(&mut spec);
        let mut out = vec![Complex64::default(); target.len()];
        let dims = target.dims();
        let mut idx = vec![0usize; dims];
        let limit = (self.grid.pts.min(target.pts) / 2) as i64;
        src.for_each_mode(|flat, ks, _| {
            if ks.iter().any(|k| k.abs() >= limit) {
                return;
            }
            for a in 0..dims {
                idx[a] = ks[a].rem_euclid(target.pts as i64) as usize;
            }
            let t = idx.iter().fold(0usize, |acc, &i| acc * target.pts + i);
            out[t] = spec[flat];
        });
        let ratio = target.len() as f64 / self.grid.len() as f64;
        out.iter_mut().for_each(|v| *v *= ratio);
        dst.inverse(&mut out);
        Ok(ComplexField { grid: target, values: out })
    }
}

/// Fourier symbols of the complex derivatives on one complex coordinate.
/// `d/dz_j <-> pi (i kx + ky)` and `d/dzbar_j <-> pi (i kx - ky)`.
pub fn dz_symbol(ks: &[i64], j: usize) -> Complex64 {
    Complex64::new(PI * ks[2 * j + 1] as f64, PI * ks[2 * j] as f64)
}

pub fn dzbar_symbol(ks: &[i64], j: usize) -> Complex64 {
    Complex64::new(-PI * ks[2 * j + 1] as f64, PI * ks[2 * j] as f64)
}

/// Real-direction derivative symbol `d/dx_axis <-> 2 pi i k`.
pub fn dreal_symbol(ks: &[i64], axis: usize) -> Complex64 {
    Complex64::new(0.0, 2.0 * PI * ks[axis] as f64)
}

/// Multiplies a spectrum by a symbol (Nyquist modes dropped) and returns the
/// physical-space result.
pub fn apply_symbol(sp: &Spectral, spectrum: &[Complex64], symbol: impl Fn(&[i64]) -> Complex64) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); spectrum.len()];
    sp.for_each_mode(|flat, ks, nyq| {
        if !nyq {
            out[flat] = spectrum[flat] * symbol(ks);
        }
    });
    sp.inverse(&mut out);
    out
}

impl ComplexField {
    pub fn dz(&self, j: usize) -> ComplexField {
        self.derive(|ks| dz_symbol(ks, j))
    }

    pub fn dzbar(&self, j: usize) -> ComplexField {
        self.derive(|ks| dzbar_symbol(ks, j))
    }

    pub fn dreal(&self, axis: usize) -> ComplexField {
        self.derive(|ks| dreal_symbol(ks, axis))
    }

    pub fn derive(&self, symbol: impl Fn(&[i64]) -> Complex64) -> ComplexField {
        let sp = self.grid.spectral();
        let mut spec = self.values.clone();
        sp.forward(&mut spec);
        ComplexField { grid: self.grid, values: apply_symbol(&sp, &spec, symbol) }
    }
}

impl ScalarField {
    /// Real derivative along axis `a` (0 = x1, 1 = y1, ...).
    pub fn dreal(&self, axis: usize) -> ScalarField {
        self.to_complex().dreal(axis).re()
    }

    pub fn laplacian(&self) -> ScalarField {
        let sp = self.grid.spectral();
        let spec = sp.forward_real(&self.values);
        let out = apply_symbol(&sp, &spec, |ks| {
            Complex64::new(-4.0 * PI * PI * ks.iter().map(|k| (k * k) as f64).sum::<f64>(), 0.0)
        });
        ScalarField { grid: self.grid, values: out.iter().map(|v| v.re).collect() }
    }

    /// Drops every mode touching a Nyquist frequency; the mean is kept.
    pub fn filter_nyquist(&self) -> ScalarField {
        let sp = self.grid.spectral();
        let spec = sp.forward_real(&self.values);
        let out = apply_symbol(&sp, &spec, |_| Complex64::new(1.0, 0.0));
        ScalarField { grid: self.grid, values: out.iter().map(|v| v.re).collect() }
    }

    /// Drops the mean and every mode touching a Nyquist frequency.
    pub fn project_resolved(&self) -> ScalarField {
        let sp = self.grid.spectral();
        let spec = sp.forward_real(&self.values);
        let out = apply_symbol(&sp, &spec, |ks| {
            if ks.iter().all(|&k| k == 0) {
                Complex64::default()
            } else {
                Complex64::new(1.0, 0.0)
            }
        });
        ScalarField { grid: self.grid, values: out.iter().map(|v| v.re).collect() }
    }

    /// Mean-zero solution of `laplacian(u) = f - mean(f)`.
    pub fn inverse_laplacian(&self) -> ScalarField {
        let sp = self.grid.spectral();
        let spec = sp.forward_real(&self.values);
        let out = apply_symbol(&sp, &spec, |ks| {
            let k2: i64 = ks.iter().map(|k| k * k).sum();
            if k2 == 0 {
                Complex64::default()
            } else {
                Complex64::new(-1.0 / (4.0 * PI * PI * k2 as f64), 0.0)
            }
        });
        ScalarField { grid: self.grid, values: out.iter().map(|v| v.re).collect() }
    }
}

/// Real (1,1)-form stored through its pointwise Hermitian coefficient matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct OneOneForm {
    pub grid: TorusGrid,
    /// Entry `(j, k)` at index `j * n + k`.
    pub comps: Vec<Vec<Complex64>>,
}

impl OneOneForm {
    pub fn zeros(grid: TorusGrid) -> Self {
        Self { grid, comps: vec![vec![Complex64::default(); grid.len()]; grid.n * grid.n] }
    }

    /// Constant diagonal form `c * i sum dz_j ^ dzbar_j`.
    pub fn diagonal(grid: TorusGrid, c: f64) -> Self {
        let mut f = Self::zeros(grid);
        for j in 0..grid.n {
            f.comps[j * grid.n + j].iter_mut().for_each(|v| *v = Complex64::new(c, 0.0));
        }
        f
    }

    pub fn get(&self, j: usize, k: usize) -> &[Complex64] {
        &self.comps[j * self.grid.n + k]
    }

    pub fn at(&self, p: usize) -> [[Complex64; 2]; 2] {
        let n = self.grid.n;
        let mut m = [[Complex64::default(); 2]; 2];
        for j in 0..n {
            for k in 0..n {
                m[j][k] = self.comps[j * n + k][p];
            }
        }
        m
    }

    pub fn axpy(&self, a: f64, other: &OneOneForm) -> OneOneForm {
        OneOneForm {
            grid: self.grid,
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(x, y)| x.iter().zip(y).map(|(u, v)| u + a * v).collect())
                .collect(),
        }
    }

    pub fn add(&self, other: &OneOneForm) -> OneOneForm {
        self.axpy(1.0, other)
    }

    pub fn scale(&self, c: f64) -> OneOneForm {
        OneOneForm { grid: self.grid, comps: self.comps.iter().map(|x| x.iter().map(|v| v * c).collect()).collect() }
    }

    /// Multiplies pointwise by a real function.
    pub fn mul_field(&self, f: &ScalarField) -> OneOneForm {
        OneOneForm {
            grid: self.grid,
            comps: self.comps.iter().map(|x| x.iter().zip(&f.values).map(|(v, s)| v * s).collect()).collect(),
        }
    }

    /// Largest pointwise violation of `g_{jk} = conj(g_{kj})`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.n;
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for k in j..n {
                for (a, b) in self.get(j, k).iter().zip(self.get(k, j)) {
                    worst = worst.max((a - b.conj()).norm());
                }
            }
        }
        worst
    }

    /// Density against `omega^n` when `n = 1` (the form is already top degree).
    pub fn top_density(&self) -> Result<TopForm> {
        if self.grid.n != 1 {
            return Err(LabError::UnsupportedDimension(self.grid.n));
        }
        let c = wedge_constant(1);
        Ok(TopForm { grid: self.grid, density: self.comps[0].iter().map(|v| c * v.re).collect() })
    }

    /// Mean of each component, row major.
    pub fn component_means(&self) -> Vec<Complex64> {
        self.comps.iter().map(|c| c.iter().sum::<Complex64>() / c.len() as f64).collect()
    }
}

/// Top-degree form stored as its density against `omega^n` (which equals the
/// Euclidean volume element on the unit torus).
#[derive(Clone, Debug, PartialEq)]
pub struct TopForm {
    pub grid: TorusGrid,
    pub density: Vec<f64>,
}

impl TopForm {
    pub fn zeros(grid: TorusGrid) -> Self {
        Self { grid, density: vec![0.0; grid.len()] }
    }

    pub fn from_field(f: &ScalarField) -> Self {
        Self { grid: f.grid, density: f.values.clone() }
    }

    pub fn as_field(&self) -> ScalarField {
        ScalarField { grid: self.grid, values: self.density.clone() }
    }

    pub fn axpy(&self, a: f64, other: &TopForm) -> TopForm {
        TopForm { grid: self.grid, density: self.density.iter().zip(&other.density).map(|(x, y)| x + a * y).collect() }
    }

    pub fn scale(&self, c: f64) -> TopForm {
        TopForm { grid: self.grid, density: self.density.iter().map(|v| v * c).collect() }
    }

    pub fn sup_norm(&self) -> f64 {
        self.density.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `int_M t`, an equal-weight sum over the periodic grid.
pub fn integrate(t: &TopForm) -> f64 {
    t.density.iter().sum::<f64>() / t.density.len() as f64
}

/// The reference Kahler form, normalised so that `int omega^n = 1`.
pub fn reference_omega(grid: TorusGrid) -> OneOneForm {
    OneOneForm::diagonal(grid, omega_scale(grid.n))
}

/// Components `d^2 phi / dz_j dzbar_k` of `i ddbar phi`.
pub fn i_ddbar(phi: &ScalarField) -> OneOneForm {
    let grid = phi.grid;
    let n = grid.n;
    let sp = grid.spectral();
    let spec = sp.forward_real(&phi.values);
    let mut out = OneOneForm::zeros(grid);
    for j in 0..n {
        for k in j..n {
            let mut comp = apply_symbol(&sp, &spec, |ks| dz_symbol(ks, j) * dzbar_symbol(ks, k));
            if j == k {
                comp.iter_mut().for_each(|v| v.im = 0.0);
            } else {
                out.comps[k * n + j] = comp.iter().map(|v| v.conj()).collect();
            }
            out.comps[j * n + k] = comp;
        }
    }
    out
}

/// Mixed determinant of two 2x2 Hermitian matrices, `a11 b22 + a22 b11 - a12 b21 - a21 b12`.
#[inline]
pub fn mixed_det(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> f64 {
    (a[0][0] * b[1][1] + a[1][1] * b[0][0] - a[0][1] * b[1][0] - a[1][0] * b[0][1]).re
}

/// Wedge of two (1,1)-forms on `T^2` as a density against `omega^2`.
pub fn wedge(a: &OneOneForm, b: &OneOneForm) -> Result<TopForm> {
    a.grid.check(&b.grid)?;
    if a.grid.n != 2 {
        return Err(LabError::UnsupportedDimension(a.grid.n));
    }
    let c = wedge_constant(2);
    let density = (0..a.grid.len()).map(|p| c * mixed_det(&a.at(p), &b.at(p))).collect();
    Ok(TopForm { grid: a.grid, density })
}

/// Smallest eigenvalue of a 2x2 (or 1x1) Hermitian matrix.
pub fn min_eigenvalue(m: &[[Complex64; 2]; 2], n: usize) -> f64 {
    if n == 1 {
        return m[0][0].re;
    }
    let a = m[0][0].re;
    let d = m[1][1].re;
    let half = 0.5 * (a - d);
    0.5 * (a + d) - (half * half + m[0][1].norm_sqr()).sqrt()
}

/// Minimum over the grid of the smallest eigenvalue of the coefficient matrix.
pub fn positivity_margin(a: &OneOneForm) -> f64 {
    (0..a.grid.len()).map(|p| min_eigenvalue(&a.at(p), a.grid.n)).fold(f64::INFINITY, f64::min)
}

/// A single real Fourier mode `amp * cos(2 pi k.x)` or `amp * sin(2 pi k.x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierMode {
    /// Integer wave vector over the real axes `(x1, y1, x2, y2)`; missing entries are zero.
    pub k: Vec<i64>,
    pub amp: f64,
    #[serde(default)]
    pub sine: bool,
}

/// Sum of real Fourier modes; used for analytic perturbation profiles.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FourierProfile {
    pub modes: Vec<FourierMode>,
}

impl FourierProfile {
    pub fn single(k: &[i64], amp: f64) -> Self {
        Self { modes: vec![FourierMode { k: k.to_vec(), amp, sine: false }] }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { modes: self.modes.iter().map(|m| FourierMode { amp: m.amp * c, ..m.clone() }).collect() }
    }

    pub fn value(&self, x: [f64; 4]) -> f64 {
        self.modes
            .iter()
            .map(|m| {
                let phase: f64 = m.k.iter().zip(x.iter()).map(|(&k, &xi)| k as f64 * xi).sum::<f64>() * 2.0 * PI;
                m.amp * if m.sine { phase.sin() } else { phase.cos() }
            })
            .sum()
    }

    pub fn sample(&self, grid: TorusGrid) -> ScalarField {
        ScalarField::from_fn(grid, |x| self.value(x))
    }

    /// Random profile with `count` modes of wavenumber at most `kmax` per axis.
    pub fn random(rng: &mut impl Rng, dims: usize, count: usize, kmax: i64, amp: f64) -> Self {
        let modes = (0..count)
            .map(|_| FourierMode {
                k: (0..dims).map(|_| rng.gen_range(-kmax..=kmax)).collect(),
                amp: amp * rng.gen_range(-1.0..1.0),
                sine: rng.gen_bool(0.5),
            })
            .collect();
        Self { modes }
    }
}

/// Random smooth real field built from a few low Fourier modes.
pub fn random_field(grid: TorusGrid, rng: &mut impl Rng, amp: f64) -> ScalarField {
    FourierProfile::random(rng, grid.dims(), 4, 2, amp).sample(grid)
}

pub fn random_complex_field(grid: TorusGrid, rng: &mut impl Rng, amp: f64) -> ComplexField {
    let re = random_field(grid, rng, amp);
    let im = random_field(grid, rng, amp);
    ComplexField::from_parts(&re, &im)
}

/// Closed real (k,k)-form `c omega^k + (i ddbar eta) ^ omega^{k-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedKKSpec {
    pub k: usize,
    pub c: f64,
    pub eta: ScalarField,
}

/// Realisation of a closed (k,k)-form on the grid.
#[derive(Clone, Debug, PartialEq)]
pub enum AlphaForm {
    OneOne(OneOneForm),
    Top(TopForm),
}

impl AlphaForm {
    pub fn as_top(&self) -> Option<&TopForm> {
        match self {
            AlphaForm::Top(t) => Some(t),
            AlphaForm::OneOne(_) => None,
        }
    }

    pub fn as_one_one(&self) -> Option<&OneOneForm> {
        match self {
            AlphaForm::OneOne(f) => Some(f),
            AlphaForm::Top(_) => None,
        }
    }
}

pub fn build_alpha(spec: &ClosedKKSpec, grid: TorusGrid) -> Result<AlphaForm> {
    spec.eta.grid.check(&grid)?;
    let n = grid.n;
    if spec.k == 0 || spec.k > n {
        return Err(LabError::DegreeOutOfRange { k: spec.k, n });
    }
    let omega = reference_omega(grid);
    let ddbar = i_ddbar(&spec.eta);
    match (n, spec.k) {
        (1, 1) => {
            let form = omega.scale(spec.c).add(&ddbar);
            Ok(AlphaForm::Top(form.top_density()?))
        }
        (2, 1) => Ok(AlphaForm::OneOne(omega.scale(spec.c).add(&ddbar))),
        (2, 2) => {
            let exact = wedge(&ddbar, &omega)?;
            let density = exact.density.iter().map(|v| spec.c + v).collect();
            Ok(AlphaForm::Top(TopForm { grid, density }))
        }
        _ => unreachable!(),
    }
}

/// `int alpha ^ omega^{n-k}`.
pub fn cohomology_pairing(alpha: &AlphaForm, grid: TorusGrid) -> Result<f64> {
    match alpha {
        AlphaForm::Top(t) => Ok(integrate(t)),
        AlphaForm::OneOne(f) => Ok(integrate(&wedge(f, &reference_omega(grid))?)),
    }
}
