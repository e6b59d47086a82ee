//! Exact-rational truncated Chern-Weil calculus.
//!
//! Characteristic forms are manipulated as truncated polynomials in one formal
//! degree-(1,1) generator `x` (standing for the first Chern form of `L`). The
//! virtual bundles `L_k` are integer combinations of powers of `L` obtained by
//! inverting the Vandermonde-type matrix of exponential coefficients.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{LabError, Result};

/// Exact rational number, always kept in lowest terms with a positive denominator.
pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Formats a rational as `p/q` (or `p` when the denominator is one).
pub fn fmt_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn factorial(m: usize) -> BigInt {
    (1..=m).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Truncated polynomial `sum_{m <= cap} c_m x^m` with exact coefficients.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TruncPoly {
    coeffs: Vec<Rational>,
}

impl TruncPoly {
    pub fn zero(cap: usize) -> Self {
        Self { coeffs: vec![Rational::zero(); cap + 1] }
    }

    pub fn one(cap: usize) -> Self {
        Self::monomial(cap, 0, Rational::one())
    }

    /// `c x^degree`, truncated away if `degree > cap`.
    pub fn monomial(cap: usize, degree: usize, c: Rational) -> Self {
        let mut p = Self::zero(cap);
        if degree <= cap {
            p.coeffs[degree] = c;
        }
        p
    }

    /// Builds from coefficients, padding with zeros or truncating to `cap`.
    pub fn from_coeffs(cap: usize, coeffs: impl IntoIterator<Item = Rational>) -> Self {
        let mut p = Self::zero(cap);
        for (m, c) in coeffs.into_iter().enumerate().take(cap + 1) {
            p.coeffs[m] = c;
        }
        p
    }

    pub fn cap(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, m: usize) -> Rational {
        self.coeffs.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Lowest degree carrying a nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self { coeffs: self.coeffs.iter().map(|v| v * c).collect() }
    }

    pub fn truncate(&self, cap: usize) -> Self {
        Self::from_coeffs(cap, self.coeffs.iter().cloned())
    }

    fn check_cap(&self, other: &Self) -> Result<()> {
        if self.cap() != other.cap() {
            return Err(LabError::DegreeCapMismatch { expected: self.cap(), found: other.cap() });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_cap(other)?;
        Ok(self + other)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_cap(other)?;
        Ok(self * other)
    }

    pub fn to_f64_coeffs(&self) -> Vec<f64> {
        self.coeffs.iter().map(to_f64).collect()
    }
}

impl fmt::Display for TruncPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (m, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let c = fmt_rational(c);
            terms.push(match m {
                0 => c,
                1 => format!("{c}*x"),
                _ => format!("{c}*x^{m}"),
            });
        }
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

impl Add for &TruncPoly {
    type Output = TruncPoly;
    fn add(self, rhs: &TruncPoly) -> TruncPoly {
        let cap = self.cap().min(rhs.cap());
        TruncPoly { coeffs: (0..=cap).map(|m| &self.coeffs[m] + &rhs.coeffs[m]).collect() }
    }
}

impl Sub for &TruncPoly {
    type Output = TruncPoly;
    fn sub(self, rhs: &TruncPoly) -> TruncPoly {
        let cap = self.cap().min(rhs.cap());
        TruncPoly { coeffs: (0..=cap).map(|m| &self.coeffs[m] - &rhs.coeffs[m]).collect() }
    }
}

impl Neg for &TruncPoly {
    type Output = TruncPoly;
    fn neg(self) -> TruncPoly {
        TruncPoly { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl Mul for &TruncPoly {
    type Output = TruncPoly;
    fn mul(self, rhs: &TruncPoly) -> TruncPoly {
        let cap = self.cap().min(rhs.cap());
        let mut out = TruncPoly::zero(cap);
        for (i, a) in self.coeffs.iter().enumerate().take(cap + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate().take(cap + 1 - i) {
                out.coeffs[i + j] += a * b;
            }
        }
        out
    }
}

/// `ch(L^j) = e^{j x}` truncated at degree `cap`.
pub fn ch_line_power(j: i64, cap: usize) -> TruncPoly {
    let mut coeffs = Vec::with_capacity(cap + 1);
    let mut power = BigInt::one();
    for m in 0..=cap {
        coeffs.push(Rational::new(power.clone(), factorial(m)));
        power *= BigInt::from(j);
    }
    TruncPoly { coeffs }
}

/// Dense matrix of exact rationals, row major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Rational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = RatMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * &other[(k, j)];
                }
            }
        }
        out
    }

    /// Gauss-Jordan elimination; returns the inverse and the determinant.
    pub fn inverse_and_det(&self) -> Result<(RatMatrix, Rational)> {
        if self.rows != self.cols {
            return Err(LabError::InvalidInput("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = RatMatrix::identity(n);
        let mut det = Rational::one();
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a[(r, col)].is_zero()).ok_or(LabError::Singular)?;
            if pivot != col {
                a.swap_rows(pivot, col);
                inv.swap_rows(pivot, col);
                det = -det;
            }
            let p = a[(col, col)].clone();
            det *= &p;
            let p_inv = p.recip();
            for j in 0..n {
                a[(col, j)] *= &p_inv;
                inv[(col, j)] *= &p_inv;
            }
            for r in 0..n {
                if r == col || a[(r, col)].is_zero() {
                    continue;
                }
                let f = a[(r, col)].clone();
                for j in 0..n {
                    let da = &f * &a[(col, j)];
                    a[(r, j)] -= da;
                    let di = &f * &inv[(col, j)];
                    inv[(r, j)] -= di;
                }
            }
        }
        Ok((inv, det))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl std::ops::Index<(usize, usize)> for RatMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

/// The `(n+2) x (n+2)` matrix with entry `j^m / m!` at row `j - 1`, column `m`.
pub fn vandermonde(n: usize) -> Result<RatMatrix> {
    if n == 0 {
        return Err(LabError::UnsupportedDimension(n));
    }
    let size = n + 2;
    let mut v = RatMatrix::zeros(size, size);
    for row in 0..size {
        let ch = ch_line_power(row as i64 + 1, size - 1);
        for m in 0..size {
            v[(row, m)] = ch.coeff(m);
        }
    }
    Ok(v)
}

/// Integer coefficients expressing each virtual bundle `L_k` through
/// `L, L^2, ..., L^{n+2}`, scaled by the minimal denominator-clearing `N`.
#[derive(Clone, Debug)]
pub struct LkSystem {
    pub n: usize,
    pub big_n: BigInt,
    /// Exact inverse of the Vandermonde-type matrix.
    pub inverse: RatMatrix,
    /// Row `m` holds the coefficients of `L_{n+1-m}`.
    pub rows: Vec<Vec<BigInt>>,
}

impl LkSystem {
    /// Coefficients of `L_k` against `L^1, ..., L^{n+2}`.
    pub fn row_for(&self, k: usize) -> &[BigInt] {
        &self.rows[self.n + 1 - k]
    }

    pub fn big_n_rational(&self) -> Rational {
        Rational::from_integer(self.big_n.clone())
    }

    /// `ch(L_k) = sum_j rows[k][j] ch(L^{j+1})`, truncated at degree `n+1`.
    pub fn ch_lk(&self, k: usize) -> TruncPoly {
        let cap = self.n + 1;
        self.row_for(k).iter().enumerate().fold(TruncPoly::zero(cap), |acc, (j, c)| {
            let term = ch_line_power(j as i64 + 1, cap).scale(&Rational::from_integer(c.clone()));
            &acc + &term
        })
    }
}

pub fn solve_lk(n: usize) -> Result<LkSystem> {
    let v = vandermonde(n)?;
    let (inverse, det) = v.inverse_and_det()?;
    if det.is_zero() {
        return Err(LabError::Singular);
    }
    let size = n + 2;
    let big_n = (0..size * size)
        .map(|idx| inverse[(idx / size, idx % size)].denom().clone())
        .fold(BigInt::one(), |acc, d| acc.lcm(&d));
    let scale = Rational::from_integer(big_n.clone());
    let rows = (0..size)
        .map(|i| {
            (0..size)
                .map(|j| {
                    let v = &inverse[(i, j)] * &scale;
                    debug_assert!(v.is_integer());
                    v.to_integer()
                })
                .collect()
        })
        .collect();
    Ok(LkSystem { n, big_n, inverse, rows })
}

/// Chern character of the hermitian virtual bundle
/// `n! N^n L_0 - sum_k N^n (n+1)!/(n-k+1) E_k (x) L_k`, where `alpha_classes[k-1]`
/// is `ch(E_k)`. All inputs must share the cap `n + 1`.
pub fn build_l(lk: &LkSystem, alpha_classes: &[TruncPoly]) -> Result<TruncPoly> {
    let n = lk.n;
    let cap = n + 1;
    if alpha_classes.len() != n {
        return Err(LabError::InvalidInput(format!("expected {n} alpha classes, found {}", alpha_classes.len())));
    }
    for (idx, a) in alpha_classes.iter().enumerate() {
        if a.cap() != cap {
            return Err(LabError::DegreeCapMismatch { expected: cap, found: a.cap() });
        }
        let k = idx + 1;
        if let Some(v) = a.valuation() {
            if v < k {
                return Err(LabError::InvalidInput(format!("alpha_{k} has a nonzero coefficient in degree {v} < {k}")));
            }
        }
    }
    let big_n = lk.big_n_rational();
    let n_pow = (0..n).fold(Rational::one(), |acc, _| acc * &big_n);
    let lead = Rational::from_integer(factorial(n)) * &n_pow;
    let mut out = lk.ch_lk(0).scale(&lead);
    for (idx, alpha) in alpha_classes.iter().enumerate() {
        let k = idx + 1;
        let weight = &n_pow * Rational::new(factorial(n + 1), BigInt::from(n - k + 1));
        let term = (alpha * &lk.ch_lk(k)).scale(&weight);
        out = &out - &term;
    }
    Ok(out)
}

/// Todd factor `1 + c1/2 + (c1^2 + c2)/12` truncated at `cap <= 2`.
pub fn todd(c1: &TruncPoly, c2: &TruncPoly, cap: usize) -> Result<TruncPoly> {
    if cap > 2 {
        return Err(LabError::UnsupportedDegree { degree: cap, max: 2 });
    }
    let c1 = c1.truncate(cap);
    let c2 = c2.truncate(cap);
    let sq = &c1 * &c1;
    let quad = (&sq + &c2).scale(&rat(1, 12));
    let lin = c1.scale(&rat(1, 2));
    Ok(&(&TruncPoly::one(cap) + &lin) + &quad)
}

/// Integrated trace `int tr[e^{k omega + i Theta/2pi} Td]^{n,n}` for a rank `r`
/// degree `d` bundle over the flat unit-volume torus (n = 1 only). The Higgs
/// bracket is traceless and contributes nothing.
pub fn c_kl_constant(n: usize, rank: u32, degree: i64, k: i64, _l: i64) -> Result<Rational> {
    if n != 1 {
        return Err(LabError::UnsupportedDimension(n));
    }
    if rank == 0 {
        return Err(LabError::InvalidInput("rank must be positive".into()));
    }
    Ok(int(rank as i64 * k + degree))
}

/// Largest absolute numerator appearing in an integer matrix, handy for reports.
pub fn max_abs_entry(rows: &[Vec<BigInt>]) -> BigInt {
    rows.iter().flatten().map(|v| v.abs()).max().unwrap_or_else(BigInt::zero)
}
