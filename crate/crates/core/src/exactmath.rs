//! Exact Gaussian-rational scalars and small dense complex matrices.
//!
//! Everything here is exact when instantiated with [`GaussianRational`]. The
//! same generic [`Matrix`] is reused with [`Complex64`] entries for the
//! numeric paths, where equality tests take a tolerance.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactMathError {
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("vector length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("invalid rational literal {0:?}")]
    BadRational(String),
}

/// `n / d` as a [`Rational`]. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn parse_rational(s: &str) -> Result<Rational, ExactMathError> {
    let t = s.trim();
    let bad = || ExactMathError::BadRational(s.to_string());
    // `Ratio::from_str` rejects a leading '+', and accepts a zero denominator
    // only to panic later, so handle both up front.
    let t = t.strip_prefix('+').unwrap_or(t);
    if let Some((_, den)) = t.split_once('/') {
        if den.trim().trim_start_matches(['-', '+']).chars().all(|c| c == '0') {
            return Err(bad());
        }
    }
    Rational::from_str(t).map_err(|_| bad())
}

/// Text form `p/q`, or `p` when `q = 1`.
pub fn rational_to_string(r: &Rational) -> String {
    r.to_string()
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Huge numerator/denominator: fall back to a ratio of f64s.
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Exact square root of a non-negative rational, if it is a rational square.
pub fn rational_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &n * &n == *r.numer() && &d * &d == *r.denom() {
        Some(Rational::new(n, d))
    } else {
        None
    }
}

/// Complex number with rational real and imaginary parts.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct GaussianRational {
    pub re: Rational,
    pub im: Rational,
}

impl GaussianRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        Self { re, im }
    }

    pub fn from_rational(re: Rational) -> Self {
        Self {
            re,
            im: Rational::zero(),
        }
    }

    pub fn from_ints(re: i64, im: i64) -> Self {
        Self::new(rat(re, 1), rat(im, 1))
    }

    pub fn i() -> Self {
        Self::from_ints(0, 1)
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -&self.im)
    }

    /// `|z|^2 = re^2 + im^2`.
    pub fn norm_sqr(&self) -> Rational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn scale(&self, r: &Rational) -> Self {
        Self::new(&self.re * r, &self.im * r)
    }

    pub fn inv(&self) -> Option<Self> {
        let d = self.norm_sqr();
        if d.is_zero() {
            return None;
        }
        Some(Self::new(&self.re / &d, -&self.im / &d))
    }

    pub fn to_complex64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }
}

impl fmt::Debug for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "{}*i", self.im),
            (false, false) if self.im.is_negative() => {
                write!(f, "{} - {}*i", self.re, -&self.im)
            }
            (false, false) => write!(f, "{} + {}*i", self.re, self.im),
        }
    }
}

impl From<Rational> for GaussianRational {
    fn from(r: Rational) -> Self {
        Self::from_rational(r)
    }
}

impl<'a> Add<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn add(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl<'a> Sub<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn sub(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl<'a> Mul<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn mul(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::new(-&self.re, -&self.im)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for GaussianRational {
            type Output = GaussianRational;
            fn $m(self, o: GaussianRational) -> GaussianRational {
                <&GaussianRational as $tr<&GaussianRational>>::$m(&self, &o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        -&self
    }
}

#[derive(Serialize, Deserialize)]
struct GaussianRationalWire {
    re: String,
    im: String,
}

impl Serialize for GaussianRational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        GaussianRationalWire {
            re: self.re.to_string(),
            im: self.im.to_string(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GaussianRational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = GaussianRationalWire::deserialize(d)?;
        let re = parse_rational(&w.re).map_err(serde::de::Error::custom)?;
        let im = parse_rational(&w.im).map_err(serde::de::Error::custom)?;
        Ok(Self { re, im })
    }
}

/// Field operations shared by the exact and the floating-point matrix paths.
pub trait Scalar: Clone + PartialEq + fmt::Debug + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn conj(&self) -> Self;
    /// Exact types ignore `tol`.
    fn is_negligible(&self, tol: f64) -> bool;
    fn to_c64(&self) -> Complex64;
}

impl Scalar for GaussianRational {
    fn zero() -> Self {
        Self::default()
    }
    fn one() -> Self {
        Self::from_ints(1, 0)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn conj(&self) -> Self {
        GaussianRational::conj(self)
    }
    fn is_negligible(&self, _tol: f64) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn to_c64(&self) -> Complex64 {
        self.to_complex64()
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn is_negligible(&self, tol: f64) -> bool {
        self.norm() <= tol
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
}

/// `sum_i a_i * conj(b_i)`.
pub fn hermitian_inner_product<T: Scalar>(a: &[T], b: &[T]) -> Result<T, ExactMathError> {
    if a.len() != b.len() {
        return Err(ExactMathError::LengthMismatch(a.len(), b.len()));
    }
    Ok(a
        .iter()
        .zip(b)
        .fold(T::zero(), |acc, (x, y)| acc.add(&x.mul(&y.conj()))))
}

/// Dense row-major matrix.
#[derive(Clone, PartialEq, Debug)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type ExactMatrix = Matrix<GaussianRational>;
pub type ComplexMatrix = Matrix<Complex64>;

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self, ExactMathError> {
        if data.len() != rows * cols {
            return Err(ExactMathError::LengthMismatch(rows * cols, data.len()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self, ExactMathError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(ExactMathError::LengthMismatch(c, row.len()));
            }
            data.extend(row);
        }
        Ok(Self {
            rows: r,
            cols: c,
            data,
        })
    }

    pub fn from_columns(cols: &[Vec<T>]) -> Result<Self, ExactMathError> {
        let c = cols.len();
        let r = cols.first().map_or(0, Vec::len);
        let mut m = Self::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            if col.len() != r {
                return Err(ExactMathError::LengthMismatch(r, col.len()));
            }
            for (i, v) in col.iter().enumerate() {
                m.data[i * c + j] = v.clone();
            }
        }
        Ok(m)
    }

    pub fn diagonal(d: &[T]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n, n);
        for (i, v) in d.iter().enumerate() {
            m.data[i * n + i] = v.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &T {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<T> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<T>> {
        (0..self.cols).map(|c| self.column(c)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    pub fn map<U, F: Fn(&T) -> U>(&self, f: F) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m.data[c * self.rows + r] = self.get(r, c).conj();
            }
        }
        m
    }

    pub fn matmul(&self, o: &Self) -> Result<Self, ExactMathError> {
        if self.cols != o.rows {
            return Err(ExactMathError::DimensionMismatch {
                expected: (self.cols, o.cols),
                found: o.shape(),
            });
        }
        let mut m = Self::zeros(self.rows, o.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_negligible(0.0) {
                    continue;
                }
                for c in 0..o.cols {
                    let idx = r * o.cols + c;
                    m.data[idx] = m.data[idx].add(&a.mul(o.get(k, c)));
                }
            }
        }
        Ok(m)
    }

    fn zip_with(&self, o: &Self, f: impl Fn(&T, &T) -> T) -> Result<Self, ExactMathError> {
        if self.shape() != o.shape() {
            return Err(ExactMathError::DimensionMismatch {
                expected: self.shape(),
                found: o.shape(),
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, o: &Self) -> Result<Self, ExactMathError> {
        self.zip_with(o, T::add)
    }

    pub fn sub(&self, o: &Self) -> Result<Self, ExactMathError> {
        self.zip_with(o, T::sub)
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|v| v.mul(s))
    }

    pub fn trace(&self) -> Result<T, ExactMathError> {
        if !self.is_square() {
            return Err(ExactMathError::NotSquare(self.rows, self.cols));
        }
        Ok((0..self.rows).fold(T::zero(), |acc, i| acc.add(self.get(i, i))))
    }

    pub fn is_zero_within(&self, tol: f64) -> bool {
        self.data.iter().all(|v| v.is_negligible(tol))
    }

    pub fn approx_eq(&self, o: &Self, tol: f64) -> bool {
        self.shape() == o.shape()
            && self
                .data
                .iter()
                .zip(&o.data)
                .all(|(a, b)| a.sub(b).is_negligible(tol))
    }

    pub fn is_identity_within(&self, tol: f64) -> bool {
        self.is_square() && self.approx_eq(&Self::identity(self.rows), tol)
    }

    fn require_square(&self) -> Result<(), ExactMathError> {
        if self.is_square() {
            Ok(())
        } else {
            Err(ExactMathError::NotSquare(self.rows, self.cols))
        }
    }

    /// `A A† = A† A`.
    pub fn is_normal_within(&self, tol: f64) -> Result<bool, ExactMathError> {
        self.require_square()?;
        let adj = self.adjoint();
        Ok(self.matmul(&adj)?.approx_eq(&adj.matmul(self)?, tol))
    }

    /// `A A† = I`.
    pub fn is_unitary_within(&self, tol: f64) -> Result<bool, ExactMathError> {
        self.require_square()?;
        Ok(self.matmul(&self.adjoint())?.is_identity_within(tol))
    }

    /// `A B = B A`.
    pub fn commutes_within(&self, o: &Self, tol: f64) -> Result<bool, ExactMathError> {
        self.require_square()?;
        if self.shape() != o.shape() {
            return Err(ExactMathError::DimensionMismatch {
                expected: self.shape(),
                found: o.shape(),
            });
        }
        Ok(self.matmul(o)?.approx_eq(&o.matmul(self)?, tol))
    }

    pub fn is_normal(&self) -> Result<bool, ExactMathError> {
        self.is_normal_within(0.0)
    }

    pub fn is_unitary(&self) -> Result<bool, ExactMathError> {
        self.is_unitary_within(0.0)
    }

    pub fn commutes(&self, o: &Self) -> Result<bool, ExactMathError> {
        self.commutes_within(o, 0.0)
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        self.map(T::to_c64)
    }
}

/// `tr(A† B)`.
pub fn trace_inner_product<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<T, ExactMathError> {
    if !a.is_square() {
        return Err(ExactMathError::NotSquare(a.rows, a.cols));
    }
    if a.shape() != b.shape() {
        return Err(ExactMathError::DimensionMismatch {
            expected: a.shape(),
            found: b.shape(),
        });
    }
    // tr(A† B) = sum_{r,c} conj(a_rc) b_rc
    Ok(a
        .data
        .iter()
        .zip(&b.data)
        .fold(T::zero(), |acc, (x, y)| acc.add(&x.conj().mul(y))))
}

/// Outer product `|u><v|`.
pub fn outer<T: Scalar>(u: &[T], v: &[T]) -> Matrix<T> {
    let mut m = Matrix::zeros(u.len(), v.len());
    for (i, a) in u.iter().enumerate() {
        for (j, b) in v.iter().enumerate() {
            m.set(i, j, a.mul(&b.conj()));
        }
    }
    m
}
