//! Bases, MUB systems, exact and numeric unbiasedness checks, and a few
//! standard constructions.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactmath::{
    hermitian_inner_product, parse_rational, rat, rational_sqrt, rational_to_string, ComplexMatrix,
    ExactMathError, ExactMatrix, GaussianRational, Rational,
};

pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MubError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("matrix is not unitary")]
    NotUnitary,
    #[error("bad parameter: {0}")]
    Parameter(String),
    #[error("malformed basis: {0}")]
    Malformed(String),
    #[error(transparent)]
    Exact(#[from] ExactMathError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryForm {
    Integral,
    Hadamard,
    Numeric,
}

/// One basis of `C^n`, stored column-wise as the columns of an `n x n`
/// matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum BasisMatrix {
    /// Exact Gaussian-rational entries.
    Integral(ExactMatrix),
    /// Exact numerators `g`; the true entry is `g / sqrt(n)`.
    Hadamard(ExactMatrix),
    /// True values as floats, for entries outside `Q(i)` (e.g. cube roots of unity).
    Numeric(ComplexMatrix),
}

impl BasisMatrix {
    pub fn identity(n: usize) -> Self {
        BasisMatrix::Integral(ExactMatrix::identity(n))
    }

    pub fn dim(&self) -> usize {
        match self {
            BasisMatrix::Integral(m) | BasisMatrix::Hadamard(m) => m.rows(),
            BasisMatrix::Numeric(m) => m.rows(),
        }
    }

    pub fn entry_form(&self) -> EntryForm {
        match self {
            BasisMatrix::Integral(_) => EntryForm::Integral,
            BasisMatrix::Hadamard(_) => EntryForm::Hadamard,
            BasisMatrix::Numeric(_) => EntryForm::Numeric,
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, BasisMatrix::Numeric(_))
    }

    /// True entry values as floats.
    pub fn to_complex(&self) -> ComplexMatrix {
        match self {
            BasisMatrix::Integral(m) => m.to_complex(),
            BasisMatrix::Hadamard(g) => {
                let s = 1.0 / (g.rows() as f64).sqrt();
                g.to_complex().map(|z| z * s)
            }
            BasisMatrix::Numeric(m) => m.clone(),
        }
    }

    /// True entries as an exact matrix when they are Gaussian rational.
    pub fn to_exact(&self) -> Option<ExactMatrix> {
        match self {
            BasisMatrix::Integral(m) => Some(m.clone()),
            BasisMatrix::Hadamard(g) => {
                let root = rational_sqrt(&rat(g.rows() as i64, 1))?;
                let inv = GaussianRational::from_rational(root.recip());
                Some(g.scale(&inv))
            }
            BasisMatrix::Numeric(_) => None,
        }
    }

    fn check_square(&self) -> Result<(), MubError> {
        let (r, c) = match self {
            BasisMatrix::Integral(m) | BasisMatrix::Hadamard(m) => m.shape(),
            BasisMatrix::Numeric(m) => m.shape(),
        };
        if r != c || r == 0 {
            return Err(MubError::Malformed(format!("basis matrix is {r}x{c}")));
        }
        Ok(())
    }

    /// Columns orthonormal: exactly for the exact forms, within `tol` otherwise.
    pub fn is_orthonormal(&self, tol: f64) -> Result<bool, MubError> {
        self.check_square()?;
        Ok(match self {
            BasisMatrix::Integral(m) => m.adjoint().matmul(m)? == ExactMatrix::identity(m.rows()),
            BasisMatrix::Hadamard(g) => {
                let n = GaussianRational::from_ints(g.rows() as i64, 0);
                g.adjoint().matmul(g)? == ExactMatrix::identity(g.rows()).scale(&n)
            }
            BasisMatrix::Numeric(m) => m.adjoint().matmul(m)?.is_identity_within(tol),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MubSystem {
    pub dim: usize,
    pub bases: Vec<BasisMatrix>,
}

impl MubSystem {
    pub fn new(dim: usize, bases: Vec<BasisMatrix>) -> Result<Self, MubError> {
        for b in &bases {
            b.check_square()?;
            if b.dim() != dim {
                return Err(MubError::DimensionMismatch(dim, b.dim()));
            }
        }
        Ok(Self { dim, bases })
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.bases.iter().all(BasisMatrix::is_exact)
    }
}

/// Verdict for one ordered pair of bases. Indices are 1-based positions in
/// the system (0 when checking a standalone pair).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub first: usize,
    pub second: usize,
    pub unbiased: bool,
    pub exact: bool,
    /// First failing column pair `(i, j)` (1-based), if any.
    pub failing_columns: Option<(usize, usize)>,
    /// max |(|<a_i,b_j>|^2 - 1/n)| over all column pairs.
    pub max_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisReport {
    pub index: usize,
    pub entry_form: EntryForm,
    pub orthonormal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemReport {
    pub dim: usize,
    pub bases: Vec<BasisReport>,
    pub pairs: Vec<PairReport>,
    /// More than `n + 1` bases were supplied.
    pub exceeds_bound: bool,
    pub all_pass: bool,
}

impl SystemReport {
    pub fn failures(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .bases
            .iter()
            .filter(|b| !b.orthonormal)
            .map(|b| format!("basis {} is not orthonormal", b.index))
            .collect();
        for p in self.pairs.iter().filter(|p| !p.unbiased) {
            let cols = p
                .failing_columns
                .map(|(i, j)| format!(" (columns {i},{j})"))
                .unwrap_or_default();
            out.push(format!("bases {} and {} are not unbiased{cols}", p.first, p.second));
        }
        if self.exceeds_bound {
            out.push(format!("more than {} bases", self.dim + 1));
        }
        out
    }
}

/// Squared-modulus test `|<a_i, b_j>|^2 = 1/n` with the `1/sqrt(n)` scale of
/// Hadamard-type bases carried symbolically:
/// integral/integral → `1/n`, integral/hadamard → `1`, hadamard/hadamard → `n`.
pub fn verify_unbiased_pair(a: &BasisMatrix, b: &BasisMatrix, tol: f64) -> Result<PairReport, MubError> {
    a.check_square()?;
    b.check_square()?;
    let n = a.dim();
    if b.dim() != n {
        return Err(MubError::DimensionMismatch(n, b.dim()));
    }
    let mut report = PairReport {
        first: 0,
        second: 0,
        unbiased: true,
        exact: a.is_exact() && b.is_exact(),
        failing_columns: None,
        max_deviation: 0.0,
    };
    if report.exact {
        let (ma, mb, target) = match (a, b) {
            (BasisMatrix::Integral(x), BasisMatrix::Integral(y)) => (x, y, rat(1, n as i64)),
            (BasisMatrix::Integral(x), BasisMatrix::Hadamard(y))
            | (BasisMatrix::Hadamard(x), BasisMatrix::Integral(y)) => (x, y, rat(1, 1)),
            (BasisMatrix::Hadamard(x), BasisMatrix::Hadamard(y)) => (x, y, rat(n as i64, 1)),
            _ => unreachable!(),
        };
        // Deviations are reported on the 1/n scale.
        let rescale = rat(1, n as i64) / &target;
        let (ca, cb) = (ma.columns(), mb.columns());
        for (i, u) in ca.iter().enumerate() {
            for (j, v) in cb.iter().enumerate() {
                let sq = hermitian_inner_product(u, v)?.norm_sqr();
                if sq != target {
                    let dev = ((&sq - &target) * &rescale).to_f64().unwrap_or(f64::INFINITY).abs();
                    report.max_deviation = report.max_deviation.max(dev);
                    if report.unbiased {
                        report.unbiased = false;
                        report.failing_columns = Some((i + 1, j + 1));
                    }
                }
            }
        }
    } else {
        let (ma, mb) = (a.to_complex(), b.to_complex());
        let (ca, cb) = (ma.columns(), mb.columns());
        let target = 1.0 / n as f64;
        for (i, u) in ca.iter().enumerate() {
            for (j, v) in cb.iter().enumerate() {
                let dev = (hermitian_inner_product(u, v)?.norm_sqr() - target).abs();
                report.max_deviation = report.max_deviation.max(dev);
                if (dev.is_nan() || dev > tol) && report.unbiased {
                    report.unbiased = false;
                    report.failing_columns = Some((i + 1, j + 1));
                }
            }
        }
    }
    Ok(report)
}

/// Orthonormality of every basis and unbiasedness of every pair. Never
/// fails on a bad system; failures go into the report.
pub fn verify_system(s: &MubSystem, tol: f64) -> Result<SystemReport, MubError> {
    let bases = s
        .bases
        .iter()
        .enumerate()
        .map(|(k, b)| {
            Ok(BasisReport {
                index: k + 1,
                entry_form: b.entry_form(),
                orthonormal: b.is_orthonormal(tol)?,
            })
        })
        .collect::<Result<Vec<_>, MubError>>()?;
    let idx: Vec<(usize, usize)> = (0..s.len()).flat_map(|i| (i + 1..s.len()).map(move |j| (i, j))).collect();
    let pairs = idx
        .par_iter()
        .map(|&(i, j)| {
            let mut r = verify_unbiased_pair(&s.bases[i], &s.bases[j], tol)?;
            r.first = i + 1;
            r.second = j + 1;
            Ok(r)
        })
        .collect::<Result<Vec<_>, MubError>>()?;
    let exceeds_bound = s.len() > s.dim + 1;
    let all_pass = !exceeds_bound && bases.iter().all(|b| b.orthonormal) && pairs.iter().all(|p| p.unbiased);
    Ok(SystemReport {
        dim: s.dim,
        bases,
        pairs,
        exceeds_bound,
        all_pass,
    })
}

/// `{P A_1, ..., P A_k}` for an exactly unitary `P`.
pub fn apply_unitary(p: &ExactMatrix, s: &MubSystem) -> Result<MubSystem, MubError> {
    if !p.is_square() || p.rows() != s.dim {
        return Err(MubError::DimensionMismatch(s.dim, p.rows()));
    }
    if !p.is_unitary()? {
        return Err(MubError::NotUnitary);
    }
    let pc = p.to_complex();
    let bases = s
        .bases
        .iter()
        .map(|b| {
            Ok(match b {
                BasisMatrix::Integral(m) => BasisMatrix::Integral(p.matmul(m)?),
                BasisMatrix::Hadamard(g) => BasisMatrix::Hadamard(p.matmul(g)?),
                BasisMatrix::Numeric(m) => BasisMatrix::Numeric(pc.matmul(m)?),
            })
        })
        .collect::<Result<Vec<_>, MubError>>()?;
    MubSystem::new(s.dim, bases)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Identity(usize),
    /// `{E, B_1, B_2}` in dimension 2.
    Dim2Triple,
    IdentityFourier(usize),
    PrimeComplete(usize),
    /// The five bases `{I, B_2, ..., B_5}` of the four-dimensional example.
    PaperDim4,
}

impl std::str::FromStr for Family {
    type Err = MubError;
    /// `identity:N`, `dim2_triple`, `identity_fourier:N`, `prime_complete:P`, `paper_dim4`.
    fn from_str(s: &str) -> Result<Self, MubError> {
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (s, None),
        };
        let num = || -> Result<usize, MubError> {
            arg.ok_or_else(|| MubError::Parameter(format!("family {name} needs a size, e.g. {name}:3")))?
                .parse()
                .map_err(|_| MubError::Parameter(format!("bad size in {s:?}")))
        };
        match name {
            "identity" => Ok(Family::Identity(num()?)),
            "dim2_triple" => Ok(Family::Dim2Triple),
            "identity_fourier" => Ok(Family::IdentityFourier(num()?)),
            "prime_complete" => Ok(Family::PrimeComplete(num()?)),
            "paper_dim4" => Ok(Family::PaperDim4),
            _ => Err(MubError::Parameter(format!("unknown family {name:?}"))),
        }
    }
}

fn gi(rows: &[&[(i64, i64)]]) -> ExactMatrix {
    ExactMatrix::from_rows(
        rows.iter()
            .map(|r| r.iter().map(|&(a, b)| GaussianRational::from_ints(a, b)).collect())
            .collect(),
    )
    .expect("static matrix is rectangular")
}

pub fn is_prime(p: usize) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

fn fourier(n: usize) -> BasisMatrix {
    // Exact whenever every n-th root of unity lies in Q(i).
    let root: Option<GaussianRational> = match n {
        1 => Some(GaussianRational::from_ints(1, 0)),
        2 => Some(GaussianRational::from_ints(-1, 0)),
        4 => Some(GaussianRational::from_ints(0, 1)),
        _ => None,
    };
    match root {
        Some(w) => {
            let mut pows = vec![GaussianRational::from_ints(1, 0)];
            for k in 1..n {
                pows.push(&pows[k - 1] * &w);
            }
            let mut m = ExactMatrix::zeros(n, n);
            for j in 0..n {
                for k in 0..n {
                    m.set(j, k, pows[(j * k) % n].clone());
                }
            }
            BasisMatrix::Hadamard(m)
        }
        None => {
            let s = 1.0 / (n as f64).sqrt();
            let mut m = ComplexMatrix::zeros(n, n);
            for j in 0..n {
                for k in 0..n {
                    let phase = 2.0 * PI * ((j * k) % n) as f64 / n as f64;
                    m.set(j, k, Complex64::from_polar(s, phase));
                }
            }
            BasisMatrix::Numeric(m)
        }
    }
}

pub fn construct(family: Family) -> Result<MubSystem, MubError> {
    match family {
        Family::Identity(n) => {
            if n == 0 {
                return Err(MubError::Parameter("dimension must be positive".into()));
            }
            MubSystem::new(n, vec![BasisMatrix::identity(n)])
        }
        Family::Dim2Triple => MubSystem::new(
            2,
            vec![
                BasisMatrix::identity(2),
                BasisMatrix::Hadamard(gi(&[&[(1, 0), (1, 0)], &[(1, 0), (-1, 0)]])),
                BasisMatrix::Hadamard(gi(&[&[(1, 0), (1, 0)], &[(0, 1), (0, -1)]])),
            ],
        ),
        Family::IdentityFourier(n) => {
            if n == 0 {
                return Err(MubError::Parameter("dimension must be positive".into()));
            }
            MubSystem::new(n, vec![BasisMatrix::identity(n), fourier(n)])
        }
        Family::PrimeComplete(p) => {
            if p == 2 || !is_prime(p) {
                return Err(MubError::Parameter(format!("{p} is not an odd prime")));
            }
            let s = 1.0 / (p as f64).sqrt();
            let mut bases = vec![BasisMatrix::identity(p)];
            for m in 0..p {
                let mut b = ComplexMatrix::zeros(p, p);
                for k in 0..p {
                    for t in 0..p {
                        let e = (m * k * k + t * k) % p;
                        b.set(k, t, Complex64::from_polar(s, 2.0 * PI * e as f64 / p as f64));
                    }
                }
                bases.push(BasisMatrix::Numeric(b));
            }
            MubSystem::new(p, bases)
        }
        Family::PaperDim4 => {
            let (o, m, i, mi) = ((1, 0), (-1, 0), (0, 1), (0, -1));
            MubSystem::new(
                4,
                vec![
                    BasisMatrix::identity(4),
                    BasisMatrix::Hadamard(gi(&[&[o, o, o, o], &[o, o, m, m], &[o, m, m, o], &[o, m, o, m]])),
                    BasisMatrix::Hadamard(gi(&[&[o, o, o, o], &[m, m, o, o], &[mi, i, i, mi], &[mi, i, mi, i]])),
                    BasisMatrix::Hadamard(gi(&[&[o, o, o, o], &[mi, mi, i, i], &[mi, i, i, mi], &[m, o, m, o]])),
                    BasisMatrix::Hadamard(gi(&[&[o, o, o, o], &[mi, mi, i, i], &[m, o, m, o], &[mi, i, i, mi]])),
                ],
            )
        }
    }
}

// ---- JSON ----

/// Either an exact rational string or a decimal float.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WireScalar {
    Exact(String),
    Float(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireEntry {
    pub re: WireScalar,
    pub im: WireScalar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireBasis {
    /// `integral` or `hadamard`; float entries are always true values for
    /// `integral`, and numerators for `hadamard`.
    pub entry_form: EntryForm,
    /// Row-major; column `k` of the matrix is the `k`-th basis vector.
    pub entries: Vec<Vec<WireEntry>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireMubSystem {
    pub dim: usize,
    pub bases: Vec<WireBasis>,
}

fn exact_entry(z: &GaussianRational) -> WireEntry {
    WireEntry {
        re: WireScalar::Exact(rational_to_string(&z.re)),
        im: WireScalar::Exact(rational_to_string(&z.im)),
    }
}

impl From<&BasisMatrix> for WireBasis {
    fn from(b: &BasisMatrix) -> Self {
        match b {
            BasisMatrix::Integral(m) | BasisMatrix::Hadamard(m) => WireBasis {
                entry_form: b.entry_form(),
                entries: m.to_rows().iter().map(|r| r.iter().map(exact_entry).collect()).collect(),
            },
            BasisMatrix::Numeric(m) => WireBasis {
                entry_form: EntryForm::Integral,
                entries: m
                    .to_rows()
                    .iter()
                    .map(|r| {
                        r.iter()
                            .map(|z| WireEntry {
                                re: WireScalar::Float(z.re),
                                im: WireScalar::Float(z.im),
                            })
                            .collect()
                    })
                    .collect(),
            },
        }
    }
}

impl TryFrom<&WireBasis> for BasisMatrix {
    type Error = MubError;
    fn try_from(w: &WireBasis) -> Result<Self, MubError> {
        let any_float = w
            .entries
            .iter()
            .flatten()
            .any(|e| matches!(e.re, WireScalar::Float(_)) || matches!(e.im, WireScalar::Float(_)));
        let bad = |e: ExactMathError| MubError::Malformed(e.to_string());
        if any_float {
            let f = |s: &WireScalar| -> Result<f64, MubError> {
                match s {
                    WireScalar::Float(x) => Ok(*x),
                    WireScalar::Exact(t) => parse_rational(t).map_err(bad)?.to_f64().ok_or_else(|| {
                        MubError::Malformed(format!("{t} out of float range"))
                    }),
                }
            };
            let rows = w
                .entries
                .iter()
                .map(|r| r.iter().map(|e| Ok(Complex64::new(f(&e.re)?, f(&e.im)?))).collect())
                .collect::<Result<Vec<Vec<_>>, MubError>>()?;
            let mut m = ComplexMatrix::from_rows(rows)?;
            if w.entry_form == EntryForm::Hadamard {
                let s = 1.0 / (m.rows() as f64).sqrt();
                m = m.map(|z| z * s);
            }
            return Ok(BasisMatrix::Numeric(m));
        }
        let q = |s: &WireScalar| -> Result<Rational, MubError> {
            match s {
                WireScalar::Exact(t) => parse_rational(t).map_err(bad),
                WireScalar::Float(_) => unreachable!(),
            }
        };
        let rows = w
            .entries
            .iter()
            .map(|r| r.iter().map(|e| Ok(GaussianRational::new(q(&e.re)?, q(&e.im)?))).collect())
            .collect::<Result<Vec<Vec<_>>, MubError>>()?;
        let m = ExactMatrix::from_rows(rows)?;
        let b = match w.entry_form {
            EntryForm::Hadamard => BasisMatrix::Hadamard(m),
            _ => BasisMatrix::Integral(m),
        };
        b.check_square()?;
        Ok(b)
    }
}

impl MubSystem {
    pub fn to_wire(&self) -> WireMubSystem {
        WireMubSystem {
            dim: self.dim,
            bases: self.bases.iter().map(WireBasis::from).collect(),
        }
    }

    pub fn from_wire(w: &WireMubSystem) -> Result<Self, MubError> {
        let bases = w.bases.iter().map(BasisMatrix::try_from).collect::<Result<Vec<_>, _>>()?;
        MubSystem::new(w.dim, bases)
    }
}
