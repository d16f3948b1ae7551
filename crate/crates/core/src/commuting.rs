//! Correspondence between MUB systems and classes of commuting, pairwise
//! trace-orthogonal normal matrices.
//!
//! For basis `{psi_i}` and weight vector `w_t` the class matrix is
//! `U_t = sum_i w_ti |psi_i><psi_i|`. Weights are stored scaled by `sqrt(n)`
//! relative to the orthonormal auxiliary vectors, so `w_1 = (1, ..., 1)` and
//! `U_1 = I`.

use std::f64::consts::PI;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactmath::{
    hermitian_inner_product, outer, rat, rational_sqrt, trace_inner_product, ComplexMatrix, ExactMathError,
    ExactMatrix, GaussianRational, Rational, Scalar,
};
use crate::mub::{
    verify_system, BasisMatrix, MubError, MubSystem, SystemReport, WireEntry, WireScalar,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CommutingError {
    #[error("auxiliary basis invalid: {}", .0.join("; "))]
    InvalidAux(Vec<String>),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("class certificates fail: {}", .0.join("; "))]
    CertificateFailure(Vec<String>),
    #[error("class {class}: eigenvalues cluster within {tol} after {attempts} random combinations")]
    Degenerate { class: usize, tol: f64, attempts: usize },
    #[error("unknown auxiliary preset {0:?} (expected fourier, gram-schmidt or paper-n4)")]
    UnknownPreset(String),
    #[error("malformed class set: {0}")]
    Malformed(String),
    #[error(transparent)]
    Mub(#[from] MubError),
    #[error(transparent)]
    Exact(#[from] ExactMathError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuxPreset {
    Fourier,
    GramSchmidt,
    PaperN4,
}

impl FromStr for AuxPreset {
    type Err = CommutingError;
    fn from_str(s: &str) -> Result<Self, CommutingError> {
        match s {
            "fourier" => Ok(AuxPreset::Fourier),
            "gram-schmidt" | "gram_schmidt" => Ok(AuxPreset::GramSchmidt),
            "paper-n4" | "paper_n4" => Ok(AuxPreset::PaperN4),
            _ => Err(CommutingError::UnknownPreset(s.to_string())),
        }
    }
}

/// Rows are the scaled weight vectors `w_t = sqrt(n) v_t`.
#[derive(Debug, Clone, PartialEq)]
pub enum Weights {
    Exact(ExactMatrix),
    Numeric(ComplexMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliaryBasis {
    pub dim: usize,
    pub weights: Weights,
    /// Accept vectors that are orthogonal but not unit norm.
    pub allow_unnormalized: bool,
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxReport {
    pub first_is_ones: bool,
    pub zero_sums: bool,
    pub orthogonal: bool,
    pub normalized: bool,
    pub problems: Vec<String>,
}

impl AuxiliaryBasis {
    pub fn preset(p: AuxPreset, n: usize) -> Result<Self, CommutingError> {
        match p {
            AuxPreset::PaperN4 => {
                if n != 4 {
                    return Err(CommutingError::DimensionMismatch(4, n));
                }
                let rows: Vec<Vec<GaussianRational>> = [[1, 1, 1, 1], [1, 0, -1, 0], [0, 1, 0, -1], [1, -1, 1, -1]]
                    .iter()
                    .map(|r| r.iter().map(|&a| GaussianRational::from_ints(a, 0)).collect())
                    .collect();
                Ok(Self {
                    dim: 4,
                    weights: Weights::Exact(ExactMatrix::from_rows(rows)?),
                    allow_unnormalized: true,
                    warning: Some(
                        "paper-n4 vectors v2 = (1,0,-1,0)/2 and v3 = (0,1,0,-1)/2 have norm 1/sqrt(2), not 1".into(),
                    ),
                })
            }
            AuxPreset::GramSchmidt => Ok(Self::gram_schmidt(n)),
            AuxPreset::Fourier => Ok(Self::fourier(n)),
        }
    }

    /// `v_1` = all-ones / sqrt(n), completed by Gram–Schmidt over `e_1 - e_j`.
    /// Exact when every scale `sqrt(n) / |u_t|` is rational.
    pub fn gram_schmidt(n: usize) -> Self {
        let dot = |a: &[Rational], b: &[Rational]| a.iter().zip(b).map(|(x, y)| x * y).sum::<Rational>();
        let mut us: Vec<Vec<Rational>> = vec![vec![Rational::one(); n]];
        for j in 1..n {
            let mut v = vec![Rational::zero(); n];
            v[0] = Rational::one();
            v[j] = -Rational::one();
            for u in us.clone() {
                let c = dot(&v, &u) / dot(&u, &u);
                for (vi, ui) in v.iter_mut().zip(&u) {
                    *vi -= &c * ui;
                }
            }
            us.push(v);
        }
        let nn = rat(n as i64, 1);
        let scales: Vec<Option<Rational>> = us.iter().map(|u| rational_sqrt(&(&nn / dot(u, u)))).collect();
        let weights = if scales.iter().all(Option::is_some) {
            let rows = us
                .iter()
                .zip(&scales)
                .map(|(u, s)| u.iter().map(|x| GaussianRational::from_rational(x * s.as_ref().unwrap())).collect())
                .collect();
            Weights::Exact(ExactMatrix::from_rows(rows).expect("square"))
        } else {
            let rows = us
                .iter()
                .map(|u| {
                    let s = (n as f64 / crate::exactmath::rational_to_f64(&dot(u, u))).sqrt();
                    u.iter().map(|x| Complex64::new(crate::exactmath::rational_to_f64(x) * s, 0.0)).collect()
                })
                .collect();
            Weights::Numeric(ComplexMatrix::from_rows(rows).expect("square"))
        };
        Self {
            dim: n,
            weights,
            allow_unnormalized: false,
            warning: None,
        }
    }

    /// `w_t = (omega^{(t-1)(i-1)})_i`; exact for `n` in {1, 2, 4}.
    pub fn fourier(n: usize) -> Self {
        let weights = match n {
            1 | 2 | 4 => {
                let w = match n {
                    1 => GaussianRational::from_ints(1, 0),
                    2 => GaussianRational::from_ints(-1, 0),
                    _ => GaussianRational::from_ints(0, 1),
                };
                let mut pows = vec![GaussianRational::from_ints(1, 0)];
                for k in 1..n {
                    pows.push(&pows[k - 1] * &w);
                }
                let mut m = ExactMatrix::zeros(n, n);
                for t in 0..n {
                    for i in 0..n {
                        m.set(t, i, pows[(t * i) % n].clone());
                    }
                }
                Weights::Exact(m)
            }
            _ => {
                let mut m = ComplexMatrix::zeros(n, n);
                for t in 0..n {
                    for i in 0..n {
                        m.set(t, i, Complex64::from_polar(1.0, 2.0 * PI * ((t * i) % n) as f64 / n as f64));
                    }
                }
                Weights::Numeric(m)
            }
        };
        Self {
            dim: n,
            weights,
            allow_unnormalized: false,
            warning: None,
        }
    }

    /// Checks `w_1 = 1`, zero entry sums for `t >= 2`, pairwise orthogonality
    /// and `|w_t|^2 = n`.
    pub fn validate(&self, tol: f64) -> AuxReport {
        fn check<T: Scalar>(w: &crate::exactmath::Matrix<T>, n: usize, tol: f64) -> AuxReport {
            let rows = w.to_rows();
            let mut r = AuxReport {
                first_is_ones: rows[0].iter().all(|x| x.sub(&T::one()).is_negligible(tol)),
                zero_sums: true,
                orthogonal: true,
                normalized: true,
                problems: Vec::new(),
            };
            if !r.first_is_ones {
                r.problems.push("first weight vector is not all ones".into());
            }
            let nscalar = (0..n).fold(T::zero(), |a, _| a.add(&T::one()));
            for (t, row) in rows.iter().enumerate() {
                let sum = row.iter().fold(T::zero(), |a, x| a.add(x));
                if t > 0 && !sum.is_negligible(tol) {
                    r.zero_sums = false;
                    r.problems.push(format!("entries of v_{} sum to {:?}", t + 1, sum));
                }
                let norm = hermitian_inner_product(row, row).expect("equal lengths");
                if !norm.sub(&nscalar).is_negligible(tol) {
                    r.normalized = false;
                    r.problems.push(format!("|v_{}|^2 = {:?}/n, expected 1", t + 1, norm));
                }
                for (s, other) in rows.iter().enumerate().skip(t + 1) {
                    let ip = hermitian_inner_product(row, other).expect("equal lengths");
                    if !ip.is_negligible(tol) {
                        r.orthogonal = false;
                        r.problems.push(format!("v_{} and v_{} are not orthogonal", t + 1, s + 1));
                    }
                }
            }
            r
        }
        match &self.weights {
            Weights::Exact(w) => check(w, self.dim, tol),
            Weights::Numeric(w) => check(w, self.dim, tol),
        }
    }
}

/// One class of `n` commuting normal matrices, first element the identity.
#[derive(Debug, Clone, PartialEq)]
pub enum Class {
    Exact(Vec<ExactMatrix>),
    Numeric(Vec<ComplexMatrix>),
}

impl Class {
    pub fn len(&self) -> usize {
        match self {
            Class::Exact(v) => v.len(),
            Class::Numeric(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_complex(&self) -> Vec<ComplexMatrix> {
        match self {
            Class::Exact(v) => v.iter().map(ExactMatrix::to_complex).collect(),
            Class::Numeric(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommutingClassSet {
    pub dim: usize,
    pub classes: Vec<Class>,
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub exact: bool,
    pub all_normal: bool,
    pub all_commute: bool,
    pub first_is_identity: bool,
    pub sizes_within_bound: bool,
    /// Trace-orthogonality over all matrices, identity counted once.
    pub orthogonal: bool,
    pub pairs_checked: usize,
    pub failures: Vec<String>,
    pub all_pass: bool,
}

/// `U_t = sum_i w_ti |psi_i><psi_i|` for every weight vector `w_t`.
pub fn classes_from_mubs(s: &MubSystem, aux: &AuxiliaryBasis) -> Result<CommutingClassSet, CommutingError> {
    if aux.dim != s.dim {
        return Err(CommutingError::DimensionMismatch(s.dim, aux.dim));
    }
    let ar = aux.validate(1e-12);
    if !(ar.first_is_ones && ar.zero_sums && ar.orthogonal && (ar.normalized || aux.allow_unnormalized)) {
        return Err(CommutingError::InvalidAux(ar.problems));
    }
    let n = s.dim;
    let classes = s
        .bases
        .iter()
        .map(|b| -> Result<Class, CommutingError> {
            match (b, &aux.weights) {
                (BasisMatrix::Integral(m) | BasisMatrix::Hadamard(m), Weights::Exact(w)) => {
                    // Hadamard columns g carry 1/sqrt(n): |psi><psi| = g g† / n.
                    let scale = match b {
                        BasisMatrix::Hadamard(_) => GaussianRational::from_rational(rat(1, n as i64)),
                        _ => GaussianRational::from_ints(1, 0),
                    };
                    let projectors: Vec<ExactMatrix> =
                        m.columns().iter().map(|c| outer(c, c).scale(&scale)).collect();
                    let mats = (0..n)
                        .map(|t| {
                            projectors.iter().enumerate().try_fold(ExactMatrix::zeros(n, n), |acc, (i, p)| {
                                acc.add(&p.scale(w.get(t, i)))
                            })
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(Class::Exact(mats))
                }
                _ => {
                    let m = b.to_complex();
                    let w = match &aux.weights {
                        Weights::Exact(w) => w.to_complex(),
                        Weights::Numeric(w) => w.clone(),
                    };
                    let projectors: Vec<ComplexMatrix> = m.columns().iter().map(|c| outer(c, c)).collect();
                    let mats = (0..n)
                        .map(|t| {
                            projectors.iter().enumerate().try_fold(ComplexMatrix::zeros(n, n), |acc, (i, p)| {
                                acc.add(&p.scale(w.get(t, i)))
                            })
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(Class::Numeric(mats))
                }
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let set = CommutingClassSet {
        dim: n,
        classes,
        warning: aux.warning.clone(),
    };
    let rep = verify_classes(&set, 1e-10)?;
    if !rep.all_pass {
        return Err(CommutingError::CertificateFailure(rep.failures));
    }
    Ok(set)
}

enum Mats {
    Exact(Vec<Vec<ExactMatrix>>),
    Numeric(Vec<Vec<ComplexMatrix>>),
}

fn verify_generic<T: Scalar>(classes: &[Vec<crate::exactmath::Matrix<T>>], n: usize, tol: f64, exact: bool) -> Result<ClassReport, CommutingError> {
    let normal_ok = |m: &crate::exactmath::Matrix<T>| -> Result<bool, ExactMathError> {
        if exact { m.is_normal() } else { m.is_normal_within(tol) }
    };
    let comm_ok = |a: &crate::exactmath::Matrix<T>, b: &crate::exactmath::Matrix<T>| -> Result<bool, ExactMathError> {
        if exact { a.commutes(b) } else { a.commutes_within(b, tol) }
    };
    let identity = crate::exactmath::Matrix::<T>::identity(n);
    let mut rep = ClassReport {
        exact,
        all_normal: true,
        all_commute: true,
        first_is_identity: true,
        sizes_within_bound: true,
        orthogonal: true,
        pairs_checked: 0,
        failures: Vec::new(),
        all_pass: false,
    };
    for (c, class) in classes.iter().enumerate() {
        if class.len() > n {
            rep.sizes_within_bound = false;
            rep.failures.push(format!("class {} has {} > {n} matrices", c + 1, class.len()));
        }
        for m in class {
            if m.shape() != (n, n) {
                return Err(CommutingError::Malformed(format!("class {} has a {:?} matrix", c + 1, m.shape())));
            }
        }
        match class.first() {
            Some(m) if m.approx_eq(&identity, if exact { 0.0 } else { tol }) => {}
            _ => {
                rep.first_is_identity = false;
                rep.failures.push(format!("class {} does not start with the identity", c + 1));
            }
        }
        for (k, m) in class.iter().enumerate() {
            if !normal_ok(m)? {
                rep.all_normal = false;
                rep.failures.push(format!("matrix {} of class {} is not normal", k + 1, c + 1));
            }
            for (l, o) in class.iter().enumerate().skip(k + 1) {
                if !comm_ok(m, o)? {
                    rep.all_commute = false;
                    rep.failures.push(format!("matrices {} and {} of class {} do not commute", k + 1, l + 1, c + 1));
                }
            }
        }
    }
    // Identity counted once.
    let mut flat: Vec<(usize, usize, &crate::exactmath::Matrix<T>)> = Vec::new();
    let mut seen_identity = false;
    for (c, class) in classes.iter().enumerate() {
        for (k, m) in class.iter().enumerate() {
            if m.approx_eq(&identity, if exact { 0.0 } else { tol }) {
                if seen_identity {
                    continue;
                }
                seen_identity = true;
            }
            flat.push((c, k, m));
        }
    }
    let pairs: Vec<(usize, usize)> = (0..flat.len()).flat_map(|a| (a + 1..flat.len()).map(move |b| (a, b))).collect();
    rep.pairs_checked = pairs.len();
    let bad: Vec<String> = pairs
        .par_iter()
        .filter_map(|&(a, b)| {
            let ip = trace_inner_product(flat[a].2, flat[b].2).ok()?;
            let zero = if exact { ip == T::zero() } else { ip.is_negligible(tol) };
            (!zero).then(|| {
                format!(
                    "<C{}[{}], C{}[{}]> = {:?} is not zero",
                    flat[a].0 + 1,
                    flat[a].1 + 1,
                    flat[b].0 + 1,
                    flat[b].1 + 1,
                    ip
                )
            })
        })
        .collect();
    if !bad.is_empty() {
        rep.orthogonal = false;
        rep.failures.extend(bad);
    }
    rep.all_pass = rep.all_normal && rep.all_commute && rep.first_is_identity && rep.sizes_within_bound && rep.orthogonal;
    Ok(rep)
}

/// Normality, intra-class commutation, global trace-orthogonality (identity
/// deduplicated) and the class-size bound. Exact when every class is exact.
pub fn verify_classes(c: &CommutingClassSet, tol: f64) -> Result<ClassReport, CommutingError> {
    let mats = if c.classes.iter().all(|k| matches!(k, Class::Exact(_))) {
        Mats::Exact(
            c.classes
                .iter()
                .map(|k| match k {
                    Class::Exact(v) => v.clone(),
                    Class::Numeric(_) => unreachable!(),
                })
                .collect(),
        )
    } else {
        Mats::Numeric(c.classes.iter().map(Class::to_complex).collect())
    };
    match mats {
        Mats::Exact(v) => verify_generic(&v, c.dim, tol, true),
        Mats::Numeric(v) => verify_generic(&v, c.dim, tol, false),
    }
}

fn to_dmatrix(m: &ComplexMatrix) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.rows(), m.cols(), |r, c| *m.get(r, c))
}

const MAX_ATTEMPTS: usize = 8;

/// Simultaneously diagonalizes each class through a random Hermitian
/// combination and returns the eigenvector matrices as bases, together with
/// the numeric verification of the recovered system.
pub fn mubs_from_classes(
    c: &CommutingClassSet,
    tol: f64,
    seed: u64,
) -> Result<(MubSystem, SystemReport), CommutingError> {
    let rep = verify_classes(c, tol)?;
    if !rep.all_pass {
        return Err(CommutingError::CertificateFailure(rep.failures));
    }
    let n = c.dim;
    let mut bases = Vec::with_capacity(c.classes.len());
    for (ci, class) in c.classes.iter().enumerate() {
        let mats: Vec<DMatrix<Complex64>> = class.to_complex().iter().map(to_dmatrix).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(ci as u64);
        let mut found = None;
        for _ in 0..MAX_ATTEMPTS {
            let mut h = DMatrix::<Complex64>::zeros(n, n);
            for m in mats.iter().skip(1) {
                let (a, b): (f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                let herm = (m + m.adjoint()) * Complex64::new(0.5 * a, 0.0);
                let anti = (m - m.adjoint()) * Complex64::new(0.0, -0.5 * b);
                h += herm + anti;
            }
            let eig = SymmetricEigen::new(h);
            let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            if ev.windows(2).all(|w| w[1] - w[0] > tol) {
                found = Some(eig.eigenvectors);
                break;
            }
        }
        let v = found.ok_or(CommutingError::Degenerate {
            class: ci + 1,
            tol,
            attempts: MAX_ATTEMPTS,
        })?;
        // every class member must be diagonal in the recovered frame
        for m in &mats {
            let d = v.adjoint() * m * &v;
            let off = (0..n)
                .flat_map(|r| (0..n).map(move |s| (r, s)))
                .filter(|(r, s)| r != s)
                .map(|(r, s)| d[(r, s)].norm())
                .fold(0.0, f64::max);
            if off > tol.max(1e-12) * 1e3 {
                return Err(CommutingError::Degenerate {
                    class: ci + 1,
                    tol,
                    attempts: MAX_ATTEMPTS,
                });
            }
        }
        let rows = (0..n).map(|r| (0..n).map(|s| v[(r, s)]).collect()).collect();
        bases.push(BasisMatrix::Numeric(ComplexMatrix::from_rows(rows)?));
    }
    let sys = MubSystem::new(n, bases)?;
    let report = verify_system(&sys, tol)?;
    Ok((sys, report))
}

// ---- JSON ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireClass {
    /// Each matrix row-major.
    pub matrices: Vec<Vec<Vec<WireEntry>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireClassSet {
    pub dim: usize,
    pub classes: Vec<WireClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

fn exact_rows(m: &ExactMatrix) -> Vec<Vec<WireEntry>> {
    m.to_rows()
        .iter()
        .map(|r| {
            r.iter()
                .map(|z| WireEntry {
                    re: WireScalar::Exact(crate::exactmath::rational_to_string(&z.re)),
                    im: WireScalar::Exact(crate::exactmath::rational_to_string(&z.im)),
                })
                .collect()
        })
        .collect()
}

fn float_rows(m: &ComplexMatrix) -> Vec<Vec<WireEntry>> {
    m.to_rows()
        .iter()
        .map(|r| {
            r.iter()
                .map(|z| WireEntry {
                    re: WireScalar::Float(z.re),
                    im: WireScalar::Float(z.im),
                })
                .collect()
        })
        .collect()
}

impl CommutingClassSet {
    pub fn to_wire(&self) -> WireClassSet {
        WireClassSet {
            dim: self.dim,
            classes: self
                .classes
                .iter()
                .map(|c| WireClass {
                    matrices: match c {
                        Class::Exact(v) => v.iter().map(exact_rows).collect(),
                        Class::Numeric(v) => v.iter().map(float_rows).collect(),
                    },
                })
                .collect(),
            warning: self.warning.clone(),
        }
    }

    pub fn from_wire(w: &WireClassSet) -> Result<Self, CommutingError> {
        let classes = w
            .classes
            .iter()
            .map(|c| {
                let float = c.matrices.iter().flatten().flatten().any(|e| {
                    matches!(e.re, WireScalar::Float(_)) || matches!(e.im, WireScalar::Float(_))
                });
                // Reuse the basis parser: a matrix is a square grid of entries.
                let parse = |m: &Vec<Vec<WireEntry>>| {
                    BasisMatrix::try_from(&crate::mub::WireBasis {
                        entry_form: crate::mub::EntryForm::Integral,
                        entries: m.clone(),
                    })
                };
                let mats = c.matrices.iter().map(parse).collect::<Result<Vec<_>, _>>()?;
                if float {
                    Ok(Class::Numeric(mats.iter().map(BasisMatrix::to_complex).collect()))
                } else {
                    Ok(Class::Exact(mats.iter().map(|b| b.to_exact().expect("integral is exact")).collect()))
                }
            })
            .collect::<Result<Vec<_>, CommutingError>>()?;
        for c in &classes {
            let shapes_ok = match c {
                Class::Exact(v) => v.iter().all(|m| m.rows() == w.dim),
                Class::Numeric(v) => v.iter().all(|m| m.rows() == w.dim),
            };
            if !shapes_ok {
                return Err(CommutingError::Malformed(format!("matrix dimension differs from {}", w.dim)));
            }
        }
        Ok(Self {
            dim: w.dim,
            classes,
            warning: w.warning.clone(),
        })
    }
}
