use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Real or imaginary coordinate of a candidate basis entry `z_ij = x_ij + i y_ij`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VarKind {
    X,
    Y,
}

/// Variable `x_ij` or `y_ij` (1-based row and column) of the ring for
/// dimension `n`.
///
/// The global variable order is `x_11 > x_12 > ... > x_nn > y_11 > ... > y_nn`,
/// realised by [`VariableId::index`]: smaller index means bigger variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VariableId {
    pub kind: VarKind,
    pub row: usize,
    pub col: usize,
}

impl VariableId {
    pub fn x(row: usize, col: usize) -> Self {
        Self {
            kind: VarKind::X,
            row,
            col,
        }
    }

    pub fn y(row: usize, col: usize) -> Self {
        Self {
            kind: VarKind::Y,
            row,
            col,
        }
    }

    pub fn index(&self, n: usize) -> usize {
        let block = match self.kind {
            VarKind::X => 0,
            VarKind::Y => n * n,
        };
        block + (self.row - 1) * n + (self.col - 1)
    }

    pub fn from_index(idx: usize, n: usize) -> Self {
        let nn = n * n;
        let (kind, rest) = if idx < nn {
            (VarKind::X, idx)
        } else {
            (VarKind::Y, idx - nn)
        };
        Self {
            kind,
            row: rest / n + 1,
            col: rest % n + 1,
        }
    }

    pub fn in_range(&self, n: usize) -> bool {
        (1..=n).contains(&self.row) && (1..=n).contains(&self.col)
    }
}

impl fmt::Display for VariableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            VarKind::X => 'x',
            VarKind::Y => 'y',
        };
        write!(f, "{k}_{}_{}", self.row, self.col)
    }
}

/// Exponent vector over all `2n^2` variables, indexed by [`VariableId::index`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    exps: Vec<u32>,
}

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Self {
            exps: vec![0; nvars],
        }
    }

    pub fn var(idx: usize, nvars: usize, exp: u32) -> Self {
        let mut m = Self::one(nvars);
        m.exps[idx] = exp;
        m
    }

    pub fn from_exponents(exps: Vec<u32>) -> Self {
        Self { exps }
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exps
    }

    pub fn nvars(&self) -> usize {
        self.exps.len()
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    /// Indices of variables with a nonzero exponent.
    pub fn support(&self) -> Vec<usize> {
        self.exps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn divides(&self, other: &Self) -> bool {
        self.exps.iter().zip(&other.exps).all(|(a, b)| a <= b)
    }

    pub fn is_coprime(&self, other: &Self) -> bool {
        self.exps
            .iter()
            .zip(&other.exps)
            .all(|(&a, &b)| a == 0 || b == 0)
    }

    pub fn lcm(&self, other: &Self) -> Self {
        Self {
            exps: self
                .exps
                .iter()
                .zip(&other.exps)
                .map(|(&a, &b)| a.max(b))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            exps: self
                .exps
                .iter()
                .zip(&other.exps)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }

    /// `self / other`, or `None` when `other` does not divide `self`.
    pub fn div(&self, other: &Self) -> Option<Self> {
        if !other.divides(self) {
            return None;
        }
        Some(Self {
            exps: self
                .exps
                .iter()
                .zip(&other.exps)
                .map(|(&a, &b)| a - b)
                .collect(),
        })
    }

    pub(crate) fn exps_mut(&mut self) -> &mut [u32] {
        &mut self.exps
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        self.exps
            .iter()
            .zip(point)
            .filter(|(&e, _)| e > 0)
            .map(|(&e, &x)| x.powi(e as i32))
            .product()
    }

    /// Display using variable names for dimension `n`.
    pub fn display(&self, n: usize) -> String {
        let parts: Vec<String> = self
            .exps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| {
                let v = VariableId::from_index(i, n);
                if e == 1 {
                    v.to_string()
                } else {
                    format!("{v}^{e}")
                }
            })
            .collect();
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }
}

/// Total, multiplicative monomial orders with `1` as the minimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MonomialOrder {
    Lex,
    #[default]
    DegRevLex,
}

impl MonomialOrder {
    pub fn compare(&self, a: &Monomial, b: &Monomial) -> Ordering {
        match self {
            MonomialOrder::Lex => a.exps.cmp(&b.exps),
            MonomialOrder::DegRevLex => a.degree().cmp(&b.degree()).then_with(|| {
                // Last differing variable: the smaller exponent wins.
                for (x, y) in a.exps.iter().zip(&b.exps).rev() {
                    if x != y {
                        return y.cmp(x);
                    }
                }
                Ordering::Equal
            }),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            MonomialOrder::Lex => "lex",
            MonomialOrder::DegRevLex => "degrevlex",
        }
    }
}

impl std::str::FromStr for MonomialOrder {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "lex" => Ok(Self::Lex),
            "degrevlex" | "grevlex" | "drl" => Ok(Self::DegRevLex),
            other => Err(format!("unknown monomial order {other:?}")),
        }
    }
}
