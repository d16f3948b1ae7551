//! Defining ideals of an MUB extension problem: orthogonality (`I`),
//! unbiasedness against one known basis (`J`), and their sum (`M`).
//!
//! Variable `x_i_j` / `y_i_j` is the real / imaginary part of row `i`,
//! column `j` of the candidate next basis.

use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::exactmath::{rat, rational_sqrt, ExactMatrix, Rational};
use crate::groebner::{self, GroebnerConfig, GroebnerError, GroebnerStats};
use crate::mub::{verify_system, BasisMatrix, MubError, MubSystem, WireMubSystem, DEFAULT_TOL};
use crate::polyring::{MonomialOrder, PolyError, Polynomial};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IdealError {
    #[error("dimension must be at least 2, got {0}")]
    Dimension(usize),
    #[error("unsupported entry form: {0}")]
    UnsupportedEntryForm(String),
    #[error("real-entry generators need a rational 1/sqrt({0}); use a Hadamard-type source or the complex variant")]
    IrrationalConstant(usize),
    #[error("source system does not verify: {}", .0.join("; "))]
    NotVerified(Vec<String>),
    #[error(transparent)]
    Mub(#[from] MubError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Groebner(#[from] GroebnerError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    #[default]
    Complex,
    /// Real MUBs only: all `y` variables set to zero.
    RealEntries,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum IdealName {
    I,
    /// Unbiasedness against source basis `l` for the candidate in position `target`.
    J { l: usize, target: usize },
    M { target: usize },
}

impl fmt::Display for IdealName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IdealName::I => write!(f, "I"),
            IdealName::J { l, target } => write!(f, "J_{{{l},{target}}}"),
            IdealName::M { target } => write!(f, "M_{{{target}}}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Provenance {
    /// sha256 of the canonical JSON of the source system.
    pub source_digest: Option<String>,
    pub source: Option<MubSystem>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdealPresentation {
    pub name: IdealName,
    pub dim: usize,
    pub variant: Variant,
    pub order: MonomialOrder,
    pub generators: Vec<Polynomial>,
    pub provenance: Provenance,
}

pub fn system_digest(s: &MubSystem) -> String {
    let json = serde_json::to_string(&s.to_wire()).expect("wire form serializes");
    hex::encode(Sha256::digest(json.as_bytes()))
}

fn check_dim(n: usize) -> Result<(), IdealError> {
    if n < 2 {
        Err(IdealError::Dimension(n))
    } else {
        Ok(())
    }
}

pub fn build_i(n: usize, variant: Variant, order: MonomialOrder) -> Result<IdealPresentation, IdealError> {
    check_dim(n)?;
    let x = |i, j| Polynomial::x(n, order, i, j);
    let y = |i, j| Polynomial::y(n, order, i, j);
    let mut gens = Vec::new();
    for j in 1..=n {
        for k in j + 1..=n {
            let mut re = Polynomial::zero(n, order);
            let mut im = Polynomial::zero(n, order);
            for i in 1..=n {
                re = re.add(&x(i, j).mul(&x(i, k)));
                if variant == Variant::Complex {
                    re = re.add(&y(i, j).mul(&y(i, k)));
                    im = im.add(&x(i, j).mul(&y(i, k))).sub(&x(i, k).mul(&y(i, j)));
                }
            }
            gens.push(re);
            if variant == Variant::Complex {
                gens.push(im);
            }
        }
    }
    Ok(IdealPresentation {
        name: IdealName::I,
        dim: n,
        variant,
        order,
        generators: gens,
        provenance: Provenance::default(),
    })
}

/// Generators for `|<z_j, a_q>|^2 = 1/n` over all `j, q`. Hadamard-type
/// sources are built from the numerators and scaled by `n`, so the constant
/// becomes 1.
pub fn build_j(
    a: &BasisMatrix,
    l: usize,
    target: usize,
    variant: Variant,
    order: MonomialOrder,
) -> Result<IdealPresentation, IdealError> {
    let n = a.dim();
    check_dim(n)?;
    let (m, hadamard): (&ExactMatrix, bool) = match a {
        BasisMatrix::Integral(m) => (m, false),
        BasisMatrix::Hadamard(m) => (m, true),
        BasisMatrix::Numeric(_) => {
            return Err(IdealError::UnsupportedEntryForm(
                "numeric entries have no exact generators; use the numeric search path".into(),
            ))
        }
    };
    let x = |i, j| Polynomial::x(n, order, i, j);
    let y = |i, j| Polynomial::y(n, order, i, j);
    let mut gens = Vec::with_capacity(n * n);
    match variant {
        Variant::Complex => {
            let constant = if hadamard { Rational::one() } else { rat(1, n as i64) };
            for j in 1..=n {
                for q in 1..=n {
                    let mut re = Polynomial::zero(n, order);
                    let mut im = Polynomial::zero(n, order);
                    for i in 1..=n {
                        let z = m.get(i - 1, q - 1);
                        re = re.add(&x(i, j).scale(&z.re)).add(&y(i, j).scale(&z.im));
                        im = im.add(&y(i, j).scale(&z.re)).sub(&x(i, j).scale(&z.im));
                    }
                    gens.push(
                        re.pow(2)
                            .add(&im.pow(2))
                            .sub(&Polynomial::constant(n, order, constant.clone())),
                    );
                }
            }
        }
        Variant::RealEntries => {
            if m.entries().iter().any(|z| !z.im.is_zero()) {
                return Err(IdealError::UnsupportedEntryForm(
                    "real-entry variant needs a real source basis".into(),
                ));
            }
            let constant = if hadamard {
                Rational::one()
            } else {
                rational_sqrt(&rat(n as i64, 1))
                    .ok_or(IdealError::IrrationalConstant(n))?
                    .recip()
            };
            for j in 1..=n {
                for q in 1..=n {
                    let mut lin = Polynomial::zero(n, order);
                    for i in 1..=n {
                        lin = lin.add(&x(i, j).scale(&m.get(i - 1, q - 1).re));
                    }
                    gens.push(lin.sub(&Polynomial::constant(n, order, constant.clone())));
                }
            }
        }
    }
    Ok(IdealPresentation {
        name: IdealName::J { l, target },
        dim: n,
        variant,
        order,
        generators: gens,
        provenance: Provenance::default(),
    })
}

/// `I + J_1 + ... + J_k` for the `k` bases of `s`.
pub fn build_m(s: &MubSystem, variant: Variant, order: MonomialOrder) -> Result<IdealPresentation, IdealError> {
    let target = s.len() + 1;
    let mut gens = build_i(s.dim, variant, order)?.generators;
    for (l, a) in s.bases.iter().enumerate() {
        gens.extend(build_j(a, l + 1, target, variant, order)?.generators);
    }
    Ok(IdealPresentation {
        name: IdealName::M { target },
        dim: s.dim,
        variant,
        order,
        generators: gens,
        provenance: Provenance {
            source_digest: Some(system_digest(s)),
            source: Some(s.clone()),
        },
    })
}

/// Coordinates `(x, y)` of a basis with exact true entries, in variable-index order.
pub fn embed_exact(m: &ExactMatrix) -> Vec<Rational> {
    let n = m.rows();
    let mut out = vec![Rational::zero(); 2 * n * n];
    for i in 0..n {
        for j in 0..n {
            let z = m.get(i, j);
            out[i * n + j] = z.re.clone();
            out[n * n + i * n + j] = z.im.clone();
        }
    }
    out
}

pub fn embed_f64(b: &BasisMatrix) -> Vec<f64> {
    let m = b.to_complex();
    let n = m.rows();
    let mut out = vec![0.0; 2 * n * n];
    for i in 0..n {
        for j in 0..n {
            let z = m.get(i, j);
            out[i * n + j] = z.re;
            out[n * n + i * n + j] = z.im;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ExtendVerdict {
    /// `1` lies in `M`: no complex, hence no real, point exists.
    NotExtendable,
    /// `M` is a proper ideal. That rules out nothing over the reals: the
    /// variety may still have no real point.
    Inconclusive,
    /// Gröbner caps were hit.
    Incomplete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendReport {
    pub verdict: ExtendVerdict,
    pub dim: usize,
    pub source_bases: usize,
    pub input_generators: usize,
    pub basis_size: Option<usize>,
    pub stats: GroebnerStats,
    pub note: String,
}

pub fn extend_check(
    s: &MubSystem,
    variant: Variant,
    order: MonomialOrder,
    cfg: &GroebnerConfig,
) -> Result<ExtendReport, IdealError> {
    if !s.is_exact() {
        return Err(IdealError::UnsupportedEntryForm(
            "extend-check needs exact (integral or hadamard) bases".into(),
        ));
    }
    let rep = verify_system(s, DEFAULT_TOL)?;
    if !rep.all_pass {
        return Err(IdealError::NotVerified(rep.failures()));
    }
    let m = build_m(s, variant, order)?;
    let mut report = ExtendReport {
        verdict: ExtendVerdict::Incomplete,
        dim: s.dim,
        source_bases: s.len(),
        input_generators: m.generators.len(),
        basis_size: None,
        stats: GroebnerStats::default(),
        note: String::new(),
    };
    match groebner::buchberger_with(&m.generators, order, cfg) {
        Ok(gb) => {
            report.basis_size = Some(gb.len());
            report.stats = gb.stats.clone();
            if gb.contains_unit() {
                report.verdict = ExtendVerdict::NotExtendable;
                report.note = "1 is in the ideal; the system cannot be extended".into();
            } else {
                report.verdict = ExtendVerdict::Inconclusive;
                report.note = "ideal is proper; this does not certify a real point (try `search`)".into();
            }
        }
        Err(GroebnerError::Incomplete { reason, stats }) => {
            report.stats = stats;
            report.note = reason;
        }
        Err(e) => return Err(e.into()),
    }
    Ok(report)
}

// ---- JSON ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireProvenance {
    #[serde(default)]
    pub source_digest: Option<String>,
    #[serde(default)]
    pub source: Option<WireMubSystem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireIdeal {
    pub name: IdealName,
    pub label: String,
    pub dim: usize,
    pub variant: Variant,
    pub order: MonomialOrder,
    pub generators: Vec<String>,
    pub provenance: WireProvenance,
}

impl IdealPresentation {
    pub fn label(&self) -> String {
        format!("{}^{{{}}}", self.name, self.dim)
    }

    pub fn to_wire(&self) -> WireIdeal {
        WireIdeal {
            name: self.name,
            label: self.label(),
            dim: self.dim,
            variant: self.variant,
            order: self.order,
            generators: self.generators.iter().map(ToString::to_string).collect(),
            provenance: WireProvenance {
                source_digest: self.provenance.source_digest.clone(),
                source: self.provenance.source.as_ref().map(MubSystem::to_wire),
            },
        }
    }

    pub fn from_wire(w: &WireIdeal) -> Result<Self, IdealError> {
        let generators = w
            .generators
            .iter()
            .map(|s| Polynomial::parse(s, w.dim, w.order))
            .collect::<Result<Vec<_>, _>>()?;
        let source = w.provenance.source.as_ref().map(MubSystem::from_wire).transpose()?;
        Ok(Self {
            name: w.name,
            dim: w.dim,
            variant: w.variant,
            order: w.order,
            generators,
            provenance: Provenance {
                source_digest: w.provenance.source_digest.clone(),
                source,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mub::{construct, Family};
    use crate::polyring::VariableId;
    use proptest::prelude::*;
    use std::collections::HashSet;

    const ORD: MonomialOrder = MonomialOrder::DegRevLex;

    fn parse_set(n: usize, xs: &[&str]) -> HashSet<String> {
        xs.iter().map(|s| Polynomial::parse(s, n, ORD).unwrap().to_string()).collect()
    }

    fn as_set(p: &IdealPresentation) -> HashSet<String> {
        p.generators.iter().map(ToString::to_string).collect()
    }

    #[test]
    fn i_for_dimension_two() {
        let i = build_i(2, Variant::Complex, ORD).unwrap();
        assert_eq!(
            as_set(&i),
            parse_set(
                2,
                &[
                    "x_1_1*x_1_2 + y_1_1*y_1_2 + x_2_1*x_2_2 + y_2_1*y_2_2",
                    "x_1_1*y_1_2 - x_1_2*y_1_1 + x_2_1*y_2_2 - x_2_2*y_2_1",
                ]
            )
        );
        let r = build_i(2, Variant::RealEntries, ORD).unwrap();
        assert_eq!(as_set(&r), parse_set(2, &["x_1_1*x_1_2 + x_2_1*x_2_2"]));
        assert_eq!(build_i(3, Variant::Complex, ORD).unwrap().generators.len(), 6);
        assert!(matches!(build_i(1, Variant::Complex, ORD), Err(IdealError::Dimension(1))));
    }

    #[test]
    fn j_ideals_of_the_dim2_triple() {
        let s = construct(Family::Dim2Triple).unwrap();
        let j1 = build_j(&s.bases[0], 1, 4, Variant::Complex, ORD).unwrap();
        assert_eq!(
            as_set(&j1),
            parse_set(
                2,
                &[
                    "x_1_1^2 + y_1_1^2 - 1/2",
                    "x_1_2^2 + y_1_2^2 - 1/2",
                    "x_2_1^2 + y_2_1^2 - 1/2",
                    "x_2_2^2 + y_2_2^2 - 1/2",
                ]
            )
        );
        let sq = |a: &str, b: &str| {
            let pa = Polynomial::parse(a, 2, ORD).unwrap();
            let pb = Polynomial::parse(b, 2, ORD).unwrap();
            pa.pow(2).add(&pb.pow(2)).sub(&Polynomial::constant(2, ORD, rat(1, 1))).to_string()
        };
        let j2 = build_j(&s.bases[1], 2, 4, Variant::Complex, ORD).unwrap();
        let expected2: HashSet<String> = [
            sq("x_1_1 + x_2_1", "y_1_1 + y_2_1"),
            sq("x_1_1 - x_2_1", "y_1_1 - y_2_1"),
            sq("x_1_2 + x_2_2", "y_1_2 + y_2_2"),
            sq("x_1_2 - x_2_2", "y_1_2 - y_2_2"),
        ]
        .into();
        assert_eq!(as_set(&j2), expected2);
        let j3 = build_j(&s.bases[2], 3, 4, Variant::Complex, ORD).unwrap();
        let expected3: HashSet<String> = [
            sq("x_1_1 + y_2_1", "y_1_1 - x_2_1"),
            sq("x_1_1 - y_2_1", "y_1_1 + x_2_1"),
            sq("x_1_2 + y_2_2", "y_1_2 - x_2_2"),
            sq("x_1_2 - y_2_2", "y_1_2 + x_2_2"),
        ]
        .into();
        assert_eq!(as_set(&j3), expected3);
    }

    #[test]
    fn m_counts() {
        let s = construct(Family::Dim2Triple).unwrap();
        let m4 = build_m(&s, Variant::Complex, ORD).unwrap();
        assert_eq!(m4.generators.len(), 14);
        assert_eq!(m4.name, IdealName::M { target: 4 });
        let e = MubSystem::new(2, vec![s.bases[0].clone()]).unwrap();
        assert_eq!(build_m(&e, Variant::Complex, ORD).unwrap().generators.len(), 6);
        let empty = MubSystem::new(3, vec![]).unwrap();
        assert_eq!(build_m(&empty, Variant::Complex, ORD).unwrap().generators, build_i(3, Variant::Complex, ORD).unwrap().generators);
    }

    #[test]
    fn generator_counts_and_homogeneity() {
        for n in 2..=5 {
            let i = build_i(n, Variant::Complex, ORD).unwrap();
            assert_eq!(i.generators.len(), n * (n - 1));
            assert!(i.generators.iter().all(|g| g.is_homogeneous() && g.total_degree() == 2));
            assert_eq!(build_i(n, Variant::RealEntries, ORD).unwrap().generators.len(), n * (n - 1) / 2);
            let id = BasisMatrix::identity(n);
            assert_eq!(build_j(&id, 1, 2, Variant::Complex, ORD).unwrap().generators.len(), n * n);
        }
        let h4 = construct(Family::PaperDim4).unwrap().bases[1].clone();
        assert_eq!(build_j(&h4, 2, 3, Variant::RealEntries, ORD).unwrap().generators.len(), 16);
        assert_eq!(
            build_j(&BasisMatrix::identity(4), 1, 2, Variant::RealEntries, ORD).unwrap().generators.len(),
            16
        );
    }

    #[test]
    fn real_entry_errors() {
        assert!(matches!(
            build_j(&BasisMatrix::identity(2), 1, 2, Variant::RealEntries, ORD),
            Err(IdealError::IrrationalConstant(2))
        ));
        let b2 = construct(Family::Dim2Triple).unwrap().bases[2].clone();
        assert!(matches!(
            build_j(&b2, 1, 2, Variant::RealEntries, ORD),
            Err(IdealError::UnsupportedEntryForm(_))
        ));
        let f3 = construct(Family::IdentityFourier(3)).unwrap().bases[1].clone();
        assert!(matches!(
            build_j(&f3, 1, 2, Variant::Complex, ORD),
            Err(IdealError::UnsupportedEntryForm(_))
        ));
    }

    #[test]
    fn y_to_zero_specialization_gives_real_variant() {
        for n in 2..=4 {
            let mut spec: HashSet<String> = HashSet::new();
            for g in build_i(n, Variant::Complex, ORD).unwrap().generators {
                let mut h = g;
                for i in 1..=n {
                    for j in 1..=n {
                        h = h.substitute(VariableId::y(i, j), &Rational::zero());
                    }
                }
                if !h.is_zero() {
                    spec.insert(h.to_string());
                }
            }
            assert_eq!(spec, as_set(&build_i(n, Variant::RealEntries, ORD).unwrap()));
        }
    }

    #[test]
    fn extension_basis_zeroes_m_exactly() {
        let s = construct(Family::PaperDim4).unwrap();
        for next in 1..5 {
            let mut bases = s.bases.clone();
            let candidate = bases.remove(next);
            let src = MubSystem::new(4, bases).unwrap();
            let m = build_m(&src, Variant::Complex, ORD).unwrap();
            let point = embed_exact(&candidate.to_exact().unwrap());
            for g in &m.generators {
                assert!(g.eval_exact(&point).is_zero(), "{g}");
            }
        }
        // dim 2 has irrational entries: float check
        let t = construct(Family::Dim2Triple).unwrap();
        for next in 0..3 {
            let mut bases = t.bases.clone();
            let candidate = bases.remove(next);
            let m = build_m(&MubSystem::new(2, bases).unwrap(), Variant::Complex, ORD).unwrap();
            let p = embed_f64(&candidate);
            assert!(m.generators.iter().all(|g| g.eval_f64(&p).abs() < 1e-12));
        }
    }

    #[test]
    fn extend_check_examples() {
        let cfg = GroebnerConfig::default();
        let t = construct(Family::Dim2Triple).unwrap();
        let r = extend_check(&t, Variant::Complex, ORD, &cfg).unwrap();
        assert_eq!(r.verdict, ExtendVerdict::NotExtendable);
        assert_eq!(r.input_generators, 14);
        let e = MubSystem::new(2, t.bases[..1].to_vec()).unwrap();
        assert_eq!(extend_check(&e, Variant::Complex, ORD, &cfg).unwrap().verdict, ExtendVerdict::Inconclusive);
        let eb = MubSystem::new(2, t.bases[..2].to_vec()).unwrap();
        assert_eq!(extend_check(&eb, Variant::Complex, ORD, &cfg).unwrap().verdict, ExtendVerdict::Inconclusive);
        let tiny = GroebnerConfig { max_pairs: 1, ..cfg };
        assert_eq!(extend_check(&t, Variant::Complex, ORD, &tiny).unwrap().verdict, ExtendVerdict::Incomplete);
        let bad = MubSystem::new(2, vec![t.bases[1].clone(), t.bases[1].clone()]).unwrap();
        assert!(matches!(extend_check(&bad, Variant::Complex, ORD, &cfg), Err(IdealError::NotVerified(_))));
    }

    #[test]
    fn wire_round_trip() {
        let t = construct(Family::Dim2Triple).unwrap();
        let m = build_m(&t, Variant::Complex, MonomialOrder::Lex).unwrap();
        let json = serde_json::to_string(&m.to_wire()).unwrap();
        let back = IdealPresentation::from_wire(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back, m);
        assert_eq!(m.label(), "M_{4}^{2}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        // Every generator vanishes at any verified extension, also after a
        // common unitary change of frame.
        #[test]
        fn round_trip_under_phase_change(phases in proptest::collection::vec(0usize..4, 4), next in 1usize..5) {
            use crate::exactmath::GaussianRational;
            let units = [(1, 0), (0, 1), (-1, 0), (0, -1)];
            let d: Vec<GaussianRational> = phases.iter().map(|&k| GaussianRational::from_ints(units[k].0, units[k].1)).collect();
            let s = crate::mub::apply_unitary(&ExactMatrix::diagonal(&d), &construct(Family::PaperDim4).unwrap()).unwrap();
            let mut bases = s.bases.clone();
            let candidate = bases.remove(next);
            let m = build_m(&MubSystem::new(4, bases).unwrap(), Variant::Complex, ORD).unwrap();
            let point = embed_exact(&candidate.to_exact().unwrap());
            prop_assert!(m.generators.iter().all(|g| g.eval_exact(&point).is_zero()));
        }
    }
}
