//! Numerical search for real points of `Z(M)`: Levenberg–Marquardt on
//! `F(x) = sum f_i(x)^2` with exact symbolic Jacobians, random restarts, and
//! rounding back to exact candidate bases.

use nalgebra::{DMatrix, DVector};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::exactmath::{rat, rational_sqrt, rational_to_f64, ExactMatrix, GaussianRational, Rational};
use crate::idealgen::IdealPresentation;
use crate::mub::{verify_unbiased_pair, BasisMatrix, WireBasis, DEFAULT_TOL};
use crate::polyring::{Polynomial, VariableId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub restarts: usize,
    pub master_seed: u64,
    /// Success threshold on `max |f_i|`.
    pub residual_tol: f64,
    pub max_iterations: usize,
    pub lambda_init: f64,
    pub lambda_up: f64,
    pub lambda_down: f64,
    /// Matching precision of [`round_to_exact`].
    pub rounding_tol: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            restarts: 50,
            master_seed: 0,
            residual_tol: 1e-10,
            max_iterations: 400,
            lambda_init: 1e-3,
            lambda_up: 4.0,
            lambda_down: 0.25,
            rounding_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartLog {
    pub index: usize,
    pub residual: f64,
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub success: bool,
    pub best_restart: Option<usize>,
    pub best_point: Vec<f64>,
    /// `max |f_i(best_point)|`.
    pub residual: f64,
    pub objective: f64,
    pub rounded_candidate: Option<WireBasis>,
    pub restarts: Vec<RestartLog>,
}

/// A polynomial with `f64` coefficients, as `(coeff, [(var, exp)])` terms.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledPoly {
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

impl CompiledPoly {
    pub fn new(p: &Polynomial) -> Self {
        let terms = p
            .terms()
            .iter()
            .map(|(m, c)| {
                let vars = m
                    .exponents()
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(v, &e)| (v, e as i32))
                    .collect();
                (rational_to_f64(c), vars)
            })
            .collect();
        Self { terms }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, vs)| c * vs.iter().map(|&(v, e)| x[v].powi(e)).product::<f64>())
            .sum()
    }
}

/// Generators plus their exact partial derivatives, ready for float evaluation.
#[derive(Debug, Clone)]
pub struct System {
    pub nvars: usize,
    gens: Vec<CompiledPoly>,
    /// `jac[i]` lists `(var, d f_i / d var)` over the support of `f_i`.
    jac: Vec<Vec<(usize, CompiledPoly)>>,
}

impl System {
    pub fn new(dim: usize, generators: &[Polynomial]) -> Self {
        let nvars = 2 * dim * dim;
        let gens = generators.iter().map(CompiledPoly::new).collect();
        let jac = generators
            .iter()
            .map(|g| {
                g.variables()
                    .into_iter()
                    .map(|v| (v, CompiledPoly::new(&g.differentiate(VariableId::from_index(v, dim)))))
                    .collect()
            })
            .collect();
        Self { nvars, gens, jac }
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn residuals(&self, x: &[f64]) -> Vec<f64> {
        self.gens.iter().map(|g| g.eval(x)).collect()
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.residuals(x).iter().map(|r| r * r).sum()
    }

    pub fn max_residual(&self, x: &[f64]) -> f64 {
        self.residuals(x).iter().fold(0.0, |a, r| a.max(r.abs()))
    }

    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let mut j = DMatrix::zeros(self.gens.len(), self.nvars);
        for (i, row) in self.jac.iter().enumerate() {
            for (v, d) in row {
                j[(i, *v)] = d.eval(x);
            }
        }
        j
    }

    /// `grad F = 2 J^T r`.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let r = DVector::from_vec(self.residuals(x));
        (self.jacobian(x).transpose() * r * 2.0).as_slice().to_vec()
    }
}

/// Levenberg–Marquardt from `x` over the coordinates with `free[v]`.
/// Returns the number of iterations used.
fn levenberg_marquardt(sys: &System, x: &mut [f64], free: &[bool], cfg: &SearchConfig) -> usize {
    let idx: Vec<usize> = (0..sys.nvars).filter(|&v| free[v]).collect();
    if idx.is_empty() || sys.is_empty() {
        return 0;
    }
    let stop = cfg.residual_tol * 1e-2;
    let mut lambda = cfg.lambda_init;
    let mut f = sys.objective(x);
    for it in 0..cfg.max_iterations {
        let r = DVector::from_vec(sys.residuals(x));
        if r.amax() < stop {
            return it;
        }
        let full = sys.jacobian(x);
        let j = full.select_columns(idx.iter());
        let jtj = j.transpose() * &j;
        let g = j.transpose() * &r;
        let mut accepted = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for k in 0..idx.len() {
                a[(k, k)] += lambda * (1.0 + jtj[(k, k)]);
            }
            let Some(step) = a.cholesky().map(|c| c.solve(&(-&g))) else {
                lambda *= cfg.lambda_up;
                continue;
            };
            let mut trial = x.to_vec();
            for (k, &v) in idx.iter().enumerate() {
                trial[v] += step[k];
            }
            let ft = sys.objective(&trial);
            if ft < f {
                x.copy_from_slice(&trial);
                f = ft;
                lambda = (lambda * cfg.lambda_down).max(1e-15);
                accepted = true;
                break;
            }
            lambda *= cfg.lambda_up;
        }
        if !accepted {
            return it + 1;
        }
    }
    cfg.max_iterations
}

fn restart_rng(master_seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index as u64);
    rng
}

pub fn search(m: &IdealPresentation, cfg: &SearchConfig) -> SearchResult {
    let sys = System::new(m.dim, &m.generators);
    let runs: Vec<(Vec<f64>, RestartLog)> = (0..cfg.restarts.max(1))
        .into_par_iter()
        .map(|index| {
            let mut rng = restart_rng(cfg.master_seed, index);
            let mut x: Vec<f64> = (0..sys.nvars).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let iterations = levenberg_marquardt(&sys, &mut x, &vec![true; sys.nvars], cfg);
            let log = RestartLog {
                index,
                residual: sys.max_residual(&x),
                objective: sys.objective(&x),
                iterations,
            };
            (x, log)
        })
        .collect();

    let mut order: Vec<usize> = (0..runs.len()).collect();
    order.sort_by(|&a, &b| runs[a].1.objective.total_cmp(&runs[b].1.objective).then(a.cmp(&b)));
    let best = order[0];
    let (best_point, best_log) = runs[best].clone();
    let success = best_log.residual < cfg.residual_tol;

    let sources: Vec<BasisMatrix> = m.provenance.source.as_ref().map(|s| s.bases.clone()).unwrap_or_default();
    // Try rounding from successful restarts in merge order.
    let rounded_candidate = order
        .iter()
        .filter(|&&k| runs[k].1.residual < cfg.residual_tol)
        .find_map(|&k| snap_and_round(&sys, &runs[k].0, m.dim, &sources, cfg));

    SearchResult {
        success,
        best_restart: Some(best_log.index),
        best_point,
        residual: best_log.residual,
        objective: best_log.objective,
        rounded_candidate: rounded_candidate.as_ref().map(WireBasis::from),
        restarts: runs.into_iter().map(|r| r.1).collect(),
    }
}

/// A dictionary value `coeff / sqrt(root)`.
#[derive(Debug, Clone, PartialEq)]
struct Surd {
    coeff: Rational,
    root: i64,
}

impl Surd {
    fn value(&self) -> f64 {
        rational_to_f64(&self.coeff) / (self.root as f64).sqrt()
    }
}

/// `{0, ±1, ±1/2, ±1/√n, ±1/(2√n), ±1/√2}`.
fn dictionary(n: usize) -> Vec<Surd> {
    let n = n as i64;
    let mut out = vec![Surd { coeff: rat(0, 1), root: 1 }];
    for (c, root) in [(rat(1, 1), 1), (rat(1, 2), 1), (rat(1, 1), n), (rat(1, 2), n), (rat(1, 1), 2)] {
        for s in [1, -1] {
            out.push(Surd {
                coeff: &c * rat(s, 1),
                root,
            });
        }
    }
    out
}

/// Exact value of a surd as a multiple of `1/sqrt(n)` (`hadamard`) or as a
/// plain rational, when that is rational.
fn in_form(s: &Surd, n: usize, hadamard: bool) -> Option<Rational> {
    if s.coeff.is_zero() {
        return Some(s.coeff.clone());
    }
    let ratio = if hadamard {
        rat(n as i64, s.root)
    } else {
        rat(1, s.root)
    };
    rational_sqrt(&ratio).map(|r| &s.coeff * r)
}

fn assemble(vals: &[Rational], n: usize, hadamard: bool) -> BasisMatrix {
    let nn = n * n;
    let mut m = ExactMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m.set(i, j, GaussianRational::new(vals[i * n + j].clone(), vals[nn + i * n + j].clone()));
        }
    }
    if hadamard {
        BasisMatrix::Hadamard(m)
    } else {
        BasisMatrix::Integral(m)
    }
}

fn accept(b: BasisMatrix, sources: &[BasisMatrix]) -> Option<BasisMatrix> {
    if !b.is_orthonormal(DEFAULT_TOL).ok()? {
        return None;
    }
    for s in sources {
        if !s.is_exact() || !verify_unbiased_pair(s, &b, DEFAULT_TOL).ok()?.unbiased {
            return None;
        }
    }
    Some(b)
}

/// Matches every coordinate against the surd dictionary within `tol` and
/// returns the assembled basis if it verifies exactly (orthonormal and
/// unbiased to every source). Declines on any mismatch.
pub fn round_to_exact(point: &[f64], n: usize, sources: &[BasisMatrix], tol: f64) -> Option<BasisMatrix> {
    if point.len() != 2 * n * n {
        return None;
    }
    let dict = dictionary(n);
    for hadamard in [true, false] {
        let vals: Option<Vec<Rational>> = point
            .iter()
            .map(|&x| {
                dict.iter()
                    .filter(|s| (s.value() - x).abs() <= tol)
                    .find_map(|s| in_form(s, n, hadamard))
            })
            .collect();
        if let Some(b) = vals.and_then(|v| accept(assemble(&v, n, hadamard), sources)) {
            return Some(b);
        }
    }
    None
}

/// Greedy snap-and-polish: repeatedly fix the free coordinate nearest to a
/// dictionary value (restricted to one entry form), re-solve for the rest,
/// and keep the snap only if the residual stays below tolerance.
fn snap_and_round(
    sys: &System,
    start: &[f64],
    n: usize,
    sources: &[BasisMatrix],
    cfg: &SearchConfig,
) -> Option<BasisMatrix> {
    if let Some(b) = round_to_exact(start, n, sources, cfg.rounding_tol) {
        return Some(b);
    }
    let dict = dictionary(n);
    for hadamard in [true, false] {
        let values: Vec<f64> = dict.iter().filter(|s| in_form(s, n, hadamard).is_some()).map(Surd::value).collect();
        let mut x = start.to_vec();
        let mut free = vec![true; x.len()];
        let mut ok = true;
        while ok && free.iter().any(|&f| f) {
            // candidates: (distance, coordinate, value), nearest first
            let mut cands: Vec<(f64, usize, f64)> = (0..x.len())
                .filter(|&v| free[v])
                .flat_map(|v| values.iter().map(move |&d| (v, d)))
                .map(|(v, d)| ((x[v] - d).abs(), v, d))
                .collect();
            cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            ok = false;
            for &(_, v, d) in cands.iter().take(6) {
                let mut trial = x.clone();
                trial[v] = d;
                let mut tfree = free.clone();
                tfree[v] = false;
                levenberg_marquardt(sys, &mut trial, &tfree, cfg);
                if sys.max_residual(&trial) < cfg.residual_tol {
                    x = trial;
                    free = tfree;
                    ok = true;
                    break;
                }
            }
        }
        if ok {
            if let Some(b) = round_to_exact(&x, n, sources, cfg.rounding_tol) {
                return Some(b);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::idealgen::{build_m, embed_f64, Variant};
    use crate::mub::{construct, Family, MubSystem};
    use crate::polyring::{Monomial, MonomialOrder};
    use proptest::prelude::*;

    const ORD: MonomialOrder = MonomialOrder::DegRevLex;

    fn m_for(k: usize) -> IdealPresentation {
        let t = construct(Family::Dim2Triple).unwrap();
        build_m(&MubSystem::new(2, t.bases[..k].to_vec()).unwrap(), Variant::Complex, ORD).unwrap()
    }

    fn quick() -> SearchConfig {
        SearchConfig {
            restarts: 8,
            ..Default::default()
        }
    }

    #[test]
    fn extends_identity_in_dim2() {
        let r = search(&m_for(1), &quick());
        assert!(r.success, "residual {}", r.residual);
        let cand = BasisMatrix::try_from(r.rounded_candidate.as_ref().expect("rounded")).unwrap();
        assert!(verify_unbiased_pair(&BasisMatrix::identity(2), &cand, 0.0).unwrap().unbiased);
    }

    #[test]
    fn extends_e_b1_in_dim2() {
        let r = search(&m_for(2), &quick());
        assert!(r.success);
        assert!(r.rounded_candidate.is_some());
    }

    #[test]
    fn triple_has_no_real_extension() {
        let r = search(&m_for(3), &quick());
        assert!(!r.success);
        assert!(r.restarts.iter().all(|l| l.residual > 1e-3));
        assert!(r.rounded_candidate.is_none());
    }

    #[test]
    fn empty_presentation_succeeds_immediately() {
        let mut m = m_for(1);
        m.generators.clear();
        let r = search(&m, &quick());
        assert!(r.success && r.residual == 0.0);
        assert!(r.restarts.iter().all(|l| l.iterations == 0));
    }

    #[test]
    fn deterministic_under_seed() {
        let cfg = SearchConfig {
            restarts: 6,
            master_seed: 42,
            ..Default::default()
        };
        assert_eq!(search(&m_for(1), &cfg), search(&m_for(1), &cfg));
        let other = SearchConfig { master_seed: 43, ..cfg };
        assert_ne!(search(&m_for(1), &cfg).best_point, search(&m_for(1), &other).best_point);
    }

    #[test]
    fn rounding_examples() {
        let t = construct(Family::Dim2Triple).unwrap();
        let p = embed_f64(&t.bases[2]);
        let b = round_to_exact(&p, 2, &t.bases[..2], 1e-6).unwrap();
        assert_eq!(b, t.bases[2]);
        assert!(round_to_exact(&[0.0; 8], 2, &[], 1e-6).is_none());
        // a 1e-3 perturbation is outside the matching window
        let mut q = p.clone();
        q[0] += 1e-3;
        assert!(round_to_exact(&q, 2, &t.bases[..2], 1e-6).is_none());
        // Dim-4 Hadamard basis with entries ±1/2, ±i/2 rounds to an exact basis.
        let s = construct(Family::PaperDim4).unwrap();
        let b = round_to_exact(&embed_f64(&s.bases[3]), 4, &s.bases[..3], 1e-6).unwrap();
        assert_eq!(b.to_exact(), s.bases[3].to_exact());
    }

    #[test]
    fn objective_vanishes_at_extensions() {
        let t = construct(Family::Dim2Triple).unwrap();
        for k in 1..3 {
            let sys = System::new(2, &m_for(k).generators);
            let p = embed_f64(&t.bases[k]);
            assert!(sys.max_residual(&p) < 1e-12);
        }
    }

    fn arb_system() -> impl Strategy<Value = Vec<Polynomial>> {
        let term = (proptest::collection::vec(0u32..3, 8), -5i64..=5, 1i64..=4);
        proptest::collection::vec(proptest::collection::vec(term, 1..5), 1..4).prop_map(|gs| {
            gs.into_iter()
                .map(|ts| {
                    Polynomial::from_terms(2, ORD, ts.into_iter().map(|(e, a, b)| (Monomial::from_exponents(e), rat(a, b))))
                })
                .collect()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn gradient_matches_finite_differences(
            gens in arb_system(),
            points in proptest::collection::vec(proptest::collection::vec(-1.0f64..1.0, 8), 100),
        ) {
            let sys = System::new(2, &gens);
            for x in &points {
                let g = sys.gradient(x);
                for v in 0..8 {
                    let h = 1e-5;
                    let (mut a, mut b) = (x.clone(), x.clone());
                    a[v] += h;
                    b[v] -= h;
                    let fd = (sys.objective(&a) - sys.objective(&b)) / (2.0 * h);
                    let scale = g[v].abs().max(fd.abs()).max(1.0);
                    prop_assert!((g[v] - fd).abs() / scale < 1e-5, "v={} analytic={} fd={}", v, g[v], fd);
                }
            }
        }

        #[test]
        fn objective_is_nonnegative(gens in arb_system(), x in proptest::collection::vec(-2.0f64..2.0, 8)) {
            prop_assert!(System::new(2, &gens).objective(&x) >= 0.0);
        }
    }
}
