use std::cmp::Ordering;
use std::collections::HashMap;

use num_traits::{One, Signed, Zero};

use super::{Monomial, MonomialOrder, PolyError, VariableId};
use crate::exactmath::{rational_to_f64, Rational};

pub type Term = (Monomial, Rational);

/// Sparse polynomial over the rationals in the `2n^2` variables `x_ij, y_ij`.
///
/// Terms are kept sorted in strictly descending order under `order`, with no
/// zero coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    dim: usize,
    order: MonomialOrder,
    terms: Vec<Term>,
}

impl Polynomial {
    pub fn zero(dim: usize, order: MonomialOrder) -> Self {
        Self {
            dim,
            order,
            terms: Vec::new(),
        }
    }

    pub fn constant(dim: usize, order: MonomialOrder, c: Rational) -> Self {
        let mut p = Self::zero(dim, order);
        if !c.is_zero() {
            p.terms.push((Monomial::one(2 * dim * dim), c));
        }
        p
    }

    pub fn variable(dim: usize, order: MonomialOrder, v: VariableId) -> Self {
        let nv = 2 * dim * dim;
        Self {
            dim,
            order,
            terms: vec![(Monomial::var(v.index(dim), nv, 1), Rational::one())],
        }
    }

    pub fn x(dim: usize, order: MonomialOrder, row: usize, col: usize) -> Self {
        Self::variable(dim, order, VariableId::x(row, col))
    }

    pub fn y(dim: usize, order: MonomialOrder, row: usize, col: usize) -> Self {
        Self::variable(dim, order, VariableId::y(row, col))
    }

    /// Builds a polynomial from arbitrary terms: sorts, merges duplicates and
    /// drops zeros.
    pub fn from_terms(dim: usize, order: MonomialOrder, terms: impl IntoIterator<Item = Term>) -> Self {
        let mut acc: HashMap<Monomial, Rational> = HashMap::new();
        for (m, c) in terms {
            *acc.entry(m).or_insert_with(Rational::zero) += c;
        }
        let mut terms: Vec<Term> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_by(|a, b| order.compare(&b.0, &a.0));
        Self { dim, order, terms }
    }

    /// Trusts the caller that `terms` is already sorted and zero-free.
    pub(crate) fn from_sorted(dim: usize, order: MonomialOrder, terms: Vec<Term>) -> Self {
        debug_assert!(terms
            .windows(2)
            .all(|w| order.compare(&w[0].0, &w[1].0) == Ordering::Greater));
        debug_assert!(terms.iter().all(|(_, c)| !c.is_zero()));
        Self { dim, order, terms }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nvars(&self) -> usize {
        2 * self.dim * self.dim
    }

    pub fn order(&self) -> MonomialOrder {
        self.order
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<Term> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Nonzero constant.
    pub fn is_unit(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|(m, _)| m.is_one())
    }

    /// Same polynomial with terms re-sorted under `order`.
    pub fn with_order(&self, order: MonomialOrder) -> Self {
        if order == self.order {
            return self.clone();
        }
        let mut terms = self.terms.clone();
        terms.sort_by(|a, b| order.compare(&b.0, &a.0));
        Self {
            dim: self.dim,
            order,
            terms,
        }
    }

    /// Initial monomial and its coefficient under `order`.
    pub fn leading_term(&self, order: MonomialOrder) -> Result<(Monomial, Rational), PolyError> {
        let t = if order == self.order {
            self.terms.first()
        } else {
            self.terms.iter().max_by(|a, b| order.compare(&a.0, &b.0))
        };
        t.cloned().ok_or(PolyError::ZeroPolynomial)
    }

    pub(crate) fn lead(&self) -> Option<&Term> {
        self.terms.first()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.iter().map(|(m, _)| m.degree()).max().unwrap_or(0)
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.iter().map(|(m, _)| m.degree());
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    /// Indices of all variables occurring in the polynomial.
    pub fn variables(&self) -> Vec<usize> {
        let mut seen = vec![false; self.nvars()];
        for (m, _) in &self.terms {
            for i in m.support() {
                seen[i] = true;
            }
        }
        seen.iter()
            .enumerate()
            .filter(|(_, &s)| s)
            .map(|(i, _)| i)
            .collect()
    }

    fn check_compatible(&self, o: &Self) {
        assert_eq!(self.dim, o.dim, "polynomials from rings of different dimension");
    }

    pub fn add(&self, o: &Self) -> Self {
        self.check_compatible(o);
        let o = o.with_order(self.order);
        let terms = merge(&self.terms, &o.terms, None, self.order);
        Self::from_sorted(self.dim, self.order, terms)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        Self {
            dim: self.dim,
            order: self.order,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.dim, self.order);
        }
        Self {
            dim: self.dim,
            order: self.order,
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    /// `c * m * self`; multiplication by a monomial preserves term order.
    pub fn mul_term(&self, m: &Monomial, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.dim, self.order);
        }
        Self {
            dim: self.dim,
            order: self.order,
            terms: self.terms.iter().map(|(t, a)| (t.mul(m), a * c)).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.check_compatible(o);
        let mut acc: HashMap<Monomial, Rational> = HashMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                *acc.entry(ma.mul(mb)).or_insert_with(Rational::zero) += ca * cb;
            }
        }
        Self::from_terms(self.dim, self.order, acc)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut r = Self::constant(self.dim, self.order, Rational::one());
        for _ in 0..e {
            r = r.mul(self);
        }
        r
    }

    /// Divides by the leading coefficient.
    pub fn monic(&self) -> Self {
        match self.terms.first() {
            None => self.clone(),
            Some((_, c)) => self.scale(&c.recip()),
        }
    }

    /// Exact partial derivative with respect to `v`.
    pub fn differentiate(&self, v: VariableId) -> Self {
        let idx = v.index(self.dim);
        let terms = self.terms.iter().filter_map(|(m, c)| {
            let e = m.exponents()[idx];
            if e == 0 {
                return None;
            }
            let mut d = m.clone();
            d.exps_mut()[idx] = e - 1;
            Some((d, c * Rational::from_integer(e.into())))
        });
        // Differentiation can reorder terms under degrevlex, so re-sort.
        Self::from_terms(self.dim, self.order, terms)
    }

    /// Replaces variable `v` by the rational `value`.
    pub fn substitute(&self, v: VariableId, value: &Rational) -> Self {
        let idx = v.index(self.dim);
        let terms = self.terms.iter().map(|(m, c)| {
            let e = m.exponents()[idx];
            let mut d = m.clone();
            d.exps_mut()[idx] = 0;
            (d, c * num_traits::pow(value.clone(), e as usize))
        });
        Self::from_terms(self.dim, self.order, terms)
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| rational_to_f64(c) * m.eval_f64(point))
            .sum()
    }

    pub fn eval_exact(&self, point: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    t *= num_traits::pow(point[i].clone(), e as usize);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn leading_coefficient_is_positive(&self) -> bool {
        self.terms.first().is_some_and(|(_, c)| c.is_positive())
    }
}

/// Merges two descending term lists into `a + factor * b`, where `factor`
/// (if given) is a `(monomial, coefficient)` multiplier applied to `b`.
pub(crate) fn merge(a: &[Term], b: &[Term], factor: Option<(&Monomial, &Rational)>, order: MonomialOrder) -> Vec<Term> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let scaled = |t: &Term| -> Term {
        match factor {
            Some((m, c)) => (t.0.mul(m), &t.1 * c),
            None => t.clone(),
        }
    };
    let (mut i, mut j) = (0, 0);
    let mut pending_b = b.first().map(scaled);
    while i < a.len() || pending_b.is_some() {
        match (a.get(i), pending_b.as_ref()) {
            (Some(ta), Some(tb)) => match order.compare(&ta.0, &tb.0) {
                Ordering::Greater => {
                    out.push(ta.clone());
                    i += 1;
                }
                Ordering::Less => {
                    out.push(pending_b.take().unwrap());
                    j += 1;
                    pending_b = b.get(j).map(scaled);
                }
                Ordering::Equal => {
                    let c = &ta.1 + &tb.1;
                    if !c.is_zero() {
                        out.push((ta.0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                    pending_b = b.get(j).map(scaled);
                }
            },
            (Some(_), None) => {
                out.extend_from_slice(&a[i..]);
                i = a.len();
            }
            (None, Some(_)) => {
                out.push(pending_b.take().unwrap());
                j += 1;
                pending_b = b.get(j).map(scaled);
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

/// Result of multivariate division `f = sum q_i g_i + r`.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub remainder: Polynomial,
    pub quotients: Vec<Polynomial>,
}

/// `S(f, g) = lcm/(c_f in(f)) * f - lcm/(c_g in(g)) * g`.
pub fn s_polynomial(f: &Polynomial, g: &Polynomial, order: MonomialOrder) -> Result<Polynomial, PolyError> {
    let f = f.with_order(order);
    let g = g.with_order(order);
    let (mf, cf) = f.leading_term(order)?;
    let (mg, cg) = g.leading_term(order)?;
    let l = mf.lcm(&mg);
    let uf = l.div(&mf).expect("lcm is a multiple");
    let ug = l.div(&mg).expect("lcm is a multiple");
    let a = f.mul_term(&uf, &cf.recip());
    let b = g.mul_term(&ug, &cg.recip());
    Ok(a.sub(&b))
}

/// Multivariate division of `f` by the ordered list `divisors`.
///
/// At each step the current leading term is divided by the first divisor (in
/// list order) whose initial monomial divides it; otherwise it moves to the
/// remainder. This is fully deterministic.
pub fn reduce(f: &Polynomial, divisors: &[Polynomial], order: MonomialOrder) -> Result<Reduction, PolyError> {
    let gs: Vec<Polynomial> = divisors.iter().map(|g| g.with_order(order)).collect();
    if gs.iter().any(Polynomial::is_zero) {
        return Err(PolyError::ZeroDivisor);
    }
    let dim = f.dim();
    let mut quotients: Vec<Vec<Term>> = vec![Vec::new(); gs.len()];
    let (remainder, _) = divide_impl(f.with_order(order).terms, &gs, order, Some(&mut quotients), false);
    Ok(Reduction {
        remainder: Polynomial::from_sorted(dim, order, remainder),
        quotients: quotients
            .into_iter()
            .map(|q| Polynomial::from_sorted(dim, order, q))
            .collect(),
    })
}

/// Remainder only; the divisors must already be sorted under `order` and
/// nonzero. With `stop_at_head`, stops as soon as the leading term is
/// irreducible (top-reduction) and returns the rest untouched.
pub(crate) fn divide_impl(
    mut p: Vec<Term>,
    gs: &[Polynomial],
    order: MonomialOrder,
    mut quotients: Option<&mut Vec<Vec<Term>>>,
    stop_at_head: bool,
) -> (Vec<Term>, usize) {
    let mut remainder: Vec<Term> = Vec::new();
    let mut steps = 0usize;
    // `p[start..]` is the live part; terms before `start` are already moved out.
    let mut start = 0;
    while start < p.len() {
        let (m, c) = &p[start];
        let hit = gs.iter().enumerate().find_map(|(i, g)| {
            let (gm, gc) = g.lead().expect("nonzero divisor");
            m.div(gm).map(|shift| (i, shift, c / gc))
        });
        match hit {
            Some((i, shift, q)) => {
                steps += 1;
                let neg = -&q;
                let g = &gs[i];
                // The head cancels; merge the rest.
                let rest = merge(&p[start + 1..], &g.terms()[1..], Some((&shift, &neg)), order);
                if let Some(qs) = quotients.as_deref_mut() {
                    qs[i].push((shift, q));
                }
                p = rest;
                start = 0;
            }
            None => {
                if stop_at_head {
                    remainder.extend(p.drain(start..));
                    return (remainder, steps);
                }
                remainder.push(p[start].clone());
                start += 1;
            }
        }
    }
    (remainder, steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::rat;
    use proptest::prelude::*;

    const ORD: MonomialOrder = MonomialOrder::DegRevLex;

    fn x(i: usize, j: usize) -> Polynomial {
        Polynomial::x(2, ORD, i, j)
    }
    fn y(i: usize, j: usize) -> Polynomial {
        Polynomial::y(2, ORD, i, j)
    }
    fn c(n: i64, d: i64) -> Polynomial {
        Polynomial::constant(2, ORD, rat(n, d))
    }
    fn sphere(i: usize, j: usize) -> Polynomial {
        x(i, j).pow(2).add(&y(i, j).pow(2)).sub(&c(1, 2))
    }

    #[test]
    fn leading_terms() {
        let f = sphere(1, 1);
        let (m, k) = f.leading_term(ORD).unwrap();
        assert_eq!(m, Monomial::var(0, 8, 2));
        assert_eq!(k, rat(1, 1));

        let one = c(1, 1);
        let (m, k) = one.leading_term(ORD).unwrap();
        assert!(m.is_one());
        assert_eq!(k, rat(1, 1));

        // Enumerate the support and pick the Lex maximum by brute force.
        let g = x(1, 1)
            .mul(&x(1, 2))
            .add(&y(1, 1).mul(&y(1, 2)))
            .add(&x(2, 1).mul(&x(2, 2)))
            .add(&y(2, 1).mul(&y(2, 2)));
        let mut support: Vec<Monomial> = g.terms().iter().map(|t| t.0.clone()).collect();
        support.sort_by(|a, b| a.exponents().cmp(b.exponents()));
        let brute = support.last().unwrap().clone();
        let (m, _) = g.leading_term(MonomialOrder::Lex).unwrap();
        assert_eq!(m, brute);
        assert_eq!(m, x(1, 1).mul(&x(1, 2)).terms()[0].0);

        assert!(matches!(
            Polynomial::zero(2, ORD).leading_term(ORD),
            Err(PolyError::ZeroPolynomial)
        ));
    }

    #[test]
    fn s_polynomial_examples() {
        let f = sphere(1, 1);
        assert!(s_polynomial(&f, &f, ORD).unwrap().is_zero());

        let g = sphere(1, 2);
        let s = s_polynomial(&f, &g, ORD).unwrap();
        let expected = x(1, 2)
            .pow(2)
            .mul(&y(1, 1).pow(2).sub(&c(1, 2)))
            .sub(&x(1, 1).pow(2).mul(&y(1, 2).pow(2).sub(&c(1, 2))));
        assert_eq!(s, expected);

        // Coprime leading monomials: S(f, g) reduces to zero against {f, g}.
        let r = reduce(&s, &[f.clone(), g.clone()], ORD).unwrap();
        assert!(r.remainder.is_zero());

        assert!(s_polynomial(&f, &Polynomial::zero(2, ORD), ORD).is_err());
    }

    #[test]
    fn division_examples() {
        let g = sphere(1, 1);
        let r = reduce(&g, &[g.clone()], ORD).unwrap();
        assert!(r.remainder.is_zero());
        assert_eq!(r.quotients, vec![c(1, 1)]);

        let f = x(1, 1).pow(2).add(&y(1, 1).pow(2));
        let r = reduce(&f, &[g.clone()], ORD).unwrap();
        assert_eq!(r.remainder, c(1, 2));
        assert_eq!(r.quotients, vec![c(1, 1)]);

        assert!(matches!(
            reduce(&f, &[Polynomial::zero(2, ORD)], ORD),
            Err(PolyError::ZeroDivisor)
        ));
    }

    #[test]
    fn differentiation() {
        let f = sphere(1, 1);
        assert_eq!(f.differentiate(VariableId::x(1, 1)), x(1, 1).scale(&rat(2, 1)));
        assert!(c(3, 4).differentiate(VariableId::y(2, 2)).is_zero());
        // d/dx (x^3 y - x y^2) = 3 x^2 y - y^2
        let p = x(1, 1).pow(3).mul(&y(1, 1)).sub(&x(1, 1).mul(&y(1, 1).pow(2)));
        let d = p.differentiate(VariableId::x(1, 1));
        assert_eq!(d, x(1, 1).pow(2).mul(&y(1, 1)).scale(&rat(3, 1)).sub(&y(1, 1).pow(2)));
    }

    #[test]
    fn derivative_matches_finite_differences() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            // random degree-4 polynomial in the 8 variables of dimension 2
            let mut terms = Vec::new();
            for _ in 0..8 {
                let mut e = vec![0u32; 8];
                for _ in 0..rng.random_range(0..=4) {
                    e[rng.random_range(0..8)] += 1;
                }
                terms.push((Monomial::from_exponents(e), rat(rng.random_range(-9..=9), rng.random_range(1..=5))));
            }
            let p = Polynomial::from_terms(2, ORD, terms);
            let pt: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
            for idx in 0..8 {
                let v = VariableId::from_index(idx, 2);
                let exact = p.differentiate(v).eval_f64(&pt);
                let h = 1e-5;
                let mut a = pt.clone();
                let mut b = pt.clone();
                a[idx] += h;
                b[idx] -= h;
                let fd = (p.eval_f64(&a) - p.eval_f64(&b)) / (2.0 * h);
                let scale = exact.abs().max(1.0);
                assert!((exact - fd).abs() / scale < 1e-6, "{exact} vs {fd}");
            }
        }
    }

    fn arb_poly_in(vars: std::ops::Range<usize>, min_terms: usize) -> impl Strategy<Value = Polynomial> {
        let width = vars.len();
        proptest::collection::vec(
            (proptest::collection::vec(0u32..3, width), (-4i64..=4).prop_filter("nonzero", |a| *a != 0), 1i64..=3),
            min_terms..5,
        )
        .prop_map(move |ts| {
            Polynomial::from_terms(
                2,
                ORD,
                ts.into_iter().map(|(e, a, b)| {
                    let mut full = vec![0u32; 8];
                    full[vars.start..vars.start + e.len()].copy_from_slice(&e);
                    (Monomial::from_exponents(full), rat(a, b))
                }),
            )
        })
    }

    fn arb_poly() -> impl Strategy<Value = Polynomial> {
        arb_poly_in(0..3, 0)
    }

    fn arb_nonzero() -> impl Strategy<Value = Polynomial> {
        arb_poly_in(0..3, 1).prop_filter("nonzero", |p| !p.is_zero())
    }

    proptest! {
        #[test]
        fn ring_axioms(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert!(a.sub(&a).is_zero());
        }

        #[test]
        fn leading_term_is_multiplicative(a in arb_nonzero(), b in arb_nonzero()) {
            for order in [MonomialOrder::Lex, MonomialOrder::DegRevLex] {
                let (ma, ca) = a.leading_term(order).unwrap();
                let (mb, cb) = b.leading_term(order).unwrap();
                let (mp, cp) = a.mul(&b).leading_term(order).unwrap();
                prop_assert_eq!(mp, ma.mul(&mb));
                prop_assert_eq!(cp, ca * cb);
            }
        }

        #[test]
        fn division_identity_and_idempotence(f in arb_poly(), g1 in arb_nonzero(), g2 in arb_nonzero()) {
            for order in [MonomialOrder::Lex, MonomialOrder::DegRevLex] {
                let gs = [g1.clone(), g2.clone()];
                let r = reduce(&f, &gs, order).unwrap();
                let recombined = r.quotients[0].mul(&g1).add(&r.quotients[1].mul(&g2)).add(&r.remainder);
                prop_assert_eq!(recombined.with_order(ORD), f.clone());
                for (m, _) in r.remainder.terms() {
                    for g in &gs {
                        prop_assert!(!g.leading_term(order).unwrap().0.divides(m));
                    }
                }
                let again = reduce(&r.remainder, &gs, order).unwrap();
                prop_assert_eq!(&again.remainder, &r.remainder);
                prop_assert!(again.quotients.iter().all(Polynomial::is_zero));
            }
        }

        #[test]
        fn coprime_s_polynomials_reduce_to_zero(
            f in arb_poly_in(0..3, 1).prop_filter("nonzero", |p| !p.is_zero()),
            g in arb_poly_in(2..5, 1).prop_filter("nonzero", |p| !p.is_zero()),
        ) {
            // Overlapping variable windows: only keep pairs with coprime heads.
            let (mf, _) = f.leading_term(ORD).unwrap();
            let (mg, _) = g.leading_term(ORD).unwrap();
            prop_assume!(mf.is_coprime(&mg));
            let s = s_polynomial(&f, &g, ORD).unwrap();
            prop_assert!(reduce(&s, &[f.clone(), g.clone()], ORD).unwrap().remainder.is_zero());
        }
    }
}
