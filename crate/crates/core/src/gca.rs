//! Free graded-commutative algebras over ℚ.
//!
//! A generator carries an internal (cohomological) degree, a Hodge degree and
//! a weight. Its parity is the parity of internal + Hodge degree, so in a de
//! Rham extension `dx` is odd while `dξ` (for odd `ξ`) is even. Monomials are
//! exponent vectors in generator order; odd exponents are 0 or 1 and products
//! reorder factors with the Koszul sign.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::parse::ExprRing;
use crate::poly::{monomial_text, write_terms, Monomial, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Generator {
    pub name: String,
    pub degree: i32,
    pub hodge: u32,
    pub weight: u32,
}

impl Generator {
    pub fn new(name: impl Into<String>, degree: i32, hodge: u32, weight: u32) -> Self {
        Generator { name: name.into(), degree, hodge, weight }
    }

    pub fn is_odd(&self) -> bool {
        (self.degree + self.hodge as i32).rem_euclid(2) == 1
    }

    /// Total degree `internal + hodge`.
    pub fn total_degree(&self) -> i32 {
        self.degree + self.hodge as i32
    }
}

/// Exponent vector with one entry per generator.
pub type Exps = Vec<u32>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Algebra {
    gens: Arc<Vec<Generator>>,
}

/// Element of an [`Algebra`]; the algebra is passed to every operation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Element {
    terms: BTreeMap<Exps, Rational>,
}

impl Element {
    pub fn zero() -> Self {
        Element::default()
    }

    pub fn from_term(m: Exps, c: Rational) -> Self {
        let mut e = Element::zero();
        e.add_term(m, c);
        e
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Exps, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, m: &[u32]) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add_term(&mut self, m: Exps, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &Element, c: &Rational) {
        for (m, v) in &other.terms {
            self.add_term(m.clone(), v * c);
        }
    }

    pub fn add(&self, other: &Element) -> Element {
        let mut out = self.clone();
        out.add_scaled(other, &Rational::one());
        out
    }

    pub fn sub(&self, other: &Element) -> Element {
        let mut out = self.clone();
        out.add_scaled(other, &-Rational::one());
        out
    }

    pub fn scale(&self, c: &Rational) -> Element {
        let mut out = Element::zero();
        out.add_scaled(self, c);
        out
    }

    pub fn neg(&self) -> Element {
        self.scale(&-Rational::one())
    }

    /// Keeps the terms satisfying `keep`.
    pub fn filter(&self, keep: impl Fn(&Exps) -> bool) -> Element {
        Element { terms: self.terms.iter().filter(|(m, _)| keep(m)).map(|(m, c)| (m.clone(), c.clone())).collect() }
    }

    /// Applies `f` to every exponent vector; `f` must be injective on the support.
    pub fn map_monomials(&self, f: impl Fn(&Exps) -> Exps) -> Element {
        let mut out = Element::zero();
        for (m, c) in &self.terms {
            out.add_term(f(m), c.clone());
        }
        out
    }
}

impl Algebra {
    pub fn new(gens: Vec<Generator>) -> Self {
        Algebra { gens: Arc::new(gens) }
    }

    pub fn generators(&self) -> &[Generator] {
        &self.gens
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.gens.iter().position(|g| g.name == name)
    }

    pub fn names(&self) -> Vec<String> {
        self.gens.iter().map(|g| g.name.clone()).collect()
    }

    pub fn unit_exps(&self) -> Exps {
        vec![0; self.len()]
    }

    pub fn one(&self) -> Element {
        Element::from_term(self.unit_exps(), Rational::one())
    }

    pub fn scalar(&self, c: Rational) -> Element {
        Element::from_term(self.unit_exps(), c)
    }

    pub fn generator(&self, i: usize) -> Element {
        let mut m = self.unit_exps();
        m[i] = 1;
        Element::from_term(m, Rational::one())
    }

    pub fn degree(&self, m: &[u32]) -> i32 {
        m.iter().zip(self.gens.iter()).map(|(&e, g)| e as i32 * g.degree).sum()
    }

    pub fn hodge(&self, m: &[u32]) -> u32 {
        m.iter().zip(self.gens.iter()).map(|(&e, g)| e * g.hodge).sum()
    }

    pub fn weight(&self, m: &[u32]) -> u32 {
        m.iter().zip(self.gens.iter()).map(|(&e, g)| e * g.weight).sum()
    }

    pub fn total_degree(&self, m: &[u32]) -> i32 {
        self.degree(m) + self.hodge(m) as i32
    }

    pub fn is_odd(&self, m: &[u32]) -> bool {
        m.iter().zip(self.gens.iter()).filter(|(&e, g)| g.is_odd() && e % 2 == 1).count() % 2 == 1
    }

    /// Product of two monomials with its Koszul sign, or `None` if an odd
    /// generator would appear twice.
    pub fn mul_monomials(&self, a: &[u32], b: &[u32]) -> Option<(bool, Exps)> {
        let mut negative = false;
        let mut odd_in_a_after = 0usize;
        // walk from the last generator so that `odd_in_a_after` counts a's odd
        // generators with a larger index than the current one
        for i in (0..self.len()).rev() {
            let g = &self.gens[i];
            if g.is_odd() {
                if a[i] + b[i] > 1 {
                    return None;
                }
                if b[i] == 1 && odd_in_a_after % 2 == 1 {
                    negative = !negative;
                }
                if a[i] == 1 {
                    odd_in_a_after += 1;
                }
            }
        }
        Some((negative, a.iter().zip(b).map(|(x, y)| x + y).collect()))
    }

    pub fn mul(&self, a: &Element, b: &Element) -> Element {
        let mut out = Element::zero();
        for (ma, ca) in &a.terms {
            for (mb, cb) in &b.terms {
                if let Some((neg, m)) = self.mul_monomials(ma, mb) {
                    let c = ca * cb;
                    out.add_term(m, if neg { -c } else { c });
                }
            }
        }
        out
    }

    pub fn monomial_element(&self, m: Exps) -> Element {
        Element::from_term(m, Rational::one())
    }

    /// Applies the derivation of the given parity determined by its values
    /// on generators: `D(ab) = D(a)b + (-1)^(parity·|a|) a D(b)`.
    pub fn derive(&self, images: &[Element], odd: bool, x: &Element) -> Element {
        let mut out = Element::zero();
        for (m, c) in &x.terms {
            out.add_scaled(&self.derive_monomial(images, odd, m), c);
        }
        out
    }

    pub fn derive_monomial(&self, images: &[Element], odd: bool, m: &[u32]) -> Element {
        let mut out = Element::zero();
        let mut prefix = self.unit_exps();
        let mut prefix_odd = false;
        for i in 0..self.len() {
            let e = m[i];
            if e > 0 && !images[i].is_zero() {
                // D(g^e) = e g^(e-1) D(g); for odd g, e = 1
                let mut rest = self.unit_exps();
                rest[i] = e - 1;
                let dge = self.mul(&self.monomial_element(rest), &images[i]).scale(&Rational::from_integer(e.into()));
                let mut suffix = self.unit_exps();
                suffix[i + 1..].copy_from_slice(&m[i + 1..]);
                let term = self.mul(&self.mul(&self.monomial_element(prefix.clone()), &dge), &self.monomial_element(suffix));
                let sign = if odd && prefix_odd { -Rational::one() } else { Rational::one() };
                out.add_scaled(&term, &sign);
            }
            prefix[i] = e;
            if self.gens[i].is_odd() && e % 2 == 1 {
                prefix_odd = !prefix_odd;
            }
        }
        out
    }

    pub fn display(&self, x: &Element) -> String {
        let names = self.names();
        let mut terms: Vec<(Monomial, &Rational)> =
            x.terms.iter().map(|(m, c)| (Monomial::from_exponents(m.clone()), c)).collect();
        terms.sort_by(|a, b| b.0.cmp(&a.0));
        let mut s = String::new();
        write_terms(&mut s, terms.iter().map(|(m, c)| (monomial_text(&names, m.exponents()), *c))).expect("string write");
        s
    }

    /// All monomials with weight ≤ `w_max` whose Hodge degree lies in
    /// `hodge`, passing `keep`, in a deterministic order.
    pub fn monomials_up_to_weight(
        &self,
        w_max: u32,
        hodge: std::ops::RangeInclusive<u32>,
        keep: &dyn Fn(&Exps) -> bool,
    ) -> Vec<Exps> {
        let mut out = Vec::new();
        let mut cur = self.unit_exps();
        self.enumerate(0, w_max, *hodge.end(), &mut cur, &mut |m: &Exps| {
            if hodge.contains(&self.hodge(m)) && keep(m) {
                out.push(m.clone());
            }
        });
        out
    }

    fn enumerate(&self, i: usize, w_left: u32, h_left: u32, cur: &mut Exps, visit: &mut dyn FnMut(&Exps)) {
        if i == self.len() {
            visit(cur);
            return;
        }
        let g = &self.gens[i];
        let max_e = if g.is_odd() {
            1
        } else if g.weight == 0 {
            // callers reject weight-0 even generators; this keeps the loop finite
            0
        } else {
            w_left / g.weight
        };
        for e in 0..=max_e {
            if e * g.weight > w_left || e * g.hodge > h_left {
                break;
            }
            cur[i] = e;
            self.enumerate(i + 1, w_left - e * g.weight, h_left - e * g.hodge, cur, visit);
        }
        cur[i] = 0;
    }
}

/// Parses elements with generator names as variables.
impl ExprRing for Algebra {
    type Value = Element;

    fn constant(&self, c: Rational) -> Element {
        self.scalar(c)
    }

    fn generator(&self, name: &str) -> Option<Element> {
        self.index_of(name).map(|i| Algebra::generator(self, i))
    }

    fn add(&self, a: &Element, b: &Element) -> Element {
        a.add(b)
    }

    fn mul(&self, a: &Element, b: &Element) -> Element {
        Algebra::mul(self, a, b)
    }

    fn neg(&self, a: &Element) -> Element {
        a.neg()
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_expr;
    use crate::poly::rat;
    use proptest::prelude::*;

    /// x even; t, s odd of degree -1; u even of degree -2; dx odd (hodge 1).
    fn alg() -> Algebra {
        Algebra::new(vec![
            Generator::new("x", 0, 0, 1),
            Generator::new("t", -1, 0, 1),
            Generator::new("s", -1, 0, 1),
            Generator::new("u", -2, 0, 1),
            Generator::new("dx", 0, 1, 1),
        ])
    }

    fn el(a: &Algebra, s: &str) -> Element {
        parse_expr(s).unwrap().eval(a).unwrap()
    }

    #[test]
    fn koszul_signs() {
        let a = alg();
        assert_eq!(el(&a, "t*s"), el(&a, "-(s*t)"));
        assert!(el(&a, "t*t").is_zero());
        assert_eq!(el(&a, "t*u"), el(&a, "u*t"));
        assert_eq!(el(&a, "dx*t"), el(&a, "-(t*dx)"));
        assert_eq!(el(&a, "s*dx*t"), el(&a, "t*s*dx"));
    }

    #[test]
    fn odd_derivation_on_products() {
        let a = alg();
        // ∂t = x^2, ∂s = x, ∂u = t
        let images = vec![Element::zero(), el(&a, "x^2"), el(&a, "x"), el(&a, "t"), Element::zero()];
        let d = |e: &Element| a.derive(&images, true, e);
        assert_eq!(d(&el(&a, "t*s")), el(&a, "x^2*s - x*t"));
        assert_eq!(d(&el(&a, "u^2")), el(&a, "2*u*t"));
        // d² vanishes on u^2: ∂(2ut) = 2 t t + 2 u x^2 ... only because ∂t is even
        assert_eq!(d(&d(&el(&a, "u^2"))), el(&a, "2*x^2*u"));
    }

    #[test]
    fn enumeration_counts() {
        let a = Algebra::new(vec![Generator::new("x", 0, 0, 1), Generator::new("y", 0, 0, 1)]);
        assert_eq!(a.monomials_up_to_weight(5, 0..=0, &|_| true).len(), 21);
        let b = Algebra::new(vec![Generator::new("x", 0, 0, 1), Generator::new("t", -1, 0, 1)]);
        assert_eq!(b.monomials_up_to_weight(2, 0..=0, &|_| true).len(), 5);
    }

    fn element_strategy() -> impl Strategy<Value = Element> {
        let a = alg();
        proptest::collection::vec((proptest::collection::vec(0u32..=2, 5), -3i64..=3), 0..4).prop_map(move |terms| {
            let mut e = Element::zero();
            for (mut m, c) in terms {
                for (i, g) in a.generators().iter().enumerate() {
                    if g.is_odd() {
                        m[i] = m[i].min(1);
                    }
                }
                e.add_term(m, rat(c));
            }
            e
        })
    }

    proptest! {
        #[test]
        fn associative(p in element_strategy(), q in element_strategy(), r in element_strategy()) {
            let a = alg();
            prop_assert_eq!(a.mul(&a.mul(&p, &q), &r), a.mul(&p, &a.mul(&q, &r)));
        }

        #[test]
        fn leibniz(p in element_strategy(), q in element_strategy()) {
            let a = alg();
            let images = vec![el(&a, "dx"), el(&a, "x^2"), Element::zero(), el(&a, "s"), Element::zero()];
            // odd derivation on homogeneous parts
            for parity in [false, true] {
                let pp = p.filter(|m| a.is_odd(m) == parity);
                let lhs = a.derive(&images, true, &a.mul(&pp, &q));
                let mut rhs = a.mul(&a.derive(&images, true, &pp), &q);
                let second = a.mul(&pp, &a.derive(&images, true, &q));
                rhs.add_scaled(&second, &if parity { -Rational::one() } else { Rational::one() });
                prop_assert_eq!(lhs, rhs);
            }
        }
    }
}
